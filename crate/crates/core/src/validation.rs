//! Side-by-side comparison of analytic metrics and Monte Carlo estimates.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::montecarlo::{estimate_with, McConfig, SnrMode};
use crate::policy::RelayPolicy;
use crate::quadrature::QuadSpec;
use crate::shared::{power_outage_prob, total_secrecy_outage};
use crate::types::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationSpec {
    /// Absolute tolerance of the high-SNR outage against exact-SNR sampling.
    pub outage_abs_tol: f64,
    /// Absolute tolerance of the positive-rate probability.
    pub pos_abs_tol: f64,
    /// Standard-error multiple for the pure quadrature-versus-sampling checks.
    pub sigma_multiplier: f64,
    /// Multiplies η on the analytic side only. Leave at 1 outside of
    /// sensitivity tests.
    pub analytic_eta_scale: f64,
}

impl Default for ValidationSpec {
    fn default() -> Self {
        Self {
            outage_abs_tol: 0.015,
            pos_abs_tol: 0.01,
            sigma_multiplier: 3.0,
            analytic_eta_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub policy: String,
    pub parameter: String,
    pub value: f64,
    pub metric: String,
    /// Which simulation it was compared with: `exact` or `high_snr_approx`.
    pub mc_mode: SnrMode,
    pub analytic: f64,
    pub mc: f64,
    pub mc_std_error: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct RowBuilder<'a> {
    policy: &'a dyn RelayPolicy,
    x: f64,
}

impl RowBuilder<'_> {
    fn row(&self, metric: &str, mode: SnrMode, analytic: f64, mc: f64, se: f64, tolerance: f64) -> ValidationRow {
        let gap = (analytic - mc).abs();
        ValidationRow {
            policy: self.policy.name().to_string(),
            parameter: self.policy.parameter_name().to_string(),
            value: self.x,
            metric: metric.to_string(),
            mc_mode: mode,
            analytic,
            mc,
            mc_std_error: se,
            gap,
            tolerance,
            pass: gap <= tolerance,
        }
    }
}

/// Standard error floor from the analytic probability, so a sample that
/// happens to contain no hits does not get a zero-width band.
fn binomial_se(prob: f64, n: u64) -> f64 {
    (prob.clamp(0.0, 1.0) * (1.0 - prob.clamp(0.0, 1.0)) / n as f64).sqrt()
}

/// Compares one design point; `mc.snr_mode` is ignored, both modes are run.
pub fn validate_point(
    policy: &dyn RelayPolicy,
    p: &SystemParams,
    x: f64,
    mc: &McConfig,
    quad: &QuadSpec,
    spec: &ValidationSpec,
) -> Result<Vec<ValidationRow>> {
    let analytic_params = p.with_eta((p.eta * spec.analytic_eta_scale).min(1.0));
    let pp = power_outage_prob(&analytic_params)?;
    let outage = total_secrecy_outage(pp, policy.secrecy_outage(&analytic_params, x, quad)?)?;
    let pos = policy.prob_positive_exact(&analytic_params, x, quad)?;
    let ergodic_exact = policy.ergodic_exact(&analytic_params, x, quad)?;
    let ergodic_approx = policy.ergodic_approx(&analytic_params, x, quad)?;

    let exact = estimate_with(
        policy,
        p,
        x,
        &McConfig {
            snr_mode: SnrMode::Exact,
            ..*mc
        },
    )?;
    let approx = estimate_with(
        policy,
        p,
        x,
        &McConfig {
            snr_mode: SnrMode::HighSnrApprox,
            ..*mc
        },
    )?;
    let n = mc.n_samples;
    let k = spec.sigma_multiplier;
    let b = RowBuilder { policy, x };
    let sigma = |se: f64, prob: f64| se.max(binomial_se(prob, n));
    Ok(vec![
        b.row(
            "power_outage",
            SnrMode::Exact,
            pp,
            exact.power_outage.mean,
            exact.power_outage.std_error,
            k * sigma(exact.power_outage.std_error, pp),
        ),
        b.row(
            "secrecy_outage_total",
            SnrMode::Exact,
            outage,
            exact.secrecy_outage_total.mean,
            exact.secrecy_outage_total.std_error,
            spec.outage_abs_tol,
        ),
        b.row(
            "secrecy_outage_total",
            SnrMode::HighSnrApprox,
            outage,
            approx.secrecy_outage_total.mean,
            approx.secrecy_outage_total.std_error,
            k * sigma(approx.secrecy_outage_total.std_error, outage),
        ),
        b.row(
            "p_pos_exact",
            SnrMode::Exact,
            pos,
            exact.prob_positive.mean,
            exact.prob_positive.std_error,
            spec.pos_abs_tol,
        ),
        b.row(
            "ergodic_exact",
            SnrMode::Exact,
            ergodic_exact,
            exact.ergodic.mean,
            exact.ergodic.std_error,
            k * exact.ergodic.std_error,
        ),
        b.row(
            "ergodic_approx",
            SnrMode::HighSnrApprox,
            ergodic_approx,
            approx.ergodic.mean,
            approx.ergodic.std_error,
            k * approx.ergodic.std_error,
        ),
    ])
}

/// [`validate_point`] over several design points.
pub fn validate_grid(
    policy: &dyn RelayPolicy,
    p: &SystemParams,
    xs: &[f64],
    mc: &McConfig,
    quad: &QuadSpec,
    spec: &ValidationSpec,
) -> Result<Vec<ValidationRow>> {
    let mut rows = Vec::new();
    for &x in xs {
        rows.extend(validate_point(policy, p, x, mc, quad, spec)?);
    }
    Ok(rows)
}

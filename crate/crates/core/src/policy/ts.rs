//! Time switching: the relay harvests for a fraction α of the slot and uses
//! the remaining (1 − α) for two equal information sub-slots.

use crate::error::{Error, Result};
use crate::policy::{kernels, RelayPolicy};
use crate::quadrature::QuadSpec;
use crate::shared::power_outage_prob;
use crate::special::{cubic_positive_root, CubicCoeffs};
use crate::types::{check_fraction, ChannelSample, PolicyKind, SystemParams};

/// Independent of α: harvesting and reception do not share the signal.
pub fn snr_relay_ts(p: &SystemParams, s: ChannelSample) -> f64 {
    p.p_s * s.g_sr / (p.p_d * s.g_rd + p.n0)
}

pub fn snr_dest_ts_exact(p: &SystemParams, alpha: f64, s: ChannelSample) -> f64 {
    let received = p.p_s * s.g_sr + p.p_d * s.g_rd;
    if received == 0.0 || alpha >= 1.0 {
        return 0.0;
    }
    let num = 2.0 * p.eta * alpha * p.p_s * s.g_sr * s.g_rd;
    let den = 2.0 * p.eta * alpha * s.g_rd * p.n0 + p.n0 * (1.0 - alpha) + p.n0 * p.n0 * (1.0 - alpha) / received;
    num / den
}

/// Destination SNR with the noise-squared term dropped.
pub fn snr_dest_ts_approx(p: &SystemParams, alpha: f64, s: ChannelSample) -> f64 {
    if alpha >= 1.0 {
        return 0.0;
    }
    let num = 2.0 * p.eta * alpha * p.p_s * s.g_sr * s.g_rd;
    let den = p.n0 * (2.0 * p.eta * alpha * s.g_rd + 1.0 - alpha);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Thresholds and constants of the TS closed forms at one (params, α) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsDerived {
    pub params: SystemParams,
    pub alpha: f64,
    pub power: f64,
    /// 2^(2 R_th / (1 − α))
    pub delta: f64,
    pub theta1: f64,
    pub theta2_limit: f64,
    pub a_coef: f64,
    pub b_coef: f64,
    pub theta3: f64,
    pub m_x: f64,
    pub m_y: f64,
    pub m_z: f64,
}

impl TsDerived {
    /// Requires equal powers and 0 < α < 1.
    pub fn new(p: &SystemParams, alpha: f64) -> Result<Self> {
        let power = p.common_power()?;
        check_fraction("alpha", alpha)?;
        if alpha == 0.0 || alpha == 1.0 {
            return Err(Error::invalid("alpha", "closed forms need 0 < alpha < 1"));
        }
        let (n0, eta) = (p.n0, p.eta);
        let delta = 2f64.powf(2.0 * p.r_th / (1.0 - alpha));
        let dm1 = delta - 1.0;
        let root = dm1.hypot(2.0 * (delta * power * (1.0 - alpha) / (2.0 * eta * alpha * n0)).sqrt());
        let theta1 = (dm1 + root) / (2.0 * power / n0);
        let k = 2.0 * eta * alpha / (1.0 - alpha);
        let a_coef = n0 / (k * power);
        let b_coef = n0 * n0 / (k * power * power);
        let theta3 = cubic_positive_root(CubicCoeffs::new(a_coef, b_coef)?)?;
        Ok(Self {
            params: *p,
            alpha,
            power,
            delta,
            theta1,
            theta2_limit: a_coef.sqrt(),
            a_coef,
            b_coef,
            theta3,
            m_x: power * p.lambda_sr / n0,
            m_y: power * p.lambda_rd / n0,
            m_z: k * p.lambda_rd,
        })
    }

    /// Outage iff g_sr · ν(g_rd) < δ − 1.
    pub fn nu(&self, x: f64) -> f64 {
        let (a, eta, n0, pw) = (self.alpha, self.params.eta, self.params.n0, self.power);
        2.0 * eta * a * pw * x / (n0 * (2.0 * eta * a * x + 1.0 - a)) - pw * self.delta / (pw * x + n0)
    }

    /// Positive secrecy rate (exact SNR) iff g_sr > ψ(g_rd), for g_rd > θ2.
    pub fn psi(&self, x: f64) -> f64 {
        let (a, eta, n0, pw) = (self.alpha, self.params.eta, self.params.n0, self.power);
        let k = 2.0 * eta * a / (1.0 - a);
        let g = k * pw * x * x - n0;
        if g <= 0.0 {
            return f64::INFINITY;
        }
        n0 * n0 / (pw * g) - x
    }
}

fn degenerate(alpha: f64) -> bool {
    alpha <= 0.0 || alpha >= 1.0
}

pub fn secrecy_outage_ts(p: &SystemParams, alpha: f64, spec: &QuadSpec) -> Result<f64> {
    p.common_power()?;
    check_fraction("alpha", alpha)?;
    if degenerate(alpha) {
        return Ok(1.0);
    }
    let d = TsDerived::new(p, alpha)?;
    kernels::secrecy_outage(d.delta, d.theta1, |x| d.nu(x), p.lambda_sr, p.lambda_rd, spec)
}

pub fn prob_pos_secrecy_ts_exact(p: &SystemParams, alpha: f64, spec: &QuadSpec) -> Result<f64> {
    let pp = power_outage_prob(p)?;
    check_fraction("alpha", alpha)?;
    if degenerate(alpha) {
        return Ok(0.0);
    }
    let d = TsDerived::new(p, alpha)?;
    let cond = kernels::prob_positive(d.theta2_limit, d.theta3, |x| d.psi(x), p.lambda_sr, p.lambda_rd, spec)?;
    Ok((1.0 - pp) * cond)
}

pub fn prob_pos_secrecy_ts_approx(p: &SystemParams, alpha: f64) -> Result<f64> {
    let pp = power_outage_prob(p)?;
    check_fraction("alpha", alpha)?;
    if degenerate(alpha) {
        return Ok(0.0);
    }
    let d = TsDerived::new(p, alpha)?;
    Ok((1.0 - pp) * (-d.a_coef.sqrt() / p.lambda_rd).exp())
}

pub fn ergodic_ts_exact(p: &SystemParams, alpha: f64, spec: &QuadSpec) -> Result<f64> {
    ergodic_ts(p, alpha, spec, true)
}

pub fn ergodic_ts_approx(p: &SystemParams, alpha: f64, spec: &QuadSpec) -> Result<f64> {
    ergodic_ts(p, alpha, spec, false)
}

fn ergodic_ts(p: &SystemParams, alpha: f64, spec: &QuadSpec, exact: bool) -> Result<f64> {
    let pp = power_outage_prob(p)?;
    check_fraction("alpha", alpha)?;
    if degenerate(alpha) {
        return Ok(0.0);
    }
    let d = TsDerived::new(p, alpha)?;
    let rate = |gsr: f64, grd: f64| TimeSwitching.secrecy_rate(p, alpha, ChannelSample::new(gsr, grd), exact);
    let cond = if exact {
        kernels::ergodic(rate, |y| d.psi(y), d.theta2_limit, Some(d.theta3), p.lambda_sr, p.lambda_rd, spec)?
    } else {
        kernels::ergodic(rate, |_| 0.0, d.theta2_limit, None, p.lambda_sr, p.lambda_rd, spec)?
    };
    Ok((1.0 - pp) * cond)
}

pub fn ergodic_ts_lower_bound(p: &SystemParams, alpha: f64) -> Result<f64> {
    let pp = power_outage_prob(p)?;
    check_fraction("alpha", alpha)?;
    if degenerate(alpha) {
        return Ok(0.0);
    }
    let d = TsDerived::new(p, alpha)?;
    let (t1, t2) = kernels::lower_bound_terms(d.m_x, d.m_y, d.m_z);
    Ok((1.0 - pp) * ((1.0 - alpha) * (t1 - t2) / (2.0 * std::f64::consts::LN_2)).max(0.0))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TimeSwitching;

impl RelayPolicy for TimeSwitching {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Ts
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["time-switching", "time_switching"]
    }

    fn time_factor(&self, alpha: f64) -> f64 {
        0.5 * (1.0 - alpha)
    }

    fn snr_relay(&self, p: &SystemParams, _x: f64, s: ChannelSample) -> f64 {
        snr_relay_ts(p, s)
    }

    fn snr_dest_exact(&self, p: &SystemParams, x: f64, s: ChannelSample) -> f64 {
        snr_dest_ts_exact(p, x, s)
    }

    fn snr_dest_approx(&self, p: &SystemParams, x: f64, s: ChannelSample) -> f64 {
        snr_dest_ts_approx(p, x, s)
    }

    fn secrecy_outage(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64> {
        secrecy_outage_ts(p, x, spec)
    }

    fn prob_positive_exact(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64> {
        prob_pos_secrecy_ts_exact(p, x, spec)
    }

    fn prob_positive_approx(&self, p: &SystemParams, x: f64) -> Result<f64> {
        prob_pos_secrecy_ts_approx(p, x)
    }

    fn ergodic_exact(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64> {
        ergodic_ts_exact(p, x, spec)
    }

    fn ergodic_approx(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64> {
        ergodic_ts_approx(p, x, spec)
    }

    fn ergodic_lower_bound(&self, p: &SystemParams, x: f64) -> Result<f64> {
        ergodic_ts_lower_bound(p, x)
    }
}

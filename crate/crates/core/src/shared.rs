//! Metrics that do not depend on the relay receiver policy.

use crate::error::{Error, Result};
use crate::special::lower_incomplete_gamma;
use crate::types::SystemParams;

/// Relative mean separation below which the equal-means branches are used.
pub const EQUAL_MEANS_RTOL: f64 = 1e-6;

fn means_equal(l1: f64, l2: f64) -> bool {
    (l1 - l2).abs() <= EQUAL_MEANS_RTOL * l1.max(l2)
}

/// Density of Z = X1 + X2 for independent exponentials with means λ1, λ2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumExpDensity {
    pub lambda_1: f64,
    pub lambda_2: f64,
}

impl SumExpDensity {
    pub fn new(lambda_1: f64, lambda_2: f64) -> Result<Self> {
        for (name, v) in [("lambda_1", lambda_1), ("lambda_2", lambda_2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(Self { lambda_1, lambda_2 })
    }

    /// P(Z < z).
    pub fn cdf(&self, z: f64) -> f64 {
        if !(z > 0.0) {
            return 0.0;
        }
        let (l1, l2) = (self.lambda_1, self.lambda_2);
        let v = if means_equal(l1, l2) {
            let lam = 0.5 * (l1 + l2);
            lower_incomplete_gamma(2.0, z / lam).unwrap_or(1.0)
        } else {
            let t1 = -(-z / l1).exp_m1();
            let t2 = -(-z / l2).exp_m1();
            (l1 * t1 - l2 * t2) / (l1 - l2)
        };
        v.clamp(0.0, 1.0)
    }
}

pub fn sum_exp_pdf(d: &SumExpDensity, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::invalid("z", format!("must be non-negative, got {z}")));
    }
    let (l1, l2) = (d.lambda_1, d.lambda_2);
    if means_equal(l1, l2) {
        let lam = 0.5 * (l1 + l2);
        return Ok(z * (-z / lam).exp() / (lam * lam));
    }
    // (e^{-z/l1} - e^{-z/l2}) / (l1 - l2), written to avoid cancellation
    Ok(-(-z / l1).exp() * (z / l1 - z / l2).exp_m1() / (l1 - l2))
}

/// Probability that the relay's received RF power stays below θ_H.
pub fn power_outage_prob(p: &SystemParams) -> Result<f64> {
    let power = p.common_power()?;
    if p.theta_h == 0.0 {
        return Ok(0.0);
    }
    let d = SumExpDensity::new(p.lambda_sr, p.lambda_rd)?;
    Ok(d.cdf(p.theta_h / power))
}

/// Outage including the harvester-inactive event.
pub fn total_secrecy_outage(p_pout: f64, p_out_cond: f64) -> Result<f64> {
    for (name, v) in [("p_pout", p_pout), ("p_out_cond", p_out_cond)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(name, format!("must be a probability, got {v}")));
        }
    }
    Ok((p_pout + (1.0 - p_pout) * p_out_cond).min(1.0))
}

/// `time_factor * [log2((1 + γ_D) / (1 + γ_R))]+`.
pub fn secrecy_rate(gamma_d: f64, gamma_r: f64, time_factor: f64) -> f64 {
    debug_assert!(gamma_d >= 0.0 && gamma_r >= 0.0);
    debug_assert!((0.0..=1.0).contains(&time_factor));
    let r = (gamma_d.ln_1p() - gamma_r.ln_1p()) / std::f64::consts::LN_2;
    if r > 0.0 {
        time_factor * r
    } else {
        0.0
    }
}

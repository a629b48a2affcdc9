//! One-dimensional search for the best β (PS) or α (TS).
//!
//! A coarse grid picks the basin, golden-section search refines inside the
//! grid cell pair around the best point, and the grid value is kept if the
//! refinement ever does worse.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::RelayPolicy;
use crate::quadrature::QuadSpec;
use crate::shared::{power_outage_prob, total_secrecy_outage};
use crate::types::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Minimise the total secrecy outage (power outage included).
    MinSecrecyOutage,
    /// Maximise the ergodic secrecy rate (exact destination SNR).
    MaxErgodicRate,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::MinSecrecyOutage => "min_secrecy_outage",
            Objective::MaxErgodicRate => "max_ergodic_rate",
        }
    }

    fn minimize(self) -> bool {
        matches!(self, Objective::MinSecrecyOutage)
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "min_secrecy_outage" | "outage" => Ok(Objective::MinSecrecyOutage),
            "max_ergodic_rate" | "ergodic" => Ok(Objective::MaxErgodicRate),
            other => Err(Error::invalid(
                "optimize",
                format!("expected min_secrecy_outage or max_ergodic_rate, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeSpec {
    pub objective: Objective,
    pub coarse_grid_points: usize,
    pub refine_tol: f64,
    pub lower: f64,
    pub upper: f64,
}

impl OptimizeSpec {
    pub fn new(objective: Objective) -> Self {
        Self {
            objective,
            coarse_grid_points: 41,
            refine_tol: 1e-4,
            lower: 0.001,
            upper: 0.999,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coarse_grid_points < 5 {
            return Err(Error::invalid("grid_points", format!("need at least 5, got {}", self.coarse_grid_points)));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::invalid("refine_tol", format!("must be positive, got {}", self.refine_tol)));
        }
        if !(self.lower > 0.0 && self.upper < 1.0 && self.lower < self.upper) {
            return Err(Error::invalid(
                "bounds",
                format!("need 0 < lower < upper < 1, got ({}, {})", self.lower, self.upper),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub param: f64,
    pub value: f64,
    /// The best grid point sat on a bound, so no refinement bracket existed.
    pub boundary: bool,
    pub evaluations: usize,
}

/// Optimises `f` over `[spec.lower, spec.upper]` in the direction of `spec.objective`.
pub fn optimize_scalar<F>(f: F, spec: &OptimizeSpec) -> Result<Optimum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    spec.validate()?;
    let sign = if spec.objective.minimize() { 1.0 } else { -1.0 };
    let cost = |x: f64| f(x).map(|v| sign * v);

    let n = spec.coarse_grid_points;
    let step = (spec.upper - spec.lower) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { spec.upper } else { spec.lower + i as f64 * step })
        .collect();
    let values = grid.par_iter().map(|&x| cost(x)).collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    let mut evaluations = n;
    if best == 0 || best == n - 1 {
        return Ok(Optimum {
            param: grid[best],
            value: sign * values[best],
            boundary: true,
            evaluations,
        });
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = cost(c)?;
    let mut fd = cost(d)?;
    evaluations += 2;
    while b - a > spec.refine_tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d)?;
        }
        evaluations += 1;
    }
    let (x_ref, f_ref) = if fc <= fd { (c, fc) } else { (d, fd) };
    let (param, value) = if f_ref <= values[best] {
        (x_ref, f_ref)
    } else {
        (grid[best], values[best])
    };
    Ok(Optimum {
        param,
        value: sign * value,
        boundary: false,
        evaluations,
    })
}

/// The objective value of `policy` at design variable `x`.
pub fn objective_value(
    p: &SystemParams,
    policy: &dyn RelayPolicy,
    objective: Objective,
    x: f64,
    quad: &QuadSpec,
) -> Result<f64> {
    match objective {
        Objective::MinSecrecyOutage => {
            let pp = power_outage_prob(p)?;
            total_secrecy_outage(pp, policy.secrecy_outage(p, x, quad)?)
        }
        Objective::MaxErgodicRate => policy.ergodic_exact(p, x, quad),
    }
}

pub fn optimize_policy(
    p: &SystemParams,
    policy: &dyn RelayPolicy,
    spec: &OptimizeSpec,
    quad: &QuadSpec,
) -> Result<Optimum> {
    p.common_power()?;
    optimize_scalar(|x| objective_value(p, policy, spec.objective, x, quad), spec)
}

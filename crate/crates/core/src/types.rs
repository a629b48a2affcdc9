//! Shared domain vocabulary: link parameters, geometry, policy choice,
//! channel realizations and metric bundles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the source → relay → destination link, in linear units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Source transmit power, W.
    pub p_s: f64,
    /// Destination jamming power, W.
    pub p_d: f64,
    /// AWGN power at relay and destination, W.
    pub n0: f64,
    /// Energy conversion efficiency.
    pub eta: f64,
    /// Harvester activation threshold, W.
    pub theta_h: f64,
    /// Target secrecy rate, bits/s/Hz.
    pub r_th: f64,
    pub lambda_sr: f64,
    pub lambda_rd: f64,
}

impl SystemParams {
    /// Validated constructor.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p_s: f64,
        p_d: f64,
        n0: f64,
        eta: f64,
        theta_h: f64,
        r_th: f64,
        lambda_sr: f64,
        lambda_rd: f64,
    ) -> Result<Self> {
        let p = Self {
            p_s,
            p_d,
            n0,
            eta,
            theta_h,
            r_th,
            lambda_sr,
            lambda_rd,
        };
        p.validate()?;
        Ok(p)
    }

    /// The reference operating point: P = 40 dBm for both nodes, N0 = 1e-4 W,
    /// eta = 0.7, theta_H = -30 dBm, both hops 5 m with path-loss exponent 2.7,
    /// target secrecy rate 0.5 bits/s/Hz.
    pub fn reference() -> Self {
        let (lambda_sr, lambda_rd) = Geometry::reference().lambdas();
        Self {
            p_s: 10.0,
            p_d: 10.0,
            n0: 1e-4,
            eta: 0.7,
            theta_h: 1e-6,
            r_th: 0.5,
            lambda_sr,
            lambda_rd,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("p_s", self.p_s)?;
        positive("p_d", self.p_d)?;
        positive("n0", self.n0)?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid("eta", format!("must lie in (0, 1], got {}", self.eta)));
        }
        non_negative("theta_h", self.theta_h)?;
        non_negative("r_th", self.r_th)?;
        positive("lambda_sr", self.lambda_sr)?;
        positive("lambda_rd", self.lambda_rd)?;
        Ok(())
    }

    /// The common transmit power P, or an error when p_s and p_d differ.
    pub fn common_power(&self) -> Result<f64> {
        self.validate()?;
        if (self.p_s - self.p_d).abs() > 1e-12 * self.p_s.max(self.p_d) {
            return Err(Error::UnequalPowers {
                p_s: self.p_s,
                p_d: self.p_d,
            });
        }
        Ok(self.p_s)
    }

    /// Transmit SNR P/N0 (using the source power).
    pub fn transmit_snr(&self) -> f64 {
        self.p_s / self.n0
    }

    pub fn with_power(mut self, p: f64) -> Self {
        self.p_s = p;
        self.p_d = p;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_r_th(mut self, r_th: f64) -> Self {
        self.r_th = r_th;
        self
    }

    pub fn with_theta_h(mut self, theta_h: f64) -> Self {
        self.theta_h = theta_h;
        self
    }

    pub fn with_lambdas(mut self, lambda_sr: f64, lambda_rd: f64) -> Self {
        self.lambda_sr = lambda_sr;
        self.lambda_rd = lambda_rd;
        self
    }

    pub fn with_geometry(self, g: &Geometry) -> Self {
        let (sr, rd) = g.lambdas();
        self.with_lambdas(sr, rd)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be non-negative and finite, got {v}")))
    }
}

/// Node placement; mean channel gains follow lambda = d^-rho.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub d_sr: f64,
    pub d_rd: f64,
    pub rho: f64,
}

impl Geometry {
    pub fn new(d_sr: f64, d_rd: f64, rho: f64) -> Result<Self> {
        positive("d_sr", d_sr)?;
        positive("d_rd", d_rd)?;
        if !(rho >= 1.0) || !rho.is_finite() {
            return Err(Error::invalid("rho", format!("must be >= 1, got {rho}")));
        }
        Ok(Self { d_sr, d_rd, rho })
    }

    pub fn reference() -> Self {
        Self {
            d_sr: 5.0,
            d_rd: 5.0,
            rho: 2.7,
        }
    }

    /// `(lambda_sr, lambda_rd)`; assumes the invariants already hold.
    pub fn lambdas(&self) -> (f64, f64) {
        (self.d_sr.powf(-self.rho), self.d_rd.powf(-self.rho))
    }
}

/// Mean channel power gains from distances.
pub fn lambda_from_geometry(g: &Geometry) -> Result<(f64, f64)> {
    let g = Geometry::new(g.d_sr, g.d_rd, g.rho)?;
    Ok(g.lambdas())
}

/// Relay receiver architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Power splitting, parameterised by beta.
    Ps,
    /// Time switching, parameterised by alpha.
    Ts,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 2] = [PolicyKind::Ps, PolicyKind::Ts];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Ps => "ps",
            PolicyKind::Ts => "ts",
        }
    }

    pub fn parameter_name(self) -> &'static str {
        match self {
            PolicyKind::Ps => "beta",
            PolicyKind::Ts => "alpha",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ps" | "power-splitting" | "power_splitting" => Ok(PolicyKind::Ps),
            "ts" | "time-switching" | "time_switching" => Ok(PolicyKind::Ts),
            other => Err(Error::invalid("policy", format!("unknown policy `{other}`"))),
        }
    }
}

/// The single free design variable of a policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum PolicyParam {
    Ps { beta: f64 },
    Ts { alpha: f64 },
}

impl PolicyParam {
    pub fn new(kind: PolicyKind, value: f64) -> Result<Self> {
        let p = match kind {
            PolicyKind::Ps => PolicyParam::Ps { beta: value },
            PolicyKind::Ts => PolicyParam::Ts { alpha: value },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicyParam::Ps { .. } => PolicyKind::Ps,
            PolicyParam::Ts { .. } => PolicyKind::Ts,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            PolicyParam::Ps { beta } => beta,
            PolicyParam::Ts { alpha } => alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_fraction(self.kind().parameter_name(), self.value())
    }
}

pub(crate) fn check_fraction(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")))
    }
}

/// One fading realization. The relay-destination channel is reciprocal, so
/// `g_rd` is also the jamming gain seen by the relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSample {
    pub g_sr: f64,
    pub g_rd: f64,
}

impl ChannelSample {
    pub fn new(g_sr: f64, g_rd: f64) -> Self {
        debug_assert!(g_sr >= 0.0 && g_rd >= 0.0);
        Self { g_sr, g_rd }
    }
}

/// Analytic metrics for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub p_power_outage: f64,
    /// Secrecy outage given an active harvester.
    pub p_secrecy_outage_cond: f64,
    /// Secrecy outage including power outage.
    pub p_secrecy_outage_total: f64,
    pub p_pos_exact: f64,
    pub p_pos_approx: f64,
    pub ergodic_exact: f64,
    pub ergodic_approx: f64,
    pub ergodic_lower_bound: f64,
}

impl MetricReport {
    pub const FIELDS: [&'static str; 8] = [
        "p_power_outage",
        "p_secrecy_outage_cond",
        "p_secrecy_outage_total",
        "p_pos_exact",
        "p_pos_approx",
        "ergodic_exact",
        "ergodic_approx",
        "ergodic_lower_bound",
    ];

    /// Values in [`Self::FIELDS`] order.
    pub fn values(&self) -> [f64; 8] {
        [
            self.p_power_outage,
            self.p_secrecy_outage_cond,
            self.p_secrecy_outage_total,
            self.p_pos_exact,
            self.p_pos_approx,
            self.ergodic_exact,
            self.ergodic_approx,
            self.ergodic_lower_bound,
        ]
    }

    /// Checks the bundle invariants; `tol` absorbs quadrature error in the
    /// bound-versus-approximation comparison.
    pub fn check_invariants(&self, tol: f64) -> std::result::Result<(), String> {
        let probs = [
            ("p_power_outage", self.p_power_outage),
            ("p_secrecy_outage_cond", self.p_secrecy_outage_cond),
            ("p_secrecy_outage_total", self.p_secrecy_outage_total),
            ("p_pos_exact", self.p_pos_exact),
            ("p_pos_approx", self.p_pos_approx),
        ];
        for (name, v) in probs {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} = {v} outside [0, 1]"));
            }
        }
        let rates = [
            ("ergodic_exact", self.ergodic_exact),
            ("ergodic_approx", self.ergodic_approx),
            ("ergodic_lower_bound", self.ergodic_lower_bound),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) {
                return Err(format!("{name} = {v} is negative"));
            }
        }
        if self.ergodic_lower_bound > self.ergodic_approx + tol {
            return Err(format!(
                "lower bound {} exceeds high-SNR ergodic rate {}",
                self.ergodic_lower_bound, self.ergodic_approx
            ));
        }
        Ok(())
    }
}

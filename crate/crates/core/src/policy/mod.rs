//! Relay receiver policies behind a common interface, and a registry that
//! resolves them by name at runtime.

mod kernels;
pub mod ps;
pub mod ts;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::QuadSpec;
use crate::shared::{power_outage_prob, total_secrecy_outage};
use crate::types::{ChannelSample, MetricReport, PolicyKind, SystemParams};

pub use ps::PowerSplitting;
pub use ts::TimeSwitching;

/// One receiver architecture at the energy-harvesting relay.
///
/// `x` is the policy's design variable (β for PS, α for TS). Analytic
/// metrics require `p.p_s == p.p_d`; the SNR maps do not.
pub trait RelayPolicy: Send + Sync {
    fn kind(&self) -> PolicyKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    /// Extra names accepted by the registry.
    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }

    fn parameter_name(&self) -> &'static str {
        self.kind().parameter_name()
    }

    /// Fraction of the slot carrying information, times the two-hop 1/2.
    fn time_factor(&self, x: f64) -> f64;

    fn snr_relay(&self, p: &SystemParams, x: f64, s: ChannelSample) -> f64;
    fn snr_dest_exact(&self, p: &SystemParams, x: f64, s: ChannelSample) -> f64;
    fn snr_dest_approx(&self, p: &SystemParams, x: f64, s: ChannelSample) -> f64;

    /// Secrecy outage given the harvester is active (high-SNR destination SNR).
    fn secrecy_outage(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64>;
    fn prob_positive_exact(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64>;
    fn prob_positive_approx(&self, p: &SystemParams, x: f64) -> Result<f64>;
    fn ergodic_exact(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64>;
    fn ergodic_approx(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64>;
    fn ergodic_lower_bound(&self, p: &SystemParams, x: f64) -> Result<f64>;

    /// Every analytic metric at one point.
    fn report(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<MetricReport> {
        let pp = power_outage_prob(p)?;
        let cond = self.secrecy_outage(p, x, spec)?;
        Ok(MetricReport {
            p_power_outage: pp,
            p_secrecy_outage_cond: cond,
            p_secrecy_outage_total: total_secrecy_outage(pp, cond)?,
            p_pos_exact: self.prob_positive_exact(p, x, spec)?,
            p_pos_approx: self.prob_positive_approx(p, x)?,
            ergodic_exact: self.ergodic_exact(p, x, spec)?,
            ergodic_approx: self.ergodic_approx(p, x, spec)?,
            ergodic_lower_bound: self.ergodic_lower_bound(p, x)?,
        })
    }

    /// Instantaneous secrecy rate of one active-harvester draw.
    fn secrecy_rate(&self, p: &SystemParams, x: f64, s: ChannelSample, exact: bool) -> f64 {
        let gd = if exact {
            self.snr_dest_exact(p, x, s)
        } else {
            self.snr_dest_approx(p, x, s)
        };
        crate::shared::secrecy_rate(gd, self.snr_relay(p, x, s), self.time_factor(x))
    }
}

/// Name → policy lookup.
#[derive(Clone, Default)]
pub struct PolicyRegistry {
    entries: BTreeMap<String, Arc<dyn RelayPolicy>>,
    primary: Vec<String>,
}

impl PolicyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the PS and TS policies.
    pub fn builtin() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(PowerSplitting));
        r.register(Arc::new(TimeSwitching));
        r
    }

    /// Adds a policy under its name and aliases, replacing earlier holders.
    pub fn register(&mut self, policy: Arc<dyn RelayPolicy>) {
        let name = policy.name().to_string();
        if !self.primary.contains(&name) {
            self.primary.push(name.clone());
        }
        for alias in policy.aliases() {
            self.entries.insert(alias.to_ascii_lowercase(), Arc::clone(&policy));
        }
        self.entries.insert(name, policy);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn RelayPolicy>> {
        self.entries
            .get(&name.trim().to_ascii_lowercase())
            .cloned()
            .ok_or_else(|| {
                Error::invalid(
                    "policy",
                    format!("unknown policy `{name}` (available: {})", self.primary.join(", ")),
                )
            })
    }

    pub fn names(&self) -> &[String] {
        &self.primary
    }
}

impl fmt::Debug for PolicyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolicyRegistry").field("policies", &self.primary).finish()
    }
}

/// The built-in implementation for a policy kind.
pub fn policy_for(kind: PolicyKind) -> &'static dyn RelayPolicy {
    match kind {
        PolicyKind::Ps => &PowerSplitting,
        PolicyKind::Ts => &TimeSwitching,
    }
}

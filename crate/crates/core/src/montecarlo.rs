//! Seeded Monte Carlo over Rayleigh-fading channel draws.
//!
//! Draws are grouped into fixed-size blocks; block `k` uses ChaCha stream `k`
//! of the configured seed. Blocks are evaluated in parallel and reduced in
//! block order, so results do not depend on the thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{policy_for, RelayPolicy};
use crate::types::{ChannelSample, PolicyParam, SystemParams};

const BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SnrMode {
    #[default]
    Exact,
    HighSnrApprox,
}

impl std::str::FromStr for SnrMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(SnrMode::Exact),
            "high_snr_approx" | "approx" => Ok(SnrMode::HighSnrApprox),
            other => Err(Error::invalid("snr_mode", format!("expected exact or high_snr_approx, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub snr_mode: SnrMode,
    /// Worker threads; does not affect the result.
    pub n_streams: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 1_000_000,
            seed: 1,
            snr_mode: SnrMode::Exact,
            n_streams: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::invalid("n_samples", "must be at least 1"));
        }
        if self.n_streams < 1 {
            return Err(Error::invalid("n_streams", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn bernoulli(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            mean: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }
}

/// Monte Carlo counterpart of the analytic metric bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub n_samples: u64,
    /// Draws that activated the harvester.
    pub n_active: u64,
    pub power_outage: Estimate,
    /// Outage among active draws (1 with zero error when none are active).
    pub secrecy_outage_cond: Estimate,
    /// Outage counting inactive draws as outages.
    pub secrecy_outage_total: Estimate,
    /// P(active and γ_D > γ_R).
    pub prob_positive: Estimate,
    /// Mean rate with inactive draws contributing zero.
    pub ergodic: Estimate,
}

/// −λ ln U: exponential with mean λ for U uniform on (0, 1].
pub fn exp_from_uniform(lambda: f64, u: f64) -> f64 {
    -lambda * u.ln()
}

pub fn sample_channel<R: Rng + ?Sized>(lambda_sr: f64, lambda_rd: f64, rng: &mut R) -> ChannelSample {
    // gen::<f64>() is on [0, 1); flip it onto (0, 1]
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = 1.0 - rng.gen::<f64>();
    ChannelSample::new(exp_from_uniform(lambda_sr, u1), exp_from_uniform(lambda_rd, u2))
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    active: u64,
    outage: u64,
    outage_active: u64,
    positive: u64,
    rate_sum: f64,
    rate_sq_sum: f64,
}

fn run_block(policy: &dyn RelayPolicy, p: &SystemParams, x: f64, cfg: &McConfig, block: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(block);
    let count = BLOCK.min(cfg.n_samples - block * BLOCK);
    let exact = cfg.snr_mode == SnrMode::Exact;
    let tf = policy.time_factor(x);
    let mut t = Tally::default();
    for _ in 0..count {
        let s = sample_channel(p.lambda_sr, p.lambda_rd, &mut rng);
        if p.p_s * s.g_sr + p.p_d * s.g_rd < p.theta_h {
            t.outage += 1;
            continue;
        }
        t.active += 1;
        let gr = policy.snr_relay(p, x, s);
        let gd = if exact {
            policy.snr_dest_exact(p, x, s)
        } else {
            policy.snr_dest_approx(p, x, s)
        };
        let rate = crate::shared::secrecy_rate(gd, gr, tf);
        // `<=` so that a zero target counts zero-rate draws, matching the δ = 1 closed form
        if rate <= p.r_th {
            t.outage += 1;
            t.outage_active += 1;
        }
        if gd > gr {
            t.positive += 1;
        }
        t.rate_sum += rate;
        t.rate_sq_sum += rate * rate;
    }
    t
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Estimates every metric for one policy point by simulation.
pub fn estimate_with(policy: &dyn RelayPolicy, p: &SystemParams, x: f64, cfg: &McConfig) -> Result<McEstimate> {
    p.validate()?;
    cfg.validate()?;
    crate::types::check_fraction(policy.parameter_name(), x)?;
    let blocks = cfg.n_samples.div_ceil(BLOCK);
    let tallies: Vec<Tally> = if cfg.n_streams == 1 {
        (0..blocks).map(|b| run_block(policy, p, x, cfg, b)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.n_streams)
            .build()
            .map_err(|e| Error::invalid("n_streams", e.to_string()))?;
        pool.install(|| {
            (0..blocks)
                .into_par_iter()
                .map(|b| run_block(policy, p, x, cfg, b))
                .collect()
        })
    };

    let mut total = Tally::default();
    let (mut s1, mut s2) = (CompensatedSum::default(), CompensatedSum::default());
    for t in &tallies {
        total.active += t.active;
        total.outage += t.outage;
        total.outage_active += t.outage_active;
        total.positive += t.positive;
        s1.add(t.rate_sum);
        s2.add(t.rate_sq_sum);
    }
    let n = cfg.n_samples;
    let nf = n as f64;
    let mean = s1.value() / nf;
    let var = if n > 1 {
        ((s2.value() / nf - mean * mean) * nf / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    let cond = if total.active == 0 {
        Estimate {
            mean: 1.0,
            std_error: 0.0,
        }
    } else {
        Estimate::bernoulli(total.outage_active, total.active)
    };
    Ok(McEstimate {
        n_samples: n,
        n_active: total.active,
        power_outage: Estimate::bernoulli(n - total.active, n),
        secrecy_outage_cond: cond,
        secrecy_outage_total: Estimate::bernoulli(total.outage, n),
        prob_positive: Estimate::bernoulli(total.positive, n),
        ergodic: Estimate {
            mean,
            std_error: (var / nf).sqrt(),
        },
    })
}

pub fn estimate_metrics(p: &SystemParams, pol: PolicyParam, cfg: &McConfig) -> Result<McEstimate> {
    pol.validate()?;
    estimate_with(policy_for(pol.kind()), p, pol.value(), cfg)
}

//! Run configuration: built-in defaults, then a flat `key = value` file, then
//! command-line flags, later layers winning.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use relaysec::{
    dbm_to_watts, Geometry, McConfig, Objective, OptimizeSpec, PolicyRegistry, QuadSpec, SystemParams, ValidationSpec,
};
use serde::Serialize;

/// Every key accepted in a config file or through `--set`.
pub const KEYS: &[&str] = &[
    "p",
    "p_dbm",
    "p_s",
    "p_s_dbm",
    "p_d",
    "p_d_dbm",
    "snr_db",
    "n0",
    "n0_dbm",
    "eta",
    "theta_h",
    "theta_h_dbm",
    "r_th",
    "d_sr",
    "d_rd",
    "rho",
    "total_distance",
    "policy",
    "beta",
    "alpha",
    "sweep",
    "from",
    "to",
    "step",
    "optimize",
    "lower",
    "upper",
    "grid_points",
    "refine_tol",
    "abs_tol",
    "rel_tol",
    "max_subdivisions",
    "mc_samples",
    "seed",
    "threads",
    "outage_tol",
    "pos_tol",
    "sigma",
    "analytic_eta_scale",
    "format",
    "output",
];

/// Keys that describe the same quantity; setting one in a layer hides the
/// others from lower layers.
const GROUPS: &[&[&str]] = &[
    &["p", "p_dbm", "snr_db", "p_s", "p_s_dbm", "p_d", "p_d_dbm"],
    &["n0", "n0_dbm"],
    &["theta_h", "theta_h_dbm"],
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn key(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self {
            key: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "config key `{k}`: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// One layer of raw settings.
#[derive(Debug, Clone, Default)]
pub struct Layer {
    values: BTreeMap<String, String>,
    origin: String,
}

impl Layer {
    pub fn new(origin: impl Into<String>) -> Self {
        Self {
            values: BTreeMap::new(),
            origin: origin.into(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::key(&key, format!("unknown key in {}", self.origin)));
        }
        self.values.insert(key, value.into().trim().to_string());
        Ok(())
    }

    /// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut layer = Layer::new(origin);
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::general(format!("{origin}:{}: expected `key = value`, got `{line}`", n + 1)))?;
            let k = k.trim();
            if layer.values.contains_key(&k.to_ascii_lowercase()) {
                return Err(ConfigError::key(k, format!("set twice in {origin}")));
            }
            layer.set(k, v)?;
        }
        Ok(layer)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::general(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `key=value` pairs given on the command line.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = &'a str>, origin: &str) -> Result<Self, ConfigError> {
        let mut layer = Layer::new(origin);
        for pair in pairs {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| ConfigError::general(format!("expected KEY=VALUE, got `{pair}`")))?;
            layer.set(k, v)?;
        }
        Ok(layer)
    }
}

/// Flattens layers, lowest precedence first.
pub fn merge(layers: &[Layer]) -> BTreeMap<String, String> {
    let mut out: BTreeMap<String, String> = BTreeMap::new();
    for layer in layers {
        for group in GROUPS {
            if group.iter().any(|k| layer.values.contains_key(*k)) {
                for k in *group {
                    out.remove(*k);
                }
            }
        }
        out.extend(layer.values.iter().map(|(k, v)| (k.clone(), v.clone())));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Beta,
    Alpha,
    RTh,
    SnrDb,
    DSr,
    Rho,
    Eta,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Beta => "beta",
            SweepVar::Alpha => "alpha",
            SweepVar::RTh => "r_th",
            SweepVar::SnrDb => "snr_db",
            SweepVar::DSr => "d_sr",
            SweepVar::Rho => "rho",
            SweepVar::Eta => "eta",
        }
    }
}

impl FromStr for SweepVar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "beta" => SweepVar::Beta,
            "alpha" => SweepVar::Alpha,
            "r_th" => SweepVar::RTh,
            "snr_db" => SweepVar::SnrDb,
            "d_sr" => SweepVar::DSr,
            "rho" => SweepVar::Rho,
            "eta" => SweepVar::Eta,
            _ => return Err("expected one of beta, alpha, r_th, snr_db, d_sr, rho, eta".into()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRange {
    pub variable: SweepVar,
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step).round() as usize;
        (0..=n).map(|i| self.from + i as f64 * self.step).collect()
    }
}

/// Everything a run needs, in linear units, after all layers are applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Source transmit power, W.
    pub p_s: f64,
    /// Destination jamming power, W.
    pub p_d: f64,
    /// Noise power, W.
    pub n0: f64,
    pub eta: f64,
    /// Harvester sensitivity, W.
    pub theta_h: f64,
    pub r_th: f64,
    pub d_sr: f64,
    pub d_rd: f64,
    pub rho: f64,
    pub total_distance: f64,
    /// Registry names of the selected policies.
    pub policies: Vec<String>,
    pub beta: f64,
    pub alpha: f64,
    pub sweep: Option<SweepRange>,
    pub optimize: Option<Objective>,
    pub optimizer: OptimizeSpec,
    pub quadrature: QuadSpec,
    pub mc_samples: u64,
    pub seed: u64,
    pub threads: usize,
    pub validation: ValidationSpec,
    pub format: Format,
    pub output: Option<PathBuf>,
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| ConfigError::key(key, format!("cannot parse `{v}`: {e}"))))
            .transpose()
    }

    fn num(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.parse::<f64>(key)? {
            Some(v) if !v.is_finite() => Err(ConfigError::key(key, format!("must be finite, got {v}"))),
            other => Ok(other),
        }
    }

    fn num_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.num(key)?.unwrap_or(default))
    }

    /// A power given either in watts under `key` or in dBm under `key_dbm`.
    fn power(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let dbm_key = format!("{key}_dbm");
        match (self.num(key)?, self.num(&dbm_key)?) {
            (Some(_), Some(_)) => Err(ConfigError::key(key, format!("given both as `{key}` and `{dbm_key}`"))),
            (Some(w), None) => Ok(Some(w)),
            (None, Some(dbm)) => Ok(Some(dbm_to_watts(dbm))),
            (None, None) => Ok(None),
        }
    }
}

/// Applies `map` on top of the reference operating point.
pub fn resolve(map: &BTreeMap<String, String>, registry: &PolicyRegistry) -> Result<RunConfig, ConfigError> {
    let r = Reader { map };
    let reference = SystemParams::reference();
    let geometry = Geometry::reference();

    let n0 = r.power("n0")?.unwrap_or(reference.n0);
    let common = match (r.power("p")?, r.num("snr_db")?) {
        (Some(_), Some(_)) => return Err(ConfigError::key("snr_db", "cannot be combined with `p`")),
        (Some(p), None) => Some(p),
        (None, Some(db)) => Some(n0 * 10f64.powf(db / 10.0)),
        (None, None) => None,
    };
    let p_s = r.power("p_s")?.or(common).unwrap_or(reference.p_s);
    let p_d = r.power("p_d")?.or(common).unwrap_or(reference.p_d);
    let theta_h = r.power("theta_h")?.unwrap_or(reference.theta_h);

    let total_distance = r.num_or("total_distance", geometry.d_sr + geometry.d_rd)?;
    let d_sr = r.num_or("d_sr", geometry.d_sr)?;
    let d_rd = r.num_or("d_rd", total_distance - d_sr)?;

    let policies = match r.raw("policy").unwrap_or("ps") {
        "all" => registry.names().to_vec(),
        names => names
            .split(',')
            .map(|n| {
                registry
                    .get(n)
                    .map(|p| p.name().to_string())
                    .map_err(|e| ConfigError::key("policy", e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?,
    };

    let sweep = match r.parse::<SweepVar>("sweep")? {
        None => {
            for k in ["from", "to", "step"] {
                if r.raw(k).is_some() {
                    return Err(ConfigError::key(k, "only meaningful together with `sweep`"));
                }
            }
            None
        }
        Some(variable) => {
            let need = |k: &str| r.num(k)?.ok_or_else(|| ConfigError::key(k, "required when `sweep` is set"));
            let range = SweepRange {
                variable,
                from: need("from")?,
                to: need("to")?,
                step: need("step")?,
            };
            let steps = (range.to - range.from) / range.step;
            if !(range.step > 0.0) || range.to < range.from {
                return Err(ConfigError::key("step", "need step > 0 and from <= to"));
            }
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                return Err(ConfigError::key("step", format!("({} - {}) is not a multiple of {}", range.to, range.from, range.step)));
            }
            if steps.round() > 1e6 {
                return Err(ConfigError::key("step", "more than a million sweep points"));
            }
            Some(range)
        }
    };

    let optimize = r.parse::<Objective>("optimize")?;
    let mut optimizer = OptimizeSpec::new(optimize.unwrap_or(Objective::MinSecrecyOutage));
    optimizer.coarse_grid_points = r.parse("grid_points")?.unwrap_or(optimizer.coarse_grid_points);
    optimizer.refine_tol = r.num_or("refine_tol", optimizer.refine_tol)?;
    optimizer.lower = r.num_or("lower", optimizer.lower)?;
    optimizer.upper = r.num_or("upper", optimizer.upper)?;
    optimizer
        .validate()
        .map_err(|e| ConfigError::key(key_of(&e, "grid_points"), e.to_string()))?;

    let mut quadrature = QuadSpec::default();
    quadrature.abs_tol = r.num_or("abs_tol", quadrature.abs_tol)?;
    quadrature.rel_tol = r.num_or("rel_tol", quadrature.rel_tol)?;
    quadrature.max_subdivisions = r.parse("max_subdivisions")?.unwrap_or(quadrature.max_subdivisions);
    quadrature
        .validate()
        .map_err(|e| ConfigError::key(key_of(&e, "rel_tol"), e.to_string()))?;

    let mc_default = McConfig::default();
    let mut validation = ValidationSpec::default();
    validation.outage_abs_tol = r.num_or("outage_tol", validation.outage_abs_tol)?;
    validation.pos_abs_tol = r.num_or("pos_tol", validation.pos_abs_tol)?;
    validation.sigma_multiplier = r.num_or("sigma", validation.sigma_multiplier)?;
    validation.analytic_eta_scale = r.num_or("analytic_eta_scale", validation.analytic_eta_scale)?;

    let format = match r.raw("format").unwrap_or("csv") {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return Err(ConfigError::key("format", format!("expected csv or json, got `{other}`"))),
    };

    let cfg = RunConfig {
        p_s,
        p_d,
        n0,
        eta: r.num_or("eta", reference.eta)?,
        theta_h,
        r_th: r.num_or("r_th", reference.r_th)?,
        d_sr,
        d_rd,
        rho: r.num_or("rho", geometry.rho)?,
        total_distance,
        policies,
        beta: r.num_or("beta", 0.5)?,
        alpha: r.num_or("alpha", 0.5)?,
        sweep,
        optimize,
        optimizer,
        quadrature,
        mc_samples: r.parse("mc_samples")?.unwrap_or(mc_default.n_samples),
        seed: r.parse("seed")?.unwrap_or(mc_default.seed),
        threads: r.parse("threads")?.unwrap_or(mc_default.n_streams),
        validation,
        format,
        output: r.raw("output").filter(|s| !s.is_empty() && *s != "-").map(PathBuf::from),
    };
    cfg.check()?;
    Ok(cfg)
}

/// Maps a library validation error back to the config key that caused it.
fn key_of(e: &relaysec::Error, fallback: &'static str) -> &'static str {
    match e {
        relaysec::Error::InvalidParameter { name, .. } => match *name {
            "lambda_sr" | "lambda_rd" => "d_sr",
            "bounds" => "lower",
            other => KEYS.iter().find(|k| **k == other).copied().unwrap_or(fallback),
        },
        relaysec::Error::UnequalPowers { .. } => "p_d",
        _ => fallback,
    }
}

impl RunConfig {
    fn check(&self) -> Result<(), ConfigError> {
        self.geometry()?;
        self.params()
            .map_err(|e| ConfigError::key(key_of(&e, "p"), e.to_string()))?;
        for (key, v) in [("beta", self.beta), ("alpha", self.alpha)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::key(key, format!("must lie in [0, 1], got {v}")));
            }
        }
        if self.mc_samples == 0 {
            return Err(ConfigError::key("mc_samples", "must be positive"));
        }
        if self.threads == 0 {
            return Err(ConfigError::key("threads", "must be positive"));
        }
        for (key, v) in [
            ("outage_tol", self.validation.outage_abs_tol),
            ("pos_tol", self.validation.pos_abs_tol),
            ("sigma", self.validation.sigma_multiplier),
            ("analytic_eta_scale", self.validation.analytic_eta_scale),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::key(key, format!("must be positive, got {v}")));
            }
        }
        if let Some(s) = self.sweep {
            let (kind_ok, key) = match s.variable {
                SweepVar::Beta => (self.policies.iter().all(|p| p == "ps"), "beta"),
                SweepVar::Alpha => (self.policies.iter().all(|p| p == "ts"), "alpha"),
                _ => (true, ""),
            };
            if !kind_ok {
                return Err(ConfigError::key(
                    "sweep",
                    format!("sweeping `{key}` needs policy = {}", if key == "beta" { "ps" } else { "ts" }),
                ));
            }
            if matches!(s.variable, SweepVar::Beta | SweepVar::Alpha) && self.optimize.is_some() {
                return Err(ConfigError::key("optimize", "cannot optimise the swept parameter"));
            }
            for v in s.values() {
                self.at(s.variable, v)?;
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<Geometry, ConfigError> {
        Geometry::new(self.d_sr, self.d_rd, self.rho).map_err(|e| ConfigError::key(key_of(&e, "d_sr"), e.to_string()))
    }

    /// Library parameters; fails if a value is out of range.
    pub fn params(&self) -> relaysec::Result<SystemParams> {
        let (lambda_sr, lambda_rd) = Geometry::new(self.d_sr, self.d_rd, self.rho)?.lambdas();
        SystemParams::new(self.p_s, self.p_d, self.n0, self.eta, self.theta_h, self.r_th, lambda_sr, lambda_rd)
    }

    pub fn policy_param(&self, policy: &str) -> f64 {
        if policy == "ts" {
            self.alpha
        } else {
            self.beta
        }
    }

    /// A copy with one sweep variable set.
    pub fn at(&self, var: SweepVar, v: f64) -> Result<RunConfig, ConfigError> {
        let mut c = self.clone();
        match var {
            SweepVar::Beta => c.beta = v,
            SweepVar::Alpha => c.alpha = v,
            SweepVar::RTh => c.r_th = v,
            SweepVar::SnrDb => {
                let p = c.n0 * 10f64.powf(v / 10.0);
                c.p_s = p;
                c.p_d = p;
            }
            SweepVar::DSr => {
                c.d_sr = v;
                c.d_rd = c.total_distance - v;
            }
            SweepVar::Rho => c.rho = v,
            SweepVar::Eta => c.eta = v,
        }
        c.sweep = None;
        if let Err(e) = c.params() {
            return Err(ConfigError::key(var.name(), format!("sweep point {v}: {e}")));
        }
        if !(0.0..=1.0).contains(&c.beta) || !(0.0..=1.0).contains(&c.alpha) {
            return Err(ConfigError::key(var.name(), format!("sweep point {v} is outside [0, 1]")));
        }
        Ok(c)
    }

    pub fn mc(&self) -> McConfig {
        McConfig {
            n_samples: self.mc_samples,
            seed: self.seed,
            snr_mode: Default::default(),
            n_streams: self.threads,
        }
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.p_s / self.n0).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_pairs(pairs: &[&str]) -> Result<RunConfig, ConfigError> {
        let layer = Layer::from_pairs(pairs.iter().copied(), "test")?;
        resolve(&merge(&[layer]), &PolicyRegistry::builtin())
    }

    #[test]
    fn defaults_match_reference_point() {
        let c = resolve_pairs(&[]).unwrap();
        assert_eq!(c.params().unwrap(), SystemParams::reference());
        assert_eq!(c.policies, ["ps"]);
        assert_eq!(c.format, Format::Csv);
    }

    #[test]
    fn dbm_powers_convert_at_the_boundary() {
        let c = resolve_pairs(&["p_dbm=30", "n0_dbm=-20", "theta_h_dbm=-40"]).unwrap();
        assert!((c.p_s - 1.0).abs() < 1e-15 && (c.p_d - 1.0).abs() < 1e-15);
        assert!((c.n0 - 1e-5).abs() < 1e-20);
        assert!((c.theta_h - 1e-7).abs() < 1e-22);
        let c = resolve_pairs(&["snr_db=50"]).unwrap();
        assert!((c.p_s - 10.0).abs() < 1e-12);
    }

    #[test]
    fn later_layers_win_per_quantity() {
        let file = Layer::parse("p_dbm = 30\neta = 0.4 # comment\n\nr_th=1", "file").unwrap();
        let cli = Layer::from_pairs(["p=2", "eta=0.9"], "cli").unwrap();
        let c = resolve(&merge(&[file, cli]), &PolicyRegistry::builtin()).unwrap();
        assert_eq!((c.p_s, c.eta, c.r_th), (2.0, 0.9, 1.0));
    }

    #[test]
    fn errors_name_the_key() {
        for (pairs, key) in [
            (&["eta=1.5"][..], "eta"),
            (&["beta=x"][..], "beta"),
            (&["bogus=1"][..], "bogus"),
            (&["sweep=beta", "from=0.1"][..], "to"),
            (&["sweep=gamma"][..], "sweep"),
            (&["sweep=alpha", "from=0.1", "to=0.9", "step=0.1"][..], "sweep"),
            (&["p=1", "p_dbm=30"][..], "p"),
            (&["d_sr=11"][..], "d_rd"),
            (&["format=xml"][..], "format"),
            (&["policy=relay"][..], "policy"),
            (&["lower=0.6", "upper=0.5"][..], "lower"),
        ] {
            let e = resolve_pairs(pairs).unwrap_err();
            assert_eq!(e.key.as_deref(), Some(key), "{pairs:?}: {e}");
        }
    }

    #[test]
    fn unequal_powers_resolve_but_are_flagged_later() {
        let c = resolve_pairs(&["p_s=10", "p_d=5"]).unwrap();
        assert!(c.params().unwrap().common_power().is_err());
    }

    #[test]
    fn sweep_points_follow_the_progression() {
        let c = resolve_pairs(&["sweep=beta", "from=0.05", "to=0.95", "step=0.05"]).unwrap();
        let v = c.sweep.unwrap().values();
        assert_eq!(v.len(), 19);
        assert!((v[18] - 0.95).abs() < 1e-12);
        let c = resolve_pairs(&["sweep=d_sr", "from=1", "to=9", "step=1"]).unwrap();
        let p = c.at(SweepVar::DSr, 3.0).unwrap();
        assert_eq!((p.d_sr, p.d_rd), (3.0, 7.0));
        let p = c.at(SweepVar::SnrDb, 30.0).unwrap();
        assert!((p.p_s - 0.1).abs() < 1e-12 && p.n0 == 1e-4);
    }
}

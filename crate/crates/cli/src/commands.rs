//! The four subcommands, each producing a [`Table`].

use std::fmt;

use rayon::prelude::*;
use relaysec::{
    optimize_policy, validate_grid, MetricReport, Objective, PolicyRegistry, RelayPolicy, ValidationRow,
};

use crate::config::{ConfigError, RunConfig, SweepVar};
use crate::output::{Cell, Table};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Library(relaysec::Error),
    Io(std::io::Error),
    ValidationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed { .. } => 1,
            CliError::Library(relaysec::Error::Quadrature(_)) => 3,
            CliError::Config(_) | CliError::Library(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::ValidationFailed { failed, total } => write!(f, "validation failed: {failed} of {total} checks"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<relaysec::Error> for CliError {
    fn from(e: relaysec::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

const INPUTS: [&str; 15] = [
    "policy",
    "parameter",
    "value",
    "p_s_w",
    "p_d_w",
    "n0_w",
    "snr_db",
    "eta",
    "theta_h_w",
    "r_th",
    "d_sr",
    "d_rd",
    "rho",
    "lambda_sr",
    "lambda_rd",
];

fn input_cells(cfg: &RunConfig, policy: &dyn RelayPolicy, x: f64) -> CliResult<Vec<Cell>> {
    let p = cfg.params()?;
    Ok(vec![
        policy.name().into(),
        policy.parameter_name().into(),
        x.into(),
        cfg.p_s.into(),
        cfg.p_d.into(),
        cfg.n0.into(),
        cfg.snr_db().into(),
        cfg.eta.into(),
        cfg.theta_h.into(),
        cfg.r_th.into(),
        cfg.d_sr.into(),
        cfg.d_rd.into(),
        cfg.rho.into(),
        p.lambda_sr.into(),
        p.lambda_rd.into(),
    ])
}

fn policies(cfg: &RunConfig, registry: &PolicyRegistry) -> CliResult<Vec<std::sync::Arc<dyn RelayPolicy>>> {
    cfg.policies
        .iter()
        .map(|n| registry.get(n).map_err(CliError::from))
        .collect()
}

fn report(cfg: &RunConfig, policy: &dyn RelayPolicy, x: f64) -> CliResult<MetricReport> {
    let p = cfg.params()?;
    p.common_power()?;
    Ok(policy.report(&p, x, &cfg.quadrature)?)
}

pub fn eval(cfg: &RunConfig, registry: &PolicyRegistry) -> CliResult<Table> {
    if cfg.sweep.is_some() {
        return Err(ConfigError::key("sweep", "use the `sweep` command for ranges").into());
    }
    let mut cols: Vec<&str> = INPUTS.to_vec();
    cols.extend(MetricReport::FIELDS);
    let mut table = Table::new(&cols);
    for policy in policies(cfg, registry)? {
        let x = cfg.policy_param(policy.name());
        let mut row = input_cells(cfg, policy.as_ref(), x)?;
        row.extend(report(cfg, policy.as_ref(), x)?.values().map(Cell::Num));
        table.push(row);
    }
    Ok(table)
}

/// One row per sweep point and policy, in sweep order. With `optimize` set,
/// the policy parameter is re-optimised at every point.
pub fn sweep(cfg: &RunConfig, registry: &PolicyRegistry) -> CliResult<Table> {
    let range = cfg
        .sweep
        .ok_or_else(|| ConfigError::key("sweep", "required by the `sweep` command"))?;
    let pols = policies(cfg, registry)?;
    let mut cols: Vec<&str> = vec!["sweep", "sweep_value"];
    cols.extend(INPUTS);
    cols.push("objective");
    cols.extend(MetricReport::FIELDS);
    cols.push("boundary");

    let tasks: Vec<(f64, usize)> = range
        .values()
        .into_iter()
        .flat_map(|v| (0..pols.len()).map(move |i| (v, i)))
        .collect();
    let rows = tasks
        .par_iter()
        .map(|&(v, i)| -> CliResult<Vec<Cell>> {
            let point = cfg.at(range.variable, v)?;
            let policy = pols[i].as_ref();
            let (x, boundary) = match cfg.optimize {
                Some(objective) => {
                    let spec = relaysec::OptimizeSpec { objective, ..cfg.optimizer };
                    let o = optimize_policy(&point.params()?, policy, &spec, &cfg.quadrature)?;
                    (o.param, Cell::Bool(o.boundary))
                }
                None => (point.policy_param(policy.name()), Cell::Empty),
            };
            let mut row: Vec<Cell> = vec![range.variable.name().into(), v.into()];
            row.extend(input_cells(&point, policy, x)?);
            row.push(cfg.optimize.map_or(Cell::Empty, |o| o.name().into()));
            row.extend(report(&point, policy, x)?.values().map(Cell::Num));
            row.push(boundary);
            Ok(row)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&cols);
    for row in rows {
        table.push(row);
    }
    Ok(table)
}

/// The design points checked by `validate`: a parameter sweep if one is
/// configured, else 0.1, 0.2, ..., 0.9.
fn validation_grid(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    match cfg.sweep {
        None => Ok((1..=9).map(|i| i as f64 / 10.0).collect()),
        Some(s) if matches!(s.variable, SweepVar::Beta | SweepVar::Alpha) => Ok(s.values()),
        Some(_) => Err(ConfigError::key("sweep", "`validate` only sweeps beta or alpha").into()),
    }
}

/// Analytic metrics against Monte Carlo. The table is returned even when a
/// check fails; the caller turns failures into the exit status.
pub fn validate(cfg: &RunConfig, registry: &PolicyRegistry) -> CliResult<(Table, Vec<ValidationRow>)> {
    let xs = validation_grid(cfg)?;
    let p = cfg.params()?;
    p.common_power()?;
    let mut rows = Vec::new();
    for policy in policies(cfg, registry)? {
        rows.extend(validate_grid(policy.as_ref(), &p, &xs, &cfg.mc(), &cfg.quadrature, &cfg.validation)?);
    }
    let mut table = Table::new(&[
        "policy",
        "parameter",
        "value",
        "metric",
        "mc_mode",
        "mc_samples",
        "analytic",
        "mc",
        "mc_std_error",
        "gap",
        "tolerance",
        "verdict",
    ]);
    for r in &rows {
        table.push(vec![
            r.policy.clone().into(),
            r.parameter.clone().into(),
            r.value.into(),
            r.metric.clone().into(),
            mode_name(r.mc_mode).into(),
            Cell::Int(cfg.mc_samples),
            r.analytic.into(),
            r.mc.into(),
            r.mc_std_error.into(),
            r.gap.into(),
            r.tolerance.into(),
            if r.pass { "PASS" } else { "FAIL" }.into(),
        ]);
    }
    Ok((table, rows))
}

fn mode_name(m: relaysec::SnrMode) -> &'static str {
    match m {
        relaysec::SnrMode::Exact => "exact",
        relaysec::SnrMode::HighSnrApprox => "high_snr_approx",
    }
}

pub fn optimize(cfg: &RunConfig, registry: &PolicyRegistry) -> CliResult<Table> {
    if cfg.sweep.is_some() {
        return Err(ConfigError::key("sweep", "use `sweep` with `optimize` set to optimise along a range").into());
    }
    let objective = cfg.optimize.unwrap_or(Objective::MinSecrecyOutage);
    let spec = relaysec::OptimizeSpec { objective, ..cfg.optimizer };
    let p = cfg.params()?;
    let mut cols: Vec<&str> = INPUTS.to_vec();
    cols.extend(["objective", "lower", "upper", "objective_value", "boundary", "evaluations"]);
    let mut table = Table::new(&cols);
    for policy in policies(cfg, registry)? {
        let o = optimize_policy(&p, policy.as_ref(), &spec, &cfg.quadrature)?;
        let mut row = input_cells(cfg, policy.as_ref(), o.param)?;
        row.extend([
            objective.name().into(),
            spec.lower.into(),
            spec.upper.into(),
            o.value.into(),
            o.boundary.into(),
            Cell::Int(o.evaluations as u64),
        ]);
        table.push(row);
    }
    Ok(table)
}

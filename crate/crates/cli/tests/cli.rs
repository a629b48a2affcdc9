use std::path::Path;
use std::process::{Command, Output};

use relaysec::{policy_for, MetricReport, PolicyKind, QuadSpec, SystemParams};
use serde_json::Value;

fn relaysec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaysec"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV document as (header, rows).
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn eval_json_matches_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let o = relaysec(dir.path(), &["eval", "--policy", "ts", "--alpha", "0.3", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let row = &doc["rows"][0];
    let expected = policy_for(PolicyKind::Ts)
        .report(&SystemParams::reference(), 0.3, &QuadSpec::default())
        .unwrap();
    for (name, value) in MetricReport::FIELDS.iter().zip(expected.values()) {
        let got = row[*name].as_f64().unwrap();
        assert_eq!(got.to_bits(), value.to_bits(), "{name}: {got} vs {value}");
    }
    assert_eq!(row["policy"], "ts");
    assert_eq!(row["value"].as_f64(), Some(0.3));
    // stdout runs still leave the resolved config behind
    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("relaysec-eval.config.json")).unwrap()).unwrap();
    assert_eq!(sidecar["config"]["alpha"].as_f64(), Some(0.3));
    assert_eq!(sidecar["config_sha256"], doc["config_sha256"]);
}

#[test]
fn eval_csv_rows_satisfy_report_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let o = relaysec(dir.path(), &["eval", "--policy", "all", "--beta", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let provenance: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert_eq!(provenance.len(), 4);
    assert!(provenance[0].starts_with("# relaysec "));
    assert!(provenance.iter().any(|l| l.starts_with("# seed: 1")));
    assert!(provenance.iter().any(|l| l.starts_with("# config_sha256: ") && l.len() == 17 + 64));
    let (header, rows) = csv(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(header[0], "policy");
    for row in &rows {
        let get = |n: &str| row[column(&header, n)].parse::<f64>().unwrap();
        let report = MetricReport {
            p_power_outage: get("p_power_outage"),
            p_secrecy_outage_cond: get("p_secrecy_outage_cond"),
            p_secrecy_outage_total: get("p_secrecy_outage_total"),
            p_pos_exact: get("p_pos_exact"),
            p_pos_approx: get("p_pos_approx"),
            ergodic_exact: get("ergodic_exact"),
            ergodic_approx: get("ergodic_approx"),
            ergodic_lower_bound: get("ergodic_lower_bound"),
        };
        // nine significant digits
        report.check_invariants(1e-8).unwrap();
    }
}

#[test]
fn unequal_powers_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = relaysec(dir.path(), &["eval", "--set", "p_s_dbm=40", "--set", "p_d_dbm=37"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("equal source and jamming power"), "{}", stderr(&o));
}

#[test]
fn bad_keys_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let o = relaysec(dir.path(), &["eval", "--set", "eta=2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`eta`"), "{}", stderr(&o));
    let o = relaysec(dir.path(), &["eval", "--set", "gamma=2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`gamma`"), "{}", stderr(&o));
}

#[test]
fn beta_sweep_has_interior_outage_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("beta.csv");
    let o = relaysec(
        dir.path(),
        &["sweep", "--sweep", "beta", "--from", "0.05", "--to", "0.95", "--step", "0.05", "-o", out.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("beta.csv.config.json").exists());
    let (header, rows) = csv(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 19);
    let beta = column(&header, "sweep_value");
    let outage = column(&header, "p_secrecy_outage_total");
    assert!(column(&header, "lambda_rd") < outage, "inputs precede metrics");
    let values: Vec<f64> = rows.iter().map(|r| r[outage].parse().unwrap()).collect();
    // falls steeply from small beta; the optimum sits just below 0.95
    assert!(values[0] > values[9] && values[9] > values[18], "{values:?}");
    let betas: Vec<f64> = rows.iter().map(|r| r[beta].parse().unwrap()).collect();
    assert!(betas.windows(2).all(|w| w[1] > w[0]));

    // a grid that reaches past the optimum turns back up
    let o = relaysec(dir.path(), &["sweep", "--sweep", "beta", "--from", "0.5", "--to", "0.99", "--step", "0.01"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv(&stdout(&o));
    let outage = column(&header, "p_secrecy_outage_total");
    let values: Vec<f64> = rows.iter().map(|r| r[outage].parse().unwrap()).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert!(best > 0 && best < values.len() - 1, "minimum at index {best} of {}", values.len());
}

#[test]
fn config_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# optimisation along relay placement\npolicy = ts\nsweep = d_sr\nfrom = 1\nto = 9\nstep = 2\noptimize = min_secrecy_outage\nformat = json\n").unwrap();
    let o = relaysec(dir.path(), &["sweep", "-c", cfg.to_str().unwrap(), "--step", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let outage: Vec<f64> = rows.iter().map(|r| r["p_secrecy_outage_total"].as_f64().unwrap()).collect();
    assert!(outage.windows(2).all(|w| w[1] <= w[0]), "{outage:?}");
    for r in rows {
        assert_eq!(r["policy"], "ts");
        let (d_sr, d_rd) = (r["d_sr"].as_f64().unwrap(), r["d_rd"].as_f64().unwrap());
        assert_eq!(d_sr + d_rd, 10.0);
        assert_eq!(r["boundary"], false);
    }
}

#[test]
fn validate_passes_and_catches_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let o = relaysec(dir.path(), &["validate", "--policy", "ps", "--mc-samples", "200000"]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    let (header, rows) = csv(&stdout(&o));
    assert_eq!(rows.len(), 9 * 6);
    let verdict = column(&header, "verdict");
    assert!(rows.iter().all(|r| r[verdict] == "PASS"));

    let o = relaysec(
        dir.path(),
        &["validate", "--policy", "ts", "--mc-samples", "200000", "--set", "analytic_eta_scale=0.3"],
    );
    assert_eq!(o.status.code(), Some(1));
    let (header, rows) = csv(&stdout(&o));
    let verdict = column(&header, "verdict");
    assert!(rows.iter().any(|r| r[verdict] == "FAIL"));
}

#[test]
fn optimize_reports_interior_and_boundary_optima() {
    let dir = tempfile::tempdir().unwrap();
    let o = relaysec(dir.path(), &["optimize", "--policy", "all", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for r in doc["rows"].as_array().unwrap() {
        assert_eq!(r["boundary"], false);
        let x = r["value"].as_f64().unwrap();
        assert!(x > 0.05 && x < 0.95, "{r}");
    }

    let o = relaysec(
        dir.path(),
        &["optimize", "--policy", "ts", "--optimize", "max_ergodic_rate", "--format", "json", "--set", "lower=0.01", "--set", "upper=0.1"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &doc["rows"][0];
    assert_eq!(r["boundary"], true);
    assert_eq!(r["value"].as_f64(), Some(0.1));
}

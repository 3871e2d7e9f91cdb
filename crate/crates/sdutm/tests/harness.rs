// SPDX-License-Identifier: Apache-2.0
use sdutm::fit::loglog_slope;
use sdutm::harness::{cmd_converge, cmd_solve, cmd_validate, fmt_f64, OneOrMany, RunConfig, SolverKind};
use sdutm::Error;

fn heat_solve() -> RunConfig {
    let mut config = RunConfig::named("heat-dirichlet");
    config.h = Some(0.01);
    config.t = Some(OneOrMany::Many(vec![0.001, 0.005, 0.01]));
    config
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn solve_table_shape() {
    let report = cmd_solve(&heat_solve()).unwrap();
    let table = rows(&report.csv);
    assert_eq!(table[0], ["t", "x", "re", "im", "abs2"]);
    assert_eq!(table.len() - 1, 101 * 3);
    assert_eq!(report.summary["rows"], 303);
    assert_eq!(report.summary["solver"], "sdutm-series");
    // Boundary value at x = 1 is 2.
    let last: f64 = table[101][2].parse().unwrap();
    assert!((last - 2.0).abs() < 1e-15);
}

#[test]
fn schrodinger_output_has_modulus_column() {
    let mut config = RunConfig::named("ls-dirichlet");
    config.n = Some(19);
    config.t = Some(OneOrMany::One(0.01));
    let report = cmd_solve(&config).unwrap();
    for row in rows(&report.csv).iter().skip(1) {
        let v: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        assert!((v[2] * v[2] + v[3] * v[3] - v[4]).abs() <= 1e-14 * v[4].max(1.0));
    }
}

#[test]
fn csv_uses_17_significant_digits() {
    assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
    let report = cmd_solve(&heat_solve()).unwrap();
    for cell in rows(&report.csv)[1].iter() {
        let mantissa = cell.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{cell}");
        let parsed: f64 = cell.parse().unwrap();
        assert_eq!(fmt_f64(parsed), *cell);
    }
}

#[test]
fn solve_is_deterministic() {
    let a = cmd_solve(&heat_solve()).unwrap();
    let b = cmd_solve(&heat_solve()).unwrap();
    assert_eq!(a.csv, b.csv);
}

#[test]
fn unknown_problem() {
    let err = cmd_solve(&RunConfig::named("no-such-problem")).unwrap_err();
    assert_eq!(err.reason(), Some("unknown-problem"));
    assert!(err.is_config_error());
}

#[test]
fn solver_names_round_trip() {
    for s in [SolverKind::SdutmSeries, SolverKind::SdutmIntegral, SolverKind::Fe, SolverKind::Rk4, SolverKind::Be, SolverKind::Tr, SolverKind::Oracle] {
        assert_eq!(SolverKind::parse(s.name()).unwrap(), s);
    }
    assert!(matches!(SolverKind::parse("euler"), Err(Error::InvalidArgument(_))));
}

#[test]
fn converge_reports_second_order() {
    let mut config = RunConfig::named("heat-dirichlet");
    config.h_values = vec![0.1, 0.05, 0.025, 0.0125];
    config.t = Some(OneOrMany::One(0.01));
    let report = cmd_converge(&config).unwrap();
    let slope = report.summary["fits"]["sdutm-series"]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.1, "{slope}");
    assert_eq!(rows(&report.csv).len(), 5);
}

#[test]
fn validate_reports_rejection() {
    let text = r#"{
        "problem": {
            "equation": {"kind": "advection-right", "c": 1.0},
            "stencil": "centered-o2",
            "initial": {"type": "polynomial", "coeffs": [0.0]},
            "right": {"kind": "dirichlet", "data": {"type": "constant", "value": 0.0}}
        },
        "n": 10
    }"#;
    let report = cmd_validate(&RunConfig::from_json(text).unwrap()).unwrap();
    assert_eq!(report.summary["accepted"], false);
    assert_eq!(report.summary["reason"], "no-closing-relation");

    let mut ok = RunConfig::named("heat-neumann");
    ok.n = Some(10);
    assert_eq!(cmd_validate(&ok).unwrap().summary["accepted"], true);
}

#[test]
fn config_errors() {
    assert!(RunConfig::from_json("{").is_err());
    assert!(RunConfig::from_json(r#"{"problem": "heat-dirichlet", "bogus": 1}"#).is_err());
    let mut config = heat_solve();
    config.tol = Some(-1.0);
    assert!(matches!(cmd_solve(&config), Err(Error::InvalidArgument(_))));
    let mut config = heat_solve();
    config.h = Some(0.03);
    assert!(matches!(cmd_solve(&config), Err(Error::InvalidArgument(_))));
    let mut config = heat_solve();
    config.solver = Some(SolverKind::Rk4);
    config.dt = None;
    // Named problems supply a default step.
    assert!(cmd_solve(&config).is_ok());
}

#[test]
fn slope_fit() {
    let x = [1.0, 0.5, 0.25, 0.125];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
    let fit = loglog_slope(&x, &y).unwrap();
    assert!((fit.slope - 2.0).abs() < 1e-12);
    assert!((fit.intercept - 3f64.log10()).abs() < 1e-12);
    assert!(fit.residual < 1e-12);
    let noisy = [1.0, 0.3, 0.06, 0.016];
    assert!(loglog_slope(&x, &noisy).unwrap().residual > 0.01);
    assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    assert!(loglog_slope(&[1.0, 1.0], &[2.0, 1.0]).is_err());
}

use std::process::{Command, Output};

use edgecache::cli::cli_main;
use edgecache::cost::{AccountingMode, CostParams, Instance};
use edgecache::experiments::{self, parse_csv, ExperimentSpec, OptimizerKind, SweepAxis};
use edgecache::optimizer::{self, PsoConfig};
use edgecache::popularity::Catalog;

fn edgecache(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgecache"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn oracle_prints_tiny_optimum() {
    let out = edgecache(&[
        "oracle",
        "--n",
        "2",
        "--m",
        "2",
        "--f",
        "8",
        "--s",
        "0",
        "--alpha",
        "1",
        "--mu-br",
        "4",
        "--mode",
        "per-request",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("r_opt=0 eta_opt=0 cost_opt=2.25"), "{text}");
    assert!(text.contains("1,0.5,0.125,2.5,2.625"), "{text}");
}

#[test]
fn optimize_is_reproducible_and_seed_sensitive() {
    let args = ["optimize", "--preset", "literal", "--seed", "7", "--trace"];
    let a = edgecache(&args);
    let b = edgecache(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("preset=literal seed=7"));

    let mut in_process = Vec::new();
    let mut err = Vec::new();
    assert_eq!(
        cli_main(["edgecache"].iter().chain(&args), &mut in_process, &mut err),
        0
    );
    assert_eq!(in_process, a.stdout);
}

#[test]
fn sweep_config_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("fig3.csv");
    let config = dir.path().join("fig3.json");
    std::fs::write(
        &config,
        format!(
            r#"{{"axis": "mu_br", "values": [1, 2, 4, 6, 8], "bs_count": 6, "output": {:?}}}"#,
            csv_path.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = edgecache(&["sweep", "--config", config.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());

    let text = std::fs::read_to_string(&csv_path).unwrap();
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(experiments::emit_csv(&rows), text);

    // Each row re-derives from the modules.
    for row in &rows {
        let inst = Instance::new(
            6,
            50,
            Catalog::new(500, 0.8).unwrap(),
            CostParams::new(1.0, row.axis, AccountingMode::PerRequest).unwrap(),
        )
        .unwrap();
        let res = optimizer::exhaustive_oracle(&inst).unwrap();
        assert_eq!(row.r_opt, Some(res.r_opt));
        assert_eq!(
            experiments::format_sig12(row.cost_opt.unwrap()),
            experiments::format_sig12(res.cost_opt)
        );
        let red = experiments::reduction_pct(row.cost_opt.unwrap(), row.cost_eta0.unwrap());
        assert!((red - row.reduction_vs_eta0_pct.unwrap()).abs() < 1e-9);
        let red = experiments::reduction_pct(row.cost_opt.unwrap(), row.cost_eta1.unwrap());
        assert!((red - row.reduction_vs_eta1_pct.unwrap()).abs() < 1e-9);
    }
}

#[test]
fn sweep_json_format() {
    let out = edgecache(&[
        "sweep", "--axis", "s", "--values", "0.6,0.8", "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["r_opt"], 6);
    assert_eq!(v[1]["optimizer"], "oracle");
}

#[test]
fn sweep_rejects_unknown_config_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"axis": "s", "values": [0.8], "cache_sz": 10}"#).unwrap();
    let out = edgecache(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cache_sz"));
}

#[test]
fn invalid_flags_name_the_field() {
    let out = edgecache(&["oracle", "--mu-br", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu_br"));

    let out = edgecache(&["oracle", "--n", "3", "--m", "10", "--f", "5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = edgecache(&["sweep", "--axis", "q", "--values", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("axis"));

    let out = edgecache(&["optimize", "--preset", "fast"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--preset"));
}

#[test]
fn simulate_reports_rows() {
    let out = edgecache(&[
        "simulate",
        "--n",
        "2",
        "--m",
        "2",
        "--f",
        "8",
        "--s",
        "0",
        "--r",
        "0,1,2",
        "--requests",
        "200000",
        "--seed",
        "1",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(1).unwrap().starts_with("0,2,2.25,"));
    assert!(text.ends_with("summary=pass\n"));
}

#[test]
fn simulate_rejects_paper_literal() {
    let out = edgecache(&["simulate", "--mode", "paper-literal", "--requests", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_trends_hold_in_both_modes() {
    for mode in [AccountingMode::PerRequest, AccountingMode::PaperLiteral] {
        let run = |axis, values: Vec<f64>| {
            experiments::run_sweep(&ExperimentSpec {
                mode,
                ..ExperimentSpec::new(axis, values)
            })
            .unwrap()
            .rows
        };
        let mu = run(SweepAxis::MuBr, vec![1.0, 2.0, 4.0, 6.0, 8.0]);
        assert!(
            mu.windows(2).all(|w| w[1].eta_opt <= w[0].eta_opt),
            "{mode}"
        );
        let s = run(SweepAxis::S, vec![0.4, 0.6, 0.8, 1.0, 1.2]);
        assert!(s.windows(2).all(|w| w[1].eta_opt >= w[0].eta_opt), "{mode}");
        assert!(
            s.windows(2).all(|w| w[1].cost_opt < w[0].cost_opt),
            "{mode}"
        );
        let m = run(SweepAxis::M, vec![25.0, 50.0, 75.0, 100.0]);
        assert!(
            m.windows(2).all(|w| w[1].cost_opt < w[0].cost_opt),
            "{mode}"
        );
    }
}

#[test]
fn pso_sweep_rows_rederive() {
    let spec = ExperimentSpec {
        optimizer: OptimizerKind::PsoPractical,
        seed: 21,
        ..ExperimentSpec::new(SweepAxis::S, vec![0.6, 1.0])
    };
    let res = experiments::run_sweep(&spec).unwrap();
    for (row, point) in res.rows.iter().zip(&res.points) {
        let inst = Instance::new(
            point.bs_count,
            point.cache_size,
            Catalog::new(point.file_count, row.axis).unwrap(),
            CostParams::new(1.0, 4.0, row.mode).unwrap(),
        )
        .unwrap();
        let again =
            optimizer::pso_optimize(&inst, &PsoConfig::practical().with_seed(row.seed)).unwrap();
        assert_eq!(row.eta_opt, Some(again.eta_opt));
        assert_eq!(row.cost_opt, Some(again.cost_opt));
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cdo_ld_core::asymptotics::spread_asymptotic;
use cdo_ld_core::entropy::solve_lambda;
use cdo_ld_core::merton::{limiting_measure, GammaVolSpec};
use cdo_ld_core::pool::{build_loss_measure, PoolSpec, TrancheSpec};
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cdo-ld"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| {
            let mut parts = l.split_whitespace();
            (parts.next() == Some(key)).then(|| parts.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no field {key} in\n{report}"))
}

fn tranche_json(alpha: f64, beta: f64) -> Value {
    json!({
        "attachment": alpha, "detachment": beta, "rate": 0.05, "horizon": 5.0,
        "premium_dates": [1.0, 2.0, 3.0, 4.0, 5.0]
    })
}

fn write_config(dir: &TempDir, name: &str, cfg: Value) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn tranche() -> TrancheSpec {
    TrancheSpec::new(0.1, 0.15, 0.05, 5.0, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap()
}

#[test]
fn price_report_matches_the_library_bit_for_bit() {
    let cfg = configs().join("two_atom.json");
    let out = run(&["price", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);

    let mut probs = vec![0.02; 100];
    probs.extend(vec![0.05; 200]);
    let pool = PoolSpec::from_default_probs(&probs, 5.0).unwrap();
    let r = spread_asymptotic(&build_loss_measure(&pool, 5.0), &tranche(), 300).unwrap();
    for (key, value) in [
        ("lambda", r.lambda),
        ("rate_i", r.rate_i),
        ("sigma_sq", r.sigma_sq),
        ("i2_factor", r.i2_factor),
        ("protection_leg", r.protection_leg),
        ("ln_protection_leg", r.ln_protection_leg),
        ("premium_leg", r.premium_leg),
        ("spread", r.spread),
        ("ln_spread", r.ln_spread),
    ] {
        assert_eq!(field(&report, key).to_bits(), value.to_bits(), "{key}");
    }
    assert_eq!(field(&report, "n"), 300.0);
}

#[test]
fn price_csv_has_one_lf_terminated_row() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("price.csv");
    let cfg = configs().join("two_atom.json");
    let out = run(&["price", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(csv).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("n,granularity,lambda,"));
    let spread: f64 = lines[1].split(',').nth(9).unwrap().parse().unwrap();
    assert_eq!(spread, field(&stdout(&out), "spread"));
}

#[test]
fn limiting_mode_reports_the_limiting_multiplier() {
    let dir = TempDir::new().unwrap();
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(configs().join("section6.json")).unwrap()).unwrap();
    cfg["pool"]["N"] = json!(1000);
    let path = write_config(&dir, "s6.json", cfg);
    let out = run(&["price", "--config", path.to_str().unwrap(), "--force", "--limit-mode", "limiting"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let limit = limiting_measure(&GammaVolSpec::new(0.3, 2.0).unwrap(), 6.0, 0.857, 5.0, 96).unwrap();
    let lambda = solve_lambda(&limit, 0.1).unwrap().lambda;
    assert_eq!(field(&stdout(&out), "lambda").to_bits(), lambda.to_bits());
    assert!(stdout(&out).contains("warning: not-flat assumption violated"));
}

#[test]
fn not_flat_failure_blocks_pricing_without_force() {
    let cfg = configs().join("section6.json");
    let out = run(&["price", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not-flat assumption violated"));
}

fn high_mean_config(dir: &TempDir) -> PathBuf {
    write_config(
        dir,
        "junk.json",
        json!({
            "schema_version": 1,
            "pool": {"kind": "explicit", "names": [{"count": 50, "law": "uniform", "p": 0.2}]},
            "tranche": tranche_json(0.1, 0.15)
        }),
    )
}

#[test]
fn attachment_below_mean_exits_with_assumption_code() {
    let dir = TempDir::new().unwrap();
    let path = high_mean_config(&dir);
    let out = run(&["price", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("investment-grade assumption violated"));

    let out = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let line = stdout(&out).lines().find(|l| l.starts_with("A:IG")).unwrap().to_string();
    assert!(line.contains("FAIL") && line.contains("0.2") && line.contains("0.1"), "{line}");
}

#[test]
fn validate_passes_a_healthy_pool() {
    let cfg = configs().join("two_atom.json");
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
    assert!(stdout(&out).contains("rate oracle"));
}

#[test]
fn validate_flags_names_flat_near_the_horizon() {
    let dir = TempDir::new().unwrap();
    let path = write_config(
        &dir,
        "flat.json",
        json!({
            "schema_version": 1,
            "pool": {"kind": "explicit", "names": [
                {"count": 50, "law": "uniform", "p": 0.03},
                {"count": 50, "law": "tabulated", "points": [[0.0, 0.0], [2.0, 0.03], [6.0, 0.03]], "tail_mass": 0.97}
            ]},
            "tranche": tranche_json(0.1, 0.15)
        }),
    );
    let out = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let line = stdout(&out).lines().find(|l| l.starts_with("A:NotFlat")).unwrap().to_string();
    assert!(line.contains("FAIL") && line.contains("0.5"), "{line}");
}

#[test]
fn validate_runs_the_merton_oracle() {
    let dir = TempDir::new().unwrap();
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(configs().join("section6.json")).unwrap()).unwrap();
    cfg["pool"]["N"] = json!(300);
    let path = write_config(&dir, "s6.json", cfg);
    let out = run(&["validate", "--config", path.to_str().unwrap()]);
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("merton oracle")).unwrap();
    assert!(line.contains("PASS"), "{line}");
    // the literal drift leaves no default mass near the horizon
    assert!(text.lines().any(|l| l.starts_with("A:NotFlat") && l.contains("FAIL")));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn correlation_report_lists_states_and_dominant_state() {
    let cfg = configs().join("regimes.json");
    let out = run(&["price", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for label in ["benign", "recession", "crisis"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{label},"))), "{label}");
    }
    assert!(text.lines().any(|l| l.starts_with("dominant_state") && l.ends_with("crisis")));
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').filter_map(|x| x.parse().ok()).collect())
        .collect()
}

#[test]
fn curves_are_monotone_ordered_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("section6.json");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = run(&["curves", "--config", cfg.to_str().unwrap(), "--out-dir", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let lambda = read_csv(&a.join("lambda_curve.csv"));
    assert_eq!(lambda[0][0], -5.0);
    assert!(lambda.windows(2).all(|w| w[1][1] >= w[0][1]));

    let spreads: Vec<Vec<f64>> = ["0.08", "0.1", "0.12"]
        .iter()
        .map(|alpha| read_csv(&a.join(format!("sstar_alpha_{alpha}.csv"))).iter().map(|r| r[9]).collect())
        .collect();
    assert_eq!(spreads[0].len(), 10);
    for ((lo, mid), hi) in spreads[0].iter().zip(&spreads[1]).zip(&spreads[2]) {
        assert!(lo > mid && mid > hi);
    }

    for name in ["lambda_curve.csv", "sstar_alpha_0.08.csv", "sstar_alpha_0.1.csv", "sstar_alpha_0.12.csv"] {
        let x = fs::read(a.join(name)).unwrap();
        assert!(!x.contains(&b'\r'));
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn spread_curves_need_a_sized_family() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("two_atom.json");
    let out = run(&["curves", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(), "--which", "sstar"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn mc_estimators_agree_on_the_non_rare_fixture() {
    let cfg = configs().join("non_rare.json");
    let out = run(&["mc", "--config", cfg.to_str().unwrap(), "--estimator", "both", "--samples", "100000"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("agreement PASS")), "{text}");
    assert_eq!(field(&text, "seed"), 7.0);
}

#[test]
fn mc_output_is_reproducible_across_worker_counts() {
    let cfg = configs().join("two_atom.json");
    let args = ["mc", "--config", cfg.to_str().unwrap(), "--samples", "20000", "--seed", "5"];
    let one = bin().args(args).env("CDO_LD_THREADS", "1").output().unwrap();
    let again = bin().args(args).env("CDO_LD_THREADS", "1").output().unwrap();
    let three = bin().args(args).env("CDO_LD_THREADS", "3").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(one.stdout, three.stdout);

    let bad = bin().args(args).env("CDO_LD_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn mc_clt_and_hn_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("two_atom.json");
    let out = run(&["mc", "--config", cfg.to_str().unwrap(), "--report", "clt", "--clt-bound", "0.5"]);
    assert!(out.status.success());
    let verdict = stdout(&out).lines().last().unwrap().to_string();
    assert!(verdict.starts_with("clt PASS: max relative error"), "{verdict}");

    let csv = dir.path().join("hn.csv");
    let out = run(&[
        "mc", "--config", cfg.to_str().unwrap(), "--report", "hn", "--samples", "20000", "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("s,samples,mean,standard_error,reference,ratio,flagged\n"));
    assert!(text.lines().count() > 1);
}

#[test]
fn pool_gen_round_trips_through_price() {
    let dir = TempDir::new().unwrap();
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(configs().join("section6.json")).unwrap()).unwrap();
    cfg["pool"]["N"] = json!(150);
    let src = write_config(&dir, "s6.json", cfg);
    let generated = dir.path().join("gen.json");
    let out = run(&["pool-gen", "--config", src.to_str().unwrap(), "--out", generated.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let gen: Value = serde_json::from_str(&fs::read_to_string(&generated).unwrap()).unwrap();
    assert_eq!(gen["pool"]["kind"], "explicit");
    assert_eq!(gen["pool"]["names"].as_array().unwrap().len(), 150);

    let price = |p: &Path| stdout(&run(&["price", "--config", p.to_str().unwrap(), "--force"]));
    let (a, b) = (price(&src), price(&generated));
    for key in ["lambda", "rate_i", "sigma_sq"] {
        let (x, y) = (field(&a, key), field(&b, key));
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{key}: {x} vs {y}");
    }
}

#[test]
fn config_errors_exit_with_code_four() {
    let dir = TempDir::new().unwrap();
    let bad_version = write_config(&dir, "v2.json", json!({"schema_version": 2, "pool": {"kind": "explicit", "names": []}, "tranche": tranche_json(0.1, 0.15)}));
    let unknown = write_config(&dir, "unknown.json", json!({"schema_version": 1, "pool": {"kind": "explicit", "names": [{"law": "uniform", "p": 0.01}]}, "tranche": tranche_json(0.1, 0.15), "extra": 1}));
    let bad_tranche = write_config(&dir, "tranche.json", json!({"schema_version": 1, "pool": {"kind": "explicit", "names": [{"law": "uniform", "p": 0.01}]}, "tranche": tranche_json(0.2, 0.15)}));
    for p in [&bad_version, &unknown, &bad_tranche, &dir.path().join("missing.json")] {
        let out = run(&["price", "--config", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(4), "{}: {}", p.display(), stderr(&out));
    }
    assert_eq!(run(&["frobnicate"]).status.code(), Some(4));
}

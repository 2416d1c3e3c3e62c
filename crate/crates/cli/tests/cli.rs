use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ffcli::commands::{default_grid, sweep_learner, sweep_regrets};
use ffcli::tracefile::{read_trace, Summary};
use flipflop::datagen::generate;
use flipflop::{run, Experiment, ExperimentSpec, LearnerKind, Regime};
use serde_json::Value;
use tempfile::TempDir;

fn ffcli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffcli"))
        .args(args)
        .output()
        .expect("spawn ffcli")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn summary(out: &Output) -> Value {
    assert_eq!(code(out), 0, "{}", stderr(out));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn sweep_rows(text: &str) -> Vec<(f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eta,regret"));
    lines
        .map(|l| {
            let (eta, regret) = l.split_once(',').unwrap();
            let eta = if eta == "inf" { f64::INFINITY } else { eta.parse().unwrap() };
            (eta, regret.parse().unwrap())
        })
        .collect()
}

#[test]
fn gen_writes_two_column_rows() {
    let out = ffcli(&["gen", "--experiment", "1", "--rounds", "1000"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().all(|r| r.split(',').count() == 2));
    assert_eq!(rows[0], "0.5,0");
}

#[test]
fn gen_rejects_unknown_experiment() {
    let out = ffcli(&["gen", "--experiment", "5", "--rounds", "10"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("1, 2, 3, 4"), "{}", stderr(&out));
}

#[test]
fn gen_file_has_expected_column_sums() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "e3.csv");
    assert_eq!(code(&ffcli(&["gen", "--experiment", "3", "--rounds", "1000", "--out", &file])), 0);
    let (mut a, mut b) = (0.0, 0.0);
    for line in fs::read_to_string(&file).unwrap().lines() {
        let (x, y) = line.split_once(',').unwrap();
        a += x.parse::<f64>().unwrap();
        b += y.parse::<f64>().unwrap();
    }
    assert_eq!((a, b), (508.0, 492.0));
}

#[test]
fn run_ftl_on_best_case_has_half_unit_regret() {
    let s = summary(&ffcli(&["run", "--algo", "ftl", "--experiment", "2", "--rounds", "1000"]));
    assert_eq!(s["regret"], 0.5);
    assert_eq!(s["C"], 1);
    assert_eq!(s["final_eta"], "inf");
}

#[test]
fn run_adahedge_from_csv_satisfies_bounds() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "e1.csv");
    assert_eq!(code(&ffcli(&["gen", "--experiment", "1", "--out", &file])), 0);
    let s = summary(&ffcli(&["run", "--algo", "adahedge", "--input", &file]));
    let checks = s["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"adahedge_loss_bound") && names.contains(&"adahedge_variance_bound"));
    assert!(checks.iter().all(|c| c["satisfied"] == true));
}

#[test]
fn run_flipflop_alternates_regimes_on_worst_case() {
    let dir = TempDir::new().unwrap();
    let trace = path(&dir, "trace.csv");
    let out = ffcli(&["run", "--algo", "flipflop", "--experiment", "1", "--rounds", "1000", "--trace", &trace]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = read_trace(fs::read_to_string(&trace).unwrap().as_bytes()).unwrap();
    let switches = rows.windows(2).filter(|w| w[0].regime != w[1].regime).count();
    assert!(switches >= 3, "{switches} switches");
    assert!(rows.iter().any(|r| r.regime == Regime::Flop));
}

#[test]
fn run_usage_errors() {
    assert_eq!(code(&ffcli(&["run", "--algo", "hedge", "--experiment", "1"])), 1);
    assert_eq!(code(&ffcli(&["run", "--algo", "hedge", "--eta", "-1", "--experiment", "1"])), 1);
    assert_eq!(code(&ffcli(&["run", "--algo", "flipflop", "--phi", "0.5", "--experiment", "1"])), 1);
    assert_eq!(code(&ffcli(&["run", "--algo", "ftl"])), 1);
    assert_eq!(code(&ffcli(&["run", "--algo", "ftl", "--experiment", "1", "--input", "x.csv"])), 1);
    assert_eq!(code(&ffcli(&["--help"])), 0);
}

#[test]
fn run_rejects_bad_input_data() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "bad.csv");
    fs::write(&file, "0.1,0.2\n0.3,nan\n").unwrap();
    let out = ffcli(&["run", "--algo", "ftl", "--input", &file]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    fs::write(&file, "0.1,0.2\n0.3\n").unwrap();
    assert_eq!(code(&ffcli(&["run", "--algo", "ftl", "--input", &file])), 2);
    assert_eq!(code(&ffcli(&["run", "--algo", "ftl", "--input", &path(&dir, "missing.csv")])), 2);
}

#[test]
fn sweep_small_rate_beats_unit_rate_on_worst_case() {
    let out = ffcli(&["sweep", "--experiment", "1", "--rounds", "1000"]);
    assert_eq!(code(&out), 0);
    let rows = sweep_rows(&stdout(&out));
    assert_eq!(rows.len(), 101);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    let best_small = rows.iter().filter(|r| r.0 <= 0.1).map(|r| r.1).fold(f64::INFINITY, f64::min);
    // grid points bracketing eta = 1
    let near_one: Vec<f64> = rows.iter().filter(|r| (0.8..1.25).contains(&r.0)).map(|r| r.1).collect();
    assert!(!near_one.is_empty());
    assert!(near_one.iter().all(|&r| r > 10.0 * best_small), "{near_one:?} vs {best_small}");
    assert_eq!(rows.last().unwrap().1, 499.75);
}

#[test]
fn sweep_ftl_is_best_on_best_case() {
    let rows = sweep_rows(&stdout(&ffcli(&["sweep", "--experiment", "2", "--rounds", "1000"])));
    let (eta, regret) = *rows.last().unwrap();
    assert!(eta.is_infinite());
    assert_eq!(regret, 0.5);
    assert!(rows.iter().all(|r| r.1 >= 0.5));
}

#[test]
fn sweep_point_equals_run() {
    let out = ffcli(&["sweep", "--experiment", "3", "--rounds", "1000", "--grid", "1"]);
    let rows = sweep_rows(&stdout(&out));
    let s = summary(&ffcli(&["run", "--algo", "hedge", "--eta", "1", "--experiment", "3", "--rounds", "1000"]));
    assert_eq!(rows, vec![(1.0, s["regret"].as_f64().unwrap())]);
}

#[test]
fn parallel_sweep_is_bit_identical_to_sequential_runs() {
    let stream = generate(ExperimentSpec::new(Experiment::SlowSeparation, 400).unwrap());
    let grid = default_grid();
    let swept = sweep_regrets(&stream, &grid).unwrap();
    for (eta, regret) in swept {
        assert_eq!(regret.to_bits(), run(sweep_learner(eta), &stream).unwrap().regret.to_bits());
    }
}

#[test]
fn sweep_rejects_bad_grid() {
    assert_eq!(code(&ffcli(&["sweep", "--experiment", "1", "--grid", "0.1,-2"])), 1);
    assert_eq!(code(&ffcli(&["sweep", "--experiment", "1", "--grid", "abc"])), 1);
}

#[test]
fn check_passes_on_every_experiment() {
    for e in ["1", "2", "3", "4"] {
        let out = ffcli(&["check", "--experiment", e, "--rounds", "1000", "--seed", "7"]);
        assert_eq!(code(&out), 0, "experiment {e}: {}{}", stdout(&out), stderr(&out));
        assert!(stdout(&out).contains("affine invariance"));
        assert!(!stdout(&out).contains("FAIL"));
    }
}

#[test]
fn check_accepts_negative_losses() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "neg.csv");
    let rows: String = (0..200)
        .map(|t| format!("{},{},{}\n", -3.0 + (t % 7) as f64 * 0.25, -2.5 - (t % 3) as f64, (t % 5) as f64 - 4.0))
        .collect();
    fs::write(&file, rows).unwrap();
    let out = ffcli(&["check", "--input", &file, "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let s = summary(&ffcli(&["run", "--algo", "flipflop", "--input", &file]));
    assert!(s["Lstar"].as_f64().unwrap() < 0.0);
}

#[test]
fn verify_trace_accepts_untouched_and_rejects_corrupted() {
    let dir = TempDir::new().unwrap();
    for (algo, corrupt) in [
        ("adahedge", 6usize), // regret column
        ("ftl", 6),
        ("flipflop", 8), // regime column
    ] {
        let trace = path(&dir, &format!("{algo}.csv"));
        let out = ffcli(&["run", "--algo", algo, "--experiment", "1", "--rounds", "600", "--trace", &trace]);
        assert_eq!(code(&out), 0);
        assert_eq!(code(&ffcli(&["check", "--verify-trace", &trace, "--algo", algo])), 0);

        let text = fs::read_to_string(&trace).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
        let mut fields: Vec<String> = lines[400].split(',').map(str::to_owned).collect();
        fields[corrupt] = match corrupt {
            8 => if fields[8] == "flip" { "flop".into() } else { "flip".into() },
            _ => "1000".into(),
        };
        lines[400] = fields.join(",");
        let bad = path(&dir, &format!("{algo}-bad.csv"));
        fs::write(&bad, lines.join("\n") + "\n").unwrap();
        let out = ffcli(&["check", "--verify-trace", &bad, "--algo", algo]);
        assert_eq!(code(&out), 3, "{algo}");
        assert!(stderr(&out).contains("violated"), "{}", stderr(&out));
    }
}

#[test]
fn verify_trace_flags_negative_gap() {
    let dir = TempDir::new().unwrap();
    let trace = path(&dir, "t.csv");
    assert_eq!(code(&ffcli(&["run", "--algo", "hedge", "--eta", "0.5", "--experiment", "4", "--trace", &trace])), 0);
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let mut fields: Vec<String> = lines[5].split(',').map(str::to_owned).collect();
    fields[4] = "-0.25".into();
    lines[5] = fields.join(",");
    fs::write(&trace, lines.join("\n")).unwrap();
    let out = ffcli(&["check", "--verify-trace", &trace, "--algo", "hedge"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("delta >= 0"));
}

#[test]
fn malformed_trace_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let trace = path(&dir, "t.csv");
    fs::write(&trace, "not,a,trace\n").unwrap();
    assert_eq!(code(&ffcli(&["check", "--verify-trace", &trace, "--algo", "ftl"])), 2);
    assert_eq!(code(&ffcli(&["check", "--verify-trace", &trace])), 1);
}

#[test]
fn trace_csv_reproduces_summary() {
    let dir = TempDir::new().unwrap();
    for algo in ["ftl", "safe", "adahedge", "flipflop"] {
        for e in ["1", "3"] {
            let trace = path(&dir, "t.csv");
            let json = path(&dir, "s.json");
            let out = ffcli(&["run", "--algo", algo, "--experiment", e, "--trace", &trace, "--summary", &json]);
            assert_eq!(code(&out), 0);
            let original: Summary = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
            let rows = read_trace(fs::read_to_string(&trace).unwrap().as_bytes()).unwrap();
            let again = Summary::from_rows(&original.algorithm, &rows);
            assert_eq!(again.rounds, original.rounds);
            assert_eq!(again.hedge_loss, original.hedge_loss);
            assert_eq!(again.mix_loss, original.mix_loss);
            assert_eq!(again.gap, original.gap);
            assert_eq!(again.variance, original.variance);
            assert_eq!(again.leader_changes, original.leader_changes);
            assert_eq!(again.regret, original.regret);
            assert!((again.best_loss - original.best_loss).abs() <= 1e-9);
        }
    }
}

#[test]
fn summary_matches_library_run() {
    let s = summary(&ffcli(&["run", "--algo", "safe", "--experiment", "1"]));
    let stream = generate(ExperimentSpec::new(Experiment::FtlWorstCase, 1000).unwrap());
    let trace = run(LearnerKind::SafeHedge { horizon: 1000 }, &stream).unwrap();
    assert_eq!(s["regret"].as_f64().unwrap(), trace.regret);
    assert_eq!(s["H"].as_f64().unwrap(), trace.hedge_loss);
    assert!(Path::new(env!("CARGO_BIN_EXE_ffcli")).exists());
}

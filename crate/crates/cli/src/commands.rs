use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use flipflop::datagen::{generate, load_csv, write_losses};
use flipflop::{check_trace, run, ExperimentSpec, LearnerKind, LossVector, Trace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::args::{Algo, CheckArgs, Cli, Command, GenArgs, InputArgs, LearnerOpts, RunArgs, SweepArgs};
use crate::tracefile::{read_trace, verify_rows, write_trace, Summary};
use crate::CliError;

/// Sup-norm tolerance between weights on a stream and its affine image.
pub const INVARIANCE_TOLERANCE: f64 = 1e-9;

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run_one(a),
        Command::Sweep(a) => sweep(a),
        Command::Check(a) => check(a),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn experiment_stream(spec: Result<ExperimentSpec, flipflop::Error>) -> Result<Vec<LossVector>, CliError> {
    spec.map(generate).map_err(|e| CliError::Usage(e.to_string()))
}

fn load(input: &InputArgs) -> Result<Vec<LossVector>, CliError> {
    match (&input.source.experiment, &input.source.input) {
        (Some(e), _) => experiment_stream(ExperimentSpec::new(*e, input.rounds)),
        (None, Some(path)) => Ok(load_csv(path)?),
        (None, None) => Err(CliError::Usage("one of --experiment or --input is required".into())),
    }
}

fn gen(a: GenArgs) -> Result<(), CliError> {
    let stream = experiment_stream(ExperimentSpec::new(a.experiment, a.rounds))?;
    write_losses(output(a.out.as_deref())?, &stream)?;
    Ok(())
}

fn failed_checks(kind: &LearnerKind, checks: &[flipflop::BoundCheck]) -> Vec<String> {
    checks
        .iter()
        .filter(|c| !c.satisfied)
        .map(|c| format!("{kind}: {} violated: {} > {}", c.name, c.observed, c.bound))
        .collect()
}

fn run_one(a: RunArgs) -> Result<(), CliError> {
    let stream = load(&a.input)?;
    let kind = a.learner.kind(a.algo, stream.len())?;
    let trace = run(kind, &stream)?;
    let checks = check_trace(&trace, &kind, &stream)?;
    if let Some(path) = &a.trace {
        write_trace(BufWriter::new(File::create(path)?), &trace)?;
    }
    let summary = Summary::new(&kind, &trace, checks);
    let mut out = output(a.summary.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &summary).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    let violations = failed_checks(&kind, &summary.checks);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(violations))
    }
}

/// 100 log-spaced rates in `[1e-3, 1e2]` followed by `inf`.
pub fn default_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..100).map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / 99.0)).collect();
    grid.push(f64::INFINITY);
    grid
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            let eta = if item == "inf" { Some(f64::INFINITY) } else { item.parse::<f64>().ok() };
            eta.filter(|&e| e > 0.0)
                .ok_or_else(|| CliError::Usage(format!("grid rate must be positive or inf, got {item:?}")))
        })
        .collect()
}

/// The learner a sweep uses at rate `eta`.
pub fn sweep_learner(eta: f64) -> LearnerKind {
    if eta.is_infinite() {
        LearnerKind::Ftl
    } else {
        LearnerKind::FixedHedge { eta }
    }
}

/// Regret at every grid rate, sorted by rate.
pub fn sweep_regrets(stream: &[LossVector], grid: &[f64]) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rows = grid
        .par_iter()
        .map(|&eta| Ok((eta, run(sweep_learner(eta), stream)?.regret)))
        .collect::<Result<Vec<_>, flipflop::Error>>()?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rows)
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let grid = match &a.grid {
        Some(s) => parse_grid(s)?,
        None => default_grid(),
    };
    let stream = load(&a.input)?;
    let rows = sweep_regrets(&stream, &grid)?;
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "eta,regret")?;
    for (eta, regret) in rows {
        if eta.is_infinite() {
            writeln!(out, "inf,{regret}")?;
        } else {
            writeln!(out, "{eta},{regret}")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Compares a learner on `stream` and on its affine image. Weights must agree
/// in sup-norm, FlipFlop regimes must be identical, and the total gap must
/// scale by `sigma`.
pub fn affine_violations(kind: LearnerKind, stream: &[LossVector], sigma: f64, shifts: &[f64]) -> Result<Vec<String>, CliError> {
    let moved = stream
        .iter()
        .zip(shifts)
        .map(|(l, &tau)| l.affine(sigma, tau))
        .collect::<Result<Vec<_>, _>>()?;
    let a = run(kind, stream)?;
    let b = run(kind, &moved)?;
    let mut violations = Vec::new();
    for (x, y) in a.records.iter().zip(&b.records) {
        let d = x.weights.sup_distance(&y.weights);
        if d > INVARIANCE_TOLERANCE {
            violations.push(format!(
                "{kind}: round {}: weight invariance violated: sup distance {d} > {INVARIANCE_TOLERANCE}",
                x.t
            ));
            break;
        }
        if x.regime != y.regime {
            violations.push(format!(
                "{kind}: round {}: regime invariance violated: {} vs {}",
                x.t, x.regime, y.regime
            ));
            break;
        }
    }
    let expected = sigma * a.gap;
    if (b.gap - expected).abs() > INVARIANCE_TOLERANCE * expected + 1e-12 {
        violations.push(format!("{kind}: gap scaling violated: {} vs sigma * Delta = {expected}", b.gap));
    }
    Ok(violations)
}

fn report(trace: &Trace, kind: &LearnerKind, checks: &[flipflop::BoundCheck]) {
    println!("{kind}: regret {} over {} rounds", trace.regret, trace.rounds());
    for c in checks {
        let status = if c.satisfied { "ok  " } else { "FAIL" };
        println!("  {status} {} {} <= {}", c.name, c.observed, c.bound);
    }
}

fn check(a: CheckArgs) -> Result<(), CliError> {
    if let Some(path) = &a.verify_trace {
        return verify_trace(path, a.algo.expect("clap enforces --algo"), &a.learner);
    }
    let stream = match (a.experiment, &a.input) {
        (Some(e), _) => experiment_stream(ExperimentSpec::new(e, a.rounds))?,
        (None, Some(path)) => load_csv(path)?,
        (None, None) => {
            return Err(CliError::Usage(
                "check needs --experiment, --input or --verify-trace".into(),
            ))
        }
    };
    let algos: Vec<Algo> = match a.algo {
        Some(algo) => vec![algo],
        None => Algo::ALL.to_vec(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    // (0, 10]
    let sigma = 10.0 - rng.random_range(0.0..10.0);
    let shifts: Vec<f64> = (0..stream.len()).map(|_| rng.random_range(-5.0..=5.0)).collect();

    let mut violations = Vec::new();
    for algo in algos {
        let kind = a.learner.kind_in_set(algo, stream.len())?;
        let trace = run(kind, &stream)?;
        let checks = check_trace(&trace, &kind, &stream)?;
        report(&trace, &kind, &checks);
        violations.extend(failed_checks(&kind, &checks));
        if matches!(kind, LearnerKind::AdaHedge | LearnerKind::FlipFlop(_)) {
            let found = affine_violations(kind, &stream, sigma, &shifts)?;
            let status = if found.is_empty() { "ok  " } else { "FAIL" };
            println!("  {status} affine invariance (sigma = {sigma}, seed = {})", a.seed);
            violations.extend(found);
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(violations))
    }
}

fn verify_trace(path: &Path, algo: Algo, opts: &LearnerOpts) -> Result<(), CliError> {
    let rows = read_trace(BufReader::new(File::open(path)?))?;
    // rates are read from the trace; only the kind and FlipFlop parameters matter
    let kind = opts.kind_in_set(algo, rows.len())?;
    let violations = verify_rows(&rows, &kind);
    if violations.is_empty() {
        println!("{}: {} rounds verified", path.display(), rows.len());
        Ok(())
    } else {
        Err(CliError::Violation(violations))
    }
}

use flipflop::bounds::{adahedge_regret_bound, check_trace, flipflop_bounds};
use flipflop::datagen::generate;
use flipflop::{leader_changes, run, Experiment, ExperimentSpec, FlipFlopParams, LearnerKind, LossVector, Regime};

fn stream(experiment: Experiment, rounds: usize) -> Vec<LossVector> {
    generate(ExperimentSpec::new(experiment, rounds).unwrap())
}

fn all_kinds(rounds: usize) -> Vec<LearnerKind> {
    vec![
        LearnerKind::Ftl,
        LearnerKind::FixedHedge { eta: 1.0 },
        LearnerKind::SafeHedge { horizon: rounds },
        LearnerKind::AdaHedge,
        LearnerKind::FlipFlop(FlipFlopParams::DEFAULT),
    ]
}

/// Leader-change count on losses that are exact multiples of 1/2, using
/// integer arithmetic on doubled losses.
fn brute_force_leader_changes(stream: &[LossVector]) -> usize {
    let k = stream[0].experts();
    let mut totals = vec![0i64; k];
    let mut count = 0;
    for (t, loss) in stream.iter().enumerate() {
        let before_min = *totals.iter().min().unwrap();
        let leaders: Vec<usize> = (0..k).filter(|&i| totals[i] == before_min).collect();
        for (total, l) in totals.iter_mut().zip(loss.as_slice()) {
            let doubled = l * 2.0;
            assert_eq!(doubled.fract(), 0.0);
            *total += doubled as i64;
        }
        let after_min = *totals.iter().min().unwrap();
        if t == 0 || leaders.iter().any(|&i| totals[i] != after_min) {
            count += 1;
        }
    }
    count
}

#[test]
fn leader_changes_match_integer_oracle() {
    for experiment in Experiment::ALL {
        let s = stream(experiment, 1000);
        assert_eq!(leader_changes(&s).unwrap(), brute_force_leader_changes(&s), "{experiment:?}");
    }
    // the leader flips every round on the FTL worst case
    assert_eq!(leader_changes(&stream(Experiment::FtlWorstCase, 1000)).unwrap(), 1000);
    assert_eq!(leader_changes(&stream(Experiment::FtlBestCase, 1000)).unwrap(), 1);
}

#[test]
fn ftl_worst_case_regret_near_half_horizon() {
    let trace = run(LearnerKind::Ftl, &stream(Experiment::FtlWorstCase, 1000)).unwrap();
    assert!((495.0..=505.0).contains(&trace.regret), "{}", trace.regret);
    assert!(trace.regret <= trace.leader_changes as f64);
}

#[test]
fn ftl_best_case_regret_is_one_half_for_every_horizon() {
    for rounds in [1, 2, 3, 10, 57, 1000] {
        let trace = run(LearnerKind::Ftl, &stream(Experiment::FtlBestCase, rounds)).unwrap();
        assert_eq!(trace.regret, 0.5, "T={rounds}");
        for r in trace.regret_path() {
            assert_eq!(r, 0.5);
        }
    }
}

#[test]
fn adahedge_within_loss_bound_on_ftl_worst_case() {
    let trace = run(LearnerKind::AdaHedge, &stream(Experiment::FtlWorstCase, 1000)).unwrap();
    let bound = adahedge_regret_bound(trace.best_loss, 1000, 2).unwrap();
    assert!(trace.regret <= bound, "{} > {}", trace.regret, bound);
}

#[test]
fn flipflop_on_ftl_best_case_within_ftl_bound() {
    let trace = run(LearnerKind::FlipFlop(FlipFlopParams::DEFAULT), &stream(Experiment::FtlBestCase, 1000)).unwrap();
    let (ftl, _) = flipflop_bounds(0.5, trace.best_loss, 1000, 2, FlipFlopParams::DEFAULT).unwrap();
    assert!((ftl - 7.4546).abs() < 1e-3);
    assert!(trace.regret <= 7.46);
}

#[test]
fn flipflop_alternates_on_ftl_worst_case() {
    let trace = run(LearnerKind::FlipFlop(FlipFlopParams::DEFAULT), &stream(Experiment::FtlWorstCase, 1000)).unwrap();
    let regimes = trace.regimes();
    let epochs = 1 + regimes.windows(2).filter(|w| w[0] != w[1]).count();
    assert!(epochs >= 4, "only {epochs} epochs");
    assert!(regimes.contains(&Regime::Flip) && regimes.contains(&Regime::Flop));
}

#[test]
fn every_applicable_bound_holds_on_every_experiment() {
    for experiment in Experiment::ALL {
        let s = stream(experiment, 1000);
        for kind in all_kinds(1000) {
            let trace = run(kind, &s).unwrap();
            let checks = check_trace(&trace, &kind, &s).unwrap();
            assert!(!checks.is_empty());
            for c in &checks {
                assert!(c.satisfied, "{experiment:?} {kind}: {c:?}");
            }
        }
    }
}

#[test]
fn weights_are_probability_vectors() {
    for experiment in Experiment::ALL {
        let s = stream(experiment, 300);
        for kind in all_kinds(300) {
            for r in run(kind, &s).unwrap().records {
                let w = r.weights.as_slice();
                assert!(w.iter().all(|&x| x >= 0.0));
                assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                assert!(r.delta >= 0.0 && r.delta <= 1.0);
                assert!(r.v >= 0.0 && r.v <= 0.25 + 1e-15);
            }
        }
    }
}

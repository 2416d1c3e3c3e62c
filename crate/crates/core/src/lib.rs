//! Hedge-family learners for prediction with expert advice.
//!
//! The crate provides Follow-the-Leader, Hedge with a fixed or horizon-tuned
//! learning rate, AdaHedge and FlipFlop, all built on one numerically robust
//! exponential-weights kernel ([`hedge::mix`]). Each run produces a
//! [`Trace`] of per-round Hedge loss, mix loss, mixability gap and variance,
//! which the [`bounds`] module checks against the closed-form regret
//! guarantees of each learner.
//!
//! ```
//! use flipflop::{datagen, learners, Experiment, ExperimentSpec, LearnerKind};
//!
//! let stream = datagen::generate(ExperimentSpec::new(Experiment::FtlBestCase, 1000).unwrap());
//! let trace = learners::run(LearnerKind::Ftl, &stream).unwrap();
//! assert_eq!(trace.regret, 0.5);
//! ```

pub mod bounds;
pub mod datagen;
pub mod error;
pub mod hedge;
pub mod learners;
pub mod trace;

pub use bounds::{check_trace, BoundCheck, BoundReport, LossScale};
pub use datagen::{Experiment, ExperimentSpec};
pub use error::{Error, Result};
pub use hedge::{account_round, leader_changes, mix, CumulativeLoss, LossVector, MixOutcome, Rate, Regime, RoundRecord, WeightVector};
pub use learners::{run, FlipFlopParams, Learner, LearnerKind};
pub use trace::Trace;

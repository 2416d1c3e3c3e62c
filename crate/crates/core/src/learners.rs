//! The five Hedge-family strategies as sequential state machines.
//!
//! Every learner emits its weights from the cumulative losses seen so far,
//! then observes the next loss vector. The strategies differ only in the
//! learning rate they pick for the round:
//!
//! | kind         | rate                                      |
//! |--------------|-------------------------------------------|
//! | FTL          | `∞`                                       |
//! | FixedHedge   | `η`                                       |
//! | SafeHedge    | `sqrt(8 ln K / T)` for a known horizon    |
//! | AdaHedge     | `ln K / Δ_{t-1}`                          |
//! | FlipFlop     | `∞` in flip rounds, `ln K / Δ̲_{t-1}` in flop rounds |
//!
//! A zero gap always maps to the infinite rate.

use std::fmt;

use crate::error::{Error, Result};
use crate::hedge::{account_round, mix, CumulativeLoss, LossVector, Rate, Regime, RoundRecord, WeightVector};
use crate::trace::Trace;

/// FlipFlop switching parameters `φ > 1` and `α > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipFlopParams {
    pub phi: f64,
    pub alpha: f64,
}

impl FlipFlopParams {
    /// The tuned pair that roughly equalizes both leading factors of the
    /// FlipFlop regret bounds.
    pub const DEFAULT: FlipFlopParams = FlipFlopParams {
        phi: 2.37,
        alpha: 1.243,
    };

    pub fn new(phi: f64, alpha: f64) -> Result<Self> {
        let params = FlipFlopParams { phi, alpha };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 1.0 && self.phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("phi must be > 1, got {}", self.phi)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {}", self.alpha)));
        }
        Ok(())
    }
}

impl Default for FlipFlopParams {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LearnerKind {
    Ftl,
    FixedHedge { eta: f64 },
    SafeHedge { horizon: usize },
    AdaHedge,
    FlipFlop(FlipFlopParams),
}

impl LearnerKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LearnerKind::FixedHedge { eta } => Rate::finite(eta).map(|_| ()),
            LearnerKind::SafeHedge { horizon: 0 } => {
                Err(Error::InvalidParameter("safe hedge horizon must be >= 1".into()))
            }
            LearnerKind::FlipFlop(params) => params.validate(),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::Ftl => "ftl",
            LearnerKind::FixedHedge { .. } => "hedge",
            LearnerKind::SafeHedge { .. } => "safe",
            LearnerKind::AdaHedge => "adahedge",
            LearnerKind::FlipFlop(_) => "flipflop",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerKind::Ftl => f.write_str("ftl"),
            LearnerKind::FixedHedge { eta } => write!(f, "hedge(eta={eta})"),
            LearnerKind::SafeHedge { horizon } => write!(f, "safe(T={horizon})"),
            LearnerKind::AdaHedge => f.write_str("adahedge"),
            LearnerKind::FlipFlop(p) => write!(f, "flipflop(phi={}, alpha={})", p.phi, p.alpha),
        }
    }
}

/// `sqrt(8 ln K / T)`, the rate that balances the Hoeffding bound.
pub fn safe_rate(experts: usize, horizon: usize) -> f64 {
    (8.0 * (experts as f64).ln() / horizon as f64).sqrt()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AdaHedgeState {
    /// Cumulative mixability gap.
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipFlopState {
    /// `Δ̄`, gap accumulated in flip rounds.
    pub gap_flip: f64,
    /// `Δ̲`, gap accumulated in flop rounds.
    pub gap_flop: f64,
    pub regime: Regime,
}

impl Default for FlipFlopState {
    fn default() -> Self {
        FlipFlopState {
            gap_flip: 0.0,
            gap_flop: 0.0,
            regime: Regime::Flip,
        }
    }
}

impl FlipFlopState {
    pub fn rate(&self, experts: usize) -> Rate {
        match self.regime {
            Regime::Flop => Rate::from_gap(experts, self.gap_flop),
            _ => Rate::INFINITE,
        }
    }

    /// Adds the round's gap to the active regime's accumulator.
    pub fn accumulate(&mut self, delta: f64) {
        match self.regime {
            Regime::Flop => self.gap_flop += delta,
            _ => self.gap_flip += delta,
        }
    }

    /// Toggles the regime when the active accumulator exceeds its threshold.
    /// Called once per round, after [`accumulate`](Self::accumulate).
    pub fn switch(&mut self, params: FlipFlopParams) {
        self.regime = match self.regime {
            Regime::Flop if self.gap_flop > params.alpha * self.gap_flip => Regime::Flip,
            Regime::Flip if self.gap_flip > (params.phi / params.alpha) * self.gap_flop => Regime::Flop,
            other => other,
        };
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum GapState {
    Stateless,
    AdaHedge(AdaHedgeState),
    FlipFlop(FlipFlopState),
}

/// A single learner instance. Not shared across threads; instances are
/// independent of each other.
#[derive(Clone, Debug)]
pub struct Learner {
    kind: LearnerKind,
    cumulative: CumulativeLoss,
    rounds: usize,
    gaps: GapState,
}

impl Learner {
    pub fn new(kind: LearnerKind, experts: usize) -> Result<Self> {
        kind.validate()?;
        let gaps = match kind {
            LearnerKind::AdaHedge => GapState::AdaHedge(AdaHedgeState::default()),
            LearnerKind::FlipFlop(_) => GapState::FlipFlop(FlipFlopState::default()),
            _ => GapState::Stateless,
        };
        Ok(Learner {
            kind,
            cumulative: CumulativeLoss::zeros(experts)?,
            rounds: 0,
            gaps,
        })
    }

    pub fn kind(&self) -> LearnerKind {
        self.kind
    }

    pub fn experts(&self) -> usize {
        self.cumulative.experts()
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn cumulative(&self) -> &CumulativeLoss {
        &self.cumulative
    }

    pub fn adahedge_state(&self) -> Option<&AdaHedgeState> {
        match &self.gaps {
            GapState::AdaHedge(s) => Some(s),
            _ => None,
        }
    }

    pub fn flipflop_state(&self) -> Option<&FlipFlopState> {
        match &self.gaps {
            GapState::FlipFlop(s) => Some(s),
            _ => None,
        }
    }

    /// Learning rate for the upcoming round.
    pub fn current_rate(&self) -> Rate {
        let k = self.experts();
        match (self.kind, &self.gaps) {
            (LearnerKind::Ftl, _) => Rate::INFINITE,
            (LearnerKind::FixedHedge { eta }, _) => Rate::new(eta).expect("validated at construction"),
            (LearnerKind::SafeHedge { horizon }, _) => {
                Rate::new(safe_rate(k, horizon)).expect("positive for K >= 2")
            }
            (_, GapState::AdaHedge(s)) => Rate::from_gap(k, s.gap),
            (_, GapState::FlipFlop(s)) => s.rate(k),
            (_, GapState::Stateless) => unreachable!("stateful learner without state"),
        }
    }

    /// Weights for the upcoming round.
    pub fn weights(&self) -> WeightVector {
        mix(self.current_rate(), self.cumulative.totals())
            .expect("cumulative losses are validated on update")
            .weights
    }

    /// Plays one round against `loss` and updates the state.
    pub fn step(&mut self, loss: &LossVector) -> Result<RoundRecord> {
        let rate = self.current_rate();
        let (mut record, cumulative) = account_round(self.rounds + 1, rate, &self.cumulative, loss)?;
        match &mut self.gaps {
            GapState::AdaHedge(s) => s.gap += record.delta,
            GapState::FlipFlop(s) => {
                record.regime = s.regime;
                s.accumulate(record.delta);
                if let LearnerKind::FlipFlop(params) = self.kind {
                    s.switch(params);
                }
            }
            GapState::Stateless => {}
        }
        self.cumulative = cumulative;
        self.rounds += 1;
        Ok(record)
    }
}

/// Runs `kind` over the whole stream.
pub fn run(kind: LearnerKind, stream: &[LossVector]) -> Result<Trace> {
    let first = stream.first().ok_or(Error::EmptyStream)?;
    let mut learner = Learner::new(kind, first.experts())?;
    stream.iter().map(|loss| learner.step(loss)).collect()
}

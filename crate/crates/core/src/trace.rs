//! Ordered round records plus the running aggregates of a run.

use crate::hedge::{Regime, RoundRecord};

/// A complete run: every round record and the cumulative totals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<RoundRecord>,
    /// `H`, cumulative Hedge loss.
    pub hedge_loss: f64,
    /// `M`, cumulative mix loss.
    pub mix_loss: f64,
    /// `Δ`, cumulative mixability gap.
    pub gap: f64,
    /// `V`, cumulative loss variance.
    pub variance: f64,
    /// `L*`, cumulative loss of the best expert.
    pub best_loss: f64,
    /// `C`, number of leader changes.
    pub leader_changes: usize,
    /// `H - L*`.
    pub regret: f64,
}

/// Gap and variance sums restricted to one FlipFlop regime.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RegimeTotals {
    pub gap: f64,
    pub mix_loss: f64,
    pub variance: f64,
    pub rounds: usize,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: RoundRecord) {
        self.hedge_loss += record.h;
        self.mix_loss += record.m;
        self.gap += record.delta;
        self.variance += record.v;
        self.best_loss = record.best_loss;
        self.leader_changes += usize::from(record.leader_change);
        self.regret = self.hedge_loss - self.best_loss;
        self.records.push(record);
    }

    pub fn rounds(&self) -> usize {
        self.records.len()
    }

    pub fn experts(&self) -> usize {
        self.records.first().map_or(0, |r| r.weights.as_slice().len())
    }

    /// Cumulative regret after each round.
    pub fn regret_path(&self) -> Vec<f64> {
        let mut h = 0.0;
        self.records
            .iter()
            .map(|r| {
                h += r.h;
                h - r.best_loss
            })
            .collect()
    }

    pub fn regime_totals(&self, regime: Regime) -> RegimeTotals {
        self.records
            .iter()
            .filter(|r| r.regime == regime)
            .fold(RegimeTotals::default(), |mut acc, r| {
                acc.gap += r.delta;
                acc.mix_loss += r.m;
                acc.variance += r.v;
                acc.rounds += 1;
                acc
            })
    }

    pub fn regimes(&self) -> Vec<Regime> {
        self.records.iter().map(|r| r.regime).collect()
    }
}

impl FromIterator<RoundRecord> for Trace {
    fn from_iter<I: IntoIterator<Item = RoundRecord>>(iter: I) -> Self {
        let mut trace = Trace::new();
        for record in iter {
            trace.push(record);
        }
        trace
    }
}

//! Exponential weights, mix loss and per-round loss accounting.
//!
//! Everything here is a pure function of its inputs. Cumulative losses are
//! accumulated in expert-index order, and the leader set at an infinite
//! learning rate is decided by exact floating-point equality with the
//! minimum, so ties are reproducible for identical accumulation histories.

use std::fmt;

use crate::error::{Error, Result};

/// A learning rate in `(0, ∞]`. The infinite rate is Follow-the-Leader.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Rate(f64);

impl Rate {
    pub const INFINITE: Rate = Rate(f64::INFINITY);

    /// Accepts any positive value, including `f64::INFINITY`.
    pub fn new(eta: f64) -> Result<Self> {
        if eta > 0.0 {
            Ok(Rate(eta))
        } else {
            Err(Error::InvalidRate(eta))
        }
    }

    /// Accepts only finite positive values.
    pub fn finite(eta: f64) -> Result<Self> {
        if eta.is_finite() {
            Self::new(eta)
        } else {
            Err(Error::InvalidRate(eta))
        }
    }

    /// `ln(K) / gap`, with a zero gap mapping to the infinite rate.
    pub fn from_gap(experts: usize, gap: f64) -> Self {
        if gap > 0.0 {
            Rate((experts as f64).ln() / gap)
        } else {
            Rate::INFINITE
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn check_entries(values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::TooFewExperts(values.len()));
    }
    match values.iter().position(|v| !v.is_finite()) {
        Some(expert) => Err(Error::NonFinite {
            expert,
            value: values[expert],
        }),
        None => Ok(()),
    }
}

/// One round of losses, one entry per expert.
#[derive(Clone, Debug, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(losses: Vec<f64>) -> Result<Self> {
        check_entries(&losses)?;
        Ok(LossVector(losses))
    }

    pub fn experts(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `scale * loss + shift` for every expert.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        LossVector::new(self.0.iter().map(|l| scale * l + shift).collect())
    }
}

/// Per-expert cumulative losses together with the current minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulativeLoss {
    totals: Vec<f64>,
    best: f64,
}

impl CumulativeLoss {
    pub fn zeros(experts: usize) -> Result<Self> {
        Self::new(vec![0.0; experts])
    }

    pub fn new(totals: Vec<f64>) -> Result<Self> {
        check_entries(&totals)?;
        let best = totals.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(CumulativeLoss { totals, best })
    }

    pub fn experts(&self) -> usize {
        self.totals.len()
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    /// `L*`, the loss of the best expert so far.
    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn is_leader(&self, expert: usize) -> bool {
        self.totals[expert] == self.best
    }

    /// Adds one round of losses. `round` is only used for error reporting.
    pub fn add(&self, loss: &LossVector, round: usize) -> Result<Self> {
        if loss.experts() != self.experts() {
            return Err(Error::DimensionMismatch {
                round,
                expected: self.experts(),
                found: loss.experts(),
            });
        }
        let totals = self
            .totals
            .iter()
            .zip(loss.as_slice())
            .map(|(total, l)| total + l)
            .collect();
        Self::new(totals)
    }
}

/// A probability vector over the experts.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, loss: &LossVector) -> f64 {
        self.0.iter().zip(loss.as_slice()).map(|(w, l)| w * l).sum()
    }

    /// Largest absolute coordinate difference.
    pub fn sup_distance(&self, other: &WeightVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Weights and cumulative mix loss for one `(rate, cumulative loss)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct MixOutcome {
    pub weights: WeightVector,
    pub mixloss: f64,
}

/// Computes the exponential weights and the cumulative mix loss
/// `-(1/η) ln((1/K) Σ_k e^{-η L_k})`, shifting by the minimum first so the
/// largest exponent is zero.
///
/// At the infinite rate the weights are uniform over the experts whose
/// cumulative loss equals the minimum and the mix loss is that minimum.
pub fn mix(rate: Rate, totals: &[f64]) -> Result<MixOutcome> {
    check_entries(totals)?;
    let mn = totals.iter().copied().fold(f64::INFINITY, f64::min);
    let unnormalized: Vec<f64> = if rate.is_infinite() {
        totals
            .iter()
            .map(|&l| if l == mn { 1.0 } else { 0.0 })
            .collect()
    } else {
        let eta = rate.value();
        totals.iter().map(|&l| (-eta * (l - mn)).exp()).collect()
    };
    let sum: f64 = unnormalized.iter().sum();
    let weights = WeightVector(unnormalized.iter().map(|u| u / sum).collect());
    let mixloss = if rate.is_infinite() {
        mn
    } else {
        mn - (sum / totals.len() as f64).ln() / rate.value()
    };
    Ok(MixOutcome { weights, mixloss })
}

/// Which FlipFlop regime a round was played in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Follow-the-Leader rounds.
    Flip,
    /// AdaHedge-style rounds.
    Flop,
    /// Learners without regimes.
    NotApplicable,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Flip => "flip",
            Regime::Flop => "flop",
            Regime::NotApplicable => "n/a",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "flip" => Some(Regime::Flip),
            "flop" => Some(Regime::Flop),
            "n/a" => Some(Regime::NotApplicable),
            _ => None,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything observed in a single round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: usize,
    pub rate: Rate,
    /// Weights played before the loss was revealed.
    pub weights: WeightVector,
    /// Hedge loss `w · ℓ`.
    pub h: f64,
    /// Mix loss of the round, unclipped.
    pub m: f64,
    /// Mixability gap `max(0, h - m)`.
    pub delta: f64,
    /// Variance of the loss under the played weights.
    pub v: f64,
    pub leader_change: bool,
    pub regime: Regime,
    /// `L*_t`, the best cumulative loss after this round.
    pub best_loss: f64,
}

/// Plays one round at a fixed rate: returns the round record and the
/// updated cumulative loss.
pub fn account_round(
    round: usize,
    rate: Rate,
    previous: &CumulativeLoss,
    loss: &LossVector,
) -> Result<(RoundRecord, CumulativeLoss)> {
    let current = previous.add(loss, round)?;
    let MixOutcome {
        weights,
        mixloss: m_prev,
    } = mix(rate, previous.totals())?;
    let h = weights.dot(loss);
    let m_cur = mix(rate, current.totals())?.mixloss;
    let m = m_cur - m_prev;
    // max clips floating-point violations of Jensen's inequality
    let delta = (h - m).max(0.0);
    let v = weights
        .as_slice()
        .iter()
        .zip(loss.as_slice())
        .map(|(w, l)| w * (l - h) * (l - h))
        .sum();
    let leader_change = round == 1 || leader_left(previous, &current);
    let record = RoundRecord {
        t: round,
        rate,
        weights,
        h,
        m,
        delta,
        v,
        leader_change,
        regime: Regime::NotApplicable,
        best_loss: current.best(),
    };
    Ok((record, current))
}

/// True iff some expert that was a leader before the round is not a
/// leader after it.
fn leader_left(previous: &CumulativeLoss, current: &CumulativeLoss) -> bool {
    (0..previous.experts()).any(|k| previous.is_leader(k) && !current.is_leader(k))
}

/// Number of rounds with a leader change, counting the first round.
pub fn leader_changes(stream: &[LossVector]) -> Result<usize> {
    let first = stream.first().ok_or(Error::EmptyStream)?;
    let mut cumulative = CumulativeLoss::zeros(first.experts())?;
    let mut count = 0;
    for (i, loss) in stream.iter().enumerate() {
        let next = cumulative.add(loss, i + 1)?;
        if i == 0 || leader_left(&cumulative, &next) {
            count += 1;
        }
        cumulative = next;
    }
    Ok(count)
}

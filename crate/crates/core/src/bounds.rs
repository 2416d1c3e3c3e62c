//! Closed-form regret guarantees and trace checking.
//!
//! The `[0,1]` forms are only applied to streams whose losses all lie in the
//! unit interval. Every other stream is checked with the scale-free forms
//! driven by `σ = max_t max_k (ℓ_{t,k} - μ_t)` and `N* = L* - Σ μ_t`, where
//! `μ_t` is the smallest loss of round `t`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hedge::{LossVector, Regime};
use crate::learners::{run, FlipFlopParams, LearnerKind};
use crate::trace::Trace;

/// Relative slack used when comparing an observed quantity to its bound.
pub const CHECK_TOLERANCE: f64 = 1e-9;

fn ln_k(experts: usize) -> Result<f64> {
    if experts < 2 {
        return Err(Error::TooFewExperts(experts));
    }
    Ok((experts as f64).ln())
}

fn check_rounds(rounds: usize) -> Result<f64> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("number of rounds must be >= 1".into()));
    }
    Ok(rounds as f64)
}

/// `ln K / η + η T / 8`.
pub fn hoeffding_bound(eta: f64, rounds: usize, experts: usize) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidRate(eta));
    }
    Ok(ln_k(experts)? / eta + eta * check_rounds(rounds)? / 8.0)
}

/// `2 sqrt(V ln K) + (4/3) ln K + 2`.
pub fn adahedge_variance_bound(variance: f64, experts: usize) -> Result<f64> {
    if variance.is_nan() || variance < 0.0 {
        return Err(Error::InvalidParameter(format!("variance must be >= 0, got {variance}")));
    }
    let lk = ln_k(experts)?;
    Ok(2.0 * (variance * lk).sqrt() + 4.0 / 3.0 * lk + 2.0)
}

fn loss_rate_term(best_loss: f64, rounds: usize, scale: f64) -> Result<f64> {
    let t = check_rounds(rounds)?;
    if !(0.0..=scale * t).contains(&best_loss) {
        return Err(Error::InvalidParameter(format!(
            "best loss {best_loss} outside [0, {}]",
            scale * t
        )));
    }
    Ok((best_loss * (scale * t - best_loss) / t).max(0.0))
}

/// `2 sqrt(L*(T - L*)/T ln K) + (16/3) ln K + 2`, for losses in `[0,1]`.
pub fn adahedge_regret_bound(best_loss: f64, rounds: usize, experts: usize) -> Result<f64> {
    let lk = ln_k(experts)?;
    let core = loss_rate_term(best_loss, rounds, 1.0)?;
    Ok(2.0 * (core * lk).sqrt() + 16.0 / 3.0 * lk + 2.0)
}

impl FlipFlopParams {
    /// Leading factor of the FTL-relative bound, `φα/(φ-1) + 2α + 1`.
    pub fn ftl_factor(&self) -> f64 {
        self.phi * self.alpha / (self.phi - 1.0) + 2.0 * self.alpha + 1.0
    }

    /// Additive constant of the FTL-relative bound, `αφ/(φ-1) + 2α`.
    pub fn ftl_constant(&self) -> f64 {
        self.alpha * self.phi / (self.phi - 1.0) + 2.0 * self.alpha
    }

    /// `c₁ = φ/(φ-1) + φ/α + 2`.
    pub fn c1(&self) -> f64 {
        self.phi / (self.phi - 1.0) + self.phi / self.alpha + 2.0
    }

    /// `c₂ = φ/α`.
    pub fn c2(&self) -> f64 {
        self.phi / self.alpha
    }
}

/// The two simultaneous FlipFlop bounds for losses in `[0,1]`: relative to
/// the FTL regret, and relative to the best expert's loss rate.
pub fn flipflop_bounds(
    ftl_regret: f64,
    best_loss: f64,
    rounds: usize,
    experts: usize,
    params: FlipFlopParams,
) -> Result<(f64, f64)> {
    params.validate()?;
    flipflop_bounds_scaled(ftl_regret, best_loss, rounds, experts, params, 1.0)
}

fn flipflop_bounds_scaled(
    ftl_regret: f64,
    best_loss: f64,
    rounds: usize,
    experts: usize,
    params: FlipFlopParams,
    scale: f64,
) -> Result<(f64, f64)> {
    let lk = ln_k(experts)?;
    let core = loss_rate_term(best_loss, rounds, scale)?;
    let (c1, c2) = (params.c1(), params.c2());
    let ftl = params.ftl_factor() * ftl_regret + scale * params.ftl_constant();
    let worst = c1 * (core * lk).sqrt()
        + scale * (c1 * (c1 + 2.0 / 3.0) * lk + c1 * (c2 * lk).sqrt() + c1 + c2);
    Ok((ftl, worst))
}

/// The `α` at which the two leading factors coincide for a given `φ`.
pub fn equalizing_alpha(phi: f64) -> f64 {
    let disc = 12.0 * phi.powi(3) - 16.0 * phi * phi + 4.0 * phi + 1.0;
    (2.0 * phi - 1.0 + disc.sqrt()) / (6.0 * phi - 4.0)
}

/// Minimizes the common leading factor over `φ ∈ (1, 10]` by golden-section
/// search, returning `(φ, α(φ))`.
pub fn optimal_flipflop_params() -> FlipFlopParams {
    let factor = |phi: f64| {
        FlipFlopParams {
            phi,
            alpha: equalizing_alpha(phi),
        }
        .ftl_factor()
    };
    let inv_golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1.0 + 1e-6, 10.0);
    let mut x1 = hi - inv_golden * (hi - lo);
    let mut x2 = lo + inv_golden * (hi - lo);
    let (mut f1, mut f2) = (factor(x1), factor(x2));
    while hi - lo > 1e-9 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_golden * (hi - lo);
            f1 = factor(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_golden * (hi - lo);
            f2 = factor(x2);
        }
    }
    let phi = 0.5 * (lo + hi);
    FlipFlopParams {
        phi,
        alpha: equalizing_alpha(phi),
    }
}

/// Range statistics of a loss stream used by the scale-free bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossScale {
    /// `σ`, the largest within-round spread.
    pub sigma: f64,
    /// `Σ_t μ_t`.
    pub shift_total: f64,
    pub rounds: usize,
    pub experts: usize,
    /// Whether every loss lies in `[0,1]`.
    pub unit_interval: bool,
}

impl LossScale {
    pub fn from_stream(stream: &[LossVector]) -> Result<Self> {
        let first = stream.first().ok_or(Error::EmptyStream)?;
        let mut scale = LossScale {
            sigma: 0.0,
            shift_total: 0.0,
            rounds: stream.len(),
            experts: first.experts(),
            unit_interval: true,
        };
        for loss in stream {
            let (lo, hi) = (loss.min(), loss.max());
            scale.sigma = scale.sigma.max(hi - lo);
            scale.shift_total += lo;
            scale.unit_interval &= lo >= 0.0 && hi <= 1.0;
        }
        Ok(scale)
    }

    /// `N* = L* - Σ μ_t`, clamped into `[0, σT]`.
    pub fn translated_best(&self, best_loss: f64) -> f64 {
        (best_loss - self.shift_total).clamp(0.0, self.sigma * self.rounds as f64)
    }
}

/// Inputs a bound was evaluated at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BoundInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leader_changes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub translated_best: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ftl_regret: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: &'static str,
    pub value: f64,
    pub inputs: BoundInputs,
    /// Set when `σ = 0`: every loss-rate term vanishes.
    pub degenerate_scale: bool,
}

/// Scale-free bounds for AdaHedge (one) and FlipFlop (one, or two when the
/// FTL regret on the same stream is supplied). Other kinds get none.
pub fn unnormalized_bounds(
    trace: &Trace,
    scale: &LossScale,
    kind: &LearnerKind,
    ftl_regret: Option<f64>,
) -> Result<Vec<BoundReport>> {
    let t = scale.rounds;
    let k = scale.experts;
    let sigma = scale.sigma;
    let n_star = scale.translated_best(trace.best_loss);
    let mut inputs = BoundInputs {
        best_loss: Some(trace.best_loss),
        rounds: Some(t),
        experts: Some(k),
        sigma: Some(sigma),
        translated_best: Some(n_star),
        ..BoundInputs::default()
    };
    let degenerate_scale = sigma == 0.0;
    let mut reports = Vec::new();
    match kind {
        LearnerKind::AdaHedge => {
            let lk = ln_k(k)?;
            let core = loss_rate_term(n_star, t, sigma)?;
            reports.push(BoundReport {
                name: "adahedge_scaled_loss_bound",
                value: 2.0 * (core * lk).sqrt() + sigma * (16.0 / 3.0 * lk + 2.0),
                inputs,
                degenerate_scale,
            });
        }
        LearnerKind::FlipFlop(params) => {
            inputs.phi = Some(params.phi);
            inputs.alpha = Some(params.alpha);
            inputs.ftl_regret = ftl_regret;
            let (ftl, worst) = flipflop_bounds_scaled(ftl_regret.unwrap_or(0.0), n_star, t, k, *params, sigma)?;
            if ftl_regret.is_some() {
                reports.push(BoundReport {
                    name: "flipflop_scaled_ftl_bound",
                    value: ftl,
                    inputs,
                    degenerate_scale,
                });
            }
            reports.push(BoundReport {
                name: "flipflop_scaled_loss_bound",
                value: worst,
                inputs,
                degenerate_scale,
            });
        }
        _ => {}
    }
    Ok(reports)
}

/// One evaluated inequality `observed <= bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub observed: f64,
    pub bound: f64,
    pub satisfied: bool,
}

impl BoundCheck {
    pub fn new(name: &'static str, observed: f64, bound: f64) -> Self {
        let slack = CHECK_TOLERANCE * bound.abs().max(observed.abs()).max(1.0);
        BoundCheck {
            name,
            observed,
            bound,
            satisfied: observed <= bound + slack,
        }
    }

    /// A strict inequality `observed < bound`, without slack.
    pub fn strict(name: &'static str, observed: f64, bound: f64) -> Self {
        BoundCheck {
            name,
            observed,
            bound,
            satisfied: observed < bound,
        }
    }
}

/// `Δ² <= V ln K + (1 + (2/3) ln K) Δ`.
fn gap_quadratic(name: &'static str, gap: f64, variance: f64, lk: f64) -> BoundCheck {
    BoundCheck::new(name, gap * gap, variance * lk + (1.0 + 2.0 / 3.0 * lk) * gap)
}

/// Evaluates every guarantee that applies to `kind` on a trace produced from
/// `stream`. Violations are reported through `satisfied`, not as errors.
pub fn check_trace(trace: &Trace, kind: &LearnerKind, stream: &[LossVector]) -> Result<Vec<BoundCheck>> {
    let scale = LossScale::from_stream(stream)?;
    let k = scale.experts;
    let t = scale.rounds;
    let lk = ln_k(k)?;
    let ftl_regret = match kind {
        LearnerKind::FlipFlop(_) => Some(run(LearnerKind::Ftl, stream)?.regret),
        _ => None,
    };

    let mut checks: Vec<BoundCheck> = unnormalized_bounds(trace, &scale, kind, ftl_regret)?
        .into_iter()
        .map(|report| BoundCheck::new(report.name, trace.regret, report.value))
        .collect();

    if !scale.unit_interval {
        return Ok(checks);
    }

    let regret = trace.regret;
    match kind {
        LearnerKind::Ftl => {
            checks.push(BoundCheck::new("ftl_regret_equals_gap", (regret - trace.gap).abs(), 0.0));
            checks.push(BoundCheck::new(
                "ftl_regret_le_leader_changes",
                regret,
                trace.leader_changes as f64,
            ));
        }
        LearnerKind::FixedHedge { eta } => {
            checks.push(BoundCheck::new("hedge_hoeffding_bound", regret, hoeffding_bound(*eta, t, k)?));
        }
        LearnerKind::SafeHedge { horizon } => {
            if *horizon == t {
                let eta = crate::learners::safe_rate(k, *horizon);
                checks.push(BoundCheck::new("hedge_hoeffding_bound", regret, hoeffding_bound(eta, t, k)?));
            }
        }
        LearnerKind::AdaHedge => {
            let max_rate_increase = trace
                .records
                .windows(2)
                .map(|w| w[1].rate.value() - w[0].rate.value())
                .filter(|d| !d.is_nan())
                .fold(0.0, f64::max);
            checks.push(BoundCheck::new("adahedge_rate_nonincreasing", max_rate_increase, 0.0));
            checks.push(BoundCheck::new("adahedge_regret_le_twice_gap", regret, 2.0 * trace.gap));
            checks.push(gap_quadratic("adahedge_gap_quadratic", trace.gap, trace.variance, lk));
            checks.push(BoundCheck::new(
                "adahedge_variance_bound",
                regret,
                adahedge_variance_bound(trace.variance, k)?,
            ));
            checks.push(BoundCheck::new(
                "adahedge_loss_bound",
                regret,
                adahedge_regret_bound(trace.best_loss, t, k)?,
            ));
        }
        LearnerKind::FlipFlop(params) => {
            let flip = trace.regime_totals(Regime::Flip);
            let flop = trace.regime_totals(Regime::Flop);
            checks.push(BoundCheck::new(
                "flipflop_regret_vs_flip_gap",
                regret,
                params.ftl_factor() * flip.gap + params.ftl_constant(),
            ));
            checks.push(BoundCheck::new(
                "flipflop_regret_vs_flop_gap",
                regret,
                params.c1() * flop.gap + params.c2(),
            ));
            checks.push(gap_quadratic("flipflop_flop_gap_quadratic", flop.gap, flop.variance, lk));
            let (flop_margin, flip_margin) = regime_sandwich_margins(trace, *params);
            checks.push(BoundCheck::strict("flipflop_flop_gap_sandwich", flop_margin, 0.0));
            checks.push(BoundCheck::strict("flipflop_flip_gap_sandwich", flip_margin, 0.0));
            let (ftl, worst) = flipflop_bounds(ftl_regret.unwrap_or(0.0), trace.best_loss, t, k, *params)?;
            checks.push(BoundCheck::new("flipflop_ftl_bound", regret, ftl));
            checks.push(BoundCheck::new("flipflop_loss_bound", regret, worst));
        }
    }
    Ok(checks)
}

/// Largest values over all rounds of `Δ̲ - (αΔ̄ + α)` and
/// `Δ̄ - ((φ/α)Δ̲ + φ/α)`; both must stay negative.
pub fn regime_sandwich_margins(trace: &Trace, params: FlipFlopParams) -> (f64, f64) {
    let ratio = params.phi / params.alpha;
    let (mut flip, mut flop) = (0.0, 0.0);
    let (mut flop_margin, mut flip_margin) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for r in &trace.records {
        match r.regime {
            Regime::Flop => flop += r.delta,
            _ => flip += r.delta,
        }
        flop_margin = flop_margin.max(flop - (params.alpha * flip + params.alpha));
        flip_margin = flip_margin.max(flip - (ratio * flop + ratio));
    }
    (flop_margin, flip_margin)
}

//! Trace CSV and JSON summary formats.
//!
//! The trace CSV has the header `t,eta,h,m,delta,v,regret,leader_change,regime`
//! and one row per round. `eta` is written as `inf` for Follow-the-Leader
//! rounds, `leader_change` as `0`/`1`, and `regret` is the cumulative regret
//! after the round. Floats use the shortest decimal form that parses back
//! to the same `f64`, so summing the columns reproduces the summary exactly.

use std::io::{BufRead, Write};

use flipflop::{BoundCheck, Error, LearnerKind, Regime, Trace};
use serde::{Deserialize, Serialize, Serializer};

pub const TRACE_HEADER: &str = "t,eta,h,m,delta,v,regret,leader_change,regime";

/// One parsed trace row.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    pub eta: f64,
    pub h: f64,
    pub m: f64,
    pub delta: f64,
    pub v: f64,
    pub regret: f64,
    pub leader_change: bool,
    pub regime: Regime,
}

fn parse_rate(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        _ => s.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

pub fn write_trace<W: Write>(mut out: W, trace: &Trace) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for (r, regret) in trace.records.iter().zip(trace.regret_path()) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t,
            r.rate,
            r.h,
            r.m,
            r.delta,
            r.v,
            regret,
            u8::from(r.leader_change),
            r.regime
        )?;
    }
    out.flush()
}

pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<TraceRow>, Error> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim_end() != TRACE_HEADER {
        return Err(Error::Csv {
            row: 1,
            reason: format!("expected header {TRACE_HEADER:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let line = line?;
        let bad = |what: &str| Error::Csv {
            row,
            reason: format!("invalid {what}"),
        };
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Csv {
                row,
                reason: format!("expected 9 columns, got {}", fields.len()),
            });
        }
        let num = |idx: usize, what: &str| {
            fields[idx]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(what))
        };
        rows.push(TraceRow {
            t: fields[0].parse().map_err(|_| bad("t"))?,
            eta: parse_rate(fields[1]).ok_or_else(|| bad("eta"))?,
            h: num(2, "h")?,
            m: num(3, "m")?,
            delta: num(4, "delta")?,
            v: num(5, "v")?,
            regret: num(6, "regret")?,
            leader_change: match fields[7] {
                "1" => true,
                "0" => false,
                _ => return Err(bad("leader_change")),
            },
            regime: Regime::parse(fields[8]).ok_or_else(|| bad("regime"))?,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyStream);
    }
    Ok(rows)
}

fn serialize_rate<S: Serializer>(eta: &f64, s: S) -> Result<S::Ok, S::Error> {
    if eta.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*eta)
    }
}

/// Aggregates of one run, written as JSON next to the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: String,
    pub rounds: usize,
    #[serde(rename = "H")]
    pub hedge_loss: f64,
    #[serde(rename = "M")]
    pub mix_loss: f64,
    #[serde(rename = "Delta")]
    pub gap: f64,
    #[serde(rename = "V")]
    pub variance: f64,
    #[serde(rename = "Lstar")]
    pub best_loss: f64,
    #[serde(rename = "C")]
    pub leader_changes: usize,
    pub regret: f64,
    #[serde(serialize_with = "serialize_rate", skip_deserializing)]
    pub final_eta: f64,
    #[serde(skip_deserializing)]
    pub checks: Vec<BoundCheck>,
}

impl Summary {
    pub fn new(kind: &LearnerKind, trace: &Trace, checks: Vec<BoundCheck>) -> Self {
        Summary {
            algorithm: kind.to_string(),
            rounds: trace.rounds(),
            hedge_loss: trace.hedge_loss,
            mix_loss: trace.mix_loss,
            gap: trace.gap,
            variance: trace.variance,
            best_loss: trace.best_loss,
            leader_changes: trace.leader_changes,
            regret: trace.regret,
            final_eta: trace.records.last().map_or(f64::INFINITY, |r| r.rate.value()),
            checks,
        }
    }

    /// Recomputes the aggregates from trace rows. `Lstar` is recovered as
    /// `H - regret` and can differ from the original by one rounding.
    pub fn from_rows(algorithm: &str, rows: &[TraceRow]) -> Self {
        let mut s = Summary {
            algorithm: algorithm.to_owned(),
            rounds: rows.len(),
            hedge_loss: 0.0,
            mix_loss: 0.0,
            gap: 0.0,
            variance: 0.0,
            best_loss: 0.0,
            leader_changes: 0,
            regret: 0.0,
            final_eta: f64::INFINITY,
            checks: Vec::new(),
        };
        for r in rows {
            s.hedge_loss += r.h;
            s.mix_loss += r.m;
            s.gap += r.delta;
            s.variance += r.v;
            s.leader_changes += usize::from(r.leader_change);
            s.regret = r.regret;
            s.final_eta = r.eta;
        }
        s.best_loss = s.hedge_loss - s.regret;
        s
    }

    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }
}

/// Inequalities that a trace must satisfy on its own, whatever the loss
/// range. Returns one message per violation.
pub fn verify_rows(rows: &[TraceRow], kind: &LearnerKind) -> Vec<String> {
    let mut violations = Vec::new();
    let mut gap = 0.0;
    let (mut flip, mut flop) = (0.0, 0.0);
    let mut prev: Option<&TraceRow> = None;
    for (i, r) in rows.iter().enumerate() {
        let mut fail = |what: String| violations.push(format!("round {}: {what}", r.t));
        if r.t != i + 1 {
            fail(format!("t = {} out of sequence", r.t));
        }
        if r.eta <= 0.0 {
            fail(format!("eta > 0 violated: eta = {}", r.eta));
        }
        if r.delta < 0.0 {
            fail(format!("delta >= 0 violated: delta = {}", r.delta));
        }
        if r.v < 0.0 {
            fail(format!("v >= 0 violated: v = {}", r.v));
        }
        let clipped = (r.h - r.m).max(0.0);
        if (r.delta - clipped).abs() > 1e-9 * clipped.abs().max(1.0) {
            fail(format!("delta = max(0, h - m) violated: {} vs {clipped}", r.delta));
        }
        gap += r.delta;
        match kind {
            LearnerKind::Ftl => {
                if !r.eta.is_infinite() {
                    fail(format!("eta = inf violated: eta = {}", r.eta));
                }
                if (r.regret - gap).abs() > 1e-9 * gap.abs().max(1.0) {
                    fail(format!("regret = Delta violated: {} vs {gap}", r.regret));
                }
            }
            LearnerKind::FixedHedge { .. } | LearnerKind::SafeHedge { .. } => {
                if let Some(p) = prev {
                    if p.eta != r.eta {
                        fail(format!("constant eta violated: {} then {}", p.eta, r.eta));
                    }
                }
            }
            LearnerKind::AdaHedge => {
                if let Some(p) = prev {
                    if r.eta > p.eta {
                        fail(format!("eta nonincreasing violated: {} then {}", p.eta, r.eta));
                    }
                }
                if r.regret > 2.0 * gap + 1e-9 * gap.max(1.0) {
                    fail(format!("regret <= 2 Delta violated: {} > {}", r.regret, 2.0 * gap));
                }
            }
            LearnerKind::FlipFlop(params) => {
                if let Some(p) = prev {
                    let expected = match p.regime {
                        Regime::Flip if flip > params.phi / params.alpha * flop => Regime::Flop,
                        Regime::Flop if flop > params.alpha * flip => Regime::Flip,
                        other => other,
                    };
                    if r.regime != expected {
                        fail(format!("regime switch rule violated: expected {expected}, got {}", r.regime));
                    }
                } else if r.regime != Regime::Flip {
                    fail(format!("first regime = flip violated: got {}", r.regime));
                }
                match r.regime {
                    Regime::Flip => {
                        if !r.eta.is_infinite() {
                            fail(format!("flip eta = inf violated: eta = {}", r.eta));
                        }
                        flip += r.delta;
                    }
                    Regime::Flop => flop += r.delta,
                    Regime::NotApplicable => fail("regime in {flip, flop} violated".to_owned()),
                }
            }
        }
        prev = Some(r);
    }
    violations
}

//! Deterministic two-expert loss streams and CSV loss files.
//!
//! Each experiment starts from a hand-crafted first row and then appends
//! whichever of `(1,0)` and `(0,1)` brings `L_{t,1} - L_{t,2}` closer to a
//! target `f(t)`, evaluated at the index of the round being appended.
//! Equidistant candidates resolve to `(1,0)`.
//!
//! The CSV format has no header, one row per round and one column per
//! expert. Values are written in the shortest decimal form that parses back
//! to the same `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::hedge::LossVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    /// `f(t) = 0` from `(1/2, 0)`: the leader flips every round.
    FtlWorstCase,
    /// `f(t) = 3/2` from `(1, 0)`: the leader never changes after round 1.
    FtlBestCase,
    /// `f(t) = t^0.4`: separation too slow for AdaHedge to concentrate.
    SlowSeparation,
    /// `f(t) = t^0.6`: separation fast enough for AdaHedge to concentrate.
    FastSeparation,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::FtlWorstCase,
        Experiment::FtlBestCase,
        Experiment::SlowSeparation,
        Experiment::FastSeparation,
    ];

    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            1 => Ok(Experiment::FtlWorstCase),
            2 => Ok(Experiment::FtlBestCase),
            3 => Ok(Experiment::SlowSeparation),
            4 => Ok(Experiment::FastSeparation),
            _ => Err(Error::InvalidParameter(format!(
                "experiment must be one of 1, 2, 3, 4; got {index}"
            ))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Experiment::FtlWorstCase => 1,
            Experiment::FtlBestCase => 2,
            Experiment::SlowSeparation => 3,
            Experiment::FastSeparation => 4,
        }
    }

    pub fn target(self, t: usize) -> f64 {
        match self {
            Experiment::FtlWorstCase => 0.0,
            Experiment::FtlBestCase => 1.5,
            Experiment::SlowSeparation => (t as f64).powf(0.4),
            Experiment::FastSeparation => (t as f64).powf(0.6),
        }
    }

    pub fn first_row(self) -> [f64; 2] {
        match self {
            Experiment::FtlWorstCase => [0.5, 0.0],
            _ => [1.0, 0.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub rounds: usize,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment, rounds: usize) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidParameter("number of rounds must be >= 1".into()));
        }
        Ok(ExperimentSpec { experiment, rounds })
    }
}

/// Generates the experiment's loss stream.
pub fn generate(spec: ExperimentSpec) -> Vec<LossVector> {
    let row = |r: [f64; 2]| LossVector::new(r.to_vec()).expect("two finite entries");
    let first = spec.experiment.first_row();
    let mut diff = first[0] - first[1];
    let mut stream = Vec::with_capacity(spec.rounds);
    stream.push(row(first));
    for t in 2..=spec.rounds {
        let target = spec.experiment.target(t);
        let up = (diff + 1.0 - target).abs();
        let down = (diff - 1.0 - target).abs();
        if up <= down {
            diff += 1.0;
            stream.push(row([1.0, 0.0]));
        } else {
            diff -= 1.0;
            stream.push(row([0.0, 1.0]));
        }
    }
    stream
}

/// Parses a loss CSV. Row numbers in errors are 1-based.
pub fn read_losses<R: BufRead>(reader: R) -> Result<Vec<LossVector>> {
    let mut stream: Vec<LossVector> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let row = i + 1;
        let line = line?;
        let csv_err = |reason: String| Error::Csv { row, reason };
        let values = line
            .trim_end_matches('\r')
            .split(',')
            .map(|field| {
                let field = field.trim();
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(csv_err(format!("not a finite number: {field:?}"))),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() < 2 {
            return Err(csv_err(format!("expected at least 2 columns, got {}", values.len())));
        }
        if let Some(first) = stream.first() {
            if values.len() != first.experts() {
                return Err(csv_err(format!(
                    "expected {} columns, got {}",
                    first.experts(),
                    values.len()
                )));
            }
        }
        stream.push(LossVector::new(values)?);
    }
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    Ok(stream)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<LossVector>> {
    read_losses(BufReader::new(File::open(path)?))
}

pub fn write_losses<W: Write>(mut writer: W, stream: &[LossVector]) -> Result<()> {
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    for loss in stream {
        let mut first = true;
        for v in loss.as_slice() {
            if !first {
                writer.write_all(b",")?;
            }
            write!(writer, "{v}")?;
            first = false;
        }
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_csv(stream: &[LossVector], path: impl AsRef<Path>) -> Result<()> {
    write_losses(BufWriter::new(File::create(path)?), stream)
}

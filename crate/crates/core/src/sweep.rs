//! Parameter-grid evaluation of the generalized reduction criterion.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{evaluate, ppt_check, realignment_check, reduction_check, CriterionVerdict, ReductionParams};
use crate::error::{Error, Result};
use crate::gptops::GptOpSet;
use crate::matlin::DensityState;
use crate::states::{horodecki_3x3, werner};

/// Default grid spacing on both axes.
pub const DEFAULT_STEP: f64 = 0.05;
/// Bracket width at which [`find_threshold`] stops.
pub const THRESHOLD_WIDTH: f64 = 1e-6;

pub const CSV_HEADER: [&str; 7] = ["family_param", "a", "b", "yset", "statistic", "bound", "violation"];

/// Inclusive axis `start, start + step, ...`, with the last point clamped to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let axis = Self { start, stop, step };
        axis.validate()?;
        Ok(axis)
    }

    pub fn single(value: f64) -> Self {
        Self {
            start: value,
            stop: value,
            step: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::ParamOutOfRange("axis bounds must be finite".into()));
        }
        if self.step <= 0.0 {
            return Err(Error::ParamOutOfRange(format!(
                "axis step must be positive, got {}",
                self.step
            )));
        }
        if self.start > self.stop {
            return Err(Error::ParamOutOfRange(format!(
                "axis start {} exceeds stop {}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        // relative slack so that e.g. 2.0 / 0.05 does not produce an extra point
        let intervals = ((self.stop - self.start) / self.step * (1.0 - 1e-12)).ceil() as usize;
        (0..=intervals)
            .map(|k| (self.start + k as f64 * self.step).min(self.stop))
            .collect()
    }
}

/// State family swept along the parameter axis.
#[derive(Debug, Clone)]
pub enum Family {
    /// Werner states on `d x d`; the axis parameter is `f`.
    Werner { d: usize },
    /// Horodecki 3x3 bound entangled state; the axis parameter is `c`.
    Horodecki,
    /// A fixed state (e.g. loaded from a file). The parameter axis is ignored
    /// and records carry `family_param = 0`.
    Fixed(Box<DensityState>),
}

impl Family {
    pub fn tag(&self) -> String {
        match self {
            Family::Werner { d } => format!("werner-{d}"),
            Family::Horodecki => "horodecki".into(),
            Family::Fixed(_) => "file".into(),
        }
    }

    pub fn state_at(&self, param: f64) -> Result<DensityState> {
        match self {
            Family::Werner { d } => Ok(werner(*d, param)?.state),
            Family::Horodecki => Ok(horodecki_3x3(param)?.state),
            Family::Fixed(s) => Ok((**s).clone()),
        }
    }

    fn check_axis(&self, axis: &Axis) -> Result<()> {
        match self {
            Family::Werner { .. } if axis.start < -1.0 || axis.stop > 1.0 => Err(Error::ParamOutOfRange(format!(
                "werner f axis [{}, {}] leaves [-1, 1]",
                axis.start, axis.stop
            ))),
            Family::Horodecki if axis.start <= 0.0 || axis.stop >= 1.0 => Err(Error::ParamOutOfRange(format!(
                "horodecki c axis [{}, {}] leaves (0, 1)",
                axis.start, axis.stop
            ))),
            _ => Ok(()),
        }
    }

    fn param_points(&self, axis: &Axis) -> Vec<f64> {
        match self {
            Family::Fixed(_) => vec![0.0],
            _ => axis.points(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub family: Family,
    pub a: f64,
    pub b_axis: Axis,
    pub param_axis: Axis,
    pub yset: GptOpSet,
}

impl GridSpec {
    /// Default 0.05 grid: `b` over `[-1, 1]`, parameter over the family's
    /// natural range (`f` in `[-1, 1]`, `c` in `[0.05, 0.95]`).
    pub fn default_for(family: Family, a: f64) -> Self {
        let param_axis = match family {
            Family::Horodecki => Axis {
                start: 0.05,
                stop: 0.95,
                step: DEFAULT_STEP,
            },
            _ => Axis {
                start: -1.0,
                stop: 1.0,
                step: DEFAULT_STEP,
            },
        };
        Self {
            family,
            a,
            b_axis: Axis {
                start: -1.0,
                stop: 1.0,
                step: DEFAULT_STEP,
            },
            param_axis,
            yset: GptOpSet::REALIGN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(Error::ParamOutOfRange(format!("a must be finite, got {}", self.a)));
        }
        self.b_axis.validate()?;
        self.param_axis.validate()?;
        self.family.check_axis(&self.param_axis)
    }
}

/// One grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub family_param: f64,
    pub a: f64,
    pub b: f64,
    pub yset: String,
    pub statistic: f64,
    pub bound: f64,
    pub violation: f64,
}

impl SweepRecord {
    fn from_verdict(family_param: f64, a: f64, b: f64, v: &CriterionVerdict) -> Self {
        Self {
            family_param,
            a,
            b,
            yset: v.yset.unwrap_or_default().to_string(),
            statistic: v.statistic,
            bound: v.bound,
            violation: v.violation,
        }
    }
}

/// Evaluates every grid point, param-major then `b`.
pub fn run_sweep(spec: &GridSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let params = spec.family.param_points(&spec.param_axis);
    let bs = spec.b_axis.points();
    let rows: Vec<Vec<SweepRecord>> = params
        .par_iter()
        .map(|&param| {
            let state = spec.family.state_at(param)?;
            bs.iter()
                .map(|&b| {
                    let v = evaluate(&state, ReductionParams::real(spec.a, b), spec.yset)?;
                    Ok(SweepRecord::from_verdict(param, spec.a, b, &v))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &GridSpec, threads: usize) -> Result<Vec<SweepRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::ParamOutOfRange(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSummary {
    pub points: usize,
    pub max_violation: f64,
    /// `(family_param, b)` of the first record attaining the maximum.
    pub argmax: (f64, f64),
}

pub fn summarize(records: &[SweepRecord]) -> Option<SweepSummary> {
    let best = records.iter().fold(None::<&SweepRecord>, |best, r| match best {
        Some(b) if b.violation >= r.violation => Some(b),
        _ => Some(r),
    })?;
    Some(SweepSummary {
        points: records.len(),
        max_violation: best.violation,
        argmax: (best.family_param, best.b),
    })
}

/// Which test decides "entangled" during threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detector {
    Grc { a: f64, b: f64, yset: GptOpSet },
    Ppt,
    Reduction,
    Realignment,
}

impl Detector {
    pub fn detects(&self, state: &DensityState) -> Result<bool> {
        let verdict = match *self {
            Detector::Grc { a, b, yset } => evaluate(state, ReductionParams::real(a, b), yset)?,
            Detector::Ppt => ppt_check(state)?,
            Detector::Reduction => reduction_check(state)?,
            Detector::Realignment => realignment_check(state)?,
        };
        Ok(verdict.entangled)
    }
}

/// Bisects `[lo, hi]` for the family parameter at which the detector's flag
/// flips, until the bracket is at most [`THRESHOLD_WIDTH`] wide.
pub fn find_threshold(family: &Family, detector: &Detector, lo: f64, hi: f64) -> Result<f64> {
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::ParamOutOfRange(format!(
            "threshold bracket [{lo}, {hi}] is empty"
        )));
    }
    let flag = |x: f64| -> Result<bool> { detector.detects(&family.state_at(x)?) };
    let (mut lo, mut hi) = (lo, hi);
    let flag_lo = flag(lo)?;
    if flag_lo == flag(hi)? {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > THRESHOLD_WIDTH {
        let mid = 0.5 * (lo + hi);
        if flag(mid)? == flag_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(records: &[SweepRecord], w: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in records {
        out.write_record([
            fmt_float(r.family_param),
            fmt_float(r.a),
            fmt_float(r.b),
            r.yset.clone(),
            fmt_float(r.statistic),
            fmt_float(r.bound),
            fmt_float(r.violation),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            location: "csv header".into(),
            message: format!("unexpected columns {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_json<W: Write>(records: &[SweepRecord], mut w: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    serde_json::to_writer_pretty(&mut w, records)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_json<R: Read>(r: R) -> Result<Vec<SweepRecord>> {
    Ok(serde_json::from_reader(r)?)
}

/// Writes `records` to `path`.
pub fn emit(records: &[SweepRecord], format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let file = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(records, file),
        OutputFormat::Json => write_json(records, file),
    }
}

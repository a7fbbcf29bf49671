//! Schedule JSON, CSV exports and result JSON.
//!
//! CSV files are comma separated with a header row. Writers that take a
//! configuration echo it first as a comment line `# config: {json}`; the
//! readers here skip lines starting with `#`.

use std::fs;
use std::io::{self, Read, Write};

use conwalk_core::oracle::ExactDistribution;
use conwalk_core::walk::{Direction, Path, TurnEvent};
use conwalk_core::zigzag::ZigzagPath;
use conwalk_core::{Schedule, ScheduleKind};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{usage, Result};
use crate::verify::{EstimatorResult, TestReport};

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind")]
enum KindSpec {
    Constant {
        p: f64,
    },
    Critical {
        a: f64,
        n0: Option<u64>,
    },
    PowerDecay {
        c: Option<f64>,
        gamma: f64,
        n0: Option<u64>,
    },
    Periodic {
        values: Vec<f64>,
        n0: Option<u64>,
    },
    Explicit {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
struct ScheduleSpec {
    #[serde(flatten)]
    kind: KindSpec,
    prefix_p: Option<f64>,
}

/// Parses a schedule from JSON such as `{"kind":"Critical","a":1,"n0":2}`.
///
/// Kinds and fields: `Constant {p}`, `Critical {a, n0}`,
/// `PowerDecay {c, gamma, n0}`, `Periodic {values, n0}`, `Explicit {values}`,
/// each with an optional `prefix_p` (default 1) used before `n0`. Defaults:
/// `n0 = max(1, ceil(a))` for `Critical`, `c = 1` and `n0 = 1` for
/// `PowerDecay`, `n0 = 1` for `Periodic`.
pub fn parse_schedule(text: &str) -> Result<Schedule> {
    let spec: ScheduleSpec = serde_json::from_str(text)?;
    let kind = match spec.kind {
        KindSpec::Constant { p } => ScheduleKind::Constant { p },
        KindSpec::Critical { a, n0 } => ScheduleKind::Critical {
            a,
            n0: n0.unwrap_or_else(|| a.ceil().max(1.0) as u64),
        },
        KindSpec::PowerDecay { c, gamma, n0 } => ScheduleKind::PowerDecay {
            c: c.unwrap_or(1.0),
            gamma,
            n0: n0.unwrap_or(1),
        },
        KindSpec::Periodic { values, n0 } => ScheduleKind::Periodic {
            values,
            n0: n0.unwrap_or(1),
        },
        KindSpec::Explicit { values } => ScheduleKind::Explicit { values },
    };
    Ok(Schedule::new(kind, spec.prefix_p.unwrap_or(1.0))?)
}

/// Parses `text`, or the contents of the file `path` when `text` is `@path`.
pub fn load_schedule(text: &str) -> Result<Schedule> {
    match text.strip_prefix('@') {
        Some(path) => parse_schedule(&fs::read_to_string(path)?),
        None => parse_schedule(text),
    }
}

/// Fully resolved JSON form of a schedule; [`parse_schedule`] reads it back.
pub fn schedule_to_json(schedule: &Schedule) -> Value {
    let mut v = match schedule.kind() {
        ScheduleKind::Constant { p } => json!({"kind": "Constant", "p": p}),
        ScheduleKind::Critical { a, n0 } => json!({"kind": "Critical", "a": a, "n0": n0}),
        ScheduleKind::PowerDecay { c, gamma, n0 } => {
            json!({"kind": "PowerDecay", "c": c, "gamma": gamma, "n0": n0})
        }
        ScheduleKind::Periodic { values, n0 } => {
            json!({"kind": "Periodic", "values": values, "n0": n0})
        }
        ScheduleKind::Explicit { values } => json!({"kind": "Explicit", "values": values}),
    };
    v["prefix_p"] = json!(schedule.prefix_p());
    v
}

fn echo<W: Write>(w: &mut W, config: Option<&Value>) -> Result<()> {
    if let Some(config) = config {
        writeln!(w, "# config: {}", serde_json::to_string(config)?)?;
    }
    Ok(())
}

fn coord_headers(prefix: &str, d: usize) -> impl Iterator<Item = String> + '_ {
    (1..=d).map(move |j| format!("{prefix}_{j}"))
}

/// One row per update: `update_time, axis, sign, x_1..x_d`, where `x` is the
/// position `S_{t-1}` from which the new run starts and `axis` is 1-based.
pub fn write_path_csv<W: Write>(mut w: W, path: &Path, config: Option<&Value>) -> Result<()> {
    echo(&mut w, config)?;
    let d = path.dim();
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["update_time".to_string(), "axis".into(), "sign".into()];
    header.extend(coord_headers("x", d));
    out.write_record(&header)?;
    let mut pos = path.start.clone();
    for seg in path.segments() {
        let mut row = vec![
            seg.first_step.to_string(),
            (seg.direction.axis() + 1).to_string(),
            seg.direction.sign().to_string(),
        ];
        row.extend(pos.iter().map(i64::to_string));
        out.write_record(&row)?;
        pos[seg.direction.axis()] += seg.direction.sign() * seg.len as i64;
    }
    out.flush()?;
    Ok(())
}

/// Reads a path written by [`write_path_csv`] back, given its horizon.
///
/// Update times must increase strictly within `1..=horizon`, signs must be
/// `+-1`, and each recorded position must match the replayed walk.
pub fn read_path_csv<R: Read>(r: R, horizon: u64) -> Result<Path> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let d = reader
        .headers()?
        .len()
        .checked_sub(3)
        .filter(|&d| d >= 1)
        .ok_or_else(|| usage("path CSV needs at least 4 columns"))?;
    let mut events: Vec<TurnEvent> = Vec::new();
    let mut start: Option<Vec<i64>> = None;
    let mut pos = vec![0i64; d];
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| -> Result<i64> {
            record
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| usage(format!("bad integer in column {}", i + 1)))
        };
        let time = field(0)?;
        let last = events.last().map_or(0, |e| e.update_time);
        if time < 1 || time as u64 <= last || time as u64 > horizon {
            return Err(usage(format!(
                "update time {time} out of order or past {horizon}"
            )));
        }
        let axis = field(1)?;
        if axis < 1 || axis as usize > d {
            return Err(usage(format!("axis {axis} out of range")));
        }
        let sign = field(2)?;
        if sign != 1 && sign != -1 {
            return Err(usage(format!("sign {sign} is not +-1")));
        }
        let x = (0..d).map(|j| field(3 + j)).collect::<Result<Vec<i64>>>()?;
        match (&start, events.last()) {
            (None, _) => {
                pos.clone_from(&x);
                start = Some(x);
            }
            (Some(_), Some(prev)) => {
                let dir = prev.new_direction;
                pos[dir.axis()] += dir.sign() * (time as u64 - last) as i64;
                if pos != x {
                    return Err(usage(format!(
                        "position at update time {time} does not match the walk"
                    )));
                }
            }
            (Some(_), None) => unreachable!("start is set together with the first event"),
        }
        events.push(TurnEvent {
            update_time: time as u64,
            new_direction: Direction::new(axis as usize - 1, sign),
        });
    }
    Ok(Path {
        start: start.unwrap_or_else(|| vec![0; d]),
        events,
        horizon,
    })
}

/// Every position: `t, x_1..x_d`.
pub fn write_dense_csv<W: Write>(mut w: W, path: &Path, config: Option<&Value>) -> Result<()> {
    echo(&mut w, config)?;
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend(coord_headers("x", path.dim()));
    out.write_record(&header)?;
    for (t, pos) in path.dense().iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(pos.iter().map(i64::to_string));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Labelled intervals: `left, right, axis, sign`.
pub fn write_zigzag_csv<W: Write>(
    mut w: W,
    path: &ZigzagPath,
    config: Option<&Value>,
) -> Result<()> {
    echo(&mut w, config)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["left", "right", "axis", "sign"])?;
    for (left, right, label) in path.intervals().intervals() {
        out.write_record([
            left.to_string(),
            right.to_string(),
            (label.axis() + 1).to_string(),
            label.sign().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `Z` on a grid: `t, z_1..z_d`.
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    path: &ZigzagPath,
    times: &[f64],
    config: Option<&Value>,
) -> Result<()> {
    echo(&mut w, config)?;
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend(coord_headers("z", path.dim()));
    out.write_record(&header)?;
    for (t, z) in times.iter().zip(path.trajectory(times)?) {
        let mut row = vec![t.to_string()];
        row.extend(z.iter().map(f64::to_string));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Exact law: `x_1..x_d, axis, sign, prob` for every non-zero entry.
pub fn write_distribution_csv<W: Write>(
    mut w: W,
    dist: &ExactDistribution,
    config: Option<&Value>,
) -> Result<()> {
    echo(&mut w, config)?;
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = coord_headers("x", dist.dim()).collect();
    header.extend(["axis".to_string(), "sign".into(), "prob".into()]);
    out.write_record(&header)?;
    for (x, dir, p) in dist.entries() {
        let mut row: Vec<String> = x.iter().map(i64::to_string).collect();
        row.extend([
            (dir.axis() + 1).to_string(),
            dir.sign().to_string(),
            format!("{p:e}"),
        ]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Outcome label attached to every result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// The comparison held.
    Pass,
    /// The comparison failed.
    Fail,
    /// Reported without a pass/fail claim.
    Reported,
}

impl Verdict {
    /// `Pass` or `Fail`.
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Result JSON for a single estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    /// Operation name.
    pub op: String,
    /// Echo of the resolved configuration.
    pub config: Value,
    /// Point estimate.
    pub estimate: f64,
    /// Standard error.
    pub std_error: f64,
    /// Number of draws.
    pub n_samples: u64,
    /// 95% interval.
    pub ci95: (f64, f64),
    /// Master seed.
    pub seed: u64,
    /// Shard count.
    pub shards: u32,
    /// Reference value or bound, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// Outcome.
    pub verdict: Verdict,
}

impl ResultRecord {
    /// Wraps an estimator result.
    pub fn new(
        op: &str,
        config: Value,
        r: &EstimatorResult,
        bound: Option<f64>,
        verdict: Verdict,
    ) -> Self {
        Self {
            op: op.to_string(),
            config,
            estimate: r.estimate,
            std_error: r.std_error,
            n_samples: r.n_samples,
            ci95: r.ci95,
            seed: r.seed,
            shards: r.shards,
            bound,
            verdict,
        }
    }
}

/// Result JSON for a composite test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRecord {
    /// Operation name.
    pub op: String,
    /// The report, configuration included.
    #[serde(flatten)]
    pub report: TestReport,
    /// Outcome.
    pub verdict: Verdict,
}

impl ReportRecord {
    /// Wraps a report; the verdict is `Fail` when any check was rejected.
    pub fn new(op: &str, report: TestReport) -> Self {
        let verdict = Verdict::from_bool(!report.rejected);
        Self {
            op: op.to_string(),
            report,
            verdict,
        }
    }
}

/// Serializes `value` as pretty JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Opens `path` for writing, or stdout for `None` / `-`.
pub fn output(path: Option<&std::path::Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(Box::new(io::BufWriter::new(fs::File::create(p)?))),
        _ => Ok(Box::new(io::BufWriter::new(io::stdout().lock()))),
    }
}

//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification verdict fails, 2 on
//! usage or precondition errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conwalk_core::analytics::{self, Gap, LyapunovConfig, MomentMode};
use conwalk_core::oracle::exact_distribution;
use conwalk_core::rng;
use conwalk_core::walk::{simulate, simulate_events};
use conwalk_core::zigzag::{b_from_a, sample_zigzag};
use serde_json::{json, Value};

use crate::error::{usage, Result};
use crate::formats::{self, ReportRecord, ResultRecord, Verdict};
use crate::verify::{self, CriticalConfig, EndpointSampler, Normalization, Sharding};

#[derive(Debug, Parser)]
#[command(
    name = "conwalk",
    version,
    about = "Simulate and verify conservative lattice random walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of independent shards.
    #[arg(long, default_value_t = 1)]
    shards: u32,
    /// Output file (stdout when absent or `-`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sampler {
    Direct,
    Events,
}

impl From<Sampler> for EndpointSampler {
    fn from(s: Sampler) -> Self {
        match s {
            Sampler::Direct => EndpointSampler::Direct,
            Sampler::Events => EndpointSampler::Events,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path and write its updates (or every position with --dense).
    Simulate {
        /// Schedule as JSON, or @file.
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        d: usize,
        /// Number of steps.
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// One row per step instead of one per update.
        #[arg(long)]
        dense: bool,
        #[arg(long, value_enum, default_value_t = Sampler::Events)]
        sampler: Sampler,
        #[command(flatten)]
        common: Common,
    },
    /// Sample a zigzag path and write its intervals, or its trajectory with --grid.
    Zigzag {
        /// Turning constant `a` (the intensity is `b = (2d-1)a/(2d)`).
        #[arg(long)]
        a: f64,
        #[arg(long)]
        d: usize,
        /// Truncation time.
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        /// Final time `T` (at least 1).
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        /// Evaluate `Z` at this many evenly spaced times in `(epsilon, T]`.
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Classify a schedule and print the result as JSON.
    Classify {
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a closed-form quantity and print it as JSON.
    Moments(MomentArgs),
    /// Write the exact law of `(S_n, Y_n)` as CSV.
    Exact {
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment and print its result as JSON.
    Verify {
        #[command(subcommand)]
        experiment: Experiment,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MomentOp {
    /// `E xi^m` of the symmetrized geometric law (`--p`, `--m`).
    Sgeom,
    /// `E L_n^4` (`--p`, `--n`, `--mode`).
    Fourth,
    /// Exact minus asymptotic `E L_n^4` (`--p`, `--n`).
    Remainder,
    /// `prod_{k=i+1}^{j} (1 - p_k)` (`--schedule`, `--i`, `--j`).
    Correlation,
    /// Tail bound (`--p`, `--a`, `--d`).
    LdBound,
    /// Pass-once probabilities (`--p`, `--gap`; no gap means infinitely far).
    Gambler,
    /// Zigzag intensity `b` (`--a`, `--d`).
    B,
    /// Drift of the Lyapunov function (`--p`, `--a`, `--x`, `--y`, `--tail`).
    Drift,
    /// Smallest admissible shift (`--p`).
    Shift,
    /// Arithmetic-progression count (`--s`, `--s0`, `--big-m`).
    Arith,
    /// `1 - cos(alpha) - alpha^2/4` (`--alpha`).
    CosMargin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Asymptotic,
}

#[derive(Debug, Args)]
struct MomentArgs {
    #[arg(long, value_enum)]
    op: MomentOp,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    i: Option<u64>,
    #[arg(long)]
    j: Option<u64>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    gap: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<i64>,
    #[arg(long, default_value_t = LyapunovConfig::DEFAULT_TAIL)]
    tail: f64,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s0: Option<f64>,
    /// Progression length `M`.
    #[arg(long)]
    big_m: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Experiment {
    /// `P(|S_n| > a sqrt(n))` against the tail bound.
    Tail {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        samples: u64,
        #[command(flatten)]
        common: Common,
    },
    /// `Cov(Y_i, Y_j)` in one dimension against the product formula.
    Covariance {
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        i: u64,
        #[arg(long)]
        j: u64,
        #[arg(long)]
        samples: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Rescaled endpoints of the homogeneous walk against the normal law.
    Scaling {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        samples: u64,
        /// Normalize each coordinate to unit variance.
        #[arg(long)]
        per_coordinate: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Walk with `p_n = a/n` against the zigzag process.
    Critical {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        samples: u64,
        /// Draws per side in the two-sample tests (default min(samples, 10000)).
        #[arg(long)]
        ks_samples: Option<u64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Origin visits at several horizons.
    Recurrence {
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        d: usize,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        horizons: Vec<u64>,
        #[arg(long)]
        samples: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Pass-once events of the biased nearest-neighbour walk.
    Volkov {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        i: u64,
        #[arg(long)]
        j: u64,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        horizon: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// `E L_n^4` against the exact value.
    Moment4 {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        samples: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical endpoint law against the exact law, by total variation.
    Oracle {
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        samples: u64,
        #[arg(long, value_enum, default_value_t = Sampler::Events)]
        sampler: Sampler,
        /// Pass when the distance is below this.
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(Verdict::Fail) => 1,
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(usage("--d must be at least 1"));
    }
    Ok(())
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| usage(format!("--{flag} is required for this operation")))
}

fn write_json(out: Option<&PathBuf>, value: &impl serde::Serialize) -> Result<()> {
    formats::write_json(formats::output(out.map(PathBuf::as_path))?, value)
}

fn execute(command: Command) -> Result<Verdict> {
    match command {
        Command::Simulate {
            schedule,
            d,
            n,
            format,
            dense,
            sampler,
            common,
        } => {
            check_dim(d)?;
            let schedule = formats::load_schedule(&schedule)?;
            let mut rng = rng::stream(common.seed, 0, 0);
            let path = match sampler {
                Sampler::Direct => simulate(d, &schedule, n, &mut rng),
                Sampler::Events => simulate_events(d, &schedule, n, &mut rng),
            };
            let config = json!({
                "command": "simulate", "schedule": formats::schedule_to_json(&schedule),
                "d": d, "n": n, "seed": common.seed, "sampler": format!("{sampler:?}").to_lowercase(),
            });
            let out = formats::output(common.out.as_deref())?;
            match format {
                Format::Csv if dense => formats::write_dense_csv(out, &path, Some(&config))?,
                Format::Csv => formats::write_path_csv(out, &path, Some(&config))?,
                Format::Json => {
                    let events: Vec<Value> = path
                        .events
                        .iter()
                        .map(|e| {
                            json!({
                                "update_time": e.update_time,
                                "axis": e.new_direction.axis() + 1,
                                "sign": e.new_direction.sign(),
                            })
                        })
                        .collect();
                    let doc =
                        json!({"config": config, "events": events, "endpoint": path.endpoint()});
                    formats::write_json(out, &doc)?;
                }
            }
            Ok(Verdict::Reported)
        }
        Command::Zigzag {
            a,
            d,
            epsilon,
            horizon,
            grid,
            common,
        } => {
            check_dim(d)?;
            if !(a > 0.0) {
                return Err(usage("--a must be positive"));
            }
            let mut rng = rng::stream(common.seed, 0, 0);
            let path = sample_zigzag(a, d, epsilon, horizon, &mut rng)?;
            let config = json!({
                "command": "zigzag", "a": a, "b": b_from_a(a, d), "d": d,
                "epsilon": epsilon, "horizon": horizon, "grid": grid, "seed": common.seed,
            });
            let out = formats::output(common.out.as_deref())?;
            match grid {
                Some(k) => {
                    if k == 0 {
                        return Err(usage("--grid must be positive"));
                    }
                    let times: Vec<f64> = (1..=k)
                        .map(|i| {
                            if i == k {
                                horizon
                            } else {
                                epsilon + (horizon - epsilon) * i as f64 / k as f64
                            }
                        })
                        .collect();
                    formats::write_trajectory_csv(out, &path, &times, Some(&config))?;
                }
                None => formats::write_zigzag_csv(out, &path, Some(&config))?,
            }
            Ok(Verdict::Reported)
        }
        Command::Classify { schedule, d, out } => {
            check_dim(d)?;
            let schedule = formats::load_schedule(&schedule)?;
            let c = schedule.classify(d);
            let doc = json!({
                "config": {"command": "classify", "schedule": formats::schedule_to_json(&schedule), "d": d},
                "regime": c.regime.as_str(),
                "theorem_ref": c.theorem_ref,
                "checked_conditions": c.checked_conditions,
                "epsilon": c.epsilon,
            });
            write_json(out.as_ref(), &doc)?;
            Ok(Verdict::Reported)
        }
        Command::Moments(args) => moments(args),
        Command::Exact {
            schedule,
            d,
            n,
            out,
        } => {
            check_dim(d)?;
            let schedule = formats::load_schedule(&schedule)?;
            let dist = exact_distribution(d, &schedule, n)?;
            let config = json!({
                "command": "exact", "schedule": formats::schedule_to_json(&schedule),
                "d": d, "n": n, "error_bound": dist.error_bound(),
            });
            formats::write_distribution_csv(
                formats::output(out.as_deref())?,
                &dist,
                Some(&config),
            )?;
            Ok(Verdict::Reported)
        }
        Command::Verify { experiment } => run_experiment(experiment),
    }
}

fn moments(args: MomentArgs) -> Result<Verdict> {
    let op = args.op;
    let (config, value): (Value, Value) = match op {
        MomentOp::Sgeom => {
            let (p, m) = (need(args.p, "p")?, need(args.m, "m")?);
            (
                json!({"p": p, "m": m}),
                json!(analytics::sgeom_moment(p, m)?),
            )
        }
        MomentOp::Fourth => {
            let (p, n) = (need(args.p, "p")?, need(args.n, "n")?);
            let mode = match args.mode {
                Mode::Exact => MomentMode::Exact,
                Mode::Asymptotic => MomentMode::Asymptotic,
            };
            let mode_name = format!("{:?}", args.mode).to_lowercase();
            (
                json!({"p": p, "n": n, "mode": mode_name}),
                json!(analytics::fourth_moment_l(p, n, mode)?),
            )
        }
        MomentOp::Remainder => {
            let (p, n) = (need(args.p, "p")?, need(args.n, "n")?);
            (
                json!({"p": p, "n": n}),
                json!(analytics::fourth_moment_remainder(p, n)?),
            )
        }
        MomentOp::Correlation => {
            let s = formats::load_schedule(&need(args.schedule, "schedule")?)?;
            let (i, j) = (need(args.i, "i")?, need(args.j, "j")?);
            (
                json!({"schedule": formats::schedule_to_json(&s), "i": i, "j": j}),
                json!(analytics::correlation_e(&s, i, j)?),
            )
        }
        MomentOp::LdBound => {
            let (p, a, d) = (need(args.p, "p")?, need(args.a, "a")?, need(args.d, "d")?);
            (
                json!({"p": p, "a": a, "d": d}),
                json!(analytics::ld_bound(p, a, d)?),
            )
        }
        MomentOp::Gambler => {
            let p = need(args.p, "p")?;
            let gap = args.gap.map_or(Gap::Infinite, Gap::Finite);
            let (single, joint) = analytics::gambler_pass_once(p, gap)?;
            (
                json!({"p": p, "gap": args.gap}),
                json!({"single": single, "joint": joint}),
            )
        }
        MomentOp::B => {
            let (a, d) = (need(args.a, "a")?, need(args.d, "d")?);
            check_dim(d)?;
            (json!({"a": a, "d": d}), json!(b_from_a(a, d)))
        }
        MomentOp::Drift => {
            let (p, a) = (need(args.p, "p")?, need(args.a, "a")?);
            let (x, y) = (need(args.x, "x")?, need(args.y, "y")?);
            let cfg = LyapunovConfig::new(p, a, args.tail)?;
            let drift = analytics::lyapunov_drift(&cfg, [x, y])?;
            (
                json!({"p": p, "a": a, "x": x, "y": y, "tail": args.tail}),
                json!({
                    "drift": drift.value,
                    "remainder_bound": drift.remainder_bound,
                    "max_jump": drift.max_jump,
                    "certified_negative": drift.certified_negative(),
                }),
            )
        }
        MomentOp::Shift => {
            let p = need(args.p, "p")?;
            (json!({"p": p}), json!(analytics::admissible_shift(p)))
        }
        MomentOp::Arith => {
            let (s, s0, m) = (
                need(args.s, "s")?,
                need(args.s0, "s0")?,
                need(args.big_m, "big-m")?,
            );
            (
                json!({"s": s, "s0": s0, "big_m": m}),
                json!(analytics::count_arith_progression(s, s0, m)?),
            )
        }
        MomentOp::CosMargin => {
            let alpha = need(args.alpha, "alpha")?;
            (
                json!({"alpha": alpha}),
                json!(analytics::cos_gap_margin(alpha)),
            )
        }
    };
    let name = op
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let doc = json!({"op": name, "config": config, "value": value});
    write_json(args.out.as_ref(), &doc)?;
    Ok(Verdict::Reported)
}

fn run_experiment(experiment: Experiment) -> Result<Verdict> {
    match experiment {
        Experiment::Tail {
            d,
            p,
            n,
            a,
            samples,
            common,
        } => {
            let sh = Sharding::new(common.seed, common.shards);
            let check = verify::estimate_tail(d, p, n, a, samples, sh)?;
            let verdict = if check.asserted {
                Verdict::from_bool(check.holds)
            } else {
                Verdict::Reported
            };
            let config = json!({"d": d, "p": p, "n": n, "a": a, "samples": samples});
            let rec = ResultRecord::new("tail", config, &check.result, Some(check.bound), verdict);
            write_json(common.out.as_ref(), &rec)?;
            Ok(verdict)
        }
        Experiment::Covariance {
            schedule,
            i,
            j,
            samples,
            common,
        } => {
            let sh = Sharding::new(common.seed, common.shards);
            let s = formats::load_schedule(&schedule)?;
            let check = verify::estimate_covariance(&s, i, j, samples, sh)?;
            let verdict = Verdict::from_bool(check.result.within(check.expected, 4.0));
            let config = json!({"schedule": formats::schedule_to_json(&s), "i": i, "j": j, "samples": samples});
            let rec = ResultRecord::new(
                "covariance",
                config,
                &check.result,
                Some(check.expected),
                verdict,
            );
            write_json(common.out.as_ref(), &rec)?;
            Ok(verdict)
        }
        Experiment::Scaling {
            d,
            p,
            n,
            samples,
            per_coordinate,
            common,
        } => {
            let sh = Sharding::new(common.seed, common.shards);
            let norm = if per_coordinate {
                Normalization::PerCoordinate
            } else {
                Normalization::Total
            };
            let r = verify::scaling_limit_test(d, p, n, samples, sh, norm)?;
            let rec = ReportRecord::new("scaling", r.report);
            write_json(common.out.as_ref(), &rec)?;
            Ok(rec.verdict)
        }
        Experiment::Critical {
            d,
            a,
            n,
            samples,
            ks_samples,
            delta,
            common,
        } => {
            let sh = Sharding::new(common.seed, common.shards);
            let mut cfg = CriticalConfig::new(d, a, n, samples);
            cfg.delta = delta;
            if let Some(k) = ks_samples {
                cfg.ks_samples = k;
            }
            let r = verify::critical_limit_test(cfg, sh)?;
            let rec = ReportRecord::new("critical", r.report);
            write_json(common.out.as_ref(), &rec)?;
            Ok(rec.verdict)
        }
        Experiment::Recurrence {
            schedule,
            d,
            horizons,
            samples,
            common,
        } => {
            check_dim(d)?;
            let sh = Sharding::new(common.seed, common.shards);
            let s = formats::load_schedule(&schedule)?;
            let rows = verify::recurrence_experiment(d, &s, &horizons, samples, sh)?;
            let doc = json!({
                "op": "recurrence",
                "config": {
                    "schedule": formats::schedule_to_json(&s), "d": d, "horizons": horizons,
                    "samples": samples, "seed": sh.seed, "shards": sh.shards,
                },
                "rows": rows,
                "verdict": Verdict::Reported,
            });
            write_json(common.out.as_ref(), &doc)?;
            Ok(Verdict::Reported)
        }
        Experiment::Volkov {
            p,
            i,
            j,
            samples,
            horizon,
            common,
        } => {
            let sh = Sharding::new(common.seed, common.shards);
            let r = verify::volkov_bc_experiment(p, i, j, samples, horizon, sh)?;
            let ok =
                r.single.within(r.expected_single, 4.0) && r.joint.within(r.expected_joint, 4.0);
            let verdict = Verdict::from_bool(ok);
            let config = json!({
                "p": p, "i": i, "j": j, "samples": samples,
                "horizon": r.horizon, "stop_level": r.stop_level,
            });
            let doc = json!({
                "op": "volkov",
                "config": config,
                "single": ResultRecord::new("pass-once", config.clone(), &r.single, Some(r.expected_single), Verdict::from_bool(r.single.within(r.expected_single, 4.0))),
                "joint": ResultRecord::new("pass-once-joint", config.clone(), &r.joint, Some(r.expected_joint), Verdict::from_bool(r.joint.within(r.expected_joint, 4.0))),
                "truncated": r.truncated,
                "verdict": verdict,
            });
            write_json(common.out.as_ref(), &doc)?;
            Ok(verdict)
        }
        Experiment::Moment4 {
            p,
            n,
            samples,
            common,
        } => {
            let sh = Sharding::new(common.seed, common.shards);
            let r = verify::moment4_experiment(p, n, samples, sh)?;
            let verdict = Verdict::from_bool(r.result.within(r.exact, 4.0));
            let config = json!({"p": p, "n": n, "samples": samples, "asymptotic": r.asymptotic});
            let rec = ResultRecord::new("moment4", config, &r.result, Some(r.exact), verdict);
            write_json(common.out.as_ref(), &rec)?;
            Ok(verdict)
        }
        Experiment::Oracle {
            schedule,
            d,
            n,
            samples,
            sampler,
            tolerance,
            common,
        } => {
            check_dim(d)?;
            let sh = Sharding::new(common.seed, common.shards);
            let s = formats::load_schedule(&schedule)?;
            let tv = verify::endpoint_total_variation(d, &s, n, samples, sampler.into(), sh)?;
            let verdict = Verdict::from_bool(tv < tolerance);
            let doc = json!({
                "op": "oracle",
                "config": {
                    "schedule": formats::schedule_to_json(&s), "d": d, "n": n, "samples": samples,
                    "sampler": EndpointSampler::from(sampler), "tolerance": tolerance,
                    "seed": sh.seed, "shards": sh.shards,
                },
                "total_variation": tv,
                "verdict": verdict,
            });
            write_json(common.out.as_ref(), &doc)?;
            Ok(verdict)
        }
    }
}

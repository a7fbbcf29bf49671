use conwalk_core::walk::{visits, visits_after, EventWalker};
use conwalk_core::zigzag::{b_from_a, sample_zigzag};
use conwalk_core::Schedule;
use serde::Serialize;
use serde_json::json;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{streams, Check, EstimatorResult, Sharding, TestReport};
use crate::error::{usage, Result};
use crate::stats::{
    chi_square_gof, ks_critical_1pct, ks_one_sample, ks_two_sample, ks_two_sample_critical_1pct,
    poisson_cells, Moments,
};

/// How endpoints are rescaled before comparison with the standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `sqrt(p / (2 - p)) S_n / sqrt(n)`. Each coordinate then has variance
    /// `1/d` in the limit; the sum of the coordinate variances is 1.
    Total,
    /// `sqrt(d p / (2 - p)) S_n / sqrt(n)`, unit variance per coordinate.
    PerCoordinate,
}

/// Outcome of [`scaling_limit_test`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    /// All checks.
    pub report: TestReport,
    /// Sample variance of each rescaled coordinate, with its standard error.
    pub variances: Vec<(f64, f64)>,
    /// One-sample KS statistic of each coordinate.
    pub ks_statistics: Vec<f64>,
    /// `1.63 / sqrt(samples)` plus the lattice allowance.
    pub ks_threshold: f64,
}

/// Compares rescaled endpoints of the homogeneous walk with the normal law.
///
/// Per coordinate: a one-sample KS test against `N(0, 1)` at level 1% with
/// one rescaled lattice spacing added to the critical value, and the sample
/// variance within 4 s.e. of 1. Per pair of coordinates: the empirical
/// cross-moment within 4 s.e. of 0.
pub fn scaling_limit_test(
    d: usize,
    p: f64,
    n: u64,
    samples: u64,
    sharding: Sharding,
    normalization: Normalization,
) -> Result<ScalingReport> {
    if n < 1000 {
        return Err(usage(format!("the scaling test needs n >= 1000, got {n}")));
    }
    if samples < 2 {
        return Err(usage("the scaling test needs at least two samples"));
    }
    if !(p > 0.0 && p <= 1.0) || d == 0 {
        return Err(usage(format!(
            "need d >= 1 and p in (0, 1], got d = {d}, p = {p}"
        )));
    }
    let schedule = Schedule::constant(p)?;
    let walker = EventWalker::new(d, &schedule, n);
    let per_coordinate = match normalization {
        Normalization::Total => 1.0,
        Normalization::PerCoordinate => d as f64,
    };
    let scale = (per_coordinate * p / (2.0 - p)).sqrt() / (n as f64).sqrt();
    let parts = sharding.run(samples, streams::SCALING, |rng, count| {
        let mut pos = vec![0i64; d];
        let mut out = Vec::with_capacity(count as usize * d);
        for _ in 0..count {
            walker.sample_endpoint(rng, &mut pos);
            out.extend(pos.iter().map(|&x| x as f64 * scale));
        }
        out
    });
    let flat: Vec<f64> = parts.concat();
    let coords: Vec<Vec<f64>> = (0..d)
        .map(|j| flat.iter().skip(j).step_by(d).copied().collect())
        .collect();

    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let spacing = if d == 1 { 2.0 } else { 1.0 };
    let ks_threshold = ks_critical_1pct(samples as usize) + spacing * scale;
    let mut checks = Vec::new();
    let mut ks_statistics = Vec::new();
    let mut variances = Vec::new();
    for (j, xs) in coords.iter().enumerate() {
        let ks = ks_one_sample(xs, |x| normal.cdf(x));
        ks_statistics.push(ks);
        checks.push(Check::new(format!("ks_coord_{j}"), ks, ks_threshold));

        let m2: Moments = xs.iter().map(|x| x * x).collect();
        let mean: Moments = xs.iter().copied().collect();
        let var = mean.variance();
        // s.e. of the sample variance from the empirical fourth moment
        let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / xs.len() as f64;
        let se = ((m4 - m2.mean() * m2.mean()).max(0.0) / xs.len() as f64).sqrt();
        variances.push((var, se));
        checks.push(Check::new(
            format!("variance_coord_{j}"),
            (var - 1.0).abs(),
            4.0 * se,
        ));
    }
    for a in 0..d {
        for b in a + 1..d {
            let cross: Moments = coords[a]
                .iter()
                .zip(&coords[b])
                .map(|(x, y)| x * y)
                .collect();
            checks.push(Check::new(
                format!("cross_moment_{a}_{b}"),
                cross.mean().abs(),
                4.0 * cross.std_error(),
            ));
        }
    }
    let config = json!({
        "d": d, "p": p, "n": n, "samples": samples,
        "normalization": normalization,
        "seed": sharding.seed, "shards": sharding.shards,
    });
    Ok(ScalingReport {
        report: TestReport::new(checks, config),
        variances,
        ks_statistics,
        ks_threshold,
    })
}

/// Parameters of [`critical_limit_test`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalConfig {
    /// Dimension.
    pub d: usize,
    /// `p_n = a / n`.
    pub a: f64,
    /// Walk length.
    pub n: u64,
    /// Walk paths used for the turn-count statistics.
    pub samples: u64,
    /// Draws per side for the two-sample comparisons (at most `samples`).
    pub ks_samples: u64,
    /// Turns are counted in `(delta n, n]`; also the zigzag truncation.
    pub delta: f64,
    /// Truncation of the second zigzag sample used for the full endpoint.
    pub fine_epsilon: f64,
}

impl CriticalConfig {
    /// Defaults: `delta = 0.1`, `fine_epsilon = 1e-4`, `ks_samples = min(samples, 10^4)`.
    pub fn new(d: usize, a: f64, n: u64, samples: u64) -> Self {
        Self {
            d,
            a,
            n,
            samples,
            ks_samples: samples.min(10_000),
            delta: 0.1,
            fine_epsilon: 1e-4,
        }
    }
}

/// Outcome of [`critical_limit_test`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalReport {
    /// All checks.
    pub report: TestReport,
    /// Mean number of direction changes in `(delta n, n]`.
    pub turn_count: EstimatorResult,
    /// `b ln(1 / delta)`.
    pub expected_turns: f64,
}

struct CriticalDraw {
    turns: u64,
    endpoint: Vec<f64>,
    late: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Compares the walk with `p_n = a/n` against the zigzag process.
///
/// Checks:
/// * `turn_mean`, `turn_poisson_gof`: direction changes in `(delta n, n]`
///   against `Poisson(b ln(1/delta))`, by mean (4 s.e.) and chi-square (1%).
/// * `endpoint_bounded`: `max |S_n^j| / n <= 1`.
/// * `ks_norm`, `ks_coord_j`: `S_n / n` against `Z_1` truncated at `delta`.
///   The walk part includes the displacement before `delta n`, which the
///   truncated zigzag omits, so these carry a bias of up to `delta`.
/// * `ks_late_norm`, `ks_late_coord_j`: `(S_n - S_{delta n}) / n` against the
///   same zigzag sample; both sides cover the same window.
/// * `ks_fine_norm`: `|S_n| / n` against `|Z_1|` truncated at `fine_epsilon`.
///
/// Two-sample tests are at level 1% with `ks_samples` draws per side.
pub fn critical_limit_test(config: CriticalConfig, sharding: Sharding) -> Result<CriticalReport> {
    let CriticalConfig {
        d,
        a,
        n,
        samples,
        ks_samples,
        delta,
        fine_epsilon,
    } = config;
    if n < 10_000 {
        return Err(usage(format!(
            "the critical test needs n >= 10000, got {n}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) || !(fine_epsilon > 0.0 && fine_epsilon < 1.0) {
        return Err(usage("delta and fine_epsilon must lie in (0, 1)"));
    }
    if ks_samples < 2 || ks_samples > samples {
        return Err(usage("need 2 <= ks_samples <= samples"));
    }
    if d == 0 {
        return Err(usage("dimension must be positive"));
    }
    let n0 = a.ceil().max(1.0) as u64;
    let schedule = Schedule::critical(a, n0)?;
    let b = b_from_a(a, d);
    let expected_turns = b * (1.0 / delta).ln();
    let cut = (delta * n as f64).floor() as u64;
    let nf = n as f64;

    let walker = EventWalker::new(d, &schedule, n);
    let parts = sharding.run(samples, streams::CRITICAL_WALK, |rng, count| {
        (0..count)
            .map(|_| {
                let path = walker.sample_path(rng);
                let turns = path
                    .events
                    .windows(2)
                    .filter(|w| w[1].update_time > cut && w[1].new_direction != w[0].new_direction)
                    .count() as u64;
                let end = path.endpoint();
                let mid = path.position_at(cut);
                CriticalDraw {
                    turns,
                    endpoint: end.iter().map(|&x| x as f64 / nf).collect(),
                    late: end
                        .iter()
                        .zip(&mid)
                        .map(|(e, m)| (e - m) as f64 / nf)
                        .collect(),
                }
            })
            .collect::<Vec<_>>()
    });
    let draws: Vec<CriticalDraw> = parts.into_iter().flatten().collect();

    let zig = |epsilon: f64, stream_id: u32| -> Result<Vec<Vec<f64>>> {
        let parts = sharding.run(ks_samples, stream_id, |rng, count| {
            (0..count)
                .map(|_| sample_zigzag(a, d, epsilon, 1.0, rng).and_then(|z| z.position_at(1.0)))
                .collect::<Vec<_>>()
        });
        Ok(parts
            .into_iter()
            .flatten()
            .collect::<std::result::Result<Vec<_>, _>>()?)
    };
    let coarse = zig(delta, streams::ZIGZAG)?;
    let fine = zig(fine_epsilon, streams::ZIGZAG_FINE)?;

    let mut checks = Vec::new();
    let turns: Moments = draws.iter().map(|w| w.turns as f64).collect();
    let turn_count = EstimatorResult::from_moments(&turns, sharding);
    checks.push(Check::new(
        "turn_mean",
        (turn_count.estimate - expected_turns).abs(),
        4.0 * turn_count.std_error,
    ));
    let max_k = draws.iter().map(|w| w.turns).max().unwrap_or(0) as usize + 1;
    let mut observed = vec![0u64; max_k + 1];
    draws.iter().for_each(|w| observed[w.turns as usize] += 1);
    let gof = chi_square_gof(&observed, &poisson_cells(expected_turns, max_k));
    checks.push(Check::new(
        "turn_poisson_gof",
        gof.statistic,
        gof.critical_1pct,
    ));
    let max_coord = draws
        .iter()
        .flat_map(|w| w.endpoint.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    checks.push(Check::new("endpoint_bounded", max_coord, 1.0));

    let k = ks_samples as usize;
    let crit = ks_two_sample_critical_1pct(k, k);
    let walk = &draws[..k];
    let pick = |f: &dyn Fn(&CriticalDraw) -> f64| walk.iter().map(f).collect::<Vec<f64>>();
    let column =
        |zs: &[Vec<f64>], f: &dyn Fn(&[f64]) -> f64| zs.iter().map(|z| f(z)).collect::<Vec<f64>>();

    let z_norm = column(&coarse, &norm);
    checks.push(Check::new(
        "ks_norm",
        ks_two_sample(&pick(&|w| norm(&w.endpoint)), &z_norm),
        crit,
    ));
    checks.push(Check::new(
        "ks_late_norm",
        ks_two_sample(&pick(&|w| norm(&w.late)), &z_norm),
        crit,
    ));
    for j in 0..d {
        let zj = column(&coarse, &|z| z[j]);
        checks.push(Check::new(
            format!("ks_coord_{j}"),
            ks_two_sample(&pick(&|w| w.endpoint[j]), &zj),
            crit,
        ));
        checks.push(Check::new(
            format!("ks_late_coord_{j}"),
            ks_two_sample(&pick(&|w| w.late[j]), &zj),
            crit,
        ));
    }
    checks.push(Check::new(
        "ks_fine_norm",
        ks_two_sample(&pick(&|w| norm(&w.endpoint)), &column(&fine, &norm)),
        crit,
    ));

    let config = json!({
        "d": d, "a": a, "n0": n0, "b": b, "n": n, "samples": samples,
        "ks_samples": ks_samples, "delta": delta, "fine_epsilon": fine_epsilon,
        "seed": sharding.seed, "shards": sharding.shards,
    });
    Ok(CriticalReport {
        report: TestReport::new(checks, config),
        turn_count,
        expected_turns,
    })
}

/// Per-horizon visit statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecurrenceRow {
    /// Walk length.
    pub horizon: u64,
    /// Mean number of times `1 <= t <= horizon` with `S_t = 0`.
    pub mean_visits: EstimatorResult,
    /// Fraction of paths with `S_t = 0` for some `horizon/2 < t <= horizon`.
    pub late_visit_fraction: EstimatorResult,
}

/// Origin-visit statistics at each horizon, with an independent stream per horizon.
pub fn recurrence_experiment(
    d: usize,
    schedule: &Schedule,
    horizons: &[u64],
    samples: u64,
    sharding: Sharding,
) -> Result<Vec<RecurrenceRow>> {
    if d == 0 || samples == 0 {
        return Err(usage("need d >= 1 and samples >= 1"));
    }
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("horizons must be strictly increasing"));
    }
    let origin = vec![0i64; d];
    horizons
        .iter()
        .enumerate()
        .map(|(idx, &h)| {
            let walker = EventWalker::new(d, schedule, h);
            let stream_id = streams::RECURRENCE + idx as u32;
            let parts = sharding.run(samples, stream_id, |rng, count| {
                let (mut all, mut late) = (Moments::default(), Moments::default());
                for _ in 0..count {
                    let path = walker.sample_path(rng);
                    all.push(visits(&path, &origin) as f64);
                    late.push(f64::from(u8::from(visits_after(&path, &origin, h / 2) > 0)));
                }
                (all, late)
            });
            let all: Vec<Moments> = parts.iter().map(|p| p.0).collect();
            let late: Vec<Moments> = parts.iter().map(|p| p.1).collect();
            Ok(RecurrenceRow {
                horizon: h,
                mean_visits: EstimatorResult::from_parts(&all, sharding),
                late_visit_fraction: EstimatorResult::from_parts(&late, sharding),
            })
        })
        .collect()
}

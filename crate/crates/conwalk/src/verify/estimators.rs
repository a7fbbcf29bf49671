use std::collections::BTreeMap;

use conwalk_core::analytics::{self, Gap, MomentMode};
use conwalk_core::oracle::exact_distribution;
use conwalk_core::walk::{simulate, simulate_events, EventWalker};
use conwalk_core::{rng, Schedule};
use serde::Serialize;

use super::{streams, EstimatorResult, Sharding};
use crate::error::{usage, Result};
use crate::stats::Moments;

/// Smallest horizon at which the tail bound is asserted rather than only reported.
pub const LD_ASSERT_MIN_N: u64 = 10_000;

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(usage("samples must be positive"));
    }
    Ok(())
}

/// Empirical `P(|S_n| > a sqrt(n))` against the large-deviation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCheck {
    /// The empirical probability.
    pub result: EstimatorResult,
    /// `d f(p, a / sqrt d)` for `d >= 2`, `2 f(p, a)` for `d = 1`.
    pub bound: f64,
    /// `estimate - 4 s.e. <= bound`.
    pub holds: bool,
    /// Whether `n` is large enough for the bound to be asserted.
    pub asserted: bool,
}

/// Estimates `P(|S_n| > a sqrt(n))` for the walk with constant `p`.
pub fn estimate_tail(
    d: usize,
    p: f64,
    n: u64,
    a: f64,
    samples: u64,
    sharding: Sharding,
) -> Result<TailCheck> {
    check_samples(samples)?;
    let bound = analytics::ld_bound(p, a, d)?;
    let schedule = Schedule::constant(p)?;
    let walker = EventWalker::new(d, &schedule, n);
    let threshold = a * a * n as f64;
    let parts = sharding.run(samples, streams::TAIL, |rng, count| {
        let mut pos = vec![0i64; d];
        let mut m = Moments::default();
        for _ in 0..count {
            walker.sample_endpoint(rng, &mut pos);
            let r2: i128 = pos.iter().map(|&x| i128::from(x) * i128::from(x)).sum();
            m.push(f64::from(u8::from(r2 as f64 > threshold)));
        }
        m
    });
    let result = EstimatorResult::from_parts(&parts, sharding);
    Ok(TailCheck {
        result,
        bound,
        holds: result.bound_holds(bound),
        asserted: n >= LD_ASSERT_MIN_N,
    })
}

/// Empirical `E[Y_i Y_j]` against `prod_{k=i+1}^{j} (1 - p_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceCheck {
    /// Empirical mean of `Y_i Y_j`.
    pub result: EstimatorResult,
    /// The product formula.
    pub expected: f64,
}

/// Estimates `Cov(Y_i, Y_j)` for the one-dimensional walk.
pub fn estimate_covariance(
    schedule: &Schedule,
    i: u64,
    j: u64,
    samples: u64,
    sharding: Sharding,
) -> Result<CovarianceCheck> {
    check_samples(samples)?;
    let expected = analytics::correlation_e(schedule, i, j)?;
    let walker = EventWalker::new(1, schedule, j);
    let result = sharding.mean(samples, streams::COVARIANCE, |rng| {
        let path = walker.sample_path(rng);
        let yi = path.direction_at(i).expect("i within horizon").sign();
        let yj = path.direction_at(j).expect("j within horizon").sign();
        (yi * yj) as f64
    });
    Ok(CovarianceCheck { result, expected })
}

/// Empirical `E L_n^4` against the exact and asymptotic forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moment4Check {
    /// Empirical fourth moment.
    pub result: EstimatorResult,
    /// Exact value.
    pub exact: f64,
    /// Leading terms without the exponentially small remainder.
    pub asymptotic: f64,
}

/// Estimates the fourth moment of the one-dimensional walk with constant `p`.
pub fn moment4_experiment(
    p: f64,
    n: u64,
    samples: u64,
    sharding: Sharding,
) -> Result<Moment4Check> {
    check_samples(samples)?;
    let exact = analytics::fourth_moment_l(p, n, MomentMode::Exact)?;
    let asymptotic = analytics::fourth_moment_l(p, n, MomentMode::Asymptotic)?;
    let schedule = Schedule::constant(p)?;
    let walker = EventWalker::new(1, &schedule, n);
    let result = sharding.mean(samples, streams::MOMENT4, |rng| {
        let mut pos = [0i64];
        walker.sample_endpoint(rng, &mut pos);
        let l = pos[0] as f64;
        l * l * l * l
    });
    Ok(Moment4Check {
        result,
        exact,
        asymptotic,
    })
}

/// Pass-once frequencies of the biased nearest-neighbour walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolkovResult {
    /// Empirical `P(A_i)`.
    pub single: EstimatorResult,
    /// Empirical `P(A_i A_j)`.
    pub joint: EstimatorResult,
    /// `p - q`.
    pub expected_single: f64,
    /// `(p - q)^2 / (1 - r^(j-i))`.
    pub expected_joint: f64,
    /// Step cap per path.
    pub horizon: u64,
    /// Level at which a path is stopped.
    pub stop_level: i64,
    /// Paths that hit the step cap before the stop level.
    pub truncated: u64,
}

/// Probability that a walk which has reached `stop_level` is still below it
/// after `h` steps, by Hoeffding's inequality (1 when the inequality is void).
fn shortfall_bound(p: f64, h: u64, stop_level: i64) -> f64 {
    let h = h as f64;
    let need = (h + stop_level as f64) / (2.0 * h);
    if p <= need {
        1.0
    } else {
        (-2.0 * h * (p - need) * (p - need)).exp()
    }
}

/// Simulates the walk `X_0 = 0`, `P(step = +1) = p`, and records whether
/// levels `i` and `j` are each visited exactly once.
///
/// A path is stopped once it reaches `j + K`, where `r^K < 1e-6` bounds the
/// chance of ever coming back to `j`. The step cap defaults to the smallest
/// horizon for which reaching `j + K` in time fails with probability below
/// `1e-6`; a shorter explicit cap is rejected.
pub fn volkov_bc_experiment(
    p: f64,
    i: u64,
    j: u64,
    samples: u64,
    horizon: Option<u64>,
    sharding: Sharding,
) -> Result<VolkovResult> {
    check_samples(samples)?;
    if !(1 <= i && i < j) {
        return Err(usage(format!("need 1 <= i < j, got i = {i}, j = {j}")));
    }
    let (expected_single, expected_joint) = analytics::gambler_pass_once(p, Gap::Finite(j - i))?;
    let r = (1.0 - p) / p;
    let margin = (1e-6f64.ln() / r.ln()).ceil() as i64;
    let stop_level = j as i64 + margin;

    let needed = {
        let mut h = stop_level as u64;
        while shortfall_bound(p, h, stop_level) > 1e-6 {
            h *= 2;
        }
        let (mut lo, mut hi) = (h / 2, h);
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if shortfall_bound(p, mid, stop_level) > 1e-6 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let horizon = match horizon {
        Some(h) if h < needed => {
            return Err(usage(format!(
                "horizon {h} is too short; at least {needed} steps are needed"
            )))
        }
        Some(h) => h,
        None => needed,
    };

    let (li, lj) = (i as i64, j as i64);
    let parts = sharding.run(samples, streams::VOLKOV, |rng, count| {
        let (mut single, mut joint) = (Moments::default(), Moments::default());
        let mut truncated = 0u64;
        for _ in 0..count {
            let (mut x, mut vi, mut vj) = (0i64, 0u32, 0u32);
            let mut steps = 0;
            while x < stop_level && steps < horizon {
                x += if rng::bernoulli(rng, p) { 1 } else { -1 };
                steps += 1;
                vi += u32::from(x == li);
                vj += u32::from(x == lj);
            }
            truncated += u64::from(x < stop_level);
            single.push(f64::from(u8::from(vi == 1)));
            joint.push(f64::from(u8::from(vi == 1 && vj == 1)));
        }
        (single, joint, truncated)
    });
    let singles: Vec<Moments> = parts.iter().map(|p| p.0).collect();
    let joints: Vec<Moments> = parts.iter().map(|p| p.1).collect();
    Ok(VolkovResult {
        single: EstimatorResult::from_parts(&singles, sharding),
        joint: EstimatorResult::from_parts(&joints, sharding),
        expected_single,
        expected_joint,
        horizon,
        stop_level,
        truncated: parts.iter().map(|p| p.2).sum(),
    })
}

/// Path sampler to test against the exact law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointSampler {
    /// One Bernoulli trial per step.
    Direct,
    /// Update times only.
    Events,
}

/// Total-variation distance between the empirical law of `S_n` and the exact one.
pub fn endpoint_total_variation(
    d: usize,
    schedule: &Schedule,
    n: u64,
    samples: u64,
    sampler: EndpointSampler,
    sharding: Sharding,
) -> Result<f64> {
    check_samples(samples)?;
    let exact = exact_distribution(d, schedule, n)?.marginal_map();
    let parts = sharding.run(samples, streams::ENDPOINTS, |rng, count| {
        let mut counts: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
        for _ in 0..count {
            let path = match sampler {
                EndpointSampler::Direct => simulate(d, schedule, n, rng),
                EndpointSampler::Events => simulate_events(d, schedule, n, rng),
            };
            *counts.entry(path.endpoint()).or_default() += 1;
        }
        counts
    });
    let mut counts: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    for part in parts {
        for (k, v) in part {
            *counts.entry(k).or_default() += v;
        }
    }
    let mut tv = 0.0;
    for (x, p) in &exact {
        let c = counts.remove(x).unwrap_or(0);
        tv += (p - c as f64 / samples as f64).abs();
    }
    tv += counts
        .values()
        .map(|&c| c as f64 / samples as f64)
        .sum::<f64>();
    Ok(tv / 2.0)
}

//! Monte Carlo estimators and statistical tests against the closed forms.
//!
//! Work is split into shards. Shard `k` of an experiment draws from
//! `rng::stream(seed, k, stream_id)` and handles `samples / shards` draws (the
//! first `samples % shards` shards take one extra). Shards run on scoped
//! threads and their results are merged in shard order, so output depends only
//! on `(seed, shards, config)`.

mod estimators;
mod limits;

use std::thread;

use conwalk_core::rng::{self, StreamRng};
use serde::Serialize;

use crate::stats::Moments;

pub use estimators::{
    endpoint_total_variation, estimate_covariance, estimate_tail, moment4_experiment,
    volkov_bc_experiment, CovarianceCheck, EndpointSampler, Moment4Check, TailCheck, VolkovResult,
    LD_ASSERT_MIN_N,
};
pub use limits::{
    critical_limit_test, recurrence_experiment, scaling_limit_test, CriticalConfig, CriticalReport,
    Normalization, RecurrenceRow, ScalingReport,
};

/// Master seed and shard count of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sharding {
    /// Master seed.
    pub seed: u64,
    /// Number of independent shards (at least 1).
    pub shards: u32,
}

impl Default for Sharding {
    fn default() -> Self {
        Self { seed: 0, shards: 1 }
    }
}

impl Sharding {
    /// `seed` with `shards` shards.
    pub fn new(seed: u64, shards: u32) -> Self {
        Self {
            seed,
            shards: shards.max(1),
        }
    }

    /// Runs `work(rng, count)` once per shard and returns the outputs in shard order.
    pub fn run<T, F>(&self, samples: u64, stream_id: u32, work: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut StreamRng, u64) -> T + Sync,
    {
        let shards = self.shards.max(1);
        let base = samples / u64::from(shards);
        let extra = samples % u64::from(shards);
        let count = |k: u32| base + u64::from(u64::from(k) < extra);
        if shards == 1 {
            return vec![work(&mut rng::stream(self.seed, 0, stream_id), samples)];
        }
        thread::scope(|scope| {
            let handles: Vec<_> = (0..shards)
                .map(|k| {
                    let work = &work;
                    let seed = self.seed;
                    scope.spawn(move || work(&mut rng::stream(seed, k, stream_id), count(k)))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("shard panicked"))
                .collect()
        })
    }

    /// Sharded mean of one scalar per draw.
    pub fn mean<F>(&self, samples: u64, stream_id: u32, draw: F) -> EstimatorResult
    where
        F: Fn(&mut StreamRng) -> f64 + Sync,
    {
        let parts = self.run(samples, stream_id, |rng, count| {
            (0..count).map(|_| draw(rng)).collect::<Moments>()
        });
        EstimatorResult::from_parts(&parts, *self)
    }
}

/// Stream identifiers, one per experiment, so that experiments sharing a seed
/// stay independent.
pub(crate) mod streams {
    pub const TAIL: u32 = 1;
    pub const COVARIANCE: u32 = 2;
    pub const SCALING: u32 = 3;
    pub const CRITICAL_WALK: u32 = 4;
    pub const ZIGZAG: u32 = 5;
    pub const ZIGZAG_FINE: u32 = 6;
    pub const VOLKOV: u32 = 7;
    pub const MOMENT4: u32 = 8;
    pub const ENDPOINTS: u32 = 9;
    /// Plus the index of the horizon.
    pub const RECURRENCE: u32 = 100;
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorResult {
    /// Sample mean.
    pub estimate: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    /// Number of draws.
    pub n_samples: u64,
    /// `estimate -+ 1.96 std_error`.
    pub ci95: (f64, f64),
    /// Master seed.
    pub seed: u64,
    /// Shard count.
    pub shards: u32,
}

impl EstimatorResult {
    /// Merges per-shard accumulators in order.
    pub fn from_parts(parts: &[Moments], sharding: Sharding) -> Self {
        let mut total = Moments::default();
        parts.iter().for_each(|m| total.merge(m));
        Self::from_moments(&total, sharding)
    }

    /// Wraps a single accumulator.
    pub fn from_moments(m: &Moments, sharding: Sharding) -> Self {
        let se = m.std_error();
        Self {
            estimate: m.mean(),
            std_error: se,
            n_samples: m.count(),
            ci95: (m.mean() - 1.96 * se, m.mean() + 1.96 * se),
            seed: sharding.seed,
            shards: sharding.shards,
        }
    }

    /// `|estimate - target| <= k std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.estimate - target).abs() <= k * self.std_error
    }

    /// One-sided check `estimate - 4 std_error <= bound`.
    pub fn bound_holds(&self, bound: f64) -> bool {
        self.estimate - 4.0 * self.std_error <= bound
    }
}

/// One named comparison of a statistic with its threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    /// What was compared.
    pub name: String,
    /// Observed statistic.
    pub statistic: f64,
    /// Largest acceptable value.
    pub threshold: f64,
    /// `statistic > threshold`.
    pub rejected: bool,
}

impl Check {
    /// Rejected when `statistic > threshold` (or the statistic is NaN).
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            rejected: !(statistic <= threshold),
        }
    }
}

/// Outcome of a composite test.
///
/// The headline statistic and threshold are those of the check with the
/// largest `statistic / threshold`, so `rejected` holds exactly when that
/// check exceeds its threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    /// Headline statistic.
    pub statistic: f64,
    /// Its threshold.
    pub threshold: f64,
    /// Whether any check was rejected.
    pub rejected: bool,
    /// Every individual check.
    pub checks: Vec<Check>,
    /// Echo of the configuration.
    pub config: serde_json::Value,
}

impl TestReport {
    /// Aggregates `checks`.
    pub fn new(checks: Vec<Check>, config: serde_json::Value) -> Self {
        let worst = checks
            .iter()
            .max_by(|a, b| ratio(a).total_cmp(&ratio(b)))
            .cloned();
        let (statistic, threshold) = worst.map_or((0.0, 0.0), |c| (c.statistic, c.threshold));
        Self {
            statistic,
            threshold,
            rejected: checks.iter().any(|c| c.rejected),
            checks,
            config,
        }
    }

    /// The check called `name`.
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn ratio(c: &Check) -> f64 {
    if c.statistic.is_nan() {
        f64::INFINITY
    } else if c.threshold > 0.0 {
        c.statistic / c.threshold
    } else if c.rejected {
        f64::INFINITY
    } else {
        0.0
    }
}

//! Exact small-scale laws used as ground truth for the samplers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::domain;
use crate::walk::Direction;
use crate::{Error, Result, Schedule};

/// Default largest horizon accepted by [`exact_distribution`].
pub const DEFAULT_MAX_HORIZON: u64 = 20;
/// Default largest number of `(position, direction)` states.
pub const DEFAULT_MAX_STATES: usize = 1 << 24;
/// Largest `n` accepted by [`brute_force_l_moment`].
pub const BRUTE_FORCE_MAX_N: u64 = 14;

/// Law of `(S_n, Y_n)` on the box `[-n, n]^d` times the `2d` directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    d: usize,
    horizon: u64,
    side: usize,
    probs: Vec<f64>,
    error_bound: f64,
}

impl ExactDistribution {
    /// Dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of steps `n`.
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Bound on the accumulated floating-point error of any sum of entries.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    fn pos_index(&self, pos: &[i64]) -> Option<usize> {
        if pos.len() != self.d {
            return None;
        }
        let n = self.horizon as i64;
        let mut idx = 0usize;
        for &x in pos.iter().rev() {
            if x < -n || x > n {
                return None;
            }
            idx = idx * self.side + (x + n) as usize;
        }
        Some(idx)
    }

    fn position_of(&self, mut idx: usize) -> Vec<i64> {
        let n = self.horizon as i64;
        (0..self.d)
            .map(|_| {
                let x = (idx % self.side) as i64 - n;
                idx /= self.side;
                x
            })
            .collect()
    }

    /// `P(S_n = pos, Y_n = dir)`.
    pub fn prob(&self, pos: &[i64], dir: Direction) -> f64 {
        match self.pos_index(pos) {
            Some(i) if dir.axis() < self.d => self.probs[i * 2 * self.d + dir.index()],
            _ => 0.0,
        }
    }

    /// `P(S_n = pos)`.
    pub fn marginal(&self, pos: &[i64]) -> f64 {
        let k = 2 * self.d;
        let mut buf = Vec::with_capacity(k);
        self.pos_index(pos).map_or(0.0, |i| {
            sorted_sum(&self.probs[i * k..(i + 1) * k], &mut buf)
        })
    }

    /// Sum of all entries.
    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Non-zero entries as `(position, direction, probability)`.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<i64>, Direction, f64)> + '_ {
        let k = 2 * self.d;
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(i, &p)| (self.position_of(i / k), Direction::from_index(i % k), p))
    }

    /// Entries keyed by `(position, direction)`.
    pub fn to_map(&self) -> BTreeMap<(Vec<i64>, Direction), f64> {
        self.entries().map(|(x, dir, p)| ((x, dir), p)).collect()
    }

    /// Non-zero marginal probabilities of `S_n`.
    pub fn marginal_map(&self) -> BTreeMap<Vec<i64>, f64> {
        let k = 2 * self.d;
        let mut buf = Vec::with_capacity(k);
        self.probs
            .chunks_exact(k)
            .enumerate()
            .filter_map(|(i, cell)| {
                let total = sorted_sum(cell, &mut buf);
                (total > 0.0).then(|| (self.position_of(i), total))
            })
            .collect()
    }

    /// `E f(S_n)`.
    pub fn expectation(&self, mut f: impl FnMut(&[i64]) -> f64) -> f64 {
        self.marginal_map().iter().map(|(x, p)| p * f(x)).sum()
    }
}

/// Sum in increasing order, so that permuting the inputs cannot change the
/// rounding. This keeps the recursion exactly invariant under the lattice
/// symmetries.
fn sorted_sum(values: &[f64], buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    buf.extend_from_slice(values);
    buf.sort_unstable_by(f64::total_cmp);
    buf.iter().sum()
}

/// Exact law after `n` steps with the default caps.
pub fn exact_distribution(d: usize, schedule: &Schedule, n: u64) -> Result<ExactDistribution> {
    exact_distribution_capped(d, schedule, n, DEFAULT_MAX_HORIZON, DEFAULT_MAX_STATES)
}

/// Forward recursion over `(position, direction)`.
///
/// At step `k >= 2` the mass on `(x, e)` moves to `(x + e, e)` with weight
/// `1 - p_k` and to `(x + e', e')` with weight `p_k / (2d)` for every `e'`.
pub fn exact_distribution_capped(
    d: usize,
    schedule: &Schedule,
    n: u64,
    max_horizon: u64,
    max_states: usize,
) -> Result<ExactDistribution> {
    if d == 0 {
        return Err(domain!("dimension must be positive"));
    }
    if n > max_horizon {
        return Err(Error::Resource(format!(
            "horizon {n} exceeds the cap {max_horizon}"
        )));
    }
    let side = 2 * n as usize + 1;
    let k = 2 * d;
    let cells = u32::try_from(d)
        .ok()
        .and_then(|e| side.checked_pow(e))
        .filter(|c| c.checked_mul(k).is_some_and(|s| s <= max_states))
        .ok_or_else(|| {
            Error::Resource(format!(
                "state space for d = {d}, n = {n} exceeds {max_states} entries"
            ))
        })?;

    let strides: Vec<usize> = (0..d).map(|a| side.pow(a as u32)).collect();
    let centre: usize = strides.iter().map(|s| s * n as usize).sum();
    let mut probs = vec![0.0; cells * k];
    let mut next = vec![0.0; cells * k];
    let mut buf = Vec::with_capacity(k);
    // Y_0 is irrelevant: step 1 always redraws.
    probs[centre * k] = 1.0;

    for step in 1..=n {
        let p = if step == 1 { 1.0 } else { schedule.p_at(step) };
        let stay = 1.0 - p;
        let spread = p / k as f64;
        next.iter_mut().for_each(|v| *v = 0.0);
        for cell in 0..cells {
            let here = &probs[cell * k..(cell + 1) * k];
            let total = sorted_sum(here, &mut buf);
            if total == 0.0 {
                continue;
            }
            for dir in 0..k {
                let mass = stay * here[dir] + spread * total;
                if mass == 0.0 {
                    continue;
                }
                let stride = strides[dir / 2];
                let target = if dir % 2 == 0 {
                    cell + stride
                } else {
                    cell - stride
                };
                // Each (target, dir) has a single source cell.
                next[target * k + dir] = mass;
            }
        }
        core::mem::swap(&mut probs, &mut next);
    }

    // Every entry is a sum of non-negative terms built with at most
    // n (2d + 3) roundings along any chain.
    let error_bound = (n as f64) * (k as f64 + 3.0) * f64::EPSILON;
    Ok(ExactDistribution {
        d,
        horizon: n,
        side,
        probs,
        error_bound,
    })
}

/// `E[L_n^m]` for the one-dimensional walk with constant `p` by enumerating
/// all `2^(n-1)` sign patterns.
///
/// In one dimension a redraw reverses the direction with probability 1/2, so
/// consecutive signs flip independently with probability `p/2`. By symmetry
/// `Y_1 = +1` can be fixed for even `m`.
pub fn brute_force_l_moment(p: f64, n: u64, m: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain!("p = {p} must lie in [0, 1]"));
    }
    if n == 0 {
        return Err(domain!("n must be at least 1"));
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Resource(format!(
            "brute force needs n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    if m % 2 == 1 {
        return Err(Error::UnsupportedMoment(m));
    }
    let flip = p / 2.0;
    let flips = (n - 1) as u32;
    let mut total = 0.0;
    for pattern in 0u32..(1 << flips) {
        let mut y = 1i64;
        let mut l = 1i64;
        let mut weight = 1.0;
        for i in 0..flips {
            if pattern >> i & 1 == 1 {
                y = -y;
                weight *= flip;
            } else {
                weight *= 1.0 - flip;
            }
            l += y;
        }
        total += weight * libm::pow(l as f64, m as f64);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_uniform() {
        let s = Schedule::constant(0.3).unwrap();
        for d in 1..4 {
            let dist = exact_distribution(d, &s, 1).unwrap();
            for dir in Direction::all(d) {
                let mut x = vec![0i64; d];
                x[dir.axis()] = dir.sign();
                assert!((dist.prob(&x, dir) - 0.5 / d as f64).abs() < 1e-15);
            }
            assert!((dist.total_mass() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn return_in_one_dimension() {
        for p in [0.1, 0.5, 0.9] {
            let s = Schedule::constant(p).unwrap();
            let dist = exact_distribution(1, &s, 2).unwrap();
            assert!((dist.marginal(&[0]) - p / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn reflection_symmetry_is_exact() {
        let s = Schedule::critical(1.0, 2).unwrap();
        let dist = exact_distribution(2, &s, 9).unwrap();
        for (x, p) in dist.marginal_map() {
            assert_eq!(dist.marginal(&[-x[0], x[1]]), p);
            assert_eq!(dist.marginal(&[x[1], x[0]]), p);
        }
        assert!((dist.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_turning_is_simple_random_walk() {
        // d = 1: P(S_n = 2k - n) = C(n, k) / 2^n.
        let s = Schedule::constant(1.0).unwrap();
        for n in 1..=8u64 {
            let dist = exact_distribution(1, &s, n).unwrap();
            let mut binom = 1.0;
            for k in 0..=n {
                let expected = binom / libm::pow(2.0, n as f64);
                let got = dist.marginal(&[2 * k as i64 - n as i64]);
                assert!((got - expected).abs() < 1e-14, "n = {n}, k = {k}");
                binom = binom * (n - k) as f64 / (k + 1) as f64;
            }
        }
    }

    #[test]
    fn coordinate_variance_is_total_over_d() {
        let p = 0.5;
        let n = 12;
        let s = Schedule::constant(p).unwrap();
        let dist = exact_distribution(2, &s, n).unwrap();
        let total = dist.expectation(|x| (x[0] * x[0] + x[1] * x[1]) as f64);
        let first = dist.expectation(|x| (x[0] * x[0]) as f64);
        assert!((first - total / 2.0).abs() < 1e-10);
        // E|S_n|^2 = n + 2 sum_{g=1}^{n-1} (n - g) q^g
        let q = 1.0 - p;
        let exact: f64 = n as f64
            + 2.0
                * (1..n)
                    .map(|g| (n - g) as f64 * libm::pow(q, g as f64))
                    .sum::<f64>();
        assert!((total - exact).abs() < 1e-10);
    }

    #[test]
    fn caps() {
        let s = Schedule::constant(0.5).unwrap();
        assert!(matches!(
            exact_distribution(2, &s, 21),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            exact_distribution_capped(3, &s, 20, 20, 1000),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            brute_force_l_moment(0.5, 15, 4),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            brute_force_l_moment(0.5, 5, 3),
            Err(Error::UnsupportedMoment(3))
        ));
    }

    #[test]
    fn brute_force_small_cases() {
        assert!((brute_force_l_moment(0.3, 1, 4).unwrap() - 1.0).abs() < 1e-15);
        assert!((brute_force_l_moment(0.5, 2, 4).unwrap() - 12.0).abs() < 1e-12);
    }
}

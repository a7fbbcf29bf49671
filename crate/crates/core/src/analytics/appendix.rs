//! Elementary bounds used for characteristic-function estimates.

use alloc::vec::Vec;

use crate::error::domain;
use crate::Result;

fn check_progression(s: f64, m: u64) -> Result<()> {
    if !(s > 0.0 && s <= 0.5) {
        return Err(domain!("step s = {s} must lie in (0, 1/2]"));
    }
    if m < 2 || (m as f64) * s < 1.0 {
        return Err(domain!("need M >= 2 and M s >= 1, got M = {m}, s = {s}"));
    }
    Ok(())
}

/// Number of `k` in `1..=m` with `k s + s0 (mod 1)` in `[0, 1/2)`.
///
/// Evaluated in floating point. Points that land on `1/2` up to rounding can
/// be misclassified; use [`count_arith_progression_exact`] for rational input.
pub fn count_arith_progression(s: f64, s0: f64, m: u64) -> Result<u64> {
    check_progression(s, m)?;
    if !s0.is_finite() {
        return Err(domain!("offset s0 = {s0} must be finite"));
    }
    Ok((1..=m)
        .filter(|&k| {
            let x = k as f64 * s + s0;
            let frac = x - libm::floor(x);
            frac < 0.5
        })
        .count() as u64)
}

/// Exact version for `s = s_num / den`, `s0 = s0_num / den`.
pub fn count_arith_progression_exact(s_num: u64, s0_num: i64, den: u64, m: u64) -> Result<u64> {
    if den == 0 {
        return Err(domain!("denominator must be positive"));
    }
    check_progression(s_num as f64 / den as f64, m)?;
    if 2 * s_num > den || m.checked_mul(s_num).is_none_or(|v| v < den) {
        return Err(domain!("need 0 < s <= 1/2 and M s >= 1 exactly"));
    }
    let den_i = den as i128;
    Ok((1..=m as i128)
        .filter(|&k| {
            let r = (k * s_num as i128 + s0_num as i128).rem_euclid(den_i);
            2 * r < den_i
        })
        .count() as u64)
}

/// `h(s)` and the bound `1 - (a/M) sum_{j=1}^M (1 - |cos(j s)|)` that dominates it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineSumBound {
    /// `sum_j q_j |cos(j s)|`.
    pub h: f64,
    /// The upper bound.
    pub bound: f64,
}

/// Evaluates both sides of the cosine-sum bound for a distribution `q` on
/// `{1, 2, ...}` (`q[0]` is the mass at 1).
///
/// Requires `sum q = 1` within `1e-12` and `q_j >= a/M` for `j <= M`.
pub fn cosine_sum_bound(q: &[f64], m: usize, a: f64, s: f64) -> Result<CosineSumBound> {
    if !(a > 0.0) {
        return Err(domain!("a = {a} must be positive"));
    }
    if m == 0 || m > q.len() {
        return Err(domain!("M = {m} must lie in 1..={}", q.len()));
    }
    if !(0.0..=core::f64::consts::FRAC_PI_2).contains(&s) {
        return Err(domain!("s = {s} must lie in [0, pi/2]"));
    }
    if q.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(domain!(
            "distribution entries must be finite and non-negative"
        ));
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(domain!("distribution sums to {total}, not 1"));
    }
    let floor = a / m as f64;
    if let Some(j) = q[..m].iter().position(|&v| v < floor) {
        return Err(domain!("q_{} = {} is below a/M = {floor}", j + 1, q[j]));
    }
    let abs_cos: Vec<f64> = (1..=q.len())
        .map(|j| libm::fabs(libm::cos(j as f64 * s)))
        .collect();
    let h = q.iter().zip(&abs_cos).map(|(w, c)| w * c).sum();
    let deficit: f64 = abs_cos[..m].iter().map(|c| 1.0 - c).sum();
    Ok(CosineSumBound {
        h,
        bound: 1.0 - floor * deficit,
    })
}

/// `(1 - cos alpha) - alpha^2 / 4`, non-negative on `[0, pi/2]`.
///
/// Uses `1 - cos alpha = 2 sin^2(alpha/2)` to avoid cancellation near 0.
pub fn cos_gap_margin(alpha: f64) -> f64 {
    let s = libm::sin(alpha / 2.0);
    2.0 * s * s - alpha * alpha / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_progressions() {
        assert_eq!(count_arith_progression(0.5, 0.0, 2).unwrap(), 1);
        assert_eq!(count_arith_progression(0.25, 0.0, 4).unwrap(), 2);
        assert_eq!(count_arith_progression_exact(1, 0, 2, 2).unwrap(), 1);
        assert_eq!(count_arith_progression_exact(1, 0, 4, 4).unwrap(), 2);
    }

    #[test]
    fn progression_hypotheses() {
        assert!(count_arith_progression(0.6, 0.0, 4).is_err());
        assert!(count_arith_progression(0.1, 0.0, 5).is_err());
        assert!(count_arith_progression(0.1, 0.0, 1).is_err());
        assert!(count_arith_progression_exact(3, 0, 5, 4).is_err());
    }

    #[test]
    fn exact_and_float_agree_off_the_boundary() {
        for m in 10..60 {
            let a = count_arith_progression(0.13, 0.07, m).unwrap();
            let b = count_arith_progression_exact(13, 7, 100, m).unwrap();
            assert_eq!(a, b, "m = {m}");
        }
    }

    #[test]
    fn cosine_examples() {
        let q: Vec<f64> = {
            let mut v: Vec<f64> = (1..60).map(|j| libm::pow(0.5, j as f64)).collect();
            let rest = 1.0 - v.iter().sum::<f64>();
            *v.last_mut().unwrap() += rest;
            v
        };
        let at0 = cosine_sum_bound(&q, 1, 0.5, 0.0).unwrap();
        assert!((at0.h - 1.0).abs() < 1e-12 && (at0.bound - 1.0).abs() < 1e-15);
        let r = cosine_sum_bound(&q, 1, 0.5, core::f64::consts::FRAC_PI_2).unwrap();
        assert!((r.bound - 0.5).abs() < 1e-12);
        assert!(r.h <= r.bound + 1e-12);
        assert!(cosine_sum_bound(&q, 2, 0.6, 0.3).is_err());
        assert!(cosine_sum_bound(&[0.5, 0.4], 1, 0.1, 0.3).is_err());
    }

    #[test]
    fn margin_non_negative() {
        for i in 0..=1000 {
            let alpha = core::f64::consts::FRAC_PI_2 * i as f64 / 1000.0;
            assert!(cos_gap_margin(alpha) >= 0.0, "alpha = {alpha}");
        }
    }
}

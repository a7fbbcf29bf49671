//! Closed-form quantities and bounds for the conservative walk.

mod appendix;
mod lyapunov;

pub use appendix::{
    cos_gap_margin, cosine_sum_bound, count_arith_progression, count_arith_progression_exact,
    CosineSumBound,
};
pub use lyapunov::{admissible_shift, lyapunov_drift, DriftValue, LyapunovConfig};

use crate::error::domain;
use crate::{Error, Result, Schedule};

/// Step-sign correlation `e_{i,j} = prod_{k=i+1}^{j} (1 - p_k)`.
///
/// For the one-dimensional walk this is `Cov(Y_i, Y_j) = E[Y_i Y_j]`.
pub fn correlation_e(schedule: &Schedule, i: u64, j: u64) -> Result<f64> {
    if i < 1 || i > j {
        return Err(domain!("need 1 <= i <= j, got i = {i}, j = {j}"));
    }
    Ok((i + 1..=j).map(|k| 1.0 - schedule.p_at(k)).product())
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(domain!("p = {p} must lie in (0, 1]"))
    }
}

/// Even moments of the symmetrized geometric law `P(m) = (1-p)^(|m|-1) p / 2`.
///
/// `E xi^2 = (2-p)/p^2`, `E xi^4 = (2-p)(p^2 + 12(1-p))/p^4`.
pub fn sgeom_moment(p: f64, m: u32) -> Result<f64> {
    check_p(p)?;
    match m {
        2 => Ok((2.0 - p) / (p * p)),
        4 => Ok((2.0 - p) * (p * p + 12.0 * (1.0 - p)) / (p * p * p * p)),
        _ => Err(Error::UnsupportedMoment(m)),
    }
}

/// How [`fourth_moment_l`] evaluates `E L_n^4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    /// Full expansion over index pairs and quadruples, `O(n)` time.
    Exact,
    /// The quadratic-in-`n` closed form without the `O(n q^n)` remainder.
    Asymptotic,
}

/// Fourth moment of the homogeneous one-dimensional walk `L_n = Y_1 + ... + Y_n`.
///
/// With `q = 1 - p` and `E[Y_i Y_j] = q^(j-i)`, the expansion of `(sum Y_i)^4`
/// reduces to
/// `n + 3n(n-1) + (8 + 12(n-2)) S2 + 24 Q`, where
/// `S2 = sum_{g=1}^{n-1} (n-g) q^g` collects the pairs and
/// `Q = sum_{s=2}^{n} (s-1) q^s (n-s)(n-s-1)/2` collects the quadruples
/// `i < j < k < l` (weight `q^(j-i) q^(l-k)`, grouped by `s = (j-i) + (l-k)`).
pub fn fourth_moment_l(p: f64, n: u64, mode: MomentMode) -> Result<f64> {
    check_p(p)?;
    if n == 0 {
        return Err(domain!("n must be at least 1"));
    }
    let q = 1.0 - p;
    let nf = n as f64;
    match mode {
        MomentMode::Asymptotic => {
            let p2 = p * p;
            Ok(3.0 * nf * nf * (2.0 - p) * (2.0 - p) / p2
                - 2.0 * nf * (2.0 - p) * (p2 + 12.0 * q) / (p2 * p)
                + 8.0 * q * (3.0 - 2.0 * p) * (3.0 - p) / (p2 * p2))
        }
        MomentMode::Exact => {
            let mut pairs = 0.0;
            let mut quads = 0.0;
            let mut qg = 1.0;
            for g in 1..n {
                qg *= q;
                pairs += (n - g) as f64 * qg;
                // same power q^s with s = g + 1 for the quadruple sum
                let s = g + 1;
                let rest = (n - s) as f64;
                quads += (s - 1) as f64 * qg * q * rest * (rest - 1.0).max(0.0) / 2.0;
            }
            Ok(nf + 3.0 * nf * (nf - 1.0) + (8.0 + 12.0 * (nf - 2.0)) * pairs + 24.0 * quads)
        }
    }
}

/// `E L_n^4` minus its asymptotic form, in closed form:
/// `-4 q^(n+1) (3n(1 - q^2) + 4q^2 + 10q + 4) / p^4`.
pub fn fourth_moment_remainder(p: f64, n: u64) -> Result<f64> {
    check_p(p)?;
    let q = 1.0 - p;
    let nf = n as f64;
    let qn1 = libm::pow(q, nf + 1.0);
    Ok(-4.0 * qn1 * (3.0 * nf * (1.0 - q * q) + 4.0 * q * q + 10.0 * q + 4.0) / (p * p * p * p))
}

/// Tail bound `P(|S_n| > a sqrt(n))` for large `n`.
///
/// `d = 1`: `2 exp(-p^2 a / 5)`, valid for `a >= 1`.
/// `d >= 2`: `d exp(-p^2 (a / sqrt d) / 5)`, valid for `a >= sqrt d`.
/// Clamped to at most 1.
pub fn ld_bound(p: f64, a: f64, d: usize) -> Result<f64> {
    check_p(p)?;
    if d == 0 {
        return Err(domain!("dimension must be at least 1"));
    }
    let raw = if d == 1 {
        if !(a >= 1.0) {
            return Err(domain!("a = {a} must be at least 1 in one dimension"));
        }
        2.0 * libm::exp(-p * p * a / 5.0)
    } else {
        let root = libm::sqrt(d as f64);
        if !(a >= root) {
            return Err(domain!("a = {a} must be at least sqrt(d) = {root}"));
        }
        d as f64 * libm::exp(-p * p * (a / root) / 5.0)
    };
    Ok(raw.min(1.0))
}

/// Distance between the two pass-once levels in [`gambler_pass_once`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gap {
    /// `j - i`.
    Finite(u64),
    /// The levels are infinitely far apart.
    Infinite,
}

/// Pass-once probabilities of the nearest-neighbour walk with up-probability `p > 1/2`.
///
/// Returns `(P(A_i), P(A_i A_j))` where `A_i` is the event that level `i` is
/// visited exactly once: `P(A_i) = p - q` and
/// `P(A_i A_j) = (p - q)^2 / (1 - r^(j-i))` with `r = q / p`.
pub fn gambler_pass_once(p: f64, gap: Gap) -> Result<(f64, f64)> {
    if !(p > 0.5 && p < 1.0) {
        return Err(domain!("p = {p} must lie in (1/2, 1)"));
    }
    let q = 1.0 - p;
    let single = p - q;
    let joint = match gap {
        Gap::Infinite => single * single,
        Gap::Finite(0) => return Err(domain!("gap must be at least 1")),
        Gap::Finite(k) => single * single / (1.0 - libm::pow(q / p, k as f64)),
    };
    Ok((single, joint))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlation_examples() {
        let c = Schedule::constant(0.5).unwrap();
        assert_eq!(correlation_e(&c, 3, 3).unwrap(), 1.0);
        assert!((correlation_e(&c, 2, 4).unwrap() - 0.25).abs() < 1e-15);
        let crit = Schedule::critical(1.0, 2).unwrap();
        assert!((correlation_e(&crit, 10, 12).unwrap() - 10.0 / 12.0).abs() < 1e-15);
        assert!(correlation_e(&c, 0, 3).is_err());
        assert!(correlation_e(&c, 4, 3).is_err());
    }

    #[test]
    fn sgeom_examples() {
        assert_eq!(sgeom_moment(1.0, 2).unwrap(), 1.0);
        assert_eq!(sgeom_moment(0.5, 2).unwrap(), 6.0);
        assert_eq!(sgeom_moment(0.5, 4).unwrap(), 150.0);
        assert_eq!(sgeom_moment(0.5, 3), Err(Error::UnsupportedMoment(3)));
        assert!(sgeom_moment(0.0, 2).is_err());
    }

    #[test]
    fn sgeom_matches_direct_series() {
        for p in [0.1, 0.37, 0.8] {
            let (mut m2, mut m4) = (0.0, 0.0);
            let mut w = p;
            for k in 1..5000 {
                let kf = k as f64;
                m2 += w * kf * kf;
                m4 += w * kf * kf * kf * kf;
                w *= 1.0 - p;
            }
            assert!((m2 / sgeom_moment(p, 2).unwrap() - 1.0).abs() < 1e-12);
            assert!((m4 / sgeom_moment(p, 4).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_moment_small_n() {
        assert_eq!(fourth_moment_l(0.3, 1, MomentMode::Exact).unwrap(), 1.0);
        assert!((fourth_moment_l(0.5, 2, MomentMode::Exact).unwrap() - 12.0).abs() < 1e-12);
        // p = 1: simple random walk, E L_n^4 = 3n^2 - 2n in both modes
        for n in 1..20 {
            let e = (3 * n * n - 2 * n) as f64;
            assert!((fourth_moment_l(1.0, n, MomentMode::Exact).unwrap() - e).abs() < 1e-9);
            assert!((fourth_moment_l(1.0, n, MomentMode::Asymptotic).unwrap() - e).abs() < 1e-9);
        }
    }

    #[test]
    fn remainder_closes_the_gap() {
        for p in [0.2, 0.5, 0.9] {
            for n in 1..40 {
                let exact = fourth_moment_l(p, n, MomentMode::Exact).unwrap();
                let asym = fourth_moment_l(p, n, MomentMode::Asymptotic).unwrap();
                let rem = fourth_moment_remainder(p, n).unwrap();
                assert!(
                    (exact - asym - rem).abs() <= 1e-9 * exact.abs().max(asym.abs()),
                    "p {p} n {n}"
                );
            }
        }
    }

    #[test]
    fn remainder_is_order_n_q_n() {
        let (p, n) = (0.5, 50u64);
        let rem = fourth_moment_remainder(p, n).unwrap();
        let scale = n as f64 * libm::pow(0.5, n as f64);
        assert!(rem.abs() <= 100.0 * scale, "{rem} vs {scale}");
        assert!(rem < 0.0);
    }

    #[test]
    fn ld_bound_examples() {
        assert_eq!(ld_bound(0.5, 2.0, 1).unwrap(), 1.0);
        assert_eq!(ld_bound(0.5, 4.0, 2).unwrap(), 1.0);
        let v = ld_bound(0.9, 20.0, 2).unwrap();
        assert!((v - 2.0 * libm::exp(-0.81 * (20.0 / libm::sqrt(2.0)) / 5.0)).abs() < 1e-15);
        assert!((v - 0.20232).abs() < 1e-5);
        assert!(ld_bound(0.5, 0.5, 1).is_err());
        assert!(ld_bound(0.5, 1.2, 2).is_err());
    }

    #[test]
    fn gambler_examples() {
        let (single, joint) = gambler_pass_once(0.7, Gap::Finite(1)).unwrap();
        assert!((single - 0.4).abs() < 1e-15);
        assert!((joint - 0.28).abs() < 1e-15);
        let (_, far) = gambler_pass_once(0.7, Gap::Infinite).unwrap();
        assert!((far - 0.16).abs() < 1e-15);
        let (_, big) = gambler_pass_once(0.7, Gap::Finite(200)).unwrap();
        assert!((big - far).abs() < 1e-15);
        assert!(gambler_pass_once(0.5, Gap::Finite(1)).is_err());
    }

    #[test]
    fn gambler_joint_monotone_in_gap() {
        for p in [0.55, 0.7, 0.95] {
            let (single, _) = gambler_pass_once(p, Gap::Infinite).unwrap();
            let mut prev = f64::INFINITY;
            for k in 1..100 {
                let (_, joint) = gambler_pass_once(p, Gap::Finite(k)).unwrap();
                assert!(joint <= prev);
                assert!(joint >= single * single);
                prev = joint;
            }
        }
    }
}

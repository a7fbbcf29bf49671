//! One-step drift of `f(z) = ln(|z|^2 - a)` under the embedded planar walk.
//!
//! Between updates the walk runs straight, so observed at update times it
//! jumps `+-m e_1` or `+-m e_2` (each axis/sign with probability 1/4) with
//! `m ~ Geom(p)`. Outside the disc `|z| <= sqrt(a + 1)` the test function is
//! `ln(|z|^2 - a)`; inside it is 0.

use crate::error::domain;
use crate::Result;

/// Smallest shift for which the drift is certified negative far from the origin,
/// `3/2 + 18 (1 - p) / p^2`.
pub fn admissible_shift(p: f64) -> f64 {
    1.5 + 18.0 * (1.0 - p) / (p * p)
}

/// Parameters of the drift computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConfig {
    p: f64,
    a: f64,
    truncation_tail: f64,
}

impl LyapunovConfig {
    /// Default tail mass left out of the exact sum.
    pub const DEFAULT_TAIL: f64 = 1e-12;

    /// `p` in `(0, 1)`, `a >= 1`, `truncation_tail` in `(0, 1e-6]`.
    pub fn new(p: f64, a: f64, truncation_tail: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain!("p = {p} must lie in (0, 1)"));
        }
        if !(a >= 1.0 && a.is_finite()) {
            return Err(domain!("a = {a} must be at least 1"));
        }
        if !(truncation_tail > 0.0 && truncation_tail <= 1e-6) {
            return Err(domain!(
                "truncation tail {truncation_tail} must lie in (0, 1e-6]"
            ));
        }
        Ok(Self {
            p,
            a,
            truncation_tail,
        })
    }

    /// Same with the default truncation tail.
    pub fn with_default_tail(p: f64, a: f64) -> Result<Self> {
        Self::new(p, a, Self::DEFAULT_TAIL)
    }

    /// Turning probability.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Shift inside the logarithm.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Truncation tail mass.
    pub fn truncation_tail(&self) -> f64 {
        self.truncation_tail
    }

    /// `f(z)`.
    pub fn test_function(&self, z: [i64; 2]) -> f64 {
        let r2 = norm2(z);
        if r2 >= self.a + 1.0 {
            libm::log(r2 - self.a)
        } else {
            0.0
        }
    }
}

/// Drift value together with a bound on the truncated tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftValue {
    /// Exact sum over jump magnitudes `1..=max_jump`.
    pub value: f64,
    /// Upper bound on `|true drift - value|` from the omitted magnitudes.
    pub remainder_bound: f64,
    /// Largest jump magnitude summed exactly.
    pub max_jump: u64,
}

impl DriftValue {
    /// Whether the drift is negative even after adding the remainder bound.
    pub fn certified_negative(&self) -> bool {
        self.value + self.remainder_bound < 0.0
    }
}

#[inline]
fn norm2(z: [i64; 2]) -> f64 {
    let (x, y) = (z[0] as i128, z[1] as i128);
    (x * x + y * y) as f64
}

/// Neumaier compensated sum.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `E[f(z + J) - f(z)]` for the embedded jump `J`.
///
/// Magnitudes up to `K` are summed exactly, with `K` the smallest integer
/// such that `P(m > K) = (1-p)^K` falls below the truncation tail. Landing
/// points outside the disc contribute `ln1p((|z+J|^2 - |z|^2) / (|z|^2 - a))`,
/// computed from exact integer differences. The omitted tail is bounded using
/// `0 <= f(w) <= ln(2|z|^2 + 2m^2)`, `ln(m/K) <= (m-K)/K` and the memoryless
/// property of the geometric law:
/// `(1-p)^K (ln(2|z|^2 + 2K^2) + 2/(K p))`.
pub fn lyapunov_drift(config: &LyapunovConfig, position: [i64; 2]) -> Result<DriftValue> {
    let r2 = norm2(position);
    let a = config.a;
    if !(r2 > a + 1.0) {
        return Err(domain!(
            "position ({}, {}) lies inside the disc of radius sqrt(a + 1)",
            position[0],
            position[1]
        ));
    }
    let p = config.p;
    let log_q = libm::log1p(-p);
    let max_jump = libm::ceil(libm::log(config.truncation_tail) / log_q).max(1.0) as u64;
    let denom = r2 - a;
    let f0 = libm::log(denom);
    let r2_int = {
        let (x, y) = (position[0] as i128, position[1] as i128);
        x * x + y * y
    };

    let mut acc = Compensated::default();
    let mut weight = p / 4.0;
    for m in 1..=max_jump {
        let mi = m as i128;
        for coord in position {
            let coord = coord as i128;
            for sign in [1i128, -1] {
                // |z + s m e|^2 - |z|^2 = 2 s m z_axis + m^2
                let delta = 2 * sign * mi * coord + mi * mi;
                let new_r2 = r2_int + delta;
                let change = if (new_r2 as f64) >= a + 1.0 {
                    libm::log1p(delta as f64 / denom)
                } else {
                    -f0
                };
                acc.add(weight * change);
            }
        }
        weight *= 1.0 - p;
    }

    let kf = max_jump as f64;
    let tail_mass = libm::exp(kf * log_q);
    let remainder_bound = tail_mass * (libm::log(2.0 * r2 + 2.0 * kf * kf) + 2.0 / (kf * p));
    Ok(DriftValue {
        value: acc.value(),
        remainder_bound,
        max_jump,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(LyapunovConfig::new(0.5, 40.0, 1e-12).is_ok());
        assert!(LyapunovConfig::new(1.0, 40.0, 1e-12).is_err());
        assert!(LyapunovConfig::new(0.5, 0.5, 1e-12).is_err());
        assert!(LyapunovConfig::new(0.5, 40.0, 1e-3).is_err());
        assert!(LyapunovConfig::new(0.5, 40.0, 0.0).is_err());
    }

    #[test]
    fn inside_disc_is_rejected() {
        let cfg = LyapunovConfig::with_default_tail(0.5, 40.0).unwrap();
        assert!(lyapunov_drift(&cfg, [6, 0]).is_err());
        assert!(lyapunov_drift(&cfg, [7, 0]).is_ok());
    }

    #[test]
    fn threshold_value() {
        assert!((admissible_shift(0.5) - 37.5).abs() < 1e-12);
    }

    #[test]
    fn far_drift_is_negative_and_small() {
        let cfg = LyapunovConfig::new(0.5, 40.0, 1e-20).unwrap();
        let d = lyapunov_drift(&cfg, [1000, 0]).unwrap();
        assert!(d.certified_negative(), "{d:?}");
        assert!(d.value > -1e-8);
    }

    #[test]
    fn quartic_decay_constant() {
        // Expanding the logarithm to fourth order gives
        // drift * r^4 -> -(a E xi^2 + E xi^4 / 2) along the axis.
        for p in [0.3, 0.5, 0.7] {
            let a = libm::ceil(admissible_shift(p)) + 5.0;
            let cfg = LyapunovConfig::new(p, a, 1e-20).unwrap();
            let e2 = (2.0 - p) / (p * p);
            let e4 = (2.0 - p) * (p * p + 12.0 * (1.0 - p)) / (p * p * p * p);
            let limit = -(a * e2 + e4 / 2.0);
            let r = 2000.0;
            let d = lyapunov_drift(&cfg, [r as i64, 0]).unwrap();
            let scaled = d.value * r * r * r * r;
            assert!(
                (scaled / limit - 1.0).abs() < 1e-3,
                "p = {p}: {scaled} vs {limit}"
            );
        }
    }

    #[test]
    fn matches_naive_evaluation_near_the_disc() {
        // Direct evaluation of f(z+J) - f(z) for a point where many jumps
        // cross the disc.
        let cfg = LyapunovConfig::new(0.3, 10.0, 1e-15).unwrap();
        let z = [5i64, 2];
        let got = lyapunov_drift(&cfg, z).unwrap();
        let mut naive = 0.0;
        let mut w = 0.3 / 4.0;
        for m in 1..=got.max_jump as i64 {
            for (dx, dy) in [(m, 0), (-m, 0), (0, m), (0, -m)] {
                naive += w * (cfg.test_function([z[0] + dx, z[1] + dy]) - cfg.test_function(z));
            }
            w *= 0.7;
        }
        assert!(
            (got.value - naive).abs() < 1e-12,
            "{} vs {naive}",
            got.value
        );
    }
}

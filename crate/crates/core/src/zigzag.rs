//! The zigzag process: the scaling limit of the walk when `p_n ~ a/n`.
//!
//! Turn times form a Poisson process on `(0, inf)` with intensity `b/x dx`,
//! `b = (2d-1)a/(2d)`. The gaps between turns are labelled with directions:
//! the interval containing time 1 gets a uniform label, and moving away from
//! it each new interval gets a label uniform over the `2d - 1` directions
//! different from its already-labelled neighbour. `Z_t` is the signed
//! occupation time of each axis. The process is sampled on a window
//! `(eps, T]`; occupation before `eps` is dropped, which moves each
//! coordinate by at most `eps`.

use alloc::vec::Vec;
use rand::RngCore;

use crate::error::domain;
use crate::rng;
use crate::walk::Direction;
use crate::Result;

/// `b = (2d - 1) a / (2d)`, the rate of actual direction changes.
pub fn b_from_a(a: f64, d: usize) -> f64 {
    let two_d = 2.0 * d as f64;
    (two_d - 1.0) * a / two_d
}

/// Points of the `b/x dx` Poisson process inside `(epsilon, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PppRealization {
    points: Vec<f64>,
    epsilon: f64,
    horizon: f64,
    intensity_b: f64,
}

impl PppRealization {
    /// Wraps explicit points; they must be strictly increasing inside `(epsilon, horizon]`.
    pub fn from_points(
        points: Vec<f64>,
        epsilon: f64,
        horizon: f64,
        intensity_b: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= horizon && horizon.is_finite()) {
            return Err(domain!("window ({epsilon}, {horizon}] is invalid"));
        }
        if !(intensity_b > 0.0) {
            return Err(domain!("intensity b = {intensity_b} must be positive"));
        }
        let mut prev = epsilon;
        for &x in &points {
            if !(x > prev && x <= horizon) {
                return Err(domain!(
                    "points must increase strictly inside ({epsilon}, {horizon}]"
                ));
            }
            prev = x;
        }
        Ok(Self {
            points,
            epsilon,
            horizon,
            intensity_b,
        })
    }

    /// Sorted points.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Lower end of the window.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Upper end of the window.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Intensity constant `b`.
    pub fn intensity_b(&self) -> f64 {
        self.intensity_b
    }

    /// Number of points in `(lo, hi]`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        let start = self.points.partition_point(|&x| x <= lo);
        let end = self.points.partition_point(|&x| x <= hi);
        end.saturating_sub(start)
    }
}

/// Samples the process on `(epsilon, horizon]`.
///
/// In log time the process is homogeneous with rate `b`, so points are
/// generated from exponential gaps starting at `ln(epsilon)`. A point that
/// rounds onto its predecessor is redrawn.
pub fn sample_ppp<R: RngCore + ?Sized>(
    b: f64,
    epsilon: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<PppRealization> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(domain!("intensity b = {b} must be positive"));
    }
    if !(epsilon > 0.0 && epsilon <= horizon && horizon.is_finite()) {
        return Err(domain!("need 0 < epsilon <= T, got ({epsilon}, {horizon})"));
    }
    let end = libm::log(horizon);
    let mut u = libm::log(epsilon);
    let mut points = Vec::new();
    let mut prev = epsilon;
    loop {
        let next = u + rng::exponential(rng, b);
        if next > end {
            break;
        }
        let x = libm::exp(next);
        if x > horizon {
            break;
        }
        if x <= prev {
            continue;
        }
        points.push(x);
        prev = x;
        u = next;
    }
    Ok(PppRealization {
        points,
        epsilon,
        horizon,
        intensity_b: b,
    })
}

/// Intervals `(boundaries[i], boundaries[i+1]]` with their direction labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledIntervals {
    d: usize,
    boundaries: Vec<f64>,
    labels: Vec<Direction>,
}

impl LabeledIntervals {
    /// Builds from explicit boundaries (`epsilon`, points..., `T`) and labels.
    ///
    /// Adjacent labels must differ.
    pub fn new(d: usize, boundaries: Vec<f64>, labels: Vec<Direction>) -> Result<Self> {
        if d == 0 {
            return Err(domain!("dimension must be positive"));
        }
        if boundaries.len() < 2 || labels.len() + 1 != boundaries.len() {
            return Err(domain!("need one label per interval"));
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) || !(boundaries[0] > 0.0) {
            return Err(domain!(
                "boundaries must be positive and strictly increasing"
            ));
        }
        if labels.iter().any(|l| l.axis() >= d) {
            return Err(domain!("label axis out of range for d = {d}"));
        }
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(domain!("adjacent labels must differ"));
        }
        Ok(Self {
            d,
            boundaries,
            labels,
        })
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// `epsilon`, the process points, then `T`.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// One label per interval.
    pub fn labels(&self) -> &[Direction] {
        &self.labels
    }

    /// `(left, right, label)` triples.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, Direction)> + '_ {
        self.boundaries
            .windows(2)
            .zip(&self.labels)
            .map(|(w, &l)| (w[0], w[1], l))
    }

    /// Index of the interval `(left, right]` containing `t`, if any.
    pub fn interval_of(&self, t: f64) -> Option<usize> {
        let (first, last) = (self.boundaries[0], *self.boundaries.last()?);
        if !(t > first && t <= last) {
            return None;
        }
        Some(self.boundaries.partition_point(|&x| x < t) - 1)
    }
}

/// Labels the gaps of `ppp`; requires `epsilon < 1 <= T`.
pub fn label_intervals<R: RngCore + ?Sized>(
    ppp: &PppRealization,
    d: usize,
    rng: &mut R,
) -> Result<LabeledIntervals> {
    if d == 0 {
        return Err(domain!("dimension must be positive"));
    }
    if !(ppp.epsilon < 1.0 && 1.0 <= ppp.horizon) {
        return Err(domain!(
            "anchor time 1 is outside the window ({}, {}]",
            ppp.epsilon,
            ppp.horizon
        ));
    }
    let mut boundaries = Vec::with_capacity(ppp.points.len() + 2);
    boundaries.push(ppp.epsilon);
    boundaries.extend_from_slice(&ppp.points);
    boundaries.push(ppp.horizon);
    let count = boundaries.len() - 1;
    let anchor = boundaries.partition_point(|&x| x < 1.0) - 1;

    let mut labels = alloc::vec![Direction::from_index(0); count];
    labels[anchor] = Direction::uniform(rng, d);
    for i in (0..anchor).rev() {
        labels[i] = labels[i + 1].uniform_other(rng, d);
    }
    for i in anchor + 1..count {
        labels[i] = labels[i - 1].uniform_other(rng, d);
    }
    Ok(LabeledIntervals {
        d,
        boundaries,
        labels,
    })
}

/// Truncated zigzag trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ZigzagPath {
    intervals: LabeledIntervals,
    /// Position at each boundary, flattened `d` at a time.
    at_boundary: Vec<f64>,
}

impl ZigzagPath {
    /// Builds the path of a labelled interval sequence.
    pub fn new(intervals: LabeledIntervals) -> Self {
        let d = intervals.d;
        let mut at_boundary = alloc::vec![0.0; d * intervals.boundaries.len()];
        for (i, (left, right, label)) in intervals.intervals().enumerate() {
            let (done, rest) = at_boundary.split_at_mut((i + 1) * d);
            let next = &mut rest[..d];
            next.copy_from_slice(&done[i * d..]);
            next[label.axis()] += label.sign() as f64 * (right - left);
        }
        Self {
            intervals,
            at_boundary,
        }
    }

    /// Labelled intervals.
    pub fn intervals(&self) -> &LabeledIntervals {
        &self.intervals
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.intervals.d
    }

    /// `Z_t` for `t` in `(epsilon, T]`.
    pub fn position_at(&self, t: f64) -> Result<Vec<f64>> {
        let i = self.intervals.interval_of(t).ok_or_else(|| {
            domain!(
                "t = {t} outside ({}, {}]",
                self.intervals.boundaries[0],
                self.intervals.boundaries[self.intervals.boundaries.len() - 1]
            )
        })?;
        let d = self.intervals.d;
        let mut z = self.at_boundary[i * d..(i + 1) * d].to_vec();
        let label = self.intervals.labels[i];
        z[label.axis()] += label.sign() as f64 * (t - self.intervals.boundaries[i]);
        Ok(z)
    }

    /// `Z` evaluated at each time of `times`.
    pub fn trajectory(&self, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        times.iter().map(|&t| self.position_at(t)).collect()
    }

    /// Euclidean norm of `Z_t`.
    pub fn norm_at(&self, t: f64) -> Result<f64> {
        Ok(libm::sqrt(self.position_at(t)?.iter().map(|v| v * v).sum()))
    }
}

/// Samples a zigzag path with turning constant `a` (so `b = b_from_a(a, d)`) on `(epsilon, T]`.
pub fn sample_zigzag<R: RngCore + ?Sized>(
    a: f64,
    d: usize,
    epsilon: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<ZigzagPath> {
    if d == 0 {
        return Err(domain!("dimension must be positive"));
    }
    let ppp = sample_ppp(b_from_a(a, d), epsilon, horizon, rng)?;
    Ok(ZigzagPath::new(label_intervals(&ppp, d, rng)?))
}

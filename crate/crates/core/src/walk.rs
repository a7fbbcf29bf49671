//! Trajectories of the conservative walk.
//!
//! `Y_1` is uniform over the `2d` unit vectors. For `n >= 2`, with
//! probability `p_n` the direction `Y_n` is redrawn uniformly (the redraw may
//! repeat the old direction), otherwise `Y_n = Y_{n-1}`. A step at which the
//! direction is redrawn is an *update*; paths store only the updates.

use alloc::vec;
use alloc::vec::Vec;
use rand::RngCore;

use crate::rng;
use crate::schedule::{Schedule, ScheduleKind};

/// A signed lattice axis, one of `+-e_1, ..., +-e_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    axis: u16,
    negative: bool,
}

impl Direction {
    /// `sign * e_axis`; any negative `sign` means `-e_axis`.
    pub fn new(axis: usize, sign: i64) -> Self {
        Self {
            axis: axis as u16,
            negative: sign < 0,
        }
    }

    /// Axis in `0..d`.
    #[inline]
    pub fn axis(self) -> usize {
        self.axis as usize
    }

    /// `+1` or `-1`.
    #[inline]
    pub fn sign(self) -> i64 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    /// Dense index in `0..2d`: `2 * axis + (sign < 0)`.
    #[inline]
    pub fn index(self) -> usize {
        2 * self.axis as usize + self.negative as usize
    }

    /// Inverse of [`Direction::index`].
    #[inline]
    pub fn from_index(i: usize) -> Self {
        Self {
            axis: (i / 2) as u16,
            negative: i % 2 == 1,
        }
    }

    /// The `2d` directions in index order.
    pub fn all(d: usize) -> impl Iterator<Item = Direction> {
        (0..2 * d).map(Direction::from_index)
    }

    /// Uniform over the `2d` directions.
    #[inline]
    pub fn uniform<R: RngCore + ?Sized>(rng: &mut R, d: usize) -> Self {
        Self::from_index(rng::index(rng, 2 * d))
    }

    /// Uniform over the `2d - 1` directions different from `self`.
    #[inline]
    pub fn uniform_other<R: RngCore + ?Sized>(self, rng: &mut R, d: usize) -> Self {
        let mut i = rng::index(rng, 2 * d - 1);
        if i >= self.index() {
            i += 1;
        }
        Self::from_index(i)
    }

    /// Whether the two directions lie on different axes.
    #[inline]
    pub fn is_perpendicular(self, other: Direction) -> bool {
        self.axis != other.axis
    }

    /// The opposite direction.
    #[inline]
    pub fn reversed(self) -> Self {
        Self {
            axis: self.axis,
            negative: !self.negative,
        }
    }
}

/// Position, current direction and time of a walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkState {
    /// Lattice position `S_n`.
    pub position: Vec<i64>,
    /// Direction of the last step `Y_n` (meaningless at time 0).
    pub direction: Direction,
    /// Number of steps taken.
    pub time: u64,
}

impl WalkState {
    /// Time 0 at `start`.
    pub fn at(start: Vec<i64>) -> Self {
        Self {
            position: start,
            direction: Direction::new(0, 1),
            time: 0,
        }
    }

    /// Time 0 at the origin of `Z^d`.
    pub fn origin(d: usize) -> Self {
        Self::at(vec![0; d])
    }

    /// Dimension of the lattice.
    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// Takes one step in place and reports whether the direction was redrawn.
    /// The first step is always a redraw.
    pub fn advance<R: RngCore + ?Sized>(&mut self, schedule: &Schedule, rng: &mut R) -> bool {
        let n = self.time + 1;
        let p = if n == 1 { 1.0 } else { schedule.p_at(n) };
        let updated = rng::bernoulli(rng, p);
        if updated {
            self.direction = Direction::uniform(rng, self.dim());
        }
        self.position[self.direction.axis()] += self.direction.sign();
        self.time = n;
        updated
    }
}

/// One step of the walk from `state`.
pub fn step<R: RngCore + ?Sized>(state: &WalkState, schedule: &Schedule, rng: &mut R) -> WalkState {
    let mut next = state.clone();
    next.advance(schedule, rng);
    next
}

/// An update: at step `update_time` the direction was redrawn to `new_direction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TurnEvent {
    /// Step index `tau_k >= 1`.
    pub update_time: u64,
    /// `Y_{tau_k}`.
    pub new_direction: Direction,
}

/// A maximal run of steps between consecutive updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    /// Direction of every step in the run.
    pub direction: Direction,
    /// Index of the first step of the run.
    pub first_step: u64,
    /// Number of steps in the run (at least 1).
    pub len: u64,
}

/// A trajectory stored as its updates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    /// `S_0`.
    pub start: Vec<i64>,
    /// Updates with strictly increasing times, all within `1..=horizon`.
    pub events: Vec<TurnEvent>,
    /// Number of steps.
    pub horizon: u64,
}

impl Path {
    /// Dimension of the lattice.
    pub fn dim(&self) -> usize {
        self.start.len()
    }

    /// Runs of constant direction covering steps `1..=horizon`.
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.events.iter().enumerate().map(move |(k, ev)| {
            let end = self
                .events
                .get(k + 1)
                .map_or(self.horizon, |next| next.update_time - 1);
            Segment {
                direction: ev.new_direction,
                first_step: ev.update_time,
                len: end + 1 - ev.update_time,
            }
        })
    }

    /// `S_t` for `0 <= t <= horizon`.
    pub fn position_at(&self, t: u64) -> Vec<i64> {
        let mut pos = self.start.clone();
        for seg in self.segments() {
            if seg.first_step > t {
                break;
            }
            let steps = seg.len.min(t + 1 - seg.first_step);
            pos[seg.direction.axis()] += seg.direction.sign() * steps as i64;
        }
        pos
    }

    /// `S_horizon`.
    pub fn endpoint(&self) -> Vec<i64> {
        self.position_at(self.horizon)
    }

    /// `Y_t` for `1 <= t <= horizon`.
    pub fn direction_at(&self, t: u64) -> Option<Direction> {
        if t == 0 || t > self.horizon {
            return None;
        }
        let k = self.events.partition_point(|e| e.update_time <= t);
        k.checked_sub(1).map(|k| self.events[k].new_direction)
    }

    /// Every position `S_0, ..., S_horizon`. Meant for tests and dense export.
    pub fn dense(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.horizon as usize + 1);
        let mut pos = self.start.clone();
        out.push(pos.clone());
        for seg in self.segments() {
            for _ in 0..seg.len {
                pos[seg.direction.axis()] += seg.direction.sign();
                out.push(pos.clone());
            }
        }
        out
    }

    /// Number of times `1 <= n <= horizon` with `S_n = target`.
    pub fn visits(&self, target: &[i64]) -> u64 {
        visits(self, target)
    }
}

/// Counts the times `1 <= n <= horizon` at which the path sits on `target`.
///
/// Works run by run: a run of length `L` leaving `P` along `s e_j` visits
/// `target` exactly once if `target - P = m s e_j` with `1 <= m <= L`.
pub fn visits(path: &Path, target: &[i64]) -> u64 {
    visits_after(path, target, 0)
}

/// Counts the times `after < n <= horizon` with `S_n = target`.
pub fn visits_after(path: &Path, target: &[i64], after: u64) -> u64 {
    assert_eq!(target.len(), path.dim(), "target dimension mismatch");
    let mut pos = path.start.clone();
    let mut count = 0;
    for seg in path.segments() {
        let last = seg.first_step + seg.len - 1;
        if last > after {
            // step first_step + m - 1 ends m units along the run
            let min_m = (after + 2).saturating_sub(seg.first_step).max(1);
            count += segment_hits(&pos, seg.direction, min_m, seg.len, target) as u64;
        }
        pos[seg.direction.axis()] += seg.direction.sign() * seg.len as i64;
    }
    count
}

#[inline]
fn segment_hits(from: &[i64], dir: Direction, min_m: u64, len: u64, target: &[i64]) -> bool {
    let axis = dir.axis();
    for (j, (a, b)) in from.iter().zip(target).enumerate() {
        if j != axis && a != b {
            return false;
        }
    }
    let m = (target[axis] - from[axis]) * dir.sign();
    m >= 1 && (m as u64) >= min_m && m as u64 <= len
}

/// Direct simulation: one Bernoulli trial per step.
pub fn simulate<R: RngCore + ?Sized>(
    d: usize,
    schedule: &Schedule,
    n_steps: u64,
    rng: &mut R,
) -> Path {
    let mut state = WalkState::origin(d);
    let mut events = Vec::new();
    for _ in 0..n_steps {
        if state.advance(schedule, rng) {
            events.push(TurnEvent {
                update_time: state.time,
                new_direction: state.direction,
            });
        }
    }
    Path {
        start: vec![0; d],
        events,
        horizon: n_steps,
    }
}

/// Event-driven simulation: samples only the update times.
///
/// Same law as [`simulate`]. Builds an [`EventWalker`] for the horizon; reuse
/// one walker when drawing many paths.
pub fn simulate_events<R: RngCore + ?Sized>(
    d: usize,
    schedule: &Schedule,
    n_steps: u64,
    rng: &mut R,
) -> Path {
    EventWalker::new(d, schedule, n_steps).sample_path(rng)
}

/// Below this turning probability the next update is found by inverting the
/// survival product instead of step-by-step Bernoulli trials.
pub const THINNING_THRESHOLD: f64 = 0.1;

/// Cumulative log-survival `C[k] = sum_{j <= k, p_j < 1} ln(1 - p_j)`, plus
/// the steps with `p_j = 1`.
#[derive(Debug, Clone)]
struct SurvivalTable {
    log_survival: Vec<f64>,
    certain: Vec<u64>,
}

impl SurvivalTable {
    fn new(schedule: &Schedule, horizon: u64) -> Self {
        let mut log_survival = Vec::with_capacity(horizon as usize + 1);
        let mut certain = Vec::new();
        let mut acc = 0.0;
        log_survival.push(0.0);
        for j in 1..=horizon {
            let p = schedule.p_at(j);
            if p >= 1.0 {
                certain.push(j);
            } else {
                acc += libm::log1p(-p);
            }
            log_survival.push(acc);
        }
        Self {
            log_survival,
            certain,
        }
    }

    /// First update strictly after `m`, by inversion of
    /// `P(no update in m+1..=k) = exp(C[k] - C[m])` against one uniform.
    fn invert<R: RngCore + ?Sized>(&self, m: u64, rng: &mut R) -> Option<u64> {
        let target = self.log_survival[m as usize] + libm::log(rng::open01(rng));
        let tail = &self.log_survival[m as usize + 1..];
        let k = tail.partition_point(|c| *c >= target);
        let by_survival = (k < tail.len()).then(|| m + 1 + k as u64);
        let c = self.certain.partition_point(|j| *j <= m);
        let by_certain = self.certain.get(c).copied();
        match (by_survival, by_certain) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

#[derive(Debug, Clone)]
enum UpdateLaw {
    Geometric { log_q: f64 },
    Never,
    Table(SurvivalTable),
}

/// Event-driven sampler for a fixed `(d, schedule, horizon)`.
///
/// For constant schedules the gaps between updates are `Geom(p)` and are
/// drawn by inversion. Otherwise steps with `p_n >= THINNING_THRESHOLD` are
/// thinned one at a time and the rest are skipped by inverting the survival
/// product, tracked in log space in a table built once here.
#[derive(Debug, Clone)]
pub struct EventWalker<'a> {
    d: usize,
    schedule: &'a Schedule,
    horizon: u64,
    law: UpdateLaw,
}

impl<'a> EventWalker<'a> {
    /// Prepares the sampler. `O(horizon)` time and memory unless the schedule is constant.
    pub fn new(d: usize, schedule: &'a Schedule, horizon: u64) -> Self {
        assert!(d >= 1, "dimension must be at least 1");
        let law = match schedule.kind() {
            ScheduleKind::Constant { p } if *p >= 1.0 => UpdateLaw::Geometric {
                log_q: f64::NEG_INFINITY,
            },
            ScheduleKind::Constant { p } if *p <= 0.0 => UpdateLaw::Never,
            ScheduleKind::Constant { p } => UpdateLaw::Geometric {
                log_q: libm::log1p(-p),
            },
            _ => UpdateLaw::Table(SurvivalTable::new(schedule, horizon)),
        };
        Self {
            d,
            schedule,
            horizon,
            law,
        }
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of steps per path.
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// First update time strictly after `m`, if it is within the horizon.
    pub fn next_update<R: RngCore + ?Sized>(&self, m: u64, rng: &mut R) -> Option<u64> {
        if m >= self.horizon {
            return None;
        }
        if m == 0 {
            return Some(1);
        }
        let t = match &self.law {
            UpdateLaw::Never => return None,
            UpdateLaw::Geometric { log_q } => {
                if *log_q == f64::NEG_INFINITY {
                    m + 1
                } else {
                    m.saturating_add(rng::geometric_with_log_q(rng, *log_q))
                }
            }
            UpdateLaw::Table(table) => {
                let mut k = m + 1;
                loop {
                    if k > self.horizon {
                        return None;
                    }
                    let p = self.schedule.p_at(k);
                    if p < THINNING_THRESHOLD {
                        break table.invert(k - 1, rng)?;
                    }
                    if rng::bernoulli(rng, p) {
                        break k;
                    }
                    k += 1;
                }
            }
        };
        (t <= self.horizon).then_some(t)
    }

    /// Streams the updates of one path, in time order.
    pub fn for_each_event<R: RngCore + ?Sized>(&self, rng: &mut R, mut f: impl FnMut(TurnEvent)) {
        let mut t = 0;
        while let Some(next) = self.next_update(t, rng) {
            f(TurnEvent {
                update_time: next,
                new_direction: Direction::uniform(rng, self.d),
            });
            t = next;
        }
    }

    /// One full path from the origin.
    pub fn sample_path<R: RngCore + ?Sized>(&self, rng: &mut R) -> Path {
        let mut events = Vec::new();
        self.for_each_event(rng, |e| events.push(e));
        Path {
            start: vec![0; self.d],
            events,
            horizon: self.horizon,
        }
    }

    /// Writes `S_horizon` of a fresh path into `pos` (which is overwritten).
    pub fn sample_endpoint<R: RngCore + ?Sized>(&self, rng: &mut R, pos: &mut [i64]) {
        debug_assert_eq!(pos.len(), self.d);
        pos.iter_mut().for_each(|x| *x = 0);
        let mut last: Option<TurnEvent> = None;
        self.for_each_event(rng, |e| {
            if let Some(prev) = last {
                let dir = prev.new_direction;
                pos[dir.axis()] += dir.sign() * (e.update_time - prev.update_time) as i64;
            }
            last = Some(e);
        });
        if let Some(prev) = last {
            let dir = prev.new_direction;
            pos[dir.axis()] += dir.sign() * (self.horizon + 1 - prev.update_time) as i64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn straight(len: u64) -> Path {
        Path {
            start: vec![0, 0],
            events: vec![TurnEvent {
                update_time: 1,
                new_direction: Direction::new(0, 1),
            }],
            horizon: len,
        }
    }

    #[test]
    fn direction_indexing() {
        for d in 1..5 {
            let all: Vec<_> = Direction::all(d).collect();
            assert_eq!(all.len(), 2 * d);
            for (i, dir) in all.iter().enumerate() {
                assert_eq!(dir.index(), i);
                assert_eq!(dir.reversed().reversed(), *dir);
                assert!(!dir.is_perpendicular(dir.reversed()));
            }
        }
        assert!(Direction::new(0, 1).is_perpendicular(Direction::new(1, -1)));
    }

    #[test]
    fn uniform_other_never_repeats() {
        let mut r = stream(5, 0, 0);
        for d in 1..4 {
            for i in 0..2 * d {
                let from = Direction::from_index(i);
                for _ in 0..200 {
                    let to = from.uniform_other(&mut r, d);
                    assert_ne!(to, from);
                    assert!(to.index() < 2 * d);
                }
            }
        }
    }

    #[test]
    fn zero_turning_keeps_direction() {
        let s = Schedule::constant(0.0).unwrap();
        let mut r = stream(1, 0, 0);
        let mut state = WalkState::origin(3);
        state.advance(&s, &mut r);
        let first = state.direction;
        for _ in 0..100 {
            assert!(!state.advance(&s, &mut r));
            assert_eq!(state.direction, first);
        }
        let norm: i64 = state.position.iter().map(|x| x.abs()).sum();
        assert_eq!(norm, 101);
    }

    #[test]
    fn empty_paths() {
        let s = Schedule::constant(0.5).unwrap();
        let mut r = stream(1, 0, 0);
        for path in [
            simulate(2, &s, 0, &mut r),
            simulate_events(2, &s, 0, &mut r),
        ] {
            assert!(path.events.is_empty());
            assert_eq!(path.endpoint(), vec![0, 0]);
            assert_eq!(path.visits(&[0, 0]), 0);
        }
    }

    #[test]
    fn constant_one_updates_every_step() {
        let s = Schedule::constant(1.0).unwrap();
        let mut r = stream(2, 0, 0);
        let path = simulate_events(2, &s, 50, &mut r);
        let times: Vec<u64> = path.events.iter().map(|e| e.update_time).collect();
        assert_eq!(times, (1..=50).collect::<Vec<_>>());
    }

    #[test]
    fn straight_path_visits() {
        let p = straight(5);
        assert_eq!(p.visits(&[3, 0]), 1);
        assert_eq!(p.visits(&[0, 0]), 0);
        assert_eq!(p.visits(&[6, 0]), 0);
        assert_eq!(p.visits(&[2, 1]), 0);
        assert_eq!(p.endpoint(), vec![5, 0]);
        assert_eq!(p.direction_at(3), Some(Direction::new(0, 1)));
        assert_eq!(p.direction_at(6), None);
    }

    #[test]
    fn paths_respect_unit_steps() {
        let s = Schedule::critical(1.0, 2).unwrap();
        let mut r = stream(9, 0, 0);
        for _ in 0..50 {
            let path = simulate_events(3, &s, 300, &mut r);
            let dense = path.dense();
            assert_eq!(dense.len(), 301);
            for (t, w) in dense.windows(2).enumerate() {
                let diff: i64 = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum();
                assert_eq!(diff, 1, "step {t}");
            }
            assert_eq!(dense[300], path.endpoint());
            let l1: i64 = path.endpoint().iter().map(|x| x.abs()).sum();
            assert!(l1 <= 300);
            assert!(path
                .events
                .windows(2)
                .all(|w| w[0].update_time < w[1].update_time));
        }
    }

    #[test]
    fn endpoint_fast_path_matches_path() {
        let schedules = [
            Schedule::constant(0.3).unwrap(),
            Schedule::power_decay(1.0, 0.7, 1).unwrap(),
            Schedule::periodic(vec![0.05, 0.6], 2).unwrap(),
        ];
        for s in &schedules {
            let walker = EventWalker::new(2, s, 500);
            let mut a = stream(4, 0, 0);
            let mut b = stream(4, 0, 0);
            let mut pos = [0i64; 2];
            for _ in 0..100 {
                walker.sample_endpoint(&mut a, &mut pos);
                let path = walker.sample_path(&mut b);
                assert_eq!(path.endpoint(), pos.to_vec());
            }
        }
    }

    #[test]
    fn survival_inversion_mean_gap() {
        // p_n = 0.05 constant but routed through the table.
        let s = Schedule::periodic(vec![0.05], 1).unwrap();
        let walker = EventWalker::new(1, &s, 3_000_000);
        let mut r = stream(8, 0, 0);
        let n = 100_000;
        let mut sum = 0u64;
        let mut t = 1;
        for _ in 0..n {
            let next = walker.next_update(t, &mut r).unwrap();
            sum += next - t;
            t = next;
            if t > 2_500_000 {
                t = 1;
            }
        }
        let mean = sum as f64 / n as f64;
        let sd = libm::sqrt(0.95) / 0.05;
        assert!(
            (mean - 20.0).abs() < 4.0 * sd / libm::sqrt(n as f64),
            "mean {mean}"
        );
    }
}

//! Turning-probability schedules and their recurrence/transience regimes.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// Parametric family of the turning probabilities `p_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// `p_n = p` for every `n`.
    Constant {
        /// Turning probability.
        p: f64,
    },
    /// `p_n = a / n` for `n >= n0`.
    Critical {
        /// Numerator; must not exceed `n0`.
        a: f64,
        /// First index of the `a / n` tail.
        n0: u64,
    },
    /// `p_n = c * n^(-gamma)` for `n >= n0`, with `gamma` in `(0, 1)`.
    PowerDecay {
        /// Prefactor.
        c: f64,
        /// Decay exponent.
        gamma: f64,
        /// First index of the power tail.
        n0: u64,
    },
    /// `p_n = values[(n - n0) mod r]` for `n >= n0`, `r = values.len()`.
    Periodic {
        /// One period of turning probabilities.
        values: Vec<f64>,
        /// First index of the periodic tail.
        n0: u64,
    },
    /// `p_n = values[n - 1]`; the last value repeats beyond the list.
    Explicit {
        /// Turning probabilities for `n = 1, 2, ...`.
        values: Vec<f64>,
    },
}

/// A validated turning-probability sequence.
///
/// `prefix_p` is used for `n < n0` in the families that have an `n0`.
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    prefix_p: f64,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidSchedule(format!(
            "{name} = {p} is not a probability"
        )))
    }
}

impl Schedule {
    /// Validates `kind` and `prefix_p`.
    pub fn new(kind: ScheduleKind, prefix_p: f64) -> Result<Self> {
        check_prob("prefix_p", prefix_p)?;
        match &kind {
            ScheduleKind::Constant { p } => check_prob("p", *p)?,
            ScheduleKind::Critical { a, n0 } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::InvalidSchedule(format!("a = {a} must be positive")));
                }
                if *n0 == 0 {
                    return Err(Error::InvalidSchedule("n0 must be at least 1".to_string()));
                }
                if *a > *n0 as f64 {
                    return Err(Error::InvalidSchedule(format!(
                        "a = {a} exceeds n0 = {n0}, so p_n0 = a/n0 > 1"
                    )));
                }
            }
            ScheduleKind::PowerDecay { c, gamma, n0 } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::InvalidSchedule(format!("c = {c} must be positive")));
                }
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return Err(Error::InvalidSchedule(format!(
                        "gamma = {gamma} must lie in (0, 1)"
                    )));
                }
                if *n0 == 0 {
                    return Err(Error::InvalidSchedule("n0 must be at least 1".to_string()));
                }
                let first = c * libm::pow(*n0 as f64, -gamma);
                if first > 1.0 {
                    return Err(Error::InvalidSchedule(format!(
                        "c * n0^(-gamma) = {first} exceeds 1"
                    )));
                }
            }
            ScheduleKind::Periodic { values, n0 } => {
                if values.is_empty() {
                    return Err(Error::InvalidSchedule(
                        "periodic values are empty".to_string(),
                    ));
                }
                if *n0 == 0 {
                    return Err(Error::InvalidSchedule("n0 must be at least 1".to_string()));
                }
                for v in values {
                    check_prob("periodic value", *v)?;
                }
            }
            ScheduleKind::Explicit { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidSchedule(
                        "explicit values are empty".to_string(),
                    ));
                }
                for v in values {
                    check_prob("explicit value", *v)?;
                }
            }
        }
        Ok(Self { kind, prefix_p })
    }

    /// `p_n = p`.
    pub fn constant(p: f64) -> Result<Self> {
        Self::new(ScheduleKind::Constant { p }, 1.0)
    }

    /// `p_n = a / n` for `n >= n0`.
    pub fn critical(a: f64, n0: u64) -> Result<Self> {
        Self::new(ScheduleKind::Critical { a, n0 }, 1.0)
    }

    /// `p_n = c n^(-gamma)` for `n >= n0`.
    pub fn power_decay(c: f64, gamma: f64, n0: u64) -> Result<Self> {
        Self::new(ScheduleKind::PowerDecay { c, gamma, n0 }, 1.0)
    }

    /// Periodic tail starting at `n0`.
    pub fn periodic(values: Vec<f64>, n0: u64) -> Result<Self> {
        Self::new(ScheduleKind::Periodic { values, n0 }, 1.0)
    }

    /// Explicit list, last value repeated.
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        Self::new(ScheduleKind::Explicit { values }, 1.0)
    }

    /// Replaces the prefix probability.
    pub fn with_prefix(self, prefix_p: f64) -> Result<Self> {
        Self::new(self.kind, prefix_p)
    }

    /// The parametric family.
    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// Probability used before `n0`.
    pub fn prefix_p(&self) -> f64 {
        self.prefix_p
    }

    /// Turning probability at step `n >= 1`.
    pub fn p_at(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        match &self.kind {
            ScheduleKind::Constant { p } => *p,
            ScheduleKind::Critical { a, n0 } => {
                if n < *n0 {
                    self.prefix_p
                } else {
                    a / n as f64
                }
            }
            ScheduleKind::PowerDecay { c, gamma, n0 } => {
                if n < *n0 {
                    self.prefix_p
                } else {
                    c * libm::pow(n as f64, -gamma)
                }
            }
            ScheduleKind::Periodic { values, n0 } => {
                if n < *n0 {
                    self.prefix_p
                } else {
                    values[((n - n0) % values.len() as u64) as usize]
                }
            }
            ScheduleKind::Explicit { values } => {
                let i = (n.max(1) - 1).min(values.len() as u64 - 1);
                values[i as usize]
            }
        }
    }

    /// `Some(p)` when `p_n = p` for every `n >= 2`.
    pub fn homogeneous_value(&self) -> Option<f64> {
        match &self.kind {
            ScheduleKind::Constant { p } => Some(*p),
            ScheduleKind::Periodic { values, n0 } => {
                let v = values[0];
                let flat = values.iter().all(|x| *x == v);
                (flat && (*n0 <= 2 || self.prefix_p == v)).then_some(v)
            }
            ScheduleKind::Explicit { values } => {
                let v = *values.last().unwrap();
                values.iter().skip(1).all(|x| *x == v).then_some(v)
            }
            _ => None,
        }
    }

    /// The repeating block of an eventually periodic schedule.
    fn periodic_tail(&self) -> Option<&[f64]> {
        match &self.kind {
            ScheduleKind::Constant { p } => Some(core::slice::from_ref(p)),
            ScheduleKind::Periodic { values, .. } => Some(values),
            ScheduleKind::Explicit { values } => {
                Some(core::slice::from_ref(values.last().unwrap()))
            }
            _ => None,
        }
    }

    /// Whether `sum p_n < infinity`, i.e. the walk turns finitely often.
    pub fn is_summable(&self) -> bool {
        self.periodic_tail()
            .is_some_and(|tail| tail.iter().all(|v| *v == 0.0))
    }

    /// Classifies the walk in dimension `d` against the known theorems.
    pub fn classify(&self, d: usize) -> RegimeClassification {
        classify_regime(self, d)
    }
}

/// Recurrence/transience verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regime {
    /// Visits the origin infinitely often almost surely.
    Recurrent,
    /// `|S_n| -> infinity` almost surely.
    StronglyTransient,
    /// `P(|S_n| -> infinity) = 0`.
    NotStronglyTransient,
    /// Strong transience is conjectured but not proven.
    ConjecturedStronglyTransient,
    /// No known result applies.
    Unknown,
}

impl Regime {
    /// Stable identifier used in JSON output.
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Recurrent => "Recurrent",
            Regime::StronglyTransient => "StronglyTransient",
            Regime::NotStronglyTransient => "NotStronglyTransient",
            Regime::ConjecturedStronglyTransient => "ConjecturedStronglyTransient",
            Regime::Unknown => "Unknown",
        }
    }
}

/// Result of [`classify_regime`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeClassification {
    /// The verdict with highest priority among the results that apply.
    pub regime: Regime,
    /// Name of the result backing `regime`; empty for [`Regime::Unknown`].
    pub theorem_ref: String,
    /// Every hypothesis evaluated, in evaluation order.
    pub checked_conditions: Vec<(String, bool)>,
    /// Decay margin used for the power-type hypotheses, when one was needed.
    pub epsilon: Option<f64>,
}

/// Homogeneous 2-d recurrence: `d = 2` and `p_n = p` in `(0, 1)` for `n >= 2`.
pub const HOMOGENEOUS_RECURRENCE_2D: &str = "homogeneous-recurrence-2d";
/// 2-d strong transience under `p_n < n^(-1/2 - eps)` eventually.
pub const POWER_DECAY_TRANSIENCE_2D: &str = "power-decay-strong-transience-2d";
/// Strong transience for `d >= 2` under the window-ratio, log-dominance and
/// local-limit summability hypotheses.
pub const REGULAR_DECAY_TRANSIENCE: &str = "regular-decay-strong-transience";
/// Eventually periodic schedules in `d = 2` are not strongly transient.
pub const PERIODIC_2D: &str = "periodic-not-strongly-transient-2d";
/// Conjectured strong transience for `p_n = a/n`, `d >= 2`.
pub const CRITICAL_CONJECTURE: &str = "critical-strong-transience-conjecture";
/// Summable `p_n`: finitely many turns, then a straight escape.
pub const FINITELY_MANY_TURNS: &str = "finitely-many-turns";

/// Hypotheses of the regular-decay theorem for one schedule family.
struct RegularDecay {
    window_ratio: bool,
    log_dominance: bool,
    summable_local_limit: bool,
    epsilon: Option<f64>,
}

fn regular_decay(schedule: &Schedule, d: usize) -> RegularDecay {
    let dim = d as f64;
    match schedule.kind() {
        ScheduleKind::PowerDecay { gamma, .. } => {
            // Any eps in (0, min(1 - gamma, gamma + 1 - 2/d)) works.
            let upper = (1.0 - gamma).min(gamma + 1.0 - 2.0 / dim);
            RegularDecay {
                window_ratio: true,
                log_dominance: true,
                summable_local_limit: upper > 0.0,
                epsilon: Some(upper / 2.0),
            }
        }
        ScheduleKind::Critical { .. } => RegularDecay {
            window_ratio: true,
            // a n^(-eps) / ln n -> 0 for every eps > 0
            log_dominance: false,
            summable_local_limit: true,
            epsilon: None,
        },
        _ => {
            let tail = schedule.periodic_tail().unwrap_or(&[]);
            let positive = !tail.is_empty() && tail.iter().all(|v| *v > 0.0);
            // sum (p_n / n^(1-eps))^(d/2) converges iff (1 - eps) d / 2 > 1,
            // which needs d >= 3 when p_n does not vanish; it always converges
            // when the tail is identically zero.
            let sum_ok = if tail.iter().all(|v| *v == 0.0) {
                true
            } else {
                d >= 3
            };
            let eps = (d >= 3).then(|| (1.0 - 2.0 / dim) / 2.0);
            RegularDecay {
                window_ratio: positive,
                log_dominance: positive,
                summable_local_limit: sum_ok,
                epsilon: eps,
            }
        }
    }
}

/// Applies the known recurrence/transience results to `(schedule, d)`.
///
/// Priority when several apply: Recurrent, StronglyTransient,
/// NotStronglyTransient, ConjecturedStronglyTransient, Unknown. Every
/// hypothesis that was evaluated is listed in `checked_conditions`.
/// One-dimensional schedules are always [`Regime::Unknown`].
pub fn classify_regime(schedule: &Schedule, d: usize) -> RegimeClassification {
    let mut checked: Vec<(String, bool)> = Vec::new();
    let mut matched: Vec<(Regime, &'static str)> = Vec::new();
    let mut epsilon = None;

    if d >= 2 {
        let homogeneous = schedule
            .homogeneous_value()
            .filter(|p| *p > 0.0 && *p < 1.0);
        let ok = d == 2 && homogeneous.is_some();
        checked.push((
            format!("{HOMOGENEOUS_RECURRENCE_2D}: d = 2 and p_n = p in (0,1) for n >= 2"),
            ok,
        ));
        if ok {
            matched.push((Regime::Recurrent, HOMOGENEOUS_RECURRENCE_2D));
        }

        let summable = schedule.is_summable();
        checked.push((
            format!("{FINITELY_MANY_TURNS}: sum of p_n is finite"),
            summable,
        ));
        if summable {
            matched.push((Regime::StronglyTransient, FINITELY_MANY_TURNS));
        }

        if d == 2 {
            let margin = match schedule.kind() {
                ScheduleKind::Critical { .. } => Some(0.25),
                ScheduleKind::PowerDecay { gamma, .. } if *gamma > 0.5 => Some((gamma - 0.5) / 2.0),
                _ if summable => Some(0.25),
                _ => None,
            };
            checked.push((
                format!("{POWER_DECAY_TRANSIENCE_2D}: p_n < n^(-1/2-eps) for all large n"),
                margin.is_some(),
            ));
            if let Some(eps) = margin {
                epsilon = Some(eps);
                matched.push((Regime::StronglyTransient, POWER_DECAY_TRANSIENCE_2D));
            }
        }

        let rd = regular_decay(schedule, d);
        checked.push((
            format!("{REGULAR_DECAY_TRANSIENCE}: window max/min ratio bounded"),
            rd.window_ratio,
        ));
        checked.push((
            format!("{REGULAR_DECAY_TRANSIENCE}: p_n n^(1-eps) / ln n -> infinity"),
            rd.log_dominance,
        ));
        checked.push((
            format!("{REGULAR_DECAY_TRANSIENCE}: sum (p_n / n^(1-eps))^(d/2) < infinity"),
            rd.summable_local_limit,
        ));
        if rd.window_ratio && rd.log_dominance && rd.summable_local_limit {
            if epsilon.is_none() {
                epsilon = rd.epsilon;
            }
            matched.push((Regime::StronglyTransient, REGULAR_DECAY_TRANSIENCE));
        }

        if d == 2 {
            let periodic = schedule.periodic_tail().is_some() && !summable;
            checked.push((
                format!("{PERIODIC_2D}: d = 2 and p_n eventually periodic"),
                periodic,
            ));
            if periodic {
                matched.push((Regime::NotStronglyTransient, PERIODIC_2D));
            }
        }

        let critical = matches!(schedule.kind(), ScheduleKind::Critical { .. });
        checked.push((
            format!("{CRITICAL_CONJECTURE}: p_n = a/n for all large n"),
            critical,
        ));
        if critical {
            matched.push((Regime::ConjecturedStronglyTransient, CRITICAL_CONJECTURE));
        }
    }

    match matched.iter().min_by_key(|(regime, _)| *regime) {
        Some((regime, name)) => RegimeClassification {
            regime: *regime,
            theorem_ref: (*name).to_string(),
            checked_conditions: checked,
            epsilon,
        },
        None => RegimeClassification {
            regime: Regime::Unknown,
            theorem_ref: String::new(),
            checked_conditions: checked,
            epsilon: None,
        },
    }
}

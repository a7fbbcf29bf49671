//! Acceptance suite: one `PASS`/`FAIL` line per criterion.
//!
//! Set `CONWALK_ACCEPTANCE=1,3` to run a subset.

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;

use conwalk::formats::{write_json, ResultRecord, Verdict};
use conwalk::verify::{
    critical_limit_test, endpoint_total_variation, estimate_covariance, estimate_tail,
    recurrence_experiment, scaling_limit_test, volkov_bc_experiment, CriticalConfig,
    EndpointSampler, Normalization, Sharding, TailCheck,
};
use conwalk_core::analytics::{
    cos_gap_margin, cosine_sum_bound, count_arith_progression_exact, fourth_moment_l,
    lyapunov_drift, LyapunovConfig, MomentMode,
};
use conwalk_core::oracle::brute_force_l_moment;
use conwalk_core::{rng, Schedule};
use conwalk_validation::{Record, Suite};
use serde_json::json;

fn tail_record(
    d: usize,
    p: f64,
    n: u64,
    a: f64,
    samples: u64,
    sh: Sharding,
) -> (TailCheck, Vec<u8>) {
    let check = estimate_tail(d, p, n, a, samples, sh).expect("valid tail parameters");
    let verdict = Verdict::from_bool(check.asserted && check.holds);
    let config = json!({"d": d, "p": p, "n": n, "a": a, "samples": samples});
    let rec = ResultRecord::new("tail", config, &check.result, Some(check.bound), verdict);
    let mut bytes = Vec::new();
    write_json(&mut bytes, &rec).expect("serializable record");
    (check, bytes)
}

const TAIL_SHARDING: Sharding = Sharding {
    seed: 1004,
    shards: 4,
};

fn oracle_agreement(r: &mut Record) {
    let mut worst: f64 = 0.0;
    for d in [1, 2] {
        for p in [0.3, 0.5, 0.8] {
            let s = Schedule::constant(p).unwrap();
            for (name, sampler) in [
                ("direct", EndpointSampler::Direct),
                ("events", EndpointSampler::Events),
            ] {
                match endpoint_total_variation(d, &s, 6, 1_000_000, sampler, Sharding::new(1001, 1))
                {
                    Ok(tv) => {
                        worst = worst.max(tv);
                        if tv >= 0.01 {
                            r.assert(false, format!("d={d} p={p} {name}: TV {tv:.5}"));
                        }
                    }
                    Err(e) => {
                        r.error(e);
                    }
                }
            }
        }
    }
    r.assert(
        worst < 0.01,
        format!("max TV {worst:.5} < 0.01 over 12 runs"),
    );
}

fn fourth_moment_formula(r: &mut Record) {
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let exact = fourth_moment_l(p, n, MomentMode::Exact).unwrap();
            let brute = brute_force_l_moment(p, n, 4).unwrap();
            worst = worst.max((exact - brute).abs() / brute);
        }
    }
    r.assert(
        worst < 1e-10,
        format!("max relative error {worst:.2e} < 1e-10"),
    );
}

fn correlation_decay(r: &mut Record) {
    let cases: [(Schedule, u64, u64); 10] = [
        (Schedule::constant(0.5).unwrap(), 5, 8),
        (Schedule::constant(0.3).unwrap(), 1, 4),
        (Schedule::constant(0.8).unwrap(), 2, 3),
        (Schedule::constant(0.1).unwrap(), 10, 20),
        (Schedule::constant(0.5).unwrap(), 7, 7),
        (Schedule::critical(1.0, 2).unwrap(), 20, 25),
        (Schedule::critical(2.0, 2).unwrap(), 10, 15),
        (Schedule::critical(0.5, 1).unwrap(), 3, 10),
        (Schedule::critical(1.5, 2).unwrap(), 5, 6),
        (Schedule::critical(3.0, 3).unwrap(), 30, 40),
    ];
    let mut worst_z: f64 = 0.0;
    for (k, (s, i, j)) in cases.iter().enumerate() {
        let c =
            estimate_covariance(s, *i, *j, 1_000_000, Sharding::new(1003 + k as u64, 1)).unwrap();
        let z = if c.result.std_error > 0.0 {
            (c.result.estimate - c.expected).abs() / c.result.std_error
        } else if c.result.estimate == c.expected {
            0.0
        } else {
            f64::INFINITY
        };
        worst_z = worst_z.max(z);
        if z > 4.0 {
            r.assert(
                false,
                format!(
                    "({i},{j}) {:?}: {:.5} vs {:.5}",
                    s.kind(),
                    c.result.estimate,
                    c.expected
                ),
            );
        }
    }
    r.assert(
        worst_z <= 4.0,
        format!("max |z| {worst_z:.2} <= 4 over 10 cases"),
    );
}

fn tail_bound(r: &mut Record, first: &mut Option<Vec<u8>>) {
    for a in [20.0, 25.0] {
        let (c, bytes) = tail_record(2, 0.9, 10_000, a, 100_000, TAIL_SHARDING);
        r.assert(
            c.asserted && c.holds,
            format!(
                "d=2 a={a}: {:.2e} - 4*{:.1e} <= {:.3e}",
                c.result.estimate, c.result.std_error, c.bound
            ),
        );
        if first.is_none() {
            *first = Some(bytes);
        }
    }
    let (c, _) = tail_record(1, 0.9, 10_000, 10.0, 100_000, TAIL_SHARDING);
    r.assert(
        c.asserted && c.holds,
        format!(
            "d=1 a=10: {:.2e} - 4*{:.1e} <= {:.3e}",
            c.result.estimate, c.result.std_error, c.bound
        ),
    );
}

fn scaling_limit(r: &mut Record) {
    let sh = Sharding::new(1005, 1);
    let run = |norm| scaling_limit_test(2, 0.5, 100_000, 10_000, sh, norm).unwrap();
    let total = run(Normalization::Total);
    for (j, ks) in total.ks_statistics.iter().enumerate() {
        r.assert(
            *ks < total.ks_threshold,
            format!("KS coord {j} {ks:.4} < {:.4}", total.ks_threshold),
        );
    }
    for (j, (v, _)) in total.variances.iter().enumerate() {
        r.assert(
            (0.96..=1.04).contains(v),
            format!("variance coord {j} {v:.4} in [0.96, 1.04]"),
        );
    }
    let per = run(Normalization::PerCoordinate);
    let ks: Vec<String> = per
        .ks_statistics
        .iter()
        .map(|k| format!("{k:.4}"))
        .collect();
    let var: Vec<String> = per
        .variances
        .iter()
        .map(|(v, _)| format!("{v:.4}"))
        .collect();
    r.info(format!(
        "per-coordinate normalization sqrt(d p/(2-p)): KS [{}] vs {:.4}, variances [{}]",
        ks.join(", "),
        per.ks_threshold,
        var.join(", ")
    ));
}

fn critical_regime(r: &mut Record) {
    let cfg = CriticalConfig::new(2, 1.0, 100_000, 100_000);
    let c = critical_limit_test(cfg, Sharding::new(1006, 1)).unwrap();
    r.assert(
        (c.expected_turns - 1.7269).abs() < 1e-4,
        format!("b ln 10 = {:.5}", c.expected_turns),
    );
    r.assert(
        c.turn_count.within(c.expected_turns, 4.0),
        format!(
            "turn mean {:.4} +- {:.4}",
            c.turn_count.estimate, c.turn_count.std_error
        ),
    );
    let ks = c.report.check("ks_norm").unwrap();
    r.assert(
        !ks.rejected,
        format!(
            "KS |S_n|/n vs |Z_1| (eps=0.1) {:.4} < {:.4}",
            ks.statistic, ks.threshold
        ),
    );
    for name in [
        "turn_poisson_gof",
        "endpoint_bounded",
        "ks_late_norm",
        "ks_fine_norm",
    ] {
        let k = c.report.check(name).unwrap();
        r.info(format!(
            "{name}: {:.4} vs {:.4} ({})",
            k.statistic,
            k.threshold,
            if k.rejected {
                "rejected"
            } else {
                "not rejected"
            }
        ));
    }
}

fn lyapunov(r: &mut Record) {
    for p in [0.3f64, 0.5, 0.7] {
        let a = (1.5 + 18.0 * (1.0 - p) / (p * p)).ceil() + 5.0;
        let cfg = LyapunovConfig::new(p, a, 1e-20).unwrap();
        let mut scaled = Vec::new();
        let mut negative = true;
        for rad in [200i64, 500, 1000, 2000] {
            let d = lyapunov_drift(&cfg, [rad, 0]).unwrap();
            negative &= d.certified_negative();
            scaled.push(d.value * (rad as f64).powi(4));
        }
        let mags: Vec<f64> = scaled.iter().map(|x| x.abs()).collect();
        let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mags.iter().copied().fold(0.0, f64::max);
        let spread = (hi - lo) / lo;
        r.assert(
            negative && spread < 0.5,
            format!(
                "p={p} a={a}: drift*r^4 in [{:.2}, {:.2}], spread {spread:.3}",
                -hi, -lo
            ),
        );
    }
}

fn appendix(r: &mut Record) {
    let mut violations = 0u64;
    let mut checked = 0u64;
    for s_num in 1..=50u64 {
        for s0_num in (0..=90i64).step_by(10) {
            for m in 2..=1000u64 {
                if m * s_num < 100 {
                    continue;
                }
                checked += 1;
                let count = count_arith_progression_exact(s_num, s0_num, 100, m).unwrap();
                if 15 * count < 2 * m {
                    violations += 1;
                }
            }
        }
    }
    r.assert(
        violations == 0,
        format!("progression counts: {violations} violations in {checked}"),
    );

    let grid = 10_000;
    let bad = (0..grid)
        .map(|k| FRAC_PI_2 * k as f64 / (grid - 1) as f64)
        .filter(|&alpha| cos_gap_margin(alpha) < 0.0)
        .count();
    r.assert(
        bad == 0,
        format!("1 - cos a >= a^2/4: {bad} violations in {grid}"),
    );

    let mut rand = rng::stream(1008, 0, 0);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..100 {
        let m = 2 + rng::index(&mut rand, 49);
        let len = m + rng::index(&mut rand, 10);
        let a = rng::open01(&mut rand);
        let w: Vec<f64> = (0..len).map(|_| rng::open01(&mut rand)).collect();
        let total: f64 = w.iter().sum();
        let q: Vec<f64> = w
            .iter()
            .enumerate()
            .map(|(j, wj)| if j < m { a / m as f64 } else { 0.0 } + (1.0 - a) * wj / total)
            .collect();
        for k in 0..200 {
            let s = FRAC_PI_2 * k as f64 / 199.0;
            let b = cosine_sum_bound(&q, m, a, s).unwrap();
            worst = worst.max(b.h - b.bound);
        }
    }
    r.assert(
        worst <= 1e-12,
        format!("cosine-sum bound: max h - bound {worst:.2e} <= 1e-12"),
    );
}

fn pass_once(r: &mut Record) {
    for (gap, expected) in [(1u64, 0.28), (5, 0.16 / (1.0 - (3.0f64 / 7.0).powi(5)))] {
        let v =
            volkov_bc_experiment(0.7, 5, 5 + gap, 100_000, None, Sharding::new(1009, 1)).unwrap();
        r.assert(
            v.single.within(0.4, 4.0),
            format!(
                "gap {gap}: P(A_i) {:.4} +- {:.4} vs 0.4",
                v.single.estimate, v.single.std_error
            ),
        );
        r.assert(
            v.joint.within(expected, 4.0) && (v.expected_joint - expected).abs() < 1e-12,
            format!(
                "P(A_iA_j) {:.4} +- {:.4} vs {expected:.5}",
                v.joint.estimate, v.joint.std_error
            ),
        );
        if gap == 5 {
            r.info(format!(
                "gap 5 printed approximation 0.16089: {}",
                if v.joint.within(0.16089, 4.0) {
                    "also within 4 s.e."
                } else {
                    "outside 4 s.e."
                }
            ));
        }
        if v.truncated > 0 {
            r.info(format!("gap {gap}: {} paths hit the step cap", v.truncated));
        }
    }
}

fn regime_trends(r: &mut Record) {
    let horizons = [1_000, 10_000, 100_000];
    let sh = Sharding::new(1010, 1);
    let constant = Schedule::constant(0.5).unwrap();
    let rows = recurrence_experiment(2, &constant, &horizons, 10_000, sh).unwrap();
    let means: Vec<f64> = rows.iter().map(|x| x.mean_visits.estimate).collect();
    r.assert(
        means.windows(2).all(|w| w[0] < w[1]),
        format!("Constant(0.5) mean visits {means:.3?} increasing"),
    );
    let decay = Schedule::power_decay(1.0, 0.7, 1).unwrap();
    let rows = recurrence_experiment(2, &decay, &horizons, 100_000, sh).unwrap();
    let late: Vec<f64> = rows
        .iter()
        .map(|x| x.late_visit_fraction.estimate)
        .collect();
    r.assert(
        late.windows(2).all(|w| w[0] > w[1]),
        format!("PowerDecay(0.7) late-visit fraction {late:.5?} decreasing"),
    );
}

fn determinism(r: &mut Record, first: Option<Vec<u8>>) {
    let first =
        first.unwrap_or_else(|| tail_record(2, 0.9, 10_000, 20.0, 100_000, TAIL_SHARDING).1);
    let (_, again) = tail_record(2, 0.9, 10_000, 20.0, 100_000, TAIL_SHARDING);
    r.assert(
        first == again,
        format!("tail record, {} bytes, identical on rerun", first.len()),
    );
}

fn main() -> ExitCode {
    let mut suite = Suite::from_env("CONWALK_ACCEPTANCE");
    let mut tail_json = None;
    suite.run(1, "oracle agreement", oracle_agreement);
    suite.run(2, "fourth-moment formula", fourth_moment_formula);
    suite.run(3, "correlation decay", correlation_decay);
    suite.run(4, "tail bound", |r| tail_bound(r, &mut tail_json));
    suite.run(5, "homogeneous scaling limit", scaling_limit);
    suite.run(6, "critical regime", critical_regime);
    suite.run(7, "Lyapunov drift", lyapunov);
    suite.run(8, "progression and cosine bounds", appendix);
    suite.run(9, "pass-once formulas", pass_once);
    suite.run(10, "regime trends", regime_trends);
    suite.run(11, "determinism", |r| determinism(r, tail_json.take()));
    suite.finish()
}

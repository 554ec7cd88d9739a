//! Acceptance gate for the whole library: eight end-to-end criteria
//! covering solver quality, convergence speed, carbon outcomes,
//! constraint satisfaction, exact accounting arithmetic, determinism
//! and representation equivalence.
//!
//! Each test prints a single `acceptance NN <name>: PASS|FAIL (...)`
//! line with the measured numbers before asserting, so a plain
//! `cargo test` run yields one verdict line per criterion.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use gridspin::baselines::{brute_force, solve_sa, SaConfig};
use gridspin::bench::{run_benchmark, BenchReport, SuiteConfig};
use gridspin::carbon::{aggregate, attribute, Bucket, CarbonIntensitySeries, EnergySeries};
use gridspin::instance_gen::{gen_scheduling_instance, GenParams};
use gridspin::qubo::{energy, to_ising, BinaryVector, QuboMatrix};
use gridspin::rng::{derive_seed, SplitMix64};
use gridspin::sb::{solve_sb, SbConfig};
use gridspin::scheduler::{build_qubo, calibrate_penalties};

use proptest::prelude::*;

fn verdict(name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {name} failed: {detail}");
}

fn random_qubo(rng: &mut SplitMix64, n: usize, scale: f64) -> QuboMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.uniform(-scale, scale)).collect())
        .collect();
    QuboMatrix::from_dense(&rows).unwrap()
}

/// Within 1% of the optimum, with a small absolute floor for optima
/// near zero.
fn within_one_percent(e: f64, opt: f64) -> bool {
    e <= opt + 0.01 * opt.abs() + 1e-9
}

// ---------------------------------------------------------------------------
// Criterion 1: on 30 seeded 12-bit QUBOs with coefficients in (-1, 1),
// both the bifurcation solver (16 restarts) and annealing match the
// exhaustive optimum to within 1% on at least 90% of instances, in
// under a minute.
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_solvers_match_exhaustive_on_small_qubos() {
    let start = Instant::now();
    let mut sb_hits = 0;
    let mut sa_hits = 0;
    let total = 30;
    for k in 0..total {
        let mut rng = SplitMix64::new(derive_seed(4242, k));
        let q = random_qubo(&mut rng, 12, 1.0);
        let (_, opt) = brute_force(&q).unwrap();

        let sb_cfg = SbConfig { restarts: 16, seed: 1000 + k, ..SbConfig::default() };
        let sb = solve_sb(&q, &sb_cfg).unwrap();
        assert!(sb.best_energy >= opt - 1e-9, "sb beat exhaustive search");
        if within_one_percent(sb.best_energy, opt) {
            sb_hits += 1;
        }

        let sa_cfg = SaConfig { restarts: 4, seed: 2000 + k, ..SaConfig::default() };
        let sa = solve_sa(&q, &sa_cfg).unwrap();
        assert!(sa.best_energy >= opt - 1e-9, "sa beat exhaustive search");
        if within_one_percent(sa.best_energy, opt) {
            sa_hits += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = sb_hits * 10 >= total * 9 && sa_hits * 10 >= total * 9 && elapsed < Duration::from_secs(60);
    verdict(
        "01 solvers_match_exhaustive_on_small_qubos",
        pass,
        &format!("sb {sb_hits}/{total}, sa {sa_hits}/{total}, {:.1}s", elapsed.as_secs_f64()),
    );
}

// ---------------------------------------------------------------------------
// Shared scheduling benchmark for criteria 2-5: twenty 72-bit instances
// (2 compressors, 4 curtailable loads, 12 hourly intervals).
// ---------------------------------------------------------------------------

struct SuiteRun {
    report: BenchReport,
    elapsed: Duration,
}

fn suite_config() -> SuiteConfig {
    let instances = (0..20)
        .map(|k| GenParams {
            seed: 9000 + k,
            compressors: 2,
            dr_loads: 4,
            horizon: 12,
            ..GenParams::default()
        })
        .collect();
    SuiteConfig {
        instances,
        sb: SbConfig {
            coupling: 32.0,
            i_max: 150,
            restarts: 16,
            seed: 51,
            ..SbConfig::default()
        },
        sa: SaConfig {
            cooling_ratio: 0.97,
            sweeps: 250,
            restarts: 16,
            seed: 52,
            ..SaConfig::default()
        },
        w_carbon: 1e-3,
    }
}

fn suite() -> &'static SuiteRun {
    static SUITE: OnceLock<SuiteRun> = OnceLock::new();
    SUITE.get_or_init(|| {
        let cfg = suite_config();
        let start = Instant::now();
        let report = run_benchmark(&cfg).expect("benchmark suite must run");
        SuiteRun { report, elapsed: start.elapsed() }
    })
}

// ---------------------------------------------------------------------------
// Criterion 2: the bifurcation solver needs at most a fifth of the
// annealer's median objective evaluations to reach the best known
// objective within 1%, and the whole suite runs in under five minutes.
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_sb_converges_five_times_faster_than_sa() {
    let run = suite();
    let s = &run.report.summary;
    let (med_sb, med_sa) = (
        s.median_evals_to_within_sb,
        s.median_evals_to_within_sa,
    );
    let pass = match (med_sb, med_sa) {
        (Some(sb), Some(sa)) => 5.0 * sb <= sa && run.elapsed < Duration::from_secs(300),
        _ => false,
    };
    verdict(
        "02 sb_converges_five_times_faster_than_sa",
        pass,
        &format!(
            "median evals sb {med_sb:?}, sa {med_sa:?}, suite {:.1}s",
            run.elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: median net footprint is ordered sb <= sa <= greedy and
// the bifurcation solver cuts at least 5% of the greedy footprint in
// median.
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_carbon_ordering_and_reduction() {
    let s = &suite().report.summary;
    let ordered = s.median_carbon_sb_g <= s.median_carbon_sa_g
        && s.median_carbon_sa_g <= s.median_carbon_greedy_g;
    let pass = ordered && s.carbon_reduction_sb_vs_greedy_pct >= 5.0;
    verdict(
        "03 carbon_ordering_and_reduction",
        pass,
        &format!(
            "median gCO2 greedy {:.0}, sa {:.0}, sb {:.0}; reduction sb {:.1}%, sa {:.1}%",
            s.median_carbon_greedy_g,
            s.median_carbon_sa_g,
            s.median_carbon_sb_g,
            s.carbon_reduction_sb_vs_greedy_pct,
            s.carbon_reduction_sa_vs_greedy_pct
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: decoded sb and sa schedules satisfy every constraint on
// all twenty instances, and on small instances the exhaustive optimum
// of the penalty QUBO is itself violation-free.
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_schedules_are_violation_free() {
    let report = &suite().report;
    let mut bad = Vec::new();
    for inst in &report.instances {
        for name in ["sa", "sb"] {
            let v = inst.solver(name).unwrap().violations;
            if v != 0 {
                bad.push(format!("seed {} {name}: {v}", inst.seed));
            }
        }
    }

    // Exhaustive cross-check on 16-bit instances.
    let mut brute_bad = Vec::new();
    for seed in [41u64, 42, 43, 44, 45] {
        let params = GenParams {
            seed,
            compressors: 2,
            dr_loads: 2,
            horizon: 4,
            ..GenParams::default()
        };
        let inst = gen_scheduling_instance(&params).unwrap();
        assert_eq!(inst.n_bits(), 16);
        let weights = calibrate_penalties(&inst, 1e-3).unwrap();
        let sq = build_qubo(&inst, &weights).unwrap();
        let (bits, _) = brute_force(&sq.matrix).unwrap();
        let m = inst.evaluate(&inst.decode(&bits).unwrap()).unwrap();
        if m.violations != 0 {
            brute_bad.push(format!("seed {seed}: {}", m.violations));
        }
    }

    let pass = bad.is_empty() && brute_bad.is_empty();
    verdict(
        "04 schedules_are_violation_free",
        pass,
        &format!(
            "suite violations: [{}]; exhaustive-optimum violations: [{}]",
            bad.join(", "),
            brute_bad.join(", ")
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: ablation of sb against sa on net footprint is
// nonnegative in median.
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_sb_vs_sa_ablation_nonnegative() {
    let s = &suite().report.summary;
    let pass = s.ablation_sb_vs_sa_pct >= 0.0;
    verdict(
        "05 sb_vs_sa_ablation_nonnegative",
        pass,
        &format!("ablation {:.2}%", s.ablation_sb_vs_sa_pct),
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: attribution and aggregation are exact arithmetic - the
// emission of every interval is exactly energy * intensity, and bucket
// sums reproduce an independent recomputation bit for bit (zero
// tolerance).
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_attribution_exact_arithmetic() {
    let result = std::panic::catch_unwind(|| {
        proptest!(
            ProptestConfig { cases: 512, ..ProptestConfig::default() },
            |(
                pairs in prop::collection::vec((0.0f64..50.0, 0.0f64..800.0), 1..96),
                width_idx in 0usize..3,
                start in -50i64..200,
            )| {
                let widths = [0.25, 0.5, 1.0];
                let w = widths[width_idx];
                let (e_vals, l_vals): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
                let e = EnergySeries::new(e_vals.clone(), w, start).unwrap();
                let lambda = CarbonIntensitySeries::new(l_vals.clone(), w, start).unwrap();
                let em = attribute(&e, &lambda).unwrap();

                // Exact elementwise product, bit for bit.
                for i in 0..e_vals.len() {
                    prop_assert_eq!(em.values[i].to_bits(), (e_vals[i] * l_vals[i]).to_bits());
                }

                // Every bucketing reproduces an independent in-order
                // recomputation exactly, and no interval is dropped or
                // double counted.
                for bucket in [Bucket::Daily, Bucket::Monthly, Bucket::Total] {
                    let got = aggregate(&em, bucket);
                    let mut assigned = 0usize;
                    for (label, sum) in &got {
                        let mut expect = 0.0f64;
                        let mut count = 0usize;
                        for (i, &v) in em.values.iter().enumerate() {
                            let day = (((start + i as i64) as f64 * w) / 24.0).floor() as i64;
                            let key = match bucket {
                                Bucket::Total => "total".to_string(),
                                Bucket::Daily => format!("day {day}"),
                                Bucket::Monthly => format!("month {}", day.div_euclid(30)),
                            };
                            if key == *label {
                                expect += v;
                                count += 1;
                            }
                        }
                        prop_assert_eq!(sum.to_bits(), expect.to_bits());
                        assigned += count;
                    }
                    prop_assert_eq!(assigned, em.values.len());
                }
            }
        );
    });
    verdict(
        "06 attribution_exact_arithmetic",
        result.is_ok(),
        "512 randomized series, bitwise-equal products and bucket sums",
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: byte-identical reruns and structural invariants over a
// thousand randomized solver runs.
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_determinism_and_run_invariants() {
    // Byte-identical artifacts across two identically seeded runs.
    let mut rng = SplitMix64::new(24);
    let q = random_qubo(&mut rng, 14, 3.0);
    let sa_cfg = SaConfig { sweeps: 80, restarts: 2, seed: 7, ..SaConfig::default() };
    let sb_cfg = SbConfig { i_max: 30, restarts: 2, seed: 7, ..SbConfig::default() };
    let sa_bytes = |cfg: &SaConfig| serde_json::to_string(&solve_sa(&q, cfg).unwrap()).unwrap();
    let sb_bytes = |cfg: &SbConfig| serde_json::to_string(&solve_sb(&q, cfg).unwrap()).unwrap();
    let byte_identical = sa_bytes(&sa_cfg) == sa_bytes(&sa_cfg)
        && sb_bytes(&sb_cfg) == sb_bytes(&sb_cfg)
        && {
            let p = GenParams { compressors: 2, dr_loads: 2, horizon: 6, ..GenParams::default() };
            gen_scheduling_instance(&p).unwrap().to_json().unwrap()
                == gen_scheduling_instance(&p).unwrap().to_json().unwrap()
        }
        && {
            let cfg = SuiteConfig {
                instances: vec![GenParams {
                    seed: 5,
                    compressors: 2,
                    dr_loads: 1,
                    horizon: 4,
                    ..GenParams::default()
                }],
                sb: SbConfig { i_max: 20, ..SbConfig::default() },
                sa: SaConfig { sweeps: 40, ..SaConfig::default() },
                w_carbon: 1e-3,
            };
            serde_json::to_string(&run_benchmark(&cfg).unwrap()).unwrap()
                == serde_json::to_string(&run_benchmark(&cfg).unwrap()).unwrap()
        };

    // Invariants over 1000 randomized runs (alternating solvers,
    // varying sizes, scales and budgets).
    let mut failures = Vec::new();
    let mut master = SplitMix64::new(0xACCE11);
    for run in 0..1000u64 {
        let n = 4 + master.below(9) as usize;
        let scale = 10f64.powi(master.int_range(-2, 3) as i32);
        let q = random_qubo(&mut master, n, scale);
        let seed = master.next_u64();
        let (result, expected_evals) = if run % 2 == 0 {
            let cfg = SaConfig {
                sweeps: 10 + master.below(40) as usize,
                restarts: 1 + master.below(3) as usize,
                seed,
                ..SaConfig::default()
            };
            let r = solve_sa(&q, &cfg).unwrap();
            let expected = (cfg.restarts * cfg.sweeps * n) as u64;
            (r, expected)
        } else {
            let cfg = SbConfig {
                i_max: 5 + master.below(25) as usize,
                steps_per_iter: 5 + master.below(20) as usize,
                restarts: 1 + master.below(3) as usize,
                seed,
                ..SbConfig::default()
            };
            let r = solve_sb(&q, &cfg).unwrap();
            let expected = (cfg.restarts * cfg.i_max) as u64;
            (r, expected)
        };

        let mut ok = result.evals == expected_evals
            && !result.trace.is_empty()
            && result.trace.last().unwrap().evals == result.evals
            && result.trace.last().unwrap().best_energy == result.best_energy
            && result.best_bits.len() == n
            && energy(&q, &result.best_bits).unwrap() == result.best_energy
            && result.seed == seed;
        for w in result.trace.windows(2) {
            ok &= w[0].evals < w[1].evals && w[0].best_energy >= w[1].best_energy;
        }
        if !ok {
            failures.push(run);
        }
    }

    let pass = byte_identical && failures.is_empty();
    verdict(
        "07 determinism_and_run_invariants",
        pass,
        &format!(
            "byte-identical reruns: {byte_identical}; invariant failures: {:?}",
            failures
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: the Ising form reproduces the QUBO energy on every state
// of 100 seeded matrices (n <= 12), to 1e-9 relative accuracy.
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_qubo_ising_equivalence() {
    let mut worst: f64 = 0.0;
    for k in 0..100u64 {
        let mut rng = SplitMix64::new(derive_seed(888, k));
        let n = 1 + rng.below(12) as usize;
        let scale = 10f64.powi(rng.int_range(-1, 2) as i32);
        let q = random_qubo(&mut rng, n, scale);
        let ising = to_ising(&q);
        for code in 0..(1u64 << n) {
            let s = BinaryVector::from_encoding(code, n);
            let spins: Vec<i8> = s.bits().iter().map(|&b| if b == 1 { 1 } else { -1 }).collect();
            let eq = energy(&q, &s).unwrap();
            let ei = ising.energy(&spins).unwrap();
            let rel = (eq - ei).abs() / (1.0 + eq.abs());
            worst = worst.max(rel);
        }
    }
    let pass = worst <= 1e-9;
    verdict(
        "08 qubo_ising_equivalence",
        pass,
        &format!("worst relative difference {worst:.3e} over 100 matrices"),
    );
}

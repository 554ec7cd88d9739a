//! Benchmark harness: run every solver over a suite of generated
//! scheduling instances and summarize convergence, carbon and
//! constraint outcomes.
//!
//! All reported energies are full objectives (QUBO energy plus the
//! constant offset), so numbers are comparable across solvers and
//! instances. Output serialization is deterministic: vectors in fixed
//! order, no timestamps, no platform-dependent content.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{brute_force, solve_sa, SaConfig};
use crate::error::{Error, Result};
use crate::instance_gen::{gen_scheduling_instance, GenParams};
use crate::qubo::energy;
use crate::rng::derive_seed;
use crate::sb::{solve_sb, SbConfig};
use crate::scheduler::{build_qubo, calibrate_penalties, solve_greedy_schedule};
use crate::solve::{SolveResult, TracePoint};

/// Relative band used for "evaluations to within" convergence readings.
pub const CONVERGENCE_TOL: f64 = 0.01;

/// Exhaustive cross-checks are added for instances up to this size.
pub const BRUTE_FORCE_CROSS_CHECK_BITS: usize = 20;

/// First evaluation count at which a trace reaches
/// `best_known + tol * |best_known|` (an absolute band of `tol` when
/// `best_known` is zero); `None` if the trace never gets there.
pub fn evals_to_within(trace: &[TracePoint], best_known: f64, tol: f64) -> Option<u64> {
    let threshold = if best_known != 0.0 {
        best_known + tol * best_known.abs()
    } else {
        tol
    };
    trace
        .iter()
        .find(|p| p.best_energy <= threshold)
        .map(|p| p.evals)
}

/// A benchmark suite: instances to generate plus solver settings shared
/// across all of them. Each instance run derives its own solver seeds
/// from the configured base seeds and the instance's generator seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub instances: Vec<GenParams>,
    #[serde(default)]
    pub sb: SbConfig,
    #[serde(default)]
    pub sa: SaConfig,
    /// Carbon price used when calibrating instance penalties.
    #[serde(default = "default_w_carbon")]
    pub w_carbon: f64,
}

fn default_w_carbon() -> f64 {
    1e-3
}

/// Per-solver outcome on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub name: String,
    /// Best full objective (QUBO energy + offset).
    pub best_energy: f64,
    pub evals: u64,
    /// Evaluations to reach the instance's best known objective within
    /// [`CONVERGENCE_TOL`].
    pub evals_to_within: Option<u64>,
    pub carbon_g: f64,
    pub energy_cost: f64,
    pub violations: usize,
    /// Convergence trace in full-objective units. Written to CSV by
    /// [`export`], not serialized into the JSON report.
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

/// Outcome of one instance across all solvers (fixed order: greedy,
/// sa, sb).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    /// Generator seed of the instance.
    pub seed: u64,
    pub n_bits: usize,
    /// Best full objective seen by any route on this instance.
    pub best_known: f64,
    /// Exhaustive optimum (full objective) when the instance is small
    /// enough to enumerate.
    pub brute_force_optimum: Option<f64>,
    pub solvers: Vec<SolverSummary>,
}

impl InstanceReport {
    pub fn solver(&self, name: &str) -> Option<&SolverSummary> {
        self.solvers.iter().find(|s| s.name == name)
    }
}

/// Suite-level medians and comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub median_evals_to_within_sb: Option<f64>,
    pub median_evals_to_within_sa: Option<f64>,
    /// `median_sa / median_sb` when both are available.
    pub evals_ratio_sa_over_sb: Option<f64>,
    pub median_carbon_greedy_g: f64,
    pub median_carbon_sa_g: f64,
    pub median_carbon_sb_g: f64,
    /// Median over instances of the per-instance reduction
    /// `(greedy - solver) / greedy * 100`.
    pub carbon_reduction_sa_vs_greedy_pct: f64,
    pub carbon_reduction_sb_vs_greedy_pct: f64,
    /// Median over instances of `(carbon_sa - carbon_sb) / carbon_sb *
    /// 100`; positive when bifurcation beats annealing on footprint.
    pub ablation_sb_vs_sa_pct: f64,
    pub violations_greedy: usize,
    pub violations_sa: usize,
    pub violations_sb: usize,
}

/// Full benchmark output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: SuiteConfig,
    pub instances: Vec<InstanceReport>,
    pub summary: BenchSummary,
}

/// Median of a sample; `None` when empty. Averages the two central
/// order statistics for even sizes.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("median input must not contain NaN"));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

/// Run one solver suite. Deterministic: calling this twice with the
/// same configuration yields identical reports.
pub fn run_benchmark(cfg: &SuiteConfig) -> Result<BenchReport> {
    if cfg.instances.is_empty() {
        return Err(Error::InvalidParameter(
            "benchmark suite has no instances".into(),
        ));
    }
    let mut instances = Vec::with_capacity(cfg.instances.len());
    for params in &cfg.instances {
        instances.push(run_instance(cfg, params)?);
    }
    let summary = summarize(&instances);
    Ok(BenchReport {
        config: cfg.clone(),
        instances,
        summary,
    })
}

fn run_instance(cfg: &SuiteConfig, params: &GenParams) -> Result<InstanceReport> {
    let inst = gen_scheduling_instance(params)?;
    let weights = calibrate_penalties(&inst, cfg.w_carbon)?;
    let sq = build_qubo(&inst, &weights)?;
    let offset = sq.offset;

    // Greedy baseline: one evaluation, flat trace.
    let greedy_decision = solve_greedy_schedule(&inst)?;
    let greedy_bits = inst.encode(&greedy_decision)?;
    let greedy_energy = energy(&sq.matrix, &greedy_bits)? + offset;
    let greedy_result = SolveResult {
        best_bits: greedy_bits,
        best_energy: greedy_energy,
        trace: vec![TracePoint { evals: 1, best_energy: greedy_energy }],
        evals: 1,
        seed: params.seed,
    };

    let sa_cfg = SaConfig {
        seed: derive_seed(cfg.sa.seed, params.seed),
        ..cfg.sa.clone()
    };
    let mut sa_result = solve_sa(&sq.matrix, &sa_cfg)?;
    shift_energies(&mut sa_result, offset);

    let sb_cfg = SbConfig {
        seed: derive_seed(cfg.sb.seed, params.seed),
        ..cfg.sb.clone()
    };
    let mut sb_result = solve_sb(&sq.matrix, &sb_cfg)?;
    shift_energies(&mut sb_result, offset);

    let brute_force_optimum = if inst.n_bits() <= BRUTE_FORCE_CROSS_CHECK_BITS {
        let (_, e) = brute_force(&sq.matrix)?;
        Some(e + offset)
    } else {
        None
    };
    let mut best_known = greedy_result
        .best_energy
        .min(sa_result.best_energy)
        .min(sb_result.best_energy);
    if let Some(b) = brute_force_optimum {
        best_known = best_known.min(b);
    }

    let mut solvers = Vec::with_capacity(3);
    for (name, result) in [
        ("greedy", &greedy_result),
        ("sa", &sa_result),
        ("sb", &sb_result),
    ] {
        let metrics = inst.evaluate(&inst.decode(&result.best_bits)?)?;
        solvers.push(SolverSummary {
            name: name.to_string(),
            best_energy: result.best_energy,
            evals: result.evals,
            evals_to_within: evals_to_within(&result.trace, best_known, CONVERGENCE_TOL),
            carbon_g: metrics.carbon_g,
            energy_cost: metrics.energy_cost,
            violations: metrics.violations,
            trace: result.trace.clone(),
        });
    }

    Ok(InstanceReport {
        seed: params.seed,
        n_bits: inst.n_bits(),
        best_known,
        brute_force_optimum,
        solvers,
    })
}

fn shift_energies(result: &mut SolveResult, offset: f64) {
    result.best_energy += offset;
    for p in &mut result.trace {
        p.best_energy += offset;
    }
}

fn summarize(instances: &[InstanceReport]) -> BenchSummary {
    let collect = |name: &str, f: &dyn Fn(&SolverSummary) -> Option<f64>| -> Vec<f64> {
        instances
            .iter()
            .filter_map(|i| i.solver(name).and_then(f))
            .collect()
    };
    let carbon = |name: &str| collect(name, &|s| Some(s.carbon_g));
    let reductions = |name: &str| -> Vec<f64> {
        instances
            .iter()
            .filter_map(|i| {
                let g = i.solver("greedy")?.carbon_g;
                let s = i.solver(name)?.carbon_g;
                (g > 0.0).then(|| (g - s) / g * 100.0)
            })
            .collect()
    };
    let violations = |name: &str| -> usize {
        instances
            .iter()
            .filter_map(|i| i.solver(name).map(|s| s.violations))
            .sum()
    };

    let med_sb = median(&collect("sb", &|s| s.evals_to_within.map(|e| e as f64)));
    let med_sa = median(&collect("sa", &|s| s.evals_to_within.map(|e| e as f64)));
    let ratio = match (med_sa, med_sb) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };

    BenchSummary {
        median_evals_to_within_sb: med_sb,
        median_evals_to_within_sa: med_sa,
        evals_ratio_sa_over_sb: ratio,
        median_carbon_greedy_g: median(&carbon("greedy")).unwrap_or(0.0),
        median_carbon_sa_g: median(&carbon("sa")).unwrap_or(0.0),
        median_carbon_sb_g: median(&carbon("sb")).unwrap_or(0.0),
        carbon_reduction_sa_vs_greedy_pct: median(&reductions("sa")).unwrap_or(0.0),
        carbon_reduction_sb_vs_greedy_pct: median(&reductions("sb")).unwrap_or(0.0),
        ablation_sb_vs_sa_pct: ablation_sb_vs_sa(instances),
        violations_greedy: violations("greedy"),
        violations_sa: violations("sa"),
        violations_sb: violations("sb"),
    }
}

/// Footprint ablation of the bifurcation solver against annealing:
/// median over instances of `(carbon_sa - carbon_sb) / carbon_sb *
/// 100`. Instances where both footprints are zero contribute zero.
pub fn ablation_sb_vs_sa(instances: &[InstanceReport]) -> f64 {
    let pcts: Vec<f64> = instances
        .iter()
        .filter_map(|i| {
            let sa = i.solver("sa")?.carbon_g;
            let sb = i.solver("sb")?.carbon_g;
            if sb > 0.0 {
                Some((sa - sb) / sb * 100.0)
            } else if sa > 0.0 {
                Some(100.0)
            } else {
                Some(0.0)
            }
        })
        .collect();
    median(&pcts).unwrap_or(0.0)
}

/// Write a report to `dir`: `report.json` plus one
/// `trace_<index>_<solver>.csv` per instance and solver. Returns the
/// written paths in a fixed order. Existing files are overwritten.
pub fn export(report: &BenchReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let report_path = dir.join("report.json");
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    std::fs::write(&report_path, json)?;
    written.push(report_path);

    for (idx, inst) in report.instances.iter().enumerate() {
        for solver in &inst.solvers {
            let path = dir.join(format!("trace_{idx:02}_{}.csv", solver.name));
            let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
            writeln!(file, "evals,best_energy")?;
            for p in &solver.trace {
                writeln!(file, "{},{}", p.evals, p.best_energy)?;
            }
            file.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

//! Simulated bifurcation: a quantum-inspired heuristic that relaxes the
//! binary variables of a QUBO to coupled nonlinear oscillators and
//! integrates their classical dynamics.
//!
//! Each oscillator `i` has position `x_i` and velocity `v_i` evolving as
//!
//! ```text
//! dv_i/dt = (a(t) - 1) x_i - x_i^3 - c * (2 * sum_j J_ij x_j + h_i)
//! dx_i/dt = v_i
//! ```
//!
//! where `J`, `h` come from the Ising form of the QUBO and `a(t)` is a
//! pump amplitude ramped linearly from 0 to 1. Early in the run every
//! oscillator sits in a single potential well around 0; as the pump
//! passes the bifurcation point the well splits and each oscillator
//! commits to a positive or negative branch. Reading out the sign of
//! `x_i` yields a binary assignment, biased toward low-energy states by
//! the coupling term.
//!
//! Integration uses the symplectic (semi-implicit) Euler scheme: all
//! velocities are updated from the current positions, then positions
//! move with the new velocities.

use crate::error::{Error, Result};
use crate::qubo::{energy, to_ising, BinaryVector, IsingForm, QuboMatrix};
use crate::rng::{derive_seed, SplitMix64};
use crate::solve::{BestTracker, SolveResult};
use crate::DEFAULT_SEED;

/// Simulated bifurcation configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SbConfig {
    /// Outer iterations; the state is binarized and scored once per
    /// iteration, so this is also the evaluation budget per restart.
    pub i_max: usize,
    /// Integration micro-steps between consecutive readouts.
    pub steps_per_iter: usize,
    /// Integration time step.
    pub dt: f64,
    /// Coupling strength `c` in front of the Ising interaction force.
    pub coupling: f64,
    /// Independent restarts; each gets its own derived seed.
    pub restarts: usize,
    pub seed: u64,
    /// Initial positions are drawn uniformly from
    /// `[-x_init_scale, x_init_scale]`; velocities start at 0.
    pub x_init_scale: f64,
    /// Instability tripwire: the run aborts if any `|x_i|` exceeds this.
    pub blow_up_bound: f64,
}

impl Default for SbConfig {
    fn default() -> Self {
        SbConfig {
            i_max: 100,
            steps_per_iter: 50,
            dt: 0.05,
            coupling: 0.5,
            restarts: 1,
            seed: DEFAULT_SEED,
            x_init_scale: 0.1,
            blow_up_bound: 10.0,
        }
    }
}

impl SbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.i_max == 0 {
            return Err(Error::InvalidParameter("i_max must be >= 1".into()));
        }
        if self.steps_per_iter == 0 {
            return Err(Error::InvalidParameter("steps_per_iter must be >= 1".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be finite and > 0, got {}",
                self.dt
            )));
        }
        if !(self.coupling >= 0.0) || !self.coupling.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling must be finite and >= 0, got {}",
                self.coupling
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be >= 1".into()));
        }
        if !(self.x_init_scale > 0.0) || !self.x_init_scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "x_init_scale must be finite and > 0, got {}",
                self.x_init_scale
            )));
        }
        if !(self.blow_up_bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "blow_up_bound must be > 0, got {}",
                self.blow_up_bound
            )));
        }
        Ok(())
    }
}

/// Positions and velocities of the oscillator network, plus elapsed
/// integration time and step count.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    pub step: u64,
}

impl OscillatorState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() {
            return Err(Error::DimensionMismatch {
                context: "oscillator state",
                expected: x.len(),
                got: v.len(),
            });
        }
        Ok(OscillatorState { x, v, t: 0.0, step: 0 })
    }
}

/// Linear pump schedule: ramps from 0 at `t = 0` to 1 at `t = t_total`.
pub fn pump(t: f64, t_total: f64) -> Result<f64> {
    if !(t_total > 0.0) || !t_total.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "pump horizon must be finite and > 0, got {t_total}"
        )));
    }
    if !(0.0..=t_total).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "pump time {t} outside [0, {t_total}]"
        )));
    }
    Ok(t / t_total)
}

/// Advance the oscillator network by one symplectic Euler step under
/// pump amplitude `a`, then enforce the stability envelope.
pub fn sb_step(
    state: &mut OscillatorState,
    ising: &IsingForm,
    a: f64,
    cfg: &SbConfig,
) -> Result<()> {
    let n = state.x.len();
    if ising.n() != n {
        return Err(Error::DimensionMismatch {
            context: "sb_step ising size",
            expected: n,
            got: ising.n(),
        });
    }
    // Velocities first, all from the pre-step positions (positions are
    // untouched until the second loop).
    for i in 0..n {
        let xi = state.x[i];
        let mut force = ising.field(i);
        let row = ising.coupling_row(i);
        for (j, &jij) in row.iter().enumerate() {
            force += 2.0 * jij * state.x[j];
        }
        state.v[i] += cfg.dt * ((a - 1.0) * xi - xi * xi * xi - cfg.coupling * force);
    }
    for i in 0..n {
        state.x[i] += cfg.dt * state.v[i];
    }
    state.t += cfg.dt;
    state.step += 1;
    for (i, &xi) in state.x.iter().enumerate() {
        if !(xi.abs() <= cfg.blow_up_bound) {
            return Err(Error::Unstable {
                index: i,
                step: state.step,
                bound: cfg.blow_up_bound,
            });
        }
    }
    Ok(())
}

/// Read out a binary assignment from oscillator positions: strictly
/// positive positions map to 1, everything else to 0.
pub fn binarize(x: &[f64]) -> Result<BinaryVector> {
    if let Some(i) = x.iter().position(|v| v.is_nan()) {
        return Err(Error::NonFinite {
            context: "oscillator positions",
            index: i,
        });
    }
    BinaryVector::from_bits(x.iter().map(|&v| u8::from(v > 0.0)).collect())
}

/// Minimize a QUBO with simulated bifurcation.
///
/// The dynamics are integrated on a rescaled copy of the problem with
/// coefficients divided by `max|Q_ij|`, which keeps the interaction
/// force on the same footing as the unit-strength potential regardless
/// of the problem's magnitude; all reported energies are evaluated on
/// the original matrix. Each restart draws fresh initial positions from
/// its own derived seed. One objective evaluation is counted per
/// iteration (the binarized readout), giving a dense trace of
/// `restarts * i_max` points.
pub fn solve_sb(q: &QuboMatrix, cfg: &SbConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let n = q.n();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot bifurcate a 0-bit problem".into()));
    }
    let kappa = q.max_abs();
    let ising = if kappa > 0.0 {
        to_ising(&q.scaled(1.0 / kappa))
    } else {
        to_ising(q)
    };
    let t_total = (cfg.i_max * cfg.steps_per_iter) as f64 * cfg.dt;

    let mut tracker = BestTracker::new();
    for restart in 0..cfg.restarts {
        let mut rng = SplitMix64::new(derive_seed(cfg.seed, restart as u64));
        let x: Vec<f64> = (0..n)
            .map(|_| rng.uniform(-cfg.x_init_scale, cfg.x_init_scale))
            .collect();
        let mut state = OscillatorState::new(x, vec![0.0; n])?;
        for _ in 0..cfg.i_max {
            for _ in 0..cfg.steps_per_iter {
                let a = pump(state.t, t_total)?;
                sb_step(&mut state, &ising, a, cfg)?;
            }
            let bits = binarize(&state.x)?;
            let e = energy(q, &bits)?;
            tracker.count_evals(1);
            tracker.offer_untraced(&bits, e);
            tracker.mark();
        }
    }
    Ok(tracker.finish(cfg.seed))
}

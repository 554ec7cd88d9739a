//! Classical baselines: simulated annealing and exhaustive search.

use crate::error::{Error, Result};
use crate::qubo::{delta_energy, energy, BinaryVector, QuboMatrix};
use crate::rng::{derive_seed, SplitMix64};
use crate::solve::{BestTracker, SolveResult};
use crate::DEFAULT_SEED;

/// Exhaustive search refuses problems larger than this many bits.
pub const EXHAUSTIVE_MAX_BITS: usize = 24;

/// Simulated annealing configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SaConfig {
    /// Starting temperature. `None` picks `2 * max|Q_ij|`, which accepts
    /// most uphill moves in the first sweeps.
    pub initial_temperature: Option<f64>,
    /// Geometric cooling factor applied once per sweep; in (0, 1).
    pub cooling_ratio: f64,
    /// Number of full sweeps (each sweep proposes every bit once, in a
    /// random order).
    pub sweeps: usize,
    /// Independent restarts; each gets its own derived seed.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            initial_temperature: None,
            cooling_ratio: 0.97,
            sweeps: 250,
            restarts: 1,
            seed: DEFAULT_SEED,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(t0) = self.initial_temperature {
            if !(t0 > 0.0) || !t0.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "initial_temperature must be finite and > 0, got {t0}"
                )));
            }
        }
        if !(self.cooling_ratio > 0.0 && self.cooling_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cooling_ratio must be in (0, 1), got {}",
                self.cooling_ratio
            )));
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidParameter("sweeps must be >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Metropolis acceptance rule: downhill (or flat) moves always pass,
/// uphill moves pass with probability `exp(-delta / temperature)`.
pub fn metropolis_accept(delta: f64, temperature: f64, rng: &mut SplitMix64) -> bool {
    if delta <= 0.0 {
        true
    } else if temperature <= 0.0 {
        false
    } else {
        rng.next_f64() < (-delta / temperature).exp()
    }
}

/// Single-bit-flip simulated annealing with a geometric cooling schedule.
///
/// Each proposed flip costs exactly one objective evaluation (the O(n)
/// delta), so the total is `restarts * sweeps * n` evaluations. The
/// trace records a point whenever the incumbent best improves, plus a
/// closing point at the final count.
pub fn solve_sa(q: &QuboMatrix, cfg: &SaConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let n = q.n();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot anneal a 0-bit problem".into()));
    }
    let t0 = cfg
        .initial_temperature
        .unwrap_or_else(|| 2.0 * q.max_abs());

    let mut tracker = BestTracker::new();
    for restart in 0..cfg.restarts {
        let mut rng = SplitMix64::new(derive_seed(cfg.seed, restart as u64));
        let mut bits = BinaryVector::from_bits(
            (0..n).map(|_| (rng.next_u64() & 1) as u8).collect(),
        )?;
        // Starting-state energy is bookkeeping, not a counted evaluation.
        let mut current = energy(q, &bits)?;
        tracker.offer_untraced(&bits, current);

        let mut temperature = t0;
        let mut order: Vec<usize> = (0..n).collect();
        for _sweep in 0..cfg.sweeps {
            rng.shuffle(&mut order);
            for &i in &order {
                let delta = delta_energy(q, &bits, i)?;
                tracker.count_evals(1);
                if metropolis_accept(delta, temperature, &mut rng) {
                    bits.flip(i)?;
                    current += delta;
                    if current < tracker.best_energy() {
                        // Re-evaluate exactly so the stored best is free
                        // of accumulated floating-point drift (bookkeeping,
                        // not counted).
                        let exact = energy(q, &bits)?;
                        if exact < tracker.best_energy() {
                            tracker.offer(&bits, exact);
                        }
                        current = exact;
                    }
                }
            }
            temperature *= cfg.cooling_ratio;
        }
    }
    Ok(tracker.finish(cfg.seed))
}

/// Exhaustively enumerate all `2^n` states (n <= 24) and return the
/// global minimizer. Energy ties are broken toward the smallest unsigned
/// integer encoding (bit 0 least significant).
///
/// Enumeration follows the binary-reflected Gray code so successive
/// states differ in one bit and the O(n) delta applies; the returned
/// energy is re-evaluated directly at the winner.
pub fn brute_force(q: &QuboMatrix) -> Result<(BinaryVector, f64)> {
    let n = q.n();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot enumerate a 0-bit problem".into()));
    }
    if n > EXHAUSTIVE_MAX_BITS {
        return Err(Error::TooLargeForExhaustive {
            n,
            max: EXHAUSTIVE_MAX_BITS,
        });
    }
    let total: u64 = 1u64 << n;
    let mut bits = BinaryVector::zeros(n);
    let mut running = 0.0; // energy of the all-zero state
    let mut encoding: u64 = 0;
    let mut best_encoding: u64 = 0;
    let mut best_energy = running;
    for m in 0..(total - 1) {
        // Gray-code neighbor: flip the lowest set bit position of m + 1.
        let b = (m + 1).trailing_zeros() as usize;
        running += delta_energy(q, &bits, b)?;
        bits.flip(b)?;
        encoding ^= 1u64 << b;
        if running < best_energy || (running == best_energy && encoding < best_encoding) {
            best_energy = running;
            best_encoding = encoding;
        }
    }
    let best_bits = BinaryVector::from_encoding(best_encoding, n);
    let exact = energy(q, &best_bits)?;
    Ok((best_bits, exact))
}

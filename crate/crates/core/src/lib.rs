//! # gridspin
//!
//! Quantum-inspired combinatorial optimization for carbon-aware energy
//! scheduling.
//!
//! The crate provides, end to end:
//!
//! - [`qubo`]: dense QUBO problems (`min s^T Q s` over binary `s`),
//!   energy and single-flip delta evaluation, and the equivalent Ising
//!   spin form;
//! - [`sb`]: a simulated-bifurcation solver that integrates coupled
//!   nonlinear oscillators whose signs relax toward low-energy states;
//! - [`baselines`]: simulated annealing and exhaustive search for
//!   reference solutions;
//! - [`scheduler`]: joint gas-compressor / demand-response scheduling
//!   encoded as a QUBO with squared penalty constraints, plus a greedy
//!   status-quo baseline and automatic penalty calibration;
//! - [`carbon`]: deterministic interval-level emission attribution and
//!   aggregation;
//! - [`instance_gen`]: seeded synthetic demand, carbon-intensity and
//!   instance generation;
//! - [`bench`]: a benchmark harness comparing convergence speed and
//!   carbon outcomes across solvers.
//!
//! Everything randomized flows through the crate's own deterministic
//! [`rng`]; two runs with the same seeds produce byte-identical
//! results on any platform.
//!
//! ## Example
//!
//! ```
//! use gridspin::qubo::{QuboMatrix, energy};
//! use gridspin::sb::{solve_sb, SbConfig};
//!
//! // E(s) = s0 + s1 - 4 s0 s1: minimized by s = [1, 1].
//! let q = QuboMatrix::from_upper_triangle(
//!     2,
//!     &[(0, 0, 1.0), (1, 1, 1.0), (0, 1, -4.0)],
//! )?;
//! let result = solve_sb(&q, &SbConfig::default())?;
//! assert_eq!(result.best_bits.bits(), &[1, 1]);
//! assert_eq!(result.best_energy, -2.0);
//! assert_eq!(energy(&q, &result.best_bits)?, result.best_energy);
//! # Ok::<(), gridspin::Error>(())
//! ```

pub mod baselines;
pub mod bench;
pub mod carbon;
pub mod error;
pub mod instance_gen;
pub mod qubo;
pub mod rng;
pub mod sb;
pub mod scheduler;
pub mod solve;

pub use error::{Error, Result};
pub use qubo::{BinaryVector, IsingForm, QuboMatrix};
pub use solve::{SolveResult, TracePoint};

/// Default seed used across solvers, generators and the CLI.
pub const DEFAULT_SEED: u64 = 42;

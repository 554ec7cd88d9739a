//! Common result type shared by every solver.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qubo::BinaryVector;

/// One point of a convergence trace: the best energy seen after a given
/// number of objective evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Cumulative objective evaluations when this best was current.
    pub evals: u64,
    /// Best (lowest) energy seen so far.
    pub best_energy: f64,
}

/// Outcome of a solver run.
///
/// Invariants upheld by every solver in this crate:
/// - `trace` is nonempty, strictly increasing in `evals`, and
///   nonincreasing in `best_energy`;
/// - the final trace point carries `best_energy` and the total `evals`;
/// - `energy(q, best_bits) == best_energy` on the problem that was
///   solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_bits: BinaryVector,
    pub best_energy: f64,
    pub trace: Vec<TracePoint>,
    /// Total number of objective evaluations consumed.
    pub evals: u64,
    /// Seed the run was started with (for reproduction).
    pub seed: u64,
}

impl SolveResult {
    /// Write the trace as CSV with header `evals,best_energy`.
    pub fn write_trace_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "evals,best_energy")?;
        for p in &self.trace {
            writeln!(w, "{},{}", p.evals, p.best_energy)?;
        }
        Ok(())
    }
}

/// Incremental best-so-far tracker used by the solvers to build traces.
#[derive(Debug)]
pub(crate) struct BestTracker {
    best_bits: Option<BinaryVector>,
    best_energy: f64,
    trace: Vec<TracePoint>,
    evals: u64,
}

impl BestTracker {
    pub fn new() -> Self {
        BestTracker {
            best_bits: None,
            best_energy: f64::INFINITY,
            trace: Vec::new(),
            evals: 0,
        }
    }

    pub fn best_energy(&self) -> f64 {
        self.best_energy
    }

    /// Count `n` objective evaluations without recording a candidate.
    pub fn count_evals(&mut self, n: u64) {
        self.evals += n;
    }

    /// Offer a candidate observed at the current evaluation count.
    /// Records a trace point only on strict improvement.
    pub fn offer(&mut self, bits: &BinaryVector, e: f64) {
        if self.best_bits.is_none() || e < self.best_energy {
            self.best_bits = Some(bits.clone());
            self.best_energy = e;
            self.trace.push(TracePoint {
                evals: self.evals,
                best_energy: e,
            });
        }
    }

    /// Update best without touching the trace (used for bookkeeping
    /// states that did not consume an objective evaluation).
    pub fn offer_untraced(&mut self, bits: &BinaryVector, e: f64) {
        if self.best_bits.is_none() || e < self.best_energy {
            self.best_bits = Some(bits.clone());
            self.best_energy = e;
        }
    }

    /// Record one trace point at the current count (used by solvers that
    /// emit a fixed-cadence trace rather than improvement events).
    pub fn mark(&mut self) {
        self.trace.push(TracePoint {
            evals: self.evals,
            best_energy: self.best_energy,
        });
    }

    /// Finish the run: ensure the trace closes with a point at the final
    /// evaluation count carrying the final best energy, and produce the
    /// result.
    pub fn finish(mut self, seed: u64) -> SolveResult {
        match self.trace.last_mut() {
            Some(p) if p.evals == self.evals => p.best_energy = self.best_energy,
            _ => self.trace.push(TracePoint {
                evals: self.evals,
                best_energy: self.best_energy,
            }),
        }
        SolveResult {
            best_bits: self.best_bits.expect("solver offered no candidate"),
            best_energy: self.best_energy,
            trace: self.trace,
            evals: self.evals,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracker_builds_monotone_trace() {
        let mut t = BestTracker::new();
        let a = BinaryVector::from_bits(vec![0, 0]).unwrap();
        let b = BinaryVector::from_bits(vec![1, 0]).unwrap();
        t.count_evals(1);
        t.offer(&a, 5.0);
        t.count_evals(1);
        t.offer(&a, 6.0); // worse: no trace point
        t.count_evals(1);
        t.offer(&b, 2.0);
        let r = t.finish(9);
        assert_eq!(r.best_energy, 2.0);
        assert_eq!(r.best_bits, b);
        assert_eq!(r.evals, 3);
        assert_eq!(
            r.trace,
            vec![
                TracePoint { evals: 1, best_energy: 5.0 },
                TracePoint { evals: 3, best_energy: 2.0 },
            ]
        );
    }

    #[test]
    fn finish_appends_closing_point() {
        let mut t = BestTracker::new();
        let a = BinaryVector::from_bits(vec![1]).unwrap();
        t.count_evals(1);
        t.offer(&a, 1.0);
        t.count_evals(4); // further evals without improvement
        let r = t.finish(0);
        assert_eq!(r.trace.last().unwrap().evals, 5);
        assert_eq!(r.trace.last().unwrap().best_energy, 1.0);
        assert_eq!(r.evals, 5);
    }

    #[test]
    fn trace_csv_format() {
        let r = SolveResult {
            best_bits: BinaryVector::from_bits(vec![1]).unwrap(),
            best_energy: -1.5,
            trace: vec![
                TracePoint { evals: 1, best_energy: 0.0 },
                TracePoint { evals: 3, best_energy: -1.5 },
            ],
            evals: 3,
            seed: 42,
        };
        let mut buf = Vec::new();
        r.write_trace_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "evals,best_energy\n1,0\n3,-1.5\n"
        );
    }
}

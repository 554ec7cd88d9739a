//! QUBO problems: dense symmetric matrices over binary vectors, energy
//! evaluation, single-flip deltas, and the equivalent Ising form.
//!
//! A QUBO instance is `min_s  s^T Q s` over `s in {0,1}^n` with `Q` a
//! real symmetric `n x n` matrix. Because `s_i^2 = s_i`, linear costs
//! live on the diagonal of `Q`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the binary search space, one `u8` (0 or 1) per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinaryVector(Vec<u8>);

impl BinaryVector {
    /// Build from raw bits; every entry must be 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(idx) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "binary vector entry {idx} is {}, expected 0 or 1",
                bits[idx]
            )));
        }
        Ok(BinaryVector(bits))
    }

    /// The all-zero vector of length `n`.
    pub fn zeros(n: usize) -> Self {
        BinaryVector(vec![0; n])
    }

    /// Decode an unsigned integer: bit `i` of `code` (least significant
    /// bit = variable 0) becomes entry `i`.
    pub fn from_encoding(code: u64, n: usize) -> Self {
        BinaryVector((0..n).map(|i| ((code >> i) & 1) as u8).collect())
    }

    /// Inverse of [`BinaryVector::from_encoding`]; only valid for `n <= 64`.
    pub fn to_encoding(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Result<u8> {
        self.0.get(i).copied().ok_or(Error::IndexOutOfRange {
            context: "binary vector",
            index: i,
            len: self.0.len(),
        })
    }

    /// Flip entry `i` in place.
    pub fn flip(&mut self, i: usize) -> Result<()> {
        let len = self.0.len();
        let b = self.0.get_mut(i).ok_or(Error::IndexOutOfRange {
            context: "binary vector",
            index: i,
            len,
        })?;
        *b ^= 1;
        Ok(())
    }
}

/// Dense symmetric QUBO matrix.
///
/// Construction always symmetrizes, so `get(i, j) == get(j, i)` holds by
/// construction and the energy can be evaluated over the upper triangle
/// only.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboMatrix {
    n: usize,
    /// Row-major `n * n` entries; invariant: symmetric, all finite.
    coeffs: Vec<f64>,
}

impl QuboMatrix {
    /// Build from a full dense matrix; non-symmetric input is replaced by
    /// its symmetric part `(Q + Q^T) / 2`, which has the same energy on
    /// every binary vector.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "qubo row length",
                    expected: n,
                    got: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: "qubo matrix",
                    index: i * n + j,
                });
            }
        }
        let mut coeffs = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                coeffs[i * n + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        Ok(QuboMatrix { n, coeffs })
    }

    /// Build from upper-triangle terms: each `(i, j, v)` with `i <= j`
    /// contributes `v * s_i * s_j` to the energy. Duplicate index pairs
    /// accumulate. Entries with `i > j` are rejected.
    pub fn from_upper_triangle(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = QuboMatrix {
            n,
            coeffs: vec![0.0; n * n],
        };
        for &(i, j, v) in entries {
            if i > j {
                return Err(Error::InvalidParameter(format!(
                    "upper-triangle entry ({i}, {j}) has i > j"
                )));
            }
            if j >= n {
                return Err(Error::IndexOutOfRange {
                    context: "qubo entry",
                    index: j,
                    len: n,
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "qubo entry",
                    index: i * n + j,
                });
            }
            m.add_term(i, j, v);
        }
        Ok(m)
    }

    /// Zero matrix of size `n`; useful as a builder target.
    pub fn zeros(n: usize) -> Self {
        QuboMatrix {
            n,
            coeffs: vec![0.0; n * n],
        }
    }

    /// Add the energy term `v * s_i * s_j` (for `i == j`: `v * s_i`),
    /// preserving symmetry. Indices must be in range.
    pub fn add_term(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n, "add_term index out of range");
        if i == j {
            self.coeffs[i * self.n + i] += v;
        } else {
            // A pair (i, j) appears twice in the symmetric quadratic
            // form, so split the coefficient across both halves.
            self.coeffs[i * self.n + j] += 0.5 * v;
            self.coeffs[j * self.n + i] += 0.5 * v;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i * self.n + j]
    }

    /// Largest absolute coefficient; 0 for the zero matrix.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// A copy with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> QuboMatrix {
        QuboMatrix {
            n: self.n,
            coeffs: self.coeffs.iter().map(|v| v * factor).collect(),
        }
    }

    /// The nonzero upper-triangle terms `(i, j, v)` with the convention
    /// of [`QuboMatrix::from_upper_triangle`] (off-diagonal coefficients
    /// folded into a single term).
    pub fn to_upper_triangle(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                let v = if i == j {
                    self.get(i, i)
                } else {
                    2.0 * self.get(i, j)
                };
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

/// Energy `s^T Q s` of a binary vector.
pub fn energy(q: &QuboMatrix, s: &BinaryVector) -> Result<f64> {
    if s.len() != q.n() {
        return Err(Error::DimensionMismatch {
            context: "energy state length",
            expected: q.n(),
            got: s.len(),
        });
    }
    let n = q.n();
    let bits = s.bits();
    let mut e = 0.0;
    for i in 0..n {
        if bits[i] == 0 {
            continue;
        }
        e += q.get(i, i);
        for j in (i + 1)..n {
            if bits[j] == 1 {
                e += 2.0 * q.get(i, j);
            }
        }
    }
    Ok(e)
}

/// Energy change from flipping bit `i` of `s`, in O(n):
/// `delta = (1 - 2 s_i) * (Q_ii + 2 * sum_{j != i} Q_ij s_j)`.
pub fn delta_energy(q: &QuboMatrix, s: &BinaryVector, i: usize) -> Result<f64> {
    let n = q.n();
    if s.len() != n {
        return Err(Error::DimensionMismatch {
            context: "delta state length",
            expected: n,
            got: s.len(),
        });
    }
    if i >= n {
        return Err(Error::IndexOutOfRange {
            context: "delta flip index",
            index: i,
            len: n,
        });
    }
    let bits = s.bits();
    let mut cross = 0.0;
    for j in 0..n {
        if j != i && bits[j] == 1 {
            cross += q.get(i, j);
        }
    }
    let gain = q.get(i, i) + 2.0 * cross;
    Ok(if bits[i] == 0 { gain } else { -gain })
}

/// Ising representation of a QUBO under `s = (sigma + 1) / 2`.
///
/// Energy convention: `E(sigma) = sigma^T J sigma + h^T sigma + offset`
/// where the quadratic part is the full double sum (each unordered pair
/// counted twice via the symmetric `J`), and `E(sigma) = s^T Q s` for
/// the corresponding binary vector.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingForm {
    n: usize,
    /// Row-major symmetric couplings with zero diagonal.
    couplings: Vec<f64>,
    fields: Vec<f64>,
    offset: f64,
}

impl IsingForm {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n + j]
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields[i]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Row `i` of the coupling matrix.
    #[inline]
    pub fn coupling_row(&self, i: usize) -> &[f64] {
        &self.couplings[i * self.n..(i + 1) * self.n]
    }

    /// Energy of a spin configuration (`spins[i]` is -1 or +1).
    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "ising state length",
                expected: self.n,
                got: spins.len(),
            });
        }
        if let Some(idx) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!(
                "spin {idx} is {}, expected -1 or +1",
                spins[idx]
            )));
        }
        let mut e = self.offset;
        for i in 0..self.n {
            let si = spins[i] as f64;
            e += self.fields[i] * si;
            for j in 0..self.n {
                e += self.coupling(i, j) * si * spins[j] as f64;
            }
        }
        Ok(e)
    }
}

/// Convert a QUBO matrix to its Ising form.
///
/// With `s = (sigma + 1) / 2`:
/// `J_ij = Q_ij / 4` (i != j), `h_i = (sum_j Q_ij) / 2`,
/// `offset = (trace(Q) + sum_ij Q_ij) / 4`.
pub fn to_ising(q: &QuboMatrix) -> IsingForm {
    let n = q.n();
    let mut couplings = vec![0.0; n * n];
    let mut fields = vec![0.0; n];
    let mut trace = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            let v = q.get(i, j);
            row_sum += v;
            if i != j {
                couplings[i * n + j] = v / 4.0;
            }
        }
        fields[i] = row_sum / 2.0;
        trace += q.get(i, i);
        total += row_sum;
    }
    IsingForm {
        n,
        couplings,
        fields,
        offset: (trace + total) / 4.0,
    }
}

/// Serialized QUBO file: size plus upper-triangle entries.
#[derive(Debug, Serialize, Deserialize)]
struct QuboFile {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

/// Parse a QUBO from its JSON form
/// `{"n": 2, "entries": [[0, 0, -1.0], [0, 1, 2.0]]}` where entries are
/// upper-triangle terms (`i <= j`, duplicates accumulate).
pub fn read_qubo_json<R: BufRead>(reader: R) -> Result<QuboMatrix> {
    let file: QuboFile = serde_json::from_reader(reader)?;
    QuboMatrix::from_upper_triangle(file.n, &file.entries)
}

/// Write a QUBO in the format accepted by [`read_qubo_json`].
pub fn write_qubo_json<W: Write>(writer: &mut W, q: &QuboMatrix) -> Result<()> {
    let file = QuboFile {
        n: q.n(),
        entries: q.to_upper_triangle(),
    };
    serde_json::to_writer_pretty(&mut *writer, &file)?;
    writer.write_all(b"\n")?;
    Ok(())
}

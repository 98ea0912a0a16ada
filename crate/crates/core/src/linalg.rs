// Copyright 2026 The esw-core Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Everything here is deliberately small and dense: the spaces of interest
//! have dimension at most a few dozen, and every identity is checked with a
//! Frobenius-norm residual.
//!
//! Composite spaces follow the written order of the tensor product. For
//! `K ⊗ C²` the spatial index is the slow (major) index and the ancilla index
//! is the fast one, so the composite index of `(i, a)` is `i * 2 + a`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for algebraic identities.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Complex scalar used for all amplitudes and matrix entries.
pub type Scalar = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left} vs {right}")]
    DimensionMismatch {
        op: &'static str,
        left: usize,
        right: usize,
    },
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("entry count {len} is not a perfect square")]
    NotSquare { len: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

fn check_finite(values: &[Scalar]) -> Result<()> {
    match values
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        Some(index) => Err(LinalgError::NonFinite { index }),
        None => Ok(()),
    }
}

fn same_dim(op: &'static str, left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { op, left, right })
    }
}

/// A vector in a finite-dimensional complex Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amp: Vec<Scalar>,
}

impl Ket {
    pub fn new(amp: Vec<Scalar>) -> Result<Self> {
        if amp.is_empty() {
            return Err(LinalgError::EmptyDimension);
        }
        check_finite(&amp)?;
        Ok(Self { amp })
    }

    pub fn from_real(amp: &[f64]) -> Result<Self> {
        Self::new(amp.iter().map(|&x| Scalar::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![Scalar::new(0.0, 0.0); dim])
    }

    /// Standard basis vector `e_index` (zero-based).
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(LinalgError::DimensionMismatch {
                op: "basis",
                left: index,
                right: dim,
            });
        }
        let mut ket = Self::zeros(dim)?;
        ket.amp[index] = Scalar::new(1.0, 0.0);
        Ok(ket)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Scalar] {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(Scalar::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: Scalar) -> Ket {
        Ket {
            amp: self.amp.iter().map(|z| z * factor).collect(),
        }
    }

    /// Unit vector along `self`; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Ket> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(self.scale(Scalar::new(1.0 / n, 0.0)))
        }
    }

    pub fn try_add(&self, other: &Ket) -> Result<Ket> {
        same_dim("ket add", self.dim(), other.dim())?;
        Ok(Ket {
            amp: self
                .amp
                .iter()
                .zip(&other.amp)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Ket) -> Result<Ket> {
        same_dim("ket sub", self.dim(), other.dim())?;
        Ok(Ket {
            amp: self
                .amp
                .iter()
                .zip(&other.amp)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `u ⊗ v` with composite index `i * dim(v) + k`.
    pub fn tensor(&self, other: &Ket) -> Ket {
        let mut amp = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amp {
            for b in &other.amp {
                amp.push(a * b);
            }
        }
        Ket { amp }
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.amp.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", z)?;
        }
        write!(f, ")")
    }
}

/// Inner product `⟨u|v⟩`, conjugate-linear in the first slot.
pub fn inner(u: &Ket, v: &Ket) -> Result<Scalar> {
    same_dim("inner", u.dim(), v.dim())?;
    Ok(u.amp.iter().zip(&v.amp).map(|(a, b)| a.conj() * b).sum())
}

/// Dyad `|u⟩⟨v|`.
pub fn outer(u: &Ket, v: &Ket) -> Result<Operator> {
    same_dim("outer", u.dim(), v.dim())?;
    let dim = u.dim();
    let mut entries = Vec::with_capacity(dim * dim);
    for a in &u.amp {
        for b in &v.amp {
            entries.push(a * b.conj());
        }
    }
    Ok(Operator { dim, entries })
}

/// A square matrix acting on a `dim`-dimensional space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<Scalar>,
}

impl Operator {
    pub fn from_entries(dim: usize, entries: Vec<Scalar>) -> Result<Self> {
        if dim == 0 {
            return Err(LinalgError::EmptyDimension);
        }
        same_dim("operator entries", entries.len(), dim * dim)?;
        check_finite(&entries)?;
        Ok(Self { dim, entries })
    }

    /// Build from nested rows; rejects ragged or non-square input.
    pub fn from_rows(rows: &[Vec<Scalar>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(LinalgError::EmptyDimension);
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(LinalgError::NotSquare {
                    len: rows.iter().map(Vec::len).sum(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_entries(dim, entries)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Scalar>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Scalar::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_entries(dim, vec![Scalar::new(0.0, 0.0); dim * dim])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut op = Self::zeros(dim)?;
        for (i, &d) in diag.iter().enumerate() {
            op.entries[i * dim + i] = Scalar::new(d, 0.0);
        }
        Ok(op)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Scalar {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<Scalar>> {
        self.entries
            .chunks(self.dim)
            .map(<[Scalar]>::to_vec)
            .collect()
    }

    pub fn trace(&self) -> Scalar {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Operator {
        let n = self.dim;
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                entries.push(self.get(c, r).conj());
            }
        }
        Operator { dim: n, entries }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(Scalar::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, factor: Scalar) -> Operator {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        same_dim("operator add", self.dim, other.dim)?;
        Ok(Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        same_dim("operator sub", self.dim, other.dim)?;
        Ok(Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        same_dim("operator product", self.dim, other.dim)?;
        let n = self.dim;
        let mut entries = vec![Scalar::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == Scalar::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * other.entries[k * n + c];
                }
            }
        }
        Ok(Operator { dim: n, entries })
    }

    /// `1 - self`.
    pub fn complement(&self) -> Operator {
        let mut out = self.scale(Scalar::new(-1.0, 0.0));
        for i in 0..self.dim {
            out.entries[i * self.dim + i] += 1.0;
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, u: &Ket) -> Result<Ket> {
        same_dim("apply", self.dim, u.dim())?;
        let amp = self
            .entries
            .chunks(self.dim)
            .map(|row| row.iter().zip(u.amplitudes()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(Ket { amp })
    }

    /// Kronecker product: entry `((i,k),(j,l)) = a[i][j] * b[k][l]` at row
    /// `i * dim(b) + k`, column `j * dim(b) + l`.
    pub fn tensor(&self, other: &Operator) -> Operator {
        let (na, nb) = (self.dim, other.dim);
        let n = na * nb;
        let mut entries = vec![Scalar::new(0.0, 0.0); n * n];
        for i in 0..na {
            for j in 0..na {
                let a = self.get(i, j);
                for k in 0..nb {
                    let row = (i * nb + k) * n;
                    for l in 0..nb {
                        entries[row + j * nb + l] = a * other.get(k, l);
                    }
                }
            }
        }
        Operator { dim: n, entries }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        same_dim("max_abs_diff", self.dim, other.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.dim) {
            let cells: Vec<String> = row
                .iter()
                .map(|z| {
                    if z.im == 0.0 {
                        format!("{:>8.4}", z.re)
                    } else {
                        format!("{:>8.4}{:+.4}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: Self) -> Operator {
        self.try_add(rhs).expect("operator dimensions must agree")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: Self) -> Operator {
        self.try_sub(rhs).expect("operator dimensions must agree")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: Self) -> Operator {
        self.try_mul(rhs).expect("operator dimensions must agree")
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(Scalar::new(-1.0, 0.0))
    }
}

/// `ab - ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    same_dim("commutator", a.dim(), b.dim())?;
    Ok(&(a * b) - &(b * a))
}

/// A single residual measured against a tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn new(value: f64, tol: f64) -> Self {
        Self {
            value,
            tol,
            pass: value <= tol,
        }
    }
}

/// Hermiticity and idempotence residuals of a candidate projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCheck {
    pub hermiticity: ResidualReport,
    pub idempotence: ResidualReport,
}

impl ProjectionCheck {
    pub fn pass(&self) -> bool {
        self.hermiticity.pass && self.idempotence.pass
    }

    /// Name and report of the first failing residual, if any.
    pub fn first_failure(&self) -> Option<(&'static str, ResidualReport)> {
        if !self.hermiticity.pass {
            Some(("hermiticity", self.hermiticity))
        } else if !self.idempotence.pass {
            Some(("idempotence", self.idempotence))
        } else {
            None
        }
    }
}

/// Residuals `‖p − p†‖_F` and `‖p² − p‖_F`.
pub fn is_projection(p: &Operator, tol: f64) -> ProjectionCheck {
    let herm = (p - &p.adjoint()).frobenius_norm();
    let idem = (&(p * p) - p).frobenius_norm();
    ProjectionCheck {
        hermiticity: ResidualReport::new(herm, tol),
        idempotence: ResidualReport::new(idem, tol),
    }
}

/// Serialized form of a complex number: `[re, im]`.
pub fn scalar_to_pair(z: Scalar) -> [f64; 2] {
    [z.re, z.im]
}

pub fn pair_to_scalar(p: [f64; 2]) -> Scalar {
    Scalar::new(p[0], p[1])
}

/// Operator as nested `[re, im]` rows.
pub fn operator_to_pairs(op: &Operator) -> Vec<Vec<[f64; 2]>> {
    op.entries()
        .chunks(op.dim())
        .map(|row| row.iter().copied().map(scalar_to_pair).collect())
        .collect()
}

pub fn operator_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<Operator> {
    let rows: Vec<Vec<Scalar>> = rows
        .iter()
        .map(|r| r.iter().copied().map(pair_to_scalar).collect())
        .collect();
    Operator::from_rows(&rows)
}

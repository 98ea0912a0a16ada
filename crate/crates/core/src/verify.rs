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

//! Checks for non-disturbing which-path detectors.
//!
//! A projection `T₊` is a non-disturbing detector for a target projection
//! `E₊` in state `Ψ` when
//!
//! * `[T₊, F] = 0` for every screen event `F`, and
//! * `[T₊, E₊] = 0` and `T₊Ψ = E₊Ψ`.
//!
//! Reports carry every residual, not just the verdict.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    commutator, is_projection, Ket, LinalgError, Operator, ResidualReport, Scalar,
};
use crate::model::{embed_ancilla, TwoSlitModel, ANCILLA_DIM};

/// Default threshold above which a commutator norm counts as incompatible.
pub const DEFAULT_INCOMPATIBILITY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{operator} is not a projection: {residual} residual {value:e} exceeds {tol:e}")]
    NotAProjection {
        operator: &'static str,
        residual: &'static str,
        value: f64,
        tol: f64,
    },
    #[error("model has no Eplus")]
    MissingEplus,
    #[error("composite dimension {0} is not 2·dim_K")]
    OddComposite(usize),
}

pub type Result<T> = std::result::Result<T, VerifyError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorCheckReport {
    pub commutes_with_f: Vec<ResidualReport>,
    pub commutes_with_target: ResidualReport,
    pub correlation_residual: f64,
    pub pass: bool,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncompatibilityReport {
    pub commutator_norm: f64,
    pub incompatible: bool,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationChainReport {
    pub residual_e_t: f64,
    pub residual_t_eplus: f64,
    pub probability: f64,
}

impl CorrelationChainReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.residual_e_t <= tol && self.residual_t_eplus <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectCorrelationReport {
    pub commutator: ResidualReport,
    pub correlation: ResidualReport,
    /// `‖(1−T)Ψ − (1−E)Ψ‖`, implied by the other two.
    pub complement_correlation: ResidualReport,
}

impl DirectCorrelationReport {
    pub fn pass(&self) -> bool {
        self.commutator.pass && self.correlation.pass && self.complement_correlation.pass
    }
}

fn require_projection(name: &'static str, op: &Operator, tol: f64) -> Result<()> {
    match is_projection(op, tol).first_failure() {
        Some((residual, report)) => Err(VerifyError::NotAProjection {
            operator: name,
            residual,
            value: report.value,
            tol,
        }),
        None => Ok(()),
    }
}

fn check_dim(op: &'static str, left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { op, left, right }.into())
    }
}

/// `‖aΨ − bΨ‖`.
fn action_residual(a: &Operator, b: &Operator, psi: &Ket) -> Result<f64> {
    Ok(a.apply(psi)?.try_sub(&b.apply(psi)?)?.norm())
}

/// Evaluate both detector conditions for `(T₊, E₊)` in state `Ψ`.
pub fn check_esw_detector(
    t_plus: &Operator,
    e_plus: &Operator,
    screen_events: &[Operator],
    psi: &Ket,
    tol: f64,
) -> Result<DetectorCheckReport> {
    check_dim("check_esw_detector", t_plus.dim(), e_plus.dim())?;
    check_dim("check_esw_detector", t_plus.dim(), psi.dim())?;
    require_projection("T+", t_plus, tol)?;
    require_projection("E+", e_plus, tol)?;

    let commutes_with_f = screen_events
        .iter()
        .map(|f| {
            check_dim("check_esw_detector", t_plus.dim(), f.dim())?;
            Ok(ResidualReport::new(
                commutator(t_plus, f)?.frobenius_norm(),
                tol,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let commutes_with_target =
        ResidualReport::new(commutator(t_plus, e_plus)?.frobenius_norm(), tol);
    let correlation_residual = action_residual(t_plus, e_plus, psi)?;
    let pass = commutes_with_f.iter().all(|r| r.pass)
        && commutes_with_target.pass
        && correlation_residual <= tol;
    Ok(DetectorCheckReport {
        commutes_with_f,
        commutes_with_target,
        correlation_residual,
        pass,
        tol,
    })
}

/// `[T, E] = 0` and `TΨ = EΨ`, plus the implied `(1−T)Ψ = (1−E)Ψ`.
pub fn check_direct_correlation(
    t: &Operator,
    e: &Operator,
    psi: &Ket,
    tol: f64,
) -> Result<DirectCorrelationReport> {
    check_dim("check_direct_correlation", t.dim(), e.dim())?;
    Ok(DirectCorrelationReport {
        commutator: ResidualReport::new(commutator(t, e)?.frobenius_norm(), tol),
        correlation: ResidualReport::new(action_residual(t, e, psi)?, tol),
        complement_correlation: ResidualReport::new(
            action_residual(&t.complement(), &e.complement(), psi)?,
            tol,
        ),
    })
}

pub fn check_incompatibility(
    e_plus: &Operator,
    e: &Operator,
    threshold: f64,
) -> Result<IncompatibilityReport> {
    let commutator_norm = commutator(e_plus, e)?.frobenius_norm();
    Ok(IncompatibilityReport {
        commutator_norm,
        incompatible: commutator_norm > threshold,
        threshold,
    })
}

/// Residuals of `EΨ = TΨ = E₊Ψ` and the branch probability `‖TΨ‖²`.
pub fn check_correlation_chain(model: &TwoSlitModel) -> Result<CorrelationChainReport> {
    let eplus = model.eplus().ok_or(VerifyError::MissingEplus)?;
    let psi = model.psi();
    let t_psi = model.t().apply(psi)?;
    let residual_e_t = model.e().apply(psi)?.try_sub(&t_psi)?.norm();
    let residual_t_eplus = t_psi.try_sub(&eplus.apply(psi)?)?.norm();
    Ok(CorrelationChainReport {
        residual_e_t,
        residual_t_eplus,
        probability: t_psi.norm_sqr().min(1.0),
    })
}

/// Kind of a 2×2 ancilla projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Zero,
    Identity,
    RankOne,
}

/// A projection `R` on the ancilla such that `1 ⊗ R` is a non-disturbing
/// detector for the requested target.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedDetector {
    pub kind: DetectorKind,
    pub r: Operator,
    /// Bloch vector `n` of `R = (1 + n·σ)/2` for rank-one detectors.
    pub bloch: Option<[f64; 3]>,
    pub report: DetectorCheckReport,
}

fn pauli(axis: usize) -> Operator {
    let z = Scalar::new(0.0, 0.0);
    let one = Scalar::new(1.0, 0.0);
    let i = Scalar::new(0.0, 1.0);
    let rows = match axis {
        0 => vec![vec![z, one], vec![one, z]],
        1 => vec![vec![z, -i], vec![i, z]],
        _ => vec![vec![one, z], vec![z, -one]],
    };
    Operator::from_rows(&rows).expect("2x2")
}

fn rank_one_from_bloch(n: [f64; 3]) -> Operator {
    let mut r = Operator::identity(ANCILLA_DIM).expect("dim 2");
    for (axis, &component) in n.iter().enumerate() {
        r = &r + &pauli(axis).scale(Scalar::new(component, 0.0));
    }
    r.scale(Scalar::new(0.5, 0.0))
}

/// Solve the 3×3 symmetric system `g x = b`; `None` when singular.
fn solve3(g: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(g);
    let scale = g.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    if d.abs() <= 1e-14 * scale.powi(3) || scale == 0.0 {
        return None;
    }
    let mut x = [0.0; 3];
    for (col, xc) in x.iter_mut().enumerate() {
        let mut m = g;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        *xc = det(m) / d;
    }
    Some(x)
}

/// Least-squares Bloch vector `n` for `(1 ⊗ (1 + n·σ)/2)Ψ = E₊Ψ`, i.e.
/// `(1 ⊗ n·σ)Ψ = 2E₊Ψ − Ψ`. The map `n ↦ (1 ⊗ n·σ)Ψ` is injective for
/// `Ψ ≠ 0` because `(n·σ)² = |n|²`, so the solution is unique.
fn solve_bloch(e_plus: &Operator, psi: &Ket, dim_k: usize) -> Result<Option<[f64; 3]>> {
    let target = e_plus
        .apply(psi)?
        .scale(Scalar::new(2.0, 0.0))
        .try_sub(psi)?;
    let columns: Vec<Ket> = (0..3)
        .map(|axis| {
            Ok(embed_ancilla(&pauli(axis), dim_k)
                .map_err(model_err)?
                .apply(psi)?)
        })
        .collect::<Result<_>>()?;
    // real inner products Re⟨a|b⟩ give the normal equations of the real system
    let re_inner = |a: &Ket, b: &Ket| -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x.conj() * y).re)
            .sum()
    };
    let mut g = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = re_inner(&columns[i], &columns[j]);
        }
        rhs[i] = re_inner(&columns[i], &target);
    }
    Ok(solve3(g, rhs))
}

fn model_err(e: crate::model::ModelError) -> VerifyError {
    match e {
        crate::model::ModelError::Linalg(l) => VerifyError::Linalg(l),
        other => unreachable!("embed_ancilla only fails on dimensions: {}", other),
    }
}

/// Every ancilla projection `R` with `1 ⊗ R` a non-disturbing detector for
/// `E₊` in state `Ψ`.
///
/// Candidates are `0`, `1`, and the unique rank-one solution of the linear
/// correlation constraint, snapped to the nearest rank-one projector. Each
/// candidate is re-verified with [`check_esw_detector`]; near-duplicates are
/// merged.
pub fn synthesize_detectors(
    e_plus: &Operator,
    psi: &Ket,
    screen_events: &[Operator],
    tol: f64,
) -> Result<Vec<SynthesizedDetector>> {
    let composite = e_plus.dim();
    if !composite.is_multiple_of(ANCILLA_DIM) {
        return Err(VerifyError::OddComposite(composite));
    }
    check_dim("synthesize_detectors", composite, psi.dim())?;
    let dim_k = composite / ANCILLA_DIM;

    let mut candidates: Vec<(DetectorKind, Operator, Option<[f64; 3]>)> = vec![
        (DetectorKind::Zero, Operator::zeros(ANCILLA_DIM)?, None),
        (
            DetectorKind::Identity,
            Operator::identity(ANCILLA_DIM)?,
            None,
        ),
    ];
    if let Some(n) = solve_bloch(e_plus, psi, dim_k)? {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len > 0.0 {
            let unit = [n[0] / len, n[1] / len, n[2] / len];
            candidates.push((DetectorKind::RankOne, rank_one_from_bloch(unit), Some(unit)));
        }
    }

    let mut found: Vec<SynthesizedDetector> = Vec::new();
    for (kind, r, bloch) in candidates {
        let t_plus = embed_ancilla(&r, dim_k).map_err(model_err)?;
        let report = match check_esw_detector(&t_plus, e_plus, screen_events, psi, tol) {
            Ok(report) => report,
            // a non-projection target admits no detector
            Err(VerifyError::NotAProjection { .. }) => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        if !report.pass {
            continue;
        }
        let duplicate = found.iter().any(|d| (&d.r - &r).frobenius_norm() <= tol);
        if !duplicate {
            found.push(SynthesizedDetector {
                kind,
                r,
                bloch,
                report,
            });
        }
    }
    Ok(found)
}

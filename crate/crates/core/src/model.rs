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

//! Concrete two-slit models on `K ⊗ C²`.
//!
//! Two models are built in:
//!
//! * the *simple* model, `dim K = 2`, with `Ψ = (ψ₁⊗|1⟩ + ψ₀⊗|0⟩)/√2`;
//! * the *four-mode* model, `dim K = 4`, with
//!   `Ψ = ½[(ψ₁+ψ₂)⊗|1⟩ + (ψ₃+ψ₄)⊗|0⟩]` and the extra projection `L₊`.
//!
//! The ancilla basis is indexed `0 ↔ |0⟩`, `1 ↔ |1⟩`; the which-slit detector
//! is `T = 1 ⊗ |1⟩⟨1|`. Spatial operators act on the composite space only
//! through `X ⊗ 1`, so any spatial dynamics commutes with every ancilla
//! operator. No particular Hamiltonian is stored.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    is_projection, operator_from_pairs, operator_to_pairs, outer, pair_to_scalar, scalar_to_pair,
    Ket, LinalgError, Operator, Scalar, DEFAULT_TOL,
};

pub const ANCILLA_DIM: usize = 2;

/// Coefficients of `L₊` in the ψ-basis: row `k` holds the bra coefficients
/// multiplying `|ψ_k⟩`.
pub const LPLUS_COEFFS: [[f64; 4]; 4] = [
    [0.75, 0.25, -0.25, 0.25],
    [0.25, 0.75, 0.25, -0.25],
    [-0.25, 0.25, 0.25, -0.25],
    [0.25, -0.25, -0.25, 0.25],
];

/// Agreement required between the dyad-assembled and literal `L₊`.
pub const LPLUS_TRANSCRIPTION_TOL: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("{operator} violates {residual}: residual {value:e} exceeds tolerance {tol:e}")]
    InvariantViolation {
        operator: String,
        residual: &'static str,
        value: f64,
        tol: f64,
    },
}

impl ModelError {
    /// True for errors that indicate a failed physics check rather than
    /// malformed input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, ModelError::InvariantViolation { .. })
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Ancilla basis ket `|outcome⟩`, outcome ∈ {0, 1}.
pub fn ancilla_ket(outcome: u8) -> Ket {
    assert!(outcome <= 1, "ancilla outcome must be 0 or 1");
    Ket::basis(ANCILLA_DIM, outcome as usize).expect("valid ancilla index")
}

/// `|outcome⟩⟨outcome|` on `C²`.
pub fn ancilla_projector(outcome: u8) -> Operator {
    let k = ancilla_ket(outcome);
    outer(&k, &k).expect("same dimension")
}

/// `Lx ⊗ 1` on `K ⊗ C²`.
pub fn embed_spatial(lx: &Operator, dim_k: usize) -> Result<Operator> {
    if lx.dim() != dim_k {
        return Err(LinalgError::DimensionMismatch {
            op: "embed_spatial",
            left: lx.dim(),
            right: dim_k,
        }
        .into());
    }
    Ok(lx.tensor(&Operator::identity(ANCILLA_DIM)?))
}

/// `1 ⊗ R` on `K ⊗ C²`.
pub fn embed_ancilla(r: &Operator, dim_k: usize) -> Result<Operator> {
    if r.dim() != ANCILLA_DIM {
        return Err(LinalgError::DimensionMismatch {
            op: "embed_ancilla",
            left: r.dim(),
            right: ANCILLA_DIM,
        }
        .into());
    }
    Ok(Operator::identity(dim_k)?.tensor(r))
}

/// Which-slit detector `T = 1 ⊗ |1⟩⟨1|`.
pub fn which_slit_detector(dim_k: usize) -> Result<Operator> {
    embed_ancilla(&ancilla_projector(1), dim_k)
}

/// `L₊ = A + B + C + D` assembled from dyads over an orthonormal frame.
pub fn lplus_in_frame(frame: &[Ket; 4]) -> Result<Operator> {
    let dim = frame[0].dim();
    let mut sum = Operator::zeros(dim)?;
    for (k, psi_k) in frame.iter().enumerate() {
        // |ψ_k⟩ ⟨bra_k| with ⟨bra_k| = Σ_j c_kj ⟨ψ_j|
        let mut bra = Ket::zeros(dim)?;
        for (j, psi_j) in frame.iter().enumerate() {
            bra = bra.try_add(&psi_j.scale(Scalar::new(LPLUS_COEFFS[k][j], 0.0)))?;
        }
        sum = sum.try_add(&outer(psi_k, &bra)?)?;
    }
    Ok(sum)
}

/// `L₊` in the standard basis `ψ_k = e_k`.
///
/// Assembled from the four dyads and compared against the literal rational
/// matrix; a disagreement above `LPLUS_TRANSCRIPTION_TOL` is an error.
pub fn build_lplus() -> Result<Operator> {
    let frame = standard_frame()?;
    let assembled = lplus_in_frame(&frame)?;
    let rows: Vec<&[f64]> = LPLUS_COEFFS.iter().map(|r| r.as_slice()).collect();
    let literal = Operator::from_real_rows(&rows)?;
    let diff = assembled.max_abs_diff(&literal)?;
    if diff > LPLUS_TRANSCRIPTION_TOL {
        return Err(ModelError::InvariantViolation {
            operator: "Lplus".into(),
            residual: "transcription",
            value: diff,
            tol: LPLUS_TRANSCRIPTION_TOL,
        });
    }
    Ok(assembled)
}

fn standard_frame() -> Result<[Ket; 4]> {
    Ok([
        Ket::basis(4, 0)?,
        Ket::basis(4, 1)?,
        Ket::basis(4, 2)?,
        Ket::basis(4, 3)?,
    ])
}

/// A labelled spatial basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledKet {
    pub label: String,
    pub ket: Ket,
}

/// Operators and state of one two-slit model, with invariants checked at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSlitModel {
    dim_k: usize,
    l: Operator,
    e: Operator,
    t: Operator,
    psi: Ket,
    spatial_basis: Vec<LabeledKet>,
    lplus: Option<Operator>,
    eplus: Option<Operator>,
}

impl TwoSlitModel {
    /// Assemble a model and verify normalization and projection invariants
    /// at `tol`.
    pub fn from_parts(
        dim_k: usize,
        l: Operator,
        t: Operator,
        psi: Ket,
        spatial_basis: Vec<LabeledKet>,
        lplus: Option<Operator>,
        tol: f64,
    ) -> Result<Self> {
        let composite = dim_k * ANCILLA_DIM;
        if psi.dim() != composite {
            return Err(ModelError::Config(format!(
                "state has dimension {}, expected {}",
                psi.dim(),
                composite
            )));
        }
        if t.dim() != composite {
            return Err(ModelError::Config(format!(
                "T has dimension {}, expected {}",
                t.dim(),
                composite
            )));
        }
        if let Some(b) = spatial_basis.iter().find(|b| b.ket.dim() != dim_k) {
            return Err(ModelError::Config(format!(
                "basis vector {} has dimension {}, expected {}",
                b.label,
                b.ket.dim(),
                dim_k
            )));
        }
        let e = embed_spatial(&l, dim_k)?;
        let eplus = lplus
            .as_ref()
            .map(|lp| embed_spatial(lp, dim_k))
            .transpose()?;
        let model = Self {
            dim_k,
            l,
            e,
            t,
            psi,
            spatial_basis,
            lplus,
            eplus,
        };
        model.verify_invariants(tol)?;
        Ok(model)
    }

    /// Re-check `‖Ψ‖ = 1` and that every stored projection is one.
    pub fn verify_invariants(&self, tol: f64) -> Result<()> {
        let norm_residual = (self.psi.norm() - 1.0).abs();
        if norm_residual > tol {
            return Err(ModelError::InvariantViolation {
                operator: "state".into(),
                residual: "normalization",
                value: norm_residual,
                tol,
            });
        }
        for (name, op) in self.projections() {
            if let Some((residual, report)) = is_projection(op, tol).first_failure() {
                return Err(ModelError::InvariantViolation {
                    operator: name.to_string(),
                    residual,
                    value: report.value,
                    tol,
                });
            }
        }
        Ok(())
    }

    /// Every projection stored in the model, by name.
    pub fn projections(&self) -> Vec<(&'static str, &Operator)> {
        let mut out = vec![("L", &self.l), ("E", &self.e), ("T", &self.t)];
        if let Some(lp) = &self.lplus {
            out.push(("Lplus", lp));
        }
        if let Some(ep) = &self.eplus {
            out.push(("Eplus", ep));
        }
        out
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn composite_dim(&self) -> usize {
        self.dim_k * ANCILLA_DIM
    }

    pub fn l(&self) -> &Operator {
        &self.l
    }

    pub fn e(&self) -> &Operator {
        &self.e
    }

    pub fn t(&self) -> &Operator {
        &self.t
    }

    pub fn psi(&self) -> &Ket {
        &self.psi
    }

    pub fn spatial_basis(&self) -> &[LabeledKet] {
        &self.spatial_basis
    }

    pub fn lplus(&self) -> Option<&Operator> {
        self.lplus.as_ref()
    }

    pub fn eplus(&self) -> Option<&Operator> {
        self.eplus.as_ref()
    }

    /// Same model with `Ψ` replaced; invariants are re-checked.
    pub fn with_state(&self, psi: Ket, tol: f64) -> Result<Self> {
        Self::from_parts(
            self.dim_k,
            self.l.clone(),
            self.t.clone(),
            psi,
            self.spatial_basis.clone(),
            self.lplus.clone(),
            tol,
        )
    }

    /// Same model with `L₊` replaced (or added).
    pub fn with_lplus(&self, lplus: Operator, tol: f64) -> Result<Self> {
        Self::from_parts(
            self.dim_k,
            self.l.clone(),
            self.t.clone(),
            self.psi.clone(),
            self.spatial_basis.clone(),
            Some(lplus),
            tol,
        )
    }
}

/// `dim K = 2`, `ψ₁ = e₁`, `ψ₀ = e₂`, `L = |ψ₁⟩⟨ψ₁|`.
pub fn build_simple_model() -> TwoSlitModel {
    let psi1 = Ket::basis(2, 0).expect("dim 2");
    let psi0 = Ket::basis(2, 1).expect("dim 2");
    let l = outer(&psi1, &psi1).expect("dim 2");
    let state = psi1
        .tensor(&ancilla_ket(1))
        .try_add(&psi0.tensor(&ancilla_ket(0)))
        .expect("dim 4")
        .scale(Scalar::new(FRAC_1_SQRT_2, 0.0));
    let basis = vec![
        LabeledKet {
            label: "psi_1".into(),
            ket: psi1,
        },
        LabeledKet {
            label: "psi_0".into(),
            ket: psi0,
        },
    ];
    TwoSlitModel::from_parts(
        2,
        l,
        which_slit_detector(2).expect("dim 2"),
        state,
        basis,
        None,
        DEFAULT_TOL,
    )
    .expect("simple model satisfies its invariants")
}

/// Four-mode model in the standard frame `ψ_k = e_k`.
pub fn build_four_mode_model() -> TwoSlitModel {
    let frame = standard_frame().expect("dim 4");
    let model = build_four_mode_model_in_frame(&frame, DEFAULT_TOL)
        .expect("four-mode model satisfies its invariants");
    let lplus = build_lplus().expect("L+ transcription check");
    debug_assert_eq!(model.lplus(), Some(&lplus));
    model
}

/// Four-mode model over an arbitrary orthonormal frame `ψ₁…ψ₄` in `K`.
///
/// `L = P₁ + P₂` with `P_k = |ψ_k⟩⟨ψ_k|`, and `L₊` uses the same coefficient
/// template as the standard model.
pub fn build_four_mode_model_in_frame(frame: &[Ket; 4], tol: f64) -> Result<TwoSlitModel> {
    let dim_k = frame[0].dim();
    let p: Vec<Operator> = frame
        .iter()
        .map(|k| outer(k, k))
        .collect::<std::result::Result<_, _>>()?;
    let l = p[0].try_add(&p[1])?;
    let one = ancilla_ket(1);
    let zero = ancilla_ket(0);
    let state = frame[0]
        .try_add(&frame[1])?
        .tensor(&one)
        .try_add(&frame[2].try_add(&frame[3])?.tensor(&zero))?
        .scale(Scalar::new(0.5, 0.0));
    let basis = frame
        .iter()
        .enumerate()
        .map(|(i, k)| LabeledKet {
            label: format!("psi_{}", i + 1),
            ket: k.clone(),
        })
        .collect();
    TwoSlitModel::from_parts(
        dim_k,
        l,
        which_slit_detector(dim_k)?,
        state,
        basis,
        Some(lplus_in_frame(frame)?),
        tol,
    )
}

/// Rank-one projectors `P_k = |ψ_k⟩⟨ψ_k|` for the model's spatial basis.
pub fn basis_projectors(model: &TwoSlitModel) -> Vec<Operator> {
    model
        .spatial_basis()
        .iter()
        .map(|b| outer(&b.ket, &b.ket).expect("same dimension"))
        .collect()
}

/// A family of screen events `F = Π ⊗ 1` for the abstract models: each
/// spatial basis indicator, plus the projector onto the uniform superposition.
pub fn default_screen_events(dim_k: usize) -> Result<Vec<Operator>> {
    let mut events = Vec::with_capacity(dim_k + 1);
    for i in 0..dim_k {
        let e = Ket::basis(dim_k, i)?;
        events.push(embed_spatial(&outer(&e, &e)?, dim_k)?);
    }
    let uniform = Ket::from_real(&vec![1.0; dim_k])?
        .normalized()
        .expect("nonzero");
    events.push(embed_spatial(&outer(&uniform, &uniform)?, dim_k)?);
    Ok(events)
}

/// One entry of the optional `basis` list in a model config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub label: String,
    pub amplitudes: Vec<[f64; 2]>,
}

/// On-disk model description.
///
/// `state` holds `2·dim_K` amplitudes in composite order (spatial index
/// major, ancilla index minor, ancilla index 0 ↔ `|0⟩`). Operators named `L`
/// and `Lplus` are spatial (`dim_K × dim_K`); `T` and any name starting with
/// `F` are composite (`2dim_K × 2dim_K`). `T` defaults to `1 ⊗ |1⟩⟨1|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "dim_K")]
    pub dim_k: usize,
    pub state: Vec<[f64; 2]>,
    pub operators: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<BasisEntry>,
}

/// A model loaded from config, with the screen events it named.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: TwoSlitModel,
    pub screen_events: Vec<(String, Operator)>,
    pub tolerance: f64,
}

/// Parse and validate a JSON model config.
pub fn parse_model(text: &str) -> Result<LoadedModel> {
    let config: ModelConfig = serde_json::from_str(text)?;
    load_config(&config)
}

pub fn load_config(config: &ModelConfig) -> Result<LoadedModel> {
    let tol = config.tolerance.unwrap_or(DEFAULT_TOL);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(ModelError::Config(format!("invalid tolerance {}", tol)));
    }
    let dim_k = config.dim_k;
    if dim_k == 0 {
        return Err(ModelError::Config("dim_K must be positive".into()));
    }
    let composite = dim_k * ANCILLA_DIM;
    if config.state.len() != composite {
        return Err(ModelError::Config(format!(
            "state has {} amplitudes, expected {}",
            config.state.len(),
            composite
        )));
    }
    let psi = Ket::new(config.state.iter().copied().map(pair_to_scalar).collect())?;

    let mut l = None;
    let mut lplus = None;
    let mut t = None;
    let mut screen_events = Vec::new();
    for (name, rows) in &config.operators {
        let op = operator_from_pairs(rows)
            .map_err(|e| ModelError::Config(format!("operator {}: {}", name, e)))?;
        let expected = match name.as_str() {
            "L" | "Lplus" => dim_k,
            "T" => composite,
            n if n.starts_with('F') => composite,
            other => {
                return Err(ModelError::Config(format!(
                    "unknown operator name {:?}",
                    other
                )))
            }
        };
        if op.dim() != expected {
            return Err(ModelError::Config(format!(
                "operator {} has dimension {}, expected {}",
                name,
                op.dim(),
                expected
            )));
        }
        match name.as_str() {
            "L" => l = Some(op),
            "Lplus" => lplus = Some(op),
            "T" => t = Some(op),
            _ => screen_events.push((name.clone(), op)),
        }
    }
    let l = l.ok_or_else(|| ModelError::Config("missing operator L".into()))?;
    let t = match t {
        Some(t) => t,
        None => which_slit_detector(dim_k)?,
    };

    let basis = if config.basis.is_empty() {
        (0..dim_k)
            .map(|i| {
                Ok(LabeledKet {
                    label: format!("psi_{}", i + 1),
                    ket: Ket::basis(dim_k, i)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        config
            .basis
            .iter()
            .map(|b| {
                Ok(LabeledKet {
                    label: b.label.clone(),
                    ket: Ket::new(b.amplitudes.iter().copied().map(pair_to_scalar).collect())?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };

    for (name, f) in &screen_events {
        if let Some((residual, report)) = is_projection(f, tol).first_failure() {
            return Err(ModelError::InvariantViolation {
                operator: name.clone(),
                residual,
                value: report.value,
                tol,
            });
        }
    }

    let model = TwoSlitModel::from_parts(dim_k, l, t, psi, basis, lplus, tol)?;
    Ok(LoadedModel {
        model,
        screen_events,
        tolerance: tol,
    })
}

/// Config describing `model`; `E` and `Eplus` are implied by `L` and `Lplus`.
pub fn model_to_config(
    model: &TwoSlitModel,
    screen_events: &[(String, Operator)],
    tolerance: Option<f64>,
) -> ModelConfig {
    let mut operators = BTreeMap::new();
    operators.insert("L".to_string(), operator_to_pairs(model.l()));
    operators.insert("T".to_string(), operator_to_pairs(model.t()));
    if let Some(lp) = model.lplus() {
        operators.insert("Lplus".to_string(), operator_to_pairs(lp));
    }
    for (name, f) in screen_events {
        operators.insert(name.clone(), operator_to_pairs(f));
    }
    ModelConfig {
        dim_k: model.dim_k(),
        state: model
            .psi()
            .amplitudes()
            .iter()
            .copied()
            .map(scalar_to_pair)
            .collect(),
        operators,
        tolerance,
        basis: model
            .spatial_basis()
            .iter()
            .map(|b| BasisEntry {
                label: b.label.clone(),
                amplitudes: b
                    .ket
                    .amplitudes()
                    .iter()
                    .copied()
                    .map(scalar_to_pair)
                    .collect(),
            })
            .collect(),
    }
}

pub fn model_to_json(model: &TwoSlitModel) -> String {
    serde_json::to_string_pretty(&model_to_config(model, &[], None)).expect("config serializes")
}

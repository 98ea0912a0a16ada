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

mod common;

use common::*;
use esw_core::linalg::{commutator, inner, is_projection, outer, Ket, Operator, Scalar};
use esw_core::model::{ancilla_ket, build_four_mode_model, build_lplus, build_simple_model};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `4·L₊` as an integer matrix.
const LPLUS_QUARTERS: [[i64; 4]; 4] =
    [[3, 1, -1, 1], [1, 3, 1, -1], [-1, 1, 1, -1], [1, -1, -1, 1]];

fn kron_oracle(a: &Operator, b: &Operator) -> Vec<Vec<Scalar>> {
    let (na, nb) = (a.dim(), b.dim());
    let mut out = vec![vec![Scalar::new(0.0, 0.0); na * nb]; na * nb];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = a.get(r / nb, c / nb) * b.get(r % nb, c % nb);
        }
    }
    out
}

#[test]
fn lplus_tensor_identity_matches_index_oracle() {
    let lp = build_lplus().unwrap();
    let i2 = Operator::identity(2).unwrap();
    let got = lp.tensor(&i2);
    let want = kron_oracle(&lp, &i2);
    let mut checked = 0;
    for (r, row) in want.iter().enumerate() {
        for (c, &w) in row.iter().enumerate() {
            assert_eq!(got.get(r, c), w, "entry ({}, {})", r, c);
            checked += 1;
        }
    }
    assert_eq!(checked, 64);
}

#[test]
fn psi1_tensor_one_matches_index_oracle() {
    let psi1 = build_simple_model().spatial_basis()[0].ket.clone();
    let one = ancilla_ket(1);
    let got = psi1.tensor(&one);
    for i in 0..psi1.dim() {
        for k in 0..one.dim() {
            assert_eq!(
                got.amplitudes()[i * one.dim() + k],
                psi1.amplitudes()[i] * one.amplitudes()[k]
            );
        }
    }
    assert_eq!(got, Ket::from_real(&[0.0, 1.0, 0.0, 0.0]).unwrap());
}

#[test]
#[allow(clippy::needless_range_loop)]
fn lplus_is_rational_projection() {
    // oracle: integer arithmetic on 4·L₊; (4M)² = 4·(4M) ⇔ M² = M
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(LPLUS_QUARTERS[i][j], LPLUS_QUARTERS[j][i]);
            let sq: i64 = (0..4)
                .map(|k| LPLUS_QUARTERS[i][k] * LPLUS_QUARTERS[k][j])
                .sum();
            assert_eq!(sq, 4 * LPLUS_QUARTERS[i][j]);
        }
    }
    let lp = build_lplus().unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(
                lp.get(i, j),
                Scalar::new(LPLUS_QUARTERS[i][j] as f64 / 4.0, 0.0)
            );
        }
    }
    let check = is_projection(&lp, 1e-12);
    assert!(check.pass());
}

#[test]
fn scaled_lplus_is_not_idempotent() {
    let lp = build_lplus().unwrap().scale(Scalar::new(1.01, 0.0));
    let check = is_projection(&lp, 1e-12);
    assert!(check.hermiticity.pass);
    assert!(!check.idempotence.pass);
}

#[test]
fn commutator_of_l_and_lplus_has_norm_sqrt_half() {
    // oracle: [L, M]_ij = M_ij (l_i − l_j) with L = diag(1,1,0,0), in quarters
    let l = [1i64, 1, 0, 0];
    let mut sum_sq_16ths = 0i64;
    for i in 0..4 {
        for j in 0..4 {
            let q = LPLUS_QUARTERS[i][j] * (l[i] - l[j]);
            sum_sq_16ths += q * q;
        }
    }
    let oracle = (sum_sq_16ths as f64 / 16.0).sqrt();
    assert_eq!(sum_sq_16ths, 8);

    let m = build_four_mode_model();
    let got = commutator(m.l(), m.lplus().unwrap())
        .unwrap()
        .frobenius_norm();
    assert!((got - oracle).abs() <= 1e-15);
    assert!((got - 0.5f64.sqrt()).abs() <= 1e-15);
}

#[test]
fn lplus_first_row_in_psi_basis() {
    let m = build_four_mode_model();
    let lp = m.lplus().unwrap();
    let basis: Vec<&Ket> = m.spatial_basis().iter().map(|b| &b.ket).collect();
    let coeffs: Vec<f64> = basis
        .iter()
        .map(|psi_j| inner(basis[0], &lp.apply(psi_j).unwrap()).unwrap().re)
        .collect();
    assert_eq!(coeffs, vec![0.75, 0.25, -0.25, 0.25]);
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kronecker_matches_index_formula(seed in any::<u64>(), na in 1usize..=4, nb in 1usize..=4) {
        let mut rng = seeded(seed);
        let a = random_operator(&mut rng, na);
        let b = random_operator(&mut rng, nb);
        let got = a.tensor(&b);
        prop_assert_eq!(got.dim(), na * nb);
        let want = kron_oracle(&a, &b);
        for (r, row) in want.iter().enumerate() {
            for (c, &w) in row.iter().enumerate() {
                prop_assert_eq!(got.get(r, c), w);
            }
        }
    }

    #[test]
    fn kronecker_mixed_product(seed in any::<u64>(), na in 1usize..=4, nb in 1usize..=4) {
        let mut rng = seeded(seed);
        let a = random_operator(&mut rng, na);
        let b = random_operator(&mut rng, nb);
        let u = random_ket(&mut rng, na);
        let v = random_ket(&mut rng, nb);
        let lhs = a.tensor(&b).apply(&u.tensor(&v)).unwrap();
        let rhs = a.apply(&u).unwrap().tensor(&b.apply(&v).unwrap());
        prop_assert!(lhs.try_sub(&rhs).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn ket_tensor_norm_is_multiplicative(seed in any::<u64>(), na in 1usize..=5, nb in 1usize..=5) {
        let mut rng = seeded(seed);
        let u = random_ket(&mut rng, na);
        let v = random_ket(&mut rng, nb);
        prop_assert!((u.tensor(&v).norm() - u.norm() * v.norm()).abs() <= 1e-12);
    }

    #[test]
    fn hermitian_commutator_is_antihermitian(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = seeded(seed);
        let a = random_hermitian(&mut rng, n);
        let b = random_hermitian(&mut rng, n);
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        prop_assert!((&ab + &ba).frobenius_norm() <= 1e-12);
        prop_assert!((&ab - &ba.adjoint()).frobenius_norm() <= 1e-12);
        prop_assert!((&ab + &ab.adjoint()).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn tensor_with_identity_scales_norm(seed in any::<u64>(), na in 1usize..=4, n in 1usize..=4) {
        let mut rng = seeded(seed);
        let a = random_operator(&mut rng, na);
        let lifted = a.tensor(&Operator::identity(n).unwrap());
        let expected = (n as f64).sqrt() * a.frobenius_norm();
        prop_assert!((lifted.frobenius_norm() - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn dyad_action(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = seeded(seed);
        let u = random_ket(&mut rng, n);
        let v = random_ket(&mut rng, n);
        let w = random_ket(&mut rng, n);
        let lhs = outer(&u, &v).unwrap().apply(&w).unwrap();
        let rhs = u.scale(inner(&v, &w).unwrap());
        prop_assert!(lhs.try_sub(&rhs).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn projection_family_closure(seed in any::<u64>(), n in 1usize..=5, rank_frac in 0.0f64..=1.0) {
        let mut rng = seeded(seed);
        let rank = ((n as f64) * rank_frac).round() as usize;
        let p = random_projection(&mut rng, n, rank);
        let tol = 1e-12;
        prop_assume!(is_projection(&p, tol).pass());
        prop_assert!(is_projection(&p.complement(), tol).pass());
        prop_assert!(is_projection(&Operator::zeros(n).unwrap(), tol).pass());
        prop_assert!(is_projection(&Operator::identity(n).unwrap(), tol).pass());
    }
}

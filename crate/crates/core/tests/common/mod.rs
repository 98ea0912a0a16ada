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

//! Random fixtures shared by the integration tests.

#![allow(dead_code)]

use esw_core::linalg::{inner, outer, Ket, Operator, Scalar};
use rand::Rng;

pub fn random_scalar<R: Rng>(rng: &mut R) -> Scalar {
    Scalar::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_ket<R: Rng>(rng: &mut R, dim: usize) -> Ket {
    Ket::new((0..dim).map(|_| random_scalar(rng)).collect()).unwrap()
}

pub fn random_operator<R: Rng>(rng: &mut R, dim: usize) -> Operator {
    Operator::from_entries(dim, (0..dim * dim).map(|_| random_scalar(rng)).collect()).unwrap()
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> Operator {
    let a = random_operator(rng, dim);
    (&a + &a.adjoint()).scale(Scalar::new(0.5, 0.0))
}

/// `count` orthonormal vectors in `C^dim` by Gram-Schmidt on random input.
pub fn random_orthonormal<R: Rng>(rng: &mut R, dim: usize, count: usize) -> Vec<Ket> {
    assert!(count <= dim);
    let mut out: Vec<Ket> = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = random_ket(rng, dim);
        for q in &out {
            let c = inner(q, &v).unwrap();
            v = v.try_sub(&q.scale(c)).unwrap();
        }
        if v.norm() > 1e-3 {
            out.push(v.normalized().unwrap());
        }
    }
    out
}

pub fn random_frame<R: Rng>(rng: &mut R, dim: usize) -> [Ket; 4] {
    random_orthonormal(rng, dim, 4).try_into().unwrap()
}

/// Orthogonal projection of the given rank.
pub fn random_projection<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> Operator {
    let mut p = Operator::zeros(dim).unwrap();
    for v in random_orthonormal(rng, dim, rank) {
        p = &p + &outer(&v, &v).unwrap();
    }
    p
}

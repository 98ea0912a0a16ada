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

//! Which-path detector algebra on `K ⊗ C²` and a double-slit screen
//! simulator.
//!
//! * [`linalg`]: dense complex kets and operators, tensor products,
//!   commutators, projection checks.
//! * [`model`]: the built-in two-slit models and the JSON model format.
//! * [`verify`]: non-disturbing detector checks, incompatibility, correlation
//!   chains and detector synthesis.
//! * [`sim`]: slit modes on a grid, far-field propagation, exact screen
//!   distributions and seeded Monte Carlo runs.

pub mod linalg;
pub mod model;
pub mod sim;
pub mod verify;

pub use linalg::{Ket, Operator, ResidualReport, Scalar, DEFAULT_TOL};
pub use model::{build_four_mode_model, build_simple_model, TwoSlitModel};

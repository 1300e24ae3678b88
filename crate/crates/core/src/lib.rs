// Copyright 2026 The qsimon Developers
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

//! Simulation and analysis toolkit for the qudit generalization of Simon's
//! hidden-shift problem over `Z_d^n`.
//!
//! The crate is organized bottom-up:
//!
//! * [`zmod`] exact arithmetic over `Z_d` and `Z_d^n` (inner products, element
//!   orders, subgroup sizes, annihilators, canonical shift representatives);
//! * [`statevector`] a dense simulator for two `n`-site qudit registers;
//! * [`oracle`] d-to-one promise oracles, native (cyclic shift) or lifted from
//!   a binary Simon oracle by packing `ℓ` binary layers into one `2^ℓ`-ary digit;
//! * [`pipeline`] end-to-end runs, constraint collection, shift recovery,
//!   Monte Carlo experiments and a classical collision baseline;
//! * [`analytics`] closed-form repetition budgets and figure/table data.

pub mod analytics;
pub mod error;
pub mod oracle;
pub mod pipeline;
pub mod statevector;
pub mod zmod;

pub use error::{Error, Result};
pub use oracle::{BinaryOracle, PromiseOracle, Structure};
pub use statevector::{AmplitudeBudget, PureState, Register};
pub use zmod::{ConstraintSet, Modulus, ZVec};

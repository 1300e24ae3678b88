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

use thiserror::Error;

use crate::zmod::ConstraintSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),

    #[error("entry {value} at position {position} is outside [0, {modulus})")]
    EntryOutOfRange { position: usize, value: u64, modulus: u64 },

    #[error("vectors must have length at least 1")]
    EmptyVector,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("the zero vector has no order; a nonzero shift is required")]
    DegenerateShift,

    #[error("no nonzero shift is recoverable from the trivial subgroup")]
    DegenerateResult,

    #[error("shift has order {order} but the promise requires full order {modulus}")]
    UnsupportedShift { order: u64, modulus: u64 },

    #[error("state needs {required} amplitudes, budget is {budget} (set QSIMON_MAX_AMPLITUDES to override)")]
    Capacity { required: u128, budget: u64 },

    #[error("site index {index} out of range for {sites} sites")]
    SiteOutOfRange { index: usize, sites: usize },

    #[error("state norm is {norm}, expected 1")]
    Normalization { norm: f64 },

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("oracle is inconsistent with its structure: {0}")]
    MalformedOracle(String),

    #[error("constraints incomplete after {runs_used} runs: generated subgroup has size {}, need {target}", partial.submodule_size())]
    IncompleteConstraints {
        partial: Box<ConstraintSet>,
        runs_used: usize,
        target: u128,
    },

    #[error("inconsistent constraints: {0}")]
    InconsistentConstraints(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

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

//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qsimon_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Cyclic oracle over `Z_d` with `QFT_d`.
    Native,
    /// Binary oracle lifted to `d = 2^l`.
    Lifted,
}

/// Experiment config as read from JSON or flags; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub d: Option<u64>,
    #[serde(default)]
    pub l: Option<u32>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub shift: Option<String>,
    #[serde(default)]
    pub oracle: Option<PathBuf>,
    #[serde(default, alias = "M")]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub max_runs: Option<usize>,
    #[serde(default)]
    pub solves: Option<usize>,
    #[serde(default)]
    pub solve: Option<bool>,
    #[serde(default)]
    pub canonical: Option<bool>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `other` replace ours.
    pub fn overlay(&mut self, other: ExperimentConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if other.$f.is_some() {
                    self.$f = other.$f;
                }
            )*};
        }
        take!(mode, d, l, n, shift, oracle, trials, seed, max_runs, solves, solve, canonical);
    }
}

/// Fully resolved config, written to `config.json` and embedded in the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub mode: Mode,
    pub d: u64,
    pub l: Option<u32>,
    pub n: usize,
    /// Hidden shift from the oracle metadata (binary in lifted mode).
    pub shift: String,
    pub oracle: Option<PathBuf>,
    pub trials: usize,
    pub seed: u64,
    pub max_runs: usize,
    pub solves: usize,
    pub solve: bool,
    pub canonical: bool,
}

/// `100 |S^⊥|` shots, clamped to `[100, 10^6]`.
pub fn default_trials(d: u64, n: usize) -> usize {
    let perp = (d as u128).checked_pow(n.saturating_sub(1) as u32).unwrap_or(u128::MAX);
    perp.saturating_mul(100).clamp(100, 1_000_000) as usize
}

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

//! Dense statevector of two `n`-site qudit registers.
//!
//! The flattened amplitude index is the base-`d` number whose most significant
//! digit is site 0 of register 1; sites `0..n` form register 1 and `n..2n`
//! register 2. Gates act on one site at a time as a `d × d` kernel over strided
//! slices, so applying a site gate costs `O(d^{2n} · d)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::PromiseOracle;
use crate::zmod::{Modulus, ZVec};

pub const DEFAULT_MAX_AMPLITUDES: u64 = 1 << 26;
pub const MAX_AMPLITUDES_ENV: &str = "QSIMON_MAX_AMPLITUDES";

/// Tolerance on `Σ|α|²` before a measurement refuses the state.
pub const MEASUREMENT_NORM_TOLERANCE: f64 = 1e-6;
/// Outcomes below this probability are dropped from exact distributions.
pub const PRUNE_PROBABILITY: f64 = 1e-12;

// Below this many amplitudes the rayon split costs more than it saves.
const PARALLEL_THRESHOLD: usize = 1 << 15;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Upper bound on the number of amplitudes (or oracle table entries) this
/// process is willing to allocate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmplitudeBudget(u64);

impl Default for AmplitudeBudget {
    fn default() -> Self {
        AmplitudeBudget(DEFAULT_MAX_AMPLITUDES)
    }
}

impl AmplitudeBudget {
    pub fn new(max_amplitudes: u64) -> Self {
        AmplitudeBudget(max_amplitudes)
    }

    /// Reads `QSIMON_MAX_AMPLITUDES`, falling back to the default of `2^26`.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MAX_AMPLITUDES_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(AmplitudeBudget)
                .map_err(|e| Error::Parse(format!("{MAX_AMPLITUDES_ENV}={v:?}: {e}"))),
            Err(_) => Ok(AmplitudeBudget::default()),
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// `d^power` as a usize if it fits the budget.
    pub fn admit(self, modulus: Modulus, power: usize) -> Result<usize> {
        let required = modulus.pow(power).unwrap_or(u128::MAX);
        if required > self.0 as u128 {
            return Err(Error::Capacity {
                required,
                budget: self.0,
            });
        }
        Ok(required as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Register {
    /// The query register `|x⟩`.
    First,
    /// The ancilla register `|f(x)⟩`.
    Second,
}

impl Register {
    /// Registers are numbered 1 and 2.
    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Register::First),
            2 => Ok(Register::Second),
            _ => Err(Error::Domain(format!("register index must be 1 or 2, got {k}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Register::First => 1,
            Register::Second => 2,
        }
    }
}

/// Single-site Fourier-type transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SiteTransform {
    /// `QFT_d`, entries `ω^{jk}/√d`.
    Fourier,
    /// `H^{⊗ℓ}` on the binary digits of a `d = 2^ℓ` site: entries
    /// `(-1)^{popcount(j & k)}/√d`. This is the Fourier transform of
    /// `(Z_2)^ℓ`, the group a lifted oracle's fibers live in.
    LayerHadamard,
}

/// Row-major `QFT_d` (or its adjoint). Phases use `jk mod d` so large `d` does
/// not lose precision.
pub fn qft_matrix(modulus: Modulus, inverse: bool) -> Vec<Complex64> {
    let d = modulus.get() as usize;
    let scale = 1.0 / (d as f64).sqrt();
    let sign = if inverse { -1.0 } else { 1.0 };
    let mut m = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            let phase = sign * 2.0 * PI * ((j * k) % d) as f64 / d as f64;
            m.push(Complex64::from_polar(scale, phase));
        }
    }
    m
}

/// Row-major layerwise Walsh-Hadamard matrix; requires `d = 2^ℓ`. Self-inverse.
pub fn layer_hadamard_matrix(modulus: Modulus) -> Result<Vec<Complex64>> {
    if modulus.power_of_two_exponent().is_none() {
        return Err(Error::Encoding(format!(
            "layer Hadamard needs a power-of-two dimension, got {modulus}"
        )));
    }
    let d = modulus.get() as usize;
    let scale = 1.0 / (d as f64).sqrt();
    Ok((0..d * d)
        .map(|i| {
            let (j, k) = (i / d, i % d);
            let sign = if (j & k).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(sign * scale, 0.0)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub register: Register,
    pub outcome: ZVec,
    /// Born probability of `outcome`, in `(0, 1]`.
    pub probability: f64,
}

/// Debug dump `{d, n, amplitudes: [[re, im], …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDump {
    pub d: u64,
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    modulus: Modulus,
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// `|0…0⟩|0…0⟩` under the default (or environment) budget.
    pub fn zero_state(modulus: Modulus, n: usize) -> Result<Self> {
        Self::zero_state_with_budget(modulus, n, AmplitudeBudget::from_env()?)
    }

    pub fn zero_state_with_budget(modulus: Modulus, n: usize, budget: AmplitudeBudget) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("registers need at least one site".into()));
        }
        let len = budget.admit(modulus, 2 * n)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(PureState { modulus, n, amplitudes })
    }

    /// Returns to `|0…0⟩|0…0⟩` without reallocating.
    pub fn reset(&mut self) {
        self.amplitudes.fill(ZERO);
        self.amplitudes[0] = Complex64::new(1.0, 0.0);
    }

    /// Wraps raw amplitudes; the length must be `d^{2n}` and the norm 1 within 1e-9.
    pub fn from_amplitudes(modulus: Modulus, n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let expected = modulus.pow(2 * n).unwrap_or(u128::MAX);
        if n == 0 || amplitudes.len() as u128 != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for d={modulus}, n={n}",
                amplitudes.len()
            )));
        }
        let state = PureState { modulus, n, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Normalization { norm });
        }
        Ok(state)
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// Sites per register.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn register_size(&self) -> usize {
        self.amplitudes.len() / self.register_stride()
    }

    // d^n: the index distance between consecutive register-1 values
    fn register_stride(&self) -> usize {
        (self.modulus.get() as usize).pow(self.n as u32)
    }

    /// Amplitude of `|x⟩|a⟩`.
    pub fn amplitude(&self, x: &ZVec, a: &ZVec) -> Result<Complex64> {
        for v in [x, a] {
            if v.modulus() != self.modulus || v.len() != self.n {
                return Err(Error::DimensionMismatch(format!(
                    "basis label in Z_{}^{} for a Z_{}^{} register",
                    v.modulus(),
                    v.len(),
                    self.modulus,
                    self.n
                )));
            }
        }
        Ok(self.amplitudes[x.index() * self.register_stride() + a.index()])
    }

    fn site_stride(&self, site: usize) -> Result<usize> {
        let sites = 2 * self.n;
        if site >= sites {
            return Err(Error::SiteOutOfRange { index: site, sites });
        }
        Ok((self.modulus.get() as usize).pow((sites - 1 - site) as u32))
    }

    /// Applies a row-major `d × d` matrix to one site.
    pub fn apply_site_matrix(&mut self, site: usize, matrix: &[Complex64]) -> Result<()> {
        let d = self.modulus.get() as usize;
        assert_eq!(matrix.len(), d * d, "site matrix must be d x d");
        let stride = self.site_stride(site)?;
        let block = stride * d;
        let kernel = |buf: &mut Vec<Complex64>, chunk: &mut [Complex64]| {
            for off in 0..stride {
                let mut any = false;
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = chunk[off + j * stride];
                    any |= *b != ZERO;
                }
                // exact zeros stay zero; sparse states skip most of the work
                if !any {
                    continue;
                }
                for (k, row) in matrix.chunks_exact(d).enumerate() {
                    chunk[off + k * stride] = row.iter().zip(buf.iter()).map(|(m, b)| m * b).sum();
                }
            }
        };
        let scratch = || vec![Complex64::new(0.0, 0.0); d];
        if self.amplitudes.len() >= PARALLEL_THRESHOLD && rayon::current_num_threads() > 1 {
            // group small blocks so each task amortizes its scratch buffer
            let per_task = block * (PARALLEL_THRESHOLD / block).max(1);
            self.amplitudes
                .par_chunks_mut(per_task)
                .for_each_init(scratch, |buf, task| {
                    task.chunks_mut(block).for_each(|chunk| kernel(buf, chunk))
                });
        } else {
            let mut buf = scratch();
            self.amplitudes
                .chunks_mut(block)
                .for_each(|chunk| kernel(&mut buf, chunk));
        }
        Ok(())
    }

    /// `X_d |i⟩ = |i ⊞ 1⟩` on one site.
    pub fn apply_x_site(&mut self, site: usize) -> Result<()> {
        let d = self.modulus.get() as usize;
        let stride = self.site_stride(site)?;
        let mut buf = vec![Complex64::new(0.0, 0.0); d];
        for chunk in self.amplitudes.chunks_mut(stride * d) {
            for off in 0..stride {
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = chunk[off + j * stride];
                }
                for (j, b) in buf.iter().enumerate() {
                    chunk[off + ((j + 1) % d) * stride] = *b;
                }
            }
        }
        Ok(())
    }

    pub fn apply_qft_site(&mut self, site: usize, inverse: bool) -> Result<()> {
        self.apply_site_transform(site, SiteTransform::Fourier, inverse)
    }

    pub fn apply_site_transform(&mut self, site: usize, transform: SiteTransform, inverse: bool) -> Result<()> {
        let matrix = match transform {
            SiteTransform::Fourier => qft_matrix(self.modulus, inverse),
            SiteTransform::LayerHadamard => layer_hadamard_matrix(self.modulus)?,
        };
        self.apply_site_matrix(site, &matrix)
    }

    fn register_sites(&self, register: Register) -> std::ops::Range<usize> {
        match register {
            Register::First => 0..self.n,
            Register::Second => self.n..2 * self.n,
        }
    }

    /// `QFT_d^{⊗n}` (or its inverse) on every site of one register.
    pub fn apply_qft_register(&mut self, register: Register, inverse: bool) -> Result<()> {
        self.apply_transform_register(register, SiteTransform::Fourier, inverse)
    }

    pub fn apply_transform_register(
        &mut self,
        register: Register,
        transform: SiteTransform,
        inverse: bool,
    ) -> Result<()> {
        let matrix = match transform {
            SiteTransform::Fourier => qft_matrix(self.modulus, inverse),
            SiteTransform::LayerHadamard => layer_hadamard_matrix(self.modulus)?,
        };
        for site in self.register_sites(register) {
            self.apply_site_matrix(site, &matrix)?;
        }
        Ok(())
    }

    /// `|x⟩|a⟩ → |x⟩|a ⊞ f(x)⟩`, addition componentwise mod `d`.
    pub fn apply_oracle(&mut self, oracle: &PromiseOracle) -> Result<()> {
        if oracle.modulus() != self.modulus || oracle.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "oracle on Z_{}^{} applied to a Z_{}^{} state",
                oracle.modulus(),
                oracle.n(),
                self.modulus,
                self.n
            )));
        }
        let size = self.register_stride();
        let d = self.modulus.get() as usize;
        let digits = register_digits(d, self.n, size);
        let table = oracle.table();
        let n = self.n;
        // each register-2 block is translated by f(x), so it can be permuted in place
        let translate = |tmp: &mut Vec<Complex64>, (x, block): (usize, &mut [Complex64])| {
            if block.iter().all(|amp| *amp == ZERO) {
                return;
            }
            tmp.copy_from_slice(block);
            block.fill(ZERO);
            let shift = &digits[table[x] * n..(table[x] + 1) * n];
            for (a, amp) in tmp.iter().enumerate() {
                if *amp == ZERO {
                    continue;
                }
                let target = digits[a * n..(a + 1) * n]
                    .iter()
                    .zip(shift)
                    .fold(0, |acc, (&ai, &si)| acc * d + (ai + si) % d);
                block[target] = *amp;
            }
        };
        let scratch = || vec![ZERO; size];
        if self.amplitudes.len() >= PARALLEL_THRESHOLD && rayon::current_num_threads() > 1 {
            self.amplitudes
                .par_chunks_mut(size)
                .enumerate()
                .for_each_init(scratch, translate);
        } else {
            let mut tmp = scratch();
            self.amplitudes
                .chunks_mut(size)
                .enumerate()
                .for_each(|item| translate(&mut tmp, item));
        }
        Ok(())
    }

    fn outcome_probabilities(&self, register: Register) -> Vec<f64> {
        let size = self.register_size();
        let stride = self.register_stride();
        let mut probs = vec![0.0; size];
        for (x, block) in self.amplitudes.chunks(stride).enumerate() {
            match register {
                Register::First => probs[x] = block.iter().map(|a| a.norm_sqr()).sum(),
                Register::Second => {
                    for (p, a) in probs.iter_mut().zip(block) {
                        *p += a.norm_sqr();
                    }
                }
            }
        }
        probs
    }

    /// Zeroes every amplitude whose `register` value differs from `outcome` and
    /// scales the rest.
    fn collapse(&mut self, register: Register, outcome: usize, scale: f64) {
        let stride = self.register_stride();
        for (x, block) in self.amplitudes.chunks_mut(stride).enumerate() {
            match register {
                Register::First if x == outcome => block.iter_mut().for_each(|a| *a *= scale),
                Register::First => block.fill(ZERO),
                Register::Second => {
                    let kept = block[outcome] * scale;
                    block.fill(ZERO);
                    block[outcome] = kept;
                }
            }
        }
    }

    /// Projective measurement of one register in the computational basis.
    ///
    /// Samples an outcome with its Born probability and collapses the state onto
    /// it (renormalized).
    pub fn measure_register<R: Rng + ?Sized>(&mut self, register: Register, rng: &mut R) -> Result<MeasurementRecord> {
        let probs = self.outcome_probabilities(register);
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MEASUREMENT_NORM_TOLERANCE {
            return Err(Error::Normalization { norm: total });
        }
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (k, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            chosen = Some(k);
            acc += p;
            if u < acc {
                break;
            }
        }
        let outcome = chosen.expect("a normalized state has a nonzero outcome");
        let p = probs[outcome];

        self.collapse(register, outcome, 1.0 / p.sqrt());
        Ok(MeasurementRecord {
            register,
            outcome: ZVec::from_index(self.modulus, self.n, outcome),
            probability: p / total,
        })
    }

    /// Projects one register onto a fixed outcome and renormalizes; returns
    /// the Born probability of that outcome.
    pub fn postselect(&mut self, register: Register, outcome: &ZVec) -> Result<f64> {
        if outcome.modulus() != self.modulus || outcome.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "outcome {outcome} for a Z_{}^{} register",
                self.modulus, self.n
            )));
        }
        let target = outcome.index();
        let p = self.outcome_probabilities(register)[target];
        if p < PRUNE_PROBABILITY {
            return Err(Error::Domain(format!("outcome {outcome} has probability {p:e}")));
        }
        self.collapse(register, target, 1.0 / p.sqrt());
        Ok(p)
    }

    /// Marginal Born distribution of one register, pruned below 1e-12.
    pub fn exact_distribution(&self, register: Register) -> BTreeMap<ZVec, f64> {
        self.outcome_probabilities(register)
            .into_iter()
            .enumerate()
            .filter(|&(_, p)| p >= PRUNE_PROBABILITY)
            .map(|(k, p)| (ZVec::from_index(self.modulus, self.n, k), p))
            .collect()
    }

    pub fn dump(&self) -> StateDump {
        StateDump {
            d: self.modulus.get(),
            n: self.n,
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

// Base-d digits of every register index, flattened `n` per index.
fn register_digits(d: usize, n: usize, size: usize) -> Vec<usize> {
    let mut digits = vec![0; size * n];
    for (i, chunk) in digits.chunks_mut(n).enumerate() {
        let mut r = i;
        for slot in chunk.iter_mut().rev() {
            *slot = r % d;
            r /= d;
        }
    }
    digits
}

/// CSV rows `outcome_base_d,probability` with a header line.
pub fn distribution_csv(distribution: &BTreeMap<ZVec, f64>) -> String {
    let mut out = String::from("outcome_base_d,probability\n");
    for (y, p) in distribution {
        let _ = writeln!(out, "{},{:.17e}", y.digits(), p);
    }
    out
}

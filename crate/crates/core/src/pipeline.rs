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

//! End-to-end Simon runs on the statevector simulator.
//!
//! One run follows the order zero state → transform on register 1 → oracle →
//! measure register 2 → transform on register 1 → measure register 1. Measuring
//! the ancilla early does not change the register-1 marginal; it only makes
//! the intermediate state a single fiber.
//!
//! Native (cyclic) oracles use `QFT_d`; lifted oracles use the layerwise
//! Hadamard, whose samples satisfy `⟨Y^(t), s⟩ ≡ 0 (mod 2)` for every binary
//! layer `Y^(t)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analytics::{k_required, Horizon};
use crate::error::{Error, Result};
use crate::oracle::{unpack, PromiseOracle, Structure};
use crate::statevector::{AmplitudeBudget, PureState, Register};
use crate::zmod::{brute, canonical_generator, order_of, CanonicalShift, ConstraintSet, Modulus, ZVec};

/// Streams `SOLVE_STREAM_BASE + i` seed the solve attempts of an experiment;
/// streams `0..M` seed its sampling trials.
pub const SOLVE_STREAM_BASE: u64 = 1 << 32;

/// Failure target used for the default run budget.
pub const DEFAULT_BUDGET_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    /// Register-1 outcome `y`.
    pub sample: ZVec,
    /// Register-2 outcome, a value of `f`.
    pub ancilla: ZVec,
    /// `y` satisfies the constraint implied by the oracle's metadata.
    pub in_orthogonal: bool,
}

/// The state just before the final measurement, with the ancilla left
/// unmeasured: `Σ_y |y⟩ Σ_x ω^{x·y} |f(x)⟩ / d^n`.
pub fn final_state(f: &PromiseOracle, budget: AmplitudeBudget) -> Result<PureState> {
    let t = f.site_transform();
    let mut state = PureState::zero_state_with_budget(f.modulus(), f.n(), budget)?;
    state.apply_transform_register(Register::First, t, false)?;
    state.apply_oracle(f)?;
    state.apply_transform_register(Register::First, t, false)?;
    Ok(state)
}

/// Exact register-1 distribution of [`final_state`].
pub fn exact_sample_distribution(f: &PromiseOracle, budget: AmplitudeBudget) -> Result<BTreeMap<ZVec, f64>> {
    Ok(final_state(f, budget)?.exact_distribution(Register::First))
}

pub fn run_once<R: Rng + ?Sized>(f: &PromiseOracle, rng: &mut R, budget: AmplitudeBudget) -> Result<RunResult> {
    let mut state = PureState::zero_state_with_budget(f.modulus(), f.n(), budget)?;
    run_in(&mut state, f, rng)
}

/// [`run_once`] on a caller-owned state, which is reset first.
fn run_in<R: Rng + ?Sized>(state: &mut PureState, f: &PromiseOracle, rng: &mut R) -> Result<RunResult> {
    let t = f.site_transform();
    state.reset();
    state.apply_transform_register(Register::First, t, false)?;
    state.apply_oracle(f)?;
    let ancilla = state.measure_register(Register::Second, rng)?.outcome;
    state.apply_transform_register(Register::First, t, false)?;
    let sample = state.measure_register(Register::First, rng)?.outcome;
    let in_orthogonal = f.is_orthogonal(&sample);
    Ok(RunResult {
        sample,
        ancilla,
        in_orthogonal,
    })
}

/// Constraint ring and completion target for an oracle: `Z_d` with target
/// `d^{n-1}` for cyclic oracles, pooled binary layers over `Z_2` with target
/// `2^{n-1}` for layered ones.
pub fn constraint_space(f: &PromiseOracle) -> (Modulus, u128) {
    let n = f.n();
    match f.structure() {
        Structure::Cyclic { .. } => (f.modulus(), f.modulus().pow(n - 1).expect("table fits")),
        Structure::Layered { .. } => {
            let two = Modulus::new(2).expect("2 is a modulus");
            (two, two.pow(n - 1).expect("table fits"))
        }
    }
}

/// Samples gathered for one solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collected {
    /// Raw register-1 outcomes.
    pub samples: Vec<ZVec>,
    /// Constraints over the oracle's constraint ring (see [`constraint_space`]).
    pub constraints: ConstraintSet,
    pub runs_used: usize,
}

struct Collector {
    layers: Option<u32>,
    collected: Collected,
}

impl Collector {
    fn new(f: &PromiseOracle) -> Self {
        let (ring, _) = constraint_space(f);
        let layers = match f.structure() {
            Structure::Cyclic { .. } => None,
            Structure::Layered { layers, .. } => Some(*layers),
        };
        Collector {
            layers,
            collected: Collected {
                samples: Vec::new(),
                constraints: ConstraintSet::new(ring, f.n()),
                runs_used: 0,
            },
        }
    }

    fn push(&mut self, y: ZVec) -> Result<()> {
        match self.layers {
            None => {
                self.collected.constraints.push(y.clone())?;
            }
            Some(l) => {
                for layer in unpack(&y, l)? {
                    self.collected.constraints.push(layer)?;
                }
            }
        }
        self.collected.samples.push(y);
        self.collected.runs_used += 1;
        Ok(())
    }
}

/// Runs until the constraint subgroup reaches its target size or `max_runs`
/// is spent.
pub fn collect_until_constraints<R: Rng + ?Sized>(
    f: &PromiseOracle,
    rng: &mut R,
    max_runs: usize,
    budget: AmplitudeBudget,
) -> Result<Collected> {
    if max_runs == 0 {
        return Err(Error::Domain("max_runs must be at least 1".into()));
    }
    let (_, target) = constraint_space(f);
    let mut collector = Collector::new(f);
    let mut state = None;
    while collector.collected.constraints.submodule_size() < target {
        if collector.collected.runs_used == max_runs {
            let Collected {
                constraints, runs_used, ..
            } = collector.collected;
            return Err(Error::IncompleteConstraints {
                partial: Box::new(constraints),
                runs_used,
                target,
            });
        }
        let state = lazy_state(&mut state, f, budget)?;
        collector.push(run_in(state, f, rng)?.sample)?;
    }
    Ok(collector.collected)
}

fn lazy_state<'a>(
    slot: &'a mut Option<PureState>,
    f: &PromiseOracle,
    budget: AmplitudeBudget,
) -> Result<&'a mut PureState> {
    if slot.is_none() {
        *slot = Some(PureState::zero_state_with_budget(f.modulus(), f.n(), budget)?);
    }
    Ok(slot.as_mut().expect("just filled"))
}

/// Exactly `count` runs, pooled, without stopping early.
pub fn collect_samples<R: Rng + ?Sized>(
    f: &PromiseOracle,
    rng: &mut R,
    count: usize,
    budget: AmplitudeBudget,
) -> Result<Collected> {
    let mut collector = Collector::new(f);
    let mut state = None;
    for _ in 0..count {
        let state = lazy_state(&mut state, f, budget)?;
        collector.push(run_in(state, f, rng)?.sample)?;
    }
    Ok(collector.collected)
}

/// Shift recovery from d-ary constraints: the annihilator of the samples,
/// reduced to its canonical generator.
pub fn recover_shift_native(cs: &ConstraintSet) -> Result<ZVec> {
    let modulus = cs.modulus();
    let n = cs.n();
    let target = modulus.pow(n - 1).expect("fits");
    if cs.submodule_size() < target {
        return Err(Error::IncompleteConstraints {
            partial: Box::new(cs.clone()),
            runs_used: cs.samples().len(),
            target,
        });
    }
    let ann = cs.annihilator();
    match canonical_generator(modulus, n, &ann) {
        Ok(CanonicalShift::Cyclic(s)) if order_of(&s)? == modulus.get() => Ok(s),
        Ok(CanonicalShift::Cyclic(s)) => Err(Error::InconsistentConstraints(format!(
            "solution group is generated by {s} of order {} < {modulus}",
            order_of(&s)?
        ))),
        Ok(CanonicalShift::NotCyclic { invariant_factors }) => Err(Error::InconsistentConstraints(format!(
            "solution group is not cyclic (invariant factors {invariant_factors:?})"
        ))),
        Err(Error::DegenerateResult) => Err(Error::InconsistentConstraints(
            "only the zero shift satisfies every constraint".into(),
        )),
        Err(e) => Err(e),
    }
}

/// Shift recovery for a lifted oracle: every binary layer of every sample is a
/// mod-2 constraint on the binary hidden string.
pub fn recover_shift_lifted(samples: &[ZVec], layers: u32) -> Result<ZVec> {
    let Some(first) = samples.first() else {
        return Err(Error::Domain("no samples to recover from".into()));
    };
    let n = first.len();
    let two = Modulus::new(2)?;
    let mut cs = ConstraintSet::new(two, n);
    for y in samples {
        for layer in unpack(y, layers)? {
            cs.push(layer)?;
        }
    }
    recover_shift_native(&cs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solved {
    pub shift: ZVec,
    pub runs_used: usize,
}

/// Collect and recover. The returned shift is canonical: for cyclic oracles
/// it generates the same group as the true shift; for layered ones it is the
/// binary hidden string.
pub fn solve<R: Rng + ?Sized>(
    f: &PromiseOracle,
    rng: &mut R,
    max_runs: usize,
    budget: AmplitudeBudget,
) -> Result<Solved> {
    let collected = collect_until_constraints(f, rng, max_runs, budget)?;
    // for layered oracles the constraints are already the pooled binary layers
    let shift = recover_shift_native(&collected.constraints)?;
    Ok(Solved {
        shift,
        runs_used: collected.runs_used,
    })
}

/// `10 · (n + k_required(d, n, 1e-3))`, with the asymptotic budget for `n < 2`.
pub fn default_max_runs(modulus: Modulus, n: usize) -> usize {
    let horizon = if n >= 2 {
        Horizon::Finite(n)
    } else {
        Horizon::Asymptotic
    };
    let k = k_required(modulus.get(), horizon, DEFAULT_BUDGET_EPSILON).expect("valid budget query");
    10 * (n + k as usize)
}

/// Chi-square goodness of fit of a histogram against the uniform
/// distribution on an expected support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    /// Critical value at significance `alpha`.
    pub fn critical_value(&self, alpha: f64) -> f64 {
        ChiSquared::new(self.degrees_of_freedom as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(1.0 - alpha)
    }

    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Counts outside `support` make the statistic infinite.
pub fn chi_square_uniform(histogram: &BTreeMap<ZVec, u64>, support: &[ZVec]) -> Result<ChiSquareTest> {
    if support.len() < 2 {
        return Err(Error::Domain(
            "uniformity test needs at least two support points".into(),
        ));
    }
    let total: u64 = histogram.values().sum();
    let expected = total as f64 / support.len() as f64;
    let in_support: u64 = support.iter().map(|y| histogram.get(y).copied().unwrap_or(0)).sum();
    let statistic = if in_support < total {
        f64::INFINITY
    } else {
        support
            .iter()
            .map(|y| {
                let o = histogram.get(y).copied().unwrap_or(0) as f64;
                (o - expected).powi(2) / expected
            })
            .sum()
    };
    let degrees_of_freedom = support.len() - 1;
    let p_value = if statistic.is_finite() {
        ChiSquared::new(degrees_of_freedom as f64)
            .map_err(|e| Error::Domain(e.to_string()))?
            .sf(statistic)
    } else {
        0.0
    };
    Ok(ChiSquareTest {
        statistic,
        degrees_of_freedom,
        p_value,
    })
}

/// Every `y` satisfying the oracle's constraint (`|S^⊥| = d^{n-1}` for both
/// oracle kinds).
pub fn expected_support(f: &PromiseOracle) -> Result<Vec<ZVec>> {
    Ok(brute::all_vectors(f.modulus(), f.n())?
        .filter(|y| f.is_orthogonal(y))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub trials: usize,
    pub seed: u64,
    /// Number of independent solve attempts to run alongside the trials.
    pub solves: usize,
    pub max_runs: Option<usize>,
}

/// Outcome of one solve attempt inside an experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub runs_used: usize,
    pub recovered: Option<ZVec>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub trials: usize,
    pub histogram: BTreeMap<ZVec, u64>,
    /// Fraction of samples satisfying the oracle's constraint.
    pub support_fraction: f64,
    pub chi_square: Option<ChiSquareTest>,
    pub solves: Vec<SolveRecord>,
}

impl ExperimentSummary {
    /// CSV `outcome,count,probability`, outcomes as base-`d` digit strings.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("outcome,count,probability\n");
        for (y, &c) in &self.histogram {
            let _ = writeln!(out, "{},{},{}", y.digits(), c, c as f64 / self.trials as f64);
        }
        out
    }

    pub fn mean_runs_used(&self) -> Option<f64> {
        let ok: Vec<usize> = self
            .solves
            .iter()
            .filter(|s| s.recovered.is_some())
            .map(|s| s.runs_used)
            .collect();
        (!ok.is_empty()).then(|| ok.iter().sum::<usize>() as f64 / ok.len() as f64)
    }
}

/// Deterministic per-trial stream of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `M` independent runs (in parallel, trial `i` on stream `i`) plus optional
/// solve attempts. Identical inputs give identical summaries.
pub fn run_experiment(
    f: &PromiseOracle,
    options: &ExperimentOptions,
    budget: AmplitudeBudget,
) -> Result<ExperimentSummary> {
    if options.trials == 0 {
        return Err(Error::Domain("an experiment needs at least one trial".into()));
    }
    // fail fast on capacity before spawning work; workers clone this state
    let template = PureState::zero_state_with_budget(f.modulus(), f.n(), budget)?;

    let runs: Vec<RunResult> = (0..options.trials as u64)
        .into_par_iter()
        .map_init(
            || template.clone(),
            |state, i| run_in(state, f, &mut stream_rng(options.seed, i)),
        )
        .collect::<Result<_>>()?;

    let mut histogram = BTreeMap::new();
    let mut inside = 0usize;
    for r in &runs {
        *histogram.entry(r.sample.clone()).or_insert(0u64) += 1;
        inside += usize::from(r.in_orthogonal);
    }
    let support_fraction = inside as f64 / options.trials as f64;

    let chi_square = match f.modulus().pow(f.n() - 1) {
        Some(size) if (2..=brute::ENUMERATION_LIMIT).contains(&size) => {
            Some(chi_square_uniform(&histogram, &expected_support(f)?)?)
        }
        _ => None,
    };

    let max_runs = options.max_runs.unwrap_or_else(|| default_max_runs(f.modulus(), f.n()));
    let solves = (0..options.solves as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(options.seed, SOLVE_STREAM_BASE + i);
            match solve(f, &mut rng, max_runs, budget) {
                Ok(s) => Ok(SolveRecord {
                    runs_used: s.runs_used,
                    recovered: Some(s.shift),
                    error: None,
                }),
                Err(Error::IncompleteConstraints { runs_used, .. }) => Ok(SolveRecord {
                    runs_used,
                    recovered: None,
                    error: Some("incomplete constraints".into()),
                }),
                Err(Error::InconsistentConstraints(msg)) => Ok(SolveRecord {
                    runs_used: max_runs,
                    recovered: None,
                    error: Some(msg),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentSummary {
        trials: options.trials,
        histogram,
        support_fraction,
        chi_square,
        solves,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionSearch {
    /// The colliding inputs `(x, y)` with `f(x) = f(y)`, `x` queried first.
    pub pair: Option<(ZVec, ZVec)>,
    /// `y ⊟ x` for cyclic oracles (a nonzero multiple of `s`); the layerwise
    /// XOR `y ⊕ x` for layered ones.
    pub difference: Option<ZVec>,
    pub queries_used: usize,
}

/// Birthday-style classical baseline: query distinct random inputs until two
/// share an output.
pub fn classical_collision_search<R: Rng + ?Sized>(
    f: &PromiseOracle,
    rng: &mut R,
    max_queries: usize,
) -> Result<CollisionSearch> {
    if max_queries < 2 {
        return Err(Error::Domain("max_queries must be at least 2".into()));
    }
    let size = f.table().len();
    let order = rand::seq::index::sample(rng, size, max_queries.min(size));
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for (q, x) in order.iter().enumerate() {
        let fx = f.table()[x];
        if let Some(&first) = seen.get(&fx) {
            let a = ZVec::from_index(f.modulus(), f.n(), first);
            let b = ZVec::from_index(f.modulus(), f.n(), x);
            let difference = match f.structure() {
                Structure::Cyclic { .. } => b.sub(&a)?,
                Structure::Layered { .. } => ZVec::new(
                    f.modulus(),
                    a.entries().iter().zip(b.entries()).map(|(p, q)| p ^ q).collect(),
                )?,
            };
            return Ok(CollisionSearch {
                pair: Some((a, b)),
                difference: Some(difference),
                queries_used: q + 1,
            });
        }
        seen.insert(fx, x);
    }
    Ok(CollisionSearch {
        pair: None,
        difference: None,
        queries_used: order.len(),
    })
}

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

//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qsimon_core::analytics::{self, Horizon};
use qsimon_core::oracle::{
    build_native_oracle, lift_binary_oracle, pack, unpack, verify_promise, BinaryOracle, OutputAssignment,
};
use qsimon_core::pipeline::{
    self, classical_collision_search, collect_samples, exact_sample_distribution, run_experiment, solve, stream_rng,
    ExperimentOptions,
};
use qsimon_core::statevector::DEFAULT_MAX_AMPLITUDES;
use qsimon_core::zmod::{brute, order_of, submodule_size};
use qsimon_core::{AmplitudeBudget, Modulus, PromiseOracle, PureState, Register, ZVec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn budget() -> AmplitudeBudget {
    AmplitudeBudget::new(DEFAULT_MAX_AMPLITUDES)
}

fn zv(d: u64, e: &[u64]) -> ZVec {
    ZVec::from_slice(d, e).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_vector(d: u64, n: usize, rng: &mut ChaCha8Rng) -> ZVec {
    ZVec::new(
        Modulus::new(d).unwrap(),
        (0..n).map(|_| rng.random_range(0..d)).collect(),
    )
    .unwrap()
}

fn random_full_order(d: u64, n: usize, rng: &mut ChaCha8Rng) -> ZVec {
    loop {
        let s = random_vector(d, n, rng);
        if !s.is_zero() && order_of(&s).unwrap() == d {
            return s;
        }
    }
}

fn native(s: &ZVec, seed: u64) -> PromiseOracle {
    build_native_oracle(s, &mut stream_rng(seed, 0), OutputAssignment::Random, budget()).unwrap()
}

fn uniform_sampling() -> Outcome {
    let start = Instant::now();
    let s = zv(4, &[2, 0, 3, 1]);
    let f = native(&s, 1);
    let dist = exact_sample_distribution(&f, budget()).map_err(|e| e.to_string())?;
    ensure(dist.len() == 64, format!("support has {} outcomes", dist.len()))?;
    let worst = dist.values().map(|p| (p - 1.0 / 64.0).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-9, format!("max deviation from 1/64 is {worst:e}"))?;
    let perp = brute::orthogonal_complement(&s).unwrap();
    ensure(
        dist.keys().all(|y| perp.contains(y)),
        "support leaves the orthogonal complement",
    )?;

    let summary = run_experiment(
        &f,
        &ExperimentOptions {
            trials: 6400,
            seed: 2026,
            solves: 0,
            max_runs: None,
        },
        budget(),
    )
    .map_err(|e| e.to_string())?;
    let chi = summary.chi_square.ok_or("no chi-square test")?;
    ensure(
        chi.passes(1e-3),
        format!("chi-square {:.2} p={:.2e}", chi.statistic, chi.p_value),
    )?;
    ensure(
        summary.support_fraction == 1.0,
        "samples outside the orthogonal complement",
    )?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, format!("took {secs:.1} s"))?;
    Ok(format!(
        "64 outcomes, max |p - 1/64| = {worst:.1e}; 6400 shots chi2 = {:.1} (p = {:.3}); {secs:.1} s",
        chi.statistic, chi.p_value
    ))
}

fn worked_example() -> Outcome {
    let f = native(&zv(4, &[0, 1]), 3);
    let mut state = PureState::zero_state(f.modulus(), 2).unwrap();
    state.apply_qft_register(Register::First, false).unwrap();
    state.apply_oracle(&f).unwrap();
    let f30 = f.eval(&zv(4, &[3, 0]));
    let p = state.postselect(Register::Second, &f30).unwrap();
    ensure((p - 0.25).abs() < 1e-12, format!("ancilla outcome probability {p}"))?;
    state.apply_qft_register(Register::First, false).unwrap();

    let i = Complex64::new(0.0, 1.0);
    let coeff = [Complex64::new(0.5, 0.0), -i * 0.5, Complex64::new(-0.5, 0.0), i * 0.5];
    let mut worst: f64 = 0.0;
    for x in brute::all_vectors(f.modulus(), 2).unwrap() {
        for a in brute::all_vectors(f.modulus(), 2).unwrap() {
            let want = if x.entries()[1] == 0 && a == f30 {
                coeff[x.entries()[0] as usize]
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((state.amplitude(&x, &a).unwrap() - want).norm());
        }
    }
    ensure(worst <= 1e-12, format!("amplitude error {worst:e}"))?;
    let dist = state.exact_distribution(Register::First);
    let expect: Vec<ZVec> = (0..4).map(|a| zv(4, &[a, 0])).collect();
    ensure(
        dist.keys().cloned().collect::<Vec<_>>() == expect,
        format!("support {:?}", dist.keys()),
    )?;
    ensure(
        dist.values().all(|p| (p - 0.25).abs() < 1e-12),
        "outcomes are not equiprobable",
    )?;
    Ok(format!(
        "post-transform amplitudes within {worst:.1e}; outcomes 00,10,20,30 at 1/4"
    ))
}

fn qubit_regression() -> Outcome {
    let mut rng = stream_rng(3, 7);
    let mut runs = 0usize;
    for i in 0..50u64 {
        let n = rng.random_range(1..=5usize);
        let s = random_full_order(2, n, &mut rng);
        let f = native(&s, 100 + i);
        let solved = solve(
            &f,
            &mut stream_rng(3, i),
            pipeline::default_max_runs(f.modulus(), n),
            budget(),
        )
        .map_err(|e| format!("instance {i} (s = {s}): {e}"))?;
        ensure(
            solved.shift == s,
            format!("instance {i}: recovered {} for {s}", solved.shift),
        )?;
        runs += solved.runs_used;
    }
    Ok(format!("50/50 instances recovered exactly, {runs} runs in total"))
}

fn lifted_oracle() -> PromiseOracle {
    let s = zv(2, &[0, 1, 0, 1]);
    let b = BinaryOracle::random(&s, &mut stream_rng(4, 0), OutputAssignment::Random).unwrap();
    lift_binary_oracle(&b, 2, budget()).unwrap()
}

fn fibers(f: &PromiseOracle) -> BTreeMap<usize, BTreeSet<ZVec>> {
    let mut out: BTreeMap<usize, BTreeSet<ZVec>> = BTreeMap::new();
    for (i, &v) in f.table().iter().enumerate() {
        out.entry(v)
            .or_default()
            .insert(ZVec::from_index(f.modulus(), f.n(), i));
    }
    out
}

fn lifted_fiber_law() -> Outcome {
    let f = lifted_oracle();
    let s = zv(2, &[0, 1, 0, 1]);
    let fibers = fibers(&f);
    ensure(fibers.len() == 64, format!("{} fibers", fibers.len()))?;
    ensure(fibers.values().all(|fb| fb.len() == 4), "fiber of size other than 4")?;
    ensure(verify_promise(&f).passed(), "promise check failed")?;
    for fiber in fibers.values() {
        let eta = fiber.iter().next().unwrap();
        let layers = unpack(eta, 2).unwrap();
        let toggled: BTreeSet<ZVec> = (0..4u64)
            .map(|delta| {
                let ls: Vec<ZVec> = layers
                    .iter()
                    .enumerate()
                    .map(|(t, x)| {
                        let bits = x
                            .entries()
                            .iter()
                            .zip(s.entries())
                            .map(|(a, b)| a ^ (b * ((delta >> t) & 1)))
                            .collect();
                        ZVec::new(x.modulus(), bits).unwrap()
                    })
                    .collect();
                pack(&ls).unwrap()
            })
            .collect();
        ensure(
            &toggled == fiber,
            format!("fiber through {eta} is not its layer-toggle orbit"),
        )?;
    }
    Ok("256 inputs: constant on and distinct across 64 layer-toggle fibers of size 4".into())
}

fn additive_fiber_formula() -> Outcome {
    let f = lifted_oracle();
    let m = f.modulus();
    let mut mismatched = 0;
    let mut example = None;
    for (i, &v) in f.table().iter().enumerate() {
        let x = ZVec::from_index(m, 4, i);
        let fiber: BTreeSet<ZVec> = f
            .table()
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w == v)
            .map(|(j, _)| ZVec::from_index(m, 4, j))
            .collect();
        let e = x.entries();
        let formula: BTreeSet<ZVec> = (0..4)
            .map(|k| ZVec::new(m, vec![e[0], (e[1] + k) % 4, e[2], (e[3] + k) % 4]).unwrap())
            .collect();
        if fiber != formula {
            mismatched += 1;
            example.get_or_insert((x, fiber, formula));
        }
    }
    match example {
        None => Ok("all 256 fibers match (x1, x2+k, x3, x4+k)".into()),
        Some((x, fiber, formula)) => Err(format!(
            "{mismatched}/256 inputs differ, e.g. fiber through {x} is {:?}, formula gives {:?}",
            fiber.iter().map(ZVec::digits).collect::<Vec<_>>(),
            formula.iter().map(ZVec::digits).collect::<Vec<_>>()
        )),
    }
}

fn table_regression() -> Outcome {
    let dims: Vec<u64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&e| analytics::single_shot_threshold_dim(e).unwrap())
        .collect();
    ensure(dims == [11, 101, 1001], format!("thresholds {dims:?}"))?;
    let ks: Vec<u64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&e| analytics::k_required(2, Horizon::Asymptotic, e).unwrap())
        .collect();
    for (k, reference) in ks.iter().zip([8i64, 16, 25]) {
        ensure((*k as i64 - reference).abs() <= 1, format!("k = {ks:?}"))?;
    }
    Ok(format!("thresholds {dims:?}, qubit repetitions {ks:?}"))
}

fn lift_multiplicity() -> Outcome {
    let r = analytics::lift_multiplicity(6, 1e-2).map_err(|e| e.to_string())?;
    ensure(r.multiplicity == 17 && r.lifted_dim == 102, format!("{r:?}"))?;
    ensure(r.bound <= 1e-2, format!("bound {}", r.bound))?;
    let below = (16.0 * 6.0 + 1.0) / (96.0f64 * 96.0);
    ensure(below > 1e-2, format!("l = 16 already reaches {below}"))?;
    Ok(format!(
        "l = 17, d' = 102, bound {:.5} (l = 16 gives {below:.5})",
        r.bound
    ))
}

fn failure_bound() -> Outcome {
    const BATCHES: u64 = 400;
    let limit = 0.25 + 3.0 * (0.25f64 * 0.75 / BATCHES as f64).sqrt();
    let mut lines = Vec::new();
    let mut failed = None;
    for (d, n) in [(2u64, 3usize), (3, 3), (4, 3)] {
        let k = analytics::k_required(d, Horizon::Finite(n), 0.25).unwrap() as usize;
        let target = Modulus::new(d).unwrap().pow(n - 1).unwrap();
        let mut rng = stream_rng(7, d);
        let mut batch_failures = 0u32;
        let mut run_failures = 0u32;
        for b in 0..BATCHES {
            let s = random_full_order(d, n, &mut rng);
            let f = native(&s, 1000 * d + b);
            // one run is n - 1 samples; a batch pools k runs
            let c = collect_samples(&f, &mut stream_rng(8, d * BATCHES + b), k * (n - 1), budget()).unwrap();
            batch_failures += u32::from(c.constraints.submodule_size() < target);
            let first_run = submodule_size(f.modulus(), n, &c.samples[..n - 1]).unwrap();
            run_failures += u32::from(first_run < target);
        }
        let rate = f64::from(batch_failures) / BATCHES as f64;
        let single = f64::from(run_failures) / BATCHES as f64;
        let bound = analytics::p_fail_single(d, n).unwrap();
        lines.push(format!(
            "(d={d}, n={n}) k={k}: batch failure {rate:.3}, single run {single:.3} vs bound {bound:.3}"
        ));
        if rate > limit {
            failed.get_or_insert(format!("(d={d}, n={n}) batch failure {rate:.3} > {limit:.3}"));
        }
    }
    match failed {
        None => Ok(format!("limit {limit:.3}; {}", lines.join("; "))),
        Some(msg) => Err(format!("{msg}; {}", lines.join("; "))),
    }
}

fn algebra_equivalence() -> Outcome {
    let mut rng = stream_rng(9, 0);
    let mut checked = 0;
    for d in 2..=4u64 {
        let m = Modulus::new(d).unwrap();
        for n in 2..=3usize {
            for i in 0..100 {
                let count = rng.random_range(0..=n + 1);
                let gens: Vec<ZVec> = (0..count).map(|_| random_vector(d, n, &mut rng)).collect();
                let span = brute::closure(m, n, &gens).unwrap();
                let size = submodule_size(m, n, &gens).unwrap();
                ensure(
                    size == span.len() as u128,
                    format!("d={d} n={n} #{i}: size {size} vs {}", span.len()),
                )?;
                let ann = qsimon_core::zmod::annihilator(m, n, &gens).unwrap();
                let got = brute::closure(m, n, &ann).unwrap();
                let want = brute::annihilator(m, n, &gens).unwrap();
                ensure(
                    got == want,
                    format!("d={d} n={n} #{i}: annihilator mismatch for {gens:?}"),
                )?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} random instances agree with enumeration"))
}

fn median(v: &mut [usize]) -> f64 {
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) as f64 / 2.0
    } else {
        v[m] as f64
    }
}

fn classical_gap() -> Outcome {
    const SEEDS: u64 = 100;
    let mut rows = Vec::new();
    let mut gap = None;
    for (d, s) in [(2u64, zv(2, &[1, 0, 1, 1])), (4, zv(4, &[2, 0, 3, 1]))] {
        let n = s.len();
        let f = native(&s, 77);
        let mut queries: Vec<usize> = (0..SEEDS)
            .map(|seed| {
                let c = classical_collision_search(&f, &mut stream_rng(seed, 1), f.table().len()).unwrap();
                assert!(c.pair.is_some());
                c.queries_used
            })
            .collect();
        let classical = median(&mut queries);
        let runs: Vec<usize> = (0..SEEDS)
            .map(|seed| {
                solve(
                    &f,
                    &mut stream_rng(seed, 2),
                    pipeline::default_max_runs(f.modulus(), n),
                    budget(),
                )
                .unwrap()
                .runs_used
            })
            .collect();
        let quantum = runs.iter().sum::<usize>() as f64 / runs.len() as f64;
        let k = analytics::k_required(d, Horizon::Finite(n), pipeline::DEFAULT_BUDGET_EPSILON).unwrap() as usize;
        let budget_runs = k * (n - 1);
        let scale = (d as f64).powf(n as f64 / 2.0);
        rows.push(format!(
            "(d={d}, n={n}) classical median {classical} (d^(n/2) = {scale}), quantum mean {quantum:.2} (budget {budget_runs})"
        ));
        if d == 4 {
            gap = Some((classical, quantum));
        }
    }
    let (classical, quantum) = gap.unwrap();
    let table = rows.join("; ");
    ensure(
        classical > quantum,
        format!("classical {classical} <= quantum {quantum}; {table}"),
    )?;
    Ok(table)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1", "uniform sampling on the orthogonal complement", uniform_sampling),
        ("2", "worked example, d=4 n=2 s=01", worked_example),
        ("3", "qubit regression", qubit_regression),
        ("4a", "lifted fiber law (layer toggles)", lifted_fiber_law),
        (
            "4b",
            "lifted fibers match the additive coordinate formula",
            additive_fiber_formula,
        ),
        ("5", "single-shot thresholds and qubit repetitions", table_regression),
        ("6", "lift multiplicity for d=6, eps=1e-2", lift_multiplicity),
        ("7", "failure bound is one-sided", failure_bound),
        ("8", "algebra matches brute force", algebra_equivalence),
        ("9", "classical collision search vs quantum runs", classical_gap),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (id, name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(format!(
                "panicked: {}",
                p.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ))
        });
        match outcome {
            Ok(detail) => println!("criterion {id:<3} PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("criterion {id:<3} FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

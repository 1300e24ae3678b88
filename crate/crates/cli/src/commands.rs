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

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use qsimon_core::analytics::{self, Horizon};
use qsimon_core::oracle::{
    build_native_oracle, lift_binary_oracle, verify_promise, BinaryOracle, OracleFile, OutputAssignment, PromiseReport,
    PromiseStatus,
};
use qsimon_core::pipeline::{default_max_runs, run_experiment, stream_rng, ChiSquareTest, ExperimentOptions};
use qsimon_core::zmod::{canonical_generator, CanonicalShift};
use qsimon_core::{AmplitudeBudget, Error, PromiseOracle, Structure, ZVec};

use crate::config::{default_trials, ExperimentConfig, Mode, ResolvedConfig};

/// Stream reserved for oracle construction, so `oracle gen --seed k` and
/// `simulate --seed k` build the same oracle.
pub const ORACLE_STREAM: u64 = u64::MAX;

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Config(String),
    Promise(String),
    Incomplete(String),
    Recovery(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::Capacity { .. }) => 2,
            Failure::Promise(_) => 3,
            Failure::Core(Error::IncompleteConstraints { .. }) | Failure::Incomplete(_) => 4,
            _ => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Config(m) => write!(f, "config: {m}"),
            Failure::Promise(m) => write!(f, "promise violated: {m}"),
            Failure::Incomplete(m) => write!(f, "incomplete constraints: {m}"),
            Failure::Recovery(m) => write!(f, "recovery failed: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    println!("{}", serde_json::to_string(value).map_err(Error::from)?);
    Ok(())
}

fn assignment(canonical: bool) -> OutputAssignment {
    if canonical {
        OutputAssignment::Canonical
    } else {
        OutputAssignment::Random
    }
}

fn parse_shift(s: &str) -> Result<ZVec, Failure> {
    s.parse().map_err(|e| Failure::Config(format!("shift {s:?}: {e}")))
}

fn check_shape(f: &PromiseOracle, d: Option<u64>, n: Option<usize>) -> Result<(), Failure> {
    if let Some(d) = d.filter(|&d| d != f.modulus().get()) {
        return Err(Failure::Config(format!(
            "d={d} but the oracle is over Z_{}",
            f.modulus()
        )));
    }
    if let Some(n) = n.filter(|&n| n != f.n()) {
        return Err(Failure::Config(format!("n={n} but the oracle has n={}", f.n())));
    }
    Ok(())
}

fn build_from_shift(
    mode: Mode,
    shift: &ZVec,
    l: Option<u32>,
    seed: u64,
    canonical: bool,
    budget: AmplitudeBudget,
) -> Result<PromiseOracle, Failure> {
    let mut rng = stream_rng(seed, ORACLE_STREAM);
    match mode {
        Mode::Native => Ok(build_native_oracle(shift, &mut rng, assignment(canonical), budget)?),
        Mode::Lifted => {
            let l = l.ok_or_else(|| Failure::Config("lifted mode needs the layer count l".into()))?;
            if shift.modulus().get() != 2 {
                return Err(Failure::Config(format!(
                    "lifted mode needs a binary shift, got {shift}"
                )));
            }
            // check capacity before building the binary table
            budget.admit(qsimon_core::Modulus::new(1 << l.min(62))?, shift.len())?;
            let b = BinaryOracle::random(shift, &mut rng, assignment(canonical))?;
            Ok(lift_binary_oracle(&b, l, budget)?)
        }
    }
}

fn load_oracle(path: &Path) -> Result<PromiseOracle, Failure> {
    let text = fs::read_to_string(path)?;
    let file = OracleFile::from_json(&text).map_err(|e| with_path(e, path))?;
    file.into_oracle().map_err(|e| with_path(e, path).into())
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn require_promise(f: &PromiseOracle) -> Result<PromiseReport, Failure> {
    let report = verify_promise(f);
    match &report.status {
        PromiseStatus::Violated(v) => Err(Failure::Promise(v.to_string())),
        _ => Ok(report),
    }
}

fn describe(f: &PromiseOracle, report: &PromiseReport) -> String {
    let size = report
        .fiber_size
        .map_or_else(|| "uneven sizes".to_string(), |s| format!("size {s}"));
    format!(
        "oracle over Z_{}^{}: {} fibers of {size}, shift {}",
        f.modulus(),
        f.n(),
        report.fibers,
        f.shift()
    )
}

pub fn oracle_gen(
    s: &str,
    d: Option<u64>,
    n: Option<usize>,
    l: Option<u32>,
    seed: u64,
    canonical: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let budget = AmplitudeBudget::from_env()?;
    let shift = parse_shift(s)?;
    let mode = if l.is_some() { Mode::Lifted } else { Mode::Native };
    let f = build_from_shift(mode, &shift, l, seed, canonical, budget)?;
    check_shape(&f, d, n)?;
    let report = verify_promise(&f);
    emit(out, &(OracleFile::from(&f).to_json() + "\n"))?;
    eprintln!("{}", describe(&f, &report));
    Ok(())
}

pub fn oracle_verify(input: &Path) -> Result<(), Failure> {
    let f = load_oracle(input)?;
    let report = verify_promise(&f);
    print_json(&report)?;
    match &report.status {
        PromiseStatus::Violated(v) => Err(Failure::Promise(v.to_string())),
        PromiseStatus::Skipped => {
            eprintln!("table too large for an exhaustive check; promise not verified");
            Ok(())
        }
        PromiseStatus::Pass => {
            eprintln!("{}", describe(&f, &report));
            Ok(())
        }
    }
}

pub fn oracle_lift(input: &Path, l: u32, out: Option<&Path>) -> Result<(), Failure> {
    let budget = AmplitudeBudget::from_env()?;
    let f = load_oracle(input)?;
    let b = to_binary(f)?;
    let lifted = lift_binary_oracle(&b, l, budget)?;
    let report = require_promise(&lifted)?;
    emit(out, &(OracleFile::from(&lifted).to_json() + "\n"))?;
    eprintln!("{}", describe(&lifted, &report));
    Ok(())
}

fn to_binary(f: PromiseOracle) -> Result<BinaryOracle, Failure> {
    if f.modulus().get() != 2 || !matches!(f.structure(), Structure::Cyclic { .. }) {
        return Err(Failure::Config(format!(
            "lifting needs a cyclic binary oracle, got one over Z_{}",
            f.modulus()
        )));
    }
    require_promise(&f)?;
    Ok(BinaryOracle::try_from(f)?)
}

/// Oracle and resolved settings for a simulate run.
fn resolve(
    cfg: &ExperimentConfig,
    budget: AmplitudeBudget,
) -> Result<(PromiseOracle, ResolvedConfig, PromiseReport), Failure> {
    let seed = cfg.seed.unwrap_or(0);
    let canonical = cfg.canonical.unwrap_or(false);
    let f = match (&cfg.shift, &cfg.oracle) {
        (Some(_), Some(_)) => {
            return Err(Failure::Config(
                "give either a shift or an oracle file, not both".into(),
            ))
        }
        (None, None) => return Err(Failure::Config("a shift or an oracle file is required".into())),
        (Some(s), None) => {
            let shift = parse_shift(s)?;
            let mode = cfg
                .mode
                .unwrap_or(if cfg.l.is_some() { Mode::Lifted } else { Mode::Native });
            let l = match (mode, cfg.l, cfg.d) {
                (Mode::Lifted, None, Some(d)) if d.is_power_of_two() && d > 1 => Some(d.trailing_zeros()),
                (_, l, _) => l,
            };
            build_from_shift(mode, &shift, l, seed, canonical, budget)?
        }
        (None, Some(path)) => {
            let f = load_oracle(path)?;
            match (f.structure(), cfg.mode) {
                (Structure::Layered { layers, .. }, None | Some(Mode::Lifted)) => {
                    if let Some(l) = cfg.l.filter(|l| l != layers) {
                        return Err(Failure::Config(format!("l={l} but the oracle file has l={layers}")));
                    }
                    f
                }
                (Structure::Layered { .. }, Some(Mode::Native)) => {
                    return Err(Failure::Config("the oracle file is layered; use lifted mode".into()))
                }
                (Structure::Cyclic { .. }, Some(Mode::Lifted)) => {
                    let l = cfg
                        .l
                        .ok_or_else(|| Failure::Config("lifting an oracle file needs l".into()))?;
                    lift_binary_oracle(&to_binary(f)?, l, budget)?
                }
                (Structure::Cyclic { .. }, _) => f,
            }
        }
    };
    check_shape(&f, cfg.d, cfg.n)?;
    let report = require_promise(&f)?;

    let (mode, l) = match f.structure() {
        Structure::Cyclic { .. } => (Mode::Native, None),
        Structure::Layered { layers, .. } => (Mode::Lifted, Some(*layers)),
    };
    let solve = cfg.solve.unwrap_or(true);
    let resolved = ResolvedConfig {
        mode,
        d: f.modulus().get(),
        l,
        n: f.n(),
        shift: f.shift().to_string(),
        oracle: cfg.oracle.clone(),
        trials: cfg.trials.unwrap_or_else(|| default_trials(f.modulus().get(), f.n())),
        seed,
        max_runs: cfg.max_runs.unwrap_or_else(|| default_max_runs(f.modulus(), f.n())),
        solves: if solve { cfg.solves.unwrap_or(1) } else { 0 },
        solve,
        canonical,
    };
    Ok((f, resolved, report))
}

#[derive(Debug, Serialize)]
struct SolveLine {
    runs_used: usize,
    recovered: Option<String>,
    matches_shift: bool,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct SummaryFile {
    config: ResolvedConfig,
    promise: PromiseReport,
    trials: usize,
    distinct_outcomes: usize,
    support_fraction: f64,
    chi_square: Option<ChiSquareTest>,
    /// Generator every successful solve should return.
    expected_shift: String,
    recovered: Option<String>,
    mean_runs_used: Option<f64>,
    solves: Vec<SolveLine>,
}

fn expected_shift(f: &PromiseOracle) -> Result<ZVec, Failure> {
    match f.structure() {
        Structure::Layered { shift, .. } => Ok(shift.clone()),
        Structure::Cyclic { shift } => {
            match canonical_generator(shift.modulus(), shift.len(), std::slice::from_ref(shift))? {
                CanonicalShift::Cyclic(g) => Ok(g),
                CanonicalShift::NotCyclic { .. } => unreachable!("a single generator spans a cyclic group"),
            }
        }
    }
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value).map_err(Error::from)? + "\n")
}

pub fn simulate(cfg: ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let budget = AmplitudeBudget::from_env()?;
    let (f, config, promise) = resolve(&cfg, budget)?;
    let summary = run_experiment(
        &f,
        &ExperimentOptions {
            trials: config.trials,
            seed: config.seed,
            solves: config.solves,
            max_runs: Some(config.max_runs),
        },
        budget,
    )?;

    let expected = expected_shift(&f)?;
    let solves: Vec<SolveLine> = summary
        .solves
        .iter()
        .map(|r| SolveLine {
            runs_used: r.runs_used,
            recovered: r.recovered.as_ref().map(ZVec::to_string),
            matches_shift: r.recovered.as_ref() == Some(&expected),
            error: r.error.clone(),
        })
        .collect();
    let file = SummaryFile {
        config: config.clone(),
        promise,
        trials: summary.trials,
        distinct_outcomes: summary.histogram.len(),
        support_fraction: summary.support_fraction,
        chi_square: summary.chi_square,
        expected_shift: expected.to_string(),
        recovered: solves.iter().find_map(|s| s.recovered.clone()),
        mean_runs_used: summary.mean_runs_used(),
        solves,
    };

    fs::create_dir_all(out)?;
    fs::write(out.join("config.json"), to_pretty(&config)?)?;
    fs::write(out.join("oracle.json"), OracleFile::from(&f).to_json() + "\n")?;
    fs::write(out.join("histogram.csv"), summary.histogram_csv())?;
    fs::write(out.join("summary.json"), to_pretty(&file)?)?;

    println!(
        "{} trials over Z_{}^{}: {} distinct outcomes, support fraction {}",
        file.trials, config.d, config.n, file.distinct_outcomes, file.support_fraction
    );
    if let Some(chi) = &file.chi_square {
        println!(
            "chi-square {:.3} on {} dof, p = {:.4}",
            chi.statistic, chi.degrees_of_freedom, chi.p_value
        );
    }
    for (i, s) in file.solves.iter().enumerate() {
        match &s.recovered {
            Some(r) => println!("solve {i}: recovered {r} after {} runs", s.runs_used),
            None => println!("solve {i}: failed after {} runs", s.runs_used),
        }
    }

    if let Some(s) = file.solves.iter().find(|s| s.recovered.is_none()) {
        let msg = s.error.clone().unwrap_or_default();
        return Err(if msg == "incomplete constraints" {
            Failure::Incomplete(format!("max_runs = {} exhausted", config.max_runs))
        } else {
            Failure::Recovery(msg)
        });
    }
    if let Some(s) = file.solves.iter().find(|s| !s.matches_shift) {
        return Err(Failure::Recovery(format!(
            "recovered {} but expected {}",
            s.recovered.as_deref().unwrap_or("-"),
            file.expected_shift
        )));
    }
    Ok(())
}

fn write_gnuplot(script: Option<&Path>, text: String) -> Result<(), Failure> {
    if let Some(path) = script {
        fs::write(path, text)?;
    }
    Ok(())
}

pub fn analyze_table1(eps: &[f64], out: Option<&Path>) -> Result<(), Failure> {
    emit(out, &analytics::table1_csv(&analytics::table1(eps)?))
}

fn range_u64(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).collect()
}

pub fn analyze_fig1(d_min: u64, d_max: u64, out: Option<&Path>, gnuplot: Option<&Path>) -> Result<(), Failure> {
    let rows = analytics::fig1(&range_u64(d_min, d_max))?;
    emit(out, &analytics::fig1_csv(&rows))?;
    let csv = out.map(|p| p.display().to_string());
    write_gnuplot(gnuplot, analytics::gnuplot_script(csv.as_deref(), None, &[]))
}

pub fn analyze_fig2(
    d: (u64, u64),
    n: (usize, usize),
    eps: &[f64],
    out: Option<&Path>,
    gnuplot: Option<&Path>,
) -> Result<(), Failure> {
    let n_grid: Vec<usize> = (n.0..=n.1).collect();
    let rows = analytics::fig2(&range_u64(d.0, d.1), &n_grid, eps)?;
    emit(out, &analytics::fig2_csv(&rows))?;
    let csv = out.map(|p| p.display().to_string());
    write_gnuplot(gnuplot, analytics::gnuplot_script(None, csv.as_deref(), eps))
}

pub fn analyze_k(d: u64, n: Option<usize>, eps: f64) -> Result<(), Failure> {
    let horizon = n.map_or(Horizon::Asymptotic, Horizon::Finite);
    let k = analytics::k_required(d, horizon, eps)?;
    print_json(&serde_json::json!({ "d": d, "horizon": horizon, "epsilon": eps, "k": k }))
}

pub fn analyze_pfail(d: u64, n: usize) -> Result<(), Failure> {
    let p = analytics::p_fail_single(d, n)?;
    print_json(&serde_json::json!({ "d": d, "n": n, "p_fail_single": p }))
}

pub fn analyze_threshold(eps: f64) -> Result<(), Failure> {
    let d = analytics::single_shot_threshold_dim(eps)?;
    print_json(&serde_json::json!({ "epsilon": eps, "d_single_shot": d }))
}

pub fn analyze_lift(d: u64, eps: f64) -> Result<(), Failure> {
    print_json(&analytics::lift_multiplicity(d, eps)?)
}

pub fn analyze_budget(d: u64, n: usize, eps: f64) -> Result<(), Failure> {
    print_json(&analytics::budget_report(d, n, eps)?)
}

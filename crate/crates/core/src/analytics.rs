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

//! Closed-form repetition budgets.
//!
//! With `|S^⊥| = d^{n-1}`, one full run of `n - 1` samples fails to yield a
//! complete constraint set with probability at most
//! `base(d, n) = (d+1)/d² - d^{-n}`, so `k` independent runs fail with
//! probability at most `base^k`. As `n → ∞` the base tends to `(d+1)/d²`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Subtracted before every ceiling so that values landing exactly on an
/// integer (up to rounding) do not round up.
pub const CEIL_NUDGE: f64 = 1e-12;

/// Failure targets of the threshold table.
pub const TABLE1_EPSILONS: [f64; 3] = [1e-1, 1e-2, 1e-3];

fn nudged_ceil(x: f64) -> u64 {
    (x - CEIL_NUDGE).ceil().max(1.0) as u64
}

fn check_dim(d: u64) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

/// Register length used for a budget: a finite `n ≥ 2`, or the large-`n` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Finite(usize),
    Asymptotic,
}

/// `(d+1)/d²`.
pub fn asymptotic_base(d: u64) -> Result<f64> {
    check_dim(d)?;
    let d = d as f64;
    Ok((d + 1.0) / (d * d))
}

/// Upper bound on the failure probability of one full run:
/// `(d+1)/d² - d^{-n}`.
pub fn p_fail_single(d: u64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    Ok(asymptotic_base(d)? - (d as f64).powi(-(n as i32)))
}

fn base(d: u64, horizon: Horizon) -> Result<f64> {
    match horizon {
        Horizon::Finite(n) => p_fail_single(d, n),
        Horizon::Asymptotic => asymptotic_base(d),
    }
}

/// Number of runs `k` with `base^k ≤ ε`:
/// `⌈log ε / log base⌉`, or `⌈-log ε / (2 log d - log(d+1))⌉` asymptotically.
pub fn k_required(d: u64, horizon: Horizon, epsilon: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    let b = base(d, horizon)?;
    debug_assert!(b > 0.0 && b < 1.0);
    let k = match horizon {
        Horizon::Finite(_) => epsilon.ln() / b.ln(),
        Horizon::Asymptotic => {
            let df = d as f64;
            -epsilon.ln() / (2.0 * df.ln() - (df + 1.0).ln())
        }
    };
    Ok(nudged_ceil(k))
}

/// Smallest `d ≥ 2` with `(d+1)/d² ≤ ε`.
pub fn single_shot_threshold_dim(epsilon: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    let ok = |d: u64| (d as f64 + 1.0) <= epsilon * (d as f64) * (d as f64);
    // positive root of ε d² - d - 1 = 0, then settle on the exact integer
    let root = (1.0 + (1.0 + 4.0 * epsilon).sqrt()) / (2.0 * epsilon);
    let mut d = (root.floor() as u64).max(2);
    while d > 2 && ok(d - 1) {
        d -= 1;
    }
    while !ok(d) {
        d += 1;
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    /// Multiplicity `ℓ`.
    pub multiplicity: u64,
    /// `d' = ℓ d`.
    pub lifted_dim: u64,
    /// `(d'+1)/d'²`, the single-shot failure bound after lifting.
    pub bound: f64,
    /// `(1 + √(1+4ε)) / (2εd)`.
    pub closed_form: f64,
}

/// Smallest `ℓ ≥ 1` with `(ℓd+1)/(ℓd)² ≤ ε`.
pub fn lift_multiplicity(d: u64, epsilon: f64) -> Result<LiftReport> {
    check_dim(d)?;
    check_epsilon(epsilon)?;
    let bound = |l: u64| {
        let dp = (l * d) as f64;
        (dp + 1.0) / (dp * dp)
    };
    let closed_form = (1.0 + (1.0 + 4.0 * epsilon).sqrt()) / (2.0 * epsilon * d as f64);
    let mut l = nudged_ceil(closed_form);
    while bound(l) > epsilon {
        l += 1;
    }
    while l > 1 && bound(l - 1) <= epsilon {
        l -= 1;
    }
    Ok(LiftReport {
        multiplicity: l,
        lifted_dim: l * d,
        bound: bound(l),
        closed_form,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub d: u64,
    pub n: usize,
    pub epsilon: f64,
    pub p_fail_single: f64,
    pub k_exact: u64,
    pub k_asymptotic: u64,
    pub base: f64,
}

pub fn budget_report(d: u64, n: usize, epsilon: f64) -> Result<BudgetReport> {
    let p = p_fail_single(d, n)?;
    Ok(BudgetReport {
        d,
        n,
        epsilon,
        p_fail_single: p,
        k_exact: k_required(d, Horizon::Finite(n), epsilon)?,
        k_asymptotic: k_required(d, Horizon::Asymptotic, epsilon)?,
        base: p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub d: u64,
    pub f: f64,
}

/// `f(d) = log 3 / (2 log d - log(d+1))`: asymptotic repetitions for a
/// failure target of 1/3.
pub fn fig1(d_grid: &[u64]) -> Result<Vec<Fig1Row>> {
    if d_grid.is_empty() {
        return Err(Error::Domain("empty d grid".into()));
    }
    d_grid
        .iter()
        .map(|&d| {
            check_dim(d)?;
            let df = d as f64;
            Ok(Fig1Row {
                d,
                f: 3f64.ln() / (2.0 * df.ln() - (df + 1.0).ln()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub d: u64,
    pub n: usize,
    pub epsilon: f64,
    /// `log ε / log((d+1)/d² - d^{-n})`, before rounding up.
    pub k: f64,
}

pub fn fig2(d_grid: &[u64], n_grid: &[usize], epsilons: &[f64]) -> Result<Vec<Fig2Row>> {
    if d_grid.is_empty() || n_grid.is_empty() || epsilons.is_empty() {
        return Err(Error::Domain("fig2 needs non-empty d, n and epsilon grids".into()));
    }
    let mut rows = Vec::with_capacity(d_grid.len() * n_grid.len() * epsilons.len());
    for &epsilon in epsilons {
        check_epsilon(epsilon)?;
        for &d in d_grid {
            for &n in n_grid {
                let b = p_fail_single(d, n)?;
                rows.push(Fig2Row {
                    d,
                    n,
                    epsilon,
                    k: epsilon.ln() / b.ln(),
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub epsilon: f64,
    pub d_single_shot: u64,
    /// Asymptotic repetitions for qubits.
    pub k_d2: u64,
}

pub fn table1(epsilons: &[f64]) -> Result<Vec<Table1Row>> {
    if epsilons.is_empty() {
        return Err(Error::Domain("empty epsilon list".into()));
    }
    epsilons
        .iter()
        .map(|&epsilon| {
            Ok(Table1Row {
                epsilon,
                d_single_shot: single_shot_threshold_dim(epsilon)?,
                k_d2: k_required(2, Horizon::Asymptotic, epsilon)?,
            })
        })
        .collect()
}

pub fn fig1_csv(rows: &[Fig1Row]) -> String {
    let mut out = String::from("d,f\n");
    for r in rows {
        let _ = writeln!(out, "{},{}", r.d, r.f);
    }
    out
}

pub fn fig2_csv(rows: &[Fig2Row]) -> String {
    let mut out = String::from("d,n,epsilon,k\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:e},{}", r.d, r.n, r.epsilon, r.k);
    }
    out
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from("epsilon,d_single_shot,k_d2\n");
    for r in rows {
        let _ = writeln!(out, "{:e},{},{}", r.epsilon, r.d_single_shot, r.k_d2);
    }
    out
}

/// A gnuplot script that plots whichever of `fig1.csv` / `fig2.csv` are named.
pub fn gnuplot_script(fig1_csv: Option<&str>, fig2_csv: Option<&str>, epsilons: &[f64]) -> String {
    let mut s =
        String::from("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n");
    if let Some(path) = fig1_csv {
        let _ = writeln!(
            s,
            "set output 'fig1.png'\nset xlabel 'd'\nset ylabel 'k'\nset title 'Asymptotic repetitions for P_fail <= 1/3'\nplot '{path}' using 1:2 with linespoints title 'f(d)'"
        );
    }
    if let Some(path) = fig2_csv {
        for (i, eps) in epsilons.iter().enumerate() {
            let _ = writeln!(
                s,
                "set output 'fig2_{i}.png'\nset xlabel 'd'\nset ylabel 'n'\nset zlabel 'k'\nset title 'epsilon = {eps:e}'\nsplot '{path}' using 1:2:($3 == {eps:e} ? $4 : 1/0) with points title 'f(d,n,eps)'"
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_fail_examples() {
        assert!((asymptotic_base(2).unwrap() - 0.75).abs() < 1e-15);
        assert!((p_fail_single(2, 2).unwrap() - 0.5).abs() < 1e-15);
        for n in 2..8 {
            let mut prev = f64::INFINITY;
            for d in 2..40 {
                let p = p_fail_single(d, n).unwrap();
                assert!(p < prev);
                assert!(p > 0.0 && p < 1.0);
                prev = p;
            }
        }
        assert!(p_fail_single(1, 3).is_err());
        assert!(p_fail_single(2, 1).is_err());
    }

    #[test]
    fn k_examples() {
        assert_eq!(k_required(2, Horizon::Asymptotic, 1e-1).unwrap(), 9);
        assert_eq!(k_required(2, Horizon::Asymptotic, 1e-2).unwrap(), 17);
        assert_eq!(k_required(2, Horizon::Asymptotic, 1e-3).unwrap(), 25);
        // single-shot regime
        assert_eq!(k_required(11, Horizon::Asymptotic, 1e-1).unwrap(), 1);
        assert_eq!(k_required(200, Horizon::Finite(3), 1e-2).unwrap(), 1);
        assert!(k_required(2, Horizon::Asymptotic, 0.0).is_err());
        assert!(k_required(2, Horizon::Asymptotic, 1.0).is_err());
        // (4/9 - 1/27) = 11/27 ; log(1/4)/log(11/27) = 1.54
        assert_eq!(k_required(3, Horizon::Finite(3), 0.25).unwrap(), 2);
    }

    #[test]
    fn nudge_keeps_exact_integers() {
        // base 1/2 at d=2, n=2: log(1/8)/log(1/2) is 3 up to rounding
        assert_eq!(k_required(2, Horizon::Finite(2), 0.125).unwrap(), 3);
    }

    #[test]
    fn k_monotone_on_grid() {
        for &eps in &TABLE1_EPSILONS {
            for horizon in [Horizon::Asymptotic, Horizon::Finite(3), Horizon::Finite(10)] {
                let mut prev = u64::MAX;
                for d in 2..=64 {
                    let k = k_required(d, horizon, eps).unwrap();
                    assert!(k <= prev, "d={d} eps={eps}");
                    prev = k;
                }
            }
        }
        for d in 2..=64 {
            for horizon in [Horizon::Asymptotic, Horizon::Finite(4)] {
                let ks: Vec<u64> = TABLE1_EPSILONS
                    .iter()
                    .map(|&e| k_required(d, horizon, e).unwrap())
                    .collect();
                assert!(ks.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn exact_converges_to_asymptotic() {
        for &eps in &TABLE1_EPSILONS {
            for d in 2..=64 {
                for n in 30..34 {
                    assert_eq!(
                        k_required(d, Horizon::Finite(n), eps).unwrap(),
                        k_required(d, Horizon::Asymptotic, eps).unwrap(),
                        "d={d} n={n} eps={eps}"
                    );
                }
            }
        }
    }

    #[test]
    fn thresholds() {
        assert_eq!(single_shot_threshold_dim(1e-1).unwrap(), 11);
        assert_eq!(single_shot_threshold_dim(1e-2).unwrap(), 101);
        assert_eq!(single_shot_threshold_dim(1e-3).unwrap(), 1001);
        assert_eq!(single_shot_threshold_dim(0.75).unwrap(), 2);
        assert_eq!(single_shot_threshold_dim(0.9).unwrap(), 2);
        for &eps in &[0.3, 0.05, 0.0123, 1e-4] {
            let d = single_shot_threshold_dim(eps).unwrap();
            let b = |d: u64| (d as f64 + 1.0) / (d as f64).powi(2);
            assert!(b(d) <= eps);
            assert!(d == 2 || b(d - 1) > eps);
        }
    }

    #[test]
    fn lift_examples() {
        let r = lift_multiplicity(6, 1e-2).unwrap();
        assert_eq!(r.multiplicity, 17);
        assert_eq!(r.lifted_dim, 102);
        assert!(r.bound <= 1e-2);
        assert!((r.bound - 103.0 / 10404.0).abs() < 1e-15);
        assert!((r.closed_form - 16.83).abs() < 0.01);
        assert_eq!(lift_multiplicity(11, 0.1).unwrap().multiplicity, 1);
        assert_eq!(lift_multiplicity(500, 0.1).unwrap().multiplicity, 1);
    }

    #[test]
    fn lift_is_minimal() {
        for d in 2..40 {
            for &eps in &[0.3, 0.1, 0.01, 0.004] {
                let r = lift_multiplicity(d, eps).unwrap();
                let b = |l: u64| {
                    let x = (l * d) as f64;
                    (x + 1.0) / (x * x)
                };
                assert!(b(r.multiplicity) <= eps);
                assert!(r.multiplicity == 1 || b(r.multiplicity - 1) > eps);
            }
        }
    }

    #[test]
    fn figures() {
        let rows = fig1(&(2..=20).collect::<Vec<_>>()).unwrap();
        assert!((rows[0].f - 3.8188).abs() < 1e-4);
        assert!(rows.windows(2).all(|w| w[1].f < w[0].f));
        assert!(fig1(&[]).is_err());
        assert!(fig1(&[1]).is_err());

        let rows = fig2(&[2, 3], &[2, 5], &[0.1, 0.01]).unwrap();
        assert_eq!(rows.len(), 8);
        assert!((rows[0].k - 0.1f64.ln() / 0.5f64.ln()).abs() < 1e-12);
        assert!(fig2(&[2], &[], &[0.1]).is_err());

        let t = table1(&TABLE1_EPSILONS).unwrap();
        assert_eq!(
            t.iter().map(|r| r.d_single_shot).collect::<Vec<_>>(),
            vec![11, 101, 1001]
        );
        assert_eq!(
            table1_csv(&t),
            "epsilon,d_single_shot,k_d2\n1e-1,11,9\n1e-2,101,17\n1e-3,1001,25\n"
        );
        assert!(fig1_csv(&fig1(&[2]).unwrap()).starts_with("d,f\n2,3.81"));
        assert!(fig2_csv(&rows).starts_with("d,n,epsilon,k\n2,2,1e-1,3.32"));
        let g = gnuplot_script(Some("fig1.csv"), Some("fig2.csv"), &[0.1]);
        assert!(g.contains("'fig1.csv'") && g.contains("'fig2.csv'"));
    }
}

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

//! Diagonalization of integer matrices over `Z_d`.
//!
//! For a generator matrix `Y` (one generator per row) we find invertible `P`,
//! `Q` over `Z_d` with `P·Y·Q = D` diagonal. The row span of `Y` is then
//! isomorphic to `⊕ Z_{d / gcd(D_ii, d)}` and `Y·s = 0` has solutions
//! `s = Q·z` with `D_ii · z_i ≡ 0`. This is Smith normal form of the stacked
//! integer matrix `[Y; d·I]`, carried out with every entry reduced mod `d`
//! (the implicit `d·I` rows make each reduction a legal row operation).

use super::{gcd, Modulus, ZVec};

/// `P·Y·Q = D` for a generator matrix `Y`; only `D` and `Q` are kept.
#[derive(Debug, Clone)]
pub struct Diagonalization {
    modulus: Modulus,
    n: usize,
    /// Diagonal of `D`, length `n` (entries past the row count are zero).
    diagonal: Vec<u64>,
    /// Accumulated column transform, `q[row][col]`.
    q: Vec<Vec<u64>>,
}

/// Bezout coefficients `(g, x, y)` with `x·a + y·b = g = gcd(a, b)`.
///
/// When `a | b` this returns `(a, 1, 0)` so that the pivot row is untouched,
/// which is what guarantees termination of the elimination loop.
fn bezout(a: u64, b: u64) -> (u64, i128, i128) {
    if b % a == 0 {
        return (a, 1, 0);
    }
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 as u64, s0, t0)
}

impl Diagonalization {
    pub fn of_rows(modulus: Modulus, n: usize, rows: &[ZVec]) -> Self {
        let mut a: Vec<Vec<u64>> = rows.iter().map(|r| r.entries().to_vec()).collect();
        let m = a.len();
        let mut q: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
        let d = modulus.get();

        // row_i <- x row_i + y row_j ; row_j <- u row_i + v row_j
        let combine = |v1: &[u64], v2: &[u64], c: [i128; 4]| -> (Vec<u64>, Vec<u64>) {
            let f = |p: u64, r: u64, x: i128, y: i128| modulus.reduce(x * p as i128 + y * r as i128);
            (
                v1.iter().zip(v2).map(|(&p, &r)| f(p, r, c[0], c[1])).collect(),
                v1.iter().zip(v2).map(|(&p, &r)| f(p, r, c[2], c[3])).collect(),
            )
        };

        for t in 0..m.min(n) {
            // pivot: the nonzero entry generating the largest ideal
            let mut pivot: Option<(usize, usize, u64)> = None;
            for (i, row) in a.iter().enumerate().skip(t) {
                for (j, &e) in row.iter().enumerate().skip(t) {
                    if e != 0 {
                        let g = gcd(e, d);
                        if pivot.map_or(true, |(_, _, best)| g < best) {
                            pivot = Some((i, j, g));
                        }
                    }
                }
            }
            let Some((pi, pj, _)) = pivot else { break };
            a.swap(t, pi);
            if pj != t {
                for row in a.iter_mut().chain(q.iter_mut()) {
                    row.swap(t, pj);
                }
            }

            loop {
                for i in t + 1..m {
                    let b = a[i][t];
                    if b == 0 {
                        continue;
                    }
                    let p = a[t][t];
                    let (g, x, y) = bezout(p, b);
                    let c = [x, y, -((b / g) as i128), (p / g) as i128];
                    let (rt, ri) = combine(&a[t], &a[i], c);
                    a[t] = rt;
                    a[i] = ri;
                }
                for j in t + 1..n {
                    let b = a[t][j];
                    if b == 0 {
                        continue;
                    }
                    let p = a[t][t];
                    let (g, x, y) = bezout(p, b);
                    let c = [x, y, -((b / g) as i128), (p / g) as i128];
                    for row in a.iter_mut().chain(q.iter_mut()) {
                        let (ct, cj) = combine(&[row[t]], &[row[j]], c);
                        row[t] = ct[0];
                        row[j] = cj[0];
                    }
                }
                // column moves only refill column t when a Bezout step had y != 0
                if (t + 1..m).all(|i| a[i][t] == 0) {
                    break;
                }
            }
        }

        let diagonal = (0..n).map(|i| if i < m { a[i][i] } else { 0 }).collect();
        Diagonalization {
            modulus,
            n,
            diagonal,
            q,
        }
    }

    fn orders(&self) -> impl Iterator<Item = u64> + '_ {
        let d = self.modulus.get();
        self.diagonal.iter().map(move |&e| d / gcd(e, d))
    }

    pub fn diagonal(&self) -> &[u64] {
        &self.diagonal
    }

    /// Size of the row span, `Π d / gcd(D_ii, d)`.
    pub fn row_span_size(&self) -> u128 {
        self.orders().map(u128::from).product()
    }

    /// Invariant factors of the row span in divisibility order.
    pub fn row_span_invariant_factors(&self) -> Vec<u64> {
        let mut orders: Vec<u64> = self.orders().filter(|&o| o > 1).collect();
        // (a, b) -> (gcd, lcm) until every factor divides the next
        let k = orders.len();
        for i in 0..k {
            for j in i + 1..k {
                let (a, b) = (orders[i], orders[j]);
                let g = gcd(a, b);
                orders[i] = g;
                orders[j] = a / g * b;
            }
        }
        orders.retain(|&o| o > 1);
        orders
    }

    /// Generators of `{s : Y·s ≡ 0}`; zero generators are dropped.
    pub fn kernel_generators(&self) -> Vec<ZVec> {
        let d = self.modulus.get();
        (0..self.n)
            .filter_map(|i| {
                // D_ii z ≡ 0 (mod d)  <=>  z ∈ (d / gcd(D_ii, d)) Z_d
                let mult = d / gcd(self.diagonal[i], d);
                let entries: Vec<u64> = self.q.iter().map(|row| self.modulus.mul(row[i], mult)).collect();
                let v = ZVec::new(self.modulus, entries).expect("reduced entries");
                (!v.is_zero()).then_some(v)
            })
            .collect()
    }
}

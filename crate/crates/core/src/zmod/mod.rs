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

//! Exact arithmetic over `Z_d` and the module `Z_d^n`.
//!
//! Everything here is integer arithmetic. Subgroup sizes and annihilators are
//! computed from a diagonalization of the generator matrix over `Z_d` (see
//! [`snf`]); [`brute`] holds the enumeration paths used to cross-check them.

pub mod brute;
mod snf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use snf::Diagonalization;

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The modulus `d ≥ 2` of the ring `Z_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(d: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModulus(d));
        }
        Ok(Modulus(d))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    pub fn is_prime(self) -> bool {
        let d = self.0;
        if d < 4 {
            return true;
        }
        if d % 2 == 0 {
            return false;
        }
        let mut p = 3;
        while p * p <= d {
            if d % p == 0 {
                return false;
            }
            p += 2;
        }
        true
    }

    /// `log2(d)` when `d` is a power of two.
    pub fn power_of_two_exponent(self) -> Option<u32> {
        self.0.is_power_of_two().then(|| self.0.trailing_zeros())
    }

    /// `d^n`, or `None` on overflow.
    pub fn pow(self, n: usize) -> Option<u128> {
        let mut acc: u128 = 1;
        for _ in 0..n {
            acc = acc.checked_mul(self.0 as u128)?;
        }
        Some(acc)
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.0 as u128) as u64
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        ((a as u128 + self.0 as u128 - b as u128) % self.0 as u128) as u64
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    /// Reduce a signed integer into `[0, d)`.
    #[inline]
    pub fn reduce(self, v: i128) -> u64 {
        v.rem_euclid(self.0 as i128) as u64
    }
}

impl TryFrom<u64> for Modulus {
    type Error = Error;

    fn try_from(d: u64) -> Result<Self> {
        Modulus::new(d)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.0
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A vector in `Z_d^n` with every entry in `[0, d)`.
///
/// Ordering is lexicographic on the entries (vectors of different moduli are
/// ordered by modulus first). The flattened index of a vector treats entry 0 as
/// the most significant base-`d` digit, which is also the basis-state
/// convention of the statevector simulator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "ZVecRepr", into = "ZVecRepr")]
pub struct ZVec {
    modulus: Modulus,
    entries: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct ZVecRepr {
    d: u64,
    entries: Vec<u64>,
}

impl TryFrom<ZVecRepr> for ZVec {
    type Error = Error;

    fn try_from(r: ZVecRepr) -> Result<Self> {
        ZVec::new(Modulus::new(r.d)?, r.entries)
    }
}

impl From<ZVec> for ZVecRepr {
    fn from(v: ZVec) -> Self {
        ZVecRepr {
            d: v.modulus.get(),
            entries: v.entries,
        }
    }
}

impl ZVec {
    pub fn new(modulus: Modulus, entries: Vec<u64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((position, &value)) = entries.iter().enumerate().find(|(_, &e)| e >= modulus.get()) {
            return Err(Error::EntryOutOfRange {
                position,
                value,
                modulus: modulus.get(),
            });
        }
        Ok(ZVec { modulus, entries })
    }

    /// Shorthand for tests and examples: `ZVec::from_slice(4, &[2, 0, 3, 1])`.
    pub fn from_slice(d: u64, entries: &[u64]) -> Result<Self> {
        ZVec::new(Modulus::new(d)?, entries.to_vec())
    }

    pub fn zeros(modulus: Modulus, n: usize) -> Self {
        assert!(n >= 1, "ZVec length must be at least 1");
        ZVec {
            modulus,
            entries: vec![0; n],
        }
    }

    /// Inverse of [`ZVec::index`]: the vector whose base-`d` digits spell `index`.
    pub fn from_index(modulus: Modulus, n: usize, mut index: usize) -> Self {
        assert!(n >= 1, "ZVec length must be at least 1");
        let d = modulus.get() as usize;
        let mut entries = vec![0u64; n];
        for slot in entries.iter_mut().rev() {
            *slot = (index % d) as u64;
            index /= d;
        }
        ZVec { modulus, entries }
    }

    /// Flattened base-`d` index, entry 0 most significant.
    pub fn index(&self) -> usize {
        let d = self.modulus.get() as usize;
        self.entries.iter().fold(0usize, |acc, &e| acc * d + e as usize)
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    // A ZVec is never empty; provided for clippy's len_without_is_empty.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn check_compatible(&self, other: &ZVec) -> Result<()> {
        if self.modulus != other.modulus || self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "Z_{}^{} vs Z_{}^{}",
                self.modulus,
                self.len(),
                other.modulus,
                other.len()
            )));
        }
        Ok(())
    }

    /// Componentwise `self ⊞ other`.
    pub fn add(&self, other: &ZVec) -> Result<ZVec> {
        self.check_compatible(other)?;
        let m = self.modulus;
        Ok(ZVec {
            modulus: m,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| m.add(a, b))
                .collect(),
        })
    }

    /// Componentwise `self ⊟ other`.
    pub fn sub(&self, other: &ZVec) -> Result<ZVec> {
        self.check_compatible(other)?;
        let m = self.modulus;
        Ok(ZVec {
            modulus: m,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| m.sub(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, k: u64) -> ZVec {
        let m = self.modulus;
        let k = k % m.get();
        ZVec {
            modulus: m,
            entries: self.entries.iter().map(|&e| m.mul(e, k)).collect(),
        }
    }

    /// Reinterpret the entries under another modulus (entries must fit).
    pub fn with_modulus(&self, modulus: Modulus) -> Result<ZVec> {
        ZVec::new(modulus, self.entries.clone())
    }

    /// Compact text form without the modulus prefix, e.g. `2031`.
    pub fn digits(&self) -> String {
        format_digits(self.modulus, &self.entries)
    }

    /// Parse a digit string produced by [`ZVec::digits`].
    pub fn parse_digits(modulus: Modulus, s: &str) -> Result<ZVec> {
        let entries = if modulus.get() <= 36 {
            s.chars()
                .map(|c| {
                    c.to_digit(36)
                        .map(u64::from)
                        .ok_or_else(|| Error::Parse(format!("invalid digit {c:?} in {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u64>()
                        .map_err(|e| Error::Parse(format!("invalid entry {t:?} in {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        ZVec::new(modulus, entries)
    }
}

fn format_digits(modulus: Modulus, entries: &[u64]) -> String {
    if modulus.get() <= 36 {
        entries
            .iter()
            .map(|&e| std::char::from_digit(e as u32, 36).expect("entry below modulus"))
            .collect()
    } else {
        entries.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Compact form `d4:2031`. Moduli above 36 use comma-separated entries,
/// e.g. `d100:3,45,0`.
impl fmt::Display for ZVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}:{}", self.modulus, self.digits())
    }
}

impl FromStr for ZVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rest = s
            .strip_prefix('d')
            .ok_or_else(|| Error::Parse(format!("expected `d<modulus>:<digits>`, got {s:?}")))?;
        let (d, digits) = rest
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing ':' in {s:?}")))?;
        let d: u64 = d
            .parse()
            .map_err(|e| Error::Parse(format!("bad modulus in {s:?}: {e}")))?;
        ZVec::parse_digits(Modulus::new(d)?, digits)
    }
}

/// `Σ x_i y_i mod d`.
pub fn inner_product(x: &ZVec, y: &ZVec) -> Result<u64> {
    x.check_compatible(y)?;
    let m = x.modulus;
    Ok(x.entries
        .iter()
        .zip(&y.entries)
        .fold(0, |acc, (&a, &b)| m.add(acc, m.mul(a, b))))
}

/// Least `k ≥ 1` with `k·s ≡ 0`, i.e. `d / gcd(d, s_1, …, s_n)`.
pub fn order_of(s: &ZVec) -> Result<u64> {
    if s.is_zero() {
        return Err(Error::DegenerateShift);
    }
    let d = s.modulus.get();
    let g = s.entries.iter().fold(d, |g, &e| gcd(g, e));
    Ok(d / g)
}

fn check_all(modulus: Modulus, n: usize, vs: &[ZVec]) -> Result<()> {
    for v in vs {
        if v.modulus != modulus || v.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected Z_{modulus}^{n}, got Z_{}^{}",
                v.modulus,
                v.len()
            )));
        }
    }
    Ok(())
}

/// Cardinality of the subgroup of `Z_d^n` generated by `generators`.
pub fn submodule_size(modulus: Modulus, n: usize, generators: &[ZVec]) -> Result<u128> {
    check_all(modulus, n, generators)?;
    Ok(Diagonalization::of_rows(modulus, n, generators).row_span_size())
}

/// Generators of `{s' : y·s' ≡ 0 (mod d) for every sample y}`.
///
/// With no samples this is a basis of all of `Z_d^n`.
pub fn annihilator(modulus: Modulus, n: usize, samples: &[ZVec]) -> Result<Vec<ZVec>> {
    check_all(modulus, n, samples)?;
    Ok(Diagonalization::of_rows(modulus, n, samples).kernel_generators())
}

/// Invariant factors `o_1 | o_2 | … ` of the subgroup generated by `generators`
/// (trivial factors omitted; empty for the trivial subgroup).
pub fn invariant_factors(modulus: Modulus, n: usize, generators: &[ZVec]) -> Result<Vec<u64>> {
    check_all(modulus, n, generators)?;
    Ok(Diagonalization::of_rows(modulus, n, generators).row_span_invariant_factors())
}

/// Outcome of [`canonical_generator`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CanonicalShift {
    /// The subgroup is cyclic; this is its lexicographically smallest generator.
    Cyclic(ZVec),
    /// The subgroup needs more than one generator.
    NotCyclic { invariant_factors: Vec<u64> },
}

/// Deterministic representative of a cyclic subgroup: the lexicographically
/// smallest element of maximal order.
pub fn canonical_generator(modulus: Modulus, n: usize, generators: &[ZVec]) -> Result<CanonicalShift> {
    let factors = invariant_factors(modulus, n, generators)?;
    match factors.as_slice() {
        [] => Err(Error::DegenerateResult),
        [order] => {
            let elements = brute::closure(modulus, n, generators)?;
            let best = elements
                .into_iter()
                .filter(|v| !v.is_zero() && order_of(v).ok() == Some(*order))
                .min()
                .expect("a cyclic subgroup has a generator");
            Ok(CanonicalShift::Cyclic(best))
        }
        _ => Ok(CanonicalShift::NotCyclic {
            invariant_factors: factors,
        }),
    }
}

/// Samples collected so far, together with the exact size of the subgroup of
/// `Z_d^n` they generate.
///
/// A sample is *informative* when it strictly enlarges that subgroup. For prime
/// `d` this is ordinary linear independence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    modulus: Modulus,
    n: usize,
    samples: Vec<ZVec>,
    // informative samples only; they generate the same subgroup as `samples`
    generators: Vec<ZVec>,
    submodule_size: u128,
}

impl ConstraintSet {
    pub fn new(modulus: Modulus, n: usize) -> Self {
        ConstraintSet {
            modulus,
            n,
            samples: Vec::new(),
            generators: Vec::new(),
            submodule_size: 1,
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[ZVec] {
        &self.samples
    }

    pub fn generators(&self) -> &[ZVec] {
        &self.generators
    }

    pub fn submodule_size(&self) -> u128 {
        self.submodule_size
    }

    /// Returns the extended set and whether `y` was informative.
    pub fn extend(&self, y: ZVec) -> Result<(ConstraintSet, bool)> {
        let mut next = self.clone();
        let informative = next.push(y)?;
        Ok((next, informative))
    }

    /// In-place variant of [`ConstraintSet::extend`].
    pub fn push(&mut self, y: ZVec) -> Result<bool> {
        check_all(self.modulus, self.n, std::slice::from_ref(&y))?;
        let mut gens = self.generators.clone();
        gens.push(y.clone());
        let size = Diagonalization::of_rows(self.modulus, self.n, &gens).row_span_size();
        self.samples.push(y);
        debug_assert!(size >= self.submodule_size);
        if size > self.submodule_size {
            self.generators = gens;
            self.submodule_size = size;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Generators of the set of shifts consistent with every sample.
    pub fn annihilator(&self) -> Vec<ZVec> {
        Diagonalization::of_rows(self.modulus, self.n, &self.generators).kernel_generators()
    }
}

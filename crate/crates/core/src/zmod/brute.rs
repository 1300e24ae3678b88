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

//! Enumeration over `Z_d^n` for small instances (`d^n ≤ 10^6`).
//!
//! These routines share nothing with the diagonalization path and serve as
//! its cross-check.

use std::collections::BTreeSet;

use super::{inner_product, Modulus, ZVec};
use crate::error::{Error, Result};

pub const ENUMERATION_LIMIT: u128 = 1_000_000;

fn space_size(modulus: Modulus, n: usize) -> Result<usize> {
    match modulus.pow(n) {
        Some(size) if size <= ENUMERATION_LIMIT => Ok(size as usize),
        _ => Err(Error::Domain(format!(
            "Z_{modulus}^{n} is too large to enumerate (limit {ENUMERATION_LIMIT})"
        ))),
    }
}

/// Every vector of `Z_d^n` in index order.
pub fn all_vectors(modulus: Modulus, n: usize) -> Result<impl Iterator<Item = ZVec>> {
    let size = space_size(modulus, n)?;
    Ok((0..size).map(move |i| ZVec::from_index(modulus, n, i)))
}

/// The subgroup generated by `generators`, by closure under addition.
pub fn closure(modulus: Modulus, n: usize, generators: &[ZVec]) -> Result<BTreeSet<ZVec>> {
    space_size(modulus, n)?;
    let mut seen = BTreeSet::new();
    let zero = ZVec::zeros(modulus, n);
    seen.insert(zero.clone());
    let mut frontier = vec![zero];
    while let Some(x) = frontier.pop() {
        for g in generators {
            let y = x.add(g)?;
            if seen.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    Ok(seen)
}

/// All `s'` with `y·s' ≡ 0` for every sample `y`.
pub fn annihilator(modulus: Modulus, n: usize, samples: &[ZVec]) -> Result<BTreeSet<ZVec>> {
    let mut out = BTreeSet::new();
    for s in all_vectors(modulus, n)? {
        let mut ok = true;
        for y in samples {
            if inner_product(y, &s)? != 0 {
                ok = false;
                break;
            }
        }
        if ok {
            out.insert(s);
        }
    }
    Ok(out)
}

/// `S^⊥ = {y : y·s ≡ 0}`.
pub fn orthogonal_complement(s: &ZVec) -> Result<BTreeSet<ZVec>> {
    annihilator(s.modulus(), s.len(), std::slice::from_ref(s))
}

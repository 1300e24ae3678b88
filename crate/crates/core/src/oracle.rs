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

//! d-to-one promise oracles as explicit lookup tables.
//!
//! Two kinds of hidden structure are supported:
//!
//! * **cyclic**: `f(x) = f(y)` iff `y = x ⊞ k·s` for some `k ∈ Z_d`, with `s` of
//!   full order `d`. Built by enumerating the `d^{n-1}` orbits of `⟨s⟩`.
//! * **layered**: the lift of a binary Simon oracle to `d = 2^ℓ`. Each input is
//!   unpacked into `ℓ` binary layers, the binary oracle is applied per layer and
//!   the outputs are packed again. Fibers are `{η ⊕_layers δ·s : δ ∈ {0,1}^ℓ}`,
//!   i.e. the same bit pattern `c` XORed into every coordinate where `s_j = 1`.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{AmplitudeBudget, SiteTransform};
use crate::zmod::{brute::ENUMERATION_LIMIT, inner_product, order_of, Modulus, ZVec};

/// Hidden structure recorded alongside an oracle table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    Cyclic {
        shift: ZVec,
    },
    /// `shift` is the binary hidden string; `d = 2^layers`.
    Layered {
        shift: ZVec,
        layers: u32,
    },
}

/// How orbit indices are mapped to output values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputAssignment {
    /// A seeded random injection into `Z_d^n`.
    #[default]
    Random,
    /// Each orbit outputs its lexicographically smallest member.
    Canonical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromiseOracle {
    modulus: Modulus,
    n: usize,
    table: Vec<usize>,
    structure: Structure,
}

impl PromiseOracle {
    /// Assembles an oracle from a raw table, checking shapes and the structure
    /// metadata but not the promise itself (see [`verify_promise`]).
    pub fn from_parts(modulus: Modulus, n: usize, table: Vec<usize>, structure: Structure) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("oracle needs n >= 1".into()));
        }
        let size = modulus
            .pow(n)
            .filter(|&s| s <= usize::MAX as u128)
            .ok_or_else(|| Error::Domain(format!("Z_{modulus}^{n} does not fit in memory")))?
            as usize;
        if table.len() != size {
            return Err(Error::MalformedOracle(format!(
                "table has {} entries, expected d^n = {size}",
                table.len()
            )));
        }
        if let Some((i, &v)) = table.iter().enumerate().find(|(_, &v)| v >= size) {
            return Err(Error::MalformedOracle(format!("table[{i}] = {v} is outside Z_d^n")));
        }
        match &structure {
            Structure::Cyclic { shift } => {
                if shift.modulus() != modulus || shift.len() != n {
                    return Err(Error::MalformedOracle(format!(
                        "cyclic shift {shift} does not live in Z_{modulus}^{n}"
                    )));
                }
                let order = order_of(shift)?;
                if order != modulus.get() {
                    return Err(Error::UnsupportedShift {
                        order,
                        modulus: modulus.get(),
                    });
                }
            }
            Structure::Layered { shift, layers } => {
                if shift.modulus().get() != 2 || shift.len() != n {
                    return Err(Error::MalformedOracle(format!(
                        "layered shift {shift} must be a binary vector of length {n}"
                    )));
                }
                if shift.is_zero() {
                    return Err(Error::DegenerateShift);
                }
                if modulus.power_of_two_exponent() != Some(*layers) {
                    return Err(Error::MalformedOracle(format!(
                        "layered oracle with {layers} layers must have d = 2^{layers}, got {modulus}"
                    )));
                }
            }
        }
        Ok(PromiseOracle {
            modulus,
            n,
            table,
            structure,
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `table[x.index()] = f(x).index()`.
    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn shift(&self) -> &ZVec {
        match &self.structure {
            Structure::Cyclic { shift } | Structure::Layered { shift, .. } => shift,
        }
    }

    pub fn eval(&self, x: &ZVec) -> ZVec {
        ZVec::from_index(self.modulus, self.n, self.table[x.index()])
    }

    /// Site transform whose Fourier duality matches the hidden structure.
    pub fn site_transform(&self) -> SiteTransform {
        match self.structure {
            Structure::Cyclic { .. } => SiteTransform::Fourier,
            Structure::Layered { .. } => SiteTransform::LayerHadamard,
        }
    }

    /// Applies the `k`-th element of the hidden group to `x`: `x ⊞ k·s` for
    /// cyclic oracles, `x` with the bit pattern `k` XORed into every coordinate
    /// where `s_j = 1` for layered ones.
    pub fn act(&self, x: &ZVec, k: u64) -> ZVec {
        let entries = match &self.structure {
            Structure::Cyclic { shift } => x
                .entries()
                .iter()
                .zip(shift.entries())
                .map(|(&a, &b)| self.modulus.add(a, self.modulus.mul(k, b)))
                .collect(),
            Structure::Layered { shift, .. } => x
                .entries()
                .iter()
                .zip(shift.entries())
                .map(|(&a, &b)| if b == 1 { a ^ k } else { a })
                .collect(),
        };
        ZVec::new(self.modulus, entries).expect("group action stays in range")
    }

    /// The structural orbit `{act(x, k) : k ∈ 0..d}`.
    pub fn orbit(&self, x: &ZVec) -> BTreeSet<ZVec> {
        (0..self.modulus.get()).map(|k| self.act(x, k)).collect()
    }

    /// Whether a measured sample satisfies the constraint implied by the hidden
    /// structure: `y·s ≡ 0 (mod d)` (cyclic) or every binary layer of `y`
    /// orthogonal to `s` mod 2 (layered).
    pub fn is_orthogonal(&self, y: &ZVec) -> bool {
        match &self.structure {
            Structure::Cyclic { shift } => inner_product(y, shift).map(|v| v == 0).unwrap_or(false),
            Structure::Layered { shift, layers } => match unpack(y, *layers) {
                Ok(ls) => ls
                    .iter()
                    .all(|l| inner_product(l, shift).map(|v| v == 0).unwrap_or(false)),
                Err(_) => false,
            },
        }
    }

    /// Number of distinct output values.
    pub fn image_size(&self) -> usize {
        self.table.iter().collect::<BTreeSet<_>>().len()
    }
}

/// `{y : f(y) = f(x)}`, found by scanning the table.
pub fn orbit_of(f: &PromiseOracle, x: &ZVec) -> Result<BTreeSet<ZVec>> {
    if x.modulus() != f.modulus || x.len() != f.n {
        return Err(Error::DimensionMismatch(format!(
            "{x} is not in the domain Z_{}^{}",
            f.modulus, f.n
        )));
    }
    let target = f.table[x.index()];
    Ok(f.table
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v == target)
        .map(|(i, _)| ZVec::from_index(f.modulus, f.n, i))
        .collect())
}

/// Builds a cyclic-shift oracle from the coset decomposition of `⟨s⟩`.
///
/// Orbits are discovered in index order, so each orbit's first member is also
/// its lexicographically smallest.
pub fn build_native_oracle<R: Rng + ?Sized>(
    s: &ZVec,
    rng: &mut R,
    assignment: OutputAssignment,
    budget: AmplitudeBudget,
) -> Result<PromiseOracle> {
    let modulus = s.modulus();
    let n = s.len();
    let order = order_of(s)?;
    if order != modulus.get() {
        return Err(Error::UnsupportedShift {
            order,
            modulus: modulus.get(),
        });
    }
    let size = budget.admit(modulus, n)?;
    let d = modulus.get();
    let orbit_count = size / d as usize;

    let outputs: Vec<usize> = match assignment {
        OutputAssignment::Random => rand::seq::index::sample(rng, size, orbit_count).into_vec(),
        OutputAssignment::Canonical => Vec::new(),
    };

    const UNSET: usize = usize::MAX;
    let mut table = vec![UNSET; size];
    let mut orbit_index = 0;
    for rep in 0..size {
        if table[rep] != UNSET {
            continue;
        }
        let value = match assignment {
            OutputAssignment::Random => outputs[orbit_index],
            OutputAssignment::Canonical => rep,
        };
        let mut x = ZVec::from_index(modulus, n, rep);
        for _ in 0..d {
            table[x.index()] = value;
            x = x.add(s)?;
        }
        orbit_index += 1;
    }
    debug_assert_eq!(orbit_index, orbit_count);
    PromiseOracle::from_parts(modulus, n, table, Structure::Cyclic { shift: s.clone() })
}

/// A binary Simon oracle `f : Z_2^n → Z_2^n` with `f(x) = f(y) ⟺ y ∈ {x, x ⊕ s}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryOracle {
    n: usize,
    table: Vec<usize>,
    shift: ZVec,
}

impl BinaryOracle {
    /// Checks that `table` is exactly two-to-one with hidden string `shift`.
    pub fn new(n: usize, table: Vec<usize>, shift: ZVec) -> Result<Self> {
        let oracle = PromiseOracle::from_parts(Modulus::new(2)?, n, table, Structure::Cyclic { shift })?;
        oracle.try_into()
    }

    pub fn random<R: Rng + ?Sized>(shift: &ZVec, rng: &mut R, assignment: OutputAssignment) -> Result<Self> {
        if shift.modulus().get() != 2 {
            return Err(Error::Domain(format!("binary oracle needs a Z_2 shift, got {shift}")));
        }
        build_native_oracle(shift, rng, assignment, AmplitudeBudget::default())?.try_into()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> &ZVec {
        &self.shift
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// `f` on a bit pattern, bit `n-1-j` holding coordinate `j`.
    pub fn eval_bits(&self, x: usize) -> usize {
        self.table[x]
    }
}

impl TryFrom<PromiseOracle> for BinaryOracle {
    type Error = Error;

    fn try_from(f: PromiseOracle) -> Result<Self> {
        if f.modulus.get() != 2 || !matches!(f.structure, Structure::Cyclic { .. }) {
            return Err(Error::MalformedOracle(format!(
                "a binary oracle must be a cyclic oracle over Z_2, got d={}",
                f.modulus
            )));
        }
        let report = verify_promise(&f);
        if let PromiseStatus::Violated(v) = report.status {
            return Err(Error::MalformedOracle(format!("binary promise violated: {v}")));
        }
        let shift = f.shift().clone();
        Ok(BinaryOracle {
            n: f.n,
            table: f.table,
            shift,
        })
    }
}

impl From<BinaryOracle> for PromiseOracle {
    fn from(b: BinaryOracle) -> Self {
        PromiseOracle {
            modulus: Modulus::new(2).expect("2 is a modulus"),
            n: b.n,
            table: b.table,
            structure: Structure::Cyclic { shift: b.shift },
        }
    }
}

fn layer_modulus(layers: u32) -> Result<Modulus> {
    if layers == 0 || layers >= 63 {
        return Err(Error::Encoding(format!("layer count must be in 1..63, got {layers}")));
    }
    Modulus::new(1u64 << layers)
}

/// `η_j = Σ_t 2^t · layer_t[j]`.
pub fn pack(layers: &[ZVec]) -> Result<ZVec> {
    let Some(first) = layers.first() else {
        return Err(Error::Encoding("pack needs at least one layer".into()));
    };
    let n = first.len();
    for (t, l) in layers.iter().enumerate() {
        if l.modulus().get() != 2 || l.len() != n {
            return Err(Error::Encoding(format!(
                "layer {t} is in Z_{}^{}, expected Z_2^{n}",
                l.modulus(),
                l.len()
            )));
        }
    }
    let modulus = layer_modulus(layers.len() as u32)?;
    let entries = (0..n)
        .map(|j| {
            layers
                .iter()
                .enumerate()
                .fold(0u64, |acc, (t, l)| acc | (l.entries()[j] << t))
        })
        .collect();
    ZVec::new(modulus, entries)
}

/// Binary layers of `η ∈ Z_{2^ℓ}^n`: layer `t` holds bit `t` of each entry.
pub fn unpack(eta: &ZVec, layers: u32) -> Result<Vec<ZVec>> {
    let modulus = layer_modulus(layers)?;
    if eta.modulus() != modulus {
        return Err(Error::Encoding(format!(
            "cannot unpack Z_{} into {layers} binary layers (need modulus {modulus})",
            eta.modulus()
        )));
    }
    let two = Modulus::new(2)?;
    Ok((0..layers)
        .map(|t| {
            let bits = eta.entries().iter().map(|&e| (e >> t) & 1).collect();
            ZVec::new(two, bits).expect("bits are binary")
        })
        .collect())
}

/// `f_(d)(η) = pack(f(X^(0)(η)), …, f(X^(ℓ-1)(η)))` with `d = 2^ℓ`.
pub fn lift_binary_oracle(f: &BinaryOracle, layers: u32, budget: AmplitudeBudget) -> Result<PromiseOracle> {
    let modulus = layer_modulus(layers)?;
    let n = f.n;
    let size = budget.admit(modulus, n)?;
    let d = modulus.get() as usize;
    let mut table = Vec::with_capacity(size);
    let mut digits = vec![0usize; n];
    for eta in 0..size {
        let mut r = eta;
        for slot in digits.iter_mut().rev() {
            *slot = r % d;
            r /= d;
        }
        let mut out = vec![0usize; n];
        for t in 0..layers as usize {
            let layer = digits.iter().fold(0usize, |acc, &e| (acc << 1) | ((e >> t) & 1));
            let image = f.eval_bits(layer);
            for (j, o) in out.iter_mut().enumerate() {
                *o |= ((image >> (n - 1 - j)) & 1) << t;
            }
        }
        table.push(out.iter().fold(0usize, |acc, &o| acc * d + o));
    }
    PromiseOracle::from_parts(
        modulus,
        n,
        table,
        Structure::Layered {
            shift: f.shift.clone(),
            layers,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `y` is in the hidden orbit of `x` but `f(x) ≠ f(y)`.
    MissingCollision,
    /// `f(x) = f(y)` although `y` is outside the hidden orbit of `x`.
    ExtraCollision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub x: ZVec,
    pub y: ZVec,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ViolationKind::MissingCollision => write!(f, "f({}) != f({}) although they share an orbit", self.x, self.y),
            ViolationKind::ExtraCollision => write!(f, "f({}) == f({}) although their orbits differ", self.x, self.y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PromiseStatus {
    Pass,
    Violated(Violation),
    /// `d^n` exceeds the exhaustive-check limit of 10^6.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromiseReport {
    #[serde(flatten)]
    pub status: PromiseStatus,
    /// Number of distinct outputs.
    pub fibers: usize,
    /// Common fiber size, if all fibers have the same size.
    pub fiber_size: Option<usize>,
}

impl PromiseReport {
    pub fn passed(&self) -> bool {
        self.status == PromiseStatus::Pass
    }
}

/// Exhaustive check of both directions of the promise against the oracle's
/// structure metadata.
pub fn verify_promise(f: &PromiseOracle) -> PromiseReport {
    let mut fiber_sizes: HashMap<usize, usize> = HashMap::new();
    for &v in &f.table {
        *fiber_sizes.entry(v).or_default() += 1;
    }
    let fibers = fiber_sizes.len();
    let mut sizes = fiber_sizes.values().copied();
    let first = sizes.next();
    let fiber_size = first.filter(|&s| sizes.all(|t| t == s));
    let report = |status| PromiseReport {
        status,
        fibers,
        fiber_size,
    };

    if f.table.len() as u128 > ENUMERATION_LIMIT {
        return report(PromiseStatus::Skipped);
    }

    // orbit ⊆ fiber
    for (i, &fx) in f.table.iter().enumerate() {
        let x = ZVec::from_index(f.modulus, f.n, i);
        for k in 1..f.modulus.get() {
            let y = f.act(&x, k);
            if f.table[y.index()] != fx {
                return report(PromiseStatus::Violated(Violation {
                    kind: ViolationKind::MissingCollision,
                    x,
                    y,
                }));
            }
        }
    }

    // fiber ⊆ orbit: with the first direction holding, any fiber larger than d
    // must contain two inputs from different orbits
    let d = f.modulus.get() as usize;
    let mut first_in_fiber: HashMap<usize, usize> = HashMap::new();
    for (i, &fx) in f.table.iter().enumerate() {
        if fiber_sizes[&fx] <= d {
            continue;
        }
        match first_in_fiber.get(&fx) {
            None => {
                first_in_fiber.insert(fx, i);
            }
            Some(&j) => {
                let x = ZVec::from_index(f.modulus, f.n, j);
                let y = ZVec::from_index(f.modulus, f.n, i);
                if !f.orbit(&x).contains(&y) {
                    return report(PromiseStatus::Violated(Violation {
                        kind: ViolationKind::ExtraCollision,
                        x,
                        y,
                    }));
                }
            }
        }
    }
    report(PromiseStatus::Pass)
}

/// On-disk oracle format.
///
/// ```json
/// {"d": 4, "n": 2, "structure": {"kind": "cyclic", "s": "d4:01"},
///  "table": ["00", "00", "00", "00", "31", …]}
/// ```
///
/// `table[i]` is `f(x)` as a base-`d` digit string, `i` the flattened index of `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleFile {
    pub d: u64,
    pub n: usize,
    pub structure: StructureFile,
    pub table: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StructureFile {
    Cyclic { s: String },
    Layered { s: String, l: u32 },
}

impl From<&PromiseOracle> for OracleFile {
    fn from(f: &PromiseOracle) -> Self {
        let structure = match &f.structure {
            Structure::Cyclic { shift } => StructureFile::Cyclic { s: shift.to_string() },
            Structure::Layered { shift, layers } => StructureFile::Layered {
                s: shift.to_string(),
                l: *layers,
            },
        };
        OracleFile {
            d: f.modulus.get(),
            n: f.n,
            structure,
            table: f
                .table
                .iter()
                .map(|&v| ZVec::from_index(f.modulus, f.n, v).digits())
                .collect(),
        }
    }
}

impl OracleFile {
    pub fn into_oracle(self) -> Result<PromiseOracle> {
        let modulus = Modulus::new(self.d).map_err(|e| Error::Parse(format!("field `d`: {e}")))?;
        let parse_shift = |s: &str| -> Result<ZVec> {
            s.parse::<ZVec>()
                .map_err(|e| Error::Parse(format!("field `structure.s`: {e}")))
        };
        let structure = match &self.structure {
            StructureFile::Cyclic { s } => Structure::Cyclic { shift: parse_shift(s)? },
            StructureFile::Layered { s, l } => Structure::Layered {
                shift: parse_shift(s)?,
                layers: *l,
            },
        };
        let n = self.n;
        let table = self
            .table
            .iter()
            .enumerate()
            .map(|(i, digits)| {
                let v = ZVec::parse_digits(modulus, digits)
                    .map_err(|e| Error::Parse(format!("field `table[{i}]`: {e}")))?;
                if v.len() != n {
                    return Err(Error::Parse(format!(
                        "field `table[{i}]`: {digits:?} has {} digits, expected {n}",
                        v.len()
                    )));
                }
                Ok(v.index())
            })
            .collect::<Result<Vec<_>>>()?;
        PromiseOracle::from_parts(modulus, n, table, structure)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("oracle file serializes")
    }

    /// Parses JSON; errors carry serde's line/column context.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("oracle file: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::brute;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(d: u64, e: &[u64]) -> ZVec {
        ZVec::from_slice(d, e).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn native(d: u64, s: &[u64]) -> PromiseOracle {
        build_native_oracle(
            &v(d, s),
            &mut rng(),
            OutputAssignment::Random,
            AmplitudeBudget::default(),
        )
        .unwrap()
    }

    fn lifted(s: &[u64], layers: u32) -> PromiseOracle {
        let b = BinaryOracle::random(&v(2, s), &mut rng(), OutputAssignment::Random).unwrap();
        lift_binary_oracle(&b, layers, AmplitudeBudget::default()).unwrap()
    }

    #[test]
    fn native_orbit_counts() {
        let f = native(2, &[1, 1]);
        assert_eq!(f.image_size(), 2);
        assert_eq!(
            orbit_of(&f, &v(2, &[0, 0])).unwrap(),
            [v(2, &[0, 0]), v(2, &[1, 1])].into_iter().collect()
        );
        assert_eq!(
            orbit_of(&f, &v(2, &[0, 1])).unwrap(),
            [v(2, &[0, 1]), v(2, &[1, 0])].into_iter().collect()
        );

        let f = native(4, &[2, 0, 3, 1]);
        assert_eq!(f.image_size(), 64);
        let r = verify_promise(&f);
        assert!(r.passed());
        assert_eq!((r.fibers, r.fiber_size), (64, Some(4)));

        let f = native(3, &[1]);
        assert_eq!(f.image_size(), 1);
        assert!(verify_promise(&f).passed());
    }

    #[test]
    fn native_rejects_low_order() {
        let err = build_native_oracle(
            &v(4, &[2, 0]),
            &mut rng(),
            OutputAssignment::Random,
            AmplitudeBudget::default(),
        );
        assert!(matches!(err, Err(Error::UnsupportedShift { order: 2, modulus: 4 })));
        let err = build_native_oracle(
            &v(4, &[0, 0]),
            &mut rng(),
            OutputAssignment::Random,
            AmplitudeBudget::default(),
        );
        assert!(matches!(err, Err(Error::DegenerateShift)));
    }

    #[test]
    fn native_respects_budget() {
        let err = build_native_oracle(
            &v(4, &[1, 0, 0]),
            &mut rng(),
            OutputAssignment::Random,
            AmplitudeBudget::new(16),
        );
        assert!(matches!(
            err,
            Err(Error::Capacity {
                required: 64,
                budget: 16
            })
        ));
    }

    #[test]
    fn canonical_outputs_orbit_minimum() {
        let f = build_native_oracle(
            &v(4, &[0, 1]),
            &mut rng(),
            OutputAssignment::Canonical,
            AmplitudeBudget::default(),
        )
        .unwrap();
        assert_eq!(f.eval(&v(4, &[3, 2])), v(4, &[3, 0]));
        assert_eq!(f.eval(&v(4, &[1, 3])), v(4, &[1, 0]));
    }

    #[test]
    fn same_seed_same_oracle() {
        assert_eq!(native(4, &[1, 2, 3]), native(4, &[1, 2, 3]));
    }

    #[test]
    fn corrupted_entry_is_reported() {
        let f = native(4, &[0, 1]);
        let mut table = f.table().to_vec();
        // send x = 21 into the fiber of 00
        let x = v(4, &[2, 1]);
        table[x.index()] = table[0];
        let bad = PromiseOracle::from_parts(f.modulus(), 2, table, f.structure().clone()).unwrap();
        let r = verify_promise(&bad);
        match r.status {
            PromiseStatus::Violated(Violation {
                kind: ViolationKind::MissingCollision,
                x: a,
                y: b,
            }) => {
                assert!(a == x || b == x, "pair {a} {b} should involve {x}");
            }
            other => panic!("expected a missing collision, got {other:?}"),
        }
    }

    #[test]
    fn merged_fibers_are_extra_collisions() {
        let f = native(2, &[1, 0]);
        // collapse everything to one output: orbits hold, fibers are too large
        let table = vec![0; 4];
        let bad = PromiseOracle::from_parts(f.modulus(), 2, table, f.structure().clone()).unwrap();
        let r = verify_promise(&bad);
        assert!(matches!(
            r.status,
            PromiseStatus::Violated(Violation {
                kind: ViolationKind::ExtraCollision,
                ..
            })
        ));
        assert_eq!(r.fibers, 1);
    }

    #[test]
    fn pack_examples() {
        assert_eq!(pack(&[v(2, &[1, 0]), v(2, &[0, 1])]).unwrap(), v(4, &[1, 2]));
        assert_eq!(pack(&[v(2, &[0, 0]), v(2, &[0, 0])]).unwrap(), v(4, &[0, 0]));
        assert_eq!(pack(&[v(2, &[1, 1]), v(2, &[1, 1])]).unwrap(), v(4, &[3, 3]));
        assert!(pack(&[]).is_err());
        assert!(pack(&[v(2, &[1, 1]), v(2, &[1])]).is_err());
        assert!(pack(&[v(3, &[1, 1])]).is_err());
    }

    #[test]
    fn unpack_examples() {
        assert_eq!(unpack(&v(4, &[3, 1]), 2).unwrap(), vec![v(2, &[1, 1]), v(2, &[1, 0])]);
        assert_eq!(unpack(&v(4, &[0, 0]), 2).unwrap(), vec![v(2, &[0, 0]), v(2, &[0, 0])]);
        assert!(matches!(unpack(&v(6, &[3, 1]), 2), Err(Error::Encoding(_))));
        assert!(matches!(unpack(&v(4, &[3, 1]), 3), Err(Error::Encoding(_))));
    }

    #[test]
    fn pack_unpack_bijection() {
        for layers in 1..=2u32 {
            let m = Modulus::new(1 << layers).unwrap();
            for n in 1..=4 {
                let mut seen = BTreeSet::new();
                for eta in brute::all_vectors(m, n).unwrap() {
                    let ls = unpack(&eta, layers).unwrap();
                    assert_eq!(pack(&ls).unwrap(), eta);
                    assert!(seen.insert(ls));
                }
                assert_eq!(seen.len() as u128, m.pow(n).unwrap());
            }
        }
    }

    #[test]
    fn single_layer_lift_is_identity() {
        let b = BinaryOracle::random(&v(2, &[1, 0, 1]), &mut rng(), OutputAssignment::Random).unwrap();
        let f = lift_binary_oracle(&b, 1, AmplitudeBudget::default()).unwrap();
        assert_eq!(f.table(), b.table());
        assert_eq!(f.modulus().get(), 2);
    }

    #[test]
    fn lifted_fibers_follow_layer_toggles() {
        for layers in 1..=2u32 {
            for n in 1..=4usize {
                let two = Modulus::new(2).unwrap();
                for s in brute::all_vectors(two, n).unwrap().filter(|s| !s.is_zero()) {
                    let b = BinaryOracle::random(&s, &mut rng(), OutputAssignment::Random).unwrap();
                    let f = lift_binary_oracle(&b, layers, AmplitudeBudget::default()).unwrap();
                    let d = 1usize << layers;
                    for eta in brute::all_vectors(f.modulus(), n).unwrap() {
                        // explicit layer toggles: X^(t)(η) ⊕ δ_t s, repacked
                        let ls = unpack(&eta, layers).unwrap();
                        let mut expected = BTreeSet::new();
                        for delta in 0..d {
                            let toggled: Vec<ZVec> = ls
                                .iter()
                                .enumerate()
                                .map(|(t, l)| {
                                    if delta >> t & 1 == 1 {
                                        l.add(&s).unwrap()
                                    } else {
                                        l.clone()
                                    }
                                })
                                .collect();
                            let moved = pack(&toggled).unwrap();
                            assert_eq!(f.eval(&moved), f.eval(&eta));
                            expected.insert(moved);
                        }
                        assert_eq!(orbit_of(&f, &eta).unwrap(), expected);
                    }
                    let r = verify_promise(&f);
                    assert!(r.passed(), "{r:?}");
                    assert_eq!(r.fiber_size, Some(d));
                    assert_eq!(f.image_size(), d.pow(n as u32 - 1));
                }
            }
        }
    }

    #[test]
    fn lifted_fiber_through_zero() {
        let f = lifted(&[0, 1, 0, 1], 2);
        let fiber = orbit_of(&f, &v(4, &[0, 0, 0, 0])).unwrap();
        let expect: BTreeSet<_> = (0..4).map(|k| v(4, &[0, k, 0, k])).collect();
        assert_eq!(fiber, expect);
        let r = verify_promise(&f);
        assert!(r.passed());
        assert_eq!(r.fiber_size, Some(4));
    }

    #[test]
    fn lifted_fiber_is_xor_not_additive() {
        // (x1, x2 ⊞ k, x3, x4 ⊞ k) is only the fiber when x2 ≡ x4 (mod 2)
        let f = lifted(&[0, 1, 0, 1], 2);
        let eta = v(4, &[0, 0, 0, 1]);
        let fiber = orbit_of(&f, &eta).unwrap();
        let xor: BTreeSet<_> = (0..4).map(|c| v(4, &[0, c, 0, 1 ^ c])).collect();
        let additive: BTreeSet<_> = (0..4).map(|k| v(4, &[0, k, 0, (1 + k) % 4])).collect();
        assert_eq!(fiber, xor);
        assert_ne!(fiber, additive);
        let eta = v(4, &[1, 3, 2, 1]);
        let additive: BTreeSet<_> = (0..4).map(|k| v(4, &[1, (3 + k) % 4, 2, (1 + k) % 4])).collect();
        assert_eq!(orbit_of(&f, &eta).unwrap(), additive);
    }

    #[test]
    fn cyclic_orbit_of_worked_example() {
        let f = native(4, &[0, 1]);
        let expect: BTreeSet<_> = (0..4).map(|k| v(4, &[3, k])).collect();
        assert_eq!(orbit_of(&f, &v(4, &[3, 0])).unwrap(), expect);
        assert!(orbit_of(&f, &v(4, &[3, 0, 0])).is_err());
    }

    #[test]
    fn binary_oracle_validation() {
        let s = v(2, &[1, 1]);
        assert!(BinaryOracle::new(2, vec![0, 1, 1, 0], s.clone()).is_ok());
        assert!(BinaryOracle::new(2, vec![0, 1, 2, 0], s.clone()).is_err());
        assert!(BinaryOracle::new(2, vec![0, 0, 0, 0], s).is_err());
    }

    #[test]
    fn oracle_file_round_trip() {
        for f in [native(4, &[2, 0, 3, 1]), lifted(&[0, 1, 1], 2)] {
            let file = OracleFile::from(&f);
            let text = file.to_json();
            let back = OracleFile::from_json(&text).unwrap().into_oracle().unwrap();
            assert_eq!(back, f);
        }
        let file = OracleFile::from(&native(4, &[0, 1]));
        let text = file.to_json();
        assert!(text.contains(r#""kind": "cyclic""#));
        assert!(text.contains(r#""s": "d4:01""#));
    }

    #[test]
    fn oracle_file_errors_carry_context() {
        let mut file = OracleFile::from(&native(4, &[0, 1]));
        file.table[5] = "4".into();
        let err = file.clone().into_oracle().unwrap_err().to_string();
        assert!(err.contains("table[5]"), "{err}");
        let err = OracleFile::from_json("{\n  \"d\": 4,\n  \"n\": }")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}

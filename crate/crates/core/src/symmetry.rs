//! Coordinate groups, permutation parity, multiplicity vectors and the
//! (anti-)symmetrizers acting on sparse coefficient vectors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{rational_to_f64, Real};

/// Largest group for which permutations are enumerated explicitly.
pub const MAX_PERMUTATION_GROUP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Symmetric,
    Antisymmetric,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Symmetric => "symmetric",
            GroupKind::Antisymmetric => "antisymmetric",
        })
    }
}

/// A set of coordinates (0-based, sorted) sharing one kind of symmetry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Group {
    pub coords: Vec<usize>,
    pub kind: GroupKind,
}

impl Group {
    pub fn size(&self) -> usize {
        self.coords.len()
    }
}

/// How a block of coordinates constrains canonical indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// Non-decreasing entries.
    Symmetric,
    /// Strictly increasing entries.
    Antisymmetric,
    /// A single unconstrained coordinate.
    Free,
}

/// A group or a free coordinate, as seen by the enumeration code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub coords: Vec<usize>,
}

/// Dimension `d` together with disjoint coordinate groups. Coordinates not
/// covered by any group are free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryStructure {
    d: usize,
    groups: Vec<Group>,
}

impl SymmetryStructure {
    /// Validates and normalizes the groups: coordinates are 0-based, groups
    /// are sorted internally and ordered by their smallest coordinate.
    pub fn new(d: usize, groups: Vec<(Vec<usize>, GroupKind)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidStructure("dimension must be at least 1".into()));
        }
        let mut seen = vec![false; d];
        let mut out = Vec::with_capacity(groups.len());
        for (mut coords, kind) in groups {
            if coords.is_empty() {
                return Err(Error::InvalidStructure("empty group".into()));
            }
            coords.sort_unstable();
            for &c in &coords {
                if c >= d {
                    return Err(Error::InvalidStructure(format!(
                        "coordinate {} outside 1..={d}",
                        c + 1
                    )));
                }
                if seen[c] {
                    return Err(Error::InvalidStructure(format!(
                        "coordinate {} appears in more than one group",
                        c + 1
                    )));
                }
                seen[c] = true;
            }
            out.push(Group { coords, kind });
        }
        out.sort_by_key(|g| g.coords[0]);
        Ok(SymmetryStructure { d, groups: out })
    }

    /// One group holding every coordinate.
    pub fn full(kind: GroupKind, d: usize) -> Result<Self> {
        Self::new(d, vec![((0..d).collect(), kind)])
    }

    /// No symmetry constraints at all.
    pub fn entire(d: usize) -> Result<Self> {
        Self::new(d, Vec::new())
    }

    /// Leading contiguous groups of the given sizes followed by free
    /// coordinates.
    pub fn contiguous(d: usize, groups: &[(usize, GroupKind)]) -> Result<Self> {
        let mut start = 0;
        let mut spec = Vec::with_capacity(groups.len());
        for &(size, kind) in groups {
            spec.push(((start..start + size).collect(), kind));
            start += size;
        }
        Self::new(d, spec)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Number of coordinates outside every group (`b_d`).
    pub fn free_count(&self) -> usize {
        self.d - self.groups.iter().map(Group::size).sum::<usize>()
    }

    /// Sizes of the groups of the given kind.
    pub fn group_sizes(&self, kind: GroupKind) -> Vec<usize> {
        self.groups.iter().filter(|g| g.kind == kind).map(Group::size).collect()
    }

    /// Whether a single group of the given kind covers all coordinates.
    pub fn is_fully(&self, kind: GroupKind) -> bool {
        match self.groups.as_slice() {
            [g] => g.size() == self.d && (g.kind == kind || self.d == 1),
            [] => self.d == 1,
            _ => false,
        }
    }

    /// Whether every group is a singleton, so no constraint is imposed.
    pub fn is_entire(&self) -> bool {
        self.groups.iter().all(|g| g.size() == 1)
    }

    /// Blocks ordered by smallest coordinate. Singleton groups are free.
    pub fn blocks(&self) -> Vec<Block> {
        let mut blocks: Vec<Block> = self
            .groups
            .iter()
            .map(|g| {
                let kind = match (g.size(), g.kind) {
                    (1, _) => BlockKind::Free,
                    (_, GroupKind::Symmetric) => BlockKind::Symmetric,
                    (_, GroupKind::Antisymmetric) => BlockKind::Antisymmetric,
                };
                Block { kind, coords: g.coords.clone() }
            })
            .collect();
        let mut covered = vec![false; self.d];
        for g in &self.groups {
            for &c in &g.coords {
                covered[c] = true;
            }
        }
        blocks.extend(
            (0..self.d)
                .filter(|&c| !covered[c])
                .map(|c| Block { kind: BlockKind::Free, coords: vec![c] }),
        );
        blocks.sort_by_key(|b| b.coords[0]);
        blocks
    }

    /// Checks that `k` belongs to the canonical index set: entries are
    /// positive, non-decreasing within symmetric groups and strictly
    /// increasing within antisymmetric groups.
    pub fn check_canonical(&self, k: &MultiIndex) -> Result<()> {
        let bad = |reason: String| Error::InvalidCanonicalIndex { index: k.0.clone(), reason };
        if k.len() != self.d {
            return Err(bad(format!("expected {} entries", self.d)));
        }
        if k.0.contains(&0) {
            return Err(bad("entries are 1-based".into()));
        }
        for g in &self.groups {
            for w in g.coords.windows(2) {
                let (a, b) = (k.0[w[0]], k.0[w[1]]);
                match g.kind {
                    GroupKind::Symmetric if a > b => {
                        return Err(bad(format!(
                            "symmetric group needs non-decreasing entries at coordinates {} and {}",
                            w[0] + 1,
                            w[1] + 1
                        )))
                    }
                    GroupKind::Antisymmetric if a >= b => {
                        return Err(bad(format!(
                            "antisymmetric group needs strictly increasing entries at coordinates {} and {}",
                            w[0] + 1,
                            w[1] + 1
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn is_canonical(&self, k: &MultiIndex) -> bool {
        self.check_canonical(k).is_ok()
    }

    /// `M_I(j)` for the given group: how often each distinct value occurs
    /// among the group's entries, sorted non-increasingly and zero-padded.
    pub fn multiplicity_vector(&self, group: usize, j: &MultiIndex) -> Result<Vec<usize>> {
        let g = self.group(group)?;
        if j.len() != self.d {
            return Err(Error::InvalidArgument(format!("index has {} entries, expected {}", j.len(), self.d)));
        }
        Ok(multiplicities(g.coords.iter().map(|&c| j.0[c])))
    }

    fn group(&self, group: usize) -> Result<&Group> {
        self.groups
            .get(group)
            .ok_or_else(|| Error::InvalidArgument(format!("no group with id {group}")))
    }

    /// Applies the symmetrizer or antisymmetrizer of one group's
    /// coordinates to a coefficient vector.
    pub fn project<T: Real>(
        &self,
        group: usize,
        kind: GroupKind,
        coeffs: &SparseCoefficients<T>,
    ) -> Result<SparseCoefficients<T>> {
        let g = self.group(group)?;
        project_coords(&g.coords, kind, coeffs)
    }

    /// Applies every group's own projection in turn. The projections act on
    /// disjoint coordinates and commute.
    pub fn project_all<T: Real>(&self, coeffs: &SparseCoefficients<T>) -> Result<SparseCoefficients<T>> {
        let mut out = coeffs.clone();
        for g in &self.groups {
            out = project_coords(&g.coords, g.kind, &out)?;
        }
        Ok(out)
    }

    /// Expansion of the orthonormal basis element `ξ_k` over the product
    /// basis. Each group contributes `√(#S_I / M_I(k)!) · P_I`.
    pub fn xi_expansion(&self, k: &MultiIndex) -> Result<XiExpansion> {
        self.check_canonical(k)?;
        let mut coeffs: SparseCoefficients<BigRational> = SparseCoefficients::unit(k.clone());
        let mut scale_sq = <BigRational as One>::one();
        for g in &self.groups {
            if g.size() > MAX_PERMUTATION_GROUP {
                return Err(Error::GroupTooLarge { size: g.size(), limit: MAX_PERMUTATION_GROUP });
            }
            // Summing signed images without the 1/#S factor keeps the
            // coefficients integral.
            coeffs = signed_image_sum(&g.coords, g.kind, &coeffs);
            let group_order = factorial(g.size());
            let m_fact: BigInt = multiplicities(g.coords.iter().map(|&c| k.0[c]))
                .into_iter()
                .map(factorial)
                .product();
            scale_sq /= BigRational::from_integer(group_order * m_fact);
        }
        Ok(XiExpansion { scale_sq, coeffs })
    }
}

impl fmt::Display for SymmetryStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={}", self.d)?;
        for g in &self.groups {
            let coords = g.coords.iter().map(|c| c + 1).join(",");
            write!(f, " {}{{{coords}}}", g.kind)?;
        }
        Ok(())
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn multiplicities(values: impl Iterator<Item = usize>) -> Vec<usize> {
    let values: Vec<usize> = values.collect();
    let size = values.len();
    let mut counts: Vec<usize> = values.into_iter().counts().into_values().collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts.resize(size, 0);
    counts
}

/// Sign `(−1)^{inversions}` of a permutation of `0..n`.
pub fn parity(perm: &[usize]) -> i8 {
    let mut visited = vec![false; perm.len()];
    let mut transpositions = 0usize;
    for start in 0..perm.len() {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !visited[i] {
            visited[i] = true;
            i = perm[i];
            len += 1;
        }
        transpositions += len - 1;
    }
    if transpositions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `Σ_σ sign(σ) · η_{σ(j)}` over all permutations of `coords` (no
/// averaging), applied linearly to every entry.
fn signed_image_sum<T: Real>(
    coords: &[usize],
    kind: GroupKind,
    coeffs: &SparseCoefficients<T>,
) -> SparseCoefficients<T> {
    let n = coords.len();
    let perms: Vec<(Vec<usize>, i8)> = (0..n)
        .permutations(n)
        .map(|p| {
            let s = parity(&p);
            (p, s)
        })
        .collect();
    let mut out = SparseCoefficients::new();
    for (j, c) in coeffs.iter() {
        for (perm, sign) in &perms {
            let mut image = j.0.clone();
            for (t, &src) in perm.iter().enumerate() {
                image[coords[t]] = j.0[coords[src]];
            }
            let term = if kind == GroupKind::Antisymmetric && *sign < 0 { c.neg() } else { c.clone() };
            out.accumulate(MultiIndex(image), term);
        }
    }
    out.prune();
    out
}

fn project_coords<T: Real>(
    coords: &[usize],
    kind: GroupKind,
    coeffs: &SparseCoefficients<T>,
) -> Result<SparseCoefficients<T>> {
    let n = coords.len();
    if n > MAX_PERMUTATION_GROUP {
        return Err(Error::GroupTooLarge { size: n, limit: MAX_PERMUTATION_GROUP });
    }
    if n <= 1 {
        return Ok(coeffs.clone());
    }
    let order = (1..=n as i64).product::<i64>();
    let inv = T::from_ratio(1, order);
    let mut out = signed_image_sum(coords, kind, coeffs);
    for v in out.entries.values_mut() {
        *v = v.mul(&inv);
    }
    out.prune();
    Ok(out)
}

/// A `d`-tuple of positive integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Parses `"(1,2,3)"`; the parentheses are optional.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let entries = inner
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidArgument(format!("cannot parse multi-index `{s}`")))?;
        if entries.is_empty() || entries.contains(&0) {
            return Err(Error::InvalidArgument(format!("multi-index `{s}` must have positive entries")));
        }
        Ok(MultiIndex(entries))
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Finitely supported coefficient vector over multi-indices. Zero entries
/// are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCoefficients<T> {
    entries: BTreeMap<MultiIndex, T>,
}

impl<T: Real> Default for SparseCoefficients<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> SparseCoefficients<T> {
    pub fn new() -> Self {
        SparseCoefficients { entries: BTreeMap::new() }
    }

    pub fn unit(k: MultiIndex) -> Self {
        let mut out = Self::new();
        out.entries.insert(k, T::one());
        out
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (MultiIndex, T)>) -> Self {
        let mut out = Self::new();
        for (k, v) in entries {
            out.accumulate(k, v);
        }
        out.prune();
        out
    }

    /// Adds `value` to the entry at `k`, dropping it if it cancels exactly.
    pub fn accumulate(&mut self, k: MultiIndex, value: T) {
        if value.is_zero() {
            return;
        }
        match self.entries.get_mut(&k) {
            Some(v) => {
                *v = v.add(&value);
                if v.is_zero() {
                    self.entries.remove(&k);
                }
            }
            None => {
                self.entries.insert(k, value);
            }
        }
    }

    /// Removes entries that are zero, or negligible relative to the
    /// largest entry in float mode.
    pub fn prune(&mut self) {
        let scale = self.entries.values().map(Real::abs_f64).fold(0.0, f64::max);
        self.entries.retain(|_, v| !v.is_negligible(scale));
    }

    pub fn get(&self, k: &MultiIndex) -> Option<&T> {
        self.entries.get(k)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.entries.iter()
    }

    pub fn norm_sq(&self) -> T {
        self.entries.values().fold(T::zero(), |acc, v| acc.add(&v.mul(v)))
    }

    pub fn inner(&self, other: &Self) -> T {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small
            .entries
            .iter()
            .filter_map(|(k, v)| large.entries.get(k).map(|w| v.mul(w)))
            .fold(T::zero(), |acc, x| acc.add(&x))
    }

    pub fn scaled(&self, factor: &T) -> Self {
        Self::from_entries(self.entries.iter().map(|(k, v)| (k.clone(), v.mul(factor))))
    }

    /// Multiplies each entry by a weight depending on its index.
    pub fn map_diagonal(&self, weight: impl Fn(&MultiIndex) -> T) -> Self {
        Self::from_entries(self.entries.iter().map(|(k, v)| (k.clone(), v.mul(&weight(k)))))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.accumulate(k.clone(), v.neg());
        }
        out.prune();
        out
    }

    /// Largest absolute entry difference, for float comparisons.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<&MultiIndex> =
            self.entries.keys().chain(other.entries.keys()).collect();
        keys.into_iter()
            .map(|k| {
                let a = self.entries.get(k).map_or(0.0, Real::to_f64);
                let b = other.entries.get(k).map_or(0.0, Real::to_f64);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> SparseCoefficients<f64> {
        SparseCoefficients::from_entries(self.entries.iter().map(|(k, v)| (k.clone(), v.to_f64())))
    }
}

impl<T: Real + Serialize> Serialize for SparseCoefficients<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_map(self.entries.iter().map(|(k, v)| (k.to_string(), v)))
    }
}

/// `ξ_k = √scale_sq · Σ_j coeffs_j η_j` with integer coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct XiExpansion {
    pub scale_sq: BigRational,
    pub coeffs: SparseCoefficients<BigRational>,
}

impl XiExpansion {
    /// `⟨ξ_a, ξ_b⟩ · |⟨ξ_a, ξ_b⟩|`, which is rational and equals 1 or 0
    /// exactly for orthonormal pairs.
    pub fn signed_inner_sq(&self, other: &XiExpansion) -> BigRational {
        let dot = self.coeffs.inner(&other.coeffs);
        let sign = if dot.is_negative() { -<BigRational as One>::one() } else { <BigRational as One>::one() };
        if Zero::is_zero(&dot) {
            return <BigRational as Zero>::zero();
        }
        sign * &dot * &dot * &self.scale_sq * &other.scale_sq
    }

    pub fn to_f64(&self) -> SparseCoefficients<f64> {
        let factor = rational_to_f64(&self.scale_sq).sqrt();
        self.coeffs.to_f64().scaled(&factor)
    }
}

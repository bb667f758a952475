//! Ordered enumeration and counting of the `d`-variate eigenvalues
//! `λ_{d,k} = ∏ λ_{k_l}` over canonical multi-indices.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::count::{Count, InfiniteReason, Tally};
use crate::error::{Error, Result};
use crate::numeric::{LogValue, Magnitude, Real, ThresholdCmp};
use crate::spectrum::{EigenSequence, PowerSum, SpectralValue, DEFAULT_HORIZON};
use crate::symmetry::{BlockKind, MultiIndex, SymmetryStructure};

/// One eigenvalue of the restricted problem with its canonical index.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumItem<M = LogValue> {
    pub index: MultiIndex,
    pub value: M,
}

impl<M: Magnitude> SpectrumItem<M> {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// Memoized `λ_m` lookups in one arithmetic.
struct EigenCache<'a, M> {
    seq: &'a EigenSequence,
    values: Vec<M>,
}

impl<'a, M: SpectralValue> EigenCache<'a, M> {
    fn new(seq: &'a EigenSequence) -> Self {
        EigenCache { seq, values: Vec::new() }
    }

    fn get(&mut self, m: usize) -> &M {
        while self.values.len() < m {
            let next = self.values.len() + 1;
            self.values.push(M::eigenvalue(self.seq, next));
        }
        &self.values[m - 1]
    }

    /// `λ_from ⋯ λ_{from+len−1}`.
    fn run_product(&mut self, from: usize, len: usize) -> M {
        let mut acc = M::one();
        for m in from..from + len {
            acc = acc.mul(self.get(m));
        }
        acc
    }
}

/// Positions of the canonical index in block order.
#[derive(Clone, Debug)]
struct Layout {
    /// Original coordinate of each position.
    coord: Vec<usize>,
    kind: Vec<BlockKind>,
    offset: Vec<usize>,
    block_len: Vec<usize>,
    /// Exclusive end position of the block containing each position.
    block_end: Vec<usize>,
}

impl Layout {
    fn new(structure: &SymmetryStructure) -> Self {
        let mut layout = Layout {
            coord: Vec::new(),
            kind: Vec::new(),
            offset: Vec::new(),
            block_len: Vec::new(),
            block_end: Vec::new(),
        };
        for block in structure.blocks() {
            let end = layout.coord.len() + block.coords.len();
            for (o, &c) in block.coords.iter().enumerate() {
                layout.coord.push(c);
                layout.kind.push(block.kind);
                layout.offset.push(o);
                layout.block_len.push(block.coords.len());
                layout.block_end.push(end);
            }
        }
        layout
    }

    fn len(&self) -> usize {
        self.coord.len()
    }

    fn is_block_start(&self, pos: usize) -> bool {
        self.offset[pos] == 0
    }

    /// Smallest admissible entry at `pos` given the previous entry of the
    /// same block.
    fn min_entry(&self, pos: usize, prev: usize) -> usize {
        if self.offset[pos] == 0 {
            return 1;
        }
        match self.kind[pos] {
            BlockKind::Symmetric => prev,
            BlockKind::Antisymmetric => prev + 1,
            BlockKind::Free => 1,
        }
    }

    fn root(&self) -> Vec<usize> {
        (0..self.len())
            .map(|p| match self.kind[p] {
                BlockKind::Antisymmetric => self.offset[p] + 1,
                _ => 1,
            })
            .collect()
    }

    fn to_index(&self, flat: &[usize]) -> MultiIndex {
        let mut out = vec![0; flat.len()];
        for (p, &k) in flat.iter().enumerate() {
            out[self.coord[p]] = k;
        }
        MultiIndex(out)
    }

    /// Largest eigenvalue product over the blocks starting at or after
    /// `pos`, indexed by position (one extra entry for the empty suffix).
    fn suffix_best<M: SpectralValue>(&self, cache: &mut EigenCache<'_, M>) -> Vec<M> {
        let n = self.len();
        let mut out = vec![M::one(); n + 1];
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            if !self.is_block_start(pos) {
                out[pos] = out[pos + 1].clone();
                continue;
            }
            let a = self.block_len[pos];
            let best = match self.kind[pos] {
                BlockKind::Antisymmetric => cache.run_product(1, a),
                _ => cache.get(1).pow(a as u32),
            };
            out[pos] = best.mul(&out[self.block_end[pos]]);
        }
        out
    }
}

#[derive(Clone, Debug)]
struct Node<M> {
    value: M,
    index: MultiIndex,
    flat: Vec<usize>,
    /// Flat position of the last gap that is non-zero (0 at the root).
    last: usize,
}

impl<M: Magnitude> PartialEq for Node<M> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<M: Magnitude> Eq for Node<M> {}

impl<M: Magnitude> PartialOrd for Node<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<M: Magnitude> Ord for Node<M> {
    /// Larger values first, then lexicographically smaller indices.
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then_with(|| other.index.cmp(&self.index))
    }
}

/// Lazy non-increasing enumeration of the positive eigenvalues over the
/// canonical index set, ties broken by lexicographic order of the index.
///
/// Each canonical index is encoded by its gaps: within a symmetric block
/// `k₁ − 1, k₂ − k₁, …`, within an antisymmetric block `k₁ − 1,
/// k₂ − k₁ − 1, …`, and `k − 1` for a free coordinate. The eigenvalue is
/// non-increasing in every gap. A node's children increment one gap at or
/// after its last non-zero gap, so every index has exactly one parent and
/// children never precede their parent in the output order.
pub struct SpectrumStream<M: SpectralValue = LogValue> {
    structure: SymmetryStructure,
    seq: EigenSequence,
    layout: Layout,
    cache: Vec<M>,
    heap: BinaryHeap<Node<M>>,
}

impl<M: SpectralValue> SpectrumStream<M> {
    pub fn new(structure: &SymmetryStructure, seq: &EigenSequence) -> Result<Self> {
        M::supports(seq)?;
        let layout = Layout::new(structure);
        let mut stream = SpectrumStream {
            structure: structure.clone(),
            seq: seq.clone(),
            layout,
            cache: Vec::new(),
            heap: BinaryHeap::new(),
        };
        let root = stream.layout.root();
        stream.push(root, 0);
        Ok(stream)
    }

    pub fn structure(&self) -> &SymmetryStructure {
        &self.structure
    }

    pub fn sequence(&self) -> &EigenSequence {
        &self.seq
    }

    fn eigen(&mut self, m: usize) -> M {
        while self.cache.len() < m {
            let next = self.cache.len() + 1;
            self.cache.push(M::eigenvalue(&self.seq, next));
        }
        self.cache[m - 1].clone()
    }

    fn push(&mut self, flat: Vec<usize>, last: usize) {
        let mut value = M::one();
        for &k in &flat {
            value = value.mul(&self.eigen(k));
            if value.is_zero() {
                return;
            }
        }
        let index = self.layout.to_index(&flat);
        self.heap.push(Node { value, index, flat, last });
    }
}

impl<M: SpectralValue> Iterator for SpectrumStream<M> {
    type Item = SpectrumItem<M>;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.heap.pop()?;
        for i in node.last..self.layout.len() {
            let mut child = node.flat.clone();
            for entry in child.iter_mut().take(self.layout.block_end[i]).skip(i) {
                *entry += 1;
            }
            self.push(child, i);
        }
        Some(SpectrumItem { index: node.index, value: node.value })
    }
}

/// The `n` largest eigenvalues (fewer if fewer are positive), in float
/// log-domain arithmetic.
pub fn top_eigenvalues(
    structure: &SymmetryStructure,
    seq: &EigenSequence,
    n: usize,
) -> Vec<SpectrumItem<LogValue>> {
    SpectrumStream::<LogValue>::new(structure, seq)
        .expect("float mode supports every sequence")
        .take(n)
        .collect()
}

/// [`top_eigenvalues`] in exact rational arithmetic.
pub fn top_eigenvalues_exact(
    structure: &SymmetryStructure,
    seq: &EigenSequence,
    n: usize,
) -> Result<Vec<SpectrumItem<BigRational>>> {
    Ok(SpectrumStream::<BigRational>::new(structure, seq)?.take(n).collect())
}

/// Tuning for [`count_above`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountOptions {
    /// Largest univariate index the search may visit.
    pub horizon: u64,
    /// Split the top-level branches across the rayon pool.
    pub parallel: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { horizon: DEFAULT_HORIZON, parallel: false }
    }
}

/// Largest value a single block coordinate can keep while all others sit at
/// their best, when that coordinate is sent to infinity.
pub(crate) fn non_compact_witness<M: SpectralValue>(
    structure: &SymmetryStructure,
    seq: &EigenSequence,
    threshold: &M,
) -> Option<InfiniteReason> {
    let limit = seq.limit();
    if limit <= 0.0 {
        return None;
    }
    let ln_limit = limit.ln();
    let ln = |m: usize| seq.ln_eigenvalue(m);
    let mut ln_initial = 0.0;
    for block in structure.blocks() {
        let a = block.coords.len();
        ln_initial += match block.kind {
            BlockKind::Antisymmetric => (1..=a).map(ln).sum::<f64>(),
            _ => a as f64 * ln(1),
        };
    }
    let best = structure
        .blocks()
        .iter()
        .map(|block| {
            let last = match block.kind {
                BlockKind::Antisymmetric => block.coords.len(),
                _ => 1,
            };
            ln_initial - ln(last) + ln_limit
        })
        .fold(f64::NEG_INFINITY, f64::max);
    (best > threshold.ln()).then_some(InfiniteReason::NonCompact { limit })
}

struct Counter<'a, M> {
    layout: &'a Layout,
    seq: &'a EigenSequence,
    threshold: &'a M,
    suffix: &'a [M],
    horizon: u64,
}

impl<M: SpectralValue> Counter<'_, M> {
    /// Best product of the rest of the current block after choosing `m` at
    /// `pos`.
    fn completion(&self, pos: usize, m: usize, cache: &mut EigenCache<'_, M>) -> M {
        let rest = self.layout.block_len[pos] - self.layout.offset[pos] - 1;
        match self.layout.kind[pos] {
            BlockKind::Symmetric => cache.get(m).pow(rest as u32),
            BlockKind::Antisymmetric => cache.run_product(m + 1, rest),
            BlockKind::Free => M::one(),
        }
    }

    /// Entries at `pos` whose best completion lies above the threshold,
    /// with their partial products.
    fn branches(
        &self,
        pos: usize,
        prev: usize,
        partial: &M,
        cache: &mut EigenCache<'_, M>,
        tally: &mut Tally,
    ) -> std::result::Result<Vec<(usize, M)>, InfiniteReason> {
        let mut out = Vec::new();
        let suffix = &self.suffix[self.layout.block_end[pos]];
        let mut m = self.layout.min_entry(pos, prev);
        loop {
            if m as u64 > self.horizon {
                return Err(InfiniteReason::HorizonExceeded { horizon: self.horizon });
            }
            let head = partial.mul(cache.get(m));
            let bound = head.mul(&self.completion(pos, m, cache)).mul(suffix);
            match bound.compare_threshold(self.threshold) {
                ThresholdCmp::Above => out.push((m, head)),
                ThresholdCmp::Tie => {
                    tally.ties += 1;
                    break;
                }
                ThresholdCmp::NotAbove => break,
            }
            m += 1;
        }
        Ok(out)
    }

    fn run(&self, parallel: bool, cache: &mut EigenCache<'_, M>) -> std::result::Result<Tally, InfiniteReason> {
        let mut tally = Tally::finite(0);
        if !parallel || self.layout.len() == 1 {
            self.dfs(0, 0, &M::one(), cache, &mut tally)?;
            return Ok(tally);
        }
        let top = self.branches(0, 0, &M::one(), cache, &mut tally)?;
        let parts: Vec<std::result::Result<Tally, InfiniteReason>> = top
            .par_iter()
            .map(|(m, head)| {
                let mut local_cache = EigenCache::<M>::new(self.seq);
                let mut local = Tally::finite(0);
                self.dfs(1, *m, head, &mut local_cache, &mut local)?;
                Ok(local)
            })
            .collect();
        for part in parts {
            tally = tally.merge(part?);
        }
        Ok(tally)
    }

    fn dfs(
        &self,
        pos: usize,
        prev: usize,
        partial: &M,
        cache: &mut EigenCache<'_, M>,
        tally: &mut Tally,
    ) -> std::result::Result<(), InfiniteReason> {
        let branches = self.branches(pos, prev, partial, cache, tally)?;
        if pos + 1 == self.layout.len() {
            tally.count = tally.count.clone().add(Count::Finite(branches.len() as u64));
            return Ok(());
        }
        for (m, head) in branches {
            self.dfs(pos + 1, m, &head, cache, tally)?;
        }
        Ok(())
    }
}

/// `#{k ∈ ∇_d : λ_{d,k} > threshold}` by depth-first search with monotone
/// pruning. Float-mode boundary ties count as "not above" and are tallied.
pub fn count_above<M: SpectralValue>(
    structure: &SymmetryStructure,
    seq: &EigenSequence,
    threshold: &M,
    options: &CountOptions,
) -> Result<Tally> {
    M::supports(seq)?;
    if threshold.is_zero() {
        return Err(Error::InvalidArgument("counting threshold must be positive".into()));
    }
    if let Some(reason) = non_compact_witness(structure, seq, threshold) {
        return Ok(Tally::infinite(reason));
    }
    let layout = Layout::new(structure);
    let mut cache = EigenCache::<M>::new(seq);
    let suffix = layout.suffix_best(&mut cache);
    let counter = Counter { layout: &layout, seq, threshold, suffix: &suffix, horizon: options.horizon };
    Ok(match counter.run(options.parallel, &mut cache) {
        Ok(t) => t,
        Err(reason) => Tally::infinite(reason),
    })
}

/// Result of the exhaustive oracle over a truncation cube.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BruteForce {
    pub tally: Tally,
    /// True when no canonical index outside the cube can exceed the
    /// threshold, i.e. `λ_s · λ₁^{d−1}` is not above it.
    pub complete: bool,
}

/// Exhaustive count over `∇_d ∩ {1,…,s}^d`.
pub fn brute_force_count<M: SpectralValue>(
    structure: &SymmetryStructure,
    seq: &EigenSequence,
    threshold: &M,
    s: usize,
) -> Result<BruteForce> {
    M::supports(seq)?;
    let d = structure.d();
    if s < d {
        return Err(Error::InvalidArgument(format!("cube bound s = {s} must be at least d = {d}")));
    }
    let values: Vec<M> = (1..=s).map(|m| M::eigenvalue(seq, m)).collect();
    let mut tally = Tally::finite(0);
    let mut count = 0u64;
    for k in (0..d).map(|_| 1..=s).multi_cartesian_product() {
        let k = MultiIndex(k);
        if !structure.is_canonical(&k) {
            continue;
        }
        let value = k.0.iter().fold(M::one(), |acc, &m| acc.mul(&values[m - 1]));
        match value.compare_threshold(threshold) {
            ThresholdCmp::Above => count += 1,
            ThresholdCmp::Tie => tally.ties += 1,
            ThresholdCmp::NotAbove => {}
        }
    }
    tally.count = Count::Finite(count);
    let edge = values[s - 1].mul(&values[0].pow(d as u32 - 1));
    let complete = !edge.compare_threshold(threshold).is_above();
    Ok(BruteForce { tally, complete })
}

/// Number of leading terms summed explicitly before the tail bracket.
const SPECTRAL_HEAD_TERMS: usize = 1 << 16;

/// `Σ_{k∈∇_d} λ_{d,k}^τ` as a product over blocks: `e_a` of `(λ_m^τ)` for
/// an antisymmetric block of size `a`, `h_a` for a symmetric block and
/// `Σ λ_m^τ` per free coordinate.
pub fn spectral_sum(structure: &SymmetryStructure, seq: &EigenSequence, tau: f64) -> Result<PowerSum> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("τ must be positive, got {tau}")));
    }
    let mut value = 1.0f64;
    let mut rel_err = 0.0f64;
    for block in structure.blocks() {
        let a = block.coords.len();
        let factor = match block.kind {
            BlockKind::Free => seq.power_sum(tau, 1).finite(seq)?,
            BlockKind::Symmetric => complete_homogeneous_sum(seq, tau, a)?,
            BlockKind::Antisymmetric => elementary_sum(seq, tau, a)?,
        };
        if factor.value == 0.0 {
            return Ok(PowerSum::exact(0.0));
        }
        value *= factor.value;
        rel_err += factor.error_bound / factor.value;
    }
    let rounding = 4.0 * f64::EPSILON * structure.d() as f64;
    Ok(PowerSum { value, error_bound: value * (rel_err * (1.0 + rel_err) + rounding) })
}

/// `h_a` of `(λ_m^τ)` from the power sums `p_j = Σ λ_m^{jτ}` via
/// `k h_k = Σ_i h_{k−i} p_i`. All terms are positive, so evaluating at the
/// lower and upper ends of each `p_j` brackets the true value.
fn complete_homogeneous_sum(seq: &EigenSequence, tau: f64, a: usize) -> Result<PowerSum> {
    let mut p = Vec::with_capacity(a);
    for j in 1..=a {
        p.push(seq.power_sum(j as f64 * tau, 1).finite(seq)?);
    }
    let mid: Vec<f64> = p.iter().map(|s| s.value).collect();
    let lo: Vec<f64> = p.iter().map(PowerSum::lower).collect();
    let hi: Vec<f64> = p.iter().map(PowerSum::upper).collect();
    let h = newton_complete(&mid, a)[a];
    let h_lo = newton_complete(&lo, a)[a];
    let h_hi = newton_complete(&hi, a)[a];
    let spread = (h_hi - h).max(h - h_lo).max(0.0);
    Ok(PowerSum { value: h, error_bound: spread + 4.0 * f64::EPSILON * a as f64 * h })
}

/// `e_a` of `(λ_m^τ)`.
///
/// The leading `M` terms are folded in with `e_k ← e_k + x·e_{k−1}`,
/// which only adds non-negative numbers. The remaining terms have sum `T`
/// in a certified bracket, and contribute `Σ_j e_{a−j}(head)·e_j(tail)`
/// with `e_1(tail) = T` and `0 ≤ e_j(tail) ≤ T^j/j!`.
fn elementary_sum(seq: &EigenSequence, tau: f64, a: usize) -> Result<PowerSum> {
    let head_len = seq.positive_count().unwrap_or(SPECTRAL_HEAD_TERMS);
    let mut e = vec![0.0f64; a + 1];
    e[0] = 1.0;
    let mut head_terms = 0;
    for m in 1..=head_len {
        let ln = seq.ln_eigenvalue(m);
        if ln == f64::NEG_INFINITY {
            break;
        }
        let x = (tau * ln).exp();
        head_terms = m;
        if x == 0.0 {
            break;
        }
        for k in (1..=a).rev() {
            e[k] += x * e[k - 1];
        }
    }
    if seq.positive_count().is_some() {
        return Ok(PowerSum { value: e[a], error_bound: 4.0 * f64::EPSILON * (a as f64 + 1.0) * e[a] });
    }
    let start = head_terms + 1;
    let tail = seq.power_sum(tau, start).finite(seq)?;
    let (t_lo, t_hi) = (tail.lower(), tail.upper());
    let mut lower = e[a];
    let mut upper = e[a];
    if a >= 1 {
        lower += e[a - 1] * t_lo;
        upper += e[a - 1] * t_hi;
        let mut pow = t_hi;
        for j in 2..=a {
            pow *= t_hi / j as f64;
            upper += e[a - j] * pow;
        }
    }
    // Point estimate: the tail's own elementary sums from its power sums.
    // Every tail term is tiny next to the tail sum, so the alternating
    // Newton recurrence does not cancel here.
    let mut tail_p = Vec::with_capacity(a);
    for i in 1..=a {
        tail_p.push(seq.power_sum(i as f64 * tau, start).finite(seq)?.value);
    }
    let tail_e = newton_elementary(&tail_p, a);
    let estimate: f64 = (0..=a).map(|j| e[a - j] * tail_e[j].max(0.0)).sum();
    let value = estimate.clamp(lower, upper);
    let rounding = 4.0 * f64::EPSILON * (a as f64 + 1.0) * value;
    Ok(PowerSum { value, error_bound: (upper - value).max(value - lower) + rounding })
}

/// `[h_0, …, h_n]` from power sums `p[0] = p_1, …` by Newton's identities.
pub fn newton_complete<T: Real>(p: &[T], n: usize) -> Vec<T> {
    assert!(p.len() >= n, "need {n} power sums");
    let mut h = vec![T::one()];
    for k in 1..=n {
        let mut acc = T::zero();
        for i in 1..=k {
            acc = acc.add(&h[k - i].mul(&p[i - 1]));
        }
        h.push(acc.div(&T::from_ratio(k as i64, 1)));
    }
    h
}

/// `[e_0, …, e_n]` from power sums `p[0] = p_1, …` by Newton's identities
/// `k e_k = Σ_i (−1)^{i−1} e_{k−i} p_i`. Exact in rational arithmetic; in
/// floating point the alternating signs cancel badly once `e_n` is small.
pub fn newton_elementary<T: Real>(p: &[T], n: usize) -> Vec<T> {
    assert!(p.len() >= n, "need {n} power sums");
    let mut e = vec![T::one()];
    for k in 1..=n {
        let mut acc = T::zero();
        for i in 1..=k {
            let term = e[k - i].mul(&p[i - 1]);
            acc = if i % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
        }
        e.push(acc.div(&T::from_ratio(k as i64, 1)));
    }
    e
}

/// Exact spectral sum for integer `τ` and finitely many positive
/// eigenvalues.
pub fn spectral_sum_exact(structure: &SymmetryStructure, seq: &EigenSequence, tau: u32) -> Result<BigRational> {
    BigRational::supports(seq)?;
    if seq.positive_count().is_none() {
        return Err(Error::InvalidArgument(format!(
            "exact spectral sums need finitely many positive eigenvalues, got {seq}"
        )));
    }
    if tau == 0 {
        return Err(Error::InvalidArgument("τ must be positive".into()));
    }
    let blocks = structure.blocks();
    let max_a = blocks.iter().map(|b| b.coords.len()).max().unwrap_or(1);
    let p: Vec<BigRational> = (1..=max_a)
        .map(|j| seq.power_sum_exact(j as u32 * tau, 1).expect("finite support checked"))
        .collect();
    let mut acc = <BigRational as One>::one();
    for block in blocks {
        let a = block.coords.len();
        let factor = match block.kind {
            BlockKind::Free => p[0].clone(),
            BlockKind::Symmetric => newton_complete(&p, a)[a].clone(),
            BlockKind::Antisymmetric => newton_elementary(&p, a)[a].clone(),
        };
        if Zero::is_zero(&factor) {
            return Ok(<BigRational as Zero>::zero());
        }
        acc *= factor;
    }
    Ok(acc)
}

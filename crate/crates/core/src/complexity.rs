//! Initial error, n-th minimal errors, information complexity and the exact
//! recursion for fully antisymmetric problems.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::count::{Count, InfiniteReason, Tally};
use crate::enumeration::{count_above, non_compact_witness, CountOptions, SpectrumStream};
use crate::error::{Error, Result};
use crate::numeric::{LogValue, Magnitude};
use crate::spectrum::{EigenSequence, SpectralValue, DEFAULT_HORIZON};
use crate::symmetry::{BlockKind, GroupKind, SymmetryStructure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Absolute,
    Normalized,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Absolute => "absolute",
            Criterion::Normalized => "normalized",
        })
    }
}

/// A tensor product problem restricted to the subspace fixed by a symmetry
/// structure. Only its spectrum matters.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub structure: SymmetryStructure,
    pub seq: EigenSequence,
}

impl Problem {
    pub fn new(structure: SymmetryStructure, seq: EigenSequence) -> Self {
        Problem { structure, seq }
    }

    /// Largest eigenvalue `λ_{d,ψ(1)}`: each antisymmetric block of size `a`
    /// contributes `λ₁⋯λ_a`, every other coordinate `λ₁`.
    pub fn initial_eigenvalue<M: SpectralValue>(&self) -> Result<M> {
        M::supports(&self.seq)?;
        let mut acc = M::one();
        for block in self.structure.blocks() {
            let a = block.coords.len();
            match block.kind {
                BlockKind::Antisymmetric => {
                    for m in 1..=a {
                        acc = acc.mul(&M::eigenvalue(&self.seq, m));
                    }
                }
                _ => acc = acc.mul(&M::eigenvalue(&self.seq, 1).pow(a as u32)),
            }
        }
        Ok(acc)
    }

    /// Error of the zero algorithm, `√λ_{d,ψ(1)}`.
    pub fn initial_error(&self) -> f64 {
        let ln = self.initial_eigenvalue::<LogValue>().expect("float mode").0;
        (0.5 * ln).exp()
    }

    /// `e(n,d) = √λ_{d,ψ(n+1)}`, zero when fewer than `n + 1` eigenvalues
    /// are positive.
    pub fn nth_minimal_error(&self, n: usize) -> f64 {
        SpectrumStream::<LogValue>::new(&self.structure, &self.seq)
            .expect("float mode")
            .nth(n)
            .map_or(0.0, |item| (0.5 * item.value.0).exp())
    }

    /// Squared n-th minimal error in the given arithmetic.
    pub fn nth_minimal_error_sq<M: SpectralValue>(&self, n: usize) -> Result<M> {
        Ok(SpectrumStream::<M>::new(&self.structure, &self.seq)?
            .nth(n)
            .map_or_else(M::zero, |item| item.value))
    }

    /// Counting threshold `ε²` (absolute) or `ε²·λ_{d,ψ(1)}` (normalized).
    pub fn threshold<M: SpectralValue>(&self, eps: &M, criterion: Criterion) -> Result<M> {
        if eps.is_zero() {
            return Err(Error::InvalidArgument("ε must be positive".into()));
        }
        let sq = eps.mul(eps);
        match criterion {
            Criterion::Absolute => Ok(sq),
            Criterion::Normalized => {
                if eps.total_cmp(&M::one()) != std::cmp::Ordering::Less {
                    return Err(Error::InvalidArgument("normalized criterion needs ε < 1".into()));
                }
                Ok(sq.mul(&self.initial_eigenvalue::<M>()?))
            }
        }
    }

    /// `n(ε,d) = #{k ∈ ∇_d : λ_{d,k} > threshold}`.
    pub fn info_complexity<M: SpectralValue>(
        &self,
        eps: &M,
        criterion: Criterion,
        options: &CountOptions,
    ) -> Result<Tally> {
        let threshold = self.threshold(eps, criterion)?;
        if threshold.is_zero() {
            // Normalizing by a zero initial error: the spectrum is empty.
            return Ok(Tally::finite(0));
        }
        count_above(&self.structure, &self.seq, &threshold, options)
    }

    /// Float-mode [`Problem::info_complexity`] for a plain `ε`.
    pub fn info_complexity_f64(&self, eps: f64, criterion: Criterion) -> Result<Tally> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("ε must be positive, got {eps}")));
        }
        self.info_complexity(&LogValue::from_linear(eps), criterion, &CountOptions::default())
    }
}

/// `i_d(δ²) = min{i ≥ 1 : λ_i⋯λ_{i+d−1} ≤ δ²}`.
pub fn i_index<M: SpectralValue>(seq: &EigenSequence, d: usize, delta_sq: &M, horizon: u64) -> Result<usize> {
    M::supports(seq)?;
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    if delta_sq.is_zero() {
        return Err(Error::InvalidArgument("δ² must be positive".into()));
    }
    let window = |i: usize| (i..i + d).fold(M::one(), |acc, m| acc.mul(&M::eigenvalue(seq, m)));
    let below = |i: usize| !window(i).compare_threshold(delta_sq).is_above();
    if below(1) {
        return Ok(1);
    }
    // Invariant: window(lo) is above δ², window(hi) is not.
    let mut lo = 1usize;
    let mut step = 1usize;
    let mut hi = loop {
        let probe = lo + step;
        if probe as u64 > horizon {
            return Err(Error::NoFiniteIndex(format!(
                "products of {d} consecutive eigenvalues of {seq} stay above the threshold up to index {horizon}"
            )));
        }
        if below(probe) {
            break probe;
        }
        lo = probe;
        step *= 2;
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

struct Recursion<'a, M: Magnitude> {
    seq: &'a EigenSequence,
    horizon: u64,
    eigen: Vec<M>,
    i_memo: HashMap<(usize, M::Key), usize>,
    ent_memo: HashMap<M::Key, (usize, u64)>,
    ties: u64,
}

impl<M: SpectralValue> Recursion<'_, M> {
    fn eigen(&mut self, m: usize) -> M {
        while self.eigen.len() < m {
            let next = self.eigen.len() + 1;
            self.eigen.push(M::eigenvalue(self.seq, next));
        }
        self.eigen[m - 1].clone()
    }

    fn i_index(&mut self, j: usize, delta_sq: &M) -> std::result::Result<usize, InfiniteReason> {
        let key = (j, delta_sq.key());
        if let Some(&i) = self.i_memo.get(&key) {
            return Ok(i);
        }
        let i = i_index(self.seq, j, delta_sq, self.horizon)
            .map_err(|_| InfiniteReason::HorizonExceeded { horizon: self.horizon })?;
        self.i_memo.insert(key, i);
        Ok(i)
    }

    /// `n^ent(δ,1) = #{m : λ_m > δ²}`.
    fn n_ent(&mut self, delta_sq: &M) -> std::result::Result<usize, InfiniteReason> {
        let key = delta_sq.key();
        if let Some(&(n, _)) = self.ent_memo.get(&key) {
            return Ok(n);
        }
        let tally = self.seq.count_exceeding(delta_sq, self.horizon);
        let n = match tally.count {
            Count::Finite(n) => n as usize,
            Count::Infinite(reason) => return Err(reason),
        };
        self.ties += tally.ties;
        self.ent_memo.insert(key, (n, tally.ties));
        Ok(n)
    }

    /// Number of `l ≤ k₁ < … < k_j` with `λ_{k₁}⋯λ_{k_j} > δ²`.
    fn tuples(&mut self, j: usize, l: usize, delta_sq: &M) -> std::result::Result<u64, InfiniteReason> {
        if j == 1 {
            let n = self.n_ent(delta_sq)?;
            return Ok((n + 1).saturating_sub(l) as u64);
        }
        let pivot = self.i_index(j, delta_sq)?;
        let mut total = 0u64;
        for k in l..pivot {
            let reduced = delta_sq.div(&self.eigen(k));
            total += self.tuples(j - 1, k + 1, &reduced)?;
        }
        Ok(total)
    }
}

/// Fully antisymmetric count via the nested-sum recursion
/// `n = Σ_{k₁ < i_d(ε²)} Σ_{k₁ < k₂ < i_{d−1}(ε²/λ_{k₁})} … [n^ent(·,1) − k_{d−1}]⁺`.
///
/// Shares no code with [`count_above`] beyond the univariate counter.
pub fn exact_antisymmetric_count<M: SpectralValue>(
    seq: &EigenSequence,
    d: usize,
    threshold: &M,
    horizon: u64,
) -> Result<Tally> {
    M::supports(seq)?;
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    if threshold.is_zero() {
        return Err(Error::InvalidArgument("counting threshold must be positive".into()));
    }
    let structure = SymmetryStructure::full(GroupKind::Antisymmetric, d)?;
    if let Some(reason) = non_compact_witness(&structure, seq, threshold) {
        return Ok(Tally::infinite(reason));
    }
    let mut rec = Recursion::<M> {
        seq,
        horizon,
        eigen: Vec::new(),
        i_memo: HashMap::new(),
        ent_memo: HashMap::new(),
        ties: 0,
    };
    let result = rec.tuples(d, 1, threshold);
    Ok(match result {
        Ok(n) => Tally { count: Count::Finite(n), ties: rec.ties },
        Err(reason) => Tally::infinite(reason),
    })
}

/// [`exact_antisymmetric_count`] with the default horizon.
pub fn exact_antisymmetric_count_default<M: SpectralValue>(seq: &EigenSequence, d: usize, threshold: &M) -> Result<Tally> {
    exact_antisymmetric_count(seq, d, threshold, DEFAULT_HORIZON)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Entire,
    FullySymmetric,
    FullyAntisymmetric,
}

impl StructureKind {
    pub fn structure(self, d: usize) -> Result<SymmetryStructure> {
        match self {
            StructureKind::Entire => SymmetryStructure::entire(d),
            StructureKind::FullySymmetric => SymmetryStructure::full(GroupKind::Symmetric, d),
            StructureKind::FullyAntisymmetric => SymmetryStructure::full(GroupKind::Antisymmetric, d),
        }
    }
}

/// Count for `m` unit eigenvalues and any `ε < 1`: `m^d` for the entire
/// space, `C(m,d)` for the antisymmetric subspace and `C(m+d−1,d)` for the
/// symmetric one.
pub fn closed_form_finite_rank(m: usize, d: usize, kind: StructureKind) -> BigUint {
    let m = BigUint::from(m);
    match kind {
        StructureKind::Entire => num_traits::pow(m, d),
        StructureKind::FullyAntisymmetric => binomial(&m, d),
        StructureKind::FullySymmetric => binomial(&(m + BigUint::from(d) - BigUint::one()), d),
    }
}

fn binomial(n: &BigUint, k: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        let i = BigUint::from(i);
        if &i >= n {
            return BigUint::from(0u8);
        }
        acc = acc * (n - &i) / (i + BigUint::one());
    }
    acc
}

/// Closed form as `u64` when it fits.
pub fn closed_form_finite_rank_u64(m: usize, d: usize, kind: StructureKind) -> Option<u64> {
    closed_form_finite_rank(m, d, kind).to_u64()
}

//! The optimal linear algorithm in coefficient space.
//!
//! Elements are given by their coefficients `⟨f, ξ_k⟩` over the canonical
//! orthonormal basis, on which the solution operator acts diagonally with
//! weights `√λ_{d,k}`. The optimal algorithm with `n` functionals keeps the
//! `n` leading coefficients of the ordered spectrum.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::complexity::Problem;
use crate::enumeration::SpectrumStream;
use crate::error::{Error, Result};
use crate::numeric::LogValue;
use crate::symmetry::{MultiIndex, SparseCoefficients};

/// Extra basis elements beyond the first `n + 1` that random test elements
/// are spread over.
pub const SUPPORT_MARGIN: usize = 32;

/// An element given by its coefficients over the canonical basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemElement {
    coeffs: SparseCoefficients<f64>,
}

impl ProblemElement {
    /// Checks that every index is canonical for the problem's structure.
    pub fn new(problem: &Problem, coeffs: SparseCoefficients<f64>) -> Result<Self> {
        for (k, _) in coeffs.iter() {
            problem.structure.check_canonical(k)?;
        }
        Ok(ProblemElement { coeffs })
    }

    /// The basis element `ξ_k`.
    pub fn basis(problem: &Problem, k: MultiIndex) -> Result<Self> {
        Self::new(problem, SparseCoefficients::unit(k))
    }

    pub fn coeffs(&self) -> &SparseCoefficients<f64> {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm_sq().sqrt()
    }

    /// Unit-ball membership by Parseval.
    pub fn in_unit_ball(&self) -> bool {
        self.coeffs.norm_sq() <= 1.0 + 1e-12
    }
}

/// `λ_{d,k}` for an arbitrary index.
fn eigenvalue_of(problem: &Problem, k: &MultiIndex) -> f64 {
    let ln: f64 = k.0.iter().map(|&m| problem.seq.ln_eigenvalue(m)).sum();
    ln.exp()
}

fn leading_indices(problem: &Problem, n: usize) -> HashSet<MultiIndex> {
    SpectrumStream::<LogValue>::new(&problem.structure, &problem.seq)
        .expect("float mode")
        .take(n)
        .map(|item| item.index)
        .collect()
}

/// Image-space coefficients of `A*_{n,d} f`: `√λ_{d,k} ⟨f, ξ_k⟩` on the `n`
/// leading indices, nothing elsewhere.
pub fn apply_optimal(problem: &Problem, f: &ProblemElement, n: usize) -> SparseCoefficients<f64> {
    let kept = leading_indices(problem, n);
    SparseCoefficients::from_entries(
        f.coeffs
            .iter()
            .filter(|(k, _)| kept.contains(*k))
            .map(|(k, c)| (k.clone(), c * eigenvalue_of(problem, k).sqrt())),
    )
}

/// Image-space coefficients of `S_d f`.
pub fn apply_solution(problem: &Problem, f: &ProblemElement) -> SparseCoefficients<f64> {
    SparseCoefficients::from_entries(
        f.coeffs.iter().map(|(k, c)| (k.clone(), c * eigenvalue_of(problem, k).sqrt())),
    )
}

fn residual_with(problem: &Problem, f: &ProblemElement, kept: &HashSet<MultiIndex>) -> f64 {
    f.coeffs
        .iter()
        .filter(|(k, _)| !kept.contains(*k))
        .map(|(k, c)| c * c * eigenvalue_of(problem, k))
        .sum::<f64>()
        .sqrt()
}

/// `‖S_d f − A*_{n,d} f‖ = (Σ_{v>n} ⟨f, ξ_{ψ(v)}⟩² λ_{d,ψ(v)})^{1/2}`.
pub fn residual_error(problem: &Problem, f: &ProblemElement, n: usize) -> f64 {
    residual_with(problem, f, &leading_indices(problem, n))
}

/// Outcome of a randomized worst-case probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstCase {
    pub n: usize,
    /// `e(n,d)`.
    pub nth_error: f64,
    /// Largest residual over the random unit elements.
    pub empirical_max: f64,
    /// Residual of the basis element `ξ_{ψ(n+1)}`.
    pub witness_error: f64,
    /// `ψ(n+1)`, absent when fewer than `n + 1` eigenvalues are positive.
    pub witness: Option<MultiIndex>,
    pub trials: usize,
}

/// Largest residual of the optimal algorithm over `trials` random unit
/// elements supported on the first `n + 32` basis elements, plus the
/// residual of the extremal element `ξ_{ψ(n+1)}`.
///
/// Trial `t` draws from its own ChaCha stream `t` of `seed`, so the result
/// does not depend on how trials are scheduled.
pub fn empirical_worst_case(problem: &Problem, n: usize, trials: usize, seed: u64) -> Result<WorstCase> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let items: Vec<_> = SpectrumStream::<LogValue>::new(&problem.structure, &problem.seq)?
        .take(n + SUPPORT_MARGIN)
        .collect();
    let kept: HashSet<MultiIndex> = items.iter().take(n).map(|i| i.index.clone()).collect();
    let support: Vec<MultiIndex> = items.iter().map(|i| i.index.clone()).collect();

    let empirical_max = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let raw: Vec<f64> = support.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            if support.is_empty() || norm == 0.0 {
                return 0.0;
            }
            let f = ProblemElement {
                coeffs: SparseCoefficients::from_entries(
                    support.iter().cloned().zip(raw.iter().map(|x| x / norm)),
                ),
            };
            residual_with(problem, &f, &kept)
        })
        .reduce(|| 0.0, f64::max);

    let witness = items.get(n).map(|i| i.index.clone());
    let witness_error = match &witness {
        Some(k) => residual_with(problem, &ProblemElement::basis(problem, k.clone())?, &kept),
        None => 0.0,
    };
    Ok(WorstCase {
        n,
        nth_error: problem.nth_minimal_error(n),
        empirical_max,
        witness_error,
        witness,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::EigenSequence;
    use crate::symmetry::{GroupKind, SymmetryStructure};
    use proptest::prelude::*;

    fn antisym(d: usize, seq: EigenSequence) -> Problem {
        Problem::new(SymmetryStructure::full(GroupKind::Antisymmetric, d).unwrap(), seq)
    }

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn zero_functionals_give_zero_output() {
        let p = antisym(2, EigenSequence::power_decay(1.0).unwrap());
        let f = ProblemElement::basis(&p, mi(&[1, 2])).unwrap();
        assert!(apply_optimal(&p, &f, 0).is_empty());
        assert!((residual_error(&p, &f, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn leading_basis_element_is_reproduced() {
        let p = antisym(2, EigenSequence::power_decay(1.0).unwrap());
        let f = ProblemElement::basis(&p, mi(&[1, 2])).unwrap();
        let out = apply_optimal(&p, &f, 3);
        assert_eq!(out.len(), 1);
        assert!((out.get(&mi(&[1, 2])).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(residual_error(&p, &f, 3), 0.0);
        let g = ProblemElement::basis(&p, mi(&[5, 9])).unwrap();
        assert!(apply_optimal(&p, &g, 3).is_empty());
    }

    #[test]
    fn rejects_non_canonical_support() {
        let p = antisym(2, EigenSequence::power_decay(1.0).unwrap());
        assert!(ProblemElement::basis(&p, mi(&[2, 2])).is_err());
    }

    #[test]
    fn worst_case_examples() {
        let p = antisym(2, EigenSequence::unit_rank(2).unwrap());
        let w = empirical_worst_case(&p, 0, 50, 7).unwrap();
        assert_eq!(w.witness_error, 1.0);
        assert!(w.empirical_max <= 1.0 + 1e-12);

        let p = antisym(2, EigenSequence::power_decay(1.0).unwrap());
        let w = empirical_worst_case(&p, 1, 200, 7).unwrap();
        assert!((w.witness_error - 1.0 / 3.0).abs() < 1e-15);
        assert!(w.empirical_max <= w.nth_error + 1e-12);
        assert!(w.empirical_max > 0.0);
        assert_eq!(w.witness, Some(mi(&[1, 3])));
    }

    #[test]
    fn worst_case_is_deterministic() {
        let p = antisym(3, EigenSequence::power_decay(0.5).unwrap());
        let a = empirical_worst_case(&p, 4, 100, 42).unwrap();
        let b = empirical_worst_case(&p, 4, 100, 42).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pythagoras(d in 1usize..=3, n in 0usize..12, entries in proptest::collection::vec((1usize..8, -1.0f64..1.0), 1..10)) {
            let p = Problem::new(SymmetryStructure::full(GroupKind::Symmetric, d).unwrap(), EigenSequence::power_decay(0.75).unwrap());
            let coeffs = SparseCoefficients::from_entries(entries.into_iter().map(|(m, c)| {
                let mut k = vec![1; d];
                k[d - 1] = m;
                (MultiIndex(k), c)
            }));
            let f = ProblemElement::new(&p, coeffs).unwrap();
            let total = apply_solution(&p, &f).norm_sq();
            let kept = apply_optimal(&p, &f, n).norm_sq();
            let r = residual_error(&p, &f, n);
            prop_assert!((total - kept - r * r).abs() <= 1e-12 * total.max(1e-300));
            for (k, _) in apply_optimal(&p, &f, n).iter() {
                prop_assert!(p.structure.is_canonical(k));
            }
        }
    }
}

//! Information complexity of linear tensor product problems restricted to
//! (anti-)symmetric subspaces.
//!
//! The univariate problem enters only through the non-increasing sequence
//! `λ` of squared singular values ([`spectrum::EigenSequence`]). Everything
//! else is derived from it: the `d`-variate eigenvalues `∏ λ_{k_l}` indexed
//! by canonical multi-indices ([`enumeration`]), the n-th minimal errors and
//! information complexities ([`complexity`]), a coefficient-space simulator
//! of the optimal linear algorithm ([`optimal`]) and tractability verdicts
//! ([`tractability`]). The [`symmetry`] module holds the permutation
//! machinery and the (anti-)symmetrizers acting on sparse coefficient
//! vectors.

pub mod complexity;
pub mod count;
pub mod enumeration;
pub mod error;
pub mod numeric;
pub mod optimal;
pub mod spectrum;
pub mod symmetry;
pub mod tractability;

pub use complexity::{Criterion, Problem};
pub use count::{Count, InfiniteReason, Tally};
pub use enumeration::{SpectrumItem, SpectrumStream};
pub use error::{Error, Result};
pub use numeric::{LogValue, Magnitude, Real};
pub use spectrum::EigenSequence;
pub use symmetry::{GroupKind, MultiIndex, SymmetryStructure};

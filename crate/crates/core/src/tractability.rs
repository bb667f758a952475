//! Polynomial and strong polynomial tractability of sequences of
//! (anti-)symmetric problems indexed by the dimension `d`.
//!
//! A [`StructureSchedule`] fixes the symmetry structure for every `d`. The
//! verdicts of [`classify`] are derived from the symbolic growth of the
//! number of constrained (`a_d`) and unconstrained (`b_d`) coordinates
//! together with `λ₁`, `λ₂` and the summability of `λ`; the numerical
//! checks in this module are attached to the report as witnesses and are
//! never used to certify an asymptotic statement on their own.

use std::cmp::Ordering;
use std::fmt;
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complexity::Criterion;
use crate::enumeration::{spectral_sum, top_eigenvalues};
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, Real};
use crate::spectrum::{DecayClass, EigenSequence};
use crate::symmetry::{GroupKind, SymmetryStructure};

/// Exponents `τ` probed for `λ ∈ ℓ_τ` unless configured otherwise.
pub const DEFAULT_TAU_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Dimensions `1..=D` over which witnesses are evaluated by default.
pub const DEFAULT_PROBE_DIMENSION: usize = 12;

/// Dimensions over which the antisymmetric inequalities are tabulated.
const INEQUALITY_PROBE: RangeInclusive<usize> = 1..=200;

/// Largest exponent tried when the grid misses a summable family.
const MAX_EXTENDED_TAU: f64 = 1_048_576.0;

/// RMS residual in `ln n` above which a power-law fit is flagged.
pub const NONPOLYNOMIAL_RESIDUAL: f64 = 0.25;

/// Relative tolerance for `λ = 1` and `λ₁ = λ₂` in float mode.
const EQUALITY_TOLERANCE: f64 = 1e-12;

/// Asymptotic growth of a coordinate count in `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Logarithmic,
    /// Unbounded, `o(d)` and not `O(ln d)`.
    Sublinear,
    Linear,
}

/// How the symmetry structure depends on the dimension.
///
/// Groups always occupy the leading coordinates; `a_d` is the total size of
/// the groups and `b_d = d − a_d`. Every rule keeps at least one coordinate
/// in a group, except [`StructureSchedule::Entire`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StructureSchedule {
    /// No symmetry constraints.
    Entire,
    FullySymmetric,
    FullyAntisymmetric,
    /// `b_d = min(free, d − 1)`.
    FixedFree { kind: GroupKind, free: usize },
    /// `b_d = min(⌈c·ln d⌉, d − 1)`.
    LogFree { kind: GroupKind, c: f64 },
    /// Two antisymmetric groups of sizes `⌈d/2⌉` and `⌊d/2⌋`.
    GroupedWave,
    /// `a_d = min(size, d)`.
    ConstantGroup { kind: GroupKind, size: usize },
    /// `a_d = ⌈d^exponent⌉` with `0 < exponent < 1`.
    PowerGroup { kind: GroupKind, exponent: f64 },
    /// `a_d = min(d, ⌈d / ln(d^alpha)⌉)`.
    DOverLog { kind: GroupKind, alpha: f64 },
    /// `a_d = sizes[d − 1]`; no asymptotics can be derived.
    Tabulated { kind: GroupKind, sizes: Vec<usize> },
}

/// Symbolic asymptotics of a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleShape {
    /// `None` for the unconstrained space.
    pub kind: Option<GroupKind>,
    /// Growth of `a_d`.
    pub grouped: Growth,
    /// Growth of `b_d`.
    pub free: Growth,
    /// `lim Σ_groups ln(a_{d,m}!) / d`, infinite for linear groups.
    pub factorial_rate: f64,
    /// Uniform bound on the largest group, if any.
    pub largest_group: Option<usize>,
}

impl StructureSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            StructureSchedule::LogFree { c, .. } if !(c.is_finite() && *c >= 0.0) => {
                bad(format!("log-free coefficient must be finite and non-negative, got {c}"))
            }
            StructureSchedule::ConstantGroup { size: 0, .. } => bad("constant group size must be positive".into()),
            StructureSchedule::PowerGroup { exponent, .. } if !(*exponent > 0.0 && *exponent < 1.0) => {
                bad(format!("group exponent must lie in (0, 1), got {exponent}"))
            }
            StructureSchedule::DOverLog { alpha, .. } if !(alpha.is_finite() && *alpha > 0.0) => {
                bad(format!("alpha must be positive, got {alpha}"))
            }
            StructureSchedule::Tabulated { sizes, .. } => {
                if sizes.is_empty() {
                    return bad("tabulated schedule is empty".into());
                }
                for (i, &a) in sizes.iter().enumerate() {
                    if a == 0 || a > i + 1 {
                        return bad(format!("tabulated group size {a} is not in 1..={} for d = {}", i + 1, i + 1));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Kind of the constrained coordinates, `None` for [`Self::Entire`].
    pub fn kind(&self) -> Option<GroupKind> {
        match self {
            StructureSchedule::Entire => None,
            StructureSchedule::FullySymmetric => Some(GroupKind::Symmetric),
            StructureSchedule::FullyAntisymmetric | StructureSchedule::GroupedWave => Some(GroupKind::Antisymmetric),
            StructureSchedule::FixedFree { kind, .. }
            | StructureSchedule::LogFree { kind, .. }
            | StructureSchedule::ConstantGroup { kind, .. }
            | StructureSchedule::PowerGroup { kind, .. }
            | StructureSchedule::DOverLog { kind, .. }
            | StructureSchedule::Tabulated { kind, .. } => Some(*kind),
        }
    }

    /// Sizes `a_{d,1}, a_{d,2}, …` of the groups in dimension `d`.
    pub fn group_sizes(&self, d: usize) -> Result<Vec<usize>> {
        self.validate()?;
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let df = d as f64;
        let a = match self {
            StructureSchedule::Entire => return Ok(Vec::new()),
            StructureSchedule::GroupedWave => {
                return Ok([d.div_ceil(2), d / 2].into_iter().filter(|&s| s > 0).collect());
            }
            StructureSchedule::FullySymmetric | StructureSchedule::FullyAntisymmetric => d,
            StructureSchedule::FixedFree { free, .. } => d - (*free).min(d - 1),
            StructureSchedule::LogFree { c, .. } => {
                let b = (c * df.ln()).ceil() as usize;
                d - b.min(d - 1)
            }
            StructureSchedule::ConstantGroup { size, .. } => (*size).min(d),
            StructureSchedule::PowerGroup { exponent, .. } => (df.powf(*exponent).ceil() as usize).clamp(1, d),
            StructureSchedule::DOverLog { alpha, .. } => {
                let denom = alpha * df.ln();
                if denom > 0.0 {
                    ((df / denom).ceil() as usize).clamp(1, d)
                } else {
                    d
                }
            }
            StructureSchedule::Tabulated { sizes, .. } => *sizes.get(d - 1).ok_or_else(|| {
                Error::InvalidArgument(format!("tabulated schedule has no entry for d = {d}"))
            })?,
        };
        Ok(vec![a])
    }

    /// `a_d`.
    pub fn grouped_count(&self, d: usize) -> Result<usize> {
        Ok(self.group_sizes(d)?.iter().sum())
    }

    /// `b_d`.
    pub fn free_count(&self, d: usize) -> Result<usize> {
        Ok(d - self.grouped_count(d)?)
    }

    pub fn structure(&self, d: usize) -> Result<SymmetryStructure> {
        let sizes = self.group_sizes(d)?;
        match self.kind() {
            None => SymmetryStructure::entire(d),
            Some(kind) => {
                let spec: Vec<_> = sizes.into_iter().map(|s| (s, kind)).collect();
                SymmetryStructure::contiguous(d, &spec)
            }
        }
    }

    pub fn shape(&self) -> Result<ScheduleShape> {
        self.validate()?;
        let kind = self.kind();
        let (grouped, free, factorial_rate, largest_group) = match self {
            StructureSchedule::Entire => (Growth::Bounded, Growth::Linear, 0.0, Some(0)),
            StructureSchedule::FullySymmetric
            | StructureSchedule::FullyAntisymmetric
            | StructureSchedule::GroupedWave
            | StructureSchedule::FixedFree { .. } => (Growth::Linear, Growth::Bounded, f64::INFINITY, None),
            StructureSchedule::LogFree { c, .. } => {
                let free = if *c == 0.0 { Growth::Bounded } else { Growth::Logarithmic };
                (Growth::Linear, free, f64::INFINITY, None)
            }
            StructureSchedule::ConstantGroup { size, .. } => (Growth::Bounded, Growth::Linear, 0.0, Some(*size)),
            StructureSchedule::PowerGroup { .. } => (Growth::Sublinear, Growth::Linear, 0.0, None),
            StructureSchedule::DOverLog { alpha, .. } => (Growth::Sublinear, Growth::Linear, 1.0 / alpha, None),
            StructureSchedule::Tabulated { .. } => {
                return Err(Error::UnknownAsymptotics(
                    "a tabulated schedule fixes finitely many dimensions only".into(),
                ))
            }
        };
        Ok(ScheduleShape { kind, grouped, free, factorial_rate, largest_group })
    }
}

impl fmt::Display for StructureSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureSchedule::Entire => write!(f, "entire"),
            StructureSchedule::FullySymmetric => write!(f, "fully symmetric"),
            StructureSchedule::FullyAntisymmetric => write!(f, "fully antisymmetric"),
            StructureSchedule::FixedFree { kind, free } => write!(f, "{kind}, b_d = {free}"),
            StructureSchedule::LogFree { kind, c } => write!(f, "{kind}, b_d = ⌈{c}·ln d⌉"),
            StructureSchedule::GroupedWave => write!(f, "two antisymmetric groups ⌈d/2⌉ + ⌊d/2⌋"),
            StructureSchedule::ConstantGroup { kind, size } => write!(f, "{kind}, a_d = {size}"),
            StructureSchedule::PowerGroup { kind, exponent } => write!(f, "{kind}, a_d = ⌈d^{exponent}⌉"),
            StructureSchedule::DOverLog { kind, alpha } => write!(f, "{kind}, a_d = ⌈d/ln(d^{alpha})⌉"),
            StructureSchedule::Tabulated { kind, sizes } => write!(f, "{kind}, tabulated a_d for d ≤ {}", sizes.len()),
        }
    }
}

/// Number `f(d)` of the leading eigenvalue whose term is the first one kept
/// in the sum condition; the `f(d) − 1` largest are omitted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CutoffRule {
    Constant { value: usize },
    /// `f(d) = ⌈c·d^q⌉`.
    Polynomial { c: f64, q: f64 },
}

impl CutoffRule {
    pub const NONE_OMITTED: CutoffRule = CutoffRule::Constant { value: 1 };

    pub fn at(&self, d: usize) -> usize {
        match self {
            CutoffRule::Constant { value } => (*value).max(1),
            CutoffRule::Polynomial { c, q } => ((c * (d as f64).powf(*q)).ceil() as usize).max(1),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CutoffRule::Polynomial { c, q } if !(c.is_finite() && *c > 0.0 && q.is_finite() && *q >= 0.0) => {
                Err(Error::InvalidArgument(format!("cutoff needs c > 0 and q ≥ 0, got c = {c}, q = {q}")))
            }
            _ => Ok(()),
        }
    }
}

/// One dimension of a sum condition: `d^{−r} (Σ_{i ≥ f(d)} λ_{d,i}^τ)^{1/τ}`
/// with certified bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SumPoint {
    pub d: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// Non-increasing over the probed dimensions.
    Decreasing,
    /// Grows by a factor of at least 1.2 per step.
    Diverging,
    /// Non-decreasing, but not geometrically.
    Growing,
    Mixed,
}

/// Minimal growth factor per dimension step reported as [`Trend::Diverging`].
pub const DIVERGING_FACTOR: f64 = 1.2;

fn trend_of(values: &[f64]) -> Trend {
    if values.len() < 2 {
        return Trend::Mixed;
    }
    let pairs = || values.windows(2);
    if pairs().all(|w| w[1] <= w[0] * (1.0 + 1e-12)) {
        Trend::Decreasing
    } else if pairs().all(|w| w[1] >= DIVERGING_FACTOR * w[0]) {
        Trend::Diverging
    } else if pairs().all(|w| w[1] >= w[0]) {
        Trend::Growing
    } else {
        Trend::Mixed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumCondition {
    pub criterion: Criterion,
    pub tau: f64,
    pub r: f64,
    pub points: Vec<SumPoint>,
    /// Largest per-dimension value over the probed range.
    pub sup: f64,
    pub trend: Trend,
}

fn sum_condition(
    schedule: &StructureSchedule,
    seq: &EigenSequence,
    tau: f64,
    r: f64,
    cutoff: CutoffRule,
    dims: RangeInclusive<usize>,
    criterion: Criterion,
) -> Result<SumCondition> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("τ must be positive, got {tau}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("r must be non-negative, got {r}")));
    }
    cutoff.validate()?;
    if dims.is_empty() || *dims.start() == 0 {
        return Err(Error::InvalidArgument("dimension range must be non-empty and start at 1 or later".into()));
    }
    let mut points = Vec::new();
    for d in dims {
        let structure = schedule.structure(d)?;
        let total = spectral_sum(&structure, seq, tau)?.finite(format!("Σ λ_{{d,k}}^τ at d = {d}, τ = {tau}"))?;
        let omitted = cutoff.at(d) - 1;
        let wanted = match criterion {
            Criterion::Absolute => omitted,
            Criterion::Normalized => omitted.max(1),
        };
        let top = top_eigenvalues(&structure, seq, wanted);
        let (scale_ln, zero) = match criterion {
            Criterion::Absolute => (0.0, false),
            Criterion::Normalized => match top.first() {
                Some(item) => (-tau * item.value.0, false),
                None => (0.0, true),
            },
        };
        if zero || total.value == 0.0 {
            points.push(SumPoint { d, value: 0.0, lower: 0.0, upper: 0.0 });
            continue;
        }
        let head: f64 = top.iter().take(omitted).map(|item| (tau * item.value.0).exp()).sum();
        let head_err = head * 1e-13;
        let scale = scale_ln.exp();
        let rest = (total.value - head).max(0.0) * scale;
        let lower = (total.lower() - head - head_err).max(0.0) * scale;
        let upper = (total.upper() - head + head_err).max(0.0) * scale;
        let weight = (d as f64).powf(-r);
        let root = |x: f64| weight * x.powf(1.0 / tau);
        points.push(SumPoint { d, value: root(rest), lower: root(lower), upper: root(upper) });
    }
    let values: Vec<f64> = points.iter().map(|p| p.value).collect();
    Ok(SumCondition {
        criterion,
        tau,
        r,
        sup: values.iter().copied().fold(0.0, f64::max),
        trend: trend_of(&values),
        points,
    })
}

/// Per-dimension values `d^{−r} (Σ_{i ≥ f(d)} λ_{d,i}^τ)^{1/τ}` of the sum
/// that is bounded in `d` exactly for polynomially tractable problems under
/// the absolute criterion, and their supremum over `dims`.
pub fn check_sum_condition_abs(
    schedule: &StructureSchedule,
    seq: &EigenSequence,
    tau: f64,
    r: f64,
    cutoff: CutoffRule,
    dims: RangeInclusive<usize>,
) -> Result<SumCondition> {
    sum_condition(schedule, seq, tau, r, cutoff, dims, Criterion::Absolute)
}

/// [`check_sum_condition_abs`] with every eigenvalue divided by the
/// largest one, `λ_{d,i} / λ_{d,1}`.
pub fn check_sum_condition_norm(
    schedule: &StructureSchedule,
    seq: &EigenSequence,
    tau: f64,
    r: f64,
    cutoff: CutoffRule,
    dims: RangeInclusive<usize>,
) -> Result<SumCondition> {
    sum_condition(schedule, seq, tau, r, cutoff, dims, Criterion::Normalized)
}

fn antisymmetric_groups(schedule: &StructureSchedule) -> Result<()> {
    match schedule.kind() {
        Some(GroupKind::Antisymmetric) => Ok(()),
        _ => Err(Error::InvalidArgument(format!("schedule `{schedule}` has no antisymmetric groups"))),
    }
}

/// `‖λ‖_τ^τ`, or an error when the series diverges.
fn norm_power(seq: &EigenSequence, tau: f64) -> Result<crate::spectrum::PowerSum> {
    seq.power_sum(tau, 1).finite(format!("λ ∉ ℓ_τ for τ = {tau}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityPoint {
    pub d: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SufficientOutcome {
    /// Holds for every probed `d ≥ d0`.
    HoldsFrom { d0: usize },
    /// Fails at the largest probed dimension.
    Fails,
    /// `λ₁ < 1`: some `τ` makes `‖λ‖_τ^τ ≤ 1/2`, so the right-hand side is
    /// negative for every schedule.
    FirstEigenvalueBelowOne { tau: f64, norm_power: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SufficientCheck {
    pub tau: f64,
    pub outcome: SufficientOutcome,
    /// `lhs = Σ_groups ln(a_{d,m}!) / d`, `rhs = ln ‖λ‖_τ^τ`.
    pub points: Vec<InequalityPoint>,
}

fn first_below_one(seq: &EigenSequence) -> bool {
    compare_eigenvalue(seq, 1, 1.0) == Ordering::Less
}

/// Evaluates the sufficient condition `Σ_groups ln(a_{d,m}!)/d ≥ ln ‖λ‖_τ^τ`
/// for strong polynomial tractability of antisymmetric problems under the
/// absolute criterion.
pub fn sufficient_antisymmetric(
    schedule: &StructureSchedule,
    seq: &EigenSequence,
    tau: f64,
    dims: RangeInclusive<usize>,
) -> Result<SufficientCheck> {
    antisymmetric_groups(schedule)?;
    let norm = norm_power(seq, tau)?;
    if first_below_one(seq) {
        let mut t = tau;
        for _ in 0..64 {
            let s = seq.power_sum(t, 1);
            if !s.is_divergent() && s.upper() <= 0.5 {
                return Ok(SufficientCheck {
                    tau,
                    outcome: SufficientOutcome::FirstEigenvalueBelowOne { tau: t, norm_power: s.value },
                    points: Vec::new(),
                });
            }
            t *= 2.0;
        }
    }
    let rhs = norm.upper().ln();
    let mut points = Vec::new();
    for d in dims {
        let lhs = schedule.group_sizes(d)?.into_iter().map(ln_factorial).sum::<f64>() / d as f64;
        points.push(InequalityPoint { d, lhs, rhs, holds: lhs >= rhs });
    }
    let tail_start = points.iter().rposition(|p| !p.holds).map_or(0, |i| i + 1);
    let outcome = match points.get(tail_start) {
        Some(p) => SufficientOutcome::HoldsFrom { d0: p.d },
        None => SufficientOutcome::Fails,
    };
    Ok(SufficientCheck { tau, outcome, points })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum NecessaryOutcome {
    /// `λ₁ < 1`; the bound is only needed when `λ₁ ≥ 1`.
    NotApplicable,
    HoldsThroughout,
    /// Violated for every probed `d ≥ from`.
    ViolatedFrom { from: usize },
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NecessaryCheck {
    pub tau: f64,
    pub delta: f64,
    pub outcome: NecessaryOutcome,
    /// `lhs = ln ‖λ‖_τ^τ − δ`, `rhs = (1/d) Σ_groups Σ_{k ≤ a_{d,m}} ln(‖λ‖_τ^τ / λ_k^τ)`.
    pub points: Vec<InequalityPoint>,
}

/// Evaluates the bound on the antisymmetric coordinates that every
/// polynomially tractable antisymmetric problem with `λ₁ ≥ 1` satisfies
/// for large `d`.
pub fn necessary_antisymmetric_bound(
    schedule: &StructureSchedule,
    seq: &EigenSequence,
    tau: f64,
    delta: f64,
    dims: RangeInclusive<usize>,
) -> Result<NecessaryCheck> {
    antisymmetric_groups(schedule)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("δ must be positive, got {delta}")));
    }
    let ln_norm = norm_power(seq, tau)?.value.ln();
    if first_below_one(seq) {
        return Ok(NecessaryCheck { tau, delta, outcome: NecessaryOutcome::NotApplicable, points: Vec::new() });
    }
    let lhs = ln_norm - delta;
    let mut points = Vec::new();
    let mut prefix = vec![0.0];
    for d in dims {
        let mut total = 0.0;
        for a in schedule.group_sizes(d)? {
            while prefix.len() <= a {
                let k = prefix.len();
                let term = ln_norm - tau * seq.ln_eigenvalue(k);
                prefix.push(prefix[k - 1] + term);
            }
            total += prefix[a];
        }
        let rhs = total / d as f64;
        points.push(InequalityPoint { d, lhs, rhs, holds: lhs <= rhs });
    }
    let outcome = if points.iter().all(|p| p.holds) {
        NecessaryOutcome::HoldsThroughout
    } else {
        let tail_start = points.iter().rposition(|p| p.holds).map_or(0, |i| i + 1);
        match points.get(tail_start) {
            Some(p) => NecessaryOutcome::ViolatedFrom { from: p.d },
            None => NecessaryOutcome::Mixed,
        }
    };
    Ok(NecessaryCheck { tau, delta, outcome, points })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    #[serde(rename = "StrongPolyTract")]
    StrongPolyTract,
    #[serde(rename = "PolyTract-not-Strong")]
    PolyTractNotStrong,
    #[serde(rename = "PolyIntractable")]
    PolyIntractable,
    #[serde(rename = "Curse")]
    Curse,
    #[serde(rename = "Indeterminate")]
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::StrongPolyTract => "StrongPolyTract",
            Verdict::PolyTractNotStrong => "PolyTract-not-Strong",
            Verdict::PolyIntractable => "PolyIntractable",
            Verdict::Curse => "Curse",
            Verdict::Indeterminate => "Indeterminate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Quantities that decided a verdict, plus numerical evaluations for
/// inspection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witnesses {
    pub schedule: String,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Smallest probed `τ` with `λ ∈ ℓ_τ`.
    pub tau: Option<f64>,
    /// `‖λ‖_τ` for that `τ`.
    pub lp_norm: Option<f64>,
    pub grouped_growth: Growth,
    pub free_growth: Growth,
    pub sum_condition: Option<SumCondition>,
    pub sufficient: Option<SufficientCheck>,
    pub necessary: Option<NecessaryCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TractabilityReport {
    pub verdict: Verdict,
    pub criterion: Criterion,
    /// The condition that decided the verdict.
    pub clause: String,
    /// Whether the problem is strongly polynomially tractable, if known.
    pub strong: Option<bool>,
    /// Whether the problem is polynomially tractable, if known.
    pub polynomial: Option<bool>,
    pub witnesses: Witnesses,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    /// Strictly increasing exponents probed for `λ ∈ ℓ_τ`.
    pub tau_grid: Vec<f64>,
    /// Witness sums are evaluated for `d = 1..=probe_dimension`.
    pub probe_dimension: usize,
    /// Slack of the necessary antisymmetric bound.
    pub delta: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { tau_grid: DEFAULT_TAU_GRID.to_vec(), probe_dimension: DEFAULT_PROBE_DIMENSION, delta: 0.05 }
    }
}

/// `λ_m` against a constant, exactly when the family is rational.
fn compare_eigenvalue(seq: &EigenSequence, m: usize, c: f64) -> Ordering {
    if let (Some(q), Ok(cq)) = (seq.exact_eigenvalue(m), crate::numeric::rational_from_f64(c)) {
        return q.cmp(&cq);
    }
    let x = seq.eigenvalue(m);
    if (x - c).abs() <= EQUALITY_TOLERANCE * c.abs().max(x.abs()) {
        Ordering::Equal
    } else {
        x.partial_cmp(&c).unwrap_or(Ordering::Equal)
    }
}

/// `λ₂` against `λ₁`.
fn compare_second(seq: &EigenSequence) -> Ordering {
    if let (Some(a), Some(b)) = (seq.exact_eigenvalue(2), seq.exact_eigenvalue(1)) {
        return a.cmp(&b);
    }
    let (a, b) = (seq.eigenvalue(2), seq.eigenvalue(1));
    if (a - b).abs() <= EQUALITY_TOLERANCE * b {
        Ordering::Equal
    } else {
        a.partial_cmp(&b).unwrap_or(Ordering::Equal)
    }
}

/// Smallest grid exponent with `λ ∈ ℓ_τ`. Families whose decay is at least
/// polynomial are summable for some `τ`; for them the grid is extended by
/// doubling its last entry.
pub fn summability_exponent(seq: &EigenSequence, tau_grid: &[f64]) -> Result<Option<f64>> {
    if let Some(tau) = seq.find_tau_membership(tau_grid)? {
        return Ok(Some(tau));
    }
    match seq.decay_class() {
        DecayClass::SubPolynomial | DecayClass::NonCompact => Ok(None),
        _ => {
            let mut tau = *tau_grid.last().expect("validated non-empty");
            while tau < MAX_EXTENDED_TAU {
                tau *= 2.0;
                if !seq.power_sum(tau, 1).is_divergent() {
                    return Ok(Some(tau));
                }
            }
            Ok(None)
        }
    }
}

struct Decision {
    strong: Option<bool>,
    polynomial: Option<bool>,
    curse: bool,
    clause: String,
}

impl Decision {
    fn strong(clause: impl Into<String>) -> Self {
        Decision { strong: Some(true), polynomial: Some(true), curse: false, clause: clause.into() }
    }

    fn polynomial_only(clause: impl Into<String>) -> Self {
        Decision { strong: Some(false), polynomial: Some(true), curse: false, clause: clause.into() }
    }

    fn intractable(curse: bool, clause: impl Into<String>) -> Self {
        Decision { strong: Some(false), polynomial: Some(false), curse, clause: clause.into() }
    }

    fn open(strong: Option<bool>, clause: impl Into<String>) -> Self {
        Decision { strong, polynomial: None, curse: false, clause: clause.into() }
    }

    fn verdict(&self) -> Verdict {
        match (self.strong, self.polynomial) {
            (Some(true), _) => Verdict::StrongPolyTract,
            (Some(false), Some(true)) => Verdict::PolyTractNotStrong,
            (_, Some(false)) if self.curse => Verdict::Curse,
            (_, Some(false)) => Verdict::PolyIntractable,
            _ => Verdict::Indeterminate,
        }
    }
}

/// Symmetric groups (or none). Under the normalized criterion the problem
/// equals the absolute one for `λ / λ₁`, so only `λ₂ / λ₁` matters.
fn symmetric_tree(criterion: Criterion, seq: &EigenSequence, shape: &ScheduleShape) -> Decision {
    let (first, second) = match criterion {
        Criterion::Absolute => (compare_eigenvalue(seq, 1, 1.0), compare_eigenvalue(seq, 2, 1.0)),
        Criterion::Normalized => (Ordering::Equal, compare_second(seq)),
    };
    let b = shape.free;
    let unconstrained = if shape.kind.is_none() { "no symmetry constraints" } else { "symmetric groups" };
    match first {
        Ordering::Less => Decision::strong(format!("{unconstrained}, λ₁ < 1 and λ ∈ ℓ_τ")),
        Ordering::Equal => {
            let lead = match criterion {
                Criterion::Absolute => "λ₁ = 1",
                Criterion::Normalized => "normalized by λ₁",
            };
            if b == Growth::Bounded && second == Ordering::Less {
                Decision::strong(format!("{unconstrained}, {lead}, λ₂ < λ₁, λ ∈ ℓ_τ and b_d ∈ O(1)"))
            } else if b <= Growth::Logarithmic {
                let why = if second != Ordering::Less { "λ₂ = λ₁" } else { "b_d ∉ O(1)" };
                Decision::polynomial_only(format!(
                    "{unconstrained}, {lead}, λ ∈ ℓ_τ and b_d ∈ O(ln d) give polynomial tractability; {why} excludes strong"
                ))
            } else if b == Growth::Linear && second != Ordering::Less {
                Decision::intractable(
                    true,
                    format!("{unconstrained}, {lead}, λ₂ = λ₁ with linearly many unconstrained coordinates: n(ε,d) ≥ 2^{{b_d}}"),
                )
            } else {
                Decision::intractable(false, format!("{unconstrained}, {lead} and b_d ∉ O(ln d)"))
            }
        }
        Ordering::Greater => {
            if b > Growth::Logarithmic {
                let curse = b == Growth::Linear;
                Decision::intractable(
                    curse,
                    if curse {
                        format!("{unconstrained}, λ₁ > 1 with linearly many unconstrained coordinates: exponentially many eigenvalues exceed 1")
                    } else {
                        format!("{unconstrained}, λ₁ ≥ 1 requires b_d ∈ O(ln d)")
                    },
                )
            } else {
                let product_small = seq.eigenvalue(1) * seq.eigenvalue(2) < 1.0;
                let strong = if b == Growth::Bounded && product_small { None } else { Some(false) };
                Decision::open(
                    strong,
                    format!("{unconstrained}, λ₁ > 1: only necessary conditions are available (b_d ∈ O(ln d), and b_d ∈ O(1), λ₂ < 1/λ₁ for strong)"),
                )
            }
        }
    }
}

fn antisymmetric_tree(
    criterion: Criterion,
    seq: &EigenSequence,
    shape: &ScheduleShape,
    schedule: &StructureSchedule,
    tau: f64,
    options: &ClassifyOptions,
    witnesses: &mut Witnesses,
) -> Result<Decision> {
    if let Some(rank) = seq.positive_count() {
        let vanishes = match shape.largest_group {
            None => true,
            Some(a) => a > rank,
        };
        if vanishes {
            return Ok(Decision::strong(format!(
                "antisymmetric groups eventually exceed the {rank} positive eigenvalues, so the problems vanish for large d"
            )));
        }
    }
    let first = compare_eigenvalue(seq, 1, 1.0);
    let second = compare_eigenvalue(seq, 2, 1.0);
    match criterion {
        Criterion::Absolute => {
            if first == Ordering::Less {
                return Ok(Decision::strong("antisymmetric groups, λ₁ < 1: strong ⇔ polynomial ⇔ λ ∈ ℓ_τ"));
            }
            match shape.grouped {
                Growth::Linear => Ok(Decision::strong(
                    "antisymmetric groups growing linearly in d, λ₁ ≥ 1: strong ⇔ polynomial ⇔ λ ∈ ℓ_τ",
                )),
                Growth::Bounded | Growth::Logarithmic if shape.largest_group.is_some() => {
                    let curse = shape.free == Growth::Linear && (first == Ordering::Greater || second != Ordering::Less);
                    Ok(Decision::intractable(
                        curse,
                        if curse {
                            "bounded antisymmetric groups, λ₁ ≥ 1 and λ₁ > 1 or λ₂ ≥ 1: the unconstrained coordinates make n(ε,d) grow exponentially"
                                .to_string()
                        } else {
                            "λ₁ ≥ 1 requires the number of antisymmetric coordinates to tend to infinity".to_string()
                        },
                    ))
                }
                _ => {
                    let probe = INEQUALITY_PROBE;
                    witnesses.sufficient = Some(sufficient_antisymmetric(schedule, seq, tau, probe.clone())?);
                    witnesses.necessary =
                        Some(necessary_antisymmetric_bound(schedule, seq, tau, options.delta, probe)?);
                    let mut candidates: Vec<f64> = options.tau_grid.iter().copied().filter(|&t| t >= tau).collect();
                    let mut t = tau;
                    for _ in 0..6 {
                        t *= 2.0;
                        candidates.push(t);
                    }
                    for t in candidates {
                        let s = seq.power_sum(t, 1);
                        if !s.is_divergent() && s.upper().ln() < shape.factorial_rate {
                            return Ok(Decision::strong(format!(
                                "λ₁ ≥ 1, lim Σ ln(a_{{d,m}}!)/d = {:.6} exceeds ln ‖λ‖_τ^τ = {:.6} at τ = {t}",
                                shape.factorial_rate,
                                s.upper().ln()
                            )));
                        }
                    }
                    if seq.decay_class() == DecayClass::Polynomial && shape.factorial_rate == 0.0 {
                        return Ok(Decision::intractable(
                            false,
                            "λ₁ ≥ 1, polynomially decaying λ and a_d·ln a_d = o(d): the necessary bound on the antisymmetric coordinates fails for large d",
                        ));
                    }
                    Ok(Decision::open(
                        None,
                        "λ₁ ≥ 1 with sublinear antisymmetric groups: the sufficient and the necessary condition leave a gap",
                    ))
                }
            }
        }
        Criterion::Normalized => {
            if shape.free > Growth::Logarithmic {
                let curse =
                    shape.free == Growth::Linear && shape.largest_group.is_some() && compare_second(seq) == Ordering::Equal;
                return Ok(Decision::intractable(
                    curse,
                    if curse {
                        "normalized, bounded antisymmetric groups and λ₂ = λ₁: n(ε,d) ≥ 2^{b_d}"
                    } else {
                        "normalized, antisymmetric groups: polynomial tractability requires b_d ∈ O(ln d)"
                    },
                ));
            }
            if shape.free == Growth::Logarithmic {
                return Ok(Decision::open(
                    Some(false),
                    "normalized, antisymmetric groups: strong tractability requires b_d ∈ O(1)",
                ));
            }
            if shape.grouped > Growth::Bounded && seq.decay_class() == DecayClass::Polynomial {
                return Ok(Decision::open(
                    Some(false),
                    "normalized, antisymmetric groups with polynomially decaying λ: n(ε′·ε_init, d) grows at least linearly in d",
                ));
            }
            Ok(Decision::open(
                None,
                "normalized, antisymmetric groups with b_d ∈ O(1): only necessary conditions are available",
            ))
        }
    }
}

/// Tractability verdict for the sequence of problems given by a schedule
/// and a univariate spectrum.
pub fn classify(
    schedule: &StructureSchedule,
    seq: &EigenSequence,
    criterion: Criterion,
    options: &ClassifyOptions,
) -> Result<TractabilityReport> {
    let shape = schedule.shape()?;
    let mut witnesses = Witnesses {
        schedule: schedule.to_string(),
        lambda1: seq.eigenvalue(1),
        lambda2: seq.eigenvalue(2),
        tau: None,
        lp_norm: None,
        grouped_growth: shape.grouped,
        free_growth: shape.free,
        sum_condition: None,
        sufficient: None,
        necessary: None,
    };
    let decision = if compare_eigenvalue(seq, 2, 0.0) == Ordering::Equal {
        Decision::strong("λ₂ = 0: at most one eigenvalue is positive in every dimension, one functional suffices")
    } else if seq.decay_class() == DecayClass::NonCompact {
        Decision::intractable(false, "λ_m does not tend to zero: n(ε,d) is infinite for small ε")
    } else {
        match summability_exponent(seq, &options.tau_grid)? {
            None => Decision::intractable(false, "λ ∉ ℓ_τ for every probed τ, but summability is necessary"),
            Some(tau) => {
                witnesses.tau = Some(tau);
                witnesses.lp_norm = Some(seq.power_sum(tau, 1).value.powf(1.0 / tau));
                if options.probe_dimension > 0 {
                    witnesses.sum_condition = sum_condition(
                        schedule,
                        seq,
                        tau,
                        0.0,
                        CutoffRule::NONE_OMITTED,
                        1..=options.probe_dimension,
                        criterion,
                    )
                    .ok();
                }
                match shape.kind {
                    Some(GroupKind::Antisymmetric) => {
                        antisymmetric_tree(criterion, seq, &shape, schedule, tau, options, &mut witnesses)?
                    }
                    _ => symmetric_tree(criterion, seq, &shape),
                }
            }
        }
    };
    Ok(TractabilityReport {
        verdict: decision.verdict(),
        criterion,
        clause: decision.clause,
        strong: decision.strong,
        polynomial: decision.polynomial,
        witnesses,
    })
}

/// Both sides of the estimate
/// `Σ_{k₁ ≤ … ≤ k_d} μ_{d,k} ≤ μ₁^d d^V (1 + V + Σ_{L=1}^d μ₁^{−L} Σ_{V+2 ≤ j₁ ≤ … ≤ j_L} μ_{L,j})`
/// for a finitely supported non-increasing `μ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AppendixCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// `Σ` over non-decreasing `len`-tuples of indices `≥ from` (0-based) of the
/// product of the entries, by exhaustive enumeration.
fn ordered_tuple_sum<T: Real>(mu: &[T], from: usize, len: usize) -> T {
    if len == 0 {
        return T::one();
    }
    let mut acc = T::zero();
    for i in from..mu.len() {
        acc = acc.add(&mu[i].mul(&ordered_tuple_sum(mu, i, len - 1)));
    }
    acc
}

pub fn verify_appendix_inequality<T: Real>(mu: &[T], d: usize, v: usize) -> Result<AppendixCheck<T>> {
    if mu.is_empty() || mu[0] <= T::zero() {
        return Err(Error::InvalidArgument("μ₁ must be positive".into()));
    }
    if mu.iter().any(|x| *x < T::zero()) || mu.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("μ must be non-negative and non-increasing".into()));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let lhs = ordered_tuple_sum(mu, 0, d);
    let inv = T::one().div(&mu[0]);
    let mut inner = T::from_ratio(1 + v as i64, 1);
    for l in 1..=d {
        inner = inner.add(&inv.powi(l as u32).mul(&ordered_tuple_sum(mu, v + 1, l)));
    }
    let rhs = mu[0].powi(d as u32).mul(&T::from_ratio(d as i64, 1).powi(v as u32)).mul(&inner);
    let holds = if T::is_exact() { lhs <= rhs } else { lhs.to_f64() <= rhs.to_f64() * (1.0 + 1e-12) };
    Ok(AppendixCheck { lhs, rhs, holds })
}

/// One observed complexity value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub eps: f64,
    pub d: usize,
    pub n: u64,
}

/// Least-squares fit `n ≈ C ε^{−p} d^q` on a log scale. Advisory only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub p: f64,
    pub q: f64,
    pub c: f64,
    /// RMS residual of `ln n`.
    pub residual: f64,
    /// False when the residual exceeds [`NONPOLYNOMIAL_RESIDUAL`].
    pub polynomial_plausible: bool,
}

pub fn fit_exponents(grid: &[GridPoint]) -> Result<ExponentFit> {
    for g in grid {
        if g.n == 0 || g.d == 0 || !(g.eps > 0.0 && g.eps.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid points need n ≥ 1, d ≥ 1 and ε > 0, got (ε = {}, d = {}, n = {})",
                g.eps, g.d, g.n
            )));
        }
    }
    if grid.len() < 3 {
        return Err(Error::DegenerateGrid(format!("{} points cannot determine three parameters", grid.len())));
    }
    let rows = grid.len();
    let design = DMatrix::from_fn(rows, 3, |i, j| match j {
        0 => 1.0,
        1 => -grid[i].eps.ln(),
        _ => (grid[i].d as f64).ln(),
    });
    let target = DVector::from_iterator(rows, grid.iter().map(|g| (g.n as f64).ln()));
    let svd = design.clone().svd(true, true);
    let largest = svd.singular_values.max();
    let smallest = svd.singular_values.min();
    if smallest.partial_cmp(&(1e-10 * largest)) != Some(Ordering::Greater) {
        return Err(Error::DegenerateGrid(
            "ln(1/ε), ln d and the constant are linearly dependent on this grid".into(),
        ));
    }
    let coef = svd.solve(&target, 0.0).map_err(|e| Error::DegenerateGrid(e.to_string()))?;
    let resid = &target - &design * &coef;
    let residual = (resid.norm_squared() / rows as f64).sqrt();
    Ok(ExponentFit {
        p: coef[1],
        q: coef[2],
        c: coef[0].exp(),
        residual,
        polynomial_plausible: residual <= NONPOLYNOMIAL_RESIDUAL,
    })
}

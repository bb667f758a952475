//! Univariate eigenvalue sequences `λ₁ ≥ λ₂ ≥ … ≥ 0` and their `ℓ_τ` sums.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::count::{Count, InfiniteReason, Tally};
use crate::error::{Error, Result};
use crate::numeric::{rational_from_f64, rational_to_f64, LogValue, Magnitude, ThresholdCmp};

/// Default probing horizon for searches over eigenvalue indices.
pub const DEFAULT_HORIZON: u64 = 1_000_000;

/// Continuation of an explicit list beyond its last entry `λ_L`.
#[derive(Clone, Debug, PartialEq)]
pub enum TailRule {
    /// `λ_m = 0` for `m > L`.
    Zero,
    /// `λ_{L+j} = λ_L · ratio^j`.
    Geometric { ratio: BigRational },
    /// `λ_m = λ_L · (L/m)^exponent`.
    Power { exponent: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// Finitely many values, zero afterwards.
    FiniteRank(Vec<BigRational>),
    /// `λ_m = m^(−2α)`.
    PowerDecay { alpha: f64 },
    /// `λ₁ = 1`, `λ_{j+1} = j^(−β)`.
    ShiftedPower { beta: f64 },
    /// `λ_m = scale · ratio^(m−1)`.
    Geometric { ratio: BigRational, scale: BigRational },
    /// `λ_m = 1 / ln(m + 1)`.
    LogDecay,
    /// Finite list continued by a tail rule.
    Explicit { values: Vec<BigRational>, tail: TailRule },
}

/// Qualitative decay of `λ_m`, used where asymptotic statements need it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    FiniteSupport,
    Geometric,
    /// `ln(1/λ_m) = Θ(ln m)`.
    Polynomial,
    /// Slower than any inverse polynomial, but tending to zero.
    SubPolynomial,
    /// Does not tend to zero.
    NonCompact,
}

/// A validated non-increasing sequence of squared singular values.
///
/// Every value is `scale · f(m)` where `f` is the family's closed form; the
/// scale is 1 unless the sequence was produced by [`EigenSequence::rescaled`].
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSequence {
    family: Family,
    scale_ln: f64,
    scale_exact: Option<BigRational>,
}

/// Truncated power sum with a certified absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerSum {
    pub value: f64,
    pub error_bound: f64,
}

impl PowerSum {
    pub fn divergent() -> Self {
        PowerSum { value: f64::INFINITY, error_bound: 0.0 }
    }

    pub fn exact(value: f64) -> Self {
        PowerSum { value, error_bound: 0.0 }
    }

    pub fn is_divergent(&self) -> bool {
        self.value.is_infinite()
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }

    pub fn lower(&self) -> f64 {
        (self.value - self.error_bound).max(0.0)
    }

    /// Converts divergence into [`Error::Divergent`].
    pub fn finite(self, what: impl fmt::Display) -> Result<Self> {
        if self.is_divergent() {
            Err(Error::Divergent(what.to_string()))
        } else {
            Ok(self)
        }
    }
}

fn check_list(values: &[BigRational]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidSequence("empty value list".into()));
    }
    if values.iter().any(|v| v < &<BigRational as Zero>::zero()) {
        return Err(Error::InvalidSequence("negative eigenvalue".into()));
    }
    if let Some(pos) = values.windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::InvalidSequence(format!(
            "values must be non-increasing, but λ_{} = {} < λ_{} = {}",
            pos + 1,
            values[pos],
            pos + 2,
            values[pos + 1]
        )));
    }
    if Zero::is_zero(&values[0]) {
        return Err(Error::InvalidSequence("λ₁ = 0 (zero operator)".into()));
    }
    Ok(())
}

fn to_rationals(values: &[f64]) -> Result<Vec<BigRational>> {
    values.iter().map(|&v| rational_from_f64(v)).collect()
}

impl EigenSequence {
    fn unscaled(family: Family) -> Self {
        EigenSequence { family, scale_ln: 0.0, scale_exact: Some(<BigRational as One>::one()) }
    }

    pub fn finite_rank(values: &[f64]) -> Result<Self> {
        Self::finite_rank_exact(to_rationals(values)?)
    }

    pub fn finite_rank_exact(values: Vec<BigRational>) -> Result<Self> {
        check_list(&values)?;
        Ok(Self::unscaled(Family::FiniteRank(values)))
    }

    /// `m` ones followed by zeros.
    pub fn unit_rank(m: usize) -> Result<Self> {
        Self::finite_rank_exact(vec![<BigRational as One>::one(); m])
    }

    pub fn power_decay(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidSequence(format!("power decay needs α > 0, got {alpha}")));
        }
        Ok(Self::unscaled(Family::PowerDecay { alpha }))
    }

    pub fn shifted_power(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidSequence(format!("shifted power needs β ≥ 0, got {beta}")));
        }
        Ok(Self::unscaled(Family::ShiftedPower { beta }))
    }

    pub fn geometric(ratio: f64, scale: f64) -> Result<Self> {
        Self::geometric_exact(rational_from_f64(ratio)?, rational_from_f64(scale)?)
    }

    pub fn geometric_exact(ratio: BigRational, scale: BigRational) -> Result<Self> {
        if !(ratio > <BigRational as Zero>::zero() && ratio < <BigRational as One>::one()) {
            return Err(Error::InvalidSequence(format!("geometric ratio must lie in (0,1), got {ratio}")));
        }
        if scale <= <BigRational as Zero>::zero() {
            return Err(Error::InvalidSequence(format!("geometric scale must be positive, got {scale}")));
        }
        Ok(Self::unscaled(Family::Geometric { ratio, scale }))
    }

    pub fn log_decay() -> Self {
        Self::unscaled(Family::LogDecay)
    }

    pub fn explicit(values: &[f64], tail: TailRule) -> Result<Self> {
        Self::explicit_exact(to_rationals(values)?, tail)
    }

    pub fn explicit_exact(values: Vec<BigRational>, tail: TailRule) -> Result<Self> {
        check_list(&values)?;
        match &tail {
            TailRule::Zero => {}
            TailRule::Geometric { ratio } => {
                if !(ratio >= &<BigRational as Zero>::zero() && ratio < &<BigRational as One>::one()) {
                    return Err(Error::InvalidSequence(format!("tail ratio must lie in [0,1), got {ratio}")));
                }
            }
            TailRule::Power { exponent } => {
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return Err(Error::InvalidSequence(format!(
                        "tail exponent must be positive, got {exponent}"
                    )));
                }
            }
        }
        Ok(Self::unscaled(Family::Explicit { values, tail }))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// The sequence `μ_m = λ_m / λ₁`.
    pub fn rescaled(&self) -> Self {
        let lambda1_ln = self.ln_eigenvalue(1);
        let scale_exact = self.exact_eigenvalue(1).map(|l1| {
            let current = self.scale_exact.clone().unwrap_or_else(<BigRational as One>::one);
            current / l1
        });
        EigenSequence {
            family: self.family.clone(),
            scale_ln: self.scale_ln - lambda1_ln,
            scale_exact: if self.scale_exact.is_some() { scale_exact } else { None },
        }
    }

    fn unscaled_ln(&self, m: usize) -> f64 {
        assert!(m >= 1, "eigenvalue indices start at 1");
        let mf = m as f64;
        match &self.family {
            Family::FiniteRank(values) => list_ln(values, m),
            Family::PowerDecay { alpha } => -2.0 * alpha * mf.ln(),
            Family::ShiftedPower { beta } => {
                if m == 1 {
                    0.0
                } else {
                    -beta * (mf - 1.0).ln()
                }
            }
            Family::Geometric { ratio, scale } => {
                Magnitude::ln(scale) + (mf - 1.0) * Magnitude::ln(ratio)
            }
            Family::LogDecay => -(mf + 1.0).ln().ln(),
            Family::Explicit { values, tail } => {
                let len = values.len();
                if m <= len {
                    return list_ln(values, m);
                }
                let last = Magnitude::ln(&values[len - 1]);
                match tail {
                    TailRule::Zero => f64::NEG_INFINITY,
                    TailRule::Geometric { ratio } => {
                        if Zero::is_zero(ratio) || last == f64::NEG_INFINITY {
                            f64::NEG_INFINITY
                        } else {
                            last + (m - len) as f64 * Magnitude::ln(ratio)
                        }
                    }
                    TailRule::Power { exponent } => last + exponent * ((len as f64).ln() - mf.ln()),
                }
            }
        }
    }

    /// `ln λ_m` (`−∞` when `λ_m = 0`).
    pub fn ln_eigenvalue(&self, m: usize) -> f64 {
        let v = self.unscaled_ln(m);
        if v == f64::NEG_INFINITY {
            v
        } else {
            v + self.scale_ln
        }
    }

    /// `λ_m` for `m ≥ 1`.
    pub fn eigenvalue(&self, m: usize) -> f64 {
        if let Some(q) = self.exact_eigenvalue(m) {
            return rational_to_f64(&q);
        }
        self.ln_eigenvalue(m).exp()
    }

    /// Whether every `λ_m` is rational and available exactly.
    pub fn supports_exact(&self) -> bool {
        if self.scale_exact.is_none() {
            return false;
        }
        match &self.family {
            Family::FiniteRank(_) | Family::Geometric { .. } => true,
            Family::PowerDecay { alpha } => is_integer(2.0 * alpha),
            Family::ShiftedPower { beta } => is_integer(*beta),
            Family::LogDecay => false,
            Family::Explicit { tail, .. } => match tail {
                TailRule::Zero | TailRule::Geometric { .. } => true,
                TailRule::Power { exponent } => is_integer(*exponent),
            },
        }
    }

    /// Exact `λ_m`, or `None` if the sequence has irrational values.
    pub fn exact_eigenvalue(&self, m: usize) -> Option<BigRational> {
        assert!(m >= 1, "eigenvalue indices start at 1");
        if !self.supports_exact() {
            return None;
        }
        let raw = match &self.family {
            Family::FiniteRank(values) => values.get(m - 1).cloned().unwrap_or_else(<BigRational as Zero>::zero),
            Family::PowerDecay { alpha } => inverse_power(m, (2.0 * alpha).round() as u32),
            Family::ShiftedPower { beta } => {
                if m == 1 {
                    <BigRational as One>::one()
                } else {
                    inverse_power(m - 1, beta.round() as u32)
                }
            }
            Family::Geometric { ratio, scale } => scale * num_traits::pow(ratio.clone(), m - 1),
            Family::LogDecay => unreachable!(),
            Family::Explicit { values, tail } => {
                let len = values.len();
                if m <= len {
                    values[m - 1].clone()
                } else {
                    let last = &values[len - 1];
                    match tail {
                        TailRule::Zero => <BigRational as Zero>::zero(),
                        TailRule::Geometric { ratio } => last * num_traits::pow(ratio.clone(), m - len),
                        TailRule::Power { exponent } => {
                            let p = exponent.round() as usize;
                            let frac = BigRational::new(len.into(), m.into());
                            last * num_traits::pow(frac, p)
                        }
                    }
                }
            }
        };
        Some(raw * self.scale_exact.clone().expect("checked by supports_exact"))
    }

    /// Infimum `lim λ_m`.
    pub fn limit(&self) -> f64 {
        match &self.family {
            Family::ShiftedPower { beta } if *beta == 0.0 => self.scale_ln.exp(),
            _ => 0.0,
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match &self.family {
            Family::FiniteRank(_) => DecayClass::FiniteSupport,
            Family::PowerDecay { .. } => DecayClass::Polynomial,
            Family::ShiftedPower { beta } => {
                if *beta == 0.0 {
                    DecayClass::NonCompact
                } else {
                    DecayClass::Polynomial
                }
            }
            Family::Geometric { .. } => DecayClass::Geometric,
            Family::LogDecay => DecayClass::SubPolynomial,
            Family::Explicit { values, tail } => match tail {
                TailRule::Zero => DecayClass::FiniteSupport,
                TailRule::Geometric { ratio } if Zero::is_zero(ratio) => DecayClass::FiniteSupport,
                _ if values.last().is_some_and(Zero::is_zero) => DecayClass::FiniteSupport,
                TailRule::Geometric { .. } => DecayClass::Geometric,
                TailRule::Power { .. } => DecayClass::Polynomial,
            },
        }
    }

    /// Number of strictly positive eigenvalues when it is finite.
    pub fn positive_count(&self) -> Option<usize> {
        let list = match &self.family {
            Family::FiniteRank(values) => values,
            Family::Explicit { values, tail } => {
                let last_positive = values.last().is_some_and(|v| !Zero::is_zero(v));
                match tail {
                    TailRule::Zero => values,
                    TailRule::Geometric { ratio } if Zero::is_zero(ratio) => values,
                    _ if !last_positive => values,
                    _ => return None,
                }
            }
            _ => return None,
        };
        Some(list.iter().take_while(|v| !Zero::is_zero(*v)).count())
    }

    /// `Σ_{m ≥ start} λ_m^τ` with a certified error bound, or `+∞` when the
    /// series diverges.
    pub fn power_sum(&self, tau: f64, start: usize) -> PowerSum {
        assert!(tau > 0.0 && tau.is_finite(), "power sums need τ > 0");
        assert!(start >= 1, "eigenvalue indices start at 1");
        let scale_tau = (tau * self.scale_ln).exp();
        let raw = match &self.family {
            Family::FiniteRank(values) => list_power_sum(values, tau, start),
            Family::PowerDecay { alpha } => {
                let s = 2.0 * alpha * tau;
                if s <= 1.0 {
                    PowerSum::divergent()
                } else {
                    zeta_tail(s, start)
                }
            }
            Family::ShiftedPower { beta } => {
                let s = beta * tau;
                if s <= 1.0 {
                    PowerSum::divergent()
                } else {
                    let head = if start <= 1 { 1.0 } else { 0.0 };
                    let tail = zeta_tail(s, start.max(2) - 1);
                    PowerSum { value: head + tail.value, error_bound: tail.error_bound }
                }
            }
            Family::Geometric { ratio, scale } => {
                let ln_r = Magnitude::ln(ratio);
                let ln_first = tau * (Magnitude::ln(scale) + (start - 1) as f64 * ln_r);
                geometric_tail(ln_first, tau * ln_r)
            }
            Family::LogDecay => PowerSum::divergent(),
            Family::Explicit { values, tail } => {
                let len = values.len();
                let head = list_power_sum(values, tau, start);
                let last_ln = Magnitude::ln(&values[len - 1]);
                let from = start.max(len + 1);
                let rest = match tail {
                    TailRule::Zero => PowerSum::exact(0.0),
                    _ if last_ln == f64::NEG_INFINITY => PowerSum::exact(0.0),
                    TailRule::Geometric { ratio } => {
                        if Zero::is_zero(ratio) {
                            PowerSum::exact(0.0)
                        } else {
                            let ln_r = Magnitude::ln(ratio);
                            let first = tau * (last_ln + (from - len) as f64 * ln_r);
                            geometric_tail(first, tau * ln_r)
                        }
                    }
                    TailRule::Power { exponent } => {
                        let s = exponent * tau;
                        if s <= 1.0 {
                            PowerSum::divergent()
                        } else {
                            let factor = (tau * (last_ln + exponent * (len as f64).ln())).exp();
                            let t = zeta_tail(s, from);
                            PowerSum { value: factor * t.value, error_bound: factor * t.error_bound }
                        }
                    }
                };
                if rest.is_divergent() {
                    PowerSum::divergent()
                } else {
                    PowerSum {
                        value: head.value + rest.value,
                        error_bound: head.error_bound + rest.error_bound,
                    }
                }
            }
        };
        if raw.is_divergent() {
            return raw;
        }
        PowerSum { value: raw.value * scale_tau, error_bound: raw.error_bound * scale_tau }
    }

    /// Exact `Σ_{m ≥ start} λ_m^τ` for integer `τ` and finitely many
    /// positive eigenvalues.
    pub fn power_sum_exact(&self, tau: u32, start: usize) -> Option<BigRational> {
        let n = self.positive_count()?;
        if !self.supports_exact() {
            return None;
        }
        let mut acc = <BigRational as Zero>::zero();
        for m in start.max(1)..=n {
            acc += num_traits::pow(self.exact_eigenvalue(m)?, tau as usize);
        }
        Some(acc)
    }

    /// Smallest `τ` of an increasing grid with `λ ∈ ℓ_τ`.
    pub fn find_tau_membership(&self, tau_grid: &[f64]) -> Result<Option<f64>> {
        if tau_grid.is_empty() {
            return Err(Error::InvalidArgument("τ grid is empty".into()));
        }
        if tau_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidArgument("τ grid entries must be positive".into()));
        }
        if tau_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("τ grid must be strictly increasing".into()));
        }
        Ok(tau_grid.iter().copied().find(|&tau| !self.power_sum(tau, 1).is_divergent()))
    }

    /// `#{m ≥ 1 : λ_m > threshold}`, found by exponential and binary search
    /// over the monotone sequence.
    pub fn count_exceeding<M: SpectralValue>(&self, threshold: &M, horizon: u64) -> Tally {
        self.count_exceeding_from(threshold, 1, horizon)
    }

    /// `#{m ≥ from : λ_m > threshold}`.
    pub fn count_exceeding_from<M: SpectralValue>(
        &self,
        threshold: &M,
        from: usize,
        horizon: u64,
    ) -> Tally {
        let above = |m: usize| M::eigenvalue(self, m).compare_threshold(threshold);
        if !above(from).is_above() {
            let ties = u64::from(above(from) == ThresholdCmp::Tie);
            return Tally { count: Count::Finite(0), ties };
        }
        // Invariant: λ_lo is above, λ_hi is not.
        let mut lo = from;
        let mut step = 1usize;
        let hi = loop {
            let probe = from.saturating_add(step);
            if probe as u64 > horizon.max(from as u64) {
                return self.beyond_horizon(threshold, horizon);
            }
            if above(probe).is_above() {
                lo = probe;
                step = step.saturating_mul(2);
            } else {
                break probe;
            }
        };
        let mut hi = hi;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if above(mid).is_above() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Ties form a contiguous run right after the last index above.
        let mut ties = 0u64;
        let mut m = hi;
        while (m as u64) <= horizon && above(m) == ThresholdCmp::Tie {
            ties += 1;
            m += 1;
        }
        Tally { count: Count::Finite((lo - from + 1) as u64), ties }
    }

    pub(crate) fn beyond_horizon<M: Magnitude>(&self, threshold: &M, horizon: u64) -> Tally {
        let limit = self.limit();
        if limit > 0.0 && limit.ln() > threshold.ln() {
            Tally::infinite(InfiniteReason::NonCompact { limit })
        } else {
            Tally::infinite(InfiniteReason::HorizonExceeded { horizon })
        }
    }
}

impl fmt::Display for EigenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::FiniteRank(v) => write!(f, "finite_rank(len={})", v.len())?,
            Family::PowerDecay { alpha } => write!(f, "power_decay(alpha={alpha})")?,
            Family::ShiftedPower { beta } => write!(f, "shifted_power(beta={beta})")?,
            Family::Geometric { ratio, scale } => write!(f, "geometric(ratio={ratio}, scale={scale})")?,
            Family::LogDecay => write!(f, "log_decay")?,
            Family::Explicit { values, .. } => write!(f, "explicit(len={})", values.len())?,
        }
        if self.scale_ln != 0.0 {
            write!(f, " scaled by {}", self.scale_ln.exp())?;
        }
        Ok(())
    }
}

fn is_integer(x: f64) -> bool {
    x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 64.0
}

fn inverse_power(m: usize, exp: u32) -> BigRational {
    BigRational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(m), exp as usize))
}

fn list_ln(values: &[BigRational], m: usize) -> f64 {
    values.get(m - 1).map_or(f64::NEG_INFINITY, Magnitude::ln)
}

fn list_power_sum(values: &[BigRational], tau: f64, start: usize) -> PowerSum {
    let terms: Vec<f64> = values
        .iter()
        .skip(start - 1)
        .map(|v| {
            let ln = Magnitude::ln(v);
            if ln == f64::NEG_INFINITY {
                0.0
            } else {
                (tau * ln).exp()
            }
        })
        .collect();
    let value = compensated_sum(terms.iter().rev().copied());
    let n = terms.len().max(1) as f64;
    PowerSum { value, error_bound: n * (value * 4.0 * f64::EPSILON + 2.0 * SUBNORMAL_ULP) }
}

/// Spacing of floats below `f64::MIN_POSITIVE`, where rounding is absolute.
const SUBNORMAL_ULP: f64 = f64::MIN_POSITIVE * f64::EPSILON;

/// `Σ_{j≥0} exp(ln_first + j·ln_ratio)`. Exponentiating a log of size `L`
/// costs about `L` ulps of relative accuracy, which the bound includes.
fn geometric_tail(ln_first: f64, ln_ratio: f64) -> PowerSum {
    let denom = -ln_ratio.exp_m1();
    let value = ln_first.exp() / denom;
    let error_bound = value * (ln_first.abs() + 8.0) * 2.0 * f64::EPSILON + 2.0 * SUBNORMAL_ULP / denom;
    PowerSum { value, error_bound }
}

/// Neumaier-compensated summation.
pub(crate) fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Cap on explicitly summed terms before switching to the integral bounds.
const ZETA_TERMS_CAP: usize = 1 << 18;

/// Explicit-sum cutoff for exponent `s`: large enough that the remaining
/// bracket width `M^(−s)` is negligible, independent of the start index.
fn zeta_cutoff(s: f64) -> usize {
    let ideal = 1e14f64.powf(1.0 / s).ceil();
    if ideal.is_finite() {
        (ideal as usize).clamp(64, ZETA_TERMS_CAP)
    } else {
        ZETA_TERMS_CAP
    }
}

/// `Σ_{m ≥ from} m^(−s)` for `s > 1`.
///
/// Terms below the cutoff `M` are summed explicitly. The remainder
/// `Σ_{m ≥ M} m^(−s)` lies between `∫_M^∞ x^(−s) dx` and
/// `M^(−s) + ∫_M^∞ x^(−s) dx`, the integral-comparison estimate for
/// monotone sequences with `C = 1`, `r = s` and `p = 0`. The midpoint is
/// returned and half the bracket is reported as the error bound.
pub(crate) fn zeta_tail(s: f64, from: usize) -> PowerSum {
    debug_assert!(s > 1.0);
    let from = from.max(1);
    let cutoff = zeta_cutoff(s).max(from);
    let partial = compensated_sum((from..cutoff).rev().map(|m| (m as f64).powf(-s)));
    let mf = cutoff as f64;
    let integral = mf.powf(1.0 - s) / (s - 1.0);
    let first = mf.powf(-s);
    let value = partial + integral + 0.5 * first;
    let rounding = 4.0 * f64::EPSILON * value;
    PowerSum { value, error_bound: 0.5 * first + rounding }
}

/// Eigenvalue access in a given arithmetic.
pub trait SpectralValue: Magnitude {
    /// Errors when the sequence cannot be represented in this arithmetic.
    fn supports(seq: &EigenSequence) -> Result<()>;
    fn eigenvalue(seq: &EigenSequence, m: usize) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn from_f64(x: f64) -> Result<Self>;
}

impl SpectralValue for LogValue {
    fn supports(_seq: &EigenSequence) -> Result<()> {
        Ok(())
    }

    fn eigenvalue(seq: &EigenSequence, m: usize) -> Self {
        LogValue(seq.ln_eigenvalue(m))
    }

    fn from_rational(q: &BigRational) -> Self {
        LogValue(Magnitude::ln(q))
    }

    fn from_f64(x: f64) -> Result<Self> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::InvalidNumber(x.to_string()));
        }
        Ok(LogValue::from_linear(x))
    }
}

impl SpectralValue for BigRational {
    fn supports(seq: &EigenSequence) -> Result<()> {
        if seq.supports_exact() {
            Ok(())
        } else {
            Err(Error::NotRational(seq.to_string()))
        }
    }

    fn eigenvalue(seq: &EigenSequence, m: usize) -> Self {
        seq.exact_eigenvalue(m).expect("exact support is checked before evaluation")
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn from_f64(x: f64) -> Result<Self> {
        rational_from_f64(x)
    }
}

/// `m` as a float, for reporting exact quantities.
pub fn rational_value(q: &BigRational) -> f64 {
    ToPrimitive::to_f64(q).unwrap_or_else(|| rational_to_f64(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn closed_form_eigenvalues() {
        let pd = EigenSequence::power_decay(1.0).unwrap();
        assert!((pd.eigenvalue(3) - 1.0 / 9.0).abs() < 1e-16);
        assert_eq!(pd.exact_eigenvalue(3), Some(q(1, 9)));

        let fr = EigenSequence::finite_rank(&[1.0, 1.0]).unwrap();
        assert_eq!(fr.eigenvalue(5), 0.0);
        assert_eq!(fr.ln_eigenvalue(5), f64::NEG_INFINITY);

        let geo = EigenSequence::geometric(0.5, 1.0).unwrap();
        assert_eq!(geo.exact_eigenvalue(3), Some(q(1, 4)));
        assert!((geo.eigenvalue(3) - 0.25).abs() < 1e-16);

        let sp = EigenSequence::shifted_power(2.0).unwrap();
        assert_eq!(sp.exact_eigenvalue(1), Some(q(1, 1)));
        assert_eq!(sp.exact_eigenvalue(2), Some(q(1, 1)));
        assert_eq!(sp.exact_eigenvalue(4), Some(q(1, 9)));

        let ld = EigenSequence::log_decay();
        assert!((ld.eigenvalue(1) - 1.0 / 2f64.ln()).abs() < 1e-15);
        assert!(!ld.supports_exact());
    }

    #[test]
    fn rejects_invalid_lists() {
        assert!(EigenSequence::finite_rank(&[0.5, 1.0]).is_err());
        assert!(EigenSequence::finite_rank(&[0.0, 0.0]).is_err());
        assert!(EigenSequence::finite_rank(&[1.0, -0.1]).is_err());
        assert!(EigenSequence::finite_rank(&[]).is_err());
        assert!(EigenSequence::power_decay(0.0).is_err());
        assert!(EigenSequence::geometric(1.0, 1.0).is_err());
        assert!(EigenSequence::explicit(&[1.0], TailRule::Power { exponent: -1.0 }).is_err());
    }

    #[test]
    fn zeta_two_power_sum() {
        let pd = EigenSequence::power_decay(1.0).unwrap();
        let s = pd.power_sum(1.0, 1);
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((s.value - zeta2).abs() <= 1e-10, "{s:?}");
        assert!((s.value - zeta2).abs() <= s.error_bound + 1e-15);
        assert!(s.error_bound < 1e-10);
    }

    #[test]
    fn finite_and_divergent_power_sums() {
        let fr = EigenSequence::finite_rank(&[1.0, 1.0]).unwrap();
        assert_eq!(fr.power_sum(3.0, 1).value, 2.0);
        assert_eq!(fr.power_sum_exact(3, 1), Some(q(2, 1)));
        assert!(EigenSequence::log_decay().power_sum(2.0, 1).is_divergent());
        assert!(EigenSequence::power_decay(1.0).unwrap().power_sum(0.5, 1).is_divergent());
        assert!(EigenSequence::shifted_power(0.0).unwrap().power_sum(4.0, 1).is_divergent());
        let err = EigenSequence::log_decay().power_sum(2.0, 1).finite("log decay");
        assert!(matches!(err, Err(Error::Divergent(_))));
    }

    #[test]
    fn geometric_power_sum_closed_form() {
        let geo = EigenSequence::geometric(0.5, 1.0).unwrap();
        assert!((geo.power_sum(1.0, 1).value - 2.0).abs() < 1e-15);
        assert!((geo.power_sum(2.0, 2).value - (0.25 / 0.75)).abs() < 1e-15);
    }

    #[test]
    fn explicit_tails() {
        let e = EigenSequence::explicit(&[1.0, 0.5], TailRule::Geometric { ratio: q(1, 2) }).unwrap();
        assert_eq!(e.exact_eigenvalue(4), Some(q(1, 8)));
        assert!((e.power_sum(1.0, 1).value - 2.0).abs() < 1e-14);
        let p = EigenSequence::explicit(&[1.0, 0.25], TailRule::Power { exponent: 2.0 }).unwrap();
        assert_eq!(p.exact_eigenvalue(4), Some(q(1, 16)));
        let ps = p.power_sum(1.0, 1);
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((ps.value - zeta2).abs() < 1e-10);
        assert_eq!(p.decay_class(), DecayClass::Polynomial);
    }

    #[test]
    fn tau_membership_grid() {
        let pd = EigenSequence::power_decay(1.0).unwrap();
        assert_eq!(pd.find_tau_membership(&[0.25, 0.5, 1.0]).unwrap(), Some(1.0));
        let fr = EigenSequence::finite_rank(&[1.0, 0.5]).unwrap();
        assert_eq!(fr.find_tau_membership(&[0.1]).unwrap(), Some(0.1));
        let ld = EigenSequence::log_decay();
        assert_eq!(ld.find_tau_membership(&[1.0, 2.0, 4.0]).unwrap(), None);
        assert!(pd.find_tau_membership(&[]).is_err());
        assert!(pd.find_tau_membership(&[1.0, 0.5]).is_err());
    }

    #[test]
    fn rescaling_normalizes_first_eigenvalue() {
        let geo = EigenSequence::geometric(0.5, 0.25).unwrap();
        let mu = geo.rescaled();
        assert_eq!(mu.exact_eigenvalue(1), Some(q(1, 1)));
        assert_eq!(mu.exact_eigenvalue(3), Some(q(1, 4)));
        let ld = EigenSequence::log_decay().rescaled();
        assert!((ld.eigenvalue(1) - 1.0).abs() < 1e-15);
        assert!((ld.eigenvalue(3) - 2f64.ln() / 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn univariate_counts() {
        let pd = EigenSequence::power_decay(1.0).unwrap();
        // m^-2 > 1/100  <=>  m < 10
        let t = pd.count_exceeding(&q(1, 100), DEFAULT_HORIZON);
        assert_eq!(t.count, Count::Finite(9));
        let t = pd.count_exceeding(&LogValue::from_linear(0.01), DEFAULT_HORIZON);
        assert_eq!(t.count, Count::Finite(9));
        assert_eq!(t.ties, 1, "λ_10 = 1/100 sits on the threshold");

        let flat = EigenSequence::shifted_power(0.0).unwrap();
        let t = flat.count_exceeding(&LogValue::from_linear(0.5), 1000);
        assert!(matches!(t.count, Count::Infinite(InfiniteReason::NonCompact { .. })));

        let ld = EigenSequence::log_decay();
        let t = ld.count_exceeding(&LogValue::from_linear(0.01), 1000);
        assert!(matches!(t.count, Count::Infinite(InfiniteReason::HorizonExceeded { .. })));
        let t = ld.count_exceeding(&LogValue::from_linear(0.5), 1000);
        // 1/ln(m+1) > 1/2  <=>  m + 1 < e²
        assert_eq!(t.count, Count::Finite(6));
    }

    fn finite_rank_fixtures() -> Vec<Vec<f64>> {
        vec![
            vec![1.0, 1.0],
            vec![1.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.5, 0.25],
            vec![2.0, 0.3, 0.3, 0.1],
            vec![0.9, 0.7, 0.2, 0.05, 0.05],
        ]
    }

    #[test]
    fn exact_mode_matches_float_mode_on_finite_rank() {
        for values in finite_rank_fixtures() {
            let seq = EigenSequence::finite_rank(&values).unwrap();
            for m in 1..=values.len() + 2 {
                let exact = rational_to_f64(&seq.exact_eigenvalue(m).unwrap());
                let float = seq.ln_eigenvalue(m).exp();
                assert!(exact == float || ((exact - float) / exact).abs() < 1e-12);
            }
            for tau in 1..=4u32 {
                let exact = rational_to_f64(&seq.power_sum_exact(tau, 1).unwrap());
                let float = seq.power_sum(f64::from(tau), 1).value;
                assert!(((exact - float) / exact).abs() < 1e-12);
            }
        }
    }

    fn any_sequence() -> impl Strategy<Value = EigenSequence> {
        prop_oneof![
            (0.1f64..3.0).prop_map(|a| EigenSequence::power_decay(a).unwrap()),
            (0.0f64..3.0).prop_map(|b| EigenSequence::shifted_power(b).unwrap()),
            (0.05f64..0.95, 0.1f64..4.0).prop_map(|(r, c)| EigenSequence::geometric(r, c).unwrap()),
            Just(EigenSequence::log_decay()),
            proptest::collection::vec(0.0f64..2.0, 1..8).prop_filter_map("needs λ₁ > 0", |mut v| {
                v.sort_by(|a, b| b.total_cmp(a));
                EigenSequence::finite_rank(&v).ok()
            }),
        ]
    }

    proptest! {
        #[test]
        fn eigenvalues_are_non_increasing(seq in any_sequence(), m in 1usize..1_000_000) {
            prop_assert!(seq.ln_eigenvalue(m) >= seq.ln_eigenvalue(m + 1));
        }

        #[test]
        fn tail_consistency(seq in any_sequence(), tau in 0.3f64..4.0, start in 1usize..500) {
            let a = seq.power_sum(tau, start);
            let b = seq.power_sum(tau, start + 1);
            prop_assume!(!a.is_divergent());
            let term = (tau * seq.ln_eigenvalue(start)).exp();
            let diff = a.value - b.value;
            let ln_term = tau * seq.ln_eigenvalue(start);
            let term_err = if term == 0.0 { 0.0 } else { term * (ln_term.abs() + 8.0) * 2.0 * f64::EPSILON };
            let slack = a.error_bound + b.error_bound + term_err + 1e-14 * a.value;
            prop_assert!((diff - term).abs() <= slack, "diff {diff} term {term} slack {slack}");
        }
    }
}

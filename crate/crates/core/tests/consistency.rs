//! Cross-module consistency: counts against the ordered stream, and
//! verdicts against the numerical witnesses behind them.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use symtract::enumeration::{count_above, CountOptions, SpectrumStream};
use symtract::numeric::Magnitude;
use symtract::tractability::{
    check_sum_condition_abs, classify, ClassifyOptions, CutoffRule, StructureSchedule, Verdict,
};
use symtract::{Criterion, EigenSequence, GroupKind, LogValue, Problem, SymmetryStructure};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn structures() -> Vec<SymmetryStructure> {
    vec![
        SymmetryStructure::entire(2).unwrap(),
        SymmetryStructure::full(GroupKind::Symmetric, 3).unwrap(),
        SymmetryStructure::full(GroupKind::Antisymmetric, 3).unwrap(),
        SymmetryStructure::contiguous(4, &[(2, GroupKind::Antisymmetric), (2, GroupKind::Symmetric)]).unwrap(),
    ]
}

#[test]
fn complexity_brackets_the_nth_error() {
    let seq = EigenSequence::power_decay(1.0).unwrap();
    for structure in structures() {
        let p = Problem::new(structure, seq.clone());
        let init = p.initial_error();
        for eps in [0.9, 0.5, 0.2, 0.08] {
            for criterion in [Criterion::Absolute, Criterion::Normalized] {
                let n = p.info_complexity_f64(eps, criterion).unwrap().count.finite().unwrap() as usize;
                let target = match criterion {
                    Criterion::Absolute => eps,
                    Criterion::Normalized => eps * init,
                };
                assert!(p.nth_minimal_error(n) <= target * (1.0 + 1e-12), "{} ε={eps}", p.structure);
                if n > 0 {
                    assert!(p.nth_minimal_error(n - 1) > target * (1.0 - 1e-12), "{} ε={eps}", p.structure);
                }
            }
        }
    }
}

#[test]
fn rational_counts_match_the_exact_stream() {
    let seq = EigenSequence::geometric_exact(q(1, 2), q(1, 1)).unwrap();
    for structure in structures() {
        for t in [q(1, 3), q(1, 16), q(1, 100)] {
            let n = count_above(&structure, &seq, &t, &CountOptions::default()).unwrap();
            let listed = SpectrumStream::<BigRational>::new(&structure, &seq)
                .unwrap()
                .take_while(|item| item.value > t)
                .count();
            assert_eq!(n.count.finite(), Some(listed as u64), "{structure} t={t}");
        }
    }
}

#[test]
fn parallel_count_matches_sequential() {
    let seq = EigenSequence::power_decay(0.75).unwrap();
    let structure = SymmetryStructure::full(GroupKind::Antisymmetric, 4).unwrap();
    let t = LogValue::from_linear(1e-4);
    let serial = count_above(&structure, &seq, &t, &CountOptions::default()).unwrap();
    let parallel = count_above(&structure, &seq, &t, &CountOptions { parallel: true, ..CountOptions::default() }).unwrap();
    assert_eq!(serial, parallel);
}

fn verdict_cases() -> Vec<(StructureSchedule, EigenSequence)> {
    vec![
        (StructureSchedule::FullyAntisymmetric, EigenSequence::power_decay(1.0).unwrap()),
        (StructureSchedule::FullyAntisymmetric, EigenSequence::unit_rank(3).unwrap()),
        (StructureSchedule::FullyAntisymmetric, EigenSequence::shifted_power(2.0).unwrap()),
        (StructureSchedule::Entire, EigenSequence::unit_rank(2).unwrap()),
        (StructureSchedule::Entire, EigenSequence::shifted_power(1.0).unwrap()),
        (StructureSchedule::FullySymmetric, EigenSequence::geometric(0.5, 0.9).unwrap()),
    ]
}

#[test]
fn strong_verdicts_have_bounded_sums() {
    let opts = ClassifyOptions::default();
    let mut seen = 0;
    for (schedule, seq) in verdict_cases() {
        let r = classify(&schedule, &seq, Criterion::Absolute, &opts).unwrap();
        if r.verdict != Verdict::StrongPolyTract {
            continue;
        }
        // ℓ_τ grows with τ; a large exponent shortens the transient before the
        // per-dimension sums settle.
        let Some(tau) = r.witnesses.tau.map(|t| t.max(4.0)) else { continue };
        let c = check_sum_condition_abs(&schedule, &seq, tau, 0.0, CutoffRule::NONE_OMITTED, 1..=20).unwrap();
        let early = c.points[..10].iter().map(|p| p.value).fold(0.0, f64::max);
        let late = c.points[10..].iter().map(|p| p.value).fold(0.0, f64::max);
        assert!(c.sup.is_finite() && late <= early, "{schedule} {seq}: {late} after d = 10 exceeds {early}");
        seen += 1;
    }
    assert!(seen >= 3);
}

#[test]
fn curse_verdicts_grow_exponentially() {
    let opts = ClassifyOptions::default();
    let mut seen = 0;
    for (schedule, seq) in verdict_cases() {
        let r = classify(&schedule, &seq, Criterion::Absolute, &opts).unwrap();
        if r.verdict != Verdict::Curse {
            continue;
        }
        let eps = 0.9;
        let counts: Vec<f64> = (1..=8)
            .map(|d| {
                let p = Problem::new(schedule.structure(d).unwrap(), seq.clone());
                p.info_complexity_f64(eps, Criterion::Absolute).unwrap().count.finite().unwrap() as f64
            })
            .collect();
        let rate = (counts[7] / counts[3]).powf(0.25);
        assert!(rate >= 1.2, "{schedule} {seq}: per-step growth {rate}");
        seen += 1;
    }
    assert!(seen >= 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stream_is_non_increasing_and_canonical(d in 1usize..=4, alpha in 0.3f64..2.0, kind in 0u8..3) {
        let structure = match kind {
            0 => SymmetryStructure::entire(d).unwrap(),
            1 => SymmetryStructure::full(GroupKind::Symmetric, d).unwrap(),
            _ => SymmetryStructure::full(GroupKind::Antisymmetric, d).unwrap(),
        };
        let seq = EigenSequence::power_decay(alpha).unwrap();
        let items: Vec<_> = SpectrumStream::<LogValue>::new(&structure, &seq).unwrap().take(60).collect();
        for w in items.windows(2) {
            prop_assert!(w[1].value.ln() <= w[0].value.ln() + 1e-12);
        }
        for item in &items {
            prop_assert!(structure.is_canonical(&item.index));
        }
    }
}

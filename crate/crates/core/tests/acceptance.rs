//! Acceptance suite. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symtract::complexity::{closed_form_finite_rank_u64, exact_antisymmetric_count, StructureKind};
use symtract::enumeration::{brute_force_count, count_above, CountOptions, SpectrumStream};
use symtract::numeric::LogValue;
use symtract::optimal::empirical_worst_case;
use symtract::spectrum::{EigenSequence, SpectralValue, DEFAULT_HORIZON};
use symtract::symmetry::{GroupKind, MultiIndex, SparseCoefficients, SymmetryStructure};
use symtract::tractability::{
    check_sum_condition_abs, classify, verify_appendix_inequality, ClassifyOptions, CutoffRule, StructureSchedule,
};
use symtract::{Count, Criterion, Problem};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn finite(count: &Count) -> Result<u64, String> {
    count.finite().ok_or_else(|| format!("unexpected infinite count: {count:?}"))
}

fn full(kind: GroupKind, d: usize) -> SymmetryStructure {
    SymmetryStructure::full(kind, d).unwrap()
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn finite_rank_table() -> Outcome {
    let start = Instant::now();
    let opts = CountOptions::default();
    let mut rows = 0;
    for m in 1..=3usize {
        let seq = EigenSequence::unit_rank(m).unwrap();
        for eps in [q(3, 10), q(1, 2), q(9, 10)] {
            for d in 1..=8usize {
                let ent = Problem::new(SymmetryStructure::entire(d).unwrap(), seq.clone());
                let n = finite(&ent.info_complexity(&eps, Criterion::Absolute, &opts).map_err(|e| e.to_string())?.count)?;
                ensure!(n == (m as u64).pow(d as u32), "entire m={m} d={d}: {n}");
                let asy = Problem::new(full(GroupKind::Antisymmetric, d), seq.clone());
                let n = finite(&asy.info_complexity(&eps, Criterion::Absolute, &opts).map_err(|e| e.to_string())?.count)?;
                ensure!(n == binomial(m as u64, d as u64), "antisymmetric m={m} d={d}: {n}");
                let sym = Problem::new(full(GroupKind::Symmetric, d), seq.clone());
                let n = finite(&sym.info_complexity(&eps, Criterion::Absolute, &opts).map_err(|e| e.to_string())?.count)?;
                ensure!(n == binomial((m + d - 1) as u64, d as u64), "symmetric m={m} d={d}: {n}");
                if m == 2 {
                    ensure!(n == d as u64 + 1, "symmetric m=2 d={d}: {n}");
                }
                for kind in [StructureKind::Entire, StructureKind::FullySymmetric, StructureKind::FullyAntisymmetric] {
                    let closed = closed_form_finite_rank_u64(m, d, kind).unwrap();
                    let p = Problem::new(kind.structure(d).unwrap(), seq.clone());
                    let n = finite(&p.info_complexity(&eps, Criterion::Absolute, &opts).map_err(|e| e.to_string())?.count)?;
                    ensure!(n == closed, "closed form {kind:?} m={m} d={d}");
                }
                rows += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("{rows} (m, ε, d) rows in {elapsed:.2?}"))
}

fn thresholds<M: SpectralValue>(seq: &EigenSequence, d: usize, fractions: &[(i64, i64)]) -> Vec<M> {
    let problem = Problem::new(full(GroupKind::Antisymmetric, d), seq.clone());
    let init: M = problem.initial_eigenvalue().unwrap();
    fractions
        .iter()
        .map(|&(n, den)| init.mul(&M::from_rational(&q(n, den))))
        .collect()
}

fn recursion_matches<M: SpectralValue>(seq: &EigenSequence, d: usize, threshold: &M) -> Result<(), String> {
    let rec = exact_antisymmetric_count(seq, d, threshold, DEFAULT_HORIZON).map_err(|e| e.to_string())?;
    let cnt = count_above(&full(GroupKind::Antisymmetric, d), seq, threshold, &CountOptions::default())
        .map_err(|e| e.to_string())?;
    ensure!(rec.count == cnt.count, "{seq} d={d}: recursion {:?} vs count {:?}", rec.count, cnt.count);
    Ok(())
}

fn recursion_equals_counting() -> Outcome {
    let start = Instant::now();
    let fractions = [(1, 2), (1, 10), (1, 50), (1, 200), (1, 1000)];
    let rational = [
        EigenSequence::power_decay(0.5).unwrap(),
        EigenSequence::power_decay(1.0).unwrap(),
        EigenSequence::power_decay(1.5).unwrap(),
        EigenSequence::geometric_exact(q(1, 2), q(1, 1)).unwrap(),
        EigenSequence::geometric_exact(q(2, 3), q(3, 2)).unwrap(),
        EigenSequence::shifted_power(1.0).unwrap(),
        EigenSequence::shifted_power(2.0).unwrap(),
        EigenSequence::finite_rank_exact(vec![q(1, 1), q(1, 2), q(1, 2), q(1, 4), q(1, 8), q(1, 16)]).unwrap(),
    ];
    let float_only = [EigenSequence::power_decay(0.75).unwrap(), EigenSequence::geometric(0.3, 2.5).unwrap()];
    let mut fixtures = 0;
    for seq in &rational {
        for d in 1..=5 {
            for t in thresholds::<BigRational>(seq, d, &fractions) {
                recursion_matches(seq, d, &t)?;
                fixtures += 1;
            }
            for t in thresholds::<LogValue>(seq, d, &fractions) {
                recursion_matches(seq, d, &t)?;
                fixtures += 1;
            }
        }
    }
    for seq in &float_only {
        for d in 1..=5 {
            for t in thresholds::<LogValue>(seq, d, &fractions) {
                recursion_matches(seq, d, &t)?;
                fixtures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(fixtures >= 200, "only {fixtures} fixtures");
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("{fixtures} fixtures in {elapsed:.2?}"))
}

fn structures_up_to_four() -> Vec<SymmetryStructure> {
    use GroupKind::{Antisymmetric as A, Symmetric as S};
    let mut out = Vec::new();
    for d in 1..=4 {
        out.push(SymmetryStructure::entire(d).unwrap());
        if d >= 2 {
            out.push(full(S, d));
            out.push(full(A, d));
        }
        if d >= 3 {
            out.push(SymmetryStructure::contiguous(d, &[(2, S)]).unwrap());
            out.push(SymmetryStructure::contiguous(d, &[(2, A)]).unwrap());
            out.push(SymmetryStructure::new(d, vec![(vec![0, d - 1], A)]).unwrap());
        }
        if d == 4 {
            out.push(SymmetryStructure::contiguous(4, &[(2, S), (2, A)]).unwrap());
            out.push(SymmetryStructure::contiguous(4, &[(3, A)]).unwrap());
            out.push(SymmetryStructure::new(4, vec![(vec![0, 2], S), (vec![1, 3], A)]).unwrap());
        }
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let families = [
        EigenSequence::power_decay(1.0).unwrap(),
        EigenSequence::geometric_exact(q(1, 2), q(1, 1)).unwrap(),
        EigenSequence::shifted_power(2.0).unwrap(),
        EigenSequence::finite_rank_exact(vec![q(2, 1), q(1, 1), q(1, 1), q(1, 3)]).unwrap(),
    ];
    let thresholds = [q(1, 2), q(1, 9), q(1, 40), q(1, 150)];
    let (mut compared, mut skipped) = (0, 0);
    for structure in structures_up_to_four() {
        for seq in &families {
            for t in &thresholds {
                let brute = brute_force_count(&structure, seq, t, 12).map_err(|e| e.to_string())?;
                if !brute.complete {
                    skipped += 1;
                    continue;
                }
                let fast = count_above(&structure, seq, t, &CountOptions::default()).map_err(|e| e.to_string())?;
                ensure!(fast.count == brute.tally.count, "{structure} {seq} t={t}: {:?} vs {:?}", fast.count, brute.tally.count);
                compared += 1;
            }
        }
    }
    ensure!(compared >= 100, "only {compared} certified-complete fixtures");
    Ok(format!("{compared} fixtures equal, {skipped} incomplete cubes skipped"))
}

fn error_formula() -> Outcome {
    use GroupKind::{Antisymmetric as A, Symmetric as S};
    let fixtures = [
        (full(A, 2), EigenSequence::power_decay(1.0).unwrap(), vec![0, 1, 5, 12]),
        (full(S, 3), EigenSequence::geometric(0.5, 1.0).unwrap(), vec![0, 2, 7]),
        (SymmetryStructure::contiguous(3, &[(2, A)]).unwrap(), EigenSequence::shifted_power(1.0).unwrap(), vec![1, 4, 9]),
        (SymmetryStructure::entire(2).unwrap(), EigenSequence::power_decay(0.75).unwrap(), vec![0, 3, 10]),
        (full(A, 3), EigenSequence::unit_rank(4).unwrap(), vec![0, 2, 3, 4]),
    ];
    let mut checked = 0;
    for (structure, seq, ns) in fixtures {
        let problem = Problem::new(structure, seq);
        for n in ns {
            let w = empirical_worst_case(&problem, n, 1000, 20_240_917 + n as u64).map_err(|e| e.to_string())?;
            ensure!(
                w.empirical_max <= w.nth_error + 1e-12,
                "{} n={n}: residual {} exceeds e(n,d) = {}",
                problem.structure,
                w.empirical_max,
                w.nth_error
            );
            ensure!(
                (w.witness_error - w.nth_error).abs() <= 1e-12 * w.nth_error.max(f64::MIN_POSITIVE),
                "{} n={n}: witness {} vs e(n,d) = {}",
                problem.structure,
                w.witness_error,
                w.nth_error
            );
            checked += 1;
        }
    }
    Ok(format!("{checked} (fixture, n) pairs × 1000 elements"))
}

fn random_coeffs(rng: &mut ChaCha8Rng, d: usize, terms: usize) -> SparseCoefficients<BigRational> {
    SparseCoefficients::from_entries((0..terms).map(|_| {
        let k = MultiIndex((0..d).map(|_| rng.random_range(1..=3)).collect());
        (k, q(rng.random_range(-5..=5), rng.random_range(1..=4)))
    }))
}

fn canonical_up_to(structure: &SymmetryStructure, max: usize) -> Vec<MultiIndex> {
    use itertools::Itertools;
    (0..structure.d())
        .map(|_| 1..=max)
        .multi_cartesian_product()
        .map(MultiIndex)
        .filter(|k| structure.is_canonical(k))
        .collect()
}

fn projector_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checks = 0;
    for structure in structures_up_to_four() {
        let d = structure.d();
        for _ in 0..12 {
            let f = random_coeffs(&mut rng, d, 6);
            for (g, group) in structure.groups().iter().enumerate() {
                let p = structure.project(g, group.kind, &f).map_err(|e| e.to_string())?;
                let pp = structure.project(g, group.kind, &p).map_err(|e| e.to_string())?;
                ensure!(pp == p, "{structure}: P² ≠ P");
                ensure!(p.norm_sq() <= f.norm_sq(), "{structure}: ‖Pf‖ > ‖f‖");
                if group.kind == GroupKind::Antisymmetric {
                    let mut k: Vec<usize> = (0..d).map(|_| rng.random_range(1..=3)).collect();
                    k[group.coords[1]] = k[group.coords[0]];
                    let unit = SparseCoefficients::<BigRational>::unit(MultiIndex(k));
                    let killed = structure.project(g, group.kind, &unit).map_err(|e| e.to_string())?;
                    ensure!(killed.is_empty(), "{structure}: repeated index not annihilated");
                }
                checks += 1;
            }
            let all = structure.project_all(&f).map_err(|e| e.to_string())?;
            ensure!(structure.project_all(&all).map_err(|e| e.to_string())? == all, "{structure}: combined P² ≠ P");
        }
        let basis: Vec<_> = canonical_up_to(&structure, 4)
            .iter()
            .map(|k| structure.xi_expansion(k).unwrap())
            .collect();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let expected = if i == j { <BigRational as One>::one() } else { <BigRational as Zero>::zero() };
                ensure!(a.signed_inner_sq(b) == expected, "{structure}: ξ basis not orthonormal");
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} exact identities"))
}

fn initial_errors() -> Outcome {
    let families = [
        EigenSequence::power_decay(1.0).unwrap(),
        EigenSequence::power_decay(0.75).unwrap(),
        EigenSequence::geometric(0.6, 1.7).unwrap(),
        EigenSequence::shifted_power(1.0).unwrap(),
        EigenSequence::finite_rank(&[3.0, 2.0, 1.5, 1.0, 0.9, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05]).unwrap(),
    ];
    let mut worst = 0.0f64;
    for seq in &families {
        for d in 1..=10 {
            let asy: f64 = (1..=d).map(|j| seq.eigenvalue(j).sqrt()).product();
            let sym = seq.eigenvalue(1).powf(d as f64 / 2.0);
            for (kind, expected) in [(GroupKind::Antisymmetric, asy), (GroupKind::Symmetric, sym)] {
                let first = SpectrumStream::<LogValue>::new(&full(kind, d), seq).unwrap().next().unwrap();
                let got = (0.5 * first.value.0).exp();
                let rel = (got - expected).abs() / expected;
                worst = worst.max(rel);
                ensure!(rel <= 1e-14, "{seq} {kind} d={d}: {got} vs {expected} (rel {rel:e})");
            }
        }
    }
    Ok(format!("worst relative deviation {worst:.1e}"))
}

fn normalized_lower_bound() -> Outcome {
    let mut checks = 0;
    for (alpha, two_alpha) in [(0.5, 1u32), (1.0, 2u32)] {
        let seq = EigenSequence::power_decay(alpha).unwrap();
        for d in 2..=6usize {
            let problem = Problem::new(full(GroupKind::Antisymmetric, d), seq.clone());
            for eps in [q(9, 10), q(1, 2), q(1, 4)] {
                let n = problem
                    .info_complexity(&eps, Criterion::Normalized, &CountOptions::default())
                    .map_err(|e| e.to_string())?;
                let n = finite(&n.count)?;
                // (ε′)^{−1/α} = (1/ε′)^{2/(2α)}; here 2/(2α) ∈ {2, 1}
                let inv = eps.recip();
                let power = num_traits::pow(inv, (2 / two_alpha) as usize);
                let bound = BigRational::from_integer(BigInt::from(d)) * (power - <BigRational as One>::one());
                ensure!(
                    BigRational::from_integer(BigInt::from(n)) >= bound,
                    "α={alpha} d={d} ε′={eps}: n = {n} below {bound}"
                );
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} exact comparisons"))
}

fn classification_battery() -> Outcome {
    use Criterion::{Absolute, Normalized};
    use StructureSchedule::{Entire, FullyAntisymmetric, FullySymmetric};
    let opts = ClassifyOptions::default();
    let cases = [
        (Entire, EigenSequence::unit_rank(2).unwrap(), Absolute, "Curse"),
        (FullySymmetric, EigenSequence::unit_rank(2).unwrap(), Absolute, "PolyTract-not-Strong"),
        (FullyAntisymmetric, EigenSequence::unit_rank(2).unwrap(), Absolute, "StrongPolyTract"),
        (Entire, EigenSequence::unit_rank(4).unwrap(), Absolute, "Curse"),
        (FullySymmetric, EigenSequence::unit_rank(4).unwrap(), Absolute, "PolyTract-not-Strong"),
        (FullyAntisymmetric, EigenSequence::unit_rank(4).unwrap(), Absolute, "StrongPolyTract"),
        (FullyAntisymmetric, EigenSequence::shifted_power(1.0).unwrap(), Absolute, "StrongPolyTract"),
        (FullySymmetric, EigenSequence::shifted_power(1.0).unwrap(), Absolute, "PolyTract-not-Strong"),
        (Entire, EigenSequence::shifted_power(1.0).unwrap(), Absolute, "Curse"),
        (FullyAntisymmetric, EigenSequence::shifted_power(2.0).unwrap(), Absolute, "StrongPolyTract"),
        (FullySymmetric, EigenSequence::shifted_power(2.0).unwrap(), Absolute, "PolyTract-not-Strong"),
        (FullyAntisymmetric, EigenSequence::log_decay(), Absolute, "PolyIntractable"),
        (FullyAntisymmetric, EigenSequence::power_decay(1.0).unwrap(), Absolute, "StrongPolyTract"),
    ];
    for (schedule, seq, criterion, expected) in &cases {
        let r = classify(schedule, seq, *criterion, &opts).map_err(|e| e.to_string())?;
        ensure!(r.verdict.as_str() == *expected, "{schedule} {seq} {criterion}: {} ≠ {expected}", r.verdict);
    }
    let r = classify(&FullyAntisymmetric, &EigenSequence::power_decay(1.0).unwrap(), Normalized, &opts)
        .map_err(|e| e.to_string())?;
    ensure!(r.strong == Some(false) && r.verdict.as_str() != "StrongPolyTract", "normalized power decay: {r:?}");
    Ok(format!("{} verdicts plus the normalized non-strong case", cases.len()))
}

fn appendix_inequality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut equalities = 0;
    for _ in 0..1000 {
        let len = rng.random_range(1..=6);
        let mut raw: Vec<i64> = (0..len).map(|_| rng.random_range(0..=16)).collect();
        raw.sort_unstable_by(|a, b| b.cmp(a));
        raw[0] = raw[0].max(1);
        let mu: Vec<BigRational> = raw.iter().map(|&x| q(x, 8)).collect();
        let d = rng.random_range(1..=5);
        let v = rng.random_range(0..=3);
        let c = verify_appendix_inequality(&mu, d, v).map_err(|e| e.to_string())?;
        ensure!(c.holds, "μ={raw:?}/8 d={d} V={v}: {} > {}", c.lhs, c.rhs);
        if v == 0 {
            ensure!(c.lhs == c.rhs, "μ={raw:?}/8 d={d}: no equality at V = 0");
            equalities += 1;
        }
    }
    Ok(format!("1000 instances, {equalities} exact equalities at V = 0"))
}

fn sum_condition_trend() -> Outcome {
    let seq = EigenSequence::power_decay(1.0).unwrap();
    let c = check_sum_condition_abs(&StructureSchedule::FullyAntisymmetric, &seq, 1.0, 0.0, CutoffRule::NONE_OMITTED, 2..=20)
        .map_err(|e| e.to_string())?;
    for w in c.points.windows(2) {
        ensure!(w[1].value < w[0].value, "d={} → {}: {} ≥ {}", w[0].d, w[1].d, w[1].value, w[0].value);
    }
    let last = c.points.last().unwrap();
    Ok(format!("d=2: {:.4}, d=20: {:.3e}", c.points[0].value, last.value))
}

fn main() {
    let criteria: [Check; 10] = [
        ("finite-rank complexity table", finite_rank_table),
        ("antisymmetric recursion equals counting", recursion_equals_counting),
        ("fast count equals brute-force oracle", oracle_equivalence),
        ("n-th minimal error formula", error_formula),
        ("projector algebra", projector_algebra),
        ("initial errors", initial_errors),
        ("normalized antisymmetric lower bound", normalized_lower_bound),
        ("classification battery", classification_battery),
        ("appendix inequality", appendix_inequality),
        ("sum-condition trend", sum_condition_trend),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2}: FAIL  {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    let _ = panic::take_hook();
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

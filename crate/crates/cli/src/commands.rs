//! One function per subcommand. Each returns its table plus flags that
//! decide the exit code once every row has been written.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use symtract::complexity::{closed_form_finite_rank, exact_antisymmetric_count, StructureKind};
use symtract::enumeration::{brute_force_count, count_above, CountOptions};
use symtract::numeric::{rational_to_f64, Real};
use symtract::optimal::empirical_worst_case;
use symtract::spectrum::{Family, SpectralValue};
use symtract::symmetry::SparseCoefficients;
use symtract::tractability::{classify, verify_appendix_inequality, ClassifyOptions};
use symtract::{Count, Criterion, EigenSequence, GroupKind, LogValue, MultiIndex, Problem, SymmetryStructure, Tally};

use crate::config::{Loaded, Mode};
use crate::output::{col, json_only, Table};
use crate::CliError;

/// Truncation side used by the brute-force oracle in `verify`.
const ORACLE_CUBE: usize = 12;
/// `verify` defaults when the config leaves them empty.
const VERIFY_DIMS: [usize; 4] = [1, 2, 3, 4];
const VERIFY_EPS: [(i64, i64); 3] = [(1, 2), (1, 5), (1, 10)];

pub struct Outcome {
    pub table: Table,
    /// Some count was infinite or some sum divergent.
    pub infinite: bool,
    /// Some invariant check failed.
    pub failed: bool,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Outcome { table, infinite: false, failed: false }
    }
}

fn options(loaded: &Loaded) -> CountOptions {
    CountOptions { horizon: loaded.config.horizon, parallel: true }
}

fn count_cell(count: &Count) -> Value {
    match count {
        Count::Finite(n) => json!(n),
        Count::Infinite(_) => json!("inf"),
    }
}

fn rational_cell(q: &BigRational) -> Value {
    json!(q.to_string())
}

/// `m` when the sequence is exactly `m` unit eigenvalues.
fn unit_rank(seq: &EigenSequence) -> Option<usize> {
    match seq.family() {
        Family::FiniteRank(values) if values.iter().all(One::is_one) => Some(values.len()),
        _ => None,
    }
}

fn structure_kind(s: &SymmetryStructure) -> Option<StructureKind> {
    if s.is_entire() {
        Some(StructureKind::Entire)
    } else if s.is_fully(GroupKind::Symmetric) {
        Some(StructureKind::FullySymmetric)
    } else if s.is_fully(GroupKind::Antisymmetric) {
        Some(StructureKind::FullyAntisymmetric)
    } else {
        None
    }
}

struct Methods {
    count: Tally,
    recursion: Option<Tally>,
}

fn run_methods<M: SpectralValue>(
    problem: &Problem,
    eps: &BigRational,
    criterion: Criterion,
    opts: &CountOptions,
) -> Result<Methods, CliError> {
    let eps = M::from_rational(eps);
    let count = problem.info_complexity(&eps, criterion, opts)?;
    let recursion = if problem.structure.is_fully(GroupKind::Antisymmetric) {
        let threshold: M = problem.threshold(&eps, criterion)?;
        Some(if threshold.is_zero() {
            Tally::finite(0)
        } else {
            exact_antisymmetric_count(&problem.seq, problem.structure.d(), &threshold, opts.horizon)?
        })
    } else {
        None
    };
    Ok(Methods { count, recursion })
}

pub fn complexity(loaded: &Loaded) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    let mode = cfg.mode.as_str();
    let opts = options(loaded);
    let mut out = Outcome::new(Table::new(&[
        col("d"),
        col("structure"),
        col("eps"),
        col("criterion"),
        col("method"),
        col("n"),
        col("ties"),
        col("agreement"),
        col("note"),
    ]));
    let eps_list = cfg.eps_list()?;
    for d in cfg.dims()? {
        let structure = cfg.structure(d)?;
        let problem = Problem::new(structure.clone(), loaded.seq.clone());
        for (label, eps) in &eps_list {
            for &criterion in &cfg.criterion {
                let methods = match cfg.mode {
                    Mode::Float => run_methods::<LogValue>(&problem, eps, criterion, &opts)?,
                    Mode::Rational => run_methods::<BigRational>(&problem, eps, criterion, &opts)?,
                };
                let mut rows: Vec<(&str, Count, u64)> = vec![("count", methods.count.count.clone(), methods.count.ties)];
                if let Some(r) = &methods.recursion {
                    rows.push(("recursion", r.count.clone(), r.ties));
                }
                if let (Some(m), Some(kind)) = (unit_rank(&loaded.seq), structure_kind(&structure)) {
                    let n = if eps < &<BigRational as One>::one() { closed_form_finite_rank(m, d, kind) } else { 0u8.into() };
                    match n.to_u64() {
                        Some(n) => rows.push(("closed_form", Count::Finite(n), 0)),
                        None => return Err(CliError::Config(format!("closed form {n} overflows u64"))),
                    }
                }
                let agreement = rows.iter().map(|r| &r.1).all_equal();
                for (method, count, ties) in rows {
                    let note = match &count {
                        Count::Infinite(reason) => {
                            out.infinite = true;
                            json!(reason.to_string())
                        }
                        Count::Finite(_) if ties > 0 => json!("float boundary ties decided as not above"),
                        Count::Finite(_) => Value::Null,
                    };
                    out.table.push(
                        &loaded.hash,
                        mode,
                        vec![
                            json!(d),
                            json!(structure.to_string()),
                            json!(label),
                            json!(criterion.to_string()),
                            json!(method),
                            count_cell(&count),
                            json!(ties),
                            json!(agreement),
                            note,
                        ],
                    );
                }
            }
        }
    }
    Ok(out)
}

pub fn errors(loaded: &Loaded) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    if cfg.n.is_empty() {
        return Err(CliError::Config("`n` is empty".into()));
    }
    let mut out = Outcome::new(Table::new(&[
        col("d"),
        col("structure"),
        col("n"),
        col("error"),
        col("error_sq"),
        col("initial_error"),
    ]));
    for d in cfg.dims()? {
        let structure = cfg.structure(d)?;
        let problem = Problem::new(structure.clone(), loaded.seq.clone());
        let init = problem.initial_error();
        for &n in &cfg.n {
            let (error, error_sq) = match cfg.mode {
                Mode::Float => {
                    let e = problem.nth_minimal_error(n);
                    (e, json!(e * e))
                }
                Mode::Rational => {
                    let sq: BigRational = problem.nth_minimal_error_sq(n)?;
                    (rational_to_f64(&sq).sqrt(), rational_cell(&sq))
                }
            };
            out.table.push(
                &loaded.hash,
                cfg.mode.as_str(),
                vec![json!(d), json!(structure.to_string()), json!(n), json!(error), error_sq, json!(init)],
            );
        }
    }
    Ok(out)
}

pub fn classify_cmd(loaded: &Loaded) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    let schedule = cfg.schedule()?;
    let opts = ClassifyOptions {
        tau_grid: cfg.tau_grid(),
        probe_dimension: cfg.probe_dimension(),
        delta: cfg.delta.unwrap_or(ClassifyOptions::default().delta),
    };
    let mut out = Outcome::new(Table::new(&[
        col("schedule"),
        col("criterion"),
        col("verdict"),
        col("strong"),
        col("polynomial"),
        col("clause"),
        col("tau"),
        col("lambda1"),
        col("lambda2"),
        col("grouped_growth"),
        col("free_growth"),
        json_only("witnesses"),
    ]));
    for &criterion in &cfg.criterion {
        let r = classify(schedule, &loaded.seq, criterion, &opts)?;
        let w = &r.witnesses;
        out.table.push(
            &loaded.hash,
            cfg.mode.as_str(),
            vec![
                json!(schedule.to_string()),
                json!(criterion.to_string()),
                json!(r.verdict.as_str()),
                json!(r.strong),
                json!(r.polynomial),
                json!(r.clause),
                json!(w.tau),
                json!(w.lambda1),
                json!(w.lambda2),
                serde_json::to_value(w.grouped_growth).map_err(|e| CliError::Io(e.to_string()))?,
                serde_json::to_value(w.free_growth).map_err(|e| CliError::Io(e.to_string()))?,
                serde_json::to_value(w).map_err(|e| CliError::Io(e.to_string()))?,
            ],
        );
    }
    Ok(out)
}

struct Check {
    suite: &'static str,
    d: Option<usize>,
    case: String,
    status: &'static str,
    detail: String,
}

fn verify_counts<M: SpectralValue>(
    loaded: &Loaded,
    structure: &SymmetryStructure,
    eps: &BigRational,
    label: &str,
    criterion: Criterion,
    checks: &mut Vec<Check>,
) -> Result<(), CliError> {
    let d = structure.d();
    let problem = Problem::new(structure.clone(), loaded.seq.clone());
    let threshold: M = problem.threshold(&M::from_rational(eps), criterion)?;
    let case = format!("{structure} eps={label} {criterion}");
    if threshold.is_zero() {
        checks.push(Check { suite: "oracle", d: Some(d), case, status: "skip", detail: "zero threshold".into() });
        return Ok(());
    }
    let fast = count_above(structure, &loaded.seq, &threshold, &options(loaded))?;
    if d <= 4 {
        let brute = brute_force_count(structure, &loaded.seq, &threshold, ORACLE_CUBE)?;
        let (status, detail) = if !brute.complete {
            ("skip", format!("cube of side {ORACLE_CUBE} does not certify the count"))
        } else if brute.tally.count != fast.count {
            ("fail", format!("brute force {} vs fast {}", brute.tally.count, fast.count))
        } else if fast.ties > 0 {
            ("tie", format!("n = {}, {} boundary ties", fast.count, fast.ties))
        } else {
            ("pass", format!("n = {}", fast.count))
        };
        checks.push(Check { suite: "oracle", d: Some(d), case: case.clone(), status, detail });
    }
    if structure.is_fully(GroupKind::Antisymmetric) {
        let rec = exact_antisymmetric_count(&loaded.seq, d, &threshold, loaded.config.horizon)?;
        let (status, detail) = if rec.count != fast.count {
            ("fail", format!("recursion {} vs count {}", rec.count, fast.count))
        } else if rec.ties + fast.ties > 0 {
            ("tie", format!("n = {}, {} boundary ties", fast.count, rec.ties + fast.ties))
        } else {
            ("pass", format!("n = {}", fast.count))
        };
        checks.push(Check { suite: "recursion", d: Some(d), case, status, detail });
    }
    Ok(())
}

fn random_coeffs(rng: &mut ChaCha8Rng, d: usize) -> SparseCoefficients<BigRational> {
    SparseCoefficients::from_entries((0..6).map(|_| {
        let k = MultiIndex((0..d).map(|_| rng.random_range(1..=3)).collect());
        let v = BigRational::new(BigInt::from(rng.random_range(-5..=5)), BigInt::from(rng.random_range(1..=4)));
        (k, v)
    }))
}

fn verify_projectors(structure: &SymmetryStructure, rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let d = structure.d();
    let mut problems = Vec::new();
    for _ in 0..8 {
        let f = random_coeffs(rng, d);
        for (g, group) in structure.groups().iter().enumerate() {
            let p = structure.project(g, group.kind, &f)?;
            if structure.project(g, group.kind, &p)? != p {
                problems.push(format!("P² ≠ P on group {}", g + 1));
            }
            if p.norm_sq() > f.norm_sq() {
                problems.push(format!("‖Pf‖ > ‖f‖ on group {}", g + 1));
            }
            if group.kind == GroupKind::Antisymmetric && group.size() >= 2 {
                let mut k = vec![1; d];
                k[group.coords[0]] = 2;
                k[group.coords[1]] = 2;
                if !structure.project(g, group.kind, &SparseCoefficients::<BigRational>::unit(MultiIndex(k)))?.is_empty() {
                    problems.push(format!("repeated index survives on group {}", g + 1));
                }
            }
        }
    }
    let basis: Vec<_> = (0..d)
        .map(|_| 1..=3usize)
        .multi_cartesian_product()
        .map(MultiIndex)
        .filter(|k| structure.is_canonical(k))
        .map(|k| structure.xi_expansion(&k))
        .collect::<Result<_, _>>()?;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let expected = if i == j { <BigRational as One>::one() } else { <BigRational as Zero>::zero() };
            if a.signed_inner_sq(b) != expected {
                problems.push(format!("basis elements {} and {} are not orthonormal", i + 1, j + 1));
            }
        }
    }
    Ok(Check {
        suite: "projector",
        d: Some(d),
        case: structure.to_string(),
        status: if problems.is_empty() { "pass" } else { "fail" },
        detail: if problems.is_empty() {
            format!("{} basis elements", basis.len())
        } else {
            problems.into_iter().unique().join("; ")
        },
    })
}

fn appendix_checks<T: Real + std::fmt::Display>(mu: &[T], exact: bool, checks: &mut Vec<Check>) -> Result<(), CliError> {
    for d in 1..=5 {
        for v in 0..=3 {
            let c = verify_appendix_inequality(mu, d, v)?;
            let equal = c.lhs == c.rhs;
            let status = if !c.holds || (exact && v == 0 && !equal) { "fail" } else { "pass" };
            checks.push(Check {
                suite: "appendix",
                d: Some(d),
                case: format!("V={v}"),
                status,
                detail: format!("lhs {} rhs {}", c.lhs, c.rhs),
            });
        }
    }
    Ok(())
}

pub fn verify(loaded: &Loaded) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    let dims = if cfg.d.is_empty() && cfg.structure.is_none() { VERIFY_DIMS.to_vec() } else { cfg.dims()? };
    let eps_list: Vec<(String, BigRational)> = if cfg.eps.is_empty() {
        VERIFY_EPS
            .iter()
            .map(|&(n, d)| (format!("{n}/{d}"), BigRational::new(n.into(), d.into())))
            .collect()
    } else {
        cfg.eps_list()?
    };
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for &d in &dims {
        let structure = cfg.structure(d)?;
        for (label, eps) in &eps_list {
            for &criterion in &cfg.criterion {
                match cfg.mode {
                    Mode::Float => verify_counts::<LogValue>(loaded, &structure, eps, label, criterion, &mut checks)?,
                    Mode::Rational => verify_counts::<BigRational>(loaded, &structure, eps, label, criterion, &mut checks)?,
                }
            }
        }
        if d <= 4 && structure.groups().iter().all(|g| g.size() <= 4) {
            checks.push(verify_projectors(&structure, &mut rng)?);
        }
    }
    let width = loaded.seq.positive_count().unwrap_or(5).clamp(1, 5);
    match (cfg.mode, (1..=width).map(|m| loaded.seq.exact_eigenvalue(m)).collect::<Option<Vec<_>>>()) {
        (Mode::Rational, Some(mu)) => appendix_checks(&mu, true, &mut checks)?,
        _ => {
            let mu: Vec<f64> = (1..=width).map(|m| loaded.seq.eigenvalue(m)).collect();
            appendix_checks(&mu, false, &mut checks)?;
        }
    }

    let mut out = Outcome::new(Table::new(&[col("suite"), col("d"), col("case"), col("status"), col("detail")]));
    for c in checks {
        out.failed |= c.status == "fail";
        out.table.push(
            &loaded.hash,
            cfg.mode.as_str(),
            vec![json!(c.suite), json!(c.d), json!(c.case), json!(c.status), json!(c.detail)],
        );
    }
    Ok(out)
}

pub fn simulate(loaded: &Loaded) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    if cfg.n.is_empty() {
        return Err(CliError::Config("`n` is empty".into()));
    }
    if cfg.trials == 0 {
        return Err(CliError::Config("`trials` must be positive".into()));
    }
    let mut out = Outcome::new(Table::new(&[
        col("d"),
        col("structure"),
        col("n"),
        col("nth_error"),
        col("empirical_max"),
        col("witness"),
        col("witness_error"),
        col("trials"),
        col("holds"),
    ]));
    for d in cfg.dims()? {
        let structure = cfg.structure(d)?;
        let problem = Problem::new(structure.clone(), loaded.seq.clone());
        for &n in &cfg.n {
            let w = empirical_worst_case(&problem, n, cfg.trials, cfg.seed)?;
            let holds = w.empirical_max <= w.nth_error + 1e-12
                && (w.witness_error - w.nth_error).abs() <= 1e-12 * w.nth_error.max(f64::MIN_POSITIVE);
            out.failed |= !holds;
            out.table.push(
                &loaded.hash,
                cfg.mode.as_str(),
                vec![
                    json!(d),
                    json!(structure.to_string()),
                    json!(n),
                    json!(w.nth_error),
                    json!(w.empirical_max),
                    json!(w.witness.as_ref().map(ToString::to_string)),
                    json!(w.witness_error),
                    json!(w.trials),
                    json!(holds),
                ],
            );
        }
    }
    Ok(out)
}

fn coeff_map<T: Real>(c: &SparseCoefficients<T>, cell: impl Fn(&T) -> Value) -> Value {
    Value::Object(c.iter().map(|(k, v)| (k.to_string(), cell(v))).collect::<Map<_, _>>())
}

pub fn project(loaded: &Loaded) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    let dims = cfg.dims()?;
    let [d] = dims[..] else {
        return Err(CliError::Config("`project` needs exactly one dimension".into()));
    };
    let structure = cfg.structure(d)?;
    let coeffs = cfg.coefficients()?;
    if let Some((k, _)) = coeffs.iter().find(|(k, _)| k.len() != d) {
        return Err(CliError::Config(format!("index {k} does not have {d} entries")));
    }
    let mut targets: Vec<(String, String, Option<usize>)> = structure
        .groups()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.size() > 1)
        .map(|(i, g)| (format!("group {}", i + 1), g.kind.to_string(), Some(i)))
        .collect();
    targets.push(("all".into(), "combined".into(), None));

    let mut out = Outcome::new(Table::new(&[
        col("structure"),
        col("target"),
        col("kind"),
        col("terms"),
        col("norm_sq"),
        col("coeffs"),
    ]));
    for (target, kind, group) in targets {
        let (terms, norm_sq, map) = match cfg.mode {
            Mode::Rational => {
                let p = match group {
                    Some(g) => structure.project(g, structure.groups()[g].kind, &coeffs)?,
                    None => structure.project_all(&coeffs)?,
                };
                (p.len(), rational_cell(&p.norm_sq()), coeff_map(&p, rational_cell))
            }
            Mode::Float => {
                let f = coeffs.to_f64();
                let p = match group {
                    Some(g) => structure.project(g, structure.groups()[g].kind, &f)?,
                    None => structure.project_all(&f)?,
                };
                (p.len(), json!(p.norm_sq()), coeff_map(&p, |v| json!(v)))
            }
        };
        out.table.push(
            &loaded.hash,
            cfg.mode.as_str(),
            vec![json!(structure.to_string()), json!(target), json!(kind), json!(terms), norm_sq, map],
        );
    }
    Ok(out)
}

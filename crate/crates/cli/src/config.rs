//! The JSON run configuration.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use symtract::numeric::{parse_rational, rational_from_f64};
use symtract::spectrum::{TailRule, DEFAULT_HORIZON};
use symtract::symmetry::SparseCoefficients;
use symtract::tractability::{StructureSchedule, DEFAULT_PROBE_DIMENSION, DEFAULT_TAU_GRID};
use symtract::{Criterion, EigenSequence, GroupKind, MultiIndex, SymmetryStructure};

use crate::CliError;

/// A number given either as a JSON number or as a decimal/fraction string.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn rational(&self) -> Result<BigRational, CliError> {
        match self {
            Number::Float(x) => rational_from_f64(*x),
            Number::Text(s) => parse_rational(s),
        }
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Float,
    Rational,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Float => "float",
            Mode::Rational => "rational",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailSpec {
    Zero,
    Geometric { ratio: Number },
    Power { exponent: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaSpec {
    FiniteRank { values: Vec<Number> },
    /// `m` unit eigenvalues.
    UnitRank { m: usize },
    PowerDecay { alpha: f64 },
    ShiftedPower { beta: f64 },
    Geometric { ratio: Number, scale: Option<Number> },
    LogDecay,
    Explicit { values: Vec<Number>, tail: TailSpec },
}

impl LambdaSpec {
    pub fn build(&self) -> Result<EigenSequence, CliError> {
        let list = |values: &[Number]| values.iter().map(Number::rational).collect::<Result<Vec<_>, _>>();
        let seq = match self {
            LambdaSpec::FiniteRank { values } => EigenSequence::finite_rank_exact(list(values)?),
            LambdaSpec::UnitRank { m } => EigenSequence::unit_rank(*m),
            LambdaSpec::PowerDecay { alpha } => EigenSequence::power_decay(*alpha),
            LambdaSpec::ShiftedPower { beta } => EigenSequence::shifted_power(*beta),
            LambdaSpec::Geometric { ratio, scale } => {
                let scale = match scale {
                    Some(s) => s.rational()?,
                    None => BigRational::from_integer(1.into()),
                };
                EigenSequence::geometric_exact(ratio.rational()?, scale)
            }
            LambdaSpec::LogDecay => Ok(EigenSequence::log_decay()),
            LambdaSpec::Explicit { values, tail } => {
                let tail = match tail {
                    TailSpec::Zero => TailRule::Zero,
                    TailSpec::Geometric { ratio } => TailRule::Geometric { ratio: ratio.rational()? },
                    TailSpec::Power { exponent } => TailRule::Power { exponent: *exponent },
                };
                EigenSequence::explicit_exact(list(values)?, tail)
            }
        };
        seq.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    /// 0-based coordinates.
    pub coords: Vec<usize>,
    pub kind: GroupKind,
}

/// A structure for one fixed dimension.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    pub d: usize,
    #[serde(default)]
    pub groups: Vec<GroupSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: LambdaSpec,
    pub structure: Option<StructureSpec>,
    pub schedule: Option<StructureSchedule>,
    #[serde(default)]
    pub d: Vec<usize>,
    #[serde(default)]
    pub eps: Vec<Number>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default = "default_criteria")]
    pub criterion: Vec<Criterion>,
    pub tau_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub probe_dimension: Option<usize>,
    pub delta: Option<f64>,
    /// Coefficients keyed by `"(k1,…,kd)"`, for `project`.
    #[serde(default)]
    pub coeffs: BTreeMap<String, Number>,
}

fn default_criteria() -> Vec<Criterion> {
    vec![Criterion::Absolute]
}

fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}

fn default_trials() -> usize {
    1000
}

/// A parsed configuration with its validated sequence and content hash.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: RunConfig,
    pub seq: EigenSequence,
    /// First 16 hex digits of the SHA-256 of the config bytes.
    pub hash: String,
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn load(bytes: &[u8]) -> Result<Loaded, CliError> {
    let config: RunConfig = serde_json::from_slice(bytes).map_err(|e| CliError::Config(e.to_string()))?;
    let seq = config.lambda.build()?;
    if config.mode == Mode::Rational && !seq.supports_exact() {
        return Err(CliError::Config(format!("rational mode is not available for `{seq}`")));
    }
    if config.structure.is_some() && config.schedule.is_some() {
        return Err(CliError::Config("give either `structure` or `schedule`, not both".into()));
    }
    if let Some(schedule) = &config.schedule {
        schedule.validate().map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(s) = &config.structure {
        if !config.d.is_empty() && config.d != [s.d] {
            return Err(CliError::Config(format!("`d` conflicts with the explicit structure of dimension {}", s.d)));
        }
    }
    if config.horizon == 0 {
        return Err(CliError::Config("`horizon` must be positive".into()));
    }
    Ok(Loaded { config, seq, hash: hash_bytes(bytes) })
}

impl RunConfig {
    /// Dimensions to run, in config order.
    pub fn dims(&self) -> Result<Vec<usize>, CliError> {
        let dims = match &self.structure {
            Some(s) => vec![s.d],
            None => self.d.clone(),
        };
        if dims.is_empty() {
            return Err(CliError::Config("no dimensions: set `d` or an explicit `structure`".into()));
        }
        if dims.contains(&0) {
            return Err(CliError::Config("dimensions must be positive".into()));
        }
        Ok(dims)
    }

    /// The structure for dimension `d`; without `structure` or `schedule`
    /// the entire space is used.
    pub fn structure(&self, d: usize) -> Result<SymmetryStructure, CliError> {
        let built = match (&self.structure, &self.schedule) {
            (Some(s), _) => SymmetryStructure::new(
                s.d,
                s.groups.iter().map(|g| (g.coords.clone(), g.kind)).collect(),
            ),
            (None, Some(schedule)) => schedule.structure(d),
            (None, None) => SymmetryStructure::entire(d),
        };
        built.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn schedule(&self) -> Result<&StructureSchedule, CliError> {
        self.schedule
            .as_ref()
            .ok_or_else(|| CliError::Config("`classify` needs a `schedule`".into()))
    }

    pub fn eps_list(&self) -> Result<Vec<(String, BigRational)>, CliError> {
        if self.eps.is_empty() {
            return Err(CliError::Config("`eps` is empty".into()));
        }
        self.eps
            .iter()
            .map(|e| {
                let q = e.rational()?;
                if q <= BigRational::from_integer(0.into()) {
                    return Err(CliError::Config(format!("ε must be positive, got {q}")));
                }
                let label = match e {
                    Number::Float(x) => x.to_string(),
                    Number::Text(s) => s.trim().to_string(),
                };
                Ok((label, q))
            })
            .collect()
    }

    pub fn tau_grid(&self) -> Vec<f64> {
        self.tau_grid.clone().unwrap_or_else(|| DEFAULT_TAU_GRID.to_vec())
    }

    pub fn probe_dimension(&self) -> usize {
        self.probe_dimension.unwrap_or(DEFAULT_PROBE_DIMENSION)
    }

    pub fn coefficients(&self) -> Result<SparseCoefficients<BigRational>, CliError> {
        if self.coeffs.is_empty() {
            return Err(CliError::Config("`coeffs` is empty".into()));
        }
        let entries = self
            .coeffs
            .iter()
            .map(|(k, v)| {
                let k: MultiIndex = k.parse().map_err(|e: symtract::Error| CliError::Config(e.to_string()))?;
                Ok((k, v.rational()?))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(SparseCoefficients::from_entries(entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families_and_numbers() {
        let cfg = br#"{"lambda": {"family": "finite_rank", "values": [1, "1/2", "0.25"]}, "d": [2], "eps": [0.3, "1/2"]}"#;
        let loaded = load(cfg).unwrap();
        assert_eq!(loaded.seq.eigenvalue(3), 0.25);
        let eps = loaded.config.eps_list().unwrap();
        assert_eq!(eps[0].1, BigRational::new(3.into(), 10.into()));
        assert_eq!(eps[1].0, "1/2");
        assert_eq!(loaded.hash.len(), 16);
    }

    #[test]
    fn rejects_bad_configs() {
        let increasing = br#"{"lambda": {"family": "finite_rank", "values": [0.5, 1]}}"#;
        assert!(matches!(load(increasing), Err(CliError::Config(m)) if m.contains("non-increasing")));
        let rational_power = br#"{"lambda": {"family": "power_decay", "alpha": 0.3}, "mode": "rational"}"#;
        assert!(matches!(load(rational_power), Err(CliError::Config(_))));
        let unknown = br#"{"lambda": {"family": "log_decay"}, "epsilon": [0.1]}"#;
        assert!(matches!(load(unknown), Err(CliError::Config(_))));
        let both = br#"{"lambda": {"family": "log_decay"}, "structure": {"d": 2}, "schedule": {"rule": "entire"}}"#;
        assert!(matches!(load(both), Err(CliError::Config(_))));
    }

    #[test]
    fn structure_sources() {
        let explicit = br#"{"lambda": {"family": "unit_rank", "m": 2},
            "structure": {"d": 3, "groups": [{"coords": [0, 2], "kind": "antisymmetric"}]}}"#;
        let loaded = load(explicit).unwrap();
        assert_eq!(loaded.config.dims().unwrap(), vec![3]);
        assert_eq!(loaded.config.structure(3).unwrap().groups().len(), 1);

        let scheduled = br#"{"lambda": {"family": "unit_rank", "m": 2}, "d": [1, 4],
            "schedule": {"rule": "fixed_free", "kind": "symmetric", "free": 1}}"#;
        let loaded = load(scheduled).unwrap();
        assert_eq!(loaded.config.structure(4).unwrap().free_count(), 1);
    }

    #[test]
    fn hash_tracks_bytes() {
        assert_eq!(hash_bytes(b"{}"), hash_bytes(b"{}"));
        assert_ne!(hash_bytes(b"{}"), hash_bytes(b"{ }"));
    }
}

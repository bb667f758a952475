use std::fmt;

use serde::Serialize;

/// Why a count could not be reported as a finite integer.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum InfiniteReason {
    /// The eigenvalues do not decay below the threshold: the count is
    /// provably infinite.
    NonCompact { limit: f64 },
    /// The search passed the probing horizon without the sequence dropping
    /// below the threshold; the count is not certified finite.
    HorizonExceeded { horizon: u64 },
}

impl fmt::Display for InfiniteReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfiniteReason::NonCompact { limit } => write!(
                f,
                "eigenvalues accumulate at {limit}, so infinitely many products exceed the threshold"
            ),
            InfiniteReason::HorizonExceeded { horizon } => write!(
                f,
                "eigenvalues stay above the threshold up to the probing horizon {horizon}"
            ),
        }
    }
}

/// Number of eigenvalues strictly above a threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Count {
    Finite(u64),
    Infinite(InfiniteReason),
}

impl Count {
    pub fn finite(&self) -> Option<u64> {
        match self {
            Count::Finite(n) => Some(*n),
            Count::Infinite(_) => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Count::Infinite(_))
    }

    pub(crate) fn add(self, other: Count) -> Count {
        match (self, other) {
            (Count::Finite(a), Count::Finite(b)) => Count::Finite(a + b),
            (inf @ Count::Infinite(_), _) | (_, inf @ Count::Infinite(_)) => inf,
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Infinite(_) => write!(f, "inf"),
        }
    }
}

/// A count together with the number of float-mode boundary ties that were
/// decided as "not above".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tally {
    pub count: Count,
    pub ties: u64,
}

impl Tally {
    pub fn finite(n: u64) -> Self {
        Tally { count: Count::Finite(n), ties: 0 }
    }

    pub fn infinite(reason: InfiniteReason) -> Self {
        Tally { count: Count::Infinite(reason), ties: 0 }
    }

    pub(crate) fn merge(self, other: Tally) -> Tally {
        Tally { count: self.count.add(other.count), ties: self.ties + other.ties }
    }
}

//! Clearing algorithms.
//!
//! Three iteration types drive everything here:
//!
//! * **Picard** — iterate `R ↦ Φ(R)`.
//! * **Elsinger** — one debt step `Φ^d(r; s(r))`, then the exact equity
//!   response `s(r)` from the equity sub-algorithm.
//! * **Hybrid** — the exact debt response for fixed equity (Eisenberg–Noe
//!   style when decreasing, an inner Picard loop when increasing), then `s(r)`.
//!
//! Each can run from the upper bound (decreasing iterates) or the lower bound
//! (increasing iterates) and stop on an ℓ1 tolerance, or be wrapped in one of
//! the finite schemes — Trial-and-Error, Sandwich, Modified Sandwich — that
//! guess the default set and solve one linear system for the exact answer.

mod finite;
mod iterative;
mod oracle;
mod sub;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ClearingState, FinancialSystem, ModelError};

pub use finite::{
    first_candidate_outcomes, sandwich, sandwich_modified, sandwich_with, trial_error, trial_error_decreasing,
    trial_error_increasing, trial_error_with, FirstCandidate,
};
pub use iterative::{elsinger, hybrid, iterate, picard, Bound, PicardStart, Stepper};
pub use oracle::{oracle_enumerate, OracleResult, ORACLE_MAX_FIRMS};
pub use sub::{
    debt_subalgorithm_en, debt_subalgorithm_picard, equity_subalgorithm, DebtPicardOutcome, PseudoEquityState,
    SubResult,
};

/// Cap on outer iterations of every iterative loop.
pub const MAX_ITERATIONS: usize = 10_000;

/// Default outer tolerance.
pub const DEFAULT_EPS: f64 = 1e-3;

/// Inner tolerance of the increasing Hybrid debt step when no outer tolerance
/// is in play (finite algorithms): `DEFAULT_EPS / 10`.
pub const DEFAULT_INNER_EPS: f64 = 1e-4;

/// Lag used by the Modified Sandwich when none is given.
pub const DEFAULT_SANDWICH_LAG: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("supersolution condition fails: Φ^d(r; s) exceeds r by {excess:e} at firm {firm}")]
    PreconditionViolated { firm: usize, excess: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no default set yields a fixed point")]
    NoFixedPointFound,
    #[error("{count} distinct fixed points found")]
    MultipleFixedPoints { count: usize },
    #[error("no candidate default set appeared within {iterations} iterations")]
    NoCandidate { iterations: usize },
    #[error("oracle enumeration is capped at {ORACLE_MAX_FIRMS} firms, got {0}")]
    TooManyFirms(usize),
}

impl From<crate::linalg::LinalgError> for SolverError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        SolverError::Model(ModelError::Linalg(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
    Both,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
            Direction::Both => "both",
            Direction::NotApplicable => "n/a",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "increasing" | "inc" | "i" => Ok(Direction::Increasing),
            "decreasing" | "dec" | "d" => Ok(Direction::Decreasing),
            "both" => Ok(Direction::Both),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Picard,
    Elsinger,
    Hybrid,
}

impl MethodKind {
    pub const ALL: [MethodKind; 3] = [MethodKind::Picard, MethodKind::Elsinger, MethodKind::Hybrid];

    /// `P`, `E` or `H`.
    pub fn letter(self) -> char {
        match self {
            MethodKind::Picard => 'P',
            MethodKind::Elsinger => 'E',
            MethodKind::Hybrid => 'H',
        }
    }

    /// 3 for Picard, 2 otherwise.
    pub fn default_lag(self) -> usize {
        match self {
            MethodKind::Picard => 3,
            MethodKind::Elsinger | MethodKind::Hybrid => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Picard => "picard",
            MethodKind::Elsinger => "elsinger",
            MethodKind::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "picard" | "p" => Ok(MethodKind::Picard),
            "elsinger" | "e" => Ok(MethodKind::Elsinger),
            "hybrid" | "h" => Ok(MethodKind::Hybrid),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

/// Which algorithm produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmId {
    Iterative(MethodKind),
    TrialError(MethodKind),
    Sandwich(MethodKind),
    ModifiedSandwich(MethodKind),
    Oracle,
}

impl AlgorithmId {
    pub fn method(self) -> Option<MethodKind> {
        match self {
            AlgorithmId::Iterative(m)
            | AlgorithmId::TrialError(m)
            | AlgorithmId::Sandwich(m)
            | AlgorithmId::ModifiedSandwich(m) => Some(m),
            AlgorithmId::Oracle => None,
        }
    }

    /// Finite algorithms stop on an exact fixed-point test, not on a tolerance.
    pub fn is_finite(self) -> bool {
        !matches!(self, AlgorithmId::Iterative(_))
    }

    /// Family label without direction: `P`, `TE`, `SH`, `MSP`, `ORACLE`.
    pub fn family_label(self) -> String {
        match self {
            AlgorithmId::Iterative(m) => m.letter().to_string(),
            AlgorithmId::TrialError(m) => format!("T{}", m.letter()),
            AlgorithmId::Sandwich(m) => format!("S{}", m.letter()),
            AlgorithmId::ModifiedSandwich(m) => format!("MS{}", m.letter()),
            AlgorithmId::Oracle => "ORACLE".to_string(),
        }
    }
}

/// One runnable algorithm configuration, labelled the way result tables are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub algorithm: AlgorithmId,
    pub direction: Direction,
}

impl Variant {
    pub fn new(algorithm: AlgorithmId, direction: Direction) -> Self {
        Variant { algorithm, direction }
    }

    /// The fifteen variants of the runtime comparison: six iterative, six
    /// Trial-and-Error, three Sandwich.
    pub fn runtime_set() -> Vec<Variant> {
        let mut out = Vec::with_capacity(15);
        for family in [AlgorithmId::Iterative as fn(MethodKind) -> AlgorithmId, AlgorithmId::TrialError] {
            for m in MethodKind::ALL {
                for dir in [Direction::Decreasing, Direction::Increasing] {
                    out.push(Variant::new(family(m), dir));
                }
            }
        }
        for m in MethodKind::ALL {
            out.push(Variant::new(AlgorithmId::Sandwich(m), Direction::Both));
        }
        out
    }

    /// The runtime set plus the three Modified Sandwich variants.
    pub fn all() -> Vec<Variant> {
        let mut out = Self::runtime_set();
        for m in MethodKind::ALL {
            out.push(Variant::new(AlgorithmId::ModifiedSandwich(m), Direction::Both));
        }
        out
    }

    /// `DP`, `IH`, `DTE`, `ITP`, `SH`, `MSE`, ...
    pub fn label(self) -> String {
        let prefix = match self.direction {
            Direction::Decreasing => "D",
            Direction::Increasing => "I",
            Direction::Both | Direction::NotApplicable => "",
        };
        format!("{prefix}{}", self.algorithm.family_label())
    }

    pub fn from_label(label: &str) -> Option<Variant> {
        Self::all().into_iter().find(|v| v.label().eq_ignore_ascii_case(label))
    }

    pub fn run(self, f: &FinancialSystem, opts: &SolveOptions) -> Result<SolverReport, SolverError> {
        match (self.algorithm, self.direction) {
            (AlgorithmId::Iterative(m), Direction::Decreasing) => {
                iterate(f, m, Bound::Upper, opts.eps, opts.inner_eps_for(m))
            }
            (AlgorithmId::Iterative(m), Direction::Increasing) => {
                iterate(f, m, Bound::Lower, opts.eps, opts.inner_eps_for(m))
            }
            (AlgorithmId::TrialError(m), dir @ (Direction::Decreasing | Direction::Increasing)) => {
                trial_error_with(f, m, dir, opts.lag_for(m), opts.finite_inner_eps)
            }
            (AlgorithmId::Sandwich(m), _) => sandwich_with(f, m, None, opts.finite_inner_eps),
            (AlgorithmId::ModifiedSandwich(m), _) => {
                sandwich_with(f, m, Some(opts.sandwich_lag), opts.finite_inner_eps)
            }
            (AlgorithmId::Oracle, _) => oracle_enumerate(f).map(|o| o.into_report()),
            _ => Err(SolverError::InvalidArgument(format!(
                "{} has no {} version",
                self.algorithm.family_label(),
                self.direction
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Knobs shared by all solver entry points.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Outer tolerance of the iterative algorithms.
    pub eps: f64,
    /// Trial-and-Error lag; `None` means the method default.
    pub lag: Option<usize>,
    pub sandwich_lag: usize,
    /// Inner tolerance of the increasing Hybrid debt step inside finite algorithms.
    pub finite_inner_eps: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            eps: DEFAULT_EPS,
            lag: None,
            sandwich_lag: DEFAULT_SANDWICH_LAG,
            finite_inner_eps: DEFAULT_INNER_EPS,
        }
    }
}

impl SolveOptions {
    pub fn with_eps(eps: f64) -> Self {
        SolveOptions {
            eps,
            ..Self::default()
        }
    }

    pub fn lag_for(&self, m: MethodKind) -> usize {
        self.lag.unwrap_or_else(|| m.default_lag())
    }

    /// The iterative algorithms tighten the inner loop to a tenth of the outer tolerance.
    pub fn inner_eps_for(&self, _m: MethodKind) -> f64 {
        self.eps / 10.0
    }
}

/// A solution together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub solution: ClearingState,
    /// Outer iteration steps.
    pub iterations: usize,
    pub linear_solves: usize,
    /// Evaluations of Φ, Φ^d or Φ^s.
    pub phi_applications: usize,
    /// Seconds, measured around the solver call.
    pub wall_time: f64,
    pub converged: bool,
    pub algorithm: AlgorithmId,
    pub direction: Direction,
    /// Pseudo solutions tested by a finite algorithm.
    pub trials: usize,
    pub diagnostic: Option<String>,
}

impl SolverReport {
    pub fn variant(&self) -> Variant {
        Variant::new(self.algorithm, self.direction)
    }

    pub fn label(&self) -> String {
        self.variant().label()
    }
}

/// Running tallies shared by the iteration machinery.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub linear_solves: usize,
    pub phi_applications: usize,
}

impl Counters {
    pub(crate) fn absorb(&mut self, other: Counters) {
        self.linear_solves += other.linear_solves;
        self.phi_applications += other.phi_applications;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_unique_and_round_trip() {
        let all = Variant::all();
        assert_eq!(all.len(), 18);
        assert_eq!(Variant::runtime_set().len(), 15);
        let labels: Vec<String> = all.iter().map(|v| v.label()).collect();
        for (i, l) in labels.iter().enumerate() {
            assert!(!labels[..i].contains(l), "duplicate {l}");
            assert_eq!(Variant::from_label(l), Some(all[i]));
        }
        assert!(labels.contains(&"DP".to_string()));
        assert!(labels.contains(&"ITH".to_string()));
        assert!(labels.contains(&"SE".to_string()));
        assert!(labels.contains(&"MSH".to_string()));
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("Hybrid".parse::<MethodKind>(), Ok(MethodKind::Hybrid));
        assert_eq!("dec".parse::<Direction>(), Ok(Direction::Decreasing));
        assert!("sideways".parse::<Direction>().is_err());
    }

    #[test]
    fn default_lags() {
        assert_eq!(MethodKind::Picard.default_lag(), 3);
        assert_eq!(MethodKind::Elsinger.default_lag(), 2);
        assert_eq!(MethodKind::Hybrid.default_lag(), 2);
    }
}

use std::time::Instant;

use crate::model::{ClearingState, DefaultSet, FinancialSystem};

use super::{AlgorithmId, Direction, SolverError, SolverReport};

/// Largest system the oracle will enumerate.
pub const ORACLE_MAX_FIRMS: usize = 20;

/// Result of checking every default set.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub solution: ClearingState,
    /// The smallest passing set: the true default set `D*`.
    pub default_set: DefaultSet,
    /// Every set whose pseudo solution is the clearing vector.
    pub passing_sets: Vec<DefaultSet>,
    /// Firms that pay in full with zero equity left; adding any of them to
    /// `D*` yields the same pseudo solution.
    pub borderline: Vec<usize>,
    pub linear_solves: usize,
    pub wall_time: f64,
}

impl OracleResult {
    pub fn has_borderline(&self) -> bool {
        !self.borderline.is_empty()
    }

    pub fn into_report(self) -> SolverReport {
        SolverReport {
            solution: self.solution,
            iterations: 0,
            linear_solves: self.linear_solves,
            phi_applications: self.linear_solves,
            wall_time: self.wall_time,
            converged: true,
            algorithm: AlgorithmId::Oracle,
            direction: Direction::NotApplicable,
            trials: self.linear_solves,
            diagnostic: None,
        }
    }
}

/// Checks the pseudo solution of all `2ⁿ` default sets.
///
/// Sets that differ only by borderline firms produce the same clearing
/// vector; those are merged before uniqueness is asserted.
pub fn oracle_enumerate(f: &FinancialSystem) -> Result<OracleResult, SolverError> {
    f.require_finite_algorithms()?;
    let n = f.n();
    if n > ORACLE_MAX_FIRMS {
        return Err(SolverError::TooManyFirms(n));
    }
    let started = Instant::now();
    let tol = f.fixed_point_tol();
    let merge_tol = f.report_tol();
    let mut passing: Vec<(DefaultSet, ClearingState)> = Vec::new();
    for bits in 0u64..1 << n {
        let set = DefaultSet::from_bits(n, bits);
        let candidate = f.pseudo_solution(&set)?;
        if f.is_fixed_point(&candidate, tol) {
            passing.push((set, candidate));
        }
    }
    let Some(first) = passing.first() else {
        return Err(SolverError::NoFixedPointFound);
    };
    let mut distinct: Vec<&ClearingState> = vec![&first.1];
    for (_, sol) in &passing[1..] {
        if distinct.iter().all(|d| d.l1_distance(sol) > merge_tol) {
            distinct.push(sol);
        }
    }
    if distinct.len() > 1 {
        return Err(SolverError::MultipleFixedPoints { count: distinct.len() });
    }
    let (default_set, solution) = passing
        .iter()
        .min_by_key(|(set, _)| set.len())
        .map(|(set, sol)| (set.clone(), sol.clone()))
        .expect("at least one passing set");
    let borderline = (0..n)
        .filter(|&i| !default_set.contains(i) && passing.iter().any(|(set, _)| set.contains(i)))
        .collect();
    Ok(OracleResult {
        solution,
        default_set,
        passing_sets: passing.into_iter().map(|(s, _)| s).collect(),
        borderline,
        linear_solves: 1 << n,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{SquareMatrix, Vector};

    fn half_ring() -> SquareMatrix {
        SquareMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap()
    }

    #[test]
    fn oracle_system_b() {
        let f = FinancialSystem::new(
            Vector::from([1.0, 0.0]),
            Vector::from([1.0, 1.0]),
            half_ring(),
            SquareMatrix::zeros(2),
        )
        .unwrap();
        let out = oracle_enumerate(&f).unwrap();
        assert_eq!(out.default_set.members(), vec![1]);
        assert_eq!(out.passing_sets.len(), 1);
        assert!(out.borderline.is_empty());
        assert!(out.solution.l1_distance(&ClearingState::new(Vector::from([1.0, 0.5]), Vector::from([0.25, 0.0]))) < 1e-15);
    }

    #[test]
    fn oracle_without_links() {
        let f = FinancialSystem::new(
            Vector::from([1.0, 1.0, 3.0]),
            Vector::from([0.5, 2.0, 1.0]),
            SquareMatrix::zeros(3),
            SquareMatrix::zeros(3),
        )
        .unwrap();
        let out = oracle_enumerate(&f).unwrap();
        assert_eq!(out.solution, f.bounds_lower());
    }

    #[test]
    fn oracle_merges_borderline_sets() {
        // firm 0 receives exactly its liability: 0.5 + 0.5·1 = 1
        let f = FinancialSystem::new(
            Vector::from([0.5, 1.0]),
            Vector::from([1.0, 1.0]),
            half_ring(),
            SquareMatrix::zeros(2),
        )
        .unwrap();
        let out = oracle_enumerate(&f).unwrap();
        assert_eq!(out.passing_sets.len(), 2);
        assert!(out.default_set.is_empty());
        assert_eq!(out.borderline, vec![0]);
        assert!(out.solution.l1_distance(&ClearingState::new(Vector::from([1.0, 1.0]), Vector::from([0.0, 0.5]))) < 1e-15);
    }

    #[test]
    fn oracle_refuses_large_systems() {
        let n = ORACLE_MAX_FIRMS + 1;
        let f = FinancialSystem::new(Vector::zeros(n), Vector::zeros(n), SquareMatrix::zeros(n), SquareMatrix::zeros(n))
            .unwrap();
        assert_eq!(oracle_enumerate(&f).unwrap_err(), SolverError::TooManyFirms(n));
    }
}

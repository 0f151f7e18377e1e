//! Finite algorithms: guess the default set from a monotone iteration and
//! confirm it with one pseudo solution.

use std::time::Instant;

use crate::linalg::{solve_linear, SquareMatrix, Vector};
use crate::model::{ClearingState, DefaultSet, FinancialSystem};

use super::iterative::{Bound, Stepper};
use super::sub::equity_subalgorithm;
use super::{
    AlgorithmId, Counters, Direction, MethodKind, SolverError, SolverReport, DEFAULT_INNER_EPS, MAX_ITERATIONS,
};

/// How the first step of a Trial-and-Error run resolved.
enum Opening<'a> {
    /// The starting default set alone determines the answer.
    Closed {
        solution: ClearingState,
        counters: Counters,
        branch: &'static str,
    },
    Iterate {
        stepper: Stepper<'a>,
        initial: DefaultSet,
        threshold: i64,
    },
}

fn check_lag(lag: usize) -> Result<(), SolverError> {
    if lag >= 2 {
        Ok(())
    } else {
        Err(SolverError::InvalidArgument(format!("lag must be at least 2, got {lag}")))
    }
}

fn open<'a>(
    f: &'a FinancialSystem,
    method: MethodKind,
    direction: Direction,
    inner_eps: f64,
) -> Result<Opening<'a>, SolverError> {
    f.require_finite_algorithms()?;
    let bound = Bound::from_direction(direction).ok_or_else(|| {
        SolverError::InvalidArgument(format!("Trial-and-Error needs a single direction, got {direction}"))
    })?;
    let stepper = Stepper::new(f, method, bound, inner_eps)?;
    let initial = f.default_set(stepper.state());
    let n = f.n();
    match bound {
        Bound::Upper => {
            if initial.is_all() {
                // every firm defaults: s* = 0 and r* = (I − Md)⁻¹·a
                let mut counters = stepper.counters();
                counters.linear_solves += 1;
                let i_minus_md = SquareMatrix::identity(n).sub(f.md());
                let r = solve_linear(&i_minus_md, f.a())?;
                return Ok(Opening::Closed {
                    solution: ClearingState::new(r, Vector::zeros(n)),
                    counters,
                    branch: "all firms default at the start",
                });
            }
            if method != MethodKind::Picard && initial.is_empty() {
                return Ok(Opening::Closed {
                    counters: stepper.counters(),
                    solution: stepper.into_state(),
                    branch: "no firm defaults at the start",
                });
            }
            let threshold = if method == MethodKind::Picard { -1 } else { 0 };
            Ok(Opening::Iterate {
                stepper,
                initial,
                threshold,
            })
        }
        Bound::Lower => {
            if initial.is_empty() {
                let mut counters = stepper.counters();
                let eq = equity_subalgorithm(f, f.d())?;
                counters.absorb(eq.counters);
                return Ok(Opening::Closed {
                    solution: ClearingState::new(f.d().clone(), eq.value),
                    counters,
                    branch: "no firm defaults at the start",
                });
            }
            Ok(Opening::Iterate {
                stepper,
                initial,
                threshold: n as i64 + 1,
            })
        }
    }
}

/// Candidate size filter: larger than the last rejected set when
/// decreasing, smaller when increasing.
fn admissible(bound: Bound, size: usize, threshold: i64) -> bool {
    match bound {
        Bound::Upper => size as i64 > threshold,
        Bound::Lower => (size as i64) < threshold,
    }
}

/// Tracks how many consecutive iterates shared the current default set.
struct Streak {
    set: DefaultSet,
    length: usize,
}

impl Streak {
    fn new(set: DefaultSet) -> Self {
        Streak { set, length: 1 }
    }

    fn push(&mut self, set: DefaultSet) {
        if set == self.set {
            self.length += 1;
        } else {
            self.set = set;
            self.length = 1;
        }
    }
}

pub fn trial_error_decreasing(f: &FinancialSystem, method: MethodKind, lag: usize) -> Result<SolverReport, SolverError> {
    trial_error_with(f, method, Direction::Decreasing, lag, DEFAULT_INNER_EPS)
}

pub fn trial_error_increasing(f: &FinancialSystem, method: MethodKind, lag: usize) -> Result<SolverReport, SolverError> {
    trial_error_with(f, method, Direction::Increasing, lag, DEFAULT_INNER_EPS)
}

pub fn trial_error(
    f: &FinancialSystem,
    method: MethodKind,
    direction: Direction,
    lag: usize,
) -> Result<SolverReport, SolverError> {
    trial_error_with(f, method, direction, lag, DEFAULT_INNER_EPS)
}

/// Trial-and-Error: iterate until the default set has been the same for `lag`
/// consecutive iterates and passes the size filter, then test its pseudo
/// solution; on failure remember the size and keep iterating.
///
/// `inner_eps` only matters for the increasing Hybrid version.
pub fn trial_error_with(
    f: &FinancialSystem,
    method: MethodKind,
    direction: Direction,
    lag: usize,
    inner_eps: f64,
) -> Result<SolverReport, SolverError> {
    check_lag(lag)?;
    let started = Instant::now();
    let algorithm = AlgorithmId::TrialError(method);
    let (mut stepper, initial, mut threshold) = match open(f, method, direction, inner_eps)? {
        Opening::Closed {
            solution,
            counters,
            branch,
        } => return Ok(closed_report(f, solution, counters, algorithm, direction, branch, started)),
        Opening::Iterate {
            stepper,
            initial,
            threshold,
        } => (stepper, initial, threshold),
    };
    let bound = stepper.bound();
    let tol = f.fixed_point_tol();
    let mut streak = Streak::new(initial);
    let mut trials = 0;
    while stepper.steps() < MAX_ITERATIONS {
        stepper.step()?;
        streak.push(f.default_set(stepper.state()));
        if streak.length >= lag && admissible(bound, streak.set.len(), threshold) {
            trials += 1;
            let candidate = f.pseudo_solution(&streak.set)?;
            if f.is_fixed_point(&candidate, tol) {
                let mut counters = stepper.counters();
                counters.linear_solves += trials;
                return Ok(SolverReport {
                    solution: candidate,
                    iterations: stepper.steps(),
                    linear_solves: counters.linear_solves,
                    phi_applications: counters.phi_applications,
                    wall_time: started.elapsed().as_secs_f64(),
                    converged: true,
                    algorithm,
                    direction,
                    trials,
                    diagnostic: None,
                });
            }
            threshold = streak.set.len() as i64;
        }
    }
    let mut counters = stepper.counters();
    counters.linear_solves += trials;
    Ok(SolverReport {
        iterations: stepper.steps(),
        solution: stepper.into_state(),
        linear_solves: counters.linear_solves,
        phi_applications: counters.phi_applications,
        wall_time: started.elapsed().as_secs_f64(),
        converged: false,
        algorithm,
        direction,
        trials,
        diagnostic: Some(format!("iteration limit of {MAX_ITERATIONS} reached after {trials} trials")),
    })
}

fn closed_report(
    f: &FinancialSystem,
    solution: ClearingState,
    counters: Counters,
    algorithm: AlgorithmId,
    direction: Direction,
    branch: &'static str,
    started: Instant,
) -> SolverReport {
    let converged = f.is_fixed_point(&solution, f.report_tol());
    SolverReport {
        solution,
        iterations: 0,
        linear_solves: counters.linear_solves,
        phi_applications: counters.phi_applications,
        wall_time: started.elapsed().as_secs_f64(),
        converged,
        algorithm,
        direction,
        trials: 0,
        diagnostic: Some(if converged {
            branch.to_string()
        } else {
            format!("{branch}, but the closed form is not a fixed point")
        }),
    }
}

/// The first candidate default set a Trial-and-Error run would test at one lag.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstCandidate {
    pub lag: usize,
    /// Iteration at which the candidate appeared; `None` when the start
    /// resolved the system without any candidate.
    pub iteration: Option<usize>,
    pub set: Option<DefaultSet>,
    /// True when the candidate's pseudo solution is the clearing vector
    /// (default sets that differ only by borderline firms count as correct).
    pub correct: bool,
}

/// First candidates for several lags from a single trajectory.
///
/// Equivalent to running [`trial_error_with`] once per lag and inspecting
/// its first trial, but the iteration is shared.
pub fn first_candidate_outcomes(
    f: &FinancialSystem,
    method: MethodKind,
    direction: Direction,
    lags: &[usize],
    inner_eps: f64,
) -> Result<Vec<FirstCandidate>, SolverError> {
    for &lag in lags {
        check_lag(lag)?;
    }
    let (mut stepper, initial, threshold) = match open(f, method, direction, inner_eps)? {
        Opening::Closed { .. } => {
            return Ok(lags
                .iter()
                .map(|&lag| FirstCandidate {
                    lag,
                    iteration: None,
                    set: None,
                    correct: true,
                })
                .collect())
        }
        Opening::Iterate {
            stepper,
            initial,
            threshold,
        } => (stepper, initial, threshold),
    };
    let bound = stepper.bound();
    let tol = f.fixed_point_tol();
    let mut out: Vec<Option<FirstCandidate>> = vec![None; lags.len()];
    let mut tested: Vec<(DefaultSet, bool)> = Vec::new();
    let mut streak = Streak::new(initial);
    while out.iter().any(Option::is_none) {
        if stepper.steps() >= MAX_ITERATIONS {
            return Err(SolverError::NoCandidate {
                iterations: MAX_ITERATIONS,
            });
        }
        stepper.step()?;
        streak.push(f.default_set(stepper.state()));
        if !admissible(bound, streak.set.len(), threshold) {
            continue;
        }
        for (slot, &lag) in out.iter_mut().zip(lags) {
            if slot.is_some() || streak.length < lag {
                continue;
            }
            let correct = match tested.iter().find(|(s, _)| *s == streak.set) {
                Some(&(_, ok)) => ok,
                None => {
                    let ok = f.is_fixed_point(&f.pseudo_solution(&streak.set)?, tol);
                    tested.push((streak.set.clone(), ok));
                    ok
                }
            };
            *slot = Some(FirstCandidate {
                lag,
                iteration: Some(stepper.steps()),
                set: Some(streak.set.clone()),
                correct,
            });
        }
    }
    Ok(out.into_iter().map(|c| c.expect("all lags resolved")).collect())
}

pub fn sandwich(f: &FinancialSystem, method: MethodKind) -> Result<SolverReport, SolverError> {
    sandwich_with(f, method, None, DEFAULT_INNER_EPS)
}

pub fn sandwich_modified(f: &FinancialSystem, method: MethodKind, lag: usize) -> Result<SolverReport, SolverError> {
    sandwich_with(f, method, Some(lag), DEFAULT_INNER_EPS)
}

/// Number of paired steps with frozen, differing default sets and collapsed
/// iterates after which a Sandwich run is declared stalled.
pub fn sandwich_stall_steps(n: usize) -> usize {
    10 * n
}

/// Sandwich iteration: step from both bounds until the two default sets agree,
/// then return that set's pseudo solution.
///
/// With `lag = Some(l)` this is the Modified Sandwich: once the size gap
/// between the two default sets has been constant for `l` consecutive steps,
/// the upper iterate's default set is tested as well.
pub fn sandwich_with(
    f: &FinancialSystem,
    method: MethodKind,
    lag: Option<usize>,
    inner_eps: f64,
) -> Result<SolverReport, SolverError> {
    f.require_finite_algorithms()?;
    if let Some(l) = lag {
        check_lag(l)?;
    }
    let started = Instant::now();
    let algorithm = match lag {
        None => AlgorithmId::Sandwich(method),
        Some(_) => AlgorithmId::ModifiedSandwich(method),
    };
    let tol = f.fixed_point_tol();
    let collapse_tol = 1e-12 * (1.0 + f.d().l1_norm());
    let stall_limit = sandwich_stall_steps(f.n());

    let mut upper = Stepper::new(f, method, Bound::Upper, inner_eps)?;
    let mut lower = Stepper::new(f, method, Bound::Lower, inner_eps)?;
    let mut d_upper = f.default_set(upper.state());
    let mut d_lower = f.default_set(lower.state());
    let mut gap = d_lower.len() as i64 - d_upper.len() as i64;
    let mut gap_run = 1;
    let mut stall_run = 0;
    let mut last_tested: Option<DefaultSet> = None;
    let mut trials = 0;

    let finish = |solution: ClearingState,
                  iterations: usize,
                  trials: usize,
                  converged: bool,
                  diagnostic: Option<String>,
                  upper: &Stepper<'_>,
                  lower: &Stepper<'_>| {
        let mut counters = upper.counters();
        counters.absorb(lower.counters());
        SolverReport {
            solution,
            iterations,
            linear_solves: counters.linear_solves + trials,
            phi_applications: counters.phi_applications,
            wall_time: started.elapsed().as_secs_f64(),
            converged,
            algorithm,
            direction: Direction::Both,
            trials,
            diagnostic,
        }
    };

    for k in 1..=MAX_ITERATIONS {
        upper.step()?;
        lower.step()?;
        let next_upper = f.default_set(upper.state());
        let next_lower = f.default_set(lower.state());

        if next_upper == next_lower {
            trials += 1;
            let candidate = f.pseudo_solution(&next_upper)?;
            let ok = f.is_fixed_point(&candidate, tol);
            let diagnostic = (!ok).then(|| "pseudo solution of the agreed default set is not a fixed point".to_string());
            return Ok(finish(candidate, k, trials, ok, diagnostic, &upper, &lower));
        }

        let g = next_lower.len() as i64 - next_upper.len() as i64;
        if g == gap {
            gap_run += 1;
        } else {
            gap = g;
            gap_run = 1;
        }
        if let Some(l) = lag {
            if k >= l && gap_run >= l && last_tested.as_ref() != Some(&next_upper) {
                trials += 1;
                let candidate = f.pseudo_solution(&next_upper)?;
                if f.is_fixed_point(&candidate, tol) {
                    return Ok(finish(candidate, k, trials, true, None, &upper, &lower));
                }
                last_tested = Some(next_upper.clone());
            }
        }

        let frozen = next_upper == d_upper && next_lower == d_lower;
        if frozen && upper.state().l1_distance(lower.state()) <= collapse_tol {
            stall_run += 1;
        } else {
            stall_run = 0;
        }
        d_upper = next_upper;
        d_lower = next_lower;
        if stall_run >= stall_limit {
            let diagnostic = format!(
                "stalled: default sets {:?} (upper) and {:?} (lower) stayed apart for {stall_limit} steps after the iterates met",
                d_upper.members(),
                d_lower.members()
            );
            let solution = upper.state().clone();
            return Ok(finish(solution, k, trials, false, Some(diagnostic), &upper, &lower));
        }
    }
    let solution = upper.state().clone();
    Ok(finish(
        solution,
        MAX_ITERATIONS,
        trials,
        false,
        Some(format!("iteration limit of {MAX_ITERATIONS} reached")),
        &upper,
        &lower,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn half_ring() -> SquareMatrix {
        m(&[&[0.0, 0.5], &[0.5, 0.0]])
    }

    fn with_assets(a: [f64; 2]) -> FinancialSystem {
        FinancialSystem::new(Vector::from(a), Vector::from([1.0, 1.0]), half_ring(), SquareMatrix::zeros(2)).unwrap()
    }

    fn star() -> ClearingState {
        ClearingState::new(Vector::from([1.0, 0.5]), Vector::from([0.25, 0.0]))
    }

    #[test]
    fn trial_error_picard_system_b() {
        let f = with_assets([1.0, 0.0]);
        let rep = trial_error_decreasing(&f, MethodKind::Picard, 3).unwrap();
        assert!(rep.converged);
        assert!(rep.solution.l1_distance(&star()) < 1e-12);
        assert!(rep.trials >= 1);
    }

    #[test]
    fn trial_error_zero_assets() {
        let f = with_assets([0.0, 0.0]);
        for method in MethodKind::ALL {
            let rep = trial_error_decreasing(&f, method, 2).unwrap();
            assert!(rep.converged);
            assert_eq!(rep.iterations, 0);
            assert_eq!(rep.solution, ClearingState::zeros(2));
        }
    }

    #[test]
    fn trial_error_rich_firms_shortcut() {
        let f = with_assets([3.0, 3.0]);
        for method in [MethodKind::Elsinger, MethodKind::Hybrid] {
            let rep = trial_error_decreasing(&f, method, 2).unwrap();
            assert_eq!(rep.iterations, 0);
            assert_eq!(rep.solution.r, *f.d());
            let inflow = f.inflows(&rep.solution.r, &rep.solution.s);
            assert!(f.d().le_within(&inflow, 0.0));
        }
        let inc = trial_error_increasing(&f, MethodKind::Picard, 2).unwrap();
        assert_eq!(inc.iterations, 0);
        assert_eq!(inc.trials, 0);
        assert_eq!(inc.solution.r, *f.d());
    }

    #[test]
    fn trial_error_increasing_hybrid_system_b() {
        let f = with_assets([1.0, 0.0]);
        let rep = trial_error_increasing(&f, MethodKind::Hybrid, 2).unwrap();
        assert!(rep.converged);
        assert!(rep.solution.l1_distance(&star()) < 1e-12);
    }

    #[test]
    fn trial_error_rejects_short_lag() {
        let f = with_assets([1.0, 0.0]);
        assert!(matches!(
            trial_error_decreasing(&f, MethodKind::Picard, 1),
            Err(SolverError::InvalidArgument(_))
        ));
        assert!(matches!(
            trial_error(&f, MethodKind::Picard, Direction::Both, 2),
            Err(SolverError::InvalidArgument(_))
        ));
    }

    #[test]
    fn sandwich_system_b() {
        let f = with_assets([1.0, 0.0]);
        for method in MethodKind::ALL {
            let plain = sandwich(&f, method).unwrap();
            assert!(plain.converged);
            assert!(plain.solution.l1_distance(&star()) < 1e-12);
            assert_eq!(f.default_set(&plain.solution).members(), vec![1]);
            let modified = sandwich_modified(&f, method, 5).unwrap();
            assert_eq!(modified.solution, plain.solution);
            assert_eq!(modified.iterations, plain.iterations);
        }
    }

    #[test]
    fn sandwich_without_links() {
        let f = FinancialSystem::new(
            Vector::from([1.0, 1.0]),
            Vector::from([0.5, 2.0]),
            SquareMatrix::zeros(2),
            SquareMatrix::zeros(2),
        )
        .unwrap();
        let rep = sandwich(&f, MethodKind::Picard).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert_eq!(sandwich_modified(&f, MethodKind::Picard, 2).unwrap().solution, rep.solution);
    }

    #[test]
    fn first_candidates_match_single_runs() {
        let f = with_assets([1.0, 0.0]);
        for method in MethodKind::ALL {
            for direction in [Direction::Decreasing, Direction::Increasing] {
                let cands = first_candidate_outcomes(&f, method, direction, &[2, 3, 4], 1e-4).unwrap();
                for c in &cands {
                    assert!(c.correct);
                    let rep = trial_error_with(&f, method, direction, c.lag, 1e-4).unwrap();
                    assert_eq!(rep.trials, 1);
                    assert_eq!(Some(rep.iterations), c.iteration);
                }
            }
        }
    }
}

use std::time::Instant;

use crate::model::{ClearingState, FinancialSystem};

use super::sub::{debt_subalgorithm_en, debt_subalgorithm_picard, equity_subalgorithm};
use super::{AlgorithmId, Counters, Direction, MethodKind, SolverError, SolverReport, MAX_ITERATIONS};

/// Which end of `[R≤, R≥]` an iteration starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Lower,
    Upper,
}

impl Bound {
    pub fn direction(self) -> Direction {
        match self {
            Bound::Lower => Direction::Increasing,
            Bound::Upper => Direction::Decreasing,
        }
    }

    pub fn from_direction(direction: Direction) -> Option<Bound> {
        match direction {
            Direction::Increasing => Some(Bound::Lower),
            Direction::Decreasing => Some(Bound::Upper),
            Direction::Both | Direction::NotApplicable => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PicardStart {
    Lower,
    Upper,
    /// Any state inside `[R≤, R≥]`.
    Custom(ClearingState),
}

/// One outer iteration of Picard, Elsinger or Hybrid at a time.
///
/// Starting points: Picard uses `R≤` or `R≥`; Elsinger and Hybrid use
/// `(r≤, s(r≤))` or `(d, s(d))`.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    f: &'a FinancialSystem,
    method: MethodKind,
    bound: Bound,
    state: ClearingState,
    counters: Counters,
    inner_eps: f64,
    steps: usize,
    inner_nonmonotone: bool,
}

impl<'a> Stepper<'a> {
    pub fn new(f: &'a FinancialSystem, method: MethodKind, bound: Bound, inner_eps: f64) -> Result<Self, SolverError> {
        let mut counters = Counters::default();
        let state = match (method, bound) {
            (MethodKind::Picard, Bound::Lower) => f.bounds_lower(),
            (MethodKind::Picard, Bound::Upper) => {
                counters.linear_solves += 1;
                f.bounds()?.upper
            }
            (_, bound) => {
                let r = match bound {
                    Bound::Lower => f.d().min(f.a()),
                    Bound::Upper => f.d().clone(),
                };
                let eq = equity_subalgorithm(f, &r)?;
                counters.absorb(eq.counters);
                ClearingState::new(r, eq.value)
            }
        };
        Ok(Stepper {
            f,
            method,
            bound,
            state,
            counters,
            inner_eps,
            steps: 0,
            inner_nonmonotone: false,
        })
    }

    /// Starts from an arbitrary state; `bound` only selects the Hybrid debt step.
    pub fn from_state(
        f: &'a FinancialSystem,
        method: MethodKind,
        bound: Bound,
        state: ClearingState,
        inner_eps: f64,
    ) -> Self {
        Stepper {
            f,
            method,
            bound,
            state,
            counters: Counters::default(),
            inner_eps,
            steps: 0,
            inner_nonmonotone: false,
        }
    }

    pub fn system(&self) -> &'a FinancialSystem {
        self.f
    }

    pub fn method(&self) -> MethodKind {
        self.method
    }

    pub fn bound(&self) -> Bound {
        self.bound
    }

    pub fn state(&self) -> &ClearingState {
        &self.state
    }

    pub fn into_state(self) -> ClearingState {
        self.state
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// Completed outer iterations.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// True if any inner Picard debt loop started from an incomparable point.
    pub fn inner_nonmonotone(&self) -> bool {
        self.inner_nonmonotone
    }

    pub fn step(&mut self) -> Result<&ClearingState, SolverError> {
        let f = self.f;
        let next = match self.method {
            MethodKind::Picard => {
                self.counters.phi_applications += 1;
                f.phi(&self.state)
            }
            MethodKind::Elsinger => {
                self.counters.phi_applications += 1;
                let r = f.phi_debt(&self.state.r, &self.state.s);
                self.with_equity(r)?
            }
            MethodKind::Hybrid => {
                let r = match self.bound {
                    Bound::Upper => {
                        let out = debt_subalgorithm_en(f, &self.state.s, &self.state.r)?;
                        self.counters.absorb(out.counters);
                        out.value
                    }
                    Bound::Lower => {
                        let out = debt_subalgorithm_picard(f, &self.state.s, &self.state.r, self.inner_eps)?;
                        self.counters.phi_applications += out.steps;
                        self.inner_nonmonotone |= !out.monotone;
                        out.r
                    }
                };
                self.with_equity(r)?
            }
        };
        self.state = next;
        self.steps += 1;
        Ok(&self.state)
    }

    fn with_equity(&mut self, r: crate::linalg::Vector) -> Result<ClearingState, SolverError> {
        let eq = equity_subalgorithm(self.f, &r)?;
        self.counters.absorb(eq.counters);
        Ok(ClearingState::new(r, eq.value))
    }
}

fn check_eps(eps: f64) -> Result<(), SolverError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(SolverError::InvalidArgument(format!("eps must be positive, got {eps}")))
    }
}

/// Iterates until two consecutive states are closer than `eps` in ℓ1.
fn run_to_tolerance(
    mut stepper: Stepper<'_>,
    eps: f64,
    direction: Direction,
    started: Instant,
) -> Result<SolverReport, SolverError> {
    let mut converged = false;
    while stepper.steps() < MAX_ITERATIONS {
        let prev = stepper.state().clone();
        let delta = stepper.step()?.l1_distance(&prev);
        if delta < eps {
            converged = true;
            break;
        }
    }
    let mut diagnostic = None;
    if !converged {
        diagnostic = Some(format!("iteration limit of {MAX_ITERATIONS} reached"));
    } else if stepper.inner_nonmonotone() {
        diagnostic = Some("inner debt iteration started from an incomparable point".to_string());
    }
    let counters = stepper.counters();
    let iterations = stepper.steps();
    Ok(SolverReport {
        algorithm: AlgorithmId::Iterative(stepper.method()),
        solution: stepper.into_state(),
        iterations,
        linear_solves: counters.linear_solves,
        phi_applications: counters.phi_applications,
        wall_time: started.elapsed().as_secs_f64(),
        converged,
        direction,
        trials: 0,
        diagnostic,
    })
}

/// Iterative algorithm of the given type from the given bound.
pub fn iterate(
    f: &FinancialSystem,
    method: MethodKind,
    bound: Bound,
    eps: f64,
    inner_eps: f64,
) -> Result<SolverReport, SolverError> {
    check_eps(eps)?;
    let started = Instant::now();
    let stepper = Stepper::new(f, method, bound, inner_eps)?;
    run_to_tolerance(stepper, eps, bound.direction(), started)
}

/// Picard iteration `Rᵏ = Φ(Rᵏ⁻¹)`.
pub fn picard(f: &FinancialSystem, start: PicardStart, eps: f64) -> Result<SolverReport, SolverError> {
    check_eps(eps)?;
    let started = Instant::now();
    let (stepper, direction) = match start {
        PicardStart::Lower => (Stepper::new(f, MethodKind::Picard, Bound::Lower, eps)?, Direction::Increasing),
        PicardStart::Upper => (Stepper::new(f, MethodKind::Picard, Bound::Upper, eps)?, Direction::Decreasing),
        PicardStart::Custom(state) => {
            if state.n() != f.n() {
                return Err(SolverError::InvalidArgument(format!(
                    "start has {} firms, system has {}",
                    state.n(),
                    f.n()
                )));
            }
            (
                Stepper::from_state(f, MethodKind::Picard, Bound::Upper, state, eps),
                Direction::NotApplicable,
            )
        }
    };
    run_to_tolerance(stepper, eps, direction, started)
}

/// Elsinger iteration: `rᵏ = Φ^d(rᵏ⁻¹; s(rᵏ⁻¹))`, `sᵏ = s(rᵏ)`.
pub fn elsinger(f: &FinancialSystem, start: Bound, eps: f64) -> Result<SolverReport, SolverError> {
    iterate(f, MethodKind::Elsinger, start, eps, eps / 10.0)
}

/// Hybrid iteration: exact debt response to `s(rᵏ⁻¹)`, then `s(rᵏ)`. The
/// increasing version uses an inner Picard loop at tolerance `eps / 10`.
pub fn hybrid(f: &FinancialSystem, start: Bound, eps: f64) -> Result<SolverReport, SolverError> {
    iterate(f, MethodKind::Hybrid, start, eps, eps / 10.0)
}

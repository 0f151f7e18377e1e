//! Exact responses of one component given the other.

use crate::linalg::{solve_identity_minus_principal, Vector};
use crate::model::{DefaultSet, FinancialSystem};

use super::{Counters, SolverError, MAX_ITERATIONS};

/// A pseudo-equity vector `w` with its positive set `P(w) = {i : w_i ≥ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoEquityState {
    pub w: Vector,
    pub positives: DefaultSet,
}

impl PseudoEquityState {
    pub fn new(w: Vector) -> Self {
        let positives = DefaultSet::from_mask(w.iter().map(|&x| x >= 0.0).collect());
        PseudoEquityState { w, positives }
    }
}

/// Outcome of a set-driven sub-algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct SubResult {
    pub value: Vector,
    /// Iterations that changed the governing set.
    pub steps: usize,
    /// Size of the governing set at the start (`|P(w⁰)|` or `|D(r̄, s)|`).
    pub initial_set_size: usize,
    pub counters: Counters,
}

/// Equity values `s(r̄)` for fixed debt payments `r̄`: the unique fixed point of
/// `s ↦ (a + Md·r̄ + Ms·s − d)⁺`.
///
/// Starts from `w⁰ = a + Md·r̄ − d` and repeatedly solves
/// `(I − Ms·G(wᵏ))·w = w⁰` until the positive set stops changing.
pub fn equity_subalgorithm(f: &FinancialSystem, r_bar: &Vector) -> Result<SubResult, SolverError> {
    let n = f.n();
    let zeros = Vector::zeros(n);
    let w0 = &f.inflows(r_bar, &zeros) - f.d();
    let mut current = PseudoEquityState::new(w0.clone());
    let initial_set_size = current.positives.len();
    let mut counters = Counters::default();
    let mut steps = 0;
    loop {
        let next = PseudoEquityState::new(solve_equity_step(f, &w0, &current.positives)?);
        counters.linear_solves += 1;
        let stable = next.positives == current.positives;
        current = next;
        if stable || steps > n {
            break;
        }
        steps += 1;
    }
    Ok(SubResult {
        value: current.w.positive_part(),
        steps,
        initial_set_size,
        counters,
    })
}

/// Solves `w = w⁰ + Ms·G·w` where `G` selects `positives`: the positive block
/// is a principal solve, the rest follows by substitution.
fn solve_equity_step(f: &FinancialSystem, w0: &Vector, positives: &DefaultSet) -> Result<Vector, SolverError> {
    let ms = f.ms();
    let members = positives.members();
    let rhs: Vec<f64> = members.iter().map(|&i| w0[i]).collect();
    let w_p = solve_identity_minus_principal(ms, &members, &rhs)?;
    let mut w = w0.clone();
    for (&j, &x) in members.iter().zip(&w_p) {
        w[j] = x;
    }
    for i in (0..f.n()).filter(|&i| !positives.contains(i)) {
        w[i] = w0[i] + members.iter().zip(&w_p).map(|(&j, &x)| ms[(i, j)] * x).sum::<f64>();
    }
    Ok(w)
}

/// Supersolution tolerance: `Φ^d(r̄; s) ≤ r̄ + tol`.
fn precondition_tol(f: &FinancialSystem) -> f64 {
    f.fixed_point_tol()
}

/// Debt payments for fixed equity by default-set iteration (Eisenberg–Noe with
/// equity inflows): the unique fixed point of `r ↦ min{d, a + Md·r + Ms·s}`.
///
/// Requires the supersolution condition `Φ^d(r_start; s) ≤ r_start`, under
/// which the iterates decrease and the default set only grows.
pub fn debt_subalgorithm_en(
    f: &FinancialSystem,
    s_fixed: &Vector,
    r_start: &Vector,
) -> Result<SubResult, SolverError> {
    let n = f.n();
    let d = f.d();
    let tol = precondition_tol(f);
    let image = f.phi_debt(r_start, s_fixed);
    let mut counters = Counters {
        linear_solves: 0,
        phi_applications: 1,
    };
    for i in 0..n {
        let excess = (image[i] - r_start[i]).max(r_start[i] - d[i]);
        if excess > tol {
            return Err(SolverError::PreconditionViolated { firm: i, excess });
        }
    }
    let equity_in = f.ms().mul_vec(s_fixed);
    let mut defaults = f.default_set_of(r_start, s_fixed);
    let initial_set_size = defaults.len();
    let mut steps = 0;
    let mut r;
    loop {
        r = solve_debt_step(f, &equity_in, &defaults)?;
        counters.linear_solves += 1;
        let next = f.default_set_of(&r, s_fixed);
        if next == defaults || steps > n {
            break;
        }
        defaults = next;
        steps += 1;
    }
    Ok(SubResult {
        value: r,
        steps,
        initial_set_size,
        counters,
    })
}

/// Fixed point of `Θ`: solvent firms pay `d`, defaulting firms pay their inflows.
fn solve_debt_step(f: &FinancialSystem, equity_in: &Vector, defaults: &DefaultSet) -> Result<Vector, SolverError> {
    let md = f.md();
    let d = f.d();
    let members = defaults.members();
    let rhs: Vec<f64> = members
        .iter()
        .map(|&i| {
            let from_solvent: f64 = (0..f.n())
                .filter(|&j| !defaults.contains(j))
                .map(|j| md[(i, j)] * d[j])
                .sum();
            f.a()[i] + equity_in[i] + from_solvent
        })
        .collect();
    let x = solve_identity_minus_principal(md, &members, &rhs)?;
    let mut r = d.clone();
    for (&i, &v) in members.iter().zip(&x) {
        r[i] = v;
    }
    Ok(r)
}

/// Outcome of the Picard debt iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DebtPicardOutcome {
    pub r: Vector,
    /// Applications of `Φ^d`.
    pub steps: usize,
    pub converged: bool,
    /// Whether `Φ^d(r_start; s)` was comparable with `r_start`, the case in
    /// which the iterates are monotone.
    pub monotone: bool,
}

/// Debt payments for fixed equity by iterating `r ↦ Φ^d(r; s)` until the ℓ1
/// step falls below `eps`.
pub fn debt_subalgorithm_picard(
    f: &FinancialSystem,
    s_fixed: &Vector,
    r_start: &Vector,
    eps: f64,
) -> Result<DebtPicardOutcome, SolverError> {
    if !(eps > 0.0) {
        return Err(SolverError::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let mut r = r_start.clone();
    let mut monotone = true;
    for k in 1..=MAX_ITERATIONS {
        let next = f.phi_debt(&r, s_fixed);
        if k == 1 {
            monotone = next.le_within(&r, 0.0) || r.le_within(&next, 0.0);
        }
        let delta = next.l1_distance(&r);
        r = next;
        if delta < eps {
            return Ok(DebtPicardOutcome {
                r,
                steps: k,
                converged: true,
                monotone,
            });
        }
    }
    Ok(DebtPicardOutcome {
        r,
        steps: MAX_ITERATIONS,
        converged: false,
        monotone,
    })
}

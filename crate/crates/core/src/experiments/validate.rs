use std::fmt;

use thiserror::Error;

use crate::generators::{simulate_system, SimRng, SystemParams};
use crate::model::FinancialSystem;
use crate::solvers::{oracle_enumerate, AlgorithmId, SolveOptions, SolverError, SolverReport, Variant, ORACLE_MAX_FIRMS};

use super::{Execution, StudyError};

type Runner = dyn Fn(&FinancialSystem) -> Result<SolverReport, SolverError> + Send + Sync;

/// A solver under validation.
pub struct ValidationVariant {
    pub name: String,
    /// Skip systems where the oracle finds a borderline firm (plain Sandwich
    /// need not terminate there).
    pub exempt_on_borderline: bool,
    /// Require an exact fixed point rather than closeness alone.
    pub finite: bool,
    run: Box<Runner>,
}

impl ValidationVariant {
    pub fn new(
        name: impl Into<String>,
        finite: bool,
        exempt_on_borderline: bool,
        run: impl Fn(&FinancialSystem) -> Result<SolverReport, SolverError> + Send + Sync + 'static,
    ) -> Self {
        ValidationVariant {
            name: name.into(),
            exempt_on_borderline,
            finite,
            run: Box::new(run),
        }
    }

    pub fn from_variant(v: Variant, opts: SolveOptions) -> Self {
        let exempt = matches!(v.algorithm, AlgorithmId::Sandwich(_));
        ValidationVariant::new(v.label(), v.algorithm.is_finite(), exempt, move |f| v.run(f, &opts))
    }
}

impl fmt::Debug for ValidationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValidationVariant")
            .field("name", &self.name)
            .field("exempt_on_borderline", &self.exempt_on_borderline)
            .field("finite", &self.finite)
            .finish_non_exhaustive()
    }
}

/// The eighteen variants, iterative ones at `eps = 1e-9`.
pub fn default_validation_variants() -> Vec<ValidationVariant> {
    Variant::all()
        .into_iter()
        .map(|v| ValidationVariant::from_variant(v, SolveOptions::with_eps(1e-9)))
        .collect()
}

/// Random systems for cross-validation: generator parameters are drawn
/// per system from small discrete sets.
pub fn validation_systems(n: usize, count: usize, seed: u64) -> Vec<(u64, SystemParams, Result<FinancialSystem, String>)> {
    const D_BASE: [f64; 3] = [1.0, 2.0, 3.0];
    const NU_D: [f64; 3] = [0.1, 0.5, 0.9];
    const NU_S: [f64; 3] = [0.05, 0.25, 0.45];
    const LAMBDA: [f64; 3] = [0.0, 0.5, 1.0];
    (0..count)
        .map(|i| {
            let task = ((n as u64) << 32) | i as u64;
            let mut rng = SimRng::for_task(seed, task);
            let mut pick = |xs: &[f64; 3]| xs[(rng.next_u64() % 3) as usize];
            let params = SystemParams {
                n,
                d_base: pick(&D_BASE),
                nu_d: pick(&NU_D),
                nu_s: pick(&NU_S),
                lambda: pick(&LAMBDA),
                seed,
            };
            let f = simulate_system(&params, &mut rng).map_err(|e| e.to_string());
            (task, params, f)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub name: String,
    pub runs: usize,
    /// Borderline systems skipped for this variant.
    pub exempted: usize,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub systems: usize,
    pub borderline_systems: usize,
    pub variants: Vec<VariantSummary>,
}

impl ValidationReport {
    pub fn max_deviation(&self) -> f64 {
        self.variants.iter().map(|v| v.max_deviation).fold(0.0, f64::max)
    }
}

/// One disagreement with the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureCase {
    pub variant: String,
    pub task: u64,
    pub params: SystemParams,
    pub message: String,
}

impl fmt::Display for FailureCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        write!(
            f,
            "{} on system {} (seed {}, n={}, d={}, nu_d={}, nu_s={}, lambda={}): {}",
            self.variant, self.task, p.seed, p.n, p.d_base, p.nu_d, p.nu_s, p.lambda, self.message
        )
    }
}

#[derive(Debug, Error)]
pub enum ValidationFailure {
    #[error("{} disagreement(s) with the oracle; first: {}", .cases.len(), .cases[0])]
    Disagreement {
        cases: Vec<FailureCase>,
        report: ValidationReport,
    },
    #[error(transparent)]
    Study(#[from] StudyError),
}

struct SystemOutcome {
    borderline: bool,
    /// Per variant: deviation, or `None` when exempted.
    deviations: Vec<Option<f64>>,
    failures: Vec<FailureCase>,
}

/// Checks every variant against the exhaustive oracle on `count` random
/// systems per size, within `1e-6·(1 + ‖d‖₁)`.
pub fn cross_validate(
    n_list: &[usize],
    count: usize,
    seed: u64,
    variants: &[ValidationVariant],
    exec: Execution,
) -> Result<ValidationReport, ValidationFailure> {
    if let Some(&n) = n_list.iter().find(|&&n| n > ORACLE_MAX_FIRMS) {
        return Err(StudyError::InvalidConfig(format!("oracle supports n ≤ {ORACLE_MAX_FIRMS}, got {n}")).into());
    }
    let systems: Vec<_> = n_list.iter().flat_map(|&n| validation_systems(n, count, seed)).collect();
    let outcomes = exec.map(systems.len(), |i| {
        let (task, params, f) = &systems[i];
        check_system(*task, params, f, variants)
    })?;

    let mut summaries: Vec<VariantSummary> = variants
        .iter()
        .map(|v| VariantSummary {
            name: v.name.clone(),
            runs: 0,
            exempted: 0,
            max_deviation: 0.0,
        })
        .collect();
    let mut failures = Vec::new();
    let mut borderline_systems = 0;
    for o in outcomes {
        borderline_systems += usize::from(o.borderline);
        for (s, dev) in summaries.iter_mut().zip(&o.deviations) {
            match dev {
                Some(d) => {
                    s.runs += 1;
                    s.max_deviation = s.max_deviation.max(*d);
                }
                None => s.exempted += 1,
            }
        }
        failures.extend(o.failures);
    }
    let report = ValidationReport {
        systems: systems.len(),
        borderline_systems,
        variants: summaries,
    };
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(ValidationFailure::Disagreement {
            cases: failures,
            report,
        })
    }
}

fn check_system(
    task: u64,
    params: &SystemParams,
    f: &Result<FinancialSystem, String>,
    variants: &[ValidationVariant],
) -> SystemOutcome {
    let fail = |name: &str, message: String| FailureCase {
        variant: name.to_string(),
        task,
        params: *params,
        message,
    };
    let f = match f {
        Ok(f) => f,
        Err(e) => {
            return SystemOutcome {
                borderline: false,
                deviations: vec![Some(0.0); variants.len()],
                failures: vec![fail("generator", e.clone())],
            }
        }
    };
    let oracle = match oracle_enumerate(f) {
        Ok(o) => o,
        Err(e) => {
            return SystemOutcome {
                borderline: false,
                deviations: vec![Some(0.0); variants.len()],
                failures: vec![fail("oracle", e.to_string())],
            }
        }
    };
    let tol = 1e-6 * (1.0 + f.d().l1_norm());
    let exact_tol = f.report_tol();
    let borderline = oracle.has_borderline();
    let mut deviations = Vec::with_capacity(variants.len());
    let mut failures = Vec::new();
    for v in variants {
        if borderline && v.exempt_on_borderline {
            deviations.push(None);
            continue;
        }
        match (v.run)(f) {
            Ok(report) => {
                let dev = report.solution.l1_distance(&oracle.solution);
                deviations.push(Some(dev));
                if !report.converged {
                    failures.push(fail(
                        &v.name,
                        report.diagnostic.unwrap_or_else(|| "did not converge".to_string()),
                    ));
                } else if !(dev <= tol) {
                    failures.push(fail(&v.name, format!("deviation {dev:e} exceeds {tol:e}")));
                } else if v.finite && !f.is_fixed_point(&report.solution, exact_tol) {
                    failures.push(fail(&v.name, "result is not an exact fixed point".to_string()));
                }
            }
            Err(e) => {
                deviations.push(Some(0.0));
                failures.push(fail(&v.name, e.to_string()));
            }
        }
    }
    SystemOutcome {
        borderline,
        deviations,
        failures,
    }
}

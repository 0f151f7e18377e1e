use crate::generators::{simulate_system, SimRng};
use crate::solvers::{first_candidate_outcomes, AlgorithmId, MethodKind};

use super::table::{group_in_order, mean, Axis, GroupKey, StudyRow, StudyTable};
use super::{quarantine_generator, quarantine_solver, ErrorRateConfig, Execution, QuarantineEntry, Setting, StudyError};

/// Outcome of one Trial-and-Error first candidate on one system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorRecord {
    pub task: u64,
    pub setting: usize,
    pub method: MethodKind,
    pub lag: usize,
    /// True when the first candidate was not the true default set.
    pub error: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRateOutcome {
    pub config: ErrorRateConfig,
    pub settings: Vec<Setting>,
    pub records: Vec<ErrorRecord>,
    pub quarantine: Vec<QuarantineEntry>,
}

/// First-candidate error rates of Trial-and-Error over the configured grid.
pub fn error_rate_study(cfg: &ErrorRateConfig, exec: Execution) -> Result<ErrorRateOutcome, StudyError> {
    cfg.validate()?;
    let settings = cfg.grid.settings();
    let reps = cfg.repetitions;
    let tasks = exec.map(settings.len() * reps, |t| {
        let (si, rep) = (t / reps, t % reps);
        run_task(cfg, &settings[si], si, rep, t as u64)
    })?;
    let mut records = Vec::new();
    let mut quarantine = Vec::new();
    for (recs, q) in tasks {
        records.extend(recs);
        quarantine.extend(q);
    }
    Ok(ErrorRateOutcome {
        config: cfg.clone(),
        settings,
        records,
        quarantine,
    })
}

fn run_task(
    cfg: &ErrorRateConfig,
    setting: &Setting,
    si: usize,
    rep: usize,
    task: u64,
) -> (Vec<ErrorRecord>, Vec<QuarantineEntry>) {
    let mut rng = SimRng::for_task(cfg.seed, task);
    let f = match simulate_system(&setting.params(cfg.seed), &mut rng) {
        Ok(f) => f,
        Err(e) => return (Vec::new(), vec![quarantine_generator(setting, rep, task, e)]),
    };
    let mut records = Vec::new();
    let mut quarantine = Vec::new();
    for &method in &cfg.methods {
        match first_candidate_outcomes(&f, method, cfg.direction, &cfg.lag_list, cfg.inner_eps) {
            Ok(outcomes) => records.extend(outcomes.into_iter().map(|c| ErrorRecord {
                task,
                setting: si,
                method,
                lag: c.lag,
                error: !c.correct,
            })),
            Err(e) => quarantine.push(quarantine_solver(
                setting,
                rep,
                task,
                AlgorithmId::TrialError(method).family_label(),
                &e,
            )),
        }
    }
    (records, quarantine)
}

/// Error rate and number of systems behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub value: f64,
    pub count: usize,
}

impl Rate {
    /// Binomial standard error of the rate.
    pub fn std_error(&self) -> f64 {
        (self.value * (1.0 - self.value) / self.count as f64).sqrt()
    }
}

impl ErrorRateOutcome {
    /// Rate over all systems whose setting projects onto `key` under `keep`.
    pub fn rate(&self, keep: &[Axis], key: &GroupKey, method: MethodKind, lag: usize) -> Option<Rate> {
        let errors: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.method == method && r.lag == lag)
            .filter(|r| GroupKey::project(&self.settings[r.setting], keep) == *key)
            .map(|r| if r.error { 1.0 } else { 0.0 })
            .collect();
        (!errors.is_empty()).then(|| Rate {
            value: mean(&errors),
            count: errors.len(),
        })
    }

    /// One `error_rate` row per group, method and lag.
    pub fn grouped_table(&self, keep: &[Axis]) -> StudyTable {
        let keyed = self.records.iter().map(|r| {
            (
                (GroupKey::project(&self.settings[r.setting], keep), r.method, r.lag),
                if r.error { 1.0 } else { 0.0 },
            )
        });
        let mut groups = group_in_order(keyed);
        // group order: parameters as generated, then method, then lag
        let method_rank = |m: MethodKind| self.config.methods.iter().position(|&x| x == m);
        let mut key_rank = std::collections::HashMap::new();
        for s in &self.settings {
            let k = GroupKey::project(s, keep);
            let next = key_rank.len();
            key_rank.entry(k).or_insert(next);
        }
        groups.sort_by_key(|((k, m, l), _)| (key_rank.get(k).copied(), method_rank(*m), *l));
        StudyTable {
            rows: groups
                .into_iter()
                .map(|((key, method, lag), errs)| StudyRow {
                    key,
                    lag: Some(lag),
                    algorithm: AlgorithmId::TrialError(method).family_label(),
                    direction: self.config.direction,
                    metric: "error_rate".to_string(),
                    value: mean(&errs),
                    count: errs.len(),
                    seed: self.config.seed,
                })
                .collect(),
        }
    }

    /// Per-setting rows, then rows grouped by system size, then the overall rows.
    pub fn table(&self) -> StudyTable {
        let mut t = self.grouped_table(&Axis::ALL);
        t.extend(self.grouped_table(&[Axis::N]));
        t.extend(self.grouped_table(&[]));
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Grid;
    use crate::solvers::Direction;

    fn small(reps: usize) -> ErrorRateConfig {
        ErrorRateConfig {
            grid: Grid {
                n_list: vec![4],
                d_base_list: vec![1.5],
                nu_d_list: vec![0.5],
                nu_s_list: vec![0.25],
                lambda_list: vec![0.0, 1.0],
            },
            lag_list: vec![2, 3],
            repetitions: reps,
            seed: 3,
            methods: MethodKind::ALL.to_vec(),
            direction: Direction::Decreasing,
            inner_eps: 1e-4,
        }
    }

    #[test]
    fn record_count_and_rates_in_range() {
        let out = error_rate_study(&small(5), Execution::Sequential).unwrap();
        assert!(out.quarantine.is_empty());
        assert_eq!(out.records.len(), 2 * 5 * 3 * 2);
        let t = out.table();
        assert_eq!(t.rows.len(), 2 * 3 * 2 + 3 * 2 + 3 * 2);
        assert!(t.rows.iter().all(|r| (0.0..=1.0).contains(&r.value)));
        let all = t.find(&GroupKey::default(), "TE", Some(2), "error_rate").unwrap();
        assert_eq!(all.count, 10);
    }

    #[test]
    fn schedule_independent() {
        let cfg = small(4);
        let a = error_rate_study(&cfg, Execution::Sequential).unwrap();
        let b = error_rate_study(&cfg, Execution::ParallelWith { threads: 3 }).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn no_links_means_no_errors() {
        let mut cfg = small(1);
        cfg.grid.nu_d_list = vec![0.0];
        cfg.grid.nu_s_list = vec![0.0];
        let out = error_rate_study(&cfg, Execution::Sequential).unwrap();
        assert!(out.records.iter().all(|r| !r.error));
    }
}

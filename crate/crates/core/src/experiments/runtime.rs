use crate::generators::{simulate_system, SimRng};
use crate::solvers::{AlgorithmId, Direction, SolveOptions, Variant};

use super::table::{group_in_order, mean, median, Axis, GroupKey, StudyRow, StudyTable};
use super::{quarantine_generator, quarantine_solver, Execution, QuarantineEntry, RuntimeConfig, Setting, StudyError};

/// Timing and work counts of one variant on one system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub task: u64,
    pub setting: usize,
    pub variant: Variant,
    pub wall_time: f64,
    pub iterations: usize,
    pub linear_solves: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeOutcome {
    pub config: RuntimeConfig,
    pub settings: Vec<Setting>,
    pub variants: Vec<Variant>,
    pub records: Vec<RunRecord>,
    pub quarantine: Vec<QuarantineEntry>,
}

/// Runs every configured variant on every simulated system. Only the solver
/// call is timed.
pub fn runtime_study(cfg: &RuntimeConfig, exec: Execution) -> Result<RuntimeOutcome, StudyError> {
    cfg.validate()?;
    let variants = cfg.parsed_variants()?;
    let settings = cfg.grid.settings();
    let opts = SolveOptions {
        eps: cfg.eps,
        lag: cfg.lag,
        ..SolveOptions::default()
    };
    let reps = cfg.repetitions;
    let tasks = exec.map(settings.len() * reps, |t| {
        let (si, rep) = (t / reps, t % reps);
        run_task(cfg, &opts, &variants, &settings[si], si, rep, t as u64)
    })?;
    let mut records = Vec::new();
    let mut quarantine = Vec::new();
    for (recs, q) in tasks {
        records.extend(recs);
        quarantine.extend(q);
    }
    Ok(RuntimeOutcome {
        config: cfg.clone(),
        settings,
        variants,
        records,
        quarantine,
    })
}

fn run_task(
    cfg: &RuntimeConfig,
    opts: &SolveOptions,
    variants: &[Variant],
    setting: &Setting,
    si: usize,
    rep: usize,
    task: u64,
) -> (Vec<RunRecord>, Vec<QuarantineEntry>) {
    let mut rng = SimRng::for_task(cfg.seed, task);
    let f = match simulate_system(&setting.params(cfg.seed), &mut rng) {
        Ok(f) => f,
        Err(e) => return (Vec::new(), vec![quarantine_generator(setting, rep, task, e)]),
    };
    let mut records = Vec::with_capacity(variants.len());
    let mut quarantine = Vec::new();
    for &variant in variants {
        match variant.run(&f, opts) {
            Ok(report) => {
                if !report.converged {
                    quarantine.push(QuarantineEntry {
                        setting: *setting,
                        repetition: rep,
                        task,
                        algorithm: variant.label(),
                        message: report
                            .diagnostic
                            .clone()
                            .unwrap_or_else(|| "did not converge".to_string()),
                    });
                }
                records.push(RunRecord {
                    task,
                    setting: si,
                    variant,
                    wall_time: report.wall_time,
                    iterations: report.iterations,
                    linear_solves: report.linear_solves,
                    converged: report.converged,
                });
            }
            Err(e) => quarantine.push(quarantine_solver(setting, rep, task, variant.label(), &e)),
        }
    }
    (records, quarantine)
}

type Metric = (&'static str, fn(&[&RunRecord]) -> f64);

const METRICS: [Metric; 3] = [
    ("mean_runtime", |rs| mean(&rs.iter().map(|r| r.wall_time).collect::<Vec<_>>())),
    ("median_iterations", |rs| {
        median(&rs.iter().map(|r| r.iterations as f64).collect::<Vec<_>>())
    }),
    ("median_linear_solves", |rs| {
        median(&rs.iter().map(|r| r.linear_solves as f64).collect::<Vec<_>>())
    }),
];

impl RuntimeOutcome {
    fn key_order(&self, keep: &[Axis]) -> std::collections::HashMap<GroupKey, usize> {
        let mut rank = std::collections::HashMap::new();
        for s in &self.settings {
            let next = rank.len();
            rank.entry(GroupKey::project(s, keep)).or_insert(next);
        }
        rank
    }

    fn groups(&self, keep: &[Axis]) -> Vec<((GroupKey, Variant), Vec<&RunRecord>)> {
        let mut groups = group_in_order(
            self.records
                .iter()
                .map(|r| ((GroupKey::project(&self.settings[r.setting], keep), r.variant), r)),
        );
        let rank = self.key_order(keep);
        let vrank = |v: &Variant| self.variants.iter().position(|x| x == v);
        groups.sort_by_key(|((k, v), _)| (rank.get(k).copied(), vrank(v)));
        groups
    }

    /// Value of `metric` for one variant over the systems projecting onto `key`.
    pub fn metric(&self, keep: &[Axis], key: &GroupKey, variant: Variant, metric: &str) -> Option<f64> {
        let (_, compute) = METRICS.iter().find(|(name, _)| *name == metric)?;
        let rs: Vec<&RunRecord> = self
            .records
            .iter()
            .filter(|r| r.variant == variant && GroupKey::project(&self.settings[r.setting], keep) == *key)
            .collect();
        (!rs.is_empty()).then(|| compute(&rs))
    }

    /// Mean runtime of a family averaged over its increasing and decreasing
    /// versions; plain Sandwich is already two-sided.
    pub fn pair_mean_runtime(&self, keep: &[Axis], key: &GroupKey, algorithm: AlgorithmId) -> Option<f64> {
        let pair = [Direction::Decreasing, Direction::Increasing]
            .map(|d| self.metric(keep, key, Variant::new(algorithm, d), "mean_runtime"));
        match pair {
            [Some(a), Some(b)] => Some((a + b) / 2.0),
            _ => self.metric(keep, key, Variant::new(algorithm, Direction::Both), "mean_runtime"),
        }
    }

    /// Metric rows per group and variant, followed by the two-sided
    /// `mean_runtime` averages of the directional families.
    pub fn grouped_table(&self, keep: &[Axis]) -> StudyTable {
        let seed = self.config.seed;
        let mut rows = Vec::new();
        let groups = self.groups(keep);
        for ((key, variant), rs) in &groups {
            for (metric, compute) in METRICS {
                rows.push(StudyRow {
                    key: *key,
                    lag: variant_lag(*variant, self.config.lag),
                    algorithm: variant.algorithm.family_label(),
                    direction: variant.direction,
                    metric: metric.to_string(),
                    value: compute(rs),
                    count: rs.len(),
                    seed,
                });
            }
        }
        let means: std::collections::HashMap<(GroupKey, Variant), f64> = groups
            .iter()
            .map(|(kv, rs)| (*kv, mean(&rs.iter().map(|r| r.wall_time).collect::<Vec<_>>())))
            .collect();
        let keys = group_in_order(groups.iter().map(|((k, _), rs)| (*k, rs.len())));
        for (key, counts) in keys {
            let count = counts.iter().copied().max().unwrap_or(0);
            let mut seen = Vec::new();
            for v in &self.variants {
                if !matches!(v.algorithm, AlgorithmId::Iterative(_) | AlgorithmId::TrialError(_))
                    || seen.contains(&v.algorithm)
                {
                    continue;
                }
                seen.push(v.algorithm);
                let both: Vec<f64> = [Direction::Decreasing, Direction::Increasing]
                    .iter()
                    .filter_map(|&d| means.get(&(key, Variant::new(v.algorithm, d))).copied())
                    .collect();
                if both.len() == 2 {
                    rows.push(StudyRow {
                        key,
                        lag: variant_lag(*v, self.config.lag),
                        algorithm: v.algorithm.family_label(),
                        direction: Direction::Both,
                        metric: "mean_runtime".to_string(),
                        value: mean(&both),
                        count,
                        seed,
                    });
                }
            }
        }
        StudyTable { rows }
    }

    /// Per-setting rows, then rows grouped by system size, then the overall rows.
    pub fn table(&self) -> StudyTable {
        let mut t = self.grouped_table(&Axis::ALL);
        t.extend(self.grouped_table(&[Axis::N]));
        t.extend(self.grouped_table(&[]));
        t
    }
}

fn variant_lag(v: Variant, lag: Option<usize>) -> Option<usize> {
    match v.algorithm {
        AlgorithmId::TrialError(m) => Some(lag.unwrap_or_else(|| m.default_lag())),
        AlgorithmId::ModifiedSandwich(_) => Some(crate::solvers::DEFAULT_SANDWICH_LAG),
        _ => None,
    }
}

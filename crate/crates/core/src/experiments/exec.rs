use super::StudyError;

/// How study tasks are scheduled. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Data-parallel over tasks; `threads: None` uses the global pool.
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
    ParallelWith { threads: usize },
}

impl Execution {
    /// `threads = 1` means sequential; `None` means the default pool.
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            Some(0) | None => Execution::Parallel,
            Some(1) => Execution::Sequential,
            Some(t) => Execution::ParallelWith { threads: t },
        }
    }

    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// `f(0), …, f(count − 1)` in index order.
    pub fn map<T, F>(&self, count: usize, f: F) -> Result<Vec<T>, StudyError>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => Ok((0..count).map(f).collect()),
            Execution::Parallel => Ok(par_map(count, &f)),
            Execution::ParallelWith { threads } => par_map_in_pool(*threads, count, &f),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T: Send, F: Fn(usize) -> T + Sync>(count: usize, f: &F) -> Vec<T> {
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
fn par_map_in_pool<T: Send, F: Fn(usize) -> T + Sync + Send>(
    threads: usize,
    count: usize,
    f: &F,
) -> Result<Vec<T>, StudyError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| StudyError::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(|| par_map(count, f)))
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Send, F: Fn(usize) -> T + Sync>(count: usize, f: &F) -> Vec<T> {
    (0..count).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map_in_pool<T: Send, F: Fn(usize) -> T + Sync + Send>(
    _threads: usize,
    count: usize,
    f: &F,
) -> Result<Vec<T>, StudyError> {
    Ok(par_map(count, f))
}

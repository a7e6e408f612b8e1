//! Sequential or rayon-backed evaluation of independent trials.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// `workers == 0` lets rayon pick the thread count.
    Parallel {
        workers: usize,
    },
    #[default]
    Auto,
}

impl Execution {
    pub fn with_workers(workers: usize) -> Self {
        match workers {
            1 => Execution::Sequential,
            n => Execution::Parallel { workers: n },
        }
    }
}

/// `f(0), …, f(n−1)` in index order, stopping at the first error (by index).
pub fn try_map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        Execution::Parallel { workers } => parallel(n, workers, f),
        Execution::Auto => parallel(n, 0, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;

    let run = || {
        let results: Vec<Result<T>> = (0..n).into_par_iter().map(&f).collect();
        results.into_iter().collect()
    };
    if workers == 0 {
        return run();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::Error::ConfigInvalid(format!("thread pool: {e}")))?
        .install(run)
}

#[cfg(not(feature = "parallel"))]
fn parallel<T, F>(n: usize, _workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn order_is_preserved() {
        for exec in [
            Execution::Sequential,
            Execution::Parallel { workers: 4 },
            Execution::Auto,
        ] {
            let out = try_map_indexed(100, exec, |i| Ok(i * i)).unwrap();
            assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn first_error_by_index_wins() {
        for exec in [Execution::Sequential, Execution::Parallel { workers: 4 }] {
            let err = try_map_indexed(50, exec, |i| {
                if i % 7 == 3 {
                    Err(Error::DegenerateInput(format!("{i}")))
                } else {
                    Ok(i)
                }
            })
            .unwrap_err();
            assert_eq!(err.to_string(), "degenerate input: 3");
        }
    }
}

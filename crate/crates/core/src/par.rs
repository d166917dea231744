//! Data-parallel fan-out for independent jobs (oracle restarts, batch bracket
//! sweeps). Results always come back in job order, so the outcome does not
//! depend on the execution mode. Without the `parallel` feature both modes run
//! sequentially.

/// How independent jobs are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Evaluates `job(0), ..., job(n - 1)` and returns the results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(job).collect()
        }
        _ => (0..n).map(job).collect(),
    }
}

//! Parallel executor for the quadrature in `planch_core::spectral_limit`.

use planch_core::spectral_limit::{Executor, Integral};
use rayon::prelude::*;

/// Runs jobs on a dedicated rayon pool; results keep their index order, so the
/// reduction is identical for every thread count.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    pub fn new(threads: Option<usize>) -> Self {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n.max(1));
        }
        RayonExecutor { pool: b.build().expect("thread pool") }
    }

    /// Thread count from `PLANCH_THREADS`, or rayon's default when unset or invalid.
    pub fn from_env() -> Self {
        let n = std::env::var("PLANCH_THREADS").ok().and_then(|v| v.trim().parse().ok());
        Self::new(n)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn run(&self, n: usize, job: &(dyn Fn(usize) -> Integral + Sync)) -> Vec<Integral> {
        self.pool.install(|| (0..n).into_par_iter().map(job).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use planch_core::spectral_limit::{pairwise_sum, Sequential};

    #[test]
    fn ordered_and_thread_independent() {
        let job = |i: usize| Integral { value: Complex64::new(1.0 / (i as f64 + 1.0), i as f64), error: 0.0, nodes: 1 };
        let seq = pairwise_sum(&Sequential.run(1000, &job));
        for t in [1, 2, 7] {
            let par = pairwise_sum(&RayonExecutor::new(Some(t)).run(1000, &job));
            assert_eq!(par.value.re.to_bits(), seq.value.re.to_bits());
            assert_eq!(par.nodes, 1000);
        }
    }
}

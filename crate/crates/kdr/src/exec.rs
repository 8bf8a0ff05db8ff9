use kdr_core::pipeline::{Executor, Sequential};
use rayon::prelude::*;

use crate::Error;

/// Runs work items on a dedicated rayon pool. Output order follows input
/// order, so results do not depend on the number of threads.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn new(threads: usize) -> Result<Self, Error> {
        let pool =
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::Pool(e.to_string()))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, T) -> R + Sync + Send,
    {
        self.pool.install(|| items.into_par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
    }
}

/// `--workers 1` runs on the calling thread; anything larger uses a pool.
pub enum Workers {
    Inline,
    Pool(Pool),
}

impl Workers {
    pub fn new(n: usize) -> Result<Self, Error> {
        match n {
            0 => Err(Error::Usage("--workers must be at least 1".into())),
            1 => Ok(Self::Inline),
            n => Pool::new(n).map(Self::Pool),
        }
    }

    pub fn count(&self) -> usize {
        match self {
            Self::Inline => 1,
            Self::Pool(p) => p.threads(),
        }
    }
}

impl Executor for Workers {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, T) -> R + Sync + Send,
    {
        match self {
            Self::Inline => Sequential.map(items, f),
            Self::Pool(p) => p.map(items, f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let pool = Workers::new(4).unwrap();
        let out = pool.map((0..100u64).collect(), |i, v| (i as u64) * 1000 + v);
        assert_eq!(out, (0..100u64).map(|v| v * 1001).collect::<Vec<_>>());
        assert_eq!(pool.count(), 4);
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(matches!(Workers::new(0), Err(Error::Usage(_))));
    }
}

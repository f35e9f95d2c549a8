//! Scoped-thread executor for the snapshot and indicator phases.

use std::num::NonZeroUsize;
use std::thread;

use rbhmr_core::rb::Executor;

/// Splits jobs into contiguous chunks, one per worker thread. Results come
/// back in job order, so runs are independent of the thread count.
#[derive(Debug, Clone, Copy)]
pub struct Threads {
    workers: usize,
}

impl Threads {
    pub fn new(workers: usize) -> Self {
        Self {
            workers: workers.max(1),
        }
    }

    /// One worker per available core.
    pub fn available() -> Self {
        Self::new(thread::available_parallelism().map_or(1, NonZeroUsize::get))
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl Executor for Threads {
    fn map<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync,
    {
        if self.workers == 1 || n < 2 {
            return (0..n).map(f).collect();
        }
        let chunk = n.div_ceil(self.workers);
        let f = &f;
        thread::scope(|s| {
            let handles: Vec<_> = (0..n)
                .step_by(chunk)
                .map(|start| s.spawn(move || (start..(start + chunk).min(n)).map(f).collect::<Vec<R>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        for w in [1, 2, 3, 8] {
            let v = Threads::new(w).map(17, |i| i * i);
            assert_eq!(v, (0..17).map(|i| i * i).collect::<Vec<_>>());
        }
        assert!(Threads::new(4).map(0, |i| i).is_empty());
    }
}

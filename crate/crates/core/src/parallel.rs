//! Order-preserving maps over independent work items.
//!
//! With the `parallel` feature (on by default) items are spread over a rayon
//! pool; without it, or with [`Execution::Sequential`], they run in order on
//! the calling thread. Output order always matches input order.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Use the ambient rayon pool.
    #[default]
    Parallel,
    /// Use a dedicated pool of this many threads.
    Threads(usize),
}

impl Execution {
    /// `Threads(n)` for `n > 1`, `Sequential` for 1, `Parallel` for 0.
    pub fn from_jobs(jobs: usize) -> Execution {
        match jobs {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            n => Execution::Threads(n),
        }
    }

    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

pub fn map_ordered<T, U, F>(items: &[T], execution: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match execution {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        #[cfg(feature = "parallel")]
        Execution::Threads(n) => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                Err(_) => items.iter().map(f).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        _ => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..1000).collect();
        let expected: Vec<u64> = items.iter().map(|x| x * x).collect();
        for ex in [
            Execution::Sequential,
            Execution::Parallel,
            Execution::Threads(3),
        ] {
            assert_eq!(map_ordered(&items, ex, |x| x * x), expected);
        }
    }

    #[test]
    fn jobs_mapping() {
        assert_eq!(Execution::from_jobs(0), Execution::Parallel);
        assert_eq!(Execution::from_jobs(1), Execution::Sequential);
        assert_eq!(Execution::from_jobs(4), Execution::Threads(4));
    }
}

//! Data-parallel helpers.  With the `parallel` feature (on by default) these
//! dispatch to rayon; without it they run sequentially on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Maps `f` over `start..end`, preserving order.
pub fn map_range<R, F>(start: usize, end: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (start..end).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (start..end).map(f).collect()
    }
}

/// Runs two closures, potentially in parallel.
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

/// Runs `f` with at most `threads` workers (0 keeps the global pool).
/// Sequential builds ignore the limit.
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            return f();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a {threads}-thread pool ({e}); using the global pool");
                f()
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Whether this build dispatches to a thread pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v: Vec<u64> = (0..1000).collect();
        let sq = map_slice(&v, |x| x * x);
        assert!(sq.iter().enumerate().all(|(i, s)| *s == (i * i) as u64));
        assert_eq!(map_range(3, 7, |i| i), vec![3, 4, 5, 6]);
        assert_eq!(join(|| 1, || 2), (1, 2));
        assert_eq!(with_threads(1, || map_range(0, 4, |i| i * 2)), vec![0, 2, 4, 6]);
    }
}

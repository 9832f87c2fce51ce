//! Execution targets: sequential, or static tiling over x-planes on a thread pool.
//!
//! Every point is computed by the same expression whichever thread owns it,
//! so both targets produce bitwise-identical results.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid3D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Seq,
    Parallel,
}

impl Target {
    pub const NAMES: [&'static str; 2] = ["seq", "parallel"];

    pub fn name(self) -> &'static str {
        match self {
            Target::Seq => "seq",
            Target::Parallel => "parallel",
        }
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seq" => Ok(Target::Seq),
            "parallel" => Ok(Target::Parallel),
            other => Err(Error::config(format!(
                "unknown target {other:?}; valid targets: {}",
                Target::NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Clone)]
pub enum Executor {
    Sequential,
    Parallel { pool: Arc<rayon::ThreadPool>, nthreads: usize },
}

impl fmt::Debug for Executor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Executor::Sequential => write!(f, "Sequential"),
            Executor::Parallel { nthreads, .. } => write!(f, "Parallel({nthreads})"),
        }
    }
}

/// Builds the executor for `target`; `nthreads` is ignored by the sequential target.
pub fn select_target(target: Target, nthreads: usize) -> Result<Executor> {
    match target {
        Target::Seq => Ok(Executor::Sequential),
        Target::Parallel => {
            if nthreads == 0 {
                return Err(Error::config("nthreads must be >= 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(nthreads)
                .build()
                .map_err(|e| Error::config(format!("cannot start thread pool: {e}")))?;
            Ok(Executor::Parallel {
                pool: Arc::new(pool),
                nthreads,
            })
        }
    }
}

/// Splits `count` planes into `parts` contiguous ranges whose sizes differ by
/// at most one (larger ones first); trailing ranges are empty when
/// `parts > count`.
pub fn split_planes(count: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.max(1);
    let (q, r) = (count / parts, count % parts);
    let mut start = 0;
    (0..parts)
        .map(|p| {
            let len = q + usize::from(p < r);
            let range = start..start + len;
            start += len;
            range
        })
        .collect()
}

impl Executor {
    pub fn nthreads(&self) -> usize {
        match self {
            Executor::Sequential => 1,
            Executor::Parallel { nthreads, .. } => *nthreads,
        }
    }

    /// Runs `f` on every job; the parallel target hands each thread one
    /// contiguous tile of jobs, in order.
    pub fn run<J, F>(&self, jobs: Vec<J>, f: F)
    where
        J: Send,
        F: Fn(J) + Sync,
    {
        match self {
            Executor::Sequential => {
                let _ftz = FlushDenormals::new();
                jobs.into_iter().for_each(f)
            }
            Executor::Parallel { pool, nthreads } => {
                let tiles = split_planes(jobs.len(), *nthreads);
                let f = &f;
                let mut it = jobs.into_iter();
                pool.scope(|s| {
                    for t in tiles {
                        let tile: Vec<J> = it.by_ref().take(t.len()).collect();
                        if tile.is_empty() {
                            continue;
                        }
                        s.spawn(move |_| {
                            let _ftz = FlushDenormals::new();
                            tile.into_iter().for_each(f)
                        });
                    }
                });
            }
        }
    }
}

/// Sets flush-to-zero and denormals-are-zero on the current thread until
/// dropped. Wavefront precursors and decaying damping memory otherwise sit in
/// the subnormal range for many steps, where x86 arithmetic is very slow.
pub struct FlushDenormals {
    #[cfg(target_arch = "x86_64")]
    saved: u32,
}

#[cfg(target_arch = "x86_64")]
#[allow(deprecated)]
impl FlushDenormals {
    const FTZ_DAZ: u32 = 0x8040;

    pub fn new() -> Self {
        use std::arch::x86_64::{_mm_getcsr, _mm_setcsr};
        // SAFETY: only the FTZ and DAZ bits change; both are valid on every x86_64 CPU.
        let saved = unsafe { _mm_getcsr() };
        unsafe { _mm_setcsr(saved | Self::FTZ_DAZ) };
        FlushDenormals { saved }
    }
}

#[cfg(target_arch = "x86_64")]
#[allow(deprecated)]
impl Drop for FlushDenormals {
    fn drop(&mut self) {
        // SAFETY: restores the value read in `new`.
        unsafe { std::arch::x86_64::_mm_setcsr(self.saved) };
    }
}

#[cfg(not(target_arch = "x86_64"))]
impl FlushDenormals {
    pub fn new() -> Self {
        FlushDenormals {}
    }
}

impl Default for FlushDenormals {
    fn default() -> Self {
        Self::new()
    }
}

/// Mutable x-plane chunks (ghosts in y and z included) of a field's storage.
pub fn planes_mut<'a, T>(grid: &Grid3D, data: &'a mut [T]) -> Vec<&'a mut [T]> {
    let sx = grid.strides()[0];
    let r = grid.radius();
    data.chunks_mut(sx).skip(r).take(grid.n()[0]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::hint::black_box;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    #[cfg(target_arch = "x86_64")]
    fn denormals_flush_only_inside_the_guard() {
        let tiny = black_box(f32::MIN_POSITIVE);
        let half = || black_box(tiny) * black_box(0.5f32);
        assert!(half().is_subnormal());
        {
            let _g = FlushDenormals::new();
            assert_eq!(half(), 0.0);
        }
        assert!(half().is_subnormal());
    }

    #[test]
    fn unknown_target_lists_valid_ones() {
        let err = "gpu".parse::<Target>().unwrap_err().to_string();
        assert!(err.contains("seq") && err.contains("parallel"), "{err}");
    }

    #[test]
    fn split_handles_small_counts() {
        assert_eq!(split_planes(3, 8).iter().filter(|r| r.is_empty()).count(), 5);
        assert_eq!(split_planes(0, 4).len(), 4);
        assert_eq!(split_planes(10, 3), vec![0..4, 4..7, 7..10]);
    }

    #[test]
    fn parallel_runs_every_job_once() {
        let ex = select_target(Target::Parallel, 4).unwrap();
        let hits: Vec<AtomicUsize> = (0..37).map(|_| AtomicUsize::new(0)).collect();
        ex.run((0..37).collect(), |i: usize| {
            hits[i].fetch_add(1, Ordering::Relaxed);
        });
        assert!(hits.iter().all(|h| h.load(Ordering::Relaxed) == 1));
    }

    #[test]
    fn planes_cover_interior() {
        let g = Grid3D::new([5, 3, 2], [1.0; 3], 2).unwrap();
        let mut data = vec![0u8; g.len()];
        let planes = planes_mut(&g, &mut data);
        assert_eq!(planes.len(), 5);
        assert!(planes.iter().all(|p| p.len() == 7 * 6));
    }

    proptest! {
        #[test]
        fn split_is_contiguous_cover(count in 0usize..200, parts in 1usize..17) {
            let s = split_planes(count, parts);
            prop_assert_eq!(s.len(), parts);
            let mut next = 0;
            for r in &s {
                prop_assert_eq!(r.start, next);
                next = r.end;
            }
            prop_assert_eq!(next, count);
            let lens: Vec<usize> = s.iter().map(|r| r.len()).collect();
            prop_assert!(lens.iter().max().unwrap() - lens.iter().min().unwrap() <= 1);
        }
    }
}

//! Parallel Monte Carlo and matrix assembly.
//!
//! Path `i` always draws from the random stream `(seed, i)` and results are
//! collected in path order, so output does not depend on the thread count.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use shiftwalk_core::limits::{ctrw_initial_density, simulate_ctrw, CtrwInit, JumpRecord};
use shiftwalk_core::maps::builtin::example1;
use shiftwalk_core::rng::{path_rng, UnitSampler};
use shiftwalk_core::transfer::{ulam_row, UlamApproximation};
use shiftwalk_core::walk::{chi_square_independence, tally_pairs, IndependenceReport};
use shiftwalk_core::{Result, ShiftPeriodicMap};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "SHIFTWALK_THREADS";

/// Runs `f` on a pool with `threads` workers, or rayon's default when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool").install(f),
        _ => f(),
    }
}

/// Maps `f` over paths `0..n_paths`, giving each its own random stream.
pub fn par_paths<T: Send>(n_paths: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng, usize) -> T + Sync) -> Vec<T> {
    (0..n_paths).into_par_iter().map(|i| f(&mut path_rng(seed, i as u64), i)).collect()
}

/// Ulam approximation with the rows assembled in parallel.
pub fn ulam_parallel(map: &ShiftPeriodicMap, breaks: Vec<f64>) -> Result<UlamApproximation> {
    let rows = (0..breaks.len() - 1).into_par_iter().map(|i| ulam_row(map, &breaks, i)).collect();
    UlamApproximation::from_rows(breaks, rows)
}

/// Consecutive-increment independence test over parallel paths.
///
/// Agrees exactly with the sequential test for the same seed.
pub fn independence_parallel(map: &ShiftPeriodicMap, sampler: &(dyn UnitSampler + Sync), n_steps: usize, n_paths: usize, seed: u64) -> Result<IndependenceReport> {
    let counts = (0..n_paths)
        .into_par_iter()
        .fold(
            || [[0u64; 5]; 5],
            |mut acc, p| {
                let mut rng = path_rng(seed, p as u64);
                tally_pairs(map, sampler.sample(&mut rng), n_steps, &mut acc);
                acc
            },
        )
        .reduce(
            || [[0u64; 5]; 5],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                a
            },
        );
    chi_square_independence(counts)
}

/// Continuous-time walk records over parallel paths.
pub fn ctrw_parallel(eps: f64, delta: f64, m: usize, horizon: f64, init: CtrwInit, n_paths: usize, seed: u64) -> Result<Vec<JumpRecord>> {
    let map = example1(eps / m as f64, delta / m as f64)?;
    let density = ctrw_initial_density(eps, delta, m, init)?;
    par_paths(n_paths, seed, |rng, _| simulate_ctrw(&map, m, horizon, &density, rng)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use shiftwalk_core::limits::simulate_ctrw_paths;
    use shiftwalk_core::rng::Uniform01;
    use shiftwalk_core::transfer::ulam_invariant_density;
    use shiftwalk_core::walk::increment_independence_test;

    #[test]
    fn parallel_matches_sequential() {
        let m = example1(0.3, 0.1).unwrap();
        let a = independence_parallel(&m, &Uniform01, 10, 500, 4).unwrap();
        let b = increment_independence_test(&m, &Uniform01, 10, 500, 4).unwrap();
        assert_eq!(a.counts, b.counts);
        let u = ulam_parallel(&m, shiftwalk_core::transfer::uniform_breaks(300)).unwrap();
        assert_eq!(u.stationary(), ulam_invariant_density(&m, 300).unwrap().stationary());
        let r1 = with_threads(Some(3), || ctrw_parallel(0.5, 0.5, 10, 20.0, CtrwInit::Uniform, 40, 8).unwrap());
        let r2 = simulate_ctrw_paths(0.5, 0.5, 10, 20.0, CtrwInit::Uniform, 40, 8).unwrap();
        assert_eq!(r1, r2);
    }
}

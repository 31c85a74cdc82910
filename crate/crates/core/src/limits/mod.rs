//! Scaling limits of the walk: stable Levy motions and exponential waiting times.
//!
//! The stable law is sampled by the Chambers-Mallows-Stuck construction and its
//! distribution function is obtained by inverting the characteristic function.
//! The rescaled walk uses the centering and scaling table of the functional
//! limit theorem. For small spikes with time rescaled by `m`, the jumps of the
//! walk form a continuous-time random walk with exponential waiting times.

mod ctrw;
mod fclt;
mod stable;

pub use ctrw::{ctrw_initial_density, default_guard, exponential_test, gamma, hole_measure, simulate_ctrw, simulate_ctrw_paths, waiting_time_test, CtrwInit, JumpRecord, INIT_GRID, INIT_ORBIT_DEPTH, MIN_WAITING_TIMES};
pub use fclt::{sample_increment, scaling_plan, simulate_vn, simulate_vn_increments, Regime, ScalingPlan, VnPath, MAX_RESAMPLES};
pub use stable::{cauchy_cdf, gaussian_limit_cdf, stable_cdf, stable_sample, StableParams};

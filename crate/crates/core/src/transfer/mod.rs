//! Transfer operators for the invariant and conditionally invariant densities.
//!
//! For the four-piece map with holes the Frobenius-Perron operator acts
//! exactly on piecewise constant densities, which gives the conditionally
//! invariant density and the contraction of the three-piece class. For other
//! maps the invariant density is estimated with Ulam's method, and for the
//! four-piece map it is also available in closed form as a sum over the
//! orbits of the two spikes.

mod density;
mod gora;
mod operator;
mod ulam;

pub use density::PiecewiseConstantDensity;
pub use ulam::{orbit_refined_breaks, ulam_invariant_density, ulam_on_partition, ulam_row, uniform_breaks, UlamApproximation, UlamRow};
pub use operator::{cond_invariant_density, convergence_check, fp_step, hole_measure, psi, CondInvariantDensity, LinearTransferOperator};
pub use gora::{example1_orbit, gora_density, GoraDensity, GoraTerm, OrbitPoint, Side};

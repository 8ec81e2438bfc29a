//! Discrete potential theory and random interlacements seen from a finite
//! window `K`.
//!
//! Restricted to `K`, the interlacement at level `u` has `Poisson(u Cap(K))`
//! trajectories; each enters `K` at `z` with probability `e_K(z)/Cap(K)`,
//! continues as a free walk and arrives from a walk that never returned to
//! `K`.

mod checks;
mod equilibrium;
mod sampler;

pub use checks::{hitting_asymptotics_check, long_loop_vs_interlacement, theorem_config, HittingReport, LongLoopComparison};
pub use equilibrium::{
    equilibrium_mc, equilibrium_solve, escape_map, green_asymptotic, EquilibriumData, EquilibriumMethod,
};
pub use sampler::{
    ct_walk, late_return_bound, sample_interlacements, Horizons, InterlacementSample, InterlacementSampler,
};

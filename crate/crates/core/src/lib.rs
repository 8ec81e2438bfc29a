//! Bosonic loop soups on `Z^d`, their supercritical conditioning, and random
//! interlacements.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernels`]: exact transition kernels and Green's functions of the
//!   rate-one continuous-time simple random walk.
//! * [`thermo`]: loop-measure masses, critical density, the chemical-potential
//!   inverse and the large-deviation rate function of the free gas.
//! * [`paths`]: path skeletons, random-walk bridges, loops, canonical
//!   rotations, the `D_K` observable, the particle map and interaction energies.
//! * [`soup`]: Poisson loop soups on boxes with free or Dirichlet boundary.
//! * [`conditioned`]: the soup conditioned on a supercritical density, both as
//!   an exact rejection oracle and through the long-loop decomposition.
//! * [`interlacements`]: equilibrium measures, capacities and random
//!   interlacements restricted to a finite window.
//! * [`harness`]: experiment configuration, statistics and result records.

pub mod conditioned;
pub mod error;
pub mod extended;
pub mod harness;
pub mod interlacements;
pub mod kernels;
pub mod lattice;
pub mod paths;
pub mod rng;
pub mod soup;
pub mod thermo;

mod quad;

pub use error::{Error, Result};
pub use extended::Extended;
pub use kernels::ModelParams;
pub use lattice::{LatticeBox, Site, SiteSet};

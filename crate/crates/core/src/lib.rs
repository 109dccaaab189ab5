//! Numerical laboratory for the generalized logarithmic Hardy-Littlewood-Sobolev
//! inequality on the plane.
//!
//! Everything here works on radial profiles sampled on a graded [`RadialGrid`]:
//!
//! * [`grid`]: nodes, fourth-order interval quadrature in the measure `2πr dr`,
//!   power-law tail corrections and finite-difference operators;
//! * [`profile`]: [`Density`], [`Field`], the reference pair `(μ, V)` and the
//!   standard test densities;
//! * [`greens`]: the inverse Laplacian with the logarithmic kernel, the log
//!   convolution and the interaction integral `∬ f f log|x−y|`;
//! * [`functionals`]: entropies, the α-deficit, free energies, the
//!   Gagliardo-Nirenberg deficit, dissipation terms and the Onofri dual gap;
//! * [`flow`]: the entropy-dissipating nonlinear flow and the
//!   drift-diffusion-Poisson flow, in conservative radial finite-volume form;
//! * [`stationary`]: self-consistent stationary states of the repulsive
//!   problem and the reduced convex functional.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod flow;
pub mod functionals;
pub mod greens;
pub mod grid;
pub mod profile;
pub mod stationary;

mod linalg;

pub use error::{Error, Result};
pub use functionals::{Coupling, DissipationReport, FunctionalReport};
pub use grid::{RadialGrid, Tail};
pub use profile::{Density, Field, Profile, ReferencePair};

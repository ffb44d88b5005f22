//! Invariant-domain-preserving finite element solver for the compressible
//! Navier-Stokes equations.
//!
//! Each time step is a Strang splitting of an explicit, convex-limited
//! Euler update ([`hyperbolic`]) and an implicit viscous and thermal update
//! ([`parabolic`]) on continuous P1 elements over simplicial meshes in one
//! and two dimensions. Density stays positive and internal energy stays
//! positive under a CFL condition that involves the hyperbolic part only.

pub mod becker;
pub mod eos;
pub mod error;
pub mod field;
pub mod harness;
pub mod hyperbolic;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod parabolic;
pub mod riemann;
pub mod splitting;

pub use eos::{ConservedState, GasModel};
pub use error::{Error, Result};
pub use field::{Discretization, SolutionField};
pub use mesh::{BoundaryKind, MeshTopology};

//! Split-form discontinuous Galerkin spectral element solver for the 3D
//! compressible Euler equations on periodic Cartesian meshes.
//!
//! The volume integral is written in flux-differencing form with a choice of
//! two-point fluxes (kinetic energy preserving, entropy conserving, ...), and
//! the interface flux is the same two-point flux plus optional dissipation.

pub mod basis;
pub mod cases;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod euler;
pub mod field;
pub mod flux;
pub mod mesh;
pub mod sampling;
pub mod solver;
pub mod time;

pub use basis::PolyBasis;
pub use cases::{CaseId, TgvVariant};
pub use error::{Error, NodeLocation, Result};
pub use euler::{Axis, EulerState, GasModel, PrimState, NVARS};
pub use field::{Discretization, Field};
pub use flux::{FluxScheme, Stabilization};
pub use mesh::CartesianMesh;
pub use solver::SemidiscreteConfig;

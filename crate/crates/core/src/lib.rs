//! Guaranteed, fully computable upper bounds (functional error majorants) for
//! the energy-norm distance `‖∇(v − u)‖` between an admissible approximation
//! `v` and the exact minimizer `u` of thin obstacle and scalar Signorini
//! problems.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: the two-triangle domain split by the flat manifold `M`, and
//!   its uniform triangulation.
//! - [`quadrature`]: triangle / segment rules, clipped and graded domain
//!   integration with a deterministic reduction order.
//! - [`fields`]: scalar approximations, fluxes, multipliers and admissibility.
//! - [`constants`]: Friedrichs, trace, Poincaré and sloshing constants with
//!   provenance tracking.
//! - [`majorants`]: every interior-obstacle majorant, the optimal multiplier,
//!   optimal `α`, `β`-search and iterative majorant minimization.
//! - [`signorini`]: majorants for the boundary (Signorini) variant.
//! - [`paperbench`]: the exact solution and the three worked example families.

pub mod constants;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod majorants;
pub mod paperbench;
pub mod quadrature;
pub mod signorini;

pub use constants::{
    assemble_constants, friedrichs_example_triangle, payne_weinberger, Constant, ConstantId,
    ConstantOverrides, ConstantSet, Provenance,
};
pub use error::{Error, Result};
pub use fields::{
    check_admissible, flux_from_gradient, multiplier_from_jump, AdmissibilityReport, FluxField,
    MultiplierField, ScalarField, SharedField, SharedFlux, SharedMultiplier, Smoothness,
};
pub use geometry::{build_domain, triangulate, Domain2D, Mesh, Point, Side, Vector};
pub use majorants::{
    optimal_alpha, Alpha, Betas, Estimator, M5Mode, MajorantKind, MajorantReport,
    ThinObstacleProblem,
};
pub use quadrature::QuadConfig;

//! Deformed Heisenberg algebras and the two-dimensional gravitational quantum well.
//!
//! Two engines share this crate:
//!
//! * a symbolic one ([`symalg`], [`reps`]) that normal-orders noncommutative
//!   operator polynomials with exact complex-rational coefficients and checks
//!   commutation relations, Jacobi identities and hermiticity of the Bopp-shift
//!   representations with zero residual;
//! * a numeric one ([`airy`], [`spectrum`], [`bounds`], [`fdcheck`]) that
//!   computes Airy-function spectra of the gravitational well, the energy shifts
//!   induced by the deformation parameters, and the upper bounds those shifts
//!   imply when confronted with neutron data.
//!
//! [`cli`] binds both behind the `gqwell` binary.

pub mod airy;
pub mod bounds;
pub mod cli;
pub mod constants;
pub mod fdcheck;
pub mod quadrature;
pub mod reps;
pub mod spectrum;
pub mod symalg;

pub use bounds::{BoundReport, TauConvention};
pub use constants::{Constants, Experiment};
pub use spectrum::{DeformationParams, NeglectPolicy, SpectrumPoint};
pub use symalg::{AlgebraContext, OpExpr, Param, ParamScalar};

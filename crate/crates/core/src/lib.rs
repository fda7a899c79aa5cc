//! Multimatrix variate distributions built from a matrix variate spherical
//! draw `X = (X_0', X_1', ..., X_k')'`.
//!
//! The crate covers the change-of-variable statistics ([`transforms`]), the
//! log densities of the resulting families ([`densities`]), seeded samplers
//! ([`sampling`]) and maximum likelihood for the beta type II model
//! ([`estimation`]).

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod densities;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod kernels;
pub mod matcore;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod special;
pub mod transforms;

pub use densities::{Family, Form, FormKind, LocationScale, ShapeParams};
pub use error::{Error, Result};
pub use kernels::{KernelFamily, KernelSpec};
pub use matcore::{BlockStructure, RealMatrix, SpdMatrix};
pub use rng::RngStream;
pub use transforms::{derive, Anchor, BlockRole, DerivedBlock, DerivedSample, Roles};

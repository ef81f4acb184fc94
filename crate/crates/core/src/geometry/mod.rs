//! Differential-geometric kernel: charts, vector fields with derivative
//! oracles, affine connections, brackets and symmetric products.
//!
//! Every manifold handled here lives in a single global chart. Tangent
//! vectors of the configuration manifold are represented by their components
//! either in the coordinate frame or in a moving frame (body velocities); the
//! [`Connection`] records which.

mod connection;
mod field;
mod ops;

pub use connection::{Christoffel, Connection, Frame};
pub use field::{Chart, DerivativeOracle, TangentPoint, VectorField, DEFAULT_FD_STEP};
pub use ops::{
    covariant_derivative, geodesic_spray, lie_bracket, symmetric_product, tangent_chart,
    verify_triple_bracket, vertical_lift, TripleBracketCheck,
};

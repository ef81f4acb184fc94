//! Trackability certificates and oscillatory tracking control laws for
//! forced affine connection control systems.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: charts, vector fields, connections, symmetric products.
//! * [`models`]: the system type [`Faccs`] and the bundled hovercraft and
//!   submarine models.
//! * [`sequences`]: the `φ` and `ψ` oscillation profiles and `Λ_T`.
//! * [`cones`]: the `𝒵_l` and `𝓗_l` families and [`certify`].
//! * [`synthesis`]: reference parameterization and law construction.
//! * [`dynamics`]: integration, tracking error and convergence tables.

pub mod cones;
pub mod dynamics;
mod error;
pub mod geometry;
pub mod models;
pub mod sequences;
pub mod synthesis;

pub use cones::{certify, BracketTree, Status, TrackabilityReport};
pub use dynamics::{integrate, tracking_error, IntegratorConfig, Trajectory};
pub use error::{Error, Result};
pub use geometry::{Chart, Connection, TangentPoint, VectorField};
pub use models::{hovercraft, submarine, Faccs, HovercraftParams, SubmarineParams};
pub use sequences::{phi, psi, PeriodicFn};
pub use synthesis::{ControlLaw, EpsSchedule, Parameterization, ReferenceCurve, Regime};

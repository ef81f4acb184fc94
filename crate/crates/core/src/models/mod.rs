//! Concrete control systems and the generic [`Faccs`] container.

mod faccs;
mod hovercraft;
mod rotation;
mod submarine;

pub use faccs::{flat_system, Faccs, TimeForce, VERTICALITY_TOL};
pub use hovercraft::{hovercraft, HovercraftParams};
pub use rotation::{nearest_rotation, orthogonality_defect};
pub use submarine::{
    orthogonality_drift, submarine, submarine_state, SubmarineParams, A33_INDEX, IDENTITY3, ROTATION_START,
    SUBMARINE_DIM,
};

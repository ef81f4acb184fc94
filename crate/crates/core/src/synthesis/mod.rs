//! Reference parameterization and construction of oscillatory tracking laws.

mod averaged;
mod coef;
mod hrec;
mod law;
mod param;
mod reference;
mod schedule;
mod spline;
mod theorem;

pub use averaged::averaged_counterpart;
pub use coef::{fundamental_period, Coef};
pub use hrec::{h_step, recursion_h};
pub use law::{ControlLaw, StepRecord};
pub use param::{
    coefficient_from_samples, parameterize_h, parameterize_z, ParamMode, Parameterization, CONST_TOL, DEFAULT_GRID,
    FIT_TOL,
};
pub use reference::{
    hovercraft_rest, hovercraft_sideways, polynomial, submarine_line, submarine_rest, ReferenceCurve,
};
pub use schedule::{eta_schedule, EpsSchedule, Regime};
pub use spline::CubicSpline;
pub use theorem::{
    decompose_level, recursion_z, sigma_along, synth_theorem_12_26, theorem_step, OscMode, SigmaFn, TheoremStep,
};

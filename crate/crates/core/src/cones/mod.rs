//! Symmetric-product families and trackability certificates.

mod certify;
mod family;
pub mod linalg;
mod tree;

pub use certify::{
    certify, certify_with_families, cone_spans, membership_residual, sample_states, span_rank, Certificate,
    MembershipEntry, MembershipFit, RankSummary, Status, TrackabilityReport, Verdict, MAX_CERTIFY_LEVEL,
    MEMBERSHIP_TOL,
};
pub use family::{
    cone_element, generate_h, generate_z, HConeElement, HFamily, HGenerator, HKind, PruneReason, PruneRecord,
    ZFamily, DEDUPE_TOL, H_SCALINGS, PARALLEL_TOL,
};
pub use linalg::SIGMA_TOL;
pub use tree::{BracketNode, BracketTree, Weight};

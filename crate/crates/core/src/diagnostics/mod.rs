//! Decay quantities, rate fits and pointwise identity checks on flow states.

mod fit;
mod identities;
mod monitor;
mod record;

pub use fit::{decay_rate_fit, RateFit, FIT_FLOOR, MIN_FIT_RECORDS};
pub use identities::{
    grad1_residual, max_point_identity, Grad1Report, MaxPointResidual, GRAD1_TERMS,
    VACUOUS_THRESHOLD,
};
pub use monitor::{boundedness_monitor, BoundednessReport, KAPPA_FLOOR};
pub use record::{record, DiagnosticsRecord, DiagnosticsSeries, Quantity, CSV_COLUMNS};

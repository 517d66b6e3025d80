#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvfun;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod geometry;

pub use curvfun::{CurvatureFunction, PrincipalCurvatures, StructureConstants};
pub use diagnostics::{DiagnosticsRecord, DiagnosticsSeries, RateFit};
pub use error::{Error, Result};
pub use flow::{FlowConfig, FlowState, InitialData, SpeedFunction};
pub use geometry::{AxiMesh, GraphField, SurfaceJet};

use serde::Serialize;

use crate::flow::{FlowState, SpeedFunction};
use crate::geometry::stencil;

/// Column order of the diagnostics CSV.
pub const CSV_COLUMNS: [&str; 12] = [
    "t",
    "u_min",
    "u_max",
    "v_max",
    "v_max_minus_1",
    "coth_u_minus_1_max",
    "kappa_min",
    "kappa_max",
    "osc_u_tilde",
    "cauchy_u_tilde",
    "traceless_norm_max",
    "dt",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// Maximum of the quartic interpolant of `v`, not just the node maximum.
    pub v_max: f64,
    pub v_max_minus_1: f64,
    /// `coth u - 1` at the node of smallest `u`.
    pub coth_u_minus_1_max: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    /// `max ũ - min ũ` with `ũ = u - t/nᵖ`.
    pub osc_u_tilde: f64,
    /// Sup-norm change of `ũ` since the previous record; NaN on the first.
    pub cauchy_u_tilde: f64,
    /// `max ‖Å‖²`, with `‖Å‖² = ‖A‖² - H²/n`.
    pub traceless_norm_max: f64,
    /// Step bound at this state.
    pub dt: f64,
    pub f_min: f64,
    pub f_max: f64,
}

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        let vals = [
            self.t,
            self.u_min,
            self.u_max,
            self.v_max,
            self.v_max_minus_1,
            self.coth_u_minus_1_max,
            self.kappa_min,
            self.kappa_max,
            self.osc_u_tilde,
            self.cauchy_u_tilde,
            self.traceless_norm_max,
            self.dt,
        ];
        vals.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
    }
}

/// Snapshot of the decay quantities of `state`. `cauchy_u_tilde` is left NaN
/// (it needs the previous state, see [`DiagnosticsSeries::push`]).
pub fn record(state: &FlowState, speed: &SpeedFunction, dt: f64) -> DiagnosticsRecord {
    let jet = &state.jet;
    let n = jet.dim() as f64;
    let u = state.field.values();
    let peak = stencil::refine_peak(&jet.v_minus_1);
    let u_min = state.field.min();

    let mut kappa_min = f64::INFINITY;
    let mut kappa_max = f64::NEG_INFINITY;
    let mut traceless: f64 = 0.0;
    let mut f_min = f64::INFINITY;
    let mut f_max = f64::NEG_INFINITY;
    for j in 0..jet.len() {
        let (km, kp) = (jet.kappa_merid[j], jet.kappa_par[j]);
        kappa_min = kappa_min.min(km).min(kp);
        kappa_max = kappa_max.max(km).max(kp);
        // |A|² - H²/n reduces to this for (κ_m, κ_p × (n-1))
        traceless = traceless.max((n - 1.0) / n * (km - kp).powi(2));
        if let Ok(val) = speed.curvature().eval_axisymmetric(km, kp) {
            f_min = f_min.min(val.f);
            f_max = f_max.max(val.f);
        }
    }
    DiagnosticsRecord {
        t: state.t,
        u_min,
        u_max: state.field.max(),
        v_max: 1.0 + peak.value,
        v_max_minus_1: peak.value,
        coth_u_minus_1_max: 2.0 / (2.0 * u_min).exp_m1(),
        kappa_min,
        kappa_max,
        osc_u_tilde: u.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - u_min,
        cauchy_u_tilde: f64::NAN,
        traceless_norm_max: traceless,
        dt,
        f_min,
        f_max,
    }
}

/// Scalar quantities a rate can be fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    VMaxMinus1,
    CothUMinus1,
    OscUTilde,
    CauchyUTilde,
    TracelessNorm,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::VMaxMinus1,
        Quantity::CothUMinus1,
        Quantity::OscUTilde,
        Quantity::CauchyUTilde,
        Quantity::TracelessNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::VMaxMinus1 => "v_max_minus_1",
            Quantity::CothUMinus1 => "coth_u_minus_1_max",
            Quantity::OscUTilde => "osc_u_tilde",
            Quantity::CauchyUTilde => "cauchy_u_tilde",
            Quantity::TracelessNorm => "traceless_norm_max",
        }
    }

    pub fn of(self, r: &DiagnosticsRecord) -> f64 {
        match self {
            Quantity::VMaxMinus1 => r.v_max_minus_1,
            Quantity::CothUMinus1 => r.coth_u_minus_1_max,
            Quantity::OscUTilde => r.osc_u_tilde,
            Quantity::CauchyUTilde => r.cauchy_u_tilde,
            Quantity::TracelessNorm => r.traceless_norm_max,
        }
    }
}

/// Time-ordered records of one run.
#[derive(Debug, Clone)]
pub struct DiagnosticsSeries {
    speed: SpeedFunction,
    records: Vec<DiagnosticsRecord>,
    last_u_tilde: Option<Vec<f64>>,
}

impl DiagnosticsSeries {
    pub fn new(speed: SpeedFunction) -> Self {
        Self { speed, records: Vec::new(), last_u_tilde: None }
    }

    /// Series made of precomputed records (for fitting external data).
    pub fn from_records(speed: SpeedFunction, records: Vec<DiagnosticsRecord>) -> Self {
        Self { speed, records, last_u_tilde: None }
    }

    pub fn speed(&self) -> &SpeedFunction {
        &self.speed
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&DiagnosticsRecord> {
        self.records.last()
    }

    pub fn push(&mut self, state: &FlowState, dt: f64) -> &DiagnosticsRecord {
        let mut rec = record(state, &self.speed, dt);
        let shift = state.t / (state.jet.dim() as f64).powf(self.speed.p());
        let u_tilde: Vec<f64> = state.field.values().iter().map(|u| u - shift).collect();
        if let Some(prev) = &self.last_u_tilde {
            rec.cauchy_u_tilde =
                prev.iter().zip(&u_tilde).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        }
        self.last_u_tilde = Some(u_tilde);
        self.records.push(rec);
        self.records.last().unwrap()
    }
}

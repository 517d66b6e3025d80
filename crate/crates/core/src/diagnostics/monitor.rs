use serde::Serialize;

use super::DiagnosticsRecord;

/// A `κ_min` below this counts as drifting to the boundary of the cone.
pub const KAPPA_FLOOR: f64 = 1e-3;

/// Bounds over a run of the quantities that must stay in a compact range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub f_max: f64,
    pub inv_f_min: f64,
    pub v_max: f64,
    /// `[min κ_min, max κ_max]` over records with `t ≥ t_from`.
    pub kappa_envelope: [f64; 2],
    /// `max κ_max/κ_min` over records with `t ≥ t_from`.
    pub kappa_ratio_max: f64,
    pub t_from: f64,
    pub compact: bool,
}

/// Envelope of `F`, `1/F`, `v` over all records and of `κ` over `t ≥ t_from`.
pub fn boundedness_monitor(records: &[DiagnosticsRecord], t_from: f64) -> BoundednessReport {
    let mut rep = BoundednessReport {
        f_max: 0.0,
        inv_f_min: 0.0,
        v_max: 1.0,
        kappa_envelope: [f64::INFINITY, 0.0],
        kappa_ratio_max: 0.0,
        t_from,
        compact: true,
    };
    for r in records {
        rep.f_max = rep.f_max.max(r.f_max);
        rep.inv_f_min = rep.inv_f_min.max(1.0 / r.f_min);
        rep.v_max = rep.v_max.max(r.v_max);
        if !(r.kappa_min > 0.0 && r.kappa_max.is_finite()) {
            rep.compact = false;
        }
        if r.t >= t_from {
            rep.kappa_envelope[0] = rep.kappa_envelope[0].min(r.kappa_min);
            rep.kappa_envelope[1] = rep.kappa_envelope[1].max(r.kappa_max);
            rep.kappa_ratio_max = rep.kappa_ratio_max.max(r.kappa_max / r.kappa_min);
            if !(r.kappa_min >= KAPPA_FLOOR) {
                rep.compact = false;
            }
        }
    }
    if !(rep.f_max.is_finite() && rep.inv_f_min.is_finite() && rep.v_max.is_finite()) {
        rep.compact = false;
    }
    rep
}

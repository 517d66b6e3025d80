use serde::Serialize;

use crate::error::{Error, Result};

use super::{DiagnosticsRecord, Quantity};

/// Values at or below this are treated as noise and excluded from fits.
pub const FIT_FLOOR: f64 = 1e-14;
pub const MIN_FIT_RECORDS: usize = 10;

/// Least-squares fit `q(t) ≈ c e^{-λ t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub lambda_hat: f64,
    pub c_hat: f64,
    pub window: [f64; 2],
    /// Largest deviation of `log q` from the fitted line.
    pub residual: f64,
}

pub fn decay_rate_fit(
    records: &[DiagnosticsRecord],
    quantity: Quantity,
    window: [f64; 2],
) -> Result<RateFit> {
    let slack = 1e-9 * window[1].abs().max(1.0);
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.t >= window[0] - slack && r.t <= window[1] + slack)
        .map(|r| (r.t, quantity.of(r)))
        .filter(|(_, q)| q.is_finite() && *q > FIT_FLOOR)
        .map(|(t, q)| (t, q.ln()))
        .collect();
    if pts.len() < MIN_FIT_RECORDS {
        return Err(Error::InsufficientData { needed: MIN_FIT_RECORDS, found: pts.len() });
    }
    let m = pts.len() as f64;
    let t_bar = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let y_bar = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut sty, mut stt) = (0.0, 0.0);
    for (t, y) in &pts {
        sty += (t - t_bar) * (y - y_bar);
        stt += (t - t_bar) * (t - t_bar);
    }
    let slope = sty / stt;
    let intercept = y_bar - slope * t_bar;
    let residual = pts.iter().map(|(t, y)| (y - intercept - slope * t).abs()).fold(0.0, f64::max);
    Ok(RateFit { lambda_hat: -slope, c_hat: intercept.exp(), window, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64, n: usize, dt: f64) -> Vec<DiagnosticsRecord> {
        (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                DiagnosticsRecord {
                    t,
                    u_min: 1.0,
                    u_max: 1.0,
                    v_max: 1.0 + f(t),
                    v_max_minus_1: f(t),
                    coth_u_minus_1_max: 0.0,
                    kappa_min: 1.0,
                    kappa_max: 1.0,
                    osc_u_tilde: 0.0,
                    cauchy_u_tilde: f64::NAN,
                    traceless_norm_max: 0.0,
                    dt,
                    f_min: 2.0,
                    f_max: 2.0,
                }
            })
            .collect()
    }

    #[test]
    fn exact_exponential() {
        let recs = synthetic(|t| 3.0 * (-0.5 * t).exp(), 101, 0.1);
        let fit = decay_rate_fit(&recs, Quantity::VMaxMinus1, [0.0, 10.0]).unwrap();
        assert!((fit.lambda_hat - 0.5).abs() < 1e-10);
        assert!((fit.c_hat - 3.0).abs() < 1e-9);
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn constant_series_has_zero_rate() {
        let recs = synthetic(|_| 0.25, 50, 0.1);
        let fit = decay_rate_fit(&recs, Quantity::VMaxMinus1, [0.0, 5.0]).unwrap();
        assert!(fit.lambda_hat.abs() < 1e-14);
    }

    #[test]
    fn window_restricts_records() {
        // slope changes at t = 5; fitting only the tail recovers the late rate
        let recs = synthetic(|t| if t < 5.0 { (-2.0 * t).exp() } else { (-10.0 - (t - 5.0)).exp() }, 101, 0.1);
        let fit = decay_rate_fit(&recs, Quantity::VMaxMinus1, [5.0, 10.0]).unwrap();
        assert!((fit.lambda_hat - 1.0).abs() < 1e-10);
        assert_eq!(fit.window, [5.0, 10.0]);
    }

    #[test]
    fn floor_truncation_is_an_error() {
        let recs = synthetic(|t| (-10.0 * t).exp(), 40, 0.1);
        // e^{-10t} falls below 1e-14 after t ≈ 3.2
        let err = decay_rate_fit(&recs, Quantity::VMaxMinus1, [2.5, 4.0]).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { needed: 10, found } if found < 10));
    }
}

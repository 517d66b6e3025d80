//! Spherical solutions: the flow restricted to geodesic spheres around the
//! center is the autonomous ODE `u̇ = (n coth u)^(-p)`.

use super::SpeedFunction;

/// Error tolerance (absolute and relative) of the adaptive integrator.
pub const ODE_TOLERANCE: f64 = 1e-12;

/// Dormand–Prince 5(4) integration of a scalar autonomous ODE from `t0` to
/// `t1`, landing exactly on `t1`.
pub fn dopri5(f: impl Fn(f64) -> f64, y0: f64, t0: f64, t1: f64, tol: f64) -> f64 {
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    // difference between the 5th and embedded 4th order weights
    const E: [f64; 7] = [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ];
    let span = t1 - t0;
    if span <= 0.0 {
        return y0;
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = (span * 1e-2).min(1e-2);
    let mut k = [0.0; 7];
    k[0] = f(y);
    while t < t1 {
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 0..6 {
            let incr: f64 = (0..=s).map(|i| C[s][i] * k[i]).sum();
            k[s + 1] = f(y + h * incr);
        }
        // stage 7 is evaluated at the 5th-order solution (FSAL)
        let y_new = y + h * (0..6).map(|i| C[5][i] * k[i]).sum::<f64>();
        let err = h * (0..7).map(|i| E[i] * k[i]).sum::<f64>();
        let scale = tol + tol * y.abs().max(y_new.abs());
        let ratio = err.abs() / scale;
        if ratio <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y_new;
            k[0] = k[6];
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    y
}

/// Radius at time `t` of the spherical solution starting from `u0` at time 0.
pub fn spherical_solution(u0: f64, speed: &SpeedFunction, t: f64) -> f64 {
    let n = speed.curvature().n() as f64;
    let p = speed.p();
    dopri5(|u| (n / u.tanh()).powf(-p), u0, 0.0, t, ODE_TOLERANCE)
}

/// A spherical solution advanced incrementally, used as a barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalBarrier {
    pub t: f64,
    pub u: f64,
}

impl SphericalBarrier {
    pub fn new(t: f64, u: f64) -> Self {
        Self { t, u }
    }

    pub fn advance_to(&mut self, t: f64, speed: &SpeedFunction) {
        let n = speed.curvature().n() as f64;
        let p = speed.p();
        self.u = dopri5(|u| (n / u.tanh()).powf(-p), self.u, self.t, t, ODE_TOLERANCE);
        self.t = t;
    }
}

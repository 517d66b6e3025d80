//! Finite-difference stencils on the staggered polar grid.
//!
//! Nodes sit at `φ_j = (j + 1/2) Δφ`, so the even reflections across `φ = 0`
//! and `φ = π` map nodes onto nodes: ghost `-1 - j` mirrors node `j`, and
//! ghost `N + j` mirrors node `N - 1 - j`.

/// Node value with even reflection across both poles.
#[inline]
pub fn reflected(values: &[f64], i: isize) -> f64 {
    let n = values.len() as isize;
    let j = if i < 0 {
        -1 - i
    } else if i >= n {
        2 * n - 1 - i
    } else {
        i
    };
    values[j as usize]
}

/// Fourth-order central first and second derivatives of an even-extended
/// nodal function. Written in difference form so a constant input gives
/// exactly zero.
pub fn derivatives(values: &[f64], dphi: f64) -> (Vec<f64>, Vec<f64>) {
    let n = values.len() as isize;
    let mut d1 = Vec::with_capacity(values.len());
    let mut d2 = Vec::with_capacity(values.len());
    for j in 0..n {
        let c = values[j as usize];
        let m2 = reflected(values, j - 2);
        let m1 = reflected(values, j - 1);
        let p1 = reflected(values, j + 1);
        let p2 = reflected(values, j + 2);
        d1.push((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * dphi));
        d2.push((16.0 * ((p1 - c) + (m1 - c)) - ((p2 - c) + (m2 - c))) / (12.0 * dphi * dphi));
    }
    (d1, d2)
}

/// Values at `φ = 0` and `φ = π` of an even function, extrapolated from the
/// two nearest nodes with `f ≈ f(0) + c φ²`. Second order.
pub fn extrapolate_to_poles(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let at = |f0: f64, f1: f64| (9.0 * f0 - f1) / 8.0;
    (at(values[0], values[1]), at(values[n - 1], values[n - 2]))
}

/// Coefficients of the quartic through five consecutive reflected samples
/// centred at node `j`, in the local cell coordinate `x = (φ - φ_j)/Δφ`.
fn quartic(values: &[f64], j: usize) -> [f64; 5] {
    let j = j as isize;
    let f = [-2, -1, 0, 1, 2].map(|k| reflected(values, j + k));
    let [fm2, fm1, f0, fp1, fp2] = f;
    [
        f0,
        (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / 12.0,
        (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / 24.0,
        (-fm2 + 2.0 * fm1 - 2.0 * fp1 + fp2) / 12.0,
        (fm2 - 4.0 * fm1 + 6.0 * f0 - 4.0 * fp1 + fp2) / 24.0,
    ]
}

fn poly(c: &[f64; 5], x: f64) -> f64 {
    c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4])))
}

/// Location of a maximum, refined between nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Node holding the largest sample.
    pub index: usize,
    /// Offset of the refined maximum from that node, in cells, within `[-1, 1]`.
    pub offset: f64,
    pub value: f64,
}

/// Maximum of the quartic interpolant around the largest node sample.
pub fn refine_peak(values: &[f64]) -> Peak {
    let index = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let c = quartic(values, index);
    let d1 = |x: f64| c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * 4.0 * c[4]));
    let d2 = |x: f64| 2.0 * c[2] + x * (6.0 * c[3] + x * 12.0 * c[4]);
    let mut x = 0.0;
    for _ in 0..50 {
        let curv = d2(x);
        if curv >= 0.0 {
            x = 0.0;
            break;
        }
        let step = d1(x) / curv;
        x = (x - step).clamp(-1.0, 1.0);
        if step.abs() < 1e-15 {
            break;
        }
    }
    let refined = poly(&c, x);
    if refined >= values[index] {
        Peak { index, offset: x, value: refined }
    } else {
        Peak { index, offset: 0.0, value: values[index] }
    }
}

/// Quartic interpolation of `values` at `index + offset` (cell units).
pub fn interpolate(values: &[f64], index: usize, offset: f64) -> f64 {
    poly(&quartic(values, index), offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> (Vec<f64>, f64) {
        let dphi = PI / n as f64;
        ((0..n).map(|j| (j as f64 + 0.5) * dphi).collect(), dphi)
    }

    #[test]
    fn reflection_indices() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(reflected(&v, -1), 0.0);
        assert_eq!(reflected(&v, -2), 1.0);
        assert_eq!(reflected(&v, 4), 3.0);
        assert_eq!(reflected(&v, 5), 2.0);
    }

    #[test]
    fn constant_gives_exact_zero() {
        let v = vec![1.234_567_891_234; 32];
        let (d1, d2) = derivatives(&v, 0.1);
        assert!(d1.iter().chain(&d2).all(|x| *x == 0.0));
    }

    #[test]
    fn fourth_order_on_even_functions() {
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            let (phi, dphi) = grid(n);
            let u: Vec<f64> = phi.iter().map(|p| (2.0 * p).cos() + 0.3 * p.cos()).collect();
            let (d1, d2) = derivatives(&u, dphi);
            let e = phi
                .iter()
                .zip(d1.iter().zip(&d2))
                .map(|(p, (a, b))| {
                    let ea = (a + 2.0 * (2.0 * p).sin() + 0.3 * p.sin()).abs();
                    let eb = (b + 4.0 * (2.0 * p).cos() + 0.3 * p.cos()).abs();
                    ea.max(eb)
                })
                .fold(0.0, f64::max);
            errs.push(e);
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 3.8, "{errs:?}");
        }
    }

    #[test]
    fn peak_refinement_locates_off_grid_maximum() {
        let (phi, dphi) = grid(64);
        let target = 1.0;
        let f: Vec<f64> = phi.iter().map(|p| -(p - target).powi(2) + 0.1 * (p - target).powi(3)).collect();
        let peak = refine_peak(&f);
        let loc = phi[peak.index] + peak.offset * dphi;
        assert!((loc - target).abs() < 1e-12);
        assert!(peak.value.abs() < 1e-14);
        assert!((interpolate(&f, peak.index, peak.offset) - peak.value).abs() < 1e-15);
    }

    #[test]
    fn pole_extrapolation_second_order() {
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            let (phi, _) = grid(n);
            let f: Vec<f64> = phi.iter().map(|p| p.cos()).collect();
            let (a, b) = extrapolate_to_poles(&f);
            errs.push((a - 1.0).abs().max((b + 1.0).abs()));
        }
        assert!((errs[1] / errs[2]).log2() > 1.9, "{errs:?}");
    }
}

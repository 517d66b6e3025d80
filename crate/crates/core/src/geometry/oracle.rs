//! Principal curvatures from the hyperboloid model.
//!
//! This path shares nothing with [`build_jet`](super::build_jet) except the
//! nodal values of `u`. The surface is embedded in Minkowski space
//! `R^{1,3}` (signature `- + + +`) as
//!
//! ```text
//! X(φ, θ) = (cosh u, sinh u cos φ, sinh u sin φ cos θ, sinh u sin φ sin θ)
//! ```
//!
//! which is a totally geodesic `H³` through the polar axis; the parallel
//! curvature of an axisymmetric hypersurface does not depend on `n`.
//!
//! Off-node values of `u` come from the even cosine series through the nodal
//! samples (exact at the nodes, spectrally accurate for smooth graphs), so the
//! finite-difference step of the oracle is free. Tangent vectors, the unit
//! normal and the normal's derivatives are all second-order central
//! differences of the embedding with that step.

use crate::error::{Error, Result};

use super::GraphField;

type V4 = [f64; 4];

fn mink(a: &V4, b: &V4) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

fn sub(a: &V4, b: &V4) -> V4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

fn scale(a: &V4, s: f64) -> V4 {
    a.map(|x| x * s)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Vector Minkowski-orthogonal to `a`, `b`, `c` (the Lorentzian triple cross
/// product: cofactors of the 3×4 matrix, index raised with the metric).
fn cross3(a: &V4, b: &V4, c: &V4) -> V4 {
    let mut out = [0.0; 4];
    for (col, slot) in out.iter_mut().enumerate() {
        let keep: Vec<usize> = (0..4).filter(|&k| k != col).collect();
        let minor = [a, b, c].map(|r| [r[keep[0]], r[keep[1]], r[keep[2]]]);
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * det3(minor);
    }
    out[0] = -out[0];
    out
}

/// Principal curvatures of an axisymmetric graph in the hyperboloid model.
#[derive(Debug, Clone)]
pub struct HyperboloidOracle {
    /// Cosine-series coefficients, `u(φ) = Σ c_k cos kφ`.
    coeffs: Vec<f64>,
    phi0: f64,
    dphi: f64,
    nodes: usize,
    step: f64,
}

impl HyperboloidOracle {
    /// Oracle with the default step `Δφ^(5/4)`, which shrinks a little faster
    /// than the mesh spacing under refinement.
    pub fn new(field: &GraphField) -> Self {
        let step = field.mesh().dphi().powf(1.25);
        Self::with_step(field, step)
    }

    pub fn with_step(field: &GraphField, step: f64) -> Self {
        let mesh = field.mesh();
        let n = mesh.nodes();
        let u = field.values();
        let phis: Vec<f64> = mesh.phis().collect();
        // DCT-II of the staggered samples
        let mut coeffs: Vec<f64> = (0..n)
            .map(|k| {
                let s: f64 = phis.iter().zip(u).map(|(p, x)| x * (k as f64 * p).cos()).sum();
                2.0 * s / n as f64
            })
            .collect();
        coeffs[0] *= 0.5;
        Self { coeffs, phi0: mesh.phi(0), dphi: mesh.dphi(), nodes: n, step }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Interpolated graph function (Clenshaw recurrence in `cos φ`).
    pub fn u_at(&self, phi: f64) -> f64 {
        let x = phi.cos();
        let (mut b1, mut b2) = (0.0, 0.0);
        for c in self.coeffs[1..].iter().rev() {
            let b0 = c + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + x * b1 - b2
    }

    fn point(&self, phi: f64, theta: f64) -> V4 {
        let u = self.u_at(phi);
        let (sh, ch) = (u.sinh(), u.cosh());
        [ch, sh * phi.cos(), sh * phi.sin() * theta.cos(), sh * phi.sin() * theta.sin()]
    }

    fn tangents(&self, phi: f64, theta: f64) -> (V4, V4) {
        let h = self.step;
        let t_phi = scale(&sub(&self.point(phi + h, theta), &self.point(phi - h, theta)), 0.5 / h);
        let t_theta =
            scale(&sub(&self.point(phi, theta + h), &self.point(phi, theta - h)), 0.5 / h);
        (t_phi, t_theta)
    }

    /// Outward unit normal (positive component along `∂_r`).
    fn normal(&self, phi: f64, theta: f64, node: usize) -> Result<V4> {
        let x = self.point(phi, theta);
        let (tp, tt) = self.tangents(phi, theta);
        let gpp = mink(&tp, &tp);
        let gtt = mink(&tt, &tt);
        let gpt = mink(&tp, &tt);
        if !(gpp * gtt - gpt * gpt > 1e-14 * gpp * gtt) {
            return Err(Error::DegenerateFrame { node });
        }
        let nv = cross3(&x, &tp, &tt);
        let norm2 = mink(&nv, &nv);
        if !(norm2 > 0.0) {
            return Err(Error::DegenerateFrame { node });
        }
        let mut nv = scale(&nv, 1.0 / norm2.sqrt());
        // ∂_r at X = (cosh u, sinh u Ω) is (sinh u, cosh u Ω)
        let s = x[1].hypot(x[2]).hypot(x[3]);
        let radial = [s, x[1] * x[0] / s, x[2] * x[0] / s, x[3] * x[0] / s];
        if mink(&nv, &radial) < 0.0 {
            nv = scale(&nv, -1.0);
        }
        Ok(nv)
    }

    /// `(κ_merid, κ_par)` at mesh node `node`, which must lie at least two
    /// cells away from both poles.
    pub fn curvatures(&self, node: usize) -> Result<(f64, f64)> {
        if node < 2 || node + 2 >= self.nodes {
            return Err(Error::InvalidParameter(format!(
                "oracle node {node} is within two cells of a pole"
            )));
        }
        let phi = self.phi0 + node as f64 * self.dphi;
        let h = self.step;
        let (tp, tt) = self.tangents(phi, 0.0);
        let n_phi =
            scale(&sub(&self.normal(phi + h, 0.0, node)?, &self.normal(phi - h, 0.0, node)?), 0.5 / h);
        let n_theta =
            scale(&sub(&self.normal(phi, h, node)?, &self.normal(phi, -h, node)?), 0.5 / h);
        let k_merid = mink(&n_phi, &tp) / mink(&tp, &tp);
        let k_par = mink(&n_theta, &tt) / mink(&tt, &tt);
        Ok((k_merid, k_par))
    }
}

/// `(κ_merid, κ_par)` at `node`, computed in the hyperboloid model.
pub fn hyperboloid_oracle(field: &GraphField, node: usize) -> Result<(f64, f64)> {
    HyperboloidOracle::new(field).curvatures(node)
}

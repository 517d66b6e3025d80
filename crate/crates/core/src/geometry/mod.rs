//! Discrete geometry of axisymmetric graphs over a geodesic sphere in
//! `H^{n+1}`.
//!
//! In geodesic polar coordinates around a point `q` the ambient metric is
//! `dr² + sinh²(r) σ`, with `σ` the round metric of `Sⁿ`. A hypersurface is
//! the graph `r = u(φ)` of a function of the polar angle only, so it is
//! invariant under rotations fixing the polar axis. Its principal curvatures
//! are `κ_merid` (meridian direction) and `κ_par` (multiplicity `n - 1`).

mod oracle;
mod snapshot;
pub mod stencil;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use oracle::{hyperboloid_oracle, HyperboloidOracle};
pub use snapshot::{read_snapshot, write_snapshot};

/// Smallest supported node count.
pub const MIN_NODES: usize = 16;

/// Staggered, pole-free discretization of the polar angle:
/// `φ_j = (j + 1/2) π / N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiMesh {
    dim: usize,
    nodes: usize,
}

impl AxiMesh {
    /// Mesh with `nodes` points for a hypersurface of dimension `dim`.
    pub fn new(dim: usize, nodes: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("dimension n = {dim} must be >= 2")));
        }
        if nodes < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "mesh needs at least {MIN_NODES} nodes, got {nodes}"
            )));
        }
        Ok(Self { dim, nodes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dphi(&self) -> f64 {
        PI / self.nodes as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dphi()
    }

    pub fn phis(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(|j| self.phi(j))
    }
}

/// Radial graph function sampled on an [`AxiMesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphField {
    mesh: AxiMesh,
    u: Vec<f64>,
}

impl GraphField {
    pub fn new(mesh: AxiMesh, u: Vec<f64>) -> Result<Self> {
        if u.len() != mesh.nodes() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values for a mesh of {} nodes",
                u.len(),
                mesh.nodes()
            )));
        }
        if let Some((j, x)) = u.iter().enumerate().find(|(_, x)| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::Domain(format!("u = {x} at node {j}; radii must be positive")));
        }
        Ok(Self { mesh, u })
    }

    /// Graph of `f(φ)` sampled at the nodes.
    pub fn from_fn(mesh: AxiMesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        let u = mesh.phis().map(f).collect();
        Self::new(mesh, u)
    }

    /// Geodesic sphere of radius `r` around the center.
    pub fn sphere(mesh: AxiMesh, r: f64) -> Result<Self> {
        Self::new(mesh, vec![r; mesh.nodes()])
    }

    pub fn mesh(&self) -> &AxiMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn min(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Per-node geometric quantities of a [`GraphField`].
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceJet {
    pub mesh: AxiMesh,
    pub u: Vec<f64>,
    /// `∂_φ u`
    pub du: Vec<f64>,
    /// `∂²_φ u`
    pub d2u: Vec<f64>,
    /// `ϑ = sinh u`
    pub sinh: Vec<f64>,
    /// `ϑ' = cosh u`
    pub cosh: Vec<f64>,
    pub v: Vec<f64>,
    /// `v - 1`, evaluated without cancellation.
    pub v_minus_1: Vec<f64>,
    /// `g_φφ = u'² + ϑ² = ϑ² v²`
    pub g_merid: Vec<f64>,
    /// Metric coefficient on each parallel unit direction, `ϑ² sin²φ`.
    pub g_par: Vec<f64>,
    pub h_merid: Vec<f64>,
    pub h_par: Vec<f64>,
    pub kappa_merid: Vec<f64>,
    pub kappa_par: Vec<f64>,
    /// Slice mean curvature `H̄/n = coth u`.
    pub coth: Vec<f64>,
    /// `(H̄/n)' = 1 - coth² u`.
    pub coth_deriv: Vec<f64>,
    /// First node where a principal curvature is not positive, if any.
    pub convexity_lost: Option<usize>,
}

impl SurfaceJet {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn is_convex(&self) -> bool {
        self.convexity_lost.is_none()
    }

    /// Principal curvatures at node `j`, `(κ_merid, κ_par × (n-1))`.
    pub fn principal_curvatures(&self, j: usize) -> Vec<f64> {
        let mut k = vec![self.kappa_par[j]; self.dim()];
        k[0] = self.kappa_merid[j];
        k
    }

    /// Induced metric and its closed-form inverse at node `j` in the
    /// coordinates `(φ, θ)` of a meridian plane `θ`:
    /// `g^{ij} = ϑ⁻²σ^{ij} - ϑ⁻⁴ uⁱuʲ / v²`.
    pub fn metric_pair(&self, j: usize) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
        let phi = self.mesh.phi(j);
        let s2 = phi.sin().powi(2);
        let th2 = self.sinh[j].powi(2);
        let du = self.du[j];
        let v2 = self.v[j].powi(2);
        let g = [[du * du + th2, 0.0], [0.0, th2 * s2]];
        // σ = diag(1, sin²φ), u^i = σ^{ij} u_j = (u', 0)
        let ginv = [[1.0 / th2 - du * du / (th2 * th2 * v2), 0.0], [0.0, 1.0 / (th2 * s2)]];
        (g, ginv)
    }
}

/// Slice mean curvature `coth u` and its derivative `1 - coth² u`
/// (returned as `-1/sinh² u`, which is the same number without cancellation).
pub fn slice_mean_curvature(u: f64) -> Result<(f64, f64)> {
    if !(u > 0.0) {
        return Err(Error::Domain(format!("slice radius u = {u} must be positive")));
    }
    Ok((1.0 / u.tanh(), -1.0 / u.sinh().powi(2)))
}

/// Gradient function `v = sqrt(1 + u'²/sinh² u)` per node.
pub fn gradient_v(field: &GraphField) -> Vec<f64> {
    let (du, _) = stencil::derivatives(field.values(), field.mesh().dphi());
    field.values().iter().zip(&du).map(|(u, d)| (1.0 + (d / u.sinh()).powi(2)).sqrt()).collect()
}

/// Evaluates the full geometric jet of `field`.
///
/// With `w = u'/ϑ` and `v² = 1 + w²`:
///
/// ```text
/// κ_merid = (-u''/ϑ² + coth u (1 + 2 w²)) / v³
/// κ_par   = (coth u - cot φ · u'/ϑ²) / v
/// ```
///
/// Both reduce to `coth u` on geodesic spheres.
pub fn build_jet(field: &GraphField) -> SurfaceJet {
    let mesh = *field.mesh();
    let u = field.values().to_vec();
    let (du, d2u) = stencil::derivatives(&u, mesh.dphi());
    let n = u.len();
    let mut jet = SurfaceJet {
        mesh,
        sinh: Vec::with_capacity(n),
        cosh: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        v_minus_1: Vec::with_capacity(n),
        g_merid: Vec::with_capacity(n),
        g_par: Vec::with_capacity(n),
        h_merid: Vec::with_capacity(n),
        h_par: Vec::with_capacity(n),
        kappa_merid: Vec::with_capacity(n),
        kappa_par: Vec::with_capacity(n),
        coth: Vec::with_capacity(n),
        coth_deriv: Vec::with_capacity(n),
        convexity_lost: None,
        u,
        du,
        d2u,
    };
    for j in 0..n {
        let phi = mesh.phi(j);
        let (u, du) = (jet.u[j], jet.du[j]);
        let g = NodeGeometry::new(phi, u, du, jet.d2u[j]);
        let g_merid = du * du + g.sinh * g.sinh;
        let g_par = (g.sinh * phi.sin()).powi(2);

        jet.sinh.push(g.sinh);
        jet.cosh.push(u.cosh());
        jet.v.push(g.v);
        jet.v_minus_1.push(g.v_minus_1);
        jet.g_merid.push(g_merid);
        jet.g_par.push(g_par);
        jet.h_merid.push(g.kappa_merid * g_merid);
        jet.h_par.push(g.kappa_par * g_par);
        jet.kappa_merid.push(g.kappa_merid);
        jet.kappa_par.push(g.kappa_par);
        jet.coth.push(g.coth);
        jet.coth_deriv.push(-1.0 / (g.sinh * g.sinh));
        if jet.convexity_lost.is_none() && !(g.kappa_merid > 0.0 && g.kappa_par > 0.0) {
            jet.convexity_lost = Some(j);
        }
    }
    jet
}

/// Pointwise geometry from the 2-jet `(u, u', u'')` at polar angle `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGeometry {
    pub sinh: f64,
    pub coth: f64,
    pub v: f64,
    pub v_minus_1: f64,
    pub kappa_merid: f64,
    pub kappa_par: f64,
}

impl NodeGeometry {
    #[inline]
    pub fn new(phi: f64, u: f64, du: f64, d2u: f64) -> Self {
        let sinh = u.sinh();
        let th2 = sinh * sinh;
        let coth = 1.0 / u.tanh();
        let w = du / sinh;
        let w2 = w * w;
        let v = (1.0 + w2).sqrt();
        Self {
            sinh,
            coth,
            v,
            v_minus_1: w2 / (v + 1.0),
            kappa_merid: (-d2u / th2 + coth * (1.0 + 2.0 * w2)) / (v * v * v),
            kappa_par: (coth - du / (th2 * phi.tan())) / v,
        }
    }
}

/// Geodesic sphere of radius `radius` whose center sits at distance `offset`
/// from `q` along the polar axis (`φ = 0` side). Each node solves
/// `cosh R = cosh d cosh u - sinh d sinh u cos φ` for `u` by safeguarded
/// Newton iteration on the bracket `[R - d, R + d]`.
pub fn offcenter_sphere_graph(radius: f64, offset: f64, mesh: AxiMesh) -> Result<GraphField> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("sphere radius {radius} must be positive")));
    }
    if !(offset >= 0.0 && offset < radius) {
        return Err(Error::InvalidParameter(format!(
            "center offset d = {offset} must satisfy 0 <= d < R = {radius}"
        )));
    }
    if offset == 0.0 {
        return GraphField::sphere(mesh, radius);
    }
    let (ch_d, sh_d, ch_r) = (offset.cosh(), offset.sinh(), radius.cosh());
    let u = mesh
        .phis()
        .map(|phi| {
            let c = phi.cos();
            let g = |u: f64| ch_d * u.cosh() - sh_d * c * u.sinh() - ch_r;
            let dg = |u: f64| ch_d * u.sinh() - sh_d * c * u.cosh();
            safeguarded_newton(g, dg, radius - offset, radius + offset)
        })
        .collect();
    GraphField::new(mesh, u)
}

/// Root of an increasing-through-zero `g` on `[lo, hi]` with `g(lo) <= 0 <= g(hi)`.
fn safeguarded_newton(
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - gx / dg(x);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs() || hi - lo <= 2.0 * f64::EPSILON * hi {
            return next;
        }
        x = next;
    }
    x
}

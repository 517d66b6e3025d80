//! Time integration of the graph flow `∂_t u = v F^{-p}`.
//!
//! Method of lines: the spatial operator is the pointwise speed assembled
//! from the 4th-order jet, advanced by classical RK4 under an adaptive
//! parabolic step bound.

mod ode;
mod run;

pub use ode::{dopri5, spherical_solution, SphericalBarrier, ODE_TOLERANCE};
pub use run::{resume, run, FlowConfig, InitialData, RunOutput};

use crate::curvfun::CurvatureFunction;
use crate::error::{Error, Result};
use crate::geometry::{build_jet, stencil, AxiMesh, GraphField, NodeGeometry, SurfaceJet};

/// Discrete barriers may lag the PDE by this much before a violation is flagged.
pub const BARRIER_TOLERANCE: f64 = 1e-8;

/// Largest admissible relative growth of `v_max` over a single step.
pub const MAX_V_GROWTH: f64 = 1.1;

/// `Φ(r) = -r^{-p}` composed with a curvature function `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedFunction {
    p: f64,
    curvature: CurvatureFunction,
}

impl SpeedFunction {
    pub fn new(p: f64, curvature: CurvatureFunction) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponent p = {p} must be positive")));
        }
        Ok(Self { p, curvature })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn curvature(&self) -> &CurvatureFunction {
        &self.curvature
    }

    /// `Φ(r) = -r^{-p}`
    pub fn phi(&self, r: f64) -> f64 {
        -r.powf(-self.p)
    }

    /// `Φ'(r) = p r^{-p-1}`
    pub fn dphi(&self, r: f64) -> f64 {
        self.p * r.powf(-self.p - 1.0)
    }

    /// Radial speed of a geodesic sphere of radius `u`, `(n coth u)^{-p}`.
    pub fn sphere_speed(&self, u: f64) -> f64 {
        (self.curvature.n() as f64 / u.tanh()).powf(-self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Health {
    pub convex: bool,
    pub barrier_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub field: GraphField,
    pub jet: SurfaceJet,
    pub last_dt: f64,
    pub health: Health,
}

impl FlowState {
    pub fn new(field: GraphField, t: f64) -> Self {
        let jet = build_jet(&field);
        let convex = jet.is_convex();
        Self { t, field, jet, last_dt: 0.0, health: Health { convex, barrier_ok: true } }
    }

    pub fn mesh(&self) -> &AxiMesh {
        self.field.mesh()
    }

    pub fn v_max(&self) -> f64 {
        self.jet.v.iter().copied().fold(1.0, f64::max)
    }
}

/// Step-size control: `dt = safety Δφ² / max D`, capped at `max_dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub safety: f64,
    pub max_dt: f64,
}

impl StepControl {
    pub fn new(safety: f64, max_dt: f64) -> Result<Self> {
        if !(safety > 0.0 && safety.is_finite()) {
            return Err(Error::InvalidParameter(format!("CFL safety {safety} must be positive")));
        }
        if !(max_dt > 0.0) {
            return Err(Error::InvalidParameter(format!("step cap {max_dt} must be positive")));
        }
        Ok(Self { safety, max_dt })
    }
}

fn node_speed(
    speed: &SpeedFunction,
    g: &NodeGeometry,
    t: f64,
    node: usize,
) -> Result<f64> {
    if !(g.kappa_merid.is_finite() && g.kappa_par.is_finite()) {
        return Err(Error::Stability { t, reason: format!("non-finite curvature at node {node}") });
    }
    let kmin = g.kappa_merid.min(g.kappa_par);
    if kmin <= 0.0 {
        return Err(Error::ConvexityLost { t, node, kappa: kmin });
    }
    let f = speed.curvature().eval_axisymmetric(g.kappa_merid, g.kappa_par)?.f;
    Ok(g.v * f.powf(-speed.p()))
}

/// Semi-discrete right-hand side `v F^{-p}` for nodal values `u`.
fn rhs(u: &[f64], mesh: &AxiMesh, speed: &SpeedFunction, t: f64) -> Result<Vec<f64>> {
    let (du, d2u) = stencil::derivatives(u, mesh.dphi());
    (0..u.len())
        .map(|j| {
            if !(u[j] > 0.0 && u[j].is_finite()) {
                return Err(Error::Stability { t, reason: format!("u = {} at node {j}", u[j]) });
            }
            node_speed(speed, &NodeGeometry::new(mesh.phi(j), u[j], du[j], d2u[j]), t, j)
        })
        .collect()
}

/// Per-node radial speed `∂_t u = v F(κ)^{-p}` of `state`.
pub fn scalar_speed(state: &FlowState, speed: &SpeedFunction) -> Result<Vec<f64>> {
    let jet = &state.jet;
    (0..jet.len())
        .map(|j| {
            let g = NodeGeometry {
                sinh: jet.sinh[j],
                coth: jet.coth[j],
                v: jet.v[j],
                v_minus_1: jet.v_minus_1[j],
                kappa_merid: jet.kappa_merid[j],
                kappa_par: jet.kappa_par[j],
            };
            node_speed(speed, &g, state.t, j)
        })
        .collect()
}

/// Stable step for `state`: the parabolic bound with effective diffusivity
/// `D = Φ'(F) max(F^merid, F^par) g^φφ` per node.
pub fn adaptive_dt(state: &FlowState, speed: &SpeedFunction, control: &StepControl) -> Result<f64> {
    let jet = &state.jet;
    let mut d_max: f64 = 0.0;
    for j in 0..jet.len() {
        let val = speed
            .curvature()
            .eval_axisymmetric(jet.kappa_merid[j], jet.kappa_par[j])
            .map_err(|_| Error::ConvexityLost {
                t: state.t,
                node: j,
                kappa: jet.kappa_merid[j].min(jet.kappa_par[j]),
            })?;
        let d = speed.dphi(val.f) * val.d_merid.max(val.d_par) / jet.g_merid[j];
        d_max = d_max.max(d);
    }
    let dphi = state.mesh().dphi();
    let dt = (control.safety * dphi * dphi / d_max).min(control.max_dt);
    if !(dt > 1e-300 && dt.is_finite()) {
        return Err(Error::Stability { t: state.t, reason: format!("step bound degenerate ({dt:e})") });
    }
    Ok(dt)
}

/// One classical RK4 step of size `dt`.
pub fn step(state: &FlowState, speed: &SpeedFunction, dt: f64) -> Result<FlowState> {
    let mesh = *state.mesh();
    let t = state.t;
    let u = state.field.values();
    let axpy = |a: f64, k: &[f64]| -> Vec<f64> { u.iter().zip(k).map(|(x, y)| x + a * y).collect() };

    let k1 = rhs(u, &mesh, speed, t)?;
    let k2 = rhs(&axpy(0.5 * dt, &k1), &mesh, speed, t + 0.5 * dt)?;
    let k3 = rhs(&axpy(0.5 * dt, &k2), &mesh, speed, t + 0.5 * dt)?;
    let k4 = rhs(&axpy(dt, &k3), &mesh, speed, t + dt)?;
    let next: Vec<f64> = (0..u.len())
        .map(|j| u[j] + dt / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]))
        .collect();

    let t_next = t + dt;
    if let Some(j) = next.iter().position(|x| !x.is_finite()) {
        return Err(Error::Stability { t: t_next, reason: format!("non-finite u at node {j}") });
    }
    let field = GraphField::new(mesh, next)
        .map_err(|e| Error::Stability { t: t_next, reason: e.to_string() })?;
    let mut out = FlowState::new(field, t_next);
    out.last_dt = dt;
    out.health.barrier_ok = state.health.barrier_ok;
    if let Some(node) = out.jet.convexity_lost {
        let kappa = out.jet.kappa_merid[node].min(out.jet.kappa_par[node]);
        return Err(Error::ConvexityLost { t: t_next, node, kappa });
    }
    let (v_old, v_new) = (state.v_max(), out.v_max());
    if !(v_new <= MAX_V_GROWTH * v_old) {
        return Err(Error::Stability {
            t: t_next,
            reason: format!("v_max grew from {v_old} to {v_new} in one step"),
        });
    }
    Ok(out)
}

/// Inner and outer spherical solutions bracketing a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barriers {
    pub inner: SphericalBarrier,
    pub outer: SphericalBarrier,
}

impl Barriers {
    /// Spheres through `min u` and `max u` of `state`.
    pub fn enclosing(state: &FlowState) -> Self {
        Self {
            inner: SphericalBarrier::new(state.t, state.field.min()),
            outer: SphericalBarrier::new(state.t, state.field.max()),
        }
    }

    pub fn advance_to(&mut self, t: f64, speed: &SpeedFunction) {
        self.inner.advance_to(t, speed);
        self.outer.advance_to(t, speed);
    }
}

/// True iff `inner ≤ u ≤ outer` at every node, up to [`BARRIER_TOLERANCE`].
pub fn barrier_check(state: &FlowState, barriers: &Barriers) -> bool {
    state.field.values().iter().all(|&u| {
        u >= barriers.inner.u - BARRIER_TOLERANCE && u <= barriers.outer.u + BARRIER_TOLERANCE
    })
}

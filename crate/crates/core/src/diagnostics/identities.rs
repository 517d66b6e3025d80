//! Discrete checks of two pointwise identities satisfied by the flow: the
//! first-order condition at a maximum of `v`, and the evolution equation of
//! `v`.

use crate::error::{Error, Result};
use crate::flow::{FlowState, SpeedFunction};
use crate::geometry::stencil;

/// `v_max - 1` at or below this makes the max-point identity vacuous.
pub const VACUOUS_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPointResidual {
    /// `|κ_merid - coth u / v|` at the refined maximum of `v`.
    pub residual: f64,
    pub node: usize,
    pub offset: f64,
    pub v_max: f64,
}

/// At a maximum of `v` the gradient direction is the meridian and
/// `κ_merid = v⁻¹ coth u` holds. All three quantities are interpolated to the
/// refined location of the maximum.
pub fn max_point_identity(state: &FlowState) -> Result<MaxPointResidual> {
    let jet = &state.jet;
    let peak = stencil::refine_peak(&jet.v_minus_1);
    if peak.value <= VACUOUS_THRESHOLD {
        return Err(Error::Vacuous(format!("v_max - 1 = {:e}, no gradient to test", peak.value)));
    }
    if peak.index < 2 || peak.index + 2 >= jet.len() {
        return Err(Error::Domain(format!("maximum of v at node {} is next to a pole", peak.index)));
    }
    let at = |f: &[f64]| stencil::interpolate(f, peak.index, peak.offset);
    let v = 1.0 + peak.value;
    let u = at(&jet.u);
    let kappa = at(&jet.kappa_merid);
    Ok(MaxPointResidual {
        residual: (kappa - 1.0 / (u.tanh() * v)).abs(),
        node: peak.index,
        offset: peak.offset,
        v_max: v,
    })
}

/// Labels of the right-hand-side terms of the `v` evolution equation, in
/// the order they are stored in [`Grad1Report::terms`].
pub const GRAD1_TERMS: [&str; 7] = [
    "-Phi' F^ij h_ik h^k_j v",
    "-2 v^-1 Phi' F^ij v_i v_j",
    "2 Phi' F^ij v_i u_j Hbar/n",
    "-Phi' F^ij g_ij (Hbar/n)^2 v",
    "-Phi' F^ij u_i u_j (Hbar'/n) v",
    "Hbar/n (Phi - Phi' F) |Du|^2",
    "2 Phi' F Hbar/n v^2",
];

/// Per-node pieces of
///
/// ```text
/// v̇ - Φ'F^{ij} v_{;ij} = Σ_k T_k
/// ```
///
/// `v̇` is the time derivative along the normal trajectories, obtained from a
/// central difference at fixed `φ` plus the tangential drift of the
/// trajectory, `φ̇ = -F^{-p} u' / (v ϑ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grad1Report {
    pub lhs: Vec<f64>,
    pub terms: [Vec<f64>; 7],
}

impl Grad1Report {
    /// `lhs - Σ_k T_k` over the terms with `keep[k]` set.
    pub fn defect_with(&self, keep: [bool; 7]) -> Vec<f64> {
        (0..self.lhs.len())
            .map(|j| {
                let rhs: f64 = (0..7).filter(|&k| keep[k]).map(|k| self.terms[k][j]).sum();
                self.lhs[j] - rhs
            })
            .collect()
    }

    pub fn defect(&self) -> Vec<f64> {
        self.defect_with([true; 7])
    }

    /// Largest `|defect|` over nodes at least `margin` cells from a pole.
    pub fn max_defect(&self, keep: [bool; 7], margin: usize) -> f64 {
        let d = self.defect_with(keep);
        let n = d.len();
        d[margin.min(n)..n.saturating_sub(margin)].iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Ablation mask dropping term `k`.
    pub fn without(k: usize) -> [bool; 7] {
        let mut m = [true; 7];
        m[k] = false;
        m
    }
}

pub fn grad1_residual(
    prev: &FlowState,
    state: &FlowState,
    next: &FlowState,
    speed: &SpeedFunction,
) -> Result<Grad1Report> {
    let mesh = *state.mesh();
    if prev.mesh() != &mesh || next.mesh() != &mesh {
        return Err(Error::InvalidParameter("checkpoints live on different meshes".into()));
    }
    let (dt_a, dt_b) = (state.t - prev.t, next.t - state.t);
    if !(dt_a > 0.0 && dt_b > 0.0) || (dt_a - dt_b).abs() > 1e-8 * dt_a.max(dt_b) {
        return Err(Error::InvalidParameter(format!(
            "checkpoints must be equally spaced in time (steps {dt_a:e}, {dt_b:e})"
        )));
    }
    for s in [prev, state, next] {
        if let Some(node) = s.jet.convexity_lost {
            let kappa = s.jet.kappa_merid[node].min(s.jet.kappa_par[node]);
            return Err(Error::ConvexityLost { t: s.t, node, kappa });
        }
    }
    let jet = &state.jet;
    let m = (jet.dim() - 1) as f64;
    let (dv, d2v) = stencil::derivatives(&jet.v_minus_1, mesh.dphi());
    let n = jet.len();
    let mut lhs = Vec::with_capacity(n);
    let mut terms: [Vec<f64>; 7] = Default::default();
    for j in 0..n {
        let phi = mesh.phi(j);
        let (du, d2u) = (jet.du[j], jet.d2u[j]);
        let (sh, ch, coth) = (jet.sinh[j], jet.cosh[j], jet.coth[j]);
        let (km, kp, v, g) = (jet.kappa_merid[j], jet.kappa_par[j], jet.v[j], jet.g_merid[j]);
        let val = speed.curvature().eval_axisymmetric(km, kp)?;
        let (f, fm, fp) = (val.f, val.d_merid, val.d_par);
        let dphi_f = speed.dphi(f);
        let speed_n = f.powf(-speed.p());

        // covariant Hessian of v in the orthonormal principal frame
        let dg = 2.0 * du * d2u + 2.0 * sh * ch * du;
        let hess_merid = (d2v[j] - dg / (2.0 * g) * dv[j]) / g;
        let hess_par = (coth * du + 1.0 / phi.tan()) * dv[j] / g;
        let elliptic = dphi_f * (fm * hess_merid + m * fp * hess_par);

        let dv_dt = (next.jet.v_minus_1[j] - prev.jet.v_minus_1[j]) / (dt_a + dt_b);
        let drift = -speed_n * du / (v * sh * sh);
        lhs.push(dv_dt + drift * dv[j] - elliptic);

        let v1 = dv[j] / g.sqrt();
        let u1 = du / g.sqrt();
        let du2 = jet.v_minus_1[j] * (v + 1.0);
        terms[0].push(-dphi_f * (fm * km * km + m * fp * kp * kp) * v);
        terms[1].push(-2.0 / v * dphi_f * fm * v1 * v1);
        terms[2].push(2.0 * dphi_f * fm * v1 * u1 * coth);
        terms[3].push(-dphi_f * (fm + m * fp) * coth * coth * v);
        terms[4].push(-dphi_f * fm * u1 * u1 * jet.coth_deriv[j] * v);
        terms[5].push(coth * (speed.phi(f) - dphi_f * f) * du2);
        terms[6].push(2.0 * dphi_f * f * coth * v * v);
    }
    Ok(Grad1Report { lhs, terms })
}

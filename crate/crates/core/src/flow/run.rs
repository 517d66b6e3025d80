use crate::curvfun::CurvatureFunction;
use crate::diagnostics::DiagnosticsSeries;
use crate::error::{Error, Result};
use crate::geometry::{offcenter_sphere_graph, AxiMesh, GraphField};

use super::{adaptive_dt, barrier_check, step, Barriers, FlowState, SpeedFunction, StepControl};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// Geodesic sphere of radius `radius` centered `offset` away from the origin.
    OffCenter { radius: f64, offset: f64 },
    /// `u = radius + amplitude cos(mode φ)`.
    Perturbed { radius: f64, amplitude: f64, mode: u32 },
}

impl InitialData {
    pub fn field(&self, mesh: AxiMesh) -> Result<GraphField> {
        match *self {
            InitialData::OffCenter { radius, offset } => offcenter_sphere_graph(radius, offset, mesh),
            InitialData::Perturbed { radius, amplitude, mode } => {
                if !(radius > 0.0 && amplitude.abs() < radius) {
                    return Err(Error::InvalidParameter(format!(
                        "perturbation needs 0 <= |amplitude| < radius, got ({radius}, {amplitude})"
                    )));
                }
                GraphField::from_fn(mesh, |p| radius + amplitude * (mode as f64 * p).cos())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub curvature: CurvatureFunction,
    pub p: f64,
    pub nodes: usize,
    pub initial: InitialData,
    pub t_end: f64,
    /// Safety factor of the parabolic step bound.
    pub cfl: f64,
    /// Output cadence.
    pub dt_out: f64,
    /// Rate-fit window; `None` means `[t_end/2, t_end]`.
    pub fit_window: Option<[f64; 2]>,
}

impl FlowConfig {
    /// Config with `t_end = 10 nᵖ`, `cfl = 0.25` and unit output cadence.
    pub fn new(curvature: CurvatureFunction, p: f64, nodes: usize, initial: InitialData) -> Self {
        Self {
            curvature,
            p,
            nodes,
            initial,
            t_end: 10.0 * (curvature.n() as f64).powf(p),
            cfl: 0.25,
            dt_out: 1.0,
            fit_window: None,
        }
    }

    pub fn speed(&self) -> Result<SpeedFunction> {
        SpeedFunction::new(self.p, self.curvature)
    }

    pub fn mesh(&self) -> Result<AxiMesh> {
        AxiMesh::new(self.curvature.n(), self.nodes)
    }

    pub fn control(&self) -> Result<StepControl> {
        StepControl::new(self.cfl, 0.1 * self.dt_out)
    }

    pub fn window(&self) -> [f64; 2] {
        self.fit_window.unwrap_or([0.5 * self.t_end, self.t_end])
    }

    pub fn validate(&self) -> Result<()> {
        self.speed()?;
        self.mesh()?;
        self.control()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("T_end = {} must be positive", self.t_end)));
        }
        if !(self.dt_out > 0.0 && self.dt_out.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt_out = {} must be positive", self.dt_out)));
        }
        let [a, b] = self.window();
        if !(a < b) {
            return Err(Error::InvalidParameter(format!("fit window [{a}, {b}] is empty")));
        }
        Ok(())
    }

    /// Initial state, rejected if it is not strictly convex.
    pub fn initial_state(&self) -> Result<FlowState> {
        let state = FlowState::new(self.initial.field(self.mesh()?)?, 0.0);
        if let Some(node) = state.jet.convexity_lost {
            let kappa = state.jet.kappa_merid[node].min(state.jet.kappa_par[node]);
            return Err(Error::ConvexityLost { t: 0.0, node, kappa });
        }
        Ok(state)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: DiagnosticsSeries,
    pub final_state: FlowState,
    pub barriers: Barriers,
    /// Reason the run stopped before `t_end`, if it did.
    pub abort: Option<Error>,
}

impl RunOutput {
    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }

    pub fn healthy(&self) -> bool {
        self.completed() && self.final_state.health.convex && self.final_state.health.barrier_ok
    }
}

/// Integrates `config` from its initial data to `t_end`.
pub fn run(config: &FlowConfig) -> Result<RunOutput> {
    config.validate()?;
    resume(config.initial_state()?, config, |_| {})
}

/// Continues `state` to `config.t_end`, recording diagnostics at the
/// multiples of `dt_out` and at `t_end`. `on_output` sees every recorded
/// state, including the starting one.
///
/// The step sequence depends only on the state at each output time, so a
/// run restarted from an output snapshot reproduces the uninterrupted run.
pub fn resume(
    mut state: FlowState,
    config: &FlowConfig,
    mut on_output: impl FnMut(&FlowState),
) -> Result<RunOutput> {
    config.validate()?;
    let speed = config.speed()?;
    let control = config.control()?;
    if state.mesh() != &config.mesh()? {
        return Err(Error::InvalidParameter(format!(
            "state mesh (n = {}, N = {}) does not match the config",
            state.mesh().dim(),
            state.mesh().nodes()
        )));
    }
    let mut series = DiagnosticsSeries::new(speed);
    let mut barriers = Barriers::enclosing(&state);
    let mut abort = None;

    let first_dt = adaptive_dt(&state, &speed, &control);
    series.push(&state, *first_dt.as_ref().unwrap_or(&f64::NAN));
    on_output(&state);
    if let Err(e) = first_dt {
        return Ok(RunOutput { series, final_state: state, barriers, abort: Some(e) });
    }

    let ratio = state.t / config.dt_out;
    let mut k = if (ratio.round() * config.dt_out - state.t).abs() <= 1e-12 * state.t.max(1.0) {
        ratio.round() as u64 + 1
    } else {
        ratio.floor() as u64 + 1
    };
    'outer: while state.t < config.t_end {
        let target = (k as f64 * config.dt_out).min(config.t_end);
        k += 1;
        let mut dt = 0.0;
        while state.t < target {
            let bound = match adaptive_dt(&state, &speed, &control) {
                Ok(b) => b,
                Err(e) => {
                    abort = Some(e);
                    break 'outer;
                }
            };
            let remaining = target - state.t;
            let land = bound >= remaining;
            let h = if land { remaining } else { bound };
            match step(&state, &speed, h) {
                Ok(mut next) => {
                    if land {
                        next.t = target;
                    }
                    state = next;
                }
                Err(e) => {
                    state.health.convex = !matches!(e, Error::ConvexityLost { .. });
                    abort = Some(e);
                    break 'outer;
                }
            }
            dt = bound;
        }
        barriers.advance_to(state.t, &speed);
        if !barrier_check(&state, &barriers) {
            state.health.barrier_ok = false;
        }
        let rec_dt = adaptive_dt(&state, &speed, &control).unwrap_or(dt);
        series.push(&state, rec_dt);
        on_output(&state);
    }
    Ok(RunOutput { series, final_state: state, barriers, abort })
}

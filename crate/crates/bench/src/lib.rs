//! Shared fixtures for the kernel benchmarks.

use hyperflow_core::flow::FlowState;
use hyperflow_core::geometry::offcenter_sphere_graph;
use hyperflow_core::{AxiMesh, CurvatureFunction, GraphField, SpeedFunction};

/// Off-center sphere of radius 1.2 shifted by 0.5 on `nodes` nodes.
pub fn offcenter_field(dim: usize, nodes: usize) -> GraphField {
    offcenter_sphere_graph(1.2, 0.5, AxiMesh::new(dim, nodes).unwrap()).unwrap()
}

pub fn gauss_speed(dim: usize, p: f64) -> SpeedFunction {
    SpeedFunction::new(p, CurvatureFunction::gauss(dim).unwrap()).unwrap()
}

pub fn offcenter_state(dim: usize, nodes: usize) -> FlowState {
    FlowState::new(offcenter_field(dim, nodes), 0.0)
}

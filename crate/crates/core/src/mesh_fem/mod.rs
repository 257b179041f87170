//! Structured unit-square mesh, P1 finite elements and linear solves.
//!
//! States live in the nodal P1 space, controls are piecewise constant on the
//! triangles. The operator of each PDE is factored once and reused for every
//! state and adjoint solve.

mod assembly;
pub mod linsolve;
mod mesh;
pub mod sparse;
mod switching;

pub use assembly::{AssembledPde, PdeKind};
pub use mesh::{build_mesh, Mesh};
pub use switching::{switching_loads, switching_restrict, SwitchingLayout};

/// Piecewise-constant control values, one per degree of freedom.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlField {
    pub values: Vec<f64>,
}

impl ControlField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![0.0; len] }
    }

    pub fn constant(len: usize, c: f64) -> Self {
        Self { values: vec![c; len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Nodal values of a P1 function.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateField {
    pub values: Vec<f64>,
}

impl StateField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

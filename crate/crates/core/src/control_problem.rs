//! Smooth part `f`, nonsmooth part `g`, gradient and support functionals of a
//! discretized control problem.
//!
//! Controls are vectors of degrees of freedom with a measure weight each:
//! `|T|` per triangle for distributed controls, `1/n` per interval for the two
//! one-dimensional switching controls (stored as `[u₁…, u₂…]`). All `L²`, `L¹`
//! and support quantities on controls are weighted sums over these dofs, and
//! gradients are Riesz representatives with respect to the same weights.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::mesh_fem::{
    switching_loads, switching_restrict, AssembledPde, ControlField, Mesh, PdeKind, StateField,
    SwitchingLayout,
};
use crate::scalar_prox::ProxParams;

/// Control cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyKind {
    /// `(α/2)‖u‖² + β‖u‖₀` with `|u| ≤ b`.
    L0,
    /// `(α/2)‖u‖² + γ‖u‖_{L¹}` with `|u| ≤ b`; `beta` holds `γ`.
    L1,
    /// `(α/2)(‖u₁‖² + ‖u₂‖²) + β‖u₁u₂‖₀`, unconstrained.
    Switching,
}

/// How the tracking term `½‖y − y_d‖²` is evaluated on the P1 space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MisfitQuadrature {
    /// `½ rᵀWr` with `r = y − I_h y_d` and `W = ½(DM + MD)`, where `D` keeps only
    /// the free (interior) nodes of a Dirichlet problem. Boundary values of the
    /// target enter through one factor only. Identical to `Consistent` for
    /// Neumann problems.
    #[default]
    InteriorRows,
    /// `½ rᵀMr`: the exact `L²` norm of the interpolated misfit.
    Consistent,
}

/// Desired state `y_d`.
#[derive(Clone)]
pub enum Target {
    /// `10 x₁ sin(5x₁) cos(7x₂)`.
    Oscillatory,
    /// `x₁ sin(2πx₁) sin(2πx₂)`.
    SwitchingWave,
    Zero,
    Constant(f64),
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Target {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::Oscillatory => 10.0 * x * (5.0 * x).sin() * (7.0 * y).cos(),
            Self::SwitchingWave => x * (2.0 * PI * x).sin() * (2.0 * PI * y).sin(),
            Self::Zero => 0.0,
            Self::Constant(c) => *c,
            Self::Custom(f) => f(x, y),
        }
    }
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Oscillatory => write!(f, "Oscillatory"),
            Self::SwitchingWave => write!(f, "SwitchingWave"),
            Self::Zero => write!(f, "Zero"),
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Parameters of a control problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub alpha: f64,
    /// Support weight `β`, or `γ` in `L1` mode.
    pub beta: f64,
    /// Box bound `b`; `f64::INFINITY` for none.
    pub bound: f64,
    pub penalty: PenaltyKind,
    pub pde: PdeKind,
    pub target: Target,
    pub mesh_n: usize,
    pub misfit: MisfitQuadrature,
}

impl ProblemSpec {
    /// The distributed benchmark: oscillatory target, `α = β = 0.01`, `b = 4`,
    /// homogeneous Dirichlet Poisson equation.
    pub fn benchmark(mesh_n: usize) -> Self {
        Self {
            alpha: 0.01,
            beta: 0.01,
            bound: 4.0,
            penalty: PenaltyKind::L0,
            pde: PdeKind::DirichletPoisson,
            target: Target::Oscillatory,
            mesh_n,
            misfit: MisfitQuadrature::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return invalid(format!("alpha must be finite and >= 0, got {}", self.alpha));
        }
        let beta_ok = match self.penalty {
            PenaltyKind::L1 => self.beta >= 0.0,
            _ => self.beta > 0.0,
        };
        if !(self.beta.is_finite() && beta_ok) {
            return invalid(format!("beta/gamma out of range: {}", self.beta));
        }
        if !(self.bound > 0.0) {
            return invalid(format!("bound must be in (0, inf], got {}", self.bound));
        }
        if self.mesh_n == 0 {
            return invalid("mesh_n must be positive");
        }
        if self.penalty == PenaltyKind::Switching {
            if self.pde != PdeKind::DirichletPoisson {
                return invalid("the switching problem uses the Dirichlet Poisson equation");
            }
            if self.mesh_n % 4 != 0 {
                return invalid(format!("switching needs mesh_n divisible by 4, got {}", self.mesh_n));
            }
            if self.bound.is_finite() {
                return invalid("the switching problem has no box constraint; use bound = inf");
            }
        }
        Ok(())
    }

    /// Scalar prox parameters for prox weight `l`.
    pub fn prox_params(&self, l: f64) -> ProxParams {
        ProxParams { l, alpha: self.alpha, beta: self.beta, bound: self.bound }
    }
}

/// A discretized problem instance: assembled PDE, interpolated target and a
/// counter of PDE solves.
#[derive(Debug)]
pub struct ControlProblem {
    spec: ProblemSpec,
    pde: AssembledPde,
    target: StateField,
    weights: Vec<f64>,
    free_mask: Vec<bool>,
    switching: Option<SwitchingLayout>,
    solves: AtomicUsize,
}

impl ControlProblem {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let mesh = Arc::new(Mesh::build(spec.mesh_n)?);
        let pde = AssembledPde::assemble(Arc::clone(&mesh), spec.pde)?;
        let target = pde.interpolate(|x, y| spec.target.eval(x, y));
        let (weights, switching) = if spec.penalty == PenaltyKind::Switching {
            let layout = SwitchingLayout::new(&mesh)?;
            (vec![1.0 / mesh.n() as f64; 2 * mesh.n()], Some(layout))
        } else {
            (vec![mesh.triangle_area(); mesh.num_triangles()], None)
        };
        let mut free_mask = vec![false; mesh.num_nodes()];
        for &v in pde.free_nodes() {
            free_mask[v] = true;
        }
        Ok(Self {
            spec,
            pde,
            target,
            weights,
            free_mask,
            switching,
            solves: AtomicUsize::new(0),
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn pde(&self) -> &AssembledPde {
        &self.pde
    }

    pub fn mesh(&self) -> &Mesh {
        self.pde.mesh()
    }

    /// Interpolated desired state `I_h y_d`.
    pub fn target(&self) -> &StateField {
        &self.target
    }

    /// Measure weight of every control dof.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_dofs(&self) -> usize {
        self.weights.len()
    }

    pub fn zero_control(&self) -> ControlField {
        ControlField::zeros(self.num_dofs())
    }

    /// Number of state and adjoint solves performed so far.
    pub fn pde_solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn reset_pde_solves(&self) {
        self.solves.store(0, Ordering::Relaxed);
    }

    fn check(&self, u: &ControlField) -> Result<()> {
        if u.len() != self.num_dofs() {
            return invalid(format!(
                "control has {} values, problem has {} dofs",
                u.len(),
                self.num_dofs()
            ));
        }
        Ok(())
    }

    /// State `y_u`; one PDE solve.
    pub fn state(&self, u: &ControlField) -> Result<StateField> {
        self.check(u)?;
        let y = match self.switching {
            Some(_) => {
                let n = self.mesh().n();
                let rhs = switching_loads(self.mesh(), &u.values[..n], &u.values[n..])?;
                self.pde.solve_nodal(&rhs)?
            }
            None => self.pde.solve_state(u)?,
        };
        self.solves.fetch_add(1, Ordering::Relaxed);
        Ok(y)
    }

    /// `W r` for the misfit weighting selected in the spec.
    fn weighted_residual(&self, r: &[f64]) -> Vec<f64> {
        let mr = self.pde.mass().matvec(r);
        let interior_rows = self.spec.misfit == MisfitQuadrature::InteriorRows
            && self.spec.pde == PdeKind::DirichletPoisson;
        if !interior_rows {
            return mr;
        }
        let dr: Vec<f64> =
            r.iter().zip(&self.free_mask).map(|(&v, &free)| if free { v } else { 0.0 }).collect();
        let mdr = self.pde.mass().matvec(&dr);
        mr.iter()
            .zip(&mdr)
            .zip(&self.free_mask)
            .map(|((&a, &b), &free)| 0.5 * (if free { a } else { 0.0 } + b))
            .collect()
    }

    /// Tracking value and `W(y − I_h y_d)` for a given state.
    fn misfit(&self, y: &StateField) -> (f64, Vec<f64>) {
        let r: Vec<f64> = y.values.iter().zip(&self.target.values).map(|(a, b)| a - b).collect();
        let wr = self.weighted_residual(&r);
        let f = 0.5 * r.iter().zip(&wr).map(|(a, b)| a * b).sum::<f64>();
        (f, wr)
    }

    /// `f(u)` and the state; one PDE solve.
    pub fn eval_f(&self, u: &ControlField) -> Result<(f64, StateField)> {
        let y = self.state(u)?;
        let (f, _) = self.misfit(&y);
        Ok((f, y))
    }

    /// `f(u)` and `∇f(u)`; a state and an adjoint solve.
    pub fn value_and_grad(&self, u: &ControlField) -> Result<(f64, ControlField)> {
        let y = self.state(u)?;
        let (f, wr) = self.misfit(&y);
        let p = self.pde.solve_nodal(&wr)?;
        self.solves.fetch_add(1, Ordering::Relaxed);
        let grad = match self.switching {
            Some(_) => {
                let n = self.mesh().n();
                let (g1, g2) = switching_restrict(self.mesh(), &p)?;
                let scale = n as f64;
                ControlField::new(g1.into_iter().chain(g2).map(|v| v * scale).collect())
            }
            None => self.pde.element_means(&p),
        };
        Ok((f, grad))
    }

    pub fn grad_f(&self, u: &ControlField) -> Result<ControlField> {
        Ok(self.value_and_grad(u)?.1)
    }

    /// Weighted inner product of two controls.
    pub fn inner(&self, u: &ControlField, v: &ControlField) -> f64 {
        self.weights
            .iter()
            .zip(u.values.iter().zip(&v.values))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    pub fn norm_sq(&self, u: &ControlField) -> f64 {
        self.inner(u, u)
    }

    /// `‖u − v‖²`.
    pub fn dist_sq(&self, u: &ControlField, v: &ControlField) -> f64 {
        self.weights
            .iter()
            .zip(u.values.iter().zip(&v.values))
            .map(|(w, (a, b))| w * (a - b) * (a - b))
            .sum()
    }

    /// Measure of `{u ≠ 0}` (both controls together in switching mode).
    pub fn support_measure(&self, u: &ControlField) -> f64 {
        // fold from +0.0: an empty f64 sum is -0.0
        self.weights.iter().zip(&u.values).filter(|(_, &v)| v != 0.0).fold(0.0, |acc, (w, _)| acc + w)
    }

    /// `‖u₁u₂‖₀`: measure of the intervals where both switching controls act.
    pub fn overlap_measure(&self, u: &ControlField) -> f64 {
        let n = self.mesh().n();
        if self.switching.is_none() || u.len() != 2 * n {
            return 0.0;
        }
        let count = (0..n).filter(|&i| u.values[i] != 0.0 && u.values[n + i] != 0.0).count();
        count as f64 / n as f64
    }

    /// The sparsity quantity penalized by `g`: the overlap measure in
    /// switching mode, the support measure otherwise.
    pub fn sparsity(&self, u: &ControlField) -> f64 {
        match self.spec.penalty {
            PenaltyKind::Switching => self.overlap_measure(u),
            _ => self.support_measure(u),
        }
    }

    pub fn eval_g(&self, u: &ControlField) -> f64 {
        let tikhonov = 0.5 * self.spec.alpha * self.norm_sq(u);
        let beta = self.spec.beta;
        match self.spec.penalty {
            PenaltyKind::L0 => tikhonov + beta * self.support_measure(u),
            PenaltyKind::L1 => {
                let l1: f64 = self.weights.iter().zip(&u.values).map(|(w, v)| w * v.abs()).sum();
                tikhonov + beta * l1
            }
            PenaltyKind::Switching => tikhonov + beta * self.overlap_measure(u),
        }
    }

    /// Support indicator `χ(u)`.
    pub fn chi(&self, u: &ControlField) -> ControlField {
        ControlField::new(u.values.iter().map(|&v| if v != 0.0 { 1.0 } else { 0.0 }).collect())
    }

    /// `‖χ₁ − χ₂‖_{L¹}`.
    pub fn chi_distance(&self, chi1: &ControlField, chi2: &ControlField) -> f64 {
        self.weights
            .iter()
            .zip(chi1.values.iter().zip(&chi2.values))
            .filter(|(_, (a, b))| a != b)
            .fold(0.0, |acc, (w, _)| acc + w)
    }

    /// Whether every value of `u` is one of `−b, 0, b` (to `1e-8`).
    pub fn l1_equivalence_check(&self, u: &ControlField) -> bool {
        let b = self.spec.bound;
        u.values.iter().all(|&v| v.abs() <= 1e-8 || (b.is_finite() && (v.abs() - b).abs() <= 1e-8))
    }
}

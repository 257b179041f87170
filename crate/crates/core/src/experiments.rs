//! Drivers for the numerical studies: line-search comparison, `β`-sweeps,
//! mesh refinement, the `L⁰`/`L¹` Pareto comparison, the unsolvable Neumann
//! example and the switching problem.
//!
//! Sweeps run their configurations in parallel; results are returned in input
//! order.

use rayon::prelude::*;

use crate::control_problem::{ControlProblem, PenaltyKind, ProblemSpec, Target};
use crate::error::Result;
use crate::iht_solver::{fp_residual, run, SolveReport, SolverOptions, StepStrategy, StrategyKind};
use crate::mesh_fem::{ControlField, PdeKind};

/// Initial prox weights of the backtracking rows of the strategy comparison.
pub const BT_INITIAL_WEIGHTS: [f64; 8] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0];
/// `β` values of the unconstrained sweep.
pub const UNBOUNDED_BETAS: [f64; 6] = [0.5, 0.1, 0.05, 0.01, 0.005, 0.001];
/// Mesh sizes of the default refinement study.
pub const MESH_STUDY_N: [usize; 3] = [10, 20, 40];
/// `β` values of the switching study.
pub const SWITCHING_BETAS: [f64; 3] = [0.1, 0.01, 0.001];
pub const SWITCHING_ALPHA: f64 = 1e-5;

/// `β = 0.5·0.7^l`, `l = 0..15`.
pub fn pareto_betas() -> Vec<f64> {
    (0..16).map(|l| 0.5 * 0.7_f64.powi(l)).collect()
}

/// Default line search: zero-first with `L̂⁰ = 0.01`.
pub fn default_strategy() -> StepStrategy {
    StepStrategy::line_search(StrategyKind::Bt0, 0.01)
}

/// Builds the problem and runs the solver.
pub fn solve(spec: ProblemSpec, options: &SolverOptions) -> Result<(ControlProblem, SolveReport)> {
    let problem = ControlProblem::new(spec)?;
    let report = run(&problem, options)?;
    Ok((problem, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRow {
    pub strategy: StrategyKind,
    pub l_hat0: f64,
    pub objective: f64,
    pub sparsity: f64,
    pub pde_solves: usize,
    pub iterations: usize,
    pub report: SolveReport,
}

/// The ten line-search configurations: BT for each of [`BT_INITIAL_WEIGHTS`], then
/// BT-W and BT-0 with `L̂⁰ = 0.01`.
pub fn strategy_configurations() -> Vec<StepStrategy> {
    BT_INITIAL_WEIGHTS
        .iter()
        .map(|&l| StepStrategy::line_search(StrategyKind::Bt, l))
        .chain([
            StepStrategy::line_search(StrategyKind::BtW, 0.01),
            StepStrategy::line_search(StrategyKind::Bt0, 0.01),
        ])
        .collect()
}

/// Compares line-search strategies on the benchmark problem.
pub fn strategy_comparison(mesh_n: usize) -> Result<Vec<StrategyRow>> {
    strategy_configurations()
        .into_par_iter()
        .map(|strategy| {
            let (_, report) = solve(ProblemSpec::benchmark(mesh_n), &SolverOptions::with_strategy(strategy))?;
            Ok(StrategyRow {
                strategy: strategy.kind,
                l_hat0: strategy.l_hat0,
                objective: report.final_objective,
                sparsity: report.final_sparsity,
                pde_solves: report.pde_solves,
                iterations: report.num_iterations(),
                report,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaRow {
    pub beta: f64,
    pub f: f64,
    pub objective: f64,
    pub sparsity: f64,
    pub pde_solves: usize,
    pub iterations: usize,
}

impl BetaRow {
    fn from_report(beta: f64, r: &SolveReport) -> Self {
        Self {
            beta,
            f: r.final_f,
            objective: r.final_objective,
            sparsity: r.final_sparsity,
            pde_solves: r.pde_solves,
            iterations: r.num_iterations(),
        }
    }
}

/// Benchmark problem for each `β` with bound `bound` and the given penalty.
pub fn beta_sweep(betas: &[f64], mesh_n: usize, bound: f64, penalty: PenaltyKind) -> Result<Vec<BetaRow>> {
    betas
        .par_iter()
        .map(|&beta| {
            let spec = ProblemSpec { beta, bound, penalty, ..ProblemSpec::benchmark(mesh_n) };
            let (_, report) = solve(spec, &SolverOptions::with_strategy(default_strategy()))?;
            Ok(BetaRow::from_report(beta, &report))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSeries {
    pub l0: Vec<BetaRow>,
    pub l1: Vec<BetaRow>,
}

/// `(f, ‖u‖₀)` for `L⁰` and `L¹` solutions over the same `β` list (`γ = β`).
pub fn pareto(betas: &[f64], mesh_n: usize, bound: f64) -> Result<ParetoSeries> {
    let (l0, l1) = rayon::join(
        || beta_sweep(betas, mesh_n, bound, PenaltyKind::L0),
        || beta_sweep(betas, mesh_n, bound, PenaltyKind::L1),
    );
    Ok(ParetoSeries { l0: l0?, l1: l1? })
}

/// Indices of `L¹` points with positive support that no `L⁰` point dominates
/// (both coordinates `≤`, one strictly).
pub fn pareto_violations(series: &ParetoSeries) -> Vec<usize> {
    series
        .l1
        .iter()
        .enumerate()
        .filter(|(_, p1)| p1.sparsity > 0.0)
        .filter(|(_, p1)| {
            !series.l0.iter().any(|p0| {
                p0.f <= p1.f && p0.sparsity <= p1.sparsity && (p0.f < p1.f || p0.sparsity < p1.sparsity)
            })
        })
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshRow {
    pub n: usize,
    pub h: f64,
    pub objective: f64,
    pub sparsity: f64,
    pub pde_solves: usize,
    pub iterations: usize,
}

/// Benchmark problem with BT-0 (`L̂⁰ = 0.01`) on each mesh.
pub fn mesh_study(ns: &[usize]) -> Result<Vec<MeshRow>> {
    ns.par_iter()
        .map(|&n| {
            let (problem, report) = solve(ProblemSpec::benchmark(n), &SolverOptions::with_strategy(default_strategy()))?;
            Ok(MeshRow {
                n,
                h: problem.mesh().h(),
                objective: report.final_objective,
                sparsity: report.final_sparsity,
                pde_solves: report.pde_solves,
                iterations: report.num_iterations(),
            })
        })
        .collect()
}

/// Constant target of the unsolvable example, `√(β/α) + √(2αβ)`: with it the
/// constant control `√(β/α)` minimizes the convexified problem and its gradient
/// is `−√(2αβ)`.
pub fn unsolvable_target(alpha: f64, beta: f64) -> f64 {
    (beta / alpha).sqrt() + (2.0 * alpha * beta).sqrt()
}

/// Neumann problem without control bounds whose convex relaxation is solved by
/// a constant that violates the maximum principle.
pub fn unsolvable_spec(alpha: f64, beta: f64, mesh_n: usize) -> ProblemSpec {
    ProblemSpec {
        alpha,
        beta,
        bound: f64::INFINITY,
        penalty: PenaltyKind::L0,
        pde: PdeKind::NeumannHelmholtz,
        target: Target::Constant(unsolvable_target(alpha, beta)),
        mesh_n,
        misfit: Default::default(),
    }
}

/// Prox weights at which the relaxed solution is tested.
pub const UNSOLVABLE_LS: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct UnsolvableReport {
    pub u_bar: f64,
    /// Range of `∇f(ū)` over the cells.
    pub gradient_min: f64,
    pub gradient_max: f64,
    /// `(L, fp_residual(ū, L))`.
    pub residuals: Vec<(f64, f64)>,
    /// `y_d/(1+α)`.
    pub u_tilde: f64,
    /// `‖u_final − ũ‖_{L²}`.
    pub distance: f64,
    pub report: SolveReport,
}

pub fn unsolvable(alpha: f64, beta: f64, mesh_n: usize) -> Result<UnsolvableReport> {
    let problem = ControlProblem::new(unsolvable_spec(alpha, beta, mesh_n))?;
    let u_bar = (beta / alpha).sqrt();
    let ubar_field = ControlField::constant(problem.num_dofs(), u_bar);
    let grad = problem.grad_f(&ubar_field)?;
    let (gradient_min, gradient_max) = grad
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &g| (lo.min(g), hi.max(g)));
    let residuals = UNSOLVABLE_LS
        .iter()
        .map(|&l| fp_residual(&problem, &ubar_field, l).map(|r| (l, r)))
        .collect::<Result<Vec<_>>>()?;
    let report = run(&problem, &SolverOptions::with_strategy(default_strategy()))?;
    let u_tilde = unsolvable_target(alpha, beta) / (1.0 + alpha);
    let distance = problem
        .dist_sq(&report.final_control, &ControlField::constant(problem.num_dofs(), u_tilde))
        .sqrt();
    Ok(UnsolvableReport { u_bar, gradient_min, gradient_max, residuals, u_tilde, distance, report })
}

pub fn switching_spec(beta: f64, mesh_n: usize) -> ProblemSpec {
    ProblemSpec {
        alpha: SWITCHING_ALPHA,
        beta,
        bound: f64::INFINITY,
        penalty: PenaltyKind::Switching,
        pde: PdeKind::DirichletPoisson,
        target: Target::SwitchingWave,
        mesh_n,
        misfit: Default::default(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingRow {
    pub beta: f64,
    pub objective: f64,
    pub overlap: f64,
    pub pde_solves: usize,
    pub iterations: usize,
    /// Interval midpoints in `x₁`.
    pub x: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

pub fn switching(betas: &[f64], mesh_n: usize) -> Result<Vec<SwitchingRow>> {
    betas
        .par_iter()
        .map(|&beta| {
            let (_, report) = solve(switching_spec(beta, mesh_n), &SolverOptions::with_strategy(default_strategy()))?;
            let n = mesh_n;
            let values = &report.final_control.values;
            Ok(SwitchingRow {
                beta,
                objective: report.final_objective,
                overlap: report.final_sparsity,
                pde_solves: report.pde_solves,
                iterations: report.num_iterations(),
                x: (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
                u1: values[..n].to_vec(),
                u2: values[n..].to_vec(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configuration_lists() {
        assert_eq!(strategy_configurations().len(), 10);
        let b = pareto_betas();
        assert_eq!(b.len(), 16);
        assert!((b[15] - 0.5 * 0.7_f64.powi(15)).abs() < 1e-15);
    }

    #[test]
    fn unsolvable_target_value() {
        let yd = unsolvable_target(0.01, 0.01);
        assert!((yd - (1.0 + 0.0002_f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn dominance_detection() {
        let row = |f, s| BetaRow { beta: 0.0, f, objective: 0.0, sparsity: s, pde_solves: 0, iterations: 0 };
        let series = ParetoSeries {
            l0: vec![row(1.0, 0.2), row(2.0, 0.0)],
            l1: vec![row(1.5, 0.3), row(0.5, 0.5), row(2.0, 0.0)],
        };
        assert_eq!(pareto_violations(&series), vec![1]);
    }
}

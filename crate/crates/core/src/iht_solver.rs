//! Iterative hard thresholding with fixed or line-searched prox weights.
//!
//! Each iteration solves the pointwise subproblem
//!
//! ```text
//!     min_u  ⟨∇f(u_k), u⟩ + (L/2)‖u − u_k‖² + g(u)
//! ```
//!
//! and, for the line-search strategies, accepts `L` only if the descent
//! condition `η‖u_{k+1} − u_k‖² ≤ F(u_k) − F(u_{k+1})` holds with `F = f + g`.
//! Rejected trials increase `L` by the factor `1/θ`; widening decreases it by
//! `θ` while the condition keeps holding.

use rayon::prelude::*;

use crate::control_problem::{ControlProblem, PenaltyKind, ProblemSpec};
use crate::error::{invalid, Error, Result};
use crate::mesh_fem::ControlField;
use crate::scalar_prox::{prox_l0, prox_l1, prox_switch, SwitchingPoint};

/// Maximum number of increases of `L` in backtracking.
pub const MAX_BACKTRACKS: usize = 200;

const PAR_MIN_LEN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Constant `L`, no descent test.
    Fixed,
    /// Backtracking from `L̂⁰`.
    Bt,
    /// Backtracking, widening while `L̂⁰` is accepted.
    BtW,
    /// Try `L = 0` first, then as `BtW`.
    Bt0,
}

/// Step-size rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStrategy {
    pub kind: StrategyKind,
    pub l_fixed: f64,
    pub l_hat0: f64,
    pub theta: f64,
    pub eta: f64,
    pub i_max: usize,
}

impl Default for StepStrategy {
    fn default() -> Self {
        Self { kind: StrategyKind::Bt0, l_fixed: 1.0, l_hat0: 0.01, theta: 0.5, eta: 1e-4, i_max: 40 }
    }
}

impl StepStrategy {
    pub fn fixed(l: f64) -> Self {
        Self { kind: StrategyKind::Fixed, l_fixed: l, ..Self::default() }
    }

    pub fn line_search(kind: StrategyKind, l_hat0: f64) -> Self {
        Self { kind, l_hat0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == StrategyKind::Fixed {
            if !(self.l_fixed.is_finite() && self.l_fixed >= 0.0) {
                return invalid(format!("fixed L must be finite and >= 0, got {}", self.l_fixed));
            }
            return Ok(());
        }
        if !(self.l_hat0.is_finite() && self.l_hat0 > 0.0) {
            return invalid(format!("initial L must be finite and > 0, got {}", self.l_hat0));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return invalid(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return invalid(format!("eta must be finite and > 0, got {}", self.eta));
        }
        if self.i_max == 0 {
            return invalid("widening limit must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub strategy: StepStrategy,
    pub max_iterations: usize,
    /// Stop once `|F_{k+1} − F_k|` is at most this value.
    pub stop_tol: f64,
    /// Starting control; zero when `None`.
    pub initial_control: Option<ControlField>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { strategy: StepStrategy::default(), max_iterations: 10_000, stop_tol: 1e-12, initial_control: None }
    }
}

impl SolverOptions {
    pub fn with_strategy(strategy: StepStrategy) -> Self {
        Self { strategy, ..Self::default() }
    }
}

/// One accepted step `u_{k-1} → u_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Prox weight of the step.
    pub l: f64,
    pub f: f64,
    pub g: f64,
    pub objective: f64,
    /// Support measure (overlap measure for switching problems) of `u_k`.
    pub sparsity: f64,
    /// `‖u_k − u_{k−1}‖`.
    pub step_norm: f64,
    /// `‖χ(u_k) − χ(u_{k−1})‖_{L¹}`.
    pub chi_distance: f64,
    /// Cumulative PDE solves after this step.
    pub pde_solves: usize,
    /// Step-size trials spent on this step.
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Tolerance,
    MaxIterations,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Tolerance => "tolerance",
            Self::MaxIterations => "max_iter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: Vec<IterationRecord>,
    pub initial_f: f64,
    pub initial_objective: f64,
    pub final_control: ControlField,
    pub final_f: f64,
    pub final_g: f64,
    pub final_objective: f64,
    pub final_sparsity: f64,
    /// Prox weight of the last accepted step.
    pub final_l: f64,
    /// [`fp_residual`] of the final control at `final_l`.
    pub fp_residual: f64,
    pub termination: Termination,
    /// PDE solves spent by the iteration (the final residual check excluded).
    pub pde_solves: usize,
    pub total_trials: usize,
}

impl SolveReport {
    pub fn num_iterations(&self) -> usize {
        self.iterations.len()
    }
}

/// One thresholding step with prox weight `l`, applied cell-wise (per interval
/// pair for switching problems) with the canonical tie-break.
pub fn iht_step(spec: &ProblemSpec, u_k: &ControlField, grad: &ControlField, l: f64) -> Result<ControlField> {
    if u_k.len() != grad.len() {
        return invalid("control and gradient lengths differ");
    }
    if !(l.is_finite() && l >= 0.0) {
        return invalid(format!("prox weight must be finite and >= 0, got {l}"));
    }
    if l + spec.alpha <= 0.0 {
        return invalid("L + alpha must be positive");
    }
    let values: Vec<f64> = match spec.penalty {
        PenaltyKind::L0 => {
            let p = spec.prox_params(l);
            grad.values
                .par_iter()
                .with_min_len(PAR_MIN_LEN)
                .zip(&u_k.values)
                .map(|(&g, &u)| prox_l0(g, u, &p).map(|s| s.canonical()))
                .collect::<Result<_>>()?
        }
        PenaltyKind::L1 => grad.values
            .par_iter()
            .with_min_len(PAR_MIN_LEN)
            .zip(&u_k.values)
            .map(|(&g, &u)| prox_l1(g, u, l, spec.alpha, spec.beta, spec.bound))
            .collect::<Result<_>>()?,
        PenaltyKind::Switching => {
            if u_k.len() % 2 != 0 {
                return invalid("switching control must hold two equal-length halves");
            }
            let n = u_k.len() / 2;
            let mut out = vec![0.0; 2 * n];
            for i in 0..n {
                let s = prox_switch(
                    SwitchingPoint::new(grad.values[i], grad.values[n + i]),
                    SwitchingPoint::new(u_k.values[i], u_k.values[n + i]),
                    l,
                    spec.alpha,
                    spec.beta,
                )?;
                out[i] = s.u1;
                out[n + i] = s.u2;
            }
            out
        }
    };
    Ok(ControlField::new(values))
}

/// Descent test `η·‖u_{k+1} − u_k‖² ≤ F_k − F_{k+1}`.
pub fn descent_ok(f_k: f64, f_next: f64, step_sq: f64, eta: f64) -> bool {
    eta * step_sq <= f_k - f_next
}

/// Outcome of a step-size search.
#[derive(Debug, Clone, PartialEq)]
pub struct StepChoice {
    pub l: f64,
    pub u_next: ControlField,
    pub f: f64,
    pub g: f64,
    pub trials: usize,
}

impl StepChoice {
    pub fn objective(&self) -> f64 {
        self.f + self.g
    }
}

struct Trial {
    choice: StepChoice,
    accepted: bool,
}

fn trial(
    problem: &ControlProblem,
    u_k: &ControlField,
    grad: &ControlField,
    objective_k: f64,
    l: f64,
    eta: f64,
) -> Result<Trial> {
    let u_next = iht_step(problem.spec(), u_k, grad, l)?;
    let (f, _) = problem.eval_f(&u_next)?;
    let g = problem.eval_g(&u_next);
    let accepted = descent_ok(objective_k, f + g, problem.dist_sq(&u_next, u_k), eta);
    log::trace!("trial L = {l:e}: F = {:.12e}, accepted = {accepted}", f + g);
    Ok(Trial { choice: StepChoice { l, u_next, f, g, trials: 0 }, accepted })
}

/// Chooses `L_k` and the next iterate according to `strategy`; every trial
/// costs one PDE solve.
pub fn select_step(
    problem: &ControlProblem,
    strategy: &StepStrategy,
    u_k: &ControlField,
    grad: &ControlField,
    objective_k: f64,
) -> Result<StepChoice> {
    strategy.validate()?;
    let eta = strategy.eta;
    let trials = std::cell::Cell::new(0);
    let attempt = |l: f64| {
        trials.set(trials.get() + 1);
        trial(problem, u_k, grad, objective_k, l, eta)
    };

    if strategy.kind == StrategyKind::Fixed {
        let t = attempt(strategy.l_fixed)?;
        return Ok(StepChoice { trials: trials.get(), ..t.choice });
    }

    if strategy.kind == StrategyKind::Bt0 && problem.spec().alpha > 0.0 {
        let t = attempt(0.0)?;
        if t.accepted {
            return Ok(StepChoice { trials: trials.get(), ..t.choice });
        }
    }

    let mut l = strategy.l_hat0;
    let first = attempt(l)?;
    if first.accepted {
        let mut best = first.choice;
        if strategy.kind != StrategyKind::Bt {
            for _ in 0..strategy.i_max {
                let t = attempt(l * strategy.theta)?;
                if !t.accepted {
                    break;
                }
                l *= strategy.theta;
                best = t.choice;
            }
        }
        return Ok(StepChoice { trials: trials.get(), ..best });
    }

    for _ in 0..MAX_BACKTRACKS {
        l /= strategy.theta;
        let t = attempt(l)?;
        if t.accepted {
            return Ok(StepChoice { trials: trials.get(), ..t.choice });
        }
    }
    Err(Error::StepSearch(format!(
        "descent condition not met after {MAX_BACKTRACKS} increases of L (last L = {l:e})"
    )))
}

/// Runs the iteration from `options.initial_control` (zero by default).
pub fn run(problem: &ControlProblem, options: &SolverOptions) -> Result<SolveReport> {
    let strategy = options.strategy;
    strategy.validate()?;
    if options.max_iterations == 0 {
        return invalid("max_iterations must be positive");
    }
    if !(options.stop_tol.is_finite() && options.stop_tol > 0.0) {
        return invalid(format!("stop tolerance must be finite and > 0, got {}", options.stop_tol));
    }
    let mut u = match &options.initial_control {
        Some(u0) if u0.len() != problem.num_dofs() => {
            return invalid(format!(
                "initial control has {} values, problem has {} dofs",
                u0.len(),
                problem.num_dofs()
            ))
        }
        Some(u0) => u0.clone(),
        None => problem.zero_control(),
    };

    let start = problem.pde_solves();
    let mut g_u = problem.eval_g(&u);
    let mut records = Vec::new();
    let mut initial = None;
    let mut termination = Termination::MaxIterations;
    let mut last = None;
    let mut total_trials = 0;

    for k in 1..=options.max_iterations {
        let (f_k, grad) = problem.value_and_grad(&u)?;
        let objective_k = f_k + g_u;
        initial.get_or_insert((f_k, objective_k));

        let choice = select_step(problem, &strategy, &u, &grad, objective_k)?;
        let objective = choice.objective();
        if strategy.kind == StrategyKind::Fixed && objective > objective_k {
            log::warn!(
                "objective increased at iteration {k} with fixed L = {}: {objective_k:.12e} -> {objective:.12e}",
                choice.l
            );
        }
        total_trials += choice.trials;
        let record = IterationRecord {
            k,
            l: choice.l,
            f: choice.f,
            g: choice.g,
            objective,
            sparsity: problem.sparsity(&choice.u_next),
            step_norm: problem.dist_sq(&choice.u_next, &u).sqrt(),
            chi_distance: problem.chi_distance(&problem.chi(&choice.u_next), &problem.chi(&u)),
            pde_solves: problem.pde_solves() - start,
            trials: choice.trials,
        };
        log::debug!(
            "k = {k}: L = {:e}, F = {:.12e}, sparsity = {:.6}, trials = {}",
            record.l,
            record.objective,
            record.sparsity,
            record.trials
        );
        records.push(record);

        let change = (objective - objective_k).abs();
        u = choice.u_next;
        g_u = choice.g;
        last = Some((choice.l, choice.f));
        if change <= options.stop_tol {
            termination = Termination::Tolerance;
            break;
        }
    }

    let pde_solves = problem.pde_solves() - start;
    let (initial_f, initial_objective) = initial.expect("at least one iteration");
    let (final_l, final_f) = last.expect("at least one iteration");
    let residual = fp_residual(problem, &u, final_l)?;
    Ok(SolveReport {
        iterations: records,
        initial_f,
        initial_objective,
        final_f,
        final_g: g_u,
        final_objective: final_f + g_u,
        final_sparsity: problem.sparsity(&u),
        final_control: u,
        final_l,
        fp_residual: residual,
        termination,
        pde_solves,
        total_trials,
    })
}

/// Stationarity residual `(L + α)·max_T dist(u_T, prox(∇f(u)_T, u_T))`: the
/// sup-norm of the prox-gradient mapping at weight `L`. It vanishes exactly at
/// fixed points of the thresholding step and, unlike the plain distance, does
/// not shrink as `L` grows. Costs two PDE solves.
pub fn fp_residual(problem: &ControlProblem, u: &ControlField, l: f64) -> Result<f64> {
    let spec = problem.spec();
    if !(l.is_finite() && l >= 0.0) || l + spec.alpha <= 0.0 {
        return invalid("fp_residual needs L >= 0 with L + alpha > 0");
    }
    let grad = problem.grad_f(u)?;
    let w = l + spec.alpha;
    let dist = match spec.penalty {
        PenaltyKind::L0 => {
            let p = spec.prox_params(l);
            grad.values
                .iter()
                .zip(&u.values)
                .map(|(&g, &v)| prox_l0(g, v, &p).map(|s| s.distance(v)))
                .try_fold(0.0_f64, |acc, d| d.map(|d| acc.max(d)))?
        }
        PenaltyKind::L1 => grad.values
            .iter()
            .zip(&u.values)
            .map(|(&g, &v)| prox_l1(g, v, l, spec.alpha, spec.beta, spec.bound).map(|p| (p - v).abs()))
            .try_fold(0.0_f64, |acc, d| d.map(|d| acc.max(d)))?,
        PenaltyKind::Switching => {
            let n = u.len() / 2;
            let mut worst = 0.0_f64;
            for i in 0..n {
                let cur = SwitchingPoint::new(u.values[i], u.values[n + i]);
                let s = prox_switch(SwitchingPoint::new(grad.values[i], grad.values[n + i]), cur, l, spec.alpha, spec.beta)?;
                worst = worst.max((s.u1 - cur.u1).hypot(s.u2 - cur.u2));
            }
            worst
        }
    };
    Ok(w * dist)
}

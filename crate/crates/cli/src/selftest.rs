//! Quick built-in consistency checks, seeded for reproducibility.

use std::f64::consts::PI;

use iht_core::experiments::{default_strategy, solve};
use iht_core::iht_solver::fp_residual;
use iht_core::scalar_prox::{fp_membership, prox_l0, prox_l0_objective, sigma, ProxParams};
use iht_core::{ControlField, ControlProblem, PdeKind, ProblemSpec, SolverOptions, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_params(rng: &mut ChaCha8Rng) -> ProxParams {
    let bound = if rng.gen_bool(0.2) { f64::INFINITY } else { rng.gen_range(0.1..5.0) };
    ProxParams {
        l: rng.gen_range(0.0..5.0),
        alpha: rng.gen_range(0.01..2.0),
        beta: rng.gen_range(0.01..3.0),
        bound,
    }
}

/// Scalar objective minimized over a grid plus the analytic candidates.
fn scan_minimum(g: f64, u_k: f64, p: &ProxParams) -> f64 {
    let vertex = (p.l * u_k - g) / (p.l + p.alpha);
    let reach = if p.bound.is_finite() { p.bound } else { vertex.abs() + 1.0 };
    let mut best = f64::INFINITY;
    let steps = 4000;
    for i in 0..=steps {
        let u = -reach + 2.0 * reach * i as f64 / steps as f64;
        best = best.min(prox_l0_objective(u, g, u_k, p));
    }
    for u in [0.0, vertex.clamp(-reach, reach), reach, -reach] {
        best = best.min(prox_l0_objective(u, g, u_k, p));
    }
    best
}

fn prox_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let (mut worst_gap, mut sep_fail, mut fp_fail) = (0.0_f64, 0, 0);
    for _ in 0..2000 {
        let p = random_params(rng);
        let g = rng.gen_range(-6.0..6.0);
        let u_k = rng.gen_range(-3.0..3.0);
        let set = prox_l0(g, u_k, &p).expect("valid parameters");
        let s = sigma(&p).expect("valid parameters");
        for &v in set.values() {
            worst_gap = worst_gap.max(prox_l0_objective(v, g, u_k, &p) - scan_minimum(g, u_k, &p));
            if v != 0.0 && v.abs() < s - 1e-12 {
                sep_fail += 1;
            }
        }
        let u = set.canonical();
        let g_fp = rng.gen_range(-4.0..4.0);
        if fp_membership(u, g_fp, &p).unwrap_or(false) {
            for factor in [2.0, 10.0] {
                if !fp_membership(u, g_fp, &p.with_l(p.l * factor + 1e-3)).unwrap_or(false) {
                    fp_fail += 1;
                }
            }
        }
    }
    vec![
        Check { name: "prox_l0 global optimality", passed: worst_gap <= 1e-10, detail: format!("worst objective gap {worst_gap:.2e}") },
        Check { name: "sigma separation", passed: sep_fail == 0, detail: format!("{sep_fail} violations") },
        Check { name: "fixed points persist for larger L", passed: fp_fail == 0, detail: format!("{fp_fail} violations") },
    ]
}

/// Random low-mode sine combination at element centroids.
fn smooth_direction(rng: &mut ChaCha8Rng, problem: &ControlProblem) -> ControlField {
    let coef: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mesh = problem.mesh();
    ControlField::new(
        (0..problem.num_dofs())
            .map(|t| {
                let [x, y] = mesh.centroid(t);
                (0..9)
                    .map(|m| {
                        let (k, l) = ((m / 3 + 1) as f64, (m % 3 + 1) as f64);
                        coef[m] * (k * PI * x).sin() * (l * PI * y).sin()
                    })
                    .sum()
            })
            .collect(),
    )
}

fn gradient_check(rng: &mut ChaCha8Rng, pde: PdeKind) -> Check {
    let spec = ProblemSpec { pde, bound: f64::INFINITY, ..ProblemSpec::benchmark(16) };
    let problem = ControlProblem::new(spec).expect("valid spec");
    let m = problem.num_dofs();
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let u = ControlField::new((0..m).map(|_| rng.gen_range(-2.0..2.0)).collect());
        let du = smooth_direction(rng, &problem);
        let eps = 1e-5;
        let shifted = |s: f64| ControlField::new(u.values.iter().zip(&du.values).map(|(a, b)| a + s * b).collect());
        let grad = problem.grad_f(&u).expect("solve");
        let fp = problem.eval_f(&shifted(eps)).expect("solve").0;
        let fm = problem.eval_f(&shifted(-eps)).expect("solve").0;
        let fd = (fp - fm) / (2.0 * eps);
        let an = problem.inner(&grad, &du);
        let scale = (problem.norm_sq(&grad) * problem.norm_sq(&du)).sqrt();
        worst = worst.max((fd - an).abs() / scale.max(1e-300));
    }
    let name = match pde {
        PdeKind::DirichletPoisson => "adjoint gradient (Dirichlet)",
        PdeKind::NeumannHelmholtz => "adjoint gradient (Neumann)",
    };
    Check { name, passed: worst <= 1e-6, detail: format!("worst relative error {worst:.2e}") }
}

fn solver_check() -> Check {
    let result = solve(ProblemSpec::benchmark(10), &SolverOptions::with_strategy(default_strategy()));
    let (problem, report) = match result {
        Ok(r) => r,
        Err(e) => return Check { name: "line-search run", passed: false, detail: e.to_string() },
    };
    let mut prev = report.initial_objective;
    let monotone = report.iterations.iter().all(|r| {
        let ok = r.objective <= prev;
        prev = r.objective;
        ok
    });
    let budget = report.pde_solves == 2 * report.num_iterations() + report.total_trials;
    let steps: f64 = report.iterations.iter().map(|r| r.step_norm * r.step_norm).sum();
    let summable = steps <= (report.initial_objective - report.final_objective) / default_strategy().eta;
    let stationary = fp_residual(&problem, &report.final_control, report.final_l).map(|r| r <= 1e-6).unwrap_or(false);
    Check {
        name: "line-search run",
        passed: monotone && budget && summable && stationary,
        detail: format!(
            "F = {:.6}, monotone = {monotone}, budget = {budget}, summable = {summable}, stationary = {stationary}",
            report.final_objective
        ),
    }
}

fn zero_target_check() -> Check {
    let spec = ProblemSpec { target: Target::Zero, ..ProblemSpec::benchmark(6) };
    match solve(spec, &SolverOptions::default()) {
        Ok((_, r)) => Check {
            name: "zero target",
            passed: r.final_objective == 0.0 && r.num_iterations() == 1,
            detail: format!("F = {}, iterations = {}", r.final_objective, r.num_iterations()),
        },
        Err(e) => Check { name: "zero target", passed: false, detail: e.to_string() },
    }
}

pub fn run_all(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = prox_checks(&mut rng);
    checks.push(gradient_check(&mut rng, PdeKind::DirichletPoisson));
    checks.push(gradient_check(&mut rng, PdeKind::NeumannHelmholtz));
    checks.push(solver_check());
    checks.push(zero_target_check());
    checks
}

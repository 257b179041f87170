//! `iht`: command-line front end for the sparse control solver and its
//! numerical studies.

mod config;
mod output;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iht_core::experiments::{self, BetaRow};
use iht_core::{
    ControlProblem, Error, PdeKind, PenaltyKind, ProblemSpec, SolverOptions, StrategyKind, Target,
};

use config::{ConfigError, RawConfig, RunConfig};
use output::{fmt_bound, write_control, write_csv, write_json, write_report, Summary};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "iht", version, about = "Iterative hard thresholding for sparse elliptic optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a single problem and write its iteration log and final control.
    Solve(Flags),
    /// Compare line-search strategies on the benchmark problem.
    Table1(Flags),
    /// Sweep beta without control bounds, or compare L0 and L1 fronts with --pareto.
    BetaSweep(Flags),
    /// Solve the benchmark problem on a sequence of meshes.
    MeshStudy(Flags),
    /// Neumann example whose convex relaxation is not a fixed point.
    Unsolvable(Flags),
    /// Two controls penalized by the measure of their overlap.
    Switching(Flags),
    /// Run quick built-in consistency checks.
    Selftest(Flags),
}

/// Flags shared by all subcommands; every flag can also be given as a
/// `key = value` line in the --config file, and flags take precedence.
#[derive(Debug, Args, Default)]
struct Flags {
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid subdivisions per side.
    #[arg(long = "mesh-n")]
    mesh_n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// L1 weight (used with --penalty l1).
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Box bound: a number or "inf".
    #[arg(long, allow_hyphen_values = true)]
    bound: Option<String>,
    /// Same as --bound inf.
    #[arg(long = "no-bound")]
    no_bound: bool,
    /// l0, l1 or switching.
    #[arg(long)]
    penalty: Option<String>,
    /// dirichlet or neumann.
    #[arg(long)]
    pde: Option<String>,
    /// fixed, bt, btw or bt0.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lhat0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    #[arg(long)]
    imax: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lfixed: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    /// Output directory (default: results).
    #[arg(long)]
    out: Option<String>,
    /// Use the fine default meshes.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    seed: Option<String>,
    /// Use the zero desired state.
    #[arg(long)]
    ydzero: bool,
    /// Misfit evaluation: interior (default) or consistent.
    #[arg(long)]
    misfit: Option<String>,
    /// Comma-separated beta list for sweeps.
    #[arg(long)]
    betas: Option<String>,
    /// Comma-separated mesh sizes for the mesh study.
    #[arg(long)]
    ns: Option<String>,
    /// Pareto comparison of L0 and L1 solutions (beta-sweep).
    #[arg(long)]
    pareto: bool,
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        let mut flags = RawConfig::default();
        let values = [
            ("mesh-n", &self.mesh_n),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("bound", &self.bound),
            ("penalty", &self.penalty),
            ("pde", &self.pde),
            ("strategy", &self.strategy),
            ("lhat0", &self.lhat0),
            ("theta", &self.theta),
            ("eta", &self.eta),
            ("imax", &self.imax),
            ("lfixed", &self.lfixed),
            ("max-iter", &self.max_iter),
            ("tol", &self.tol),
            ("out", &self.out),
            ("seed", &self.seed),
            ("misfit", &self.misfit),
            ("betas", &self.betas),
            ("ns", &self.ns),
        ];
        for (key, value) in values {
            if let Some(v) = value {
                flags.set(key, v.as_str())?;
            }
        }
        let switches = [
            ("no-bound", self.no_bound),
            ("full", self.full),
            ("ydzero", self.ydzero),
            ("pareto", self.pareto),
        ];
        for (key, on) in switches {
            if on {
                flags.set(key, "true")?;
            }
        }
        raw.merge(flags);
        raw.resolve()
    }
}

/// Failure with its process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self { code: 2, message: format!("invalid configuration: {e}") }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => Self { code: 2, message: format!("invalid configuration: {m}") },
            other => Self { code: 3, message: format!("solver failure: {other}") },
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: 1, message: format!("i/o error: {e}") }
    }
}

type CmdResult = Result<(), Failure>;

fn penalty_name(p: PenaltyKind) -> &'static str {
    match p {
        PenaltyKind::L0 => "l0",
        PenaltyKind::L1 => "l1",
        PenaltyKind::Switching => "switching",
    }
}

fn pde_name(p: PdeKind) -> &'static str {
    match p {
        PdeKind::DirichletPoisson => "dirichlet",
        PdeKind::NeumannHelmholtz => "neumann",
    }
}

fn strategy_name(s: StrategyKind) -> &'static str {
    match s {
        StrategyKind::Fixed => "fixed",
        StrategyKind::Bt => "bt",
        StrategyKind::BtW => "btw",
        StrategyKind::Bt0 => "bt0",
    }
}

fn problem_spec(cfg: &RunConfig) -> ProblemSpec {
    let penalty = cfg.penalty.unwrap_or(PenaltyKind::L0);
    let switching = penalty == PenaltyKind::Switching;
    let mesh_n = cfg.mesh_or(if switching { 40 } else { 10 }, 500);
    let base = if switching {
        experiments::switching_spec(cfg.beta.unwrap_or(0.1), mesh_n)
    } else {
        ProblemSpec::benchmark(mesh_n)
    };
    let beta = match penalty {
        PenaltyKind::L1 => cfg.gamma.or(cfg.beta).unwrap_or(base.beta),
        _ => cfg.beta.unwrap_or(base.beta),
    };
    let target = if cfg.ydzero { Target::Zero } else { base.target.clone() };
    ProblemSpec {
        alpha: cfg.alpha.unwrap_or(base.alpha),
        beta,
        bound: cfg.bound_or(base.bound),
        penalty,
        pde: cfg.pde.unwrap_or(base.pde),
        target,
        mesh_n,
        misfit: cfg.misfit,
    }
}

fn solver_options(cfg: &RunConfig) -> Result<SolverOptions, Failure> {
    let strategy = cfg.step_strategy();
    strategy.validate()?;
    let d = SolverOptions::default();
    let options = SolverOptions {
        strategy,
        max_iterations: cfg.max_iter.unwrap_or(d.max_iterations),
        stop_tol: cfg.tol.unwrap_or(d.stop_tol),
        initial_control: None,
    };
    if options.max_iterations == 0 || !(options.stop_tol > 0.0 && options.stop_tol.is_finite()) {
        return Err(ConfigError("max-iter must be positive and tol finite and positive".into()).into());
    }
    Ok(options)
}

fn cmd_solve(cfg: &RunConfig) -> CmdResult {
    let spec = problem_spec(cfg);
    spec.validate()?;
    let options = solver_options(cfg)?;
    let problem = ControlProblem::new(spec.clone())?;
    let report = iht_core::iht_solver::run(&problem, &options)?;

    let out = cfg.out_dir();
    write_report(&out.join("report.csv"), &report)?;
    write_control(&out.join("final_control.csv"), &problem, &report.final_control.values)?;
    let summary = Summary {
        mesh_n: spec.mesh_n,
        h: problem.mesh().h(),
        alpha: spec.alpha,
        beta: spec.beta,
        bound: fmt_bound(spec.bound),
        penalty: penalty_name(spec.penalty).into(),
        pde: pde_name(spec.pde).into(),
        strategy: strategy_name(options.strategy.kind).into(),
        objective: report.final_objective,
        f: report.final_f,
        g: report.final_g,
        sparsity: report.final_sparsity,
        pde_solves: report.pde_solves,
        iterations: report.num_iterations(),
        trials: report.total_trials,
        termination: report.termination.as_str().into(),
        final_l: report.final_l,
        fp_residual: report.fp_residual,
    };
    write_json(&out.join("summary.json"), &summary)?;
    println!(
        "F={:.6} L0={:.6} pde={} iters={} term={}",
        report.final_objective,
        report.final_sparsity,
        report.pde_solves,
        report.num_iterations(),
        report.termination.as_str()
    );
    Ok(())
}

#[derive(Serialize)]
struct StrategyCsv {
    strategy: &'static str,
    #[serde(rename = "L_hat0")]
    l_hat0: f64,
    #[serde(rename = "F")]
    objective: f64,
    support: f64,
    pde_solves: usize,
    iterations: usize,
}

#[derive(Serialize)]
struct BetaCsv {
    beta: f64,
    f: f64,
    #[serde(rename = "F")]
    objective: f64,
    support: f64,
    pde_solves: usize,
    iterations: usize,
}

#[derive(Serialize)]
struct MeshCsv {
    n: usize,
    h: f64,
    #[serde(rename = "F")]
    objective: f64,
    support: f64,
    pde_solves: usize,
    iterations: usize,
}

#[derive(Serialize)]
struct ResidualCsv {
    #[serde(rename = "L")]
    l: f64,
    fp_residual: f64,
}

#[derive(Serialize)]
struct SwitchingCsv {
    beta: f64,
    #[serde(rename = "F")]
    objective: f64,
    overlap: f64,
    pde_solves: usize,
    iterations: usize,
}

#[derive(Serialize)]
struct ProfileCsv {
    beta: f64,
    x1: f64,
    u1: f64,
    u2: f64,
}

fn cmd_table1(cfg: &RunConfig) -> CmdResult {
    let n = cfg.mesh_or(10, 500);
    let rows = experiments::strategy_comparison(n)?;
    let out = cfg.out_dir();
    write_csv(
        &out.join("table1.csv"),
        rows.iter().map(|r| StrategyCsv {
            strategy: strategy_name(r.strategy),
            l_hat0: r.l_hat0,
            objective: r.objective,
            support: r.sparsity,
            pde_solves: r.pde_solves,
            iterations: r.iterations,
        }),
    )?;
    println!("{:<8} {:>10} {:>14} {:>10} {:>6}", "strategy", "L_hat0", "F", "||u||_0", "pde");
    for r in &rows {
        println!(
            "{:<8} {:>10.0e} {:>14.8} {:>10.6} {:>6}",
            strategy_name(r.strategy),
            r.l_hat0,
            r.objective,
            r.sparsity,
            r.pde_solves
        );
    }
    Ok(())
}

fn beta_rows_csv(path: &Path, rows: &[BetaRow]) -> std::io::Result<()> {
    write_csv(
        path,
        rows.iter().map(|r| BetaCsv {
            beta: r.beta,
            f: r.f,
            objective: r.objective,
            support: r.sparsity,
            pde_solves: r.pde_solves,
            iterations: r.iterations,
        }),
    )
}

fn cmd_beta_sweep(cfg: &RunConfig) -> CmdResult {
    let out = cfg.out_dir();
    if cfg.pareto {
        let n = cfg.mesh_or(40, 500);
        let betas = cfg.betas.clone().unwrap_or_else(experiments::pareto_betas);
        let series = experiments::pareto(&betas, n, cfg.bound_or(4.0))?;
        beta_rows_csv(&out.join("pareto_l0.csv"), &series.l0)?;
        beta_rows_csv(&out.join("pareto_l1.csv"), &series.l1)?;
        println!("{:>10} {:>12} {:>10} {:>12} {:>10}", "beta", "f(L0)", "|u|_0(L0)", "f(L1)", "|u|_0(L1)");
        for (a, b) in series.l0.iter().zip(&series.l1) {
            println!("{:>10.6} {:>12.6} {:>10.6} {:>12.6} {:>10.6}", a.beta, a.f, a.sparsity, b.f, b.sparsity);
        }
        let violations = experiments::pareto_violations(&series);
        println!("undominated L1 solutions with positive support: {}", violations.len());
        return Ok(());
    }
    let n = cfg.mesh_or(40, 500);
    let betas = cfg.betas.clone().unwrap_or_else(|| experiments::UNBOUNDED_BETAS.to_vec());
    let rows = experiments::beta_sweep(&betas, n, cfg.bound_or(f64::INFINITY), PenaltyKind::L0)?;
    beta_rows_csv(&out.join("beta_sweep.csv"), &rows)?;
    println!("{:>10} {:>10} {:>12}", "beta", "||u||_0", "F");
    for r in &rows {
        println!("{:>10.4} {:>10.6} {:>12.6}", r.beta, r.sparsity, r.objective);
    }
    Ok(())
}

fn cmd_mesh_study(cfg: &RunConfig) -> CmdResult {
    let ns = cfg.ns.clone().unwrap_or_else(|| {
        if cfg.full {
            vec![10, 20, 40, 80, 160, 320, 640, 1280]
        } else {
            experiments::MESH_STUDY_N.to_vec()
        }
    });
    if let Some(&bad) = ns.iter().find(|&&n| n < 4) {
        return Err(ConfigError(format!("mesh sizes must be >= 4, got {bad}")).into());
    }
    let rows = experiments::mesh_study(&ns)?;
    write_csv(
        &cfg.out_dir().join("mesh_study.csv"),
        rows.iter().map(|r| MeshCsv {
            n: r.n,
            h: r.h,
            objective: r.objective,
            support: r.sparsity,
            pde_solves: r.pde_solves,
            iterations: r.iterations,
        }),
    )?;
    println!("{:>6} {:>8} {:>12} {:>10} {:>6}", "n", "h", "F", "||u||_0", "pde");
    for r in &rows {
        println!("{:>6} {:>8.4} {:>12.6} {:>10.6} {:>6}", r.n, r.h, r.objective, r.sparsity, r.pde_solves);
    }
    Ok(())
}

fn cmd_unsolvable(cfg: &RunConfig) -> CmdResult {
    let alpha = cfg.alpha.unwrap_or(0.01);
    let beta = cfg.beta.unwrap_or(0.01);
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(ConfigError("alpha and beta must be positive".into()).into());
    }
    let n = cfg.mesh_or(40, 160);
    let r = experiments::unsolvable(alpha, beta, n)?;
    let out = cfg.out_dir();
    write_csv(
        &out.join("unsolvable_residuals.csv"),
        r.residuals.iter().map(|&(l, fp_residual)| ResidualCsv { l, fp_residual }),
    )?;
    let problem = ControlProblem::new(experiments::unsolvable_spec(alpha, beta, n))?;
    write_control(&out.join("unsolvable_control.csv"), &problem, &r.report.final_control.values)?;
    write_report(&out.join("unsolvable_report.csv"), &r.report)?;
    println!("u_bar = {:.6}, gradient at u_bar in [{:.6e}, {:.6e}] (expected {:.6e})", r.u_bar, r.gradient_min, r.gradient_max, -(2.0 * alpha * beta).sqrt());
    for (l, res) in &r.residuals {
        println!("fp_residual(u_bar, L = {l}) = {res:.6e}");
    }
    println!("final F = {:.8}, ||u - u_tilde|| = {:.3e} (u_tilde = {:.6})", r.report.final_objective, r.distance, r.u_tilde);
    Ok(())
}

fn cmd_switching(cfg: &RunConfig) -> CmdResult {
    let n = cfg.mesh_or(40, 500);
    let betas = cfg.betas.clone().unwrap_or_else(|| experiments::SWITCHING_BETAS.to_vec());
    let rows = experiments::switching(&betas, n)?;
    let out = cfg.out_dir();
    write_csv(
        &out.join("switching.csv"),
        rows.iter().map(|r| SwitchingCsv {
            beta: r.beta,
            objective: r.objective,
            overlap: r.overlap,
            pde_solves: r.pde_solves,
            iterations: r.iterations,
        }),
    )?;
    write_csv(
        &out.join("switching_profiles.csv"),
        rows.iter().flat_map(|r| {
            (0..r.x.len()).map(move |i| ProfileCsv { beta: r.beta, x1: r.x[i], u1: r.u1[i], u2: r.u2[i] })
        }),
    )?;
    println!("{:>8} {:>12} {:>10}", "beta", "F", "|u1u2|_0");
    for r in &rows {
        println!("{:>8.4} {:>12.6} {:>10.4}", r.beta, r.objective, r.overlap);
    }
    Ok(())
}

fn cmd_selftest(cfg: &RunConfig) -> CmdResult {
    let checks = selftest::run_all(cfg.seed);
    let mut failed = 0;
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Failure { code: 4, message: format!("{failed} self-test check(s) failed") });
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (flags, cmd): (&Flags, fn(&RunConfig) -> CmdResult) = match &cli.command {
        Command::Solve(f) => (f, cmd_solve),
        Command::Table1(f) => (f, cmd_table1),
        Command::BetaSweep(f) => (f, cmd_beta_sweep),
        Command::MeshStudy(f) => (f, cmd_mesh_study),
        Command::Unsolvable(f) => (f, cmd_unsolvable),
        Command::Switching(f) => (f, cmd_switching),
        Command::Selftest(f) => (f, cmd_selftest),
    };
    let result = flags.resolve().map_err(Failure::from).and_then(|cfg| cmd(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

//! Benchmark harness around the `nsreg` solvers: builds one of the two
//! experiment families, runs the selected solver, and emits a
//! machine-readable report plus a one-row summary table.
//!
//! Exit codes: 0 first-order optimal, 1 iteration cap, 2 invalid
//! configuration or I/O failure, 3 stalled.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use nsreg::experiments::bpdn::{bpdn_lambda, bpdn_problem, gen_bpdn};
use nsreg::experiments::fh::{fh_problem, gen_fh};
use nsreg::history::{IterationRecord, SolveResult, SolveStatus};
use nsreg::inner::pg_step_size;
use nsreg::pg::{pg_solve, PgParams};
use nsreg::problem::{BallNorm, Regularizer, RegularizedProblem};
use nsreg::qn::{QnKind, QuasiNewtonOperator};
use nsreg::r2::{r2_solve, R2Params};
use nsreg::tr::{tr_solve, Subsolver, TrParams};

#[derive(Parser)]
#[command(name = "nsreg", version, about = "Nonsmooth regularized minimization benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an experiment instance, solve it, and write a report.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Experiment {
    /// Sparse recovery least squares with an orthonormal-row matrix.
    Bpdn,
    /// Neuron-model ODE parameter inversion.
    Fh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SolverName {
    /// Trust-region method with a quasi-Newton model.
    Tr,
    /// Adaptive quadratic regularization.
    R2,
    /// Fixed-step proximal gradient (baseline; needs a Lipschitz estimate).
    Pg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SubsolverName {
    Pg,
    R2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RegName {
    L1,
    L0,
    L0ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TrNorm {
    L2,
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    /// Full report (config echo, metrics, solution, history).
    Json,
    /// Per-iteration history table only.
    Csv,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON config file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    #[arg(long, value_enum)]
    solver: Option<SolverName>,
    /// Inner model solver for the trust-region method.
    #[arg(long, value_enum)]
    subsolver: Option<SubsolverName>,
    #[arg(long, value_enum)]
    reg: Option<RegName>,
    /// Trust-region ball norm (l2 is available for l1 only).
    #[arg(long = "tr-norm", value_enum)]
    tr_norm: Option<TrNorm>,
    /// Criticality tolerance on √ξ.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<u64>,
    #[arg(long = "inner-max-iter")]
    inner_max_iter: Option<u64>,
    /// Quasi-Newton memory.
    #[arg(long)]
    memory: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Regularization weight as a fraction of ‖Aᵀb‖∞ (sparse recovery only).
    #[arg(long = "lambda-scale")]
    lambda_scale: Option<f64>,
    /// Cardinality bound for the l0ball regularizer.
    #[arg(long = "k-ball")]
    k_ball: Option<usize>,
    /// Observation noise standard deviation.
    #[arg(long = "noise-std")]
    noise_std: Option<f64>,
    /// Measurement rows (sparse recovery).
    #[arg(long)]
    m: Option<usize>,
    /// Signal dimension (sparse recovery).
    #[arg(long)]
    n: Option<usize>,
    /// Ground-truth spike count (sparse recovery).
    #[arg(long)]
    spikes: Option<usize>,
    /// Lipschitz estimate for the fixed-step baseline.
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// Optional mirror of every run flag, as read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    experiment: Option<Experiment>,
    solver: Option<SolverName>,
    subsolver: Option<SubsolverName>,
    reg: Option<RegName>,
    tr_norm: Option<TrNorm>,
    eps: Option<f64>,
    max_iter: Option<u64>,
    inner_max_iter: Option<u64>,
    memory: Option<usize>,
    seed: Option<u64>,
    lambda_scale: Option<f64>,
    k_ball: Option<usize>,
    noise_std: Option<f64>,
    m: Option<usize>,
    n: Option<usize>,
    spikes: Option<usize>,
    lipschitz: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

/// Fully resolved configuration, echoed verbatim into the report.
#[derive(Debug, Serialize)]
struct ResolvedConfig {
    experiment: Experiment,
    solver: SolverName,
    subsolver: SubsolverName,
    reg: RegName,
    tr_norm: TrNorm,
    eps: f64,
    max_iter: u64,
    inner_max_iter: u64,
    memory: usize,
    seed: u64,
    lambda_scale: f64,
    k_ball: usize,
    noise_std: f64,
    m: usize,
    n: usize,
    spikes: usize,
    lipschitz: f64,
}

#[derive(Debug, Serialize)]
struct RunReport {
    config: ResolvedConfig,
    status: String,
    final_objective: f64,
    final_criticality: f64,
    iterations: usize,
    f_evals: u64,
    grad_evals: u64,
    prox_evals: u64,
    wall_time_s: f64,
    solution: Vec<f64>,
    /// `‖x − x_true‖₂` against the generator's ground truth.
    distance_to_truth: f64,
    /// `h(x)/λ` for the penalty regularizers, cardinality for the ball.
    sparsity: f64,
    history: Vec<IterationRecord>,
}

struct Invalid(String);

impl ResolvedConfig {
    fn resolve(args: &RunArgs, file: FileConfig) -> Result<Self, Invalid> {
        let experiment = args.experiment.or(file.experiment).unwrap_or(Experiment::Bpdn);
        let reg = args.reg.or(file.reg).unwrap_or(RegName::L1);
        let solver = args.solver.or(file.solver).unwrap_or(SolverName::Tr);
        let tr_norm = args.tr_norm.or(file.tr_norm).unwrap_or(match reg {
            RegName::L1 => TrNorm::L2,
            _ => TrNorm::Linf,
        });
        if tr_norm == TrNorm::L2 && reg != RegName::L1 {
            return Err(Invalid(
                "the Euclidean trust region is available for the l1 regularizer only; \
                 use --tr-norm linf"
                    .into(),
            ));
        }
        let config = Self {
            experiment,
            solver,
            subsolver: args.subsolver.or(file.subsolver).unwrap_or(SubsolverName::Pg),
            reg,
            tr_norm,
            eps: args.eps.or(file.eps).unwrap_or(1e-3),
            max_iter: args.max_iter.or(file.max_iter).unwrap_or(match solver {
                SolverName::Tr => 1000,
                SolverName::R2 => 10_000,
                SolverName::Pg => 100_000,
            }),
            inner_max_iter: args.inner_max_iter.or(file.inner_max_iter).unwrap_or(5000),
            memory: args.memory.or(file.memory).unwrap_or(5),
            seed: args.seed.or(file.seed).unwrap_or(0),
            lambda_scale: args.lambda_scale.or(file.lambda_scale).unwrap_or(0.1),
            k_ball: args.k_ball.or(file.k_ball).unwrap_or(10),
            noise_std: args
                .noise_std
                .or(file.noise_std)
                .unwrap_or(match experiment {
                    Experiment::Bpdn => 0.01,
                    Experiment::Fh => 0.1f64.sqrt(),
                }),
            m: args.m.or(file.m).unwrap_or(200),
            n: args.n.or(file.n).unwrap_or(512),
            spikes: args.spikes.or(file.spikes).unwrap_or(10),
            lipschitz: args.lipschitz.or(file.lipschitz).unwrap_or(1.0),
        };
        if !(config.eps > 0.0) {
            return Err(Invalid("eps must be positive".into()));
        }
        if config.memory == 0 {
            return Err(Invalid("memory must be at least 1".into()));
        }
        if !(config.lipschitz > 0.0) {
            return Err(Invalid("lipschitz must be positive".into()));
        }
        if !(config.noise_std >= 0.0) {
            return Err(Invalid("noise-std must be nonnegative".into()));
        }
        if config.experiment == Experiment::Bpdn
            && (config.spikes > config.n || config.m > config.n)
        {
            return Err(Invalid(
                "sparse recovery dims require spikes <= n and m <= n".into(),
            ));
        }
        Ok(config)
    }

    fn ball(&self) -> BallNorm {
        match self.tr_norm {
            TrNorm::L2 => BallNorm::L2,
            TrNorm::Linf => BallNorm::Linf,
        }
    }
}

/// Writes the history as CSV: fixed header, one row per record, floats at
/// 17 significant digits, empty `rho` for records without a ratio.
fn history_csv(history: &[IterationRecord]) -> String {
    let mut out = String::from("k,objective,criticality,radius_or_sigma,rho,f_evals,grad_evals,prox_evals\n");
    for rec in history {
        let rho = rec.rho.map(|r| format!("{r:.16e}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{},{},{}\n",
            rec.k,
            rec.objective,
            rec.criticality,
            rec.radius_or_sigma,
            rho,
            rec.f_evals,
            rec.grad_evals,
            rec.prox_evals,
        ));
    }
    out
}

/// One-row summary: solver, oracle tallies, recovery metrics, status.
fn summary_table(reports: &[&RunReport]) -> String {
    let mut rows = vec![[
        "solver".to_string(),
        "grad_evals".to_string(),
        "prox_evals".to_string(),
        "dist_to_truth".to_string(),
        "h/lambda".to_string(),
        "status".to_string(),
    ]];
    for report in reports {
        rows.push([
            format!("{:?}", report.config.solver).to_lowercase(),
            report.grad_evals.to_string(),
            report.prox_evals.to_string(),
            format!("{:.3e}", report.distance_to_truth),
            format!("{}", report.sparsity),
            report.status.clone(),
        ]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap())
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn solve(config: &ResolvedConfig) -> Result<(SolveResult, RegularizedProblem, DVector<f64>, f64), String> {
    // Regularization weight: scaled data-dependent for sparse recovery, the
    // plain count (weight 1) for the ODE inversion.
    let (problem, x_true, lambda) = match config.experiment {
        Experiment::Bpdn => {
            let inst = gen_bpdn(config.seed, config.m, config.n, config.spikes, config.noise_std);
            let lambda = bpdn_lambda(&inst.a, &inst.b, config.lambda_scale);
            let reg = match config.reg {
                RegName::L1 => Regularizer::l1(lambda),
                RegName::L0 => Regularizer::l0(lambda),
                RegName::L0ball => Regularizer::l0_ball(config.k_ball),
            };
            let problem = bpdn_problem(&inst, reg).map_err(|e| e.to_string())?;
            (problem, inst.x_true.clone(), lambda)
        }
        Experiment::Fh => {
            let inst = gen_fh(config.seed, config.noise_std).map_err(|e| e.to_string())?;
            let lambda = 1.0;
            let reg = match config.reg {
                RegName::L1 => Regularizer::l1(lambda),
                RegName::L0 => Regularizer::l0(lambda),
                RegName::L0ball => Regularizer::l0_ball(config.k_ball),
            };
            let problem = fh_problem(&inst, reg).map_err(|e| e.to_string())?;
            (problem, inst.x_true.clone(), lambda)
        }
    };

    let result = match config.solver {
        SolverName::Tr => {
            let kind = match config.experiment {
                Experiment::Bpdn => QnKind::Lsr1,
                Experiment::Fh => QnKind::Lbfgs,
            };
            let qn = QuasiNewtonOperator::with_memory(kind, x_true.len(), config.memory);
            let params = TrParams {
                eps: config.eps,
                max_iter: config.max_iter,
                inner_max_iter: config.inner_max_iter,
                ball: config.ball(),
                subsolver: match config.subsolver {
                    SubsolverName::Pg => Subsolver::Pg,
                    SubsolverName::R2 => Subsolver::R2,
                },
                ..Default::default()
            };
            tr_solve(&problem, qn, &params)
        }
        SolverName::R2 => r2_solve(
            &problem,
            &R2Params {
                eps: config.eps,
                max_iter: config.max_iter,
                ..Default::default()
            },
        ),
        SolverName::Pg => pg_solve(
            &problem,
            &PgParams {
                nu: pg_step_size(config.lipschitz, 0.9),
                eps: config.eps,
                max_iter: config.max_iter,
            },
        ),
    }
    .map_err(|e| e.to_string())?;
    Ok((result, problem, x_true, lambda))
}

fn run(args: RunArgs) -> ExitCode {
    let file = match &args.config {
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(text) => text,
                Err(e) => {
                    eprintln!("error: cannot read config {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            };
            match serde_json::from_str::<FileConfig>(&text) {
                Ok(file) => file,
                Err(e) => {
                    eprintln!("error: invalid config {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
        }
        None => FileConfig::default(),
    };
    let out_path = args.out.clone().or(file.out.clone());
    let format = args.format.or(file.format).unwrap_or(Format::Json);
    let config = match ResolvedConfig::resolve(&args, file) {
        Ok(config) => config,
        Err(Invalid(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    log::info!("running {config:?}");
    let started = Instant::now();
    let (result, problem, x_true, lambda) = match solve(&config) {
        Ok(parts) => parts,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let wall_time_s = started.elapsed().as_secs_f64();
    log::info!(
        "finished: {:?} after {} iterations in {wall_time_s:.3}s",
        result.status,
        result.iterations
    );

    let sparsity = match config.reg {
        RegName::L1 | RegName::L0 if lambda > 0.0 => {
            problem.reg.value(&result.x_final) / lambda
        }
        _ => result.x_final.iter().filter(|v| **v != 0.0).count() as f64,
    };
    let report = RunReport {
        status: format!("{:?}", result.status),
        final_objective: result.final_objective,
        final_criticality: result.final_criticality,
        iterations: result.iterations,
        f_evals: result.f_evals,
        grad_evals: result.grad_evals,
        prox_evals: result.prox_evals,
        wall_time_s,
        solution: result.x_final.iter().copied().collect(),
        distance_to_truth: (&result.x_final - &x_true).norm(),
        sparsity,
        history: result.history.clone(),
        config,
    };

    if let Some(path) = &out_path {
        let payload = match format {
            Format::Json => {
                let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
                text.push('\n');
                text
            }
            Format::Csv => history_csv(&report.history),
        };
        if let Err(e) = fs::write(path, payload) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    print!("{}", summary_table(&[&report]));

    match result.status {
        SolveStatus::FirstOrderOptimal => ExitCode::SUCCESS,
        SolveStatus::MaxIterations => ExitCode::from(1),
        SolveStatus::Stalled => ExitCode::from(3),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("NSREG_LOG")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(args),
    }
}

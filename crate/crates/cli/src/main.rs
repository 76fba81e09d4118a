//! `lab`: command-line driver for fourier-lab.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use fourier_lab::constants::{
    random_vectors, run_member, torus_partial_sum_ratio, Budget, ConstantEstimate, ConstantName,
    Experiment, Member, Method, SweepOptions, Witness,
};
use fourier_lab::experiments::{run_sweep, validate_config, Coordinate, Report, SweepConfig};
use fourier_lab::tower::{
    block_approximation, transfer_inequality_check, BlockApproximation, OrthonormalSystem,
    SystemOrdering, Tower, TransferReport,
};
use fourier_lab::{FiniteAbelianGroup, NormSpec, TransformPlan, VectorFunction, XVector};

/// Largest witness residual `constants check` accepts.
const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "lab",
    version,
    about = "Vector-valued Fourier analysis experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fourier transform of a function stored as JSON.
    Transform(TransformArgs),
    /// Estimate a norm constant.
    #[command(subcommand)]
    Constants(ConstantsCommand),
    /// Profinite tower utilities.
    #[command(subcommand)]
    Tower(TowerCommand),
    /// Check a sweep config and list every problem.
    Validate { config: PathBuf },
    /// Run a sweep config and write its outputs.
    Run { config: PathBuf },
}

#[derive(Args)]
struct TransformArgs {
    /// Expected group, e.g. Z8xZ4.
    #[arg(long)]
    group: Option<FiniteAbelianGroup>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the direct O(|G|^2) sum.
    #[arg(long)]
    naive: bool,
    #[arg(long)]
    inverse: bool,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl BudgetArgs {
    fn options(&self, vectors: Option<Vec<XVector>>) -> SweepOptions {
        SweepOptions {
            budget: Budget {
                iterations: self.iterations,
                restarts: self.restarts,
                samples: self.samples,
            },
            seed: self.seed,
            vectors,
            ..SweepOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum ConstantsCommand {
    /// Lower bound on the operator norm of the transform on L2(G, X).
    Opnorm {
        #[arg(long)]
        group: FiniteAbelianGroup,
        #[arg(long)]
        norm: NormSpec,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sign-average ratio of a vector family (standard basis by default).
    Khinchin {
        #[arg(long)]
        norm: NormSpec,
        /// JSON array of vectors; coordinates are numbers or [re, im].
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-sided ratio for the first characters of a group.
    Charsys {
        #[arg(long)]
        group: FiniteAbelianGroup,
        #[arg(long)]
        norm: NormSpec,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Torus partial-sum functional of degree n.
    Torus {
        #[arg(long)]
        norm: NormSpec,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Fixed quadrature size; adaptive when omitted.
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random search for the two-sided Khinchin constant.
    Probe {
        #[arg(long)]
        norm: NormSpec,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Same as `lab run`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-evaluate the witnesses of a report or a single estimate.
    Check {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Subcommand)]
enum TowerCommand {
    /// Write the Rademacher function r_index on Z/base^depth.
    Rademacher {
        #[arg(long)]
        base: usize,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        index: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Block approximation and transfer inequality for random vectors.
    Transfer {
        #[arg(long)]
        norm: NormSpec,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        depth: u32,
        #[arg(long, default_value = "walsh")]
        ordering: SystemOrdering,
        /// Number of vectors; defaults to min(dim, depth).
        #[arg(long)]
        count: Option<usize>,
        /// Override the system constant C.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize, Deserialize)]
struct EstimateOutput {
    #[serde(flatten)]
    estimate: ConstantEstimate,
    runtime_ms: f64,
}

#[derive(Serialize)]
struct TransferOutput {
    depth: u32,
    ordering: SystemOrdering,
    seed: u64,
    targets: Vec<u32>,
    xs: Vec<XVector>,
    approximation: BlockApproximation,
    report: TransferReport,
    runtime_ms: f64,
}

fn emit(out: Option<&Path>, json: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{json}\n"))
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn read_vectors(path: Option<&Path>) -> Result<Option<Vec<XVector>>> {
    let Some(path) = path else { return Ok(None) };
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let raw: Vec<Vec<Coordinate>> = serde_json::from_str(&text)
        .with_context(|| format!("{}: expected an array of vectors", path.display()))?;
    Ok(Some(
        raw.into_iter()
            .map(|v| XVector(v.into_iter().map(Into::into).collect()))
            .collect(),
    ))
}

fn estimate(
    experiment: Experiment,
    member: Member,
    options: &SweepOptions,
    out: Option<&Path>,
) -> Result<()> {
    let start = Instant::now();
    let estimate = run_member(experiment, &member, options)?;
    write_estimate(estimate, start, out)
}

fn write_estimate(estimate: ConstantEstimate, start: Instant, out: Option<&Path>) -> Result<()> {
    let output = EstimateOutput {
        estimate,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    emit(out, &serde_json::to_string_pretty(&output)?)
}

fn transform(args: TransformArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("cannot read {}", args.input.display()))?;
    let f: VectorFunction = serde_json::from_str(&text)
        .with_context(|| format!("{}: not a function", args.input.display()))?;
    if let Some(group) = &args.group {
        if group != f.group() {
            bail!("input lives on {} but --group is {group}", f.group());
        }
    }
    let plan = if args.naive {
        TransformPlan::naive(f.group())
    } else {
        TransformPlan::fast(f.group())
    };
    let g = if args.inverse {
        plan.idft(&f)?
    } else {
        plan.dft(&f)?
    };
    emit(args.out.as_deref(), &serde_json::to_string(&g)?)
}

fn constants(command: ConstantsCommand) -> Result<ExitCode> {
    match command {
        ConstantsCommand::Opnorm {
            group,
            norm,
            budget,
            out,
        } => estimate(
            Experiment::OperatorNorm,
            Member::new(Some(group), norm),
            &budget.options(None),
            out.as_deref(),
        )?,
        ConstantsCommand::Khinchin {
            norm,
            vectors,
            budget,
            out,
        } => estimate(
            Experiment::Khinchin,
            Member::new(None, norm),
            &budget.options(read_vectors(vectors.as_deref())?),
            out.as_deref(),
        )?,
        ConstantsCommand::Charsys {
            group,
            norm,
            vectors,
            budget,
            out,
        } => estimate(
            Experiment::CharacterSystem,
            Member::new(Some(group), norm),
            &budget.options(read_vectors(vectors.as_deref())?),
            out.as_deref(),
        )?,
        ConstantsCommand::Torus {
            norm,
            degree,
            vectors,
            points: Some(points),
            budget,
            out,
        } => {
            let start = Instant::now();
            let xs = read_vectors(vectors.as_deref())?.unwrap_or_else(|| {
                (0..2 * degree + 1)
                    .map(|i| XVector::basis(norm.dim(), i % norm.dim()))
                    .collect()
            });
            let ratio = torus_partial_sum_ratio(&norm, &xs, points)?;
            let estimate = ConstantEstimate {
                constant: ConstantName::TorusPartialSum,
                lower: ratio,
                upper: ratio,
                method: Method::Quadrature,
                samples: points as u64,
                seed: budget.seed,
                std_error: None,
                witness: Witness::Torus { norm, xs, points },
            };
            write_estimate(estimate, start, out.as_deref())?
        }
        ConstantsCommand::Torus {
            norm,
            degree,
            vectors,
            points: None,
            budget,
            out,
        } => {
            let mut member = Member::new(None, norm);
            member.degree = Some(degree);
            estimate(
                Experiment::Torus,
                member,
                &budget.options(read_vectors(vectors.as_deref())?),
                out.as_deref(),
            )?
        }
        ConstantsCommand::Probe { norm, budget, out } => estimate(
            Experiment::Probe,
            Member::new(None, norm),
            &budget.options(None),
            out.as_deref(),
        )?,
        ConstantsCommand::Sweep { config } => return run(&config),
        ConstantsCommand::Check { report } => return check(&report),
    }
    Ok(ExitCode::SUCCESS)
}

fn check(path: &Path) -> Result<ExitCode> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let estimates: Vec<(String, ConstantEstimate)> = if value.get("rows").is_some() {
        let report: Report = serde_json::from_value(value)?;
        report
            .rows
            .into_iter()
            .map(|r| (format!("member {}", r.member_id), r.estimate))
            .collect()
    } else {
        let single: EstimateOutput = serde_json::from_value(value)?;
        vec![("estimate".into(), single.estimate)]
    };
    let mut ok = true;
    for (label, est) in &estimates {
        let residual = est.witness_residual()?;
        let pass = residual <= CHECK_TOLERANCE;
        ok &= pass;
        println!(
            "{} {label}: {} lower {} residual {residual:.3e}",
            if pass { "OK  " } else { "FAIL" },
            est.constant.as_str(),
            est.lower
        );
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn tower(command: TowerCommand) -> Result<()> {
    match command {
        TowerCommand::Rademacher {
            base,
            depth,
            index,
            out,
        } => {
            let tower = Tower::new(base, depth)?;
            let r = tower.rademacher_function(index)?;
            emit(out.as_deref(), &serde_json::to_string(&r)?)
        }
        TowerCommand::Transfer {
            norm,
            eps,
            seed,
            depth,
            ordering,
            count,
            c,
            out,
        } => {
            let start = Instant::now();
            let tower = Tower::new(2, depth)?;
            let n = count.unwrap_or(norm.dim().min(depth as usize));
            let xs = random_vectors(norm.dim(), n, seed);
            let targets: Vec<u32> = (1..=n as u32).collect();
            let system = OrthonormalSystem::ordered(&tower, ordering)?;
            let approximation = block_approximation(&tower, &system, &targets, eps)?;
            let report = transfer_inequality_check(&tower, &norm, &xs, &approximation, c)?;
            let output = TransferOutput {
                depth,
                ordering,
                seed,
                targets,
                xs,
                approximation,
                report,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            };
            emit(out.as_deref(), &serde_json::to_string_pretty(&output)?)
        }
    }
}

fn validate(path: &Path) -> Result<ExitCode> {
    let report = validate_config(path)?;
    if report.is_valid() {
        println!("{}: ok", path.display());
        return Ok(ExitCode::SUCCESS);
    }
    for issue in &report.issues {
        eprintln!("{}: {issue}", path.display());
    }
    Ok(ExitCode::FAILURE)
}

fn run(path: &Path) -> Result<ExitCode> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let config = match SweepConfig::parse(&text) {
        Ok(config) => config,
        Err(issue) => {
            eprintln!("{}: {issue}", path.display());
            return Ok(ExitCode::FAILURE);
        }
    };
    let issues = config.issues();
    if !issues.is_empty() {
        for issue in &issues {
            eprintln!("{}: {issue}", path.display());
        }
        return Ok(ExitCode::FAILURE);
    }
    let report = run_sweep(&config)?;
    report.write_outputs()?;
    if config.output.json.is_none() && config.output.csv.is_none() {
        print!("{}", report.to_csv()?);
    } else {
        eprintln!(
            "{} rows in {:.1} ms",
            report.rows.len(),
            report.timing.total_ms
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Transform(args) => transform(args).map(|()| ExitCode::SUCCESS),
        Command::Constants(c) => constants(c),
        Command::Tower(t) => tower(t).map(|()| ExitCode::SUCCESS),
        Command::Validate { config } => validate(&config),
        Command::Run { config } => run(&config),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}

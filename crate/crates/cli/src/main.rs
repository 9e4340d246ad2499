use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lvem_cli::config::{resolve, FileConfig};
use lvem_cli::meshio::{load_mesh, save_mesh, save_solution, SolutionFile};
use lvem_cli::plot::convergence_svg;
use lvem_cli::study::{
    fit_bases_parallel, parse_cells, records_to_csv, run_convergence, timing_compare,
    timing_to_csv, StudyOptions,
};
use lvem_cli::{CliError, CliResult};
use lvem_core::analyze::{evaluate_solution, solve_linear, Backend};
use lvem_core::assembly::assemble_global;
use lvem_core::geometry::generate_cvt;
use lvem_core::lightning::FitConfig;
use lvem_core::problems::{problem, ProblemId};
use lvem_core::vanilla::assemble_global_vanilla;

/// Polygonal-mesh PDE solver with a rational-basis backend.
#[derive(Parser)]
#[command(name = "lvem", version, about)]
struct Cli {
    /// Config file of `key = value` lines (flags take precedence)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Cap the worker-thread count (default: machine parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a CVT polygonal mesh of the unit square
    Mesh(MeshArgs),
    /// Solve one problem on a mesh file
    Solve(SolveArgs),
    /// Run a convergence study over a sequence of mesh sizes
    Converge(ConvergeArgs),
    /// Compare per-element assembly time of the two backends
    Compare(CompareArgs),
}

#[derive(Args)]
struct MeshArgs {
    /// Number of cells
    #[arg(long)]
    cells: Option<usize>,
    /// RNG seed for the initial generators
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum Lloyd relaxation iterations
    #[arg(long = "lloyd_iters")]
    lloyd_iters: Option<usize>,
    /// Lloyd stopping tolerance on generator movement
    #[arg(long = "move_tol")]
    move_tol: Option<f64>,
    /// Output mesh file (JSON)
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Input mesh file (JSON)
    #[arg(long)]
    mesh: PathBuf,
    /// Problem: laplace | diffusion_reaction | adr
    #[arg(long)]
    problem: Option<ProblemId>,
    /// Backend: lightning | vanilla
    #[arg(long)]
    backend: Option<Backend>,
    /// Basis-fit boundary tolerance (lightning backend)
    #[arg(long = "eps_fit")]
    eps_fit: Option<f64>,
    /// Quadrature polynomial degree
    #[arg(long = "quad_degree")]
    quad_degree: Option<usize>,
    /// Corner-grading levels of the quadrature rule
    #[arg(long)]
    grading: Option<usize>,
    /// Relative residual tolerance of the linear solve
    #[arg(long)]
    rtol: Option<f64>,
    /// Evaluate the solution at a point, e.g. --probe 0.5,0.5
    #[arg(long)]
    probe: Option<String>,
    /// Output solution file (JSON)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Comma-separated mesh sizes, e.g. 4,16,64
    #[arg(long)]
    cells: Option<String>,
    #[arg(long)]
    problem: Option<ProblemId>,
    #[arg(long)]
    backend: Option<Backend>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "eps_fit")]
    eps_fit: Option<f64>,
    #[arg(long = "lloyd_iters")]
    lloyd_iters: Option<usize>,
    #[arg(long = "move_tol")]
    move_tol: Option<f64>,
    #[arg(long = "quad_degree")]
    quad_degree: Option<usize>,
    #[arg(long)]
    grading: Option<usize>,
    #[arg(long)]
    rtol: Option<f64>,
    /// Output CSV file
    #[arg(short, long)]
    output: PathBuf,
    /// Also emit a log-log convergence chart
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated mesh sizes, e.g. 4,16,64
    #[arg(long)]
    cells: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV file
    #[arg(short, long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let threads = resolve(cli.threads, &cfg, "threads", 0)?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::validation(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Mesh(args) => cmd_mesh(args, &cfg),
        Command::Solve(args) => cmd_solve(args, &cfg),
        Command::Converge(args) => cmd_converge(args, &cfg),
        Command::Compare(args) => cmd_compare(args, &cfg),
    }
}

fn study_options(
    problem: Option<ProblemId>,
    backend: Option<Backend>,
    seed: Option<u64>,
    eps_fit: Option<f64>,
    lloyd_iters: Option<usize>,
    move_tol: Option<f64>,
    quad_degree: Option<usize>,
    grading: Option<usize>,
    rtol: Option<f64>,
    cfg: &FileConfig,
) -> CliResult<StudyOptions> {
    let d = StudyOptions::default();
    let opts = StudyOptions {
        problem: resolve(problem, cfg, "problem", d.problem)?,
        backend: resolve(backend, cfg, "backend", d.backend)?,
        seed: resolve(seed, cfg, "seed", d.seed)?,
        eps_fit: resolve(eps_fit, cfg, "eps_fit", d.eps_fit)?,
        lloyd_iters: resolve(lloyd_iters, cfg, "lloyd_iters", d.lloyd_iters)?,
        move_tol: resolve(move_tol, cfg, "move_tol", d.move_tol)?,
        quad_degree: resolve(quad_degree, cfg, "quad_degree", d.quad_degree)?,
        grading: resolve(grading, cfg, "grading", d.grading)?,
        rtol: resolve(rtol, cfg, "rtol", d.rtol)?,
    };
    if opts.eps_fit <= 0.0 {
        return Err(CliError::validation("--eps_fit must be positive"));
    }
    if opts.rtol <= 0.0 {
        return Err(CliError::validation("--rtol must be positive"));
    }
    Ok(opts)
}

fn cmd_mesh(args: MeshArgs, cfg: &FileConfig) -> CliResult<()> {
    let cells = resolve(args.cells, cfg, "cells", 64)?;
    if cells == 0 {
        return Err(CliError::validation("--cells must be at least 1"));
    }
    let seed = resolve(args.seed, cfg, "seed", 0)?;
    let lloyd_iters = resolve(args.lloyd_iters, cfg, "lloyd_iters", 100)?;
    let move_tol = resolve(args.move_tol, cfg, "move_tol", 1e-8)?;
    let mesh = generate_cvt(cells, seed, lloyd_iters, move_tol)?;
    save_mesh(&mesh, &args.output)?;
    println!(
        "wrote {} ({} cells, {} vertices, h_max = {:.4})",
        args.output.display(),
        mesh.num_cells(),
        mesh.vertices().len(),
        mesh.h_max()
    );
    Ok(())
}

fn parse_probe(text: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || CliError::validation(format!("--probe: expected 'x,y', got '{text}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let x: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let y: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    Ok((x, y))
}

fn cmd_solve(args: SolveArgs, cfg: &FileConfig) -> CliResult<()> {
    let opts = study_options(
        args.problem,
        args.backend,
        None,
        args.eps_fit,
        None,
        None,
        args.quad_degree,
        args.grading,
        args.rtol,
        cfg,
    )?;
    let mesh = load_mesh(&args.mesh)?;
    let prob = problem(opts.problem);
    let full = match opts.backend {
        Backend::Lightning => {
            let bases = fit_bases_parallel(&mesh, &FitConfig::with_eps(opts.eps_fit))?;
            let sys = assemble_global(&mesh, &bases, &prob, opts.quad_degree, opts.grading)?;
            let free = solve_linear(&sys, opts.rtol)?;
            let full = sys.expand_solution(&free);
            if let Some(text) = &args.probe {
                let (x, y) = parse_probe(text)?;
                let value = evaluate_solution(&mesh, &bases, &full, x, y)?;
                println!("u({x}, {y}) = {value:.12e}");
            }
            full
        }
        Backend::Vanilla => {
            if args.probe.is_some() {
                return Err(CliError::validation(
                    "--probe is unsupported on the vanilla backend: pointwise \
                     reconstruction of the virtual functions is not implemented",
                ));
            }
            let sys = assemble_global_vanilla(&mesh, &prob, opts.quad_degree)?;
            let free = solve_linear(&sys, opts.rtol)?;
            sys.expand_solution(&free)
        }
    };
    if let Some(path) = &args.output {
        let sol = SolutionFile {
            problem: opts.problem.name().to_string(),
            backend: opts.backend.name().to_string(),
            dofs: full.iter().copied().collect(),
        };
        save_solution(&sol, path)?;
        println!("wrote {} ({} dofs)", path.display(), sol.dofs.len());
    }
    Ok(())
}

fn cmd_converge(args: ConvergeArgs, cfg: &FileConfig) -> CliResult<()> {
    let cells_text = resolve(args.cells, cfg, "cells", "4,16,64".to_string())?;
    let cell_counts = parse_cells(&cells_text)?;
    let opts = study_options(
        args.problem,
        args.backend,
        args.seed,
        args.eps_fit,
        args.lloyd_iters,
        args.move_tol,
        args.quad_degree,
        args.grading,
        args.rtol,
        cfg,
    )?;
    let records = run_convergence(&cell_counts, &opts)?;
    std::fs::write(&args.output, records_to_csv(&records))?;
    println!("wrote {} ({} rows)", args.output.display(), records.len());
    if let Some(path) = &args.plot {
        std::fs::write(path, convergence_svg(&records))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs, cfg: &FileConfig) -> CliResult<()> {
    let cells_text = resolve(args.cells, cfg, "cells", "4,16,64".to_string())?;
    let cell_counts = parse_cells(&cells_text)?;
    let seed = resolve(args.seed, cfg, "seed", 0)?;
    let rows = timing_compare(&cell_counts, seed)?;
    std::fs::write(&args.output, timing_to_csv(&rows))?;
    println!("wrote {} ({} rows)", args.output.display(), rows.len());
    Ok(())
}

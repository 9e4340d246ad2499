//! Convergence studies and the per-element assembly timing comparison.

use std::time::Instant;

use lvem_core::analyze::{
    fill_rates, lightning_errors, solve_linear, Backend, ConvergenceRecord,
};
use lvem_core::assembly::{assemble_global, local_matrices, ASSEMBLY_REFINE_LEVELS};
use lvem_core::geometry::{generate_cvt, Mesh};
use lvem_core::lightning::{fit_element_basis, ElementBasis, FitConfig};
use lvem_core::problems::{problem, ProblemId};
use lvem_core::quadrature::{polygon_rule_refined, DEFAULT_DEGREE, DEFAULT_GRADING};
use lvem_core::vanilla::{assemble_global_vanilla, local_system_vanilla, vanilla_errors};
use rayon::prelude::*;

use crate::CliResult;

#[derive(Debug, Clone)]
pub struct StudyOptions {
    pub problem: ProblemId,
    pub backend: Backend,
    pub seed: u64,
    pub eps_fit: f64,
    pub lloyd_iters: usize,
    pub move_tol: f64,
    pub quad_degree: usize,
    pub grading: usize,
    pub rtol: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            problem: ProblemId::Laplace,
            backend: Backend::Lightning,
            seed: 0,
            eps_fit: 1e-8,
            lloyd_iters: 100,
            move_tol: 1e-8,
            quad_degree: DEFAULT_DEGREE,
            grading: DEFAULT_GRADING,
            rtol: 1e-12,
        }
    }
}

/// Fit every cell's basis, distributing elements over the rayon pool.
pub fn fit_bases_parallel(mesh: &Mesh, cfg: &FitConfig) -> lvem_core::Result<Vec<ElementBasis>> {
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| fit_element_basis(&mesh.cell_polygon(c), cfg))
        .collect()
}

/// Solve one problem on one mesh and report errors and wall-clock timings.
/// Assembly time includes basis fitting on the lightning backend — that is
/// where its cost lives; mesh generation and error norms are untimed.
pub fn solve_mesh(mesh: &Mesh, opts: &StudyOptions) -> CliResult<ConvergenceRecord> {
    let prob = problem(opts.problem);
    let (e_l2, e_h1, assembly_time_s, solve_time_s) = match opts.backend {
        Backend::Lightning => {
            let cfg = FitConfig::with_eps(opts.eps_fit);
            let t0 = Instant::now();
            let bases = fit_bases_parallel(mesh, &cfg)?;
            let sys = assemble_global(mesh, &bases, &prob, opts.quad_degree, opts.grading)?;
            let t_asm = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let free = solve_linear(&sys, opts.rtol)?;
            let t_solve = t1.elapsed().as_secs_f64();
            let full = sys.expand_solution(&free);
            let (l2, h1) =
                lightning_errors(mesh, &bases, &full, &prob, opts.quad_degree, opts.grading)?;
            (l2, h1, t_asm, t_solve)
        }
        Backend::Vanilla => {
            let t0 = Instant::now();
            let sys = assemble_global_vanilla(mesh, &prob, opts.quad_degree)?;
            let t_asm = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let free = solve_linear(&sys, opts.rtol)?;
            let t_solve = t1.elapsed().as_secs_f64();
            let full = sys.expand_solution(&free);
            let (l2, h1) = vanilla_errors(mesh, &full, &prob, opts.quad_degree)?;
            (l2, h1, t_asm, t_solve)
        }
    };
    Ok(ConvergenceRecord {
        n_cells: mesh.num_cells(),
        h_max: mesh.h_max(),
        e_l2,
        e_h1,
        assembly_time_s,
        solve_time_s,
        rate_l2: None,
        rate_h1: None,
    })
}

/// Run the study over a sequence of mesh sizes and fill convergence rates.
pub fn run_convergence(
    cell_counts: &[usize],
    opts: &StudyOptions,
) -> CliResult<Vec<ConvergenceRecord>> {
    let mut records = Vec::with_capacity(cell_counts.len());
    for &n in cell_counts {
        let mesh = generate_cvt(n, opts.seed, opts.lloyd_iters, opts.move_tol)?;
        records.push(solve_mesh(&mesh, opts)?);
    }
    fill_rates(&mut records);
    Ok(records)
}

/// CSV with the exact column contract of the studies.
pub fn records_to_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from("n_cells,h_max,e_L2,e_H1,rate_L2,rate_H1,assembly_s,solve_s\n");
    for r in records {
        let rate = |v: Option<f64>| v.map(|r| format!("{r:.4}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{:.6},{:.6e},{:.6e},{},{},{:.6},{:.6}\n",
            r.n_cells,
            r.h_max,
            r.e_l2,
            r.e_h1,
            rate(r.rate_l2),
            rate(r.rate_h1),
            r.assembly_time_s,
            r.solve_time_s
        ));
    }
    out
}

/// One row of the backend timing comparison.
#[derive(Debug, Clone)]
pub struct TimingRow {
    pub n_cells: usize,
    pub vanilla_avg_s: f64,
    pub lightning_avg_s: f64,
    /// Elements averaged over (one sample per cell).
    pub samples: usize,
}

/// Fit tolerance used by the timing comparison, tightened with the mesh
/// size: on finer meshes the basis must be solved to greater accuracy for
/// the fit error to stay below the discretization error, which is what
/// makes the rational backend's per-element cost grow with the mesh.
pub fn timing_eps(h_max: f64) -> f64 {
    (1e-2 * h_max.powi(4)).max(1e-9)
}

/// Average wall-clock per-element local-assembly time for both backends.
/// Sampled sequentially per element (serial-equivalent time); the advective
/// model problem is used so that every local term is exercised.
pub fn timing_compare(cell_counts: &[usize], seed: u64) -> CliResult<Vec<TimingRow>> {
    let prob = problem(ProblemId::Adr);
    let mut rows = Vec::with_capacity(cell_counts.len());
    for &n in cell_counts {
        let mesh = generate_cvt(n, seed, 100, 1e-8)?;
        let cfg = FitConfig::with_eps(timing_eps(mesh.h_max()));
        // repeat small meshes so short timings are measured over enough work
        let reps = (64 / n).max(1);

        let t0 = Instant::now();
        for _ in 0..reps {
            for c in 0..mesh.num_cells() {
                let poly = mesh.cell_polygon(c);
                let (a, f) = local_system_vanilla(&poly, &prob, DEFAULT_DEGREE)?;
                std::hint::black_box((a, f));
            }
        }
        let vanilla_avg_s = t0.elapsed().as_secs_f64() / (reps * n) as f64;

        let t0 = Instant::now();
        for _ in 0..reps {
            for c in 0..mesh.num_cells() {
                let poly = mesh.cell_polygon(c);
                let basis = fit_element_basis(&poly, &cfg)?;
                let quad = polygon_rule_refined(
                    &poly,
                    DEFAULT_DEGREE,
                    DEFAULT_GRADING,
                    ASSEMBLY_REFINE_LEVELS,
                )?;
                let local = local_matrices(&basis, &prob, &quad)?;
                std::hint::black_box(local);
            }
        }
        let lightning_avg_s = t0.elapsed().as_secs_f64() / (reps * n) as f64;

        rows.push(TimingRow {
            n_cells: n,
            vanilla_avg_s,
            lightning_avg_s,
            samples: n,
        });
    }
    Ok(rows)
}

pub fn timing_to_csv(rows: &[TimingRow]) -> String {
    let mut out = String::from("n_cells,vanilla_avg_s,lightning_avg_s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6e},{:.6e}\n",
            r.n_cells, r.vanilla_avg_s, r.lightning_avg_s
        ));
    }
    out
}

/// Parse a comma-separated cell-count list such as `4,16,64`.
pub fn parse_cells(text: &str) -> CliResult<Vec<usize>> {
    let cells: Result<Vec<usize>, _> = text.split(',').map(|s| s.trim().parse()).collect();
    let cells =
        cells.map_err(|_| crate::CliError::validation(format!("--cells: cannot parse '{text}'")))?;
    if cells.is_empty() || cells.contains(&0) {
        return Err(crate::CliError::validation(
            "--cells must list positive cell counts",
        ));
    }
    Ok(cells)
}

//! Linear solve, broken error norms in the true basis, pointwise solution
//! evaluation and convergence-rate bookkeeping.

use alloc::string::ToString;
use alloc::vec::Vec;

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::assembly::{self, GlobalSystem, PDEProblem};
use crate::geometry::{Mesh, Point};
use crate::lightning::{fit_element_basis, ElementBasis, FitConfig};
use crate::{Error, Result};

/// Which discretisation assembles the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Fitted rational basis, broken form, direct quadrature.
    Lightning,
    /// Baseline k=1 projector/stabilisation method.
    Vanilla,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Lightning => "lightning",
            Backend::Vanilla => "vanilla",
        }
    }
}

impl core::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lightning" => Ok(Backend::Lightning),
            "vanilla" => Ok(Backend::Vanilla),
            other => Err(Error::Precondition(alloc::format!(
                "unknown backend '{other}' (expected lightning or vanilla)"
            ))),
        }
    }
}

/// Direct dense factorization of the free system with a residual contract:
/// the returned vector satisfies `|Ax - b| / |b| <= rtol`.
///
/// At desk scale (at most ~1100 free DOFs here) a dense LU of the sparse
/// matrix is both the fastest and the most reliable option.
pub fn solve_linear(sys: &GlobalSystem, rtol: f64) -> Result<DVector<f64>> {
    let n = sys.num_free();
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let dense = sys.matrix.to_dense();
    let lu = dense.lu();
    let x = lu
        .solve(&sys.rhs)
        .ok_or_else(|| Error::SolverFailure("singular system matrix".to_string()))?;
    let residual = (sys.matrix.mul_vec(&x) - &sys.rhs).norm();
    let scale = sys.rhs.norm();
    let rel = if scale > 0.0 { residual / scale } else { residual };
    if !rel.is_finite() || rel > rtol {
        return Err(Error::SolverFailure(alloc::format!(
            "relative residual {rel:e} exceeds tolerance {rtol:e}"
        )));
    }
    Ok(x)
}

/// Fit the rational basis of every cell of a mesh.
pub fn fit_mesh_bases(mesh: &Mesh, cfg: &FitConfig) -> Result<Vec<ElementBasis>> {
    (0..mesh.num_cells())
        .map(|c| fit_element_basis(&mesh.cell_polygon(c), cfg))
        .collect()
}

/// Broken error norms of the true discrete function `u_h = sum u_i phi_i`
/// against the problem's exact solution, by per-element quadrature and
/// without any polynomial projection.
pub fn lightning_errors(
    mesh: &Mesh,
    bases: &[ElementBasis],
    full_dofs: &DVector<f64>,
    prob: &PDEProblem,
    quad_degree: usize,
    grading_levels: usize,
) -> Result<(f64, f64)> {
    let exact_u = prob.exact_u.ok_or(Error::MissingExactSolution)?;
    let exact_grad = prob.exact_grad_u.ok_or(Error::MissingExactSolution)?;
    if bases.len() != mesh.num_cells() {
        return Err(Error::Precondition(
            "one element basis per cell required".to_string(),
        ));
    }
    let mut l2_sq = 0.0;
    let mut h1_sq = 0.0;
    for (c, basis) in bases.iter().enumerate() {
        let cell = &mesh.cells()[c];
        let quad = crate::quadrature::polygon_rule(&basis.element(), quad_degree, grading_levels)?;
        for (&p, &w) in quad.points.iter().zip(&quad.weights) {
            let mut uh = 0.0;
            let mut gx = 0.0;
            let mut gy = 0.0;
            for (i, func) in basis.functions().iter().enumerate() {
                let (v, dx, dy) = func.evaluate_with_gradient(p);
                let coeff = full_dofs[cell[i]];
                uh += coeff * v;
                gx += coeff * dx;
                gy += coeff * dy;
            }
            let du = exact_u(p.x, p.y) - uh;
            let (ex, ey) = exact_grad(p.x, p.y);
            l2_sq += w * du * du;
            h1_sq += w * ((ex - gx) * (ex - gx) + (ey - gy) * (ey - gy));
        }
    }
    Ok((l2_sq.sqrt(), h1_sq.sqrt()))
}

/// Pointwise value of the discrete solution through the true basis of the
/// cell containing `(x, y)`.
pub fn evaluate_solution(
    mesh: &Mesh,
    bases: &[ElementBasis],
    full_dofs: &DVector<f64>,
    x: f64,
    y: f64,
) -> Result<f64> {
    let c = mesh
        .locate(Point::new(x, y))
        .ok_or(Error::OutsideDomain { x, y })?;
    let cell = &mesh.cells()[c];
    Ok(bases[c]
        .functions()
        .iter()
        .enumerate()
        .map(|(i, func)| full_dofs[cell[i]] * func.evaluate(Point::new(x, y)))
        .sum())
}

/// Assemble and solve with the fitted-basis backend, returning the full
/// per-vertex DOF vector (boundary vertices carry the interpolated data).
pub fn solve_lightning(
    mesh: &Mesh,
    bases: &[ElementBasis],
    prob: &PDEProblem,
    quad_degree: usize,
    grading_levels: usize,
    rtol: f64,
) -> Result<DVector<f64>> {
    let sys = assembly::assemble_global(mesh, bases, prob, quad_degree, grading_levels)?;
    let free = solve_linear(&sys, rtol)?;
    Ok(sys.expand_solution(&free))
}

/// Assemble and solve with the baseline backend.
pub fn solve_vanilla(
    mesh: &Mesh,
    prob: &PDEProblem,
    quad_degree: usize,
    rtol: f64,
) -> Result<DVector<f64>> {
    let sys = crate::vanilla::assemble_global_vanilla(mesh, prob, quad_degree)?;
    let free = solve_linear(&sys, rtol)?;
    Ok(sys.expand_solution(&free))
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub n_cells: usize,
    pub h_max: f64,
    pub e_l2: f64,
    pub e_h1: f64,
    pub assembly_time_s: f64,
    pub solve_time_s: f64,
    pub rate_l2: Option<f64>,
    pub rate_h1: Option<f64>,
}

/// Fill `rate_*` between consecutive records:
/// `rate = log(e_prev / e_cur) / log(h_prev / h_cur)`.
pub fn fill_rates(records: &mut [ConvergenceRecord]) {
    for i in 1..records.len() {
        let h = records[i - 1].h_max / records[i].h_max;
        if h <= 0.0 || h == 1.0 {
            continue;
        }
        let lh = h.ln();
        records[i].rate_l2 = Some((records[i - 1].e_l2 / records[i].e_l2).ln() / lh);
        records[i].rate_h1 = Some((records[i - 1].e_h1 / records[i].e_h1).ln() / lh);
    }
}

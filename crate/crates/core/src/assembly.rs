//! Element-local matrices using the fitted rational basis and broken-form
//! global assembly with Dirichlet elimination.
//!
//! Because the basis functions are known pointwise, every local term —
//! including the advection matrix and the load vector — is computed by direct
//! quadrature; no projector, stabilisation or skew-symmetrisation is needed
//! on this path.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Mesh;
use crate::lightning::ElementBasis;
use crate::quadrature::QuadratureRule;
use crate::{Error, Result};

/// Uniform sub-triangle refinement used when assembling with the rational
/// basis. The outermost poles sit roughly one element diameter outside each
/// corner, close enough to the fan triangles that one extra subdivision
/// buys several digits in the stiffness entries.
pub const ASSEMBLY_REFINE_LEVELS: usize = 1;

/// Scalar coefficient or data field on the domain.
pub type ScalarField = fn(f64, f64) -> f64;
/// Vector field on the domain.
pub type VectorField = fn(f64, f64) -> (f64, f64);

/// Advection-diffusion-reaction problem data:
/// `-eps Δu + beta . grad u + gamma u = f`, `u = g` on the boundary.
#[derive(Debug, Clone)]
pub struct PDEProblem {
    pub epsilon: f64,
    pub gamma: ScalarField,
    /// Advective field; must be divergence-free.
    pub beta: Option<VectorField>,
    /// Analytic divergence of `beta`, written term by term so that the
    /// spot-check below sees the actual cancellation.
    pub beta_div: Option<ScalarField>,
    pub f: ScalarField,
    /// Dirichlet boundary data.
    pub g: ScalarField,
    pub exact_u: Option<ScalarField>,
    pub exact_grad_u: Option<VectorField>,
}

impl PDEProblem {
    /// Check coefficient preconditions: positive diffusion and, when an
    /// advective field is present, |div beta| <= 1e-10 at 100 random points.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Precondition(format!(
                "diffusion coefficient must be positive, got {}",
                self.epsilon
            )));
        }
        if self.beta.is_some() {
            let div = self.beta_div.ok_or_else(|| {
                Error::Precondition(
                    "advective field supplied without its analytic divergence".to_string(),
                )
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..100 {
                let x: f64 = rng.gen();
                let y: f64 = rng.gen();
                let d = div(x, y);
                if d.abs() > 1e-10 {
                    return Err(Error::Precondition(format!(
                        "advective field is not divergence-free: div beta({x}, {y}) = {d:e}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Local matrices of one element in the fitted basis.
#[derive(Debug, Clone)]
pub struct LocalMatrices {
    pub k_stiff: DMatrix<f64>,
    pub m_mass: DMatrix<f64>,
    pub b_adv: DMatrix<f64>,
    pub f_load: DVector<f64>,
}

/// Basis values and gradients tabulated at the quadrature points of one
/// element. Computing these once per element and reusing them across all
/// four local terms is the main cost saving of the assembly.
pub struct TabulatedBasis {
    pub values: Vec<Vec<f64>>,
    pub grad_x: Vec<Vec<f64>>,
    pub grad_y: Vec<Vec<f64>>,
}

/// Evaluate every basis function of the element at every quadrature point.
pub fn tabulate_basis(basis: &ElementBasis, quad: &QuadratureRule) -> TabulatedBasis {
    let nq = quad.len();
    let nk = basis.functions().len();
    let mut values = vec![vec![0.0; nq]; nk];
    let mut grad_x = vec![vec![0.0; nq]; nk];
    let mut grad_y = vec![vec![0.0; nq]; nk];
    for (i, func) in basis.functions().iter().enumerate() {
        for (q, &p) in quad.points.iter().enumerate() {
            let (v, gx, gy) = func.evaluate_with_gradient(p);
            values[i][q] = v;
            grad_x[i][q] = gx;
            grad_y[i][q] = gy;
        }
    }
    TabulatedBasis {
        values,
        grad_x,
        grad_y,
    }
}

/// Direct quadrature of the four local terms.
pub fn local_matrices(
    basis: &ElementBasis,
    prob: &PDEProblem,
    quad: &QuadratureRule,
) -> Result<LocalMatrices> {
    let area = basis.element().area();
    if (quad.total_weight() - area).abs() > 1e-8 * area {
        return Err(Error::Precondition(
            "quadrature rule does not match the basis element".to_string(),
        ));
    }
    let tab = tabulate_basis(basis, quad);
    local_matrices_tabulated(basis, prob, quad, &tab)
}

/// Same as [`local_matrices`] but reusing a precomputed tabulation, so
/// callers that also need the basis values elsewhere pay for them once.
pub fn local_matrices_tabulated(
    basis: &ElementBasis,
    prob: &PDEProblem,
    quad: &QuadratureRule,
    tab: &TabulatedBasis,
) -> Result<LocalMatrices> {
    prob.validate()?;
    let nk = basis.functions().len();
    let nq = quad.len();
    let mut k_stiff = DMatrix::zeros(nk, nk);
    let mut m_mass = DMatrix::zeros(nk, nk);
    let mut b_adv = DMatrix::zeros(nk, nk);
    let mut f_load = DVector::zeros(nk);

    let gamma_q: Vec<f64> = quad
        .points
        .iter()
        .map(|p| (prob.gamma)(p.x, p.y))
        .collect();
    let beta_q: Option<Vec<(f64, f64)>> = prob
        .beta
        .map(|beta| quad.points.iter().map(|p| beta(p.x, p.y)).collect());
    let f_q: Vec<f64> = quad.points.iter().map(|p| (prob.f)(p.x, p.y)).collect();
    let w = &quad.weights;

    for i in 0..nk {
        for j in i..nk {
            let mut k = 0.0;
            let mut m = 0.0;
            for q in 0..nq {
                k += w[q] * (tab.grad_x[i][q] * tab.grad_x[j][q] + tab.grad_y[i][q] * tab.grad_y[j][q]);
                m += w[q] * gamma_q[q] * tab.values[i][q] * tab.values[j][q];
            }
            k_stiff[(i, j)] = prob.epsilon * k;
            k_stiff[(j, i)] = prob.epsilon * k;
            m_mass[(i, j)] = m;
            m_mass[(j, i)] = m;
        }
        let mut fl = 0.0;
        for q in 0..nq {
            fl += w[q] * f_q[q] * tab.values[i][q];
        }
        f_load[i] = fl;
    }
    if let Some(bq) = &beta_q {
        for i in 0..nk {
            for j in 0..nk {
                let mut b = 0.0;
                for q in 0..nq {
                    let (bx, by) = bq[q];
                    b += w[q] * (bx * tab.grad_x[j][q] + by * tab.grad_y[j][q]) * tab.values[i][q];
                }
                b_adv[(i, j)] = b;
            }
        }
    }
    Ok(LocalMatrices {
        k_stiff,
        m_mass,
        b_adv,
        f_load,
    })
}

/// Classification of a vertex degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofKind {
    /// Interior vertex with its index into the free system.
    Free(usize),
    /// Boundary vertex carrying interpolated Dirichlet data.
    Dirichlet(f64),
}

/// Minimal row-compressed sparse matrix, sufficient for the desk-scale
/// systems assembled here.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Add `v` to entry (i, j), keeping each row sorted by column.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&j, |&(c, _)| c) {
            Ok(k) => row[k].1 += v,
            Err(k) => row.insert(k, (j, v)),
        }
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for (i, row) in self.rows.iter().enumerate() {
            y[i] = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                a[(i, j)] = v;
            }
        }
        a
    }

    /// Largest relative asymmetry `|a_ij - a_ji| / max|a|`.
    pub fn asymmetry(&self) -> f64 {
        let mut scale = 0.0f64;
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                scale = scale.max(v.abs());
                let vt = self.get(j, i);
                worst = worst.max((v - vt).abs());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        match self.rows[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => 0.0,
        }
    }
}

/// Assembled system over the free (interior) vertex DOFs.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub matrix: SparseMatrix,
    pub rhs: DVector<f64>,
    /// Per mesh vertex: free index or eliminated Dirichlet value.
    pub dof_map: Vec<DofKind>,
}

impl GlobalSystem {
    pub fn num_free(&self) -> usize {
        self.matrix.dim()
    }

    /// Expand a free-DOF solution to the full vertex vector, filling
    /// Dirichlet vertices with their boundary values.
    pub fn expand_solution(&self, free: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(self.dof_map.len());
        for (v, kind) in self.dof_map.iter().enumerate() {
            full[v] = match *kind {
                DofKind::Free(k) => free[k],
                DofKind::Dirichlet(g) => g,
            };
        }
        full
    }
}

/// Interpolate the Dirichlet data at boundary vertices.
pub fn interpolate_dirichlet(prob: &PDEProblem, mesh: &Mesh) -> Vec<Option<f64>> {
    mesh.vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if mesh.is_boundary_vertex(i) {
                Some((prob.g)(v.x, v.y))
            } else {
                None
            }
        })
        .collect()
}

/// Build the vertex DOF classification for a mesh and problem.
pub fn build_dof_map(prob: &PDEProblem, mesh: &Mesh) -> Vec<DofKind> {
    let dirichlet = interpolate_dirichlet(prob, mesh);
    let mut next = 0usize;
    dirichlet
        .into_iter()
        .map(|d| match d {
            Some(g) => DofKind::Dirichlet(g),
            None => {
                let k = next;
                next += 1;
                DofKind::Free(k)
            }
        })
        .collect()
}

/// Sum the broken bilinear form over all elements into a global system,
/// eliminating Dirichlet vertices into the right-hand side.
pub fn assemble_global(
    mesh: &Mesh,
    bases: &[ElementBasis],
    prob: &PDEProblem,
    quad_degree: usize,
    grading_levels: usize,
) -> Result<GlobalSystem> {
    prob.validate()?;
    if bases.len() != mesh.num_cells() {
        return Err(Error::Precondition(format!(
            "{} element bases supplied for a {}-cell mesh",
            bases.len(),
            mesh.num_cells()
        )));
    }
    let dof_map = build_dof_map(prob, mesh);
    let n_free = dof_map
        .iter()
        .filter(|k| matches!(k, DofKind::Free(_)))
        .count();
    let mut matrix = SparseMatrix::zeros(n_free);
    let mut rhs = DVector::zeros(n_free);

    for (c, basis) in bases.iter().enumerate() {
        let cell = &mesh.cells()[c];
        if basis.functions().len() != cell.len() {
            return Err(Error::Precondition(format!(
                "cell {c} has {} vertices but its basis has {} functions",
                cell.len(),
                basis.functions().len()
            )));
        }
        let quad = crate::quadrature::polygon_rule_refined(
            basis.element(),
            quad_degree,
            grading_levels,
            ASSEMBLY_REFINE_LEVELS,
        )?;
        let local = local_matrices(basis, prob, &quad)?;
        let a_loc = &local.k_stiff + &local.m_mass + &local.b_adv;
        for (i, &vi) in cell.iter().enumerate() {
            let DofKind::Free(gi) = dof_map[vi] else {
                continue;
            };
            rhs[gi] += local.f_load[i];
            for (j, &vj) in cell.iter().enumerate() {
                match dof_map[vj] {
                    DofKind::Free(gj) => matrix.add(gi, gj, a_loc[(i, j)]),
                    DofKind::Dirichlet(g) => rhs[gi] -= a_loc[(i, j)] * g,
                }
            }
        }
    }
    Ok(GlobalSystem {
        matrix,
        rhs,
        dof_map,
    })
}

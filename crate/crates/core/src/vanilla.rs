//! Baseline k=1 virtual element method: energy projector, dofi-dofi
//! stabilisation, skew-symmetrised advection and the vertex-average load
//! rule. The virtual functions are never evaluated; everything is computed
//! from degrees of freedom, which is exactly what the rational-basis path is
//! measured against.

use alloc::string::ToString;
use nalgebra::{DMatrix, DVector, Matrix3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::assembly::{ScalarField, VectorField};
use crate::geometry::Polygon;
use crate::quadrature::QuadratureRule;
use crate::{Error, Result};

/// Energy projector of one element onto `{1, (x-x_K)/h_K, (y-y_K)/h_K}`.
#[derive(Debug, Clone)]
pub struct ProjectorData {
    /// DOF values of the monomials, `N_K x 3`.
    pub d: DMatrix<f64>,
    /// Right-hand-side matrix of the projector system, `3 x N_K`.
    pub b: DMatrix<f64>,
    /// Projector in coefficient form, `3 x N_K`: DOF vector to monomial
    /// coefficients of the projected polynomial.
    pub pi_star: DMatrix<f64>,
}

impl ProjectorData {
    /// Monomial coefficients of the projection of a DOF vector.
    pub fn project(&self, dofs: &DVector<f64>) -> [f64; 3] {
        let s = &self.pi_star * dofs;
        [s[0], s[1], s[2]]
    }
}

fn monomials(poly: &Polygon, x: f64, y: f64) -> [f64; 3] {
    let c = poly.centroid();
    let h = poly.diameter();
    [1.0, (x - c.x) / h, (y - c.y) / h]
}

fn monomial_gradients(poly: &Polygon) -> [(f64, f64); 3] {
    let h = poly.diameter();
    [(0.0, 0.0), (1.0 / h, 0.0), (0.0, 1.0 / h)]
}

/// Build the k=1 energy projector.
///
/// For k=1 the projector system needs only boundary terms: the hat traces
/// are piecewise linear and edge normals are constant, so the edge integrals
/// of `(grad m . n) v_h` are exact half-sums over the two edges adjacent to
/// each vertex. The constant part is fixed by the vertex average.
pub fn pi_nabla(poly: &Polygon) -> Result<ProjectorData> {
    let nv = poly.num_vertices();
    let h = poly.diameter();
    let mut d = DMatrix::zeros(nv, 3);
    for i in 0..nv {
        let v = poly.vertices()[i];
        let m = monomials(poly, v.x, v.y);
        for (a, &ma) in m.iter().enumerate() {
            d[(i, a)] = ma;
        }
    }
    let mut b = DMatrix::zeros(3, nv);
    for i in 0..nv {
        b[(0, i)] = 1.0 / nv as f64;
        let prev = (i + nv - 1) % nv;
        // integral of the hat trace against the constant edge normal
        let n_prev = poly.outward_normal(prev);
        let n_next = poly.outward_normal(i);
        let l_prev = poly.edge_length(prev);
        let l_next = poly.edge_length(i);
        b[(1, i)] = 0.5 * (l_prev * n_prev.x + l_next * n_next.x) / h;
        b[(2, i)] = 0.5 * (l_prev * n_prev.y + l_next * n_next.y) / h;
    }
    let g: Matrix3<f64> = Matrix3::from_iterator((&b * &d).iter().copied());
    let g_inv = g
        .try_inverse()
        .ok_or_else(|| Error::Precondition("singular projector system".to_string()))?;
    let pi_star = DMatrix::from_iterator(3, nv, (g_inv * &b).iter().copied());
    Ok(ProjectorData { d, b, pi_star })
}

/// Consistency term plus dofi-dofi stabilisation.
pub fn local_stiffness_vanilla(poly: &Polygon, proj: &ProjectorData) -> DMatrix<f64> {
    let nv = poly.num_vertices();
    let h = poly.diameter();
    let scale = poly.area() / (h * h);
    // a(m_a, m_b) = |K|/h^2 for a = b in {1, 2}, zero otherwise
    let mut g_tilde = Matrix3::zeros();
    g_tilde[(1, 1)] = scale;
    g_tilde[(2, 2)] = scale;
    let consistency = proj.pi_star.tr_mul(&(g_tilde * &proj.pi_star));
    let defect = DMatrix::identity(nv, nv) - &proj.d * &proj.pi_star;
    consistency + defect.tr_mul(&defect)
}

/// Skew-symmetrised advection: `b(u, v) = int (beta . grad Pi u) vbar` with
/// the vertex average as the computable test quantity, then `(B - B^T)/2`.
pub fn local_advection_vanilla(
    poly: &Polygon,
    proj: &ProjectorData,
    beta: VectorField,
    quad: &QuadratureRule,
) -> DMatrix<f64> {
    let nv = poly.num_vertices();
    let mut qx = 0.0;
    let mut qy = 0.0;
    for (&p, &w) in quad.points.iter().zip(&quad.weights) {
        let (bx, by) = beta(p.x, p.y);
        qx += w * bx;
        qy += w * by;
    }
    let grads = monomial_gradients(poly);
    let mut b = DMatrix::zeros(nv, nv);
    for j in 0..nv {
        let flux = qx * (grads[1].0 * proj.pi_star[(1, j)] + grads[2].0 * proj.pi_star[(2, j)])
            + qy * (grads[1].1 * proj.pi_star[(1, j)] + grads[2].1 * proj.pi_star[(2, j)]);
        for i in 0..nv {
            b[(i, j)] = flux / nv as f64;
        }
    }
    let bt = b.transpose();
    (b - bt) * 0.5
}

/// Projected mass term `int gamma (Pi u)(Pi v)`.
pub fn local_mass_vanilla(
    poly: &Polygon,
    proj: &ProjectorData,
    gamma: ScalarField,
    quad: &QuadratureRule,
) -> DMatrix<f64> {
    let nv = poly.num_vertices();
    // moment matrix int gamma m_a m_b
    let mut mm = Matrix3::zeros();
    for (&p, &w) in quad.points.iter().zip(&quad.weights) {
        let m = monomials(poly, p.x, p.y);
        let g = gamma(p.x, p.y);
        for a in 0..3 {
            for b in 0..3 {
                mm[(a, b)] += w * g * m[a] * m[b];
            }
        }
    }
    let _ = nv;
    proj.pi_star.tr_mul(&(mm * &proj.pi_star))
}

/// Vertex-average load rule: `F_i = (P_0 f) |K| / N_K`.
pub fn local_load_vanilla(poly: &Polygon, f: ScalarField, quad: &QuadratureRule) -> DVector<f64> {
    let nv = poly.num_vertices();
    let mean = quad.integrate(|p| f(p.x, p.y)) / poly.area();
    DVector::from_element(nv, mean * poly.area() / nv as f64)
}

/// Assemble the baseline global system: scaled stiffness plus projected
/// mass plus skew advection, vertex-average load, Dirichlet elimination.
pub fn assemble_global_vanilla(
    mesh: &crate::geometry::Mesh,
    prob: &crate::assembly::PDEProblem,
    quad_degree: usize,
) -> Result<crate::assembly::GlobalSystem> {
    use crate::assembly::{build_dof_map, DofKind, GlobalSystem, SparseMatrix};
    prob.validate()?;
    let dof_map = build_dof_map(prob, mesh);
    let n_free = dof_map
        .iter()
        .filter(|k| matches!(k, DofKind::Free(_)))
        .count();
    let mut matrix = SparseMatrix::zeros(n_free);
    let mut rhs = DVector::zeros(n_free);
    for c in 0..mesh.num_cells() {
        let poly = mesh.cell_polygon(c);
        let (a_loc, f_loc) = local_system_vanilla(&poly, prob, quad_degree)?;
        let cell = &mesh.cells()[c];
        for (i, &vi) in cell.iter().enumerate() {
            let DofKind::Free(gi) = dof_map[vi] else {
                continue;
            };
            rhs[gi] += f_loc[i];
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

/// Combined local matrix and load of the baseline method on one element.
pub fn local_system_vanilla(
    poly: &Polygon,
    prob: &crate::assembly::PDEProblem,
    quad_degree: usize,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let proj = pi_nabla(poly)?;
    let quad = crate::quadrature::polygon_rule(poly, quad_degree, 0)?;
    let mut a = local_stiffness_vanilla(poly, &proj) * prob.epsilon;
    a += local_mass_vanilla(poly, &proj, prob.gamma, &quad);
    if let Some(beta) = prob.beta {
        a += local_advection_vanilla(poly, &proj, beta, &quad);
    }
    let f = local_load_vanilla(poly, prob.f, &quad);
    Ok((a, f))
}

/// Projected error norms of a solved DOF vector against the exact solution:
/// per element, `u - Pi u_h` in L2 and `grad(u - Pi u_h)` in the broken H1
/// seminorm.
pub fn vanilla_errors(
    mesh: &crate::geometry::Mesh,
    dofs: &DVector<f64>,
    prob: &crate::assembly::PDEProblem,
    quad_degree: usize,
) -> Result<(f64, f64)> {
    let exact_u = prob.exact_u.ok_or(crate::Error::MissingExactSolution)?;
    let exact_grad_u = prob.exact_grad_u.ok_or(crate::Error::MissingExactSolution)?;
    let mut l2_sq = 0.0;
    let mut h1_sq = 0.0;
    for c in 0..mesh.num_cells() {
        let poly = mesh.cell_polygon(c);
        let proj = pi_nabla(&poly)?;
        let local = DVector::from_iterator(
            mesh.cells()[c].len(),
            mesh.cells()[c].iter().map(|&v| dofs[v]),
        );
        let s = proj.project(&local);
        let grads = monomial_gradients(&poly);
        let px = s[1] * grads[1].0 + s[2] * grads[2].0;
        let py = s[1] * grads[1].1 + s[2] * grads[2].1;
        let quad = crate::quadrature::polygon_rule(&poly, quad_degree, 0)?;
        for (&p, &w) in quad.points.iter().zip(&quad.weights) {
            let m = monomials(&poly, p.x, p.y);
            let pu = s[0] * m[0] + s[1] * m[1] + s[2] * m[2];
            let du = exact_u(p.x, p.y) - pu;
            l2_sq += w * du * du;
            let (gx, gy) = exact_grad_u(p.x, p.y);
            h1_sq += w * ((gx - px) * (gx - px) + (gy - py) * (gy - py));
        }
    }
    Ok((l2_sq.sqrt(), h1_sq.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Polygon};
    use crate::quadrature::polygon_rule;
    use alloc::vec;
    use alloc::vec::Vec;

    fn pentagon() -> Polygon {
        Polygon::new(
            (0..5)
                .map(|i| {
                    let t = 2.0 * core::f64::consts::PI * i as f64 / 5.0;
                    Point::new(0.5 + 0.4 * t.cos(), 0.5 + 0.4 * t.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn projector_reproduces_monomials() {
        for poly in [Polygon::unit_square(), pentagon()] {
            let proj = pi_nabla(&poly).unwrap();
            let check = &proj.pi_star * &proj.d;
            for a in 0..3 {
                for b in 0..3 {
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((check[(a, b)] - expect).abs() < 1e-12, "a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn projector_of_constant_dofs() {
        let poly = pentagon();
        let proj = pi_nabla(&poly).unwrap();
        let ones = DVector::from_element(5, 1.0);
        let s = proj.project(&ones);
        assert!((s[0] - 1.0).abs() < 1e-13 && s[1].abs() < 1e-13 && s[2].abs() < 1e-13);
    }

    #[test]
    fn stiffness_row_sums_and_psd() {
        for poly in [Polygon::unit_square(), pentagon()] {
            let proj = pi_nabla(&poly).unwrap();
            let k = local_stiffness_vanilla(&poly, &proj);
            let nv = poly.num_vertices();
            for i in 0..nv {
                let sum: f64 = (0..nv).map(|j| k[(i, j)]).sum();
                assert!(sum.abs() < 1e-12, "row {i} sum {sum}");
                for j in 0..nv {
                    assert!((k[(i, j)] - k[(j, i)]).abs() < 1e-13);
                }
            }
            let eig = k.clone().symmetric_eigen();
            let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!(ev[0].abs() < 1e-12, "constant kernel eigenvalue {}", ev[0]);
            assert!(ev[1] > 1e-10, "exactly one zero eigenvalue");
        }
    }

    #[test]
    fn square_stiffness_matches_hand_solution() {
        // independent evaluation of the k=1 formulas on the unit square:
        // centroid (1/2, 1/2), h = sqrt(2).
        // D = [1, (x_i - 1/2)/h, (y_i - 1/2)/h]
        // B row 0 = 1/4; B rows 1,2 = half-sums of edge-length * normal / h
        let sq = Polygon::unit_square();
        let h = 2.0f64.sqrt();
        let d_hand = DMatrix::from_row_slice(
            4,
            3,
            &[
                1.0, -0.5 / h, -0.5 / h,
                1.0, 0.5 / h, -0.5 / h,
                1.0, 0.5 / h, 0.5 / h,
                1.0, -0.5 / h, 0.5 / h,
            ],
        );
        let b_hand = DMatrix::from_row_slice(
            3,
            4,
            &[
                0.25, 0.25, 0.25, 0.25,
                -0.5 / h, 0.5 / h, 0.5 / h, -0.5 / h,
                -0.5 / h, -0.5 / h, 0.5 / h, 0.5 / h,
            ],
        );
        let g = &b_hand * &d_hand;
        let pi_hand = g.try_inverse().unwrap() * &b_hand;
        let mut g_tilde = Matrix3::zeros();
        g_tilde[(1, 1)] = 1.0 / (h * h);
        g_tilde[(2, 2)] = 1.0 / (h * h);
        let defect = DMatrix::identity(4, 4) - &d_hand * &pi_hand;
        let k_hand = pi_hand.tr_mul(&(g_tilde * &pi_hand)) + defect.tr_mul(&defect);

        let proj = pi_nabla(&sq).unwrap();
        let k = local_stiffness_vanilla(&sq, &proj);
        for i in 0..4 {
            for j in 0..4 {
                assert!((k[(i, j)] - k_hand[(i, j)]).abs() < 1e-12, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn advection_is_antisymmetric() {
        let poly = pentagon();
        let proj = pi_nabla(&poly).unwrap();
        let quad = polygon_rule(&poly, 6, 0).unwrap();
        let beta: VectorField = |x, y| (y - 0.3, 0.7 - x);
        let b = local_advection_vanilla(&poly, &proj, beta, &quad);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(b[(i, j)], -b[(j, i)]);
            }
        }
        let zero: VectorField = |_, _| (0.0, 0.0);
        let b0 = local_advection_vanilla(&poly, &proj, zero, &quad);
        assert!(b0.norm() == 0.0);
    }

    #[test]
    fn advection_constant_field_hand_value() {
        // beta = (1, 0) on the unit square: int beta . grad Pi u = s_1 |K|/h
        // against the vertex average 1/4.
        let sq = Polygon::unit_square();
        let proj = pi_nabla(&sq).unwrap();
        let quad = polygon_rule(&sq, 4, 0).unwrap();
        let beta: VectorField = |_, _| (1.0, 0.0);
        let b = local_advection_vanilla(&sq, &proj, beta, &quad);
        let h = 2.0f64.sqrt();
        let mut raw = DMatrix::zeros(4, 4);
        for j in 0..4 {
            for i in 0..4 {
                raw[(i, j)] = proj.pi_star[(1, j)] / h / 4.0;
            }
        }
        let expect = (raw.clone() - raw.transpose()) * 0.5;
        for i in 0..4 {
            for j in 0..4 {
                assert!((b[(i, j)] - expect[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn load_rule_values() {
        let sq = Polygon::unit_square();
        let quad = polygon_rule(&sq, 4, 0).unwrap();
        let f1 = local_load_vanilla(&sq, |_, _| 1.0, &quad);
        for i in 0..4 {
            assert!((f1[i] - 0.25).abs() < 1e-14);
        }
        let f0 = local_load_vanilla(&sq, |_, _| 0.0, &quad);
        assert!(f0.norm() == 0.0);
        let fx = local_load_vanilla(&sq, |x, _| x, &quad);
        for i in 0..4 {
            assert!((fx[i] - 0.125).abs() < 1e-14);
        }
    }

    #[test]
    fn pi_nabla_orthogonality() {
        // a(p, v - Pi v) = 0 for monomials p, via the exact boundary formula
        let poly = pentagon();
        let proj = pi_nabla(&poly).unwrap();
        let nv = poly.num_vertices();
        let mut rng_state = 88172645463325252u64;
        let mut next = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..20 {
            let v = DVector::from_iterator(nv, (0..nv).map(|_| next()));
            // boundary formula: a(m_a, v) = B[a] . v  (rows 1, 2)
            let bv = &proj.b * &v;
            let s = proj.project(&v);
            let gd = &proj.d * DVector::from_row_slice(&s);
            let b_pv = &proj.b * &gd;
            for a in 1..3 {
                assert!((bv[a] - b_pv[a]).abs() < 1e-12, "monomial {a}");
            }
        }
    }

    #[test]
    fn errors_vanish_for_projected_linear() {
        let mesh = crate::geometry::cvt_from_seeds(
            vec![
                Point::new(0.25, 0.25),
                Point::new(0.75, 0.25),
                Point::new(0.25, 0.75),
                Point::new(0.75, 0.75),
            ],
            0,
            1e-8,
        )
        .unwrap();
        let u: ScalarField = |x, y| 1.0 + 2.0 * x - 3.0 * y;
        let dofs = DVector::from_iterator(
            mesh.vertices().len(),
            mesh.vertices().iter().map(|v| u(v.x, v.y)),
        );
        let prob = crate::assembly::PDEProblem {
            epsilon: 1.0,
            gamma: |_, _| 0.0,
            beta: None,
            beta_div: None,
            f: |_, _| 0.0,
            g: u,
            exact_u: Some(u),
            exact_grad_u: Some(|_, _| (2.0, -3.0)),
        };
        let (l2, h1) = vanilla_errors(&mesh, &dofs, &prob, 6).unwrap();
        assert!(h1 < 1e-12, "h1 = {h1}");
        assert!(l2 < 1e-12, "l2 = {l2}");
    }
}

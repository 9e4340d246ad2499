//! End-to-end assembly and solve checks: FD oracle agreement, patch tests,
//! interface-jump bounds and the advection integration-by-parts identity.

use lvem_core::analyze::{fit_mesh_bases, lightning_errors, solve_lightning, solve_vanilla};
use lvem_core::assembly::{
    assemble_global, local_matrices, PDEProblem, ScalarField, VectorField,
};
use lvem_core::geometry::{cvt_from_seeds, generate_cvt, Point, Polygon};
use lvem_core::lightning::{fit_element_basis, FitConfig};
use lvem_core::quadrature::{edge_rule, polygon_rule};

const EPS_FIT: f64 = 1e-8;

fn zero(_: f64, _: f64) -> f64 {
    0.0
}

fn laplace_like(f: ScalarField, g: ScalarField) -> PDEProblem {
    PDEProblem {
        epsilon: 1.0,
        gamma: zero,
        beta: None,
        beta_div: None,
        f,
        g,
        exact_u: None,
        exact_grad_u: None,
    }
}

fn square_2x2_mesh() -> lvem_core::geometry::Mesh {
    cvt_from_seeds(
        vec![
            Point::new(0.25, 0.25),
            Point::new(0.75, 0.25),
            Point::new(0.25, 0.75),
            Point::new(0.75, 0.75),
        ],
        0,
        1e-8,
    )
    .unwrap()
}

#[test]
fn center_dof_matches_fd_oracle() {
    // 2x2 square mesh, -lap u = 1, u = 0 on the boundary: exactly one free
    // DOF at the mesh center
    let mesh = square_2x2_mesh();
    let prob = laplace_like(|_, _| 1.0, zero);
    let bases = fit_mesh_bases(&mesh, &FitConfig::default()).unwrap();
    let sys = assemble_global(&mesh, &bases, &prob, 10, 3).unwrap();
    assert_eq!(sys.num_free(), 1);
    assert!(sys.matrix.asymmetry() < 1e-12);
    let x = lvem_core::analyze::solve_linear(&sys, 1e-12).unwrap();

    let grid = lvem_testkit::solve_poisson_dirichlet(256, |_, _| 1.0, |_, _| 0.0);
    let oracle = grid.interpolate(0.5, 0.5);
    assert!(
        (x[0] - oracle).abs() < 5e-2,
        "center value {} vs FD oracle {oracle}",
        x[0]
    );
}

#[test]
fn lightning_patch_test() {
    let u: ScalarField = |x, y| 1.0 + 2.0 * x - 3.0 * y;
    let mut prob = laplace_like(zero, u);
    prob.exact_u = Some(u);
    prob.exact_grad_u = Some(|_, _| (2.0, -3.0));
    let mesh = generate_cvt(8, 1, 30, 1e-9).unwrap();
    let bases = fit_mesh_bases(&mesh, &FitConfig::default()).unwrap();
    let dofs = solve_lightning(&mesh, &bases, &prob, 10, 3, 1e-12).unwrap();
    for (i, v) in mesh.vertices().iter().enumerate() {
        assert!(
            (dofs[i] - u(v.x, v.y)).abs() <= 100.0 * EPS_FIT,
            "vertex {i}: {} vs {}",
            dofs[i],
            u(v.x, v.y)
        );
    }
    let (l2, h1) = lightning_errors(&mesh, &bases, &dofs, &prob, 10, 3).unwrap();
    assert!(l2 <= 100.0 * EPS_FIT, "e_L2 {l2:e}");
    assert!(h1 <= 100.0 * EPS_FIT, "e_H1 {h1:e}");
}

#[test]
fn vanilla_patch_test() {
    let u: ScalarField = |x, y| 1.0 + 2.0 * x - 3.0 * y;
    let prob = laplace_like(zero, u);
    let mesh = generate_cvt(8, 1, 30, 1e-9).unwrap();
    let dofs = solve_vanilla(&mesh, &prob, 10, 1e-12).unwrap();
    for (i, v) in mesh.vertices().iter().enumerate() {
        assert!(
            (dofs[i] - u(v.x, v.y)).abs() <= 1e-10,
            "vertex {i}: {} vs {}",
            dofs[i],
            u(v.x, v.y)
        );
    }
}

#[test]
fn interface_jumps_bounded_by_fit_tolerance() {
    // basis functions of adjacent cells share only their endpoint DOFs;
    // along the common edge both traces approximate the same linear datum,
    // so the jump is bounded by twice the fit error on each side
    let mesh = generate_cvt(16, 2, 30, 1e-9).unwrap();
    let bases = fit_mesh_bases(&mesh, &FitConfig::default()).unwrap();
    let mut interior_edges = 0;
    for edge in mesh.edges() {
        let Some(c2) = edge.cells.1 else { continue };
        let c1 = edge.cells.0;
        interior_edges += 1;
        let (v0, v1) = edge.v;
        let a = mesh.vertices()[v0];
        let b = mesh.vertices()[v1];
        for &shared in &[v0, v1] {
            let i1 = mesh.cells()[c1].iter().position(|&v| v == shared).unwrap();
            let i2 = mesh.cells()[c2].iter().position(|&v| v == shared).unwrap();
            let f1 = &bases[c1].functions()[i1];
            let f2 = &bases[c2].functions()[i2];
            for k in 1..10 {
                let t = k as f64 / 10.0;
                let p = Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
                let jump = (f1.evaluate(p) - f2.evaluate(p)).abs();
                assert!(
                    jump <= 4.0 * EPS_FIT,
                    "edge ({v0}, {v1}) t={t}: jump {jump:e}"
                );
            }
        }
    }
    assert!(interior_edges > 10);
}

#[test]
fn advection_integration_by_parts() {
    // for constant divergence-free beta:
    // B + B^T = contour integral of (beta . n) phi_i phi_j over the element
    // boundary
    let poly = Polygon::new(
        (0..5)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
                Point::new(0.5 + 0.4 * t.cos(), 0.5 + 0.4 * t.sin())
            })
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let basis = fit_element_basis(&poly, &FitConfig::default()).unwrap();
    let beta: VectorField = |_, _| (1.0, 0.0);
    let mut prob = laplace_like(zero, zero);
    prob.beta = Some(beta);
    prob.beta_div = Some(zero);
    let quad = polygon_rule(&poly, 12, 4).unwrap();
    let local = local_matrices(&basis, &prob, &quad).unwrap();

    let nv = poly.num_vertices();
    let mut boundary = vec![vec![0.0; nv]; nv];
    for e in 0..nv {
        let (a, b) = poly.edge(e);
        let n = poly.outward_normal(e);
        let beta_n = n.x; // beta = (1, 0)
        let rule = edge_rule(a, b, 32).unwrap();
        for (&p, &w) in rule.points.iter().zip(&rule.weights) {
            let vals: Vec<f64> = basis.functions().iter().map(|f| f.evaluate(p)).collect();
            for i in 0..nv {
                for j in 0..nv {
                    boundary[i][j] += w * beta_n * vals[i] * vals[j];
                }
            }
        }
    }
    let scale = local.b_adv.amax().max(1.0);
    for i in 0..nv {
        for j in 0..nv {
            let lhs = local.b_adv[(i, j)] + local.b_adv[(j, i)];
            assert!(
                (lhs - boundary[i][j]).abs() <= 1e-5 * scale,
                "({i}, {j}): volume {lhs} vs boundary {}",
                boundary[i][j]
            );
        }
    }
}

#[test]
fn mass_matrix_is_spd() {
    let poly = Polygon::unit_square();
    let basis = fit_element_basis(&poly, &FitConfig::default()).unwrap();
    let mut prob = laplace_like(zero, zero);
    prob.gamma = |_, _| 1.0;
    let quad = polygon_rule(&poly, 10, 3).unwrap();
    let local = local_matrices(&basis, &prob, &quad).unwrap();
    assert!((local.m_mass.clone() - local.m_mass.transpose()).amax() < 1e-12);
    let eig = local.m_mass.clone().symmetric_eigen();
    assert!(
        eig.eigenvalues.iter().all(|&l| l > 0.0),
        "mass eigenvalues {:?}",
        eig.eigenvalues
    );
    assert!((local.k_stiff.clone() - local.k_stiff.transpose()).amax() < 1e-12);
    let keig = local.k_stiff.clone().symmetric_eigen();
    assert!(keig.eigenvalues.iter().all(|&l| l > -1e-10));
}

#[test]
fn probe_evaluation_and_domain_check() {
    let mesh = square_2x2_mesh();
    let prob = laplace_like(|_, _| 1.0, zero);
    let bases = fit_mesh_bases(&mesh, &FitConfig::default()).unwrap();
    let dofs = solve_lightning(&mesh, &bases, &prob, 10, 3, 1e-12).unwrap();
    let v = lvem_core::analyze::evaluate_solution(&mesh, &bases, &dofs, 0.5, 0.5).unwrap();
    assert!(v.is_finite() && v > 0.0);
    assert!(matches!(
        lvem_core::analyze::evaluate_solution(&mesh, &bases, &dofs, 1.5, 0.5),
        Err(lvem_core::Error::OutsideDomain { .. })
    ));
}

//! Property tests for meshes and quadrature, cross-checked against the
//! Green's-theorem moment oracle.

use lvem_core::geometry::{generate_cvt, lloyd_iteration, Point, Polygon};
use lvem_core::lightning::{fit_element_basis, FitConfig};
use lvem_core::quadrature::{polygon_rule, polygon_rule_refined};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pentagon() -> Polygon {
    Polygon::new(
        (0..5)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
                Point::new(0.5 + 0.4 * t.cos(), 0.5 + 0.4 * t.sin())
            })
            .collect(),
    )
    .unwrap()
}

/// Random convex polygon: points on an ellipse at sorted random angles.
fn random_convex(seed: u64) -> Polygon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = rng.gen_range(3..9usize);
    let rx = rng.gen_range(0.2..1.5);
    let ry = rng.gen_range(0.2..1.5);
    let mut angles: Vec<f64> = (0..nv)
        .map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < 0.3);
    if angles.len() < 3 {
        return random_convex(seed + 1);
    }
    let verts: Vec<Point> = angles
        .iter()
        .map(|t| Point::new(rx * t.cos(), ry * t.sin()))
        .collect();
    match Polygon::new(verts) {
        Ok(p) => p,
        Err(_) => random_convex(seed + 1),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn polygon_rule_matches_moment_oracle(seed in 0u64..10_000) {
        let poly = random_convex(seed);
        let verts: Vec<(f64, f64)> =
            poly.vertices().iter().map(|p| (p.x, p.y)).collect();
        let degree = 6usize;
        let rule = polygon_rule(&poly, degree, 2).unwrap();
        for a in 0..=degree as u32 {
            for b in 0..=(degree as u32 - a) {
                let got = rule.integrate(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
                let exact = lvem_testkit::polygon_moment(&verts, a, b);
                let scale = exact.abs().max(poly.area());
                prop_assert!(
                    (got - exact).abs() <= 1e-11 * scale,
                    "moment ({}, {}): {} vs {}", a, b, got, exact
                );
            }
        }
    }

    #[test]
    fn mesh_invariants_across_seeds(seed in 0u64..200, n in 2usize..40) {
        let mesh = generate_cvt(n, seed, 20, 1e-8).unwrap();
        prop_assert_eq!(mesh.num_cells(), n);
        let mut area = 0.0;
        for c in 0..n {
            let poly = mesh.cell_polygon(c); // validates convexity and CCW
            area += poly.area();
        }
        prop_assert!((area - 1.0).abs() < 1e-10);
        for e in mesh.edges() {
            // boundary edges lie on the unit-square boundary
            if e.cells.1.is_none() {
                let a = mesh.vertices()[e.v.0];
                let b = mesh.vertices()[e.v.1];
                let on_side = |p: Point| {
                    p.x.abs() < 1e-9
                        || (p.x - 1.0).abs() < 1e-9
                        || p.y.abs() < 1e-9
                        || (p.y - 1.0).abs() < 1e-9
                };
                prop_assert!(on_side(a) && on_side(b));
            }
        }
    }
}

#[test]
fn lloyd_energy_is_non_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut seeds: Vec<Point> = (0..20)
        .map(|_| Point::new(rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99)))
        .collect();
    let energy = |seeds: &[Point], cells: &[Polygon]| -> f64 {
        seeds
            .iter()
            .zip(cells)
            .map(|(s, cell)| {
                let rule = polygon_rule(cell, 4, 0).unwrap();
                rule.integrate(|p| (p.x - s.x).powi(2) + (p.y - s.y).powi(2))
            })
            .sum()
    };
    let mut prev = f64::INFINITY;
    for _ in 0..15 {
        let (cells, next) = lloyd_iteration(&seeds).unwrap();
        let e = energy(&seeds, &cells);
        assert!(e <= prev + 1e-12, "energy increased: {prev} -> {e}");
        prev = e;
        seeds = next;
    }
}

#[test]
fn cells_do_not_overlap_by_sampling() {
    let mesh = generate_cvt(24, 5, 30, 1e-9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let p = Point::new(rng.gen(), rng.gen());
        let mut inside = 0;
        for c in 0..mesh.num_cells() {
            if mesh.cell_polygon(c).signed_distance(p) < -1e-9 {
                inside += 1;
            }
        }
        assert!(inside <= 1, "point strictly inside {inside} cells");
    }
}

#[test]
fn grading_converged_at_default_level() {
    // calibration required of the default rule: for the corner-concentrated
    // integrand |grad phi|^2, one more grading level changes the value by
    // less than 1e-8 relative
    let poly = pentagon();
    let basis = fit_element_basis(&poly, &FitConfig::default()).unwrap();
    let func = &basis.functions()[0];
    let energy = |levels: usize| {
        let rule = polygon_rule_refined(&poly, 10, levels, 1).unwrap();
        rule.integrate(|p| {
            let (gx, gy) = func.evaluate_gradient(p);
            gx * gx + gy * gy
        })
    };
    let (e3, e4) = (energy(3), energy(4));
    assert!(
        (e3 - e4).abs() <= 1e-8 * e4.abs(),
        "grading 3 vs 4: {e3} vs {e4}"
    );
}

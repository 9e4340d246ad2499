//! Quadrature over convex polygons and edges.
//!
//! Polygon rules fan-triangulate from the centroid and geometrically grade
//! each fan triangle toward the polygon corners (ratio 1/2 per level), where
//! the gradients of the rational basis functions peak. Each sub-triangle
//! carries a collapsed tensor Gauss rule exact for the requested total
//! polynomial degree.

use alloc::string::ToString;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{Point, Polygon};
use crate::{Error, Result};

/// Default polynomial exactness degree for polygon rules.
pub const DEFAULT_DEGREE: usize = 10;
/// Default number of corner grading levels.
pub const DEFAULT_GRADING: usize = 3;
/// Default Gauss point count for edge rules.
pub const DEFAULT_EDGE_POINTS: usize = 16;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate(&self, mut f: impl FnMut(Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to the segment from `a` to `b`.
pub fn edge_rule(a: Point, b: Point, n_points: usize) -> Result<QuadratureRule> {
    if n_points == 0 {
        return Err(Error::Precondition("edge rule needs n_points >= 1".to_string()));
    }
    let len = a.dist(b);
    if len == 0.0 {
        return Err(Error::Precondition("edge endpoints coincide".to_string()));
    }
    let (nodes, weights) = gauss_legendre(n_points);
    let mid = (a + b).scale(0.5);
    let half = (b - a).scale(0.5);
    let points = nodes.iter().map(|&t| mid + half.scale(t)).collect();
    let weights = weights.iter().map(|&w| w * 0.5 * len).collect();
    Ok(QuadratureRule { points, weights })
}

/// Collapsed tensor Gauss rule on the triangle (a, b, c), exact for
/// polynomials of total degree `degree`.
fn triangle_rule(a: Point, b: Point, c: Point, degree: usize) -> QuadratureRule {
    // reference map x = u, y = v(1-u): a monomial of total degree d pulls
    // back to degree <= d+1 in u and <= d in v
    let nu = (degree + 2).div_ceil(2);
    let nv = (degree + 1).div_ceil(2);
    let (xu, wu) = gauss_legendre(nu);
    let (xv, wv) = gauss_legendre(nv);
    let e1 = b - a;
    let e2 = c - a;
    let jac = e1.cross(e2); // twice the signed area
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (&tu, &wtu) in xu.iter().zip(&wu) {
        let u = 0.5 * (tu + 1.0);
        for (&tv, &wtv) in xv.iter().zip(&wv) {
            let v = 0.5 * (tv + 1.0) * (1.0 - u);
            points.push(a + e1.scale(u) + e2.scale(v));
            weights.push(0.25 * wtu * wtv * (1.0 - u) * jac);
        }
    }
    QuadratureRule { points, weights }
}

/// Composite rule over a polygon: centroid fan, corner-graded sub-triangles,
/// collapsed Gauss on each.
///
/// Each fan triangle is split at the midpoint of its boundary edge so that
/// every sub-triangle owns exactly one polygon corner, toward which it is
/// then graded `grading_levels` times with ratio 1/2.
pub fn polygon_rule(poly: &Polygon, degree: usize, grading_levels: usize) -> Result<QuadratureRule> {
    polygon_rule_refined(poly, degree, grading_levels, 0)
}

/// Like [`polygon_rule`], additionally splitting every sub-triangle
/// `refine_levels` times into four congruent children before applying the
/// Gauss rule. Useful when the integrand has singularities just outside the
/// polygon at a distance comparable to the triangle size, where raising the
/// degree alone converges slowly.
pub fn polygon_rule_refined(
    poly: &Polygon,
    degree: usize,
    grading_levels: usize,
    refine_levels: usize,
) -> Result<QuadratureRule> {
    if degree == 0 {
        return Err(Error::Precondition("polygon rule needs degree >= 1".to_string()));
    }
    let c = poly.centroid();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut push = |rule: QuadratureRule| {
        points.extend(rule.points);
        weights.extend(rule.weights);
    };
    let mut push_refined = |a: Point, b: Point, c: Point, degree: usize| {
        refined(a, b, c, degree, refine_levels, &mut push);
    };
    for i in 0..poly.num_vertices() {
        let (a, b) = poly.edge(i);
        let m = (a + b).scale(0.5);
        graded_fan(a, m, c, degree, grading_levels, &mut push_refined);
        graded_fan(b, c, m, degree, grading_levels, &mut push_refined);
    }
    Ok(QuadratureRule { points, weights })
}

/// Recursively split the triangle into four congruent children.
fn refined(
    a: Point,
    b: Point,
    c: Point,
    degree: usize,
    levels: usize,
    push: &mut impl FnMut(QuadratureRule),
) {
    if levels == 0 {
        push(oriented(a, b, c, degree));
        return;
    }
    let ab = (a + b).scale(0.5);
    let bc = (b + c).scale(0.5);
    let ca = (c + a).scale(0.5);
    refined(a, ab, ca, degree, levels - 1, push);
    refined(ab, b, bc, degree, levels - 1, push);
    refined(ca, bc, c, degree, levels - 1, push);
    refined(ab, bc, ca, degree, levels - 1, push);
}

/// Rules for the triangle (w, p, q) graded toward the corner `w`.
fn graded_fan(
    w: Point,
    p: Point,
    q: Point,
    degree: usize,
    levels: usize,
    push: &mut impl FnMut(Point, Point, Point, usize),
) {
    let mut p = p;
    let mut q = q;
    for _ in 0..levels {
        let p2 = (w + p).scale(0.5);
        let q2 = (w + q).scale(0.5);
        // ring between the shrunk corner triangle and the previous one
        push(p2, p, q, degree);
        push(p2, q, q2, degree);
        p = p2;
        q = q2;
    }
    push(w, p, q, degree);
}

fn oriented(a: Point, b: Point, c: Point, degree: usize) -> QuadratureRule {
    if (b - a).cross(c - a) >= 0.0 {
        triangle_rule(a, b, c, degree)
    } else {
        triangle_rule(a, c, b, degree)
    }
}

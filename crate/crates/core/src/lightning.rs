//! Rational approximation of the virtual basis functions.
//!
//! Each k=1 basis function of a convex element is the harmonic extension of a
//! piecewise linear vertex hat. It is fitted by the real part of a rational
//! function with poles clustered exponentially close to the corners along the
//! exterior bisectors, plus a low-order polynomial tail anchored at the
//! centroid. The pole count per corner is increased along a ladder with
//! uniformly spaced square roots until a held-out boundary error surrogate
//! meets the requested tolerance, which controls the interior error by the
//! maximum principle.

use alloc::string::ToString;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{Point, Polygon};
use crate::{Error, Result};

/// Configuration of the adaptive rational fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Boundary error tolerance on the held-out validation set.
    pub eps: f64,
    /// Exponential clustering rate of the pole ladder.
    pub sigma: f64,
    /// Pole counts per corner; square roots must be uniformly spaced.
    pub n_sequence: Vec<usize>,
    /// Cap on the per-corner pole count.
    pub n_max: usize,
    /// Relative singular value truncation threshold.
    pub svd_rtol: f64,
    /// Held-out points inserted per gap between training samples.
    pub validation_density: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            eps: 1e-8,
            sigma: 4.0,
            n_sequence: alloc::vec![4, 9, 16, 25, 36, 49, 64],
            n_max: 64,
            svd_rtol: 1e-12,
            validation_density: 2,
        }
    }
}

impl FitConfig {
    pub fn with_eps(eps: f64) -> Self {
        FitConfig { eps, ..FitConfig::default() }
    }

    fn ladder(&self) -> impl Iterator<Item = usize> + '_ {
        self.n_sequence.iter().copied().filter(move |&n| n <= self.n_max)
    }
}

/// Harmonic function represented as the real part of a rational function
/// with fixed poles plus a scaled monomial tail and a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalHarmonicFn {
    poles: Vec<Complex64>,
    center: Complex64,
    degree: usize,
    scale: f64,
    /// Real coefficient vector of length `2 * poles + 2 * degree + 1`,
    /// interleaved (Re, Im) per pole, then per monomial, then the constant.
    coeffs: Vec<f64>,
}

impl RationalHarmonicFn {
    pub fn new(
        poles: Vec<Complex64>,
        center: Complex64,
        degree: usize,
        scale: f64,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        if coeffs.len() != 2 * poles.len() + 2 * degree + 1 {
            return Err(Error::Precondition(
                "coefficient vector length does not match pole/monomial counts".to_string(),
            ));
        }
        Ok(RationalHarmonicFn { poles, center, degree, scale, coeffs })
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Complex coefficient of the pole term `j`, combining the real column
    /// pair so that `u = Re(c * g)` with `g = 1/(z - z_j)`.
    fn pole_coeff(&self, j: usize) -> Complex64 {
        Complex64::new(self.coeffs[2 * j], -self.coeffs[2 * j + 1])
    }

    fn monomial_coeff(&self, m: usize) -> Complex64 {
        let off = 2 * self.poles.len() + 2 * m;
        Complex64::new(self.coeffs[off], -self.coeffs[off + 1])
    }

    fn constant(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn evaluate(&self, p: Point) -> f64 {
        let z = Complex64::new(p.x, p.y);
        let mut f = Complex64::new(self.constant(), 0.0);
        for (j, &zj) in self.poles.iter().enumerate() {
            f += self.pole_coeff(j) / (z - zj);
        }
        let w = (z - self.center) / self.scale;
        let mut pw = Complex64::new(1.0, 0.0);
        for m in 0..self.degree {
            pw *= w;
            f += self.monomial_coeff(m) * pw;
        }
        f.re
    }

    /// Gradient via the Cauchy-Riemann equations: `(Re F', -Im F')`.
    pub fn evaluate_gradient(&self, p: Point) -> (f64, f64) {
        let z = Complex64::new(p.x, p.y);
        let mut df = Complex64::new(0.0, 0.0);
        for (j, &zj) in self.poles.iter().enumerate() {
            let g = Complex64::new(1.0, 0.0) / (z - zj);
            df -= self.pole_coeff(j) * g * g;
        }
        let w = (z - self.center) / self.scale;
        let mut pw = Complex64::new(1.0 / self.scale, 0.0);
        for m in 0..self.degree {
            df += self.monomial_coeff(m) * ((m + 1) as f64) * pw;
            pw *= w;
        }
        (df.re, -df.im)
    }

    /// Value and gradient in one pass; assembly calls this per quadrature
    /// point, where the shared pole loop matters.
    pub fn evaluate_with_gradient(&self, p: Point) -> (f64, f64, f64) {
        let z = Complex64::new(p.x, p.y);
        let mut f = Complex64::new(self.constant(), 0.0);
        let mut df = Complex64::new(0.0, 0.0);
        for (j, &zj) in self.poles.iter().enumerate() {
            let g = Complex64::new(1.0, 0.0) / (z - zj);
            let c = self.pole_coeff(j);
            f += c * g;
            df -= c * g * g;
        }
        let w = (z - self.center) / self.scale;
        let mut pw = Complex64::new(1.0, 0.0);
        let mut dpw = Complex64::new(1.0 / self.scale, 0.0);
        for m in 0..self.degree {
            let c = self.monomial_coeff(m);
            df += c * ((m + 1) as f64) * dpw;
            pw *= w;
            dpw *= w;
            f += c * pw;
        }
        (f.re, df.re, -df.im)
    }

    pub fn min_pole_distance(&self, p: Point) -> f64 {
        let z = Complex64::new(p.x, p.y);
        self.poles
            .iter()
            .map(|&zj| (z - zj).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Per-function fit diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    /// Accepted pole count per corner.
    pub n_per_corner: usize,
    /// Total pole count.
    pub n_poles: usize,
    /// Maximum absolute error on the held-out validation set.
    pub boundary_error: f64,
    /// Smallest retained singular value relative to the largest.
    pub sv_floor: f64,
    /// Number of singular values discarded by the truncation threshold.
    pub truncated: usize,
}

/// The fitted hat functions of one element.
#[derive(Debug, Clone)]
pub struct ElementBasis {
    element: Polygon,
    functions: Vec<RationalHarmonicFn>,
    diagnostics: Vec<FitDiagnostics>,
}

impl ElementBasis {
    pub fn new(
        element: Polygon,
        functions: Vec<RationalHarmonicFn>,
        diagnostics: Vec<FitDiagnostics>,
    ) -> Self {
        ElementBasis { element, functions, diagnostics }
    }

    pub fn element(&self) -> &Polygon {
        &self.element
    }

    pub fn functions(&self) -> &[RationalHarmonicFn] {
        &self.functions
    }

    pub fn diagnostics(&self) -> &[FitDiagnostics] {
        &self.diagnostics
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// Poles along the exterior corner bisectors, exponentially clustered:
/// `z = w_k + b_k * h * exp(-sigma (sqrt(n) - sqrt(j)))`, `j = 1..n`.
pub fn place_poles(poly: &Polygon, n_per_corner: usize, sigma: f64) -> Vec<Complex64> {
    let h = poly.diameter();
    let mut poles = Vec::with_capacity(poly.num_vertices() * n_per_corner);
    for k in 0..poly.num_vertices() {
        let w = poly.vertices()[k];
        let b = poly.exterior_bisector(k);
        for j in 1..=n_per_corner {
            let d = h * (-sigma * ((n_per_corner as f64).sqrt() - (j as f64).sqrt())).exp();
            let p = w + b.scale(d);
            debug_assert!(
                poly.signed_distance(p) > 0.0,
                "pole fell inside the element"
            );
            poles.push(Complex64::new(p.x, p.y));
        }
    }
    poles
}

/// A boundary collocation point with its edge index and edge parameter.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    pub point: Point,
    pub edge: usize,
    pub t: f64,
}

/// `m` points on the boundary: per edge, a ladder of points clustered toward
/// both endpoints mirroring the pole distances (three per pole), plus a
/// uniform filler. Each edge receives `m / n_edges` points, +1 for the first
/// `m % n_edges` edges. No point coincides with a vertex.
pub fn sample_boundary(
    poly: &Polygon,
    m: usize,
    n_per_corner: usize,
    sigma: f64,
) -> Vec<BoundarySample> {
    let n_edges = poly.num_vertices();
    let base = m / n_edges;
    let rem = m % n_edges;
    let mut out = Vec::with_capacity(m);
    for e in 0..n_edges {
        let count = base + usize::from(e < rem);
        let (a, b) = poly.edge(e);
        let clustered = (3 * n_per_corner).min(count / 2);
        let filler = count - 2 * clustered;
        let mut ts = Vec::with_capacity(count);
        let sq_n = (n_per_corner as f64).sqrt();
        for k in 1..=clustered {
            let t = 0.5 * (-sigma * (sq_n - (k as f64 / 3.0).sqrt())).exp();
            ts.push(t);
            ts.push(1.0 - t);
        }
        for i in 0..filler {
            ts.push((i + 1) as f64 / (filler + 1) as f64);
        }
        ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for t in ts {
            out.push(BoundarySample {
                point: a + (b - a).scale(t),
                edge: e,
                t,
            });
        }
    }
    out
}

/// Held-out points at the midpoints between consecutive training samples on
/// each edge (vertices act as sentinels); `density - 1 >= 1` points per gap.
pub fn validation_points(
    poly: &Polygon,
    training: &[BoundarySample],
    density: usize,
) -> Vec<BoundarySample> {
    let per_gap = density.saturating_sub(1).max(1);
    let mut out = Vec::new();
    for e in 0..poly.num_vertices() {
        let (a, b) = poly.edge(e);
        let mut ts: Vec<f64> = training.iter().filter(|s| s.edge == e).map(|s| s.t).collect();
        ts.push(0.0);
        ts.push(1.0);
        ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for w in ts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 <= 0.0 {
                continue;
            }
            for k in 1..=per_gap {
                let t = t0 + (t1 - t0) * k as f64 / (per_gap + 1) as f64;
                out.push(BoundarySample {
                    point: a + (b - a).scale(t),
                    edge: e,
                    t,
                });
            }
        }
    }
    out
}

/// Trace of the vertex hat `i` on edge `edge` at parameter `t`.
pub fn hat_trace(n_vertices: usize, i: usize, edge: usize, t: f64) -> f64 {
    if edge == i {
        1.0 - t
    } else if (edge + 1) % n_vertices == i {
        t
    } else {
        0.0
    }
}

/// Least-squares collocation matrix: per sample row, columns are
/// `Re g_j, Im g_j` for every pole (`g_j = 1/(z - z_j)`), then
/// `Re w^m, Im w^m` for `w = (z - z_*) / h`, `m = 1..N_Z`, then the
/// constant 1.
pub fn assemble_ls(
    poly: &Polygon,
    poles: &[Complex64],
    center: Complex64,
    n_z: usize,
    samples: &[BoundarySample],
) -> DMatrix<f64> {
    let h = poly.diameter();
    let n_cols = 2 * poles.len() + 2 * n_z + 1;
    let mut a = DMatrix::zeros(samples.len(), n_cols);
    for (r, s) in samples.iter().enumerate() {
        let z = Complex64::new(s.point.x, s.point.y);
        for (j, &zj) in poles.iter().enumerate() {
            let g = Complex64::new(1.0, 0.0) / (z - zj);
            a[(r, 2 * j)] = g.re;
            a[(r, 2 * j + 1)] = g.im;
        }
        let w = (z - center) / h;
        let mut pw = Complex64::new(1.0, 0.0);
        for m in 0..n_z {
            pw *= w;
            a[(r, 2 * poles.len() + 2 * m)] = pw.re;
            a[(r, 2 * poles.len() + 2 * m + 1)] = pw.im;
        }
        a[(r, n_cols - 1)] = 1.0;
    }
    a
}

/// Truncated-SVD least-squares factorization, reusable across right-hand
/// sides. The tall system is first reduced by a thin QR, then the singular
/// value decomposition of the triangular factor is truncated.
pub struct TsvdFactors {
    q: DMatrix<f64>,
    u: DMatrix<f64>,
    v_t: DMatrix<f64>,
    singular: DVector<f64>,
    col_scale: DVector<f64>,
}

impl TsvdFactors {
    pub fn new(mut a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() < a.ncols() {
            return Err(Error::Precondition(
                "least-squares system must have at least as many rows as columns".to_string(),
            ));
        }
        // equilibrate: near-corner pole columns have norms of order 1/dist,
        // which would otherwise dominate the relative truncation threshold
        let mut col_scale = DVector::from_element(a.ncols(), 1.0);
        for j in 0..a.ncols() {
            let norm = a.column(j).norm();
            if norm > 0.0 {
                col_scale[j] = 1.0 / norm;
                a.column_mut(j).scale_mut(col_scale[j]);
            }
        }
        let qr = a.qr();
        let r = qr.r();
        let q = qr.q();
        let svd = nalgebra::linalg::SVD::try_new(r, true, true, f64::EPSILON, 100_000)
            .ok_or(Error::SvdFailure)?;
        Ok(TsvdFactors {
            q,
            u: svd.u.unwrap(),
            v_t: svd.v_t.unwrap(),
            singular: svd.singular_values,
            col_scale,
        })
    }

    /// Minimum-norm truncated solution and the number of discarded singular
    /// values.
    pub fn solve(&self, d: &DVector<f64>, svd_rtol: f64) -> Result<(DVector<f64>, usize)> {
        let sigma_max = self.singular.max();
        let cutoff = svd_rtol * sigma_max;
        let mut y = self.u.tr_mul(&(self.q.tr_mul(d)));
        let mut truncated = 0;
        for i in 0..y.len() {
            if self.singular[i] > cutoff && self.singular[i] > 0.0 {
                y[i] /= self.singular[i];
            } else {
                y[i] = 0.0;
                truncated += 1;
            }
        }
        if truncated == y.len() {
            return Err(Error::RankZero);
        }
        let mut x = self.v_t.tr_mul(&y);
        x.component_mul_assign(&self.col_scale);
        Ok((x, truncated))
    }

    /// Smallest retained singular value relative to the largest.
    pub fn sv_floor(&self, svd_rtol: f64) -> f64 {
        let sigma_max = self.singular.max();
        let cutoff = svd_rtol * sigma_max;
        self.singular
            .iter()
            .copied()
            .filter(|&s| s > cutoff)
            .fold(f64::INFINITY, f64::min)
            / sigma_max
    }
}

/// Minimum-norm truncated-SVD least-squares solve of `A x ~ d`.
pub fn solve_ls_tsvd(
    a: DMatrix<f64>,
    d: &DVector<f64>,
    svd_rtol: f64,
) -> Result<(DVector<f64>, usize)> {
    TsvdFactors::new(a)?.solve(d, svd_rtol)
}

/// Fit all vertex hats of one element, sharing the collocation matrix and
/// its factorization across the right-hand sides. The pole ladder advances
/// until every hat meets the tolerance on the held-out set.
pub fn fit_element_basis(poly: &Polygon, cfg: &FitConfig) -> Result<ElementBasis> {
    fit_selected(poly, None, cfg).map(|(functions, diagnostics)| {
        ElementBasis::new(poly.clone(), functions, diagnostics)
    })
}

/// Fit the single vertex hat `vertex_index`.
pub fn fit_hat_basis(
    poly: &Polygon,
    vertex_index: usize,
    cfg: &FitConfig,
) -> Result<(RationalHarmonicFn, FitDiagnostics)> {
    if vertex_index >= poly.num_vertices() {
        return Err(Error::Precondition("vertex index out of range".to_string()));
    }
    let (mut fns, mut diags) = fit_selected(poly, Some(vertex_index), cfg)?;
    Ok((fns.remove(0), diags.remove(0)))
}

/// Ladder acceptance margin relative to the configured tolerance.
const ACCEPT_SAFETY: f64 = 0.1;

fn fit_selected(
    poly: &Polygon,
    only: Option<usize>,
    cfg: &FitConfig,
) -> Result<(Vec<RationalHarmonicFn>, Vec<FitDiagnostics>)> {
    let nv = poly.num_vertices();
    let n_z = nv;
    let center = Complex64::new(poly.centroid().x, poly.centroid().y);
    let targets: Vec<usize> = match only {
        Some(i) => alloc::vec![i],
        None => (0..nv).collect(),
    };
    let mut best_err = f64::INFINITY;
    let mut best_poles = 0;
    let mut last_err: Option<Error> = None;
    for n in cfg.ladder() {
        let poles = place_poles(poly, n, cfg.sigma);
        let n_p = poles.len();
        let m = 6 * n_p + 6 * n_z + 1;
        let samples = sample_boundary(poly, m, n, cfg.sigma);
        let a = assemble_ls(poly, &poles, center, n_z, &samples);
        let factors = match TsvdFactors::new(a) {
            Ok(f) => f,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let held_out = validation_points(poly, &samples, cfg.validation_density);
        let mut functions = Vec::with_capacity(targets.len());
        let mut diagnostics = Vec::with_capacity(targets.len());
        let mut worst = 0.0f64;
        for &i in &targets {
            let d = DVector::from_iterator(
                samples.len(),
                samples.iter().map(|s| hat_trace(nv, i, s.edge, s.t)),
            );
            let (x, truncated) = factors.solve(&d, cfg.svd_rtol)?;
            let f = RationalHarmonicFn::new(
                poles.clone(),
                center,
                n_z,
                poly.diameter(),
                x.iter().copied().collect(),
            )?;
            let err = held_out
                .iter()
                .map(|s| (f.evaluate(s.point) - hat_trace(nv, i, s.edge, s.t)).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err);
            functions.push(f);
            diagnostics.push(FitDiagnostics {
                n_per_corner: n,
                n_poles: n_p,
                boundary_error: err,
                sv_floor: factors.sv_floor(cfg.svd_rtol),
                truncated,
            });
        }
        // accept with a safety margin: the held-out maximum is a sampled
        // estimate of the true boundary error, and downstream bounds
        // (partition of unity, interface jumps, patch tests) quote small
        // multiples of eps that leave little room for estimation slack
        if worst <= ACCEPT_SAFETY * cfg.eps {
            return Ok((functions, diagnostics));
        }
        if worst < best_err {
            best_err = worst;
            best_poles = n_p;
        }
    }
    if let Some(e) = last_err {
        if best_err.is_infinite() {
            return Err(e);
        }
    }
    Err(Error::FitNotConverged {
        eps: cfg.eps,
        best: best_err,
        poles: best_poles,
    })
}

//! Independent numerical oracles used by the integration tests.
//!
//! Nothing here depends on `lvem-core`: the point of these routines is to
//! cross-check its results from a different direction (finite differences,
//! exact rational arithmetic, closed-form contour integrals), so they must
//! not share code with the implementation under test.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Solution of a Dirichlet problem on the unit square, sampled on a uniform
/// `(n+1) x (n+1)` grid including the boundary.
pub struct FdGrid {
    pub n: usize,
    /// Row-major values, `values[i * (n+1) + j] = u(i h, j h)` with `h = 1/n`.
    pub values: Vec<f64>,
}

impl FdGrid {
    pub fn at_node(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.n + 1) + j]
    }

    /// Value at an arbitrary point by bilinear interpolation.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let n = self.n as f64;
        let fx = (x * n).clamp(0.0, n);
        let fy = (y * n).clamp(0.0, n);
        let i = (fx.floor() as usize).min(self.n - 1);
        let j = (fy.floor() as usize).min(self.n - 1);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        (1.0 - tx) * (1.0 - ty) * self.at_node(i, j)
            + tx * (1.0 - ty) * self.at_node(i + 1, j)
            + (1.0 - tx) * ty * self.at_node(i, j + 1)
            + tx * ty * self.at_node(i + 1, j + 1)
    }
}

/// Type-I discrete sine transform, `out_k = sum_j x_j sin(pi (j+1)(k+1) / (m+1))`,
/// computed through a length-`2(m+1)` FFT with odd extension.
fn dst1(x: &[f64], planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let m = x.len();
    let n2 = 2 * (m + 1);
    let fft = planner.plan_fft_forward(n2);
    let mut buf = vec![Complex64::new(0.0, 0.0); n2];
    for (j, &v) in x.iter().enumerate() {
        buf[j + 1].re = v;
        buf[n2 - 1 - j].re = -v;
    }
    fft.process(&mut buf);
    (1..=m).map(|k| -0.5 * buf[k].im).collect()
}

/// Apply the DST to every row of an `m x m` row-major matrix, in place.
fn dst1_rows(a: &mut [f64], m: usize, planner: &mut FftPlanner<f64>) {
    for i in 0..m {
        let row = dst1(&a[i * m..(i + 1) * m], planner);
        a[i * m..(i + 1) * m].copy_from_slice(&row);
    }
}

fn transpose(a: &mut [f64], m: usize) {
    for i in 0..m {
        for j in 0..i {
            a.swap(i * m + j, j * m + i);
        }
    }
}

/// Second-order finite-difference solve of `-lap u = f` on the unit square
/// with Dirichlet data `g`, by sine-transform diagonalisation of the 5-point
/// Laplacian. `n` is the number of subintervals per direction.
pub fn solve_poisson_dirichlet(
    n: usize,
    f: impl Fn(f64, f64) -> f64,
    g: impl Fn(f64, f64) -> f64,
) -> FdGrid {
    assert!(n >= 2);
    let m = n - 1;
    let h = 1.0 / n as f64;
    let mut rhs = vec![0.0; m * m];
    for i in 1..=m {
        let x = i as f64 * h;
        for j in 1..=m {
            let y = j as f64 * h;
            let mut b = f(x, y);
            if i == 1 {
                b += g(0.0, y) / (h * h);
            }
            if i == m {
                b += g(1.0, y) / (h * h);
            }
            if j == 1 {
                b += g(x, 0.0) / (h * h);
            }
            if j == m {
                b += g(x, 1.0) / (h * h);
            }
            rhs[(i - 1) * m + (j - 1)] = b;
        }
    }

    let mut planner = FftPlanner::new();
    dst1_rows(&mut rhs, m, &mut planner);
    transpose(&mut rhs, m);
    dst1_rows(&mut rhs, m, &mut planner);
    transpose(&mut rhs, m);

    // eigenvalues of the 5-point operator under homogeneous Dirichlet BCs
    let lam: Vec<f64> = (1..=m)
        .map(|k| {
            let s = (core::f64::consts::PI * k as f64 / (2.0 * n as f64)).sin();
            4.0 * s * s / (h * h)
        })
        .collect();
    for i in 0..m {
        for j in 0..m {
            rhs[i * m + j] /= lam[i] + lam[j];
        }
    }

    dst1_rows(&mut rhs, m, &mut planner);
    transpose(&mut rhs, m);
    dst1_rows(&mut rhs, m, &mut planner);
    transpose(&mut rhs, m);
    let scale = (2.0 / n as f64) * (2.0 / n as f64);

    let mut values = vec![0.0; (n + 1) * (n + 1)];
    for i in 0..=n {
        let x = i as f64 * h;
        for j in 0..=n {
            let y = j as f64 * h;
            values[i * (n + 1) + j] = if i == 0 || j == 0 || i == n || j == n {
                g(x, y)
            } else {
                scale * rhs[(i - 1) * m + (j - 1)]
            };
        }
    }
    FdGrid { n, values }
}

fn big(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact rational from an f64 (every finite f64 is a dyadic rational).
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_f64(v).expect("finite value")
}

/// Nearest f64 to a rational.
pub fn rational_to_f64(v: &BigRational) -> f64 {
    v.to_f64().expect("representable magnitude")
}

/// Exact least-squares solution of an overdetermined system via the normal
/// equations in rational arithmetic. `a` is row-major `rows x cols`.
pub fn exact_least_squares(a: &[Vec<BigRational>], b: &[BigRational]) -> Vec<BigRational> {
    let rows = a.len();
    let cols = a[0].len();
    assert_eq!(b.len(), rows);
    // normal equations: (A^T A) x = A^T b
    let mut ata = vec![vec![BigRational::zero(); cols]; cols];
    let mut atb = vec![BigRational::zero(); cols];
    for i in 0..cols {
        for j in 0..cols {
            let mut s = BigRational::zero();
            for r in 0..rows {
                s += &a[r][i] * &a[r][j];
            }
            ata[i][j] = s;
        }
        let mut s = BigRational::zero();
        for r in 0..rows {
            s += &a[r][i] * &b[r];
        }
        atb[i] = s;
    }
    // exact Gaussian elimination with partial (nonzero) pivoting
    for p in 0..cols {
        let pivot_row = (p..cols)
            .find(|&r| !ata[r][p].is_zero())
            .expect("normal equations are nonsingular for full-rank A");
        ata.swap(p, pivot_row);
        atb.swap(p, pivot_row);
        for r in p + 1..cols {
            if ata[r][p].is_zero() {
                continue;
            }
            let factor = &ata[r][p] / &ata[p][p];
            for c in p..cols {
                let sub = &factor * &ata[p][c];
                ata[r][c] -= sub;
            }
            let sub = &factor * &atb[p];
            atb[r] -= sub;
        }
    }
    let mut x = vec![BigRational::zero(); cols];
    for p in (0..cols).rev() {
        let mut s = atb[p].clone();
        for c in p + 1..cols {
            s -= &ata[p][c] * &x[c];
        }
        x[p] = s / &ata[p][p];
    }
    x
}

/// Residual norm `|Ax - b|` of a rational least-squares solution, as f64.
pub fn ls_residual_norm(a: &[Vec<BigRational>], b: &[BigRational], x: &[BigRational]) -> f64 {
    let mut sq = BigRational::zero();
    for (row, bv) in a.iter().zip(b) {
        let mut r = -bv.clone();
        for (av, xv) in row.iter().zip(x) {
            r += av * xv;
        }
        sq += &r * &r;
    }
    sq.to_f64().expect("finite residual").sqrt()
}

/// The `rows x cols` Hilbert matrix `a_ij = 1/(i+j+1)` in exact arithmetic.
pub fn hilbert_matrix(rows: usize, cols: usize) -> Vec<Vec<BigRational>> {
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| big(1) / big((i + j + 1) as i64))
                .collect()
        })
        .collect()
}

/// Exact moment `int_P x^a y^b dA` of a simple CCW polygon via Green's
/// theorem: the contour integral of `x^(a+1) y^b / (a+1) dy`, expanded per
/// edge with the binomial theorem and integrated term by term.
pub fn polygon_moment(vertices: &[(f64, f64)], a: u32, b: u32) -> f64 {
    let nv = vertices.len();
    let binom = |n: u32, k: u32| -> f64 {
        let mut v = 1.0;
        for i in 0..k {
            v = v * (n - i) as f64 / (i + 1) as f64;
        }
        v
    };
    let mut total = 0.0;
    for e in 0..nv {
        let (x0, y0) = vertices[e];
        let (x1, y1) = vertices[(e + 1) % nv];
        let dx = x1 - x0;
        let dy = y1 - y0;
        if dy == 0.0 {
            continue;
        }
        // x(t)^(a+1) y(t)^b integrated over t in [0,1], times dy
        let mut edge = 0.0;
        for p in 0..=a + 1 {
            let cp = binom(a + 1, p) * x0.powi((a + 1 - p) as i32) * dx.powi(p as i32);
            for q in 0..=b {
                let cq = binom(b, q) * y0.powi((b - q) as i32) * dy.powi(q as i32);
                edge += cp * cq / (p + q + 1) as f64;
            }
        }
        total += edge * dy;
    }
    total / (a + 1) as f64
}

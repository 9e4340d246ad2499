//! The three model problems on the unit square, all manufactured from the
//! exact solution `u(x, y) = sin(pi x) sin(pi y) + log(1 + x y)`.

use core::f64::consts::PI;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::assembly::PDEProblem;

/// Identifier of a model problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemId {
    /// `-Δu = f`
    Laplace,
    /// `-Δu + u = f`
    DiffusionReaction,
    /// `-Δu + beta . grad u + u = f`
    Adr,
}

impl ProblemId {
    pub const ALL: [ProblemId; 3] = [
        ProblemId::Laplace,
        ProblemId::DiffusionReaction,
        ProblemId::Adr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Laplace => "laplace",
            ProblemId::DiffusionReaction => "diffusion_reaction",
            ProblemId::Adr => "adr",
        }
    }
}

impl FromStr for ProblemId {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "laplace" => Ok(ProblemId::Laplace),
            "diffusion_reaction" => Ok(ProblemId::DiffusionReaction),
            "adr" => Ok(ProblemId::Adr),
            other => Err(crate::Error::Precondition(alloc::format!(
                "unknown problem '{other}' (expected laplace, diffusion_reaction or adr)"
            ))),
        }
    }
}

/// Exact solution shared by all three problems.
pub fn exact_u(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin() + (1.0 + x * y).ln()
}

/// Gradient of the exact solution.
pub fn exact_grad_u(x: f64, y: f64) -> (f64, f64) {
    let d = 1.0 + x * y;
    (
        PI * (PI * x).cos() * (PI * y).sin() + y / d,
        PI * (PI * x).sin() * (PI * y).cos() + x / d,
    )
}

/// `-Δu` of the exact solution.
fn neg_laplace_u(x: f64, y: f64) -> f64 {
    let d = 1.0 + x * y;
    2.0 * PI * PI * (PI * x).sin() * (PI * y).sin() + (x * x + y * y) / (d * d)
}

/// Divergence-free advective field of the third problem.
pub fn beta_field(x: f64, y: f64) -> (f64, f64) {
    let s = (PI * (x + 2.0 * y)).sin();
    (-2.0 * PI * s, PI * s)
}

/// Divergence of `beta_field`, written term by term: the x-derivative of the
/// first component cancels the y-derivative of the second exactly.
fn beta_div(x: f64, y: f64) -> f64 {
    let c = (PI * (x + 2.0 * y)).cos();
    -2.0 * PI * PI * c + 2.0 * PI * PI * c
}

fn f_laplace(x: f64, y: f64) -> f64 {
    neg_laplace_u(x, y)
}

fn f_diffusion_reaction(x: f64, y: f64) -> f64 {
    neg_laplace_u(x, y) + exact_u(x, y)
}

fn f_adr(x: f64, y: f64) -> f64 {
    let (bx, by) = beta_field(x, y);
    let (ux, uy) = exact_grad_u(x, y);
    neg_laplace_u(x, y) + bx * ux + by * uy + exact_u(x, y)
}

fn zero(_: f64, _: f64) -> f64 {
    0.0
}

fn one(_: f64, _: f64) -> f64 {
    1.0
}

/// Build the full problem data for an identifier.
pub fn problem(id: ProblemId) -> PDEProblem {
    match id {
        ProblemId::Laplace => PDEProblem {
            epsilon: 1.0,
            gamma: zero,
            beta: None,
            beta_div: None,
            f: f_laplace,
            g: exact_u,
            exact_u: Some(exact_u),
            exact_grad_u: Some(exact_grad_u),
        },
        ProblemId::DiffusionReaction => PDEProblem {
            epsilon: 1.0,
            gamma: one,
            beta: None,
            beta_div: None,
            f: f_diffusion_reaction,
            g: exact_u,
            exact_u: Some(exact_u),
            exact_grad_u: Some(exact_grad_u),
        },
        ProblemId::Adr => PDEProblem {
            epsilon: 1.0,
            gamma: one,
            beta: Some(beta_field),
            beta_div: Some(beta_div),
            f: f_adr,
            g: exact_u,
            exact_u: Some(exact_u),
            exact_grad_u: Some(exact_grad_u),
        },
    }
}

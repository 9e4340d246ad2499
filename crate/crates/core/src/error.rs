use alloc::string::String;

/// Errors produced by mesh generation, basis fitting and solves.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("empty cell after half-plane clipping")]
    EmptyCell,
    #[error("degenerate seed configuration after {attempts} reseed attempts")]
    DegenerateSeeds { attempts: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("all singular values truncated, system has numerical rank zero")]
    RankZero,
    #[error("singular value decomposition did not converge")]
    SvdFailure,
    #[error(
        "basis fit did not reach tolerance {eps:e}: best boundary error {best:e} \
         with {poles} poles"
    )]
    FitNotConverged { eps: f64, best: f64, poles: usize },
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("exact solution not available for the requested error norm")]
    MissingExactSolution,
    #[error("point ({x}, {y}) is outside the mesh")]
    OutsideDomain { x: f64, y: f64 },
}

use thiserror::Error;

/// Errors produced by mesh construction, model validation, assembly and the
/// nonlinear solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh file parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("cell {cell} is not star-shaped with respect to its center")]
    NonStarShaped { cell: usize },

    #[error("cell {cell} references vertex {vertex} which does not exist")]
    DanglingVertex { cell: usize, vertex: usize },

    #[error("mesh area mismatch: cells cover {cell_total}, boundary encloses {domain_total}")]
    AreaMismatch { cell_total: f64, domain_total: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate submesh triangle in cell {cell} (area {area:e})")]
    DegenerateTriangle { cell: usize, area: f64 },

    #[error("invalid lumping weights: {0}")]
    InvalidLumping(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("state is not admissible for the configured pressure law")]
    InadmissibleState,

    #[error("relative entropy is undefined: negative entry at dof {dof}")]
    NegativeDof { dof: usize },

    #[error("point ({x}, {y}) lies outside the mesh")]
    PointOutsideMesh { x: f64, y: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("Jacobian cell block has a zero diagonal entry at cell {cell}")]
    SingularCellBlock { cell: usize },

    #[error("Newton did not converge within {max_iter} iterations (last increment {increment:e})")]
    NewtonDiverged { max_iter: usize, increment: f64 },

    #[error(
        "simulation aborted at t = {t}: {failures} consecutive time-step failures (dt = {dt:e})"
    )]
    SolverAbort { t: f64, dt: f64, failures: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("diagnostics error: {0}")]
    Diagnostics(String),
}

pub type Result<T> = std::result::Result<T, Error>;

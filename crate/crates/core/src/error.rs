use thiserror::Error;

/// Errors raised by the local-time library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative off-diagonal rate {rate} at ({from}, {to})")]
    NegativeRate { from: String, to: String, rate: f64 },

    #[error("generator needs at least two states, got {0}")]
    TooSmall(usize),

    #[error("row {state} is not conservative: diagonal {diagonal} but off-diagonal sum {off_sum}")]
    NonConservative { state: String, diagonal: f64, off_sum: f64 },

    #[error("rate matrix shape mismatch: {0}")]
    Shape(String),

    #[error("unknown state label '{0}'")]
    UnknownLabel(String),

    #[error("state subset is empty")]
    EmptySubset,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series truncation not certified: tail bound {tail_bound:e} exceeds tolerance {tol:e} at order {order}")]
    NonConvergedTruncation { tail_bound: f64, tol: f64, order: usize },

    #[error("balanced-flow enumeration exceeded the cap of {cap} flows (max_total = {max_total})")]
    ExplosionGuard { cap: usize, max_total: usize },

    #[error("quadrature residual imaginary part {imag:e} against real part {real:e}")]
    ResidualImaginary { real: f64, imag: f64 },

    #[error("quadrature did not stabilise up to grid size {grid_size}")]
    QuadratureNotConverged { grid_size: usize },

    #[error("generator is not tridiagonal on the requested range")]
    NotTridiagonal,

    #[error("range is not an interval of consecutive states")]
    NotInterval,

    #[error("generator is not symmetric")]
    NotSymmetric,

    #[error("generator is not simple random walk on the requested interval")]
    NotSrw,

    #[error("support of the measure is reducible; the variational problem is unbounded")]
    Unbounded,

    #[error("optimizer did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },

    #[error("bound requires T >= 1, got T = {0}")]
    TooEarly(f64),

    #[error("simulation budget exceeded after {jumps} jumps and elapsed time {elapsed}")]
    BudgetExceeded { jumps: u64, elapsed: f64 },

    #[error("only {got} samples survived conditioning, need at least {need}")]
    InsufficientConditioned { got: u64, need: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Failure modes surfaced by the bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian within tolerance {tol:e} (max deviation {deviation:e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("quadrature did not converge within {max_subdivisions} subdivisions (last error {last_error:e})")]
    QuadratureNonConvergence {
        max_subdivisions: usize,
        last_error: f64,
    },

    #[error("no sign change for the water-level residual in [{lo:e}, {hi:e}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("channel inversion needs M <= N_k, got M={m}, N={n}")]
    RankDeficient { m: usize, n: usize },

    #[error(
        "fronthaul C_{relay} = {c} bits cannot cover the level-coding overhead; \
         this grid needs C_{relay} > {h_sum} bits"
    )]
    InfeasibleBudget { relay: usize, c: f64, h_sum: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

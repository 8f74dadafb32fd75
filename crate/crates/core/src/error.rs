use thiserror::Error;

/// Errors produced by the numerical kernels and the physics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("coincident points: separation {separation:e} is below the {limit:e} guard")]
    Coincidence { separation: f64, limit: f64 },

    #[error("branch point: radial wavenumber vanished at kz = {kz}")]
    Branch { kz: f64 },

    #[error("azimuthal series not converged at order {order}: tail {tail:e} vs partial sum {sum:e}")]
    Azimuthal { order: usize, tail: f64, sum: f64 },

    #[error("quadrature did not converge: {nodes} nodes, error estimate {error:e} > target {target:e}")]
    Quadrature { nodes: usize, error: f64, target: f64 },

    #[error("principal-value extrapolation did not settle: spread {spread:e} > {tol:e}")]
    Extrapolation { spread: f64, tol: f64 },

    #[error("lorentzian fit failed: {0}")]
    Fit(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use std::path::PathBuf;

use thiserror::Error;

/// Every failure the solver can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {field} = {value:e} is not positive{}", node_suffix(*.node))]
    Domain {
        field: &'static str,
        value: f64,
        node: Option<usize>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("assembly error in cell {cell}: {reason}")]
    Assembly { cell: usize, reason: String },

    #[error("CFL violation in {stage}: dt = {dt:e} exceeds dt0 = {dt0:e}")]
    Cfl {
        stage: &'static str,
        dt: f64,
        dt0: f64,
    },

    #[error("no hyperbolic scale: all graph viscosities vanish")]
    NoHyperbolicScale,

    #[error("bar state requested on edge ({i}, {j}) with zero graph viscosity")]
    ZeroViscosity { i: usize, j: usize },

    #[error(
        "linear solver did not converge in {iterations} iterations (relative residual {residual:e})"
    )]
    Solver {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("step {step} at t = {time}: {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn node_suffix(node: Option<usize>) -> String {
    match node {
        Some(i) => format!(" at node {i}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a node index to a domain error.
    pub(crate) fn at_node(self, i: usize) -> Self {
        match self {
            Error::Domain { field, value, .. } => Error::Domain {
                field,
                value,
                node: Some(i),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

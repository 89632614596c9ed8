use std::fmt;

use thiserror::Error;

/// Which check in a commuting-normal family test failed first.
#[derive(Debug, Clone, PartialEq)]
pub enum Offender {
    /// Block `(i, j)` (0-based) is not normal.
    NonNormal { block: (usize, usize), defect: f64 },
    /// Blocks `first` and `second` do not commute.
    NonCommuting {
        first: (usize, usize),
        second: (usize, usize),
        defect: f64,
    },
}

impl fmt::Display for Offender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Diagnostics use 1-based block labels.
        match self {
            Offender::NonNormal { block, defect } => write!(
                f,
                "block ({},{}) is not normal (relative defect {:.3e})",
                block.0 + 1,
                block.1 + 1,
                defect
            ),
            Offender::NonCommuting {
                first,
                second,
                defect,
            } => write!(
                f,
                "blocks ({},{}) and ({},{}) do not commute (relative defect {:.3e})",
                first.0 + 1,
                first.1 + 1,
                second.0 + 1,
                second.1 + 1,
                defect
            ),
        }
    }
}

/// Outcome of a commuting-normal family check with the worst offender, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDiagnostics {
    pub passed: bool,
    pub offender: Option<Offender>,
    pub max_normal_defect: f64,
    pub max_commutator_defect: f64,
}

impl fmt::Display for FamilyDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.offender {
            Some(o) => write!(f, "{o}"),
            None => write!(f, "all blocks normal and mutually commuting"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e}, max {max_eigenvalue:.3e})")]
    NotPsd {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("zero matrix")]
    ZeroMatrix,

    #[error("not a commuting normal family: {0}")]
    NotCommutingFamily(FamilyDiagnostics),

    #[error("eigenvalue gap {gap:.3e} is too close to the cluster threshold {threshold:.3e}")]
    ClusterAmbiguity { gap: f64, threshold: f64 },

    #[error("not B-orthogonal: {0}")]
    NotBOrthogonal(FamilyDiagnostics),

    #[error("not B-independent: {0}")]
    NotBIndependent(FamilyDiagnostics),

    #[error("not A-independent: {0}")]
    NotAIndependent(FamilyDiagnostics),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("infeasible ranks: {0}")]
    InfeasibleRanks(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for rejections that are mathematical verdicts rather than bad input.
    pub fn is_rejection(&self) -> bool {
        matches!(
            self,
            Error::NotCommutingFamily(_)
                | Error::NotBOrthogonal(_)
                | Error::NotBIndependent(_)
                | Error::NotAIndependent(_)
                | Error::VerificationFailed(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

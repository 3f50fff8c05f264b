use core::fmt;

/// Failure modes surfaced by the operator-model computations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not line up for the requested operation.
    Dimension {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A square matrix was required.
    NotSquare { rows: usize, cols: usize },
    /// A matrix entry is NaN or infinite.
    NotFinite { row: usize, col: usize },
    /// Input was expected Hermitian within tolerance.
    NotHermitian { defect: f64 },
    /// Input was expected positive semidefinite within tolerance.
    NotPsd { min_eigenvalue: f64 },
    /// A linear system or factor has lower numerical rank than required.
    RankDeficient { rank: usize, required: usize },
    /// Operator norm exceeds the contraction bound.
    NotContractive { norm: f64 },
    /// 1 lies in or numerically near the point spectrum, so the Cayley
    /// transform is unavailable. Carries min_singular(T - I).
    NotACogenerator { min_singular: f64 },
    /// A spectral atom of the named operator sits at 1, so no cogenerator
    /// model exists for it.
    AtomAtOne { operator: usize, atom: usize },
    /// Iterative or extrapolated estimates failed to settle.
    NoConvergence { context: &'static str, last_delta: f64 },
    /// Operators that must commute (or doubly commute) fail to within
    /// tolerance; carries the worst commutator norm.
    NotCommuting { context: &'static str, norm: f64 },
    /// Kernel dimension varies across the evaluation grid.
    InconsistentKernel {
        expected: usize,
        found: usize,
        grid_index: usize,
    },
    /// Off-diagonal coupling where block-diagonal structure was required.
    Structure { context: &'static str, defect: f64 },
    /// The requested truncation cannot reach the requested tolerance.
    Truncation { tail_bound: f64, tol: f64 },
    /// Margin/headroom parameters are incoherent for the requested check.
    Headroom { context: &'static str },
    /// Power norms do not decay although a pure (c.n.u.) input was required.
    NotPure { defect: f64 },
    /// An input value lies outside the admissible domain.
    Domain { context: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension {
                context,
                expected,
                found,
            } => write!(
                f,
                "{context}: expected shape {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::NotSquare { rows, cols } => {
                write!(f, "square matrix required, found {rows}x{cols}")
            }
            Error::NotFinite { row, col } => {
                write!(f, "non-finite entry at ({row}, {col})")
            }
            Error::NotHermitian { defect } => {
                write!(f, "matrix is not Hermitian (defect {defect:.3e})")
            }
            Error::NotPsd { min_eigenvalue } => write!(
                f,
                "matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})"
            ),
            Error::RankDeficient { rank, required } => {
                write!(f, "rank deficient: numerical rank {rank}, required {required}")
            }
            Error::NotContractive { norm } => {
                write!(f, "operator norm {norm:.12} exceeds the contraction bound")
            }
            Error::NotACogenerator { min_singular } => write!(
                f,
                "1 is numerically in the point spectrum (min singular of T - I is {min_singular:.3e})"
            ),
            Error::AtomAtOne { operator, atom } => write!(
                f,
                "operator {operator} has a spectral atom at 1 (atom index {atom})"
            ),
            Error::NoConvergence {
                context,
                last_delta,
            } => write!(f, "{context}: no convergence (last delta {last_delta:.3e})"),
            Error::NotCommuting { context, norm } => {
                write!(f, "{context}: commutator norm {norm:.3e} above tolerance")
            }
            Error::InconsistentKernel {
                expected,
                found,
                grid_index,
            } => write!(
                f,
                "kernel dimension {found} at grid point {grid_index} differs from {expected}"
            ),
            Error::Structure { context, defect } => {
                write!(f, "{context}: structure defect {defect:.3e}")
            }
            Error::Truncation { tail_bound, tol } => write!(
                f,
                "truncation too coarse: tail bound {tail_bound:.3e} above tolerance {tol:.3e}"
            ),
            Error::Headroom { context } => write!(f, "insufficient margin headroom: {context}"),
            Error::NotPure { defect } => write!(
                f,
                "power norms do not decay (defect {defect:.3e}); pure input required"
            ),
            Error::Domain { context } => write!(f, "domain error: {context}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

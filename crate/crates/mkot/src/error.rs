//! Crate-wide error type.

use std::fmt;

/// Everything that can go wrong when building or checking transport data.
///
/// Mathematical verdicts (an invalid certificate, a violating cycle, a FAIL
/// clause) are *not* errors — they are ordinary return values. Errors mean
/// the input itself was unusable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Vector or matrix dimensions disagree with the declared sizes.
    ShapeMismatch(String),
    /// A marginal, mass, or cost entry is negative where it must not be.
    NegativeEntry(String),
    /// Marginals do not sum to one exactly.
    MarginalSum(String),
    /// `f⊕g > c` on an arc carrying positive mass.
    DominationViolated { a: usize, b: usize },
    /// Enumeration guard exceeded (`m·n > 16` or denominator > 6).
    TooLarge(String),
    /// The requested grid denominator cannot represent the marginals.
    BadDenom(String),
    /// No finite-cost plan exists for this instance.
    NotFeasible,
    /// The relaxed problem admits no signed coupling on finite arcs.
    InfeasibleRelaxed,
    /// The supplied plan is not an optimizer of the instance.
    NotOptimal,
    /// The reference measure places mass on a forbidden arc or is not a
    /// probability on finite arcs.
    BadReference(String),
    /// The random generator could not reach a finitely feasible instance
    /// within its retry budget.
    NoFeasibleAfterRetries { seed: u64, retries: u32 },
    /// A text file could not be read or parsed; `line` is 1-based, 0 when
    /// the failure is not tied to a line.
    Parse { line: usize, msg: String },
}

impl fmt::Display for Error {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch(msg) => write!(w, "shape mismatch: {}", msg),
            Error::NegativeEntry(msg) => write!(w, "negative entry: {}", msg),
            Error::MarginalSum(msg) => write!(w, "marginals must sum to 1: {}", msg),
            Error::DominationViolated { a, b } => {
                write!(w, "potentials exceed cost on positive-mass arc ({}, {})", a, b)
            }
            Error::TooLarge(msg) => write!(w, "enumeration guard exceeded: {}", msg),
            Error::BadDenom(msg) => write!(w, "bad grid denominator: {}", msg),
            Error::NotFeasible => write!(w, "no finite-cost plan exists"),
            Error::InfeasibleRelaxed => {
                write!(w, "relaxed problem infeasible: no signed coupling on finite arcs")
            }
            Error::NotOptimal => write!(w, "plan is not optimal for this instance"),
            Error::BadReference(msg) => write!(w, "bad reference measure: {}", msg),
            Error::NoFeasibleAfterRetries { seed, retries } => write!(
                w,
                "no finitely feasible instance after {} retries (seed {})",
                retries, seed
            ),
            Error::Parse { line: 0, msg } => write!(w, "{}", msg),
            Error::Parse { line, msg } => write!(w, "line {}: {}", line, msg),
        }
    }
}

impl std::error::Error for Error {}

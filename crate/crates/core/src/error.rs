use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("form is not positive definite; the count may be infinite")]
    Indefinite,
    #[error("operation requires degree {expected}, form has degree {got}")]
    Degree { expected: u32, got: u32 },
    #[error("diagonal coefficient n_{index} is not positive")]
    NonPositiveDiagonal { index: usize },
    #[error("eccentricity undefined: diagonal coefficient n_{index} is at most 1")]
    EccentricityUndefined { index: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is singular")]
    Singular,
    #[error("work estimate {estimate} exceeds the configured limit {limit}")]
    Budget { estimate: u128, limit: u128 },
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("{0}")]
    Invalid(String),
    /// A numerical invariant failed; this indicates a bug, not bad input.
    #[error("internal check failed: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::Invalid(msg.into())
    }

    pub(crate) fn check_budget(estimate: u128, limit: u128) -> crate::Result<()> {
        if estimate > limit {
            Err(Error::Budget { estimate, limit })
        } else {
            Ok(())
        }
    }
}

/// A syntax or validity error in form text, with the byte offset it refers to.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at position {pos}: {kind}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    ExpectedVariable,
    ZeroVariableIndex,
    VariableOutOfRange { index: usize, s: usize },
    NumberTooLarge,
    NonHomogeneous { expected: u32, found: u32 },
    DegreeTooSmall(u32),
    ZeroForm,
    Empty,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::ExpectedVariable => write!(f, "expected a variable x<k>"),
            ParseErrorKind::ZeroVariableIndex => write!(f, "variables are 1-indexed, found x0"),
            ParseErrorKind::VariableOutOfRange { index, s } => {
                write!(f, "variable x{index} exceeds the variable count {s}")
            }
            ParseErrorKind::NumberTooLarge => write!(f, "number too large"),
            ParseErrorKind::NonHomogeneous { expected, found } => write!(
                f,
                "non-homogeneous: term of degree {found}, expected degree {expected}"
            ),
            ParseErrorKind::DegreeTooSmall(d) => write!(f, "forms must have degree at least 2, found {d}"),
            ParseErrorKind::ZeroForm => write!(f, "form is identically zero"),
            ParseErrorKind::Empty => write!(f, "empty input"),
        }
    }
}

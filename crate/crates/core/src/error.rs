use std::fmt;

use crate::model::Menu;
use crate::Rational;

/// A negative Block–Marschak value, the certificate that a choice system is
/// not induced by any distribution over linear orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub alternative: usize,
    pub menu: Menu,
    pub value: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q(#{}, {:#b}) = {}",
            self.alternative,
            self.menu.bits(),
            self.value
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid universe: {0}")]
    Universe(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid mixture: {0}")]
    Mixture(String),
    #[error("invalid choice system: {0}")]
    System(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not rationalizable: {0}")]
    NotRationalizable(Violation),
    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

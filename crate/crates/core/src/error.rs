use thiserror::Error;

use crate::parser::SourceSpan;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no probability given for variable `{0}`")]
    MissingProbability(String),
    #[error("expression has {count} variables, exceeding the cap of {cap}")]
    TooManyVariables { count: usize, cap: usize },

    #[error("syntax error at {span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("syntax error on line {line}: {message}")]
    ProbSyntax { line: usize, message: String },
    #[error("probability for `{name}` is {value}, outside [0, 1]")]
    OutOfRange { name: String, value: String },
    #[error("variable `{0}` is assigned more than once")]
    DuplicateName(String),

    #[error("variable `{0}` does not occur in the expression")]
    VariableAbsent(String),
    #[error("variable `{0}` occurs under a negation")]
    NegatedOccurrence(String),
    #[error("invalid partition of occurrences: {0}")]
    InvalidPartition(String),
    #[error("expression is not in template form for `{var}`: {reason}")]
    NotTemplateForm { var: String, reason: String },
    #[error("variable `{0}` occurs with mixed polarity")]
    MixedPolarity(String),

    #[error("plan does not match the template: {0}")]
    PlanMismatch(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("bound invariant violated: {0}")]
    InvariantBreach(String),
    #[error("step {index} ({var}): {source}")]
    Step {
        index: usize,
        var: String,
        source: Box<Error>,
    },

    #[error("probabilities sum to {0}, not 1")]
    ProbSumNotOne(String),
    #[error("correlation {rho} is outside [{min}, 1] for marginal {q}")]
    RhoOutOfRange { q: String, rho: String, min: String },
    #[error("marginal {0} must lie strictly between 0 and 1")]
    MarginalOutOfRange(String),
    #[error("event `{0}` is trivial (probability 0 or 1)")]
    TrivialEvent(String),
    #[error("closed form and enumeration disagree by {discrepancy:e} at {context}")]
    OracleMismatch { discrepancy: f64, context: String },
    #[error("could not realize the requested correlation: {0}")]
    NoConvergence(String),
}

impl Error {
    /// Innermost error, looking through step annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for errors that indicate a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self.root(),
            Error::InvariantBreach(_) | Error::OracleMismatch { .. } | Error::NoConvergence(_)
        )
    }

    /// True for lexical and grammatical input errors.
    pub fn is_parse(&self) -> bool {
        matches!(
            self.root(),
            Error::Syntax { .. }
                | Error::ProbSyntax { .. }
                | Error::OutOfRange { .. }
                | Error::DuplicateName(_)
        )
    }
}

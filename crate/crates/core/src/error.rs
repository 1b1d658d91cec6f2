use thiserror::Error;

use crate::term::Term;
use crate::truth::TruthValue;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TruthError {
    #[error("truth value ({belief} . {disbelief}) is outside a, b >= 0, a + b <= 1")]
    OutOfRange { belief: f64, disbelief: f64 },
    #[error("malformed truth value `{0}`, expected `(a . b)`")]
    Malformed(String),
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
    #[error("total conflict combining {left} with {right}")]
    TotalConflict { left: TruthValue, right: TruthValue },
    #[error("certain value {0} cannot be removed from an accumulation")]
    NotCertainRemovable(TruthValue),
    #[error("no valid residual removing {component} from {total}")]
    NoValidResidual {
        total: TruthValue,
        component: TruthValue,
    },
    #[error("value {value} out of range for `{name}`")]
    BadVariable { name: String, value: f64 },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(
        "{line}:{column}: truth value ({belief} . {disbelief}) violates a, b >= 0, a + b <= 1"
    )]
    Range {
        line: usize,
        column: usize,
        belief: f64,
        disbelief: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolutionError {
    #[error("atom {0} does not occur in both clauses")]
    AtomNotShared(Term),
    #[error("resolvent is tautological")]
    TautologicalResolvent,
    #[error("resolvent is the empty clause")]
    EmptyResolvent,
    #[error("clause contains both {0} and its negation")]
    TautologicalClause(Term),
    #[error("clause literal {0} is not ground")]
    NonGroundLiteral(Term),
    #[error("clause has no literals")]
    EmptyClause,
    #[error("total conflict between the parent clauses")]
    TotalConflict,
    #[error("saturation stopped after {rounds} rounds; partial value {partial}")]
    IterationBoundExceeded { rounds: usize, partial: TruthValue },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Truth(#[from] TruthError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error("inference exceeded the maximum chain depth of {0}")]
    DepthExceeded(usize),
    #[error("sentence {0} must be ground")]
    NotGround(Term),
    #[error("{0} is not a sentence")]
    NotASentence(Term),
    #[error("no justification for rule {rule} with bindings {bindings}")]
    NotFound { rule: usize, bindings: String },
    #[error("{0}")]
    Invalid(String),
}

//! Probabilistic knowledge base.
//!
//! Sentences carry a truth value `(belief . disbelief)`. Evidence from
//! independent sources is combined, rules propagate values forward as facts
//! change and backward when goals are proved, and ground clauses can be
//! saturated by probabilistic resolution. A control table picks the method
//! that answers each query.

pub mod backward;
pub mod cli;
pub mod control;
pub mod error;
pub mod forward;
pub mod kb;
pub mod par;
pub mod query;
pub mod resolution;
pub mod syntax;
pub mod term;
pub mod trace;
pub mod truth;

pub use backward::{prove, AgendaOrder, AnswerTable, Prover};
pub use control::{ControlTable, Dispatch, Method};
pub use error::{EngineError, ParseError, ResolutionError, TruthError};
pub use kb::{Answer, KnowledgeBase, RuleId};
pub use par::Execution;
pub use query::{Query, QueryResult};
pub use resolution::{resolve, saturate, saturate_all, Clause, Literal};
pub use syntax::{parse_kb, parse_sentence, parse_statement, parse_truth, print_kb, Statement};
pub use term::{unify, Bindings, Term, Var};
pub use truth::{apply_tag, combine, negate, uncombine, EngineConfig, Tag, TruthValue};

//! Trace events emitted by the chainers, one line each.

use std::fmt;

use crate::kb::RuleId;
use crate::term::{Bindings, Term};
use crate::truth::{Tag, TruthValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskSource {
    Fact,
    Rule(RuleId),
}

impl fmt::Display for TaskSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskSource::Fact => f.write_str("fact"),
            TaskSource::Rule(id) => write!(f, "rule:{id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Fire {
        rule: RuleId,
        bindings: Bindings,
        contribution: TruthValue,
    },
    Skip {
        rule: RuleId,
        bindings: Bindings,
        contribution: TruthValue,
    },
    Retract {
        rule: RuleId,
        bindings: Bindings,
        contribution: TruthValue,
    },
    Task {
        goal: Term,
        source: TaskSource,
        acc: TruthValue,
    },
    Accept {
        goal: Term,
        tag: Tag,
        at: f64,
    },
}

impl TraceEvent {
    pub fn is_rule_task(&self) -> bool {
        matches!(
            self,
            TraceEvent::Task {
                source: TaskSource::Rule(_),
                ..
            }
        )
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Fire {
                rule,
                bindings,
                contribution,
            } => write!(f, "FIRE rule={rule} bind={bindings} contrib={contribution}"),
            TraceEvent::Skip {
                rule,
                bindings,
                contribution,
            } => write!(f, "SKIP rule={rule} bind={bindings} contrib={contribution}"),
            TraceEvent::Retract {
                rule,
                bindings,
                contribution,
            } => write!(
                f,
                "RETRACT rule={rule} bind={bindings} contrib={contribution}"
            ),
            TraceEvent::Task { goal, source, acc } => {
                write!(f, "TASK goal={goal} src={source} acc={acc}")
            }
            TraceEvent::Accept { goal, tag, at } => {
                write!(f, "ACCEPT goal={goal} tag={tag} at={at}")
            }
        }
    }
}

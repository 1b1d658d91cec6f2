//! Meta-level control: which inference method answers which goals.
//!
//! Entries are `(control <pattern> <method>)`. The first entry whose pattern
//! unifies with a goal picks the method; goals matching nothing are looked up
//! and, if lookup finds no answer, backward chained.

use std::fmt;
use std::str::FromStr;

use crate::term::{unify, Bindings, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Lookup,
    BackwardChain,
    Resolution,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lookup => "lookup",
            Method::BackwardChain => "backward-chain",
            Method::Resolution => "resolution",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lookup" => Ok(Method::Lookup),
            "backward-chain" | "bc" => Ok(Method::BackwardChain),
            "resolution" => Ok(Method::Resolution),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispatch {
    Method(Method),
    /// Lookup, then backward chaining if lookup has no answers.
    Default,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlEntry {
    pub pattern: Term,
    pub method: Method,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ControlTable {
    entries: Vec<ControlEntry>,
}

impl ControlTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, pattern: Term, method: Method) {
        self.entries.push(ControlEntry { pattern, method });
    }

    pub fn entries(&self) -> &[ControlEntry] {
        &self.entries
    }

    pub fn dispatch(&self, goal: &Term) -> Dispatch {
        self.entries
            .iter()
            .find(|entry| {
                // Patterns and goals share variable names freely; keep them apart.
                let pattern = entry.pattern.rename_apart(u32::MAX - 1);
                unify(&pattern, goal, &Bindings::new()).is_some()
            })
            .map_or(Dispatch::Default, |entry| Dispatch::Method(entry.method))
    }
}

//! Agenda-based backward chaining with truth-value accumulation.
//!
//! Proving a goal does not stop at the first rule that succeeds: every fact
//! and every rule whose consequence unifies with the goal contributes, and
//! contributions are combined per binding of the goal's variables. Each goal
//! gets an agenda of tasks (one fact lookup, one task per applicable rule)
//! ordered by how much evidence the task could contribute. Tasks read and
//! update the live answer table when they run, never a copy taken when they
//! were queued.
//!
//! A binding is accepted once its confirmation or disconfirmation reaches
//! `accept-as-true`; later contributions to it are ignored, and for a ground
//! goal the remaining tasks are not run at all. Rules whose value has mass
//! below `inference-cutoff` are never attempted.
//!
//! Fact tasks read the asserted evidence of stored sentences. Whatever the
//! forward chainer derived is recomputed here through the rules instead, so
//! the two chainers agree on acyclic knowledge bases.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;

use crate::error::EngineError;
use crate::kb::{KnowledgeBase, RuleId};
use crate::term::{normalize_negation, unify, Bindings, Term, Var};
use crate::trace::{TaskSource, TraceEvent};
use crate::truth::{apply_tag, combine, conjoin, negate, propagate, EngineConfig, Tag, TruthValue};

/// How tasks on a goal's agenda are ordered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum AgendaOrder {
    /// Largest possible contribution first: 1 for the fact lookup, the mass
    /// of the rule value for rule tasks.
    #[default]
    ContributionBound,
    /// Queue order: the fact lookup, then rules as they appear in the KB.
    Insertion,
    /// Smallest possible contribution first.
    SmallestFirst,
}

impl AgendaOrder {
    fn priority(self, bound: f64, seq: usize) -> f64 {
        match self {
            AgendaOrder::ContributionBound => bound,
            AgendaOrder::Insertion => -(seq as f64),
            AgendaOrder::SmallestFirst => -bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub source: TaskSource,
    pub priority: f64,
    seq: usize,
}

impl Eq for Task {}

impl Ord for Task {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| Reverse(self.seq).cmp(&Reverse(other.seq)))
    }
}

impl PartialOrd for Task {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProvedRow {
    /// Bindings of the goal's variables.
    pub bindings: Bindings,
    pub tv: TruthValue,
    /// Set when the row reached `accept-as-true`.
    pub accepted: Option<Tag>,
}

/// Accumulated answers for one goal.
#[derive(Debug, Clone, PartialEq)]
pub struct AnswerTable {
    pub goal: Term,
    pub rows: Vec<ProvedRow>,
}

impl AnswerTable {
    /// Value for one binding of the goal variables, vacuous if absent.
    pub fn value(&self, bindings: &Bindings) -> TruthValue {
        self.rows
            .iter()
            .find(|r| &r.bindings == bindings)
            .map_or(TruthValue::VACUOUS, |r| r.tv)
    }

    /// Value of a ground goal.
    pub fn ground_value(&self) -> TruthValue {
        self.value(&Bindings::new())
    }
}

impl fmt::Display for AnswerTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            writeln!(f, "{} {}", row.bindings, row.tv)?;
        }
        Ok(())
    }
}

/// Cached answers, aligned with the variables of the goal's canonical form.
type CachedRows = Vec<(Vec<Option<Term>>, TruthValue, Option<Tag>)>;

pub struct Prover<'kb> {
    kb: &'kb KnowledgeBase,
    config: EngineConfig,
    order: AgendaOrder,
    trace: Option<Vec<TraceEvent>>,
    cache: HashMap<Term, CachedRows>,
    stack: Vec<Term>,
    tainted: Vec<bool>,
    generation: u32,
}

impl<'kb> Prover<'kb> {
    pub fn new(kb: &'kb KnowledgeBase) -> Self {
        Prover {
            kb,
            config: kb.config,
            order: AgendaOrder::default(),
            trace: None,
            cache: HashMap::new(),
            stack: Vec::new(),
            tainted: Vec::new(),
            generation: 0,
        }
    }

    pub fn with_config(mut self, config: EngineConfig) -> Self {
        self.config = config;
        self
    }

    pub fn with_order(mut self, order: AgendaOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.trace = on.then(Vec::new);
        self
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn emit(&mut self, event: TraceEvent) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(event);
        }
    }

    /// Proves `goal`, which may contain variables and `(not ...)` wrappers.
    pub fn prove(&mut self, goal: &Term) -> Result<AnswerTable, EngineError> {
        let (core, flipped) = normalize_negation(goal);
        if !core.is_sentence() {
            return Err(EngineError::NotASentence(goal.clone()));
        }
        let rows = self.solve(&core)?;
        let rows = rows
            .into_iter()
            .map(|mut row| {
                if flipped {
                    row.tv = negate(row.tv);
                    row.accepted = row.accepted.map(|tag| match tag {
                        Tag::T => Tag::Not,
                        _ => Tag::T,
                    });
                }
                row
            })
            .collect();
        Ok(AnswerTable {
            goal: goal.clone(),
            rows,
        })
    }

    fn solve(&mut self, goal: &Term) -> Result<Vec<ProvedRow>, EngineError> {
        let key = goal.canonical();
        let vars = goal.variables();
        if let Some(cached) = self.cache.get(&key) {
            return Ok(from_cache(cached, &vars));
        }
        if let Some(ancestor) = self.stack.iter().position(|g| *g == key) {
            for flag in &mut self.tainted[ancestor + 1..] {
                *flag = true;
            }
            return Ok(ground_default(goal, Vec::new()));
        }
        if self.stack.len() >= self.config.max_chain_depth {
            return Err(EngineError::DepthExceeded(self.config.max_chain_depth));
        }
        self.stack.push(key.clone());
        self.tainted.push(false);
        let result = self.run_agenda(goal, &vars);
        self.stack.pop();
        let tainted = self.tainted.pop().unwrap_or(false);
        let rows = result?;
        if !tainted {
            self.cache.insert(key, to_cache(&rows, &vars));
        }
        Ok(rows)
    }

    fn run_agenda(&mut self, goal: &Term, vars: &[Var]) -> Result<Vec<ProvedRow>, EngineError> {
        let kb = self.kb;
        let mut agenda = BinaryHeap::new();
        let mut seq = 0;
        agenda.push(Task {
            source: TaskSource::Fact,
            priority: self.order.priority(1.0, seq),
            seq,
        });
        for rule in kb.rules() {
            let bound = rule.tv.mass();
            if bound <= 0.0 || bound < self.config.inference_cutoff {
                continue;
            }
            let consequence = rule.consequence.rename_apart(u32::MAX - 2);
            if unify(&consequence, goal, &Bindings::new()).is_none() {
                continue;
            }
            seq += 1;
            agenda.push(Task {
                source: TaskSource::Rule(rule.id),
                priority: self.order.priority(bound, seq),
                seq,
            });
        }

        let mut table: BTreeMap<Bindings, ProvedRow> = BTreeMap::new();
        let ground = vars.is_empty();
        while let Some(task) = agenda.pop() {
            if ground && table.values().any(|r| r.accepted.is_some()) {
                break;
            }
            let contributions = match task.source {
                TaskSource::Fact => kb
                    .candidates(goal)
                    .filter(|e| !e.asserted.is_vacuous())
                    .filter_map(|e| {
                        unify(goal, &e.sentence, &Bindings::new())
                            .map(|b| (b.restrict(vars), e.asserted))
                    })
                    .collect::<Vec<_>>(),
                TaskSource::Rule(id) => self.apply_rule(id, goal, vars)?,
            };
            let mut touched = Vec::new();
            for (bindings, contribution) in contributions {
                if contribution.is_vacuous() {
                    continue;
                }
                let row = table.entry(bindings.clone()).or_insert_with(|| ProvedRow {
                    bindings: bindings.clone(),
                    tv: TruthValue::VACUOUS,
                    accepted: None,
                });
                if row.accepted.is_some() {
                    continue;
                }
                row.tv = combine(row.tv, contribution)?;
                if !touched.contains(&bindings) {
                    touched.push(bindings.clone());
                }
            }
            self.report(goal, task.source, &mut table, &touched, ground);
        }
        Ok(ground_default(goal, table.into_values().collect()))
    }

    /// Emits the TASK line(s) for an executed task and marks rows that
    /// reached the acceptance threshold.
    fn report(
        &mut self,
        goal: &Term,
        source: TaskSource,
        table: &mut BTreeMap<Bindings, ProvedRow>,
        touched: &[Bindings],
        ground: bool,
    ) {
        let threshold = self.config.accept_as_true;
        if ground || touched.is_empty() {
            let acc = table
                .get(&Bindings::new())
                .map_or(TruthValue::VACUOUS, |r| r.tv);
            self.emit(TraceEvent::Task {
                goal: goal.clone(),
                source,
                acc,
            });
        }
        for bindings in touched {
            let Some(row) = table.get_mut(bindings) else {
                continue;
            };
            let instance = bindings.resolve(goal);
            if !ground {
                let acc = row.tv;
                if let Some(trace) = self.trace.as_mut() {
                    trace.push(TraceEvent::Task {
                        goal: instance.clone(),
                        source,
                        acc,
                    });
                }
            }
            let accepted = [Tag::T, Tag::Not]
                .into_iter()
                .find(|&tag| apply_tag(tag, row.tv) >= threshold);
            if let Some(tag) = accepted {
                row.accepted = Some(tag);
                let at = apply_tag(tag, row.tv);
                self.emit(TraceEvent::Accept {
                    goal: instance,
                    tag,
                    at,
                });
            }
        }
    }

    /// Contributions of one rule to `goal`, one per premise instance.
    fn apply_rule(
        &mut self,
        id: RuleId,
        goal: &Term,
        vars: &[Var],
    ) -> Result<Vec<(Bindings, TruthValue)>, EngineError> {
        let Some(rule) = self.kb.rule(id) else {
            return Ok(Vec::new());
        };
        self.generation += 1;
        let generation = self.generation;
        let consequence = rule.consequence.rename_apart(generation);
        let Some(head) = unify(&consequence, goal, &Bindings::new()) else {
            return Ok(Vec::new());
        };
        let conjuncts: Vec<Term> = rule
            .conjuncts
            .iter()
            .map(|c| c.rename_apart(generation))
            .collect();
        let rule_tv = rule.tv;

        let mut frontier = vec![(head, TruthValue::TRUE)];
        for conjunct in &conjuncts {
            let (core, flipped) = normalize_negation(conjunct);
            let mut next = Vec::new();
            for (bindings, acc) in frontier {
                let subgoal = bindings.resolve(&core);
                let sub_vars = subgoal.variables();
                for row in self.solve(&subgoal)? {
                    let mut extended = bindings.clone();
                    for var in &sub_vars {
                        if let Some(value) = row.bindings.get(var) {
                            extended.insert(var.clone(), value.clone());
                        }
                    }
                    let tv = if flipped { negate(row.tv) } else { row.tv };
                    next.push((extended, conjoin(acc, tv)));
                }
            }
            frontier = next;
        }

        Ok(frontier
            .into_iter()
            .map(|(bindings, premise)| (bindings.restrict(vars), propagate(premise, rule_tv)))
            .collect())
    }
}

/// Ground goals always answer, vacuously if nothing contributed.
fn ground_default(goal: &Term, mut rows: Vec<ProvedRow>) -> Vec<ProvedRow> {
    if goal.is_ground() && rows.is_empty() {
        rows.push(ProvedRow {
            bindings: Bindings::new(),
            tv: TruthValue::VACUOUS,
            accepted: None,
        });
    }
    rows
}

fn to_cache(rows: &[ProvedRow], vars: &[Var]) -> CachedRows {
    rows.iter()
        .map(|row| {
            let values = vars.iter().map(|v| row.bindings.get(v).cloned()).collect();
            (values, row.tv, row.accepted)
        })
        .collect()
}

fn from_cache(cached: &CachedRows, vars: &[Var]) -> Vec<ProvedRow> {
    cached
        .iter()
        .map(|(values, tv, accepted)| ProvedRow {
            bindings: vars
                .iter()
                .zip(values)
                .filter_map(|(v, value)| value.clone().map(|t| (v.clone(), t)))
                .collect(),
            tv: *tv,
            accepted: *accepted,
        })
        .collect()
}

/// Proves `goal` against `kb` with the given configuration.
pub fn prove(
    kb: &KnowledgeBase,
    goal: &Term,
    config: EngineConfig,
) -> Result<AnswerTable, EngineError> {
    Prover::new(kb).with_config(config).prove(goal)
}

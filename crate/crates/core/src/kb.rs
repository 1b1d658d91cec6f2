//! The probabilistic database.
//!
//! Facts are stored once per ground sentence, negation-normalized: stashing
//! `(not s)` with `(a . b)` stores `s` with `(b . a)`. Each entry keeps the
//! value asserted directly by the user apart from its total, which also
//! folds in every live rule contribution recorded in the justification
//! ledger. Mutations run the forward chainer before returning.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::control::{ControlTable, Method};
use crate::error::EngineError;
use crate::resolution::{Clause, Literal};
use crate::syntax::{self, Statement};
use crate::term::{normalize_negation, unify, Bindings, Term, Var};
use crate::trace::TraceEvent;
use crate::truth::{apply_tag, combine, negate, EngineConfig, Tag, TruthValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub usize);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `(rule premise consequence tv)`: when the premise holds, the
/// consequence receives `tv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: RuleId,
    pub premise: Term,
    /// Premise literals; `(not ...)` wrappers are kept here.
    pub conjuncts: Vec<Term>,
    /// Negation-normalized consequence.
    pub consequence: Term,
    pub tv: TruthValue,
    pub premise_vars: Vec<Var>,
}

impl Rule {
    fn new(
        id: RuleId,
        premise: Term,
        consequence: Term,
        tv: TruthValue,
    ) -> Result<Rule, EngineError> {
        let conjuncts: Vec<Term> = match premise.head() {
            Some("and") if premise.arity() > 0 => premise.args().to_vec(),
            _ => vec![premise.clone()],
        };
        for conjunct in &conjuncts {
            let (core, _) = normalize_negation(conjunct);
            if !core.is_sentence() {
                return Err(EngineError::NotASentence(conjunct.clone()));
            }
        }
        let (core, flipped) = normalize_negation(&consequence);
        if !core.is_sentence() {
            return Err(EngineError::NotASentence(consequence));
        }
        let premise_vars = premise.variables();
        Ok(Rule {
            id,
            premise,
            conjuncts,
            consequence: core,
            tv: if flipped { negate(tv) } else { tv },
            premise_vars,
        })
    }

    /// Whether forward chaining can ground the consequence.
    pub fn is_forward_safe(&self) -> bool {
        self.consequence
            .variables()
            .iter()
            .all(|v| self.premise_vars.contains(v))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(rule {} {} {})",
            self.premise, self.consequence, self.tv
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactEntry {
    pub sentence: Term,
    /// Total value: asserted evidence combined with live rule contributions.
    pub tv: TruthValue,
    /// Evidence asserted directly with stash/set_truth.
    pub asserted: TruthValue,
}

/// One rule firing, kept so its contribution can be backed out later.
#[derive(Debug, Clone, PartialEq)]
pub struct Justification {
    pub rule: RuleId,
    pub bindings: Bindings,
    pub premise_tv: TruthValue,
    pub contribution: TruthValue,
    pub consequence: Term,
}

pub type JustificationKey = (RuleId, Bindings);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ledger {
    records: BTreeMap<JustificationKey, Justification>,
    by_consequence: HashMap<Term, BTreeSet<JustificationKey>>,
}

impl Ledger {
    /// Records `j`, replacing any previous record for the same key.
    pub fn record(&mut self, j: Justification) {
        let key = (j.rule, j.bindings.clone());
        if let Some(old) = self.records.get(&key) {
            if old.consequence != j.consequence {
                let old_consequence = old.consequence.clone();
                self.unindex(&old_consequence, &key);
            }
        }
        self.by_consequence
            .entry(j.consequence.clone())
            .or_default()
            .insert(key.clone());
        self.records.insert(key, j);
    }

    pub fn find(&self, rule: RuleId, bindings: &Bindings) -> Option<&Justification> {
        self.records.get(&(rule, bindings.clone()))
    }

    pub fn retract(
        &mut self,
        rule: RuleId,
        bindings: &Bindings,
    ) -> Result<Justification, EngineError> {
        let key = (rule, bindings.clone());
        let j = self
            .records
            .remove(&key)
            .ok_or_else(|| EngineError::NotFound {
                rule: rule.0,
                bindings: bindings.to_string(),
            })?;
        self.unindex(&j.consequence, &key);
        Ok(j)
    }

    fn unindex(&mut self, consequence: &Term, key: &JustificationKey) {
        if let Some(keys) = self.by_consequence.get_mut(consequence) {
            keys.remove(key);
            if keys.is_empty() {
                self.by_consequence.remove(consequence);
            }
        }
    }

    /// Live justifications supporting one ground consequence.
    pub fn supporting(&self, consequence: &Term) -> impl Iterator<Item = &Justification> {
        self.by_consequence
            .get(consequence)
            .into_iter()
            .flatten()
            .filter_map(|key| self.records.get(key))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Justification> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// One lookup or query answer.
#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub bindings: Bindings,
    /// Truth value of the goal as written, so `(not s)` reads flipped.
    pub tv: TruthValue,
    pub value: f64,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}", self.bindings, self.value)
    }
}

/// Orders answers by value, highest first, then by binding text.
pub fn sort_answers(answers: &mut [Answer]) {
    answers.sort_by(|x, y| {
        y.value
            .total_cmp(&x.value)
            .then_with(|| x.bindings.to_string().cmp(&y.bindings.to_string()))
    });
}

/// How a query pattern is read: `(not p)` flips the value of `p`, and a
/// tag-named wrapper such as `(unknown p)` overrides the requested tag.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Reading {
    pub core: Term,
    pub flipped: bool,
    pub tag: Tag,
}

impl Reading {
    pub fn of(pattern: &Term, tag: Tag) -> Reading {
        let (outer, outer_flip) = normalize_negation(pattern);
        for wrapper in [Tag::Unknown, Tag::Poss, Tag::PossNot, Tag::Mass] {
            if let Some(inner) = outer.unwrap_unary(wrapper.name()) {
                let (core, inner_flip) = normalize_negation(inner);
                return Reading {
                    core,
                    flipped: outer_flip != inner_flip,
                    tag: wrapper,
                };
            }
        }
        Reading {
            core: outer,
            flipped: outer_flip,
            tag,
        }
    }

    pub fn orient(&self, tv: TruthValue) -> TruthValue {
        if self.flipped {
            negate(tv)
        } else {
            tv
        }
    }
}

type IndexKey = (Arc<str>, usize);

fn index_key(sentence: &Term) -> Option<IndexKey> {
    sentence.head().map(|h| (Arc::from(h), sentence.arity()))
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    pub(crate) facts: HashMap<Term, FactEntry>,
    index: HashMap<IndexKey, BTreeSet<Term>>,
    pub(crate) rules: Vec<Rule>,
    pub(crate) ledger: Ledger,
    pub(crate) controls: ControlTable,
    pub(crate) clauses: Vec<Clause>,
    pub config: EngineConfig,
    pub(crate) trace: Option<Vec<TraceEvent>>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_config(config: EngineConfig) -> Self {
        KnowledgeBase {
            config,
            ..Self::default()
        }
    }

    /// Starts buffering trace events; see [`KnowledgeBase::take_trace`].
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn tracing(&self) -> bool {
        self.trace.is_some()
    }

    pub(crate) fn emit(&mut self, event: TraceEvent) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(event);
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> Option<&Rule> {
        self.rules.get(id.0)
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn controls(&self) -> &ControlTable {
        &self.controls
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// All stored entries, sorted by sentence.
    pub fn facts(&self) -> Vec<&FactEntry> {
        let mut out: Vec<&FactEntry> = self.facts.values().collect();
        out.sort_by(|x, y| x.sentence.cmp(&y.sentence));
        out
    }

    pub fn entry(&self, sentence: &Term) -> Option<&FactEntry> {
        let (core, _) = normalize_negation(sentence);
        self.facts.get(&core)
    }

    /// Exact three-valued read: the value of a ground sentence, `(0 . 0)` for
    /// sentences never stored.
    pub fn retrieve(&self, sentence: &Term) -> TruthValue {
        let (core, flipped) = normalize_negation(sentence);
        let tv = self.facts.get(&core).map_or(TruthValue::VACUOUS, |e| e.tv);
        if flipped {
            negate(tv)
        } else {
            tv
        }
    }

    /// Like [`KnowledgeBase::retrieve`] but for the asserted component only.
    pub fn retrieve_asserted(&self, sentence: &Term) -> TruthValue {
        let (core, flipped) = normalize_negation(sentence);
        let tv = self
            .facts
            .get(&core)
            .map_or(TruthValue::VACUOUS, |e| e.asserted);
        if flipped {
            negate(tv)
        } else {
            tv
        }
    }

    /// Stored sentences that could unify with `pattern` (same head and arity).
    pub(crate) fn candidates(&self, pattern: &Term) -> impl Iterator<Item = &FactEntry> {
        index_key(pattern)
            .and_then(|key| self.index.get(&key))
            .into_iter()
            .flatten()
            .filter_map(|s| self.facts.get(s))
    }

    /// Facts matching `pattern` whose tagged value is at least `cutoff`.
    ///
    /// A pattern `(not p)` reads the disconfirmation of `p`; a wrapper named
    /// after a tag (`(unknown p)`, `(poss p)`, `(poss-not p)`, `(mass p)`)
    /// replaces `tag`. Sentences never stored produce no answers.
    pub fn lookup(&self, pattern: &Term, tag: Tag, cutoff: f64) -> Vec<Answer> {
        let reading = Reading::of(pattern, tag);
        let vars = pattern.variables();
        let mut answers: Vec<Answer> = self
            .candidates(&reading.core)
            .filter_map(|entry| {
                let bindings = unify(&reading.core, &entry.sentence, &Bindings::new())?;
                let tv = reading.orient(entry.tv);
                let value = apply_tag(reading.tag, tv);
                (value >= cutoff).then(|| Answer {
                    bindings: bindings.restrict(&vars),
                    tv,
                    value,
                })
            })
            .collect();
        sort_answers(&mut answers);
        answers
    }

    /// Combines new evidence into a sentence's value.
    pub fn stash(&mut self, sentence: &Term, tv: TruthValue) -> Result<(), EngineError> {
        let (core, flipped) = self.ground_core(sentence)?;
        if tv.is_vacuous() {
            return Ok(());
        }
        let tv = if flipped { negate(tv) } else { tv };
        self.transaction(|kb| {
            let (old, asserted) = kb
                .facts
                .get(&core)
                .map_or((TruthValue::VACUOUS, TruthValue::VACUOUS), |e| {
                    (e.tv, e.asserted)
                });
            let new = combine(old, tv)?;
            let asserted = combine(asserted, tv)?;
            kb.put(core.clone(), new, asserted);
            kb.changed(&core, old, new)
        })
    }

    /// Replaces the asserted value of a sentence. Rule contributions already
    /// supporting it stay in place, so for a sentence no rule concludes the
    /// stored value becomes exactly `tv`.
    pub fn set_truth(&mut self, sentence: &Term, tv: TruthValue) -> Result<(), EngineError> {
        let (core, flipped) = self.ground_core(sentence)?;
        let tv = if flipped { negate(tv) } else { tv };
        self.transaction(|kb| {
            let old = kb.facts.get(&core).map_or(TruthValue::VACUOUS, |e| e.tv);
            let new = kb.rebuild_with(&core, tv, None)?;
            kb.put(core.clone(), new, tv);
            kb.changed(&core, old, new)
        })
    }

    /// Runs the forward chainer on a value change and reports any failure
    /// with the store rolled back.
    pub fn propagate_change(
        &mut self,
        sentence: &Term,
        old: TruthValue,
        new: TruthValue,
    ) -> Result<(), EngineError> {
        let (core, flipped) = self.ground_core(sentence)?;
        let (old, new) = if flipped {
            (negate(old), negate(new))
        } else {
            (old, new)
        };
        self.transaction(|kb| kb.changed(&core, old, new))
    }

    fn changed(
        &mut self,
        core: &Term,
        old: TruthValue,
        new: TruthValue,
    ) -> Result<(), EngineError> {
        if crate::truth::delta_mass(old, new) == 0.0 {
            return Ok(());
        }
        crate::forward::on_change(self, core, 0)
    }

    fn ground_core(&self, sentence: &Term) -> Result<(Term, bool), EngineError> {
        let (core, flipped) = normalize_negation(sentence);
        if !core.is_sentence() {
            return Err(EngineError::NotASentence(sentence.clone()));
        }
        if !core.is_ground() {
            return Err(EngineError::NotGround(sentence.clone()));
        }
        Ok((core, flipped))
    }

    /// Runs `f`, restoring the previous state if it fails.
    fn transaction<T>(
        &mut self,
        f: impl FnOnce(&mut Self) -> Result<T, EngineError>,
    ) -> Result<T, EngineError> {
        let saved = self.clone();
        match f(self) {
            Ok(value) => Ok(value),
            Err(err) => {
                // Keep whatever was traced up to the failure.
                let trace = self.trace.take();
                *self = saved;
                self.trace = trace;
                Err(err)
            }
        }
    }

    pub(crate) fn put(&mut self, sentence: Term, tv: TruthValue, asserted: TruthValue) {
        if let Some(key) = index_key(&sentence) {
            self.index.entry(key).or_default().insert(sentence.clone());
        }
        self.facts.insert(
            sentence.clone(),
            FactEntry {
                sentence,
                tv,
                asserted,
            },
        );
    }

    /// Recomputes a consequence's total from `asserted` and its live
    /// justifications, with `replace` overriding one justification's
    /// contribution (or dropping it when the value is `None`).
    pub(crate) fn rebuild_with(
        &self,
        sentence: &Term,
        asserted: TruthValue,
        replace: Option<(&JustificationKey, Option<TruthValue>)>,
    ) -> Result<TruthValue, EngineError> {
        let mut total = asserted;
        let mut replaced = false;
        for j in self.ledger.supporting(sentence) {
            let contribution = match replace {
                Some((key, value)) if key.0 == j.rule && key.1 == j.bindings => {
                    replaced = true;
                    match value {
                        Some(v) => v,
                        None => continue,
                    }
                }
                _ => j.contribution,
            };
            total = combine(total, contribution)?;
        }
        if let (Some((_, Some(value))), false) = (replace, replaced) {
            total = combine(total, value)?;
        }
        Ok(total)
    }

    pub fn add_rule(
        &mut self,
        premise: Term,
        consequence: Term,
        tv: TruthValue,
    ) -> Result<RuleId, EngineError> {
        let id = RuleId(self.rules.len());
        let rule = Rule::new(id, premise, consequence, tv)?;
        self.transaction(|kb| {
            kb.rules.push(rule);
            crate::forward::fire_new_rule(kb, id)?;
            Ok(id)
        })
    }

    pub fn add_clause(
        &mut self,
        literals: Vec<Literal>,
        tv: TruthValue,
    ) -> Result<(), EngineError> {
        let clause = Clause::new(literals, tv)?;
        let index = self.clauses.len();
        self.clauses.push(clause.with_support([index].into()));
        Ok(())
    }

    pub fn add_control(&mut self, pattern: Term, method: Method) {
        self.controls.add(pattern, method);
    }

    pub fn set_var(&mut self, name: &str, value: f64) -> Result<(), EngineError> {
        self.config.set(name, value)?;
        Ok(())
    }

    pub fn record_justification(&mut self, j: Justification) {
        self.ledger.record(j);
    }

    pub fn find_justification(&self, rule: RuleId, bindings: &Bindings) -> Option<&Justification> {
        self.ledger.find(rule, bindings)
    }

    pub fn retract_justification(
        &mut self,
        rule: RuleId,
        bindings: &Bindings,
    ) -> Result<Justification, EngineError> {
        self.ledger.retract(rule, bindings)
    }

    /// Live justifications whose consequence unifies with `sentence`.
    pub fn justifications_matching(&self, sentence: &Term) -> Vec<&Justification> {
        let (core, _) = normalize_negation(sentence);
        self.ledger
            .iter()
            .filter(|j| unify(&core, &j.consequence, &Bindings::new()).is_some())
            .collect()
    }

    pub fn apply(&mut self, statement: &Statement) -> Result<(), EngineError> {
        match statement {
            Statement::Fact { sentence, tv } => self.stash(sentence, *tv),
            Statement::Rule {
                premise,
                consequence,
                tv,
            } => self
                .add_rule(premise.clone(), consequence.clone(), *tv)
                .map(|_| ()),
            Statement::Clause { literals, tv } => self.add_clause(literals.clone(), *tv),
            Statement::Control { pattern, method } => {
                self.add_control(pattern.clone(), *method);
                Ok(())
            }
            Statement::SetVar { name, value } => self.set_var(name, *value),
        }
    }

    /// Parses and applies a `.pkb` text; returns how many statements ran.
    pub fn load_str(&mut self, text: &str) -> Result<usize, EngineError> {
        let statements = syntax::parse_kb(text)?;
        for statement in &statements {
            self.apply(statement)?;
        }
        Ok(statements.len())
    }

    pub fn from_text(text: &str) -> Result<Self, EngineError> {
        let mut kb = KnowledgeBase::new();
        kb.load_str(text)?;
        Ok(kb)
    }

    /// Statements that rebuild this KB: variables, asserted facts, rules,
    /// clauses and control entries. Derived values are recomputed on load.
    pub fn to_statements(&self) -> Vec<Statement> {
        let defaults = EngineConfig::default();
        let mut out = Vec::new();
        for name in EngineConfig::VARIABLES {
            let value = self.config.get(name).unwrap_or_default();
            if Some(value) != defaults.get(name) {
                out.push(Statement::SetVar {
                    name: name.to_string(),
                    value,
                });
            }
        }
        for entry in self.facts() {
            if !entry.asserted.is_vacuous() {
                out.push(Statement::Fact {
                    sentence: entry.sentence.clone(),
                    tv: entry.asserted,
                });
            }
        }
        for rule in &self.rules {
            out.push(Statement::Rule {
                premise: rule.premise.clone(),
                consequence: rule.consequence.clone(),
                tv: rule.tv,
            });
        }
        for clause in &self.clauses {
            out.push(Statement::Clause {
                literals: clause.literals().iter().cloned().collect(),
                tv: clause.tv,
            });
        }
        for entry in self.controls.entries() {
            out.push(Statement::Control {
                pattern: entry.pattern.clone(),
                method: entry.method,
            });
        }
        out
    }

    pub fn to_text(&self) -> String {
        syntax::print_kb(&self.to_statements())
    }
}

//! `truep`: answer a query with whichever method the control table selects.

use crate::backward::{AgendaOrder, Prover};
use crate::control::{Dispatch, Method};
use crate::error::{EngineError, ResolutionError};
use crate::kb::{sort_answers, Answer, KnowledgeBase, Reading};
use crate::par::{self, Execution};
use crate::resolution::{saturate_all, Literal, LiteralSet};
use crate::term::{unify, Bindings, Term};
use crate::trace::TraceEvent;
use crate::truth::{apply_tag, combine, negate, Tag, TruthValue};

/// Answers whose tagged value falls below this are dropped unless the query
/// says otherwise.
pub const DEFAULT_CUTOFF: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub goal: Term,
    pub tag: Tag,
    pub cutoff: f64,
    /// Overrides the control table.
    pub method: Option<Method>,
    pub order: AgendaOrder,
    pub trace: bool,
}

impl Query {
    pub fn new(goal: Term) -> Self {
        Query {
            goal,
            tag: Tag::T,
            cutoff: DEFAULT_CUTOFF,
            method: None,
            order: AgendaOrder::default(),
            trace: false,
        }
    }

    pub fn tag(mut self, tag: Tag) -> Self {
        self.tag = tag;
        self
    }

    pub fn cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn method(mut self, method: Method) -> Self {
        self.method = Some(method);
        self
    }

    pub fn order(mut self, order: AgendaOrder) -> Self {
        self.order = order;
        self
    }

    pub fn traced(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    /// Methods run, in order.
    pub methods: Vec<Method>,
    /// Sorted by value, highest first.
    pub answers: Vec<Answer>,
    pub trace: Vec<TraceEvent>,
}

impl KnowledgeBase {
    /// Answers `goal` under `tag` with the default method selection.
    pub fn truep(&self, goal: &Term, tag: Tag, cutoff: f64) -> Result<Vec<Answer>, EngineError> {
        Ok(self
            .query(&Query::new(goal.clone()).tag(tag).cutoff(cutoff))?
            .answers)
    }

    pub fn query(&self, query: &Query) -> Result<QueryResult, EngineError> {
        if !Reading::of(&query.goal, query.tag).core.is_sentence() {
            return Err(EngineError::NotASentence(query.goal.clone()));
        }
        let dispatch = match query.method {
            Some(m) => Dispatch::Method(m),
            None => self
                .controls
                .dispatch(&Reading::of(&query.goal, query.tag).core),
        };
        let mut result = QueryResult {
            methods: Vec::new(),
            answers: Vec::new(),
            trace: Vec::new(),
        };
        let methods: &[Method] = match dispatch {
            Dispatch::Method(Method::Lookup) => &[Method::Lookup],
            Dispatch::Method(Method::BackwardChain) => &[Method::BackwardChain],
            Dispatch::Method(Method::Resolution) => &[Method::Resolution],
            Dispatch::Default => &[Method::Lookup, Method::BackwardChain],
        };
        for &method in methods {
            result.methods.push(method);
            result.answers = match method {
                Method::Lookup => self.lookup(&query.goal, query.tag, query.cutoff),
                Method::BackwardChain => self.backward_answers(query, &mut result.trace)?,
                Method::Resolution => self.resolution_answers(query)?,
            };
            if !result.answers.is_empty() {
                break;
            }
        }
        Ok(result)
    }

    /// Runs independent queries against this KB, concurrently when
    /// `execution` allows.
    pub fn query_batch(
        &self,
        queries: &[Query],
        execution: Execution,
    ) -> Vec<Result<QueryResult, EngineError>> {
        par::map(queries, execution, |_, q| self.query(q))
    }

    fn backward_answers(
        &self,
        query: &Query,
        trace: &mut Vec<TraceEvent>,
    ) -> Result<Vec<Answer>, EngineError> {
        let reading = Reading::of(&query.goal, query.tag);
        let mut prover = Prover::new(self)
            .with_order(query.order)
            .with_trace(query.trace);
        let table = prover.prove(&reading.core);
        trace.extend(prover.take_trace());
        let answers = table?
            .rows
            .into_iter()
            .map(|row| (row.bindings, reading.orient(row.tv)))
            .collect();
        Ok(finish(answers, reading.tag, query.cutoff))
    }

    /// Saturates the clause set and reads the unit clauses on atoms that
    /// match the goal. Evidence for the atom and for its negation pool when
    /// their supports are disjoint; otherwise the weightier one stands.
    fn resolution_answers(&self, query: &Query) -> Result<Vec<Answer>, EngineError> {
        let reading = Reading::of(&query.goal, query.tag);
        let saturation = saturate_all(&self.clauses, &self.config, Execution::default());
        let mut atoms: Vec<&Term> = self.clauses.iter().flat_map(|c| c.atoms()).collect();
        atoms.sort();
        atoms.dedup();

        let mut answers = Vec::new();
        for atom in atoms {
            let Some(bindings) = unify(&reading.core, atom, &Bindings::new()) else {
                continue;
            };
            let pos: LiteralSet = [Literal::pos(atom.clone())].into();
            let neg: LiteralSet = [Literal::neg(atom.clone())].into();
            if saturation.support(&pos).is_none() && saturation.support(&neg).is_none() {
                continue;
            }
            let for_atom = saturation.value(&pos);
            let against = negate(saturation.value(&neg));
            let disjoint = match (saturation.support(&pos), saturation.support(&neg)) {
                (Some(p), Some(n)) => p.is_disjoint(n),
                _ => true,
            };
            let tv = if disjoint {
                combine(for_atom, against)?
            } else if for_atom.mass() >= against.mass() {
                for_atom
            } else {
                against
            };
            if !saturation.complete {
                return Err(ResolutionError::IterationBoundExceeded {
                    rounds: saturation.rounds,
                    partial: tv,
                }
                .into());
            }
            answers.push((
                bindings.restrict(&query.goal.variables()),
                reading.orient(tv),
            ));
        }
        Ok(finish(answers, reading.tag, query.cutoff))
    }
}

fn finish(rows: Vec<(Bindings, TruthValue)>, tag: Tag, cutoff: f64) -> Vec<Answer> {
    let mut answers: Vec<Answer> = rows
        .into_iter()
        .filter_map(|(bindings, tv)| {
            let value = apply_tag(tag, tv);
            (value >= cutoff).then_some(Answer {
                bindings,
                tv,
                value,
            })
        })
        .collect();
    sort_answers(&mut answers);
    answers
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sentence;

    fn s(text: &str) -> Term {
        parse_sentence(text).unwrap()
    }

    #[test]
    fn default_falls_back_to_backward_chaining() {
        let kb = KnowledgeBase::new();
        let mut kb = kb;
        kb.add_rule(
            s("(bird $x)"),
            s("(flies $x)"),
            TruthValue::new(0.7, 0.0).unwrap(),
        )
        .unwrap();
        kb.load_str("(fact (bird Tweety) (1 . 0))").unwrap();
        // Forward chaining already stored the derived value, so lookup answers.
        let r = kb
            .query(&Query::new(s("(flies Tweety)")).cutoff(0.5))
            .unwrap();
        assert_eq!(r.methods, vec![Method::Lookup]);
        assert_eq!(r.answers[0].value, 0.7);

        let mut kb = KnowledgeBase::new();
        kb.load_str("(fact (bird Tweety) (1 . 0))").unwrap();
        let r = kb.query(&Query::new(s("(bird $x)")).cutoff(0.5)).unwrap();
        assert_eq!(r.methods, vec![Method::Lookup]);
        let r = kb
            .query(&Query::new(s("(flies Tweety)")).cutoff(0.0))
            .unwrap();
        assert_eq!(r.methods, vec![Method::Lookup, Method::BackwardChain]);
    }

    #[test]
    fn control_entries_route_to_resolution() {
        let kb = KnowledgeBase::from_text(
            "(clause (or (p a) (q a)) (1 . 0))\n\
             (clause (or (not (p a))) (1 . 0))\n\
             (control (q $x) resolution)",
        )
        .unwrap();
        let r = kb.query(&Query::new(s("(q $x)"))).unwrap();
        assert_eq!(r.methods, vec![Method::Resolution]);
        assert_eq!(r.answers.len(), 1);
        assert_eq!(r.answers[0].to_string(), "{$x=a} 1.0");
        let r = kb
            .query(&Query::new(s("(not (p a))")).method(Method::Resolution))
            .unwrap();
        assert_eq!(r.answers[0].value, 1.0);
    }

    #[test]
    fn method_override_beats_control_table() {
        let kb = KnowledgeBase::from_text(
            "(fact (foo fred) (0.9 . 0))\n\
             (control (foo $x) resolution)",
        )
        .unwrap();
        let r = kb
            .query(
                &Query::new(s("(foo fred)"))
                    .cutoff(0.5)
                    .method(Method::Lookup),
            )
            .unwrap();
        assert_eq!(r.answers.len(), 1);
        let r = kb.query(&Query::new(s("(foo fred)")).cutoff(0.5)).unwrap();
        assert!(r.answers.is_empty());
    }

    #[test]
    fn batch_matches_individual_queries() {
        let kb = KnowledgeBase::from_text(
            "(fact (bird Tweety) (1 . 0))\n\
             (fact (bird Polly) (0.6 . 0))\n\
             (rule (bird $x) (flies $x) (0.7 . 0.0))",
        )
        .unwrap();
        let queries: Vec<Query> = ["(flies Tweety)", "(flies Polly)", "(bird $x)"]
            .iter()
            .map(|g| Query::new(s(g)).cutoff(0.1).method(Method::BackwardChain))
            .collect();
        let seq = kb.query_batch(&queries, Execution::Sequential);
        let par = kb.query_batch(&queries, Execution::Parallel);
        assert_eq!(seq, par);
        for (q, r) in queries.iter().zip(&seq) {
            assert_eq!(r.as_ref().unwrap(), &kb.query(q).unwrap());
        }
    }

    #[test]
    fn tag_wrappers_apply_to_every_method() {
        let kb = KnowledgeBase::from_text(
            "(fact (bird Tweety) (1 . 0))\n\
             (rule (bird $x) (flies $x) (0.6 . 0.2))",
        )
        .unwrap();
        for method in [Method::Lookup, Method::BackwardChain] {
            let r = kb
                .query(
                    &Query::new(s("(unknown (flies Tweety))"))
                        .cutoff(0.0)
                        .method(method),
                )
                .unwrap();
            assert!((r.answers[0].value - 0.2).abs() < 1e-12, "{method}");
        }
    }
}

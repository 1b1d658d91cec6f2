//! Forward chaining with retraction.
//!
//! When a fact's value changes, every rule instance that reads it is
//! re-evaluated. An instance that fired before has its old contribution
//! backed out of the consequence with [`uncombine`] before the new one is
//! combined in; if the old contribution cannot be inverted (it was certain,
//! or the residual is numerically unusable) the consequence is recomputed
//! from its asserted value and the remaining justifications.
//!
//! Changes whose contribution moves by less than `inference-cutoff` are left
//! alone: the old result stays and the rule is not re-fired.

use std::collections::BTreeSet;

use crate::error::EngineError;
use crate::kb::{Justification, JustificationKey, KnowledgeBase, RuleId};
use crate::term::{normalize_negation, unify, Bindings, Term};
use crate::trace::TraceEvent;
use crate::truth::{combine, conjoin, delta_mass, negate, propagate, uncombine, TruthValue};

/// Re-evaluates every rule instance whose premise mentions `changed`.
pub(crate) fn on_change(
    kb: &mut KnowledgeBase,
    changed: &Term,
    depth: usize,
) -> Result<(), EngineError> {
    if depth >= kb.config.max_chain_depth {
        return Err(EngineError::DepthExceeded(kb.config.max_chain_depth));
    }
    let mut instances: BTreeSet<JustificationKey> = BTreeSet::new();
    for rule in kb.rules.iter().filter(|r| r.is_forward_safe()) {
        for (i, conjunct) in rule.conjuncts.iter().enumerate() {
            let (core, _) = normalize_negation(conjunct);
            if let Some(seed) = unify(&core, changed, &Bindings::new()) {
                for bindings in groundings(kb, &rule.conjuncts, Some(i), seed) {
                    instances.insert((rule.id, bindings.restrict(&rule.premise_vars)));
                }
            }
        }
    }
    for (rule, bindings) in instances {
        update_instance(kb, rule, &bindings, depth)?;
    }
    Ok(())
}

/// Fires a freshly added rule over the facts already stored.
pub(crate) fn fire_new_rule(kb: &mut KnowledgeBase, rule: RuleId) -> Result<(), EngineError> {
    let Some(r) = kb.rule(rule) else {
        return Ok(());
    };
    if !r.is_forward_safe() {
        return Ok(());
    }
    let vars = r.premise_vars.clone();
    let instances: BTreeSet<Bindings> = groundings(kb, &r.conjuncts, None, Bindings::new())
        .into_iter()
        .map(|b| b.restrict(&vars))
        .collect();
    for bindings in instances {
        update_instance(kb, rule, &bindings, 0)?;
    }
    Ok(())
}

/// Bindings grounding every conjunct, enumerating stored facts for the
/// non-ground ones. The conjunct at `skip` is already matched by `seed`.
fn groundings(
    kb: &KnowledgeBase,
    conjuncts: &[Term],
    skip: Option<usize>,
    seed: Bindings,
) -> Vec<Bindings> {
    let mut frontier = vec![seed];
    for (i, conjunct) in conjuncts.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let (core, _) = normalize_negation(conjunct);
        let mut next = Vec::new();
        for bindings in frontier {
            let pattern = bindings.resolve(&core);
            if pattern.is_ground() {
                next.push(bindings);
                continue;
            }
            for entry in kb.candidates(&pattern) {
                if let Some(extended) = unify(&pattern, &entry.sentence, &bindings) {
                    next.push(extended);
                }
            }
        }
        frontier = next;
    }
    frontier
}

/// Conjunction of the premise literals under ground `bindings`.
pub(crate) fn premise_value(
    kb: &KnowledgeBase,
    conjuncts: &[Term],
    bindings: &Bindings,
) -> TruthValue {
    conjuncts.iter().fold(TruthValue::TRUE, |acc, conjunct| {
        let (core, flipped) = normalize_negation(conjunct);
        let tv = kb.retrieve(&bindings.resolve(&core));
        conjoin(acc, if flipped { negate(tv) } else { tv })
    })
}

fn update_instance(
    kb: &mut KnowledgeBase,
    rule: RuleId,
    bindings: &Bindings,
    depth: usize,
) -> Result<(), EngineError> {
    let r = &kb.rules[rule.0];
    let consequence = bindings.resolve(&r.consequence);
    if !consequence.is_ground() {
        return Ok(());
    }
    let premise_tv = premise_value(kb, &r.conjuncts, bindings);
    let contribution = propagate(premise_tv, r.tv);
    let cutoff = kb.config.inference_cutoff;
    let key: JustificationKey = (rule, bindings.clone());
    let event = |contribution| (rule, bindings.clone(), contribution);

    let (old, asserted) = kb
        .facts
        .get(&consequence)
        .map_or((TruthValue::VACUOUS, TruthValue::VACUOUS), |e| {
            (e.tv, e.asserted)
        });

    let new = match kb.ledger.find(rule, bindings).cloned() {
        Some(previous) => {
            let delta = delta_mass(previous.contribution, contribution);
            if delta == 0.0 {
                return Ok(());
            }
            if delta < cutoff {
                let (rule, bindings, contribution) = event(contribution);
                kb.emit(TraceEvent::Skip {
                    rule,
                    bindings,
                    contribution,
                });
                return Ok(());
            }
            let (rule_id, b, c) = event(previous.contribution);
            kb.emit(TraceEvent::Retract {
                rule: rule_id,
                bindings: b,
                contribution: c,
            });
            let replacement = (!contribution.is_vacuous()).then_some(contribution);
            let new = match uncombine(old, previous.contribution) {
                Ok(residual) => combine(residual, contribution)?,
                Err(_) => kb.rebuild_with(&consequence, asserted, Some((&key, replacement)))?,
            };
            match replacement {
                Some(_) => kb.ledger.record(Justification {
                    rule,
                    bindings: bindings.clone(),
                    premise_tv,
                    contribution,
                    consequence: consequence.clone(),
                }),
                None => {
                    kb.ledger.retract(rule, bindings)?;
                }
            }
            new
        }
        None => {
            if contribution.is_vacuous() {
                return Ok(());
            }
            if contribution.mass() < cutoff {
                let (rule, bindings, contribution) = event(contribution);
                kb.emit(TraceEvent::Skip {
                    rule,
                    bindings,
                    contribution,
                });
                return Ok(());
            }
            let new = combine(old, contribution)?;
            kb.ledger.record(Justification {
                rule,
                bindings: bindings.clone(),
                premise_tv,
                contribution,
                consequence: consequence.clone(),
            });
            new
        }
    };

    if !contribution.is_vacuous() {
        let (rule, bindings, contribution) = event(contribution);
        kb.emit(TraceEvent::Fire {
            rule,
            bindings,
            contribution,
        });
    }
    kb.put(consequence.clone(), new, asserted);
    if delta_mass(old, new) > 0.0 {
        on_change(kb, &consequence, depth + 1)?;
    }
    Ok(())
}

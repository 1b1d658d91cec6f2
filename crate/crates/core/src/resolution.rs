//! Ground probabilistic resolution.
//!
//! Each clause carries a truth value read as a simple support function on
//! the joint model space of its atoms: belief on the models of the clause,
//! disbelief on the models of its negation, the rest uncommitted. Resolving
//! two clauses combines their mass functions by Dempster's rule over the
//! joint frame and reads off how much mass entails the resolvent and how much
//! entails its negation. Two modes exist:
//!
//! * opposite signs on the pivot, `(p ∨ q) ∧ (¬p ∨ r) → (q ∨ r)`;
//! * same sign on the pivot, where disbelief in both parents refutes the
//!   resolvent and belief in one with disbelief in the other confirms it.
//!
//! The mass products never assume the parent clauses are independent as
//! propositions (they share the pivot atom); only the evidence behind them
//! is treated as independent. [`resolve`] evaluates the joint-frame
//! computation in closed form.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::error::ResolutionError;
use crate::par::{self, Execution};
use crate::term::Term;
use crate::truth::{combine_all, EngineConfig, TruthValue, DRIFT};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Term,
    pub positive: bool,
}

impl Literal {
    pub fn new(atom: Term, positive: bool) -> Self {
        Literal { atom, positive }
    }

    pub fn pos(atom: Term) -> Self {
        Literal::new(atom, true)
    }

    pub fn neg(atom: Term) -> Self {
        Literal::new(atom, false)
    }

    pub fn complement(&self) -> Literal {
        Literal::new(self.atom.clone(), !self.positive)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            self.atom.fmt(f)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

pub type LiteralSet = BTreeSet<Literal>;

/// Base clauses are numbered by position; derived clauses carry the union of
/// their parents' numbers.
pub type Support = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    literals: LiteralSet,
    pub tv: TruthValue,
    pub support: Support,
}

fn check_literals(literals: &LiteralSet) -> Result<(), ResolutionError> {
    if literals.is_empty() {
        return Err(ResolutionError::EmptyClause);
    }
    for literal in literals {
        if !literal.atom.is_ground() {
            return Err(ResolutionError::NonGroundLiteral(literal.atom.clone()));
        }
        if literal.positive && literals.contains(&literal.complement()) {
            return Err(ResolutionError::TautologicalClause(literal.atom.clone()));
        }
    }
    Ok(())
}

impl Clause {
    pub fn new<I>(literals: I, tv: TruthValue) -> Result<Clause, ResolutionError>
    where
        I: IntoIterator<Item = Literal>,
    {
        let literals: LiteralSet = literals.into_iter().collect();
        check_literals(&literals)?;
        Ok(Clause {
            literals,
            tv,
            support: Support::new(),
        })
    }

    pub fn with_support(mut self, support: Support) -> Clause {
        self.support = support;
        self
    }

    pub fn literals(&self) -> &LiteralSet {
        &self.literals
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Term> {
        self.literals.iter().map(|l| &l.atom)
    }

    pub fn literal_on(&self, atom: &Term) -> Option<&Literal> {
        self.literals.iter().find(|l| &l.atom == atom)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(or")?;
        for literal in &self.literals {
            write!(f, " {literal}")?;
        }
        write!(f, ") {}", self.tv)
    }
}

/// Resolves `first` and `second` on the shared atom `on`.
pub fn resolve(first: &Clause, second: &Clause, on: &Term) -> Result<Clause, ResolutionError> {
    let (Some(pivot1), Some(pivot2)) = (first.literal_on(on), second.literal_on(on)) else {
        return Err(ResolutionError::AtomNotShared(on.clone()));
    };
    let rest1: LiteralSet = first
        .literals
        .iter()
        .filter(|l| *l != pivot1)
        .cloned()
        .collect();
    let rest2: LiteralSet = second
        .literals
        .iter()
        .filter(|l| *l != pivot2)
        .cloned()
        .collect();
    let literals: LiteralSet = rest1.union(&rest2).cloned().collect();
    if literals.is_empty() {
        return Err(ResolutionError::EmptyResolvent);
    }
    if literals
        .iter()
        .any(|l| l.positive && literals.contains(&l.complement()))
    {
        return Err(ResolutionError::TautologicalResolvent);
    }

    // ¬R1 entails ¬R2 exactly when R2 ⊆ R1.
    let first_within_second = rest1.is_subset(&rest2);
    let second_within_first = rest2.is_subset(&rest1);

    let (a1, b1, u1) = (
        first.tv.belief(),
        first.tv.disbelief(),
        first.tv.uncommitted(),
    );
    let (a2, b2, u2) = (
        second.tv.belief(),
        second.tv.disbelief(),
        second.tv.uncommitted(),
    );
    let when = |cond: bool, value: f64| if cond { value } else { 0.0 };

    let (conflict, for_resolvent, against_resolvent) = if pivot1.positive != pivot2.positive {
        // Both negations fix the pivot both ways: always empty.
        let conflict = b1 * b2;
        let for_resolvent = a1 * a2;
        let against =
            when(second_within_first, b1 * (1.0 - b2)) + when(first_within_second, b2 * (1.0 - b1));
        (conflict, for_resolvent, against)
    } else {
        // A parent's negation meets the other clause: empty when the
        // remainders nest, otherwise it entails the resolvent.
        let conflict = when(first_within_second, a1 * b2) + when(second_within_first, b1 * a2);
        let for_resolvent =
            when(!first_within_second, a1 * b2) + when(!second_within_first, b1 * a2);
        let against =
            b1 * b2 + when(second_within_first, b1 * u2) + when(first_within_second, u1 * b2);
        (conflict, for_resolvent, against)
    };

    let norm = 1.0 - conflict;
    if norm <= DRIFT {
        return Err(ResolutionError::TotalConflict);
    }
    let tv = TruthValue::new(for_resolvent / norm, against_resolvent / norm)
        .map_err(|_| ResolutionError::TotalConflict)?;
    Ok(Clause {
        literals,
        tv,
        support: first.support.union(&second.support).copied().collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
struct Derivation {
    tv: TruthValue,
    support: Support,
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    kept: Vec<Derivation>,
    tv: TruthValue,
    support: Support,
}

impl Entry {
    /// Keeps `d` if its support is disjoint from every kept derivation, or
    /// if it outweighs all the derivations it overlaps. Returns whether the
    /// kept set changed.
    fn offer(&mut self, d: Derivation) -> bool {
        let (overlapping, disjoint): (Vec<_>, Vec<_>) = self
            .kept
            .iter()
            .cloned()
            .partition(|k| !k.support.is_disjoint(&d.support));
        let best_overlap = overlapping
            .iter()
            .map(|k| k.tv.mass())
            .fold(f64::NEG_INFINITY, f64::max);
        if !overlapping.is_empty() && d.tv.mass() <= best_overlap {
            return false;
        }
        let mut kept = disjoint;
        kept.push(d);
        let Ok(tv) = combine_all(kept.iter().map(|k| k.tv)) else {
            return false;
        };
        self.support = kept
            .iter()
            .flat_map(|k| k.support.iter().copied())
            .collect();
        self.kept = kept;
        self.tv = tv;
        true
    }
}

/// The result of saturating a clause set: one accumulated value per
/// distinct literal set derived.
#[derive(Debug, Clone)]
pub struct Saturation {
    entries: BTreeMap<LiteralSet, Entry>,
    pub rounds: usize,
    pub complete: bool,
}

impl Saturation {
    /// Accumulated value of a literal set, vacuous if never derived.
    pub fn value(&self, literals: &LiteralSet) -> TruthValue {
        self.entries
            .get(literals)
            .map(|e| e.tv)
            .unwrap_or(TruthValue::VACUOUS)
    }

    pub fn support(&self, literals: &LiteralSet) -> Option<&Support> {
        self.entries.get(literals).map(|e| &e.support)
    }

    /// Every derived clause with its accumulated value and support.
    pub fn clauses(&self) -> impl Iterator<Item = Clause> + '_ {
        self.entries.iter().map(|(literals, e)| Clause {
            literals: literals.clone(),
            tv: e.tv,
            support: e.support.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Runs resolution to a fixpoint (or the round bound), in both modes.
///
/// Only parents with disjoint supports are resolved, and repeated
/// derivations of one literal set are pooled only when their supports are
/// disjoint; among overlapping derivations the one with the largest mass
/// wins. Resolvents with mass below `config.inference_cutoff`, or with no
/// mass at all, are dropped. At most `config.max_chain_depth` rounds run.
pub fn saturate_all(clauses: &[Clause], config: &EngineConfig, execution: Execution) -> Saturation {
    let mut saturation = Saturation {
        entries: BTreeMap::new(),
        rounds: 0,
        complete: false,
    };
    let mut seen: HashSet<(LiteralSet, Support)> = HashSet::new();
    for (i, clause) in clauses.iter().enumerate() {
        let support: Support = [i].into();
        seen.insert((clause.literals.clone(), support.clone()));
        offer(
            &mut saturation.entries,
            clause.literals.clone(),
            clause.tv,
            support,
        );
    }

    while saturation.rounds < config.max_chain_depth {
        saturation.rounds += 1;
        let snapshot: Vec<Clause> = saturation.clauses().collect();
        let candidates = par::flat_map(&snapshot, execution, |i, left| {
            let mut out = Vec::new();
            for right in &snapshot[i + 1..] {
                if !left.support.is_disjoint(&right.support) {
                    continue;
                }
                for atom in left.atoms() {
                    if right.literal_on(atom).is_none() {
                        continue;
                    }
                    if let Ok(resolvent) = resolve(left, right, atom) {
                        out.push(resolvent);
                    }
                }
            }
            out
        });

        let mut changed = false;
        for resolvent in candidates {
            let mass = resolvent.tv.mass();
            if mass <= 0.0 || mass < config.inference_cutoff {
                continue;
            }
            if !seen.insert((resolvent.literals.clone(), resolvent.support.clone())) {
                continue;
            }
            changed |= offer(
                &mut saturation.entries,
                resolvent.literals,
                resolvent.tv,
                resolvent.support,
            );
        }
        if !changed {
            saturation.complete = true;
            break;
        }
    }
    saturation
}

fn offer(
    entries: &mut BTreeMap<LiteralSet, Entry>,
    literals: LiteralSet,
    tv: TruthValue,
    support: Support,
) -> bool {
    let d = Derivation { tv, support };
    match entries.get_mut(&literals) {
        Some(entry) => entry.offer(d),
        None => {
            entries.insert(
                literals,
                Entry {
                    tv: d.tv,
                    support: d.support.clone(),
                    kept: vec![d],
                },
            );
            true
        }
    }
}

/// Saturates `clauses` and returns the accumulated value of `target`.
pub fn saturate(
    clauses: &[Clause],
    target: &[Literal],
    config: &EngineConfig,
) -> Result<TruthValue, ResolutionError> {
    let target: LiteralSet = target.iter().cloned().collect();
    let saturation = saturate_all(clauses, config, Execution::default());
    let value = saturation.value(&target);
    if saturation.complete {
        Ok(value)
    } else {
        Err(ResolutionError::IterationBoundExceeded {
            rounds: saturation.rounds,
            partial: value,
        })
    }
}

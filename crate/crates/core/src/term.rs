//! S-expression terms with `$`-variables, substitutions and unification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use ordered_float::OrderedFloat;

/// A logic variable. Copies renamed apart from a rule get a fresh
/// `generation`; surface-syntax variables are generation 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    name: Arc<str>,
    generation: u32,
}

impl Var {
    pub fn new(name: impl Into<Arc<str>>) -> Self {
        Var {
            name: name.into(),
            generation: 0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn renamed(&self, generation: u32) -> Var {
        Var {
            name: self.name.clone(),
            generation,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.generation == 0 {
            write!(f, "${}", self.name)
        } else {
            write!(f, "${}_{}", self.name, self.generation)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Symbol(Arc<str>),
    Var(Var),
    Number(OrderedFloat<f64>),
    /// Nonempty list of subterms.
    Compound(Vec<Term>),
}

impl Term {
    pub fn sym(name: &str) -> Term {
        Term::Symbol(name.into())
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn num(value: f64) -> Term {
        Term::Number(OrderedFloat(value))
    }

    /// Compound `(head args...)`.
    pub fn app<I>(head: &str, args: I) -> Term
    where
        I: IntoIterator<Item = Term>,
    {
        let mut elements = vec![Term::sym(head)];
        elements.extend(args);
        Term::Compound(elements)
    }

    pub fn list(elements: Vec<Term>) -> Term {
        assert!(!elements.is_empty(), "compound terms are nonempty");
        Term::Compound(elements)
    }

    pub fn negated(inner: Term) -> Term {
        Term::app("not", [inner])
    }

    /// Head symbol of a compound, or the symbol itself.
    pub fn head(&self) -> Option<&str> {
        match self {
            Term::Symbol(name) => Some(name),
            Term::Compound(elements) => match &elements[0] {
                Term::Symbol(name) => Some(name),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Term::Compound(elements) => elements.len() - 1,
            _ => 0,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(elements) => &elements[1..],
            _ => &[],
        }
    }

    /// A sentence is a symbol or a compound headed by a symbol.
    pub fn is_sentence(&self) -> bool {
        self.head().is_some()
    }

    /// Returns the argument of a one-argument compound headed by `head`.
    pub fn unwrap_unary(&self, head: &str) -> Option<&Term> {
        match self {
            Term::Compound(elements) if elements.len() == 2 && self.head() == Some(head) => {
                Some(&elements[1])
            }
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(elements) => elements.iter().all(Term::is_ground),
            _ => true,
        }
    }

    /// Variables in order of first appearance.
    pub fn variables(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.collect_variables(&mut seen, &mut out);
        out
    }

    fn collect_variables(&self, seen: &mut BTreeSet<Var>, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
            Term::Compound(elements) => {
                for e in elements {
                    e.collect_variables(seen, out);
                }
            }
            _ => {}
        }
    }

    pub fn occurs(&self, var: &Var) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::Compound(elements) => elements.iter().any(|e| e.occurs(var)),
            _ => false,
        }
    }

    /// Copy with every variable moved to `generation`.
    pub fn rename_apart(&self, generation: u32) -> Term {
        self.map_vars(&mut |v| Term::Var(v.renamed(generation)))
    }

    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(elements) => {
                Term::Compound(elements.iter().map(|e| e.map_vars(f)).collect())
            }
            other => other.clone(),
        }
    }

    /// Renames variables to `$0`, `$1`, ... by first appearance, so two terms
    /// are variants exactly when their canonical forms are equal.
    pub fn canonical(&self) -> Term {
        let mut names: BTreeMap<Var, usize> = BTreeMap::new();
        self.map_vars(&mut |v| {
            let next = names.len();
            let index = *names.entry(v.clone()).or_insert(next);
            Term::Var(Var {
                name: index.to_string().into(),
                generation: u32::MAX,
            })
        })
    }

    pub fn is_variant(&self, other: &Term) -> bool {
        self.canonical() == other.canonical()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Symbol(name) => f.write_str(name),
            Term::Var(v) => v.fmt(f),
            Term::Number(n) => write!(f, "{}", n.0),
            Term::Compound(elements) => {
                f.write_str("(")?;
                for (i, e) in elements.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    e.fmt(f)?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A triangular substitution: bound values may mention other bound
/// variables, and [`Bindings::resolve`] chases them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bindings {
    map: BTreeMap<Var, Term>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, var: &Var) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn get_named(&self, name: &str) -> Option<&Term> {
        self.map.get(&Var::new(name))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    /// Binds without checks; callers go through [`unify`] for soundness.
    pub fn insert(&mut self, var: Var, value: Term) {
        self.map.insert(var, value);
    }

    /// Follows variable-to-variable chains at the top level only.
    fn walk<'a>(&'a self, term: &'a Term) -> &'a Term {
        let mut current = term;
        while let Term::Var(v) = current {
            match self.map.get(v) {
                Some(next) => current = next,
                None => break,
            }
        }
        current
    }

    /// Applies the substitution to a fixpoint.
    pub fn resolve(&self, term: &Term) -> Term {
        match self.walk(term) {
            Term::Compound(elements) => {
                Term::Compound(elements.iter().map(|e| self.resolve(e)).collect())
            }
            other => other.clone(),
        }
    }

    /// Fully resolved bindings for just `vars`; unbound ones are omitted.
    pub fn restrict(&self, vars: &[Var]) -> Bindings {
        let mut out = Bindings::new();
        for v in vars {
            let value = self.resolve(&Term::Var(v.clone()));
            if value != Term::Var(v.clone()) {
                out.map.insert(v.clone(), value);
            }
        }
        out
    }

    /// Every binding fully resolved.
    pub fn resolved(&self) -> Bindings {
        let vars: Vec<Var> = self.map.keys().cloned().collect();
        self.restrict(&vars)
    }

    /// True when every value is ground.
    pub fn is_ground(&self) -> bool {
        self.map.values().all(|t| self.resolve(t).is_ground())
    }
}

impl fmt::Display for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (var, value)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{var}={}", self.resolve(value))?;
        }
        f.write_str("}")
    }
}

impl FromIterator<(Var, Term)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Bindings {
            map: iter.into_iter().collect(),
        }
    }
}

/// Most general unifier of `left` and `right` extending `seed`, with
/// occurs-check.
pub fn unify(left: &Term, right: &Term, seed: &Bindings) -> Option<Bindings> {
    let mut bindings = seed.clone();
    if unify_into(left, right, &mut bindings) {
        Some(bindings)
    } else {
        None
    }
}

fn unify_into(left: &Term, right: &Term, bindings: &mut Bindings) -> bool {
    let l = bindings.walk(left).clone();
    let r = bindings.walk(right).clone();
    match (&l, &r) {
        (Term::Var(a), Term::Var(b)) if a == b => true,
        (Term::Var(v), other) | (other, Term::Var(v)) => {
            if bindings.resolve(other).occurs(v) {
                return false;
            }
            bindings.map.insert(v.clone(), other.clone());
            true
        }
        (Term::Compound(xs), Term::Compound(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify_into(x, y, bindings))
        }
        (x, y) => x == y,
    }
}

pub fn substitute(term: &Term, bindings: &Bindings) -> Term {
    bindings.resolve(term)
}

/// Strips `(not ...)` wrappers. The flag is set when an odd number came off.
pub fn normalize_negation(sentence: &Term) -> (Term, bool) {
    let mut core = sentence;
    let mut flipped = false;
    while let Some(inner) = core.unwrap_unary("not") {
        core = inner;
        flipped = !flipped;
    }
    (core.clone(), flipped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn foo(arg: Term) -> Term {
        Term::app("foo", [arg])
    }

    #[test]
    fn unify_binds_variable() {
        let b = unify(
            &foo(Term::var("x")),
            &foo(Term::sym("fred")),
            &Bindings::new(),
        )
        .unwrap();
        assert_eq!(b.get_named("x"), Some(&Term::sym("fred")));
        assert_eq!(b.to_string(), "{$x=fred}");
    }

    #[test]
    fn unify_head_mismatch_fails() {
        let goo = Term::app("goo", [Term::sym("fred")]);
        assert!(unify(&foo(Term::var("x")), &goo, &Bindings::new()).is_none());
    }

    #[test]
    fn occurs_check() {
        assert!(unify(&Term::var("x"), &foo(Term::var("x")), &Bindings::new()).is_none());
    }

    #[test]
    fn unify_respects_seed() {
        let seed: Bindings = [(Var::new("x"), Term::sym("harry"))].into_iter().collect();
        assert!(unify(&foo(Term::var("x")), &foo(Term::sym("fred")), &seed).is_none());
        assert!(unify(&foo(Term::var("x")), &foo(Term::sym("harry")), &seed).is_some());
    }

    #[test]
    fn substitute_partial() {
        let steals = Term::app("steals", [Term::var("person"), Term::var("object")]);
        let b: Bindings = [(Var::new("person"), Term::sym("Nixon"))]
            .into_iter()
            .collect();
        assert_eq!(
            substitute(&steals, &b).to_string(),
            "(steals Nixon $object)"
        );
        assert_eq!(substitute(&steals, &Bindings::new()), steals);
    }

    #[test]
    fn substitute_composes() {
        let first: Bindings = [(Var::new("x"), Term::list(vec![Term::var("y")]))]
            .into_iter()
            .collect();
        let second: Bindings = [(Var::new("y"), Term::sym("a"))].into_iter().collect();
        let out = substitute(&substitute(&Term::var("x"), &first), &second);
        assert_eq!(out.to_string(), "(a)");
    }

    #[test]
    fn negation_normalization() {
        let fred = foo(Term::sym("fred"));
        assert_eq!(
            normalize_negation(&Term::negated(fred.clone())),
            (fred.clone(), true)
        );
        assert_eq!(normalize_negation(&fred), (fred.clone(), false));
        assert_eq!(
            normalize_negation(&Term::negated(Term::negated(fred.clone()))),
            (fred.clone(), false)
        );
    }

    #[test]
    fn variants() {
        let a = Term::app("p", [Term::var("x"), Term::var("y"), Term::var("x")]);
        let b = Term::app("p", [Term::var("u"), Term::var("v"), Term::var("u")]);
        let c = Term::app("p", [Term::var("u"), Term::var("u"), Term::var("u")]);
        assert!(a.is_variant(&b));
        assert!(!a.is_variant(&c));
        assert!(a.is_variant(&a.rename_apart(7)));
    }
}

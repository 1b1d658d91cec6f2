//! Reference computations for the tests. Nothing here calls into the
//! library's algebra: masses are enumerated over explicit frames.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::seq::SliceRandom;
use rand::Rng;

/// A truth value as a bare (belief, disbelief) pair.
pub type Pair = (f64, f64);

pub const VACUOUS: Pair = (0.0, 0.0);

/// Focal elements over the frame {true, false}.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Focal {
    T,
    F,
    Both,
}

fn cells(p: Pair) -> [(Focal, f64); 3] {
    [
        (Focal::T, p.0),
        (Focal::F, p.1),
        (Focal::Both, 1.0 - p.0 - p.1),
    ]
}

fn meet(x: Focal, y: Focal) -> Option<Focal> {
    match (x, y) {
        (Focal::Both, z) | (z, Focal::Both) => Some(z),
        (a, b) if a == b => Some(a),
        _ => None,
    }
}

/// Dempster's rule by enumerating the nine joint cells. `None` on total
/// conflict.
pub fn combine(x: Pair, y: Pair) -> Option<Pair> {
    let (mut t, mut f, mut empty) = (0.0, 0.0, 0.0);
    for (fx, mx) in cells(x) {
        for (fy, my) in cells(y) {
            match meet(fx, fy) {
                Some(Focal::T) => t += mx * my,
                Some(Focal::F) => f += mx * my,
                Some(Focal::Both) => {}
                None => empty += mx * my,
            }
        }
    }
    let norm = 1.0 - empty;
    (norm > 1e-12).then(|| (t / norm, f / norm))
}

pub fn negate(x: Pair) -> Pair {
    (x.1, x.0)
}

/// Conjunction of independent sentences: believed only when both are,
/// disbelieved when either is.
pub fn conjoin(x: Pair, y: Pair) -> Pair {
    (x.0 * y.0, 1.0 - (1.0 - x.1) * (1.0 - y.1))
}

/// A rule speaks only when its premise is believed; the premise cell and
/// the rule's cells are independent.
pub fn propagate(premise: Pair, rule: Pair) -> Pair {
    let mut out = (0.0, 0.0);
    for (f, m) in cells(rule) {
        match f {
            Focal::T => out.0 += premise.0 * m,
            Focal::F => out.1 += premise.0 * m,
            Focal::Both => {}
        }
    }
    out
}

pub fn close(x: Pair, y: Pair, tol: f64) -> bool {
    (x.0 - y.0).abs() <= tol && (x.1 - y.1).abs() <= tol
}

/// A random valid pair. Roughly one in eight lies on an edge of the simplex.
pub fn random_pair<R: Rng>(rng: &mut R) -> Pair {
    let a: f64 = rng.gen();
    let b: f64 = rng.gen();
    let (a, b) = if a + b > 1.0 {
        (1.0 - a, 1.0 - b)
    } else {
        (a, b)
    };
    match rng.gen_range(0..16) {
        0 => (a, 0.0),
        1 => (0.0, b),
        _ => (a, b),
    }
}

/// A random pair with total mass at most `cap`.
pub fn random_uncertain<R: Rng>(rng: &mut R, cap: f64) -> Pair {
    let (a, b) = random_pair(rng);
    (a * cap, b * cap)
}

// ---------------------------------------------------------------------------
// Clauses over a small set of ground atoms, evaluated on explicit models.

/// A literal on atom index `atom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lit {
    pub atom: usize,
    pub positive: bool,
}

/// Models of `n` atoms are bit masks; a set of models is a bit mask over
/// `2^n` models.
pub fn models_of(clause: &[Lit], n: usize) -> u32 {
    let mut set = 0u32;
    for model in 0..(1u32 << n) {
        let satisfied = clause
            .iter()
            .any(|l| ((model >> l.atom) & 1 == 1) == l.positive);
        if satisfied {
            set |= 1 << model;
        }
    }
    set
}

/// Belief and disbelief in `target` after combining two clause-shaped
/// simple support functions on the joint frame of `2^n` models.
pub fn joint_frame_value(
    c1: (&[Lit], Pair),
    c2: (&[Lit], Pair),
    target: &[Lit],
    n: usize,
) -> Option<Pair> {
    assert!(n <= 4);
    let all = ((1u64 << (1u32 << n)) - 1) as u32;
    let focal = |clause: &[Lit], p: Pair| {
        let m = models_of(clause, n);
        [(m, p.0), (all & !m, p.1), (all, 1.0 - p.0 - p.1)]
    };
    let mut masses: Vec<(u32, f64)> = Vec::new();
    let mut empty = 0.0;
    for (s1, m1) in focal(c1.0, c1.1) {
        for (s2, m2) in focal(c2.0, c2.1) {
            let s = s1 & s2;
            if s == 0 {
                empty += m1 * m2;
            } else {
                masses.push((s, m1 * m2));
            }
        }
    }
    let norm = 1.0 - empty;
    if norm <= 1e-12 {
        return None;
    }
    let r = models_of(target, n);
    let not_r = all & !r;
    let bel = |set: u32| {
        masses
            .iter()
            .filter(|(s, _)| s & !set == 0)
            .map(|(_, m)| m)
            .sum::<f64>()
            / norm
    };
    Some((bel(r), bel(not_r)))
}

// ---------------------------------------------------------------------------
// Random acyclic knowledge bases over unary predicates.

pub const CONSTANTS: [&str; 3] = ["a", "b", "c"];

#[derive(Debug, Clone)]
pub struct RuleSpec {
    /// (predicate, positive)
    pub premise: Vec<(usize, bool)>,
    pub consequence: (usize, bool),
    pub tv: Pair,
}

#[derive(Debug, Clone)]
pub struct KbSpec {
    pub predicates: usize,
    pub rules: Vec<RuleSpec>,
    /// ((predicate, constant), value)
    pub facts: Vec<((usize, usize), Pair)>,
}

pub fn pred(i: usize) -> String {
    format!("p{i}")
}

pub fn atom_text(p: usize, c: usize) -> String {
    format!("({} {})", pred(p), CONSTANTS[c])
}

pub fn pair_text(p: Pair) -> String {
    format!("({:?} . {:?})", p.0, p.1)
}

fn literal_text(p: usize, positive: bool) -> String {
    let atom = format!("({} $x)", pred(p));
    if positive {
        atom
    } else {
        format!("(not {atom})")
    }
}

impl RuleSpec {
    pub fn text(&self) -> String {
        let premise = if self.premise.len() == 1 {
            literal_text(self.premise[0].0, self.premise[0].1)
        } else {
            let parts: Vec<String> = self
                .premise
                .iter()
                .map(|&(p, s)| literal_text(p, s))
                .collect();
            format!("(and {})", parts.join(" "))
        };
        format!(
            "(rule {premise} {} {})",
            literal_text(self.consequence.0, self.consequence.1),
            pair_text(self.tv)
        )
    }
}

impl KbSpec {
    /// Predicates are layered: a rule only concludes about a predicate of a
    /// higher index than any in its premise, so the rule graph is acyclic.
    pub fn random<R: Rng>(rng: &mut R, max_rules: usize, max_facts: usize) -> KbSpec {
        let predicates = rng.gen_range(3..=6);
        let n_rules = rng.gen_range(1..=max_rules);
        let rules = (0..n_rules)
            .map(|_| {
                let head = rng.gen_range(1..predicates);
                let width = rng.gen_range(1..=2.min(head));
                let mut below: Vec<usize> = (0..head).collect();
                below.shuffle(rng);
                RuleSpec {
                    premise: below[..width]
                        .iter()
                        .map(|&p| (p, rng.gen_bool(0.75)))
                        .collect(),
                    consequence: (head, rng.gen_bool(0.7)),
                    tv: random_uncertain(rng, 0.95),
                }
            })
            .collect();
        let n_facts = rng.gen_range(1..=max_facts);
        let facts = (0..n_facts)
            .map(|_| {
                let p = rng.gen_range(0..predicates);
                let c = rng.gen_range(0..CONSTANTS.len());
                ((p, c), random_uncertain(rng, 0.95))
            })
            .collect();
        KbSpec {
            predicates,
            rules,
            facts,
        }
    }

    /// Every ground atom of the universe.
    pub fn atoms(&self) -> Vec<(usize, usize)> {
        (0..self.predicates)
            .flat_map(|p| (0..CONSTANTS.len()).map(move |c| (p, c)))
            .collect()
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            out.push_str(&r.text());
            out.push('\n');
        }
        for &((p, c), v) in &self.facts {
            out.push_str(&format!("(fact {} {})\n", atom_text(p, c), pair_text(v)));
        }
        out
    }

    /// Exhaustive bottom-up evaluation: atoms are computed in predicate order
    /// from the asserted evidence (repeated facts on one atom combine) and
    /// every rule instance, each counted once.
    pub fn bottom_up(&self) -> Option<Vec<Vec<Pair>>> {
        let mut value = vec![vec![VACUOUS; CONSTANTS.len()]; self.predicates];
        for p in 0..self.predicates {
            for c in 0..CONSTANTS.len() {
                let mut acc = VACUOUS;
                for &((fp, fc), v) in &self.facts {
                    if (fp, fc) == (p, c) {
                        acc = combine(acc, v)?;
                    }
                }
                for r in self.rules.iter().filter(|r| r.consequence.0 == p) {
                    let premise = r.premise.iter().fold((1.0, 0.0), |acc, &(q, positive)| {
                        let v = value[q][c];
                        conjoin(acc, if positive { v } else { negate(v) })
                    });
                    let k = propagate(premise, r.tv);
                    let k = if r.consequence.1 { k } else { negate(k) };
                    acc = combine(acc, k)?;
                }
                value[p][c] = acc;
            }
        }
        Some(value)
    }
}

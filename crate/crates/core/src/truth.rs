//! Belief/disbelief truth values and the arithmetic that moves them around.
//!
//! A [`TruthValue`] is a pair `(a . b)` where `a` is the extent to which the
//! evidence confirms a sentence and `b` the extent to which it disconfirms it,
//! with `a + b <= 1`. Evidence from independent sources is pooled with
//! Dempster's rule on the two-element frame `{true, false}`; the rule is
//! invertible for any component that is not certain, which is what lets the
//! forward chainer retract a single stale contribution.

use std::fmt;
use std::str::FromStr;

use crate::error::TruthError;

/// Arithmetic drift tolerated (and clamped) at construction.
pub const DRIFT: f64 = 1e-12;

/// Tolerance accepted when solving for a residual in [`uncombine`].
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TruthValue {
    belief: f64,
    disbelief: f64,
}

impl TruthValue {
    /// Total ignorance; the identity of [`combine`].
    pub const VACUOUS: TruthValue = TruthValue {
        belief: 0.0,
        disbelief: 0.0,
    };
    pub const TRUE: TruthValue = TruthValue {
        belief: 1.0,
        disbelief: 0.0,
    };
    pub const FALSE: TruthValue = TruthValue {
        belief: 0.0,
        disbelief: 1.0,
    };

    /// Builds a truth value, clamping drift up to [`DRIFT`] and rejecting
    /// anything further outside the simplex.
    pub fn new(belief: f64, disbelief: f64) -> Result<Self, TruthError> {
        Self::with_tolerance(belief, disbelief, DRIFT)
    }

    pub(crate) fn with_tolerance(
        belief: f64,
        disbelief: f64,
        tolerance: f64,
    ) -> Result<Self, TruthError> {
        let out_of_range = || TruthError::OutOfRange { belief, disbelief };
        if !belief.is_finite() || !disbelief.is_finite() {
            return Err(out_of_range());
        }
        if belief < -tolerance
            || disbelief < -tolerance
            || belief > 1.0 + tolerance
            || disbelief > 1.0 + tolerance
            || belief + disbelief > 1.0 + tolerance
        {
            return Err(out_of_range());
        }
        let mut a = belief.clamp(0.0, 1.0);
        let mut b = disbelief.clamp(0.0, 1.0);
        let excess = a + b - 1.0;
        if excess > 0.0 {
            // Shave the overshoot proportionally so neither side goes negative.
            let total = a + b;
            a -= excess * a / total;
            b -= excess * b / total;
            if a + b > 1.0 {
                b = 1.0 - a;
            }
        }
        Ok(TruthValue {
            belief: a,
            disbelief: b,
        })
    }

    pub fn belief(self) -> f64 {
        self.belief
    }

    pub fn disbelief(self) -> f64 {
        self.disbelief
    }

    /// `1 - (a + b)`, the mass left on "unknown".
    pub fn uncommitted(self) -> f64 {
        (1.0 - (self.belief + self.disbelief)).max(0.0)
    }

    pub fn mass(self) -> f64 {
        self.belief + self.disbelief
    }

    pub fn is_vacuous(self) -> bool {
        self.belief == 0.0 && self.disbelief == 0.0
    }

    /// True for `(1 . 0)` and `(0 . 1)` (within drift).
    pub fn is_certain(self) -> bool {
        self.belief >= 1.0 - DRIFT || self.disbelief >= 1.0 - DRIFT
    }

    /// Maximum componentwise distance, handy for tolerance checks.
    pub fn distance(self, other: TruthValue) -> f64 {
        (self.belief - other.belief)
            .abs()
            .max((self.disbelief - other.disbelief).abs())
    }

    pub fn approx_eq(self, other: TruthValue, tolerance: f64) -> bool {
        self.distance(other) <= tolerance
    }
}

impl Default for TruthValue {
    fn default() -> Self {
        TruthValue::VACUOUS
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} . {})", self.belief, self.disbelief)
    }
}

impl FromStr for TruthValue {
    type Err = TruthError;

    /// Parses the dotted-pair notation `(a . b)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || TruthError::Malformed(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(malformed)?;
        let mut parts = inner.split_whitespace();
        let (Some(a), Some("."), Some(b), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(malformed());
        };
        let a: f64 = a.parse().map_err(|_| malformed())?;
        let b: f64 = b.parse().map_err(|_| malformed())?;
        TruthValue::new(a, b)
    }
}

/// Functions collapsing a truth value to a single number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    T,
    Not,
    Unknown,
    Poss,
    PossNot,
    Mass,
}

impl Tag {
    pub const ALL: [Tag; 6] = [
        Tag::T,
        Tag::Not,
        Tag::Unknown,
        Tag::Poss,
        Tag::PossNot,
        Tag::Mass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tag::T => "t",
            Tag::Not => "not",
            Tag::Unknown => "unknown",
            Tag::Poss => "poss",
            Tag::PossNot => "poss-not",
            Tag::Mass => "mass",
        }
    }

    pub fn from_name(name: &str) -> Option<Tag> {
        Tag::ALL.into_iter().find(|tag| tag.name() == name)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tag {
    type Err = TruthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::from_name(s).ok_or_else(|| TruthError::UnknownTag(s.to_string()))
    }
}

pub fn apply_tag(tag: Tag, tv: TruthValue) -> f64 {
    let (a, b) = (tv.belief, tv.disbelief);
    match tag {
        Tag::T => a,
        Tag::Not => b,
        Tag::Unknown => tv.uncommitted(),
        Tag::Poss => 1.0 - b,
        Tag::PossNot => 1.0 - a,
        Tag::Mass => a + b,
    }
}

/// Swaps confirmation and disconfirmation: the value of `(not s)` given `s`.
pub fn negate(tv: TruthValue) -> TruthValue {
    TruthValue {
        belief: tv.disbelief,
        disbelief: tv.belief,
    }
}

/// Mass the two sources place on contradictory outcomes.
pub fn conflict(x: TruthValue, y: TruthValue) -> f64 {
    x.belief * y.disbelief + x.disbelief * y.belief
}

/// Dempster's rule on the frame `{true, false}`.
pub fn combine(x: TruthValue, y: TruthValue) -> Result<TruthValue, TruthError> {
    let k = conflict(x, y);
    let norm = 1.0 - k;
    if norm <= DRIFT {
        return Err(TruthError::TotalConflict { left: x, right: y });
    }
    let (a1, b1, u1) = (x.belief, x.disbelief, x.uncommitted());
    let (a2, b2, u2) = (y.belief, y.disbelief, y.uncommitted());
    // Grouped so that swapping the arguments gives bit-identical results.
    let a = (a1 * a2 + (a1 * u2 + u1 * a2)) / norm;
    let b = (b1 * b2 + (b1 * u2 + u1 * b2)) / norm;
    TruthValue::new(a, b)
}

/// Combines a sequence of independent contributions, starting from vacuous.
pub fn combine_all<I>(values: I) -> Result<TruthValue, TruthError>
where
    I: IntoIterator<Item = TruthValue>,
{
    values.into_iter().try_fold(TruthValue::VACUOUS, combine)
}

/// Removes `component` from an accumulated `total`.
///
/// Returns the residual `r` with `combine(r, component) == total`. Writing
/// `r = (x, y)` and `component = (c, d)`, the combination equations clear to
/// a linear system in `x` and `y`:
///
/// ```text
/// (u + A d) x - c (1 - A) y = A - c
/// -d (1 - B) x + (u + B c) y = B - d
/// ```
///
/// where `(A, B)` is the total and `u = 1 - c - d`.
pub fn uncombine(total: TruthValue, component: TruthValue) -> Result<TruthValue, TruthError> {
    if component.is_certain() {
        return Err(TruthError::NotCertainRemovable(component));
    }
    let (big_a, big_b) = (total.belief, total.disbelief);
    let (c, d) = (component.belief, component.disbelief);
    let u = component.uncommitted();

    let m11 = u + big_a * d;
    let m12 = -c * (1.0 - big_a);
    let m21 = -d * (1.0 - big_b);
    let m22 = u + big_b * c;
    let rhs1 = big_a - c;
    let rhs2 = big_b - d;

    let det = m11 * m22 - m12 * m21;
    if det.abs() <= 1e-14 {
        return Err(TruthError::NoValidResidual { total, component });
    }
    let x = (rhs1 * m22 - m12 * rhs2) / det;
    let y = (m11 * rhs2 - m21 * rhs1) / det;
    let residual = TruthValue::with_tolerance(x, y, RESIDUAL_TOLERANCE)
        .map_err(|_| TruthError::NoValidResidual { total, component })?;

    // A residual whose combination with the component is itself in total
    // conflict cannot have produced `total`.
    match combine(residual, component) {
        Ok(back) if back.approx_eq(total, RESIDUAL_TOLERANCE) => Ok(residual),
        _ => Err(TruthError::NoValidResidual { total, component }),
    }
}

/// Contribution of a rule `(if premise consequence rule_tv)` given the
/// current value of its premise.
///
/// Only the premise belief scales the rule value: disconfirming instances of
/// the premise say nothing about the consequence.
pub fn propagate(premise: TruthValue, rule: TruthValue) -> TruthValue {
    TruthValue {
        belief: premise.belief * rule.belief,
        disbelief: premise.belief * rule.disbelief,
    }
}

/// Conjunction of two independently evidenced sentences.
pub fn conjoin(x: TruthValue, y: TruthValue) -> TruthValue {
    let belief = x.belief * y.belief;
    let disbelief = x.disbelief + y.disbelief - x.disbelief * y.disbelief;
    // a1 a2 <= (1-b1)(1-b2) keeps this inside the simplex up to rounding.
    TruthValue::new(belief, disbelief).unwrap_or(TruthValue {
        belief,
        disbelief: 1.0 - belief,
    })
}

/// L1 distance between two truth values.
pub fn delta_mass(old: TruthValue, new: TruthValue) -> f64 {
    (old.belief - new.belief).abs() + (old.disbelief - new.disbelief).abs()
}

/// Engine-wide tunables, settable with `(setvar ...)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Contributions (or changes in contribution) whose mass falls below this
    /// are not propagated.
    pub inference_cutoff: f64,
    /// Once a goal's confirmation or disconfirmation reaches this, proving it
    /// stops.
    pub accept_as_true: f64,
    pub max_chain_depth: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            inference_cutoff: 0.0,
            accept_as_true: 1.0,
            max_chain_depth: 64,
        }
    }
}

impl EngineConfig {
    pub const VARIABLES: [&'static str; 3] =
        ["inference-cutoff", "accept-as-true", "max-chain-depth"];

    /// Sets a variable by its surface name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), TruthError> {
        let bad = || TruthError::BadVariable {
            name: name.to_string(),
            value,
        };
        match name {
            "inference-cutoff" => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(bad());
                }
                self.inference_cutoff = value;
            }
            "accept-as-true" => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(bad());
                }
                self.accept_as_true = value;
            }
            "max-chain-depth" => {
                if value < 1.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                    return Err(bad());
                }
                self.max_chain_depth = value as usize;
            }
            _ => return Err(TruthError::UnknownVariable(name.to_string())),
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "inference-cutoff" => Some(self.inference_cutoff),
            "accept-as-true" => Some(self.accept_as_true),
            "max-chain-depth" => Some(self.max_chain_depth as f64),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(a: f64, b: f64) -> TruthValue {
        TruthValue::new(a, b).unwrap()
    }

    #[test]
    fn construction_clamps_drift_and_rejects_the_rest() {
        let v = TruthValue::new(1.0 + 5e-13, -5e-13).unwrap();
        assert_eq!(v, TruthValue::TRUE);
        let v = TruthValue::new(0.6, 0.4 + 1e-13).unwrap();
        assert!(v.mass() <= 1.0);
        assert!(TruthValue::new(0.9, 0.3).is_err());
        assert!(TruthValue::new(-0.1, 0.0).is_err());
        assert!(TruthValue::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn tags_on_the_lookup_example() {
        let fred = tv(0.3, 0.2);
        assert_eq!(apply_tag(Tag::T, fred), 0.3);
        assert_eq!(apply_tag(Tag::Not, fred), 0.2);
        assert!((apply_tag(Tag::Unknown, fred) - 0.5).abs() < 1e-15);
        assert_eq!(apply_tag(Tag::Poss, fred), 0.8);
        assert_eq!(apply_tag(Tag::PossNot, fred), 0.7);
        assert_eq!(apply_tag(Tag::Mass, fred), 0.5);
        assert_eq!(apply_tag(Tag::Mass, TruthValue::TRUE), 1.0);
    }

    #[test]
    fn negation_swaps() {
        assert_eq!(negate(TruthValue::TRUE), TruthValue::FALSE);
        assert_eq!(negate(TruthValue::VACUOUS), TruthValue::VACUOUS);
        assert_eq!(negate(tv(0.3, 0.2)), tv(0.2, 0.3));
    }

    #[test]
    fn combine_examples() {
        assert!(combine(tv(0.7, 0.0), TruthValue::FALSE)
            .unwrap()
            .approx_eq(TruthValue::FALSE, 1e-12));
        let x = tv(0.42, 0.17);
        assert_eq!(combine(x, TruthValue::VACUOUS).unwrap(), x);
        assert!(matches!(
            combine(TruthValue::TRUE, TruthValue::FALSE),
            Err(TruthError::TotalConflict { .. })
        ));
    }

    #[test]
    fn stash_accumulation_value() {
        let v = combine(tv(0.3, 0.0), tv(0.0, 0.2)).unwrap();
        assert!((v.belief() - 0.3 * 0.8 / 0.94).abs() < 1e-12);
        assert!((v.disbelief() - 0.2 * 0.7 / 0.94).abs() < 1e-12);
    }

    #[test]
    fn uncombine_examples() {
        let r = uncombine(tv(0.7, 0.0), tv(0.7, 0.0)).unwrap();
        assert!(r.approx_eq(TruthValue::VACUOUS, 1e-12));
        assert!(matches!(
            uncombine(TruthValue::FALSE, TruthValue::TRUE),
            Err(TruthError::NotCertainRemovable(_))
        ));
        // (0.5 . 0.5) carries no uncommitted mass, so it cannot be removed
        // from totals it has wiped the ignorance out of.
        assert!(matches!(
            uncombine(tv(0.5, 0.5), tv(0.5, 0.5)),
            Err(TruthError::NoValidResidual { .. })
        ));
    }

    #[test]
    fn uncombine_rejects_totals_the_component_cannot_reach() {
        // Combining anything with (0.6 . 0) leaves belief >= 0.6.
        assert!(uncombine(tv(0.1, 0.0), tv(0.6, 0.0)).is_err());
    }

    #[test]
    fn propagate_examples() {
        assert_eq!(propagate(TruthValue::TRUE, tv(0.7, 0.0)), tv(0.7, 0.0));
        assert_eq!(
            propagate(TruthValue::FALSE, tv(0.7, 0.0)),
            TruthValue::VACUOUS
        );
        let k = propagate(tv(0.5, 0.3), tv(0.7, 0.1));
        assert!(k.approx_eq(tv(0.35, 0.05), 1e-15));
    }

    #[test]
    fn conjoin_examples() {
        let x = tv(0.4, 0.35);
        assert_eq!(conjoin(TruthValue::TRUE, x), x);
        assert_eq!(conjoin(TruthValue::FALSE, x), TruthValue::FALSE);
        assert_eq!(conjoin(tv(0.5, 0.0), tv(0.5, 0.0)), tv(0.25, 0.0));
    }

    #[test]
    fn delta_mass_examples() {
        assert_eq!(delta_mass(tv(0.3, 0.2), tv(0.3, 0.2)), 0.0);
        assert_eq!(delta_mass(TruthValue::VACUOUS, TruthValue::TRUE), 1.0);
        assert!((delta_mass(tv(0.3, 0.2), tv(0.5, 0.1)) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn dotted_pair_round_trip() {
        let v: TruthValue = "(0.3 . 0.2)".parse().unwrap();
        assert_eq!(v, tv(0.3, 0.2));
        assert_eq!(v.to_string(), "(0.3 . 0.2)");
        assert_eq!(TruthValue::TRUE.to_string(), "(1 . 0)");
        assert!("(0.3 0.2)".parse::<TruthValue>().is_err());
        assert!("(0.9 . 0.3)".parse::<TruthValue>().is_err());
    }

    #[test]
    fn config_variables() {
        let mut config = EngineConfig::default();
        config.set("inference-cutoff", 0.2).unwrap();
        config.set("accept-as-true", 0.9).unwrap();
        assert_eq!(config.get("inference-cutoff"), Some(0.2));
        assert!(config.set("accept-as-true", 0.0).is_err());
        assert!(config.set("max-chain-depth", 2.5).is_err());
        assert!(matches!(
            config.set("verbosity", 1.0),
            Err(TruthError::UnknownVariable(_))
        ));
    }
}

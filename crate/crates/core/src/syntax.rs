//! Reader and printer for `.pkb` knowledge-base files.
//!
//! A file is a sequence of statements; `;` comments run to end of line.
//!
//! ```text
//! (fact (foo fred) (0.3 . 0.2))
//! (rule (bird $x) (flies $x) (0.7 . 0.0))
//! (clause (or p (not q) r) (0.8 . 0.1))
//! (control (foo $x) resolution)
//! (setvar inference-cutoff 0.05)
//! ```
//!
//! Fact sentences and rule consequences are stored negation-normalized, so
//! `(fact (not (foo fred)) (1 . 0))` reads back as `(fact (foo fred) (0 . 1))`.

use std::fmt;

use ordered_float::OrderedFloat;

use crate::control::Method;
use crate::error::ParseError;
use crate::resolution::Literal;
use crate::term::{normalize_negation, Term, Var};
use crate::truth::{negate, EngineConfig, TruthValue};

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Fact {
        sentence: Term,
        tv: TruthValue,
    },
    Rule {
        premise: Term,
        consequence: Term,
        tv: TruthValue,
    },
    Clause {
        literals: Vec<Literal>,
        tv: TruthValue,
    },
    Control {
        pattern: Term,
        method: Method,
    },
    SetVar {
        name: String,
        value: f64,
    },
}

impl Statement {
    /// A fact statement with the sentence negation-normalized.
    pub fn fact(sentence: Term, tv: TruthValue) -> Statement {
        let (core, flipped) = normalize_negation(&sentence);
        Statement::Fact {
            sentence: core,
            tv: if flipped { negate(tv) } else { tv },
        }
    }

    /// A rule statement with a negated consequence folded into its value.
    pub fn rule(premise: Term, consequence: Term, tv: TruthValue) -> Statement {
        let (core, flipped) = normalize_negation(&consequence);
        Statement::Rule {
            premise,
            consequence: core,
            tv: if flipped { negate(tv) } else { tv },
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Fact { sentence, tv } => write!(f, "(fact {sentence} {tv})"),
            Statement::Rule {
                premise,
                consequence,
                tv,
            } => write!(f, "(rule {premise} {consequence} {tv})"),
            Statement::Clause { literals, tv } => {
                f.write_str("(clause (or")?;
                for literal in literals {
                    write!(f, " {literal}")?;
                }
                write!(f, ") {tv})")
            }
            Statement::Control { pattern, method } => write!(f, "(control {pattern} {method})"),
            Statement::SetVar { name, value } => write!(f, "(setvar {name} {value})"),
        }
    }
}

/// Prints statements one per line.
pub fn print_kb(statements: &[Statement]) -> String {
    let mut out = String::new();
    for s in statements {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, pos) | Sexp::List(_, pos) => *pos,
        }
    }

    fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(text, _) => Some(text),
            Sexp::List(..) => None,
        }
    }
}

fn syntax(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    /// Next top-level form, or `None` at end of input.
    fn read(&mut self) -> Result<Option<Sexp>, ParseError> {
        self.skip_trivia();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let start = self.pos;
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(syntax(start, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List(items, start)));
                        }
                        Some(_) => {
                            // read() only returns None at end of input, handled above.
                            if let Some(item) = self.read()? {
                                items.push(item);
                            }
                        }
                    }
                }
            }
            ')' => Err(syntax(start, "unexpected `)`")),
            _ => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Some(Sexp::Atom(text, start)))
            }
        }
    }
}

fn read_all(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut reader = Reader::new(text);
    let mut out = Vec::new();
    while let Some(form) = reader.read()? {
        out.push(form);
    }
    Ok(out)
}

fn read_one(text: &str) -> Result<Sexp, ParseError> {
    let mut forms = read_all(text)?;
    match forms.len() {
        1 => Ok(forms.remove(0)),
        0 => Err(syntax(Pos { line: 1, column: 1 }, "empty input")),
        _ => Err(syntax(forms[1].pos(), "expected a single expression")),
    }
}

fn parse_number(text: &str) -> Option<f64> {
    let mut chars = text.chars();
    let first = chars.next()?;
    let numeric_start = first.is_ascii_digit()
        || ((first == '-' || first == '+' || first == '.')
            && text[1..].starts_with(|c: char| c.is_ascii_digit() || c == '.'));
    if !numeric_start
        || !text
            .chars()
            .all(|c| c.is_ascii_digit() || "+-.eE".contains(c))
    {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn to_term(sexp: &Sexp) -> Result<Term, ParseError> {
    match sexp {
        Sexp::Atom(text, pos) => {
            if text == "." {
                return Err(syntax(*pos, "`.` is only allowed inside a truth value"));
            }
            if let Some(name) = text.strip_prefix('$') {
                if name.is_empty() {
                    return Err(syntax(*pos, "variable needs a name after `$`"));
                }
                return Ok(Term::Var(Var::new(name)));
            }
            if let Some(value) = parse_number(text) {
                return Ok(Term::Number(OrderedFloat(value)));
            }
            if text.starts_with(|c: char| c.is_ascii_digit()) {
                return Err(syntax(*pos, format!("malformed number `{text}`")));
            }
            Ok(Term::Symbol(text.as_str().into()))
        }
        Sexp::List(items, pos) => {
            if items.is_empty() {
                return Err(syntax(*pos, "empty list"));
            }
            Ok(Term::Compound(
                items.iter().map(to_term).collect::<Result<_, _>>()?,
            ))
        }
    }
}

fn to_sentence(sexp: &Sexp) -> Result<Term, ParseError> {
    let term = to_term(sexp)?;
    if !term.is_sentence() {
        return Err(syntax(sexp.pos(), format!("`{term}` is not a sentence")));
    }
    let (core, _) = normalize_negation(&term);
    if !core.is_sentence() {
        return Err(syntax(sexp.pos(), format!("`{term}` is not a sentence")));
    }
    Ok(term)
}

fn to_truth(sexp: &Sexp) -> Result<TruthValue, ParseError> {
    let bad = || syntax(sexp.pos(), "expected a truth value `(a . b)`");
    let Sexp::List(items, pos) = sexp else {
        return Err(bad());
    };
    let [a, dot, b] = items.as_slice() else {
        return Err(bad());
    };
    if dot.as_atom() != Some(".") {
        return Err(bad());
    }
    let number = |s: &Sexp| {
        s.as_atom()
            .and_then(parse_number)
            .ok_or_else(|| syntax(s.pos(), "expected a decimal number"))
    };
    let (belief, disbelief) = (number(a)?, number(b)?);
    TruthValue::new(belief, disbelief).map_err(|_| ParseError::Range {
        line: pos.line,
        column: pos.column,
        belief,
        disbelief,
    })
}

fn to_premise(sexp: &Sexp) -> Result<Term, ParseError> {
    if let Sexp::List(items, pos) = sexp {
        if items.first().and_then(Sexp::as_atom) == Some("and") {
            if items.len() < 2 {
                return Err(syntax(*pos, "`and` needs at least one conjunct"));
            }
            let mut elements = vec![Term::sym("and")];
            for item in &items[1..] {
                elements.push(to_sentence(item)?);
            }
            return Ok(Term::Compound(elements));
        }
    }
    to_sentence(sexp)
}

fn to_literal(sexp: &Sexp) -> Result<Literal, ParseError> {
    let sentence = to_sentence(sexp)?;
    if !sentence.is_ground() {
        return Err(syntax(sexp.pos(), "clause literals must be ground"));
    }
    let (atom, flipped) = normalize_negation(&sentence);
    Ok(Literal::new(atom, !flipped))
}

fn expect_arity(items: &[Sexp], pos: Pos, keyword: &str, n: usize) -> Result<(), ParseError> {
    if items.len() != n + 1 {
        return Err(syntax(
            pos,
            format!("`{keyword}` takes {n} arguments, got {}", items.len() - 1),
        ));
    }
    Ok(())
}

fn to_statement(sexp: &Sexp) -> Result<Statement, ParseError> {
    let Sexp::List(items, pos) = sexp else {
        return Err(syntax(sexp.pos(), "expected a statement"));
    };
    let pos = *pos;
    let keyword = items
        .first()
        .and_then(Sexp::as_atom)
        .ok_or_else(|| syntax(pos, "expected a statement keyword"))?;
    match keyword {
        "fact" => {
            expect_arity(items, pos, keyword, 2)?;
            let sentence = to_sentence(&items[1])?;
            if !sentence.is_ground() {
                return Err(syntax(items[1].pos(), "facts must be ground"));
            }
            let tv = to_truth(&items[2])?;
            Ok(Statement::fact(sentence, tv))
        }
        "rule" => {
            expect_arity(items, pos, keyword, 3)?;
            let premise = to_premise(&items[1])?;
            let consequence = to_sentence(&items[2])?;
            let tv = to_truth(&items[3])?;
            Ok(Statement::rule(premise, consequence, tv))
        }
        "clause" => {
            expect_arity(items, pos, keyword, 2)?;
            let Sexp::List(disjuncts, dpos) = &items[1] else {
                return Err(syntax(items[1].pos(), "expected `(or literal ...)`"));
            };
            if disjuncts.first().and_then(Sexp::as_atom) != Some("or") || disjuncts.len() < 2 {
                return Err(syntax(*dpos, "expected `(or literal ...)`"));
            }
            let literals = disjuncts[1..]
                .iter()
                .map(to_literal)
                .collect::<Result<Vec<_>, _>>()?;
            let tv = to_truth(&items[2])?;
            Ok(Statement::Clause { literals, tv })
        }
        "control" => {
            expect_arity(items, pos, keyword, 2)?;
            let pattern = to_sentence(&items[1])?;
            let method = items[2]
                .as_atom()
                .and_then(|m| m.parse::<Method>().ok())
                .ok_or_else(|| {
                    syntax(
                        items[2].pos(),
                        "method must be lookup, backward-chain or resolution",
                    )
                })?;
            Ok(Statement::Control { pattern, method })
        }
        "setvar" => {
            expect_arity(items, pos, keyword, 2)?;
            let name = items[1]
                .as_atom()
                .filter(|n| EngineConfig::VARIABLES.contains(n))
                .ok_or_else(|| {
                    syntax(
                        items[1].pos(),
                        format!(
                            "unknown variable, expected one of {:?}",
                            EngineConfig::VARIABLES
                        ),
                    )
                })?;
            let value = items[2]
                .as_atom()
                .and_then(parse_number)
                .ok_or_else(|| syntax(items[2].pos(), "expected a number"))?;
            Ok(Statement::SetVar {
                name: name.to_string(),
                value,
            })
        }
        other => Err(syntax(pos, format!("unknown statement `{other}`"))),
    }
}

pub fn parse_kb(text: &str) -> Result<Vec<Statement>, ParseError> {
    read_all(text)?.iter().map(to_statement).collect()
}

pub fn parse_statement(text: &str) -> Result<Statement, ParseError> {
    to_statement(&read_one(text)?)
}

/// Parses a single sentence such as `(foo $x)` or `(not (foo fred))`.
pub fn parse_sentence(text: &str) -> Result<Term, ParseError> {
    to_sentence(&read_one(text)?)
}

/// Parses any single term.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    to_term(&read_one(text)?)
}

pub fn parse_truth(text: &str) -> Result<TruthValue, ParseError> {
    to_truth(&read_one(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rule_with_variables() {
        let s = parse_statement("(rule (bird $x) (flies $x) (0.7 . 0.0))").unwrap();
        let Statement::Rule {
            premise,
            consequence,
            tv,
        } = &s
        else {
            panic!("expected a rule, got {s:?}");
        };
        assert_eq!(premise, &Term::app("bird", [Term::var("x")]));
        assert_eq!(consequence, &Term::app("flies", [Term::var("x")]));
        assert_eq!(*tv, TruthValue::new(0.7, 0.0).unwrap());
        assert_eq!(s.to_string(), "(rule (bird $x) (flies $x) (0.7 . 0))");
    }

    #[test]
    fn parses_fact() {
        let s = parse_statement("(fact (foo fred) (0.3 . 0.2))").unwrap();
        assert_eq!(
            s,
            Statement::Fact {
                sentence: Term::app("foo", [Term::sym("fred")]),
                tv: TruthValue::new(0.3, 0.2).unwrap(),
            }
        );
    }

    #[test]
    fn range_error_for_overfull_pair() {
        let err = parse_statement("(fact (foo fred) (0.9 . 0.3))").unwrap_err();
        assert!(
            matches!(
                err,
                ParseError::Range {
                    line: 1,
                    column: 18,
                    ..
                }
            ),
            "{err:?}"
        );
    }

    #[test]
    fn negated_consequence_is_normalized() {
        let s = parse_statement("(rule (foo $x) (not (goo $x)) (1 . 0))").unwrap();
        assert_eq!(s.to_string(), "(rule (foo $x) (goo $x) (0 . 1))");
        let s = parse_statement("(fact (not (foo fred)) (1 . 0))").unwrap();
        assert_eq!(s.to_string(), "(fact (foo fred) (0 . 1))");
    }

    #[test]
    fn syntax_errors_carry_location() {
        let err = parse_kb("(fact (foo fred) (1 . 0))\n  (fact (foo $x) (1 . 0))").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: 2,
                column: 9,
                message: "facts must be ground".into()
            }
        );
        assert!(matches!(
            parse_kb("(fact (foo"),
            Err(ParseError::Syntax {
                line: 1,
                column: 7,
                ..
            })
        ));
        assert!(parse_kb(")").is_err());
        assert!(parse_kb("(fact (foo . bar) (1 . 0))").is_err());
        assert!(parse_kb("(frob)").is_err());
        assert!(parse_kb("(setvar verbosity 3)").is_err());
    }

    #[test]
    fn comments_and_every_form() {
        let text = "; a comment\n\
                    (fact (foo fred) (0.3 . 0.2)) ; trailing\n\
                    (rule (and (bird $x) (not (penguin $x))) (flies $x) (0.9 . 0))\n\
                    (clause (or p (not q) r) (0.8 . 0.1))\n\
                    (control (foo $x) resolution)\n\
                    (setvar inference-cutoff 0.05)\n";
        let statements = parse_kb(text).unwrap();
        assert_eq!(statements.len(), 5);
        assert_eq!(
            statements[2].to_string(),
            "(clause (or p (not q) r) (0.8 . 0.1))"
        );
        assert_eq!(statements[3].to_string(), "(control (foo $x) resolution)");
        assert_eq!(parse_kb(&print_kb(&statements)).unwrap(), statements);
    }

    #[test]
    fn numbers_and_variables_in_terms() {
        let t = parse_term("(age $who 42 -1.5)").unwrap();
        assert_eq!(t.to_string(), "(age $who 42 -1.5)");
        assert!(parse_term("$").is_err());
        assert!(parse_term("1.2.3").is_err());
    }
}

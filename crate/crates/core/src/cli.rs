//! Command-line driver and REPL.
//!
//! One-shot mode runs a single subcommand against the KB named by `--kb`;
//! changes last only for that invocation. With no subcommand, lines are
//! read from stdin and each one is either a statement (starting with `(`)
//! or a subcommand in the same syntax as the command line.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::control::Method;
use crate::error::EngineError;
use crate::kb::KnowledgeBase;
use crate::query::{Query, DEFAULT_CUTOFF};
use crate::syntax::{parse_sentence, parse_truth};
use crate::term::normalize_negation;
use crate::trace::TraceEvent;
use crate::truth::Tag;

#[derive(Debug, Parser)]
#[command(name = "pkb", about = "Probabilistic knowledge base")]
pub struct Args {
    /// Knowledge base file loaded before the command runs.
    #[arg(long, global = true)]
    pub kb: Option<PathBuf>,
    /// Print chainer trace lines to stderr.
    #[arg(long, global = true)]
    pub trace: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Load a `.pkb` file.
    Load { file: PathBuf },
    /// Answer a query through control dispatch.
    Query {
        sentence: String,
        #[arg(long, default_value = "t", value_parser = parse_tag)]
        tag: Tag,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: f64,
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
    },
    /// Combine evidence into a ground sentence.
    Assert { sentence: String, tv: String },
    /// Replace the asserted value of a ground sentence.
    Set { sentence: String, tv: String },
    /// List the live justifications of a sentence.
    Why { sentence: String },
    /// Set an engine variable.
    Setvar { name: String, value: f64 },
    /// Print the knowledge base as statements.
    Show,
}

fn parse_tag(s: &str) -> Result<Tag, String> {
    s.parse()
        .map_err(|e: crate::error::TruthError| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

#[derive(Debug, Parser)]
#[command(name = "", no_binary_name = true, disable_help_flag = true)]
struct Line {
    #[command(subcommand)]
    command: Command,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_ANSWER: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug)]
enum Failure {
    Engine(EngineError),
    Io(String),
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Engine(e)
    }
}

impl From<crate::error::ParseError> for Failure {
    fn from(e: crate::error::ParseError) -> Self {
        Failure::Engine(e.into())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Engine(e) => write!(f, "{e}"),
            Failure::Io(e) => f.write_str(e),
        }
    }
}

pub struct Session<'io> {
    pub kb: KnowledgeBase,
    trace: bool,
    out: &'io mut dyn Write,
    err: &'io mut dyn Write,
}

impl<'io> Session<'io> {
    pub fn new(
        kb: KnowledgeBase,
        trace: bool,
        out: &'io mut dyn Write,
        err: &'io mut dyn Write,
    ) -> Self {
        let mut kb = kb;
        if trace {
            kb.enable_trace();
        }
        Session {
            kb,
            trace,
            out,
            err,
        }
    }

    /// Runs one command and returns its exit code.
    pub fn execute(&mut self, command: &Command) -> i32 {
        let code = match self.dispatch(command) {
            Ok(code) => code,
            Err(failure) => {
                let _ = writeln!(self.err, "error: {failure}");
                EXIT_ERROR
            }
        };
        let events = self.kb.take_trace();
        self.write_trace(&events);
        code
    }

    fn write_trace(&mut self, events: &[TraceEvent]) {
        if self.trace {
            for event in events {
                let _ = writeln!(self.err, "{event}");
            }
        }
    }

    fn dispatch(&mut self, command: &Command) -> Result<i32, Failure> {
        match command {
            Command::Load { file } => {
                let text = std::fs::read_to_string(file)
                    .map_err(|e| Failure::Io(format!("{}: {e}", file.display())))?;
                let n = self.kb.load_str(&text)?;
                let _ = writeln!(self.out, "loaded {n} statements");
            }
            Command::Query {
                sentence,
                tag,
                cutoff,
                method,
            } => {
                let mut query = Query::new(parse_sentence(sentence)?)
                    .tag(*tag)
                    .cutoff(*cutoff)
                    .traced(self.trace);
                query.method = *method;
                let result = self.kb.query(&query)?;
                self.write_trace(&result.trace);
                for answer in &result.answers {
                    let _ = writeln!(self.out, "{answer}");
                }
                return Ok(if result.answers.is_empty() {
                    EXIT_NO_ANSWER
                } else {
                    EXIT_OK
                });
            }
            Command::Assert { sentence, tv } => {
                self.kb
                    .stash(&parse_sentence(sentence)?, parse_truth(tv)?)?;
            }
            Command::Set { sentence, tv } => {
                self.kb
                    .set_truth(&parse_sentence(sentence)?, parse_truth(tv)?)?;
            }
            Command::Why { sentence } => {
                let sentence = parse_sentence(sentence)?;
                let (core, _) = normalize_negation(&sentence);
                if let Some(entry) = self.kb.entry(&core) {
                    let _ = writeln!(
                        self.out,
                        "{} {} asserted={}",
                        entry.sentence, entry.tv, entry.asserted
                    );
                }
                for j in self.kb.justifications_matching(&sentence) {
                    let _ = writeln!(
                        self.out,
                        "  rule={} bind={} premise={} contrib={} -> {}",
                        j.rule, j.bindings, j.premise_tv, j.contribution, j.consequence
                    );
                }
            }
            Command::Setvar { name, value } => self.kb.set_var(name, *value)?,
            Command::Show => {
                let _ = write!(self.out, "{}", self.kb.to_text());
            }
        }
        Ok(EXIT_OK)
    }

    /// Runs a REPL over `input` until end of input or `quit`. Returns the
    /// code of the last command.
    pub fn repl(&mut self, input: &mut dyn BufRead) -> i32 {
        let mut last = EXIT_OK;
        let mut pending = String::new();
        let mut line = String::new();
        loop {
            line.clear();
            match input.read_line(&mut line) {
                Ok(0) | Err(_) => break,
                Ok(_) => {}
            }
            pending.push_str(&line);
            if depth(&pending) > 0 {
                continue;
            }
            let text = std::mem::take(&mut pending);
            let text = text.trim();
            if text.is_empty() || text.starts_with(';') {
                continue;
            }
            if text == "quit" || text == "exit" {
                break;
            }
            last = self.repl_line(text);
        }
        last
    }

    fn repl_line(&mut self, text: &str) -> i32 {
        if text.starts_with('(') {
            return match self.kb.load_str(text) {
                Ok(_) => {
                    let events = self.kb.take_trace();
                    self.write_trace(&events);
                    EXIT_OK
                }
                Err(e) => {
                    let _ = writeln!(self.err, "error: {e}");
                    EXIT_ERROR
                }
            };
        }
        match Line::try_parse_from(split_words(text)) {
            Ok(line) => self.execute(&line.command),
            Err(e) => {
                let _ = write!(self.err, "{e}");
                EXIT_ERROR
            }
        }
    }
}

/// Parenthesis depth outside comments; positive means the text is unfinished.
fn depth(text: &str) -> i64 {
    let mut depth = 0;
    for line in text.lines() {
        for c in line.chars() {
            match c {
                ';' => break,
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
        }
    }
    depth
}

/// Splits a REPL line into words. Parenthesized groups and quoted strings
/// are single words.
fn split_words(text: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut word = String::new();
        if c == '"' {
            chars.next();
            for c in chars.by_ref() {
                if c == '"' {
                    break;
                }
                word.push(c);
            }
        } else if c == '(' {
            let mut depth = 0;
            for c in chars.by_ref() {
                word.push(c);
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    _ => {}
                }
                if depth == 0 {
                    break;
                }
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                word.push(c);
                chars.next();
            }
        }
        words.push(word);
    }
    words
}

/// Entry point shared by the binary and the tests.
pub fn run<I, S>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(args) => args,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let trace = args.trace || std::env::var("PKB_TRACE").is_ok_and(|v| v == "1");
    let mut kb = KnowledgeBase::new();
    if let Some(path) = &args.kb {
        let loaded = std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))
            .and_then(|text| kb.load_str(&text).map_err(|e| e.to_string()));
        if let Err(e) = loaded {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
        // Preloading is not part of the traced session.
        kb.take_trace();
    }
    let mut session = Session::new(kb, trace, out, err);
    match &args.command {
        Some(command) => session.execute(command),
        None => session.repl(input),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_with(kb_text: &str, args: &[&str], stdin: &str) -> (i32, String, String) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kb.pkb");
        std::fs::write(&path, kb_text).unwrap();
        let mut full = vec!["pkb".to_string(), "--kb".into(), path.display().to_string()];
        full.extend(args.iter().map(|s| s.to_string()));
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(full, &mut stdin.as_bytes(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn words_keep_groups_together() {
        assert_eq!(
            split_words(r#"query (foo $x) --cutoff 0.5 "(a . b)""#),
            vec!["query", "(foo $x)", "--cutoff", "0.5", "(a . b)"]
        );
    }

    #[test]
    fn missing_answers_exit_one() {
        let (code, out, _) = run_with("", &["query", "(zzz q)"], "");
        assert_eq!((code, out.as_str()), (EXIT_NO_ANSWER, ""));
    }

    #[test]
    fn errors_exit_two() {
        let (code, _, err) = run_with("", &["assert", "(foo $x)", "(1 . 0)"], "");
        assert_eq!(code, EXIT_ERROR);
        assert!(err.starts_with("error:"));
        let (code, _, _) = run_with("(fact (foo", &["show"], "");
        assert_eq!(code, EXIT_ERROR);
    }

    #[test]
    fn repl_session() {
        let script = "(fact (bird Tweety) (1 . 0))\n\
                      (rule (bird $x)\n  (flies $x) (0.7 . 0.0))\n\
                      query (flies $x) --cutoff 0.5\n\
                      setvar accept-as-true 0.6\n\
                      why (flies Tweety)\n";
        let (code, out, err) = run_with("", &[], script);
        assert_eq!(code, EXIT_OK, "{err}");
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "{$x=Tweety} 0.7");
        assert_eq!(lines[1], "(flies Tweety) (0.7 . 0) asserted=(0 . 0)");
        assert!(lines[2].starts_with("  rule=0 bind={$x=Tweety}"));
    }
}

//! Reader and printer for the TPDB-style problem format, extended with weak
//! rules `l ->= r`, optional rule labels `lbl: l -> r` and a signature
//! partition section.

use crate::framework::{Problem, Signature, StartTerms};
use crate::rewrite::{Rule, Trs};
use crate::term::{Symbol, SymbolKind, Term};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: symbol {symbol} used with {found} arguments, expected {expected}")]
    ArityMismatch { line: usize, col: usize, symbol: String, expected: usize, found: usize },
    #[error("undeclared strategy {0}")]
    UndeclaredStrategy(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Comma,
    Arrow,
    WeakArrow,
    Word(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    let mut word = String::new();
    let mut word_at = (1, 1);
    let flush = |word: &mut String, at: (usize, usize), out: &mut Vec<Spanned>| {
        if !word.is_empty() {
            out.push(Spanned { tok: Tok::Word(std::mem::take(word)), line: at.0, col: at.1 });
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let here = (line, col);
        let single = match c {
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            flush(&mut word, word_at, &mut out);
            out.push(Spanned { tok, line, col });
            i += 1;
            col += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            flush(&mut word, word_at, &mut out);
            let weak = chars.get(i + 2) == Some(&'=');
            out.push(Spanned { tok: if weak { Tok::WeakArrow } else { Tok::Arrow }, line, col });
            let n = if weak { 3 } else { 2 };
            i += n;
            col += n;
        } else if c.is_whitespace() {
            flush(&mut word, word_at, &mut out);
            i += 1;
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        } else {
            if word.is_empty() {
                word_at = here;
            }
            word.push(c);
            i += 1;
            col += 1;
        }
    }
    flush(&mut word, word_at, &mut out);
    out
}

/// Term syntax before symbol resolution.
#[derive(Debug, Clone)]
struct Raw {
    name: String,
    args: Vec<Raw>,
    parens: bool,
    line: usize,
    col: usize,
}

struct RawRule {
    label: Option<String>,
    lhs: Raw,
    rhs: Raw,
    weak: bool,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Self {
        let toks = tokenize(text);
        let lines = text.lines().count().max(1);
        let last = text.lines().last().map_or(0, |l| l.chars().count());
        Parser { toks, pos: 0, end: (lines, last + 1) }
    }

    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn at(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |s| (s.line, s.col))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.at();
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(s) if s.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn word(&mut self) -> Result<(String, usize, usize), ParseError> {
        match self.peek().cloned() {
            Some(Spanned { tok: Tok::Word(w), line, col }) => {
                self.pos += 1;
                Ok((w, line, col))
            }
            _ => self.err("expected identifier"),
        }
    }

    fn term(&mut self) -> Result<Raw, ParseError> {
        let (name, line, col) = self.word()?;
        if !matches!(self.peek(), Some(Spanned { tok: Tok::Open, .. })) {
            return Ok(Raw { name, args: Vec::new(), parens: false, line, col });
        }
        self.pos += 1;
        let mut args = Vec::new();
        if matches!(self.peek(), Some(Spanned { tok: Tok::Close, .. })) {
            self.pos += 1;
            return Ok(Raw { name, args, parens: true, line, col });
        }
        loop {
            args.push(self.term()?);
            match self.next().map(|s| s.tok) {
                Some(Tok::Comma) => continue,
                Some(Tok::Close) => break,
                _ => {
                    self.pos -= 1;
                    return self.err("expected ',' or ')'");
                }
            }
        }
        Ok(Raw { name, args, parens: true, line, col })
    }

    /// Skips a balanced section body up to (and including) its closing paren.
    fn skip_section(&mut self) -> Result<(), ParseError> {
        let mut depth = 1;
        while depth > 0 {
            match self.next().map(|s| s.tok) {
                Some(Tok::Open) => depth += 1,
                Some(Tok::Close) => depth -= 1,
                Some(_) => {}
                None => return self.err("unbalanced parentheses"),
            }
        }
        Ok(())
    }

    fn rule(&mut self) -> Result<RawRule, ParseError> {
        let (line, col) = self.at();
        let mut label = None;
        if let Some(Spanned { tok: Tok::Word(w), .. }) = self.peek() {
            if w.len() > 1 && w.ends_with(':') {
                label = Some(w[..w.len() - 1].to_string());
                self.pos += 1;
            }
        }
        let lhs = self.term()?;
        let weak = match self.next().map(|s| s.tok) {
            Some(Tok::Arrow) => false,
            Some(Tok::WeakArrow) => true,
            _ => {
                self.pos -= 1;
                return self.err("expected '->' or '->='");
            }
        };
        let rhs = self.term()?;
        Ok(RawRule { label, lhs, rhs, weak, line, col })
    }
}

#[derive(Default)]
struct Sections {
    vars: BTreeSet<String>,
    rules: Vec<RawRule>,
    innermost: bool,
    start: Option<StartTerms>,
    constructors: Option<BTreeSet<String>>,
    defined: Option<BTreeSet<String>>,
    /// Arities given as `name/n` in the signature section.
    declared: BTreeMap<String, (usize, usize, usize)>,
    infix: BTreeSet<String>,
}

fn read_sections(text: &str) -> Result<Sections, ParseError> {
    let mut p = Parser::new(text);
    let mut s = Sections::default();
    while p.peek().is_some() {
        p.expect(Tok::Open, "'('")?;
        let (kw, line, col) = p.word()?;
        match kw.as_str() {
            "VAR" => {
                while let Some(Spanned { tok: Tok::Word(_), .. }) = p.peek() {
                    s.vars.insert(p.word()?.0);
                }
                p.expect(Tok::Close, "')'")?;
            }
            "RULES" => {
                while !matches!(p.peek(), Some(Spanned { tok: Tok::Close, .. }) | None) {
                    s.rules.push(p.rule()?);
                }
                p.expect(Tok::Close, "')'")?;
            }
            "STRATEGY" => {
                let (st, ..) = p.word()?;
                match st.as_str() {
                    "INNERMOST" => s.innermost = true,
                    "FULL" => s.innermost = false,
                    _ => return Err(ParseError::UndeclaredStrategy(st)),
                }
                p.expect(Tok::Close, "')'")?;
            }
            "STARTTERM" => {
                let (st, ..) = p.word()?;
                s.start = Some(match st.as_str() {
                    "CONSTRUCTOR-BASED" => StartTerms::BasicTerms,
                    "FULL" => StartTerms::AllTerms,
                    _ => return Err(ParseError::Syntax { line, col, msg: format!("unknown start terms {st}") }),
                });
                p.expect(Tok::Close, "')'")?;
            }
            "SIGNATURE" => {
                while matches!(p.peek(), Some(Spanned { tok: Tok::Open, .. })) {
                    p.pos += 1;
                    let (part, ..) = p.word()?;
                    let mut names = BTreeSet::new();
                    while let Some(Spanned { tok: Tok::Word(_), .. }) = p.peek() {
                        let (w, line, col) = p.word()?;
                        let name = match w.rsplit_once('/') {
                            Some((n, a)) if !n.is_empty() => {
                                let a = a.parse().map_err(|_| ParseError::Syntax {
                                    line,
                                    col,
                                    msg: format!("bad arity in {w}"),
                                })?;
                                s.declared.insert(n.to_string(), (a, line, col));
                                n.to_string()
                            }
                            _ => w,
                        };
                        names.insert(name);
                    }
                    p.expect(Tok::Close, "')'")?;
                    match part.as_str() {
                        "CONSTRUCTORS" => s.constructors = Some(names),
                        "DEFINED" => s.defined = Some(names),
                        _ => return p.err(format!("unknown signature part {part}")),
                    }
                }
                p.expect(Tok::Close, "')'")?;
            }
            "INFIX" => {
                while let Some(Spanned { tok: Tok::Word(_), .. }) = p.peek() {
                    s.infix.insert(p.word()?.0);
                }
                p.expect(Tok::Close, "')'")?;
            }
            "COMMENT" => p.skip_section()?,
            _ => return Err(ParseError::Syntax { line, col, msg: format!("unknown section {kw}") }),
        }
    }
    Ok(s)
}

fn collect_arities(
    t: &Raw,
    vars: &BTreeSet<String>,
    ar: &mut BTreeMap<String, usize>,
) -> Result<(), ParseError> {
    if vars.contains(&t.name) {
        if t.parens {
            return Err(ParseError::ArityMismatch {
                line: t.line,
                col: t.col,
                symbol: t.name.clone(),
                expected: 0,
                found: t.args.len(),
            });
        }
        return Ok(());
    }
    match ar.get(&t.name) {
        Some(&n) if n != t.args.len() => {
            return Err(ParseError::ArityMismatch {
                line: t.line,
                col: t.col,
                symbol: t.name.clone(),
                expected: n,
                found: t.args.len(),
            })
        }
        _ => {
            ar.insert(t.name.clone(), t.args.len());
        }
    }
    t.args.iter().try_for_each(|a| collect_arities(a, vars, ar))
}

fn build(t: &Raw, vars: &BTreeSet<String>, syms: &BTreeMap<String, Symbol>) -> Term {
    if vars.contains(&t.name) {
        return Term::var(&t.name);
    }
    Term::app(syms[&t.name].clone(), t.args.iter().map(|a| build(a, vars, syms)).collect())
}

/// Kind of a name not covered by an explicit partition.
fn derived_kind(name: &str, arity: usize, defined: &BTreeSet<String>) -> Option<SymbolKind> {
    if let Some(base) = name.strip_suffix('#') {
        return defined.contains(base).then_some(SymbolKind::Marked);
    }
    if let Some(n) = name.strip_prefix("c_").and_then(|n| n.parse::<usize>().ok()) {
        return (n == arity).then_some(SymbolKind::Compound);
    }
    None
}

/// Parses a problem file.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let s = read_sections(text)?;
    let mut ar = BTreeMap::new();
    for r in &s.rules {
        collect_arities(&r.lhs, &s.vars, &mut ar)?;
        collect_arities(&r.rhs, &s.vars, &mut ar)?;
    }
    let defined: BTreeSet<String> = match &s.defined {
        Some(d) => d.clone(),
        None => s
            .rules
            .iter()
            .filter(|r| !s.vars.contains(&r.lhs.name) && !r.lhs.name.ends_with('#') && !r.lhs.name.starts_with("c_"))
            .map(|r| r.lhs.name.clone())
            .collect(),
    };
    let mut signature = Signature { infix: s.infix.clone(), ..Signature::default() };
    let mut syms = BTreeMap::new();
    for (name, &arity) in &ar {
        let kind = if defined.contains(name) {
            SymbolKind::Defined
        } else if let Some(k) = derived_kind(name, arity, &defined) {
            k
        } else {
            SymbolKind::Constructor
        };
        let base = if kind == SymbolKind::Marked { name.trim_end_matches('#') } else { name.as_str() };
        let f = Symbol::new(base, arity, kind);
        match kind {
            SymbolKind::Defined => {
                signature.defined.insert(f.clone());
            }
            SymbolKind::Constructor => {
                signature.constructors.insert(f.clone());
            }
            _ => {
                if let Some(base) = name.strip_suffix('#') {
                    signature.defined.insert(Symbol::defined(base, arity));
                }
            }
        }
        syms.insert(name.clone(), f);
    }
    for (name, &(a, line, col)) in &s.declared {
        if let Some(&used) = ar.get(name) {
            if used != a {
                return Err(ParseError::ArityMismatch { line, col, symbol: name.clone(), expected: a, found: used });
            }
        }
    }
    if let Some(cs) = &s.constructors {
        for c in cs.iter().filter(|c| !ar.contains_key(*c) && !s.vars.contains(*c)) {
            signature.constructors.insert(Symbol::constructor(c, s.declared.get(c).map_or(0, |d| d.0)));
        }
    }
    for f in defined.iter().filter(|f| !ar.contains_key(*f)) {
        if let Some(&(a, ..)) = s.declared.get(f) {
            signature.defined.insert(Symbol::defined(f, a));
        }
    }
    let mut strict = Vec::new();
    let mut weak = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, r) in s.rules.iter().enumerate() {
        let label = r.label.clone().unwrap_or_else(|| format!("r{}", i + 1));
        if !seen.insert(label.clone()) {
            return Err(ParseError::Syntax { line: r.line, col: r.col, msg: format!("duplicate rule label {label}") });
        }
        let lhs = build(&r.lhs, &s.vars, &syms);
        let rhs = build(&r.rhs, &s.vars, &syms);
        if lhs.is_var() {
            return Err(ParseError::Syntax { line: r.line, col: r.col, msg: "left-hand side is a variable".into() });
        }
        if let Some(x) = rhs.vars().difference(&lhs.vars()).next() {
            return Err(ParseError::Syntax {
                line: r.line,
                col: r.col,
                msg: format!("variable {x} of the right-hand side does not occur on the left"),
            });
        }
        let rule = Rule::labeled(lhs, rhs, &label);
        if r.weak {
            weak.push(rule);
        } else {
            strict.push(rule);
        }
    }
    let strict = Trs::new(strict);
    let weak = Trs::new(weak);
    let q = if s.innermost { strict.union(&weak) } else { Trs::empty() };
    let start = s.start.unwrap_or(StartTerms::BasicTerms);
    Ok(Problem::new(strict, weak, q, start, signature))
}

fn resolve(name: &str, arity: usize, sig: &Signature) -> Option<Symbol> {
    if let Some(f) = sig.lookup(name) {
        return (f.arity == arity).then(|| f.clone());
    }
    if let Some(base) = name.strip_suffix('#') {
        let f = sig.lookup(base)?;
        return if f.arity == arity { f.marked() } else { None };
    }
    match name.strip_prefix("c_").and_then(|n| n.parse::<usize>().ok()) {
        Some(n) if n == arity => Some(Symbol::compound(n)),
        _ => None,
    }
}

fn resolve_term(t: &Raw, sig: &Signature, is_var: &dyn Fn(&str) -> bool) -> Result<Term, ParseError> {
    if t.args.is_empty() && !t.parens && is_var(&t.name) {
        return Ok(Term::var(&t.name));
    }
    let f = resolve(&t.name, t.args.len(), sig).ok_or_else(|| ParseError::Syntax {
        line: t.line,
        col: t.col,
        msg: format!("unknown symbol {}/{}", t.name, t.args.len()),
    })?;
    let args = t.args.iter().map(|a| resolve_term(a, sig, is_var)).collect::<Result<Vec<_>, _>>()?;
    Ok(Term::app(f, args))
}

fn single_term(s: &str) -> Result<Raw, ParseError> {
    let mut p = Parser::new(s);
    let t = p.term()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(t)
}

/// Parses a prefix term over `sig`; names in `vars` are variables.
/// `f#` and `c_n` resolve to marked and compound symbols.
pub fn parse_term(s: &str, sig: &Signature, vars: &[&str]) -> Result<Term, ParseError> {
    resolve_term(&single_term(s)?, sig, &|x| vars.contains(&x))
}

/// Like [`parse_term`], but every identifier that is not a symbol of `sig`
/// and carries no argument list is read as a variable.
pub fn parse_term_open(s: &str, sig: &Signature) -> Result<Term, ParseError> {
    resolve_term(&single_term(s)?, sig, &|x| resolve(x, 0, sig).is_none())
}

/// Parses `label: lhs -> rhs` with open variables.
pub fn parse_rule_open(s: &str, sig: &Signature) -> Result<Rule, ParseError> {
    let err = |msg: &str| ParseError::Syntax { line: 1, col: 1, msg: msg.to_string() };
    let (label, body) = match s.split_once(": ") {
        Some((l, b)) => (Some(l), b),
        None => (None, s),
    };
    let (l, r) = body.split_once(" -> ").ok_or_else(|| err("expected 'lhs -> rhs'"))?;
    let lhs = parse_term_open(l.trim(), sig)?;
    let rhs = parse_term_open(r.trim(), sig)?;
    Ok(match label {
        Some(lb) => Rule::labeled(lhs, rhs, lb),
        None => Rule::new(lhs, rhs),
    })
}

fn vars_of(p: &Problem) -> BTreeSet<String> {
    p.all_rules().iter().flat_map(|r| r.lhs.vars()).map(|x| x.to_string()).collect()
}

/// Prints a problem in the input format. Q is expressed through the
/// strategy section only, so it must be empty or equal to all rules.
pub fn print_problem(p: &Problem) -> String {
    let mut out = String::new();
    let vars = vars_of(p);
    let _ = writeln!(out, "(VAR {})", vars.into_iter().collect::<Vec<_>>().join(" "));
    let names = |s: &BTreeSet<Symbol>| s.iter().map(|f| format!("{}/{}", f.name, f.arity)).collect::<Vec<_>>().join(" ");
    let _ = writeln!(
        out,
        "(SIGNATURE (CONSTRUCTORS {}) (DEFINED {}))",
        names(&p.signature.constructors),
        names(&p.signature.defined)
    );
    if !p.signature.infix.is_empty() {
        let _ = writeln!(out, "(INFIX {})", p.signature.infix.iter().cloned().collect::<Vec<_>>().join(" "));
    }
    let _ = writeln!(out, "(RULES");
    for (r, arrow) in p.strict.iter().map(|r| (r, "->")).chain(p.weak.iter().map(|r| (r, "->="))) {
        let _ = writeln!(out, "  {}: {} {arrow} {}", r.label(), r.lhs, r.rhs);
    }
    let _ = writeln!(out, ")");
    if !p.q.is_empty() {
        let _ = writeln!(out, "(STRATEGY INNERMOST)");
    }
    let start = match p.start {
        StartTerms::AllTerms => "FULL",
        _ => "CONSTRUCTOR-BASED",
    };
    let _ = writeln!(out, "(STARTTERM {start})");
    out
}

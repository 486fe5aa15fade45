//! First-order terms over a signature split into constructors, defined
//! symbols, marked (dependency pair) symbols and compound symbols.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("invalid position {0:?}")]
    InvalidPosition(Position),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymbolKind {
    Constructor,
    Defined,
    Marked,
    Compound,
}

/// A function symbol. Identity is the triple (name, arity, kind).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub name: Arc<str>,
    pub arity: usize,
    pub kind: SymbolKind,
}

impl Symbol {
    pub fn new(name: &str, arity: usize, kind: SymbolKind) -> Self {
        Symbol { name: Arc::from(name), arity, kind }
    }

    pub fn constructor(name: &str, arity: usize) -> Self {
        Self::new(name, arity, SymbolKind::Constructor)
    }

    pub fn defined(name: &str, arity: usize) -> Self {
        Self::new(name, arity, SymbolKind::Defined)
    }

    /// The compound symbol `c_n`.
    pub fn compound(arity: usize) -> Self {
        Symbol { name: Arc::from(format!("c_{arity}")), arity, kind: SymbolKind::Compound }
    }

    /// The dependency pair symbol `f#` of a defined symbol `f`.
    pub fn marked(&self) -> Option<Symbol> {
        match self.kind {
            SymbolKind::Defined => Some(Symbol { kind: SymbolKind::Marked, ..self.clone() }),
            _ => None,
        }
    }

    pub fn unmarked(&self) -> Symbol {
        match self.kind {
            SymbolKind::Marked => Symbol { kind: SymbolKind::Defined, ..self.clone() },
            _ => self.clone(),
        }
    }

    pub fn is_constructor(&self) -> bool {
        self.kind == SymbolKind::Constructor
    }

    pub fn is_defined(&self) -> bool {
        self.kind == SymbolKind::Defined
    }

    pub fn is_marked(&self) -> bool {
        self.kind == SymbolKind::Marked
    }

    pub fn is_compound(&self) -> bool {
        self.kind == SymbolKind::Compound
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SymbolKind::Marked => write!(f, "{}#", self.name),
            _ => write!(f, "{}", self.name),
        }
    }
}

/// Positions are sequences of 1-based argument indices; the root is `[]`.
pub type Position = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(Arc<str>),
    App(Symbol, Arc<[Term]>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    /// Builds `f(args)`. Panics if the number of arguments differs from the arity.
    pub fn app(symbol: Symbol, args: Vec<Term>) -> Term {
        assert_eq!(
            symbol.arity,
            args.len(),
            "symbol {} applied to {} arguments",
            symbol,
            args.len()
        );
        Term::App(symbol, Arc::from(args))
    }

    pub fn constant(symbol: Symbol) -> Term {
        Term::app(symbol, Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn vars(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        if let Term::App(f, args) = self {
            out.insert(f.clone());
            args.iter().for_each(|a| a.collect_symbols(out));
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// All positions in pre-order (leftmost-outermost first).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.collect_positions(&mut prefix, &mut out);
        out
    }

    fn collect_positions(&self, prefix: &mut Position, out: &mut Vec<Position>) {
        out.push(prefix.clone());
        for (i, a) in self.args().iter().enumerate() {
            prefix.push(i + 1);
            a.collect_positions(prefix, out);
            prefix.pop();
        }
    }

    /// Subterms in pre-order, paired with their positions.
    pub fn subterms(&self) -> Vec<(Position, &Term)> {
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.collect_subterms(&mut prefix, &mut out);
        out
    }

    fn collect_subterms<'a>(&'a self, prefix: &mut Position, out: &mut Vec<(Position, &'a Term)>) {
        out.push((prefix.clone(), self));
        for (i, a) in self.args().iter().enumerate() {
            prefix.push(i + 1);
            a.collect_subterms(prefix, out);
            prefix.pop();
        }
    }

    pub fn subterm_at(&self, pos: &[usize]) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in pos {
            cur = match cur.args().get(i.wrapping_sub(1)) {
                Some(t) if i >= 1 => t,
                _ => return Err(TermError::InvalidPosition(pos.to_vec())),
            };
        }
        Ok(cur)
    }

    /// Replaces the subterm at `pos` by `replacement`.
    pub fn replace_at(&self, pos: &[usize], replacement: Term) -> Result<Term, TermError> {
        match pos.split_first() {
            None => Ok(replacement),
            Some((&i, rest)) => match self {
                Term::App(f, args) if i >= 1 && i <= args.len() => {
                    let mut new_args: Vec<Term> = args.to_vec();
                    new_args[i - 1] = args[i - 1]
                        .replace_at(rest, replacement)
                        .map_err(|_| TermError::InvalidPosition(pos.to_vec()))?;
                    Ok(Term::App(f.clone(), Arc::from(new_args)))
                }
                _ => Err(TermError::InvalidPosition(pos.to_vec())),
            },
        }
    }

    /// True iff the term is built from constructors and variables only.
    pub fn is_constructor_term(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::App(f, args) => f.is_constructor() && args.iter().all(Term::is_constructor_term),
        }
    }

    pub fn contains_compound(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(f, args) => f.is_compound() || args.iter().any(Term::contains_compound),
        }
    }

    pub fn contains_marked(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(f, args) => f.is_marked() || args.iter().any(Term::contains_marked),
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Arc<str>) -> Term) -> Term {
        match self {
            Term::Var(x) => f(x),
            Term::App(g, args) => {
                Term::App(g.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    pub fn display_with<'a>(&'a self, infix: &'a BTreeSet<String>) -> TermPrinter<'a> {
        TermPrinter { term: self, infix }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        static NONE: BTreeSet<String> = BTreeSet::new();
        write!(f, "{}", TermPrinter { term: self, infix: &NONE })
    }
}

/// Renders terms in prefix form, except for binary symbols whose (unmarked)
/// name is in `infix`, which are printed as `(a op b)` below the root.
pub struct TermPrinter<'a> {
    term: &'a Term,
    infix: &'a BTreeSet<String>,
}

impl TermPrinter<'_> {
    fn write(&self, t: &Term, top: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match t {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(g, args) if args.len() == 2 && self.infix.contains(&*g.name) => {
                if !top {
                    write!(f, "(")?;
                }
                self.write(&args[0], false, f)?;
                write!(f, " {g} ")?;
                self.write(&args[1], false, f)?;
                if !top {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Term::App(g, args) if args.is_empty() => write!(f, "{g}"),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    self.write(a, true, f)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for TermPrinter<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.term, true, f)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Arc<str>, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.bindings.get(x)
    }

    pub fn insert(&mut self, x: Arc<str>, t: Term) {
        self.bindings.insert(x, t);
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Arc<str>, &Term)> {
        self.bindings.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |x| self.bindings.get(x).cloned().unwrap_or_else(|| Term::Var(x.clone())))
    }
}

impl FromIterator<(Arc<str>, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Arc<str>, Term)>>(iter: I) -> Self {
        Substitution { bindings: iter.into_iter().collect() }
    }
}

/// One-sided matching: `pattern·σ = subject` with `dom(σ) ⊆ vars(pattern)`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    match_into(pattern, subject, &mut sigma).then_some(sigma)
}

fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::Var(x), _) => match sigma.bindings.get(x) {
            Some(bound) => bound == subject,
            None => {
                sigma.bindings.insert(x.clone(), subject.clone());
                true
            }
        },
        (Term::App(f, ps), Term::App(g, ss)) => {
            f == g && ps.iter().zip(ss.iter()).all(|(p, s)| match_into(p, s, sigma))
        }
        (Term::App(..), Term::Var(_)) => false,
    }
}

/// Most general unifier with occurs check. The result is idempotent.
pub fn unify_terms(s: &Term, t: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut work = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = work.pop() {
        let a = sigma.apply(&a);
        let b = sigma.apply(&b);
        match (&a, &b) {
            _ if a == b => {}
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if other.vars().contains(x) {
                    return None;
                }
                let single: Substitution = std::iter::once((x.clone(), other.clone())).collect();
                for v in sigma.bindings.values_mut() {
                    *v = single.apply(v);
                }
                sigma.bindings.insert(x.clone(), other.clone());
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g {
                    return None;
                }
                work.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
        }
    }
    Some(sigma)
}

static FRESH: AtomicUsize = AtomicUsize::new(0);

/// A variable outside every user namespace (`%` never occurs in parsed names).
pub fn fresh_var() -> Term {
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    Term::Var(Arc::from(format!("%{n}")))
}

/// Renames all variables of `terms` consistently to fresh ones.
pub fn rename_apart(terms: &[&Term]) -> Vec<Term> {
    let mut renaming: BTreeMap<Arc<str>, Term> = BTreeMap::new();
    terms
        .iter()
        .map(|t| t.map_vars(&mut |x| renaming.entry(x.clone()).or_insert_with(fresh_var).clone()))
        .collect()
}

/// `f(t1..tn)` becomes `f#(t1..tn)` for defined `f`; everything else is unchanged.
pub fn mark(t: &Term) -> Term {
    match t {
        Term::App(f, args) if f.is_defined() => Term::App(f.marked().expect("defined"), args.clone()),
        _ => t.clone(),
    }
}

pub fn unmark(t: &Term) -> Term {
    match t {
        Term::App(f, args) if f.is_marked() => Term::App(f.unmarked(), args.clone()),
        _ => t.clone(),
    }
}

/// `com([t]) = t`, otherwise `c_n(t1..tn)`.
pub fn com(ts: Vec<Term>) -> Term {
    if ts.len() == 1 {
        return ts.into_iter().next().expect("one element");
    }
    Term::app(Symbol::compound(ts.len()), ts)
}

/// Components of a compound right-hand side: the arguments of a compound
/// root, otherwise the term itself.
pub fn com_components(t: &Term) -> Vec<Term> {
    match t {
        Term::App(f, args) if f.is_compound() => args.to_vec(),
        _ => vec![t.clone()],
    }
}

/// Basic (or marked basic) terms: defined or marked root over constructor terms.
pub fn is_basic(t: &Term) -> bool {
    match t {
        Term::App(f, args) => {
            (f.is_defined() || f.is_marked()) && args.iter().all(Term::is_constructor_term)
        }
        Term::Var(_) => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplacementMap {
    /// Every argument position of every symbol.
    Full,
    /// Argument positions of compound symbols only.
    CompoundOnly,
    Explicit(BTreeMap<Symbol, BTreeSet<usize>>),
}

impl ReplacementMap {
    pub fn positions(&self, f: &Symbol) -> BTreeSet<usize> {
        match self {
            ReplacementMap::Full => (1..=f.arity).collect(),
            ReplacementMap::CompoundOnly if f.is_compound() => (1..=f.arity).collect(),
            ReplacementMap::CompoundOnly => BTreeSet::new(),
            ReplacementMap::Explicit(m) => m.get(f).cloned().unwrap_or_default(),
        }
    }

    pub fn is_replacing(&self, f: &Symbol, i: usize) -> bool {
        match self {
            ReplacementMap::Full => 1 <= i && i <= f.arity,
            ReplacementMap::CompoundOnly => f.is_compound() && 1 <= i && i <= f.arity,
            ReplacementMap::Explicit(m) => m.get(f).is_some_and(|s| s.contains(&i)),
        }
    }
}

/// The μ-replacing positions of `t`.
pub fn mu_positions(mu: &ReplacementMap, t: &Term) -> BTreeSet<Position> {
    let mut out = BTreeSet::new();
    let mut prefix = Vec::new();
    collect_mu(mu, t, &mut prefix, &mut out);
    out
}

fn collect_mu(mu: &ReplacementMap, t: &Term, prefix: &mut Position, out: &mut BTreeSet<Position>) {
    out.insert(prefix.clone());
    if let Term::App(f, args) = t {
        for (i, a) in args.iter().enumerate() {
            if mu.is_replacing(f, i + 1) {
                prefix.push(i + 1);
                collect_mu(mu, a, prefix, out);
                prefix.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> Term {
        Term::constant(Symbol::constructor("0", 0))
    }
    fn s(t: Term) -> Term {
        Term::app(Symbol::constructor("s", 1), vec![t])
    }
    fn plus(a: Term, b: Term) -> Term {
        Term::app(Symbol::defined("+", 2), vec![a, b])
    }
    fn times(a: Term, b: Term) -> Term {
        Term::app(Symbol::defined("*", 2), vec![a, b])
    }
    fn x() -> Term {
        Term::var("x")
    }
    fn y() -> Term {
        Term::var("y")
    }

    #[test]
    fn subterm_positions() {
        let t = plus(s(zero()), y());
        assert_eq!(t.subterm_at(&[1]).unwrap(), &s(zero()));
        assert_eq!(x().subterm_at(&[]).unwrap(), &x());
        assert_eq!(
            plus(zero(), y()).subterm_at(&[1, 1]),
            Err(TermError::InvalidPosition(vec![1, 1]))
        );
        assert!(t.subterm_at(&[0]).is_err());
        assert!(t.subterm_at(&[3]).is_err());
    }

    #[test]
    fn matching() {
        let sigma = match_term(&plus(x(), y()), &plus(zero(), s(zero()))).unwrap();
        assert_eq!(sigma.get("x"), Some(&zero()));
        assert_eq!(sigma.get("y"), Some(&s(zero())));
        assert!(match_term(&plus(zero(), y()), &plus(s(zero()), zero())).is_none());
        let f = Symbol::defined("f", 2);
        let nonlinear = Term::app(f.clone(), vec![x(), x()]);
        assert!(match_term(&nonlinear, &Term::app(f, vec![zero(), s(zero())])).is_none());
    }

    #[test]
    fn unification() {
        let z = Term::var("z");
        let w = Term::var("w");
        let sigma = unify_terms(&mark(&plus(x(), y())), &mark(&plus(s(z.clone()), w.clone()))).unwrap();
        assert_eq!(sigma.apply(&x()), s(z));
        assert_eq!(sigma.apply(&y()), sigma.apply(&w));
        assert!(unify_terms(&mark(&times(zero(), y())), &mark(&times(s(x()), y()))).is_none());
        assert!(unify_terms(&x(), &s(x())).is_none());
    }

    #[test]
    fn marking_and_compounds() {
        let t = plus(s(x()), y());
        let m = mark(&t);
        assert_eq!(m.root().unwrap().kind, SymbolKind::Marked);
        assert_eq!(m.to_string(), "+#(s(x),y)");
        assert_eq!(mark(&s(zero())), s(zero()));
        assert_eq!(mark(&x()), x());
        assert_eq!(unmark(&m), t);
        assert_eq!(com(vec![t.clone()]), t);
        assert_eq!(com(vec![]).to_string(), "c_0");
        assert_eq!(com(vec![x(), y()]).to_string(), "c_2(x,y)");
    }

    #[test]
    fn basic_terms() {
        assert!(is_basic(&times(s(x()), y())));
        assert!(!is_basic(&plus(y(), times(x(), y()))));
        assert!(!is_basic(&s(zero())));
        assert!(is_basic(&mark(&times(s(x()), y()))));
    }

    #[test]
    fn replacing_positions() {
        let mut m = BTreeMap::new();
        m.insert(Symbol::defined("+", 2), BTreeSet::from([2]));
        let mu = ReplacementMap::Explicit(m);
        let t = plus(s(zero()), times(zero(), s(zero())));
        assert_eq!(mu_positions(&mu, &t), BTreeSet::from([vec![], vec![2]]));
        assert_eq!(
            mu_positions(&ReplacementMap::Full, &plus(zero(), zero())),
            BTreeSet::from([vec![], vec![1], vec![2]])
        );
        assert_eq!(mu_positions(&ReplacementMap::CompoundOnly, &x()), BTreeSet::from([vec![]]));
    }

    #[test]
    fn infix_printing() {
        let infix: BTreeSet<String> = ["+".to_string(), "*".to_string()].into();
        let t = plus(y(), times(x(), y()));
        assert_eq!(t.display_with(&infix).to_string(), "y + (x * y)");
        assert_eq!(mark(&t).display_with(&infix).to_string(), "y +# (x * y)");
        assert_eq!(t.to_string(), "+(y,*(x,y))");
    }

    #[test]
    fn replace_and_positions() {
        let t = plus(s(zero()), y());
        assert_eq!(t.positions(), vec![vec![], vec![1], vec![1, 1], vec![2]]);
        assert_eq!(t.replace_at(&[1, 1], x()).unwrap(), plus(s(x()), y()));
        assert!(t.replace_at(&[2, 1], x()).is_err());
    }
}

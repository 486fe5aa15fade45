//! Q-restricted and relative rewriting, plus a brute-force derivation-height
//! oracle used to cross-check the framework on small inputs.

use crate::framework::{Problem, StartTerms};
use crate::term::{match_term, Position, Symbol, Term};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Rule {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Rule { lhs, rhs, label: None }
    }

    pub fn labeled(lhs: Term, rhs: Term, label: &str) -> Self {
        Rule { lhs, rhs, label: Some(label.to_string()) }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or("?")
    }

    /// Dependency pairs are exactly the rules with a marked left-hand side root.
    pub fn is_dp(&self) -> bool {
        self.lhs.root().is_some_and(Symbol::is_marked)
    }

    /// `lhs` is not a variable and `vars(rhs) ⊆ vars(lhs)`.
    pub fn is_well_formed(&self) -> bool {
        !self.lhs.is_var() && self.rhs.vars().is_subset(&self.lhs.vars())
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut s = self.lhs.symbols();
        s.extend(self.rhs.symbols());
        s
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.label(), self.lhs, self.rhs)
    }
}

/// An ordered, finite rewrite system.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trs {
    pub rules: Vec<Rule>,
}

impl Trs {
    pub fn new(rules: Vec<Rule>) -> Self {
        Trs { rules }
    }

    pub fn empty() -> Self {
        Trs::default()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rule> {
        self.rules.iter()
    }

    pub fn contains(&self, r: &Rule) -> bool {
        self.rules.contains(r)
    }

    pub fn union(&self, other: &Trs) -> Trs {
        let mut rules = self.rules.clone();
        for r in &other.rules {
            if !rules.contains(r) {
                rules.push(r.clone());
            }
        }
        Trs { rules }
    }

    pub fn by_label(&self, label: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.label.as_deref() == Some(label))
    }

    pub fn dps(&self) -> Vec<Rule> {
        self.rules.iter().filter(|r| r.is_dp()).cloned().collect()
    }

    pub fn non_dps(&self) -> Vec<Rule> {
        self.rules.iter().filter(|r| !r.is_dp()).cloned().collect()
    }
}

impl FromIterator<Rule> for Trs {
    fn from_iter<I: IntoIterator<Item = Rule>>(iter: I) -> Self {
        Trs { rules: iter.into_iter().collect() }
    }
}

impl<'a> IntoIterator for &'a Trs {
    type Item = &'a Rule;
    type IntoIter = std::slice::Iter<'a, Rule>;
    fn into_iter(self) -> Self::IntoIter {
        self.rules.iter()
    }
}

/// No rule of `q` matches any subterm of `t`.
pub fn is_q_normal_form(t: &Term, q: &Trs) -> bool {
    if q.is_empty() {
        return true;
    }
    match t {
        Term::Var(_) => true,
        Term::App(_, args) => {
            args.iter().all(|a| is_q_normal_form(a, q))
                && !q.iter().any(|r| match_term(&r.lhs, t).is_some())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub position: Position,
    pub rule: Rule,
    pub result: Term,
}

/// All one-step `→_{Q,R}` reducts of `t`, positions in leftmost-outermost
/// order and rules in input order.
pub fn q_successors(t: &Term, r: &Trs, q: &Trs) -> Vec<Step> {
    let mut out = Vec::new();
    let mut nf_cache: HashMap<&Term, bool> = HashMap::new();
    for (pos, sub) in t.subterms() {
        if sub.is_var() {
            continue;
        }
        let mut args_nf = None;
        for rule in r {
            let Some(sigma) = match_term(&rule.lhs, sub) else { continue };
            let nf = *args_nf.get_or_insert_with(|| {
                sub.args().iter().all(|a| {
                    *nf_cache.entry(a).or_insert_with(|| is_q_normal_form(a, q))
                })
            });
            if !nf {
                continue;
            }
            let contractum = sigma.apply(&rule.rhs);
            let result = t.replace_at(&pos, contractum).expect("position of a subterm");
            out.push(Step { position: pos.clone(), rule: rule.clone(), result });
        }
    }
    out
}

/// Outcome of the exhaustive search. `Exact(n)`: every derivation was
/// explored and the maximum is `n`. `AtLeast(b)`: the search hit its budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleResult {
    Exact(usize),
    AtLeast(usize),
}

impl OracleResult {
    pub fn exact(self) -> Option<usize> {
        match self {
            OracleResult::Exact(n) => Some(n),
            OracleResult::AtLeast(_) => None,
        }
    }

    /// A lower bound that is certainly attained.
    pub fn lower_bound(self) -> usize {
        match self {
            OracleResult::Exact(n) | OracleResult::AtLeast(n) => n,
        }
    }

    pub fn max(self, other: OracleResult) -> OracleResult {
        use OracleResult::*;
        match (self, other) {
            (Exact(a), Exact(b)) => Exact(a.max(b)),
            (AtLeast(a), AtLeast(b)) => AtLeast(a.max(b)),
            (AtLeast(a), Exact(_)) | (Exact(_), AtLeast(a)) => AtLeast(a),
        }
    }
}

impl fmt::Display for OracleResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleResult::Exact(n) => write!(f, "{n}"),
            OracleResult::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

struct Truncated;

/// Memoised longest-derivation search over `→_{Q,S∪W}`.
struct Explorer<'a> {
    strict: &'a Trs,
    all: Trs,
    q: &'a Trs,
    budget: usize,
    // (longest derivation, most strict steps) from a term
    memo: HashMap<Term, (usize, usize)>,
    on_stack: HashSet<Term>,
}

impl<'a> Explorer<'a> {
    fn new(strict: &'a Trs, weak: &Trs, q: &'a Trs, budget: usize) -> Self {
        Explorer {
            strict,
            all: strict.union(weak),
            q,
            budget,
            memo: HashMap::new(),
            on_stack: HashSet::new(),
        }
    }

    fn explore(&mut self, t: &Term, depth: usize) -> Result<(usize, usize), Truncated> {
        if let Some(&(len, strict)) = self.memo.get(t) {
            return if depth + len > self.budget {
                Err(Truncated)
            } else {
                Ok((len, strict))
            };
        }
        // a repeated term on the current branch means an infinite derivation
        if self.on_stack.contains(t) {
            return Err(Truncated);
        }
        let steps = q_successors(t, &self.all, self.q);
        if steps.is_empty() {
            self.memo.insert(t.clone(), (0, 0));
            return Ok((0, 0));
        }
        if depth >= self.budget {
            return Err(Truncated);
        }
        self.on_stack.insert(t.clone());
        let mut best = (0, 0);
        let mut seen = HashSet::new();
        for step in steps {
            let counts = usize::from(self.strict.contains(&step.rule));
            if !seen.insert((step.result.clone(), counts)) {
                continue;
            }
            let res = self.explore(&step.result, depth + 1);
            let (len, strict) = match res {
                Ok(v) => v,
                Err(e) => {
                    self.on_stack.remove(t);
                    return Err(e);
                }
            };
            best.0 = best.0.max(len + 1);
            best.1 = best.1.max(strict + counts);
        }
        self.on_stack.remove(t);
        self.memo.insert(t.clone(), best);
        Ok(best)
    }
}

/// Derivation height of `t` with respect to `→_{Q,R}`.
pub fn dh_oracle(t: &Term, r: &Trs, q: &Trs, budget: usize) -> OracleResult {
    strict_step_oracle(t, r, &Trs::empty(), q, budget)
}

/// Maximal number of `S` steps over all `→_{Q,S∪W}` derivations from `t`.
/// Any derivation reaching `budget` total steps truncates the search.
pub fn strict_step_oracle(t: &Term, s: &Trs, w: &Trs, q: &Trs, budget: usize) -> OracleResult {
    let mut ex = Explorer::new(s, w, q, budget);
    match ex.explore(t, 0) {
        Ok((_, strict)) => OracleResult::Exact(strict),
        Err(Truncated) => OracleResult::AtLeast(budget),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("start-term enumeration exceeded {0} terms")]
    TooLarge(usize),
}

/// Default cap on the number of enumerated start terms.
pub const START_TERM_CAP: usize = 200_000;

/// Start terms of `problem` of size at most `n`, in a deterministic order.
/// Basic start terms are enumerated ground (constructor-ground arguments).
pub fn enumerate_start_terms(problem: &Problem, n: usize, cap: usize) -> Result<Vec<Term>, OracleError> {
    let sig = &problem.signature;
    let mut out = Vec::new();
    match &problem.start {
        StartTerms::Explicit(ts) => {
            out.extend(ts.iter().filter(|t| t.size() <= n).cloned());
        }
        StartTerms::BasicTerms | StartTerms::MarkedBasicTerms => {
            let marked = matches!(problem.start, StartTerms::MarkedBasicTerms);
            let cons: Vec<Symbol> = sig.constructors.iter().cloned().collect();
            let mut gen = GroundGen::new(cons, cap);
            for f in &sig.defined {
                let root = if marked { f.marked().expect("defined") } else { f.clone() };
                for k in 1..=n {
                    let args = gen.tuples(f.arity, k - 1)?;
                    for a in args {
                        out.push(Term::app(root.clone(), a));
                        if out.len() > cap {
                            return Err(OracleError::TooLarge(cap));
                        }
                    }
                }
            }
        }
        StartTerms::AllTerms => {
            let mut syms: Vec<Symbol> = sig.constructors.iter().cloned().collect();
            syms.extend(sig.defined.iter().cloned());
            let mut gen = GroundGen::new(syms, cap);
            for k in 1..=n {
                out.extend(gen.of_size(k)?);
                if out.len() > cap {
                    return Err(OracleError::TooLarge(cap));
                }
            }
        }
    }
    Ok(out)
}

/// Ground terms over a fixed symbol set, by exact size.
struct GroundGen {
    symbols: Vec<Symbol>,
    by_size: HashMap<usize, Vec<Term>>,
    cap: usize,
}

impl GroundGen {
    fn new(symbols: Vec<Symbol>, cap: usize) -> Self {
        GroundGen { symbols, by_size: HashMap::new(), cap }
    }

    fn of_size(&mut self, k: usize) -> Result<Vec<Term>, OracleError> {
        if let Some(v) = self.by_size.get(&k) {
            return Ok(v.clone());
        }
        let mut out = Vec::new();
        if k >= 1 {
            for f in self.symbols.clone() {
                for args in self.tuples(f.arity, k - 1)? {
                    out.push(Term::app(f.clone(), args));
                    if out.len() > self.cap {
                        return Err(OracleError::TooLarge(self.cap));
                    }
                }
            }
        }
        self.by_size.insert(k, out.clone());
        Ok(out)
    }

    /// Tuples of `arity` ground terms whose sizes add up to exactly `total`.
    fn tuples(&mut self, arity: usize, total: usize) -> Result<Vec<Vec<Term>>, OracleError> {
        if arity == 0 {
            return Ok(if total == 0 { vec![vec![]] } else { vec![] });
        }
        let mut out = Vec::new();
        for first in 1..=total {
            let heads = self.of_size(first)?;
            if heads.is_empty() {
                continue;
            }
            let tails = self.tuples(arity - 1, total - first)?;
            for h in &heads {
                for tail in &tails {
                    let mut v = Vec::with_capacity(arity);
                    v.push(h.clone());
                    v.extend(tail.iter().cloned());
                    out.push(v);
                    if out.len() > self.cap {
                        return Err(OracleError::TooLarge(self.cap));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `cc_P(n)`: the maximum of the strict-step oracle over all start terms of size ≤ n.
pub fn cc_oracle(problem: &Problem, n: usize, budget: usize) -> Result<OracleResult, OracleError> {
    let starts = enumerate_start_terms(problem, n, START_TERM_CAP)?;
    let mut best = OracleResult::Exact(0);
    if problem.strict.is_empty() {
        return Ok(best);
    }
    for t in &starts {
        best = best.max(strict_step_oracle(t, &problem.strict, &problem.weak, &problem.q, budget));
        if let OracleResult::AtLeast(_) = best {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{mult, rs_mult};
    use crate::parse::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s, &mult().signature, &["x", "y", "z"]).unwrap()
    }

    #[test]
    fn normal_forms() {
        let r = rs_mult();
        assert!(is_q_normal_form(&t("s(0)"), &r));
        assert!(!is_q_normal_form(&t("+(0,0)"), &r));
        assert!(is_q_normal_form(&t("+(0,0)"), &Trs::empty()));
    }

    #[test]
    fn innermost_successors() {
        let r = rs_mult();
        let steps = q_successors(&t("*(s(0),s(0))"), &r, &r);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].position, Vec::<usize>::new());
        assert_eq!(steps[0].rule.label(), "d");
        assert_eq!(steps[0].result, t("+(s(0),*(0,s(0)))"));

        let steps = q_successors(&t("+(s(0),*(0,s(0)))"), &r, &r);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].position, vec![2]);
        assert_eq!(steps[0].rule.label(), "c");
        assert_eq!(steps[0].result, t("+(s(0),0)"));

        // without Q the outer + redex is blocked only by its pattern, not by Q
        let full = q_successors(&t("+(s(0),*(0,s(0)))"), &r, &Trs::empty());
        assert_eq!(full.len(), 2);
        assert_eq!(full[0].rule.label(), "b");
    }

    #[test]
    fn derivation_heights() {
        let r = rs_mult();
        assert_eq!(dh_oracle(&t("+(s(0),0)"), &r, &r, 10), OracleResult::Exact(2));
        assert_eq!(dh_oracle(&t("*(s(0),s(0))"), &r, &r, 10), OracleResult::Exact(4));
        assert_eq!(dh_oracle(&t("0"), &r, &r, 10), OracleResult::Exact(0));
        assert_eq!(dh_oracle(&t("*(s(0),s(0))"), &r, &r, 3), OracleResult::AtLeast(3));
        assert_eq!(dh_oracle(&t("*(s(0),s(0))"), &r, &r, 4), OracleResult::Exact(4));
    }

    #[test]
    fn undefined_complexity_is_truncated() {
        let (s1, w1, sig) = crate::fixtures::kleene_counterexample();
        let vars = ["x"];
        let g = parse_term("g(s(s(bot)))", &sig, &vars).unwrap();
        assert_eq!(strict_step_oracle(&g, &s1, &w1, &Trs::empty(), 20), OracleResult::Exact(2));
        let f = parse_term("f(bot)", &sig, &vars).unwrap();
        for b in 0..=12 {
            assert_eq!(strict_step_oracle(&f, &s1, &w1, &Trs::empty(), b), OracleResult::AtLeast(b));
        }
        assert_eq!(strict_step_oracle(&f, &Trs::empty(), &w1, &Trs::empty(), 0), OracleResult::AtLeast(0));
    }

    #[test]
    fn no_strict_rules_means_zero() {
        let r = rs_mult();
        assert_eq!(
            strict_step_oracle(&t("*(s(0),s(0))"), &Trs::empty(), &r, &r, 10),
            OracleResult::Exact(0)
        );
    }

    #[test]
    fn complexity_function() {
        let p = mult();
        assert_eq!(cc_oracle(&p, 1, 50), Ok(OracleResult::Exact(0)));
        let v3 = cc_oracle(&p, 3, 50).unwrap().exact().unwrap();
        assert!(v3 >= 1);
        let empty = Problem { strict: Trs::empty(), ..mult() };
        assert_eq!(cc_oracle(&empty, 5, 10), Ok(OracleResult::Exact(0)));
    }

    #[test]
    fn start_term_enumeration() {
        let p = mult();
        let ts = enumerate_start_terms(&p, 3, START_TERM_CAP).unwrap();
        // +(0,0) and *(0,0)
        assert_eq!(ts.len(), 2);
        let ts = enumerate_start_terms(&p, 4, START_TERM_CAP).unwrap();
        assert_eq!(ts.len(), 6);
        assert!(ts.iter().all(|t| crate::term::is_basic(t) && t.is_ground()));
        assert_eq!(enumerate_start_terms(&p, 9, 3), Err(OracleError::TooLarge(3)));
    }
}

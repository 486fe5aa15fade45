//! Weak dependency pairs, dependency tuples and derivation trees.

use crate::framework::{Problem, StartTerms};
use crate::rewrite::{q_successors, Rule, Trs};
use crate::term::{com, mark, Term};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DpError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

fn dp_label(r: &Rule) -> Option<String> {
    r.label.as_ref().map(|l| format!("{l}#"))
}

/// Subterms below the maximal constructor context, left to right.
fn wdp_components(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::App(f, args) if f.is_constructor() => args.iter().for_each(|a| wdp_components(a, out)),
        _ => out.push(t.clone()),
    }
}

/// `l → C[r1..rn]` with `C` the maximal constructor context becomes
/// `l# → com(r1#..rn#)`.
pub fn wdp(rule: &Rule) -> Rule {
    let mut comps = Vec::new();
    wdp_components(&rule.rhs, &mut comps);
    Rule { lhs: mark(&rule.lhs), rhs: com(comps.iter().map(mark).collect()), label: dp_label(rule) }
}

/// `l# → com(r1#..rn#)` over all defined-rooted subterms of the rhs, in pre-order.
pub fn dt(rule: &Rule) -> Rule {
    let comps: Vec<Term> = rule
        .rhs
        .subterms()
        .into_iter()
        .filter(|(_, s)| s.root().is_some_and(|f| f.is_defined()))
        .map(|(_, s)| mark(s))
        .collect();
    Rule { lhs: mark(&rule.lhs), rhs: com(comps), label: dp_label(rule) }
}

fn check_dp_source(p: &Problem) -> Result<(), DpError> {
    if p.start != StartTerms::BasicTerms {
        return Err(DpError::NotApplicable("start terms are not basic terms".into()));
    }
    for r in p.strict.iter().chain(p.weak.iter()) {
        if r.lhs.contains_marked() || r.rhs.contains_marked() || r.lhs.contains_compound() || r.rhs.contains_compound() {
            return Err(DpError::NotApplicable(format!("rule {} already uses marked or compound symbols", r.label())));
        }
        let root = r.lhs.root().expect("lhs is not a variable");
        if !p.signature.defined.contains(root) {
            return Err(DpError::NotApplicable(format!("lhs root of {} is not a defined symbol", r.label())));
        }
    }
    Ok(())
}

/// ⟨WDP(S) ∪ S / WDP(W) ∪ W, Q, T#⟩.
pub fn wdp_problem(p: &Problem) -> Result<Problem, DpError> {
    check_dp_source(p)?;
    let strict: Trs = p.strict.iter().map(wdp).chain(p.strict.iter().cloned()).collect();
    let weak: Trs = p.weak.iter().map(wdp).chain(p.weak.iter().cloned()).collect();
    Ok(Problem {
        strict,
        weak,
        q: p.q.clone(),
        start: StartTerms::MarkedBasicTerms,
        signature: p.signature.clone(),
    })
}

/// ⟨DT(S) / DT(W) ∪ S ∪ W, Q, T#⟩ for innermost problems.
pub fn dt_problem(p: &Problem) -> Result<Problem, DpError> {
    check_dp_source(p)?;
    if !p.is_innermost() {
        return Err(DpError::NotApplicable("problem is not innermost".into()));
    }
    let strict: Trs = p.strict.iter().map(dt).collect();
    let weak: Trs = p
        .weak
        .iter()
        .map(dt)
        .chain(p.strict.iter().cloned())
        .chain(p.weak.iter().cloned())
        .collect();
    Ok(Problem {
        strict,
        weak,
        q: p.q.clone(),
        start: StartTerms::MarkedBasicTerms,
        signature: p.signature.clone(),
    })
}

/// A derivation tree: each internal node records the rule whose application
/// produced `com` of its children's labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DerivationTree {
    pub label: Term,
    pub rule: Option<Rule>,
    pub children: Vec<Arc<DerivationTree>>,
}

impl DerivationTree {
    pub fn leaf(label: Term) -> Self {
        DerivationTree { label, rule: None, children: Vec::new() }
    }

    pub fn is_leaf(&self) -> bool {
        self.rule.is_none()
    }

    /// Number of rule applications (edges).
    pub fn edges(&self) -> usize {
        self.rule.iter().count() + self.children.iter().map(|c| c.edges()).sum::<usize>()
    }

    /// All node labels in pre-order.
    pub fn labels(&self) -> Vec<&Term> {
        let mut out = vec![&self.label];
        for c in &self.children {
            out.extend(c.labels());
        }
        out
    }

    /// Root-to-leaf rule sequences.
    pub fn rule_paths(&self) -> Vec<Vec<&Rule>> {
        let Some(rule) = &self.rule else { return vec![vec![]] };
        if self.children.is_empty() {
            return vec![vec![rule]];
        }
        let mut out = Vec::new();
        for c in &self.children {
            for mut path in c.rule_paths() {
                path.insert(0, rule);
                out.push(path);
            }
        }
        out
    }

    fn fmt_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{:indent$}{}", "", self.label, indent = 2 * depth)?;
        if let Some(r) = &self.rule {
            writeln!(f, "{:indent$}-- {}", "", r.label(), indent = 2 * depth + 1)?;
        }
        for c in &self.children {
            c.fmt_indented(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_indented(f, 0)
    }
}

/// Splits the result of a step into child labels: `com(t1..tn)` gives the
/// `ti`; any other term is a single child.
fn child_labels(t: &Term) -> Vec<Term> {
    match t {
        Term::App(f, args) if f.is_compound() && args.len() != 1 => args.to_vec(),
        _ => vec![t.clone()],
    }
}

#[derive(Debug, Clone)]
pub struct TreeEnumeration {
    pub trees: Vec<Arc<DerivationTree>>,
    /// Some tree could be extended beyond the edge budget.
    pub truncated: bool,
}

type TreeMemo = HashMap<(Term, usize), Arc<Vec<Arc<DerivationTree>>>>;

/// Root steps of a term: the rule used and the resulting successor arguments.
type RootSteps = Arc<Vec<(Rule, Vec<Term>)>>;

struct TreeEnumerator<'a> {
    rules: Trs,
    q: &'a Trs,
    steps: HashMap<Term, RootSteps>,
    exact: TreeMemo,
    exists: HashMap<(Term, usize), bool>,
}

impl<'a> TreeEnumerator<'a> {
    fn new(p: &'a Problem) -> Self {
        TreeEnumerator {
            rules: p.all_rules(),
            q: &p.q,
            steps: HashMap::new(),
            exact: HashMap::new(),
            exists: HashMap::new(),
        }
    }

    /// Distinct (rule, children) pairs for one-step reducts of `t`.
    fn steps(&mut self, t: &Term) -> Arc<Vec<(Rule, Vec<Term>)>> {
        if let Some(s) = self.steps.get(t) {
            return s.clone();
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for step in q_successors(t, &self.rules, self.q) {
            if seen.insert((step.rule.clone(), step.result.clone())) {
                out.push((step.rule, child_labels(&step.result)));
            }
        }
        let out = Arc::new(out);
        self.steps.insert(t.clone(), out.clone());
        out
    }

    /// Trees of `t` with exactly `e` edges.
    fn exact(&mut self, t: &Term, e: usize) -> Arc<Vec<Arc<DerivationTree>>> {
        let key = (t.clone(), e);
        if let Some(v) = self.exact.get(&key) {
            return v.clone();
        }
        let mut out = Vec::new();
        if e == 0 {
            out.push(Arc::new(DerivationTree::leaf(t.clone())));
        } else {
            for (rule, kids) in self.steps(t).iter() {
                for split in compositions(e - 1, kids.len()) {
                    let mut choices = Vec::with_capacity(kids.len());
                    let mut empty = false;
                    for (k, &ek) in kids.iter().zip(&split) {
                        let c = self.exact(k, ek);
                        if c.is_empty() {
                            empty = true;
                            break;
                        }
                        choices.push(c);
                    }
                    if empty {
                        continue;
                    }
                    for combo in cartesian(&choices) {
                        out.push(Arc::new(DerivationTree {
                            label: t.clone(),
                            rule: Some(rule.clone()),
                            children: combo,
                        }));
                    }
                }
            }
        }
        let out = Arc::new(out);
        self.exact.insert(key, out.clone());
        out
    }

    /// Whether some tree of `t` has exactly `e` edges.
    fn exists(&mut self, t: &Term, e: usize) -> bool {
        if e == 0 {
            return true;
        }
        let key = (t.clone(), e);
        if let Some(&b) = self.exists.get(&key) {
            return b;
        }
        let mut found = false;
        'outer: for (_, kids) in self.steps(t).iter() {
            for split in compositions(e - 1, kids.len()) {
                if kids.iter().zip(&split).all(|(k, &ek)| self.exists(k, ek)) {
                    found = true;
                    break 'outer;
                }
            }
        }
        self.exists.insert(key, found);
        found
    }
}

/// All ways to write `total` as an ordered sum of `parts` naturals.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn cartesian<T: Clone>(choices: &[Arc<Vec<T>>]) -> Vec<Vec<T>> {
    let mut acc: Vec<Vec<T>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(acc.len() * c.len());
        for prefix in &acc {
            for x in c.iter() {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// All derivation trees of `t` with at most `budget` edges, ordered by edge
/// count and then by step order.
pub fn enumerate_derivation_trees(p: &Problem, t: &Term, budget: usize) -> TreeEnumeration {
    let mut en = TreeEnumerator::new(p);
    let mut trees = Vec::new();
    for e in 0..=budget {
        trees.extend(en.exact(t, e).iter().cloned());
    }
    let truncated = en.exists(t, budget + 1);
    TreeEnumeration { trees, truncated }
}

/// Number of edges labelled by a rule of `rules`.
pub fn tree_size_restricted(tr: &DerivationTree, rules: &[Rule]) -> usize {
    let here = tr.rule.as_ref().is_some_and(|r| rules.contains(r)) as usize;
    here + tr.children.iter().map(|c| tree_size_restricted(c, rules)).sum::<usize>()
}

/// Drops every edge not labelled by `rules`, keeping the part reachable from the root.
pub fn trim(tr: &DerivationTree, rules: &[Rule]) -> DerivationTree {
    match &tr.rule {
        Some(r) if rules.contains(r) => DerivationTree {
            label: tr.label.clone(),
            rule: Some(r.clone()),
            children: tr.children.iter().map(|c| Arc::new(trim(c, rules))).collect(),
        },
        _ => DerivationTree::leaf(tr.label.clone()),
    }
}

/// Whether every edge of `tr` is a legal step of `p`.
pub fn is_derivation_tree_of(tr: &DerivationTree, p: &Problem) -> bool {
    let Some(rule) = &tr.rule else { return true };
    let kids: Vec<Term> = tr.children.iter().map(|c| c.label.clone()).collect();
    let rules = Trs::new(vec![rule.clone()]);
    let ok = q_successors(&tr.label, &rules, &p.q)
        .iter()
        .any(|s| child_labels(&s.result) == kids);
    ok && tr.children.iter().all(|c| is_derivation_tree_of(c, p))
}

/// Whether a leaf of the tree is still reducible.
pub fn has_reducible_leaf(tr: &DerivationTree, p: &Problem) -> bool {
    if tr.is_leaf() {
        let all = p.all_rules();
        return !q_successors(&tr.label, &all, &p.q).is_empty();
    }
    tr.children.iter().any(|c| has_reducible_leaf(c, p))
}

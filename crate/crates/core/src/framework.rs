//! Complexity problems, asymptotic bounds, proof trees and the proof checker.

use crate::processors::{apply_processor, Processor};
use crate::rewrite::{Rule, Trs};
use crate::term::{com_components, is_basic, match_term, Symbol, Term};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// The constructor/defined partition of the input signature. Marked and
/// compound symbols are derived and never listed here.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub constructors: BTreeSet<Symbol>,
    pub defined: BTreeSet<Symbol>,
    /// Names of binary symbols rendered infix.
    #[serde(default)]
    pub infix: BTreeSet<String>,
}

impl Signature {
    /// Looks up a constructor or defined symbol by name.
    pub fn lookup(&self, name: &str) -> Option<&Symbol> {
        self.defined
            .iter()
            .chain(self.constructors.iter())
            .find(|s| &*s.name == name)
    }

    /// Partition inferred from rules: lhs roots are defined, the rest constructors.
    pub fn infer(rules: &[&Rule]) -> Signature {
        let mut sig = Signature::default();
        for r in rules {
            if let Some(f) = r.lhs.root() {
                if f.is_defined() {
                    sig.defined.insert(f.clone());
                }
            }
        }
        for r in rules {
            for f in r.symbols() {
                match f.kind {
                    crate::term::SymbolKind::Marked => {
                        sig.defined.insert(f.unmarked());
                    }
                    crate::term::SymbolKind::Compound => {}
                    _ => {
                        if !sig.defined.iter().any(|g| g.name == f.name) {
                            sig.constructors.insert(f);
                        }
                    }
                }
            }
        }
        sig
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StartTerms {
    AllTerms,
    BasicTerms,
    MarkedBasicTerms,
    Explicit(Vec<Term>),
}

impl StartTerms {
    /// Start terms consist of marked basic terms only.
    pub fn is_marked_basic(&self) -> bool {
        match self {
            StartTerms::MarkedBasicTerms => true,
            StartTerms::Explicit(ts) => {
                ts.iter().all(|t| is_basic(t) && t.root().is_some_and(Symbol::is_marked))
            }
            _ => false,
        }
    }
}

impl fmt::Display for StartTerms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartTerms::AllTerms => write!(f, "T"),
            StartTerms::BasicTerms => write!(f, "Tb"),
            StartTerms::MarkedBasicTerms => write!(f, "Tb#"),
            StartTerms::Explicit(ts) => {
                write!(f, "{{")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// A complexity problem ⟨S/W, Q, T⟩.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Problem {
    pub strict: Trs,
    pub weak: Trs,
    pub q: Trs,
    pub start: StartTerms,
    pub signature: Signature,
}

impl Problem {
    pub fn new(strict: Trs, weak: Trs, q: Trs, start: StartTerms, signature: Signature) -> Self {
        Problem { strict, weak, q, start, signature }
    }

    pub fn all_rules(&self) -> Trs {
        self.strict.union(&self.weak)
    }

    pub fn strict_dps(&self) -> Vec<Rule> {
        self.strict.dps()
    }

    pub fn weak_dps(&self) -> Vec<Rule> {
        self.weak.dps()
    }

    /// Dependency pairs of both components, strict ones first.
    pub fn dps(&self) -> Vec<Rule> {
        let mut v = self.strict_dps();
        v.extend(self.weak_dps());
        v
    }

    /// Non-DP rules of both components.
    pub fn non_dp_rules(&self) -> Trs {
        self.strict.non_dps().into_iter().chain(self.weak.non_dps()).collect()
    }

    /// Marked basic start terms and every flagged DP well-formed.
    pub fn is_dp_problem(&self) -> bool {
        self.start.is_marked_basic()
            && self.strict.iter().chain(self.weak.iter()).filter(|r| r.is_dp()).all(is_well_formed_dp)
    }

    /// Sufficient condition for NF(Q) ⊆ NF(S∪W): the unmarked lhs of every
    /// rule is an instance of some lhs of Q.
    pub fn is_innermost(&self) -> bool {
        if self.q.is_empty() {
            return self.strict.is_empty() && self.weak.is_empty();
        }
        self.strict.iter().chain(self.weak.iter()).all(|r| {
            let l = unmark_root(&r.lhs);
            self.q.iter().any(|qr| match_term(&qr.lhs, &l).is_some())
        })
    }

    /// Strict and weak components share no label.
    pub fn labels_disjoint(&self) -> bool {
        let s: BTreeSet<&str> = self.strict.iter().filter_map(|r| r.label.as_deref()).collect();
        self.weak.iter().filter_map(|r| r.label.as_deref()).all(|l| !s.contains(l))
    }

    /// Finds a rule of either component by label.
    pub fn rule(&self, label: &str) -> Option<&Rule> {
        self.strict.by_label(label).or_else(|| self.weak.by_label(label))
    }
}

fn unmark_root(t: &Term) -> Term {
    crate::term::unmark(t)
}

/// Marked lhs, and a rhs that is either compound-rooted over compound-free
/// components or itself compound-free.
pub fn is_well_formed_dp(r: &Rule) -> bool {
    let lhs_ok = r.lhs.root().is_some_and(Symbol::is_marked)
        && r.lhs.args().iter().all(|a| !a.contains_marked() && !a.contains_compound());
    let rhs_ok = match r.rhs.root() {
        Some(f) if f.is_compound() => com_components(&r.rhs).iter().all(|c| !c.contains_compound()),
        _ => !r.rhs.contains_compound(),
    };
    lhs_ok && rhs_ok && r.rhs.vars().is_subset(&r.lhs.vars())
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = |t: &Trs| t.iter().map(|r| r.label().to_string()).collect::<Vec<_>>().join(",");
        write!(
            f,
            "<{{{}}} / {{{}}}, Q={{{}}}, {}>",
            labels(&self.strict),
            labels(&self.weak),
            labels(&self.q),
            self.start
        )
    }
}

/// Asymptotic bound: `Poly(d)` stands for O(n^d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bound {
    Poly(u32),
    Unknown,
}

impl Bound {
    /// Bound of a sum: the larger degree.
    pub fn plus(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Poly(a), Bound::Poly(b)) => Bound::Poly(a.max(b)),
            _ => Bound::Unknown,
        }
    }

    /// Bound of a product: degrees add up.
    pub fn times(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Poly(a), Bound::Poly(b)) => Bound::Poly(a + b),
            _ => Bound::Unknown,
        }
    }

    pub fn degree(self) -> Option<u32> {
        match self {
            Bound::Poly(d) => Some(d),
            Bound::Unknown => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Poly(d) => write!(f, "O(n^{d})"),
            Bound::Unknown => write!(f, "?"),
        }
    }
}

/// How a processor combines the bounds of its sub-problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combinator {
    Identity,
    Sum,
    Product,
    Constant(Bound),
}

impl Combinator {
    /// `None` if the number of premises does not fit the combinator.
    pub fn apply(self, premises: &[Bound]) -> Option<Bound> {
        match self {
            Combinator::Identity => (premises.len() == 1).then(|| premises[0]),
            Combinator::Sum => Some(premises.iter().fold(Bound::Poly(0), |a, &b| a.plus(b))),
            Combinator::Product => Some(premises.iter().fold(Bound::Poly(0), |a, &b| a.times(b))),
            Combinator::Constant(b) => premises.is_empty().then_some(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgement {
    pub problem: Problem,
    pub bound: Bound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofTree {
    /// The `empty` axiom: a problem without strict rules.
    Axiom { conclusion: Judgement },
    /// An open leaf.
    Assumption { conclusion: Judgement, note: String },
    Inference { processor: Processor, conclusion: Judgement, premises: Vec<ProofTree> },
}

impl ProofTree {
    pub fn conclusion(&self) -> &Judgement {
        match self {
            ProofTree::Axiom { conclusion }
            | ProofTree::Assumption { conclusion, .. }
            | ProofTree::Inference { conclusion, .. } => conclusion,
        }
    }

    pub fn bound(&self) -> Bound {
        self.conclusion().bound
    }

    pub fn is_closed(&self) -> bool {
        match self {
            ProofTree::Axiom { .. } => true,
            ProofTree::Assumption { .. } => false,
            ProofTree::Inference { premises, .. } => premises.iter().all(ProofTree::is_closed),
        }
    }

    /// Processor names in pre-order.
    pub fn processors(&self) -> Vec<&Processor> {
        let mut out = Vec::new();
        self.collect_processors(&mut out);
        out
    }

    fn collect_processors<'a>(&'a self, out: &mut Vec<&'a Processor>) {
        if let ProofTree::Inference { processor, premises, .. } = self {
            out.push(processor);
            for p in premises {
                p.collect_processors(out);
            }
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("open assumption at {path}: {note}")]
    OpenAssumption { path: String, note: String },
    #[error("axiom at {path} has a non-empty strict component")]
    BadAxiom { path: String },
    #[error("inference {processor} at {path}: {reason}")]
    BadInference { path: String, processor: String, reason: String },
}

/// Re-applies every recorded processor and compares the outcome with the
/// recorded premises and bounds. Paths name nodes as `root.i.j`.
pub fn validate_proof(pt: &ProofTree) -> Result<(), ValidationError> {
    validate_at(pt, "root")
}

fn validate_at(pt: &ProofTree, path: &str) -> Result<(), ValidationError> {
    match pt {
        ProofTree::Axiom { conclusion } => {
            if conclusion.problem.strict.is_empty() {
                Ok(())
            } else {
                Err(ValidationError::BadAxiom { path: path.to_string() })
            }
        }
        ProofTree::Assumption { note, .. } => {
            Err(ValidationError::OpenAssumption { path: path.to_string(), note: note.clone() })
        }
        ProofTree::Inference { processor, conclusion, premises } => {
            let fail = |reason: String| ValidationError::BadInference {
                path: path.to_string(),
                processor: processor.name().to_string(),
                reason,
            };
            let (subs, comb) = apply_processor(processor, &conclusion.problem)
                .ok_or_else(|| fail("processor not applicable with the recorded parameters".into()))?;
            if subs.len() != premises.len() {
                return Err(fail(format!(
                    "expected {} premises, proof records {}",
                    subs.len(),
                    premises.len()
                )));
            }
            for (i, (sub, prem)) in subs.iter().zip(premises).enumerate() {
                if sub != &prem.conclusion().problem {
                    return Err(fail(format!(
                        "premise {} differs from the generated sub-problem {}",
                        i + 1,
                        sub
                    )));
                }
            }
            let bounds: Vec<Bound> = premises.iter().map(ProofTree::bound).collect();
            let expected = comb
                .apply(&bounds)
                .ok_or_else(|| fail("combinator does not fit the premises".into()))?;
            if expected != conclusion.bound {
                return Err(fail(format!(
                    "conclusion bound {} but premises give {}",
                    conclusion.bound, expected
                )));
            }
            for (i, prem) in premises.iter().enumerate() {
                validate_at(prem, &format!("{path}.{}", i + 1))?;
            }
            Ok(())
        }
    }
}

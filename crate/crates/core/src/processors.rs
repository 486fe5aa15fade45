//! Processors as side-condition-checked inference steps, and the default
//! proof search.

use crate::depgraph::{estimate_dg, sep};
use crate::dp::{dt_problem, wdp_problem};
use crate::framework::{Bound, Combinator, Judgement, Problem, ProofTree, StartTerms};
use crate::interp::{strictly_oriented, synthesize_with, verify_pair, Interpretation, SearchLimits};
use crate::rewrite::{Rule, Trs};
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Processor {
    Empty,
    ComplexityPair { interpretation: Interpretation },
    Decompose { s1: Vec<String> },
    Wdp,
    Dt,
    PredecessorEstimation { s1: Vec<String> },
    RemoveWeakSuffix { w1: Vec<String> },
    DgDecomposition { s_down: Vec<String>, w_down: Vec<String> },
}

impl Processor {
    pub fn name(&self) -> &'static str {
        match self {
            Processor::Empty => "Empty",
            Processor::ComplexityPair { .. } => "ComplexityPair",
            Processor::Decompose { .. } => "Decompose",
            Processor::Wdp => "WDP",
            Processor::Dt => "DT",
            Processor::PredecessorEstimation { .. } => "PredecessorEstimation",
            Processor::RemoveWeakSuffix { .. } => "RemoveWeakSuffix",
            Processor::DgDecomposition { .. } => "DGDecomposition",
        }
    }

    /// Whether the processor is also complete (recorded, not used by search).
    pub fn is_complete(&self) -> bool {
        !matches!(self, Processor::ComplexityPair { .. } | Processor::Decompose { .. })
    }
}

fn labels(rules: &[Rule]) -> Vec<String> {
    rules.iter().map(|r| r.label().to_string()).collect()
}

/// Resolves labels against `rules`; `None` on unknown or repeated labels.
fn select(rules: &Trs, wanted: &[String]) -> Option<Vec<Rule>> {
    let set: BTreeSet<&str> = wanted.iter().map(String::as_str).collect();
    if set.len() != wanted.len() {
        return None;
    }
    let picked: Vec<Rule> = rules.iter().filter(|r| set.contains(r.label())).cloned().collect();
    (picked.len() == wanted.len()).then_some(picked)
}

fn with_rules(p: &Problem, strict: Vec<Rule>, weak: Vec<Rule>) -> Problem {
    Problem { strict: Trs::new(strict), weak: Trs::new(weak), ..p.clone() }
}

/// Applies a processor. `None` if its side conditions fail.
pub fn apply_processor(proc: &Processor, p: &Problem) -> Option<(Vec<Problem>, Combinator)> {
    match proc {
        Processor::Empty => p.strict.is_empty().then_some((Vec::new(), Combinator::Constant(Bound::Poly(0)))),
        Processor::ComplexityPair { interpretation } => match verify_pair(interpretation, p)? {
            Bound::Unknown => None,
            b => Some((Vec::new(), Combinator::Constant(b))),
        },
        Processor::Decompose { s1 } => {
            let s1 = select(&p.strict, s1)?;
            if s1.is_empty() || s1.len() == p.strict.len() {
                return None;
            }
            let s2: Vec<Rule> = p.strict.iter().filter(|r| !s1.contains(r)).cloned().collect();
            let p1 = with_rules(p, s1.clone(), s2.iter().chain(p.weak.iter()).cloned().collect());
            let p2 = with_rules(p, s2, s1.into_iter().chain(p.weak.iter().cloned()).collect());
            Some((vec![p1, p2], Combinator::Sum))
        }
        Processor::Wdp => Some((vec![wdp_problem(p).ok()?], Combinator::Identity)),
        Processor::Dt => Some((vec![dt_problem(p).ok()?], Combinator::Identity)),
        Processor::PredecessorEstimation { s1 } => predecessor_estimation(p, s1),
        Processor::RemoveWeakSuffix { w1 } => remove_weak_suffix(p, w1),
        Processor::DgDecomposition { s_down, w_down } => dg_decomposition(p, s_down, w_down),
    }
}

fn predecessor_estimation(p: &Problem, s1: &[String]) -> Option<(Vec<Problem>, Combinator)> {
    if !p.is_dp_problem() || s1.is_empty() {
        return None;
    }
    let s1 = select(&p.strict, s1)?;
    if !s1.iter().all(Rule::is_dp) {
        return None;
    }
    let g = estimate_dg(p);
    let pre = g.predecessors(&s1);
    let mut strict: Vec<Rule> = p.strict.iter().filter(|r| !s1.contains(r) || pre.contains(r)).cloned().collect();
    strict.extend(p.weak.iter().filter(|r| r.is_dp() && pre.contains(r)).cloned());
    let mut weak: Vec<Rule> = p.strict.iter().filter(|r| s1.contains(r) && !pre.contains(r)).cloned().collect();
    weak.extend(p.weak.iter().filter(|r| !(r.is_dp() && pre.contains(r))).cloned());
    let out = with_rules(p, strict, weak);
    if out == *p {
        return None;
    }
    Some((vec![out], Combinator::Identity))
}

fn remove_weak_suffix(p: &Problem, w1: &[String]) -> Option<(Vec<Problem>, Combinator)> {
    if !p.is_dp_problem() || w1.is_empty() || !p.strict.iter().all(Rule::is_dp) {
        return None;
    }
    let w1 = select(&p.weak, w1)?;
    if !w1.iter().all(Rule::is_dp) {
        return None;
    }
    let g = estimate_dg(p);
    if !g.is_forward_closed(&w1) {
        return None;
    }
    let weak: Vec<Rule> = p.weak.iter().filter(|r| !w1.contains(r)).cloned().collect();
    Some((vec![with_rules(p, p.strict.rules.clone(), weak)], Combinator::Identity))
}

fn dg_decomposition(p: &Problem, s_down: &[String], w_down: &[String]) -> Option<(Vec<Problem>, Combinator)> {
    if !p.is_dp_problem() {
        return None;
    }
    let s_down = select(&p.strict, s_down)?;
    let w_down = select(&p.weak, w_down)?;
    if !s_down.iter().chain(w_down.iter()).all(Rule::is_dp) || s_down.is_empty() && w_down.is_empty() {
        return None;
    }
    let down: Vec<Rule> = s_down.iter().chain(w_down.iter()).cloned().collect();
    let g = estimate_dg(p);
    if !g.is_forward_closed(&down) {
        return None;
    }
    let s_up: Vec<Rule> = p.strict_dps().into_iter().filter(|r| !s_down.contains(r)).collect();
    let w_up: Vec<Rule> = p.weak_dps().into_iter().filter(|r| !w_down.contains(r)).collect();
    // predecessors outside the lower layer must be counted by the upper problem
    if !g.predecessors(&down).iter().all(|r| down.contains(r) || s_up.contains(r)) {
        return None;
    }
    let strict_plain = p.strict.non_dps();
    let weak_plain = p.weak.non_dps();
    let up = with_rules(
        p,
        s_up.iter().chain(strict_plain.iter()).cloned().collect(),
        w_up.iter().chain(weak_plain.iter()).cloned().collect(),
    );
    let sep_up: Vec<Rule> = sep(&s_up.iter().chain(w_up.iter()).cloned().collect::<Vec<_>>());
    let down_p = with_rules(
        p,
        s_down.iter().chain(strict_plain.iter()).cloned().collect(),
        w_down.iter().chain(sep_up.iter()).chain(weak_plain.iter()).cloned().collect(),
    );
    Some((vec![up, down_p], Combinator::Product))
}

/// Search parameters for [`default_strategy`].
#[derive(Debug, Clone, Copy)]
pub struct StrategyConfig {
    pub degree_cap: u32,
    pub coeff_max: u64,
    pub timeout: Option<Duration>,
    /// Maximal number of dependency graph decompositions tried per problem.
    pub dgd_candidates: usize,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig { degree_cap: 3, coeff_max: 3, timeout: None, dgd_candidates: 8 }
    }
}

struct Prover {
    cfg: StrategyConfig,
    deadline: Option<Instant>,
    steps: usize,
}

const MAX_DEPTH: usize = 64;
const MAX_STEPS: usize = 10_000;

fn open(p: &Problem, note: &str) -> ProofTree {
    ProofTree::Assumption { conclusion: Judgement { problem: p.clone(), bound: Bound::Unknown }, note: note.to_string() }
}

impl Prover {
    fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn limits(&self) -> SearchLimits {
        SearchLimits { deadline: self.deadline, ..SearchLimits::default() }
    }

    /// Applies `proc` and proves each sub-problem with `next`.
    fn infer(
        &mut self,
        proc: Processor,
        p: &Problem,
        depth: usize,
        next: &mut dyn FnMut(&mut Self, &Problem, usize) -> ProofTree,
    ) -> Option<ProofTree> {
        let (subs, comb) = apply_processor(&proc, p)?;
        self.steps += 1;
        let premises: Vec<ProofTree> = subs.iter().map(|s| next(self, s, depth + 1)).collect();
        let bounds: Vec<Bound> = premises.iter().map(ProofTree::bound).collect();
        let bound = comb.apply(&bounds).unwrap_or(Bound::Unknown);
        Some(ProofTree::Inference { processor: proc, conclusion: Judgement { problem: p.clone(), bound }, premises })
    }

    fn prove(&mut self, p: &Problem, depth: usize) -> ProofTree {
        if p.strict.is_empty() {
            return ProofTree::Axiom { conclusion: Judgement { problem: p.clone(), bound: Bound::Poly(0) } };
        }
        if self.timed_out() {
            return open(p, "timeout");
        }
        if depth > MAX_DEPTH || self.steps > MAX_STEPS {
            return open(p, "search limit reached");
        }
        if p.start == StartTerms::BasicTerms {
            let proc = if p.is_innermost() { Processor::Dt } else { Processor::Wdp };
            if let Some(pt) = self.infer(proc, p, depth, &mut |s, q, d| s.prove_dp(q, d)) {
                if pt.is_closed() {
                    return pt;
                }
                let direct = self.prove_plain(p, depth);
                return if direct.is_closed() { direct } else { pt };
            }
        }
        if p.is_dp_problem() {
            return self.prove_dp(p, depth);
        }
        self.prove_plain(p, depth)
    }

    fn complexity_pair(&self, p: &Problem, degree: u32) -> Option<Processor> {
        let op = synthesize_with(p, degree, self.cfg.coeff_max, self.limits())?;
        let proc = Processor::ComplexityPair { interpretation: op.interp };
        apply_processor(&proc, p).map(|_| proc)
    }

    fn close_with_pair(&mut self, p: &Problem, degree: u32, depth: usize) -> Option<ProofTree> {
        let proc = self.complexity_pair(p, degree)?;
        self.infer(proc, p, depth, &mut |s, q, d| s.prove(q, d))
    }

    /// Strict DPs whose successors are all weak DPs and whose predecessors are all strict.
    fn pe_candidates(p: &Problem) -> Vec<Rule> {
        let g = estimate_dg(p);
        let strict = p.strict_dps();
        let weak = p.weak_dps();
        strict
            .iter()
            .filter(|d| {
                let one = std::slice::from_ref(*d);
                g.successors(one).iter().all(|s| weak.contains(s))
                    && g.predecessors(one).iter().all(|s| strict.contains(s) && s != *d)
            })
            .cloned()
            .collect()
    }

    /// Largest forward-closed set of weak DPs.
    fn rws_candidates(p: &Problem) -> Vec<Rule> {
        if !p.strict.iter().all(Rule::is_dp) {
            return Vec::new();
        }
        let g = estimate_dg(p);
        let mut set = p.weak_dps();
        loop {
            let keep: Vec<Rule> = set
                .iter()
                .filter(|d| g.successors(std::slice::from_ref(*d)).iter().all(|s| set.contains(s)))
                .cloned()
                .collect();
            if keep.len() == set.len() {
                return set;
            }
            set = keep;
        }
    }

    fn dgd_candidates(&self, p: &Problem) -> Vec<(Vec<String>, Vec<String>)> {
        let g = estimate_dg(p);
        let strict = p.strict_dps();
        let mut seen = BTreeSet::new();
        let mut out: Vec<(usize, Vec<String>, Vec<String>)> = Vec::new();
        for n in &g.nodes {
            let down = g.forward_closure(std::slice::from_ref(n));
            let s_down: Vec<Rule> = down.iter().filter(|r| strict.contains(r)).cloned().collect();
            let w_down: Vec<Rule> = down.iter().filter(|r| !strict.contains(r)).cloned().collect();
            let s_up: Vec<Rule> = strict.iter().filter(|r| !s_down.contains(r)).cloned().collect();
            if s_down.is_empty() || s_up.is_empty() {
                continue;
            }
            if !g.predecessors(&down).iter().all(|r| down.contains(r) || s_up.contains(r)) {
                continue;
            }
            let key = (labels(&s_down), labels(&w_down));
            if seen.insert(key.clone()) {
                out.push((down.len(), key.0, key.1));
            }
        }
        out.sort_by_key(|(n, ..)| *n);
        out.into_iter().take(self.cfg.dgd_candidates).map(|(_, s, w)| (s, w)).collect()
    }

    fn prove_dp(&mut self, p: &Problem, depth: usize) -> ProofTree {
        if p.strict.is_empty() || self.timed_out() || depth > MAX_DEPTH {
            return self.prove(p, depth);
        }
        let pe = Self::pe_candidates(p);
        if !pe.is_empty() {
            let proc = Processor::PredecessorEstimation { s1: labels(&pe) };
            if let Some(pt) = self.infer(proc, p, depth, &mut |s, q, d| s.prove_dp(q, d)) {
                return pt;
            }
        }
        let rws = Self::rws_candidates(p);
        if !rws.is_empty() {
            let proc = Processor::RemoveWeakSuffix { w1: labels(&rws) };
            if let Some(pt) = self.infer(proc, p, depth, &mut |s, q, d| s.prove_dp(q, d)) {
                return pt;
            }
        }
        if let Some(pt) = self.close_with_pair(p, 1, depth) {
            return pt;
        }
        let mut first_open = None;
        for (s_down, w_down) in self.dgd_candidates(p) {
            if self.timed_out() {
                break;
            }
            let proc = Processor::DgDecomposition { s_down, w_down };
            if let Some(pt) = self.infer(proc, p, depth, &mut |s, q, d| s.prove_dp(q, d)) {
                if pt.is_closed() {
                    return pt;
                }
                first_open.get_or_insert(pt);
            }
        }
        for degree in 2..=self.cfg.degree_cap.max(1) {
            if let Some(pt) = self.close_with_pair(p, degree, depth) {
                return pt;
            }
        }
        if self.timed_out() {
            return open(p, "timeout");
        }
        first_open.unwrap_or_else(|| open(p, "no processor applies"))
    }

    /// Complexity pairs on the whole problem, then greedy decomposition.
    fn prove_plain(&mut self, p: &Problem, depth: usize) -> ProofTree {
        for degree in 1..=self.cfg.degree_cap.max(1) {
            if let Some(pt) = self.close_with_pair(p, degree, depth) {
                return pt;
            }
        }
        for degree in 1..=self.cfg.degree_cap.max(1) {
            for r in p.strict.iter() {
                if self.timed_out() {
                    return open(p, "timeout");
                }
                let others: Vec<Rule> = p.strict.iter().filter(|o| *o != r).cloned().collect();
                let probe = with_rules(p, vec![r.clone()], others.iter().chain(p.weak.iter()).cloned().collect());
                let Some(op) = synthesize_with(&probe, degree, self.cfg.coeff_max, self.limits()) else { continue };
                let s1 = strictly_oriented(&op.interp, &p.strict);
                if s1.len() == p.strict.len() {
                    continue;
                }
                let cp = Processor::ComplexityPair { interpretation: op.interp.clone() };
                let proc = Processor::Decompose { s1: labels(&s1) };
                let Some((subs, _)) = apply_processor(&proc, p) else { continue };
                if apply_processor(&cp, &subs[0]).is_none() {
                    continue;
                }
                let pt = self.infer(proc, p, depth, &mut |s, q, d| {
                    if q == &subs[0] {
                        s.infer(cp.clone(), q, d, &mut |s2, q2, d2| s2.prove(q2, d2))
                            .unwrap_or_else(|| open(q, "complexity pair rejected"))
                    } else {
                        s.prove_plain(q, d)
                    }
                });
                if let Some(pt) = pt {
                    if pt.is_closed() {
                        return pt;
                    }
                }
            }
        }
        if self.timed_out() {
            return open(p, "timeout");
        }
        open(p, "no processor applies")
    }
}

/// Proof search: DT (or WDP) on runtime problems, then predecessor
/// estimation and weak suffix removal, linear complexity pairs, dependency
/// graph decomposition and higher-degree pairs. Open leaves are marked `?`.
pub fn default_strategy(p: &Problem, cfg: StrategyConfig) -> ProofTree {
    let mut prover = Prover { cfg, deadline: cfg.timeout.map(|t| Instant::now() + t), steps: 0 };
    prover.prove(p, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{exp, mult, mult_dp, rs_mult};
    use crate::framework::validate_proof;

    fn lbl(p: &Problem) -> (Vec<&str>, Vec<&str>) {
        (p.strict.iter().map(|r| r.label()).collect(), p.weak.iter().map(|r| r.label()).collect())
    }

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn empty_processor() {
        let e = Problem { strict: Trs::empty(), weak: rs_mult(), ..mult() };
        assert_eq!(apply_processor(&Processor::Empty, &e), Some((vec![], Combinator::Constant(Bound::Poly(0)))));
        assert_eq!(apply_processor(&Processor::Empty, &mult()), None);
    }

    #[test]
    fn decompose() {
        let (subs, comb) = apply_processor(&Processor::Decompose { s1: s(&["c"]) }, &mult()).unwrap();
        assert_eq!(comb, Combinator::Sum);
        assert_eq!(lbl(&subs[0]), (vec!["c"], vec!["a", "b", "d"]));
        assert_eq!(lbl(&subs[1]), (vec!["a", "b", "d"], vec!["c"]));
        assert!(apply_processor(&Processor::Decompose { s1: s(&["a", "b", "c", "d"]) }, &mult()).is_none());
        assert!(apply_processor(&Processor::Decompose { s1: vec![] }, &mult()).is_none());
        assert!(apply_processor(&Processor::Decompose { s1: s(&["zz"]) }, &mult()).is_none());
    }

    #[test]
    fn transformations() {
        let (subs, comb) = apply_processor(&Processor::Dt, &mult()).unwrap();
        assert_eq!(comb, Combinator::Identity);
        assert_eq!(subs[0], mult_dp());
        assert!(apply_processor(&Processor::Wdp, &mult_dp()).is_none());
        let full = Problem { q: Trs::empty(), ..mult() };
        assert!(apply_processor(&Processor::Dt, &full).is_none());
        assert!(apply_processor(&Processor::Wdp, &full).is_some());
    }

    #[test]
    fn simplification_chain() {
        let p = mult_dp();
        let (pe, _) = apply_processor(&Processor::PredecessorEstimation { s1: s(&["a#", "c#"]) }, &p).unwrap();
        assert_eq!(lbl(&pe[0]), (vec!["b#", "d#"], vec!["a#", "c#", "a", "b", "c", "d"]));
        assert!(apply_processor(&Processor::PredecessorEstimation { s1: vec![] }, &p).is_none());
        assert!(apply_processor(&Processor::PredecessorEstimation { s1: s(&["a"]) }, &p).is_none());
        // b# must stay: it is strict, not weak
        assert!(apply_processor(&Processor::RemoveWeakSuffix { w1: s(&["b#"]) }, &pe[0]).is_none());
        let (rws, _) = apply_processor(&Processor::RemoveWeakSuffix { w1: s(&["a#", "c#"]) }, &pe[0]).unwrap();
        assert_eq!(lbl(&rws[0]), (vec!["b#", "d#"], vec!["a", "b", "c", "d"]));
        assert!(apply_processor(&Processor::RemoveWeakSuffix { w1: vec![] }, &pe[0]).is_none());
        let dgd = Processor::DgDecomposition { s_down: s(&["b#"]), w_down: vec![] };
        let (parts, comb) = apply_processor(&dgd, &rws[0]).unwrap();
        assert_eq!(comb, Combinator::Product);
        assert_eq!(lbl(&parts[0]), (vec!["d#"], vec!["a", "b", "c", "d"]));
        assert_eq!(lbl(&parts[1]), (vec!["b#"], vec!["d#a", "d#b", "a", "b", "c", "d"]));
        let bad = Processor::DgDecomposition { s_down: s(&["d#"]), w_down: vec![] };
        assert!(apply_processor(&bad, &rws[0]).is_none());
    }

    #[test]
    fn strategy_on_mult() {
        let pt = default_strategy(&mult(), StrategyConfig { degree_cap: 2, ..Default::default() });
        assert!(pt.is_closed());
        assert_eq!(pt.bound(), Bound::Poly(2));
        assert_eq!(validate_proof(&pt), Ok(()));
        let names: Vec<&str> = pt.processors().iter().map(|p| p.name()).collect();
        assert_eq!(
            names,
            ["DT", "PredecessorEstimation", "RemoveWeakSuffix", "DGDecomposition", "ComplexityPair", "ComplexityPair"]
        );
    }

    #[test]
    fn strategy_on_empty_problem() {
        let e = Problem { strict: Trs::empty(), weak: rs_mult(), ..mult() };
        let pt = default_strategy(&e, StrategyConfig::default());
        assert!(matches!(pt, ProofTree::Axiom { .. }));
        assert_eq!(pt.bound(), Bound::Poly(0));
    }

    #[test]
    fn strategy_on_exp_stays_open() {
        let pt = default_strategy(&exp(), StrategyConfig { degree_cap: 3, ..Default::default() });
        assert!(!pt.is_closed());
        assert_eq!(pt.bound(), Bound::Unknown);
    }
}

//! Dependency graph estimation and graph queries over dependency pairs.

use crate::dp::DerivationTree;
use crate::framework::Problem;
use crate::rewrite::{Rule, Trs};
use crate::term::{com_components, fresh_var, rename_apart, unify_terms, Term};
use std::collections::BTreeSet;
use std::fmt::Write as _;

/// Replaces every subterm that might be rewritten by `rules` (and every
/// variable) with a fresh variable, bottom-up.
pub fn tcap(t: &Term, rules: &Trs) -> Term {
    match t {
        Term::Var(_) => fresh_var(),
        Term::App(f, args) => {
            let capped = Term::app(f.clone(), args.iter().map(|a| tcap(a, rules)).collect());
            let redex = rules.iter().any(|r| {
                let lhs = rename_apart(&[&r.lhs]).pop().expect("one term");
                unify_terms(&lhs, &capped).is_some()
            });
            if redex {
                fresh_var()
            } else {
                capped
            }
        }
    }
}

/// Nodes are the DPs of a problem; an edge `(i, j, k)` says the `k`-th
/// (1-based) rhs component of node `i` may reach an instance of the lhs of node `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepGraph {
    pub nodes: Vec<Rule>,
    pub edges: BTreeSet<(usize, usize, usize)>,
}

impl DepGraph {
    pub fn index(&self, r: &Rule) -> Option<usize> {
        self.nodes.iter().position(|n| n == r)
    }

    fn indices(&self, dps: &[Rule]) -> BTreeSet<usize> {
        dps.iter().filter_map(|r| self.index(r)).collect()
    }

    /// Node-level edge relation `(source, target)`.
    pub fn arrows(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|&(i, j, _)| (i, j)).collect()
    }

    /// Edges as label pairs, convenient in tests.
    pub fn labelled_arrows(&self) -> BTreeSet<(String, String)> {
        self.arrows()
            .into_iter()
            .map(|(i, j)| (self.nodes[i].label().to_string(), self.nodes[j].label().to_string()))
            .collect()
    }

    pub fn has_arrow(&self, from: &Rule, to: &Rule) -> bool {
        match (self.index(from), self.index(to)) {
            (Some(i), Some(j)) => self.edges.iter().any(|&(a, b, _)| a == i && b == j),
            _ => false,
        }
    }

    /// Direct predecessors of any DP in `dps`, in node order.
    pub fn predecessors(&self, dps: &[Rule]) -> Vec<Rule> {
        let targets = self.indices(dps);
        let src: BTreeSet<usize> =
            self.edges.iter().filter(|(_, j, _)| targets.contains(j)).map(|&(i, _, _)| i).collect();
        src.into_iter().map(|i| self.nodes[i].clone()).collect()
    }

    /// Direct successors of any DP in `dps`, in node order.
    pub fn successors(&self, dps: &[Rule]) -> Vec<Rule> {
        let sources = self.indices(dps);
        let dst: BTreeSet<usize> =
            self.edges.iter().filter(|(i, _, _)| sources.contains(i)).map(|&(_, j, _)| j).collect();
        dst.into_iter().map(|j| self.nodes[j].clone()).collect()
    }

    /// Every edge leaving `dps` ends in `dps`.
    pub fn is_forward_closed(&self, dps: &[Rule]) -> bool {
        let set = self.indices(dps);
        self.edges.iter().all(|(i, j, _)| !set.contains(i) || set.contains(j))
    }

    /// Smallest forward-closed superset of `dps`, in node order.
    pub fn forward_closure(&self, dps: &[Rule]) -> Vec<Rule> {
        let mut set = self.indices(dps);
        loop {
            let next: BTreeSet<usize> = self
                .edges
                .iter()
                .filter(|(i, _, _)| set.contains(i))
                .map(|&(_, j, _)| j)
                .chain(set.iter().copied())
                .collect();
            if next == set {
                break;
            }
            set = next;
        }
        set.into_iter().map(|i| self.nodes[i].clone()).collect()
    }

    /// Restriction to the given nodes.
    pub fn restrict(&self, dps: &[Rule]) -> DepGraph {
        let keep: Vec<usize> = (0..self.nodes.len()).filter(|&i| dps.contains(&self.nodes[i])).collect();
        let pos = |i: usize| keep.iter().position(|&k| k == i);
        let edges = self
            .edges
            .iter()
            .filter_map(|&(i, j, k)| Some((pos(i)?, pos(j)?, k)))
            .collect();
        DepGraph { nodes: keep.iter().map(|&i| self.nodes[i].clone()).collect(), edges }
    }

    /// Graphviz rendering: nodes are DP labels, edges carry component indices.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dg {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", n.label());
        }
        for (i, j, k) in &self.edges {
            let _ = writeln!(out, "  n{i} -> n{j} [label=\"{k}\"];");
        }
        out.push_str("}\n");
        out
    }
}

/// Estimated dependency graph over the DPs of `p` (strict first, then weak).
pub fn estimate_dg(p: &Problem) -> DepGraph {
    let nodes = p.dps();
    let rules = p.non_dp_rules();
    let mut edges = BTreeSet::new();
    for (i, src) in nodes.iter().enumerate() {
        for (k, comp) in com_components(&src.rhs).iter().enumerate() {
            let capped = tcap(comp, &rules);
            for (j, dst) in nodes.iter().enumerate() {
                let lhs = rename_apart(&[&dst.lhs]).pop().expect("one term");
                if unify_terms(&capped, &lhs).is_some() {
                    edges.insert((i, j, k + 1));
                }
            }
        }
    }
    DepGraph { nodes, edges }
}

/// `sep(D)`: one rule `l → r_i` per rhs component, labelled `<label><letter>`.
pub fn sep(dps: &[Rule]) -> Vec<Rule> {
    let mut out = Vec::new();
    for d in dps {
        let comps = if d.rhs.root().is_some_and(|f| f.is_compound()) {
            d.rhs.args().to_vec()
        } else {
            vec![d.rhs.clone()]
        };
        for (k, c) in comps.into_iter().enumerate() {
            out.push(Rule { lhs: d.lhs.clone(), rhs: c, label: Some(format!("{}{}", d.label(), letter(k))) });
        }
    }
    out
}

fn letter(k: usize) -> String {
    let mut s = String::new();
    let mut k = k;
    loop {
        s.insert(0, (b'a' + (k % 26) as u8) as char);
        if k < 26 {
            break;
        }
        k = k / 26 - 1;
    }
    s
}

/// DP chains of a derivation tree: the DP labels along each root-to-leaf path
/// that applies at least one DP.
pub fn chains_of(tr: &DerivationTree, p: &Problem) -> BTreeSet<Vec<Rule>> {
    let dps: Vec<Rule> = p.dps();
    tr.rule_paths()
        .into_iter()
        .map(|path| path.into_iter().filter(|r| dps.contains(r)).cloned().collect::<Vec<_>>())
        .filter(|c| !c.is_empty())
        .collect()
}

/// Whether consecutive elements of `chain` are joined by graph edges.
pub fn is_path(g: &DepGraph, chain: &[Rule]) -> bool {
    chain.windows(2).all(|w| g.has_arrow(&w[0], &w[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{dt_problem, enumerate_derivation_trees};
    use crate::fixtures::{exp_dp_core, mult, mult_dp};
    use crate::parse::parse_term;

    fn arrows(g: &DepGraph) -> BTreeSet<(String, String)> {
        g.labelled_arrows()
    }

    fn pairs(v: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    fn labels(rs: &[Rule]) -> Vec<&str> {
        rs.iter().map(|r| r.label()).collect()
    }

    #[test]
    fn tcap_examples() {
        let p = mult();
        let t = |s: &str| parse_term(s, &p.signature, &["x", "y"]).unwrap();
        assert!(tcap(&t("*(x,y)"), &p.strict).is_var());
        let s = tcap(&t("s(x)"), &p.strict);
        assert_eq!(s.root().map(|f| f.name.to_string()), Some("s".into()));
        assert!(s.args()[0].is_var() && s.args()[0] != t("x"));
        let c = tcap(&t("+#(y,*(x,y))"), &p.strict);
        assert!(c.root().is_some_and(|f| f.is_marked()));
        assert!(c.args().iter().all(Term::is_var));
        assert_ne!(c.args()[0], c.args()[1]);
    }

    #[test]
    fn mult_graph() {
        let p = mult_dp();
        let g = estimate_dg(&p);
        assert_eq!(labels(&g.nodes), ["a#", "b#", "c#", "d#"]);
        // ③ → ② is a genuine edge: s(0)*#0 reaches 0+#0 through its first component
        let expected = pairs(&[
            ("d#", "d#"),
            ("d#", "b#"),
            ("d#", "c#"),
            ("d#", "a#"),
            ("b#", "b#"),
            ("b#", "a#"),
        ]);
        assert_eq!(arrows(&g), expected);
        let d = g.index(p.rule("d#").unwrap()).unwrap();
        let b = g.index(p.rule("b#").unwrap()).unwrap();
        assert!(g.edges.contains(&(d, b, 1)));
        assert!(g.edges.contains(&(d, d, 2)));
    }

    #[test]
    fn exp_graph() {
        let g = estimate_dg(&exp_dp_core());
        assert_eq!(arrows(&g), pairs(&[("f#", "f#"), ("h#", "h#"), ("h#", "f#")]));
    }

    #[test]
    fn collapsing_to_c0_has_no_edges() {
        let p = mult_dp();
        let only = Problem { strict: Trs::new(vec![p.rule("a#").unwrap().clone()]), weak: p.non_dp_rules(), ..p };
        assert!(estimate_dg(&only).edges.is_empty());
    }

    #[test]
    fn graph_queries() {
        let p = mult_dp();
        let g = estimate_dg(&p);
        let r = |l: &str| p.rule(l).unwrap().clone();
        assert_eq!(labels(&g.predecessors(&[r("a#"), r("c#")])), ["b#", "d#"]);
        assert!(g.predecessors(&[]).is_empty());
        assert_eq!(labels(&g.predecessors(&[r("d#")])), ["d#"]);
        let core = g.restrict(&[r("b#"), r("d#")]);
        assert!(core.is_forward_closed(&[r("b#")]));
        assert!(!core.is_forward_closed(&[r("d#")]));
        assert!(g.is_forward_closed(&g.nodes.clone()));
        assert_eq!(labels(&g.forward_closure(&[r("b#")])), ["a#", "b#"]);
    }

    #[test]
    fn separation() {
        let p = mult_dp();
        let s = sep(&[p.rule("d#").unwrap().clone()]);
        assert_eq!(labels(&s), ["d#a", "d#b"]);
        let t = |x: &str| parse_term(x, &p.signature, &["x", "y"]).unwrap();
        assert_eq!(s[0].rhs, t("+#(y,*(x,y))"));
        assert_eq!(s[1].rhs, t("*#(x,y)"));
        assert!(s.iter().all(|r| r.is_well_formed()));
        assert!(sep(&[p.rule("a#").unwrap().clone()]).is_empty());
        assert!(sep(&[]).is_empty());
        assert_eq!(letter(0), "a");
        assert_eq!(letter(26), "aa");
    }

    #[test]
    fn chains_follow_graph() {
        let p = dt_problem(&mult()).unwrap();
        let g = estimate_dg(&p);
        let t = parse_term("*#(s(s(0)),s(0))", &p.signature, &[]).unwrap();
        let en = enumerate_derivation_trees(&p, &t, 10);
        let mut seen = BTreeSet::new();
        for tr in &en.trees {
            for c in chains_of(tr, &p) {
                assert!(is_path(&g, &c));
                seen.insert(c.iter().map(|r| r.label().to_string()).collect::<Vec<_>>().join("."));
            }
        }
        assert!(seen.contains("d#.d#"));
        assert!(seen.contains("d#.b#"));
        let leaf = DerivationTree::leaf(t);
        assert!(chains_of(&leaf, &p).is_empty());
    }

    #[test]
    fn dot_export() {
        let g = estimate_dg(&exp_dp_core());
        let dot = g.to_dot();
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("->").count(), 3);
    }
}

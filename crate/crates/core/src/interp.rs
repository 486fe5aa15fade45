//! Polynomial interpretations over the naturals as complexity pairs:
//! orientation, μ-monotonicity, coefficient search and induced bounds.

use crate::framework::{Bound, Problem, StartTerms};
use crate::poly::Polynomial;
use crate::rewrite::{Rule, Trs};
use crate::term::{ReplacementMap, Symbol, Term};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

/// Highest polynomial degree of any interpretation shape.
pub const SHAPE_DEGREE_CAP: u32 = 2;

/// `[f](x1..xn) = c + Σ a_i x_i + Σ b_i x_i² + Σ c_ij x_i x_j` (indices 0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolInterp {
    pub constant: u64,
    pub linear: Vec<u64>,
    pub squares: Vec<u64>,
    pub products: Vec<((usize, usize), u64)>,
}

impl SymbolInterp {
    pub fn strongly_linear(arity: usize, constant: u64) -> Self {
        SymbolInterp { constant, linear: vec![1; arity], squares: vec![0; arity], products: Vec::new() }
    }

    pub fn linear(constant: u64, linear: Vec<u64>) -> Self {
        let n = linear.len();
        SymbolInterp { constant, linear, squares: vec![0; n], products: Vec::new() }
    }

    pub fn arity(&self) -> usize {
        self.linear.len()
    }

    pub fn degree(&self) -> u32 {
        if self.squares.iter().any(|&b| b > 0) || self.products.iter().any(|&(_, c)| c > 0) {
            2
        } else if self.linear.iter().any(|&a| a > 0) {
            1
        } else {
            0
        }
    }

    pub fn is_strongly_linear(&self) -> bool {
        self.linear.iter().all(|&a| a == 1) && self.degree() <= 1
    }

    /// Strictly monotone in argument `i` (1-based) over the naturals.
    pub fn is_monotone_in(&self, i: usize) -> bool {
        self.linear.get(i - 1).is_some_and(|&a| a >= 1) || self.squares.get(i - 1).is_some_and(|&b| b >= 1)
    }

    /// Coefficient mass beyond the fixed unit coefficients of strongly linear shapes.
    fn rank(&self) -> u64 {
        if self.is_strongly_linear() {
            self.constant
        } else {
            self.coefficient_sum()
        }
    }

    fn coefficient_sum(&self) -> u64 {
        self.constant
            + self.linear.iter().sum::<u64>()
            + self.squares.iter().sum::<u64>()
            + self.products.iter().map(|(_, c)| c).sum::<u64>()
    }

    /// Substitutes argument polynomials.
    pub fn apply(&self, args: &[Polynomial]) -> Polynomial {
        let mut out = Polynomial::constant(self.constant as i64);
        for (i, a) in args.iter().enumerate() {
            if self.linear[i] > 0 {
                out = out.add(&a.scale(self.linear[i] as i64));
            }
            if self.squares[i] > 0 {
                out = out.add(&a.mul(a).scale(self.squares[i] as i64));
            }
        }
        for &((i, j), c) in &self.products {
            if c > 0 {
                out = out.add(&args[i].mul(&args[j]).scale(c as i64));
            }
        }
        out
    }

    /// Value on natural arguments, saturating at `u64::MAX`.
    pub fn eval(&self, args: &[u64]) -> u64 {
        let mut v = self.constant;
        for (i, &a) in args.iter().enumerate() {
            v = v
                .saturating_add(self.linear[i].saturating_mul(a))
                .saturating_add(self.squares[i].saturating_mul(a.saturating_mul(a)));
        }
        for &((i, j), c) in &self.products {
            v = v.saturating_add(c.saturating_mul(args[i].saturating_mul(args[j])));
        }
        v
    }

    /// The interpretation as a polynomial over `x1..xn`.
    pub fn as_polynomial(&self) -> Polynomial {
        let args: Vec<Polynomial> =
            (1..=self.arity()).map(|i| Polynomial::var(Arc::from(format!("x{i}")))).collect();
        self.apply(&args)
    }
}

/// A polynomial interpretation, one entry per symbol.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Interpretation {
    pub symbols: BTreeMap<Symbol, SymbolInterp>,
}

impl Interpretation {
    pub fn get(&self, f: &Symbol) -> Option<&SymbolInterp> {
        self.symbols.get(f)
    }

    pub fn insert(&mut self, f: Symbol, i: SymbolInterp) {
        self.symbols.insert(f, i);
    }

    /// `[t]` as a polynomial over the variables of `t`; `None` if a symbol is uninterpreted.
    pub fn interpret(&self, t: &Term) -> Option<Polynomial> {
        match t {
            Term::Var(x) => Some(Polynomial::var(x.clone())),
            Term::App(f, args) => {
                let fi = self.symbols.get(f)?;
                let ps = args.iter().map(|a| self.interpret(a)).collect::<Option<Vec<_>>>()?;
                Some(fi.apply(&ps))
            }
        }
    }

    /// `[l] > [r]` for all natural assignments (absolute positiveness of `[l] - [r] - 1`).
    pub fn orients_strictly(&self, r: &Rule) -> bool {
        match (self.interpret(&r.lhs), self.interpret(&r.rhs)) {
            (Some(l), Some(rr)) => l.sub(&rr).sub(&Polynomial::constant(1)).is_nonnegative(),
            _ => false,
        }
    }

    pub fn orients_weakly(&self, r: &Rule) -> bool {
        match (self.interpret(&r.lhs), self.interpret(&r.rhs)) {
            (Some(l), Some(rr)) => l.sub(&rr).is_nonnegative(),
            _ => false,
        }
    }

    /// The `[f](x1,..,xn) = p` lines used in proofs.
    pub fn lines(&self) -> Vec<String> {
        self.symbols
            .iter()
            .map(|(f, i)| {
                let xs: Vec<String> = (1..=f.arity).map(|k| format!("x{k}")).collect();
                if xs.is_empty() {
                    format!("[{f}] = {}", i.as_polynomial())
                } else {
                    format!("[{f}]({}) = {}", xs.join(","), i.as_polynomial())
                }
            })
            .collect()
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.lines() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Evaluates `t` under `env`; `None` if a variable is unbound or a symbol uninterpreted.
pub fn eval(interp: &Interpretation, t: &Term, env: &BTreeMap<Arc<str>, u64>) -> Option<u64> {
    match t {
        Term::Var(x) => env.get(x).copied(),
        Term::App(f, args) => {
            let fi = interp.get(f)?;
            let vs = args.iter().map(|a| eval(interp, a, env)).collect::<Option<Vec<_>>>()?;
            Some(fi.eval(&vs))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Strict,
    Weak,
}

/// `μ_com` for a part of a DP problem that consists of DPs only, otherwise the full map.
pub fn usable_replacement_map(p: &Problem, part: Part) -> ReplacementMap {
    let rules = match part {
        Part::Strict => &p.strict,
        Part::Weak => &p.weak,
    };
    if p.is_dp_problem() && rules.iter().all(Rule::is_dp) {
        ReplacementMap::CompoundOnly
    } else {
        ReplacementMap::Full
    }
}

/// An interpretation together with the replacement maps it is monotone for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderPair {
    pub interp: Interpretation,
    pub mu_strict: ReplacementMap,
    pub mu_weak: ReplacementMap,
}

impl OrderPair {
    pub fn for_problem(interp: Interpretation, p: &Problem) -> Self {
        OrderPair {
            interp,
            mu_strict: usable_replacement_map(p, Part::Strict),
            mu_weak: usable_replacement_map(p, Part::Weak),
        }
    }

    /// Strict order μ_strict-monotone on `symbols` (coefficient check).
    pub fn is_monotone(&self, symbols: &BTreeSet<Symbol>) -> bool {
        symbols.iter().all(|f| match self.interp.get(f) {
            Some(fi) => self.mu_strict.positions(f).into_iter().all(|i| fi.is_monotone_in(i)),
            None => false,
        })
    }
}

/// `S ⊆ >` and `W ⊆ ≥`.
pub fn check_orientation(op: &OrderPair, p: &Problem) -> bool {
    p.strict.iter().all(|r| op.interp.orients_strictly(r)) && p.weak.iter().all(|r| op.interp.orients_weakly(r))
}

fn problem_symbols(p: &Problem) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    for r in p.strict.iter().chain(p.weak.iter()) {
        out.extend(r.symbols());
    }
    out
}

/// Symbols whose interpretation degree determines the induced bound.
fn bound_relevant(p: &Problem, f: &Symbol) -> bool {
    match &p.start {
        StartTerms::BasicTerms => f.is_defined(),
        StartTerms::MarkedBasicTerms => f.is_marked(),
        StartTerms::AllTerms => true,
        StartTerms::Explicit(_) => false,
    }
}

/// Shape conditions: constructors and compound symbols strongly linear;
/// everything strongly linear for derivational problems; degree ≤ 2.
pub fn has_admissible_shape(interp: &Interpretation, p: &Problem) -> bool {
    interp.symbols.iter().all(|(f, i)| {
        let shape_ok = i.arity() == f.arity
            && i.squares.len() == f.arity
            && i.products.iter().all(|&((a, b), _)| a < b && b < f.arity);
        let strongly = f.is_constructor() || f.is_compound() || p.start == StartTerms::AllTerms;
        shape_ok && (!strongly || i.is_strongly_linear()) && i.degree() <= SHAPE_DEGREE_CAP
    })
}

/// The complexity induced by an oriented pair on `p`.
pub fn induced_bound(op: &OrderPair, p: &Problem) -> Bound {
    match &p.start {
        StartTerms::Explicit(_) => Bound::Poly(0),
        StartTerms::AllTerms => {
            if op.interp.symbols.values().all(SymbolInterp::is_strongly_linear) {
                Bound::Poly(1)
            } else {
                Bound::Unknown
            }
        }
        _ => Bound::Poly(
            op.interp
                .symbols
                .iter()
                .filter(|(f, _)| bound_relevant(p, f))
                .map(|(_, i)| i.degree())
                .max()
                .unwrap_or(0),
        ),
    }
}

/// Full check of a recorded complexity pair: shapes, orientation and
/// monotonicity. Returns the induced bound.
pub fn verify_pair(interp: &Interpretation, p: &Problem) -> Option<Bound> {
    let op = OrderPair::for_problem(interp.clone(), p);
    let ok = has_admissible_shape(interp, p)
        && problem_symbols(p).iter().all(|f| interp.get(f).is_some())
        && check_orientation(&op, p)
        && op.is_monotone(&problem_symbols(p));
    ok.then(|| induced_bound(&op, p))
}

/// Limits on the coefficient search.
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub max_checks: u64,
    pub deadline: Option<Instant>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_checks: 3_000_000, deadline: None }
    }
}

fn products_of(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            v.push((i, j));
        }
    }
    v
}

/// Candidate interpretations for `f`, simplest first.
fn domain(f: &Symbol, max_degree: u32, coeff_max: u64, strongly: bool, monotone: &BTreeSet<usize>) -> Vec<SymbolInterp> {
    let n = f.arity;
    let mut out = Vec::new();
    if f.is_compound() {
        return (0..=coeff_max).map(|c| SymbolInterp::strongly_linear(n, c)).collect();
    }
    if strongly || f.is_constructor() {
        return (0..=coeff_max).map(|c| SymbolInterp::strongly_linear(n, c)).collect();
    }
    let pairs = products_of(n);
    let quad = max_degree >= 2;
    let lin_count = (coeff_max + 1).pow(n as u32);
    let sq_count: u64 = if quad { 1 << n } else { 1 };
    let pr_count: u64 = if quad { 1 << pairs.len() } else { 1 };
    for c in 0..=coeff_max {
        for li in 0..lin_count {
            let mut linear = Vec::with_capacity(n);
            let mut k = li;
            for _ in 0..n {
                linear.push(k % (coeff_max + 1));
                k /= coeff_max + 1;
            }
            for si in 0..sq_count {
                for pi in 0..pr_count {
                    let squares: Vec<u64> = (0..n).map(|i| (si >> i) & 1).collect();
                    let products: Vec<((usize, usize), u64)> = pairs
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| (pi >> b) & 1 == 1)
                        .map(|(_, &p)| (p, 1))
                        .collect();
                    let cand = SymbolInterp { constant: c, linear: linear.clone(), squares, products };
                    if monotone.iter().all(|&i| cand.is_monotone_in(i)) {
                        out.push(cand);
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| {
        (a.degree(), a.coefficient_sum(), &a.linear, a.constant, &a.squares)
            .cmp(&(b.degree(), b.coefficient_sum(), &b.linear, b.constant, &b.squares))
    });
    out
}

struct Constraint {
    rule: Rule,
    strict: bool,
    symbols: BTreeSet<Symbol>,
    samples: Vec<BTreeMap<Arc<str>, u64>>,
}

impl Constraint {
    fn new(rule: &Rule, strict: bool) -> Self {
        let vars: Vec<Arc<str>> = rule.lhs.vars().into_iter().collect();
        let mut samples: Vec<BTreeMap<Arc<str>, u64>> =
            [0, 1, 2, 5].iter().map(|&k| vars.iter().map(|x| (x.clone(), k)).collect()).collect();
        for (i, _) in vars.iter().enumerate().skip(usize::from(vars.len() < 2)) {
            samples.push(vars.iter().enumerate().map(|(j, x)| (x.clone(), if i == j { 4 } else { 1 })).collect());
        }
        Constraint { rule: rule.clone(), strict, symbols: rule.symbols(), samples }
    }

    /// Cheap refutation on sample points; `false` means definitely violated.
    fn plausible(&self, interp: &Interpretation) -> bool {
        self.samples.iter().all(|env| {
            match (eval(interp, &self.rule.lhs, env), eval(interp, &self.rule.rhs, env)) {
                (Some(l), Some(r)) if l < u64::MAX && r < u64::MAX => {
                    if self.strict {
                        l > r
                    } else {
                        l >= r
                    }
                }
                _ => true,
            }
        })
    }

    fn holds(&self, interp: &Interpretation) -> bool {
        self.plausible(interp)
            && if self.strict { interp.orients_strictly(&self.rule) } else { interp.orients_weakly(&self.rule) }
    }
}

struct Search<'a> {
    order: Vec<Symbol>,
    domains: Vec<Vec<SymbolInterp>>,
    /// Constraints that become fully assigned at each level.
    at_level: Vec<Vec<&'a Constraint>>,
    level_of: BTreeMap<Symbol, usize>,
    interp: Interpretation,
    checks: u64,
    limits: SearchLimits,
    exhausted: bool,
}

enum Outcome {
    Solved,
    Conflict(BTreeSet<usize>),
}

impl Search<'_> {
    fn solve(&mut self, level: usize) -> Outcome {
        if level == self.order.len() {
            return Outcome::Solved;
        }
        let f = self.order[level].clone();
        let mut conflict = BTreeSet::new();
        for k in 0..self.domains[level].len() {
            if self.checks >= self.limits.max_checks || self.limits.deadline.is_some_and(|d| Instant::now() >= d) {
                self.exhausted = true;
                self.interp.symbols.remove(&f);
                return Outcome::Conflict((0..level).collect());
            }
            self.interp.insert(f.clone(), self.domains[level][k].clone());
            let mut failed = None;
            for c in &self.at_level[level] {
                self.checks += 1;
                if !c.holds(&self.interp) {
                    failed = Some(c.symbols.iter().filter_map(|g| self.level_of.get(g).copied()).collect::<BTreeSet<_>>());
                    break;
                }
            }
            if let Some(vars) = failed {
                conflict.extend(vars.into_iter().filter(|&l| l != level));
                continue;
            }
            match self.solve(level + 1) {
                Outcome::Solved => return Outcome::Solved,
                Outcome::Conflict(c) => {
                    if self.exhausted {
                        self.interp.symbols.remove(&f);
                        return Outcome::Conflict(c);
                    }
                    if c.contains(&level) {
                        conflict.extend(c.into_iter().filter(|&l| l != level));
                    } else {
                        // nothing at this level caused the failure: jump back
                        self.interp.symbols.remove(&f);
                        return Outcome::Conflict(c);
                    }
                }
            }
        }
        self.interp.symbols.remove(&f);
        Outcome::Conflict(conflict)
    }
}

/// Searches for a polynomial interpretation orienting `p` (strict rules
/// strictly, weak rules weakly) that is monotone for the usable replacement
/// map of the strict part. Symbols relevant to the bound are limited to
/// `degree`; the remaining ones may use the full shape.
pub fn synthesize(p: &Problem, degree: u32, coeff_max: u64) -> Option<OrderPair> {
    synthesize_with(p, degree, coeff_max, SearchLimits::default())
}

pub fn synthesize_with(p: &Problem, degree: u32, coeff_max: u64, limits: SearchLimits) -> Option<OrderPair> {
    let degree = degree.min(SHAPE_DEGREE_CAP);
    let mu = usable_replacement_map(p, Part::Strict);
    let symbols = problem_symbols(p);
    let constraints: Vec<Constraint> = p
        .strict
        .iter()
        .map(|r| (r, true))
        .chain(p.weak.iter().map(|r| (r, false)))
        .map(|(r, strict)| Constraint::new(r, strict))
        .collect();

    let all_terms = p.start == StartTerms::AllTerms;
    let mut domain_of: BTreeMap<Symbol, Vec<SymbolInterp>> = symbols
        .iter()
        .map(|f| {
            let max_deg = if bound_relevant(p, f) { degree } else { SHAPE_DEGREE_CAP };
            (f.clone(), domain(f, max_deg, coeff_max, all_terms, &mu.positions(f)))
        })
        .collect();

    // greedy order: the next symbol completes the most constraints (weak
    // ones weigh more, they prune cheaply); ties go to the smaller domain
    let mut order: Vec<Symbol> = Vec::new();
    let mut remaining: BTreeSet<Symbol> = symbols.clone();
    while !remaining.is_empty() {
        let chosen: BTreeSet<Symbol> = order.iter().cloned().collect();
        let best = remaining
            .iter()
            .max_by_key(|f| {
                let score: usize = constraints
                    .iter()
                    .filter(|c| c.symbols.contains(*f) && c.symbols.iter().all(|g| g == *f || chosen.contains(g)))
                    .map(|c| if c.strict { 2 } else { 3 })
                    .sum();
                let touches = constraints.iter().filter(|c| c.symbols.contains(*f)).count();
                (score, std::cmp::Reverse(domain_of[*f].len()), touches, std::cmp::Reverse((*f).clone()))
            })
            .expect("non-empty")
            .clone();
        remaining.remove(&best);
        order.push(best);
    }
    let level_of: BTreeMap<Symbol, usize> = order.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
    let mut at_level: Vec<Vec<&Constraint>> = vec![Vec::new(); order.len()];
    for c in &constraints {
        let lvl = c.symbols.iter().filter_map(|g| level_of.get(g)).max().copied();
        if let Some(l) = lvl {
            at_level[l].push(c);
        }
    }
    for lvl in &mut at_level {
        // weak rules prune cheaply, check them first
        lvl.sort_by_key(|c| c.strict);
    }
    let domains: Vec<Vec<SymbolInterp>> =
        order.iter().map(|f| domain_of.remove(f).expect("domain computed")).collect();
    // iterative deepening on the coefficient mass keeps small solutions cheap
    let ranks: Vec<Vec<u64>> = domains.iter().map(|d| d.iter().map(SymbolInterp::rank).collect()).collect();
    let max_rank = ranks.iter().flatten().copied().max().unwrap_or(0);
    let mut checks = 0;
    for k in 0..=max_rank {
        if k > 0 && !ranks.iter().flatten().any(|&r| r == k) {
            continue;
        }
        let doms: Vec<Vec<SymbolInterp>> = domains
            .iter()
            .zip(&ranks)
            .map(|(d, r)| d.iter().zip(r).filter(|(_, &r)| r <= k).map(|(c, _)| c.clone()).collect())
            .collect();
        if doms.iter().any(Vec::is_empty) {
            continue;
        }
        let mut search = Search {
            order: order.clone(),
            domains: doms,
            at_level: at_level.clone(),
            level_of: level_of.clone(),
            interp: Interpretation::default(),
            checks,
            limits,
            exhausted: false,
        };
        match search.solve(0) {
            Outcome::Solved => {
                let op = OrderPair::for_problem(search.interp, p);
                debug_assert!(check_orientation(&op, p));
                return Some(op);
            }
            Outcome::Conflict(_) if search.exhausted => return None,
            Outcome::Conflict(_) => checks = search.checks,
        }
    }
    None
}

/// The rules of `rules` that `interp` orients strictly.
pub fn strictly_oriented(interp: &Interpretation, rules: &Trs) -> Vec<Rule> {
    rules.iter().filter(|r| interp.orients_strictly(r)).cloned().collect()
}

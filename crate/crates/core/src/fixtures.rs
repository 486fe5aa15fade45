//! Small reference systems used throughout the tests and by the CLI examples.

use crate::dp::dt_problem;
use crate::framework::{Problem, Signature, StartTerms};
use crate::parse::parse_problem;
use crate::rewrite::Trs;
use crate::term::Term;

/// Addition and multiplication on unary numbers, innermost.
pub const MULT_TRS: &str = "\
(VAR x y)
(INFIX + *)
(RULES
  a: +(0, y) -> y
  b: +(s(x), y) -> s(+(x, y))
  c: *(0, y) -> 0
  d: *(s(x), y) -> +(y, *(x, y))
)
(STRATEGY INNERMOST)
(STARTTERM CONSTRUCTOR-BASED)
";

/// Doubling and exponentiation; runtime complexity is exponential.
pub const EXP_TRS: &str = "\
(VAR x)
(RULES
  f: d(s(x)) -> s(s(d(x)))
  g: d(0) -> 0
  h: e(s(x)) -> d(e(x))
  i: e(0) -> s(0)
)
(STRATEGY INNERMOST)
(STARTTERM CONSTRUCTOR-BASED)
";

pub fn mult() -> Problem {
    parse_problem(MULT_TRS).expect("fixture parses")
}

pub fn rs_mult() -> Trs {
    mult().strict
}

pub fn exp() -> Problem {
    parse_problem(EXP_TRS).expect("fixture parses")
}

pub fn rs_exp() -> Trs {
    exp().strict
}

/// The dependency tuple problem of [`mult`].
pub fn mult_dp() -> Problem {
    dt_problem(&mult()).expect("mult is innermost")
}

/// The dependency tuple problem of [`exp`] restricted to its two recursive tuples.
pub fn exp_dp_core() -> Problem {
    let p = dt_problem(&exp()).expect("exp is innermost");
    Problem {
        strict: p.strict.iter().filter(|r| matches!(r.label(), "f#" | "h#")).cloned().collect(),
        weak: rs_exp(),
        ..p
    }
}

/// Strict `g(s(x)) -> g(x)` relative to the non-terminating weak system
/// `f(x) -> f(s(x)), f(x) -> g(x)`, over the constant `bot`.
pub fn kleene_counterexample() -> (Trs, Trs, Signature) {
    let p = parse_problem(
        "(VAR x) (SIGNATURE (CONSTRUCTORS s bot) (DEFINED f g))
         (RULES g(s(x)) -> g(x)  f(x) ->= f(s(x))  f(x) ->= g(x))",
    )
    .expect("fixture parses");
    (p.strict, p.weak, p.signature)
}

fn explicit_start(p: Problem, name: &str) -> Problem {
    let f = p.signature.lookup(name).and_then(|f| f.marked()).expect("start symbol is defined");
    Problem { start: StartTerms::Explicit(vec![Term::constant(f)]), ..p }
}

/// `⟨{g# -> c_0} / {f# -> c_2(f#, g#)}, ∅, {f#}⟩`: weak rules diverge, so
/// the complexity is undefined.
pub fn weak_leaf_problem() -> Problem {
    let p = parse_problem("(SIGNATURE (DEFINED f g)) (RULES g# -> c_0  f# ->= c_2(f#, g#))").expect("fixture parses");
    explicit_start(p, "f")
}

/// `⟨{f# -> c_1(g), g -> g} / ∅, ∅, {f#}⟩`: the plain rule `g -> g` is not a leaf.
pub fn strict_loop_problem() -> Problem {
    let p = parse_problem("(SIGNATURE (DEFINED f g)) (RULES f# -> c_1(g)  g -> g)").expect("fixture parses");
    explicit_start(p, "f")
}

//! Proof output: a readable text rendering and a versioned JSON form that
//! can be read back and re-checked.

use crate::framework::{Bound, Judgement, Problem, ProofTree, Signature, StartTerms};
use crate::interp::{Interpretation, SymbolInterp};
use crate::parse::{parse_rule_open, parse_term_open};
use crate::processors::Processor;
use crate::rewrite::{Rule, Trs};
use crate::term::{Symbol, SymbolKind};
use serde_json::{json, Value};
use std::fmt::Write as _;
use thiserror::Error;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum ProofFormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u64),
    #[error("malformed proof: {0}")]
    Malformed(String),
}

fn malformed<T>(msg: impl Into<String>) -> Result<T, ProofFormatError> {
    Err(ProofFormatError::Malformed(msg.into()))
}

fn rule_text(r: &Rule) -> String {
    format!("{}: {} -> {}", r.label(), r.lhs, r.rhs)
}

fn trs_json(t: &Trs) -> Value {
    Value::Array(t.iter().map(|r| Value::String(rule_text(r))).collect())
}

fn symbols_json(s: &std::collections::BTreeSet<Symbol>) -> Value {
    Value::Array(s.iter().map(|f| json!({"name": &*f.name, "arity": f.arity})).collect())
}

fn start_json(s: &StartTerms) -> Value {
    match s {
        StartTerms::AllTerms => json!("all"),
        StartTerms::BasicTerms => json!("basic"),
        StartTerms::MarkedBasicTerms => json!("marked-basic"),
        StartTerms::Explicit(ts) => json!({"explicit": ts.iter().map(|t| t.to_string()).collect::<Vec<_>>()}),
    }
}

pub fn problem_json(p: &Problem) -> Value {
    json!({
        "strict": trs_json(&p.strict),
        "weak": trs_json(&p.weak),
        "q": trs_json(&p.q),
        "start": start_json(&p.start),
        "signature": {
            "constructors": symbols_json(&p.signature.constructors),
            "defined": symbols_json(&p.signature.defined),
            "infix": p.signature.infix.iter().collect::<Vec<_>>(),
        },
    })
}

fn bound_json(b: Bound) -> Value {
    match b {
        Bound::Poly(d) => json!(d),
        Bound::Unknown => Value::Null,
    }
}

fn labels_json(v: &[String]) -> Value {
    json!(v)
}

fn interp_json(i: &Interpretation) -> Value {
    let entries: Vec<Value> = i
        .symbols
        .iter()
        .map(|(f, si)| {
            json!({
                "symbol": f.to_string(),
                "arity": f.arity,
                "constant": si.constant,
                "linear": si.linear,
                "squares": si.squares,
                "products": si.products.iter().map(|((a, b), c)| json!([a, b, c])).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({"symbols": entries, "text": i.lines()})
}

fn params_json(p: &Processor) -> Value {
    match p {
        Processor::Empty | Processor::Wdp | Processor::Dt => json!({}),
        Processor::ComplexityPair { interpretation } => json!({"interpretation": interp_json(interpretation)}),
        Processor::Decompose { s1 } | Processor::PredecessorEstimation { s1 } => json!({"s1": labels_json(s1)}),
        Processor::RemoveWeakSuffix { w1 } => json!({"w1": labels_json(w1)}),
        Processor::DgDecomposition { s_down, w_down } => {
            json!({"s_down": labels_json(s_down), "w_down": labels_json(w_down)})
        }
    }
}

fn conclusion_json(j: &Judgement) -> Value {
    json!({"problem": problem_json(&j.problem), "bound": bound_json(j.bound)})
}

fn node_json(pt: &ProofTree) -> Value {
    match pt {
        ProofTree::Axiom { conclusion } => json!({
            "processor": "Empty",
            "params": {},
            "conclusion": conclusion_json(conclusion),
            "premises": [],
        }),
        ProofTree::Assumption { conclusion, note } => json!({
            "processor": "Assumption",
            "params": {"note": note},
            "conclusion": conclusion_json(conclusion),
            "premises": [],
        }),
        ProofTree::Inference { processor, conclusion, premises } => json!({
            "processor": processor.name(),
            "params": params_json(processor),
            "conclusion": conclusion_json(conclusion),
            "premises": premises.iter().map(node_json).collect::<Vec<_>>(),
        }),
    }
}

pub fn proof_to_json(pt: &ProofTree) -> Value {
    json!({"schema": SCHEMA_VERSION, "proof": node_json(pt)})
}

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value, ProofFormatError> {
    v.get(k).ok_or_else(|| ProofFormatError::Malformed(format!("missing field {k}")))
}

fn str_list(v: &Value) -> Result<Vec<String>, ProofFormatError> {
    match v.as_array() {
        Some(a) => a
            .iter()
            .map(|x| x.as_str().map(str::to_string).ok_or_else(|| ProofFormatError::Malformed("expected string".into())))
            .collect(),
        None => malformed("expected a list of strings"),
    }
}

fn u64_of(v: &Value) -> Result<u64, ProofFormatError> {
    v.as_u64().ok_or_else(|| ProofFormatError::Malformed(format!("expected a natural number, got {v}")))
}

fn symbols_of(v: &Value, kind: SymbolKind) -> Result<std::collections::BTreeSet<Symbol>, ProofFormatError> {
    let Some(a) = v.as_array() else { return malformed("expected a symbol list") };
    a.iter()
        .map(|s| {
            let name = field(s, "name")?.as_str().ok_or_else(|| ProofFormatError::Malformed("symbol name".into()))?;
            Ok(Symbol::new(name, u64_of(field(s, "arity")?)? as usize, kind))
        })
        .collect()
}

fn trs_of(v: &Value, sig: &Signature) -> Result<Trs, ProofFormatError> {
    str_list(v)?
        .iter()
        .map(|s| parse_rule_open(s, sig).map_err(|e| ProofFormatError::Malformed(format!("rule {s}: {e}"))))
        .collect()
}

pub fn problem_from_json(v: &Value) -> Result<Problem, ProofFormatError> {
    let sv = field(v, "signature")?;
    let signature = Signature {
        constructors: symbols_of(field(sv, "constructors")?, SymbolKind::Constructor)?,
        defined: symbols_of(field(sv, "defined")?, SymbolKind::Defined)?,
        infix: sv.get("infix").map(str_list).transpose()?.unwrap_or_default().into_iter().collect(),
    };
    let start = match field(v, "start")? {
        Value::String(s) if s == "all" => StartTerms::AllTerms,
        Value::String(s) if s == "basic" => StartTerms::BasicTerms,
        Value::String(s) if s == "marked-basic" => StartTerms::MarkedBasicTerms,
        o => match o.get("explicit") {
            Some(ts) => StartTerms::Explicit(
                str_list(ts)?
                    .iter()
                    .map(|t| parse_term_open(t, &signature).map_err(|e| ProofFormatError::Malformed(e.to_string())))
                    .collect::<Result<_, _>>()?,
            ),
            None => return malformed(format!("unknown start terms {o}")),
        },
    };
    Ok(Problem {
        strict: trs_of(field(v, "strict")?, &signature)?,
        weak: trs_of(field(v, "weak")?, &signature)?,
        q: trs_of(field(v, "q")?, &signature)?,
        start,
        signature,
    })
}

fn symbol_of(name: &str, arity: usize, sig: &Signature) -> Result<Symbol, ProofFormatError> {
    if let Some(f) = sig.lookup(name).filter(|f| f.arity == arity) {
        return Ok(f.clone());
    }
    if let Some(f) = name.strip_suffix('#').and_then(|b| sig.lookup(b)).and_then(Symbol::marked) {
        return Ok(f);
    }
    if name == format!("c_{arity}") {
        return Ok(Symbol::compound(arity));
    }
    malformed(format!("unknown symbol {name}/{arity}"))
}

fn interp_from_json(v: &Value, sig: &Signature) -> Result<Interpretation, ProofFormatError> {
    let Some(entries) = field(v, "symbols")?.as_array() else { return malformed("interpretation symbols") };
    let mut out = Interpretation::default();
    for e in entries {
        let name = field(e, "symbol")?.as_str().ok_or_else(|| ProofFormatError::Malformed("symbol".into()))?;
        let arity = u64_of(field(e, "arity")?)? as usize;
        let nums = |k: &str| -> Result<Vec<u64>, ProofFormatError> {
            field(e, k)?.as_array().ok_or_else(|| ProofFormatError::Malformed(k.into()))?.iter().map(u64_of).collect()
        };
        let linear = nums("linear")?;
        let squares = nums("squares")?;
        if linear.len() != arity || squares.len() != arity {
            return malformed(format!("coefficient count of {name}"));
        }
        let mut products = Vec::new();
        for pr in field(e, "products")?.as_array().ok_or_else(|| ProofFormatError::Malformed("products".into()))? {
            let t: Vec<u64> = pr.as_array().map(|a| a.iter().map(u64_of).collect()).transpose()?.unwrap_or_default();
            if t.len() != 3 || t[0] as usize >= arity || t[1] as usize >= arity {
                return malformed(format!("product entry of {name}"));
            }
            products.push(((t[0] as usize, t[1] as usize), t[2]));
        }
        let f = symbol_of(name, arity, sig)?;
        out.insert(f, SymbolInterp { constant: u64_of(field(e, "constant")?)?, linear, squares, products });
    }
    Ok(out)
}

fn node_from_json(v: &Value) -> Result<ProofTree, ProofFormatError> {
    let name = field(v, "processor")?.as_str().ok_or_else(|| ProofFormatError::Malformed("processor".into()))?;
    let params = field(v, "params")?;
    let cv = field(v, "conclusion")?;
    let problem = problem_from_json(field(cv, "problem")?)?;
    let bound = match field(cv, "bound")? {
        Value::Null => Bound::Unknown,
        b => Bound::Poly(u32::try_from(u64_of(b)?).map_err(|_| ProofFormatError::Malformed("bound".into()))?),
    };
    let Some(prem) = field(v, "premises")?.as_array() else { return malformed("premises") };
    let premises = prem.iter().map(node_from_json).collect::<Result<Vec<_>, _>>()?;
    let labels = |k: &str| field(params, k).and_then(str_list);
    let processor = match name {
        "Empty" if premises.is_empty() => return Ok(ProofTree::Axiom { conclusion: Judgement { problem, bound } }),
        "Assumption" => {
            let note = params.get("note").and_then(Value::as_str).unwrap_or_default().to_string();
            return Ok(ProofTree::Assumption { conclusion: Judgement { problem, bound }, note });
        }
        "Empty" => Processor::Empty,
        "WDP" => Processor::Wdp,
        "DT" => Processor::Dt,
        "ComplexityPair" => Processor::ComplexityPair {
            interpretation: interp_from_json(field(params, "interpretation")?, &problem.signature)?,
        },
        "Decompose" => Processor::Decompose { s1: labels("s1")? },
        "PredecessorEstimation" => Processor::PredecessorEstimation { s1: labels("s1")? },
        "RemoveWeakSuffix" => Processor::RemoveWeakSuffix { w1: labels("w1")? },
        "DGDecomposition" => Processor::DgDecomposition { s_down: labels("s_down")?, w_down: labels("w_down")? },
        other => return malformed(format!("unknown processor {other}")),
    };
    Ok(ProofTree::Inference { processor, conclusion: Judgement { problem, bound }, premises })
}

pub fn proof_from_json(v: &Value) -> Result<ProofTree, ProofFormatError> {
    let schema = u64_of(field(v, "schema")?)?;
    if schema != SCHEMA_VERSION {
        return Err(ProofFormatError::Schema(schema));
    }
    node_from_json(field(v, "proof")?)
}

pub fn proof_from_str(s: &str) -> Result<ProofTree, ProofFormatError> {
    proof_from_json(&serde_json::from_str(s)?)
}

fn rules_line(out: &mut String, indent: &str, name: &str, t: &Trs, sig: &Signature) {
    let _ = writeln!(out, "{indent}  {name}:");
    for r in t.iter() {
        let _ = writeln!(out, "{indent}    {}: {} -> {}", r.label(), r.lhs.display_with(&sig.infix), r.rhs.display_with(&sig.infix));
    }
}

fn params_text(p: &Processor) -> Vec<String> {
    let set = |v: &[String]| format!("{{{}}}", v.join(", "));
    match p {
        Processor::Empty | Processor::Wdp | Processor::Dt => Vec::new(),
        Processor::ComplexityPair { interpretation } => interpretation.lines(),
        Processor::Decompose { s1 } | Processor::PredecessorEstimation { s1 } => vec![format!("S1 = {}", set(s1))],
        Processor::RemoveWeakSuffix { w1 } => vec![format!("W1 = {}", set(w1))],
        Processor::DgDecomposition { s_down, w_down } => {
            vec![format!("S_down = {}", set(s_down)), format!("W_down = {}", set(w_down))]
        }
    }
}

fn text_node(pt: &ProofTree, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    let j = pt.conclusion();
    let p = &j.problem;
    let head = match pt {
        ProofTree::Axiom { .. } => "Empty".to_string(),
        ProofTree::Assumption { note, .. } => format!("Open ({note})"),
        ProofTree::Inference { processor, .. } => processor.name().to_string(),
    };
    let _ = writeln!(out, "{indent}* {head}: {}", j.bound);
    let _ = writeln!(out, "{indent}  problem: {p}");
    if depth == 0 || !matches!(pt, ProofTree::Axiom { .. }) {
        rules_line(out, &indent, "strict", &p.strict, &p.signature);
        if !p.weak.is_empty() {
            rules_line(out, &indent, "weak", &p.weak, &p.signature);
        }
    }
    if let ProofTree::Inference { processor, premises, .. } = pt {
        for l in params_text(processor) {
            let _ = writeln!(out, "{indent}  {l}");
        }
        for prem in premises {
            text_node(prem, depth + 1, out);
        }
    }
}

/// Human-readable proof: one block per inference, premises indented.
pub fn proof_to_text(pt: &ProofTree) -> String {
    let mut out = String::new();
    text_node(pt, 0, &mut out);
    out
}

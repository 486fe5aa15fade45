use clap::{Parser, Subcommand, ValueEnum};
use cplx_core::depgraph::estimate_dg;
use cplx_core::dp::{dt_problem, wdp_problem};
use cplx_core::framework::{validate_proof, Bound, Problem, StartTerms};
use cplx_core::parse::parse_problem;
use cplx_core::processors::{default_strategy, StrategyConfig};
use cplx_core::proof::{proof_from_str, proof_to_json, proof_to_text};
use cplx_core::rewrite::cc_oracle;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "cplx", version, about = "Polynomial runtime complexity analysis for term rewrite systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProofFormat {
    Text,
    Json,
    None,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a polynomial bound and print the proof.
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        degree_max: u32,
        #[arg(long, default_value_t = 3)]
        coeff_max: u64,
        /// Wall clock limit in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long, value_enum, default_value_t = ProofFormat::Text)]
        proof: ProofFormat,
        /// Write the estimated dependency graph in DOT format.
        #[arg(long)]
        dot_dg: Option<PathBuf>,
    },
    /// Print brute-force complexity values for start terms up to a size.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 50)]
        budget: usize,
    },
    /// Re-check a JSON proof.
    Check { proof: PathBuf },
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<Problem, String> {
    parse_problem(&read(path)?).map_err(|e| format!("{}:{e}", path.display()))
}

/// The problem whose dependency graph is exported: the DP problem itself,
/// or the transformed runtime problem.
fn dp_view(p: &Problem) -> Option<Problem> {
    if p.is_dp_problem() {
        return Some(p.clone());
    }
    if p.start != StartTerms::BasicTerms {
        return None;
    }
    if p.is_innermost() {
        dt_problem(p).ok()
    } else {
        wdp_problem(p).ok()
    }
}

fn analyze(
    file: &Path,
    degree_max: u32,
    coeff_max: u64,
    timeout: Option<f64>,
    proof: ProofFormat,
    dot_dg: Option<&Path>,
) -> Result<ExitCode, String> {
    let p = load(file)?;
    if let Some(dot) = dot_dg {
        let view = dp_view(&p).ok_or("no dependency pair problem for this input")?;
        std::fs::write(dot, estimate_dg(&view).to_dot()).map_err(|e| format!("{}: {e}", dot.display()))?;
    }
    let timeout = match timeout {
        Some(t) if t.is_finite() && t >= 0.0 => Some(Duration::from_secs_f64(t)),
        Some(t) => return Err(format!("invalid timeout {t}")),
        None => None,
    };
    let cfg = StrategyConfig { degree_cap: degree_max, coeff_max, timeout, ..StrategyConfig::default() };
    let pt = default_strategy(&p, cfg);
    let found = match (pt.is_closed(), pt.bound()) {
        (true, Bound::Poly(d)) => Some(d),
        _ => None,
    };
    match found {
        Some(d) => println!("WORST_CASE(?, O(n^{d}))"),
        None => println!("MAYBE"),
    }
    match proof {
        ProofFormat::Text => print!("{}", proof_to_text(&pt)),
        ProofFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&proof_to_json(&pt)).map_err(|e| e.to_string())?)
        }
        ProofFormat::None => {}
    }
    Ok(if found.is_some() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn oracle(file: &Path, size: usize, budget: usize) -> Result<ExitCode, String> {
    let p = load(file)?;
    println!("n\tvalue");
    for n in 1..=size {
        let v = cc_oracle(&p, n, budget).map_err(|e| e.to_string())?;
        println!("{n}\t{v}");
    }
    Ok(ExitCode::SUCCESS)
}

fn check(path: &Path) -> Result<ExitCode, String> {
    let pt = proof_from_str(&read(path)?).map_err(|e| e.to_string())?;
    match validate_proof(&pt) {
        Ok(()) => {
            println!("VALID {}", pt.bound());
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            println!("INVALID {e}");
            Ok(ExitCode::from(1))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Analyze { file, degree_max, coeff_max, timeout, proof, dot_dg } => {
            analyze(file, *degree_max, *coeff_max, *timeout, *proof, dot_dg.as_deref())
        }
        Command::Oracle { file, size, budget } => oracle(file, *size, *budget),
        Command::Check { proof } => check(proof),
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}

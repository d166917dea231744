//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage/input errors, 2 no admissible mode,
//! 3 not weakly irreducible, 4 numerical breakdown, 5 not partially
//! symmetric, 6 verification failed. Mode numbers are 1-based throughout.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hgpm::{solve_hgpm, Bracket, IterationRecord, SolveResult, SolveStatus, SolverConfig};
use crate::io::read_tensor_file;
use crate::oracle::{oracle_norm, DEFAULT_RESTARTS};
use crate::pm::{solve_pm, PmConfig};
use crate::spectral::{lift_phi, residual_check, PVector, ReducedSingularPair, SingularPair};
use crate::structure::StructureReport;
use crate::symmetry::{solve_eigenproblem, SymmetryStructure};
use crate::tensor::{ReducedTupleVector, SparseTensor, TupleVector};

pub const SEED_ENV: &str = "TENSORNORM_SEED";
/// Per-mode residual below which `verify` passes.
pub const VERIFY_TOLERANCE: f64 = 1e-8;
pub const TRACE_HEADER: &str = "k,lambda_minus,lambda_plus,err_vs_final";

#[derive(Parser, Debug)]
#[command(
    name = "tensornorm",
    version,
    about = "Projective norms and singular vectors of nonnegative tensors"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Hgpm,
    Pm,
    Oracle,
}

#[derive(clap::Args, Debug)]
struct SolverFlags {
    /// Stopping tolerance
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long = "max-iter", default_value_t = 10_000)]
    max_iter: usize,
    /// Mode to eliminate (1-based)
    #[arg(long)]
    index: Option<usize>,
    /// Write the per-iteration CSV trace here
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Print JSON instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report structural properties and the admissible modes
    Check {
        tensor: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
    },
    /// Compute the norm and a maximal singular vector
    Norm {
        tensor: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Hgpm)]
        method: MethodArg,
        /// Oracle seed; falls back to TENSORNORM_SEED, then 0
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Solve the eigenproblem of a partially symmetric tensor
    Eigen {
        tensor: PathBuf,
        /// Block sizes, summing to the order
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<usize>,
        /// One exponent per block
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Check a candidate singular pair read from JSON
    Verify {
        tensor: PathBuf,
        vector: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
    },
}

/// Vector file schema shared by `norm --json` output and `verify` input.
#[derive(Debug, Serialize, Deserialize)]
pub struct VectorFile {
    pub lambda: f64,
    pub parts: Vec<Vec<f64>>,
    /// Present for reduced vectors; the 1-based mode left out of `parts`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omitted_mode: Option<usize>,
}

#[derive(Serialize)]
struct NormReport<'a> {
    method: &'a str,
    status: SolveStatus,
    lambda: f64,
    bracket: Option<[f64; 2]>,
    q_value: f64,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    eliminated_mode: Option<usize>,
    parts: &'a [Vec<f64>],
    residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

#[derive(Serialize)]
struct EigenReport<'a> {
    status: SolveStatus,
    lambda: f64,
    bracket: Option<[f64; 2]>,
    iterations: usize,
    blocks: &'a [usize],
    parts: &'a [Vec<f64>],
    residuals: &'a [f64],
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    notes: &'a [String],
}

#[derive(Serialize)]
struct VerifyReport {
    lambda: f64,
    residuals: Vec<f64>,
    pass: bool,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ConditionViolated => 2,
            Error::NotWeaklyIrreducible => 3,
            Error::NumericalBreakdown(_) => 4,
            Error::NotPartiallySymmetric => 5,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn status_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::NumericalBreakdown => 4,
        _ => 0,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable report")
}

fn pair(b: Option<Bracket>) -> Option<[f64; 2]> {
    b.map(|b| [b.lower, b.upper])
}

fn write_trace(path: &Path, trace: &[IterationRecord], final_lambda: f64) -> Result<(), Failure> {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let (lo, hi) = match r.bracket {
            Some(b) => (b.lower.to_string(), b.upper.to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.k,
            lo,
            hi,
            (r.estimate - final_lambda).abs()
        ));
    }
    std::fs::write(path, out).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn seed_from(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn one_based_index(index: Option<usize>, order: usize) -> Result<Option<usize>, Failure> {
    match index {
        None => Ok(None),
        Some(i) if i >= 1 && i <= order => Ok(Some(i - 1)),
        Some(i) => Err(usage(format!("--index {i} is outside 1..={order}"))),
    }
}

fn cmd_check(out: &mut dyn Write, tensor: &Path, p: Vec<f64>) -> Result<i32, Failure> {
    let f = read_tensor_file(tensor)?;
    let p = PVector::new(p)?;
    let report = StructureReport::analyze(&f, &p)?;
    writeln!(out, "{}", to_json(&report)).map_err(|e| usage(e.to_string()))?;
    Ok(if report.chosen_index.is_none() {
        2
    } else if !report.weakly_irreducible {
        3
    } else {
        0
    })
}

fn render_solve(
    out: &mut dyn Write,
    f: &SparseTensor,
    p: &PVector,
    method: &str,
    r: &SolveResult,
    json: bool,
) -> Result<(), Failure> {
    let residuals = residual_check(f, p, &r.vector)?;
    let report = NormReport {
        method,
        status: r.status,
        lambda: r.lambda,
        bracket: pair(r.bracket),
        q_value: r.q_value,
        iterations: r.iterations,
        eliminated_mode: r.reduced.as_ref().map(|x| x.omitted_mode() + 1),
        parts: r.vector.vector.parts(),
        residuals,
        note: r.note.as_deref(),
    };
    let text = if json {
        to_json(&report)
    } else {
        let mut s = format!(
            "method     {method}\nstatus     {}\nlambda     {}\n",
            status_name(r.status),
            r.lambda
        );
        if let Some(b) = r.bracket {
            s.push_str(&format!("bracket    [{}, {}]\n", b.lower, b.upper));
        }
        s.push_str(&format!("iterations {}\n", r.iterations));
        for (k, part) in r.vector.vector.parts().iter().enumerate() {
            s.push_str(&format!("x{} {:?}\n", k + 1, part));
        }
        s.trim_end().to_string()
    };
    writeln!(out, "{text}").map_err(|e| usage(e.to_string()))
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIter => "max_iter",
        SolveStatus::NumericalBreakdown => "numerical_breakdown",
    }
}

fn cmd_norm(
    out: &mut dyn Write,
    tensor: &Path,
    p: Vec<f64>,
    method: MethodArg,
    seed: Option<u64>,
    flags: SolverFlags,
) -> Result<i32, Failure> {
    let f = read_tensor_file(tensor)?;
    let pv = PVector::new(p.clone())?;
    if pv.len() != f.order() {
        return Err(usage(format!(
            "{} exponents given for a tensor of order {}",
            pv.len(),
            f.order()
        )));
    }
    let index = one_based_index(flags.index, f.order())?;
    let result = match method {
        MethodArg::Hgpm => {
            let cfg = SolverConfig {
                epsilon: flags.eps,
                max_iter: flags.max_iter,
                index_override: index,
                ..Default::default()
            };
            solve_hgpm(&f, &pv, &cfg)?
        }
        MethodArg::Pm => {
            if p.iter().any(|&v| v != p[0]) {
                return Err(usage("--method pm needs the same exponent for every mode"));
            }
            if index.is_some() {
                return Err(usage("--index applies to --method hgpm only"));
            }
            solve_pm(
                &f,
                p[0],
                &PmConfig {
                    epsilon: flags.eps,
                    max_iter: flags.max_iter,
                    ..Default::default()
                },
            )?
        }
        MethodArg::Oracle => {
            if index.is_some() {
                return Err(usage("--index applies to --method hgpm only"));
            }
            let seed = seed_from(seed)?;
            let best = oracle_norm(&f, &pv, DEFAULT_RESTARTS, seed)?;
            SolveResult {
                method: crate::hgpm::Method::Oracle,
                lambda: best.lambda,
                bracket: None,
                vector: best.clone(),
                reduced: None,
                trace: Vec::new(),
                iterations: 0,
                status: SolveStatus::Converged,
                q_value: best.lambda,
                note: Some(format!(
                    "multistart ascent, {DEFAULT_RESTARTS} restarts, seed {seed}"
                )),
            }
        }
    };
    if let Some(path) = &flags.trace {
        write_trace(path, &result.trace, result.lambda)?;
    }
    let name = match method {
        MethodArg::Hgpm => "hgpm",
        MethodArg::Pm => "pm",
        MethodArg::Oracle => "oracle",
    };
    render_solve(out, &f, &pv, name, &result, flags.json)?;
    Ok(status_code(result.status))
}

fn cmd_eigen(
    out: &mut dyn Write,
    tensor: &Path,
    blocks: Vec<usize>,
    p: Vec<f64>,
    flags: SolverFlags,
) -> Result<i32, Failure> {
    let f = read_tensor_file(tensor)?;
    let s = SymmetryStructure::for_tensor(&f, blocks, p)?;
    let index = one_based_index(flags.index, f.order())?;
    let cfg = SolverConfig {
        epsilon: flags.eps,
        max_iter: flags.max_iter,
        index_override: index,
        ..Default::default()
    };
    let r = solve_eigenproblem(&f, &s, &cfg)?;
    if let Some(path) = &flags.trace {
        write_trace(path, &r.solve.trace, r.lambda)?;
    }
    let report = EigenReport {
        status: r.solve.status,
        lambda: r.lambda,
        bracket: pair(r.solve.bracket),
        iterations: r.solve.iterations,
        blocks: s.block_sizes(),
        parts: &r.vectors,
        residuals: &r.residuals,
        notes: &r.notes,
    };
    let text = if flags.json {
        to_json(&report)
    } else {
        let mut t = format!(
            "status     {}\nlambda     {}\niterations {}\n",
            status_name(r.solve.status),
            r.lambda,
            r.solve.iterations
        );
        for (j, v) in r.vectors.iter().enumerate() {
            t.push_str(&format!("y{} {:?}\n", j + 1, v));
        }
        for n in &r.notes {
            t.push_str(&format!("note: {n}\n"));
        }
        t.trim_end().to_string()
    };
    writeln!(out, "{text}").map_err(|e| usage(e.to_string()))?;
    Ok(status_code(r.solve.status))
}

fn cmd_verify(
    out: &mut dyn Write,
    tensor: &Path,
    vector: &Path,
    p: Vec<f64>,
) -> Result<i32, Failure> {
    let f = read_tensor_file(tensor)?;
    let pv = PVector::new(p)?;
    let text =
        std::fs::read_to_string(vector).map_err(|e| usage(format!("{}: {e}", vector.display())))?;
    let file: VectorFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", vector.display())))?;
    if pv.len() != f.order() {
        return Err(usage(format!(
            "{} exponents given for a tensor of order {}",
            pv.len(),
            f.order()
        )));
    }
    let candidate = match file.omitted_mode {
        None => {
            let x = TupleVector::new(file.parts);
            if x.dims() != f.dims() {
                return Err(usage("vector parts do not match the tensor dimensions"));
            }
            SingularPair {
                lambda: file.lambda,
                vector: x,
            }
        }
        Some(i) => {
            let i = one_based_index(Some(i), f.order())?.expect("index given");
            let x = ReducedTupleVector::new(i, file.parts)?;
            let dims_ok = x.parts().len() + 1 == f.order()
                && x.modes().all(|k| x.part(k).len() == f.dims()[k]);
            if !dims_ok {
                return Err(usage("vector parts do not match the tensor dimensions"));
            }
            match lift_phi(
                &f,
                &pv,
                &ReducedSingularPair {
                    lambda: file.lambda,
                    vector: x,
                },
            ) {
                Ok(full) => full,
                Err(
                    e @ (Error::DualResidualTooLarge(_)
                    | Error::DegenerateGradient
                    | Error::LambdaNotPositive(_)),
                ) => {
                    writeln!(out, "fail: {e}").map_err(|e| usage(e.to_string()))?;
                    return Ok(6);
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    let residuals = residual_check(&f, &pv, &candidate)?;
    let pass = residuals.iter().all(|&r| r < VERIFY_TOLERANCE);
    let report = VerifyReport {
        lambda: candidate.lambda,
        residuals,
        pass,
    };
    writeln!(out, "{}", to_json(&report)).map_err(|e| usage(e.to_string()))?;
    Ok(if pass { 0 } else { 6 })
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Check { tensor, p } => cmd_check(out, &tensor, p),
        Command::Norm {
            tensor,
            p,
            method,
            seed,
            solver,
        } => cmd_norm(out, &tensor, p, method, seed, solver),
        Command::Eigen {
            tensor,
            blocks,
            p,
            solver,
        } => cmd_eigen(out, &tensor, blocks, p, solver),
        Command::Verify { tensor, vector, p } => cmd_verify(out, &tensor, &vector, p),
    };
    match outcome {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

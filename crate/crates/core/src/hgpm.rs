//! Higher-order generalized power method.
//!
//! One mode `i` is eliminated and the normalized map
//! `G(x) = (s_{i,k}(x) / ||s_{i,k}(x)||_{p_k})_{k != i}` is iterated on the
//! positive part of the reduced product sphere. Every step also yields
//! Collatz-Wielandt bounds `lambda_minus <= ||f|| <= lambda_plus` that tighten
//! monotonically, and the iteration stops once the bracket is narrower than
//! `epsilon`. The final iterate is lifted back to a full singular vector by
//! inserting the normalized `sigma_i(x)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::spectral::{normalize, p_norm, psi, quotient_q, s_maps, PVector, SingularPair};
use crate::structure::{admissible_indices, choose_index, is_weakly_irreducible};
use crate::tensor::{ReducedTupleVector, SparseTensor};

/// Where the iteration starts.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Start {
    /// Every part uniform on its unit sphere.
    #[default]
    Uniform,
    /// A strictly positive reduced vector; parts are normalized on entry and
    /// the omitted mode must match the eliminated mode.
    Given(ReducedTupleVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop once `lambda_plus - lambda_minus < epsilon`.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Mode to eliminate (0-based) instead of the automatic choice.
    pub index_override: Option<usize>,
    pub start: Start,
    /// An `s`-map component below `underflow_floor` times its part's maximum
    /// aborts the run.
    pub underflow_floor: f64,
    /// Keep every iterate in the trace.
    pub keep_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-10,
            max_iter: 10_000,
            index_override: None,
            start: Start::Uniform,
            underflow_floor: 1e-250,
            keep_iterates: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, value: f64, rel_slack: f64) -> bool {
        let slack = rel_slack * value.abs();
        self.lower - slack <= value && value <= self.upper + slack
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Iteration counter, starting at 1.
    pub k: usize,
    /// Certified bounds; absent for methods without them.
    pub bracket: Option<Bracket>,
    /// The method's running estimate of the norm.
    pub estimate: f64,
    /// The iterate after this step, when retention is enabled.
    pub x: Option<ReducedTupleVector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    NumericalBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hgpm,
    Pm,
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub method: Method,
    /// Bracket midpoint for the power method with bounds, otherwise the
    /// quotient of the returned vector.
    pub lambda: f64,
    pub bracket: Option<Bracket>,
    pub vector: SingularPair,
    /// Final reduced iterate and its omitted mode, for methods that have one.
    pub reduced: Option<ReducedTupleVector>,
    pub trace: Vec<IterationRecord>,
    pub iterations: usize,
    pub status: SolveStatus,
    /// `Q` evaluated at `vector`.
    pub q_value: f64,
    pub note: Option<String>,
}

fn check_positive_unit(x: &ReducedTupleVector) -> Result<()> {
    for k in x.modes() {
        if !x.part(k).iter().all(|&v| v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveComponent(k));
        }
    }
    Ok(())
}

/// Collatz-Wielandt bounds from a precomputed `z = s(x)`.
fn bounds_from(p: &PVector, x: &ReducedTupleVector, z: &ReducedTupleVector) -> Bracket {
    let i = x.omitted_mode();
    let m1 = (p.len() - 1) as f64;
    let denom = p.conj(i) * m1;
    let (mut lower, mut upper) = (1.0, 1.0);
    for k in x.modes() {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (zv, xv) in z.part(k).iter().zip(x.part(k)) {
            let r = zv / xv;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let e = (p.get(k) - 1.0) / denom;
        lower *= lo.powf(e);
        upper *= hi.powf(e);
    }
    Bracket { lower, upper }
}

/// Normalizes the `s`-map parts, failing when a component underflows.
fn normalize_step(p: &PVector, z: &ReducedTupleVector, floor: f64) -> Result<ReducedTupleVector> {
    let mut parts = Vec::with_capacity(z.parts().len());
    for k in z.modes() {
        let part = z.part(k);
        let max = part.iter().fold(0.0f64, |a, &v| a.max(v));
        if !(max > 0.0 && max.is_finite()) {
            return Err(Error::NumericalBreakdown(format!(
                "s-map for mode {} vanished or overflowed",
                k + 1
            )));
        }
        if let Some(j) = part.iter().position(|&v| !(v > floor * max)) {
            return Err(Error::NumericalBreakdown(format!(
                "component {} of the s-map for mode {} underflowed",
                j + 1,
                k + 1
            )));
        }
        parts.push(normalize(part, p.get(k)).expect("positive part"));
    }
    ReducedTupleVector::new(z.omitted_mode(), parts)
}

/// One application of the normalized map `G`.
pub fn g_step(f: &SparseTensor, p: &PVector, x: &ReducedTupleVector) -> Result<ReducedTupleVector> {
    check_positive_unit(x)?;
    let z = s_maps(f, p, x)?;
    normalize_step(p, &z, SolverConfig::default().underflow_floor)
}

/// Lower and upper Collatz-Wielandt bounds on the norm at a positive point.
pub fn cw_bounds(f: &SparseTensor, p: &PVector, x: &ReducedTupleVector) -> Result<Bracket> {
    check_positive_unit(x)?;
    let z = s_maps(f, p, x)?;
    Ok(bounds_from(p, x, &z))
}

/// [`cw_bounds`] at many points; results are in input order whatever the
/// execution mode.
pub fn cw_bounds_batch(
    f: &SparseTensor,
    p: &PVector,
    points: &[ReducedTupleVector],
    exec: Execution,
) -> Vec<Result<Bracket>> {
    map_indexed(exec, points.len(), |k| cw_bounds(f, p, &points[k]))
}

/// Product Hilbert-type metric
/// `sum_l (p_l - 1) ln(max_j x_{l,j}/y_{l,j} / min_j x_{l,j}/y_{l,j})`.
pub fn hilbert_metric(p: &PVector, x: &ReducedTupleVector, y: &ReducedTupleVector) -> Result<f64> {
    if x.omitted_mode() != y.omitted_mode() || x.order() != y.order() || x.order() != p.len() {
        return Err(Error::ShapeMismatch(
            "metric arguments live in different spaces".into(),
        ));
    }
    check_positive_unit(x)?;
    check_positive_unit(y)?;
    let mut total = 0.0;
    for k in x.modes() {
        if x.part(k).len() != y.part(k).len() {
            return Err(Error::ShapeMismatch(format!(
                "part lengths differ in mode {k}"
            )));
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (a, b) in x.part(k).iter().zip(y.part(k)) {
            let r = a / b;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        total += (p.get(k) - 1.0) * (hi.ln() - lo.ln());
    }
    Ok(total)
}

/// Uniform positive start on the reduced unit sphere.
pub fn uniform_start(f: &SparseTensor, p: &PVector, i: usize) -> ReducedTupleVector {
    let parts = (0..f.order())
        .filter(|&k| k != i)
        .map(|k| {
            let d = f.dims()[k];
            vec![(d as f64).powf(-1.0 / p.get(k)); d]
        })
        .collect();
    ReducedTupleVector::new(i, parts).expect("valid mode")
}

/// Checks the shared preconditions and picks the mode to eliminate.
pub(crate) fn prepare(
    f: &SparseTensor,
    p: &PVector,
    index_override: Option<usize>,
) -> Result<usize> {
    p.check_order(f)?;
    if f.is_zero() {
        return Err(Error::ZeroTensor);
    }
    if !f.is_nonnegative() {
        return Err(Error::NegativeEntry);
    }
    let i = match index_override {
        Some(i) if i >= f.order() => {
            return Err(Error::InvalidArgument(format!(
                "mode {} out of range",
                i + 1
            )));
        }
        Some(i) if admissible_indices(p).contains(&i) => i,
        Some(_) => return Err(Error::ConditionViolated),
        None => choose_index(p).ok_or(Error::ConditionViolated)?,
    };
    if !is_weakly_irreducible(f)? {
        return Err(Error::NotWeaklyIrreducible);
    }
    Ok(i)
}

fn start_vector(
    f: &SparseTensor,
    p: &PVector,
    i: usize,
    start: &Start,
) -> Result<ReducedTupleVector> {
    match start {
        Start::Uniform => Ok(uniform_start(f, p, i)),
        Start::Given(x) => {
            if x.omitted_mode() != i || x.order() != f.order() {
                return Err(Error::ShapeMismatch(format!(
                    "start vector omits mode {}, solver eliminates mode {}",
                    x.omitted_mode() + 1,
                    i + 1
                )));
            }
            let mut parts = Vec::new();
            for k in x.modes() {
                if x.part(k).len() != f.dims()[k] {
                    return Err(Error::ShapeMismatch(format!(
                        "start part for mode {} has wrong length",
                        k + 1
                    )));
                }
                if !x.part(k).iter().all(|&v| v > 0.0 && v.is_finite()) {
                    return Err(Error::NonPositiveComponent(k));
                }
                parts.push(normalize(x.part(k), p.get(k)).expect("positive part"));
            }
            ReducedTupleVector::new(i, parts)
        }
    }
}

/// Inserts `sigma_i(x) / ||sigma_i(x)||_{p_i}` into the omitted slot.
pub(crate) fn assemble(
    f: &SparseTensor,
    p: &PVector,
    x: &ReducedTupleVector,
) -> Result<SingularPair> {
    let i = x.omitted_mode();
    let g = f.grad_mode_reduced(x)?;
    let s = psi(p.conj(i), &g);
    let part = normalize(&s, p.get(i)).ok_or(Error::DegenerateGradient)?;
    let vector = x.insert(part);
    let lambda = quotient_q(f, p, &vector)?;
    Ok(SingularPair { lambda, vector })
}

pub fn solve_hgpm(f: &SparseTensor, p: &PVector, config: &SolverConfig) -> Result<SolveResult> {
    solve_hgpm_observed(f, p, config, &mut |_, _| Ok(()))
}

/// [`solve_hgpm`] with a hook called on every new iterate; an `Err` from the
/// hook ends the run with [`SolveStatus::NumericalBreakdown`].
pub(crate) fn solve_hgpm_observed(
    f: &SparseTensor,
    p: &PVector,
    config: &SolverConfig,
    observe: &mut dyn FnMut(usize, &ReducedTupleVector) -> std::result::Result<(), String>,
) -> Result<SolveResult> {
    if !(config.epsilon > 0.0) || config.max_iter == 0 {
        return Err(Error::InvalidArgument(
            "epsilon must be positive and max_iter at least 1".into(),
        ));
    }
    let i = prepare(f, p, config.index_override)?;
    let mut x = start_vector(f, p, i, &config.start)?;
    let mut trace = Vec::new();
    let mut bracket = None;
    let mut status = SolveStatus::MaxIter;
    let mut note = None;
    let mut iterations = 0;

    for k in 1..=config.max_iter {
        let z = s_maps(f, p, &x)?;
        let next = match normalize_step(p, &z, config.underflow_floor) {
            Ok(next) => next,
            Err(e) => {
                status = SolveStatus::NumericalBreakdown;
                note = Some(e.to_string());
                break;
            }
        };
        let b = bounds_from(p, &x, &z);
        if let Err(msg) = observe(k, &next) {
            status = SolveStatus::NumericalBreakdown;
            note = Some(msg);
            break;
        }
        trace.push(IterationRecord {
            k,
            bracket: Some(b),
            estimate: b.midpoint(),
            x: config.keep_iterates.then(|| next.clone()),
        });
        bracket = Some(b);
        x = next;
        iterations = k;
        if b.width() < config.epsilon {
            status = SolveStatus::Converged;
            break;
        }
    }

    let vector = assemble(f, p, &x)?;
    let q_value = vector.lambda;
    let lambda = bracket.map_or(q_value, |b| b.midpoint());
    Ok(SolveResult {
        method: Method::Hgpm,
        lambda,
        bracket,
        vector: SingularPair {
            lambda,
            vector: vector.vector,
        },
        reduced: Some(x),
        trace,
        iterations,
        status,
        q_value,
        note,
    })
}

/// Geometric mean of `||x^{k+1} - x*||_2 / ||x^k - x*||_2` over the last
/// quartile of steps taken before the error falls to 100 machine epsilons.
pub fn estimate_rate(trace: &[IterationRecord], reference: &ReducedTupleVector) -> Result<f64> {
    let errors: Vec<f64> = trace
        .iter()
        .map(|r| r.x.as_ref().map(|x| x.l2_distance(reference)))
        .collect::<Option<Vec<f64>>>()
        .ok_or(Error::TraceTooShort)?;
    let floor = 100.0 * f64::EPSILON;
    let cut = errors
        .iter()
        .position(|&e| e <= floor)
        .unwrap_or(errors.len().saturating_sub(1));
    if cut == 0 {
        return Err(Error::TraceTooShort);
    }
    let ratios: Vec<f64> = (0..cut).map(|k| errors[k + 1] / errors[k]).collect();
    let take = ratios.len().div_ceil(4);
    let tail = &ratios[ratios.len() - take..];
    if tail.contains(&0.0) {
        return Ok(0.0);
    }
    Ok((tail.iter().map(|r| r.ln()).sum::<f64>() / take as f64).exp())
}

/// `||x||_{p}` of every part; used by tests and diagnostics.
pub fn part_norms(p: &PVector, x: &ReducedTupleVector) -> Vec<f64> {
    x.modes().map(|k| p_norm(x.part(k), p.get(k))).collect()
}

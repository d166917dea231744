//! Duality maps, Rayleigh-type quotients and the singular-system residuals.
//!
//! A singular pair `(lambda, x)` with every `x_k` on its unit `p_k`-sphere
//! satisfies `sigma_i(x) = lambda^(p'_i - 1) x_i` for every mode `i`, where
//! `sigma_i(x) = sign(f(x)) psi_{p'_i}(grad_i f(x))`. Eliminating mode `i`
//! gives the reduced system `s_{i,k}(x) = lambda^(p'_i (p'_k - 1)) x_k` on the
//! remaining modes, which is what the power iteration works with.

use crate::error::{Error, Result};
use crate::tensor::{ReducedTupleVector, SparseTensor, TupleVector};

/// Relative residual of the reduced system above which [`lift_phi`] refuses
/// to lift a pair.
pub const DUAL_RESIDUAL_GATE: f64 = 1e-6;

/// Hölder exponents `(p_1, ..., p_m)`, each in `(1, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PVector {
    p: Vec<f64>,
}

impl PVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = p.iter().find(|&&v| !(v > 1.0 && v.is_finite())) {
            return Err(Error::InvalidExponent(bad));
        }
        Ok(PVector { p })
    }

    /// The same exponent for all `m` modes.
    pub fn uniform(m: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; m])
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.p[k]
    }

    /// Hölder conjugate `p_k / (p_k - 1)`.
    pub fn conj(&self, k: usize) -> f64 {
        self.p[k] / (self.p[k] - 1.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub(crate) fn check_order(&self, f: &SparseTensor) -> Result<()> {
        if self.len() != f.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} exponents given for a tensor of order {}",
                self.len(),
                f.order()
            )));
        }
        Ok(())
    }
}

/// `l^p` norm, computed on the max-scaled vector to stay clear of overflow.
pub fn p_norm(v: &[f64], p: f64) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = v.iter().map(|x| (x.abs() / scale).powf(p)).sum();
    scale * sum.powf(1.0 / p)
}

pub(crate) fn normalize(v: &[f64], p: f64) -> Option<Vec<f64>> {
    let n = p_norm(v, p);
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

pub(crate) fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Componentwise `|v_j|^(q-1) sign(v_j)`; zero maps to zero.
pub fn psi(q: f64, v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&t| {
            if t == 0.0 {
                0.0
            } else {
                t.abs().powf(q - 1.0).copysign(t)
            }
        })
        .collect()
}

/// A singular value with its vector on the unit product sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularPair {
    pub lambda: f64,
    pub vector: TupleVector,
}

/// A critical value of the reduced quotient with its reduced vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSingularPair {
    pub lambda: f64,
    pub vector: ReducedTupleVector,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sign of `f(x)`, short-circuited to +1 when both `f` and `x` are nonnegative.
fn form_sign(f: &SparseTensor, x: &TupleVector) -> Result<f64> {
    if f.is_nonnegative() && x.is_nonnegative() {
        return Ok(1.0);
    }
    Ok(sign(f.evaluate(x)?))
}

/// `|f(x)| / prod_k ||x_k||_{p_k}`.
pub fn quotient_q(f: &SparseTensor, p: &PVector, x: &TupleVector) -> Result<f64> {
    p.check_order(f)?;
    let mut denom = 1.0;
    for (k, part) in x.parts().iter().enumerate().take(p.len()) {
        let n = p_norm(part, p.get(k));
        if n == 0.0 {
            return Err(Error::ZeroPart(k));
        }
        denom *= n;
    }
    Ok(f.evaluate(x)?.abs() / denom)
}

/// `sign(f(x)) psi_{p'_i}(grad_i f(x))`.
pub fn sigma(f: &SparseTensor, p: &PVector, i: usize, x: &TupleVector) -> Result<Vec<f64>> {
    p.check_order(f)?;
    let g = f.grad_mode(i, x)?;
    let s = form_sign(f, x)?;
    let mut out = psi(p.conj(i), &g);
    if s != 1.0 {
        out.iter_mut().for_each(|v| *v *= s);
    }
    Ok(out)
}

/// `psi_{p'_i}(grad_i f(x))` for the omitted mode `i` of `x`.
fn dual_slot(f: &SparseTensor, p: &PVector, x: &ReducedTupleVector) -> Result<Vec<f64>> {
    let g = f.grad_mode_reduced(x)?;
    Ok(psi(p.conj(x.omitted_mode()), &g))
}

/// The map `s_{i,k}` for the omitted mode `i` of `x` and a kept mode `k`.
pub fn s_map(f: &SparseTensor, p: &PVector, k: usize, x: &ReducedTupleVector) -> Result<Vec<f64>> {
    p.check_order(f)?;
    let y = dual_slot(f, p, x)?;
    let g = f.grad_mode_substituted(k, x, &y)?;
    Ok(psi(p.conj(k), &g))
}

/// All maps `s_{i,k}`, `k != i`, from two passes over the entries.
pub fn s_maps(f: &SparseTensor, p: &PVector, x: &ReducedTupleVector) -> Result<ReducedTupleVector> {
    p.check_order(f)?;
    let y = dual_slot(f, p, x)?;
    let grads = f.grad_all_substituted(x, &y);
    let parts = x
        .modes()
        .zip(grads)
        .map(|(k, g)| psi(p.conj(k), &g))
        .collect();
    ReducedTupleVector::new(x.omitted_mode(), parts)
}

/// `||grad_i f(x)||_{p'_i} / S_i(x)` for the omitted mode `i` of `x`.
pub fn quotient_qi(f: &SparseTensor, p: &PVector, x: &ReducedTupleVector) -> Result<f64> {
    p.check_order(f)?;
    let mut denom = 1.0;
    for k in x.modes() {
        let n = p_norm(x.part(k), p.get(k));
        if n == 0.0 {
            return Err(Error::ZeroPart(k));
        }
        denom *= n;
    }
    let g = f.grad_mode_reduced(x)?;
    Ok(p_norm(&g, p.conj(x.omitted_mode())) / denom)
}

/// Largest relative residual `||s_{i,k}(x) / lambda^(p'_i (p'_k - 1)) - x_k||_2`
/// over the kept modes.
pub fn dual_residual(f: &SparseTensor, p: &PVector, pair: &ReducedSingularPair) -> Result<f64> {
    let x = &pair.vector;
    let i = x.omitted_mode();
    let z = s_maps(f, p, x)?;
    let mut worst = 0.0f64;
    for k in x.modes() {
        let scale = pair.lambda.powf(p.conj(i) * (p.conj(k) - 1.0));
        let scaled: Vec<f64> = z.part(k).iter().map(|v| v / scale).collect();
        worst = worst.max(l2_distance(&scaled, x.part(k)));
    }
    Ok(worst)
}

/// Lifts a reduced critical pair to a full singular pair by filling the
/// omitted slot with `psi_{p'_i}(varsigma lambda^{-1} grad_i f(x))`.
///
/// The inserted part is rescaled onto the unit `p_i`-sphere; at an exact
/// critical point the rescaling is the identity.
pub fn lift_phi(f: &SparseTensor, p: &PVector, pair: &ReducedSingularPair) -> Result<SingularPair> {
    p.check_order(f)?;
    let lambda = pair.lambda;
    if !(lambda > 0.0) {
        return Err(Error::LambdaNotPositive(lambda));
    }
    let x = &pair.vector;
    let i = x.omitted_mode();
    let g = f.grad_mode_reduced(x)?;
    if g.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateGradient);
    }
    let r = dual_residual(f, p, pair)?;
    if !(r <= DUAL_RESIDUAL_GATE) {
        return Err(Error::DualResidualTooLarge(r));
    }
    let scaled: Vec<f64> = g.iter().map(|v| v / lambda).collect();
    let y = psi(p.conj(i), &scaled);
    let candidate = x.insert(y.clone());
    let varsigma = form_sign(f, &candidate)?;
    if varsigma == 0.0 {
        return Err(Error::DegenerateGradient);
    }
    let signed: Vec<f64> = y.iter().map(|v| v * varsigma).collect();
    let part = normalize(&signed, p.get(i)).ok_or(Error::DegenerateGradient)?;
    Ok(SingularPair {
        lambda,
        vector: x.insert(part),
    })
}

/// Per-mode residuals `||sigma_i(x) - lambda^(p'_i - 1) x_i||_2`.
pub fn residual_check(f: &SparseTensor, p: &PVector, candidate: &SingularPair) -> Result<Vec<f64>> {
    p.check_order(f)?;
    let x = &candidate.vector;
    (0..f.order())
        .map(|i| {
            let s = sigma(f, p, i, x)?;
            let scale = candidate.lambda.powf(p.conj(i) - 1.0);
            let target: Vec<f64> = x.part(i).iter().map(|v| v * scale).collect();
            Ok(l2_distance(&s, &target))
        })
        .collect()
}

/// A-priori bound `min_i max_l d_i^(1/p'_i) d/dx_{i,l} |f|(e)` on every
/// singular value.
pub fn spectrum_upper_bound(f: &SparseTensor, p: &PVector) -> Result<f64> {
    p.check_order(f)?;
    if f.is_zero() {
        return Err(Error::ZeroTensor);
    }
    let abs = f.abs();
    let ones = TupleVector::ones(f.dims());
    let mut best = f64::INFINITY;
    for i in 0..f.order() {
        let g = abs.grad_mode(i, &ones)?;
        let gmax = g.iter().fold(0.0f64, |m, &v| m.max(v));
        let d = f.dims()[i] as f64;
        best = best.min(d.powf(1.0 / p.conj(i)) * gmax);
    }
    Ok(best)
}

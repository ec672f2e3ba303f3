//! Modulars and Luxemburg norms for variable-exponent Lebesgue spaces and the
//! two mixed sequence-space norms built on them.
//!
//! All norms are computed by monotone bisection on the modular. The modular
//! is nonincreasing in the scaling parameter, so bisection is globally safe;
//! brackets stop at relative width 1e-12 or 200 iterations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exponents::VariableExponent;
use crate::grid::{same_grid, Grid, SampledFunction};
use crate::par;

const REL_TOL: f64 = 1e-12;
const MAX_ITERS: usize = 200;

/// Ordered list of sampled functions on a shared grid; `index_origin` is the
/// sequence index of the first term (levels may run over any integer window).
#[derive(Clone, Debug)]
pub struct FunctionSequence {
    terms: Vec<SampledFunction>,
    index_origin: i64,
}

impl FunctionSequence {
    pub fn new(terms: Vec<SampledFunction>, index_origin: i64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("function sequence must be nonempty".into()));
        }
        let g = *terms[0].grid();
        for t in &terms[1..] {
            same_grid(&g, t.grid())?;
        }
        Ok(FunctionSequence { terms, index_origin })
    }

    pub fn from_terms(terms: Vec<SampledFunction>) -> Result<Self> {
        Self::new(terms, 0)
    }

    pub fn grid(&self) -> &Grid {
        self.terms[0].grid()
    }

    pub fn terms(&self) -> &[SampledFunction] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_origin(&self) -> i64 {
        self.index_origin
    }

    pub fn scale(&self, c: Complex64) -> Self {
        FunctionSequence {
            terms: self.terms.iter().map(|t| t.scale(c)).collect(),
            index_origin: self.index_origin,
        }
    }
}

#[inline]
fn phi(p: f64, t: f64) -> f64 {
    if p.is_infinite() {
        if t <= 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        t.powf(p)
    }
}

/// Modular of `scale · |f|` against p(·); +∞ propagates through.
fn modular_of_abs(grid: &Grid, abs: &[f64], p: &VariableExponent, scale: f64) -> f64 {
    let cell = grid.spacing().powi(grid.dim() as i32);
    let mut acc = 0.0;
    for (&a, &pv) in abs.iter().zip(p.samples()) {
        let v = phi(pv, a * scale);
        if v.is_infinite() {
            return f64::INFINITY;
        }
        acc += if pv.is_infinite() { 0.0 } else { v * cell };
    }
    acc
}

/// Integral modular `∫ φ_{p(x)}(|f(x)|) dx`; +∞ when the essential-sup part
/// exceeds 1 anywhere on the infinite-exponent region.
pub fn modular_lp(f: &SampledFunction, p: &VariableExponent) -> Result<f64> {
    same_grid(f.grid(), p.grid())?;
    Ok(modular_of_abs(f.grid(), &f.abs_values(), p, 1.0))
}

/// Smallest feasible scaling for a nonincreasing constraint `eval(λ) <= 1`.
/// Returns `None` when no feasible λ exists within the doubling budget.
fn bisect_smallest(mut hi: f64, eval: impl Fn(f64) -> f64) -> Option<f64> {
    if !(hi > 0.0) || !hi.is_finite() {
        hi = 1.0;
    }
    let mut doublings = 0;
    while eval(hi) > 1.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 400 || !hi.is_finite() {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..MAX_ITERS {
        if hi - lo <= REL_TOL * hi || hi < 1e-290 {
            break;
        }
        let mid = 0.5 * (hi + lo);
        if eval(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Luxemburg norm of a nonnegative sample array.
pub(crate) fn luxemburg_of_abs(grid: &Grid, abs: &[f64], p: &VariableExponent) -> Result<f64> {
    let max_abs = abs.iter().cloned().fold(0.0, f64::max);
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    if !max_abs.is_finite() {
        return Ok(f64::INFINITY);
    }
    let measure = grid.measure();
    let bump = if p.p_minus().is_finite() {
        measure.max(1.0).powf(1.0 / p.p_minus())
    } else {
        1.0
    };
    let hi0 = max_abs * bump.max(1.0);
    bisect_smallest(hi0, |lambda| modular_of_abs(grid, abs, p, 1.0 / lambda))
        .ok_or_else(|| Error::Numeric("luxemburg bisection failed to bracket".into()))
}

/// Luxemburg norm `inf { λ > 0 : ρ(f/λ) <= 1 }` by monotone bisection.
pub fn luxemburg_norm(f: &SampledFunction, p: &VariableExponent) -> Result<f64> {
    same_grid(f.grid(), p.grid())?;
    luxemburg_of_abs(f.grid(), &f.abs_values(), p)
}

/// Inner infimum of the sequence modular for one term: the smallest λ with
/// `ρ_p(a · λ^{-1/q(·)}) <= 1`. Where q(x) = ∞ the scaling factor is 1
/// (λ^{1/∞} = 1), so those contributions decide feasibility alone; an empty
/// constraint set yields +∞.
fn inner_inf_general(grid: &Grid, abs: &[f64], p: &VariableExponent, q: &VariableExponent) -> f64 {
    if abs.iter().all(|&a| a == 0.0) {
        return 0.0;
    }
    let eval = |lambda: f64| -> f64 {
        let cell = grid.spacing().powi(grid.dim() as i32);
        let ln_lambda = lambda.ln();
        let mut acc = 0.0;
        for ((&a, &pv), &qv) in abs.iter().zip(p.samples()).zip(q.samples()) {
            let scale = if qv.is_infinite() { 1.0 } else { (-ln_lambda / qv).exp() };
            let v = phi(pv, a * scale);
            if v.is_infinite() {
                return f64::INFINITY;
            }
            acc += if pv.is_infinite() { 0.0 } else { v * cell };
        }
        acc
    };
    match bisect_smallest(1.0, eval) {
        Some(v) => v,
        None => f64::INFINITY,
    }
}

/// Sequence modular by its defining expression: a sum of per-term infima.
pub fn modular_lqlp_general(
    fs: &FunctionSequence,
    p: &VariableExponent,
    q: &VariableExponent,
) -> Result<f64> {
    same_grid(fs.grid(), p.grid())?;
    same_grid(fs.grid(), q.grid())?;
    let grid = *fs.grid();
    let parts = par::map_slice(fs.terms(), |t| inner_inf_general(&grid, &t.abs_values(), p, q));
    Ok(parts.into_iter().sum())
}

/// Sequence modular by the simplified expression available for q⁺ < ∞:
/// `Σ_ν ‖ |f_ν|^{q(·)} ‖_{L_{p(·)/q(·)}}`.
pub fn modular_lqlp_fast(
    fs: &FunctionSequence,
    p: &VariableExponent,
    q: &VariableExponent,
) -> Result<f64> {
    same_grid(fs.grid(), p.grid())?;
    same_grid(fs.grid(), q.grid())?;
    if q.has_infinity() {
        return Err(Error::Precondition("fast sequence modular requires q+ < infinity".into()));
    }
    let grid = *fs.grid();
    let p_over_q = VariableExponent::ratio(p, q)?;
    let parts: Vec<Result<f64>> = par::map_slice(fs.terms(), |t| {
        let powered: Vec<f64> = t
            .abs_values()
            .iter()
            .zip(q.samples())
            .map(|(&a, &qv)| a.powf(qv))
            .collect();
        luxemburg_of_abs(&grid, &powered, &p_over_q)
    });
    let mut total = 0.0;
    for part in parts {
        total += part?;
    }
    Ok(total)
}

/// Sequence modular for ℓ_{q(·)}(L_{p(·)}); dispatches to the simplified
/// expression when q⁺ < ∞, otherwise to the defining one.
pub fn modular_lqlp(
    fs: &FunctionSequence,
    p: &VariableExponent,
    q: &VariableExponent,
) -> Result<f64> {
    if q.has_infinity() {
        modular_lqlp_general(fs, p, q)
    } else {
        modular_lqlp_fast(fs, p, q)
    }
}

/// Norm of ℓ_{q(·)}(L_{p(·)}): outer bisection on μ over the sequence modular.
pub fn norm_lqlp(
    fs: &FunctionSequence,
    p: &VariableExponent,
    q: &VariableExponent,
) -> Result<f64> {
    same_grid(fs.grid(), p.grid())?;
    same_grid(fs.grid(), q.grid())?;
    let grid = *fs.grid();
    let abs: Vec<Vec<f64>> = fs.terms().iter().map(|t| t.abs_values()).collect();
    let max_abs = abs
        .iter()
        .map(|a| a.iter().cloned().fold(0.0, f64::max))
        .fold(0.0, f64::max);
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    let use_fast = !q.has_infinity();
    let p_over_q = if use_fast { Some(VariableExponent::ratio(p, q)?) } else { None };

    let eval = |mu: f64| -> f64 {
        let inv = 1.0 / mu;
        let parts = par::map_slice(&abs, |a| {
            if use_fast {
                let powered: Vec<f64> = a
                    .iter()
                    .zip(q.samples())
                    .map(|(&v, &qv)| (v * inv).powf(qv))
                    .collect();
                luxemburg_of_abs(&grid, &powered, p_over_q.as_ref().unwrap())
                    .unwrap_or(f64::INFINITY)
            } else {
                let scaled: Vec<f64> = a.iter().map(|&v| v * inv).collect();
                inner_inf_general(&grid, &scaled, p, q)
            }
        });
        let mut total = 0.0;
        for v in parts {
            if v.is_infinite() {
                return f64::INFINITY;
            }
            total += v;
        }
        total
    };

    let measure = grid.measure();
    let bump = if p.p_minus().is_finite() {
        measure.max(1.0).powf(1.0 / p.p_minus())
    } else {
        1.0
    };
    let terms_bump = (fs.len() as f64).powf(1.0 / q.p_minus().min(1.0).max(1e-3));
    let hi0 = max_abs * bump.max(1.0) * terms_bump.max(1.0);
    bisect_smallest(hi0, eval)
        .ok_or_else(|| Error::Numeric("sequence norm bisection failed to bracket".into()))
}

/// Norm of L_{p(·)}(ℓ_{q(·)}): pointwise ℓ_{q(x)} aggregation over the
/// sequence index, then a single Luxemburg norm. The aggregation is
/// 1-homogeneous, so no outer bisection is needed.
pub fn norm_lplq(
    fs: &FunctionSequence,
    p: &VariableExponent,
    q: &VariableExponent,
) -> Result<f64> {
    same_grid(fs.grid(), p.grid())?;
    same_grid(fs.grid(), q.grid())?;
    let grid = *fs.grid();
    let abs: Vec<Vec<f64>> = fs.terms().iter().map(|t| t.abs_values()).collect();
    let aggregated: Vec<f64> = par::map_indices(grid.len(), |x| {
        let qv = q.samples()[x];
        if qv.is_infinite() {
            abs.iter().map(|a| a[x]).fold(0.0, f64::max)
        } else {
            let s: f64 = abs.iter().map(|a| a[x].powf(qv)).sum();
            s.powf(1.0 / qv)
        }
    });
    luxemburg_of_abs(&grid, &aggregated, p)
}

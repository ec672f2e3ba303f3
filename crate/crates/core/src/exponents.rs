//! Variable exponents p(·), q(·), smoothness functions s(·) and admissible
//! weight sequences, together with the grid-based regularity estimates that
//! feed the threshold formulas elsewhere.
//!
//! Continuum conditions (log-Hölder continuity, weight admissibility) are
//! checked on sampled pairs only; that is the testable surrogate this crate
//! works with. Pair scans are exhaustive up to a fixed budget and switch to a
//! seeded random subsample beyond it, so results stay deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::par;

/// Exhaustive pair scans are used while `len^2` stays below this budget.
const PAIR_BUDGET: u128 = 1 << 25;
/// Number of sampled pairs above the budget (seeded, deterministic).
const SAMPLED_PAIRS: usize = 200_000;
const PAIR_SCAN_SEED: u64 = 0x9d5a_b3c1_07e4_f821;

enum PairPlan {
    Exhaustive(usize),
    Sampled(Vec<(u32, u32)>),
}

fn pair_plan(len: usize) -> PairPlan {
    if (len as u128) * (len as u128) <= PAIR_BUDGET {
        PairPlan::Exhaustive(len)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SCAN_SEED);
        let pairs = (0..SAMPLED_PAIRS)
            .map(|_| (rng.gen_range(0..len as u32), rng.gen_range(0..len as u32)))
            .filter(|(a, b)| a != b)
            .collect();
        PairPlan::Sampled(pairs)
    }
}

/// Maximum of `score(i, j)` over grid pairs, exhaustive or subsampled.
fn max_over_pairs(grid: &Grid, score: impl Fn(usize, usize) -> f64 + Sync) -> f64 {
    match pair_plan(grid.len()) {
        PairPlan::Exhaustive(len) => {
            let rows = par::map_indices(len, |i| {
                let mut best = f64::NEG_INFINITY;
                for j in 0..len {
                    if i != j {
                        best = best.max(score(i, j));
                    }
                }
                best
            });
            rows.into_iter().fold(f64::NEG_INFINITY, f64::max)
        }
        PairPlan::Sampled(pairs) => {
            let vals = par::map_slice(&pairs, |&(a, b)| score(a as usize, b as usize));
            vals.into_iter().fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// Largest value of `|g(x)-g(y)| · log(e + 1/dist(x,y))` over sampled pairs,
/// a lower estimate of the log-Hölder constant of `g`.
pub fn estimate_log_holder(grid: &Grid, samples: &[f64]) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(Error::GridMismatch("sample count mismatch".into()));
    }
    if grid.len() < 2 {
        return Err(Error::InvalidInput("need at least two grid points".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample in log-Hölder estimate".into()));
    }
    let est = max_over_pairs(grid, |i, j| {
        let d = grid.periodic_dist(i, j);
        (samples[i] - samples[j]).abs() * (std::f64::consts::E + 1.0 / d).ln()
    });
    Ok(est.max(0.0))
}

/// Sampled integrability exponent p(·) with values in (0, ∞].
#[derive(Clone, Debug)]
pub struct VariableExponent {
    grid: Grid,
    samples: Vec<f64>,
    p_minus: f64,
    p_plus: f64,
    infinity_mask: Vec<bool>,
    clog_estimate: f64,
}

impl VariableExponent {
    /// Build from samples; finite entries must be strictly positive.
    /// `clog_estimate` is the log-Hölder estimate of 1/p.
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch("exponent sample count mismatch".into()));
        }
        let mut p_minus = f64::INFINITY;
        let mut p_plus: f64 = 0.0;
        let mut infinity_mask = vec![false; samples.len()];
        for (i, &v) in samples.iter().enumerate() {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "exponent sample at index {i} must be positive, got {v}"
                )));
            }
            if v.is_infinite() {
                infinity_mask[i] = true;
                p_plus = f64::INFINITY;
            } else {
                p_minus = p_minus.min(v);
                p_plus = p_plus.max(v);
            }
        }
        let reciprocal: Vec<f64> = samples.iter().map(|&v| if v.is_infinite() { 0.0 } else { 1.0 / v }).collect();
        let clog_estimate = estimate_log_holder(&grid, &reciprocal)?;
        Ok(VariableExponent { grid, samples, p_minus, p_plus, infinity_mask, clog_estimate })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    /// Pointwise quotient p(·)/q(·); used by the simplified mixed modular.
    pub fn ratio(p: &VariableExponent, q: &VariableExponent) -> Result<Self> {
        crate::grid::same_grid(&p.grid, &q.grid)?;
        let samples = p
            .samples
            .iter()
            .zip(&q.samples)
            .map(|(&a, &b)| if a.is_infinite() { f64::INFINITY } else { a / b })
            .collect();
        Self::new(p.grid, samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn infinity_mask(&self) -> &[bool] {
        &self.infinity_mask
    }

    pub fn has_infinity(&self) -> bool {
        self.p_plus.is_infinite()
    }

    pub fn is_constant(&self) -> bool {
        self.samples.iter().all(|&v| v == self.samples[0])
    }

    /// Log-Hölder estimate of 1/p on the grid.
    pub fn clog_estimate(&self) -> f64 {
        self.clog_estimate
    }
}

/// Sampled smoothness index s(·).
#[derive(Clone, Debug)]
pub struct SmoothnessFunction {
    grid: Grid,
    samples: Vec<f64>,
    s_minus: f64,
    s_plus: f64,
    clog_estimate: f64,
}

impl SmoothnessFunction {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch("smoothness sample count mismatch".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("smoothness samples must be finite".into()));
        }
        let s_minus = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let s_plus = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let clog_estimate = estimate_log_holder(&grid, &samples)?;
        Ok(SmoothnessFunction { grid, samples, s_minus, s_plus, clog_estimate })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn s_minus(&self) -> f64 {
        self.s_minus
    }

    pub fn s_plus(&self) -> f64 {
        self.s_plus
    }

    pub fn clog_estimate(&self) -> f64 {
        self.clog_estimate
    }
}

/// Per-level positive weights w_0..w_J with the admissibility exponents
/// (α, α₁, α₂) and the smallest constant validating the spatial condition.
#[derive(Clone, Debug)]
pub struct WeightSequence {
    grid: Grid,
    levels: Vec<Vec<f64>>,
    alpha: f64,
    alpha1: f64,
    alpha2: f64,
    fitted_c: f64,
}

impl WeightSequence {
    pub fn new(
        grid: Grid,
        levels: Vec<Vec<f64>>,
        alpha: f64,
        alpha1: f64,
        alpha2: f64,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidInput("weight sequence needs at least one level".into()));
        }
        for (j, level) in levels.iter().enumerate() {
            if level.len() != grid.len() {
                return Err(Error::GridMismatch(format!("weight level {j} length mismatch")));
            }
            if level.iter().any(|&v| !v.is_finite() || v <= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "weight level {j} must be strictly positive and finite"
                )));
            }
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidInput("alpha must be nonnegative".into()));
        }
        let fitted_c = fit_spatial_constant(&grid, &levels, alpha).max(1.0);
        Ok(WeightSequence { grid, levels, alpha, alpha1, alpha2, fitted_c })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn level(&self, j: usize) -> &[f64] {
        &self.levels[j]
    }

    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn fitted_c(&self) -> f64 {
        self.fitted_c
    }
}

/// Smallest C with `w_j(x) <= C w_j(y) (1 + 2^j |x-y|)^alpha` on sampled pairs.
fn fit_spatial_constant(grid: &Grid, levels: &[Vec<f64>], alpha: f64) -> f64 {
    let mut worst: f64 = 1.0;
    for (j, level) in levels.iter().enumerate() {
        let scale = (2.0f64).powi(j as i32);
        let c_j = max_over_pairs(grid, |x, y| {
            let d = grid.periodic_dist(x, y);
            level[x] / (level[y] * (1.0 + scale * d).powf(alpha))
        });
        worst = worst.max(c_j);
    }
    worst
}

/// Result of checking both admissibility conditions on the grid.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct AdmissibilityReport {
    pub passes: bool,
    pub fitted_c: f64,
    pub tight_alpha1: f64,
    pub tight_alpha2: f64,
}

/// Exhaustively check the admissibility conditions and report the tightest
/// constants found; `passes` says whether the declared exponents dominate them.
pub fn verify_admissible(w: &WeightSequence) -> Result<AdmissibilityReport> {
    for level in w.levels() {
        if level.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidInput("weights must be strictly positive".into()));
        }
    }
    let mut tight_alpha1 = f64::INFINITY;
    let mut tight_alpha2 = f64::NEG_INFINITY;
    for j in 0..w.levels().len().saturating_sub(1) {
        let cur = w.level(j);
        let next = w.level(j + 1);
        for (a, b) in cur.iter().zip(next) {
            let r = (b / a).log2();
            tight_alpha1 = tight_alpha1.min(r);
            tight_alpha2 = tight_alpha2.max(r);
        }
    }
    if w.levels().len() == 1 {
        // a single level imposes no dyadic-growth constraint
        tight_alpha1 = w.alpha1();
        tight_alpha2 = w.alpha2();
    }
    let fitted_c = fit_spatial_constant(w.grid(), w.levels(), w.alpha()).max(1.0);
    const TOL: f64 = 1e-12;
    let passes = w.alpha1() <= tight_alpha1 + TOL
        && w.alpha2() >= tight_alpha2 - TOL
        && w.fitted_c() >= fitted_c * (1.0 - TOL);
    Ok(AdmissibilityReport { passes, fitted_c, tight_alpha1, tight_alpha2 })
}

/// Weight levels `w_j(x) = 2^{j s(x)}`; the admissibility exponents come out
/// as α₁ = s⁻, α₂ = s⁺ and α = the log-Hölder estimate of s.
pub fn weights_from_smoothness(s: &SmoothnessFunction, j_top: usize) -> Result<WeightSequence> {
    let grid = *s.grid();
    let levels = (0..=j_top)
        .map(|j| s.samples().iter().map(|&sv| (j as f64 * sv).exp2()).collect())
        .collect();
    WeightSequence::new(grid, levels, s.clog_estimate(), s.s_minus(), s.s_plus())
}

/// Weight levels `w_j(x) = 2^{j s} (1 + 2^j |x - x0|)^{s'}` with the
/// admissibility exponents fitted from the sampled sequence.
pub fn two_microlocal_weights(
    grid: Grid,
    s: f64,
    sprime: f64,
    x0: [f64; 2],
    j_top: usize,
) -> Result<WeightSequence> {
    if !s.is_finite() || !sprime.is_finite() {
        return Err(Error::InvalidInput("2-microlocal parameters must be finite".into()));
    }
    let x0 = grid.coord(grid.nearest_index(x0));
    let levels: Vec<Vec<f64>> = (0..=j_top)
        .map(|j| {
            let scale = (2.0f64).powi(j as i32);
            (0..grid.len())
                .map(|i| {
                    let d = grid.periodic_dist_coord(grid.coord(i), x0);
                    (j as f64 * s).exp2() * (1.0 + scale * d).powf(sprime)
                })
                .collect()
        })
        .collect();

    // tightest dyadic-growth exponents straight from the sampled levels
    let mut alpha1 = f64::INFINITY;
    let mut alpha2 = f64::NEG_INFINITY;
    for j in 0..j_top {
        for (a, b) in levels[j].iter().zip(&levels[j + 1]) {
            let r = (b / a).log2();
            alpha1 = alpha1.min(r);
            alpha2 = alpha2.max(r);
        }
    }
    if j_top == 0 {
        alpha1 = s.min(s + sprime);
        alpha2 = s.max(s + sprime);
    }

    // smallest spatial exponent that works with C = 1 on sampled pairs
    let mut alpha: f64 = 0.0;
    for (j, level) in levels.iter().enumerate() {
        let scale = (2.0f64).powi(j as i32);
        let a_j = max_over_pairs(&grid, |x, y| {
            let ratio = level[x] / level[y];
            if ratio <= 1.0 + 1e-14 {
                return 0.0;
            }
            let d = grid.periodic_dist(x, y);
            if d <= 0.0 {
                return 0.0;
            }
            ratio.ln() / (1.0 + scale * d).ln()
        });
        alpha = alpha.max(a_j);
    }

    WeightSequence::new(grid, levels, alpha, alpha1, alpha2)
}

//! Randomized property suites for the sequence-space inequalities and the
//! norm-equivalence stability experiments. Reports are deterministic given
//! (config, seed) regardless of thread count: every trial draws from its own
//! counter-based stream and reductions run in index order.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::differences::{
    besov_norm_differences, besov_norm_differences_2ml, check_conditions, tl_norm_differences,
    tl_norm_differences_2ml, ConditionReport, SmoothnessSpec,
};
use crate::error::{Error, Result};
use crate::exponents::{
    two_microlocal_weights, weights_from_smoothness, SmoothnessFunction, VariableExponent,
};
use crate::family::{make_family_sample, sample_rng, Family};
use crate::frequency::{
    besov_norm_fourier, build_local_means_kernels, build_resolution_of_unity, eta_kernel,
    local_means_norm, peetre_maximal, peetre_norm, tl_norm_fourier,
};
use crate::grid::{dft, idft, Grid, SampledFunction};
use crate::lebesgue::{norm_lqlp, FunctionSequence};
use crate::par;
use crate::{mixed_norm, Flavor};

use rand::Rng;

/// Declared stability bands for the fitted-constant suites. Checks assert
/// that re-running with a fresh seed (or doubling trials) stays within these.
pub const ETA_CONV_DRIFT: f64 = 0.10;
/// The kernel/indicator constants climb from the l = 0 value toward a finite
/// plateau; the measured across-level spread stays below 2.5 once the finest
/// kernel is grid-resolved.
pub const ETA_BALL_LEVEL_BAND: f64 = 2.5;
/// Largest admissible growth of the final level step; a resolution blowup
/// keeps multiplying by ~2 per level instead of flattening out.
pub const ETA_BALL_PLATEAU_STEP: f64 = 1.35;
pub const R_TRICK_LEVEL_BAND: f64 = 4.0;
pub const INEQUALITY_SLACK: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Equivalence experiments
// ---------------------------------------------------------------------------

/// Smoothness description of the space an experiment runs in.
#[derive(Clone, Debug)]
pub enum SpaceSpec {
    Smoothness(SmoothnessFunction),
    TwoMicrolocal { s: f64, sprime: f64, x0: [f64; 2] },
}

impl SpaceSpec {
    fn label(&self) -> String {
        match self {
            SpaceSpec::Smoothness(s) => format!(
                "s(.) in [{:.4}, {:.4}], clog {:.4}",
                s.s_minus(),
                s.s_plus(),
                s.clog_estimate()
            ),
            SpaceSpec::TwoMicrolocal { s, sprime, x0 } => {
                format!("2ml(s={s}, s'={sprime}, x0={},{})", x0[0], x0[1])
            }
        }
    }
}

/// Full description of one equivalence experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub label: String,
    pub flavor: Flavor,
    pub grid: Grid,
    pub space: SpaceSpec,
    pub p: VariableExponent,
    pub q: VariableExponent,
    pub m: u32,
    pub j_levels: usize,
    /// Peetre parameter; `None` means "auto" (threshold + 1).
    pub a: Option<f64>,
    pub k_range: Option<(i32, i32)>,
    pub family: Family,
    pub sample_count: usize,
    pub seed: u64,
    pub ratio_bound: f64,
}

/// Norms of one sample by every method.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SampleNorms {
    pub index: u64,
    pub norms: BTreeMap<String, f64>,
}

/// Ratio statistics for one ordered method pair.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairRatio {
    pub numerator: String,
    pub denominator: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub geometric_mean: Option<f64>,
    pub max_over_min: Option<f64>,
    pub undefined_count: usize,
}

/// Machine-readable outcome of an equivalence experiment.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EquivalenceReport {
    pub label: String,
    pub flavor: Flavor,
    pub space: String,
    pub family: String,
    pub dim: usize,
    pub points_per_axis: usize,
    pub period: f64,
    pub m: u32,
    pub j_levels: usize,
    pub a_used: f64,
    pub k_lo: i32,
    pub k_hi: i32,
    pub seed: u64,
    pub sample_count: usize,
    pub ratio_bound: f64,
    pub condition: ConditionReport,
    /// False when the condition checks fail; ratios are then informative only.
    pub contractual: bool,
    pub methods: Vec<String>,
    pub per_sample: Vec<SampleNorms>,
    pub ratios: Vec<PairRatio>,
    pub pass: bool,
}

/// Peetre parameter just above the boundedness threshold for the flavor.
pub fn auto_peetre_parameter(
    flavor: Flavor,
    dim: usize,
    p: &VariableExponent,
    q: &VariableExponent,
    alpha_like: f64,
) -> f64 {
    let n = dim as f64;
    let threshold = match flavor {
        Flavor::Besov => (n + q.clog_estimate()) / p.p_minus() + alpha_like,
        Flavor::TriebelLizorkin => n / p.p_minus().min(q.p_minus()) + alpha_like,
    };
    threshold + 1.0
}

/// Run one experiment: per seeded sample, compute the Fourier, Peetre-maximal,
/// local-means and difference norms of the requested flavor, then fill in
/// pairwise ratio statistics. Deterministic given (config, seed).
pub fn run_equivalence_experiment(cfg: &ExperimentConfig) -> Result<EquivalenceReport> {
    if cfg.sample_count < 1 {
        return Err(Error::InvalidConfig("sample_count must be at least 1".into()));
    }
    if let Family::Cusp { gamma, .. } | Family::Chirp { gamma, .. } = &cfg.family {
        if *gamma >= cfg.m as f64 {
            return Err(Error::InvalidConfig(format!(
                "cusp/chirp exponent gamma must lie in (0, M); gamma = {gamma}, M = {}",
                cfg.m
            )));
        }
    }
    let grid = cfg.grid;
    let (weights, smoothness, spec_alpha) = match &cfg.space {
        SpaceSpec::Smoothness(s) => {
            crate::grid::same_grid(s.grid(), &grid)?;
            let w = weights_from_smoothness(s, cfg.j_levels)?;
            let alpha = s.clog_estimate();
            (w, Some(s.clone()), alpha)
        }
        SpaceSpec::TwoMicrolocal { s, sprime, x0 } => {
            let w = two_microlocal_weights(grid, *s, *sprime, *x0, cfg.j_levels)?;
            let alpha = w.alpha();
            (w, None, alpha)
        }
    };

    let condition = match &smoothness {
        Some(s) => check_conditions(SmoothnessSpec::Function(s), &cfg.p, &cfg.q, cfg.m, cfg.flavor),
        None => check_conditions(SmoothnessSpec::Weights(&weights), &cfg.p, &cfg.q, cfg.m, cfg.flavor),
    };

    let bank = build_resolution_of_unity(grid, cfg.j_levels)?;
    let kernel_order = (weights.alpha2().max(0.0).floor() as usize) + 1;
    let kernels = build_local_means_kernels(grid, kernel_order, 0.9)?;
    let a_used = cfg
        .a
        .unwrap_or_else(|| auto_peetre_parameter(cfg.flavor, grid.dim(), &cfg.p, &cfg.q, spec_alpha));
    let k_range = cfg.k_range.unwrap_or((-(cfg.j_levels as i32), cfg.j_levels as i32));

    let indices: Vec<u64> = (0..cfg.sample_count as u64).collect();
    let samples: Vec<Result<SampleNorms>> = par::map_slice(&indices, |&index| {
        let f = make_family_sample(&cfg.family, grid, cfg.seed, index)?;
        let mut norms = BTreeMap::new();
        let fourier = match cfg.flavor {
            Flavor::Besov => besov_norm_fourier(&f, &bank, &weights, &cfg.p, &cfg.q)?,
            Flavor::TriebelLizorkin => tl_norm_fourier(&f, &bank, &weights, &cfg.p, &cfg.q)?,
        };
        norms.insert("fourier".into(), fourier);
        norms.insert(
            "peetre".into(),
            peetre_norm(&f, &kernels, &weights, &cfg.p, &cfg.q, a_used, cfg.flavor)?,
        );
        norms.insert(
            "localmeans".into(),
            local_means_norm(&f, &kernels, &weights, &cfg.p, &cfg.q, cfg.flavor)?,
        );
        let differences = match (&smoothness, cfg.flavor) {
            (Some(s), Flavor::Besov) => besov_norm_differences(&f, s, &cfg.p, &cfg.q, cfg.m, k_range)?,
            (Some(s), Flavor::TriebelLizorkin) => {
                tl_norm_differences(&f, s, &cfg.p, &cfg.q, cfg.m, k_range)?
            }
            (None, Flavor::Besov) => {
                besov_norm_differences_2ml(&f, &weights, &cfg.p, &cfg.q, cfg.m, k_range)?
            }
            (None, Flavor::TriebelLizorkin) => {
                tl_norm_differences_2ml(&f, &weights, &cfg.p, &cfg.q, cfg.m, k_range)?
            }
        };
        norms.insert("differences".into(), differences);
        for (method, value) in &norms {
            if !value.is_finite() {
                return Err(Error::Numeric(format!(
                    "norm '{method}' is not finite for sample {index}"
                )));
            }
        }
        Ok(SampleNorms { index, norms })
    });
    let per_sample: Vec<SampleNorms> = samples.into_iter().collect::<Result<_>>()?;

    let methods: Vec<String> =
        vec!["fourier".into(), "peetre".into(), "localmeans".into(), "differences".into()];
    let mut ratios = Vec::new();
    let mut ratios_ok = true;
    for i in 0..methods.len() {
        for j in (i + 1)..methods.len() {
            let (num, den) = (&methods[i], &methods[j]);
            let mut vals = Vec::new();
            let mut undefined = 0usize;
            for s in &per_sample {
                let a = s.norms[num];
                let b = s.norms[den];
                if a > 1e-300 && b > 1e-300 {
                    vals.push(a / b);
                } else {
                    undefined += 1;
                }
            }
            let pair = if vals.is_empty() {
                PairRatio {
                    numerator: num.clone(),
                    denominator: den.clone(),
                    min: None,
                    max: None,
                    geometric_mean: None,
                    max_over_min: None,
                    undefined_count: undefined,
                }
            } else {
                let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = vals.iter().cloned().fold(0.0f64, f64::max);
                let log_mean = vals.iter().map(|v| v.ln()).sum::<f64>() / vals.len() as f64;
                let spread = max / min;
                if spread > cfg.ratio_bound {
                    ratios_ok = false;
                }
                PairRatio {
                    numerator: num.clone(),
                    denominator: den.clone(),
                    min: Some(min),
                    max: Some(max),
                    geometric_mean: Some(log_mean.exp()),
                    max_over_min: Some(spread),
                    undefined_count: undefined,
                }
            };
            ratios.push(pair);
        }
    }

    let contractual = condition.ok;
    let pass = contractual && ratios_ok;
    Ok(EquivalenceReport {
        label: cfg.label.clone(),
        flavor: cfg.flavor,
        space: cfg.space.label(),
        family: cfg.family.label(),
        dim: grid.dim(),
        points_per_axis: grid.points_per_axis(),
        period: grid.period(),
        m: cfg.m,
        j_levels: cfg.j_levels,
        a_used,
        k_lo: k_range.0,
        k_hi: k_range.1,
        seed: cfg.seed,
        sample_count: cfg.sample_count,
        ratio_bound: cfg.ratio_bound,
        condition,
        contractual,
        methods,
        per_sample,
        ratios,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Inequality suites
// ---------------------------------------------------------------------------

/// Outcome of one randomized inequality suite.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub violations: usize,
    pub constants: BTreeMap<String, f64>,
    pub pass: bool,
}

/// Exponent pair shared by the sequence-space suites.
#[derive(Clone, Debug)]
pub struct ExponentPair {
    pub p: VariableExponent,
    pub q: VariableExponent,
}

impl ExponentPair {
    pub fn constant(grid: Grid, p: f64, q: f64) -> Result<Self> {
        Ok(ExponentPair {
            p: VariableExponent::constant(grid, p)?,
            q: VariableExponent::constant(grid, q)?,
        })
    }

    /// Sinusoidally varying exponents, the default for variable-exponent runs.
    pub fn sinusoidal(grid: Grid) -> Result<Self> {
        let p = VariableExponent::new(
            grid,
            (0..grid.len()).map(|i| 2.0 + 0.5 * grid.coord(i)[0].sin()).collect(),
        )?;
        let q = VariableExponent::new(
            grid,
            (0..grid.len()).map(|i| 1.8 + 0.4 * grid.coord(i)[0].cos()).collect(),
        )?;
        Ok(ExponentPair { p, q })
    }
}

fn random_nonneg_sequence(
    grid: Grid,
    terms: usize,
    seed: u64,
    trial: u64,
    salt: u64,
) -> FunctionSequence {
    let mut rng = sample_rng(seed ^ salt, trial);
    let fns: Vec<SampledFunction> = (0..terms)
        .map(|_| {
            let vals: Vec<Complex64> = (0..grid.len())
                .map(|_| Complex64::new(rng.gen_range(0.0..2.0f64), 0.0))
                .collect();
            SampledFunction::new(grid, vals).unwrap()
        })
        .collect();
    FunctionSequence::from_terms(fns).unwrap()
}

fn pointwise_pow(f: &SampledFunction, e: f64) -> SampledFunction {
    SampledFunction::new(
        *f.grid(),
        f.values().iter().map(|v| Complex64::new(v.norm().powf(e), 0.0)).collect(),
    )
    .unwrap()
}

/// Mixed Hölder inequality suite: checks
/// `‖f·g‖ <= 2^{1/q^-} ‖f^{1/(1-λ)}‖^{1-λ} ‖g^{1/λ}‖^λ` on random
/// nonnegative sequences in ℓ_{q(·)}(L_{p(·)}).
pub fn check_mixed_holder(
    seed: u64,
    trials: usize,
    lambda: f64,
    exponents: &ExponentPair,
) -> Result<SuiteReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidConfig("lambda must lie in (0, 1)".into()));
    }
    let grid = *exponents.p.grid();
    let bound_constant = (1.0f64 / exponents.q.p_minus()).exp2();
    let trials_idx: Vec<u64> = (0..trials as u64).collect();
    let results: Vec<Result<(bool, f64)>> = par::map_slice(&trials_idx, |&t| {
        let f = random_nonneg_sequence(grid, 3, seed, t, 0x01);
        let g = random_nonneg_sequence(grid, 3, seed, t, 0x02);
        let product = FunctionSequence::from_terms(
            f.terms()
                .iter()
                .zip(g.terms())
                .map(|(a, b)| {
                    SampledFunction::new(
                        grid,
                        a.values()
                            .iter()
                            .zip(b.values())
                            .map(|(x, y)| Complex64::new(x.norm() * y.norm(), 0.0))
                            .collect(),
                    )
                    .unwrap()
                })
                .collect(),
        )
        .unwrap();
        let lhs = norm_lqlp(&product, &exponents.p, &exponents.q)?;
        let f_pow = FunctionSequence::from_terms(
            f.terms().iter().map(|t| pointwise_pow(t, 1.0 / (1.0 - lambda))).collect(),
        )
        .unwrap();
        let g_pow = FunctionSequence::from_terms(
            g.terms().iter().map(|t| pointwise_pow(t, 1.0 / lambda)).collect(),
        )
        .unwrap();
        let nf = norm_lqlp(&f_pow, &exponents.p, &exponents.q)?;
        let ng = norm_lqlp(&g_pow, &exponents.p, &exponents.q)?;
        let rhs = bound_constant * nf.powf(1.0 - lambda) * ng.powf(lambda);
        let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
        Ok((lhs > rhs * (1.0 + INEQUALITY_SLACK), ratio))
    });
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for r in results {
        let (violated, ratio) = r?;
        if violated {
            violations += 1;
        }
        worst = worst.max(ratio);
    }
    let mut constants = BTreeMap::new();
    constants.insert("bound_constant".into(), bound_constant);
    constants.insert("worst_ratio".into(), worst);
    constants.insert("lambda".into(), lambda);
    Ok(SuiteReport {
        suite: "holder".into(),
        seed,
        trials,
        violations,
        constants,
        pass: violations == 0,
    })
}

/// Discrete convolution suite: `G_ν = Σ_k 2^{-|ν-k|δ} g_k` must satisfy
/// `‖G‖ <= C ‖g‖` in both mixed norms. For constant exponents >= 1 the
/// closed-form constant `C = Σ_l 2^{-|l|δ}` is asserted with zero violations;
/// otherwise the fitted constant is reported.
pub fn check_discrete_convolution(
    seed: u64,
    trials: usize,
    delta: f64,
    exponents: &ExponentPair,
) -> Result<SuiteReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig("delta must be positive".into()));
    }
    let grid = *exponents.p.grid();
    let window = 4i64; // indices -W..=W
    let closed_form: f64 = (-2 * window..=2 * window).map(|l| (-(l.abs() as f64) * delta).exp2()).sum();
    let is_normed_case = exponents.p.is_constant()
        && exponents.q.is_constant()
        && exponents.p.p_minus() >= 1.0
        && exponents.q.p_minus() >= 1.0;
    let terms = (2 * window + 1) as usize;
    let trials_idx: Vec<u64> = (0..trials as u64).collect();
    let results: Vec<Result<(usize, f64)>> = par::map_slice(&trials_idx, |&t| {
        let g = random_nonneg_sequence(grid, terms, seed, t, 0x11);
        let conv_terms: Vec<SampledFunction> = (0..terms)
            .map(|nu| {
                let mut acc = vec![0.0f64; grid.len()];
                for (k, gk) in g.terms().iter().enumerate() {
                    let w = (-((nu as i64 - k as i64).abs() as f64) * delta).exp2();
                    for (a, v) in acc.iter_mut().zip(gk.values()) {
                        *a += w * v.norm();
                    }
                }
                SampledFunction::new(grid, acc.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
                    .unwrap()
            })
            .collect();
        let big = FunctionSequence::from_terms(conv_terms).unwrap();
        let mut violations = 0usize;
        let mut worst: f64 = 0.0;
        for flavor in [Flavor::Besov, Flavor::TriebelLizorkin] {
            let num = mixed_norm(&big, &exponents.p, &exponents.q, flavor)?;
            let den = mixed_norm(&g, &exponents.p, &exponents.q, flavor)?;
            if den > 0.0 {
                let c = num / den;
                worst = worst.max(c);
                if is_normed_case && c > closed_form * (1.0 + INEQUALITY_SLACK) {
                    violations += 1;
                }
            }
        }
        Ok((violations, worst))
    });
    let mut violations = 0;
    let mut fitted: f64 = 0.0;
    for r in results {
        let (v, c) = r?;
        violations += v;
        fitted = fitted.max(c);
    }
    let mut constants = BTreeMap::new();
    constants.insert("closed_form_constant".into(), closed_form);
    constants.insert("fitted_constant".into(), fitted);
    constants.insert("delta".into(), delta);
    Ok(SuiteReport {
        suite: "convolution".into(),
        seed,
        trials,
        violations,
        constants,
        pass: violations == 0 && fitted.is_finite(),
    })
}

/// Cyclic convolution with integral normalization.
pub(crate) fn cyclic_convolve(a: &SampledFunction, b: &SampledFunction) -> SampledFunction {
    let spec_a = dft(a);
    let mut spec_b = dft(b);
    for (cb, ca) in spec_b.coeffs_mut().iter_mut().zip(spec_a.coeffs()) {
        *cb *= ca;
    }
    idft(&spec_b).scale(Complex64::new(a.grid().measure(), 0.0))
}

/// Decay-kernel convolution suite: the levelwise map `f_ν ↦ η_{ν,m} * f_ν`
/// must be bounded on the mixed space; the fitted operator constant is
/// reported and must be stable under doubling the trial count.
pub fn check_eta_convolution(
    seed: u64,
    trials: usize,
    m: f64,
    exponents: &ExponentPair,
    flavor: Flavor,
) -> Result<SuiteReport> {
    let grid = *exponents.p.grid();
    let n = grid.dim() as f64;
    let threshold = match flavor {
        Flavor::Besov => n + exponents.q.clog_estimate(),
        Flavor::TriebelLizorkin => n,
    };
    if m <= threshold {
        return Err(Error::Precondition(format!(
            "eta exponent m = {m} must exceed the threshold {threshold}"
        )));
    }
    let levels = 7usize;
    let etas: Vec<SampledFunction> =
        (0..levels).map(|nu| eta_kernel(grid, nu as u32, m)).collect::<Result<_>>()?;
    let fitted_over = |count: usize| -> Result<f64> {
        let idx: Vec<u64> = (0..count as u64).collect();
        let cs: Vec<Result<f64>> = par::map_slice(&idx, |&t| {
            let f = random_nonneg_sequence(grid, levels, seed, t, 0x21);
            let conv = FunctionSequence::from_terms(
                f.terms().iter().zip(&etas).map(|(fv, e)| cyclic_convolve(e, fv)).collect(),
            )
            .unwrap();
            let num = mixed_norm(&conv, &exponents.p, &exponents.q, flavor)?;
            let den = mixed_norm(&f, &exponents.p, &exponents.q, flavor)?;
            Ok(if den > 0.0 { num / den } else { 0.0 })
        });
        let mut worst: f64 = 0.0;
        for c in cs {
            worst = worst.max(c?);
        }
        Ok(worst)
    };
    let half = fitted_over(trials / 2)?;
    let full = fitted_over(trials)?;
    let drift = (full - half).abs() / full.max(1e-300);
    let mut constants = BTreeMap::new();
    constants.insert("fitted_constant".into(), full);
    constants.insert("fitted_constant_half_trials".into(), half);
    constants.insert("drift".into(), drift);
    constants.insert("m".into(), m);
    Ok(SuiteReport {
        suite: "eta".into(),
        seed,
        trials,
        violations: 0,
        constants,
        pass: full.is_finite() && drift < ETA_CONV_DRIFT,
    })
}

/// Power-sum suite: `(Σ 2^{-lδq} a_l)^{1/q} <= C Σ 2^{-lδ/2} a_l^{1/q}`.
/// For q >= 1 the constant is 1 and zero violations are required; for q < 1
/// the fitted constant is reported.
pub fn check_power_sum(seed: u64, trials: usize, q: f64, delta: f64) -> Result<SuiteReport> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidConfig("q must lie in (0, infinity)".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig("delta must be positive".into()));
    }
    let len = 24usize;
    let trials_idx: Vec<u64> = (0..trials as u64).collect();
    let results: Vec<(bool, f64)> = par::map_slice(&trials_idx, |&t| {
        let mut rng = sample_rng(seed ^ 0x31, t);
        let a: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..4.0f64)).collect();
        let lhs: f64 = a
            .iter()
            .enumerate()
            .map(|(i, &v)| (-(i as f64 + 1.0) * delta * q).exp2() * v)
            .sum::<f64>()
            .powf(1.0 / q);
        let rhs: f64 = a
            .iter()
            .enumerate()
            .map(|(i, &v)| (-(i as f64 + 1.0) * delta / 2.0).exp2() * v.powf(1.0 / q))
            .sum();
        let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
        (q >= 1.0 && ratio > 1.0 + INEQUALITY_SLACK, ratio)
    });
    let violations = results.iter().filter(|(v, _)| *v).count();
    let fitted = results.iter().map(|&(_, r)| r).fold(0.0f64, f64::max);
    let mut constants = BTreeMap::new();
    constants.insert("fitted_constant".into(), fitted);
    constants.insert("q".into(), q);
    constants.insert("delta".into(), delta);
    Ok(SuiteReport {
        suite: "powersum".into(),
        seed,
        trials,
        violations,
        constants,
        pass: violations == 0 && fitted.is_finite(),
    })
}

/// Fitted constant for one level pair of the kernel/indicator convolution
/// comparison `η_{k+l,m} * [2^{kn} χ_{2^{-k}B}] <= C η_{k,m}`.
pub fn eta_ball_constant(grid: Grid, k: u32, l: u32, m: f64) -> Result<f64> {
    let radius = (2.0f64).powi(-(k as i32));
    if radius < 2.0 * grid.spacing() {
        return Err(Error::InvalidConfig(format!(
            "indicator ball 2^-{k} is below the grid resolution"
        )));
    }
    let amp = (2.0f64).powi((k as i32) * grid.dim() as i32);
    let chi = SampledFunction::new(
        grid,
        (0..grid.len())
            .map(|i| {
                if grid.dist_to_origin(i) <= radius {
                    Complex64::new(amp, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect(),
    )?;
    let eta_fine = eta_kernel(grid, k + l, m)?;
    let eta_coarse = eta_kernel(grid, k, m)?;
    let conv = cyclic_convolve(&eta_fine, &chi);
    let mut c: f64 = 0.0;
    for (num, den) in conv.values().iter().zip(eta_coarse.values()) {
        c = c.max(num.re / den.re);
    }
    Ok(c)
}

/// Suite over the offset range l = 0..=5: constants must stay within the
/// declared band of each other. The fine kernel at level k+5 must still be
/// resolved by the grid, otherwise its discrete mass inflates with l.
pub fn check_eta_ball_convolution(grid: Grid, k: u32, m: f64) -> Result<SuiteReport> {
    if m <= grid.dim() as f64 {
        return Err(Error::Precondition(format!("m = {m} must exceed the dimension {}", grid.dim())));
    }
    if (2.0f64).powi(-(k as i32) - 5) < 2.0 * grid.spacing() {
        return Err(Error::InvalidConfig(format!(
            "level {} kernel is below the grid resolution; refine the grid",
            k + 5
        )));
    }
    let mut constants = BTreeMap::new();
    let mut values = Vec::new();
    for l in 0..=5u32 {
        let c = eta_ball_constant(grid, k, l, m)?;
        constants.insert(format!("c_l{l}"), c);
        values.push(c);
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let last_step = values[5] / values[4];
    constants.insert("spread".into(), max / min);
    constants.insert("last_step".into(), last_step);
    constants.insert("m".into(), m);
    Ok(SuiteReport {
        suite: "etaball".into(),
        seed: 0,
        trials: 6,
        violations: 0,
        constants,
        pass: max.is_finite()
            && max / min <= ETA_BALL_LEVEL_BAND
            && last_step <= ETA_BALL_PLATEAU_STEP,
    })
}

/// Weight-transfer check: `2^{ν s(x)} η_{ν,m+R}(x-y) <= C 2^{ν s(y)} η_{ν,m}(x-y)`
/// with R at least the log-Hölder estimate of s; reports the fitted C.
pub fn check_eta_weight_transfer(
    s: &SmoothnessFunction,
    m: f64,
    max_level: u32,
) -> Result<SuiteReport> {
    let grid = *s.grid();
    if !(m >= 0.0) {
        return Err(Error::InvalidConfig("m must be nonnegative".into()));
    }
    let r = s.clog_estimate().ceil().max(1.0);
    let samples = s.samples();
    let mut constants = BTreeMap::new();
    let mut worst: f64 = 0.0;
    for nu in 0..=max_level {
        let scale = (2.0f64).powi(nu as i32);
        // ratio of the two sides; the η-quotient collapses to the extra decay factor
        let c_nu = {
            let vals = par::map_indices(grid.len(), |x| {
                let mut best: f64 = 0.0;
                for y in 0..grid.len() {
                    if x == y {
                        continue;
                    }
                    let d = grid.periodic_dist(x, y);
                    let ratio = (nu as f64 * (samples[x] - samples[y])).exp2()
                        / (1.0 + scale * d).powf(r);
                    best = best.max(ratio);
                }
                best
            });
            vals.into_iter().fold(0.0f64, f64::max)
        };
        constants.insert(format!("c_nu{nu}"), c_nu);
        worst = worst.max(c_nu);
    }
    constants.insert("fitted_constant".into(), worst);
    constants.insert("moment_exponent_r".into(), r);
    constants.insert("m".into(), m);
    Ok(SuiteReport {
        suite: "eta1".into(),
        seed: 0,
        trials: (max_level + 1) as usize,
        violations: 0,
        constants,
        pass: worst.is_finite() && worst > 0.0,
    })
}

/// Band-limited self-improvement check: `|g(x)| <= c (η_{ν,m} * |g|^r)^{1/r}`
/// for g with spectrum inside |ξ| <= 2^{ν+1}. Reports per-level constants and
/// requires them to stay within the declared level band.
pub fn check_r_trick(
    grid: Grid,
    seed: u64,
    r: f64,
    m: f64,
    max_level: u32,
) -> Result<SuiteReport> {
    if !(r > 0.0) {
        return Err(Error::InvalidConfig("r must be positive".into()));
    }
    if m <= grid.dim() as f64 {
        return Err(Error::Precondition(format!("m = {m} must exceed the dimension {}", grid.dim())));
    }
    let mut constants = BTreeMap::new();
    let mut values = Vec::new();
    for nu in 0..=max_level {
        let cutoff = (2.0f64).powi(nu as i32 + 1);
        if cutoff > grid.nyquist() {
            break;
        }
        let mut rng = sample_rng(seed ^ 0x41, nu as u64);
        let mut spec = dft(&SampledFunction::zeros(grid));
        for i in 0..grid.len() {
            if grid.freq_magnitude(i) <= cutoff {
                spec.coeffs_mut()[i] =
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let g = idft(&spec);
        let g_pow = pointwise_pow(&g, r);
        let eta = eta_kernel(grid, nu, m)?;
        let conv = cyclic_convolve(&eta, &g_pow);
        let mut c_nu: f64 = 0.0;
        for (gv, cv) in g.values().iter().zip(conv.values()) {
            if cv.re > 0.0 {
                c_nu = c_nu.max(gv.norm() / cv.re.powf(1.0 / r));
            }
        }
        constants.insert(format!("c_nu{nu}"), c_nu);
        values.push(c_nu);
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    constants.insert("spread".into(), max / min);
    constants.insert("fitted_constant".into(), max);
    Ok(SuiteReport {
        suite: "rtrick".into(),
        seed,
        trials: values.len(),
        violations: 0,
        constants,
        pass: max.is_finite() && max / min <= R_TRICK_LEVEL_BAND,
    })
}

/// Difference-vs-maximal-function comparison: fitted constant in
/// `|Δ^M_h f| <= C max(1,|bh|^a) min(1,|bh|^M) P_{b,a} f` over band limits b
/// and step sizes h, for band-limited f.
pub fn check_dif_peetre(
    grid: Grid,
    seed: u64,
    m: u32,
    a: f64,
) -> Result<SuiteReport> {
    if m == 0 {
        return Err(Error::InvalidConfig("difference order M must be at least 1".into()));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidConfig("a must be positive".into()));
    }
    let mut constants = BTreeMap::new();
    let mut values = Vec::new();
    for nu in 2..=5u32 {
        let b = (2.0f64).powi(nu as i32);
        if 2.0 * b > grid.nyquist() {
            break;
        }
        let mut rng = sample_rng(seed ^ 0x51, nu as u64);
        let mut spec = dft(&SampledFunction::zeros(grid));
        for i in 0..grid.len() {
            if grid.freq_magnitude(i) <= b {
                spec.coeffs_mut()[i] =
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let f = idft(&spec);
        let maximal = peetre_maximal(&f, nu as usize, a)?;
        for &step_scale in &[0.5, 1.0, 2.0] {
            let h = step_scale / b;
            let diff = crate::differences::finite_difference(&f, [h, 0.0], m)?;
            let bh = b * h;
            let envelope = bh.powf(a).max(1.0) * bh.powi(m as i32).min(1.0);
            let mut c: f64 = 0.0;
            for (dv, pv) in diff.values().iter().zip(maximal.values()) {
                if pv.re > 0.0 {
                    c = c.max(dv.norm() / (envelope * pv.re));
                }
            }
            constants.insert(format!("c_b{b}_h{step_scale}"), c);
            values.push(c);
        }
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    constants.insert("fitted_constant".into(), max);
    constants.insert("spread".into(), max / min);
    Ok(SuiteReport {
        suite: "difpeetre".into(),
        seed,
        trials: values.len(),
        violations: 0,
        constants,
        pass: max.is_finite() && max > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tau() -> f64 {
        2.0 * PI
    }

    fn small_config() -> ExperimentConfig {
        let grid = Grid::line(128, tau()).unwrap();
        let s = SmoothnessFunction::constant(grid, 1.0).unwrap();
        ExperimentConfig {
            label: "unit".into(),
            flavor: Flavor::Besov,
            grid,
            space: SpaceSpec::Smoothness(s),
            p: VariableExponent::constant(grid, 2.0).unwrap(),
            q: VariableExponent::constant(grid, 2.0).unwrap(),
            m: 2,
            j_levels: 4,
            a: None,
            k_range: None,
            family: Family::BandLimitedRandom { level: 4, decay: 1.5 },
            sample_count: 3,
            seed: 7,
            ratio_bound: 10.0,
        }
    }

    #[test]
    fn equivalence_experiment_is_deterministic() {
        let cfg = small_config();
        let a = run_equivalence_experiment(&cfg).unwrap();
        let b = run_equivalence_experiment(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.pass, "tame configuration should pass: {:?}", a.ratios);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn equivalence_experiment_independent_of_thread_count() {
        let cfg = small_config();
        let parallel = run_equivalence_experiment(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| run_equivalence_experiment(&cfg).unwrap());
        assert_eq!(
            serde_json::to_string(&parallel).unwrap(),
            serde_json::to_string(&single).unwrap()
        );
    }

    #[test]
    fn zero_family_gives_undefined_ratios_but_valid_report() {
        let mut cfg = small_config();
        cfg.family = Family::Zero;
        cfg.sample_count = 1;
        let rep = run_equivalence_experiment(&cfg).unwrap();
        for s in &rep.per_sample {
            for v in s.norms.values() {
                assert_eq!(*v, 0.0);
            }
        }
        for pair in &rep.ratios {
            assert_eq!(pair.undefined_count, 1);
            assert!(pair.max_over_min.is_none());
        }
        assert!(rep.pass);
    }

    #[test]
    fn failing_conditions_mark_report_non_contractual() {
        let mut cfg = small_config();
        // s^- = -0.5 < 0 violates the lower threshold while M stays valid
        let s = SmoothnessFunction::constant(cfg.grid, -0.5).unwrap();
        cfg.space = SpaceSpec::Smoothness(s);
        cfg.sample_count = 1;
        let rep = run_equivalence_experiment(&cfg).unwrap();
        assert!(!rep.condition.ok);
        assert!(!rep.contractual);
        assert!(!rep.pass);
    }

    #[test]
    fn holder_suite_sees_no_violations() {
        let grid = Grid::line(16, tau()).unwrap();
        let exps = ExponentPair::sinusoidal(grid).unwrap();
        let rep = check_mixed_holder(5, 50, 0.5, &exps).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.pass);
    }

    #[test]
    fn holder_suite_explicit_product_case() {
        // f = g with lambda = 1/2: both sides are computable directly
        let grid = Grid::line(16, tau()).unwrap();
        let exps = ExponentPair::constant(grid, 2.0, 2.0).unwrap();
        let f = random_nonneg_sequence(grid, 3, 1, 0, 0x99);
        let square = FunctionSequence::from_terms(
            f.terms().iter().map(|t| pointwise_pow(t, 2.0)).collect(),
        )
        .unwrap();
        let lhs = norm_lqlp(&square, &exps.p, &exps.q).unwrap();
        let nf = norm_lqlp(
            &FunctionSequence::from_terms(
                f.terms().iter().map(|t| pointwise_pow(t, 2.0)).collect(),
            )
            .unwrap(),
            &exps.p,
            &exps.q,
        )
        .unwrap();
        let rhs = (1.0f64 / 2.0).exp2() * nf;
        assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn convolution_suite_single_spike_matches_explicit_profile() {
        let grid = Grid::line(16, tau()).unwrap();
        let delta = 1.0;
        let window = 4i64;
        let terms = (2 * window + 1) as usize;
        let mut seq: Vec<SampledFunction> = vec![SampledFunction::zeros(grid); terms];
        let probe = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        seq[3] = probe.clone();
        let g = FunctionSequence::from_terms(seq).unwrap();
        // explicit convolution profile
        for (nu, _) in (0..terms).enumerate() {
            let expect = (-((nu as i64 - 3).abs() as f64) * delta).exp2();
            let mut acc = 0.0;
            for (k, gk) in g.terms().iter().enumerate() {
                let w = (-((nu as i64 - k as i64).abs() as f64) * delta).exp2();
                acc += w * gk.values()[0].re;
            }
            assert!((acc - expect).abs() < 1e-12);
        }
        let exps = ExponentPair::constant(grid, 2.0, 2.0).unwrap();
        let rep = check_discrete_convolution(3, 20, delta, &exps).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.constants["fitted_constant"] <= rep.constants["closed_form_constant"] * (1.0 + 1e-9));
    }

    #[test]
    fn uniform_sequence_convolution_profile() {
        // g all equal: G_nu = (sum of in-window weights) * g, checked exactly
        let grid = Grid::line(16, tau()).unwrap();
        let delta = 0.7;
        let window = 4i64;
        let terms = (2 * window + 1) as usize;
        let g0 = SampledFunction::constant(grid, Complex64::new(1.3, 0.0));
        for nu in 0..terms {
            let c_nu: f64 = (0..terms)
                .map(|k| (-((nu as i64 - k as i64).abs() as f64) * delta).exp2())
                .sum();
            let mut acc = 0.0;
            for k in 0..terms {
                let w = (-((nu as i64 - k as i64).abs() as f64) * delta).exp2();
                acc += w * g0.values()[0].re;
            }
            assert!((acc - c_nu * 1.3).abs() < 1e-12);
        }
    }

    #[test]
    fn power_sum_constant_is_one_for_q_at_least_one() {
        let rep = check_power_sum(11, 200, 1.0, 1.0).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.constants["fitted_constant"] <= 1.0 + 1e-9);
        let rep2 = check_power_sum(11, 200, 2.0, 0.5).unwrap();
        assert_eq!(rep2.violations, 0);
    }

    #[test]
    fn power_sum_fitted_constant_for_small_q() {
        let a = check_power_sum(1, 400, 0.5, 1.0).unwrap();
        let b = check_power_sum(2, 400, 0.5, 1.0).unwrap();
        let ca = a.constants["fitted_constant"];
        let cb = b.constants["fitted_constant"];
        assert!(ca.is_finite() && cb.is_finite());
        assert!((ca - cb).abs() / ca.max(cb) < 0.10, "ca={ca} cb={cb}");
    }

    #[test]
    fn eta_convolution_preserves_positivity_and_spike_profile() {
        let grid = Grid::line(64, tau()).unwrap();
        let eta = eta_kernel(grid, 2, 3.0).unwrap();
        let mut spike_vals = vec![Complex64::new(0.0, 0.0); grid.len()];
        spike_vals[5] = Complex64::new(1.0, 0.0);
        let spike = SampledFunction::new(grid, spike_vals).unwrap();
        let conv = cyclic_convolve(&eta, &spike);
        let cell = grid.spacing();
        for (i, v) in conv.values().iter().enumerate() {
            // convolving with a spike reproduces a shifted copy of eta
            let expected = eta.values()[(i + grid.len() - 5) % grid.len()].re * cell;
            assert!((v.re - expected).abs() < 1e-10);
            assert!(v.re >= -1e-12);
        }
    }

    #[test]
    fn eta_convolution_suite_is_stable() {
        let grid = Grid::line(32, tau()).unwrap();
        let exps = ExponentPair::constant(grid, 2.0, 2.0).unwrap();
        let rep = check_eta_convolution(9, 40, 2.5, &exps, Flavor::Besov).unwrap();
        assert!(rep.pass, "drift {:?}", rep.constants);
    }

    #[test]
    fn eta_ball_suite_is_level_stable() {
        let grid = Grid::line(2048, tau()).unwrap();
        let rep = check_eta_ball_convolution(grid, 2, 2.0).unwrap();
        assert!(rep.pass, "{:?}", rep.constants);
        // the direct x = 0 value: convolving against the indicator averages
        // the kernel mass inside the ball
        let direct = eta_ball_constant(grid, 2, 0, 2.0).unwrap();
        assert!(direct > 1.0 && direct < 8.0, "l=0 constant {direct}");
        // coarse grids cannot resolve the finest kernel and are rejected
        let coarse = Grid::line(256, tau()).unwrap();
        assert!(check_eta_ball_convolution(coarse, 3, 2.0).is_err());
    }

    #[test]
    fn r_trick_suite_is_level_stable() {
        let grid = Grid::line(256, tau()).unwrap();
        let rep = check_r_trick(grid, 3, 0.7, 2.0, 4).unwrap();
        assert!(rep.pass, "{:?}", rep.constants);
    }

    #[test]
    fn dif_peetre_constants_are_finite() {
        let grid = Grid::line(256, tau()).unwrap();
        let rep = check_dif_peetre(grid, 3, 2, 2.0).unwrap();
        assert!(rep.pass, "{:?}", rep.constants);
    }

    #[test]
    fn cusp_norm_refinement_trend_separates_smoothness_regimes() {
        // sup-scale difference norm of a cusp of exponent gamma: for s < gamma
        // the norm is stable under grid refinement, for s > gamma it keeps
        // growing (one extra dyadic level per doubling, factor ~ 2^{s-gamma}).
        let gamma = 0.6;
        let norm_at = |n: usize, s_val: f64| -> f64 {
            let grid = Grid::line(n, tau()).unwrap();
            let j = crate::frequency::default_top_level(&grid) as i32;
            let f = make_family_sample(&Family::Cusp { gamma, x0: [PI, 0.0] }, grid, 0, 0).unwrap();
            let s = SmoothnessFunction::constant(grid, s_val).unwrap();
            let p = VariableExponent::constant(grid, f64::INFINITY).unwrap();
            let q = VariableExponent::constant(grid, f64::INFINITY).unwrap();
            besov_norm_differences(&f, &s, &p, &q, 2, (-j, j)).unwrap()
        };
        let below = norm_at(1024, gamma - 0.1) / norm_at(512, gamma - 0.1);
        let above = norm_at(1024, gamma + 0.3) / norm_at(512, gamma + 0.3);
        assert!(below.is_finite() && (below - 1.0).abs() < 0.05, "below-threshold drift {below}");
        assert!(above > 1.12, "above-threshold growth {above} too small");
        assert!(above > below + 0.1, "regimes not separated: {below} vs {above}");
    }

    #[test]
    fn two_dimensional_equivalence_smoke() {
        // small 2D run exercising every dimension-generic code path except
        // the quadratic-cost maximal function (tested separately at unit size)
        let grid = Grid::square(32, tau()).unwrap();
        let j = crate::frequency::default_top_level(&grid);
        let s = SmoothnessFunction::constant(grid, 1.0).unwrap();
        let p = VariableExponent::constant(grid, 2.0).unwrap();
        let q = VariableExponent::constant(grid, 2.0).unwrap();
        let bank = crate::frequency::build_resolution_of_unity(grid, j).unwrap();
        let w = weights_from_smoothness(&s, j).unwrap();
        let f = make_family_sample(&Family::BandLimitedRandom { level: j, decay: 1.5 }, grid, 4, 0)
            .unwrap();
        let fourier = crate::frequency::besov_norm_fourier(&f, &bank, &w, &p, &q).unwrap();
        let diff = besov_norm_differences(&f, &s, &p, &q, 2, (-(j as i32), j as i32)).unwrap();
        assert!(fourier.is_finite() && fourier > 0.0);
        assert!(diff.is_finite() && diff > 0.0);
        let ratio = fourier / diff;
        assert!((0.05..20.0).contains(&ratio), "2D route ratio {ratio}");
    }

    #[test]
    fn eta_weight_transfer_constant_is_finite() {
        let grid = Grid::line(64, tau()).unwrap();
        let s = SmoothnessFunction::new(
            grid,
            (0..grid.len()).map(|i| 1.0 + 0.3 * grid.coord(i)[0].sin()).collect(),
        )
        .unwrap();
        let rep = check_eta_weight_transfer(&s, 2.0, 5).unwrap();
        assert!(rep.pass, "{:?}", rep.constants);
    }
}

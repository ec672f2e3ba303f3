//! Finite differences, ball means of differences, the difference-based norms
//! in both flavors (discrete level sums and a continuous scale integral), and
//! the smoothness-threshold condition checks that gate them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exponents::{SmoothnessFunction, VariableExponent, WeightSequence};
use crate::grid::{dft, idft, same_grid, Grid, SampledFunction};
use crate::lebesgue::{luxemburg_norm, FunctionSequence};
use crate::par;
use crate::{mixed_norm, Flavor};

fn binomial(m: u32, j: u32) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..j {
        acc = acc * (m - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn signed_binomials(m: u32) -> Vec<f64> {
    (0..=m)
        .map(|j| if j % 2 == 0 { binomial(m, j) } else { -binomial(m, j) })
        .collect()
}

/// Forward difference of order M with step h, taken spectrally: the Fourier
/// multiplier of `Δ^M_h` is `(e^{i ξ·h} - 1)^M`, which reproduces the
/// alternating shift sum exactly on the trigonometric model.
pub fn finite_difference(f: &SampledFunction, h: [f64; 2], m: u32) -> Result<SampledFunction> {
    if m == 0 {
        return Err(Error::InvalidConfig("difference order M must be at least 1".into()));
    }
    let grid = *f.grid();
    let mut spec = dft(f);
    for (i, c) in spec.coeffs_mut().iter_mut().enumerate() {
        let xi = grid.angular_freq(i);
        let phase = xi[0] * h[0] + xi[1] * h[1];
        let base = Complex64::from_polar(1.0, phase) - 1.0;
        let mut mult = Complex64::new(1.0, 0.0);
        for _ in 0..m {
            mult *= base;
        }
        *c *= mult;
    }
    Ok(idft(&spec))
}

/// Ball volume of the unit ball in the given dimension.
fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        _ => std::f64::consts::PI,
    }
}

const SUBLATTICE_PER_AXIS: usize = 32;

/// Ball means of differences `d^M_t f(x) = t^{-n} ∫_{|h|<=t} |Δ^M_h f(x)| dh`.
///
/// For `t >= 4·spacing` the quadrature runs over grid offsets (differences
/// become exact cyclic shifts); below that a fixed 32-per-axis midpoint
/// sub-lattice with spectral shifts is used. Weights are normalized so the
/// lattice measure equals the ball volume `t^n · Vol(B)` exactly.
pub fn ball_means(f: &SampledFunction, t: f64, m: u32) -> Result<SampledFunction> {
    if m == 0 {
        return Err(Error::InvalidConfig("difference order M must be at least 1".into()));
    }
    let grid = *f.grid();
    if !(t > 0.0) {
        return Err(Error::InvalidConfig(format!("ball radius must be positive, got {t}")));
    }
    if t > grid.period() / 4.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidConfig(format!(
            "ball radius {t} exceeds a quarter period {}",
            grid.period() / 4.0
        )));
    }
    let h = grid.spacing();
    let dim = grid.dim();
    let scale = t.powi(-(dim as i32));
    let values = if t >= 4.0 * h {
        let coeffs = signed_binomials(m);
        let lattice = grid_offset_lattice(&grid, t);
        let n = grid.points_per_axis() as isize;
        let len = grid.len() as isize;
        let vals = f.values();
        par::map_indices(grid.len(), |x| {
            let mut acc = 0.0;
            match dim {
                1 => {
                    for &(r, w) in &lattice {
                        let mut d = Complex64::new(0.0, 0.0);
                        for (j, &c) in coeffs.iter().enumerate() {
                            let steps = (m - j as u32) as isize * r[0];
                            let idx = (x as isize + steps).rem_euclid(len) as usize;
                            d += vals[idx] * c;
                        }
                        acc += w * d.norm();
                    }
                }
                _ => {
                    let ax = grid.axes(x);
                    for &(r, w) in &lattice {
                        let mut d = Complex64::new(0.0, 0.0);
                        for (j, &c) in coeffs.iter().enumerate() {
                            let k = (m - j as u32) as isize;
                            let i0 = (ax[0] as isize + k * r[0]).rem_euclid(n) as usize;
                            let i1 = (ax[1] as isize + k * r[1]).rem_euclid(n) as usize;
                            d += vals[i0 * grid.points_per_axis() + i1] * c;
                        }
                        acc += w * d.norm();
                    }
                }
            }
            Complex64::new(acc * scale, 0.0)
        })
    } else {
        let lattice = sub_lattice(&grid, t);
        let diffs: Vec<SampledFunction> = lattice
            .iter()
            .map(|&(off, _)| finite_difference(f, off, m))
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = lattice.iter().map(|&(_, w)| w).collect();
        par::map_indices(grid.len(), |x| {
            let mut acc = 0.0;
            for (d, &w) in diffs.iter().zip(&weights) {
                acc += w * d.values()[x].norm();
            }
            Complex64::new(acc * scale, 0.0)
        })
    };
    SampledFunction::new(grid, values)
}

/// Integer offsets within the ball of radius t, with cell weights.
/// 1D cells are clipped to [-t, t] (total measure 2t exactly); 2D cells are
/// uniform and rescaled so the total equals the ball area.
fn grid_offset_lattice(grid: &Grid, t: f64) -> Vec<([isize; 2], f64)> {
    let h = grid.spacing();
    let reach = (t / h).floor() as isize;
    let mut out = Vec::new();
    match grid.dim() {
        1 => {
            for r in -reach..=reach {
                let centre = r as f64 * h;
                let lo = (centre - 0.5 * h).max(-t);
                let hi = (centre + 0.5 * h).min(t);
                if hi > lo {
                    out.push(([r, 0], hi - lo));
                }
            }
        }
        _ => {
            let mut total = 0.0;
            for r0 in -reach..=reach {
                for r1 in -reach..=reach {
                    let d = ((r0 as f64 * h).powi(2) + (r1 as f64 * h).powi(2)).sqrt();
                    if d <= t {
                        out.push(([r0, r1], h * h));
                        total += h * h;
                    }
                }
            }
            let target = unit_ball_volume(2) * t * t;
            if total > 0.0 {
                let fix = target / total;
                for item in &mut out {
                    item.1 *= fix;
                }
            }
        }
    }
    out
}

/// Midpoint sub-lattice of 32 nodes per axis filling the ball of radius t.
fn sub_lattice(grid: &Grid, t: f64) -> Vec<([f64; 2], f64)> {
    let n = SUBLATTICE_PER_AXIS;
    let step = 2.0 * t / n as f64;
    let mut out = Vec::new();
    match grid.dim() {
        1 => {
            for i in 0..n {
                let u = -t + (i as f64 + 0.5) * step;
                out.push(([u, 0.0], step));
            }
        }
        _ => {
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let u = -t + (i as f64 + 0.5) * step;
                    let v = -t + (j as f64 + 0.5) * step;
                    if u.hypot(v) <= t {
                        out.push(([u, v], step * step));
                        total += step * step;
                    }
                }
            }
            let target = unit_ball_volume(2) * t * t;
            if total > 0.0 {
                let fix = target / total;
                for item in &mut out {
                    item.1 *= fix;
                }
            }
        }
    }
    out
}

/// Weighted ball-means sequence over a level window. The ball radius is
/// capped at a quarter period; levels whose nominal radius 2^{-k} exceeds the
/// cap reuse the capped mean while keeping their own weight.
fn difference_terms(
    f: &SampledFunction,
    weight_at: &(dyn Fn(i32, usize) -> f64 + Sync),
    m: u32,
    k_range: (i32, i32),
) -> Result<FunctionSequence> {
    let (k_lo, k_hi) = k_range;
    if k_lo > k_hi {
        return Err(Error::InvalidConfig(format!("empty level window [{k_lo}, {k_hi}]")));
    }
    let grid = *f.grid();
    let cap = grid.period() / 4.0;
    let ks: Vec<i32> = (k_lo..=k_hi).collect();
    let radii: Vec<f64> = ks.iter().map(|&k| (2.0f64).powi(-k).min(cap)).collect();
    // levels sharing the capped radius reuse one ball mean
    let mut unique: Vec<f64> = Vec::new();
    for &r in &radii {
        if !unique.iter().any(|&u| u == r) {
            unique.push(r);
        }
    }
    let means: Vec<Result<SampledFunction>> =
        par::map_slice(&unique, |&r| ball_means(f, r, m));
    let means: Vec<SampledFunction> = means.into_iter().collect::<Result<_>>()?;
    let terms: Vec<SampledFunction> = ks
        .iter()
        .zip(&radii)
        .map(|(&k, &r)| {
            let mean = &means[unique.iter().position(|&u| u == r).unwrap()];
            let weights: Vec<f64> = (0..grid.len()).map(|x| weight_at(k, x)).collect();
            mean.mul_real(&weights)
        })
        .collect::<Result<_>>()?;
    FunctionSequence::new(terms, k_lo as i64)
}

fn check_difference_order(m: u32, bound: f64, what: &str) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig("difference order M must be at least 1".into()));
    }
    if (m as f64) <= bound {
        return Err(Error::Precondition(format!(
            "difference order M must exceed {what}; M = {m} does not exceed {bound}"
        )));
    }
    Ok(())
}

fn difference_norm_smoothness(
    f: &SampledFunction,
    s: &SmoothnessFunction,
    p: &VariableExponent,
    q: &VariableExponent,
    m: u32,
    k_range: (i32, i32),
    flavor: Flavor,
) -> Result<f64> {
    same_grid(f.grid(), s.grid())?;
    same_grid(f.grid(), p.grid())?;
    check_difference_order(m, s.s_plus(), "s^+")?;
    let samples = s.samples().to_vec();
    let weight = move |k: i32, x: usize| (k as f64 * samples[x]).exp2();
    let terms = difference_terms(f, &weight, m, k_range)?;
    Ok(luxemburg_norm(f, p)? + mixed_norm(&terms, p, q, flavor)?)
}

/// Besov-flavor difference norm: `‖f‖_{L_{p(·)}}` plus the weighted ball-means
/// sequence `(2^{k s(·)} d^M_{2^{-k}} f)_k` in ℓ_{q(·)}(L_{p(·)}).
/// `k_range = (0, k_hi)` realizes the truncated variant.
pub fn besov_norm_differences(
    f: &SampledFunction,
    s: &SmoothnessFunction,
    p: &VariableExponent,
    q: &VariableExponent,
    m: u32,
    k_range: (i32, i32),
) -> Result<f64> {
    difference_norm_smoothness(f, s, p, q, m, k_range, Flavor::Besov)
}

/// Triebel-Lizorkin-flavor difference norm (level sum inside L_{p(·)}).
pub fn tl_norm_differences(
    f: &SampledFunction,
    s: &SmoothnessFunction,
    p: &VariableExponent,
    q: &VariableExponent,
    m: u32,
    k_range: (i32, i32),
) -> Result<f64> {
    difference_norm_smoothness(f, s, p, q, m, k_range, Flavor::TriebelLizorkin)
}

/// Geometric scale ladder `t_i = 2^{-i/per_octave}` for `i` in
/// `[-per_octave·k_hi, per_octave·k_hi]`, capped at a quarter period.
pub fn geometric_ladder(grid: &Grid, k_hi: u32, per_octave: u32) -> Vec<f64> {
    let cap = grid.period() / 4.0;
    let span = (per_octave * k_hi) as i64;
    let mut out: Vec<f64> = (-span..=span)
        .map(|i| (2.0f64).powf(-(i as f64) / per_octave as f64))
        .filter(|&t| t <= cap)
        .collect();
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out.dedup();
    out
}

/// Continuous-scale Triebel-Lizorkin difference norm: the scale integral
/// `∫ t^{-s(x)q(x)} (d^M_t f(x))^{q(x)} dt/t` evaluated by log-trapezoid
/// quadrature over the given ladder, then measured in L_{p(·)}.
pub fn tl_norm_differences_continuous(
    f: &SampledFunction,
    s: &SmoothnessFunction,
    p: &VariableExponent,
    q: &VariableExponent,
    m: u32,
    t_nodes: &[f64],
) -> Result<f64> {
    same_grid(f.grid(), s.grid())?;
    same_grid(f.grid(), p.grid())?;
    check_difference_order(m, s.s_plus(), "s^+")?;
    if t_nodes.is_empty() {
        return Err(Error::InvalidConfig("empty scale ladder".into()));
    }
    if q.has_infinity() {
        return Err(Error::Precondition(
            "continuous-scale norm requires q+ < infinity".into(),
        ));
    }
    let grid = *f.grid();
    let cap = grid.period() / 4.0;
    let mut nodes: Vec<f64> = t_nodes.to_vec();
    for &t in &nodes {
        if !(t > 0.0) || t > cap * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!("ladder node {t} outside (0, period/4]")));
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup();
    let means: Vec<Result<SampledFunction>> = par::map_slice(&nodes, |&t| ball_means(f, t, m));
    let means: Vec<SampledFunction> = means.into_iter().collect::<Result<_>>()?;
    let lnt: Vec<f64> = nodes.iter().map(|t| t.ln()).collect();
    let aggregated: Vec<f64> = par::map_indices(grid.len(), |x| {
        let sv = s.samples()[x];
        let qv = q.samples()[x];
        let g: Vec<f64> = nodes
            .iter()
            .zip(&means)
            .map(|(&t, d)| t.powf(-sv * qv) * d.values()[x].re.powf(qv))
            .collect();
        let mut integral = 0.0;
        for i in 1..g.len() {
            integral += 0.5 * (g[i] + g[i - 1]) * (lnt[i] - lnt[i - 1]);
        }
        integral.powf(1.0 / qv)
    });
    let inner = crate::lebesgue::luxemburg_of_abs(&grid, &aggregated, p)?;
    Ok(luxemburg_norm(f, p)? + inner)
}

fn difference_norm_weights(
    f: &SampledFunction,
    w: &WeightSequence,
    p: &VariableExponent,
    q: &VariableExponent,
    m: u32,
    k_range: (i32, i32),
    flavor: Flavor,
) -> Result<f64> {
    same_grid(f.grid(), w.grid())?;
    same_grid(f.grid(), p.grid())?;
    check_difference_order(m, w.alpha2(), "alpha2")?;
    if k_range.1 > w.top_level() as i32 {
        return Err(Error::LevelMismatch(format!(
            "k_hi = {} exceeds the top weight level {}",
            k_range.1,
            w.top_level()
        )));
    }
    let levels: Vec<Vec<f64>> = w.levels().to_vec();
    let alpha1 = w.alpha1();
    // below level 0 the sequence extrapolates by its declared lower growth rate
    let weight = move |k: i32, x: usize| {
        if k >= 0 {
            levels[k as usize][x]
        } else {
            levels[0][x] * (k as f64 * alpha1).exp2()
        }
    };
    let terms = difference_terms(f, &weight, m, k_range)?;
    Ok(luxemburg_norm(f, p)? + mixed_norm(&terms, p, q, flavor)?)
}

/// Difference norm against an admissible weight sequence (Besov flavor).
pub fn besov_norm_differences_2ml(
    f: &SampledFunction,
    w: &WeightSequence,
    p: &VariableExponent,
    q: &VariableExponent,
    m: u32,
    k_range: (i32, i32),
) -> Result<f64> {
    difference_norm_weights(f, w, p, q, m, k_range, Flavor::Besov)
}

/// Difference norm against an admissible weight sequence (TL flavor).
pub fn tl_norm_differences_2ml(
    f: &SampledFunction,
    w: &WeightSequence,
    p: &VariableExponent,
    q: &VariableExponent,
    m: u32,
    k_range: (i32, i32),
) -> Result<f64> {
    difference_norm_weights(f, w, p, q, m, k_range, Flavor::TriebelLizorkin)
}

/// Either smoothness description accepted by the condition checks.
pub enum SmoothnessSpec<'a> {
    Function(&'a SmoothnessFunction),
    Weights(&'a WeightSequence),
}

/// Outcome of the admissibility-threshold checks gating the difference
/// characterization.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConditionReport {
    pub ok: bool,
    pub flavor: Flavor,
    pub dim: usize,
    pub sigma_p: f64,
    pub sigma_pq: f64,
    pub threshold_lhs: f64,
    pub threshold_rhs: f64,
    pub m: u32,
    pub m_bound: f64,
    pub m_ok: bool,
    pub lower_ok: bool,
    pub clog_inv_q: f64,
    pub clog_smoothness: f64,
    pub violated: Vec<String>,
}

/// Evaluate the lower-smoothness thresholds `σ_p`, `σ_{p,q}` and the
/// difference-order bound. The constant-exponent reductions are exact:
/// `p, q >= 1` collapses the requirement to `s^- > 0`, and constant
/// `p = q = 1/2` gives the classical threshold `n`.
pub fn check_conditions(
    spec: SmoothnessSpec<'_>,
    p: &VariableExponent,
    q: &VariableExponent,
    m: u32,
    flavor: Flavor,
) -> ConditionReport {
    let n = p.grid().dim() as f64;
    let pm = p.p_minus();
    let qm = q.p_minus();
    let sigma_p = n * (1.0 / pm.min(1.0) - 1.0);
    let sigma_pq = n * (1.0 / pm.min(qm).min(1.0) - 1.0);
    let (lhs, alpha_like, m_bound) = match &spec {
        SmoothnessSpec::Function(s) => (s.s_minus(), s.clog_estimate(), s.s_plus()),
        SmoothnessSpec::Weights(w) => (w.alpha1(), w.alpha(), w.alpha2()),
    };
    let clog_inv_q = q.clog_estimate();
    let rhs = match flavor {
        Flavor::TriebelLizorkin => sigma_pq * (1.0 + alpha_like / n * pm.min(qm)),
        Flavor::Besov => sigma_p * (1.0 + clog_inv_q / n + alpha_like / n * pm),
    };
    let m_ok = (m as f64) > m_bound;
    let lower_ok = lhs > rhs;
    let mut violated = Vec::new();
    if !m_ok {
        violated.push(format!("M > {m_bound} required, got M = {m}"));
    }
    if !lower_ok {
        violated.push(format!(
            "lower smoothness must exceed the threshold: {lhs} <= {rhs}"
        ));
    }
    ConditionReport {
        ok: m_ok && lower_ok,
        flavor,
        dim: p.grid().dim(),
        sigma_p,
        sigma_pq,
        threshold_lhs: lhs,
        threshold_rhs: rhs,
        m,
        m_bound,
        m_ok,
        lower_ok,
        clog_inv_q,
        clog_smoothness: alpha_like,
        violated,
    }
}

//! Frequency-side machinery: dyadic resolution of unity, Littlewood-Paley
//! blocks and the norms built from them, Peetre maximal functions, polynomial
//! decay kernels, and compactly supported local-means kernels and norms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exponents::{VariableExponent, WeightSequence};
use crate::grid::{dft, idft, same_grid, Grid, SampledFunction};
use crate::lebesgue::{luxemburg_norm, FunctionSequence};
use crate::par;
use crate::{mixed_norm, Flavor};

/// Dyadic frequency partition φ_0..φ_J sampled on a grid's frequencies.
#[derive(Clone, Debug)]
pub struct FilterBank {
    grid: Grid,
    filters: Vec<Vec<f64>>,
    epsilon: f64,
    moment_order: usize,
}

impl FilterBank {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of levels, J + 1.
    pub fn levels(&self) -> usize {
        self.filters.len()
    }

    pub fn top_level(&self) -> usize {
        self.filters.len() - 1
    }

    pub fn filter(&self, j: usize) -> &[f64] {
        &self.filters[j]
    }

    /// Tauberian radius metadata of the underlying profile family.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Vanishing-moment count of the band filters; `usize::MAX` because they
    /// vanish identically near the origin.
    pub fn moment_order(&self) -> usize {
        self.moment_order
    }
}

fn cutoff(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step falling from 1 at t = 0 to 0 at t = 1.
fn smooth_step(t: f64) -> f64 {
    let a = cutoff(1.0 - t);
    let b = cutoff(t);
    a / (a + b)
}

/// Radial profile of the base filter: 1 on [0, 1], smooth step on (1, 2), 0 beyond.
pub fn phi0_profile(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        smooth_step(r - 1.0)
    }
}

/// Radial profile of the level-j filter via the dyadic difference formula.
pub fn phi_profile(j: usize, r: f64) -> f64 {
    if j == 0 {
        return phi0_profile(r);
    }
    let fine = phi0_profile(r * (2.0f64).powi(-(j as i32)));
    let coarse = phi0_profile(r * (2.0f64).powi(-(j as i32) + 1));
    fine - coarse
}

/// Largest top level whose band stays below the grid Nyquist frequency.
pub fn default_top_level(grid: &Grid) -> usize {
    let mut j = 0usize;
    while (2.0f64).powi(j as i32 + 2) <= grid.nyquist() {
        j += 1;
    }
    j
}

/// Build the sampled resolution of unity up to level `j_top`.
pub fn build_resolution_of_unity(grid: Grid, j_top: usize) -> Result<FilterBank> {
    if (2.0f64).powi(j_top as i32 + 1) > grid.nyquist() {
        return Err(Error::InvalidConfig(format!(
            "top band 2^{} exceeds the Nyquist frequency {}",
            j_top as i32 + 1,
            grid.nyquist()
        )));
    }
    let filters = (0..=j_top)
        .map(|j| {
            (0..grid.len())
                .map(|i| phi_profile(j, grid.freq_magnitude(i)))
                .collect()
        })
        .collect();
    Ok(FilterBank { grid, filters, epsilon: 2.0, moment_order: usize::MAX })
}

/// Littlewood-Paley blocks: term j is the inverse transform of φ_j · f̂.
pub fn lp_blocks(f: &SampledFunction, bank: &FilterBank) -> Result<FunctionSequence> {
    same_grid(f.grid(), bank.grid())?;
    let spec = dft(f);
    let blocks: Vec<SampledFunction> = par::map_slice(&bank.filters, |filter| {
        let mut s = spec.clone();
        for (c, &w) in s.coeffs_mut().iter_mut().zip(filter.iter()) {
            *c *= w;
        }
        idft(&s)
    });
    FunctionSequence::from_terms(blocks)
}

fn weighted_blocks(
    blocks: &FunctionSequence,
    w: &WeightSequence,
) -> Result<FunctionSequence> {
    if blocks.len() != w.levels().len() {
        return Err(Error::LevelMismatch(format!(
            "{} blocks vs {} weight levels",
            blocks.len(),
            w.levels().len()
        )));
    }
    let terms: Vec<SampledFunction> = blocks
        .terms()
        .iter()
        .zip(w.levels())
        .map(|(b, lvl)| b.mul_real(lvl))
        .collect::<Result<_>>()?;
    FunctionSequence::from_terms(terms)
}

/// Frequency-side norm of Besov type: the weighted block sequence measured in
/// ℓ_{q(·)}(L_{p(·)}).
pub fn besov_norm_fourier(
    f: &SampledFunction,
    bank: &FilterBank,
    w: &WeightSequence,
    p: &VariableExponent,
    q: &VariableExponent,
) -> Result<f64> {
    let blocks = lp_blocks(f, bank)?;
    let terms = weighted_blocks(&blocks, w)?;
    mixed_norm(&terms, p, q, Flavor::Besov)
}

/// Frequency-side norm of Triebel-Lizorkin type (L_{p(·)}(ℓ_{q(·)})).
pub fn tl_norm_fourier(
    f: &SampledFunction,
    bank: &FilterBank,
    w: &WeightSequence,
    p: &VariableExponent,
    q: &VariableExponent,
) -> Result<f64> {
    let blocks = lp_blocks(f, bank)?;
    let terms = weighted_blocks(&blocks, w)?;
    mixed_norm(&terms, p, q, Flavor::TriebelLizorkin)
}

/// Peetre maximal function of a block at dyadic level k: at each x the
/// largest `|block(y)| / (1 + 2^k dist(x, y))^a` over grid points y. The
/// whole bracket is raised to the power a, so the output is pointwise
/// antitone in a and dominates `|block|`.
pub fn peetre_maximal(block: &SampledFunction, level: usize, a: f64) -> Result<SampledFunction> {
    if !(a > 0.0) {
        return Err(Error::InvalidConfig(format!("peetre parameter a must be positive, got {a}")));
    }
    let grid = *block.grid();
    let scale = (2.0f64).powi(level as i32);
    // damping factor depends only on the index offset x - y
    let damp: Vec<f64> = (0..grid.len())
        .map(|off| (1.0 + scale * grid.dist_to_origin(off)).powf(-a))
        .collect();
    let abs = block.abs_values();
    let n = grid.points_per_axis();
    let values: Vec<Complex64> = match grid.dim() {
        1 => par::map_indices(grid.len(), |x| {
            let mut best = 0.0f64;
            for (y, &av) in abs.iter().enumerate() {
                let off = (x + grid.len() - y) % grid.len();
                let v = av * damp[off];
                if v > best {
                    best = v;
                }
            }
            Complex64::new(best, 0.0)
        }),
        _ => par::map_indices(grid.len(), |x| {
            let ax = grid.axes(x);
            let mut best = 0.0f64;
            for (y, &av) in abs.iter().enumerate() {
                let ay = grid.axes(y);
                let o0 = (ax[0] + n - ay[0]) % n;
                let o1 = (ax[1] + n - ay[1]) % n;
                let v = av * damp[o0 * n + o1];
                if v > best {
                    best = v;
                }
            }
            Complex64::new(best, 0.0)
        }),
    };
    SampledFunction::new(grid, values)
}

/// Polynomial-decay kernel `2^{nν} (1 + 2^ν |x|)^{-m}` with periodic |x|.
pub fn eta_kernel(grid: Grid, nu: u32, m: f64) -> Result<SampledFunction> {
    if !(m > 0.0) {
        return Err(Error::InvalidConfig(format!("eta kernel exponent m must be positive, got {m}")));
    }
    let scale = (2.0f64).powi(nu as i32);
    let amp = (2.0f64).powi((nu as i32) * grid.dim() as i32);
    let values = (0..grid.len())
        .map(|i| Complex64::new(amp * (1.0 + scale * grid.dist_to_origin(i)).powf(-m), 0.0))
        .collect();
    SampledFunction::new(grid, values)
}

/// Compactly supported analysis kernels: a normalized bump and an iterated
/// discrete Laplacian of a bump, carrying their measured Tauberian radius.
#[derive(Clone, Debug)]
pub struct KernelSet {
    k0: SampledFunction,
    k: SampledFunction,
    support_radius: f64,
    moment_order: usize,
    tauber_epsilon: f64,
}

impl KernelSet {
    pub fn k0(&self) -> &SampledFunction {
        &self.k0
    }

    pub fn k(&self) -> &SampledFunction {
        &self.k
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn moment_order(&self) -> usize {
        self.moment_order
    }

    pub fn tauber_epsilon(&self) -> f64 {
        self.tauber_epsilon
    }

    pub fn grid(&self) -> &Grid {
        self.k0.grid()
    }
}

fn bump(grid: &Grid, radius: f64, width: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let d = grid.dist_to_origin(i);
            let u = d / radius;
            if u < 1.0 {
                (-width / (1.0 - u * u)).exp()
            } else {
                0.0
            }
        })
        .collect()
}

fn discrete_laplacian(grid: &Grid, v: &[f64]) -> Vec<f64> {
    let n = grid.points_per_axis();
    let h2 = grid.spacing() * grid.spacing();
    (0..grid.len())
        .map(|i| {
            let ax = grid.axes(i);
            let mut acc = 0.0;
            let axis_term = |plus: usize, minus: usize| -> f64 { v[plus] - 2.0 * v[i] + v[minus] };
            match grid.dim() {
                1 => {
                    let p = (ax[0] + 1) % n;
                    let m = (ax[0] + n - 1) % n;
                    acc += axis_term(p, m);
                }
                _ => {
                    let p0 = grid.flat([(ax[0] + 1) % n, ax[1]]);
                    let m0 = grid.flat([(ax[0] + n - 1) % n, ax[1]]);
                    acc += axis_term(p0, m0);
                    let p1 = grid.flat([ax[0], (ax[1] + 1) % n]);
                    let m1 = grid.flat([ax[0], (ax[1] + n - 1) % n]);
                    acc += axis_term(p1, m1);
                }
            }
            acc / h2
        })
        .collect()
}

/// Discrete moment `Σ y^β k(y) · spacing^dim` with y the centered coordinate.
pub fn discrete_moment(k: &SampledFunction, beta: [u32; 2]) -> f64 {
    let grid = k.grid();
    let cell = grid.spacing().powi(grid.dim() as i32);
    let mut acc = 0.0;
    for (i, v) in k.values().iter().enumerate() {
        let y = grid.centered_coord(i);
        let mut w = v.re;
        if beta[0] > 0 {
            w *= y[0].powi(beta[0] as i32);
        }
        if beta[1] > 0 {
            w *= y[1].powi(beta[1] as i32);
        }
        acc += w;
    }
    acc * cell
}

fn multi_indices(dim: usize, max_order: usize) -> Vec<[u32; 2]> {
    let mut out = Vec::new();
    for total in 0..max_order {
        match dim {
            1 => out.push([total as u32, 0]),
            _ => {
                for b0 in 0..=total {
                    out.push([b0 as u32, (total - b0) as u32]);
                }
            }
        }
    }
    out
}

/// Absolute symbol |k̂| on the grid frequencies (continuous normalization).
fn symbol_abs(k: &SampledFunction) -> Vec<f64> {
    let spec = dft(k);
    let measure = k.grid().measure();
    spec.coeffs().iter().map(|c| c.norm() * measure).collect()
}

/// Build the local-means kernel pair: `k0` a normalized smooth bump with
/// k̂0(0) = 1, and `k` the discrete Laplacian applied ⌈R/2⌉ times to a bump,
/// which kills all discrete moments of order < R by summation by parts while
/// keeping compact support. The Tauberian radius is measured from the actual
/// spectra; the bump width is adjusted and the construction retried if no
/// radius verifies.
pub fn build_local_means_kernels(
    grid: Grid,
    moment_order: usize,
    support_radius: f64,
) -> Result<KernelSet> {
    if !(support_radius > 0.0 && support_radius <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "support radius must lie in (0, 1], got {support_radius}"
        )));
    }
    if 2.0 * support_radius >= grid.period() {
        return Err(Error::InvalidConfig(
            "kernel support does not fit inside the fundamental domain".into(),
        ));
    }
    let h = grid.spacing();
    let laplacian_steps = moment_order.div_ceil(2);
    let inner_radius = support_radius - laplacian_steps as f64 * h;
    if inner_radius / h < 16.0 {
        return Err(Error::InvalidConfig(format!(
            "kernel ball must contain at least 16 grid points per axis, has {:.1}",
            inner_radius / h
        )));
    }

    let cell = h.powi(grid.dim() as i32);
    for &width in &[1.0, 0.5, 2.0, 0.25, 4.0] {
        let b = bump(&grid, inner_radius, width);
        let mass: f64 = b.iter().sum::<f64>() * cell;
        let k0_vals: Vec<f64> = b.iter().map(|&v| v / mass).collect();
        let k0 = SampledFunction::from_real(grid, k0_vals)?;

        let mut kv = b;
        for _ in 0..laplacian_steps {
            kv = discrete_laplacian(&grid, &kv);
        }
        let l1: f64 = kv.iter().map(|v| v.abs()).sum::<f64>() * cell;
        if l1 == 0.0 {
            continue;
        }
        let kv: Vec<f64> = kv.iter().map(|v| v / l1).collect();
        let k = SampledFunction::from_real(grid, kv)?;

        // moment check: rounding noise only, relative to the L1 mass (= 1)
        let mut moments_ok = true;
        for beta in multi_indices(grid.dim(), moment_order) {
            if discrete_moment(&k, beta).abs() > 1e-10 {
                moments_ok = false;
                break;
            }
        }
        if !moments_ok {
            continue;
        }

        if let Some(eps) = measure_tauberian(&grid, &k0, &k) {
            return Ok(KernelSet {
                k0,
                k,
                support_radius,
                moment_order,
                tauber_epsilon: eps,
            });
        }
    }
    Err(Error::Construction(
        "no bump width produced a verified Tauberian radius after 5 attempts".into(),
    ))
}

/// Largest ε for which |k̂0| > 0 on {|ξ| < ε} and |k̂| > 0 on {ε/2 < |ξ| < 2ε},
/// checked on grid frequencies against a small floor relative to the peaks.
fn measure_tauberian(grid: &Grid, k0: &SampledFunction, k: &SampledFunction) -> Option<f64> {
    let s0 = symbol_abs(k0);
    let s1 = symbol_abs(k);
    let floor0 = 1e-8 * s0.iter().cloned().fold(0.0, f64::max);
    let floor1 = 1e-8 * s1.iter().cloned().fold(0.0, f64::max);
    let xi_min = 2.0 * std::f64::consts::PI / grid.period();
    let mut best = None;
    let mut eps = xi_min;
    while eps <= grid.nyquist() {
        let mut ok0 = true;
        let mut ok1 = true;
        let mut annulus_nonempty = false;
        for i in 0..grid.len() {
            let r = grid.freq_magnitude(i);
            if r < eps && s0[i] <= floor0 {
                ok0 = false;
                break;
            }
            if r > eps / 2.0 && r < 2.0 * eps {
                annulus_nonempty = true;
                if s1[i] <= floor1 {
                    ok1 = false;
                    break;
                }
            }
        }
        if ok0 && ok1 && annulus_nonempty {
            best = Some(eps);
        }
        eps *= 2.0f64.powf(0.25);
    }
    best
}

/// Local-means building block `k(t, f)(x) = ∫ k(y) f(x + ty) dy`, realized as
/// the Fourier multiplier `Σ_y k(y) h^n e^{i t ξ · y}` over the kernel
/// support (the same quadrature-of-shifts sum, evaluated spectrally).
pub fn local_means_block(
    f: &SampledFunction,
    kernel: &SampledFunction,
    t: f64,
) -> Result<SampledFunction> {
    same_grid(f.grid(), kernel.grid())?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidConfig(format!("local means scale t must lie in (0, 1], got {t}")));
    }
    let grid = *f.grid();
    let cell = grid.spacing().powi(grid.dim() as i32);
    let support: Vec<(f64, [f64; 2])> = kernel
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.re != 0.0)
        .map(|(i, v)| (v.re, grid.centered_coord(i)))
        .collect();
    let mut spec = dft(f);
    let multipliers: Vec<Complex64> = par::map_indices(grid.len(), |i| {
        let xi = grid.angular_freq(i);
        let mut acc = Complex64::new(0.0, 0.0);
        for (kv, y) in &support {
            let phase = t * (xi[0] * y[0] + xi[1] * y[1]);
            acc += Complex64::from_polar(*kv, phase);
        }
        acc * cell
    });
    for (c, m) in spec.coeffs_mut().iter_mut().zip(&multipliers) {
        *c *= m;
    }
    Ok(idft(&spec))
}

/// Local-means norm: the k0 block at unit scale in L_{p(·)} plus the dyadic
/// k blocks weighted and measured in the mixed norm of the requested flavor.
pub fn local_means_norm(
    f: &SampledFunction,
    kernels: &KernelSet,
    w: &WeightSequence,
    p: &VariableExponent,
    q: &VariableExponent,
    flavor: Flavor,
) -> Result<f64> {
    if (kernels.moment_order() as f64) <= w.alpha2() {
        return Err(Error::Precondition(format!(
            "local means kernels need moment order R > alpha2; R = {} does not exceed alpha2 = {}",
            kernels.moment_order(),
            w.alpha2()
        )));
    }
    same_grid(f.grid(), kernels.grid())?;
    let block0 = local_means_block(f, kernels.k0(), 1.0)?;
    let base = luxemburg_norm(&block0.mul_real(w.level(0))?, p)?;
    let j_top = w.top_level();
    if j_top == 0 {
        return Ok(base);
    }
    let js: Vec<usize> = (1..=j_top).collect();
    let blocks: Vec<Result<SampledFunction>> = par::map_slice(&js, |&j| {
        let b = local_means_block(f, kernels.k(), (2.0f64).powi(-(j as i32)))?;
        b.mul_real(w.level(j))
    });
    let terms: Vec<SampledFunction> = blocks.into_iter().collect::<Result<_>>()?;
    let seq = FunctionSequence::new(terms, 1)?;
    Ok(base + mixed_norm(&seq, p, q, flavor)?)
}

/// Maximal-function norm: every local-means block (including level 0) is
/// replaced by its Peetre maximal function before weighting, and the whole
/// sequence is measured in one mixed norm.
pub fn peetre_norm(
    f: &SampledFunction,
    kernels: &KernelSet,
    w: &WeightSequence,
    p: &VariableExponent,
    q: &VariableExponent,
    a: f64,
    flavor: Flavor,
) -> Result<f64> {
    if (kernels.moment_order() as f64) <= w.alpha2() {
        return Err(Error::Precondition(format!(
            "local means kernels need moment order R > alpha2; R = {} does not exceed alpha2 = {}",
            kernels.moment_order(),
            w.alpha2()
        )));
    }
    same_grid(f.grid(), kernels.grid())?;
    let j_top = w.top_level();
    let js: Vec<usize> = (0..=j_top).collect();
    let terms: Vec<Result<SampledFunction>> = par::map_slice(&js, |&j| {
        let block = if j == 0 {
            local_means_block(f, kernels.k0(), 1.0)?
        } else {
            local_means_block(f, kernels.k(), (2.0f64).powi(-(j as i32)))?
        };
        peetre_maximal(&block, j, a)?.mul_real(w.level(j))
    });
    let seq = FunctionSequence::from_terms(terms.into_iter().collect::<Result<_>>()?)?;
    mixed_norm(&seq, p, q, flavor)
}

//! Deterministic sample families for the experiment harness. Every sample is
//! reproducible from `(family, grid, seed, index)` alone; random draws come
//! from a counter-based stream keyed by seed and index, so parallel and
//! serial runs generate identical data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{idft, Grid, SampledFunction};

/// Function families exercised by the harness. `Zero` is a diagnostic family
/// producing the zero function.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    BandLimitedRandom {
        /// Coefficients are drawn for |ξ| ≤ 2^{level-1}.
        level: usize,
        /// Spectral decay exponent; coefficient size scales like |ξ|^{-decay}.
        decay: f64,
    },
    GaussianBump {
        width: f64,
    },
    Cusp {
        gamma: f64,
        x0: [f64; 2],
    },
    Chirp {
        gamma: f64,
        beta: f64,
        x0: [f64; 2],
    },
    Zero,
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::BandLimitedRandom { level, decay } => {
                format!("band_limited_random(level={level}, decay={decay})")
            }
            Family::GaussianBump { width } => format!("gaussian_bump(width={width})"),
            Family::Cusp { gamma, x0 } => format!("cusp(gamma={gamma}, x0={},{})", x0[0], x0[1]),
            Family::Chirp { gamma, beta, x0 } => {
                format!("chirp(gamma={gamma}, beta={beta}, x0={},{})", x0[0], x0[1])
            }
            Family::Zero => "zero".into(),
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Counter-based per-sample stream keyed by (seed, index).
pub(crate) fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ index.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        state = splitmix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box-Muller from two uniforms
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Smooth factor flattening a profile at the wrap point of every axis.
fn wrap_window(grid: &Grid, x: [f64; 2], x0: [f64; 2]) -> f64 {
    let l = grid.period();
    let mut w = 1.0;
    for axis in 0..grid.dim() {
        let d = grid.wrap_diff(x[axis] - x0[axis]);
        w *= (std::f64::consts::PI * d / l).cos().powi(2);
    }
    w
}

/// Deterministic sample of the requested family.
pub fn make_family_sample(
    family: &Family,
    grid: Grid,
    seed: u64,
    index: u64,
) -> Result<SampledFunction> {
    match family {
        Family::Zero => Ok(SampledFunction::zeros(grid)),
        Family::BandLimitedRandom { level, decay } => {
            if *level == 0 {
                return Err(Error::InvalidConfig("band level must be at least 1".into()));
            }
            let cutoff = (2.0f64).powi(*level as i32 - 1);
            if cutoff > grid.nyquist() {
                return Err(Error::InvalidConfig(format!(
                    "band 2^{} exceeds the Nyquist frequency",
                    *level as i32 - 1
                )));
            }
            let mut rng = sample_rng(seed, index);
            let mut spec = crate::grid::dft(&SampledFunction::zeros(grid));
            for i in 0..grid.len() {
                let mag = grid.freq_magnitude(i);
                if mag <= cutoff {
                    let (re, im) = gaussian_pair(&mut rng);
                    let amp = mag.max(1.0).powf(-decay);
                    spec.coeffs_mut()[i] = Complex64::new(re * amp, im * amp);
                }
            }
            Ok(idft(&spec))
        }
        Family::GaussianBump { width } => {
            if !(*width > 0.0) {
                return Err(Error::InvalidConfig("bump width must be positive".into()));
            }
            let l = grid.period();
            let centre = [l / 2.0, l / 2.0];
            Ok(SampledFunction::from_fn(grid, |x| {
                let mut acc = 0.0;
                // periodize over the neighbouring images
                match grid.dim() {
                    1 => {
                        for m in -1..=1 {
                            let d = x[0] - centre[0] + m as f64 * l;
                            acc += (-d * d / (2.0 * width * width)).exp();
                        }
                    }
                    _ => {
                        for m0 in -1..=1 {
                            for m1 in -1..=1 {
                                let d0 = x[0] - centre[0] + m0 as f64 * l;
                                let d1 = x[1] - centre[1] + m1 as f64 * l;
                                acc += (-(d0 * d0 + d1 * d1) / (2.0 * width * width)).exp();
                            }
                        }
                    }
                }
                Complex64::new(acc, 0.0)
            }))
        }
        Family::Cusp { gamma, x0 } => {
            if !(*gamma > 0.0) {
                return Err(Error::InvalidConfig("cusp exponent must be positive".into()));
            }
            let x0 = grid.coord(grid.nearest_index(*x0));
            Ok(SampledFunction::from_fn(grid, |x| {
                let d = grid.periodic_dist_coord(x, x0);
                Complex64::new(d.powf(*gamma) * wrap_window(&grid, x, x0), 0.0)
            }))
        }
        Family::Chirp { gamma, beta, x0 } => {
            if !(*gamma > 0.0) || !(*beta > 0.0) {
                return Err(Error::InvalidConfig("chirp exponents must be positive".into()));
            }
            let x0 = grid.coord(grid.nearest_index(*x0));
            let mollify = grid.spacing() / 2.0;
            Ok(SampledFunction::from_fn(grid, |x| {
                let d = grid.periodic_dist_coord(x, x0);
                let d_eps = d.hypot(mollify);
                let v = d.powf(*gamma) * (d_eps.powf(-beta)).sin() * wrap_window(&grid, x, x0);
                Complex64::new(v, 0.0)
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::differences::ball_means;
    use crate::frequency::{build_resolution_of_unity, default_top_level, lp_blocks};
    use std::f64::consts::PI;

    fn tau() -> f64 {
        2.0 * PI
    }

    #[test]
    fn samples_are_reproducible() {
        let g = Grid::line(64, tau()).unwrap();
        let fam = Family::BandLimitedRandom { level: 4, decay: 1.5 };
        let a = make_family_sample(&fam, g, 42, 7).unwrap();
        let b = make_family_sample(&fam, g, 42, 7).unwrap();
        assert_eq!(a.values(), b.values());
        let c = make_family_sample(&fam, g, 42, 8).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn band_limited_sample_reconstructs_from_blocks() {
        let g = Grid::line(128, tau()).unwrap();
        let j = default_top_level(&g);
        let bank = build_resolution_of_unity(g, j).unwrap();
        let f = make_family_sample(&Family::BandLimitedRandom { level: j, decay: 1.5 }, g, 3, 0).unwrap();
        let blocks = lp_blocks(&f, &bank).unwrap();
        let mut sum = SampledFunction::zeros(g);
        for b in blocks.terms() {
            sum = sum.add(b).unwrap();
        }
        let scale = f.max_abs();
        for (a, b) in sum.values().iter().zip(f.values()) {
            assert!((a - b).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn lipschitz_cusp_has_linear_ball_means() {
        let g = Grid::line(512, tau()).unwrap();
        let f = make_family_sample(&Family::Cusp { gamma: 1.0, x0: [PI, 0.0] }, g, 0, 0).unwrap();
        // d^1_t <= C t for a Lipschitz profile
        let mut worst: f64 = 0.0;
        for k in 2..=5 {
            let t = (2.0f64).powi(-k);
            let d = ball_means(&f, t, 1).unwrap();
            worst = worst.max(d.max_abs() / t);
        }
        assert!(worst < 4.0, "Lipschitz constant estimate blew up: {worst}");
    }

    #[test]
    fn chirp_and_bump_are_finite_and_centered() {
        let g = Grid::line(128, tau()).unwrap();
        let chirp =
            make_family_sample(&Family::Chirp { gamma: 0.6, beta: 1.0, x0: [PI, 0.0] }, g, 0, 0)
                .unwrap();
        assert!(chirp.values().iter().all(|v| v.re.is_finite()));
        assert_eq!(chirp.values()[g.nearest_index([PI, 0.0])].re, 0.0);

        let bump = make_family_sample(&Family::GaussianBump { width: 0.4 }, g, 0, 0).unwrap();
        let peak_idx = g.nearest_index([PI, 0.0]);
        let peak = bump.values()[peak_idx].re;
        assert!(bump.values().iter().all(|v| v.re <= peak + 1e-12));
    }

    #[test]
    fn invalid_family_parameters_are_rejected() {
        let g = Grid::line(32, tau()).unwrap();
        assert!(make_family_sample(&Family::Cusp { gamma: 0.0, x0: [0.0, 0.0] }, g, 0, 0).is_err());
        assert!(make_family_sample(&Family::BandLimitedRandom { level: 0, decay: 1.0 }, g, 0, 0).is_err());
        assert!(make_family_sample(&Family::BandLimitedRandom { level: 30, decay: 1.0 }, g, 0, 0).is_err());
    }
}

//! Uniform periodic grids, sampled functions and spectral primitives.
//!
//! Every function handled by this crate is modelled as the trigonometric
//! polynomial interpolating its samples on the torus `[0, L)^dim`. On that
//! class the discrete transform, spectral shifts and rectangle-rule
//! quadrature below are exact, which is what makes the norm machinery in the
//! other modules testable against closed forms.

use std::cell::RefCell;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::par;

/// Uniform periodic grid on `[0, L)^dim` with a power-of-two point count per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    period: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, period: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidConfig(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidConfig(format!("period must be positive, got {period}")));
        }
        Ok(Grid { dim, n, period })
    }

    pub fn line(n: usize, period: f64) -> Result<Self> {
        Self::new(1, n, period)
    }

    pub fn square(n: usize, period: f64) -> Result<Self> {
        Self::new(2, n, period)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Total number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn measure(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    pub fn axes(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.n, idx % self.n],
        }
    }

    pub fn flat(&self, ax: [usize; 2]) -> usize {
        match self.dim {
            1 => ax[0],
            _ => ax[0] * self.n + ax[1],
        }
    }

    pub fn coord(&self, idx: usize) -> [f64; 2] {
        let ax = self.axes(idx);
        let h = self.spacing();
        [ax[0] as f64 * h, ax[1] as f64 * h]
    }

    /// Integer frequency per axis, in `(-N/2, N/2]`.
    pub fn int_freq(&self, idx: usize) -> [i64; 2] {
        let ax = self.axes(idx);
        let half = self.n / 2;
        let conv = |i: usize| -> i64 {
            if i <= half {
                i as i64
            } else {
                i as i64 - self.n as i64
            }
        };
        match self.dim {
            1 => [conv(ax[0]), 0],
            _ => [conv(ax[0]), conv(ax[1])],
        }
    }

    /// Angular frequency `2π k / L` per axis.
    pub fn angular_freq(&self, idx: usize) -> [f64; 2] {
        let k = self.int_freq(idx);
        let unit = 2.0 * std::f64::consts::PI / self.period;
        [k[0] as f64 * unit, k[1] as f64 * unit]
    }

    /// Euclidean magnitude of the angular frequency at a spectrum index.
    pub fn freq_magnitude(&self, idx: usize) -> f64 {
        let w = self.angular_freq(idx);
        match self.dim {
            1 => w[0].abs(),
            _ => w[0].hypot(w[1]),
        }
    }

    /// Largest angular frequency representable along one axis (`π N / L`).
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.period
    }

    /// Wrap a coordinate difference into `[-L/2, L/2)`.
    pub fn wrap_diff(&self, d: f64) -> f64 {
        let l = self.period;
        let mut r = d % l;
        if r < -l / 2.0 {
            r += l;
        } else if r >= l / 2.0 {
            r -= l;
        }
        r
    }

    /// Periodic distance between two coordinates.
    pub fn periodic_dist_coord(&self, x: [f64; 2], y: [f64; 2]) -> f64 {
        let d0 = self.wrap_diff(x[0] - y[0]);
        match self.dim {
            1 => d0.abs(),
            _ => {
                let d1 = self.wrap_diff(x[1] - y[1]);
                d0.hypot(d1)
            }
        }
    }

    /// Periodic distance between two grid points given by flat indices.
    pub fn periodic_dist(&self, i: usize, j: usize) -> f64 {
        self.periodic_dist_coord(self.coord(i), self.coord(j))
    }

    /// Coordinate of a grid point relative to the origin, wrapped to `[-L/2, L/2)`.
    pub fn centered_coord(&self, idx: usize) -> [f64; 2] {
        let c = self.coord(idx);
        [self.wrap_diff(c[0]), self.wrap_diff(c[1])]
    }

    /// Distance from a grid point to the origin on the torus.
    pub fn dist_to_origin(&self, idx: usize) -> f64 {
        self.periodic_dist_coord(self.coord(idx), [0.0, 0.0])
    }

    /// Nearest grid index to a coordinate.
    pub fn nearest_index(&self, x: [f64; 2]) -> usize {
        let h = self.spacing();
        let snap = |v: f64| -> usize {
            let k = (v / h).round() as i64;
            k.rem_euclid(self.n as i64) as usize
        };
        match self.dim {
            1 => snap(x[0]),
            _ => self.flat([snap(x[0]), snap(x[1])]),
        }
    }
}

/// Complex samples on a [`Grid`]; stands for the trigonometric interpolant.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample value".into()));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFunction { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn constant(grid: Grid, c: Complex64) -> Self {
        SampledFunction { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coord(i))).collect();
        SampledFunction { grid, values }
    }

    /// Real samples promoted to complex.
    pub fn from_real(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SampledFunction { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(SampledFunction { grid: self.grid, values })
    }

    /// Pointwise multiplication with a real field (e.g. a weight level).
    pub fn mul_real(&self, w: &[f64]) -> Result<Self> {
        if w.len() != self.values.len() {
            return Err(Error::GridMismatch("weight length mismatch".into()));
        }
        let values = self.values.iter().zip(w).map(|(v, &r)| v * r).collect();
        Ok(SampledFunction { grid: self.grid, values })
    }

    /// Cyclic shift by whole grid steps along each axis: result(x) = f(x + r·spacing).
    pub fn rotate(&self, shift: [isize; 2]) -> Self {
        let g = &self.grid;
        let n = g.points_per_axis() as isize;
        let values = (0..g.len())
            .map(|i| {
                let ax = g.axes(i);
                let s0 = (ax[0] as isize + shift[0]).rem_euclid(n) as usize;
                match g.dim() {
                    1 => self.values[s0],
                    _ => {
                        let s1 = (ax[1] as isize + shift[1]).rem_euclid(n) as usize;
                        self.values[g.flat([s0, s1])]
                    }
                }
            })
            .collect();
        SampledFunction { grid: self.grid, values }
    }
}

pub(crate) fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// Discrete Fourier coefficients indexed by integer frequencies in `(-N/2, N/2]^dim`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidInput("coefficient count mismatch".into()));
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at an integer frequency vector, if representable.
    pub fn at_freq(&self, k: [i64; 2]) -> Option<Complex64> {
        let n = self.grid.points_per_axis() as i64;
        let half = n / 2;
        let to_idx = |f: i64| -> Option<usize> {
            if f > half || f <= -half {
                return None;
            }
            Some(f.rem_euclid(n) as usize)
        };
        let i0 = to_idx(k[0])?;
        match self.grid.dim() {
            1 => Some(self.coeffs[i0]),
            _ => {
                let i1 = to_idx(k[1])?;
                Some(self.coeffs[self.grid.flat([i0, i1])])
            }
        }
    }

    /// Sum of `|c_k|^2`; together with the measure this gives Parseval energy.
    pub fn energy(&self) -> f64 {
        par::pairwise_sum(&self.coeffs.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>())
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_axis(values: &mut [Complex64], n: usize, dim: usize, forward: bool) {
    PLANNER.with(|p| {
        let fft = {
            let mut planner = p.borrow_mut();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        };
        match dim {
            1 => fft.process(values),
            _ => {
                // axis 1: rows are contiguous
                for row in values.chunks_mut(n) {
                    fft.process(row);
                }
                // axis 0: gather strided columns
                let mut scratch = vec![Complex64::new(0.0, 0.0); n];
                for col in 0..n {
                    for (r, s) in scratch.iter_mut().enumerate() {
                        *s = values[r * n + col];
                    }
                    fft.process(&mut scratch);
                    for (r, s) in scratch.iter().enumerate() {
                        values[r * n + col] = *s;
                    }
                }
            }
        }
    });
}

/// Forward transform: coefficients `c_k = N^{-dim} Σ_x f(x) e^{-i ξ_k · x}`,
/// so a pure mode `e^{i ξ_k x}` has coefficient 1 at frequency `k`.
pub fn dft(f: &SampledFunction) -> Spectrum {
    let g = *f.grid();
    let mut coeffs = f.values().to_vec();
    fft_axis(&mut coeffs, g.points_per_axis(), g.dim(), true);
    let scale = 1.0 / g.len() as f64;
    for c in &mut coeffs {
        *c *= scale;
    }
    Spectrum { grid: g, coeffs }
}

/// Inverse transform; exact round trip with [`dft`].
pub fn idft(s: &Spectrum) -> SampledFunction {
    let g = *s.grid();
    let mut values = s.coeffs().to_vec();
    fft_axis(&mut values, g.points_per_axis(), g.dim(), false);
    SampledFunction { grid: g, values }
}

/// Rectangle-rule integral of a real grid function: `Σ f(x) · spacing^dim`.
/// Exact for band-limited integrands on a uniform periodic grid.
pub fn quadrature(grid: &Grid, values: &[f64]) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch("quadrature length mismatch".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in quadrature".into()));
    }
    Ok(par::pairwise_sum(values) * grid.spacing().powi(grid.dim() as i32))
}

/// Band-limited translation: result(x) = f(x + offset) for an arbitrary real
/// offset, realized by the spectral phase factor `e^{i ξ · offset}`.
pub fn periodic_shift_sample(f: &SampledFunction, offset: [f64; 2]) -> SampledFunction {
    let mut spec = dft(f);
    apply_shift_phase(&mut spec, offset);
    idft(&spec)
}

/// Multiply a spectrum in place by the translation phase `e^{i ξ · offset}`.
pub fn apply_shift_phase(spec: &mut Spectrum, offset: [f64; 2]) {
    let g = *spec.grid();
    for (i, c) in spec.coeffs_mut().iter_mut().enumerate() {
        let w = g.angular_freq(i);
        let phase = w[0] * offset[0] + w[1] * offset[1];
        *c *= Complex64::from_polar(1.0, phase);
    }
}

// ---------------------------------------------------------------------------
// CSV interface
//
// 1D: one value per line, "re" or "re,im" (no header; period defaults to 2π
//     on read). 2D: header "# dim=2 n=<N> period=<L>" followed by row-major
//     values, one per line. f64 formatting round-trips bit-exactly.
// ---------------------------------------------------------------------------

fn format_value(v: Complex64) -> String {
    if v.im == 0.0 {
        format!("{}", v.re)
    } else {
        format!("{},{}", v.re, v.im)
    }
}

fn parse_value(line: &str, lineno: usize) -> Result<Complex64> {
    let mut parts = line.split(',');
    let re = parts
        .next()
        .ok_or_else(|| Error::InvalidInput(format!("line {lineno}: empty value")))?
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::InvalidInput(format!("line {lineno}: bad real part: {e}")))?;
    let im = match parts.next() {
        None => 0.0,
        Some(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::InvalidInput(format!("line {lineno}: bad imaginary part: {e}")))?,
    };
    if parts.next().is_some() {
        return Err(Error::InvalidInput(format!("line {lineno}: too many fields")));
    }
    Ok(Complex64::new(re, im))
}

pub fn write_csv(f: &SampledFunction, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let g = f.grid();
    if g.dim() == 2 {
        writeln!(out, "# dim=2 n={} period={}", g.points_per_axis(), g.period())?;
    }
    for v in f.values() {
        writeln!(out, "{}", format_value(*v))?;
    }
    Ok(())
}

/// Read a sampled function; 1D files without a header get `default_period`.
pub fn read_csv_with_period(path: &Path, default_period: f64) -> Result<SampledFunction> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut header: Option<(usize, usize, f64)> = None;
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if header.is_none() && values.is_empty() {
                header = Some(parse_header(rest, i + 1)?);
            }
            continue;
        }
        values.push(parse_value(trimmed, i + 1)?);
    }
    let grid = match header {
        Some((dim, n, period)) => {
            let g = Grid::new(dim, n, period)?;
            if values.len() != g.len() {
                return Err(Error::InvalidInput(format!(
                    "expected {} values for the declared grid, found {}",
                    g.len(),
                    values.len()
                )));
            }
            g
        }
        None => Grid::line(values.len(), default_period)?,
    };
    SampledFunction::new(grid, values)
}

pub fn read_csv(path: &Path) -> Result<SampledFunction> {
    read_csv_with_period(path, 2.0 * std::f64::consts::PI)
}

fn parse_header(rest: &str, lineno: usize) -> Result<(usize, usize, f64)> {
    let mut dim = None;
    let mut n = None;
    let mut period = None;
    for tok in rest.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("line {lineno}: bad header token {tok}")))?;
        match key {
            "dim" => dim = Some(val.parse::<usize>().map_err(|e| {
                Error::InvalidInput(format!("line {lineno}: bad dim: {e}"))
            })?),
            "n" => n = Some(val.parse::<usize>().map_err(|e| {
                Error::InvalidInput(format!("line {lineno}: bad n: {e}"))
            })?),
            "period" => period = Some(val.parse::<f64>().map_err(|e| {
                Error::InvalidInput(format!("line {lineno}: bad period: {e}"))
            })?),
            _ => return Err(Error::InvalidInput(format!("line {lineno}: unknown header key {key}"))),
        }
    }
    match (dim, n, period) {
        (Some(d), Some(n), Some(p)) => Ok((d, n, p)),
        _ => Err(Error::InvalidInput(format!("line {lineno}: header needs dim, n and period"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn tau() -> f64 {
        2.0 * PI
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(Grid::new(3, 16, 1.0).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
        assert!(Grid::new(1, 4, 1.0).is_err());
        assert!(Grid::new(1, 16, 0.0).is_err());
        assert!(Grid::new(2, 16, 1.0).is_ok());
    }

    #[test]
    fn dft_of_constant_is_delta_at_zero() {
        let g = Grid::line(32, tau()).unwrap();
        let f = SampledFunction::constant(g, Complex64::new(1.0, 0.0));
        let s = dft(&f);
        assert!((s.at_freq([0, 0]).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        for (i, c) in s.coeffs().iter().enumerate() {
            if g.int_freq(i) != [0, 0] {
                assert!(c.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn dft_of_pure_mode_hits_single_frequency() {
        let g = Grid::line(64, tau()).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        let s = dft(&f);
        assert!((s.at_freq([3, 0]).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let other: f64 = s
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| g.int_freq(*i) != [3, 0])
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        assert!(other < 1e-12);
    }

    #[test]
    fn round_trip_within_1e12() {
        let g = Grid::line(128, tau()).unwrap();
        let mut state = 0x12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let f = SampledFunction::new(
            g,
            (0..g.len()).map(|_| Complex64::new(next(), next())).collect(),
        )
        .unwrap();
        let back = idft(&dft(&f));
        let scale = f.max_abs();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn quadrature_of_one_is_period() {
        let g = Grid::line(64, tau()).unwrap();
        let v = vec![1.0; g.len()];
        assert!(rel_err(quadrature(&g, &v).unwrap(), tau()) < 1e-14);
    }

    #[test]
    fn quadrature_of_sin_squared_is_pi() {
        let g = Grid::line(64, tau()).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|i| g.coord(i)[0].sin().powi(2)).collect();
        assert!((quadrature(&g, &v).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn quadrature_nonnegative_for_nonnegative_input() {
        let g = Grid::line(32, 1.0).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|i| (i % 5) as f64).collect();
        assert!(quadrature(&g, &v).unwrap() >= 0.0);
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let g = Grid::line(32, tau()).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::new(x[0].cos(), x[0].sin()));
        let s = periodic_shift_sample(&f, [0.0, 0.0]);
        for (a, b) in f.values().iter().zip(s.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_by_one_spacing_matches_rotation() {
        let g = Grid::line(64, tau()).unwrap();
        let f = SampledFunction::from_fn(g, |x| {
            Complex64::new((2.0 * x[0]).cos() + 0.3 * (5.0 * x[0]).sin(), (x[0]).sin())
        });
        let shifted = periodic_shift_sample(&f, [g.spacing(), 0.0]);
        let rotated = f.rotate([1, 0]);
        let scale = f.max_abs();
        for (a, b) in shifted.values().iter().zip(rotated.values()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn shift_of_pure_mode_is_phase_factor() {
        let g = Grid::line(32, tau()).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::from_polar(1.0, x[0]));
        let h = 0.7519;
        let shifted = periodic_shift_sample(&f, [h, 0.0]);
        let phase = Complex64::from_polar(1.0, h);
        for (a, b) in shifted.values().iter().zip(f.values()) {
            assert!((a - b * phase).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_energy_identity() {
        let g = Grid::line(128, tau()).unwrap();
        let f = SampledFunction::from_fn(g, |x| {
            Complex64::new((3.0 * x[0]).cos(), 0.25 * (7.0 * x[0]).sin() + 0.1)
        });
        let abs2: Vec<f64> = f.values().iter().map(|v| v.norm_sqr()).collect();
        let lhs = quadrature(&g, &abs2).unwrap();
        let rhs = g.measure() * dft(&f).energy();
        assert!(rel_err(lhs, rhs) < 1e-10);
    }

    #[test]
    fn two_dimensional_round_trip_and_quadrature() {
        let g = Grid::square(16, tau()).unwrap();
        let f = SampledFunction::from_fn(g, |x| {
            Complex64::new((x[0]).cos() * (2.0 * x[1]).sin(), 0.0)
        });
        let back = idft(&dft(&f));
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        let ones = vec![1.0; g.len()];
        assert!(rel_err(quadrature(&g, &ones).unwrap(), tau() * tau()) < 1e-13);
    }

    #[test]
    fn csv_round_trip_1d_bit_exact() {
        let g = Grid::line(16, tau()).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::new(x[0].sin() / 3.0, x[0] * 0.1));
        let dir = std::env::temp_dir().join(format!("varspace_csv_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f1.csv");
        write_csv(&f, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(f.grid(), back.grid());
        assert_eq!(f.values(), back.values());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn csv_round_trip_2d_bit_exact() {
        let g = Grid::square(8, 1.5).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::new(x[0] - x[1], x[0] * x[1]));
        let dir = std::env::temp_dir().join(format!("varspace_csv2_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f2.csv");
        write_csv(&f, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(f.grid(), back.grid());
        assert_eq!(f.values(), back.values());
        std::fs::remove_dir_all(&dir).ok();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn dft_linearity(seed in 0u64..1000) {
            let g = Grid::line(32, tau()).unwrap();
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let f = SampledFunction::new(g, (0..g.len()).map(|_| Complex64::new(next(), next())).collect()).unwrap();
            let h = SampledFunction::new(g, (0..g.len()).map(|_| Complex64::new(next(), next())).collect()).unwrap();
            let a = Complex64::new(next(), next());
            let combo = f.scale(a).add(&h).unwrap();
            let lhs = dft(&combo);
            let f_hat = dft(&f);
            let h_hat = dft(&h);
            for i in 0..g.len() {
                let rhs = f_hat.coeffs()[i] * a + h_hat.coeffs()[i];
                prop_assert!((lhs.coeffs()[i] - rhs).norm() < 1e-12);
            }
        }

        #[test]
        fn shift_composes_additively(h1 in -2.0f64..2.0, h2 in -2.0f64..2.0) {
            let g = Grid::line(32, tau()).unwrap();
            let f = SampledFunction::from_fn(g, |x| Complex64::new((3.0*x[0]).cos(), (x[0]).sin()));
            let a = periodic_shift_sample(&periodic_shift_sample(&f, [h1, 0.0]), [h2, 0.0]);
            let b = periodic_shift_sample(&f, [h1 + h2, 0.0]);
            let scale = f.max_abs();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).norm() <= 1e-10 * scale);
            }
        }
    }
}

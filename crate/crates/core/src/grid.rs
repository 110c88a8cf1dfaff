//! Periodic grid, spectral differentiation, Sobolev norms, and the exact
//! heat-semigroup propagator.
//!
//! All fields live on a uniform periodic grid of `n` samples over a period
//! `L`. Spectral coefficients follow the convention `f_j = Σ_k c_k e^{i k x_j}`
//! with physical wavenumbers `k = 2π j̃ / L`, `j̃ ∈ {−n/2+1, …, n/2}`, so that
//! `‖f‖²_{L²} = L Σ_k |c_k|²` (Parseval).

use crate::error::{Result, RswError};
use crate::fft;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Uniform periodic grid: `n` samples over a period of `length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(RswError::InvalidGrid(format!(
                "n must be even and at least 8, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(RswError::InvalidGrid(format!(
                "period must be positive and finite, got {length}"
            )));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Sample location of index `j`, starting at 0.
    pub fn point(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Signed mode number of storage index `idx`: 0, 1, …, n/2, −n/2+1, …, −1.
    pub fn mode(&self, idx: usize) -> i64 {
        if idx <= self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// Physical wavenumber 2π·mode/L of storage index `idx`.
    pub fn wavenumber(&self, idx: usize) -> f64 {
        2.0 * PI * self.mode(idx) as f64 / self.length
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Largest retained mode under the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }
}

/// One real-valued periodic function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.n()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n()).map(|j| f(grid.point(j))).collect();
        Self { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(RswError::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.n(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Band-limited random field: modes 1..=max_mode with coefficients decaying
    /// like 1/m; used by property checks and the verification suite.
    pub fn random_band_limited(
        grid: Grid,
        max_mode: usize,
        amplitude: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let n = grid.n();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        let cap = max_mode.min(n / 2 - 1);
        for m in 1..=cap {
            let scale = amplitude / m as f64;
            let re = scale * rng.gen_range(-1.0..1.0);
            let im = scale * rng.gen_range(-1.0..1.0);
            coeffs[m] = Complex64::new(re, im);
            coeffs[n - m] = coeffs[m].conj();
        }
        let spectrum = Spectrum { grid, coeffs };
        from_spectrum(&spectrum)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "field grids differ");
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product without dealiasing; see [`dealiased_product`] for the
    /// alias-safe variant used on quadratic terms.
    pub fn mul(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn add_scaled(&self, other: &Field, c: f64) -> Field {
        self.zip_with(other, |a, b| a + c * b)
    }

    pub fn shift(&self, c: f64) -> Field {
        self.map(|v| v + c)
    }

    /// Discrete integral Σ f_j dx.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.grid.n() as f64
    }

    /// Sample-space L² norm sqrt(Σ f_j² dx).
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Discrete L² inner product Σ f_j g_j dx.
    pub fn inner(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "field grids differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .sum::<f64>()
            * self.grid.dx()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Fourier coefficients of a [`Field`].
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(RswError::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.n(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Spectral L² norm sqrt(L Σ |c_k|²); equals the sample-space norm by
    /// Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.length() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }
}

pub fn to_spectrum(f: &Field) -> Spectrum {
    Spectrum {
        grid: f.grid,
        coeffs: fft::forward(&f.values),
    }
}

pub fn from_spectrum(s: &Spectrum) -> Field {
    Field {
        grid: s.grid,
        values: fft::inverse(&s.coeffs),
    }
}

/// Spectral derivative of order `m ∈ {1, 2, 3}`: multiplier (ik)^m, with the
/// Nyquist mode zeroed for odd orders so real fields stay real.
pub fn derivative(f: &Field, m: u32) -> Field {
    assert!((1..=3).contains(&m), "derivative order must be 1, 2 or 3");
    let mut s = to_spectrum(f);
    derivative_coeffs(s.grid, m, &mut s.coeffs);
    from_spectrum(&s)
}

pub(crate) fn derivative_coeffs(grid: Grid, m: u32, coeffs: &mut [Complex64]) {
    let nyquist = grid.nyquist_index();
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if m % 2 == 1 && idx == nyquist {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, grid.wavenumber(idx));
        *c *= ik.powu(m);
    }
}

/// Exact heat flow: each coefficient is damped by exp(−eps·t·k²).
///
/// `eps = 0` or `t = 0` returns the field unchanged (no transform round-trip).
pub fn heat_propagate(f: &Field, eps: f64, t: f64) -> Result<Field> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(RswError::InvalidParameter(format!(
            "viscosity must be nonnegative, got {eps}"
        )));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(RswError::InvalidParameter(format!(
            "duration must be nonnegative, got {t}"
        )));
    }
    if eps == 0.0 || t == 0.0 {
        return Ok(f.clone());
    }
    let mut s = to_spectrum(f);
    heat_coeffs(s.grid, eps, t, &mut s.coeffs);
    Ok(from_spectrum(&s))
}

pub(crate) fn heat_coeffs(grid: Grid, eps: f64, t: f64, coeffs: &mut [Complex64]) {
    for (idx, c) in coeffs.iter_mut().enumerate() {
        let k = grid.wavenumber(idx);
        *c *= (-eps * t * k * k).exp();
    }
}

/// Sobolev norm H^m, m ∈ {0, 1, 2}, via spectral weights 1 + k² + … + k^{2m}.
pub fn sobolev_norm(f: &Field, m: u32) -> f64 {
    assert!(m <= 2, "sobolev order must be 0, 1 or 2");
    let s = to_spectrum(f);
    sobolev_norm_sq_coeffs(s.grid, m, &s.coeffs).sqrt()
}

pub(crate) fn sobolev_norm_sq_coeffs(grid: Grid, m: u32, coeffs: &[Complex64]) -> f64 {
    let mut total = 0.0;
    for (idx, c) in coeffs.iter().enumerate() {
        let k2 = grid.wavenumber(idx).powi(2);
        let mut weight = 1.0;
        let mut pow = 1.0;
        for _ in 0..m {
            pow *= k2;
            weight += pow;
        }
        total += weight * c.norm_sqr();
    }
    grid.length() * total
}

/// 2/3-rule dealiasing: modes with |mode| > n/3 are zeroed. Idempotent.
pub fn dealias(s: &Spectrum) -> Spectrum {
    let mut out = s.clone();
    dealias_coeffs(out.grid, &mut out.coeffs);
    out
}

pub(crate) fn dealias_coeffs(grid: Grid, coeffs: &mut [Complex64]) {
    let cutoff = grid.dealias_cutoff();
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if grid.mode(idx).abs() > cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Truncate a field to the 2/3-rule band in sample space.
pub fn dealias_field(f: &Field) -> Field {
    let mut s = to_spectrum(f);
    dealias_coeffs(s.grid, &mut s.coeffs);
    from_spectrum(&s)
}

/// Alias-safe pointwise product: both factors and the result are truncated to
/// the 2/3-rule band, so retained modes carry no aliased energy.
pub fn dealiased_product(a: &Field, b: &Field) -> Field {
    assert_eq!(a.grid, b.grid, "field grids differ");
    let at = dealias_field(a);
    let bt = dealias_field(b);
    dealias_field(&at.mul(&bt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid_2pi(n: usize) -> Grid {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid::new(7, 1.0).is_err());
        assert!(Grid::new(4, 1.0).is_err());
        assert!(Grid::new(9, 1.0).is_err());
        assert!(Grid::new(8, 0.0).is_err());
        assert!(Grid::new(8, -1.0).is_err());
        assert!(Grid::new(8, 1.0).is_ok());
    }

    #[test]
    fn modes_cover_expected_range() {
        let g = grid_2pi(8);
        let modes: Vec<i64> = (0..8).map(|j| g.mode(j)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn constant_field_spectrum_is_mode_zero() {
        let g = grid_2pi(32);
        let f = Field::constant(g, 2.5);
        let s = to_spectrum(&f);
        assert!((s.coeffs()[0].re - 2.5).abs() < 1e-14);
        assert!(s.coeffs()[0].im.abs() < 1e-14);
        for c in &s.coeffs()[1..] {
            assert!(c.norm() < 1e-13);
        }
    }

    #[test]
    fn single_sine_has_two_conjugate_modes() {
        let g = grid_2pi(64);
        let f = Field::from_fn(g, |x| x.sin());
        let s = to_spectrum(&f);
        for (idx, c) in s.coeffs().iter().enumerate() {
            let m = g.mode(idx);
            if m == 1 || m == -1 {
                assert!((c.norm() - 0.5).abs() < 1e-13);
            } else {
                assert!(c.norm() < 1e-13, "mode {m} should vanish");
            }
        }
        let c1 = s.coeffs()[1];
        let cm1 = s.coeffs()[63];
        assert!((c1 - cm1.conj()).norm() < 1e-14);
    }

    #[test]
    fn round_trip_is_tight() {
        let g = Grid::new(128, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = Field::from_values(g, (0..128).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .unwrap();
            let back = from_spectrum(&to_spectrum(&f));
            let err = f
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            let scale = f.sup_norm().max(1.0);
            assert!(err / scale < 1e-12, "round-trip error {err}");
        }
    }

    #[test]
    fn conjugate_symmetry_of_real_spectra() {
        let g = Grid::new(64, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Field::random_band_limited(g, 20, 1.0, &mut rng);
        let s = to_spectrum(&f);
        let n = g.n();
        let scale = s.coeffs().iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
        for j in 1..n {
            let asym = (s.coeffs()[j] - s.coeffs()[n - j].conj()).norm();
            assert!(asym / scale < 1e-12);
        }
    }

    #[test]
    fn parseval_identity() {
        let g = Grid::new(256, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let f = Field::random_band_limited(g, 80, 1.0, &mut rng);
            let sample = f.l2_norm();
            let spectral = to_spectrum(&f).l2_norm();
            assert!((sample - spectral).abs() / sample.max(1e-300) < 1e-12);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = grid_2pi(32);
        let f = Field::constant(g, 4.0);
        for m in 1..=3 {
            assert!(derivative(&f, m).sup_norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_matches_closed_forms() {
        let g = grid_2pi(128);
        for k in [1.0_f64, 3.0, 7.0] {
            let f = Field::from_fn(g, |x| (k * x).sin());
            let d1 = derivative(&f, 1);
            let d2 = derivative(&f, 2);
            let exact1 = Field::from_fn(g, |x| k * (k * x).cos());
            let exact2 = Field::from_fn(g, |x| -k * k * (k * x).sin());
            assert!(d1.sub(&exact1).sup_norm() < 1e-10 * k);
            assert!(d2.sub(&exact2).sup_norm() < 1e-10 * k * k);
        }
    }

    #[test]
    fn odd_derivative_zeroes_nyquist() {
        let g = grid_2pi(16);
        // Nyquist-only signal: alternating +1/-1 = cos(8x) on L=2π.
        let f = Field::from_fn(g, |x| (8.0 * x).cos());
        let d1 = derivative(&f, 1);
        assert!(d1.sup_norm() < 1e-12);
        // Even orders keep it: d2 = -64 cos(8x).
        let d2 = derivative(&f, 2);
        let exact = f.scale(-64.0);
        assert!(d2.sub(&exact).sup_norm() < 1e-9);
    }

    #[test]
    fn heat_preserves_constants() {
        let g = grid_2pi(32);
        let f = Field::constant(g, 1.7);
        for t in [0.0, 0.3, 4.0] {
            let w = heat_propagate(&f, 0.5, t).unwrap();
            assert!(w.sub(&f).sup_norm() < 1e-13);
        }
    }

    #[test]
    fn heat_matches_single_mode_decay() {
        let g = grid_2pi(128);
        for (k, eps, t) in [(1.0_f64, 0.1, 0.5), (5.0, 0.02, 1.3), (11.0, 1.0, 0.01)] {
            let f = Field::from_fn(g, |x| (k * x).sin());
            let w = heat_propagate(&f, eps, t).unwrap();
            let exact = f.scale((-eps * t * k * k).exp());
            let rel = w.sub(&exact).sup_norm() / exact.sup_norm().max(1e-300);
            assert!(rel < 1e-10, "mode {k}: rel error {rel}");
        }
    }

    #[test]
    fn heat_zero_args_are_identity() {
        let g = grid_2pi(64);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = Field::random_band_limited(g, 20, 1.0, &mut rng);
        assert_eq!(heat_propagate(&f, 0.0, 2.0).unwrap(), f);
        assert_eq!(heat_propagate(&f, 0.5, 0.0).unwrap(), f);
        assert!(heat_propagate(&f, -0.1, 1.0).is_err());
        assert!(heat_propagate(&f, 0.1, -1.0).is_err());
    }

    #[test]
    fn heat_semigroup_law() {
        let g = Grid::new(128, 7.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = Field::random_band_limited(g, 40, 1.0, &mut rng);
        let eps = 0.08;
        let (t, s) = (0.21, 0.47);
        let one_shot = heat_propagate(&f, eps, t + s).unwrap();
        let two_step = heat_propagate(&heat_propagate(&f, eps, s).unwrap(), eps, t).unwrap();
        let rel = one_shot.sub(&two_step).sup_norm() / one_shot.sup_norm().max(1e-300);
        assert!(rel < 1e-12);
    }

    #[test]
    fn heat_is_nonexpansive_in_l2() {
        let g = Grid::new(64, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let f = Field::random_band_limited(g, 31, 1.0, &mut rng);
            let w = heat_propagate(&f, 0.3, 0.17).unwrap();
            assert!(w.l2_norm() <= f.l2_norm() * (1.0 + 1e-13));
        }
    }

    #[test]
    fn heat_smoothing_bound_l2_to_h1() {
        let g = Grid::new(128, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let eps = 0.05;
        for &t in &[1e-3, 1e-2, 1e-1] {
            for _ in 0..50 {
                let f = Field::random_band_limited(g, 60, 1.0, &mut rng);
                let w = heat_propagate(&f, eps, t).unwrap();
                let bound = (1.0 + 1.0 / (2.0 * std::f64::consts::E * eps * t)).sqrt();
                assert!(sobolev_norm(&w, 1) <= bound * f.l2_norm() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn sobolev_closed_forms() {
        let g = grid_2pi(64);
        let zero = Field::zeros(g);
        assert_eq!(sobolev_norm(&zero, 0), 0.0);
        let f = Field::from_fn(g, |x| x.sin());
        // ∫ sin² = π on [0, 2π]; H¹ adds ∫ cos² = π.
        assert!((sobolev_norm(&f, 0) - PI.sqrt()).abs() < 1e-12);
        assert!((sobolev_norm(&f, 1) - (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!((sobolev_norm(&f, 2) - (3.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sobolev_zero_matches_l2() {
        let g = Grid::new(128, 3.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let f = Field::random_band_limited(g, 50, 2.0, &mut rng);
        let rel = (sobolev_norm(&f, 0) - f.l2_norm()).abs() / f.l2_norm();
        assert!(rel < 1e-12);
    }

    #[test]
    fn dealias_zero_count_at_256() {
        let g = Grid::new(256, 1.0).unwrap();
        // Full-band spectrum: every coefficient nonzero.
        let coeffs = vec![Complex64::new(1.0, 0.0); 256];
        let s = Spectrum::from_coeffs(g, coeffs).unwrap();
        let d = dealias(&s);
        let zeroed = d.coeffs().iter().filter(|c| c.norm() == 0.0).count();
        // Modes with |m| > 85 are removed: 256 − (2·85 + 1) = 85 = ⌊256/3⌋.
        assert_eq!(zeroed, 85);
        for (idx, c) in d.coeffs().iter().enumerate() {
            if g.mode(idx).abs() > g.dealias_cutoff() {
                assert_eq!(c.norm(), 0.0);
            } else {
                assert_eq!(*c, Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn dealias_keeps_band_limited_spectra() {
        let g = Grid::new(96, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let f = Field::random_band_limited(g, 30, 1.0, &mut rng);
        let s = to_spectrum(&f);
        let d = dealias(&s);
        // Band-limited up to rounding noise in the zeroed band.
        for (a, b) in s.coeffs().iter().zip(d.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn dealias_is_idempotent(seed in 0u64..1000) {
            let g = Grid::new(64, 2.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = Field::from_values(
                g,
                (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            ).unwrap();
            let once = dealias(&to_spectrum(&f));
            let twice = dealias(&once);
            for (a, b) in once.coeffs().iter().zip(twice.coeffs()) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn transform_round_trip_random(seed in 0u64..1000) {
            let g = Grid::new(128, 4.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = Field::from_values(
                g,
                (0..128).map(|_| rng.gen_range(-10.0..10.0)).collect(),
            ).unwrap();
            let back = from_spectrum(&to_spectrum(&f));
            let err = f.values().iter().zip(back.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            prop_assert!(err < 1e-11);
        }
    }
}

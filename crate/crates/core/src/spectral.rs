//! Fourier toolkit on the torus `T = R / 2πZ`.
//!
//! Fields are sampled at `s_j = 2πj/N`, `j = 0..N`, with `N` even. The
//! coefficient convention is
//!
//! ```text
//! f(s) = Σ_k f̂_k e^{iks},    f̂_k = (1/N) Σ_j f(s_j) e^{-iks_j},
//! ```
//!
//! stored in the usual FFT order: slot `j` holds wavenumber `j` for
//! `j < N/2` and `j - N` otherwise, so the Nyquist slot `N/2` is `k = -N/2`.
//!
//! Every operator here is a Fourier multiplier. Multipliers that are odd in
//! `k` (odd derivatives, the Hilbert transform) annihilate the Nyquist mode,
//! since a real field cannot carry an imaginary Nyquist coefficient.

use std::cell::RefCell;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::Vec2;

/// Smallest grid accepted by [`GridField::new`].
pub const MIN_POINTS: usize = 8;

/// Samples of a 2-vector field on the uniform periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    values: Vec<Vec2>,
}

impl GridField {
    /// Checks that `N` is even, at least [`MIN_POINTS`], and every entry finite.
    pub fn new(values: Vec<Vec2>) -> Result<Self> {
        let n = values.len();
        if n < MIN_POINTS || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "need an even number of points >= {MIN_POINTS}, got {n}"
            )));
        }
        if values.iter().any(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(Error::NonFinite("grid field"));
        }
        Ok(Self { values })
    }

    pub(crate) fn from_vec_unchecked(values: Vec<Vec2>) -> Self {
        debug_assert!(values.len() >= MIN_POINTS && values.len() % 2 == 0);
        Self { values }
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Vec2) -> Result<Self> {
        let h = std::f64::consts::TAU / n as f64;
        Self::new((0..n).map(|j| f(j as f64 * h)).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Vec2::zeros(); n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing `h = 2π/N`.
    pub fn spacing(&self) -> f64 {
        std::f64::consts::TAU / self.len() as f64
    }

    /// Parameter value `s_j` of node `j`.
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn values(&self) -> &[Vec2] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec2> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.x.is_finite() && v.y.is_finite())
    }

    pub fn mean(&self) -> Vec2 {
        self.values.iter().sum::<Vec2>() / self.len() as f64
    }

    pub fn map(&self, f: impl Fn(&Vec2) -> Vec2) -> Self {
        Self::from_vec_unchecked(self.values.iter().map(f).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&Vec2, &Vec2) -> Vec2) -> Self {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        Self::from_vec_unchecked(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(a, b))
                .collect(),
        )
    }

    /// Largest pointwise Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Trapezoid approximation of `∫_T f·g ds`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        self.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.dot(b))
                .sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

impl std::ops::Index<usize> for GridField {
    type Output = Vec2;
    fn index(&self, j: usize) -> &Vec2 {
        &self.values[j]
    }
}

impl Add for &GridField {
    type Output = GridField;
    fn add(self, rhs: &GridField) -> GridField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &GridField {
    type Output = GridField;
    fn sub(self, rhs: &GridField) -> GridField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &GridField {
    type Output = GridField;
    fn mul(self, rhs: f64) -> GridField {
        self.map(|a| a * rhs)
    }
}

impl Neg for &GridField {
    type Output = GridField;
    fn neg(self) -> GridField {
        self.map(|a| -a)
    }
}

/// Fourier coefficients of a 2-vector field, one `[x̂_k, ŷ_k]` pair per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<[Complex64; 2]>,
}

impl SpectralField {
    pub fn from_coeffs(coeffs: Vec<[Complex64; 2]>) -> Result<Self> {
        let n = coeffs.len();
        if n < MIN_POINTS || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "need an even number of coefficients >= {MIN_POINTS}, got {n}"
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[[Complex64; 2]] {
        &self.coeffs
    }

    /// Wavenumber stored in slot `j`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        wavenumber(j, self.len())
    }

    /// Coefficient of wavenumber `k`, for `-N/2 <= k < N/2`.
    pub fn coeff(&self, k: i64) -> Option<[Complex64; 2]> {
        let n = self.len() as i64;
        if k < -n / 2 || k >= n / 2 {
            return None;
        }
        Some(self.coeffs[k.rem_euclid(n) as usize])
    }

    /// Largest violation of `coeff(-k) = conj(coeff(k))` and of a real Nyquist
    /// coefficient.
    pub fn reality_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for j in 0..n {
            let mirror = (n - j) % n;
            for c in 0..2 {
                worst = worst.max((self.coeffs[j][c] - self.coeffs[mirror][c].conj()).norm());
            }
        }
        worst
    }
}

pub(crate) fn wavenumber(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Forward FFT of the packed signal `x + i y` (unnormalized).
fn packed_forward(f: &GridField) -> Vec<Complex64> {
    let mut z: Vec<Complex64> = f
        .values
        .iter()
        .map(|v| Complex64::new(v.x, v.y))
        .collect();
    plan(z.len(), false).process(&mut z);
    z
}

/// Inverse of [`packed_forward`], including the `1/N` factor.
fn packed_inverse(mut z: Vec<Complex64>) -> GridField {
    let n = z.len();
    plan(n, true).process(&mut z);
    let scale = 1.0 / n as f64;
    GridField::from_vec_unchecked(
        z.into_iter()
            .map(|c| Vec2::new(c.re * scale, c.im * scale))
            .collect(),
    )
}

/// Applies the multiplier `m(k)` to both components.
///
/// `m` must satisfy `m(-k) = conj(m(k))` so that real fields stay real; at the
/// Nyquist slot only `Re m(-N/2)` is used, which is the symmetric part of the
/// multiplier there.
pub fn apply_multiplier(f: &GridField, m: impl Fn(i64) -> Complex64) -> GridField {
    let n = f.len();
    let mut z = packed_forward(f);
    for (j, zj) in z.iter_mut().enumerate() {
        let k = wavenumber(j, n);
        let mut mk = m(k);
        if j == n / 2 {
            mk = Complex64::new(mk.re, 0.0);
        }
        *zj *= mk;
    }
    packed_inverse(z)
}

/// Fourier coefficients with the `1/N` normalization described in the module docs.
pub fn to_spectral(f: &GridField) -> SpectralField {
    let n = f.len();
    let z = packed_forward(f);
    let scale = 1.0 / n as f64;
    let half = Complex64::new(0.5 * scale, 0.0);
    let coeffs = (0..n)
        .map(|j| {
            let zk = z[j];
            let zm = z[(n - j) % n].conj();
            // x̂ = (Z_k + conj Z_-k)/2,  ŷ = (Z_k - conj Z_-k)/(2i)
            let xk = (zk + zm) * half;
            let yk = (zk - zm) * Complex64::new(0.0, -0.5 * scale);
            [xk, yk]
        })
        .collect();
    SpectralField { coeffs }
}

/// Synthesizes samples from coefficients. Any imaginary part left over from a
/// non-Hermitian coefficient set is discarded.
pub fn from_spectral(f: &SpectralField) -> GridField {
    let n = f.len();
    let z: Vec<Complex64> = f
        .coeffs
        .iter()
        .map(|[x, y]| (x + Complex64::i() * y) * n as f64)
        .collect();
    let mut w = z;
    plan(n, true).process(&mut w);
    let scale = 1.0 / n as f64;
    // With Hermitian x̂, ŷ the inverse of x̂ + iŷ is x + iy exactly; otherwise
    // project each component onto its Hermitian part first.
    if f.reality_defect() == 0.0 {
        return GridField::from_vec_unchecked(
            w.into_iter()
                .map(|c| Vec2::new(c.re * scale, c.im * scale))
                .collect(),
        );
    }
    let mut xs: Vec<Complex64> = f.coeffs.iter().map(|c| c[0] * n as f64).collect();
    let mut ys: Vec<Complex64> = f.coeffs.iter().map(|c| c[1] * n as f64).collect();
    let inv = plan(n, true);
    inv.process(&mut xs);
    inv.process(&mut ys);
    GridField::from_vec_unchecked(
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| Vec2::new(x.re * scale, y.re * scale))
            .collect(),
    )
}

/// `d^m f / ds^m`, multiplier `(ik)^m`. Order 0 returns the input unchanged.
pub fn derivative(f: &GridField, order: u32) -> GridField {
    if order == 0 {
        return f.clone();
    }
    apply_multiplier(f, |k| Complex64::new(0.0, k as f64).powu(order))
}

/// `(-Δ)^{1/2}`, multiplier `|k|`.
pub fn fractional_laplacian_half(f: &GridField) -> GridField {
    apply_multiplier(f, |k| Complex64::new(k.abs() as f64, 0.0))
}

/// Hilbert transform `Hf(s) = (1/2π) p.v.∫ cot((s-s')/2) f(s') ds'`,
/// multiplier `-i sgn(k)`. Maps `cos s` to `sin s`.
pub fn hilbert_transform(f: &GridField) -> GridField {
    apply_multiplier(f, |k| Complex64::new(0.0, -(k.signum() as f64)))
}

/// `e^{tL} f` with `L = -(1/4)(-Δ)^{1/2}`, multiplier `e^{-|k|t/4}`.
pub fn semigroup_apply(f: &GridField, t: f64) -> Result<GridField> {
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("must be a nonnegative time, got {t}")));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(apply_multiplier(f, |k| {
        Complex64::new((-(k.abs() as f64) * t / 4.0).exp(), 0.0)
    }))
}

/// Homogeneous Sobolev seminorm `(2π Σ_k |k|^{2s} |f̂_k|²)^{1/2}`.
///
/// With this normalization `s = 1` equals `‖f'‖_{L²}` and `s = 0` equals the
/// full `‖f‖_{L²}` (the mean is only excluded for `s > 0`).
///
/// # Panics
///
/// If `s` is negative.
pub fn sobolev_seminorm(f: &GridField, s: f64) -> f64 {
    assert!(s >= 0.0, "Sobolev index must be nonnegative");
    spectral_seminorm(&to_spectral(f), s)
}

pub(crate) fn spectral_seminorm(f: &SpectralField, s: f64) -> f64 {
    let n = f.len();
    let sum: f64 = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, [x, y])| {
            let k = wavenumber(j, n).unsigned_abs() as f64;
            k.powf(2.0 * s) * (x.norm_sqr() + y.norm_sqr())
        })
        .sum();
    (std::f64::consts::TAU * sum).sqrt()
}

/// Pseudo-spectral filter settings.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DealiasParams {
    /// Modes with `|k| > cutoff_fraction * N/2` are removed.
    pub cutoff_fraction: f64,
    /// Coefficients smaller than this (per component) are removed.
    pub krasny_floor: f64,
}

impl Default for DealiasParams {
    fn default() -> Self {
        Self {
            cutoff_fraction: 2.0 / 3.0,
            krasny_floor: 1e-13,
        }
    }
}

impl DealiasParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff_fraction > 0.0 && self.cutoff_fraction <= 1.0) {
            return Err(Error::param(
                "cutoff_fraction",
                format!("must lie in (0, 1], got {}", self.cutoff_fraction),
            ));
        }
        if !(self.krasny_floor >= 0.0) {
            return Err(Error::param(
                "krasny_floor",
                format!("must be nonnegative, got {}", self.krasny_floor),
            ));
        }
        Ok(())
    }
}

/// Zeroes modes above the cutoff and coefficients below the floor. Idempotent.
pub fn dealias(f: &GridField, cutoff_fraction: f64, krasny_floor: f64) -> GridField {
    let n = f.len();
    let kmax = cutoff_fraction * (n / 2) as f64;
    let mut spec = to_spectral(f);
    for (j, c) in spec.coeffs.iter_mut().enumerate() {
        if wavenumber(j, n).abs() as f64 > kmax {
            *c = [Complex64::new(0.0, 0.0); 2];
            continue;
        }
        for comp in c.iter_mut() {
            if comp.norm() < krasny_floor {
                *comp = Complex64::new(0.0, 0.0);
            }
        }
    }
    from_spectral(&spec)
}

/// Trigonometric interpolation of `f` onto a grid `factor` times finer.
///
/// The Nyquist coefficient is split evenly between `±N/2` so the refined
/// samples stay real and reproduce the coarse samples exactly.
pub fn upsample(f: &GridField, factor: usize) -> GridField {
    assert!(factor >= 1, "upsampling factor must be positive");
    if factor == 1 {
        return f.clone();
    }
    let n = f.len();
    let m = n * factor;
    let z = packed_forward(f);
    let mut w = vec![Complex64::new(0.0, 0.0); m];
    let gain = factor as f64;
    for j in 0..n / 2 {
        w[j] = z[j] * gain;
    }
    for j in n / 2 + 1..n {
        w[m - n + j] = z[j] * gain;
    }
    // For the packed signal the Nyquist slot holds X_N/2 + i Y_N/2 with both
    // coefficients real, so halving it and mirroring keeps each part Hermitian.
    let nyq = z[n / 2] * (0.5 * gain);
    w[n / 2] = nyq;
    w[m - n / 2] = nyq;
    packed_inverse(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn field(n: usize, f: impl Fn(f64) -> Vec2) -> GridField {
        GridField::from_fn(n, f).unwrap()
    }

    fn max_diff(a: &GridField, b: &GridField) -> f64 {
        (a - b).max_norm()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridField::zeros(7).is_err());
        assert!(GridField::zeros(6).is_err());
        assert!(GridField::zeros(8).is_ok());
        let mut v = vec![Vec2::zeros(); 8];
        v[3].x = f64::NAN;
        assert!(matches!(GridField::new(v), Err(Error::NonFinite(_))));
    }

    #[test]
    fn constant_field_has_only_mean() {
        let f = field(16, |_| Vec2::new(2.5, 2.5));
        let spec = to_spectral(&f);
        let c0 = spec.coeff(0).unwrap();
        assert!((c0[0].re - 2.5).abs() < 1e-15 && (c0[1].re - 2.5).abs() < 1e-15);
        for j in 1..16 {
            assert!(spec.coeffs()[j][0].norm() < 1e-15);
        }
    }

    #[test]
    fn cosine_occupies_plus_minus_one() {
        let f = field(32, |s| Vec2::new(s.cos(), 0.0));
        let spec = to_spectral(&f);
        for j in 0..32 {
            let k = spec.wavenumber(j);
            let mag = spec.coeffs()[j][0].norm();
            if k.abs() == 1 {
                assert!((mag - 0.5).abs() < 1e-15);
            } else {
                assert!(mag < 1e-15, "k = {k}");
            }
        }
        assert!(spec.reality_defect() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let circle = field(32, |s| Vec2::new(s.cos(), s.sin()));
        let d = derivative(&circle, 1);
        assert!(max_diff(&d, &field(32, |s| Vec2::new(-s.sin(), s.cos()))) < 1e-13);
        let c2 = field(32, |s| Vec2::new((2.0 * s).cos(), 0.0));
        let d2 = derivative(&c2, 2);
        assert!(max_diff(&d2, &field(32, |s| Vec2::new(-4.0 * (2.0 * s).cos(), 0.0))) < 1e-12);
        let c = field(32, |_| Vec2::new(1.0, -3.0));
        for m in 1..5 {
            assert!(derivative(&c, m).max_norm() < 1e-14);
        }
    }

    #[test]
    fn odd_multipliers_kill_nyquist() {
        let nyq = field(16, |s| Vec2::new((8.0 * s).cos(), 0.0));
        assert!(derivative(&nyq, 1).max_norm() < 1e-12);
        assert!(hilbert_transform(&nyq).max_norm() < 1e-12);
        let d2 = derivative(&nyq, 2);
        assert!(max_diff(&d2, &(&nyq * -64.0)) < 1e-11);
    }

    #[test]
    fn fractional_laplacian_examples() {
        let f = field(64, |s| Vec2::new((3.0 * s).cos(), 1.0));
        let g = fractional_laplacian_half(&f);
        assert!(max_diff(&g, &field(64, |s| Vec2::new(3.0 * (3.0 * s).cos(), 0.0))) < 1e-13);
    }

    #[test]
    fn hilbert_examples() {
        let f = field(64, |s| Vec2::new(s.cos(), s.sin()));
        let g = hilbert_transform(&f);
        assert!(max_diff(&g, &field(64, |s| Vec2::new(s.sin(), -s.cos()))) < 1e-14);
        assert!(hilbert_transform(&field(64, |_| Vec2::new(4.0, 1.0))).max_norm() < 1e-15);
    }

    #[test]
    fn semigroup_examples() {
        let f = field(32, |s| Vec2::new((2.0 * s).cos(), 0.3));
        assert_eq!(semigroup_apply(&f, 0.0).unwrap(), f);
        let g = semigroup_apply(&f, 2.0).unwrap();
        let expect = field(32, |s| Vec2::new((-1.0f64).exp() * (2.0 * s).cos(), 0.3));
        assert!(max_diff(&g, &expect) < 1e-14);
        assert!(semigroup_apply(&f, -1e-3).is_err());
        assert!(semigroup_apply(&f, f64::NAN).is_err());
    }

    #[test]
    fn seminorm_examples() {
        assert!(sobolev_seminorm(&field(16, |_| Vec2::new(1.0, 2.0)), 1.0) < 1e-14);
        let circle = field(64, |s| Vec2::new(s.cos(), s.sin()));
        assert!((sobolev_seminorm(&circle, 1.0) - TAU.sqrt()).abs() < 1e-13);
        let m2 = field(64, |s| Vec2::new((2.0 * s).cos(), 0.0));
        let ratio = sobolev_seminorm(&m2, 2.5) / sobolev_seminorm(&m2, 0.0);
        assert!((ratio - 2f64.powf(2.5)).abs() < 1e-12);
        // s = 1 is the L² norm of the derivative.
        let wiggly = field(64, |s| Vec2::new((s.sin()).exp(), (2.0 * s).cos() * s.cos()));
        let direct = derivative(&wiggly, 1).l2_norm();
        assert!((sobolev_seminorm(&wiggly, 1.0) - direct).abs() < 1e-12);
        // s = 0 is Parseval.
        assert!((sobolev_seminorm(&wiggly, 0.0) - wiggly.l2_norm()).abs() < 1e-12);
        let _ = PI;
    }

    #[test]
    fn upsample_interpolates() {
        let f = field(16, |s| Vec2::new((3.0 * s).cos() + (8.0 * s).cos(), (2.0 * s).sin()));
        let g = upsample(&f, 4);
        assert_eq!(g.len(), 64);
        for j in 0..16 {
            assert!((g[4 * j] - f[j]).norm() < 1e-13);
        }
        let smooth = field(16, |s| Vec2::new((3.0 * s).cos(), (2.0 * s).sin()));
        let fine = field(64, |s| Vec2::new((3.0 * s).cos(), (2.0 * s).sin()));
        assert!(max_diff(&upsample(&smooth, 4), &fine) < 1e-13);
    }

    #[test]
    fn dealias_examples() {
        let f = field(32, |s| Vec2::new(s.cos() + 1e-3 * (15.0 * s).sin(), s.sin()));
        assert!(max_diff(&dealias(&f, 1.0, 0.0), &f) < 1e-15);
        let high = field(32, |s| Vec2::new((14.0 * s).cos(), 0.0));
        assert!(dealias(&high, 2.0 / 3.0, 0.0).max_norm() < 1e-14);
        let tiny = field(32, |s| Vec2::new(s.cos() + 1e-15 * (3.0 * s).cos(), 0.0));
        let cleaned = dealias(&tiny, 1.0, 1e-13);
        let spec = to_spectral(&cleaned);
        // The original coefficient is 5e-16; only transform roundoff remains.
        assert!(spec.coeff(3).unwrap()[0].norm() < 1e-16);
    }
}

//! String configurations and their geometry.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, GridField};
use crate::Vec2;

/// Samples of `X(s)` together with its spectral first and second derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveState {
    x: GridField,
    dx: GridField,
    ddx: GridField,
}

impl CurveState {
    pub fn new(x: GridField) -> Self {
        let dx = spectral::derivative(&x, 1);
        let ddx = spectral::derivative(&x, 2);
        Self { x, dx, ddx }
    }

    pub fn from_points(points: Vec<Vec2>) -> Result<Self> {
        Ok(Self::new(GridField::new(points)?))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.x.spacing()
    }

    pub fn samples(&self) -> &GridField {
        &self.x
    }

    /// `X'` at the nodes.
    pub fn tangent(&self) -> &GridField {
        &self.dx
    }

    /// `X''` at the nodes, which is also the elastic force density.
    pub fn second_derivative(&self) -> &GridField {
        &self.ddx
    }

    pub fn into_samples(self) -> GridField {
        self.x
    }

    /// Rigid motion `x ↦ Q_angle x + shift`.
    pub fn transformed(&self, angle: f64, shift: Vec2) -> Self {
        let (sn, cs) = angle.sin_cos();
        Self::new(self.x.map(|p| Vec2::new(cs * p.x - sn * p.y, sn * p.x + cs * p.y) + shift))
    }
}

/// Chord slope `L`, derivative slope `M` and `N = (L - X'(s))/τ` for a pair of
/// parameter values `s = s_j`, `s' = s_j'` with `τ = s' - s` wrapped into `[-π, π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffQuotients {
    pub l: Vec2,
    pub m: Vec2,
    pub n: Vec2,
    pub tau: f64,
}

/// Wrapped offset `s_jp - s_j` in `[-π, π)`.
pub fn torus_offset(j: usize, jp: usize, n: usize) -> f64 {
    let d = (jp + n - j % n) % n;
    let h = TAU / n as f64;
    if d < n / 2 {
        d as f64 * h
    } else {
        (d as f64 - n as f64) * h
    }
}

/// Difference quotients at `(s_j, s_jp)`; on the diagonal the limits
/// `L = X'`, `M = X''`, `N = X''/2` are returned.
pub fn diff_quotients(curve: &CurveState, j: usize, jp: usize) -> DiffQuotients {
    let n = curve.len();
    assert!(j < n && jp < n, "sample index out of range");
    let (x, dx, ddx) = (&curve.x, &curve.dx, &curve.ddx);
    if j == jp {
        return DiffQuotients {
            l: dx[j],
            m: ddx[j],
            n: ddx[j] * 0.5,
            tau: 0.0,
        };
    }
    let tau = torus_offset(j, jp, n);
    let l = (x[jp] - x[j]) / tau;
    let m = (dx[jp] - dx[j]) / tau;
    DiffQuotients {
        l,
        m,
        n: (l - dx[j]) / tau,
        tau,
    }
}

/// Discrete well-stretched constant: the minimum over distinct grid pairs of
/// `|X(s_1) - X(s_2)| / d(s_1, s_2)` with `d` the distance on the torus.
///
/// This is the grid value; between samples the continuum infimum can be
/// slightly smaller. A return value of zero means two samples coincide.
pub fn well_stretched_constant(curve: &CurveState) -> f64 {
    let x = curve.x.values();
    let n = x.len();
    let h = curve.spacing();
    let inv_dist: Vec<f64> = (0..=n / 2).map(|d| 1.0 / (d as f64 * h)).collect();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let mut best = f64::INFINITY;
            // Offsets 1..=n/2 from each j cover every unordered pair.
            for d in 1..=n / 2 {
                let jp = (j + d) % n;
                let q = (x[jp] - x[j]).norm() * inv_dist[d];
                best = best.min(q);
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// `½∮ X × X' ds` by the trapezoid rule; positive for counter-clockwise curves.
pub fn signed_area(curve: &CurveState) -> f64 {
    let h = curve.spacing();
    0.5 * h
        * curve
            .x
            .values()
            .iter()
            .zip(curve.dx.values())
            .map(|(p, t)| p.x * t.y - p.y * t.x)
            .sum::<f64>()
}

/// Enclosed area; errors unless the curve is positively oriented.
pub fn enclosed_area(curve: &CurveState) -> Result<f64> {
    let area = signed_area(curve);
    if !(area > 0.0) {
        return Err(Error::Orientation { area });
    }
    Ok(area)
}

/// Radius of the disk with the same area.
pub fn effective_radius(curve: &CurveState) -> Result<f64> {
    Ok((enclosed_area(curve)? / PI).sqrt())
}

/// `½‖X'‖²_{L²}`, computed as half the squared `Ḣ¹` seminorm.
pub fn elastic_energy(curve: &CurveState) -> f64 {
    let s = spectral::sobolev_seminorm(&curve.x, 1.0);
    0.5 * s * s
}

/// `center + R (cos(s + θ), sin(s + θ))`, the uniformly parameterized circle.
pub fn make_circle(n: usize, radius: f64, theta: f64, center: Vec2) -> Result<CurveState> {
    check_radius(radius)?;
    let x = GridField::from_fn(n, |s| {
        center + radius * Vec2::new((s + theta).cos(), (s + theta).sin())
    })?;
    Ok(CurveState::new(x))
}

/// One Fourier-mode displacement `D(s) = Re((ax, ay) e^{iks})`.
///
/// `ax` and `ay` are complex amplitudes stored as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationMode {
    pub k: u32,
    pub ax: [f64; 2],
    pub ay: [f64; 2],
}

impl PerturbationMode {
    /// `ε (cos ks, sin ks)`: for `k >= 2` this is the slowest-decaying
    /// polarization of mode `k` about the unit circle.
    pub fn co_rotating(k: u32, eps: f64) -> Self {
        Self {
            k,
            ax: [eps, 0.0],
            ay: [0.0, -eps],
        }
    }

    /// `ε (cos ks, -sin ks)`, the fast polarization.
    pub fn counter_rotating(k: u32, eps: f64) -> Self {
        Self {
            k,
            ax: [eps, 0.0],
            ay: [0.0, eps],
        }
    }

    pub fn eval(&self, s: f64) -> Vec2 {
        let e = Complex64::from_polar(1.0, self.k as f64 * s);
        let ax = Complex64::new(self.ax[0], self.ax[1]);
        let ay = Complex64::new(self.ay[0], self.ay[1]);
        Vec2::new((ax * e).re, (ay * e).re)
    }
}

/// `R (cos s, sin s)` plus the sum of the given mode displacements.
pub fn make_perturbed_circle(
    n: usize,
    radius: f64,
    modes: &[PerturbationMode],
) -> Result<CurveState> {
    check_radius(radius)?;
    let x = GridField::from_fn(n, |s| {
        let base = radius * Vec2::new(s.cos(), s.sin());
        modes.iter().fold(base, |acc, m| acc + m.eval(s))
    })?;
    Ok(CurveState::new(x))
}

/// A circle traced non-uniformly: `R (cos φ, sin φ)` with `φ = s + β sin s`.
pub fn make_reparam_circle(n: usize, radius: f64, beta: f64) -> Result<CurveState> {
    check_radius(radius)?;
    if !(beta.abs() < 1.0) {
        return Err(Error::param(
            "beta",
            format!("must satisfy |beta| < 1 for a bijective reparameterization, got {beta}"),
        ));
    }
    let x = GridField::from_fn(n, |s| {
        let phi = s + beta * s.sin();
        radius * Vec2::new(phi.cos(), phi.sin())
    })?;
    Ok(CurveState::new(x))
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("radius", format!("must be positive, got {radius}")));
    }
    Ok(())
}

//! Closest circular equilibrium, the energy sandwich around it, and the
//! linearized dynamics about the unit circle.

use std::f64::consts::TAU;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::curve::{effective_radius, CurveState};
use crate::dynamics::DiagnosticsRow;
use crate::error::{Error, Result};
use crate::spectral::{self, GridField};
use crate::Vec2;

/// The uniformly parameterized circle `x_* + R (cos(s + θ_*), sin(s + θ_*))`
/// closest in `L²` to a configuration, with `R` the effective radius.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumFit {
    /// Phase in `[0, 2π)`.
    pub theta_star: f64,
    pub x_star: Vec2,
    pub radius: f64,
    pub samples: GridField,
    /// Set when the configuration has no mode-one content, so that every
    /// phase fits equally well; `theta_star` is then 0.
    pub degenerate: bool,
}

impl EquilibriumFit {
    /// `X_*'` sampled analytically.
    pub fn tangent(&self) -> GridField {
        let (r, th) = (self.radius, self.theta_star);
        GridField::from_fn(self.samples.len(), |s| {
            r * Vec2::new(-(s + th).sin(), (s + th).cos())
        })
        .expect("fit grid is valid")
    }
}

/// Fits the closest equilibrium.
///
/// The centre is the mean of `Y` and the radius comes from the enclosed area.
/// Only the `k = ±1` coefficients depend on the phase, and the distance is
/// minimized at `θ_* = arg(Ŷ_{1,x} + i Ŷ_{1,y})`.
pub fn closest_equilibrium(y: &CurveState) -> Result<EquilibriumFit> {
    let radius = effective_radius(y)?;
    let x_star = y.samples().mean();
    let spec = spectral::to_spectral(y.samples());
    let [cx, cy] = spec.coeff(1).expect("grid has mode one");
    let c = cx + Complex64::i() * cy;
    let scale = y.samples().map(|p| p - x_star).max_norm();
    let degenerate = c.norm() <= 1e-13 * scale;
    let theta_star = if degenerate {
        0.0
    } else {
        let t = c.arg().rem_euclid(TAU);
        if t >= TAU {
            0.0
        } else {
            t
        }
    };
    let samples = GridField::from_fn(y.len(), |s| {
        x_star + radius * Vec2::new((s + theta_star).cos(), (s + theta_star).sin())
    })?;
    Ok(EquilibriumFit {
        theta_star,
        x_star,
        radius,
        samples,
        degenerate,
    })
}

/// `∮ (Y - Y_*)·Y_*' ds`; vanishes at the optimal phase.
pub fn first_order_residual(y: &CurveState, fit: &EquilibriumFit) -> f64 {
    (y.samples() - &fit.samples).inner(&fit.tangent())
}

/// The three quantities of the `H¹` / energy equivalence
/// `lower <= distance <= upper`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySandwich {
    /// `½(‖Y'‖² - ‖Y_*'‖²)`.
    pub lower: f64,
    /// `‖Y' - Y_*'‖²`.
    pub distance: f64,
    /// `4(‖Y'‖² - ‖Y_*'‖²)`.
    pub upper: f64,
}

impl EnergySandwich {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.distance + slack && self.distance <= self.upper + slack
    }
}

pub fn h1_energy_equivalence(y: &CurveState) -> Result<EnergySandwich> {
    let fit = closest_equilibrium(y)?;
    Ok(energy_sandwich(y, &fit))
}

pub fn energy_sandwich(y: &CurveState, fit: &EquilibriumFit) -> EnergySandwich {
    let e = spectral::sobolev_seminorm(y.samples(), 1.0).powi(2);
    let e_star = spectral::sobolev_seminorm(&fit.samples, 1.0).powi(2);
    let distance = spectral::sobolev_seminorm(&(y.samples() - &fit.samples), 1.0).powi(2);
    EnergySandwich {
        lower: 0.5 * (e - e_star),
        distance,
        upper: 4.0 * (e - e_star),
    }
}

/// `‖Y - Y_θ‖` in `Ḣ^s` for an arbitrary phase, keeping the fitted centre
/// and radius. Used to check that `θ_*` is optimal.
pub fn distance_at_phase(y: &CurveState, fit: &EquilibriumFit, theta: f64, s: f64) -> f64 {
    let other = GridField::from_fn(y.len(), |t| {
        fit.x_star + fit.radius * Vec2::new((t + theta).cos(), (t + theta).sin())
    })
    .expect("fit grid is valid");
    spectral::sobolev_seminorm(&(y.samples() - &other), s)
}

/// Linearization of the string velocity about the unit circle
/// `(cos s, sin s)`: `D ↦ -¼ J H D - ¼ H D'` with `J = [[0, 1], [-1, 0]]`.
pub fn linearized_velocity(d: &GridField) -> GridField {
    let hd = spectral::hilbert_transform(d);
    let hdp = spectral::fractional_laplacian_half(d);
    hd.zip_with(&hdp, |a, b| -0.25 * (Vec2::new(a.y, -a.x) + b))
}

/// Linearization about a general equilibrium. The velocity is translation
/// invariant, rotation equivariant and homogeneous of degree one in the
/// configuration, so only the phase enters: `D ↦ Q_θ lin(Q_θᵀ D)`.
pub fn linearized_velocity_about(fit: &EquilibriumFit, d: &GridField) -> GridField {
    let (sn, cs) = fit.theta_star.sin_cos();
    let rotated = d.map(|v| Vec2::new(cs * v.x + sn * v.y, -sn * v.x + cs * v.y));
    linearized_velocity(&rotated).map(|v| Vec2::new(cs * v.x - sn * v.y, sn * v.x + cs * v.y))
}

/// Action of [`linearized_velocity`] on the wavenumber-`k` coefficient pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeBlock {
    pub k: i64,
    pub block: Matrix2<Complex64>,
    /// Eigenvalues in increasing order.
    pub eigenvalues: (f64, f64),
}

/// `-¼ [[|k|, -i sgn k], [i sgn k, |k|]]` with eigenvalues `-(|k| ± 1)/4`
/// (both zero at `k = 0`).
pub fn mode_block(k: i64) -> ModeBlock {
    let a = k.abs() as f64;
    let sg = k.signum() as f64;
    let block = Matrix2::new(
        Complex64::new(a, 0.0),
        Complex64::new(0.0, -sg),
        Complex64::new(0.0, sg),
        Complex64::new(a, 0.0),
    ) * Complex64::new(-0.25, 0.0);
    // Hermitian 2×2: real diagonal p, q and off-diagonal c.
    let (p, q) = (block[(0, 0)].re, block[(1, 1)].re);
    let c = block[(0, 1)].norm();
    let mid = 0.5 * (p + q);
    let rad = (0.25 * (p - q).powi(2) + c * c).sqrt();
    ModeBlock {
        k,
        block,
        eigenvalues: (mid - rad, mid + rad),
    }
}

/// Which distance column of the diagnostics to fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceColumn {
    H1,
    H52,
}

impl DistanceColumn {
    pub fn get(self, row: &DiagnosticsRow) -> f64 {
        match self {
            DistanceColumn::H1 => row.dist_h1,
            DistanceColumn::H52 => row.dist_h52,
        }
    }
}

/// Least-squares decay rate `α` of `value ≈ c e^{-α t}`.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::param("window", "need at least two samples"));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::param(
            "column",
            format!("values must be positive on the window, found {v}"),
        ));
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let lm = logs.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, l) in times.iter().zip(&logs) {
        num += (t - tm) * (l - lm);
        den += (t - tm) * (t - tm);
    }
    if den == 0.0 {
        return Err(Error::param("window", "all samples share one time"));
    }
    Ok(-num / den)
}

/// Decay rate of a distance column over `window`; defaults to the second
/// half of the recorded time span.
pub fn measure_decay_rate(
    rows: &[DiagnosticsRow],
    column: DistanceColumn,
    window: Option<(f64, f64)>,
) -> Result<f64> {
    let (first, last) = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::param("rows", "no diagnostics recorded")),
    };
    let (t1, t2) = window.unwrap_or((0.5 * (first + last), last));
    let (ts, vs): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.t >= t1 - 1e-12 && r.t <= t2 + 1e-12)
        .map(|r| (r.t, column.get(r)))
        .unzip();
    fit_decay_rate(&ts, &vs)
}

/// Slowest nonzero decay rate predicted for wavenumber `k >= 2`.
pub fn predicted_rate(k: i64) -> f64 {
    -mode_block(k).eigenvalues.1
}

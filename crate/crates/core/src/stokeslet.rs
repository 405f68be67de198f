//! Boundary-integral evaluations for the Stokes flow driven by the string.
//!
//! The elastic force density is `X''`, so the fluid velocity is
//! `u(x) = ∮ G(x - X(s')) X''(s') ds'`. After one integration by parts every
//! integrand used here is either smooth and periodic (on the curve) or
//! regular (off the curve), and the periodic trapezoid rule applies.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::curve::{diff_quotients, torus_offset, CurveState};
use crate::error::{Error, Result};
use crate::spectral::{self, GridField};
use crate::{Mat2, Vec2};

const FOUR_PI: f64 = 4.0 * PI;

/// Stokeslet `G(x) = (1/4π)(-ln|x| I + x⊗x/|x|²)`.
pub fn stokeslet_g(x: Vec2) -> Result<Mat2> {
    let r2 = x.norm_squared();
    if r2 == 0.0 {
        return Err(Error::Singular { kernel: "stokeslet" });
    }
    let outer = x * x.transpose() / r2;
    Ok((Mat2::identity() * (-0.5 * r2.ln()) + outer) / FOUR_PI)
}

/// Pressure kernel `Q(x) = x / (2π|x|²)`.
pub fn pressure_kernel_q(x: Vec2) -> Result<Vec2> {
    let r2 = x.norm_squared();
    if r2 == 0.0 {
        return Err(Error::Singular { kernel: "pressure kernel" });
    }
    Ok(x / (2.0 * PI * r2))
}

/// Velocity and pressure at one point of the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowSample {
    pub location: Vec2,
    pub u: Vec2,
    pub p: f64,
}

/// Regularized on-curve integrand, written with the difference quotients
/// `L`, `M` and `b = X'(s')`:
///
/// ```text
/// 4π Γ₀ = (L·b)/|L|² M - (L·M)/|L|² b - (b·M)/|L|² L + 2(L·b)(L·M)/|L|⁴ L
/// ```
///
/// The diagonal returns the limit `X''(s)/(4π)`.
pub fn gamma0(curve: &CurveState, j: usize, jp: usize) -> Result<Vec2> {
    if j == jp {
        return Ok(curve.second_derivative()[j] / FOUR_PI);
    }
    let q = diff_quotients(curve, j, jp);
    let b = curve.tangent()[jp];
    let ll = q.l.norm_squared();
    if ll == 0.0 {
        return Err(Error::Degenerate { j, jp });
    }
    let lb = q.l.dot(&b);
    let lm = q.l.dot(&q.m);
    let bm = b.dot(&q.m);
    Ok((q.m * (lb / ll) - b * (lm / ll) - q.l * (bm / ll) + q.l * (2.0 * lb * lm / (ll * ll)))
        / FOUR_PI)
}

/// Sum of `Γ₀(s_j, ·)` over the grid, without the `h/(4π)` factor.
///
/// `Γ₀` is homogeneous of degree zero in the pair `(L, M)`, so the raw
/// differences `ΔX`, `ΔX'` are used in place of the quotients.
fn gamma0_row(x: &[Vec2], dx: &[Vec2], ddx: &[Vec2], j: usize) -> Result<Vec2> {
    let (xj, aj) = (x[j], dx[j]);
    let mut acc = ddx[j];
    for (jp, (xp, b)) in x.iter().zip(dx).enumerate() {
        if jp == j {
            continue;
        }
        let r = xp - xj;
        let m = b - aj;
        let rr = r.x * r.x + r.y * r.y;
        if rr == 0.0 {
            return Err(Error::Degenerate { j, jp });
        }
        let inv = 1.0 / rr;
        let rb = r.x * b.x + r.y * b.y;
        let rm = r.x * m.x + r.y * m.y;
        let bm = b.x * m.x + b.y * m.y;
        let cr = (2.0 * rb * rm * inv - bm) * inv;
        let cm = rb * inv;
        let cb = -rm * inv;
        acc.x += cm * m.x + cb * b.x + cr * r.x;
        acc.y += cm * m.y + cb * b.y + cr * r.y;
    }
    Ok(acc)
}

/// String velocity `u(X(s_j))` by the periodic trapezoid rule on `Γ₀`.
///
/// This is the full right-hand side of the contour dynamics.
pub fn on_curve_velocity(curve: &CurveState) -> Result<GridField> {
    let x = curve.samples().values();
    let dx = curve.tangent().values();
    let ddx = curve.second_derivative().values();
    let scale = curve.spacing() / FOUR_PI;
    let rows: Result<Vec<Vec2>> = (0..x.len())
        .into_par_iter()
        .map(|j| gamma0_row(x, dx, ddx, j).map(|v| v * scale))
        .collect();
    GridField::new(rows?)
}

/// The same velocity computed from the integrand with the constant
/// `C = 0` in place of `X'(s)`, i.e. from
/// `-∮ ∂_{s'}[G(X(s) - X(s'))] X'(s') ds'`.
///
/// That integrand has an odd `1/τ` singularity. The symmetric punctured sum
/// drops it and the diagonal node receives the regular part
/// `(a·c/|a|²) a + c/2` with `a = X'(s)`, `c = X''(s)`. Agreement with
/// [`on_curve_velocity`] is the discrete form of the vanishing principal value.
pub fn on_curve_velocity_c0(curve: &CurveState) -> Result<GridField> {
    let x = curve.samples().values();
    let dx = curve.tangent().values();
    let ddx = curve.second_derivative().values();
    let n = x.len();
    let scale = curve.spacing() / FOUR_PI;
    let rows: Result<Vec<Vec2>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let (a, c) = (dx[j], ddx[j]);
            let mut acc = a * (a.dot(&c) / a.norm_squared()) + c * 0.5;
            for jp in 0..n {
                if jp == j {
                    continue;
                }
                let r = x[jp] - x[j];
                let b = dx[jp];
                let rr = r.norm_squared();
                if rr == 0.0 {
                    return Err(Error::Degenerate { j, jp });
                }
                let rb = r.dot(&b);
                acc += r * ((2.0 * rb * rb / rr - b.norm_squared()) / rr);
            }
            Ok(acc * scale)
        })
        .collect();
    GridField::new(rows?)
}

/// Off-curve evaluator that caches refined copies of the curve.
///
/// Close to the membrane the integrands vary on the scale of the distance
/// `d` to the curve, which the trapezoid rule resolves only when the node
/// spacing is a fraction of `d`. The curve is therefore interpolated
/// spectrally onto a grid refined by the smallest power of two with
/// `h/F <= d/4` (capped at [`OffCurve::MAX_REFINEMENT`]).
pub struct OffCurve<'a> {
    curve: &'a CurveState,
    extent: f64,
    refined: [OnceLock<(GridField, GridField)>; 7],
}

impl<'a> OffCurve<'a> {
    pub const MAX_REFINEMENT: usize = 64;

    pub fn new(curve: &'a CurveState) -> Self {
        Self {
            curve,
            extent: curve.samples().max_norm(),
            refined: Default::default(),
        }
    }

    /// Nearest sample of the original grid (ties go to the lowest index) and
    /// its distance.
    pub fn nearest_sample(&self, x: Vec2) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (j, p) in self.curve.samples().values().iter().enumerate() {
            let d = (x - p).norm();
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }

    fn level_for(&self, x: Vec2) -> Result<&(GridField, GridField)> {
        let (sample, dist) = self.nearest_sample(x);
        if dist <= 1e-13 * (1.0 + self.extent) {
            return Err(Error::OnCurve { sample });
        }
        let h = self.curve.spacing();
        let mut level = 0;
        while h / (1usize << level) as f64 > dist / 4.0 && (1usize << level) < Self::MAX_REFINEMENT {
            level += 1;
        }
        Ok(self.refined[level].get_or_init(|| {
            if level == 0 {
                (self.curve.samples().clone(), self.curve.tangent().clone())
            } else {
                let fine = spectral::upsample(self.curve.samples(), 1 << level);
                let dfine = spectral::derivative(&fine, 1);
                (fine, dfine)
            }
        }))
    }

    /// `u(x) = -∮ ∂_{s'}[G(x - X(s'))] (X'(s') - X'(s_x)) ds'`, where `s_x` is
    /// the nearest node of the quadrature grid.
    pub fn velocity(&self, x: Vec2) -> Result<Vec2> {
        let (pts, tan) = self.level_for(x)?;
        let (pts, tan) = (pts.values(), tan.values());
        let mut jx = 0;
        let mut best = f64::INFINITY;
        for (j, p) in pts.iter().enumerate() {
            let d = (x - p).norm_squared();
            if d < best {
                best = d;
                jx = j;
            }
        }
        let c = tan[jx];
        let mut acc = Vec2::zeros();
        for (p, b) in pts.iter().zip(tan) {
            let r = x - p;
            let w = b - c;
            let rr = r.norm_squared();
            let pr = r.dot(b);
            let rw = r.dot(&w);
            let bw = b.dot(&w);
            acc += (w * pr - b * rw - r * bw) / rr + r * (2.0 * pr * rw / (rr * rr));
        }
        Ok(-acc * (2.0 * PI / pts.len() as f64) / FOUR_PI)
    }

    /// `p(x) = (1/2π)∮ [|X'|²/|X - x|² - 2((X - x)·X')²/|X - x|⁴] ds'`, with the
    /// additive constant fixed so that `p → 0` at infinity.
    pub fn pressure(&self, x: Vec2) -> Result<f64> {
        let (pts, tan) = self.level_for(x)?;
        let (pts, tan) = (pts.values(), tan.values());
        let mut acc = 0.0;
        for (p, b) in pts.iter().zip(tan) {
            let r = p - x;
            let rr = r.norm_squared();
            let rb = r.dot(b);
            acc += (b.norm_squared() - 2.0 * rb * rb / rr) / rr;
        }
        Ok(acc / pts.len() as f64)
    }

    pub fn sample(&self, x: Vec2) -> Result<FlowSample> {
        Ok(FlowSample {
            location: x,
            u: self.velocity(x)?,
            p: self.pressure(x)?,
        })
    }
}

/// Velocity at a point off the curve. See [`OffCurve`] for repeated queries.
pub fn off_curve_velocity(curve: &CurveState, x: Vec2) -> Result<Vec2> {
    OffCurve::new(curve).velocity(x)
}

/// Pressure at a point off the curve (zero gauge at infinity).
pub fn pressure_at(curve: &CurveState, x: Vec2) -> Result<f64> {
    OffCurve::new(curve).pressure(x)
}

/// Rate of viscous dissipation `∫|∇u|² = ∮ u(X)·X'' ds`.
pub fn dissipation_rate(curve: &CurveState) -> Result<f64> {
    Ok(dissipation_from_velocity(curve, &on_curve_velocity(curve)?))
}

/// [`dissipation_rate`] for an already computed string velocity.
pub fn dissipation_from_velocity(curve: &CurveState, u: &GridField) -> f64 {
    u.inner(curve.second_derivative())
}

/// Smooth remainder `g_X = u + (1/4)(-Δ)^{1/2} X`.
pub fn g_x(curve: &CurveState) -> Result<GridField> {
    Ok(g_from_velocity(curve, &on_curve_velocity(curve)?))
}

pub(crate) fn g_from_velocity(curve: &CurveState, u: &GridField) -> GridField {
    let lap = spectral::fractional_laplacian_half(curve.samples());
    u.zip_with(&lap, |a, b| a + b * 0.25)
}

/// `(τ² - 4 sin²(τ/2)) / (4τ sin²(τ/2))`, with a Taylor branch for small `τ`.
pub fn near_diagonal_factor(tau: f64) -> f64 {
    if tau.abs() < 1e-2 {
        let t2 = tau * tau;
        tau * (1.0 / 12.0 + t2 * (1.0 / 240.0 + t2 * (1.0 / 6048.0 + t2 / 172800.0)))
    } else {
        near_diagonal_factor_direct(tau)
    }
}

pub(crate) fn near_diagonal_factor_direct(tau: f64) -> f64 {
    let s2 = (0.5 * tau).sin().powi(2);
    (tau * tau - 4.0 * s2) / (4.0 * tau * s2)
}

/// Integrand whose trapezoid sum is `g_X'`, in the simplified form built from
/// `L`, `M`, `N`. Vanishes on the diagonal.
pub fn gamma1(curve: &CurveState, j: usize, jp: usize) -> Result<Vec2> {
    if j == jp {
        return Ok(Vec2::zeros());
    }
    let q = diff_quotients(curve, j, jp);
    let (l, m, nn) = (q.l, q.m, q.n);
    let a = curve.tangent()[j];
    let b = curve.tangent()[jp];
    let ll = l.norm_squared();
    if ll == 0.0 {
        return Err(Error::Degenerate { j, jp });
    }
    let ll2 = ll * ll;
    let ll3 = ll2 * ll;
    let nl = nn.dot(&l);
    let la = l.dot(&a);
    let lm = l.dot(&m);
    let lb = l.dot(&b);
    let ln = l.dot(&nn);
    let f = near_diagonal_factor(q.tau);

    let coef_m = (a - l).dot(&nn) / ll - 2.0 * nl * la / ll2 - f;
    let coef_a = (m - nn * 2.0).dot(&m) / ll + 2.0 * nl * lm / ll2;
    let coef_l = 2.0 * lm * l.dot(&(m - nn)) * la / ll3 + 2.0 * (nn - m).dot(&m) * la / ll2
        - 6.0 * lm * lb * ln / ll3
        + 2.0 * nn.dot(&m) * lb / ll2
        + 2.0 * lm * nn.dot(&b) / ll2;
    let coef_n = 2.0 * lm * lb / ll2;
    Ok((m * coef_m + a * coef_a + l * coef_l + nn * coef_n) / FOUR_PI)
}

/// The same integrand before simplification:
/// `(-∂_s ∂_{s'}[G(X(s) - X(s'))] - I/(16π sin²(τ/2))) (X'(s') - X'(s))`,
/// with the mixed derivative of `G` expanded by the chain rule.
pub fn gamma1_direct(curve: &CurveState, j: usize, jp: usize) -> Result<Vec2> {
    if j == jp {
        return Err(Error::param(
            "jp",
            "the unsimplified integrand is not defined on the diagonal",
        ));
    }
    let x = curve.samples();
    let a = curve.tangent()[j];
    let b = curve.tangent()[jp];
    let r = x[j] - x[jp];
    let rr = r.norm_squared();
    if rr == 0.0 {
        return Err(Error::Degenerate { j, jp });
    }
    let r4 = rr * rr;
    let p = r.dot(&b);
    let q = r.dot(&a);
    let ab = a.dot(&b);
    let outer = |u: Vec2, v: Vec2| u * v.transpose();
    let dg = (Mat2::identity() * (ab / rr - 2.0 * p * q / r4) - (outer(b, a) + outer(a, b)) / rr
        + (outer(b, r) + outer(r, b)) * (2.0 * q / r4)
        + outer(r, r) * (2.0 * ab / r4)
        + (outer(a, r) + outer(r, a)) * (2.0 * p / r4)
        - outer(r, r) * (8.0 * p * q / (r4 * rr)))
        / FOUR_PI;
    let tau = torus_offset(j, jp, curve.len());
    let s2 = (0.5 * tau).sin().powi(2);
    let kernel = -dg - Mat2::identity() / (16.0 * PI * s2);
    Ok(kernel * (b - a))
}

/// `g_X'` as the trapezoid sum of [`gamma1`] over `s'`.
pub fn g_prime_from_gamma1(curve: &CurveState) -> Result<GridField> {
    let n = curve.len();
    let h = curve.spacing();
    let rows: Result<Vec<Vec2>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = Vec2::zeros();
            for jp in 0..n {
                acc += gamma1(curve, j, jp)?;
            }
            Ok(acc * h)
        })
        .collect();
    GridField::new(rows?)
}

//! Time integration of `X_t = -(1/4)(-Δ)^{1/2} X + g_X`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{self, CurveState};
use crate::equilibrium;
use crate::error::{Error, Result};
use crate::spectral::{self, DealiasParams, GridField};
use crate::stokeslet;
use crate::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Classical four-stage Runge-Kutta on the full velocity.
    Rk4,
    /// Exponential Euler: the principal part exactly per mode, `g_X` explicitly.
    ExpEuler,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Filter applied after every full step.
    pub dealias: Option<DealiasParams>,
    /// Abort once the well-stretched constant drops below this; `None` means
    /// half of its initial value.
    pub lambda_abort: Option<f64>,
    /// Keep a snapshot every this many steps (step 0 and the final step are
    /// always kept).
    pub snapshot_every: usize,
}

impl StepperConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self {
            scheme,
            dt,
            t_end,
            dealias: None,
            lambda_abort: None,
            snapshot_every: usize::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("t_end", format!("must be positive, got {}", self.t_end)));
        }
        if self.dt > self.t_end {
            return Err(Error::param("dt", "must not exceed t_end"));
        }
        if let Some(l) = self.lambda_abort {
            if !(l > 0.0) {
                return Err(Error::param("lambda_abort", format!("must be positive, got {l}")));
            }
        }
        if self.snapshot_every == 0 {
            return Err(Error::param("snapshot_every", "must be at least 1"));
        }
        if let Some(d) = &self.dealias {
            d.validate()?;
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn step_count(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    fn time_of(&self, step: usize) -> f64 {
        if step >= self.step_count() {
            self.t_end
        } else {
            step as f64 * self.dt
        }
    }
}

/// Scalars recorded once per step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub lambda: f64,
    pub radius: f64,
    pub area: f64,
    /// `‖X - X_*‖` in `Ḣ¹`.
    pub dist_h1: f64,
    /// `‖X - X_*‖` in `Ḣ^{5/2}`.
    pub dist_h52: f64,
    pub theta_star: f64,
    pub xstar: Vec2,
}

impl DiagnosticsRow {
    /// Row for `curve` whose string velocity `u` is already known. Fields that
    /// are undefined for the configuration (no positive area) are NaN.
    pub fn compute(t: f64, curve: &CurveState, u: &GridField) -> Self {
        let area = curve::signed_area(curve);
        let mut row = Self {
            t,
            energy: curve::elastic_energy(curve),
            dissipation: stokeslet::dissipation_from_velocity(curve, u),
            lambda: curve::well_stretched_constant(curve),
            radius: f64::NAN,
            area,
            dist_h1: f64::NAN,
            dist_h52: f64::NAN,
            theta_star: f64::NAN,
            xstar: Vec2::new(f64::NAN, f64::NAN),
        };
        if let Ok(fit) = equilibrium::closest_equilibrium(curve) {
            let diff = spectral::to_spectral(&(curve.samples() - &fit.samples));
            row.radius = fit.radius;
            row.dist_h1 = spectral::spectral_seminorm(&diff, 1.0);
            row.dist_h52 = spectral::spectral_seminorm(&diff, 2.5);
            row.theta_star = fit.theta_star;
            row.xstar = fit.x_star;
        }
        row
    }
}

/// String velocity; the right-hand side of the evolution.
pub fn rhs(curve: &CurveState) -> Result<GridField> {
    stokeslet::on_curve_velocity(curve)
}

fn finite_state(x: GridField, what: &'static str) -> Result<CurveState> {
    if !x.is_finite() {
        return Err(Error::NonFinite(what));
    }
    Ok(CurveState::new(x))
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    Ok(())
}

/// One classical Runge-Kutta step.
pub fn step_rk4(curve: &CurveState, dt: f64) -> Result<CurveState> {
    check_dt(dt)?;
    let k1 = rhs(curve)?;
    rk4_from(curve, &k1, dt)
}

fn rk4_from(curve: &CurveState, k1: &GridField, dt: f64) -> Result<CurveState> {
    let x = curve.samples();
    let stage = |k: &GridField, c: f64| -> Result<CurveState> {
        finite_state(x.zip_with(k, |a, b| a + b * c), "Runge-Kutta stage")
    };
    let k2 = rhs(&stage(k1, 0.5 * dt)?)?;
    let k3 = rhs(&stage(&k2, 0.5 * dt)?)?;
    let k4 = rhs(&stage(&k3, dt)?)?;
    let w = dt / 6.0;
    let next: Vec<Vec2> = (0..x.len())
        .map(|j| x[j] + (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * w)
        .collect();
    finite_state(GridField::from_vec_unchecked(next), "Runge-Kutta step")
}

/// `φ₁(z) = (e^z - 1)/z`, by series near zero.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        z.exp_m1() / z
    }
}

/// One exponential Euler step:
/// `X̂⁺_k = e^{-|k|dt/4} X̂_k + dt φ₁(-|k|dt/4) ĝ_k` with `g = g_X(X)`.
pub fn step_exp_euler(curve: &CurveState, dt: f64) -> Result<CurveState> {
    check_dt(dt)?;
    let u = rhs(curve)?;
    exp_euler_from(curve, &u, dt)
}

fn exp_euler_from(curve: &CurveState, u: &GridField, dt: f64) -> Result<CurveState> {
    let g = stokeslet::g_from_velocity(curve, u);
    exp_euler_with_g(curve.samples(), &g, dt)
}

/// Exponential Euler update for a given explicit term `g`.
pub fn exp_euler_with_g(x: &GridField, g: &GridField, dt: f64) -> Result<CurveState> {
    let lin = spectral::semigroup_apply(x, dt)?;
    let forced = spectral::apply_multiplier(g, |k| {
        Complex64::new(dt * phi1(-(k.abs() as f64) * dt / 4.0), 0.0)
    });
    finite_state(&lin + &forced, "exponential Euler step")
}

/// Advances `curve` by `dt` given its already computed velocity `u`.
pub fn step_with_velocity(
    scheme: Scheme,
    curve: &CurveState,
    u: &GridField,
    dt: f64,
) -> Result<CurveState> {
    check_dt(dt)?;
    match scheme {
        Scheme::Rk4 => rk4_from(curve, u, dt),
        Scheme::ExpEuler => exp_euler_from(curve, u, dt),
    }
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub rows: Vec<DiagnosticsRow>,
    /// `(step index, time, state)`.
    pub snapshots: Vec<(usize, f64, CurveState)>,
    pub final_state: CurveState,
}

/// Runs to `t_end`, handing each diagnostics row and snapshot to the
/// callbacks as soon as it is available, so that an aborted run still
/// leaves its history behind. Returns the final state.
pub fn run_with(
    initial: &CurveState,
    cfg: &StepperConfig,
    mut on_row: impl FnMut(&DiagnosticsRow) -> Result<()>,
    mut on_snapshot: impl FnMut(usize, f64, &CurveState) -> Result<()>,
) -> Result<CurveState> {
    cfg.validate()?;
    curve::enclosed_area(initial)?;
    let lambda0 = curve::well_stretched_constant(initial);
    let threshold = cfg.lambda_abort.unwrap_or(0.5 * lambda0);
    if !(lambda0 > threshold) {
        return Err(Error::LambdaAbort {
            t: 0.0,
            lambda: lambda0,
            threshold,
        });
    }
    let steps = cfg.step_count();
    let mut state = initial.clone();
    for step in 0..=steps {
        let t = cfg.time_of(step);
        let u = rhs(&state).map_err(|e| match e {
            Error::NonFinite(_) => Error::BlowUp { t },
            other => other,
        })?;
        let row = DiagnosticsRow::compute(t, &state, &u);
        on_row(&row)?;
        if step % cfg.snapshot_every == 0 || step == steps {
            on_snapshot(step, t, &state)?;
        }
        if !(row.lambda >= threshold) {
            return Err(Error::LambdaAbort {
                t,
                lambda: row.lambda,
                threshold,
            });
        }
        if step == steps {
            break;
        }
        let dt = cfg.time_of(step + 1) - t;
        let next = step_with_velocity(cfg.scheme, &state, &u, dt).map_err(|e| match e {
            Error::NonFinite(_) => Error::BlowUp { t: t + dt },
            other => other,
        })?;
        state = match &cfg.dealias {
            Some(d) => CurveState::new(spectral::dealias(
                next.samples(),
                d.cutoff_fraction,
                d.krasny_floor,
            )),
            None => next,
        };
    }
    Ok(state)
}

/// [`run_with`], collecting everything in memory.
pub fn run(initial: &CurveState, cfg: &StepperConfig) -> Result<Trajectory> {
    let mut rows = Vec::new();
    let mut snapshots = Vec::new();
    let final_state = run_with(
        initial,
        cfg,
        |r| {
            rows.push(*r);
            Ok(())
        },
        |i, t, c| {
            snapshots.push((i, t, c.clone()));
            Ok(())
        },
    )?;
    Ok(Trajectory {
        rows,
        snapshots,
        final_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::make_circle;

    #[test]
    fn phi1_branches_meet() {
        for z in [1e-4, -1e-4] {
            assert!((phi1(z) - z.exp_m1() / z).abs() < 1e-15);
        }
        assert_eq!(phi1(0.0), 1.0);
    }

    #[test]
    fn step_count_lands_on_t_end() {
        let cfg = StepperConfig::new(Scheme::Rk4, 0.3, 1.0);
        assert_eq!(cfg.step_count(), 4);
        assert_eq!(cfg.time_of(4), 1.0);
        let cfg = StepperConfig::new(Scheme::Rk4, 0.01, 1.0);
        assert_eq!(cfg.step_count(), 100);
    }

    #[test]
    fn circle_is_a_fixed_point_of_both_schemes() {
        let c = make_circle(64, 1.0, 0.0, Vec2::zeros()).unwrap();
        for step in [step_rk4, step_exp_euler] {
            let next = step(&c, 0.1).unwrap();
            assert!((next.samples() - c.samples()).max_norm() < 1e-12);
        }
        assert!(step_rk4(&c, 0.0).is_err());
        assert!(step_exp_euler(&c, -1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(StepperConfig::new(Scheme::Rk4, 2.0, 1.0).validate().is_err());
        let mut cfg = StepperConfig::new(Scheme::Rk4, 0.1, 1.0);
        cfg.lambda_abort = Some(0.0);
        assert!(cfg.validate().is_err());
    }
}

//! Self-verification suites run by `ibstring verify` and by the acceptance
//! test target. Every tolerance is a named constant below.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{self, CurveState, PerturbationMode};
use crate::dynamics::{self, DiagnosticsRow, Scheme, StepperConfig};
use crate::equilibrium::{self, DistanceColumn};
use crate::error::Result;
use crate::spectral::{self, GridField};
use crate::stokeslet;
use crate::Vec2;

pub const STEADY_VELOCITY_TOL: f64 = 1e-10;
pub const STEADY_DRIFT_TOL: f64 = 1e-9;
pub const BALANCE_TOL: f64 = 1e-3;
pub const BALANCE_MIN_IMPROVEMENT: f64 = 4.0;
pub const AREA_DRIFT_TOL: f64 = 1e-6;
pub const RATE_BAND_K2: (f64, f64) = (0.225, 0.275);
pub const RATE_BAND_K3: (f64, f64) = (0.45, 0.55);
pub const GAMMA1_AGREEMENT_TOL: f64 = 1e-10;
pub const G_PRIME_REL_TOL: f64 = 1e-6;
pub const SANDWICH_SLACK: f64 = 1e-12;
pub const THETA_TOL: f64 = 1e-4;
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const REMAINDER_MIN_SLOPE: f64 = 1.9;
pub const CONTINUITY_FINAL_TOL: f64 = 1e-3;
pub const SEMIGROUP_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {} {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn render(&self) -> String {
        let mut s: String = self.outcomes.iter().map(|o| o.line() + "\n").collect();
        let failed = self.outcomes.iter().filter(|o| !o.passed).count();
        s.push_str(&format!(
            "{} checks, {} failed\n",
            self.outcomes.len(),
            failed
        ));
        s
    }
}

/// Well-stretched constant at the start and its minimum along one run.
#[derive(Clone, Debug)]
pub struct LambdaRecord {
    pub run: String,
    pub initial: f64,
    pub minimum: f64,
    pub aborted: bool,
}

/// Collects the runs performed by the dynamic checks.
#[derive(Default)]
pub struct RunLog {
    pub lambdas: Vec<LambdaRecord>,
}

impl RunLog {
    fn record(&mut self, run: &str, rows: &[DiagnosticsRow], aborted: bool) {
        let initial = rows.first().map_or(f64::NAN, |r| r.lambda);
        let minimum = rows.iter().map(|r| r.lambda).fold(f64::INFINITY, f64::min);
        self.lambdas.push(LambdaRecord {
            run: run.to_string(),
            initial,
            minimum,
            aborted,
        });
    }

    fn run(&mut self, name: &str, initial: &CurveState, cfg: &StepperConfig) -> Result<dynamics::Trajectory> {
        match dynamics::run(initial, cfg) {
            Ok(t) => {
                self.record(name, &t.rows, false);
                Ok(t)
            }
            Err(e) => {
                self.lambdas.push(LambdaRecord {
                    run: name.to_string(),
                    initial: curve::well_stretched_constant(initial),
                    minimum: f64::NAN,
                    aborted: true,
                });
                Err(e)
            }
        }
    }
}

fn timed(id: &str, name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckOutcome {
        id: id.to_string(),
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_complex(rng: &mut impl Rng, scale: f64) -> [f64; 2] {
    let r = scale * rng.gen::<f64>().sqrt();
    let phi = rng.gen_range(0.0..TAU);
    [r * phi.cos(), r * phi.sin()]
}

/// Near-circle for ensembles: a circle of random radius, phase and centre
/// plus modes `2..=6` whose amplitudes are at most `eps` times the radius.
pub fn random_near_circle(rng: &mut impl Rng, n: usize, eps: f64) -> Result<CurveState> {
    let radius = rng.gen_range(0.5..2.0);
    let modes: Vec<PerturbationMode> = (2..=6)
        .map(|k| PerturbationMode {
            k,
            ax: random_complex(rng, eps * radius),
            ay: random_complex(rng, eps * radius),
        })
        .collect();
    let angle = rng.gen_range(0.0..TAU);
    let shift = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    Ok(curve::make_perturbed_circle(n, radius, &modes)?.transformed(angle, shift))
}

/// Smooth, clearly non-circular test curve: mode `k` amplitude at most `0.15/k`.
pub fn random_smooth_curve(rng: &mut impl Rng, n: usize) -> Result<CurveState> {
    let modes: Vec<PerturbationMode> = (2..=5)
        .map(|k| PerturbationMode {
            k,
            ax: random_complex(rng, 0.15 / k as f64),
            ay: random_complex(rng, 0.15 / k as f64),
        })
        .collect();
    curve::make_perturbed_circle(n, 1.0, &modes)
}

/// Random mean-zero field with coefficients decaying like `1/k²`.
pub fn random_mean_zero_field(rng: &mut impl Rng, n: usize) -> Result<GridField> {
    let modes: Vec<PerturbationMode> = (1..=(n as u32 / 2 - 1).min(24))
        .map(|k| {
            let a = 1.0 / (k * k) as f64;
            PerturbationMode {
                k,
                ax: random_complex(rng, a),
                ay: random_complex(rng, a),
            }
        })
        .collect();
    GridField::from_fn(n, |s| modes.iter().map(|m| m.eval(s)).sum())
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Equilibrium steadiness: the circle has zero velocity and a unit-time run
/// leaves every diagnostic unchanged.
pub fn check_equilibrium_steadiness(log: &mut RunLog) -> CheckOutcome {
    timed("C01", "equilibrium steadiness", || {
        let c = curve::make_circle(256, 1.0, 0.0, Vec2::zeros())?;
        let umax = stokeslet::on_curve_velocity(&c)?.max_norm();
        let traj = log.run("steady circle", &c, &StepperConfig::new(Scheme::ExpEuler, 1e-2, 1.0))?;
        let r0 = traj.rows[0];
        let mut drift = 0.0f64;
        for r in &traj.rows {
            for (a, b) in [
                (r.energy, r0.energy),
                (r.dissipation, r0.dissipation),
                (r.lambda, r0.lambda),
                (r.radius, r0.radius),
                (r.area, r0.area),
                (r.dist_h1, r0.dist_h1),
                (r.dist_h52, r0.dist_h52),
                (r.xstar.x, r0.xstar.x),
                (r.xstar.y, r0.xstar.y),
            ] {
                drift = drift.max((a - b).abs());
            }
            drift = drift.max(angle_gap(r.theta_star, r0.theta_star));
        }
        Ok((
            umax < STEADY_VELOCITY_TOL && drift <= STEADY_DRIFT_TOL,
            format!("max|u| = {umax:.2e}, max diagnostic drift over t in [0,1] = {drift:.2e}"),
        ))
    })
}

/// Relative energy-balance defect of the last step `[T - dt, T]` of an RK4 run
/// from `initial`, with `T` fixed. The energy increment is formed from the
/// increment of `X'` so that it does not suffer cancellation, and the
/// dissipation is taken at the step midpoint.
pub fn energy_balance_defect(initial: &CurveState, horizon: f64, dt: f64) -> Result<f64> {
    let steps = (horizon / dt).round() as usize;
    let mut x = initial.clone();
    for _ in 0..steps - 1 {
        x = dynamics::step_rk4(&x, dt)?;
    }
    let end = dynamics::step_rk4(&x, dt)?;
    let mid = dynamics::step_rk4(&x, 0.5 * dt)?;
    let diss = stokeslet::dissipation_rate(&mid)?;
    let (a, b) = (x.tangent(), end.tangent());
    let de = 0.5 * x.spacing() * (0..x.len()).map(|j| (b[j] - a[j]).dot(&(b[j] + a[j]))).sum::<f64>();
    Ok((de / dt + diss).abs() / diss)
}

pub fn check_energy_balance() -> CheckOutcome {
    timed("C02", "energy-dissipation balance", || {
        let c = curve::make_perturbed_circle(256, 1.0, &[PerturbationMode::co_rotating(2, 1e-2)])?;
        let coarse = energy_balance_defect(&c, 1e-2, 1e-3)?;
        let fine = energy_balance_defect(&c, 1e-2, 5e-4)?;
        let ratio = coarse / fine;
        Ok((
            coarse < BALANCE_TOL && ratio >= BALANCE_MIN_IMPROVEMENT,
            format!("defect {coarse:.3e} at dt=1e-3, {fine:.3e} at dt=5e-4, improvement {ratio:.2}x"),
        ))
    })
}

pub fn check_area_conservation(log: &mut RunLog) -> CheckOutcome {
    timed("C03", "area conservation", || {
        let c = curve::make_perturbed_circle(256, 1.0, &[PerturbationMode::co_rotating(2, 1e-2)])?;
        let traj = log.run("mode-2 rk4 t<=5", &c, &StepperConfig::new(Scheme::Rk4, 1e-3, 5.0))?;
        let a0 = traj.rows[0].area;
        let drift = traj
            .rows
            .iter()
            .map(|r| (r.area - a0).abs() / a0)
            .fold(0.0, f64::max);
        Ok((
            drift < AREA_DRIFT_TOL,
            format!("max relative area drift {drift:.2e} over {} steps", traj.rows.len() - 1),
        ))
    })
}

/// Fitted `Ḣ¹` decay rate of the slow polarization of mode `k`.
pub fn decay_rate_for_mode(log: &mut RunLog, k: u32) -> Result<f64> {
    let c = curve::make_perturbed_circle(256, 1.0, &[PerturbationMode::co_rotating(k, 1e-3)])?;
    let traj = log.run(&format!("mode-{k} decay"), &c, &StepperConfig::new(Scheme::ExpEuler, 1e-2, 8.0))?;
    equilibrium::measure_decay_rate(&traj.rows, DistanceColumn::H1, Some((2.0, 8.0)))
}

pub fn check_decay_rates(log: &mut RunLog) -> CheckOutcome {
    timed("C04", "decay rate vs linearized spectrum", || {
        let r2 = decay_rate_for_mode(log, 2)?;
        let r3 = decay_rate_for_mode(log, 3)?;
        let ok2 = r2 >= RATE_BAND_K2.0 && r2 <= RATE_BAND_K2.1;
        let ok3 = r3 >= RATE_BAND_K3.0 && r3 <= RATE_BAND_K3.1;
        Ok((
            ok2 && ok3,
            format!(
                "mode 2: {r2:.4} (predicted {:.2}), mode 3: {r3:.4} (predicted {:.2})",
                equilibrium::predicted_rate(2),
                equilibrium::predicted_rate(3)
            ),
        ))
    })
}

pub fn check_gamma1_algebra() -> CheckOutcome {
    timed("C05", "simplified vs direct g' integrand", || {
        let mut r = rng(5);
        let mut worst = 0.0f64;
        let n = 256;
        for _ in 0..10 {
            let c = random_smooth_curve(&mut r, n)?;
            for _ in 0..1000 {
                let j = r.gen_range(0..n);
                let jp = (j + r.gen_range(1..n)) % n;
                let a = stokeslet::gamma1(&c, j, jp)?;
                let b = stokeslet::gamma1_direct(&c, j, jp)?;
                worst = worst.max((a - b).norm() / a.norm().max(1.0));
            }
        }
        Ok((
            worst < GAMMA1_AGREEMENT_TOL,
            format!("worst gap {worst:.2e} over 10 curves x 1000 pairs"),
        ))
    })
}

pub fn check_g_prime() -> CheckOutcome {
    timed("C06", "g' from integrand vs spectral derivative", || {
        let mut r = rng(6);
        let mut curves = vec![
            curve::make_circle(256, 1.0, 0.0, Vec2::zeros())?,
            curve::make_reparam_circle(256, 1.0, 0.3)?,
        ];
        for _ in 0..3 {
            curves.push(random_smooth_curve(&mut r, 256)?);
        }
        let mut worst = 0.0f64;
        for c in &curves {
            let spectral_d = spectral::derivative(&stokeslet::g_x(c)?, 1);
            let quad = stokeslet::g_prime_from_gamma1(c)?;
            worst = worst.max((&spectral_d - &quad).l2_norm() / spectral_d.l2_norm());
        }
        Ok((
            worst < G_PRIME_REL_TOL,
            format!("worst relative L2 gap {worst:.2e} on {} curves", curves.len()),
        ))
    })
}

pub fn check_sandwich() -> CheckOutcome {
    timed("C07", "H1 / energy sandwich", || {
        let mut r = rng(7);
        let mut violations = 0;
        let mut tightest = f64::INFINITY;
        for _ in 0..100 {
            let eps = r.gen_range(1e-4..0.05);
            let y = random_near_circle(&mut r, 128, eps)?;
            let s = equilibrium::h1_energy_equivalence(&y)?;
            if !s.holds(SANDWICH_SLACK) {
                violations += 1;
            }
            tightest = tightest.min((s.distance - s.lower).min(s.upper - s.distance) / s.distance);
        }
        Ok((
            violations == 0,
            format!("{violations} violations in 100 members, smallest relative margin {tightest:.3}"),
        ))
    })
}

/// Phase minimizing the sampled `L²` distance over `count` equally spaced
/// phases. Independent of the closed form.
pub fn grid_search_phase(y: &CurveState, center: Vec2, radius: f64, count: usize) -> f64 {
    let n = y.len();
    let pts: Vec<Vec2> = y.samples().values().iter().map(|p| p - center).collect();
    let nodes: Vec<(f64, f64)> = (0..n).map(|j| (y.samples().node(j).cos(), y.samples().node(j).sin())).collect();
    let mut best = (0.0, f64::INFINITY);
    for i in 0..count {
        let th = TAU * i as f64 / count as f64;
        let (st, ct) = th.sin_cos();
        let mut acc = 0.0;
        for (p, (c, s)) in pts.iter().zip(&nodes) {
            // (cos(s + θ), sin(s + θ)) by the addition formulas
            let ex = c * ct - s * st;
            let ey = s * ct + c * st;
            let dx = p.x - radius * ex;
            let dy = p.y - radius * ey;
            acc += dx * dx + dy * dy;
        }
        if acc < best.1 {
            best = (th, acc);
        }
    }
    best.0
}

pub fn check_fit() -> CheckOutcome {
    timed("C08", "closest-equilibrium fit", || {
        let mut r = rng(8);
        let mut worst_theta = 0.0f64;
        let mut worst_res = 0.0f64;
        for _ in 0..100 {
            let eps = r.gen_range(1e-4..0.05);
            let y = random_near_circle(&mut r, 64, eps)?;
            let fit = equilibrium::closest_equilibrium(&y)?;
            let oracle = grid_search_phase(&y, fit.x_star, fit.radius, 100_000);
            worst_theta = worst_theta.max(angle_gap(oracle, fit.theta_star));
            let res = equilibrium::first_order_residual(&y, &fit).abs() / y.samples().l2_norm().max(1.0);
            worst_res = worst_res.max(res);
        }
        Ok((
            worst_theta < THETA_TOL && worst_res < RESIDUAL_TOL,
            format!("worst phase gap {worst_theta:.2e} rad, worst first-order residual {worst_res:.2e}"),
        ))
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Slope of `‖u(X_* + εD) - ε lin(D)‖_∞` against `ε`.
pub fn linearization_remainder_slope(d: &GridField) -> Result<f64> {
    let n = d.len();
    let base = curve::make_circle(n, 1.0, 0.0, Vec2::zeros())?;
    let lin = equilibrium::linearized_velocity(d);
    let eps = [1e-2, 5e-3, 2.5e-3];
    let mut rem = Vec::new();
    for e in eps {
        let y = CurveState::new(base.samples() + &(d * e));
        let u = stokeslet::on_curve_velocity(&y)?;
        rem.push((&u - &(&lin * e)).max_norm());
    }
    Ok(loglog_slope(&eps, &rem))
}

pub fn check_linearization() -> CheckOutcome {
    timed("C09", "linearization remainder", || {
        let mut r = rng(9);
        let mut slopes = Vec::new();
        for _ in 0..5 {
            let modes: Vec<PerturbationMode> = (0..=6)
                .map(|k| PerturbationMode {
                    k,
                    ax: random_complex(&mut r, 1.0),
                    ay: random_complex(&mut r, 1.0),
                })
                .collect();
            let d = GridField::from_fn(256, |s| modes.iter().map(|m| m.eval(s)).sum())?;
            let d = &d * (1.0 / d.max_norm());
            slopes.push(linearization_remainder_slope(&d)?);
        }
        let min = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok((
            min >= REMAINDER_MIN_SLOPE,
            format!("slopes {}", slopes.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>().join(", ")),
        ))
    })
}

/// On/off-curve velocity gaps at the given distances along the normal at
/// sample `j`, on the side `sign` (+1 outside for a counter-clockwise curve).
pub fn membrane_gaps(c: &CurveState, u: &GridField, j: usize, sign: f64, distances: &[f64]) -> Result<Vec<f64>> {
    let off = stokeslet::OffCurve::new(c);
    let t = c.tangent()[j];
    let normal = Vec2::new(t.y, -t.x).normalize();
    distances
        .iter()
        .map(|d| Ok((off.velocity(c.samples()[j] + normal * (sign * d))? - u[j]).norm()))
        .collect()
}

pub fn check_membrane_continuity() -> CheckOutcome {
    timed("C10", "membrane continuity", || {
        let c = curve::make_perturbed_circle(
            1024,
            1.0,
            &[
                PerturbationMode::co_rotating(2, 0.1),
                PerturbationMode { k: 3, ax: [0.03, 0.02], ay: [-0.02, 0.04] },
            ],
        )?;
        let u = stokeslet::on_curve_velocity(&c)?;
        let ds = [1e-1, 1e-2, 1e-3];
        let mut ok = true;
        let mut worst_final = 0.0f64;
        for j in [0, 171, 317, 600, 901] {
            for sign in [1.0, -1.0] {
                let g = membrane_gaps(&c, &u, j, sign, &ds)?;
                ok &= g[0] > g[1] && g[1] > g[2];
                worst_final = worst_final.max(g[2]);
            }
        }
        Ok((
            ok && worst_final < CONTINUITY_FINAL_TOL,
            format!("gaps decrease monotonically: {ok}; worst gap at d=1e-3: {worst_final:.2e}"),
        ))
    })
}

pub fn check_lambda_persistence(log: &RunLog) -> CheckOutcome {
    timed("C11", "well-stretched persistence", || {
        let mut ok = !log.lambdas.is_empty();
        let mut worst = f64::INFINITY;
        for rec in &log.lambdas {
            let ratio = rec.minimum / rec.initial;
            ok &= !rec.aborted && ratio >= 0.5;
            worst = worst.min(ratio);
        }
        Ok((
            ok,
            format!("{} runs, smallest lambda(t)/lambda(0) = {worst:.6}", log.lambdas.len()),
        ))
    })
}

pub fn check_semigroup_decay() -> CheckOutcome {
    timed("C12", "semigroup decay", || {
        let mut r = rng(12);
        let mut violations = 0;
        let mut cases = 0;
        for _ in 0..20 {
            let f = random_mean_zero_field(&mut r, 128)?;
            let f = f.map(|v| v - f.mean());
            for t in [0.5, 1.0, 2.0] {
                let g = spectral::semigroup_apply(&f, t)?;
                for l in [0.0, 1.0, 2.5] {
                    let bound = (-t / 4.0).exp() * spectral::sobolev_seminorm(&f, l);
                    cases += 1;
                    if spectral::sobolev_seminorm(&g, l) > bound * (1.0 + SEMIGROUP_SLACK) {
                        violations += 1;
                    }
                }
            }
        }
        Ok((violations == 0, format!("{violations} violations in {cases} cases")))
    })
}

/// Structural properties of every module, cheap enough for the quick level.
pub fn invariant_checks() -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    out.push(timed("I01", "spectral operator identities", || {
        let mut r = rng(101);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            // Band-limited below Nyquist, where every identity is exact.
            let f = random_mean_zero_field(&mut r, 64)?;
            let f = spectral::dealias(&f, 0.9, 0.0);
            let with_mean = f.map(|v| v + Vec2::new(0.7, -0.2));
            let hh = spectral::hilbert_transform(&spectral::hilbert_transform(&with_mean));
            worst = worst.max((&hh + &f).max_norm());
            let hd = spectral::hilbert_transform(&spectral::derivative(&f, 1));
            worst = worst.max((&hd - &spectral::fractional_laplacian_half(&f)).max_norm());
            let a = spectral::semigroup_apply(&spectral::semigroup_apply(&f, 0.3)?, 0.9)?;
            worst = worst.max((&a - &spectral::semigroup_apply(&f, 1.2)?).max_norm());
            let d1 = spectral::dealias(&f, 2.0 / 3.0, 1e-13);
            worst = worst.max((&spectral::dealias(&d1, 2.0 / 3.0, 1e-13) - &d1).max_norm());
        }
        Ok((worst < 1e-12, format!("worst identity defect {worst:.2e}")))
    }));
    out.push(timed("I02", "well-stretched constant of circles", || {
        let mut worst = 0.0f64;
        for (rad, th, cx) in [(1.0, 0.0, 0.0), (3.0, 1.1, 2.0), (0.5, 4.0, -7.0)] {
            let c = curve::make_circle(128, rad, th, Vec2::new(cx, 1.0))?;
            worst = worst.max((curve::well_stretched_constant(&c) - 2.0 * rad / PI).abs());
        }
        Ok((worst < 1e-10, format!("worst gap to 2R/pi: {worst:.2e}")))
    }));
    out.push(timed("I03", "velocity symmetries and vanishing principal value", || {
        let mut r = rng(103);
        let c = random_smooth_curve(&mut r, 128)?;
        let u = stokeslet::on_curve_velocity(&c)?;
        let moved = c.transformed(0.8, Vec2::new(3.0, -2.0));
        let um = stokeslet::on_curve_velocity(&moved)?;
        let (s, co) = 0.8f64.sin_cos();
        let rotated = u.map(|v| Vec2::new(co * v.x - s * v.y, s * v.x + co * v.y));
        let sym = (&um - &rotated).max_norm();
        let pv = (&stokeslet::on_curve_velocity_c0(&c)? - &u).max_norm();
        let diss = stokeslet::dissipation_rate(&c)?;
        Ok((
            sym < 1e-12 && pv < 1e-10 && diss >= -1e-10,
            format!("equivariance defect {sym:.2e}, C=0 form gap {pv:.2e}, dissipation {diss:.3e}"),
        ))
    }));
    out.push(timed("I04", "linearized operator structure", || {
        let mut r = rng(104);
        let f = random_mean_zero_field(&mut r, 64)?;
        let mean = equilibrium::linearized_velocity(&f).mean().norm();
        // Translations and rotations of the unit circle are neutral.
        let neutral = [
            GridField::from_fn(64, |_| Vec2::new(1.0, -2.0))?,
            GridField::from_fn(64, |s| Vec2::new(-s.sin(), s.cos()))?,
        ];
        let kernel = neutral
            .iter()
            .map(|d| equilibrium::linearized_velocity(d).max_norm())
            .fold(0.0, f64::max);
        Ok((
            mean < 1e-14 && kernel < 1e-14,
            format!("output mean {mean:.2e}, neutral-mode image {kernel:.2e}"),
        ))
    }));
    out.push(timed("I05", "fit idempotence and optimality", || {
        let mut r = rng(105);
        let mut ok = true;
        for _ in 0..5 {
            let y = random_near_circle(&mut r, 64, 0.05)?;
            let fit = equilibrium::closest_equilibrium(&y)?;
            let again = equilibrium::closest_equilibrium(&CurveState::new(fit.samples.clone()))?;
            ok &= angle_gap(again.theta_star, fit.theta_star) < 1e-12
                && (again.x_star - fit.x_star).norm() < 1e-12
                && (again.radius - fit.radius).abs() < 1e-12;
            for s in [0.0, 1.0, 2.5] {
                let best = equilibrium::distance_at_phase(&y, &fit, fit.theta_star, s);
                for i in 0..64 {
                    let th = TAU * i as f64 / 64.0;
                    ok &= best <= equilibrium::distance_at_phase(&y, &fit, th, s) + 1e-12;
                }
            }
        }
        Ok((ok, format!("idempotent and optimal on 5 members: {ok}")))
    }));
    out.push(timed("I06", "mode blocks", || {
        let mut ok = true;
        for k in -6i64..=6 {
            let b = equilibrium::mode_block(k);
            let a = k.abs() as f64;
            let expect = if k == 0 { (0.0, 0.0) } else { (-(a + 1.0) / 4.0, -(a - 1.0) / 4.0) };
            ok &= (b.eigenvalues.0 - expect.0).abs() < 1e-15 && (b.eigenvalues.1 - expect.1).abs() < 1e-15;
            ok &= (b.block - b.block.adjoint()).norm() == 0.0;
        }
        Ok((ok, "eigenvalues -(|k|+-1)/4 for |k| <= 6, blocks Hermitian".into()))
    }));
    out
}

/// Runs the suite. `Quick` skips the long time-integration criteria.
pub fn run_suite(level: Level) -> VerifyReport {
    let mut log = RunLog::default();
    let mut outcomes = invariant_checks();
    outcomes.extend(acceptance_checks(level, &mut log));
    VerifyReport { outcomes }
}

/// The twelve acceptance criteria (criteria 2 to 4 only at `Full`).
pub fn acceptance_checks(level: Level, log: &mut RunLog) -> Vec<CheckOutcome> {
    let mut out = vec![check_equilibrium_steadiness(log)];
    if level == Level::Full {
        out.push(check_energy_balance());
        out.push(check_area_conservation(log));
        out.push(check_decay_rates(log));
    }
    out.push(check_gamma1_algebra());
    out.push(check_g_prime());
    out.push(check_sandwich());
    out.push(check_fit());
    out.push(check_linearization());
    out.push(check_membrane_continuity());
    out.push(check_lambda_persistence(log));
    out.push(check_semigroup_decay());
    out
}

use std::f64::consts::PI;

use ibstring::curve::*;
use ibstring::dynamics::*;
use ibstring::equilibrium::{measure_decay_rate, DistanceColumn};
use ibstring::spectral::{semigroup_apply, GridField};
use ibstring::stokeslet::on_curve_velocity;
use ibstring::{Error, Vec2};

fn near_circle(n: usize, eps: f64) -> CurveState {
    make_perturbed_circle(
        n,
        1.0,
        &[PerturbationMode::co_rotating(2, eps), PerturbationMode { k: 3, ax: [0.3 * eps, 0.0], ay: [0.0, -0.5 * eps] }],
    )
    .unwrap()
}

fn max_gap(a: &CurveState, b: &CurveState) -> f64 {
    (a.samples() - b.samples()).max_norm()
}

#[test]
fn reparameterized_circle_has_no_net_flow_along_its_image() {
    let c = make_reparam_circle(128, 1.0, 0.3).unwrap();
    let u = rhs(&c).unwrap();
    assert!(u.max_norm() > 1e-3);
    // Reflection s -> -s mirrors the curve in the x axis, so the y mean vanishes.
    assert!(u.mean().y.abs() < 1e-8);
    // Averaged over the physical circle (weight |X'|) the flow has no net part;
    // the plain parameter mean does not vanish because the markers bunch up.
    let weighted = (0..128).fold(Vec2::zeros(), |acc, j| acc + u[j] * c.tangent()[j].norm()) / 128.0;
    assert!(weighted.norm() < 1e-8);
    assert!(u.mean().x.abs() > 1e-4);
}

#[test]
fn circle_is_a_fixed_point_of_both_schemes() {
    let c = make_circle(128, 1.5, 0.7, Vec2::new(2.0, -1.0)).unwrap();
    assert!(max_gap(&step_rk4(&c, 0.1).unwrap(), &c) < 1e-11);
    assert!(max_gap(&step_exp_euler(&c, 0.1).unwrap(), &c) < 1e-11);
}

#[test]
fn steps_are_consistent_with_the_velocity() {
    let c = near_circle(64, 0.05);
    let u = rhs(&c).unwrap();
    for scheme in [Scheme::Rk4, Scheme::ExpEuler] {
        let mut errs = Vec::new();
        for dt in [1e-2, 5e-3, 2.5e-3] {
            let next = step_with_velocity(scheme, &c, &u, dt).unwrap();
            let fd = &(next.samples() - c.samples()) * (1.0 / dt);
            errs.push((&fd - &u).max_norm());
        }
        assert!(errs[0] / errs[1] > 1.8 && errs[1] / errs[2] > 1.8, "{scheme:?} {errs:?}");
    }
}

#[test]
fn rk4_is_fourth_order() {
    let c = near_circle(64, 0.05);
    let t = 0.4;
    let solve = |dt: f64| {
        let mut s = c.clone();
        for _ in 0..(t / dt).round() as usize {
            s = step_rk4(&s, dt).unwrap();
        }
        s
    };
    let (a, b, r) = (solve(0.1), solve(0.05), solve(0.0125));
    let ratio = max_gap(&a, &r) / max_gap(&b, &r);
    assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
}

#[test]
fn exp_euler_is_first_order() {
    let c = near_circle(64, 0.05);
    let t = 0.4;
    let solve = |dt: f64| {
        let mut s = c.clone();
        for _ in 0..(t / dt).round() as usize {
            s = step_exp_euler(&s, dt).unwrap();
        }
        s
    };
    let r = {
        let mut s = c.clone();
        for _ in 0..80 {
            s = step_rk4(&s, 5e-3).unwrap();
        }
        s
    };
    let ratio = max_gap(&solve(0.02), &r) / max_gap(&solve(0.01), &r);
    assert!(ratio > 1.7 && ratio < 2.3, "ratio {ratio}");
}

#[test]
fn exp_euler_without_forcing_is_the_semigroup() {
    let x = near_circle(64, 0.1).into_samples();
    let zero = GridField::zeros(64).unwrap();
    let a = exp_euler_with_g(&x, &zero, 0.3).unwrap();
    let b = semigroup_apply(&x, 0.3).unwrap();
    assert!((a.samples() - &b).max_norm() < 1e-15);
}

#[test]
fn phi1_matches_closed_form() {
    for z in [-5.0, -1.0, -1e-3, -1e-4, -5e-5, 0.0, 1e-6] {
        let exact = if z == 0.0 { 1.0 } else { (z as f64).exp_m1() / z };
        assert!((phi1(z) - exact).abs() < 1e-14, "{z}");
    }
}

/// Largest `dt` (by bisection on a log scale) for which 40 steps stay bounded.
fn stable_dt(step: fn(&CurveState, f64) -> ibstring::Result<CurveState>) -> f64 {
    let c = near_circle(128, 1e-3);
    let bounded = |dt: f64| {
        let mut s = c.clone();
        for _ in 0..40 {
            match step(&s, dt) {
                Ok(n) if n.samples().max_norm() < 10.0 => s = n,
                _ => return false,
            }
        }
        true
    };
    let (mut lo, mut hi) = (1e-3f64, 4.0f64);
    for _ in 0..20 {
        let mid = (lo * hi).sqrt();
        if bounded(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn exponential_euler_tolerates_larger_steps() {
    let rk = stable_dt(step_rk4);
    let ee = stable_dt(step_exp_euler);
    // RK4 is limited by the fastest mode |k|/4 = 16.
    assert!(rk < 0.3, "rk4 {rk}");
    assert!(ee > 3.0 * rk, "exp euler {ee} vs rk4 {rk}");
}

#[test]
fn circle_diagnostics_stay_constant() {
    let c = make_circle(64, 2.0, 0.4, Vec2::new(1.0, 1.0)).unwrap();
    let traj = run(&c, &StepperConfig::new(Scheme::ExpEuler, 0.1, 2.0)).unwrap();
    assert_eq!(traj.rows.len(), 21);
    for r in &traj.rows {
        assert!((r.energy - 4.0 * PI).abs() < 1e-10);
        assert!(r.dissipation.abs() < 1e-10);
        assert!((r.area - 4.0 * PI).abs() < 1e-10);
        assert!((r.radius - 2.0).abs() < 1e-12);
        assert!((r.lambda - 4.0 / PI).abs() < 1e-10);
        assert!(r.dist_h1 < 1e-10);
        assert!((r.theta_star - 0.4).abs() < 1e-10);
        assert!((r.xstar - Vec2::new(1.0, 1.0)).norm() < 1e-12);
    }
}

#[test]
fn energy_is_monotone_near_a_circle() {
    let c = make_perturbed_circle(128, 1.0, &[PerturbationMode::co_rotating(2, 1e-3)]).unwrap();
    let traj = run(&c, &StepperConfig::new(Scheme::ExpEuler, 1e-2, 8.0)).unwrap();
    for w in traj.rows.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-14);
    }
    assert!(traj.rows.iter().all(|r| r.dissipation >= 0.0));
}

#[test]
fn reparameterized_circle_relaxes() {
    let c = make_reparam_circle(128, 1.0, 0.5).unwrap();
    let traj = run(&c, &StepperConfig::new(Scheme::ExpEuler, 1e-2, 20.0)).unwrap();
    let first = traj.rows.first().unwrap().dist_h1;
    let last = traj.rows.last().unwrap().dist_h1;
    assert!(last / first < 1e-2, "ratio {}", last / first);
    let rate = measure_decay_rate(&traj.rows, DistanceColumn::H1, Some((10.0, 20.0))).unwrap();
    assert!((rate - 0.25).abs() < 0.01, "rate {rate}");
    // The image stays close to the unit circle; exponential Euler does not
    // conserve area exactly, so allow a first-order drift.
    let drift = traj.rows.iter().map(|r| (r.radius - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-3, "{drift}");
}

#[test]
fn lambda_threshold_aborts_the_run() {
    let c = near_circle(64, 0.05);
    let lam0 = well_stretched_constant(&c);
    let mut cfg = StepperConfig::new(Scheme::ExpEuler, 0.1, 1.0);
    cfg.lambda_abort = Some(lam0 * 1.1);
    match run(&c, &cfg) {
        Err(Error::LambdaAbort { t, lambda, threshold }) => {
            assert_eq!(t, 0.0);
            assert_eq!(lambda, lam0);
            assert_eq!(threshold, lam0 * 1.1);
        }
        other => panic!("expected abort, got {other:?}"),
    }
    // Rows up to the abort are still delivered.
    let mut rows = 0;
    let mut cfg = StepperConfig::new(Scheme::ExpEuler, 0.5, 20.0);
    let pinch = make_perturbed_circle(64, 1.0, &[PerturbationMode::co_rotating(2, 0.3)]).unwrap();
    cfg.lambda_abort = Some(well_stretched_constant(&pinch) * 0.999);
    let out = run_with(&pinch, &cfg, |_| {
        rows += 1;
        Ok(())
    }, |_, _, _| Ok(()));
    // The stretch improves as the curve relaxes, so this run completes.
    assert!(out.is_ok());
    assert_eq!(rows, 41);
}

#[test]
fn unstable_steps_report_blow_up() {
    let c = near_circle(128, 1e-3);
    let mut cfg = StepperConfig::new(Scheme::Rk4, 1.0, 400.0);
    cfg.lambda_abort = Some(1e-300);
    match run(&c, &cfg) {
        Err(Error::BlowUp { t }) => assert!(t > 0.0 && t <= 400.0),
        other => panic!("expected blow-up, got {:?}", other.map(|t| t.rows.len())),
    }
}

#[test]
fn wrong_orientation_is_rejected_before_stepping() {
    let c = CurveState::new(GridField::from_fn(64, |s| Vec2::new(s.cos(), -s.sin())).unwrap());
    let err = run(&c, &StepperConfig::new(Scheme::Rk4, 0.1, 1.0)).unwrap_err();
    assert!(matches!(err, Error::Orientation { .. }));
}

#[test]
fn snapshot_cadence_and_final_step() {
    let c = near_circle(32, 0.01);
    let mut cfg = StepperConfig::new(Scheme::ExpEuler, 0.1, 1.05);
    cfg.snapshot_every = 4;
    assert_eq!(cfg.step_count(), 11);
    let traj = run(&c, &cfg).unwrap();
    let steps: Vec<usize> = traj.snapshots.iter().map(|s| s.0).collect();
    assert_eq!(steps, vec![0, 4, 8, 11]);
    assert!((traj.snapshots.last().unwrap().1 - 1.05).abs() < 1e-15);
    assert_eq!(traj.rows.len(), 12);
    assert!((traj.rows.last().unwrap().t - 1.05).abs() < 1e-15);
    assert_eq!(traj.snapshots.last().unwrap().2.samples(), traj.final_state.samples());
}

#[test]
fn invalid_configs_are_rejected() {
    let c = near_circle(32, 0.01);
    for cfg in [
        StepperConfig::new(Scheme::Rk4, 0.0, 1.0),
        StepperConfig::new(Scheme::Rk4, 2.0, 1.0),
        StepperConfig::new(Scheme::Rk4, 0.1, f64::NAN),
        StepperConfig { snapshot_every: 0, ..StepperConfig::new(Scheme::Rk4, 0.1, 1.0) },
        StepperConfig { lambda_abort: Some(-1.0), ..StepperConfig::new(Scheme::Rk4, 0.1, 1.0) },
    ] {
        assert!(matches!(run(&c, &cfg), Err(Error::InvalidParameter { .. })));
    }
    assert!(step_rk4(&c, -0.1).is_err());
    assert!(step_exp_euler(&c, f64::INFINITY).is_err());
}

#[test]
fn schemes_agree_and_self_converge() {
    let c = near_circle(64, 0.05);
    let end = |scheme, dt| run(&c, &StepperConfig::new(scheme, dt, 1.0)).unwrap().final_state;
    let rk = end(Scheme::Rk4, 0.01);
    let e1 = max_gap(&end(Scheme::ExpEuler, 0.02), &rk);
    let e2 = max_gap(&end(Scheme::ExpEuler, 0.01), &rk);
    assert!(e2 < 1e-3);
    assert!(e1 / e2 > 1.7, "{e1} {e2}");
}

#[test]
fn area_is_conserved_by_rk4() {
    let c = near_circle(128, 0.05);
    let a0 = enclosed_area(&c).unwrap();
    let traj = run(&c, &StepperConfig::new(Scheme::Rk4, 1e-2, 5.0)).unwrap();
    let drift = traj.rows.iter().map(|r| (r.area - a0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-8 * a0, "drift {drift}");
}

#[test]
fn dealiasing_keeps_equilibria() {
    let c = make_circle(64, 1.0, 0.0, Vec2::zeros()).unwrap();
    let mut cfg = StepperConfig::new(Scheme::ExpEuler, 0.1, 1.0);
    cfg.dealias = Some(Default::default());
    let traj = run(&c, &cfg).unwrap();
    assert!(max_gap(&traj.final_state, &c) < 1e-12);
    let u = on_curve_velocity(&traj.final_state).unwrap();
    assert!(u.max_norm() < 1e-10);
}

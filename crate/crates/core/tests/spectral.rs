use std::f64::consts::{PI, TAU};

use ibstring::spectral::*;
use ibstring::Vec2;
use proptest::prelude::*;

fn field(n: usize, f: impl Fn(f64) -> Vec2) -> GridField {
    GridField::from_fn(n, f).unwrap()
}

/// Smooth periodic test field together with its first two derivatives.
fn smooth(s: f64) -> (Vec2, Vec2, Vec2) {
    let (e, c, sn) = (s.sin().exp(), s.cos(), s.sin());
    let x = Vec2::new(e, (2.0 * s).cos() + 0.3 * sn);
    let dx = Vec2::new(c * e, -2.0 * (2.0 * s).sin() + 0.3 * c);
    let ddx = Vec2::new((c * c - sn) * e, -4.0 * (2.0 * s).cos() - 0.3 * sn);
    (x, dx, ddx)
}

/// `(1/2π) p.v.∫ cot((s-s')/2) Y(s') ds'` by the punctured trapezoid rule; the
/// diagonal node carries the limit `-2Y'(s)` of `cot((s-s')/2)(Y(s') - Y(s))`.
fn hilbert_oracle(n: usize, y: impl Fn(f64) -> (Vec2, Vec2)) -> GridField {
    let h = TAU / n as f64;
    field(n, |s| {
        let (ys, dys) = y(s);
        let mut acc = -2.0 * dys;
        for jp in 0..n {
            let sp = jp as f64 * h;
            let tau = s - sp;
            if tau.abs() < 1e-12 {
                continue;
            }
            acc += (y(sp).0 - ys) / (0.5 * tau).tan();
        }
        acc * h / TAU
    })
}

/// `(1/π) p.v.∫ (Y(s) - Y(s'))/(4 sin²((s-s')/2)) ds'`; the diagonal node
/// carries the regular part `-Y''(s)/2`.
fn half_laplacian_oracle(n: usize, y: impl Fn(f64) -> (Vec2, Vec2, Vec2)) -> GridField {
    let h = TAU / n as f64;
    field(n, |s| {
        let (ys, _, ddys) = y(s);
        let mut acc = -0.5 * ddys;
        for jp in 0..n {
            let sp = jp as f64 * h;
            let tau = s - sp;
            if tau.abs() < 1e-12 {
                continue;
            }
            acc += (ys - y(sp).0) / (4.0 * (0.5 * tau).sin().powi(2));
        }
        acc * h / PI
    })
}

fn max_diff(a: &GridField, b: &GridField) -> f64 {
    (a - b).max_norm()
}

#[test]
fn hilbert_sign_convention_from_quadrature() {
    let n = 128;
    let cos_oracle = hilbert_oracle(n, |s| (Vec2::new(s.cos(), 0.0), Vec2::new(-s.sin(), 0.0)));
    assert!(max_diff(&cos_oracle, &field(n, |s| Vec2::new(s.sin(), 0.0))) < 1e-12);
    let sin_oracle = hilbert_oracle(n, |s| (Vec2::new(s.sin(), 0.0), Vec2::new(s.cos(), 0.0)));
    assert!(max_diff(&sin_oracle, &field(n, |s| Vec2::new(-s.cos(), 0.0))) < 1e-12);

    let f = field(n, |s| smooth(s).0);
    let oracle = hilbert_oracle(n, |s| (smooth(s).0, smooth(s).1));
    assert!(max_diff(&hilbert_transform(&f), &oracle) < 1e-11);
}

#[test]
fn half_laplacian_matches_singular_integral() {
    let n = 256;
    let f = field(n, |s| smooth(s).0);
    let oracle = half_laplacian_oracle(n, smooth);
    let rel = max_diff(&fractional_laplacian_half(&f), &oracle) / oracle.max_norm();
    assert!(rel < 1e-6, "relative error {rel:e}");
    let c3 = field(n, |s| Vec2::new((3.0 * s).cos(), 2.0));
    assert!(max_diff(&fractional_laplacian_half(&c3), &field(n, |s| Vec2::new(3.0 * (3.0 * s).cos(), 0.0))) < 1e-12);
}

#[test]
fn semigroup_bound_on_single_modes() {
    let f = field(64, |s| Vec2::new(s.cos(), (5.0 * s).sin()));
    for t in [0.5, 1.0, 2.0] {
        let g = semigroup_apply(&f, t).unwrap();
        for l in [0.0, 1.0, 2.5] {
            assert!(sobolev_seminorm(&g, l) <= (-t / 4.0f64).exp() * sobolev_seminorm(&f, l) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn coefficient_layout() {
    let f = field(16, |s| Vec2::new((3.0 * s).cos(), (2.0 * s).sin()));
    let spec = to_spectral(&f);
    let c3 = spec.coeff(3).unwrap();
    assert!((c3[0] - num_complex::Complex64::new(0.5, 0.0)).norm() < 1e-15);
    let c2 = spec.coeff(-2).unwrap();
    assert!((c2[1] - num_complex::Complex64::new(0.0, 0.5)).norm() < 1e-15);
    assert!(spec.coeff(8).is_none());
    assert!(spec.coeff(-8).is_some());
    assert_eq!(spec.wavenumber(8), -8);
    assert!(spec.reality_defect() < 1e-15);
}

fn arb_field(n: usize) -> impl Strategy<Value = GridField> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(|v| GridField::new(v.into_iter().map(|(a, b)| Vec2::new(a, b)).collect()).unwrap())
}

/// Random field without Nyquist content (odd multipliers drop it).
fn arb_bandlimited(n: usize) -> impl Strategy<Value = GridField> {
    arb_field(n).prop_map(|f| dealias(&f, 1.0 - 1.0 / f.len() as f64, 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip(f in arb_field(64)) {
        prop_assert!(max_diff(&from_spectral(&to_spectral(&f)), &f) < 1e-12);
    }

    #[test]
    fn operators_are_linear(f in arb_field(32), g in arb_field(32), a in -3.0f64..3.0) {
        let comb = &f + &(&g * a);
        let ops: [fn(&GridField) -> GridField; 4] = [
            |x| hilbert_transform(x),
            |x| fractional_laplacian_half(x),
            |x| derivative(x, 1),
            |x| derivative(x, 3),
        ];
        for op in ops {
            let lhs = op(&comb);
            let rhs = &op(&f) + &(&op(&g) * a);
            prop_assert!(max_diff(&lhs, &rhs) < 1e-10);
        }
    }

    #[test]
    fn hilbert_squared_removes_mean(f in arb_bandlimited(64)) {
        let hh = hilbert_transform(&hilbert_transform(&f));
        let centered = f.map(|v| v - f.mean());
        prop_assert!(max_diff(&hh, &(-&centered)) < 1e-12);
    }

    #[test]
    fn half_laplacian_is_hilbert_of_derivative(f in arb_bandlimited(64)) {
        let f = f.map(|v| v - f.mean());
        let a = fractional_laplacian_half(&f);
        let b = hilbert_transform(&derivative(&f, 1));
        prop_assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn semigroup_composes(f in arb_field(64), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let a = semigroup_apply(&semigroup_apply(&f, t1).unwrap(), t2).unwrap();
        let b = semigroup_apply(&f, t1 + t2).unwrap();
        prop_assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn semigroup_decays(f in arb_field(64), t in 0.0f64..4.0, l in prop::sample::select(vec![0.0, 0.5, 1.0, 2.5])) {
        let f = f.map(|v| v - f.mean());
        let g = semigroup_apply(&f, t).unwrap();
        let bound = (-t / 4.0).exp() * sobolev_seminorm(&f, l);
        prop_assert!(sobolev_seminorm(&g, l) <= bound * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn dealias_is_idempotent(f in arb_field(64), cut in 0.1f64..1.0, floor in prop::sample::select(vec![0.0, 1e-13, 1e-3])) {
        let once = dealias(&f, cut, floor);
        let twice = dealias(&once, cut, floor);
        prop_assert!(max_diff(&once, &twice) < 1e-14);
    }

    #[test]
    fn seminorm_ignores_mean(f in arb_field(32), c in -5.0f64..5.0, s in 0.1f64..3.0) {
        let shifted = f.map(|v| v + Vec2::new(c, -c));
        let (a, b) = (sobolev_seminorm(&f, s), sobolev_seminorm(&shifted, s));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}

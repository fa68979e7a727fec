use hmix::fracsublap::{frac_sublap, OperatorParams, QuadratureSpec};
use hmix::functions;
use hmix::hcalculus::{horizontal_hessian, nested_horizontal_hessian, sublaplacian, SmoothFn};
use hmix::hgroup::GroupPoint;
use hmix::mixedop::evaluate_l;
use hmix::pucci::{optimizer_matrix, pucci_minus, pucci_plus, Ellipticity};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn sym(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-5.0..5.0f64, d * d).prop_map(move |v| {
        let m = DMatrix::from_vec(d, d, v);
        (&m + m.transpose()) * 0.5
    })
}

fn ellipticity() -> impl Strategy<Value = Ellipticity> {
    (0.1..2.0f64, 0.0..3.0f64).prop_map(|(l, w)| Ellipticity::new(l, l + w).unwrap())
}

fn h1_point() -> impl Strategy<Value = GroupPoint> {
    (-0.8..0.8f64, -0.8..0.8f64, -0.8..0.8f64).prop_map(|(x, y, t)| GroupPoint::h1(x, y, t).unwrap())
}

fn fields() -> (SmoothFn, SmoothFn) {
    (functions::gaussian_gauge(1, 1.0, 1.0), functions::tanh_x(1, 1.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pucci_duality_and_order(m in sym(2), e in ellipticity()) {
        let p = pucci_plus(&m, e).unwrap();
        let q = pucci_minus(&m, e).unwrap();
        prop_assert!((pucci_plus(&(-&m), e).unwrap() + q).abs() <= 1e-12);
        prop_assert!(q <= p + 1e-12);
    }

    #[test]
    fn pucci_subadditive_and_monotone(a in sym(4), b in sym(4), c in sym(4), e in ellipticity()) {
        let scale = 1e-11 * e.big_lambda() * 20.0;
        prop_assert!(pucci_plus(&(&a + &b), e).unwrap() <= pucci_plus(&a, e).unwrap() + pucci_plus(&b, e).unwrap() + scale);
        prop_assert!(pucci_minus(&(&a + &b), e).unwrap() >= pucci_minus(&a, e).unwrap() + pucci_minus(&b, e).unwrap() - scale);
        let psd = &c * c.transpose();
        prop_assert!(pucci_plus(&(&a + &psd), e).unwrap() >= pucci_plus(&a, e).unwrap() - scale);
    }

    #[test]
    fn optimizer_attains_pucci(m in sym(2), e in ellipticity()) {
        let a = optimizer_matrix(&m, e).unwrap();
        prop_assert!(((a * &m).trace() - pucci_plus(&m, e).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn hessian_paths_agree(p in h1_point()) {
        let u = functions::gauge_quartic(1);
        let a = horizontal_hessian(&u, &p).unwrap();
        let b = nested_horizontal_hessian(&u, &p).unwrap();
        prop_assert!((a.matrix() - b.matrix()).amax() <= 1e-5);
        prop_assert!((sublaplacian(&u, &p).unwrap() - a.trace()).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn l_is_positively_homogeneous(p in h1_point(), c in prop::sample::select(vec![0.0, 0.5, 2.0])) {
        let params = OperatorParams::desk_default();
        let q = QuadratureSpec::default();
        let u = fields().0;
        let cu = SmoothFn::linear_combination(c, &u, 0.0, &u).unwrap();
        let l = evaluate_l(&u, &p, &params, &q).unwrap();
        let lc = evaluate_l(&cu, &p, &params, &q).unwrap();
        prop_assert!((lc - c * l).abs() <= 1e-10 * l.abs().max(1.0), "{lc} vs {}", c * l);
    }

    #[test]
    fn l_is_subadditive(p in h1_point()) {
        let params = OperatorParams::desk_default();
        let q = QuadratureSpec::default();
        let (u, v) = fields();
        let w = SmoothFn::linear_combination(1.0, &u, 1.0, &v).unwrap();
        let lu = evaluate_l(&u, &p, &params, &q).unwrap();
        let lv = evaluate_l(&v, &p, &params, &q).unwrap();
        let lw = evaluate_l(&w, &p, &params, &q).unwrap();
        prop_assert!(lw <= lu + lv + 1e-3 * (lu.abs() + lv.abs()).max(1.0), "{lw} > {lu} + {lv}");
    }

    #[test]
    fn fractional_is_left_invariant(p in h1_point(), a in h1_point()) {
        let params = OperatorParams::desk_default();
        let q = QuadratureSpec::default();
        let u = fields().0;
        let ua = u.left_translated(&a).unwrap();
        let l = frac_sublap(&ua, &p, &params, &q).unwrap();
        let r = frac_sublap(&u, &a.compose(&p).unwrap(), &params, &q).unwrap();
        prop_assert!((l - r).abs() <= 1e-3 * r.abs().max(1.0), "{l} vs {r}");
    }

    #[test]
    fn fractional_is_linear(p in h1_point(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let params = OperatorParams::desk_default();
        let q = QuadratureSpec { tail_radius: Some(64.0), tail_tolerance: Some(10.0), ..QuadratureSpec::default() };
        let (u, v) = fields();
        let w = SmoothFn::linear_combination(a, &u, b, &v).unwrap();
        let fu = frac_sublap(&u, &p, &params, &q).unwrap();
        let fv = frac_sublap(&v, &p, &params, &q).unwrap();
        let fw = frac_sublap(&w, &p, &params, &q).unwrap();
        prop_assert!((fw - a * fu - b * fv).abs() <= 1e-10 * (a * fu).abs().max((b * fv).abs()).max(1.0));
    }

    #[test]
    fn maximum_gives_nonnegative_value(s in prop::sample::select(vec![0.25, 0.5, 0.75])) {
        let params = OperatorParams::desk_default().with_s(s).unwrap();
        let u = fields().0;
        let v = frac_sublap(&u, &GroupPoint::origin(1), &params, &QuadratureSpec::default()).unwrap();
        prop_assert!(v > 0.0);
    }
}

#[test]
fn pure_nonlocal_ignores_ellipticity() {
    let q = QuadratureSpec::default();
    let u = fields().0;
    let p = GroupPoint::h1(0.2, 0.1, -0.3).unwrap();
    let a = OperatorParams::new(0.0, 1.0, 1.0, 2.0, 0.5, 1.0, 1).unwrap();
    let b = OperatorParams::new(0.0, 1.0, 0.3, 7.0, 0.5, 1.0, 1).unwrap();
    assert_eq!(evaluate_l(&u, &p, &a, &q).unwrap(), evaluate_l(&u, &p, &b, &q).unwrap());
}

use hmix::hgroup::{GaugeBall, GroupPoint};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = GroupPoint> {
    (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, t)| GroupPoint::h1(x, y, t).unwrap())
}

fn point_n(n: usize) -> impl Strategy<Value = GroupPoint> {
    prop::collection::vec(-5.0..5.0f64, 2 * n + 1).prop_map(move |c| GroupPoint::from_coords(n, &c).unwrap())
}

fn close(a: &GroupPoint, b: &GroupPoint, scale: f64) -> bool {
    a.coords().iter().zip(b.coords()).all(|(p, q)| (p - q).abs() <= 1e-12 * scale.max(1.0))
}

fn scale(ps: &[&GroupPoint]) -> f64 {
    ps.iter().flat_map(|p| p.coords().iter()).fold(1.0f64, |m, v| m.max(v.abs()))
}

#[test]
fn worked_examples() {
    let a = GroupPoint::h1(1.0, 0.0, 0.0).unwrap();
    let b = GroupPoint::h1(0.0, 1.0, 0.0).unwrap();
    assert_eq!(a.compose(&b).unwrap().coords(), &[1.0, 1.0, -2.0]);
    assert_eq!(b.compose(&a).unwrap().coords(), &[1.0, 1.0, 2.0]);
    assert_eq!(GroupPoint::h1(1.0, 2.0, 3.0).unwrap().inverse().coords(), &[-1.0, -2.0, -3.0]);
    assert_eq!(GroupPoint::h1(1.0, 1.0, 1.0).unwrap().dilate(2.0).unwrap().coords(), &[2.0, 2.0, 4.0]);
    assert_eq!(GroupPoint::h1(0.0, 0.0, 4.0).unwrap().gauge_norm(), 2.0);
    // |(−1, 1, 2)| by hand: ((1 + 1)² + 4)^{1/4} = 8^{1/4}
    let d = a.gauge_distance(&b).unwrap();
    assert!((d - 8f64.powf(0.25)).abs() < 1e-15);
}

#[test]
fn ball_boundary_is_open() {
    let ball = GaugeBall::centered(1, 2.0).unwrap();
    assert!(ball.contains(ball.center()));
    assert!(!ball.contains(&GroupPoint::h1(0.0, 0.0, 4.0).unwrap()));
    assert!(ball.contains(&GroupPoint::h1(0.0, 0.0, 3.999).unwrap()));
}

proptest! {
    #[test]
    fn associative(a in point(), b in point(), c in point()) {
        let ab = a.compose(&b).unwrap();
        let bc = b.compose(&c).unwrap();
        let l = ab.compose(&c).unwrap();
        let r = a.compose(&bc).unwrap();
        prop_assert!(close(&l, &r, scale(&[&ab, &bc, &l])));
    }

    #[test]
    fn associative_in_higher_rank(a in point_n(3), b in point_n(3), c in point_n(3)) {
        let l = a.compose(&b).unwrap().compose(&c).unwrap();
        let r = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(close(&l, &r, scale(&[&l, &r]) * 10.0));
    }

    #[test]
    fn inverse_and_identity(a in point()) {
        let o = GroupPoint::origin(1);
        prop_assert_eq!(a.compose(&o).unwrap(), a.clone());
        prop_assert_eq!(o.compose(&a).unwrap(), a.clone());
        prop_assert!(close(&a.compose(&a.inverse()).unwrap(), &o, scale(&[&a])));
        prop_assert_eq!(a.inverse().inverse(), a);
    }

    #[test]
    fn cancellation(x0 in point(), x1 in point(), eta in point()) {
        let rhs = x0.compose(&x1.inverse()).unwrap();
        for e in [eta.clone(), eta.inverse()] {
            let (a, b) = (x0.compose(&e).unwrap(), x1.compose(&e).unwrap());
            let lhs = a.compose(&b.inverse()).unwrap();
            prop_assert!(close(&lhs, &rhs, scale(&[&a, &b, &lhs])));
        }
    }

    #[test]
    fn norm_symmetric_and_homogeneous(a in point(), lam in 0.05..20.0f64) {
        prop_assert!((a.inverse().gauge_norm() - a.gauge_norm()).abs() <= 1e-14 * a.gauge_norm());
        let d = a.dilate(lam).unwrap().gauge_norm();
        prop_assert!((d - lam * a.gauge_norm()).abs() <= 1e-12 * d.max(1.0));
    }

    #[test]
    fn distance_is_left_invariant(a in point(), b in point(), g in point()) {
        let d0 = a.gauge_distance(&b).unwrap();
        let d1 = g.compose(&a).unwrap().gauge_distance(&g.compose(&b).unwrap()).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-9 * d0.max(1.0));
    }

    #[test]
    fn dilation_maps_balls(a in point(), lam in 0.1..10.0f64, r in 0.5..30.0f64) {
        let inside = GaugeBall::centered(1, r).unwrap().contains(&a);
        let image = GaugeBall::centered(1, lam * r).unwrap().contains(&a.dilate(lam).unwrap());
        let margin = (a.gauge_norm() - r).abs() / r;
        prop_assume!(margin > 1e-9);
        prop_assert_eq!(inside, image);
    }

    #[test]
    fn rejects_non_finite(v in prop::sample::select(vec![f64::NAN, f64::INFINITY, f64::NEG_INFINITY])) {
        prop_assert!(GroupPoint::h1(v, 0.0, 0.0).is_err());
        prop_assert!(GroupPoint::origin(1).dilate(0.0).is_err());
    }
}

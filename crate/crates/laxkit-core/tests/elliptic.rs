use laxkit_core::elliptic::{addition_identity_residual, Lattice, C};
use proptest::prelude::*;

fn lattices() -> Vec<Lattice> {
    vec![
        Lattice::default(),
        Lattice::new(C::new(0.7, 0.1), C::new(1.3, 2.9)).unwrap(),
        Lattice::from_tau(C::new(1.0, 0.0), C::new(0.5, 0.866_025_403_784_438_6)).unwrap(),
        Lattice::from_tau(C::new(0.5, 0.0), C::new(-3.2, 0.4)).unwrap(),
    ]
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// `℘` from absolutely convergent lattice sums of `(z − λ)^{-3}` integrated
/// is slow; instead compare `℘` with its Laurent series near the origin.
#[test]
fn laurent_series_near_origin() {
    for lat in lattices() {
        let (g2, g3) = (lat.g2(), lat.g3());
        let z = lat.omega1() * C::new(0.03, 0.02);
        let series = 1.0 / (z * z) + g2 * z * z / 20.0 + g3 * z.powi(4) / 28.0 + g2 * g2 * z.powi(6) / 1200.0;
        assert!(rel(lat.wp(z).unwrap(), series) < 1e-10);
    }
}

/// `g2 = 60 Σ' λ^{-4}` and `g3 = 140 Σ' λ^{-6}` by direct lattice summation.
#[test]
fn eisenstein_constants_match_lattice_sums() {
    let lat = Lattice::from_tau(C::new(0.5, 0.0), C::new(0.31, 1.17)).unwrap();
    let (a, b) = (lat.omega1() * 2.0, lat.omega2() * 2.0);
    let (mut s4, mut s6) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
    let r = 300i64;
    for m in -r..=r {
        for n in -r..=r {
            if m == 0 && n == 0 {
                continue;
            }
            let l = a * m as f64 + b * n as f64;
            let l2 = l * l;
            s4 += 1.0 / (l2 * l2);
            s6 += 1.0 / (l2 * l2 * l2);
        }
    }
    assert!(rel(lat.g2(), s4 * 60.0) < 1e-5);
    assert!(rel(lat.g3(), s6 * 140.0) < 1e-9);
}

#[test]
fn parity_and_normalization() {
    let lat = Lattice::default();
    let z = C::new(0.17, 0.31);
    assert!(rel(lat.sigma(-z).unwrap(), -lat.sigma(z).unwrap()) < 1e-14);
    assert!(rel(lat.wp(-z).unwrap(), lat.wp(z).unwrap()) < 1e-14);
    let small = C::new(0.002, 0.001);
    let d = lat.wp(small).unwrap() - 1.0 / (small * small);
    assert!(d.norm() < 1e-3);
}

#[test]
fn legendre_relation_all_lattices() {
    for lat in lattices() {
        let r = lat.eta1() * lat.omega2() - lat.eta2() * lat.omega1();
        assert!((r - C::new(0.0, std::f64::consts::FRAC_PI_2)).norm() < 1e-12);
    }
}

#[test]
fn addition_rejects_degenerate_arguments() {
    let lat = Lattice::default();
    let z = C::new(0.2, 0.1);
    assert!(addition_identity_residual(&lat, z, z).is_err());
}

fn point() -> impl Strategy<Value = C> {
    (-0.49f64..0.49, -0.49f64..0.49).prop_map(|(x, y)| C::new(x, y))
}

proptest! {
    #[test]
    fn addition_theorem(z in point(), u in point()) {
        let lat = Lattice::default();
        prop_assume!([z, u, z + u, z - u].iter().all(|w| lat.lattice_distance(*w) > 0.05));
        let scale = lat.wp(u).unwrap().norm() + lat.wp(z).unwrap().norm();
        let r = addition_identity_residual(&lat, z, u).unwrap();
        prop_assert!(r < 1e-10 * scale.max(1.0));
        let shifted = addition_identity_residual(&lat, z + lat.omega1() * 2.0, u).unwrap();
        prop_assert!((shifted - r).abs() < 1e-9 * scale.max(1.0));
    }

    #[test]
    fn periodicity(z in point(), k in 0usize..4) {
        let lat = &lattices()[k];
        let z = z * lat.omega1() * 2.0;
        prop_assume!(lat.lattice_distance(z) > 0.05 * lat.omega1().norm());
        let w = lat.wp(z).unwrap();
        for p in [lat.omega1() * 2.0, lat.omega2() * 2.0, lat.omega1() * -4.0 + lat.omega2() * 6.0] {
            prop_assert!(rel(lat.wp(z + p).unwrap(), w) < 1e-10);
        }
        let s = lat.sigma(z).unwrap();
        let expect = -s * (lat.eta1() * 2.0 * (z + lat.omega1())).exp();
        prop_assert!(rel(lat.sigma(z + lat.omega1() * 2.0).unwrap(), expect) < 1e-10);
        let expect2 = -s * (lat.eta2() * 2.0 * (z + lat.omega2())).exp();
        prop_assert!(rel(lat.sigma(z + lat.omega2() * 2.0).unwrap(), expect2) < 1e-10);
    }

    #[test]
    fn differential_equation(z in point(), k in 0usize..4) {
        let lat = &lattices()[k];
        let z = z * lat.omega1() * 2.0;
        prop_assume!(lat.lattice_distance(z) > 0.05 * lat.omega1().norm());
        let (w, wp) = lat.wp_pair(z).unwrap();
        let r = wp * wp - 4.0 * w * w * w + lat.g2() * w + lat.g3();
        let scale = (4.0 * w * w * w).norm().max(1.0);
        prop_assert!(r.norm() < 1e-9 * scale);
        prop_assert!(rel(lat.wp_prime(z).unwrap(), wp) < 1e-14);
    }

    #[test]
    fn derivative_chain(z in point()) {
        let lat = Lattice::default();
        prop_assume!(lat.lattice_distance(z) > 0.05);
        let h = 1e-5;
        let dz = (lat.zeta(z + h).unwrap() - lat.zeta(z - h).unwrap()) / (2.0 * h);
        prop_assert!(rel(dz, -lat.wp(z).unwrap()) < 1e-6);
        let dw = (lat.wp(z + h).unwrap() - lat.wp(z - h).unwrap()) / (2.0 * h);
        prop_assert!(rel(dw, lat.wp_prime(z).unwrap()) < 1e-6);
        let ds = (lat.sigma(z + h).unwrap() - lat.sigma(z - h).unwrap()) / (2.0 * h);
        prop_assert!(rel(ds / lat.sigma(z).unwrap(), lat.zeta(z).unwrap()) < 1e-6);
    }
}

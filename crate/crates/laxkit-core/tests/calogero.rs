use laxkit_core::calogero::*;
use laxkit_core::elliptic::{Lattice, C};
use laxkit_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FAMILIES: [CmFamily; 4] = [CmFamily::A, CmFamily::B, CmFamily::C, CmFamily::D];
const ZERO: C = C::new(0.0, 0.0);

fn lattice() -> Lattice {
    Lattice::from_tau(C::new(2.0, 0.0), C::new(0.0, 1.0)).unwrap()
}

fn system(f: CmFamily, n: usize) -> CMSystem {
    CMSystem::with_lattice(f, n, lattice()).unwrap()
}

fn physical(f: CmFamily, n: usize) -> CMSystem {
    CMSystem::physical_on(f, n, lattice()).unwrap()
}

fn state(sys: &CMSystem, seed: u64) -> CMState {
    sys.sample_state(&mut ChaCha8Rng::seed_from_u64(seed), 0.03, 0.5).unwrap()
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn z_samples() -> [C; 3] {
    [C::new(0.26, 0.42), C::new(-0.54, 0.22), C::new(0.62, -0.34)]
}

#[test]
fn a_family_addition_theorem() {
    let sys = system(CmFamily::A, 4);
    let s = CMState::real(&[0.2, 0.9, 1.7, 3.1], &[0.3, -0.2, 0.5, 0.1]);
    let lat = &sys.lattice;
    for z in z_samples() {
        let l = sys.lax_matrix(&s, z).unwrap().matrix;
        for i in 0..4 {
            assert_eq!(l[(i, i)], s.p[i]);
            for j in 0..4 {
                if i != j {
                    let rhs = lat.wp(s.q[i] - s.q[j]).unwrap() - lat.wp(z).unwrap();
                    assert!(rel(-l[(i, j)] * l[(j, i)], rhs) < 1e-10);
                }
            }
        }
    }
}

#[test]
fn b_family_column_product() {
    let sys = system(CmFamily::B, 3);
    let s = state(&sys, 1);
    let lat = &sys.lattice;
    let n = 3;
    for z in z_samples() {
        let l = sys.lax_matrix(&s, z).unwrap().matrix;
        assert_eq!(l[(n, n)], ZERO);
        for i in 0..n {
            let (a, b) = (l[(i, n)], l[(n + 1 + i, n)]);
            let rhs = sys.couplings.u(i) * (lat.wp(s.q[i]).unwrap() - lat.wp(z - sys.q0).unwrap());
            assert!(rel(a * b, rhs) < 1e-10);
        }
    }
}

#[test]
fn decoupled_limit_vanishes() {
    let mut sys = system(CmFamily::A, 3);
    sys.couplings = sys.couplings.scaled(ZERO);
    let s = CMState::real(&[0.3, 1.1, 2.5], &[0.0; 3]);
    let l = sys.lax_matrix(&s, C::new(0.4, 0.3)).unwrap().matrix;
    assert!(l.iter().all(|x| *x == ZERO));
}

#[test]
fn lax_matrices_lie_in_the_algebra() {
    for f in [CmFamily::B, CmFamily::C, CmFamily::D] {
        for n in 1..=3 {
            let sys = system(f, n);
            let sigma = sys.invariant_form();
            let s = state(&sys, 7 + n as u64);
            for z in z_samples() {
                let x = sys.lax_matrix(&s, z).unwrap().matrix;
                let r = x.transpose() * &sigma + &sigma * &x;
                assert!(r.norm() < 1e-12 * x.norm().max(1.0), "{f}{n}: {:e}", r.norm());
            }
        }
    }
}

#[test]
fn a_family_is_elliptic() {
    let sys = system(CmFamily::A, 3);
    let s = state(&sys, 3);
    let (w1, w2) = (sys.lattice.omega1() * 2.0, sys.lattice.omega2() * 2.0);
    for z in z_samples() {
        let l = sys.lax_matrix(&s, z).unwrap().matrix;
        for shift in [w1, w2, w1 + w2, -w2] {
            let m = sys.lax_matrix(&s, z + shift).unwrap().matrix;
            for (a, b) in l.iter().zip(m.iter()) {
                assert!(rel(*b, *a) < 1e-9);
            }
        }
    }
}

#[test]
fn lax_rejects_poles_and_collisions() {
    let sys = system(CmFamily::D, 2);
    let s = CMState::real(&[0.4, 1.3], &[0.0, 0.0]);
    assert!(sys.lax_matrix(&s, ZERO).is_err());
    assert!(sys.lax_matrix(&s, s.q[0]).is_err());
    assert!(sys.lax_matrix(&s, -s.q[1]).is_err());
    let bad = CMState::real(&[0.4, -0.4], &[0.0, 0.0]);
    assert!(matches!(sys.hamiltonian(&bad), Err(Error::Collision(_))));
    let bsys = system(CmFamily::B, 2);
    assert!(bsys.lax_matrix(&s, bsys.q0).is_err());
}

#[test]
fn closed_form_hamiltonians() {
    let a = system(CmFamily::A, 2);
    let s = CMState::real(&[0.3, 1.4], &[0.7, -0.2]);
    let expect = -(0.49 + 0.04) / 2.0 + a.lattice.wp(s.q[0] - s.q[1]).unwrap();
    assert!(rel(a.hamiltonian(&s).unwrap(), expect) < 1e-14);

    let c = system(CmFamily::C, 1);
    let s = CMState::real(&[0.45], &[0.6]);
    let expect = -0.36 + c.lattice.wp(s.q[0] * 2.0).unwrap() * 2.0;
    assert!(rel(c.hamiltonian(&s).unwrap(), expect) < 1e-14);

    let d = system(CmFamily::D, 2);
    let s = CMState::real(&[0.35, 1.2], &[0.1, 0.4]);
    let wp = |x: C| d.lattice.wp(x).unwrap();
    let expect = -(0.01 + 0.16) + wp(s.q[0] - s.q[1]) * 2.0 + wp(s.q[0] + s.q[1]) * 2.0;
    assert!(rel(d.hamiltonian(&s).unwrap(), expect) < 1e-14);

    let p = physical(CmFamily::D, 2);
    let scaled = CMSystem { physical_sign: false, ..p.clone() };
    assert!(rel(p.hamiltonian(&s).unwrap(), -scaled.hamiltonian(&s).unwrap()) < 1e-14);
}

#[test]
fn residue_route_matches_closed_form() {
    for f in FAMILIES {
        for n in 1..=3 {
            for (sys, sign) in [(system(f, n), -2.0), (physical(f, n), 2.0)] {
                let s = state(&sys, 40 + n as u64);
                let closed = (sys.hamiltonian(&s).unwrap() + sys.dropped_constant().unwrap()) * sign;
                let res = sys.residue_hamiltonian(&s, ZERO, 1, 2).unwrap();
                assert!((res - closed).norm() < 1e-9 * closed.norm(), "{f}{n}");
            }
        }
    }
}

#[test]
fn b_family_hamiltonian_ignores_q0() {
    let mut sys = system(CmFamily::B, 2);
    let s = state(&sys, 5);
    let h = sys.hamiltonian(&s).unwrap();
    let (dq, dp) = sys.equations_of_motion(&s).unwrap();
    sys.q0 = C::new(0.61, 0.23);
    assert_eq!(sys.hamiltonian(&s).unwrap(), h);
    assert_eq!(sys.equations_of_motion(&s).unwrap(), (dq.clone(), dp));
    assert_eq!(dq.len(), 2);
}

#[test]
fn a_family_trace_is_total_momentum() {
    let sys = system(CmFamily::A, 3);
    let s = state(&sys, 9);
    let total: C = s.p.iter().sum();
    for z in z_samples().into_iter().chain([C::new(0.1, 0.9), C::new(1.3, 0.2)]) {
        let tr = sys.spectral_invariants(&s, z, 1).unwrap()[0];
        assert!((tr - total).norm() < 1e-10);
    }
    let r = sys.residue_hamiltonian(&s, ZERO, 1, 1).unwrap();
    assert!((r - total).norm() < 1e-10);
}

#[test]
fn no_pole_no_residue() {
    // tr L is holomorphic at 0 for A
    let a = system(CmFamily::A, 3);
    let s = state(&a, 11);
    for m in [0, -1, -2] {
        assert!(a.residue_hamiltonian(&s, ZERO, m, 1).unwrap().norm() < 1e-12);
    }
    // tr L² is even in z, so its z^{-1} coefficient vanishes
    for f in FAMILIES {
        let sys = system(f, 2);
        let s = state(&sys, 11);
        let scale = sys.residue_hamiltonian(&s, ZERO, 1, 2).unwrap().norm();
        assert!(sys.residue_hamiltonian(&s, ZERO, 0, 2).unwrap().norm() < 1e-10 * scale, "{f}");
        assert!(sys.residue_hamiltonian(&s, ZERO, -1, 2).unwrap().norm() > 1e-3);
    }
    let b = system(CmFamily::B, 2);
    let s = state(&b, 11);
    assert!(b.residue_hamiltonian(&s, ZERO, 1, 3).is_err());
}

#[test]
fn characteristic_coefficients_match_traces() {
    let sys = system(CmFamily::A, 3);
    let s = state(&sys, 13);
    let z = C::new(0.3, 0.25);
    let l = sys.lax_matrix(&s, z).unwrap().matrix;
    let c = characteristic_coefficients(&l);
    let t = sys.spectral_invariants(&s, z, 3).unwrap();
    // Newton: e1 = t1, e2 = (t1² − t2)/2, e3 = (t1³ − 3 t1 t2 + 2 t3)/6
    let e1 = t[0];
    let e2 = (t[0] * t[0] - t[1]) / 2.0;
    let e3 = (t[0] * t[0] * t[0] - t[0] * t[1] * 3.0 + t[2] * 2.0) / 6.0;
    assert!(rel(c[1], -e1) < 1e-10);
    assert!(rel(c[2], e2) < 1e-10);
    assert!(rel(c[3], -e3) < 1e-10);
    let ev = sys.eigenvalues(&s, z).unwrap();
    let sum: C = ev.iter().sum();
    assert!(rel(sum, e1) < 1e-9);
}

#[test]
fn analytic_gradients_match_finite_differences() {
    for f in FAMILIES {
        for n in [2, 3] {
            let sys = physical(f, n);
            let s = state(&sys, 17 + n as u64);
            // the stencil's truncation error shows on the steeper H_4
            for (h, tol) in [(HamSpec::Closed, 1e-6), (HamSpec::Residue { p: 2, m: 1 }, 1e-6), (HamSpec::Residue { p: 4, m: 1 }, 1e-5)] {
                let (aq, ap) = sys.gradient(h, &s, GradientMethod::Analytic).unwrap();
                let (fq, fp) = sys.gradient(h, &s, GradientMethod::CentralDifference).unwrap();
                let scale = aq.iter().chain(&ap).map(|x| x.norm()).fold(1.0, f64::max);
                for (a, b) in aq.iter().chain(&ap).zip(fq.iter().chain(&fp)) {
                    assert!((a - b).norm() < tol * scale, "{f}{n} {h:?}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn translation_invariance_and_rest() {
    let sys = physical(CmFamily::A, 3);
    let s = state(&sys, 21);
    let (_, pdot) = sys.equations_of_motion(&s).unwrap();
    assert!(pdot.iter().sum::<C>().norm() < 1e-10 * pdot.iter().map(|x| x.norm()).fold(1.0, f64::max));
    for f in FAMILIES {
        let sys = physical(f, 2);
        let mut s = state(&sys, 22);
        s.p = vec![ZERO; 2];
        let (qdot, _) = sys.equations_of_motion(&s).unwrap();
        assert!(qdot.iter().all(|x| *x == ZERO || x.norm() == 0.0));
    }
}

#[test]
fn zero_duration_trajectory() {
    let sys = physical(CmFamily::C, 2);
    let s = state(&sys, 2);
    let t = sys.integrate(&s, 0.0, 1e-3, Scheme::Rk4, 1).unwrap();
    assert_eq!(t.times, vec![0.0]);
    assert_eq!(t.states, vec![s.clone()]);
    assert!(t.abort.is_none());
    assert!(sys.integrate(&s, 1.0, 0.0, Scheme::Rk4, 1).is_err());
    assert_eq!("leapfrog".parse::<Scheme>().unwrap(), Scheme::Leapfrog);
    assert!("euler".parse::<Scheme>().is_err());
}

fn max_drift(sys: &CMSystem, s: &CMState, t: f64, dt: f64, scheme: Scheme) -> f64 {
    let h0 = sys.hamiltonian(s).unwrap();
    let tr = sys.integrate(s, t, dt, scheme, 1).unwrap();
    assert!(tr.abort.is_none());
    tr.states.iter().map(|x| rel(sys.hamiltonian(x).unwrap(), h0)).fold(0.0, f64::max)
}

#[test]
fn rk4_error_is_fourth_order() {
    let sys = physical(CmFamily::A, 2);
    let s = CMState::real(&[0.5, 2.1], &[1.2, -0.4]);
    let coarse = max_drift(&sys, &s, 2.0, 0.04, Scheme::Rk4);
    let fine = max_drift(&sys, &s, 2.0, 0.02, Scheme::Rk4);
    let ratio = coarse / fine;
    assert!((10.0..24.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn energy_is_conserved_for_a2() {
    let sys = physical(CmFamily::A, 2);
    let s = CMState::real(&[0.5, 2.1], &[0.8, -0.3]);
    assert!(max_drift(&sys, &s, 10.0, 1e-3, Scheme::Rk4) < 1e-8);
    assert!(max_drift(&sys, &s, 10.0, 1e-3, Scheme::Leapfrog) < 1e-4);
}

#[test]
fn isospectral_flow_for_a3() {
    let sys = physical(CmFamily::A, 3);
    let s = state(&sys, 31);
    let tr = sys.integrate(&s, 2.0, 1e-3, Scheme::Rk4, 100).unwrap();
    for z in z_samples() {
        let e0 = sys.eigenvalues(&s, z).unwrap();
        let t0 = sys.spectral_invariants(&s, z, 4).unwrap();
        for st in &tr.states {
            assert!(multiset_distance(&e0, &sys.eigenvalues(st, z).unwrap()) < 1e-6);
            for (a, b) in t0.iter().zip(sys.spectral_invariants(st, z, 4).unwrap()) {
                assert!(rel(b, *a) < 1e-6);
            }
        }
    }
}

#[test]
fn collision_stops_integration() {
    // real couplings with the standard sign attract
    let s = CMState::real(&[0.5, 0.8], &[0.0, 0.0]);
    let tr = system(CmFamily::A, 2).integrate(&s, 5.0, 1e-3, Scheme::Rk4, 10).unwrap();
    assert!(matches!(tr.abort, Some(Error::Collision(_))));
    assert_eq!(tr.times.len(), tr.states.len());
    assert!(*tr.times.last().unwrap() < 5.0);
}

#[test]
fn brackets() {
    let sys = physical(CmFamily::A, 3);
    let s = state(&sys, 37);
    for m in [GradientMethod::Analytic, GradientMethod::CentralDifference] {
        assert_eq!(sys.poisson_bracket(HamSpec::Closed, HamSpec::Closed, &s, m).unwrap(), ZERO);
        assert!(sys.poisson_bracket(HamSpec::Closed, HamSpec::TotalMomentum, &s, m).unwrap().norm() < 1e-8);
        let b = sys
            .poisson_bracket(HamSpec::Residue { p: 2, m: 1 }, HamSpec::Residue { p: 3, m: 1 }, &s, m)
            .unwrap();
        assert!(b.norm() < 1e-6, "{m:?}: {b}");
    }
    let one = sys.poisson_bracket(HamSpec::Residue { p: 1, m: 1 }, HamSpec::TotalMomentum, &s, GradientMethod::Analytic);
    assert!(one.unwrap().norm() < 1e-10);
}

#[test]
fn residues_at_particles_are_rank_one_nilpotent() {
    let sys = system(CmFamily::A, 4);
    let s = state(&sys, 41);
    let report = sys.tyurin_residue_check(&s).unwrap();
    assert_eq!(report.len(), 4);
    for r in report {
        assert!(r.norm > 1e-3);
        assert!(r.singular_ratio < 1e-9, "{r:?}");
        assert!(r.square_ratio < 1e-9, "{r:?}");
    }
    let single = system(CmFamily::A, 1);
    let s = CMState::real(&[0.7], &[0.3]);
    assert!(single.tyurin_residue_check(&s).unwrap()[0].norm < 1e-12);
    assert!(system(CmFamily::D, 2).tyurin_residue_check(&CMState::real(&[0.3, 0.9], &[0.0, 0.0])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hamiltonian_is_translation_invariant(q in proptest::collection::vec(0.1f64..3.9, 3), shift in -2.0f64..2.0) {
        let sys = system(CmFamily::A, 3);
        let s = CMState::real(&q, &[0.2, -0.1, 0.4]);
        prop_assume!(sys.check_state(&s).is_ok());
        let moved = CMState::real(&q.iter().map(|x| x + shift).collect::<Vec<_>>(), &[0.2, -0.1, 0.4]);
        let (a, b) = (sys.hamiltonian(&s).unwrap(), sys.hamiltonian(&moved).unwrap());
        prop_assert!(rel(b, a) < 1e-9);
    }

    #[test]
    fn lax_samples_preserve_the_form(seed in any::<u64>(), fam in 1usize..4, n in 1usize..4, zr in -0.9f64..0.9, zi in -0.45f64..0.45) {
        let sys = system(FAMILIES[fam], n);
        let s = state(&sys, seed);
        let z = C::new(zr, zi);
        prop_assume!(sys.lax_matrix(&s, z).is_ok());
        let x = sys.lax_matrix(&s, z).unwrap().matrix;
        let sigma = sys.invariant_form();
        let r = x.transpose() * &sigma + &sigma * &x;
        prop_assert!(r.norm() < 1e-12 * x.norm().max(1.0));
    }

    #[test]
    fn real_states_have_real_energy(seed in any::<u64>(), fam in 0usize..4, n in 2usize..4) {
        let sys = physical(FAMILIES[fam], n);
        let s = state(&sys, seed);
        let h = sys.hamiltonian(&s).unwrap();
        prop_assert!(h.im.abs() < 1e-10 * h.norm().max(1.0));
    }
}

use std::sync::Arc;

use laxkit_core::formal::*;
use laxkit_core::liealg::{catalog, grading, Family, GradedDecomposition};
use laxkit_core::{Mat, Q};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dec(f: Family, r: usize, root: usize) -> Arc<GradedDecomposition> {
    Arc::new(grading(f, r, root, false).unwrap())
}

fn catalog_decs() -> Vec<Arc<GradedDecomposition>> {
    catalog().into_iter().map(|(f, r, root)| dec(f, r, root)).collect()
}

#[test]
fn closure_on_graded_basis_pairs() {
    for d in catalog_decs() {
        let k = d.k();
        for (x, &p) in d.basis.iter().zip(&d.degrees) {
            for (y, &q) in d.basis.iter().zip(&d.degrees) {
                // x z^{max(p,-k)} and y z^{max(q,-k)} are the lowest admissible placements
                let place = |m: &Mat, s: i64| {
                    let mut e = MatrixLaurent::zero(d.clone(), -k, k + 1);
                    e.set(s.max(-k), m.clone());
                    LaxExpansion::new(e).unwrap()
                };
                let (a, b) = (place(x, p), place(y, q));
                let c = commutator(a.series(), b.series()).unwrap();
                assert!(validate_lax(&c).is_ok());
            }
        }
    }
}

#[test]
fn closure_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in catalog_decs() {
        for _ in 0..20 {
            let a = random_lax(&d, d.k() + 1, &mut rng);
            let b = random_lax(&d, d.k() + 1, &mut rng);
            let c = commutator(a.series(), b.series()).unwrap();
            assert!(c.trunc() >= 1 - d.k());
            assert!(validate_lax(&c).is_ok());
        }
    }
}

#[test]
fn commutator_rejects_other_decomposition() {
    let a = MatrixLaurent::zero(dec(Family::A, 2, 1), -1, 1);
    let b = MatrixLaurent::zero(dec(Family::D, 3, 1), -1, 1);
    assert_eq!(commutator(&a, &b).unwrap_err(), laxkit_core::Error::DecompositionMismatch);
}

#[test]
fn lax_m_commutator_matches_termwise_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in catalog_decs() {
        let k = d.k();
        for _ in 0..5 {
            let l = random_lax(&d, k + 2, &mut rng);
            let m = random_mop(&d, k + 2, &mut rng);
            let direct = commutator(l.series(), &m.full_series()).unwrap();
            let termwise = expansion_of_commutator(&l, &m).unwrap();
            assert!(direct.agrees_with(&termwise));
            for p in termwise.pmin..-k - 1 {
                assert!(termwise.coeff(p).is_zero(), "degree {p}");
            }
            let lowest = l.series().coeff(-k).scale(&(Q::int(k) * &m.nu));
            assert_eq!(termwise.coeff(-k - 1), lowest);
        }
    }
}

#[test]
fn tangency_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for d in catalog_decs() {
        let k = d.k();
        let l = random_lax(&d, k + 2, &mut rng);
        let m = random_mop(&d, k + 2, &mut rng);
        let (ldot, zdot) = tangency_solution(&l, &m);
        assert!(tangency_relations_residual(&l, &ldot, &m, &zdot).unwrap().is_zero());
        let lhs = expansion_of_time_derivative(&l, &ldot, &zdot);
        let rhs = expansion_of_commutator(&l, &m).unwrap();
        for p in -k - 1..=0 {
            assert_eq!(lhs.coeff(p), rhs.coeff(p), "degree {p}");
        }
        for p in rhs.pmin..-k - 1 {
            assert!(rhs.coeff(p).is_zero());
        }
        let broken = ldot.map(|c| c.scale(&Q::int(2)));
        let nonzero = l.series().coeffs.iter().any(|c| !c.is_zero());
        if nonzero && ldot.coeffs.iter().any(|c| !c.is_zero()) {
            assert!(!tangency_relations_residual(&l, &broken, &m, &zdot).unwrap().is_zero());
        }
    }
}

#[test]
fn pole_elimination_on_catalog() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in catalog_decs() {
        for _ in 0..10 {
            let l = random_lax(&d, 2 * d.k() + 1, &mut rng);
            let e = conjugate_pole_elimination(&l);
            assert!(e.degrees_below(0).is_empty());
        }
    }
}

#[test]
fn pole_elimination_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in catalog_decs() {
        let l = random_lax(&d, 2 * d.k() + 2, &mut rng);
        let there = conjugate_pole_elimination_signed(l.series(), 1);
        let back = conjugate_pole_elimination_signed(&there, -1);
        assert!(back.agrees_with(l.series()));
    }
}

#[test]
fn mop_with_positive_part_keeps_a_pole() {
    for d in catalog_decs() {
        let x = d.subspace(1)[0].clone();
        let mut s = MatrixLaurent::zero(d.clone(), -d.k(), d.k() + 1);
        s.set(0, x);
        let m = MOpExpansion::new(Q::zero(), s).unwrap();
        assert_eq!(conjugate_pole_elimination_signed(&m.series, 1).degrees_below(0), vec![-1]);
    }
}

#[test]
fn tyurin_forms_after_random_conjugation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cases = [
        (Family::A, 2, 1),
        (Family::A, 3, 1),
        (Family::A, 4, 1),
        (Family::SL, 3, 1),
        (Family::D, 3, 1),
        (Family::D, 4, 1),
        (Family::B, 2, 1),
        (Family::B, 3, 1),
        (Family::C, 2, 1),
        (Family::C, 3, 1),
        (Family::G2, 2, 2),
    ];
    for (f, r, root) in cases {
        let d = dec(f, r, root);
        for _ in 0..10 {
            let l = random_lax(&d, d.k() + 1, &mut rng);
            let g = random_conjugator(&d, &mut rng);
            let e = conjugate_series(l.series(), &g);
            assert!(e.in_algebra());
            let rep = validate_tyurin_form(&e, &g).unwrap();
            assert!(rep.passed(), "{f}{r}: {:?}", rep.checks);
        }
    }
}

#[test]
fn gl_residue_is_square_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = dec(Family::A, 4, 1);
    for _ in 0..10 {
        let l = random_lax(&d, 1, &mut rng);
        let g = random_conjugator(&d, &mut rng);
        let r = conjugate_series(l.series(), &g).coeff(-1);
        assert!((&r * &r).is_zero());
        assert!(r.rank() <= 1);
    }
}

#[test]
fn tyurin_rejects_unconjugated_violation() {
    let d = dec(Family::A, 3, 1);
    let mut s = MatrixLaurent::zero(d.clone(), -1, 1);
    s.set(-1, Mat::identity(3));
    let rep = validate_tyurin_form(&s, &Mat::identity(3)).unwrap();
    assert!(!rep.passed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closure_property(seed in any::<u64>(), idx in 0usize..64) {
        let decs = catalog_decs();
        let d = &decs[idx % decs.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_lax(d, d.k(), &mut rng);
        let b = random_lax(d, d.k(), &mut rng);
        let c = commutator(a.series(), b.series()).unwrap();
        prop_assert!(validate_lax(&c).is_ok());
        prop_assert!(c.in_algebra());
        let aa = commutator(a.series(), a.series()).unwrap();
        prop_assert!(aa.coeffs.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn elimination_never_leaves_poles(seed in any::<u64>(), idx in 0usize..64) {
        let decs = catalog_decs();
        let d = &decs[idx % decs.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_lax(d, 2 * d.k(), &mut rng);
        prop_assert!(conjugate_pole_elimination(&l).degrees_below(0).is_empty());
    }
}

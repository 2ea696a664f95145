use laxkit_core::liealg::*;
use laxkit_core::{Mat, Q};
use proptest::prelude::*;

fn positive_root_count(family: Family, rank: usize) -> usize {
    match family {
        Family::A | Family::SL => rank * (rank - 1) / 2,
        Family::B | Family::C => rank * rank,
        Family::D => rank * (rank - 1),
        Family::G2 => 6,
    }
}

#[test]
fn positive_root_counts() {
    for (f, r) in [
        (Family::A, 2),
        (Family::A, 4),
        (Family::B, 2),
        (Family::B, 3),
        (Family::C, 3),
        (Family::D, 4),
        (Family::D, 5),
        (Family::G2, 2),
    ] {
        let rs = build_root_system(f, r).unwrap();
        assert_eq!(rs.positive_roots.len(), positive_root_count(f, r), "{f}{r}");
        assert!(rs.expansions.iter().flatten().all(|&c| c >= 0));
        for e in &rs.expansions {
            assert!(e.iter().zip(&rs.highest_expansion).all(|(a, b)| a <= b));
        }
    }
}

#[test]
fn highest_roots() {
    assert_eq!(build_root_system(Family::D, 4).unwrap().highest_expansion, vec![1, 2, 1, 1]);
    assert_eq!(build_root_system(Family::C, 4).unwrap().highest_expansion, vec![2, 2, 2, 1]);
    assert_eq!(build_root_system(Family::B, 3).unwrap().highest_expansion, vec![1, 2, 2]);
    assert_eq!(build_root_system(Family::G2, 2).unwrap().highest_expansion, vec![3, 2]);
}

#[test]
fn depth_is_highest_root_multiplicity() {
    let depth = |f, r, i| grading_by_simple_root(&build_root_system(f, r).unwrap(), i, false).unwrap().1;
    assert_eq!(depth(Family::A, 4, 0), 1);
    assert_eq!(depth(Family::C, 3, 0), 2);
    assert_eq!(depth(Family::C, 3, 2), 1);
    assert_eq!(depth(Family::G2, 2, 0), 3);
    assert_eq!(depth(Family::G2, 2, 1), 2);
    let rs = build_root_system(Family::B, 2).unwrap();
    assert!(grading_by_simple_root(&rs, 2, false).is_err());
}

#[test]
fn realization_dimensions_and_closure() {
    for (f, r) in [(Family::A, 3), (Family::SL, 3), (Family::B, 2), (Family::C, 2), (Family::D, 2), (Family::G2, 2)] {
        let alg = matrix_realization(f, r).unwrap();
        assert_eq!(alg.dim(), algebra_dim(f, r));
        for x in &alg.basis {
            assert!(alg.preserves_form(x));
            for y in &alg.basis {
                assert!(alg.contains(&x.commutator(y)), "{f}{r} not closed");
            }
        }
    }
    let so4 = matrix_realization(Family::D, 2).unwrap();
    let sigma = Mat::from_fn(4, 4, |i, j| if i + 2 == j || j + 2 == i { Q::one() } else { Q::zero() });
    assert_eq!(so4.sigma, sigma);
    assert_eq!(matrix_realization(Family::G2, 2).unwrap().rep_dim, 7);
}

#[test]
fn catalog_grading_invariants() {
    for (f, r, root) in catalog() {
        let dec = grading(f, r, root, false).unwrap();
        let k = dec.k();
        assert_eq!((-k..=k).map(|p| dec.dim_g(p)).sum::<usize>(), dec.dim());
        for p in 0..=k {
            assert_eq!(dec.dim_g(p), dec.dim_g(-p));
        }
        for (x, &p) in dec.basis.iter().zip(&dec.degrees) {
            assert_eq!(dec.h.commutator(x), x.scale(&Q::int(p)));
        }
        assert_eq!(c_gamma(&dec), k as usize * dec.dim(), "{f}{r}/{root}");
        for (x, &p) in dec.basis.iter().zip(&dec.degrees) {
            for (y, &q) in dec.basis.iter().zip(&dec.degrees) {
                if p + q != 0 {
                    assert!(x.trace_pair(y).is_zero());
                }
                let c = x.commutator(y);
                if p + q > k || p + q < -k {
                    assert!(c.is_zero());
                } else {
                    assert_eq!(dec.project(&c, p + q), c);
                }
            }
        }
    }
}

#[test]
fn graded_dimensions() {
    let gl3 = grading(Family::A, 3, 1, false).unwrap();
    assert_eq!((gl3.dim_g(-1), gl3.dim_g(0), gl3.dim_g(1)), (2, 5, 2));
    for n in 2..=4 {
        let sp = grading(Family::C, n, 1, false).unwrap();
        assert_eq!((sp.k(), sp.dim_g(-2), sp.dim_g(-1)), (2, 1, 2 * n - 2));
    }
    let c3 = grading(Family::C, 3, 1, false).unwrap();
    assert_eq!((-2..=2).map(|p| c3.dim_g(p)).collect::<Vec<_>>(), vec![1, 4, 11, 4, 1]);
    let g2 = grading(Family::G2, 2, 2, false).unwrap();
    assert_eq!((g2.dim_g(-2), g2.dim_g(-1)), (1, 4));
    let dual = grading(Family::A, 3, 1, true).unwrap();
    assert_eq!(dual.h, gl3.h.scale(&Q::int(-1)));
}

#[test]
fn mist_identity_cases() {
    for n in 2..=5 {
        assert_eq!(check_mist_identity(&grading(Family::A, n, 1, false).unwrap()), 0);
        assert_eq!(check_mist_identity(&grading(Family::C, n, 1, false).unwrap()), 0);
    }
    for n in 3..=5 {
        assert_eq!(check_mist_identity(&grading(Family::D, n, 1, false).unwrap()), 0);
    }
    // so(4): alpha_1 = e_1 - e_2 gives dim g~_{-1} = 1, not 2n - 2
    let d2 = grading(Family::D, 2, 1, false).unwrap();
    assert_eq!((d2.dim_filtration(-1), check_mist_identity(&d2)), (1, 2));
    let g2 = grading(Family::G2, 2, 2, false).unwrap();
    assert_eq!(check_mist_identity(&g2), 0);
    assert_eq!(g2.dim() as i64 - 7 * 2, 0);
    for n in 2..=3 {
        let b = grading(Family::B, n, 1, false).unwrap();
        assert_ne!(check_mist_identity(&b), 0);
        assert_eq!(mist_residual_with(&b, 2, 2 * n as i64 + 1), 0);
    }
}

#[test]
fn tozh_identity() {
    assert_eq!(invariant_degrees(Family::C, 2).unwrap(), vec![2, 4]);
    assert_eq!(invariant_degrees(Family::G2, 2).unwrap(), vec![2, 6]);
    assert_eq!(invariant_degrees(Family::D, 4).unwrap(), vec![2, 4, 4, 6]);
    for (f, r) in [
        (Family::SL, 2),
        (Family::SL, 5),
        (Family::A, 4),
        (Family::B, 3),
        (Family::C, 2),
        (Family::C, 4),
        (Family::D, 4),
        (Family::D, 5),
        (Family::G2, 2),
    ] {
        assert_eq!(check_tozh(f, r).unwrap(), 0, "{f}{r}");
    }
}

#[test]
fn hamiltonian_counts() {
    assert_eq!(hamiltonian_count(Family::C, 2, 4, 2).unwrap(), (22, true));
    for (f, r) in [(Family::SL, 3), (Family::B, 2), (Family::C, 3), (Family::D, 4), (Family::G2, 2)] {
        assert_eq!(hamiltonian_count(f, r, 0, 1).unwrap().0, 0);
        for g in 2..=4 {
            let dim = algebra_dim(f, r) as i64;
            let (n, ok) = hamiltonian_count(f, r, 2 * g - 2, g).unwrap();
            assert!(ok);
            assert_eq!(n, dim * (g - 1));
            assert_eq!(hamiltonian_count_from_degrees(f, r, 2 * g - 2, g).unwrap(), n);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_respects_grading(idx in 0usize..15, a in proptest::collection::vec(-3i64..=3, 40), b in proptest::collection::vec(-3i64..=3, 40), p in -3i64..=3, q in -3i64..=3) {
        let cat = catalog();
        let (f, r, root) = cat[idx % cat.len()];
        let dec = grading(f, r, root, false).unwrap();
        let elem = |c: &[i64], deg: i64| {
            let coeffs: Vec<Q> = dec.degrees.iter().zip(c.iter().cycle()).map(|(&d, &v)| if d == deg { Q::int(v) } else { Q::zero() }).collect();
            dec.combine(&coeffs)
        };
        let x = elem(&a, p);
        let y = elem(&b, q);
        let c = x.commutator(&y);
        prop_assert_eq!(dec.h.commutator(&c), c.scale(&Q::int(p + q)));
        prop_assert!(dec.algebra.contains(&c));
    }
}

use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use ncsos::cones::{evaluate_lex, membership, separate_point, ConeV, Membership};
use ncsos::groupalg::{AlgebraElement, AlgebraSpec, FiniteGroup, Word};
use ncsos::rcf::{
    gauge_triangle_holds, hermitian_psd_check, EvaluationFunctional, PolyFunctional, RcfComplex, RcfScalar, UniPoly,
    DEFAULT_TRUNCATION,
};
use ncsos::repwitness::{choi_dilation, unitarity_residual, CMat, C64};
use ncsos::scalar::{cint, creal, rat, rint, sqrt_upper, Scalar};
use ncsos::soscone::{decide_sos, l1_absorption_certificate, verify_certificate, GramBasis, Mode, SosVerdict};
use ncsos::{RcfMatrix, Rational};

fn scalar() -> impl Strategy<Value = RcfScalar> {
    prop::collection::vec((0u32..4, -6i64..=6, 1i64..=4), 0..4).prop_map(|terms| {
        RcfScalar::from_terms(terms.into_iter().map(|(e, n, d)| (e, rat(n, d))), DEFAULT_TRUNCATION).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ordered_field_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        if a < b {
            prop_assert!(a.clone() + c.clone() < b.clone() + c.clone());
        }
        if a.sign() > 0 && b.sign() > 0 {
            prop_assert!((a.clone() * b.clone()).sign() > 0);
        }
        prop_assert!((a.clone() * a.clone()).sign() >= 0);
    }

    #[test]
    fn standard_part_is_a_morphism(a in scalar(), b in scalar()) {
        prop_assert_eq!((a.clone() + b.clone()).standard_part(), a.standard_part() + b.standard_part());
        prop_assert_eq!((a.clone() * b.clone()).standard_part(), a.standard_part() * b.standard_part());
        if a.sign() >= 0 {
            prop_assert!(!a.standard_part().is_negative());
        }
    }
}

fn rcf_hermitian(n: usize) -> impl Strategy<Value = RcfMatrix> {
    let entry = prop::collection::vec(-3i64..=3, 3);
    (prop::collection::vec((entry.clone(), entry), n * n), any::<bool>()).prop_map(move |(raw, gram)| {
        let poly = |c: &[i64]| {
            RcfScalar::from_terms(c.iter().enumerate().map(|(e, &v)| (e as u32, rint(v))), DEFAULT_TRUNCATION)
                .unwrap()
        };
        let mut a = RcfMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (re, im) = &raw[i * n + j];
                a[(i, j)] = RcfComplex::new(poly(re), poly(im));
            }
        }
        if gram {
            // B Bᴴ is PSD; mixes in the positive cases
            let mut g = RcfMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = RcfComplex::real(RcfScalar::zero_with_order(DEFAULT_TRUNCATION));
                    for k in 0..n {
                        acc = acc + a[(i, k)].clone() * a[(j, k)].conj();
                    }
                    g[(i, j)] = acc;
                }
            }
            g
        } else {
            let mut h = a.clone();
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] = a[(i, j)].clone() + a[(j, i)].conj();
                }
            }
            h
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psd_check_matches_floats(m in (1usize..=5).prop_flat_map(rcf_hermitian)) {
        let n = m.rows();
        let eps = 1e-6;
        let f = DMatrix::from_fn(n, n, |i, j| C64::new(m[(i, j)].re.eval_f64(eps), m[(i, j)].im.eval_f64(eps)));
        let eig = f.symmetric_eigen().eigenvalues;
        let scale = eig.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let verdict = hermitian_psd_check(&m).unwrap();
        if min < -1e-9 * scale {
            prop_assert!(!verdict);
        } else if min > 1e-9 * scale {
            prop_assert!(verdict);
        }
    }

    #[test]
    fn gauge_triangle_for_point_evaluations(
        nodes in prop::collection::vec((0i64..=4, -3i64..=3), 1..4),
        a in prop::collection::vec(-3i64..=3, 1..4),
        b in prop::collection::vec(-3i64..=3, 1..4),
    ) {
        let phi = EvaluationFunctional {
            nodes: nodes.iter().map(|&(w, x)| (rint(w), rat(x, 2))).collect(),
            order: DEFAULT_TRUNCATION,
        };
        let (a, b) = (UniPoly::from_ints(&a), UniPoly::from_ints(&b));
        let aa = phi.apply(&a.adjoint().mul(&a)).unwrap().re.standard_part();
        let bb = phi.apply(&b.adjoint().mul(&b)).unwrap().re.standard_part();
        let s = RcfScalar::from_rational(sqrt_upper(&(aa * bb), 30), DEFAULT_TRUNCATION);
        prop_assert!(gauge_triangle_holds(&phi, &a, &b, &s).unwrap());
    }
}

fn cone_instance() -> impl Strategy<Value = (ConeV, Vec<Rational>)> {
    (1usize..=6).prop_flat_map(|dim| {
        let vec = move || prop::collection::vec(-3i64..=3, dim);
        (prop::collection::vec(vec(), 1..=12), vec()).prop_filter_map("zero generator", move |(gens, x)| {
            let gens: Vec<Vec<Rational>> = gens
                .into_iter()
                .filter(|g| g.iter().any(|&v| v != 0))
                .map(|g| g.into_iter().map(rint).collect())
                .collect();
            if gens.is_empty() {
                return None;
            }
            Some((ConeV::new(dim, gens).ok()?, x.into_iter().map(rint).collect()))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn separation_contract((cone, x) in cone_instance(), k in 1i64..=5) {
        let outside = !membership(&cone, &x).unwrap().is_inside();
        let f = separate_point(&cone, &x);
        prop_assert_eq!(outside, f.is_ok());
        let Ok(f) = f else { return Ok(()) };
        prop_assert!(f.len() <= cone.dim());
        prop_assert!(evaluate_lex(&f, &x).unwrap().sign() < 0);
        for g in cone.generators() {
            let neg: Vec<Rational> = g.iter().map(|v| -v.clone()).collect();
            let s = evaluate_lex(&f, g).unwrap().sign();
            match membership(&cone, &neg).unwrap() {
                Membership::Inside(_) => prop_assert_eq!(s, 0),
                Membership::Outside(_) => prop_assert!(s > 0),
            }
        }
        // scaling everything by k changes no verdict
        let q = rat(k, 3);
        let scaled = ConeV::new(
            cone.dim(),
            cone.generators().iter().map(|g| g.iter().map(|v| v * &q).collect()).collect(),
        ).unwrap();
        let xs: Vec<Rational> = x.iter().map(|v| v * &q).collect();
        let g = separate_point(&scaled, &xs).unwrap();
        prop_assert!(evaluate_lex(&g, &xs).unwrap().sign() < 0);
        for (a, b) in cone.generators().iter().zip(scaled.generators()) {
            prop_assert_eq!(evaluate_lex(&f, a).unwrap().sign(), evaluate_lex(&g, b).unwrap().sign());
        }
    }
}

fn specs() -> Vec<Arc<AlgebraSpec>> {
    vec![
        AlgebraSpec::free(2),
        AlgebraSpec::free_abelian(2),
        AlgebraSpec::finite(FiniteGroup::dihedral(3)),
        AlgebraSpec::free_star(2, false),
    ]
}

fn element(spec: Arc<AlgebraSpec>, radius: usize) -> impl Strategy<Value = AlgebraElement> {
    let words = spec.ball(radius);
    let n = words.len();
    prop::collection::vec((0..n, -3i64..=3, -3i64..=3), 0..5).prop_map(move |terms| {
        let mut a = AlgebraElement::zero(&spec);
        for (i, re, im) in terms {
            a.add_term(words[i].clone(), cint(re, im));
        }
        a
    })
}

fn any_element() -> impl Strategy<Value = (AlgebraElement, AlgebraElement, AlgebraElement)> {
    (0..specs().len()).prop_flat_map(|i| {
        let s = specs()[i].clone();
        (element(s.clone(), 2), element(s.clone(), 2), element(s, 2))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn involution_and_trace((a, b, c) in any_element()) {
        let ab = &a * &b;
        prop_assert_eq!(ab.involution(), &b.involution() * &a.involution());
        prop_assert_eq!(a.involution().involution(), a.clone());
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        if a.spec().is_group() {
            prop_assert_eq!(ab.augmentation(), a.augmentation() * b.augmentation());
            prop_assert_eq!(a.involution().augmentation(), a.augmentation().conj());
        }
        if a.spec().is_group() {
            let t = (&a.involution() * &a).trace();
            prop_assert!(t.im.is_zero());
            prop_assert_eq!(t.re, a.l2_norm_sq());
        }
    }

    #[test]
    fn l1_submultiplicative((a, b, _) in any_element()) {
        let real = |x: &AlgebraElement| {
            AlgebraElement::from_terms(x.spec(), x.terms().iter().map(|(w, z)| (w.clone(), creal(z.re.clone())))).unwrap()
        };
        let (a, b) = (real(&a), real(&b));
        prop_assert!((&a * &b).l1_norm_sq_bound() <= a.l1_norm_sq_bound() * b.l1_norm_sq_bound());
    }

    #[test]
    fn free_reduction_is_confluent(
        x in prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 0..8),
        y in prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 0..8),
    ) {
        let f2 = AlgebraSpec::free(2);
        let stepwise = |letters: &[i32]| {
            letters.iter().fold(f2.identity(), |acc, &l| f2.mul(&acc, &Word(vec![l])))
        };
        let joined: Vec<i32> = x.iter().chain(&y).cloned().collect();
        prop_assert_eq!(f2.mul(&stepwise(&x), &stepwise(&y)), stepwise(&joined));
    }

    #[test]
    fn absorption_round_trip(a in element(AlgebraSpec::free(2), 2), extra in 0i64..3) {
        let h = &a + &a.involution();
        let lambda = rint(2) * h.l1_norm_bound() + rint(extra);
        let c = l1_absorption_certificate(&h, &lambda).unwrap();
        prop_assert!(verify_certificate(&c));
    }
}

fn free1_hermitian() -> impl Strategy<Value = AlgebraElement> {
    (prop::collection::vec((-3i64..=3, -3i64..=3), 1..=2), 0i64..=8).prop_map(|(coeffs, b0)| {
        let f1 = AlgebraSpec::free(1);
        let mut b = AlgebraElement::scalar(&f1, creal(rint(b0)));
        for (k, (re, im)) in coeffs.into_iter().enumerate() {
            let z = cint(re, im);
            b.add_term(Word(vec![-1; k + 1]), z.conj());
            b.add_term(Word(vec![1; k + 1]), z);
        }
        b
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn verdicts_are_sound_and_monotone(b in free1_hermitian()) {
        prop_assume!(b.degree() > 0);
        let r = b.degree().div_ceil(2);
        let small = GramBasis::with_radius(b.spec(), Mode::Full, r);
        match decide_sos(&b, &small).unwrap() {
            SosVerdict::Certified(c) => {
                prop_assert!(verify_certificate(&c));
                let big = GramBasis::with_radius(b.spec(), Mode::Full, r + 1);
                let SosVerdict::Certified(c2) = decide_sos(&b, &big).unwrap() else {
                    return Err(TestCaseError::fail("lost certificate on a larger basis"));
                };
                prop_assert!(verify_certificate(&c2));
            }
            SosVerdict::Refuted(phi) => {
                prop_assert!(phi.verify(&b));
                prop_assert!(phi.value_at_target.is_negative());
            }
        }
    }
}

fn contraction() -> impl Strategy<Value = CMat> {
    (1usize..=4).prop_flat_map(|k| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k * k).prop_map(move |v| {
            let m = CMat::from_iterator(k, k, v.into_iter().map(|(a, b)| C64::new(a, b)));
            let norm = m.clone().singular_values().max();
            if norm > 1.0 {
                m / C64::new(norm, 0.0)
            } else {
                m
            }
        })
    })
}

proptest! {
    #[test]
    fn dilation_is_unitary_and_compresses_back(m in contraction()) {
        let u = choi_dilation(&m).unwrap();
        let k = m.nrows();
        prop_assert!(unitarity_residual(&u) <= 1e-8);
        prop_assert_eq!(u.view((0, 0), (k, k)).into_owned(), m);
    }
}

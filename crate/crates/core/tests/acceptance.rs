//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ncsos::cones::{evaluate_lex, separate_point, ConeV};
use ncsos::groupalg::{c_of, laplacian, standard_laplacian, AlgebraElement, AlgebraSpec, FiniteGroup, Word};
use ncsos::lp::{LinearProgram, Relation};
use ncsos::rcf::{
    cauchy_schwarz_check, cp_level_check, determinant, eval_derivative_functional, hermitian_psd_check,
    CauchySchwarz, DerivativeFunctional, DerivativeMode, PolyFunctional, RcfComplex, RcfScalar, UniPoly,
    DEFAULT_TRUNCATION,
};
use ncsos::repwitness::{refutation_witness, UNITARITY_TOLERANCE};
use ncsos::scalar::{cint, creal, rat, rint};
use ncsos::soscone::{
    certify_sos, decide_sos, delta_interior_shift, interior_shift_certificate, kazhdan_constant_finite,
    laplacian_bound, lemma_bounded_certificate, nu_table, verify_certificate, DualWitness, GramBasis, Mode,
    SosCertificate, SosVerdict,
};
use ncsos::{CRational, RcfMatrix, Rational};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

// 1. derivative functional on 1+t² and the Cauchy-Schwarz excess
fn criterion_1() -> Check {
    let a = UniPoly::from_ints(&[1, 0, 1]);
    let aa = a.adjoint().mul(&a);
    let v = eval_derivative_functional(&aa, DerivativeMode::SingleLevel, DEFAULT_TRUNCATION).map_err(err)?;
    ensure(v.to_string() == "1 + 4*e^1", format!("φ(a*a) = {v}"))?;
    let phi = DerivativeFunctional::new(DerivativeMode::SingleLevel, DEFAULT_TRUNCATION);
    let one = UniPoly::from_ints(&[1]);
    match cauchy_schwarz_check(&phi, &a, &one).map_err(err)? {
        CauchySchwarz::Violated { excess } => {
            let expected: RcfScalar = "4*e^2".parse().map_err(err)?;
            ensure(excess == expected, format!("excess {excess}"))
        }
        CauchySchwarz::Holds => Err("Cauchy-Schwarz reported as holding".into()),
    }
}

// 2. the 2×2 matrix with negative determinant
fn criterion_2() -> Check {
    let r = |s: &str| RcfComplex::real(s.parse().unwrap());
    let m = RcfMatrix::from_rows(vec![vec![r("1"), r("1 + 2*e")], vec![r("1 + 2*e"), r("1 + 4*e")]]);
    ensure(!hermitian_psd_check(&m).map_err(err)?, "matrix reported PSD")?;
    let det = determinant(&m);
    let expected: RcfScalar = "-4*e^2".parse().map_err(err)?;
    ensure(det.re == expected && det.im.sign() == 0, format!("determinant {det}"))
}

// 3. full-series functional: positive on squares, not 2-positive
fn criterion_3() -> Check {
    let phi = DerivativeFunctional::new(DerivativeMode::FullSeries, DEFAULT_TRUNCATION);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut count = 0;
    while count < 50 {
        let deg = rng.gen_range(0..=3);
        let coeffs: Vec<CRational> = (0..=deg)
            .map(|_| cint(rng.gen_range(-5..=5), rng.gen_range(-5..=5)))
            .collect();
        let p = UniPoly::new(coeffs);
        if p.is_zero() {
            continue;
        }
        let v = phi.apply(&p.adjoint().mul(&p)).map_err(err)?;
        ensure(v.re.sign() > 0 && v.im.sign() == 0, format!("φ(p*p) = {v} for {p:?}"))?;
        count += 1;
    }
    let rows = [UniPoly::from_ints(&[1]), UniPoly::from_ints(&[1, 0, 1])];
    ensure(!cp_level_check(&phi, &rows, 2).map_err(err)?, "level-2 matrix reported PSD")
}

fn in_cone_lp(gens: &[Vec<Rational>], x: &[Rational]) -> bool {
    let mut lp = LinearProgram::new(gens.len());
    for i in 0..x.len() {
        lp.add(gens.iter().map(|g| g[i].clone()).collect(), Relation::Eq, x[i].clone());
    }
    lp.solve().optimal().is_some()
}

// 4. randomized separation with the exact LP oracle
fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut done = 0;
    let mut tries = 0;
    while done < 200 {
        tries += 1;
        if tries > 5000 {
            return Err(format!("only {done} outside instances generated"));
        }
        let dim = rng.gen_range(1..=6);
        let ngen = rng.gen_range(1..=dim + 2);
        let mut gens: Vec<Vec<Rational>> = (0..ngen)
            .map(|_| (0..dim).map(|_| rint(rng.gen_range(-3..=3))).collect::<Vec<_>>())
            .filter(|g| g.iter().any(|v| !v.is_zero()))
            .collect();
        if gens.is_empty() {
            continue;
        }
        if rng.gen_bool(0.4) {
            // force a nontrivial lineality space
            let g = gens[0].clone();
            gens.push(g.iter().map(|v| -v.clone()).collect());
        }
        let x: Vec<Rational> = (0..dim).map(|_| rint(rng.gen_range(-4..=4))).collect();
        if in_cone_lp(&gens, &x) {
            continue;
        }
        let cone = ConeV::new(dim, gens.clone()).map_err(err)?;
        let f = separate_point(&cone, &x).map_err(err)?;
        ensure(evaluate_lex(&f, &x).map_err(err)?.sign() < 0, "φ(x) is not negative")?;
        for g in &gens {
            let neg: Vec<Rational> = g.iter().map(|v| -v.clone()).collect();
            let in_lineality = in_cone_lp(&gens, &neg);
            let s = evaluate_lex(&f, g).map_err(err)?.sign();
            if in_lineality {
                ensure(s == 0, format!("φ ≠ 0 on lineality generator {g:?}"))?;
            } else {
                ensure(s > 0, format!("φ not strictly positive on {g:?}"))?;
            }
        }
        // a random point of the cone is never negative
        let combo: Vec<Rational> = (0..dim)
            .map(|i| gens.iter().enumerate().map(|(j, g)| &g[i] * rint(j as i64 % 3 + 1)).sum())
            .collect();
        ensure(evaluate_lex(&f, &combo).map_err(err)?.sign() >= 0, "φ negative inside the cone")?;
        done += 1;
    }
    Ok(())
}

// 5. Δ = ½ Σ c(s)*c(s)
fn criterion_5() -> Check {
    let f2 = AlgebraSpec::free(2);
    let s = f2.symmetric_generators();
    ensure(s.len() == 4, "|S| ≠ 4")?;
    let mut cert = SosCertificate::new(laplacian(&f2, &s).map_err(err)?, Mode::Augmentation);
    for w in &s {
        cert.push(rat(1, 2), c_of(&f2, w));
    }
    ensure(verify_certificate(&cert), "certificate rejected")
}

fn nonzero_squares(c: &SosCertificate) -> Vec<(Rational, AlgebraElement)> {
    c.squares
        .iter()
        .filter(|(w, a)| !w.is_zero() && !a.is_zero())
        .cloned()
        .collect()
}

// 6. bounded-element certificates
fn criterion_6() -> Check {
    let f1 = AlgebraSpec::free(1);
    let a = AlgebraElement::from_int_terms(&f1, &[("", 1), ("a", 1)]).map_err(err)?;
    let c = lemma_bounded_certificate(&a, &rint(4)).map_err(err)?;
    ensure(verify_certificate(&c), "certificate for 4 − a*a rejected")?;
    let one_minus_g = AlgebraElement::from_int_terms(&f1, &[("", 1), ("a", -1)]).map_err(err)?;
    let target = one_minus_g.involution().multiply(&one_minus_g).map_err(err)?;
    ensure(c.target == target, "target differs from (1−g)*(1−g)")?;
    let sq = nonzero_squares(&c);
    ensure(sq.len() == 1, format!("{} squares", sq.len()))?;
    let (w, s) = &sq[0];
    ensure(
        s.involution().multiply(s).map_err(err)?.scale(w) == target,
        "single square is not a multiple of (1−g)*(1−g)",
    )?;

    let f2 = AlgebraSpec::free(2);
    let words = f2.ball(2);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let mut a = AlgebraElement::zero(&f2);
        for _ in 0..rng.gen_range(1..=4) {
            let w = words[rng.gen_range(0..words.len())].clone();
            a.add_term(w, creal(rat(rng.gen_range(-6..=6), rng.gen_range(1..=4))));
        }
        let lambda = a.l1_norm_sq_bound();
        let c = lemma_bounded_certificate(&a, &lambda).map_err(err)?;
        ensure(verify_certificate(&c), "random bounded certificate rejected")?;
    }
    Ok(())
}

// 7. interior shift of g + g⁻¹ by 2
fn criterion_7() -> Check {
    let f1 = AlgebraSpec::free(1);
    let b = AlgebraElement::from_int_terms(&f1, &[("a", 1), ("A", 1)]).map_err(err)?;
    let basis = GramBasis::with_radius(&f1, Mode::Full, 1);
    let c = interior_shift_certificate(&b, &rint(2), &basis).map_err(err)?;
    let shifted = AlgebraElement::from_int_terms(&f1, &[("", 2), ("a", 1), ("A", 1)]).map_err(err)?;
    ensure(c.target == shifted, "certificate target is not b + 2")?;
    ensure(verify_certificate(&c), "certificate rejected")
}

// 8. C·Δ ± b in Σ²ω
fn criterion_8() -> Check {
    let f2 = AlgebraSpec::free(2);
    let s = f2.symmetric_generators();
    let nu = nu_table(&f2, &s, 2);
    let word = |t: &str| f2.parse_word(t).unwrap();
    ensure(nu[&word("a")] == rint(2) && nu[&word("ab")] == rint(8), "ν values differ from 2 and 8")?;
    let ca = c_of(&f2, &word("a"));
    let cb = c_of(&f2, &word("b"));
    let b = (&ca.involution() * &cb).try_add(&(&cb.involution() * &ca)).map_err(err)?;
    let cap = laplacian_bound(&b, &s).map_err(err)?;
    let delta = standard_laplacian(&f2);
    let basis = GramBasis::with_radius(&f2, Mode::Augmentation, 1);
    for sign in [1, -1] {
        let target = b.scale(&rint(sign));
        let (c, cert) = delta_interior_shift(&target, &basis).map_err(err)?;
        ensure(c <= cap, format!("C = {c} exceeds the cap {cap}"))?;
        ensure(cert.mode == Mode::Augmentation, "certificate not in augmentation mode")?;
        let expected = delta.scale(&c).try_add(&target).map_err(err)?;
        ensure(cert.target == expected, "certificate target is not C·Δ ± b")?;
        ensure(verify_certificate(&cert), "certificate rejected")?;
    }
    Ok(())
}

// 9. ℤ/3: ε = 3 and Δ + 1.4·b ∈ Σ²ω for ‖b‖₁ = 1
fn criterion_9() -> Check {
    let z3 = AlgebraSpec::finite(FiniteGroup::cyclic(3));
    let s = z3.symmetric_generators();
    let k = kazhdan_constant_finite(&z3, &s).map_err(err)?;
    ensure(k.exact == Some(rint(3)), format!("ε = {k:?}"))?;
    let delta = laplacian(&z3, &s).map_err(err)?;
    let (e, g, g2) = (z3.identity(), s[0].clone(), s[1].clone());
    let basis = GramBasis::with_radius(&z3, Mode::Augmentation, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        // u on the unit circle with rational coordinates
        let t = rat(rng.gen_range(-20..=20), rng.gen_range(1..=7));
        let d = rint(1) + &t * &t;
        let u = CRational::new((rint(1) - &t * &t) / &d, rint(2) * &t / &d);
        let mut b = AlgebraElement::zero(&z3);
        b.add_term(g.clone(), u.clone());
        b.add_term(g2.clone(), u.conj());
        b.add_term(e.clone(), creal(-rint(2) * &u.re));
        let b = b.scale(&(rint(1) / b.l1_norm_bound()));
        let b = if rng.gen_bool(0.5) { b.neg() } else { b };
        ensure(b.is_hermitian() && b.augmentation().is_zero(), "b is not a hermitian element of ω")?;
        ensure(b.l1_norm_bound() == rint(1), "certified ‖b‖₁ bound is not 1")?;
        let target = delta.try_add(&b.scale(&rat(7, 5))).map_err(err)?;
        let cert = certify_sos(&target, &basis).map_err(err)?;
        ensure(cert.mode == Mode::Augmentation, "certificate not in augmentation mode")?;
        ensure(cert.target == target && verify_certificate(&cert), "certificate rejected")?;
    }
    Ok(())
}

fn character_functional(spec: &std::sync::Arc<AlgebraSpec>, radius: usize, value: i64) -> BTreeMap<Word, CRational> {
    spec.ball(radius)
        .into_iter()
        .map(|w| {
            let k: i64 = w.0.iter().map(|&l| l.signum() as i64).sum();
            (w, creal(rint(value.pow(k.unsigned_abs() as u32))))
        })
        .collect()
}

fn free2_refutation_fixtures(f2: &std::sync::Arc<AlgebraSpec>) -> Vec<AlgebraElement> {
    let t = |terms: &[(&str, i64)]| AlgebraElement::from_int_terms(f2, terms).unwrap();
    let mut skew = t(&[("b", 1), ("B", 1)]);
    skew.add_term(f2.parse_word("a").unwrap(), cint(0, 1));
    skew.add_term(f2.parse_word("A").unwrap(), cint(0, -1));
    vec![
        standard_laplacian(f2).neg(),
        t(&[("a", 1), ("A", 1)]),
        t(&[("b", 1), ("B", 1)]),
        t(&[("a", 1), ("A", 1), ("b", 1), ("B", 1)]),
        t(&[("ab", 1), ("BA", 1)]),
        t(&[("", 1), ("a", 2), ("A", 2)]),
        t(&[("aa", 1), ("AA", 1)]),
        t(&[("", -1), ("ab", 1), ("BA", 1), ("b", -1), ("B", -1)]),
        t(&[("", 3), ("a", -2), ("A", -2), ("b", -2), ("B", -2)]),
        skew,
    ]
}

// 10. unitary witnesses
fn criterion_10() -> Check {
    let f1 = AlgebraSpec::free(1);
    let b = standard_laplacian(&f1).neg();
    let basis = f1.ball(2);
    let phi = DualWitness::new(&f1, Mode::Full, basis, character_functional(&f1, 4, -1), &b).map_err(err)?;
    let w = refutation_witness(&b, &phi).map_err(err)?;
    ensure((w.value + 4.0).abs() <= 1e-8, format!("value {}", w.value))?;
    ensure(w.max_unitarity_residual() <= UNITARITY_TOLERANCE, "unitarity residual too large")?;
    ensure(w.verify(), "witness rejected")?;
    let path = std::env::temp_dir().join(format!("ncsos_acceptance_{}.json", std::process::id()));
    std::fs::write(&path, ncsos::json::to_pretty(&ncsos::json::witness_to_json(&w))).map_err(err)?;
    let status = Command::new(env!("CARGO_BIN_EXE_ncsos"))
        .arg("verify")
        .arg(&path)
        .output()
        .map_err(err)?
        .status;
    let _ = std::fs::remove_file(&path);
    ensure(status.code() == Some(0), "`verify` rejected the replay")?;

    let f2 = AlgebraSpec::free(2);
    let basis = GramBasis::with_radius(&f2, Mode::Full, 2);
    for (i, b) in free2_refutation_fixtures(&f2).iter().enumerate() {
        let SosVerdict::Refuted(phi) = decide_sos(b, &basis).map_err(err)? else {
            return Err(format!("fixture {i} was certified"));
        };
        let w = refutation_witness(b, &phi).map_err(|e| format!("fixture {i}: {e:?}"))?;
        ensure(w.verify(), format!("fixture {i}: witness rejected"))?;
        ensure(w.value < -1e-3, format!("fixture {i}: value {}", w.value))?;
    }
    Ok(())
}

// 11. hermitian free *-algebra
fn criterion_11() -> Check {
    let h = AlgebraSpec::free_star(1, true);
    let z = AlgebraElement::parse_word(&h, "a").map_err(err)?;
    let phi = DualWitness::new(&h, Mode::Full, h.ball(2), character_functional(&h, 4, -1), &z).map_err(err)?;
    ensure(phi.verify(&z), "point evaluation at −1 rejected as dual witness")?;
    let w = refutation_witness(&z, &phi).map_err(err)?;
    ensure(w.state.len() == 1, format!("witness dimension {}", w.state.len()))?;
    ensure(w.value == -1.0, format!("value {}", w.value))?;
    ensure(w.verify(), "witness rejected")?;

    let basis = GramBasis::with_radius(&h, Mode::Full, 1);
    ensure(
        matches!(decide_sos(&z, &basis).map_err(err)?, SosVerdict::Refuted(_)),
        "z was not refuted",
    )?;
    let z2 = z.multiply(&z).map_err(err)?;
    let cert = certify_sos(&z2, &basis).map_err(err)?;
    ensure(verify_certificate(&cert), "certificate for z² rejected")
}

// 12. agreement with sampled characters on free(1)
fn criterion_12() -> Check {
    let f1 = AlgebraSpec::free(1);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut certified, mut refuted) = (0, 0);
    for case in 0..100 {
        let deg = rng.gen_range(1..=4usize);
        let mut b = AlgebraElement::zero(&f1);
        let mut coeffs = vec![(0.0, 0.0); deg + 1];
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            let z = CRational::new(rat(rng.gen_range(-4..=4), 2), rat(rng.gen_range(-4..=4), 2));
            let w = Word(vec![1; k]);
            let ws = Word(vec![-1; k]);
            *c = (ncsos::scalar::to_f64(&z.re), ncsos::scalar::to_f64(&z.im));
            b.add_term(ws, z.conj());
            b.add_term(w, z);
        }
        let b0 = rat(rng.gen_range(0..=24), 2);
        coeffs[0] = (ncsos::scalar::to_f64(&b0), 0.0);
        b.add_term(f1.identity(), creal(b0));
        if b.degree() == 0 {
            continue;
        }
        // b(θ) = b₀ + 2 Re Σ_k b_k e^{ikθ}
        let min = (0..360)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / 360.0;
                coeffs.iter().enumerate().fold(0.0, |acc, (k, &(re, im))| {
                    let (c, s) = ((k as f64 * th).cos(), (k as f64 * th).sin());
                    if k == 0 {
                        acc + re
                    } else {
                        acc + 2.0 * (re * c - im * s)
                    }
                })
            })
            .fold(f64::INFINITY, f64::min);
        if min.abs() <= 1e-3 {
            continue;
        }
        let basis = GramBasis::with_radius(&f1, Mode::Full, b.degree().div_ceil(2));
        let verdict = decide_sos(&b, &basis).map_err(|e| format!("case {case}: {e:?}"))?;
        match verdict {
            SosVerdict::Certified(c) => {
                ensure(min > 0.0, format!("case {case}: certified but sampled min {min}"))?;
                ensure(verify_certificate(&c), format!("case {case}: certificate rejected"))?;
                certified += 1;
            }
            SosVerdict::Refuted(phi) => {
                ensure(min < 0.0, format!("case {case}: refuted but sampled min {min}"))?;
                ensure(phi.verify(&b), format!("case {case}: dual witness rejected"))?;
                refuted += 1;
            }
        }
    }
    ensure(
        certified >= 10 && refuted >= 10,
        format!("unbalanced sample: {certified} certified, {refuted} refuted"),
    )
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, name: "derivative functional and Cauchy-Schwarz excess", limit: secs(1), run: criterion_1 },
        Criterion { id: 2, name: "2x2 matrix with determinant -4e^2", limit: secs(1), run: criterion_2 },
        Criterion { id: 3, name: "full series positive on squares, not 2-positive", limit: secs(5), run: criterion_3 },
        Criterion { id: 4, name: "randomized lexicographic separation", limit: secs(60), run: criterion_4 },
        Criterion { id: 5, name: "Laplacian as half sum of squares", limit: secs(1), run: criterion_5 },
        Criterion { id: 6, name: "bounded element certificates", limit: secs(10), run: criterion_6 },
        Criterion { id: 7, name: "interior shift of g + g^-1", limit: secs(5), run: criterion_7 },
        Criterion { id: 8, name: "Laplacian shift of c(a)*c(b) + c(b)*c(a)", limit: secs(120), run: criterion_8 },
        Criterion { id: 9, name: "Z/3 spectral gap and shifted certificates", limit: secs(60), run: criterion_9 },
        Criterion { id: 10, name: "unitary refutation witnesses", limit: secs(60), run: criterion_10 },
        Criterion { id: 11, name: "hermitian free *-algebra", limit: secs(5), run: criterion_11 },
        Criterion { id: 12, name: "agreement with character sampling", limit: secs(120), run: criterion_12 },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|_| {
            ensure(
                elapsed <= c.limit,
                format!("took {:.2}s, limit {}s", elapsed.as_secs_f64(), c.limit.as_secs()),
            )
        });
        match &outcome {
            Ok(()) => println!("criterion {:>2} PASS {:>8.3}s  {}", c.id, elapsed.as_secs_f64(), c.name),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} FAIL {:>8.3}s  {}: {e}", c.id, elapsed.as_secs_f64(), c.name)
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

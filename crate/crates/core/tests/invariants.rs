use std::f64::consts::PI;

use lelong::estimators::{integrability_verdict, AnnulusSchedule, SampleBank};
use lelong::eval::{eval, real_point, EvalOptions, Evaluator};
use lelong::expr::{AffineMap, RadialProfile};
use lelong::geometry::{canonicalize, lct_exact, lelong_exact, ord_at, NewtonPolyhedron};
use lelong::rational::{int, rat, ExtRational, Rational};
use lelong::verify::levelset_generators;
use lelong::{make_phi_k, pullback_difference, tower_pullback, Polynomial, PshExpr};
use num_complex::Complex64;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn point(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c64(a, b)), n)
}

fn exponents(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(0i64..4, n).prop_filter("not all zero", |e| e.iter().any(|&x| x > 0))
}

/// Monomial-class expression in `n` variables: a max or sum of up to three monomials, maybe scaled.
fn monomial_expr(n: usize) -> impl Strategy<Value = PshExpr> {
    (
        prop::collection::vec(exponents(n), 1..=3),
        0u8..3,
        prop::option::of((1i64..5, 1i64..4)),
    )
        .prop_map(|(gens, shape, factor)| {
            let kids: Vec<PshExpr> = gens.iter().map(|g| PshExpr::monomial(g)).collect();
            let e = match shape {
                0 => PshExpr::max(kids).unwrap(),
                1 => PshExpr::sum(kids).unwrap(),
                _ => kids.into_iter().next().unwrap(),
            };
            match factor {
                Some((p, q)) => PshExpr::scaled(rat(p, q), e).unwrap(),
                None => e,
            }
        })
}

fn finite(e: &ExtRational) -> Rational {
    e.finite().cloned().expect("finite value")
}

fn quick_schedule() -> AnnulusSchedule {
    AnnulusSchedule {
        samples_per_annulus: 512,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn max_dominates_its_children(a in exponents(2), b in exponents(2), z in point(2)) {
        let opts = EvalOptions::default();
        let (ea, eb) = (PshExpr::monomial(&a), PshExpr::monomial(&b));
        let m = PshExpr::max(vec![ea.clone(), eb.clone()]).unwrap();
        let vm = eval(&m, &z, &opts).unwrap();
        prop_assert!(vm >= eval(&ea, &z, &opts).unwrap());
        prop_assert!(vm >= eval(&eb, &z, &opts).unwrap());
    }

    #[test]
    fn evaluation_is_deterministic(e in monomial_expr(2), z in point(2), seed in 0u64..1000) {
        let opts = EvalOptions { seed, ..Default::default() };
        let phi1 = make_phi_k(&e, 1).unwrap();
        let mut zw = z.clone();
        zw.extend([c64(0.1, 0.2), c64(-0.3, 0.05)]);
        let a = eval(&phi1, &zw, &opts).unwrap();
        let b = eval(&phi1, &zw, &opts).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn scaling_laws(e in monomial_expr(2), p in 1i64..6, q in 1i64..6) {
        let o = vec![Complex64::zero(); 2];
        let lambda = rat(p, q);
        let scaled = PshExpr::scaled(lambda.clone(), e.clone()).unwrap();
        let nu = finite(lelong_exact(&e, &o).unwrap().exact_value().unwrap());
        let nu_s = finite(lelong_exact(&scaled, &o).unwrap().exact_value().unwrap());
        prop_assert_eq!(nu_s, &nu * &lambda);
        let c = lct_exact(&e, &o).unwrap().exact_value().unwrap().clone();
        let c_s = lct_exact(&scaled, &o).unwrap().exact_value().unwrap().clone();
        prop_assert_eq!(c_s, c.scale(&lambda.recip()));
    }

    #[test]
    fn skoda_bounds_hold_exactly(e in monomial_expr(3)) {
        let o = vec![Complex64::zero(); 3];
        let nu = lelong_exact(&e, &o).unwrap().exact_value().unwrap().clone();
        let c = lct_exact(&e, &o).unwrap().exact_value().unwrap().clone();
        let lower = nu.recip();
        let upper = lower.scale(&int(3));
        prop_assert!(finite(&lower) <= finite(&c), "{nu:?} {c:?}");
        prop_assert!(finite(&c) <= finite(&upper), "{nu:?} {c:?}");
    }

    #[test]
    fn dominated_generators_are_redundant(
        gens in prop::collection::vec(exponents(3), 1..4),
        pick in 0usize..4,
        shift in prop::collection::vec(0i64..3, 3),
        (wp, wq) in (1i64..4, 1i64..4),
    ) {
        let to_rat = |g: &[i64]| g.iter().map(|&x| int(x)).collect::<Vec<_>>();
        let base: Vec<Vec<Rational>> = gens.iter().map(|g| to_rat(g)).collect();
        let p = NewtonPolyhedron::new(3, base.clone()).unwrap();
        let mut more = base.clone();
        // a generator shifted into the orthant
        let g = &base[pick % base.len()];
        more.push(g.iter().zip(&shift).map(|(a, s)| a + int(*s)).collect());
        // a convex combination of two generators
        let h = &base[(pick + 1) % base.len()];
        let t = rat(wp.min(wq), wp.max(wq));
        more.push(g.iter().zip(h).map(|(a, b)| a * &t + b * (int(1) - &t)).collect());
        let q = NewtonPolyhedron::new(3, more).unwrap();
        prop_assert_eq!(p.lct_at_origin(), q.lct_at_origin());
        prop_assert_eq!(p.min_degree(), q.min_degree());
        prop_assert_eq!(p.pruned().lct_at_origin(), p.lct_at_origin());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn symmetrized_pullback_dominates_the_tower(e in monomial_expr(1), z in point(1), w in point(1)) {
        let opts = EvalOptions::default();
        let tower = tower_pullback(&e, 1).unwrap();
        let phi1 = make_phi_k(&e, 1).unwrap();
        let zw: Vec<Complex64> = z.iter().chain(&w).copied().collect();
        let t = eval(&tower, &zw, &opts).unwrap();
        let s = eval(&phi1, &zw, &opts).unwrap();
        prop_assert!(s >= t - 1e-12 * t.abs().max(1.0), "sup {s} < tower {t}");
        // rotating w does not change the supremum
        let rotated: Vec<Complex64> = z.iter().copied().chain(w.iter().map(|x| x * Complex64::from_polar(1.0, 1.234))).collect();
        let s2 = eval(&phi1, &rotated, &opts).unwrap();
        prop_assert!((s - s2).abs() <= 1e-8 * s.abs().max(1.0), "{s} vs {s2}");
    }

    #[test]
    fn circle_grid_refines_monotonically(e in monomial_expr(1), z in point(1), w in point(1)) {
        let tower = tower_pullback(&e, 1).unwrap();
        let phi1 = make_phi_k(&e, 1).unwrap();
        let opts = EvalOptions::default();
        let ev = Evaluator::new(&phi1, &opts);
        let mut last = f64::NEG_INFINITY;
        for g in [8usize, 16, 32, 64, 128] {
            let (v, _) = ev.circle_grid_max(&tower, &z, w[0], g);
            prop_assert!(v >= last - 1e-12);
            last = v;
        }
        let zw: Vec<Complex64> = z.iter().chain(&w).copied().collect();
        let refined = ev.eval(&zw).unwrap();
        prop_assert!(refined >= last - 1e-9);
        let (coarse, _) = ev.circle_grid_max(&tower, &z, w[0], 1024);
        prop_assert!((refined - coarse).abs() <= 1e-3 * refined.abs().max(1.0), "{refined} vs {coarse}");
    }
}

#[test]
fn pullback_at_the_diagonal_origin_is_the_function() {
    let opts = EvalOptions::default();
    let f = PshExpr::max(vec![PshExpr::monomial(&[2, 1]), PshExpr::monomial(&[0, 3])]).unwrap();
    let p = pullback_difference(&f);
    let phi1 = make_phi_k(&f, 1).unwrap();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..100 {
        let z = point(2).new_tree(&mut runner).unwrap().current();
        let base = eval(&f, &z, &opts).unwrap();
        let mut zw = z.clone();
        zw.extend([Complex64::zero(); 2]);
        for g in [&p, &phi1] {
            // w = 0 is fixed by every unitary, so both reduce to phi(z - 0)
            let v = eval(g, &zw, &opts).unwrap();
            assert!((v - base).abs() <= 1e-12 * base.abs().max(1.0), "{v} vs {base}");
        }
    }
}

/// `n × d` map with orthogonal columns of length `λ`.
fn conformal_map(n: usize, d: usize, lambda: f64, seed: u64) -> AffineMap {
    let mut state = seed;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    for _ in 0..d {
        let mut v: Vec<Complex64> = (0..n).map(|_| c64(next(), next())).collect();
        for q in &cols {
            let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    let matrix = (0..n)
        .flat_map(|r| cols.iter().map(move |c| c[r] * lambda).collect::<Vec<_>>())
        .collect();
    AffineMap::linear(n, d, matrix).unwrap()
}

#[test]
fn radial_recognizer_agrees_with_direct_evaluation() {
    let opts = EvalOptions::default();
    let profile = RadialProfile::new(3, vec![(-2.0, -7.0), (-0.5, -1.0)], int(3)).unwrap();
    let radial = PshExpr::Radial(profile);
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for (d, lambda, seed) in [(1, 0.7, 1u64), (2, 1.9, 2), (2, 1.0, 3)] {
        let pulled = PshExpr::pullback(conformal_map(3, d, lambda, seed), radial.clone()).unwrap();
        let canon = canonicalize(&pulled).unwrap();
        assert!(matches!(canon, PshExpr::Radial(_)), "{canon:?}");
        for _ in 0..1000 / 3 + 1 {
            let x = point(d).new_tree(&mut runner).unwrap().current();
            let a = eval(&pulled, &x, &opts).unwrap();
            let b = eval(&canon, &x, &opts).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b} at {x:?}");
        }
        let o = vec![Complex64::zero(); d];
        assert_eq!(lelong_exact(&pulled, &o).unwrap().exact_value(), Some(&ExtRational::Finite(int(3))));
    }
}

#[test]
fn level_sets_match_vanishing_orders() {
    // (z1 - 1/2)^2 z2 (1 + z1 z2)
    let c = |x: f64| c64(x, 0.0);
    let l = Polynomial::from_terms(2, [(vec![1, 0], c(1.0)), (vec![0, 0], c(-0.5))]).unwrap();
    let g = Polynomial::from_terms(2, [(vec![0, 0], c(1.0)), (vec![1, 1], c(1.0))]).unwrap();
    let f = l.pow(2).mul(&Polynomial::variable(2, 1)).mul(&g);
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let dyadic = (-16i32..=16).prop_map(|k| k as f64 / 8.0);
    for level in [1.0, 2.0, 2.5, 3.0] {
        let set = levelset_generators(&f, level).unwrap();
        let mut hits = 0;
        for i in 0..200 {
            let mut x = dyadic.new_tree(&mut runner).unwrap().current();
            let mut y = dyadic.new_tree(&mut runner).unwrap().current();
            match i % 4 {
                0 => x = 0.5,
                1 => y = 0.0,
                2 => (x, y) = (0.5, 0.0),
                _ => {}
            }
            let p = real_point(&[x, y]);
            let inside = set.contains(&p).unwrap();
            hits += inside as usize;
            assert_eq!(inside, ord_at(&f, &p).unwrap() >= set.order, "level {level} at {p:?}");
        }
        assert!(level > 3.0 || hits > 0);
    }
}

#[test]
fn annulus_integrals_add_up_to_the_disk() {
    // ∫_{a<|z|<=b} |z|^{-2c} dA = 2π (b^{2-2c} - a^{2-2c}) / (2 - 2c)
    let schedule = AnnulusSchedule {
        samples_per_annulus: 4096,
        annuli: 10,
        ..Default::default()
    };
    let e = PshExpr::monomial(&[1]);
    for c in [0.3, 0.5, 0.8] {
        let fit = integrability_verdict(&e, c, &[Complex64::zero()], &schedule).unwrap();
        let exact = |a: f64, b: f64| 2.0 * PI * (b.powf(2.0 - 2.0 * c) - a.powf(2.0 - 2.0 * c)) / (2.0 - 2.0 * c);
        let mut total = 0.0;
        for cell in &fit.annuli {
            let b = cell.radius;
            let want = exact(b / 2.0, b);
            assert!((cell.i_hat() - want).abs() <= 0.02 * want, "c={c} j={}: {} vs {want}", cell.j, cell.i_hat());
            total += cell.i_hat();
        }
        let outer = schedule.r0;
        let inner = outer * 0.5f64.powi(schedule.annuli as i32);
        let want = exact(inner, outer);
        assert!((total - want).abs() <= 0.01 * want, "c={c}: {total} vs {want}");
    }
}

#[test]
fn cell_integrals_grow_with_the_exponent() {
    let schedule = quick_schedule();
    let exprs = [
        (PshExpr::monomial(&[1]), vec![Complex64::zero()]),
        (PshExpr::monomial(&[2, 1]), vec![Complex64::zero(); 2]),
        (
            PshExpr::max(vec![PshExpr::monomial(&[1, 0]), PshExpr::monomial(&[0, 1])]).unwrap(),
            vec![Complex64::zero(); 2],
        ),
    ];
    for (e, o) in &exprs {
        let bank = SampleBank::build(e, o, &schedule).unwrap();
        let cs = [0.1, 0.3, 0.5, 0.9, 1.4, 2.2];
        let fits: Vec<_> = cs.iter().map(|&c| bank.verdict(c, &schedule).unwrap()).collect();
        for w in fits.windows(2) {
            for (ra, rb) in w[0].rays.iter().zip(&w[1].rays) {
                for (a, b) in ra.annuli.iter().zip(&rb.annuli) {
                    // samples lie in the unit polydisk, so φ < 0 and e^{-2cφ} grows with c
                    assert!(b.log2_i_hat >= a.log2_i_hat - 1e-12, "{a:?} {b:?}");
                }
            }
        }
    }
}

#[test]
fn estimators_are_reproducible() {
    let schedule = quick_schedule();
    let e = PshExpr::max(vec![PshExpr::monomial(&[2, 1]), PshExpr::monomial(&[0, 3])]).unwrap();
    let o = vec![Complex64::zero(); 2];
    let a = serde_json::to_string(&integrability_verdict(&e, 0.6, &o, &schedule).unwrap()).unwrap();
    let b = serde_json::to_string(&integrability_verdict(&e, 0.6, &o, &schedule).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = serde_json::to_string(&integrability_verdict(&e, 0.6, &o, &schedule.clone().with_seed(7)).unwrap()).unwrap();
    assert_ne!(a, other);
}

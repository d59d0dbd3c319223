use eqloc::exact::{self, q, qf, qv, QVec, Q};
use eqloc::localization::*;
use eqloc::measure::{QuadSpec, SampleSpec, TestFunction};
use eqloc::{build_root_system, Measure, Normalization, RootKind, RootSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn su2() -> RootSystem {
    build_root_system(RootKind::A1, Normalization::Su2).unwrap()
}

fn a2() -> RootSystem {
    build_root_system(RootKind::A2, Normalization::Basic).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn random_q(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Q {
    // odd denominators keep the samples off the integer walls
    qf(rng.random_range(lo * 97..hi * 97), 97)
}

#[test]
fn p1_chambers_give_the_uniform_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (a, b) in [(-1, 2), (-3, 5), (2, 7), (-6, -1), (0, 1)] {
        for ch in [Chamber::Plus, Chamber::Minus] {
            let m = weighted_p1_dh(a, b, ch).unwrap();
            for _ in 0..50 {
                let x = random_q(&mut rng, a - 3, b + 3);
                let want = if x > q(a) && x < q(b) { qf(1, b - a) } else { q(0) };
                assert_eq!(m.density_at(std::slice::from_ref(&x)).unwrap(), want, "({a},{b}) {ch:?} at {x}");
            }
        }
    }
    assert!(weighted_p1_dh(2, 2, Chamber::Plus).is_err());
    assert!("0".parse::<Chamber>().is_err());
}

#[test]
fn p1_gaussian_pairing_against_quadrature() {
    let quad = QuadSpec::default();
    for (a, b, eps, c) in [(-1, 2, 1.0, 0.0), (-3, 5, 0.3, 1.5), (1, 4, 2.0, -0.5)] {
        let m = weighted_p1_dh(a, b, Chamber::Minus).unwrap();
        let v = m.pair_test(&TestFunction::gaussian(eps, vec![c]), &quad).unwrap();
        let w = 1.0 / (b - a) as f64;
        let direct = simpson(|x| w * (-eps * (x - c) * (x - c) / 2.0).exp(), a as f64, b as f64, 4000);
        assert!((v.value - direct).abs() <= 1e-10, "{} vs {direct}", v.value);
    }
}

#[test]
fn a1_orbit_is_archimedes() {
    // pushforward of the normalized area on a sphere of radius r to an axis is uniform on [-r, r]
    for r in [qf(1, 2), q(1), qf(7, 3)] {
        let m = coadjoint_dh_t(&su2(), std::slice::from_ref(&r), &[q(1)]).unwrap();
        for k in -25..25 {
            let x = &r * qf(2 * k + 1, 38);
            let want = if x.clone() * x.clone() < &r * &r { (q(2) * &r).recip() } else { q(0) };
            assert_eq!(m.density_at(&[x]).unwrap(), want);
        }
        let other = coadjoint_dh_t(&su2(), std::slice::from_ref(&r), &[q(-3)]).unwrap();
        assert!(m.equal(&other, &SampleSpec::cube(1, 5, 30, 2)).unwrap());
    }
    assert!(coadjoint_dh_t(&su2(), &[q(-1)], &[q(1)]).is_err());
    assert!(coadjoint_dh_t(&su2(), &[q(1)], &[q(0)]).is_err());
}

#[test]
fn a2_orbit_mass_and_support() {
    let rs = a2();
    let lambda = qv(&[1, 1]);
    let m = coadjoint_dh_t(&rs, &lambda, &qv(&[2, 1])).unwrap();
    let other = coadjoint_dh_t(&rs, &lambda, &qv(&[-1, 3])).unwrap();
    assert!(m.equal(&other, &SampleSpec::cube(2, 4, 60, 5)).unwrap());
    // outside the hexagon with vertices W(1, 1) the density vanishes
    let far = [qv(&[3, 0]), qv(&[-2, -2]), qv(&[0, 5]), qv(&[4, -1]), qv(&[-5, 1])];
    let mut seen = 0;
    for x in far.iter().map(|x| exact::add(x, &[qf(1, 7), qf(1, 11)])) {
        if !m.is_on_wall(&x) {
            assert_eq!(m.density_at(&x).unwrap(), q(0));
            seen += 1;
        }
    }
    assert!(seen >= 3);
    // Gaussian with huge width: the pairing tends to the total mass 1
    let v = m.pair_test(&TestFunction::gaussian(1e-9, vec![0.0, 0.0]), &QuadSpec::default()).unwrap();
    assert!((v.value - 1.0).abs() < 5.0 * v.std_error + 1e-6, "{v:?}");
}

#[test]
fn a1_abelian_to_nonabelian_pairing() {
    let rs = su2();
    let quad = QuadSpec::default();
    for (lam, eps) in [(q(1), 0.25), (q(1), 1.0), (qf(3, 2), 0.5), (q(2), 2.0), (qf(1, 3), 4.0)] {
        let mu_t = coadjoint_dh_t(&rs, std::slice::from_ref(&lam), &[q(1)]).unwrap();
        let k = abelian_to_nonabelian(&rs, &mu_t).unwrap();
        let got = k.pair(&invariant_gaussian(&rs, eps), &quad).unwrap().value;
        let l = exact::to_f64(&lam);
        let direct = (-eps * l * l / 2.0).exp();
        assert!(((got - direct) / direct).abs() <= 1e-6, "lambda {lam} eps {eps}: {got} vs {direct}");
        // second route: (1/2) (mu_T, d/dx (2x h)) by quadrature over the uniform density
        let dx = |x: f64| 2.0 * (1.0 - eps * x * x) * (-eps * x * x / 2.0).exp();
        let route = 0.5 * simpson(|x| dx(x) / (2.0 * l), -l, l, 2000);
        assert!(((route - direct) / direct).abs() <= 1e-9);
        // the unnormalized localization sum misses the identity
        let raw = coadjoint_dh_t_raw(&rs, std::slice::from_ref(&lam), &[q(1)]).unwrap();
        let wrong = abelian_to_nonabelian(&rs, &raw).unwrap().pair(&invariant_gaussian(&rs, eps), &quad).unwrap().value;
        assert!(((wrong - direct) / direct).abs() > 0.1);
    }
    assert!(abelian_to_nonabelian(&rs, &Measure::zero(1)).unwrap().base.is_zero());
}

#[test]
fn induction_pairings() {
    let rs = a2();
    let quad = QuadSpec::default();
    let lambda = qv(&[2, 1]);
    let h = invariant_gaussian(&rs, 0.7);
    let ind = induce(&rs, &Measure::delta(lambda.clone())).unwrap();
    let got = ind.pair(&h, &quad).unwrap();
    let r2 = exact::to_f64(&rs.norm_sq(&lambda));
    let want = exact::to_f64(&rs.vol_poly().eval(&lambda)) * (-0.7 * r2 / 2.0).exp();
    assert!((got.value - want).abs() < 1e-12);
    assert_eq!(ind.base, Measure::delta(lambda.clone()));
    // a W-invariant measure pairs to zero
    let orbit: Vec<Measure> = rs.weyl_orbit(&lambda).into_iter().map(Measure::delta).collect();
    let sym = Measure::sum(2, &orbit).unwrap();
    let z = induce(&rs, &sym).unwrap().pair(&h, &quad).unwrap();
    assert!(z.value.abs() <= 3.0 * z.std_error + 1e-12, "{z:?}");
}

fn in_triangle(x: &[Q]) -> bool {
    x[0] <= q(1) && x[1] <= q(1) && &x[0] + &x[1] >= q(1)
}

fn on_triangle_edge(x: &[Q]) -> bool {
    x[0] == q(1) || x[1] == q(1) || &x[0] + &x[1] == q(1)
}

/// `|W|^{-1} sum_w sign(w) chi_P(w^{-1} x) / 9` with the Weyl group acting on omega-coordinates.
fn antisym_triangle(rs: &RootSystem, x: &[Q]) -> Option<Q> {
    let mut s = q(0);
    for w in &rs.weyl_elements {
        let inv = exact::inverse(&w.matrix).unwrap();
        let y = exact::mat_vec(&inv, x);
        if on_triangle_edge(&y) {
            return None;
        }
        if in_triangle(&y) {
            s += q(w.sign.into()) * qf(1, 9);
        }
    }
    Some(s / q(rs.weyl_order() as i64))
}

#[test]
fn g2_example() {
    let fx = g2_fixtures().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let abelian = fx.abelian_terms.antisymmetrize(&fx.a2).unwrap().scale(&qf(1, 6));
    let normsq = Measure::sum(2, fx.normsq.iter().map(|c| c.measure.torus_measure()))
        .unwrap()
        .antisymmetrize(&fx.a2)
        .unwrap();
    let mut checked = 0;
    while checked < 200 {
        let x: QVec = vec![random_q(&mut rng, -3, 3), random_q(&mut rng, -3, 3)];
        if abelian.is_on_wall(&x) || normsq.is_on_wall(&x) {
            continue;
        }
        let Some(want) = antisym_triangle(&fx.a2, &x) else { continue };
        let base = fx.expected.base.density_at(&x).unwrap();
        assert_eq!(base, if in_triangle(&x) { qf(1, 9) } else { q(0) }, "at {x:?}");
        assert_eq!(abelian.density_at(&x).unwrap(), want, "abelian at {x:?}");
        assert_eq!(normsq.density_at(&x).unwrap(), want, "normsq at {x:?}");
        checked += 1;
    }
    let spec = SampleSpec::cube(2, 4, 40, 11);
    let half = fx.halfplane.antisymmetrized().unwrap();
    let first = fx.normsq[0].measure.torus_measure().antisymmetrize(&fx.a2).unwrap();
    assert!(half.equal(&first, &spec).unwrap());
    assert_eq!(fx.normsq[0].xi, vec![qf(1, 2), qf(1, 2)]);
    assert_eq!(fx.normsq[1].xi, qv(&[1, 1]));
    // |w1|^2 = |w2|^2 = 2/3 with (w1, w2) = 1/3, so |w1| |w2| = 2/3
    assert_eq!(fx.reference_cell_volume, qf(2, 3));
    assert_eq!(fx.density_constant, qf(1, 6));
    assert_eq!(fx.g2.weyl_order(), 12);
}

#[test]
fn g2_wrong_scale_is_detected() {
    let fx = g2_fixtures().unwrap();
    let target = fx.expected.antisymmetrized().unwrap();
    let spec = SampleSpec::cube(2, 4, 40, 11);
    for c in [qf(1, 3), qf(1, 12), q(1)] {
        let wrong = fx.abelian_terms.antisymmetrize(&fx.a2).unwrap().scale(&c);
        let r = wrong.compare(&target, &spec).unwrap();
        assert!(!r.equal);
        assert!(!r.disagreements.is_empty());
    }
}

#[test]
fn p1_norm_square_strata() {
    for (a, b) in [(-1, 2), (-4, 1), (-2, 3), (1, 3), (-5, -2)] {
        let parts = normsq_strata_p1(a, b).unwrap();
        let xi: Vec<Q> = parts.iter().map(|c| c.xi[0].clone()).collect();
        if a < 0 && b > 0 {
            assert_eq!(xi, vec![q(a), q(0), q(b)]);
        } else {
            assert_eq!(xi, vec![q(a), q(b)]);
        }
        let total = Measure::sum(1, parts.iter().map(|c| c.measure.torus_measure())).unwrap();
        for k in -60..60 {
            let x = qf(2 * k + 1, 8);
            let want = if x > q(a) && x < q(b) { qf(1, b - a) } else { q(0) };
            assert_eq!(total.density_at(&[x]).unwrap(), want);
        }
    }
    assert!(normsq_strata_p1(3, 1).is_err());
    assert!(normsq_strata_p1(0, 3).is_err());
}

#[test]
fn json_round_trip_of_invariant_measures() {
    let fx = g2_fixtures().unwrap();
    let j = serde_json::to_string(&fx.expected.to_json()).unwrap();
    let back: KInvariantMeasureJson = serde_json::from_str(&j).unwrap();
    assert_eq!(Measure::from_json(&back.base).unwrap(), fx.expected.base);
    assert_eq!(RootSystem::from_json(&back.root_system).unwrap().roots, fx.a2.roots);
}

//! End-to-end acceptance checks. Runs without the libtest harness so that every criterion
//! prints one PASS/FAIL line; the process exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use eqloc::exact::{self, q, qf, qv, QVec, Q};
use eqloc::gradflow::{self, BasinOptions, FlowOptions, HomogeneousSystem, P1Model, Rate, State};
use eqloc::lie::Volume;
use eqloc::localization::{self, Chamber};
use eqloc::measure::{Hyperplane, QuadSpec};
use eqloc::par::Parallelism;
use eqloc::yangmills::{self, WittenConstant};
use eqloc::{build_root_system, Measure, Normalization, RootKind, RootSystem};
use rand::Rng;

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn su2() -> RootSystem {
    build_root_system(RootKind::A1, Normalization::Su2).unwrap()
}

fn p1_density(a: i64, b: i64, x: &Q) -> Q {
    if *x > q(a) && *x < q(b) {
        qf(1, b - a)
    } else {
        q(0)
    }
}

/// Rationals `k/7` with `k` not divisible by 7, covering `(lo, hi)`.
fn sevenths(lo: i64, hi: i64) -> impl Iterator<Item = Q> {
    (7 * lo..7 * hi).filter(|k| k % 7 != 0).map(|k| qf(k, 7))
}

fn p1_chambers() -> Result<String, String> {
    let pairs = [(-1, 2), (-1, 1), (-3, 5), (0, 1), (1, 4), (-6, -2), (-2, 7), (3, 5), (-9, 0), (-4, 4)];
    for (a, b) in pairs {
        let plus = localization::weighted_p1_dh(a, b, Chamber::Plus).map_err(|e| e.to_string())?;
        let minus = localization::weighted_p1_dh(a, b, Chamber::Minus).map_err(|e| e.to_string())?;
        for x in sevenths(a - 2, b + 2) {
            let (p, m) = (plus.density_at(std::slice::from_ref(&x)).unwrap(), minus.density_at(std::slice::from_ref(&x)).unwrap());
            let want = p1_density(a, b, &x);
            ensure(p == want && m == want, || format!("({a},{b}) at {x}: {p} / {m} vs {want}"))?;
        }
    }
    Ok(format!("{} pairs", pairs.len()))
}

fn p1_norm_square() -> Result<String, String> {
    for (a, b) in [(-1, 2), (-1, 1), (-3, 5)] {
        let parts = localization::normsq_strata_p1(a, b).map_err(|e| e.to_string())?;
        ensure(parts.len() == 3, || format!("({a},{b}): {} contributions", parts.len()))?;
        let sum = Measure::sum(1, parts.iter().map(|c| c.measure.torus_measure())).unwrap();
        let dh = localization::weighted_p1_dh(a, b, Chamber::Plus).unwrap();
        for x in sevenths(a - 2, b + 2) {
            let (s, d) = (sum.density_at(std::slice::from_ref(&x)).unwrap(), dh.density_at(std::slice::from_ref(&x)).unwrap());
            ensure(s == d && d == p1_density(a, b, &x), || format!("({a},{b}) at {x}: {s} vs {d}"))?;
        }
    }
    Ok("3 pairs".into())
}

fn side(h: &Hyperplane, x: &[Q]) -> std::cmp::Ordering {
    exact::dot(&h.normal, x).cmp(&h.offset)
}

/// One point in every chamber of a planar line arrangement that is not all parallel: each
/// chamber has a vertex, and small steps from a vertex between consecutive lines reach
/// every chamber adjacent to it.
fn chamber_representatives(walls: &[Hyperplane]) -> Vec<QVec> {
    let mut vertices: Vec<QVec> = Vec::new();
    for (i, h) in walls.iter().enumerate() {
        for g in &walls[i + 1..] {
            if let Some(v) = exact::solve_cols(&[vec![h.normal[0].clone(), g.normal[0].clone()], vec![h.normal[1].clone(), g.normal[1].clone()]], &[h.offset.clone(), g.offset.clone()]) {
                if !vertices.contains(&v) {
                    vertices.push(v);
                }
            }
        }
    }
    let mut reps: Vec<(Vec<std::cmp::Ordering>, QVec)> = Vec::new();
    for v in &vertices {
        let (through, away): (Vec<&Hyperplane>, Vec<&Hyperplane>) = walls.iter().partition(|h| h.contains(v));
        let mut dirs: Vec<QVec> = through
            .iter()
            .flat_map(|h| {
                let d = vec![-h.normal[1].clone(), h.normal[0].clone()];
                [exact::neg(&d), d]
            })
            .collect();
        dirs.sort_by(|a, b| {
            let ang = |d: &QVec| exact::to_f64(&d[1]).atan2(exact::to_f64(&d[0]));
            ang(a).total_cmp(&ang(b))
        });
        for k in 0..dirs.len() {
            let mid = exact::add(&dirs[k], &dirs[(k + 1) % dirs.len()]);
            if exact::is_zero_vec(&mid) {
                continue;
            }
            let mut t = q(1);
            let x = loop {
                let x = exact::add(v, &exact::scale(&t, &mid));
                if away.iter().all(|h| side(h, &x) == side(h, v)) {
                    break x;
                }
                t /= q(2);
            };
            let sig: Vec<_> = walls.iter().map(|h| side(h, &x)).collect();
            if !reps.iter().any(|(s, _)| *s == sig) {
                reps.push((sig, x));
            }
        }
    }
    reps.into_iter().map(|(_, x)| x).collect()
}

fn in_triangle(x: &[Q]) -> Option<bool> {
    let edges = [q(1) - &x[0], q(1) - &x[1], &x[0] + &x[1] - q(1)];
    if edges.iter().any(|e| *e == q(0)) {
        return None;
    }
    Some(edges.iter().all(|e| *e > q(0)))
}

fn g2_identity() -> Result<String, String> {
    let fx = localization::g2_fixtures().map_err(|e| e.to_string())?;
    let target = fx.expected.antisymmetrized().unwrap();
    let abelian = fx.abelian_terms.antisymmetrize(&fx.a2).unwrap().scale(&qf(1, 6));
    let normsq = Measure::sum(2, fx.normsq.iter().map(|c| c.measure.torus_measure()))
        .unwrap()
        .antisymmetrize(&fx.a2)
        .unwrap();
    let mut walls: Vec<Hyperplane> = Vec::new();
    for m in [&target, &abelian, &normsq] {
        for h in m.walls() {
            if !walls.contains(&h) {
                walls.push(h);
            }
        }
    }
    let mut points = chamber_representatives(&walls);
    let chambers = points.len();
    let mut r = common::rng(72);
    points.extend(common::points_off_walls(&mut r, &[&target, &abelian, &normsq], 2, -3, 3, 30));
    let order = q(fx.a2.weyl_order() as i64);
    for x in &points {
        let t = target.density_at(x).map_err(|e| e.to_string())?;
        let a = abelian.density_at(x).unwrap();
        let n = normsq.density_at(x).unwrap();
        ensure(a == t && n == t, || format!("at {x:?}: abelian {a}, norm-square {n}, target {t}"))?;
        // sum_w sign(w) chi_P(w^{-1} x) / (9 |W|)
        let mut oracle = Some(q(0));
        for w in &fx.a2.weyl_elements {
            let y = exact::mat_vec(&exact::inverse(&w.matrix).unwrap(), x);
            oracle = match (oracle, in_triangle(&y)) {
                (Some(s), Some(true)) => Some(s + q(w.sign.into()) * qf(1, 9) / &order),
                (Some(s), Some(false)) => Some(s),
                _ => None,
            };
        }
        if let Some(o) = oracle {
            ensure(o == t, || format!("at {x:?}: triangle oracle {o} vs {t}"))?;
        }
    }
    ensure(points.len() >= 30, || format!("only {} points", points.len()))?;
    Ok(format!("{} walls, {chambers} chambers, {} points", walls.len(), points.len()))
}

fn volume_identities() -> Result<String, String> {
    let mut r = common::rng(4);
    for kind in [RootKind::A1, RootKind::A2, RootKind::G2] {
        let rs = build_root_system(kind, Normalization::Basic).unwrap();
        for i in 0..20 {
            // some coordinates zero to reach singular orbits
            let coeffs: Vec<Q> = (0..rs.rank)
                .map(|j| if (i + j) % 5 == 4 { q(0) } else { qf(r.random_range(1..=40), r.random_range(1..=7)) })
                .collect();
            let lambda = rs
                .fundamental_weights
                .iter()
                .zip(&coeffs)
                .fold(exact::zeros(rs.rank), |acc, (w, c)| exact::add(&acc, &exact::scale(c, w)));
            let pairs: Vec<Q> = rs.positive_roots.iter().map(|a| rs.ip(a, &lambda)).filter(|p| *p != q(0)).collect();
            let prod = pairs.iter().fold(q(1), |acc, p| acc * p);
            let v = rs.orbit_volumes(&lambda).map_err(|e| e.to_string())?;
            let ratio = v.riemannian.div(&Volume::rational(v.symplectic.clone()));
            let want = Volume { coeff: prod, radicand: q(1), two_pi: pairs.len() as i32 };
            ensure(ratio == want, || format!("{kind} at {lambda:?}: {ratio} vs {want}"))?;
        }
    }
    Ok("60 weights".into())
}

fn abelian_nonabelian() -> Result<String, String> {
    let rs = su2();
    let quad = QuadSpec::default();
    let mut worst: f64 = 0.0;
    for (lam, eps) in [(q(1), 0.25), (q(1), 1.0), (qf(3, 2), 0.5), (q(2), 2.0), (qf(1, 3), 4.0)] {
        let mu_t = localization::coadjoint_dh_t(&rs, std::slice::from_ref(&lam), &[q(1)]).map_err(|e| e.to_string())?;
        let k = localization::abelian_to_nonabelian(&rs, &mu_t).map_err(|e| e.to_string())?;
        let got = k.pair(&localization::invariant_gaussian(&rs, eps), &quad).map_err(|e| e.to_string())?.value;
        // the orbit of radius lambda pairs with exp(-eps |x|^2 / 2) to its value on the sphere
        let l = exact::to_f64(&lam);
        let direct = (-eps * l * l / 2.0).exp();
        let rel = ((got - direct) / direct).abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-6, || format!("lambda {lam} eps {eps}: {got} vs {direct}"))?;
    }
    Ok(format!("max rel {worst:.1e}"))
}

fn sawtooth() -> Result<String, String> {
    let rep = yangmills::sawtooth_identity(50, q(1)).map_err(|e| e.to_string())?;
    let st = yangmills::su2_genus1_strata(50).unwrap();
    let v = st.torus_volume.clone();
    // Migdal sum for su2 at genus one: Vol(T)^2 sum_{n >= 1} exp(-n^2 / 8)
    let migdal = exact::to_f64(&v) * (1..=200).map(|n| (-((n * n) as f64) / 8.0).exp()).sum::<f64>();
    let rel = ((rep.lhs - migdal) / migdal).abs();
    ensure(rel <= 1e-6, || format!("pairing {} vs Migdal {migdal}", rep.lhs))?;
    for k in 1..50 {
        let x = qf(k, 100);
        let d = st.one_point.density_at(std::slice::from_ref(&x)).unwrap();
        let want = &v * qf(1, 4) * (q(1) - q(2) * &x);
        ensure(d == want, || format!("one-point density at {x}: {d} vs {want}"))?;
    }
    Ok(format!("rel {rel:.1e}"))
}

fn witten() -> Result<String, String> {
    let rs = su2();
    let g2 = yangmills::witten_volume(&rs, 2, 1e6, WittenConstant::Volume, Parallelism::Threads(0)).map_err(|e| e.to_string())?;
    let g3 = yangmills::witten_volume(&rs, 3, 1e6, WittenConstant::Volume, Parallelism::Threads(0)).map_err(|e| e.to_string())?;
    let (e2, e3) = ((g2.lattice_sum - PI.powi(2) / 6.0).abs(), (g3.lattice_sum - PI.powi(4) / 90.0).abs());
    ensure(e2 <= 1e-5, || format!("genus 2: {} off by {e2:e}", g2.lattice_sum))?;
    ensure(e3 <= 1e-9, || format!("genus 3: {} off by {e3:e}", g3.lattice_sum))?;
    Ok(format!("genus 2 err {e2:.1e}, genus 3 err {e3:.1e}"))
}

fn flow_rates() -> Result<String, String> {
    let opts = FlowOptions::default();
    let start = State::flat(vec![1.0, 0.0]);
    let fit = |shift: i64, t_end: f64| {
        let sys = gradflow::build_local_model(vec![vec![1]], qv(&[shift])).unwrap();
        let tr = gradflow::integrate(&sys, start.clone(), t_end, &opts).map_err(|e| e.to_string())?;
        let l = gradflow::lojasiewicz_fit(&sys, &tr).map_err(|e| e.to_string())?;
        let r = gradflow::rate_classify(&sys, &tr).map_err(|e| e.to_string())?;
        Ok::<_, String>((l.gamma, r.rate))
    };
    let (gq, rq) = fit(0, 1e4)?;
    ensure((0.70..=0.80).contains(&gq), || format!("quartic gamma {gq}"))?;
    let p = match rq {
        Rate::Power { p } if (-0.55..=-0.45).contains(&p) => p,
        other => return Err(format!("quartic rate {other:?}")),
    };
    let c = 1.0;
    let (gs, rs) = fit(1, 50.0)?;
    ensure((0.45..=0.55).contains(&gs), || format!("shifted gamma {gs}"))?;
    // |z|^2 = u with u' = -4u(c + u), so |z| ~ exp(-2 c t)
    let closed = 2.0 * c;
    let k = match rs {
        Rate::Exponential { k } if ((k - closed) / closed).abs() <= 0.1 => k,
        other => return Err(format!("shifted rate {other:?}")),
    };
    let h = HomogeneousSystem { dim: 2, degree: 6 };
    let gh = gradflow::lojasiewicz_fit_sampled(&h, &State::flat(vec![0.0, 0.0]), 1e-3, 1e-1, 200, 7)
        .map_err(|e| e.to_string())?
        .gamma;
    ensure((gh - 5.0 / 6.0).abs() <= 0.05, || format!("degree 6 gamma {gh}"))?;
    Ok(format!("p {p:.3}, gamma {gq:.3}; k {k:.3}, gamma {gs:.3}; degree 6 gamma {gh:.3}"))
}

fn basins() -> Result<String, String> {
    let m = P1Model::new(-1, 2).unwrap();
    let opts = BasinOptions { samples: 1000, par: Parallelism::Threads(0), ..BasinOptions::default() };
    let rep = gradflow::basin_classify(&m, &opts).map_err(|e| e.to_string())?;
    let zero = rep.strata.get("0").map(|s| s.count).unwrap_or(0);
    ensure(zero == 1000 && rep.unconverged == 0, || format!("{zero} of 1000 reach Phi = 0, {} unconverged", rep.unconverged))?;
    ensure(rep.max_level_error <= 1e-6, || format!("|Phi(limit)| up to {:e}", rep.max_level_error))?;
    let moduli: Vec<f64> = rep.continuity.iter().map(|c| c.modulus).collect();
    let decreasing = rep.continuity.windows(2).all(|w| w[0].delta > w[1].delta && w[0].modulus >= w[1].modulus);
    ensure(rep.continuity_monotone && decreasing, || format!("continuity moduli {moduli:?}"))?;
    Ok(format!("max |Phi| {:.1e}, moduli {moduli:.1?}", rep.max_level_error))
}

fn measure_engine() -> Result<String, String> {
    common::density_oracle_suite(20, 40_000)?;
    for seed in 0..100u64 {
        common::convolution_laws(seed).map_err(|e| format!("seed {seed}: {e}"))?;
        common::derivative_inverts_ray(seed).map_err(|e| format!("seed {seed}: {e}"))?;
        common::pointedness_violations_raise(seed).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!("{} fixtures, 100 instances", common::measure_fixtures().len()))
}

fn hn() -> Result<String, String> {
    let mut n = 0;
    for r in 1..=3u32 {
        for d in -3..=3i64 {
            for bound in 0..=4i64 {
                let mut got = yangmills::hn_types(r, d, &q(bound)).map_err(|e| e.to_string())?;
                got.sort();
                ensure(got == common::hn_brute(r, d, bound), || format!("r={r} d={d} bound={bound}"))?;
                n += got.len();
            }
        }
    }
    Ok(format!("{n} types"))
}

fn main() {
    let criteria: [(&str, u64, Check); 11] = [
        ("P1 chamber independence", 1, p1_chambers),
        ("P1 norm-square identity", 1, p1_norm_square),
        ("G2/P identity", 10, g2_identity),
        ("orbit volume identities", 1, volume_identities),
        ("abelian to nonabelian pairing", 5, abelian_nonabelian),
        ("sawtooth and one-point density", 5, sawtooth),
        ("Witten volume sums", 5, witten),
        ("gradient-flow rates", 20, flow_rates),
        ("P1 basins", 30, basins),
        ("measure engine oracle suite", 30, measure_engine),
        ("HN enumeration", 1, hn),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let r = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let dt = t0.elapsed();
        let r = r.and_then(|d| {
            ensure(dt <= Duration::from_secs(*limit), || format!("took {:.2} s, limit {limit} s", dt.as_secs_f64()))
                .map(|_| d)
        });
        let (tag, detail) = match r {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failed += 1;
                ("FAIL", e)
            }
        };
        println!("{tag} {:>2} {name} [{:.2} s / {limit} s] {detail}", i + 1, dt.as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

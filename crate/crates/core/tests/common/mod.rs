//! Test-side oracles shared by the integration targets.
#![allow(dead_code)]

use eqloc::exact::{self, q, qf, qv, QVec, Q};
use eqloc::localization::{self, Chamber};
use eqloc::yangmills::{self, HnType};
use eqloc::{build_root_system, Error, Measure, Normalization, RootKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rational in `[lo, hi)` with denominator 97.
pub fn random_q(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Q {
    qf(rng.random_range(lo * 97..hi * 97), 97)
}

pub fn random_point(rng: &mut ChaCha8Rng, rank: usize, lo: i64, hi: i64) -> QVec {
    (0..rank).map(|_| random_q(rng, lo, hi)).collect()
}

/// `n` random points of the window avoiding the walls of every measure in `ms`.
pub fn points_off_walls(rng: &mut ChaCha8Rng, ms: &[&Measure], rank: usize, lo: i64, hi: i64, n: usize) -> Vec<QVec> {
    let walls: Vec<_> = ms.iter().flat_map(|m| m.walls()).collect();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = random_point(rng, rank, lo, hi);
        if walls.iter().all(|h| !h.contains(&x)) {
            out.push(x);
        }
    }
    out
}

pub struct Instance {
    pub rank: usize,
    pub ell: QVec,
    pub rng: ChaCha8Rng,
}

impl Instance {
    pub fn new(seed: u64) -> Self {
        let mut rng = rng(seed);
        let rank = rng.random_range(1..=2usize);
        let ells: [[i64; 2]; 6] = [[1, 0], [0, 1], [1, 1], [2, -1], [-1, 2], [1, -3]];
        let sign = if rng.random_bool(0.5) { 1 } else { -1 };
        let e = ells[rng.random_range(0..6)];
        let ell = if rank == 1 { qv(&[sign]) } else { qv(&[sign * e[0], sign * e[1]]) };
        Instance { rank, ell, rng }
    }

    pub fn dir(&mut self) -> QVec {
        loop {
            let v: QVec = (0..self.rank).map(|_| q(self.rng.random_range(-3..=3))).collect();
            if exact::dot(&v, &self.ell) > q(0) {
                return v;
            }
        }
    }

    pub fn measure(&mut self, max_dirs: usize) -> Measure {
        let n = self.rng.random_range(1..=3);
        let mut m = Measure::zero(self.rank);
        for _ in 0..n {
            let c = qf(self.rng.random_range(-5..=5), self.rng.random_range(1..=4));
            let b: QVec = (0..self.rank).map(|_| qf(self.rng.random_range(-6..=6), 2)).collect();
            let k = self.rng.random_range(0..=max_dirs);
            let dirs = (0..k).map(|_| self.dir()).collect();
            m = m.add(&Measure::make(c, b, dirs).unwrap()).unwrap();
        }
        m
    }

    /// Independent rays spanning the space, used to smooth singular measures.
    pub fn kernel(&mut self) -> Measure {
        loop {
            let dirs: Vec<QVec> = (0..self.rank).map(|_| self.dir()).collect();
            if exact::rank(&dirs) == self.rank {
                return Measure::make(q(1), exact::zeros(self.rank), dirs).unwrap();
            }
        }
    }

    /// Density agreement of `a * K` and `b * K` at 20 points.
    pub fn same(&mut self, a: &Measure, b: &Measure) -> bool {
        let k = self.kernel();
        let (a, b) = (a.convolve(&k).unwrap(), b.convolve(&k).unwrap());
        let pts = points_off_walls(&mut self.rng, &[&a, &b], self.rank, -8, 8, 20);
        pts.iter().all(|x| a.density_at(x).unwrap() == b.density_at(x).unwrap())
    }
}

pub fn measure_fixtures() -> Vec<(&'static str, Measure)> {
    let mut out = vec![
        ("p1 +", localization::weighted_p1_dh(-1, 2, Chamber::Plus).unwrap()),
        ("p1 -", localization::weighted_p1_dh(-3, 5, Chamber::Minus).unwrap()),
        ("H+ * H+", Measure::make(q(1), qv(&[0]), vec![qv(&[1]), qv(&[1])]).unwrap()),
        ("H+ * H+ * H+", Measure::make(q(1), qv(&[0]), vec![qv(&[1]), qv(&[1]), qv(&[1])]).unwrap()),
    ];
    let su2 = build_root_system(RootKind::A1, Normalization::Su2).unwrap();
    out.push(("su2 orbit", localization::coadjoint_dh_t(&su2, &[qf(3, 2)], &[q(1)]).unwrap()));
    let a2 = build_root_system(RootKind::A2, Normalization::Basic).unwrap();
    for l in [[1, 1], [2, 1]] {
        out.push(("a2 orbit", localization::coadjoint_dh_t(&a2, &qv(&l), &qv(&[2, 1])).unwrap()));
    }
    let fx = localization::g2_fixtures().unwrap();
    out.push(("g2 abelian", fx.abelian_terms.clone()));
    out.push(("g2 expected", fx.expected.base.clone()));
    out.push(("g2 half-plane", fx.halfplane.base.clone()));
    for c in &fx.normsq {
        out.push(("g2 stratum", c.measure.torus_measure().clone()));
    }
    let st = yangmills::su2_genus1_strata(10).unwrap();
    out.push(("su2 genus one", st.total().unwrap()));
    out
}

fn ensure(ok: bool, what: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

/// Commutativity, associativity and bilinearity of convolution on one seeded instance.
pub fn convolution_laws(seed: u64) -> Result<(), String> {
    let mut g = Instance::new(seed);
    let (m1, m2, m3) = (g.measure(1), g.measure(1), g.measure(1));
    let (a, b) = (qf(g.rng.random_range(-4..=4), 3), qf(g.rng.random_range(-4..=4), 5));
    let c12 = m1.convolve(&m2).unwrap();
    let c21 = m2.convolve(&m1).unwrap();
    ensure(g.same(&c12, &c21), "commutativity")?;
    let left = c12.convolve(&m3).unwrap();
    let right = m1.convolve(&m2.convolve(&m3).unwrap()).unwrap();
    ensure(g.same(&left, &right), "associativity")?;
    let lin = m1.scale(&a).add(&m2.scale(&b)).unwrap().convolve(&m3).unwrap();
    let split = m1.convolve(&m3).unwrap().scale(&a).add(&m2.convolve(&m3).unwrap().scale(&b)).unwrap();
    ensure(g.same(&lin, &split), "bilinearity")?;
    ensure(m1.add(&m1.scale(&q(-1))).unwrap().is_zero(), "additive inverse")?;
    ensure(m1.scale(&q(0)).is_zero(), "zero scaling")
}

/// `d_v (H_v * m) = m`, and `d_{3v}` gives `3m`.
pub fn derivative_inverts_ray(seed: u64) -> Result<(), String> {
    let mut g = Instance::new(seed);
    let m = g.measure(2);
    let v = g.dir();
    let ray = Measure::make(q(1), exact::zeros(g.rank), vec![v.clone()]).unwrap();
    let back = ray.convolve(&m).unwrap().directional_derivative(&v).unwrap();
    ensure(g.same(&back, &m), "derivative inversion")?;
    let back3 = ray.convolve(&m).unwrap().directional_derivative(&exact::scale(&q(3), &v)).unwrap();
    ensure(g.same(&back3, &m.scale(&q(3))), "derivative scaling")
}

pub fn pointedness_violations_raise(seed: u64) -> Result<(), String> {
    let mut g = Instance::new(seed);
    let v = g.dir();
    let w = g.dir();
    let base = exact::zeros(g.rank);
    let opposite = Measure::make(q(1), base.clone(), vec![v.clone(), exact::neg(&v)]);
    ensure(matches!(opposite, Err(Error::NonProper(_))), "opposite rays")?;
    let closing = exact::neg(&exact::add(&v, &w));
    let tri = Measure::make(q(1), base.clone(), vec![v.clone(), w.clone(), closing]);
    ensure(matches!(tri, Err(Error::NonProper(_))), "rays summing to zero")?;
    let a = Measure::make(q(1), base.clone(), vec![v.clone()]).unwrap();
    let b = Measure::make(q(2), base, vec![exact::neg(&v)]).unwrap();
    ensure(matches!(a.convolve(&b), Err(Error::NonProper(_))), "opposite convolution")
}

/// Exact densities of every fixture against [`density_oracle`] at `points` random points.
pub fn density_oracle_suite(points: usize, samples: usize) -> Result<(), String> {
    let mut r = rng(10);
    for (name, m) in measure_fixtures() {
        ensure(m.is_absolutely_continuous(), name)?;
        for (i, x) in points_off_walls(&mut r, &[&m], m.rank(), -4, 4, points).iter().enumerate() {
            let exact_d = exact::to_f64(&m.density_at(x).unwrap());
            let (est, se) = density_oracle(&m, x, samples, i as u64);
            if (exact_d - est).abs() > 3.0 * se + 1e-9 {
                return Err(format!("{name} at {x:?}: {exact_d} vs {est} +- {se}"));
            }
        }
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coefficients of `y` in the basis `b` (rank 1 or 2).
fn solve(b: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    match b.len() {
        1 => vec![y[0] / b[0][0]],
        2 => {
            let det = b[0][0] * b[1][1] - b[1][0] * b[0][1];
            vec![(y[0] * b[1][1] - y[1] * b[1][0]) / det, (b[0][0] * y[1] - b[0][1] * y[0]) / det]
        }
        _ => unimplemented!("rank above two"),
    }
}

fn det(b: &[Vec<f64>]) -> f64 {
    match b.len() {
        1 => b[0][0],
        _ => b[0][0] * b[1][1] - b[1][0] * b[0][1],
    }
}

/// An integer functional positive on every direction.
fn witness(dirs: &[Vec<f64>], rank: usize) -> Vec<f64> {
    let range = -6..=6;
    let cands: Vec<Vec<f64>> = if rank == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        range.clone().flat_map(|a| range.clone().map(move |b| vec![a as f64, b as f64])).collect()
    };
    cands.into_iter().find(|l| dirs.iter().all(|v| dot(l, v) > 0.0)).expect("pointed directions")
}

/// Density of `sum c delta_b * H_v1 * ... * H_vk` at `x` by integrating over the rays beyond
/// a basis: for each term `|det B|^{-1} vol{s >= 0 : B^{-1}(x - b - E s) >= 0}`, with the
/// volume estimated by uniform sampling of the bounded region `l(E s) <= l(x - b)`.
/// Returns `(estimate, standard error)`; terms with fewer than `rank` rays are ignored.
pub fn density_oracle(m: &Measure, x: &[Q], samples: usize, seed: u64) -> (f64, f64) {
    let rank = m.rank();
    let xf = exact::vec_to_f64(x);
    let mut rng = rng(seed);
    let (mut value, mut var) = (0.0, 0.0);
    for t in m.terms() {
        if t.dirs.len() < rank {
            continue;
        }
        let dirs: Vec<Vec<f64>> = t.dirs.iter().map(|v| exact::vec_to_f64(v)).collect();
        let basis_idx: Vec<usize> = if rank == 1 {
            vec![0]
        } else {
            let mut pair = None;
            'outer: for i in 0..dirs.len() {
                for j in i + 1..dirs.len() {
                    if det(&[dirs[i].clone(), dirs[j].clone()]).abs() > 1e-12 {
                        pair = Some(vec![i, j]);
                        break 'outer;
                    }
                }
            }
            match pair {
                Some(p) => p,
                None => continue,
            }
        };
        let basis: Vec<Vec<f64>> = basis_idx.iter().map(|&i| dirs[i].clone()).collect();
        let extra: Vec<Vec<f64>> =
            (0..dirs.len()).filter(|i| !basis_idx.contains(i)).map(|i| dirs[i].clone()).collect();
        let c = exact::to_f64(&t.coeff) / det(&basis).abs();
        let y: Vec<f64> = xf.iter().zip(exact::vec_to_f64(&t.base)).map(|(a, b)| a - b).collect();
        let inside = |z: &[f64]| solve(&basis, z).iter().all(|s| *s > 0.0);
        if extra.is_empty() {
            if inside(&y) {
                value += c;
            }
            continue;
        }
        let l = witness(&dirs, rank);
        let ly = dot(&l, &y);
        if ly <= 0.0 {
            continue;
        }
        let bounds: Vec<f64> = extra.iter().map(|e| ly / dot(&l, e)).collect();
        let boxvol: f64 = bounds.iter().product();
        let mut hits = 0usize;
        let mut z = vec![0.0; rank];
        for _ in 0..samples {
            z.copy_from_slice(&y);
            for (e, b) in extra.iter().zip(&bounds) {
                let s = rng.random::<f64>() * b;
                for (zi, ei) in z.iter_mut().zip(e) {
                    *zi -= s * ei;
                }
            }
            if inside(&z) {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        value += c * boxvol * p;
        var += (c * boxvol).powi(2) * p * (1.0 - p) / samples as f64;
    }
    (value, var.sqrt())
}

/// HN types by exhaustive filtering: every composition of `r`, every degree vector in the
/// slope box, kept when the degrees add up and the slopes strictly decrease.
pub fn hn_brute(r: u32, d: i64, bound: i64) -> Vec<HnType> {
    fn compositions(r: u32) -> Vec<Vec<u32>> {
        if r == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in 1..=r {
            for mut rest in compositions(r - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    fn degree_vectors(comp: &[u32], bound: i64) -> Vec<Vec<i64>> {
        let Some((&ri, rest)) = comp.split_first() else { return vec![vec![]] };
        let tails = degree_vectors(rest, bound);
        let lim = bound * ri as i64;
        (-lim..=lim).flat_map(|di| tails.iter().map(move |t| [vec![di], t.clone()].concat())).collect()
    }
    let mut out = Vec::new();
    for comp in compositions(r) {
        for degs in degree_vectors(&comp, bound) {
            let slopes: Vec<Q> = degs.iter().zip(&comp).map(|(di, ri)| qf(*di, *ri as i64)).collect();
            if degs.iter().sum::<i64>() == d && slopes.windows(2).all(|w| w[0] > w[1]) {
                out.push(HnType { blocks: comp.iter().cloned().zip(degs).collect() });
            }
        }
    }
    out.sort();
    out
}

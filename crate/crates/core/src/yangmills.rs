//! Two-dimensional Yang-Mills: Migdal sums, Witten volumes, the genus-one SU(2)
//! strata and Harder-Narasimhan types.

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, q, qf, qv, Q};
use crate::lie::{Normalization, RootKind, RootSystem, Volume};
use crate::measure::{Measure, QuadSpec, TestFunction};
use crate::par::{self, Parallelism};

#[derive(Debug, Clone)]
pub struct PartitionSpec {
    pub rs: RootSystem,
    pub genus: u32,
    pub epsilon: Q,
    /// Radius in weight space: terms with `|nu + rho| <= cutoff` are summed.
    pub cutoff: f64,
    pub par: Parallelism,
    /// Collect cumulative partial sums at integer radii.
    pub shells: bool,
}

impl PartitionSpec {
    pub fn new(rs: RootSystem, genus: u32, epsilon: Q, cutoff: f64) -> Result<Self> {
        if !epsilon.is_positive() {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidArgument("cutoff must be a positive real".into()));
        }
        Ok(PartitionSpec { rs, genus, epsilon, cutoff, par: Parallelism::Sequential, shells: false })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumResult {
    pub value: f64,
    /// Bound on `|value - limit|`.
    pub tail_bound: f64,
    pub terms_used: u64,
    /// The bare lattice sum before the volume prefactor.
    pub lattice_sum: f64,
    pub lattice_tail: f64,
    pub prefactor: f64,
    /// `(radius, cumulative lattice sum)` at integer radii.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shells: Option<Vec<(u64, f64)>>,
}

/// Geometry of the cone `nu + rho = sum n_i w_i`, `n_i >= 1`, in floating point.
struct Lattice {
    gram: Vec<Vec<f64>>,
    // (alpha, w_i) / (alpha, rho) for each positive root
    pairings: Vec<Vec<f64>>,
    weight_norms: Vec<f64>,
}

impl Lattice {
    fn new(rs: &RootSystem) -> Self {
        let w = &rs.fundamental_weights;
        let gram = w.iter().map(|a| w.iter().map(|b| exact::to_f64(&rs.ip(a, b))).collect()).collect();
        let pairings = rs
            .positive_roots
            .iter()
            .map(|a| {
                let r = rs.ip(a, &rs.rho);
                w.iter().map(|wi| exact::to_f64(&(rs.ip(a, wi) / &r))).collect()
            })
            .collect();
        let weight_norms = w.iter().map(|x| exact::to_f64(&rs.norm_sq(x)).sqrt()).collect();
        Lattice { gram, pairings, weight_norms }
    }

    fn norm_sq(&self, n: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, row) in self.gram.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                s += n[i] * g * n[j];
            }
        }
        s
    }

    fn dim(&self, n: &[f64]) -> f64 {
        self.pairings.iter().map(|p| p.iter().zip(n).map(|(a, b)| a * b).sum::<f64>()).product()
    }

    /// Largest `n` with `n^2 g_ii <= r^2`, along a single coordinate with the others at 1.
    fn max_along(&self, i: usize, r: f64) -> u64 {
        let others: f64 = (0..self.gram.len()).filter(|&j| j != i).map(|j| self.gram[i][j]).sum();
        let rest = {
            let mut v = vec![1.0; self.gram.len()];
            v[i] = 0.0;
            self.norm_sq(&v)
        };
        // g n^2 + 2 o n + rest <= r^2
        let g = self.gram[i][i];
        let disc = others * others - g * (rest - r * r);
        if disc < 0.0 {
            return 0;
        }
        ((-others + disc.sqrt()) / g).floor().max(0.0) as u64
    }
}

/// Summation of `term(n, |x|)` over `n_i >= 1` with `|x| <= cutoff`.
fn lattice_sum(
    lat: &Lattice,
    cutoff: f64,
    par: Parallelism,
    shells: bool,
    term: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> (f64, u64, Option<Vec<(u64, f64)>>) {
    let rank = lat.gram.len();
    let r2 = cutoff * cutoff;
    const CHUNK: u64 = 4096;
    type Part = (f64, u64, Vec<(u64, f64)>);
    let run_row = |values: &mut Vec<f64>, hist: &mut Vec<(u64, f64)>, n: &[f64]| {
        let t = term(n);
        values.push(t);
        if shells {
            let s = lat.norm_sq(n).sqrt().ceil() as u64;
            match hist.last_mut() {
                Some(last) if last.0 == s => last.1 += t,
                _ => hist.push((s, t)),
            }
        }
    };
    let parts: Vec<Part> = if rank == 1 {
        let nmax = lat.max_along(0, cutoff);
        let chunks = nmax.div_ceil(CHUNK) as usize;
        par::map_indexed(chunks, par, |c| {
            let lo = c as u64 * CHUNK + 1;
            let hi = ((c as u64 + 1) * CHUNK).min(nmax);
            let mut values = Vec::with_capacity((hi + 1 - lo) as usize);
            let mut hist = Vec::new();
            for n in lo..=hi {
                run_row(&mut values, &mut hist, &[n as f64]);
            }
            (par::pairwise_sum(&values), values.len() as u64, hist)
        })
    } else {
        let n1max = lat.max_along(0, cutoff);
        par::map_indexed(n1max as usize, par, |row| {
            let n1 = (row + 1) as f64;
            let mut values = Vec::new();
            let mut hist = Vec::new();
            let mut n2 = 1.0;
            while lat.norm_sq(&[n1, n2]) <= r2 {
                run_row(&mut values, &mut hist, &[n1, n2]);
                n2 += 1.0;
            }
            hist.sort_by_key(|h| h.0);
            (par::pairwise_sum(&values), values.len() as u64, hist)
        })
    };
    let total = par::pairwise_sum(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let count = parts.iter().map(|p| p.1).sum();
    let shells = shells.then(|| {
        let mut acc: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
        for p in &parts {
            for (s, v) in &p.2 {
                *acc.entry(*s).or_insert(0.0) += v;
            }
        }
        let mut run = 0.0;
        acc.into_iter()
            .map(|(s, v)| {
                run += v;
                (s, run)
            })
            .collect()
    });
    (total, count, shells)
}

/// `dim V <= c |nu + rho|^N` by Cauchy-Schwarz on each linear factor.
fn dim_growth_constant(rs: &RootSystem) -> f64 {
    rs.positive_roots
        .iter()
        .map(|a| exact::to_f64(&rs.norm_sq(a)).sqrt() / exact::to_f64(&rs.ip(a, &rs.rho)))
        .product()
}

/// Upper bound for lattice points of the cone inside the ball of radius `r`.
fn ball_count(lat: &Lattice, r: f64) -> f64 {
    if lat.gram.len() == 1 {
        r / lat.weight_norms[0]
    } else {
        let d: f64 = lat.weight_norms.iter().sum();
        let g = &lat.gram;
        let covol = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).sqrt();
        std::f64::consts::PI * (r + d).powi(2) / covol
    }
}

fn gaussian_tail(rs: &RootSystem, lat: &Lattice, genus: u32, eps: f64, cutoff: f64) -> Result<f64> {
    let power = if genus == 0 { 2 * rs.positive_roots.len() } else { 0 } as f64;
    let c = if genus == 0 { dim_growth_constant(rs).powi(2) } else { 1.0 };
    if cutoff * cutoff * eps < power {
        return Err(Error::CutoffTooSmall(format!(
            "need cutoff >= {:.3} for a decreasing tail",
            (power / eps).sqrt()
        )));
    }
    let f = |r: f64| c * r.powf(power) * (-eps * r * r / 2.0).exp();
    let mut bound = 0.0;
    for k in 0..1_000_000u64 {
        let r = cutoff + k as f64;
        let t = ball_count(lat, r + 1.0) * f(r);
        bound += t;
        if t <= bound * 1e-17 || t == 0.0 {
            break;
        }
    }
    Ok(bound)
}

/// `Vol(K)^{2g} sum_nu (dim V_nu)^{2-2g} exp(-eps |nu+rho|^2 / 2)`.
pub fn migdal_partition(spec: &PartitionSpec) -> Result<SumResult> {
    let rs = &spec.rs;
    let lat = Lattice::new(rs);
    let eps = exact::to_f64(&spec.epsilon);
    let p = 2.0 - 2.0 * spec.genus as f64;
    let term = |n: &[f64]| lat.dim(n).powf(p) * (-eps * lat.norm_sq(n) / 2.0).exp();
    let (sum, count, shells) = lattice_sum(&lat, spec.cutoff, spec.par, spec.shells, &term);
    let prefactor = rs.vol_group().powi(2 * spec.genus).to_f64();
    let tail = gaussian_tail(rs, &lat, spec.genus, eps, spec.cutoff)?;
    Ok(SumResult {
        value: prefactor * sum,
        tail_bound: prefactor * tail,
        terms_used: count,
        lattice_sum: sum,
        lattice_tail: tail,
        prefactor,
        shells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WittenConstant {
    /// `Vol(K)^{2g}`.
    #[default]
    Volume,
    /// `dim(K)^{2g}` as printed.
    LiteralDim,
}

fn zeta_upper(p: f64) -> f64 {
    let s: f64 = (1..=1000).map(|k| (k as f64).powf(-p)).sum();
    s + 1000f64.powf(1.0 - p) / (p - 1.0)
}

/// `#Z(K) Vol(K)^{2g} sum_nu (dim V_nu)^{2-2g}`.
pub fn witten_volume(
    rs: &RootSystem,
    genus: u32,
    cutoff: f64,
    constant: WittenConstant,
    par: Parallelism,
) -> Result<SumResult> {
    if genus < 2 {
        return Err(Error::InvalidArgument(format!("genus must be at least 2, got {genus}")));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::InvalidArgument("cutoff must be a positive real".into()));
    }
    let lat = Lattice::new(rs);
    let p = 2.0 * genus as f64 - 2.0;
    let term = |n: &[f64]| lat.dim(n).powf(-p);
    let (sum, count, _) = lattice_sum(&lat, cutoff, par, false, &term);
    let tail = if rs.rank == 1 {
        // dim = kappa n
        let kappa = lat.pairings[0][0];
        let m = lat.max_along(0, cutoff).max(1) as f64;
        kappa.powf(-p) * m.powf(1.0 - p) / (p - 1.0)
    } else {
        // dim >= kappa n1 n2 max(n1, n2)^{N-2}; outside the ball max(n1, n2) > M
        let big_n = rs.positive_roots.len() as f64;
        let kappa: f64 = lat
            .pairings
            .iter()
            .map(|c| c.iter().cloned().filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min))
            .product();
        let m = (cutoff / lat.weight_norms.iter().sum::<f64>()).floor();
        if m < 1.0 {
            return Err(Error::CutoffTooSmall("cutoff below one lattice step".into()));
        }
        let s = p * (big_n - 1.0);
        2.0 * kappa.powf(-p) * zeta_upper(p) * m.powf(1.0 - s) / (s - 1.0)
    };
    let k = match constant {
        WittenConstant::Volume => rs.vol_group().powi(2 * genus).to_f64(),
        WittenConstant::LiteralDim => (rs.group_dimension() as f64).powi(2 * genus as i32),
    };
    let prefactor = rs.center_order() as f64 * k;
    Ok(SumResult {
        value: prefactor * sum,
        tail_bound: prefactor * tail,
        terms_used: count,
        lattice_sum: sum,
        lattice_tail: tail,
        prefactor,
        shells: None,
    })
}

#[derive(Debug, Clone)]
pub struct Su2Genus1 {
    /// `(xi, mu_xi)` for `xi = 0, 1, ..., cutoff`.
    pub strata: Vec<(Q, Measure)>,
    pub one_point: Measure,
    /// `Vol(T)^2`.
    pub torus_volume: Q,
}

impl Su2Genus1 {
    pub fn total(&self) -> Result<Measure> {
        Measure::sum(1, self.strata.iter().map(|(_, m)| m))
    }
}

fn su2() -> Result<RootSystem> {
    crate::lie::build_root_system(RootKind::A1, Normalization::Su2)
}

fn rational_volume(v: &Volume) -> Result<Q> {
    if v.radicand.is_one() && v.two_pi == 0 {
        Ok(v.coeff.clone())
    } else {
        Err(Error::InvalidArgument(format!("volume {v} is not rational")))
    }
}

pub fn su2_genus1_strata(cutoff: u32) -> Result<Su2Genus1> {
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    let rs = su2()?;
    let v = rational_volume(&rs.vol_torus().powi(2))?;
    let (plus, minus) = (qv(&[1]), qv(&[-1]));
    let half = &v * qf(1, 2);
    let quarter = &v * qf(1, 4);
    let o = exact::zeros(1);
    let one_point = Measure::make(quarter, o.clone(), vec![plus.clone()])?
        .sub(&Measure::make(half.clone(), o, vec![plus.clone(), plus.clone()])?)?;
    // antisymmetric extension determined by the positive chamber
    let mu0 = one_point.antisymmetrize(&rs)?.scale(&q(rs.weyl_order() as i64));
    let mut strata = vec![(Q::zero(), mu0)];
    for xi in 1..=cutoff as i64 {
        let m = Measure::make(half.clone(), qv(&[xi]), vec![plus.clone()])?
            .sub(&Measure::make(half.clone(), qv(&[-xi]), vec![minus.clone()])?)?;
        strata.push((q(xi), m));
    }
    Ok(Su2Genus1 { strata, one_point, torus_volume: v })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SawtoothReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub sigma: f64,
}

/// Pairs the genus-one stratum sum with `2 kappa x exp(-x^2 / 2 sigma^2)`,
/// `sigma^2 = eps / 16 pi^2`, and compares with the Migdal sum.
pub fn sawtooth_identity(cutoff: u32, epsilon: Q) -> Result<SawtoothReport> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let eps = exact::to_f64(&epsilon);
    let pi = std::f64::consts::PI;
    let sigma = (eps / (16.0 * pi * pi)).sqrt();
    let need = (20.0 / eps.sqrt()).max(20.0 * sigma + 1.0);
    if (cutoff as f64) < need {
        return Err(Error::CutoffTooSmall(format!("need cutoff >= {}", need.ceil())));
    }
    let st = su2_genus1_strata(cutoff)?;
    let kappa = 1.0 / (2.0 * sigma.powi(3) * (2.0 * pi).sqrt());
    let h = TestFunction::PolyGaussian { coeffs: vec![0.0, 2.0 * kappa], epsilon: 1.0 / (sigma * sigma), center: 0.0 };
    let lhs = st.total()?.pair_test(&h, &QuadSpec::default())?.value;
    let spec = PartitionSpec::new(su2()?, 1, epsilon, cutoff as f64)?;
    let z = migdal_partition(&spec)?;
    let rhs = exact::to_f64(&st.torus_volume) * z.lattice_sum;
    Ok(SawtoothReport { lhs, rhs, gap: lhs - rhs, sigma })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HnType {
    /// `(r_j, d_j)` with strictly decreasing slopes.
    pub blocks: Vec<(u32, i64)>,
}

impl HnType {
    pub fn slopes(&self) -> Vec<Q> {
        self.blocks.iter().map(|(r, d)| qf(*d, *r as i64)).collect()
    }

    /// Each slope repeated with multiplicity `r_j`.
    pub fn slope_vector(&self) -> Vec<Q> {
        self.blocks
            .iter()
            .flat_map(|(r, d)| std::iter::repeat_n(qf(*d, *r as i64), *r as usize))
            .collect()
    }

    pub fn rank(&self) -> u32 {
        self.blocks.iter().map(|b| b.0).sum()
    }

    pub fn degree(&self) -> i64 {
        self.blocks.iter().map(|b| b.1).sum()
    }
}

fn hn_rec(r: u32, d: i64, bound: &Q, upper: Option<&Q>, prefix: &mut Vec<(u32, i64)>, out: &mut Vec<HnType>) {
    if r == 0 {
        if d == 0 {
            out.push(HnType { blocks: prefix.clone() });
        }
        return;
    }
    for r1 in 1..=r {
        let lim = (bound * q(r1 as i64)).floor().to_integer();
        let lim: i64 = lim.try_into().unwrap_or(i64::MAX / 4);
        for d1 in -lim..=lim {
            let s = qf(d1, r1 as i64);
            if upper.is_some_and(|u| s >= *u) {
                continue;
            }
            if r1 == r && d1 != d {
                continue;
            }
            prefix.push((r1, d1));
            hn_rec(r - r1, d - d1, bound, Some(&s), prefix, out);
            prefix.pop();
        }
    }
}

/// All HN types of rank `r` and degree `d` with every `|slope| <= slope_bound`.
pub fn hn_types(r: u32, d: i64, slope_bound: &Q) -> Result<Vec<HnType>> {
    if r < 1 {
        return Err(Error::InvalidArgument("rank must be at least 1".into()));
    }
    if slope_bound.is_negative() {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    hn_rec(r, d, slope_bound, None, &mut Vec::new(), &mut out);
    out.sort_by_key(|t| std::cmp::Reverse(t.slope_vector()));
    Ok(out)
}

/// `sum_xi` window check helper: the exact affine density of the stratum sum at `x`.
pub fn sawtooth_density(torus_volume: &Q, x: &Q) -> Q {
    let frac = x - x.floor();
    torus_volume * qf(1, 4) * (Q::one() - q(2) * frac)
}

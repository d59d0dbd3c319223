//! Equality of absolutely continuous measures by exact sampling on every chamber.
//!
//! In rank 1 and 2 the sample set is a certificate: each cell of a vertical sweep of the
//! joint wall arrangement receives a `(d+1)`-point grid (rank 1) or `(d+1) x (d+1)`
//! grid (rank 2), which determines a polynomial of degree `d` on that cell. Higher ranks
//! fall back to random wall-avoiding points.

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::density::{walls_of, DensityEvaluator, Hyperplane};
use super::Measure;
use crate::error::{Error, Result};
use crate::exact::{q, QVec, Q};

/// Random extra points drawn from `window` (one `(lo, hi)` pair per coordinate) in
/// addition to the chamber sweep; points on the joint wall arrangement are rejected.
#[derive(Debug, Clone)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub window: Vec<(Q, Q)>,
}

impl SampleSpec {
    pub fn new(count: usize, seed: u64, window: Vec<(Q, Q)>) -> Result<Self> {
        if count < 1 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        if window.iter().any(|(lo, hi)| lo >= hi) {
            return Err(Error::InvalidArgument("degenerate sample window".into()));
        }
        Ok(SampleSpec { count, seed, window })
    }

    /// The box `[-r, r]^rank`.
    pub fn cube(rank: usize, r: i64, count: usize, seed: u64) -> Self {
        SampleSpec { count, seed, window: vec![(q(-r), q(r)); rank] }
    }
}

#[derive(Debug, Clone)]
pub struct EqualityReport {
    pub equal: bool,
    pub points_checked: usize,
    /// Whether the sample set certifies equality on every chamber.
    pub certified: bool,
    /// `(x, density1, density2)` where the two measures differ.
    pub disagreements: Vec<(QVec, Q, Q)>,
}

pub(crate) fn compare(a: &Measure, b: &Measure, spec: &SampleSpec) -> Result<EqualityReport> {
    if a.rank() != b.rank() {
        return Err(Error::DimensionMismatch { expected: a.rank(), got: b.rank() });
    }
    if !a.is_absolutely_continuous() || !b.is_absolutely_continuous() {
        return Err(Error::SingularPart);
    }
    let rank = a.rank();
    let diff = a.sub(b)?;
    let mut all = walls_of(a);
    all.extend(walls_of(b));
    all.sort();
    all.dedup();
    let deg = a.max_piece_degree().max(b.max_piece_degree());
    let (mut points, certified) = match rank {
        1 => (sweep_1d(&all, deg), true),
        2 => (sweep_2d(&all, deg), true),
        _ => (vec![], false),
    };
    if spec.window.len() != rank {
        return Err(Error::DimensionMismatch { expected: rank, got: spec.window.len() });
    }
    points.extend(random_points(&all, spec));
    let mut disagreements = Vec::new();
    if !diff.is_zero() {
        let ed = DensityEvaluator::new(&diff)?;
        let bad: Vec<&QVec> = points.iter().filter(|p| !ed.eval(p).is_zero()).collect();
        if !bad.is_empty() {
            let ea = DensityEvaluator::new(a)?;
            let eb = DensityEvaluator::new(b)?;
            disagreements = bad.into_iter().map(|p| (p.clone(), ea.eval(p), eb.eval(p))).collect();
        }
    }
    Ok(EqualityReport {
        equal: disagreements.is_empty(),
        points_checked: points.len(),
        certified,
        disagreements,
    })
}

fn interior_points(lo: &Q, hi: &Q, n: usize) -> Vec<Q> {
    let step = (hi - lo) / q(n as i64 + 1);
    (1..=n).map(|i| lo + &step * q(i as i64)).collect()
}

/// `n` points per cell of the line cut at `cuts` (sorted, distinct).
fn cell_points(cuts: &[Q], n: usize) -> Vec<Q> {
    let mut out = Vec::new();
    match (cuts.first(), cuts.last()) {
        (Some(first), Some(last)) => {
            out.extend((1..=n).map(|i| first - q(i as i64)));
            for w in cuts.windows(2) {
                out.extend(interior_points(&w[0], &w[1], n));
            }
            out.extend((1..=n).map(|i| last + q(i as i64)));
        }
        _ => out.extend((0..n).map(|i| q(i as i64))),
    }
    out
}

fn sweep_1d(walls: &[Hyperplane], deg: usize) -> Vec<QVec> {
    let mut cuts: Vec<Q> = walls.iter().map(|h| &h.offset / &h.normal[0]).collect();
    cuts.sort();
    cuts.dedup();
    cell_points(&cuts, deg + 1).into_iter().map(|x| vec![x]).collect()
}

fn sweep_2d(walls: &[Hyperplane], deg: usize) -> Vec<QVec> {
    let n = deg + 1;
    let (vertical, slanted): (Vec<&Hyperplane>, Vec<&Hyperplane>) =
        walls.iter().partition(|h| h.normal[1].is_zero());
    // x-coordinates where the vertical order of slanted walls can change
    let mut xs: Vec<Q> = vertical.iter().map(|h| &h.offset / &h.normal[0]).collect();
    for (i, h1) in slanted.iter().enumerate() {
        for h2 in &slanted[i + 1..] {
            let d = &h1.normal[0] * &h2.normal[1] - &h1.normal[1] * &h2.normal[0];
            if d.is_zero() {
                continue;
            }
            xs.push((&h1.offset * &h2.normal[1] - &h2.offset * &h1.normal[1]) / d);
        }
    }
    xs.sort();
    xs.dedup();
    let mut out = Vec::new();
    for x in cell_points(&xs, n) {
        let mut ys: Vec<Q> = slanted
            .iter()
            .map(|h| (&h.offset - &h.normal[0] * &x) / &h.normal[1])
            .collect();
        ys.sort();
        ys.dedup();
        out.extend(cell_points(&ys, n).into_iter().map(|y| vec![x.clone(), y]));
    }
    out
}

fn random_points(walls: &[Hyperplane], spec: &SampleSpec) -> Vec<QVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let den = q(1 << 20) + q(7);
    let mut out = Vec::with_capacity(spec.count);
    let mut attempts = 0;
    while out.len() < spec.count && attempts < 100 * spec.count {
        attempts += 1;
        let p: QVec = spec
            .window
            .iter()
            .map(|(lo, hi)| {
                let k: i64 = rng.random_range(1..(1 << 20));
                lo + (hi - lo) * q(k) / &den
            })
            .collect();
        if walls.iter().all(|h| !h.contains(&p)) {
            out.push(p);
        }
    }
    out
}

//! Exact densities by recursive one-dimensional integration.

use num::{One, Signed, Zero};

use super::{Measure, Term};
use crate::error::{Error, Result};
use crate::exact::{self, q, QVec, Q};
use crate::lie::fmt_vec;

/// The affine hyperplane `{x : normal . x = offset}` with `normal` projectively normalized.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Hyperplane {
    pub normal: QVec,
    pub offset: Q,
}

impl Hyperplane {
    pub fn through(normal: &[Q], point: &[Q]) -> Hyperplane {
        let n = exact::projective_normalize(normal).expect("nonzero normal");
        let offset = exact::dot(&n, point);
        Hyperplane { normal: n, offset }
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        exact::dot(&self.normal, x) == self.offset
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        exact::dot(&self.normal, x) - &self.offset
    }
}

/// Normals of the hyperplanes spanned by `(rank-1)`-subsets of `dirs`.
pub(crate) fn wall_normals(dirs: &[QVec], rank: usize) -> Vec<QVec> {
    let mut out: Vec<QVec> = Vec::new();
    if rank == 0 {
        return out;
    }
    let k = rank - 1;
    let mut push = |rows: &[QVec]| {
        if exact::rank(rows) == k {
            let ns = exact::nullspace(rows, rank);
            if ns.len() == 1 {
                let n = exact::projective_normalize(&ns[0]).unwrap();
                if !out.contains(&n) {
                    out.push(n);
                }
            }
        }
    };
    if k == 0 {
        push(&[]);
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    if dirs.len() < k {
        return out;
    }
    loop {
        let rows: Vec<QVec> = idx.iter().map(|&i| dirs[i].clone()).collect();
        push(&rows);
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < dirs.len() - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub(crate) fn term_walls(t: &Term) -> Vec<Hyperplane> {
    wall_normals(&t.dirs, t.rank())
        .iter()
        .map(|n| Hyperplane::through(n, &t.base))
        .collect()
}

pub(crate) fn walls_of(m: &Measure) -> Vec<Hyperplane> {
    let mut all: Vec<Hyperplane> = m.terms().iter().flat_map(term_walls).collect();
    all.sort();
    all.dedup();
    all
}

/// Exact weights of the open Newton-Cotes rule with nodes `(i+1)/(d+2)` on `[0,1]`.
fn open_rule(d: usize) -> (Vec<Q>, Vec<Q>) {
    let nodes: Vec<Q> = (0..=d).map(|i| Q::new(((i + 1) as i64).into(), ((d + 2) as i64).into())).collect();
    let weights = (0..=d)
        .map(|i| {
            // integrate the Lagrange basis polynomial L_i over [0,1]
            let mut poly = vec![Q::one()];
            let mut denom = Q::one();
            for j in 0..=d {
                if j == i {
                    continue;
                }
                let mut next = vec![Q::zero(); poly.len() + 1];
                for (k, c) in poly.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= c * &nodes[j];
                }
                poly = next;
                denom *= &nodes[i] - &nodes[j];
            }
            let integral = poly
                .iter()
                .enumerate()
                .fold(Q::zero(), |acc, (k, c)| acc + c / q(k as i64 + 1));
            integral / denom
        })
        .collect();
    (nodes, weights)
}

/// Precomputed recursion for one term's density `F(dirs)(y)`, `y = x - base`.
struct ConeEval {
    /// Directions removed at each level, outermost first.
    removed: Vec<QVec>,
    /// Wall normals of the remaining set after each removal.
    level_walls: Vec<Vec<QVec>>,
    basis_inverse_rows: Vec<QVec>,
    basis_density: Q,
    rules: Vec<(Vec<Q>, Vec<Q>)>,
}

impl ConeEval {
    fn new(dirs: &[QVec], rank: usize) -> Result<ConeEval> {
        let mut cur: Vec<QVec> = dirs.to_vec();
        if exact::rank(&cur) != rank {
            return Err(Error::SingularPart);
        }
        let mut removed = Vec::new();
        let mut level_walls = Vec::new();
        while cur.len() > rank {
            let pos = (0..cur.len())
                .rev()
                .find(|&i| {
                    let mut rest = cur.clone();
                    rest.remove(i);
                    exact::rank(&rest) == rank
                })
                .expect("spanning set has a removable vector");
            removed.push(cur.remove(pos));
            level_walls.push(wall_normals(&cur, rank));
        }
        let m: Vec<QVec> = exact::transpose(&cur);
        let inv = exact::inverse(&m).ok_or(Error::SingularPart)?;
        let basis_density = exact::det(&m).abs().recip();
        let rules = (0..removed.len())
            .map(|lvl| open_rule(dirs.len() - lvl - 1 - rank))
            .collect();
        Ok(ConeEval { removed, level_walls, basis_inverse_rows: inv, basis_density, rules })
    }

    fn eval(&self, level: usize, y: &[Q]) -> Q {
        if level == self.removed.len() {
            let inside = self
                .basis_inverse_rows
                .iter()
                .all(|row| exact::dot(row, y).is_positive());
            return if inside { self.basis_density.clone() } else { Q::zero() };
        }
        let v = &self.removed[level];
        let mut cuts: Vec<Q> = self.level_walls[level]
            .iter()
            .filter_map(|n| {
                let nv = exact::dot(n, v);
                if nv.is_zero() {
                    return None;
                }
                let t = exact::dot(n, y) / nv;
                t.is_positive().then_some(t)
            })
            .collect();
        cuts.sort();
        cuts.dedup();
        let (nodes, weights) = &self.rules[level];
        let mut total = Q::zero();
        let mut lo = Q::zero();
        for hi in cuts {
            let width = &hi - &lo;
            let mut piece = Q::zero();
            for (s, w) in nodes.iter().zip(weights) {
                let t = &lo + &width * s;
                let p = exact::sub(y, &exact::scale(&t, v));
                let g = self.eval(level + 1, &p);
                if !g.is_zero() {
                    piece += w * g;
                }
            }
            total += piece * width;
            lo = hi;
        }
        debug_assert!({
            let p = exact::sub(y, &exact::scale(&(&lo + Q::one()), v));
            self.eval(level + 1, &p).is_zero()
        });
        total
    }
}

pub(crate) fn term_density(t: &Term, x: &[Q]) -> Result<Q> {
    let rank = t.rank();
    if !t.is_absolutely_continuous() {
        return Err(Error::SingularPart);
    }
    let y = exact::sub(x, &t.base);
    let ev = ConeEval::new(&t.dirs, rank)?;
    Ok(&t.coeff * ev.eval(0, &y))
}

pub(crate) fn density_at(m: &Measure, x: &[Q]) -> Result<Q> {
    if x.len() != m.rank() {
        return Err(Error::DimensionMismatch { expected: m.rank(), got: x.len() });
    }
    if !m.is_absolutely_continuous() {
        return Err(Error::SingularPart);
    }
    if m.terms().iter().flat_map(term_walls).any(|h| h.contains(x)) {
        return Err(Error::OnWall(fmt_vec(x)));
    }
    m.terms()
        .iter()
        .try_fold(Q::zero(), |acc, t| Ok(acc + term_density(t, x)?))
}

/// Density evaluation with the per-term recursions built once, for many points.
pub(crate) struct DensityEvaluator {
    terms: Vec<(Q, QVec, ConeEval)>,
}

impl DensityEvaluator {
    pub(crate) fn new(m: &Measure) -> Result<DensityEvaluator> {
        if !m.is_absolutely_continuous() {
            return Err(Error::SingularPart);
        }
        let terms = m
            .terms()
            .iter()
            .map(|t| Ok((t.coeff.clone(), t.base.clone(), ConeEval::new(&t.dirs, t.rank())?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DensityEvaluator { terms })
    }

    /// Caller guarantees `x` is off every wall.
    pub(crate) fn eval(&self, x: &[Q]) -> Q {
        self.terms.iter().fold(Q::zero(), |acc, (c, b, ev)| {
            let y = exact::sub(x, b);
            let v = ev.eval(0, &y);
            if v.is_zero() {
                acc
            } else {
                acc + c * v
            }
        })
    }
}

//! Signed sums of delta-Heaviside convolutions on `R^rank`.
//!
//! A term `c * delta_b * H_{v1} * ... * H_{vk}` is the pushforward of `c` times Lebesgue
//! measure on `[0, inf)^k` under `t -> b + sum t_i v_i`.

mod density;
mod equality;
mod io;
mod normal_form;
mod pairing;

pub use density::Hyperplane;
pub use equality::{EqualityReport, SampleSpec};
pub use io::{density_csv, MeasureJson, TermJson};
pub use normal_form::{NormalForm1d, Piece};
pub use pairing::{PairValue, QuadSpec, TestFunction};

use std::collections::BTreeMap;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, QMat, QVec, Q};
use crate::lie::{fmt_vec, RootSystem};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Term {
    pub coeff: Q,
    pub base: QVec,
    /// Canonical ray directions: each scaled so its first nonzero entry is `+-1`, sorted.
    pub dirs: Vec<QVec>,
}

impl Term {
    pub fn new(coeff: Q, base: QVec, dirs: Vec<QVec>) -> Result<Term> {
        let rank = base.len();
        let mut c = coeff;
        let mut canon = Vec::with_capacity(dirs.len());
        for v in dirs {
            if v.len() != rank {
                return Err(Error::DimensionMismatch { expected: rank, got: v.len() });
            }
            let (s, u) = exact::primitive_scale(&v).ok_or(Error::ZeroDirection)?;
            c /= s;
            canon.push(u);
        }
        if exact::strict_half_space_witness(&canon, rank).is_none() {
            let shown: Vec<String> = canon.iter().map(|v| fmt_vec(v)).collect();
            return Err(Error::NonProper(shown.join(", ")));
        }
        canon.sort();
        Ok(Term { coeff: c, base, dirs: canon })
    }

    pub fn rank(&self) -> usize {
        self.base.len()
    }

    /// Absolutely continuous: the directions span the ambient space.
    pub fn is_absolutely_continuous(&self) -> bool {
        self.dirs.len() >= self.rank() && exact::rank(&self.dirs) == self.rank()
    }

    fn key(&self) -> (QVec, Vec<QVec>) {
        (self.base.clone(), self.dirs.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measure {
    rank: usize,
    terms: Vec<Term>,
}

impl Measure {
    pub fn zero(rank: usize) -> Measure {
        Measure { rank, terms: vec![] }
    }

    pub fn delta(base: QVec) -> Measure {
        let rank = base.len();
        Measure::from_terms(rank, vec![Term { coeff: Q::from_integer(1.into()), base, dirs: vec![] }])
    }

    /// `coeff * delta_base * prod H_v`.
    pub fn make(coeff: Q, base: QVec, dirs: Vec<QVec>) -> Result<Measure> {
        let rank = base.len();
        if rank == 0 {
            return Err(Error::InvalidArgument("rank must be positive".into()));
        }
        Ok(Measure::from_terms(rank, vec![Term::new(coeff, base, dirs)?]))
    }

    /// Builds from already canonical terms and normalizes.
    fn from_terms(rank: usize, terms: Vec<Term>) -> Measure {
        let mut merged: BTreeMap<(QVec, Vec<QVec>), Q> = BTreeMap::new();
        for t in terms {
            *merged.entry(t.key()).or_insert_with(Q::zero) += t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((base, dirs), coeff)| Term { coeff, base, dirs })
            .collect();
        Measure { rank, terms }
    }

    pub fn from_term_list(rank: usize, terms: Vec<Term>) -> Result<Measure> {
        for t in &terms {
            if t.rank() != rank {
                return Err(Error::DimensionMismatch { expected: rank, got: t.rank() });
            }
        }
        let canon: Result<Vec<Term>> =
            terms.into_iter().map(|t| Term::new(t.coeff, t.base, t.dirs)).collect();
        Ok(Measure::from_terms(rank, canon?))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_rank(&self, other: &Measure) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: other.rank });
        }
        Ok(())
    }

    pub fn add(&self, other: &Measure) -> Result<Measure> {
        self.check_rank(other)?;
        let mut t = self.terms.clone();
        t.extend(other.terms.iter().cloned());
        Ok(Measure::from_terms(self.rank, t))
    }

    pub fn sub(&self, other: &Measure) -> Result<Measure> {
        self.add(&other.scale(&-Q::from_integer(1.into())))
    }

    pub fn scale(&self, c: &Q) -> Measure {
        let t = self
            .terms
            .iter()
            .map(|t| Term { coeff: &t.coeff * c, ..t.clone() })
            .collect();
        Measure::from_terms(self.rank, t)
    }

    pub fn sum<'a>(rank: usize, items: impl IntoIterator<Item = &'a Measure>) -> Result<Measure> {
        let mut terms = Vec::new();
        for m in items {
            if m.rank != rank {
                return Err(Error::DimensionMismatch { expected: rank, got: m.rank });
            }
            terms.extend(m.terms.iter().cloned());
        }
        Ok(Measure::from_terms(rank, terms))
    }

    pub fn convolve(&self, other: &Measure) -> Result<Measure> {
        self.check_rank(other)?;
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut dirs = a.dirs.clone();
                dirs.extend(b.dirs.iter().cloned());
                out.push(Term::new(&a.coeff * &b.coeff, exact::add(&a.base, &b.base), dirs)?);
            }
        }
        Ok(Measure::from_terms(self.rank, out))
    }

    /// Distributional derivative along `u`: removes one ray factor `v = c u` per term and
    /// divides the coefficient by `c`.
    pub fn directional_derivative(&self, u: &[Q]) -> Result<Measure> {
        if u.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: u.len() });
        }
        if exact::is_zero_vec(u) {
            return Err(Error::ZeroDirection);
        }
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let hit = t
                .dirs
                .iter()
                .enumerate()
                .find_map(|(i, v)| exact::parallel_factor(v, u).map(|c| (i, c)));
            let Some((i, c)) = hit else {
                return Err(Error::NoParallelFactor(fmt_vec(u)));
            };
            let mut dirs = t.dirs.clone();
            dirs.remove(i);
            out.push(Term { coeff: &t.coeff / c, base: t.base.clone(), dirs });
        }
        Ok(Measure::from_terms(self.rank, out))
    }

    /// Pushforward along an invertible linear map.
    pub fn push_forward(&self, m: &QMat) -> Result<Measure> {
        let d = exact::det(m);
        if d.is_zero() {
            return Err(Error::InvalidArgument("singular linear map".into()));
        }
        let terms: Result<Vec<Term>> = self
            .terms
            .iter()
            .map(|t| {
                Term::new(
                    t.coeff.clone(),
                    exact::mat_vec(m, &t.base),
                    t.dirs.iter().map(|v| exact::mat_vec(m, v)).collect(),
                )
            })
            .collect();
        Ok(Measure::from_terms(self.rank, terms?))
    }

    pub fn translate(&self, b: &[Q]) -> Measure {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { base: exact::add(&t.base, b), ..t.clone() })
            .collect();
        Measure::from_terms(self.rank, terms)
    }

    /// `|W|^{-1} sum_w (-1)^{l(w)} w_* mu`.
    pub fn antisymmetrize(&self, rs: &RootSystem) -> Result<Measure> {
        if rs.rank != self.rank {
            return Err(Error::DimensionMismatch { expected: rs.rank, got: self.rank });
        }
        let mut terms = Vec::new();
        for w in &rs.weyl_elements {
            let img = self.push_forward(&w.matrix)?;
            let s = Q::from_integer(w.sign.into());
            terms.extend(img.terms.into_iter().map(|t| Term { coeff: t.coeff * &s, ..t }));
        }
        let inv = Q::new(1.into(), (rs.weyl_order() as i64).into());
        Ok(Measure::from_terms(self.rank, terms).scale(&inv))
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        self.terms.iter().all(Term::is_absolutely_continuous)
    }

    /// Largest polynomial degree of the density on a chamber.
    pub fn max_piece_degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.dirs.len().saturating_sub(self.rank))
            .max()
            .unwrap_or(0)
    }

    /// Total mass of the atoms (terms without rays).
    pub fn atoms(&self) -> Vec<(QVec, Q)> {
        self.terms
            .iter()
            .filter(|t| t.dirs.is_empty())
            .map(|t| (t.base.clone(), t.coeff.clone()))
            .collect()
    }

    pub fn walls(&self) -> Vec<Hyperplane> {
        density::walls_of(self)
    }

    pub fn is_on_wall(&self, x: &[Q]) -> bool {
        self.walls().iter().any(|h| h.contains(x))
    }

    /// Exact density at `x` with respect to coordinate Lebesgue measure.
    pub fn density_at(&self, x: &[Q]) -> Result<Q> {
        density::density_at(self, x)
    }

    pub fn pair_test(&self, h: &TestFunction, quad: &QuadSpec) -> Result<PairValue> {
        pairing::pair_test(self, h, quad)
    }

    pub fn equal(&self, other: &Measure, spec: &SampleSpec) -> Result<bool> {
        Ok(self.compare(other, spec)?.equal)
    }

    pub fn compare(&self, other: &Measure, spec: &SampleSpec) -> Result<EqualityReport> {
        equality::compare(self, other, spec)
    }

    pub fn normal_form_1d(&self) -> Result<NormalForm1d> {
        normal_form::normal_form_1d(self)
    }

    pub fn to_json(&self) -> MeasureJson {
        io::to_json(self)
    }

    pub fn from_json(j: &MeasureJson) -> Result<Measure> {
        io::from_json(j)
    }
}

/// `H_v + H_{-v}`: Lebesgue measure on the line through `v`, as a convolution factor.
pub fn full_line(v: &[Q]) -> Result<Measure> {
    let z = exact::zeros(v.len());
    Measure::make(Q::from_integer(1.into()), z.clone(), vec![v.to_vec()])?
        .add(&Measure::make(Q::from_integer(1.into()), z, vec![exact::neg(v)])?)
}

/// Signed cone encoding of the indicator of a convex polygon given by vertices in cyclic
/// order: `chi_P = sum_v (-1)^{flips} |det(e1,e2)| delta_v * H_{e1'} * H_{e2'}` with edge
/// directions flipped into the `zeta` half-plane.
pub fn polygon_indicator(vertices: &[QVec], zeta: &[Q]) -> Result<Measure> {
    let n = vertices.len();
    if n < 3 || vertices.iter().any(|v| v.len() != 2) {
        return Err(Error::InvalidArgument("polygon needs at least three planar vertices".into()));
    }
    let mut terms = Vec::new();
    for i in 0..n {
        let v = &vertices[i];
        let e1 = exact::sub(&vertices[(i + 1) % n], v);
        let e2 = exact::sub(&vertices[(i + n - 1) % n], v);
        let mut sign = Q::from_integer(1.into());
        let mut dirs = Vec::new();
        for e in [e1, e2] {
            let s = exact::dot(&e, zeta);
            if s.is_zero() {
                return Err(Error::ChamberOnWall(fmt_vec(zeta)));
            }
            if s.is_negative() {
                sign = -sign;
                dirs.push(exact::neg(&e));
            } else {
                dirs.push(e);
            }
        }
        let d = exact::det(&vec![dirs[0].clone(), dirs[1].clone()]).abs();
        terms.push(Term::new(sign * d, v.clone(), dirs)?);
    }
    Ok(Measure::from_terms(2, terms))
}

/// Indicator of the simplicial cone `apex + cone(dirs)` (unit coordinate density).
pub fn cone_indicator(apex: QVec, dirs: Vec<QVec>) -> Result<Measure> {
    let d = exact::det(&dirs).abs();
    if d.is_zero() {
        return Err(Error::InvalidArgument("cone directions are not a basis".into()));
    }
    Measure::make(d, apex, dirs)
}

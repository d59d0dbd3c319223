//! Root systems of type A1, A2, G2 with exact Weyl groups, weights and orbit volumes.
//!
//! Coordinates: A1 uses a single coordinate, A2 and G2 use the basis of fundamental
//! weights of A2 (so G2 shares its Cartan with the long-root A2 subsystem).

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, q, qf, qv, QMat, QVec, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootKind {
    A1,
    A2,
    G2,
}

impl std::str::FromStr for RootKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A1" => Ok(RootKind::A1),
            "A2" => Ok(RootKind::A2),
            "G2" => Ok(RootKind::G2),
            _ => Err(Error::UnsupportedKind(s.to_string())),
        }
    }
}

impl fmt::Display for RootKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Long roots have squared length 2.
    Basic,
    /// Rank one, standard inner product, root 1, weight lattice Z/2, coweight lattice Z.
    Su2,
}

impl std::str::FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Normalization::Basic),
            "su2" => Ok(Normalization::Su2),
            _ => Err(Error::InvalidArgument(format!("unknown normalization {s:?}"))),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Basic => "basic",
            Normalization::Su2 => "su2",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylElement {
    pub matrix: QMat,
    /// `(-1)^{l(w)}`, equal to `det(w)`.
    pub sign: i8,
}

impl WeylElement {
    pub fn apply(&self, v: &[Q]) -> QVec {
        exact::mat_vec(&self.matrix, v)
    }
}

#[derive(Debug, Clone)]
pub struct RootSystem {
    pub kind: RootKind,
    pub normalization: Normalization,
    pub rank: usize,
    pub simple_roots: Vec<QVec>,
    pub inner_product: QMat,
    pub roots: Vec<QVec>,
    pub positive_roots: Vec<QVec>,
    pub fundamental_weights: Vec<QVec>,
    pub rho: QVec,
    pub weyl_elements: Vec<WeylElement>,
    pub coweight_lattice_basis: Vec<QVec>,
}

pub fn build_root_system(kind: RootKind, normalization: Normalization) -> Result<RootSystem> {
    let third = |m: [[i64; 2]; 2]| -> QMat {
        m.iter().map(|r| r.iter().map(|&x| qf(x, 3)).collect()).collect()
    };
    let (simple, gram) = match (kind, normalization) {
        (RootKind::A1, Normalization::Basic) => (vec![qv(&[1])], vec![qv(&[2])]),
        (RootKind::A1, Normalization::Su2) => (vec![qv(&[1])], vec![qv(&[1])]),
        (RootKind::A2, Normalization::Basic) => {
            (vec![qv(&[2, -1]), qv(&[-1, 2])], third([[2, 1], [1, 2]]))
        }
        (RootKind::G2, Normalization::Basic) => {
            (vec![qv(&[-1, 2]), qv(&[1, -1])], third([[2, 1], [1, 2]]))
        }
        (k, n) => return Err(Error::UnsupportedKind(format!("{k} with {n} normalization"))),
    };
    RootSystem::from_simple_roots(kind, normalization, simple, gram)
}

impl RootSystem {
    /// Builds all derived data from simple roots and the invariant form.
    pub fn from_simple_roots(
        kind: RootKind,
        normalization: Normalization,
        simple_roots: Vec<QVec>,
        inner_product: QMat,
    ) -> Result<Self> {
        let rank = inner_product.len();
        if simple_roots.len() != rank || simple_roots.iter().any(|a| a.len() != rank) {
            return Err(Error::DimensionMismatch { expected: rank, got: simple_roots.len() });
        }
        if exact::det(&inner_product).is_zero() {
            return Err(Error::InvalidArgument("degenerate inner product".into()));
        }
        let mut rs = RootSystem {
            kind,
            normalization,
            rank,
            simple_roots,
            inner_product,
            roots: vec![],
            positive_roots: vec![],
            fundamental_weights: vec![],
            rho: exact::zeros(rank),
            weyl_elements: vec![],
            coweight_lattice_basis: vec![],
        };
        rs.weyl_elements = rs.close_weyl_group()?;
        let mut roots: Vec<QVec> = Vec::new();
        for w in &rs.weyl_elements {
            for a in &rs.simple_roots {
                let r = w.apply(a);
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        roots.sort();
        let mut positive = Vec::new();
        for r in &roots {
            let c = rs.simple_coefficients(r);
            if c.iter().all(|x| !x.is_negative()) {
                positive.push(r.clone());
            } else if !c.iter().all(|x| !x.is_positive()) {
                return Err(Error::InvalidArgument("root with mixed-sign coefficients".into()));
            }
        }
        positive.sort_by_key(|r| rs.height(r));
        rs.roots = roots;
        rs.positive_roots = positive;
        // fundamental weights: (w_i, coroot_j) = delta_ij
        let coroots: Vec<QVec> = rs.simple_roots.iter().map(|a| rs.coroot(a)).collect();
        let gc: Vec<QVec> = coroots.iter().map(|c| exact::mat_vec(&rs.inner_product, c)).collect();
        rs.fundamental_weights = (0..rank)
            .map(|i| {
                let e: QVec = (0..rank).map(|j| if i == j { Q::one() } else { Q::zero() }).collect();
                solve_rows(&gc, &e)
            })
            .collect();
        let half = qf(1, 2);
        rs.rho = rs
            .positive_roots
            .iter()
            .fold(exact::zeros(rank), |acc, a| exact::add(&acc, a))
            .iter()
            .map(|x| x * &half)
            .collect();
        // coweights: dual basis of the simple roots under the invariant form
        let ga: Vec<QVec> = rs.simple_roots.iter().map(|a| exact::mat_vec(&rs.inner_product, a)).collect();
        rs.coweight_lattice_basis = (0..rank)
            .map(|i| {
                let e: QVec = (0..rank).map(|j| if i == j { Q::one() } else { Q::zero() }).collect();
                solve_rows(&ga, &e)
            })
            .collect();
        Ok(rs)
    }

    pub fn ip(&self, a: &[Q], b: &[Q]) -> Q {
        exact::dot(a, &exact::mat_vec(&self.inner_product, b))
    }

    pub fn norm_sq(&self, a: &[Q]) -> Q {
        self.ip(a, a)
    }

    pub fn coroot(&self, a: &[Q]) -> QVec {
        let c = q(2) / self.norm_sq(a);
        exact::scale(&c, a)
    }

    pub fn reflect(&self, a: &[Q], x: &[Q]) -> QVec {
        let c = q(2) * self.ip(a, x) / self.norm_sq(a);
        exact::sub(x, &exact::scale(&c, a))
    }

    fn reflection_matrix(&self, a: &[Q]) -> QMat {
        let cols: Vec<QVec> = (0..self.rank)
            .map(|j| {
                let e: QVec = (0..self.rank).map(|i| if i == j { Q::one() } else { Q::zero() }).collect();
                self.reflect(a, &e)
            })
            .collect();
        exact::transpose(&cols)
    }

    fn close_weyl_group(&self) -> Result<Vec<WeylElement>> {
        let gens: Vec<QMat> = self.simple_roots.iter().map(|a| self.reflection_matrix(a)).collect();
        let id = exact::identity(self.rank);
        let mut seen = vec![id.clone()];
        let mut queue = VecDeque::from([id]);
        while let Some(m) = queue.pop_front() {
            for g in &gens {
                let n = exact::mat_mul(g, &m);
                if !seen.contains(&n) {
                    if seen.len() > 1000 {
                        return Err(Error::InvalidArgument("Weyl group closure does not terminate".into()));
                    }
                    seen.push(n.clone());
                    queue.push_back(n);
                }
            }
        }
        Ok(seen
            .into_iter()
            .map(|m| {
                let d = exact::det(&m);
                WeylElement { sign: if d.is_positive() { 1 } else { -1 }, matrix: m }
            })
            .collect())
    }

    /// Coefficients of `v` in the basis of simple roots.
    pub fn simple_coefficients(&self, v: &[Q]) -> QVec {
        exact::solve_cols(&self.simple_roots, v).expect("simple roots form a basis")
    }

    fn height(&self, r: &[Q]) -> Q {
        self.simple_coefficients(r).iter().fold(Q::zero(), |a, b| a + b)
    }

    pub fn is_dominant(&self, lambda: &[Q]) -> bool {
        self.simple_roots.iter().all(|a| !self.ip(a, lambda).is_negative())
    }

    pub fn is_regular(&self, x: &[Q]) -> bool {
        self.positive_roots.iter().all(|a| !self.ip(a, x).is_zero())
    }

    /// True if `lambda` lies in the weight lattice.
    pub fn is_integral(&self, lambda: &[Q]) -> bool {
        self.simple_roots
            .iter()
            .all(|a| self.ip(&self.coroot(a), lambda).is_integer())
    }

    /// Distinct points of the Weyl orbit, in the order of `weyl_elements`.
    pub fn weyl_orbit(&self, lambda: &[Q]) -> Vec<QVec> {
        let mut out: Vec<QVec> = Vec::new();
        for w in &self.weyl_elements {
            let p = w.apply(lambda);
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    pub fn weyl_order(&self) -> usize {
        self.weyl_elements.len()
    }

    /// Order of the centre of the simply connected group.
    pub fn center_order(&self) -> usize {
        match self.kind {
            RootKind::A1 => 2,
            RootKind::A2 => 3,
            RootKind::G2 => 1,
        }
    }

    pub fn group_dimension(&self) -> usize {
        self.rank + self.roots.len()
    }

    pub fn check_weight(&self, lambda: &[Q]) -> Result<()> {
        if lambda.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: lambda.len() });
        }
        Ok(())
    }

    fn check_dominant(&self, lambda: &[Q]) -> Result<()> {
        self.check_weight(lambda)?;
        if !self.is_dominant(lambda) {
            return Err(Error::NotDominant(fmt_vec(lambda)));
        }
        Ok(())
    }

    /// Weyl dimension formula; rational for non-lattice dominant `lambda`.
    pub fn dim_irrep(&self, lambda: &[Q]) -> Result<Q> {
        self.check_dominant(lambda)?;
        let lr = exact::add(lambda, &self.rho);
        Ok(self
            .positive_roots
            .iter()
            .fold(Q::one(), |acc, a| acc * self.ip(a, &lr) / self.ip(a, &self.rho)))
    }

    pub fn orbit_volumes(&self, lambda: &[Q]) -> Result<OrbitVolumes> {
        self.check_weight(lambda)?;
        let mut prod_l = Q::one();
        let mut prod_r = Q::one();
        let mut half_dim = 0i32;
        for a in &self.positive_roots {
            let al = self.ip(a, lambda);
            if al.is_zero() {
                continue;
            }
            half_dim += 1;
            prod_l *= al.abs();
            prod_r *= self.ip(a, &self.rho);
        }
        Ok(OrbitVolumes {
            symplectic: &prod_l / &prod_r,
            riemannian: Volume::rational(&prod_l * &prod_l / &prod_r).with_two_pi(half_dim),
            vol_k_mod_stab: Volume::rational(prod_r.recip()).with_two_pi(-half_dim),
            half_dim: half_dim as usize,
            root_product: prod_l,
        })
    }

    pub fn vol_poly(&self) -> VolPoly {
        VolPoly {
            rank: self.rank,
            factors: self
                .positive_roots
                .iter()
                .map(|a| (exact::mat_vec(&self.inner_product, a), self.ip(a, &self.rho).recip()))
                .collect(),
        }
    }

    /// Covolume of the coweight lattice.
    pub fn vol_torus(&self) -> Volume {
        let b = &self.coweight_lattice_basis;
        let gram: QMat = b.iter().map(|x| b.iter().map(|y| self.ip(x, y)).collect()).collect();
        Volume::sqrt(exact::det(&gram))
    }

    pub fn vol_k_mod_t(&self) -> Volume {
        let p = self
            .positive_roots
            .iter()
            .fold(Q::one(), |acc, a| acc * self.ip(a, &self.rho));
        Volume::rational(p.recip()).with_two_pi(-(self.positive_roots.len() as i32))
    }

    pub fn vol_group(&self) -> Volume {
        self.vol_torus().mul(&self.vol_k_mod_t())
    }

    pub fn to_json(&self) -> RootSystemJson {
        RootSystemJson {
            kind: self.kind,
            normalization: self.normalization,
            simple_roots: self.simple_roots.clone(),
            inner_product: self.inner_product.clone(),
        }
    }

    pub fn from_json(j: &RootSystemJson) -> Result<Self> {
        RootSystem::from_simple_roots(j.kind, j.normalization, j.simple_roots.clone(), j.inner_product.clone())
    }
}

/// Solves `rows * x = e`.
fn solve_rows(rows: &[QVec], e: &[Q]) -> QVec {
    exact::solve_cols(&exact::transpose(&rows.to_vec()), e).expect("invertible")
}

pub fn fmt_vec(v: &[Q]) -> String {
    let parts: Vec<String> = v.iter().map(exact::fmt_q).collect();
    format!("({})", parts.join(", "))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSystemJson {
    pub kind: RootKind,
    pub normalization: Normalization,
    #[serde(with = "exact::serde_q::mat")]
    pub simple_roots: Vec<QVec>,
    #[serde(with = "exact::serde_q::mat")]
    pub inner_product: QMat,
}

/// Exact number of the form `coeff * sqrt(radicand) * (2 pi)^two_pi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Volume {
    pub coeff: Q,
    pub radicand: Q,
    pub two_pi: i32,
}

impl Volume {
    pub fn rational(c: Q) -> Self {
        Volume { coeff: c, radicand: Q::one(), two_pi: 0 }
    }

    pub fn sqrt(r: Q) -> Self {
        match exact::rational_sqrt(&r) {
            Some(s) => Volume::rational(s),
            None => {
                // pull square factors of numerator and denominator out of the radical
                let (cn, rn) = split_square(r.numer());
                let (cd, rd) = split_square(r.denom());
                let den = &cd * &rd;
                Volume {
                    coeff: Q::new(cn, den),
                    radicand: Q::from_integer(rn * rd),
                    two_pi: 0,
                }
            }
        }
    }

    pub fn with_two_pi(mut self, k: i32) -> Self {
        self.two_pi += k;
        self
    }

    pub fn mul(&self, o: &Volume) -> Volume {
        let r = &self.radicand * &o.radicand;
        let mut v = Volume::sqrt(r);
        v.coeff *= &self.coeff * &o.coeff;
        v.two_pi = self.two_pi + o.two_pi;
        v
    }

    pub fn div(&self, o: &Volume) -> Volume {
        let inv = Volume {
            coeff: (&o.coeff * &o.radicand).recip(),
            radicand: o.radicand.clone(),
            two_pi: -o.two_pi,
        };
        self.mul(&inv)
    }

    pub fn powi(&self, n: u32) -> Volume {
        (0..n).fold(Volume::rational(Q::one()), |acc, _| acc.mul(self))
    }

    pub fn to_f64(&self) -> f64 {
        exact::to_f64(&self.coeff)
            * exact::to_f64(&self.radicand).sqrt()
            * (2.0 * std::f64::consts::PI).powi(self.two_pi)
    }
}

fn split_square(n: &num::BigInt) -> (num::BigInt, num::BigInt) {
    // n = c^2 r with r squarefree over small primes; large cofactors stay under the radical
    let mut c = num::BigInt::one();
    let mut r = n.clone();
    let mut p = num::BigInt::from(2);
    while &p * &p <= r && p < num::BigInt::from(10_000) {
        let p2 = &p * &p;
        while (&r % &p2).is_zero() {
            r /= &p2;
            c *= &p;
        }
        p += 1;
    }
    (c, r)
}

impl fmt::Display for Volume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", exact::fmt_q(&self.coeff))?;
        if !self.radicand.is_one() {
            write!(f, "*sqrt({})", exact::fmt_q(&self.radicand))?;
        }
        if self.two_pi != 0 {
            write!(f, "*(2pi)^{}", self.two_pi)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitVolumes {
    pub symplectic: Q,
    pub riemannian: Volume,
    pub vol_k_mod_stab: Volume,
    /// `dim(K/K_lambda) / 2`, the number of positive roots not orthogonal to lambda.
    pub half_dim: usize,
    /// `prod_{(alpha,lambda) > 0} (alpha, lambda)` over positive roots (absolute values).
    pub root_product: Q,
}

/// `lambda -> prod_{alpha > 0} (alpha, lambda) / (alpha, rho)` as a product of linear forms.
#[derive(Debug, Clone, PartialEq)]
pub struct VolPoly {
    pub rank: usize,
    /// `(c, s)`: the factor `s * (c . x)`.
    pub factors: Vec<(QVec, Q)>,
}

impl VolPoly {
    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        self.factors.iter().fold(Q::one(), |acc, (c, s)| acc * s * exact::dot(c, x))
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.factors.iter().fold(1.0, |acc, (c, s)| {
            let l: f64 = c.iter().zip(x).map(|(ci, xi)| exact::to_f64(ci) * xi).sum();
            acc * exact::to_f64(s) * l
        })
    }

    /// The polynomial `x -> self(m x)`.
    pub fn compose(&self, m: &QMat) -> VolPoly {
        let mt = exact::transpose(m);
        VolPoly {
            rank: self.rank,
            factors: self.factors.iter().map(|(c, s)| (exact::mat_vec(&mt, c), s.clone())).collect(),
        }
    }

    pub fn expand(&self) -> MultiPoly {
        let mut p = MultiPoly::constant(self.rank, Q::one());
        for (c, s) in &self.factors {
            p = p.mul_linear(c, s);
        }
        p
    }
}

/// Sparse multivariate polynomial with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    pub rank: usize,
    pub terms: BTreeMap<Vec<u32>, Q>,
}

impl MultiPoly {
    pub fn constant(rank: usize, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; rank], c);
        }
        MultiPoly { rank, terms }
    }

    /// Multiplies by `s * (c . x)`.
    pub fn mul_linear(&self, c: &[Q], s: &Q) -> Self {
        let mut out: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
        for (mono, coef) in &self.terms {
            for (i, ci) in c.iter().enumerate() {
                if ci.is_zero() {
                    continue;
                }
                let mut m = mono.clone();
                m[i] += 1;
                *out.entry(m).or_insert_with(Q::zero) += coef * ci * s;
            }
        }
        out.retain(|_, v| !v.is_zero());
        MultiPoly { rank: self.rank, terms: out }
    }

    pub fn scale(&self, s: &Q) -> Self {
        let mut terms = self.terms.clone();
        for v in terms.values_mut() {
            *v *= s;
        }
        terms.retain(|_, v| !v.is_zero());
        MultiPoly { rank: self.rank, terms }
    }

    pub fn is_homogeneous_of_degree(&self, d: u32) -> bool {
        self.terms.keys().all(|m| m.iter().sum::<u32>() == d)
    }
}

//! Duistermaat-Heckman measures by localization at torus fixed points, induction from
//! the maximal torus, and the norm-square decompositions of the P1 and G2/P examples.

use std::sync::Arc;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, q, qf, qv, QVec, Q};
use crate::lie::{build_root_system, fmt_vec, Normalization, RootKind, RootSystem, RootSystemJson};
use crate::measure::{self, Measure, MeasureJson, PairValue, QuadSpec, SampleSpec, TestFunction};

/// A K-invariant distribution on the dual Lie algebra, stored through its torus data.
#[derive(Debug, Clone)]
pub struct KInvariantMeasure {
    pub rs: RootSystem,
    pub base: Measure,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KInvariantMeasureJson {
    pub root_system: RootSystemJson,
    pub base: MeasureJson,
}

impl KInvariantMeasure {
    pub fn antisymmetrized(&self) -> Result<Measure> {
        self.base.antisymmetrize(&self.rs)
    }

    /// Equality of the antisymmetrized torus data.
    pub fn equal(&self, other: &KInvariantMeasure, spec: &SampleSpec) -> Result<bool> {
        self.antisymmetrized()?.equal(&other.antisymmetrized()?, spec)
    }

    /// `(Ind mu, h) = (mu, Vol^K_T . Res h)`; `res_h` is the restriction of an
    /// invariant function to the Cartan dual.
    pub fn pair(&self, res_h: &TestFunction, quad: &QuadSpec) -> Result<PairValue> {
        let weighted = volume_weighted(&self.rs, res_h);
        self.base.pair_test(&weighted, quad)
    }

    pub fn scale(&self, c: &Q) -> KInvariantMeasure {
        KInvariantMeasure { rs: self.rs.clone(), base: self.base.scale(c) }
    }

    pub fn add(&self, other: &KInvariantMeasure) -> Result<KInvariantMeasure> {
        Ok(KInvariantMeasure { rs: self.rs.clone(), base: self.base.add(&other.base)? })
    }

    pub fn to_json(&self) -> KInvariantMeasureJson {
        KInvariantMeasureJson { root_system: self.rs.to_json(), base: self.base.to_json() }
    }
}

/// `Vol^K_T . h` as a test function on the Cartan dual.
pub fn volume_weighted(rs: &RootSystem, h: &TestFunction) -> TestFunction {
    let vol = rs.vol_poly();
    if rs.rank == 1 {
        let (c, s) = &vol.factors[0];
        let lin = exact::to_f64(&(c[0].clone() * s));
        match h {
            TestFunction::Gaussian { epsilon, center } => {
                return TestFunction::PolyGaussian {
                    coeffs: vec![0.0, lin],
                    epsilon: *epsilon,
                    center: center[0],
                }
            }
            TestFunction::PolyGaussian { coeffs, epsilon, center } => {
                let mut shifted = vec![0.0];
                shifted.extend(coeffs.iter().map(|x| x * lin));
                return TestFunction::PolyGaussian { coeffs: shifted, epsilon: *epsilon, center: *center };
            }
            TestFunction::Callable(_) => {}
        }
    }
    let h = h.clone();
    TestFunction::Callable(Arc::new(move |x: &[f64]| vol.eval_f64(x) * h.eval(x)))
}

/// `exp(-epsilon |x|^2 / 2)` for the invariant norm, as a function on the Cartan dual.
pub fn invariant_gaussian(rs: &RootSystem, epsilon: f64) -> TestFunction {
    let gram: Vec<Vec<f64>> = rs.inner_product.iter().map(|r| exact::vec_to_f64(r)).collect();
    if rs.rank == 1 {
        return TestFunction::gaussian(epsilon * gram[0][0], vec![0.0]);
    }
    TestFunction::callable(move |x: &[f64]| {
        let mut r2 = 0.0;
        for (i, gi) in gram.iter().enumerate() {
            for (j, g) in gi.iter().enumerate() {
                r2 += x[i] * g * x[j];
            }
        }
        (-epsilon * r2 / 2.0).exp()
    })
}

/// The inverted tangent weight `1/beta` as a ray factor pointing into the `zeta` half-space.
pub fn polarize(rs: &RootSystem, beta: &[Q], zeta: &[Q]) -> Result<Measure> {
    let s = rs.ip(beta, zeta);
    if s.is_zero() {
        return Err(Error::ChamberOnWall(fmt_vec(zeta)));
    }
    let z = exact::zeros(rs.rank);
    if s.is_positive() {
        Measure::make(Q::one(), z, vec![beta.to_vec()])
    } else {
        Measure::make(-Q::one(), z, vec![exact::neg(beta)])
    }
}

fn check_chamber(rs: &RootSystem, zeta: &[Q]) -> Result<()> {
    rs.check_weight(zeta)?;
    if rs.roots.iter().any(|a| rs.ip(a, zeta).is_zero()) {
        return Err(Error::ChamberOnWall(fmt_vec(zeta)));
    }
    Ok(())
}

/// Localization sum over fixed points `p` in the Weyl orbit of `lambda`, with the inward
/// roots `(beta, p) < 0` inverted. Its total mass is the symplectic volume.
pub fn coadjoint_dh_t_raw(rs: &RootSystem, lambda: &[Q], zeta: &[Q]) -> Result<Measure> {
    rs.check_weight(lambda)?;
    if !rs.is_dominant(lambda) {
        return Err(Error::NotDominant(fmt_vec(lambda)));
    }
    check_chamber(rs, zeta)?;
    let mut parts = Vec::new();
    for p in rs.weyl_orbit(lambda) {
        let mut m = Measure::delta(p.clone());
        for beta in rs.roots.iter().filter(|b| rs.ip(b, &p).is_negative()) {
            m = m.convolve(&polarize(rs, beta, zeta)?)?;
        }
        parts.push(m);
    }
    Measure::sum(rs.rank, &parts)
}

/// Duistermaat-Heckman measure of the coadjoint orbit through `lambda` for the maximal
/// torus, normalized to unit mass.
pub fn coadjoint_dh_t(rs: &RootSystem, lambda: &[Q], zeta: &[Q]) -> Result<Measure> {
    let raw = coadjoint_dh_t_raw(rs, lambda, zeta)?;
    let vol = rs.orbit_volumes(lambda)?.symplectic;
    Ok(raw.scale(&vol.recip()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chamber {
    Plus,
    Minus,
}

impl std::str::FromStr for Chamber {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "+1" => Ok(Chamber::Plus),
            "-" | "minus" | "-1" => Ok(Chamber::Minus),
            _ => Err(Error::InvalidArgument(format!("chamber must be + or -, got {s:?}"))),
        }
    }
}

fn ray(coeff: Q, at: Q, dir: i64) -> Result<Measure> {
    Measure::make(coeff, vec![at], vec![qv(&[dir])])
}

/// Localization on P1 with circle weights `a < b` at the two poles.
pub fn weighted_p1_dh(a: i64, b: i64, chamber: Chamber) -> Result<Measure> {
    if a >= b {
        return Err(Error::InvalidArgument(format!("need a < b, got a = {a}, b = {b}")));
    }
    let w = qf(1, b - a);
    match chamber {
        Chamber::Plus => ray(w.clone(), q(a), 1)?.sub(&ray(w, q(b), 1)?),
        Chamber::Minus => ray(-w.clone(), q(a), -1)?.add(&ray(w, q(b), -1)?),
    }
}

#[derive(Debug, Clone)]
pub enum StratumMeasure {
    Torus(Measure),
    Invariant(Box<KInvariantMeasure>),
}

impl StratumMeasure {
    pub fn torus_measure(&self) -> &Measure {
        match self {
            StratumMeasure::Torus(m) => m,
            StratumMeasure::Invariant(k) => &k.base,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StratumContribution {
    pub xi: QVec,
    pub measure: StratumMeasure,
}

/// Norm-square contributions for P1 with weights `a < b`, labelled by critical value.
pub fn normsq_strata_p1(a: i64, b: i64) -> Result<Vec<StratumContribution>> {
    if a >= b {
        return Err(Error::InvalidArgument(format!("need a < b, got a = {a}, b = {b}")));
    }
    if a == 0 || b == 0 {
        return Err(Error::InvalidArgument("critical value at the origin boundary is unsupported".into()));
    }
    let w = qf(1, b - a);
    let torus = |xi: i64, m: Measure| StratumContribution { xi: qv(&[xi]), measure: StratumMeasure::Torus(m) };
    Ok(if a < 0 && b > 0 {
        vec![
            torus(a, ray(-w.clone(), q(a), -1)?),
            torus(0, measure::full_line(&qv(&[1]))?.scale(&w)),
            torus(b, ray(-w, q(b), 1)?),
        ]
    } else if a > 0 {
        vec![torus(a, ray(w.clone(), q(a), 1)?), torus(b, ray(-w, q(b), 1)?)]
    } else {
        vec![torus(a, ray(-w.clone(), q(a), -1)?), torus(b, ray(w, q(b), -1)?)]
    })
}

pub fn induce(rs: &RootSystem, mu: &Measure) -> Result<KInvariantMeasure> {
    if mu.rank() != rs.rank {
        return Err(Error::DimensionMismatch { expected: rs.rank, got: mu.rank() });
    }
    Ok(KInvariantMeasure { rs: rs.clone(), base: mu.clone() })
}

/// `|W|^{-1} Ind(Eul(k/t) mu_T)` with the Euler class acting as derivatives along the
/// negative roots.
pub fn abelian_to_nonabelian(rs: &RootSystem, mu_t: &Measure) -> Result<KInvariantMeasure> {
    let mut m = mu_t.clone();
    for a in &rs.positive_roots {
        m = m.directional_derivative(&exact::neg(a))?;
    }
    let inv = Q::new(1.into(), (rs.weyl_order() as i64).into());
    induce(rs, &m.scale(&inv))
}

/// The worked SU(3) example on a G2 coadjoint orbit.
#[derive(Debug, Clone)]
pub struct G2Fixtures {
    pub a2: RootSystem,
    pub g2: RootSystem,
    /// Chamber vector used to orient the inverted weights.
    pub zeta: QVec,
    /// `sum_w (-1)^{l(w)} delta_{w(w1+w2)} * 1/(3 w w1) * 1/(3 w w2)` over `w` in `W(A2)`.
    pub abelian_terms: Measure,
    /// Induction of `chi_P` with coordinate density `1/9`.
    pub expected: KInvariantMeasure,
    /// Contributions at `xi = (w1+w2)/2` and `xi = w1+w2`.
    pub normsq: Vec<StratumContribution>,
    /// The contribution at `(w1+w2)/2` written as a line delta times a ray (half-plane).
    pub halfplane: KInvariantMeasure,
    /// `|w1| |w2|`: area of the fundamental-weight cell for the reference Lebesgue measure.
    pub reference_cell_volume: Q,
    /// `1 / (9 |w1| |w2|)`: density of `expected` relative to the reference measure.
    pub density_constant: Q,
}

pub fn g2_fixtures() -> Result<G2Fixtures> {
    let a2 = build_root_system(RootKind::A2, Normalization::Basic)?;
    let g2 = build_root_system(RootKind::G2, Normalization::Basic)?;
    let zeta = qv(&[2, 1]);
    let (w1, w2) = (qv(&[1, 0]), qv(&[0, 1]));
    let theta = exact::add(&w1, &w2);
    let mut parts = Vec::new();
    for w in &a2.weyl_elements {
        let m = Measure::delta(w.apply(&theta))
            .convolve(&polarize(&a2, &exact::scale(&q(3), &w.apply(&w1)), &zeta)?)?
            .convolve(&polarize(&a2, &exact::scale(&q(3), &w.apply(&w2)), &zeta)?)?
            .scale(&q(w.sign.into()));
        parts.push(m);
    }
    let abelian_terms = Measure::sum(2, &parts)?;
    let ninth = qf(1, 9);
    let p = measure::polygon_indicator(&[w1.clone(), theta.clone(), w2.clone()], &zeta)?.scale(&ninth);
    let qcone = measure::cone_indicator(theta.clone(), vec![w1.clone(), w2.clone()])?.scale(&ninth);
    let expected = induce(&a2, &p)?;
    let xi_half = exact::scale(&qf(1, 2), &theta);
    let normsq = vec![
        StratumContribution { xi: xi_half, measure: StratumMeasure::Invariant(Box::new(induce(&a2, &p.sub(&qcone)?)?)) },
        StratumContribution { xi: theta.clone(), measure: StratumMeasure::Invariant(Box::new(induce(&a2, &qcone)?)) },
    ];
    // line through w1 orthogonal to theta, swept along theta
    let v = exact::sub(&w1, &w2);
    let d = exact::det(&vec![v.clone(), theta.clone()]).abs();
    let halfplane = Measure::delta(w1.clone())
        .convolve(&measure::full_line(&v)?)?
        .convolve(&Measure::make(Q::one(), exact::zeros(2), vec![theta.clone()])?)?
        .scale(&(d * &ninth));
    let n1 = a2.norm_sq(&w1);
    let n2 = a2.norm_sq(&w2);
    let cell = exact::rational_sqrt(&(&n1 * &n2))
        .ok_or_else(|| Error::InvalidArgument("cell volume is irrational".into()))?;
    Ok(G2Fixtures {
        density_constant: (q(9) * &cell).recip(),
        reference_cell_volume: cell,
        halfplane: induce(&a2, &halfplane)?,
        a2,
        g2,
        zeta,
        abelian_terms,
        expected,
        normsq,
    })
}

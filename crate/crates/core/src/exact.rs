//! Exact rational scalars, vectors and small dense matrices.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Q = BigRational;
pub type QVec = Vec<Q>;
pub type QMat = Vec<Vec<Q>>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qv(xs: &[i64]) -> QVec {
    xs.iter().map(|&x| q(x)).collect()
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-0.25"` or `"1e-3"` exactly.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse(format!("empty rational {s:?}")));
    }
    if let Ok(v) = Q::from_str(t) {
        if !v.denom().is_zero() {
            return Ok(v);
        }
    }
    parse_decimal(t).ok_or_else(|| Error::Parse(format!("not a rational: {s:?}")))
}

fn parse_decimal(t: &str) -> Option<Q> {
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut v = Q::from_integer(num);
    if scale >= 0 {
        v *= Q::from_integer(num::pow(ten, scale as usize));
    } else {
        v /= Q::from_integer(num::pow(ten, (-scale) as usize));
    }
    Some(if neg { -v } else { v })
}

pub fn parse_qvec(s: &str) -> Result<QVec> {
    s.split(',').map(parse_q).collect()
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: scale down by shifting bits
        let n = x.numer().bits() as i64;
        let d = x.denom().bits() as i64;
        let shift = (n - d).clamp(-1000, 1000);
        let scaled = if shift >= 0 {
            x / Q::from_integer(BigInt::one() << shift as usize)
        } else {
            x * Q::from_integer(BigInt::one() << (-shift) as usize)
        };
        scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

pub fn vec_to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

/// Best rational approximation with denominator at most `max_den` (continued fractions).
pub fn from_f64_approx(x: f64, max_den: i64) -> Q {
    if !x.is_finite() {
        return Q::zero();
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e18 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    Q::new(BigInt::from(h1), BigInt::from(k1.max(1)))
}

pub fn zeros(n: usize) -> QVec {
    vec![Q::zero(); n]
}

pub fn add(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(c: &Q, a: &[Q]) -> QVec {
    a.iter().map(|x| c * x).collect()
}

pub fn neg(a: &[Q]) -> QVec {
    a.iter().map(|x| -x).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_zero_vec(a: &[Q]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn mat_vec(m: &QMat, v: &[Q]) -> QVec {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul(a: &QMat, b: &QMat) -> QMat {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b).fold(Q::zero(), |acc, (x, br)| acc + x * &br[j]))
                .collect()
        })
        .collect()
}

pub fn transpose(m: &QMat) -> QMat {
    let n = m.first().map_or(0, Vec::len);
    (0..n).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn identity(n: usize) -> QMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect()
}

/// Row echelon form in place; returns pivot columns.
fn echelon(m: &mut QMat) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(vectors: &[QVec]) -> usize {
    let mut m = vectors.to_vec();
    echelon(&mut m).len()
}

pub fn det(m: &QMat) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] -= t;
            }
        }
    }
    d
}

/// Solves `sum_j x_j cols[j] = b` for square, invertible column sets.
pub fn solve_cols(cols: &[QVec], b: &[Q]) -> Option<QVec> {
    let n = b.len();
    if cols.len() != n {
        return None;
    }
    let mut aug: QMat = (0..n)
        .map(|i| {
            let mut row: QVec = cols.iter().map(|c| c[i].clone()).collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    let piv = echelon(&mut aug);
    if piv.len() != n || piv.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

pub fn inverse(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let cols: Vec<QVec> = (0..n).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect();
    let inv_cols: Option<Vec<QVec>> = (0..n)
        .map(|j| {
            let e: QVec = (0..n).map(|i| if i == j { Q::one() } else { Q::zero() }).collect();
            solve_cols(&cols, &e)
        })
        .collect();
    inv_cols.map(|c| transpose(&c))
}

/// Basis of `{y : (row_i, y) = 0 for every row}`.
pub fn nullspace(rows: &[QVec], dim: usize) -> Vec<QVec> {
    let mut m = rows.to_vec();
    let piv = echelon(&mut m);
    let free: Vec<usize> = (0..dim).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut y = zeros(dim);
            y[f] = Q::one();
            for (r, &pc) in piv.iter().enumerate() {
                y[pc] = -m[r][f].clone();
            }
            y
        })
        .collect()
}

/// Scales `v` so its first nonzero entry has absolute value one; returns the factor removed.
pub fn primitive_scale(v: &[Q]) -> Option<(Q, QVec)> {
    let lead = v.iter().find(|x| !x.is_zero())?.abs();
    Some((lead.clone(), v.iter().map(|x| x / &lead).collect()))
}

/// Scales `v` so its first nonzero entry is exactly one (sign included).
pub fn projective_normalize(v: &[Q]) -> Option<QVec> {
    let lead = v.iter().find(|x| !x.is_zero())?.clone();
    Some(v.iter().map(|x| x / &lead).collect())
}

/// If `v = c u` returns `c`.
pub fn parallel_factor(v: &[Q], u: &[Q]) -> Option<Q> {
    let i = u.iter().position(|x| !x.is_zero())?;
    let c = &v[i] / &u[i];
    if c.is_zero() {
        return None;
    }
    v.iter().zip(u).all(|(a, b)| *a == &c * b).then_some(c)
}

/// Exact lattice-free Fourier-Motzkin to find `u` with `(u, v) >= 1` for all `v`.
pub fn strict_half_space_witness(dirs: &[QVec], dim: usize) -> Option<QVec> {
    if dirs.is_empty() {
        let mut u = zeros(dim);
        if dim > 0 {
            u[0] = Q::one();
        }
        return Some(u);
    }
    // constraints a.u >= b
    let mut systems: Vec<Vec<(QVec, Q)>> = vec![dirs.iter().map(|v| (v.clone(), Q::one())).collect()];
    for k in (0..dim).rev() {
        let cur = systems.last().unwrap();
        let (mut pos, mut negs, mut rest) = (vec![], vec![], vec![]);
        for (a, b) in cur {
            if a[k].is_positive() {
                pos.push((a.clone(), b.clone()));
            } else if a[k].is_negative() {
                negs.push((a.clone(), b.clone()));
            } else {
                rest.push((a.clone(), b.clone()));
            }
        }
        let mut next = rest;
        for (ap, bp) in &pos {
            for (an, bn) in &negs {
                let cp = -&an[k];
                let cn = ap[k].clone();
                let a: QVec = ap.iter().zip(an).map(|(x, y)| &cp * x + &cn * y).collect();
                let b = &cp * bp + &cn * bn;
                next.push((a, b));
            }
        }
        dedupe_constraints(&mut next);
        systems.push(next);
    }
    // all variables eliminated: remaining constraints read 0 >= b
    if systems.last().unwrap().iter().any(|(_, b)| b.is_positive()) {
        return None;
    }
    let mut u = zeros(dim);
    for k in 0..dim {
        let sys = &systems[dim - 1 - k];
        let (mut lo, mut hi): (Option<Q>, Option<Q>) = (None, None);
        for (a, b) in sys {
            if a[k].is_zero() {
                continue;
            }
            let partial: Q = (0..k).fold(Q::zero(), |acc, j| acc + &a[j] * &u[j]);
            let bound = (b - partial) / &a[k];
            if a[k].is_positive() {
                lo = Some(lo.map_or(bound.clone(), |l| if bound > l { bound.clone() } else { l }));
            } else {
                hi = Some(hi.map_or(bound.clone(), |h| if bound < h { bound.clone() } else { h }));
            }
        }
        u[k] = match (lo, hi) {
            (Some(l), Some(h)) => (l + h) / q(2),
            (Some(l), None) => l + Q::one(),
            (None, Some(h)) => h - Q::one(),
            (None, None) => Q::zero(),
        };
    }
    Some(u)
}

fn dedupe_constraints(c: &mut Vec<(QVec, Q)>) {
    let mut seen: Vec<(QVec, Q)> = Vec::with_capacity(c.len());
    for (a, b) in c.drain(..) {
        let (a, b) = match a.iter().find(|x| !x.is_zero()) {
            Some(l) => {
                let l = l.abs();
                (a.iter().map(|x| x / &l).collect::<QVec>(), b / &l)
            }
            None => (a, b),
        };
        if !seen.contains(&(a.clone(), b.clone())) {
            seen.push((a, b));
        }
    }
    *c = seen;
}

/// Integer square root test: returns `Some(r)` with `r*r == x` for perfect rational squares.
pub fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| Q::new(n, d))
}

pub mod serde_q {
    //! Serde adapters that write rationals as `"p/q"` strings.
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&fmt_q(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<QVec, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter().map(|s| parse_q(s).map_err(de::Error::custom)).collect()
        }
    }

    pub mod mat {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(m: &[QVec], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(m.len()))?;
            for row in m {
                let r: Vec<String> = row.iter().map(fmt_q).collect();
                seq.serialize_element(&r)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<QMat, D::Error> {
            let v = Vec::<Vec<String>>::deserialize(d)?;
            v.iter()
                .map(|r| r.iter().map(|s| parse_q(s).map_err(de::Error::custom)).collect())
                .collect()
        }
    }
}

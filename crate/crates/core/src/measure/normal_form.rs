//! Canonical piecewise-polynomial form of rank-one measures.

use num::{One, Zero};

use super::Measure;
use crate::error::{Error, Result};
use crate::exact::{q, Q};

/// Density `sum_j coeffs[j] x^j` on the open interval `(lo, hi)`; `None` is unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub lo: Option<Q>,
    pub hi: Option<Q>,
    pub coeffs: Vec<Q>,
}

impl Piece {
    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.lo.as_ref().is_none_or(|l| x > l) && self.hi.as_ref().is_none_or(|h| x < h)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm1d {
    pub breakpoints: Vec<Q>,
    pub pieces: Vec<Piece>,
    pub atoms: Vec<(Q, Q)>,
}

impl NormalForm1d {
    pub fn density(&self, x: &Q) -> Option<Q> {
        self.pieces.iter().find(|p| p.contains(x)).map(|p| p.eval(x))
    }
}

fn trim(mut p: Vec<Q>) -> Vec<Q> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn add_into(acc: &mut Vec<Q>, p: &[Q]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), Q::zero());
    }
    for (a, b) in acc.iter_mut().zip(p) {
        *a += b;
    }
}

/// Coefficients of `c (sigma (x - b))^{k-1} / (k-1)!`.
fn ray_poly(c: &Q, b: &Q, sigma: &Q, k: usize) -> Vec<Q> {
    let mut p = vec![c.clone()];
    for m in 1..k {
        // multiply by sigma (x - b) / m
        let f = sigma / q(m as i64);
        let mut next = vec![Q::zero(); p.len() + 1];
        for (i, a) in p.iter().enumerate() {
            next[i + 1] += a * &f;
            next[i] -= a * &f * b;
        }
        p = next;
    }
    p
}

pub(crate) fn normal_form_1d(m: &Measure) -> Result<NormalForm1d> {
    if m.rank() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: m.rank() });
    }
    let mut atoms: Vec<(Q, Q)> = Vec::new();
    let mut cuts: Vec<Q> = Vec::new();
    for t in m.terms() {
        if t.dirs.is_empty() {
            match atoms.iter_mut().find(|(x, _)| *x == t.base[0]) {
                Some(a) => a.1 += &t.coeff,
                None => atoms.push((t.base[0].clone(), t.coeff.clone())),
            }
        } else {
            cuts.push(t.base[0].clone());
        }
    }
    atoms.retain(|(_, c)| !c.is_zero());
    atoms.sort();
    cuts.sort();
    cuts.dedup();
    // raw pieces between consecutive cuts
    let mut bounds: Vec<(Option<Q>, Option<Q>)> = Vec::new();
    if cuts.is_empty() {
        bounds.push((None, None));
    } else {
        bounds.push((None, Some(cuts[0].clone())));
        for w in cuts.windows(2) {
            bounds.push((Some(w[0].clone()), Some(w[1].clone())));
        }
        bounds.push((Some(cuts[cuts.len() - 1].clone()), None));
    }
    let mut raw: Vec<Piece> = Vec::new();
    for (lo, hi) in bounds {
        // a sample point strictly inside decides which rays are active
        let probe = match (&lo, &hi) {
            (Some(l), Some(h)) => (l + h) / q(2),
            (Some(l), None) => l + Q::one(),
            (None, Some(h)) => h - Q::one(),
            (None, None) => Q::zero(),
        };
        let mut acc: Vec<Q> = Vec::new();
        for t in m.terms().iter().filter(|t| !t.dirs.is_empty()) {
            let sigma = t.dirs[0][0].clone();
            let b = &t.base[0];
            let active = if sigma > Q::zero() { probe > *b } else { probe < *b };
            if active {
                add_into(&mut acc, &ray_poly(&t.coeff, b, &sigma, t.dirs.len()));
            }
        }
        raw.push(Piece { lo, hi, coeffs: trim(acc) });
    }
    // merge neighbours with identical polynomials
    let mut pieces: Vec<Piece> = Vec::new();
    for p in raw {
        match pieces.last_mut() {
            Some(last) if last.coeffs == p.coeffs => last.hi = p.hi,
            _ => pieces.push(p),
        }
    }
    let breakpoints = pieces.iter().filter_map(|p| p.hi.clone()).collect();
    Ok(NormalForm1d { breakpoints, pieces, atoms })
}

//! Pairing measures with test functions.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::{Measure, Term};
use crate::error::{Error, Result};
use crate::exact;
use crate::par::{self, Parallelism};

pub type Callable = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum TestFunction {
    /// `exp(-epsilon |x - center|^2 / 2)` in coordinates.
    Gaussian { epsilon: f64, center: Vec<f64> },
    /// Rank one: `(sum_j coeffs[j] x^j) exp(-epsilon (x - center)^2 / 2)`.
    PolyGaussian { coeffs: Vec<f64>, epsilon: f64, center: f64 },
    /// Caller promises Schwartz-class decay.
    Callable(Callable),
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Gaussian { epsilon, center } => {
                write!(f, "Gaussian(eps={epsilon}, center={center:?})")
            }
            TestFunction::PolyGaussian { coeffs, epsilon, center } => {
                write!(f, "PolyGaussian({coeffs:?}, eps={epsilon}, center={center})")
            }
            TestFunction::Callable(_) => f.write_str("Callable"),
        }
    }
}

impl TestFunction {
    pub fn gaussian(epsilon: f64, center: Vec<f64>) -> Self {
        TestFunction::Gaussian { epsilon, center }
    }

    pub fn callable(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        TestFunction::Callable(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Gaussian { epsilon, center } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                (-epsilon * r2 / 2.0).exp()
            }
            TestFunction::PolyGaussian { coeffs, epsilon, center } => {
                let p = coeffs.iter().rev().fold(0.0, |acc, c| acc * x[0] + c);
                p * (-epsilon * (x[0] - center).powi(2) / 2.0).exp()
            }
            TestFunction::Callable(f) => f(x),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    /// Monte-Carlo samples per term (rank >= 2).
    pub samples: usize,
    pub seed: u64,
    /// Workers for Monte Carlo; results depend on `seed` only.
    pub par: Parallelism,
    /// Absolute error target for one-dimensional quadrature.
    pub tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { samples: 200_000, seed: 0x5eed, par: Parallelism::Sequential, tol: 1e-13 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairValue {
    pub value: f64,
    pub std_error: f64,
}

pub(crate) fn pair_test(m: &Measure, h: &TestFunction, quad: &QuadSpec) -> Result<PairValue> {
    if let TestFunction::Gaussian { center, .. } = h {
        if center.len() != m.rank() {
            return Err(Error::DimensionMismatch { expected: m.rank(), got: center.len() });
        }
    }
    if matches!(h, TestFunction::PolyGaussian { .. }) && m.rank() != 1 {
        return Err(Error::InvalidArgument("polynomial Gaussian test functions are rank one".into()));
    }
    let mut value = 0.0;
    let mut var = 0.0;
    for (idx, t) in m.terms().iter().enumerate() {
        let c = exact::to_f64(&t.coeff);
        let (v, e) = if t.dirs.is_empty() {
            (h.eval(&exact::vec_to_f64(&t.base)), 0.0)
        } else if m.rank() == 1 {
            ray_integral_1d(t, h, quad.tol)
        } else {
            monte_carlo(t, h, quad, idx as u64)
        };
        value += c * v;
        var += c * c * e * e;
    }
    Ok(PairValue { value, std_error: var.sqrt() })
}

/// `int_0^inf s^{k-1}/(k-1)! h(b + sigma s) ds` for a rank-one term.
fn ray_integral_1d(t: &Term, h: &TestFunction, tol: f64) -> (f64, f64) {
    let k = t.dirs.len();
    let b = exact::to_f64(&t.base[0]);
    let sigma = exact::to_f64(&t.dirs[0][0]).signum();
    match h {
        TestFunction::Gaussian { epsilon, center } => {
            (poly_gauss_ray(k, b, sigma, &[1.0], *epsilon, center[0]), 0.0)
        }
        TestFunction::PolyGaussian { coeffs, epsilon, center } => {
            (poly_gauss_ray(k, b, sigma, coeffs, *epsilon, *center), 0.0)
        }
        TestFunction::Callable(f) => {
            let fact: f64 = (1..k).map(|i| i as f64).product();
            // s = u / (1 - u) maps [0, 1) onto [0, inf)
            let g = |u: f64| {
                if u >= 1.0 {
                    return 0.0;
                }
                let s = u / (1.0 - u);
                let jac = 1.0 / ((1.0 - u) * (1.0 - u));
                let w = s.powi(k as i32 - 1) / fact;
                let val = w * f(&[b + sigma * s]) * jac;
                if val.is_finite() {
                    val
                } else {
                    0.0
                }
            };
            let out = quadrature::double_exponential::integrate(g, 0.0, 1.0, tol);
            (out.integral, out.error_estimate)
        }
    }
}

/// Closed form of `int_0^inf s^{k-1}/(k-1)! p(b + sigma s) exp(-eps (b + sigma s - c)^2/2) ds`.
pub(crate) fn poly_gauss_ray(k: usize, b: f64, sigma: f64, coeffs: &[f64], eps: f64, c: f64) -> f64 {
    let (b, c, coeffs): (f64, f64, Vec<f64>) = if sigma < 0.0 {
        let flipped = coeffs
            .iter()
            .enumerate()
            .map(|(j, x)| if j % 2 == 1 { -x } else { *x })
            .collect();
        (-b, -c, flipped)
    } else {
        (b, c, coeffs.to_vec())
    };
    // substitute u = s + A with A = b - c; integrand is q(u) exp(-eps u^2/2) on [A, inf)
    let a = b - c;
    let mut p_shift = vec![0.0; coeffs.len().max(1)];
    for (j, cj) in coeffs.iter().enumerate() {
        // (u + c)^j
        let mut binom = 1.0;
        for i in 0..=j {
            p_shift[i] += cj * binom * c.powi((j - i) as i32);
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
    }
    let mut ray = vec![1.0];
    for m in 1..k {
        // multiply by (u - A)/m
        let mut next = vec![0.0; ray.len() + 1];
        for (i, r) in ray.iter().enumerate() {
            next[i + 1] += r / m as f64;
            next[i] -= a * r / m as f64;
        }
        ray = next;
    }
    let mut poly = vec![0.0; ray.len() + p_shift.len() - 1];
    for (i, r) in ray.iter().enumerate() {
        for (j, p) in p_shift.iter().enumerate() {
            poly[i + j] += r * p;
        }
    }
    let moments = truncated_gaussian_moments(poly.len(), a, eps);
    poly.iter().zip(&moments).map(|(p, m)| p * m).sum()
}

/// `I_j = int_A^inf u^j exp(-eps u^2 / 2) du` for `j < n`.
pub(crate) fn truncated_gaussian_moments(n: usize, a: f64, eps: f64) -> Vec<f64> {
    let g = (-eps * a * a / 2.0).exp();
    let mut m = Vec::with_capacity(n);
    for j in 0..n {
        let v = match j {
            0 => (std::f64::consts::PI / (2.0 * eps)).sqrt() * libm::erfc(a * (eps / 2.0).sqrt()),
            1 => g / eps,
            _ => (a.powi(j as i32 - 1) * g + (j as f64 - 1.0) * m[j - 2]) / eps,
        };
        m.push(v);
    }
    m
}

/// Independent sample streams; fixed so that estimates do not depend on the worker count.
const STREAMS: usize = 64;

/// Importance sampling with `t_i ~ Exp(1)` and weight `h(b + sum t_i v_i) e^{sum t_i}`.
fn monte_carlo(t: &Term, h: &TestFunction, quad: &QuadSpec, term_idx: u64) -> (f64, f64) {
    let base = exact::vec_to_f64(&t.base);
    let dirs: Vec<Vec<f64>> = t.dirs.iter().map(|v| exact::vec_to_f64(v)).collect();
    let n = quad.samples.max(2);
    let chunks = par::map_indexed(STREAMS, quad.par, |w| {
        let count = n / STREAMS + usize::from(w < n % STREAMS);
        let mut rng = ChaCha8Rng::seed_from_u64(par::derive_seed(quad.seed, term_idx, w as u64));
        let mut x = vec![0.0; base.len()];
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            x.copy_from_slice(&base);
            let mut tsum = 0.0;
            for v in &dirs {
                let ti: f64 = Exp1.sample(&mut rng);
                tsum += ti;
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += ti * vi;
                }
            }
            let w = h.eval(&x) * tsum.exp();
            s1 += w;
            s2 += w * w;
        }
        (s1, s2, count)
    });
    let (s1, s2, cnt) = chunks
        .iter()
        .fold((0.0, 0.0, 0usize), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    let mean = s1 / cnt as f64;
    let var = (s2 / cnt as f64 - mean * mean).max(0.0);
    (mean, (var / cnt as f64).sqrt())
}

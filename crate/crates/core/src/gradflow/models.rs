//! Concrete gradient systems: linear torus actions on C^n, the two-chart P1 model and
//! homogeneous test functions.

use num::{Signed, Zero};

use super::{GradientSystem, State};
use crate::error::{Error, Result};
use crate::exact::{self, QVec, Q};

/// `Phi(z) = sum_j |z_j|^2 mu_j + shift` on `C^n` with the flat metric.
#[derive(Debug, Clone)]
pub struct FlowSystem {
    pub complex_dim: usize,
    pub torus_rank: usize,
    pub weights: Vec<Vec<i64>>,
    pub shift: QVec,
    /// Whether `|Phi| -> infinity` with `|z|`; otherwise flows are only trusted for bounded data.
    pub proper: bool,
    weights_f: Vec<Vec<f64>>,
    shift_f: Vec<f64>,
}

pub fn build_local_model(weights: Vec<Vec<i64>>, shift: QVec) -> Result<FlowSystem> {
    let k = shift.len();
    if weights.is_empty() || k == 0 {
        return Err(Error::InvalidArgument("empty local model".into()));
    }
    for w in &weights {
        if w.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: w.len() });
        }
        if w.iter().all(|x| *x == 0) {
            return Err(Error::InvalidArgument("zero weight row".into()));
        }
    }
    let qw: Vec<QVec> = weights.iter().map(|w| exact::qv(w)).collect();
    // 0 outside the convex hull of the weights iff some covector is positive on all of them
    let proper = exact::strict_half_space_witness(&qw, k).is_some();
    Ok(FlowSystem {
        complex_dim: weights.len(),
        torus_rank: k,
        weights_f: weights.iter().map(|w| w.iter().map(|x| *x as f64).collect()).collect(),
        shift_f: exact::vec_to_f64(&shift),
        weights,
        shift,
        proper,
    })
}

impl FlowSystem {
    /// Moment map at real coordinates `(re_1, im_1, ..., re_n, im_n)`.
    pub fn moment(&self, x: &[f64]) -> Vec<f64> {
        let mut phi = self.shift_f.clone();
        for (j, w) in self.weights_f.iter().enumerate() {
            let r2 = x[2 * j] * x[2 * j] + x[2 * j + 1] * x[2 * j + 1];
            for (p, wi) in phi.iter_mut().zip(w) {
                *p += r2 * wi;
            }
        }
        phi
    }

    fn coupling(&self, phi: &[f64]) -> Vec<f64> {
        self.weights_f.iter().map(|w| w.iter().zip(phi).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn moment_exact(&self, x: &[Q]) -> QVec {
        let mut phi = self.shift.clone();
        for (j, w) in self.weights.iter().enumerate() {
            let r2 = &x[2 * j] * &x[2 * j] + &x[2 * j + 1] * &x[2 * j + 1];
            for (p, wi) in phi.iter_mut().zip(w) {
                *p += &r2 * Q::from_integer((*wi).into());
            }
        }
        phi
    }

    pub fn f_exact(&self, x: &[Q]) -> Q {
        let phi = self.moment_exact(x);
        exact::dot(&phi, &phi) / Q::from_integer(2.into())
    }

    /// `grad f = 2 (mu_j . Phi) z_j` in real coordinates.
    pub fn grad_exact(&self, x: &[Q]) -> QVec {
        let phi = self.moment_exact(x);
        let mut g = Vec::with_capacity(x.len());
        for (j, w) in self.weights.iter().enumerate() {
            let c: Q = w.iter().zip(&phi).map(|(a, p)| p * Q::from_integer((*a).into())).sum();
            let two_c = c * Q::from_integer(2.into());
            g.push(&two_c * &x[2 * j]);
            g.push(&two_c * &x[2 * j + 1]);
        }
        g
    }

    /// Fixed by the vector field generated by `Phi(z)`: `(mu_j, Phi) = 0` wherever `z_j != 0`.
    pub fn is_critical_exact(&self, x: &[Q]) -> bool {
        self.grad_exact(x).iter().all(Zero::is_zero)
    }

    pub fn is_critical(&self, x: &[f64], tol: f64) -> bool {
        self.grad_norm(&State::flat(x.to_vec())) <= tol
    }

    /// `x -> exp(i theta . mu_j) z_j`.
    pub fn rotate(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for (j, w) in self.weights_f.iter().enumerate() {
            let a: f64 = w.iter().zip(theta).map(|(p, t)| p * t).sum();
            let (s, c) = a.sin_cos();
            out[2 * j] = c * x[2 * j] - s * x[2 * j + 1];
            out[2 * j + 1] = s * x[2 * j] + c * x[2 * j + 1];
        }
        out
    }

    pub fn has_nonnegative_shift(&self) -> bool {
        !self.shift.iter().any(Signed::is_negative)
    }
}

impl GradientSystem for FlowSystem {
    fn dim(&self) -> usize {
        2 * self.complex_dim
    }

    fn f(&self, s: &State) -> f64 {
        let phi = self.moment(&s.x);
        0.5 * phi.iter().map(|p| p * p).sum::<f64>()
    }

    fn velocity(&self, _chart: u8, x: &[f64]) -> Vec<f64> {
        let c = self.coupling(&self.moment(x));
        x.iter().enumerate().map(|(i, xi)| -2.0 * c[i / 2] * xi).collect()
    }

    fn excess(&self, s: &State, base: &State) -> f64 {
        // (|Phi_s|^2 - |Phi_b|^2) / 2 from the moment difference, free of cancellation
        let mut diff = vec![0.0; self.torus_rank];
        for (j, w) in self.weights_f.iter().enumerate() {
            let a = s.x[2 * j] * s.x[2 * j] + s.x[2 * j + 1] * s.x[2 * j + 1];
            let b = base.x[2 * j] * base.x[2 * j] + base.x[2 * j + 1] * base.x[2 * j + 1];
            for (d, wi) in diff.iter_mut().zip(w) {
                *d += (a - b) * wi;
            }
        }
        let ps = self.moment(&s.x);
        let pb = self.moment(&base.x);
        0.5 * diff.iter().zip(ps.iter().zip(&pb)).map(|(d, (a, b))| d * (a + b)).sum::<f64>()
    }

    fn is_complex(&self) -> bool {
        true
    }
}

/// Circle action on P1 with weights `a < b`, in the affine charts `w = z2/z1` (chart 0)
/// and `u = z1/z2` (chart 1), with metric `2(b - a)/(1 + |w|^2)^2 |dw|^2`.
#[derive(Debug, Clone, Copy)]
pub struct P1Model {
    pub a: f64,
    pub b: f64,
}

impl P1Model {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a >= b {
            return Err(Error::InvalidArgument(format!("need a < b, got a = {a}, b = {b}")));
        }
        Ok(P1Model { a: a as f64, b: b as f64 })
    }

    pub fn moment(&self, s: &State) -> f64 {
        let r2 = s.x[0] * s.x[0] + s.x[1] * s.x[1];
        match s.chart {
            0 => (self.a + self.b * r2) / (1.0 + r2),
            _ => (self.a * r2 + self.b) / (1.0 + r2),
        }
    }

    /// Point of the affine chart where `|coordinate| <= 1`.
    pub fn from_affine(re: f64, im: f64) -> State {
        let r2 = re * re + im * im;
        if r2 <= 1.0 {
            State { chart: 0, x: vec![re, im] }
        } else {
            State { chart: 1, x: vec![re / r2, -im / r2] }
        }
    }

    pub fn south_pole() -> State {
        State { chart: 0, x: vec![0.0, 0.0] }
    }

    pub fn north_pole() -> State {
        State { chart: 1, x: vec![0.0, 0.0] }
    }

    /// Unit vector in R^3; chart 1 origin is `(0, 0, 1)`.
    pub fn embed(s: &State) -> [f64; 3] {
        let (x, y) = (s.x[0], s.x[1]);
        let r2 = x * x + y * y;
        let d = 1.0 + r2;
        match s.chart {
            0 => [2.0 * x / d, 2.0 * y / d, (r2 - 1.0) / d],
            _ => [2.0 * x / d, -2.0 * y / d, (1.0 - r2) / d],
        }
    }
}

impl GradientSystem for P1Model {
    fn dim(&self) -> usize {
        2
    }

    fn f(&self, s: &State) -> f64 {
        0.5 * self.moment(s).powi(2)
    }

    fn velocity(&self, chart: u8, x: &[f64]) -> Vec<f64> {
        // grad Phi is the radial field w (chart 0) or -u (chart 1)
        let phi = self.moment(&State { chart, x: x.to_vec() });
        let sign = if chart == 0 { -1.0 } else { 1.0 };
        x.iter().map(|xi| sign * phi * xi).collect()
    }

    fn grad_norm(&self, s: &State) -> f64 {
        let r2 = s.x[0] * s.x[0] + s.x[1] * s.x[1];
        let metric = 2.0 * (self.b - self.a) / (1.0 + r2).powi(2);
        self.moment(s).abs() * (metric * r2).sqrt()
    }

    fn rechart(&self, s: State) -> State {
        let r2 = s.x[0] * s.x[0] + s.x[1] * s.x[1];
        if r2 > 1.0 {
            State { chart: 1 - s.chart, x: vec![s.x[0] / r2, -s.x[1] / r2] }
        } else {
            s
        }
    }

    fn distance(&self, a: &State, b: &State) -> f64 {
        let (p, q) = (P1Model::embed(a), P1Model::embed(b));
        p.iter().zip(&q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }
}

/// `f(x) = |x|^degree` on `R^dim`.
#[derive(Debug, Clone, Copy)]
pub struct HomogeneousSystem {
    pub dim: usize,
    pub degree: u32,
}

impl GradientSystem for HomogeneousSystem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn f(&self, s: &State) -> f64 {
        s.x.iter().map(|v| v * v).sum::<f64>().powf(self.degree as f64 / 2.0)
    }

    fn velocity(&self, _chart: u8, x: &[f64]) -> Vec<f64> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let d = self.degree as f64;
        let c = d * r2.powf(d / 2.0 - 1.0);
        x.iter().map(|v| -c * v).collect()
    }
}

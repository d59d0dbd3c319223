//! Lojasiewicz exponents and convergence rates fitted from trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GradientSystem, State, Trajectory};
use crate::error::{Error, Result};

/// Least squares `y = a + b x`; returns `(a, b, rms residual, standard error of b)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let rms = (ss / n).sqrt();
    let se = if n > 2.0 { (ss / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (a, b, rms, se)
}

/// Start of the asymptotic window: the first tenth of the log-time range, measured from
/// `t = 1`, is dropped.
fn window_start(t_first: f64, t_last: f64) -> f64 {
    if t_last > std::f64::consts::E {
        (0.1 * t_last.ln()).exp().max(t_first)
    } else {
        t_first
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LojFit {
    pub gamma: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
    /// Decades of `f - c` covered.
    pub decades: f64,
}

fn loj_from_pairs(pairs: &[(f64, f64)]) -> Result<LojFit> {
    if pairs.len() < 5 {
        return Err(Error::InsufficientRange(format!("{} usable points", pairs.len())));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let decades = (hi - lo) / std::f64::consts::LN_10;
    if decades < 2.0 {
        return Err(Error::InsufficientRange(format!("f - c spans {decades:.2} decades")));
    }
    let (_, b, _, se) = linear_fit(&xs, &ys);
    Ok(LojFit { gamma: b, ci_low: b - 1.96 * se, ci_high: b + 1.96 * se, points: pairs.len(), decades })
}

/// Slope of `log |grad f|` against `log (f - f(limit))` on the asymptotic window.
pub fn lojasiewicz_fit<S: GradientSystem + ?Sized>(sys: &S, traj: &Trajectory) -> Result<LojFit> {
    let limit = traj.limit.as_ref().ok_or_else(|| Error::NoFit("trajectory has no limit".into()))?;
    let g_floor = 100.0 * sys.grad_norm(limit).max(f64::MIN_POSITIVE);
    let t_first = traj.times.iter().cloned().find(|t| *t > 0.0).unwrap_or(0.0);
    let t0 = window_start(t_first, *traj.times.last().unwrap_or(&0.0));
    let pairs: Vec<(f64, f64)> = traj
        .states
        .iter()
        .zip(&traj.times)
        .zip(&traj.grad_norms)
        .filter(|((_, t), g)| **t >= t0 && **g > g_floor)
        .map(|((s, _), g)| (sys.excess(s, limit), *g))
        .filter(|(e, _)| *e > 0.0)
        .collect();
    loj_from_pairs(&pairs)
}

/// The same fit from `samples` random points around `center` at radii log-uniform in
/// `[r_lo, r_hi]`.
pub fn lojasiewicz_fit_sampled<S: GradientSystem + ?Sized>(
    sys: &S,
    center: &State,
    r_lo: f64,
    r_hi: f64,
    samples: usize,
    seed: u64,
) -> Result<LojFit> {
    if !(0.0 < r_lo && r_lo < r_hi) {
        return Err(Error::InvalidArgument("need 0 < r_lo < r_hi".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut dir: Vec<f64> = (0..center.x.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1e-3 {
            continue;
        }
        let r = (r_lo.ln() + rng.random::<f64>() * (r_hi / r_lo).ln()).exp();
        for (d, c) in dir.iter_mut().zip(&center.x) {
            *d = c + *d / n * r;
        }
        let s = State { chart: center.chart, x: dir };
        let e = sys.excess(&s, center);
        let g = sys.grad_norm(&s);
        if e > 0.0 && g > 0.0 {
            pairs.push((e, g));
        }
    }
    loj_from_pairs(&pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Rate {
    /// `d ~ C exp(-k t)`; `k` is infinite for a trajectory that starts at its limit.
    Exponential { k: f64 },
    /// `d ~ C t^p`.
    Power { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: Rate,
    pub log_constant: f64,
    pub rms_exponential: f64,
    pub rms_power: f64,
    pub window: (f64, f64),
}

/// Linear interpolation of `ys` over increasing `xs` at `x`.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|v| *v < x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    ys[i - 1] * (1.0 - w) + ys[i] * w
}

/// Fits `log d(m_t, m_inf)` linearly in `t` and in `log t`, resampled uniformly in each
/// variable over the asymptotic window, and keeps the model with the smaller residual.
pub fn rate_classify<S: GradientSystem + ?Sized>(sys: &S, traj: &Trajectory) -> Result<RateFit> {
    const RESAMPLE: usize = 200;
    const MAX_RMS: f64 = 0.5;
    let limit = traj.limit.as_ref().ok_or_else(|| Error::NoFit("trajectory has no limit".into()))?;
    let floor = (10.0 * traj.limit_gap).max(f64::MIN_POSITIVE);
    let dists: Vec<f64> = traj.states.iter().map(|s| sys.distance(s, limit)).collect();
    if dists.iter().all(|d| *d <= floor) {
        return Ok(RateFit {
            rate: Rate::Exponential { k: f64::INFINITY },
            log_constant: f64::NEG_INFINITY,
            rms_exponential: 0.0,
            rms_power: 0.0,
            window: (0.0, *traj.times.last().unwrap_or(&0.0)),
        });
    }
    let usable: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&dists)
        .filter(|(t, d)| **t > 0.0 && **d > floor)
        .map(|(t, d)| (*t, d.ln()))
        .collect();
    if usable.len() < 8 {
        return Err(Error::NoFit(format!("{} usable points", usable.len())));
    }
    let t_last = usable[usable.len() - 1].0;
    let t0 = window_start(usable[0].0, t_last);
    let win: Vec<(f64, f64)> = usable.into_iter().filter(|(t, _)| *t >= t0).collect();
    if win.len() < 8 || !(t_last > t0) {
        return Err(Error::NoFit("window too short".into()));
    }
    let ts: Vec<f64> = win.iter().map(|p| p.0).collect();
    let lds: Vec<f64> = win.iter().map(|p| p.1).collect();
    let grid = |i: usize| i as f64 / (RESAMPLE - 1) as f64;
    let lin_t: Vec<f64> = (0..RESAMPLE).map(|i| t0 + (t_last - t0) * grid(i)).collect();
    let lin_y: Vec<f64> = lin_t.iter().map(|t| interp(&ts, &lds, *t)).collect();
    let (ae, be, rms_e, _) = linear_fit(&lin_t, &lin_y);
    let log_t: Vec<f64> = (0..RESAMPLE).map(|i| t0.ln() + (t_last / t0).ln() * grid(i)).collect();
    let log_y: Vec<f64> = log_t.iter().map(|lt| interp(&ts, &lds, lt.exp())).collect();
    let (ap, bp, rms_p, _) = linear_fit(&log_t, &log_y);
    if rms_e.min(rms_p) > MAX_RMS {
        return Err(Error::NoFit(format!("residuals {rms_e:.3} (exponential), {rms_p:.3} (power)")));
    }
    let (rate, log_constant) = if rms_e <= rms_p { (Rate::Exponential { k: -be }, ae) } else { (Rate::Power { p: bp }, ap) };
    Ok(RateFit { rate, log_constant, rms_exponential: rms_e, rms_power: rms_p, window: (t0, t_last) })
}

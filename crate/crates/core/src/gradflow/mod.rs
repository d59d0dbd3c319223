//! Negative gradient flow of `f = |Phi|^2 / 2` with an adaptive Dormand-Prince pair.

mod basin;
mod fit;
mod models;

pub use basin::{basin_classify, BasinOptions, BasinReport, BasinStats, ContinuityPoint};
pub use fit::{lojasiewicz_fit, lojasiewicz_fit_sampled, rate_classify, LojFit, Rate, RateFit};
pub use models::{build_local_model, FlowSystem, HomogeneousSystem, P1Model};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in chart `chart` with real coordinates `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub chart: u8,
    pub x: Vec<f64>,
}

impl State {
    pub fn flat(x: Vec<f64>) -> Self {
        State { chart: 0, x }
    }
}

pub trait GradientSystem: Sync {
    /// Real dimension of each chart.
    fn dim(&self) -> usize;
    fn f(&self, s: &State) -> f64;
    /// `-grad f` in chart coordinates.
    fn velocity(&self, chart: u8, x: &[f64]) -> Vec<f64>;

    /// Metric norm of `grad f`.
    fn grad_norm(&self, s: &State) -> f64 {
        self.velocity(s.chart, &s.x).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `f(s) - f(base)`.
    fn excess(&self, s: &State, base: &State) -> f64 {
        self.f(s) - self.f(base)
    }

    fn rechart(&self, s: State) -> State {
        s
    }

    fn distance(&self, a: &State, b: &State) -> f64 {
        a.x.iter().zip(&b.x).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
    }

    /// Coordinates are `(re, im)` pairs.
    fn is_complex(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Stop once `|grad f|` falls below this.
    pub stop_threshold: f64,
    /// Stricter threshold used to locate the limit after stopping.
    pub limit_threshold: f64,
    /// Time horizon for the limit search.
    pub limit_max_time: f64,
    pub h0: f64,
    pub h_min: f64,
    pub max_steps: usize,
    /// Continue past the stop to locate the limit.
    pub find_limit: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            rtol: 1e-10,
            atol: 1e-20,
            stop_threshold: 1e-10,
            limit_threshold: 1e-14,
            limit_max_time: 1e12,
            h0: 1e-3,
            h_min: 1e-14,
            max_steps: 2_000_000,
            find_limit: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FlowStatus {
    Converged,
    TimeLimit,
    StepUnderflow { t: f64 },
    StepLimit,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected_error: usize,
    pub rejected_monotone: usize,
    pub rtol: f64,
    pub atol: f64,
    pub stop_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub f_values: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub limit: Option<State>,
    /// Distance between the limit and the state where `|grad f|` was ten times larger.
    pub limit_gap: f64,
    pub status: FlowStatus,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn check(&self) -> Result<&Self> {
        match self.status {
            FlowStatus::StepUnderflow { t } => Err(Error::StepUnderflow { t }),
            _ => Ok(self),
        }
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("nonempty trajectory")
    }

    /// Columns `t, chart, coordinates, f, grad_norm`.
    pub fn to_csv(&self, complex: bool) -> String {
        let d = self.states.first().map_or(0, |s| s.x.len());
        let mut cols = vec!["t".to_string(), "chart".to_string()];
        for i in 0..d {
            cols.push(if complex {
                format!("{}_{}", if i % 2 == 0 { "re" } else { "im" }, i / 2 + 1)
            } else {
                format!("x_{}", i + 1)
            });
        }
        cols.push("f".into());
        cols.push("grad_norm".into());
        let mut out = cols.join(",");
        out.push('\n');
        for (i, s) in self.states.iter().enumerate() {
            let xs: Vec<String> = s.x.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&format!(
                "{:e},{},{},{:e},{:e}\n",
                self.times[i],
                s.chart,
                xs.join(","),
                self.f_values[i],
                self.grad_norms[i]
            ));
        }
        out
    }
}

// Dormand-Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One trial step; returns the fifth-order solution and the scaled error norm.
fn dp_step<S: GradientSystem + ?Sized>(sys: &S, chart: u8, x: &[f64], h: f64, opts: &FlowOptions) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    for stage in 0..7 {
        let mut y = x.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let a = A[stage][j];
            if a != 0.0 {
                for i in 0..n {
                    y[i] += h * a * kj[i];
                }
            }
        }
        k.push(sys.velocity(chart, &y));
    }
    let mut y5 = x.to_vec();
    let mut err = 0.0f64;
    for i in 0..n {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = opts.atol + opts.rtol * x[i].abs().max(y5[i].abs());
        err = err.max((h * (d5 - d4)).abs() / scale);
    }
    (y5, err)
}

struct Stepper<'a, S: GradientSystem + ?Sized> {
    sys: &'a S,
    opts: FlowOptions,
    h: f64,
    stats: IntegratorStats,
}

enum StepOutcome {
    Accepted(State, f64),
    Underflow,
}

impl<S: GradientSystem + ?Sized> Stepper<'_, S> {
    fn step(&mut self, s: &State, t: f64, t_max: f64) -> StepOutcome {
        let f_old = self.sys.f(s);
        loop {
            if self.h < self.opts.h_min {
                return StepOutcome::Underflow;
            }
            let h = self.h.min(t_max - t);
            if h <= 0.0 {
                return StepOutcome::Underflow;
            }
            let (y, err) = dp_step(self.sys, s.chart, &s.x, h, &self.opts);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(err <= 1.0) || y.iter().any(|v| !v.is_finite()) {
                self.stats.rejected_error += 1;
                self.h = h * factor.min(0.5);
                continue;
            }
            let next = State { chart: s.chart, x: y };
            let rise = self.sys.excess(&next, s);
            if rise > 8.0 * f64::EPSILON * f_old.abs() {
                self.stats.rejected_monotone += 1;
                self.h = h * 0.5;
                continue;
            }
            self.stats.accepted += 1;
            if self.h <= h {
                self.h = h * factor;
            }
            return StepOutcome::Accepted(self.sys.rechart(next), t + h);
        }
    }
}

/// Integrates `z' = -grad f(z)` from `start` until `t_end` or `|grad f| < stop_threshold`,
/// then continues unrecorded to the stricter limit threshold.
pub fn integrate<S: GradientSystem + ?Sized>(sys: &S, start: State, t_end: f64, opts: &FlowOptions) -> Result<Trajectory> {
    if !(opts.rtol > 0.0 && opts.atol > 0.0 && opts.stop_threshold > 0.0 && opts.limit_threshold > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument("t_end must be positive".into()));
    }
    if start.x.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), got: start.x.len() });
    }
    let mut st = Stepper {
        sys,
        opts: *opts,
        h: opts.h0,
        stats: IntegratorStats { rtol: opts.rtol, atol: opts.atol, stop_threshold: opts.stop_threshold, ..Default::default() },
    };
    let start = sys.rechart(start);
    let mut traj = Trajectory {
        times: vec![0.0],
        f_values: vec![sys.f(&start)],
        grad_norms: vec![sys.grad_norm(&start)],
        states: vec![start],
        limit: None,
        limit_gap: 0.0,
        status: FlowStatus::TimeLimit,
        stats: IntegratorStats::default(),
    };
    let mut t = 0.0;
    let mut s = traj.states[0].clone();
    let mut g = traj.grad_norms[0];
    while g >= opts.stop_threshold && t < t_end {
        if st.stats.accepted >= opts.max_steps {
            traj.status = FlowStatus::StepLimit;
            break;
        }
        match st.step(&s, t, t_end) {
            StepOutcome::Accepted(next, tn) => {
                s = next;
                t = tn;
                g = sys.grad_norm(&s);
                traj.times.push(t);
                traj.f_values.push(sys.f(&s));
                traj.grad_norms.push(g);
                traj.states.push(s.clone());
            }
            StepOutcome::Underflow => {
                traj.status = FlowStatus::StepUnderflow { t };
                break;
            }
        }
    }
    if g < opts.stop_threshold {
        traj.status = FlowStatus::Converged;
    }
    if opts.find_limit && matches!(traj.status, FlowStatus::Converged | FlowStatus::TimeLimit) {
        // unrecorded continuation to the strict threshold, or until the state stops moving
        // at the integrator's resolution
        const WINDOW: usize = 200;
        let mut marker: Option<State> = None;
        let mut anchor = (s.clone(), 0usize);
        let mut stalled: Option<f64> = None;
        let mut budget = opts.max_steps;
        while g >= opts.limit_threshold && t < opts.limit_max_time && budget > 0 {
            budget -= 1;
            match st.step(&s, t, opts.limit_max_time) {
                StepOutcome::Accepted(next, tn) => {
                    s = next;
                    t = tn;
                    g = sys.grad_norm(&s);
                    if g < 10.0 * opts.limit_threshold && marker.is_none() {
                        marker = Some(s.clone());
                    }
                    anchor.1 += 1;
                    if anchor.1 == WINDOW {
                        let moved = sys.distance(&anchor.0, &s);
                        let size = s.x.iter().map(|v| v * v).sum::<f64>().sqrt() + opts.atol;
                        if g < opts.stop_threshold && moved < 100.0 * opts.rtol * size {
                            stalled = Some(moved);
                            break;
                        }
                        anchor = (s.clone(), 0);
                    }
                }
                StepOutcome::Underflow => break,
            }
        }
        if g < opts.limit_threshold {
            traj.limit_gap = marker.map_or(0.0, |m| sys.distance(&m, &s));
            traj.limit = Some(s);
        } else if let Some(moved) = stalled {
            traj.limit_gap = moved;
            traj.limit = Some(s);
        }
    }
    traj.stats = st.stats;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qv};

    #[test]
    fn quartic_closed_form() {
        let sys = build_local_model(vec![vec![1]], qv(&[0])).unwrap();
        let tr = integrate(&sys, State::flat(vec![1.0, 0.0]), 100.0, &FlowOptions::default()).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let r2 = s.x[0] * s.x[0] + s.x[1] * s.x[1];
            assert!((r2 * (1.0 + 4.0 * t) - 1.0).abs() < 1e-6, "t = {t}");
        }
        assert!(tr.f_values.windows(2).all(|w| w[1] <= w[0]));
        assert!(tr.limit.is_some());
    }

    #[test]
    fn critical_start_is_constant() {
        let sys = build_local_model(vec![vec![1], vec![-1]], qv(&[0])).unwrap();
        let tr = integrate(&sys, State::flat(vec![0.5, 0.0, 0.0, 0.5]), 10.0, &FlowOptions::default()).unwrap();
        assert_eq!(tr.status, FlowStatus::Converged);
        assert_eq!(tr.states.len(), 1);
        assert!(sys.is_critical_exact(&[q(1), q(0), q(0), q(1)]));
    }

    #[test]
    fn zero_weight_rejected() {
        assert!(build_local_model(vec![vec![0, 0]], qv(&[1, 0])).is_err());
    }
}

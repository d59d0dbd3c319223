//! Kirwan-Ness basins of the P1 model.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fit::{rate_classify, Rate};
use super::{integrate, FlowOptions, GradientSystem, P1Model, State, Trajectory};
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};

#[derive(Debug, Clone)]
pub struct BasinOptions {
    pub samples: usize,
    pub seed: u64,
    pub t_end: f64,
    pub flow: FlowOptions,
    pub par: Parallelism,
    /// Generic starts have `|w|` log-uniform in this range.
    pub radius_range: (f64, f64),
    pub continuity_pairs: usize,
    pub deltas: Vec<f64>,
}

impl Default for BasinOptions {
    fn default() -> Self {
        BasinOptions {
            samples: 1000,
            seed: 0x6a5e,
            t_end: 200.0,
            flow: FlowOptions::default(),
            par: Parallelism::Sequential,
            radius_range: (0.1, 10.0),
            continuity_pairs: 20,
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinStats {
    pub count: usize,
    pub fraction: f64,
    /// Mean fitted exponential rate over trajectories whose rate is finite.
    pub mean_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityPoint {
    pub delta: f64,
    /// Largest chordal distance between limits of starts `delta` apart.
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    /// Keyed by critical value.
    pub strata: BTreeMap<String, BasinStats>,
    pub unconverged: usize,
    /// Labels of the limits of the south (`w = 0`) and north (`u = 0`) poles.
    pub poles: (String, String),
    /// Largest `|Phi|` at a limit in the `0` stratum.
    pub max_level_error: f64,
    pub continuity: Vec<ContinuityPoint>,
    pub continuity_monotone: bool,
    /// Exponent `beta` of a fitted modulus `C delta^beta`.
    pub modulus_exponent: f64,
}

fn critical_values(m: &P1Model) -> Vec<f64> {
    let mut v = vec![m.a, m.b];
    if m.a < 0.0 && m.b > 0.0 {
        v.insert(1, 0.0);
    }
    v
}

fn label(x: f64) -> String {
    format!("{}", x)
}

fn classify(m: &P1Model, limit: &State) -> f64 {
    let phi = m.moment(limit);
    critical_values(m)
        .into_iter()
        .min_by(|x, y| (x - phi).abs().total_cmp(&(y - phi).abs()))
        .expect("nonempty")
}

fn random_start(rng: &mut ChaCha8Rng, range: (f64, f64)) -> (f64, f64) {
    let r = (range.0.ln() + rng.random::<f64>() * (range.1 / range.0).ln()).exp();
    let th = rng.random::<f64>() * std::f64::consts::TAU;
    (r * th.cos(), r * th.sin())
}

struct Outcome {
    limit: Option<State>,
    rate: Option<f64>,
}

fn run(m: &P1Model, start: State, opts: &BasinOptions) -> Result<Outcome> {
    let tr: Trajectory = integrate(m, start, opts.t_end, &opts.flow)?;
    if tr.check().is_err() {
        return Ok(Outcome { limit: None, rate: None });
    }
    let rate = match rate_classify(m, &tr) {
        Ok(f) => match f.rate {
            Rate::Exponential { k } if k.is_finite() => Some(k),
            _ => None,
        },
        Err(_) => None,
    };
    Ok(Outcome { limit: tr.limit, rate })
}

/// Classifies seeded generic starts by the critical value at their limit.
pub fn basin_classify(m: &P1Model, opts: &BasinOptions) -> Result<BasinReport> {
    if !(m.a < 0.0 && m.b > 0.0) {
        return Err(Error::InvalidArgument("basin classification needs a < 0 < b".into()));
    }
    if opts.samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let outcomes: Vec<Result<Outcome>> = par::map_indexed(opts.samples, opts.par, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(par::derive_seed(opts.seed, i as u64, 0));
        let (x, y) = random_start(&mut rng, opts.radius_range);
        run(m, P1Model::from_affine(x, y), opts)
    });
    let mut groups: BTreeMap<String, (usize, Vec<f64>)> = BTreeMap::new();
    for c in critical_values(m) {
        groups.insert(label(c), (0, vec![]));
    }
    let mut unconverged = 0;
    let mut max_level_error = 0.0f64;
    for o in outcomes {
        let o = o?;
        let Some(limit) = o.limit else {
            unconverged += 1;
            continue;
        };
        let c = classify(m, &limit);
        if c == 0.0 {
            max_level_error = max_level_error.max(m.moment(&limit).abs());
        }
        let g = groups.get_mut(&label(c)).expect("known value");
        g.0 += 1;
        g.1.extend(o.rate);
    }
    let strata = groups
        .into_iter()
        .map(|(k, (count, rates))| {
            let mean_rate = (!rates.is_empty()).then(|| par::pairwise_sum(&rates) / rates.len() as f64);
            (k, BasinStats { count, fraction: count as f64 / opts.samples as f64, mean_rate })
        })
        .collect();
    let pole_label = |s: State| -> Result<String> {
        let o = run(m, s, opts)?;
        Ok(o.limit.map_or_else(|| "unconverged".into(), |l| label(classify(m, &l))))
    };
    let poles = (pole_label(P1Model::south_pole())?, pole_label(P1Model::north_pole())?);

    // continuity of the limit map within the open stratum
    let mut continuity = Vec::new();
    for (di, &delta) in opts.deltas.iter().enumerate() {
        let pairs: Vec<Result<f64>> = par::map_indexed(opts.continuity_pairs, opts.par, |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(par::derive_seed(opts.seed, i as u64, 1));
            let (x, y) = random_start(&mut rng, opts.radius_range);
            // a chordal step of about delta
            let mut prng = ChaCha8Rng::seed_from_u64(par::derive_seed(opts.seed, i as u64, 2 + di as u64));
            let phi = prng.random::<f64>() * std::f64::consts::TAU;
            let step = delta * (1.0 + x * x + y * y) / 2.0;
            let a = run(m, P1Model::from_affine(x, y), opts)?;
            let b = run(m, P1Model::from_affine(x + step * phi.cos(), y + step * phi.sin()), opts)?;
            match (a.limit, b.limit) {
                (Some(la), Some(lb)) if classify(m, &la) == classify(m, &lb) => Ok(m.distance(&la, &lb)),
                _ => Ok(f64::NAN),
            }
        });
        let mut modulus = 0.0f64;
        for p in pairs {
            let d = p?;
            if d.is_finite() {
                modulus = modulus.max(d);
            }
        }
        continuity.push(ContinuityPoint { delta, modulus });
    }
    let mut order: Vec<&ContinuityPoint> = continuity.iter().collect();
    order.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let continuity_monotone = order.windows(2).all(|w| w[1].modulus <= w[0].modulus);
    let pts: Vec<(f64, f64)> = continuity
        .iter()
        .filter(|c| c.modulus > 0.0)
        .map(|c| (c.delta.ln(), c.modulus.ln()))
        .collect();
    let modulus_exponent = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    Ok(BasinReport { strata, unconverged, poles, max_level_error, continuity, continuity_monotone, modulus_exponent })
}

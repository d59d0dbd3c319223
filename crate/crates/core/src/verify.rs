//! Self-checks of the fixture identities, grouped into suites.

use num::One;
use serde::Serialize;

use crate::exact::{self, q, qf, QVec, Q};
use crate::gradflow::{self, FlowOptions, Rate, State};
use crate::lie::{build_root_system, Normalization, RootKind};
use crate::localization::{self, Chamber};
use crate::measure::{Measure, SampleSpec};
use crate::yangmills;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    P1,
    G2,
    Sawtooth,
    Volumes,
    FlowRates,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        Ok(match s {
            "p1" => Suite::P1,
            "g2" => Suite::G2,
            "sawtooth" => Suite::Sawtooth,
            "volumes" => Suite::Volumes,
            "flow-rates" => Suite::FlowRates,
            _ => return Err(crate::Error::InvalidArgument(format!("unknown suite {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Disagreement {
    pub point: Vec<String>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub disagreements: Vec<Disagreement>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, detail: detail.into(), disagreements: vec![] }
}

fn failed(name: impl Into<String>, e: crate::Error) -> Check {
    check(name, false, format!("error: {e}"))
}

fn measure_check(name: &str, a: &Measure, b: &Measure, spec: &SampleSpec) -> Check {
    match a.compare(b, spec) {
        Ok(r) => Check {
            name: name.into(),
            pass: r.equal,
            detail: format!("{} points, certified: {}", r.points_checked, r.certified),
            disagreements: r
                .disagreements
                .iter()
                .map(|(x, p, q)| Disagreement {
                    point: x.iter().map(exact::fmt_q).collect(),
                    lhs: exact::fmt_q(p),
                    rhs: exact::fmt_q(q),
                })
                .collect(),
        },
        Err(e) => failed(name, e),
    }
}

fn p1_suite() -> Vec<Check> {
    let mut out = Vec::new();
    let spec = SampleSpec::cube(1, 12, 20, 1);
    for (a, b) in [(-1, 2), (-1, 1), (-3, 5), (1, 4), (-6, -2)] {
        let name = format!("chambers ({a},{b})");
        match (localization::weighted_p1_dh(a, b, Chamber::Plus), localization::weighted_p1_dh(a, b, Chamber::Minus)) {
            (Ok(p), Ok(m)) => out.push(measure_check(&name, &p, &m, &spec)),
            (Err(e), _) | (_, Err(e)) => out.push(failed(name, e)),
        }
    }
    for (a, b) in [(-1, 2), (-1, 1), (-3, 5)] {
        let name = format!("norm-square strata ({a},{b})");
        let run = || -> crate::Result<(Measure, Measure)> {
            let parts = localization::normsq_strata_p1(a, b)?;
            let sum = Measure::sum(1, parts.iter().map(|c| c.measure.torus_measure()))?;
            Ok((sum, localization::weighted_p1_dh(a, b, Chamber::Plus)?))
        };
        match run() {
            Ok((s, d)) => out.push(measure_check(&name, &s, &d, &spec)),
            Err(e) => out.push(failed(name, e)),
        }
    }
    out
}

fn g2_suite() -> Vec<Check> {
    let fx = match localization::g2_fixtures() {
        Ok(f) => f,
        Err(e) => return vec![failed("fixtures", e)],
    };
    let spec = SampleSpec::cube(2, 4, 40, 11);
    let run = || -> crate::Result<Vec<Check>> {
        let target = fx.expected.antisymmetrized()?;
        let abelian = fx.abelian_terms.antisymmetrize(&fx.a2)?.scale(&qf(1, 6));
        let normsq = Measure::sum(2, fx.normsq.iter().map(|c| c.measure.torus_measure()))?.antisymmetrize(&fx.a2)?;
        let half = fx.halfplane.antisymmetrized()?;
        let first = fx.normsq[0].measure.torus_measure().antisymmetrize(&fx.a2)?;
        let inside = fx.expected.base.density_at(&[qf(3, 5), qf(3, 5)])?;
        Ok(vec![
            measure_check("abelian sum", &abelian, &target, &spec),
            measure_check("norm-square contributions", &normsq, &target, &spec),
            measure_check("half-plane form", &half, &first, &spec),
            check("density 1/9 inside P", inside == qf(1, 9), exact::fmt_q(&inside)),
            check(
                "reference density",
                fx.density_constant == qf(1, 6),
                format!("cell {} density {}", exact::fmt_q(&fx.reference_cell_volume), exact::fmt_q(&fx.density_constant)),
            ),
        ])
    };
    run().unwrap_or_else(|e| vec![failed("g2", e)])
}

fn sawtooth_suite() -> Vec<Check> {
    let mut out = Vec::new();
    match yangmills::sawtooth_identity(50, q(1)) {
        Ok(r) => {
            let rel = (r.gap / r.rhs).abs();
            out.push(check("Poisson identity", rel <= 1e-6, format!("lhs {} rhs {} rel {rel:e}", r.lhs, r.rhs)));
        }
        Err(e) => out.push(failed("Poisson identity", e)),
    }
    match yangmills::su2_genus1_strata(50) {
        Ok(st) => {
            let v = st.torus_volume.clone();
            let ok = (1..10).all(|k| {
                let x = qf(k, 20);
                st.one_point.density_at(std::slice::from_ref(&x)).ok() == Some(&v * qf(1, 4) * (Q::one() - q(2) * x))
            });
            out.push(check("one-point density", ok, "nu in (0, 1/2)"));
            let ok = st.total().is_ok_and(|tot| {
                (-20..20).all(|k| {
                    let x = qf(2 * k + 1, 4);
                    tot.density_at(std::slice::from_ref(&x)).ok() == Some(yangmills::sawtooth_density(&v, &x))
                })
            });
            out.push(check("sawtooth window", ok, "[-5, 5]"));
        }
        Err(e) => out.push(failed("strata", e)),
    }
    out
}

fn volumes_suite() -> Vec<Check> {
    let mut out = Vec::new();
    for kind in [RootKind::A1, RootKind::A2, RootKind::G2] {
        let rs = match build_root_system(kind, Normalization::Basic) {
            Ok(r) => r,
            Err(e) => {
                out.push(failed(format!("{kind}"), e));
                continue;
            }
        };
        let mut ok = true;
        let mut detail = String::new();
        for i in 0..20i64 {
            let c: Vec<i64> = (0..rs.rank).map(|j| (i * (j as i64 + 3) + 1) % 5).collect();
            let lambda: QVec = rs.fundamental_weights.iter().zip(&c).fold(exact::zeros(rs.rank), |acc, (w, k)| {
                exact::add(&acc, &exact::scale(&q(*k), w))
            });
            match rs.orbit_volumes(&lambda) {
                Ok(v) => {
                    let ratio = v.riemannian.div(&crate::lie::Volume::rational(v.symplectic.clone()));
                    let want = crate::lie::Volume::rational(v.root_product.clone()).with_two_pi(v.half_dim as i32);
                    if ratio != want {
                        ok = false;
                        detail = format!("lambda {}: {ratio} vs {want}", crate::lie::fmt_vec(&lambda));
                    }
                }
                Err(e) => {
                    ok = false;
                    detail = e.to_string();
                }
            }
        }
        out.push(check(format!("{kind} riemannian/symplectic"), ok, detail));
    }
    out
}

fn flow_suite() -> Vec<Check> {
    let opts = FlowOptions::default();
    let mut out = Vec::new();
    let start = State::flat(vec![1.0, 0.0]);
    let run = |shift: i64, t_end: f64| -> crate::Result<(gradflow::LojFit, gradflow::RateFit)> {
        let sys = gradflow::build_local_model(vec![vec![1]], exact::qv(&[shift]))?;
        let tr = gradflow::integrate(&sys, start.clone(), t_end, &opts)?;
        Ok((gradflow::lojasiewicz_fit(&sys, &tr)?, gradflow::rate_classify(&sys, &tr)?))
    };
    match run(0, 1e4) {
        Ok((l, r)) => {
            out.push(check("quartic gamma", (0.70..=0.80).contains(&l.gamma), format!("{}", l.gamma)));
            let ok = matches!(r.rate, Rate::Power { p } if (-0.55..=-0.45).contains(&p));
            out.push(check("quartic power rate", ok, format!("{:?}", r.rate)));
        }
        Err(e) => out.push(failed("quartic", e)),
    }
    match run(1, 50.0) {
        Ok((l, r)) => {
            out.push(check("shifted gamma", (0.45..=0.55).contains(&l.gamma), format!("{}", l.gamma)));
            let ok = matches!(r.rate, Rate::Exponential { k } if ((k - 2.0) / 2.0).abs() <= 0.1);
            out.push(check("shifted exponential rate", ok, format!("{:?}", r.rate)));
        }
        Err(e) => out.push(failed("shifted", e)),
    }
    let h = gradflow::HomogeneousSystem { dim: 2, degree: 6 };
    match gradflow::lojasiewicz_fit_sampled(&h, &State::flat(vec![0.0, 0.0]), 1e-3, 1e-1, 200, 7) {
        Ok(l) => out.push(check("homogeneous degree 6", (l.gamma - 5.0 / 6.0).abs() <= 0.05, format!("{}", l.gamma))),
        Err(e) => out.push(failed("homogeneous degree 6", e)),
    }
    out
}

pub fn run_suite(suite: Suite) -> Report {
    let (name, checks) = match suite {
        Suite::P1 => ("p1", p1_suite()),
        Suite::G2 => ("g2", g2_suite()),
        Suite::Sawtooth => ("sawtooth", sawtooth_suite()),
        Suite::Volumes => ("volumes", volumes_suite()),
        Suite::FlowRates => ("flow-rates", flow_suite()),
    };
    Report { suite: name.into(), checks }
}

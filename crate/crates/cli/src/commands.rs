//! Subcommand handlers. Every handler reads its inputs from the resolved `Params`.

use std::path::PathBuf;

use eqloc::exact::{self, QVec, Q};
use eqloc::gradflow::{self, BasinOptions, FlowOptions, FlowStatus, GradientSystem, P1Model, State};
use eqloc::localization::{self, Chamber, StratumContribution, StratumMeasure};
use eqloc::measure::{self, QuadSpec};
use eqloc::par::Parallelism;
use eqloc::verify::{self, Suite};
use eqloc::yangmills::{self, PartitionSpec, WittenConstant};
use eqloc::{build_root_system, Measure, Normalization, RootKind, RootSystem};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Params;
use crate::output::{Artifacts, Format};
use crate::{Cli, Command, Failure, YmCommand};

const DH_KEYS: &[&str] = &["p1_a", "p1_b", "orbit", "lambda", "chamber", "normalization", "window", "grid"];
const VERIFY_KEYS: &[&str] = &["suite"];
const MIGDAL_KEYS: &[&str] = &["group", "normalization", "genus", "epsilon", "cutoff", "shells"];
const WITTEN_KEYS: &[&str] = &["group", "normalization", "genus", "cutoff", "literal_dim"];
const SAWTOOTH_KEYS: &[&str] = &["cutoff", "epsilon"];
const HN_KEYS: &[&str] = &["rank", "degree", "bound"];
const FLOW_KEYS: &[&str] = &["quartic", "shifted", "p1_a", "p1_b", "weights", "shift", "start", "t_end", "ensemble"];
const INDUCE_KEYS: &[&str] = &["group", "lambda", "chamber", "normalization", "epsilon"];
const NORMSQ_KEYS: &[&str] = &["p1_a", "p1_b", "g2"];

fn set_pair(p: &mut Params, v: &Option<Vec<i64>>) {
    if let Some(v) = v {
        p.set("p1_a", v[0]);
        p.set("p1_b", v[1]);
    }
}

fn set_flag(p: &mut Params, key: &str, on: bool) {
    if on {
        p.set(key, true);
    }
}

fn collect(cli: &Cli) -> (&'static str, Params) {
    let (name, keys): (&'static str, &[&'static str]) = match &cli.command {
        Command::Dh(_) => ("dh", DH_KEYS),
        Command::Verify { .. } => ("verify", VERIFY_KEYS),
        Command::Ym { sub: YmCommand::Migdal { .. } } => ("ym migdal", MIGDAL_KEYS),
        Command::Ym { sub: YmCommand::Wittenvol { .. } } => ("ym wittenvol", WITTEN_KEYS),
        Command::Ym { sub: YmCommand::Sawtooth { .. } } => ("ym sawtooth", SAWTOOTH_KEYS),
        Command::Ym { sub: YmCommand::Hn { .. } } => ("ym hn", HN_KEYS),
        Command::Flow(_) => ("flow", FLOW_KEYS),
        Command::Induce(_) => ("induce", INDUCE_KEYS),
        Command::Normsq(_) => ("normsq", NORMSQ_KEYS),
    };
    let mut p = Params::new(keys);
    p.set_opt("seed", cli.seed);
    p.set_opt("output_dir", cli.output_dir.as_ref().map(|d| d.display()));
    p.set_opt("format", cli.format.as_ref());
    p.set_opt("jobs", cli.jobs);
    p.set_opt("rtol", cli.rtol);
    p.set_opt("atol", cli.atol);
    p.set_opt("stop_threshold", cli.stop_threshold);
    match &cli.command {
        Command::Dh(a) => {
            set_pair(&mut p, &a.p1);
            p.set_opt("orbit", a.orbit.as_ref());
            p.set_opt("lambda", a.lambda.as_ref());
            p.set_opt("chamber", a.chamber.as_ref());
            p.set_opt("normalization", a.normalization.as_ref());
            p.set_opt("window", a.window.as_ref());
            p.set_opt("grid", a.grid);
        }
        Command::Verify { suite } => p.set("suite", suite),
        Command::Ym { sub } => match sub {
            YmCommand::Migdal { group, normalization, genus, epsilon, cutoff, shells } => {
                p.set_opt("group", group.as_ref());
                p.set_opt("normalization", normalization.as_ref());
                p.set_opt("genus", *genus);
                p.set_opt("epsilon", epsilon.as_ref());
                p.set_opt("cutoff", *cutoff);
                set_flag(&mut p, "shells", *shells);
            }
            YmCommand::Wittenvol { group, normalization, genus, cutoff, literal_dim } => {
                p.set_opt("group", group.as_ref());
                p.set_opt("normalization", normalization.as_ref());
                p.set_opt("genus", *genus);
                p.set_opt("cutoff", *cutoff);
                set_flag(&mut p, "literal_dim", *literal_dim);
            }
            YmCommand::Sawtooth { cutoff, epsilon } => {
                p.set_opt("cutoff", *cutoff);
                p.set_opt("epsilon", epsilon.as_ref());
            }
            YmCommand::Hn { rank, degree, bound } => {
                p.set_opt("rank", *rank);
                p.set_opt("degree", *degree);
                p.set_opt("bound", bound.as_ref());
            }
        },
        Command::Flow(a) => {
            set_flag(&mut p, "quartic", a.quartic);
            p.set_opt("shifted", a.shifted.as_ref());
            set_pair(&mut p, &a.p1);
            p.set_opt("weights", a.weights.as_ref());
            p.set_opt("shift", a.shift.as_ref());
            p.set_opt("start", a.start.as_ref());
            p.set_opt("t_end", a.t_end);
            p.set_opt("ensemble", a.ensemble);
        }
        Command::Induce(a) => {
            p.set_opt("group", a.group.as_ref());
            p.set_opt("lambda", a.lambda.as_ref());
            p.set_opt("chamber", a.chamber.as_ref());
            p.set_opt("normalization", a.normalization.as_ref());
            p.set_opt("epsilon", a.epsilon.as_ref());
        }
        Command::Normsq(a) => {
            set_pair(&mut p, &a.p1);
            set_flag(&mut p, "g2", a.g2);
        }
    }
    (name, p)
}

pub fn run(cli: Cli) -> Result<u8, Failure> {
    let (name, mut p) = collect(&cli);
    if let Some(path) = &cli.config {
        p.apply_file(path)?;
    }
    if !p.has("output_dir") {
        let dir = std::env::var("EQLOC_OUTPUT_DIR").unwrap_or_else(|_| "eqloc-out".into());
        p.set("output_dir", dir);
    }
    let dir = PathBuf::from(p.str("output_dir").unwrap_or_default());
    let format = p.get::<Format>("format")?.unwrap_or(Format::Both);
    let mut out = Artifacts::new(dir, format)?;
    let code = match name {
        "dh" => dh(&p, &mut out)?,
        "verify" => verify_cmd(&p, &mut out)?,
        "ym migdal" => migdal(&p, &mut out)?,
        "ym wittenvol" => wittenvol(&p, &mut out)?,
        "ym sawtooth" => sawtooth(&p, &mut out)?,
        "ym hn" => hn(&p, &mut out)?,
        "flow" => flow(&p, &mut out)?,
        "induce" => induce(&p, &mut out)?,
        "normsq" => normsq(&p, &mut out)?,
        _ => unreachable!(),
    };
    out.finish(name, p.resolved())?;
    Ok(code)
}

fn print_json<T: Serialize>(v: &T) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::internal(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn rational(p: &Params, key: &str) -> Result<Option<Q>, Failure> {
    p.str(key).map(|s| exact::parse_q(s).map_err(|e| Failure::usage(format!("invalid {key}: {e}")))).transpose()
}

fn vector(p: &Params, key: &str) -> Result<Option<QVec>, Failure> {
    p.str(key).map(|s| exact::parse_qvec(s).map_err(|e| Failure::usage(format!("invalid {key}: {e}")))).transpose()
}

fn floats(s: &str, key: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| Failure::usage(format!("invalid {key} entry {v:?}: {e}"))))
        .collect()
}

fn parallelism(p: &Params) -> Result<Parallelism, Failure> {
    Ok(match p.get::<usize>("jobs")? {
        Some(j) => Parallelism::from_jobs(j),
        None => Parallelism::Threads(0),
    })
}

fn seed(p: &Params, default: u64) -> Result<u64, Failure> {
    Ok(p.get::<u64>("seed")?.unwrap_or(default))
}

/// `group` (or `key`) plus `normalization`; A1 defaults to the su2 convention.
fn root_system(p: &Params, key: &str) -> Result<RootSystem, Failure> {
    let kind: RootKind = p.str(key).unwrap_or("A1").parse()?;
    let norm = match p.str("normalization") {
        Some(s) => s.parse::<Normalization>()?,
        None if kind == RootKind::A1 => Normalization::Su2,
        None => Normalization::Basic,
    };
    Ok(build_root_system(kind, norm)?)
}

fn p1_pair(p: &Params) -> Result<Option<(i64, i64)>, Failure> {
    match (p.get::<i64>("p1_a")?, p.get::<i64>("p1_b")?) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(Failure::usage("p1 needs both weights")),
    }
}

fn chamber_vector(rs: &RootSystem, p: &Params) -> Result<QVec, Failure> {
    Ok(vector(p, "chamber")?.unwrap_or_else(|| rs.rho.clone()))
}

fn grid_points(rank: usize, window: &Q, n: usize) -> Vec<QVec> {
    let n = n.max(1);
    let axis: Vec<Q> = (0..n)
        .map(|i| -window.clone() + window * Q::new((2 * i as i64 + 1).into(), (n as i64).into()))
        .collect();
    let mut pts: Vec<QVec> = vec![vec![]];
    for _ in 0..rank {
        pts = pts.into_iter().flat_map(|pt| axis.iter().map(move |x| [pt.clone(), vec![x.clone()]].concat())).collect();
    }
    pts
}

fn write_measure(out: &mut Artifacts, m: &Measure, p: &Params, default_window: Q) -> Result<(), Failure> {
    out.json("measure.json", &m.to_json())?;
    if m.is_absolutely_continuous() && !m.is_zero() {
        let window = rational(p, "window")?.unwrap_or(default_window);
        let n = p.get::<usize>("grid")?.unwrap_or(if m.rank() == 1 { 41 } else { 21 });
        let csv = measure::density_csv(m, &grid_points(m.rank(), &window, n))?;
        out.csv("density.csv", &csv)?;
    }
    Ok(())
}

fn dh(p: &Params, out: &mut Artifacts) -> Result<u8, Failure> {
    let (m, window) = if let Some((a, b)) = p1_pair(p)? {
        if p.has("orbit") {
            return Err(Failure::usage("give either --p1 or --orbit"));
        }
        let chamber: Chamber = p.str("chamber").unwrap_or("+").parse()?;
        let w = exact::q(a.abs().max(b.abs()) + 1);
        (localization::weighted_p1_dh(a, b, chamber)?, w)
    } else if p.has("orbit") {
        let rs = root_system(p, "orbit")?;
        let lambda = vector(p, "lambda")?.ok_or_else(|| Failure::usage("--orbit needs --lambda"))?;
        let zeta = chamber_vector(&rs, p)?;
        let m = localization::coadjoint_dh_t(&rs, &lambda, &zeta)?;
        let reach = rs.weyl_orbit(&lambda).iter().flatten().map(|x| if *x < Q::default() { -x.clone() } else { x.clone() }).max().unwrap_or_default();
        (m, reach + exact::q(1))
    } else {
        return Err(Failure::usage("dh needs --p1 A B or --orbit G --lambda L"));
    };
    write_measure(out, &m, p, window)?;
    print_json(&m.to_json())?;
    Ok(0)
}

fn verify_cmd(p: &Params, out: &mut Artifacts) -> Result<u8, Failure> {
    let suite: Suite = p.require::<String>("suite")?.parse()?;
    let report = verify::run_suite(suite);
    for c in &report.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    out.json("report.json", &report)?;
    if report.pass() {
        return Ok(0);
    }
    let mut csv = String::from("check,point,lhs,rhs\n");
    for c in report.checks.iter().filter(|c| !c.pass) {
        for d in &c.disagreements {
            csv.push_str(&format!("\"{}\",\"{}\",{},{}\n", c.name, d.point.join(","), d.lhs, d.rhs));
        }
    }
    // the diff artifact is written regardless of the requested format
    out.force_csv("disagreements.csv", &csv)?;
    Ok(1)
}

fn migdal(p: &Params, out: &mut Artifacts) -> Result<u8, Failure> {
    let rs = root_system(p, "group")?;
    let genus = p.get::<u32>("genus")?.unwrap_or(1);
    let eps = rational(p, "epsilon")?.unwrap_or_else(|| exact::q(1));
    let cutoff = p.get::<f64>("cutoff")?.unwrap_or(50.0);
    let mut spec = PartitionSpec::new(rs, genus, eps, cutoff)?;
    spec.par = parallelism(p)?;
    spec.shells = p.flag("shells")?;
    let r = yangmills::migdal_partition(&spec)?;
    if let Some(sh) = &r.shells {
        let mut csv = String::from("radius,partial_sum\n");
        for (k, v) in sh {
            csv.push_str(&format!("{k},{v:e}\n"));
        }
        out.csv("shells.csv", &csv)?;
    }
    let mut summary = r.clone();
    summary.shells = None;
    out.json("result.json", &summary)?;
    print_json(&summary)?;
    Ok(0)
}

fn wittenvol(p: &Params, out: &mut Artifacts) -> Result<u8, Failure> {
    let rs = root_system(p, "group")?;
    let genus = p.get::<u32>("genus")?.unwrap_or(2);
    let cutoff = p.get::<f64>("cutoff")?.unwrap_or(1e4);
    let constant = if p.flag("literal_dim")? { WittenConstant::LiteralDim } else { WittenConstant::Volume };
    let r = yangmills::witten_volume(&rs, genus, cutoff, constant, parallelism(p)?)?;
    out.json("result.json", &r)?;
    print_json(&r)?;
    Ok(0)
}

fn sawtooth(p: &Params, out: &mut Artifacts) -> Result<u8, Failure> {
    let cutoff = p.get::<u32>("cutoff")?.unwrap_or(50);
    let eps = rational(p, "epsilon")?.unwrap_or_else(|| exact::q(1));
    let r = yangmills::sawtooth_identity(cutoff, eps)?;
    out.json("result.json", &r)?;
    print_json(&r)?;
    Ok(0)
}

fn hn(p: &Params, out: &mut Artifacts) -> Result<u8, Failure> {
    let rank = p.get::<u32>("rank")?.unwrap_or(2);
    let degree = p.get::<i64>("degree")?.unwrap_or(0);
    let bound = rational(p, "bound")?.unwrap_or_else(|| exact::q(3));
    let types = yangmills::hn_types(rank, degree, &bound)?;
    let list: Vec<Value> = types
        .iter()
        .map(|t| {
            json!({
                "blocks": t.blocks,
                "slopes": t.slopes().iter().map(exact::fmt_q).collect::<Vec<_>>(),
            })
        })
        .collect();
    let v = json!({ "rank": rank, "degree": degree, "bound": exact::fmt_q(&bound), "count": types.len(), "types": list });
    out.json("result.json", &v)?;
    print_json(&v)?;
    Ok(0)
}

fn flow_options(p: &Params) -> Result<FlowOptions, Failure> {
    let mut o = FlowOptions::default();
    if let Some(v) = p.get("rtol")? {
        o.rtol = v;
    }
    if let Some(v) = p.get("atol")? {
        o.atol = v;
    }
    if let Some(v) = p.get("stop_threshold")? {
        o.stop_threshold = v;
        o.limit_threshold = o.limit_threshold.min(v);
    }
    if !(o.rtol > 0.0 && o.atol >= 0.0 && o.stop_threshold > 0.0) {
        return Err(Failure::usage("tolerances must be positive"));
    }
    Ok(o)
}

fn parse_weights(s: &str) -> Result<Vec<Vec<i64>>, Failure> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<i64>().map_err(|e| Failure::usage(format!("invalid weight {v:?}: {e}"))))
                .collect()
        })
        .collect()
}

fn fit_value<T: Serialize>(r: eqloc::Result<T>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn flow(p: &Params, out: &mut Artifacts) -> Result<u8, Failure> {
    let opts = flow_options(p)?;
    let pair = p1_pair(p)?;
    let chosen = [p.flag("quartic")?, p.has("shifted"), pair.is_some(), p.has("weights")];
    if chosen.iter().filter(|c| **c).count() != 1 {
        return Err(Failure::usage("choose exactly one of --quartic, --shifted, --p1, --weights"));
    }
    let t_end = p.get::<f64>("t_end")?;
    if t_end.is_some_and(|t| !(t > 0.0)) {
        return Err(Failure::usage("t_end must be positive"));
    }
    if let Some(n) = p.get::<usize>("ensemble")? {
        let Some((a, b)) = pair else {
            return Err(Failure::usage("--ensemble is available for --p1"));
        };
        let m = P1Model::new(a, b)?;
        let bo = BasinOptions {
            samples: n,
            seed: seed(p, BasinOptions::default().seed)?,
            t_end: t_end.unwrap_or(200.0),
            flow: opts,
            par: parallelism(p)?,
            ..Default::default()
        };
        let r = gradflow::basin_classify(&m, &bo)?;
        out.json("ensemble.json", &r)?;
        print_json(&r)?;
        return Ok(0);
    }
    let start = p.str("start").map(|s| floats(s, "start")).transpose()?;
    let (sys, begin, default_t): (Box<dyn GradientSystem>, State, f64) = if let Some((a, b)) = pair {
        let s = start.unwrap_or_else(|| vec![0.5, 0.25]);
        if s.len() != 2 {
            return Err(Failure::usage("a P1 start is one affine coordinate re,im"));
        }
        (Box::new(P1Model::new(a, b)?), P1Model::from_affine(s[0], s[1]), 100.0)
    } else {
        let (weights, shift, t) = if p.flag("quartic")? {
            (vec![vec![1]], exact::qv(&[0]), 1e4)
        } else if let Some(c) = rational(p, "shifted")? {
            (vec![vec![1]], vec![c], 50.0)
        } else {
            let w = parse_weights(p.str("weights").unwrap_or_default())?;
            let k = w.first().map_or(0, Vec::len);
            let shift = vector(p, "shift")?.unwrap_or_else(|| exact::zeros(k));
            (w, shift, 100.0)
        };
        let n = weights.len();
        let sys = gradflow::build_local_model(weights, shift)?;
        let s = start.unwrap_or_else(|| (0..2 * n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect());
        if s.len() != 2 * n {
            return Err(Failure::usage(format!("start needs {} real coordinates", 2 * n)));
        }
        (Box::new(sys), State::flat(s), t)
    };
    let tr = gradflow::integrate(sys.as_ref(), begin, t_end.unwrap_or(default_t), &opts)?;
    out.csv("trajectory.csv", &tr.to_csv(sys.is_complex()))?;
    let report = json!({
        "status": tr.status,
        "stats": tr.stats,
        "steps": tr.times.len(),
        "t_final": tr.times.last(),
        "f_final": tr.f_values.last(),
        "limit": tr.limit,
        "limit_f": tr.limit.as_ref().map(|l| sys.f(l)),
        "rate": fit_value(gradflow::rate_classify(sys.as_ref(), &tr)),
        "lojasiewicz": fit_value(gradflow::lojasiewicz_fit(sys.as_ref(), &tr)),
    });
    out.json("flow.json", &report)?;
    print_json(&report)?;
    Ok(if matches!(tr.status, FlowStatus::StepUnderflow { .. }) { 1 } else { 0 })
}

fn induce(p: &Params, out: &mut Artifacts) -> Result<u8, Failure> {
    let rs = root_system(p, "group")?;
    let lambda = vector(p, "lambda")?.ok_or_else(|| Failure::usage("induce needs --lambda"))?;
    let zeta = chamber_vector(&rs, p)?;
    let mu_t = localization::coadjoint_dh_t(&rs, &lambda, &zeta)?;
    let k = localization::abelian_to_nonabelian(&rs, &mu_t)?;
    out.json("induced.json", &k.to_json())?;
    let mut summary = json!({ "terms": k.base.terms().len(), "induced": k.to_json() });
    if let Some(eps) = rational(p, "epsilon")? {
        let e = exact::to_f64(&eps);
        if !(e > 0.0) {
            return Err(Failure::usage("epsilon must be positive"));
        }
        let quad = QuadSpec { seed: seed(p, QuadSpec::default().seed)?, par: parallelism(p)?, ..Default::default() };
        let v = k.pair(&localization::invariant_gaussian(&rs, e), &quad)?;
        let direct = (-e * exact::to_f64(&rs.norm_sq(&lambda)) / 2.0).exp();
        let pairing = json!({ "epsilon": exact::fmt_q(&eps), "value": v.value, "std_error": v.std_error, "orbit_value": direct });
        out.json("pairing.json", &pairing)?;
        summary["pairing"] = pairing;
    }
    print_json(&summary)?;
    Ok(0)
}

fn contribution_json(c: &StratumContribution) -> Value {
    let (kind, m) = match &c.measure {
        StratumMeasure::Torus(m) => ("torus", serde_json::to_value(m.to_json())),
        StratumMeasure::Invariant(k) => ("invariant", serde_json::to_value(k.to_json())),
    };
    json!({
        "xi": c.xi.iter().map(exact::fmt_q).collect::<Vec<_>>(),
        "kind": kind,
        "measure": m.unwrap_or(Value::Null),
    })
}

fn normsq(p: &Params, out: &mut Artifacts) -> Result<u8, Failure> {
    let parts = if let Some((a, b)) = p1_pair(p)? {
        localization::normsq_strata_p1(a, b)?
    } else if p.flag("g2")? {
        localization::g2_fixtures()?.normsq
    } else {
        return Err(Failure::usage("normsq needs --p1 A B or --g2"));
    };
    let v = json!({ "contributions": parts.iter().map(contribution_json).collect::<Vec<_>>() });
    out.json("contributions.json", &v)?;
    print_json(&v)?;
    Ok(0)
}

//! JSON and CSV interchange.

use serde::{Deserialize, Serialize};

use super::{Measure, Term};
use crate::error::{Error, Result};
use crate::exact::{self, QVec, Q};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    #[serde(with = "exact::serde_q")]
    pub coeff: Q,
    #[serde(with = "exact::serde_q::vec")]
    pub base: QVec,
    #[serde(with = "exact::serde_q::mat")]
    pub dirs: Vec<QVec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub rank: usize,
    pub terms: Vec<TermJson>,
}

pub(crate) fn to_json(m: &Measure) -> MeasureJson {
    MeasureJson {
        rank: m.rank(),
        terms: m
            .terms()
            .iter()
            .map(|t| TermJson { coeff: t.coeff.clone(), base: t.base.clone(), dirs: t.dirs.clone() })
            .collect(),
    }
}

pub(crate) fn from_json(j: &MeasureJson) -> Result<Measure> {
    if j.rank == 0 {
        return Err(Error::InvalidArgument("rank must be positive".into()));
    }
    let terms = j
        .terms
        .iter()
        .map(|t| Term { coeff: t.coeff.clone(), base: t.base.clone(), dirs: t.dirs.clone() })
        .collect();
    Measure::from_term_list(j.rank, terms)
}

/// Density table at `points`; points on walls are skipped.
pub fn density_csv(m: &Measure, points: &[QVec]) -> Result<String> {
    let mut out = String::new();
    let header: Vec<String> = (1..=m.rank()).map(|i| format!("x_{i}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",density,density_exact\n");
    for p in points {
        let d = match m.density_at(p) {
            Ok(d) => d,
            Err(Error::OnWall(_)) => continue,
            Err(e) => return Err(e),
        };
        let xs: Vec<String> = p.iter().map(|x| format!("{}", exact::to_f64(x))).collect();
        out.push_str(&format!("{},{},{}\n", xs.join(","), exact::to_f64(&d), exact::fmt_q(&d)));
    }
    Ok(out)
}

//! Median-NMSE and violation-frequency tables over run records.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::experiment::{Algorithm, RunRecord};

/// Truncates (does not round) to two decimals. A tiny epsilon absorbs
/// representation error such as `0.29 * 100 = 28.999999999999996`.
pub fn truncate2(v: f64) -> f64 {
    (v * 100.0 + 1e-9).floor() / 100.0
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

type Key = (String, Algorithm, bool);

fn group<'a>(
    records: &'a [RunRecord],
    keep: impl Fn(&RunRecord) -> bool,
) -> BTreeMap<Key, Vec<&'a RunRecord>> {
    let mut m: BTreeMap<Key, Vec<&RunRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| keep(r)) {
        m.entry((r.problem.clone(), r.algorithm, r.constraints))
            .or_default()
            .push(r);
    }
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct MedianRow {
    pub problem: String,
    pub algorithm: Algorithm,
    pub constraints: bool,
    pub runs: usize,
    /// Median training NMSE in percent, truncated to two decimals.
    pub train: f64,
    pub test: f64,
}

/// Median train/test NMSE (percent) per `(problem, algorithm, constraints)`.
/// Records carrying an error are skipped.
pub fn report_medians(records: &[RunRecord]) -> Vec<MedianRow> {
    group(records, |r| r.error.is_none())
        .into_iter()
        .map(|((problem, algorithm, constraints), rs)| {
            let train: Vec<f64> = rs.iter().map(|r| r.train_nmse).collect();
            let test: Vec<f64> = rs.iter().map(|r| r.test_nmse).collect();
            MedianRow {
                problem,
                algorithm,
                constraints,
                runs: rs.len(),
                train: truncate2(median(&train)),
                test: truncate2(median(&test)),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViolationRow {
    pub problem: String,
    pub algorithm: Algorithm,
    pub constraints: bool,
    pub runs: usize,
    pub infeasible: usize,
    pub frequency: f64,
}

/// Share of audited runs whose model violated some constraint at some
/// audit point. Runs without an audit are skipped.
pub fn report_violations(records: &[RunRecord]) -> Vec<ViolationRow> {
    group(records, |r| r.audit.is_some())
        .into_iter()
        .map(|((problem, algorithm, constraints), rs)| {
            let infeasible = rs
                .iter()
                .filter(|r| !r.audit.as_ref().unwrap().feasible)
                .count();
            ViolationRow {
                problem,
                algorithm,
                constraints,
                runs: rs.len(),
                infeasible,
                frequency: infeasible as f64 / rs.len() as f64,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverheadRow {
    pub problem: String,
    /// `GP`, `GPC` or `ITEA` (constrained variant is FI-2POP).
    pub family: Algorithm,
    pub constrained_time: f64,
    pub unconstrained_time: f64,
    pub ratio: f64,
}

/// Mean wall-time ratio of constrained to unconstrained runs per problem and
/// algorithm family.
pub fn report_overhead(records: &[RunRecord]) -> Vec<OverheadRow> {
    let mut times: BTreeMap<(String, Algorithm, bool), Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.error.is_none()) {
        let family = if r.algorithm == Algorithm::Fiit {
            Algorithm::Itea
        } else {
            r.algorithm
        };
        times
            .entry((r.problem.clone(), family, r.constraints))
            .or_default()
            .push(r.wall_time);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut out = Vec::new();
    for ((problem, family, constrained), t) in &times {
        if !constrained {
            continue;
        }
        if let Some(u) = times.get(&(problem.clone(), *family, false)) {
            let (c, u) = (mean(t), mean(u));
            out.push(OverheadRow {
                problem: problem.clone(),
                family: *family,
                constrained_time: c,
                unconstrained_time: u,
                ratio: c / u,
            });
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn medians_csv(rows: &[MedianRow]) -> String {
    let mut s = String::from("problem,algorithm,constraints,runs,train_nmse,test_nmse\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.2},{:.2}",
            csv_field(&r.problem),
            r.algorithm,
            r.constraints,
            r.runs,
            r.train,
            r.test
        );
    }
    s
}

pub fn violations_csv(rows: &[ViolationRow]) -> String {
    let mut s = String::from("problem,algorithm,constraints,runs,infeasible,frequency\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.2}",
            csv_field(&r.problem),
            r.algorithm,
            r.constraints,
            r.runs,
            r.infeasible,
            r.frequency
        );
    }
    s
}

pub fn overhead_csv(rows: &[OverheadRow]) -> String {
    let mut s = String::from("problem,algorithm,constrained_s,unconstrained_s,ratio\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.4},{:.4},{:.2}",
            csv_field(&r.problem),
            r.family,
            r.constrained_time,
            r.unconstrained_time,
            r.ratio
        );
    }
    s
}

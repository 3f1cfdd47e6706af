//! Repeated seeded runs, run records and their persistence.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use shapesr_core::constraints::{audit_empirical, ConstraintSet};
use shapesr_core::fitness::nmse;
use shapesr_core::gp::{self, GenerationLog, GpConfig};
use shapesr_core::itea::{self, ItConfig};
use shapesr_core::{seeded_rng, Model};

use crate::error::{io_err, Error, Result};
use crate::model::{ModelFile, Provenance, SavedModel};
use crate::problem::Problem;

#[derive(
    Clone,
    Copy,
    Debug,
    PartialEq,
    Eq,
    Hash,
    PartialOrd,
    Ord,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "UPPERCASE")]
pub enum Algorithm {
    /// Tree-based GP.
    Gp,
    /// GP with Levenberg-Marquardt parameter tuning.
    Gpc,
    /// Interaction-Transformation evolutionary algorithm (unconstrained).
    Itea,
    /// Feasible-infeasible two-population ITEA (constrained).
    Fiit,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Gp,
        Algorithm::Gpc,
        Algorithm::Itea,
        Algorithm::Fiit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gp => "GP",
            Algorithm::Gpc => "GPC",
            Algorithm::Itea => "ITEA",
            Algorithm::Fiit => "FIIT",
        }
    }

    /// Whether a run of this algorithm uses the constraints, given the
    /// user's toggle. ITEA never does and FI-2POP always does.
    pub fn constrained(self, toggle: bool) -> bool {
        match self {
            Algorithm::Gp | Algorithm::Gpc => toggle,
            Algorithm::Itea => false,
            Algorithm::Fiit => true,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Settings shared by every run of a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub population_size: Option<usize>,
    /// Generations (GP) or iterations (ITEA).
    pub generations: Option<usize>,
    /// Empirical audit sample count; 0 disables the audit.
    pub audit_samples: usize,
    /// Run FI-2POP even when the constraint set is empty.
    pub allow_empty_constraints: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            population_size: None,
            generations: None,
            audit_samples: 0,
            allow_empty_constraints: false,
        }
    }
}

impl RunOptions {
    pub fn gp_config(&self, algorithm: Algorithm, seed: u64) -> GpConfig {
        let mut cfg = if algorithm == Algorithm::Gpc {
            GpConfig::gpc()
        } else {
            GpConfig::gp()
        };
        if let Some(n) = self.population_size {
            cfg.population_size = n;
        }
        if let Some(g) = self.generations {
            cfg.generations = g;
        }
        cfg.with_seed(seed)
    }

    pub fn it_config(&self, seed: u64) -> ItConfig {
        let mut cfg = ItConfig::default().with_seed(seed);
        if let Some(n) = self.population_size {
            cfg.population_size = n;
        }
        if let Some(g) = self.generations {
            cfg.iterations = g;
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub samples: usize,
    /// Violating sample count per constraint.
    pub violations: Vec<usize>,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub algorithm: Algorithm,
    pub constraints: bool,
    pub seed: u64,
    /// Training NMSE in percent, in `[0, 100]`.
    pub train_nmse: f64,
    /// Test NMSE in percent, in `[0, 100]`.
    pub test_nmse: f64,
    /// Seconds.
    pub wall_time: f64,
    pub evaluations: usize,
    /// Whether a model was returned (FI-2POP can end without a feasible one).
    pub found: bool,
    pub model: Option<String>,
    pub audit: Option<AuditSummary>,
    pub error: Option<String>,
}

impl RunRecord {
    /// Record equality ignoring wall time.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        let mut a = self.clone();
        a.wall_time = other.wall_time;
        a == *other
    }
}

/// Everything one run produces.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub model: Option<SavedModel>,
    pub log: Vec<GenerationLog>,
}

impl RunOutcome {
    pub fn model_file(&self, variables: Vec<String>) -> Option<ModelFile> {
        let r = &self.record;
        self.model.as_ref().map(|m| {
            ModelFile::new(
                m,
                Provenance {
                    problem: r.problem.clone(),
                    algorithm: r.algorithm.name().to_string(),
                    seed: r.seed,
                    constraints: r.constraints,
                    variables,
                },
            )
        })
    }
}

fn percent(pred: &[f64], y: &[f64]) -> f64 {
    100.0 * nmse(pred, y).clamp(0.0, 1.0)
}

// keeps audit draws independent of the search stream
const AUDIT_SEED_SALT: u64 = 0x5eed_a0d1_7000_0001;

/// One full run: search on the training set, score the best model on both
/// sets, optionally audit it against the problem's declared constraints.
pub fn run_once(
    problem: &Problem,
    algorithm: Algorithm,
    constraints: bool,
    opts: &RunOptions,
    seed: u64,
) -> Result<RunOutcome> {
    let constrained = algorithm.constrained(constraints);
    let active = if constrained {
        problem.constraints.clone()
    } else {
        ConstraintSet::unconstrained(problem.constraints.domain().clone())
    };
    if algorithm == Algorithm::Fiit && active.is_empty() && !opts.allow_empty_constraints {
        return Err(Error::Config(format!(
            "FI-2POP requires constraints but '{}' declares none (use --allow-empty-constraints)",
            problem.label()
        )));
    }
    let (x, y) = (&problem.train.x, &problem.train.y);
    let start = Instant::now();
    let (model, evaluations, log) = match algorithm {
        Algorithm::Gp | Algorithm::Gpc => {
            let r = gp::run(&opts.gp_config(algorithm, seed), x, y, &active);
            (Some(SavedModel::Tree(r.model)), r.evaluations, r.log)
        }
        Algorithm::Itea => {
            let r = itea::run_itea(&opts.it_config(seed), x, y);
            (Some(SavedModel::It(r.model)), r.evaluations, r.log)
        }
        Algorithm::Fiit => {
            let r = itea::run_fi2pop(&opts.it_config(seed), x, y, &active);
            (r.model.map(SavedModel::It), r.evaluations, r.log)
        }
    };
    let wall_time = start.elapsed().as_secs_f64();
    let (train_nmse, test_nmse) = match &model {
        Some(m) => (
            percent(&m.predict(x), y),
            percent(&m.predict(&problem.test.x), &problem.test.y),
        ),
        None => (100.0, 100.0),
    };
    let audit = match &model {
        Some(m) if opts.audit_samples > 0 => {
            let mut rng = seeded_rng(seed ^ AUDIT_SEED_SALT);
            let rep = audit_empirical(m, &problem.constraints, opts.audit_samples, &mut rng);
            Some(AuditSummary {
                samples: rep.samples,
                feasible: rep.is_feasible(),
                violations: rep.violations,
            })
        }
        _ => None,
    };
    let record = RunRecord {
        problem: problem.label(),
        algorithm,
        constraints: constrained,
        seed,
        train_nmse,
        test_nmse,
        wall_time,
        evaluations,
        found: model.is_some(),
        model: model.as_ref().map(|m| m.to_string()),
        audit,
        error: None,
    };
    Ok(RunOutcome { record, model, log })
}

/// Append-only JSON-lines record file.
pub struct RecordWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl RecordWriter {
    pub fn append(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io_err(path))?;
        Ok(RecordWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        })
    }

    pub fn write(&mut self, r: &RunRecord) -> Result<()> {
        let line = serde_json::to_string(r).expect("records serialise");
        writeln!(self.out, "{line}")
            .and_then(|_| self.out.flush())
            .map_err(io_err(&self.path))
    }
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", i + 1),
        })?;
        out.push(r);
    }
    Ok(out)
}

/// Writes a convergence log as CSV (generation, evaluations, best, median).
pub fn write_convergence(path: &Path, log: &[GenerationLog]) -> Result<()> {
    let mut s = String::from("generation,evaluations,best,median\n");
    for row in log {
        s.push_str(&format!(
            "{},{},{:?},{:?}\n",
            row.generation, row.evaluations, row.best, row.median
        ));
    }
    std::fs::write(path, s).map_err(io_err(path))
}

/// One cell of a batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Variant {
    pub algorithm: Algorithm,
    pub constraints: bool,
}

/// Batch settings.
#[derive(Clone, Debug, Default)]
pub struct BatchOptions {
    pub run: RunOptions,
    pub repetitions: usize,
    pub base_seed: u64,
    pub workers: usize,
    pub convergence_dir: Option<PathBuf>,
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Runs every `(problem, variant, repetition)` with seed `base_seed + rep`.
/// Records are passed to `writer` as runs finish; failed runs yield a record
/// carrying the error. The returned records are in job order.
pub fn run_batch(
    problems: &[Problem],
    variants: &[Variant],
    opts: &BatchOptions,
    mut writer: Option<&mut RecordWriter>,
) -> Result<Vec<RunRecord>> {
    if opts.repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let mut jobs = Vec::new();
    for p in problems {
        for v in variants {
            for rep in 0..opts.repetitions {
                jobs.push((p, *v, opts.base_seed + rep as u64));
            }
        }
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; jobs.len()]);
    let sink: Mutex<(Option<&mut RecordWriter>, Option<Error>)> = Mutex::new((writer.take(), None));
    let workers = opts.workers.clamp(1, jobs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(problem, v, seed)) = jobs.get(i) else {
                    break;
                };
                let record = match run_once(problem, v.algorithm, v.constraints, &opts.run, seed) {
                    Ok(out) => {
                        if let Some(dir) = &opts.convergence_dir {
                            let name = format!(
                                "{}_{}{}_{seed}.csv",
                                slug(&out.record.problem),
                                v.algorithm.name(),
                                if out.record.constraints { "_sc" } else { "" }
                            );
                            if let Err(e) = write_convergence(&dir.join(name), &out.log) {
                                sink.lock().unwrap().1.get_or_insert(e);
                            }
                        }
                        out.record
                    }
                    Err(e) => failed_record(problem, v, seed, &e),
                };
                let mut guard = sink.lock().unwrap();
                let (w, err) = &mut *guard;
                if let Some(w) = w.as_deref_mut() {
                    if let Err(e) = w.write(&record) {
                        err.get_or_insert(e);
                    }
                }
                drop(guard);
                results.lock().unwrap()[i] = Some(record);
            });
        }
    });
    if let Some(e) = sink.into_inner().unwrap().1 {
        return Err(e);
    }
    Ok(results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect())
}

fn failed_record(problem: &Problem, v: Variant, seed: u64, e: &Error) -> RunRecord {
    RunRecord {
        problem: problem.label(),
        algorithm: v.algorithm,
        constraints: v.algorithm.constrained(v.constraints),
        seed,
        train_nmse: 100.0,
        test_nmse: 100.0,
        wall_time: 0.0,
        evaluations: 0,
        found: false,
        model: None,
        audit: None,
        error: Some(e.to_string()),
    }
}

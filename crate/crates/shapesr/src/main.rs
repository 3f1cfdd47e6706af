use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use shapesr::experiment::{self, BatchOptions, RecordWriter, Variant};
use shapesr::problem::{self, Problem};
use shapesr::{csvio, report, Algorithm, Error, ModelFile, RunOptions};
use shapesr_core::constraints::{audit_empirical, DEFAULT_AUDIT_SAMPLES};
use shapesr_core::problems::Builtin;
use shapesr_core::seeded_rng;

#[derive(Parser)]
#[command(
    name = "shapesr",
    version,
    about = "Shape-constrained symbolic regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the builtin problems.
    List,
    /// Write train.csv and test.csv for a builtin problem.
    Generate {
        problem: String,
        /// Add 5% relative Gaussian noise to the targets.
        #[arg(long)]
        noise: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run one algorithm once and write the model and its record.
    Run {
        #[arg(long, value_enum)]
        algo: Algorithm,
        /// Builtin name or problem file (.toml).
        #[arg(long)]
        problem: String,
        #[arg(long)]
        noise: bool,
        /// Seed of the data generator.
        #[arg(long, default_value_t = 0)]
        data_seed: u64,
        /// Seed of the search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enforce the problem's shape constraints (GP and GPC).
        #[arg(long)]
        constraints: bool,
        /// Let FI-2POP run on a problem without constraints.
        #[arg(long)]
        allow_empty_constraints: bool,
        #[command(flatten)]
        tuning: Tuning,
        /// Audit the final model with this many samples (0 = skip).
        #[arg(long, default_value_t = 0)]
        audit_samples: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Audit a saved model against a problem's constraints.
    Check {
        model: PathBuf,
        /// Problem whose constraints to check; defaults to the model's provenance.
        #[arg(long)]
        problem: Option<String>,
        #[arg(long, default_value_t = DEFAULT_AUDIT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Repeated runs over problems and algorithms.
    Batch {
        /// Comma-separated builtin names or problem files; `all` for every builtin.
        #[arg(long, default_value = "all", value_delimiter = ',')]
        problems: Vec<String>,
        #[arg(long, value_enum, default_values_t = Algorithm::ALL.to_vec(), value_delimiter = ',')]
        algos: Vec<Algorithm>,
        /// Constraint mode for GP and GPC.
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        constraints: Mode,
        /// Noise variants of the builtins.
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        noise: Mode,
        #[arg(long, default_value_t = 30)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long, default_value_t = 0)]
        data_seed: u64,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long, default_value_t = 0)]
        audit_samples: usize,
        #[arg(long, env = "SHAPESR_WORKERS", default_value_t = 1)]
        workers: usize,
        /// Also write per-run convergence CSVs.
        #[arg(long)]
        convergence: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Summarise a records file.
    Report {
        #[arg(value_enum)]
        kind: ReportKind,
        records: PathBuf,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Tuning {
    #[arg(long)]
    pop_size: Option<usize>,
    /// Generations (GP) or iterations (ITEA).
    #[arg(long)]
    generations: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    On,
    Off,
    Both,
}

impl Mode {
    fn values(self) -> Vec<bool> {
        match self {
            Mode::On => vec![true],
            Mode::Off => vec![false],
            Mode::Both => vec![false, true],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKind {
    Medians,
    Violations,
    Overhead,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::UnknownProblem(_) = e {
                eprintln!("known problems:");
                for b in Builtin::ALL {
                    eprintln!("  {}", b.name());
                }
            }
            ExitCode::from(2)
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn create_dir(dir: &Path) -> shapesr::Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn dispatch(cmd: Command) -> shapesr::Result<ExitCode> {
    match cmd {
        Command::List => {
            let mut text = String::new();
            for b in Builtin::ALL {
                text += &format!(
                    "{:<14} {:?} {:?}\n",
                    b.name(),
                    b.variables(),
                    b.monotonicity()
                );
            }
            emit(&text);
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate {
            problem,
            noise,
            seed,
            out,
        } => {
            let b = Builtin::from_name(&problem).ok_or(Error::UnknownProblem(problem))?;
            let p = problem::builtin_problem(b, noise, seed)?;
            create_dir(&out)?;
            csvio::write_csv(&out.join("train.csv"), &p.train)?;
            csvio::write_csv(&out.join("test.csv"), &p.test)?;
            println!(
                "wrote {} training and {} test rows to {}",
                p.train.len(),
                p.test.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            algo,
            problem,
            noise,
            data_seed,
            seed,
            constraints,
            allow_empty_constraints,
            tuning,
            audit_samples,
            out,
        } => {
            let p = problem::resolve(&problem, noise, data_seed)?;
            let opts = RunOptions {
                population_size: tuning.pop_size,
                generations: tuning.generations,
                audit_samples,
                allow_empty_constraints,
            };
            let outcome = experiment::run_once(&p, algo, constraints, &opts, seed)?;
            create_dir(&out)?;
            RecordWriter::append(&out.join("records.jsonl"))?.write(&outcome.record)?;
            let r = &outcome.record;
            match outcome.model_file(p.spec.variables()) {
                Some(file) => {
                    file.save(&out.join("model.toml"))?;
                    println!("model: {}", r.model.as_deref().unwrap_or_default());
                    println!(
                        "train NMSE: {:.2}%  test NMSE: {:.2}%",
                        report::truncate2(r.train_nmse),
                        report::truncate2(r.test_nmse)
                    );
                    if let Some(a) = &r.audit {
                        println!(
                            "audit: {} samples, violations {:?}",
                            a.samples, a.violations
                        );
                    }
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("no feasible model found");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Check {
            model,
            problem,
            samples,
            seed,
        } => {
            let file = ModelFile::load(&model)?;
            let m = file.model().map_err(|message| Error::Format {
                path: model.clone(),
                message,
            })?;
            let name = problem.unwrap_or_else(|| {
                file.provenance
                    .problem
                    .trim_end_matches(" (noisy)")
                    .to_string()
            });
            let p: Problem = problem::resolve(&name, false, 0)?;
            let mut rng = seeded_rng(seed);
            let rep = audit_empirical(&m, &p.constraints, samples, &mut rng);
            for (c, v) in p.constraints.constraints().iter().zip(&rep.violations) {
                println!("{c}: {v} of {samples} violated");
            }
            if rep.is_feasible() {
                println!("feasible");
                Ok(ExitCode::SUCCESS)
            } else {
                println!(
                    "infeasible: {} violating evaluations",
                    rep.total_violations()
                );
                Ok(ExitCode::from(1))
            }
        }
        Command::Batch {
            problems,
            algos,
            constraints,
            noise,
            reps,
            base_seed,
            data_seed,
            tuning,
            audit_samples,
            workers,
            convergence,
            out,
        } => {
            let mut list = Vec::new();
            for name in &problems {
                for noisy in noise.values() {
                    if name == "all" {
                        for b in Builtin::ALL {
                            list.push(problem::builtin_problem(b, noisy, data_seed)?);
                        }
                    } else {
                        list.push(problem::resolve(name, noisy, data_seed)?);
                    }
                }
            }
            let mut variants = Vec::new();
            for &a in &algos {
                for c in constraints.values() {
                    let v = Variant {
                        algorithm: a,
                        constraints: c,
                    };
                    let dup = variants.iter().any(|w: &Variant| {
                        w.algorithm == a && a.constrained(w.constraints) == a.constrained(c)
                    });
                    if !dup {
                        variants.push(v);
                    }
                }
            }
            create_dir(&out)?;
            let convergence_dir = if convergence {
                let d = out.join("convergence");
                create_dir(&d)?;
                Some(d)
            } else {
                None
            };
            let opts = BatchOptions {
                run: RunOptions {
                    population_size: tuning.pop_size,
                    generations: tuning.generations,
                    audit_samples,
                    allow_empty_constraints: false,
                },
                repetitions: reps,
                base_seed,
                workers,
                convergence_dir,
            };
            let mut writer = RecordWriter::append(&out.join("records.jsonl"))?;
            let records = experiment::run_batch(&list, &variants, &opts, Some(&mut writer))?;
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            let medians = report::report_medians(&records);
            std::fs::write(out.join("medians.csv"), report::medians_csv(&medians)).map_err(
                |source| Error::Io {
                    path: out.join("medians.csv"),
                    source,
                },
            )?;
            if audit_samples > 0 {
                let v = report::report_violations(&records);
                std::fs::write(out.join("violations.csv"), report::violations_csv(&v)).map_err(
                    |source| Error::Io {
                        path: out.join("violations.csv"),
                        source,
                    },
                )?;
            }
            emit(&report::medians_csv(&medians));
            if failed > 0 {
                eprintln!(
                    "{failed} of {} runs failed; see records.jsonl",
                    records.len()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { kind, records, out } => {
            let rs = experiment::read_records(&records)?;
            let text = match kind {
                ReportKind::Medians => report::medians_csv(&report::report_medians(&rs)),
                ReportKind::Violations => report::violations_csv(&report::report_violations(&rs)),
                ReportKind::Overhead => report::overhead_csv(&report::report_overhead(&rs)),
            };
            match out {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|source| Error::Io { path, source })?
                }
                None => emit(&text),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

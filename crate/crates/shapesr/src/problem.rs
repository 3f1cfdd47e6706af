//! Problem resolution: builtin names or TOML problem files, turned into
//! train/test data plus the declared constraint set.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shapesr_core::problems::{generate, Builtin, ProblemSpec, Source, NOISE_LEVEL};
use shapesr_core::{ConstraintSet, Dataset};

use crate::csvio;
use crate::error::{io_err, Error, Result};

/// On-disk problem description.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: Option<String>,
    /// Name of a builtin generating formula.
    pub builtin: Option<String>,
    pub csv: Option<CsvSource>,
    /// One `[lo, hi]` pair per input variable.
    pub bounds: Option<Vec<[f64; 2]>>,
    pub monotonicity: Option<Vec<i8>>,
    pub image_bounds: Option<[f64; 2]>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub path: PathBuf,
    pub target: String,
    /// Share of rows used for training after a seeded shuffle.
    #[serde(default = "default_split")]
    pub split: f64,
}

fn default_split() -> f64 {
    shapesr_core::problems::DEFAULT_SPLIT
}

/// A problem ready to run.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub train: Dataset,
    pub test: Dataset,
    pub constraints: ConstraintSet,
}

impl Problem {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    /// Name used in records; noisy variants get a suffix.
    pub fn label(&self) -> String {
        if self.spec.is_noisy() {
            format!("{} (noisy)", self.spec.name)
        } else {
            self.spec.name.clone()
        }
    }
}

/// Generates the data of a builtin problem.
pub fn builtin_problem(b: Builtin, noisy: bool, seed: u64) -> Result<Problem> {
    let noise = if noisy { NOISE_LEVEL } else { 0.0 };
    from_spec(ProblemSpec::builtin(b).with_noise(noise).with_seed(seed))
}

/// Loads or generates data for a spec.
pub fn from_spec(spec: ProblemSpec) -> Result<Problem> {
    let (train, test) = match &spec.source {
        Source::Builtin(_) => generate(&spec)?,
        Source::Csv { path, target } => {
            let data = csvio::load_csv(Path::new(path), target)?;
            if data.dim() != spec.bounds.len() {
                return Err(Error::Config(format!(
                    "{path}: {} input columns but {} bounds",
                    data.dim(),
                    spec.bounds.len()
                )));
            }
            csvio::shuffle_split(&data, spec.split, spec.seed)?
        }
    };
    let constraints = spec.constraints()?;
    Ok(Problem {
        spec,
        train,
        test,
        constraints,
    })
}

/// Resolves a command-line problem argument: an existing `.toml` file or a
/// builtin name (`fuel-flow`, `"Fuel flow"`, `I.6.20`, ...).
pub fn resolve(arg: &str, noisy: bool, seed: u64) -> Result<Problem> {
    let path = Path::new(arg);
    if path.extension().is_some_and(|e| e == "toml") || path.is_file() {
        let mut spec = load_problem_file(path)?;
        if noisy && spec.noise == 0.0 {
            spec.noise = NOISE_LEVEL;
        }
        return from_spec(spec);
    }
    let b = Builtin::from_name(arg).ok_or_else(|| Error::UnknownProblem(arg.to_string()))?;
    builtin_problem(b, noisy, seed)
}

pub fn load_problem_file(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut file: ProblemFile = toml::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    // csv paths are relative to the problem file
    if let (Some(csv), Some(dir)) = (file.csv.as_mut(), path.parent()) {
        if csv.path.is_relative() {
            csv.path = dir.join(&csv.path);
        }
    }
    file.into_spec().map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}

impl ProblemFile {
    pub fn into_spec(self) -> std::result::Result<ProblemSpec, String> {
        let mut spec = match (&self.builtin, &self.csv) {
            (Some(_), Some(_)) => return Err("'builtin' and 'csv' are mutually exclusive".into()),
            (None, None) => return Err("one of 'builtin' or 'csv' is required".into()),
            (Some(name), None) => {
                let b =
                    Builtin::from_name(name).ok_or_else(|| format!("unknown builtin '{name}'"))?;
                ProblemSpec::builtin(b)
            }
            (None, Some(csv)) => {
                if !(0.0..=1.0).contains(&csv.split) {
                    return Err(format!("split {} not in [0, 1]", csv.split));
                }
                let bounds = self.bounds.as_ref().ok_or("csv problems need 'bounds'")?;
                ProblemSpec {
                    name: csv.target.clone(),
                    source: Source::Csv {
                        path: csv.path.to_string_lossy().into_owned(),
                        target: csv.target.clone(),
                    },
                    bounds: bounds.iter().map(|b| (b[0], b[1])).collect(),
                    monotonicity: vec![0; bounds.len()],
                    image_bounds: None,
                    n_train: 0,
                    n_test: 0,
                    split: csv.split,
                    noise: 0.0,
                    seed: 0,
                }
            }
        };
        if let Some(name) = self.name {
            spec.name = name;
        }
        if let Some(b) = self.bounds {
            spec.bounds = b.iter().map(|b| (b[0], b[1])).collect();
        }
        if let Some(m) = self.monotonicity {
            spec.monotonicity = m;
        }
        if spec.monotonicity.len() != spec.bounds.len() {
            return Err(format!(
                "monotonicity has {} entries, bounds has {}",
                spec.monotonicity.len(),
                spec.bounds.len()
            ));
        }
        spec.image_bounds = self.image_bounds.map(|b| (b[0], b[1]));
        if matches!(spec.source, Source::Builtin(_)) {
            spec.n_train = self.n_train.unwrap_or(spec.n_train);
            spec.n_test = self.n_test.unwrap_or(spec.n_test);
        }
        spec.noise = self.noise.unwrap_or(0.0);
        spec.seed = self.seed.unwrap_or(0);
        Ok(spec)
    }

    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let (builtin, csv) = match &spec.source {
            Source::Builtin(b) => (Some(b.name().to_string()), None),
            Source::Csv { path, target } => (
                None,
                Some(CsvSource {
                    path: path.into(),
                    target: target.clone(),
                    split: spec.split,
                }),
            ),
        };
        let builtin_counts = builtin.is_some();
        ProblemFile {
            name: Some(spec.name.clone()),
            builtin,
            csv,
            bounds: Some(spec.bounds.iter().map(|&(a, b)| [a, b]).collect()),
            monotonicity: Some(spec.monotonicity.clone()),
            image_bounds: spec.image_bounds.map(|(a, b)| [a, b]),
            n_train: builtin_counts.then_some(spec.n_train),
            n_test: builtin_counts.then_some(spec.n_test),
            noise: Some(spec.noise),
            seed: Some(spec.seed),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem files serialise")
    }
}

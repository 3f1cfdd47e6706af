//! Benchmark problems: synthetic generating formulas with their input boxes
//! and monotonicity tuples, and the box/tuple metadata of the real-world sets.

mod scalar;

pub use scalar::{Dual, Scalar};

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use crate::constraints::{ConstraintOp, ConstraintSet, ShapeModel};
use crate::data::{Dataset, Matrix};
use crate::fitness::Model;
use crate::interval::{Domain, Interval};
use crate::math::PI;
use crate::stats;
use crate::{Error, Result};

/// Ratio of specific heats used by the fuel-flow formula.
pub const FUEL_GAMMA: f64 = 1.4;
/// Specific gas constant of air, J/(kg K).
pub const FUEL_GAS_CONSTANT: f64 = 287.0;
/// Zero-lift angle offset in the aircraft-lift formula.
pub const LIFT_ALPHA0: f64 = 2.0;

/// Relative noise level of the noisy problem variants.
pub const NOISE_LEVEL: f64 = 0.05;

/// Default training share for data loaded from files.
pub const DEFAULT_SPLIT: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    AircraftLift,
    FlowPsi,
    FuelFlow,
    Jackson2_11,
    WavePower,
    I6_20,
    I9_18,
    I15_3x,
    I15_3t,
    I30_5,
    I32_17,
    I41_16,
    I48_20,
    II6_15a,
    II11_27,
    II11_28,
    II35_21,
    III9_52,
    III10_19,
}

use Builtin::*;

impl Builtin {
    pub const ALL: [Builtin; 19] = [
        AircraftLift,
        FlowPsi,
        FuelFlow,
        Jackson2_11,
        WavePower,
        I6_20,
        I9_18,
        I15_3x,
        I15_3t,
        I30_5,
        I32_17,
        I41_16,
        I48_20,
        II6_15a,
        II11_27,
        II11_28,
        II35_21,
        III9_52,
        III10_19,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AircraftLift => "Aircraft lift",
            FlowPsi => "Flow psi",
            FuelFlow => "Fuel flow",
            Jackson2_11 => "Jackson 2.11",
            WavePower => "Wave power",
            I6_20 => "I.6.20",
            I9_18 => "I.9.18",
            I15_3x => "I.15.3x",
            I15_3t => "I.15.3t",
            I30_5 => "I.30.5",
            I32_17 => "I.32.17",
            I41_16 => "I.41.16",
            I48_20 => "I.48.20",
            II6_15a => "II.6.15a",
            II11_27 => "II.11.27",
            II11_28 => "II.11.28",
            II35_21 => "II.35.21",
            III9_52 => "III.9.52",
            III10_19 => "III.10.19",
        }
    }

    /// Case-insensitive lookup by display name, also accepting `_` or `-`
    /// in place of spaces.
    pub fn from_name(name: &str) -> Option<Builtin> {
        let norm = |s: &str| -> String {
            s.chars()
                .map(|c| {
                    if c == '_' || c == '-' {
                        ' '
                    } else {
                        c.to_ascii_lowercase()
                    }
                })
                .collect()
        };
        let want = norm(name);
        Builtin::ALL.into_iter().find(|b| norm(b.name()) == want)
    }

    pub fn variables(self) -> &'static [&'static str] {
        match self {
            AircraftLift => &["CLa", "alpha", "CLde", "de", "SHT", "Sref"],
            FlowPsi => &["Vinf", "R", "Gamma", "r", "theta"],
            FuelFlow => &["Astar", "p0", "T0"],
            Jackson2_11 => &["q", "y", "Volt", "d", "epsilon"],
            WavePower => &["G", "c", "m1", "m2", "r"],
            I6_20 => &["sigma", "theta"],
            I9_18 => &["m1", "m2", "G", "x1", "x2", "y1", "y2", "z1", "z2"],
            I15_3x => &["x", "u", "c", "t"],
            I15_3t => &["x", "c", "u", "t"],
            I30_5 => &["lambd", "d", "n"],
            I32_17 => &["epsilon", "c", "Ef", "r", "omega", "omega0"],
            I41_16 => &["omega", "T", "h", "kb", "c"],
            I48_20 => &["m", "v", "c"],
            II6_15a => &["epsilon", "p_d", "r", "x", "y", "z"],
            II11_27 => &["n", "alpha", "epsilon", "Ef"],
            II11_28 => &["n", "alpha"],
            II35_21 => &["n_rho", "mom", "B", "kb", "T"],
            III9_52 => &["p_d", "Ef", "t", "h", "omega", "omega0"],
            III10_19 => &["mom", "Bx", "By", "Bz"],
        }
    }

    pub fn dim(self) -> usize {
        self.variables().len()
    }

    /// Sampling box, one `(lo, hi)` per variable.
    pub fn bounds(self) -> Vec<(f64, f64)> {
        let r = |lo: f64, hi: f64, n: usize| core::iter::repeat((lo, hi)).take(n);
        match self {
            AircraftLift => [
                (0.3, 0.9),
                (2.0, 12.0),
                (0.3, 0.9),
                (0.0, 12.0),
                (0.5, 2.0),
                (3.0, 10.0),
            ]
            .to_vec(),
            FlowPsi => [
                (30.0, 100.0),
                (0.1, 0.5),
                (2.0, 15.0),
                (0.5, 1.5),
                (10.0, 90.0),
            ]
            .to_vec(),
            FuelFlow => [(0.2, 2.0), (3e5, 7e5), (200.0, 400.0)].to_vec(),
            Jackson2_11 => [(1.0, 5.0), (1.0, 3.0), (1.0, 5.0), (4.0, 6.0), (1.0, 5.0)].to_vec(),
            WavePower => [(1.0, 2.0), (1.0, 2.0), (1.0, 5.0), (1.0, 5.0), (1.0, 2.0)].to_vec(),
            I6_20 => r(1.0, 3.0, 2).collect(),
            I9_18 => [
                (1.0, 2.0),
                (1.0, 2.0),
                (1.0, 2.0),
                (3.0, 4.0),
                (1.0, 2.0),
                (3.0, 4.0),
                (1.0, 2.0),
                (3.0, 4.0),
                (1.0, 2.0),
            ]
            .to_vec(),
            I15_3x => [(5.0, 10.0), (1.0, 2.0), (3.0, 20.0), (1.0, 2.0)].to_vec(),
            I15_3t => [(1.0, 5.0), (3.0, 10.0), (1.0, 2.0), (1.0, 5.0)].to_vec(),
            // lambd is limited to [1, 2] so that lambd / (n d) stays inside
            // the domain of asin; see `I30_5_LITERAL_BOUNDS`
            I30_5 => [(1.0, 2.0), (2.0, 5.0), (1.0, 5.0)].to_vec(),
            I32_17 => r(1.0, 2.0, 5).chain(r(3.0, 5.0, 1)).collect(),
            I41_16 => r(1.0, 5.0, 5).collect(),
            I48_20 => [(1.0, 5.0), (1.0, 2.0), (3.0, 20.0)].to_vec(),
            II6_15a => r(1.0, 3.0, 6).collect(),
            II11_27 => [(0.0, 1.0), (0.0, 1.0), (1.0, 2.0), (1.0, 2.0)].to_vec(),
            II11_28 => r(0.0, 1.0, 2).collect(),
            II35_21 => r(1.0, 5.0, 5).collect(),
            III9_52 => r(1.0, 3.0, 4).chain(r(1.0, 5.0, 2)).collect(),
            III10_19 => r(1.0, 5.0, 4).collect(),
        }
    }

    pub fn domain(self) -> Domain {
        Domain::from_pairs(&self.bounds()).expect("builtin boxes are finite")
    }

    /// Monotonicity tuple: `1` non-decreasing, `-1` non-increasing, `0` free.
    pub fn monotonicity(self) -> &'static [i8] {
        match self {
            AircraftLift => &[1, 1, 1, 1, 1, -1],
            FlowPsi => &[1, 1, 1, -1, 1],
            FuelFlow => &[1, 1, -1],
            Jackson2_11 => &[1, -1, 1, 1, 1],
            WavePower => &[-1, 1, -1, -1, 1],
            I6_20 => &[0, -1],
            I9_18 => &[1, 1, 1, -1, 1, -1, 1, -1, 1],
            I15_3x => &[1, 0, -1, -1],
            I15_3t => &[0, 0, 0, 1],
            I30_5 => &[1, -1, -1],
            I32_17 => &[1, 1, 1, 1, 1, -1],
            I41_16 => &[0, 1, -1, 1, -1],
            I48_20 => &[1, 1, 1],
            II6_15a => &[-1, 1, -1, 1, 1, 1],
            II11_27 => &[1, 1, 1, 1],
            II11_28 => &[1, 1],
            II35_21 => &[1, 1, 1, -1, -1],
            III9_52 => &[1, 1, 0, -1, 0, 0],
            III10_19 => &[1, 1, 1, 1],
        }
    }

    /// Evaluates the generating formula on any [`Scalar`] type.
    pub fn eval<T: Scalar>(self, x: &[T]) -> T {
        let c = T::cst;
        let v = |i: usize| x[i].clone();
        match self {
            AircraftLift => v(0) * (v(1) + c(LIFT_ALPHA0)) + v(2) * v(3) * v(4) / v(5),
            FlowPsi => {
                let (vinf, big_r, gamma, r, theta) = (v(0), v(1), v(2), v(3), v(4));
                vinf * r.clone()
                    * (theta / c(2.0 * PI)).sin()
                    * (c(1.0) - (big_r.clone() / r.clone()).powi(2))
                    + gamma / c(2.0 * PI) * (r / big_r).ln()
            }
            FuelFlow => {
                let g = FUEL_GAMMA;
                let k = crate::math::sqrt(
                    g / FUEL_GAS_CONSTANT * libm::pow(2.0 / (1.0 + g), (g + 1.0) / (g - 1.0)),
                );
                v(1) * v(0) / v(2).sqrt() * c(k)
            }
            Jackson2_11 => {
                let (q, y, volt, d, eps) = (v(0), v(1), v(2), v(3), v(4));
                let four_pi_eps = c(4.0 * PI) * eps;
                q.clone() / (four_pi_eps.clone() * y.clone().powi(2))
                    * (four_pi_eps * volt * d.clone()
                        - q * d.clone() * y.clone().powi(3) / (y.powi(2) - d.powi(2)).powi(2))
            }
            WavePower => {
                let (g, cc, m1, m2, r) = (v(0), v(1), v(2), v(3), v(4));
                c(-32.0 / 5.0) * g.powi(4) / cc.powi(5)
                    * (m1.clone() * m2.clone()).powi(2)
                    * (m1 + m2)
                    / r.powi(5)
            }
            I6_20 => {
                let (sigma, theta) = (v(0), v(1));
                (-(theta / sigma.clone()).powi(2) / c(2.0)).exp()
                    / (c(crate::math::sqrt(2.0 * PI)) * sigma)
            }
            I9_18 => {
                let (m1, m2, g) = (v(0), v(1), v(2));
                let dist = (v(4) - v(3)).powi(2) + (v(6) - v(5)).powi(2) + (v(8) - v(7)).powi(2);
                g * m1 * m2 / dist
            }
            I15_3x => {
                let (xx, u, cc, t) = (v(0), v(1), v(2), v(3));
                (xx - u.clone() * t) / (c(1.0) - u.powi(2) / cc.powi(2)).sqrt()
            }
            I15_3t => {
                let (xx, cc, u, t) = (v(0), v(1), v(2), v(3));
                (t - u.clone() * xx / cc.clone().powi(2)) / (c(1.0) - u.powi(2) / cc.powi(2)).sqrt()
            }
            I30_5 => (v(0) / (v(2) * v(1))).asin(),
            I32_17 => {
                let (eps, cc, ef, r, w, w0) = (v(0), v(1), v(2), v(3), v(4), v(5));
                c(0.5)
                    * eps
                    * cc
                    * ef.powi(2)
                    * (c(8.0 * PI) * r.powi(2) / c(3.0))
                    * w.clone().powi(4)
                    / (w.powi(2) - w0.powi(2)).powi(2)
            }
            I41_16 => {
                let (w, t, h, kb, cc) = (v(0), v(1), v(2), v(3), v(4));
                h.clone() * w.clone().powi(3)
                    / (c(PI * PI) * cc.powi(2) * ((h * w / (kb * t)).exp() - c(1.0)))
            }
            I48_20 => {
                let (m, vv, cc) = (v(0), v(1), v(2));
                m * cc.clone().powi(2) / (c(1.0) - vv.powi(2) / cc.powi(2)).sqrt()
            }
            II6_15a => {
                let (eps, pd, r, xx, y, z) = (v(0), v(1), v(2), v(3), v(4), v(5));
                pd / (c(4.0 * PI) * eps) * c(3.0) * z / r.powi(5) * (xx.powi(2) + y.powi(2)).sqrt()
            }
            II11_27 => {
                let (n, alpha, eps, ef) = (v(0), v(1), v(2), v(3));
                let na = n * alpha;
                na.clone() / (c(1.0) - na / c(3.0)) * eps * ef
            }
            II11_28 => {
                let na = v(0) * v(1);
                c(1.0) + na.clone() / (c(1.0) - na / c(3.0))
            }
            II35_21 => {
                let (nrho, mom, b, kb, t) = (v(0), v(1), v(2), v(3), v(4));
                nrho * mom.clone() * (mom * b / (kb * t)).tanh()
            }
            III9_52 => {
                let (pd, ef, t, h, w, w0) = (v(0), v(1), v(2), v(3), v(4), v(5));
                let u = (w - w0) * t.clone() / c(2.0);
                pd * ef * t / h * u.clone().sin().powi(2) / u.powi(2)
            }
            III10_19 => {
                let mom = v(0);
                mom * (v(1).powi(2) + v(2).powi(2) + v(3).powi(2)).sqrt()
            }
        }
    }

    pub fn eval_row(self, row: &[f64]) -> f64 {
        self.eval(row)
    }

    /// Enclosure of the formula over a box.
    pub fn image(self, domain: &Domain) -> Interval {
        self.eval(domain.bounds())
    }

    /// Enclosure of `d^order f / dx_var^order` over a box (order 1 or 2).
    pub fn derivative_interval(self, var: usize, order: u8, domain: &Domain) -> Interval {
        let b = domain.bounds();
        if order == 1 {
            let x: Vec<Dual<Interval>> = b
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if i == var {
                        Dual::var(v)
                    } else {
                        Dual::constant(v)
                    }
                })
                .collect();
            self.eval(&x).d
        } else {
            let x: Vec<Dual<Dual<Interval>>> = b
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if i == var {
                        Dual {
                            v: Dual::var(v),
                            d: Dual::cst(1.0),
                        }
                    } else {
                        Dual::constant(Dual::constant(v))
                    }
                })
                .collect();
            self.eval(&x).d.d
        }
    }

    /// Pointwise partial derivative (order 1 or 2) by forward-mode AD.
    pub fn derivative_row(self, var: usize, order: u8, row: &[f64]) -> f64 {
        if order == 1 {
            let x: Vec<Dual<f64>> = row
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if i == var {
                        Dual::var(v)
                    } else {
                        Dual::constant(v)
                    }
                })
                .collect();
            self.eval(&x).d
        } else {
            let x: Vec<Dual<Dual<f64>>> = row
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if i == var {
                        Dual {
                            v: Dual::var(v),
                            d: Dual::cst(1.0),
                        }
                    } else {
                        Dual::constant(Dual::constant(v))
                    }
                })
                .collect();
            self.eval(&x).d.d
        }
    }
}

/// The I.30.5 box as printed in the benchmark tables. With `lambd` up to 5
/// the asin argument reaches 2.5, so the formula is undefined on part of it.
pub const I30_5_LITERAL_BOUNDS: [(f64, f64); 3] = [(1.0, 5.0), (2.0, 5.0), (1.0, 5.0)];

/// A generating formula viewed as a model, so that it can be scored and
/// checked against constraints like any candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Formula(pub Builtin);

impl Model for Formula {
    fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.0.eval_row(r)).collect()
    }
}

impl ShapeModel for Formula {
    fn bound(&self, op: ConstraintOp, domain: &Domain) -> Interval {
        match op {
            ConstraintOp::Image => self.0.image(domain),
            ConstraintOp::Derivative { var, order } => {
                self.0.derivative_interval(var, order, domain)
            }
        }
    }

    fn pointwise(&self, op: ConstraintOp) -> Box<dyn Fn(&[f64]) -> f64 + '_> {
        let b = self.0;
        match op {
            ConstraintOp::Image => Box::new(move |r| b.eval_row(r)),
            ConstraintOp::Derivative { var, order } => {
                Box::new(move |r| b.derivative_row(var, order, r))
            }
        }
    }
}

/// Real-world data sets for which only metadata is carried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RealWorld {
    FrictionDyn,
    FrictionStat,
    FlowStress,
    Cars,
}

impl RealWorld {
    pub const ALL: [RealWorld; 4] = [
        RealWorld::FrictionDyn,
        RealWorld::FrictionStat,
        RealWorld::FlowStress,
        RealWorld::Cars,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RealWorld::FrictionDyn => "Friction mu_dyn",
            RealWorld::FrictionStat => "Friction mu_stat",
            RealWorld::FlowStress => "Flow stress",
            RealWorld::Cars => "Cars",
        }
    }

    pub fn variables(self) -> &'static [&'static str] {
        match self {
            RealWorld::FrictionDyn | RealWorld::FrictionStat => &["p", "v", "T"],
            RealWorld::FlowStress => &["phi", "phi_dot", "T"],
            RealWorld::Cars => &[
                "cylinders",
                "displacement",
                "horsepower",
                "weight",
                "acceleration",
            ],
        }
    }

    pub fn target(self) -> &'static str {
        match self {
            RealWorld::FrictionDyn => "mu_dyn",
            RealWorld::FrictionStat => "mu_stat",
            RealWorld::FlowStress => "sigma",
            RealWorld::Cars => "mpg",
        }
    }

    pub fn bounds(self) -> Vec<(f64, f64)> {
        match self {
            RealWorld::FrictionDyn | RealWorld::FrictionStat => {
                [(0.1, 15.0), (0.01, 3.0), (-50.0, 250.0)].to_vec()
            }
            RealWorld::FlowStress => [(0.0, 1.0), (0.001, 10.0), (250.0, 600.0)].to_vec(),
            // weight range taken from the data, the others as published
            RealWorld::Cars => [
                (3.0, 8.0),
                (68.0, 455.0),
                (46.0, 230.0),
                (1613.0, 5140.0),
                (8.0, 24.8),
            ]
            .to_vec(),
        }
    }

    pub fn monotonicity(self) -> &'static [i8] {
        match self {
            RealWorld::FrictionDyn => &[-1, -1, -1],
            RealWorld::FrictionStat => &[-1, 0, -1],
            RealWorld::FlowStress => &[0, 1, -1],
            RealWorld::Cars => &[0, -1, -1, -1, 0],
        }
    }

    /// Problem spec pointing at `path`.
    pub fn spec(self, path: &str) -> ProblemSpec {
        ProblemSpec {
            name: self.name().to_string(),
            source: Source::Csv {
                path: path.to_string(),
                target: self.target().to_string(),
            },
            bounds: self.bounds(),
            monotonicity: self.monotonicity().to_vec(),
            image_bounds: None,
            n_train: 0,
            n_test: 0,
            split: DEFAULT_SPLIT,
            noise: 0.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Builtin(Builtin),
    Csv { path: String, target: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub source: Source,
    pub bounds: Vec<(f64, f64)>,
    pub monotonicity: Vec<i8>,
    pub image_bounds: Option<(f64, f64)>,
    pub n_train: usize,
    pub n_test: usize,
    /// Training share after a seeded shuffle, for CSV sources.
    pub split: f64,
    /// Relative noise level; the noise standard deviation is this times the
    /// standard deviation of the clean targets.
    pub noise: f64,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn builtin(b: Builtin) -> Self {
        ProblemSpec {
            name: b.name().to_string(),
            source: Source::Builtin(b),
            bounds: b.bounds(),
            monotonicity: b.monotonicity().to_vec(),
            image_bounds: None,
            n_train: 100,
            n_test: 100,
            split: DEFAULT_SPLIT,
            noise: 0.0,
            seed: 0,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_noisy(&self) -> bool {
        self.noise > 0.0
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::from_pairs(&self.bounds)
    }

    pub fn constraints(&self) -> Result<ConstraintSet> {
        ConstraintSet::from_monotonicity(&self.monotonicity, self.domain()?, self.image_bounds)
    }

    pub fn variables(&self) -> Vec<String> {
        match &self.source {
            Source::Builtin(b) => b.variables().iter().map(|s| s.to_string()).collect(),
            Source::Csv { .. } => (0..self.bounds.len())
                .map(|i| alloc::format!("x{i}"))
                .collect(),
        }
    }
}

/// The 19 synthetic problems, noiseless.
pub fn builtin_registry() -> Vec<ProblemSpec> {
    Builtin::ALL.into_iter().map(ProblemSpec::builtin).collect()
}

/// Every synthetic problem in a noiseless and a noisy version.
pub fn synthetic_configurations() -> Vec<ProblemSpec> {
    builtin_registry()
        .into_iter()
        .flat_map(|s| [s.clone(), s.with_noise(NOISE_LEVEL)])
        .collect()
}

/// Samples `n_train + n_test` points uniformly from the box, evaluates the
/// generating formula and optionally adds Gaussian noise. Returns
/// `(train, test)`.
pub fn generate(spec: &ProblemSpec) -> Result<(Dataset, Dataset)> {
    let Source::Builtin(b) = spec.source else {
        return Err(Error::InvalidDomain(
            "only builtin problems can be generated".to_string(),
        ));
    };
    let domain = spec.domain()?;
    if domain.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: domain.dim(),
        });
    }
    let n = spec.n_train + spec.n_test;
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let mut rng = crate::seeded_rng(spec.seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = alloc::vec![0.0; b.dim()];
        domain.sample(&mut rng, &mut row);
        let v = b.eval_row(&row);
        if !v.is_finite() {
            return Err(Error::Generation {
                problem: spec.name.clone(),
                row: i,
            });
        }
        rows.push(row);
        y.push(v);
    }
    if spec.noise > 0.0 {
        // scaled per split so the true formula scores noise^2 on each
        let (train, test) = y.split_at_mut(spec.n_train);
        for part in [train, test] {
            if part.is_empty() {
                continue;
            }
            let sd = spec.noise * stats::std_dev(part);
            let normal = Normal::new(0.0, sd).map_err(|_| Error::DegenerateTarget)?;
            part.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
        }
    }
    let x = Matrix::from_rows(&rows)?;
    let columns: Vec<String> = b.variables().iter().map(|s| s.to_string()).collect();
    let all = Dataset::new(x, y, columns, "y".to_string())?;
    Ok(all.split_at(spec.n_train))
}

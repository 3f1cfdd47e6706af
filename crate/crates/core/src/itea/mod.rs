//! Interaction-Transformation evolutionary algorithm and its feasible-infeasible
//! two-population variant.

mod repr;

pub use repr::{ItExpression, ItTerm, Transform};

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};

use crate::constraints::{check_pessimistic, ConstraintSet};
use crate::data::Matrix;
use crate::gp::GenerationLog;
use crate::linalg;
use crate::math;
use crate::stats;

#[derive(Clone, Debug, PartialEq)]
pub struct ItConfig {
    pub population_size: usize,
    pub iterations: usize,
    pub transforms: Vec<Transform>,
    pub max_init_terms: usize,
    /// Inclusive strength range; zero is never drawn.
    pub strength_range: (i32, i32),
    /// Inclusive range of non-zero strengths per new term, clipped to the
    /// number of variables.
    pub term_length: (usize, usize),
    pub seed: u64,
}

impl Default for ItConfig {
    fn default() -> Self {
        ItConfig {
            population_size: 200,
            iterations: 500,
            transforms: Transform::ALL.to_vec(),
            max_init_terms: 4,
            strength_range: (-4, 4),
            term_length: (2, 6),
            seed: 0,
        }
    }
}

impl ItConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Fitted weights of an IT expression.
#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Training RMSE; infinite when some term is not finite on the data.
    pub rmse: f64,
}

/// Ordinary least squares for the term weights plus an intercept. Columns that
/// are linearly dependent on earlier ones receive weight zero.
pub fn fit_weights_ols(terms: &[ItTerm], x: &Matrix, y: &[f64]) -> Fit {
    let n = x.rows();
    let p = terms.len() + 1;
    let mut design = Matrix::zeros(n, p);
    let mut finite = true;
    for (i, row) in x.iter_rows().enumerate() {
        design.set(i, 0, 1.0);
        for (j, t) in terms.iter().enumerate() {
            let v = t.eval_row(row);
            finite &= v.is_finite();
            design.set(i, j + 1, v);
        }
    }
    if !finite || n == 0 {
        return Fit {
            weights: vec![0.0; terms.len()],
            intercept: stats::mean(y),
            rmse: f64::INFINITY,
        };
    }
    let ls = linalg::lstsq(&design, y);
    let intercept = ls.coef[0];
    let weights = ls.coef[1..].to_vec();
    let sse: f64 = (0..n)
        .map(|i| {
            let r = design.row(i);
            let pred: f64 = r.iter().zip(&ls.coef).map(|(a, b)| a * b).sum();
            (pred - y[i]) * (pred - y[i])
        })
        .sum();
    let rmse = math::sqrt(sse / n as f64);
    Fit {
        weights,
        intercept,
        rmse: if rmse.is_finite() {
            rmse
        } else {
            f64::INFINITY
        },
    }
}

/// Removes repeated `(strengths, transform)` pairs, keeping first occurrences.
pub fn dedup_terms(terms: Vec<ItTerm>) -> Vec<ItTerm> {
    let mut seen = BTreeSet::new();
    terms
        .into_iter()
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

/// Strength-wise sum.
pub fn positive_interaction(a: &[i32], b: &[i32]) -> Vec<i32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Strength-wise difference.
pub fn negative_interaction(a: &[i32], b: &[i32]) -> Vec<i32> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn random_strengths<R: Rng + ?Sized>(cfg: &ItConfig, dim: usize, rng: &mut R) -> Vec<i32> {
    let lo = cfg.term_length.0.clamp(1, dim.max(1));
    let hi = cfg.term_length.1.clamp(lo, dim.max(1));
    let len = rng.random_range(lo..=hi);
    // partial Fisher-Yates for `len` distinct variables
    let mut idx: Vec<usize> = (0..dim).collect();
    for i in 0..len {
        let j = rng.random_range(i..dim);
        idx.swap(i, j);
    }
    let (smin, smax) = cfg.strength_range;
    let nonzero: Vec<i32> = (smin..=smax).filter(|&k| k != 0).collect();
    let mut k = vec![0; dim];
    for &v in &idx[..len] {
        k[v] = nonzero[rng.random_range(0..nonzero.len())];
    }
    k
}

fn random_transform<R: Rng + ?Sized>(cfg: &ItConfig, rng: &mut R) -> Transform {
    cfg.transforms[rng.random_range(0..cfg.transforms.len())]
}

/// A random term from the initialisation distribution.
pub fn random_term<R: Rng + ?Sized>(cfg: &ItConfig, dim: usize, rng: &mut R) -> ItTerm {
    ItTerm {
        strengths: random_strengths(cfg, dim, rng),
        transform: random_transform(cfg, rng),
    }
}

/// Random initial term list: between 1 and `max_init_terms` terms, deduplicated.
pub fn random_terms<R: Rng + ?Sized>(cfg: &ItConfig, dim: usize, rng: &mut R) -> Vec<ItTerm> {
    let n = rng.random_range(1..=cfg.max_init_terms.max(1));
    dedup_terms((0..n).map(|_| random_term(cfg, dim, rng)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ItMutation {
    RemoveTerm,
    AddTerm,
    ReplaceStrengths,
    PositiveInteraction,
    NegativeInteraction,
}

impl ItMutation {
    pub const ALL: [ItMutation; 5] = [
        ItMutation::RemoveTerm,
        ItMutation::AddTerm,
        ItMutation::ReplaceStrengths,
        ItMutation::PositiveInteraction,
        ItMutation::NegativeInteraction,
    ];
}

/// Mutates a term list with a uniformly chosen action.
pub fn mutate_terms<R: Rng + ?Sized>(
    terms: &[ItTerm],
    cfg: &ItConfig,
    dim: usize,
    rng: &mut R,
) -> Vec<ItTerm> {
    let kind = ItMutation::ALL[rng.random_range(0..ItMutation::ALL.len())];
    mutate_terms_with(kind, terms, cfg, dim, rng)
}

/// Applies a specific action. Removing the only term, and interactions that
/// cancel every strength, fall back to adding a term.
pub fn mutate_terms_with<R: Rng + ?Sized>(
    kind: ItMutation,
    terms: &[ItTerm],
    cfg: &ItConfig,
    dim: usize,
    rng: &mut R,
) -> Vec<ItTerm> {
    let mut out = terms.to_vec();
    let add = |out: &mut Vec<ItTerm>, rng: &mut R| out.push(random_term(cfg, dim, rng));
    if out.is_empty() {
        add(&mut out, rng);
        return out;
    }
    let i = rng.random_range(0..out.len());
    match kind {
        ItMutation::RemoveTerm if out.len() > 1 => {
            out.remove(i);
        }
        ItMutation::RemoveTerm | ItMutation::AddTerm => add(&mut out, rng),
        ItMutation::ReplaceStrengths => out[i].strengths = random_strengths(cfg, dim, rng),
        ItMutation::PositiveInteraction | ItMutation::NegativeInteraction => {
            let j = rng.random_range(0..out.len());
            let k = if kind == ItMutation::PositiveInteraction {
                positive_interaction(&out[i].strengths, &out[j].strengths)
            } else {
                negative_interaction(&out[i].strengths, &out[j].strengths)
            };
            if k.iter().all(|&s| s == 0) {
                add(&mut out, rng);
            } else {
                out[i].strengths = k;
            }
        }
    }
    dedup_terms(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ItIndividual {
    pub expr: ItExpression,
    pub rmse: f64,
    /// Total pessimistic violation; zero when feasible.
    pub violation: f64,
}

fn build(terms: Vec<ItTerm>, x: &Matrix, y: &[f64]) -> ItIndividual {
    let fit = fit_weights_ols(&terms, x, y);
    let expr = ItExpression {
        terms,
        weights: fit.weights,
        intercept: fit.intercept,
    };
    ItIndividual {
        expr,
        rmse: fit.rmse,
        violation: 0.0,
    }
}

fn classify(mut ind: ItIndividual, constraints: &ConstraintSet) -> ItIndividual {
    ind.violation = check_pessimistic(&ind.expr, constraints).total();
    ind
}

/// RMSE on `y` converted to NMSE, clamped to 1.
pub fn rmse_to_nmse(rmse: f64, y: &[f64]) -> f64 {
    let v = rmse * rmse / stats::variance(y);
    if v.is_nan() {
        1.0
    } else {
        v.min(1.0)
    }
}

fn log_row(it: usize, evaluations: usize, rmses: &[f64], y: &[f64]) -> GenerationLog {
    let nmse: Vec<f64> = rmses.iter().map(|r| rmse_to_nmse(*r, y)).collect();
    GenerationLog {
        generation: it,
        evaluations,
        best: nmse.iter().copied().fold(1.0, f64::min),
        median: if nmse.is_empty() {
            1.0
        } else {
            stats::median(&nmse)
        },
    }
}

// Child streams are seeded from the master stream, so each child's mutation is
// independent of the order in which children are produced.
fn child_rngs(master: &mut crate::Rng, n: usize) -> Vec<crate::Rng> {
    (0..n)
        .map(|_| crate::Rng::seed_from_u64(master.next_u64()))
        .collect()
}

fn best_index(pop: &[ItIndividual]) -> Option<usize> {
    (0..pop.len()).fold(None, |best, i| match best {
        Some(b) if pop[b].rmse <= pop[i].rmse => Some(b),
        _ => Some(i),
    })
}

#[derive(Clone, Debug)]
pub struct ItResult {
    pub model: ItExpression,
    pub rmse: f64,
    pub evaluations: usize,
    pub log: Vec<GenerationLog>,
}

/// ITEA: every individual produces one mutated child, and the better of each
/// parent-child pair survives.
pub fn run_itea(cfg: &ItConfig, x: &Matrix, y: &[f64]) -> ItResult {
    let dim = x.cols();
    let mut rng = crate::seeded_rng(cfg.seed);
    let n = cfg.population_size.max(1);
    let mut pop: Vec<ItIndividual> = (0..n)
        .map(|_| build(random_terms(cfg, dim, &mut rng), x, y))
        .collect();
    let mut evaluations = n;
    let rmses = |p: &[ItIndividual]| p.iter().map(|i| i.rmse).collect::<Vec<_>>();
    let mut log = vec![log_row(0, evaluations, &rmses(&pop), y)];

    for it in 1..=cfg.iterations {
        let rngs = child_rngs(&mut rng, n);
        let children: Vec<ItIndividual> = pop
            .iter()
            .zip(rngs)
            .map(|(p, mut r)| build(mutate_terms(&p.expr.terms, cfg, dim, &mut r), x, y))
            .collect();
        evaluations += n;
        for (p, c) in pop.iter_mut().zip(children) {
            if c.rmse < p.rmse {
                *p = c;
            }
        }
        log.push(log_row(it, evaluations, &rmses(&pop), y));
    }
    let best = pop.swap_remove(best_index(&pop).unwrap_or(0));
    ItResult {
        model: best.expr,
        rmse: best.rmse,
        evaluations,
        log,
    }
}

#[derive(Clone, Debug)]
pub struct Fi2PopResult {
    /// Best feasible model, or `None` if no feasible individual was ever found.
    pub model: Option<ItExpression>,
    pub rmse: f64,
    pub evaluations: usize,
    /// Best and median NMSE of the feasible population (1 while empty).
    pub log: Vec<GenerationLog>,
    pub feasible_size: Vec<usize>,
}

impl Fi2PopResult {
    pub fn found(&self) -> bool {
        self.model.is_some()
    }
}

fn truncate_by(
    mut pop: Vec<ItIndividual>,
    n: usize,
    key: fn(&ItIndividual) -> f64,
) -> Vec<ItIndividual> {
    pop.sort_by(|a, b| key(a).total_cmp(&key(b)));
    pop.truncate(n);
    pop
}

/// FI-2POP-IT: feasible individuals compete on RMSE, infeasible individuals
/// on total constraint violation. Each population keeps at most
/// `population_size` members.
pub fn run_fi2pop(
    cfg: &ItConfig,
    x: &Matrix,
    y: &[f64],
    constraints: &ConstraintSet,
) -> Fi2PopResult {
    let dim = x.cols();
    let mut rng = crate::seeded_rng(cfg.seed);
    let n = cfg.population_size.max(1);
    let init: Vec<ItIndividual> = (0..n)
        .map(|_| classify(build(random_terms(cfg, dim, &mut rng), x, y), constraints))
        .collect();
    let (mut feasible, mut infeasible): (Vec<_>, Vec<_>) =
        init.into_iter().partition(|i| i.violation == 0.0);
    let mut evaluations = n;
    let rmses = |p: &[ItIndividual]| p.iter().map(|i| i.rmse).collect::<Vec<_>>();
    let mut log = vec![log_row(0, evaluations, &rmses(&feasible), y)];
    let mut feasible_size = vec![feasible.len()];

    for it in 1..=cfg.iterations {
        let parents: Vec<&ItIndividual> = feasible.iter().chain(&infeasible).collect();
        let rngs = child_rngs(&mut rng, parents.len());
        let children: Vec<ItIndividual> = parents
            .iter()
            .zip(rngs)
            .map(|(p, mut r)| {
                classify(
                    build(mutate_terms(&p.expr.terms, cfg, dim, &mut r), x, y),
                    constraints,
                )
            })
            .collect();
        evaluations += children.len();
        let (cf, ci): (Vec<_>, Vec<_>) = children.into_iter().partition(|i| i.violation == 0.0);
        feasible.extend(cf);
        infeasible.extend(ci);
        feasible = truncate_by(feasible, n, |i| i.rmse);
        infeasible = truncate_by(infeasible, n, |i| i.violation);
        log.push(log_row(it, evaluations, &rmses(&feasible), y));
        feasible_size.push(feasible.len());
    }
    match best_index(&feasible) {
        Some(b) => {
            let best = feasible.swap_remove(b);
            Fi2PopResult {
                model: Some(best.expr),
                rmse: best.rmse,
                evaluations,
                log,
                feasible_size,
            }
        }
        None => Fi2PopResult {
            model: None,
            rmse: f64::INFINITY,
            evaluations,
            log,
            feasible_size,
        },
    }
}

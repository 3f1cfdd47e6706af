//! Tree-based genetic programming for shape-constrained regression.
//!
//! Generational replacement with a single elite, tournament selection,
//! subtree crossover, four mutation actions and optional memetic
//! Levenberg-Marquardt parameter tuning. Shape constraints are enforced in
//! the fitness function: a candidate whose scaled output or derivatives can
//! leave the feasible region anywhere in the box gets the worst NMSE (1).

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::constraints::ConstraintSet;
use crate::data::Matrix;
use crate::expr::{ptc2_with, Expr, FunctionSet};
use crate::fitness::{self, ScaledModel, Scaling};
use crate::localopt::{self, LmConfig};
use crate::stats;

#[derive(Clone, Debug, PartialEq)]
pub struct GpConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub tournament_size: usize,
    pub max_length: usize,
    pub max_depth: usize,
    /// Levenberg-Marquardt iterations per child; 0 disables local optimisation.
    pub optimize_iterations: usize,
    pub seed: u64,
}

impl GpConfig {
    /// Plain GP.
    pub fn gp() -> Self {
        GpConfig {
            population_size: 1000,
            generations: 200,
            mutation_rate: 0.15,
            crossover_rate: 1.0,
            tournament_size: 5,
            max_length: 50,
            max_depth: 20,
            optimize_iterations: 0,
            seed: 0,
        }
    }

    /// GP with memetic optimisation (fewer generations).
    pub fn gpc() -> Self {
        GpConfig {
            generations: 20,
            optimize_iterations: 10,
            ..Self::gp()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl Default for GpConfig {
    fn default() -> Self {
        Self::gp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub expr: Expr,
    pub fitness: f64,
}

/// One row of the convergence log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationLog {
    pub generation: usize,
    pub evaluations: usize,
    pub best: f64,
    pub median: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GpResult {
    pub model: ScaledModel<Expr>,
    /// Training NMSE of the returned model.
    pub fitness: f64,
    pub evaluations: usize,
    pub log: Vec<GenerationLog>,
    pub population: Vec<Individual>,
}

/// Samples `size` individuals uniformly with replacement and returns the
/// index of the one with the smallest error; ties go to the first sampled.
pub fn tournament_select<R: Rng + ?Sized>(pop: &[Individual], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size.max(1) {
        let c = rng.random_range(0..pop.len());
        if pop[c].fitness < pop[best].fitness {
            best = c;
        }
    }
    best
}

/// Replaces a random node of `p1` with a random subtree of `p2` that keeps
/// the child within both limits. Returns a copy of `p1` if no subtree fits.
pub fn subtree_crossover<R: Rng + ?Sized>(
    p1: &Expr,
    p2: &Expr,
    max_len: usize,
    max_depth: usize,
    rng: &mut R,
) -> Expr {
    let infos1 = p1.node_infos();
    let cut = rng.random_range(0..infos1.len());
    let at = infos1[cut];
    let len_budget = max_len.saturating_sub(p1.len() - at.size);
    let depth_budget = max_depth.saturating_sub(at.level - 1);
    let candidates: Vec<usize> = p2
        .node_infos()
        .iter()
        .enumerate()
        .filter(|(_, n)| n.size <= len_budget && n.height <= depth_budget)
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return p1.clone();
    }
    let pick = candidates[rng.random_range(0..candidates.len())];
    p1.replace_subtree(cut, p2.subtree(pick).clone())
}

/// The four mutation actions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationKind {
    ReplaceSubtree,
    ShiftAllParams,
    ShiftOneParam,
    ChangeSymbol,
}

impl MutationKind {
    pub const ALL: [MutationKind; 4] = [
        MutationKind::ReplaceSubtree,
        MutationKind::ShiftAllParams,
        MutationKind::ShiftOneParam,
        MutationKind::ChangeSymbol,
    ];
}

/// Limits and symbols a mutation has to respect.
#[derive(Clone, Debug)]
pub struct MutationContext {
    pub functions: FunctionSet,
    pub dim: usize,
    pub max_length: usize,
    pub max_depth: usize,
}

/// Applies one uniformly chosen mutation action.
pub fn mutate<R: Rng + ?Sized>(e: &Expr, ctx: &MutationContext, rng: &mut R) -> Expr {
    let kind = MutationKind::ALL[rng.random_range(0..4)];
    mutate_with(e, kind, ctx, rng)
}

/// Applies a specific mutation action. Inapplicable actions (no parameters,
/// no function node) fall back to subtree replacement.
pub fn mutate_with<R: Rng + ?Sized>(
    e: &Expr,
    kind: MutationKind,
    ctx: &MutationContext,
    rng: &mut R,
) -> Expr {
    match kind {
        MutationKind::ShiftAllParams if e.param_count() > 0 => {
            e.map_params(&mut |v| v + Distribution::<f64>::sample(&StandardNormal, rng))
        }
        MutationKind::ShiftOneParam if e.param_count() > 0 => {
            let target = rng.random_range(0..e.param_count());
            let mut idx = 0;
            e.map_params(&mut |v| {
                let out = if idx == target {
                    let eps: f64 = StandardNormal.sample(rng);
                    v + eps
                } else {
                    v
                };
                idx += 1;
                out
            })
        }
        MutationKind::ChangeSymbol if !e.is_leaf() => change_symbol(e, ctx, rng),
        _ => replace_subtree(e, ctx, rng),
    }
}

fn replace_subtree<R: Rng + ?Sized>(e: &Expr, ctx: &MutationContext, rng: &mut R) -> Expr {
    let infos = e.node_infos();
    let i = rng.random_range(0..infos.len());
    let at = infos[i];
    let len_budget = ctx.max_length.saturating_sub(e.len() - at.size).max(1);
    let depth_budget = ctx.max_depth.saturating_sub(at.level - 1).max(1);
    let branch = ptc2_with(&ctx.functions, len_budget, depth_budget, ctx.dim, rng);
    e.replace_subtree(i, branch)
}

fn change_symbol<R: Rng + ?Sized>(e: &Expr, ctx: &MutationContext, rng: &mut R) -> Expr {
    let functions: Vec<usize> = (0..e.len()).filter(|&i| !e.subtree(i).is_leaf()).collect();
    let i = functions[rng.random_range(0..functions.len())];
    let replaced = match e.subtree(i) {
        Expr::Unary(f, a) => {
            let others: Vec<_> = ctx.functions.unary.iter().filter(|g| *g != f).collect();
            if others.is_empty() {
                return replace_subtree(e, ctx, rng);
            }
            Expr::unary(*others[rng.random_range(0..others.len())], (**a).clone())
        }
        Expr::Binary(op, a, b) => {
            let others: Vec<_> = ctx.functions.binary.iter().filter(|g| *g != op).collect();
            if others.is_empty() {
                return replace_subtree(e, ctx, rng);
            }
            let g = *others[rng.random_range(0..others.len())];
            Expr::binary(g, (**a).clone(), (**b).clone())
        }
        _ => unreachable!("function node expected"),
    };
    e.replace_subtree(i, replaced)
}

fn argmin(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.fitness < pop[best].fitness {
            best = i;
        }
    }
    best
}

fn log_row(generation: usize, evaluations: usize, pop: &[Individual]) -> GenerationLog {
    let fit: Vec<f64> = pop.iter().map(|i| i.fitness).collect();
    GenerationLog {
        generation,
        evaluations,
        best: fit.iter().copied().fold(f64::INFINITY, f64::min),
        median: stats::median(&fit),
    }
}

/// Runs GP on training data `(x, y)`. An empty constraint set gives the
/// unconstrained algorithm.
pub fn run(cfg: &GpConfig, x: &Matrix, y: &[f64], constraints: &ConstraintSet) -> GpResult {
    let mut rng = crate::seeded_rng(cfg.seed);
    let n = cfg.population_size.max(2);
    let ctx = MutationContext {
        functions: FunctionSet::gp(),
        dim: x.cols(),
        max_length: cfg.max_length,
        max_depth: cfg.max_depth,
    };
    let lm = LmConfig::with_iterations(cfg.optimize_iterations);
    let evaluate = |e: &Expr| fitness::evaluate(e, x, y, constraints).nmse;
    let prepare = |e: Expr| {
        let e = if cfg.optimize_iterations > 0 {
            localopt::optimize(&e, &lm, x, y)
        } else {
            e
        };
        let fitness = evaluate(&e);
        Individual { expr: e, fitness }
    };

    let mut pop: Vec<Individual> = (0..n)
        .map(|_| {
            ptc2_with(
                &ctx.functions,
                cfg.max_length,
                cfg.max_depth,
                ctx.dim,
                &mut rng,
            )
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|e| {
            let fitness = evaluate(&e);
            Individual { expr: e, fitness }
        })
        .collect();
    let mut evaluations = n;
    let mut log = alloc::vec![log_row(0, evaluations, &pop)];

    for g in 1..=cfg.generations {
        let elite = pop[argmin(&pop)].clone();
        // all random decisions first; optimisation and evaluation are pure
        let children: Vec<Expr> = (1..n)
            .map(|_| {
                let a = tournament_select(&pop, cfg.tournament_size, &mut rng);
                let b = tournament_select(&pop, cfg.tournament_size, &mut rng);
                let mut child = if rng.random::<f64>() < cfg.crossover_rate {
                    subtree_crossover(
                        &pop[a].expr,
                        &pop[b].expr,
                        cfg.max_length,
                        cfg.max_depth,
                        &mut rng,
                    )
                } else {
                    pop[a].expr.clone()
                };
                if rng.random::<f64>() < cfg.mutation_rate {
                    child = mutate(&child, &ctx, &mut rng);
                }
                child
            })
            .collect();
        let mut next = Vec::with_capacity(n);
        next.push(elite);
        next.extend(children.into_iter().map(&prepare));
        evaluations += n - 1;
        pop = next;
        log.push(log_row(g, evaluations, &pop));
    }

    let best = pop[argmin(&pop)].clone();
    let (model, fitness) = finalize(best.expr, x, y, constraints);
    GpResult {
        model,
        fitness,
        evaluations,
        log,
        population: pop,
    }
}

/// Attaches the training-data scaling to the best tree. A tree that is
/// infeasible or non-finite is replaced by the constant mean predictor.
fn finalize(
    expr: Expr,
    x: &Matrix,
    y: &[f64],
    constraints: &ConstraintSet,
) -> (ScaledModel<Expr>, f64) {
    let ev = fitness::evaluate(&expr, x, y, constraints);
    match ev.scaling {
        Some(scaling) => (ScaledModel::new(expr, scaling), ev.nmse),
        None => (constant_model(y), 1.0),
    }
}

/// The mean predictor.
pub fn constant_model(y: &[f64]) -> ScaledModel<Expr> {
    ScaledModel::new(Expr::Param(stats::mean(y)), Scaling::IDENTITY)
}

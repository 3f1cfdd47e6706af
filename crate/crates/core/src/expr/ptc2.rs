//! PTC2 random tree creation under length and depth limits.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{BinaryFn, Expr};
use crate::interval::UnaryFn;

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSet {
    pub unary: Vec<UnaryFn>,
    pub binary: Vec<BinaryFn>,
}

impl FunctionSet {
    /// `+, *, %, log, exp, sin, cos, tanh, x^2, sqrt`.
    pub fn gp() -> Self {
        FunctionSet {
            unary: alloc::vec![
                UnaryFn::Log,
                UnaryFn::Exp,
                UnaryFn::Sin,
                UnaryFn::Cos,
                UnaryFn::Tanh,
                UnaryFn::Square,
                UnaryFn::Sqrt,
            ],
            binary: BinaryFn::ALL.to_vec(),
        }
    }

    fn len(&self) -> usize {
        self.unary.len() + self.binary.len()
    }
}

impl Default for FunctionSet {
    fn default() -> Self {
        Self::gp()
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Unary(UnaryFn),
    Binary(BinaryFn),
    Leaf,
}

struct Node {
    kind: Kind,
    children: [usize; 2],
}

/// Random leaf: a variable with probability 1/2, otherwise a N(0, 1) parameter.
pub(crate) fn random_leaf<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Expr {
    if dim > 0 && rng.random_bool(0.5) {
        Expr::Var(rng.random_range(0..dim))
    } else {
        Expr::Param(StandardNormal.sample(rng))
    }
}

/// PTC2 over the GP function set.
pub fn ptc2_random<R: Rng + ?Sized>(
    max_len: usize,
    max_depth: usize,
    dim: usize,
    rng: &mut R,
) -> Expr {
    ptc2_with(&FunctionSet::gp(), max_len, max_depth, dim, rng)
}

/// PTC2: the target length is uniform in `[1, max_len]`; function nodes are
/// expanded at random open slots until the target is reached, then every
/// remaining slot becomes a leaf.
pub fn ptc2_with<R: Rng + ?Sized>(
    fset: &FunctionSet,
    max_len: usize,
    max_depth: usize,
    dim: usize,
    rng: &mut R,
) -> Expr {
    let max_len = max_len.max(1);
    let target = rng.random_range(1..=max_len);
    if target == 1 || max_depth <= 1 || fset.len() == 0 {
        return random_leaf(rng, dim);
    }
    let mut nodes: Vec<Node> = Vec::with_capacity(target);
    // (node, child slot, level)
    let mut open: Vec<(usize, usize, usize)> = Vec::new();
    let mut size = 0usize;

    let pick = |rng: &mut R, room: usize| -> Kind {
        let allow_binary = room >= 2 && !fset.binary.is_empty();
        let total = fset.unary.len() + if allow_binary { fset.binary.len() } else { 0 };
        if total == 0 {
            return Kind::Leaf;
        }
        let k = rng.random_range(0..total);
        if k < fset.unary.len() {
            Kind::Unary(fset.unary[k])
        } else {
            Kind::Binary(fset.binary[k - fset.unary.len()])
        }
    };

    let place =
        |nodes: &mut Vec<Node>, open: &mut Vec<(usize, usize, usize)>, kind: Kind, level| {
            let idx = nodes.len();
            nodes.push(Node {
                kind,
                children: [usize::MAX; 2],
            });
            let arity = match kind {
                Kind::Unary(_) => 1,
                Kind::Binary(_) => 2,
                Kind::Leaf => 0,
            };
            for slot in 0..arity {
                open.push((idx, slot, level + 1));
            }
            idx
        };

    // root occupies one slot; size counts placed nodes plus open slots
    let root_kind = pick(rng, target - 1);
    place(&mut nodes, &mut open, root_kind, 1);
    size += 1 + open.len();

    while size < target {
        let expandable: Vec<usize> = (0..open.len()).filter(|&i| open[i].2 < max_depth).collect();
        if expandable.is_empty() {
            break;
        }
        let i = expandable[rng.random_range(0..expandable.len())];
        let (parent, slot, level) = open.swap_remove(i);
        let kind = pick(rng, target - size);
        let before = open.len();
        let idx = place(&mut nodes, &mut open, kind, level);
        nodes[parent].children[slot] = idx;
        size += open.len() - before;
    }

    // leaves are materialised during conversion
    fn build<R: Rng + ?Sized>(nodes: &[Node], i: usize, dim: usize, rng: &mut R) -> Expr {
        if i == usize::MAX {
            return random_leaf(rng, dim);
        }
        let n = &nodes[i];
        match n.kind {
            Kind::Leaf => random_leaf(rng, dim),
            Kind::Unary(f) => Expr::unary(f, build(nodes, n.children[0], dim, rng)),
            Kind::Binary(op) => {
                let a = build(nodes, n.children[0], dim, rng);
                let b = build(nodes, n.children[1], dim, rng);
                Expr::binary(op, a, b)
            }
        }
    }
    build(&nodes, 0, dim, rng)
}

//! Exact antagonistic, cooperative and strongly-optimal cooperative values
//! by policy iteration over big rationals.
//!
//! The discounted value of a play is `sum lambda^i * w(e_i)` with the
//! exponent starting at 0. Under a fixed positional profile every vertex
//! enters a lasso, whose value has the closed form
//! `Val(stem) + lambda^|stem| * Val(cycle) / (1 - lambda^|cycle|)`,
//! so policies evaluate exactly and policy iteration terminates: each
//! improvement round changes the value vector monotonically and strictly
//! somewhere, and there are finitely many policies.

use num_traits::{One, Zero};

use crate::game::{Game, Owner, VertexId};
use crate::history::{History, Lasso};
use crate::rational::Rational;
use crate::strategy::Positional;

/// Which way the controller of a vertex optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Ctrl {
    Max,
    Min,
}

/// A solver arena: dense vertices, rational edge weights, one controller per
/// vertex. A vertex with a single successor is effectively uncontrolled.
#[derive(Debug, Clone)]
pub(crate) struct Arena {
    pub lambda: Rational,
    pub succ: Vec<Vec<(usize, Rational)>>,
    pub ctrl: Vec<Ctrl>,
}

impl Arena {
    fn len(&self) -> usize {
        self.succ.len()
    }
}

/// Evaluates the out-degree-one graph selected by `pi` (an edge index per
/// vertex). Iterative so that product-sized arenas cannot overflow the stack.
pub(crate) fn eval_policy(a: &Arena, pi: &[usize]) -> Vec<Rational> {
    let n = a.len();
    let mut val: Vec<Option<Rational>> = vec![None; n];
    let mut stack_pos: Vec<Option<usize>> = vec![None; n];
    let mut stack: Vec<usize> = Vec::new();
    for start in 0..n {
        if val[start].is_some() {
            continue;
        }
        let mut u = start;
        loop {
            if val[u].is_some() {
                break;
            }
            if let Some(pos) = stack_pos[u] {
                // Found a fresh cycle: stack[pos..] closes back at u.
                let cyc: Vec<usize> = stack[pos..].to_vec();
                let mut cycle_val = Rational::zero();
                let mut lam_pow = Rational::one();
                for &x in &cyc {
                    let (_, w) = &a.succ[x][pi[x]];
                    cycle_val += &lam_pow * w;
                    lam_pow *= &a.lambda;
                }
                // lam_pow is now lambda^|cycle|
                let head = cycle_val / (Rational::one() - lam_pow);
                val[cyc[0]] = Some(head);
                for i in (1..cyc.len()).rev() {
                    let (to, w) = &a.succ[cyc[i]][pi[cyc[i]]];
                    let next = val[*to].clone().expect("cycle successor resolved");
                    val[cyc[i]] = Some(w + &a.lambda * next);
                }
                for &x in &cyc {
                    stack_pos[x] = None;
                }
                stack.truncate(pos);
                break;
            }
            stack_pos[u] = Some(stack.len());
            stack.push(u);
            u = a.succ[u][pi[u]].0;
        }
        while let Some(x) = stack.pop() {
            stack_pos[x] = None;
            let (to, w) = &a.succ[x][pi[x]];
            let next = val[*to].clone().expect("suffix successor resolved");
            val[x] = Some(w + &a.lambda * next);
        }
    }
    val.into_iter().map(Option::unwrap).collect()
}

fn improve_round(a: &Arena, which: Ctrl, pi: &mut [usize], val: &[Rational]) -> bool {
    let mut changed = false;
    for u in 0..a.len() {
        if a.ctrl[u] != which || a.succ[u].len() < 2 {
            continue;
        }
        // switch to the lowest-indexed strictly improving successor
        for (i, (to, w)) in a.succ[u].iter().enumerate() {
            let cand = w + &a.lambda * &val[*to];
            let better = match which {
                Ctrl::Max => cand > val[u],
                Ctrl::Min => cand < val[u],
            };
            if better {
                pi[u] = i;
                changed = true;
                break;
            }
        }
    }
    changed
}

fn best_response(a: &Arena, which: Ctrl, pi: &mut [usize]) -> Vec<Rational> {
    loop {
        let val = eval_policy(a, pi);
        if !improve_round(a, which, pi, &val) {
            return val;
        }
    }
}

/// Solves the arena exactly: the Max player improves in the outer loop
/// against an exact Min best response in the inner loop. Returns the value
/// vector and the final joint policy.
pub(crate) fn solve(a: &Arena) -> (Vec<Rational>, Vec<usize>) {
    let mut pi: Vec<usize> = vec![0; a.len()];
    loop {
        let val = best_response(a, Ctrl::Min, &mut pi);
        if !improve_round(a, Ctrl::Max, &mut pi, &val) {
            return (val, pi);
        }
    }
}

fn game_arena(g: &Game, eve: Ctrl, adam: Ctrl) -> Arena {
    Arena {
        lambda: g.lambda().clone(),
        succ: g
            .vertices()
            .map(|v| {
                g.successors(v)
                    .iter()
                    .map(|e| (e.to, Rational::from_integer(e.weight.into())))
                    .collect()
            })
            .collect(),
        ctrl: g
            .vertices()
            .map(|v| match g.owner(v) {
                Owner::Eve => eve,
                Owner::Adam => adam,
            })
            .collect(),
    }
}

/// Exact values and the canonical positional strategies derived from them.
#[derive(Debug, Clone)]
pub struct ValueTable {
    /// Antagonistic value: Eve maximizes, Adam minimizes.
    pub a_val: Vec<Rational>,
    /// Cooperative value: both maximize.
    pub c_val: Vec<Rational>,
    /// Best cooperative value achievable by a strongly worst-case optimal
    /// strategy of Eve.
    pub ac_val: Vec<Rational>,
    /// Eve, worst-case optimal (argmax of the antagonistic values).
    pub swo: Positional,
    /// Eve, best-case optimal (argmax of the cooperative values).
    pub sbo: Positional,
    /// Eve, strongly best worst-case optimal: cooperative argmax restricted
    /// to edges that stay antagonistically tight.
    pub sbwo: Positional,
    /// Adam's worst-case response (argmin of the antagonistic values).
    pub adam_worst: Positional,
    /// Adam's most cooperative response (argmax of the cooperative values).
    pub adam_best: Positional,
}

/// Picks, for every vertex owned by `owner`, the lowest-indexed successor in
/// `allowed` attaining the Bellman optimum of `vals`.
fn extract(
    g: &Game,
    owner: Owner,
    vals: &[Rational],
    maximize: bool,
    allowed: impl Fn(VertexId, VertexId) -> bool,
) -> Positional {
    let lambda = g.lambda();
    let mut choice = vec![None; g.vertex_count()];
    for v in g.vertices() {
        if g.owner(v) != owner {
            continue;
        }
        let mut best: Option<(Rational, VertexId)> = None;
        for e in g.successors(v) {
            if !allowed(v, e.to) {
                continue;
            }
            let cand = Rational::from_integer(e.weight.into()) + lambda * &vals[e.to];
            let take = match &best {
                None => true,
                Some((b, _)) => {
                    if maximize {
                        cand > *b
                    } else {
                        cand < *b
                    }
                }
            };
            if take {
                best = Some((cand, e.to));
            }
        }
        choice[v] = Some(best.expect("vertex has an allowed successor").1);
    }
    Positional::from_choices(g, owner, choice).expect("extracted strategy is valid")
}

/// Whether the edge `(v, to)` preserves the antagonistic value of `v`.
fn tight(g: &Game, a_val: &[Rational], v: VertexId, to: VertexId) -> bool {
    let w = g.weight(v, to).expect("edge exists");
    Rational::from_integer(w.into()) + g.lambda() * &a_val[to] == a_val[v]
}

/// Computes all three value vectors and the derived positional strategies.
pub fn solve_values(g: &Game) -> ValueTable {
    let (a_val, _) = solve(&game_arena(g, Ctrl::Max, Ctrl::Min));
    let (c_val, _) = solve(&game_arena(g, Ctrl::Max, Ctrl::Max));

    // The restricted game: Eve keeps only antagonistically tight edges, Adam
    // keeps everything; both maximize. Its cooperative value is exactly what
    // a strongly worst-case optimal strategy can still cooperate towards.
    let mut restricted = game_arena(g, Ctrl::Max, Ctrl::Max);
    for v in g.vertices() {
        if g.owner(v) == Owner::Eve {
            restricted.succ[v] = g
                .successors(v)
                .iter()
                .filter(|e| tight(g, &a_val, v, e.to))
                .map(|e| (e.to, Rational::from_integer(e.weight.into())))
                .collect();
            debug_assert!(!restricted.succ[v].is_empty());
        }
    }
    let (ac_val, _) = solve(&restricted);

    let swo = extract(g, Owner::Eve, &a_val, true, |_, _| true);
    let adam_worst = extract(g, Owner::Adam, &a_val, false, |_, _| true);
    let sbo = extract(g, Owner::Eve, &c_val, true, |_, _| true);
    let adam_best = extract(g, Owner::Adam, &c_val, true, |_, _| true);
    let sbwo = extract(g, Owner::Eve, &ac_val, true, |v, to| tight(g, &a_val, v, to));

    ValueTable { a_val, c_val, ac_val, swo, sbo, sbwo, adam_worst, adam_best }
}

/// Best cooperative value from `u` when the edge to `forbidden` is removed:
/// `max { w(u,v) + lambda * cVal(v) : (u,v) in E, v != forbidden }`.
/// `None` when no alternative edge exists.
pub fn restricted_cval(
    g: &Game,
    vt: &ValueTable,
    u: VertexId,
    forbidden: VertexId,
) -> Option<Rational> {
    g.successors(u)
        .iter()
        .filter(|e| e.to != forbidden)
        .map(|e| Rational::from_integer(e.weight.into()) + g.lambda() * &vt.c_val[e.to])
        .max()
}

/// The successors of `u` through which the cooperative value is attained,
/// in index order.
pub fn copt(g: &Game, vt: &ValueTable, u: VertexId) -> Vec<VertexId> {
    g.successors(u)
        .iter()
        .filter(|e| {
            Rational::from_integer(e.weight.into()) + g.lambda() * &vt.c_val[e.to]
                == vt.c_val[u]
        })
        .map(|e| e.to)
        .collect()
}

/// A lasso witnessing the cooperative value of `u`: both players follow
/// their cooperative argmax choices until the play closes a cycle.
pub fn cval_witness(g: &Game, vt: &ValueTable, u: VertexId) -> Lasso {
    let step = |v: VertexId| match g.owner(v) {
        Owner::Eve => vt.sbo.choice(v),
        Owner::Adam => vt.adam_best.choice(v),
    };
    let mut seen: Vec<Option<usize>> = vec![None; g.vertex_count()];
    let mut path = vec![u];
    let mut v = u;
    loop {
        if let Some(pos) = seen[v] {
            let alpha = History::new(g, path[..=pos].to_vec()).expect("stem is a path");
            let beta = History::new(g, path[pos..].to_vec()).expect("cycle is a path");
            return Lasso::new(g, alpha, beta).expect("witness is a lasso");
        }
        seen[v] = Some(path.len() - 1);
        v = step(v);
        path.push(v);
    }
}

/// Largest one-step Bellman residual of the three value vectors; exactly
/// zero on a correct table.
pub fn bellman_residual(g: &Game, vt: &ValueTable) -> Rational {
    let lambda = g.lambda();
    let edge_val = |vals: &[Rational], v: VertexId| -> Vec<Rational> {
        g.successors(v)
            .iter()
            .map(|e| Rational::from_integer(e.weight.into()) + lambda * &vals[e.to])
            .collect()
    };
    let mut worst = Rational::zero();
    let mut bump = |r: Rational| {
        let r = if r < Rational::zero() { -r } else { r };
        if r > worst {
            worst = r;
        }
    };
    for v in g.vertices() {
        let av = edge_val(&vt.a_val, v);
        let expected = match g.owner(v) {
            Owner::Eve => av.iter().max(),
            Owner::Adam => av.iter().min(),
        }
        .unwrap()
        .clone();
        bump(&vt.a_val[v] - expected);

        let cv = edge_val(&vt.c_val, v);
        bump(&vt.c_val[v] - cv.iter().max().unwrap().clone());

        let acv: Vec<Rational> = g
            .successors(v)
            .iter()
            .filter(|e| g.owner(v) == Owner::Adam || tight(g, &vt.a_val, v, e.to))
            .map(|e| Rational::from_integer(e.weight.into()) + lambda * &vt.ac_val[e.to])
            .collect();
        bump(&vt.ac_val[v] - acv.iter().max().unwrap().clone());
    }
    worst
}

//! The product of a game with a switching strategy: vertices are paired with
//! a step counter (saturated at the largest finite threshold) and a flag
//! recording whether the switch has happened.

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::Error;
use crate::game::{Game, Owner, VertexId};
use crate::rational::Rational;
use crate::strategy::SwitchingStrategy;
use crate::values::{solve, Arena, Ctrl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub counter: u64,
    pub vertex: VertexId,
    pub switched: bool,
}

/// The reachable part of the product automaton. States are numbered in
/// `(counter, vertex, switched)` order; Eve's states have exactly one
/// transition (the strategy's move), Adam's keep all edges.
#[derive(Debug, Clone)]
pub struct Product {
    pub states: Vec<ProductState>,
    index: HashMap<ProductState, usize>,
    /// Transitions with the weight of the underlying game edge.
    pub succ: Vec<Vec<(usize, i64)>>,
    pub initial: usize,
    pub t_sat: u64,
}

impl Product {
    pub fn state_index(&self, q: ProductState) -> Option<usize> {
        self.index.get(&q).copied()
    }
}

/// Saturation bound: one beyond it, arrival-time checks against any finite
/// threshold are constant, so counters collapse without changing behavior.
pub fn saturation(s: &SwitchingStrategy) -> u64 {
    s.thresholds.max_finite().unwrap_or(0)
}

/// Builds the reachable product of `g` with `s`.
pub fn build_product(g: &Game, s: &SwitchingStrategy) -> Result<Product, Error> {
    let t_sat = saturation(s);
    let bound = t_sat
        .checked_add(1)
        .and_then(|m| m.checked_mul(2))
        .and_then(|m| m.checked_mul(g.vertex_count() as u64));
    match bound {
        Some(states) if states <= 2_000_000 => {}
        _ => {
            return Err(Error::too_large(format!(
                "product would have up to 2 * {} * {} states",
                t_sat.saturating_add(1),
                g.vertex_count()
            )))
        }
    }

    let initial = ProductState {
        counter: 0,
        vertex: g.init(),
        switched: s.switched_at_start(g),
    };
    let mut order: Vec<ProductState> = vec![initial];
    let mut seen: HashMap<ProductState, ()> = HashMap::new();
    seen.insert(initial, ());
    let mut frontier = 0;
    while frontier < order.len() {
        let q = order[frontier];
        frontier += 1;
        for (to, _) in product_moves(g, s, t_sat, q) {
            if seen.insert(to, ()).is_none() {
                order.push(to);
            }
        }
    }

    let mut states = order;
    states.sort();
    let index: HashMap<ProductState, usize> =
        states.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let succ: Vec<Vec<(usize, i64)>> = states
        .iter()
        .map(|&q| {
            product_moves(g, s, t_sat, q)
                .into_iter()
                .map(|(to, w)| (index[&to], w))
                .collect()
        })
        .collect();
    let initial = index[&initial];
    Ok(Product { states, index, succ, initial, t_sat })
}

/// The transitions out of `q`, in target-vertex order.
fn product_moves(
    g: &Game,
    s: &SwitchingStrategy,
    t_sat: u64,
    q: ProductState,
) -> Vec<(ProductState, i64)> {
    let strut = |to: VertexId, w: i64| {
        // The raw arrival step is counter + 1; since every finite threshold
        // is at most t_sat, comparing against the saturated step is exact.
        let step = q.counter + 1;
        let switched = q.switched || s.thresholds.triggers(g, to, step);
        (ProductState { counter: step.min(t_sat), vertex: to, switched }, w)
    };
    match g.owner(q.vertex) {
        Owner::Eve => {
            let choice = if q.switched {
                s.sigma2.choice(q.vertex)
            } else {
                s.sigma1.choice(q.vertex)
            };
            let w = g.weight(q.vertex, choice).expect("strategy edge exists");
            vec![strut(choice, w)]
        }
        Owner::Adam => g
            .successors(q.vertex)
            .iter()
            .map(|e| strut(e.to, e.weight))
            .collect(),
    }
}

/// Values of the product when Eve is bound to the strategy and Adam plays
/// adversarially (`minimize`) or cooperatively (`!minimize`). Indexed by
/// product state.
///
/// Counters increase strictly until they saturate, so only the block of
/// saturated states can contain cycles; it is solved as a small game and the
/// remaining states resolve in one backward pass over the state order.
pub fn solve_fixed_eve(g: &Game, p: &Product, minimize: bool) -> Vec<Rational> {
    let n = p.states.len();
    let adam_ctrl = if minimize { Ctrl::Min } else { Ctrl::Max };
    let sat_start = p.states.partition_point(|q| q.counter < p.t_sat);

    let arena = Arena {
        lambda: g.lambda().clone(),
        succ: (sat_start..n)
            .map(|i| {
                p.succ[i]
                    .iter()
                    .map(|&(to, w)| {
                        debug_assert!(to >= sat_start, "saturated states stay saturated");
                        (to - sat_start, Rational::from_integer(w.into()))
                    })
                    .collect()
            })
            .collect(),
        ctrl: (sat_start..n)
            .map(|i| match g.owner(p.states[i].vertex) {
                Owner::Eve => Ctrl::Max, // single edge, direction irrelevant
                Owner::Adam => adam_ctrl,
            })
            .collect(),
    };
    let (sat_vals, _) = solve(&arena);

    let mut vals = vec![Rational::zero(); n];
    vals[sat_start..].clone_from_slice(&sat_vals);
    for i in (0..sat_start).rev() {
        let mut best: Option<Rational> = None;
        for &(to, w) in &p.succ[i] {
            debug_assert!(to > i, "counters order transient states topologically");
            let cand = Rational::from_integer(w.into()) + g.lambda() * &vals[to];
            let take = match (&best, g.owner(p.states[i].vertex)) {
                (None, _) => true,
                (Some(b), Owner::Eve) => cand > *b, // single edge, unreachable
                (Some(b), Owner::Adam) => {
                    if minimize {
                        cand < *b
                    } else {
                        cand > *b
                    }
                }
            };
            if take {
                best = Some(cand);
            }
        }
        vals[i] = best.expect("every vertex has a successor");
    }
    vals
}

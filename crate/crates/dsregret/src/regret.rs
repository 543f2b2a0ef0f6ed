//! Regret of switching strategies and synthesis of a minimal-regret one.
//!
//! The regret of a strategy is the worst gap, over the opponent's behaviors,
//! between the best value Eve could have secured with hindsight and the value
//! she actually gets. For switching strategies it is attained by deviating
//! once: the deciding data of a history is its class (current vertex, steps
//! taken saturated at the largest finite threshold, switch flag), and the
//! class contributes `lambda^n * (best value after deviating - value of
//! staying)`. Scanning classes up to `n = 2|V| + t_sat` covers every
//! reachable class at its earliest occurrence, which is where a positive
//! contribution is largest.

use std::collections::{BTreeSet, HashMap};

use num_traits::{Signed, Zero};

use crate::error::Error;
use crate::game::{Game, Owner, VertexId};
use crate::product::{build_product, solve_fixed_eve, ProductState};
use crate::rational::Rational;
use crate::strategy::{SwitchingStrategy, Threshold, Thresholds};
use crate::values::{restricted_cval, ValueTable};

/// A deviation achieving the regret: after some consistent history of
/// `length` edges ending at `vertex` with the given switch flag, Eve gains
/// the most by leaving the strategy through the edge to `deviation`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegretWitness {
    pub length: u64,
    pub vertex: VertexId,
    pub switched: bool,
    pub deviation: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegretReport {
    pub regret: Rational,
    /// Present when some deviation gains at least as much as staying; absent
    /// when every deviation strictly loses (regret zero by default).
    pub witness: Option<RegretWitness>,
}

/// All deviation terms with `n` up to `2|V| + t_sat`, in scan order: step by
/// step, then by class. Each entry carries the best deviation target.
pub fn deviation_terms(
    g: &Game,
    vt: &ValueTable,
    s: &SwitchingStrategy,
) -> Result<Vec<(u64, ProductState, VertexId, Rational)>, Error> {
    let p = build_product(g, s)?;
    let stay = solve_fixed_eve(g, &p, true);
    let cutoff = 2 * g.vertex_count() as u64 + p.t_sat;

    // The deviation value depends only on the vertex and the edge played.
    let mut dev_cache: HashMap<(VertexId, VertexId), (Rational, VertexId)> = HashMap::new();
    let mut deviation_at = |v: VertexId, action: VertexId| -> (Rational, VertexId) {
        dev_cache
            .entry((v, action))
            .or_insert_with(|| {
                let best = restricted_cval(g, vt, v, action).expect("vertex has another edge");
                let target = g
                    .successors(v)
                    .iter()
                    .filter(|e| e.to != action)
                    .find(|e| {
                        Rational::from_integer(e.weight.into()) + g.lambda() * &vt.c_val[e.to]
                            == best
                    })
                    .expect("optimum is attained on some edge")
                    .to;
                (best, target)
            })
            .clone()
    };

    let mut out = Vec::new();
    let mut layer: BTreeSet<usize> = BTreeSet::new();
    layer.insert(p.initial);
    let mut lam_pow = Rational::from_integer(1.into());
    for n in 0..=cutoff {
        for &qi in &layer {
            let q = p.states[qi];
            let v = q.vertex;
            if g.owner(v) != Owner::Eve || g.successors(v).len() < 2 {
                continue;
            }
            let action = if q.switched { s.sigma2.choice(v) } else { s.sigma1.choice(v) };
            let (best_other, target) = deviation_at(v, action);
            let term = &lam_pow * (best_other - &stay[qi]);
            out.push((n, q, target, term));
        }
        if n < cutoff {
            layer = layer
                .iter()
                .flat_map(|&qi| p.succ[qi].iter().map(|&(to, _)| to))
                .collect();
            lam_pow *= g.lambda();
        }
    }
    Ok(out)
}

/// Exact regret of a switching strategy, with a witnessing deviation. The
/// first term in scan order attaining the maximum wins.
pub fn regret_of(
    g: &Game,
    vt: &ValueTable,
    s: &SwitchingStrategy,
) -> Result<RegretReport, Error> {
    let terms = deviation_terms(g, vt, s)?;
    let mut best: Option<&(u64, ProductState, VertexId, Rational)> = None;
    for t in &terms {
        if best.is_none_or(|b| t.3 > b.3) {
            best = Some(t);
        }
    }
    Ok(match best {
        Some((n, q, target, r)) if !r.is_negative() => RegretReport {
            regret: r.clone(),
            witness: Some(RegretWitness {
                length: *n,
                vertex: q.vertex,
                switched: q.switched,
                deviation: *target,
            }),
        },
        _ => RegretReport { regret: Rational::zero(), witness: None },
    })
}

/// Switch thresholds induced by a regret budget: `t(v)` is the earliest step
/// `i` with `lambda^i * (cVal - aVal)(v) <= r`, searched up to `horizon`.
/// Entries not resolved within the horizon become infinite; the second
/// component tells whether all entries are exact (an unresolved entry is
/// exact only for `r = 0`, where no finite step ever suffices).
pub fn threshold_from_regret(
    g: &Game,
    vt: &ValueTable,
    r: &Rational,
    horizon: u64,
) -> (Thresholds, bool) {
    let mut exhausted = false;
    let mut map = HashMap::new();
    for v in g.eve_vertices() {
        let gap = &vt.c_val[v] - &vt.a_val[v];
        let th = if gap <= *r {
            Threshold::Finite(0)
        } else if r.is_zero() {
            Threshold::Infinite
        } else {
            let mut cur = gap;
            let mut found = None;
            for i in 1..=horizon {
                cur *= g.lambda();
                if cur <= *r {
                    found = Some(i);
                    break;
                }
            }
            match found {
                Some(i) => Threshold::Finite(i),
                None => {
                    exhausted = true;
                    Threshold::Infinite
                }
            }
        };
        map.insert(v, th);
    }
    let t = Thresholds::from_map(g, &map).expect("every Eve vertex got an entry");
    (t, !exhausted)
}

/// Result of the minimal-regret search.
#[derive(Debug, Clone)]
pub struct MinRegret {
    pub regret: Rational,
    pub strategy: SwitchingStrategy,
    pub horizon: u64,
    /// When `true`, `regret` is exactly minimal over all strategies; when
    /// `false`, the threshold search hit the horizon and `regret` is only an
    /// upper bound attained by `strategy`.
    pub horizon_sufficient: bool,
}

/// Minimal regret over all strategies, attained by switching from the
/// best-case optimal strategy to the strongly best worst-case optimal one.
///
/// The map from a regret budget to its thresholds is a step function that
/// only changes at the values `lambda^i * gap(v)`, so trying those budgets
/// (plus zero) covers every threshold family the map can produce. The final
/// thresholds are re-derived from the minimal regret itself.
pub fn min_regret(g: &Game, vt: &ValueTable, horizon: u64) -> Result<MinRegret, Error> {
    let eve_count = g.eve_vertices().count() as u64;
    let budget = horizon
        .checked_add(1)
        .and_then(|h| h.checked_mul(eve_count.max(1)));
    match budget {
        Some(b) if b <= 65_536 => {}
        _ => {
            return Err(Error::too_large(format!(
                "threshold search over horizon {horizon} is not tractable"
            )))
        }
    }

    let mut candidates: BTreeSet<Rational> = BTreeSet::new();
    candidates.insert(Rational::zero());
    for v in g.eve_vertices() {
        let gap = &vt.c_val[v] - &vt.a_val[v];
        if gap.is_positive() {
            let mut cur = gap;
            candidates.insert(cur.clone());
            for _ in 1..=horizon {
                cur *= g.lambda();
                candidates.insert(cur.clone());
            }
        }
    }

    let switching = |t: Thresholds| SwitchingStrategy {
        sigma1: vt.sbo.clone(),
        thresholds: t,
        sigma2: vt.sbwo.clone(),
    };

    let mut best: Option<(Rational, Thresholds)> = None;
    let mut prev: Option<Thresholds> = None;
    for b in candidates.iter().rev() {
        let (t, _) = threshold_from_regret(g, vt, b, horizon);
        if prev.as_ref() == Some(&t) {
            continue;
        }
        prev = Some(t.clone());
        let rep = regret_of(g, vt, &switching(t.clone()))?;
        let better = match &best {
            None => true,
            Some((br, bt)) => {
                rep.regret < *br || (rep.regret == *br && t.as_slice() < bt.as_slice())
            }
        };
        if better {
            best = Some((rep.regret, t));
        }
    }
    let (regret, fallback) = best.expect("the zero budget is always a candidate");

    // Prefer the thresholds induced by the minimal regret itself; fall back
    // to the best candidate when the horizon cut that derivation short.
    let (t_star, sufficient) = threshold_from_regret(g, vt, &regret, horizon);
    let star = switching(t_star);
    let rep_star = regret_of(g, vt, &star)?;
    debug_assert!(!sufficient || rep_star.regret == regret);
    let strategy = if rep_star.regret == regret { star } else { switching(fallback) };

    Ok(MinRegret { regret, strategy, horizon, horizon_sufficient: sufficient })
}

/// Search horizon derived from the description of the game, large enough
/// for the threshold search on desk-scale instances:
/// `4 |V| (bits(W) + bits(d))` with `W` the largest absolute weight and `d`
/// the denominator of the discount factor.
pub fn default_horizon(g: &Game) -> u64 {
    let bits = |x: u64| u64::from(64 - x.leading_zeros()).max(1);
    let w = g.max_abs_weight() as u64;
    let d = g.lambda().denom().bits().max(1);
    4 * g.vertex_count() as u64 * (bits(w) + d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimality {
    Optimal,
    Suboptimal,
    /// The horizon was too small to certify minimality or refute it.
    Inconclusive,
}

/// Compares the regret of `s` against the synthesized minimum. Exceeding the
/// found minimum is conclusive either way only when the horizon sufficed.
pub fn is_regret_optimal(
    g: &Game,
    vt: &ValueTable,
    s: &SwitchingStrategy,
    horizon: u64,
) -> Result<(Optimality, RegretReport, MinRegret), Error> {
    let rep = regret_of(g, vt, s)?;
    let mr = min_regret(g, vt, horizon)?;
    debug_assert!(!mr.horizon_sufficient || rep.regret >= mr.regret);
    let verdict = if rep.regret > mr.regret {
        Optimality::Suboptimal
    } else if mr.horizon_sufficient && rep.regret == mr.regret {
        Optimality::Optimal
    } else {
        Optimality::Inconclusive
    };
    Ok((verdict, rep, mr))
}

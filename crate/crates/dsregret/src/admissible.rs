//! Admissibility of strategies, admissible repair, and weak dominance.
//!
//! A strategy is admissible when no other strategy does at least as well
//! against every behavior of the opponent and strictly better against one.
//! For the strategies handled here this reduces to a local test over the
//! reachable states of the strategy automaton: at each of Eve's decision
//! points the strategy must either keep a cooperative outcome strictly above
//! the antagonistic value of the vertex (genuine hope), or pin the play to
//! the one value that no worst-case optimal strategy can beat (the strategy
//! values and both game values all agree).

use std::collections::{HashSet, VecDeque};

use crate::error::Error;
use crate::game::{Game, Owner, VertexId};
use crate::product::{build_product, solve_fixed_eve, ProductState};
use crate::rational::Rational;
use crate::strategy::{FiniteMemoryStrategy, SwitchingStrategy};
use crate::values::{solve, Arena, Ctrl, ValueTable};

/// Verdict for a switching strategy, with the offending class when
/// inadmissible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admissibility {
    Admissible,
    Dominated { vertex: VertexId, counter: u64, switched: bool },
}

/// Verdict for a finite-memory strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FmAdmissibility {
    Admissible,
    Dominated { vertex: VertexId, memory: usize },
}

/// Whether a decision point passes the admissibility test, given the
/// strategy's antagonistic and cooperative values there.
fn point_admissible(
    vt: &ValueTable,
    v: VertexId,
    worst: &Rational,
    best: &Rational,
) -> bool {
    best > &vt.a_val[v]
        || (worst == best && best == &vt.a_val[v] && vt.a_val[v] == vt.ac_val[v])
}

/// Checks a switching strategy for admissibility. States are scanned in
/// `(counter, vertex, switched)` order and the first failure is reported.
pub fn check_admissible(
    g: &Game,
    vt: &ValueTable,
    s: &SwitchingStrategy,
) -> Result<Admissibility, Error> {
    let p = build_product(g, s)?;
    let worst = solve_fixed_eve(g, &p, true);
    let best = solve_fixed_eve(g, &p, false);
    for (qi, q) in p.states.iter().enumerate() {
        if g.owner(q.vertex) != Owner::Eve {
            continue;
        }
        if !point_admissible(vt, q.vertex, &worst[qi], &best[qi]) {
            return Ok(Admissibility::Dominated {
                vertex: q.vertex,
                counter: q.counter,
                switched: q.switched,
            });
        }
    }
    Ok(Admissibility::Admissible)
}

/// The one-player arena induced by fixing Eve to a finite-memory strategy;
/// states are `memory * |V| + vertex`, Adam's states get `adam_ctrl`.
fn fm_arena(g: &Game, fm: &FiniteMemoryStrategy, adam_ctrl: Ctrl) -> Arena {
    let nv = g.vertex_count();
    let mut succ = Vec::with_capacity(fm.memory_count() * nv);
    let mut ctrl = Vec::with_capacity(fm.memory_count() * nv);
    for m in 0..fm.memory_count() {
        for v in g.vertices() {
            let edges: Vec<(usize, Rational)> = match g.owner(v) {
                Owner::Eve => {
                    let to = fm.action(m, v).expect("action is total on Eve's vertices");
                    let w = g.weight(v, to).expect("action is an edge");
                    vec![(fm.update(m, to) * nv + to, Rational::from_integer(w.into()))]
                }
                Owner::Adam => g
                    .successors(v)
                    .iter()
                    .map(|e| {
                        (fm.update(m, e.to) * nv + e.to, Rational::from_integer(e.weight.into()))
                    })
                    .collect(),
            };
            succ.push(edges);
            ctrl.push(match g.owner(v) {
                Owner::Eve => Ctrl::Max,
                Owner::Adam => adam_ctrl,
            });
        }
    }
    Arena { lambda: g.lambda().clone(), succ, ctrl }
}

fn fm_state_guard(g: &Game, states: usize) -> Result<(), Error> {
    if states > 2_000_000 {
        return Err(Error::too_large(format!(
            "strategy automaton over '{}' vertices has {states} states",
            g.vertex_count()
        )));
    }
    Ok(())
}

/// The `(memory, vertex)` pairs reachable from the initial configuration,
/// as a sorted list of arena indices.
fn fm_reachable(g: &Game, fm: &FiniteMemoryStrategy) -> Vec<usize> {
    let nv = g.vertex_count();
    let start = fm.initial() * nv + g.init();
    let mut seen: HashSet<usize> = HashSet::new();
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        let (m, v) = (i / nv, i % nv);
        let targets: Vec<VertexId> = match g.owner(v) {
            Owner::Eve => vec![fm.action(m, v).expect("action is total")],
            Owner::Adam => g.successors(v).iter().map(|e| e.to).collect(),
        };
        for to in targets {
            let j = fm.update(m, to) * nv + to;
            if seen.insert(j) {
                queue.push_back(j);
            }
        }
    }
    let mut out: Vec<usize> = seen.into_iter().collect();
    out.sort_unstable();
    out
}

/// Checks a finite-memory strategy for admissibility over its reachable
/// configurations, scanned in `(memory, vertex)` order.
pub fn check_admissible_fm(
    g: &Game,
    vt: &ValueTable,
    fm: &FiniteMemoryStrategy,
) -> Result<FmAdmissibility, Error> {
    let nv = g.vertex_count();
    fm_state_guard(g, fm.memory_count().saturating_mul(nv))?;
    let worst = solve(&fm_arena(g, fm, Ctrl::Min)).0;
    let best = solve(&fm_arena(g, fm, Ctrl::Max)).0;
    for i in fm_reachable(g, fm) {
        let (m, v) = (i / nv, i % nv);
        if g.owner(v) != Owner::Eve {
            continue;
        }
        if !point_admissible(vt, v, &worst[i], &best[i]) {
            return Ok(FmAdmissibility::Dominated { vertex: v, memory: m });
        }
    }
    Ok(FmAdmissibility::Admissible)
}

/// Repairs a switching strategy into an admissible finite-memory strategy
/// that weakly dominates it.
///
/// A class is deemed hopeless when the strategy's value range there sits at
/// or below the antagonistic value while something strictly better remains
/// available (`worst <= best <= aVal <= acVal` with `worst < acVal`; the
/// outer inequalities always hold, so the test is `best <= aVal` and
/// `worst < acVal`). The repair keeps the original behavior but jumps to the
/// strongly best worst-case optimal strategy the moment the play would enter
/// a hopeless class.
pub fn admissibilize(
    g: &Game,
    vt: &ValueTable,
    s: &SwitchingStrategy,
) -> Result<FiniteMemoryStrategy, Error> {
    let p = build_product(g, s)?;
    let worst = solve_fixed_eve(g, &p, true);
    let best = solve_fixed_eve(g, &p, false);
    let hopeless: Vec<bool> = p
        .states
        .iter()
        .enumerate()
        .map(|(qi, q)| {
            best[qi] <= vt.a_val[q.vertex] && worst[qi] < vt.ac_val[q.vertex]
        })
        .collect();

    let nv = g.vertex_count();
    let t_sat = p.t_sat;
    let base = usize::try_from(t_sat)
        .ok()
        .and_then(|t| t.checked_add(1))
        .and_then(|t| t.checked_mul(2))
        .ok_or_else(|| Error::too_large("threshold counter does not fit memory".to_string()))?;
    fm_state_guard(g, base.saturating_add(1).saturating_mul(nv))?;
    let idx = |c: u64, f: bool| (c * 2 + f as u64) as usize;
    let repair = base; // absorbing memory running the replacement strategy

    let mut labels = Vec::with_capacity(base + 1);
    let mut update = Vec::with_capacity(base + 1);
    let mut action = Vec::with_capacity(base + 1);
    for c in 0..=t_sat {
        for f in [false, true] {
            labels.push(format!("c{}{}", c, if f { "s" } else { "u" }));
            let mut urow = Vec::with_capacity(nv);
            let mut arow = Vec::with_capacity(nv);
            for v in g.vertices() {
                let step = c + 1;
                let f2 = f || s.thresholds.triggers(g, v, step);
                let c2 = step.min(t_sat);
                let entered = ProductState { counter: c2, vertex: v, switched: f2 };
                let jump = p.state_index(entered).is_some_and(|qi| hopeless[qi]);
                urow.push(if jump { repair } else { idx(c2, f2) });
                arow.push(match g.owner(v) {
                    Owner::Eve => {
                        Some(if f { s.sigma2.choice(v) } else { s.sigma1.choice(v) })
                    }
                    Owner::Adam => None,
                });
            }
            update.push(urow);
            action.push(arow);
        }
    }
    labels.push("sbwo".to_string());
    update.push(vec![repair; nv]);
    action.push(
        g.vertices()
            .map(|v| match g.owner(v) {
                Owner::Eve => Some(vt.sbwo.choice(v)),
                Owner::Adam => None,
            })
            .collect(),
    );

    let initial = if hopeless[p.initial] {
        repair
    } else {
        idx(p.states[p.initial].counter, p.states[p.initial].switched)
    };
    FiniteMemoryStrategy::new(g, labels, initial, update, action)
}

/// Whether `a` is at least as good as `b` against every behavior of Adam.
///
/// While the two strategies agree the plays coincide; at a reachable point
/// of divergence Adam continues independently in the two scenarios, so `a`
/// stays at least as good exactly when its guaranteed value there is at
/// least everything `b` could still cooperate towards.
pub fn weakly_dominates(
    g: &Game,
    a: &FiniteMemoryStrategy,
    b: &FiniteMemoryStrategy,
) -> Result<bool, Error> {
    let nv = g.vertex_count();
    let pairs = a
        .memory_count()
        .checked_mul(b.memory_count())
        .and_then(|x| x.checked_mul(nv));
    match pairs {
        Some(n) => fm_state_guard(g, n)?,
        None => return Err(Error::too_large("strategy pair state space overflows".to_string())),
    }

    let a_worst = solve(&fm_arena(g, a, Ctrl::Min)).0;
    let b_best = solve(&fm_arena(g, b, Ctrl::Max)).0;

    let start = (g.init(), a.initial(), b.initial());
    let mut seen: HashSet<(VertexId, usize, usize)> = HashSet::new();
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    while let Some((v, ma, mb)) = queue.pop_front() {
        let advance = |to: VertexId, seen: &mut HashSet<_>, queue: &mut VecDeque<_>| {
            let next = (to, a.update(ma, to), b.update(mb, to));
            if seen.insert(next) {
                queue.push_back(next);
            }
        };
        match g.owner(v) {
            Owner::Eve => {
                let ea = a.action(ma, v).expect("action is total");
                let eb = b.action(mb, v).expect("action is total");
                if ea == eb {
                    advance(ea, &mut seen, &mut queue);
                } else if a_worst[ma * nv + v] < b_best[mb * nv + v] {
                    return Ok(false);
                }
            }
            Owner::Adam => {
                for e in g.successors(v) {
                    advance(e.to, &mut seen, &mut queue);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::values::solve_values;

    fn fixture(name: &str) -> String {
        let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        std::fs::read_to_string(path).unwrap()
    }

    fn game(name: &str) -> Game {
        Game::parse(&fixture(name)).unwrap()
    }

    fn strat(g: &Game, name: &str) -> SwitchingStrategy {
        SwitchingStrategy::parse(g, &fixture(name)).unwrap()
    }

    #[test]
    fn doubling_down_on_ga_is_dominated_at_the_trap() {
        let g = game("GA.game");
        let vt = solve_values(&g);
        let verdict = check_admissible(&g, &vt, &strat(&g, "GA-double.strat")).unwrap();
        assert_eq!(
            verdict,
            Admissibility::Dominated {
                vertex: g.vertex("v2").unwrap(),
                counter: 0,
                switched: true,
            }
        );
    }

    #[test]
    fn both_positional_choices_on_gb_are_admissible() {
        let g = game("GB.game");
        let vt = solve_values(&g);
        for name in ["GB-v1.strat", "GB-v2.strat"] {
            let verdict = check_admissible(&g, &vt, &strat(&g, name)).unwrap();
            assert_eq!(verdict, Admissibility::Admissible, "{name}");
        }
    }

    #[test]
    fn finite_memory_check_agrees_on_the_unfolding() {
        let g = game("GA.game");
        let vt = solve_values(&g);
        let s = strat(&g, "GA-double.strat");
        let fm = FiniteMemoryStrategy::from_switching(&g, &s).unwrap();
        match check_admissible_fm(&g, &vt, &fm).unwrap() {
            FmAdmissibility::Dominated { vertex, memory } => {
                assert_eq!(vertex, g.vertex("v2").unwrap());
                assert_eq!(fm.label(memory), "c0s");
            }
            other => panic!("expected a dominated state, got {other:?}"),
        }

        let g = game("GB.game");
        let vt = solve_values(&g);
        let fm =
            FiniteMemoryStrategy::from_switching(&g, &strat(&g, "GB-v1.strat")).unwrap();
        assert_eq!(check_admissible_fm(&g, &vt, &fm).unwrap(), FmAdmissibility::Admissible);
    }

    #[test]
    fn repair_of_the_ga_trap_is_admissible_and_dominates() {
        let g = game("GA.game");
        let vt = solve_values(&g);
        let s = strat(&g, "GA-double.strat");
        let original = FiniteMemoryStrategy::from_switching(&g, &s).unwrap();
        let repaired = admissibilize(&g, &vt, &s).unwrap();

        assert_eq!(repaired.memory_count(), 3);
        assert_eq!(repaired.label(repaired.initial()), "c0u");
        assert_eq!(
            check_admissible_fm(&g, &vt, &repaired).unwrap(),
            FmAdmissibility::Admissible
        );
        assert!(weakly_dominates(&g, &repaired, &original).unwrap());
        assert!(!weakly_dominates(&g, &original, &repaired).unwrap());

        // the repair reroutes the trap vertex to the value-preserving loop
        let v2 = g.vertex("v2").unwrap();
        let m = repaired.update(repaired.initial(), v2);
        assert_eq!(repaired.label(m), "sbwo");
        assert_eq!(repaired.action(m, v2), Some(g.vertex("v2p").unwrap()));
    }

    #[test]
    fn repair_of_an_admissible_strategy_changes_nothing() {
        let g = game("GB.game");
        let vt = solve_values(&g);
        let s = strat(&g, "GB-v1.strat");
        let original = FiniteMemoryStrategy::from_switching(&g, &s).unwrap();
        let repaired = admissibilize(&g, &vt, &s).unwrap();
        assert!(weakly_dominates(&g, &repaired, &original).unwrap());
        assert!(weakly_dominates(&g, &original, &repaired).unwrap());
    }

    #[test]
    fn weak_dominance_is_reflexive_and_orders_the_gb_choices() {
        let g = game("GB.game");
        let v1 = FiniteMemoryStrategy::from_switching(&g, &strat(&g, "GB-v1.strat")).unwrap();
        let v2 = FiniteMemoryStrategy::from_switching(&g, &strat(&g, "GB-v2.strat")).unwrap();
        assert!(weakly_dominates(&g, &v1, &v1).unwrap());
        assert!(weakly_dominates(&g, &v2, &v2).unwrap());
        // v1 hopes for 10 but can fall to 5/2; v2 guarantees 3 and tops at 5:
        // neither covers the other against every behavior
        assert!(!weakly_dominates(&g, &v1, &v2).unwrap());
        assert!(!weakly_dominates(&g, &v2, &v1).unwrap());
    }
}

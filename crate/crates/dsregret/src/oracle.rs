//! Brute-force reference computations for small games. Game values come
//! from enumerating both players' positional strategies outright and
//! evaluating the resulting plays directly; the regret of a switching
//! strategy comes from a plain step-by-step unfolding. The only shared
//! machinery is the exact game solver applied to the saturated tail of the
//! unfolding, where time no longer matters and no finite evaluation exists.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::game::{Game, Owner, VertexId};
use crate::rational::{pow, Rational};
use crate::strategy::{Positional, SwitchingStrategy, Threshold, Thresholds};
use crate::values::{solve, Arena, Ctrl};

#[derive(Debug, Clone)]
pub struct OracleValues {
    pub a_val: Vec<Rational>,
    pub c_val: Vec<Rational>,
    pub ac_val: Vec<Rational>,
}

/// Odometer over one player's move choices, one digit per owned vertex.
struct Profiles<'g> {
    g: &'g Game,
    vertices: Vec<VertexId>,
    digits: Vec<usize>,
    fresh: bool,
}

impl<'g> Profiles<'g> {
    fn new(g: &'g Game, owner: Owner) -> Profiles<'g> {
        let vertices: Vec<VertexId> = g.vertices().filter(|&v| g.owner(v) == owner).collect();
        let digits = vec![0; vertices.len()];
        Profiles { g, vertices, digits, fresh: true }
    }

    /// Writes the next profile into `choice` (touching only owned vertices)
    /// and returns `false` once every profile has been produced.
    fn next_into(&mut self, choice: &mut [VertexId]) -> bool {
        if !self.fresh {
            let mut k = 0;
            loop {
                if k == self.vertices.len() {
                    return false;
                }
                self.digits[k] += 1;
                if self.digits[k] < self.g.successors(self.vertices[k]).len() {
                    break;
                }
                self.digits[k] = 0;
                k += 1;
            }
        }
        self.fresh = false;
        for (k, &v) in self.vertices.iter().enumerate() {
            choice[v] = self.g.successors(v)[self.digits[k]].to;
        }
        true
    }
}

/// Value of the single play that both fixed profiles produce from `start`:
/// walk into the inevitable cycle and sum the two pieces.
fn play_value(g: &Game, choice: &[VertexId], start: VertexId) -> Rational {
    let lambda = g.lambda();
    let mut seen: Vec<Option<usize>> = vec![None; g.vertex_count()];
    let mut path = vec![start];
    let mut v = start;
    while seen[v].is_none() {
        seen[v] = Some(path.len() - 1);
        v = choice[v];
        path.push(v);
    }
    let split = seen[v].unwrap();

    let weight_at = |i: usize| {
        Rational::from_integer(g.weight(path[i], path[i + 1]).expect("edge exists").into())
    };
    let mut prefix = Rational::zero();
    let mut lam = Rational::one();
    for i in 0..split {
        prefix += &lam * weight_at(i);
        lam *= lambda;
    }
    let mut cycle = Rational::zero();
    let mut lam_c = Rational::one();
    for i in split..path.len() - 1 {
        cycle += &lam_c * weight_at(i);
        lam_c *= lambda;
    }
    let cycle_len = (path.len() - 1 - split) as u64;
    prefix + lam * cycle / (Rational::one() - pow(lambda, cycle_len))
}

fn enumeration_guard(g: &Game, combos: u128, what: &str) -> Result<(), Error> {
    if combos > 1_000_000 {
        return Err(Error::too_large(format!(
            "enumerating {what} over '{}' vertices needs {combos} combinations",
            g.vertex_count()
        )));
    }
    Ok(())
}

/// Runs `visit` once per positional strategy of Eve, with that strategy's
/// pointwise worst-case and best-case response values.
fn sweep_eve_profiles(g: &Game, mut visit: impl FnMut(&[Rational], &[Rational])) {
    let nv = g.vertex_count();
    let mut choice: Vec<VertexId> = vec![0; nv];
    let mut eve = Profiles::new(g, Owner::Eve);
    while eve.next_into(&mut choice) {
        let mut worst: Vec<Option<Rational>> = vec![None; nv];
        let mut best: Vec<Option<Rational>> = vec![None; nv];
        let mut adam = Profiles::new(g, Owner::Adam);
        while adam.next_into(&mut choice) {
            for u in g.vertices() {
                let val = play_value(g, &choice, u);
                match &mut worst[u] {
                    Some(w) => {
                        if val < *w {
                            *w = val.clone();
                        }
                    }
                    None => worst[u] = Some(val.clone()),
                }
                match &mut best[u] {
                    Some(b) => {
                        if val > *b {
                            *b = val;
                        }
                    }
                    None => best[u] = Some(val),
                }
            }
        }
        let worst: Vec<Rational> = worst.into_iter().map(|o| o.unwrap()).collect();
        let best: Vec<Rational> = best.into_iter().map(|o| o.unwrap()).collect();
        visit(&worst, &best);
    }
}

/// Game values by strategy enumeration. The antagonistic and cooperative
/// values are pointwise optima over Eve's positional strategies; the third
/// vector is the best cooperative outcome among the strategies whose
/// worst-case values are optimal at every vertex.
pub fn oracle_values(g: &Game) -> Result<OracleValues, Error> {
    let mut combos: u128 = 1;
    for v in g.vertices() {
        combos = combos.saturating_mul(g.successors(v).len() as u128);
    }
    enumeration_guard(g, combos, "both players' strategies")?;

    let pointwise_max = |acc: &mut Option<Vec<Rational>>, xs: &[Rational]| match acc {
        Some(cur) => {
            for (c, x) in cur.iter_mut().zip(xs) {
                if x > c {
                    *c = x.clone();
                }
            }
        }
        None => *acc = Some(xs.to_vec()),
    };

    let mut a_val: Option<Vec<Rational>> = None;
    let mut c_val: Option<Vec<Rational>> = None;
    sweep_eve_profiles(g, |worst, best| {
        pointwise_max(&mut a_val, worst);
        pointwise_max(&mut c_val, best);
    });
    let a_val = a_val.expect("at least one strategy profile");
    let c_val = c_val.expect("at least one strategy profile");

    let mut ac_val: Option<Vec<Rational>> = None;
    sweep_eve_profiles(g, |worst, best| {
        if worst == &a_val[..] {
            pointwise_max(&mut ac_val, best);
        }
    });
    let ac_val = ac_val.expect("some strategy is worst-case optimal everywhere");

    Ok(OracleValues { a_val, c_val, ac_val })
}

/// Worst-case value of following `s` from `(vertex, switched)` once the step
/// count exceeds every finite threshold, indexed by `vertex * 2 + switched`.
fn saturated_tail(g: &Game, s: &SwitchingStrategy, t_sat: u64) -> Vec<Rational> {
    let step = t_sat.saturating_add(1);
    let idx = |v: VertexId, f: bool| v * 2 + f as usize;
    let mut succ = Vec::with_capacity(g.vertex_count() * 2);
    let mut ctrl = Vec::with_capacity(g.vertex_count() * 2);
    for v in g.vertices() {
        for f in [false, true] {
            let targets: Vec<VertexId> = match g.owner(v) {
                Owner::Eve => vec![if f { s.sigma2.choice(v) } else { s.sigma1.choice(v) }],
                Owner::Adam => g.successors(v).iter().map(|e| e.to).collect(),
            };
            succ.push(
                targets
                    .into_iter()
                    .map(|to| {
                        let w = g.weight(v, to).expect("edge exists");
                        let f2 = f || s.thresholds.triggers(g, to, step);
                        (idx(to, f2), Rational::from_integer(w.into()))
                    })
                    .collect::<Vec<_>>(),
            );
            ctrl.push(match g.owner(v) {
                Owner::Eve => Ctrl::Max,
                Owner::Adam => Ctrl::Min,
            });
        }
    }
    solve(&Arena { lambda: g.lambda().clone(), succ, ctrl }).0
}

fn oracle_regret_with(
    g: &Game,
    s: &SwitchingStrategy,
    cap: u64,
    c_or: &[Rational],
) -> Result<Rational, Error> {
    let t_sat = s.thresholds.max_finite().unwrap_or(0);
    let cells = t_sat
        .checked_add(1)
        .and_then(|m| m.checked_mul(2))
        .and_then(|m| m.checked_mul(g.vertex_count() as u64));
    match cells {
        Some(n) if n <= 2_000_000 => {}
        _ => {
            return Err(Error::too_large(format!(
                "unfolding with largest threshold {t_sat} is not tractable"
            )))
        }
    }

    let idx = |v: VertexId, f: bool| v * 2 + f as usize;
    let d = g.vertex_count() * 2;
    let act = |v: VertexId, f: bool| if f { s.sigma2.choice(v) } else { s.sigma1.choice(v) };

    // Value of staying with the strategy at (v, n steps, switched): computed
    // backwards from the saturated tail, one dense layer per step below the
    // largest threshold.
    let tail = saturated_tail(g, s, t_sat);
    let mut stay_layers: Vec<Vec<Rational>> = Vec::new(); // built top down
    let mut above = tail.clone();
    for n in (0..t_sat).rev() {
        let mut cur = vec![Rational::zero(); d];
        for v in g.vertices() {
            for f in [false, true] {
                let step = n + 1;
                let eval = |to: VertexId| {
                    let w = g.weight(v, to).expect("edge exists");
                    let f2 = f || s.thresholds.triggers(g, to, step);
                    Rational::from_integer(w.into()) + g.lambda() * &above[idx(to, f2)]
                };
                cur[idx(v, f)] = match g.owner(v) {
                    Owner::Eve => eval(act(v, f)),
                    Owner::Adam => {
                        g.successors(v).iter().map(|e| eval(e.to)).min().unwrap()
                    }
                };
            }
        }
        above = cur.clone();
        stay_layers.push(cur);
    }
    stay_layers.reverse(); // stay_layers[n] now holds step n < t_sat
    let stay = |v: VertexId, n: u64, f: bool| -> &Rational {
        if n >= t_sat {
            &tail[idx(v, f)]
        } else {
            &stay_layers[n as usize][idx(v, f)]
        }
    };

    // Walk the exact-step classes and take the best deviation term.
    let mut layer: BTreeSet<(VertexId, bool)> = BTreeSet::new();
    layer.insert((g.init(), s.switched_at_start(g)));
    let mut best: Option<Rational> = None;
    let mut lam = Rational::one();
    for n in 0..=cap {
        for &(v, f) in &layer {
            if g.owner(v) != Owner::Eve || g.successors(v).len() < 2 {
                continue;
            }
            let action = act(v, f);
            let c_not = g
                .successors(v)
                .iter()
                .filter(|e| e.to != action)
                .map(|e| Rational::from_integer(e.weight.into()) + g.lambda() * &c_or[e.to])
                .max()
                .unwrap();
            let term = &lam * (c_not - stay(v, n, f));
            if best.as_ref().is_none_or(|b| term > *b) {
                best = Some(term);
            }
        }
        if n < cap {
            layer = layer
                .iter()
                .flat_map(|&(v, f)| {
                    let targets: Vec<VertexId> = match g.owner(v) {
                        Owner::Eve => vec![act(v, f)],
                        Owner::Adam => g.successors(v).iter().map(|e| e.to).collect(),
                    };
                    targets
                        .into_iter()
                        .map(move |to| (to, f || s.thresholds.triggers(g, to, n + 1)))
                })
                .collect();
            lam *= g.lambda();
        }
    }
    Ok(match best {
        Some(b) if b.is_positive() => b,
        _ => Rational::zero(),
    })
}

/// Regret of a switching strategy by direct unfolding up to `cap` steps
/// (take `cap = 2|V| + t_sat` to cover every class at its first occurrence).
pub fn oracle_regret_of(g: &Game, s: &SwitchingStrategy, cap: u64) -> Result<Rational, Error> {
    let c_or = oracle_values(g)?.c_val;
    oracle_regret_with(g, s, cap, &c_or)
}

/// Minimal regret over every switching strategy whose thresholds are either
/// at most `max_threshold` or infinite, by plain enumeration.
pub fn oracle_min_regret(g: &Game, max_threshold: u64) -> Result<Rational, Error> {
    let eve: Vec<VertexId> = g.eve_vertices().collect();
    let mut combos: u128 = 1;
    for &v in &eve {
        let deg = g.successors(v).len() as u128;
        combos = combos.saturating_mul(deg).saturating_mul(deg);
    }
    combos = combos.saturating_mul((max_threshold as u128 + 2).saturating_pow(eve.len() as u32));
    enumeration_guard(g, combos, "switching strategies")?;

    let c_or = oracle_values(g)?.c_val;
    let cap = 2 * g.vertex_count() as u64 + max_threshold;
    let nv = g.vertex_count();

    let positional_of = |choice: &[VertexId]| {
        let picks: Vec<Option<VertexId>> = g
            .vertices()
            .map(|v| (g.owner(v) == Owner::Eve).then(|| choice[v]))
            .collect();
        Positional::from_choices(g, Owner::Eve, picks).expect("profile edges exist")
    };

    let mut best: Option<Rational> = None;
    let mut c1: Vec<VertexId> = vec![0; nv];
    let mut p1 = Profiles::new(g, Owner::Eve);
    while p1.next_into(&mut c1) {
        let sigma1 = positional_of(&c1);
        let mut c2: Vec<VertexId> = vec![0; nv];
        let mut p2 = Profiles::new(g, Owner::Eve);
        while p2.next_into(&mut c2) {
            let sigma2 = positional_of(&c2);
            let mut tdig: Vec<u64> = vec![0; eve.len()];
            loop {
                let map: HashMap<VertexId, Threshold> = eve
                    .iter()
                    .zip(&tdig)
                    .map(|(&v, &dg)| {
                        let th = if dg > max_threshold {
                            Threshold::Infinite
                        } else {
                            Threshold::Finite(dg)
                        };
                        (v, th)
                    })
                    .collect();
                let s = SwitchingStrategy {
                    sigma1: sigma1.clone(),
                    thresholds: Thresholds::from_map(g, &map).expect("all Eve vertices"),
                    sigma2: sigma2.clone(),
                };
                let r = oracle_regret_with(g, &s, cap, &c_or)?;
                if best.as_ref().is_none_or(|b| r < *b) {
                    best = Some(r);
                }

                let mut k = 0;
                loop {
                    if k == tdig.len() {
                        break;
                    }
                    tdig[k] += 1;
                    if tdig[k] <= max_threshold + 1 {
                        break;
                    }
                    tdig[k] = 0;
                    k += 1;
                }
                if k == tdig.len() {
                    break;
                }
            }
        }
    }
    Ok(best.expect("family is nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

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
    fn enumerated_values_on_gb() {
        let g = game("GB.game");
        let ov = oracle_values(&g).unwrap();
        let at = |names: [i64; 6]| names.map(int).to_vec();
        assert_eq!(ov.a_val, at([3, 5, 6, 20, 10, 12]));
        assert_eq!(ov.c_val, at([5, 10, 6, 20, 10, 12]));
        assert_eq!(ov.ac_val, at([3, 10, 6, 20, 10, 12]));
    }

    #[test]
    fn enumerated_values_on_ga() {
        let g = game("GA.game");
        let ov = oracle_values(&g).unwrap();
        assert_eq!(ov.a_val, [0, 0, 0, 0, 1, 2, 4, 0].map(int).to_vec());
        assert_eq!(ov.c_val, [1, 2, 4, 4, 1, 2, 4, 0].map(int).to_vec());
        assert_eq!(ov.ac_val, ov.c_val);
    }

    #[test]
    fn unfolded_regret_matches_hand_computation() {
        let g = game("GB.game");
        let cap = 2 * g.vertex_count() as u64;
        assert_eq!(oracle_regret_of(&g, &strat(&g, "GB-v2.strat"), cap).unwrap(), int(2));
        assert_eq!(
            oracle_regret_of(&g, &strat(&g, "GB-v1.strat"), cap).unwrap(),
            rat(1, 2)
        );

        let g = game("GA.game");
        let cap = 2 * g.vertex_count() as u64;
        assert_eq!(
            oracle_regret_of(&g, &strat(&g, "GA-double.strat"), cap).unwrap(),
            int(1)
        );
    }

    #[test]
    fn enumerated_minimal_regret() {
        let g = game("GB.game");
        assert_eq!(oracle_min_regret(&g, 2).unwrap(), rat(1, 2));
        let g = game("GA.game");
        assert_eq!(oracle_min_regret(&g, 1).unwrap(), int(1));
    }

    #[test]
    fn enumeration_guards() {
        let g = game("GB.game");
        assert!(matches!(oracle_min_regret(&g, 1_000), Err(Error::TooLarge(_))));
    }
}

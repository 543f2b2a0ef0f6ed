//! Properties of the history machinery: cycle replacement, compression,
//! symbolic evaluation of pumped paths, and the existence check for
//! consistent histories, each validated against direct enumeration.

mod common;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::Zero;
use proptest::prelude::*;

use dsregret::game::{Game, Owner, VertexId};
use dsregret::history::History;
use dsregret::pumping::{
    compress_history, history_exists, replace_cycle, val_history, val_pumped, DiscountPoly, Pump,
    PumpedPath,
};
use dsregret::rational::{int, rat, Rational};

/// Finds `i < j <= k < l` with `h[i] == h[j]`, `h[k] == h[l]` and
/// `j - i == l - k`: two equal-length cycles around a connecting path.
fn equal_cycle_split(h: &[VertexId]) -> Option<(usize, usize, usize, usize)> {
    let n = h.len();
    let mut first = None;
    'outer: for j in 1..n {
        for i in 0..j {
            if h[i] == h[j] {
                first = Some((i, j));
                break 'outer;
            }
        }
    }
    let (i, j) = first?;
    let len = j - i;
    for k in j..n {
        let l = k + len;
        if l < n && h[k] == h[l] {
            return Some((i, j, k, l));
        }
    }
    None
}

fn slice(g: &Game, h: &History, from: usize, to: usize) -> History {
    History::new(g, h.vertices()[from..=to].to_vec()).unwrap()
}

#[test]
fn cycle_replacement_preserves_shape_and_never_gains() {
    let mut rng = common::rng(0x9017_0001);
    let mut replaced = 0;
    for _ in 0..200 {
        let g = common::random_game(&mut rng);
        let h = common::random_history(&g, &mut rng, g.init(), 24);
        let Some((i, j, k, l)) = equal_cycle_split(h.vertices()) else { continue };
        replaced += 1;
        let alpha = slice(&g, &h, i, j);
        let beta = slice(&g, &h, j, k);
        let gamma = slice(&g, &h, k, l);
        let original = alpha.concat(&beta).unwrap().concat(&gamma).unwrap();
        let out = replace_cycle(&g, &alpha, &beta, &gamma).unwrap();
        assert_eq!(out.len(), original.len());
        assert_eq!(out.first(), original.first());
        assert_eq!(out.last(), original.last());
        assert!(val_history(&g, &out) <= val_history(&g, &original));
    }
    assert!(replaced >= 150, "only {replaced} of 200 walks had equal cycles");
}

#[test]
fn compression_postconditions_hold_on_random_walks() {
    let mut rng = common::rng(0x9017_0002);
    for round in 0..200 {
        let g = common::random_game(&mut rng);
        let edges = 5 + (round % 76);
        let h = common::random_history(&g, &mut rng, g.init(), edges);
        let p = compress_history(&g, &h);

        assert_eq!(p.edge_len(), BigUint::from(h.len()));
        assert_eq!(p.alpha.first(), h.first());
        let end = p.gamma.last();
        assert_eq!(end, h.last());

        let nv = g.vertex_count();
        let mut skeleton = p.alpha.len() + p.gamma.len();
        if let Some(pump) = &p.pump {
            assert!(pump.beta.is_cycle());
            assert!(pump.beta.is_simple());
            assert!(!pump.k.is_zero());
            skeleton += pump.beta.len();
        }
        assert!(skeleton <= 4 * nv * nv * nv, "skeleton {skeleton} too long");

        let out = val_pumped(&g, &p)
            .unwrap()
            .to_rational(g.lambda())
            .expect("small enough to materialize");
        assert!(out <= val_history(&g, &h));
    }
}

#[test]
fn pumped_paths_evaluate_like_their_unrollings() {
    let mut rng = common::rng(0x9017_0003);
    let mut built = 0;
    for _ in 0..150 {
        let g = common::random_game(&mut rng);
        let walk = common::random_history(&g, &mut rng, g.init(), 12);
        let vs = walk.vertices();
        let mut cut = None;
        'outer: for j in 1..vs.len() {
            for i in 0..j {
                if vs[i] == vs[j] {
                    cut = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = cut else { continue };
        built += 1;
        let alpha = slice(&g, &walk, 0, i);
        let beta = slice(&g, &walk, i, j);
        let gamma = common::random_history(&g, &mut rng, beta.first(), 4);
        for k in [1usize, 2, 3, 7, 12] {
            let p = PumpedPath::new(
                alpha.clone(),
                Some(Pump::new(beta.clone(), BigUint::from(k)).unwrap()),
                gamma.clone(),
            )
            .unwrap();
            let unrolled = alpha
                .concat(&beta.repeat(k).unwrap())
                .unwrap()
                .concat(&gamma)
                .unwrap();
            let symbolic = val_pumped(&g, &p).unwrap().to_rational(g.lambda()).unwrap();
            assert_eq!(symbolic, val_history(&g, &unrolled));
        }
    }
    assert!(built >= 140, "only {built} of 150 walks closed a cycle");
}

#[test]
fn existence_check_agrees_with_step_by_step_reachability() {
    let mut rng = common::rng(0x9017_0004);
    for _ in 0..30 {
        let g = common::random_game(&mut rng);
        let s = common::random_strategy(&g, &mut rng);

        // All (vertex, switched) pairs reachable with exactly n edges.
        let mut layers: Vec<BTreeSet<(VertexId, bool)>> = Vec::new();
        let mut layer = BTreeSet::new();
        layer.insert((g.init(), s.switched_at_start(&g)));
        for n in 0..=10u64 {
            if n > 0 {
                let mut next = BTreeSet::new();
                for &(v, f) in &layers[n as usize - 1] {
                    let targets: Vec<VertexId> = match g.owner(v) {
                        Owner::Eve => {
                            vec![if f { s.sigma2.choice(v) } else { s.sigma1.choice(v) }]
                        }
                        Owner::Adam => g.successors(v).iter().map(|e| e.to).collect(),
                    };
                    for to in targets {
                        next.insert((to, f || s.thresholds.triggers(&g, to, n)));
                    }
                }
                layer = next;
            }
            layers.push(layer.clone());
        }

        for n in 0..=10u64 {
            for v in g.eve_vertices() {
                for e in g.successors(v) {
                    for f in [false, true] {
                        let expected = layers[n as usize].contains(&(v, f))
                            && e.to == if f { s.sigma2.choice(v) } else { s.sigma1.choice(v) };
                        let got =
                            history_exists(&g, &s, &BigUint::from(n), f, v, e.to).unwrap();
                        assert_eq!(got, expected, "n={n} v={} f={f}", g.name(v));
                    }
                }
            }
        }
    }
}

fn poly_from(terms: &[(u64, i64)]) -> DiscountPoly {
    let mut p = DiscountPoly::zero();
    for &(e, c) in terms {
        p.add_term(BigUint::from(e), int(c));
    }
    p
}

fn sign_of(r: &Rational) -> i8 {
    match r.cmp(&Rational::zero()) {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

proptest! {
    #[test]
    fn poly_sign_and_order_match_materialized_values(
        ta in prop::collection::vec((0u64..60, -9i64..=9), 0..6),
        tb in prop::collection::vec((0u64..60, -9i64..=9), 0..6),
        li in 0usize..3,
    ) {
        let lambda = [rat(1, 3), rat(1, 2), rat(3, 4)][li].clone();
        let a = poly_from(&ta);
        let b = poly_from(&tb);
        let va = a.to_rational(&lambda).unwrap();
        let vb = b.to_rational(&lambda).unwrap();
        prop_assert_eq!(a.sign(&lambda).unwrap(), sign_of(&va));
        prop_assert_eq!(a.try_cmp(&b, &lambda).unwrap(), va.cmp(&vb));
    }
}

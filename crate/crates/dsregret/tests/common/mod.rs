//! Shared helpers for the integration suites: fixture loading and a seeded
//! generator of small random games and switching strategies.

#![allow(dead_code)]

use std::collections::HashMap;
use std::fmt::Write;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use dsregret::game::{Game, Owner};
use dsregret::strategy::{Positional, SwitchingStrategy, Threshold, Thresholds};

pub fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> String {
    let path = fixture_path(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn game(name: &str) -> Game {
    Game::parse(&fixture(name)).unwrap()
}

pub fn strategy(g: &Game, name: &str) -> SwitchingStrategy {
    SwitchingStrategy::parse(g, &fixture(name)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random game with up to five vertices, emitted in the input format and
/// read back through the parser.
pub fn random_game(rng: &mut ChaCha8Rng) -> Game {
    let nv: usize = rng.gen_range(2..=5);
    let lambda = ["1/3", "1/2", "3/4"][rng.gen_range(0..3)];
    let mut text = String::new();
    writeln!(text, "lambda {lambda}").unwrap();
    for v in 0..nv {
        let owner = if rng.gen_bool(0.5) { "eve" } else { "adam" };
        writeln!(text, "vertex n{v} {owner}").unwrap();
    }
    for v in 0..nv {
        let deg = rng.gen_range(1..=3.min(nv));
        let mut targets: Vec<usize> = (0..nv).collect();
        targets.shuffle(rng);
        for t in targets.into_iter().take(deg) {
            let w = rng.gen_range(-2..=2);
            writeln!(text, "edge n{v} n{t} {w}").unwrap();
        }
    }
    writeln!(text, "init n0").unwrap();
    Game::parse(&text).unwrap()
}

/// A random switching strategy with thresholds drawn from {0,1,2,3,inf}.
pub fn random_strategy(g: &Game, rng: &mut ChaCha8Rng) -> SwitchingStrategy {
    let pick = |rng: &mut ChaCha8Rng, v: usize| {
        let succ = g.successors(v);
        succ[rng.gen_range(0..succ.len())].to
    };
    let mut c1 = vec![None; g.vertex_count()];
    let mut c2 = vec![None; g.vertex_count()];
    let mut tmap = HashMap::new();
    for v in g.eve_vertices() {
        c1[v] = Some(pick(rng, v));
        c2[v] = Some(pick(rng, v));
        let t = match rng.gen_range(0..5u32) {
            4 => Threshold::Infinite,
            k => Threshold::Finite(k as u64),
        };
        tmap.insert(v, t);
    }
    SwitchingStrategy {
        sigma1: Positional::from_choices(g, Owner::Eve, c1).unwrap(),
        thresholds: Thresholds::from_map(g, &tmap).unwrap(),
        sigma2: Positional::from_choices(g, Owner::Eve, c2).unwrap(),
    }
}

/// A random history of the given edge length starting at `start`.
pub fn random_history(
    g: &Game,
    rng: &mut ChaCha8Rng,
    start: usize,
    edges: usize,
) -> dsregret::history::History {
    let mut vs = vec![start];
    let mut v = start;
    for _ in 0..edges {
        let succ = g.successors(v);
        v = succ[rng.gen_range(0..succ.len())].to;
        vs.push(v);
    }
    dsregret::history::History::new(g, vs).unwrap()
}

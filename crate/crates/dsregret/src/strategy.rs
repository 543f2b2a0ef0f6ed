//! Strategies: positional, bipositional switching, and finite-memory.

use std::collections::HashMap;

use crate::error::Error;
use crate::game::{Game, Owner, VertexId};

/// Switching threshold of a vertex: switch once the step count reaches the
/// finite value; `Infinite` means never because of this vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Threshold {
    Finite(u64),
    Infinite,
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Threshold::Finite(n) => write!(f, "{n}"),
            Threshold::Infinite => write!(f, "inf"),
        }
    }
}

/// A positional strategy for one player: a choice of outgoing edge at every
/// vertex that player owns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Positional {
    owner: Owner,
    choice: Vec<Option<VertexId>>,
}

impl Positional {
    pub fn from_choices(
        g: &Game,
        owner: Owner,
        choice: Vec<Option<VertexId>>,
    ) -> Result<Positional, Error> {
        if choice.len() != g.vertex_count() {
            return Err(Error::invalid("choice vector length must match vertex count"));
        }
        for v in g.vertices() {
            match choice[v] {
                Some(to) if g.owner(v) == owner => {
                    if !g.has_edge(v, to) {
                        return Err(Error::invalid(format!(
                            "strategy uses nonexistent edge {} -> {}",
                            g.name(v),
                            g.name(to)
                        )));
                    }
                }
                Some(_) => {
                    return Err(Error::invalid(format!(
                        "choice given at vertex '{}' not owned by the player",
                        g.name(v)
                    )))
                }
                None if g.owner(v) == owner => {
                    return Err(Error::invalid(format!(
                        "no choice at owned vertex '{}'",
                        g.name(v)
                    )))
                }
                None => {}
            }
        }
        Ok(Positional { owner, choice })
    }

    pub fn owner(&self) -> Owner {
        self.owner
    }

    pub fn get(&self, v: VertexId) -> Option<VertexId> {
        self.choice.get(v).copied().flatten()
    }

    /// The chosen successor at an owned vertex. Panics when `v` is not owned.
    pub fn choice(&self, v: VertexId) -> VertexId {
        self.choice[v].expect("vertex not owned by this strategy's player")
    }
}

/// Per-vertex switching thresholds. Entries at Adam's vertices are always
/// `Infinite`; only Eve's vertices can trigger a switch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thresholds {
    t: Vec<Threshold>,
}

impl Thresholds {
    pub fn from_map(g: &Game, eve_t: &HashMap<VertexId, Threshold>) -> Result<Thresholds, Error> {
        let mut t = vec![Threshold::Infinite; g.vertex_count()];
        for (&v, &th) in eve_t {
            if g.owner(v) != Owner::Eve {
                return Err(Error::invalid(format!(
                    "threshold given for vertex '{}' not owned by Eve",
                    g.name(v)
                )));
            }
            t[v] = th;
        }
        for v in g.eve_vertices() {
            if !eve_t.contains_key(&v) {
                return Err(Error::invalid(format!(
                    "no threshold for Eve's vertex '{}'",
                    g.name(v)
                )));
            }
        }
        Ok(Thresholds { t })
    }

    pub fn uniform(g: &Game, th: Threshold) -> Thresholds {
        let mut t = vec![Threshold::Infinite; g.vertex_count()];
        for v in g.eve_vertices() {
            t[v] = th;
        }
        Thresholds { t }
    }

    pub fn get(&self, v: VertexId) -> Threshold {
        self.t[v]
    }

    /// Largest finite threshold, or `None` when every entry is infinite.
    pub fn max_finite(&self) -> Option<u64> {
        self.t
            .iter()
            .filter_map(|t| match t {
                Threshold::Finite(n) => Some(*n),
                Threshold::Infinite => None,
            })
            .max()
    }

    /// Sorted distinct finite threshold values.
    pub fn finite_values(&self) -> Vec<u64> {
        let mut vals: Vec<u64> = self
            .t
            .iter()
            .filter_map(|t| match t {
                Threshold::Finite(n) => Some(*n),
                Threshold::Infinite => None,
            })
            .collect();
        vals.sort_unstable();
        vals.dedup();
        vals
    }

    /// Whether arriving at `w` after `steps` edges triggers the switch.
    pub fn triggers(&self, g: &Game, w: VertexId, steps: u64) -> bool {
        g.owner(w) == Owner::Eve
            && match self.t[w] {
                Threshold::Finite(n) => n <= steps,
                Threshold::Infinite => false,
            }
    }

    pub fn as_slice(&self) -> &[Threshold] {
        &self.t
    }
}

/// A bipositional switching strategy: play `sigma1`, and from the first
/// moment the play has taken at least `t(v)` steps when visiting some Eve
/// vertex `v`, play `sigma2` forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchingStrategy {
    pub sigma1: Positional,
    pub thresholds: Thresholds,
    pub sigma2: Positional,
}

impl SwitchingStrategy {
    /// Parses the textual strategy format:
    ///
    /// ```text
    /// strategy switching
    /// sigma1 v0 -> v1
    /// threshold v0 2
    /// sigma2 v0 -> v2
    /// ```
    ///
    /// Each of Eve's vertices needs a `sigma1`, `threshold` and `sigma2`
    /// line; thresholds are nonnegative integers or `inf`.
    pub fn parse(g: &Game, text: &str) -> Result<SwitchingStrategy, Error> {
        let mut header_seen = false;
        let mut sigma1: HashMap<VertexId, (VertexId, usize)> = HashMap::new();
        let mut sigma2: HashMap<VertexId, (VertexId, usize)> = HashMap::new();
        let mut thresholds: HashMap<VertexId, (Threshold, usize)> = HashMap::new();

        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            if !header_seen {
                if tokens != ["strategy", "switching"] {
                    return Err(Error::at(
                        lineno,
                        1,
                        "strategy file must start with 'strategy switching'",
                    ));
                }
                header_seen = true;
                continue;
            }
            match tokens[0] {
                "sigma1" | "sigma2" => {
                    if tokens.len() != 4 || tokens[2] != "->" {
                        return Err(Error::at(
                            lineno,
                            1,
                            format!("expected {} <vertex> -> <vertex>", tokens[0]),
                        ));
                    }
                    let v = vertex(g, lineno, tokens[1])?;
                    let to = vertex(g, lineno, tokens[3])?;
                    if g.owner(v) != Owner::Eve {
                        return Err(Error::at(
                            lineno,
                            1,
                            format!("vertex '{}' is not owned by Eve", tokens[1]),
                        ));
                    }
                    if !g.has_edge(v, to) {
                        return Err(Error::at(
                            lineno,
                            1,
                            format!("no edge {} -> {}", tokens[1], tokens[3]),
                        ));
                    }
                    let map = if tokens[0] == "sigma1" { &mut sigma1 } else { &mut sigma2 };
                    if let Some((_, prev)) = map.insert(v, (to, lineno)) {
                        return Err(Error::at(
                            lineno,
                            1,
                            format!(
                                "duplicate {} line for '{}' (first on line {prev})",
                                tokens[0], tokens[1]
                            ),
                        ));
                    }
                }
                "threshold" => {
                    if tokens.len() != 3 {
                        return Err(Error::at(lineno, 1, "expected threshold <vertex> <n|inf>"));
                    }
                    let v = vertex(g, lineno, tokens[1])?;
                    if g.owner(v) != Owner::Eve {
                        return Err(Error::at(
                            lineno,
                            1,
                            format!("vertex '{}' is not owned by Eve", tokens[1]),
                        ));
                    }
                    let th = if tokens[2] == "inf" {
                        Threshold::Infinite
                    } else {
                        Threshold::Finite(tokens[2].parse().map_err(|_| {
                            Error::at(
                                lineno,
                                1,
                                format!("invalid threshold '{}'", tokens[2]),
                            )
                        })?)
                    };
                    if let Some((_, prev)) = thresholds.insert(v, (th, lineno)) {
                        return Err(Error::at(
                            lineno,
                            1,
                            format!(
                                "duplicate threshold line for '{}' (first on line {prev})",
                                tokens[1]
                            ),
                        ));
                    }
                }
                other => {
                    return Err(Error::at(lineno, 1, format!("unknown directive '{other}'")));
                }
            }
        }
        if !header_seen {
            return Err(Error::at(0, 0, "missing 'strategy switching' header"));
        }

        let to_choices = |m: &HashMap<VertexId, (VertexId, usize)>| {
            let mut c = vec![None; g.vertex_count()];
            for (&v, &(to, _)) in m {
                c[v] = Some(to);
            }
            c
        };
        let sigma1 = Positional::from_choices(g, Owner::Eve, to_choices(&sigma1))?;
        let sigma2 = Positional::from_choices(g, Owner::Eve, to_choices(&sigma2))?;
        let tmap: HashMap<VertexId, Threshold> =
            thresholds.iter().map(|(&v, &(t, _))| (v, t)).collect();
        let thresholds = Thresholds::from_map(g, &tmap)?;
        Ok(SwitchingStrategy { sigma1, thresholds, sigma2 })
    }

    /// Canonical rendering in the input format, Eve's vertices in index
    /// order.
    pub fn format(&self, g: &Game) -> String {
        use std::fmt::Write;
        let mut out = String::from("strategy switching\n");
        for v in g.eve_vertices() {
            writeln!(out, "sigma1 {} -> {}", g.name(v), g.name(self.sigma1.choice(v))).unwrap();
        }
        for v in g.eve_vertices() {
            writeln!(out, "threshold {} {}", g.name(v), self.thresholds.get(v)).unwrap();
        }
        for v in g.eve_vertices() {
            writeln!(out, "sigma2 {} -> {}", g.name(v), g.name(self.sigma2.choice(v))).unwrap();
        }
        out
    }

    /// Wraps a positional strategy: never switch.
    pub fn positional(g: &Game, p: Positional) -> SwitchingStrategy {
        SwitchingStrategy {
            sigma1: p.clone(),
            thresholds: Thresholds::uniform(g, Threshold::Infinite),
            sigma2: p,
        }
    }

    /// Whether the strategy is already switched before any edge is taken.
    pub fn switched_at_start(&self, g: &Game) -> bool {
        self.thresholds.triggers(g, g.init(), 0)
    }
}

fn vertex(g: &Game, lineno: usize, name: &str) -> Result<VertexId, Error> {
    g.vertex(name)
        .ok_or_else(|| Error::at(lineno, 1, format!("unknown vertex '{name}'")))
}

/// A deterministic finite-memory strategy: a memory state updated on every
/// arrival, and an action for each memory state at each of Eve's vertices.
#[derive(Debug, Clone)]
pub struct FiniteMemoryStrategy {
    labels: Vec<String>,
    initial: usize,
    /// `update[m][v]`: memory after arriving at `v` with memory `m`.
    update: Vec<Vec<usize>>,
    /// `action[m][v]`: successor chosen at Eve's vertex `v` with memory `m`.
    action: Vec<Vec<Option<VertexId>>>,
}

impl FiniteMemoryStrategy {
    pub fn new(
        g: &Game,
        labels: Vec<String>,
        initial: usize,
        update: Vec<Vec<usize>>,
        action: Vec<Vec<Option<VertexId>>>,
    ) -> Result<FiniteMemoryStrategy, Error> {
        let m = labels.len();
        if m == 0 || initial >= m || update.len() != m || action.len() != m {
            return Err(Error::invalid("malformed finite-memory strategy tables"));
        }
        for row in &update {
            if row.len() != g.vertex_count() || row.iter().any(|&t| t >= m) {
                return Err(Error::invalid("memory update table out of range"));
            }
        }
        for row in &action {
            if row.len() != g.vertex_count() {
                return Err(Error::invalid("action table length must match vertex count"));
            }
            for v in g.vertices() {
                match row[v] {
                    Some(to) => {
                        if g.owner(v) != Owner::Eve || !g.has_edge(v, to) {
                            return Err(Error::invalid(format!(
                                "invalid action at vertex '{}'",
                                g.name(v)
                            )));
                        }
                    }
                    None => {
                        if g.owner(v) == Owner::Eve {
                            return Err(Error::invalid(format!(
                                "missing action at Eve's vertex '{}'",
                                g.name(v)
                            )));
                        }
                    }
                }
            }
        }
        Ok(FiniteMemoryStrategy { labels, initial, update, action })
    }

    /// Unfolds a switching strategy into memory states `(counter, switched)`
    /// with the counter saturated at the largest finite threshold.
    pub fn from_switching(g: &Game, s: &SwitchingStrategy) -> Result<FiniteMemoryStrategy, Error> {
        let t_sat = s.thresholds.max_finite().unwrap_or(0);
        let mem = t_sat
            .checked_add(1)
            .and_then(|m| m.checked_mul(2))
            .and_then(|m| m.checked_mul(g.vertex_count() as u64));
        match mem {
            Some(entries) if entries <= 2_000_000 => {}
            _ => {
                return Err(Error::too_large(format!(
                    "switching strategy unfolds to more than 2000000 table entries \
                     (largest finite threshold {t_sat})"
                )))
            }
        }
        let idx = |c: u64, f: bool| (c * 2 + f as u64) as usize;
        let count = idx(t_sat, true) + 1;
        let mut labels = Vec::with_capacity(count);
        let mut update = Vec::with_capacity(count);
        let mut action = Vec::with_capacity(count);
        for c in 0..=t_sat {
            for f in [false, true] {
                labels.push(format!("c{}{}", c, if f { "s" } else { "u" }));
                let mut urow = Vec::with_capacity(g.vertex_count());
                let mut arow = Vec::with_capacity(g.vertex_count());
                for v in g.vertices() {
                    let steps = c + 1;
                    let f2 = f || s.thresholds.triggers(g, v, steps);
                    let c2 = steps.min(t_sat);
                    urow.push(idx(c2, f2));
                    arow.push(if g.owner(v) == Owner::Eve {
                        Some(if f { s.sigma2.choice(v) } else { s.sigma1.choice(v) })
                    } else {
                        None
                    });
                }
                update.push(urow);
                action.push(arow);
            }
        }
        let initial = idx(0, s.switched_at_start(g));
        FiniteMemoryStrategy::new(g, labels, initial, update, action)
    }

    pub fn memory_count(&self) -> usize {
        self.labels.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn label(&self, m: usize) -> &str {
        &self.labels[m]
    }

    pub fn update(&self, m: usize, arrival: VertexId) -> usize {
        self.update[m][arrival]
    }

    pub fn action(&self, m: usize, v: VertexId) -> Option<VertexId> {
        self.action[m][v]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> String {
        let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        std::fs::read_to_string(path).unwrap()
    }

    fn gb() -> Game {
        Game::parse(&fixture("GB.game")).unwrap()
    }

    #[test]
    fn parses_fixture_strategies() {
        let g = gb();
        let s = SwitchingStrategy::parse(&g, &fixture("GB-v2.strat")).unwrap();
        let v0 = g.vertex("v0").unwrap();
        assert_eq!(g.name(s.sigma1.choice(v0)), "v2");
        assert_eq!(s.thresholds.get(v0), Threshold::Finite(0));
        assert!(s.switched_at_start(&g));

        let s = SwitchingStrategy::parse(&g, &fixture("GB-v1.strat")).unwrap();
        assert_eq!(s.thresholds.get(v0), Threshold::Infinite);
        assert_eq!(s.thresholds.max_finite(), None);
        assert!(!s.switched_at_start(&g));
    }

    #[test]
    fn format_round_trips() {
        let g = gb();
        let s = SwitchingStrategy::parse(&g, &fixture("GB-v1.strat")).unwrap();
        let t = SwitchingStrategy::parse(&g, &s.format(&g)).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn rejects_incomplete_or_invalid_files() {
        let g = gb();
        // missing threshold for v2p
        let text = "strategy switching\n\
                    sigma1 v0 -> v2\nsigma1 v1p -> v1p\nsigma1 v1pp -> v1pp\nsigma1 v2p -> v2p\n\
                    threshold v0 0\nthreshold v1p 0\nthreshold v1pp 0\n\
                    sigma2 v0 -> v2\nsigma2 v1p -> v1p\nsigma2 v1pp -> v1pp\nsigma2 v2p -> v2p\n";
        assert!(SwitchingStrategy::parse(&g, text).is_err());
        // strategy uses a nonexistent edge
        let text = fixture("GB-v2.strat").replace("sigma1 v0 -> v2", "sigma1 v0 -> v2p");
        let err = SwitchingStrategy::parse(&g, &text).unwrap_err();
        assert!(err.to_string().contains("no edge"), "{err}");
        // Adam vertex in a sigma line
        let text = fixture("GB-v2.strat").replace("sigma1 v0 -> v2", "sigma1 v1 -> v1p");
        assert!(SwitchingStrategy::parse(&g, &text).is_err());
    }

    #[test]
    fn threshold_trigger_logic() {
        let g = gb();
        let s = SwitchingStrategy::parse(&g, &fixture("GB-v1.strat")).unwrap();
        let v0 = g.vertex("v0").unwrap();
        assert!(!s.thresholds.triggers(&g, v0, 1_000_000));
        let mut tmap = HashMap::new();
        for v in g.eve_vertices() {
            tmap.insert(v, Threshold::Finite(if v == v0 { 2 } else { 0 }));
        }
        let t = Thresholds::from_map(&g, &tmap).unwrap();
        assert!(!t.triggers(&g, v0, 1));
        assert!(t.triggers(&g, v0, 2));
        assert!(t.triggers(&g, v0, 3));
        let v1 = g.vertex("v1").unwrap();
        assert!(!t.triggers(&g, v1, 10)); // Adam vertex never triggers
        assert_eq!(t.max_finite(), Some(2));
        assert_eq!(t.finite_values(), vec![0, 2]);
    }

    #[test]
    fn switching_unfolds_to_counter_flag_memory() {
        let g = gb();
        let v0 = g.vertex("v0").unwrap();
        let mut tmap = HashMap::new();
        for v in g.eve_vertices() {
            tmap.insert(v, Threshold::Finite(if v == v0 { 2 } else { 0 }));
        }
        let s = SwitchingStrategy {
            sigma1: SwitchingStrategy::parse(&g, &fixture("GB-v1.strat")).unwrap().sigma1,
            thresholds: Thresholds::from_map(&g, &tmap).unwrap(),
            sigma2: SwitchingStrategy::parse(&g, &fixture("GB-v2.strat")).unwrap().sigma2,
        };
        let fm = FiniteMemoryStrategy::from_switching(&g, &s).unwrap();
        assert_eq!(fm.memory_count(), 6); // counters 0..=2, two flags
        assert_eq!(fm.label(fm.initial()), "c0u");
        // arriving at v0 with counter already 2 triggers the switch
        let m = fm.update(fm.update(fm.initial(), v0), v0);
        let m = fm.update(m, v0);
        assert_eq!(fm.label(m), "c2s");
        assert_eq!(fm.action(m, v0), Some(g.vertex("v2").unwrap()));
    }
}

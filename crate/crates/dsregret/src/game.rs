//! Game graphs: two players on a finite directed graph with integer edge
//! weights and a rational discount factor in (0, 1).

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::Error;
use crate::rational::{parse_rational, Rational};

pub type VertexId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Owner {
    Eve,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub to: VertexId,
    pub weight: i64,
}

#[derive(Debug, Clone)]
struct VertexData {
    name: String,
    owner: Owner,
}

/// A finite game graph. Vertices are dense indices in declaration order;
/// every vertex has at least one outgoing edge; adjacency lists are sorted
/// by target index.
#[derive(Debug, Clone)]
pub struct Game {
    vertices: Vec<VertexData>,
    by_name: HashMap<String, VertexId>,
    succ: Vec<Vec<Edge>>,
    lambda: Rational,
    init: VertexId,
    edge_count: usize,
}

impl Game {
    /// Parses the textual game format:
    ///
    /// ```text
    /// lambda 1/2
    /// vertex v0 eve
    /// vertex v1 adam
    /// edge v0 v1 3
    /// init v0
    /// ```
    ///
    /// `#` starts a comment. Vertices must be declared before they are used
    /// in `edge` or `init` lines.
    pub fn parse(text: &str) -> Result<Game, Error> {
        let mut lambda: Option<(Rational, usize)> = None;
        let mut init: Option<(String, usize, usize)> = None;
        let mut vertices: Vec<VertexData> = Vec::new();
        let mut by_name: HashMap<String, VertexId> = HashMap::new();
        let mut succ: Vec<Vec<Edge>> = Vec::new();
        let mut edge_seen: HashMap<(VertexId, VertexId), usize> = HashMap::new();

        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let tokens = tokenize(line);
            if tokens.is_empty() {
                continue;
            }
            let (col0, head) = tokens[0];
            let args = &tokens[1..];
            match head {
                "lambda" => {
                    if lambda.is_some() {
                        return Err(Error::at(lineno, col0, "duplicate 'lambda' line"));
                    }
                    let (col, tok) = expect_args(lineno, args, 1, "lambda <p/q>")?[0];
                    let l = parse_rational(tok).map_err(|e| Error::at(lineno, col, e))?;
                    if l <= Rational::zero() || l >= Rational::one() {
                        return Err(Error::at(
                            lineno,
                            col,
                            format!("discount factor must lie strictly between 0 and 1, got {tok}"),
                        ));
                    }
                    lambda = Some((l, lineno));
                }
                "vertex" => {
                    let a = expect_args(lineno, args, 2, "vertex <name> <eve|adam>")?;
                    let (ncol, name) = a[0];
                    let (ocol, owner) = a[1];
                    let owner = match owner {
                        "eve" => Owner::Eve,
                        "adam" => Owner::Adam,
                        other => {
                            return Err(Error::at(
                                lineno,
                                ocol,
                                format!("owner must be 'eve' or 'adam', got '{other}'"),
                            ))
                        }
                    };
                    if by_name.contains_key(name) {
                        return Err(Error::at(
                            lineno,
                            ncol,
                            format!("duplicate vertex '{name}'"),
                        ));
                    }
                    by_name.insert(name.to_string(), vertices.len());
                    vertices.push(VertexData { name: name.to_string(), owner });
                    succ.push(Vec::new());
                }
                "edge" => {
                    let a = expect_args(lineno, args, 3, "edge <from> <to> <weight>")?;
                    let from = lookup(&by_name, lineno, a[0])?;
                    let to = lookup(&by_name, lineno, a[1])?;
                    let (wcol, wtok) = a[2];
                    let weight: i64 = wtok.parse().map_err(|_| {
                        Error::at(lineno, wcol, format!("invalid integer weight '{wtok}'"))
                    })?;
                    if let Some(prev) = edge_seen.insert((from, to), lineno) {
                        return Err(Error::at(
                            lineno,
                            a[0].0,
                            format!(
                                "duplicate edge {} -> {} (first declared on line {prev})",
                                a[0].1, a[1].1
                            ),
                        ));
                    }
                    succ[from].push(Edge { to, weight });
                }
                "init" => {
                    if init.is_some() {
                        return Err(Error::at(lineno, col0, "duplicate 'init' line"));
                    }
                    let (col, name) = expect_args(lineno, args, 1, "init <name>")?[0];
                    lookup(&by_name, lineno, (col, name))?;
                    init = Some((name.to_string(), lineno, col));
                }
                other => {
                    return Err(Error::at(
                        lineno,
                        col0,
                        format!("unknown directive '{other}'"),
                    ))
                }
            }
        }

        let (lambda, _) = lambda.ok_or_else(|| Error::at(0, 0, "missing 'lambda' line"))?;
        let (init_name, _, _) = init.ok_or_else(|| Error::at(0, 0, "missing 'init' line"))?;
        if vertices.is_empty() {
            return Err(Error::at(0, 0, "game declares no vertices"));
        }
        for (v, data) in vertices.iter().enumerate() {
            if succ[v].is_empty() {
                return Err(Error::at(
                    0,
                    0,
                    format!("vertex '{}' has no outgoing edge", data.name),
                ));
            }
        }
        let edge_count = succ.iter().map(Vec::len).sum();
        for list in &mut succ {
            list.sort_by_key(|e| e.to);
        }
        let init = by_name[&init_name];
        Ok(Game { vertices, by_name, succ, lambda, init, edge_count })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn owner(&self, v: VertexId) -> Owner {
        self.vertices[v].owner
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.vertices[v].name
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.by_name.get(name).copied()
    }

    /// Successors of `v`, sorted by target index.
    pub fn successors(&self, v: VertexId) -> &[Edge] {
        &self.succ[v]
    }

    pub fn has_edge(&self, from: VertexId, to: VertexId) -> bool {
        self.succ[from].iter().any(|e| e.to == to)
    }

    pub fn weight(&self, from: VertexId, to: VertexId) -> Option<i64> {
        self.succ[from].iter().find(|e| e.to == to).map(|e| e.weight)
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn init(&self) -> VertexId {
        self.init
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.vertices.len()
    }

    pub fn eve_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).filter(move |&v| self.owner(v) == Owner::Eve)
    }

    pub fn max_abs_weight(&self) -> i64 {
        self.succ
            .iter()
            .flatten()
            .map(|e| e.weight.abs())
            .max()
            .unwrap_or(0)
    }

    /// Canonical rendering in the input format; `parse` of the result yields
    /// an identical game.
    pub fn format(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(out, "lambda {}/{}", self.lambda.numer(), self.lambda.denom()).unwrap();
        for (v, data) in self.vertices.iter().enumerate() {
            let owner = match data.owner {
                Owner::Eve => "eve",
                Owner::Adam => "adam",
            };
            let _ = v;
            writeln!(out, "vertex {} {}", data.name, owner).unwrap();
        }
        for v in 0..self.vertices.len() {
            for e in &self.succ[v] {
                writeln!(out, "edge {} {} {}", self.name(v), self.name(e.to), e.weight).unwrap();
            }
        }
        writeln!(out, "init {}", self.name(self.init)).unwrap();
        out
    }
}

fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn expect_args<'a>(
    lineno: usize,
    args: &[(usize, &'a str)],
    n: usize,
    usage: &str,
) -> Result<Vec<(usize, &'a str)>, Error> {
    if args.len() != n {
        return Err(Error::at(
            lineno,
            args.first().map_or(1, |a| a.0),
            format!("expected {usage}"),
        ));
    }
    Ok(args.to_vec())
}

fn lookup(
    by_name: &HashMap<String, VertexId>,
    lineno: usize,
    (col, name): (usize, &str),
) -> Result<VertexId, Error> {
    by_name
        .get(name)
        .copied()
        .ok_or_else(|| Error::at(lineno, col, format!("unknown vertex '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> String {
        let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        std::fs::read_to_string(path).unwrap()
    }

    #[test]
    fn parses_the_eight_vertex_fixture() {
        let g = Game::parse(&fixture("GA.game")).unwrap();
        assert_eq!(g.vertex_count(), 8);
        assert_eq!(g.edge_count(), 13);
        assert_eq!(g.name(g.init()), "v0");
        assert_eq!(g.owner(g.vertex("v0").unwrap()), Owner::Adam);
        assert_eq!(g.owner(g.vertex("v1").unwrap()), Owner::Eve);
        assert_eq!(*g.lambda(), crate::rational::rat(1, 2));
        // adjacency is sorted by target index, independent of file order
        let v0 = g.vertex("v0").unwrap();
        let targets: Vec<_> = g.successors(v0).iter().map(|e| g.name(e.to)).collect();
        assert_eq!(targets, ["v1", "v2"]);
    }

    #[test]
    fn parses_the_six_vertex_fixture() {
        let g = Game::parse(&fixture("GB.game")).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.weight(g.vertex("v1p").unwrap(), g.vertex("v1p").unwrap()), Some(10));
    }

    #[test]
    fn format_round_trips() {
        for f in ["GA.game", "GB.game", "GT.game", "GC.game"] {
            let g = Game::parse(&fixture(f)).unwrap();
            let h = Game::parse(&g.format()).unwrap();
            assert_eq!(g.format(), h.format());
        }
    }

    #[test]
    fn rejects_vertex_used_before_declaration() {
        let err = Game::parse("lambda 1/2\nedge a b 0\nvertex a eve\nvertex b eve\ninit a\n")
            .unwrap_err();
        match err {
            Error::Parse { line: 2, col, ref msg } => {
                assert_eq!(col, 6);
                assert!(msg.contains("unknown vertex 'a'"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_lambda_out_of_range() {
        for bad in ["0/1", "1/1", "3/2", "-1/2"] {
            let text = format!("lambda {bad}\nvertex a eve\nedge a a 0\ninit a\n");
            let err = Game::parse(&text).unwrap_err();
            assert!(matches!(err, Error::Parse { line: 1, .. }), "{bad}: {err}");
        }
    }

    #[test]
    fn rejects_sink_vertex() {
        let err = Game::parse("lambda 1/2\nvertex a eve\nvertex b eve\nedge a b 0\ninit a\n")
            .unwrap_err();
        assert!(err.to_string().contains("no outgoing edge"), "{err}");
    }

    #[test]
    fn rejects_duplicate_edge_and_vertex() {
        let err = Game::parse(
            "lambda 1/2\nvertex a eve\nedge a a 0\nedge a a 1\ninit a\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate edge"), "{err}");
        let err =
            Game::parse("lambda 1/2\nvertex a eve\nvertex a adam\nedge a a 0\ninit a\n")
                .unwrap_err();
        assert!(err.to_string().contains("duplicate vertex"), "{err}");
    }

    #[test]
    fn reports_line_and_column_for_bad_weight() {
        let err = Game::parse("lambda 1/2\nvertex a eve\nedge a a x\ninit a\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse { line: 3, col: 10, msg: "invalid integer weight 'x'".into() }
        );
    }
}

//! Finite paths and lassos in a game graph.

use crate::error::Error;
use crate::game::{Game, VertexId};

/// A nonempty vertex sequence in which consecutive vertices are joined by
/// edges. The length of a history is its number of edges; a single vertex is
/// a valid history of length 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    vertices: Vec<VertexId>,
}

impl History {
    pub fn new(g: &Game, vertices: Vec<VertexId>) -> Result<History, Error> {
        if vertices.is_empty() {
            return Err(Error::invalid("a history must contain at least one vertex"));
        }
        for &v in &vertices {
            if v >= g.vertex_count() {
                return Err(Error::invalid(format!("vertex index {v} out of range")));
            }
        }
        for w in vertices.windows(2) {
            if !g.has_edge(w[0], w[1]) {
                return Err(Error::invalid(format!(
                    "no edge {} -> {}",
                    g.name(w[0]),
                    g.name(w[1])
                )));
            }
        }
        Ok(History { vertices })
    }

    pub fn single(v: VertexId) -> History {
        History { vertices: vec![v] }
    }

    /// Parses a comma-separated list of vertex names.
    pub fn parse(g: &Game, text: &str) -> Result<History, Error> {
        let names: Vec<&str> = text.split(',').map(str::trim).collect();
        let mut vertices = Vec::with_capacity(names.len());
        for name in names {
            let v = g
                .vertex(name)
                .ok_or_else(|| Error::invalid(format!("unknown vertex '{name}'")))?;
            vertices.push(v);
        }
        History::new(g, vertices)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn first(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn last(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }

    /// Whether the history starts and ends at the same vertex and has at
    /// least one edge.
    pub fn is_cycle(&self) -> bool {
        self.len() >= 1 && self.first() == self.last()
    }

    /// Whether no vertex repeats, except that the endpoints of a cycle may
    /// coincide.
    pub fn is_simple(&self) -> bool {
        let interior = if self.is_cycle() {
            &self.vertices[..self.vertices.len() - 1]
        } else {
            &self.vertices[..]
        };
        let mut seen = std::collections::HashSet::new();
        interior.iter().all(|v| seen.insert(*v))
    }

    /// Concatenation `self . other`; the last vertex of `self` must equal the
    /// first of `other` and is not duplicated.
    pub fn concat(&self, other: &History) -> Result<History, Error> {
        if self.last() != other.first() {
            return Err(Error::invalid(
                "histories concatenate only when the endpoints match",
            ));
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        Ok(History { vertices })
    }

    /// `self` repeated `k` times (a cycle raised to a power).
    pub fn repeat(&self, k: usize) -> Result<History, Error> {
        if !self.is_cycle() {
            return Err(Error::invalid("only cycles can be repeated"));
        }
        let mut vertices = vec![self.vertices[0]];
        for _ in 0..k {
            vertices.extend_from_slice(&self.vertices[1..]);
        }
        Ok(History { vertices })
    }

    pub fn format(&self, g: &Game) -> String {
        self.vertices
            .iter()
            .map(|&v| g.name(v))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A lasso `alpha . beta^omega`: a finite stem followed by a cycle traversed
/// forever. The stem ends where the cycle starts and the cycle is nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub alpha: History,
    pub beta: History,
}

impl Lasso {
    pub fn new(_g: &Game, alpha: History, beta: History) -> Result<Lasso, Error> {
        if !beta.is_cycle() {
            return Err(Error::invalid(
                "the pumped part of a lasso must be a nonempty cycle",
            ));
        }
        if alpha.last() != beta.first() {
            return Err(Error::invalid("lasso stem must end where its cycle starts"));
        }
        Ok(Lasso { alpha, beta })
    }
}

//! Connected cubic graphs by edge insertion.
//!
//! Edge insertion subdivides two edges (or one edge twice) and joins the two new
//! vertices. Every connected cubic pseudograph (loops and parallel edges allowed)
//! arises this way from one on two fewer vertices, starting from the two
//! pseudographs on two vertices. Each order is generated from the complete
//! pseudograph list of the previous one, isomorphs are removed by canonical key,
//! and only simple graphs are kept at the requested order.

use std::collections::BTreeMap;

use serde::Serialize;

use super::canon::{canonical_code, canonical_form, canonical_labeling, MAX_CANONICAL_ORDER};
use super::graph6::emit_graph6;
use crate::error::{CimError, Result};
use crate::model::Graph;

/// A graph in canonical vertex order together with its canonical code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalGraph {
    pub graph: Graph,
    pub canonical_code: String,
}

impl CanonicalGraph {
    pub fn new(g: &Graph) -> Result<Self> {
        Ok(Self {
            graph: canonical_form(g)?,
            canonical_code: canonical_code(g)?,
        })
    }
}

pub const MIN_CUBIC_ORDER: usize = 4;
pub const MAX_CUBIC_ORDER: usize = MAX_CANONICAL_ORDER;

/// Multiplicity matrix with loop counts on the diagonal.
#[derive(Clone)]
struct Pseudograph {
    n: usize,
    adj: Vec<u8>,
}

impl Pseudograph {
    fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self { n, adj: vec![0; n * n] };
        for &(a, b) in edges {
            g.add(a, b);
        }
        g
    }

    fn add(&mut self, a: usize, b: usize) {
        self.adj[a * self.n + b] += 1;
        if a != b {
            self.adj[b * self.n + a] += 1;
        }
    }

    fn remove(&mut self, a: usize, b: usize) {
        self.adj[a * self.n + b] -= 1;
        if a != b {
            self.adj[b * self.n + a] -= 1;
        }
    }

    /// Every edge once per multiplicity, as `(a, b)` with `a ≤ b`.
    fn edge_instances(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a..self.n {
                for _ in 0..self.adj[a * self.n + b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Copy with two more vertices and the old edges.
    fn grown(&self) -> Self {
        let m = self.n + 2;
        let mut adj = vec![0; m * m];
        for a in 0..self.n {
            adj[a * m..a * m + self.n].copy_from_slice(&self.adj[a * self.n..(a + 1) * self.n]);
        }
        Self { n: m, adj }
    }

    fn insert(&self, e1: (usize, usize), e2: Option<(usize, usize)>) -> Self {
        let mut h = self.grown();
        let (x, y) = (self.n, self.n + 1);
        h.remove(e1.0, e1.1);
        match e2 {
            None => {
                h.add(e1.0, x);
                h.add(x, y);
                h.add(x, y);
                h.add(y, e1.1);
            }
            Some(e2) => {
                h.remove(e2.0, e2.1);
                h.add(e1.0, x);
                h.add(x, e1.1);
                h.add(e2.0, y);
                h.add(y, e2.1);
                h.add(x, y);
            }
        }
        h
    }

    fn is_simple(&self) -> bool {
        let n = self.n;
        self.adj.iter().all(|&m| m <= 1) && (0..n).all(|k| self.adj[k * n + k] == 0)
    }

    fn relabeled(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut adj = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                adj[perm[a] * n + perm[b]] = self.adj[a * n + b];
            }
        }
        Self { n, adj }
    }

    fn to_graph(&self) -> Graph {
        let mut g = Graph::new(self.n).expect("positive order");
        for (a, b) in self.edge_instances() {
            g.add_edge(a, b, 1.0).expect("simple pseudograph");
        }
        g
    }
}

/// Canonical representatives of all extensions of `level`, keyed by canonical key.
fn next_level(level: &[Pseudograph], simple_only: bool) -> BTreeMap<Vec<u8>, Pseudograph> {
    let mut next = BTreeMap::new();
    for g in level {
        let edges = g.edge_instances();
        let mut consider = |h: Pseudograph| {
            if simple_only && !h.is_simple() {
                return;
            }
            let (key, perm) = canonical_labeling(h.n, &h.adj);
            next.entry(key).or_insert_with(|| h.relabeled(&perm));
        };
        for a in 0..edges.len() {
            consider(g.insert(edges[a], None));
            for b in a + 1..edges.len() {
                consider(g.insert(edges[a], Some(edges[b])));
            }
        }
    }
    next
}

/// All connected cubic graphs of the given even order up to isomorphism, sorted by
/// canonical code.
pub fn enumerate_cubic(order: usize) -> Result<Vec<CanonicalGraph>> {
    if !order.is_multiple_of(2) || !(MIN_CUBIC_ORDER..=MAX_CUBIC_ORDER).contains(&order) {
        return Err(CimError::OrderOutOfRange {
            order,
            min: MIN_CUBIC_ORDER,
            max: MAX_CUBIC_ORDER,
        });
    }
    let theta = Pseudograph::from_edges(2, &[(0, 1), (0, 1), (0, 1)]);
    let dumbbell = Pseudograph::from_edges(2, &[(0, 0), (0, 1), (1, 1)]);
    let mut level = vec![theta, dumbbell];
    let mut n = 2;
    while n < order {
        n += 2;
        level = next_level(&level, n == order).into_values().collect();
    }
    let mut out = level
        .iter()
        .map(|g| {
            let graph = g.to_graph();
            let canonical_code = emit_graph6(&graph)?;
            Ok(CanonicalGraph { graph, canonical_code })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.canonical_code.cmp(&b.canonical_code));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{emit_graph6, parse_graph6};

    #[test]
    fn small_counts() {
        let counts: Vec<usize> = [4, 6, 8, 10]
            .iter()
            .map(|&n| enumerate_cubic(n).unwrap().len())
            .collect();
        assert_eq!(counts, vec![1, 2, 5, 19]);
    }

    #[test]
    fn outputs_are_connected_cubic_and_sorted() {
        let gs = enumerate_cubic(10).unwrap();
        for g in &gs {
            assert!(g.graph.is_regular(3) && g.graph.is_connected());
            assert_eq!(emit_graph6(&g.graph).unwrap(), g.canonical_code);
        }
        assert!(gs.windows(2).all(|w| w[0].canonical_code < w[1].canonical_code));
    }

    #[test]
    fn codes_agree_with_canonical_code() {
        for g in enumerate_cubic(8).unwrap() {
            assert_eq!(canonical_code(&g.graph).unwrap(), g.canonical_code);
            assert_eq!(CanonicalGraph::new(&g.graph).unwrap(), g);
        }
    }

    #[test]
    fn order_eight_round_trips() {
        for g in enumerate_cubic(8).unwrap() {
            let text = emit_graph6(&g.graph).unwrap();
            assert_eq!(parse_graph6(&text).unwrap(), g.graph);
        }
    }

    #[test]
    fn order_guard() {
        for bad in [2, 5, 15, 16] {
            assert!(matches!(enumerate_cubic(bad), Err(CimError::OrderOutOfRange { .. })));
        }
    }
}

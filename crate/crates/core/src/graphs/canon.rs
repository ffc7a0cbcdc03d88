//! Canonical labeling by individualization–refinement with automorphism pruning.
//!
//! Graphs are handled as symmetric multiplicity matrices with loop counts on the
//! diagonal. The canonical form is the relabeling whose key (upper-triangle entries
//! in graph6 order, then the diagonal) is lexicographically smallest among the
//! leaves of the search tree. The tree and the leaf set depend only on the
//! isomorphism class, so the minimum is a complete invariant. For simple graphs
//! the key order coincides with the order of graph6 bit strings.

use super::graph6::pack_bits;
use crate::error::{CimError, Result};
use crate::model::Graph;

/// Largest order accepted by [`canonical_code`].
pub const MAX_CANONICAL_ORDER: usize = 14;

type Partition = Vec<Vec<usize>>;

struct Search<'a> {
    n: usize,
    adj: &'a [u8],
    first: Option<(Vec<u8>, Vec<usize>)>,
    best: Option<(Vec<u8>, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn count_into(&self, v: usize, cell: &[usize]) -> u32 {
        cell.iter().map(|&u| self.adj[v * self.n + u] as u32).sum()
    }

    /// Coarsest equitable refinement. Cells are split in an order that depends only
    /// on the partition structure, with sub-cells sorted by neighbour count.
    fn refine(&self, part: &mut Partition) {
        'outer: loop {
            for s in 0..part.len() {
                for c in 0..part.len() {
                    if part[c].len() < 2 {
                        continue;
                    }
                    let counts: Vec<u32> = part[c].iter().map(|&v| self.count_into(v, &part[s])).collect();
                    if counts.iter().all(|&k| k == counts[0]) {
                        continue;
                    }
                    let mut keyed: Vec<(u32, usize)> = counts.into_iter().zip(part[c].iter().copied()).collect();
                    keyed.sort_unstable();
                    let mut pieces: Vec<Vec<usize>> = Vec::new();
                    let mut last = None;
                    for (k, v) in keyed {
                        if last != Some(k) {
                            pieces.push(Vec::new());
                            last = Some(k);
                        }
                        pieces.last_mut().expect("piece pushed").push(v);
                    }
                    part.splice(c..=c, pieces);
                    continue 'outer;
                }
            }
            return;
        }
    }

    fn leaf(&mut self, part: &Partition) {
        // position k holds vertex inv[k]
        let inv: Vec<usize> = part.iter().map(|cell| cell[0]).collect();
        let n = self.n;
        let mut code = Vec::with_capacity(n * (n + 1) / 2);
        for j in 1..n {
            for i in 0..j {
                code.push(self.adj[inv[i] * n + inv[j]]);
            }
        }
        code.extend((0..n).map(|k| self.adj[inv[k] * n + inv[k]]));
        let mut pos = vec![0; self.n];
        for (k, &v) in inv.iter().enumerate() {
            pos[v] = k;
        }
        for (ref_code, ref_pos) in [&self.first, &self.best].into_iter().flatten() {
            if *ref_code == code {
                // u ↦ ref⁻¹(pos(u)) maps the graph onto itself
                let mut ref_inv = vec![0; self.n];
                for (v, &k) in ref_pos.iter().enumerate() {
                    ref_inv[k] = v;
                }
                let auto: Vec<usize> = (0..self.n).map(|u| ref_inv[pos[u]]).collect();
                if auto.iter().enumerate().any(|(u, &w)| u != w) {
                    self.automorphisms.push(auto);
                }
                break;
            }
        }
        if self.first.is_none() {
            self.first = Some((code.clone(), pos.clone()));
        }
        if self.best.as_ref().is_none_or(|(b, _)| code < *b) {
            self.best = Some((code, pos));
        }
    }

    /// Whether `v` shares an orbit with an explored sibling under the known
    /// automorphisms that fix `prefix` pointwise.
    fn equivalent_to_explored(&self, prefix: &[usize], explored: &[usize], v: usize) -> bool {
        if explored.is_empty() {
            return false;
        }
        let gens: Vec<&Vec<usize>> = self
            .automorphisms
            .iter()
            .filter(|a| prefix.iter().all(|&x| a[x] == x))
            .collect();
        if gens.is_empty() {
            return false;
        }
        let mut orbit = vec![false; self.n];
        orbit[v] = true;
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for a in &gens {
                let y = a[x];
                if !orbit[y] {
                    orbit[y] = true;
                    stack.push(y);
                }
            }
        }
        explored.iter().any(|&u| orbit[u])
    }

    fn search(&mut self, mut part: Partition, prefix: &mut Vec<usize>) {
        self.refine(&mut part);
        let Some(target) = part.iter().position(|c| c.len() > 1) else {
            self.leaf(&part);
            return;
        };
        let cell = part[target].clone();
        let mut explored = Vec::new();
        for &v in &cell {
            if self.equivalent_to_explored(prefix, &explored, v) {
                continue;
            }
            let mut child = part.clone();
            let rest: Vec<usize> = cell.iter().copied().filter(|&u| u != v).collect();
            child.splice(target..=target, [vec![v], rest]);
            prefix.push(v);
            self.search(child, prefix);
            prefix.pop();
            explored.push(v);
        }
    }
}

/// Canonical key and relabeling of the multigraph with `n × n` multiplicity
/// matrix `adj` (loops on the diagonal). `perm[v]` is the canonical label of `v`.
pub(crate) fn canonical_labeling(n: usize, adj: &[u8]) -> (Vec<u8>, Vec<usize>) {
    let mut s = Search {
        n,
        adj,
        first: None,
        best: None,
        automorphisms: Vec::new(),
    };
    s.search(vec![(0..n).collect()], &mut Vec::new());
    s.best.expect("search reaches a leaf")
}

/// Canonical relabeling: `perm[v]` is the canonical label of vertex `v`.
pub fn canonical_permutation(g: &Graph) -> Result<Vec<usize>> {
    let n = g.order();
    if n > MAX_CANONICAL_ORDER {
        return Err(CimError::TooLarge {
            size: n,
            limit: MAX_CANONICAL_ORDER,
        });
    }
    let mut adj = vec![0u8; n * n];
    for (j, l, _) in g.edges() {
        adj[j * n + l] = 1;
        adj[l * n + j] = 1;
    }
    Ok(canonical_labeling(n, &adj).1)
}

/// Isomorphism-invariant label: the graph6 string of the canonical relabeling.
/// Edge weights are ignored.
pub fn canonical_code(g: &Graph) -> Result<String> {
    let perm = canonical_permutation(g)?;
    let n = g.order();
    let mut out = vec![n as u8 + 63];
    let mut adj = vec![vec![false; n]; n];
    for (j, l, _) in g.edges() {
        adj[perm[j]][perm[l]] = true;
        adj[perm[l]][perm[j]] = true;
    }
    pack_bits(n, |i, j| adj[i][j], &mut out);
    Ok(String::from_utf8(out).expect("graph6 bytes are ASCII"))
}

/// Unit-weight copy of `g` in canonical vertex order.
pub fn canonical_form(g: &Graph) -> Result<Graph> {
    let perm = canonical_permutation(g)?;
    let mut out = Graph::new(g.order())?;
    for (j, l, _) in g.edges() {
        out.add_edge(perm[j], perm[l], 1.0)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::emit_graph6;
    use proptest::prelude::*;

    fn k4() -> Graph {
        Graph::unweighted(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn k33() -> Graph {
        Graph::unweighted(
            6,
            &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)],
        )
        .unwrap()
    }

    fn prism() -> Graph {
        Graph::unweighted(
            6,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)],
        )
        .unwrap()
    }

    #[test]
    fn complete_graph_code() {
        assert_eq!(canonical_code(&k4()).unwrap(), "C~");
    }

    #[test]
    fn order_six_cubics_differ() {
        assert_ne!(canonical_code(&k33()).unwrap(), canonical_code(&prism()).unwrap());
    }

    #[test]
    fn empty_graph_code() {
        let g = Graph::new(3).unwrap();
        assert_eq!(canonical_code(&g).unwrap(), "B?");
        assert_eq!(canonical_code(&Graph::new(14).unwrap()).unwrap().len(), 1 + 16);
    }

    #[test]
    fn canonical_form_matches_code() {
        let f = canonical_form(&prism()).unwrap();
        assert_eq!(emit_graph6(&f).unwrap(), canonical_code(&prism()).unwrap());
    }

    #[test]
    fn order_guard() {
        assert!(matches!(
            canonical_code(&Graph::new(15).unwrap()),
            Err(CimError::TooLarge { size: 15, .. })
        ));
    }

    fn graph_from_bits(n: usize, bits: &[bool]) -> Graph {
        let mut g = Graph::new(n).unwrap();
        let mut k = 0;
        for j in 1..n {
            for i in 0..j {
                if bits[k] {
                    g.add_edge(i, j, 1.0).unwrap();
                }
                k += 1;
            }
        }
        g
    }

    fn arb_graph() -> impl Strategy<Value = (Graph, Vec<usize>)> {
        (1usize..=9).prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<bool>(), n * (n - 1) / 2),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            )
                .prop_map(move |(bits, perm)| (graph_from_bits(n, &bits), perm))
        })
    }

    fn arb_pair() -> impl Strategy<Value = (Graph, Graph)> {
        (1usize..=6).prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                proptest::collection::vec(any::<bool>(), pairs),
                proptest::collection::vec(any::<bool>(), pairs),
            )
                .prop_map(move |(a, b)| (graph_from_bits(n, &a), graph_from_bits(n, &b)))
        })
    }

    /// Smallest graph6 body over all n! relabelings.
    fn brute_force_code(g: &Graph) -> String {
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for i in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(i, n - 1);
                    out.push(q);
                }
            }
            out
        }
        permutations(g.order())
            .into_iter()
            .map(|p| emit_graph6(&g.relabeled(&p).unwrap()).unwrap())
            .min()
            .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn code_is_relabeling_invariant((g, perm) in arb_graph()) {
            let h = g.relabeled(&perm).unwrap();
            prop_assert_eq!(canonical_code(&g).unwrap(), canonical_code(&h).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn code_separates_isomorphism_classes((g, h) in arb_pair()) {
            let same_class = brute_force_code(&g) == brute_force_code(&h);
            prop_assert_eq!(canonical_code(&g).unwrap() == canonical_code(&h).unwrap(), same_class);
        }
    }
}

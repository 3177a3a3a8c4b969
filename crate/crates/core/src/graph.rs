//! Problem graphs for MaxCut: Erdos-Renyi generation, cut evaluation, and
//! the brute-force MaxCut oracle used for approximation ratios.
//!
//! Node set is always `{0..n-1}`; bit `i` of an assignment integer is the
//! partition side of node `i` (little-endian).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest node count the brute-force table will handle.
pub const MAX_QUBITS: usize = 16;

/// An undirected simple graph, the MaxCut problem instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub id: String,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, canonicalizing edges to `u < v` sorted order and
    /// validating endpoints.
    pub fn new(id: impl Into<String>, n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("graph must have at least one node".into()));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::Domain(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Domain(format!(
                    "edge ({a},{b}) endpoint out of range for n={n}"
                )));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        canon.dedup();
        if canon.len() != edges.len() {
            return Err(Error::Domain("duplicate edges".into()));
        }
        Ok(Graph {
            id: id.into(),
            n,
            edges: canon,
        })
    }

    /// Number of edges cut by the assignment `z` (bit i = side of node i).
    pub fn cut_value_bits(&self, z: u64) -> u32 {
        self.edges
            .iter()
            .filter(|&&(u, v)| (z >> u) & 1 != (z >> v) & 1)
            .count() as u32
    }

    /// Cut value for a bitstring assignment; character `i` is node `i`.
    pub fn cut_value(&self, assignment: &str) -> Result<u32> {
        if assignment.len() != self.n {
            return Err(Error::Domain(format!(
                "assignment has {} bits, graph has {} nodes",
                assignment.len(),
                self.n
            )));
        }
        let mut z = 0u64;
        for (i, c) in assignment.chars().enumerate() {
            match c {
                '0' => {}
                '1' => z |= 1 << i,
                _ => return Err(Error::Domain(format!("invalid bit character '{c}'"))),
            }
        }
        Ok(self.cut_value_bits(z))
    }
}

/// Cut values for every assignment; the diagonal of the cost Hamiltonian.
#[derive(Debug, Clone)]
pub struct CutTable {
    pub values: Vec<u32>,
    pub max_cut: u32,
}

impl CutTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Enumerates the cut value of all 2^n assignments.
pub fn cut_table(graph: &Graph) -> Result<CutTable> {
    if graph.n > MAX_QUBITS {
        return Err(Error::Resource(format!(
            "n={} exceeds limit of {MAX_QUBITS} qubits",
            graph.n
        )));
    }
    let size = 1usize << graph.n;
    let mut values = vec![0u32; size];
    for z in 0..size as u64 {
        values[z as usize] = graph.cut_value_bits(z);
    }
    let max_cut = values.iter().copied().max().unwrap_or(0);
    Ok(CutTable { values, max_cut })
}

/// Brute-force MaxCut: optimal value and the lowest-index witness.
pub fn max_cut(graph: &Graph) -> Result<(u32, String)> {
    let table = cut_table(graph)?;
    let (z, &value) = table
        .values
        .iter()
        .enumerate()
        .max_by(|(za, a), (zb, b)| a.cmp(b).then(zb.cmp(za)))
        .expect("table is never empty");
    let witness: String = (0..graph.n)
        .map(|i| if (z >> i) & 1 == 1 { '1' } else { '0' })
        .collect();
    Ok((value, witness))
}

/// Erdos-Renyi G(n, p): each candidate edge (u, v), u < v, is included
/// independently with probability `edge_prob`, decided in lexicographic
/// order from the seeded RNG.
pub fn erdos_renyi(n: usize, edge_prob: f64, seed: u64) -> Result<Graph> {
    if n < 1 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Domain(format!(
            "edge probability {edge_prob} not in [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < edge_prob {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph {
        id: format!("er-n{n}-s{seed}"),
        n,
        edges,
    })
}

/// Generates `count` graphs with at least one edge each; zero-edge draws are
/// discarded and the seed advanced, so MaxCut is never degenerate.
pub fn generate_graphs(n: usize, count: usize, edge_prob: f64, seed: u64) -> Result<Vec<Graph>> {
    if n < 2 || edge_prob <= 0.0 {
        return Err(Error::Domain(format!(
            "cannot generate edged graphs with n={n}, edge_prob={edge_prob}"
        )));
    }
    let mut graphs = Vec::with_capacity(count);
    let mut s = seed;
    while graphs.len() < count {
        let mut g = erdos_renyi(n, edge_prob, s)?;
        s = s.wrapping_add(1);
        if g.edges.is_empty() {
            continue;
        }
        g.id = format!("g{:04}", graphs.len());
        graphs.push(g);
    }
    Ok(graphs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k2() -> Graph {
        Graph::new("k2", 2, &[(0, 1)]).unwrap()
    }

    fn triangle() -> Graph {
        Graph::new("k3", 3, &[(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn erdos_renyi_forced_edge() {
        let g = erdos_renyi(2, 1.0, 7).unwrap();
        assert_eq!(g.edges, vec![(0, 1)]);
    }

    #[test]
    fn erdos_renyi_no_edges() {
        let g = erdos_renyi(5, 0.0, 7).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn erdos_renyi_deterministic() {
        let a = erdos_renyi(8, 0.5, 42).unwrap();
        let b = erdos_renyi(8, 0.5, 42).unwrap();
        assert_eq!(a.edges, b.edges);
    }

    #[test]
    fn erdos_renyi_rejects_bad_probability() {
        assert!(erdos_renyi(4, 1.5, 0).is_err());
        assert!(erdos_renyi(4, -0.1, 0).is_err());
        assert!(erdos_renyi(4, f64::NAN, 0).is_err());
    }

    #[test]
    fn erdos_renyi_edge_count_statistics() {
        // Mean edge count over many seeds within 3 sigma of p * C(n,2).
        let n = 8;
        let p = 0.5;
        let trials = 2000;
        let pairs = (n * (n - 1) / 2) as f64;
        let total: usize = (0..trials)
            .map(|s| erdos_renyi(n, p, s as u64).unwrap().edges.len())
            .sum();
        let mean = total as f64 / trials as f64;
        let sigma = (pairs * p * (1.0 - p) / trials as f64).sqrt();
        assert!((mean - pairs * p).abs() < 3.0 * sigma, "mean={mean}");
    }

    #[test]
    fn cut_value_examples() {
        assert_eq!(k2().cut_value("01").unwrap(), 1);
        assert_eq!(triangle().cut_value("001").unwrap(), 2);
        assert_eq!(triangle().cut_value("000").unwrap(), 0);
    }

    #[test]
    fn cut_value_length_mismatch() {
        assert!(k2().cut_value("011").is_err());
    }

    #[test]
    fn cut_table_k2() {
        let t = cut_table(&k2()).unwrap();
        assert_eq!(t.values, vec![0, 1, 1, 0]);
        assert_eq!(t.max_cut, 1);
    }

    #[test]
    fn cut_table_four_cycle() {
        let g = Graph::new("c4", 4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert_eq!(cut_table(&g).unwrap().max_cut, 4);
    }

    #[test]
    fn cut_table_k4() {
        let g = Graph::new("k4", 4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(cut_table(&g).unwrap().max_cut, 4);
    }

    #[test]
    fn cut_table_rejects_oversized() {
        let g = Graph::new("big", MAX_QUBITS + 1, &[(0, 1)]).unwrap();
        assert!(matches!(cut_table(&g), Err(Error::Resource(_))));
    }

    #[test]
    fn max_cut_triangle() {
        let (v, w) = max_cut(&triangle()).unwrap();
        assert_eq!(v, 2);
        assert_eq!(triangle().cut_value(&w).unwrap(), 2);
    }

    #[test]
    fn max_cut_k2_lowest_witness() {
        let (v, w) = max_cut(&k2()).unwrap();
        assert_eq!(v, 1);
        assert_eq!(w, "10"); // z=1 is the lowest maximizer
    }

    #[test]
    fn graph_new_rejects_bad_edges() {
        assert!(Graph::new("x", 3, &[(1, 1)]).is_err());
        assert!(Graph::new("x", 3, &[(0, 3)]).is_err());
        assert!(Graph::new("x", 3, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn generate_graphs_all_have_edges() {
        let gs = generate_graphs(5, 20, 0.1, 3).unwrap();
        assert_eq!(gs.len(), 20);
        assert!(gs.iter().all(|g| !g.edges.is_empty()));
    }

    proptest! {
        #[test]
        fn cut_complement_symmetry(seed in 0u64..1000, z in 0u64..256) {
            let g = erdos_renyi(8, 0.5, seed).unwrap();
            let mask = (1u64 << 8) - 1;
            prop_assert_eq!(g.cut_value_bits(z), g.cut_value_bits(!z & mask));
        }

        #[test]
        fn max_cut_matches_table(seed in 0u64..200) {
            let g = erdos_renyi(6, 0.5, seed).unwrap();
            let t = cut_table(&g).unwrap();
            let (v, w) = max_cut(&g).unwrap();
            prop_assert_eq!(v, t.max_cut);
            prop_assert_eq!(g.cut_value(&w).unwrap(), v);
        }
    }
}

//! Bipartite routing graph and its r-edge-coloring.
//!
//! The routing graph has one left node per source row, one right node per
//! destination row, and one edge per qubit, making an r-regular bipartite
//! multigraph. Hall's theorem guarantees it decomposes into r perfect
//! matchings; we peel them off one at a time with augmenting-path max-flow
//! (unit capacities, source attached to every left node and sink to every
//! right node), assigning each matching one color. Color `c` means "this
//! qubit's first-phase target column is `c`".

use crate::schedule::Permutation;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColoringError {
    #[error("permutation has length {len}, expected r * 2^r = {expected}")]
    SizeMismatch { len: usize, expected: usize },
    #[error("expected {expected} edges, got {got}")]
    EdgeCountMismatch { got: usize, expected: usize },
    #[error("node {side}{index} has degree {got}, expected {expected}")]
    NotRegular { side: char, index: usize, got: usize, expected: usize },
    #[error("matching round {round} is not perfect (matched {matched} of {rows})")]
    ImperfectMatching { round: usize, matched: usize, rows: usize },
}

/// One qubit's row movement: an edge of the bipartite routing graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoutingEdge {
    pub source_row: usize,
    pub dest_row: usize,
    pub qubit: usize,
}

/// r-regular bipartite multigraph on `2 * 2^r` nodes with `r * 2^r` edges.
#[derive(Debug, Clone)]
pub struct RoutingGraph {
    r: usize,
    rows: usize,
    edges: Vec<RoutingEdge>,
}

impl RoutingGraph {
    /// Validates the regularity invariants; accepts any r >= 1 so synthetic
    /// inputs can exercise the coloring in isolation.
    pub fn new(r: usize, edges: Vec<RoutingEdge>) -> Result<Self, ColoringError> {
        let rows = 1usize << r;
        let expected = r * rows;
        if edges.len() != expected {
            return Err(ColoringError::EdgeCountMismatch { got: edges.len(), expected });
        }
        let mut deg_u = vec![0usize; rows];
        let mut deg_v = vec![0usize; rows];
        for e in &edges {
            deg_u[e.source_row] += 1;
            deg_v[e.dest_row] += 1;
        }
        for (index, &d) in deg_u.iter().enumerate() {
            if d != r {
                return Err(ColoringError::NotRegular { side: 'u', index, got: d, expected: r });
            }
        }
        for (index, &d) in deg_v.iter().enumerate() {
            if d != r {
                return Err(ColoringError::NotRegular { side: 'v', index, got: d, expected: r });
            }
        }
        Ok(RoutingGraph { r, rows, edges })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn edges(&self) -> &[RoutingEdge] {
        &self.edges
    }
}

/// Edge-to-color assignment; proper iff no color repeats at any node on
/// either side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    colors: Vec<usize>,
    num_colors: usize,
}

impl EdgeColoring {
    pub fn new(colors: Vec<usize>, num_colors: usize) -> Self {
        EdgeColoring { colors, num_colors }
    }

    pub fn color(&self, edge: usize) -> usize {
        self.colors[edge]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }
}

/// One edge per qubit, from its current row to its destination row. Edges
/// are pushed in qubit order, so edge index equals qubit id.
pub fn build_routing_graph(pi: &Permutation, r: usize) -> Result<RoutingGraph, ColoringError> {
    let rows = 1usize << r;
    let n = r * rows;
    if pi.len() != n {
        return Err(ColoringError::SizeMismatch { len: pi.len(), expected: n });
    }
    let edges = (0..n)
        .map(|qubit| RoutingEdge {
            source_row: qubit / r,
            dest_row: pi.apply(qubit) / r,
            qubit,
        })
        .collect();
    RoutingGraph::new(r, edges)
}

/// Repeatedly extract a perfect matching from the uncolored remainder and
/// give it the next color. Each round runs augmenting-path max-flow over the
/// bipartite graph with deterministic tie-breaking: left nodes in ascending
/// order, incident edges in ascending edge order.
pub fn color_edges(rg: &RoutingGraph) -> Result<EdgeColoring, ColoringError> {
    let rows = rg.rows();
    let r = rg.r();
    let mut colors = vec![usize::MAX; rg.edges().len()];
    // Incident uncolored edges per left node, ascending.
    let mut incident: Vec<Vec<usize>> = vec![Vec::with_capacity(r); rows];
    for (idx, e) in rg.edges().iter().enumerate() {
        incident[e.source_row].push(idx);
    }
    for round in 0..r {
        // match_v[v] = edge currently matching right node v, if any.
        let mut match_v: Vec<Option<usize>> = vec![None; rows];
        let mut match_u: Vec<Option<usize>> = vec![None; rows];
        let mut visited = vec![u32::MAX; rows];
        let mut matched = 0;
        for u in 0..rows {
            if augment(u, rg, &incident, &colors, &mut match_u, &mut match_v, &mut visited, u as u32) {
                matched += 1;
            }
        }
        if matched != rows {
            // Impossible for a regular bipartite multigraph by Hall's
            // theorem; reaching this means the input invariants were broken.
            return Err(ColoringError::ImperfectMatching { round, matched, rows });
        }
        for entry in &match_v {
            let e = entry.expect("perfect matching");
            colors[e] = round;
        }
        for list in &mut incident {
            list.retain(|&e| colors[e] == usize::MAX);
        }
    }
    Ok(EdgeColoring { colors, num_colors: r })
}

/// Alternating-path search from left node `u` over uncolored edges.
#[allow(clippy::too_many_arguments)]
fn augment(
    u: usize,
    rg: &RoutingGraph,
    incident: &[Vec<usize>],
    colors: &[usize],
    match_u: &mut Vec<Option<usize>>,
    match_v: &mut Vec<Option<usize>>,
    visited: &mut Vec<u32>,
    stamp: u32,
) -> bool {
    for &e in &incident[u] {
        if colors[e] != usize::MAX {
            continue;
        }
        let v = rg.edges()[e].dest_row;
        if visited[v] == stamp {
            continue;
        }
        visited[v] = stamp;
        let free = match match_v[v] {
            None => true,
            Some(prev) => {
                let owner = rg.edges()[prev].source_row;
                augment(owner, rg, incident, colors, match_u, match_v, visited, stamp)
            }
        };
        if free {
            match_v[v] = Some(e);
            match_u[u] = Some(e);
            return true;
        }
    }
    false
}

/// Independent properness scan: every color in range and no color repeated
/// at any node on either side.
pub fn validate_coloring(rg: &RoutingGraph, c: &EdgeColoring) -> bool {
    let rows = rg.rows();
    let r = rg.r();
    if c.colors().len() != rg.edges().len() {
        return false;
    }
    let mut seen_u = vec![vec![false; r]; rows];
    let mut seen_v = vec![vec![false; r]; rows];
    for (idx, e) in rg.edges().iter().enumerate() {
        let color = c.color(idx);
        if color >= r {
            return false;
        }
        if seen_u[e.source_row][color] || seen_v[e.dest_row][color] {
            return false;
        }
        seen_u[e.source_row][color] = true;
        seen_v[e.dest_row][color] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotate_rows_perm(r: usize) -> Permutation {
        let rows = 1 << r;
        let image = (0..r * rows)
            .map(|q| {
                let (w, i) = (q / r, q % r);
                ((w + 1) % rows) * r + i
            })
            .collect();
        Permutation::new(image).unwrap()
    }

    /// Deterministic pseudo-random permutation without pulling in an RNG.
    fn scrambled_perm(n: usize, seed: u64) -> Permutation {
        let mut image: Vec<usize> = (0..n).collect();
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            image.swap(i, j);
        }
        Permutation::new(image).unwrap()
    }

    #[test]
    fn identity_gives_parallel_edges() {
        let rg = build_routing_graph(&Permutation::identity(24), 3).unwrap();
        assert_eq!(rg.edges().len(), 24);
        for e in rg.edges() {
            assert_eq!(e.source_row, e.dest_row);
        }
        let c = color_edges(&rg).unwrap();
        assert!(validate_coloring(&rg, &c));
        // The three parallel edges at each source row take distinct colors.
        for w in 0..8 {
            let mut cols: Vec<usize> = rg
                .edges()
                .iter()
                .enumerate()
                .filter(|(_, e)| e.source_row == w)
                .map(|(i, _)| c.color(i))
                .collect();
            cols.sort_unstable();
            assert_eq!(cols, vec![0, 1, 2]);
        }
    }

    #[test]
    fn rotate_rows_structure() {
        let rg = build_routing_graph(&rotate_rows_perm(3), 3).unwrap();
        for e in rg.edges() {
            assert_eq!(e.dest_row, (e.source_row + 1) % 8);
        }
        let c = color_edges(&rg).unwrap();
        assert!(validate_coloring(&rg, &c));
    }

    #[test]
    fn random_perm_degrees_are_regular() {
        for seed in 0..20 {
            let pi = scrambled_perm(24, seed);
            // RoutingGraph::new checks both-side degrees; success is the test.
            let rg = build_routing_graph(&pi, 3).unwrap();
            assert_eq!(rg.edges().len(), 24);
        }
    }

    #[test]
    fn random_colorings_proper_with_exactly_r_colors() {
        for seed in 0..200 {
            let pi = scrambled_perm(24, seed);
            let rg = build_routing_graph(&pi, 3).unwrap();
            let c = color_edges(&rg).unwrap();
            assert!(validate_coloring(&rg, &c), "seed {}", seed);
            assert_eq!(c.num_colors(), 3);
            let used: std::collections::BTreeSet<usize> = c.colors().iter().copied().collect();
            assert_eq!(used.len(), 3);
        }
    }

    #[test]
    fn color_classes_are_perfect_matchings() {
        let pi = scrambled_perm(64, 7);
        let rg = build_routing_graph(&pi, 4).unwrap();
        let c = color_edges(&rg).unwrap();
        for color in 0..4 {
            let mut u_seen = vec![false; 16];
            let mut v_seen = vec![false; 16];
            for (idx, e) in rg.edges().iter().enumerate() {
                if c.color(idx) == color {
                    assert!(!u_seen[e.source_row] && !v_seen[e.dest_row]);
                    u_seen[e.source_row] = true;
                    v_seen[e.dest_row] = true;
                }
            }
            assert!(u_seen.iter().all(|&x| x) && v_seen.iter().all(|&x| x));
        }
    }

    #[test]
    fn remainder_after_k_color_classes_is_regular() {
        let pi = scrambled_perm(160, 3);
        let rg = build_routing_graph(&pi, 5).unwrap();
        let c = color_edges(&rg).unwrap();
        // Peeling the first k color classes leaves every node with degree
        // exactly r - k on both sides.
        for k in 0..=5 {
            let mut deg_u = vec![0usize; 32];
            let mut deg_v = vec![0usize; 32];
            for (idx, e) in rg.edges().iter().enumerate() {
                if c.color(idx) >= k {
                    deg_u[e.source_row] += 1;
                    deg_v[e.dest_row] += 1;
                }
            }
            assert!(deg_u.iter().all(|&d| d == 5 - k), "k={}", k);
            assert!(deg_v.iter().all(|&d| d == 5 - k), "k={}", k);
        }
    }

    #[test]
    fn one_regular_synthetic_graph_takes_single_color() {
        // r = 1: two rows, one edge each; the unique perfect matching.
        let edges = vec![
            RoutingEdge { source_row: 0, dest_row: 1, qubit: 0 },
            RoutingEdge { source_row: 1, dest_row: 0, qubit: 1 },
        ];
        let rg = RoutingGraph::new(1, edges).unwrap();
        let c = color_edges(&rg).unwrap();
        assert_eq!(c.colors(), &[0, 0]);
        assert!(validate_coloring(&rg, &c));
    }

    #[test]
    fn validate_rejects_repeat_at_node() {
        let rg = build_routing_graph(&Permutation::identity(24), 3).unwrap();
        // All edges color 0: parallel edges at each node collide.
        let bad = EdgeColoring::new(vec![0; 24], 3);
        assert!(!validate_coloring(&rg, &bad));
    }

    #[test]
    fn validate_rejects_out_of_range_color() {
        let rg = build_routing_graph(&Permutation::identity(24), 3).unwrap();
        let c = color_edges(&rg).unwrap();
        let mut colors = c.colors().to_vec();
        colors[5] = 3; // colors must lie in [0, r)
        assert!(!validate_coloring(&rg, &EdgeColoring::new(colors, 3)));
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let err = build_routing_graph(&Permutation::identity(25), 3).unwrap_err();
        assert_eq!(err, ColoringError::SizeMismatch { len: 25, expected: 24 });
    }
}

//! The cyclic (wrapped) butterfly interaction graph and its variants.
//!
//! An `r`-dimensional cyclic butterfly has `n = r * 2^r` nodes arranged as an
//! `2^r x r` array. Node `(w, i)` sits in row `w` (an `r`-bit word) and column
//! `i`. Nodes `(w, i)` and `(v, i+1 mod r)` are joined by an edge when `w = v`
//! (a straight edge) or when `w` and `v` differ in exactly bit position `i`
//! (a cross edge). Every node has degree 4.
//!
//! Bit positions are counted from the most-significant end of the printed
//! `r`-bit word, so the column-0 cross edges join rows `000...` and `100...`.
//! The opposite convention yields an isomorphic graph; only printed labels
//! and fixtures depend on the choice.

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    /// r = 1 produces self-loops and r = 2 parallel edges, so the degree-4
    /// invariant only holds as a simple graph from r = 3 up.
    #[error("butterfly dimension must be at least 3, got {0}")]
    DimensionTooSmall(usize),
    #[error("k-ary butterfly requires k >= 2, got {0}")]
    ArityTooSmall(usize),
}

/// A butterfly vertex: row word `w` and column index `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub row: usize,
    pub column: usize,
}

impl NodeId {
    pub fn new(row: usize, column: usize) -> Self {
        NodeId { row, column }
    }
}

/// Whether an edge stays in its row or crosses to the bit-flipped row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Straight,
    Cross,
}

/// The degree-4 cyclic butterfly graph.
///
/// Nodes are addressed either by [`NodeId`] or by the canonical linear index
/// `row * r + column`, which keeps each row contiguous.
#[derive(Debug, Clone)]
pub struct ButterflyGraph {
    r: usize,
    rows: usize,
    n: usize,
    adjacency: Vec<Vec<usize>>,
}

/// Build the `r`-dimensional cyclic butterfly. Rejects `r < 3`.
pub fn build_butterfly(r: usize) -> Result<ButterflyGraph, TopologyError> {
    if r < 3 {
        return Err(TopologyError::DimensionTooSmall(r));
    }
    let rows = 1usize << r;
    let n = r * rows;
    let mut adjacency = vec![Vec::with_capacity(4); n];
    for w in 0..rows {
        for i in 0..r {
            let here = w * r + i;
            let fwd = (i + 1) % r;
            let bwd = (i + r - 1) % r;
            let others = [
                w * r + fwd,
                (w ^ cross_mask(r, i)) * r + fwd,
                w * r + bwd,
                (w ^ cross_mask(r, bwd)) * r + bwd,
            ];
            adjacency[here].extend_from_slice(&others);
        }
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
    }
    Ok(ButterflyGraph { r, rows, n, adjacency })
}

/// Bit mask for cross edges between columns `i` and `i+1`: position `i`
/// counted from the most-significant end of the `r`-bit row word.
fn cross_mask(r: usize, i: usize) -> usize {
    1 << (r - 1 - i)
}

impl ButterflyGraph {
    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of rows, `2^r`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Total node count, `r * 2^r`.
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn cross_mask(&self, column: usize) -> usize {
        cross_mask(self.r, column)
    }

    /// Canonical linear index of a node.
    pub fn index(&self, node: NodeId) -> usize {
        assert!(node.row < self.rows && node.column < self.r, "node out of range");
        node.row * self.r + node.column
    }

    pub fn node(&self, index: usize) -> NodeId {
        assert!(index < self.n, "index out of range");
        NodeId::new(index / self.r, index % self.r)
    }

    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adjacency[index]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adjacency[index].len()
    }

    pub fn is_edge(&self, a: NodeId, b: NodeId) -> bool {
        assert!(a.row < self.rows && a.column < self.r, "node out of range");
        assert!(b.row < self.rows && b.column < self.r, "node out of range");
        self.edge_kind(a, b).is_some()
    }

    pub fn is_edge_index(&self, a: usize, b: usize) -> bool {
        self.is_edge(self.node(a), self.node(b))
    }

    /// Classify the edge `{a, b}`, or `None` if the pair is not an edge.
    pub fn edge_kind(&self, a: NodeId, b: NodeId) -> Option<EdgeKind> {
        // Orient so that `lo` is the lower column of an adjacent-column pair.
        let (lo, hi) = if (a.column + 1) % self.r == b.column {
            (a, b)
        } else if (b.column + 1) % self.r == a.column {
            (b, a)
        } else {
            return None;
        };
        if lo.row == hi.row {
            // Same node is not an edge; for r >= 3 equal rows with equal
            // columns never reach here because the column test fails.
            Some(EdgeKind::Straight)
        } else if lo.row ^ hi.row == cross_mask(self.r, lo.column) {
            Some(EdgeKind::Cross)
        } else {
            None
        }
    }

    /// All edges as canonical index pairs `(min, max)`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n * 2);
        for a in 0..self.n {
            for &b in &self.adjacency[a] {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Row label printed as an `r`-bit binary word, most-significant bit first.
    pub fn row_label(&self, row: usize) -> String {
        format!("{:0width$b}", row, width = self.r)
    }

    pub fn node_label(&self, index: usize) -> String {
        let node = self.node(index);
        format!("{}:{}", self.row_label(node.row), node.column)
    }

    pub fn to_dot(&self) -> String {
        render_dot("butterfly", &self.adjacency, &|i| self.node_label(i))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "kind": "butterfly",
            "r": self.r,
            "n": self.n,
            "adjacency": adjacency_object(&self.adjacency),
        })
    }
}

/// Merge the `r` nodes of every row into one vertex. The result is the
/// `r`-dimensional hypercube on the row words: rows `u` and `v` are adjacent
/// iff they differ in exactly one bit.
pub fn quotient_rows(g: &ButterflyGraph) -> SimpleGraph {
    let rows = g.rows();
    let mut adjacency = vec![Vec::new(); rows];
    for (a, b) in g.edges() {
        let (u, v) = (g.node(a).row, g.node(b).row);
        if u != v {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
        nbrs.dedup();
    }
    SimpleGraph { adjacency }
}

/// Plain undirected graph used for row quotients and variant topologies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adjacency: Vec<Vec<usize>>,
}

impl SimpleGraph {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adjacency[index]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adjacency[index].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }
}

/// Variant topologies from the degree/time trade-off constructions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VariantKind {
    /// k-ary cyclic butterfly: rows are base-k words, degree 2k.
    KAry { r: usize, k: usize },
    /// Each butterfly node replaced by a 4-ring, degree 3 everywhere.
    RingExpanded { r: usize },
}

#[derive(Debug, Clone)]
pub struct VariantGraph {
    pub kind: VariantKind,
    pub graph: SimpleGraph,
}

/// Build the k-ary cyclic butterfly on `r * k^r` nodes: rows are base-k words
/// of `r` digits, and `(w, i)`-`(v, i+1 mod r)` is an edge iff `w = v` or the
/// words differ only in digit position `i` (most-significant digit first).
/// Every node has degree `2k`; `k = 2` reproduces the binary butterfly.
pub fn build_kary_butterfly(r: usize, k: usize) -> Result<VariantGraph, TopologyError> {
    if r < 3 {
        return Err(TopologyError::DimensionTooSmall(r));
    }
    if k < 2 {
        return Err(TopologyError::ArityTooSmall(k));
    }
    let rows = k.pow(r as u32);
    let n = r * rows;
    let mut adjacency = vec![Vec::with_capacity(2 * k); n];
    for w in 0..rows {
        for i in 0..r {
            let here = w * r + i;
            let fwd = (i + 1) % r;
            for v in digit_variants(w, r, k, i) {
                let there = v * r + fwd;
                adjacency[here].push(there);
                adjacency[there].push(here);
            }
        }
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
    }
    Ok(VariantGraph {
        kind: VariantKind::KAry { r, k },
        graph: SimpleGraph { adjacency },
    })
}

/// All k words equal to `w` except possibly at digit position `i` (including
/// `w` itself).
fn digit_variants(w: usize, r: usize, k: usize, i: usize) -> Vec<usize> {
    let place = k.pow((r - 1 - i) as u32);
    let digit = (w / place) % k;
    let base = w - digit * place;
    (0..k).map(|d| base + d * place).collect()
}

/// Replace every butterfly node by a ring of 4 vertices, each carrying one of
/// the node's incident edges. The incident edges of `(w, i)` are ordered
/// (straight-forward, cross-forward, straight-backward, cross-backward) and
/// attached to ring vertices 0..3 in that order, so every vertex ends up with
/// two ring edges plus one original edge: degree exactly 3.
pub fn ring_expand(g: &ButterflyGraph) -> VariantGraph {
    let r = g.r();
    let n = g.node_count();
    let mut adjacency = vec![Vec::with_capacity(3); 4 * n];
    // Ring slot holding the edge toward `other` as seen from `node`.
    let slot = |node: NodeId, other: NodeId| -> usize {
        let fwd = (node.column + 1) % r == other.column;
        match (fwd, node.row == other.row) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }
    };
    for idx in 0..n {
        for s in 0..4usize {
            let a = idx * 4 + s;
            let b = idx * 4 + (s + 1) % 4;
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    for (a, b) in g.edges() {
        let (na, nb) = (g.node(a), g.node(b));
        let va = a * 4 + slot(na, nb);
        let vb = b * 4 + slot(nb, na);
        adjacency[va].push(vb);
        adjacency[vb].push(va);
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
    }
    VariantGraph {
        kind: VariantKind::RingExpanded { r },
        graph: SimpleGraph { adjacency },
    }
}

impl VariantGraph {
    pub fn node_label(&self, index: usize) -> String {
        match self.kind {
            VariantKind::KAry { r, k } => {
                let (w, i) = (index / r, index % r);
                let mut digits = String::new();
                for pos in 0..r {
                    let place = k.pow((r - 1 - pos) as u32);
                    digits.push(char::from_digit(((w / place) % k) as u32, 36).unwrap());
                }
                format!("{}:{}", digits, i)
            }
            VariantKind::RingExpanded { r } => {
                let (orig, slot) = (index / 4, index % 4);
                let (w, i) = (orig / r, orig % r);
                format!("{:0width$b}:{}.{}", w, i, slot, width = r)
            }
        }
    }

    pub fn to_dot(&self) -> String {
        let name = match self.kind {
            VariantKind::KAry { .. } => "kary_butterfly",
            VariantKind::RingExpanded { .. } => "ring_expanded_butterfly",
        };
        render_dot(name, &self.graph.adjacency, &|i| self.node_label(i))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut value = json!({
            "n": self.graph.node_count(),
            "adjacency": adjacency_object(&self.graph.adjacency),
        });
        let obj = value.as_object_mut().unwrap();
        match self.kind {
            VariantKind::KAry { r, k } => {
                obj.insert("kind".into(), json!("kary"));
                obj.insert("r".into(), json!(r));
                obj.insert("k".into(), json!(k));
            }
            VariantKind::RingExpanded { r } => {
                obj.insert("kind".into(), json!("ring_expanded"));
                obj.insert("r".into(), json!(r));
            }
        }
        value
    }
}

fn render_dot(name: &str, adjacency: &[Vec<usize>], label: &dyn Fn(usize) -> String) -> String {
    let mut out = format!("graph {} {{\n", name);
    for (a, nbrs) in adjacency.iter().enumerate() {
        for &b in nbrs {
            if a < b {
                out.push_str(&format!("  \"{}\" -- \"{}\";\n", label(a), label(b)));
            }
        }
    }
    out.push_str("}\n");
    out
}

fn adjacency_object(adjacency: &[Vec<usize>]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (i, nbrs) in adjacency.iter().enumerate() {
        map.insert(i.to_string(), json!(nbrs));
    }
    serde_json::Value::Object(map)
}

//! Maximum cardinality matching in a general graph (Edmonds' blossom
//! algorithm), used to precompute the disjoint edge set that gate pairs are
//! routed onto. The butterfly contains odd cycles (each row is an r-cycle),
//! so bipartite matching is not enough here.
//!
//! Deterministic throughout: roots are tried in ascending order and
//! neighbours scanned in adjacency order, so equal inputs give equal
//! matchings.

const NONE: usize = usize::MAX;

/// Maximum matching of the graph given as adjacency lists. Returns the
/// matched pairs as `(min, max)`, sorted.
pub fn maximum_matching(adjacency: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let n = adjacency.len();
    let mut mate = vec![NONE; n];
    // Greedy seed; the augmenting search below fixes whatever it misses.
    for v in 0..n {
        if mate[v] != NONE {
            continue;
        }
        for &u in &adjacency[v] {
            if u != v && mate[u] == NONE {
                mate[v] = u;
                mate[u] = v;
                break;
            }
        }
    }
    let mut search = Search {
        adjacency,
        mate: &mut mate,
        parent: vec![NONE; n],
        base: (0..n).collect(),
        in_queue: vec![false; n],
        in_blossom: vec![false; n],
    };
    for root in 0..n {
        if search.mate[root] == NONE {
            search.augment_from(root);
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .filter(|&v| mate[v] != NONE && v < mate[v])
        .map(|v| (v, mate[v]))
        .collect();
    pairs.sort_unstable();
    pairs
}

struct Search<'a> {
    adjacency: &'a [Vec<usize>],
    mate: &'a mut Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    in_queue: Vec<bool>,
    in_blossom: Vec<bool>,
}

impl Search<'_> {
    /// Grow an alternating tree from `root`, contracting blossoms as they
    /// appear; on finding an exposed vertex, flip the path.
    fn augment_from(&mut self, root: usize) -> bool {
        let n = self.adjacency.len();
        self.parent.iter_mut().for_each(|p| *p = NONE);
        self.in_queue.iter_mut().for_each(|q| *q = false);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.in_queue[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for idx in 0..self.adjacency[v].len() {
                let to = self.adjacency[v][idx];
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    // Odd cycle: contract the blossom around its stem.
                    let stem = self.lowest_common_base(v, to);
                    self.in_blossom.iter_mut().for_each(|b| *b = false);
                    self.mark_path(v, stem, to);
                    self.mark_path(to, stem, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = stem;
                            if !self.in_queue[i] {
                                self.in_queue[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        self.flip_path(to);
                        return true;
                    }
                    let next = self.mate[to];
                    if !self.in_queue[next] {
                        self.in_queue[next] = true;
                        queue.push_back(next);
                    }
                }
            }
        }
        false
    }

    fn lowest_common_base(&self, a: usize, b: usize) -> usize {
        let n = self.adjacency.len();
        let mut seen = vec![false; n];
        let mut cur = a;
        loop {
            cur = self.base[cur];
            seen[cur] = true;
            if self.mate[cur] == NONE {
                break;
            }
            cur = self.parent[self.mate[cur]];
        }
        cur = b;
        loop {
            cur = self.base[cur];
            if seen[cur] {
                return cur;
            }
            cur = self.parent[self.mate[cur]];
        }
    }

    fn mark_path(&mut self, mut v: usize, stem: usize, mut child: usize) {
        while self.base[v] != stem {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    fn flip_path(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let next = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = next;
        }
    }
}

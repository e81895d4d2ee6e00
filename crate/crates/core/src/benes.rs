//! Benes switch settings and pipelined column routing.
//!
//! Traversing the butterfly forward through all r columns and back again
//! gives every qubit 2r chances to flip one row bit, in the cyclic order
//! determined by its starting column. That traversal embeds a 2r-1 level
//! Benes network (one level is slack), so any permutation of the 2^r row
//! labels can be realized without collisions. Because the graph is invariant
//! under column rotation, all r columns traverse their own Benes network
//! simultaneously: 2r shift layers route every column's row permutation at
//! once, with every node sending one qubit and receiving one per layer.
//!
//! Switch settings come from the classical looping algorithm: the outermost
//! bit level pairs positions `{x, x ^ mask}`, the constraint cycles between
//! input pairs and output pairs are 2-colored, and the two halves recurse on
//! the remaining bits. Cycle coloring is deterministic: each cycle starts at
//! its smallest position, which is routed straight into its own half.

use crate::schedule::Layer;
use crate::topology::ButterflyGraph;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenesError {
    #[error("target has length {got}, expected 2^{bits} = {expected}")]
    WidthMismatch { got: usize, bits: usize, expected: usize },
    #[error("target is not a bijection: value {value} at index {index}")]
    NotBijective { index: usize, value: usize },
    #[error("bit order {0:?} is not a permutation of 0..{1}")]
    BadBitOrder(Vec<usize>, usize),
    #[error("column set has {got} columns of {rows} rows, graph wants {want_cols} x {want_rows}")]
    DimensionMismatch { got: usize, rows: usize, want_cols: usize, want_rows: usize },
}

/// Per-level keep/flip decisions realizing one row permutation over the
/// forward-and-back column traversal.
///
/// Level `t` of the plan is hosted by shift layer `t`: levels `0..r-1` move
/// forward, levels `r..2r` move backward. Level `r-1` (the last forward
/// step) is the slack level and never flips; the remaining 2r-1 levels are
/// the Benes levels proper. `flips[t][w]` says whether the item currently at
/// virtual row `w` crosses at level `t`; decisions are pair-consistent, so
/// every level map is a bijection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenesPlan {
    width: usize,
    bit_order: Vec<usize>,
    flips: Vec<Vec<bool>>,
}

impl BenesPlan {
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of levels, `2 * bit_order.len()`.
    pub fn depth(&self) -> usize {
        self.flips.len()
    }

    pub fn bit_order(&self) -> &[usize] {
        &self.bit_order
    }

    pub fn flips(&self, level: usize) -> &[bool] {
        &self.flips[level]
    }

    /// Bit position active at a level, `None` for the slack level.
    pub fn level_bit(&self, level: usize) -> Option<usize> {
        let m = self.bit_order.len();
        if level + 1 == m {
            None
        } else if level < m {
            Some(self.bit_order[level])
        } else if level == m {
            Some(self.bit_order[m - 1])
        } else {
            Some(self.bit_order[2 * m - 1 - level])
        }
    }

    fn level_mask(&self, level: usize) -> usize {
        let m = self.bit_order.len();
        match self.level_bit(level) {
            Some(bit) => 1 << (m - 1 - bit),
            None => 0,
        }
    }

    /// Row-to-row map of one level; always a bijection for valid plans.
    pub fn level_map(&self, level: usize) -> Vec<usize> {
        let mask = self.level_mask(level);
        (0..self.width)
            .map(|w| if self.flips[level][w] { w ^ mask } else { w })
            .collect()
    }

    /// Every level is collision-free: flip decisions agree across each
    /// `{w, w ^ mask}` pair and no level flips at the slack position.
    pub fn collision_free(&self) -> bool {
        (0..self.depth()).all(|t| {
            let mask = self.level_mask(t);
            if mask == 0 {
                return self.flips[t].iter().all(|&f| !f);
            }
            (0..self.width).all(|w| self.flips[t][w] == self.flips[t][w ^ mask])
        })
    }

    /// Compose all levels from the identity: `result[w]` is where the item
    /// starting at row `w` ends up.
    pub fn simulate(&self) -> Vec<usize> {
        let mut pos: Vec<usize> = (0..self.width).collect(); // item -> row
        for t in 0..self.depth() {
            let mask = self.level_mask(t);
            for p in pos.iter_mut() {
                if self.flips[t][*p] {
                    *p ^= mask;
                }
            }
        }
        pos
    }
}

struct LoopCtx<'a> {
    masks: Vec<usize>,
    flips: &'a mut Vec<Vec<bool>>,
    pos_item: Vec<usize>,
    item_pos: Vec<usize>,
    goal: Vec<usize>,
    item_at_goal: Vec<usize>,
    half: Vec<u8>,
    colored: Vec<bool>,
}

impl LoopCtx<'_> {
    fn swap_positions(&mut self, x: usize, y: usize) {
        self.pos_item.swap(x, y);
        self.item_pos[self.pos_item[x]] = x;
        self.item_pos[self.pos_item[y]] = y;
    }
}

/// Compute switch settings sending the item at row `w` to row `target[w]`,
/// flipping bits in the order given by `bit_order` on the way out and in
/// reverse on the way back. Bit positions count from the most-significant
/// end of the row word, matching the butterfly's column convention.
pub fn benes_route(target: &[usize], bit_order: &[usize]) -> Result<BenesPlan, BenesError> {
    let m = bit_order.len();
    let width = 1usize << m;
    if target.len() != width {
        return Err(BenesError::WidthMismatch { got: target.len(), bits: m, expected: width });
    }
    let mut seen = vec![false; width];
    for (index, &value) in target.iter().enumerate() {
        if value >= width || seen[value] {
            return Err(BenesError::NotBijective { index, value });
        }
        seen[value] = true;
    }
    let mut order_seen = vec![false; m];
    for &b in bit_order {
        if b >= m || order_seen[b] {
            return Err(BenesError::BadBitOrder(bit_order.to_vec(), m));
        }
        order_seen[b] = true;
    }

    let mut flips = vec![vec![false; width]; 2 * m];
    if m > 0 {
        let masks: Vec<usize> = bit_order.iter().map(|&b| 1 << (m - 1 - b)).collect();
        let mut ctx = LoopCtx {
            masks,
            flips: &mut flips,
            pos_item: (0..width).collect(),
            item_pos: (0..width).collect(),
            goal: target.to_vec(),
            item_at_goal: vec![0; width],
            half: vec![0; width],
            colored: vec![false; width],
        };
        let positions: Vec<usize> = (0..width).collect();
        route_level(&mut ctx, 0, &positions);
        for (w, &t) in target.iter().enumerate() {
            assert_eq!(ctx.item_pos[w], t, "looping algorithm failed to realize target");
        }
    }
    Ok(BenesPlan { width, bit_order: bit_order.to_vec(), flips })
}

fn route_level(ctx: &mut LoopCtx<'_>, depth: usize, positions: &[usize]) {
    let m = ctx.masks.len();
    let mask = ctx.masks[depth];
    if depth == m - 1 {
        // Innermost Benes level, hosted at plan level m (the first backward
        // step); plan level m-1 stays identity as the slack.
        for &x in positions {
            if x & mask != 0 {
                continue;
            }
            let y = x | mask;
            let i = ctx.pos_item[x];
            debug_assert!(ctx.goal[i] == x || ctx.goal[i] == y);
            let flip = ctx.goal[i] == y;
            ctx.flips[m][x] = flip;
            ctx.flips[m][y] = flip;
            if flip {
                ctx.swap_positions(x, y);
            }
        }
        return;
    }
    let t_exit = 2 * m - 1 - depth;

    for &x in positions {
        let i = ctx.pos_item[x];
        ctx.colored[i] = false;
        ctx.item_at_goal[ctx.goal[i]] = i;
    }
    // 2-color the constraint cycles. Input pairs {x, x^mask} must split
    // across halves, as must the items destined to each output pair.
    for &x in positions {
        let start = ctx.pos_item[x];
        if ctx.colored[start] {
            continue;
        }
        // x is the smallest position of its cycle, so x & mask == 0; keeping
        // it in its own half routes it straight through the upper network.
        ctx.half[start] = ((x & mask) != 0) as u8;
        ctx.colored[start] = true;
        let mut cur = start;
        loop {
            let in_partner = ctx.pos_item[ctx.item_pos[cur] ^ mask];
            if ctx.colored[in_partner] {
                debug_assert_eq!(ctx.half[in_partner], 1 - ctx.half[cur]);
                break;
            }
            ctx.half[in_partner] = 1 - ctx.half[cur];
            ctx.colored[in_partner] = true;
            let out_partner = ctx.item_at_goal[ctx.goal[in_partner] ^ mask];
            if ctx.colored[out_partner] {
                debug_assert_eq!(ctx.half[out_partner], 1 - ctx.half[in_partner]);
                break;
            }
            ctx.half[out_partner] = 1 - ctx.half[in_partner];
            ctx.colored[out_partner] = true;
            cur = out_partner;
        }
    }
    // Entry level: swap the pair when the lower member belongs to half 1.
    for &x in positions {
        if x & mask != 0 {
            continue;
        }
        let y = x | mask;
        let flip = ctx.half[ctx.pos_item[x]] == 1;
        debug_assert_ne!(ctx.half[ctx.pos_item[x]], ctx.half[ctx.pos_item[y]]);
        ctx.flips[depth][x] = flip;
        ctx.flips[depth][y] = flip;
        if flip {
            ctx.swap_positions(x, y);
        }
    }
    // Force this level's bit of every goal to the chosen half; the exit
    // level restores it. The sub-network delivers item i to the forced goal,
    // so the exit flip can be recorded at that position right away.
    for &x in positions {
        let i = ctx.pos_item[x];
        let g_old = ctx.goal[i];
        let g_new = if ctx.half[i] == 1 { g_old | mask } else { g_old & !mask };
        ctx.flips[t_exit][g_new] = g_old != g_new;
        ctx.goal[i] = g_new;
    }
    let lower: Vec<usize> = positions.iter().copied().filter(|&x| x & mask == 0).collect();
    let upper: Vec<usize> = positions.iter().copied().filter(|&x| x & mask != 0).collect();
    route_level(ctx, depth + 1, &lower);
    route_level(ctx, depth + 1, &upper);
    for &x in &lower {
        let y = x | mask;
        debug_assert_eq!(ctx.flips[t_exit][x], ctx.flips[t_exit][y]);
        if ctx.flips[t_exit][x] {
            ctx.swap_positions(x, y);
        }
    }
}

/// One row permutation per column: `column(c)[w]` is the destination row of
/// the qubit currently at `(w, c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnPermutationSet {
    rows: usize,
    columns: Vec<Vec<usize>>,
}

impl ColumnPermutationSet {
    pub fn new(columns: Vec<Vec<usize>>) -> Result<Self, BenesError> {
        let rows = columns.first().map(Vec::len).unwrap_or(0);
        for col in &columns {
            let mut seen = vec![false; rows];
            if col.len() != rows {
                return Err(BenesError::WidthMismatch {
                    got: col.len(),
                    bits: rows.trailing_zeros() as usize,
                    expected: rows,
                });
            }
            for (index, &value) in col.iter().enumerate() {
                if value >= rows || seen[value] {
                    return Err(BenesError::NotBijective { index, value });
                }
                seen[value] = true;
            }
        }
        Ok(ColumnPermutationSet { rows, columns })
    }

    pub fn identity(columns: usize, rows: usize) -> Self {
        ColumnPermutationSet { rows, columns: vec![(0..rows).collect(); columns] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, c: usize) -> &[usize] {
        &self.columns[c]
    }

    pub fn is_identity(&self) -> bool {
        self.columns.iter().all(|col| col.iter().enumerate().all(|(i, &v)| i == v))
    }
}

/// Realize all r column permutations simultaneously as exactly 2r shift
/// layers. During layers `0..r` every qubit moves forward one column; during
/// layers `r..2r` it moves back. The qubit starting at `(w, c)` ends at
/// `(cols.column(c)[w], c)`. Every layer moves all n qubits, each node
/// sending one and receiving one, which is what makes the single ancilla per
/// node sufficient.
pub fn pipelined_column_routing(
    g: &ButterflyGraph,
    cols: &ColumnPermutationSet,
) -> Result<Vec<Layer>, BenesError> {
    let r = g.r();
    let rows = g.rows();
    if cols.columns() != r || cols.rows() != rows {
        return Err(BenesError::DimensionMismatch {
            got: cols.columns(),
            rows: cols.rows(),
            want_cols: r,
            want_rows: rows,
        });
    }
    let plans: Vec<BenesPlan> = (0..r)
        .map(|c| {
            let bit_order: Vec<usize> = (0..r).map(|t| (c + t) % r).collect();
            benes_route(cols.column(c), &bit_order)
        })
        .collect::<Result<_, _>>()?;

    let mut layers = Vec::with_capacity(2 * r);
    for level in 0..2 * r {
        let mut moves = Vec::with_capacity(r * rows);
        for (c, plan) in plans.iter().enumerate() {
            // Column currently hosting stream c, and the column it moves to.
            let (from_col, to_col, edge_bit) = if level < r {
                let j = (c + level) % r;
                (j, (j + 1) % r, j)
            } else {
                let j = (c + 2 * r - level) % r;
                let prev = (j + r - 1) % r;
                (j, prev, prev)
            };
            debug_assert!(plan.level_bit(level).is_none_or(|b| b == edge_bit));
            let mask = g.cross_mask(edge_bit);
            for w in 0..rows {
                let w2 = if plan.flips(level)[w] { w ^ mask } else { w };
                moves.push((w * r + from_col, w2 * r + to_col));
            }
        }
        moves.sort_unstable();
        layers.push(Layer::Shift { moves });
    }
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{apply_layer, Placement};
    use crate::topology::build_butterfly;

    fn all_permutations(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut items: Vec<usize> = (0..n).collect();
        fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k == 1 {
                out.push(items.clone());
                return;
            }
            for i in 0..k {
                heap(k - 1, items, out);
                if k % 2 == 0 {
                    items.swap(i, k - 1);
                } else {
                    items.swap(0, k - 1);
                }
            }
        }
        heap(n, &mut items, &mut out);
        out
    }

    fn scrambled(n: usize, seed: u64) -> Vec<usize> {
        let mut image: Vec<usize> = (0..n).collect();
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(12345);
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            image.swap(i, j);
        }
        image
    }

    #[test]
    fn identity_plan_never_flips() {
        let target: Vec<usize> = (0..8).collect();
        let plan = benes_route(&target, &[0, 1, 2]).unwrap();
        assert_eq!(plan.depth(), 6);
        for t in 0..6 {
            assert!(plan.flips(t).iter().all(|&f| !f), "level {}", t);
        }
    }

    #[test]
    fn exhaustive_width_4_all_bit_orders() {
        for order in [[0, 1], [1, 0]] {
            for target in all_permutations(4) {
                let plan = benes_route(&target, &order).unwrap();
                assert!(plan.collision_free());
                assert_eq!(plan.simulate(), target, "target {:?} order {:?}", target, order);
            }
        }
    }

    #[test]
    fn exhaustive_width_8_cyclic_bit_orders() {
        for c in 0..3 {
            let order: Vec<usize> = (0..3).map(|t| (c + t) % 3).collect();
            for target in all_permutations(8) {
                let plan = benes_route(&target, &order).unwrap();
                assert!(plan.collision_free());
                assert_eq!(plan.simulate(), target);
            }
        }
    }

    #[test]
    fn random_width_64() {
        for seed in 0..200 {
            let target = scrambled(64, seed);
            let plan = benes_route(&target, &[0, 1, 2, 3, 4, 5]).unwrap();
            assert!(plan.collision_free());
            assert_eq!(plan.simulate(), target);
        }
    }

    #[test]
    fn slack_level_is_identity() {
        for seed in 0..50 {
            let target = scrambled(16, seed);
            let plan = benes_route(&target, &[0, 1, 2, 3]).unwrap();
            assert!(plan.flips(3).iter().all(|&f| !f)); // level r-1
            assert_eq!(plan.level_bit(3), None);
        }
    }

    #[test]
    fn bit_flip_target_uses_single_level() {
        // Flip bit 0 (most significant of 3): w -> w ^ 4.
        let target: Vec<usize> = (0..8).map(|w| w ^ 4).collect();
        let plan = benes_route(&target, &[0, 1, 2]).unwrap();
        assert_eq!(plan.simulate(), target);
        let mut flip_levels = Vec::new();
        for t in 0..plan.depth() {
            if plan.flips(t).iter().any(|&f| f) {
                assert!(plan.flips(t).iter().all(|&f| f));
                flip_levels.push(t);
            }
        }
        assert_eq!(flip_levels.len(), 1);
        assert_eq!(plan.level_bit(flip_levels[0]), Some(0));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            benes_route(&[0, 0, 1, 2], &[0, 1]),
            Err(BenesError::NotBijective { .. })
        ));
        assert!(matches!(
            benes_route(&[0, 1], &[0, 1]),
            Err(BenesError::WidthMismatch { .. })
        ));
        assert!(matches!(
            benes_route(&[0, 1, 2, 3], &[0, 0]),
            Err(BenesError::BadBitOrder(..))
        ));
    }

    fn run_layers(g: &ButterflyGraph, layers: &[Layer]) -> Placement {
        let mut p = Placement::identity(g.node_count());
        for layer in layers {
            p = apply_layer(&p, layer, g).unwrap();
        }
        p
    }

    #[test]
    fn identity_columns_rotate_and_return() {
        let g = build_butterfly(3).unwrap();
        let cols = ColumnPermutationSet::identity(3, 8);
        let layers = pipelined_column_routing(&g, &cols).unwrap();
        assert_eq!(layers.len(), 6);
        for layer in &layers {
            match layer {
                Layer::Shift { moves } => assert_eq!(moves.len(), 24),
                _ => panic!("expected shift layer"),
            }
        }
        let p = run_layers(&g, &layers);
        for i in 0..24 {
            assert_eq!(p.qubit_at(i), Some(i));
        }
    }

    fn check_column_routing(g: &ButterflyGraph, cols: &ColumnPermutationSet) {
        let r = g.r();
        let layers = pipelined_column_routing(g, cols).unwrap();
        assert_eq!(layers.len(), 2 * r);
        let p = run_layers(g, &layers);
        for w in 0..g.rows() {
            for c in 0..r {
                let target_node = cols.column(c)[w] * r + c;
                assert_eq!(p.qubit_at(target_node), Some(w * r + c));
            }
        }
    }

    #[test]
    fn cyclic_shift_in_every_column() {
        let g = build_butterfly(3).unwrap();
        let shift: Vec<usize> = (0..8).map(|w| (w + 1) % 8).collect();
        let cols = ColumnPermutationSet::new(vec![shift.clone(), shift.clone(), shift]).unwrap();
        check_column_routing(&g, &cols);
    }

    #[test]
    fn random_column_sets_route_exactly() {
        let g = build_butterfly(3).unwrap();
        for seed in 0..1000 {
            let cols = ColumnPermutationSet::new(vec![
                scrambled(8, seed * 3),
                scrambled(8, seed * 3 + 1),
                scrambled(8, seed * 3 + 2),
            ])
            .unwrap();
            check_column_routing(&g, &cols);
        }
    }

    #[test]
    fn random_column_sets_route_r4() {
        let g = build_butterfly(4).unwrap();
        for seed in 0..50 {
            let cols = ColumnPermutationSet::new(
                (0..4).map(|c| scrambled(16, seed * 7 + c)).collect(),
            )
            .unwrap();
            check_column_routing(&g, &cols);
        }
    }

    #[test]
    fn every_layer_moves_every_node_once() {
        let g = build_butterfly(3).unwrap();
        let cols = ColumnPermutationSet::new(vec![
            scrambled(8, 11),
            scrambled(8, 22),
            scrambled(8, 33),
        ])
        .unwrap();
        for layer in pipelined_column_routing(&g, &cols).unwrap() {
            let Layer::Shift { moves } = layer else { panic!() };
            let mut sources: Vec<usize> = moves.iter().map(|m| m.0).collect();
            let mut targets: Vec<usize> = moves.iter().map(|m| m.1).collect();
            sources.sort_unstable();
            targets.sort_unstable();
            assert_eq!(sources, (0..24).collect::<Vec<_>>());
            assert_eq!(targets, (0..24).collect::<Vec<_>>());
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = build_butterfly(3).unwrap();
        let cols = ColumnPermutationSet::identity(4, 8);
        assert!(matches!(
            pipelined_column_routing(&g, &cols),
            Err(BenesError::DimensionMismatch { .. })
        ));
    }
}

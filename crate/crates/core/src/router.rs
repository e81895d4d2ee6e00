//! Three-phase permutation routing: row sort by assigned column, pipelined
//! Benes column routing, row sort by destination column.
//!
//! Phase 1 gives each qubit the column named by its routing-graph edge color;
//! properness of the coloring makes the colors within every row a permutation
//! of `0..r`, so one executed insertion-sort pass per row suffices and every
//! column ends up holding one qubit per destination row. Phase 2 routes all
//! columns through the embedded Benes network simultaneously. Phase 3 sorts
//! each row by destination column, completing the permutation. Structural
//! depth is `(2r-3) + 2r + (2r-3) = 6r-6`, strictly below `6 log2 n`.
//!
//! All tie-breaking upstream is fixed, so identical inputs produce
//! byte-identical schedules.

use crate::benes::{self, BenesPlan, ColumnPermutationSet};
use crate::coloring::{self, EdgeColoring, RoutingGraph};
use crate::schedule::{Layer, Permutation, Phase, Schedule};
use crate::sorting::{insertion_network, ComparatorNetwork};
use crate::topology::ButterflyGraph;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RouteError {
    #[error("permutation has length {got}, graph has {expected} nodes")]
    SizeMismatch { got: usize, expected: usize },
    #[error("dimension must be at least 3, got {0}")]
    DimensionTooSmall(usize),
    #[error(transparent)]
    Coloring(#[from] coloring::ColoringError),
    #[error(transparent)]
    Benes(#[from] benes::BenesError),
    #[error("phase {phase} postcondition failed: {detail}")]
    PhaseCertificate { phase: u8, detail: String },
}

#[derive(Debug, Clone, Copy)]
pub struct RouteOptions {
    /// Re-check each phase's postcondition before starting the next.
    pub validate: bool,
    /// Keep the routing graph, column permutations and Benes plans for
    /// explain-style dumps.
    pub trace: bool,
}

impl Default for RouteOptions {
    fn default() -> Self {
        RouteOptions { validate: true, trace: false }
    }
}

/// Intermediate structures retained for debugging dumps.
#[derive(Debug, Clone)]
pub struct RouteTrace {
    pub routing_graph: RoutingGraph,
    pub column_permutations: ColumnPermutationSet,
    pub benes_plans: Vec<BenesPlan>,
}

/// A routed permutation: the schedule plus its depth accounting.
#[derive(Debug, Clone)]
pub struct RoutingResult {
    pub schedule: Schedule,
    /// Structural depth with no elision: always `6r - 6`.
    pub depth_pre_elision: usize,
    /// Layers actually emitted.
    pub depth_post_elision: usize,
    /// Executed depth per phase, post-elision.
    pub phase_depths: (usize, usize, usize),
    /// Structural depth per phase: `(2r-3, 2r, 2r-3)`.
    pub phase_depths_pre: (usize, usize, usize),
    pub coloring: EdgeColoring,
    pub trace: Option<RouteTrace>,
}

/// Exact worst-case depth `6r - 6` and the reported ceiling bound
/// `ceil(6 * log2(r * 2^r))`; the former is always strictly smaller.
pub fn depth_bound(r: usize) -> Result<(usize, usize), RouteError> {
    if r < 3 {
        return Err(RouteError::DimensionTooSmall(r));
    }
    let n = (r * (1usize << r)) as f64;
    let bound = (6.0 * n.log2()).ceil() as usize;
    Ok((6 * r - 6, bound))
}

pub fn route_permutation(g: &ButterflyGraph, pi: &Permutation) -> Result<RoutingResult, RouteError> {
    route_with(g, pi, RouteOptions::default())
}

pub fn route_with(
    g: &ButterflyGraph,
    pi: &Permutation,
    opts: RouteOptions,
) -> Result<RoutingResult, RouteError> {
    let r = g.r();
    let rows = g.rows();
    let n = g.node_count();
    if pi.len() != n {
        return Err(RouteError::SizeMismatch { got: pi.len(), expected: n });
    }

    let routing_graph = coloring::build_routing_graph(pi, r)?;
    let edge_coloring = coloring::color_edges(&routing_graph)?;
    if opts.validate && !coloring::validate_coloring(&routing_graph, &edge_coloring) {
        return Err(RouteError::PhaseCertificate {
            phase: 1,
            detail: "edge coloring is not proper".to_string(),
        });
    }

    // occupant[node] = qubit currently there; qubits are named by start node.
    let mut occupant: Vec<usize> = (0..n).collect();
    let mut schedule = Schedule::new(r);
    let network = insertion_network(r).expect("r >= 3");

    // Phase 1: per row, sort qubits by color; color c is the qubit's target
    // column. Edge index equals qubit id in the routing graph.
    let d1 = run_row_sort(g, &mut occupant, &mut schedule, Phase::RowSortFirst, &network, |q| {
        edge_coloring.color(q)
    });
    if opts.validate {
        check_phase1(g, &occupant, pi)?;
    }

    // Phase 2: route each column's qubits to their destination rows.
    let columns: Vec<Vec<usize>> = (0..r)
        .map(|c| (0..rows).map(|w| pi.apply(occupant[w * r + c]) / r).collect())
        .collect();
    let cols = ColumnPermutationSet::new(columns)?;
    let mut benes_plans = Vec::new();
    let d2 = if cols.is_identity() {
        0
    } else {
        if opts.trace {
            for c in 0..r {
                let bit_order: Vec<usize> = (0..r).map(|t| (c + t) % r).collect();
                benes_plans.push(benes::benes_route(cols.column(c), &bit_order)?);
            }
        }
        let layers = benes::pipelined_column_routing(g, &cols)?;
        for layer in layers {
            apply_shift(&mut occupant, &layer);
            schedule.push(Phase::ColumnRoute, layer);
        }
        2 * r
    };
    if opts.validate {
        check_phase2(g, &occupant, pi)?;
    }

    // Phase 3: per row, sort qubits by destination column.
    let d3 = run_row_sort(g, &mut occupant, &mut schedule, Phase::RowSortFinal, &network, |q| {
        pi.apply(q) % r
    });
    if opts.validate {
        check_phase3(&occupant, pi)?;
    }

    Ok(RoutingResult {
        schedule,
        depth_pre_elision: 6 * r - 6,
        depth_post_elision: d1 + d2 + d3,
        phase_depths: (d1, d2, d3),
        phase_depths_pre: (2 * r - 3, 2 * r, 2 * r - 3),
        coloring: edge_coloring,
        trace: opts.trace.then_some(RouteTrace {
            routing_graph,
            column_permutations: cols,
            benes_plans,
        }),
    })
}

/// Execute the insertion network in every row at once, keyed per qubit, and
/// append the union of each stage's fired comparators as one swap layer.
/// Stages that fire nowhere are elided. Returns the executed depth.
fn run_row_sort(
    g: &ButterflyGraph,
    occupant: &mut [usize],
    schedule: &mut Schedule,
    phase: Phase,
    network: &ComparatorNetwork,
    key: impl Fn(usize) -> usize,
) -> usize {
    let r = g.r();
    let rows = g.rows();
    let per_row: Vec<Vec<Vec<(usize, usize)>>> = (0..rows)
        .map(|w| {
            let keys: Vec<usize> = (0..r).map(|i| key(occupant[w * r + i])).collect();
            network.run(&keys).expect("width matches").swaps
        })
        .collect();
    let mut depth = 0;
    for stage in 0..network.depth() {
        let mut pairs = Vec::new();
        for (w, stages) in per_row.iter().enumerate() {
            for &(i, j) in &stages[stage] {
                pairs.push((w * r + i, w * r + j));
            }
        }
        if pairs.is_empty() {
            continue;
        }
        for &(a, b) in &pairs {
            occupant.swap(a, b);
        }
        schedule.push(phase, Layer::Swap { pairs });
        depth += 1;
    }
    depth
}

fn apply_shift(occupant: &mut [usize], layer: &Layer) {
    let Layer::Shift { moves } = layer else {
        unreachable!("column routing emits shift layers");
    };
    let before = occupant.to_vec();
    for &(from, to) in moves {
        occupant[to] = before[from];
    }
}

/// After phase 1, every column holds each destination row exactly once.
fn check_phase1(g: &ButterflyGraph, occupant: &[usize], pi: &Permutation) -> Result<(), RouteError> {
    let r = g.r();
    let rows = g.rows();
    for c in 0..r {
        let mut seen = vec![false; rows];
        for w in 0..rows {
            let dest_row = pi.apply(occupant[w * r + c]) / r;
            if seen[dest_row] {
                return Err(RouteError::PhaseCertificate {
                    phase: 1,
                    detail: format!("column {} holds destination row {} twice", c, dest_row),
                });
            }
            seen[dest_row] = true;
        }
    }
    Ok(())
}

/// After phase 2, every qubit sits in its destination row.
fn check_phase2(g: &ButterflyGraph, occupant: &[usize], pi: &Permutation) -> Result<(), RouteError> {
    let r = g.r();
    for (node, &q) in occupant.iter().enumerate() {
        if pi.apply(q) / r != node / r {
            return Err(RouteError::PhaseCertificate {
                phase: 2,
                detail: format!("qubit {} is in row {}, wants row {}", q, node / r, pi.apply(q) / r),
            });
        }
    }
    Ok(())
}

/// After phase 3, the placement equals the target permutation.
fn check_phase3(occupant: &[usize], pi: &Permutation) -> Result<(), RouteError> {
    for (node, &q) in occupant.iter().enumerate() {
        if pi.apply(q) != node {
            return Err(RouteError::PhaseCertificate {
                phase: 3,
                detail: format!("qubit {} ended at node {}, wants {}", q, node, pi.apply(q)),
            });
        }
    }
    Ok(())
}

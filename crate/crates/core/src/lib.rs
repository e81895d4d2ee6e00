//! Qubit permutation routing and circuit compilation on the cyclic
//! butterfly interaction graph.
//!
//! The cyclic butterfly connects `n = r * 2^r` qubits with degree 4, yet any
//! permutation of the qubits can be realized by a schedule of local moves of
//! depth `6r - 6 < 6 log2 n`, using a single ancilla per node. Routing runs
//! in three phases: sort each row so every column holds one qubit per
//! destination row (a bipartite edge coloring picks the columns), permute
//! every column simultaneously through the embedded Benes network, then sort
//! each row by destination column. The compiler applies the same machinery
//! per circuit timestep, choosing destinations that make every two-qubit
//! gate local.

pub mod benes;
pub mod coloring;
pub mod compiler;
pub mod matching;
pub mod router;
pub mod schedule;
pub mod sorting;
pub mod topology;

pub use benes::{benes_route, pipelined_column_routing, BenesPlan, ColumnPermutationSet};
pub use coloring::{build_routing_graph, color_edges, validate_coloring, EdgeColoring, RoutingGraph};
pub use compiler::{
    assign_destinations, compile_circuit, minimal_dimension, verify_program, Circuit,
    CompiledProgram, Gate, ProgramReport,
};
pub use matching::maximum_matching;
pub use router::{depth_bound, route_permutation, route_with, RouteOptions, RoutingResult};
pub use schedule::{
    apply_layer, verify_schedule, Layer, Permutation, Phase, Placement, Schedule, VerifyReport,
};
pub use sorting::{bitonic_network, comparator, insertion_network, ComparatorNetwork};
pub use topology::{
    build_butterfly, build_kary_butterfly, quotient_rows, ring_expand, ButterflyGraph, NodeId,
    VariantGraph,
};

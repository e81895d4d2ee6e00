//! Circuit compilation: make every two-qubit gate local by routing one full
//! permutation per timestep, then emit the gate layer.
//!
//! Destinations are chosen from a maximum set of pairwise-disjoint edges,
//! computed once per graph. Gate pairs that are already adjacent are kept in
//! place when that leaves enough free edges for the rest of the timestep,
//! and idle qubits stay put wherever possible, so the routed permutation has
//! small support and phase elision can bite. Nodes not holding a logical
//! qubit carry blank tokens that participate in routing like qubits.
//!
//! If a timestep ever carries more gates than the disjoint edge set (which
//! cannot happen while the graph has a perfect matching, since timesteps are
//! capped at n/2 gates), the leftover gates are deferred to a further round
//! within the same timestep.

use crate::matching::maximum_matching;
use crate::router::{self, route_permutation, RouteError};
use crate::schedule::{
    check_layer, layer_from_json, layer_to_json, BoundGate, Failure, FailureKind, Layer,
    LayerJson, Permutation, Phase, Placement,
};
use crate::topology::ButterflyGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("gate {label:?} has {got} operands, expected 1 or 2")]
    OperandCount { label: String, got: usize },
    #[error("gate {label:?} repeats operand {qubit}")]
    RepeatedOperand { label: String, qubit: usize },
    #[error("gate {label:?} uses qubit {qubit}, circuit has {qubits}")]
    QubitOutOfRange { label: String, qubit: usize, qubits: usize },
    #[error("timestep {timestep}: qubit {qubit} appears in two gates")]
    QubitClash { timestep: usize, qubit: usize },
    #[error("circuit has {qubits} qubits, graph has only {nodes} nodes (smallest sufficient r is {min_r})")]
    TooManyQubits { qubits: usize, nodes: usize, min_r: usize },
    #[error("timestep {timestep}: no free destination edge for any pending gate")]
    NoProgress { timestep: usize },
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("program format: {0}")]
    Format(String),
}

/// Smallest dimension `r >= 3` whose butterfly holds at least `qubits` nodes.
pub fn minimal_dimension(qubits: usize) -> usize {
    let mut r = 3;
    while r * (1usize << r) < qubits {
        r += 1;
    }
    r
}

/// A logical gate: one or two operand qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub label: String,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn one(label: &str, a: usize) -> Self {
        Gate { label: label.to_string(), qubits: vec![a] }
    }

    pub fn two(label: &str, a: usize, b: usize) -> Self {
        Gate { label: label.to_string(), qubits: vec![a, b] }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }
}

/// Timesteps of gates on arbitrary qubit pairs; within one timestep no qubit
/// appears twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub qubits: usize,
    pub timesteps: Vec<Vec<Gate>>,
}

impl Circuit {
    pub fn new(qubits: usize, timesteps: Vec<Vec<Gate>>) -> Result<Self, CompileError> {
        for (timestep, gates) in timesteps.iter().enumerate() {
            let mut busy = vec![false; qubits];
            for gate in gates {
                if gate.qubits.is_empty() || gate.qubits.len() > 2 {
                    return Err(CompileError::OperandCount {
                        label: gate.label.clone(),
                        got: gate.qubits.len(),
                    });
                }
                if gate.qubits.len() == 2 && gate.qubits[0] == gate.qubits[1] {
                    return Err(CompileError::RepeatedOperand {
                        label: gate.label.clone(),
                        qubit: gate.qubits[0],
                    });
                }
                for &q in &gate.qubits {
                    if q >= qubits {
                        return Err(CompileError::QubitOutOfRange {
                            label: gate.label.clone(),
                            qubit: q,
                            qubits,
                        });
                    }
                    if busy[q] {
                        return Err(CompileError::QubitClash { timestep, qubit: q });
                    }
                    busy[q] = true;
                }
            }
        }
        Ok(Circuit { qubits, timesteps })
    }

    pub fn gate_count(&self) -> usize {
        self.timesteps.iter().map(Vec::len).sum()
    }
}

/// One layer of a compiled program, tagged with the timestep it serves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramLayer {
    pub timestep: usize,
    pub phase: Phase,
    pub layer: Layer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimestepStats {
    /// Rounds the timestep was split into (1 unless gates exceeded the
    /// disjoint edge set).
    pub rounds: usize,
    /// Routing layers spent on the timestep, post-elision.
    pub routing_depth: usize,
}

/// A topology-respecting compilation: routing layers interleaved with gate
/// layers, starting from `initial` (logical qubit -> node).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledProgram {
    pub r: usize,
    pub qubits: usize,
    pub initial: Vec<usize>,
    pub layers: Vec<ProgramLayer>,
    pub timestep_stats: Vec<TimestepStats>,
}

impl CompiledProgram {
    pub fn routing_depth(&self) -> usize {
        self.timestep_stats.iter().map(|s| s.routing_depth).sum()
    }
}

/// Result of placing one round of gates: the node permutation to route, the
/// gates that got a destination edge this round, and those that must wait.
#[derive(Debug, Clone)]
pub struct DestinationPlan {
    pub permutation: Permutation,
    /// `(index into gates, nodes for (qubits[0], qubits[1]))`
    pub placed: Vec<(usize, (usize, usize))>,
    pub deferred: Vec<usize>,
}

/// Choose a destination for every token so that each two-qubit gate lands on
/// a dedicated edge. `positions` maps tokens (logical qubits and blanks) to
/// nodes; `matching` is the precomputed disjoint edge set. Already-adjacent
/// gate pairs are pinned in place when enough matching edges remain for the
/// gates still waiting; all other tokens stay put unless their node is
/// claimed.
pub fn assign_destinations(
    g: &ButterflyGraph,
    positions: &[usize],
    gates: &[Gate],
    matching: &[(usize, usize)],
) -> Result<DestinationPlan, CompileError> {
    let n = g.node_count();
    let mut used = vec![false; n];
    let mut avail: Vec<(usize, usize)> = matching.to_vec();
    let mut placed = Vec::new();
    let mut deferred = Vec::new();

    let two_qubit: Vec<usize> = (0..gates.len()).filter(|&i| gates[i].is_two_qubit()).collect();
    for (order, &gi) in two_qubit.iter().enumerate() {
        let gate = &gates[gi];
        let (na, nb) = (positions[gate.qubits[0]], positions[gate.qubits[1]]);
        let waiting = two_qubit.len() - order - 1;
        if g.is_edge_index(na, nb) && !used[na] && !used[nb] {
            let after: Vec<(usize, usize)> = avail
                .iter()
                .copied()
                .filter(|&(x, y)| x != na && x != nb && y != na && y != nb)
                .collect();
            if after.len() >= waiting {
                used[na] = true;
                used[nb] = true;
                avail = after;
                placed.push((gi, (na, nb)));
                continue;
            }
        }
        if avail.is_empty() {
            deferred.push(gi);
        } else {
            let (ea, eb) = avail.remove(0);
            used[ea] = true;
            used[eb] = true;
            placed.push((gi, (ea, eb)));
        }
    }

    // Everyone else keeps its node when free; displaced tokens fill the
    // remaining nodes in ascending order.
    let mut dest = vec![usize::MAX; n];
    for &(gi, (ea, eb)) in &placed {
        dest[positions[gates[gi].qubits[0]]] = ea;
        dest[positions[gates[gi].qubits[1]]] = eb;
    }
    for node in 0..n {
        if dest[node] == usize::MAX && !used[node] {
            dest[node] = node;
            used[node] = true;
        }
    }
    let mut free = (0..n).filter(|&v| !used[v]);
    for slot in dest.iter_mut() {
        if *slot == usize::MAX {
            *slot = free.next().expect("destination count mismatch");
        }
    }
    let permutation = Permutation::new(dest).expect("destination map is a bijection");
    Ok(DestinationPlan { permutation, placed, deferred })
}

pub fn compile_circuit(g: &ButterflyGraph, circuit: &Circuit) -> Result<CompiledProgram, CompileError> {
    let n = g.node_count();
    let adjacency: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
    let matching = maximum_matching(&adjacency);
    compile_with_matching(g, circuit, &matching)
}

pub(crate) fn compile_with_matching(
    g: &ButterflyGraph,
    circuit: &Circuit,
    matching: &[(usize, usize)],
) -> Result<CompiledProgram, CompileError> {
    let n = g.node_count();
    if circuit.qubits > n {
        return Err(CompileError::TooManyQubits {
            qubits: circuit.qubits,
            nodes: n,
            min_r: minimal_dimension(circuit.qubits),
        });
    }
    // Token t at node t; tokens >= circuit.qubits are blanks.
    let mut positions: Vec<usize> = (0..n).collect();
    let mut layers = Vec::new();
    let mut timestep_stats = Vec::new();

    for (t, step) in circuit.timesteps.iter().enumerate() {
        let mut pending: Vec<usize> = (0..step.len()).filter(|&i| step[i].is_two_qubit()).collect();
        let singles: Vec<usize> = (0..step.len()).filter(|&i| !step[i].is_two_qubit()).collect();
        if pending.is_empty() && singles.is_empty() {
            timestep_stats.push(TimestepStats { rounds: 0, routing_depth: 0 });
            continue;
        }
        let mut rounds = 0;
        let mut routing_depth = 0;
        let mut first_round = true;
        loop {
            let round_gates: Vec<Gate> = pending.iter().map(|&i| step[i].clone()).collect();
            let plan = assign_destinations(g, &positions, &round_gates, matching)?;
            if plan.placed.is_empty() && !plan.deferred.is_empty() {
                return Err(CompileError::NoProgress { timestep: t });
            }
            let routed = route_permutation(g, &plan.permutation)?;
            rounds += 1;
            routing_depth += routed.depth_post_elision;
            for sl in routed.schedule.layers {
                layers.push(ProgramLayer { timestep: t, phase: sl.phase, layer: sl.layer });
            }
            for pos in positions.iter_mut() {
                *pos = plan.permutation.apply(*pos);
            }
            // Gate layer: this round's two-qubit gates, plus the timestep's
            // single-qubit gates on the first round, in circuit order.
            let mut bound: Vec<(usize, BoundGate)> = Vec::new();
            if first_round {
                for &si in &singles {
                    bound.push((
                        si,
                        BoundGate {
                            label: step[si].label.clone(),
                            nodes: vec![positions[step[si].qubits[0]]],
                        },
                    ));
                }
            }
            for &(local, (ea, eb)) in &plan.placed {
                let gi = pending[local];
                bound.push((gi, BoundGate { label: step[gi].label.clone(), nodes: vec![ea, eb] }));
            }
            bound.sort_by_key(|&(gi, _)| gi);
            layers.push(ProgramLayer {
                timestep: t,
                phase: Phase::Gate,
                layer: Layer::Gate { gates: bound.into_iter().map(|(_, g)| g).collect() },
            });
            pending = plan.deferred.iter().map(|&local| pending[local]).collect();
            first_round = false;
            if pending.is_empty() {
                break;
            }
        }
        timestep_stats.push(TimestepStats { rounds, routing_depth });
    }
    Ok(CompiledProgram {
        r: g.r(),
        qubits: circuit.qubits,
        initial: (0..circuit.qubits).collect(),
        layers,
        timestep_stats,
    })
}

/// Program verification outcome.
#[derive(Debug, Clone)]
pub struct ProgramReport {
    pub pass: bool,
    pub failures: Vec<Failure>,
    /// Routing layers executed per timestep.
    pub routing_depth_per_timestep: Vec<usize>,
    pub max_layer_occupancy: usize,
    pub gates_checked: usize,
}

/// Simulate the program layer by layer and check that (a) every routing
/// layer obeys the locality and occupancy rules, (b) every gate acts on the
/// nodes currently holding its logical operands, adjacent for two-qubit
/// gates, (c) gates run in the original timestep order, and (d) routing
/// depth per timestep stays within the worst-case bound `6r - 6`.
pub fn verify_program(g: &ButterflyGraph, circuit: &Circuit, program: &CompiledProgram) -> ProgramReport {
    let n = g.node_count();
    let mut report = ProgramReport {
        pass: false,
        failures: Vec::new(),
        routing_depth_per_timestep: vec![0; circuit.timesteps.len()],
        max_layer_occupancy: 1,
        gates_checked: 0,
    };
    let fail = |report: &mut ProgramReport, layer: Option<usize>, kind: FailureKind, message: String| {
        report.failures.push(Failure { layer, kind, message });
    };

    if program.r != g.r() || program.qubits != circuit.qubits {
        fail(
            &mut report,
            None,
            FailureKind::Format,
            format!(
                "program is for r={} with {} qubits, expected r={} with {}",
                program.r,
                program.qubits,
                g.r(),
                circuit.qubits
            ),
        );
        return report;
    }
    if program.initial.len() != circuit.qubits {
        fail(&mut report, None, FailureKind::Format, "initial placement length mismatch".into());
        return report;
    }
    // Build the full placement: logical qubits where `initial` says, blanks
    // filling the remaining nodes in ascending order.
    let mut placement = Placement::empty(n);
    for (q, &node) in program.initial.iter().enumerate() {
        if node >= n || placement.qubit_at(node).is_some() {
            fail(&mut report, None, FailureKind::Format, format!("bad initial node for qubit {}", q));
            return report;
        }
        placement.set(node, Some(q));
    }
    let mut blank = circuit.qubits;
    for node in 0..n {
        if placement.qubit_at(node).is_none() {
            placement.set(node, Some(blank));
            blank += 1;
        }
    }

    // Gates of each timestep still waiting to appear.
    let mut remaining: Vec<Vec<&Gate>> =
        circuit.timesteps.iter().map(|ts| ts.iter().collect()).collect();
    let mut current_t = 0;
    let advance = |remaining: &Vec<Vec<&Gate>>, mut t: usize| {
        while t < remaining.len() && remaining[t].is_empty() {
            t += 1;
        }
        t
    };
    current_t = advance(&remaining, current_t);

    let (max_depth, _) = match router::depth_bound(g.r()) {
        Ok(b) => b,
        Err(_) => (usize::MAX, 0),
    };

    for (idx, pl) in program.layers.iter().enumerate() {
        if pl.timestep >= circuit.timesteps.len() {
            fail(&mut report, Some(idx), FailureKind::Format, format!("layer tagged timestep {} out of range", pl.timestep));
            return report;
        }
        let check = check_layer(g, &mut placement, &pl.layer, idx);
        report.max_layer_occupancy = report.max_layer_occupancy.max(check.max_occupancy);
        let sound = check.failures.is_empty();
        report.failures.extend(check.failures);
        if !sound {
            return report;
        }
        match &pl.layer {
            Layer::Gate { gates } => {
                for bg in gates {
                    report.gates_checked += 1;
                    let operands: Vec<usize> = bg
                        .nodes
                        .iter()
                        .map(|&node| placement.qubit_at(node).unwrap_or(usize::MAX))
                        .collect();
                    if operands.iter().any(|&q| q >= circuit.qubits) {
                        fail(&mut report, Some(idx), FailureKind::Correctness, format!("gate {} touches a blank node", bg.label));
                        continue;
                    }
                    // Locate this (label, operands) among the waiting gates.
                    let matches = |g: &Gate| g.label == bg.label && g.qubits == operands;
                    if let Some(pos) = remaining.get(pl.timestep).and_then(|w| w.iter().position(|g| matches(g))) {
                        if pl.timestep != current_t {
                            fail(
                                &mut report,
                                Some(idx),
                                FailureKind::Correctness,
                                format!(
                                    "gate {} of timestep {} ran while timestep {} is unfinished",
                                    bg.label, pl.timestep, current_t
                                ),
                            );
                        }
                        remaining[pl.timestep].remove(pos);
                        current_t = advance(&remaining, current_t);
                    } else {
                        fail(
                            &mut report,
                            Some(idx),
                            FailureKind::Correctness,
                            format!("gate {} on qubits {:?} does not match timestep {}", bg.label, operands, pl.timestep),
                        );
                    }
                }
            }
            _ => {
                report.routing_depth_per_timestep[pl.timestep] += (!pl.layer.is_empty()) as usize;
            }
        }
    }
    for (t, waiting) in remaining.iter().enumerate() {
        for g in waiting {
            fail(
                &mut report,
                None,
                FailureKind::Correctness,
                format!("gate {} on qubits {:?} of timestep {} never ran", g.label, g.qubits, t),
            );
        }
    }
    let depths = report.routing_depth_per_timestep.clone();
    for (t, &d) in depths.iter().enumerate() {
        if d > max_depth {
            fail(
                &mut report,
                None,
                FailureKind::Correctness,
                format!("timestep {} used routing depth {}, bound is {}", t, d, max_depth),
            );
        }
    }
    report.pass = report.failures.is_empty();
    report
}

// --- JSON interchange -------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct CircuitJson {
    qubits: usize,
    timesteps: Vec<Vec<GateSpecJson>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GateSpecJson {
    gate: String,
    q: Vec<usize>,
}

impl Circuit {
    pub fn to_json_string(&self) -> String {
        let doc = CircuitJson {
            qubits: self.qubits,
            timesteps: self
                .timesteps
                .iter()
                .map(|ts| {
                    ts.iter()
                        .map(|g| GateSpecJson { gate: g.label.clone(), q: g.qubits.clone() })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("circuit serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Circuit, CompileError> {
        let doc: CircuitJson = serde_json::from_str(s).map_err(|e| CompileError::Format(e.to_string()))?;
        let timesteps = doc
            .timesteps
            .into_iter()
            .map(|ts| {
                ts.into_iter()
                    .map(|g| Gate { label: g.gate, qubits: g.q })
                    .collect()
            })
            .collect();
        Circuit::new(doc.qubits, timesteps)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProgramJson {
    r: usize,
    qubits: usize,
    initial: Vec<usize>,
    layers: Vec<LayerJson>,
}

impl CompiledProgram {
    pub fn to_json_string(&self) -> String {
        let doc = ProgramJson {
            r: self.r,
            qubits: self.qubits,
            initial: self.initial.clone(),
            layers: self
                .layers
                .iter()
                .map(|pl| layer_to_json(pl.phase, &pl.layer, Some(pl.timestep)))
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("program serialization")
    }

    /// Parse a program; timestep tags are required on every layer. Stats are
    /// recomputed from the layer stream.
    pub fn from_json_str(s: &str) -> Result<CompiledProgram, CompileError> {
        let doc: ProgramJson = serde_json::from_str(s).map_err(|e| CompileError::Format(e.to_string()))?;
        let mut layers = Vec::with_capacity(doc.layers.len());
        let mut max_t = 0;
        for (idx, lj) in doc.layers.iter().enumerate() {
            let (phase, layer) =
                layer_from_json(idx, lj).map_err(|e| CompileError::Format(e.to_string()))?;
            let timestep = lj
                .timestep
                .ok_or_else(|| CompileError::Format(format!("layer {} lacks a timestep tag", idx)))?;
            max_t = max_t.max(timestep + 1);
            layers.push(ProgramLayer { timestep, phase, layer });
        }
        let mut timestep_stats = vec![TimestepStats { rounds: 0, routing_depth: 0 }; max_t];
        for pl in &layers {
            match pl.phase {
                Phase::Gate => timestep_stats[pl.timestep].rounds += 1,
                _ => timestep_stats[pl.timestep].routing_depth += (!pl.layer.is_empty()) as usize,
            }
        }
        Ok(CompiledProgram {
            r: doc.r,
            qubits: doc.qubits,
            initial: doc.initial,
            layers,
            timestep_stats,
        })
    }
}

//! Executable schedules: layered local moves with ancilla-aware occupancy
//! semantics, plus the verifier that checks a schedule against a graph and a
//! target permutation.
//!
//! Two kinds of qubit motion exist. A swap layer exchanges the contents of
//! disjoint edge pairs in place (no ancilla needed). A shift layer moves each
//! source qubit into its neighbour's ancilla; all moves are simultaneous, so
//! a node may transiently hold two qubits, but only if its own resident
//! departs in the same layer. At layer boundaries every node holds at most
//! one qubit.

use crate::topology::ButterflyGraph;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermutationError {
    #[error("image has length {len}, expected {expected}")]
    LengthMismatch { len: usize, expected: usize },
    #[error("image is not a bijection: value {value} at index {index}")]
    NotBijective { index: usize, value: usize },
}

/// A bijection on canonical node indices; `image[a]` is the destination of
/// the qubit starting at node `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, PermutationError> {
        let n = image.len();
        let mut seen = vec![false; n];
        for (index, &value) in image.iter().enumerate() {
            if value >= n || seen[value] {
                return Err(PermutationError::NotBijective { index, value });
            }
            seen[value] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { image: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, a: usize) -> usize {
        self.image[a]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { image: inv }
    }
}

/// Routing phase a layer belongs to; serialized as 1/2/3, gate layers as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// First row sort: move each qubit to its assigned column.
    RowSortFirst,
    /// Pipelined column permutation: move each qubit to its destination row.
    ColumnRoute,
    /// Final row sort: move each qubit to its destination column.
    RowSortFinal,
    /// Logical gate execution (compiled programs only).
    Gate,
}

impl Phase {
    pub fn as_int(self) -> u8 {
        match self {
            Phase::RowSortFirst => 1,
            Phase::ColumnRoute => 2,
            Phase::RowSortFinal => 3,
            Phase::Gate => 0,
        }
    }

    pub fn from_int(v: u8) -> Option<Phase> {
        match v {
            1 => Some(Phase::RowSortFirst),
            2 => Some(Phase::ColumnRoute),
            3 => Some(Phase::RowSortFinal),
            0 => Some(Phase::Gate),
            _ => None,
        }
    }
}

/// A logical gate bound to the physical nodes holding its operands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundGate {
    pub label: String,
    /// One node for single-qubit gates, two for two-qubit gates.
    pub nodes: Vec<usize>,
}

/// One synchronous step of the machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layer {
    /// Disjoint SWAPs on graph edges, applied in place.
    Swap { pairs: Vec<(usize, usize)> },
    /// Simultaneous directed moves `from -> to` along graph edges.
    Shift { moves: Vec<(usize, usize)> },
    /// Logical gates; placement is unchanged.
    Gate { gates: Vec<BoundGate> },
}

impl Layer {
    pub fn move_count(&self) -> usize {
        match self {
            Layer::Swap { pairs } => pairs.len(),
            Layer::Shift { moves } => moves.len(),
            Layer::Gate { gates } => gates.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.move_count() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleLayer {
    pub phase: Phase,
    pub layer: Layer,
}

/// Ordered layers realizing a permutation; the artifact's executable output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub r: usize,
    pub layers: Vec<ScheduleLayer>,
}

impl Schedule {
    pub fn new(r: usize) -> Self {
        Schedule { r, layers: Vec::new() }
    }

    pub fn push(&mut self, phase: Phase, layer: Layer) {
        self.layers.push(ScheduleLayer { phase, layer });
    }

    /// Depth counts non-empty layers.
    pub fn depth(&self) -> usize {
        self.layers.iter().filter(|l| !l.layer.is_empty()).count()
    }
}

/// Which qubit (if any) each node currently holds, by canonical node index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    slots: Vec<Option<usize>>,
}

impl Placement {
    /// Qubit `i` at node `i` for all nodes.
    pub fn identity(n: usize) -> Self {
        Placement { slots: (0..n).map(Some).collect() }
    }

    pub fn empty(n: usize) -> Self {
        Placement { slots: vec![None; n] }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn qubit_at(&self, node: usize) -> Option<usize> {
        self.slots[node]
    }

    pub fn set(&mut self, node: usize, qubit: Option<usize>) {
        self.slots[node] = qubit;
    }

    /// Node holding each qubit, or `None` if absent from the placement.
    pub fn positions(&self, qubits: usize) -> Vec<Option<usize>> {
        let mut pos = vec![None; qubits];
        for (node, slot) in self.slots.iter().enumerate() {
            if let Some(q) = *slot {
                if q < qubits {
                    pos[q] = Some(node);
                }
            }
        }
        pos
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LayerError {
    #[error("layer {0}: {1}")]
    Invalid(usize, String),
    #[error("move ({0}, {1}) is not a graph edge")]
    NonEdge(usize, usize),
    #[error("node {0} appears in two pairs")]
    OverlappingPairs(usize),
    #[error("node {0} is the source of two moves")]
    DuplicateSource(usize),
    #[error("node {0} is the target of two moves")]
    DuplicateTarget(usize),
    #[error("shift source {0} holds no qubit")]
    EmptySource(usize),
    #[error("shift target {0} is occupied and its qubit does not depart")]
    BlockedTarget(usize),
    #[error("gate binds node {0} more than once")]
    GateOverlap(usize),
    #[error("gate on {0:?} does not bind a graph edge")]
    GateNonEdge(Vec<usize>),
}

/// Apply one layer to a placement, enforcing the structural and occupancy
/// rules of its kind. Returns the new placement.
pub fn apply_layer(
    placement: &Placement,
    layer: &Layer,
    g: &ButterflyGraph,
) -> Result<Placement, LayerError> {
    let mut out = placement.clone();
    match layer {
        Layer::Swap { pairs } => {
            let mut used = vec![false; placement.len()];
            for &(a, b) in pairs {
                if !g.is_edge_index(a, b) {
                    return Err(LayerError::NonEdge(a, b));
                }
                for node in [a, b] {
                    if used[node] {
                        return Err(LayerError::OverlappingPairs(node));
                    }
                    used[node] = true;
                }
            }
            for &(a, b) in pairs {
                out.slots.swap(a, b);
            }
        }
        Layer::Shift { moves } => {
            let mut is_source = vec![false; placement.len()];
            let mut is_target = vec![false; placement.len()];
            for &(from, to) in moves {
                if !g.is_edge_index(from, to) {
                    return Err(LayerError::NonEdge(from, to));
                }
                if is_source[from] {
                    return Err(LayerError::DuplicateSource(from));
                }
                if is_target[to] {
                    return Err(LayerError::DuplicateTarget(to));
                }
                is_source[from] = true;
                is_target[to] = true;
                if placement.qubit_at(from).is_none() {
                    return Err(LayerError::EmptySource(from));
                }
            }
            for &(_, to) in moves {
                // The incoming qubit lands in the ancilla; the resident must
                // leave in the same layer or the node would exceed capacity.
                if placement.qubit_at(to).is_some() && !is_source[to] {
                    return Err(LayerError::BlockedTarget(to));
                }
            }
            for &(from, _) in moves {
                out.slots[from] = None;
            }
            for &(from, to) in moves {
                out.slots[to] = placement.slots[from];
            }
        }
        Layer::Gate { gates } => {
            let mut used = vec![false; placement.len()];
            for gate in gates {
                if gate.nodes.len() == 2 && !g.is_edge_index(gate.nodes[0], gate.nodes[1]) {
                    return Err(LayerError::GateNonEdge(gate.nodes.clone()));
                }
                for &node in &gate.nodes {
                    if used[node] {
                        return Err(LayerError::GateOverlap(node));
                    }
                    used[node] = true;
                }
            }
        }
    }
    Ok(out)
}

/// What went wrong at a specific layer (or at the end-to-end check).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub layer: Option<usize>,
    pub kind: FailureKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Locality,
    Occupancy,
    Correctness,
    Format,
}

/// Verification outcome; `pass` iff locality, occupancy and correctness all
/// hold.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub pass: bool,
    pub locality_ok: bool,
    pub occupancy_ok: bool,
    pub correctness_ok: bool,
    /// Non-empty layers actually executed.
    pub depth: usize,
    /// Maximum simultaneous qubits at any node inside a layer.
    pub max_layer_occupancy: usize,
    /// Maximum qubits at any node between layers.
    pub max_boundary_occupancy: usize,
    pub failures: Vec<Failure>,
}

/// Per-layer simulation record shared by the schedule and program verifiers.
pub(crate) struct LayerCheck {
    pub failures: Vec<Failure>,
    pub max_occupancy: usize,
    pub locality_ok: bool,
    pub occupancy_ok: bool,
}

/// Check one layer against the graph and placement, applying it if sound.
/// Unlike [`apply_layer`] this records every violation instead of stopping at
/// the first one, and never fails outright.
pub(crate) fn check_layer(
    g: &ButterflyGraph,
    placement: &mut Placement,
    layer: &Layer,
    layer_index: usize,
) -> LayerCheck {
    let mut failures = Vec::new();
    let mut locality_ok = true;
    let mut occupancy_ok = true;
    let mut max_occupancy = 1;
    let fail = |failures: &mut Vec<Failure>, kind: FailureKind, message: String| {
        failures.push(Failure { layer: Some(layer_index), kind, message });
    };
    // Parsed schedules can hold arbitrary indices; reject the layer before
    // touching the graph or placement so verification stays total.
    let n = g.node_count();
    let nodes_of = |layer: &Layer| -> Vec<usize> {
        match layer {
            Layer::Swap { pairs } => pairs.iter().flat_map(|&(a, b)| [a, b]).collect(),
            Layer::Shift { moves } => moves.iter().flat_map(|&(a, b)| [a, b]).collect(),
            Layer::Gate { gates } => gates.iter().flat_map(|g| g.nodes.iter().copied()).collect(),
        }
    };
    for node in nodes_of(layer) {
        if node >= n {
            fail(
                &mut failures,
                FailureKind::Format,
                format!("node index {} out of range for {} nodes", node, n),
            );
        }
    }
    if !failures.is_empty() {
        return LayerCheck { failures, max_occupancy, locality_ok: false, occupancy_ok };
    }
    match layer {
        Layer::Swap { pairs } => {
            let mut used = vec![false; placement.len()];
            for &(a, b) in pairs {
                if !g.is_edge_index(a, b) {
                    locality_ok = false;
                    fail(&mut failures, FailureKind::Locality, format!("swap ({}, {}) is not an edge", a, b));
                }
                for node in [a, b] {
                    if used[node] {
                        occupancy_ok = false;
                        fail(&mut failures, FailureKind::Occupancy, format!("node {} in two swap pairs", node));
                    }
                    used[node] = true;
                }
            }
            if failures.is_empty() {
                for &(a, b) in pairs {
                    placement.slots.swap(a, b);
                }
            }
        }
        Layer::Shift { moves } => {
            let mut is_source = vec![false; placement.len()];
            let mut incoming = vec![0usize; placement.len()];
            for &(from, to) in moves {
                if !g.is_edge_index(from, to) {
                    locality_ok = false;
                    fail(&mut failures, FailureKind::Locality, format!("move ({}, {}) is not an edge", from, to));
                }
                if is_source[from] {
                    occupancy_ok = false;
                    fail(&mut failures, FailureKind::Occupancy, format!("node {} sources two moves", from));
                }
                is_source[from] = true;
                incoming[to] += 1;
                if incoming[to] > 1 {
                    occupancy_ok = false;
                    fail(&mut failures, FailureKind::Occupancy, format!("node {} targets two moves", to));
                }
                if placement.qubit_at(from).is_none() {
                    occupancy_ok = false;
                    fail(&mut failures, FailureKind::Occupancy, format!("shift source {} is empty", from));
                }
            }
            for &(_, to) in moves {
                let resident = placement.qubit_at(to).is_some();
                if resident && !is_source[to] {
                    occupancy_ok = false;
                    fail(
                        &mut failures,
                        FailureKind::Occupancy,
                        format!("shift target {} occupied and not departing", to),
                    );
                }
                // Transient in-layer occupancy: resident plus arrival.
                let held = incoming[to] + resident as usize;
                max_occupancy = max_occupancy.max(held);
            }
            if failures.is_empty() {
                let before = placement.clone();
                for &(from, _) in moves {
                    placement.slots[from] = None;
                }
                for &(from, to) in moves {
                    placement.slots[to] = before.slots[from];
                }
            }
        }
        Layer::Gate { gates } => {
            let mut used = vec![false; placement.len()];
            for gate in gates {
                if gate.nodes.len() == 2 && !g.is_edge_index(gate.nodes[0], gate.nodes[1]) {
                    locality_ok = false;
                    fail(
                        &mut failures,
                        FailureKind::Locality,
                        format!("gate {} on {:?} is not an edge", gate.label, gate.nodes),
                    );
                }
                for &node in &gate.nodes {
                    if used[node] {
                        occupancy_ok = false;
                        fail(&mut failures, FailureKind::Occupancy, format!("node {} in two gates", node));
                    }
                    used[node] = true;
                }
            }
        }
    }
    LayerCheck { failures, max_occupancy, locality_ok, occupancy_ok }
}

/// Simulate a schedule from the identity placement and check it against the
/// target permutation: (a) every move on a graph edge, (b) at most two qubits
/// per node inside a layer and one between layers, (c) the qubit starting at
/// `a` ends at `target(a)` for all `a`. Verification is total; malformed
/// schedules produce failure entries rather than errors.
pub fn verify_schedule(g: &ButterflyGraph, schedule: &Schedule, target: &Permutation) -> VerifyReport {
    let n = g.node_count();
    let mut report = VerifyReport {
        pass: false,
        locality_ok: true,
        occupancy_ok: true,
        correctness_ok: true,
        depth: 0,
        max_layer_occupancy: 1,
        max_boundary_occupancy: 1,
        failures: Vec::new(),
    };
    if schedule.r != g.r() {
        report.failures.push(Failure {
            layer: None,
            kind: FailureKind::Format,
            message: format!("schedule is for r={}, graph has r={}", schedule.r, g.r()),
        });
        report.correctness_ok = false;
        return report;
    }
    if target.len() != n {
        report.failures.push(Failure {
            layer: None,
            kind: FailureKind::Format,
            message: format!("permutation has length {}, graph has {} nodes", target.len(), n),
        });
        report.correctness_ok = false;
        return report;
    }
    let mut placement = Placement::identity(n);
    let mut simulation_sound = true;
    for (idx, sl) in schedule.layers.iter().enumerate() {
        if !sl.layer.is_empty() {
            report.depth += 1;
        }
        let check = check_layer(g, &mut placement, &sl.layer, idx);
        report.locality_ok &= check.locality_ok;
        report.occupancy_ok &= check.occupancy_ok;
        report.max_layer_occupancy = report.max_layer_occupancy.max(check.max_occupancy);
        simulation_sound &= check.failures.is_empty();
        report.failures.extend(check.failures);
    }
    if simulation_sound {
        for a in 0..n {
            let expected = target.apply(a);
            if placement.qubit_at(expected) != Some(a) {
                report.correctness_ok = false;
                let actual = placement
                    .positions(n)[a]
                    .map(|p| p.to_string())
                    .unwrap_or_else(|| "nowhere".to_string());
                report.failures.push(Failure {
                    layer: None,
                    kind: FailureKind::Correctness,
                    message: format!("qubit {} should end at node {}, found at {}", a, expected, actual),
                });
            }
        }
    } else {
        report.correctness_ok = false;
    }
    report.pass = report.locality_ok && report.occupancy_ok && report.correctness_ok;
    report
}

// --- JSON interchange -------------------------------------------------------

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("unknown layer kind {0:?}")]
    UnknownKind(String),
    #[error("unknown phase {0}")]
    UnknownPhase(u8),
    #[error("layer {0}: missing {1} field")]
    MissingField(usize, &'static str),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct LayerJson {
    pub kind: String,
    #[serde(default)]
    pub phase: u8,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestep: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub moves: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gates: Option<Vec<GateJson>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct GateJson {
    pub gate: String,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleJson {
    r: usize,
    layers: Vec<LayerJson>,
}

pub(crate) fn layer_to_json(phase: Phase, layer: &Layer, timestep: Option<usize>) -> LayerJson {
    match layer {
        Layer::Swap { pairs } => LayerJson {
            kind: "swap".to_string(),
            phase: phase.as_int(),
            timestep,
            moves: Some(pairs.iter().map(|&(a, b)| [a, b]).collect()),
            gates: None,
        },
        Layer::Shift { moves } => LayerJson {
            kind: "shift".to_string(),
            phase: phase.as_int(),
            timestep,
            moves: Some(moves.iter().map(|&(a, b)| [a, b]).collect()),
            gates: None,
        },
        Layer::Gate { gates } => LayerJson {
            kind: "gate".to_string(),
            phase: phase.as_int(),
            timestep,
            gates: Some(
                gates
                    .iter()
                    .map(|g| GateJson { gate: g.label.clone(), nodes: g.nodes.clone() })
                    .collect(),
            ),
            moves: None,
        },
    }
}

pub(crate) fn layer_from_json(idx: usize, lj: &LayerJson) -> Result<(Phase, Layer), FormatError> {
    let phase = Phase::from_int(lj.phase).ok_or(FormatError::UnknownPhase(lj.phase))?;
    let layer = match lj.kind.as_str() {
        "swap" => Layer::Swap {
            pairs: lj
                .moves
                .as_ref()
                .ok_or(FormatError::MissingField(idx, "moves"))?
                .iter()
                .map(|&[a, b]| (a, b))
                .collect(),
        },
        "shift" => Layer::Shift {
            moves: lj
                .moves
                .as_ref()
                .ok_or(FormatError::MissingField(idx, "moves"))?
                .iter()
                .map(|&[a, b]| (a, b))
                .collect(),
        },
        "gate" => Layer::Gate {
            gates: lj
                .gates
                .as_ref()
                .ok_or(FormatError::MissingField(idx, "gates"))?
                .iter()
                .map(|g| BoundGate { label: g.gate.clone(), nodes: g.nodes.clone() })
                .collect(),
        },
        other => return Err(FormatError::UnknownKind(other.to_string())),
    };
    Ok((phase, layer))
}

impl Schedule {
    pub fn to_json_string(&self) -> String {
        let doc = ScheduleJson {
            r: self.r,
            layers: self
                .layers
                .iter()
                .map(|sl| layer_to_json(sl.phase, &sl.layer, None))
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("schedule serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Schedule, FormatError> {
        let doc: ScheduleJson = serde_json::from_str(s)?;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (idx, lj) in doc.layers.iter().enumerate() {
            let (phase, layer) = layer_from_json(idx, lj)?;
            layers.push(ScheduleLayer { phase, layer });
        }
        Ok(Schedule { r: doc.r, layers })
    }
}

/// Load a permutation from its JSON file form: either a bare array or an
/// object `{"image": [...]}`.
pub fn permutation_from_json_str(s: &str) -> Result<Permutation, String> {
    let value: serde_json::Value = serde_json::from_str(s).map_err(|e| e.to_string())?;
    let arr = match &value {
        serde_json::Value::Array(a) => a,
        serde_json::Value::Object(o) => o
            .get("image")
            .and_then(|v| v.as_array())
            .ok_or("expected an array or an object with an \"image\" array")?,
        _ => return Err("expected an array or an object with an \"image\" array".to_string()),
    };
    let mut image = Vec::with_capacity(arr.len());
    for v in arr {
        let x = v.as_u64().ok_or("permutation entries must be non-negative integers")?;
        image.push(x as usize);
    }
    Permutation::new(image).map_err(|e| e.to_string())
}

pub fn permutation_to_json_string(p: &Permutation) -> String {
    serde_json::to_string(p.as_slice()).expect("permutation serialization")
}

/// Count how many qubits each node holds; handy for occupancy assertions in
/// tests.
pub fn occupancy_histogram(p: &Placement) -> HashMap<usize, usize> {
    let mut hist = HashMap::new();
    for node in 0..p.len() {
        if p.qubit_at(node).is_some() {
            *hist.entry(node).or_insert(0) += 1;
        }
    }
    hist
}

//! Deterministic instance generators shared by the criterion benchmarks.

use butterfly_core::compiler::{Circuit, Gate};
use butterfly_core::schedule::Permutation;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Permutation {
    let mut image: Vec<usize> = (0..n).collect();
    image.shuffle(rng);
    Permutation::new(image).expect("shuffled identity is a bijection")
}

/// Circuit of `timesteps` steps, each with `gates` two-qubit gates on
/// disjoint qubit pairs.
pub fn random_circuit(qubits: usize, timesteps: usize, gates: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let mut steps = Vec::with_capacity(timesteps);
    for _ in 0..timesteps {
        let mut order: Vec<usize> = (0..qubits).collect();
        order.shuffle(rng);
        let mut step: Vec<Gate> = (0..gates)
            .map(|k| Gate::two("CNOT", order[2 * k], order[2 * k + 1]))
            .collect();
        if 2 * gates < qubits && rng.random_bool(0.5) {
            step.push(Gate::one("H", order[2 * gates]));
        }
        steps.push(step);
    }
    Circuit::new(qubits, steps).expect("generated circuit is well-formed")
}

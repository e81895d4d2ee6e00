//! Comparator networks: parallel insertion sort on a path (depth `2m - 3`)
//! and bitonic sort on a hypercube (depth `k(k+1)/2` for `2^k` inputs).
//!
//! Comparators are ascending: `comparator(x, y)` returns the pair in
//! ascending order and leaves ties unchanged. A stage stores ordered
//! position pairs `(lo, hi)`; after the stage the smaller key sits at `lo`.
//! Executing a network on concrete keys records which comparators actually
//! swapped — replayed on qubits, each firing becomes a SWAP gate.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("network width must be at least 2, got {0}")]
    WidthTooSmall(usize),
    #[error("bitonic width must be a power of two, got {0}")]
    NotPowerOfTwo(usize),
    #[error("got {got} keys for a width-{width} network")]
    LengthMismatch { got: usize, width: usize },
}

/// Which host graph the network's comparators respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Host {
    /// Comparators touch only adjacent positions, `|a - b| = 1`.
    PathAdjacent,
    /// Comparators touch only positions at Hamming distance 1.
    HypercubeAdjacent,
}

/// A fixed sequence of comparator stages; comparators within a stage are
/// position-disjoint.
#[derive(Debug, Clone)]
pub struct ComparatorNetwork {
    width: usize,
    host: Host,
    stages: Vec<Vec<(usize, usize)>>,
}

/// Ascending comparator: min first, ties unchanged.
pub fn comparator<T: Ord>(x: T, y: T) -> (T, T) {
    if y < x {
        (y, x)
    } else {
        (x, y)
    }
}

/// Parallel insertion sort on a path of `m` positions. Stage `s` (1-indexed)
/// compares `(i, i+1)` for `i` of parity `s - 1` inside the diamond
/// `i + 1 <= s <= 2m - 3 - i`; total depth is exactly `2m - 3`.
pub fn insertion_network(m: usize) -> Result<ComparatorNetwork, NetworkError> {
    if m < 2 {
        return Err(NetworkError::WidthTooSmall(m));
    }
    let depth = 2 * m - 3;
    let mut stages = Vec::with_capacity(depth);
    for s in 1..=depth {
        let mut stage = Vec::new();
        for i in 0..m - 1 {
            if i % 2 == (s - 1) % 2 && i < s && s <= depth - i {
                stage.push((i, i + 1));
            }
        }
        stages.push(stage);
    }
    Ok(ComparatorNetwork { width: m, host: Host::PathAdjacent, stages })
}

/// Bitonic sort on `m = 2^k` positions; every comparator joins positions at
/// Hamming distance 1, so the network runs on a hypercube. Depth is exactly
/// `k(k+1)/2`.
pub fn bitonic_network(m: usize) -> Result<ComparatorNetwork, NetworkError> {
    if m < 2 {
        return Err(NetworkError::WidthTooSmall(m));
    }
    if !m.is_power_of_two() {
        return Err(NetworkError::NotPowerOfTwo(m));
    }
    let k = m.trailing_zeros() as usize;
    let mut stages = Vec::with_capacity(k * (k + 1) / 2);
    for p in 1..=k {
        for j in (0..p).rev() {
            let mut stage = Vec::with_capacity(m / 2);
            for i in 0..m {
                if i & (1 << j) == 0 {
                    let partner = i | (1 << j);
                    // Blocks of size 2^p alternate direction; the final
                    // merge (p = k) is entirely ascending.
                    if i & (1 << p) == 0 {
                        stage.push((i, partner));
                    } else {
                        stage.push((partner, i));
                    }
                }
            }
            stages.push(stage);
        }
    }
    Ok(ComparatorNetwork { width: m, host: Host::HypercubeAdjacent, stages })
}

/// Output of executing a network on concrete keys.
#[derive(Debug, Clone)]
pub struct Execution<T> {
    pub sorted: Vec<T>,
    /// Per stage, the comparators that actually swapped their keys.
    pub swaps: Vec<Vec<(usize, usize)>>,
}

impl ComparatorNetwork {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn host(&self) -> Host {
        self.host
    }

    pub fn stages(&self) -> &[Vec<(usize, usize)>] {
        &self.stages
    }

    /// Execute the network, returning the sorted keys and the executed swap
    /// stages. Stages where nothing swapped are emitted empty.
    pub fn run<T: Ord + Copy>(&self, keys: &[T]) -> Result<Execution<T>, NetworkError> {
        if keys.len() != self.width {
            return Err(NetworkError::LengthMismatch { got: keys.len(), width: self.width });
        }
        let mut work = keys.to_vec();
        let mut swaps = Vec::with_capacity(self.stages.len());
        for stage in &self.stages {
            let mut fired = Vec::new();
            for &(lo, hi) in stage {
                if work[hi] < work[lo] {
                    work.swap(lo, hi);
                    fired.push((lo, hi));
                }
            }
            swaps.push(fired);
        }
        Ok(Execution { sorted: work, swaps })
    }

    /// Every comparator respects the declared host constraint.
    pub fn respects_host(&self) -> bool {
        self.stages.iter().flatten().all(|&(a, b)| match self.host {
            Host::PathAdjacent => a.abs_diff(b) == 1,
            Host::HypercubeAdjacent => (a ^ b).count_ones() == 1,
        })
    }

    /// Zero-one principle: the network sorts every input iff it sorts all
    /// binary inputs. Exhaustive over `2^width` sequences.
    pub fn sorts_all_binary_inputs(&self) -> bool {
        for bits in 0..(1u64 << self.width) {
            let keys: Vec<u8> = (0..self.width).map(|i| ((bits >> i) & 1) as u8).collect();
            let out = self.run(&keys).unwrap().sorted;
            if out.windows(2).any(|w| w[0] > w[1]) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn permutations(m: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut items: Vec<usize> = (0..m).collect();
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
        heap(m, &mut items, &mut out);
        out
    }

    #[test]
    fn comparator_orientation() {
        assert_eq!(comparator(2, 5), (2, 5));
        assert_eq!(comparator(5, 2), (2, 5));
        assert_eq!(comparator(3, 3), (3, 3));
    }

    #[test]
    fn insertion_depth_formula() {
        assert_eq!(insertion_network(8).unwrap().depth(), 13);
        assert_eq!(insertion_network(2).unwrap().depth(), 1);
        for m in 2..=64 {
            assert_eq!(insertion_network(m).unwrap().depth(), 2 * m - 3);
        }
        assert!(insertion_network(1).is_err());
    }

    #[test]
    fn insertion_sorts_all_permutations_of_5() {
        let net = insertion_network(5).unwrap();
        for p in permutations(5) {
            let out = net.run(&p).unwrap().sorted;
            assert_eq!(out, (0..5).collect::<Vec<_>>(), "input {:?}", p);
        }
    }

    #[test]
    fn bitonic_depth_formula() {
        assert_eq!(bitonic_network(8).unwrap().depth(), 6);
        assert_eq!(bitonic_network(2).unwrap().depth(), 1);
        for k in 1..=6 {
            assert_eq!(bitonic_network(1 << k).unwrap().depth(), k * (k + 1) / 2);
        }
        assert!(bitonic_network(6).is_err());
        assert!(bitonic_network(1).is_err());
    }

    #[test]
    fn bitonic_sorts_all_permutations_of_8() {
        let net = bitonic_network(8).unwrap();
        for p in permutations(8) {
            let out = net.run(&p).unwrap().sorted;
            assert_eq!(out, (0..8).collect::<Vec<_>>(), "input {:?}", p);
        }
    }

    #[test]
    fn host_constraints_hold() {
        for m in 2..=16 {
            assert!(insertion_network(m).unwrap().respects_host());
        }
        for k in 1..=5 {
            assert!(bitonic_network(1 << k).unwrap().respects_host());
        }
    }

    #[test]
    fn sorted_input_fires_nothing() {
        let net = insertion_network(6).unwrap();
        let exec = net.run(&[1, 2, 3, 4, 5, 6]).unwrap();
        assert!(exec.swaps.iter().all(Vec::is_empty));
    }

    #[test]
    fn reverse_input_fires_once_per_inversion() {
        let net = insertion_network(4).unwrap();
        let exec = net.run(&[4, 3, 2, 1]).unwrap();
        assert_eq!(exec.sorted, vec![1, 2, 3, 4]);
        let total: usize = exec.swaps.iter().map(Vec::len).sum();
        // Adjacent-transposition sorting performs exactly one swap per
        // inversion; reversed order of 4 has 6 inversions.
        assert_eq!(total, 6);
    }

    #[test]
    fn executed_swaps_replay_to_output() {
        let net = insertion_network(7).unwrap();
        let input = [5usize, 1, 6, 0, 3, 2, 4];
        let exec = net.run(&input).unwrap();
        let mut replay = input.to_vec();
        for stage in &exec.swaps {
            for &(a, b) in stage {
                replay.swap(a, b);
            }
        }
        assert_eq!(replay, exec.sorted);
    }

    #[test]
    fn networks_agree_on_random_keys() {
        let nets = [insertion_network(8).unwrap(), bitonic_network(8).unwrap()];
        // Deterministic scramble of key sets, no RNG needed.
        let mut keys: Vec<u64> = (0..8).map(|i| (i * 2654435761u64) % 97).collect();
        for round in 0..50 {
            keys.rotate_left(round % 8);
            keys.swap(round % 8, (round * 3 + 1) % 8);
            let a = nets[0].run(&keys).unwrap().sorted;
            let b = nets[1].run(&keys).unwrap().sorted;
            assert_eq!(a, b);
            assert!(a.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn zero_one_principle_small_widths() {
        for m in 2..=10 {
            assert!(insertion_network(m).unwrap().sorts_all_binary_inputs(), "m={}", m);
        }
        for k in 1..=3 {
            assert!(bitonic_network(1 << k).unwrap().sorts_all_binary_inputs(), "k={}", k);
        }
    }
}

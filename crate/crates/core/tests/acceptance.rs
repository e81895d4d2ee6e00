//! Acceptance suite: one test per claimed property of the artifact, each
//! printing a pass line with the scope it covered. Run with
//! `cargo test -p butterfly-core --test acceptance -- --nocapture`.

use butterfly_core::benes::benes_route;
use butterfly_core::coloring::{build_routing_graph, color_edges, validate_coloring};
use butterfly_core::compiler::{compile_circuit, verify_program, Circuit, Gate};
use butterfly_core::matching::maximum_matching;
use butterfly_core::router::{depth_bound, route_permutation};
use butterfly_core::schedule::{verify_schedule, Layer, Permutation, Phase};
use butterfly_core::sorting::{bitonic_network, insertion_network};
use butterfly_core::topology::{build_butterfly, build_kary_butterfly, quotient_rows, ring_expand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_cafe;

fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Permutation {
    let mut image: Vec<usize> = (0..n).collect();
    image.shuffle(rng);
    Permutation::new(image).unwrap()
}

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

#[test]
fn criterion_01_every_node_has_degree_4() {
    for r in 3..=10 {
        let g = build_butterfly(r).unwrap();
        assert_eq!(g.node_count(), r * (1 << r));
        for v in 0..g.node_count() {
            assert_eq!(g.degree(v), 4, "r={} node {}", r, v);
        }
    }
    println!("criterion 1 (degree exactly 4, r=3..10, exhaustive): PASS");
}

#[test]
fn criterion_02_row_quotient_is_the_hypercube() {
    for r in 3..=8 {
        let g = build_butterfly(r).unwrap();
        let q = quotient_rows(&g);
        assert_eq!(q.node_count(), 1 << r);
        for u in 0..q.node_count() {
            let expected: Vec<usize> = {
                let mut nbrs: Vec<usize> = (0..r).map(|b| u ^ (1 << b)).collect();
                nbrs.sort_unstable();
                nbrs
            };
            assert_eq!(q.neighbors(u), &expected[..], "r={} row {}", r, u);
        }
    }
    println!("criterion 2 (row quotient equals Q_r under identity labels, r<=8): PASS");
}

#[test]
fn criterion_03_benes_embedding_routes_all_row_permutations() {
    // r = 3: every one of the 8! = 40320 row permutations, exhaustively.
    let bit_order: Vec<usize> = (0..3).collect();
    for target in all_permutations(8) {
        let plan = benes_route(&target, &bit_order).unwrap();
        assert_eq!(plan.depth(), 6);
        assert!(plan.collision_free(), "target {:?}", target);
        assert_eq!(plan.simulate(), target);
    }
    // r = 4, 5, 6: ten thousand random permutations each.
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    for r in 4..=6 {
        let rows = 1 << r;
        let bit_order: Vec<usize> = (0..r).collect();
        for _ in 0..10_000 {
            let mut target: Vec<usize> = (0..rows).collect();
            target.shuffle(&mut rng);
            let plan = benes_route(&target, &bit_order).unwrap();
            assert_eq!(plan.depth(), 2 * r);
            assert!(plan.collision_free());
            assert_eq!(plan.simulate(), target);
        }
    }
    println!("criterion 3 (Benes routing collision-free in 2r levels; r=3 exhaustive, r=4..6 x10^4): PASS");
}

fn criterion_4_instances(r: usize) -> Vec<Permutation> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ (4000 + r as u64));
    (0..100).map(|_| random_permutation(r * (1 << r), &mut rng)).collect()
}

#[test]
fn criterion_04_exact_depths_and_verified_schedules() {
    for r in 3..=8 {
        let g = build_butterfly(r).unwrap();
        let n = g.node_count();
        let (exact, _) = depth_bound(r).unwrap();
        let log_bound = 6.0 * (n as f64).log2();
        assert!((exact as f64) < log_bound, "r={}", r);
        for (i, pi) in criterion_4_instances(r).iter().enumerate() {
            let result = route_permutation(&g, pi).unwrap();
            assert_eq!(result.depth_pre_elision, 6 * r - 6, "r={} instance {}", r, i);
            assert_eq!(result.phase_depths_pre, (2 * r - 3, 2 * r, 2 * r - 3));
            let report = verify_schedule(&g, &result.schedule, pi);
            assert!(report.pass, "r={} instance {}: {:?}", r, i, report.failures);
            assert!(report.locality_ok && report.occupancy_ok && report.correctness_ok);
            assert!(report.depth <= exact);
        }
    }
    println!("criterion 4 (pre-elision depth 6r-6, phases (2r-3, 2r, 2r-3), all verified; r=3..8 x100): PASS");
}

#[test]
fn criterion_05_space_overhead_is_two() {
    let mut shift_max = 0;
    for r in 3..=6 {
        let g = build_butterfly(r).unwrap();
        for pi in criterion_4_instances(r).iter().take(25) {
            let result = route_permutation(&g, pi).unwrap();
            let report = verify_schedule(&g, &result.schedule, pi);
            assert!(report.pass);
            assert!(report.max_layer_occupancy <= 2);
            assert!(report.max_boundary_occupancy <= 1);
            if result.phase_depths.1 > 0 {
                shift_max = shift_max.max(report.max_layer_occupancy);
            }
        }
    }
    // The ancilla really is used: shift layers reach occupancy 2.
    assert_eq!(shift_max, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    for r in 3..=5 {
        let g = build_butterfly(r).unwrap();
        let n = g.node_count();
        let circuit = random_circuit(n, 5, n / 4, &mut rng);
        let program = compile_circuit(&g, &circuit).unwrap();
        let report = verify_program(&g, &circuit, &program);
        assert!(report.pass, "{:?}", report.failures);
        assert!(report.max_layer_occupancy <= 2);
    }
    println!("criterion 5 (occupancy <= 2 inside shift layers, <= 1 at boundaries): PASS");
}

#[test]
fn criterion_06_edge_colorings_proper_with_r_colors() {
    for r in 3..=8 {
        let n = r * (1 << r);
        let rows = 1 << r;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ (6000 + r as u64));
        for i in 0..1000 {
            let pi = random_permutation(n, &mut rng);
            let rg = build_routing_graph(&pi, r).unwrap();
            let coloring = color_edges(&rg).unwrap();
            assert!(validate_coloring(&rg, &coloring), "r={} instance {}", r, i);
            assert_eq!(coloring.num_colors(), r);
            // Each color class is a perfect matching between rows.
            let mut u_hits = vec![vec![false; r]; rows];
            let mut v_hits = vec![vec![false; r]; rows];
            for (e, edge) in rg.edges().iter().enumerate() {
                let c = coloring.color(e);
                assert!(c < r);
                assert!(!u_hits[edge.source_row][c] && !v_hits[edge.dest_row][c]);
                u_hits[edge.source_row][c] = true;
                v_hits[edge.dest_row][c] = true;
            }
            assert!(u_hits.iter().flatten().all(|&x| x));
            assert!(v_hits.iter().flatten().all(|&x| x));
        }
    }
    println!("criterion 6 (proper r-colorings, color classes perfect matchings; r=3..8 x1000): PASS");
}

#[test]
fn criterion_07_sorting_network_depth_formulas() {
    for m in 2..=64 {
        assert_eq!(insertion_network(m).unwrap().depth(), 2 * m - 3);
    }
    for k in 1..=6 {
        assert_eq!(bitonic_network(1 << k).unwrap().depth(), k * (k + 1) / 2);
    }
    // Zero-one principle, exhaustive binary inputs up to width 12.
    for m in 2..=12 {
        assert!(insertion_network(m).unwrap().sorts_all_binary_inputs(), "insertion m={}", m);
        if m.is_power_of_two() {
            assert!(bitonic_network(m).unwrap().sorts_all_binary_inputs(), "bitonic m={}", m);
        }
    }
    // Every input permutation up to width 8.
    for m in 2..=8 {
        let insertion = insertion_network(m).unwrap();
        let bitonic = m.is_power_of_two().then(|| bitonic_network(m).unwrap());
        for p in all_permutations(m) {
            let sorted: Vec<usize> = (0..m).collect();
            assert_eq!(insertion.run(&p).unwrap().sorted, sorted);
            if let Some(net) = &bitonic {
                assert_eq!(net.run(&p).unwrap().sorted, sorted);
            }
        }
    }
    println!("criterion 7 (insertion depth 2m-3, bitonic k(k+1)/2; zero-one m<=12; all inputs m<=8): PASS");
}

fn random_circuit(qubits: usize, timesteps: usize, max_gates: usize, rng: &mut ChaCha8Rng) -> Circuit {
    use rand::Rng;
    let mut steps = Vec::new();
    for _ in 0..timesteps {
        let mut order: Vec<usize> = (0..qubits).collect();
        order.shuffle(rng);
        let gates = rng.random_range(0..=max_gates);
        let mut step: Vec<Gate> = (0..gates)
            .map(|k| Gate::two("CNOT", order[2 * k], order[2 * k + 1]))
            .collect();
        if 2 * gates < qubits && rng.random_bool(0.5) {
            step.push(Gate::one("H", order[2 * gates]));
        }
        steps.push(step);
    }
    Circuit::new(qubits, steps).unwrap()
}

fn criterion_8_programs(emit: &mut dyn FnMut(usize, &Circuit, &butterfly_core::compiler::CompiledProgram)) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    for case in 0..50 {
        let r = 3 + case % 4; // r in 3..=6
        let g = build_butterfly(r).unwrap();
        let n = g.node_count();
        let adjacency: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
        let matching_size = maximum_matching(&adjacency).len();
        let circuit = random_circuit(n, 10, matching_size, &mut rng);
        let program = compile_circuit(&g, &circuit).unwrap();
        emit(r, &circuit, &program);
    }
}

#[test]
fn criterion_08_compiled_circuits_are_local_and_ordered() {
    let mut cases = 0;
    criterion_8_programs(&mut |r, circuit, program| {
        let g = build_butterfly(r).unwrap();
        let report = verify_program(&g, circuit, program);
        assert!(report.pass, "r={}: {:?}", r, report.failures);
        assert_eq!(report.gates_checked, circuit.gate_count());
        // Every two-qubit gate bound to a graph edge.
        for pl in &program.layers {
            if let Layer::Gate { gates } = &pl.layer {
                for bg in gates {
                    if bg.nodes.len() == 2 {
                        assert!(g.is_edge_index(bg.nodes[0], bg.nodes[1]));
                    }
                }
            }
        }
        for stats in &program.timestep_stats {
            assert!(stats.routing_depth <= 6 * r - 6);
        }
        cases += 1;
    });
    assert_eq!(cases, 50);
    println!("criterion 8 (50 compiled circuits: gates local, order kept, depth <= 6r-6 per timestep): PASS");
}

#[test]
fn criterion_09_fixed_seeds_reproduce_byte_identical_output() {
    // Regenerate the criterion-4 instances from their seeds and compare the
    // serialized schedules pairwise.
    for r in 3..=8 {
        let g = build_butterfly(r).unwrap();
        let again = criterion_4_instances(r);
        for (i, (pi, pi2)) in criterion_4_instances(r).iter().zip(&again).enumerate() {
            assert_eq!(pi, pi2, "instance generation diverged at r={} i={}", r, i);
            let a = route_permutation(&g, pi).unwrap().schedule.to_json_string();
            let b = route_permutation(&g, pi2).unwrap().schedule.to_json_string();
            assert_eq!(a, b, "r={} instance {}", r, i);
        }
    }
    let mut first = Vec::new();
    criterion_8_programs(&mut |_, _, program| first.push(program.to_json_string()));
    let mut second = Vec::new();
    criterion_8_programs(&mut |_, _, program| second.push(program.to_json_string()));
    assert_eq!(first, second);
    println!("criterion 9 (fixed seeds give byte-identical schedules and programs): PASS");
}

#[test]
fn criterion_10_variant_topologies_have_claimed_degrees() {
    for r in 3..=4 {
        for k in 2..=4 {
            let v = build_kary_butterfly(r, k).unwrap();
            assert_eq!(v.graph.node_count(), r * k.pow(r as u32));
            for i in 0..v.graph.node_count() {
                assert_eq!(v.graph.degree(i), 2 * k, "r={} k={} node {}", r, k, i);
            }
        }
        let ring = ring_expand(&build_butterfly(r).unwrap());
        assert_eq!(ring.graph.node_count(), 4 * r * (1 << r));
        for i in 0..ring.graph.node_count() {
            assert_eq!(ring.graph.degree(i), 3, "r={} vertex {}", r, i);
        }
        assert!(ring.graph.is_connected());
    }
    println!("criterion 10 (k-ary degree 2k for k=2..4; ring expansion degree 3; r=3,4 exhaustive): PASS");
}

#[test]
fn schedules_elide_identity_routing() {
    // Companion check used throughout: the identity permutation costs zero
    // layers while the structural accounting still reports 6r-6.
    for r in 3..=5 {
        let g = build_butterfly(r).unwrap();
        let pi = Permutation::identity(g.node_count());
        let result = route_permutation(&g, &pi).unwrap();
        assert_eq!(result.depth_post_elision, 0);
        assert_eq!(result.depth_pre_elision, 6 * r - 6);
        assert!(result.schedule.layers.iter().all(|l| l.phase != Phase::Gate));
    }
}

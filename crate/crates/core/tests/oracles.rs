mod common;

use common::{
    brute_force_cost, c, cnot_permutation, random_connected_map, random_pairs, random_state, Plain,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use teleroute::lowering::{establish_channel, lower_swap, lower_teleport, TeleportBits};
use teleroute::router::{bridge_gate_count, bridge_plan, lower_bound, route_layer, SearchOptions};
use teleroute::verify::{fidelity, product_state, random_qubit, simulate_branching, zero_state};
use teleroute::{Circuit, CostModel, CouplingMap, Gate, GateKind};

fn basis(qubits: usize, index: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); 1 << qubits];
    v[index] = c(1.0, 0.0);
    v
}

fn run_unitary(gates: &[Gate], qubits: usize, input: Vec<Complex64>) -> Vec<Complex64> {
    let mut circuit = Circuit::new(qubits);
    for g in gates {
        circuit.push(g.clone());
    }
    let mut out = simulate_branching(&circuit, input, 20).unwrap();
    assert_eq!(out.len(), 1);
    out.pop().unwrap().amplitudes
}

#[test]
fn bridge_realizes_the_long_range_cnot() {
    let line = CouplingMap::line(4);
    for target in 1..4 {
        let plan = bridge_plan(&line, 0, target);
        assert_eq!(plan.len(), bridge_gate_count(target as u32 - 1));
        let pairs: Vec<(usize, usize)> = plan.iter().map(|g| (g.qubits[0], g.qubits[1])).collect();
        assert_eq!(
            cnot_permutation(&pairs, 4),
            cnot_permutation(&[(0, target)], 4)
        );

        let want = cnot_permutation(&[(0, target)], 4);
        for (x, &image) in want.iter().enumerate() {
            let got = run_unitary(&plan, 4, basis(4, x));
            for (i, a) in got.iter().enumerate() {
                let expected = if i == image { 1.0 } else { 0.0 };
                assert!((a - c(expected, 0.0)).norm() <= 1e-12);
            }
        }
    }
    assert_eq!(
        [1, 2, 3].map(|k| bridge_plan(&line, 3, 3 - k).len()),
        [1, 4, 10]
    );
}

#[test]
fn bridge_on_tokyo_keeps_to_edges() {
    let t = CouplingMap::tokyo();
    for (a, b) in [(0, 19), (3, 16), (15, 4)] {
        let plan = bridge_plan(&t, a, b);
        assert_eq!(plan.len(), bridge_gate_count(t.distance(a, b) - 1));
        assert!(plan.iter().all(|g| t.is_edge(g.qubits[0], g.qubits[1])));
        let pairs: Vec<(usize, usize)> = plan.iter().map(|g| (g.qubits[0], g.qubits[1])).collect();
        assert_eq!(cnot_permutation(&pairs, 20)[1 << a], (1 << a) | (1 << b));
    }
}

#[test]
fn swap_lowering_is_the_swap_matrix() {
    let gates = lower_swap(0, 1);
    for x in 0..4 {
        let swapped = (x >> 1) | ((x & 1) << 1);
        let got = run_unitary(&gates, 2, basis(2, x));
        assert_eq!(got, basis(2, swapped));
    }
    // |10> in q1 q0 order is index 2; after the swap it is index 1.
    assert_eq!(run_unitary(&gates, 2, basis(2, 2)), basis(2, 1));
}

#[test]
fn establishment_makes_a_bell_pair() {
    let line = CouplingMap::line(2);
    let gates = establish_channel(&line, 1, 0).unwrap();
    assert_eq!(gates, vec![Gate::single(GateKind::H, 0), Gate::cx(0, 1)]);
    let state = run_unitary(&gates, 2, zero_state(2));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
    assert!(fidelity(&state, &bell) >= 1.0 - 1e-12);

    let mut circuit = Circuit::new(2);
    circuit.add_creg("c", 2);
    for g in gates {
        circuit.push(g);
    }
    circuit.push(Gate::measure(0, 0));
    circuit.push(Gate::measure(1, 1));
    let branches = simulate_branching(&circuit, zero_state(2), 20).unwrap();
    assert_eq!(branches.len(), 2);
    for b in branches {
        assert_eq!(b.clbits[0], b.clbits[1]);
        assert!((b.probability - 0.5).abs() < 1e-12);
    }
}

/// Source on qubit 0, channel (1, 2) established first.
fn gadget_circuit() -> Circuit {
    let line = CouplingMap::line(3);
    let mut circuit = Circuit::new(3);
    let r0 = circuit.add_creg("c0", 1);
    let r1 = circuit.add_creg("c1", 1);
    for g in establish_channel(&line, 1, 2).unwrap() {
        circuit.push(g);
    }
    let bits = TeleportBits {
        source: (r0, 0),
        near: (r1, 1),
    };
    for g in lower_teleport(&line, 0, 1, 2, bits).unwrap() {
        circuit.push(g);
    }
    circuit
}

/// `psi` on qubit 2 with (|00> + |11>)/sqrt 2 on qubits 0 and 1.
fn teleported(psi: (Complex64, Complex64)) -> Vec<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    (0..8)
        .map(|x| {
            let pair = x & 3;
            let amp = if x >> 2 == 0 { psi.0 } else { psi.1 };
            if pair == 0 || pair == 3 {
                amp * h
            } else {
                c(0.0, 0.0)
            }
        })
        .collect()
}

#[test]
fn gadget_moves_one_to_the_far_end() {
    let circuit = gadget_circuit();
    let one = (c(0.0, 0.0), c(1.0, 0.0));
    let zero = (c(1.0, 0.0), c(0.0, 0.0));
    let branches = simulate_branching(&circuit, product_state(&[one, zero, zero]), 20).unwrap();
    assert_eq!(branches.len(), 4);
    let mut outcomes: Vec<Vec<bool>> = branches.iter().map(|b| b.clbits.clone()).collect();
    outcomes.sort();
    assert_eq!(
        outcomes,
        vec![
            vec![false, false],
            vec![false, true],
            vec![true, false],
            vec![true, true]
        ]
    );
    for b in &branches {
        assert!((b.probability - 0.25).abs() < 1e-12);
        let far_one: f64 = b
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(x, _)| x & 4 != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        assert!((far_one - 1.0).abs() < 1e-12);
        assert!(fidelity(&b.amplitudes, &teleported(one)) >= 1.0 - 1e-9);
    }
}

#[test]
fn gadget_moves_plus_and_leaves_a_bell_pair() {
    let circuit = gadget_circuit();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = (c(h, 0.0), c(h, 0.0));
    let zero = (c(1.0, 0.0), c(0.0, 0.0));
    let branches = simulate_branching(&circuit, product_state(&[plus, zero, zero]), 20).unwrap();
    assert_eq!(branches.len(), 4);
    for b in &branches {
        assert!(fidelity(&b.amplitudes, &teleported(plus)) >= 1.0 - 1e-9);
    }
}

#[test]
fn gadget_on_random_states() {
    let circuit = gadget_circuit();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let zero = (c(1.0, 0.0), c(0.0, 0.0));
    for _ in 0..25 {
        let psi = random_qubit(&mut rng);
        let branches = simulate_branching(&circuit, product_state(&[psi, zero, zero]), 20).unwrap();
        assert_eq!(branches.len(), 4);
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for b in &branches {
            assert!(fidelity(&b.amplitudes, &teleported(psi)) >= 1.0 - 1e-9);
        }
    }
}

fn small_instance(
    rng: &mut ChaCha8Rng,
    pairs: usize,
) -> (
    CouplingMap,
    teleroute::MappingState,
    Plain,
    Vec<(usize, usize)>,
) {
    let m = rng.random_range(4..=6);
    let extra = rng.random_range(0..3);
    let map = random_connected_map(rng, m, extra);
    let n = rng.random_range(2 * pairs..=m.min(2 * pairs + 1));
    let channels = usize::from(m - n >= 2 && rng.random_bool(0.7));
    let (state, chans) = random_state(rng, &map, n, channels);
    let plain = Plain::new(m, state.placement(), &chans);
    let cnots = random_pairs(rng, n, pairs);
    (map, state, plain, cnots)
}

#[test]
fn astar_matches_brute_force_on_small_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..150 {
        let pairs = if case % 3 == 0 { 2 } else { 1 };
        let (map, state, plain, cnots) = small_instance(&mut rng, pairs);
        for cost in [CostModel::ibm(), CostModel::equal()] {
            for teleport in [false, true] {
                let want = brute_force_cost(&map, &plain, &cnots, &cost, teleport);
                let got = route_layer(
                    &state,
                    &cnots,
                    &[],
                    &map,
                    &cost,
                    &SearchOptions::exact(teleport),
                );
                let Some(want) = want else {
                    assert!(got.is_err(), "case {case}: unroutable layer was routed");
                    continue;
                };
                assert_eq!(
                    got.unwrap().cost,
                    want,
                    "case {case} teleport {teleport} cost {cost}"
                );
                let bound = lower_bound(&state, &cnots, &map, &cost, teleport);
                assert!(bound <= want, "case {case}: bound {bound} > optimum {want}");
            }
        }
    }
}

#[test]
fn tokyo_detour_brute_force() {
    let t = CouplingMap::tokyo();
    let plain = Plain::new(20, &[3, 16], &[(2, 17)]);
    assert_eq!(
        brute_force_cost(&t, &plain, &[(0, 1)], &CostModel::ibm(), false),
        Some(60)
    );
    assert_eq!(
        brute_force_cost(&t, &plain, &[(0, 1)], &CostModel::ibm(), true),
        Some(44)
    );
    assert_eq!(
        brute_force_cost(&t, &plain, &[(0, 1)], &CostModel::equal(), true),
        Some(1)
    );
    assert_eq!(
        brute_force_cost(&t, &plain, &[(0, 1)], &CostModel::equal(), false),
        Some(2)
    );
}

//! Long-range CNOTs realized by bridge patterns under a static mapping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arch::CouplingMap;
use crate::ir::{Circuit, Gate};

/// CNOT sequence on consecutive edges of a shortest path realizing
/// `CX(control, target)`. Over `a - b - ... - z` this is
/// `CX(a,b) CX(b..z) CX(a,b) CX(b..z)`, recursing on the tail, which gives
/// `3 * 2^k - 2` gates for `k` intermediate qubits.
pub fn bridge_plan(map: &CouplingMap, control: usize, target: usize) -> Vec<Gate> {
    let path = map.shortest_path(control, target);
    let mut out = Vec::new();
    bridge_path(&path, &mut out);
    out
}

fn bridge_path(path: &[usize], out: &mut Vec<Gate>) {
    match path {
        [a, b] => out.push(Gate::cx(*a, *b)),
        [a, b, ..] => {
            let tail = &path[1..];
            out.push(Gate::cx(*a, *b));
            bridge_path(tail, out);
            out.push(Gate::cx(*a, *b));
            bridge_path(tail, out);
        }
        _ => panic!("bridge path needs at least two qubits"),
    }
}

/// Number of gates `bridge_plan` emits across `intermediates` qubits.
pub fn bridge_gate_count(intermediates: u32) -> usize {
    3 * (1usize << intermediates) - 2
}

/// Greedy static placement minimizing the sum over interacting pairs of
/// `interactions * distance`. The most-interacting logical qubit goes to a
/// seeded random physical qubit; each following one (by interaction count)
/// takes the free position with the lowest weighted distance to those
/// already placed, lowest index on ties.
pub fn bridge_initial_mapping(circuit: &Circuit, map: &CouplingMap, seed: u64) -> Vec<usize> {
    let n = circuit.qubit_count;
    let m = map.qubit_count();
    let mut weight = vec![0u64; n * n];
    for g in circuit.gates.iter().filter(|g| g.is_cx()) {
        let (a, b) = (g.qubits[0], g.qubits[1]);
        weight[a * n + b] += 1;
        weight[b * n + a] += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    let total = |l: usize| -> u64 { weight[l * n..(l + 1) * n].iter().sum() };
    order.sort_by_key(|&l| (std::cmp::Reverse(total(l)), l));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<usize> = (0..m).collect();
    starts.shuffle(&mut rng);

    let mut placement = vec![usize::MAX; n];
    let mut used = vec![false; m];
    for (i, &l) in order.iter().enumerate() {
        let p = if i == 0 {
            starts[0]
        } else {
            (0..m)
                .filter(|&p| !used[p])
                .min_by_key(|&p| {
                    let score: u64 = (0..n)
                        .filter(|&o| placement[o] != usize::MAX)
                        .map(|o| weight[l * n + o] * u64::from(map.distance(p, placement[o])))
                        .sum();
                    (score, p)
                })
                .expect("n <= m")
        };
        placement[l] = p;
        used[p] = true;
    }
    placement
}

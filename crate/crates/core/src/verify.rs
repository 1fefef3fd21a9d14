//! Branching statevector simulation and mapping checks.
//!
//! Measurements fork the simulation into one branch per outcome, so
//! classically conditioned corrections can be checked exactly. Qubit `q`
//! is bit `q` of the basis index.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arch::CouplingMap;
use crate::ir::{Circuit, Gate, GateKind};
use crate::lowering::RoutedProgram;

pub const DEFAULT_QUBIT_LIMIT: usize = 20;
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Outcomes less likely than this are dropped.
const PRUNE_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("simulation needs {needed} qubits, limit is {limit}")]
    TooManyQubits { needed: usize, limit: usize },
    #[error("state lost normalization after gate {gate} (norm {norm})")]
    NotNormalized { gate: usize, norm: f64 },
    #[error("initial state has {got} amplitudes, expected {expected}")]
    BadInitialState { got: usize, expected: usize },
}

/// One measurement history and its post-measurement state.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    pub amplitudes: Vec<Complex64>,
    pub clbits: Vec<bool>,
    pub probability: f64,
}

impl BranchState {
    /// Value of a classical register, bit 0 least significant.
    fn register_value(&self, circuit: &Circuit, creg: usize) -> u64 {
        let off = circuit.creg_offset(creg);
        (0..circuit.cregs[creg].size)
            .filter(|&i| self.clbits[off + i])
            .fold(0u64, |acc, i| acc | (1 << i))
    }
}

/// `|0...0>` over `qubits`.
pub fn zero_state(qubits: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << qubits];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// Tensor product of single-qubit states; `factors[q]` is `(amp0, amp1)`
/// for qubit `q`.
pub fn product_state(factors: &[(Complex64, Complex64)]) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(1.0, 0.0)];
    for &(a0, a1) in factors {
        let mut next = Vec::with_capacity(v.len() * 2);
        next.extend(v.iter().map(|x| x * a0));
        next.extend(v.iter().map(|x| x * a1));
        // The new qubit becomes the highest bit.
        v = next;
    }
    v
}

/// Random single-qubit state, uniform over the Bloch sphere.
pub fn random_qubit(rng: &mut impl Rng) -> (Complex64, Complex64) {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let theta = z.acos();
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    (
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    )
}

fn matrix(kind: GateKind) -> [[Complex64; 2]; 2] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let e = |phase: f64| Complex64::from_polar(1.0, phase);
    let h = FRAC_1_SQRT_2;
    match kind {
        GateKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        GateKind::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        GateKind::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
        GateKind::S => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]],
        GateKind::Sdg => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]],
        GateKind::T => [
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), e(std::f64::consts::FRAC_PI_4)],
        ],
        GateKind::Tdg => [
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), e(-std::f64::consts::FRAC_PI_4)],
        ],
        GateKind::Rz(t) => [[e(-t / 2.0), c(0.0, 0.0)], [c(0.0, 0.0), e(t / 2.0)]],
        GateKind::Rx(t) => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
        }
        GateKind::Ry(t) => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        GateKind::U(theta, phi, lambda) => {
            let (s, co) = (theta / 2.0).sin_cos();
            [
                [c(co, 0.0), -e(lambda) * s],
                [e(phi) * s, e(phi + lambda) * co],
            ]
        }
        GateKind::Cx | GateKind::Measure | GateKind::Reset | GateKind::Barrier => {
            unreachable!("not a single-qubit unitary")
        }
    }
}

pub(crate) fn apply_single(v: &mut [Complex64], q: usize, m: &[[Complex64; 2]; 2]) {
    let stride = 1usize << q;
    let diagonal = m[0][1] == Complex64::new(0.0, 0.0) && m[1][0] == Complex64::new(0.0, 0.0);
    for base in (0..v.len()).step_by(stride << 1) {
        for i in base..base + stride {
            let (a0, a1) = (v[i], v[i + stride]);
            if diagonal {
                v[i] = m[0][0] * a0;
                v[i + stride] = m[1][1] * a1;
            } else {
                v[i] = m[0][0] * a0 + m[0][1] * a1;
                v[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }
}

pub(crate) fn apply_cx(v: &mut [Complex64], control: usize, target: usize) {
    let (c, t) = (1usize << control, 1usize << target);
    for i in 0..v.len() {
        if i & c != 0 && i & t == 0 {
            v.swap(i, i | t);
        }
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// Splits `v` on the outcome of measuring `q`. Returns the normalized
/// post-measurement states with their probabilities; impossible outcomes
/// are omitted.
fn collapse(v: Vec<Complex64>, q: usize) -> Vec<(bool, f64, Vec<Complex64>)> {
    let bit = 1usize << q;
    let p1: f64 = v
        .iter()
        .enumerate()
        .filter(|(i, _)| i & bit != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    let p0 = (norm_sqr(&v) - p1).max(0.0);
    let mut out = Vec::with_capacity(2);
    for (outcome, p) in [(false, p0), (true, p1)] {
        if p <= PRUNE_PROBABILITY {
            continue;
        }
        let scale = 1.0 / p.sqrt();
        let mut w = v.clone();
        for (i, a) in w.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        out.push((outcome, p, w));
    }
    out
}

/// Registers read by a conditioned gate strictly after each gate index.
fn live_after(circuit: &Circuit) -> Vec<Vec<bool>> {
    let r = circuit.cregs.len();
    let mut live = vec![vec![false; r]; circuit.gates.len()];
    let mut acc = vec![false; r];
    for (i, g) in circuit.gates.iter().enumerate().rev() {
        live[i] = acc.clone();
        if let Some(c) = g.condition {
            acc[c.creg] = true;
        }
    }
    live
}

fn run(
    circuit: &Circuit,
    initial: Vec<Complex64>,
    merge_keep: Option<&[bool]>,
) -> Result<Vec<BranchState>, SimError> {
    let n = circuit.qubit_count;
    if initial.len() != 1 << n {
        return Err(SimError::BadInitialState {
            got: initial.len(),
            expected: 1 << n,
        });
    }
    let nbits = circuit.clbit_count();
    let mut branches = vec![BranchState {
        amplitudes: initial,
        clbits: vec![false; nbits],
        probability: 1.0,
    }];
    let live = merge_keep.map(|_| live_after(circuit));

    for (gi, g) in circuit.gates.iter().enumerate() {
        let mut next = Vec::with_capacity(branches.len());
        for mut b in branches {
            if let Some(c) = g.condition {
                if b.register_value(circuit, c.creg) != c.value {
                    next.push(b);
                    continue;
                }
            }
            match g.kind {
                GateKind::Barrier => next.push(b),
                GateKind::Cx => {
                    apply_cx(&mut b.amplitudes, g.qubits[0], g.qubits[1]);
                    next.push(b);
                }
                GateKind::Measure | GateKind::Reset => {
                    let q = g.qubits[0];
                    for (outcome, p, mut amps) in collapse(b.amplitudes, q) {
                        let mut clbits = b.clbits.clone();
                        if let Some(bit) = g.clbit {
                            clbits[bit] = outcome;
                        }
                        if g.kind == GateKind::Reset && outcome {
                            apply_single(&mut amps, q, &matrix(GateKind::X));
                        }
                        let norm = norm_sqr(&amps);
                        if (norm - 1.0).abs() > NORM_TOLERANCE {
                            return Err(SimError::NotNormalized { gate: gi, norm });
                        }
                        next.push(BranchState {
                            amplitudes: amps,
                            clbits,
                            probability: b.probability * p,
                        });
                    }
                }
                kind => {
                    apply_single(&mut b.amplitudes, g.qubits[0], &matrix(kind));
                    next.push(b);
                }
            }
        }
        branches = next;
        if let (Some(keep), Some(live)) = (merge_keep, &live) {
            if branches.len() > 1 {
                branches = merge(circuit, branches, keep, &live[gi]);
            }
        }
    }
    for b in &branches {
        let norm = norm_sqr(&b.amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NotNormalized {
                gate: circuit.gates.len(),
                norm,
            });
        }
    }
    Ok(branches)
}

/// Joins branches whose quantum states agree up to global phase and whose
/// classical bits agree on every register still read later or marked in
/// `keep`. Such branches can no longer be told apart by the program.
fn merge(
    circuit: &Circuit,
    branches: Vec<BranchState>,
    keep: &[bool],
    live: &[bool],
) -> Vec<BranchState> {
    let relevant: Vec<usize> = (0..circuit.cregs.len())
        .filter(|&r| keep.get(r).copied().unwrap_or(false) || live[r])
        .flat_map(|r| {
            let off = circuit.creg_offset(r);
            off..off + circuit.cregs[r].size
        })
        .collect();
    let mut groups: BTreeMap<Vec<bool>, Vec<BranchState>> = BTreeMap::new();
    for b in branches {
        let key: Vec<bool> = relevant.iter().map(|&i| b.clbits[i]).collect();
        groups.entry(key).or_default().push(b);
    }
    let mut out = Vec::new();
    for (_, group) in groups {
        let mut reps: Vec<BranchState> = Vec::new();
        for b in group {
            match reps
                .iter_mut()
                .find(|r| fidelity(&r.amplitudes, &b.amplitudes) >= 1.0 - 1e-12)
            {
                Some(r) => r.probability += b.probability,
                None => reps.push(b),
            }
        }
        out.extend(reps);
    }
    out
}

/// Runs `circuit` from `initial`, forking on every measurement and reset.
pub fn simulate_branching(
    circuit: &Circuit,
    initial: Vec<Complex64>,
    qubit_limit: usize,
) -> Result<Vec<BranchState>, SimError> {
    if circuit.qubit_count > qubit_limit {
        return Err(SimError::TooManyQubits {
            needed: circuit.qubit_count,
            limit: qubit_limit,
        });
    }
    run(circuit, initial, None)
}

/// `|<a|b>|`, insensitive to global phase.
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }
}

/// First CNOT off the coupling map, if any.
pub fn check_coupling(circuit: &Circuit, map: &CouplingMap) -> Verdict {
    for (i, g) in circuit.gates.iter().enumerate() {
        if g.qubits.len() == 2 && g.kind != GateKind::Barrier {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            if a >= map.qubit_count() || b >= map.qubit_count() || !map.is_edge(a, b) {
                return Verdict::Fail(format!("gate {i}: cx q[{a}],q[{b}] is not on an edge"));
            }
        }
    }
    Verdict::Pass
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceConfig {
    /// Every basis state is tried when the circuit has at most this many
    /// qubits.
    pub exhaustive_basis_limit: usize,
    pub random_states: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub qubit_limit: usize,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        EquivalenceConfig {
            exhaustive_basis_limit: 10,
            random_states: 20,
            seed: 0x5eed,
            tolerance: 1e-9,
            qubit_limit: DEFAULT_QUBIT_LIMIT,
        }
    }
}

/// Checks a routed program against its source circuit.
pub fn check_program(
    original: &Circuit,
    program: &RoutedProgram,
    config: &EquivalenceConfig,
) -> Result<Verdict, SimError> {
    check_equivalence(
        original,
        &program.circuit,
        &program.initial_placement,
        &program.final_placement,
        &program.live_bell_pairs(),
        config,
    )
}

/// Compares `mapped` with `original` on a set of product input states.
///
/// Logical qubit `l` starts on physical `initial[l]` and must end on
/// `final_placement[l]`; all other qubits start in |0>. For each branch of
/// the mapped program the full output must equal the original's output
/// (same user classical bits) placed by the output permutation, with every
/// pair in `bell_pairs` in (|00> + |11>)/sqrt 2 and every other ancilla
/// in |0>, up to global phase.
pub fn check_equivalence(
    original: &Circuit,
    mapped: &Circuit,
    initial: &[usize],
    final_placement: &[usize],
    bell_pairs: &[(usize, usize)],
    config: &EquivalenceConfig,
) -> Result<Verdict, SimError> {
    let n = original.qubit_count;
    if n > config.qubit_limit {
        return Err(SimError::TooManyQubits {
            needed: n,
            limit: config.qubit_limit,
        });
    }
    if initial.len() != n || final_placement.len() != n {
        return Ok(Verdict::Fail("placement does not cover the circuit".into()));
    }

    // Restrict the mapped program to qubits it actually uses.
    let mut active: Vec<usize> = initial
        .iter()
        .chain(final_placement)
        .copied()
        .chain(mapped.gates.iter().flat_map(|g| g.qubits.iter().copied()))
        .chain(bell_pairs.iter().flat_map(|&(a, b)| [a, b]))
        .collect();
    active.sort_unstable();
    active.dedup();
    if active.len() > config.qubit_limit {
        return Err(SimError::TooManyQubits {
            needed: active.len(),
            limit: config.qubit_limit,
        });
    }
    let compact = |p: usize| active.binary_search(&p).expect("active qubit");
    let mut small = Circuit::new(active.len());
    small.cregs = mapped.cregs.clone();
    for g in &mapped.gates {
        let mut g = g.clone();
        for q in &mut g.qubits {
            *q = compact(*q);
        }
        small.push(g);
    }
    let start: Vec<usize> = initial.iter().map(|&p| compact(p)).collect();
    let end: Vec<usize> = final_placement.iter().map(|&p| compact(p)).collect();
    let pairs: Vec<(usize, usize)> = bell_pairs
        .iter()
        .map(|&(a, b)| (compact(a), compact(b)))
        .collect();

    let (original, small) = strip_terminal_measurements(original, &small, &end);

    let user_regs = original.cregs.len();
    let keep: Vec<bool> = (0..small.cregs.len()).map(|r| r < user_regs).collect();
    let user_bits = original.clbit_count();

    let mut inputs: Vec<Vec<(Complex64, Complex64)>> = Vec::new();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if n <= config.exhaustive_basis_limit {
        for x in 0..1usize << n {
            inputs.push(
                (0..n)
                    .map(|q| {
                        if x >> q & 1 == 1 {
                            (zero, one)
                        } else {
                            (one, zero)
                        }
                    })
                    .collect(),
            );
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.random_states {
        inputs.push((0..n).map(|_| random_qubit(&mut rng)).collect());
    }

    let all_regs = vec![true; user_regs];
    for (case, factors) in inputs.iter().enumerate() {
        // Merged, so each entry is one (outcome, state) class.
        let reference = run(&original, product_state(factors), Some(&all_regs))?;
        let expected: Vec<Vec<Complex64>> = reference
            .iter()
            .map(|r| embed(&r.amplitudes, &end, &pairs, small.qubit_count))
            .collect();
        let mut placed = vec![(one, zero); small.qubit_count];
        for (l, &p) in start.iter().enumerate() {
            placed[p] = factors[l];
        }
        let got = run(&small, product_state(&placed), Some(&keep))?;

        let mut got_prob = vec![0.0; reference.len()];
        for b in &got {
            let key = &b.clbits[..user_bits];
            let candidates: Vec<usize> = (0..reference.len())
                .filter(|&i| reference[i].clbits == key)
                .collect();
            if candidates.is_empty() {
                return Ok(Verdict::Fail(format!(
                    "input {case}: outcome {key:?} impossible in the original"
                )));
            }
            let (best, f) = candidates
                .iter()
                .map(|&i| (i, fidelity(&expected[i], &b.amplitudes)))
                .fold(
                    (candidates[0], f64::MIN),
                    |acc, x| if x.1 > acc.1 { x } else { acc },
                );
            if f < 1.0 - config.tolerance {
                return Ok(Verdict::Fail(format!(
                    "input {case}: branch {key:?} has fidelity {f}"
                )));
            }
            got_prob[best] += b.probability;
        }
        for (r, q) in reference.iter().zip(&got_prob) {
            if (r.probability - q).abs() > config.tolerance.max(1e-9) {
                return Ok(Verdict::Fail(format!(
                    "input {case}: outcome {:?} has probability {q}, expected {}",
                    r.clbits, r.probability
                )));
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Places an `n`-qubit state on positions `end` of a `width`-qubit register
/// and puts each pair in `pairs` into a Bell state.
fn embed(
    state: &[Complex64],
    end: &[usize],
    pairs: &[(usize, usize)],
    width: usize,
) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << width];
    for (x, &a) in state.iter().enumerate() {
        let idx = end
            .iter()
            .enumerate()
            .filter(|(l, _)| x >> l & 1 == 1)
            .fold(0usize, |acc, (_, &p)| acc | 1 << p);
        v[idx] = a;
    }
    for &(p, q) in pairs {
        let mask = (1usize << p) | (1usize << q);
        for i in 0..v.len() {
            if i & mask == 0 {
                let a = v[i] * FRAC_1_SQRT_2;
                v[i] = a;
                v[i | mask] = a;
            }
        }
    }
    v
}

/// A measurement is terminal when no later gate touches its qubit and its
/// register is never read. Terminal measurements only sample the final
/// state, so when both programs measure the same logical qubits into the
/// same bits, comparing the pre-measurement states is equivalent and
/// avoids enumerating outcomes. Otherwise both circuits are returned as is.
fn strip_terminal_measurements(
    original: &Circuit,
    mapped: &Circuit,
    end: &[usize],
) -> (Circuit, Circuit) {
    fn terminal(c: &Circuit) -> Vec<bool> {
        let read: Vec<bool> = (0..c.cregs.len())
            .map(|r| {
                c.gates
                    .iter()
                    .any(|g| g.condition.is_some_and(|x| x.creg == r))
            })
            .collect();
        let mut touched = vec![false; c.qubit_count];
        let mut out = vec![false; c.gates.len()];
        for (i, g) in c.gates.iter().enumerate().rev() {
            if g.kind == GateKind::Measure {
                let q = g.qubits[0];
                let reg = c.locate_clbit(g.clbit.unwrap()).unwrap().0;
                out[i] = !touched[q] && !read[reg];
            }
            for &q in &g.qubits {
                touched[q] = true;
            }
        }
        out
    }
    let pairs = |c: &Circuit, t: &[bool], pos: &dyn Fn(usize) -> usize| {
        let mut v: Vec<(usize, usize)> = c
            .gates
            .iter()
            .zip(t)
            .filter(|(_, &t)| t)
            .map(|(g, _)| (pos(g.qubits[0]), g.clbit.unwrap()))
            .collect();
        v.sort_unstable();
        v
    };
    let to = terminal(original);
    let tm = terminal(mapped);
    let expected = pairs(original, &to, &|l| end[l]);
    let found = pairs(mapped, &tm, &|p| p);
    if expected.is_empty() || expected != found {
        return (original.clone(), mapped.clone());
    }
    let strip = |c: &Circuit, t: &[bool]| {
        let mut c2 = c.clone();
        c2.gates = c
            .gates
            .iter()
            .zip(t)
            .filter(|(_, &t)| !t)
            .map(|(g, _)| g.clone())
            .collect::<Vec<Gate>>();
        c2
    };
    (strip(original, &to), strip(mapped, &tm))
}

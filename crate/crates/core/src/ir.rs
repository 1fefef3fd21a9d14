//! Circuit intermediate representation and ASAP layering.

use std::fmt;

/// Gate kinds understood by the compiler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    X,
    Z,
    T,
    Tdg,
    S,
    Sdg,
    Rz(f64),
    Rx(f64),
    Ry(f64),
    U(f64, f64, f64),
    Cx,
    Measure,
    Reset,
    Barrier,
}

impl GateKind {
    pub fn is_single_qubit_unitary(&self) -> bool {
        !matches!(
            self,
            GateKind::Cx | GateKind::Measure | GateKind::Reset | GateKind::Barrier
        )
    }

    /// QASM mnemonic, without parameters.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Z => "z",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::Rz(_) => "rz",
            GateKind::Rx(_) => "rx",
            GateKind::Ry(_) => "ry",
            GateKind::U(..) => "u3",
            GateKind::Cx => "cx",
            GateKind::Measure => "measure",
            GateKind::Reset => "reset",
            GateKind::Barrier => "barrier",
        }
    }
}

/// `if (creg == value)` guard on a whole classical register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Condition {
    pub creg: usize,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    /// Global classical bit index written by a measurement.
    pub clbit: Option<usize>,
    pub condition: Option<Condition>,
}

impl Gate {
    pub fn single(kind: GateKind, qubit: usize) -> Self {
        Gate {
            kind,
            qubits: vec![qubit],
            clbit: None,
            condition: None,
        }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cx,
            qubits: vec![control, target],
            clbit: None,
            condition: None,
        }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Gate {
            kind: GateKind::Measure,
            qubits: vec![qubit],
            clbit: Some(clbit),
            condition: None,
        }
    }

    pub fn barrier(qubits: Vec<usize>) -> Self {
        Gate {
            kind: GateKind::Barrier,
            qubits,
            clbit: None,
            condition: None,
        }
    }

    pub fn with_condition(mut self, creg: usize, value: u64) -> Self {
        self.condition = Some(Condition { creg, value });
        self
    }

    pub fn is_cx(&self) -> bool {
        self.kind == GateKind::Cx
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalRegister {
    pub name: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("gate {index}: qubit {qubit} out of range (circuit has {count} qubits)")]
    QubitOutOfRange {
        index: usize,
        qubit: usize,
        count: usize,
    },
    #[error("gate {index}: classical bit {bit} out of range")]
    ClbitOutOfRange { index: usize, bit: usize },
    #[error("gate {index}: classical register {creg} does not exist")]
    UnknownRegister { index: usize, creg: usize },
    #[error("gate {index}: malformed operands for {kind}")]
    BadArity { index: usize, kind: &'static str },
}

/// Ordered gate list over logical qubits `0..qubit_count`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub qubit_count: usize,
    pub cregs: Vec<ClassicalRegister>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Self {
        Circuit {
            qubit_count,
            cregs: Vec::new(),
            gates: Vec::new(),
        }
    }

    pub fn clbit_count(&self) -> usize {
        self.cregs.iter().map(|r| r.size).sum()
    }

    /// Adds a classical register and returns its index.
    pub fn add_creg(&mut self, name: impl Into<String>, size: usize) -> usize {
        self.cregs.push(ClassicalRegister {
            name: name.into(),
            size,
        });
        self.cregs.len() - 1
    }

    /// First global bit index of register `creg`.
    pub fn creg_offset(&self, creg: usize) -> usize {
        self.cregs[..creg].iter().map(|r| r.size).sum()
    }

    /// Register index and offset within the register for a global bit.
    pub fn locate_clbit(&self, bit: usize) -> Option<(usize, usize)> {
        let mut offset = 0;
        for (i, r) in self.cregs.iter().enumerate() {
            if bit < offset + r.size {
                return Some((i, bit - offset));
            }
            offset += r.size;
        }
        None
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cx()).count()
    }

    pub fn count_kind(&self, kind: &str) -> usize {
        self.gates.iter().filter(|g| g.kind.name() == kind).count()
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let nbits = self.clbit_count();
        for (index, g) in self.gates.iter().enumerate() {
            let arity_ok = match g.kind {
                GateKind::Cx => g.qubits.len() == 2 && g.qubits[0] != g.qubits[1],
                GateKind::Barrier => !g.qubits.is_empty(),
                _ => g.qubits.len() == 1,
            };
            let clbit_ok = (g.kind == GateKind::Measure) == g.clbit.is_some();
            let cond_ok =
                g.condition.is_none() || !matches!(g.kind, GateKind::Measure | GateKind::Barrier);
            if !arity_ok || !clbit_ok || !cond_ok {
                return Err(CircuitError::BadArity {
                    index,
                    kind: g.kind.name(),
                });
            }
            for &q in &g.qubits {
                if q >= self.qubit_count {
                    return Err(CircuitError::QubitOutOfRange {
                        index,
                        qubit: q,
                        count: self.qubit_count,
                    });
                }
            }
            if let Some(bit) = g.clbit {
                if bit >= nbits {
                    return Err(CircuitError::ClbitOutOfRange { index, bit });
                }
            }
            if let Some(c) = g.condition {
                if c.creg >= self.cregs.len() {
                    return Err(CircuitError::UnknownRegister {
                        index,
                        creg: c.creg,
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::qasm::emit(self))
    }
}

/// A set of gates acting on pairwise disjoint qubits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Layer {
    /// Indices into the circuit's gate list, in textual order.
    pub gates: Vec<usize>,
    pub qubits: Vec<usize>,
}

impl Layer {
    /// Logical `(control, target)` pairs of the CNOTs in this layer.
    pub fn cnots(&self, circuit: &Circuit) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .map(|&i| &circuit.gates[i])
            .filter(|g| g.is_cx())
            .map(|g| (g.qubits[0], g.qubits[1]))
            .collect()
    }
}

/// Greedy as-soon-as-possible layering.
///
/// A gate lands in the first layer after every earlier gate sharing one of
/// its qubits or classical bits. Conditioned gates occupy every bit of the
/// register they read. A barrier forms its own layer and nothing after it
/// may be placed earlier.
pub fn partition_layers(circuit: &Circuit) -> Vec<Layer> {
    let nbits = circuit.clbit_count();
    let mut qubit_ready = vec![0usize; circuit.qubit_count];
    let mut bit_ready = vec![0usize; nbits];
    let mut floor = 0usize;
    let mut layers: Vec<Layer> = Vec::new();

    for (index, gate) in circuit.gates.iter().enumerate() {
        let bits: Vec<usize> = match (gate.clbit, gate.condition) {
            (Some(b), _) => vec![b],
            (None, Some(c)) => {
                let off = circuit.creg_offset(c.creg);
                (off..off + circuit.cregs[c.creg].size).collect()
            }
            (None, None) => Vec::new(),
        };

        if gate.kind == GateKind::Barrier {
            let slot = layers.len();
            layers.push(Layer {
                gates: vec![index],
                qubits: sorted(gate.qubits.clone()),
            });
            floor = slot + 1;
            continue;
        }

        let slot = gate
            .qubits
            .iter()
            .map(|&q| qubit_ready[q])
            .chain(bits.iter().map(|&b| bit_ready[b]))
            .fold(floor, usize::max);
        if slot == layers.len() {
            layers.push(Layer::default());
        }
        let layer = &mut layers[slot];
        layer.gates.push(index);
        layer.qubits.extend(gate.qubits.iter().copied());
        layer.qubits.sort_unstable();
        for &q in &gate.qubits {
            qubit_ready[q] = slot + 1;
        }
        for &b in &bits {
            bit_ready[b] = slot + 1;
        }
    }
    layers
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qasm::parse;

    fn small3() -> Circuit {
        parse(
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\nh q[1];\nx q[0];\ncx q[1],q[2];\ncx q[0],q[2];\ncx q[1],q[0];\nt q[0];\n",
        )
        .unwrap()
    }

    /// Subsequence of gate indices touching `q`, in the given order.
    fn per_qubit(order: &[usize], circuit: &Circuit, q: usize) -> Vec<usize> {
        order
            .iter()
            .copied()
            .filter(|&i| circuit.gates[i].qubits.contains(&q))
            .collect()
    }

    #[test]
    fn small3_layers() {
        let c = small3();
        let layers = partition_layers(&c);
        let got: Vec<Vec<usize>> = layers.iter().map(|l| l.gates.clone()).collect();
        assert_eq!(got, vec![vec![0, 1], vec![2], vec![3], vec![4], vec![5]]);
        let flat: Vec<usize> = layers.iter().flat_map(|l| l.gates.clone()).collect();
        let textual: Vec<usize> = (0..c.gates.len()).collect();
        for q in 0..3 {
            assert_eq!(per_qubit(&flat, &c, q), per_qubit(&textual, &c, q));
        }
    }

    #[test]
    fn empty_circuit_has_no_layers() {
        assert!(partition_layers(&Circuit::new(4)).is_empty());
    }

    #[test]
    fn disjoint_cnots_share_a_layer() {
        let mut c = Circuit::new(4);
        c.push(Gate::cx(0, 1));
        c.push(Gate::cx(2, 3));
        let layers = partition_layers(&c);
        assert_eq!(layers.len(), 1);
        assert_eq!(layers[0].gates, vec![0, 1]);
        assert_eq!(layers[0].cnots(&c), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn barrier_closes_open_layers() {
        let mut c = Circuit::new(3);
        c.push(Gate::single(GateKind::H, 0));
        c.push(Gate::barrier(vec![0, 1]));
        c.push(Gate::single(GateKind::H, 2));
        let layers = partition_layers(&c);
        assert_eq!(layers.len(), 3);
        assert_eq!(layers[2].gates, vec![2]);
    }

    #[test]
    fn conditioned_gate_waits_for_measurement() {
        let mut c = Circuit::new(2);
        let r = c.add_creg("c", 1);
        c.push(Gate::single(GateKind::H, 0));
        c.push(Gate::measure(0, 0));
        c.push(Gate::single(GateKind::X, 1).with_condition(r, 1));
        let layers = partition_layers(&c);
        assert_eq!(layers.len(), 3);
        assert_eq!(layers[2].gates, vec![2]);
    }

    #[test]
    fn validate_rejects_out_of_range() {
        let mut c = Circuit::new(2);
        c.push(Gate::cx(0, 2));
        assert!(matches!(
            c.validate(),
            Err(CircuitError::QubitOutOfRange { qubit: 2, .. })
        ));
    }
}

//! Expansion of routing decisions into native gates.
//!
//! The output only contains single-qubit gates, CNOTs on coupling-map
//! edges, measurements and classically conditioned single-qubit gates.

use crate::arch::CouplingMap;
use crate::ir::{Circuit, Gate, GateKind};
use crate::router::{MappingState, Move, RouteError};

/// Where a gate of a routed program came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateOrigin {
    /// Index into the input circuit's gate list.
    Circuit(usize),
    /// Index into the move log.
    Swap(usize),
    Teleport(usize),
    Bridge(usize),
    /// Index into [`RoutedProgram::establishments`].
    Establish(usize),
}

/// One entangling of a channel pair, initial or after a teleport.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Establishment {
    pub channel: usize,
    pub pair: (usize, usize),
    /// A later teleport used this entanglement.
    pub consumed: bool,
    /// Its gates were deleted by [`eliminate_dead_channels`].
    pub removed: bool,
}

/// Physical-qubit program produced by routing.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedProgram {
    pub circuit: Circuit,
    /// Parallel to `circuit.gates`.
    pub origins: Vec<GateOrigin>,
    pub initial_placement: Vec<usize>,
    /// Output permutation: logical `l` ends on physical `final_placement[l]`.
    pub final_placement: Vec<usize>,
    pub moves: Vec<Move>,
    pub establishments: Vec<Establishment>,
    /// Final endpoints of each channel, by channel id.
    pub final_channels: Vec<(usize, usize)>,
}

impl RoutedProgram {
    pub fn swap_count(&self) -> usize {
        self.moves
            .iter()
            .filter(|m| matches!(m, Move::Swap { .. }))
            .count()
    }

    pub fn teleport_count(&self) -> usize {
        self.moves
            .iter()
            .filter(|m| matches!(m, Move::Teleport { .. }))
            .count()
    }

    /// Channel pairs that hold a Bell state when the program ends.
    pub fn live_bell_pairs(&self) -> Vec<(usize, usize)> {
        self.establishments
            .iter()
            .filter(|e| !e.consumed && !e.removed)
            .map(|e| self.final_channels[e.channel])
            .collect()
    }

    /// Number of establishment H+CNOT pairs present in the program.
    pub fn establishments_kept(&self) -> usize {
        self.establishments.iter().filter(|e| !e.removed).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoweringError {
    #[error("Q{0} and Q{1} are not adjacent")]
    NotAdjacent(usize, usize),
}

/// `H` on the lower-indexed qubit, then CNOT from it to the other.
pub fn establish_channel(
    map: &CouplingMap,
    a: usize,
    b: usize,
) -> Result<Vec<Gate>, LoweringError> {
    if !map.is_edge(a, b) {
        return Err(LoweringError::NotAdjacent(a, b));
    }
    let (lo, hi) = (a.min(b), a.max(b));
    Ok(vec![Gate::single(GateKind::H, lo), Gate::cx(lo, hi)])
}

pub fn lower_swap(a: usize, b: usize) -> Vec<Gate> {
    vec![Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)]
}

/// Classical storage for one teleport: two single-bit registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TeleportBits {
    /// Register and global bit receiving the source measurement.
    pub source: (usize, usize),
    /// Register and global bit receiving the near-endpoint measurement.
    pub near: (usize, usize),
}

/// Teleport gadget: Bell measurement of `(source, near)`, X/Z corrections
/// on `far`, conditional resets of the measured pair, and re-entangling
/// the pair as the relocated channel. The last two gates are the
/// re-establishment.
pub fn lower_teleport(
    map: &CouplingMap,
    source: usize,
    near: usize,
    far: usize,
    bits: TeleportBits,
) -> Result<Vec<Gate>, LoweringError> {
    if !map.is_edge(source, near) {
        return Err(LoweringError::NotAdjacent(source, near));
    }
    let (c0, b0) = bits.source;
    let (c1, b1) = bits.near;
    let mut gates = vec![
        Gate::cx(source, near),
        Gate::single(GateKind::H, source),
        Gate::measure(source, b0),
        Gate::measure(near, b1),
        Gate::single(GateKind::X, far).with_condition(c1, 1),
        Gate::single(GateKind::Z, far).with_condition(c0, 1),
        Gate::single(GateKind::X, near).with_condition(c1, 1),
        Gate::single(GateKind::X, source).with_condition(c0, 1),
    ];
    gates.extend(establish_channel(map, source, near)?);
    Ok(gates)
}

/// Incrementally assembles a [`RoutedProgram`] while a mapping evolves.
pub(crate) struct ProgramBuilder<'a> {
    map: &'a CouplingMap,
    circuit: Circuit,
    origins: Vec<GateOrigin>,
    moves: Vec<Move>,
    establishments: Vec<Establishment>,
    /// Current establishment of each channel.
    current: Vec<usize>,
    initial_placement: Vec<usize>,
    next_name: usize,
}

impl<'a> ProgramBuilder<'a> {
    /// Starts a program on `map` for `source`'s classical registers and
    /// entangles every channel of `state`.
    pub fn new(map: &'a CouplingMap, source: &Circuit, state: &MappingState) -> Self {
        let mut circuit = Circuit::new(map.qubit_count());
        circuit.cregs = source.cregs.clone();
        let mut b = ProgramBuilder {
            map,
            circuit,
            origins: Vec::new(),
            moves: Vec::new(),
            establishments: Vec::new(),
            current: Vec::new(),
            initial_placement: state.placement().to_vec(),
            next_name: 0,
        };
        for (id, ch) in state.channels().iter().enumerate() {
            let (lo, hi) = ch.pair();
            let e = b.new_establishment(id, (lo, hi));
            b.current.push(e);
            for g in establish_channel(map, lo, hi).expect("channels sit on edges") {
                b.emit(g, GateOrigin::Establish(e));
            }
        }
        b
    }

    fn new_establishment(&mut self, channel: usize, pair: (usize, usize)) -> usize {
        self.establishments.push(Establishment {
            channel,
            pair,
            consumed: false,
            removed: false,
        });
        self.establishments.len() - 1
    }

    fn emit(&mut self, gate: Gate, origin: GateOrigin) {
        self.circuit.push(gate);
        self.origins.push(origin);
    }

    fn fresh_bit(&mut self) -> (usize, usize) {
        let name = loop {
            let candidate = format!("c{}", self.next_name);
            self.next_name += 1;
            if !self.circuit.cregs.iter().any(|r| r.name == candidate) {
                break candidate;
            }
        };
        let bit = self.circuit.clbit_count();
        (self.circuit.add_creg(name, 1), bit)
    }

    /// Lowers `mv` and applies it to `state`.
    pub fn apply_move(&mut self, state: &mut MappingState, mv: Move) -> Result<(), RouteError> {
        let index = self.moves.len();
        match mv {
            Move::Swap { a, b } => {
                state.apply_swap(self.map, a, b)?;
                for g in lower_swap(a, b) {
                    self.emit(g, GateOrigin::Swap(index));
                }
            }
            Move::Teleport { source, near, .. } => {
                let id = match state.slot(near) {
                    crate::router::Slot::Channel { id, .. } => id,
                    _ => return Err(RouteError::NotAChannel(near)),
                };
                let far = state.apply_teleport(self.map, source, near)?;
                let used = self.current[id];
                self.establishments[used].consumed = true;
                let bits = TeleportBits {
                    source: self.fresh_bit(),
                    near: self.fresh_bit(),
                };
                let gadget = lower_teleport(self.map, source, near, far, bits).map_err(|_| {
                    RouteError::NotAdjacentToChannel {
                        qubit: source,
                        near,
                    }
                })?;
                let e = self.new_establishment(id, (source.min(near), source.max(near)));
                self.current[id] = e;
                let split = gadget.len() - 2;
                for (i, g) in gadget.into_iter().enumerate() {
                    let origin = if i < split {
                        GateOrigin::Teleport(index)
                    } else {
                        GateOrigin::Establish(e)
                    };
                    self.emit(g, origin);
                }
            }
            Move::Bridge { .. } => unreachable!("bridges are emitted with bridge()"),
        }
        self.moves.push(mv);
        Ok(())
    }

    /// Emits a bridged CNOT between two physical qubits.
    pub fn bridge(&mut self, control: usize, target: usize, gates: Vec<Gate>) {
        let index = self.moves.len();
        let intermediates = self.map.distance(control, target) - 1;
        for g in gates {
            self.emit(g, GateOrigin::Bridge(index));
        }
        self.moves.push(Move::Bridge {
            control,
            target,
            intermediates,
        });
    }

    /// Emits an input gate on the current physical positions.
    pub fn map_gate(&mut self, index: usize, gate: &Gate, state: &MappingState) {
        let mut g = gate.clone();
        for q in &mut g.qubits {
            *q = state.physical_of(*q);
        }
        self.emit(g, GateOrigin::Circuit(index));
    }

    pub fn finish(self, state: &MappingState) -> RoutedProgram {
        RoutedProgram {
            circuit: self.circuit,
            origins: self.origins,
            initial_placement: self.initial_placement,
            final_placement: state.placement().to_vec(),
            moves: self.moves,
            establishments: self.establishments,
            final_channels: state.channels().iter().map(|c| c.pair()).collect(),
        }
    }
}

/// Deletes the H+CNOT establishment of every channel entanglement that no
/// teleport consumes afterwards. Teleport gadgets keep their conditional
/// resets, so the measured qubits still return to |0>.
pub fn eliminate_dead_channels(program: &RoutedProgram) -> RoutedProgram {
    let mut out = program.clone();
    let dead: Vec<bool> = program.establishments.iter().map(|e| !e.consumed).collect();
    let (gates, origins): (Vec<Gate>, Vec<GateOrigin>) = program
        .circuit
        .gates
        .iter()
        .cloned()
        .zip(program.origins.iter().copied())
        .filter(|(_, o)| !matches!(o, GateOrigin::Establish(e) if dead[*e]))
        .unzip();
    out.circuit.gates = gates;
    out.origins = origins;
    for (e, d) in out.establishments.iter_mut().zip(dead) {
        e.removed |= d;
    }
    out
}

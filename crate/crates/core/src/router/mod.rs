//! Dynamic qubit mapping: SWAP and teleport routing, and static bridging.

mod bridge;
mod cost;
mod search;
mod state;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arch::CouplingMap;
use crate::ir::{partition_layers, Circuit, Layer};
use crate::lowering::{eliminate_dead_channels, ProgramBuilder, RoutedProgram};

pub use bridge::{bridge_gate_count, bridge_initial_mapping, bridge_plan};
pub use cost::{CostMode, CostModel};
pub use search::{
    layer_satisfied, lower_bound, route_layer, successors, LayerRoute, SearchOptions,
    DEFAULT_LOOKAHEAD_WEIGHT, DEFAULT_NODE_BUDGET,
};
pub use state::{Channel, ChannelStatus, MappingState, Move, Slot};

/// Placement attempts before giving up on the first layer.
pub const SAMPLING_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RouteError {
    #[error("circuit has {logical} qubits but the device only {physical}")]
    TooManyQubits { logical: usize, physical: usize },
    #[error("physical qubit {0} cannot take this placement")]
    InvalidPlacement(usize),
    #[error("Q{0} and Q{1} are not connected")]
    NotAnEdge(usize, usize),
    #[error("Q{qubit} is not adjacent to channel endpoint Q{near}")]
    NotAdjacentToChannel { qubit: usize, near: usize },
    #[error("Q{0} does not hold a channel half")]
    NotAChannel(usize),
    #[error("Q{0} holds no data")]
    SourceNotData(usize),
    #[error("channel {0} is consumed")]
    ChannelConsumed(usize),
    #[error("search exceeded {0} expanded nodes")]
    NodeBudgetExceeded(usize),
    #[error("no placement satisfies the first layer after {0} attempts")]
    SamplingExhausted(usize),
    #[error("trial exceeded its time budget")]
    Timeout,
    #[error("no move sequence satisfies the layer")]
    Unroutable,
    #[error("invalid circuit: {0}")]
    InvalidCircuit(#[from] crate::ir::CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Swap,
    SwapTeleport,
    Bridge,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Swap => "swap",
            Strategy::SwapTeleport => "swap+teleport",
            Strategy::Bridge => "bridge",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "swap" => Ok(Strategy::Swap),
            "swap+teleport" => Ok(Strategy::SwapTeleport),
            "bridge" => Ok(Strategy::Bridge),
            other => Err(format!(
                "unknown strategy `{other}` (expected swap|swap+teleport|bridge)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteConfig {
    pub strategy: Strategy,
    pub cost: CostModel,
    /// Next-layer weight in the search priority, `None` for no lookahead.
    pub lookahead: Option<f64>,
    pub node_budget: usize,
    pub trial_timeout: Option<Duration>,
    /// Drop establishments of channels that are never used.
    pub eliminate_dead_channels: bool,
}

impl RouteConfig {
    pub fn new(strategy: Strategy, cost: CostModel) -> Self {
        RouteConfig {
            strategy,
            cost,
            lookahead: Some(DEFAULT_LOOKAHEAD_WEIGHT),
            node_budget: DEFAULT_NODE_BUDGET,
            trial_timeout: Some(Duration::from_secs(10)),
            eliminate_dead_channels: true,
        }
    }
}

/// Result of one routing trial.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub seed: u64,
    pub program: RoutedProgram,
    pub swaps: usize,
    pub teleports: usize,
    pub bridges: usize,
    pub cost: u64,
    pub elapsed: Duration,
}

/// Samples a placement in which every CNOT of the first CNOT-bearing layer
/// sits on an edge. Pairs take random free edges; remaining logical qubits
/// take random free positions. With `channels`, ancilla pairs are then
/// matched greedily on the lexicographically smallest free edges, up to
/// `(m - n) / 2` of them.
pub fn initial_mapping(
    circuit: &Circuit,
    layers: &[Layer],
    map: &CouplingMap,
    seed: u64,
    channels: bool,
) -> Result<MappingState, RouteError> {
    let n = circuit.qubit_count;
    let m = map.qubit_count();
    if n > m {
        return Err(RouteError::TooManyQubits {
            logical: n,
            physical: m,
        });
    }
    let first: Vec<(usize, usize)> = layers
        .iter()
        .map(|l| l.cnots(circuit))
        .find(|c| !c.is_empty())
        .unwrap_or_default();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let placement = (0..SAMPLING_ATTEMPTS)
        .find_map(|_| sample_placement(n, &first, map, &mut rng))
        .ok_or(RouteError::SamplingExhausted(SAMPLING_ATTEMPTS))?;

    let mut state = MappingState::new(m, &placement)?;
    if channels {
        let limit = (m - n) / 2;
        for &(a, b) in map.edges() {
            if state.channels().len() == limit {
                break;
            }
            if state.slot(a) == Slot::Free && state.slot(b) == Slot::Free {
                state.add_channel(a, b)?;
            }
        }
    }
    Ok(state)
}

fn sample_placement(
    n: usize,
    pairs: &[(usize, usize)],
    map: &CouplingMap,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<usize>> {
    let m = map.qubit_count();
    let mut used = vec![false; m];
    let mut placement = vec![usize::MAX; n];
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(rng);
    for i in order {
        let (a, b) = pairs[i];
        let open: Vec<(usize, usize)> = map
            .edges()
            .iter()
            .copied()
            .filter(|&(x, y)| !used[x] && !used[y])
            .collect();
        let &(x, y) = open.choose(rng)?;
        let (x, y) = if rng.random::<bool>() { (x, y) } else { (y, x) };
        placement[a] = x;
        placement[b] = y;
        used[x] = true;
        used[y] = true;
    }
    let mut free: Vec<usize> = (0..m).filter(|&p| !used[p]).collect();
    free.shuffle(rng);
    let mut free = free.into_iter();
    for p in placement.iter_mut().filter(|p| **p == usize::MAX) {
        *p = free.next()?;
    }
    Some(placement)
}

/// Routes one trial: samples the initial mapping from `seed`, then routes.
pub fn route_circuit(
    circuit: &Circuit,
    map: &CouplingMap,
    config: &RouteConfig,
    seed: u64,
) -> Result<TrialResult, RouteError> {
    let start = Instant::now();
    circuit.validate()?;
    let state = match config.strategy {
        Strategy::Bridge => {
            if circuit.qubit_count > map.qubit_count() {
                return Err(RouteError::TooManyQubits {
                    logical: circuit.qubit_count,
                    physical: map.qubit_count(),
                });
            }
            let placement = bridge_initial_mapping(circuit, map, seed);
            MappingState::new(map.qubit_count(), &placement)?
        }
        strategy => {
            let layers = partition_layers(circuit);
            initial_mapping(
                circuit,
                &layers,
                map,
                seed,
                strategy == Strategy::SwapTeleport,
            )?
        }
    };
    let mut result = route_from(circuit, map, config, state, start)?;
    result.seed = seed;
    Ok(result)
}

/// Routes from a given starting state. Channels in `state` are entangled
/// at the start of the program, so each must sit on an edge.
pub fn route_from_state(
    circuit: &Circuit,
    map: &CouplingMap,
    config: &RouteConfig,
    state: MappingState,
) -> Result<TrialResult, RouteError> {
    circuit.validate()?;
    route_from(circuit, map, config, state, Instant::now())
}

fn route_from(
    circuit: &Circuit,
    map: &CouplingMap,
    config: &RouteConfig,
    mut state: MappingState,
    start: Instant,
) -> Result<TrialResult, RouteError> {
    if let Some(ch) = state
        .channels()
        .iter()
        .find(|c| !map.is_edge(c.endpoints[0], c.endpoints[1]))
    {
        return Err(RouteError::NotAnEdge(ch.endpoints[0], ch.endpoints[1]));
    }
    let mut builder = ProgramBuilder::new(map, circuit, &state);
    match config.strategy {
        Strategy::Bridge => {
            for (i, g) in circuit.gates.iter().enumerate() {
                if g.is_cx() {
                    let (c, t) = (
                        state.physical_of(g.qubits[0]),
                        state.physical_of(g.qubits[1]),
                    );
                    if !map.is_edge(c, t) {
                        let mut gates = bridge_plan(map, c, t);
                        if let Some(cond) = g.condition {
                            for b in &mut gates {
                                b.condition = Some(cond);
                            }
                        }
                        builder.bridge(c, t, gates);
                        continue;
                    }
                }
                builder.map_gate(i, g, &state);
            }
        }
        Strategy::Swap | Strategy::SwapTeleport => {
            let options = SearchOptions {
                teleport: config.strategy == Strategy::SwapTeleport,
                lookahead: config.lookahead,
                node_budget: config.node_budget,
                deadline: config.trial_timeout.map(|t| start + t),
            };
            let layers = partition_layers(circuit);
            let cnots: Vec<Vec<(usize, usize)>> = layers.iter().map(|l| l.cnots(circuit)).collect();
            for (li, layer) in layers.iter().enumerate() {
                if !cnots[li].is_empty() && !layer_satisfied(&state, &cnots[li], map) {
                    let next = cnots[li + 1..]
                        .iter()
                        .find(|c| !c.is_empty())
                        .map(Vec::as_slice)
                        .unwrap_or(&[]);
                    let routed =
                        route_layer(&state, &cnots[li], next, map, &config.cost, &options)?;
                    for mv in routed.moves {
                        builder.apply_move(&mut state, mv)?;
                    }
                }
                for &gi in &layer.gates {
                    builder.map_gate(gi, &circuit.gates[gi], &state);
                }
            }
        }
    }
    let mut program = builder.finish(&state);
    if config.eliminate_dead_channels {
        program = eliminate_dead_channels(&program);
    }
    if config.trial_timeout.is_some_and(|t| start.elapsed() > t) {
        return Err(RouteError::Timeout);
    }
    let cost = program.moves.iter().map(|m| config.cost.move_cost(m)).sum();
    Ok(TrialResult {
        seed: 0,
        swaps: program.swap_count(),
        teleports: program.teleport_count(),
        bridges: program
            .moves
            .iter()
            .filter(|m| matches!(m, Move::Bridge { .. }))
            .count(),
        cost,
        program,
        elapsed: start.elapsed(),
    })
}

/// Runs trials with seeds `seed .. seed + trials`, in seed order.
pub fn route_trials(
    circuit: &Circuit,
    map: &CouplingMap,
    config: &RouteConfig,
    seed: u64,
    trials: usize,
) -> Vec<(u64, Result<TrialResult, RouteError>)> {
    (0..trials as u64)
        .map(|i| {
            let s = seed + i;
            (s, route_circuit(circuit, map, config, s))
        })
        .collect()
}

/// Index of the cheapest successful trial; earliest seed wins ties.
pub fn best_trial(trials: &[(u64, Result<TrialResult, RouteError>)]) -> Option<usize> {
    trials
        .iter()
        .enumerate()
        .filter_map(|(i, (_, r))| r.as_ref().ok().map(|t| (t.cost, i)))
        .min()
        .map(|(_, i)| i)
}

//! Per-layer A* over SWAP and teleport moves.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use crate::arch::CouplingMap;

use super::{ChannelStatus, CostModel, MappingState, Move, RouteError, Slot};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;
pub const DEFAULT_LOOKAHEAD_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub teleport: bool,
    /// Weight of the next layer's estimate; `None` disables lookahead and
    /// makes the search cost-optimal.
    pub lookahead: Option<f64>,
    pub node_budget: usize,
    pub deadline: Option<Instant>,
}

impl SearchOptions {
    pub fn exact(teleport: bool) -> Self {
        SearchOptions {
            teleport,
            lookahead: None,
            node_budget: DEFAULT_NODE_BUDGET,
            deadline: None,
        }
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            teleport: false,
            lookahead: Some(DEFAULT_LOOKAHEAD_WEIGHT),
            node_budget: DEFAULT_NODE_BUDGET,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayerRoute {
    pub moves: Vec<Move>,
    pub cost: u64,
    pub state: MappingState,
    pub expanded: usize,
}

impl LayerRoute {
    pub fn teleports(&self) -> usize {
        self.moves
            .iter()
            .filter(|m| matches!(m, Move::Teleport { .. }))
            .count()
    }

    pub fn swaps(&self) -> usize {
        self.moves
            .iter()
            .filter(|m| matches!(m, Move::Swap { .. }))
            .count()
    }
}

/// True when every logical pair sits on a physical edge.
pub fn layer_satisfied(state: &MappingState, cnots: &[(usize, usize)], map: &CouplingMap) -> bool {
    cnots
        .iter()
        .all(|&(a, b)| map.is_edge(state.physical_of(a), state.physical_of(b)))
}

/// Lower bound on the cost of making every pair in `cnots` adjacent.
///
/// A pair at hop distance `d` has deficit `d - 1`. A SWAP shortens at most
/// two deficits, each by at most one hop; a teleport moves one data qubit.
/// So with `k` teleports serving the `k` largest deficits, the remaining
/// deficits still need `max(max D, ceil(sum D / 2))` SWAPs.
pub fn lower_bound(
    state: &MappingState,
    cnots: &[(usize, usize)],
    map: &CouplingMap,
    cost: &CostModel,
    teleport: bool,
) -> u64 {
    let mut deficits: Vec<u64> = cnots
        .iter()
        .map(|&(a, b)| u64::from(map.distance(state.physical_of(a), state.physical_of(b))))
        .filter(|&d| d > 1)
        .map(|d| d - 1)
        .collect();
    if deficits.is_empty() {
        return 0;
    }
    deficits.sort_unstable_by(|a, b| b.cmp(a));

    let swaps_needed = |d: &[u64]| -> u64 {
        let max = d.first().copied().unwrap_or(0);
        let sum: u64 = d.iter().sum();
        max.max(sum.div_ceil(2))
    };

    let swap = cost.swap_cost();
    let mut best = swap * swaps_needed(&deficits);
    let any_channel = state
        .channels()
        .iter()
        .any(|c| c.status == ChannelStatus::Established);
    if teleport && any_channel {
        for k in 1..=deficits.len() {
            let candidate = k as u64 * cost.teleport_cost() + swap * swaps_needed(&deficits[k..]);
            best = best.min(candidate);
        }
    }
    best
}

/// Moves available from `state`. SWAPs must touch a qubit of the current
/// layer or (with teleportation on) a channel half; other SWAPs leave both
/// the layer and every virtual edge unchanged.
pub fn successors(
    state: &MappingState,
    relevant: &[bool],
    map: &CouplingMap,
    teleport: bool,
) -> Vec<Move> {
    let touches = |s: Slot| match s {
        Slot::Data(l) => relevant[l],
        Slot::Channel { .. } => teleport,
        Slot::Free => false,
    };
    let mut out = Vec::new();
    for &(a, b) in map.edges() {
        let (sa, sb) = (state.slot(a), state.slot(b));
        if !(touches(sa) || touches(sb)) {
            continue;
        }
        if let (Slot::Channel { id: x, .. }, Slot::Channel { id: y, .. }) = (sa, sb) {
            if x == y {
                continue;
            }
        }
        out.push(Move::Swap { a, b });
    }
    if teleport {
        for ch in state.channels() {
            if ch.status != ChannelStatus::Established {
                continue;
            }
            let [e0, e1] = ch.endpoints;
            for (near, far) in [(e0, e1), (e1, e0)] {
                for &source in map.neighbors(near) {
                    if source != far && matches!(state.slot(source), Slot::Data(_)) {
                        out.push(Move::Teleport { source, near, far });
                    }
                }
            }
        }
    }
    out
}

struct Entry {
    f: f64,
    g: u64,
    teleports: usize,
    path: Vec<Move>,
    state: MappingState,
}

impl Entry {
    fn rank(&self, other: &Self) -> Ordering {
        self.f
            .total_cmp(&other.f)
            .then(self.teleports.cmp(&other.teleports))
            .then_with(|| self.path.cmp(&other.path))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.rank(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // BinaryHeap is a max-heap; invert so the best entry pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.rank(self)
    }
}

/// Finds a cheapest move sequence making every CNOT of `cnots` adjacent.
///
/// Ties go to fewer teleports, then the lexicographically smallest move
/// sequence. With lookahead the next layer's estimate is added to the
/// priority, trading optimality for better follow-up placements.
pub fn route_layer(
    state: &MappingState,
    cnots: &[(usize, usize)],
    lookahead: &[(usize, usize)],
    map: &CouplingMap,
    cost: &CostModel,
    options: &SearchOptions,
) -> Result<LayerRoute, RouteError> {
    if layer_satisfied(state, cnots, map) {
        return Ok(LayerRoute {
            moves: Vec::new(),
            cost: 0,
            state: state.clone(),
            expanded: 0,
        });
    }

    let mut relevant = vec![false; state.logical_count()];
    for &(a, b) in cnots {
        relevant[a] = true;
        relevant[b] = true;
    }
    let estimate = |s: &MappingState| -> f64 {
        let mut h = lower_bound(s, cnots, map, cost, options.teleport) as f64;
        if let Some(w) = options.lookahead {
            h += w * lower_bound(s, lookahead, map, cost, options.teleport) as f64;
        }
        h
    };

    let mut best_g: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut open = BinaryHeap::new();
    best_g.insert(state.key(), 0);
    open.push(Entry {
        f: estimate(state),
        g: 0,
        teleports: 0,
        path: Vec::new(),
        state: state.clone(),
    });

    let mut expanded = 0usize;
    while let Some(entry) = open.pop() {
        if best_g.get(&entry.state.key()).is_some_and(|&g| g < entry.g) {
            continue;
        }
        if layer_satisfied(&entry.state, cnots, map) {
            return Ok(LayerRoute {
                moves: entry.path,
                cost: entry.g,
                state: entry.state,
                expanded,
            });
        }
        expanded += 1;
        if expanded > options.node_budget {
            return Err(RouteError::NodeBudgetExceeded(options.node_budget));
        }
        if expanded.is_multiple_of(1024) && options.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(RouteError::Timeout);
        }

        for mv in successors(&entry.state, &relevant, map, options.teleport) {
            let mut next = entry.state.clone();
            next.apply_move(map, &mv)?;
            let g = entry.g + cost.move_cost(&mv);
            let key = next.key();
            if best_g.get(&key).is_some_and(|&old| old <= g) {
                continue;
            }
            best_g.insert(key, g);
            let mut path = entry.path.clone();
            path.push(mv);
            open.push(Entry {
                f: g as f64 + estimate(&next),
                g,
                teleports: entry.teleports + usize::from(matches!(mv, Move::Teleport { .. })),
                path,
                state: next,
            });
        }
    }
    Err(RouteError::Unroutable)
}

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use teleroute::{CostModel, CouplingMap, MappingState};

/// Device contents as plain data: `cells[p]` is `Some(l)` for logical `l`,
/// `None` otherwise; channels are unordered endpoint pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plain {
    pub cells: Vec<Option<usize>>,
    pub channels: BTreeSet<(usize, usize)>,
}

impl Plain {
    pub fn new(m: usize, placement: &[usize], channels: &[(usize, usize)]) -> Self {
        let mut cells = vec![None; m];
        for (l, &p) in placement.iter().enumerate() {
            cells[p] = Some(l);
        }
        Plain {
            cells,
            channels: channels
                .iter()
                .map(|&(a, b)| (a.min(b), a.max(b)))
                .collect(),
        }
    }

    fn position(&self, l: usize) -> usize {
        self.cells.iter().position(|c| *c == Some(l)).unwrap()
    }

    fn satisfied(&self, map: &CouplingMap, cnots: &[(usize, usize)]) -> bool {
        cnots
            .iter()
            .all(|&(a, b)| map.is_edge(self.position(a), self.position(b)))
    }

    fn swapped(&self, a: usize, b: usize) -> Plain {
        let mut next = self.clone();
        next.cells.swap(a, b);
        let moved = |p: usize| {
            if p == a {
                b
            } else if p == b {
                a
            } else {
                p
            }
        };
        next.channels = self
            .channels
            .iter()
            .map(|&(x, y)| {
                let (x, y) = (moved(x), moved(y));
                (x.min(y), x.max(y))
            })
            .collect();
        next
    }

    /// Every teleport: data at `s` next to one end of a channel lands on
    /// the other end, and `(s, near)` becomes the channel.
    fn teleports(&self, map: &CouplingMap) -> Vec<Plain> {
        let mut out = Vec::new();
        for &(x, y) in &self.channels {
            for (near, far) in [(x, y), (y, x)] {
                for &s in map.neighbors(near) {
                    if s == far || self.cells[s].is_none() {
                        continue;
                    }
                    let mut next = self.clone();
                    next.cells[far] = self.cells[s];
                    next.cells[s] = None;
                    next.channels.remove(&(x, y));
                    next.channels.insert((s.min(near), s.max(near)));
                    out.push(next);
                }
            }
        }
        out
    }
}

/// Cheapest cost of any move sequence (every SWAP on every edge, every
/// teleport) that puts all `cnots` on edges, `None` when no sequence
/// does. Plain Dijkstra.
pub fn brute_force_cost(
    map: &CouplingMap,
    start: &Plain,
    cnots: &[(usize, usize)],
    cost: &CostModel,
    teleport: bool,
) -> Option<u64> {
    let mut dist: HashMap<Plain, u64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(start.clone(), 0);
    heap.push(Reverse((0u64, start.clone())));
    while let Some(Reverse((d, s))) = heap.pop() {
        if dist.get(&s).is_some_and(|&best| best < d) {
            continue;
        }
        if s.satisfied(map, cnots) {
            return Some(d);
        }
        let mut next: Vec<(u64, Plain)> = map
            .edges()
            .iter()
            .map(|&(a, b)| (d + cost.swap_cost(), s.swapped(a, b)))
            .collect();
        if teleport {
            next.extend(
                s.teleports(map)
                    .into_iter()
                    .map(|t| (d + cost.teleport_cost(), t)),
            );
        }
        for (nd, t) in next {
            if dist.get(&t).is_none_or(|&best| nd < best) {
                dist.insert(t.clone(), nd);
                heap.push(Reverse((nd, t)));
            }
        }
    }
    None
}

/// Connected graph on `m` qubits: a random spanning tree plus `extra`
/// random additional edges.
pub fn random_connected_map(rng: &mut impl Rng, m: usize, extra: usize) -> CouplingMap {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut edges = BTreeSet::new();
    for i in 1..m {
        let parent = order[rng.random_range(0..i)];
        let (a, b) = (order[i], parent);
        edges.insert((a.min(b), a.max(b)));
    }
    for _ in 0..extra {
        let a = rng.random_range(0..m);
        let b = rng.random_range(0..m);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    CouplingMap::new(m, &edges).unwrap()
}

/// Random placement of `n` logical qubits with up to `channels` channels
/// on free adjacent pairs.
pub fn random_state(
    rng: &mut impl Rng,
    map: &CouplingMap,
    n: usize,
    channels: usize,
) -> (MappingState, Vec<(usize, usize)>) {
    let m = map.qubit_count();
    let mut positions: Vec<usize> = (0..m).collect();
    positions.shuffle(rng);
    let placement = positions[..n].to_vec();
    let mut state = MappingState::new(m, &placement).unwrap();
    let mut pairs = Vec::new();
    let mut edges = map.edges().to_vec();
    edges.shuffle(rng);
    for (a, b) in edges {
        if pairs.len() == channels {
            break;
        }
        if state.add_channel(a, b).is_ok() {
            pairs.push((a, b));
        }
    }
    (state, pairs)
}

/// `k` disjoint logical pairs out of `n`.
pub fn random_pairs(rng: &mut impl Rng, n: usize, k: usize) -> Vec<(usize, usize)> {
    let mut qs: Vec<usize> = (0..n).collect();
    qs.shuffle(rng);
    qs.chunks_exact(2).take(k).map(|c| (c[0], c[1])).collect()
}

/// Basis permutation of a CNOT-only circuit on `qubits` qubits, computed
/// by flipping index bits directly.
pub fn cnot_permutation(gates: &[(usize, usize)], qubits: usize) -> Vec<usize> {
    (0..1usize << qubits)
        .map(|mut x| {
            for &(c, t) in gates {
                if x >> c & 1 == 1 {
                    x ^= 1 << t;
                }
            }
            x
        })
        .collect()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

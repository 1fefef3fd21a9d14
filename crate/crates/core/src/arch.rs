//! Coupling maps, hop distances and teleportation virtual edges.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::router::{Channel, ChannelStatus};

#[derive(Debug, thiserror::Error)]
pub enum ArchError {
    #[error("malformed coupling map: {0}")]
    Malformed(String),
    #[error("coupling map is disconnected")]
    Disconnected,
    #[error("self-loop on qubit {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) references a qubit outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("coupling map has no qubits")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// On-disk form: `{"qubits": 20, "edges": [[0, 1], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CouplingMapFile {
    pub qubits: usize,
    pub edges: Vec<[usize; 2]>,
}

/// Undirected physical connectivity with precomputed hop distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    qubits: usize,
    /// Normalized `(low, high)` pairs, sorted.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    adjacent: Vec<bool>,
    dist: Vec<u32>,
}

impl CouplingMap {
    pub fn new(qubits: usize, edges: &[(usize, usize)]) -> Result<Self, ArchError> {
        if qubits == 0 {
            return Err(ArchError::Empty);
        }
        let mut norm = Vec::with_capacity(edges.len());
        let mut adjacent = vec![false; qubits * qubits];
        let mut neighbors = vec![Vec::new(); qubits];
        for &(a, b) in edges {
            if a >= qubits || b >= qubits {
                return Err(ArchError::OutOfRange(a, b, qubits));
            }
            if a == b {
                return Err(ArchError::SelfLoop(a));
            }
            if adjacent[a * qubits + b] {
                return Err(ArchError::DuplicateEdge(a, b));
            }
            adjacent[a * qubits + b] = true;
            adjacent[b * qubits + a] = true;
            neighbors[a].push(b);
            neighbors[b].push(a);
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        for n in &mut neighbors {
            n.sort_unstable();
        }

        let mut dist = vec![u32::MAX; qubits * qubits];
        let mut queue = VecDeque::new();
        for src in 0..qubits {
            let row = &mut dist[src * qubits..(src + 1) * qubits];
            row[src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                for &v in &neighbors[u] {
                    if row[v] == u32::MAX {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if row.contains(&u32::MAX) {
                return Err(ArchError::Disconnected);
            }
        }

        Ok(CouplingMap {
            qubits,
            edges: norm,
            neighbors,
            adjacent,
            dist,
        })
    }

    /// Linear chain `0 - 1 - ... - (n-1)`.
    pub fn line(qubits: usize) -> Self {
        let edges: Vec<_> = (1..qubits).map(|i| (i - 1, i)).collect();
        Self::new(qubits, &edges).expect("a line is connected")
    }

    /// The 20-qubit IBM Q Tokyo device.
    pub fn tokyo() -> Self {
        Self::new(20, &TOKYO_EDGES).expect("tokyo map is valid")
    }

    pub fn from_file_contents(file: &CouplingMapFile) -> Result<Self, ArchError> {
        let edges: Vec<_> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::new(file.qubits, &edges)
    }

    pub fn from_json(text: &str) -> Result<Self, ArchError> {
        let file: CouplingMapFile =
            serde_json::from_str(text).map_err(|e| ArchError::Malformed(e.to_string()))?;
        Self::from_file_contents(&file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ArchError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> CouplingMapFile {
        CouplingMapFile {
            qubits: self.qubits,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("serializable")
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.neighbors[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.neighbors[q].len()
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.adjacent[a * self.qubits + b]
    }

    /// Shortest-path hop count.
    pub fn distance(&self, a: usize, b: usize) -> u32 {
        self.dist[a * self.qubits + b]
    }

    /// A shortest path from `a` to `b`, inclusive. Each step moves to the
    /// lowest-indexed neighbor that is one hop closer to `b`.
    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            let d = self.distance(cur, b);
            cur = *self.neighbors[cur]
                .iter()
                .find(|&&n| self.distance(n, b) + 1 == d)
                .expect("connected map");
            path.push(cur);
        }
        path
    }
}

pub const TOKYO_EDGES: [(usize, usize); 43] = [
    // rows
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 4),
    (5, 6),
    (6, 7),
    (7, 8),
    (8, 9),
    (10, 11),
    (11, 12),
    (12, 13),
    (13, 14),
    (15, 16),
    (16, 17),
    (17, 18),
    (18, 19),
    // columns
    (0, 5),
    (5, 10),
    (10, 15),
    (1, 6),
    (6, 11),
    (11, 16),
    (2, 7),
    (7, 12),
    (12, 17),
    (3, 8),
    (8, 13),
    (13, 18),
    (4, 9),
    (9, 14),
    (14, 19),
    // diagonals
    (1, 7),
    (7, 13),
    (13, 19),
    (2, 6),
    (6, 10),
    (3, 9),
    (4, 8),
    (8, 12),
    (12, 16),
    (5, 11),
    (11, 17),
    (14, 18),
];

/// A teleportation made possible by an established channel: the state on
/// `source` (a neighbor of one endpoint) can be moved to `destination`
/// (the opposite endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VirtualEdge {
    pub source: usize,
    pub destination: usize,
    /// The endpoint adjacent to `source`.
    pub near: usize,
    /// Index of the enabling channel in the list passed to [`virtual_edges`].
    pub channel: usize,
}

/// Teleport moves offered by the established channels. An endpoint adjacent
/// to its partner contributes no move onto that partner.
pub fn virtual_edges(map: &CouplingMap, channels: &[Channel]) -> Vec<VirtualEdge> {
    let mut out = Vec::new();
    for (ci, ch) in channels.iter().enumerate() {
        if ch.status != ChannelStatus::Established {
            continue;
        }
        let [a, b] = ch.endpoints;
        for (near, far) in [(a, b), (b, a)] {
            for &source in map.neighbors(near) {
                if source != far {
                    out.push(VirtualEdge {
                        source,
                        destination: far,
                        near,
                        channel: ci,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bfs_oracle(edges: &[(usize, usize)], n: usize, a: usize, b: usize) -> u32 {
        // Bellman-Ford style relaxation, independent of the BFS in `new`.
        let mut d = vec![u32::MAX / 2; n];
        d[a] = 0;
        for _ in 0..n {
            for &(u, v) in edges {
                d[v] = d[v].min(d[u] + 1);
                d[u] = d[u].min(d[v] + 1);
            }
        }
        d[b]
    }

    #[test]
    fn tokyo_neighbors() {
        let t = CouplingMap::tokyo();
        assert_eq!(t.qubit_count(), 20);
        assert_eq!(t.neighbors(17), &[11, 12, 16, 18]);
        assert_eq!(t.neighbors(2), &[1, 3, 6, 7]);
        assert!(t.is_edge(0, 5));
        assert!(!t.is_edge(0, 2));
    }

    #[test]
    fn tokyo_distances() {
        let t = CouplingMap::tokyo();
        assert_eq!(t.distance(0, 0), 0);
        assert_eq!(t.distance(0, 2), 2);
        assert_eq!(t.distance(3, 16), 3);
        for a in 0..20 {
            for b in 0..20 {
                assert_eq!(t.distance(a, b), bfs_oracle(&TOKYO_EDGES, 20, a, b));
                assert_eq!(t.distance(a, b), t.distance(b, a));
                assert_eq!(t.distance(a, b) == 1, t.is_edge(a, b));
                for c in 0..20 {
                    assert!(t.distance(a, c) <= t.distance(a, b) + t.distance(b, c));
                }
            }
        }
    }

    #[test]
    fn shortest_path_is_a_path() {
        let t = CouplingMap::tokyo();
        let p = t.shortest_path(3, 16);
        assert_eq!(p.len(), 4);
        assert_eq!((p[0], p[3]), (3, 16));
        assert!(p.windows(2).all(|w| t.is_edge(w[0], w[1])));
    }

    #[test]
    fn json_loading() {
        let m = CouplingMap::from_json(r#"{"qubits":2, "edges":[[0,1]]}"#).unwrap();
        assert_eq!(m.qubit_count(), 2);
        assert_eq!(m.distance(0, 1), 1);

        assert!(matches!(
            CouplingMap::from_json(r#"{"qubits":3, "edges":[[0,1]]}"#),
            Err(ArchError::Disconnected)
        ));
        assert!(matches!(
            CouplingMap::from_json(r#"{"qubits":2, "edges":[[0,1],[1,0]]}"#),
            Err(ArchError::DuplicateEdge(1, 0))
        ));
        assert!(matches!(
            CouplingMap::from_json(r#"{"qubits":2, "edges":[[0,0],[0,1]]}"#),
            Err(ArchError::SelfLoop(0))
        ));
        assert!(matches!(
            CouplingMap::from_json(r#"{"qubits":2, "edges":[[0,1]"#),
            Err(ArchError::Malformed(_))
        ));

        let tokyo = CouplingMap::tokyo();
        assert_eq!(CouplingMap::from_json(&tokyo.to_json()).unwrap(), tokyo);
    }

    #[test]
    fn virtual_edge_counts() {
        let t = CouplingMap::tokyo();
        assert!(virtual_edges(&t, &[]).is_empty());

        let ch = Channel::new([2, 17], [0, 1]);
        let v = virtual_edges(&t, std::slice::from_ref(&ch));
        assert_eq!(v.len(), 8);
        let mut to2: Vec<usize> = v
            .iter()
            .filter(|e| e.destination == 2)
            .map(|e| e.source)
            .collect();
        to2.sort_unstable();
        assert_eq!(to2, vec![11, 12, 16, 18]);

        let mut consumed = ch.clone();
        consumed.status = ChannelStatus::Consumed;
        assert!(virtual_edges(&t, &[consumed]).is_empty());

        let line = CouplingMap::line(2);
        assert!(virtual_edges(&line, &[Channel::new([0, 1], [0, 1])]).is_empty());

        // |moves| = deg(a) - [adj] + deg(b) - [adj]
        for (a, b) in [(0, 1), (0, 19), (12, 17), (5, 9)] {
            let adj = usize::from(t.is_edge(a, b));
            let expected = t.degree(a) - adj + t.degree(b) - adj;
            assert_eq!(
                virtual_edges(&t, &[Channel::new([a, b], [0, 1])]).len(),
                expected
            );
        }
    }
}

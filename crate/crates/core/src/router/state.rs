use std::cmp::Ordering;
use std::fmt;

use crate::arch::CouplingMap;

use super::RouteError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelStatus {
    Established,
    Consumed,
}

/// An entangled ancilla pair usable for teleportation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Channel {
    /// Physical positions of the two halves.
    pub endpoints: [usize; 2],
    pub status: ChannelStatus,
    /// Ancilla labels `t0`, `t1` of the two halves.
    pub ancillas: [usize; 2],
}

impl Channel {
    pub fn new(endpoints: [usize; 2], ancillas: [usize; 2]) -> Self {
        Channel {
            endpoints,
            status: ChannelStatus::Established,
            ancillas,
        }
    }

    /// Endpoints ordered low, high.
    pub fn pair(&self) -> (usize, usize) {
        let [a, b] = self.endpoints;
        (a.min(b), a.max(b))
    }
}

/// What a physical qubit currently holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Free,
    Data(usize),
    Channel { id: usize, half: usize },
}

/// A routing step. `Swap` and `Teleport` change the mapping; `Bridge` only
/// appears in logs of the static bridging strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Swap {
        a: usize,
        b: usize,
    },
    /// Moves the state at `source` to `far` through the channel whose other
    /// half sits at `near`, adjacent to `source`.
    Teleport {
        source: usize,
        near: usize,
        far: usize,
    },
    Bridge {
        control: usize,
        target: usize,
        intermediates: u32,
    },
}

impl Move {
    pub fn swap(a: usize, b: usize) -> Self {
        Move::Swap {
            a: a.min(b),
            b: a.max(b),
        }
    }

    // Teleports compare by destination first.
    fn sort_key(&self) -> (u8, usize, usize, usize) {
        match *self {
            Move::Swap { a, b } => (0, a, b, 0),
            Move::Teleport { source, near, far } => (1, far, source, near),
            Move::Bridge {
                control,
                target,
                intermediates,
            } => (2, control, target, intermediates as usize),
        }
    }
}

impl Ord for Move {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Move {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Move::Swap { a, b } => write!(f, "swap Q{a} Q{b}"),
            Move::Teleport { source, near, far } => {
                write!(f, "teleport Q{source} -> Q{far} via Q{near}")
            }
            Move::Bridge {
                control, target, ..
            } => write!(f, "bridge Q{control} -> Q{target}"),
        }
    }
}

/// Logical-to-physical placement plus the live channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingState {
    slots: Vec<Slot>,
    placement: Vec<usize>,
    channels: Vec<Channel>,
}

impl MappingState {
    /// `placement[l]` is the physical qubit of logical qubit `l`.
    pub fn new(physical: usize, placement: &[usize]) -> Result<Self, RouteError> {
        if placement.len() > physical {
            return Err(RouteError::TooManyQubits {
                logical: placement.len(),
                physical,
            });
        }
        let mut slots = vec![Slot::Free; physical];
        for (l, &p) in placement.iter().enumerate() {
            if p >= physical || slots[p] != Slot::Free {
                return Err(RouteError::InvalidPlacement(p));
            }
            slots[p] = Slot::Data(l);
        }
        Ok(MappingState {
            slots,
            placement: placement.to_vec(),
            channels: Vec::new(),
        })
    }

    /// Places an established channel on two free qubits.
    pub fn add_channel(&mut self, a: usize, b: usize) -> Result<usize, RouteError> {
        if a == b
            || self.slots.get(a) != Some(&Slot::Free)
            || self.slots.get(b) != Some(&Slot::Free)
        {
            return Err(RouteError::InvalidPlacement(
                if self.slots.get(a) == Some(&Slot::Free) {
                    b
                } else {
                    a
                },
            ));
        }
        let id = self.channels.len();
        self.slots[a] = Slot::Channel { id, half: 0 };
        self.slots[b] = Slot::Channel { id, half: 1 };
        self.channels
            .push(Channel::new([a, b], [2 * id, 2 * id + 1]));
        Ok(id)
    }

    pub fn physical_count(&self) -> usize {
        self.slots.len()
    }

    pub fn logical_count(&self) -> usize {
        self.placement.len()
    }

    pub fn placement(&self) -> &[usize] {
        &self.placement
    }

    pub fn physical_of(&self, logical: usize) -> usize {
        self.placement[logical]
    }

    pub fn slot(&self, physical: usize) -> Slot {
        self.slots[physical]
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn free_qubits(&self) -> Vec<usize> {
        (0..self.slots.len())
            .filter(|&p| self.slots[p] == Slot::Free)
            .collect()
    }

    /// Exchanges the contents of two adjacent physical qubits.
    pub fn apply_swap(&mut self, map: &CouplingMap, a: usize, b: usize) -> Result<(), RouteError> {
        if a >= self.slots.len() || b >= self.slots.len() || !map.is_edge(a, b) {
            return Err(RouteError::NotAnEdge(a, b));
        }
        self.slots.swap(a, b);
        for p in [a, b] {
            match self.slots[p] {
                Slot::Data(l) => self.placement[l] = p,
                Slot::Channel { id, half } => self.channels[id].endpoints[half] = p,
                Slot::Free => {}
            }
        }
        Ok(())
    }

    /// Teleports the data at `source` through the channel with a half at
    /// `near`. The measured pair `(source, near)` becomes the channel's new
    /// position once re-entangled. Returns the destination.
    pub fn apply_teleport(
        &mut self,
        map: &CouplingMap,
        source: usize,
        near: usize,
    ) -> Result<usize, RouteError> {
        let Slot::Channel { id, half } = self.slots.get(near).copied().unwrap_or(Slot::Free) else {
            return Err(RouteError::NotAChannel(near));
        };
        if source >= self.slots.len() || !map.is_edge(source, near) {
            return Err(RouteError::NotAdjacentToChannel {
                qubit: source,
                near,
            });
        }
        let Slot::Data(logical) = self.slots[source] else {
            return Err(RouteError::SourceNotData(source));
        };
        let channel = &mut self.channels[id];
        if channel.status != ChannelStatus::Established {
            return Err(RouteError::ChannelConsumed(id));
        }
        let far_half = 1 - half;
        let far = channel.endpoints[far_half];
        channel.endpoints[far_half] = source;
        self.slots[far] = Slot::Data(logical);
        self.slots[source] = Slot::Channel { id, half: far_half };
        self.placement[logical] = far;
        Ok(far)
    }

    pub fn apply_move(&mut self, map: &CouplingMap, mv: &Move) -> Result<(), RouteError> {
        match *mv {
            Move::Swap { a, b } => self.apply_swap(map, a, b),
            Move::Teleport { source, near, far } => {
                let got = self.apply_teleport(map, source, near)?;
                debug_assert_eq!(got, far);
                Ok(())
            }
            Move::Bridge { .. } => Ok(()),
        }
    }

    /// Marks a channel as used up; it offers no moves until re-established.
    pub fn consume_channel(&mut self, id: usize) {
        self.channels[id].status = ChannelStatus::Consumed;
    }

    pub fn reestablish_channel(&mut self, id: usize) {
        self.channels[id].status = ChannelStatus::Established;
    }

    /// Canonical encoding for search deduplication. Channel halves are
    /// encoded by their partner's position, so relabelling channels or
    /// exchanging halves gives the same key.
    pub(crate) fn key(&self) -> Vec<u32> {
        self.slots
            .iter()
            .map(|s| match *s {
                Slot::Free => 0,
                Slot::Data(l) => 1 + l as u32,
                Slot::Channel { id, half } => {
                    let ch = &self.channels[id];
                    let live = u32::from(ch.status == ChannelStatus::Established);
                    0x8000_0000 | (live << 30) | ch.endpoints[1 - half] as u32
                }
            })
            .collect()
    }

    /// Data, channel halves and free qubits partition the device.
    pub fn check_invariants(&self) -> Result<(), String> {
        let m = self.slots.len();
        let mut seen = vec![false; m];
        for (l, &p) in self.placement.iter().enumerate() {
            if p >= m || seen[p] || self.slots[p] != Slot::Data(l) {
                return Err(format!("logical {l} at {p} inconsistent"));
            }
            seen[p] = true;
        }
        for (id, ch) in self.channels.iter().enumerate() {
            let [a, b] = ch.endpoints;
            if a == b {
                return Err(format!("channel {id} endpoints coincide"));
            }
            for (half, p) in [a, b].into_iter().enumerate() {
                if p >= m || seen[p] || self.slots[p] != (Slot::Channel { id, half }) {
                    return Err(format!("channel {id} half {half} at {p} inconsistent"));
                }
                seen[p] = true;
            }
        }
        for (p, s) in self.slots.iter().enumerate() {
            if !seen[p] && *s != Slot::Free {
                return Err(format!("qubit {p} holds stale {s:?}"));
            }
        }
        if self.channels.len() > (m - self.placement.len()) / 2 {
            return Err("too many channels".into());
        }
        Ok(())
    }
}

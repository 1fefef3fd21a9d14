use std::fmt;
use std::str::FromStr;

use super::Move;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostMode {
    /// Every SWAP and teleport costs 1.
    Equal,
    /// Moves are priced by their gate content.
    Priced,
}

/// Primitive gate prices and the move prices derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CostModel {
    pub cnot: u64,
    pub single: u64,
    pub measure: u64,
    pub mode: CostMode,
}

impl CostModel {
    pub fn equal() -> Self {
        CostModel {
            cnot: 1,
            single: 0,
            measure: 0,
            mode: CostMode::Equal,
        }
    }

    /// CNOT 10, single-qubit gate 1, measurement 10.
    pub fn ibm() -> Self {
        CostModel {
            cnot: 10,
            single: 1,
            measure: 10,
            mode: CostMode::Priced,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.mode {
            CostMode::Equal => "equal",
            CostMode::Priced => "ibm",
        }
    }

    /// Three CNOTs.
    pub fn swap_cost(&self) -> u64 {
        match self.mode {
            CostMode::Equal => 1,
            CostMode::Priced => 3 * self.cnot,
        }
    }

    /// Bell measurement (CNOT, H, two measurements), two corrections priced
    /// as always applied, and re-entangling the measured pair (H, CNOT).
    /// The conditional resets are not priced.
    pub fn teleport_cost(&self) -> u64 {
        match self.mode {
            CostMode::Equal => 1,
            CostMode::Priced => {
                2 * self.cnot + 2 * self.single + 2 * self.measure + 2 * self.single
            }
        }
    }

    /// Extra cost of bridging a CNOT across `intermediates` qubits, i.e.
    /// `3 * 2^k - 3` CNOTs beyond the original one. In equal mode this is
    /// expressed in SWAP equivalents (three CNOTs each).
    pub fn bridge_cost(&self, intermediates: u32) -> u64 {
        let extra_swaps = (1u64 << intermediates) - 1;
        match self.mode {
            CostMode::Equal => extra_swaps,
            CostMode::Priced => 3 * extra_swaps * self.cnot,
        }
    }

    pub fn move_cost(&self, mv: &Move) -> u64 {
        match mv {
            Move::Swap { .. } => self.swap_cost(),
            Move::Teleport { .. } => self.teleport_cost(),
            Move::Bridge { intermediates, .. } => self.bridge_cost(*intermediates),
        }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equal" => Ok(Self::equal()),
            "ibm" => Ok(Self::ibm()),
            other => Err(format!("unknown cost model `{other}` (expected equal|ibm)")),
        }
    }
}

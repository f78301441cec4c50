use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rings::{perceive_ring_systems, RingSystemSummary};
use super::{parse_linear, MolError, MolecularGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "Easy",
            Difficulty::Medium => "Medium",
            Difficulty::Hard => "Hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            _ => Err(format!("unknown difficulty '{s}'")),
        }
    }
}

/// Easy: no polycyclic ring block. Medium: exactly one, made of two rings, with no spiro
/// or bridged junction in its system. Hard: everything else.
pub fn classify_summary(summary: &RingSystemSummary) -> Difficulty {
    let fused: Vec<_> = summary.ring_systems.iter().filter(|s| s.fused).collect();
    match fused.as_slice() {
        [] => Difficulty::Easy,
        [s] if s.ring_count == 2 && !s.has_spiro_internal && !s.has_bridge_internal => {
            Difficulty::Medium
        }
        _ => Difficulty::Hard,
    }
}

pub fn classify_difficulty(g: &MolecularGraph) -> Difficulty {
    classify_summary(&perceive_ring_systems(g))
}

pub fn classify_difficulty_notation(notation: &str) -> Result<Difficulty, MolError> {
    Ok(classify_difficulty(&parse_linear(notation)?))
}

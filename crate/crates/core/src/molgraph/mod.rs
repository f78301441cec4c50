//! Molecular graphs: atoms, bonds, stereo annotations, linear notation I/O,
//! canonical forms, ring perception and difficulty classification.

mod aromatic;
mod canon;
mod difficulty;
mod kekule;
mod rings;
mod smiles;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aromatic::{perceive_aromaticity, Aromaticity};
pub use canon::{canonical_form, graphs_equivalent};
pub use difficulty::{
    classify_difficulty, classify_difficulty_notation, classify_summary, Difficulty,
};
pub use kekule::{maximum_matching, MatchingEdge};
pub use rings::{
    cyclic_bonds, minimum_cycle_basis, perceive_ring_systems, RingSystem, RingSystemSummary,
};
pub use smiles::{emit_linear, parse_linear, parse_linear_multi, parse_raw};

pub type AtomId = usize;
pub type BondId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MolError {
    #[error("syntax error at {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("unclosed ring bond {0}")]
    UnclosedRing(u32),
    #[error("kekulization failed: {0}")]
    KekulizationFailure(String),
    #[error("valence violation on atom {atom} ({element})")]
    ValenceViolation { atom: AtomId, element: &'static str },
    #[error("notation contains {0} disconnected components")]
    MultiComponent(usize),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    H,
    B,
    C,
    N,
    O,
    F,
    Si,
    P,
    S,
    Cl,
    Se,
    Br,
    I,
}

impl Element {
    pub const ALL: [Element; 13] = [
        Element::H,
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::Si,
        Element::P,
        Element::S,
        Element::Cl,
        Element::Se,
        Element::Br,
        Element::I,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::H => "H",
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::Si => "Si",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Se => "Se",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Element> {
        Element::ALL.iter().copied().find(|e| e.symbol() == s)
    }

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::H => 1,
            Element::B => 5,
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::F => 9,
            Element::Si => 14,
            Element::P => 15,
            Element::S => 16,
            Element::Cl => 17,
            Element::Se => 34,
            Element::Br => 35,
            Element::I => 53,
        }
    }

    /// Allowed neutral valences, smallest first.
    pub fn valences(self) -> &'static [u8] {
        match self {
            Element::H | Element::F | Element::Cl | Element::Br | Element::I => &[1],
            Element::B => &[3],
            Element::C | Element::Si => &[4],
            Element::N => &[3, 5],
            Element::O => &[2],
            Element::P => &[3, 5],
            Element::S | Element::Se => &[2, 4, 6],
        }
    }

    /// Elements writable without brackets in linear notation.
    pub fn organic_subset(self) -> bool {
        matches!(
            self,
            Element::B
                | Element::C
                | Element::N
                | Element::O
                | Element::P
                | Element::S
                | Element::F
                | Element::Cl
                | Element::Br
                | Element::I
        )
    }

    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::B
                | Element::C
                | Element::N
                | Element::O
                | Element::P
                | Element::S
                | Element::Se
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    pub aromatic: bool,
    /// Hydrogen count given explicitly (bracket atoms); `None` means derive from valence.
    pub explicit_h: Option<u8>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            charge: 0,
            aromatic: false,
            explicit_h: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub a: AtomId,
    pub b: AtomId,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, x: AtomId) -> AtomId {
        if self.a == x {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StereoNeighbor {
    Atom(AtomId),
    ImplicitH,
}

/// `@` lists the last three neighbours anticlockwise when viewed from the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chirality {
    Anticlockwise,
    Clockwise,
}

impl Chirality {
    pub fn flipped(self) -> Chirality {
        match self {
            Chirality::Anticlockwise => Chirality::Clockwise,
            Chirality::Clockwise => Chirality::Anticlockwise,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetrahedralStereo {
    pub neighbors: Vec<StereoNeighbor>,
    pub chirality: Chirality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BondConfig {
    Cis,
    Trans,
}

impl BondConfig {
    pub fn flipped(self) -> BondConfig {
        match self {
            BondConfig::Cis => BondConfig::Trans,
            BondConfig::Trans => BondConfig::Cis,
        }
    }
}

/// Relative placement of one reference neighbour on each end of a double bond.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondStereo {
    pub ref_a: AtomId,
    pub ref_b: AtomId,
    pub config: BondConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(AtomId, BondId)>>,
    pub atom_stereo: BTreeMap<AtomId, TetrahedralStereo>,
    pub bond_stereo: BTreeMap<BondId, BondStereo>,
}

impl MolecularGraph {
    pub fn new() -> MolecularGraph {
        MolecularGraph::default()
    }

    pub fn add_atom(&mut self, atom: Atom) -> AtomId {
        self.atoms.push(atom);
        self.adjacency.push(Vec::new());
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, a: AtomId, b: AtomId, order: BondOrder) -> Result<BondId, MolError> {
        if a == b || a >= self.atoms.len() || b >= self.atoms.len() {
            return Err(MolError::InvalidGraph(format!("bad bond {a}-{b}")));
        }
        if self.bond_between(a, b).is_some() {
            return Err(MolError::InvalidGraph(format!("duplicate bond {a}-{b}")));
        }
        let id = self.bonds.len();
        self.bonds.push(Bond { a, b, order });
        self.adjacency[a].push((b, id));
        self.adjacency[b].push((a, id));
        Ok(id)
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id]
    }

    pub fn atom_mut(&mut self, id: AtomId) -> &mut Atom {
        &mut self.atoms[id]
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bond(&self, id: BondId) -> &Bond {
        &self.bonds[id]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn set_bond_order(&mut self, id: BondId, order: BondOrder) {
        self.bonds[id].order = order;
    }

    pub fn neighbors(&self, a: AtomId) -> &[(AtomId, BondId)] {
        &self.adjacency[a]
    }

    pub fn degree(&self, a: AtomId) -> usize {
        self.adjacency[a].len()
    }

    pub fn bond_between(&self, a: AtomId, b: AtomId) -> Option<BondId> {
        self.adjacency[a]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|(_, e)| *e)
    }

    /// Sum of bond orders, counting aromatic bonds as one.
    pub fn bond_order_sum(&self, a: AtomId) -> u8 {
        self.adjacency[a]
            .iter()
            .map(|(_, e)| self.bonds[*e].order.valence())
            .sum()
    }

    pub fn is_kekulized(&self) -> bool {
        !self.atoms.iter().any(|a| a.aromatic)
            && !self.bonds.iter().any(|b| b.order == BondOrder::Aromatic)
    }

    /// Hydrogen count of an atom in a kekulized graph.
    pub fn hydrogen_count(&self, a: AtomId) -> u8 {
        let atom = &self.atoms[a];
        if let Some(h) = atom.explicit_h {
            return h;
        }
        let used = self.bond_order_sum(a) as i16;
        let adjust = charge_valence_shift(atom.element, atom.charge);
        for &v in atom.element.valences() {
            let v = v as i16 + adjust;
            if v >= used {
                return (v - used) as u8;
            }
        }
        0
    }

    /// Checks every atom against its element's allowed valences.
    pub fn check_valence(&self) -> Result<(), MolError> {
        for (i, atom) in self.atoms.iter().enumerate() {
            let used = self.bond_order_sum(i) as i16 + atom.explicit_h.unwrap_or(0) as i16;
            let adjust = charge_valence_shift(atom.element, atom.charge);
            let max = *atom.element.valences().last().unwrap() as i16 + adjust;
            if used > max {
                return Err(MolError::ValenceViolation {
                    atom: i,
                    element: atom.element.symbol(),
                });
            }
        }
        Ok(())
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms
            .iter()
            .filter(|a| a.element != Element::H)
            .count()
    }

    /// Connected components as sorted atom lists.
    pub fn components(&self) -> Vec<Vec<AtomId>> {
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for s in 0..self.atoms.len() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Returns a copy with atoms renumbered so that old atom `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[AtomId]) -> MolecularGraph {
        assert_eq!(perm.len(), self.atoms.len());
        let mut inverse = vec![0; perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            inverse[new] = old;
        }
        let mut g = MolecularGraph::new();
        for &old in &inverse {
            g.add_atom(self.atoms[old].clone());
        }
        let mut bond_map = vec![0; self.bonds.len()];
        let mut bond_order: Vec<usize> = (0..self.bonds.len()).collect();
        bond_order.sort_by_key(|&e| {
            let b = &self.bonds[e];
            let (x, y) = (perm[b.a], perm[b.b]);
            (x.min(y), x.max(y))
        });
        for e in bond_order {
            let b = &self.bonds[e];
            bond_map[e] = g
                .add_bond(perm[b.a], perm[b.b], b.order)
                .expect("valid permutation");
        }
        let map_n = |n: &StereoNeighbor| match n {
            StereoNeighbor::Atom(a) => StereoNeighbor::Atom(perm[*a]),
            StereoNeighbor::ImplicitH => StereoNeighbor::ImplicitH,
        };
        for (a, st) in &self.atom_stereo {
            g.atom_stereo.insert(
                perm[*a],
                TetrahedralStereo {
                    neighbors: st.neighbors.iter().map(map_n).collect(),
                    chirality: st.chirality,
                },
            );
        }
        for (e, st) in &self.bond_stereo {
            g.bond_stereo.insert(
                bond_map[*e],
                BondStereo {
                    ref_a: perm[st.ref_a],
                    ref_b: perm[st.ref_b],
                    config: st.config,
                },
            );
        }
        g
    }

    /// Folds explicit hydrogen atoms attached to a single heavy atom into hydrogen counts.
    pub fn suppress_hydrogens(&self) -> MolecularGraph {
        let removable: Vec<bool> = (0..self.atoms.len())
            .map(|i| {
                let a = &self.atoms[i];
                a.element == Element::H
                    && a.charge == 0
                    && self.degree(i) == 1
                    && self.atoms[self.adjacency[i][0].0].element != Element::H
                    && self.bonds[self.adjacency[i][0].1].order == BondOrder::Single
            })
            .collect();
        if !removable.iter().any(|&r| r) {
            return self.clone();
        }
        let mut extra_h = vec![0u8; self.atoms.len()];
        for i in 0..self.atoms.len() {
            if removable[i] {
                extra_h[self.adjacency[i][0].0] += 1;
            }
        }
        let mut map = vec![usize::MAX; self.atoms.len()];
        let mut g = MolecularGraph::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if removable[i] {
                continue;
            }
            let mut a = a.clone();
            if extra_h[i] > 0 {
                let kept = match a.explicit_h {
                    Some(h) => h,
                    None => self.hydrogen_count(i),
                };
                a.explicit_h = Some(kept + extra_h[i]);
            }
            map[i] = g.add_atom(a);
        }
        let mut bond_map = vec![usize::MAX; self.bonds.len()];
        for (e, b) in self.bonds.iter().enumerate() {
            if removable[b.a] || removable[b.b] {
                continue;
            }
            bond_map[e] = g.add_bond(map[b.a], map[b.b], b.order).expect("valid");
        }
        for (a, st) in &self.atom_stereo {
            if removable[*a] {
                continue;
            }
            let neighbors = st
                .neighbors
                .iter()
                .map(|n| match n {
                    StereoNeighbor::Atom(x) if removable[*x] => StereoNeighbor::ImplicitH,
                    StereoNeighbor::Atom(x) => StereoNeighbor::Atom(map[*x]),
                    StereoNeighbor::ImplicitH => StereoNeighbor::ImplicitH,
                })
                .collect();
            g.atom_stereo.insert(
                map[*a],
                TetrahedralStereo {
                    neighbors,
                    chirality: st.chirality,
                },
            );
        }
        for (e, st) in &self.bond_stereo {
            if bond_map[*e] == usize::MAX || removable[st.ref_a] || removable[st.ref_b] {
                continue;
            }
            g.bond_stereo.insert(
                bond_map[*e],
                BondStereo {
                    ref_a: map[st.ref_a],
                    ref_b: map[st.ref_b],
                    config: st.config,
                },
            );
        }
        g
    }
}

fn charge_valence_shift(element: Element, charge: i8) -> i16 {
    match element {
        Element::N | Element::P | Element::O | Element::S | Element::Se => charge as i16,
        Element::B | Element::C | Element::Si => -(charge.abs() as i16),
        _ => -(charge.abs() as i16),
    }
}

/// Heavy (non-hydrogen) atom count of a linear notation.
pub fn count_heavy_atoms(notation: &str) -> Result<usize, MolError> {
    Ok(parse_linear(notation)?.heavy_atom_count())
}

/// Parity of the permutation taking `from` to `to` (both lists hold the same items).
pub(crate) fn permutation_is_odd<T: PartialEq>(from: &[T], to: &[T]) -> bool {
    let mut idx: Vec<usize> = to
        .iter()
        .map(|t| from.iter().position(|f| f == t).expect("same items"))
        .collect();
    let mut swaps = 0;
    for i in 0..idx.len() {
        while idx[i] != i {
            let j = idx[i];
            idx.swap(i, j);
            swaps += 1;
        }
    }
    swaps % 2 == 1
}

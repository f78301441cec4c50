//! Fused, bridged and spiro ring assembly with label schemes and junction maps.

mod numbering;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{minimum_cycle_basis, parse_raw, Element, MolecularGraph};
use crate::tokenizer::Locant;

pub use numbering::peripheral_numbering;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("invalid fusion letter '{0}'")]
    InvalidFusionLetter(String),
    #[error("locant {0} is out of range")]
    LocantOutOfRange(String),
    #[error("incompatible fusion edge: {0}")]
    IncompatibleEdge(String),
    #[error("unknown locant {0}")]
    UnknownLocant(String),
    #[error("unsupported bridge length {0}")]
    UnsupportedBridgeLength(usize),
    #[error("spiro atoms differ: {0}")]
    SpiroAtomMismatch(String),
    #[error("unsupported ring topology: {0}")]
    UnsupportedTopology(String),
    #[error("valence violation: {0}")]
    ValenceViolation(String),
    #[error("bad ring template: {0}")]
    BadTemplate(String),
}

/// Ordered atom labels of one ring system, with a prime level applied to all of them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelScheme {
    pub labels: Vec<String>,
    pub prime_level: u32,
}

impl LabelScheme {
    pub fn new(labels: Vec<String>) -> LabelScheme {
        LabelScheme {
            labels,
            prime_level: 0,
        }
    }

    pub fn numeric(n: usize) -> LabelScheme {
        LabelScheme::new((1..=n).map(|i| i.to_string()).collect())
    }

    /// Reads `1/2,ortho/3` style attributes; `numeric` needs the atom count.
    pub fn from_attr(attr: &str, atom_count: usize) -> LabelScheme {
        if attr == "numeric" {
            return LabelScheme::numeric(atom_count);
        }
        LabelScheme::new(
            attr.split('/')
                .map(|l| l.split(',').next().unwrap_or("").to_string())
                .collect(),
        )
    }

    pub fn with_primes(mut self, level: u32) -> LabelScheme {
        self.prime_level = level;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels including their primes.
    pub fn rendered(&self) -> Vec<String> {
        let p = "'".repeat(self.prime_level as usize);
        self.labels.iter().map(|l| format!("{l}{p}")).collect()
    }

    /// Index of a (possibly primed) label.
    pub fn position(&self, label: &str) -> Option<usize> {
        let stripped = label.trim_end_matches('\'');
        if (label.len() - stripped.len()) as u32 != self.prime_level {
            return None;
        }
        self.labels.iter().position(|l| l == stripped)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    /// Highest plain number used by any label.
    pub fn max_number(&self) -> u32 {
        self.labels
            .iter()
            .filter_map(|l| Locant::parse(l))
            .map(|l| l.number)
            .max()
            .unwrap_or(0)
    }

    pub fn to_attr(&self) -> String {
        self.rendered().join("/")
    }
}

/// Per-atom provenance of a fused system: one optional source label per component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JunctionMap {
    pub entries: Vec<Vec<Option<String>>>,
}

impl JunctionMap {
    pub fn fusion_points(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.iter().filter(|x| x.is_some()).count() >= 2)
            .count()
    }

    pub fn parse(s: &str) -> Option<JunctionMap> {
        let mut entries = Vec::new();
        for item in s.split('/') {
            let inner = item.trim().strip_prefix('(')?.strip_suffix(')')?;
            entries.push(
                inner
                    .split(',')
                    .map(|x| {
                        let x = x.trim();
                        (!x.is_empty()).then(|| x.to_string())
                    })
                    .collect(),
            );
        }
        Some(JunctionMap { entries })
    }
}

impl fmt::Display for JunctionMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            f.write_str("(")?;
            for (j, x) in e.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                f.write_str(x.as_deref().unwrap_or(""))?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingAtom {
    pub element: Element,
    pub aromatic: bool,
}

/// One ring or ring system with its atom labels; atom order follows the labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingComponent {
    pub atoms: Vec<RingAtom>,
    pub bonds: Vec<(usize, usize)>,
    pub value: String,
    pub labels: LabelScheme,
    pub heteroatoms: Vec<(Element, String)>,
    /// Bonds shared by two rings (not on the periphery).
    pub interior: Vec<(usize, usize)>,
}

fn norm(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl RingComponent {
    /// Builds a component from template notation whose atom order matches `labels`.
    pub fn from_template(value: &str, labels: LabelScheme) -> Result<RingComponent, TopologyError> {
        let g =
            parse_raw(value).map_err(|e| TopologyError::BadTemplate(format!("{value}: {e}")))?;
        if g.atom_count() != labels.len() {
            return Err(TopologyError::BadTemplate(format!(
                "{value}: {} atoms but {} labels",
                g.atom_count(),
                labels.len()
            )));
        }
        let atoms = g
            .atoms()
            .iter()
            .map(|a| RingAtom {
                element: a.element,
                aromatic: a.aromatic,
            })
            .collect();
        let bonds: Vec<_> = g.bonds().iter().map(|b| norm(b.a, b.b)).collect();
        let interior = interior_bonds(&g);
        let heteroatoms = g
            .atoms()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.element != Element::C)
            .map(|(i, a)| (a.element, labels.labels[i].clone()))
            .collect();
        Ok(RingComponent {
            atoms,
            bonds,
            value: value.to_string(),
            labels,
            heteroatoms,
            interior,
        })
    }

    /// Monocyclic carbon ring of `n` atoms.
    pub fn carbocycle(n: usize, aromatic: bool) -> RingComponent {
        let c = if aromatic { "c" } else { "C" };
        let value = format!("{c}1{}1", c.repeat(n - 1));
        let atoms = vec![
            RingAtom {
                element: Element::C,
                aromatic
            };
            n
        ];
        let bonds = (0..n).map(|i| norm(i, (i + 1) % n)).collect();
        RingComponent {
            atoms,
            bonds,
            value,
            labels: LabelScheme::numeric(n),
            heteroatoms: Vec::new(),
            interior: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn has_bond(&self, a: usize, b: usize) -> bool {
        self.bonds.contains(&norm(a, b))
    }

    pub fn degree(&self, a: usize) -> usize {
        self.bonds
            .iter()
            .filter(|&&(x, y)| x == a || y == a)
            .count()
    }

    fn locate(&self, label: &str) -> Result<usize, TopologyError> {
        self.labels
            .position(label)
            .ok_or_else(|| TopologyError::LocantOutOfRange(label.to_string()))
    }
}

fn interior_bonds(g: &MolecularGraph) -> Vec<(usize, usize)> {
    let mut count = std::collections::HashMap::new();
    for ring in minimum_cycle_basis(g) {
        for i in 0..ring.len() {
            *count
                .entry(norm(ring[i], ring[(i + 1) % ring.len()]))
                .or_insert(0) += 1;
        }
    }
    let mut v: Vec<_> = count
        .into_iter()
        .filter(|&(_, c)| c >= 2)
        .map(|(e, _)| e)
        .collect();
    v.sort();
    v
}

/// Fusion descriptor such as `[b]` or `[5,6-b]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionDescriptor {
    pub attached_locants: Vec<String>,
    pub letter: char,
}

impl FusionDescriptor {
    /// Parses the bracket text, with or without the brackets.
    pub fn parse(s: &str) -> Option<FusionDescriptor> {
        let body = s.trim_start_matches('[').trim_end_matches(']');
        let (locs, letter) = match body.rsplit_once('-') {
            Some((l, x)) => (l.split(',').map(str::to_string).collect(), x),
            None => (Vec::new(), body),
        };
        let mut chars = letter.chars();
        let c = chars.next()?;
        if chars.next().is_some() || !c.is_ascii_lowercase() {
            return None;
        }
        Some(FusionDescriptor {
            attached_locants: locs,
            letter: c,
        })
    }

    pub fn text(&self) -> String {
        if self.attached_locants.is_empty() {
            self.letter.to_string()
        } else {
            format!("{}-{}", self.attached_locants.join(","), self.letter)
        }
    }
}

/// Fuses `attached` onto the bond of `base` selected by the descriptor letter.
/// Junction map columns are (base, attached).
pub fn resolve_fusion(
    attached: &RingComponent,
    base: &RingComponent,
    descriptor: &FusionDescriptor,
) -> Result<(RingComponent, JunctionMap), TopologyError> {
    let nb = base.len();
    let idx = (descriptor.letter as u8 - b'a') as usize;
    if idx >= nb {
        return Err(TopologyError::InvalidFusionLetter(
            descriptor.letter.to_string(),
        ));
    }
    let (b1, b2) = (idx, (idx + 1) % nb);
    if !base.has_bond(b1, b2) || base.interior.contains(&norm(b1, b2)) {
        return Err(TopologyError::InvalidFusionLetter(
            descriptor.letter.to_string(),
        ));
    }
    let (p, q) = match descriptor.attached_locants.as_slice() {
        [] => (0, 1),
        [x, y] => (attached.locate(x)?, attached.locate(y)?),
        other => {
            return Err(TopologyError::UnsupportedTopology(format!(
                "{} attachment locants",
                other.len()
            )))
        }
    };
    if !attached.has_bond(p, q) || attached.interior.contains(&norm(p, q)) {
        return Err(TopologyError::IncompatibleEdge(format!(
            "{}-{} is not a peripheral bond of the attached component",
            attached.labels.labels[p], attached.labels.labels[q]
        )));
    }
    for (a, b) in [(p, b1), (q, b2)] {
        if attached.atoms[a].element != base.atoms[b].element {
            return Err(TopologyError::IncompatibleEdge(format!(
                "{} meets {}",
                attached.atoms[a].element.symbol(),
                base.atoms[b].element.symbol()
            )));
        }
    }
    // Combined index space: base atoms first, then unshared attached atoms.
    let mut map = vec![usize::MAX; attached.len()];
    map[p] = b1;
    map[q] = b2;
    let mut atoms = base.atoms.clone();
    let mut source: Vec<(Option<usize>, Option<usize>)> =
        (0..nb).map(|i| (Some(i), None)).collect();
    source[b1].1 = Some(p);
    source[b2].1 = Some(q);
    for i in 0..attached.len() {
        if map[i] == usize::MAX {
            map[i] = atoms.len();
            atoms.push(attached.atoms[i]);
            source.push((None, Some(i)));
        }
    }
    let mut bonds: BTreeSet<(usize, usize)> = base.bonds.iter().copied().collect();
    bonds.extend(attached.bonds.iter().map(|&(a, b)| norm(map[a], map[b])));
    let mut interior: BTreeSet<(usize, usize)> = base.interior.iter().copied().collect();
    interior.extend(attached.interior.iter().map(|&(a, b)| norm(map[a], map[b])));
    interior.insert(norm(b1, b2));
    let bonds: Vec<_> = bonds.into_iter().collect();
    let interior: Vec<_> = interior.into_iter().collect();

    let (order, labels) = peripheral_numbering(&atoms, &bonds, &interior)?;
    let mut inverse = vec![0; atoms.len()];
    for (new, &old) in order.iter().enumerate() {
        inverse[old] = new;
    }
    let atoms: Vec<RingAtom> = order.iter().map(|&o| atoms[o]).collect();
    let remap = |v: &[(usize, usize)]| -> Vec<(usize, usize)> {
        let mut out: Vec<_> = v
            .iter()
            .map(|&(a, b)| norm(inverse[a], inverse[b]))
            .collect();
        out.sort();
        out
    };
    let bonds = remap(&bonds);
    let interior = remap(&interior);
    let entries = order
        .iter()
        .map(|&o| {
            let (bs, at) = source[o];
            vec![
                bs.map(|i| base.labels.labels[i].clone()),
                at.map(|i| attached.labels.labels[i].clone()),
            ]
        })
        .collect();
    let heteroatoms = atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| a.element != Element::C)
        .map(|(i, a)| (a.element, labels[i].clone()))
        .collect();
    let value = write_in_order(&atoms, &bonds);
    Ok((
        RingComponent {
            atoms,
            bonds,
            value,
            labels: LabelScheme::new(labels),
            heteroatoms,
            interior,
        },
        JunctionMap { entries },
    ))
}

/// Notation that lists atoms in index order; consecutive atoms must be bonded.
pub fn write_in_order(atoms: &[RingAtom], bonds: &[(usize, usize)]) -> String {
    let mut out = String::new();
    let mut open: Vec<(usize, usize, u32)> = Vec::new();
    let mut free: Vec<u32> = (1..=99).rev().collect();
    for (i, a) in atoms.iter().enumerate() {
        let sym = a.element.symbol();
        if a.aromatic {
            out.push_str(&sym.to_ascii_lowercase());
        } else {
            out.push_str(sym);
        }
        // Close rings ending here, then open rings to later non-consecutive atoms.
        let mut k = 0;
        while k < open.len() {
            if open[k].1 == i {
                let d = open[k].2;
                push_ring_digit(&mut out, d);
                free.push(d);
                free.sort_by(|x, y| y.cmp(x));
                open.remove(k);
            } else {
                k += 1;
            }
        }
        for &(x, y) in bonds {
            if x == i && y > i + 1 {
                let d = free.pop().expect("ring digits available");
                push_ring_digit(&mut out, d);
                open.push((x, y, d));
            }
        }
    }
    out
}

fn push_ring_digit(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push_str(&format!("%{d}"));
    }
}

/// A bridge between two atoms of a parent ring system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeSpec {
    pub parent_labels: LabelScheme,
    /// Bridge atom labels listed from the first bridgehead to the second.
    pub bridge_labels: Vec<String>,
    pub bridge_locants: (String, String),
    /// Parent indices of the two bridgeheads.
    pub heads: (usize, usize),
    pub combined: LabelScheme,
}

impl BridgeSpec {
    /// `4a -- 11 -- 10 -- 9 -- 8a`.
    pub fn path(&self) -> Vec<String> {
        let mut v = vec![self.bridge_locants.0.clone()];
        v.extend(self.bridge_labels.iter().cloned());
        v.push(self.bridge_locants.1.clone());
        v
    }

    /// `-CCC-` style fragment notation.
    pub fn value(&self) -> String {
        format!("-{}-", "C".repeat(self.bridge_labels.len()))
    }
}

pub fn resolve_bridge(
    parent: &RingComponent,
    bridge_atoms: usize,
    locants: (&str, &str),
) -> Result<BridgeSpec, TopologyError> {
    if !(1..=3).contains(&bridge_atoms) {
        return Err(TopologyError::UnsupportedBridgeLength(bridge_atoms));
    }
    let h1 = parent
        .labels
        .position(locants.0)
        .ok_or_else(|| TopologyError::UnknownLocant(locants.0.to_string()))?;
    let h2 = parent
        .labels
        .position(locants.1)
        .ok_or_else(|| TopologyError::UnknownLocant(locants.1.to_string()))?;
    if h1 == h2 {
        return Err(TopologyError::UnknownLocant(format!(
            "{},{} bridges an atom to itself",
            locants.0, locants.1
        )));
    }
    let start = parent.labels.max_number() + 1;
    let first_is_higher = Locant::parse(locants.0) > Locant::parse(locants.1);
    // Numbering starts next to the higher-numbered bridgehead.
    let mut nums: Vec<u32> = (start..start + bridge_atoms as u32).collect();
    if !first_is_higher {
        nums.reverse();
    }
    let bridge_labels: Vec<String> = nums.iter().map(|n| n.to_string()).collect();
    let mut combined = parent.labels.labels.clone();
    let mut sorted = bridge_labels.clone();
    sorted.sort_by_key(|l| l.parse::<u32>().unwrap_or(0));
    combined.extend(sorted);
    Ok(BridgeSpec {
        parent_labels: parent.labels.clone(),
        bridge_labels,
        bridge_locants: (locants.0.to_string(), locants.1.to_string()),
        heads: (h1, h2),
        combined: LabelScheme::new(combined),
    })
}

/// Spiro union of ring systems; component `k` carries `k` primes (zero-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpiroSpec {
    pub schemes: Vec<LabelScheme>,
    pub spiro_locants: Vec<(String, String)>,
    /// `(component, atom index)` pairs that denote the same physical atom.
    pub junctions: Vec<((usize, usize), (usize, usize))>,
}

impl SpiroSpec {
    pub fn locant_text(&self, junction: usize) -> String {
        let (a, b) = &self.spiro_locants[junction];
        format!("{a},{b}")
    }
}

/// Components are schemes plus element lookups; junction `j` joins components `j` and `j + 1`.
pub fn resolve_spiro(
    components: &[RingComponent],
    spiro_locants: &[(String, String)],
) -> Result<SpiroSpec, TopologyError> {
    if components.len() < 2 || spiro_locants.len() != components.len() - 1 {
        return Err(TopologyError::UnsupportedTopology(format!(
            "{} spiro components with {} junctions",
            components.len(),
            spiro_locants.len()
        )));
    }
    let schemes: Vec<LabelScheme> = components
        .iter()
        .enumerate()
        .map(|(k, c)| c.labels.clone().with_primes(k as u32))
        .collect();
    let mut junctions = Vec::new();
    for (j, (x, y)) in spiro_locants.iter().enumerate() {
        let a = schemes[j]
            .position(x)
            .ok_or_else(|| TopologyError::UnknownLocant(x.clone()))?;
        let b = schemes[j + 1]
            .position(y)
            .ok_or_else(|| TopologyError::UnknownLocant(y.clone()))?;
        let (ea, eb) = (
            components[j].atoms[a].element,
            components[j + 1].atoms[b].element,
        );
        if ea != eb {
            return Err(TopologyError::SpiroAtomMismatch(format!(
                "{x} is {} but {y} is {}",
                ea.symbol(),
                eb.symbol()
            )));
        }
        junctions.push(((j, a), (j + 1, b)));
    }
    Ok(SpiroSpec {
        schemes,
        spiro_locants: spiro_locants.to_vec(),
        junctions,
    })
}

/// Replaces ring atoms at the given locants with heteroatoms.
pub fn apply_heteroatom_substitution(
    ring: &RingComponent,
    heteroatoms: &[(Element, String)],
) -> Result<RingComponent, TopologyError> {
    let mut out = ring.clone();
    for (el, loc) in heteroatoms {
        let i = ring
            .labels
            .position(loc)
            .ok_or_else(|| TopologyError::LocantOutOfRange(loc.clone()))?;
        if !matches!(el, Element::O | Element::N | Element::S) {
            return Err(TopologyError::ValenceViolation(format!(
                "{} is not a ring heteroatom",
                el.symbol()
            )));
        }
        let max = *el.valences().last().unwrap() as usize;
        if ring.degree(i) > max {
            return Err(TopologyError::ValenceViolation(format!(
                "{} at {loc} has {} ring bonds",
                el.symbol(),
                ring.degree(i)
            )));
        }
        out.atoms[i].element = *el;
        out.heteroatoms.retain(|(_, l)| l != loc);
        out.heteroatoms.push((*el, loc.clone()));
    }
    out.heteroatoms
        .sort_by_key(|(_, l)| ring.labels.position(l));
    out.value = write_in_order(&out.atoms, &out.bonds);
    Ok(out)
}

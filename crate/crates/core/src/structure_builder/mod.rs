//! Molecular graph assembly from a resolved metadata tree.

mod cip;
mod rings;

use thiserror::Error;

use crate::molgraph::{
    cyclic_bonds, maximum_matching, AtomId, BondConfig, BondOrder, BondStereo, Chirality,
    Element as Chem, MolecularGraph, StereoNeighbor, TetrahedralStereo,
};
use crate::parse_tree::{Element, MetadataTree, Tag};
use crate::tokenizer::{Grammar, TokenClass};

pub use cip::{compare_branches, ranked_neighbors};
use rings::{group_fragment, Fragment};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("valence violation: {0}")]
    ValenceViolation(String),
    #[error("substituent has nothing to attach to: {0}")]
    DanglingSubstituent(String),
    #[error("unresolved locant {0}")]
    UnresolvedLocant(String),
    #[error("bond not found: {0}")]
    BondNotFound(String),
    #[error("already saturated: {0}")]
    AlreadySaturated(String),
    #[error("not a stereocentre: {0}")]
    NotAStereocenter(String),
    #[error("not a double bond: {0}")]
    NotADoubleBond(String),
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
}

type Result<T> = std::result::Result<T, BuildError>;

/// Atoms contributed by one substituent or root, addressed by its labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scope {
    /// Child-index path of the part element from the tree root.
    pub path: Vec<usize>,
    pub labels: Vec<(String, AtomId)>,
    /// Atom and bond order by which the part joins its parent.
    pub attachment: Option<(AtomId, BondOrder)>,
}

impl Scope {
    pub fn atom(&self, label: &str) -> Option<AtomId> {
        self.labels
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, a)| *a)
    }

    pub fn label(&self, atom: AtomId) -> Option<&str> {
        self.labels
            .iter()
            .find(|(_, a)| *a == atom)
            .map(|(l, _)| l.as_str())
    }

    fn contains(&self, atom: AtomId) -> bool {
        self.labels.iter().any(|(_, a)| *a == atom)
    }
}

/// The graph under construction plus label bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct AssemblyState {
    pub graph: MolecularGraph,
    pub scopes: Vec<Scope>,
    /// Stereo descriptors with the scope they apply to, set once bonds are final.
    pub pending_stereo: Vec<(usize, Element)>,
    mancude: Vec<bool>,
    saturated: Vec<bool>,
}

impl AssemblyState {
    fn add_fragment(&mut self, f: Fragment) -> Vec<AtomId> {
        let ids: Vec<AtomId> = f
            .atoms
            .iter()
            .map(|a| {
                self.mancude.push(a.mancude);
                self.saturated.push(false);
                self.graph.add_atom(crate::molgraph::Atom::new(a.element))
            })
            .collect();
        for (a, b, o) in f.bonds {
            self.graph
                .add_bond(ids[a], ids[b], o)
                .expect("fragment bonds are distinct");
        }
        ids
    }

    fn spare(&self, a: AtomId) -> i16 {
        self.graph.atom(a).element.valences()[0] as i16 - self.graph.bond_order_sum(a) as i16
    }

    fn max_spare(&self, a: AtomId) -> i16 {
        *self.graph.atom(a).element.valences().last().unwrap() as i16
            - self.graph.bond_order_sum(a) as i16
    }

    /// Room for a new bond of `order`, keeping one unit for a pending ring double bond.
    fn has_room(&self, a: AtomId, order: u8) -> bool {
        let reserve = i16::from(self.mancude[a] && !self.saturated[a]);
        self.spare(a) >= order as i16 + reserve
    }

    fn locate(&self, scope: usize, locant: &str) -> Result<AtomId> {
        self.scopes[scope]
            .atom(locant)
            .ok_or_else(|| BuildError::UnresolvedLocant(locant.to_string()))
    }

    fn bond_atoms(&mut self, a: AtomId, b: AtomId, order: BondOrder) -> Result<()> {
        if self.graph.bond_between(a, b).is_some() || a == b {
            return Err(BuildError::ValenceViolation(format!(
                "atoms {a} and {b} are already joined"
            )));
        }
        for x in [a, b] {
            if self.max_spare(x) < order.valence() as i16 {
                return Err(BuildError::ValenceViolation(format!(
                    "{} atom {x} cannot take another bond",
                    self.graph.atom(x).element.symbol()
                )));
            }
        }
        self.graph
            .add_bond(a, b, order)
            .map_err(|e| BuildError::ValenceViolation(e.to_string()))?;
        Ok(())
    }

    /// Places the maximum number of non-cumulative double bonds on ring atoms not
    /// otherwise saturated. Atoms left over are chosen lowest label first.
    fn assign_mancude(&mut self) {
        let mut cand: Vec<AtomId> = (0..self.graph.atom_count())
            .filter(|&a| self.mancude[a] && !self.saturated[a] && self.spare(a) >= 1)
            .collect();
        let matching = |cand: &[AtomId], g: &MolecularGraph| {
            let pos = |a: AtomId| cand.iter().position(|&c| c == a);
            let edges: Vec<(usize, usize)> = g
                .bonds()
                .iter()
                .filter(|b| b.order == BondOrder::Single)
                .filter_map(|b| Some((pos(b.a)?, pos(b.b)?)))
                .collect();
            maximum_matching(cand.len(), &edges)
        };
        let size = |m: &[Option<usize>]| m.iter().filter(|x| x.is_some()).count() / 2;
        let mut m = matching(&cand, &self.graph);
        let best = size(&m);
        let mut i = 0;
        while cand.len() > 2 * best && i < cand.len() {
            let mut trial = cand.clone();
            trial.remove(i);
            let tm = matching(&trial, &self.graph);
            if size(&tm) == best {
                cand = trial;
                m = tm;
            } else {
                i += 1;
            }
        }
        for (x, mate) in m.iter().enumerate() {
            if let Some(y) = *mate {
                if x < y {
                    let e = self
                        .graph
                        .bond_between(cand[x], cand[y])
                        .expect("matched atoms are bonded");
                    self.graph.set_bond_order(e, BondOrder::Double);
                }
            }
        }
    }
}

fn suffix_payload(value: &str) -> Option<std::sync::Arc<crate::tokenizer::GrammarEntry>> {
    let g = Grammar::builtin();
    g.lookup(value, TokenClass::PrincipalSuffix)
        .or_else(|| g.lookup(value, TokenClass::InlineSuffix))
        .cloned()
}

fn order_of(n: u8) -> BondOrder {
    match n {
        2 => BondOrder::Double,
        3 => BondOrder::Triple,
        _ => BondOrder::Single,
    }
}

/// Raises bonds for unsaturators and saturates atoms named by hydro prefixes.
pub fn apply_unsaturation_and_hydro(
    state: &mut AssemblyState,
    scope: usize,
    descriptors: &[&Element],
) -> Result<()> {
    for d in descriptors {
        match d.tag {
            Tag::Unsaturator => {
                let order: u8 = d.attr("value").and_then(|v| v.parse().ok()).unwrap_or(2);
                let loc = d.attr("locant").unwrap_or("1");
                let s = &state.scopes[scope];
                let pos = s
                    .labels
                    .iter()
                    .position(|(l, _)| l == loc)
                    .ok_or_else(|| BuildError::UnresolvedLocant(loc.into()))?;
                let a = s.labels[pos].1;
                let next = s
                    .labels
                    .get(pos + 1)
                    .map(|x| x.1)
                    .filter(|&b| state.graph.bond_between(a, b).is_some());
                let b = next
                    .or_else(|| {
                        let first = s.labels.first()?.1;
                        state.graph.bond_between(a, first).map(|_| first)
                    })
                    .ok_or_else(|| {
                        BuildError::BondNotFound(format!("no bond after locant {loc}"))
                    })?;
                let e = state.graph.bond_between(a, b).expect("checked");
                if state.graph.bond(e).order != BondOrder::Single {
                    return Err(BuildError::BondNotFound(format!(
                        "bond at {loc} is already unsaturated"
                    )));
                }
                for x in [a, b] {
                    if state.max_spare(x) < (order - 1) as i16 {
                        return Err(BuildError::ValenceViolation(format!(
                            "unsaturation at {loc}"
                        )));
                    }
                }
                state.graph.set_bond_order(e, order_of(order));
            }
            Tag::Hydro => {
                let loc = d
                    .attr("locant")
                    .ok_or_else(|| BuildError::UnresolvedLocant("hydro without locant".into()))?;
                let a = state.locate(scope, loc)?;
                if !state.mancude[a] || state.saturated[a] {
                    return Err(BuildError::AlreadySaturated(loc.to_string()));
                }
                state.saturated[a] = true;
            }
            _ => {}
        }
    }
    Ok(())
}

/// Applies a principal suffix (adds atoms) or an inline suffix (sets the attachment point).
pub fn apply_suffix(
    state: &mut AssemblyState,
    scope: usize,
    suffix: &Element,
    nth: usize,
) -> Result<()> {
    let value = suffix.attr("value").unwrap_or_default();
    let entry = suffix_payload(value)
        .ok_or_else(|| BuildError::UnsupportedGroup(format!("suffix {value}")))?;
    let labels = state.scopes[scope].labels.clone();
    let locant = suffix.attr("locant");
    if suffix.attr("type") == Some("inline") {
        let order = entry.get("order").and_then(|o| o.parse().ok()).unwrap_or(1);
        let a = match locant {
            Some(l) => state.locate(scope, l)?,
            None => {
                labels
                    .first()
                    .ok_or_else(|| BuildError::DanglingSubstituent(value.into()))?
                    .1
            }
        };
        if state.scopes[scope].attachment.is_none() {
            state.scopes[scope].attachment = Some((a, order_of(order)));
        }
        return Ok(());
    }
    let adds: Vec<(u8, &str)> = entry
        .get("adds")
        .unwrap_or("")
        .split(',')
        .filter_map(|x| x.split_once(':'))
        .map(|(o, f)| (o.parse().unwrap_or(1), f))
        .collect();
    let need: u8 = adds.iter().map(|(o, _)| *o).sum();
    let a = match locant {
        Some(l) => state.locate(scope, l)?,
        None if entry.get("terminal") == Some("1") => {
            let pick = if nth == 0 {
                labels.first()
            } else {
                labels.last()
            };
            pick.ok_or_else(|| BuildError::UnresolvedLocant(value.into()))?
                .1
        }
        None => labels
            .iter()
            .map(|(_, a)| *a)
            .find(|&a| state.has_room(a, need))
            .ok_or_else(|| BuildError::ValenceViolation(format!("no atom can carry {value}")))?,
    };
    for (order, frag) in adds {
        let f = Fragment::from_notation(frag)?;
        let ids = state.add_fragment(f);
        state.bond_atoms(a, ids[0], order_of(order))?;
    }
    Ok(())
}

fn is_stereocenter(g: &MolecularGraph, a: AtomId) -> Option<Vec<StereoNeighbor>> {
    let atom = g.atom(a);
    if atom.element != Chem::C
        || g.neighbors(a)
            .iter()
            .any(|&(_, e)| g.bond(e).order != BondOrder::Single)
    {
        return None;
    }
    if g.degree(a) + g.hydrogen_count(a) as usize != 4 || g.degree(a) < 3 {
        return None;
    }
    ranked_neighbors(g, a, None)
}

/// Reference atoms for a stereogenic double bond, one per end.
fn double_bond_refs(g: &MolecularGraph, e: usize, cyclic: &[bool]) -> Option<(AtomId, AtomId)> {
    let b = g.bond(e);
    if b.order != BondOrder::Double || cyclic[e] {
        return None;
    }
    let mut refs = [0; 2];
    for (k, (x, y)) in [(b.a, b.b), (b.b, b.a)].into_iter().enumerate() {
        if !matches!(g.atom(x).element, Chem::C | Chem::N) {
            return None;
        }
        let ranked = ranked_neighbors(g, x, Some(y))?;
        match ranked.first()? {
            StereoNeighbor::Atom(r) => refs[k] = *r,
            StereoNeighbor::ImplicitH => return None,
        }
    }
    Some((refs[0], refs[1]))
}

/// Records R/S or E/Z for a descriptor that belongs to `scope`.
pub fn apply_stereo(state: &mut AssemblyState, scope: usize, descriptor: &Element) -> Result<()> {
    let value = descriptor.attr("value").unwrap_or_default();
    let locant = descriptor.attr("locant");
    let what = descriptor.text.clone().unwrap_or_else(|| value.to_string());
    let g = &state.graph;
    match descriptor.attr("type") {
        Some("RorS") => {
            let centre = match locant {
                Some(l) => state.locate(scope, l)?,
                None => {
                    let found: Vec<AtomId> = state.scopes[scope]
                        .labels
                        .iter()
                        .map(|(_, a)| *a)
                        .filter(|&a| is_stereocenter(g, a).is_some())
                        .collect();
                    match found[..] {
                        [a] => a,
                        _ => return Err(BuildError::NotAStereocenter(what)),
                    }
                }
            };
            let ranked = is_stereocenter(g, centre).ok_or(BuildError::NotAStereocenter(what))?;
            let neighbors = vec![ranked[3], ranked[0], ranked[1], ranked[2]];
            let chirality = if value == "R" {
                Chirality::Anticlockwise
            } else {
                Chirality::Clockwise
            };
            state.graph.atom_stereo.insert(
                centre,
                TetrahedralStereo {
                    neighbors,
                    chirality,
                },
            );
        }
        Some("EorZ") => {
            let cyclic = cyclic_bonds(g);
            let s = &state.scopes[scope];
            let e = match locant {
                Some(l) => {
                    let a = state.locate(scope, l)?;
                    let pos = s.labels.iter().position(|(x, _)| x == l).unwrap_or(0);
                    let next = s
                        .labels
                        .get(pos + 1)
                        .and_then(|(_, b)| g.bond_between(a, *b));
                    next.filter(|&e| g.bond(e).order == BondOrder::Double)
                        .or_else(|| {
                            g.neighbors(a)
                                .iter()
                                .find(|&&(b, e)| {
                                    g.bond(e).order == BondOrder::Double && s.contains(b)
                                })
                                .map(|&(_, e)| e)
                        })
                        .ok_or(BuildError::NotADoubleBond(what.clone()))?
                }
                None => {
                    let found: Vec<usize> = (0..g.bond_count())
                        .filter(|&e| s.contains(g.bond(e).a) && s.contains(g.bond(e).b))
                        .filter(|&e| double_bond_refs(g, e, &cyclic).is_some())
                        .collect();
                    match found[..] {
                        [e] => e,
                        _ => return Err(BuildError::NotADoubleBond(what)),
                    }
                }
            };
            let (ref_a, ref_b) =
                double_bond_refs(g, e, &cyclic).ok_or(BuildError::NotADoubleBond(what))?;
            let config = if value == "E" {
                BondConfig::Trans
            } else {
                BondConfig::Cis
            };
            state.graph.bond_stereo.insert(
                e,
                BondStereo {
                    ref_a,
                    ref_b,
                    config,
                },
            );
        }
        _ => {
            return Err(BuildError::UnsupportedGroup(format!(
                "stereo type {:?}",
                descriptor.attr("type")
            )))
        }
    }
    Ok(())
}

struct Assembler {
    state: AssemblyState,
}

impl Assembler {
    /// Builds the parts of a word or bracket; returns the scope of its last part.
    fn level(&mut self, container: &Element, path: &[usize]) -> Result<usize> {
        let parts: Vec<usize> = container
            .children
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c.tag, Tag::Substituent | Tag::Bracket | Tag::Root))
            .map(|(i, _)| i)
            .collect();
        let (&last, others) = parts
            .split_last()
            .ok_or_else(|| BuildError::DanglingSubstituent(format!("empty <{}>", container.tag)))?;
        let child_path = |i: usize| {
            let mut p = path.to_vec();
            p.push(i);
            p
        };
        let terminal = self.part(&container.children[last], &child_path(last))?;
        for &i in others {
            let part = &container.children[i];
            let s = self.part(part, &child_path(i))?;
            self.attach(terminal, s, part.attr("locant"))?;
        }
        for c in container.children_with(Tag::StereoChemistry) {
            self.state.pending_stereo.push((terminal, c.clone()));
        }
        Ok(terminal)
    }

    fn part(&mut self, part: &Element, path: &[usize]) -> Result<usize> {
        if part.tag == Tag::Bracket {
            return self.level(part, path);
        }
        let group = part.first_child(Tag::Group).ok_or_else(|| {
            BuildError::UnsupportedGroup(format!("<{}> without a group", part.tag))
        })?;
        let frag = group_fragment(group)?;
        let labels = frag.labels.clone();
        let simple = group.attr("type") == Some("substituent");
        let ids = self.state.add_fragment(frag);
        let attachment = if simple {
            let order = if group.attr("value").is_some_and(|v| v.starts_with('=')) {
                BondOrder::Double
            } else {
                BondOrder::Single
            };
            Some((ids[0], order))
        } else {
            None
        };
        let scope = self.state.scopes.len();
        self.state.scopes.push(Scope {
            path: path.to_vec(),
            labels: labels.into_iter().map(|(l, a)| (l, ids[a])).collect(),
            attachment,
        });
        let mut descriptors: Vec<&Element> = group.children_with(Tag::Unsaturator).collect();
        descriptors.extend(part.children_with(Tag::Hydro));
        descriptors.extend(group.walk().into_iter().filter(|e| e.tag == Tag::Hydro));
        apply_unsaturation_and_hydro(&mut self.state, scope, &descriptors)?;
        for (n, s) in part.children_with(Tag::Suffix).enumerate() {
            apply_suffix(&mut self.state, scope, s, n)?;
        }
        for s in part
            .children_with(Tag::StereoChemistry)
            .chain(group.children_with(Tag::StereoChemistry))
        {
            self.state.pending_stereo.push((scope, s.clone()));
        }
        if part.tag == Tag::Substituent && self.state.scopes[scope].attachment.is_none() {
            return Err(BuildError::DanglingSubstituent(format!(
                "{:?} has no attachment point",
                group.attr("value")
            )));
        }
        Ok(scope)
    }

    fn attach(&mut self, parent: usize, child: usize, locant: Option<&str>) -> Result<()> {
        let (atom, order) = self.state.scopes[child].attachment.ok_or_else(|| {
            BuildError::DanglingSubstituent("substituent without attachment point".into())
        })?;
        let target = match locant {
            Some(l) => self.state.locate(parent, l)?,
            None => {
                let st = &self.state;
                st.scopes[parent]
                    .labels
                    .iter()
                    .map(|(_, a)| *a)
                    .find(|&a| st.has_room(a, order.valence()))
                    .ok_or_else(|| {
                        BuildError::DanglingSubstituent("no free position on the parent".into())
                    })?
            }
        };
        self.state.bond_atoms(target, atom, order)
    }
}

/// Assembles all atoms and bonds; stereo descriptors are collected but not yet applied.
pub fn assemble(tree: &MetadataTree) -> Result<AssemblyState> {
    let mut path = Vec::new();
    let mut word = &tree.root;
    while word.tag != Tag::Word {
        let i = word
            .children
            .iter()
            .position(|c| matches!(c.tag, Tag::WordRule | Tag::Word))
            .ok_or_else(|| BuildError::DanglingSubstituent("tree has no word".into()))?;
        path.push(i);
        word = &word.children[i];
    }
    if word
        .children
        .iter()
        .rev()
        .find(|c| matches!(c.tag, Tag::Substituent | Tag::Bracket | Tag::Root))
        .map(|c| c.tag)
        != Some(Tag::Root)
    {
        return Err(BuildError::DanglingSubstituent(
            "name has no parent structure".into(),
        ));
    }
    let mut asm = Assembler {
        state: AssemblyState::default(),
    };
    asm.level(word, &path)?;
    asm.state.assign_mancude();
    asm.state
        .graph
        .check_valence()
        .map_err(|e| BuildError::ValenceViolation(e.to_string()))?;
    Ok(asm.state)
}

pub fn build_structure(tree: &MetadataTree) -> Result<MolecularGraph> {
    let mut state = assemble(tree)?;
    for (scope, d) in std::mem::take(&mut state.pending_stereo) {
        apply_stereo(&mut state, scope, &d)?;
    }
    Ok(state.graph)
}

/// Labels and stereogenic features of one scope, used to decide where descriptors belong.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeInfo {
    pub path: Vec<usize>,
    pub labels: Vec<String>,
    /// Lower label of each stereogenic double bond inside the scope.
    pub double_bonds: Vec<String>,
    pub stereocenters: Vec<String>,
}

pub fn scope_index(tree: &MetadataTree) -> Result<Vec<ScopeInfo>> {
    let state = assemble(tree)?;
    let g = &state.graph;
    let cyclic = cyclic_bonds(g);
    Ok(state
        .scopes
        .iter()
        .map(|s| {
            let mut double_bonds = Vec::new();
            for e in 0..g.bond_count() {
                let b = g.bond(e);
                if s.contains(b.a) && s.contains(b.b) && double_bond_refs(g, e, &cyclic).is_some() {
                    let pa = s.labels.iter().position(|(_, a)| *a == b.a).unwrap();
                    let pb = s.labels.iter().position(|(_, a)| *a == b.b).unwrap();
                    double_bonds.push(s.labels[pa.min(pb)].0.clone());
                }
            }
            let stereocenters = s
                .labels
                .iter()
                .filter(|(_, a)| is_stereocenter(g, *a).is_some())
                .map(|(l, _)| l.clone())
                .collect();
            ScopeInfo {
                path: s.path.clone(),
                labels: s.labels.iter().map(|(l, _)| l.clone()).collect(),
                double_bonds,
                stereocenters,
            }
        })
        .collect())
}

//! Linear notation (SMILES subset) reader and writer.

use std::collections::BTreeMap;

use super::aromatic::perceive_aromaticity;
use super::kekule::kekulize;
use super::{
    permutation_is_odd, Atom, AtomId, BondConfig, BondOrder, BondStereo, Chirality, Element,
    MolError, MolecularGraph, StereoNeighbor, TetrahedralStereo,
};

/// Parses a single-component notation into a kekulized, hydrogen-suppressed graph.
pub fn parse_linear(notation: &str) -> Result<MolecularGraph, MolError> {
    let g = parse_linear_multi(notation)?;
    let n = g.components().len();
    if n > 1 {
        return Err(MolError::MultiComponent(n));
    }
    Ok(g)
}

/// Like [`parse_linear`] but accepts dot-separated components.
pub fn parse_linear_multi(notation: &str) -> Result<MolecularGraph, MolError> {
    let mut g = parse_raw(notation)?;
    kekulize(&mut g, true)?;
    let g = g.suppress_hydrogens();
    g.check_valence()?;
    Ok(g)
}

/// Parses notation without kekulization: aromatic atoms and bonds keep their flags.
pub fn parse_raw(notation: &str) -> Result<MolecularGraph, MolError> {
    Parser::new(notation).run()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Mark {
    Up,
    Down,
}

struct PendingRing {
    atom: AtomId,
    order: Option<BondOrder>,
    mark: Option<Mark>,
    slot: usize,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    g: MolecularGraph,
    rings: BTreeMap<u32, PendingRing>,
    /// Per-atom neighbour order as written, with ring-closure slots filled in later.
    order: Vec<Vec<Option<StereoNeighbor>>>,
    chiral: BTreeMap<AtomId, Chirality>,
    /// Directional marks: bond id -> (atom written before the mark, mark).
    marks: BTreeMap<usize, (AtomId, Mark)>,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Parser<'a> {
        Parser {
            s: s.as_bytes(),
            pos: 0,
            g: MolecularGraph::new(),
            rings: BTreeMap::new(),
            order: Vec::new(),
            chiral: BTreeMap::new(),
            marks: BTreeMap::new(),
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, MolError> {
        Err(MolError::SyntaxError {
            position: self.pos,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn run(mut self) -> Result<MolecularGraph, MolError> {
        if self.s.is_empty() {
            return self.err("empty notation");
        }
        let mut prev: Option<AtomId> = None;
        let mut stack: Vec<Option<AtomId>> = Vec::new();
        let mut bond: Option<BondOrder> = None;
        let mut mark: Option<Mark> = None;
        let mut dot = false;
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() {
                        return self.err("branch without atom");
                    }
                    stack.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    if bond.is_some() || mark.is_some() {
                        return self.err("dangling bond");
                    }
                    prev = match stack.pop() {
                        Some(p) => p,
                        None => return self.err("unbalanced ')'"),
                    };
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if bond.is_some() || mark.is_some() {
                        return self.err("consecutive bond symbols");
                    }
                    match c {
                        b'-' => bond = Some(BondOrder::Single),
                        b'=' => bond = Some(BondOrder::Double),
                        b'#' => bond = Some(BondOrder::Triple),
                        b':' => bond = Some(BondOrder::Aromatic),
                        b'/' => mark = Some(Mark::Up),
                        _ => mark = Some(Mark::Down),
                    }
                    self.pos += 1;
                }
                b'.' => {
                    if bond.is_some() || mark.is_some() || prev.is_none() {
                        return self.err("misplaced '.'");
                    }
                    dot = true;
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return self.err("ring bond without atom");
                    };
                    let num = self.ring_number()?;
                    self.ring_bond(p, num, bond.take(), mark.take())?;
                }
                _ => {
                    let (atom, chirality, hcount) = self.atom()?;
                    let id = self.g.add_atom(atom);
                    self.order.push(Vec::new());
                    if let Some(ch) = chirality {
                        self.chiral.insert(id, ch);
                    }
                    if let Some(p) = prev {
                        self.connect(p, id, bond.take(), mark.take())?;
                        self.order[id].push(Some(StereoNeighbor::Atom(p)));
                        self.order[p].push(Some(StereoNeighbor::Atom(id)));
                    } else if bond.is_some() || mark.is_some() {
                        return self.err("bond without preceding atom");
                    }
                    if hcount == 1 {
                        self.order[id].push(Some(StereoNeighbor::ImplicitH));
                    }
                    prev = Some(id);
                    dot = false;
                }
            }
        }
        if !stack.is_empty() {
            return self.err("unbalanced '('");
        }
        if bond.is_some() || mark.is_some() || dot {
            return self.err("notation ends with a bond");
        }
        if let Some((&n, _)) = self.rings.iter().next() {
            return Err(MolError::UnclosedRing(n));
        }
        self.finish_stereo();
        Ok(self.g)
    }

    fn ring_number(&mut self) -> Result<u32, MolError> {
        let c = self.peek().unwrap();
        if c == b'%' {
            let digits = self.s.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(((d[0] - b'0') * 10 + (d[1] - b'0')) as u32)
                }
                _ => self.err("bad '%' ring number"),
            }
        } else {
            self.pos += 1;
            Ok((c - b'0') as u32)
        }
    }

    fn ring_bond(
        &mut self,
        atom: AtomId,
        num: u32,
        order: Option<BondOrder>,
        mark: Option<Mark>,
    ) -> Result<(), MolError> {
        if let Some(open) = self.rings.remove(&num) {
            if open.atom == atom {
                return self.err("ring bond to itself");
            }
            let order = match (open.order, order) {
                (Some(a), Some(b)) if a != b => return self.err("conflicting ring bond orders"),
                (a, b) => a.or(b),
            };
            let bond = self.connect(open.atom, atom, order, None)?;
            if let Some(m) = open.mark {
                self.marks.insert(bond, (open.atom, m));
            } else if let Some(m) = mark {
                self.marks.insert(bond, (atom, m));
            }
            self.order[open.atom][open.slot] = Some(StereoNeighbor::Atom(atom));
            self.order[atom].push(Some(StereoNeighbor::Atom(open.atom)));
        } else {
            let slot = self.order[atom].len();
            self.order[atom].push(None);
            self.rings.insert(
                num,
                PendingRing {
                    atom,
                    order,
                    mark,
                    slot,
                },
            );
        }
        Ok(())
    }

    fn connect(
        &mut self,
        a: AtomId,
        b: AtomId,
        order: Option<BondOrder>,
        mark: Option<Mark>,
    ) -> Result<usize, MolError> {
        let order = order.unwrap_or_else(|| {
            if self.g.atom(a).aromatic && self.g.atom(b).aromatic {
                BondOrder::Aromatic
            } else {
                BondOrder::Single
            }
        });
        let id = match self.g.add_bond(a, b, order) {
            Ok(id) => id,
            Err(_) => return self.err("duplicate bond"),
        };
        if let Some(m) = mark {
            self.marks.insert(id, (a, m));
        }
        Ok(id)
    }

    fn atom(&mut self) -> Result<(Atom, Option<Chirality>, u8), MolError> {
        let c = self.peek().unwrap();
        if c == b'[' {
            return self.bracket_atom();
        }
        let two = self.s.get(self.pos..self.pos + 2);
        let (sym, aromatic, len) = match (c, two) {
            (b'C', Some(b"Cl")) => ("Cl", false, 2),
            (b'B', Some(b"Br")) => ("Br", false, 2),
            (b'B', _) => ("B", false, 1),
            (b'C', _) => ("C", false, 1),
            (b'N', _) => ("N", false, 1),
            (b'O', _) => ("O", false, 1),
            (b'P', _) => ("P", false, 1),
            (b'S', _) => ("S", false, 1),
            (b'F', _) => ("F", false, 1),
            (b'I', _) => ("I", false, 1),
            (b'b', _) => ("B", true, 1),
            (b'c', _) => ("C", true, 1),
            (b'n', _) => ("N", true, 1),
            (b'o', _) => ("O", true, 1),
            (b'p', _) => ("P", true, 1),
            (b's', _) => ("S", true, 1),
            _ => return self.err(format!("unexpected character '{}'", c as char)),
        };
        self.pos += len;
        let mut atom = Atom::new(Element::from_symbol(sym).unwrap());
        atom.aromatic = aromatic;
        Ok((atom, None, 0))
    }

    fn bracket_atom(&mut self) -> Result<(Atom, Option<Chirality>, u8), MolError> {
        let start = self.pos;
        let end = match self.s[start..].iter().position(|&c| c == b']') {
            Some(e) => start + e,
            None => return self.err("unclosed '['"),
        };
        let body = &self.s[start + 1..end];
        let mut i = 0;
        if body.first().is_some_and(u8::is_ascii_digit) {
            return self.err("isotopes are not supported");
        }
        let (element, aromatic) = {
            let rest = &body[i..];
            let mut found = None;
            for (sym, arom) in [
                ("Cl", false),
                ("Br", false),
                ("Si", false),
                ("Se", false),
                ("se", true),
                ("B", false),
                ("C", false),
                ("N", false),
                ("O", false),
                ("F", false),
                ("P", false),
                ("S", false),
                ("I", false),
                ("H", false),
                ("b", true),
                ("c", true),
                ("n", true),
                ("o", true),
                ("p", true),
                ("s", true),
            ] {
                if rest.starts_with(sym.as_bytes()) {
                    let el = Element::from_symbol(
                        &sym[..1]
                            .to_uppercase()
                            .chars()
                            .chain(sym[1..].chars())
                            .collect::<String>(),
                    );
                    found = Some((el.unwrap(), arom, sym.len()));
                    break;
                }
            }
            match found {
                Some((el, arom, len)) => {
                    i += len;
                    (el, arom)
                }
                None => return self.err("unknown element in bracket atom"),
            }
        };
        let mut chirality = None;
        if body.get(i) == Some(&b'@') {
            if body.get(i + 1) == Some(&b'@') {
                chirality = Some(Chirality::Clockwise);
                i += 2;
            } else {
                chirality = Some(Chirality::Anticlockwise);
                i += 1;
            }
        }
        let mut h = 0u8;
        if body.get(i) == Some(&b'H') {
            i += 1;
            h = 1;
            if let Some(d) = body.get(i).filter(|d| d.is_ascii_digit()) {
                h = d - b'0';
                i += 1;
            }
        }
        let mut charge: i8 = 0;
        if let Some(&sign) = body.get(i).filter(|c| **c == b'+' || **c == b'-') {
            i += 1;
            let unit: i8 = if sign == b'+' { 1 } else { -1 };
            charge = unit;
            if let Some(d) = body.get(i).filter(|d| d.is_ascii_digit()) {
                charge = unit * (d - b'0') as i8;
                i += 1;
            } else {
                while body.get(i) == Some(&sign) {
                    charge += unit;
                    i += 1;
                }
            }
        }
        if i != body.len() {
            self.pos = start + 1 + i;
            return self.err("unsupported bracket atom content");
        }
        self.pos = end + 1;
        let atom = Atom {
            element,
            charge,
            aromatic,
            explicit_h: Some(h),
        };
        Ok((atom, chirality, h))
    }

    fn finish_stereo(&mut self) {
        for (&atom, &chirality) in &self.chiral {
            let neighbors: Vec<StereoNeighbor> =
                self.order[atom].iter().flatten().copied().collect();
            if neighbors.len() == 4 {
                self.g.atom_stereo.insert(
                    atom,
                    TetrahedralStereo {
                        neighbors,
                        chirality,
                    },
                );
            }
        }
        for e in 0..self.g.bond_count() {
            let bond = self.g.bond(e).clone();
            if bond.order != BondOrder::Double {
                continue;
            }
            let side = |end: AtomId, other: AtomId| -> Option<(AtomId, bool)> {
                for &(x, xe) in self.g.neighbors(end) {
                    if x == other {
                        continue;
                    }
                    if let Some(&(first, m)) = self.marks.get(&xe) {
                        // `true` when x sits above `end`.
                        let above = if first == end {
                            m == Mark::Up
                        } else {
                            m == Mark::Down
                        };
                        return Some((x, above));
                    }
                }
                None
            };
            if let (Some((x, xa)), Some((y, ya))) = (side(bond.a, bond.b), side(bond.b, bond.a)) {
                let config = if xa == ya {
                    BondConfig::Cis
                } else {
                    BondConfig::Trans
                };
                self.g.bond_stereo.insert(
                    e,
                    BondStereo {
                        ref_a: x,
                        ref_b: y,
                        config,
                    },
                );
            }
        }
    }
}

/// Writes a graph using atom indices as the traversal priority.
pub fn emit_linear(g: &MolecularGraph) -> Result<String, MolError> {
    let mut g = g.clone();
    if !g.is_kekulized() {
        kekulize(&mut g, true)?;
    }
    let arom = perceive_aromaticity(&g);
    let rank: Vec<usize> = (0..g.atom_count()).collect();
    Ok(write_smiles(&g, &rank, &arom).0)
}

/// Writes notation for a kekulized graph, traversing by ascending `rank`.
/// Returns the text and the atom visit order.
pub(crate) fn write_smiles(
    g: &MolecularGraph,
    rank: &[usize],
    arom: &super::aromatic::Aromaticity,
) -> (String, Vec<AtomId>) {
    let n = g.atom_count();
    let sorted_nbrs: Vec<Vec<(AtomId, usize)>> = (0..n)
        .map(|a| {
            let mut v = g.neighbors(a).to_vec();
            v.sort_by_key(|&(x, _)| rank[x]);
            v
        })
        .collect();
    // DFS to classify edges.
    let mut visit = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<(AtomId, usize)>> = vec![Vec::new(); n];
    let mut tree_edge = vec![false; g.bond_count()];
    let mut starts: Vec<AtomId> = (0..n).collect();
    starts.sort_by_key(|&a| rank[a]);
    let mut roots = Vec::new();
    for &s in &starts {
        if visit[s] != usize::MAX {
            continue;
        }
        roots.push(s);
        let mut stack = vec![(s, 0usize)];
        visit[s] = order.len();
        order.push(s);
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if *i < sorted_nbrs[u].len() {
                let (v, e) = sorted_nbrs[u][*i];
                *i += 1;
                if visit[v] == usize::MAX {
                    visit[v] = order.len();
                    order.push(v);
                    parent[v] = u;
                    tree_edge[e] = true;
                    children[u].push((v, e));
                    stack.push((v, 0));
                }
            } else {
                stack.pop();
            }
        }
    }
    // Ring closures per atom in written order: closings (partner earlier), then openings.
    let mut closures: Vec<Vec<(AtomId, usize)>> = vec![Vec::new(); n];
    for u in 0..n {
        let mut closing = Vec::new();
        let mut opening = Vec::new();
        for &(v, e) in &sorted_nbrs[u] {
            if tree_edge[e] {
                continue;
            }
            if visit[v] < visit[u] {
                closing.push((v, e));
            } else {
                opening.push((v, e));
            }
        }
        closing.sort_by_key(|&(v, _)| visit[v]);
        closures[u] = closing;
        closures[u].extend(opening);
    }
    // Neighbour order as written, used for chirality.
    let written_order = |u: AtomId| -> Vec<StereoNeighbor> {
        let mut out = Vec::new();
        if parent[u] != usize::MAX {
            out.push(StereoNeighbor::Atom(parent[u]));
        }
        if g.hydrogen_count(u) == 1 {
            out.push(StereoNeighbor::ImplicitH);
        }
        for &(v, _) in &closures[u] {
            out.push(StereoNeighbor::Atom(v));
        }
        for &(v, _) in &children[u] {
            out.push(StereoNeighbor::Atom(v));
        }
        out
    };
    let marks = assign_marks(g, &visit, &parent, &children, &tree_edge);
    let mut out = String::new();
    let mut digit_of: BTreeMap<usize, u32> = BTreeMap::new();
    let mut free: Vec<bool> = vec![true; 100];
    for (ri, &root) in roots.iter().enumerate() {
        if ri > 0 {
            out.push('.');
        }
        let mut stack: Vec<Frame> = vec![Frame::Atom(root)];
        while let Some(frame) = stack.pop() {
            match frame {
                Frame::Close => out.push(')'),
                Frame::Open => out.push('('),
                Frame::Bond(e, from) => out.push_str(&bond_symbol(g, e, from, arom, &marks)),
                Frame::Atom(u) => {
                    let chir = g.atom_stereo.get(&u).and_then(|st| {
                        let w = written_order(u);
                        if w.len() != 4 || !st.neighbors.iter().all(|n| w.contains(n)) {
                            return None;
                        }
                        Some(if permutation_is_odd(&st.neighbors, &w) {
                            st.chirality.flipped()
                        } else {
                            st.chirality
                        })
                    });
                    out.push_str(&atom_token(g, u, arom, chir));
                    for &(v, e) in &closures[u] {
                        if visit[v] < visit[u] {
                            let d = digit_of.remove(&e).expect("opened");
                            free[d as usize] = true;
                            push_digit(&mut out, d);
                        } else {
                            let d = (1..100)
                                .find(|&d| free[d as usize])
                                .expect("ring digits exhausted")
                                as u32;
                            free[d as usize] = false;
                            digit_of.insert(e, d);
                            out.push_str(&bond_symbol(g, e, u, arom, &marks));
                            push_digit(&mut out, d);
                        }
                    }
                    let kids = &children[u];
                    for (k, &(v, e)) in kids.iter().enumerate().rev() {
                        let last = k + 1 == kids.len();
                        if !last {
                            stack.push(Frame::Close);
                        }
                        stack.push(Frame::Atom(v));
                        stack.push(Frame::Bond(e, u));
                        if !last {
                            stack.push(Frame::Open);
                        }
                    }
                }
            }
        }
    }
    (out, order)
}

enum Frame {
    Atom(AtomId),
    Bond(usize, AtomId),
    Open,
    Close,
}

fn push_digit(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push_str(&format!("%{d:02}"));
    }
}

fn bond_symbol(
    g: &MolecularGraph,
    e: usize,
    from: AtomId,
    arom: &super::aromatic::Aromaticity,
    marks: &BTreeMap<usize, Mark>,
) -> String {
    let bond = g.bond(e);
    if arom.bonds[e] {
        return String::new();
    }
    match bond.order {
        BondOrder::Double => "=".into(),
        BondOrder::Triple => "#".into(),
        BondOrder::Aromatic => String::new(),
        BondOrder::Single => {
            if let Some(&m) = marks.get(&e) {
                return if m == Mark::Up {
                    "/".into()
                } else {
                    "\\".into()
                };
            }
            let other = bond.other(from);
            if arom.atoms[from] && arom.atoms[other] {
                "-".into()
            } else {
                String::new()
            }
        }
    }
}

/// Chooses '/' and '\' for tree edges so that every stored double-bond configuration is written.
/// A mark on tree edge parent->child means: Up = child above parent.
fn assign_marks(
    g: &MolecularGraph,
    visit: &[usize],
    parent: &[usize],
    children: &[Vec<(AtomId, usize)>],
    tree_edge: &[bool],
) -> BTreeMap<usize, Mark> {
    let mut marks: BTreeMap<usize, Mark> = BTreeMap::new();
    let mut dbs: Vec<usize> = g.bond_stereo.keys().copied().collect();
    dbs.sort_by_key(|&e| {
        let b = g.bond(e);
        visit[b.a].min(visit[b.b])
    });
    for e in dbs {
        let st = &g.bond_stereo[&e];
        let b = g.bond(e);
        if b.order != BondOrder::Double {
            continue;
        }
        let (d1, d2) = if visit[b.a] < visit[b.b] {
            (b.a, b.b)
        } else {
            (b.b, b.a)
        };
        // Candidate reference neighbours connected by tree edges.
        let pick = |d: AtomId, other: AtomId| -> Option<(AtomId, usize)> {
            let mut cands: Vec<(AtomId, usize)> = Vec::new();
            if parent[d] != usize::MAX && parent[d] != other {
                let pe = g.bond_between(d, parent[d]).unwrap();
                cands.push((parent[d], pe));
            }
            for &(c, ce) in &children[d] {
                if c != other {
                    cands.push((c, ce));
                }
            }
            let cands: Vec<_> = cands
                .into_iter()
                .filter(|&(_, ce)| tree_edge[ce] && g.bond(ce).order == BondOrder::Single)
                .collect();
            cands
                .iter()
                .copied()
                .find(|&(_, ce)| marks.contains_key(&ce))
                .or(cands.first().copied())
        };
        let (Some((x, xe)), Some((y, ye))) = (pick(d1, d2), pick(d2, d1)) else {
            continue;
        };
        let (ref1, ref2) = if st.ref_a != d2 && g.bond_between(st.ref_a, d1).is_some() {
            (st.ref_a, st.ref_b)
        } else {
            (st.ref_b, st.ref_a)
        };
        let mut config = st.config;
        if x != ref1 {
            config = config.flipped();
        }
        if y != ref2 {
            config = config.flipped();
        }
        // Position of a neighbour relative to the double-bond atom, from a mark on a tree edge.
        let above = |nb: AtomId, d: AtomId, m: Mark| -> bool {
            if parent[d] == nb {
                // edge nb -> d: Up means d above nb, so nb below d
                m == Mark::Down
            } else {
                m == Mark::Up
            }
        };
        let mark_for = |nb: AtomId, d: AtomId, want_above: bool| -> Mark {
            if parent[d] == nb {
                if want_above {
                    Mark::Down
                } else {
                    Mark::Up
                }
            } else if want_above {
                Mark::Up
            } else {
                Mark::Down
            }
        };
        let x_above = match (marks.get(&xe), marks.get(&ye)) {
            (Some(&m), _) => above(x, d1, m),
            (None, Some(&m)) => {
                let y_above = above(y, d2, m);
                if config == BondConfig::Cis {
                    y_above
                } else {
                    !y_above
                }
            }
            (None, None) => false,
        };
        let y_above = if config == BondConfig::Cis {
            x_above
        } else {
            !x_above
        };
        marks.entry(xe).or_insert(mark_for(x, d1, x_above));
        marks.entry(ye).or_insert(mark_for(y, d2, y_above));
    }
    marks
}

fn atom_token(
    g: &MolecularGraph,
    u: AtomId,
    arom: &super::aromatic::Aromaticity,
    chirality: Option<Chirality>,
) -> String {
    let atom = g.atom(u);
    let aromatic = arom.atoms[u];
    let h = g.hydrogen_count(u);
    let sym = atom.element.symbol();
    let sym = if aromatic {
        sym.to_lowercase()
    } else {
        sym.to_string()
    };
    let bare_ok = atom.charge == 0 && chirality.is_none() && atom.element.organic_subset() && {
        // Hydrogens the reader would derive for a bare atom.
        let used: u8 = g
            .neighbors(u)
            .iter()
            .map(|&(_, e)| {
                if arom.bonds[e] {
                    1
                } else {
                    g.bond(e).order.valence()
                }
            })
            .sum();
        if aromatic {
            let has_pi = g
                .neighbors(u)
                .iter()
                .any(|&(_, e)| arom.bonds[e] && g.bond(e).order == BondOrder::Double);
            let v0 = atom.element.valences()[0];
            let reader_pi = v0 > used;
            reader_pi == has_pi && implicit_h(atom.element, used + has_pi as u8) == h
        } else {
            implicit_h(atom.element, used) == h
        }
    };
    if bare_ok {
        return sym;
    }
    let mut s = String::from("[");
    s.push_str(&sym);
    match chirality {
        Some(Chirality::Anticlockwise) => s.push('@'),
        Some(Chirality::Clockwise) => s.push_str("@@"),
        None => {}
    }
    if h == 1 {
        s.push('H');
    } else if h > 1 {
        s.push_str(&format!("H{h}"));
    }
    match atom.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    s.push(']');
    s
}

fn implicit_h(element: Element, used: u8) -> u8 {
    element
        .valences()
        .iter()
        .find(|&&v| v >= used)
        .map(|&v| v - used)
        .unwrap_or(0)
}

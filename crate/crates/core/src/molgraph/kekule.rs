//! Assignment of localized double bonds to aromatic (or mancude) atom sets.

use petgraph::algo::maximum_matching as petgraph_matching;
use petgraph::graph::{NodeIndex, UnGraph};

use super::{BondOrder, MolError, MolecularGraph};

pub type MatchingEdge = (usize, usize);

/// Maximum cardinality matching on `n` vertices; returns each vertex's mate.
pub fn maximum_matching(n: usize, edges: &[MatchingEdge]) -> Vec<Option<usize>> {
    let mut graph: UnGraph<(), ()> = UnGraph::with_capacity(n, edges.len());
    for _ in 0..n {
        graph.add_node(());
    }
    for &(a, b) in edges {
        graph.add_edge(NodeIndex::new(a), NodeIndex::new(b), ());
    }
    let m = petgraph_matching(&graph);
    (0..n)
        .map(|i| m.mate(NodeIndex::new(i)).map(|x| x.index()))
        .collect()
}

/// Valence an aromatic atom has left for a pi bond, counting aromatic bonds as single.
pub(crate) fn spare_valence(g: &MolecularGraph, a: usize) -> i16 {
    let atom = g.atom(a);
    let used = g.bond_order_sum(a) as i16 + atom.explicit_h.unwrap_or(0) as i16;
    let base = atom.element.valences()[0] as i16;
    let shift = match atom.element {
        super::Element::N | super::Element::P | super::Element::O | super::Element::S => {
            atom.charge as i16
        }
        _ => -(atom.charge.abs() as i16),
    };
    base + shift - used
}

/// Replaces aromatic flags with alternating single/double bonds.
pub(crate) fn kekulize(g: &mut MolecularGraph, strict: bool) -> Result<(), MolError> {
    if g.is_kekulized() {
        return Ok(());
    }
    let n = g.atom_count();
    let needs: Vec<bool> = (0..n)
        .map(|a| g.atom(a).aromatic && spare_valence(g, a) >= 1)
        .collect();
    let edges: Vec<(usize, usize)> = g
        .bonds()
        .iter()
        .filter(|b| b.order == BondOrder::Aromatic && needs[b.a] && needs[b.b])
        .map(|b| (b.a, b.b))
        .collect();
    let mates = maximum_matching(n, &edges);
    let unmatched: Vec<usize> = (0..n).filter(|&a| needs[a] && mates[a].is_none()).collect();
    if strict && !unmatched.is_empty() {
        return Err(MolError::KekulizationFailure(format!(
            "no alternating bond assignment covers atoms {unmatched:?}"
        )));
    }
    for e in 0..g.bond_count() {
        let b = g.bond(e).clone();
        if b.order != BondOrder::Aromatic {
            continue;
        }
        let order = if mates[b.a] == Some(b.b) {
            BondOrder::Double
        } else {
            BondOrder::Single
        };
        g.set_bond_order(e, order);
    }
    for a in 0..n {
        g.atom_mut(a).aromatic = false;
    }
    Ok(())
}

//! Aromaticity perception on kekulized graphs by ring electron counting.

use super::rings::cyclic_bonds;
use super::{BondOrder, Element, MolecularGraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aromaticity {
    pub atoms: Vec<bool>,
    pub bonds: Vec<bool>,
}

const MAX_RING: usize = 7;

/// Small rings (up to seven atoms) as atom lists in traversal order.
pub(crate) fn small_cycles(g: &MolecularGraph, cyclic: &[bool]) -> Vec<Vec<usize>> {
    let n = g.atom_count();
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; n];
    for s in 0..n {
        path.clear();
        path.push(s);
        on_path[s] = true;
        extend(g, cyclic, s, &mut path, &mut on_path, &mut out);
        on_path[s] = false;
    }
    out
}

fn extend(
    g: &MolecularGraph,
    cyclic: &[bool],
    s: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let u = *path.last().unwrap();
    for &(v, e) in g.neighbors(u) {
        if !cyclic[e] {
            continue;
        }
        if v == s && path.len() >= 3 && path[1] < u {
            out.push(path.clone());
            continue;
        }
        if v <= s || on_path[v] || path.len() >= MAX_RING {
            continue;
        }
        on_path[v] = true;
        path.push(v);
        extend(g, cyclic, s, path, on_path, out);
        path.pop();
        on_path[v] = false;
    }
}

/// Pi electrons an atom donates to a ring, or `None` when it cannot be part of one.
fn contribution(g: &MolecularGraph, a: usize, cyclic: &[bool]) -> Option<u8> {
    let atom = g.atom(a);
    let mut doubles = 0;
    let mut endocyclic = false;
    for &(_, e) in g.neighbors(a) {
        match g.bond(e).order {
            BondOrder::Double => {
                doubles += 1;
                endocyclic = cyclic[e];
            }
            BondOrder::Triple => return None,
            _ => {}
        }
    }
    if doubles > 1 {
        return None;
    }
    if doubles == 1 {
        // Hypervalent atoms would read back as having no pi bond to spare.
        let ordinary = super::kekule::spare_valence(g, a) >= 0;
        return if endocyclic && ordinary && atom.element.can_be_aromatic() {
            Some(1)
        } else {
            None
        };
    }
    let sigma = g.degree(a) + g.hydrogen_count(a) as usize;
    match (atom.element, atom.charge, sigma) {
        (Element::N, 0, 3) | (Element::P, 0, 3) => Some(2),
        (Element::O, 0, 2) | (Element::S, 0, 2) | (Element::Se, 0, 2) => Some(2),
        (Element::C, -1, 3) => Some(2),
        (Element::B, 0, 3) | (Element::C, 1, 3) => Some(0),
        _ => None,
    }
}

pub fn perceive_aromaticity(g: &MolecularGraph) -> Aromaticity {
    let cyclic = cyclic_bonds(g);
    let mut atoms = vec![false; g.atom_count()];
    let mut bonds = vec![false; g.bond_count()];
    let contrib: Vec<Option<u8>> = (0..g.atom_count())
        .map(|a| contribution(g, a, &cyclic))
        .collect();
    let cycles: Vec<Vec<usize>> = small_cycles(g, &cyclic)
        .into_iter()
        .filter(|c| c.iter().all(|&a| contrib[a].is_some()))
        .collect();
    let electrons = |set: &mut dyn Iterator<Item = usize>| -> u32 {
        set.map(|a| contrib[a].unwrap() as u32).sum()
    };
    // Aromatic units: single rings or pairs of rings sharing one bond.
    let mut units: Vec<Vec<&Vec<usize>>> = Vec::new();
    for c in &cycles {
        if electrons(&mut c.iter().copied()) % 4 == 2 {
            units.push(vec![c]);
        }
    }
    for i in 0..cycles.len() {
        for j in i + 1..cycles.len() {
            let (a, b) = (&cycles[i], &cycles[j]);
            let shared: Vec<usize> = a.iter().copied().filter(|x| b.contains(x)).collect();
            if shared.len() != 2 || g.bond_between(shared[0], shared[1]).is_none() {
                continue;
            }
            let total = electrons(
                &mut a
                    .iter()
                    .chain(b.iter())
                    .copied()
                    .filter(|x| !shared.contains(x)),
            ) + electrons(&mut shared.iter().copied());
            if total % 4 == 2 {
                units.push(vec![a, b]);
            }
        }
    }
    // Drop units whose atoms put their double bond outside the aromatic set.
    loop {
        atoms.iter_mut().for_each(|x| *x = false);
        bonds.iter_mut().for_each(|x| *x = false);
        for unit in &units {
            for cycle in unit {
                for i in 0..cycle.len() {
                    let (x, y) = (cycle[i], cycle[(i + 1) % cycle.len()]);
                    atoms[x] = true;
                    bonds[g.bond_between(x, y).unwrap()] = true;
                }
            }
        }
        let bad: Vec<usize> = (0..g.atom_count())
            .filter(|&a| {
                atoms[a]
                    && g.neighbors(a)
                        .iter()
                        .any(|&(_, e)| g.bond(e).order == BondOrder::Double && !bonds[e])
            })
            .collect();
        if bad.is_empty() {
            break;
        }
        units.retain(|u| !u.iter().any(|c| c.iter().any(|a| bad.contains(a))));
    }
    Aromaticity { atoms, bonds }
}

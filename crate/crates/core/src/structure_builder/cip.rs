//! CIP priorities from atomic numbers, explored sphere by sphere over the
//! hierarchical digraph (duplicate atoms for multiple bonds and ring closures).

use std::cmp::Ordering;

use crate::molgraph::{AtomId, BondOrder, MolecularGraph, StereoNeighbor};

const MAX_SPHERES: usize = 24;
const SIBLING_DEPTH: usize = 3;

#[derive(Clone)]
struct Node {
    atom: Option<AtomId>,
    z: u8,
    /// Real atoms on the path from the centre, this node included.
    path: Vec<AtomId>,
    /// Duplicates and hydrogens have no real substituents.
    terminal: bool,
}

struct Digraph<'g> {
    g: &'g MolecularGraph,
}

impl<'g> Digraph<'g> {
    fn root(&self, center: AtomId, n: StereoNeighbor) -> Node {
        match n {
            StereoNeighbor::ImplicitH => Node {
                atom: None,
                z: 1,
                path: vec![center],
                terminal: true,
            },
            StereoNeighbor::Atom(a) => Node {
                atom: Some(a),
                z: self.g.atom(a).element.atomic_number(),
                path: vec![center, a],
                terminal: false,
            },
        }
    }

    fn children(&self, node: &Node) -> Vec<Node> {
        let mut out = self.expand(node);
        self.sort(&mut out);
        out
    }

    fn signature(&self, node: &Node, depth: usize) -> Vec<u8> {
        let mut sig = vec![node.z];
        if depth == 0 {
            return sig;
        }
        let mut kids: Vec<Vec<u8>> = self
            .expand(node)
            .iter()
            .map(|c| self.signature(c, depth - 1))
            .collect();
        kids.sort_by(|x, y| y.cmp(x));
        for k in kids {
            sig.extend(k);
        }
        sig
    }

    fn expand(&self, node: &Node) -> Vec<Node> {
        let Some(a) = node.atom else {
            return Vec::new();
        };
        if node.terminal {
            return Vec::new();
        }
        let g = self.g;
        let parent = node.path[node.path.len() - 2];
        let mut out = Vec::new();
        for &(b, e) in g.neighbors(a) {
            let extra = match g.bond(e).order {
                BondOrder::Double => 1,
                BondOrder::Triple => 2,
                _ => 0,
            };
            let z = g.atom(b).element.atomic_number();
            let dup = Node {
                atom: Some(b),
                z,
                path: node.path.clone(),
                terminal: true,
            };
            if b != parent {
                if node.path.contains(&b) {
                    out.push(dup.clone());
                } else {
                    let mut path = node.path.clone();
                    path.push(b);
                    out.push(Node {
                        atom: Some(b),
                        z,
                        path,
                        terminal: false,
                    });
                }
            }
            for _ in 0..extra {
                out.push(dup.clone());
            }
        }
        for _ in 0..g.hydrogen_count(a) {
            out.push(Node {
                atom: None,
                z: 1,
                path: node.path.clone(),
                terminal: true,
            });
        }
        out
    }

    /// Higher atomic number first; ties broken by a shallow look ahead.
    fn sort(&self, nodes: &mut [Node]) {
        let keys: Vec<Vec<u8>> = nodes
            .iter()
            .map(|n| self.signature(n, SIBLING_DEPTH))
            .collect();
        let mut idx: Vec<usize> = (0..nodes.len()).collect();
        idx.sort_by(|&x, &y| keys[y].cmp(&keys[x]));
        let sorted: Vec<Node> = idx.iter().map(|&i| nodes[i].clone()).collect();
        nodes.clone_from_slice(&sorted);
    }
}

fn compare_sets(x: &[u8], y: &[u8]) -> Ordering {
    for i in 0..x.len().max(y.len()) {
        let a = x.get(i).copied().unwrap_or(0);
        let b = y.get(i).copied().unwrap_or(0);
        match a.cmp(&b) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

/// Compares two substituents of `center`; `Greater` means `x` has priority.
pub fn compare_branches(
    g: &MolecularGraph,
    center: AtomId,
    x: StereoNeighbor,
    y: StereoNeighbor,
) -> Ordering {
    let dg = Digraph { g };
    let mut lx = vec![dg.root(center, x)];
    let mut ly = vec![dg.root(center, y)];
    match lx[0].z.cmp(&ly[0].z) {
        Ordering::Equal => {}
        o => return o,
    }
    for _ in 0..MAX_SPHERES {
        let kx: Vec<Vec<Node>> = lx.iter().map(|n| dg.children(n)).collect();
        let ky: Vec<Vec<Node>> = ly.iter().map(|n| dg.children(n)).collect();
        for i in 0..kx.len().max(ky.len()) {
            let sx: Vec<u8> = kx
                .get(i)
                .map(|v| v.iter().map(|n| n.z).collect())
                .unwrap_or_default();
            let sy: Vec<u8> = ky
                .get(i)
                .map(|v| v.iter().map(|n| n.z).collect())
                .unwrap_or_default();
            match compare_sets(&sx, &sy) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        lx = kx.into_iter().flatten().collect();
        ly = ky.into_iter().flatten().collect();
        if lx.is_empty() && ly.is_empty() {
            break;
        }
    }
    Ordering::Equal
}

/// Substituents of `center` (other than `exclude`) in descending priority.
/// Returns `None` when two of them tie.
pub fn ranked_neighbors(
    g: &MolecularGraph,
    center: AtomId,
    exclude: Option<AtomId>,
) -> Option<Vec<StereoNeighbor>> {
    let mut ns: Vec<StereoNeighbor> = g
        .neighbors(center)
        .iter()
        .filter(|(b, _)| Some(*b) != exclude)
        .map(|&(b, _)| StereoNeighbor::Atom(b))
        .collect();
    for _ in 0..g.hydrogen_count(center) {
        ns.push(StereoNeighbor::ImplicitH);
    }
    ns.sort_by(|&x, &y| compare_branches(g, center, y, x));
    for w in ns.windows(2) {
        if compare_branches(g, center, w[0], w[1]) == Ordering::Equal {
            return None;
        }
    }
    Some(ns)
}

//! Ring perception: cyclic bonds, minimum cycle basis, ring systems and their junction types.

use serde::{Deserialize, Serialize};

use super::MolecularGraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSystem {
    pub atoms: Vec<usize>,
    pub ring_count: usize,
    /// Contains a polycyclic block (two or more rings sharing bonds).
    pub fused: bool,
    pub has_spiro_internal: bool,
    pub has_bridge_internal: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSystemSummary {
    pub ring_systems: Vec<RingSystem>,
    pub isolated_ring_count: usize,
}

/// Marks bonds that lie on at least one cycle.
pub fn cyclic_bonds(g: &MolecularGraph) -> Vec<bool> {
    let blocks = biconnected_blocks(g);
    let mut cyclic = vec![false; g.bond_count()];
    for b in blocks {
        if b.len() > 1 {
            for e in b {
                cyclic[e] = true;
            }
        }
    }
    cyclic
}

/// Partitions bonds into biconnected blocks (Hopcroft-Tarjan).
pub(crate) fn biconnected_blocks(g: &MolecularGraph) -> Vec<Vec<usize>> {
    let n = g.atom_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut blocks = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        // (vertex, parent edge, next neighbour index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (u, pe, ref mut i)) = stack.last_mut() {
            if *i < g.neighbors(u).len() {
                let (v, e) = g.neighbors(u)[*i];
                *i += 1;
                if e == pe {
                    continue;
                }
                if disc[v] == usize::MAX {
                    edge_stack.push(e);
                    disc[v] = time;
                    low[v] = time;
                    time += 1;
                    stack.push((v, e, 0));
                } else if disc[v] < disc[u] {
                    edge_stack.push(e);
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        let mut block = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            block.push(e);
                            if e == pe {
                                break;
                            }
                        }
                        block.sort_unstable();
                        blocks.push(block);
                    }
                }
            }
        }
    }
    blocks
}

/// Minimum cycle basis (smallest set of smallest rings) via Horton's candidate set.
/// Each ring is returned as atoms in cyclic order.
pub fn minimum_cycle_basis(g: &MolecularGraph) -> Vec<Vec<usize>> {
    let n = g.atom_count();
    let cyclic = cyclic_bonds(g);
    let m = g.bond_count();
    let cyclic_count = cyclic.iter().filter(|&&c| c).count();
    if cyclic_count == 0 {
        return Vec::new();
    }
    // Cyclomatic number of the cyclic-bond subgraph.
    let target = {
        let mut comp_atoms = vec![false; n];
        for (e, b) in g.bonds().iter().enumerate() {
            if cyclic[e] {
                comp_atoms[b.a] = true;
                comp_atoms[b.b] = true;
            }
        }
        let v = comp_atoms.iter().filter(|&&x| x).count();
        let components = ring_system_atoms(g, &cyclic).len();
        cyclic_count + components - v
    };
    let mut candidates: Vec<(usize, Vec<usize>)> = Vec::new();
    for v in 0..n {
        if !g.neighbors(v).iter().any(|&(_, e)| cyclic[e]) {
            continue;
        }
        let (dist, pred) = bfs(g, v, &cyclic);
        for (e, b) in g.bonds().iter().enumerate() {
            if !cyclic[e] {
                continue;
            }
            let (x, y) = (b.a, b.b);
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            let px = path_to(&pred, v, x);
            let py = path_to(&pred, v, y);
            // Paths must meet only at v.
            if px.iter().skip(1).any(|a| py.contains(a)) {
                continue;
            }
            if pred[x] == y || pred[y] == x {
                continue;
            }
            let mut cycle: Vec<usize> = px.clone();
            cycle.extend(py.iter().rev().take(py.len() - 1));
            if cycle.len() >= 3 {
                candidates.push((cycle.len(), cycle));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let words = m.div_ceil(64);
    let mut basis_rows: Vec<Vec<u64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for (_, cycle) in candidates {
        if out.len() == target {
            break;
        }
        let mut row = vec![0u64; words];
        for i in 0..cycle.len() {
            let e = g
                .bond_between(cycle[i], cycle[(i + 1) % cycle.len()])
                .unwrap();
            row[e / 64] |= 1 << (e % 64);
        }
        for (r, &p) in basis_rows.iter().zip(&pivots) {
            if row[p / 64] >> (p % 64) & 1 == 1 {
                for (w, x) in row.iter_mut().zip(r) {
                    *w ^= x;
                }
            }
        }
        if let Some(p) = (0..m).find(|&p| row[p / 64] >> (p % 64) & 1 == 1) {
            basis_rows.push(row);
            pivots.push(p);
            out.push(cycle);
        }
    }
    out
}

fn bfs(g: &MolecularGraph, s: usize, cyclic: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let n = g.atom_count();
    let mut dist = vec![usize::MAX; n];
    let mut pred = vec![usize::MAX; n];
    dist[s] = 0;
    let mut queue = std::collections::VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &(v, e) in g.neighbors(u) {
            if cyclic[e] && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                pred[v] = u;
                queue.push_back(v);
            }
        }
    }
    (dist, pred)
}

fn path_to(pred: &[usize], s: usize, t: usize) -> Vec<usize> {
    let mut p = vec![t];
    let mut cur = t;
    while cur != s {
        cur = pred[cur];
        p.push(cur);
    }
    p.reverse();
    p
}

/// Atom sets of the connected components formed by cyclic bonds.
fn ring_system_atoms(g: &MolecularGraph, cyclic: &[bool]) -> Vec<Vec<usize>> {
    let n = g.atom_count();
    let mut comp = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX || !g.neighbors(s).iter().any(|&(_, e)| cyclic[e]) {
            continue;
        }
        let id = out.len();
        let mut atoms = vec![s];
        comp[s] = id;
        let mut i = 0;
        while i < atoms.len() {
            let u = atoms[i];
            i += 1;
            for &(v, e) in g.neighbors(u) {
                if cyclic[e] && comp[v] == usize::MAX {
                    comp[v] = id;
                    atoms.push(v);
                }
            }
        }
        atoms.sort_unstable();
        out.push(atoms);
    }
    out
}

/// Groups rings into systems and classifies how their rings are joined.
pub fn perceive_ring_systems(g: &MolecularGraph) -> RingSystemSummary {
    let cyclic = cyclic_bonds(g);
    let systems = ring_system_atoms(g, &cyclic);
    let blocks: Vec<Vec<usize>> = biconnected_blocks(g)
        .into_iter()
        .filter(|b| b.len() > 1)
        .collect();
    let basis = minimum_cycle_basis(g);
    let mut out = RingSystemSummary::default();
    for atoms in systems {
        let mut ring_count = 0;
        let mut block_count = 0;
        let mut fused = false;
        let mut bridged = false;
        for block in &blocks {
            let b0 = g.bond(block[0]);
            if atoms.binary_search(&b0.a).is_err() {
                continue;
            }
            block_count += 1;
            let mut verts: Vec<usize> = block
                .iter()
                .flat_map(|&e| [g.bond(e).a, g.bond(e).b])
                .collect();
            verts.sort_unstable();
            verts.dedup();
            let r = block.len() + 1 - verts.len();
            ring_count += r;
            if r >= 2 {
                fused = true;
                let rings: Vec<&Vec<usize>> = basis
                    .iter()
                    .filter(|c| {
                        let e = g.bond_between(c[0], c[1]).unwrap();
                        block.binary_search(&e).is_ok()
                    })
                    .collect();
                if !outerplanar_block(g, block, &verts, &rings) {
                    bridged = true;
                }
            }
        }
        if ring_count == 1 {
            out.isolated_ring_count += 1;
        }
        out.ring_systems.push(RingSystem {
            atoms,
            ring_count,
            fused,
            has_spiro_internal: block_count > 1,
            has_bridge_internal: bridged,
        });
    }
    out
}

/// A 2-connected block is outerplanar when its rings tile it with one perimeter cycle
/// through every atom and the remaining bonds are non-crossing chords.
fn outerplanar_block(
    g: &MolecularGraph,
    block: &[usize],
    verts: &[usize],
    rings: &[&Vec<usize>],
) -> bool {
    let mut incidence = std::collections::BTreeMap::new();
    for ring in rings {
        for i in 0..ring.len() {
            let e = g.bond_between(ring[i], ring[(i + 1) % ring.len()]).unwrap();
            *incidence.entry(e).or_insert(0usize) += 1;
        }
    }
    let mut perimeter = Vec::new();
    let mut chords = Vec::new();
    for &e in block {
        match incidence.get(&e).copied().unwrap_or(0) {
            1 => perimeter.push(e),
            2 => chords.push(e),
            _ => return false,
        }
    }
    if perimeter.len() != verts.len() {
        return false;
    }
    // Walk the perimeter; every vertex must have exactly two perimeter bonds.
    let mut adj: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for &e in &perimeter {
        let b = g.bond(e);
        adj.entry(b.a).or_default().push(b.b);
        adj.entry(b.b).or_default().push(b.a);
    }
    if adj.len() != verts.len() || adj.values().any(|v| v.len() != 2) {
        return false;
    }
    let mut pos = std::collections::BTreeMap::new();
    let (mut prev, mut cur) = (usize::MAX, verts[0]);
    for i in 0..verts.len() {
        if pos.insert(cur, i).is_some() {
            return false;
        }
        let next = adj[&cur]
            .iter()
            .copied()
            .find(|&x| x != prev)
            .unwrap_or(adj[&cur][0]);
        prev = cur;
        cur = next;
    }
    if cur != verts[0] {
        return false;
    }
    let spans: Vec<(usize, usize)> = chords
        .iter()
        .map(|&e| {
            let b = g.bond(e);
            let (x, y) = (pos[&b.a], pos[&b.b]);
            (x.min(y), x.max(y))
        })
        .collect();
    for i in 0..spans.len() {
        for j in i + 1..spans.len() {
            let ((a, b), (c, d)) = (spans[i], spans[j]);
            if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                return false;
            }
        }
    }
    true
}

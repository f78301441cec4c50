#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use forge_core::molgraph::{
    canonical_form, minimum_cycle_basis, perceive_ring_systems, Atom, BondOrder, Element,
    MolecularGraph,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{FIXTURES}/{name}")).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Tab-separated rows, skipping `#` comments and blank lines.
pub fn tsv(name: &str) -> Vec<Vec<String>> {
    fixture(name)
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect()
}

fn max_valence(e: Element) -> u8 {
    e.valences().iter().copied().max().unwrap_or(1)
}

/// A connected, valence-respecting graph of up to `max_atoms` heavy atoms with
/// random ring closures and occasional double or triple bonds.
pub fn random_molecule(rng: &mut impl Rng, max_atoms: usize) -> MolecularGraph {
    const POOL: [Element; 10] = [
        Element::C,
        Element::C,
        Element::C,
        Element::C,
        Element::C,
        Element::N,
        Element::N,
        Element::O,
        Element::S,
        Element::Cl,
    ];
    let n = rng.gen_range(1..=max_atoms);
    let mut g = MolecularGraph::new();
    let mut used = vec![0u8; n];
    let mut cap = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = *POOL.choose(rng).unwrap();
        if i > 0 && max_valence(e) == 1 && rng.gen_bool(0.5) {
            e = Element::C;
        }
        g.add_atom(Atom::new(e));
        cap.push(max_valence(e));
    }
    for i in 1..n {
        let open: Vec<usize> = (0..i).filter(|&j| used[j] < cap[j]).collect();
        let Some(&j) = open.choose(rng) else {
            force_bond(&mut g, &mut used, &mut cap, i, i - 1);
            continue;
        };
        g.add_bond(i, j, BondOrder::Single).unwrap();
        used[i] += 1;
        used[j] += 1;
    }
    let closures = rng.gen_range(0..=n / 4 + 1);
    for _ in 0..closures {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && g.bond_between(a, b).is_none() && used[a] < cap[a] && used[b] < cap[b] {
            g.add_bond(a, b, BondOrder::Single).unwrap();
            used[a] += 1;
            used[b] += 1;
        }
    }
    for e in 0..g.bond_count() {
        let (a, b) = (g.bond(e).a, g.bond(e).b);
        let spare = (cap[a] - used[a]).min(cap[b] - used[b]);
        if spare >= 1 && rng.gen_bool(0.2) {
            let extra = if spare >= 2 && rng.gen_bool(0.2) {
                2
            } else {
                1
            };
            g.set_bond_order(
                e,
                if extra == 2 {
                    BondOrder::Triple
                } else {
                    BondOrder::Double
                },
            );
            used[a] += extra;
            used[b] += extra;
        }
    }
    g
}

/// Attaches `i` to `j` after turning `j` into carbon if it has no room left.
fn force_bond(g: &mut MolecularGraph, used: &mut [u8], cap: &mut [u8], i: usize, j: usize) {
    if used[j] >= cap[j] {
        g.atom_mut(j).element = Element::C;
        cap[j] = 4;
    }
    g.add_bond(i, j, BondOrder::Single).unwrap();
    used[i] += 1;
    used[j] += 1;
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Carbon skeleton with the given edges.
pub fn skeleton(n: usize, edges: &[(usize, usize)]) -> MolecularGraph {
    let mut g = MolecularGraph::new();
    for _ in 0..n {
        g.add_atom(Atom::new(Element::C));
    }
    for &(a, b) in edges {
        g.add_bond(a, b, BondOrder::Single).unwrap();
    }
    g
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Every connected simple graph with at most `max_n` vertices and maximum degree 4,
/// one per isomorphism class. Classes are grown one vertex at a time and
/// deduplicated by canonical form.
pub fn all_connected_skeletons(max_n: usize) -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut layer: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    let mut out = vec![(1, Vec::new())];
    for n in 2..=max_n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for edges in &layer {
            let mut deg = vec![0u8; n];
            for &(a, b) in edges {
                deg[a] += 1;
                deg[b] += 1;
            }
            let free: Vec<usize> = (0..n - 1).filter(|&v| deg[v] < 4).collect();
            for mask in 0u32..(1 << free.len()) {
                if mask.count_ones() > 4 {
                    continue;
                }
                let mut e = edges.clone();
                for (k, &v) in free.iter().enumerate() {
                    if mask & (1 << k) != 0 {
                        e.push((v, n - 1));
                    }
                }
                let key = canonical_form(&skeleton(n, &e)).unwrap();
                if seen.insert(key) {
                    next.push(e);
                }
            }
        }
        out.extend(
            next.iter()
                .filter(|e| connected(n, e))
                .map(|e| (n, e.clone())),
        );
        layer = next;
    }
    out
}

/// Random connected graph on `n` vertices with maximum degree 4.
pub fn random_skeleton(rng: &mut impl Rng, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut deg = vec![0u8; n];
    let mut edges = Vec::new();
    for i in 1..n {
        let open: Vec<usize> = (0..i).filter(|&j| deg[j] < 4).collect();
        let j = *open.choose(rng).unwrap();
        edges.push((j, i));
        deg[i] += 1;
        deg[j] += 1;
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b
            && deg[a] < 4
            && deg[b] < 4
            && !edges.contains(&(a, b))
            && !edges.contains(&(b, a))
        {
            edges.push((a, b));
            deg[a] += 1;
            deg[b] += 1;
        }
    }
    edges
}

/// All simple cycles as bond bitmasks, found by exhaustive path search.
pub fn all_cycles(g: &MolecularGraph) -> Vec<u64> {
    assert!(g.bond_count() <= 64);
    let n = g.atom_count();
    let mut found = BTreeSet::new();
    fn dfs(
        g: &MolecularGraph,
        start: usize,
        v: usize,
        on: &mut Vec<bool>,
        mask: u64,
        len: usize,
        found: &mut BTreeSet<u64>,
    ) {
        for &(w, e) in g.neighbors(v) {
            if w == start && len >= 2 && mask & (1 << e) == 0 {
                found.insert(mask | (1 << e));
            } else if w > start && !on[w] {
                on[w] = true;
                dfs(g, start, w, on, mask | (1 << e), len + 1, found);
                on[w] = false;
            }
        }
    }
    for s in 0..n {
        let mut on = vec![false; n];
        on[s] = true;
        dfs(g, s, s, &mut on, 0, 0, &mut found);
    }
    found.into_iter().collect()
}

/// GF(2) rank of a set of bond masks.
pub fn rank(masks: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &m in masks {
        if reduce(&basis, m) != 0 {
            basis.push(reduce(&basis, m));
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

fn reduce(basis: &[u64], mut m: u64) -> u64 {
    for &b in basis {
        let top = 63 - b.leading_zeros();
        if m & (1 << top) != 0 {
            m ^= b;
        }
    }
    m
}

fn mask_atoms(g: &MolecularGraph, m: u64) -> BTreeSet<usize> {
    let mut s = BTreeSet::new();
    for e in 0..g.bond_count() {
        if m & (1 << e) != 0 {
            s.insert(g.bond(e).a);
            s.insert(g.bond(e).b);
        }
    }
    s
}

fn ring_mask(g: &MolecularGraph, ring: &[usize]) -> Option<u64> {
    let mut m = 0u64;
    for i in 0..ring.len() {
        m |= 1 << g.bond_between(ring[i], ring[(i + 1) % ring.len()])?;
    }
    Some(m)
}

/// A 2-connected block is outerplanar iff some Hamiltonian cycle leaves only
/// non-crossing chords.
fn block_outerplanar(g: &MolecularGraph, block: u64, cycles: &[u64]) -> bool {
    let verts = mask_atoms(g, block);
    'ham: for &c in cycles.iter().filter(|&&c| c & !block == 0) {
        if mask_atoms(g, c).len() != verts.len() || c.count_ones() as usize != verts.len() {
            continue;
        }
        let mut order = vec![*verts.iter().next().unwrap()];
        let mut prev = usize::MAX;
        while order.len() < verts.len() {
            let cur = *order.last().unwrap();
            let next = g
                .neighbors(cur)
                .iter()
                .find(|&&(w, e)| c & (1 << e) != 0 && w != prev && !order.contains(&w))
                .map(|&(w, _)| w);
            let Some(next) = next else { continue 'ham };
            prev = cur;
            order.push(next);
        }
        let pos = |a: usize| order.iter().position(|&x| x == a).unwrap();
        let chords: Vec<(usize, usize)> = (0..g.bond_count())
            .filter(|&e| block & !c & (1 << e) != 0)
            .map(|e| {
                let (x, y) = (pos(g.bond(e).a), pos(g.bond(e).b));
                (x.min(y), x.max(y))
            })
            .collect();
        let crossing = chords.iter().enumerate().any(|(i, &(a, b))| {
            chords[i + 1..]
                .iter()
                .any(|&(c2, d)| (a < c2 && c2 < b && b < d) || (c2 < a && a < d && d < b))
        });
        if !crossing {
            return true;
        }
    }
    false
}

/// Compares ring perception against answers derived from the full cycle list.
/// Returns a description of the first disagreement.
pub fn ring_perception_disagreement(g: &MolecularGraph) -> Option<String> {
    let cycles = all_cycles(g);
    let union = cycles.iter().fold(0u64, |a, &c| a | c);
    let cyclic = forge_core::molgraph::cyclic_bonds(g);
    for (e, &c) in cyclic.iter().enumerate() {
        if c != (union & (1 << e) != 0) {
            return Some(format!("bond {e} cyclic={c}"));
        }
    }

    // Ring systems: atoms joined through cycle bonds.
    let mut systems: Vec<(BTreeSet<usize>, Vec<u64>)> = Vec::new();
    for &c in &cycles {
        let atoms = mask_atoms(g, c);
        let mut merged = (atoms, vec![c]);
        systems.retain(|(a, cs)| {
            if a.is_disjoint(&merged.0) {
                true
            } else {
                merged.0.extend(a.iter().copied());
                merged.1.extend(cs.iter().copied());
                false
            }
        });
        systems.push(merged);
    }
    let summary = perceive_ring_systems(g);
    if summary.ring_systems.len() != systems.len() {
        return Some(format!(
            "{} systems, expected {}",
            summary.ring_systems.len(),
            systems.len()
        ));
    }
    let mut isolated = 0;
    for (atoms, cs) in &systems {
        let Some(s) = summary
            .ring_systems
            .iter()
            .find(|s| s.atoms.iter().copied().collect::<BTreeSet<_>>() == *atoms)
        else {
            return Some(format!("no system with atoms {atoms:?}"));
        };
        let r = rank(cs);
        if r == 1 {
            isolated += 1;
        }
        if s.ring_count != r {
            return Some(format!("ring count {} expected {r}", s.ring_count));
        }
        // Blocks: classes of cycles linked by shared bonds.
        let mut blocks: Vec<Vec<u64>> = Vec::new();
        for &c in cs {
            let mut merged = vec![c];
            blocks.retain(|b| {
                if b.iter().any(|&x| x & c != 0) {
                    merged.extend(b.iter().copied());
                    false
                } else {
                    true
                }
            });
            blocks.push(merged);
        }
        let poly: Vec<&Vec<u64>> = blocks.iter().filter(|b| rank(b) >= 2).collect();
        if s.fused != !poly.is_empty() {
            return Some(format!("fused={} expected {}", s.fused, !poly.is_empty()));
        }
        if s.has_spiro_internal != (blocks.len() > 1) {
            return Some(format!(
                "spiro={} with {} blocks",
                s.has_spiro_internal,
                blocks.len()
            ));
        }
        let bridged = poly
            .iter()
            .any(|b| !block_outerplanar(g, b.iter().fold(0, |a, &c| a | c), &cycles));
        if s.has_bridge_internal != bridged {
            return Some(format!(
                "bridged={} expected {bridged}",
                s.has_bridge_internal
            ));
        }
    }
    if summary.isolated_ring_count != isolated {
        return Some(format!(
            "isolated rings {} expected {isolated}",
            summary.isolated_ring_count
        ));
    }

    // Minimum cycle basis: Horton's greedy over every cycle gives the optimum weight.
    let mut sorted = cycles.clone();
    sorted.sort_by_key(|c| c.count_ones());
    let mut basis = Vec::new();
    let mut weight = 0;
    for c in sorted {
        let mut trial = basis.clone();
        trial.push(c);
        if rank(&trial) == trial.len() {
            weight += c.count_ones();
            basis = trial;
        }
    }
    let mcb = minimum_cycle_basis(g);
    let masks: Option<Vec<u64>> = mcb.iter().map(|r| ring_mask(g, r)).collect();
    let Some(masks) = masks else {
        return Some("basis ring is not a closed path".into());
    };
    if masks
        .iter()
        .zip(&mcb)
        .any(|(m, r)| m.count_ones() as usize != r.len() || !cycles.contains(m))
    {
        return Some("basis ring is not a simple cycle".into());
    }
    if masks.len() != basis.len() || rank(&masks) != masks.len() {
        return Some(format!(
            "basis of {} rings, expected {}",
            masks.len(),
            basis.len()
        ));
    }
    let w: u32 = masks.iter().map(|m| m.count_ones()).sum();
    if w != weight {
        return Some(format!("basis weight {w}, optimum {weight}"));
    }
    None
}

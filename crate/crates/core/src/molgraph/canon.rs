//! Canonical labelling by colour refinement plus individualization search.
//! The certificate of a labelling is the notation written from it; the smallest one wins.

use super::aromatic::{perceive_aromaticity, Aromaticity};
use super::kekule::kekulize;
use super::smiles::write_smiles;
use super::{BondOrder, MolError, MolecularGraph};

pub fn canonical_form(g: &MolecularGraph) -> Result<String, MolError> {
    let mut g = g.suppress_hydrogens();
    if !g.is_kekulized() {
        kekulize(&mut g, true)?;
    }
    if g.atom_count() == 0 {
        return Ok(String::new());
    }
    let arom = perceive_aromaticity(&g);
    let mut search = Search::new(&g, &arom);
    let colors = search.initial_colors();
    search.explore(colors, &mut Vec::new());
    Ok(search.best.expect("at least one leaf").0)
}

pub fn graphs_equivalent(a: &MolecularGraph, b: &MolecularGraph) -> Result<bool, MolError> {
    if a.heavy_atom_count() != b.heavy_atom_count() {
        return Ok(false);
    }
    Ok(canonical_form(a)? == canonical_form(b)?)
}

struct Search<'a> {
    g: &'a MolecularGraph,
    arom: &'a Aromaticity,
    codes: Vec<u8>,
    best: Option<(String, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(g: &'a MolecularGraph, arom: &'a Aromaticity) -> Search<'a> {
        let codes = (0..g.bond_count())
            .map(|e| {
                if arom.bonds[e] {
                    4
                } else {
                    match g.bond(e).order {
                        BondOrder::Single => 1,
                        BondOrder::Double => 2,
                        BondOrder::Triple => 3,
                        BondOrder::Aromatic => 4,
                    }
                }
            })
            .collect();
        Search {
            g,
            arom,
            codes,
            best: None,
            automorphisms: Vec::new(),
        }
    }

    fn initial_colors(&self) -> Vec<usize> {
        let g = self.g;
        let in_stereo_bond: Vec<bool> = {
            let mut v = vec![false; g.atom_count()];
            for e in g.bond_stereo.keys() {
                v[g.bond(*e).a] = true;
                v[g.bond(*e).b] = true;
            }
            v
        };
        let keys: Vec<_> = (0..g.atom_count())
            .map(|a| {
                let atom = g.atom(a);
                (
                    atom.element.atomic_number(),
                    atom.charge,
                    self.arom.atoms[a],
                    g.hydrogen_count(a),
                    g.degree(a),
                    g.atom_stereo.contains_key(&a),
                    in_stereo_bond[a],
                )
            })
            .collect();
        let mut idx: Vec<usize> = (0..keys.len()).collect();
        idx.sort_by(|&x, &y| keys[x].cmp(&keys[y]));
        let mut colors = vec![0; keys.len()];
        for (i, &a) in idx.iter().enumerate() {
            colors[a] = if i > 0 && keys[idx[i - 1]] == keys[a] {
                colors[idx[i - 1]]
            } else {
                i
            };
        }
        colors
    }

    /// Refines until the partition is equitable; colours are cell start positions.
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let n = colors.len();
        let mut cells = count_cells(&colors);
        loop {
            let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..n)
                .map(|a| {
                    let mut nb: Vec<(usize, u8)> = self
                        .g
                        .neighbors(a)
                        .iter()
                        .map(|&(v, e)| (colors[v], self.codes[e]))
                        .collect();
                    nb.sort_unstable();
                    (colors[a], nb)
                })
                .collect();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&x, &y| keys[x].cmp(&keys[y]));
            let mut next = vec![0; n];
            for (i, &a) in idx.iter().enumerate() {
                next[a] = if i > 0 && keys[idx[i - 1]] == keys[a] {
                    next[idx[i - 1]]
                } else {
                    i
                };
            }
            let c = count_cells(&next);
            colors = next;
            if c == cells {
                return colors;
            }
            cells = c;
        }
    }

    fn explore(&mut self, colors: Vec<usize>, prefix: &mut Vec<usize>) {
        let colors = self.refine(colors);
        let n = colors.len();
        if count_cells(&colors) == n {
            let (cert, order) = write_smiles(self.g, &colors, self.arom);
            match &self.best {
                None => self.best = Some((cert, order)),
                Some((best, best_order)) => {
                    if cert < *best {
                        self.best = Some((cert, order));
                    } else if cert == *best {
                        let mut auto = vec![0; n];
                        for (x, y) in best_order.iter().zip(&order) {
                            auto[*x] = *y;
                        }
                        if auto.iter().enumerate().any(|(i, &j)| i != j) {
                            self.automorphisms.push(auto);
                        }
                    }
                }
            }
            return;
        }
        // First non-singleton cell in colour order.
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c] += 1;
        }
        let target = (0..n).find(|&c| sizes[c] > 1).unwrap();
        let members: Vec<usize> = (0..n).filter(|&a| colors[a] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &members {
            if !explored.is_empty() && self.same_orbit(prefix, v, &explored) {
                continue;
            }
            let mut next = colors.clone();
            for &m in &members {
                if m != v {
                    next[m] = target + 1;
                }
            }
            prefix.push(v);
            self.explore(next, prefix);
            prefix.pop();
            explored.push(v);
        }
    }

    fn same_orbit(&self, prefix: &[usize], v: usize, explored: &[usize]) -> bool {
        let n = self.g.atom_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let nx = p[c];
                p[c] = r;
                c = nx;
            }
            r
        }
        for auto in &self.automorphisms {
            if prefix.iter().any(|&p| auto[p] != p) {
                continue;
            }
            for (i, &j) in auto.iter().enumerate() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let rv = find(&mut parent, v);
        explored.iter().any(|&u| find(&mut parent, u) == rv)
    }
}

fn count_cells(colors: &[usize]) -> usize {
    let mut seen = vec![false; colors.len()];
    let mut c = 0;
    for &x in colors {
        if !seen[x] {
            seen[x] = true;
            c += 1;
        }
    }
    c
}

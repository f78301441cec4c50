//! Atom and bond sets for group elements, before they join the molecule.

use crate::molgraph::{parse_raw, BondOrder, Element as Chem};
use crate::parse_tree::{Element, Tag};
use crate::ring_topology::{JunctionMap, LabelScheme};

use super::BuildError;

#[derive(Clone, Debug)]
pub(crate) struct FragAtom {
    pub element: Chem,
    /// Takes part in the maximum number of non-cumulative double bonds.
    pub mancude: bool,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Fragment {
    pub atoms: Vec<FragAtom>,
    pub bonds: Vec<(usize, usize, BondOrder)>,
    pub labels: Vec<(String, usize)>,
}

impl Fragment {
    pub fn from_notation(value: &str) -> Result<Fragment, BuildError> {
        let g =
            parse_raw(value).map_err(|e| BuildError::UnsupportedGroup(format!("{value}: {e}")))?;
        let atoms = g
            .atoms()
            .iter()
            .map(|a| FragAtom {
                element: a.element,
                mancude: a.aromatic,
            })
            .collect();
        let bonds = g
            .bonds()
            .iter()
            .map(|b| {
                (
                    b.a,
                    b.b,
                    if b.order == BondOrder::Aromatic {
                        BondOrder::Single
                    } else {
                        b.order
                    },
                )
            })
            .collect();
        Ok(Fragment {
            atoms,
            bonds,
            labels: Vec::new(),
        })
    }

    fn chain(n: usize) -> Fragment {
        let atoms = vec![
            FragAtom {
                element: Chem::C,
                mancude: false
            };
            n
        ];
        let bonds = (1..n).map(|i| (i - 1, i, BondOrder::Single)).collect();
        let labels = (0..n).map(|i| ((i + 1).to_string(), i)).collect();
        Fragment {
            atoms,
            bonds,
            labels,
        }
    }

    pub fn label(&self, l: &str) -> Option<usize> {
        self.labels.iter().find(|(x, _)| x == l).map(|(_, a)| *a)
    }

    fn has_bond(&self, a: usize, b: usize) -> bool {
        self.bonds
            .iter()
            .any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a))
    }

    fn push_bond(&mut self, a: usize, b: usize, order: BondOrder) {
        if a != b && !self.has_bond(a, b) {
            self.bonds.push((a, b, order));
        }
    }
}

fn attr<'e>(e: &'e Element, name: &str) -> Result<&'e str, BuildError> {
    e.attr(name)
        .ok_or_else(|| BuildError::UnsupportedGroup(format!("<{}> lacks {name}", e.tag)))
}

fn labelled_template(e: &Element) -> Result<Fragment, BuildError> {
    let mut f = Fragment::from_notation(attr(e, "value")?)?;
    let scheme = LabelScheme::from_attr(e.attr("labels").unwrap_or("numeric"), f.atoms.len());
    if scheme.len() != f.atoms.len() {
        return Err(BuildError::UnsupportedGroup(format!(
            "{} labels for {} atoms",
            scheme.len(),
            f.atoms.len()
        )));
    }
    f.labels = scheme
        .labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    Ok(f)
}

/// Atoms of a group, fused child ring, spiro component or bridge parent.
pub(crate) fn group_fragment(e: &Element) -> Result<Fragment, BuildError> {
    let ty = attr(e, "type")?;
    let sub = e.attr("subType").unwrap_or("");
    match (ty, sub) {
        ("chain", _) => Ok(Fragment::chain(attr(e, "value")?.matches('C').count())),
        ("substituent", _) => {
            Fragment::from_notation(attr(e, "value")?.trim_start_matches(['=', '#']))
        }
        ("spiro system", _) => spiro(e),
        ("ring", "ring" | "fusionRing") => labelled_template(e),
        ("ring", "alkaneStem") => {
            let mut f = labelled_template(e)?;
            if e.attr("conjugated") == Some("true") {
                for a in &mut f.atoms {
                    a.mancude = true;
                }
            }
            Ok(f)
        }
        ("ring", "hantzschWidman") => {
            let mut f = labelled_template(e)?;
            for h in e.children_with(Tag::Heteroatom) {
                let loc = attr(h, "locant")?;
                let el = Chem::from_symbol(attr(h, "value")?).ok_or_else(|| {
                    BuildError::UnsupportedGroup(format!("heteroatom {:?}", h.attr("value")))
                })?;
                let i = f
                    .label(loc)
                    .ok_or_else(|| BuildError::UnresolvedLocant(loc.to_string()))?;
                f.atoms[i].element = el;
            }
            Ok(f)
        }
        ("ring", "fusedRing") => fused(e),
        ("ring", "bridgeSystem") => bridged(e),
        _ => Err(BuildError::UnsupportedGroup(format!("{ty}/{sub}"))),
    }
}

fn fused(e: &Element) -> Result<Fragment, BuildError> {
    let children: Vec<Fragment> = e
        .children_with(Tag::FusedChildRing)
        .map(group_fragment)
        .collect::<Result<_, _>>()?;
    let labels_el = e
        .first_child(Tag::FusedRingLabels)
        .ok_or_else(|| BuildError::UnsupportedGroup("fused ring without labels".into()))?;
    let labels: Vec<String> = attr(labels_el, "labels")?
        .split('/')
        .map(str::to_string)
        .collect();
    let map = JunctionMap::parse(attr(labels_el, "originalLabels")?)
        .ok_or_else(|| BuildError::UnsupportedGroup("unreadable originalLabels".into()))?;
    if map.entries.len() != labels.len() {
        return Err(BuildError::UnsupportedGroup(
            "label and junction counts differ".into(),
        ));
    }
    let mut out = Fragment::default();
    let mut index: Vec<Vec<Option<usize>>> =
        children.iter().map(|c| vec![None; c.atoms.len()]).collect();
    for (i, entry) in map.entries.iter().enumerate() {
        let mut atom: Option<FragAtom> = None;
        for (j, src) in entry.iter().enumerate() {
            let (Some(src), Some(child)) = (src, children.get(j)) else {
                continue;
            };
            let k = child
                .label(src)
                .ok_or_else(|| BuildError::UnresolvedLocant(src.clone()))?;
            index[j][k] = Some(i);
            let a = &child.atoms[k];
            atom = Some(match atom {
                None => a.clone(),
                Some(prev) => FragAtom {
                    element: prev.element,
                    mancude: prev.mancude || a.mancude,
                },
            });
        }
        let atom = atom.ok_or_else(|| {
            BuildError::UnsupportedGroup(format!("fused atom {} has no source", labels[i]))
        })?;
        out.atoms.push(atom);
        out.labels.push((labels[i].clone(), i));
    }
    for (j, child) in children.iter().enumerate() {
        for &(a, b, order) in &child.bonds {
            match (index[j][a], index[j][b]) {
                (Some(x), Some(y)) => out.push_bond(x, y, order),
                _ => {
                    return Err(BuildError::UnsupportedGroup(
                        "fused component atom missing from junction map".into(),
                    ))
                }
            }
        }
    }
    Ok(out)
}

fn bridged(e: &Element) -> Result<Fragment, BuildError> {
    let parent = e
        .first_child(Tag::BridgeParent)
        .ok_or_else(|| BuildError::UnsupportedGroup("bridge system without parent".into()))?;
    let child = e
        .first_child(Tag::BridgeChild)
        .ok_or_else(|| BuildError::UnsupportedGroup("bridge system without bridge".into()))?;
    let mut f = group_fragment(parent)?;
    let heads: Vec<&str> = attr(child, "bridgeLocants")?.split(',').collect();
    let [h1, h2] = heads[..] else {
        return Err(BuildError::UnsupportedGroup(
            "bridge needs two bridgeheads".into(),
        ));
    };
    let h1 = f
        .label(h1)
        .ok_or_else(|| BuildError::UnresolvedLocant(h1.to_string()))?;
    let h2 = f
        .label(h2)
        .ok_or_else(|| BuildError::UnresolvedLocant(h2.to_string()))?;
    let names: Vec<String> = attr(child, "labels")?
        .split('/')
        .map(str::to_string)
        .collect();
    if names.len() != attr(child, "value")?.matches('C').count() {
        return Err(BuildError::UnsupportedGroup(
            "bridge label count differs from its atom count".into(),
        ));
    }
    let mut prev = h1;
    let mut added = Vec::new();
    for name in &names {
        let id = f.atoms.len();
        f.atoms.push(FragAtom {
            element: Chem::C,
            mancude: false,
        });
        f.push_bond(prev, id, BondOrder::Single);
        added.push((name.clone(), id));
        prev = id;
    }
    f.push_bond(prev, h2, BondOrder::Single);
    added.sort_by_key(|(l, _)| l.parse::<u32>().unwrap_or(u32::MAX));
    f.labels.extend(added);
    Ok(f)
}

fn spiro(e: &Element) -> Result<Fragment, BuildError> {
    let mut out = Fragment::default();
    let mut k = 0usize;
    let mut junctions: Vec<(String, String)> = Vec::new();
    for c in &e.children {
        match c.tag {
            Tag::SpiroSystemComponent => {
                let f = group_fragment(c)?;
                let off = out.atoms.len();
                let primes = "'".repeat(k);
                out.atoms.extend(f.atoms);
                out.bonds
                    .extend(f.bonds.into_iter().map(|(a, b, o)| (a + off, b + off, o)));
                out.labels.extend(
                    f.labels
                        .into_iter()
                        .map(|(l, a)| (format!("{l}{primes}"), a + off)),
                );
                k += 1;
            }
            Tag::SpiroLocant => {
                let text = c.text.as_deref().unwrap_or("");
                let (a, b) = text.split_once(',').ok_or_else(|| {
                    BuildError::UnsupportedGroup(format!("spiro locant '{text}'"))
                })?;
                junctions.push((a.trim().to_string(), b.trim().to_string()));
            }
            _ => {}
        }
    }
    if k < 2 || junctions.len() != k - 1 {
        return Err(BuildError::UnsupportedGroup(format!(
            "{k} spiro components with {} junctions",
            junctions.len()
        )));
    }
    let n = out.atoms.len();
    let mut target: Vec<usize> = (0..n).collect();
    for (a, b) in &junctions {
        let x = out
            .label(a)
            .ok_or_else(|| BuildError::UnresolvedLocant(a.clone()))?;
        let y = out
            .label(b)
            .ok_or_else(|| BuildError::UnresolvedLocant(b.clone()))?;
        if out.atoms[x].element != out.atoms[y].element {
            return Err(BuildError::ValenceViolation(format!(
                "spiro atoms {a} and {b} differ"
            )));
        }
        let (x, y) = (root(&target, x), root(&target, y));
        target[y] = x;
    }
    let mut new_index = vec![usize::MAX; n];
    let mut merged = Fragment::default();
    for i in 0..n {
        if root(&target, i) == i {
            new_index[i] = merged.atoms.len();
            merged.atoms.push(out.atoms[i].clone());
        }
    }
    let remap = |i: usize| new_index[root(&target, i)];
    for &(a, b, o) in &out.bonds {
        merged.push_bond(remap(a), remap(b), o);
    }
    merged.labels = out
        .labels
        .iter()
        .map(|(l, a)| (l.clone(), remap(*a)))
        .collect();
    Ok(merged)
}

fn root(target: &[usize], mut i: usize) -> usize {
    while target[i] != i {
        i = target[i];
    }
    i
}

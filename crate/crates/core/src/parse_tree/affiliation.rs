use crate::structure_builder::{scope_index, ScopeInfo};

use super::tree::{Element, MetadataTree, RetentionReason, Tag};
use super::ParseTreeError;

fn reason(tag: Tag) -> Option<RetentionReason> {
    match tag {
        Tag::StereoChemistry => Some(RetentionReason::Stereo),
        Tag::Unsaturator => Some(RetentionReason::Unsaturator),
        Tag::Hydro => Some(RetentionReason::Hydro),
        Tag::Heteroatom => Some(RetentionReason::Heteroatom),
        Tag::FusedRingLabels | Tag::SpiroLocant | Tag::BridgeChild => {
            Some(RetentionReason::RingDescriptor)
        }
        _ => None,
    }
}

fn mark(e: &mut Element) {
    if let Some(r) = reason(e.tag) {
        e.retained = Some(r);
    }
    for c in &mut e.children {
        mark(c);
    }
}

/// Flags stereo, unsaturation, hydro, heteroatom and ring descriptor elements as retained.
pub fn retain_elements(tree: MetadataTree) -> MetadataTree {
    let mut tree = tree;
    mark(&mut tree.root);
    tree
}

fn is_part(e: &Element) -> bool {
    matches!(e.tag, Tag::Substituent | Tag::Bracket | Tag::Root)
}

struct Detached {
    level: Vec<usize>,
    element: Element,
}

/// Removes stereo descriptors from every part, remembering the word or bracket they were written in.
fn detach_stereo(e: &mut Element, path: &mut Vec<usize>, out: &mut Vec<Detached>) {
    let level = path.clone();
    for (i, c) in e.children.iter_mut().enumerate() {
        if is_part(c) {
            let mut k = 0;
            while k < c.children.len() {
                if c.children[k].tag == Tag::StereoChemistry {
                    out.push(Detached {
                        level: level.clone(),
                        element: c.children.remove(k),
                    });
                } else {
                    k += 1;
                }
            }
        }
        path.push(i);
        detach_stereo(c, path, out);
        path.pop();
    }
}

/// Path of the part whose atoms carry the level's principal chain or ring.
fn terminal_path(tree: &MetadataTree, level: &[usize]) -> Option<Vec<usize>> {
    let mut path = level.to_vec();
    loop {
        let e = tree.at(&path)?;
        let i = e.children.iter().rposition(is_part)?;
        path.push(i);
        if e.children[i].tag != Tag::Bracket {
            return Some(path);
        }
    }
}

fn has_feature(s: &ScopeInfo, stereo: &Element, locant: Option<&str>) -> usize {
    let feats = if stereo.attr("type") == Some("RorS") {
        &s.stereocenters
    } else {
        &s.double_bonds
    };
    match locant {
        Some(l) => feats.iter().filter(|f| *f == l).count(),
        None => feats.len(),
    }
}

fn choose(
    scopes: &[&ScopeInfo],
    backbone: usize,
    stereo: &Element,
) -> Result<usize, ParseTreeError> {
    let text = stereo.text.clone().unwrap_or_default();
    let ambiguous = || ParseTreeError::AmbiguousAffiliation(text.clone());
    let nested: Vec<usize> = (0..scopes.len()).filter(|&i| i != backbone).collect();
    match stereo.attr("locant") {
        Some(l) => {
            if has_feature(scopes[backbone], stereo, Some(l)) > 0 {
                return Ok(backbone);
            }
            let hits: Vec<usize> = nested
                .iter()
                .copied()
                .filter(|&i| has_feature(scopes[i], stereo, Some(l)) > 0)
                .collect();
            match hits[..] {
                [i] => return Ok(i),
                [] => {}
                _ => return Err(ambiguous()),
            }
            if scopes[backbone].labels.iter().any(|x| x == l) {
                return Ok(backbone);
            }
            Ok(nested
                .into_iter()
                .find(|&i| scopes[i].labels.iter().any(|x| x == l))
                .unwrap_or(backbone))
        }
        None => match has_feature(scopes[backbone], stereo, None) {
            1 => Ok(backbone),
            0 => {
                let hits: Vec<usize> = nested
                    .iter()
                    .copied()
                    .filter(|&i| has_feature(scopes[i], stereo, None) > 0)
                    .collect();
                match hits[..] {
                    [i] if has_feature(scopes[i], stereo, None) == 1 => Ok(i),
                    _ => Err(ambiguous()),
                }
            }
            _ => Err(ambiguous()),
        },
    }
}

/// Moves each stereo descriptor to the part that owns its feature and gathers hydro
/// prefixes at the end of the ring group they saturate.
pub fn rearrange_affiliations(tree: MetadataTree) -> Result<MetadataTree, ParseTreeError> {
    let mut tree = tree;
    let mut detached = Vec::new();
    detach_stereo(&mut tree.root, &mut Vec::new(), &mut detached);
    let index = scope_index(&tree)?;
    let mut inserted: Vec<(Vec<usize>, usize)> = Vec::new();
    for d in detached {
        let backbone_path = terminal_path(&tree, &d.level).ok_or_else(|| {
            ParseTreeError::StructuralError("descriptor outside any name part".into())
        })?;
        let mut scopes: Vec<&ScopeInfo> = index
            .iter()
            .filter(|s| s.path.starts_with(&d.level))
            .collect();
        scopes.sort_by(|a, b| a.path.cmp(&b.path));
        let backbone = scopes
            .iter()
            .position(|s| s.path == backbone_path)
            .ok_or_else(|| ParseTreeError::StructuralError("level has no principal part".into()))?;
        let target = scopes[choose(&scopes, backbone, &d.element)?].path.clone();
        let slot = match inserted.iter_mut().find(|(p, _)| *p == target) {
            Some((_, n)) => {
                *n += 1;
                *n - 1
            }
            None => {
                inserted.push((target.clone(), 1));
                0
            }
        };
        let part = tree.at_mut(&target).expect("scope paths point at parts");
        part.children.insert(slot, d.element);
    }
    for s in &index {
        let Some(part) = tree.at_mut(&s.path) else {
            continue;
        };
        let mut hydro = Vec::new();
        let mut k = 0;
        while k < part.children.len() {
            if part.children[k].tag == Tag::Hydro {
                hydro.push(part.children.remove(k));
            } else {
                k += 1;
            }
        }
        let Some(group) = part.children.iter_mut().find(|c| c.tag == Tag::Group) else {
            part.children.extend(hydro);
            continue;
        };
        let pos = |h: &Element| {
            h.attr("locant")
                .and_then(|l| s.labels.iter().position(|x| x == l))
                .unwrap_or(0)
        };
        hydro.sort_by_key(|h| std::cmp::Reverse(pos(h)));
        if !hydro.is_empty() {
            group.children.extend(hydro);
            group.text = None;
        }
    }
    Ok(tree)
}

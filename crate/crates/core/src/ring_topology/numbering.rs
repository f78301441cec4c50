use super::{RingAtom, TopologyError};
use crate::molgraph::Element;

/// Sort key for a label such as `4a`: number first, then letter.
fn label_key(number: u32, letter: u8) -> (u32, u8) {
    (number, letter)
}

fn hetero_rank(e: Element) -> u8 {
    match e {
        Element::O => 0,
        Element::S => 1,
        Element::Se => 2,
        Element::N => 3,
        Element::P => 4,
        Element::Si => 5,
        Element::B => 6,
        _ => 7,
    }
}

/// Numbers an ortho-fused system around its periphery.
///
/// Returns the walk order (old atom indices) and the label of each position.
/// Candidate walks start at a non-junction atom next to a junction and move away from it;
/// junction atoms take the preceding number plus a letter. The preferred walk gives the
/// lowest heteroatom locants, then the lowest locants to O before S before N, then the
/// lowest junction locants.
pub fn peripheral_numbering(
    atoms: &[RingAtom],
    bonds: &[(usize, usize)],
    interior: &[(usize, usize)],
) -> Result<(Vec<usize>, Vec<String>), TopologyError> {
    let n = atoms.len();
    let mut degree = vec![0usize; n];
    let mut peri: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in bonds {
        degree[a] += 1;
        degree[b] += 1;
        if !interior.contains(&(a.min(b), a.max(b))) {
            peri[a].push(b);
            peri[b].push(a);
        }
    }
    if peri.iter().any(|p| p.len() != 2) {
        return Err(TopologyError::UnsupportedTopology(
            "system is not ortho-fused".into(),
        ));
    }
    let junction: Vec<bool> = degree.iter().map(|&d| d >= 3).collect();

    let mut best: Option<(Key, Vec<usize>, Vec<String>)> = None;
    for s in 0..n {
        if junction[s] {
            continue;
        }
        for (dir, &j) in peri[s].iter().enumerate() {
            if !junction[j] {
                continue;
            }
            let next = peri[s][1 - dir];
            let Some(order) = walk(&peri, s, next, n) else {
                return Err(TopologyError::UnsupportedTopology(
                    "periphery is not a single cycle".into(),
                ));
            };
            let (labels, keys) = label_walk(&order, &junction);
            let mut hetero: Vec<(u32, u8)> = Vec::new();
            let mut by_element: Vec<(u8, (u32, u8))> = Vec::new();
            let mut fusion: Vec<(u32, u8)> = Vec::new();
            for (pos, &a) in order.iter().enumerate() {
                if atoms[a].element != Element::C {
                    hetero.push(keys[pos]);
                    by_element.push((hetero_rank(atoms[a].element), keys[pos]));
                }
                if junction[a] {
                    fusion.push(keys[pos]);
                }
            }
            hetero.sort();
            by_element.sort();
            fusion.sort();
            let key = Key {
                hetero,
                by_element: by_element.into_iter().map(|(_, k)| k).collect(),
                fusion,
            };
            if best.as_ref().is_none_or(|(b, _, _)| key < *b) {
                best = Some((key, order, labels));
            }
        }
    }
    let (_, order, labels) =
        best.ok_or_else(|| TopologyError::UnsupportedTopology("no numbering start".into()))?;
    Ok((order, labels))
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    hetero: Vec<(u32, u8)>,
    by_element: Vec<(u32, u8)>,
    fusion: Vec<(u32, u8)>,
}

fn walk(peri: &[Vec<usize>], start: usize, next: usize, n: usize) -> Option<Vec<usize>> {
    let mut order = vec![start];
    let (mut prev, mut cur) = (start, next);
    while cur != start {
        order.push(cur);
        let nxt = if peri[cur][0] == prev {
            peri[cur][1]
        } else {
            peri[cur][0]
        };
        prev = cur;
        cur = nxt;
        if order.len() > n {
            return None;
        }
    }
    (order.len() == n).then_some(order)
}

fn label_walk(order: &[usize], junction: &[bool]) -> (Vec<String>, Vec<(u32, u8)>) {
    let mut labels = Vec::with_capacity(order.len());
    let mut keys = Vec::with_capacity(order.len());
    let mut number = 0u32;
    let mut letter = 0u8;
    for &a in order {
        if junction[a] {
            letter += 1;
            labels.push(format!("{number}{}", (b'a' + letter - 1) as char));
            keys.push(label_key(number, letter));
        } else {
            number += 1;
            letter = 0;
            labels.push(number.to_string());
            keys.push(label_key(number, 0));
        }
    }
    (labels, keys)
}

//! Token stream to raw metadata tree.

use crate::molgraph::Element as Chem;
use crate::ring_topology::{
    apply_heteroatom_substitution, resolve_bridge, resolve_fusion, FusionDescriptor, LabelScheme,
    RingComponent,
};
use crate::tokenizer::{parse_stereo_item, Locant, Token, TokenClass};

use super::tree::{Element, MetadataTree, Tag};
use super::ParseTreeError;

type Result<T> = std::result::Result<T, ParseTreeError>;

fn structural<T>(msg: impl Into<String>) -> Result<T> {
    Err(ParseTreeError::StructuralError(msg.into()))
}

/// Builds the raw element tree for a tokenized name.
pub fn build_parse_tree(tokens: &[Token]) -> Result<MetadataTree> {
    if tokens.is_empty() {
        return structural("no tokens");
    }
    let name: String = tokens.iter().map(|t| t.text.as_str()).collect();
    let mut p = Parser { tokens, pos: 0 };
    let parts = p.level(false)?;
    if p.pos != tokens.len() {
        return structural(format!("unexpected '{}'", tokens[p.pos].text));
    }
    match parts.last() {
        Some(last) if last.tag == Tag::Root => {}
        _ => return structural("name has no parent structure"),
    }
    let mut word = Element::new(Tag::Word)
        .with_attr("type", "full")
        .with_attr("value", name.clone());
    word.children = parts;
    let rule = Element::new(Tag::WordRule)
        .with_attr("wordRule", "simple")
        .with_attr("type", "full")
        .with_attr("value", name.clone())
        .with_child(word);
    Ok(MetadataTree::new(
        Element::new(Tag::Molecule)
            .with_attr("name", name)
            .with_child(rule),
    ))
}

#[derive(Default)]
struct Pending {
    stereo: Vec<Element>,
    hydro: Vec<Element>,
    locants: Option<Vec<Locant>>,
    multiplier: Option<usize>,
}

impl Pending {
    fn take_prefixes(&mut self) -> (Option<Vec<Locant>>, Option<usize>) {
        (self.locants.take(), self.multiplier.take())
    }
}

/// A ring construct with its label scheme and short name.
struct Ring {
    attrs: Vec<(&'static str, String)>,
    children: Vec<Element>,
    text: Option<String>,
    component: Option<RingComponent>,
    name: String,
}

impl Ring {
    fn element(&self, tag: Tag) -> Element {
        let mut e = Element::new(tag);
        for (k, v) in &self.attrs {
            e.set_attr(k, v.clone());
        }
        e.children = self.children.clone();
        if e.children.is_empty() {
            e.text = self.text.clone();
        }
        e
    }

    fn component(&self) -> Result<&RingComponent> {
        self.component.as_ref().ok_or_else(|| {
            ParseTreeError::StructuralError(format!(
                "{} cannot take part in fusion or bridging",
                self.name
            ))
        })
    }
}

struct Stem {
    group: Element,
    suffixes: Vec<Element>,
    inline: bool,
    substituent_only: bool,
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

fn locant_text(locants: &[Locant]) -> String {
    locants
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn hw_labels(size: usize) -> String {
    if size == 6 {
        "1/2,ortho/3,meta/4,para/5/6".to_string()
    } else {
        LabelScheme::numeric(size).to_attr()
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<TokenClass> {
        self.peek().map(|t| t.kind)
    }

    fn peek_kind_at(&self, k: usize) -> Option<TokenClass> {
        self.tokens.get(self.pos + k).map(|t| t.kind)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: TokenClass) -> Result<&'a Token> {
        match self.next() {
            Some(t) if t.kind == kind => Ok(t),
            Some(t) => structural(format!("expected {kind:?}, found '{}'", t.text)),
            None => structural(format!("expected {kind:?} at end of name")),
        }
    }

    fn skip_hyphen(&mut self) -> bool {
        if self.peek_kind() == Some(TokenClass::Hyphen) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Parses substituents, brackets and (at word level) the root up to a closing bracket.
    fn level(&mut self, in_bracket: bool) -> Result<Vec<Element>> {
        let mut parts: Vec<Element> = Vec::new();
        let mut pending = Pending::default();
        loop {
            let Some(tok) = self.peek() else { break };
            match tok.kind {
                TokenClass::CloseBracket => {
                    if in_bracket {
                        break;
                    }
                    return structural(format!("unbalanced '{}'", tok.text));
                }
                TokenClass::StereoDescriptor => {
                    self.pos += 1;
                    pending.stereo.extend(stereo_elements(&tok.text)?);
                    self.skip_hyphen();
                }
                TokenClass::Locant
                    if self.peek_kind_at(1) != Some(TokenClass::BridgePrefix)
                        && !self.hw_ahead(1) =>
                {
                    self.pos += 1;
                    if pending.locants.is_some() {
                        return structural(format!("two locant sets before '{}'", tok.text));
                    }
                    pending.locants = tok.locants.clone();
                }
                TokenClass::Multiplier | TokenClass::GroupMultiplier if !self.hw_ahead(0) => {
                    self.pos += 1;
                    pending.multiplier = Some(count_of(tok)?);
                }
                TokenClass::HydroPrefix => {
                    self.pos += 1;
                    let h = self.hydro(tok, &mut pending)?;
                    pending.hydro.extend(h);
                    self.skip_hyphen();
                }
                TokenClass::OpenBracket => {
                    self.pos += 1;
                    let inner = self.level(true)?;
                    self.expect(TokenClass::CloseBracket)?;
                    if !matches!(
                        inner.last().map(|e| e.tag),
                        Some(Tag::Substituent | Tag::Bracket)
                    ) {
                        return structural("bracket does not enclose a substituent");
                    }
                    let mut bracket = Element::new(Tag::Bracket);
                    bracket.children = inner;
                    if self.skip_hyphen() {
                        bracket.children.push(hyphen());
                    }
                    let (locs, mult) = pending.take_prefixes();
                    place_raw(&mut bracket, &mut pending, false);
                    parts.extend(multiply(bracket, locs, mult)?);
                }
                TokenClass::SubstituentPrefix => {
                    self.pos += 1;
                    let smiles = tok.payload("smiles").unwrap_or_default();
                    let group = Element::new(Tag::Group)
                        .with_attr("type", "substituent")
                        .with_attr("subType", "simpleSubstituent")
                        .with_attr("value", smiles)
                        .with_attr("labels", "none")
                        .with_text(tok.text.clone());
                    let mut sub = Element::new(Tag::Substituent).with_child(group);
                    if self.skip_hyphen() {
                        sub.children.push(hyphen());
                    }
                    let (locs, mult) = pending.take_prefixes();
                    place_raw(&mut sub, &mut pending, false);
                    parts.extend(multiply(sub, locs, mult)?);
                }
                _ => {
                    let stem = self.stem(&mut pending)?;
                    if stem.inline {
                        let mut sub = Element::new(Tag::Substituent).with_child(stem.group);
                        sub.children.extend(stem.suffixes);
                        if self.skip_hyphen() {
                            sub.children.push(hyphen());
                        }
                        let (locs, mult) = pending.take_prefixes();
                        place_raw(&mut sub, &mut pending, true);
                        parts.extend(multiply(sub, locs, mult)?);
                    } else {
                        if stem.substituent_only {
                            return structural("ring name is only valid as a substituent");
                        }
                        if in_bracket {
                            return structural("parent structure inside brackets");
                        }
                        if pending.locants.is_some() || pending.multiplier.is_some() {
                            return structural("locants or multiplier without a target");
                        }
                        let mut root = Element::new(Tag::Root).with_child(stem.group);
                        root.children.extend(stem.suffixes);
                        place_raw(&mut root, &mut pending, true);
                        parts.push(root);
                        if self.pos != self.tokens.len() {
                            return structural(format!(
                                "text after parent: '{}'",
                                self.tokens[self.pos].text
                            ));
                        }
                        break;
                    }
                }
            }
        }
        if !pending.stereo.is_empty() || !pending.hydro.is_empty() || pending.locants.is_some() {
            return structural("dangling prefixes at end of a name part");
        }
        Ok(parts)
    }

    /// True when a Hantzsch-Widman heteroatom prefix run starts `k` tokens ahead.
    fn hw_ahead(&self, k: usize) -> bool {
        let mut i = k;
        if self.peek_kind_at(i) == Some(TokenClass::Multiplier) {
            i += 1;
        }
        self.peek_kind_at(i) == Some(TokenClass::HeteroAtomPrefix)
    }

    fn hydro(&mut self, tok: &Token, pending: &mut Pending) -> Result<Vec<Element>> {
        if let Some(locs) = &tok.locants {
            let h = Element::new(Tag::Hydro)
                .with_attr("value", "indicatedHydrogen")
                .with_attr("locant", locs[0].to_string())
                .with_text(tok.text.trim_end_matches('-'));
            return Ok(vec![h]);
        }
        let (locs, mult) = pending.take_prefixes();
        let locs = locs.ok_or_else(|| {
            ParseTreeError::StructuralError("hydro prefix without locants".into())
        })?;
        let count = mult.unwrap_or(1);
        if locs.len() != count {
            return structural(format!("{} locants for {count} hydro prefixes", locs.len()));
        }
        Ok(locs
            .iter()
            .map(|l| {
                let mut h = Element::new(Tag::Hydro).with_attr("value", "hydro");
                if count > 1 {
                    h.set_attr("multiplied", "multiplied");
                }
                h.with_attr("locant", l.to_string()).with_text("hydro")
            })
            .collect())
    }

    fn stem(&mut self, pending: &mut Pending) -> Result<Stem> {
        let tok = self
            .peek()
            .ok_or_else(|| ParseTreeError::StructuralError("name ends early".into()))?;
        let mut substituent_only = false;
        let (mut group, chain_like) = match tok.kind {
            TokenClass::AlkaneStem => {
                self.pos += 1;
                let n = carbons(tok)?;
                let g = Element::new(Tag::Group)
                    .with_attr("type", "chain")
                    .with_attr("subType", "alkaneStem")
                    .with_attr("value", "C".repeat(n))
                    .with_attr("labels", "numeric")
                    .with_text(tok.payload("stem").unwrap_or(&tok.text));
                (g, true)
            }
            TokenClass::RingStem if self.peek_kind_at(2) != Some(TokenClass::FusionLetter) => {
                self.pos += 1;
                let alk = self.expect(TokenClass::AlkaneStem)?;
                let n = carbons(alk)?;
                if n < 3 {
                    return structural("ring of fewer than three atoms");
                }
                let ring = cycloalkane(alk, n, false);
                (ring.element(Tag::Group), true)
            }
            TokenClass::RetainedRingName => {
                substituent_only = tok.payload("substituentOnly") == Some("1");
                (self.ring_unit(pending)?.element(Tag::Group), false)
            }
            _ => (self.ring_unit(pending)?.element(Tag::Group), false),
        };
        let mut suffixes = Vec::new();
        let mut inline = false;
        let mut saturated = true;
        if chain_like && self.peek_kind() == Some(TokenClass::SaturationSuffix) {
            self.pos += 1;
        }
        // Unsaturators and the closing suffix.
        loop {
            let save = self.pos;
            let had_hyphen = self.skip_hyphen();
            let locs = if self.peek_kind() == Some(TokenClass::Locant) {
                self.next().unwrap().locants.clone()
            } else {
                None
            };
            let mult = match self.peek() {
                Some(t) if t.kind == TokenClass::Multiplier => {
                    self.pos += 1;
                    Some(count_of(t)?)
                }
                _ => None,
            };
            match self.peek() {
                Some(t) if t.kind == TokenClass::Unsaturator && chain_like => {
                    self.pos += 1;
                    if had_hyphen {
                        mark_following_hyphen(&mut group);
                    }
                    saturated = false;
                    let order = t.payload("order").unwrap_or("2").to_string();
                    for (i, l) in expand(locs, mult, &t.text)?.into_iter().enumerate() {
                        let mut u =
                            Element::new(Tag::Unsaturator).with_attr("value", order.clone());
                        if mult.unwrap_or(1) > 1 {
                            u.set_attr("multiplied", "multiplied");
                        }
                        if let Some(l) = l {
                            u.set_attr("locant", l.to_string());
                        }
                        let _ = i;
                        group.children.push(u.with_text(t.text.clone()));
                    }
                }
                Some(t)
                    if matches!(
                        t.kind,
                        TokenClass::InlineSuffix | TokenClass::PrincipalSuffix
                    ) =>
                {
                    self.pos += 1;
                    if had_hyphen {
                        mark_following_hyphen(&mut group);
                    }
                    inline = t.kind == TokenClass::InlineSuffix;
                    let ty = if inline { "inline" } else { "root" };
                    for l in expand(locs, mult, &t.text)? {
                        let mut s = Element::new(Tag::Suffix)
                            .with_attr("type", ty)
                            .with_attr("value", t.text.clone());
                        if mult.unwrap_or(1) > 1 {
                            s.set_attr("multiplied", "multiplied");
                        }
                        if let Some(l) = l {
                            s.set_attr("locant", l.to_string());
                        }
                        suffixes.push(s.with_text(t.text.clone()));
                    }
                    break;
                }
                _ => {
                    self.pos = save;
                    break;
                }
            }
        }
        if !group.children.is_empty() {
            group.text = None;
        }
        if inline && saturated && group.attr("type") == Some("chain") {
            group.set_attr("usableAsAJoiner", "yes");
            group.set_attr("resolved", "yes");
        }
        Ok(Stem {
            group,
            suffixes,
            inline,
            substituent_only,
        })
    }

    /// Retained, Hantzsch-Widman, fused, bridged or spiro ring construct.
    fn ring_unit(&mut self, pending: &mut Pending) -> Result<Ring> {
        let tok = self
            .peek()
            .ok_or_else(|| ParseTreeError::StructuralError("ring expected".into()))?;
        match tok.kind {
            TokenClass::SpiroKeyword => self.spiro(),
            TokenClass::BridgePrefix => {
                let locs = pending.locants.take().ok_or_else(|| {
                    ParseTreeError::StructuralError("bridge prefix without locants".into())
                })?;
                self.bridge(locs)
            }
            TokenClass::Locant if self.peek_kind_at(1) == Some(TokenClass::BridgePrefix) => {
                self.pos += 1;
                self.bridge(tok.locants.clone().unwrap_or_default())
            }
            TokenClass::FusionPrefix => {
                self.pos += 1;
                let attached = retained(tok, "fusionRing", &tok.text)?;
                self.fusion(attached, pending)
            }
            TokenClass::RingStem if self.peek_kind_at(2) == Some(TokenClass::FusionLetter) => {
                self.pos += 1;
                let alk = self.expect(TokenClass::AlkaneStem)?;
                let n = carbons(alk)?;
                let attached = cycloalkane(alk, n, true);
                self.fusion(attached, pending)
            }
            _ => self.simple_ring(pending),
        }
    }

    /// Retained ring or Hantzsch-Widman ring.
    fn simple_ring(&mut self, pending: &mut Pending) -> Result<Ring> {
        let tok = self
            .peek()
            .ok_or_else(|| ParseTreeError::StructuralError("ring expected".into()))?;
        match tok.kind {
            TokenClass::RetainedRingName => {
                self.pos += 1;
                retained(tok, "ring", tok.payload("stem").unwrap_or(&tok.text))
            }
            TokenClass::Locant if self.hw_ahead(1) => {
                self.pos += 1;
                let mut p = Pending {
                    locants: tok.locants.clone(),
                    ..Pending::default()
                };
                self.hantzsch_widman(&mut p)
            }
            TokenClass::Multiplier | TokenClass::HeteroAtomPrefix => self.hantzsch_widman(pending),
            TokenClass::RingStem => {
                self.pos += 1;
                let alk = self.expect(TokenClass::AlkaneStem)?;
                let n = carbons(alk)?;
                if self.peek_kind() == Some(TokenClass::SaturationSuffix) {
                    self.pos += 1;
                }
                Ok(cycloalkane(alk, n, false))
            }
            _ => structural(format!("'{}' does not start a ring", tok.text)),
        }
    }

    fn hantzsch_widman(&mut self, pending: &mut Pending) -> Result<Ring> {
        let mut atoms: Vec<(Chem, String, bool)> = Vec::new();
        let mut name = String::new();
        let mut mult = pending.multiplier.take();
        loop {
            let t = self
                .next()
                .ok_or_else(|| ParseTreeError::StructuralError("unfinished heterocycle".into()))?;
            match t.kind {
                TokenClass::Multiplier => {
                    mult = Some(count_of(t)?);
                    name.push_str(&t.text);
                }
                TokenClass::HeteroAtomPrefix => {
                    let el = t
                        .payload("element")
                        .and_then(Chem::from_symbol)
                        .unwrap_or(Chem::N);
                    let k = mult.take().unwrap_or(1);
                    for _ in 0..k {
                        atoms.push((el, t.text.clone(), k > 1));
                    }
                    name.push_str(&t.text);
                }
                TokenClass::HantzschWidmanStem => {
                    name.push_str(t.text.trim_end_matches('e'));
                    let size: usize = t.payload("size").and_then(|s| s.parse().ok()).unwrap_or(6);
                    let mancude = t.payload("saturated") != Some("1");
                    let locs: Vec<String> = match pending.locants.take() {
                        Some(l) if l.len() == atoms.len() => {
                            l.iter().map(|x| x.to_string()).collect()
                        }
                        Some(l) => {
                            return structural(format!(
                                "{} locants for {} heteroatoms",
                                l.len(),
                                atoms.len()
                            ))
                        }
                        None if atoms.len() == 1 => vec!["1".to_string()],
                        None => return structural("heteroatom positions are not given"),
                    };
                    let skeleton = RingComponent::carbocycle(size, mancude);
                    let subst: Vec<(Chem, String)> = atoms
                        .iter()
                        .zip(&locs)
                        .map(|((e, _, _), l)| (*e, l.clone()))
                        .collect();
                    let component = apply_heteroatom_substitution(&skeleton, &subst)?;
                    let children = atoms
                        .iter()
                        .zip(&locs)
                        .map(|((e, text, multiplied), l)| {
                            let mut h =
                                Element::new(Tag::Heteroatom).with_attr("value", e.symbol());
                            if *multiplied {
                                h.set_attr("multiplied", "multiplied");
                            }
                            h.with_attr("locant", l.clone())
                                .with_attr("resolved", "yes")
                                .with_text(text.clone())
                        })
                        .collect();
                    return Ok(Ring {
                        attrs: vec![
                            ("type", "ring".into()),
                            ("subType", "hantzschWidman".into()),
                            ("value", skeleton.value.clone()),
                            ("labels", hw_labels(size)),
                        ],
                        children,
                        text: None,
                        component: Some(component),
                        name,
                    });
                }
                _ => return structural(format!("unexpected '{}' in heterocycle name", t.text)),
            }
        }
    }

    fn fusion(&mut self, attached: Ring, pending: &mut Pending) -> Result<Ring> {
        let letter = self.expect(TokenClass::FusionLetter)?;
        let desc = FusionDescriptor::parse(&letter.text).ok_or_else(|| {
            ParseTreeError::StructuralError(format!("bad fusion descriptor {}", letter.text))
        })?;
        let base = self.simple_ring(pending)?;
        let (component, map) = resolve_fusion(attached.component()?, base.component()?, &desc)?;
        let value = format!("{}[{}]{}", attached.name, desc.text(), base.name);
        let labels = Element::new(Tag::FusedRingLabels)
            .with_attr("labels", component.labels.to_attr())
            .with_attr("originalLabels", map.to_string());
        Ok(Ring {
            attrs: vec![
                ("type", "ring".into()),
                ("subType", "fusedRing".into()),
                ("value", value.clone()),
            ],
            children: vec![
                base.element(Tag::FusedChildRing),
                attached.element(Tag::FusedChildRing),
                labels,
            ],
            text: None,
            component: Some(component),
            name: value,
        })
    }

    fn bridge(&mut self, locs: Vec<Locant>) -> Result<Ring> {
        let tok = self.expect(TokenClass::BridgePrefix)?;
        if locs.len() != 2 {
            return structural(format!("bridge needs two locants, found {}", locs.len()));
        }
        let n: usize = tok
            .payload("atoms")
            .and_then(|s| s.parse().ok())
            .unwrap_or(1);
        let stem = tok.payload("stem").unwrap_or(&tok.text).to_string();
        let mut empty = Pending::default();
        let parent = self.ring_unit(&mut empty)?;
        let pc = parent.component()?;
        let (l1, l2) = (locs[0].to_string(), locs[1].to_string());
        let spec = resolve_bridge(pc, n, (&l1, &l2))?;
        let child = Element::new(Tag::BridgeChild)
            .with_attr("type", "chain")
            .with_attr("subType", "alkaneStem")
            .with_attr("value", spec.value())
            .with_attr("labels", spec.bridge_labels.join("/"))
            .with_attr("bridgeLocants", format!("{l1},{l2}"))
            .with_text(stem.clone());
        let component = bridged_component(pc, &spec);
        let value = format!("{stem}{}", parent.name);
        Ok(Ring {
            attrs: vec![
                ("type", "ring".into()),
                ("subType", "bridgeSystem".into()),
                ("value", value.clone()),
            ],
            children: vec![parent.element(Tag::BridgeParent), child],
            text: None,
            component: Some(component),
            name: value,
        })
    }

    fn spiro(&mut self) -> Result<Ring> {
        self.expect(TokenClass::SpiroKeyword)?;
        let open = self.expect(TokenClass::OpenBracket)?;
        if open.text != "[" {
            return structural("spiro components must be in square brackets");
        }
        let mut comps = vec![self.ring_unit(&mut Pending::default())?];
        let mut junctions = Vec::new();
        while self.peek_kind() != Some(TokenClass::CloseBracket) {
            self.skip_hyphen();
            let loc = self.expect(TokenClass::Locant)?;
            let locs = loc.locants.clone().unwrap_or_default();
            if locs.len() != 2 {
                return structural("each spiro junction needs two locants");
            }
            junctions.push(locs);
            comps.push(self.ring_unit(&mut Pending::default())?);
        }
        self.expect(TokenClass::CloseBracket)?;
        if comps.len() < 2 {
            return structural("spiro system with one component");
        }
        let components: Vec<RingComponent> = comps
            .iter()
            .map(|c| c.component().cloned())
            .collect::<Result<_>>()?;
        let pairs: Vec<(String, String)> = junctions
            .iter()
            .map(|l| (l[0].to_string(), l[1].to_string()))
            .collect();
        crate::ring_topology::resolve_spiro(&components, &pairs)?;
        let identical = comps.windows(2).all(|w| w[0].name == w[1].name);
        let value = format!(
            "spiro, {}",
            comps
                .iter()
                .map(|c| c.name.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
        let mut children = Vec::new();
        for (i, c) in comps.iter().enumerate() {
            if i > 0 {
                children
                    .push(Element::new(Tag::SpiroLocant).with_text(locant_text(&junctions[i - 1])));
            }
            children.push(c.element(Tag::SpiroSystemComponent));
        }
        Ok(Ring {
            attrs: vec![
                ("type", "spiro system".into()),
                (
                    "subType",
                    if identical {
                        "Identical Polycyclic"
                    } else {
                        "Non-Identical Polycyclic"
                    }
                    .into(),
                ),
                ("value", value.clone()),
            ],
            children,
            text: None,
            component: None,
            name: value,
        })
    }
}

fn bridged_component(
    parent: &RingComponent,
    spec: &crate::ring_topology::BridgeSpec,
) -> RingComponent {
    let mut out = parent.clone();
    let base = out.atoms.len();
    let k = spec.bridge_labels.len();
    // Bridge atoms are appended in ascending label order.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| spec.bridge_labels[i].parse::<u32>().unwrap_or(0));
    let mut index = vec![0; k];
    for (slot, &i) in order.iter().enumerate() {
        index[i] = base + slot;
        out.atoms.push(crate::ring_topology::RingAtom {
            element: Chem::C,
            aromatic: false,
        });
    }
    let mut path = vec![spec.heads.0];
    path.extend(index.iter().copied());
    path.push(spec.heads.1);
    for w in path.windows(2) {
        out.bonds.push((w[0].min(w[1]), w[0].max(w[1])));
    }
    out.bonds.sort();
    out.labels = spec.combined.clone();
    out
}

fn retained(tok: &Token, sub_type: &str, text: &str) -> Result<Ring> {
    let smiles = tok.payload("smiles").unwrap_or_default();
    let labels_attr = tok.payload("labels").unwrap_or("numeric");
    let n = crate::molgraph::parse_raw(smiles)
        .map_err(|e| ParseTreeError::StructuralError(e.to_string()))?
        .atom_count();
    let component = RingComponent::from_template(smiles, LabelScheme::from_attr(labels_attr, n))?;
    let mut attrs: Vec<(&'static str, String)> = vec![
        ("type", "ring".into()),
        ("subType", sub_type.into()),
        ("value", smiles.into()),
        ("labels", labels_attr.into()),
    ];
    for key in ["fusedRing1", "fusedRing2", "originalLabels"] {
        if let Some(v) = tok.payload(key) {
            attrs.push((key, v.into()));
        }
    }
    Ok(Ring {
        attrs,
        children: Vec::new(),
        text: Some(text.to_string()),
        component: Some(component),
        name: text.to_string(),
    })
}

fn cycloalkane(alk: &Token, n: usize, conjugated: bool) -> Ring {
    let stem = alk.payload("stem").unwrap_or(&alk.text).to_string();
    let mut attrs: Vec<(&'static str, String)> = vec![
        ("type", "ring".into()),
        ("subType", "alkaneStem".into()),
        ("value", format!("C1{}1", "C".repeat(n - 1))),
        ("labels", "numeric".into()),
    ];
    if conjugated {
        attrs.push(("conjugated", "true".into()));
    }
    Ring {
        attrs,
        children: Vec::new(),
        text: Some(stem.clone()),
        component: Some(RingComponent::carbocycle(n, conjugated)),
        name: stem,
    }
}

fn carbons(tok: &Token) -> Result<usize> {
    tok.payload("carbons")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| {
            ParseTreeError::StructuralError(format!("stem '{}' has no carbon count", tok.text))
        })
}

fn count_of(tok: &Token) -> Result<usize> {
    tok.payload("count")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| {
            ParseTreeError::StructuralError(format!("multiplier '{}' has no count", tok.text))
        })
}

fn hyphen() -> Element {
    Element::new(Tag::Hyphen)
        .with_attr("value", "-")
        .with_text("-")
}

/// A hyphen between an unsaturator and a following locant is recorded on the unsaturator.
fn mark_following_hyphen(group: &mut Element) {
    if let Some(u) = group
        .children
        .iter_mut()
        .rev()
        .find(|c| c.tag == Tag::Unsaturator)
    {
        u.set_attr("subsequentUnsemanticToken", "-");
    }
}

/// Pairs each multiplied item with its locant, if any.
fn expand(
    locs: Option<Vec<Locant>>,
    mult: Option<usize>,
    what: &str,
) -> Result<Vec<Option<Locant>>> {
    let count = mult.unwrap_or(1);
    match locs {
        Some(l) if l.len() == count => Ok(l.into_iter().map(Some).collect()),
        Some(l) => structural(format!("{} locants for {count} x '{what}'", l.len())),
        None => Ok(vec![None; count]),
    }
}

/// Pending stereo and hydro prefixes go to the next element made at the level.
fn place_raw(part: &mut Element, pending: &mut Pending, before_group: bool) {
    let mut front: Vec<Element> = std::mem::take(&mut pending.stereo);
    if before_group {
        front.extend(std::mem::take(&mut pending.hydro));
    }
    if !front.is_empty() {
        part.children.splice(0..0, front);
    }
}

/// Clones a substituent or bracket once per multiplied locant.
fn multiply(part: Element, locs: Option<Vec<Locant>>, mult: Option<usize>) -> Result<Vec<Element>> {
    let items = expand(locs, mult, part.tag.as_str())?;
    let multiplied = items.len() > 1;
    Ok(items
        .into_iter()
        .map(|l| {
            let mut p = part.clone();
            if let Some(l) = l {
                p.set_attr("locant", l.to_string());
            }
            if multiplied {
                p.set_attr("multiplied", "multiplied");
            }
            p
        })
        .collect())
}

fn stereo_elements(text: &str) -> Result<Vec<Element>> {
    let body = text.trim_start_matches('(').trim_end_matches(')');
    body.split(',')
        .map(|item| {
            let (loc, d) = parse_stereo_item(item).ok_or_else(|| {
                ParseTreeError::StructuralError(format!("bad stereodescriptor {item}"))
            })?;
            let mut e = Element::new(Tag::StereoChemistry);
            if let Some(l) = loc {
                e.set_attr("locant", l.to_string());
            }
            if matches!(d, 'E' | 'Z') {
                e.set_attr("type", "EorZ");
                e.set_attr("value", d.to_string());
            } else {
                e.set_attr("type", "RorS");
                e.set_attr("value", d.to_string());
                e.set_attr("stereoGroup", "Abs");
            }
            Ok(e.with_text(item))
        })
        .collect()
}

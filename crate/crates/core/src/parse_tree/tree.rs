use std::fmt;

use serde::{Deserialize, Serialize};

/// Element names of the metadata schema.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Molecule,
    WordRule,
    Word,
    Substituent,
    Bracket,
    Root,
    Group,
    Suffix,
    Hyphen,
    StereoChemistry,
    Unsaturator,
    Heteroatom,
    Hydro,
    FusedChildRing,
    FusedRingLabels,
    SpiroSystemComponent,
    SpiroLocant,
    BridgeParent,
    BridgeChild,
}

impl Tag {
    pub const ALL: [Tag; 19] = [
        Tag::Molecule,
        Tag::WordRule,
        Tag::Word,
        Tag::Substituent,
        Tag::Bracket,
        Tag::Root,
        Tag::Group,
        Tag::Suffix,
        Tag::Hyphen,
        Tag::StereoChemistry,
        Tag::Unsaturator,
        Tag::Heteroatom,
        Tag::Hydro,
        Tag::FusedChildRing,
        Tag::FusedRingLabels,
        Tag::SpiroSystemComponent,
        Tag::SpiroLocant,
        Tag::BridgeParent,
        Tag::BridgeChild,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Molecule => "molecule",
            Tag::WordRule => "wordRule",
            Tag::Word => "word",
            Tag::Substituent => "substituent",
            Tag::Bracket => "bracket",
            Tag::Root => "root",
            Tag::Group => "group",
            Tag::Suffix => "suffix",
            Tag::Hyphen => "hyphen",
            Tag::StereoChemistry => "stereoChemistry",
            Tag::Unsaturator => "unsaturator",
            Tag::Heteroatom => "heteroatom",
            Tag::Hydro => "hydro",
            Tag::FusedChildRing => "fusedChildRing",
            Tag::FusedRingLabels => "fusedRingLabels",
            Tag::SpiroSystemComponent => "spiroSystemComponent",
            Tag::SpiroLocant => "spiroLocant",
            Tag::BridgeParent => "bridgeParent",
            Tag::BridgeChild => "bridgeChild",
        }
    }

    pub fn from_name(s: &str) -> Option<Tag> {
        Tag::ALL.iter().copied().find(|t| t.as_str() == s)
    }

    /// Schema order of attributes; attributes not listed sort after these, in insertion order.
    pub fn attribute_order(self) -> &'static [&'static str] {
        match self {
            Tag::Molecule => &["name"],
            Tag::WordRule => &["wordRule", "type", "value"],
            Tag::Word => &["type", "value"],
            Tag::Substituent | Tag::Bracket => &["locant", "multiplied"],
            Tag::Root | Tag::SpiroLocant => &[],
            Tag::Group
            | Tag::FusedChildRing
            | Tag::SpiroSystemComponent
            | Tag::BridgeParent
            | Tag::BridgeChild => &[
                "type",
                "subType",
                "value",
                "labels",
                "fusedRing1",
                "fusedRing2",
                "originalLabels",
                "usableAsAJoiner",
                "resolved",
                "conjugated",
                "bridgeLocants",
            ],
            Tag::Suffix => &["type", "value", "multiplied", "locant"],
            Tag::Hyphen => &["value"],
            Tag::StereoChemistry => &["locant", "type", "value", "stereoGroup"],
            Tag::Unsaturator => &["value", "subsequentUnsemanticToken", "multiplied", "locant"],
            Tag::Heteroatom => &["value", "multiplied", "locant", "resolved"],
            Tag::Hydro => &["value", "type", "multiplied", "locant"],
            Tag::FusedRingLabels => &["labels", "originalLabels"],
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why an element must survive every later transformation untouched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RetentionReason {
    Stereo,
    Unsaturator,
    Hydro,
    Heteroatom,
    RingDescriptor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub tag: Tag,
    attributes: Vec<(String, String)>,
    pub children: Vec<Element>,
    pub text: Option<String>,
    /// In-memory only; never serialized.
    #[serde(skip)]
    pub retained: Option<RetentionReason>,
}

impl Element {
    pub fn new(tag: Tag) -> Element {
        Element {
            tag,
            attributes: Vec::new(),
            children: Vec::new(),
            text: None,
            retained: None,
        }
    }

    pub fn with_attr(mut self, name: &str, value: impl Into<String>) -> Element {
        self.set_attr(name, value);
        self
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Element {
        self.text = Some(text.into());
        self
    }

    pub fn with_child(mut self, child: Element) -> Element {
        self.children.push(child);
        self
    }

    /// Sets an attribute, keeping schema order.
    pub fn set_attr(&mut self, name: &str, value: impl Into<String>) {
        let value = value.into();
        if let Some(slot) = self.attributes.iter_mut().find(|(k, _)| k == name) {
            slot.1 = value;
            return;
        }
        let order = self.tag.attribute_order();
        let rank = |k: &str| order.iter().position(|o| *o == k).unwrap_or(usize::MAX);
        let r = rank(name);
        let pos = if r == usize::MAX {
            self.attributes.len()
        } else {
            self.attributes
                .iter()
                .position(|(k, _)| rank(k) > r)
                .unwrap_or(self.attributes.len())
        };
        self.attributes.insert(pos, (name.to_string(), value));
    }

    pub fn remove_attr(&mut self, name: &str) -> Option<String> {
        let pos = self.attributes.iter().position(|(k, _)| k == name)?;
        Some(self.attributes.remove(pos).1)
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn attributes(&self) -> &[(String, String)] {
        &self.attributes
    }

    pub fn children_with(&self, tag: Tag) -> impl Iterator<Item = &Element> {
        self.children.iter().filter(move |c| c.tag == tag)
    }

    pub fn first_child(&self, tag: Tag) -> Option<&Element> {
        self.children.iter().find(|c| c.tag == tag)
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> Vec<&Element> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let e = out[i];
            let at = i + 1;
            for (k, c) in e.children.iter().enumerate() {
                out.insert(at + k, c);
            }
            i += 1;
        }
        out
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(Element::count).sum::<usize>()
    }
}

/// The enriched structural metadata of one name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataTree {
    pub root: Element,
}

impl MetadataTree {
    pub fn new(root: Element) -> MetadataTree {
        MetadataTree { root }
    }

    pub fn contains_tag(&self, tag: Tag) -> bool {
        self.root.walk().iter().any(|e| e.tag == tag)
    }

    /// `(tag, value, locant)` of every retained element, sorted.
    pub fn retained_triples(&self) -> Vec<(Tag, String, String)> {
        let mut v: Vec<_> = self
            .root
            .walk()
            .into_iter()
            .filter(|e| e.retained.is_some())
            .map(|e| {
                (
                    e.tag,
                    e.attr("value")
                        .or(e.text.as_deref())
                        .unwrap_or_default()
                        .to_string(),
                    e.attr("locant").unwrap_or_default().to_string(),
                )
            })
            .collect();
        v.sort();
        v
    }

    /// Navigates by child indices from the root.
    pub fn at(&self, path: &[usize]) -> Option<&Element> {
        let mut e = &self.root;
        for &i in path {
            e = e.children.get(i)?;
        }
        Some(e)
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Element> {
        let mut e = &mut self.root;
        for &i in path {
            e = e.children.get_mut(i)?;
        }
        Some(e)
    }
}

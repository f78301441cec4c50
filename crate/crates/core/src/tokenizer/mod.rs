//! Splits systematic names into classified grammar tokens.

mod grammar;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grammar::{Grammar, GrammarEntry, GrammarError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenClass {
    AlkaneStem,
    RingStem,
    RetainedRingName,
    HantzschWidmanStem,
    HeteroAtomPrefix,
    FusionPrefix,
    BridgePrefix,
    SpiroKeyword,
    Multiplier,
    GroupMultiplier,
    Locant,
    Hyphen,
    OpenBracket,
    CloseBracket,
    Unsaturator,
    SaturationSuffix,
    InlineSuffix,
    PrincipalSuffix,
    SubstituentPrefix,
    HydroPrefix,
    StereoDescriptor,
    FusionLetter,
}

impl TokenClass {
    pub fn from_name(s: &str) -> Option<TokenClass> {
        use TokenClass::*;
        Some(match s {
            "AlkaneStem" => AlkaneStem,
            "RingStem" => RingStem,
            "RetainedRingName" => RetainedRingName,
            "HantzschWidmanStem" => HantzschWidmanStem,
            "HeteroAtomPrefix" => HeteroAtomPrefix,
            "FusionPrefix" => FusionPrefix,
            "BridgePrefix" => BridgePrefix,
            "SpiroKeyword" => SpiroKeyword,
            "Multiplier" => Multiplier,
            "GroupMultiplier" => GroupMultiplier,
            "Locant" => Locant,
            "Hyphen" => Hyphen,
            "OpenBracket" => OpenBracket,
            "CloseBracket" => CloseBracket,
            "Unsaturator" => Unsaturator,
            "SaturationSuffix" => SaturationSuffix,
            "InlineSuffix" => InlineSuffix,
            "PrincipalSuffix" => PrincipalSuffix,
            "SubstituentPrefix" => SubstituentPrefix,
            "HydroPrefix" => HydroPrefix,
            "StereoDescriptor" => StereoDescriptor,
            "FusionLetter" => FusionLetter,
            _ => return None,
        })
    }

    /// Tie-break among equally long lexical matches; lower wins.
    fn priority(self) -> u8 {
        use TokenClass::*;
        match self {
            RetainedRingName => 0,
            HantzschWidmanStem => 1,
            FusionPrefix => 2,
            BridgePrefix => 3,
            SpiroKeyword => 4,
            SubstituentPrefix => 5,
            AlkaneStem => 6,
            _ => 7,
        }
    }
}

/// A position label such as `2`, `4a` or `7'`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Locant {
    pub number: u32,
    pub letter: Option<char>,
    pub primes: u32,
}

impl Locant {
    pub fn parse(s: &str) -> Option<Locant> {
        let digits: String = s.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return None;
        }
        let number: u32 = digits.parse().ok()?;
        if number == 0 {
            return None;
        }
        let mut rest = s[digits.len()..].chars().peekable();
        let letter = match rest.peek() {
            Some(c) if c.is_ascii_lowercase() => {
                let c = *c;
                rest.next();
                Some(c)
            }
            _ => None,
        };
        let mut primes = 0;
        for c in rest {
            if c == '\'' {
                primes += 1;
            } else {
                return None;
            }
        }
        Some(Locant {
            number,
            letter,
            primes,
        })
    }

    /// The locant without primes.
    pub fn unprimed(&self) -> Locant {
        Locant {
            primes: 0,
            ..self.clone()
        }
    }
}

impl fmt::Display for Locant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number)?;
        if let Some(c) = self.letter {
            write!(f, "{c}")?;
        }
        for _ in 0..self.primes {
            f.write_str("'")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenClass,
    pub locants: Option<Vec<Locant>>,
    /// Byte offsets into the (prime-normalized) name.
    pub span: (usize, usize),
    #[serde(skip)]
    pub entry: Option<Arc<GrammarEntry>>,
}

impl Token {
    pub fn payload(&self, key: &str) -> Option<&str> {
        self.entry.as_ref().and_then(|e| e.get(key))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TokenizeError {
    #[error("no grammar entry matches at position {0}")]
    UnknownToken(usize),
    #[error("unsupported nomenclature: {0}")]
    UnsupportedNomenclature(String),
    #[error("empty name")]
    Empty,
}

/// Replaces typographic primes with ASCII apostrophes.
pub fn normalize_name(name: &str) -> String {
    name.trim().replace(['′', '’'], "'").replace('″', "''")
}

pub fn tokenize(name: &str) -> Result<Vec<Token>, TokenizeError> {
    Grammar::builtin().tokenize(name)
}

impl Grammar {
    pub fn tokenize(&self, name: &str) -> Result<Vec<Token>, TokenizeError> {
        let name = normalize_name(name);
        if name.is_empty() {
            return Err(TokenizeError::Empty);
        }
        let mut search = Search {
            grammar: self,
            name: &name,
            failed: Default::default(),
            furthest: 0,
        };
        let mut out = Vec::new();
        if search.dfs(0, None, &mut out)? {
            Ok(out)
        } else {
            Err(TokenizeError::UnknownToken(search.furthest))
        }
    }
}

struct Search<'a> {
    grammar: &'a Grammar,
    name: &'a str,
    failed: std::collections::HashSet<(usize, Option<TokenClass>)>,
    furthest: usize,
}

impl<'a> Search<'a> {
    fn dfs(
        &mut self,
        pos: usize,
        prev: Option<TokenClass>,
        out: &mut Vec<Token>,
    ) -> Result<bool, TokenizeError> {
        if pos == self.name.len() {
            return Ok(true);
        }
        self.furthest = self.furthest.max(pos);
        if self.failed.contains(&(pos, prev)) {
            return Ok(false);
        }
        for cand in self.candidates(pos, prev)? {
            let end = cand.span.1;
            let kind = cand.kind;
            out.push(cand);
            if self.dfs(end, Some(kind), out)? {
                return Ok(true);
            }
            out.pop();
        }
        self.failed.insert((pos, prev));
        Ok(false)
    }

    fn candidates(
        &self,
        pos: usize,
        prev: Option<TokenClass>,
    ) -> Result<Vec<Token>, TokenizeError> {
        let rest = &self.name[pos..];
        let mut out: Vec<Token> = Vec::new();
        let tok = |text: &str, kind: TokenClass, locants: Option<Vec<Locant>>| Token {
            text: text.to_string(),
            kind,
            locants,
            span: (pos, pos + text.len()),
            entry: None,
        };
        for pattern in patterns(rest) {
            match pattern {
                Pattern::Plain(len, kind, locants) => out.push(tok(&rest[..len], kind, locants)),
                Pattern::Unsupported(feature) => {
                    return Err(TokenizeError::UnsupportedNomenclature(feature))
                }
            }
        }
        for entry in self.grammar.matches(rest) {
            if let Some(feature) = entry.unsupported_feature() {
                return Err(TokenizeError::UnsupportedNomenclature(feature.to_string()));
            }
            if let Some(after) = entry.get("after") {
                let ok = prev.is_some_and(|p| {
                    after
                        .split(',')
                        .any(|c| TokenClass::from_name(c) == Some(p))
                });
                if !ok {
                    continue;
                }
            }
            let mut t = tok(&entry.surface, entry.class.expect("lexical entry"), None);
            t.entry = Some(entry.clone());
            out.push(t);
        }
        out.sort_by(|a, b| {
            (b.text.len())
                .cmp(&a.text.len())
                .then_with(|| a.kind.priority().cmp(&b.kind.priority()))
        });
        Ok(out)
    }
}

enum Pattern {
    Plain(usize, TokenClass, Option<Vec<Locant>>),
    Unsupported(String),
}

/// Scans `digits[letter]primes` items separated by commas; returns locants and bytes consumed.
fn scan_locant_list(s: &str) -> Option<(Vec<Locant>, usize)> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    loop {
        let start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == start {
            return None;
        }
        if i < b.len() && b[i].is_ascii_lowercase() {
            // A letter belongs to the locant only if the locant ends right after it.
            let j = i + 1;
            let ends = j >= b.len() || matches!(b[j], b'\'' | b',' | b'-' | b']');
            if ends {
                i = j;
            }
        }
        while i < b.len() && b[i] == b'\'' {
            i += 1;
        }
        out.push(Locant::parse(&s[start..i])?);
        if i < b.len() && b[i] == b',' && b.get(i + 1).is_some_and(u8::is_ascii_digit) {
            i += 1;
            continue;
        }
        return Some((out, i));
    }
}

fn patterns(rest: &str) -> Vec<Pattern> {
    let b = rest.as_bytes();
    let mut out = Vec::new();
    match b[0] {
        b'-' => out.push(Pattern::Plain(1, TokenClass::Hyphen, None)),
        b'(' => {
            if let Some(len) = stereo_len(rest) {
                out.push(Pattern::Plain(len, TokenClass::StereoDescriptor, None));
            }
            out.push(Pattern::Plain(1, TokenClass::OpenBracket, None));
        }
        b')' | b']' => out.push(Pattern::Plain(1, TokenClass::CloseBracket, None)),
        b'[' => {
            if let Some(len) = fusion_letter_len(rest) {
                out.push(Pattern::Plain(len, TokenClass::FusionLetter, None));
            } else if let Some((locs, n)) = scan_locant_list(&rest[1..]) {
                if b.get(n + 1) == Some(&b']') {
                    out.push(Pattern::Plain(n + 2, TokenClass::Locant, Some(locs)));
                } else if b.get(n + 1) == Some(&b'.') {
                    out.push(Pattern::Unsupported("von Baeyer".into()));
                }
            }
            out.push(Pattern::Plain(1, TokenClass::OpenBracket, None));
        }
        c if c.is_ascii_digit() => {
            if let Some((locs, n)) = scan_locant_list(rest) {
                if b.get(n) == Some(&b'-') {
                    out.push(Pattern::Plain(
                        n + 1,
                        TokenClass::Locant,
                        Some(locs.clone()),
                    ));
                }
                if b.get(n) == Some(&b'H') && locs.len() == 1 {
                    let len = if b.get(n + 1) == Some(&b'-') {
                        n + 2
                    } else {
                        n + 1
                    };
                    out.push(Pattern::Plain(len, TokenClass::HydroPrefix, Some(locs)));
                }
            }
        }
        _ => {}
    }
    out
}

/// `(E)`, `(7'R)`, `(2E,4Z)`.
fn stereo_len(s: &str) -> Option<usize> {
    let close = s.find(')')?;
    let body = &s[1..close];
    if body.is_empty() {
        return None;
    }
    for item in body.split(',') {
        parse_stereo_item(item)?;
    }
    Some(close + 1)
}

/// Splits a stereo item like `7'R` into its optional locant and descriptor letter.
pub fn parse_stereo_item(item: &str) -> Option<(Option<Locant>, char)> {
    let d = item.chars().last()?;
    if !matches!(d, 'E' | 'Z' | 'R' | 'S') {
        return None;
    }
    let loc = &item[..item.len() - 1];
    if loc.is_empty() {
        Some((None, d))
    } else {
        Some((Some(Locant::parse(loc)?), d))
    }
}

/// `[b]` or `[5,6-b]`.
fn fusion_letter_len(s: &str) -> Option<usize> {
    let close = s.find(']')?;
    let body = &s[1..close];
    let letters = match body.rsplit_once('-') {
        Some((locs, letters)) => {
            let (_, n) = scan_locant_list(locs)?;
            if n != locs.len() {
                return None;
            }
            letters
        }
        None => body,
    };
    if letters.len() == 1 && letters.bytes().all(|c| c.is_ascii_lowercase()) {
        Some(close + 1)
    } else {
        None
    }
}

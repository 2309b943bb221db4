//! Powerset join semi-lattice over `(origin, nonce)` tags.
//!
//! An [`Element`] is a finite tag set, join is union and the order is
//! inclusion. Elements are kept as sorted, deduplicated slices so that the
//! derived `Ord` is the canonical lexicographic order used for tie-breaks.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;

pub type ProcessId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub origin: ProcessId,
    pub nonce: u32,
}

impl Tag {
    pub fn new(origin: ProcessId, nonce: u32) -> Self {
        Tag { origin, nonce }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.origin, self.nonce)
    }
}

impl FromStr for Tag {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::BadTag(s.to_string());
        let (o, k) = s.trim().split_once(':').ok_or_else(bad)?;
        Ok(Tag {
            origin: o.trim().parse().map_err(|_| bad())?,
            nonce: k.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(Arc<[Tag]>);

impl Element {
    pub fn bottom() -> Self {
        Element(Arc::from(Vec::new()))
    }

    pub fn singleton(tag: Tag) -> Self {
        Element(Arc::from(vec![tag]))
    }

    pub fn from_tags<I: IntoIterator<Item = Tag>>(tags: I) -> Self {
        let mut v: Vec<Tag> = tags.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Element(Arc::from(v))
    }

    pub fn tags(&self) -> &[Tag] {
        &self.0
    }

    pub fn is_bottom(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, tag: &Tag) -> bool {
        self.0.binary_search(tag).is_ok()
    }

    pub fn height(&self) -> usize {
        self.0.len()
    }

    pub fn join(&self, other: &Element) -> Element {
        if other.leq(self) {
            return self.clone();
        }
        if self.leq(other) {
            return other.clone();
        }
        let (a, b) = (self.tags(), other.tags());
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Element(Arc::from(out))
    }

    /// Subset test on the sorted tag lists.
    pub fn leq(&self, other: &Element) -> bool {
        let (a, b) = (self.tags(), other.tags());
        if a.len() > b.len() {
            return false;
        }
        let mut j = 0;
        for t in a {
            while j < b.len() && b[j] < *t {
                j += 1;
            }
            if j == b.len() || b[j] != *t {
                return false;
            }
            j += 1;
        }
        true
    }

    pub fn lt(&self, other: &Element) -> bool {
        self.height() < other.height() && self.leq(other)
    }

    pub fn comparable(&self, other: &Element) -> bool {
        self.leq(other) || other.leq(self)
    }
}

pub fn join(u: &Element, v: &Element) -> Element {
    u.join(v)
}

pub fn leq(u: &Element, v: &Element) -> bool {
    u.leq(v)
}

pub fn height(v: &Element) -> usize {
    v.height()
}

/// Join of any number of elements; the empty join is bottom.
pub fn join_all<'a, I: IntoIterator<Item = &'a Element>>(items: I) -> Element {
    Element::from_tags(items.into_iter().flat_map(|e| e.tags().iter().copied()))
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Element {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| ParseError::MissingBraces(s.to_string()))?;
        let mut tags = BTreeSet::new();
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let tag: Tag = part.parse()?;
            if !tags.insert(tag) {
                return Err(ParseError::DuplicateTag(tag.to_string()));
            }
        }
        Ok(Element::from_tags(tags))
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The finite tag set whose powerset is the lattice `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    tags: BTreeSet<Tag>,
}

impl Universe {
    pub fn new<I: IntoIterator<Item = Tag>>(tags: I) -> Self {
        Universe {
            tags: tags.into_iter().collect(),
        }
    }

    pub fn tags(&self) -> &BTreeSet<Tag> {
        &self.tags
    }

    /// `h(X)`: the height of the top element.
    pub fn height(&self) -> usize {
        self.tags.len()
    }

    pub fn top(&self) -> Element {
        Element::from_tags(self.tags.iter().copied())
    }

    pub fn contains(&self, v: &Element) -> bool {
        v.tags().iter().all(|t| self.tags.contains(t))
    }
}

/// Generators of a safe lattice `L(SV)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GeneratingSet {
    pub members: BTreeSet<Element>,
}

impl GeneratingSet {
    pub fn new<I: IntoIterator<Item = Element>>(members: I) -> Self {
        GeneratingSet {
            members: members.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: &Element) -> bool {
        member_of_generated(self, v)
    }

    /// Largest element of the generated lattice, bottom when empty.
    pub fn top(&self) -> Element {
        join_all(&self.members)
    }
}

/// Whether `v` is the join of some nonempty subset of `g.members`.
///
/// In a powerset lattice the candidates below `v` join to `v` exactly when
/// some subset does, so the filter-and-join test is complete.
pub fn member_of_generated(g: &GeneratingSet, v: &Element) -> bool {
    let mut below = g.members.iter().filter(|m| m.leq(v)).peekable();
    if below.peek().is_none() {
        return false;
    }
    join_all(below) == *v
}

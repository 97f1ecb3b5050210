//! Labeled domain points.
//!
//! Every point of a permutation domain carries a path of tags. Constructions
//! prepend tags: direct products prepend a block tag (`B0`), truncated wreath
//! products prepend a copy tag (`c2`). Labels are the identity of points;
//! cross-group operations match labels, never positions.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One tag in a label path.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    /// A named base point, e.g. `y1`.
    Base(String),
    /// A block index introduced by a direct product, rendered `B3`.
    Block(u32),
    /// A copy index introduced by a wreath/cons truncation, rendered `c2`.
    Copy(u32),
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Base(s) => write!(f, "{s}"),
            Tag::Block(i) => write!(f, "B{i}"),
            Tag::Copy(i) => write!(f, "c{i}"),
        }
    }
}

/// A domain point: a nonempty tag path, ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointLabel(Vec<Tag>);

impl PointLabel {
    /// A fresh base point. The name must not collide with the `B<k>`/`c<k>`
    /// tag syntax and must not contain `/`.
    pub fn base(name: &str) -> PointLabel {
        PointLabel(vec![Tag::Base(name.to_string())])
    }

    pub fn prefixed(&self, tag: Tag) -> PointLabel {
        let mut path = Vec::with_capacity(self.0.len() + 1);
        path.push(tag);
        path.extend(self.0.iter().cloned());
        PointLabel(path)
    }

    pub fn in_block(&self, block: u32) -> PointLabel {
        self.prefixed(Tag::Block(block))
    }

    pub fn in_copy(&self, copy: u32) -> PointLabel {
        self.prefixed(Tag::Copy(copy))
    }

    pub fn tags(&self) -> &[Tag] {
        &self.0
    }

    fn parse_tag(part: &str) -> Result<Tag> {
        if part.is_empty() {
            return Err(Error::Invalid("empty tag in label".into()));
        }
        let mut chars = part.chars();
        let head = chars.next().unwrap();
        let rest: &str = &part[head.len_utf8()..];
        if (head == 'B' || head == 'c')
            && !rest.is_empty()
            && rest.bytes().all(|b| b.is_ascii_digit())
        {
            let idx: u32 = rest
                .parse()
                .map_err(|_| Error::Invalid(format!("tag index out of range in `{part}`")))?;
            return Ok(if head == 'B' {
                Tag::Block(idx)
            } else {
                Tag::Copy(idx)
            });
        }
        Ok(Tag::Base(part.to_string()))
    }

    /// Parses the `/`-joined string form, e.g. `B0/c2/y1`.
    pub fn parse(s: &str) -> Result<PointLabel> {
        if s.is_empty() {
            return Err(Error::Invalid("empty label".into()));
        }
        let tags = s
            .split('/')
            .map(Self::parse_tag)
            .collect::<Result<Vec<_>>>()?;
        Ok(PointLabel(tags))
    }
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, tag) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "/")?;
            }
            write!(f, "{tag}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for PointLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PointLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        PointLabel::parse(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_roundtrip() {
        let l = PointLabel::base("y1").in_copy(2).in_block(0);
        assert_eq!(l.to_string(), "B0/c2/y1");
        assert_eq!(PointLabel::parse("B0/c2/y1").unwrap(), l);
    }

    #[test]
    fn ordering_is_numeric_on_tag_indices() {
        let a = PointLabel::base("x").in_copy(2);
        let b = PointLabel::base("x").in_copy(10);
        assert!(a < b);
    }

    #[test]
    fn rejects_empty() {
        assert!(PointLabel::parse("").is_err());
        assert!(PointLabel::parse("a//b").is_err());
    }
}

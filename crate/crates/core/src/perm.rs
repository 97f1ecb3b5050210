//! Permutations over an indexed domain.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A permutation given by its image array: position `i` holds the image of
/// point `i`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm {
    image: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm {
            image: (0..n).collect(),
        }
    }

    /// Validates that `image` is a bijection on `0..image.len()`.
    pub fn from_image(image: Vec<usize>) -> Result<Perm> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(Error::Invalid(format!(
                    "image array {image:?} is not a bijection"
                )));
            }
            seen[v] = true;
        }
        Ok(Perm { image })
    }

    /// Builds a permutation of `0..n` from disjoint cycles. Convenience for
    /// fixtures and tests.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Perm> {
        let mut image: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for w in 0..cycle.len() {
                let from = cycle[w];
                let to = cycle[(w + 1) % cycle.len()];
                if from >= n || to >= n {
                    return Err(Error::Invalid(format!(
                        "cycle point out of range in {cycle:?}"
                    )));
                }
                image[from] = to;
            }
        }
        Perm::from_image(image)
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `a.compose(b)` applies `b` first: `(a ∘ b)(x) = a(b(x))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut image = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            image[v] = i;
        }
        Perm { image }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// The permutation written in cycle notation, identity as `()`.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut done = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if done[start] || self.image[start] == start {
                done[start] = true;
                continue;
            }
            let mut cycle = Vec::new();
            let mut j = start;
            while !done[j] {
                cycle.push(j);
                done[j] = true;
                j = self.image[j];
            }
            cycles.push(cycle);
        }
        cycles
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for cycle in cycles {
            write!(f, "(")?;
            for (i, p) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl Serialize for Perm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.image.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Perm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let image = Vec::<usize>::deserialize(deserializer)?;
        Perm::from_image(image).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_applies_right_factor_first() {
        // a = (0 1), b = (1 2); (a ∘ b)(1) = a(2) = 2, (a ∘ b)(2) = a(1) = 0.
        let a = Perm::from_cycles(3, &[&[0, 1]]).unwrap();
        let b = Perm::from_cycles(3, &[&[1, 2]]).unwrap();
        let ab = a.compose(&b);
        assert_eq!(ab.image(), &[1, 2, 0]);
    }

    #[test]
    fn inverse_roundtrip() {
        let p = Perm::from_cycles(5, &[&[0, 3, 1], &[2, 4]]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        assert!(p.inverse().compose(&p).is_identity());
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Perm::from_image(vec![0, 0, 1]).is_err());
        assert!(Perm::from_image(vec![0, 3]).is_err());
    }
}

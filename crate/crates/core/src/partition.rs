//! Partitions of an indexed domain, kept in canonical form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Perm;

/// A partition of `{0..n-1}`. Canonical form: `class_of[i]` is the least
/// element of the class containing `i`, so equality of partitions is plain
/// vector equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Partition {
    class_of: Vec<usize>,
}

impl Partition {
    pub fn equality(n: usize) -> Partition {
        Partition {
            class_of: (0..n).collect(),
        }
    }

    pub fn universal(n: usize) -> Partition {
        Partition {
            class_of: vec![0; n],
        }
    }

    fn canonicalize(mut parent: Vec<usize>) -> Partition {
        // Path-compress a union-find parent vector, then relabel every class
        // by its least member.
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let n = parent.len();
        let mut least = vec![usize::MAX; n];
        for i in 0..n {
            let r = root(&mut parent, i);
            if least[r] > i {
                least[r] = i;
            }
        }
        let class_of = (0..n).map(|i| least[root(&mut parent, i)]).collect();
        Partition { class_of }
    }

    /// Builds the finest partition relating every listed pair.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Partition {
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (a, b) in pairs {
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        Self::canonicalize(parent)
    }

    /// Builds a partition from explicit classes, which must tile `0..n`.
    pub fn from_classes(n: usize, classes: &[Vec<usize>]) -> Result<Partition> {
        let mut class_of = vec![usize::MAX; n];
        for class in classes {
            if class.is_empty() {
                return Err(Error::Invalid("empty partition class".into()));
            }
            let least = *class.iter().min().unwrap();
            for &p in class {
                if p >= n {
                    return Err(Error::Invalid(format!("partition point {p} out of range")));
                }
                if class_of[p] != usize::MAX {
                    return Err(Error::Invalid(format!("point {p} appears in two classes")));
                }
                class_of[p] = least;
            }
        }
        if class_of.contains(&usize::MAX) {
            return Err(Error::Invalid(
                "partition classes do not cover the domain".into(),
            ));
        }
        Ok(Partition { class_of })
    }

    pub fn size(&self) -> usize {
        self.class_of.len()
    }

    #[inline]
    pub fn class_id(&self, i: usize) -> usize {
        self.class_of[i]
    }

    pub fn same_class(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    pub fn class_count(&self) -> usize {
        self.class_of
            .iter()
            .enumerate()
            .filter(|&(i, &c)| i == c)
            .count()
    }

    /// Classes sorted by least member; within a class, members ascending.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut index_of = vec![usize::MAX; self.class_of.len()];
        for i in 0..self.class_of.len() {
            let c = self.class_of[i];
            if index_of[c] == usize::MAX {
                index_of[c] = out.len();
                out.push(Vec::new());
            }
            out[index_of[c]].push(i);
        }
        out
    }

    /// `self` refines `other`: every class of `self` lies inside a class of
    /// `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        debug_assert_eq!(self.size(), other.size());
        (0..self.size()).all(|i| other.same_class(i, self.class_of[i]))
    }

    /// The join: smallest partition coarser than both.
    pub fn join(&self, other: &Partition) -> Partition {
        let n = self.size();
        let pairs = (0..n)
            .map(|i| (i, self.class_of[i]))
            .chain((0..n).map(|i| (i, other.class_of[i])));
        Partition::from_pairs(n, pairs)
    }

    /// Whether `p` maps classes onto classes.
    pub fn is_invariant_under(&self, p: &Perm) -> bool {
        debug_assert_eq!(self.size(), p.degree());
        (0..self.size()).all(|i| {
            let c = self.class_of[i];
            self.same_class(p.apply(i), p.apply(c))
        })
    }

    /// Pushes the partition through a relabeling of the domain: point `i`
    /// becomes `map[i]` in a domain of size `new_n`. `map` must be injective.
    pub fn mapped(&self, map: &[usize], new_n: usize) -> Partition {
        let pairs = (0..self.size()).map(|i| (map[i], map[self.class_of[i]]));
        Partition::from_pairs(new_n, pairs)
    }

    /// Restricts to a subset of points (given ascending), relating two
    /// subset positions iff the underlying points share a class.
    pub fn restricted(&self, points: &[usize]) -> Partition {
        let mut pairs = Vec::new();
        for (i, &p) in points.iter().enumerate() {
            for (j, &q) in points.iter().enumerate().skip(i + 1) {
                if self.same_class(p, q) {
                    pairs.push((i, j));
                }
            }
        }
        Partition::from_pairs(points.len(), pairs)
    }
}

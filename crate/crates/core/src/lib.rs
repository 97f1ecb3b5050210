//! Symbolic hereditarily cellular group expressions and their finite
//! truncations.
//!
//! The crate provides:
//!
//! - [`permcore`]: a deterministic engine for finite permutation groups on
//!   labeled domains (breadth-first element enumeration, stabilizers,
//!   restrictions, quotients, direct and finite wreath products);
//! - [`expr`]: the expression grammar for groups built from finite groups by
//!   direct products, wreath products with Sym(ω), and the block/copy
//!   construction, with validation and rank bookkeeping;
//! - [`construct`]: truncation of expressions into concrete groups (ω ↦
//!   {0..t−1}), the block/copy/base decomposition of truncated permutations,
//!   a membership oracle, diagonal extensions, and base-group recovery;
//! - [`analysis`]: orbit-growth profiles, congruence lattices, stable
//!   algebraic closure, the width invariant, ω-partition checking, and the
//!   congruence lift used by the width argument;
//! - [`structures`]: finite relational structures with disjoint unions,
//!   truncated copies, the nested-equivalence family, automorphism groups,
//!   invariant-relation expansions, homogenizability and boundedness scans;
//! - [`reducts`]: the lattice of groups between a given group and the full
//!   symmetric group, the finite oracle for reduct counting.

pub mod analysis;
pub mod construct;
pub mod error;
pub mod expr;
pub mod label;
pub mod partition;
pub mod perm;
pub mod permcore;
pub mod reducts;
pub mod structures;

pub use error::{Error, Result};
pub use label::{PointLabel, Tag};
pub use partition::Partition;
pub use perm::Perm;
pub use permcore::{FinPermGroup, RestrictMode, StabMode, SubgroupRelation, DEFAULT_ELEM_CAP};

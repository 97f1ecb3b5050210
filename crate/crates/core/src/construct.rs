//! Truncation of expressions into concrete groups and the block/copy/base
//! calculus on the truncated domain.
//!
//! A truncation replaces ω by `{0..t−1}` uniformly at every `WreathOmega` and
//! `Cons` node. The truncated domain carries two nested partitions: `nabla`
//! (one class per block, plus the finite fixed part) and `delta` (one class
//! per block copy). Copy 0 is the distinguished copy: core generators act
//! there, and base recovery reads the action at the all-zero copy vector.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{self, ConsData, GroupExpr};
use crate::label::PointLabel;
use crate::partition::Partition;
use crate::perm::Perm;
use crate::permcore::{FinPermGroup, RestrictMode};

/// Block/copy bookkeeping for one truncated point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CopyInfo {
    pub block: usize,
    pub copy: usize,
    pub base: PointLabel,
}

/// The block/copy data induced on a truncated domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationMeta {
    t: usize,
    /// Number of blocks (the finite fixed part is block 0).
    k: usize,
    /// The finite fixed part, as labels of the truncated domain.
    k_part: Vec<PointLabel>,
    /// The base domain Y = Y0 ⊔ Y1 ⊔ … ⊔ Yk, sorted.
    base_domain: Vec<PointLabel>,
    base_y0: Vec<PointLabel>,
    /// Base labels per block; `blocks[i-1]` is Yi.
    blocks: Vec<Vec<PointLabel>>,
    /// Block index of each base-domain position (0 for Y0).
    block_of_base: Vec<usize>,
    nabla: Partition,
    delta: Partition,
    copy_of: Vec<CopyInfo>,
    point_at: BTreeMap<(PointLabel, usize), usize>,
    domain: Vec<PointLabel>,
}

impl TruncationMeta {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn block_count(&self) -> usize {
        self.k
    }

    pub fn k_part(&self) -> &[PointLabel] {
        &self.k_part
    }

    pub fn base_domain(&self) -> &[PointLabel] {
        &self.base_domain
    }

    pub fn base_y0(&self) -> &[PointLabel] {
        &self.base_y0
    }

    pub fn blocks(&self) -> &[Vec<PointLabel>] {
        &self.blocks
    }

    pub fn nabla(&self) -> &Partition {
        &self.nabla
    }

    pub fn delta(&self) -> &Partition {
        &self.delta
    }

    pub fn copy_of(&self) -> &[CopyInfo] {
        &self.copy_of
    }

    pub fn domain(&self) -> &[PointLabel] {
        &self.domain
    }

    /// The truncated point holding copy `copy` of base point `base`.
    pub fn point_at(&self, base: &PointLabel, copy: usize) -> Result<usize> {
        self.point_at
            .get(&(base.clone(), copy))
            .copied()
            .ok_or_else(|| Error::Invalid(format!("no point for ({base}, {copy})")))
    }

    pub fn base_index(&self, base: &PointLabel) -> Result<usize> {
        self.base_domain
            .binary_search(base)
            .map_err(|_| Error::Invalid(format!("label {base} not in base domain")))
    }

    fn from_parts(
        t: usize,
        base_y0: Vec<PointLabel>,
        blocks: Vec<Vec<PointLabel>>,
        points: Vec<(PointLabel, CopyInfo)>,
    ) -> Result<TruncationMeta> {
        let k = blocks.len();
        let mut base_domain: Vec<PointLabel> = base_y0.clone();
        for b in &blocks {
            base_domain.extend(b.iter().cloned());
        }
        base_domain.sort();
        let mut block_of_base = vec![0usize; base_domain.len()];
        for (i, b) in blocks.iter().enumerate() {
            for l in b {
                let pos = base_domain
                    .binary_search(l)
                    .map_err(|_| Error::Invalid(format!("block label {l} missing from base")))?;
                block_of_base[pos] = i + 1;
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].0.cmp(&points[b].0));
        let mut domain = Vec::with_capacity(points.len());
        let mut copy_of = Vec::with_capacity(points.len());
        let mut point_at = BTreeMap::new();
        for (idx, &old) in order.iter().enumerate() {
            let (label, info) = &points[old];
            point_at.insert((info.base.clone(), info.copy), idx);
            domain.push(label.clone());
            copy_of.push(info.clone());
        }
        let mut k_part = Vec::new();
        let mut nabla_classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut delta_classes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (idx, info) in copy_of.iter().enumerate() {
            if info.block == 0 {
                k_part.push(domain[idx].clone());
            }
            nabla_classes.entry(info.block).or_default().push(idx);
            delta_classes
                .entry((info.block, info.copy))
                .or_default()
                .push(idx);
        }
        let nabla = Partition::from_classes(
            domain.len(),
            &nabla_classes.values().cloned().collect::<Vec<_>>(),
        )?;
        let delta = Partition::from_classes(
            domain.len(),
            &delta_classes.values().cloned().collect::<Vec<_>>(),
        )?;
        Ok(TruncationMeta {
            t,
            k,
            k_part,
            base_domain,
            base_y0,
            blocks,
            block_of_base,
            nabla,
            delta,
            copy_of,
            point_at,
            domain,
        })
    }

    /// Block index of a base-domain position (0 for Y0).
    pub fn block_of_base(&self, base_idx: usize) -> usize {
        self.block_of_base[base_idx]
    }

    /// All copy vectors `(n_1..n_k)` with entries below t, in mixed-radix
    /// order (block 1 is the fastest digit).
    pub fn copy_vectors(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.t.pow(self.k as u32));
        let mut vec = vec![0usize; self.k];
        loop {
            out.push(vec.clone());
            let mut i = 0;
            loop {
                if i == self.k {
                    return out;
                }
                vec[i] += 1;
                if vec[i] < self.t {
                    break;
                }
                vec[i] = 0;
                i += 1;
            }
        }
    }

    fn vec_rank(&self, vec: &[usize]) -> usize {
        let mut rank = 0;
        for i in (0..self.k).rev() {
            rank = rank * self.t + vec[i];
        }
        rank
    }

    /// Meta serialized with label classes, for reports.
    pub fn to_json(&self) -> serde_json::Value {
        let classes = |p: &Partition| -> Vec<Vec<String>> {
            p.classes()
                .into_iter()
                .map(|c| c.into_iter().map(|i| self.domain[i].to_string()).collect())
                .collect()
        };
        serde_json::json!({
            "t": self.t,
            "k": self.k,
            "y0": self.k_part.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "nabla": classes(&self.nabla),
            "delta": classes(&self.delta),
            "base_domain": self.base_domain.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "copy_of": self.copy_of.iter().enumerate().map(|(i, c)| serde_json::json!({
                "point": self.domain[i].to_string(),
                "block": c.block,
                "copy": c.copy,
                "base": c.base.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Truncates an expression at size t: ω ↦ {0..t−1} at every node.
pub fn truncate(e: &GroupExpr, t: usize) -> Result<(FinPermGroup, TruncationMeta)> {
    if t == 0 {
        return Err(Error::Invalid("truncation size must be ≥ 1".into()));
    }
    let violations = expr::validate(e);
    if !violations.is_empty() {
        return Err(Error::InvalidExpr(format!("{violations:?}")));
    }
    truncate_valid(e, t)
}

fn truncate_valid(e: &GroupExpr, t: usize) -> Result<(FinPermGroup, TruncationMeta)> {
    match e {
        GroupExpr::Finite(g) => {
            let points = g
                .domain()
                .iter()
                .map(|l| {
                    (
                        l.clone(),
                        CopyInfo {
                            block: 0,
                            copy: 0,
                            base: l.clone(),
                        },
                    )
                })
                .collect();
            let meta = TruncationMeta::from_parts(t, g.domain().to_vec(), vec![], points)?;
            Ok((g.clone(), meta))
        }
        GroupExpr::DirectProduct(parts) => {
            let truncs = parts
                .iter()
                .map(|p| truncate_valid(p, t))
                .collect::<Result<Vec<_>>>()?;
            let group = FinPermGroup::direct_product(
                &truncs.iter().map(|(g, _)| g.clone()).collect::<Vec<_>>(),
            )?;
            let mut base_y0 = Vec::new();
            let mut blocks = Vec::new();
            let mut points = Vec::new();
            let mut block_offset = 0usize;
            for (j, (_, meta)) in truncs.iter().enumerate() {
                let tag = j as u32;
                base_y0.extend(meta.base_y0.iter().map(|l| l.in_block(tag)));
                for b in &meta.blocks {
                    blocks.push(b.iter().map(|l| l.in_block(tag)).collect());
                }
                for (idx, info) in meta.copy_of.iter().enumerate() {
                    let block = if info.block == 0 {
                        0
                    } else {
                        block_offset + info.block
                    };
                    points.push((
                        meta.domain[idx].in_block(tag),
                        CopyInfo {
                            block,
                            copy: info.copy,
                            base: info.base.in_block(tag),
                        },
                    ));
                }
                block_offset += meta.k;
            }
            base_y0.sort();
            let meta = TruncationMeta::from_parts(t, base_y0, blocks, points)?;
            debug_assert_eq!(meta.domain(), group.domain());
            Ok((group, meta))
        }
        GroupExpr::WreathOmega(inner) => {
            let (inner_g, _) = truncate_valid(inner, t)?;
            let group = FinPermGroup::wreath_finite(&inner_g, t)?;
            let mut points = Vec::new();
            for c in 0..t {
                for l in inner_g.domain() {
                    points.push((
                        l.in_copy(c as u32),
                        CopyInfo {
                            block: 1,
                            copy: c,
                            base: l.clone(),
                        },
                    ));
                }
            }
            let meta =
                TruncationMeta::from_parts(t, vec![], vec![inner_g.domain().to_vec()], points)?;
            debug_assert_eq!(meta.domain(), group.domain());
            Ok((group, meta))
        }
        GroupExpr::Cons(cons) => truncate_cons(cons, t),
    }
}

/// Truncation of a single `Cons` node. Generators follow the three families:
/// copy transpositions per block, core generators on copy 0, and diagonal
/// copies of the base-group generators.
pub fn truncate_cons(cons: &ConsData, t: usize) -> Result<(FinPermGroup, TruncationMeta)> {
    if t == 0 {
        return Err(Error::Invalid("truncation size must be ≥ 1".into()));
    }
    let mut points = Vec::new();
    for l in &cons.y0 {
        points.push((
            l.in_copy(0),
            CopyInfo {
                block: 0,
                copy: 0,
                base: l.clone(),
            },
        ));
    }
    let mut blocks = Vec::new();
    for (bi, part) in cons.parts.iter().enumerate() {
        blocks.push(part.domain().to_vec());
        for c in 0..t {
            for l in part.domain() {
                points.push((
                    l.in_copy(c as u32),
                    CopyInfo {
                        block: bi + 1,
                        copy: c,
                        base: l.clone(),
                    },
                ));
            }
        }
    }
    let mut y0_sorted = cons.y0.clone();
    y0_sorted.sort();
    let meta = TruncationMeta::from_parts(t, y0_sorted, blocks, points)?;
    let n = meta.domain.len();

    let mut gens: Vec<Perm> = Vec::new();
    // Copy transpositions (0 c) per block.
    for part in &cons.parts {
        for c in 1..t {
            let mut image: Vec<usize> = (0..n).collect();
            for l in part.domain() {
                let p0 = meta.point_at(l, 0)?;
                let pc = meta.point_at(l, c)?;
                image[p0] = pc;
                image[pc] = p0;
            }
            gens.push(Perm::from_image(image)?);
        }
    }
    // Core generators on copy 0.
    for part in &cons.parts {
        for g in part.gens() {
            let mut image: Vec<usize> = (0..n).collect();
            for (j, l) in part.domain().iter().enumerate() {
                let from = meta.point_at(l, 0)?;
                let to = meta.point_at(&part.domain()[g.apply(j)], 0)?;
                image[from] = to;
            }
            gens.push(Perm::from_image(image)?);
        }
    }
    // Diagonal copies of the base-group generators.
    for tau in cons.h.gens() {
        gens.push(diagonal_perm(&meta, tau)?);
    }
    let cap = cons
        .parts
        .iter()
        .map(|p| p.elem_cap())
        .chain(std::iter::once(cons.h.elem_cap()))
        .max()
        .unwrap();
    let group = FinPermGroup::with_cap(meta.domain.clone(), gens, cap)?;
    Ok((group, meta))
}

/// The permutation τ*: acts as τ on the base coordinate of every copy,
/// keeping every copy index fixed.
fn diagonal_perm(meta: &TruncationMeta, tau: &Perm) -> Result<Perm> {
    let n = meta.domain.len();
    if tau.degree() != meta.base_domain.len() {
        return Err(Error::Invalid(
            "diagonal permutation must act on the base domain".into(),
        ));
    }
    let mut image: Vec<usize> = (0..n).collect();
    for (idx, info) in meta.copy_of.iter().enumerate() {
        let b = meta.base_index(&info.base)?;
        let target = &meta.base_domain[tau.apply(b)];
        image[idx] = meta.point_at(target, info.copy)?;
    }
    Perm::from_image(image)
}

/// The block permutation, per-block copy maps, and base-action table of a
/// block-respecting permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsDecomposition {
    /// `phi[i]` is the image block of block i; `phi[0] = 0`.
    pub phi: Vec<usize>,
    /// `psi[i-1][n]` is the image copy of copy n of block i.
    pub psi: Vec<Vec<usize>>,
    /// Base actions indexed by copy-vector rank.
    rho: Vec<Perm>,
    t: usize,
    k: usize,
}

impl ConsDecomposition {
    /// ρ at a copy vector `(n_1..n_k)`.
    pub fn rho_at(&self, meta: &TruncationMeta, vec: &[usize]) -> &Perm {
        &self.rho[meta.vec_rank(vec)]
    }

    /// Applies ψ to a copy vector: component φ(i) of the result is
    /// `psi_i(n_i)`.
    pub fn psi_map_vec(&self, vec: &[usize]) -> Vec<usize> {
        let mut out = vec![0usize; self.k];
        for i in 1..=self.k {
            out[self.phi[i] - 1] = self.psi[i - 1][vec[i - 1]];
        }
        out
    }

    /// Text table: the block permutation row, one copy-map row per block,
    /// and the base action per copy vector.
    pub fn render(&self, meta: &TruncationMeta) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "phi: {:?}", self.phi);
        for (i, copies) in self.psi.iter().enumerate() {
            let _ = writeln!(out, "psi[block {}]: {copies:?}", i + 1);
        }
        for vec in meta.copy_vectors() {
            let rho = self.rho_at(meta, &vec);
            let images: Vec<String> = meta
                .base_domain
                .iter()
                .enumerate()
                .map(|(b, l)| format!("{l}->{}", meta.base_domain[rho.apply(b)]))
                .collect();
            let _ = writeln!(out, "rho{vec:?}: {}", images.join(" "));
        }
        out
    }
}

/// Splits a permutation of the truncated domain into its block permutation,
/// copy maps, and base-action table. Errors when the permutation does not
/// preserve the block structure.
pub fn decompose(sigma: &Perm, meta: &TruncationMeta) -> Result<ConsDecomposition> {
    let n = meta.domain.len();
    if sigma.degree() != n {
        return Err(Error::NotBlockRespecting(
            "degree does not match the truncated domain".into(),
        ));
    }
    for l in &meta.k_part {
        let idx = meta
            .domain
            .binary_search(l)
            .map_err(|_| Error::Invalid(format!("missing fixed-part label {l}")))?;
        if meta.copy_of[sigma.apply(idx)].block != 0 {
            return Err(Error::NotBlockRespecting(format!(
                "{l} leaves the finite fixed part"
            )));
        }
    }
    if !meta.nabla.is_invariant_under(sigma) {
        return Err(Error::NotBlockRespecting("nabla is not preserved".into()));
    }
    if !meta.delta.is_invariant_under(sigma) {
        return Err(Error::NotBlockRespecting("delta is not preserved".into()));
    }
    let k = meta.k;
    let t = meta.t;
    let mut phi = vec![0usize; k + 1];
    let mut psi = Vec::with_capacity(k);
    for (i, block) in meta.blocks.iter().enumerate() {
        let first = &block[0];
        let image_info = &meta.copy_of[sigma.apply(meta.point_at(first, 0)?)];
        phi[i + 1] = image_info.block;
        let mut copies = Vec::with_capacity(t);
        for c in 0..t {
            let img = &meta.copy_of[sigma.apply(meta.point_at(first, c)?)];
            copies.push(img.copy);
        }
        psi.push(copies);
    }
    let vectors = meta.copy_vectors();
    let mut rho = Vec::with_capacity(vectors.len());
    let base_len = meta.base_domain.len();
    for vec in &vectors {
        let mut image = vec![0usize; base_len];
        for (b, label) in meta.base_domain.iter().enumerate() {
            let block = meta.block_of_base[b];
            let copy = if block == 0 { 0 } else { vec[block - 1] };
            let img = &meta.copy_of[sigma.apply(meta.point_at(label, copy)?)];
            image[b] = meta.base_index(&img.base)?;
        }
        rho.push(Perm::from_image(image).map_err(|_| {
            Error::NotBlockRespecting("base action at a copy vector is not a bijection".into())
        })?);
    }
    Ok(ConsDecomposition {
        phi,
        psi,
        rho,
        t,
        k,
    })
}

/// Rebuilds the permutation from its decomposition; inverse of [`decompose`].
pub fn reassemble(d: &ConsDecomposition, meta: &TruncationMeta) -> Result<Perm> {
    let n = meta.domain.len();
    let mut image = vec![0usize; n];
    for (idx, info) in meta.copy_of.iter().enumerate() {
        let uniform = vec![info.copy; meta.k];
        let rho = d.rho_at(meta, &uniform);
        let b = meta.base_index(&info.base)?;
        let new_base = &meta.base_domain[rho.apply(b)];
        let new_copy = if info.block == 0 {
            0
        } else {
            d.psi[info.block - 1][info.copy]
        };
        image[idx] = meta.point_at(new_base, new_copy)?;
    }
    Perm::from_image(image)
}

/// Per-condition verdicts of the membership oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipVerdict {
    /// Fixes the finite part setwise.
    pub cond_a: bool,
    /// Preserves both block partitions.
    pub cond_b: bool,
    /// Every base action lies in the base group.
    pub cond_c: bool,
    /// All base actions agree modulo the core.
    pub cond_d: bool,
    /// First copy vector witnessing a (c) or (d) failure.
    pub failing_vector: Option<Vec<usize>>,
}

impl MembershipVerdict {
    pub fn ok(&self) -> bool {
        self.cond_a && self.cond_b && self.cond_c && self.cond_d
    }
}

/// Precomputed element sets for repeated membership checks over one
/// truncation.
pub struct ConsOracle {
    meta: TruncationMeta,
    h_elems: BTreeSet<Perm>,
    core_elems: BTreeSet<Perm>,
}

impl ConsOracle {
    pub fn new(cons: &ConsData, meta: &TruncationMeta) -> Result<ConsOracle> {
        if meta.base_domain != cons.h.domain() {
            return Err(Error::DomainMismatch(
                "oracle meta does not belong to this cons node".into(),
            ));
        }
        let refs: Vec<&FinPermGroup> = cons.parts.iter().collect();
        let core = FinPermGroup::product_padded(cons.h.domain(), &refs)?;
        Ok(ConsOracle {
            meta: meta.clone(),
            h_elems: cons.h.elements()?,
            core_elems: core.elements()?,
        })
    }

    /// Evaluates conditions (a)–(d) for a permutation of the truncated
    /// domain, iterating every copy vector.
    pub fn check(&self, sigma: &Perm) -> MembershipVerdict {
        let meta = &self.meta;
        let cond_a = meta.k_part.iter().all(|l| {
            let idx = meta
                .domain
                .binary_search(l)
                .expect("fixed part is in the domain");
            meta.copy_of[sigma.apply(idx)].block == 0
        });
        let cond_b = sigma.degree() == meta.domain.len()
            && meta.nabla.is_invariant_under(sigma)
            && meta.delta.is_invariant_under(sigma);
        if !cond_a || !cond_b {
            return MembershipVerdict {
                cond_a,
                cond_b,
                cond_c: false,
                cond_d: false,
                failing_vector: None,
            };
        }
        let d = decompose(sigma, meta).expect("block-respecting by conditions (a) and (b)");
        let vectors = meta.copy_vectors();
        let mut cond_c = true;
        let mut cond_d = true;
        let mut failing_vector = None;
        for vec in &vectors {
            if !self.h_elems.contains(d.rho_at(meta, vec)) {
                cond_c = false;
                failing_vector = Some(vec.clone());
                break;
            }
        }
        if cond_c {
            let zero = vec![0usize; meta.k];
            let rho0_inv = d.rho_at(meta, &zero).inverse();
            for vec in &vectors {
                let diff = d.rho_at(meta, vec).compose(&rho0_inv);
                if !self.core_elems.contains(&diff) {
                    cond_d = false;
                    failing_vector = Some(vec.clone());
                    break;
                }
            }
        } else {
            cond_d = false;
        }
        MembershipVerdict {
            cond_a,
            cond_b,
            cond_c,
            cond_d,
            failing_vector,
        }
    }
}

/// One-shot membership check; builds the oracle internally.
pub fn membership_abcd(
    sigma: &Perm,
    cons: &ConsData,
    meta: &TruncationMeta,
) -> Result<MembershipVerdict> {
    Ok(ConsOracle::new(cons, meta)?.check(sigma))
}

/// Adjoins the diagonal permutation τ* of a base permutation τ to a group on
/// the truncated domain. τ must fix Y0 setwise, respect the block division of
/// the base, and conjugation by τ* must keep the locally-supported part of
/// `g` inside itself.
pub fn diagonal_extend(
    g: &FinPermGroup,
    meta: &TruncationMeta,
    tau: &Perm,
) -> Result<FinPermGroup> {
    if g.domain() != meta.domain() {
        return Err(Error::DomainMismatch(
            "group does not act on the truncated domain".into(),
        ));
    }
    if tau.degree() != meta.base_domain.len() {
        return Err(Error::Invalid("τ must act on the base domain".into()));
    }
    for l in &meta.base_y0 {
        let b = meta.base_index(l)?;
        if meta.block_of_base[tau.apply(b)] != 0 {
            return Err(Error::NotNormalizing(format!("τ moves {l} out of Y0")));
        }
    }
    for b in 0..meta.base_domain.len() {
        let from = meta.block_of_base[b];
        let first_of_block = meta.block_of_base[tau.apply(b)];
        if (from == 0) != (first_of_block == 0) {
            return Err(Error::NotNormalizing("τ mixes Y0 with a block".into()));
        }
    }
    for block in &meta.blocks {
        let mut targets = BTreeSet::new();
        for l in block {
            let b = meta.base_index(l)?;
            targets.insert(meta.block_of_base[tau.apply(b)]);
        }
        if targets.len() != 1 {
            return Err(Error::NotNormalizing(
                "τ splits a block across blocks".into(),
            ));
        }
    }
    let tau_star = diagonal_perm(meta, tau)?;
    // The locally-supported part of g: elements moving points of one delta
    // class only. Conjugation by τ* must keep this subgroup inside itself.
    let elems = g.elements()?;
    let mut locals: Vec<Perm> = Vec::new();
    for p in &elems {
        if p.is_identity() {
            continue;
        }
        let moved: BTreeSet<usize> = (0..p.degree()).filter(|&i| p.apply(i) != i).collect();
        let first = *moved.iter().next().unwrap();
        if moved.iter().all(|&i| meta.delta.same_class(first, i)) {
            locals.push(p.clone());
        }
    }
    let local_group = FinPermGroup::with_cap(meta.domain.clone(), locals.clone(), g.elem_cap())?;
    let local_elems = local_group.elements()?;
    let tau_star_inv = tau_star.inverse();
    for x in &locals {
        let conj = tau_star.compose(x).compose(&tau_star_inv);
        if !local_elems.contains(&conj) {
            return Err(Error::NotNormalizing(
                "conjugation by τ* leaves the locally-supported core".into(),
            ));
        }
    }
    let mut gens = g.gens().to_vec();
    gens.push(tau_star);
    FinPermGroup::with_cap(meta.domain.clone(), gens, g.elem_cap())
}

/// Recovers the base group {ρ_0(σ) : σ ∈ g} on Y, and validates that it
/// contains and normalizes the core recovered from the copy-0 classes.
pub fn recover_base(g: &FinPermGroup, meta: &TruncationMeta) -> Result<FinPermGroup> {
    if g.domain() != meta.domain() {
        return Err(Error::DomainMismatch(
            "group does not act on the truncated domain".into(),
        ));
    }
    let zero = vec![0usize; meta.k];
    let mut rho_set: BTreeSet<Perm> = BTreeSet::new();
    for sigma in g.elements()? {
        let d = decompose(&sigma, meta)?;
        rho_set.insert(d.rho_at(meta, &zero).clone());
    }
    let recovered = FinPermGroup::with_cap(
        meta.base_domain.clone(),
        rho_set.into_iter().collect(),
        g.elem_cap(),
    )?;
    // Recover each core factor from the pointwise-stabilized copy-0 class and
    // check containment and normality.
    let mut core_parts = Vec::new();
    for (i, block) in meta.blocks.iter().enumerate() {
        let class_labels: Vec<PointLabel> = block
            .iter()
            .map(|l| Ok(meta.domain[meta.point_at(l, 0)?].clone()))
            .collect::<Result<_>>()?;
        let local = g.restrict_inner(&class_labels, RestrictMode::PointwiseOutside)?;
        // Within one block the copy-0 labels sort like the base labels (the
        // construction inserts the same tags at the same path positions), so
        // the generators carry over index-for-index.
        let renamed =
            FinPermGroup::with_cap(meta.blocks[i].clone(), local.gens().to_vec(), g.elem_cap())?;
        core_parts.push(renamed);
    }
    let refs: Vec<&FinPermGroup> = core_parts.iter().collect();
    let core = FinPermGroup::product_padded(&meta.base_domain, &refs)?;
    let rel = FinPermGroup::subgroup_relation(&core, &recovered)?;
    if !rel.is_subgroup {
        return Err(Error::NotNormalizing(
            "recovered base does not contain the copy-0 core".into(),
        ));
    }
    if !rel.is_normal {
        return Err(Error::NotNormalizing(
            "recovered base does not normalize the copy-0 core".into(),
        ));
    }
    Ok(recovered)
}

/// Verifies both composition identities of the base-action calculus at one
/// copy vector: ρ_vec(τσ) = ρ_{ψ(σ)(vec)}(τ) ∘ ρ_vec(σ), and
/// ρ_vec(σ⁻¹) = (ρ_{ψ(σ⁻¹)(vec)}(σ))⁻¹.
pub fn rho_compose_check(
    sigma: &Perm,
    tau: &Perm,
    meta: &TruncationMeta,
    vec: &[usize],
) -> Result<bool> {
    if vec.len() != meta.k || vec.iter().any(|&n| n >= meta.t) {
        return Err(Error::Invalid("copy vector out of range".into()));
    }
    let d_sigma = decompose(sigma, meta)?;
    let d_tau = decompose(tau, meta)?;
    let product = tau.compose(sigma);
    let d_product = decompose(&product, meta)?;
    let shifted = d_sigma.psi_map_vec(vec);
    let rhs = d_tau
        .rho_at(meta, &shifted)
        .compose(d_sigma.rho_at(meta, vec));
    let first = *d_product.rho_at(meta, vec) == rhs;

    let sigma_inv = sigma.inverse();
    let d_inv = decompose(&sigma_inv, meta)?;
    let shifted_inv = d_inv.psi_map_vec(vec);
    let second = *d_inv.rho_at(meta, vec) == d_sigma.rho_at(meta, &shifted_inv).inverse();
    Ok(first && second)
}

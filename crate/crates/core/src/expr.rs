//! The symbolic grammar of hereditarily cellular groups.
//!
//! An expression describes a (possibly infinite) permutation group built from
//! finite groups by direct products, wreath products with the infinite
//! symmetric group, and the block/copy construction `Cons`. `Cons` carries a
//! finite setwise-fixed part `y0`, finite normal-core factors `parts`, and a
//! finite base group `h` acting on their union; all constituents are finite,
//! which pins `Cons` nodes to the rank-1 (cellular) layer. Higher rank comes
//! from nesting.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::label::PointLabel;
use crate::permcore::FinPermGroup;

/// Data of a `Cons` node: the group of block/copy permutations over base
/// group `h` with normal core `id(y0) × parts[0] × … × parts[k-1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsData {
    pub y0: Vec<PointLabel>,
    pub parts: Vec<FinPermGroup>,
    pub h: FinPermGroup,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupExpr {
    Finite(FinPermGroup),
    DirectProduct(Vec<GroupExpr>),
    WreathOmega(Box<GroupExpr>),
    Cons(ConsData),
}

/// Upper bound on the rank of the group an expression denotes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub rank_upper: usize,
}

/// One validation failure, with a path into the expression tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl GroupExpr {
    /// The single-point pure set: `WreathOmega` over one fixed point.
    pub fn pure_set() -> GroupExpr {
        GroupExpr::WreathOmega(Box::new(GroupExpr::Finite(
            FinPermGroup::trivial(vec![PointLabel::base("pt")]).unwrap(),
        )))
    }

    /// The n-fold nested-copies expression: n = 0 is a fixed point, and each
    /// level wraps the previous one in `WreathOmega`.
    pub fn nested_copies(n: usize) -> GroupExpr {
        let mut e = GroupExpr::Finite(FinPermGroup::trivial(vec![PointLabel::base("pt")]).unwrap());
        for _ in 0..n {
            e = GroupExpr::WreathOmega(Box::new(e));
        }
        e
    }
}

/// Applies an enumeration budget to every finite group in the tree.
pub fn set_caps(e: &mut GroupExpr, cap: usize) {
    match e {
        GroupExpr::Finite(g) => g.set_cap(cap),
        GroupExpr::DirectProduct(parts) => {
            for p in parts {
                set_caps(p, cap);
            }
        }
        GroupExpr::WreathOmega(inner) => set_caps(inner, cap),
        GroupExpr::Cons(cons) => {
            for p in &mut cons.parts {
                p.set_cap(cap);
            }
            cons.h.set_cap(cap);
        }
    }
}

/// Checks all type invariants, reporting each failure with a path into the
/// tree. A budget overrun during a check is reported as a violation rather
/// than an error.
pub fn validate(e: &GroupExpr) -> Vec<Violation> {
    let mut out = Vec::new();
    validate_at(e, "e", &mut out);
    out
}

fn validate_at(e: &GroupExpr, path: &str, out: &mut Vec<Violation>) {
    match e {
        GroupExpr::Finite(_) => {}
        GroupExpr::DirectProduct(parts) => {
            if parts.is_empty() {
                out.push(Violation {
                    path: path.into(),
                    message: "empty direct product".into(),
                });
            }
            for (i, p) in parts.iter().enumerate() {
                validate_at(p, &format!("{path}.dp[{i}]"), out);
            }
        }
        GroupExpr::WreathOmega(inner) => validate_at(inner, &format!("{path}.wr"), out),
        GroupExpr::Cons(cons) => validate_cons(cons, path, out),
    }
}

fn validate_cons(cons: &ConsData, path: &str, out: &mut Vec<Violation>) {
    let mut push = |message: String| {
        out.push(Violation {
            path: path.into(),
            message,
        })
    };
    if cons.parts.is_empty() {
        push("cons needs at least one part".into());
        return;
    }
    for (i, p) in cons.parts.iter().enumerate() {
        if p.degree() == 0 {
            push(format!("part {i} has an empty domain"));
        }
    }
    // y0 and the part domains must tile h's domain.
    let mut union: Vec<PointLabel> = cons.y0.clone();
    for p in &cons.parts {
        union.extend(p.domain().iter().cloned());
    }
    let count = union.len();
    union.sort();
    union.dedup();
    if union.len() != count {
        push("y0 and part domains are not pairwise disjoint".into());
        return;
    }
    if union != cons.h.domain() {
        push("h does not act on y0 ⊔ parts".into());
        return;
    }
    // h must fix y0 setwise.
    let y0_idx: Vec<usize> = match cons.y0.iter().map(|l| cons.h.index_of(l)).collect() {
        Ok(v) => v,
        Err(e) => {
            push(format!("{e}"));
            return;
        }
    };
    for g in cons.h.gens() {
        if !y0_idx.iter().all(|&i| y0_idx.contains(&g.apply(i))) {
            push("h does not fix y0 setwise".into());
            break;
        }
    }
    // The core N = id(y0) × parts must be a normal subgroup of h.
    let refs: Vec<&FinPermGroup> = cons.parts.iter().collect();
    let n = match FinPermGroup::product_padded(cons.h.domain(), &refs) {
        Ok(n) => n,
        Err(e) => {
            push(format!("could not form the core: {e}"));
            return;
        }
    };
    match FinPermGroup::subgroup_relation(&n, &cons.h) {
        Ok(rel) => {
            if !rel.is_subgroup {
                push("the core N is not a subgroup of h".into());
            } else if !rel.is_normal {
                push("the core N is not normal in h".into());
            }
        }
        Err(e) => push(format!("could not verify normality: {e}")),
    }
}

/// Maximum wreath-nesting depth along any path: an upper bound for the rank.
pub fn rank_upper(e: &GroupExpr) -> Result<RankReport> {
    let violations = validate(e);
    if !violations.is_empty() {
        return Err(Error::InvalidExpr(format!("{violations:?}")));
    }
    Ok(RankReport {
        rank_upper: rank_of(e),
    })
}

fn rank_of(e: &GroupExpr) -> usize {
    match e {
        GroupExpr::Finite(_) => 0,
        GroupExpr::DirectProduct(parts) => parts.iter().map(rank_of).max().unwrap_or(0),
        GroupExpr::WreathOmega(inner) => 1 + rank_of(inner),
        GroupExpr::Cons(_) => 1,
    }
}

/// The labeled skeleton a truncation will instantiate: finite domains as-is,
/// block-tagged unions for products, inner labels for wreath nodes (copies
/// appear at truncation), and `y0 ⊔ parts` for `Cons`.
pub fn base_domain(e: &GroupExpr) -> Result<Vec<PointLabel>> {
    let violations = validate(e);
    if !violations.is_empty() {
        return Err(Error::InvalidExpr(format!("{violations:?}")));
    }
    Ok(base_domain_of(e))
}

fn base_domain_of(e: &GroupExpr) -> Vec<PointLabel> {
    match e {
        GroupExpr::Finite(g) => g.domain().to_vec(),
        GroupExpr::DirectProduct(parts) => {
            let mut out = Vec::new();
            for (i, p) in parts.iter().enumerate() {
                out.extend(base_domain_of(p).iter().map(|l| l.in_block(i as u32)));
            }
            out.sort();
            out
        }
        GroupExpr::WreathOmega(inner) => base_domain_of(inner),
        GroupExpr::Cons(cons) => cons.h.domain().to_vec(),
    }
}

/// A deterministic invariant vector separating non-isomorphic expressions:
/// degree, order, and orbit-profile rows of every truncation t = 1..n_max.
/// Equal vectors mean "indistinguishable at n_max", never "isomorphic".
pub fn profile_signature(e: &GroupExpr, n_max: usize, tuple_cap: u64) -> Result<Vec<u64>> {
    if n_max == 0 {
        return Err(Error::Invalid(
            "profile_signature requires n_max ≥ 1".into(),
        ));
    }
    let mut sig = Vec::new();
    let depth = n_max.min(3);
    for t in 1..=n_max {
        let (g, _) = crate::construct::truncate(e, t)?;
        sig.push(g.degree() as u64);
        sig.push(g.order()? as u64);
        let profile = crate::analysis::orbit_profile(&g, depth, tuple_cap)?;
        for row in &profile.rows {
            sig.push(row.o);
            sig.push(row.oi);
            sig.push(row.os);
        }
    }
    Ok(sig)
}

// ---------------------------------------------------------------------------
// S-expression DSL
// ---------------------------------------------------------------------------

fn group_json(g: &FinPermGroup) -> String {
    serde_json::to_string(g).expect("group serialization cannot fail")
}

/// Canonical printer for the DSL. `parse(print(e))` returns `e` exactly.
pub fn print(e: &GroupExpr) -> String {
    let mut s = String::new();
    print_into(e, &mut s);
    s
}

fn print_into(e: &GroupExpr, out: &mut String) {
    match e {
        GroupExpr::Finite(g) => {
            let _ = write!(out, "(finite {})", group_json(g));
        }
        GroupExpr::DirectProduct(parts) => {
            out.push_str("(dp");
            for p in parts {
                out.push(' ');
                print_into(p, out);
            }
            out.push(')');
        }
        GroupExpr::WreathOmega(inner) => {
            out.push_str("(wr ");
            print_into(inner, out);
            out.push(')');
        }
        GroupExpr::Cons(cons) => {
            let y0 = serde_json::to_string(&cons.y0).expect("label serialization cannot fail");
            let parts =
                serde_json::to_string(&cons.parts).expect("group serialization cannot fail");
            let _ = write!(
                out,
                "(cons :y0 {y0} :parts {parts} :h {})",
                group_json(&cons.h)
            );
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Cursor<'a> {
        Cursor { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn line_col(&self) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for c in self.src[..self.pos].chars() {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn fail(&self, expected: &[&str]) -> Error {
        let (line, col) = self.line_col();
        let found = match self.peek() {
            Some(c) => format!("{c:?}"),
            None => "end of input".into(),
        };
        Error::Parse {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn expect(&mut self, c: char, expected: &str) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.fail(&[expected]))
        }
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_string()
    }

    fn json_value(&mut self) -> Result<serde_json::Value> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let mut stream = serde_json::Deserializer::from_str(rest).into_iter::<serde_json::Value>();
        match stream.next() {
            Some(Ok(v)) => {
                self.pos += stream.byte_offset();
                Ok(v)
            }
            _ => Err(self.fail(&["JSON value"])),
        }
    }

    fn keyword(&mut self, name: &str) -> Result<()> {
        self.skip_ws();
        if self.peek() != Some(':') {
            return Err(self.fail(&[&format!(":{name}")]));
        }
        self.pos += 1;
        let w = self.word();
        if w == name {
            Ok(())
        } else {
            Err(self.fail(&[&format!(":{name}")]))
        }
    }
}

fn group_from_value(v: serde_json::Value, cur: &Cursor) -> Result<FinPermGroup> {
    serde_json::from_value(v).map_err(|e| {
        let (line, col) = cur.line_col();
        Error::Parse {
            line,
            col,
            expected: vec!["group object {domain, gens}".into()],
            found: e.to_string(),
        }
    })
}

fn parse_node(cur: &mut Cursor) -> Result<GroupExpr> {
    cur.expect('(', "(")?;
    cur.skip_ws();
    let head = cur.word();
    match head.as_str() {
        "finite" => {
            let g = group_from_value(cur.json_value()?, cur)?;
            cur.expect(')', ")")?;
            Ok(GroupExpr::Finite(g))
        }
        "wr" => {
            let inner = parse_node(cur)?;
            cur.expect(')', ")")?;
            Ok(GroupExpr::WreathOmega(Box::new(inner)))
        }
        "dp" => {
            let mut parts = Vec::new();
            loop {
                cur.skip_ws();
                match cur.peek() {
                    Some('(') => parts.push(parse_node(cur)?),
                    Some(')') => {
                        cur.pos += 1;
                        break;
                    }
                    _ => return Err(cur.fail(&["(", ")"])),
                }
            }
            if parts.is_empty() {
                return Err(cur.fail(&["at least one sub-expression in (dp …)"]));
            }
            Ok(GroupExpr::DirectProduct(parts))
        }
        "cons" => {
            cur.keyword("y0")?;
            let y0_val = cur.json_value()?;
            let y0: Vec<PointLabel> = serde_json::from_value(y0_val).map_err(|e| {
                let (line, col) = cur.line_col();
                Error::Parse {
                    line,
                    col,
                    expected: vec!["array of label strings".into()],
                    found: e.to_string(),
                }
            })?;
            cur.keyword("parts")?;
            let parts_val = cur.json_value()?;
            let parts: Vec<FinPermGroup> = match parts_val {
                serde_json::Value::Array(items) => items
                    .into_iter()
                    .map(|v| group_from_value(v, cur))
                    .collect::<Result<Vec<_>>>()?,
                _ => return Err(cur.fail(&["array of group objects"])),
            };
            cur.keyword("h")?;
            let h = group_from_value(cur.json_value()?, cur)?;
            cur.expect(')', ")")?;
            Ok(GroupExpr::Cons(ConsData { y0, parts, h }))
        }
        _ => Err(cur.fail(&["finite", "dp", "wr", "cons"])),
    }
}

/// Parses the s-expression DSL: `(finite <group-json>)`, `(dp e1 e2 …)`,
/// `(wr e)`, `(cons :y0 [labels] :parts [<group-json>…] :h <group-json>)`.
pub fn parse(text: &str) -> Result<GroupExpr> {
    let mut cur = Cursor::new(text);
    let e = parse_node(&mut cur)?;
    cur.skip_ws();
    if cur.pos != text.len() {
        return Err(cur.fail(&["end of input"]));
    }
    Ok(e)
}

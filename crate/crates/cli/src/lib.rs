//! Command-line front end: DSL/JSON parsing, analysis dispatch, JSON and
//! table reports, and the verify-suite runner.

pub mod fixtures;
pub mod verify;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use hcell_core::analysis::{self, DEFAULT_TUPLE_CAP};
use hcell_core::construct;
use hcell_core::expr::{self, GroupExpr};
use hcell_core::reducts;
use hcell_core::structures::{self, HomogOutcome, RelStruct};
use hcell_core::{Error, FinPermGroup, Partition, Perm, PointLabel, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Dot,
}

/// Run configuration: one subcommand plus explicit budgets.
#[derive(Parser, Debug)]
#[command(
    name = "hcell",
    version,
    about = "Hereditarily cellular group calculus"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub output: OutputFormat,

    /// Element budget for group enumeration.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub elem_cap: usize,

    /// Budget for tuple/subset sweeps.
    #[arg(long, global = true, default_value_t = DEFAULT_TUPLE_CAP)]
    pub tuple_cap: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Orbit profile: stability-witnessed for an expression, direct for a group.
    Profile {
        /// Expression file (s-expression DSL).
        #[arg(long)]
        expr: Option<PathBuf>,
        /// Group file (JSON).
        #[arg(long)]
        group: Option<PathBuf>,
        /// Largest tuple length.
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Rank upper bound of an expression.
    Rank {
        #[arg(long)]
        expr: PathBuf,
    },
    /// Width surrogate of an expression at truncation size t.
    Width {
        #[arg(long)]
        expr: PathBuf,
        #[arg(long, default_value_t = 3)]
        t: usize,
    },
    /// All invariant partitions of a group.
    Congruences {
        #[arg(long)]
        group: PathBuf,
    },
    /// Check the canonical block partition triple, or search all candidates.
    OmegaPartition {
        #[arg(long)]
        expr: PathBuf,
        #[arg(long, default_value_t = 3)]
        t: usize,
        /// Enumerate all passing candidates instead of checking the
        /// canonical one.
        #[arg(long)]
        find: bool,
    },
    /// Truncate an expression to a concrete group plus block/copy data.
    Truncate {
        #[arg(long)]
        expr: PathBuf,
        #[arg(long, default_value_t = 3)]
        t: usize,
    },
    /// Membership verdicts for a permutation against a cons expression.
    Membership {
        /// Expression file; the root must be a cons node.
        #[arg(long)]
        expr: PathBuf,
        #[arg(long, default_value_t = 3)]
        t: usize,
        /// Permutation as a JSON image array over the truncated domain.
        #[arg(long)]
        perm: String,
    },
    /// Recover the base group of a truncated cons expression.
    Recover {
        #[arg(long)]
        expr: PathBuf,
        #[arg(long, default_value_t = 3)]
        t: usize,
    },
    /// Homogenizability check: m-ary projections must separate orbits.
    Homog {
        #[arg(long = "struct")]
        structure: PathBuf,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Expansion by all invariant m-ary relations.
    DeltaM {
        #[arg(long = "struct")]
        structure: PathBuf,
        #[arg(long, default_value_t = 2)]
        m: usize,
    },
    /// Scan for minimal structures outside the age.
    Bounds {
        #[arg(long = "struct")]
        structure: PathBuf,
        /// Scan horizon.
        #[arg(long, default_value_t = 4)]
        s: usize,
    },
    /// Compare age membership against a forbidden family.
    Forb {
        #[arg(long = "struct")]
        structure: PathBuf,
        /// JSON array of forbidden structures.
        #[arg(long)]
        forbidden: PathBuf,
        #[arg(long, default_value_t = 4)]
        s: usize,
    },
    /// Expansion-merge test for a probe over a reduct signature.
    Merge {
        #[arg(long)]
        reduct: PathBuf,
        #[arg(long)]
        full: PathBuf,
        #[arg(long)]
        probe: PathBuf,
        /// Comma-separated marked point labels (b+1 of them).
        #[arg(long)]
        marked: String,
        #[arg(long, default_value_t = 4)]
        s: usize,
    },
    /// Lattice of groups between a group and the full symmetric group.
    Lattice {
        #[arg(long)]
        group: PathBuf,
    },
    /// Reduct counts: for a structure, or per truncation size of an expression.
    Reducts {
        #[arg(long = "struct")]
        structure: Option<PathBuf>,
        #[arg(long)]
        expr: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        t: usize,
    },
    /// Run the named invariant checks.
    Verify {
        /// Substring filter on check names.
        #[arg(long)]
        filter: Option<String>,
        /// Include the negative controls (these fail by construction).
        #[arg(long)]
        include_negative: bool,
    },
}

/// Either side of the input language.
pub enum ParsedInput {
    Expr(GroupExpr),
    Structure(RelStruct),
}

/// Dispatches on the leading token: `(` starts the expression DSL, `{` a
/// structure JSON object.
pub fn parse_input(text: &str) -> Result<ParsedInput> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('(') {
        Ok(ParsedInput::Expr(expr::parse(text)?))
    } else if trimmed.starts_with('{') {
        let s: RelStruct = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("structure JSON: {e}")))?;
        Ok(ParsedInput::Structure(s))
    } else {
        Err(Error::Invalid(
            "input must start with `(` (expression) or `{` (structure JSON)".into(),
        ))
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_expr_with_cap(path: &PathBuf, cap: usize) -> Result<GroupExpr> {
    match parse_input(&read(path)?)? {
        ParsedInput::Expr(mut e) => {
            expr::set_caps(&mut e, cap);
            Ok(e)
        }
        ParsedInput::Structure(_) => Err(Error::Invalid(format!(
            "{} holds a structure, expected an expression",
            path.display()
        ))),
    }
}

fn load_struct(path: &PathBuf) -> Result<RelStruct> {
    match parse_input(&read(path)?)? {
        ParsedInput::Structure(s) => Ok(s),
        ParsedInput::Expr(_) => Err(Error::Invalid(format!(
            "{} holds an expression, expected a structure",
            path.display()
        ))),
    }
}

fn load_group(path: &PathBuf) -> Result<FinPermGroup> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Invalid(format!("group JSON: {e}")))
}

fn json_of<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization")
}

fn profile_table(p: &analysis::OrbitProfile) -> String {
    let mut out = String::from("  n        o       oi       os\n");
    for r in &p.rows {
        let _ = writeln!(out, "{:>3} {:>8} {:>8} {:>8}", r.n, r.o, r.oi, r.os);
    }
    out
}

fn partition_table(g: &FinPermGroup, p: &Partition) -> String {
    let classes = p
        .classes()
        .into_iter()
        .map(|c| {
            let names: Vec<String> = c.iter().map(|&i| g.domain()[i].to_string()).collect();
            format!("{{{}}}", names.join(" "))
        })
        .collect::<Vec<_>>();
    classes.join("  ")
}

/// Runs one command; returns the rendered report and the exit code.
/// Exit 0 on success, 1 when the analysis found a counterexample; errors are
/// mapped to exit 2 by the binary.
pub fn run(config: &RunConfig) -> Result<(String, i32)> {
    let json = config.output == OutputFormat::Json;
    match &config.command {
        Command::Profile { expr, group, n } => {
            let profile = match (expr, group) {
                (Some(path), None) => analysis::stable_profile(
                    &load_expr_with_cap(path, config.elem_cap)?,
                    *n,
                    config.tuple_cap,
                )?,
                (None, Some(path)) => {
                    let mut g = load_group(path)?;
                    g.set_cap(config.elem_cap);
                    analysis::orbit_profile(&g, *n, config.tuple_cap)?
                }
                _ => {
                    return Err(Error::Invalid(
                        "pass exactly one of --expr / --group".into(),
                    ))
                }
            };
            let report = if json {
                json_of(&profile)
            } else {
                profile_table(&profile)
            };
            Ok((report, 0))
        }
        Command::Rank { expr } => {
            let r = expr::rank_upper(&load_expr_with_cap(expr, config.elem_cap)?)?;
            let report = if json {
                json_of(&r)
            } else {
                format!("rank_upper: {}\n", r.rank_upper)
            };
            Ok((report, 0))
        }
        Command::Width { expr, t } => {
            let r = analysis::width(&load_expr_with_cap(expr, config.elem_cap)?, *t)?;
            let report = if json {
                json_of(&r)
            } else {
                let mut out = format!("width: {} (skipped sites: {})\n", r.width, r.skipped_sites);
                for w in &r.witnesses {
                    let _ = writeln!(
                        out,
                        "  at {} with {} classes -> acl {}",
                        w.point,
                        w.congruence_classes.len(),
                        w.acl_size
                    );
                }
                out
            };
            Ok((report, 0))
        }
        Command::Congruences { group } => {
            let mut g = load_group(group)?;
            g.set_cap(config.elem_cap);
            let congs = analysis::congruences(&g)?;
            let report = if json {
                json_of(&congs)
            } else {
                let mut out = format!("{} congruences\n", congs.len());
                for c in &congs {
                    let _ = writeln!(out, "  {}", partition_table(&g, c));
                }
                out
            };
            Ok((report, 0))
        }
        Command::OmegaPartition { expr, t, find } => {
            let e = load_expr_with_cap(expr, config.elem_cap)?;
            let (g, meta) = construct::truncate(&e, *t)?;
            if *find {
                let reports = analysis::omega_partition_find(&g, meta.t())?;
                let report = if json {
                    json_of(&reports)
                } else {
                    let mut out = format!("{} passing candidates\n", reports.len());
                    for r in &reports {
                        let _ = writeln!(
                            out,
                            "  K of size {}, {} blocks, {} copy classes",
                            r.candidate.k_part.len(),
                            r.candidate.nabla_classes.len(),
                            r.candidate.delta_classes.len()
                        );
                    }
                    out
                };
                Ok((report, 0))
            } else {
                let candidate = canonical_candidate(&g, &meta);
                let r = analysis::omega_partition_check(&g, meta.t(), &candidate)?;
                let code = if r.ok() { 0 } else { 1 };
                let report = if json {
                    json_of(&r)
                } else {
                    format!(
                        "conditions: K-fixed {} / nested congruences {} / {} blocks / splits into t {} / symmetric quotient {}\n",
                        r.cond1, r.cond2, r.cond3_class_count, r.cond4, r.cond5
                    )
                };
                Ok((report, code))
            }
        }
        Command::Truncate { expr, t } => {
            let (g, meta) = construct::truncate(&load_expr_with_cap(expr, config.elem_cap)?, *t)?;
            let order = g.order()?;
            let payload = serde_json::json!({
                "group": g,
                "order": order,
                "meta": meta.to_json(),
            });
            let report = if json {
                serde_json::to_string_pretty(&payload).expect("report serialization")
            } else {
                format!(
                    "domain of {} points, order {}, {} blocks, t = {}\n",
                    g.degree(),
                    order,
                    meta.block_count(),
                    meta.t()
                )
            };
            Ok((report, 0))
        }
        Command::Membership { expr, t, perm } => {
            let e = load_expr_with_cap(expr, config.elem_cap)?;
            let cons = match e {
                GroupExpr::Cons(c) => c,
                _ => return Err(Error::Invalid("membership needs a cons expression".into())),
            };
            let (_, meta) = construct::truncate_cons(&cons, *t)?;
            let sigma: Perm = serde_json::from_str(perm)
                .map_err(|e| Error::Invalid(format!("permutation JSON: {e}")))?;
            let verdict = construct::membership_abcd(&sigma, &cons, &meta)?;
            let code = if verdict.ok() { 0 } else { 1 };
            let report = if json {
                json_of(&verdict)
            } else {
                format!(
                    "member: {} (a {} / b {} / c {} / d {}{})\n",
                    verdict.ok(),
                    verdict.cond_a,
                    verdict.cond_b,
                    verdict.cond_c,
                    verdict.cond_d,
                    verdict
                        .failing_vector
                        .as_ref()
                        .map(|v| format!(", failing copy vector {v:?}"))
                        .unwrap_or_default()
                )
            };
            Ok((report, code))
        }
        Command::Recover { expr, t } => {
            let e = load_expr_with_cap(expr, config.elem_cap)?;
            let (g, meta) = construct::truncate(&e, *t)?;
            let base = construct::recover_base(&g, &meta)?;
            let order = base.order()?;
            let report = if json {
                json_of(&base)
            } else {
                format!(
                    "recovered base group of order {order} on {} points\n",
                    base.degree()
                )
            };
            Ok((report, 0))
        }
        Command::Homog { structure, m, n } => {
            let a = load_struct(structure)?;
            let outcome = structures::homog_check(&a, *m, *n, config.tuple_cap)?;
            let code = match outcome {
                HomogOutcome::Pass => 0,
                HomogOutcome::Counterexample { .. } => 1,
            };
            let report = if json {
                json_of(&outcome)
            } else {
                match &outcome {
                    HomogOutcome::Pass => "pass\n".to_string(),
                    HomogOutcome::Counterexample { n, u, v } => format!(
                        "counterexample at n = {n}: ({}) vs ({})\n",
                        u.join(" "),
                        v.join(" ")
                    ),
                }
            };
            Ok((report, code))
        }
        Command::DeltaM { structure, m } => {
            let a = load_struct(structure)?;
            let d = structures::delta_m(&a, *m, config.tuple_cap)?;
            let report = if json {
                json_of(&d)
            } else {
                format!("{} orbit relations of arity {m}\n", d.signature().len())
            };
            Ok((report, 0))
        }
        Command::Bounds { structure, s } => {
            let a = load_struct(structure)?;
            let r = structures::boundedness_scan(&a, *s)?;
            let report = if json {
                json_of(&r)
            } else {
                format!(
                    "max arity {}, {} minimal obstructions (complete up to size {}), b = {}\n",
                    r.m_a,
                    r.minimal_obstructions.len(),
                    r.scan_size,
                    r.b
                )
            };
            Ok((report, 0))
        }
        Command::Forb {
            structure,
            forbidden,
            s,
        } => {
            let a = load_struct(structure)?;
            let f: Vec<RelStruct> = serde_json::from_str(&read(forbidden)?)
                .map_err(|e| Error::Invalid(format!("forbidden-family JSON: {e}")))?;
            let r = structures::forb_check(&a, &f, *s)?;
            let code = if r.agrees { 0 } else { 1 };
            let report = if json {
                json_of(&r)
            } else if r.agrees {
                "age and forbidden family agree\n".to_string()
            } else {
                "divergence found\n".to_string()
            };
            Ok((report, code))
        }
        Command::Merge {
            reduct,
            full,
            probe,
            marked,
            s,
        } => {
            let b = load_struct(reduct)?;
            let a = load_struct(full)?;
            let c = load_struct(probe)?;
            let marked: Vec<PointLabel> = marked
                .split(',')
                .map(|part| PointLabel::parse(part.trim()))
                .collect::<Result<_>>()?;
            let r = structures::merge_expansions_check(&b, &a, &c, &marked, *s)?;
            let code = if r.agrees { 0 } else { 1 };
            let report = if json {
                json_of(&r)
            } else {
                format!(
                    "direct {} / merged {} / agree {}\n",
                    r.direct, r.merged, r.agrees
                )
            };
            Ok((report, code))
        }
        Command::Lattice { group } => {
            let mut g = load_group(group)?;
            g.set_cap(config.elem_cap);
            let r = reducts::intermediate_groups(&g)?;
            let report = match config.output {
                OutputFormat::Dot => reducts::lattice_dot(&r),
                OutputFormat::Json => json_of(&r),
                OutputFormat::Table => {
                    let mut out = format!("{} groups\n", r.count);
                    for (i, h) in r.supergroups.iter().enumerate() {
                        let _ = writeln!(out, "  g{i}: order {}", h.order()?);
                    }
                    for (i, j) in &r.edges {
                        let _ = writeln!(out, "  g{i} < g{j}");
                    }
                    out
                }
            };
            Ok((report, 0))
        }
        Command::Reducts { structure, expr, t } => match (structure, expr) {
            (Some(path), None) => {
                let count = reducts::reduct_count(&load_struct(path)?)?;
                let report = if json {
                    json_of(&serde_json::json!({ "count": count }))
                } else {
                    format!("reducts: {count}\n")
                };
                Ok((report, 0))
            }
            (None, Some(path)) => {
                let e = load_expr_with_cap(path, config.elem_cap)?;
                let (g_t, _) = construct::truncate(&e, *t)?;
                let (g_t1, _) = construct::truncate(&e, *t + 1)?;
                let c_t = reducts::intermediate_groups(&g_t)?.count;
                let c_t1 = reducts::intermediate_groups(&g_t1)?.count;
                let report = if json {
                    json_of(&serde_json::json!({ "t": t, "count_t": c_t, "count_t1": c_t1 }))
                } else {
                    format!("count at t = {t}: {c_t}; at t+1: {c_t1} (raw counts per truncation)\n")
                };
                Ok((report, 0))
            }
            _ => Err(Error::Invalid(
                "pass exactly one of --struct / --expr".into(),
            )),
        },
        Command::Verify {
            filter,
            include_negative,
        } => {
            let results = verify::run_suite(filter.as_deref(), *include_negative);
            let all_pass = results.iter().all(|r| r.passed);
            let report = if json {
                json_of(&results)
            } else {
                verify::render(&results)
            };
            Ok((report, if all_pass { 0 } else { 1 }))
        }
    }
}

/// The canonical candidate triple read off a truncation's block data.
pub fn canonical_candidate(
    g: &FinPermGroup,
    meta: &construct::TruncationMeta,
) -> analysis::OmegaCandidate {
    let k_part = meta.k_part().to_vec();
    let k_set: std::collections::BTreeSet<&PointLabel> = k_part.iter().collect();
    let keep = |classes: Vec<Vec<usize>>| -> Vec<Vec<PointLabel>> {
        classes
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .map(|i| g.domain()[i].clone())
                    .collect::<Vec<PointLabel>>()
            })
            .filter(|labels: &Vec<PointLabel>| !labels.iter().any(|l| k_set.contains(l)))
            .collect()
    };
    analysis::OmegaCandidate {
        k_part: k_part.clone(),
        nabla_classes: keep(meta.nabla().classes()),
        delta_classes: keep(meta.delta().classes()),
    }
}

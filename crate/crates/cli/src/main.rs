//! `homtree`: count homomorphisms and check star extremality from the shell.
//!
//! Exit status: 0 when every checked inequality holds, 1 when a violation is
//! found (the witness is printed), 2 on usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use homtree::graph::{as_tree, parse_graph, Graph, Tree};
use homtree::hoffman::{hoffman_check_with_tolerance, parse_matrix};
use homtree::hom::{hom_count, HomCount};
use homtree::order::{
    class_max_check, dot_export, empirical_order, enumerate_free_trees, filter_by_leaves,
    graph_id, hasse, image_suite, Dominance, SuiteSpec, MAX_CLASS_CHECK_K,
};
use homtree::sidorenko::{
    broom, broom_chain_check, phi_profile, transform_chain, uniform_grid, verify_theorem,
    PairStrategy, PhiProfile, TransformCertificate, DEFAULT_GRID_POINTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
    Dot,
}

#[derive(Debug, Parser)]
#[command(name = "homtree", version, about = "Exact tree homomorphism counts and star-extremality checks")]
struct Cli {
    /// Output format. `structured` emits TOML with a schema tag on line 1.
    #[arg(long, value_enum, default_value = "human", global = true)]
    format: Format,

    /// Largest number of candidate maps the brute-force counter may enumerate.
    #[arg(long, env = "HOMTREE_GUARD", default_value_t = homtree::hom::DEFAULT_GUARD, global = true)]
    guard: u64,

    /// Relative tolerance for floating-point comparisons.
    #[arg(long, env = "HOMTREE_TOLERANCE", default_value_t = homtree::hoffman::DEFAULT_RELATIVE_TOLERANCE, global = true)]
    tolerance: f64,

    /// Worker threads for batch computations (0 = one per core).
    #[arg(long, default_value_t = 0, global = true)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count homomorphisms from a source graph into an image graph.
    Count {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        image: PathBuf,
    },
    /// Check hom(G, H) <= hom(S_k, H) and build the spanning-tree chain.
    Verify {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value = "first-pair")]
        strategy: PairStrategy,
        /// Write the chain certificate here.
        #[arg(long)]
        certify: Option<PathBuf>,
    },
    /// Run leaf migration from a tree to the star.
    Transform {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value = "first-pair")]
        strategy: PairStrategy,
        #[arg(long)]
        certify: Option<PathBuf>,
    },
    /// Re-verify a certificate from scratch.
    Check {
        #[arg(long)]
        cert: PathBuf,
    },
    /// List trees with k edges up to isomorphism.
    Trees {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        leaves: Option<usize>,
    },
    /// Empirical homomorphism order on k-edge trees over an image suite.
    Order {
        #[arg(long)]
        k: usize,
        /// `all:N` or `random:count,n,p`.
        #[arg(long)]
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the Hasse diagram in DOT format here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Broom chain and phi profiles for k-edge brooms.
    Brooms {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
    },
    /// Walk sum versus row-power sum of a symmetric nonnegative matrix.
    Hoffman {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

/// Whether every checked relation held.
type Verdict = bool;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_graph(path: &Path) -> Result<Graph> {
    parse_graph(&read(path)?).with_context(|| format!("invalid graph file {}", path.display()))
}

fn read_tree(path: &Path) -> Result<Tree> {
    let g = read_graph(path)?;
    as_tree(g).with_context(|| format!("{} does not hold a tree", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn structured<T: Serialize>(doc: &T) -> Result<String> {
    toml::to_string(doc).context("serializing output")
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn certificate_summary(cert: &TransformCertificate, out: &mut String) {
    use std::fmt::Write as _;
    let _ = writeln!(out, "chain: {} step(s), strategy {}", cert.steps.len(), cert.strategy);
    for (i, s) in cert.steps.iter().enumerate() {
        let bounds = match (s.holder_bound, s.amgm_bound) {
            (Some(h), Some(a)) => format!("  holder={h} amgm={a}"),
            _ => "  (no homomorphisms: structural step)".to_string(),
        };
        let _ = writeln!(
            out,
            "  step {i}: leaves {} -> {}  hom {} <= {}  b1={} b2={} d1={} d2={}{}{}",
            s.leaves_before,
            s.leaves_after,
            s.hom_before,
            s.hom_after,
            s.b1,
            s.b2,
            s.d1,
            s.d2,
            if s.swapped { " swapped" } else { "" },
            bounds
        );
    }
    let _ = writeln!(out, "star count: {}", cert.star_count);
}

fn run(cli: &Cli) -> Result<(String, Verdict)> {
    let tol = cli.tolerance;
    match &cli.command {
        Command::Count { source, image } => {
            let (g, h) = (read_graph(source)?, read_graph(image)?);
            let method = if as_tree(g.clone()).is_ok() { "tree" } else { "components" };
            let count = hom_count(&g, &h, cli.guard)?;
            #[derive(Serialize)]
            struct Doc<'a> {
                schema: &'a str,
                method: &'a str,
                count: &'a HomCount,
            }
            let text = match cli.format {
                Format::Structured => structured(&Doc { schema: "homtree.count.v1", method, count: &count })?,
                _ => format!("{count}\n"),
            };
            Ok((text, true))
        }
        Command::Verify { source, image, strategy, certify } => {
            let (g, h) = (read_graph(source)?, read_graph(image)?);
            let report = verify_theorem(&g, &h, *strategy, cli.guard)?;
            let issues = report.certificate.check(tol);
            if let Some(path) = certify {
                write(path, &report.certificate.to_toml())?;
            }
            let ok = report.holds && report.reduction.holds() && issues.is_empty();
            let text = match cli.format {
                Format::Structured => {
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        schema: &'a str,
                        passed: bool,
                        issues: &'a [String],
                        report: &'a homtree::sidorenko::TheoremReport,
                    }
                    structured(&Doc { schema: "homtree.verify.v1", passed: ok, issues: &issues, report: &report })?
                }
                _ => {
                    let mut out = format!(
                        "hom(G,H) = {} <= {} = hom(S_{},H)  {}{}\n",
                        report.hom_source,
                        report.star_count,
                        report.k,
                        pass(report.holds),
                        if report.equality { " (equality)" } else { "" }
                    );
                    out.push_str(&format!(
                        "spanning tree: hom(G,H) = {} <= {} = hom(T,H)  {}\n",
                        report.reduction.hom_graph,
                        report.reduction.hom_tree,
                        pass(report.reduction.holds())
                    ));
                    certificate_summary(&report.certificate, &mut out);
                    for issue in &issues {
                        out.push_str(&format!("certificate issue: {issue}\n"));
                    }
                    out
                }
            };
            Ok((text, ok))
        }
        Command::Transform { tree, image, strategy, certify } => {
            let (t, h) = (read_tree(tree)?, read_graph(image)?);
            let cert = transform_chain(&t, &h, *strategy)?;
            let issues = cert.check(tol);
            if let Some(path) = certify {
                write(path, &cert.to_toml())?;
            }
            let text = match cli.format {
                Format::Structured => cert.to_toml(),
                _ => {
                    let mut out = String::new();
                    certificate_summary(&cert, &mut out);
                    for issue in &issues {
                        out.push_str(&format!("certificate issue: {issue}\n"));
                    }
                    out
                }
            };
            Ok((text, issues.is_empty()))
        }
        Command::Check { cert } => {
            let text = read(cert)?;
            let cert = TransformCertificate::from_toml(&text)
                .with_context(|| format!("malformed certificate {}", cert.display()))?;
            let issues = cert.check(tol);
            let out = match cli.format {
                Format::Structured => {
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        schema: &'a str,
                        passed: bool,
                        issues: &'a [String],
                    }
                    structured(&Doc { schema: "homtree.check.v1", passed: issues.is_empty(), issues: &issues })?
                }
                _ if issues.is_empty() => format!("certificate OK: {} step(s)\n", cert.steps.len()),
                _ => issues.iter().map(|i| format!("violation: {i}\n")).collect(),
            };
            Ok((out, issues.is_empty()))
        }
        Command::Trees { k, leaves } => {
            let mut trees = enumerate_free_trees(*k)?;
            if let Some(l) = leaves {
                trees = filter_by_leaves(&trees, *l);
            }
            let text = match cli.format {
                Format::Structured => {
                    #[derive(Serialize)]
                    struct Entry<'a> {
                        code: &'a str,
                        leaves: usize,
                    }
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        schema: &'a str,
                        k: usize,
                        count: usize,
                        trees: Vec<Entry<'a>>,
                    }
                    structured(&Doc {
                        schema: "homtree.trees.v1",
                        k: *k,
                        count: trees.len(),
                        trees: trees.iter().map(|t| Entry { code: &t.code, leaves: t.leaf_count }).collect(),
                    })?
                }
                _ => trees.iter().map(|t| format!("{} leaves={}\n", t.code, t.leaf_count)).collect(),
            };
            Ok((text, true))
        }
        Command::Order { k, suite, seed, dot } => {
            let spec = SuiteSpec::parse(suite, *seed)?;
            let suite = image_suite(&spec)?;
            let trees = enumerate_free_trees(*k)?;
            let rel = empirical_order(&trees, &suite)?;
            let diagram = hasse(&rel);
            let dot_text = dot_export(&diagram);
            if let Some(path) = dot {
                write(path, &dot_text)?;
            }
            // no image may refute the star dominating every tree
            let star_refutations: Vec<(usize, usize)> = rel
                .star_index()
                .map(|s| {
                    rel.dominates[s]
                        .iter()
                        .enumerate()
                        .filter_map(|(j, d)| match d {
                            Dominance::Refuted { witness } => Some((j, *witness)),
                            Dominance::Consistent => None,
                        })
                        .collect()
                })
                .unwrap_or_default();
            // class maxima grow with the leaf count; skipped past the enumeration budget
            let class_max = if *k <= MAX_CLASS_CHECK_K {
                Some(class_max_check(*k, &suite)?)
            } else {
                None
            };
            let ok = star_refutations.is_empty() && class_max.as_ref().is_none_or(|r| r.passed());
            let text = match cli.format {
                Format::Structured => rel.to_toml(),
                Format::Dot => dot_text,
                Format::Human => {
                    let mut out = format!(
                        "{} trees with {} edges, {} image graphs (relations are suite-relative)\n",
                        rel.trees.len(),
                        k,
                        rel.suite.len()
                    );
                    for (i, t) in rel.trees.iter().enumerate() {
                        let above = rel.dominates[i].iter().filter(|d| d.is_consistent()).count() - 1;
                        out.push_str(&format!("  {} leaves={} consistently above {} other tree(s)\n", t.code, t.leaf_count, above));
                    }
                    out.push_str(&format!(
                        "hasse: {} node(s), {} arc(s)\n",
                        diagram.nodes.len(),
                        diagram.arcs.len()
                    ));
                    out.push_str(&format!("star dominates every tree on the suite: {}\n", pass(ok)));
                    for (j, w) in &star_refutations {
                        out.push_str(&format!("violation: {} beats the star on {}\n", rel.trees[*j].code, graph_id(*w)));
                    }
                    if let Some(r) = &class_max {
                        out.push_str(&format!("class maxima increase with leaf count: {}\n", pass(r.passed())));
                        for v in &r.violations {
                            out.push_str(&format!(
                                "violation: on {} the {}-leaf maximum {} exceeds the {}-leaf maximum {}\n",
                                graph_id(v.graph),
                                v.leaves,
                                v.max,
                                v.next_leaves,
                                v.next_max
                            ));
                        }
                    }
                    out
                }
            };
            Ok((text, ok))
        }
        Command::Brooms { k, image, grid } => {
            let h = read_graph(image)?;
            let chain = broom_chain_check(*k, &h)?;
            let points = uniform_grid(*grid);
            let mut profiles: Vec<(usize, usize, PhiProfile)> = Vec::new();
            for e in &chain.entries {
                let b = broom(*k, e.d1, e.d2)?;
                if e.count.is_zero() {
                    continue;
                }
                profiles.push((e.d1, e.d2, phi_profile(&b.tree, 0, 1, &h, &points)?));
            }
            let phi_ok = profiles.iter().all(|(_, _, p)| p.passed(tol));
            let ok = chain.passed() && phi_ok;
            let text = match cli.format {
                Format::Structured => {
                    #[derive(Serialize)]
                    struct Profile<'a> {
                        d1: usize,
                        d2: usize,
                        passed: bool,
                        profile: &'a PhiProfile,
                    }
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        schema: &'a str,
                        passed: bool,
                        chain: &'a homtree::sidorenko::BroomChainReport,
                        profiles: Vec<Profile<'a>>,
                    }
                    structured(&Doc {
                        schema: "homtree.brooms.v1",
                        passed: ok,
                        chain: &chain,
                        profiles: profiles
                            .iter()
                            .map(|(d1, d2, p)| Profile { d1: *d1, d2: *d2, passed: p.passed(tol), profile: p })
                            .collect(),
                    })?
                }
                _ => {
                    let mut out = String::new();
                    for e in &chain.entries {
                        out.push_str(&format!("B({},{}) {}\n", e.d1, e.d2, e.count));
                    }
                    out.push_str(&format!("S_{} {}\n", k, chain.star_count));
                    let chain_line: Vec<String> = chain
                        .entries
                        .iter()
                        .map(|e| e.count.to_string())
                        .chain([chain.star_count.to_string()])
                        .collect();
                    out.push_str(&format!("chain {}  {}\n", chain_line.join(" <= "), pass(chain.passed())));
                    if !profiles.is_empty() {
                        out.push('p');
                        for (d1, d2, _) in &profiles {
                            out.push_str(&format!("\tphi B({d1},{d2})"));
                        }
                        out.push('\n');
                        for (i, p) in points.iter().enumerate() {
                            out.push_str(&format!("{p:.2}"));
                            for (_, _, prof) in &profiles {
                                out.push_str(&format!("\t{:.6}", prof.values[i]));
                            }
                            out.push('\n');
                        }
                        for (d1, d2, p) in &profiles {
                            out.push_str(&format!(
                                "B({d1},{d2}): symmetry defect {:e}, min second difference {:e}, argmin {}, {}\n",
                                p.symmetry_defect,
                                p.min_second_difference,
                                p.argmin,
                                pass(p.passed(tol))
                            ));
                        }
                    } else {
                        out.push_str("no homomorphisms into the image: phi undefined\n");
                    }
                    out
                }
            };
            Ok((text, ok))
        }
        Command::Hoffman { matrix, k } => {
            let a = parse_matrix(&read(matrix)?).with_context(|| format!("invalid matrix file {}", matrix.display()))?;
            let report = hoffman_check_with_tolerance(&a, *k, tol);
            let text = match cli.format {
                Format::Structured => {
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        schema: &'a str,
                        passed: bool,
                        report: &'a homtree::hoffman::HoffmanReport,
                    }
                    structured(&Doc { schema: "homtree.hoffman.v1", passed: report.passed(), report: &report })?
                }
                _ => format!(
                    "{} ≤ {} {}\nweighted path {} ({})\nweighted star {} ({})\n",
                    report.walk_sum,
                    report.row_power_sum,
                    pass(report.inequality_holds),
                    report.weighted_path,
                    if report.path_agrees { "agrees" } else { "DISAGREES" },
                    report.weighted_star,
                    if report.star_agrees { "agrees" } else { "DISAGREES" },
                ),
            };
            Ok((text, report.passed()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.format == Format::Dot && !matches!(cli.command, Command::Order { .. }) {
        eprintln!("error: --format dot is only available for `order`");
        return ExitCode::from(2);
    }
    if cli.tolerance.is_nan() || cli.tolerance < 0.0 {
        eprintln!("error: tolerance must be nonnegative");
        return ExitCode::from(2);
    }
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

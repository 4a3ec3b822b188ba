//! Command-line front-end: closed-form dimension bounds, reference-table
//! reproduction, measurement construction with certification, sampling
//! verification, and outcome reconstruction.
//!
//! Exit codes: 0 success, 1 check/diff failure, 2 usage or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tomotopo::bounds::{
    flag_bounds, flag_product_bounds, stiefel_bounds, BoundReport, FlagPartition, StiefelParams,
};
use tomotopo::constructions::{
    bob_up1_system, bob_up2_build, bob_up2_entries, bob_up2_reconstruct, bob_up2_system,
    bob_up2_values, fixed_spectrum_system, phase_aligned_distance, rank_bounded_system,
    RankBoundedMode,
};
use tomotopo::doc::{
    pairs_to_vector, vector_to_pairs, Meta, OutcomeDocument, ReportDocument, SystemDocument,
};
use tomotopo::linalg::{haar_unitary, UnitVector};
use tomotopo::manifolds::{BobOrbitSpec, Spectrum};
use tomotopo::opsys::{povm_to_system, OperatorSystem};
use tomotopo::tables::{
    compute_table, diff_tables, parse_golden, render_csv, render_golden, render_text, CellStatus,
    TableKind,
};
use tomotopo::verify::{
    check_immersion, check_injectivity, noise_ball_check, separation_probe, stability_probe,
    BobOrbitManifold, FixedSpectrumManifold, ManifoldSampler, VerificationReport,
    IMMERSION_THRESHOLD, INJECTIVITY_THRESHOLD,
};

const DEFAULT_GOLDEN_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/tables");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Structured,
}

#[derive(Parser)]
#[command(
    name = "tomotopo",
    about = "Dimension bounds, measurement constructions and verification for constrained tomography",
    version
)]
struct Cli {
    /// Output format: text (6 significant digits), csv (tables only) or
    /// structured JSON (full precision).
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Base seed; every run is reproducible from the printed config echo.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the parallel probes (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form lower/upper bounds for a manifold descriptor.
    Bounds(BoundsArgs),
    /// Recompute the reference tables and diff them against golden copies.
    Tables(TablesArgs),
    /// Build a measurement scheme and write its document.
    Construct(ConstructArgs),
    /// Run sampling verification probes against a measurement document.
    Verify(VerifyArgs),
    /// Recover the entry vector (and unitary, when square) from outcomes.
    Reconstruct(ReconstructArgs),
}

#[derive(Args)]
struct BoundsArgs {
    /// Flag partition, e.g. 5,1,1.
    #[arg(long)]
    partition: Option<String>,
    /// Projective Stiefel parameters n,k, e.g. 9,5.
    #[arg(long)]
    stiefel: Option<String>,
    /// Product of flag partitions, factors separated by ';', e.g. 2,1;2,1.
    #[arg(long)]
    partitions: Option<String>,
}

#[derive(Args)]
struct TablesArgs {
    /// Which table: wn1, wnk, flag, stiefel or all.
    #[arg(long, default_value = "all")]
    which: String,
    /// Directory holding the golden table files.
    #[arg(long, default_value = DEFAULT_GOLDEN_DIR)]
    golden: PathBuf,
    /// Rewrite the golden files from the computed tables (reference-only
    /// rows are carried over unchanged).
    #[arg(long)]
    bless: bool,
}

#[derive(Args)]
struct ConstructArgs {
    /// Measurement model: rank-bounded, fixed-spectrum, bob-up1 or bob-up2.
    #[arg(long)]
    model: String,
    /// Hilbert-space dimension (B side for the orbit models).
    #[arg(long)]
    n: Option<usize>,
    /// Rank parameter (states of rank <= r, or the Schmidt rank).
    #[arg(long)]
    r: Option<usize>,
    /// Explicit spectrum for fixed-spectrum, e.g. 0.5,0.3,0.2.
    #[arg(long)]
    spectrum: Option<String>,
    /// Complement construction mode for the rank-bounded family.
    #[arg(long, default_value = "random-certified")]
    mode: String,
    /// Output path for the measurement document.
    #[arg(long)]
    out: PathBuf,
    /// Also sample outcomes of a seeded unitary (bob-up2 only).
    #[arg(long)]
    outcomes: Option<PathBuf>,
    /// Seed of the sampled unitary for --outcomes.
    #[arg(long)]
    unitary_seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Measurement document to verify.
    #[arg(long)]
    measurement: PathBuf,
    /// Which probes: injectivity, immersion, stability, separation,
    /// noise-ball, or all (injectivity + immersion).
    #[arg(long, default_value = "all")]
    check: String,
    /// Sampled pairs for the injectivity/stability/separation probes.
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    /// Sampled points for the immersion probe.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Rotation magnitude for the stability probe.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Rotation trials for the stability probe.
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Epsilon list (descending) for the separation probe, e.g. 1e-1,1e-2.
    #[arg(long)]
    eps: Option<String>,
    /// Noise-ball parameters epsilon,C for the noise-ball probe.
    #[arg(long)]
    ball: Option<String>,
    /// Override manifold: a fixed spectrum, e.g. 0.5,0.5,0.
    #[arg(long)]
    manifold_spectrum: Option<String>,
    /// Write the reports to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Outcome document produced by construct --outcomes.
    #[arg(long)]
    outcomes: PathBuf,
    /// Output path for the reconstruction document.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // Probe determinism does not depend on the pool size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Six-significant-digit rendering for text mode.
fn sig6(v: f64) -> String {
    format!("{v:.5e}")
}

fn parse_u64_list(s: &str) -> anyhow::Result<Vec<u64>> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| anyhow!("bad integer '{t}': {e}")))
        .collect()
}

fn parse_f64_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad number '{t}': {e}")))
        .collect()
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Bounds(args) => cmd_bounds(cli, args),
        Command::Tables(args) => cmd_tables(cli, args),
        Command::Construct(args) => cmd_construct(cli, args),
        Command::Verify(args) => cmd_verify(cli, args),
        Command::Reconstruct(args) => cmd_reconstruct(cli, args),
    }
}

fn print_bound_report_text(r: &BoundReport) {
    match &r.descriptor {
        tomotopo::bounds::BoundDescriptor::Flag { partition } => {
            println!("descriptor: flag manifold, partition {partition:?}");
        }
        tomotopo::bounds::BoundDescriptor::FlagProduct { partitions } => {
            println!("descriptor: product of flag manifolds, partitions {partitions:?}");
        }
        tomotopo::bounds::BoundDescriptor::Stiefel { n, k } => {
            println!("descriptor: projective Stiefel orbit, n={n} k={k}");
        }
    }
    println!("manifold dimension:            {}", r.manifold_dim);
    println!("largest non-immersion dim:     {}", r.max_non_immersion_dim);
    println!("largest non-embedding dim:     {}", r.max_non_embedding_dim);
    println!("smallest admissible immersion: {}", r.min_immersion_dim());
    for u in &r.upper_bounds {
        println!("upper bound [{}]:  POVM dimension {}", u.name, u.dimension);
    }
}

fn cmd_bounds(cli: &Cli, args: &BoundsArgs) -> anyhow::Result<u8> {
    let selected = [&args.partition, &args.stiefel, &args.partitions]
        .iter()
        .filter(|o| o.is_some())
        .count();
    if selected != 1 {
        bail!("give exactly one of --partition, --stiefel, --partitions");
    }
    let report = if let Some(p) = &args.partition {
        let parts = parse_u64_list(p)?;
        flag_bounds(&FlagPartition::new(parts).map_err(|e| anyhow!("{e}"))?)
    } else if let Some(s) = &args.stiefel {
        let v = parse_u64_list(s)?;
        if v.len() != 2 {
            bail!("--stiefel needs exactly n,k");
        }
        stiefel_bounds(StiefelParams::new(v[0], v[1]).map_err(|e| anyhow!("{e}"))?)
    } else {
        let factors: Vec<FlagPartition> = args
            .partitions
            .as_ref()
            .unwrap()
            .split(';')
            .map(|f| {
                let parts = parse_u64_list(f)?;
                FlagPartition::new(parts).map_err(|e| anyhow!("{e}"))
            })
            .collect::<anyhow::Result<_>>()?;
        flag_product_bounds(&factors).map_err(|e| anyhow!("{e}"))?
    };
    match cli.format {
        Format::Structured => {
            let out = serde_json::json!({
                "kind": "bound_report",
                "timestamp": timestamp(),
                "seed": cli.seed,
                "report": report,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        _ => print_bound_report_text(&report),
    }
    Ok(0)
}

fn cmd_tables(cli: &Cli, args: &TablesArgs) -> anyhow::Result<u8> {
    let kinds: Vec<TableKind> = if args.which == "all" {
        TableKind::all().to_vec()
    } else {
        vec![TableKind::parse(&args.which).map_err(|e| anyhow!("{e}"))?]
    };
    let mut any_mismatch = false;
    let mut structured = Vec::new();
    for kind in kinds {
        let computed = compute_table(kind);
        let path = args.golden.join(format!("{}.txt", kind.name()));
        if args.bless {
            let previous = std::fs::read_to_string(&path)
                .ok()
                .and_then(|t| parse_golden(kind, &t).ok());
            let text = render_golden(&computed, previous.as_ref());
            std::fs::write(&path, text).with_context(|| format!("writing {path:?}"))?;
            println!("blessed {}", path.display());
            continue;
        }
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("missing golden file {path:?}"))?;
        let golden = parse_golden(kind, &text).map_err(|e| anyhow!("{e}"))?;
        let diff = diff_tables(&computed, &golden);
        match cli.format {
            Format::Csv => print!("{}", render_csv(&computed)),
            Format::Text => {
                print!("{}", render_text(&computed));
                for cell in &diff.cells {
                    if cell.status != CellStatus::Match && cell.status != CellStatus::ReferenceOnly
                    {
                        println!(
                            "MISMATCH {} [row {}, col {}]: computed {:?}, golden {:?}",
                            kind.name(),
                            cell.row,
                            cell.col,
                            cell.computed,
                            cell.golden
                        );
                    }
                }
                let note = if kind == TableKind::Stiefel {
                    " (up1 column uses the table variant for r >= n/2)"
                } else {
                    ""
                };
                println!(
                    "{}: {}/{} cells match{}",
                    kind.name(),
                    diff.matched,
                    diff.compared,
                    note
                );
            }
            Format::Structured => {}
        }
        if cli.format == Format::Structured {
            structured.push(serde_json::json!({
                "table": computed,
                "diff": diff,
            }));
        }
        if !diff.all_match {
            any_mismatch = true;
        }
    }
    if cli.format == Format::Structured {
        let out = serde_json::json!({
            "kind": "table_reports",
            "timestamp": timestamp(),
            "seed": cli.seed,
            "reports": structured,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
    }
    Ok(if any_mismatch { 1 } else { 0 })
}

fn parse_mode(s: &str) -> anyhow::Result<RankBoundedMode> {
    match s {
        "random-certified" => Ok(RankBoundedMode::RandomCertified),
        "vandermonde" => Ok(RankBoundedMode::Vandermonde),
        other => bail!("unknown mode '{other}' (use random-certified or vandermonde)"),
    }
}

fn cmd_construct(cli: &Cli, args: &ConstructArgs) -> anyhow::Result<u8> {
    let seed = cli.seed;
    let (doc, summary) = match args.model.as_str() {
        "rank-bounded" => {
            let n = args.n.context("--n required for rank-bounded")?;
            let r = args.r.context("--r required for rank-bounded")?;
            let mode = parse_mode(&args.mode)?;
            match rank_bounded_system(n, r, mode, seed) {
                Ok((system, report)) => {
                    let meta = Meta {
                        seed: Some(seed),
                        construction: Some("rank-bounded".into()),
                        params: serde_json::json!({
                            "n": n, "r": r, "mode": args.mode,
                            "certification": report,
                        }),
                    };
                    let summary = format!(
                        "rank-bounded system on C^{n}: dimension {}, certification {}",
                        system.dimension(),
                        report.digest()
                    );
                    (SystemDocument::from_system(&system, meta), summary)
                }
                Err(e) => {
                    eprintln!("certification failed: {e}");
                    return Ok(1);
                }
            }
        }
        "fixed-spectrum" => {
            let spec_list =
                parse_f64_list(args.spectrum.as_ref().context("--spectrum required")?)?;
            let spectrum = Spectrum::new(spec_list).map_err(|e| anyhow!("{e}"))?;
            let mode = parse_mode(&args.mode)?;
            match fixed_spectrum_system(&spectrum, mode, seed) {
                Ok((system, report)) => {
                    let meta = Meta {
                        seed: Some(seed),
                        construction: Some("fixed-spectrum".into()),
                        params: serde_json::json!({
                            "spectrum": spectrum.values(),
                            "mode": args.mode,
                            "certification": report,
                        }),
                    };
                    let summary = format!(
                        "fixed-spectrum system on C^{}: dimension {}",
                        spectrum.n(),
                        system.dimension()
                    );
                    (SystemDocument::from_system(&system, meta), summary)
                }
                Err(e) => {
                    eprintln!("certification failed: {e}");
                    return Ok(1);
                }
            }
        }
        "bob-up1" => {
            let db = args.n.context("--n (B-side dimension) required")?;
            let r = args.r.context("--r (Schmidt rank) required")?;
            let spec = orbit_spec(db, r, seed)?;
            match bob_up1_system(&spec, seed) {
                Ok(con) => {
                    let meta = Meta {
                        seed: Some(seed),
                        construction: Some("bob-up1".into()),
                        params: serde_json::json!({
                            "da": spec.da(), "db": db, "rank": r,
                            "alpha": vector_to_pairs(spec.alpha().entries()),
                            "phi1_dimension": con.phi1_dimension,
                            "phi2_outcomes": con.phi2_outcomes,
                            "formula_povm_dimension": con.formula_povm_dimension,
                            "certification": con.certification,
                        }),
                    };
                    let summary = format!(
                        "two-stage orbit system (dB={db}, r={r}): dimension {}, stated POVM dimension {}",
                        con.system.dimension(),
                        con.formula_povm_dimension
                    );
                    (SystemDocument::from_system(&con.system, meta), summary)
                }
                Err(e) => {
                    eprintln!("construction failed: {e}");
                    return Ok(1);
                }
            }
        }
        "bob-up2" => {
            let db = args.n.context("--n (B-side dimension) required")?;
            let r = args.r.context("--r (Schmidt rank) required")?;
            let spec = orbit_spec(db, r, seed)?;
            let meas = bob_up2_build(&spec);
            let system = bob_up2_system(&meas).map_err(|e| anyhow!("{e}"))?;
            let meta = Meta {
                seed: Some(seed),
                construction: Some("bob-up2".into()),
                params: serde_json::json!({
                    "da": spec.da(), "db": db, "rank": r,
                    "alpha": vector_to_pairs(spec.alpha().entries()),
                    "outcome_len": meas.outcome_len(),
                }),
            };
            if let Some(out_path) = &args.outcomes {
                let useed = args.unitary_seed.unwrap_or(seed.wrapping_add(1));
                let u = haar_unitary(db, useed);
                let values = bob_up2_values(&meas, &u).map_err(|e| anyhow!("{e}"))?;
                let odoc = OutcomeDocument::new(
                    values,
                    Meta {
                        seed: Some(seed),
                        construction: Some("bob-up2".into()),
                        params: serde_json::json!({
                            "da": spec.da(), "db": db, "rank": r,
                            "alpha": vector_to_pairs(spec.alpha().entries()),
                            "unitary_seed": useed,
                        }),
                    },
                );
                std::fs::write(out_path, odoc.to_json().map_err(|e| anyhow!("{e}"))?)
                    .with_context(|| format!("writing {out_path:?}"))?;
                println!("wrote outcomes to {}", out_path.display());
            }
            let summary = format!(
                "quadratic-form orbit system (dB={db}, r={r}): dimension {}, outcome length {}",
                system.dimension(),
                meas.outcome_len()
            );
            (SystemDocument::from_system(&system, meta), summary)
        }
        other => bail!("unknown model '{other}'"),
    };
    std::fs::write(&args.out, doc.to_json().map_err(|e| anyhow!("{e}"))?)
        .with_context(|| format!("writing {:?}", args.out))?;
    match cli.format {
        Format::Structured => {
            let out = serde_json::json!({
                "kind": "construct_summary",
                "timestamp": timestamp(),
                "seed": cli.seed,
                "model": args.model,
                "out": args.out.display().to_string(),
                "summary": summary,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        _ => {
            println!("{summary}");
            println!("wrote measurement to {}", args.out.display());
        }
    }
    Ok(0)
}

/// Base state for the orbit models: maximally entangled when r = dB,
/// otherwise a seeded random state of the requested rank with dA = r.
fn orbit_spec(db: usize, r: usize, seed: u64) -> anyhow::Result<BobOrbitSpec> {
    if r == db {
        Ok(BobOrbitSpec::maximally_entangled(db))
    } else {
        BobOrbitSpec::random(r.max(2), db, r, seed).map_err(|e| anyhow!("{e}"))
    }
}

fn sampler_from_meta(
    doc: &SystemDocument,
    override_spectrum: &Option<String>,
) -> anyhow::Result<Box<dyn ManifoldSampler>> {
    if let Some(sp) = override_spectrum {
        let spectrum = Spectrum::new(parse_f64_list(sp)?).map_err(|e| anyhow!("{e}"))?;
        return Ok(Box::new(FixedSpectrumManifold { spectrum }));
    }
    let construction = doc.meta.construction.as_deref().unwrap_or("");
    let params = &doc.meta.params;
    match construction {
        "bob-up1" | "bob-up2" => {
            let da = params["da"].as_u64().context("missing da")? as usize;
            let db = params["db"].as_u64().context("missing db")? as usize;
            let alpha: Vec<[f64; 2]> =
                serde_json::from_value(params["alpha"].clone()).context("missing alpha")?;
            let alpha = UnitVector::new(pairs_to_vector(&alpha)).map_err(|e| anyhow!("{e}"))?;
            let spec = BobOrbitSpec::new(alpha, da, db).map_err(|e| anyhow!("{e}"))?;
            Ok(Box::new(BobOrbitManifold { spec }))
        }
        "fixed-spectrum" => {
            let values: Vec<f64> =
                serde_json::from_value(params["spectrum"].clone()).context("missing spectrum")?;
            let spectrum = Spectrum::new(values).map_err(|e| anyhow!("{e}"))?;
            Ok(Box::new(FixedSpectrumManifold { spectrum }))
        }
        "rank-bounded" => {
            // Rank-bounded systems separate every fixed-spectrum orbit of
            // rank <= r; verify against the pure-state orbit by default.
            let n = params["n"].as_u64().context("missing n")? as usize;
            Ok(Box::new(FixedSpectrumManifold {
                spectrum: Spectrum::pure(n),
            }))
        }
        other => bail!(
            "cannot infer a manifold from construction '{other}'; pass --manifold-spectrum"
        ),
    }
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(&args.measurement)
        .with_context(|| format!("reading {:?}", args.measurement))?;
    let doc = SystemDocument::from_json(&text).map_err(|e| anyhow!("{e}"))?;
    let system: OperatorSystem = match doc.kind.as_str() {
        "operator_system" => doc.to_system().map_err(|e| anyhow!("{e}"))?,
        "povm" => povm_to_system(&doc.to_povm().map_err(|e| anyhow!("{e}"))?),
        other => bail!("unsupported document kind '{other}'"),
    };
    let sampler = sampler_from_meta(&doc, &args.manifold_spectrum)?;

    let mut reports: Vec<VerificationReport> = Vec::new();
    let checks: Vec<&str> = if args.check == "all" {
        vec!["injectivity", "immersion"]
    } else {
        args.check.split(',').map(str::trim).collect()
    };
    for check in checks {
        let report = match check {
            "injectivity" => check_injectivity(
                &system,
                sampler.as_ref(),
                args.pairs,
                cli.seed,
                INJECTIVITY_THRESHOLD,
            )
            .map_err(|e| anyhow!("{e}"))?,
            "immersion" => check_immersion(
                &system,
                sampler.as_ref(),
                args.points,
                cli.seed,
                IMMERSION_THRESHOLD,
            )
            .map_err(|e| anyhow!("{e}"))?,
            "stability" => stability_probe(
                &system,
                sampler.as_ref(),
                args.delta,
                args.trials,
                args.pairs / args.trials.max(1),
                cli.seed,
                INJECTIVITY_THRESHOLD,
            )
            .map_err(|e| anyhow!("{e}"))?,
            "separation" => {
                let eps = parse_f64_list(
                    args.eps.as_deref().unwrap_or("1e-1,1e-2,1e-3"),
                )?;
                separation_probe(&system, sampler.as_ref(), &eps, args.pairs, cli.seed, 10.0)
                    .map_err(|e| anyhow!("{e}"))?
            }
            "noise-ball" => {
                let ball = parse_f64_list(args.ball.as_deref().unwrap_or("1e-3,60"))?;
                if ball.len() != 2 {
                    bail!("--ball needs epsilon,C");
                }
                let povm = match doc.kind.as_str() {
                    "povm" => doc.to_povm().map_err(|e| anyhow!("{e}"))?,
                    _ => tomotopo::opsys::system_to_povm(&system).map_err(|e| anyhow!("{e}"))?,
                };
                noise_ball_check(&povm, sampler.as_ref(), ball[0], ball[1], args.pairs, cli.seed)
                    .map_err(|e| anyhow!("{e}"))?
            }
            other => bail!("unknown check '{other}'"),
        };
        reports.push(report);
    }

    let all_pass = reports.iter().all(|r| r.pass);
    match cli.format {
        Format::Structured => {
            let out = serde_json::json!({
                "kind": "verification_reports",
                "timestamp": timestamp(),
                "seed": cli.seed,
                "measurement": args.measurement.display().to_string(),
                "reports": reports,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        _ => {
            for r in &reports {
                println!("{}", r.summary());
            }
        }
    }
    if let Some(path) = &args.out {
        let docs: Vec<ReportDocument> = reports
            .iter()
            .map(|r| {
                ReportDocument::new(
                    r.clone(),
                    Meta {
                        seed: Some(cli.seed),
                        construction: doc.meta.construction.clone(),
                        params: serde_json::Value::Null,
                    },
                )
            })
            .collect();
        std::fs::write(path, serde_json::to_string_pretty(&docs)?)
            .with_context(|| format!("writing {path:?}"))?;
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_reconstruct(cli: &Cli, args: &ReconstructArgs) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(&args.outcomes)
        .with_context(|| format!("reading {:?}", args.outcomes))?;
    let odoc = OutcomeDocument::from_json(&text).map_err(|e| anyhow!("{e}"))?;
    let params = &odoc.meta.params;
    let da = params["da"].as_u64().context("missing da")? as usize;
    let db = params["db"].as_u64().context("missing db")? as usize;
    let alpha: Vec<[f64; 2]> =
        serde_json::from_value(params["alpha"].clone()).context("missing alpha")?;
    let alpha = UnitVector::new(pairs_to_vector(&alpha)).map_err(|e| anyhow!("{e}"))?;
    let spec = BobOrbitSpec::new(alpha, da, db).map_err(|e| anyhow!("{e}"))?;
    let meas = bob_up2_build(&spec);
    let m = match bob_up2_reconstruct(&meas, &odoc.values) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("reconstruction failed: {e}");
            return Ok(1);
        }
    };

    // When the truth is recomputable from a recorded unitary seed, report
    // the phase-aligned reconstruction error.
    let mut error = None;
    if let Some(useed) = params["unitary_seed"].as_u64() {
        let u = haar_unitary(db, useed);
        let m_true = bob_up2_entries(&meas, &u).map_err(|e| anyhow!("{e}"))?;
        error = Some(phase_aligned_distance(&m, &m_true));
    }

    // A square entry vector is the framed unitary itself: map it back to
    // the computational basis.
    let unitary = if spec.rank() == db {
        let f = &spec.schmidt().right;
        let u_s = tomotopo::linalg::CMatrix::from_fn(db, db, |i, j| m[i * db + j]);
        Some(f * u_s * f.adjoint())
    } else {
        None
    };

    let m_pairs: Vec<[f64; 2]> = m.iter().map(|z| [z.re, z.im]).collect();
    let out = serde_json::json!({
        "kind": "reconstruction",
        "m": m_pairs,
        "unitary": unitary.as_ref().map(|u| tomotopo::doc::MatrixData::from_matrix(u)),
        "phase_aligned_error": error,
        "meta": { "seed": cli.seed, "source": args.outcomes.display().to_string() },
    });
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&out)?)
            .with_context(|| format!("writing {path:?}"))?;
    }
    match cli.format {
        Format::Structured => {
            let echo = serde_json::json!({
                "kind": "reconstruction_summary",
                "timestamp": timestamp(),
                "seed": cli.seed,
                "entries": m_pairs.len(),
                "phase_aligned_error": error,
            });
            println!("{}", serde_json::to_string_pretty(&echo)?);
        }
        _ => {
            println!("reconstructed {} entries", m_pairs.len());
            if let Some(e) = error {
                println!("phase-aligned error: {}", sig6(e));
            }
            if unitary.is_some() {
                println!("square entry vector: recovered the unitary up to a global phase");
            }
        }
    }
    Ok(0)
}

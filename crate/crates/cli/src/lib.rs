//! Command-line orchestration: `mine`, `levels`, `delta`, `stability` and
//! `report` over FIMI or CSV inputs, with deterministic exports.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! malformed input), 3 resource-cap abort (concept cap, candidate cap,
//! exhaustive budget, truncated levels).

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use delta_closure::concepts::{build_graph, enumerate_closed, MinerConfig};
use delta_closure::delta::{
    annotate_all, compute_partition, level_distribution, AnnotateConfig, BinRule,
};
use delta_closure::levels::{closure_index, enumerate_levels, LevelConfig};
use delta_closure::report::{
    concepts_csv, export_results, levels_csv, stability_json, survival_csv,
};
use delta_closure::stability::{
    survival_curve, verify_removal_bound, RemovalProperty, StabilityConfig, SurvivalConfig,
    VerifyMode,
};
use delta_closure::{CsvMode, Error, FormalContext};

#[derive(Parser, Debug)]
#[command(
    name = "delta-closure",
    version,
    about = "Mine the closure structure of a binary dataset",
    disable_help_subcommand = true
)]
pub struct RunConfig {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate closed itemsets and their covering graph.
    Mine(MineArgs),
    /// Mine passkey levels and report the closure index.
    Levels(LevelsArgs),
    /// Delta-class partitions for chosen thresholds.
    Delta(DeltaArgs),
    /// Removal bounds and sampling survival rates.
    Stability(StabilityArgs),
    /// Full pipeline with distribution figure and hashed exports.
    Report(ReportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Fimi,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CsvModeArg {
    /// Cells are 0/1.
    Binary,
    /// Cells are blank or x.
    Mark,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Dataset path.
    #[arg(long)]
    input: PathBuf,
    /// Input format.
    #[arg(long, value_enum, default_value = "fimi")]
    format: Format,
    /// Treat the first CSV row as attribute names.
    #[arg(long)]
    csv_header: bool,
    /// CSV cell encoding.
    #[arg(long, value_enum, default_value = "binary")]
    csv_mode: CsvModeArg,
    /// Worker threads (1 = sequential, 0 = one per core).
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Abort when the concept count exceeds this.
    #[arg(long, default_value_t = 100_000_000)]
    concept_cap: usize,
    /// Output directory for exports.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args, Debug)]
struct LevelArgs {
    /// Stop leveling past this passkey size.
    #[arg(long)]
    max_level: Option<usize>,
    /// Passkeys stored per concept (exact counts are always kept).
    #[arg(long, default_value_t = 64)]
    passkey_cap: usize,
    /// Abort once this many key candidates were tested.
    #[arg(long, default_value_t = 50_000_000)]
    candidate_cap: usize,
}

#[derive(Args, Debug)]
struct LevelsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    levels: LevelArgs,
}

#[derive(Args, Debug)]
struct DeltaArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    levels: LevelArgs,
    /// Thresholds to partition at, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    delta: Vec<u32>,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    levels: LevelArgs,
    /// Keep fractions for the survival curve, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.9")]
    keep: Vec<f64>,
    /// Sampled subcontexts per keep fraction.
    #[arg(long, default_value_t = 20)]
    trials: u32,
    /// Seed for all sampling.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also verify removal bounds exhaustively for concepts whose delta is
    /// at most this (0 = skip).
    #[arg(long, default_value_t = 0)]
    verify_delta: u32,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    levels: LevelArgs,
    /// Distribution bins.
    #[arg(long, default_value_t = 10)]
    bins: usize,
}

/// Runs the CLI; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap prints its own help/version through this path
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { 0 } else { 1 };
        }
    };
    match execute(config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Csv { .. } | Error::Io { .. } => 2,
        Error::ConceptCapExceeded { .. }
        | Error::CandidateCapExceeded { .. }
        | Error::BudgetExceeded { .. }
        | Error::Unleveled { .. }
        | Error::OracleLimit { .. }
        | Error::IncompleteConcepts { .. } => 3,
    }
}

fn load_context(args: &InputArgs) -> Result<FormalContext, Error> {
    let text = fs::read_to_string(&args.input).map_err(|source| Error::Io {
        path: args.input.clone(),
        source,
    })?;
    match args.format {
        Format::Fimi => FormalContext::parse_fimi(&text),
        Format::Csv => FormalContext::parse_csv(
            &text,
            args.csv_header,
            match args.csv_mode {
                CsvModeArg::Binary => CsvMode::Binary,
                CsvModeArg::Mark => CsvMode::Mark,
            },
        ),
    }
}

fn miner_config(args: &InputArgs) -> MinerConfig {
    MinerConfig {
        concept_cap: args.concept_cap,
        workers: args.workers,
    }
}

fn level_config(input: &InputArgs, levels: &LevelArgs) -> LevelConfig {
    LevelConfig {
        max_level: levels.max_level,
        passkey_cap: levels.passkey_cap,
        candidate_cap: levels.candidate_cap,
        workers: input.workers,
    }
}

fn ensure_out(dir: &PathBuf) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })
}

fn execute(config: RunConfig) -> Result<(), Error> {
    match config.command {
        Command::Mine(args) => {
            let ctx = load_context(&args.input)?;
            let t0 = Instant::now();
            let concepts = enumerate_closed(&ctx, &miner_config(&args.input))?;
            let enumerate_ms = t0.elapsed().as_millis();
            let t1 = Instant::now();
            let graph = build_graph(&ctx, concepts)?;
            let graph_ms = t1.elapsed().as_millis();
            println!(
                "{}: {} concepts ({} supported), enumerate {} ms, graph {} ms",
                args.input.input.display(),
                graph.len(),
                graph.supported_count(),
                enumerate_ms,
                graph_ms
            );
            if let Some(dir) = &args.input.out {
                ensure_out(dir)?;
                let path = dir.join("concepts.csv");
                fs::write(&path, concepts_csv(&ctx, &graph, None))
                    .map_err(|source| Error::Io { path, source })?;
                println!("wrote {}", dir.join("concepts.csv").display());
            }
            Ok(())
        }
        Command::Levels(args) => {
            let ctx = load_context(&args.input)?;
            let t0 = Instant::now();
            let graph = build_graph(&ctx, enumerate_closed(&ctx, &miner_config(&args.input))?)?;
            let mine_ms = t0.elapsed().as_millis();
            let t1 = Instant::now();
            let structure =
                enumerate_levels(&ctx, &graph, &level_config(&args.input, &args.levels))?;
            let levels_ms = t1.elapsed().as_millis();
            let ci = closure_index(&structure)?;
            println!(
                "{}: {} concepts ({} supported), CI = {}, mine {} ms, levels {} ms",
                args.input.input.display(),
                graph.len(),
                graph.supported_count(),
                ci,
                mine_ms,
                levels_ms
            );
            if let Some(dir) = &args.input.out {
                ensure_out(dir)?;
                for (name, content) in [
                    ("concepts.csv", concepts_csv(&ctx, &graph, Some(&structure))),
                    ("levels.csv", levels_csv(&ctx, &graph, &structure)),
                ] {
                    let path = dir.join(name);
                    fs::write(&path, content).map_err(|source| Error::Io { path, source })?;
                }
                println!("wrote {}", dir.join("levels.csv").display());
            }
            Ok(())
        }
        Command::Delta(args) => {
            let ctx = load_context(&args.input)?;
            let annotated = annotate_all(
                &ctx,
                &AnnotateConfig {
                    miner: miner_config(&args.input),
                    levels: level_config(&args.input, &args.levels),
                },
            )?;
            let ci = closure_index(&annotated.structure)?;
            println!(
                "{}: {} concepts ({} supported), CI = {}, levels {} ms, delta {} ms",
                args.input.input.display(),
                annotated.graph.len(),
                annotated.graph.supported_count(),
                ci,
                annotated.timings.levels_ms,
                annotated.timings.delta_ms
            );
            for &d in &args.delta {
                if d < 1 || d as usize > ctx.n_objects().max(1) {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!(
                            "threshold {d} outside 1..={}",
                            ctx.n_objects().max(1)
                        ),
                    });
                }
                let partition = compute_partition(&annotated.graph, d, Some(&annotated.structure));
                println!("d={}: {} classes", d, partition.class_count());
            }
            if let Some(dir) = &args.input.out {
                ensure_out(dir)?;
                let path = dir.join("delta.json");
                fs::write(
                    &path,
                    delta_closure::report::delta_json(
                        &ctx,
                        &annotated.graph,
                        &annotated.structure,
                        &annotated.annotation,
                    ),
                )
                .map_err(|source| Error::Io { path, source })?;
                println!("wrote {}", dir.join("delta.json").display());
            }
            Ok(())
        }
        Command::Stability(args) => {
            let ctx = load_context(&args.input)?;
            if args.keep.iter().any(|f| *f <= 0.0 || *f > 1.0) {
                return Err(Error::Parse {
                    line: 0,
                    msg: "keep fractions must lie in (0, 1]".into(),
                });
            }
            let annotated = annotate_all(
                &ctx,
                &AnnotateConfig {
                    miner: miner_config(&args.input),
                    levels: level_config(&args.input, &args.levels),
                },
            )?;
            let rows = survival_curve(
                &ctx,
                &annotated.graph,
                &annotated.structure,
                &annotated.annotation,
                &args.keep,
                &SurvivalConfig {
                    seed: args.seed,
                    trials: args.trials,
                    ..SurvivalConfig::default()
                },
            );
            let mut entries = Vec::new();
            if args.verify_delta > 0 {
                let stability_config = StabilityConfig::default();
                for c in 0..annotated.graph.len() as u32 {
                    let dc = annotated.annotation.delta_cls(c);
                    if dc >= 1 && dc <= args.verify_delta {
                        entries.push(verify_removal_bound(
                            &ctx,
                            &annotated.graph.concept(c).intent.clone(),
                            RemovalProperty::Closed,
                            dc,
                            VerifyMode::Exhaustive,
                            &stability_config,
                        )?);
                    }
                }
                let violations = entries.iter().filter(|e| !e.verified).count();
                println!(
                    "verified removal bounds for {} concepts, {} violations",
                    entries.len(),
                    violations
                );
            }
            println!(
                "{}: survival over {:?} with {} trials (seed {})",
                args.input.input.display(),
                args.keep,
                args.trials,
                args.seed
            );
            for row in rows.iter().filter(|r| r.group_by == "delta_cls") {
                println!(
                    "keep {:.2} delta_cls={}: closed {:.3}, passkey {:.3}",
                    row.keep_fraction,
                    row.group_value,
                    row.closed_rate(),
                    row.passkey_rate()
                );
            }
            if let Some(dir) = &args.input.out {
                ensure_out(dir)?;
                for (name, content) in [
                    ("survival.csv", survival_csv(&rows)),
                    ("stability.json", stability_json(&entries, &rows)),
                ] {
                    let path = dir.join(name);
                    fs::write(&path, content).map_err(|source| Error::Io { path, source })?;
                }
                println!("wrote {}", dir.join("stability.json").display());
            }
            Ok(())
        }
        Command::Report(args) => {
            let ctx = load_context(&args.input)?;
            let annotated = annotate_all(
                &ctx,
                &AnnotateConfig {
                    miner: miner_config(&args.input),
                    levels: level_config(&args.input, &args.levels),
                },
            )?;
            let ci = closure_index(&annotated.structure)?;
            let dist = level_distribution(
                &annotated.annotation,
                &annotated.structure,
                args.bins,
                BinRule::Quantile,
            )?;
            println!(
                "{}: {} concepts ({} supported), CI = {}, levels {} ms, delta {} ms",
                args.input.input.display(),
                annotated.graph.len(),
                annotated.graph.supported_count(),
                ci,
                annotated.timings.levels_ms,
                annotated.timings.delta_ms
            );
            if let Some(dir) = &args.input.out {
                let manifest = export_results(
                    &ctx,
                    &annotated.graph,
                    &annotated.structure,
                    &annotated.annotation,
                    &dist,
                    dir,
                )?;
                println!(
                    "wrote {} files to {}",
                    manifest.files.len() + 1,
                    dir.display()
                );
            }
            Ok(())
        }
    }
}

//! Command-line driver: capacity-κ diary traces, distortion measurements
//! for the hexagonal-group embedding, and projection-system verification.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 on usage or parse errors. All commands are deterministic under a
//! fixed seed; `TREEMBED_THREADS` caps the worker pool.

use std::collections::BTreeSet;
use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use treembed::coxeter::ball;
use treembed::diary::{alice_diary, EventRef};
use treembed::embed::{auto_selection, distortion_report, HexEmbedder, HexParams};
use treembed::projection::{
    build_complexes, generate_tree_segments, verify_axioms, verify_properties, verify_complexes,
    AxiomReport, InstanceSpec, VerifyOptions, VerifyReport,
};
use treembed::words::Alphabet;

#[derive(Parser)]
#[command(
    name = "treembed",
    version,
    about = "Diary compression, tree embeddings, and projection complexes"
)]
struct Cli {
    /// JSON config file whose fields mirror the flags; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run capacity-κ diaries over sentences and emit a JSON trace.
    Diary(DiaryArgs),
    /// Embed a ball of the hexagonal group and measure distortion.
    Embed(EmbedArgs),
    /// Build and verify a projection-system instance.
    Proj(ProjArgs),
}

#[derive(Args)]
struct DiaryArgs {
    /// Diary capacity (pages per chapter); must be positive.
    #[arg(long)]
    kappa: Option<u64>,
    /// Write the JSON trace here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Sentences like "abac|cb"; read one per line from stdin when absent.
    sentences: Vec<String>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Seed for pair sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Ball radius to enumerate.
    #[arg(long)]
    radius: Option<u32>,
    /// Pair sample size (full enumeration when the ball is small enough).
    #[arg(long)]
    pairs: Option<usize>,
    /// Override the diary capacity (smaller runs faster, weaker bounds).
    #[arg(long)]
    kappa: Option<u64>,
    /// Directory for distortion.csv and summary.json (default ".").
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProjArgs {
    /// Seed for instance generation, representatives, and sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Instance description in JSON; a seeded random instance when absent.
    #[arg(long, value_name = "FILE")]
    instance: Option<PathBuf>,
    /// Projection threshold K (default max(2, 4θ+1)).
    #[arg(long, value_name = "K")]
    big_k: Option<u64>,
    /// Comma-separated subset of axioms,complexes,properties (default all).
    #[arg(long)]
    checks: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Defaults loaded from `--config`; field names mirror the flags.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    radius: Option<u32>,
    pairs: Option<usize>,
    kappa: Option<u64>,
    big_k: Option<u64>,
    out: Option<PathBuf>,
    instance: Option<PathBuf>,
    checks: Option<String>,
}

fn main() -> ExitCode {
    if let Ok(value) = std::env::var("TREEMBED_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: TREEMBED_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Diary(args) => cmd_diary(args, config),
        Command::Embed(args) => cmd_embed(args, config),
        Command::Proj(args) => cmd_proj(args, config),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct DiaryEntryDoc {
    input: String,
    chapters: Vec<String>,
    leftovers: Vec<String>,
    /// Source event of each page, chapter by chapter; page 1 is the
    /// newest event of its day.
    pages: Vec<Vec<EventRef>>,
    unrecorded: Vec<EventRef>,
}

#[derive(Serialize)]
struct DiaryDoc {
    kappa: u64,
    inputs: Vec<DiaryEntryDoc>,
}

fn cmd_diary(args: DiaryArgs, config: FileConfig) -> Result<bool> {
    let kappa = args
        .kappa
        .or(config.kappa)
        .context("diary requires --kappa")?;
    if kappa == 0 {
        bail!("--kappa must be positive");
    }
    let lines: Vec<String> = if args.sentences.is_empty() {
        let mut buffer = String::new();
        std::io::stdin()
            .read_to_string(&mut buffer)
            .context("reading sentences from stdin")?;
        buffer
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect()
    } else {
        args.sentences
    };

    let mut inputs = Vec::with_capacity(lines.len());
    if !lines.is_empty() {
        let symbols: BTreeSet<char> =
            lines.iter().flat_map(|l| l.chars()).filter(|&c| c != '|').collect();
        if symbols.is_empty() {
            bail!("inputs contain no letters");
        }
        let alphabet = Alphabet::new(symbols.iter().map(char::to_string))
            .context("building the alphabet from the inputs")?;
        for line in &lines {
            let sentence = alphabet
                .sentence(line)
                .with_context(|| format!("parsing sentence {line:?}"))?;
            let trace = alice_diary(kappa as usize, &sentence)?;
            let chapters =
                trace.chapters.iter().map(|w| alphabet.render_word(w)).collect();
            let leftovers =
                trace.leftovers.iter().map(|w| alphabet.render_word(w)).collect();
            let pages = (1..=trace.provenance.chapters())
                .map(|c| trace.provenance.pages(c).to_vec())
                .collect();
            inputs.push(DiaryEntryDoc {
                input: line.clone(),
                chapters,
                leftovers,
                pages,
                unrecorded: trace.provenance.unrecorded(),
            });
        }
    }
    let doc = DiaryDoc { kappa, inputs };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(&args.out.or(config.out), &text)?;
    Ok(true)
}

fn cmd_embed(args: EmbedArgs, config: FileConfig) -> Result<bool> {
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let radius = args.radius.or(config.radius).unwrap_or(3);
    let pairs = args.pairs.or(config.pairs).unwrap_or(10_000);
    if radius == 0 {
        bail!("--radius must be positive");
    }
    if pairs == 0 {
        bail!("--pairs must be positive");
    }
    let kappa_override = args.kappa.or(config.kappa);
    if kappa_override == Some(0) {
        bail!("--kappa must be positive");
    }
    let embedder = HexEmbedder::with_params(HexParams::standard(), kappa_override);
    let elements = ball(radius).context("enumerating the ball")?;
    let selection = auto_selection(elements.len(), 1_000_000, pairs, seed);
    let report = distortion_report(&embedder, &elements, selection, radius)?;

    let out_dir = args.out.or(config.out).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let csv_path = out_dir.join("distortion.csv");
    let mut writer = csv::Writer::from_path(&csv_path)
        .with_context(|| format!("writing {}", csv_path.display()))?;
    writer.write_record(["g", "g'", "d_G", "d_F", "d_DF", "criterion_used"])?;
    for row in &report.rows {
        writer.write_record([
            row.g.as_str(),
            row.h.as_str(),
            &row.d_g.to_string(),
            &row.d_f.to_string(),
            &row.d_df.to_string(),
            row.criterion.as_str(),
        ])?;
    }
    writer.flush()?;

    let mut json = serde_json::to_string_pretty(&report.summary)?;
    json.push('\n');
    fs::write(out_dir.join("summary.json"), &json)?;
    print!("{json}");
    Ok(report.summary.coordinates_exact
        && report.summary.lipschitz_ok
        && report.summary.lower_bound_ok)
}

#[derive(Serialize)]
struct ProjDoc {
    instance: InstanceSpec,
    n_indices: usize,
    theta: u64,
    k: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    axioms: Option<AxiomReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    complexes: Option<VerifyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    properties: Option<VerifyReport>,
    passed: bool,
}

fn cmd_proj(args: ProjArgs, config: FileConfig) -> Result<bool> {
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let spec = match args.instance.or(config.instance) {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading instance {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing instance {}", path.display()))?
        }
        None => generate_tree_segments(seed, 120, 12)?,
    };
    let sys = spec.build().context("building the instance")?;
    let k = args
        .big_k
        .or(config.big_k)
        .unwrap_or_else(|| (4 * sys.theta() + 1).max(2));

    let selected = args
        .checks
        .or(config.checks)
        .unwrap_or_else(|| "axioms,complexes,properties".into());
    let (mut axioms, mut complexes, mut properties) = (false, false, false);
    for name in selected.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "axioms" => axioms = true,
            "complexes" => complexes = true,
            "properties" => properties = true,
            other => bail!("unknown check {other:?} (expected axioms, complexes, properties)"),
        }
    }
    if !(axioms || complexes || properties) {
        bail!("--checks selected nothing");
    }

    let opts = VerifyOptions { seed, ..VerifyOptions::default() };
    let mut doc = ProjDoc {
        instance: spec,
        n_indices: sys.n_indices(),
        theta: sys.theta(),
        k,
        axioms: None,
        complexes: None,
        properties: None,
        passed: true,
    };
    if axioms {
        let report = verify_axioms(&sys);
        doc.passed &= report.passes;
        doc.axioms = Some(report);
    }
    if complexes {
        let bundle = build_complexes(&sys, k, 0, seed).context("building the complexes")?;
        let report = verify_complexes(&sys, &bundle, &opts)?;
        doc.passed &= report.passed;
        doc.complexes = Some(report);
    }
    if properties {
        let report = verify_properties(&sys, k, &opts)?;
        doc.passed &= report.passed;
        doc.properties = Some(report);
    }

    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(&args.out.or(config.out), &text)?;
    Ok(doc.passed)
}

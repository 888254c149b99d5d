//! `dlview` batch driver.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error, 3 flags found.

mod config;
mod fsio;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use dlview::corpus::{attach_covariates, parse_covariates, serialize_covariates};
use dlview::detect::{format_report, scan_tree, sort_records, FlagRecord};
use dlview::edit::{apply_script, EditScript};
use dlview::extract::extract_binary_tree;
use dlview::ingest::{parse_vess, serialize_dltree};
use dlview::layout::build_layout;
use dlview::render::render_svg;
use dlview::stats::{format_comparison_table, format_flag_table, region_age_analysis, summarize_flags};
use dlview::synth::{format_truths, generate_corpus, CorpusParams, InjectionPlan};
use dlview::{BinaryTree, CorpusEntry};
use rayon::prelude::*;

use crate::config::Settings;
use crate::fsio::{ensure_dir, load_corpus, output_path, read_text, write_atomic, write_corpus};

#[derive(Parser, Debug)]
#[command(name = "dlview", version, about = "Descendant-level views and cleaning of vessel binary trees")]
struct Cli {
    /// Worker threads for per-file work.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..=1024))]
    jobs: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert raw vessel graphs (.vess) into binary trees (.dltree).
    Extract {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Draw the D-L view of each tree as SVG.
    Render {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        settings: SettingsArgs,
        #[arg(long)]
        width: Option<u32>,
        #[arg(long)]
        height: Option<u32>,
        #[arg(long)]
        jitter_seed_salt: Option<u64>,
    },
    /// Run the discrepancy detectors over a corpus directory.
    Scan {
        dir: PathBuf,
        #[command(flatten)]
        settings: SettingsArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Flag report (TSV); printed to stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Apply an edit script to a corpus directory.
    ApplyEdits {
        dir: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Generate a synthetic corpus with ground truth.
    Synth {
        #[arg(long)]
        subjects: usize,
        /// Drop in root split probability per year of age.
        #[arg(long, default_value_t = 0.0)]
        effect: f64,
        /// `none` or e.g. `misconnection=0.08,starting_point=0.08,vein=0.08,margin=5`.
        #[arg(long, default_value = "none")]
        inject: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Root split probability at the youngest age.
        #[arg(long)]
        p0: Option<f64>,
        #[arg(long)]
        decay: Option<f64>,
    },
    /// Flag summary and covariate regressions for one or two corpora.
    Stats {
        dir: PathBuf,
        #[arg(long)]
        covariates: PathBuf,
        /// Second corpus (e.g. the cleaned version) for a side-by-side column.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[command(flatten)]
        settings: SettingsArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Output TSV; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SettingsArgs {
    /// `key = value` settings file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectorArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    misconnection_min_subtree: Option<usize>,
    #[arg(long)]
    startpoint_thick: Option<f64>,
    #[arg(long)]
    startpoint_min_chain: Option<usize>,
}

enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome = Result<ExitCode, Failure>;

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn load_settings(args: &SettingsArgs) -> Result<Settings, Failure> {
    let mut s = Settings::default();
    if let Some(path) = &args.config {
        let text = read_text(path).map_err(usage)?;
        s.apply_text(&text)
            .with_context(|| path.display().to_string())
            .map_err(usage)?;
    }
    Ok(s)
}

fn finish(mut s: Settings, det: Option<&DetectorArgs>) -> Result<Settings, Failure> {
    if let Some(d) = det {
        if let Some(v) = d.epsilon {
            s.detector.epsilon_mm = v;
        }
        if let Some(v) = d.misconnection_min_subtree {
            s.detector.misconnection_min_subtree = v;
        }
        if let Some(v) = d.startpoint_thick {
            s.detector.startpoint_thick_mm = v;
        }
        if let Some(v) = d.startpoint_min_chain {
            s.detector.startpoint_min_chain = v;
        }
    }
    s.validate().map_err(usage)?;
    Ok(s)
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn scan_corpus(trees: &[BinaryTree], settings: &Settings) -> Vec<FlagRecord> {
    let mut records: Vec<FlagRecord> = trees
        .par_iter()
        .flat_map_iter(|t| scan_tree(t, &settings.detector))
        .collect();
    sort_records(&mut records);
    records
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Extract { inputs, out_dir } => {
            ensure_dir(&out_dir)?;
            inputs.par_iter().try_for_each(|input| -> anyhow::Result<()> {
                let text = read_text(input)?;
                let graph = parse_vess(&text).map_err(|e| anyhow!("{}:{e}", input.display()))?;
                let tree = extract_binary_tree(&graph).with_context(|| input.display().to_string())?;
                write_atomic(&output_path(&out_dir, input, "dltree")?, serialize_dltree(&tree).as_bytes())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { inputs, out_dir, settings, width, height, jitter_seed_salt } => {
            let mut s = load_settings(&settings)?;
            if let Some(w) = width {
                s.render.width = w;
            }
            if let Some(h) = height {
                s.render.height = h;
            }
            if let Some(salt) = jitter_seed_salt {
                s.layout.jitter_salt = salt;
            }
            let s = finish(s, None)?;
            ensure_dir(&out_dir)?;
            inputs.par_iter().try_for_each(|input| -> anyhow::Result<()> {
                let tree = fsio::load_tree(input)?;
                let svg = render_svg(&build_layout(&tree, &s.layout), &s.render);
                write_atomic(&output_path(&out_dir, input, "svg")?, svg.as_bytes())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Scan { dir, settings, detector, report } => {
            let s = finish(load_settings(&settings)?, Some(&detector))?;
            let trees = load_corpus(&dir)?;
            let records = scan_corpus(&trees, &s);
            emit(report.as_deref(), &format_report(&records))?;
            if records.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{} flag(s) in {} tree(s)", records.len(), summarize_flags(&records, trees.len()).total_trees);
                Ok(ExitCode::from(3))
            }
        }
        Command::ApplyEdits { dir, script, out_dir } => {
            let text = read_text(&script)?;
            let script_parsed = EditScript::parse(&text).map_err(|e| anyhow!("{}: {e}", script.display()))?;
            let corpus: Vec<CorpusEntry> = load_corpus(&dir)?
                .into_iter()
                .map(|tree| CorpusEntry { tree, covariate: None })
                .collect();
            let edited = apply_script(corpus, &script_parsed).map_err(|e| anyhow!("{}: {e}", script.display()))?;
            write_corpus(&out_dir, edited.iter().map(|e| &e.tree).collect::<Vec<_>>())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { subjects, effect, inject, seed, out_dir, p0, decay } => {
            let mut params = CorpusParams::new(subjects, effect, seed);
            params.injection = InjectionPlan::parse(&inject).map_err(usage)?;
            if let Some(p) = p0 {
                params.gen.p0 = p;
            }
            if let Some(d) = decay {
                params.gen.decay = d;
            }
            if !effect.is_finite() {
                return Err(usage(anyhow!("effect must be finite")));
            }
            let corpus = generate_corpus(&params).map_err(usage)?;
            write_corpus(&out_dir, corpus.entries.iter().map(|e| &e.tree).collect::<Vec<_>>())?;
            let ages = dlview::corpus::collect_covariates(&corpus.entries);
            write_atomic(&out_dir.join("ages.tsv"), serialize_covariates(&ages).as_bytes())?;
            write_atomic(&out_dir.join("ground_truth.tsv"), format_truths(&corpus.truths).as_bytes())?;
            let script = EditScript { commands: corpus.truths.iter().map(|t| t.correction.clone()).collect() };
            write_atomic(&out_dir.join("corrections.txt"), script.to_text().as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { dir, covariates, compare, settings, detector, out } => {
            let s = finish(load_settings(&settings)?, Some(&detector))?;
            let table = read_text(&covariates)?;
            let ages = parse_covariates(&table).map_err(|e| anyhow!("{}:{e}", covariates.display()))?;
            let mut text = String::new();
            let mut columns = Vec::new();
            for d in std::iter::once(&dir).chain(compare.as_ref()) {
                let trees = load_corpus(d)?;
                let records = scan_corpus(&trees, &s);
                let summary = summarize_flags(&records, trees.len());
                text.push_str(&format!("# flag summary: {}\n", label(d)));
                text.push_str(&format_flag_table(&summary));
                text.push('\n');
                let mut entries: Vec<CorpusEntry> =
                    trees.into_iter().map(|tree| CorpusEntry { tree, covariate: None }).collect();
                attach_covariates(&mut entries, &ages).with_context(|| d.display().to_string())?;
                let results = region_age_analysis(&entries).with_context(|| d.display().to_string())?;
                columns.push((label(d), results));
            }
            let cols: Vec<(&str, _)> = columns.iter().map(|(l, r)| (l.as_str(), *r)).collect();
            text.push_str(&format_comparison_table(&cols));
            emit(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn label(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

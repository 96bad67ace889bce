use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use deckgen::docmodel::ScoreVector;
use deckgen::ingest::{load_corpus, read_document, CorpusPair};
use deckgen::labeler::{label_document, sweep_window_sizes, WindowConfig};
use deckgen::pipeline::{
    deck_for_document, evaluate_checkpoint, run_pipeline, train, LabelSource, Model, TrainConfig,
};
use deckgen::selector::{select_for_document, SelectorRegistry};
use deckgen::slidegen::{build_df_index, render, DfIndex, RenderFormat, Tagger};
use deckgen::{Error, Result};

#[derive(Parser)]
#[command(name = "deckgen", version, about = "Generate slide decks from scientific papers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Oracle labels for every document, as JSON lines.
    Label {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        slides: PathBuf,
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(long)]
        max_per_window: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model and write its best checkpoint.
    Train {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        slides: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Label cache file (JSON lines), created if missing.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score the sentences of one document.
    Rank {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        doc: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose sentences under the word budget.
    Select {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        doc: PathBuf,
        #[arg(long, default_value = "exact")]
        method: String,
        #[arg(long, default_value_t = 0.2)]
        fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and render a deck for one document.
    Slides {
        #[arg(long)]
        doc: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value = "exact")]
        method: String,
        #[arg(long, default_value_t = 0.2)]
        fraction: f64,
        #[arg(long)]
        df_index: Option<PathBuf>,
        #[arg(long, default_value = "markdown")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ROUGE recall of model selections against reference slides.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        slides: PathBuf,
        #[arg(long, default_value = "exact")]
        method: String,
        #[arg(long, default_value_t = 0.2)]
        fraction: f64,
    },
    /// Oracle ROUGE for a range of window sizes.
    Sweep {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        slides: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "3,5,7,10,15")]
        windows: Vec<usize>,
    },
    /// Document-frequency index of noun phrases over a corpus.
    DfIndex {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label, train, select and write decks in one run.
    Pipeline {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        slides: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        df_index: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct LabelLine<'a> {
    id: &'a str,
    labels: &'a [u8],
}

#[derive(Serialize, Deserialize)]
struct ScoresFile {
    id: String,
    scores: Vec<f64>,
}

#[derive(Serialize)]
struct SelectionFile<'a> {
    id: &'a str,
    method: &'a str,
    max_len: usize,
    selected: Vec<u8>,
    positions: Vec<usize>,
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<TrainConfig> {
    match path {
        Some(p) => TrainConfig::from_file(p),
        None => Ok(TrainConfig::default()),
    }
}

fn read_scores(path: &Path, doc_id: &str) -> Result<ScoreVector> {
    let file: ScoresFile = serde_json::from_slice(&fs::read(path)?)?;
    if file.id != doc_id {
        return Err(Error::MalformedInput(format!(
            "scores are for `{}`, document is `{doc_id}`",
            file.id
        )));
    }
    ScoreVector::new(file.scores)
}

fn read_df_index(path: Option<&Path>) -> Result<Option<DfIndex>> {
    path.map(|p| Ok(serde_json::from_slice(&fs::read(p)?)?)).transpose()
}

fn corpus(docs: &Path, slides: &Path) -> Result<Vec<CorpusPair>> {
    let corpus = load_corpus(docs, Some(slides))?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(corpus)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Label {
            docs,
            slides,
            window,
            max_per_window,
            out,
        } => {
            let cfg = WindowConfig { w: window, max_per_window };
            cfg.validate()?;
            let mut buf = Vec::new();
            for pair in corpus(&docs, &slides)? {
                let outcome = label_document(&pair.doc, &pair.slides, &cfg)?;
                if outcome.empty_reference {
                    log::warn!("slides for `{}` contain no tokens", pair.doc.id);
                }
                serde_json::to_writer(&mut buf, &LabelLine {
                    id: &pair.doc.id,
                    labels: &outcome.labels.0,
                })?;
                buf.push(b'\n');
            }
            write_output(out.as_deref(), &buf)
        }
        Command::Train {
            docs,
            slides,
            config,
            labels,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let source = match &labels {
                Some(path) => LabelSource::Cached(path),
                None => LabelSource::Oracle,
            };
            let report = train(&corpus(&docs, &slides)?, &cfg, source, &out)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Rank { model, doc, out } => {
            let model = Model::load(&model)?;
            let doc = read_document(&doc)?;
            let scores = model.predict(&doc)?;
            let mut bytes = serde_json::to_vec(&ScoresFile {
                id: doc.id.clone(),
                scores: scores.0,
            })?;
            bytes.push(b'\n');
            write_output(out.as_deref(), &bytes)
        }
        Command::Select {
            scores,
            doc,
            method,
            fraction,
            out,
        } => {
            let selector = SelectorRegistry::default().get(&method)?;
            let doc = read_document(&doc)?;
            let scores = deckgen::pipeline::pad_scores(&read_scores(&scores, &doc.id)?, doc.n());
            let selected = select_for_document(&doc, &scores, selector.as_ref(), fraction)?;
            let positions = selected.iter().enumerate().filter(|(_, &x)| x == 1).map(|(i, _)| i).collect();
            let mut bytes = serde_json::to_vec(&SelectionFile {
                id: &doc.id,
                method: &method,
                max_len: deckgen::selector::budget(&doc, fraction)?,
                selected,
                positions,
            })?;
            bytes.push(b'\n');
            write_output(out.as_deref(), &bytes)
        }
        Command::Slides {
            doc,
            scores,
            method,
            fraction,
            df_index,
            format,
            out,
        } => {
            let format: RenderFormat = format.parse()?;
            let selector = SelectorRegistry::default().get(&method)?;
            let doc = read_document(&doc)?;
            let scores = read_scores(&scores, &doc.id)?;
            let df = read_df_index(df_index.as_deref())?;
            let deck = deck_for_document(&doc, &scores, selector.as_ref(), fraction, df.as_ref(), &Tagger::default())?;
            write_output(out.as_deref(), &render(&deck, format)?)
        }
        Command::Eval {
            model,
            docs,
            slides,
            method,
            fraction,
        } => {
            let selector = SelectorRegistry::default().get(&method)?;
            let report = evaluate_checkpoint(&model, &corpus(&docs, &slides)?, selector.as_ref(), fraction)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Sweep { docs, slides, windows } => {
            let rows = sweep_window_sizes(&corpus(&docs, &slides)?, &windows)?;
            println!("{:>6} {:>8} {:>8} {:>8}", "window", "R-1", "R-2", "R-L");
            for row in rows {
                println!(
                    "{:>6} {:>8.2} {:>8.2} {:>8.2}",
                    row.w,
                    100.0 * row.r1,
                    100.0 * row.r2,
                    100.0 * row.rl
                );
            }
            Ok(())
        }
        Command::DfIndex { docs, out } => {
            let docs: Vec<_> = load_corpus(&docs, None)?.into_iter().map(|p| p.doc).collect();
            let index = build_df_index(&docs, &Tagger::default());
            fs::write(out, serde_json::to_vec_pretty(&index)?)?;
            Ok(())
        }
        Command::Pipeline {
            docs,
            slides,
            config,
            seed,
            epochs,
            df_index,
            out,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(epochs) = epochs {
                cfg.epochs = epochs;
            }
            let df = read_df_index(df_index.as_deref())?;
            let report = run_pipeline(&corpus(&docs, &slides)?, &cfg, &out, df.as_ref())?;
            println!(
                "{} decks written to {}; mean R-1 {:.4}, R-2 {:.4}, R-L {:.4}",
                report.decks.per_doc.len(),
                out.display(),
                report.decks.mean.r1,
                report.decks.mean.r2,
                report.decks.mean.rl
            );
            Ok(())
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("DECKGEN_THREADS") {
        let threads: usize = value
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidConfig(format!("DECKGEN_THREADS=`{value}` is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use framescope::corpus::{self, CollectionRules, Corpus};
use framescope::frames::{contingency, frame_topic_profile, FrameLexicon};
use framescope::report::{build_report, compare_corpora, ModelInput, Report, ReportConfig, TopicLabelSet};
use framescope::serve::{self, ServeConfig};
use framescope::stats::cochran_q;
use framescope::textprep::{read_word_list, tfidf_weight, PrepConfig};
use framescope::topicmodel::{self, FrameOverlay, LdaConfig, LdaModel};
use framescope::{Error, Result};

#[derive(Parser)]
#[command(name = "framescope", version, about = "Frame and topic analysis for tweet corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the collection rules and write the filtered corpus plus a per-day ledger.
    Filter(FilterArgs),
    /// Preprocess a corpus and train an LDA model.
    Train(TrainArgs),
    /// Frame coverage, term profiles, the contingency matrix and Cochran's Q.
    Frames(FramesArgs),
    /// Build the full report for one corpus.
    Report(ReportArgs),
    /// Compare frame usage across several reports.
    Compare(CompareArgs),
    /// Export the topic-explorer dataset.
    ExportVis(ExportVisArgs),
    /// Serve the explorer UI and its data endpoints.
    Serve(ServeArgs),
}

#[derive(Args)]
struct PrepArgs {
    /// Stopword list, one word per line (default: bundled list).
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Domain exclusion list (default: bundled list).
    #[arg(long)]
    exclusions: Option<PathBuf>,
}

impl PrepArgs {
    fn config(&self) -> Result<PrepConfig> {
        let mut prep = PrepConfig::default();
        if let Some(path) = &self.stopwords {
            prep.stopwords = read_word_list(path)?.into_iter().collect();
        }
        if let Some(path) = &self.exclusions {
            prep.exclusions = read_word_list(path)?.into_iter().collect();
        }
        Ok(prep)
    }
}

#[derive(Args)]
struct LexiconArgs {
    /// Built-in frame name or lexicon file; repeatable (default: all built-in frames).
    #[arg(long = "lexicon")]
    lexicons: Vec<String>,
}

impl LexiconArgs {
    fn load(&self) -> Result<Vec<FrameLexicon>> {
        if self.lexicons.is_empty() {
            return Ok(FrameLexicon::builtins());
        }
        self.lexicons.iter().map(|l| FrameLexicon::load(l)).collect()
    }
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Ledger CSV (default: `<output stem>.ledger.csv` beside the output).
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Comma-separated hashtags, without `#`.
    #[arg(long, value_delimiter = ',')]
    tags: Option<Vec<String>>,
    #[arg(long)]
    lang: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 16)]
    topics: usize,
    #[arg(long)]
    passes: Option<usize>,
    /// Document-topic prior (default: 1/topics).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, env = "FRAMESCOPE_SEED", default_value_t = 42)]
    seed: u64,
    /// Train on tf-idf weighted pseudo-counts.
    #[arg(long)]
    tfidf: bool,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Args)]
struct FramesArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    lexicons: LexiconArgs,
    #[arg(long, value_delimiter = ',', default_value = "30,50")]
    cutoffs: Vec<usize>,
    /// Add frame-topic profiles from this model.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    output: PathBuf,
    /// Trained model; repeatable.
    #[arg(long = "model")]
    models: Vec<PathBuf>,
    /// Topic labels for the model at the same position; repeatable.
    #[arg(long = "labels")]
    labels: Vec<PathBuf>,
    #[command(flatten)]
    lexicons: LexiconArgs,
    #[arg(long, value_delimiter = ',', default_value = "30,50")]
    cutoffs: Vec<usize>,
    /// Corpus name shown in the report (default: input file stem).
    #[arg(long)]
    label: Option<String>,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// A `report.json`; give at least two.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ExportVisArgs {
    #[arg(long)]
    model: PathBuf,
    /// Corpus the model was trained on; adds frame overlays.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    lexicons: LexiconArgs,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    vis: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Directory holding the built explorer UI.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value_t = 4)]
    workers: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Filter(a) => cmd_filter(a),
        Command::Train(a) => cmd_train(a),
        Command::Frames(a) => cmd_frames(a),
        Command::Report(a) => cmd_report(a),
        Command::Compare(a) => cmd_compare(a),
        Command::ExportVis(a) => cmd_export_vis(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("framescope: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load(path: &Path) -> Result<Corpus> {
    let outcome = corpus::load_corpus(path)?;
    if !outcome.malformed.is_empty() {
        log::warn!(
            "{}: skipped {} malformed records (lines {:?})",
            path.display(),
            outcome.malformed.len(),
            outcome.malformed
        );
    }
    Ok(outcome.corpus)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_filter(a: FilterArgs) -> Result<()> {
    let raw = load(&a.input)?;
    let mut rules = CollectionRules::standard();
    if let Some(tags) = a.tags {
        rules.hashtags = tags
            .iter()
            .map(|t| t.trim().trim_start_matches('#').to_lowercase())
            .filter(|t| !t.is_empty())
            .collect::<BTreeSet<_>>();
    }
    rules.lang = a.lang;
    let filtered = corpus::apply_collection_rules(&raw, &rules)?;
    corpus::write_corpus(&filtered, &a.output)?;

    let ledger_path = a.ledger.unwrap_or_else(|| {
        let stem = a.output.file_stem().unwrap_or_default().to_string_lossy();
        a.output.with_file_name(format!("{stem}.ledger.csv"))
    });
    write(&ledger_path, corpus::ledger(&raw, &filtered)?.to_csv())?;
    log::info!("kept {} of {} records", filtered.len(), raw.len());
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let prep = a.prep.config()?;
    let prepared = prep.prepare(corpus.iter().map(|t| t.text.as_str()))?;

    let mut cfg = LdaConfig::new(a.topics).with_seed(a.seed);
    if let Some(p) = a.passes {
        cfg.passes = p;
    }
    if let Some(alpha) = a.alpha {
        cfg.alpha = alpha;
    }
    if let Some(beta) = a.beta {
        cfg.beta = beta;
    }
    let model = if a.tfidf {
        let weighted = tfidf_weight(&prepared.bags, &prepared.vocab);
        topicmodel::train_weighted(&weighted, &prepared.vocab, &cfg)?
    } else {
        topicmodel::train(&prepared.bags, &prepared.vocab, &cfg)?
    };
    model.save(&a.output)?;

    let top_n = 10.min(model.vocab_size());
    let mut csv = String::from("topic,coherence,terms\n");
    if top_n >= 2 {
        let coherence = model.coherence(&prepared.bags, top_n)?;
        for (t, (score, terms)) in coherence.iter().zip(model.top_topic_terms(top_n)?).enumerate() {
            let words: Vec<&str> = terms.iter().map(|t| t.term.as_str()).collect();
            csv.push_str(&format!("{},{score:.6},{}\n", t + 1, words.join(" ")));
        }
    }
    let name = a.output.file_name().unwrap_or_default().to_string_lossy();
    let stem = name.strip_suffix(".json").unwrap_or(&name);
    write(&a.output.with_file_name(format!("{stem}.coherence.csv")), csv)
}

fn load_models(paths: &[PathBuf], labels: &[PathBuf]) -> Result<Vec<ModelInput>> {
    if labels.len() > paths.len() {
        return Err(Error::InvalidArgument(format!(
            "{} label files for {} models",
            labels.len(),
            paths.len()
        )));
    }
    paths
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let model = LdaModel::load(path)?;
            let labels = match labels.get(i) {
                Some(lp) if lp.exists() => TopicLabelSet::load(lp, model.num_topics())?,
                _ => TopicLabelSet::default(),
            };
            Ok(ModelInput { model, labels })
        })
        .collect()
}

fn cmd_frames(a: FramesArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let lexicons = a.lexicons.load()?;
    let models = load_models(a.model.as_slice(), &[])?;
    let cfg = ReportConfig {
        cutoffs: a.cutoffs,
        prep: a.prep.config()?,
        ..ReportConfig::default()
    };
    let report = build_report(&corpus, &models, &lexicons, &cfg)?;

    ensure_dir(&a.output)?;
    write(&a.output.join("coverage.csv"), report.coverage_csv())?;
    write(&a.output.join("coverage_table.csv"), report.coverage_table_csv())?;
    write(&a.output.join("profile.csv"), report.profile_csv())?;
    write(&a.output.join("zipf.csv"), report.zipf_csv())?;
    write(&a.output.join("contingency.csv"), contingency(&corpus, &lexicons)?.to_csv())?;
    if !models.is_empty() {
        write(&a.output.join("frame_topics.csv"), report.frame_topics_csv())?;
    }
    if lexicons.len() >= 2 {
        let q = cochran_q(&contingency(&corpus, &lexicons)?)?;
        let mut json = serde_json::to_string_pretty(&q)?;
        json.push('\n');
        write(&a.output.join("cochran.json"), json)?;
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let mut corpus = load(&a.input)?;
    if let Some(label) = a.label {
        corpus.label = label;
    }
    let models = load_models(&a.models, &a.labels)?;
    let lexicons = a.lexicons.load()?;
    let cfg = ReportConfig {
        cutoffs: a.cutoffs,
        prep: a.prep.config()?,
        ..ReportConfig::default()
    };
    let report = build_report(&corpus, &models, &lexicons, &cfg)?;
    ensure_dir(&a.output)?;
    report.write_to(&a.output)
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let reports = a
        .inputs
        .iter()
        .map(Report::load)
        .collect::<Result<Vec<_>>>()?;
    let comparison = compare_corpora(&reports)?;
    ensure_dir(&a.output)?;
    comparison.write_to(&a.output)
}

fn cmd_export_vis(a: ExportVisArgs) -> Result<()> {
    let model = LdaModel::load(&a.model)?;
    let mut vis = model.export_vis();
    if let Some(input) = &a.input {
        let corpus = load(input)?;
        let prep = a.prep.config()?;
        let prepared = prep.prepare(corpus.iter().map(|t| t.text.as_str()))?;
        if prepared.vocab.hash() != model.vocab_hash() {
            return Err(Error::VocabularyMismatch {
                model: model.vocab_hash().to_owned(),
                corpus: prepared.vocab.hash(),
            });
        }
        // Frames with no matching document get no overlay.
        for lex in a.lexicons.load()? {
            match frame_topic_profile(&model, &corpus, &lex, &prep) {
                Ok(p) => vis.frames.push(FrameOverlay {
                    frame: p.frame,
                    matched_docs: p.matched_docs,
                    profile: p.profile,
                }),
                Err(Error::EmptyInput(_)) => log::warn!("frame {} matches no document", lex.name),
                Err(e) => return Err(e),
            }
        }
    }
    let mut json = serde_json::to_vec(&vis)?;
    json.push(b'\n');
    write(&a.output, json)
}

fn cmd_serve(a: ServeArgs) -> Result<()> {
    let handle = serve::start(&ServeConfig {
        vis_path: a.vis,
        labels_path: a.labels,
        static_dir: a.static_dir,
        addr: format!("{}:{}", a.host, a.port),
        workers: a.workers,
    })?;
    eprintln!("framescope: serving on http://{}", handle.addr());
    handle.join();
    Ok(())
}

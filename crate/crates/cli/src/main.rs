use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use deckgen::embedding::{EmbeddingProvider, ProviderConfig, ProviderKind, DEFAULT_DIM};
use deckgen::error::{Error, ErrorClass};
use deckgen::features::CorpusStats;
use deckgen::metrics::{render_table, rouge_all, MetricsError, RougeScore};
use deckgen::pipeline::{self, LoadedPair, RunConfig};
use deckgen::salience::{MlpModel, TrainConfig};
use deckgen::selection::{train_size_model, SizeModel, DEFAULT_THETA};
use deckgen::text::tokenize;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "deckgen", version, about = "Generate extractive slide decks from research papers")]
struct Cli {
    #[command(flatten)]
    embed: EmbedArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Provider {
    Hashed,
    Cache,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    /// Sentence embedding provider.
    #[arg(long, global = true, value_enum, default_value_t = Provider::Hashed)]
    provider: Provider,

    /// Vector cache file for `--provider cache`.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Embedding dimension. Defaults to the model's dimension when a model
    /// is given, otherwise 256.
    #[arg(long, global = true)]
    dim: Option<usize>,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = pipeline::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Redundancy bound on the mean pairwise similarity.
    #[arg(long, default_value_t = DEFAULT_THETA, allow_negative_numbers = true)]
    theta: f64,

    /// Explicit size budget in characters.
    #[arg(long)]
    size: Option<usize>,

    /// Budget as a fraction of the paper's characters when neither `--size`
    /// nor `--size-model` is given.
    #[arg(long, default_value_t = pipeline::DEFAULT_SIZE_FRACTION)]
    size_fraction: f64,

    /// Trained salience model.
    #[arg(long)]
    model: PathBuf,

    /// Trained size regression model.
    #[arg(long)]
    size_model: Option<PathBuf>,

    /// Document-frequency table; computed from the input papers when omitted.
    #[arg(long)]
    stats: Option<PathBuf>,

    /// Keep abstract sentences out of the candidate set.
    #[arg(long)]
    exclude_abstract: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a deck for one paper.
    Generate {
        paper: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Deck output file; the deck goes to stdout and the report to stderr
        /// when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Salience labels of a paper against its reference slides.
    Label {
        paper: PathBuf,
        slides: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feature matrix of a paper as TSV.
    Features {
        paper: PathBuf,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the salience model on a directory of pairs.
    Train {
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Also write the document-frequency table computed from the
        /// training papers.
        #[arg(long)]
        write_stats: Option<PathBuf>,
        /// Hidden layer widths, three comma-separated positive integers.
        #[arg(long, value_parser = parse_hidden, default_value = "128,64,32")]
        hidden: [usize; 3],
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 0.004)]
        learning_rate: f64,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        /// Fraction of pairs, taken from the end in stem order, left out of
        /// training.
        #[arg(long, default_value_t = 0.0)]
        holdout: f64,
    },
    /// Fit the size regression on a directory of pairs.
    TrainSize {
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// ROUGE scores of a candidate text against a reference text.
    Rouge { candidate: PathBuf, reference: PathBuf },
    /// Generate decks for a directory of pairs and report mean ROUGE F1.
    Evaluate {
        pairs: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            ExitCode::from(exit_code(&e))
        }
    }
}

fn parse_hidden(value: &str) -> Result<[usize; 3], String> {
    let widths: Vec<usize> =
        value.split(',').map(|w| w.trim().parse::<usize>().map_err(|e| format!("{w:?}: {e}"))).collect::<Result<_, _>>()?;
    match widths[..] {
        [a, b, c] if a > 0 && b > 0 && c > 0 => Ok([a, b, c]),
        _ => Err(format!("expected three positive widths, got {value:?}")),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Input => EXIT_INPUT,
        ErrorClass::Invariant => EXIT_INVARIANT,
    }
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn report_error(e: &Error) {
    eprintln!("error kind={} exit={} message={}", e.kind(), exit_code(e), one_line(&e.to_string()));
}

fn provider_config(args: &EmbedArgs, model_dim: Option<usize>) -> ProviderConfig {
    ProviderConfig {
        kind: match args.provider {
            Provider::Hashed => ProviderKind::HashedFallback,
            Provider::Cache => ProviderKind::VectorCache,
        },
        dim: args.dim.or(model_dim).unwrap_or(DEFAULT_DIM),
        cache_path: args.cache.clone(),
    }
}

fn build_provider(args: &EmbedArgs, model_dim: Option<usize>) -> Result<Box<dyn EmbeddingProvider>, Error> {
    Ok(provider_config(args, model_dim).build()?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => pipeline::write_text(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn load_stats(path: Option<&Path>, fallback: impl FnOnce() -> CorpusStats) -> Result<CorpusStats, Error> {
    match path {
        Some(p) => Ok(CorpusStats::load(p)?),
        None => Ok(fallback()),
    }
}

struct Loaded {
    model: MlpModel,
    size_model: Option<SizeModel>,
    provider: Box<dyn EmbeddingProvider>,
    cfg: RunConfig,
}

fn load_run(embed: &EmbedArgs, run: &RunArgs) -> Result<Loaded, Error> {
    let model = MlpModel::load(&run.model)?;
    let size_model = run.size_model.as_deref().map(SizeModel::load).transpose()?;
    let provider_cfg = provider_config(embed, Some(model.schema().embedding_dim));
    let provider = provider_cfg.build()?;
    let cfg = RunConfig {
        theta: run.theta,
        size: run.size,
        size_fraction: run.size_fraction,
        seed: embed.seed,
        provider: provider_cfg,
        include_abstract: !run.exclude_abstract,
        ..RunConfig::default()
    };
    cfg.validate()?;
    Ok(Loaded { model, size_model, provider, cfg })
}

fn load_pairs_dir(dir: &Path) -> Result<Vec<LoadedPair>, Error> {
    let listing = pipeline::discover_pairs(dir)?;
    for path in &listing.unmatched {
        println!("unmatched={}", path.display());
    }
    let (loaded, failed) = pipeline::load_pairs(&listing.pairs);
    for e in &failed {
        println!("skipped={}", one_line(&e.to_string()));
    }
    Ok(loaded)
}

fn score_lines(scores: &[RougeScore]) -> String {
    scores
        .iter()
        .map(|s| format!("{m}_precision={}\n{m}_recall={}\n{m}_f1={}\n", s.precision, s.recall, s.f1, m = s.metric))
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let embed = &cli.embed;
    match cli.command {
        Command::Generate { paper, run, out } => {
            let loaded = load_run(embed, &run)?;
            let doc = pipeline::load_paper(&paper)?;
            let stats = load_stats(run.stats.as_deref(), || CorpusStats::from_papers([&doc]))?;
            let generated = pipeline::generate(
                &doc,
                &loaded.model,
                loaded.size_model.as_ref(),
                &stats,
                loaded.provider.as_ref(),
                &loaded.cfg,
            )
            .map_err(|e| e.in_file(&paper))?;
            match out {
                Some(path) => {
                    pipeline::write_text(&path, &generated.deck)?;
                    print!("{}", generated.report.to_text());
                }
                None => {
                    eprint!("{}", generated.report.to_text());
                    emit(None, &generated.deck)?;
                }
            }
        }
        Command::Label { paper, slides, out } => {
            let provider = build_provider(embed, None)?;
            let doc = pipeline::load_paper(&paper)?;
            let reference = pipeline::load_slides(&slides)?;
            let labels = pipeline::label_pair(&doc, &reference, provider.as_ref())?;
            emit(out.as_deref(), &pipeline::labels_tsv(&labels))?;
        }
        Command::Features { paper, stats, out } => {
            let provider = build_provider(embed, None)?;
            let doc = pipeline::load_paper(&paper)?;
            let stats = load_stats(stats.as_deref(), || CorpusStats::from_papers([&doc]))?;
            let (matrix, _) = pipeline::paper_features(&doc, provider.as_ref(), &stats)?;
            emit(out.as_deref(), &matrix.to_tsv())?;
        }
        Command::Train { pairs, out, stats, write_stats, hidden, epochs, learning_rate, batch_size, holdout } => {
            if !(0.0..1.0).contains(&holdout) {
                return Err(Error::Config(format!("holdout must be in [0, 1), got {holdout}")));
            }
            let provider = build_provider(embed, None)?;
            let all = load_pairs_dir(&pairs)?;
            let (train_pairs, held) = pipeline::split_holdout(all, holdout);
            if train_pairs.is_empty() {
                return Err(Error::Config(format!("no usable pairs in {}", pairs.display())));
            }
            let stats = load_stats(stats.as_deref(), || pipeline::corpus_stats(&train_pairs))?;
            if let Some(path) = &write_stats {
                pipeline::write_text(path, &stats.to_tsv())?;
            }
            let cfg = TrainConfig { learning_rate, batch_size, epochs, seed: embed.seed, hidden_sizes: hidden };
            let (model, report) = pipeline::train_salience(&train_pairs, provider.as_ref(), &stats, &cfg)?;
            pipeline::write_text(&out, &model.to_json())?;
            println!("pairs={}", train_pairs.len());
            println!("holdout={}", held.len());
            for p in &held {
                println!("holdout_stem={}", p.stem);
            }
            println!("epochs={}", report.epoch_losses.len());
            if let (Some(first), Some(last)) = (report.epoch_losses.first(), report.epoch_losses.last()) {
                println!("first_epoch_mse={first}");
                println!("last_epoch_mse={last}");
            }
        }
        Command::TrainSize { pairs, out } => {
            let loaded = load_pairs_dir(&pairs)?;
            let model = train_size_model(&pipeline::size_training_pairs(&loaded))?;
            pipeline::write_text(&out, &model.to_json())?;
            println!("pairs={}", loaded.len());
        }
        Command::Rouge { candidate, reference } => {
            let cand = tokenize(&pipeline::read_text(&candidate)?);
            let reference = tokenize(&pipeline::read_text(&reference)?);
            let s = rouge_all(&cand, &reference);
            print!("{}", score_lines(&[s.rouge1, s.rouge2, s.su4]));
        }
        Command::Evaluate { pairs, run } => {
            let loaded = load_run(embed, &run)?;
            let corpus = load_pairs_dir(&pairs)?;
            if corpus.is_empty() {
                return Err(Error::Config(format!("no usable pairs in {}", pairs.display())));
            }
            let stats = load_stats(run.stats.as_deref(), || pipeline::corpus_stats(&corpus))?;
            let evaluation = pipeline::evaluate_pairs(
                &corpus,
                &loaded.model,
                loaded.size_model.as_ref(),
                &stats,
                loaded.provider.as_ref(),
                &loaded.cfg,
            );
            for e in &evaluation.failed {
                println!("skipped={}", one_line(&e.to_string()));
            }
            for p in &evaluation.per_pair {
                println!(
                    "pair={} rouge1_f1={} rouge2_f1={} rouge_su4_f1={}",
                    p.stem, p.scores.rouge1.f1, p.scores.rouge2.f1, p.scores.su4.f1
                );
            }
            let Some(means) = evaluation.means else {
                let first = evaluation.failed.into_iter().next();
                return Err(first.unwrap_or(Error::Metrics(MetricsError::EmptyCorpus)));
            };
            println!("pairs={}", means.pairs);
            print!("{}", render_table(&[("deckgen", means)]));
        }
    }
    Ok(ExitCode::SUCCESS)
}

//! Command-line pipeline: each subcommand reads its upstream artifacts from
//! the output directory, checks them against `manifest.json`, and writes
//! its own.

pub mod commands;
pub mod error;
pub mod evaluate;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seedtopic::config::SamplerMode;

pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "seedtopic", version, about = "Seed-guided aspect and sentiment topic model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed and parameter configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory holding artifacts and manifest.json.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Overrides rng_seed from the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the sampler mode from the configuration.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<SamplerMode>,
    /// Rebuild even if the artifact is up to date.
    #[arg(long)]
    pub force: bool,
}

fn parse_mode(s: &str) -> std::result::Result<SamplerMode, String> {
    s.parse().map_err(|e: seedtopic::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// One review per line, split into sentences.
    Plain,
    /// `text<TAB>aspect<TAB>polarity`, one sentence per row.
    Tsv,
    /// SemEval-style sentence XML.
    Semeval,
    /// `text<TAB>rating`, balanced by oversampling the smaller class.
    Rated,
}

impl InputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            InputFormat::Plain => "plain",
            InputFormat::Tsv => "tsv",
            InputFormat::Semeval => "semeval",
            InputFormat::Rated => "rated",
        }
    }

    /// `.xml` is SemEval, `.tsv` labelled rows, anything else plain text.
    pub fn from_extension(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("xml") => InputFormat::Semeval,
            Some("tsv") => InputFormat::Tsv,
            _ => InputFormat::Plain,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a corpus into the sentence cache.
    Prepare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        corpus: PathBuf,
        /// Input format; guessed from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
    },
    /// Train word embeddings on the prepared corpus.
    Embed {
        #[command(flatten)]
        common: Common,
    },
    /// Brown-cluster the vocabulary.
    Cluster {
        #[command(flatten)]
        common: Common,
    },
    /// Train the aspect-term / opinion-word separator from seed occurrences.
    Separate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the Gibbs sampler and write the model dump and top words.
    Train {
        #[command(flatten)]
        common: Common,
        /// Words per aspect and word class in the top-words report.
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Classify new sentences (one per line, or the first column of a TSV).
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        corpus: PathBuf,
        /// Defaults to classifications.tsv in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the top-words report of the trained model.
    TopWords {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Score the model and the baselines on a labelled TSV.
    Eval {
        #[command(flatten)]
        common: Common,
        /// `text<TAB>aspect<TAB>polarity` gold file.
        #[arg(long)]
        corpus: PathBuf,
        /// Sentences per class in each balanced subset; no subsets if omitted.
        #[arg(long)]
        per_class: Option<usize>,
        #[arg(long, default_value_t = 5)]
        subsets: usize,
        /// Opinion lexicon (one word per line) for separation scoring.
        #[arg(long, requires = "aspect_terms")]
        lexicon: Option<PathBuf>,
        /// Gold aspect terms (one per line) for separation scoring.
        #[arg(long, requires = "lexicon")]
        aspect_terms: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    use commands as c;
    match cli.command {
        Command::Prepare { common, corpus, format } => c::prepare(&common, &corpus, format),
        Command::Embed { common } => c::embed(&common),
        Command::Cluster { common } => c::cluster(&common),
        Command::Separate { common } => c::separate(&common),
        Command::Train { common, k } => c::train(&common, k),
        Command::Classify { common, corpus, output } => c::classify(&common, &corpus, output.as_deref()),
        Command::TopWords { common, k } => c::top_words(&common, k),
        Command::Eval {
            common,
            corpus,
            per_class,
            subsets,
            lexicon,
            aspect_terms,
        } => c::eval(
            &common,
            &corpus,
            per_class,
            subsets,
            lexicon.as_deref().zip(aspect_terms.as_deref()),
        ),
    }
}

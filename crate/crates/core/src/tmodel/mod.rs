//! Seed-guided topic model: similarity-biased Dirichlet priors, the
//! collapsed Gibbs sampler over topic (z), word class (y) and polarity (v)
//! assignments, and posterior estimates for training and unseen sentences.

mod dump;
mod posterior;
mod priors;
mod sampler;

pub use dump::ModelDump;
pub use posterior::{
    argmax_flagged, classify, fold_in, foldin_seed, run_gibbs, top_words, Classification, FoldIn,
    PosteriorSummary, SentenceEstimate,
};
pub use priors::{compute_priors, document_priors, PriorSet};
pub use sampler::{init_state, Conditionals, SamplerState};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The three topic-word distributions kept per topic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WordKind {
    Aspect,
    Positive,
    Negative,
}

impl WordKind {
    pub const ALL: [WordKind; 3] = [WordKind::Aspect, WordKind::Positive, WordKind::Negative];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WordKind::Aspect => "A",
            WordKind::Positive => "P",
            WordKind::Negative => "N",
        }
    }
}

impl fmt::Display for WordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WordKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(WordKind::Aspect),
            "P" | "p" => Ok(WordKind::Positive),
            "N" | "n" => Ok(WordKind::Negative),
            other => Err(Error::invalid(format!("unknown word class '{other}' (expected A, P or N)"))),
        }
    }
}

//! Glue from a prepared corpus, embeddings and clusters to a trained topic
//! model, and sentence-level classification against it.

use crate::brown::ClusterAssignment;
use crate::config::{validate_against_vocabulary, RunParameters, SeedConfiguration, SeedReport};
use crate::corpus::{Corpus, Vocabulary};
use crate::embeddings::{build_similarity_cache, EmbeddingTable, SimilarityCache};
use crate::error::Result;
use crate::separation::{
    bootstrap_instances, predict_corpus, predict_sentence, train_maxent, MaxEntFit, MaxEntOptions, SeparationModel,
    WordClass,
};
use crate::tmodel::{
    classify, compute_priors, document_priors, fold_in, init_state, run_gibbs, Classification, FoldIn,
    PosteriorSummary, PriorSet, SamplerState,
};

pub fn maxent_options(params: &RunParameters) -> MaxEntOptions {
    MaxEntOptions {
        l2: params.l2_regularization,
        max_iterations: params.maxent_max_iterations,
        tolerance: params.maxent_tolerance,
    }
}

/// Separation model fitted on the seed occurrences, plus the number of
/// aspect-term and opinion-word instances it saw.
pub fn train_separation(
    corpus: &Corpus,
    seeds: &SeedConfiguration,
    clusters: &ClusterAssignment,
    params: &RunParameters,
) -> Result<(MaxEntFit, [usize; 2])> {
    let instances = bootstrap_instances(corpus, seeds, clusters)?;
    let mut counts = [0; 2];
    for i in &instances {
        counts[i.label.index()] += 1;
    }
    Ok((train_maxent(&instances, &maxent_options(params))?, counts))
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub seed_report: SeedReport,
    pub cache: SimilarityCache,
    pub priors: PriorSet,
    pub state: SamplerState,
    pub summary: PosteriorSummary,
}

/// Priors from the embeddings, π from the separation model, then the Gibbs
/// chain. `on_sweep` runs after every sweep.
pub fn train_topic_model(
    corpus: &Corpus,
    seeds: &SeedConfiguration,
    params: &RunParameters,
    table: &EmbeddingTable,
    clusters: &ClusterAssignment,
    separation: &SeparationModel,
    on_sweep: impl FnMut(usize, &SamplerState),
) -> Result<TrainedModel> {
    let seed_report = validate_against_vocabulary(seeds, &corpus.vocab)?;
    let cache = build_similarity_cache(table, &corpus.vocab, seeds, params.similarity_floor)?;
    let priors = compute_priors(corpus, &cache, params)?;
    let pi = predict_corpus(corpus, clusters, separation);
    let docs = corpus.sentences.iter().map(|s| s.tokens.clone()).collect();
    let mut state = init_state(docs, pi, &priors, params.rng_seed)?;
    let summary = run_gibbs(&mut state, &priors, params, on_sweep);
    Ok(TrainedModel {
        seed_report,
        cache,
        priors,
        state,
        summary,
    })
}

/// Everything needed to fold in unseen sentences.
pub struct Classifier<'a> {
    pub vocab: &'a Vocabulary,
    pub clusters: &'a ClusterAssignment,
    pub separation: &'a SeparationModel,
    pub cache: &'a SimilarityCache,
    pub summary: &'a PosteriorSummary,
    pub params: &'a RunParameters,
}

impl Classifier<'_> {
    /// Fold-in over in-vocabulary token ids (unknown words already removed).
    pub fn estimate_tokens(&self, tokens: &[usize]) -> FoldIn {
        if tokens.is_empty() {
            return FoldIn::Unclassifiable;
        }
        let pi = predict_sentence(tokens, self.clusters, self.separation);
        let (alpha, delta) = document_priors(tokens, self.cache, self.params);
        fold_in(self.summary, tokens, &pi, &alpha, delta, self.params)
    }

    pub fn estimate_text(&self, text: &str) -> FoldIn {
        let tokens: Vec<usize> = crate::text::tokenize(text)
            .iter()
            .filter_map(|t| self.vocab.id(t))
            .collect();
        self.estimate_tokens(&tokens)
    }

    /// `None` for unclassifiable sentences.
    pub fn classify_text(&self, text: &str) -> Option<Classification> {
        match self.estimate_text(text) {
            FoldIn::Estimate(e) => Some(classify(&e)),
            FoldIn::Unclassifiable => None,
        }
    }
}

/// Final-state word class of every token, by sentence.
pub fn word_classes(state: &SamplerState) -> Vec<Vec<WordClass>> {
    (0..state.num_docs()).map(|d| state.y(d).to_vec()).collect()
}

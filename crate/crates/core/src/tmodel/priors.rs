use crate::config::RunParameters;
use crate::corpus::{Corpus, Polarity};
use crate::embeddings::SimilarityCache;
use crate::error::{Error, Result};

use super::WordKind;

/// Per-document topic and polarity priors and per-word topic-word priors.
/// The positive and negative word priors are shared by all topics.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSet {
    num_topics: usize,
    vocab_size: usize,
    alpha_base: f64,
    delta_base: f64,
    alpha: Vec<Vec<f64>>,
    delta: Vec<[f64; 2]>,
    // T×V, row-major
    beta_a: Vec<f64>,
    beta_p: Vec<f64>,
    beta_n: Vec<f64>,
    beta_a_sum: Vec<f64>,
    beta_p_sum: f64,
    beta_n_sum: f64,
}

impl PriorSet {
    pub fn from_parts(
        alpha: Vec<Vec<f64>>,
        delta: Vec<[f64; 2]>,
        beta_a: Vec<Vec<f64>>,
        beta_p: Vec<f64>,
        beta_n: Vec<f64>,
        alpha_base: f64,
        delta_base: f64,
    ) -> Result<Self> {
        let num_topics = beta_a.len();
        let vocab_size = beta_p.len();
        if num_topics == 0 {
            return Err(Error::invalid("priors need at least one topic"));
        }
        if alpha.len() != delta.len() {
            return Err(Error::invalid("alpha and delta cover different document counts"));
        }
        if alpha.iter().any(|r| r.len() != num_topics)
            || beta_a.iter().any(|r| r.len() != vocab_size)
            || beta_n.len() != vocab_size
        {
            return Err(Error::invalid("prior dimensions disagree"));
        }
        let all = alpha
            .iter()
            .flatten()
            .chain(delta.iter().flatten())
            .chain(beta_a.iter().flatten())
            .chain(&beta_p)
            .chain(&beta_n)
            .chain([&alpha_base, &delta_base]);
        for &x in all {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::invalid(format!("prior entries must be positive, got {x}")));
            }
        }
        let beta_a_sum = beta_a.iter().map(|r| r.iter().sum()).collect();
        Ok(PriorSet {
            num_topics,
            vocab_size,
            alpha_base,
            delta_base,
            alpha,
            delta,
            beta_a: beta_a.into_iter().flatten().collect(),
            beta_p_sum: beta_p.iter().sum(),
            beta_n_sum: beta_n.iter().sum(),
            beta_p,
            beta_n,
            beta_a_sum,
        })
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn num_docs(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha_base(&self) -> f64 {
        self.alpha_base
    }

    pub fn delta_base(&self) -> f64 {
        self.delta_base
    }

    pub fn alpha(&self, d: usize) -> &[f64] {
        &self.alpha[d]
    }

    pub fn delta(&self, d: usize) -> [f64; 2] {
        self.delta[d]
    }

    pub fn beta(&self, kind: WordKind, t: usize, w: usize) -> f64 {
        match kind {
            WordKind::Aspect => self.beta_a[t * self.vocab_size + w],
            WordKind::Positive => self.beta_p[w],
            WordKind::Negative => self.beta_n[w],
        }
    }

    /// Σ_w β for one topic and word kind.
    pub fn beta_sum(&self, kind: WordKind, t: usize) -> f64 {
        match kind {
            WordKind::Aspect => self.beta_a_sum[t],
            WordKind::Positive => self.beta_p_sum,
            WordKind::Negative => self.beta_n_sum,
        }
    }

    /// Row `t` of the aspect-word prior.
    pub fn beta_aspect_row(&self, t: usize) -> &[f64] {
        &self.beta_a[t * self.vocab_size..(t + 1) * self.vocab_size]
    }

    pub fn beta_polarity(&self, q: Polarity) -> &[f64] {
        match q {
            Polarity::Positive => &self.beta_p,
            Polarity::Negative => &self.beta_n,
        }
    }
}

/// Topic and polarity priors of a single sentence: each topic gets
/// `alpha_base` in proportion to the summed similarity of the sentence's
/// words to its seeds, and likewise for the two polarities.
pub fn document_priors(tokens: &[usize], cache: &SimilarityCache, params: &RunParameters) -> (Vec<f64>, [f64; 2]) {
    let t = cache.num_topics();
    let mut topic = vec![0.0; t];
    let mut pol = [0.0; 2];
    for &w in tokens {
        for (k, s) in topic.iter_mut().enumerate() {
            *s += cache.aspect(w, k);
        }
        for q in Polarity::ALL {
            pol[q.index()] += cache.polarity(w, q);
        }
    }
    if tokens.is_empty() {
        topic.iter_mut().for_each(|s| *s = 1.0);
        pol = [1.0; 2];
    }
    let ts: f64 = topic.iter().sum();
    let ps: f64 = pol.iter().sum();
    (
        topic.iter().map(|s| s / ts * params.alpha_base).collect(),
        [pol[0] / ps * params.delta_base, pol[1] / ps * params.delta_base],
    )
}

pub fn compute_priors(corpus: &Corpus, cache: &SimilarityCache, params: &RunParameters) -> Result<PriorSet> {
    if cache.num_terms() != corpus.vocab.len() {
        return Err(Error::invalid(format!(
            "similarity cache covers {} terms, vocabulary has {}",
            cache.num_terms(),
            corpus.vocab.len()
        )));
    }
    let (alpha, delta): (Vec<_>, Vec<_>) = corpus
        .sentences
        .iter()
        .map(|s| document_priors(&s.tokens, cache, params))
        .unzip();
    let v = corpus.vocab.len();
    let beta_a = (0..cache.num_topics())
        .map(|t| (0..v).map(|w| cache.aspect(w, t) * params.beta_base).collect())
        .collect();
    let beta_q = |q| (0..v).map(|w| cache.polarity(w, q) * params.beta_base).collect();
    PriorSet::from_parts(
        alpha,
        delta,
        beta_a,
        beta_q(Polarity::Positive),
        beta_q(Polarity::Negative),
        params.alpha_base,
        params.delta_base,
    )
}

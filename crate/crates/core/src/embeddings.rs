//! Skip-gram word embeddings and the seed-set similarity that biases every
//! Dirichlet prior of the topic model.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{RunParameters, SeedConfiguration};
use crate::corpus::{Corpus, Polarity, Vocabulary};
use crate::error::{Error, Result};

/// Dense word vectors, with unit-normalized copies for cosine similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f64>,
    unit: Vec<f64>,
    norms: Vec<f64>,
}

impl EmbeddingTable {
    /// `vectors` is row-major, one row of length `dim` per term.
    pub fn new(terms: Vec<String>, dim: usize, vectors: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Embedding("embedding dimension must be positive".into()));
        }
        if vectors.len() != terms.len() * dim {
            return Err(Error::Embedding(format!(
                "expected {} components for {} terms of dimension {dim}, got {}",
                terms.len() * dim,
                terms.len(),
                vectors.len()
            )));
        }
        if let Some(i) = vectors.iter().position(|x| !x.is_finite()) {
            return Err(Error::Embedding(format!(
                "non-finite component in vector of '{}'",
                terms[i / dim]
            )));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Embedding(format!("duplicate term '{t}'")));
            }
        }
        let mut unit = vectors.clone();
        let mut norms = Vec::with_capacity(terms.len());
        for row in unit.chunks_mut(dim) {
            let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.0 {
                row.iter_mut().for_each(|x| *x /= n);
            }
            norms.push(n);
        }
        Ok(EmbeddingTable {
            terms,
            index,
            dim,
            vectors,
            unit,
            norms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }

    pub fn vector(&self, term: &str) -> Option<&[f64]> {
        let i = *self.index.get(term)?;
        Some(&self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Unit-length vector; `None` for unknown or zero-norm terms.
    fn unit(&self, term: &str) -> Option<&[f64]> {
        let i = *self.index.get(term)?;
        (self.norms[i] > 0.0).then(|| &self.unit[i * self.dim..(i + 1) * self.dim])
    }

    /// Cosine similarity between two terms of the table.
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        let u = self
            .vector(a)
            .ok_or_else(|| Error::Embedding(format!("'{a}' not in embedding table")))?;
        let v = self
            .vector(b)
            .ok_or_else(|| Error::Embedding(format!("'{b}' not in embedding table")))?;
        cosine(u, v)
    }

    /// Text format: `V d` header, then `term v1 .. vd` per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.terms.len(), self.dim)?;
        for (i, t) in self.terms.iter().enumerate() {
            write!(w, "{t}")?;
            for x in &self.vectors[i * self.dim..(i + 1) * self.dim] {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R, path: &str) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(path, 1, "empty embedding file"))??;
        let mut h = header.split_whitespace().map(str::parse::<usize>);
        let (Some(Ok(v)), Some(Ok(d)), None) = (h.next(), h.next(), h.next()) else {
            return Err(Error::format(path, 1, "expected header 'V d'"));
        };
        let mut terms = Vec::with_capacity(v);
        let mut vectors = Vec::with_capacity(v * d);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let term = parts.next().unwrap_or_default();
            let row = parts
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::format(path, i + 2, e.to_string()))?;
            if row.len() != d {
                return Err(Error::format(
                    path,
                    i + 2,
                    format!("expected {d} components, got {}", row.len()),
                ));
            }
            terms.push(crate::text::normalize(term));
            vectors.extend(row);
        }
        if terms.len() != v {
            return Err(Error::format(
                path,
                1,
                format!("header announces {v} vectors, file has {}", terms.len()),
            ));
        }
        Self::new(terms, d, vectors)
    }
}

/// Standard cosine similarity, in [-1, 1].
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Embedding(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Embedding("cosine of a zero-norm vector".into()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Skip-gram training output with the mean loss of every epoch.
#[derive(Debug, Clone)]
pub struct TrainedEmbeddings {
    pub table: EmbeddingTable,
    pub epoch_losses: Vec<f64>,
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Trains skip-gram with negative sampling over the corpus sentences.
///
/// Single worker, so the result depends only on the corpus and `params`
/// (including `rng_seed`). Negatives are drawn from the unigram
/// distribution raised to 3/4, the effective window is resampled per
/// position, and the learning rate decays linearly to 1e-4 of its start.
pub fn train_skipgram(corpus: &Corpus, params: &RunParameters) -> Result<TrainedEmbeddings> {
    let dim = params.embedding_dims;
    let window = params.embedding_window;
    if dim == 0 {
        return Err(Error::Embedding("embedding dimension must be positive".into()));
    }
    if window == 0 || params.embedding_epochs == 0 || params.negative_samples == 0 {
        return Err(Error::Embedding(
            "window, epochs and negative samples must be positive".into(),
        ));
    }
    let total = corpus.num_tokens();
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    if total < window {
        return Err(Error::Embedding(format!(
            "corpus has {total} tokens, fewer than the window size {window}"
        )));
    }
    let v = corpus.vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);

    let counts = corpus.term_counts();
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let noise = WeightedIndex::new(&weights)
        .map_err(|e| Error::Embedding(format!("negative-sampling table: {e}")))?;

    let mut input: Vec<f64> = (0..v * dim)
        .map(|_| (rng.gen::<f64>() - 0.5) / dim as f64)
        .collect();
    let mut output = vec![0.0; v * dim];
    let mut grad = vec![0.0; dim];

    let schedule = (params.embedding_epochs * total) as f64 + 1.0;
    let mut processed = 0usize;
    let mut epoch_losses = Vec::with_capacity(params.embedding_epochs);

    for _ in 0..params.embedding_epochs {
        let mut loss = 0.0;
        let mut pairs = 0usize;
        for sentence in &corpus.sentences {
            let toks = &sentence.tokens;
            for (pos, &center) in toks.iter().enumerate() {
                let lr = params.learning_rate * (1.0 - processed as f64 / schedule).max(1e-4);
                processed += 1;
                let reach = window - rng.gen_range(0..window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(toks.len() - 1);
                for (cpos, &context) in toks.iter().enumerate().take(hi + 1).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let center_row = center * dim..(center + 1) * dim;
                    for k in 0..=params.negative_samples {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let n = noise.sample(&mut rng);
                            if n == context {
                                continue;
                            }
                            (n, 0.0)
                        };
                        let out_row = target * dim..(target + 1) * dim;
                        let f: f64 = input[center_row.clone()]
                            .iter()
                            .zip(&output[out_row.clone()])
                            .map(|(a, b)| a * b)
                            .sum();
                        loss -= if label > 0.0 { log_sigmoid(f) } else { log_sigmoid(-f) };
                        let g = (label - sigmoid(f)) * lr;
                        for (j, gj) in grad.iter_mut().enumerate() {
                            *gj += g * output[target * dim + j];
                            output[target * dim + j] += g * input[center * dim + j];
                        }
                    }
                    for (x, g) in input[center_row].iter_mut().zip(&grad) {
                        *x += g;
                    }
                    pairs += 1;
                }
            }
        }
        epoch_losses.push(if pairs > 0 { loss / pairs as f64 } else { 0.0 });
    }

    let table = EmbeddingTable::new(corpus.vocab.terms().to_vec(), dim, input)?;
    Ok(TrainedEmbeddings {
        table,
        epoch_losses,
    })
}

/// Similarity of `word` to a seed set: the largest cosine against any seed
/// present in the table, clamped to `[floor, 1]`. Words missing from the
/// table get `floor`; a word that is itself a seed gets exactly 1.
pub fn seed_similarity(table: &EmbeddingTable, word: &str, seeds: &[String], floor: f64) -> Result<f64> {
    let seed_vecs: Vec<&[f64]> = seeds.iter().filter_map(|s| table.unit(s)).collect();
    if seed_vecs.is_empty() {
        return Err(Error::Embedding(format!(
            "none of the seeds {seeds:?} has an embedding"
        )));
    }
    if seeds.iter().any(|s| s == word) && table.unit(word).is_some() {
        return Ok(1.0);
    }
    let Some(w) = table.unit(word) else {
        return Ok(floor);
    };
    let best = seed_vecs
        .iter()
        .map(|s| s.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best.clamp(floor, 1.0))
}

/// `sim(w, ·)` for every vocabulary term against every aspect seed set and
/// the positive and negative sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityCache {
    num_topics: usize,
    // row-major: V rows of (T aspects, positive, negative)
    data: Vec<f64>,
}

impl SimilarityCache {
    pub fn from_rows(num_topics: usize, rows: Vec<Vec<f64>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == num_topics + 2));
        SimilarityCache {
            num_topics,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn num_terms(&self) -> usize {
        self.data.len() / self.width()
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    /// Columns per term: T aspects plus P and N.
    pub fn width(&self) -> usize {
        self.num_topics + 2
    }

    pub fn row(&self, word: usize) -> &[f64] {
        &self.data[word * self.width()..(word + 1) * self.width()]
    }

    pub fn aspect(&self, word: usize, topic: usize) -> f64 {
        self.data[word * self.width() + topic]
    }

    pub fn polarity(&self, word: usize, q: Polarity) -> f64 {
        self.data[word * self.width() + self.num_topics + q.index()]
    }
}

pub fn build_similarity_cache(
    table: &EmbeddingTable,
    vocab: &Vocabulary,
    seeds: &SeedConfiguration,
    floor: f64,
) -> Result<SimilarityCache> {
    let sets: Vec<&Vec<String>> = seeds
        .aspects
        .iter()
        .map(|a| &a.seeds)
        .chain([&seeds.positive_seeds, &seeds.negative_seeds])
        .collect();
    let rows = vocab
        .terms()
        .iter()
        .map(|w| {
            sets.iter()
                .map(|s| seed_similarity(table, w, s, floor))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimilarityCache::from_rows(seeds.num_topics(), rows))
}

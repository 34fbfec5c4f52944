//! Classification metrics, balanced evaluation subsets, supervised
//! baselines (tf-idf Naive Bayes, majority class) and aspect-term /
//! opinion-word separation scoring.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::separation::WordClass;

/// Counts indexed by (gold, predicted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let k = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; k]; k],
        }
    }

    fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::invalid(format!("unknown label '{label}'")))
    }

    pub fn add(&mut self, gold: &str, predicted: &str) -> Result<()> {
        let (g, p) = (self.index(gold)?, self.index(predicted)?);
        self.counts[g][p] += 1;
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        (0..self.labels.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub confusion: ConfusionMatrix,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Accuracy, per-class and macro-averaged precision/recall/F1.
pub fn score<S: AsRef<str>>(predictions: &[S], golds: &[S], labels: &[String]) -> Result<EvalReport> {
    if predictions.len() != golds.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            golds.len()
        )));
    }
    let mut cm = ConfusionMatrix::new(labels.to_vec());
    for (p, g) in predictions.iter().zip(golds) {
        cm.add(g.as_ref(), p.as_ref())?;
    }
    Ok(report_from(cm))
}

pub fn report_from(cm: ConfusionMatrix) -> EvalReport {
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let per_class: Vec<ClassMetrics> = cm
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let precision = ratio(cm.counts[i][i], cols[i]);
            let recall = ratio(cm.counts[i][i], rows[i]);
            ClassMetrics {
                label: l.clone(),
                precision,
                recall,
                f1: f1(precision, recall),
                support: rows[i],
            }
        })
        .collect();
    let k = per_class.len().max(1) as f64;
    EvalReport {
        accuracy: ratio(cm.trace(), cm.total()),
        macro_precision: per_class.iter().map(|c| c.precision).sum::<f64>() / k,
        macro_recall: per_class.iter().map(|c| c.recall).sum::<f64>() / k,
        macro_f1: per_class.iter().map(|c| c.f1).sum::<f64>() / k,
        per_class,
        confusion: cm,
    }
}

/// `num_subsets` index sets with exactly `per_class` items of every class,
/// drawn without replacement within each subset.
pub fn balanced_subsets<S: AsRef<str>>(
    labels: &[S],
    classes: &[String],
    per_class: usize,
    num_subsets: usize,
    rng_seed: u64,
) -> Result<Vec<Vec<usize>>> {
    let members: Vec<Vec<usize>> = classes
        .iter()
        .map(|c| {
            labels
                .iter()
                .enumerate()
                .filter(|(_, l)| l.as_ref() == c)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    for (c, m) in classes.iter().zip(&members) {
        if m.len() < per_class {
            return Err(Error::invalid(format!(
                "class '{c}' has {} items, fewer than {per_class}",
                m.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Ok((0..num_subsets)
        .map(|_| {
            members
                .iter()
                .flat_map(|m| {
                    index::sample(&mut rng, m.len(), per_class)
                        .into_iter()
                        .map(|j| m[j])
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect())
}

/// `k` disjoint test folds covering `0..n` after a seeded shuffle.
pub fn kfold(n: usize, k: usize, rng_seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!("cannot make {k} folds from {n} items")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
    let mut folds = vec![Vec::new(); k];
    for (j, i) in idx.into_iter().enumerate() {
        folds[j % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

pub const NB_VOCABULARY_CAP: usize = 80_000;

/// Multinomial Naive Bayes over L2-normalized tf-idf vectors
/// (raw tf × ln(N/df)), additive smoothing 1.
#[derive(Debug, Clone)]
pub struct NaiveBayes {
    classes: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<f64>,
    log_prior: Vec<f64>,
    log_cond: Vec<Vec<f64>>,
}

impl NaiveBayes {
    pub fn train<S: AsRef<str>>(docs: &[Vec<S>], labels: &[S]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::invalid("empty training set"));
        }
        if docs.len() != labels.len() {
            return Err(Error::invalid("documents and labels differ in length"));
        }
        let classes: Vec<String> = labels
            .iter()
            .map(|l| l.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();

        let mut tf: HashMap<&str, usize> = HashMap::new();
        let mut df: HashMap<&str, usize> = HashMap::new();
        for d in docs {
            let mut seen = HashSet::new();
            for w in d {
                *tf.entry(w.as_ref()).or_default() += 1;
                if seen.insert(w.as_ref()) {
                    *df.entry(w.as_ref()).or_default() += 1;
                }
            }
        }
        let mut terms: Vec<(&str, usize)> = tf.into_iter().collect();
        terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        terms.truncate(NB_VOCABULARY_CAP);
        let n = docs.len() as f64;
        let index: HashMap<String, usize> = terms
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.to_string(), i))
            .collect();
        let idf: Vec<f64> = terms.iter().map(|(t, _)| (n / df[t] as f64).ln()).collect();

        let v = idf.len();
        let mut mass = vec![vec![0.0; v]; classes.len()];
        let mut prior = vec![0usize; classes.len()];
        let mut model = NaiveBayes {
            classes,
            index,
            idf,
            log_prior: Vec::new(),
            log_cond: Vec::new(),
        };
        for (d, l) in docs.iter().zip(labels) {
            let c = model.classes.binary_search_by(|x| x.as_str().cmp(l.as_ref())).unwrap();
            prior[c] += 1;
            for (w, x) in model.vectorize(d) {
                mass[c][w] += x;
            }
        }
        model.log_prior = prior.iter().map(|&p| (p as f64 / n).ln()).collect();
        model.log_cond = mass
            .iter()
            .map(|m| {
                let total: f64 = m.iter().sum::<f64>() + v as f64;
                m.iter().map(|x| ((x + 1.0) / total).ln()).collect()
            })
            .collect();
        Ok(model)
    }

    /// Sparse L2-normalized tf-idf vector of a document.
    fn vectorize<S: AsRef<str>>(&self, doc: &[S]) -> Vec<(usize, f64)> {
        let mut tf: HashMap<usize, f64> = HashMap::new();
        for w in doc {
            if let Some(&i) = self.index.get(w.as_ref()) {
                *tf.entry(i).or_default() += 1.0;
            }
        }
        let mut x: Vec<(usize, f64)> = tf.into_iter().map(|(i, c)| (i, c * self.idf[i])).collect();
        x.sort_unstable_by_key(|e| e.0);
        let norm = x.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|e| e.1 /= norm);
        }
        x
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn predict<S: AsRef<str>>(&self, doc: &[S]) -> &str {
        let x = self.vectorize(doc);
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..self.classes.len() {
            let s = self.log_prior[c] + x.iter().map(|&(w, v)| v * self.log_cond[c][w]).sum::<f64>();
            if s > best_score {
                best = c;
                best_score = s;
            }
        }
        &self.classes[best]
    }
}

pub fn naive_bayes_baseline<S: AsRef<str>>(
    train_docs: &[Vec<S>],
    train_labels: &[S],
    test_docs: &[Vec<S>],
) -> Result<Vec<String>> {
    let nb = NaiveBayes::train(train_docs, train_labels)?;
    Ok(test_docs.iter().map(|d| nb.predict(d).to_string()).collect())
}

/// The most frequent training label (alphabetically first on ties) for
/// every test item.
pub fn majority_baseline<S: AsRef<str>>(train_labels: &[S], num_test: usize) -> Result<Vec<String>> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for l in train_labels {
        *counts.entry(l.as_ref()).or_default() += 1;
    }
    let best = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
        .ok_or_else(|| Error::invalid("empty training set"))?
        .0
        .to_string();
    Ok(vec![best; num_test])
}

/// Mean accuracy of `classify(train_idx, test_idx)` over k folds.
pub fn cross_validate_accuracy<S: AsRef<str>>(
    labels: &[S],
    k: usize,
    rng_seed: u64,
    mut classify: impl FnMut(&[usize], &[usize]) -> Result<Vec<String>>,
) -> Result<f64> {
    let folds = kfold(labels.len(), k, rng_seed)?;
    let mut total = 0.0;
    for test in &folds {
        let held: HashSet<usize> = test.iter().copied().collect();
        let train: Vec<usize> = (0..labels.len()).filter(|i| !held.contains(i)).collect();
        let pred = classify(&train, test)?;
        let correct = pred
            .iter()
            .zip(test)
            .filter(|(p, &i)| p.as_str() == labels[i].as_ref())
            .count();
        total += correct as f64 / test.len() as f64;
    }
    Ok(total / folds.len() as f64)
}

/// Proportions of gold aspect-term occurrences labelled A and of lexicon
/// word occurrences labelled O, plus the same at type level (a type counts
/// as labelled A/O when more than half of its occurrences are).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationScore {
    pub aspect_occurrence: f64,
    pub opinion_occurrence: f64,
    pub aspect_type: f64,
    pub opinion_type: f64,
    pub aspect_occurrences: usize,
    pub opinion_occurrences: usize,
}

pub fn separation_score<S: AsRef<str>>(
    docs: &[Vec<usize>],
    classes: &[Vec<WordClass>],
    vocab: &Vocabulary,
    lexicon: &[S],
    aspect_terms: &[S],
) -> Result<SeparationScore> {
    let ids = |words: &[S], what: &str| -> Result<HashSet<usize>> {
        let set: HashSet<usize> = words.iter().filter_map(|w| vocab.id(w.as_ref())).collect();
        if set.is_empty() {
            return Err(Error::invalid(format!("no {what} word occurs in the vocabulary")));
        }
        Ok(set)
    };
    let opinion = ids(lexicon, "lexicon")?;
    let aspect = ids(aspect_terms, "aspect-term")?;

    // per type: (occurrences, occurrences with the wanted class)
    let mut per_type: HashMap<usize, (usize, usize)> = HashMap::new();
    for (toks, ys) in docs.iter().zip(classes) {
        for (&w, &y) in toks.iter().zip(ys) {
            let wanted = if opinion.contains(&w) {
                WordClass::Opinion
            } else if aspect.contains(&w) {
                WordClass::Aspect
            } else {
                continue;
            };
            let e = per_type.entry(w).or_default();
            e.0 += 1;
            if y == wanted {
                e.1 += 1;
            }
        }
    }
    let summarize = |set: &HashSet<usize>| {
        let (mut occ, mut hit, mut types, mut good) = (0, 0, 0, 0);
        for (w, &(n, h)) in &per_type {
            if set.contains(w) {
                occ += n;
                hit += h;
                types += 1;
                if 2 * h > n {
                    good += 1;
                }
            }
        }
        (ratio(hit, occ), ratio(good, types), occ)
    };
    let (ao, at, an) = summarize(&aspect);
    let (oo, ot, on) = summarize(&opinion);
    Ok(SeparationScore {
        aspect_occurrence: ao,
        opinion_occurrence: oo,
        aspect_type: at,
        opinion_type: ot,
        aspect_occurrences: an,
        opinion_occurrences: on,
    })
}

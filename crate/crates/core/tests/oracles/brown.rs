//! Exhaustive AMI oracle for Brown merges: recomputes the objective from
//! scratch for every candidate pair.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seedtopic::brown::{brown_cluster_traced, MergeStep};
use seedtopic::corpus::{ingest, read_plain, Corpus, IngestOptions, Stopwords};

pub struct BigramTable {
    pairs: HashMap<(usize, usize), f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    total: f64,
}

impl BigramTable {
    pub fn new(corpus: &Corpus) -> Self {
        let stream: Vec<usize> = corpus.sentences.iter().flat_map(|s| s.tokens.clone()).collect();
        let v = corpus.vocab.len();
        let mut t = BigramTable {
            pairs: HashMap::new(),
            left: vec![0.0; v],
            right: vec![0.0; v],
            total: 0.0,
        };
        for w in stream.windows(2) {
            *t.pairs.entry((w[0], w[1])).or_default() += 1.0;
            t.left[w[0]] += 1.0;
            t.right[w[1]] += 1.0;
            t.total += 1.0;
        }
        t
    }

    /// Average mutual information of the class bigram distribution over
    /// the given (disjoint) clusters.
    pub fn ami(&self, clusters: &[Vec<usize>]) -> f64 {
        let mut of = HashMap::new();
        for (i, c) in clusters.iter().enumerate() {
            for &w in c {
                of.insert(w, i);
            }
        }
        let k = clusters.len();
        let mut joint = vec![vec![0.0; k]; k];
        for (&(a, b), &n) in &self.pairs {
            if let (Some(&i), Some(&j)) = (of.get(&a), of.get(&b)) {
                joint[i][j] += n;
            }
        }
        let pl: Vec<f64> = clusters.iter().map(|c| c.iter().map(|&w| self.left[w]).sum::<f64>() / self.total).collect();
        let pr: Vec<f64> = clusters.iter().map(|c| c.iter().map(|&w| self.right[w]).sum::<f64>() / self.total).collect();
        let mut ami = 0.0;
        for i in 0..k {
            for j in 0..k {
                let p = joint[i][j] / self.total;
                if p > 0.0 {
                    ami += p * (p / (pl[i] * pr[j])).ln();
                }
            }
        }
        ami
    }

    /// Loss of merging clusters `i` and `j`.
    pub fn merge_loss(&self, clusters: &[Vec<usize>], i: usize, j: usize) -> f64 {
        let mut merged: Vec<Vec<usize>> = Vec::new();
        let mut union = clusters[i].clone();
        union.extend(&clusters[j]);
        for (x, c) in clusters.iter().enumerate() {
            if x != i && x != j {
                merged.push(c.clone());
            }
        }
        merged.push(union);
        self.ami(clusters) - self.ami(&merged)
    }
}

/// Checks one recorded merge against exhaustive search. Returns
/// `(chosen loss by oracle, minimum loss by oracle)`.
pub fn check_step(table: &BigramTable, step: &MergeStep) -> (f64, f64) {
    let active: Vec<usize> = (0..step.clusters.len()).filter(|&s| !step.clusters[s].is_empty()).collect();
    let clusters: Vec<Vec<usize>> = active.iter().map(|&s| step.clusters[s].clone()).collect();
    let pos = |slot: usize| active.iter().position(|&s| s == slot).unwrap();
    let chosen = table.merge_loss(&clusters, pos(step.merged.0), pos(step.merged.1));
    let mut best = f64::INFINITY;
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            best = best.min(table.merge_loss(&clusters, i, j));
        }
    }
    (chosen, best)
}

/// Corpus from literal lines with no stopwords and min_count 1.
pub fn corpus(lines: &[String]) -> Corpus {
    let mut o = IngestOptions::new("en", 1);
    o.stopwords = Stopwords::default();
    ingest(read_plain(lines.join("\n").as_bytes()).unwrap(), &o).unwrap()
}

/// 30 short random sentences over at most `v` word types.
pub fn random_corpus(seed: u64, v: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<String> = (0..v).map(|i| format!("w{i}")).collect();
    let lines: Vec<String> = (0..30)
        .map(|_| {
            let len = rng.gen_range(2..7);
            (0..len)
                // skewed so frequencies differ
                .map(|_| words[rng.gen_range(0..v).min(rng.gen_range(0..v))].clone())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    corpus(&lines)
}

/// Runs the greedy clusterer on random corpora with 5 to 12 word types and
/// several target sizes, checking every merge against exhaustive search.
/// Returns the number of merges checked and a description of each failure.
pub fn greedy_vs_exhaustive(seeds: std::ops::Range<u64>) -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut failures = Vec::new();
    for seed in seeds {
        let v = 5 + (seed as usize % 8);
        let c = random_corpus(seed, v);
        assert!(c.vocab.len() <= 12);
        let table = BigramTable::new(&c);
        for k in [1, 2, 3, 5] {
            let out = brown_cluster_traced(&c, k, true).unwrap();
            for (i, step) in out.trace.iter().enumerate() {
                let (chosen, best) = check_step(&table, step);
                checked += 1;
                if (chosen - step.loss).abs() >= 1e-9 {
                    failures.push(format!(
                        "seed {seed} k {k} step {i}: incremental loss {} vs recomputed {chosen}",
                        step.loss
                    ));
                }
                if chosen > best + 1e-9 {
                    failures.push(format!("seed {seed} k {k} step {i}: chose {chosen}, best {best}"));
                }
            }
        }
    }
    (checked, failures)
}

//! Aspect-term / opinion-word separation.
//!
//! Occurrences of aspect seeds are taken as aspect-term examples and
//! occurrences of polarity seeds as opinion-word examples. Each example is
//! described by the Brown clusters of its two left and two right neighbours
//! (never the word itself), and a two-class maximum-entropy model over those
//! features yields the switch prior `π = (π_A, π_O)` for every token.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::brown::ClusterAssignment;
use crate::config::SeedConfiguration;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const CONTEXT_OFFSETS: [isize; 4] = [-2, -1, 1, 2];
const PAD: &str = "<PAD>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WordClass {
    Aspect,
    Opinion,
}

impl WordClass {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for WordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordClass::Aspect => "A",
            WordClass::Opinion => "O",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingInstance {
    pub label: WordClass,
    pub features: Vec<String>,
    pub sentence: usize,
    pub position: usize,
}

/// Position-tagged cluster features of the `[-2, +2]` window around `pos`,
/// e.g. `-1|0110`; positions outside the sentence give `-2|<PAD>`.
pub fn context_features(tokens: &[usize], pos: usize, clusters: &ClusterAssignment) -> Vec<String> {
    CONTEXT_OFFSETS
        .iter()
        .map(|&off| {
            let j = pos as isize + off;
            let cluster = if j < 0 || j as usize >= tokens.len() {
                PAD
            } else {
                let t = tokens[j as usize];
                if t < clusters.num_terms() {
                    clusters.path_of(t)
                } else {
                    "<UNK>"
                }
            };
            format!("{off:+}|{cluster}")
        })
        .collect()
}

/// One instance per seed occurrence: aspect seeds give `A`, polarity seeds
/// give `O`.
pub fn bootstrap_instances(
    corpus: &Corpus,
    seeds: &SeedConfiguration,
    clusters: &ClusterAssignment,
) -> Result<Vec<TrainingInstance>> {
    let ids = |words: &mut dyn Iterator<Item = &String>| -> HashSet<usize> {
        words.filter_map(|w| corpus.vocab.id(w)).collect()
    };
    let aspect = ids(&mut seeds.aspects.iter().flat_map(|a| a.seeds.iter()));
    let opinion = ids(&mut seeds.positive_seeds.iter().chain(&seeds.negative_seeds));

    let instances: Vec<TrainingInstance> = corpus
        .sentences
        .par_iter()
        .enumerate()
        .flat_map_iter(|(si, s)| {
            let mut out = Vec::new();
            for (pos, t) in s.tokens.iter().enumerate() {
                for (set, label) in [(&aspect, WordClass::Aspect), (&opinion, WordClass::Opinion)] {
                    if set.contains(t) {
                        out.push(TrainingInstance {
                            label,
                            features: context_features(&s.tokens, pos, clusters),
                            sentence: si,
                            position: pos,
                        });
                    }
                }
            }
            out
        })
        .collect();
    for (label, what) in [(WordClass::Aspect, "aspect-term"), (WordClass::Opinion, "opinion-word")] {
        if !instances.iter().any(|i| i.label == label) {
            return Err(Error::Training(format!("no {what} instances")));
        }
    }
    Ok(instances)
}

/// Two-class maximum-entropy model: one weight per feature and class plus a
/// bias per class.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationModel {
    features: Vec<String>,
    index: HashMap<String, usize>,
    bias: [f64; 2],
    weights: [Vec<f64>; 2],
}

impl SeparationModel {
    pub fn new(features: Vec<String>, bias: [f64; 2], weights: [Vec<f64>; 2]) -> Result<Self> {
        if weights.iter().any(|w| w.len() != features.len()) {
            return Err(Error::invalid("weight vector length differs from feature count"));
        }
        if bias.iter().chain(weights.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite MaxEnt weight"));
        }
        let index = features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i))
            .collect();
        Ok(SeparationModel {
            features,
            index,
            bias,
            weights,
        })
    }

    /// The all-zero model over no features (π = 0.5 everywhere).
    pub fn zero() -> Self {
        SeparationModel::new(Vec::new(), [0.0; 2], [Vec::new(), Vec::new()]).unwrap()
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn weight(&self, feature: &str, class: WordClass) -> Option<f64> {
        self.index.get(feature).map(|&i| self.weights[class.index()][i])
    }

    fn scores<S: AsRef<str>>(&self, features: &[S]) -> [f64; 2] {
        let mut s = self.bias;
        for f in features {
            if let Some(&i) = self.index.get(f.as_ref()) {
                s[0] += self.weights[0][i];
                s[1] += self.weights[1][i];
            }
        }
        s
    }

    /// `(π_A, π_O)` for a feature vector; unknown features are ignored.
    pub fn predict<S: AsRef<str>>(&self, features: &[S]) -> (f64, f64) {
        let s = self.scores(features);
        let d = s[0] - s[1];
        let pa = 1.0 / (1.0 + (-d).exp());
        (pa, 1.0 - pa)
    }

    /// `(π_A, π_O)` for the token at `pos` of a sentence.
    pub fn predict_pi(&self, tokens: &[usize], pos: usize, clusters: &ClusterAssignment) -> (f64, f64) {
        self.predict(&context_features(tokens, pos, clusters))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "seedtopic-maxent v1")?;
        writeln!(w, "features\t{}", self.features.len())?;
        writeln!(w, "classes\tA\tO")?;
        writeln!(w, "<BIAS>\t{}\t{}", self.bias[0], self.bias[1])?;
        for (i, f) in self.features.iter().enumerate() {
            writeln!(w, "{f}\t{}\t{}", self.weights[0][i], self.weights[1][i])?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R, path: &str) -> Result<Self> {
        let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
        if lines.first().map(String::as_str) != Some("seedtopic-maxent v1") {
            return Err(Error::format(path, 1, "not a separation model file"));
        }
        let count: usize = lines
            .get(1)
            .and_then(|l| l.strip_prefix("features\t"))
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::format(path, 2, "expected feature count"))?;
        if lines.get(2).map(String::as_str) != Some("classes\tA\tO") {
            return Err(Error::format(path, 3, "expected classes line"));
        }
        let parse = |n: usize| -> Result<(String, f64, f64)> {
            let l = lines
                .get(n)
                .ok_or_else(|| Error::format(path, n + 1, "truncated model file"))?;
            let f: Vec<&str> = l.split('\t').collect();
            let num = |x: &str| {
                x.parse::<f64>()
                    .map_err(|_| Error::format(path, n + 1, "bad weight"))
            };
            if f.len() != 3 {
                return Err(Error::format(path, n + 1, "expected feature<TAB>λ_A<TAB>λ_O"));
            }
            Ok((f[0].to_string(), num(f[1])?, num(f[2])?))
        };
        let (_, ba, bo) = parse(3)?;
        let mut features = Vec::with_capacity(count);
        let mut weights = [Vec::with_capacity(count), Vec::with_capacity(count)];
        for n in 4..4 + count {
            let (f, a, o) = parse(n)?;
            features.push(f);
            weights[0].push(a);
            weights[1].push(o);
        }
        Self::new(features, [ba, bo], weights)
    }
}

/// Cached `[π_A, π_O]` for every token of every sentence.
pub fn predict_corpus(corpus: &Corpus, clusters: &ClusterAssignment, model: &SeparationModel) -> Vec<Vec<[f64; 2]>> {
    corpus
        .sentences
        .par_iter()
        .map(|s| predict_sentence(&s.tokens, clusters, model))
        .collect()
}

pub fn predict_sentence(tokens: &[usize], clusters: &ClusterAssignment, model: &SeparationModel) -> Vec<[f64; 2]> {
    (0..tokens.len())
        .map(|i| {
            let (a, o) = model.predict_pi(tokens, i, clusters);
            [a, o]
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct MaxEntOptions {
    pub l2: f64,
    pub max_iterations: usize,
    /// Convergence when the gradient norm divided by the instance count
    /// falls below this value.
    pub tolerance: f64,
}

impl Default for MaxEntOptions {
    fn default() -> Self {
        MaxEntOptions {
            l2: 1.0,
            max_iterations: 1000,
            tolerance: 1e-6,
        }
    }
}

/// Fitted model plus optimizer diagnostics.
#[derive(Debug, Clone)]
pub struct MaxEntFit {
    pub model: SeparationModel,
    pub iterations: usize,
    pub objective: f64,
    pub objective_at_zero: f64,
    pub gradient_norm: f64,
}

struct Problem {
    // feature indices per instance
    x: Vec<Vec<usize>>,
    // 1.0 for A, 0.0 for O
    y: Vec<f64>,
    num_features: usize,
    l2: f64,
}

impl Problem {
    // parameter layout: [b_A, b_O, λ_A (F), λ_O (F)]
    fn dim(&self) -> usize {
        2 + 2 * self.num_features
    }

    /// Negative penalized log-likelihood and its gradient.
    fn eval(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let f = self.num_features;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut nll = 0.0;
        for (xi, &yi) in self.x.iter().zip(&self.y) {
            let mut d = theta[0] - theta[1];
            for &j in xi {
                d += theta[2 + j] - theta[2 + f + j];
            }
            // log p(A) = -ln(1 + e^{-d}), log p(O) = -ln(1 + e^{d})
            let la = -softplus(-d);
            let lo = -softplus(d);
            nll -= yi * la + (1.0 - yi) * lo;
            let pa = la.exp();
            let r = pa - yi;
            grad[0] += r;
            grad[1] -= r;
            for &j in xi {
                grad[2 + j] += r;
                grad[2 + f + j] -= r;
            }
        }
        let mut penalty = 0.0;
        for j in 2..theta.len() {
            penalty += theta[j] * theta[j];
            grad[j] += self.l2 * theta[j];
        }
        nll + 0.5 * self.l2 * penalty
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Fits the L2-regularized two-class MaxEnt model with L-BFGS. Biases are
/// not regularized. Deterministic for a given instance order.
pub fn train_maxent(instances: &[TrainingInstance], opts: &MaxEntOptions) -> Result<MaxEntFit> {
    for (label, what) in [(WordClass::Aspect, "aspect-term"), (WordClass::Opinion, "opinion-word")] {
        if !instances.iter().any(|i| i.label == label) {
            return Err(Error::Training(format!("no {what} instances")));
        }
    }
    let features: Vec<String> = instances
        .iter()
        .flat_map(|i| i.features.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&str, usize> = features
        .iter()
        .enumerate()
        .map(|(i, f)| (f.as_str(), i))
        .collect();
    let problem = Problem {
        x: instances
            .iter()
            .map(|i| {
                let mut v: Vec<usize> = i.features.iter().map(|f| index[f.as_str()]).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect(),
        y: instances
            .iter()
            .map(|i| if i.label == WordClass::Aspect { 1.0 } else { 0.0 })
            .collect(),
        num_features: features.len(),
        l2: opts.l2,
    };
    let n = instances.len() as f64;
    let dim = problem.dim();
    let mut theta = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut fx = problem.eval(&theta, &mut grad);
    let objective_at_zero = -fx;

    const MEMORY: usize = 10;
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut iterations = 0;
    let mut new_theta = vec![0.0; dim];
    let mut new_grad = vec![0.0; dim];

    while norm(&grad) / n > opts.tolerance {
        if iterations >= opts.max_iterations {
            return Err(Error::Training(format!(
                "MaxEnt did not converge in {iterations} iterations (gradient norm {:.3e})",
                norm(&grad)
            )));
        }
        iterations += 1;

        // two-loop recursion
        let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(s_hist.len());
        for (s, y) in s_hist.iter().zip(&y_hist).rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &dir);
            dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= a * yi);
            alphas.push((a, rho));
        }
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s, y) / dot(y, y);
            dir.iter_mut().for_each(|d| *d *= gamma);
        }
        for ((s, y), (a, rho)) in s_hist.iter().zip(&y_hist).zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(d, si)| *d += (a - b) * si);
        }
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &dir);
            s_hist.clear();
            y_hist.clear();
        }

        // backtracking Armijo search
        let mut step = if s_hist.is_empty() { 1.0 / norm(&grad).max(1.0) } else { 1.0 };
        let new_fx = loop {
            for i in 0..dim {
                new_theta[i] = theta[i] + step * dir[i];
            }
            let f = problem.eval(&new_theta, &mut new_grad);
            if f <= fx + 1e-4 * step * slope {
                break f;
            }
            step *= 0.5;
            if step < 1e-20 {
                return Err(Error::Training(format!(
                    "MaxEnt line search failed (gradient norm {:.3e})",
                    norm(&grad)
                )));
            }
        };

        let s: Vec<f64> = new_theta.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-12 {
            if s_hist.len() == MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        std::mem::swap(&mut theta, &mut new_theta);
        std::mem::swap(&mut grad, &mut new_grad);
        fx = new_fx;
    }

    let f = features.len();
    let model = SeparationModel::new(
        features,
        [theta[0], theta[1]],
        [theta[2..2 + f].to_vec(), theta[2 + f..].to_vec()],
    )?;
    Ok(MaxEntFit {
        model,
        iterations,
        objective: -fx,
        objective_at_zero,
        gradient_norm: norm(&grad),
    })
}

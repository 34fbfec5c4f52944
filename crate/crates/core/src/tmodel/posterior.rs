use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::config::{RunParameters, SamplerMode};
use crate::corpus::Polarity;
use crate::error::{Error, Result};
use crate::separation::WordClass;

use super::priors::PriorSet;
use super::sampler::{draw, SamplerState};
use super::WordKind;

/// Posterior estimates averaged over the retained samples of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub num_topics: usize,
    pub vocab_size: usize,
    pub theta: Vec<Vec<f64>>,
    pub omega: Vec<[f64; 2]>,
    /// Per word kind, T×V row-major.
    pub phi: [Vec<f64>; 3],
    pub samples: usize,
}

impl PosteriorSummary {
    pub fn phi(&self, kind: WordKind, t: usize, w: usize) -> f64 {
        self.phi[kind.index()][t * self.vocab_size + w]
    }

    pub fn phi_row(&self, kind: WordKind, t: usize) -> &[f64] {
        &self.phi[kind.index()][t * self.vocab_size..(t + 1) * self.vocab_size]
    }
}

struct Accumulator {
    theta: Vec<Vec<f64>>,
    omega: Vec<[f64; 2]>,
    phi: [Vec<f64>; 3],
    samples: usize,
}

impl Accumulator {
    fn new(state: &SamplerState) -> Self {
        let tv = state.num_topics() * state.vocab_size();
        Accumulator {
            theta: vec![vec![0.0; state.num_topics()]; state.num_docs()],
            omega: vec![[0.0; 2]; state.num_docs()],
            phi: [vec![0.0; tv], vec![0.0; tv], vec![0.0; tv]],
            samples: 0,
        }
    }

    fn add(&mut self, state: &SamplerState, priors: &PriorSet) {
        let (tn, vn) = (state.num_topics(), state.vocab_size());
        for d in 0..state.num_docs() {
            let alpha = priors.alpha(d);
            let nd = state.doc_len(d) as f64 + priors.alpha_base();
            for (t, x) in self.theta[d].iter_mut().enumerate() {
                *x += (state.doc_topic(d, t) as f64 + alpha[t]) / nd;
            }
            let delta = priors.delta(d);
            let no = state.opinion_count(d) as f64 + priors.delta_base();
            for q in Polarity::ALL {
                self.omega[d][q.index()] += (state.doc_polarity(d, q) as f64 + delta[q.index()]) / no;
            }
        }
        for kind in WordKind::ALL {
            let acc = &mut self.phi[kind.index()];
            for t in 0..tn {
                let denom = state.topic_total(kind, t) as f64 + priors.beta_sum(kind, t);
                for w in 0..vn {
                    acc[t * vn + w] += (state.count(kind, t, w) as f64 + priors.beta(kind, t, w)) / denom;
                }
            }
        }
        self.samples += 1;
    }

    fn finish(mut self, state: &SamplerState) -> PosteriorSummary {
        let n = self.samples as f64;
        self.theta.iter_mut().flatten().for_each(|x| *x /= n);
        self.omega.iter_mut().flatten().for_each(|x| *x /= n);
        self.phi.iter_mut().flatten().for_each(|x| *x /= n);
        PosteriorSummary {
            num_topics: state.num_topics(),
            vocab_size: state.vocab_size(),
            theta: self.theta,
            omega: self.omega,
            phi: self.phi,
            samples: self.samples,
        }
    }
}

fn is_sample(iteration: usize, burn_in: usize, lag: usize) -> bool {
    iteration > burn_in && (iteration - burn_in) % lag == 0
}

/// Runs `params.iterations` sweeps. After the burn-in every `lag`-th state
/// is one sample of the smoothed estimates; if none qualifies the final
/// state is used. `on_sweep` sees the state after each sweep (1-based).
pub fn run_gibbs(
    state: &mut SamplerState,
    priors: &PriorSet,
    params: &RunParameters,
    mut on_sweep: impl FnMut(usize, &SamplerState),
) -> PosteriorSummary {
    let mut acc = Accumulator::new(state);
    for it in 1..=params.iterations {
        state.sweep(priors, params.mode);
        on_sweep(it, state);
        if is_sample(it, params.burn_in, params.lag) {
            acc.add(state, priors);
        }
    }
    if acc.samples == 0 {
        acc.add(state, priors);
    }
    acc.finish(state)
}

/// θ and Ω of a single sentence estimated against frozen topic-word
/// distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEstimate {
    pub theta: Vec<f64>,
    pub omega: [f64; 2],
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FoldIn {
    Estimate(SentenceEstimate),
    /// No in-vocabulary token to sample.
    Unclassifiable,
}

/// Chain seed of a fold-in: the run seed mixed with a digest of the tokens,
/// so every sentence gets its own reproducible stream.
pub fn foldin_seed(rng_seed: u64, tokens: &[usize]) -> u64 {
    let mut h = Sha256::new();
    h.update(rng_seed.to_le_bytes());
    for &t in tokens {
        h.update((t as u64).to_le_bytes());
    }
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}

/// Short Gibbs chain over one sentence. The topic-word distributions are
/// the summary's φ and stay fixed; only the sentence's own topic and
/// polarity counts move. Tokens outside the vocabulary are skipped.
pub fn fold_in(
    summary: &PosteriorSummary,
    tokens: &[usize],
    pi: &[[f64; 2]],
    alpha: &[f64],
    delta: [f64; 2],
    params: &RunParameters,
) -> FoldIn {
    let keep: Vec<(usize, [f64; 2])> = tokens
        .iter()
        .zip(pi)
        .filter(|(&w, _)| w < summary.vocab_size)
        .map(|(&w, &p)| (w, p))
        .collect();
    if keep.is_empty() {
        return FoldIn::Unclassifiable;
    }
    let words: Vec<usize> = keep.iter().map(|k| k.0).collect();
    let tn = summary.num_topics;
    let mut rng = ChaCha8Rng::seed_from_u64(foldin_seed(params.rng_seed, &words));

    let n = keep.len();
    let mut z: Vec<usize> = Vec::with_capacity(n);
    let mut y: Vec<WordClass> = Vec::with_capacity(n);
    let mut v: Vec<Polarity> = Vec::with_capacity(n);
    let mut n_dt = vec![0u32; tn];
    let mut n_dq = [0u32; 2];
    for &(_, p) in &keep {
        let t = rng.gen_range(0..tn);
        let c = if rng.gen::<f64>() < p[0] {
            WordClass::Aspect
        } else {
            WordClass::Opinion
        };
        let q = if rng.gen::<bool>() {
            Polarity::Positive
        } else {
            Polarity::Negative
        };
        n_dt[t] += 1;
        if c == WordClass::Opinion {
            n_dq[q.index()] += 1;
        }
        z.push(t);
        y.push(c);
        v.push(q);
    }

    let kind = |c: WordClass, q: Polarity| match (c, q) {
        (WordClass::Aspect, _) => WordKind::Aspect,
        (WordClass::Opinion, Polarity::Positive) => WordKind::Positive,
        (WordClass::Opinion, Polarity::Negative) => WordKind::Negative,
    };
    let dsum = delta[0] + delta[1];
    let mut theta = vec![0.0; tn];
    let mut omega = [0.0; 2];
    let mut samples = 0;
    let mut zw = vec![0.0; tn];

    for it in 1..=params.foldin_iterations {
        for i in 0..n {
            let (w, [pa, po]) = keep[i];
            n_dt[z[i]] -= 1;
            if y[i] == WordClass::Opinion {
                n_dq[v[i].index()] -= 1;
            }

            let own = kind(y[i], v[i]);
            for (t, o) in zw.iter_mut().enumerate() {
                let like = match params.mode {
                    SamplerMode::AsWritten => WordKind::ALL.iter().map(|&k| summary.phi(k, t, w)).product(),
                    SamplerMode::Derived => summary.phi(own, t, w),
                };
                *o = like * (n_dt[t] as f64 + alpha[t]);
            }
            z[i] = draw(&zw, &mut rng);

            let opinion = match params.mode {
                SamplerMode::AsWritten => summary.phi(kind(WordClass::Opinion, v[i]), z[i], w),
                SamplerMode::Derived => {
                    let denom = (n_dq[0] + n_dq[1]) as f64 + dsum;
                    Polarity::ALL
                        .iter()
                        .map(|&q| {
                            summary.phi(kind(WordClass::Opinion, q), z[i], w) * (n_dq[q.index()] as f64 + delta[q.index()])
                                / denom
                        })
                        .sum()
                }
            };
            let yw = [summary.phi(WordKind::Aspect, z[i], w) * pa, opinion * po];
            y[i] = if draw(&yw, &mut rng) == 0 {
                WordClass::Aspect
            } else {
                WordClass::Opinion
            };
            if y[i] == WordClass::Opinion {
                let vw = Polarity::ALL
                    .map(|q| summary.phi(kind(WordClass::Opinion, q), z[i], w) * (n_dq[q.index()] as f64 + delta[q.index()]));
                v[i] = Polarity::ALL[draw(&vw, &mut rng)];
                n_dq[v[i].index()] += 1;
            }
            n_dt[z[i]] += 1;
        }
        if is_sample(it, params.foldin_burn_in, params.foldin_lag) {
            let nd = n as f64 + params.alpha_base;
            for t in 0..tn {
                theta[t] += (n_dt[t] as f64 + alpha[t]) / nd;
            }
            let no = (n_dq[0] + n_dq[1]) as f64 + params.delta_base;
            for q in 0..2 {
                omega[q] += (n_dq[q] as f64 + delta[q]) / no;
            }
            samples += 1;
        }
    }
    if samples == 0 {
        let nd = n as f64 + params.alpha_base;
        for t in 0..tn {
            theta[t] = (n_dt[t] as f64 + alpha[t]) / nd;
        }
        let no = (n_dq[0] + n_dq[1]) as f64 + params.delta_base;
        for q in 0..2 {
            omega[q] = (n_dq[q] as f64 + delta[q]) / no;
        }
        samples = 1;
    } else {
        theta.iter_mut().for_each(|x| *x /= samples as f64);
        omega.iter_mut().for_each(|x| *x /= samples as f64);
    }
    FoldIn::Estimate(SentenceEstimate { theta, omega, samples })
}

/// Index of the largest entry, lowest index on ties, and whether another
/// entry ties with it.
pub fn argmax_flagged(xs: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    let tol = 1e-12 * xs[best].abs().max(1.0);
    let tie = xs
        .iter()
        .enumerate()
        .any(|(i, &x)| i != best && (xs[best] - x).abs() <= tol);
    (best, tie)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub aspect: usize,
    pub aspect_tie: bool,
    pub polarity: Polarity,
    pub polarity_tie: bool,
}

pub fn classify(estimate: &SentenceEstimate) -> Classification {
    let (aspect, aspect_tie) = argmax_flagged(&estimate.theta);
    let (q, polarity_tie) = argmax_flagged(&estimate.omega);
    Classification {
        aspect,
        aspect_tie,
        polarity: Polarity::ALL[q],
        polarity_tie,
    }
}

/// The `k` most probable terms of one topic-word distribution, ties broken
/// by term id.
pub fn top_words(
    summary: &PosteriorSummary,
    terms: &[String],
    topic: usize,
    kind: WordKind,
    k: usize,
) -> Result<Vec<(String, f64)>> {
    if topic >= summary.num_topics {
        return Err(Error::invalid(format!(
            "unknown topic {topic} (model has {})",
            summary.num_topics
        )));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if terms.len() != summary.vocab_size {
        return Err(Error::invalid("term list does not match the model vocabulary"));
    }
    let row = summary.phi_row(kind, topic);
    let mut ids: Vec<usize> = (0..row.len()).collect();
    ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    Ok(ids
        .into_iter()
        .take(k)
        .map(|w| (terms[w].clone(), row[w]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(t: usize, v: usize) -> PosteriorSummary {
        let tv = t * v;
        PosteriorSummary {
            num_topics: t,
            vocab_size: v,
            theta: vec![],
            omega: vec![],
            phi: [vec![1.0 / v as f64; tv], vec![1.0 / v as f64; tv], vec![1.0 / v as f64; tv]],
            samples: 1,
        }
    }

    #[test]
    fn default_schedule_keeps_forty_samples() {
        let n = (1..=500).filter(|&i| is_sample(i, 100, 10)).count();
        assert_eq!(n, 40);
        assert_eq!((1..=50).filter(|&i| is_sample(i, 20, 5)).count(), 6);
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_flagged(&[0.7, 0.2, 0.1]), (0, false));
        assert_eq!(argmax_flagged(&[0.5, 0.5]), (0, true));
        assert_eq!(argmax_flagged(&[0.1, 0.3, 0.3]), (1, true));
    }

    #[test]
    fn tied_polarity_goes_positive_and_is_flagged() {
        let c = classify(&SentenceEstimate {
            theta: vec![0.7, 0.2, 0.1],
            omega: [0.5, 0.5],
            samples: 1,
        });
        assert_eq!((c.aspect, c.aspect_tie), (0, false));
        assert_eq!((c.polarity, c.polarity_tie), (Polarity::Positive, true));
    }

    #[test]
    fn oov_only_sentence_is_unclassifiable() {
        let s = summary(2, 3);
        let p = RunParameters::defaults(2);
        assert_eq!(fold_in(&s, &[], &[], &[12.5, 12.5], [12.5, 12.5], &p), FoldIn::Unclassifiable);
        assert_eq!(
            fold_in(&s, &[7, 9], &[[0.5, 0.5]; 2], &[12.5, 12.5], [12.5, 12.5], &p),
            FoldIn::Unclassifiable
        );
    }

    #[test]
    fn single_topic_fold_in_is_certain() {
        let s = summary(1, 3);
        let p = RunParameters::defaults(1);
        let FoldIn::Estimate(e) = fold_in(&s, &[0, 2], &[[0.3, 0.7]; 2], &[50.0], [25.0, 25.0], &p) else {
            panic!("expected an estimate");
        };
        assert_eq!(e.theta, vec![1.0]);
        assert_eq!(e.samples, 6);
        assert!((e.omega.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn top_words_orders_and_truncates() {
        let mut s = summary(1, 4);
        s.phi[0] = vec![0.1, 0.4, 0.1, 0.4];
        let terms: Vec<String> = ["a", "b", "c", "d"].iter().map(|x| x.to_string()).collect();
        let top = top_words(&s, &terms, 0, WordKind::Aspect, 1).unwrap();
        assert_eq!(top, vec![("b".to_string(), 0.4)]);
        let all = top_words(&s, &terms, 0, WordKind::Aspect, 10).unwrap();
        let names: Vec<&str> = all.iter().map(|x| x.0.as_str()).collect();
        assert_eq!(names, ["b", "d", "a", "c"]);
        assert!(top_words(&s, &terms, 1, WordKind::Aspect, 1).is_err());
        assert!(top_words(&s, &terms, 0, WordKind::Aspect, 0).is_err());
    }
}

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SamplerMode;
use crate::corpus::Polarity;
use crate::error::{Error, Result};
use crate::separation::WordClass;

use super::priors::PriorSet;
use super::WordKind;

fn kind_of(y: WordClass, v: Polarity) -> WordKind {
    match (y, v) {
        (WordClass::Aspect, _) => WordKind::Aspect,
        (WordClass::Opinion, Polarity::Positive) => WordKind::Positive,
        (WordClass::Opinion, Polarity::Negative) => WordKind::Negative,
    }
}

/// Unnormalized full conditionals of one token, computed with that token's
/// own counts removed.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditionals {
    /// Over topics, given the token's current y and v.
    pub z: Vec<f64>,
    /// Over (A, O), given the token's current z.
    pub y: [f64; 2],
    /// Over (P, N), given the token's current z.
    pub v: [f64; 2],
}

/// Assignments and count matrices of one Gibbs chain.
#[derive(Debug, Clone)]
pub struct SamplerState {
    num_topics: usize,
    vocab_size: usize,
    tokens: Vec<usize>,
    offsets: Vec<usize>,
    pi: Vec<[f64; 2]>,
    z: Vec<usize>,
    y: Vec<WordClass>,
    v: Vec<Polarity>,
    // per word kind: T×V counts and per-topic totals
    n_w: [Vec<u32>; 3],
    n_t: [Vec<u32>; 3],
    n_dt: Vec<u32>,
    n_dq: Vec<[u32; 2]>,
    rng: ChaCha8Rng,
    scratch: Vec<f64>,
}

/// Random initial state: z uniform, y drawn from π, v uniform (also for
/// aspect tokens, whose v stays unused until they become opinion words).
pub fn init_state(docs: Vec<Vec<usize>>, pi: Vec<Vec<[f64; 2]>>, priors: &PriorSet, rng_seed: u64) -> Result<SamplerState> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let t = priors.num_topics();
    let mut z = Vec::new();
    let mut y = Vec::new();
    let mut v = Vec::new();
    for p in pi.iter().flatten() {
        z.push(rng.gen_range(0..t));
        y.push(if rng.gen::<f64>() < p[0] {
            WordClass::Aspect
        } else {
            WordClass::Opinion
        });
        v.push(if rng.gen::<bool>() {
            Polarity::Positive
        } else {
            Polarity::Negative
        });
    }
    if docs.len() != priors.num_docs() {
        return Err(Error::invalid(format!(
            "priors cover {} documents, corpus has {}",
            priors.num_docs(),
            docs.len()
        )));
    }
    SamplerState::build(docs, pi, z, y, v, t, priors.vocab_size(), rng)
}

impl SamplerState {
    /// State with given assignments; flat vectors follow document order.
    #[allow(clippy::too_many_arguments)]
    pub fn from_assignments(
        docs: Vec<Vec<usize>>,
        pi: Vec<Vec<[f64; 2]>>,
        z: Vec<usize>,
        y: Vec<WordClass>,
        v: Vec<Polarity>,
        num_topics: usize,
        vocab_size: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        Self::build(docs, pi, z, y, v, num_topics, vocab_size, ChaCha8Rng::seed_from_u64(rng_seed))
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        docs: Vec<Vec<usize>>,
        pi: Vec<Vec<[f64; 2]>>,
        z: Vec<usize>,
        y: Vec<WordClass>,
        v: Vec<Polarity>,
        num_topics: usize,
        vocab_size: usize,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if docs.len() != pi.len() || docs.iter().zip(&pi).any(|(d, p)| d.len() != p.len()) {
            return Err(Error::invalid("π does not match the document shapes"));
        }
        let mut offsets = vec![0];
        for d in &docs {
            offsets.push(offsets.last().unwrap() + d.len());
        }
        let n = *offsets.last().unwrap();
        if z.len() != n || y.len() != n || v.len() != n {
            return Err(Error::invalid("assignment vectors do not match the token count"));
        }
        let tokens: Vec<usize> = docs.into_iter().flatten().collect();
        if let Some(w) = tokens.iter().find(|&&w| w >= vocab_size) {
            return Err(Error::invalid(format!("token id {w} outside vocabulary of size {vocab_size}")));
        }
        if let Some(t) = z.iter().find(|&&t| t >= num_topics) {
            return Err(Error::invalid(format!("topic {t} outside [0, {num_topics})")));
        }
        let mut s = SamplerState {
            num_topics,
            vocab_size,
            tokens,
            pi: pi.into_iter().flatten().collect(),
            z,
            y,
            v,
            n_w: Default::default(),
            n_t: Default::default(),
            n_dt: Vec::new(),
            n_dq: Vec::new(),
            rng,
            scratch: vec![0.0; num_topics],
            offsets,
        };
        let (n_w, n_t, n_dt, n_dq) = s.recount();
        s.n_w = n_w;
        s.n_t = n_t;
        s.n_dt = n_dt;
        s.n_dq = n_dq;
        Ok(s)
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn num_docs(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.offsets[d + 1] - self.offsets[d]
    }

    pub fn doc_tokens(&self, d: usize) -> &[usize] {
        &self.tokens[self.offsets[d]..self.offsets[d + 1]]
    }

    pub fn z(&self, d: usize) -> &[usize] {
        &self.z[self.offsets[d]..self.offsets[d + 1]]
    }

    pub fn y(&self, d: usize) -> &[WordClass] {
        &self.y[self.offsets[d]..self.offsets[d + 1]]
    }

    /// Polarity assignments; entries of aspect tokens are stale.
    pub fn v(&self, d: usize) -> &[Polarity] {
        &self.v[self.offsets[d]..self.offsets[d + 1]]
    }

    pub fn pi(&self, d: usize) -> &[[f64; 2]] {
        &self.pi[self.offsets[d]..self.offsets[d + 1]]
    }

    pub fn count(&self, kind: WordKind, t: usize, w: usize) -> u32 {
        self.n_w[kind.index()][t * self.vocab_size + w]
    }

    pub fn topic_total(&self, kind: WordKind, t: usize) -> u32 {
        self.n_t[kind.index()][t]
    }

    pub fn doc_topic(&self, d: usize, t: usize) -> u32 {
        self.n_dt[d * self.num_topics + t]
    }

    pub fn doc_polarity(&self, d: usize, q: Polarity) -> u32 {
        self.n_dq[d][q.index()]
    }

    pub fn opinion_count(&self, d: usize) -> u32 {
        self.n_dq[d][0] + self.n_dq[d][1]
    }

    #[allow(clippy::type_complexity)]
    fn recount(&self) -> ([Vec<u32>; 3], [Vec<u32>; 3], Vec<u32>, Vec<[u32; 2]>) {
        let (t, v) = (self.num_topics, self.vocab_size);
        let mut n_w = [vec![0; t * v], vec![0; t * v], vec![0; t * v]];
        let mut n_t = [vec![0; t], vec![0; t], vec![0; t]];
        let mut n_dt = vec![0; self.num_docs() * t];
        let mut n_dq = vec![[0; 2]; self.num_docs()];
        for d in 0..self.num_docs() {
            for i in self.offsets[d]..self.offsets[d + 1] {
                let k = kind_of(self.y[i], self.v[i]).index();
                let z = self.z[i];
                n_w[k][z * v + self.tokens[i]] += 1;
                n_t[k][z] += 1;
                n_dt[d * t + z] += 1;
                if self.y[i] == WordClass::Opinion {
                    n_dq[d][self.v[i].index()] += 1;
                }
            }
        }
        (n_w, n_t, n_dt, n_dq)
    }

    /// Recounts every matrix from the assignments and compares it with the
    /// maintained counts; also checks token conservation per document.
    pub fn check_counts(&self) -> Result<()> {
        let (n_w, n_t, n_dt, n_dq) = self.recount();
        if n_w != self.n_w || n_t != self.n_t || n_dt != self.n_dt || n_dq != self.n_dq {
            return Err(Error::Training("count matrices disagree with assignments".into()));
        }
        for d in 0..self.num_docs() {
            let total: u32 = (0..self.num_topics).map(|t| self.doc_topic(d, t)).sum();
            if total as usize != self.doc_len(d) {
                return Err(Error::Training(format!("document {d} lost tokens")));
            }
        }
        Ok(())
    }

    fn update(&mut self, d: usize, i: usize, add: bool) {
        let k = kind_of(self.y[i], self.v[i]).index();
        let z = self.z[i];
        let cell = z * self.vocab_size + self.tokens[i];
        let dt = d * self.num_topics + z;
        let o = (self.y[i] == WordClass::Opinion).then(|| self.v[i].index());
        if add {
            self.n_w[k][cell] += 1;
            self.n_t[k][z] += 1;
            self.n_dt[dt] += 1;
            if let Some(q) = o {
                self.n_dq[d][q] += 1;
            }
        } else {
            self.n_w[k][cell] -= 1;
            self.n_t[k][z] -= 1;
            self.n_dt[dt] -= 1;
            if let Some(q) = o {
                self.n_dq[d][q] -= 1;
            }
        }
    }

    /// (n + β) / (Σn + Σβ) for word `w` under topic `t` and kind `kind`.
    fn ratio(&self, priors: &PriorSet, kind: WordKind, t: usize, w: usize) -> f64 {
        let k = kind.index();
        (self.n_w[k][t * self.vocab_size + w] as f64 + priors.beta(kind, t, w))
            / (self.n_t[k][t] as f64 + priors.beta_sum(kind, t))
    }

    fn z_weights(&self, priors: &PriorSet, d: usize, i: usize, mode: SamplerMode, out: &mut [f64]) {
        let w = self.tokens[i];
        let alpha = priors.alpha(d);
        let own = kind_of(self.y[i], self.v[i]);
        for (t, o) in out.iter_mut().enumerate() {
            let like = match mode {
                SamplerMode::AsWritten => WordKind::ALL
                    .iter()
                    .map(|&k| self.ratio(priors, k, t, w))
                    .product(),
                SamplerMode::Derived => self.ratio(priors, own, t, w),
            };
            *o = like * (self.n_dt[d * self.num_topics + t] as f64 + alpha[t]);
        }
    }

    fn y_weights(&self, priors: &PriorSet, d: usize, i: usize, mode: SamplerMode) -> [f64; 2] {
        let (w, z) = (self.tokens[i], self.z[i]);
        let [pa, po] = self.pi[i];
        let aspect = self.ratio(priors, WordKind::Aspect, z, w) * pa;
        let opinion = match mode {
            SamplerMode::AsWritten => self.ratio(priors, kind_of(WordClass::Opinion, self.v[i]), z, w),
            SamplerMode::Derived => {
                // v summed out under its predictive distribution
                let delta = priors.delta(d);
                let denom = self.opinion_count(d) as f64 + delta[0] + delta[1];
                Polarity::ALL
                    .iter()
                    .map(|&q| {
                        self.ratio(priors, kind_of(WordClass::Opinion, q), z, w)
                            * (self.n_dq[d][q.index()] as f64 + delta[q.index()])
                            / denom
                    })
                    .sum()
            }
        };
        [aspect, opinion * po]
    }

    fn v_weights(&self, priors: &PriorSet, d: usize, i: usize) -> [f64; 2] {
        let (w, z) = (self.tokens[i], self.z[i]);
        let delta = priors.delta(d);
        Polarity::ALL.map(|q| {
            self.ratio(priors, kind_of(WordClass::Opinion, q), z, w)
                * (self.n_dq[d][q.index()] as f64 + delta[q.index()])
        })
    }

    /// Conditionals of token `n` of document `d` at the current state.
    pub fn conditionals(&self, priors: &PriorSet, d: usize, n: usize, mode: SamplerMode) -> Conditionals {
        let i = self.offsets[d] + n;
        let mut s = self.clone();
        s.update(d, i, false);
        let mut z = vec![0.0; self.num_topics];
        s.z_weights(priors, d, i, mode, &mut z);
        Conditionals {
            z,
            y: s.y_weights(priors, d, i, mode),
            v: s.v_weights(priors, d, i),
        }
    }

    /// One systematic scan over all tokens, resampling z, then y, then v
    /// (opinion tokens only).
    pub fn sweep(&mut self, priors: &PriorSet, mode: SamplerMode) {
        let mut buf = std::mem::take(&mut self.scratch);
        for d in 0..self.num_docs() {
            for i in self.offsets[d]..self.offsets[d + 1] {
                self.update(d, i, false);

                self.z_weights(priors, d, i, mode, &mut buf);
                self.z[i] = draw(&buf, &mut self.rng);

                let yw = self.y_weights(priors, d, i, mode);
                self.y[i] = if draw(&yw, &mut self.rng) == 0 {
                    WordClass::Aspect
                } else {
                    WordClass::Opinion
                };

                if self.y[i] == WordClass::Opinion {
                    let vw = self.v_weights(priors, d, i);
                    self.v[i] = Polarity::ALL[draw(&vw, &mut self.rng)];
                }

                self.update(d, i, true);
            }
        }
        self.scratch = buf;
    }
}

/// Index drawn proportionally to `weights`.
pub(crate) fn draw<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    assert!(
        total.is_finite() && weights.iter().all(|&w| w > 0.0),
        "degenerate conditional {weights:?}"
    );
    let mut u = rng.gen::<f64>() * total;
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            return k;
        }
        u -= w;
    }
    weights.len() - 1
}

//! Reference computations for the topic-model sampler, written directly
//! from the model definition and sharing no code with the library's
//! sampler.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seedtopic::config::SamplerMode;
use seedtopic::corpus::Polarity;
use seedtopic::separation::WordClass;
use seedtopic::tmodel::{PriorSet, SamplerState};

/// A tiny model instance with explicit priors and π.
#[derive(Debug, Clone)]
pub struct Instance {
    pub docs: Vec<Vec<usize>>,
    pub topics: usize,
    pub vocab: usize,
    pub alpha: Vec<Vec<f64>>,
    pub delta: Vec<[f64; 2]>,
    pub beta_a: Vec<Vec<f64>>,
    pub beta_p: Vec<f64>,
    pub beta_n: Vec<f64>,
    pub pi: Vec<Vec<[f64; 2]>>,
}

/// Per token: topic, opinion flag, polarity (0 = P, 1 = N).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub z: Vec<Vec<usize>>,
    pub o: Vec<Vec<bool>>,
    pub q: Vec<Vec<usize>>,
}

impl Instance {
    /// Random positive priors with `alpha_base` = `delta_base` = 1.
    pub fn random(docs: Vec<Vec<usize>>, topics: usize, vocab: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let simplex = |k: usize, rng: &mut ChaCha8Rng| {
            let x: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
            let s: f64 = x.iter().sum();
            x.into_iter().map(|v| v / s).collect::<Vec<f64>>()
        };
        let alpha = docs.iter().map(|_| simplex(topics, &mut rng)).collect();
        let delta = docs
            .iter()
            .map(|_| {
                let d = simplex(2, &mut rng);
                [d[0], d[1]]
            })
            .collect();
        let row = |rng: &mut ChaCha8Rng| (0..vocab).map(|_| rng.gen_range(0.05..0.8)).collect::<Vec<f64>>();
        let beta_a = (0..topics).map(|_| row(&mut rng)).collect();
        let beta_p = row(&mut rng);
        let beta_n = row(&mut rng);
        let pi = docs
            .iter()
            .map(|d| {
                d.iter()
                    .map(|_| {
                        let a = rng.gen_range(0.1..0.9);
                        [a, 1.0 - a]
                    })
                    .collect()
            })
            .collect();
        Instance {
            docs,
            topics,
            vocab,
            alpha,
            delta,
            beta_a,
            beta_p,
            beta_n,
            pi,
        }
    }

    pub fn priors(&self) -> PriorSet {
        PriorSet::from_parts(
            self.alpha.clone(),
            self.delta.clone(),
            self.beta_a.clone(),
            self.beta_p.clone(),
            self.beta_n.clone(),
            1.0,
            1.0,
        )
        .unwrap()
    }

    fn beta(&self, class: usize, t: usize, w: usize) -> f64 {
        match class {
            0 => self.beta_a[t][w],
            1 => self.beta_p[w],
            _ => self.beta_n[w],
        }
    }

    pub fn state(&self, a: &Assignment, seed: u64) -> SamplerState {
        SamplerState::from_assignments(
            self.docs.clone(),
            self.pi.clone(),
            a.z.concat(),
            a.o.concat()
                .into_iter()
                .map(|o| if o { WordClass::Opinion } else { WordClass::Aspect })
                .collect(),
            a.q.concat().into_iter().map(|q| Polarity::ALL[q]).collect(),
            self.topics,
            self.vocab,
            seed,
        )
        .unwrap()
    }

    pub fn num_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }
}

pub fn assignment_of(state: &SamplerState) -> Assignment {
    let docs = 0..state.num_docs();
    Assignment {
        z: docs.clone().map(|d| state.z(d).to_vec()).collect(),
        o: docs
            .clone()
            .map(|d| state.y(d).iter().map(|&y| y == WordClass::Opinion).collect())
            .collect(),
        q: docs.map(|d| state.v(d).iter().map(|q| q.index()).collect()).collect(),
    }
}

/// Word-class index of a token: 0 aspect, 1 positive, 2 negative.
fn class(o: bool, q: usize) -> usize {
    if o {
        1 + q
    } else {
        0
    }
}

struct Counts {
    word: Vec<Vec<Vec<f64>>>, // [class][t][w]
    total: Vec<Vec<f64>>,     // [class][t]
    doc_topic: Vec<Vec<f64>>,
    doc_pol: Vec<[f64; 2]>,
}

fn counts(inst: &Instance, a: &Assignment, skip: Option<(usize, usize)>) -> Counts {
    let mut c = Counts {
        word: vec![vec![vec![0.0; inst.vocab]; inst.topics]; 3],
        total: vec![vec![0.0; inst.topics]; 3],
        doc_topic: vec![vec![0.0; inst.topics]; inst.docs.len()],
        doc_pol: vec![[0.0; 2]; inst.docs.len()],
    };
    for (d, doc) in inst.docs.iter().enumerate() {
        for (n, &w) in doc.iter().enumerate() {
            if skip == Some((d, n)) {
                continue;
            }
            let k = class(a.o[d][n], a.q[d][n]);
            let t = a.z[d][n];
            c.word[k][t][w] += 1.0;
            c.total[k][t] += 1.0;
            c.doc_topic[d][t] += 1.0;
            if a.o[d][n] {
                c.doc_pol[d][a.q[d][n]] += 1.0;
            }
        }
    }
    c
}

fn word_ratio(inst: &Instance, c: &Counts, k: usize, t: usize, w: usize) -> f64 {
    let beta_sum: f64 = (0..inst.vocab).map(|v| inst.beta(k, t, v)).sum();
    (c.word[k][t][w] + inst.beta(k, t, w)) / (c.total[k][t] + beta_sum)
}

/// Unnormalized (z, y, v) conditionals of token (d, n) with its own counts
/// removed. `y` in derived mode sums the opinion branch over both
/// polarities weighted by the document's polarity predictive.
pub fn conditionals(
    inst: &Instance,
    a: &Assignment,
    d: usize,
    n: usize,
    mode: SamplerMode,
) -> (Vec<f64>, [f64; 2], [f64; 2]) {
    let c = counts(inst, a, Some((d, n)));
    let w = inst.docs[d][n];
    let own = class(a.o[d][n], a.q[d][n]);
    let z: Vec<f64> = (0..inst.topics)
        .map(|t| {
            let like = match mode {
                SamplerMode::AsWritten => {
                    word_ratio(inst, &c, 0, t, w) * word_ratio(inst, &c, 1, t, w) * word_ratio(inst, &c, 2, t, w)
                }
                SamplerMode::Derived => word_ratio(inst, &c, own, t, w),
            };
            like * (c.doc_topic[d][t] + inst.alpha[d][t])
        })
        .collect();
    let t = a.z[d][n];
    let [pa, po] = inst.pi[d][n];
    let pol_denom = c.doc_pol[d][0] + c.doc_pol[d][1] + inst.delta[d][0] + inst.delta[d][1];
    let opinion = match mode {
        SamplerMode::AsWritten => word_ratio(inst, &c, 1 + a.q[d][n], t, w),
        SamplerMode::Derived => (0..2)
            .map(|q| word_ratio(inst, &c, 1 + q, t, w) * (c.doc_pol[d][q] + inst.delta[d][q]) / pol_denom)
            .sum(),
    };
    let y = [word_ratio(inst, &c, 0, t, w) * pa, opinion * po];
    let v = [0, 1].map(|q| word_ratio(inst, &c, 1 + q, t, w) * (c.doc_pol[d][q] + inst.delta[d][q]));
    (z, y, v)
}

/// ln of a(a+1)...(a+n-1).
fn ln_rising(a: f64, n: f64) -> f64 {
    (0..n as usize).map(|i| (a + i as f64).ln()).sum()
}

/// Unnormalized log joint of the collapsed model (θ, Ω and all φ
/// integrated out), with the polarity of aspect tokens not part of the
/// state.
pub fn log_joint(inst: &Instance, a: &Assignment) -> f64 {
    let c = counts(inst, a, None);
    let mut lp = 0.0;
    for (d, doc) in inst.docs.iter().enumerate() {
        let asum: f64 = inst.alpha[d].iter().sum();
        lp -= ln_rising(asum, doc.len() as f64);
        for t in 0..inst.topics {
            lp += ln_rising(inst.alpha[d][t], c.doc_topic[d][t]);
        }
        let dsum = inst.delta[d][0] + inst.delta[d][1];
        lp -= ln_rising(dsum, c.doc_pol[d][0] + c.doc_pol[d][1]);
        for q in 0..2 {
            lp += ln_rising(inst.delta[d][q], c.doc_pol[d][q]);
        }
        for n in 0..doc.len() {
            lp += inst.pi[d][n][a.o[d][n] as usize].ln();
        }
    }
    for k in 0..3 {
        for t in 0..inst.topics {
            let bsum: f64 = (0..inst.vocab).map(|w| inst.beta(k, t, w)).sum();
            lp -= ln_rising(bsum, c.total[k][t]);
            for w in 0..inst.vocab {
                lp += ln_rising(inst.beta(k, t, w), c.word[k][t][w]);
            }
        }
    }
    lp
}

/// Per-token latent code: topic × {A, O+P, O+N}.
fn token_code(topics: usize, z: usize, o: bool, q: usize) -> usize {
    let _ = topics;
    z * 3 + if o { 1 + q } else { 0 }
}

fn state_code(inst: &Instance, a: &Assignment) -> usize {
    let mut code = 0;
    for d in 0..inst.docs.len() {
        for n in 0..inst.docs[d].len() {
            code = code * inst.topics * 3 + token_code(inst.topics, a.z[d][n], a.o[d][n], a.q[d][n]);
        }
    }
    code
}

/// Exact posterior over all joint (z, y, v) assignments, indexed like
/// `state_code`.
pub fn enumerate_posterior(inst: &Instance) -> Vec<f64> {
    let per = inst.topics * 3;
    let n = inst.num_tokens();
    let total = per.pow(n as u32);
    let mut logp = Vec::with_capacity(total);
    for code in 0..total {
        let mut digits = vec![0; n];
        let mut c = code;
        for i in (0..n).rev() {
            digits[i] = c % per;
            c /= per;
        }
        let mut a = Assignment {
            z: Vec::new(),
            o: Vec::new(),
            q: Vec::new(),
        };
        let mut i = 0;
        for doc in &inst.docs {
            let (mut z, mut o, mut q) = (Vec::new(), Vec::new(), Vec::new());
            for _ in doc {
                let dgt = digits[i];
                z.push(dgt / 3);
                o.push(dgt % 3 != 0);
                q.push(if dgt % 3 == 2 { 1 } else { 0 });
                i += 1;
            }
            a.z.push(z);
            a.o.push(o);
            a.q.push(q);
        }
        debug_assert_eq!(state_code(inst, &a), code);
        logp.push(log_joint(inst, &a));
    }
    let m = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logp.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// The 2-document, V=4, T=2 instance used for the exact-posterior check.
pub fn exact_instance() -> Instance {
    Instance::random(vec![vec![0, 1], vec![1, 3]], 2, 4, 2024)
}

/// Total-variation distance between the chain's empirical distribution
/// over joint assignments (one sample per sweep) and the enumerated
/// posterior.
pub fn exact_posterior_tv(mode: SamplerMode, samples: usize, seed: u64) -> f64 {
    let inst = exact_instance();
    let exact = enumerate_posterior(&inst);
    let priors = inst.priors();
    let init = Assignment {
        z: vec![vec![0, 0], vec![0, 0]],
        o: vec![vec![false, false], vec![false, false]],
        q: vec![vec![0, 0], vec![0, 0]],
    };
    let mut state = inst.state(&init, seed);
    for _ in 0..1000 {
        state.sweep(&priors, mode);
    }
    let mut hist = vec![0usize; exact.len()];
    for _ in 0..samples {
        state.sweep(&priors, mode);
        hist[state_code(&inst, &assignment_of(&state))] += 1;
    }
    0.5 * hist
        .iter()
        .zip(&exact)
        .map(|(&h, &p)| (h as f64 / samples as f64 - p).abs())
        .sum::<f64>()
}

/// Three-sentence fixture for the conditional check.
pub fn conditional_instance() -> Instance {
    Instance::random(vec![vec![0, 1, 2, 0], vec![3, 1], vec![4, 2, 3, 3, 1]], 3, 5, 77)
}

/// Largest relative gap between the sampler's conditionals and the
/// reference ones, over every token of several states reached by sweeping.
pub fn max_conditional_error(mode: SamplerMode) -> f64 {
    let inst = conditional_instance();
    let priors = inst.priors();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let init = Assignment {
        z: inst.docs.iter().map(|d| d.iter().map(|_| rng.gen_range(0..inst.topics)).collect()).collect(),
        o: inst.docs.iter().map(|d| d.iter().map(|_| rng.gen()).collect()).collect(),
        q: inst.docs.iter().map(|d| d.iter().map(|_| rng.gen_range(0..2)).collect()).collect(),
    };
    let mut state = inst.state(&init, 9);
    let mut worst: f64 = 0.0;
    let gap = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    for round in 0..6 {
        if round > 0 {
            state.sweep(&priors, mode);
        }
        let a = assignment_of(&state);
        for d in 0..inst.docs.len() {
            for n in 0..inst.docs[d].len() {
                let got = state.conditionals(&priors, d, n, mode);
                let (z, y, v) = conditionals(&inst, &a, d, n, mode);
                for (g, e) in got.z.iter().zip(&z) {
                    worst = worst.max(gap(*g, *e));
                }
                for k in 0..2 {
                    worst = worst.max(gap(got.y[k], y[k]));
                    worst = worst.max(gap(got.v[k], v[k]));
                }
            }
        }
    }
    worst
}

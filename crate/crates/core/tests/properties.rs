use proptest::prelude::*;
use seedtopic::config::{RunParameters, SamplerMode};
use seedtopic::corpus::Polarity;
use seedtopic::embeddings::SimilarityCache;
use seedtopic::eval::{kfold, score, ConfusionMatrix};
use seedtopic::separation::{SeparationModel, WordClass};
use seedtopic::tmodel::{
    argmax_flagged, document_priors, fold_in, run_gibbs, FoldIn, ModelDump, PriorSet, SamplerState, WordKind,
};

const TOL: f64 = 1e-9;

fn cache_strategy(t: usize, v: usize) -> impl Strategy<Value = SimilarityCache> {
    prop::collection::vec(prop::collection::vec(0.01f64..1.0, t + 2), v)
        .prop_map(move |rows| SimilarityCache::from_rows(t, rows))
}

/// Documents, topics, vocab size, and an arbitrary starting assignment.
#[derive(Debug, Clone)]
struct Small {
    docs: Vec<Vec<usize>>,
    t: usize,
    v: usize,
    z: Vec<usize>,
    y: Vec<bool>,
    q: Vec<bool>,
    pi: Vec<f64>,
    cache: Vec<Vec<f64>>,
    seed: u64,
}

fn small_strategy() -> impl Strategy<Value = Small> {
    (2usize..4, 3usize..7, 1usize..5).prop_flat_map(|(t, v, d)| {
        prop::collection::vec(prop::collection::vec(0..v, 1..6), d).prop_flat_map(move |docs| {
            let n: usize = docs.iter().map(Vec::len).sum();
            (
                Just(docs),
                prop::collection::vec(0..t, n),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(0.05f64..0.95, n),
                prop::collection::vec(prop::collection::vec(0.01f64..1.0, t + 2), v),
                any::<u64>(),
            )
                .prop_map(move |(docs, z, y, q, pi, cache, seed)| Small {
                    docs,
                    t,
                    v,
                    z,
                    y,
                    q,
                    pi,
                    cache,
                    seed,
                })
        })
    })
}

impl Small {
    fn params(&self) -> RunParameters {
        let mut p = RunParameters::defaults(self.t);
        p.iterations = 6;
        p.burn_in = 2;
        p.lag = 2;
        p.foldin_iterations = 6;
        p.foldin_burn_in = 2;
        p.foldin_lag = 2;
        p.rng_seed = self.seed;
        p
    }

    fn cache(&self) -> SimilarityCache {
        SimilarityCache::from_rows(self.t, self.cache.clone())
    }

    fn priors(&self) -> PriorSet {
        let p = self.params();
        let cache = self.cache();
        let (alpha, delta): (Vec<_>, Vec<_>) = self.docs.iter().map(|d| document_priors(d, &cache, &p)).unzip();
        let beta_a = (0..self.t)
            .map(|t| (0..self.v).map(|w| cache.aspect(w, t) * p.beta_base).collect())
            .collect();
        let bq = |q| (0..self.v).map(|w| cache.polarity(w, q) * p.beta_base).collect();
        PriorSet::from_parts(
            alpha,
            delta,
            beta_a,
            bq(Polarity::Positive),
            bq(Polarity::Negative),
            p.alpha_base,
            p.delta_base,
        )
        .unwrap()
    }

    fn pi(&self) -> Vec<Vec<[f64; 2]>> {
        let mut it = self.pi.iter();
        self.docs
            .iter()
            .map(|d| {
                d.iter()
                    .map(|_| {
                        let a = *it.next().unwrap();
                        [a, 1.0 - a]
                    })
                    .collect()
            })
            .collect()
    }

    fn state(&self) -> SamplerState {
        SamplerState::from_assignments(
            self.docs.clone(),
            self.pi(),
            self.z.clone(),
            self.y
                .iter()
                .map(|&o| if o { WordClass::Opinion } else { WordClass::Aspect })
                .collect(),
            self.q
                .iter()
                .map(|&n| if n { Polarity::Negative } else { Polarity::Positive })
                .collect(),
            self.t,
            self.v,
            self.seed,
        )
        .unwrap()
    }
}

fn mode_strategy() -> impl Strategy<Value = SamplerMode> {
    prop_oneof![Just(SamplerMode::AsWritten), Just(SamplerMode::Derived)]
}

fn assert_rows_sum(rows: impl IntoIterator<Item = f64>, what: &str) -> Result<(), TestCaseError> {
    for s in rows {
        prop_assert!((s - 1.0).abs() <= TOL, "{} row sums to {}", what, s);
    }
    Ok(())
}

proptest! {
    #[test]
    fn document_priors_sum_to_their_bases(
        cache in cache_strategy(3, 8),
        tokens in prop::collection::vec(0usize..8, 0..12),
        alpha_base in 0.1f64..50.0,
        delta_base in 0.1f64..50.0,
    ) {
        let mut p = RunParameters::defaults(3);
        p.alpha_base = alpha_base;
        p.delta_base = delta_base;
        let (alpha, delta) = document_priors(&tokens, &cache, &p);
        prop_assert!((alpha.iter().sum::<f64>() - alpha_base).abs() <= TOL * alpha_base);
        prop_assert!((delta[0] + delta[1] - delta_base).abs() <= TOL * delta_base);
        prop_assert!(alpha.iter().chain(&delta).all(|&x| x > 0.0));
    }

    #[test]
    fn counts_stay_consistent_across_sweeps(s in small_strategy(), mode in mode_strategy()) {
        let priors = s.priors();
        let mut state = s.state();
        let n = state.num_tokens() as u32;
        for _ in 0..4 {
            state.sweep(&priors, mode);
            prop_assert!(state.check_counts().is_ok());
            let total: u32 = WordKind::ALL
                .iter()
                .flat_map(|&k| (0..s.t).map(move |t| (k, t)))
                .map(|(k, t)| state.topic_total(k, t))
                .sum();
            prop_assert_eq!(total, n);
            let opinions: u32 = (0..state.num_docs()).map(|d| state.opinion_count(d)).sum();
            let marked = (0..state.num_docs())
                .flat_map(|d| state.y(d).to_vec())
                .filter(|&c| c == WordClass::Opinion)
                .count() as u32;
            prop_assert_eq!(opinions, marked);
        }
    }

    #[test]
    fn conditionals_are_positive_and_finite(s in small_strategy(), mode in mode_strategy()) {
        let priors = s.priors();
        let state = s.state();
        for d in 0..state.num_docs() {
            for n in 0..state.doc_len(d) {
                let c = state.conditionals(&priors, d, n, mode);
                prop_assert_eq!(c.z.len(), s.t);
                prop_assert!(c.z.iter().chain(&c.y).chain(&c.v).all(|x| x.is_finite() && *x > 0.0));
            }
        }
    }

    #[test]
    fn posterior_rows_are_distributions(s in small_strategy(), mode in mode_strategy()) {
        let priors = s.priors();
        let mut state = s.state();
        let mut p = s.params();
        p.mode = mode;
        let summary = run_gibbs(&mut state, &priors, &p, |_, _| {});
        prop_assert_eq!(summary.samples, 2);
        assert_rows_sum(summary.theta.iter().map(|r| r.iter().sum()), "theta")?;
        assert_rows_sum(summary.omega.iter().map(|r| r[0] + r[1]), "omega")?;
        for k in WordKind::ALL {
            assert_rows_sum((0..s.t).map(|t| summary.phi_row(k, t).iter().sum()), k.as_str())?;
        }
    }

    #[test]
    fn fold_in_is_deterministic_and_normalized(s in small_strategy()) {
        let priors = s.priors();
        let mut state = s.state();
        let p = s.params();
        let summary = run_gibbs(&mut state, &priors, &p, |_, _| {});
        let tokens = &s.docs[0];
        let pi = &s.pi()[0];
        let (alpha, delta) = document_priors(tokens, &s.cache(), &p);
        let a = fold_in(&summary, tokens, pi, &alpha, delta, &p);
        prop_assert_eq!(&a, &fold_in(&summary, tokens, pi, &alpha, delta, &p));
        match a {
            FoldIn::Estimate(e) => {
                assert_rows_sum([e.theta.iter().sum(), e.omega[0] + e.omega[1]], "fold-in")?;
            }
            FoldIn::Unclassifiable => prop_assert!(false, "in-vocabulary sentence was unclassifiable"),
        }
        let oov = vec![s.v + 1; 3];
        prop_assert_eq!(
            fold_in(&summary, &oov, &[[0.5, 0.5]; 3], &alpha, delta, &p),
            FoldIn::Unclassifiable
        );
    }

    #[test]
    fn separation_probabilities_sum_to_one(
        bias in prop::array::uniform2(-20.0f64..20.0),
        wa in prop::collection::vec(-20.0f64..20.0, 4),
        wo in prop::collection::vec(-20.0f64..20.0, 4),
        active in prop::collection::vec(0usize..6, 0..5),
    ) {
        let names: Vec<String> = (0..4).map(|i| format!("f{i}")).collect();
        let model = SeparationModel::new(names, bias, [wa, wo]).unwrap();
        // f4 and f5 are unknown features and must be ignored
        let feats: Vec<String> = active.iter().map(|i| format!("f{i}")).collect();
        let (a, o) = model.predict(&feats);
        prop_assert!(a >= 0.0 && o >= 0.0);
        prop_assert!((a + o - 1.0).abs() <= TOL);
    }

    #[test]
    fn argmax_picks_a_maximum(xs in prop::collection::vec(-5i32..5, 1..8)) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let (i, tie) = argmax_flagged(&xs);
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(xs[i], max);
        prop_assert_eq!(i, xs.iter().position(|&x| x == max).unwrap());
        prop_assert_eq!(tie, xs.iter().filter(|&&x| x == max).count() > 1);
    }

    #[test]
    fn scores_ignore_instance_order(
        pairs in prop::collection::vec((0usize..3, 0usize..3), 1..40),
        perm_seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let preds: Vec<&str> = pairs.iter().map(|p| labels[p.0].as_str()).collect();
        let golds: Vec<&str> = pairs.iter().map(|p| labels[p.1].as_str()).collect();
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
        let p2: Vec<&str> = order.iter().map(|&i| preds[i]).collect();
        let g2: Vec<&str> = order.iter().map(|&i| golds[i]).collect();
        prop_assert_eq!(score(&preds, &golds, &labels).unwrap(), score(&p2, &g2, &labels).unwrap());
    }

    #[test]
    fn confusion_marginals_agree(pairs in prop::collection::vec((0usize..4, 0usize..4), 0..50)) {
        let labels: Vec<String> = (0..4).map(|i| format!("l{i}")).collect();
        let mut cm = ConfusionMatrix::new(labels.clone());
        for (g, p) in &pairs {
            cm.add(&labels[*g], &labels[*p]).unwrap();
        }
        prop_assert_eq!(cm.total(), pairs.len());
        prop_assert_eq!(cm.row_sums().iter().sum::<usize>(), pairs.len());
        prop_assert_eq!(cm.col_sums().iter().sum::<usize>(), pairs.len());
        prop_assert_eq!(cm.trace(), pairs.iter().filter(|(g, p)| g == p).count());
    }

    #[test]
    fn kfold_partitions_every_index(n in 2usize..200, k in 2usize..12, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = kfold(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn model_dump_round_trips(s in small_strategy()) {
        let priors = s.priors();
        let mut state = s.state();
        let summary = run_gibbs(&mut state, &priors, &s.params(), |_, _| {});
        let dump = ModelDump::new(
            "abc123".into(),
            SamplerMode::Derived,
            (0..s.t).map(|t| format!("aspect{t}")).collect(),
            (0..s.v).map(|w| format!("w{w}")).collect(),
            priors,
            &state,
            summary,
        );
        let mut buf = Vec::new();
        dump.write_text(&mut buf).unwrap();
        let back = ModelDump::read_text(buf.as_slice(), "mem").unwrap();
        prop_assert_eq!(back, dump);
    }
}

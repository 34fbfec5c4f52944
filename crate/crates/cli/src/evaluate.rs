//! The evaluation report: model accuracy against gold labels next to the
//! majority and Naive Bayes baselines, over the whole gold set and over
//! balanced subsets.

use serde::Serialize;

use seedtopic::corpus::Polarity;
use seedtopic::eval::{
    balanced_subsets, cross_validate_accuracy, majority_baseline, naive_bayes_baseline, score, EvalReport,
    SeparationScore,
};
use seedtopic::text::tokenize;
use seedtopic::tmodel::Classification;

use crate::error::Result;

pub const CV_FOLDS: usize = 10;

#[derive(Debug, Clone)]
pub struct GoldSentence {
    pub text: String,
    pub aspect: Option<String>,
    pub polarity: Option<Polarity>,
    /// `None` when the sentence has no in-vocabulary token.
    pub prediction: Option<Classification>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetReport {
    pub size: usize,
    pub model_accuracy: f64,
    pub majority_accuracy: f64,
    pub naive_bayes_cv_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub labels: Vec<String>,
    pub evaluated: usize,
    pub model: EvalReport,
    /// Most frequent gold label of the evaluated set, predicted for all.
    pub majority: EvalReport,
    pub naive_bayes_cv_accuracy: Option<f64>,
    pub subsets: Vec<SubsetReport>,
    pub subset_model_accuracy: Option<MeanStd>,
    pub subset_majority_accuracy: Option<MeanStd>,
    pub subset_naive_bayes_accuracy: Option<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalOutput {
    pub gold_sentences: usize,
    pub unclassifiable: usize,
    /// Gold aspect labels that are not configured aspects.
    pub out_of_scope_aspect: usize,
    pub aspect: Option<TaskReport>,
    pub polarity: Option<TaskReport>,
    pub separation: Option<SeparationScore>,
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> Option<MeanStd> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some(MeanStd { mean, std: var.sqrt() })
}

fn nb_cv(tokens: &[Vec<String>], golds: &[String], seed: u64) -> Result<Option<f64>> {
    if golds.len() < CV_FOLDS {
        return Ok(None);
    }
    Ok(Some(cross_validate_accuracy(golds, CV_FOLDS, seed, |train, test| {
        let tr_docs: Vec<Vec<String>> = train.iter().map(|&i| tokens[i].clone()).collect();
        let tr_labels: Vec<String> = train.iter().map(|&i| golds[i].clone()).collect();
        let te_docs: Vec<Vec<String>> = test.iter().map(|&i| tokens[i].clone()).collect();
        naive_bayes_baseline(&tr_docs, &tr_labels, &te_docs)
    })?))
}

fn accuracy(preds: &[String], golds: &[String]) -> f64 {
    let hit = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    hit as f64 / golds.len().max(1) as f64
}

fn task(
    labels: Vec<String>,
    golds: Vec<String>,
    preds: Vec<String>,
    tokens: Vec<Vec<String>>,
    per_class: Option<usize>,
    num_subsets: usize,
    seed: u64,
) -> Result<TaskReport> {
    let model = score(&preds, &golds, &labels)?;
    let majority = score(&majority_baseline(&golds, golds.len())?, &golds, &labels)?;
    let naive_bayes_cv_accuracy = nb_cv(&tokens, &golds, seed)?;
    let mut subsets = Vec::new();
    if let Some(n) = per_class {
        for idx in balanced_subsets(&golds, &labels, n, num_subsets, seed)? {
            let g: Vec<String> = idx.iter().map(|&i| golds[i].clone()).collect();
            let p: Vec<String> = idx.iter().map(|&i| preds[i].clone()).collect();
            let t: Vec<Vec<String>> = idx.iter().map(|&i| tokens[i].clone()).collect();
            subsets.push(SubsetReport {
                size: idx.len(),
                model_accuracy: accuracy(&p, &g),
                majority_accuracy: accuracy(&majority_baseline(&g, g.len())?, &g),
                naive_bayes_cv_accuracy: nb_cv(&t, &g, seed)?,
            });
        }
    }
    let col = |f: fn(&SubsetReport) -> Option<f64>| -> Option<MeanStd> {
        let xs: Option<Vec<f64>> = subsets.iter().map(f).collect();
        xs.and_then(|xs| mean_std(&xs))
    };
    Ok(TaskReport {
        evaluated: golds.len(),
        subset_model_accuracy: col(|s| Some(s.model_accuracy)),
        subset_majority_accuracy: col(|s| Some(s.majority_accuracy)),
        subset_naive_bayes_accuracy: col(|s| s.naive_bayes_cv_accuracy),
        labels,
        model,
        majority,
        naive_bayes_cv_accuracy,
        subsets,
    })
}

/// Scores classifiable gold sentences. Aspect scoring only uses sentences
/// whose gold aspect is one of `aspects`.
pub fn evaluate(
    gold: &[GoldSentence],
    aspects: &[String],
    per_class: Option<usize>,
    num_subsets: usize,
    seed: u64,
    separation: Option<SeparationScore>,
) -> Result<EvalOutput> {
    let unclassifiable = gold.iter().filter(|g| g.prediction.is_none()).count();
    let out_of_scope_aspect = gold
        .iter()
        .filter(|g| g.aspect.as_ref().is_some_and(|a| !aspects.contains(a)))
        .count();

    let (mut ag, mut ap, mut at) = (Vec::new(), Vec::new(), Vec::new());
    let (mut pg, mut pp, mut pt) = (Vec::new(), Vec::new(), Vec::new());
    for g in gold {
        let Some(c) = &g.prediction else { continue };
        if let Some(a) = g.aspect.as_ref().filter(|a| aspects.contains(a)) {
            ag.push(a.clone());
            ap.push(aspects[c.aspect].clone());
            at.push(tokenize(&g.text));
        }
        if let Some(q) = g.polarity {
            pg.push(q.as_str().to_string());
            pp.push(c.polarity.as_str().to_string());
            pt.push(tokenize(&g.text));
        }
    }
    let aspect = if ag.is_empty() {
        None
    } else {
        Some(task(aspects.to_vec(), ag, ap, at, per_class, num_subsets, seed)?)
    };
    let polarity = if pg.is_empty() {
        None
    } else {
        let labels = Polarity::ALL.iter().map(|q| q.as_str().to_string()).collect();
        Some(task(labels, pg, pp, pt, per_class, num_subsets, seed)?)
    };
    Ok(EvalOutput {
        gold_sentences: gold.len(),
        unclassifiable,
        out_of_scope_aspect,
        aspect,
        polarity,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(text: &str, aspect: &str, q: Polarity, pred: Option<(usize, Polarity)>) -> GoldSentence {
        GoldSentence {
            text: text.into(),
            aspect: Some(aspect.into()),
            polarity: Some(q),
            prediction: pred.map(|(aspect, polarity)| Classification {
                aspect,
                aspect_tie: false,
                polarity,
                polarity_tie: false,
            }),
        }
    }

    #[test]
    fn unclassifiable_and_out_of_scope_are_counted_not_scored() {
        let aspects = vec!["food".to_string(), "service".to_string()];
        let gold = vec![
            sentence("good pasta", "food", Polarity::Positive, Some((0, Polarity::Positive))),
            sentence("rude waiter", "service", Polarity::Negative, Some((0, Polarity::Negative))),
            sentence("zzz", "food", Polarity::Positive, None),
            sentence("nice view", "location", Polarity::Positive, Some((1, Polarity::Negative))),
        ];
        let r = evaluate(&gold, &aspects, None, 5, 1, None).unwrap();
        assert_eq!(r.unclassifiable, 1);
        assert_eq!(r.out_of_scope_aspect, 1);
        let a = r.aspect.unwrap();
        assert_eq!(a.evaluated, 2);
        assert_eq!(a.model.accuracy, 0.5);
        let p = r.polarity.unwrap();
        assert_eq!(p.evaluated, 3);
        assert!((p.model.accuracy - 2.0 / 3.0).abs() < 1e-15);
        assert!(a.naive_bayes_cv_accuracy.is_none());
    }

    #[test]
    fn mean_std_uses_sample_deviation() {
        let m = mean_std(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.std, 1.0);
        assert!(mean_std(&[]).is_none());
    }
}

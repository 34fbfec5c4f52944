mod oracles;

use oracles::brown::{corpus, greedy_vs_exhaustive, random_corpus, BigramTable};
use seedtopic::brown::brown_cluster_traced;

#[test]
fn four_pattern_corpus_merges_x_and_y_first() {
    let c = corpus(&["a x b".into(), "a y b".into(), "c x d".into(), "c y d".into()]);
    let out = brown_cluster_traced(&c, 4, true).unwrap();
    let first = &out.trace[0];
    let members: Vec<&str> = first.clusters[first.merged.0]
        .iter()
        .chain(&first.clusters[first.merged.1])
        .map(|&t| c.vocab.term(t))
        .collect();
    let mut members = members;
    members.sort();
    assert_eq!(members, vec!["x", "y"]);
    // unique minimum
    let table = BigramTable::new(&c);
    let active: Vec<Vec<usize>> = first.clusters.iter().filter(|c| !c.is_empty()).cloned().collect();
    let mut losses = Vec::new();
    for i in 0..active.len() {
        for j in i + 1..active.len() {
            losses.push(table.merge_loss(&active, i, j));
        }
    }
    losses.sort_by(f64::total_cmp);
    assert!(losses[0].abs() < 1e-12 && losses[1] > 1e-6, "{losses:?}");
}

#[test]
fn greedy_matches_exhaustive_search_small_vocabularies() {
    let (checked, failures) = greedy_vs_exhaustive(0..12);
    assert!(checked > 100);
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn assignment_partitions_vocabulary() {
    let c = random_corpus(99, 12);
    for k in 1..=14 {
        let a = brown_cluster_traced(&c, k, false).unwrap().assignment;
        assert_eq!(a.num_clusters(), k.min(c.vocab.len()));
        assert_eq!(a.num_terms(), c.vocab.len());
        let mut used = vec![false; a.num_clusters()];
        for t in 0..c.vocab.len() {
            used[a.cluster_of(t)] = true;
        }
        assert!(used.iter().all(|&u| u), "empty cluster for k={k}");
        // deterministic
        assert_eq!(brown_cluster_traced(&c, k, false).unwrap().assignment, a);
    }
}

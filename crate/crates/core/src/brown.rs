//! Brown clustering (class-based bigram agglomeration) with a bounded
//! active set.
//!
//! The `K` most frequent terms start as singleton clusters. Each remaining
//! term, in frequency order, is added as a new cluster and then the pair of
//! active clusters whose merge loses the least average mutual information
//! (AMI) is merged. Once every term is placed, the `K` clusters are merged
//! down to one to build the binary hierarchy that names each cluster.
//!
//! The corpus is read as one token stream (sentences concatenated in order),
//! as common Brown-cluster tools do. AMI is taken over stream bigrams whose
//! both words are in active clusters, with left/right marginals from the
//! whole stream. Pair losses are kept in a
//! table and updated incrementally after every insertion and merge.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    cluster_of: Vec<usize>,
    paths: Vec<String>,
}

impl ClusterAssignment {
    pub fn new(cluster_of: Vec<usize>, paths: Vec<String>) -> Result<Self> {
        if cluster_of.iter().any(|&c| c >= paths.len()) {
            return Err(Error::invalid("cluster id out of range"));
        }
        Ok(ClusterAssignment { cluster_of, paths })
    }

    pub fn num_clusters(&self) -> usize {
        self.paths.len()
    }

    pub fn num_terms(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn cluster_of(&self, term: usize) -> usize {
        self.cluster_of[term]
    }

    /// Merge-path bit string of the term's cluster.
    pub fn path_of(&self, term: usize) -> &str {
        &self.paths[self.cluster_of[term]]
    }

    pub fn paths(&self) -> &[String] {
        &self.paths
    }

    /// Lines of `path<TAB>term<TAB>frequency`, grouped by cluster.
    pub fn write_text<W: Write>(&self, vocab: &Vocabulary, mut w: W) -> Result<()> {
        let mut order: Vec<usize> = (0..self.cluster_of.len()).collect();
        order.sort_by_key(|&t| (self.cluster_of[t], t));
        for t in order {
            writeln!(w, "{}\t{}\t{}", self.path_of(t), vocab.term(t), vocab.freq(t))?;
        }
        Ok(())
    }

    /// Reads a cluster file against `vocab`. Terms outside the vocabulary
    /// are ignored; every vocabulary term must be present.
    pub fn read_text<R: BufRead>(r: R, vocab: &Vocabulary, path: &str) -> Result<Self> {
        let mut cluster_of = vec![usize::MAX; vocab.len()];
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut paths = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() < 2 {
                return Err(Error::format(path, i + 1, "expected path<TAB>term<TAB>frequency"));
            }
            let Some(t) = vocab.id(f[1]) else { continue };
            let next = paths.len();
            let id = *ids.entry(f[0].to_string()).or_insert(next);
            if id == next {
                paths.push(f[0].to_string());
            }
            if cluster_of[t] != usize::MAX && cluster_of[t] != id {
                return Err(Error::format(path, i + 1, format!("term '{}' in two clusters", f[1])));
            }
            cluster_of[t] = id;
        }
        if let Some(t) = cluster_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::format(
                path,
                0,
                format!("term '{}' has no cluster", vocab.term(t)),
            ));
        }
        Self::new(cluster_of, paths)
    }
}

/// One greedy merge, as seen by the algorithm: the member terms of every
/// active cluster (in slot order, empty for free slots), the slots merged,
/// and the AMI loss of that merge.
#[derive(Debug, Clone)]
pub struct MergeStep {
    pub clusters: Vec<Vec<usize>>,
    pub merged: (usize, usize),
    pub loss: f64,
}

/// Clustering result plus the optional merge trace.
#[derive(Debug, Clone)]
pub struct BrownOutput {
    pub assignment: ClusterAssignment,
    pub trace: Vec<MergeStep>,
}

const TIE_EPS: f64 = 1e-12;

/// `p·ln(p / (pl·pr))` from raw counts over `total` bigrams.
#[inline]
fn q(n: f64, left: f64, right: f64, total: f64) -> f64 {
    if n <= 0.0 {
        0.0
    } else {
        n / total * (n * total / (left * right)).ln()
    }
}

struct Clusterer {
    total: f64,
    left: Vec<f64>,
    right: Vec<f64>,
    // word-level adjacency: (neighbor, count)
    right_nb: Vec<Vec<(usize, f64)>>,
    left_nb: Vec<Vec<(usize, f64)>>,
    slot_of: Vec<Option<usize>>,

    // per slot
    active: Vec<bool>,
    members: Vec<Vec<usize>>,
    node: Vec<usize>,
    cl: Vec<f64>,
    cr: Vec<f64>,
    n: Vec<Vec<f64>>,
    // loss[i][j] for i < j
    loss: Vec<Vec<f64>>,
}

impl Clusterer {
    fn new(corpus: &Corpus, slots: usize) -> Self {
        let v = corpus.vocab.len();
        let mut pairs: HashMap<(usize, usize), f64> = HashMap::new();
        let mut left = vec![0.0; v];
        let mut right = vec![0.0; v];
        let mut total = 0.0;
        let stream: Vec<usize> = corpus
            .sentences
            .iter()
            .flat_map(|s| s.tokens.iter().copied())
            .collect();
        for w in stream.windows(2) {
            *pairs.entry((w[0], w[1])).or_default() += 1.0;
            left[w[0]] += 1.0;
            right[w[1]] += 1.0;
            total += 1.0;
        }
        let mut right_nb = vec![Vec::new(); v];
        let mut left_nb = vec![Vec::new(); v];
        let mut sorted: Vec<_> = pairs.into_iter().collect();
        sorted.sort_by_key(|&((a, b), _)| (a, b));
        for ((a, b), c) in sorted {
            right_nb[a].push((b, c));
            left_nb[b].push((a, c));
        }
        Clusterer {
            total,
            left,
            right,
            right_nb,
            left_nb,
            slot_of: vec![None; v],
            active: vec![false; slots],
            members: vec![Vec::new(); slots],
            node: vec![0; slots],
            cl: vec![0.0; slots],
            cr: vec![0.0; slots],
            n: vec![vec![0.0; slots]; slots],
            loss: vec![vec![0.0; slots]; slots],
        }
    }

    fn active_slots(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&s| self.active[s]).collect()
    }

    /// AMI contribution of the (unordered) slot pair.
    fn w(&self, x: usize, y: usize) -> f64 {
        if x == y {
            q(self.n[x][x], self.cl[x], self.cr[x], self.total)
        } else {
            q(self.n[x][y], self.cl[x], self.cr[y], self.total)
                + q(self.n[y][x], self.cl[y], self.cr[x], self.total)
        }
    }

    /// AMI contribution between the hypothetical union `c ∪ d` and slot `x`.
    fn w_union(&self, c: usize, d: usize, x: usize) -> f64 {
        let l = self.cl[c] + self.cl[d];
        let r = self.cr[c] + self.cr[d];
        q(self.n[c][x] + self.n[d][x], l, self.cr[x], self.total)
            + q(self.n[x][c] + self.n[x][d], self.cl[x], r, self.total)
    }

    /// Change in the loss of merging `c` and `d` that comes from slot `x`.
    fn delta(&self, c: usize, d: usize, x: usize) -> f64 {
        self.w(c, x) + self.w(d, x) - self.w_union(c, d, x)
    }

    fn full_loss(&self, c: usize, d: usize, slots: &[usize]) -> f64 {
        let mut l = 0.0;
        for &x in slots {
            if x != c && x != d {
                l += self.delta(c, d, x);
            }
        }
        let nm = self.n[c][c] + self.n[c][d] + self.n[d][c] + self.n[d][d];
        let wm = q(
            nm,
            self.cl[c] + self.cl[d],
            self.cr[c] + self.cr[d],
            self.total,
        );
        l + self.w(c, c) + self.w(d, d) + self.w(c, d) - wm
    }

    /// Adds `sign · delta(c, d, x)` to every pair not involving `skip`.
    fn shift_losses(&mut self, x: usize, skip: &[usize], sign: f64) {
        let slots: Vec<usize> = self
            .active_slots()
            .into_iter()
            .filter(|s| !skip.contains(s))
            .collect();
        let updates: Vec<(usize, Vec<(usize, f64)>)> = slots
            .par_iter()
            .enumerate()
            .map(|(i, &c)| {
                let row = slots[i + 1..]
                    .iter()
                    .map(|&d| (d, sign * self.delta(c, d, x)))
                    .collect();
                (c, row)
            })
            .collect();
        for (c, row) in updates {
            for (d, v) in row {
                self.loss[c][d] += v;
            }
        }
    }

    fn recompute_row(&mut self, c: usize) {
        let slots = self.active_slots();
        let vals: Vec<(usize, f64)> = slots
            .par_iter()
            .filter(|&&d| d != c)
            .map(|&d| (d, self.full_loss(c.min(d), c.max(d), &slots)))
            .collect();
        for (d, v) in vals {
            self.loss[c.min(d)][c.max(d)] = v;
        }
    }

    fn insert(&mut self, word: usize, node: usize) {
        let s = self.active.iter().position(|a| !a).expect("free slot");
        for x in 0..self.n.len() {
            self.n[s][x] = 0.0;
            self.n[x][s] = 0.0;
        }
        for &(w2, c) in &self.right_nb[word] {
            if w2 == word {
                self.n[s][s] += c;
            } else if let Some(x) = self.slot_of[w2] {
                self.n[s][x] += c;
            }
        }
        for &(w1, c) in &self.left_nb[word] {
            if w1 != word {
                if let Some(x) = self.slot_of[w1] {
                    self.n[x][s] += c;
                }
            }
        }
        self.cl[s] = self.left[word];
        self.cr[s] = self.right[word];
        self.members[s] = vec![word];
        self.node[s] = node;
        self.slot_of[word] = Some(s);
        // existing pairs see one more cluster
        self.shift_losses(s, &[s], 1.0);
        self.active[s] = true;
        self.recompute_row(s);
    }

    fn best_pair(&self) -> (usize, usize, f64) {
        let slots = self.active_slots();
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for (i, &c) in slots.iter().enumerate() {
            for &d in &slots[i + 1..] {
                // losses equal up to rounding count as ties, resolved by slot order
                if self.loss[c][d] < best.2 - TIE_EPS {
                    best = (c, d, self.loss[c][d]);
                }
            }
        }
        best
    }

    /// Merges slot `b` into slot `a`.
    fn merge(&mut self, a: usize, b: usize, node: usize) {
        self.shift_losses(a, &[a, b], -1.0);
        self.shift_losses(b, &[a, b], -1.0);
        let slots = self.n.len();
        for x in 0..slots {
            if x != a && x != b {
                self.n[a][x] += self.n[b][x];
                self.n[x][a] += self.n[x][b];
            }
        }
        self.n[a][a] += self.n[a][b] + self.n[b][a] + self.n[b][b];
        for x in 0..slots {
            self.n[b][x] = 0.0;
            self.n[x][b] = 0.0;
        }
        self.n[a][b] = 0.0;
        self.n[b][a] = 0.0;
        self.cl[a] += self.cl[b];
        self.cr[a] += self.cr[b];
        let moved = std::mem::take(&mut self.members[b]);
        for &w in &moved {
            self.slot_of[w] = Some(a);
        }
        self.members[a].extend(moved);
        self.node[a] = node;
        self.active[b] = false;
        self.shift_losses(a, &[a], 1.0);
        self.recompute_row(a);
    }

    fn snapshot(&self) -> Vec<Vec<usize>> {
        (0..self.active.len())
            .map(|s| {
                if self.active[s] {
                    let mut m = self.members[s].clone();
                    m.sort_unstable();
                    m
                } else {
                    Vec::new()
                }
            })
            .collect()
    }
}

/// Clusters the corpus vocabulary into at most `k` clusters.
pub fn brown_cluster(corpus: &Corpus, k: usize) -> Result<ClusterAssignment> {
    Ok(brown_cluster_traced(corpus, k, false)?.assignment)
}

/// As [`brown_cluster`], optionally recording every merge decision.
pub fn brown_cluster_traced(corpus: &Corpus, k: usize, trace: bool) -> Result<BrownOutput> {
    if k < 1 {
        return Err(Error::invalid("number of Brown clusters must be at least 1"));
    }
    let v = corpus.vocab.len();
    if v == 0 {
        return Err(Error::EmptyCorpus);
    }
    let counts = corpus.term_counts();
    let mut order: Vec<usize> = (0..v).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));

    let k = k.min(v);
    let mut cl = Clusterer::new(corpus, k + 1);
    let mut steps = Vec::new();

    // phase 1: the cluster assignment
    for &w in &order[..k] {
        cl.insert(w, 0);
    }
    for &w in &order[k..] {
        cl.insert(w, 0);
        let (a, b, loss) = cl.best_pair();
        if trace {
            steps.push(MergeStep {
                clusters: cl.snapshot(),
                merged: (a, b),
                loss,
            });
        }
        cl.merge(a, b, 0);
    }

    let final_slots = cl.active_slots();
    let mut cluster_of = vec![0usize; v];
    for (cid, &s) in final_slots.iter().enumerate() {
        for &w in &cl.members[s] {
            cluster_of[w] = cid;
        }
        cl.node[s] = cid;
    }

    // phase 2: hierarchy over the k clusters; nodes >= k are internal
    let mut children: Vec<(usize, usize)> = Vec::new();
    while cl.active_slots().len() > 1 {
        let (a, b, loss) = cl.best_pair();
        if trace {
            steps.push(MergeStep {
                clusters: cl.snapshot(),
                merged: (a, b),
                loss,
            });
        }
        children.push((cl.node[a], cl.node[b]));
        cl.merge(a, b, k + children.len() - 1);
    }
    let root = cl.node[cl.active_slots()[0]];

    let mut paths = vec![String::new(); k];
    let mut stack = vec![(root, String::new())];
    while let Some((node, prefix)) = stack.pop() {
        if node < k {
            paths[node] = if prefix.is_empty() { "0".to_string() } else { prefix };
        } else {
            let (l, r) = children[node - k];
            stack.push((r, format!("{prefix}1")));
            stack.push((l, format!("{prefix}0")));
        }
    }

    Ok(BrownOutput {
        assignment: ClusterAssignment::new(cluster_of, paths)?,
        trace: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest, read_plain, IngestOptions, Stopwords};

    fn corpus(lines: &[&str]) -> Corpus {
        let mut o = IngestOptions::new("en", 1);
        o.stopwords = Stopwords::default();
        ingest(read_plain(lines.join("\n").as_bytes()).unwrap(), &o).unwrap()
    }

    #[test]
    fn interchangeable_words_share_a_cluster() {
        let c = corpus(&["a x b", "a y b", "c x d", "c y d"]);
        let out = brown_cluster(&c, 4).unwrap();
        let id = |t: &str| c.vocab.id(t).unwrap();
        assert_eq!(out.num_clusters(), 4);
        assert_eq!(out.cluster_of(id("x")), out.cluster_of(id("y")));
    }

    #[test]
    fn k_at_least_v_keeps_singletons() {
        let c = corpus(&["a b c", "c d a"]);
        let out = brown_cluster_traced(&c, 10, true).unwrap();
        assert_eq!(out.assignment.num_clusters(), 4);
        let mut ids: Vec<usize> = (0..4).map(|t| out.assignment.cluster_of(t)).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 4);
        // only hierarchy merges, none that change the assignment
        assert_eq!(out.trace.len(), 3);
    }

    #[test]
    fn paths_are_prefix_free() {
        let c = corpus(&["a b c d e f", "b c a f e d", "f a c e b d", "a a b b c c"]);
        for k in 1..=6 {
            let out = brown_cluster(&c, k).unwrap();
            let p = out.paths();
            for i in 0..p.len() {
                for j in 0..p.len() {
                    if i != j {
                        assert!(!p[j].starts_with(&p[i]), "{p:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_clusters_rejected() {
        let c = corpus(&["a b"]);
        assert!(brown_cluster(&c, 0).is_err());
    }

    #[test]
    fn file_round_trip() {
        let c = corpus(&["a x b", "a y b", "c x d", "c y d"]);
        let out = brown_cluster(&c, 3).unwrap();
        let mut buf = Vec::new();
        out.write_text(&c.vocab, &mut buf).unwrap();
        let back = ClusterAssignment::read_text(&buf[..], &c.vocab, "mem").unwrap();
        for t in 0..c.vocab.len() {
            assert_eq!(back.path_of(t), out.path_of(t));
        }
        let partial = "0\ta\t2\n";
        assert!(ClusterAssignment::read_text(partial.as_bytes(), &c.vocab, "mem").is_err());
    }
}

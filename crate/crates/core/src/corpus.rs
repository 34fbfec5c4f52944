//! Review ingestion: sentence splitting, tokenization, stopword removal and
//! vocabulary construction. Every sentence becomes one model document.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::text::{split_sentences, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub const ALL: [Polarity; 2] = [Polarity::Positive, Polarity::Negative];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = Error;

    /// Accepts `positive`/`negative`, `pos`/`neg` and 1–5 star ratings
    /// (4–5 positive, 1–2 negative).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "positive" | "pos" | "4" | "5" => Ok(Polarity::Positive),
            "negative" | "neg" | "1" | "2" => Ok(Polarity::Negative),
            other => Err(Error::invalid(format!("not a polarity label: '{other}'"))),
        }
    }
}

/// Gold annotations carried by evaluation corpora.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldLabel {
    pub aspect: Option<String>,
    pub polarity: Option<Polarity>,
}

/// Dense term ↔ id mapping with corpus frequencies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    freqs: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, u64)>) -> Result<Self> {
        let mut v = Vocabulary::default();
        for (term, freq) in entries {
            if v.index.contains_key(&term) {
                return Err(Error::invalid(format!("duplicate vocabulary term '{term}'")));
            }
            v.index.insert(term.clone(), v.terms.len());
            v.terms.push(term);
            v.freqs.push(freq);
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    pub fn freq(&self, id: usize) -> u64 {
        self.freqs[id]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub tokens: Vec<usize>,
    pub raw: String,
    pub source: String,
    pub gold: Option<GoldLabel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub vocab: Vocabulary,
    pub language: String,
}

impl Corpus {
    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    /// Maps free text onto vocabulary ids, dropping unknown tokens.
    pub fn encode(&self, text: &str) -> Vec<usize> {
        tokenize(text).iter().filter_map(|t| self.vocab.id(t)).collect()
    }

    /// Number of occurrences of each term.
    pub fn term_counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.vocab.len()];
        for s in &self.sentences {
            for &w in &s.tokens {
                c[w] += 1;
            }
        }
        c
    }

    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "seedtopic-corpus v1")?;
        writeln!(w, "language\t{}", self.language)?;
        writeln!(w, "vocab\t{}", self.vocab.len())?;
        for (id, term) in self.vocab.terms.iter().enumerate() {
            writeln!(w, "{id}\t{term}\t{}", self.vocab.freqs[id])?;
        }
        writeln!(w, "sentences\t{}", self.sentences.len())?;
        for s in &self.sentences {
            let gold = s.gold.clone().unwrap_or_default();
            let ids: Vec<String> = s.tokens.iter().map(|t| t.to_string()).collect();
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                clean_field(&s.source),
                gold.aspect.as_deref().unwrap_or("-"),
                gold.polarity.map(Polarity::as_str).unwrap_or("-"),
                ids.join(" "),
                clean_field(&s.raw)
            )?;
        }
        Ok(())
    }

    pub fn read_cache<R: BufRead>(r: R, path: &str) -> Result<Corpus> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, l)) => Ok((i + 1, l?)),
                None => Err(Error::format(path, 0, format!("truncated file, expected {what}"))),
            }
        };
        let (n, header) = next("header")?;
        if header != "seedtopic-corpus v1" {
            return Err(Error::format(path, n, "not a corpus cache file"));
        }
        let (n, l) = next("language")?;
        let language = l
            .strip_prefix("language\t")
            .ok_or_else(|| Error::format(path, n, "expected language line"))?
            .to_string();
        let (n, l) = next("vocab")?;
        let v: usize = l
            .strip_prefix("vocab\t")
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::format(path, n, "expected vocab count"))?;
        let mut entries = Vec::with_capacity(v);
        for id in 0..v {
            let (n, l) = next("vocabulary entry")?;
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 3 || f[0].parse::<usize>().ok() != Some(id) {
                return Err(Error::format(path, n, "malformed vocabulary entry"));
            }
            let freq = f[2]
                .parse()
                .map_err(|_| Error::format(path, n, "bad frequency"))?;
            entries.push((f[1].to_string(), freq));
        }
        let vocab = Vocabulary::from_entries(entries)?;
        let (n, l) = next("sentences")?;
        let count: usize = l
            .strip_prefix("sentences\t")
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::format(path, n, "expected sentence count"))?;
        let mut sentences = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, l) = next("sentence")?;
            let f: Vec<&str> = l.splitn(5, '\t').collect();
            if f.len() != 5 {
                return Err(Error::format(path, n, "malformed sentence line"));
            }
            let tokens = f[3]
                .split(' ')
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<usize>().ok().filter(|&id| id < vocab.len()))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::format(path, n, "bad token id"))?;
            let aspect = (f[1] != "-").then(|| f[1].to_string());
            let polarity = if f[2] == "-" {
                None
            } else {
                Some(f[2].parse().map_err(|_| Error::format(path, n, "bad polarity"))?)
            };
            let gold = (aspect.is_some() || polarity.is_some()).then_some(GoldLabel { aspect, polarity });
            sentences.push(Sentence {
                tokens,
                raw: f[4].to_string(),
                source: f[0].to_string(),
                gold,
            });
        }
        Ok(Corpus {
            sentences,
            vocab,
            language,
        })
    }
}

fn clean_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Stopword list for one language.
#[derive(Debug, Clone, Default)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// Bundled list for `en`, `es`, `fr` or `nl`; empty for other tags.
    pub fn for_language(tag: &str) -> Self {
        let text = match tag {
            "en" => include_str!("../stopwords/en.txt"),
            "es" => include_str!("../stopwords/es.txt"),
            "fr" => include_str!("../stopwords/fr.txt"),
            "nl" => include_str!("../stopwords/nl.txt"),
            _ => "",
        };
        Self::from_text(text)
    }

    /// One word per line; `#` starts a comment.
    pub fn from_text(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .map(crate::text::normalize)
                .collect(),
        )
    }

    pub fn contains(&self, w: &str) -> bool {
        self.0.contains(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One unit of raw input text.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    pub gold: Option<GoldLabel>,
    /// Whether to split the text into sentences. Labelled evaluation rows are
    /// already single sentences.
    pub split: bool,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub language: String,
    pub stopwords: Stopwords,
    pub min_count: usize,
    /// Terms kept regardless of frequency (the seed words).
    pub keep: BTreeSet<String>,
}

impl IngestOptions {
    pub fn new(language: &str, min_count: usize) -> Self {
        IngestOptions {
            language: language.to_string(),
            stopwords: Stopwords::for_language(language),
            min_count,
            keep: BTreeSet::new(),
        }
    }
}

/// Builds a corpus from raw documents.
pub fn ingest(docs: Vec<RawDocument>, opts: &IngestOptions) -> Result<Corpus> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    // (source, gold, raw sentence, tokens)
    let pieces: Vec<Vec<(String, Option<GoldLabel>, String, Vec<String>)>> = docs
        .par_iter()
        .map(|d| {
            let sentences = if d.split {
                split_sentences(&d.text)
            } else {
                vec![d.text.trim()]
            };
            sentences
                .into_iter()
                .map(|s| {
                    let toks = tokenize(s)
                        .into_iter()
                        .filter(|t| !opts.stopwords.contains(t))
                        .collect();
                    (d.id.clone(), d.gold.clone(), s.to_string(), toks)
                })
                .collect()
        })
        .collect();

    let mut freq: HashMap<&str, u64> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for (_, _, _, toks) in pieces.iter().flatten() {
        for t in toks {
            let e = freq.entry(t.as_str()).or_insert_with(|| {
                order.push(t.as_str());
                0
            });
            *e += 1;
        }
    }
    let entries = order
        .into_iter()
        .filter(|t| freq[t] as usize >= opts.min_count || opts.keep.contains(*t))
        .map(|t| (t.to_string(), freq[t]));
    let vocab = Vocabulary::from_entries(entries)?;

    let sentences: Vec<Sentence> = pieces
        .into_iter()
        .flatten()
        .filter_map(|(source, gold, raw, toks)| {
            let tokens: Vec<usize> = toks.iter().filter_map(|t| vocab.id(t)).collect();
            (!tokens.is_empty()).then_some(Sentence {
                tokens,
                raw,
                source,
                gold,
            })
        })
        .collect();
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Corpus {
        sentences,
        vocab,
        language: opts.language.clone(),
    })
}

/// One review per line; blank lines skipped.
pub fn read_plain<R: BufRead>(r: R) -> Result<Vec<RawDocument>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(RawDocument {
            id: format!("r{}", i + 1),
            text: line,
            gold: None,
            split: true,
        });
    }
    Ok(out)
}

/// `text<TAB>aspect<TAB>polarity` rows, one sentence each. Empty or `-`
/// fields mean "unlabelled"; unrecognized polarity labels (e.g. `neutral`)
/// are treated as unlabelled.
pub fn read_labelled_tsv<R: BufRead>(r: R, path: &str) -> Result<Vec<RawDocument>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(Error::format(path, i + 1, "expected text<TAB>aspect<TAB>polarity"));
        }
        let aspect = match f[1].trim() {
            "" | "-" => None,
            a => Some(crate::text::normalize(a)),
        };
        let polarity = f[2].parse().ok();
        out.push(RawDocument {
            id: format!("s{}", i + 1),
            text: f[0].to_string(),
            gold: Some(GoldLabel { aspect, polarity }),
            split: false,
        });
    }
    Ok(out)
}

/// Reads a SemEval-style `<sentence><text/><Opinions/></sentence>` XML file,
/// keeping only sentences annotated with exactly one category. The category
/// is reduced to its lowercased entity part (`FOOD#QUALITY` → `food`); the
/// polarity is kept when all opinions agree.
pub fn read_semeval_xml(xml: &str, path: &str) -> Result<Vec<RawDocument>> {
    let doc = roxmltree::Document::parse(xml)
        .map_err(|e| Error::format(path, e.pos().row as usize, e.to_string()))?;
    let mut out = Vec::new();
    for s in doc.descendants().filter(|n| n.has_tag_name("sentence")) {
        let Some(text) = s
            .children()
            .find(|n| n.has_tag_name("text"))
            .and_then(|n| n.text())
        else {
            continue;
        };
        let opinions: Vec<_> = s.descendants().filter(|n| n.has_tag_name("Opinion")).collect();
        let categories: BTreeSet<String> = opinions
            .iter()
            .filter_map(|o| o.attribute("category"))
            .map(|c| c.split('#').next().unwrap_or(c).to_lowercase())
            .collect();
        if categories.len() != 1 {
            continue;
        }
        let polarities: BTreeSet<Option<Polarity>> = opinions
            .iter()
            .map(|o| o.attribute("polarity").and_then(|p| p.parse().ok()))
            .collect();
        let polarity = match polarities.len() {
            1 => *polarities.iter().next().unwrap(),
            _ => None,
        };
        out.push(RawDocument {
            id: s.attribute("id").unwrap_or("").to_string(),
            text: text.to_string(),
            gold: Some(GoldLabel {
                aspect: categories.into_iter().next(),
                polarity,
            }),
            split: false,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatedReview {
    pub text: String,
    pub polarity: Polarity,
}

/// `text<TAB>label` rows where the label is a polarity or a star rating;
/// 3-star rows are skipped.
pub fn read_rated<R: BufRead>(r: R, path: &str) -> Result<Vec<RatedReview>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (text, label) = line
            .rsplit_once('\t')
            .ok_or_else(|| Error::format(path, i + 1, "expected text<TAB>rating"))?;
        if label.trim() == "3" {
            continue;
        }
        let polarity = label
            .parse()
            .map_err(|e: Error| Error::format(path, i + 1, e.to_string()))?;
        out.push(RatedReview {
            text: text.to_string(),
            polarity,
        });
    }
    Ok(out)
}

/// Oversamples whole reviews so that both polarity classes reach `target`
/// (default: the size of the larger class). Originals are kept in order and
/// duplicates, drawn uniformly with replacement from the smaller class, are
/// appended.
pub fn balance_by_rating(reviews: &[RatedReview], target: Option<usize>, seed: u64) -> Result<Vec<RatedReview>> {
    let by_class: Vec<Vec<&RatedReview>> = Polarity::ALL
        .iter()
        .map(|p| reviews.iter().filter(|r| r.polarity == *p).collect())
        .collect();
    if let Some(p) = Polarity::ALL.iter().find(|p| by_class[p.index()].is_empty()) {
        return Err(Error::invalid(format!("no {p} reviews to balance")));
    }
    let largest = by_class.iter().map(Vec::len).max().unwrap_or(0);
    let target = target.unwrap_or(largest);
    if target < largest {
        return Err(Error::invalid(format!(
            "target {target} is below the larger class size {largest}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<RatedReview> = reviews.to_vec();
    for class in &by_class {
        for _ in class.len()..target {
            out.push(class[rng.gen_range(0..class.len())].clone());
        }
    }
    Ok(out)
}

impl From<RatedReview> for RawDocument {
    fn from(r: RatedReview) -> Self {
        RawDocument {
            id: String::new(),
            text: r.text,
            gold: Some(GoldLabel {
                aspect: None,
                polarity: Some(r.polarity),
            }),
            split: true,
        }
    }
}

/// Gives rated reviews sequential ids and converts them for ingestion.
pub fn rated_documents(reviews: Vec<RatedReview>) -> Vec<RawDocument> {
    reviews
        .into_iter()
        .enumerate()
        .map(|(i, r)| RawDocument {
            id: format!("r{}", i + 1),
            ..r.into()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(lines: &[&str]) -> Vec<RawDocument> {
        read_plain(lines.join("\n").as_bytes()).unwrap()
    }

    fn opts(min_count: usize) -> IngestOptions {
        IngestOptions {
            language: "en".into(),
            stopwords: Stopwords::from_text("the\nwas\n"),
            min_count,
            keep: BTreeSet::new(),
        }
    }

    fn words(c: &Corpus, s: usize) -> Vec<&str> {
        c.sentences[s].tokens.iter().map(|&t| c.vocab.term(t)).collect()
    }

    #[test]
    fn splits_and_filters() {
        let c = ingest(plain(&["The chicken was excellent. Service was slow."]), &opts(1)).unwrap();
        assert_eq!(c.sentences.len(), 2);
        assert_eq!(words(&c, 0), vec!["chicken", "excellent"]);
        assert_eq!(words(&c, 1), vec!["service", "slow"]);
        assert_eq!(c.sentences[0].source, "r1");
    }

    #[test]
    fn empty_input_errors() {
        assert!(matches!(ingest(vec![], &opts(1)), Err(Error::EmptyCorpus)));
        assert!(matches!(ingest(plain(&["the was. The."]), &opts(1)), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn all_stopword_sentence_dropped() {
        let c = ingest(plain(&["Great food. The was! Nice view."]), &opts(1)).unwrap();
        assert_eq!(c.sentences.len(), 2);
        assert_eq!(words(&c, 1), vec!["nice", "view"]);
    }

    #[test]
    fn min_count_filters_but_keeps_seeds() {
        let mut o = opts(2);
        o.keep.insert("rare".into());
        let c = ingest(plain(&["food rare odd", "food good", "good food"]), &o).unwrap();
        assert!(c.vocab.id("odd").is_none());
        assert!(c.vocab.id("rare").is_some());
        assert_eq!(c.vocab.freq(c.vocab.id("food").unwrap()), 3);
    }

    #[test]
    fn bundled_english_list_is_lucene_style() {
        let s = Stopwords::for_language("en");
        assert!(s.contains("the") && s.contains("was") && s.contains("with"));
        assert!(!s.contains("excellent"));
        assert!(Stopwords::for_language("xx").is_empty());
        for l in ["es", "fr", "nl"] {
            assert!(Stopwords::for_language(l).len() > 50);
        }
    }

    #[test]
    fn ingest_is_deterministic_and_cache_round_trips() {
        let docs = plain(&["Good food, good wine!", "Bad service? Slow staff.", "food food wine"]);
        let a = ingest(docs.clone(), &opts(1)).unwrap();
        let b = ingest(docs, &opts(1)).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        a.write_cache(&mut buf).unwrap();
        let back = Corpus::read_cache(&buf[..], "mem").unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn labelled_tsv() {
        let docs = read_labelled_tsv(
            "Great pasta.\tfood\tpositive\nRude waiter\tservice\tnegative\nok\t-\tneutral\n".as_bytes(),
            "x",
        )
        .unwrap();
        assert_eq!(docs.len(), 3);
        assert_eq!(docs[1].gold.as_ref().unwrap().aspect.as_deref(), Some("service"));
        assert_eq!(docs[1].gold.as_ref().unwrap().polarity, Some(Polarity::Negative));
        assert_eq!(docs[2].gold, Some(GoldLabel::default()));
        assert!(read_labelled_tsv("no tabs here\n".as_bytes(), "x").is_err());
    }

    #[test]
    fn semeval_keeps_single_category_sentences() {
        let xml = r#"<Reviews><Review rid="1"><sentences>
          <sentence id="1:0"><text>Great sushi.</text><Opinions>
            <Opinion target="sushi" category="FOOD#QUALITY" polarity="positive"/>
            <Opinion target="sushi" category="FOOD#PRICES" polarity="positive"/></Opinions></sentence>
          <sentence id="1:1"><text>Nice staff, bad food.</text><Opinions>
            <Opinion target="staff" category="SERVICE#GENERAL" polarity="positive"/>
            <Opinion target="food" category="FOOD#QUALITY" polarity="negative"/></Opinions></sentence>
          <sentence id="1:2"><text>No opinions here.</text></sentence>
        </sentences></Review></Reviews>"#;
        let docs = read_semeval_xml(xml, "x").unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].id, "1:0");
        let g = docs[0].gold.as_ref().unwrap();
        assert_eq!(g.aspect.as_deref(), Some("food"));
        assert_eq!(g.polarity, Some(Polarity::Positive));
    }

    fn rated(pos: usize, neg: usize) -> Vec<RatedReview> {
        (0..pos)
            .map(|i| RatedReview {
                text: format!("p{i}"),
                polarity: Polarity::Positive,
            })
            .chain((0..neg).map(|i| RatedReview {
                text: format!("n{i}"),
                polarity: Polarity::Negative,
            }))
            .collect()
    }

    #[test]
    fn oversampling_balances_classes() {
        let out = balance_by_rating(&rated(10000, 8400), None, 3).unwrap();
        let pos = out.iter().filter(|r| r.polarity == Polarity::Positive).count();
        assert_eq!((pos, out.len() - pos), (10000, 10000));
        assert!(out.iter().all(|r| r.text.starts_with('p') == (r.polarity == Polarity::Positive)));
    }

    #[test]
    fn balanced_input_unchanged() {
        let input = rated(5, 5);
        assert_eq!(balance_by_rating(&input, None, 1).unwrap(), input);
    }

    #[test]
    fn empty_class_errors() {
        assert!(balance_by_rating(&rated(4, 0), None, 1).is_err());
    }

    #[test]
    fn rated_reader_maps_stars() {
        let r = read_rated("great\t5\nmeh\t3\nawful\t1\nfine\tpositive\n".as_bytes(), "x").unwrap();
        let p: Vec<Polarity> = r.iter().map(|r| r.polarity).collect();
        assert_eq!(p, vec![Polarity::Positive, Polarity::Negative, Polarity::Positive]);
    }
}

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use seedtopic::brown::{brown_cluster, ClusterAssignment};
use seedtopic::config::{parse_config, validate_against_vocabulary, Config, SeedConfiguration};
use seedtopic::corpus::{
    balance_by_rating, ingest, rated_documents, read_labelled_tsv, read_plain, read_rated, read_semeval_xml, Corpus,
    IngestOptions, RawDocument,
};
use seedtopic::embeddings::{build_similarity_cache, train_skipgram, EmbeddingTable};
use seedtopic::pipeline::{train_separation, train_topic_model, Classifier};
use seedtopic::separation::SeparationModel;
use seedtopic::tmodel::{top_words as topic_top_words, FoldIn, ModelDump, WordKind, classify as classify_estimate};
use seedtopic::text::normalize;

use crate::error::{CliError, Result};
use crate::evaluate::{evaluate, GoldSentence};
use crate::manifest::{file_digest, sha256_hex, stage_key, write_file, ArtifactRecord, CorpusStats, InstanceCounts, Manifest};
use crate::{Common, InputFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Artifact {
    Corpus,
    Embeddings,
    Clusters,
    Separation,
    Model,
    TopWords,
    Classifications,
    Eval,
}

impl Artifact {
    pub fn name(self) -> &'static str {
        match self {
            Artifact::Corpus => "corpus",
            Artifact::Embeddings => "embeddings",
            Artifact::Clusters => "clusters",
            Artifact::Separation => "separation",
            Artifact::Model => "model",
            Artifact::TopWords => "top_words",
            Artifact::Classifications => "classifications",
            Artifact::Eval => "eval",
        }
    }

    pub fn file(self) -> &'static str {
        match self {
            Artifact::Corpus => "corpus.txt",
            Artifact::Embeddings => "embeddings.txt",
            Artifact::Clusters => "clusters.txt",
            Artifact::Separation => "separation.txt",
            Artifact::Model => "model.txt",
            Artifact::TopWords => "top_words.tsv",
            Artifact::Classifications => "classifications.tsv",
            Artifact::Eval => "eval.json",
        }
    }

    fn what(self) -> &'static str {
        match self {
            Artifact::Corpus => "prepared corpus",
            Artifact::Embeddings => "embeddings",
            Artifact::Clusters => "Brown clusters",
            Artifact::Separation => "separation model",
            Artifact::Model => "topic model",
            Artifact::TopWords => "top-words report",
            Artifact::Classifications => "classifications",
            Artifact::Eval => "evaluation report",
        }
    }

    fn stage(self) -> &'static str {
        match self {
            Artifact::Corpus => "prepare",
            Artifact::Embeddings => "embed",
            Artifact::Clusters => "cluster",
            Artifact::Separation => "separate",
            Artifact::Model => "train",
            Artifact::TopWords => "top-words",
            Artifact::Classifications => "classify",
            Artifact::Eval => "eval",
        }
    }
}

fn seeds_text(s: &SeedConfiguration) -> String {
    let mut t = format!("language: {}\n", s.language);
    for a in &s.aspects {
        let _ = writeln!(t, "aspect {}: {}", a.name, a.seeds.join(", "));
    }
    let _ = writeln!(t, "positive: {}", s.positive_seeds.join(", "));
    let _ = writeln!(t, "negative: {}", s.negative_seeds.join(", "));
    t
}

struct Ctx {
    config: Config,
    config_hash: String,
    out: PathBuf,
    manifest: Manifest,
    force: bool,
    started: Instant,
}

impl Ctx {
    fn open(common: &Common) -> Result<Ctx> {
        let started = Instant::now();
        let text = fs::read_to_string(&common.config).map_err(|e| CliError::io(&common.config, e))?;
        let mut config = parse_config(&text)?;
        if common.seed.is_some() || common.mode.is_some() {
            let mut o = config.overrides.clone();
            o.rng_seed = common.seed.or(o.rng_seed);
            o.mode = common.mode.or(o.mode);
            config = Config::new(config.seeds, o)?;
        }
        fs::create_dir_all(&common.out_dir).map_err(|e| CliError::io(&common.out_dir, e))?;
        let manifest = Manifest::load(&common.out_dir)?;
        Ok(Ctx {
            config_hash: sha256_hex(config.to_text().as_bytes()),
            config,
            out: common.out_dir.clone(),
            manifest,
            force: common.force,
            started,
        })
    }

    fn path(&self, a: Artifact) -> PathBuf {
        self.out.join(a.file())
    }

    fn digest(&self, a: Artifact) -> Option<String> {
        self.manifest.artifacts.get(a.name()).map(|r| r.digest.clone())
    }

    fn prepare_key(&self, source_digest: &str, format: &str) -> String {
        let p = &self.config.params;
        let keep: Vec<&str> = self.config.seeds.all_seeds().into_iter().collect();
        stage_key(
            "prepare",
            &[
                ("source", source_digest.to_string()),
                ("format", format.to_string()),
                ("language", self.config.seeds.language.clone()),
                ("min_count", p.min_count.to_string()),
                ("keep", keep.join(",")),
                // only rated input is resampled
                ("rng_seed", if format == "rated" { p.rng_seed.to_string() } else { "-".into() }),
            ],
        )
    }

    /// The key `a` would have if built now from the recorded upstream
    /// artifacts; `None` if an upstream record is missing.
    fn expected_key(&self, a: Artifact) -> Option<String> {
        let p = &self.config.params;
        let d = |u: Artifact| self.digest(u);
        Some(match a {
            Artifact::Corpus => {
                let c = self.manifest.corpus.as_ref()?;
                self.prepare_key(&c.source_digest, &c.format)
            }
            Artifact::Embeddings => stage_key(
                "embed",
                &[
                    ("corpus", d(Artifact::Corpus)?),
                    ("embedding_dims", p.embedding_dims.to_string()),
                    ("embedding_window", p.embedding_window.to_string()),
                    ("embedding_epochs", p.embedding_epochs.to_string()),
                    ("negative_samples", p.negative_samples.to_string()),
                    ("learning_rate", p.learning_rate.to_string()),
                    ("rng_seed", p.rng_seed.to_string()),
                ],
            ),
            Artifact::Clusters => stage_key(
                "cluster",
                &[
                    ("corpus", d(Artifact::Corpus)?),
                    ("num_brown_clusters", p.num_brown_clusters.to_string()),
                ],
            ),
            Artifact::Separation => stage_key(
                "separate",
                &[
                    ("corpus", d(Artifact::Corpus)?),
                    ("clusters", d(Artifact::Clusters)?),
                    ("seeds", seeds_text(&self.config.seeds)),
                    ("l2_regularization", p.l2_regularization.to_string()),
                    ("maxent_max_iterations", p.maxent_max_iterations.to_string()),
                    ("maxent_tolerance", p.maxent_tolerance.to_string()),
                ],
            ),
            Artifact::Model => stage_key(
                "train",
                &[
                    ("corpus", d(Artifact::Corpus)?),
                    ("embeddings", d(Artifact::Embeddings)?),
                    ("clusters", d(Artifact::Clusters)?),
                    ("separation", d(Artifact::Separation)?),
                    ("config", self.config.to_text()),
                ],
            ),
            // reports are recorded for reference, never required upstream
            _ => return None,
        })
    }

    /// Checks that `a` exists, is unmodified and was built from the current
    /// upstream artifacts and configuration.
    fn require(&self, a: Artifact) -> Result<()> {
        let path = self.path(a);
        let rec = match self.manifest.artifacts.get(a.name()) {
            Some(r) if path.exists() => r,
            _ => {
                return Err(CliError::Missing {
                    what: a.what(),
                    stage: a.stage(),
                })
            }
        };
        if file_digest(&path)? != rec.digest {
            return Err(CliError::HashMismatch {
                path: path.display().to_string(),
                stage: a.stage(),
            });
        }
        if self.expected_key(a).as_deref() != Some(rec.key.as_str()) {
            return Err(CliError::Stale {
                what: a.what(),
                stage: a.stage(),
            });
        }
        Ok(())
    }

    fn up_to_date(&self, a: Artifact, key: &str) -> bool {
        if self.force {
            return false;
        }
        let path = self.path(a);
        match self.manifest.artifacts.get(a.name()) {
            Some(r) if r.key == key && path.exists() => file_digest(&path).map(|d| d == r.digest).unwrap_or(false),
            _ => false,
        }
    }

    fn record_at(&mut self, a: Artifact, path: &Path, bytes: &[u8], key: String) -> Result<()> {
        write_file(path, bytes)?;
        let rel = path
            .strip_prefix(&self.out)
            .map(|p| p.display().to_string())
            .unwrap_or_else(|_| path.display().to_string());
        self.manifest.artifacts.insert(
            a.name().to_string(),
            ArtifactRecord {
                path: rel,
                digest: sha256_hex(bytes),
                key,
            },
        );
        Ok(())
    }

    fn record(&mut self, a: Artifact, bytes: &[u8], key: String) -> Result<()> {
        let path = self.path(a);
        self.record_at(a, &path, bytes, key)
    }

    fn finish(mut self, stage: &str) -> Result<()> {
        self.manifest.config_hash = self.config_hash.clone();
        self.manifest.rng_seed = self.config.params.rng_seed;
        self.manifest.params = serde_json::to_value(&self.config.params).expect("parameters serialize");
        self.manifest
            .timings
            .insert(stage.to_string(), self.started.elapsed().as_secs_f64());
        self.manifest.save(&self.out)
    }

    fn reader(&self, a: Artifact) -> Result<BufReader<File>> {
        let path = self.path(a);
        Ok(BufReader::new(File::open(&path).map_err(|e| CliError::io(&path, e))?))
    }

    fn load_corpus(&self) -> Result<Corpus> {
        Ok(Corpus::read_cache(self.reader(Artifact::Corpus)?, &display(&self.path(Artifact::Corpus)))?)
    }

    fn load_embeddings(&self) -> Result<EmbeddingTable> {
        let path = self.path(Artifact::Embeddings);
        Ok(EmbeddingTable::read_text(self.reader(Artifact::Embeddings)?, &display(&path))?)
    }

    fn load_clusters(&self, corpus: &Corpus) -> Result<ClusterAssignment> {
        let path = self.path(Artifact::Clusters);
        Ok(ClusterAssignment::read_text(
            self.reader(Artifact::Clusters)?,
            &corpus.vocab,
            &display(&path),
        )?)
    }

    fn load_separation(&self) -> Result<SeparationModel> {
        let path = self.path(Artifact::Separation);
        Ok(SeparationModel::read_text(self.reader(Artifact::Separation)?, &display(&path))?)
    }

    fn load_model(&self) -> Result<ModelDump> {
        let path = self.path(Artifact::Model);
        Ok(ModelDump::read_text(self.reader(Artifact::Model)?, &display(&path))?)
    }

    fn up_to_date_note(&self, a: Artifact) {
        println!("{} up to date: {}", a.what(), self.path(a).display());
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> seedtopic::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn read_documents(path: &Path, format: InputFormat, seed: u64) -> Result<Vec<RawDocument>> {
    let file = || -> Result<BufReader<File>> { Ok(BufReader::new(File::open(path).map_err(|e| CliError::io(path, e))?)) };
    let name = display(path);
    Ok(match format {
        InputFormat::Plain => read_plain(file()?)?,
        InputFormat::Tsv => read_labelled_tsv(file()?, &name)?,
        InputFormat::Semeval => {
            let xml = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            read_semeval_xml(&xml, &name)?
        }
        InputFormat::Rated => rated_documents(balance_by_rating(&read_rated(file()?, &name)?, None, seed)?),
    })
}

pub fn prepare(common: &Common, corpus_path: &Path, format: Option<InputFormat>) -> Result<()> {
    let mut ctx = Ctx::open(common)?;
    let format = format.unwrap_or_else(|| InputFormat::from_extension(corpus_path));
    let source_digest = file_digest(corpus_path)?;
    let key = ctx.prepare_key(&source_digest, format.as_str());
    let same_source = ctx.manifest.corpus.as_ref().map(|c| c.source_digest.as_str()) == Some(source_digest.as_str());
    if same_source && ctx.up_to_date(Artifact::Corpus, &key) {
        ctx.up_to_date_note(Artifact::Corpus);
        return ctx.finish("prepare");
    }
    let p = &ctx.config.params;
    let docs = read_documents(corpus_path, format, p.rng_seed)?;
    let documents = docs.len();
    let mut opts = IngestOptions::new(&ctx.config.seeds.language, p.min_count);
    opts.keep = ctx.config.seeds.all_seeds().into_iter().map(str::to_string).collect();
    let corpus = ingest(docs, &opts)?;
    let report = validate_against_vocabulary(&ctx.config.seeds, &corpus.vocab)?;
    for (group, word) in &report.missing {
        eprintln!("warning: seed '{word}' ({group}) does not occur in the corpus");
    }
    let bytes = to_bytes(|b| corpus.write_cache(b))?;
    ctx.record(Artifact::Corpus, &bytes, key)?;
    ctx.manifest.corpus = Some(CorpusStats {
        source: display(corpus_path),
        source_digest,
        format: format.as_str().into(),
        documents,
        sentences: corpus.sentences.len(),
        vocabulary: corpus.vocab.len(),
        tokens: corpus.num_tokens(),
    });
    println!(
        "prepared {} sentences from {documents} documents, {} terms, {} tokens",
        corpus.sentences.len(),
        corpus.vocab.len(),
        corpus.num_tokens()
    );
    ctx.finish("prepare")
}

pub fn embed(common: &Common) -> Result<()> {
    let mut ctx = Ctx::open(common)?;
    ctx.require(Artifact::Corpus)?;
    let key = ctx.expected_key(Artifact::Embeddings).expect("corpus is recorded");
    if ctx.up_to_date(Artifact::Embeddings, &key) {
        ctx.up_to_date_note(Artifact::Embeddings);
        return ctx.finish("embed");
    }
    let corpus = ctx.load_corpus()?;
    let trained = train_skipgram(&corpus, &ctx.config.params)?;
    let bytes = to_bytes(|b| trained.table.write_text(b))?;
    ctx.record(Artifact::Embeddings, &bytes, key)?;
    println!(
        "embedded {} terms, final epoch loss {:.4}",
        trained.table.len(),
        trained.epoch_losses.last().copied().unwrap_or(f64::NAN)
    );
    ctx.finish("embed")
}

pub fn cluster(common: &Common) -> Result<()> {
    let mut ctx = Ctx::open(common)?;
    ctx.require(Artifact::Corpus)?;
    let key = ctx.expected_key(Artifact::Clusters).expect("corpus is recorded");
    if ctx.up_to_date(Artifact::Clusters, &key) {
        ctx.up_to_date_note(Artifact::Clusters);
        return ctx.finish("cluster");
    }
    let corpus = ctx.load_corpus()?;
    let clusters = brown_cluster(&corpus, ctx.config.params.num_brown_clusters)?;
    let bytes = to_bytes(|b| clusters.write_text(&corpus.vocab, b))?;
    ctx.record(Artifact::Clusters, &bytes, key)?;
    println!("{} clusters over {} terms", clusters.num_clusters(), clusters.num_terms());
    ctx.finish("cluster")
}

pub fn separate(common: &Common) -> Result<()> {
    let mut ctx = Ctx::open(common)?;
    ctx.require(Artifact::Corpus)?;
    ctx.require(Artifact::Clusters)?;
    let key = ctx.expected_key(Artifact::Separation).expect("upstream is recorded");
    if ctx.up_to_date(Artifact::Separation, &key) {
        ctx.up_to_date_note(Artifact::Separation);
        return ctx.finish("separate");
    }
    let corpus = ctx.load_corpus()?;
    let clusters = ctx.load_clusters(&corpus)?;
    let (fit, [aspect, opinion]) = train_separation(&corpus, &ctx.config.seeds, &clusters, &ctx.config.params)?;
    let bytes = to_bytes(|b| fit.model.write_text(b))?;
    ctx.record(Artifact::Separation, &bytes, key)?;
    ctx.manifest.instances = Some(InstanceCounts { aspect, opinion });
    println!(
        "separator trained on {aspect} aspect-term and {opinion} opinion-word instances in {} iterations",
        fit.iterations
    );
    ctx.finish("separate")
}

fn top_words_tsv(dump: &ModelDump, k: usize) -> Result<Vec<u8>> {
    let mut s = String::from("aspect\tclass\trank\tterm\tprob\n");
    for (t, name) in dump.aspects.iter().enumerate() {
        for kind in WordKind::ALL {
            for (rank, (term, p)) in topic_top_words(&dump.summary, &dump.terms, t, kind, k)?.iter().enumerate() {
                let _ = writeln!(s, "{name}\t{kind}\t{}\t{term}\t{p:.6}", rank + 1);
            }
        }
    }
    Ok(s.into_bytes())
}

fn write_top_words(ctx: &mut Ctx, dump: &ModelDump, k: usize) -> Result<()> {
    let bytes = top_words_tsv(dump, k)?;
    let key = stage_key(
        "top-words",
        &[
            ("model", ctx.digest(Artifact::Model).unwrap_or_default()),
            ("k", k.to_string()),
        ],
    );
    ctx.record(Artifact::TopWords, &bytes, key)?;
    println!("top words: {}", ctx.path(Artifact::TopWords).display());
    Ok(())
}

const UPSTREAM_OF_MODEL: [Artifact; 4] = [
    Artifact::Corpus,
    Artifact::Embeddings,
    Artifact::Clusters,
    Artifact::Separation,
];

pub fn train(common: &Common, k: usize) -> Result<()> {
    let mut ctx = Ctx::open(common)?;
    for a in UPSTREAM_OF_MODEL {
        ctx.require(a)?;
    }
    let key = ctx.expected_key(Artifact::Model).expect("upstream is recorded");
    let dump = if ctx.up_to_date(Artifact::Model, &key) {
        ctx.up_to_date_note(Artifact::Model);
        ctx.load_model()?
    } else {
        let corpus = ctx.load_corpus()?;
        let table = ctx.load_embeddings()?;
        let clusters = ctx.load_clusters(&corpus)?;
        let separation = ctx.load_separation()?;
        let p = &ctx.config.params;
        let m = train_topic_model(&corpus, &ctx.config.seeds, p, &table, &clusters, &separation, |it, _| {
            if it % 100 == 0 {
                eprintln!("sweep {it}/{}", p.iterations);
            }
        })?;
        for (group, word) in &m.seed_report.missing {
            eprintln!("warning: seed '{word}' ({group}) does not occur in the corpus");
        }
        let dump = ModelDump::new(
            ctx.config_hash.clone(),
            p.mode,
            ctx.config.seeds.aspect_names().iter().map(|s| s.to_string()).collect(),
            corpus.vocab.terms().to_vec(),
            m.priors,
            &m.state,
            m.summary,
        );
        let bytes = to_bytes(|b| dump.write_text(b))?;
        ctx.record(Artifact::Model, &bytes, key)?;
        println!(
            "trained {} aspects over {} sentences ({} samples averaged)",
            dump.num_topics(),
            dump.z.len(),
            dump.summary.samples
        );
        dump
    };
    write_top_words(&mut ctx, &dump, k)?;
    ctx.finish("train")
}

pub fn top_words(common: &Common, k: usize) -> Result<()> {
    let mut ctx = Ctx::open(common)?;
    ctx.require(Artifact::Model)?;
    let dump = ctx.load_model()?;
    write_top_words(&mut ctx, &dump, k)?;
    ctx.finish("top-words")
}

/// Loaded artifacts needed to fold in new sentences.
struct Loaded {
    corpus: Corpus,
    clusters: ClusterAssignment,
    separation: SeparationModel,
    cache: seedtopic::embeddings::SimilarityCache,
    dump: ModelDump,
}

impl Loaded {
    fn open(ctx: &Ctx) -> Result<Loaded> {
        for a in UPSTREAM_OF_MODEL {
            ctx.require(a)?;
        }
        ctx.require(Artifact::Model)?;
        let corpus = ctx.load_corpus()?;
        let table = ctx.load_embeddings()?;
        let clusters = ctx.load_clusters(&corpus)?;
        let separation = ctx.load_separation()?;
        let dump = ctx.load_model()?;
        let cache = build_similarity_cache(
            &table,
            &corpus.vocab,
            &ctx.config.seeds,
            ctx.config.params.similarity_floor,
        )?;
        Ok(Loaded {
            corpus,
            clusters,
            separation,
            cache,
            dump,
        })
    }

    fn classifier<'a>(&'a self, ctx: &'a Ctx) -> Classifier<'a> {
        Classifier {
            vocab: &self.corpus.vocab,
            clusters: &self.clusters,
            separation: &self.separation,
            cache: &self.cache,
            summary: &self.dump.summary,
            params: &ctx.config.params,
        }
    }
}

/// Sentences to classify: one per non-empty line, or the text column of a
/// `.tsv` file.
fn read_sentences(path: &Path) -> Result<Vec<String>> {
    if InputFormat::from_extension(path) == InputFormat::Tsv {
        let file = BufReader::new(File::open(path).map_err(|e| CliError::io(path, e))?);
        return Ok(read_labelled_tsv(file, &display(path))?
            .into_iter()
            .map(|d| d.text)
            .collect());
    }
    let file = BufReader::new(File::open(path).map_err(|e| CliError::io(path, e))?);
    let mut out = Vec::new();
    for line in file.lines() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if !line.trim().is_empty() {
            out.push(line);
        }
    }
    Ok(out)
}

fn clean_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

pub fn classify(common: &Common, input: &Path, output: Option<&Path>) -> Result<()> {
    let mut ctx = Ctx::open(common)?;
    let loaded = Loaded::open(&ctx)?;
    let sentences = read_sentences(input)?;
    let c = loaded.classifier(&ctx);
    let mut s = String::from("id\taspect\taspect_prob\tpolarity\tpolarity_prob\tflags\ttext\n");
    let mut unclassifiable = 0;
    for (i, text) in sentences.iter().enumerate() {
        let id = format!("s{}", i + 1);
        match c.estimate_text(text) {
            FoldIn::Estimate(e) => {
                let k = classify_estimate(&e);
                let mut flags = Vec::new();
                if k.aspect_tie {
                    flags.push("aspect_tie");
                }
                if k.polarity_tie {
                    flags.push("polarity_tie");
                }
                let flags = if flags.is_empty() { "-".to_string() } else { flags.join(",") };
                let _ = writeln!(
                    s,
                    "{id}\t{}\t{:.6}\t{}\t{:.6}\t{flags}\t{}",
                    loaded.dump.aspects[k.aspect],
                    e.theta[k.aspect],
                    k.polarity,
                    e.omega[k.polarity.index()],
                    clean_field(text)
                );
            }
            FoldIn::Unclassifiable => {
                unclassifiable += 1;
                let _ = writeln!(s, "{id}\t-\t-\t-\t-\tunclassifiable\t{}", clean_field(text));
            }
        }
    }
    let path = output.map(Path::to_path_buf).unwrap_or_else(|| ctx.path(Artifact::Classifications));
    let key = stage_key(
        "classify",
        &[
            ("model", ctx.digest(Artifact::Model).unwrap_or_default()),
            ("input", file_digest(input)?),
        ],
    );
    ctx.record_at(Artifact::Classifications, &path, s.as_bytes(), key)?;
    println!(
        "classified {} sentences ({unclassifiable} unclassifiable): {}",
        sentences.len(),
        path.display()
    );
    ctx.finish("classify")
}

fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let words: BTreeSet<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with(';'))
        .map(normalize)
        .collect();
    Ok(words.into_iter().collect())
}

pub fn eval(
    common: &Common,
    gold_path: &Path,
    per_class: Option<usize>,
    subsets: usize,
    separation_lists: Option<(&Path, &Path)>,
) -> Result<()> {
    let mut ctx = Ctx::open(common)?;
    let loaded = Loaded::open(&ctx)?;
    let file = BufReader::new(File::open(gold_path).map_err(|e| CliError::io(gold_path, e))?);
    let rows = read_labelled_tsv(file, &display(gold_path))?;
    let c = loaded.classifier(&ctx);
    let gold: Vec<GoldSentence> = rows
        .into_iter()
        .map(|d| {
            let prediction = c.classify_text(&d.text);
            let g = d.gold.unwrap_or_default();
            GoldSentence {
                text: d.text,
                aspect: g.aspect,
                polarity: g.polarity,
                prediction,
            }
        })
        .collect();
    let separation = match separation_lists {
        Some((lexicon, aspect_terms)) => {
            let docs: Vec<Vec<usize>> = loaded.corpus.sentences.iter().map(|s| s.tokens.clone()).collect();
            Some(seedtopic::eval::separation_score(
                &docs,
                &loaded.dump.y,
                &loaded.corpus.vocab,
                &read_word_list(lexicon)?,
                &read_word_list(aspect_terms)?,
            )?)
        }
        None => None,
    };
    let report = evaluate(
        &gold,
        &loaded.dump.aspects,
        per_class,
        subsets,
        ctx.config.params.rng_seed,
        separation,
    )?;
    let mut bytes = serde_json::to_string_pretty(&report).expect("report serializes");
    bytes.push('\n');
    let key = stage_key(
        "eval",
        &[
            ("model", ctx.digest(Artifact::Model).unwrap_or_default()),
            ("gold", file_digest(gold_path)?),
        ],
    );
    ctx.record(Artifact::Eval, bytes.as_bytes(), key)?;
    if let Some(a) = &report.aspect {
        println!("aspect accuracy {:.3} over {} sentences", a.model.accuracy, a.evaluated);
    }
    if let Some(p) = &report.polarity {
        println!("polarity accuracy {:.3} over {} sentences", p.model.accuracy, p.evaluated);
    }
    println!("report: {}", ctx.path(Artifact::Eval).display());
    ctx.finish("eval")
}

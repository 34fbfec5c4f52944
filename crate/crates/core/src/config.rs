//! Seed-word configuration and run hyperparameters.
//!
//! The configuration file is line oriented:
//!
//! ```text
//! # restaurants, English
//! language: en
//! aspect food: chicken
//! aspect service: service
//! positive: excellent
//! negative: horrible
//!
//! [params]
//! iterations = 500
//! ```
//!
//! Seeds are NFC-normalized and lowercased. Any `[params]` key that is left
//! out takes its default; `alpha_base` and `delta_base` default to `50 / T`
//! where `T` is the number of aspects.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::text::{normalize, tokenize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AspectSpec {
    pub name: String,
    /// Normalized seed words, deduplicated, in file order.
    pub seeds: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedConfiguration {
    pub language: String,
    pub aspects: Vec<AspectSpec>,
    pub positive_seeds: Vec<String>,
    pub negative_seeds: Vec<String>,
}

impl SeedConfiguration {
    /// Number of topics (one per aspect).
    pub fn num_topics(&self) -> usize {
        self.aspects.len()
    }

    pub fn aspect_names(&self) -> Vec<&str> {
        self.aspects.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn aspect_index(&self, name: &str) -> Option<usize> {
        self.aspects.iter().position(|a| a.name == name)
    }

    /// Every seed word of every group.
    pub fn all_seeds(&self) -> BTreeSet<&str> {
        self.aspects
            .iter()
            .flat_map(|a| a.seeds.iter())
            .chain(&self.positive_seeds)
            .chain(&self.negative_seeds)
            .map(String::as_str)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.aspects.is_empty() {
            return Err(Error::Config {
                line: 0,
                message: "no aspects defined".into(),
            });
        }
        let mut names = BTreeSet::new();
        let mut owner: HashMap<&str, &str> = HashMap::new();
        for a in &self.aspects {
            if !names.insert(a.name.as_str()) {
                return Err(Error::invalid(format!("duplicate aspect '{}'", a.name)));
            }
            if a.seeds.is_empty() {
                return Err(Error::invalid(format!("aspect '{}' has no seeds", a.name)));
            }
            for s in &a.seeds {
                if let Some(prev) = owner.insert(s, &a.name) {
                    return Err(Error::invalid(format!(
                        "seed '{s}' appears in aspects '{prev}' and '{}'",
                        a.name
                    )));
                }
            }
        }
        if self.positive_seeds.is_empty() {
            return Err(Error::invalid("no positive seeds"));
        }
        if self.negative_seeds.is_empty() {
            return Err(Error::invalid("no negative seeds"));
        }
        if let Some(s) = self.positive_seeds.iter().find(|s| self.negative_seeds.contains(s)) {
            return Err(Error::invalid(format!("seed '{s}' is both positive and negative")));
        }
        Ok(())
    }
}

/// Which form of the topic conditional the sampler uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMode {
    /// Topic conditional multiplies the aspect, positive and negative word
    /// ratios for every candidate topic.
    AsWritten,
    /// Collapsed-Gibbs conditionals of the generative model: only the ratio
    /// of the token's current word class enters the topic update.
    Derived,
}

impl FromStr for SamplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-written" => Ok(SamplerMode::AsWritten),
            "derived" => Ok(SamplerMode::Derived),
            other => Err(Error::invalid(format!(
                "unknown sampler mode '{other}' (expected as-written or derived)"
            ))),
        }
    }
}

impl fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerMode::AsWritten => "as-written",
            SamplerMode::Derived => "derived",
        })
    }
}

/// Fully resolved run hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunParameters {
    pub alpha_base: f64,
    pub beta_base: f64,
    pub delta_base: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub lag: usize,
    pub num_brown_clusters: usize,
    pub embedding_dims: usize,
    pub embedding_window: usize,
    pub embedding_epochs: usize,
    pub negative_samples: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub similarity_floor: f64,
    pub l2_regularization: f64,
    pub maxent_max_iterations: usize,
    pub maxent_tolerance: f64,
    pub foldin_iterations: usize,
    pub foldin_burn_in: usize,
    pub foldin_lag: usize,
    pub mode: SamplerMode,
    pub rng_seed: u64,
}

impl RunParameters {
    /// Defaults for a configuration with `num_topics` aspects.
    pub fn defaults(num_topics: usize) -> Self {
        ParamOverrides::default().fill_defaults(num_topics).resolve()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha_base", self.alpha_base),
            ("beta_base", self.beta_base),
            ("delta_base", self.delta_base),
            ("learning_rate", self.learning_rate),
            ("similarity_floor", self.similarity_floor),
            ("maxent_tolerance", self.maxent_tolerance),
        ];
        for (k, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{k} must be a positive number, got {v}")));
            }
        }
        if !(self.l2_regularization.is_finite() && self.l2_regularization >= 0.0) {
            return Err(Error::invalid("l2_regularization must be non-negative"));
        }
        if self.similarity_floor > 1.0 {
            return Err(Error::invalid("similarity_floor must not exceed 1"));
        }
        let counts = [
            ("iterations", self.iterations),
            ("lag", self.lag),
            ("num_brown_clusters", self.num_brown_clusters),
            ("embedding_dims", self.embedding_dims),
            ("embedding_window", self.embedding_window),
            ("embedding_epochs", self.embedding_epochs),
            ("negative_samples", self.negative_samples),
            ("min_count", self.min_count),
            ("maxent_max_iterations", self.maxent_max_iterations),
            ("foldin_iterations", self.foldin_iterations),
            ("foldin_lag", self.foldin_lag),
        ];
        for (k, v) in counts {
            if v == 0 {
                return Err(Error::invalid(format!("{k} must be positive")));
            }
        }
        if self.burn_in >= self.iterations {
            return Err(Error::invalid("burn_in must be smaller than iterations"));
        }
        if self.foldin_burn_in >= self.foldin_iterations {
            return Err(Error::invalid("foldin_burn_in must be smaller than foldin_iterations"));
        }
        Ok(())
    }
}

/// Parameter values as written in a configuration file; `None` means
/// "use the default".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamOverrides {
    pub alpha_base: Option<f64>,
    pub beta_base: Option<f64>,
    pub delta_base: Option<f64>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub lag: Option<usize>,
    pub num_brown_clusters: Option<usize>,
    pub embedding_dims: Option<usize>,
    pub embedding_window: Option<usize>,
    pub embedding_epochs: Option<usize>,
    pub negative_samples: Option<usize>,
    pub learning_rate: Option<f64>,
    pub min_count: Option<usize>,
    pub similarity_floor: Option<f64>,
    pub l2_regularization: Option<f64>,
    pub maxent_max_iterations: Option<usize>,
    pub maxent_tolerance: Option<f64>,
    pub foldin_iterations: Option<usize>,
    pub foldin_burn_in: Option<usize>,
    pub foldin_lag: Option<usize>,
    pub mode: Option<SamplerMode>,
    pub rng_seed: Option<u64>,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        message: format!("invalid value '{value}' for {key}"),
    })
}

impl ParamOverrides {
    /// Returns a copy with every missing field set to its default.
    pub fn fill_defaults(&self, num_topics: usize) -> ParamOverrides {
        let t = num_topics.max(1) as f64;
        ParamOverrides {
            alpha_base: Some(self.alpha_base.unwrap_or(50.0 / t)),
            beta_base: Some(self.beta_base.unwrap_or(0.01)),
            delta_base: Some(self.delta_base.unwrap_or(50.0 / t)),
            iterations: Some(self.iterations.unwrap_or(500)),
            burn_in: Some(self.burn_in.unwrap_or(100)),
            lag: Some(self.lag.unwrap_or(10)),
            num_brown_clusters: Some(self.num_brown_clusters.unwrap_or(200)),
            embedding_dims: Some(self.embedding_dims.unwrap_or(100)),
            embedding_window: Some(self.embedding_window.unwrap_or(5)),
            embedding_epochs: Some(self.embedding_epochs.unwrap_or(5)),
            negative_samples: Some(self.negative_samples.unwrap_or(5)),
            learning_rate: Some(self.learning_rate.unwrap_or(0.025)),
            min_count: Some(self.min_count.unwrap_or(5)),
            similarity_floor: Some(self.similarity_floor.unwrap_or(0.001)),
            l2_regularization: Some(self.l2_regularization.unwrap_or(1.0)),
            maxent_max_iterations: Some(self.maxent_max_iterations.unwrap_or(1000)),
            maxent_tolerance: Some(self.maxent_tolerance.unwrap_or(1e-6)),
            foldin_iterations: Some(self.foldin_iterations.unwrap_or(50)),
            foldin_burn_in: Some(self.foldin_burn_in.unwrap_or(20)),
            foldin_lag: Some(self.foldin_lag.unwrap_or(5)),
            mode: Some(self.mode.unwrap_or(SamplerMode::AsWritten)),
            rng_seed: Some(self.rng_seed.unwrap_or(42)),
        }
    }

    fn resolve(&self) -> RunParameters {
        // only called on filled overrides
        RunParameters {
            alpha_base: self.alpha_base.unwrap(),
            beta_base: self.beta_base.unwrap(),
            delta_base: self.delta_base.unwrap(),
            iterations: self.iterations.unwrap(),
            burn_in: self.burn_in.unwrap(),
            lag: self.lag.unwrap(),
            num_brown_clusters: self.num_brown_clusters.unwrap(),
            embedding_dims: self.embedding_dims.unwrap(),
            embedding_window: self.embedding_window.unwrap(),
            embedding_epochs: self.embedding_epochs.unwrap(),
            negative_samples: self.negative_samples.unwrap(),
            learning_rate: self.learning_rate.unwrap(),
            min_count: self.min_count.unwrap(),
            similarity_floor: self.similarity_floor.unwrap(),
            l2_regularization: self.l2_regularization.unwrap(),
            maxent_max_iterations: self.maxent_max_iterations.unwrap(),
            maxent_tolerance: self.maxent_tolerance.unwrap(),
            foldin_iterations: self.foldin_iterations.unwrap(),
            foldin_burn_in: self.foldin_burn_in.unwrap(),
            foldin_lag: self.foldin_lag.unwrap(),
            mode: self.mode.unwrap(),
            rng_seed: self.rng_seed.unwrap(),
        }
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "alpha_base" => self.alpha_base = Some(parse_value(key, value, line)?),
            "beta_base" => self.beta_base = Some(parse_value(key, value, line)?),
            "delta_base" => self.delta_base = Some(parse_value(key, value, line)?),
            "iterations" => self.iterations = Some(parse_value(key, value, line)?),
            "burn_in" => self.burn_in = Some(parse_value(key, value, line)?),
            "lag" => self.lag = Some(parse_value(key, value, line)?),
            "num_brown_clusters" => self.num_brown_clusters = Some(parse_value(key, value, line)?),
            "embedding_dims" => self.embedding_dims = Some(parse_value(key, value, line)?),
            "embedding_window" => self.embedding_window = Some(parse_value(key, value, line)?),
            "embedding_epochs" => self.embedding_epochs = Some(parse_value(key, value, line)?),
            "negative_samples" => self.negative_samples = Some(parse_value(key, value, line)?),
            "learning_rate" => self.learning_rate = Some(parse_value(key, value, line)?),
            "min_count" => self.min_count = Some(parse_value(key, value, line)?),
            "similarity_floor" => self.similarity_floor = Some(parse_value(key, value, line)?),
            "l2_regularization" => self.l2_regularization = Some(parse_value(key, value, line)?),
            "maxent_max_iterations" => {
                self.maxent_max_iterations = Some(parse_value(key, value, line)?)
            }
            "maxent_tolerance" => self.maxent_tolerance = Some(parse_value(key, value, line)?),
            "foldin_iterations" => self.foldin_iterations = Some(parse_value(key, value, line)?),
            "foldin_burn_in" => self.foldin_burn_in = Some(parse_value(key, value, line)?),
            "foldin_lag" => self.foldin_lag = Some(parse_value(key, value, line)?),
            "mode" => self.mode = Some(parse_value(key, value, line)?),
            "rng_seed" => self.rng_seed = Some(parse_value(key, value, line)?),
            _ => {
                return Err(Error::Config {
                    line,
                    message: format!("unknown parameter '{key}'"),
                })
            }
        }
        Ok(())
    }

    /// Explicitly set entries, in canonical key order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        fn push<T: ToString>(out: &mut Vec<(&'static str, String)>, k: &'static str, v: &Option<T>) {
            if let Some(v) = v {
                out.push((k, v.to_string()));
            }
        }
        let mut out = Vec::new();
        push(&mut out, "alpha_base", &self.alpha_base);
        push(&mut out, "beta_base", &self.beta_base);
        push(&mut out, "delta_base", &self.delta_base);
        push(&mut out, "iterations", &self.iterations);
        push(&mut out, "burn_in", &self.burn_in);
        push(&mut out, "lag", &self.lag);
        push(&mut out, "num_brown_clusters", &self.num_brown_clusters);
        push(&mut out, "embedding_dims", &self.embedding_dims);
        push(&mut out, "embedding_window", &self.embedding_window);
        push(&mut out, "embedding_epochs", &self.embedding_epochs);
        push(&mut out, "negative_samples", &self.negative_samples);
        push(&mut out, "learning_rate", &self.learning_rate);
        push(&mut out, "min_count", &self.min_count);
        push(&mut out, "similarity_floor", &self.similarity_floor);
        push(&mut out, "l2_regularization", &self.l2_regularization);
        push(&mut out, "maxent_max_iterations", &self.maxent_max_iterations);
        push(&mut out, "maxent_tolerance", &self.maxent_tolerance);
        push(&mut out, "foldin_iterations", &self.foldin_iterations);
        push(&mut out, "foldin_burn_in", &self.foldin_burn_in);
        push(&mut out, "foldin_lag", &self.foldin_lag);
        push(&mut out, "mode", &self.mode);
        push(&mut out, "rng_seed", &self.rng_seed);
        out
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub seeds: SeedConfiguration,
    /// Parameters exactly as given in the file.
    pub overrides: ParamOverrides,
    /// Resolved parameters (overrides plus defaults).
    pub params: RunParameters,
}

impl Config {
    pub fn new(seeds: SeedConfiguration, overrides: ParamOverrides) -> Result<Self> {
        seeds.validate()?;
        let params = overrides.fill_defaults(seeds.num_topics()).resolve();
        params.validate()?;
        Ok(Config {
            seeds,
            overrides,
            params,
        })
    }

    pub fn num_topics(&self) -> usize {
        self.seeds.num_topics()
    }

    /// Canonical text form; parsing it yields an identical `Config`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "language: {}", self.seeds.language);
        for a in &self.seeds.aspects {
            let _ = writeln!(s, "aspect {}: {}", a.name, a.seeds.join(", "));
        }
        let _ = writeln!(s, "positive: {}", self.seeds.positive_seeds.join(", "));
        let _ = writeln!(s, "negative: {}", self.seeds.negative_seeds.join(", "));
        let entries = self.overrides.entries();
        if !entries.is_empty() {
            let _ = writeln!(s, "\n[params]");
            for (k, v) in entries {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }
}

fn parse_seed_list(list: &str, line: usize) -> Result<Vec<String>> {
    let mut seeds: Vec<String> = Vec::new();
    for raw in list.split(',') {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let seed = normalize(raw);
        if tokenize(&seed) != [seed.clone()] {
            return Err(Error::Config {
                line,
                message: format!("seed '{raw}' is not a single token"),
            });
        }
        if !seeds.contains(&seed) {
            seeds.push(seed);
        }
    }
    if seeds.is_empty() {
        return Err(Error::Config {
            line,
            message: "empty seed list".into(),
        });
    }
    Ok(seeds)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut language: Option<String> = None;
    let mut aspects: Vec<AspectSpec> = Vec::new();
    let mut positive: Option<Vec<String>> = None;
    let mut negative: Option<Vec<String>> = None;
    let mut overrides = ParamOverrides::default();
    let mut in_params = false;
    let mut seed_line: HashMap<String, usize> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config {
            line: lineno,
            message,
        };
        if line.starts_with('[') {
            if line == "[params]" {
                in_params = true;
                continue;
            }
            return Err(err(format!("unknown section {line}")));
        }
        if in_params {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            overrides.set(k.trim(), v.trim(), lineno)?;
            continue;
        }
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| err(format!("expected 'key: value', got '{line}'")))?;
        let head = head.trim();
        let rest = rest.trim();
        if let Some(name) = head.strip_prefix("aspect ") {
            let name = name.trim().to_string();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(err(format!("invalid aspect name '{name}'")));
            }
            if aspects.iter().any(|a| a.name == name) {
                return Err(err(format!("duplicate aspect '{name}'")));
            }
            let seeds = parse_seed_list(rest, lineno)?;
            for s in &seeds {
                if let Some(prev) = aspects.iter().find(|a| a.seeds.contains(s)) {
                    return Err(err(format!(
                        "seed '{s}' already used by aspect '{}' (line {})",
                        prev.name, seed_line[s]
                    )));
                }
                seed_line.insert(s.clone(), lineno);
            }
            aspects.push(AspectSpec { name, seeds });
            continue;
        }
        match head {
            "language" => {
                if rest.is_empty() {
                    return Err(err("empty language tag".into()));
                }
                language = Some(rest.to_string());
            }
            "positive" => positive = Some(parse_seed_list(rest, lineno)?),
            "negative" => negative = Some(parse_seed_list(rest, lineno)?),
            other => return Err(err(format!("unknown key '{other}'"))),
        }
    }

    let missing = |what: &str| Error::Config {
        line: 0,
        message: format!("no {what} defined"),
    };
    if aspects.is_empty() {
        return Err(missing("aspects"));
    }
    let seeds = SeedConfiguration {
        language: language.unwrap_or_else(|| "en".to_string()),
        aspects,
        positive_seeds: positive.ok_or_else(|| missing("positive seeds"))?,
        negative_seeds: negative.ok_or_else(|| missing("negative seeds"))?,
    };
    Config::new(seeds, overrides)
}

/// Which seed group a missing word belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedGroup {
    Aspect(String),
    Positive,
    Negative,
}

impl fmt::Display for SeedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedGroup::Aspect(n) => write!(f, "aspect {n}"),
            SeedGroup::Positive => f.write_str("positive"),
            SeedGroup::Negative => f.write_str("negative"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedReport {
    pub missing: Vec<(SeedGroup, String)>,
}

impl SeedReport {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Lists seed words absent from the vocabulary. Fails only when every seed
/// of some aspect, or of a polarity set, is missing.
pub fn validate_against_vocabulary(config: &SeedConfiguration, vocab: &Vocabulary) -> Result<SeedReport> {
    let mut report = SeedReport::default();
    let mut fatal = Vec::new();
    let groups = config
        .aspects
        .iter()
        .map(|a| (SeedGroup::Aspect(a.name.clone()), &a.seeds))
        .chain([
            (SeedGroup::Positive, &config.positive_seeds),
            (SeedGroup::Negative, &config.negative_seeds),
        ]);
    for (group, seeds) in groups {
        let absent: Vec<&String> = seeds.iter().filter(|s| vocab.id(s).is_none()).collect();
        if absent.len() == seeds.len() {
            fatal.push(group.to_string());
        }
        report
            .missing
            .extend(absent.into_iter().map(|s| (group.clone(), s.clone())));
    }
    if !fatal.is_empty() {
        return Err(Error::MissingSeeds(format!(
            "no seed of {} occurs in the corpus",
            fatal.join(", ")
        )));
    }
    Ok(report)
}

//! Planted restaurant-review generator with known aspect and polarity
//! labels. Three aspects with disjoint noun vocabularies (Zipfian within
//! each aspect, first noun most frequent), positive and
//! negative opinion words shared by all aspects (one per sentence), and a
//! handful of context and filler words. Used for fixtures and the bundled demo corpus.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{AspectSpec, SeedConfiguration};
use crate::corpus::{GoldLabel, Polarity, RawDocument};

pub const ASPECTS: [&str; 3] = ["food", "service", "ambience"];

pub const ASPECT_TERMS: [[&str; 10]; 3] = [
    ["chicken", "pasta", "pizza", "steak", "salad", "soup", "dessert", "fish", "bread", "burger"],
    ["service", "waiter", "staff", "waitress", "manager", "host", "server", "bartender", "hostess", "waitstaff"],
    ["ambience", "atmosphere", "decor", "music", "lighting", "interior", "furniture", "view", "terrace", "patio"],
];

pub const POSITIVE_WORDS: [&str; 10] = [
    "excellent", "great", "amazing", "wonderful", "fantastic", "lovely", "superb", "perfect", "awesome", "outstanding",
];

pub const NEGATIVE_WORDS: [&str; 10] = [
    "horrible", "terrible", "awful", "bad", "poor", "dreadful", "mediocre", "disappointing", "lousy", "nasty",
];

const ASPECT_CONTEXT: [[&str; 5]; 3] = [
    ["ate", "ordered", "tasted", "portion", "menu"],
    ["asked", "served", "waited", "attention", "tip"],
    ["decorated", "seating", "vibe", "sat", "lights"],
];

const POLARITY_CONTEXT: [[&str; 5]; 2] = [
    ["recommend", "love", "enjoyed", "return", "happy"],
    ["avoid", "never", "complained", "refund", "sadly"],
];

const INTENSIFIERS: [&str; 4] = ["really", "truly", "quite", "absolutely"];

const FILLERS: [&str; 8] = ["place", "restaurant", "tonight", "overall", "visit", "dinner", "friends", "week"];

/// A generated sentence with its planted labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSentence {
    pub text: String,
    pub aspect: usize,
    pub polarity: Polarity,
}

impl PlantedSentence {
    pub fn to_document(&self, id: String) -> RawDocument {
        RawDocument {
            id,
            text: self.text.clone(),
            gold: Some(GoldLabel {
                aspect: Some(ASPECTS[self.aspect].to_string()),
                polarity: Some(self.polarity),
            }),
            split: false,
        }
    }
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).copied().unwrap()
}

// weight 1/(r+1) for the noun at rank r
fn noun<'a, R: Rng>(rng: &mut R, terms: &[&'a str]) -> &'a str {
    let zipf = WeightedIndex::new((1..=terms.len()).map(|r| 1.0 / r as f64)).unwrap();
    terms[zipf.sample(rng)]
}

fn sentence<R: Rng>(rng: &mut R, aspect: usize, polarity: Polarity) -> String {
    let q = polarity.index();
    let opinions: &[&str] = if polarity == Polarity::Positive {
        &POSITIVE_WORDS
    } else {
        &NEGATIVE_WORDS
    };
    let n = noun(rng, &ASPECT_TERMS[aspect]);
    let n2 = noun(rng, &ASPECT_TERMS[aspect]);
    let o = pick(rng, opinions);
    let i = pick(rng, &INTENSIFIERS);
    let c = pick(rng, &ASPECT_CONTEXT[aspect]);
    let p = pick(rng, &POLARITY_CONTEXT[q]);
    let f = pick(rng, &FILLERS);
    let mut s = match rng.gen_range(0..5) {
        0 => format!("the {n} was {i} {o}"),
        1 => format!("{i} {o} {n} and {n2}"),
        2 => format!("we {c} the {n} and the {n2}, it was {o}"),
        3 => format!("{o} {n} at the {f}"),
        _ => format!("the {n} {c} was {o}"),
    };
    if rng.gen_bool(0.5) {
        s = format!("{s}, {p} it");
    }
    s.push('.');
    s
}

/// `n` sentences cycling through the six (aspect, polarity) cells, so every
/// cell gets `n / 6` sentences (±1).
pub fn generate(n: usize, seed: u64) -> Vec<PlantedSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let aspect = k % 3;
            let polarity = Polarity::ALL[(k / 3) % 2];
            PlantedSentence {
                text: sentence(&mut rng, aspect, polarity),
                aspect,
                polarity,
            }
        })
        .collect()
}

fn words(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

/// One seed per aspect: the `choice`-th most frequent planted noun of each aspect, with
/// `excellent` / `horrible` as polarity seeds.
pub fn seed_config(choice: usize) -> SeedConfiguration {
    SeedConfiguration {
        language: "en".into(),
        aspects: ASPECTS
            .iter()
            .zip(ASPECT_TERMS)
            .map(|(name, terms)| AspectSpec {
                name: name.to_string(),
                seeds: vec![terms[choice % terms.len()].to_string()],
            })
            .collect(),
        positive_seeds: words(&[POSITIVE_WORDS[0]]),
        negative_seeds: words(&[NEGATIVE_WORDS[0]]),
    }
}

/// Two service nouns in place of the polarity seeds: `waitress` positive,
/// `waiter` negative.
pub fn nonsense_polarity_config() -> SeedConfiguration {
    let mut c = seed_config(0);
    c.positive_seeds = words(&[ASPECT_TERMS[1][3]]);
    c.negative_seeds = words(&[ASPECT_TERMS[1][1]]);
    c
}

pub fn opinion_lexicon() -> Vec<String> {
    words(&POSITIVE_WORDS).into_iter().chain(words(&NEGATIVE_WORDS)).collect()
}

pub fn aspect_term_list() -> Vec<String> {
    ASPECT_TERMS.iter().flat_map(|t| words(t)).collect()
}

//! Seeded synthetic corpora with planted structure, for desk-scale checks
//! and the browser demo.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::augment::{Label, LabeledDocument};
use crate::eval::{WordPair, WordPairBenchmark};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopicCorpusSpec {
    pub num_docs: usize,
    pub num_topics: usize,
    pub words_per_topic: usize,
    /// Distinct topic words drawn into each document.
    pub words_per_doc: usize,
    /// Probability that a document also receives one word from another topic.
    pub noise: f64,
    pub seed: u64,
}

impl Default for TopicCorpusSpec {
    fn default() -> Self {
        Self {
            num_docs: 500,
            num_topics: 2,
            words_per_topic: 25,
            words_per_doc: 6,
            noise: 0.1,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TopicCorpus {
    pub docs: Vec<Vec<String>>,
    /// `(word, topic)` for every planted word.
    pub words: Vec<(String, usize)>,
}

pub fn topic_word(topic: usize, i: usize) -> String {
    format!("t{topic}w{i:02}")
}

impl TopicCorpus {
    pub fn generate(spec: &TopicCorpusSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let words: Vec<(String, usize)> = (0..spec.num_topics)
            .flat_map(|t| (0..spec.words_per_topic).map(move |i| (topic_word(t, i), t)))
            .collect();
        let per_doc = spec.words_per_doc.min(spec.words_per_topic);
        let docs = (0..spec.num_docs)
            .map(|d| {
                let topic = d % spec.num_topics;
                let pool: Vec<usize> = (0..spec.words_per_topic).collect();
                let mut doc: Vec<String> = pool
                    .choose_multiple(&mut rng, per_doc)
                    .map(|&i| topic_word(topic, i))
                    .collect();
                if spec.num_topics > 1 && rng.gen_bool(spec.noise) {
                    let other = (topic + rng.gen_range(1..spec.num_topics)) % spec.num_topics;
                    doc.push(topic_word(other, rng.gen_range(0..spec.words_per_topic)));
                }
                doc.shuffle(&mut rng);
                doc
            })
            .collect();
        Self { docs, words }
    }

    /// Every word pair, scored 1 within a topic and 0 across topics.
    pub fn planted_benchmark(&self) -> WordPairBenchmark {
        let mut pairs = Vec::new();
        for (i, (a, ta)) in self.words.iter().enumerate() {
            for (b, tb) in &self.words[i + 1..] {
                pairs.push(WordPair {
                    a: a.clone(),
                    b: b.clone(),
                    human: if ta == tb { 1.0 } else { 0.0 },
                });
            }
        }
        WordPairBenchmark {
            name: "planted-topics".into(),
            pairs,
        }
    }
}

pub const POSITIVE_WORDS: &[&str] = &[
    "great", "superb", "brilliant", "moving", "charming", "delightful", "masterful", "wonderful",
    "gripping", "funny",
];
pub const NEGATIVE_WORDS: &[&str] = &[
    "boring", "awful", "dull", "confusing", "chaotic", "clumsy", "tedious", "messy", "weak",
    "forgettable",
];
pub const NEUTRAL_WORDS: &[&str] = &[
    "movie", "film", "plot", "actor", "scene", "story", "director", "camera", "ending", "music",
    "cast", "script", "hour", "screen", "character", "dialogue", "sequel", "studio", "budget",
    "costume",
];

/// Reviews with a few polarity words among neutral filler; each polarity word
/// comes from the opposite list with probability `flip`.
pub fn sentiment_corpus(num_docs: usize, flip: f64, seed: u64) -> Vec<LabeledDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_docs)
        .map(|_| {
            let positive = rng.gen_bool(0.5);
            let mut words: Vec<&str> = NEUTRAL_WORDS.choose_multiple(&mut rng, 6).copied().collect();
            for _ in 0..2 {
                let own = positive != rng.gen_bool(flip);
                let list = if own { POSITIVE_WORDS } else { NEGATIVE_WORDS };
                words.push(list.choose(&mut rng).expect("non-empty"));
            }
            words.shuffle(&mut rng);
            LabeledDocument::new(&words.join(" "), Label::from_bit(positive))
        })
        .collect()
}

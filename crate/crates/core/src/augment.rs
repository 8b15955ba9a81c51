//! Similarity-guided data augmentation and the clause-based sentiment
//! classifier.
//!
//! Positive documents have tokens swapped for their most similar words,
//! negative documents for their least similar ones. The classifier is a
//! single-output machine over negation-closed presence vectors.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{tokenize, Vocabulary};
use crate::cotm::{ClauseBank, CotmParams, LiteralVector};
use crate::embedding::EmbeddingMatrix;
use crate::error::{invalid, io_err, Error, Result};
use crate::eval::cosine;
use crate::phase1::word_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Self::Positive
        } else {
            Self::Negative
        }
    }

    pub fn bit(self) -> bool {
        self == Self::Positive
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    pub tokens: Vec<String>,
    pub label: Label,
}

impl LabeledDocument {
    pub fn new(text: &str, label: Label) -> Self {
        Self {
            tokens: tokenize(text),
            label,
        }
    }

    /// In-vocabulary word indices, deduplicated.
    pub fn presence(&self, vocab: &Vocabulary) -> Vec<usize> {
        let mut idx: Vec<usize> = self.tokens.iter().filter_map(|t| vocab.index_of(t)).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    pub fn encode(&self, vocab: &Vocabulary) -> LiteralVector {
        LiteralVector::from_features(vocab.len(), self.presence(vocab)).expect("vocabulary indices")
    }
}

/// Reads aligned document and label files (labels are `0` or `1`).
pub fn read_labeled(docs: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Vec<LabeledDocument>> {
    let (docs, labels) = (docs.as_ref(), labels.as_ref());
    let text = fs::read_to_string(docs).map_err(io_err(docs))?;
    let label_text = fs::read_to_string(labels).map_err(io_err(labels))?;
    let lines: Vec<&str> = text.lines().collect();
    let label_lines: Vec<&str> = label_text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() != label_lines.len() {
        return Err(invalid(
            "labels",
            format!("{} documents but {} labels", lines.len(), label_lines.len()),
        ));
    }
    lines
        .iter()
        .zip(&label_lines)
        .enumerate()
        .map(|(i, (doc, lab))| {
            let label = match lab.trim() {
                "0" => Label::Negative,
                "1" => Label::Positive,
                other => {
                    return Err(Error::Parse {
                        source_name: labels.display().to_string(),
                        line: i + 1,
                        reason: format!("label must be 0 or 1, got `{other}`"),
                    })
                }
            };
            Ok(LabeledDocument::new(doc, label))
        })
        .collect()
}

pub fn write_labeled(
    docs: &[LabeledDocument],
    docs_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<()> {
    let mut text = String::new();
    let mut labels = String::new();
    for d in docs {
        text.push_str(&d.tokens.join(" "));
        text.push('\n');
        labels.push_str(if d.label.bit() { "1\n" } else { "0\n" });
    }
    let (dp, lp) = (docs_path.as_ref(), labels_path.as_ref());
    fs::write(dp, text).map_err(io_err(dp))?;
    fs::write(lp, labels).map_err(io_err(lp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    MostSimilar,
    LeastSimilar,
}

/// Ranks every other embedded word by cosine to `word`. Zero vectors are
/// not candidates; ties go to the earlier row.
pub fn nearest_words(
    embeddings: &EmbeddingMatrix,
    word: &str,
    n: usize,
    order: Order,
) -> Result<Vec<(String, f64)>> {
    let target = embeddings
        .get(word)
        .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
    if target.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut scored: Vec<(usize, f64)> = Vec::new();
    for (i, (w, row)) in embeddings.words().iter().zip(embeddings.rows()).enumerate() {
        if w == word {
            continue;
        }
        match cosine(target, row) {
            Ok(c) => scored.push((i, c)),
            Err(Error::ZeroVector) => {}
            Err(e) => return Err(e),
        }
    }
    scored.sort_by(|a, b| {
        let by_score = match order {
            Order::MostSimilar => b.1.total_cmp(&a.1),
            Order::LeastSimilar => a.1.total_cmp(&b.1),
        };
        by_score.then(a.0.cmp(&b.0))
    });
    scored.truncate(n);
    Ok(scored
        .into_iter()
        .map(|(i, c)| (embeddings.words()[i].clone(), c))
        .collect())
}

/// Function words never offered as substitutes.
pub const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "from", "had", "has", "have",
    "he", "her", "his", "i", "if", "in", "into", "is", "it", "its", "me", "my", "no", "not", "of",
    "on", "or", "our", "she", "so", "than", "that", "the", "their", "them", "then", "there",
    "these", "they", "this", "to", "was", "we", "were", "what", "when", "which", "who", "will",
    "with", "you", "your",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentConfig {
    /// Fraction of replaceable tokens to substitute, in `(0, 1]`.
    pub replace_fraction: f64,
    pub pool_size: usize,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            replace_fraction: 0.15,
            pool_size: 10,
            seed: 42,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.replace_fraction > 0.0 && self.replace_fraction <= 1.0) {
            return Err(invalid("replace_fraction", "must lie in (0, 1]"));
        }
        if self.pool_size == 0 {
            return Err(invalid("pool_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// Substitution candidates per embedded word.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimilarityPools {
    similar: HashMap<String, Vec<String>>,
    dissimilar: HashMap<String, Vec<String>>,
}

impl SimilarityPools {
    pub fn build(embeddings: &EmbeddingMatrix, pool_size: usize) -> Result<Self> {
        let mut pools = Self::default();
        let everything = embeddings.len();
        for word in embeddings.words() {
            if STOPWORDS.contains(&word.as_str()) {
                continue;
            }
            let keep = |ranked: Vec<(String, f64)>| -> Vec<String> {
                ranked
                    .into_iter()
                    .map(|(w, _)| w)
                    .filter(|w| !STOPWORDS.contains(&w.as_str()))
                    .take(pool_size)
                    .collect()
            };
            let most = match nearest_words(embeddings, word, everything, Order::MostSimilar) {
                Ok(r) => r,
                Err(Error::ZeroVector) => continue,
                Err(e) => return Err(e),
            };
            let least = nearest_words(embeddings, word, everything, Order::LeastSimilar)?;
            let most = keep(most);
            let least = keep(least);
            if !most.is_empty() {
                pools.similar.insert(word.clone(), most);
            }
            if !least.is_empty() {
                pools.dissimilar.insert(word.clone(), least);
            }
        }
        Ok(pools)
    }

    pub fn pool(&self, word: &str, label: Label) -> Option<&[String]> {
        match label {
            Label::Positive => self.similar.get(word),
            Label::Negative => self.dissimilar.get(word),
        }
        .map(Vec::as_slice)
    }

    /// `word<TAB>similar…<TAB>dissimilar…`, sorted by word.
    pub fn dump_text(&self) -> String {
        let mut words: Vec<&String> = self.similar.keys().chain(self.dissimilar.keys()).collect();
        words.sort();
        words.dedup();
        let mut out = String::from("# word\tmost-similar\tleast-similar\n");
        for w in words {
            let join = |m: &HashMap<String, Vec<String>>| m.get(w).map(|v| v.join(" ")).unwrap_or_default();
            let _ = writeln!(out, "{w}\t{}\t{}", join(&self.similar), join(&self.dissimilar));
        }
        out
    }
}

/// Replaces `⌈fraction · replaceable⌉` uniformly chosen positions.
pub fn augment_document<R: Rng + ?Sized>(
    doc: &LabeledDocument,
    pools: &SimilarityPools,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> LabeledDocument {
    let replaceable: Vec<usize> = doc
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| pools.pool(t, doc.label).is_some())
        .map(|(i, _)| i)
        .collect();
    let mut out = doc.clone();
    if replaceable.is_empty() {
        return out;
    }
    let budget = ((cfg.replace_fraction * replaceable.len() as f64).ceil() as usize).min(replaceable.len());
    for pick in index::sample(rng, replaceable.len(), budget) {
        let pos = replaceable[pick];
        let pool = pools.pool(&doc.tokens[pos], doc.label).expect("replaceable");
        out.tokens[pos] = pool[rng.gen_range(0..pool.len())].clone();
    }
    out
}

/// One augmented copy per document; document `i` uses its own stream.
pub fn augment_corpus(
    docs: &[LabeledDocument],
    pools: &SimilarityPools,
    cfg: &AugmentConfig,
) -> Result<Vec<LabeledDocument>> {
    cfg.validate()?;
    let one = |(i, d): (usize, &LabeledDocument)| {
        let mut rng = word_rng(cfg.seed, i);
        augment_document(d, pools, cfg, &mut rng)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok(docs.par_iter().enumerate().map(one).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(docs.iter().enumerate().map(one).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub params: CotmParams,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            params: CotmParams {
                num_clauses: 1000,
                threshold: 8000,
                specificity: 2.0,
                state_midpoint: 128,
            },
            epochs: 10,
            seed: 42,
        }
    }
}

/// Trains on every document once per epoch in a freshly shuffled order.
pub fn train_classifier(
    docs: &[LabeledDocument],
    vocab: &Vocabulary,
    cfg: &ClassifierConfig,
) -> Result<ClauseBank> {
    if cfg.epochs == 0 {
        return Err(invalid("epochs", "must be at least 1"));
    }
    let positives = docs.iter().filter(|d| d.label.bit()).count();
    if positives == 0 || positives == docs.len() {
        return Err(Error::SingleClass);
    }
    let mut bank = ClauseBank::new(cfg.params, 1, vocab.len())?;
    let encoded: Vec<(LiteralVector, bool)> = docs.iter().map(|d| (d.encode(vocab), d.label.bit())).collect();
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, q) = &encoded[i];
            bank.update(x, 0, *q, &mut rng)?;
        }
    }
    Ok(bank)
}

pub fn classify(bank: &ClauseBank, vocab: &Vocabulary, doc: &LabeledDocument) -> Result<Label> {
    Ok(Label::from_bit(bank.predict(&doc.encode(vocab))?[0]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// `[actual][predicted]`, index 0 negative, 1 positive.
    pub confusion: [[usize; 2]; 2],
}

impl ClassificationReport {
    pub fn majority_baseline(&self) -> f64 {
        let pos = self.confusion[1][0] + self.confusion[1][1];
        pos.max(self.total - pos) as f64 / self.total as f64
    }
}

pub fn evaluate_classifier(
    bank: &ClauseBank,
    vocab: &Vocabulary,
    docs: &[LabeledDocument],
) -> Result<ClassificationReport> {
    if docs.is_empty() {
        return Err(invalid("documents", "nothing to evaluate"));
    }
    let mut confusion = [[0usize; 2]; 2];
    for d in docs {
        let predicted = classify(bank, vocab, d)?;
        confusion[d.label.bit() as usize][predicted.bit() as usize] += 1;
    }
    let correct = confusion[0][0] + confusion[1][1];
    Ok(ClassificationReport {
        accuracy: correct as f64 / docs.len() as f64,
        correct,
        total: docs.len(),
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn toy_embeddings() -> EmbeddingMatrix {
        let mut m = EmbeddingMatrix::new(3, "toy");
        m.push("movie", vec![1.0, 0.1, 0.0]).unwrap();
        m.push("film", vec![1.0, 0.1, 0.0]).unwrap();
        m.push("plot", vec![0.5, 1.0, 0.0]).unwrap();
        m.push("chaotic", vec![-1.0, 0.0, 0.2]).unwrap();
        m.push("confusing", vec![0.9, 0.3, 0.1]).unwrap();
        m.push("zero", vec![0.0, 0.0, 0.0]).unwrap();
        m
    }

    #[test]
    fn duplicate_vector_ranks_first() {
        let m = toy_embeddings();
        let r = nearest_words(&m, "movie", 2, Order::MostSimilar).unwrap();
        assert_eq!(r[0].0, "film");
        assert!((r[0].1 - 1.0).abs() < 1e-12);
        assert!(r.iter().all(|(w, _)| w != "movie" && w != "zero"));
        assert!(matches!(nearest_words(&m, "zero", 2, Order::MostSimilar), Err(Error::ZeroVector)));
    }

    #[test]
    fn least_is_reverse_of_most_without_ties() {
        let mut m = EmbeddingMatrix::new(2, "toy");
        m.push("a", vec![1.0, 0.0]).unwrap();
        m.push("b", vec![1.0, 1.0]).unwrap();
        m.push("c", vec![0.0, 1.0]).unwrap();
        m.push("d", vec![-1.0, 0.2]).unwrap();
        let most: Vec<String> = nearest_words(&m, "a", 10, Order::MostSimilar).unwrap().into_iter().map(|p| p.0).collect();
        let mut least: Vec<String> = nearest_words(&m, "a", 10, Order::LeastSimilar).unwrap().into_iter().map(|p| p.0).collect();
        least.reverse();
        assert_eq!(most, least);
        assert_eq!(most, ["b", "c", "d"]);
    }

    #[test]
    fn ranking_matches_pairwise_table() {
        let m = toy_embeddings();
        let words = ["movie", "film", "plot", "chaotic", "confusing"];
        for w in words {
            let ranked = nearest_words(&m, w, 10, Order::MostSimilar).unwrap();
            let mut table: Vec<(usize, f64)> = words
                .iter()
                .enumerate()
                .filter(|(_, o)| **o != w)
                .map(|(i, o)| (i, cosine(m.get(w).unwrap(), m.get(o).unwrap()).unwrap()))
                .collect();
            table.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let expected: Vec<&str> = table.iter().map(|(i, _)| words[*i]).collect();
            let got: Vec<&str> = ranked.iter().map(|(s, _)| s.as_str()).collect();
            assert_eq!(got, expected, "{w}");
        }
    }

    #[test]
    fn positive_gets_similar_and_negative_gets_dissimilar() {
        let m = toy_embeddings();
        let pools = SimilarityPools::build(&m, 1).unwrap();
        let cfg = AugmentConfig { replace_fraction: 1.0, pool_size: 1, seed: 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pos = LabeledDocument::new("the movie was great", Label::Positive);
        let out = augment_document(&pos, &pools, &cfg, &mut rng);
        assert_eq!(out.tokens, ["the", "film", "was", "great"]);
        assert_eq!(out.label, Label::Positive);
        let neg = LabeledDocument::new("confusing", Label::Negative);
        let out = augment_document(&neg, &pools, &cfg, &mut rng);
        assert_eq!(out.tokens, ["chaotic"]);
        assert!(pools.dump_text().contains("movie\tfilm\tchaotic"));
    }

    #[test]
    fn nothing_replaceable_is_identity() {
        let pools = SimilarityPools::build(&toy_embeddings(), 3).unwrap();
        let doc = LabeledDocument::new("entirely unknown words", Label::Positive);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(augment_document(&doc, &pools, &AugmentConfig::default(), &mut rng), doc);
    }

    #[test]
    fn config_validation() {
        assert!(AugmentConfig { replace_fraction: 0.0, ..Default::default() }.validate().is_err());
        assert!(AugmentConfig { replace_fraction: 1.5, ..Default::default() }.validate().is_err());
        assert!(AugmentConfig { pool_size: 0, ..Default::default() }.validate().is_err());
        let d = ClassifierConfig::default();
        assert_eq!((d.params.num_clauses, d.params.threshold, d.params.specificity, d.epochs), (1000, 8000, 2.0, 10));
    }

    fn toy_sentiment() -> (Vocabulary, Vec<LabeledDocument>) {
        let vocab = Vocabulary::from_words(["good", "plot", "movie", "actor", "scene", "long"]).unwrap();
        let fillers = ["plot", "movie", "actor", "scene", "long"];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let docs = (0..60)
            .map(|i| {
                let mut words: Vec<&str> = fillers.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                let positive = i % 2 == 0;
                if positive {
                    words.push("good");
                }
                LabeledDocument::new(&words.join(" "), Label::from_bit(positive))
            })
            .collect();
        (vocab, docs)
    }

    #[test]
    fn separable_corpus_is_learned() {
        let (vocab, docs) = toy_sentiment();
        let cfg = ClassifierConfig {
            params: CotmParams { num_clauses: 20, threshold: 10, specificity: 3.0, state_midpoint: 32 },
            epochs: 10,
            seed: 1,
        };
        let bank = train_classifier(&docs, &vocab, &cfg).unwrap();
        let report = evaluate_classifier(&bank, &vocab, &docs).unwrap();
        assert!(report.accuracy >= 0.95, "{report:?}");
        assert!(report.accuracy > report.majority_baseline());
        let again = train_classifier(&docs, &vocab, &cfg).unwrap();
        assert_eq!(bank, again);
    }

    #[test]
    fn single_class_rejected_and_empty_doc_is_negative() {
        let (vocab, docs) = toy_sentiment();
        let pos: Vec<_> = docs.into_iter().filter(|d| d.label.bit()).collect();
        assert!(matches!(train_classifier(&pos, &vocab, &ClassifierConfig::default()), Err(Error::SingleClass)));
        let bank = ClauseBank::new(ClassifierConfig::default().params, 1, vocab.len()).unwrap();
        let empty = LabeledDocument::new("", Label::Positive);
        assert_eq!(classify(&bank, &vocab, &empty).unwrap(), Label::Negative);
    }

    proptest! {
        #[test]
        fn augmentation_keeps_label_and_budget(
            words in prop::collection::vec(prop::sample::select(vec!["movie", "film", "plot", "chaotic", "confusing", "zero", "the", "odd"]), 0..30),
            frac in 0.01f64..=1.0, positive in any::<bool>(), seed in any::<u64>()
        ) {
            let pools = SimilarityPools::build(&toy_embeddings(), 2).unwrap();
            let label = Label::from_bit(positive);
            let doc = LabeledDocument::new(&words.join(" "), label);
            let cfg = AugmentConfig { replace_fraction: frac, pool_size: 2, seed };
            let replaceable = doc.tokens.iter().filter(|t| pools.pool(t, label).is_some()).count();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = augment_document(&doc, &pools, &cfg, &mut rng);
            prop_assert_eq!(out.label, label);
            prop_assert_eq!(out.tokens.len(), doc.tokens.len());
            let changed = out.tokens.iter().zip(&doc.tokens).filter(|(a, b)| a != b).count();
            prop_assert!(changed <= (frac * replaceable as f64).ceil() as usize);
            let mut rng2 = ChaCha8Rng::seed_from_u64(seed);
            prop_assert_eq!(augment_document(&doc, &pools, &cfg, &mut rng2), out);
        }
    }
}

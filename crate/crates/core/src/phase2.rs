//! Clause-based embedding training.
//!
//! Inputs are built from stored knowledge instead of documents: a sample of
//! the target word's clauses of the drawn polarity contributes its literals,
//! and every original-feature literal among them contributes a sample of its
//! own word's clauses of the same polarity. The union of those literals is the
//! input; no negation closure is applied.

use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocabulary;
use crate::cotm::{ClauseBank, LiteralVector};
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::knowledge::{filter_by_polarity, KnowledgeClause, KnowledgeStore};
use crate::phase1::Phase1Config;

/// Same knobs as per-word training: `r`, `a`, epochs, bank parameters, seed.
pub type Phase2Config = Phase1Config;

/// Ordered, duplicate-free target words, all present in the store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetWords(Vec<usize>);

impl TargetWords {
    pub fn new(words: Vec<usize>, store: &KnowledgeStore) -> Result<Self> {
        let mut seen = HashSet::new();
        for &w in &words {
            if !seen.insert(w) {
                return Err(Error::DuplicateTarget(w));
            }
            if store.get(w).is_none() {
                return Err(Error::MissingKnowledge { word: w });
            }
        }
        if words.is_empty() {
            return Err(crate::error::invalid("targets", "at least one target word is required"));
        }
        Ok(Self(words))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A constructed input and the clause samples behind it.
#[derive(Debug, Clone)]
pub struct Phase2Input {
    pub x: LiteralVector,
    /// Indices (into the filtered list) of the first-level clause sample.
    pub first_level: Vec<usize>,
    /// Per expanded literal occurrence: the literal and its clause sample.
    pub second_level: Vec<(usize, Vec<usize>)>,
}

fn sample<R: Rng + ?Sized>(
    clauses: &[&KnowledgeClause],
    window: usize,
    rng: &mut R,
) -> Vec<usize> {
    let amount = window.min(clauses.len());
    index::sample(rng, clauses.len(), amount).into_vec()
}

/// Two-level expansion with the sample indices recorded.
pub fn build_x_phase2_traced<R: Rng + ?Sized>(
    store: &KnowledgeStore,
    word: usize,
    q: bool,
    window: usize,
    rng: &mut R,
) -> Result<Phase2Input> {
    if window == 0 {
        return Err(crate::error::invalid("window", "must be at least 1"));
    }
    let v = store.num_words();
    let knowledge = store.get(word).ok_or(Error::MissingKnowledge { word })?;
    let filtered = filter_by_polarity(knowledge, q);
    if filtered.is_empty() {
        return Err(Error::NoPolarityKnowledge { word, q });
    }
    let mut x = LiteralVector::zeros(v);
    let first_level = sample(&filtered, window, rng);
    let mut second_level = Vec::new();
    for &ci in &first_level {
        for &lit in &filtered[ci].literals {
            let lit = lit as usize;
            x.set(lit);
            // negated literals are activated but have no knowledge of their own
            if lit >= v {
                continue;
            }
            let Some(inner) = store.get(lit) else { continue };
            let inner_filtered = filter_by_polarity(inner, q);
            let picked = sample(&inner_filtered, window, rng);
            for &cj in &picked {
                for &l in &inner_filtered[cj].literals {
                    x.set(l as usize);
                }
            }
            second_level.push((lit, picked));
        }
    }
    Ok(Phase2Input {
        x,
        first_level,
        second_level,
    })
}

pub fn build_x_phase2<R: Rng + ?Sized>(
    store: &KnowledgeStore,
    word: usize,
    q: bool,
    window: usize,
    rng: &mut R,
) -> Result<LiteralVector> {
    build_x_phase2_traced(store, word, q, window, rng).map(|t| t.x)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase2Stats {
    /// `position_counts[i][j]`: times target `i` was visited at position `j`.
    pub position_counts: Vec<Vec<u64>>,
    pub attempted: u64,
    pub skipped: u64,
    pub skipped_per_word: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Phase2Outcome {
    pub bank: ClauseBank,
    pub embeddings: EmbeddingMatrix,
    pub stats: Phase2Stats,
}

/// Trains one `k`-output machine; output `i` belongs to `targets[i]`.
pub fn train_embedding(
    store: &KnowledgeStore,
    vocab: &Vocabulary,
    targets: &TargetWords,
    cfg: &Phase2Config,
) -> Result<Phase2Outcome> {
    cfg.validate()?;
    if !store.is_bound_to(vocab) {
        return Err(Error::VocabularyMismatch);
    }
    let k = targets.len();
    let mut bank = ClauseBank::new(cfg.params, k, vocab.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..k).collect();
    let mut stats = Phase2Stats {
        position_counts: vec![vec![0; k]; k],
        attempted: 0,
        skipped: 0,
        skipped_per_word: vec![0; k],
    };

    for _ in 0..cfg.epochs {
        for _ in 0..cfg.examples_per_epoch {
            order.shuffle(&mut rng);
            let q = rng.gen_bool(0.5);
            for (pos, &slot) in order.iter().enumerate() {
                stats.position_counts[slot][pos] += 1;
                stats.attempted += 1;
                let word = targets.as_slice()[slot];
                match build_x_phase2(store, word, q, cfg.window, &mut rng) {
                    Ok(x) => bank.update(&x, slot, q, &mut rng)?,
                    Err(Error::NoPolarityKnowledge { .. }) => {
                        stats.skipped += 1;
                        stats.skipped_per_word[slot] += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        if stats.skipped * 2 > stats.attempted {
            let detail = targets
                .as_slice()
                .iter()
                .zip(&stats.skipped_per_word)
                .filter(|(_, &s)| s > 0)
                .map(|(&w, s)| format!("{}: {s}", vocab.word(w).unwrap_or("?")))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::ExcessiveSkips {
                skipped: stats.skipped,
                attempted: stats.attempted,
                detail,
            });
        }
    }

    let names: Vec<String> = targets
        .as_slice()
        .iter()
        .map(|&w| vocab.words()[w].clone())
        .collect();
    let embeddings = EmbeddingMatrix::from_bank(&bank, &names)?;
    Ok(Phase2Outcome {
        bank,
        embeddings,
        stats,
    })
}

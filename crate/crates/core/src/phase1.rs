//! Per-word knowledge extraction from documents.
//!
//! Each vocabulary word gets its own single-output machine. Every training
//! example flips a fair coin for the target `q`, samples up to `a` documents
//! that contain the word (`q = 1`) or lack it (`q = 0`), and activates the
//! union of their words plus the negation of everything else.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{DocumentSet, Vocabulary};
use crate::cotm::{ClauseBank, CotmParams, LiteralVector};
use crate::error::{invalid, Error, Result};
use crate::knowledge::{KnowledgeStatus, KnowledgeStore, WordKnowledge};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase1Config {
    /// Examples per epoch, `r`.
    pub examples_per_epoch: usize,
    /// Window size `a`: documents merged into one example.
    pub window: usize,
    pub epochs: usize,
    pub params: CotmParams,
    pub seed: u64,
}

impl Default for Phase1Config {
    fn default() -> Self {
        Self {
            examples_per_epoch: 2000,
            window: 25,
            epochs: 25,
            params: CotmParams {
                num_clauses: 1600,
                threshold: 3200,
                specificity: 5.0,
                state_midpoint: 128,
            },
            seed: 42,
        }
    }
}

impl Phase1Config {
    pub fn validate(&self) -> Result<()> {
        if self.examples_per_epoch == 0 {
            return Err(invalid("examples_per_epoch", "must be at least 1"));
        }
        if self.window == 0 {
            return Err(invalid("window", "must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be at least 1"));
        }
        self.params.validate()
    }
}

/// Independent, reproducible stream for one word.
pub fn word_rng(seed: u64, word: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(word as u64);
    rng
}

/// One constructed input together with the documents that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase1Example {
    pub x: LiteralVector,
    pub documents: Vec<u32>,
}

/// Supporting and non-supporting document ids for one word.
struct Eligible<'a> {
    with: &'a [u32],
    without: Vec<u32>,
}

impl<'a> Eligible<'a> {
    fn new(ds: &'a DocumentSet, word: usize) -> Result<Self> {
        if word >= ds.num_words() {
            return Err(Error::OutOfRange {
                index: word,
                limit: ds.num_words(),
            });
        }
        Ok(Self {
            with: ds.containing(word),
            without: ds.not_containing(word),
        })
    }

    fn pool(&self, word: usize, q: bool) -> Result<&[u32]> {
        let pool: &[u32] = if q { self.with } else { &self.without };
        if pool.is_empty() {
            return Err(if q {
                Error::NoSupportingDocuments { word }
            } else {
                Error::NoNonSupportingDocuments { word }
            });
        }
        Ok(pool)
    }
}

fn assemble<R: Rng + ?Sized>(
    ds: &DocumentSet,
    pool: &[u32],
    window: usize,
    rng: &mut R,
) -> Phase1Example {
    let amount = window.min(pool.len());
    let documents: Vec<u32> = index::sample(rng, pool.len(), amount)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    let mut present = vec![false; ds.num_words()];
    for &d in &documents {
        for &w in ds.document(d as usize) {
            present[w as usize] = true;
        }
    }
    let x = LiteralVector::from_features(
        ds.num_words(),
        present.iter().enumerate().filter(|(_, &p)| p).map(|(w, _)| w),
    )
    .expect("document words are in range");
    Phase1Example { x, documents }
}

/// Samples `min(a, eligible)` distinct documents and encodes their union.
pub fn build_x_from_documents<R: Rng + ?Sized>(
    ds: &DocumentSet,
    word: usize,
    q: bool,
    window: usize,
    rng: &mut R,
) -> Result<Phase1Example> {
    if window == 0 {
        return Err(invalid("window", "must be at least 1"));
    }
    let eligible = Eligible::new(ds, word)?;
    let pool = eligible.pool(word, q)?;
    Ok(assemble(ds, pool, window, rng))
}

/// Trains the word's machine and returns the bank itself.
pub fn train_word_bank(ds: &DocumentSet, word: usize, cfg: &Phase1Config) -> Result<ClauseBank> {
    cfg.validate()?;
    let eligible = Eligible::new(ds, word)?;
    eligible.pool(word, true)?;
    eligible.pool(word, false)?;

    let mut bank = ClauseBank::new(cfg.params, 1, ds.num_words())?;
    let mut rng = word_rng(cfg.seed, word);
    for _ in 0..cfg.epochs {
        for _ in 0..cfg.examples_per_epoch {
            let q = rng.gen_bool(0.5);
            let pool = eligible.pool(word, q)?;
            let example = assemble(ds, pool, cfg.window, &mut rng);
            bank.update(&example.x, 0, q, &mut rng)?;
        }
    }
    Ok(bank)
}

pub fn train_word(ds: &DocumentSet, word: usize, cfg: &Phase1Config) -> Result<WordKnowledge> {
    let bank = train_word_bank(ds, word, cfg)?;
    Ok(WordKnowledge::from_bank(word, &bank, 0))
}

/// Outcome of training every vocabulary word.
#[derive(Debug)]
pub struct Phase1Report {
    pub store: KnowledgeStore,
    /// Words that could not be trained; each also has a flagged, empty entry.
    pub failures: Vec<(usize, Error)>,
}

fn train_or_flag(ds: &DocumentSet, word: usize, cfg: &Phase1Config) -> Result<(WordKnowledge, Option<Error>)> {
    match train_word(ds, word, cfg) {
        Ok(k) => Ok((k, None)),
        Err(e @ Error::NoSupportingDocuments { .. }) => Ok((
            WordKnowledge::failed(word, KnowledgeStatus::NoSupportingDocuments),
            Some(e),
        )),
        Err(e @ Error::NoNonSupportingDocuments { .. }) => Ok((
            WordKnowledge::failed(word, KnowledgeStatus::NoNonSupportingDocuments),
            Some(e),
        )),
        Err(e) => Err(e),
    }
}

/// Trains every vocabulary word independently on up to `jobs` workers.
///
/// Each word draws from its own seeded stream, so the store is identical for
/// any worker count.
pub fn train_all(
    ds: &DocumentSet,
    vocab: &Vocabulary,
    cfg: &Phase1Config,
    jobs: usize,
) -> Result<Phase1Report> {
    cfg.validate()?;
    if ds.num_words() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            actual: ds.num_words(),
        });
    }
    let results = run_words(ds, vocab.len(), cfg, jobs.max(1))?;
    let mut store = KnowledgeStore::new(vocab);
    let mut failures = Vec::new();
    for (k, err) in results {
        if let Some(e) = err {
            failures.push((k.word, e));
        }
        store.insert(k)?;
    }
    Ok(Phase1Report { store, failures })
}

#[cfg(feature = "parallel")]
fn run_words(
    ds: &DocumentSet,
    num_words: usize,
    cfg: &Phase1Config,
    jobs: usize,
) -> Result<Vec<(WordKnowledge, Option<Error>)>> {
    use rayon::prelude::*;
    if jobs == 1 {
        return (0..num_words).map(|w| train_or_flag(ds, w, cfg)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| invalid("jobs", e.to_string()))?;
    pool.install(|| {
        (0..num_words)
            .into_par_iter()
            .map(|w| train_or_flag(ds, w, cfg))
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
fn run_words(
    ds: &DocumentSet,
    num_words: usize,
    cfg: &Phase1Config,
    _jobs: usize,
) -> Result<Vec<(WordKnowledge, Option<Error>)>> {
    (0..num_words).map(|w| train_or_flag(ds, w, cfg)).collect()
}

/// Replaces a single word's entry, leaving every other entry untouched.
pub fn retrain_word(
    store: &mut KnowledgeStore,
    ds: &DocumentSet,
    word: usize,
    cfg: &Phase1Config,
) -> Result<Option<Error>> {
    let (k, err) = train_or_flag(ds, word, cfg)?;
    store.insert(k)?;
    Ok(err)
}

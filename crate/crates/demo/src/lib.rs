//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function has a plain Rust twin returning `Result<String,
//! String>` so the logic is testable off the browser. Results are JSON text.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

use tmae::corpus::{build_vocabulary, tokenize, vectorize};
use tmae::cotm::CotmParams;
use tmae::eval::{cosine, evaluate, kendall, spearman};
use tmae::phase1::{build_x_from_documents, train_all, Phase1Config};
use tmae::phase2::{train_embedding, TargetWords};
use tmae::synthetic::{TopicCorpus, TopicCorpusSpec};

fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "null".into()
    }
}

fn json_list<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String) -> String {
    let parts: Vec<String> = items.into_iter().map(f).collect();
    format!("[{}]", parts.join(","))
}

/// Phase-1 input for one word over a small corpus (one document per line).
pub fn phase1_input(corpus: &str, word: &str, window: usize, positive: bool, seed: u32) -> Result<String, String> {
    let raw: Vec<Vec<String>> = corpus.lines().map(tokenize).filter(|d| !d.is_empty()).collect();
    let vocab = build_vocabulary(&raw, 64).map_err(|e| e.to_string())?;
    let ds = vectorize(&raw, &vocab);
    let target = tokenize(word).into_iter().next().unwrap_or_default();
    let w = vocab
        .index_of(&target)
        .ok_or_else(|| format!("`{target}` does not occur in the corpus"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let ex = build_x_from_documents(&ds, w, positive, window, &mut rng).map_err(|e| e.to_string())?;
    let lits = (0..2 * vocab.len()).map(|l| vocab.literal_name(l));
    Ok(format!(
        "{{\"literals\":{},\"bits\":{},\"documents\":{}}}",
        json_list(lits, |s| json_str(&s)),
        json_list(ex.x.to_bits(), |b| b.to_string()),
        json_list(ex.documents, |d| d.to_string()),
    ))
}

/// Runs both phases on a generated topic corpus and returns the pairwise
/// cosine matrix of the learned embeddings.
pub fn topic_similarity(topics: usize, words_per_topic: usize, docs: usize, seed: u32) -> Result<String, String> {
    if !(1..=4).contains(&topics) || !(2..=12).contains(&words_per_topic) || !(20..=1000).contains(&docs) {
        return Err("topics in 1..=4, words per topic in 2..=12, documents in 20..=1000".into());
    }
    let spec = TopicCorpusSpec {
        num_docs: docs,
        num_topics: topics,
        words_per_topic,
        words_per_doc: (words_per_topic / 2).max(2),
        noise: 0.1,
        seed: seed as u64,
    };
    let corpus = TopicCorpus::generate(&spec);
    let mut words: Vec<String> = corpus.words.iter().map(|(w, _)| w.clone()).collect();
    let vocab = build_vocabulary(&corpus.docs, words.len()).map_err(|e| e.to_string())?;
    let ds = vectorize(&corpus.docs, &vocab);
    let cfg = Phase1Config {
        examples_per_epoch: 200,
        window: 3,
        epochs: 10,
        params: CotmParams { num_clauses: 40, threshold: 20, specificity: 5.0, state_midpoint: 128 },
        seed: seed as u64,
    };
    let report = train_all(&ds, &vocab, &cfg, 1).map_err(|e| e.to_string())?;
    let trained: Vec<usize> = (0..vocab.len())
        .filter(|&w| report.store.get(w).is_some_and(|k| !k.is_flagged()))
        .collect();
    let targets = TargetWords::new(trained, &report.store).map_err(|e| e.to_string())?;
    let emb = train_embedding(&report.store, &vocab, &targets, &Phase1Config { examples_per_epoch: 100, ..cfg })
        .map_err(|e| e.to_string())?
        .embeddings;
    words.retain(|w| emb.get(w).is_some());
    let matrix = json_list(&words, |a| {
        json_list(&words, |b| {
            json_num(cosine(emb.get(a).expect("kept"), emb.get(b).expect("kept")).unwrap_or(f64::NAN))
        })
    });
    let rho = if topics > 1 {
        evaluate(&emb, &corpus.planted_benchmark()).map(|r| r.spearman).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    Ok(format!(
        "{{\"words\":{},\"matrix\":{matrix},\"spearman\":{}}}",
        json_list(&words, |w| json_str(w)),
        json_num(rho)
    ))
}

fn parse_numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect()
}

/// Spearman and Kendall correlation of two number lists.
pub fn rank_correlation(xs: &str, ys: &str) -> Result<String, String> {
    let (x, y) = (parse_numbers(xs)?, parse_numbers(ys)?);
    if x.len() != y.len() || x.len() < 2 {
        return Err("need two lists of equal length, at least 2".into());
    }
    let s = spearman(&x, &y).map_err(|e| e.to_string())?;
    let k = kendall(&x, &y).map_err(|e| e.to_string())?;
    Ok(format!("{{\"spearman\":{},\"kendall\":{}}}", json_num(s), json_num(k)))
}

#[wasm_bindgen(js_name = phase1Input)]
pub fn phase1_input_js(corpus: &str, word: &str, window: usize, positive: bool, seed: u32) -> Result<String, JsValue> {
    phase1_input(corpus, word, window, positive, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = topicSimilarity)]
pub fn topic_similarity_js(topics: usize, words_per_topic: usize, docs: usize, seed: u32) -> Result<String, JsValue> {
    topic_similarity(topics, words_per_topic, docs, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = rankCorrelation)]
pub fn rank_correlation_js(xs: &str, ys: &str) -> Result<String, JsValue> {
    rank_correlation(xs, ys).map_err(|e| JsValue::from_str(&e))
}

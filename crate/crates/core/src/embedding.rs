//! Named real-valued vectors over the literal space and their text formats.
//!
//! Dense: `word v0 v1 … v(2V-1)` per line. Sparse: `word l:v l:v …` with zero
//! coordinates omitted. Both start with a `# dim=<2V> source=<rule>` header.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::cotm::ClauseBank;
use crate::error::{io_err, Error, Result};
use crate::knowledge::{KnowledgeStatus, KnowledgeStore};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    source: String,
    words: Vec<String>,
    rows: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

/// `e[l] = Σ_c weight[c][o] · include(c, l)`.
pub fn extract_embedding(bank: &ClauseBank, output: usize) -> Vec<f64> {
    let mut e = vec![0.0; bank.num_literals()];
    for c in 0..bank.num_clauses() {
        let w = bank.weight(c, output);
        if w == 0 {
            continue;
        }
        for l in bank.included_literals(c) {
            e[l] += w as f64;
        }
    }
    e
}

pub const WEIGHTED_LITERALS: &str = "weighted-literal-accumulation";

impl EmbeddingMatrix {
    pub fn new(dim: usize, source: impl Into<String>) -> Self {
        Self {
            dim,
            source: source.into(),
            words: Vec::new(),
            rows: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn push(&mut self, word: impl Into<String>, row: Vec<f64>) -> Result<()> {
        let word = word.into();
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::invalid("embedding", format!("non-finite value in `{word}`")));
        }
        if self.index.contains_key(&word) {
            return Err(crate::error::invalid("embedding", format!("duplicate word `{word}`")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.rows.push(row);
        Ok(())
    }

    /// One row per output of a trained bank; `names[o]` labels output `o`.
    pub fn from_bank(bank: &ClauseBank, names: &[String]) -> Result<Self> {
        let mut m = Self::new(bank.num_literals(), WEIGHTED_LITERALS);
        for (o, name) in names.iter().enumerate().take(bank.num_outputs()) {
            m.push(name.clone(), extract_embedding(bank, o))?;
        }
        Ok(m)
    }

    /// The same accumulation applied directly to each trained word's stored
    /// clauses.
    pub fn from_knowledge(store: &KnowledgeStore, vocab: &Vocabulary) -> Result<Self> {
        if !store.is_bound_to(vocab) {
            return Err(Error::VocabularyMismatch);
        }
        let mut m = Self::new(2 * vocab.len(), "knowledge-literal-accumulation");
        for entry in store.iter() {
            if entry.status != KnowledgeStatus::Trained {
                continue;
            }
            let mut row = vec![0.0; m.dim];
            for clause in &entry.clauses {
                for &l in &clause.literals {
                    row[l as usize] += clause.weight as f64;
                }
            }
            m.push(vocab.words()[entry.word].clone(), row)?;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.rows[i].as_slice())
    }

    pub fn position(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn to_dense_text(&self) -> String {
        let mut out = format!("# dim={} source={}\n", self.dim, self.source);
        for (w, row) in self.words.iter().zip(&self.rows) {
            out.push_str(w);
            for v in row {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_sparse_text(&self) -> String {
        let mut out = format!("# dim={} source={}\n", self.dim, self.source);
        for (w, row) in self.words.iter().zip(&self.rows) {
            out.push_str(w);
            for (l, v) in row.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                let _ = write!(out, " {l}:{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses either format.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let perr = |line: usize, reason: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            reason,
        };
        let mut dim: Option<usize> = None;
        let mut source = String::from("unknown");
        let mut m: Option<Self> = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split_whitespace() {
                    if let Some(d) = field.strip_prefix("dim=") {
                        dim = Some(d.parse().map_err(|_| perr(n, format!("bad dim `{d}`")))?);
                    } else if let Some(s) = field.strip_prefix("source=") {
                        source = s.to_string();
                    }
                }
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().expect("non-empty line");
            let values: Vec<&str> = fields.collect();
            let sparse = values.iter().any(|v| v.contains(':')) || (values.is_empty() && dim.is_some());
            let row = if sparse {
                let d = dim.ok_or_else(|| perr(n, "sparse row without a `# dim=` header".into()))?;
                let mut row = vec![0.0; d];
                for pair in values {
                    let (l, v) = pair
                        .split_once(':')
                        .ok_or_else(|| perr(n, format!("expected literal:value, got `{pair}`")))?;
                    let l: usize = l.parse().map_err(|_| perr(n, format!("bad literal `{l}`")))?;
                    if l >= d {
                        return Err(perr(n, format!("literal {l} ≥ dim {d}")));
                    }
                    row[l] = v.parse().map_err(|_| perr(n, format!("bad value `{v}`")))?;
                }
                row
            } else {
                values
                    .iter()
                    .map(|v| v.parse::<f64>().map_err(|_| perr(n, format!("bad value `{v}`"))))
                    .collect::<Result<Vec<_>>>()?
            };
            let m = m.get_or_insert_with(|| Self::new(dim.unwrap_or(row.len()), source.clone()));
            m.push(word, row).map_err(|e| perr(n, e.to_string()))?;
        }
        Ok(m.unwrap_or_else(|| Self::new(dim.unwrap_or(0), source)))
    }

    pub fn save(&self, path: impl AsRef<Path>, sparse: bool) -> Result<()> {
        let text = if sparse { self.to_sparse_text() } else { self.to_dense_text() };
        crate::knowledge::write_atomic(path.as_ref(), text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cotm::CotmParams;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bank(clauses: usize, outputs: usize, v: usize) -> ClauseBank {
        let p = CotmParams {
            num_clauses: clauses,
            threshold: 10,
            specificity: 3.0,
            state_midpoint: 4,
        };
        ClauseBank::new(p, outputs, v).unwrap()
    }

    #[test]
    fn zero_weights_give_zero_vector() {
        let mut b = bank(3, 1, 4);
        b.set_state(0, 2, 8);
        assert!(extract_embedding(&b, 0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_clause_accumulates_its_literals() {
        let mut b = bank(1, 1, 5);
        b.set_state(0, 3, 5);
        b.set_state(0, 7, 8);
        b.set_weight(0, 0, 2);
        let e = extract_embedding(&b, 0);
        for (l, v) in e.iter().enumerate() {
            assert_eq!(*v, if l == 3 || l == 7 { 2.0 } else { 0.0 });
        }
    }

    fn random_bank(rng: &mut ChaCha8Rng, outputs: usize) -> ClauseBank {
        let mut b = bank(6, outputs, 5);
        for c in 0..6 {
            for l in 0..10 {
                b.set_state(c, l, rng.gen_range(1..=8));
            }
            for o in 0..outputs {
                b.set_weight(c, o, rng.gen_range(-5..=5));
            }
        }
        b
    }

    proptest! {
        #[test]
        fn matches_naive_double_loop(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_bank(&mut rng, 3);
            for o in 0..3 {
                let fast = extract_embedding(&b, o);
                for (l, &value) in fast.iter().enumerate() {
                    let mut naive = 0i64;
                    for c in 0..6 {
                        if b.state(c, l) > 4 {
                            naive += b.weight(c, o) as i64;
                        }
                    }
                    prop_assert_eq!(value, naive as f64);
                }
            }
        }

        #[test]
        fn extraction_is_linear_in_weights(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_bank(&mut rng, 1);
            let mut b = a.clone();
            let mut sum = a.clone();
            for c in 0..6 {
                let w: i32 = rng.gen_range(-5..=5);
                b.set_weight(c, 0, w);
                sum.set_weight(c, 0, a.weight(c, 0) + w);
            }
            let (ea, eb, es) = (extract_embedding(&a, 0), extract_embedding(&b, 0), extract_embedding(&sum, 0));
            for l in 0..10 {
                prop_assert_eq!(ea[l] + eb[l], es[l]);
            }
        }

        #[test]
        fn text_formats_round_trip(rows in prop::collection::vec(
            prop::collection::vec(prop_oneof![Just(0.0), -1e6f64..1e6], 6), 1..5)
        ) {
            let mut m = EmbeddingMatrix::new(6, WEIGHTED_LITERALS);
            for (i, r) in rows.into_iter().enumerate() {
                m.push(format!("w{i}"), r).unwrap();
            }
            prop_assert_eq!(&EmbeddingMatrix::parse(&m.to_dense_text(), "dense").unwrap(), &m);
            prop_assert_eq!(&EmbeddingMatrix::parse(&m.to_sparse_text(), "sparse").unwrap(), &m);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = EmbeddingMatrix::parse("# dim=2\na 1 2\nb 1 x\n", "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(EmbeddingMatrix::parse("a 0:1\n", "t").is_err());
        assert!(EmbeddingMatrix::parse("# dim=2\na 1 2 3\n", "t").is_err());
    }
}

//! Vocabulary construction, presence-set vectorization, and the inverted
//! index used to sample supporting and non-supporting documents.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{invalid, io_err, Error, Result};

/// Lowercases, splits on whitespace and strips every non-alphanumeric
/// character. Tokens that end up empty are dropped.
pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace()
        .map(|raw| {
            raw.chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Reads one document per line.
pub fn read_documents(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text.lines().map(tokenize).collect())
}

/// Bidirectional token ↔ index map. Index order defines feature positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(invalid("vocabulary", format!("duplicate token `{w}`")));
            }
        }
        Ok(Self { words, index })
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

    pub fn word(&self, index: usize) -> Option<&str> {
        self.words.get(index).map(String::as_str)
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Human-readable name of a literal: the word for `l < V`, `¬word` above.
    pub fn literal_name(&self, literal: usize) -> String {
        let v = self.len();
        if literal < v {
            self.words[literal].clone()
        } else {
            format!("¬{}", self.words[literal - v])
        }
    }

    /// SHA-256 over the newline-terminated token list.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        for w in &self.words {
            hasher.update(w.as_bytes());
            hasher.update(b"\n");
        }
        hasher.finalize().into()
    }

    /// One token per line; line number is the index.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(io_err(path))?;
        let mut out = BufWriter::new(file);
        for w in &self.words {
            writeln!(out, "{w}").map_err(io_err(path))?;
        }
        out.flush().map_err(io_err(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_words(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }
}

/// Keeps the `max_vocab` tokens with the highest document frequency, ties
/// broken lexicographically.
pub fn build_vocabulary<D, S>(raw_docs: &[D], max_vocab: usize) -> Result<Vocabulary>
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    if max_vocab == 0 {
        return Err(invalid("max_vocab", "must be at least 1"));
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    let mut seen: Vec<&str> = Vec::new();
    for doc in raw_docs {
        seen.clear();
        seen.extend(doc.as_ref().iter().map(AsRef::as_ref));
        seen.sort_unstable();
        seen.dedup();
        for &tok in &seen {
            *df.entry(tok).or_default() += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut ranked: Vec<(&str, usize)> = df.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_vocab);
    Vocabulary::from_words(ranked.into_iter().map(|(w, _)| w))
}

/// Documents as presence sets of word indices, plus the inverted index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentSet {
    num_words: usize,
    docs: Vec<Vec<u32>>,
    inverted: Vec<Vec<u32>>,
}

impl DocumentSet {
    /// Builds from raw word-index lists; duplicates collapse.
    pub fn from_indices(num_words: usize, docs: Vec<Vec<usize>>) -> Result<Self> {
        let mut sets = Vec::with_capacity(docs.len());
        let mut inverted = vec![Vec::new(); num_words];
        for (d, doc) in docs.into_iter().enumerate() {
            let mut set: Vec<u32> = Vec::with_capacity(doc.len());
            for w in doc {
                if w >= num_words {
                    return Err(Error::OutOfRange {
                        index: w,
                        limit: num_words,
                    });
                }
                set.push(w as u32);
            }
            set.sort_unstable();
            set.dedup();
            for &w in &set {
                inverted[w as usize].push(d as u32);
            }
            sets.push(set);
        }
        Ok(Self {
            num_words,
            docs: sets,
            inverted,
        })
    }

    pub fn num_words(&self) -> usize {
        self.num_words
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Sorted word indices present in document `d`.
    pub fn document(&self, d: usize) -> &[u32] {
        &self.docs[d]
    }

    pub fn documents(&self) -> &[Vec<u32>] {
        &self.docs
    }

    /// Sorted ids of documents containing `word`.
    pub fn containing(&self, word: usize) -> &[u32] {
        &self.inverted[word]
    }

    /// Sorted ids of documents not containing `word`.
    pub fn not_containing(&self, word: usize) -> Vec<u32> {
        let with = &self.inverted[word];
        let mut out = Vec::with_capacity(self.docs.len() - with.len());
        let mut it = with.iter().peekable();
        for d in 0..self.docs.len() as u32 {
            if it.peek() == Some(&&d) {
                it.next();
            } else {
                out.push(d);
            }
        }
        out
    }
}

/// Maps each document onto in-vocabulary indices; OOV tokens are dropped and
/// documents that become empty are kept.
pub fn vectorize<D, S>(raw_docs: &[D], vocab: &Vocabulary) -> DocumentSet
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    let docs = raw_docs
        .iter()
        .map(|doc| {
            doc.as_ref()
                .iter()
                .filter_map(|t| vocab.index_of(t.as_ref()))
                .collect()
        })
        .collect();
    DocumentSet::from_indices(vocab.len(), docs).expect("vocabulary indices are in range")
}

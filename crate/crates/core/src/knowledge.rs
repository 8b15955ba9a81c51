//! Persisted per-word knowledge: every clause a word's machine learned,
//! stored as its included literals and signed weight.
//!
//! # Binary layout
//!
//! All integers are little-endian.
//!
//! ```text
//! offset  size  field
//!      0     8  magic "TMAEKNOW"
//!      8     2  format version (1)
//!     10     2  reserved (0)
//!     12     4  vocabulary size V
//!     16    32  SHA-256 digest of the vocabulary
//!     48     4  record count
//!     52     …  records, ascending word index
//!
//! record:
//!      4  payload length in bytes (everything below)
//!      4  word index
//!      1  status (0 trained, 1 no supporting docs, 2 no non-supporting docs)
//!      4  clause count
//!      per clause:
//!         4  weight (i32, never 0)
//!         varint literal count
//!         varint × count: first literal, then gaps to the previous literal
//! ```
//!
//! Varints are unsigned LEB128. The length prefix lets a reader skip to any
//! word without decoding the clauses before it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::cotm::ClauseBank;
use crate::error::{io_err, Error, LastGood, Result};

pub const MAGIC: &[u8; 8] = b"TMAEKNOW";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 52;

/// One learned conjunction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeClause {
    /// Strictly increasing literal indices in `[0, 2V)`.
    pub literals: Vec<u32>,
    /// Signed, never zero.
    pub weight: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnowledgeStatus {
    Trained,
    /// The word occurs in no document.
    NoSupportingDocuments,
    /// The word occurs in every document.
    NoNonSupportingDocuments,
}

impl KnowledgeStatus {
    fn code(self) -> u8 {
        match self {
            Self::Trained => 0,
            Self::NoSupportingDocuments => 1,
            Self::NoNonSupportingDocuments => 2,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Self::Trained,
            1 => Self::NoSupportingDocuments,
            2 => Self::NoNonSupportingDocuments,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Trained => "trained",
            Self::NoSupportingDocuments => "no-supporting-documents",
            Self::NoNonSupportingDocuments => "no-non-supporting-documents",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordKnowledge {
    pub word: usize,
    pub status: KnowledgeStatus,
    pub clauses: Vec<KnowledgeClause>,
}

impl WordKnowledge {
    /// Collects every clause with a nonzero weight on `output`.
    pub fn from_bank(word: usize, bank: &ClauseBank, output: usize) -> Self {
        let clauses = (0..bank.num_clauses())
            .filter_map(|c| {
                let weight = bank.weight(c, output);
                (weight != 0).then(|| KnowledgeClause {
                    literals: bank.included_literals(c).into_iter().map(|l| l as u32).collect(),
                    weight,
                })
            })
            .collect();
        Self {
            word,
            status: KnowledgeStatus::Trained,
            clauses,
        }
    }

    /// Placeholder entry for a word that could not be trained.
    pub fn failed(word: usize, status: KnowledgeStatus) -> Self {
        Self {
            word,
            status,
            clauses: Vec::new(),
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.status != KnowledgeStatus::Trained || self.clauses.is_empty()
    }
}

/// Clauses voting for the word (`q = 1`, weight > 0) or against it
/// (`q = 0`, weight < 0).
pub fn filter_by_polarity(knowledge: &WordKnowledge, q: bool) -> Vec<&KnowledgeClause> {
    knowledge
        .clauses
        .iter()
        .filter(|c| if q { c.weight > 0 } else { c.weight < 0 })
        .collect()
}

/// Knowledge for a vocabulary, bound to it by digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeStore {
    num_words: usize,
    vocab_digest: [u8; 32],
    entries: BTreeMap<usize, WordKnowledge>,
}

impl KnowledgeStore {
    pub fn new(vocab: &Vocabulary) -> Self {
        Self {
            num_words: vocab.len(),
            vocab_digest: vocab.digest(),
            entries: BTreeMap::new(),
        }
    }

    pub fn num_words(&self) -> usize {
        self.num_words
    }

    pub fn vocab_digest(&self) -> &[u8; 32] {
        &self.vocab_digest
    }

    pub fn is_bound_to(&self, vocab: &Vocabulary) -> bool {
        self.num_words == vocab.len() && self.vocab_digest == vocab.digest()
    }

    pub fn insert(&mut self, knowledge: WordKnowledge) -> Result<Option<WordKnowledge>> {
        if knowledge.word >= self.num_words {
            return Err(Error::OutOfRange {
                index: knowledge.word,
                limit: self.num_words,
            });
        }
        let limit = 2 * self.num_words as u32;
        for clause in &knowledge.clauses {
            validate_clause(clause, limit).map_err(|reason| crate::error::invalid("knowledge", reason))?;
        }
        Ok(self.entries.insert(knowledge.word, knowledge))
    }

    pub fn get(&self, word: usize) -> Option<&WordKnowledge> {
        self.entries.get(&word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &WordKnowledge> {
        self.entries.values()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 64 * self.entries.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(&(self.num_words as u32).to_le_bytes());
        out.extend_from_slice(&self.vocab_digest);
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        let mut payload = Vec::new();
        for entry in self.entries.values() {
            payload.clear();
            payload.extend_from_slice(&(entry.word as u32).to_le_bytes());
            payload.push(entry.status.code());
            payload.extend_from_slice(&(entry.clauses.len() as u32).to_le_bytes());
            for clause in &entry.clauses {
                payload.extend_from_slice(&clause.weight.to_le_bytes());
                put_varint(&mut payload, clause.literals.len() as u64);
                let mut prev = 0u32;
                for (i, &l) in clause.literals.iter().enumerate() {
                    put_varint(&mut payload, if i == 0 { l } else { l - prev } as u64);
                    prev = l;
                }
            }
            out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
            out.extend_from_slice(&payload);
        }
        out
    }

    /// Decodes and checks the binding against `vocab`.
    pub fn decode(bytes: &[u8], vocab: &Vocabulary) -> Result<Self> {
        let store = Self::decode_unbound(bytes)?;
        if !store.is_bound_to(vocab) {
            return Err(Error::VocabularyMismatch);
        }
        Ok(store)
    }

    /// Decodes without a vocabulary check.
    pub fn decode_unbound(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0, last_good: None };
        let magic = r.take(8, "magic")?;
        if magic != MAGIC {
            return Err(r.corrupt(0, "bad magic bytes"));
        }
        let version = r.u16("version")?;
        if version != FORMAT_VERSION {
            return Err(r.corrupt(8, format!("unsupported format version {version}")));
        }
        r.u16("reserved")?;
        let num_words = r.u32("vocabulary size")? as usize;
        let vocab_digest: [u8; 32] = r.take(32, "digest")?.try_into().expect("32 bytes");
        let count = r.u32("record count")?;
        let limit = 2 * num_words as u32;

        let mut entries = BTreeMap::new();
        for _ in 0..count {
            let start = r.pos as u64;
            let len = r.u32("record length")? as usize;
            let Some(body) = bytes.get(r.pos..r.pos + len) else {
                return Err(r.corrupt(start, format!("record truncated (needs {len} payload bytes)")));
            };
            r.pos += len;
            let entry = decode_record(body, limit).map_err(|reason| r.corrupt(start, reason))?;
            if entry.word >= num_words {
                return Err(r.corrupt(start, format!("word index {} ≥ V={num_words}", entry.word)));
            }
            if let Some(prev) = r.last_good {
                if entry.word as u32 <= prev {
                    return Err(r.corrupt(start, "records not in ascending word order"));
                }
            }
            r.last_good = Some(entry.word as u32);
            entries.insert(entry.word, entry);
        }
        if r.pos != bytes.len() {
            return Err(r.corrupt(r.pos as u64, "trailing bytes after last record"));
        }
        Ok(Self {
            num_words,
            vocab_digest,
            entries,
        })
    }

    /// Writes to a sibling temporary file, then renames over `path`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.encode())
    }

    pub fn load(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(io_err(path))?;
        Self::decode(&bytes, vocab)
    }

    /// One clause per line, e.g. `vehicle AND license AND ¬rain @+3`.
    pub fn dump_text(&self, vocab: &Vocabulary) -> String {
        let mut out = String::new();
        for entry in self.entries.values() {
            let name = vocab.word(entry.word).unwrap_or("?");
            let _ = writeln!(
                out,
                "# {name} ({}) status={} clauses={}",
                entry.word,
                entry.status.as_str(),
                entry.clauses.len()
            );
            for clause in &entry.clauses {
                let body = if clause.literals.is_empty() {
                    "TRUE".to_string()
                } else {
                    clause
                        .literals
                        .iter()
                        .map(|&l| vocab.literal_name(l as usize))
                        .collect::<Vec<_>>()
                        .join(" AND ")
                };
                let _ = writeln!(out, "{body} @{:+}", clause.weight);
            }
        }
        out
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn validate_clause(clause: &KnowledgeClause, limit: u32) -> Result<(), String> {
    if clause.weight == 0 {
        return Err("clause with zero weight".into());
    }
    if clause.literals.windows(2).any(|w| w[0] >= w[1]) {
        return Err("literal indices not strictly increasing".into());
    }
    if let Some(&last) = clause.literals.last() {
        if last >= limit {
            return Err(format!("literal {last} ≥ 2V={limit}"));
        }
    }
    Ok(())
}

fn decode_record(body: &[u8], limit: u32) -> Result<WordKnowledge, String> {
    let mut pos = 0usize;
    let word = fixed::<4>(body, &mut pos).map(u32::from_le_bytes)? as usize;
    let status = KnowledgeStatus::from_code(fixed::<1>(body, &mut pos)?[0]).ok_or("unknown status code")?;
    let n_clauses = fixed::<4>(body, &mut pos).map(u32::from_le_bytes)?;
    let mut clauses = Vec::new();
    for _ in 0..n_clauses {
        let weight = fixed::<4>(body, &mut pos).map(i32::from_le_bytes)?;
        let n_lits = get_varint(body, &mut pos)?;
        let mut literals = Vec::with_capacity(n_lits.min(1 << 16) as usize);
        let mut prev = 0u64;
        for i in 0..n_lits {
            let d = get_varint(body, &mut pos)?;
            let l = if i == 0 { d } else { prev + d };
            if l > u32::MAX as u64 {
                return Err("literal index overflow".into());
            }
            literals.push(l as u32);
            prev = l;
        }
        let clause = KnowledgeClause { literals, weight };
        validate_clause(&clause, limit)?;
        clauses.push(clause);
    }
    if pos != body.len() {
        return Err("record payload longer than its contents".into());
    }
    Ok(WordKnowledge { word, status, clauses })
}

fn fixed<const N: usize>(bytes: &[u8], pos: &mut usize) -> Result<[u8; N], String> {
    let s = bytes
        .get(*pos..*pos + N)
        .ok_or("record payload shorter than its contents")?;
    *pos += N;
    Ok(s.try_into().expect("length checked"))
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn get_varint(bytes: &[u8], pos: &mut usize) -> Result<u64, String> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *bytes.get(*pos).ok_or("truncated varint")?;
        *pos += 1;
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err("varint too long".into())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    last_good: Option<u32>,
}

impl Reader<'_> {
    fn corrupt(&self, offset: u64, reason: impl Into<String>) -> Error {
        Error::CorruptKnowledge {
            offset,
            last_good: LastGood(self.last_good),
            reason: reason.into(),
        }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        match self.bytes.get(self.pos..self.pos + n) {
            Some(s) => {
                self.pos += n;
                Ok(s)
            }
            None => Err(self.corrupt(self.pos as u64, format!("unexpected end of file reading {what}"))),
        }
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

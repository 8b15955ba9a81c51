//! Word-pair similarity evaluation against human judgements.

use std::fs;
use std::path::Path;

use crate::embedding::EmbeddingMatrix;
use crate::error::{io_err, Error, Result};

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(crate::error::invalid("scores", "need at least two observations"));
    }
    Ok(())
}

/// 1-based ranks with ties assigned their average rank.
pub fn mid_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation of mid-ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    pearson(&mid_ranks(xs), &mid_ranks(ys))
}

/// Kendall tau-b.
pub fn kendall(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    let n = xs.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut only_x_tie, mut only_y_tie) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = xs[i].total_cmp(&xs[j]) as i64;
            let dy = ys[i].total_cmp(&ys[j]) as i64;
            match (dx, dy) {
                (0, 0) => {}
                (0, _) => only_x_tie += 1,
                (_, 0) => only_y_tie += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let untied_x = (concordant + discordant + only_y_tie) as f64;
    let untied_y = (concordant + discordant + only_x_tie) as f64;
    if untied_x == 0.0 || untied_y == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok(((concordant - discordant) as f64 / (untied_x * untied_y).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordPair {
    pub a: String,
    pub b: String,
    pub human: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordPairBenchmark {
    pub name: String,
    pub pairs: Vec<WordPair>,
}

impl WordPairBenchmark {
    /// `word_a<TAB>word_b<TAB>score` per line; blank lines and `#` comments
    /// are skipped. Words are lowercased to match the corpus tokenizer.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let name = name.into();
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |reason: String| Error::Parse {
                source_name: name.clone(),
                line: i + 1,
                reason,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(perr(format!("expected 3 tab-separated fields, got {}", fields.len())));
            }
            let human: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| perr(format!("bad score `{}`", fields[2])))?;
            if !human.is_finite() {
                return Err(perr("score must be finite".into()));
            }
            pairs.push(WordPair {
                a: fields[0].trim().to_lowercase(),
                b: fields[1].trim().to_lowercase(),
                human,
            });
        }
        Ok(Self { name, pairs })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Self::parse(name, &text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    pub name: String,
    pub spearman: f64,
    pub kendall: f64,
    /// Mean model cosine over evaluable pairs.
    pub mean_cosine: f64,
    pub coverage: f64,
    pub evaluated: usize,
    pub total: usize,
}

/// Pairs with a missing or all-zero embedding are excluded and counted
/// against coverage.
pub fn evaluate(embeddings: &EmbeddingMatrix, bench: &WordPairBenchmark) -> Result<SimilarityReport> {
    let mut model = Vec::new();
    let mut human = Vec::new();
    for pair in &bench.pairs {
        let (Some(u), Some(v)) = (embeddings.get(&pair.a), embeddings.get(&pair.b)) else {
            continue;
        };
        match cosine(u, v) {
            Ok(c) => {
                model.push(c);
                human.push(pair.human);
            }
            Err(Error::ZeroVector) => continue,
            Err(e) => return Err(e),
        }
    }
    if model.is_empty() {
        return Err(Error::NoEvaluablePairs(bench.name.clone()));
    }
    let total = bench.pairs.len();
    Ok(SimilarityReport {
        name: bench.name.clone(),
        spearman: spearman(&model, &human)?,
        kendall: kendall(&model, &human)?,
        mean_cosine: model.iter().sum::<f64>() / model.len() as f64,
        coverage: model.len() as f64 / total as f64,
        evaluated: model.len(),
        total,
    })
}

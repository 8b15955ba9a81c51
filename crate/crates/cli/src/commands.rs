use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context as _};
use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use tmae::augment::{
    augment_corpus, evaluate_classifier, read_labeled, train_classifier, write_labeled, AugmentConfig,
    ClassifierConfig, SimilarityPools,
};
use tmae::corpus::{build_vocabulary, read_documents, vectorize, Vocabulary};
use tmae::cotm::CotmParams;
use tmae::embedding::EmbeddingMatrix;
use tmae::eval::{evaluate, SimilarityReport, WordPairBenchmark};
use tmae::knowledge::KnowledgeStore;
use tmae::phase1::{retrain_word, train_all, Phase1Config};
use tmae::phase2::{train_embedding, TargetWords};

use crate::config::ConfigFile;
use crate::manifest::{digest, RunManifest};
use crate::{CliError, Context};

/// One pipeline command: resolvable from flags plus config, replayable from
/// its serialized form.
pub trait Step: Serialize + DeserializeOwned {
    const NAME: &'static str;
    fn fill_defaults(&mut self);
    fn check(&self) -> Result<(), CliError>;
    fn inputs(&self) -> Vec<PathBuf>;
    fn manifest_path(&self) -> PathBuf;
    fn seed(&self) -> Option<u64>;
    /// Runs the command and returns every file it wrote.
    fn run(&self, ctx: &Context) -> Result<Vec<PathBuf>, CliError>;
}

pub fn execute<T: Step>(cli: T, file: &ConfigFile, ctx: &Context) -> Result<(), CliError> {
    let mut args = file.layer(T::NAME, &cli)?;
    args.fill_defaults();
    if ctx.show_config {
        let text = toml::to_string(&args).map_err(anyhow::Error::from)?;
        print!("[{}]\n{text}", T::NAME);
        return Ok(());
    }
    args.check()?;
    let inputs = args.inputs().iter().map(|p| digest(p)).collect::<anyhow::Result<Vec<_>>>()?;
    let start = Instant::now();
    let outputs = args.run(ctx)?;
    let wall = start.elapsed().as_secs_f64();
    if ctx.write_manifest {
        let manifest = RunManifest {
            command: T::NAME.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: serde_json::to_value(&args).map_err(anyhow::Error::from)?,
            seed: args.seed(),
            jobs: ctx.jobs,
            inputs,
            outputs: outputs.iter().map(|p| digest(p)).collect::<anyhow::Result<_>>()?,
            wall_time_secs: wall,
        };
        let path = ctx.manifest.clone().unwrap_or_else(|| args.manifest_path());
        manifest.save(&path)?;
        eprintln!("{}: manifest written to {}", T::NAME, path.display());
    }
    Ok(())
}

pub fn replay_as<T: Step>(config: serde_json::Value, ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let args: T = serde_json::from_value(config).map_err(|e| anyhow!("manifest config: {e}"))?;
    args.check()?;
    args.run(ctx)
}

fn need<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::Usage(format!("missing required {flag}")))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn fill<T>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(default)]
pub struct VocabArgs {
    /// Corpus, one document per line.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Keep at most this many words by document frequency.
    #[arg(long)]
    pub max_vocab: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Step for VocabArgs {
    const NAME: &'static str = "vocab";

    fn fill_defaults(&mut self) {
        fill(&mut self.max_vocab, 40_000);
    }

    fn check(&self) -> Result<(), CliError> {
        need(&self.corpus, "--corpus")?;
        need(&self.out, "--out").map(|_| ())
    }

    fn inputs(&self) -> Vec<PathBuf> {
        self.corpus.iter().cloned().collect()
    }

    fn manifest_path(&self) -> PathBuf {
        with_suffix(self.out.as_ref().expect("checked"), ".manifest.json")
    }

    fn seed(&self) -> Option<u64> {
        None
    }

    fn run(&self, _ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
        let docs = read_documents(need(&self.corpus, "--corpus")?)?;
        let vocab = build_vocabulary(&docs, self.max_vocab.expect("filled"))?;
        let out = need(&self.out, "--out")?;
        vocab.save(out)?;
        eprintln!("vocab: {} words from {} documents", vocab.len(), docs.len());
        Ok(vec![out.clone()])
    }
}

/// Shared CoTM training knobs for both phases.
#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(default)]
pub struct TrainKnobs {
    /// Examples per epoch (r).
    #[arg(long, short = 'r')]
    pub examples_per_epoch: Option<usize>,
    /// Window size (a): documents or clauses sampled per example.
    #[arg(long, short = 'a')]
    pub window: Option<usize>,
    #[arg(long)]
    pub clauses: Option<usize>,
    /// Voting margin (T).
    #[arg(long, short = 'T')]
    pub threshold: Option<u32>,
    /// Specificity (s).
    #[arg(long, short = 's')]
    pub specificity: Option<f64>,
    /// Automaton midpoint (N); states range over [1, 2N].
    #[arg(long, short = 'N')]
    pub state_midpoint: Option<u16>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl TrainKnobs {
    fn fill_defaults(&mut self) {
        let d = Phase1Config::default();
        fill(&mut self.examples_per_epoch, d.examples_per_epoch);
        fill(&mut self.window, d.window);
        fill(&mut self.clauses, d.params.num_clauses);
        fill(&mut self.threshold, d.params.threshold);
        fill(&mut self.specificity, d.params.specificity);
        fill(&mut self.state_midpoint, d.params.state_midpoint);
        fill(&mut self.epochs, d.epochs);
        fill(&mut self.seed, d.seed);
    }

    fn config(&self) -> Phase1Config {
        Phase1Config {
            examples_per_epoch: self.examples_per_epoch.expect("filled"),
            window: self.window.expect("filled"),
            epochs: self.epochs.expect("filled"),
            params: CotmParams {
                num_clauses: self.clauses.expect("filled"),
                threshold: self.threshold.expect("filled"),
                specificity: self.specificity.expect("filled"),
                state_midpoint: self.state_midpoint.expect("filled"),
            },
            seed: self.seed.expect("filled"),
        }
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(default)]
pub struct Phase1Args {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Existing vocabulary; built from the corpus when absent.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub max_vocab: Option<usize>,
    /// Where a freshly built vocabulary goes (default: `<out>.vocab`).
    #[arg(long)]
    pub vocab_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub train: TrainKnobs,
    /// Knowledge store to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Retrain only this word inside the existing store at `--out`.
    #[arg(long)]
    pub word: Option<String>,
    /// Also write a human-readable clause dump here.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

impl Step for Phase1Args {
    const NAME: &'static str = "phase1";

    fn fill_defaults(&mut self) {
        self.train.fill_defaults();
        if self.vocab.is_none() {
            fill(&mut self.max_vocab, 40_000);
            if let Some(out) = &self.out {
                fill(&mut self.vocab_out, with_suffix(out, ".vocab"));
            }
        }
    }

    fn check(&self) -> Result<(), CliError> {
        need(&self.corpus, "--corpus")?;
        need(&self.out, "--out")?;
        self.train.config().validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    fn inputs(&self) -> Vec<PathBuf> {
        let mut v: Vec<PathBuf> = self.corpus.iter().chain(&self.vocab).cloned().collect();
        if self.word.is_some() {
            v.extend(self.out.iter().cloned());
        }
        v
    }

    fn manifest_path(&self) -> PathBuf {
        with_suffix(self.out.as_ref().expect("checked"), ".manifest.json")
    }

    fn seed(&self) -> Option<u64> {
        self.train.seed
    }

    fn run(&self, ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
        let out = need(&self.out, "--out")?;
        let docs = read_documents(need(&self.corpus, "--corpus")?)?;
        let mut outputs = Vec::new();
        let vocab = match &self.vocab {
            Some(path) => Vocabulary::load(path)?,
            None => {
                let vocab = build_vocabulary(&docs, self.max_vocab.expect("filled"))?;
                let path = need(&self.vocab_out, "--vocab-out")?;
                vocab.save(path)?;
                outputs.push(path.clone());
                vocab
            }
        };
        let ds = vectorize(&docs, &vocab);
        let cfg = self.train.config();
        let store = match &self.word {
            Some(word) => {
                let index = vocab
                    .index_of(word)
                    .ok_or_else(|| anyhow!("`{word}` is not in the vocabulary"))?;
                let mut store = KnowledgeStore::load(out, &vocab)?;
                if let Some(e) = retrain_word(&mut store, &ds, index, &cfg)? {
                    eprintln!("warning: {word}: {e}");
                }
                eprintln!("phase1: retrained `{word}`");
                store
            }
            None => {
                eprintln!(
                    "phase1: {} words, {} documents, {} jobs",
                    vocab.len(),
                    ds.len(),
                    ctx.jobs
                );
                let report = train_all(&ds, &vocab, &cfg, ctx.jobs)?;
                for (w, e) in &report.failures {
                    eprintln!("warning: {}: {e}", vocab.words()[*w]);
                }
                report.store
            }
        };
        store.save(out)?;
        outputs.push(out.clone());
        if let Some(dump) = &self.dump {
            fs::write(dump, store.dump_text(&vocab)).with_context(|| format!("writing {}", dump.display()))?;
            outputs.push(dump.clone());
        }
        Ok(outputs)
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(default)]
pub struct Phase2Args {
    #[arg(long)]
    pub knowledge: Option<PathBuf>,
    /// Vocabulary the knowledge store was trained against.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Target words, one per line.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub train: TrainKnobs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write `literal:value` pairs instead of dense rows.
    #[arg(long)]
    pub sparse: bool,
}

fn read_targets(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect())
}

impl Step for Phase2Args {
    const NAME: &'static str = "phase2";

    fn fill_defaults(&mut self) {
        self.train.fill_defaults();
    }

    fn check(&self) -> Result<(), CliError> {
        need(&self.knowledge, "--knowledge")?;
        need(&self.vocab, "--vocab")?;
        need(&self.targets, "--targets")?;
        need(&self.out, "--out")?;
        self.train.config().validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    fn inputs(&self) -> Vec<PathBuf> {
        self.knowledge.iter().chain(&self.vocab).chain(&self.targets).cloned().collect()
    }

    fn manifest_path(&self) -> PathBuf {
        with_suffix(self.out.as_ref().expect("checked"), ".manifest.json")
    }

    fn seed(&self) -> Option<u64> {
        self.train.seed
    }

    fn run(&self, _ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
        let vocab = Vocabulary::load(need(&self.vocab, "--vocab")?)?;
        let store = KnowledgeStore::load(need(&self.knowledge, "--knowledge")?, &vocab)?;
        let words = read_targets(need(&self.targets, "--targets")?)?;
        let unknown: Vec<&str> = words.iter().filter(|w| vocab.index_of(w).is_none()).map(|w| w.as_str()).collect();
        if !unknown.is_empty() {
            return Err(anyhow!("target words not in the vocabulary: {}", unknown.join(", ")).into());
        }
        let indices: Vec<usize> = words.iter().map(|w| vocab.index_of(w).expect("checked")).collect();
        let absent: Vec<String> = indices
            .iter()
            .filter_map(|&i| match store.get(i) {
                None => Some(vocab.words()[i].clone()),
                Some(k) if k.is_flagged() => Some(format!("{} ({})", vocab.words()[i], k.status.as_str())),
                Some(_) => None,
            })
            .collect();
        if !absent.is_empty() {
            return Err(anyhow!("target words without knowledge: {}", absent.join(", ")).into());
        }
        let targets = TargetWords::new(indices, &store)?;
        let outcome = train_embedding(&store, &vocab, &targets, &self.train.config())?;
        eprintln!(
            "phase2: {} targets, {} updates attempted, {} skipped",
            targets.len(),
            outcome.stats.attempted,
            outcome.stats.skipped
        );
        let out = need(&self.out, "--out")?;
        outcome.embeddings.save(out, self.sparse)?;
        Ok(vec![out.clone()])
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(default)]
pub struct EvalArgs {
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Benchmark files: `word_a<TAB>word_b<TAB>score` per line.
    pub benchmarks: Vec<PathBuf>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn format_report(reports: &[SimilarityReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:>7} {:>8} {:>9} {:>9} {:>9} {:>9}",
        "benchmark", "pairs", "covered", "coverage", "spearman", "kendall", "cosine"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<20} {:>7} {:>8} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            r.name, r.total, r.evaluated, r.coverage, r.spearman, r.kendall, r.mean_cosine
        );
    }
    let n = reports.len() as f64;
    let avg = |f: fn(&SimilarityReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let (sp, kd, cs) = (avg(|r| r.spearman), avg(|r| r.kendall), avg(|r| r.mean_cosine));
    let _ = writeln!(s, "{:<20} {:>7} {:>8} {:>9} {:>9.4} {:>9.4} {:>9.4}", "Avg.", "", "", "", sp, kd, cs);
    s.push('\n');
    for r in reports {
        let _ = writeln!(s, "{}.spearman={}", r.name, r.spearman);
        let _ = writeln!(s, "{}.kendall={}", r.name, r.kendall);
        let _ = writeln!(s, "{}.mean_cosine={}", r.name, r.mean_cosine);
        let _ = writeln!(s, "{}.coverage={}", r.name, r.coverage);
        let _ = writeln!(s, "{}.evaluated={}", r.name, r.evaluated);
        let _ = writeln!(s, "{}.total={}", r.name, r.total);
    }
    let _ = writeln!(s, "avg.spearman={sp}");
    let _ = writeln!(s, "avg.kendall={kd}");
    let _ = writeln!(s, "avg.mean_cosine={cs}");
    s
}

impl Step for EvalArgs {
    const NAME: &'static str = "eval";

    fn fill_defaults(&mut self) {}

    fn check(&self) -> Result<(), CliError> {
        need(&self.embeddings, "--embeddings")?;
        if self.benchmarks.is_empty() {
            return Err(CliError::Usage("at least one benchmark file is required".into()));
        }
        Ok(())
    }

    fn inputs(&self) -> Vec<PathBuf> {
        self.embeddings
            .iter()
            .chain(self.benchmarks.iter().filter(|p| fs::metadata(p).is_ok_and(|m| m.is_file())))
            .cloned()
            .collect()
    }

    fn manifest_path(&self) -> PathBuf {
        match &self.out {
            Some(out) => with_suffix(out, ".manifest.json"),
            None => with_suffix(self.embeddings.as_ref().expect("checked"), ".eval.manifest.json"),
        }
    }

    fn seed(&self) -> Option<u64> {
        None
    }

    fn run(&self, _ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
        let emb = EmbeddingMatrix::load(need(&self.embeddings, "--embeddings")?)?;
        let mut reports = Vec::new();
        for path in &self.benchmarks {
            let result = WordPairBenchmark::load(path).and_then(|b| evaluate(&emb, &b));
            match result {
                Ok(r) => reports.push(r),
                Err(e) => eprintln!("warning: skipping {}: {e}", path.display()),
            }
        }
        if reports.is_empty() {
            return Err(anyhow!("no benchmark could be evaluated").into());
        }
        let text = format_report(&reports);
        print!("{text}");
        match &self.out {
            Some(out) => {
                fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
                Ok(vec![out.clone()])
            }
            None => Ok(Vec::new()),
        }
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(default)]
pub struct AugmentArgs {
    /// Documents to augment, one per line.
    #[arg(long)]
    pub docs: Option<PathBuf>,
    /// Aligned labels, `0` or `1` per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Embedding file to draw similarity pools from.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Knowledge store to embed directly (needs `--vocab`).
    #[arg(long)]
    pub knowledge: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Fraction of replaceable tokens substituted, in (0, 1].
    #[arg(long)]
    pub replace_fraction: Option<f64>,
    #[arg(long)]
    pub pool_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_docs: Option<PathBuf>,
    /// Default: `<out-docs>.labels`.
    #[arg(long)]
    pub out_labels: Option<PathBuf>,
    /// Dump the similarity pools as text.
    #[arg(long)]
    pub pools_out: Option<PathBuf>,
}

impl Step for AugmentArgs {
    const NAME: &'static str = "augment";

    fn fill_defaults(&mut self) {
        let d = AugmentConfig::default();
        fill(&mut self.replace_fraction, d.replace_fraction);
        fill(&mut self.pool_size, d.pool_size);
        fill(&mut self.seed, d.seed);
        if let Some(out) = &self.out_docs {
            fill(&mut self.out_labels, with_suffix(out, ".labels"));
        }
    }

    fn check(&self) -> Result<(), CliError> {
        need(&self.docs, "--docs")?;
        need(&self.labels, "--labels")?;
        need(&self.out_docs, "--out-docs")?;
        match (&self.embeddings, &self.knowledge, &self.vocab) {
            (Some(_), None, _) | (None, Some(_), Some(_)) => {}
            _ => {
                return Err(CliError::Usage(
                    "give either --embeddings or --knowledge with --vocab".into(),
                ))
            }
        }
        self.config().validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    fn inputs(&self) -> Vec<PathBuf> {
        [&self.docs, &self.labels, &self.embeddings, &self.knowledge, &self.vocab]
            .into_iter()
            .flatten()
            .cloned()
            .collect()
    }

    fn manifest_path(&self) -> PathBuf {
        with_suffix(self.out_docs.as_ref().expect("checked"), ".manifest.json")
    }

    fn seed(&self) -> Option<u64> {
        self.seed
    }

    fn run(&self, _ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
        let docs = read_labeled(need(&self.docs, "--docs")?, need(&self.labels, "--labels")?)?;
        let emb = match (&self.embeddings, &self.knowledge, &self.vocab) {
            (Some(path), _, _) => EmbeddingMatrix::load(path)?,
            (None, Some(k), Some(v)) => {
                let vocab = Vocabulary::load(v)?;
                EmbeddingMatrix::from_knowledge(&KnowledgeStore::load(k, &vocab)?, &vocab)?
            }
            _ => unreachable!("checked"),
        };
        let cfg = self.config();
        let pools = SimilarityPools::build(&emb, cfg.pool_size)?;
        let augmented = augment_corpus(&docs, &pools, &cfg)?;
        let changed = augmented.iter().zip(&docs).filter(|(a, b)| a.tokens != b.tokens).count();
        eprintln!("augment: {} documents, {changed} changed", augmented.len());
        let out_docs = need(&self.out_docs, "--out-docs")?;
        let out_labels = need(&self.out_labels, "--out-labels")?;
        write_labeled(&augmented, out_docs, out_labels)?;
        let mut outputs = vec![out_docs.clone(), out_labels.clone()];
        if let Some(p) = &self.pools_out {
            fs::write(p, pools.dump_text()).with_context(|| format!("writing {}", p.display()))?;
            outputs.push(p.clone());
        }
        Ok(outputs)
    }
}

impl AugmentArgs {
    fn config(&self) -> AugmentConfig {
        AugmentConfig {
            replace_fraction: self.replace_fraction.expect("filled"),
            pool_size: self.pool_size.expect("filled"),
            seed: self.seed.expect("filled"),
        }
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(default)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub train_docs: Option<PathBuf>,
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    /// Extra training documents, typically from `augment`.
    #[arg(long)]
    pub augmented_docs: Option<PathBuf>,
    #[arg(long)]
    pub augmented_labels: Option<PathBuf>,
    #[arg(long)]
    pub test_docs: Option<PathBuf>,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    #[arg(long)]
    pub max_vocab: Option<usize>,
    #[arg(long)]
    pub clauses: Option<usize>,
    #[arg(long, short = 'T')]
    pub threshold: Option<u32>,
    #[arg(long, short = 's')]
    pub specificity: Option<f64>,
    #[arg(long, short = 'N')]
    pub state_midpoint: Option<u16>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ClassifyArgs {
    fn config(&self) -> ClassifierConfig {
        ClassifierConfig {
            params: CotmParams {
                num_clauses: self.clauses.expect("filled"),
                threshold: self.threshold.expect("filled"),
                specificity: self.specificity.expect("filled"),
                state_midpoint: self.state_midpoint.expect("filled"),
            },
            epochs: self.epochs.expect("filled"),
            seed: self.seed.expect("filled"),
        }
    }
}

impl Step for ClassifyArgs {
    const NAME: &'static str = "classify";

    fn fill_defaults(&mut self) {
        let d = ClassifierConfig::default();
        fill(&mut self.max_vocab, 20_000);
        fill(&mut self.clauses, d.params.num_clauses);
        fill(&mut self.threshold, d.params.threshold);
        fill(&mut self.specificity, d.params.specificity);
        fill(&mut self.state_midpoint, d.params.state_midpoint);
        fill(&mut self.epochs, d.epochs);
        fill(&mut self.seed, d.seed);
    }

    fn check(&self) -> Result<(), CliError> {
        need(&self.train_docs, "--train-docs")?;
        need(&self.train_labels, "--train-labels")?;
        need(&self.test_docs, "--test-docs")?;
        need(&self.test_labels, "--test-labels")?;
        if self.augmented_docs.is_some() != self.augmented_labels.is_some() {
            return Err(CliError::Usage("--augmented-docs and --augmented-labels go together".into()));
        }
        self.config().params.validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    fn inputs(&self) -> Vec<PathBuf> {
        [
            &self.train_docs,
            &self.train_labels,
            &self.augmented_docs,
            &self.augmented_labels,
            &self.test_docs,
            &self.test_labels,
        ]
        .into_iter()
        .flatten()
        .cloned()
        .collect()
    }

    fn manifest_path(&self) -> PathBuf {
        match &self.out {
            Some(out) => with_suffix(out, ".manifest.json"),
            None => with_suffix(self.test_docs.as_ref().expect("checked"), ".classify.manifest.json"),
        }
    }

    fn seed(&self) -> Option<u64> {
        self.seed
    }

    fn run(&self, _ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
        let mut train = read_labeled(need(&self.train_docs, "--train-docs")?, need(&self.train_labels, "--train-labels")?)?;
        if let (Some(d), Some(l)) = (&self.augmented_docs, &self.augmented_labels) {
            train.extend(read_labeled(d, l)?);
        }
        let test = read_labeled(need(&self.test_docs, "--test-docs")?, need(&self.test_labels, "--test-labels")?)?;
        let raw: Vec<&[String]> = train.iter().map(|d| d.tokens.as_slice()).collect();
        let vocab = build_vocabulary(&raw, self.max_vocab.expect("filled"))?;
        let bank = train_classifier(&train, &vocab, &self.config())?;
        let r = evaluate_classifier(&bank, &vocab, &test)?;
        let mut text = String::new();
        let _ = writeln!(text, "accuracy={:.4} ({}/{})", r.accuracy, r.correct, r.total);
        let _ = writeln!(text, "majority_baseline={:.4}", r.majority_baseline());
        let _ = writeln!(text, "{:<10} {:>8} {:>10} {:>8}", "class", "actual", "predicted", "correct");
        for (i, name) in ["negative", "positive"].iter().enumerate() {
            let actual = r.confusion[i][0] + r.confusion[i][1];
            let predicted = r.confusion[0][i] + r.confusion[1][i];
            let _ = writeln!(text, "{name:<10} {actual:>8} {predicted:>10} {:>8}", r.confusion[i][i]);
        }
        print!("{text}");
        match &self.out {
            Some(out) => {
                fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
                Ok(vec![out.clone()])
            }
            None => Ok(Vec::new()),
        }
    }
}

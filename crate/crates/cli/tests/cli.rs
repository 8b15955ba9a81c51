use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tmae::augment::{write_labeled, Label, LabeledDocument};
use tmae::embedding::EmbeddingMatrix;
use tmae::eval::{cosine, evaluate, WordPairBenchmark};
use tmae::synthetic::{sentiment_corpus, TopicCorpus, TopicCorpusSpec};

const SMALL: &[&str] = &["-r", "60", "-a", "3", "--epochs", "3", "--clauses", "16", "-T", "8", "-s", "4"];

fn tmae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmae"))
        .args(args)
        .env_remove("TMAE_JOBS")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Self { dir: TempDir::new().unwrap() };
        let spec = TopicCorpusSpec { num_docs: 120, words_per_topic: 6, words_per_doc: 3, ..Default::default() };
        let corpus = TopicCorpus::generate(&spec);
        let text: String = corpus.docs.iter().map(|d| d.join(" ") + "\n").collect();
        fs::write(ws.path("corpus.txt"), text).unwrap();
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn phase1(&self, extra: &[&str]) -> Output {
        let (corpus, out) = (self.path("corpus.txt"), self.path("know.bin"));
        let mut args = vec!["phase1", "--corpus", p(&corpus), "--out", p(&out)];
        args.extend_from_slice(SMALL);
        args.extend_from_slice(extra);
        tmae(&args)
    }

    fn phase2(&self, targets: &[&str], out: &str) -> Output {
        fs::write(self.path("targets.txt"), targets.join("\n")).unwrap();
        let (k, v, t, o) = (self.path("know.bin"), self.path("know.bin.vocab"), self.path("targets.txt"), self.path(out));
        let mut args = vec!["phase2", "--knowledge", p(&k), "--vocab", p(&v), "--targets", p(&t), "--out", p(&o)];
        args.extend_from_slice(SMALL);
        tmae(&args)
    }
}

#[test]
fn defaults_echo_the_reference_configuration() {
    let o = tmae(&["phase1", "--show-config"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for line in [
        "examples_per_epoch = 2000",
        "window = 25",
        "clauses = 1600",
        "threshold = 3200",
        "specificity = 5.0",
        "epochs = 25",
    ] {
        assert!(s.contains(line), "missing `{line}` in\n{s}");
    }
    let s = stdout(&tmae(&["classify", "--show-config"]));
    for line in ["clauses = 1000", "threshold = 8000", "specificity = 2.0", "epochs = 10"] {
        assert!(s.contains(line), "missing `{line}` in\n{s}");
    }
    let s = stdout(&tmae(&["augment", "--show-config"]));
    assert!(s.contains("replace_fraction = 0.15") && s.contains("pool_size = 10"), "{s}");
}

#[test]
fn usage_errors_exit_with_two() {
    let o = tmae(&["phase1", "--out", "/nonexistent/k.bin"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--corpus"));
    assert_eq!(tmae(&["phase1", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(tmae(&[]).status.code(), Some(2));
    assert_eq!(tmae(&["--jobs", "0", "vocab", "--corpus", "c", "--out", "o"]).status.code(), Some(2));
}

#[test]
fn unreadable_corpus_is_a_runtime_failure() {
    let ws = Workspace::new();
    let out = ws.path("k.bin");
    let o = tmae(&["phase1", "--corpus", p(&ws.path("missing.txt")), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn vocab_command_writes_one_token_per_line() {
    let ws = Workspace::new();
    let out = ws.path("v.txt");
    let o = tmae(&["vocab", "--corpus", p(&ws.path("corpus.txt")), "--max-vocab", "5", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 5);
    assert!(ws.path("v.txt.manifest.json").exists());
}

#[test]
fn phase2_writes_one_row_per_target_and_is_reproducible() {
    let ws = Workspace::new();
    let o = ws.phase1(&["--dump", p(&ws.path("dump.txt"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(ws.path("dump.txt")).unwrap().contains(" @"));

    let targets = ["t0w00", "t0w01", "t1w00"];
    assert!(ws.phase2(&targets, "a.emb").status.success());
    assert!(ws.phase2(&targets, "b.emb").status.success());
    let a = fs::read(ws.path("a.emb")).unwrap();
    assert_eq!(a, fs::read(ws.path("b.emb")).unwrap());
    let emb = EmbeddingMatrix::load(ws.path("a.emb")).unwrap();
    assert_eq!(emb.len(), 3);
    assert_eq!(emb.dim(), 24);

    let o = ws.phase2(&["t0w00", "zebra"], "c.emb");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("zebra"), "{}", stderr(&o));
}

#[test]
fn retraining_one_word_leaves_the_rest_untouched() {
    let ws = Workspace::new();
    assert!(ws.phase1(&[]).status.success());
    let vocab = tmae::corpus::Vocabulary::load(ws.path("know.bin.vocab")).unwrap();
    let before = tmae::knowledge::KnowledgeStore::load(ws.path("know.bin"), &vocab).unwrap();
    let o = ws.phase1(&["--word", "t1w03", "--seed", "999", "--vocab", p(&ws.path("know.bin.vocab"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let after = tmae::knowledge::KnowledgeStore::load(ws.path("know.bin"), &vocab).unwrap();
    let target = vocab.index_of("t1w03").unwrap();
    for w in 0..vocab.len() {
        if w != target {
            assert_eq!(before.get(w), after.get(w), "word {w} changed");
        }
    }
    assert_ne!(before.get(target), after.get(target));
}

#[test]
fn mismatched_vocabulary_is_rejected() {
    let ws = Workspace::new();
    assert!(ws.phase1(&[]).status.success());
    fs::write(ws.path("know.bin.vocab"), "other\nwords\n").unwrap();
    let o = ws.phase2(&["other"], "x.emb");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mismatch"), "{}", stderr(&o));
}

fn toy_embeddings(dir: &Path) -> (PathBuf, EmbeddingMatrix) {
    let mut m = EmbeddingMatrix::new(3, "toy");
    for (w, r) in [
        ("a", [1.0, 0.0, 0.0]),
        ("b", [1.0, 1.0, 0.0]),
        ("c", [0.0, 1.0, 0.0]),
        ("d", [0.0, 1.0, 1.0]),
        ("e", [1.0, 2.0, 3.0]),
    ] {
        m.push(w, r.to_vec()).unwrap();
    }
    let path = dir.join("toy.emb");
    m.save(&path, false).unwrap();
    (path, m)
}

fn value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
        .parse()
        .unwrap()
}

#[test]
fn eval_reports_blocks_and_an_average() {
    let dir = TempDir::new().unwrap();
    let (emb_path, emb) = toy_embeddings(dir.path());
    // human scores equal the model cosines exactly
    let pairs = [("a", "b"), ("a", "c"), ("b", "d"), ("c", "e"), ("a", "e")];
    let perfect: String = pairs
        .iter()
        .map(|(x, y)| format!("{x}\t{y}\t{}\n", cosine(emb.get(x).unwrap(), emb.get(y).unwrap()).unwrap()))
        .collect();
    let fixture = "a\tb\t3\na\tc\t1\nb\td\t2\nc\te\t5\na\te\t4\n";
    fs::write(dir.path().join("perfect.txt"), &perfect).unwrap();
    fs::write(dir.path().join("fixture.txt"), fixture).unwrap();

    let (pf, ff) = (dir.path().join("perfect.txt"), dir.path().join("fixture.txt"));
    let o = tmae(&["eval", "--embeddings", p(&emb_path), p(&pf), p(&ff)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("perfect ")));
    assert!(out.lines().any(|l| l.starts_with("fixture ")));
    assert!(out.lines().any(|l| l.starts_with("Avg.")));
    assert!((value(&out, "perfect.spearman") - 1.0).abs() < 1e-12);
    assert!((value(&out, "perfect.kendall") - 1.0).abs() < 1e-12);

    let want = evaluate(&emb, &WordPairBenchmark::parse("fixture", fixture).unwrap()).unwrap();
    assert!((value(&out, "fixture.spearman") - want.spearman).abs() < 1e-12);
    assert!((value(&out, "fixture.kendall") - want.kendall).abs() < 1e-12);
    assert!((value(&out, "fixture.mean_cosine") - want.mean_cosine).abs() < 1e-12);
    assert_eq!(value(&out, "fixture.total"), 5.0);
    assert!((value(&out, "avg.spearman") - (1.0 + want.spearman) / 2.0).abs() < 1e-12);
}

#[test]
fn eval_skips_unreadable_benchmarks() {
    let dir = TempDir::new().unwrap();
    let (emb_path, _) = toy_embeddings(dir.path());
    fs::write(dir.path().join("ok.txt"), "a\tb\t1\na\tc\t2\nb\td\t3\n").unwrap();
    let (ok, gone) = (dir.path().join("ok.txt"), dir.path().join("gone.txt"));
    let o = tmae(&["eval", "--embeddings", p(&emb_path), p(&gone), p(&ok)]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning: skipping"));
    let o = tmae(&["eval", "--embeddings", p(&emb_path), p(&gone)]);
    assert_eq!(o.status.code(), Some(1));
}

fn labeled(dir: &Path, name: &str, docs: &[LabeledDocument]) -> (PathBuf, PathBuf) {
    let (d, l) = (dir.join(format!("{name}.txt")), dir.join(format!("{name}.labels")));
    write_labeled(docs, &d, &l).unwrap();
    (d, l)
}

#[test]
fn augment_keeps_cardinality_and_labels() {
    let dir = TempDir::new().unwrap();
    let mut m = EmbeddingMatrix::new(4, "toy");
    for (w, r) in [
        ("movie", [1.0, 0.1, 0.0, 0.0]),
        ("film", [1.0, 0.1, 0.0, 0.0]),
        ("plot", [0.2, 1.0, 0.0, 0.3]),
        ("confusing", [-1.0, 0.0, 0.2, 0.0]),
        ("chaotic", [-1.0, 0.1, 0.3, 0.0]),
    ] {
        m.push(w, r.to_vec()).unwrap();
    }
    let emb = dir.path().join("e.txt");
    m.save(&emb, true).unwrap();
    let docs: Vec<LabeledDocument> = (0..10)
        .map(|i| {
            LabeledDocument::new(
                if i % 2 == 0 { "the movie plot was good" } else { "a confusing movie" },
                Label::from_bit(i % 2 == 0),
            )
        })
        .collect();
    let (d, l) = labeled(dir.path(), "docs", &docs);
    let out = dir.path().join("aug.txt");
    let pools = dir.path().join("pools.txt");
    let o = tmae(&[
        "augment", "--docs", p(&d), "--labels", p(&l), "--embeddings", p(&emb), "--replace-fraction", "0.15",
        "--out-docs", p(&out), "--pools-out", p(&pools),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let aug = tmae::augment::read_labeled(&out, dir.path().join("aug.txt.labels")).unwrap();
    assert_eq!(aug.len(), 10);
    assert!(aug.iter().zip(&docs).all(|(a, b)| a.label == b.label && a.tokens.len() == b.tokens.len()));
    assert!(fs::read_to_string(&pools).unwrap().contains("movie"));

    fs::write(&l, "1\n0\n").unwrap();
    let o = tmae(&["augment", "--docs", p(&d), "--labels", p(&l), "--embeddings", p(&emb), "--out-docs", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("labels"), "{}", stderr(&o));
}

#[test]
fn classify_separable_fixture() {
    let dir = TempDir::new().unwrap();
    let fillers = ["plot", "scene", "actor", "music", "camera", "story"];
    let docs: Vec<LabeledDocument> = (0..60)
        .map(|i| {
            let pos = i % 2 == 0;
            let text = format!("{} {} {}", fillers[i % 6], if pos { "great" } else { "awful" }, fillers[(i / 6) % 6]);
            LabeledDocument::new(&text, Label::from_bit(pos))
        })
        .collect();
    let (d, l) = labeled(dir.path(), "train", &docs);
    let o = tmae(&[
        "classify", "--train-docs", p(&d), "--train-labels", p(&l), "--test-docs", p(&d), "--test-labels", p(&l),
        "--clauses", "20", "-T", "10", "-s", "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let acc: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("accuracy="))
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(acc >= 0.95, "{out}");
    assert!(out.contains("positive") && out.contains("negative"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let ws = Workspace::new();
    let cfg = ws.path("tmae.toml");
    fs::write(&cfg, "[phase1]\nwindow = 7\nepochs = 2\n").unwrap();
    let o = tmae(&["--config", p(&cfg), "phase1", "--window", "4", "--show-config"]);
    let s = stdout(&o);
    assert!(s.contains("window = 4") && s.contains("epochs = 2"), "{s}");
    fs::write(&cfg, "[phase1]\nwindow = \"wide\"\n").unwrap();
    assert_eq!(tmae(&["--config", p(&cfg), "phase1", "--show-config"]).status.code(), Some(2));
}

#[test]
fn replaying_a_manifest_reproduces_outputs() {
    let ws = Workspace::new();
    assert!(ws.phase1(&[]).status.success());
    assert!(ws.phase2(&["t0w02", "t1w02"], "e.emb").status.success());
    let manifest = ws.path("e.emb.manifest.json");
    let text = fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("\"command\": \"phase2\"") && text.contains("sha256") && text.contains("wall_time_secs"));
    let before = fs::read(ws.path("e.emb")).unwrap();
    fs::write(ws.path("e.emb"), "tampered").unwrap();
    let o = tmae(&["replay", p(&manifest)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(ws.path("e.emb")).unwrap(), before);

    let o = tmae(&["replay", p(&ws.path("know.bin.manifest.json"))]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn jobs_do_not_change_phase1_output() {
    let ws = Workspace::new();
    assert!(ws.phase1(&["--jobs", "1"]).status.success());
    let one = fs::read(ws.path("know.bin")).unwrap();
    assert!(ws.phase1(&["--jobs", "4"]).status.success());
    assert_eq!(one, fs::read(ws.path("know.bin")).unwrap());
}

#[test]
fn sentiment_pipeline_smoke() {
    let dir = TempDir::new().unwrap();
    let docs = sentiment_corpus(200, 0.1, 5);
    let (d, l) = labeled(dir.path(), "s", &docs);
    let know = dir.path().join("s.bin");
    let mut args = vec!["phase1", "--corpus", p(&d), "--out", p(&know)];
    args.extend_from_slice(SMALL);
    assert!(tmae(&args).status.success());
    let vocab = dir.path().join("s.bin.vocab");
    let out = dir.path().join("aug.txt");
    let o = tmae(&[
        "augment", "--docs", p(&d), "--labels", p(&l), "--knowledge", p(&know), "--vocab", p(&vocab),
        "--out-docs", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = tmae(&[
        "classify", "--train-docs", p(&d), "--train-labels", p(&l), "--augmented-docs", p(&out),
        "--augmented-labels", p(&dir.path().join("aug.txt.labels")), "--test-docs", p(&d), "--test-labels", p(&l),
        "--clauses", "40", "-T", "40", "-s", "3", "--epochs", "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

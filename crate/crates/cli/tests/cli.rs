use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn windowlens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_windowlens"))
        .args(args)
        .env_remove("WINDOWLENS_JOBS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(&o));
    o
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const GRAMMAR: &str = "sentences = 3000
zipf = 1.0
seed = 3
class = NOUN,30
class = VERB,15
class = ADJ,15
template = 3,ADJ NOUN VERB ADJ NOUN
template = 3,NOUN VERB NOUN
template = 2,ADJ ADJ NOUN VERB
";

/// Synthetic corpus plus its gold lexicon.
fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let grammar = dir.join("grammar.txt");
    fs::write(&grammar, GRAMMAR).unwrap();
    let corpus = dir.join("corpus.txt");
    let lexicon = dir.join("lexicon.tsv");
    ok(windowlens(&["gen-corpus", "--grammar", p(&grammar), "--out", p(&corpus), "--lexicon-out", p(&lexicon)]));
    (corpus, lexicon)
}

fn train(corpus: &Path, out: &Path, algo: &str, window: usize) {
    ok(windowlens(&[
        "train", "--corpus", p(corpus), "--algo", algo, "--dim", "16", "--window", &window.to_string(),
        "--min-count", "1", "--epochs", "2", "--seed", "7", "--out", p(out),
    ]));
}

fn write_benchmark(path: &Path, rows: &[(&str, &str, f64)]) {
    let text: String = rows.iter().map(|(a, b, s)| format!("{a}\t{b}\t{s}\n")).collect();
    fs::write(path, text).unwrap();
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn benchmark_rows() -> Vec<(&'static str, &'static str, f64)> {
    vec![
        ("noun0", "noun1", 9.0),
        ("noun2", "noun3", 8.0),
        ("verb0", "verb1", 7.5),
        ("adj0", "adj1", 7.0),
        ("noun0", "verb2", 5.0),
        ("adj2", "noun5", 3.0),
        ("verb3", "adj4", 2.0),
        ("noun7", "verb5", 1.0),
        ("adj0", "noun9", 0.0),
        ("noun4", "missing", 4.0),
    ]
}

#[test]
fn train_writes_loadable_model_and_reports_counts() {
    let dir = TempDir::new().unwrap();
    let (corpus, _) = fixture(dir.path());
    let model = dir.path().join("m.vec");
    let o = windowlens(&["train", "--corpus", p(&corpus), "--dim", "8", "--window", "2", "--min-count", "1", "--epochs", "1", "--out", p(&model)]);
    let o = ok(o);
    let err = stderr(&o);
    assert!(err.contains("vocabulary: 60 words"), "{err}");
    assert!(err.contains("tokens:"));
    let (m, _) = windowlens::vecstore::load_text_model(fs::read(&model).unwrap().as_slice(), None).unwrap();
    assert_eq!((m.len(), m.dim()), (60, 8));
}

#[test]
fn usage_errors_exit_two() {
    let o = windowlens(&["train", "--out", "x.vec"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--corpus"));

    let o = windowlens(&["train", "--corpus", "c.txt", "--window", "0", "--out", "x.vec"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("window must be ≥ 1"), "{}", stderr(&o));

    assert_eq!(windowlens(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(windowlens(&["eval", "--model", "0=m.vec", "--benchmark", "b.tsv", "--out", "o"]).status.code(), Some(2));
    assert_eq!(windowlens(&["sweep", "--windows", "1,x"]).status.code(), Some(2));
    assert_eq!(windowlens(&["enrich", "--out", "o.tsv"]).status.code(), Some(2));
    assert_eq!(windowlens(&["import-benchmark", "--input", "i", "--layout", "xml", "--out", "o"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_one_and_name_the_file() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.txt");
    let out = dir.path().join("out");
    let cases: Vec<Vec<&str>> = vec![
        vec!["train", "--corpus", p(&missing), "--out", p(&out)],
        vec!["eval", "--model", "2=/definitely/not/here.vec", "--benchmark", p(&missing), "--out", p(&out)],
        vec!["enrich", "--counts", p(&missing), "--out", p(&out)],
        vec!["gen-corpus", "--grammar", p(&missing), "--out", p(&out), "--lexicon-out", p(&out)],
        vec!["import-corpus", "--input", p(&missing), "--out", p(&out)],
        vec!["derive-lexicon", "--tagged", p(&missing), "--out", p(&out)],
    ];
    for args in cases {
        let o = windowlens(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        let err = stderr(&o);
        assert!(err.contains("nope.txt") || err.contains("here.vec"), "{args:?}: {err}");
    }
}

#[test]
fn eval_rows_delta_win_and_determinism() {
    let dir = TempDir::new().unwrap();
    let (corpus, _) = fixture(dir.path());
    let (m2, m15) = (dir.path().join("w2.vec"), dir.path().join("w15.vec"));
    train(&corpus, &m2, "sgns", 2);
    train(&corpus, &m15, "sgns", 15);
    let mut benches = Vec::new();
    for name in ["a", "b", "c"] {
        let path = dir.path().join(format!("{name}.tsv"));
        write_benchmark(&path, &benchmark_rows());
        benches.push(path);
    }
    let run = |out: &Path, models: &[String]| {
        let mut args = vec!["eval".to_string()];
        for m in models {
            args.extend(["--model".into(), m.clone()]);
        }
        for b in &benches {
            args.extend(["--benchmark".into(), p(b).into()]);
        }
        args.extend(["--out".into(), p(out).into()]);
        ok(windowlens(&args.iter().map(String::as_str).collect::<Vec<_>>()));
        fs::read_to_string(out).unwrap()
    };

    let plain = run(&dir.path().join("plain.tsv"), &[format!("sgns:2={}", p(&m2)), format!("sgns:3={}", p(&m15))]);
    assert!(plain.starts_with("# windowlens "));
    let rows = data_lines(&plain);
    assert_eq!(rows.len(), 7);
    assert!(rows[0].starts_with("benchmark\t"));
    assert!(rows[1].starts_with("a\tsgns\t2\t") && rows[6].starts_with("c\tsgns\t3\t"));
    assert!(!plain.contains("delta_win"));

    let models = [format!("sgns:2={}", p(&m2)), format!("sgns:15={}", p(&m15))];
    let first = run(&dir.path().join("one.tsv"), &models);
    let second = run(&dir.path().join("sub/two.tsv"), &models);
    assert_eq!(first, second);
    let block: Vec<&str> = first.lines().skip_while(|l| !l.starts_with("# delta_win")).collect();
    assert_eq!(block.len(), 5, "{first}");
    for line in &block[2..] {
        let value = line.split('\t').nth(2).unwrap();
        assert!(value == "NA" || value.parse::<f64>().is_ok(), "{line}");
    }
}

#[test]
fn enrich_counts_fixture_reproduces_published_p_value() {
    let dir = TempDir::new().unwrap();
    let counts = dir.path().join("counts.tsv");
    fs::write(&counts, "WordSim353\t122\t107\t53\t40\n").unwrap();
    let out = dir.path().join("e.tsv");
    ok(windowlens(&["enrich", "--counts", p(&counts), "--out", p(&out)]));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# windowlens "));
    let row = data_lines(&text)[1];
    let p_value: f64 = row.split('\t').nth(5).unwrap().parse().unwrap();
    assert!((p_value - 0.038).abs() < 0.001, "{row}");
}

#[test]
fn enrich_with_gold_lexicon_keeps_input_order_and_reports_degenerate_scores() {
    let dir = TempDir::new().unwrap();
    let (_, lexicon) = fixture(dir.path());
    let mut args = vec!["enrich".to_string(), "--gold-lexicon".into(), p(&lexicon).into()];
    for name in ["zeta", "alpha", "mid"] {
        let path = dir.path().join(format!("{name}.tsv"));
        write_benchmark(&path, &benchmark_rows());
        args.extend(["--benchmark".into(), p(&path).into()]);
    }
    let out = dir.path().join("e.tsv");
    args.extend(["--out".into(), p(&out).into()]);
    ok(windowlens(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    let text = fs::read_to_string(&out).unwrap();
    let names: Vec<&str> = data_lines(&text)[1..].iter().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(names, ["zeta", "alpha", "mid"]);

    let flat = dir.path().join("flat.tsv");
    write_benchmark(&flat, &[("noun0", "noun1", 5.0), ("verb0", "adj1", 5.0)]);
    let o = windowlens(&["enrich", "--gold-lexicon", p(&lexicon), "--benchmark", p(&flat), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("degenerate score range"), "{}", stderr(&o));
}

fn sweep_spec(dir: &Path, windows: &str) -> PathBuf {
    let (corpus, lexicon) = fixture(dir);
    let bench = dir.join("bench.tsv");
    write_benchmark(&bench, &benchmark_rows());
    let spec = dir.join("sweep.txt");
    fs::write(
        &spec,
        format!(
            "corpus = {}\nalgorithms = cbow,sgns\nwindows = {windows}\ndim = 16\nmin_count = 1\nepochs = 2\nseed = 11\n\
             gold_lexicon = {}\nbenchmark = {}\nk_search = 30\nk_keep = 5\n",
            corpus.file_name().unwrap().to_str().unwrap(),
            lexicon.file_name().unwrap().to_str().unwrap(),
            bench.file_name().unwrap().to_str().unwrap(),
        ),
    )
    .unwrap();
    spec
}

#[test]
fn sweep_writes_summary_per_algorithm_and_pos_deterministically() {
    let dir = TempDir::new().unwrap();
    let spec = sweep_spec(dir.path(), "1,5,15");
    let (a, b) = (dir.path().join("run_a"), dir.path().join("run_b"));
    ok(windowlens(&["sweep", "--spec", p(&spec), "--jobs", "3", "--out-dir", p(&a)]));
    let summary = fs::read_to_string(a.join("sweep_summary.tsv")).unwrap();
    assert!(summary.starts_with("# windowlens "));
    let rows = data_lines(&summary);
    assert_eq!(rows.len(), 1 + 2 * 3, "{summary}");
    let hist = fs::read_to_string(a.join("sweep.tsv")).unwrap();
    assert_eq!(data_lines(&hist).len(), 1 + 2 * 3 * 3 * 5);
    let eval = fs::read_to_string(a.join("eval.tsv")).unwrap();
    assert_eq!(data_lines(&eval).len(), 1 + 2 * 3);

    let o = Command::new(env!("CARGO_BIN_EXE_windowlens"))
        .args(["sweep", "--spec", p(&spec), "--out-dir", p(&b)])
        .env("WINDOWLENS_JOBS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["sweep.tsv", "sweep_summary.tsv", "eval.tsv"] {
        assert_eq!(fs::read_to_string(a.join(f)).unwrap(), fs::read_to_string(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sweep_rejects_too_few_windows() {
    let dir = TempDir::new().unwrap();
    let spec = sweep_spec(dir.path(), "5");
    let o = windowlens(&["sweep", "--spec", p(&spec), "--out-dir", p(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sweep needs ≥ 3 windows"), "{}", stderr(&o));
}

#[test]
fn sweep_reports_partial_failures() {
    let dir = TempDir::new().unwrap();
    let (corpus, lexicon) = fixture(dir.path());
    let mut models = Vec::new();
    for w in [1, 2, 4] {
        let m = dir.path().join(format!("w{w}.vec"));
        train(&corpus, &m, "sgns", w);
        models.push(format!("sgns:{w}={}", p(&m)));
    }
    models.push("cbow:1=/missing/a.vec".into());
    models.push("cbow:2=/missing/b.vec".into());
    models.push("cbow:4=/missing/c.vec".into());
    let out = dir.path().join("out");
    let mut args = vec!["sweep".to_string(), "--gold-lexicon".into(), p(&lexicon).into(), "--out-dir".into(), p(&out).into()];
    for m in &models {
        args.extend(["--model".into(), m.clone()]);
    }
    let o = windowlens(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("cbow window 1") && err.contains("a.vec"), "{err}");
}

#[test]
fn data_preparation_commands() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();

    let raw = d.join("raw.txt");
    fs::write(&raw, "The Cat sat, in 1999!\n\n  ...\nSecond LINE\n").unwrap();
    let corpus = d.join("corpus.txt");
    ok(windowlens(&["import-corpus", "--input", p(&raw), "--out", p(&corpus)]));
    assert_eq!(fs::read_to_string(&corpus).unwrap(), "the cat sat in one nine nine nine\nsecond line\n");

    let csv = d.join("ws.csv");
    fs::write(&csv, "Word 1,Word 2,Human (mean)\nTiger,cat,7.35\nbook,paper,7.46\n").unwrap();
    let canon = d.join("ws.tsv");
    ok(windowlens(&["import-benchmark", "--input", p(&csv), "--layout", "csv", "--skip-header", "--out", p(&canon)]));
    let b = windowlens::benchmarks::load_benchmark(fs::read(&canon).unwrap().as_slice(), "ws").unwrap();
    assert_eq!(b.len(), 2);
    assert_eq!(b.pairs[0].word1, "tiger");

    let tsv = d.join("sl.txt");
    fs::write(&tsv, "w1\tw2\tPOS\tscore\nold\tnew\tA\t1.58\n").unwrap();
    ok(windowlens(&["import-benchmark", "--input", p(&tsv), "--layout", "tsv", "--score-column", "4", "--skip-header", "--out", p(&canon)]));
    assert!(fs::read_to_string(&canon).unwrap().contains("old\tnew\t1.58"));

    let tagged = d.join("tagged.tsv");
    fs::write(&tagged, "run\tVERB\nrun\tNN\nrun\tVB\nred\tJJ\n").unwrap();
    let mft = d.join("mft.tsv");
    ok(windowlens(&["derive-lexicon", "--tagged", p(&tagged), "--out", p(&mft)]));
    assert_eq!(data_lines(&fs::read_to_string(&mft).unwrap()), ["red\tADJ", "run\tVERB"]);

    // A miniature WordNet dictionary directory.
    let wn = d.join("dict");
    fs::create_dir(&wn).unwrap();
    let header = "  1 This software and database is being provided to you\n";
    fs::write(wn.join("index.noun"), format!("{header}cat n 1 1 @ 1 0 02121620\nrun n 2 1 @ 2 0 1 2\nice_cream n 1 0 1 0 1\n")).unwrap();
    fs::write(wn.join("index.verb"), format!("{header}run v 1 0 1 0 3\nsit v 1 0 1 0 4\n")).unwrap();
    fs::write(wn.join("index.adj"), format!("{header}red a 1 0 1 0 5\n")).unwrap();
    fs::write(wn.join("index.adv"), format!("{header}fast r 1 0 1 0 6\n")).unwrap();
    fs::write(&mft, "cat\tNOUN\nrun\tVERB\nsit\tVERB\nred\tADJ\nfast\tADV\n").unwrap();
    let pivots = d.join("pivots.tsv");
    ok(windowlens(&["pivots", "--wordnet-dir", p(&wn), "--mft-lexicon", p(&mft), "--out", p(&pivots)]));
    let text = fs::read_to_string(&pivots).unwrap();
    assert_eq!(data_lines(&text), ["cat\tNOUN", "sit\tVERB", "red\tADJ"]);

    let model = d.join("m.vec");
    fs::write(&model, "4 2\ncat 1 0\nsit 0.9 0.1\nred 0 1\nrun 0.5 0.5\n").unwrap();
    let nn = d.join("nn.tsv");
    ok(windowlens(&["neighbors", "--model", p(&model), "--pivots", p(&pivots), "--k", "2", "--out", p(&nn)]));
    let text = fs::read_to_string(&nn).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows[0], "pivot\trank\tneighbor\tcosine");
    assert_eq!(rows.len(), 1 + 3 * 2);
    assert!(rows[1].starts_with("cat\t1\tsit\t"));
}

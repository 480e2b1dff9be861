//! Window sweeps over one corpus, driven by a key=value spec file, flags, or
//! both (flags win).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use windowlens::analysis::{
    window_sweep, write_sweep_histogram_tsv, write_sweep_summary_tsv, NeighborParams, SweepResult,
    DEFAULT_K_KEEP, DEFAULT_K_SEARCH,
};
use windowlens::lexicon::{build_pivots, PivotLists};
use windowlens::trainer::{TrainConfig, Trainer};
use windowlens::vecstore::Provenance;
use windowlens::{Algorithm, EmbeddingModel};

use super::eval::{eval_report, Labeled};
use crate::args::{BenchmarkArg, LexiconArgs, ModelArg};
use crate::report::{provenance, read_to_string, write_file};
use crate::SweepArgs;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub corpus: Option<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    pub windows: Vec<usize>,
    pub dim: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub seed: u64,
    pub models: Vec<ModelArg>,
    pub benchmarks: Vec<BenchmarkArg>,
    pub lexicon: LexiconArgs,
    pub pivots: Option<PathBuf>,
    pub k_search: usize,
    pub k_keep: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let t = TrainConfig::default();
        SweepSpec {
            corpus: None,
            algorithms: vec![Algorithm::Cbow, Algorithm::Sgns],
            windows: Vec::new(),
            dim: t.dim,
            min_count: t.min_count,
            epochs: t.epochs,
            seed: t.seed,
            models: Vec::new(),
            benchmarks: Vec::new(),
            lexicon: LexiconArgs::default(),
            pivots: None,
            k_search: DEFAULT_K_SEARCH,
            k_keep: DEFAULT_K_KEEP,
            output_dir: None,
        }
    }
}

fn list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<T>().map_err(|e| format!("{v:?}: {e}")))
        .collect()
}

impl SweepSpec {
    /// Parses `key = value` lines; relative paths are taken relative to `base`.
    /// `benchmark` and `model` may repeat.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut s = SweepSpec::default();
        let path = |v: &str| base.join(v);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            let value = value.trim();
            let bad = |e: String| anyhow!("line {}: {}: {e}", i + 1, key.trim());
            let num = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("bad number {v:?}")));
            match key.trim() {
                "corpus" => s.corpus = Some(path(value)),
                "algorithms" => s.algorithms = list(value).map_err(bad)?,
                "windows" => s.windows = list(value).map_err(bad)?,
                "dim" => s.dim = num(value)? as usize,
                "min_count" => s.min_count = num(value)?,
                "epochs" => s.epochs = num(value)? as usize,
                "seed" => s.seed = num(value)?,
                "k_search" => s.k_search = num(value)? as usize,
                "k_keep" => s.k_keep = num(value)? as usize,
                "benchmark" => {
                    let mut b: BenchmarkArg = value.parse().map_err(bad)?;
                    b.path = path(b.path.to_str().unwrap_or_default());
                    s.benchmarks.push(b);
                }
                "model" => {
                    let mut m: ModelArg = value.parse().map_err(bad)?;
                    m.path = path(m.path.to_str().unwrap_or_default());
                    s.models.push(m);
                }
                "wordnet_dir" => s.lexicon.wordnet_dir = Some(path(value)),
                "mft_lexicon" => s.lexicon.mft_lexicon = Some(path(value)),
                "gold_lexicon" => s.lexicon.gold_lexicon = Some(path(value)),
                "pivots" => s.pivots = Some(path(value)),
                "output_dir" => s.output_dir = Some(path(value)),
                other => bail!("line {}: unknown key {other:?}", i + 1),
            }
        }
        Ok(s)
    }

    fn apply_flags(&mut self, a: &SweepArgs) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &a.$field { self.$field = v.clone(); })*
            };
        }
        take!(algorithms, windows, dim, min_count, epochs, seed, k_search, k_keep);
        if a.corpus.is_some() {
            self.corpus = a.corpus.clone();
        }
        if a.out_dir.is_some() {
            self.output_dir = a.out_dir.clone();
        }
        if a.pivots.is_some() {
            self.pivots = a.pivots.clone();
        }
        if !a.models.is_empty() {
            self.models = a.models.clone();
        }
        if !a.benchmarks.is_empty() {
            self.benchmarks = a.benchmarks.clone();
        }
        if !a.lexicon.is_empty() {
            self.lexicon = a.lexicon.clone();
        }
    }

    /// Grouped (algorithm, window) → model source.
    fn jobs(&self) -> Result<Vec<(Algorithm, usize, Option<&ModelArg>)>> {
        if self.models.is_empty() {
            if self.corpus.is_none() {
                bail!("no corpus and no models given");
            }
            check_windows(&self.windows)?;
            let mut algos = self.algorithms.clone();
            algos.dedup();
            if algos.is_empty() {
                bail!("no algorithms given");
            }
            return Ok(algos
                .iter()
                .flat_map(|&a| self.windows.iter().map(move |&w| (a, w, None)))
                .collect());
        }
        let mut grouped: BTreeMap<Algorithm, Vec<&ModelArg>> = BTreeMap::new();
        for m in &self.models {
            let algo = match (m.algorithm, self.algorithms.as_slice()) {
                (Some(a), _) => a,
                (None, [only]) => *only,
                (None, _) => bail!("model {} needs an algorithm prefix", m.path.display()),
            };
            grouped.entry(algo).or_default().push(m);
        }
        let mut jobs = Vec::new();
        for (algo, mut ms) in grouped {
            ms.sort_by_key(|m| m.window);
            check_windows(&ms.iter().map(|m| m.window).collect::<Vec<_>>())?;
            jobs.extend(ms.into_iter().map(|m| (algo, m.window, Some(m))));
        }
        Ok(jobs)
    }

    /// One line summarizing the effective settings.
    fn describe(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut d = format!(
            "# sweep: algorithms={} windows={} dim={} min_count={} epochs={} seed={} k_search={} k_keep={}",
            join(self.algorithms.iter().map(|a| a.to_string()).collect()),
            join(self.windows.iter().map(|w| w.to_string()).collect()),
            self.dim,
            self.min_count,
            self.epochs,
            self.seed,
            self.k_search,
            self.k_keep
        );
        if let Some(c) = &self.corpus {
            let _ = write!(d, " corpus={}", c.display());
        }
        for m in &self.models {
            let _ = write!(d, " model={}:{}={}", m.label(), m.window, m.path.display());
        }
        d.push('\n');
        d
    }
}

fn check_windows(windows: &[usize]) -> Result<()> {
    if windows.contains(&0) {
        bail!("window must be ≥ 1");
    }
    if windows.windows(2).any(|w| w[0] >= w[1]) {
        bail!("windows must be strictly increasing, got {windows:?}");
    }
    if windows.len() < 3 {
        return Err(windowlens::Error::TooFewWindows(windows.len()).into());
    }
    Ok(())
}

fn train_one(spec: &SweepSpec, text: &str, algorithm: Algorithm, window: usize) -> Result<EmbeddingModel> {
    let cfg = TrainConfig {
        algorithm,
        window,
        dim: spec.dim,
        min_count: spec.min_count,
        epochs: spec.epochs,
        seed: spec.seed,
        threads: 1,
        ..TrainConfig::default()
    };
    let corpus = spec.corpus.as_ref().map(|c| c.display().to_string()).unwrap_or_default();
    let (model, stats) = Trainer::new(cfg)?.with_corpus_id(corpus).train(text)?;
    eprintln!("{algorithm} window {window}: {} words, {} tokens", stats.vocabulary_size, stats.corpus_tokens);
    Ok(model)
}

pub fn run(a: SweepArgs) -> Result<()> {
    let mut spec = match &a.spec {
        Some(path) => {
            let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
            SweepSpec::parse(&read_to_string(path, "sweep spec")?, &base)
                .with_context(|| format!("in {}", path.display()))?
        }
        None => SweepSpec::default(),
    };
    spec.apply_flags(&a);
    let out_dir = spec.output_dir.clone().ok_or_else(|| anyhow!("no output directory (--out-dir or output_dir)"))?;
    let jobs = spec.jobs()?;

    let lex = spec.lexicon.load()?;
    let pivots = match &spec.pivots {
        Some(p) => PivotLists::read_tsv(read_to_string(p, "pivots")?.as_bytes())
            .with_context(|| format!("cannot read pivots {}", p.display()))?,
        None => build_pivots(&lex)?,
    };
    let benchmarks = spec.benchmarks.iter().map(|b| b.load()).collect::<Result<Vec<_>>>()?;
    let text = match (&spec.corpus, spec.models.is_empty()) {
        (Some(c), true) => read_to_string(c, "corpus")?,
        _ => String::new(),
    };

    let threads = a.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let results: Vec<Result<EmbeddingModel>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(algorithm, window, source)| {
                let model = match source {
                    Some(m) => m.load()?,
                    None => train_one(&spec, &text, algorithm, window)?,
                };
                Ok(model.with_provenance(Provenance { algorithm, window, corpus: None }))
            })
            .collect()
    });

    let mut failures = Vec::new();
    let mut by_algo: BTreeMap<Algorithm, Option<BTreeMap<usize, EmbeddingModel>>> = BTreeMap::new();
    for ((algorithm, window, _), result) in jobs.iter().zip(results) {
        let slot = by_algo.entry(*algorithm).or_insert_with(|| Some(BTreeMap::new()));
        match result {
            Ok(model) => {
                if let Some(models) = slot {
                    models.insert(*window, model);
                }
            }
            Err(e) => {
                eprintln!("error: {algorithm} window {window}: {e:#}");
                failures.push(format!("{algorithm} window {window}"));
                *slot = None;
            }
        }
    }

    let params = NeighborParams { k_search: spec.k_search, k_keep: spec.k_keep };
    let mut sweeps: Vec<SweepResult> = Vec::new();
    let mut complete = Vec::new();
    for (algorithm, models) in &by_algo {
        let Some(models) = models else { continue };
        match window_sweep(models, &pivots, &lex, params) {
            Ok(s) => sweeps.push(s),
            Err(e) => {
                eprintln!("error: {algorithm} sweep: {e:#}");
                failures.push(format!("{algorithm} sweep"));
            }
        }
        complete.push((algorithm, models));
    }

    let header = provenance("sweep", Some(spec.seed))
        + &spec.describe()
        + "# same_pos_ratio denominator: all tallied neighbors, ADV and OTHER included\n";
    if !sweeps.is_empty() {
        let mut hist = header.clone().into_bytes();
        write_sweep_histogram_tsv(&mut hist, &sweeps)?;
        write_file(&out_dir.join("sweep.tsv"), &hist)?;
        let mut summary = header.clone().into_bytes();
        write_sweep_summary_tsv(&mut summary, &sweeps)?;
        write_file(&out_dir.join("sweep_summary.tsv"), &summary)?;
    }
    if !benchmarks.is_empty() && !complete.is_empty() {
        let labeled: Vec<Labeled> = complete
            .iter()
            .flat_map(|(algorithm, models)| {
                models.iter().map(|(&window, model)| Labeled { label: algorithm.to_string(), window, model })
            })
            .collect();
        let body = eval_report(&labeled, &benchmarks)?;
        write_file(&out_dir.join("eval.tsv"), (header.clone() + &body).as_bytes())?;
    }
    if a.save_models {
        for (algorithm, models) in &complete {
            for (window, model) in models.iter() {
                let mut bytes = Vec::new();
                model.write_text(&mut bytes)?;
                write_file(&out_dir.join("models").join(format!("{algorithm}_w{window}.vec")), &bytes)?;
            }
        }
    }
    if !failures.is_empty() {
        bail!("{} sweep job(s) failed: {}", failures.len(), failures.join(", "));
    }
    Ok(())
}

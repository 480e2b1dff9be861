//! Flag values with structure: model and benchmark references, lexicons.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use windowlens::benchmarks::{load_benchmark, Benchmark};
use windowlens::lexicon::{load_mft_lexicon, PosLexicon};
use windowlens::vecstore::{load_text_model, Provenance};
use windowlens::{Algorithm, EmbeddingModel};

/// `[algo:]window=path`
#[derive(Clone, Debug, PartialEq)]
pub struct ModelArg {
    pub algorithm: Option<Algorithm>,
    pub window: usize,
    pub path: PathBuf,
}

impl FromStr for ModelArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (key, path) = s.split_once('=').ok_or("expected [algo:]window=path")?;
        let (algorithm, window) = match key.split_once(':') {
            Some((a, w)) => (Some(a.parse().map_err(|e: windowlens::Error| e.to_string())?), w),
            None => (None, key),
        };
        let window: usize = window.parse().map_err(|_| format!("bad window {window:?}"))?;
        if window == 0 {
            return Err("window must be ≥ 1".into());
        }
        if path.is_empty() {
            return Err("empty model path".into());
        }
        Ok(ModelArg { algorithm, window, path: path.into() })
    }
}

impl ModelArg {
    pub fn label(&self) -> String {
        self.algorithm.map_or("-".into(), |a| a.to_string())
    }

    pub fn load(&self) -> Result<EmbeddingModel> {
        let file = File::open(&self.path).with_context(|| format!("cannot open model {}", self.path.display()))?;
        let (model, warnings) = load_text_model(BufReader::new(file), None)
            .with_context(|| format!("cannot read model {}", self.path.display()))?;
        if warnings.duplicate_words + warnings.zero_vectors > 0 {
            log::warn!(
                "{}: skipped {} duplicate words and {} zero vectors",
                self.path.display(),
                warnings.duplicate_words,
                warnings.zero_vectors
            );
        }
        Ok(match self.algorithm {
            Some(algorithm) => model.with_provenance(Provenance { algorithm, window: self.window, corpus: None }),
            None => model,
        })
    }
}

/// `[name=]path`; without a name the file stem is used.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkArg {
    pub name: String,
    pub path: PathBuf,
}

impl FromStr for BenchmarkArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some((name, path)) = s.split_once('=') {
            if !name.is_empty() && !name.contains(['/', '\\']) && !path.is_empty() {
                return Ok(BenchmarkArg { name: name.into(), path: path.into() });
            }
        }
        let path = PathBuf::from(s);
        let name = path
            .file_stem()
            .and_then(|n| n.to_str())
            .ok_or_else(|| format!("cannot name benchmark {s:?}"))?
            .to_owned();
        Ok(BenchmarkArg { name, path })
    }
}

impl BenchmarkArg {
    pub fn load(&self) -> Result<Benchmark> {
        let file = File::open(&self.path).with_context(|| format!("cannot open benchmark {}", self.path.display()))?;
        load_benchmark(BufReader::new(file), &self.name)
            .with_context(|| format!("cannot read benchmark {}", self.path.display()))
    }
}

#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct LexiconArgs {
    /// WordNet dictionary directory holding index.noun, index.verb, ...
    #[arg(long, requires = "mft_lexicon")]
    pub wordnet_dir: Option<PathBuf>,
    /// Most-frequent-tag lexicon, `word<TAB>TAG`.
    #[arg(long)]
    pub mft_lexicon: Option<PathBuf>,
    /// Gold `word<TAB>TAG` lexicon used as both POS sources (synthetic runs).
    #[arg(long, conflicts_with_all = ["wordnet_dir", "mft_lexicon"])]
    pub gold_lexicon: Option<PathBuf>,
}

pub fn read_tag_file(path: &Path) -> Result<HashMap<String, windowlens::PosTag>> {
    let file = File::open(path).with_context(|| format!("cannot open lexicon {}", path.display()))?;
    Ok(load_mft_lexicon(BufReader::new(file))
        .with_context(|| format!("cannot read lexicon {}", path.display()))?
        .tags)
}

impl LexiconArgs {
    pub fn is_empty(&self) -> bool {
        self.wordnet_dir.is_none() && self.mft_lexicon.is_none() && self.gold_lexicon.is_none()
    }

    pub fn load(&self) -> Result<PosLexicon> {
        match (&self.gold_lexicon, &self.wordnet_dir, &self.mft_lexicon) {
            (Some(gold), _, _) => Ok(PosLexicon::from_gold(read_tag_file(gold)?)),
            (None, Some(dir), Some(mft)) => PosLexicon::from_wordnet_dir(dir, read_tag_file(mft)?)
                .with_context(|| format!("cannot read WordNet indices in {}", dir.display())),
            _ => bail!(crate::UsageError(
                "a lexicon is required: --gold-lexicon, or --wordnet-dir with --mft-lexicon".into()
            )),
        }
    }
}

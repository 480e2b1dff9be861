//! Word-level CBOW and skip-gram with negative sampling (SGNS).
//!
//! For every token position an effective window `b` is drawn uniformly from
//! `1..=window` and context words within `±b` (after frequent-word
//! subsampling) form the training pairs. Input-side vectors become the model.
//!
//! Parameters live in matrices of relaxed atomics. With `threads == 1` the
//! run is bitwise reproducible for a fixed seed; with more threads workers
//! update the shared matrices lock-free and results vary between runs.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};
use std::sync::Arc;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::vecstore::{EmbeddingModel, Provenance};
use crate::{Error, Result};

const NEGATIVE_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f64 = 1e-4;
const LR_SYNC_INTERVAL: u64 = 10_000;
const NEGATIVE_RETRIES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Cbow,
    Sgns,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Cbow => "cbow",
            Algorithm::Sgns => "sgns",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cbow" => Ok(Algorithm::Cbow),
            "sgns" | "skipgram" | "skip-gram" => Ok(Algorithm::Sgns),
            _ => Err(Error::InvalidArgument(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub dim: usize,
    /// Maximum context window on each side of the target.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly over processed tokens.
    pub learning_rate: f64,
    pub min_count: u64,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample_threshold: f64,
    pub seed: u64,
    /// Worker threads. 1 gives deterministic output.
    pub threads: usize,
    /// Do not let context windows cross line breaks.
    pub respect_lines: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            algorithm: Algorithm::Sgns,
            dim: 300,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.05,
            min_count: 5,
            subsample_threshold: 1e-4,
            seed: 1,
            threads: 1,
            respect_lines: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.dim < 1 {
            return bad("dim must be ≥ 1");
        }
        if self.window < 1 {
            return bad("window must be ≥ 1");
        }
        if self.epochs < 1 {
            return bad("epochs must be ≥ 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if self.algorithm == Algorithm::Sgns && self.negatives < 1 {
            return bad("SGNS needs negatives ≥ 1");
        }
        if !(self.subsample_threshold >= 0.0 && self.subsample_threshold.is_finite()) {
            return bad("subsample_threshold must be ≥ 0");
        }
        if self.threads < 1 {
            return bad("threads must be ≥ 1");
        }
        Ok(())
    }
}

/// Retained words with their counts, in descending-count order (ties
/// lexicographic), plus the unigram^0.75 negative-sampling distribution.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    total_tokens: u64,
    negative_probs: Vec<f64>,
    negative_cdf: Vec<f64>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn index_of(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.index_of(word).map(|i| self.counts[i as usize])
    }

    /// Occurrences of retained words in the corpus.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Negative-sampling probabilities, aligned with [`Vocabulary::words`].
    pub fn negative_probabilities(&self) -> &[f64] {
        &self.negative_probs
    }

    fn sample_negative<R: Rng>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let i = self.negative_cdf.partition_point(|&c| c <= u);
        i.min(self.words.len() - 1) as u32
    }
}

/// Counts tokens and keeps those occurring at least `min_count` times.
pub fn build_vocabulary<'a, I>(tokens: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut freq: HashMap<&'a str, u64> = HashMap::new();
    for tok in tokens {
        *freq.entry(tok).or_insert(0) += 1;
    }
    if freq.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut entries: Vec<(&str, u64)> = freq.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let words: Vec<String> = entries.iter().map(|(w, _)| w.to_string()).collect();
    let counts: Vec<u64> = entries.iter().map(|&(_, c)| c).collect();
    let index = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i as u32))
        .collect();
    let total_tokens = counts.iter().sum();

    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(NEGATIVE_POWER)).collect();
    let z: f64 = weights.iter().sum();
    let negative_probs: Vec<f64> = weights.iter().map(|w| w / z).collect();
    let mut acc = 0.0;
    let mut negative_cdf: Vec<f64> = negative_probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    *negative_cdf.last_mut().expect("vocabulary is non-empty") = 1.0;

    Ok(Vocabulary {
        words,
        counts,
        index,
        total_tokens,
        negative_probs,
        negative_cdf,
    })
}

#[inline]
fn sigmoid<T: Float>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

// ln(1 + e^x) without overflow.
#[inline]
fn softplus<T: Float>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

/// Logistic loss of a score and its derivative with respect to the score.
///
/// Label `true` gives `−ln σ(s)`, label `false` gives `−ln σ(−s)`; the
/// derivative is `σ(s) − label` in both cases.
#[inline]
pub fn logistic_loss<T: Float>(score: T, label: bool) -> (T, T) {
    if label {
        (softplus(-score), sigmoid(score) - T::one())
    } else {
        (softplus(score), sigmoid(score))
    }
}

/// Loss of one (target, context) pair and its exact gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient<T> {
    pub loss: T,
    pub target_grad: Vec<T>,
    pub context_grad: Vec<T>,
}

/// Per-pair SGNS objective on a target input vector and a context output
/// vector.
pub fn sgns_pair_loss_and_gradient<T: Float>(target: &[T], context: &[T], label: bool) -> PairGradient<T> {
    assert_eq!(target.len(), context.len(), "vector dimensions differ");
    let score = dot(target, context);
    let (loss, g) = logistic_loss(score, label);
    PairGradient {
        loss,
        target_grad: context.iter().map(|&c| g * c).collect(),
        context_grad: target.iter().map(|&t| g * t).collect(),
    }
}

/// Loss of one CBOW example and its exact gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct CbowGradient<T> {
    pub loss: T,
    /// Gradient for each context input vector (identical, one per context).
    pub context_grads: Vec<Vec<T>>,
    pub target_grad: Vec<T>,
    pub negative_grads: Vec<Vec<T>>,
}

/// CBOW objective: the mean of the context input vectors scores the target
/// output vector (label 1) against negative output vectors (label 0).
pub fn cbow_loss_and_gradient<T: Float>(contexts: &[&[T]], target: &[T], negatives: &[&[T]]) -> CbowGradient<T> {
    assert!(!contexts.is_empty(), "CBOW needs at least one context vector");
    let dim = target.len();
    let n_ctx = T::from(contexts.len()).expect("context count fits the float type");
    let mut hidden = vec![T::zero(); dim];
    for c in contexts {
        assert_eq!(c.len(), dim, "vector dimensions differ");
        for (h, &v) in hidden.iter_mut().zip(c.iter()) {
            *h = *h + v;
        }
    }
    for h in hidden.iter_mut() {
        *h = *h / n_ctx;
    }

    let mut loss = T::zero();
    let mut hidden_grad = vec![T::zero(); dim];
    let mut score_output = |out: &[T], label: bool| -> Vec<T> {
        let (l, g) = logistic_loss(dot(&hidden, out), label);
        loss = loss + l;
        for (hg, &o) in hidden_grad.iter_mut().zip(out) {
            *hg = *hg + g * o;
        }
        hidden.iter().map(|&h| g * h).collect()
    };
    let target_grad = score_output(target, true);
    let negative_grads = negatives.iter().map(|n| score_output(n, false)).collect();

    let per_context: Vec<T> = hidden_grad.iter().map(|&g| g / n_ctx).collect();
    CbowGradient {
        loss,
        context_grads: vec![per_context; contexts.len()],
        target_grad,
        negative_grads,
    }
}

#[inline]
fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// One co-occurrence produced during training: `offset` is the signed
/// distance from the center to the context token in the subsampled stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairEvent {
    pub center: u32,
    pub context: u32,
    pub offset: isize,
}

pub type PairObserver = Arc<dyn Fn(PairEvent) + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainStats {
    pub vocabulary_size: usize,
    /// Corpus tokens whose word made it into the vocabulary.
    pub training_tokens: u64,
    /// Total corpus tokens, before vocabulary filtering.
    pub corpus_tokens: u64,
    /// Mean per-example loss over the last epoch.
    pub final_loss: f64,
}

pub struct Trainer {
    config: TrainConfig,
    observer: Option<PairObserver>,
    corpus_id: Option<String>,
}

impl Trainer {
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(Trainer {
            config,
            observer: None,
            corpus_id: None,
        })
    }

    /// Calls `observer` for every (center, context) pair used in training.
    pub fn with_observer(mut self, observer: PairObserver) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn with_corpus_id(mut self, id: impl Into<String>) -> Self {
        self.corpus_id = Some(id.into());
        self
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Trains on whitespace-tokenized `text`.
    pub fn train(&self, text: &str) -> Result<(EmbeddingModel, TrainStats)> {
        let cfg = &self.config;
        let vocab = build_vocabulary(text.split_whitespace(), cfg.min_count)?;

        let mut ids = Vec::with_capacity(vocab.total_tokens as usize);
        let mut segments = Vec::new();
        let mut corpus_tokens = 0u64;
        if cfg.respect_lines {
            for line in text.lines() {
                let start = ids.len();
                for tok in line.split_whitespace() {
                    corpus_tokens += 1;
                    ids.extend(vocab.index_of(tok));
                }
                if ids.len() > start {
                    segments.push(start..ids.len());
                }
            }
        } else {
            for tok in text.split_whitespace() {
                corpus_tokens += 1;
                ids.extend(vocab.index_of(tok));
            }
            segments.push(0..ids.len());
        }

        let keep_prob = keep_probabilities(&vocab, cfg.subsample_threshold);
        let dim = cfg.dim;
        let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let bound = 0.5 / dim as f32;
        let input = SharedMatrix::from_fn(vocab.len(), dim, || init_rng.gen_range(-bound..bound));
        let output = SharedMatrix::zeros(vocab.len(), dim);

        let shared = Shared {
            cfg,
            vocab: &vocab,
            keep_prob: &keep_prob,
            ids: &ids,
            input: &input,
            output: &output,
            processed: AtomicU64::new(0),
            total_work: cfg.epochs as u64 * ids.len() as u64,
            failed: AtomicBool::new(false),
            observer: self.observer.as_deref(),
        };

        let plans = split_work(&segments, ids.len(), cfg.threads);
        let mut final_loss = (0.0, 0u64);
        for epoch in 0..cfg.epochs {
            let results: Vec<Result<(f64, u64)>> = if plans.len() == 1 {
                vec![run_worker(&shared, &plans[0], epoch, 0)]
            } else {
                std::thread::scope(|scope| {
                    let handles: Vec<_> = plans
                        .iter()
                        .enumerate()
                        .map(|(w, plan)| {
                            let shared = &shared;
                            scope.spawn(move || run_worker(shared, plan, epoch, w))
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("training worker panicked"))
                        .collect()
                })
            };
            let mut sum = (0.0, 0u64);
            for r in results {
                let (l, n) = r?;
                sum.0 += l;
                sum.1 += n;
            }
            final_loss = sum;
            log::debug!(
                "epoch {}: mean loss {:.5}",
                epoch + 1,
                sum.0 / sum.1.max(1) as f64
            );
        }

        let raw = input.to_vec();
        let model = EmbeddingModel::from_rows(vocab.words().to_vec(), dim, raw)?.with_provenance(Provenance {
            algorithm: cfg.algorithm,
            window: cfg.window,
            corpus: self.corpus_id.clone(),
        });
        let stats = TrainStats {
            vocabulary_size: vocab.len(),
            training_tokens: ids.len() as u64,
            corpus_tokens,
            final_loss: final_loss.0 / final_loss.1.max(1) as f64,
        };
        Ok((model, stats))
    }
}

/// Trains a model with the given configuration.
pub fn train(text: &str, config: &TrainConfig) -> Result<EmbeddingModel> {
    Ok(Trainer::new(config.clone())?.train(text)?.0)
}

fn keep_probabilities(vocab: &Vocabulary, threshold: f64) -> Vec<f32> {
    if threshold <= 0.0 {
        return vec![1.0; vocab.len()];
    }
    let scaled = threshold * vocab.total_tokens() as f64;
    vocab
        .counts()
        .iter()
        .map(|&c| {
            let c = c as f64;
            (((c / scaled).sqrt() + 1.0) * scaled / c).min(1.0) as f32
        })
        .collect()
}

// Each worker gets a contiguous slice of the token stream, cut along segment
// boundaries.
fn split_work(segments: &[Range<usize>], n_tokens: usize, threads: usize) -> Vec<Vec<Range<usize>>> {
    let threads = threads.max(1).min(n_tokens.max(1));
    (0..threads)
        .map(|w| {
            let lo = w * n_tokens / threads;
            let hi = (w + 1) * n_tokens / threads;
            segments
                .iter()
                .filter_map(|s| {
                    let start = s.start.max(lo);
                    let end = s.end.min(hi);
                    (start < end).then_some(start..end)
                })
                .collect()
        })
        .collect()
}

struct Shared<'a> {
    cfg: &'a TrainConfig,
    vocab: &'a Vocabulary,
    keep_prob: &'a [f32],
    ids: &'a [u32],
    input: &'a SharedMatrix,
    output: &'a SharedMatrix,
    processed: AtomicU64,
    total_work: u64,
    failed: AtomicBool,
    observer: Option<&'a (dyn Fn(PairEvent) + Send + Sync)>,
}

fn worker_seed(seed: u64, epoch: usize, worker: usize) -> u64 {
    seed ^ (epoch as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (worker as u64 + 1).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
}

fn run_worker(sh: &Shared<'_>, plan: &[Range<usize>], epoch: usize, worker: usize) -> Result<(f64, u64)> {
    let cfg = sh.cfg;
    let dim = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(worker_seed(cfg.seed, epoch, worker));
    let mut kept: Vec<(u32, usize)> = Vec::new();
    let mut hidden = vec![0f32; dim];
    let mut hidden_grad = vec![0f32; dim];
    let mut out_row = vec![0f32; dim];
    let mut contexts: Vec<u32> = Vec::with_capacity(2 * cfg.window);
    let mut unsynced = 0u64;
    let mut lr = current_lr(sh, sh.processed.load(Ordering::Relaxed));
    let mut loss_sum = 0.0f64;
    let mut examples = 0u64;

    for piece in plan {
        kept.clear();
        for pos in piece.clone() {
            let id = sh.ids[pos];
            let p = sh.keep_prob[id as usize];
            if p >= 1.0 || rng.gen::<f32>() < p {
                kept.push((id, pos));
            }
        }
        // Progress counts every token of the piece, including subsampled ones.
        let per_token = piece.len() as f64 / kept.len().max(1) as f64;
        let mut progress = 0.0f64;

        for i in 0..kept.len() {
            if sh.failed.load(Ordering::Relaxed) {
                return Ok((loss_sum, examples));
            }
            progress += per_token;
            let step = progress as u64;
            progress -= step as f64;
            unsynced += step;
            if unsynced >= LR_SYNC_INTERVAL {
                let done = sh.processed.fetch_add(unsynced, Ordering::Relaxed) + unsynced;
                unsynced = 0;
                lr = current_lr(sh, done);
            }

            let (center, position) = kept[i];
            let b = rng.gen_range(1..=cfg.window);
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(kept.len() - 1);
            contexts.clear();
            for j in lo..=hi {
                if j == i {
                    continue;
                }
                let ctx = kept[j].0;
                if let Some(obs) = sh.observer {
                    obs(PairEvent {
                        center,
                        context: ctx,
                        offset: j as isize - i as isize,
                    });
                }
                contexts.push(ctx);
            }
            if contexts.is_empty() {
                continue;
            }

            let loss = match cfg.algorithm {
                Algorithm::Sgns => {
                    let mut total = 0.0f32;
                    for &ctx in &contexts {
                        sh.input.read_row(center as usize, &mut hidden);
                        hidden_grad.fill(0.0);
                        total += negative_sampling_update(
                            sh,
                            &mut rng,
                            &hidden,
                            &mut hidden_grad,
                            &mut out_row,
                            ctx,
                            lr,
                        );
                        sh.input.add_to_row(center as usize, &hidden_grad, -lr);
                    }
                    total
                }
                Algorithm::Cbow => {
                    hidden.fill(0.0);
                    for &ctx in &contexts {
                        sh.input.add_row_into(ctx as usize, &mut hidden);
                    }
                    let inv = 1.0 / contexts.len() as f32;
                    hidden.iter_mut().for_each(|h| *h *= inv);
                    hidden_grad.fill(0.0);
                    let total = negative_sampling_update(
                        sh,
                        &mut rng,
                        &hidden,
                        &mut hidden_grad,
                        &mut out_row,
                        center,
                        lr,
                    );
                    // The full hidden-layer gradient goes to every context
                    // word (word2vec/fastText update rule).
                    for &ctx in &contexts {
                        sh.input.add_to_row(ctx as usize, &hidden_grad, -lr);
                    }
                    total
                }
            };
            if !loss.is_finite() {
                sh.failed.store(true, Ordering::Relaxed);
                return Err(Error::Divergence {
                    epoch: epoch + 1,
                    position,
                });
            }
            loss_sum += loss as f64;
            examples += 1;
        }
    }
    sh.processed.fetch_add(unsynced, Ordering::Relaxed);
    Ok((loss_sum, examples))
}

fn current_lr(sh: &Shared<'_>, done: u64) -> f32 {
    let frac = 1.0 - done as f64 / (sh.total_work + 1) as f64;
    (sh.cfg.learning_rate * frac.max(MIN_LR_FRACTION)) as f32
}

// Scores `hidden` against the positive output row and `negatives` sampled
// rows, updates those output rows in place and accumulates the gradient with
// respect to `hidden` into `hidden_grad`. Returns the summed loss.
fn negative_sampling_update<R: Rng>(
    sh: &Shared<'_>,
    rng: &mut R,
    hidden: &[f32],
    hidden_grad: &mut [f32],
    out_row: &mut [f32],
    positive: u32,
    lr: f32,
) -> f32 {
    let mut loss = 0.0;
    let mut update = |target: u32, label: bool| {
        sh.output.read_row(target as usize, out_row);
        let (l, g) = logistic_loss(dot(hidden, out_row), label);
        loss += l;
        for (hg, &o) in hidden_grad.iter_mut().zip(out_row.iter()) {
            *hg += g * o;
        }
        sh.output.add_to_row(target as usize, hidden, -lr * g);
    };
    update(positive, true);
    for _ in 0..sh.cfg.negatives {
        let neg = (0..NEGATIVE_RETRIES)
            .map(|_| sh.vocab.sample_negative(rng))
            .find(|&n| n != positive);
        if let Some(neg) = neg {
            update(neg, false);
        }
    }
    loss
}

/// Row-major `f32` matrix with relaxed atomic cells, shared by workers.
struct SharedMatrix {
    data: Vec<AtomicU32>,
    dim: usize,
}

impl SharedMatrix {
    fn zeros(rows: usize, dim: usize) -> Self {
        SharedMatrix {
            data: (0..rows * dim).map(|_| AtomicU32::new(0f32.to_bits())).collect(),
            dim,
        }
    }

    fn from_fn(rows: usize, dim: usize, mut f: impl FnMut() -> f32) -> Self {
        SharedMatrix {
            data: (0..rows * dim).map(|_| AtomicU32::new(f().to_bits())).collect(),
            dim,
        }
    }

    #[inline]
    fn row(&self, row: usize) -> &[AtomicU32] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    #[inline]
    fn read_row(&self, row: usize, out: &mut [f32]) {
        for (o, cell) in out.iter_mut().zip(self.row(row)) {
            *o = f32::from_bits(cell.load(Ordering::Relaxed));
        }
    }

    #[inline]
    fn add_row_into(&self, row: usize, acc: &mut [f32]) {
        for (a, cell) in acc.iter_mut().zip(self.row(row)) {
            *a += f32::from_bits(cell.load(Ordering::Relaxed));
        }
    }

    /// `row += scale · delta`
    #[inline]
    fn add_to_row(&self, row: usize, delta: &[f32], scale: f32) {
        for (cell, &d) in self.row(row).iter().zip(delta) {
            let v = f32::from_bits(cell.load(Ordering::Relaxed)) + scale * d;
            cell.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn to_vec(&self) -> Vec<f32> {
        self.data
            .iter()
            .map(|c| f32::from_bits(c.load(Ordering::Relaxed)))
            .collect()
    }
}

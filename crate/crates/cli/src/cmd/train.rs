use anyhow::{Context, Result};
use windowlens::trainer::{TrainConfig, Trainer};

use crate::report::{read_to_string, write_file};
use crate::{TrainArgs, UsageError};

pub fn config(a: &TrainArgs) -> Result<TrainConfig> {
    let cfg = TrainConfig {
        algorithm: a.algo,
        dim: a.dim,
        window: a.window,
        negatives: a.negatives,
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        min_count: a.min_count,
        subsample_threshold: a.subsample,
        seed: a.seed,
        threads: a.threads,
        respect_lines: a.respect_lines,
    };
    match cfg.validate() {
        Ok(()) => Ok(cfg),
        Err(windowlens::Error::InvalidConfig(msg)) => Err(UsageError(msg).into()),
        Err(e) => Err(e.into()),
    }
}

pub fn run(a: TrainArgs) -> Result<()> {
    let cfg = config(&a)?;
    let text = read_to_string(&a.corpus, "corpus")?;
    let (model, stats) = Trainer::new(cfg)?
        .with_corpus_id(a.corpus.display().to_string())
        .train(&text)
        .with_context(|| format!("training on {}", a.corpus.display()))?;
    eprintln!(
        "vocabulary: {} words; tokens: {} ({} in vocabulary); final loss {:.4}",
        stats.vocabulary_size, stats.corpus_tokens, stats.training_tokens, stats.final_loss
    );
    let mut bytes = Vec::new();
    model.write_text(&mut bytes)?;
    write_file(&a.out, &bytes)
}

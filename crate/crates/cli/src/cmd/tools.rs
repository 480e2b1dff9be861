//! Data preparation and inspection commands.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};

use anyhow::{Context, Result};
use windowlens::benchmarks::{import_benchmark as import, ImportLayout};
use windowlens::corpusgen::{generate, SyntheticGrammar};
use windowlens::lexicon::{build_pivots, derive_mft_lexicon, write_mft_lexicon, PivotLists};
use windowlens::vecstore::{write_neighbor_tsv, NeighborList};

use crate::args::{read_tag_file, ModelArg};
use crate::report::{provenance, read_to_string, write_file};
use crate::{
    DeriveLexiconArgs, GenCorpusArgs, ImportBenchmarkArgs, ImportCorpusArgs, Layout, NeighborsArgs, PivotsArgs,
    UsageError,
};

fn open(path: &std::path::Path, what: &str) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {what} {}", path.display()))?))
}

pub fn pivots(a: PivotsArgs) -> Result<()> {
    let lex = windowlens::lexicon::PosLexicon::from_wordnet_dir(&a.wordnet_dir, read_tag_file(&a.mft_lexicon)?)
        .with_context(|| format!("cannot read WordNet indices in {}", a.wordnet_dir.display()))?;
    let pivots = build_pivots(&lex)?;
    for (pos, list) in pivots.iter() {
        eprintln!("{pos}: {} pivots", list.len());
    }
    let mut bytes = provenance("pivots", None).into_bytes();
    pivots.write_tsv(&mut bytes)?;
    write_file(&a.out, &bytes)
}

pub fn neighbors(a: NeighborsArgs) -> Result<()> {
    if a.k == 0 || a.k_search < a.k {
        return Err(UsageError("need 1 ≤ --k ≤ --k-search".into()).into());
    }
    let model = ModelArg { algorithm: None, window: 1, path: a.model.clone() }.load()?;
    let mut words = a.words.clone();
    if let Some(p) = &a.pivots {
        let lists = PivotLists::read_tsv(open(p, "pivots")?).with_context(|| format!("cannot read pivots {}", p.display()))?;
        words.extend(lists.iter().flat_map(|(_, l)| l.iter().cloned()));
    }
    let lex = if a.lexicon.is_empty() { None } else { Some(a.lexicon.load()?) };
    let results = match &lex {
        Some(lex) => model.batch_nearest_neighbors(&words, a.k_search, |w| lex.knows(w)),
        None => model.batch_nearest_neighbors(&words, a.k_search, |_| true),
    };
    let mut lists: Vec<NeighborList> = Vec::new();
    for (word, r) in words.iter().zip(results) {
        match r {
            Ok(mut l) => {
                l.neighbors.truncate(a.k);
                lists.push(l);
            }
            Err(e) => log::warn!("skipping {word}: {e}"),
        }
    }
    eprintln!("{} of {} query words found", lists.len(), words.len());
    let mut bytes = provenance("neighbors", None).into_bytes();
    write_neighbor_tsv(&mut bytes, &lists)?;
    write_file(&a.out, &bytes)
}

const DIGITS: [&str; 10] = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"];

/// Lowercases, spells out digits, and turns every other non-alphanumeric
/// character into a token break. Empty lines are dropped.
pub fn normalize_line(line: &str, out: &mut String) {
    out.clear();
    let mut pending_space = false;
    let push_word = |out: &mut String, w: &str, pending: &mut bool| {
        if *pending && !out.is_empty() {
            out.push(' ');
        }
        *pending = false;
        out.push_str(w);
    };
    for c in line.chars() {
        if let Some(d) = c.to_digit(10).filter(|_| c.is_ascii_digit()) {
            pending_space = true;
            push_word(out, DIGITS[d as usize], &mut pending_space);
            pending_space = true;
        } else if c.is_alphanumeric() {
            for l in c.to_lowercase() {
                let mut buf = [0u8; 4];
                push_word(out, l.encode_utf8(&mut buf), &mut pending_space);
            }
        } else {
            pending_space = true;
        }
    }
}

pub fn import_corpus(a: ImportCorpusArgs) -> Result<()> {
    let input = open(&a.input, "input")?;
    let out = File::create(&a.out).with_context(|| format!("cannot write {}", a.out.display()))?;
    let mut out = BufWriter::new(out);
    let (mut lines, mut tokens) = (0u64, 0u64);
    let mut buf = String::new();
    for line in input.lines() {
        let line = line.with_context(|| format!("reading {}", a.input.display()))?;
        normalize_line(&line, &mut buf);
        if !buf.is_empty() {
            tokens += buf.split(' ').count() as u64;
            lines += 1;
            writeln!(out, "{buf}")?;
        }
    }
    out.flush().with_context(|| format!("cannot write {}", a.out.display()))?;
    eprintln!("{lines} lines, {tokens} tokens");
    Ok(())
}

pub fn import_benchmark(a: ImportBenchmarkArgs) -> Result<()> {
    let layout = match a.layout {
        Layout::Csv => ImportLayout::Csv,
        Layout::Tsv => ImportLayout::Tsv { score_column: a.score_column },
    };
    let name = a.input.file_stem().and_then(|s| s.to_str()).unwrap_or("benchmark").to_owned();
    let b = import(open(&a.input, "benchmark")?, &name, layout, a.skip_header)
        .with_context(|| format!("cannot import {}", a.input.display()))?;
    eprintln!("{}: {} pairs", b.name, b.len());
    let mut bytes = provenance("import-benchmark", None).into_bytes();
    b.write_tsv(&mut bytes)?;
    write_file(&a.out, &bytes)
}

pub fn gen_corpus(a: GenCorpusArgs) -> Result<()> {
    let mut g: SyntheticGrammar = read_to_string(&a.grammar, "grammar")?
        .parse()
        .with_context(|| format!("in {}", a.grammar.display()))?;
    if let Some(s) = a.seed {
        g.seed = s;
    }
    if let Some(n) = a.sentences {
        g.sentence_count = n;
    }
    let c = generate(&g)?;
    eprintln!("{} sentences, {} tokens, {} words", g.sentence_count, c.text.split_whitespace().count(), c.lexicon.len());
    write_file(&a.out, c.text.as_bytes())?;
    let mut bytes = provenance("gen-corpus", Some(g.seed)).into_bytes();
    write_mft_lexicon(&mut bytes, &c.lexicon)?;
    write_file(&a.lexicon_out, &bytes)
}

pub fn derive_lexicon(a: DeriveLexiconArgs) -> Result<()> {
    let lex = derive_mft_lexicon(open(&a.tagged, "tagged corpus")?)
        .with_context(|| format!("in {}", a.tagged.display()))?;
    eprintln!("{} words", lex.len());
    let mut bytes = provenance("derive-lexicon", None).into_bytes();
    write_mft_lexicon(&mut bytes, &lex)?;
    write_file(&a.out, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(s: &str) -> String {
        let mut out = String::new();
        normalize_line(s, &mut out);
        out
    }

    #[test]
    fn normalization() {
        assert_eq!(norm("The Cat's 2 hats, (1984)!"), "the cat s two hats one nine eight four");
        assert_eq!(norm("  ...  "), "");
        assert_eq!(norm("Überfluß-Café"), "überfluß café");
        assert_eq!(norm("a1b"), "a one b");
    }
}

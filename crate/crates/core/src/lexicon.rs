//! Part-of-speech ground truth: WordNet index files, most-frequent-tag
//! lexicons and purified pivot lists.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;

use crate::{Error, Result};

/// Coarse part-of-speech tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl PosTag {
    pub const ALL: [PosTag; 5] = [PosTag::Noun, PosTag::Verb, PosTag::Adj, PosTag::Adv, PosTag::Other];

    /// The parts of speech pivot lists are built for.
    pub const PIVOT: [PosTag; 3] = [PosTag::Noun, PosTag::Adj, PosTag::Verb];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Other => "OTHER",
        }
    }

    /// Maps Universal Dependencies or Penn Treebank tags onto the coarse set.
    /// Anything unrecognized is `Other`.
    pub fn from_fine_tag(tag: &str) -> PosTag {
        match tag {
            "NOUN" | "PROPN" => PosTag::Noun,
            "VERB" => PosTag::Verb,
            "ADJ" => PosTag::Adj,
            "ADV" => PosTag::Adv,
            t if t.starts_with("NN") => PosTag::Noun,
            t if t.starts_with("VB") => PosTag::Verb,
            t if t.starts_with("JJ") => PosTag::Adj,
            t if t.starts_with("RB") => PosTag::Adv,
            _ => PosTag::Other,
        }
    }

    /// File suffix of the WordNet index for this POS.
    pub fn wordnet_suffix(self) -> Option<&'static str> {
        match self {
            PosTag::Noun => Some("noun"),
            PosTag::Verb => Some("verb"),
            PosTag::Adj => Some("adj"),
            PosTag::Adv => Some("adv"),
            PosTag::Other => None,
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "NOUN" => Ok(PosTag::Noun),
            "VERB" => Ok(PosTag::Verb),
            "ADJ" => Ok(PosTag::Adj),
            "ADV" => Ok(PosTag::Adv),
            "OTHER" => Ok(PosTag::Other),
            _ => Err(Error::InvalidArgument(format!("unknown POS tag {s:?}"))),
        }
    }
}

fn is_single_token(word: &str) -> bool {
    !word.is_empty() && !word.contains('_') && !word.chars().any(char::is_whitespace)
}

/// Lemmas from a WordNet `index.<pos>` file.
///
/// License lines start with two spaces. Multiword lemmas (joined with `_`)
/// are skipped. The POS only labels error messages.
pub fn parse_index<R: BufRead>(source: R, pos: PosTag) -> Result<BTreeSet<String>> {
    let mut lemmas = BTreeSet::new();
    let mut data_lines = 0usize;
    for line in source.lines() {
        let line = line?;
        if line.starts_with("  ") || line.trim().is_empty() {
            continue;
        }
        data_lines += 1;
        let Some(lemma) = line.split(' ').next() else {
            continue;
        };
        let lemma = lemma.to_lowercase();
        if is_single_token(&lemma) {
            lemmas.insert(lemma);
        }
    }
    if data_lines == 0 {
        warn!("{pos} index has no data lines");
        return Err(Error::NoEntries);
    }
    Ok(lemmas)
}

/// Result of loading a most-frequent-tag lexicon.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MftLexicon {
    pub tags: HashMap<String, PosTag>,
    pub duplicates: usize,
}

/// Reads `word<TAB>TAG` lines. Later entries override earlier ones and the
/// number of overrides is reported. Blank lines and `#` comments are skipped.
pub fn load_mft_lexicon<R: BufRead>(source: R) -> Result<MftLexicon> {
    let mut lex = MftLexicon::default();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(word), Some(tag)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected word<TAB>TAG".into(),
            });
        };
        let tag: PosTag = tag.trim().parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("unknown tag {tag:?}"),
        })?;
        let word = word.trim().to_lowercase();
        if !is_single_token(&word) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("{word:?} is not a single token"),
            });
        }
        if lex.tags.insert(word, tag).is_some() {
            lex.duplicates += 1;
        }
    }
    if lex.duplicates > 0 {
        warn!("{} duplicate lexicon entries, last one kept", lex.duplicates);
    }
    Ok(lex)
}

/// Derives a most-frequent-tag lexicon from tagged tokens given as
/// `word<TAB>tag` lines (fine-grained UD or Penn tags are coarsened).
/// Ties go to the tag that sorts first in [`PosTag`] order.
pub fn derive_mft_lexicon<R: BufRead>(tagged: R) -> Result<BTreeMap<String, PosTag>> {
    let mut counts: HashMap<String, [u64; 5]> = HashMap::new();
    for (i, line) in tagged.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(word), Some(tag)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected word<TAB>tag".into(),
            });
        };
        let word = word.trim().to_lowercase();
        if !is_single_token(&word) {
            continue;
        }
        let tag = PosTag::from_fine_tag(tag.trim());
        let slot = PosTag::ALL.iter().position(|&t| t == tag).expect("tag in ALL");
        counts.entry(word).or_default()[slot] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(word, c)| {
            let best = (0..5).fold(0, |best, i| if c[i] > c[best] { i } else { best });
            (word, PosTag::ALL[best])
        })
        .collect())
}

pub fn write_mft_lexicon<W: Write>(mut out: W, lexicon: &BTreeMap<String, PosTag>) -> Result<()> {
    for (word, tag) in lexicon {
        writeln!(out, "{word}\t{tag}")?;
    }
    Ok(())
}

/// Word → POS knowledge from a lexical database and a most-frequent-tag
/// lexicon.
#[derive(Clone, Debug, Default)]
pub struct PosLexicon {
    pub wordnet_pos: HashMap<String, BTreeSet<PosTag>>,
    pub mft_pos: HashMap<String, PosTag>,
}

impl PosLexicon {
    /// Builds a lexicon from per-POS lemma sets and an MFT table.
    pub fn new(indices: &[(PosTag, BTreeSet<String>)], mft_pos: HashMap<String, PosTag>) -> Self {
        let mut wordnet_pos: HashMap<String, BTreeSet<PosTag>> = HashMap::new();
        for (pos, lemmas) in indices {
            for lemma in lemmas {
                wordnet_pos.entry(lemma.clone()).or_default().insert(*pos);
            }
        }
        PosLexicon { wordnet_pos, mft_pos }
    }

    /// Reads `index.noun`, `index.verb`, `index.adj` and `index.adv` from
    /// `dir`.
    pub fn from_wordnet_dir(dir: &Path, mft_pos: HashMap<String, PosTag>) -> Result<Self> {
        let mut indices = Vec::new();
        for pos in [PosTag::Noun, PosTag::Verb, PosTag::Adj, PosTag::Adv] {
            let suffix = pos.wordnet_suffix().expect("WordNet POS");
            let path = dir.join(format!("index.{suffix}"));
            let file = File::open(&path).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
            })?;
            indices.push((pos, parse_index(BufReader::new(file), pos)?));
        }
        Ok(Self::new(&indices, mft_pos))
    }

    /// Treats a gold tag table as both the database and the tagger, as for
    /// synthetic corpora where every word has exactly one class.
    pub fn from_gold(tags: HashMap<String, PosTag>) -> Self {
        let wordnet_pos = tags
            .iter()
            .map(|(w, &t)| (w.clone(), BTreeSet::from([t])))
            .collect();
        PosLexicon {
            wordnet_pos,
            mft_pos: tags,
        }
    }

    pub fn tag(&self, word: &str) -> Option<PosTag> {
        self.mft_pos.get(word).copied()
    }

    pub fn knows(&self, word: &str) -> bool {
        self.mft_pos.contains_key(word)
    }
}

/// Per-POS pivot words, each sorted lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PivotLists {
    pub lists: BTreeMap<PosTag, Vec<String>>,
}

impl PivotLists {
    pub fn get(&self, pos: PosTag) -> &[String] {
        self.lists.get(&pos).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (PosTag, &[String])> {
        self.lists.iter().map(|(p, l)| (*p, l.as_slice()))
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for (pos, words) in self.iter() {
            for w in words {
                writeln!(out, "{w}\t{pos}")?;
            }
        }
        Ok(())
    }

    /// Reads `word<TAB>POS` rows as written by [`PivotLists::write_tsv`].
    pub fn read_tsv<R: BufRead>(source: R) -> Result<Self> {
        let lex = load_mft_lexicon(source)?;
        let mut lists: BTreeMap<PosTag, Vec<String>> = BTreeMap::new();
        for (word, pos) in lex.tags {
            lists.entry(pos).or_default().push(word);
        }
        for l in lists.values_mut() {
            l.sort();
        }
        Ok(PivotLists { lists })
    }
}

/// Keeps, for NOUN, ADJ and VERB, the words whose database POS set is exactly
/// that POS and whose most-frequent tag agrees.
pub fn build_pivots(lex: &PosLexicon) -> Result<PivotLists> {
    let mut lists: BTreeMap<PosTag, Vec<String>> = PosTag::PIVOT.iter().map(|&p| (p, Vec::new())).collect();
    for (word, set) in &lex.wordnet_pos {
        if set.len() != 1 {
            continue;
        }
        let pos = *set.iter().next().expect("singleton");
        if let Some(list) = lists.get_mut(&pos) {
            if lex.tag(word) == Some(pos) {
                list.push(word.clone());
            }
        }
    }
    for (pos, list) in lists.iter_mut() {
        if list.is_empty() {
            return Err(Error::EmptyPivotList(pos.to_string()));
        }
        list.sort();
    }
    Ok(PivotLists { lists })
}

//! Synthetic corpora with known word classes.
//!
//! Sentences are drawn from weighted tag templates; every slot is filled with
//! a word of that class chosen by a Zipf law over the class vocabulary. The
//! class of every word is returned as a gold tag lexicon.

use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lexicon::PosTag;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WordClass {
    pub tag: PosTag,
    pub vocabulary_size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Template {
    pub tags: Vec<PosTag>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticGrammar {
    pub classes: Vec<WordClass>,
    pub templates: Vec<Template>,
    pub sentence_count: usize,
    pub zipf_exponent: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedCorpus {
    /// One sentence per line.
    pub text: String,
    pub lexicon: BTreeMap<String, PosTag>,
}

/// Name of the `rank`-th (0-based) word of a class, e.g. `noun0`.
pub fn class_word(tag: PosTag, rank: usize) -> String {
    format!("{}{}", tag.as_str().to_lowercase(), rank)
}

impl SyntheticGrammar {
    pub fn validate(&self) -> Result<()> {
        let mut declared = HashSet::new();
        for c in &self.classes {
            if c.vocabulary_size == 0 {
                return Err(Error::InvalidConfig(format!("class {} has vocabulary size 0", c.tag)));
            }
            if !declared.insert(c.tag) {
                return Err(Error::InvalidConfig(format!("class {} declared twice", c.tag)));
            }
        }
        if self.templates.is_empty() {
            return Err(Error::InvalidConfig("grammar has no templates".into()));
        }
        for t in &self.templates {
            if t.tags.is_empty() {
                return Err(Error::InvalidConfig("empty template".into()));
            }
            if !(t.weight > 0.0 && t.weight.is_finite()) {
                return Err(Error::InvalidConfig(format!("template weight {} must be positive", t.weight)));
            }
            if let Some(tag) = t.tags.iter().find(|t| !declared.contains(*t)) {
                return Err(Error::InvalidConfig(format!("template uses undeclared class {tag}")));
            }
        }
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return Err(Error::InvalidConfig("zipf exponent must be ≥ 0".into()));
        }
        Ok(())
    }

    /// Probability of each rank within a class of `size` words.
    pub fn zipf_probabilities(&self, size: usize) -> Vec<f64> {
        let w: Vec<f64> = (1..=size).map(|r| (r as f64).powf(-self.zipf_exponent)).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }
}

/// Generates `sentence_count` sentences; deterministic for a given seed.
pub fn generate(grammar: &SyntheticGrammar) -> Result<GeneratedCorpus> {
    grammar.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(grammar.seed);

    let mut samplers = BTreeMap::new();
    let mut words_by_class = BTreeMap::new();
    let mut lexicon = BTreeMap::new();
    for c in &grammar.classes {
        let words: Vec<String> = (0..c.vocabulary_size).map(|r| class_word(c.tag, r)).collect();
        for w in &words {
            lexicon.insert(w.clone(), c.tag);
        }
        let dist = WeightedIndex::new(grammar.zipf_probabilities(c.vocabulary_size))
            .map_err(|e| Error::InvalidConfig(format!("class {}: {e}", c.tag)))?;
        samplers.insert(c.tag, dist);
        words_by_class.insert(c.tag, words);
    }
    let template_dist = WeightedIndex::new(grammar.templates.iter().map(|t| t.weight))
        .map_err(|e| Error::InvalidConfig(format!("templates: {e}")))?;

    let mut text = String::new();
    for _ in 0..grammar.sentence_count {
        let template = &grammar.templates[template_dist.sample(&mut rng)];
        for (i, tag) in template.tags.iter().enumerate() {
            if i > 0 {
                text.push(' ');
            }
            let r = samplers[tag].sample(&mut rng);
            text.push_str(&words_by_class[tag][r]);
        }
        text.push('\n');
    }
    Ok(GeneratedCorpus { text, lexicon })
}

/// Parses a grammar description: one `key = value` per line, `#` comments.
///
/// ```text
/// sentences = 1000
/// zipf = 1.0
/// seed = 7
/// class = NOUN,50
/// template = 3,ADJ NOUN VERB NOUN
/// ```
///
/// `class` takes `TAG,size`; `template` takes `weight,TAG TAG ...`.
impl FromStr for SyntheticGrammar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut g = SyntheticGrammar {
            classes: Vec::new(),
            templates: Vec::new(),
            sentence_count: 0,
            zipf_exponent: 1.0,
            seed: 0,
        };
        for (i, line) in s.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: line_no, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key = value".into()))?;
            let value = value.trim();
            match key.trim() {
                "sentences" => g.sentence_count = value.parse().map_err(|_| err(format!("bad count {value:?}")))?,
                "zipf" => g.zipf_exponent = value.parse().map_err(|_| err(format!("bad exponent {value:?}")))?,
                "seed" => g.seed = value.parse().map_err(|_| err(format!("bad seed {value:?}")))?,
                "class" => {
                    let (tag, size) = value
                        .split_once(',')
                        .ok_or_else(|| err("class needs TAG,size".into()))?;
                    g.classes.push(WordClass {
                        tag: tag.trim().parse().map_err(|e: Error| err(e.to_string()))?,
                        vocabulary_size: size.trim().parse().map_err(|_| err(format!("bad size {size:?}")))?,
                    });
                }
                "template" => {
                    let (weight, tags) = value
                        .split_once(',')
                        .ok_or_else(|| err("template needs weight,TAGS".into()))?;
                    let tags = tags
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|e: Error| err(e.to_string())))
                        .collect::<Result<Vec<PosTag>>>()?;
                    g.templates.push(Template {
                        tags,
                        weight: weight.trim().parse().map_err(|_| err(format!("bad weight {weight:?}")))?,
                    });
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        g.validate()?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple(sentences: usize, seed: u64) -> SyntheticGrammar {
        SyntheticGrammar {
            classes: vec![
                WordClass { tag: PosTag::Noun, vocabulary_size: 10 },
                WordClass { tag: PosTag::Verb, vocabulary_size: 5 },
            ],
            templates: vec![Template {
                tags: vec![PosTag::Noun, PosTag::Verb, PosTag::Noun],
                weight: 1.0,
            }],
            sentence_count: sentences,
            zipf_exponent: 1.0,
            seed,
        }
    }

    #[test]
    fn counts_tokens_and_lexicon() {
        let c = generate(&simple(100, 1)).unwrap();
        assert_eq!(c.text.split_whitespace().count(), 300);
        assert_eq!(c.text.lines().count(), 100);
        assert_eq!(c.lexicon.len(), 15);
        assert!(c.text.split_whitespace().all(|w| c.lexicon.contains_key(w)));
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(generate(&simple(50, 9)).unwrap(), generate(&simple(50, 9)).unwrap());
        assert_ne!(generate(&simple(50, 9)).unwrap().text, generate(&simple(50, 10)).unwrap().text);
    }

    #[test]
    fn validation() {
        let mut g = simple(1, 1);
        g.classes[1].vocabulary_size = 0;
        assert!(generate(&g).is_err());
        let mut g = simple(1, 1);
        g.templates[0].tags.push(PosTag::Adj);
        assert!(generate(&g).is_err());
        let mut g = simple(1, 1);
        g.templates[0].weight = 0.0;
        assert!(generate(&g).is_err());
    }

    #[test]
    fn parse_grammar_text() {
        let g: SyntheticGrammar = "# toy\nsentences = 100\nzipf=1\nseed = 3\nclass = NOUN,10\nclass=VERB, 5\ntemplate = 1, NOUN VERB NOUN\n"
            .parse()
            .unwrap();
        assert_eq!(g, simple(100, 3));
        let err = "class = NOUN,10\nbogus = 1\n".parse::<SyntheticGrammar>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}

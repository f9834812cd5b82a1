//! Language pipeline: tokenization, stop-list filtering, lemmatization and
//! label co-occurrence.
//!
//! Every lemma produced here is lowercase, accent-folded, non-empty and not a
//! member of its language's stop list. The same [`Analyzer`] must be used on
//! both sides of any comparison (labels vs. queries, titles vs. clusters).

mod cooccurrence;
mod stem;
mod stoplist;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

pub use cooccurrence::{cooccurrence_links, DEFAULT_MIN_LABELS};
pub use stem::{FrenchLightStemmer, StemmerKind};
pub use stoplist::StopList;

use crate::error::{Error, Result};
use stem::Stemmer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Fr,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Fr => "fr",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "fr" => Ok(Language::Fr),
            other => Err(Error::Validation(format!(
                "unsupported language {other:?} (expected en or fr)"
            ))),
        }
    }
}

/// One surviving token of [`Analyzer::analyze`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma {
    pub surface: String,
    pub normalized: String,
    pub language: Language,
}

/// Lowercase and strip diacritics. Ligatures without a canonical
/// decomposition (œ, æ, ß) are expanded by hand.
pub fn fold(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars().flat_map(char::to_lowercase) {
        match c {
            'œ' => out.push_str("oe"),
            'æ' => out.push_str("ae"),
            'ß' => out.push_str("ss"),
            'ø' => out.push('o'),
            'ł' => out.push('l'),
            'đ' => out.push('d'),
            _ => out.extend(c.nfd().filter(|&d| !is_combining_mark(d))),
        }
    }
    out
}

/// Split on every non-letter character. Apostrophes, hyphens and slashes are
/// boundaries, so "d'information" yields "d", "information".
pub fn tokenize(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphabetic()).filter(|t| !t.is_empty())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyzerConfig {
    pub en_stemmer: StemmerKind,
    pub fr_stemmer: StemmerKind,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            en_stemmer: StemmerKind::Porter2,
            fr_stemmer: StemmerKind::FrenchLight,
        }
    }
}

struct Pipeline {
    stop: StopList,
    stemmer: Stemmer,
}

impl Pipeline {
    fn lemma_of(&self, token: &str) -> Option<String> {
        let folded = fold(token);
        if folded.is_empty() || self.stop.contains_folded(&folded) {
            return None;
        }
        let lemma = self.stemmer.stem_to_fixpoint(&folded);
        if lemma.is_empty() || self.stop.contains_folded(&lemma) {
            return None;
        }
        Some(lemma)
    }
}

pub struct Analyzer {
    en: Pipeline,
    fr: Pipeline,
}

impl fmt::Debug for Analyzer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Analyzer")
            .field("en", &self.en.stemmer.kind())
            .field("fr", &self.fr.stemmer.kind())
            .finish()
    }
}

impl Default for Analyzer {
    fn default() -> Self {
        Analyzer::new(&AnalyzerConfig::default())
    }
}

impl Analyzer {
    pub fn new(config: &AnalyzerConfig) -> Self {
        Analyzer::with_stop_lists(config, StopList::builtin(Language::En), StopList::builtin(Language::Fr))
    }

    pub fn with_stop_lists(config: &AnalyzerConfig, en: StopList, fr: StopList) -> Self {
        Analyzer {
            en: Pipeline {
                stop: en,
                stemmer: Stemmer::new(config.en_stemmer),
            },
            fr: Pipeline {
                stop: fr,
                stemmer: Stemmer::new(config.fr_stemmer),
            },
        }
    }

    fn pipeline(&self, language: Language) -> &Pipeline {
        match language {
            Language::En => &self.en,
            Language::Fr => &self.fr,
        }
    }

    pub fn stop_list(&self, language: Language) -> &StopList {
        &self.pipeline(language).stop
    }

    pub fn analyze(&self, text: &str, language: Language) -> Vec<Lemma> {
        let pipeline = self.pipeline(language);
        tokenize(text)
            .filter_map(|surface| {
                pipeline.lemma_of(surface).map(|normalized| Lemma {
                    surface: surface.to_string(),
                    normalized,
                    language,
                })
            })
            .collect()
    }

    /// Normalized lemmas in text order, duplicates kept.
    pub fn lemmas(&self, text: &str, language: Language) -> Vec<String> {
        let pipeline = self.pipeline(language);
        tokenize(text).filter_map(|t| pipeline.lemma_of(t)).collect()
    }

    /// Normalized lemmas in first-occurrence order, duplicates removed.
    pub fn unique_lemmas(&self, text: &str, language: Language) -> Vec<String> {
        let mut seen = BTreeSet::new();
        self.lemmas(text, language)
            .into_iter()
            .filter(|l| seen.insert(l.clone()))
            .collect()
    }

    pub fn lemma_set(&self, text: &str, language: Language) -> BTreeSet<String> {
        self.lemmas(text, language).into_iter().collect()
    }

    pub fn extract_native_keywords(&self, label: &str, language: Language) -> BTreeSet<String> {
        self.lemma_set(label, language)
    }

    /// Lemmatize a single token; `None` when it is a stop word or empty.
    pub fn lemmatize(&self, token: &str, language: Language) -> Option<String> {
        self.pipeline(language).lemma_of(token)
    }

    pub fn is_stop_word(&self, token: &str, language: Language) -> bool {
        self.pipeline(language).stop.contains(token)
    }
}

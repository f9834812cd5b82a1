//! Bilingual label store and the community translation workflow.
//!
//! Each node has one canonical entry per language once translated, plus any
//! number of aliases contributed through accepted proposals. Queries are
//! resolved against entries by Jaccard similarity of lemma sets.

mod feed;
mod proposal;
mod translate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use feed::{DC_NS, FEED_PATH, PROPOSAL_NS, RDF_NS, RSS_NS};
pub use proposal::{
    ProposalKind, ProposalStatus, TranslationProposal, Verdict, Vote, APPROVALS_REQUIRED, REJECTIONS_REQUIRED,
};
pub use translate::{FixtureTranslator, Translator};

use crate::error::{Error, Result};
use crate::taxonomy::{Code, Taxonomy};
use crate::textproc::{Analyzer, Language};

/// Matches scoring below this Jaccard similarity are dropped.
pub const MIN_SIMILARITY: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Canonical,
    Alias,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub node: Code,
    pub language: Language,
    pub text: String,
    pub kind: EntryKind,
    pub lemma_key: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub code: Code,
    pub score: f64,
    pub exact: bool,
    pub matched_text: String,
    pub matched_kind: EntryKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissReport {
    pub query: String,
    pub language: Language,
    pub message: String,
}

impl MissReport {
    fn new(query: &str, language: Language) -> Self {
        let lang = match language {
            Language::En => "English",
            Language::Fr => "French",
        };
        MissReport {
            query: query.to_string(),
            language,
            message: format!("{} does not exist in {lang} in the ACM ontology", query.trim()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum Resolution {
    Found { matches: Vec<Match> },
    Miss(MissReport),
}

impl Resolution {
    pub fn top(&self) -> Option<&Match> {
        match self {
            Resolution::Found { matches } => matches.first(),
            Resolution::Miss(_) => None,
        }
    }

    pub fn matches(&self) -> &[Match] {
        match self {
            Resolution::Found { matches } => matches,
            Resolution::Miss(_) => &[],
        }
    }

    pub fn is_miss(&self) -> bool {
        matches!(self, Resolution::Miss(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Untranslated {
    pub code: Code,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapReport {
    /// Nodes that received a machine translation in this run.
    pub translated: usize,
    /// Nodes whose existing French label was registered as canonical entry.
    pub adopted: usize,
    pub untranslated: Vec<Untranslated>,
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    proposals: BTreeMap<u64, TranslationProposal>,
    next_proposal: u64,
    /// Bumped on every change to `entries`.
    revision: u64,
}

impl Lexicon {
    pub fn new() -> Self {
        Lexicon::default()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lexicon serializes")
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn entries_for<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a LexiconEntry> + 'a {
        self.entries.iter().filter(move |e| e.node.as_str() == node)
    }

    pub fn canonical(&self, node: &str, language: Language) -> Option<&LexiconEntry> {
        self.entries
            .iter()
            .find(|e| e.node.as_str() == node && e.language == language && e.kind == EntryKind::Canonical)
    }

    fn canonical_index(&self, node: &str, language: Language) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.node.as_str() == node && e.language == language && e.kind == EntryKind::Canonical)
    }

    fn make_entry(
        node: &Code,
        language: Language,
        text: &str,
        kind: EntryKind,
        analyzer: &Analyzer,
    ) -> Option<LexiconEntry> {
        let lemma_key = analyzer.lemma_set(text, language);
        (!lemma_key.is_empty()).then(|| LexiconEntry {
            node: node.clone(),
            language,
            text: text.trim().to_string(),
            kind,
            lemma_key,
        })
    }

    /// Install `text` as the canonical entry, replacing any previous one.
    /// Returns the displaced text when it differs.
    fn set_canonical(
        &mut self,
        node: &Code,
        language: Language,
        text: &str,
        analyzer: &Analyzer,
    ) -> Result<Option<String>> {
        let entry = Self::make_entry(node, language, text, EntryKind::Canonical, analyzer)
            .ok_or_else(|| Error::Rejected(format!("label {text:?} yields no lemmas")))?;
        let displaced = match self.canonical_index(node, language) {
            Some(i) if self.entries[i].text == entry.text => return Ok(None),
            Some(i) => Some(std::mem::replace(&mut self.entries[i], entry).text),
            None => {
                self.entries.push(entry);
                None
            }
        };
        self.revision += 1;
        Ok(displaced)
    }

    fn add_alias(&mut self, node: &Code, language: Language, text: &str, analyzer: &Analyzer) -> bool {
        let exists = self
            .entries
            .iter()
            .any(|e| &e.node == node && e.language == language && e.text == text.trim());
        if exists {
            return false;
        }
        match Self::make_entry(node, language, text, EntryKind::Alias, analyzer) {
            Some(entry) => {
                self.entries.push(entry);
                self.revision += 1;
                true
            }
            None => false,
        }
    }

    /// Register canonical English entries for every standard node, and
    /// canonical French entries for nodes that already carry a French label.
    /// Returns the number of French labels adopted this way.
    pub fn sync(&mut self, taxonomy: &Taxonomy, analyzer: &Analyzer) -> usize {
        let mut adopted = 0;
        for node in taxonomy.standard_nodes() {
            // Labels without lemmas cannot form an entry; they stay unresolvable.
            let _ = self.set_canonical(&node.code, Language::En, &node.label_en, analyzer);
            if let Some(fr) = &node.label_fr {
                if self.canonical(&node.code, Language::Fr).is_none()
                    && self.set_canonical(&node.code, Language::Fr, fr, analyzer).is_ok()
                {
                    adopted += 1;
                }
            }
        }
        adopted
    }

    /// Give every standard node lacking a French label a machine translation.
    /// Failures are reported per node; the run never aborts.
    pub fn bootstrap_translations(
        &mut self,
        taxonomy: &mut Taxonomy,
        translator: &dyn Translator,
        analyzer: &Analyzer,
    ) -> BootstrapReport {
        let mut report = BootstrapReport {
            adopted: self.sync(taxonomy, analyzer),
            ..BootstrapReport::default()
        };
        let todo: Vec<(Code, String)> = taxonomy
            .standard_nodes()
            .filter(|n| n.label_fr.is_none())
            .map(|n| (n.code.clone(), n.label_en.clone()))
            .collect();
        for (code, label) in todo {
            let outcome = translator.translate(&label, Language::En, Language::Fr).and_then(|fr| {
                let fr = fr.trim().to_string();
                if fr.is_empty() {
                    return Err(Error::Translation("adapter returned an empty string".into()));
                }
                self.set_canonical(&code, Language::Fr, &fr, analyzer)?;
                Ok(fr)
            });
            match outcome {
                Ok(fr) => {
                    taxonomy
                        .set_label_fr(&code, Some(fr))
                        .expect("node listed from the same taxonomy");
                    report.translated += 1;
                }
                Err(e) => report.untranslated.push(Untranslated {
                    code,
                    reason: e.to_string(),
                }),
            }
        }
        report
    }

    /// Rank nodes whose entries match the query's lemma set.
    pub fn resolve_query(&self, text: &str, language: Language, analyzer: &Analyzer) -> Result<Resolution> {
        let key = analyzer.lemma_set(text, language);
        if key.is_empty() {
            return Err(Error::Unanalyzable(text.to_string()));
        }
        let mut best: BTreeMap<&Code, Match> = BTreeMap::new();
        for entry in self.entries.iter().filter(|e| e.language == language) {
            let score = jaccard(&key, &entry.lemma_key);
            if score < MIN_SIMILARITY {
                continue;
            }
            let candidate = Match {
                code: entry.node.clone(),
                score,
                exact: entry.lemma_key == key,
                matched_text: entry.text.clone(),
                matched_kind: entry.kind,
            };
            let replace = match best.get(&entry.node) {
                None => true,
                Some(cur) => {
                    (candidate.exact, candidate.score) > (cur.exact, cur.score)
                        || ((candidate.exact, candidate.score) == (cur.exact, cur.score)
                            && cur.matched_kind == EntryKind::Alias
                            && candidate.matched_kind == EntryKind::Canonical)
                }
            };
            if replace {
                best.insert(&entry.node, candidate);
            }
        }
        if best.is_empty() {
            return Ok(Resolution::Miss(MissReport::new(text, language)));
        }
        let mut matches: Vec<Match> = best.into_values().collect();
        matches.sort_by(|a, b| {
            b.exact
                .cmp(&a.exact)
                .then_with(|| b.score.total_cmp(&a.score))
                .then_with(|| a.code.cmp(&b.code))
        });
        Ok(Resolution::Found { matches })
    }

    /// Entries for which (node, language) holds more or less than one
    /// canonical entry, among pairs that have any entry at all.
    pub fn canonical_violations(&self) -> Vec<(Code, Language, usize)> {
        let mut counts: BTreeMap<(&Code, Language), usize> = BTreeMap::new();
        for e in &self.entries {
            let c = counts.entry((&e.node, e.language)).or_insert(0);
            if e.kind == EntryKind::Canonical {
                *c += 1;
            }
        }
        counts
            .into_iter()
            .filter(|(_, n)| *n != 1)
            .map(|((code, lang), n)| (code.clone(), lang, n))
            .collect()
    }
}

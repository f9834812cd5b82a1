use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub key: String,
    pub frequency: u32,
}

/// One ranked result of [`InvertedIndex::search`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub key: String,
    /// Number of distinct query lemmas found in the title.
    pub matched: usize,
    /// Summed in-title frequency of the matched lemmas.
    pub frequency: u32,
}

/// Lemma → postings sorted by article key.
#[derive(Clone, Debug, Default)]
pub struct InvertedIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    documents: HashMap<String, BTreeMap<String, u32>>,
}

impl InvertedIndex {
    pub fn new() -> Self {
        InvertedIndex::default()
    }

    /// Index `lemmas` (title order, duplicates kept) under `key`, replacing
    /// whatever was indexed for it before.
    pub fn insert(&mut self, key: &str, lemmas: &[String]) {
        self.remove(key);
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for lemma in lemmas {
            *counts.entry(lemma.clone()).or_insert(0) += 1;
        }
        for (lemma, &frequency) in &counts {
            let list = self.postings.entry(lemma.clone()).or_default();
            let at = list.binary_search_by(|p| p.key.as_str().cmp(key)).unwrap_or_else(|i| i);
            list.insert(
                at,
                Posting {
                    key: key.to_string(),
                    frequency,
                },
            );
        }
        self.documents.insert(key.to_string(), counts);
    }

    pub fn remove(&mut self, key: &str) {
        let Some(counts) = self.documents.remove(key) else {
            return;
        };
        for lemma in counts.keys() {
            if let Some(list) = self.postings.get_mut(lemma) {
                if let Ok(at) = list.binary_search_by(|p| p.key.as_str().cmp(key)) {
                    list.remove(at);
                }
                if list.is_empty() {
                    self.postings.remove(lemma);
                }
            }
        }
    }

    pub fn postings(&self, lemma: &str) -> &[Posting] {
        self.postings.get(lemma).map_or(&[], Vec::as_slice)
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    /// Number of indexed documents.
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Rank documents by matched lemma count, then summed frequency, then key.
    pub fn search(&self, query: &BTreeSet<String>) -> Vec<SearchHit> {
        let mut acc: HashMap<&str, (usize, u32)> = HashMap::new();
        for lemma in query {
            for p in self.postings(lemma) {
                let e = acc.entry(p.key.as_str()).or_insert((0, 0));
                e.0 += 1;
                e.1 += p.frequency;
            }
        }
        let mut hits: Vec<SearchHit> = acc
            .into_iter()
            .map(|(key, (matched, frequency))| SearchHit {
                key: key.to_string(),
                matched,
                frequency,
            })
            .collect();
        hits.sort_by(|a, b| {
            b.matched
                .cmp(&a.matched)
                .then(b.frequency.cmp(&a.frequency))
                .then_with(|| a.key.cmp(&b.key))
        });
        hits
    }
}

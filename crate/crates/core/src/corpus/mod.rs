//! The local pseudo-corpus of bibliographic records.
//!
//! Records come in as BibTeX or DBLP-style XML, are classified against the
//! taxonomy by title/keyword overlap, indexed for title search, and can be
//! exported again as BibTeX or as an RDF snapshot.

mod bibtex;
mod classify;
mod dblp;
mod index;
pub mod rdf;
mod store;

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use classify::{
    classify, plan_promotions, score_nodes, Classification, Placement, PromotionGroup, DEFAULT_PROMOTION_MIN_MEMBERS,
    DEFAULT_TAU, PROMOTION_SHARED_LEMMAS,
};
pub use index::{InvertedIndex, Posting, SearchHit};
pub use store::ArticleLog;

use crate::error::{Error, Result};
use crate::taxonomy::{Code, KeywordSource, LinkProvenance, ProximityLink, Taxonomy};
use crate::textproc::{Analyzer, Language};

pub const DEFAULT_ENTRY_TYPE: &str = "article";

fn default_entry_type() -> String {
    DEFAULT_ENTRY_TYPE.to_string()
}

/// One bibliographic entry as read from a source file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub key: String,
    /// BibTeX entry type or DBLP element name, lowercase.
    #[serde(default = "default_entry_type")]
    pub entry_type: String,
    pub title: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub year: Option<i32>,
    /// Journal or proceedings title; empty when unknown.
    #[serde(default)]
    pub venue: String,
    #[serde(default)]
    pub uri: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Bibtex,
    DblpXml,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bibtex" | "bib" => Ok(Format::Bibtex),
            "dblp-xml" | "dblp" | "xml" => Ok(Format::DblpXml),
            other => Err(Error::Validation(format!(
                "unknown record format {other:?} (expected bibtex or dblp-xml)"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Bibtex => "bibtex",
            Format::DblpXml => "dblp-xml",
        })
    }
}

/// An entry that was passed over, with the position where it starts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedEntry {
    pub line: usize,
    pub column: usize,
    pub key: Option<String>,
    pub reason: String,
}

impl fmt::Display for SkippedEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        if let Some(key) = &self.key {
            write!(f, "entry {key}: ")?;
        }
        f.write_str(&self.reason)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub skipped: Vec<SkippedEntry>,
    /// Publication types outside the supported set (DBLP `www`, `book`, ...).
    pub ignored: usize,
}

pub(crate) struct LineIndex<'a> {
    text: &'a str,
    starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        let starts = std::iter::once(0)
            .chain(text.match_indices('\n').map(|(i, _)| i + 1))
            .collect();
        LineIndex { text, starts }
    }

    /// 1-based line and character column of a byte offset.
    pub(crate) fn position(&self, offset: usize) -> (usize, usize) {
        let offset = offset.min(self.text.len());
        let line = self.starts.partition_point(|&s| s <= offset);
        let start = self.starts[line - 1];
        let column = self
            .text
            .get(start..offset)
            .map_or(offset - start, |s| s.chars().count());
        (line, column + 1)
    }
}

/// UTF-8 with a Latin-1 fallback for legacy files; a leading BOM is dropped.
pub fn decode_input(bytes: &[u8]) -> Cow<'_, str> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    match std::str::from_utf8(bytes) {
        Ok(s) => Cow::Borrowed(s),
        Err(_) => Cow::Owned(bytes.iter().map(|&b| b as char).collect()),
    }
}

/// Read every record in `source`. Bad entries are skipped and itemized in the
/// report; only an unreadable stream or malformed XML fails the call.
pub fn parse_records(mut source: impl Read, format: Format) -> Result<(Vec<ArticleRecord>, ParseReport)> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    parse_records_str(&decode_input(&bytes), format)
}

pub fn parse_records_str(text: &str, format: Format) -> Result<(Vec<ArticleRecord>, ParseReport)> {
    match format {
        Format::Bibtex => {
            let (records, skipped) = bibtex::parse(text);
            Ok((records, ParseReport { skipped, ignored: 0 }))
        }
        Format::DblpXml => {
            let parsed = dblp::parse(text)?;
            Ok((
                parsed.records,
                ParseReport {
                    skipped: parsed.skipped,
                    ignored: parsed.ignored,
                },
            ))
        }
    }
}

/// A record as held in the store, with its derived lemmas and placement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredArticle {
    #[serde(flatten)]
    pub record: ArticleRecord,
    #[serde(default)]
    pub title_lemmas: BTreeSet<String>,
    pub placement: Placement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    /// Orphan threshold on title/cluster overlap.
    pub tau: usize,
    pub promotion_min_members: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            tau: DEFAULT_TAU,
            promotion_min_members: DEFAULT_PROMOTION_MIN_MEMBERS,
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::Config("tau must be at least 1".into()));
        }
        if self.promotion_min_members < 2 {
            return Err(Error::Config("promotion needs at least 2 members".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub inserted: usize,
    pub updated: usize,
    pub unchanged: usize,
    /// Keys inserted or updated by this call.
    #[serde(skip)]
    pub changed: Vec<String>,
}

/// A branch created from an orphan group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Promotion {
    pub code: Code,
    pub parent: Code,
    pub bin: Code,
    pub label: String,
    pub keywords: BTreeSet<String>,
    pub members: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub article: StoredArticle,
    pub matched: usize,
    pub frequency: u32,
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    config: CorpusConfig,
    articles: BTreeMap<String, StoredArticle>,
    index: InvertedIndex,
}

impl Corpus {
    pub fn new(config: CorpusConfig) -> Self {
        Corpus {
            config,
            ..Corpus::default()
        }
    }

    /// Rebuild a corpus from stored articles, recomputing lemmas and index.
    pub fn from_articles(
        config: CorpusConfig,
        articles: impl IntoIterator<Item = StoredArticle>,
        analyzer: &Analyzer,
    ) -> Self {
        let mut corpus = Corpus::new(config);
        for mut a in articles {
            let lemmas = analyzer.lemmas(&a.record.title, Language::En);
            a.title_lemmas = lemmas.iter().cloned().collect();
            corpus.index.insert(&a.record.key, &lemmas);
            corpus.articles.insert(a.record.key.clone(), a);
        }
        corpus
    }

    pub fn config(&self) -> &CorpusConfig {
        &self.config
    }

    pub fn set_config(&mut self, config: CorpusConfig) {
        self.config = config;
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&StoredArticle> {
        self.articles.get(key)
    }

    pub fn article(&self, key: &str) -> Result<&StoredArticle> {
        self.get(key).ok_or_else(|| Error::not_found("article", key))
    }

    pub fn articles(&self) -> impl Iterator<Item = &StoredArticle> {
        self.articles.values()
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }

    /// Merge `records` into the store by key. New and changed records are
    /// classified and indexed; dual-indexing links are then recomputed.
    pub fn ingest(
        &mut self,
        records: impl IntoIterator<Item = ArticleRecord>,
        taxonomy: &mut Taxonomy,
        analyzer: &Analyzer,
    ) -> Result<IngestStats> {
        let mut stats = IngestStats::default();
        for record in records {
            let previous = self.articles.get(&record.key);
            let placement = match previous {
                Some(p) if p.record == record => {
                    stats.unchanged += 1;
                    continue;
                }
                Some(p) if p.record.title == record.title => {
                    stats.updated += 1;
                    p.placement.clone()
                }
                found => {
                    if found.is_some() {
                        stats.updated += 1;
                    } else {
                        stats.inserted += 1;
                    }
                    let lemmas = analyzer.lemma_set(&record.title, Language::En);
                    place(classify(taxonomy, &lemmas, self.config.tau), taxonomy, analyzer)?
                }
            };
            let lemmas = analyzer.lemmas(&record.title, Language::En);
            self.index.insert(&record.key, &lemmas);
            stats.changed.push(record.key.clone());
            self.articles.insert(
                record.key.clone(),
                StoredArticle {
                    title_lemmas: lemmas.into_iter().collect(),
                    record,
                    placement,
                },
            );
        }
        if !stats.changed.is_empty() {
            self.derive_dual_links(taxonomy)?;
        }
        Ok(stats)
    }

    /// Classify a record against the taxonomy without storing it, creating
    /// the receiving `miscellaneous` bin if it is an orphan.
    pub fn classify_article(
        &self,
        record: &ArticleRecord,
        taxonomy: &mut Taxonomy,
        analyzer: &Analyzer,
    ) -> Result<Placement> {
        let lemmas = analyzer.lemma_set(&record.title, Language::En);
        place(classify(taxonomy, &lemmas, self.config.tau), taxonomy, analyzer)
    }

    /// Orphan bins and their members.
    pub fn orphan_bins(&self) -> BTreeMap<Code, BTreeSet<String>> {
        let mut bins: BTreeMap<Code, BTreeSet<String>> = BTreeMap::new();
        for a in self.articles.values() {
            if let Some(bin) = a.placement.orphan_bin() {
                bins.entry(bin.clone()).or_default().insert(a.record.key.clone());
            }
        }
        bins
    }

    /// Turn qualifying orphan groups into new branches beside their bins.
    pub fn promote_orphans(&mut self, taxonomy: &mut Taxonomy, analyzer: &Analyzer) -> Result<Vec<Promotion>> {
        let mut promotions = Vec::new();
        for (bin, keys) in self.orphan_bins() {
            let members: BTreeMap<String, BTreeSet<String>> = keys
                .iter()
                .map(|k| (k.clone(), self.articles[k].title_lemmas.clone()))
                .collect();
            let groups = plan_promotions(&members, self.config.promotion_min_members);
            if groups.is_empty() {
                continue;
            }
            let parent = taxonomy
                .get(&bin)?
                .parent
                .clone()
                .ok_or_else(|| Error::Validation(format!("orphan bin {bin} has no parent")))?;
            for group in groups {
                let label = group
                    .label_lemmas
                    .iter()
                    .map(|l| self.surface_form(l, &group.members, analyzer))
                    .collect::<Vec<_>>()
                    .join(" ");
                let code = taxonomy.add_branch(&parent, &label, analyzer)?;
                for lemma in &group.shared {
                    if !taxonomy.get(&code)?.has_keyword(lemma) {
                        taxonomy.insert_added_keyword(&code, lemma.clone(), KeywordSource::OrphanPromotion)?;
                    }
                }
                for key in &group.members {
                    let a = self.articles.get_mut(key).expect("bin member is stored");
                    a.placement = Placement::Assigned {
                        nodes: [code.clone()].into(),
                    };
                }
                promotions.push(Promotion {
                    code,
                    parent: parent.clone(),
                    bin: bin.clone(),
                    label,
                    keywords: group.shared,
                    members: group.members,
                });
            }
        }
        Ok(promotions)
    }

    /// Most common lowercase spelling of `lemma` among the members' titles.
    fn surface_form(&self, lemma: &str, members: &BTreeSet<String>, analyzer: &Analyzer) -> String {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for key in members {
            for l in analyzer.analyze(&self.articles[key].record.title, Language::En) {
                if l.normalized == lemma {
                    *counts.entry(l.surface.to_lowercase()).or_insert(0) += 1;
                }
            }
        }
        counts
            .into_iter()
            .fold(None::<(String, usize)>, |best, (s, n)| match best {
                Some(b) if b.1 >= n => Some(b),
                _ => Some((s, n)),
            })
            .map_or_else(|| lemma.to_string(), |(s, _)| s)
    }

    /// Recompute every dual-indexing link from the current assignments and
    /// install them in the taxonomy.
    pub fn derive_dual_links(&self, taxonomy: &mut Taxonomy) -> Result<Vec<ProximityLink>> {
        let mut counts: BTreeMap<(Code, Code), u64> = BTreeMap::new();
        for a in self.articles.values() {
            let Some(nodes) = a.placement.assigned_nodes() else {
                continue;
            };
            let nodes: Vec<&Code> = nodes.iter().collect();
            for (i, x) in nodes.iter().enumerate() {
                for y in &nodes[i + 1..] {
                    if !taxonomy.hierarchically_related(x, y) {
                        *counts.entry(((*x).clone(), (*y).clone())).or_insert(0) += 1;
                    }
                }
            }
        }
        let links: Vec<ProximityLink> = counts
            .into_iter()
            .map(|((a, b), w)| ProximityLink::new(a, b, w, LinkProvenance::DualIndexing))
            .collect();
        taxonomy.replace_links(LinkProvenance::DualIndexing, links.clone())?;
        Ok(links)
    }

    /// Title search over the index; `text` is analyzed as English.
    pub fn search(&self, text: &str, analyzer: &Analyzer) -> Result<Vec<SearchResult>> {
        let lemmas = analyzer.lemma_set(text, Language::En);
        if lemmas.is_empty() {
            return Err(Error::Unanalyzable(text.to_string()));
        }
        Ok(self.search_lemmas(&lemmas))
    }

    pub fn search_lemmas(&self, lemmas: &BTreeSet<String>) -> Vec<SearchResult> {
        self.index
            .search(lemmas)
            .into_iter()
            .map(|hit| SearchResult {
                article: self.articles[&hit.key].clone(),
                matched: hit.matched,
                frequency: hit.frequency,
            })
            .collect()
    }

    /// Keys of articles placed at `code` or anywhere beneath it.
    pub fn keys_under(&self, code: &str, taxonomy: &Taxonomy) -> Result<Vec<String>> {
        taxonomy.get(code)?;
        Ok(self
            .articles
            .values()
            .filter(|a| {
                a.placement
                    .codes()
                    .into_iter()
                    .any(|c| c.as_str() == code || taxonomy.is_ancestor(code, c))
            })
            .map(|a| a.record.key.clone())
            .collect())
    }

    pub fn export_bibtex<S: AsRef<str>>(&self, keys: &[S]) -> Result<String> {
        let mut found = Vec::with_capacity(keys.len());
        for key in keys {
            found.push(self.article(key.as_ref())?);
        }
        let mut out = String::new();
        for (i, a) in found.into_iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            bibtex::write_entry(&mut out, &a.record);
        }
        Ok(out)
    }

    pub fn rdf_snapshot(&self) -> String {
        rdf::render(self.articles.values())
    }
}

/// Write a list of records as BibTeX without going through the store.
pub fn records_to_bibtex<'a>(records: impl IntoIterator<Item = &'a ArticleRecord>) -> String {
    let mut out = String::new();
    for (i, r) in records.into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        bibtex::write_entry(&mut out, r);
    }
    out
}

fn place(classification: Classification, taxonomy: &mut Taxonomy, analyzer: &Analyzer) -> Result<Placement> {
    Ok(match classification {
        Classification::Assigned { nodes, .. } => Placement::Assigned { nodes },
        Classification::Orphan { host, .. } => Placement::Orphan {
            bin: taxonomy.miscellaneous_child(&host, analyzer)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taxonomy(a: &Analyzer) -> Taxonomy {
        let doc = r#"[
            {"code": "CS", "label_en": "computer science"},
            {"code": "E", "label_en": "data", "parent": "CS"},
            {"code": "E.1", "label_en": "data structures", "parent": "E"},
            {"code": "H", "label_en": "information systems", "parent": "CS"},
            {"code": "H.2", "label_en": "database management", "parent": "H"},
            {"code": "H.3", "label_en": "information storage and retrieval", "parent": "H"}
        ]"#;
        Taxonomy::from_json(doc, a).unwrap()
    }

    fn rec(key: &str, title: &str) -> ArticleRecord {
        ArticleRecord {
            key: key.into(),
            entry_type: DEFAULT_ENTRY_TYPE.into(),
            title: title.into(),
            authors: vec!["Ann Lee".into()],
            year: Some(2008),
            venue: String::new(),
            uri: None,
        }
    }

    #[test]
    fn line_index_positions() {
        let idx = LineIndex::new("ab\ncdé\n\nx");
        assert_eq!(idx.position(0), (1, 1));
        assert_eq!(idx.position(3), (2, 1));
        assert_eq!(idx.position(7), (2, 4));
        assert_eq!(idx.position(9), (4, 1));
    }

    #[test]
    fn latin1_fallback() {
        assert_eq!(decode_input(b"caf\xe9"), "café");
        assert_eq!(decode_input("café".as_bytes()), "café");
        assert_eq!(decode_input(b"\xEF\xBB\xBFx"), "x");
    }

    #[test]
    fn ingest_is_idempotent_and_tracks_updates() {
        let a = Analyzer::default();
        let mut t = taxonomy(&a);
        let mut c = Corpus::new(CorpusConfig::default());
        let records = vec![
            rec("k1", "Managing taxonomies in relational databases"),
            rec("k2", "Information storage and retrieval on disk"),
        ];
        let s1 = c.ingest(records.clone(), &mut t, &a).unwrap();
        assert_eq!((s1.inserted, s1.updated, s1.unchanged), (2, 0, 0));
        let s2 = c.ingest(records, &mut t, &a).unwrap();
        assert_eq!((s2.inserted, s2.updated, s2.unchanged), (0, 0, 2));
        let mut newer = rec("k1", "Managing taxonomies in relational databases");
        newer.year = Some(2009);
        let s3 = c.ingest([newer], &mut t, &a).unwrap();
        assert_eq!((s3.inserted, s3.updated, s3.unchanged), (0, 1, 0));
        assert_eq!(c.get("k1").unwrap().record.year, Some(2009));
    }

    #[test]
    fn database_management_finds_the_taxonomy_paper() {
        let a = Analyzer::default();
        let mut t = taxonomy(&a);
        let mut c = Corpus::new(CorpusConfig::default());
        c.ingest(
            [
                rec("k1", "Managing taxonomies in relational databases"),
                rec("k2", "Zymurgy for fun"),
            ],
            &mut t,
            &a,
        )
        .unwrap();
        let hits = c.search("database management", &a).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].article.record.key, "k1");
        assert_eq!(hits[0].matched, 2);
        assert!(c.search("quantum", &a).unwrap().is_empty());
        assert!(matches!(c.search("the of", &a), Err(Error::Unanalyzable(_))));
    }

    #[test]
    fn placement_bins_and_dual_links() {
        let a = Analyzer::default();
        let mut t = taxonomy(&a);
        let mut c = Corpus::new(CorpusConfig::default());
        c.ingest(
            [
                rec("both", "Data structures for storage and retrieval"),
                rec("zym", "Zymurgy for fun"),
            ],
            &mut t,
            &a,
        )
        .unwrap();
        assert_eq!(
            c.get("both").unwrap().placement,
            Placement::Assigned {
                nodes: ["E.1".into(), "H.3".into()].into()
            }
        );
        assert_eq!(
            c.get("zym").unwrap().placement,
            Placement::Orphan { bin: "CS.m".into() }
        );
        assert!(t.contains("CS.m"));
        let dual = t.links_with(LinkProvenance::DualIndexing);
        assert_eq!(
            dual,
            [ProximityLink::new(
                "E.1".into(),
                "H.3".into(),
                1,
                LinkProvenance::DualIndexing
            )]
        );

        c.ingest([rec("both2", "Retrieval of data structures in storage")], &mut t, &a)
            .unwrap();
        assert_eq!(t.links_with(LinkProvenance::DualIndexing)[0].weight, 2);
        // Recomputing does not accumulate.
        c.derive_dual_links(&mut t).unwrap();
        assert_eq!(t.links_with(LinkProvenance::DualIndexing)[0].weight, 2);
    }

    #[test]
    fn promotion_creates_a_sibling_branch() {
        let a = Analyzer::default();
        let mut t = taxonomy(&a);
        let mut c = Corpus::new(CorpusConfig::default());
        let titles = [
            "Quantum annealing of data",
            "Data and quantum annealing hardware",
            "Quantum annealing for data clustering",
            "Noise in quantum annealing data",
            "Data sampling by quantum annealing",
        ];
        c.ingest(
            titles.iter().enumerate().map(|(i, t)| rec(&format!("q{i}"), t)),
            &mut t,
            &a,
        )
        .unwrap();
        assert_eq!(c.orphan_bins().len(), 1);
        assert!(c.orphan_bins().contains_key(&Code::from("E.m")));

        let promoted = c.promote_orphans(&mut t, &a).unwrap();
        assert_eq!(promoted.len(), 1);
        let p = &promoted[0];
        assert_eq!(p.parent.as_str(), "E");
        assert_eq!(p.code.as_str(), "E.2");
        // All three shared lemmas occur five times; the tie goes lexicographic.
        assert_eq!(p.label, "annealing data");
        assert_eq!(p.members.len(), 5);
        assert!(c.orphan_bins().is_empty());
        let node = t.get("E.2").unwrap();
        let cluster: BTreeSet<&str> = node.cluster().collect();
        assert_eq!(cluster, ["anneal", "data", "quantum"].into());
        assert!(c.promote_orphans(&mut t, &a).unwrap().is_empty());
    }

    #[test]
    fn export_rejects_unknown_keys() {
        let c = Corpus::new(CorpusConfig::default());
        assert_eq!(c.export_bibtex::<&str>(&[]).unwrap(), "");
        let err = c.export_bibtex(&["nope"]).unwrap_err();
        assert!(err.to_string().contains("nope"));
    }
}

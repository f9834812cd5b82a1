//! Relevance evaluation of cross-language navigated search.
//!
//! Each query is resolved to a node, the node's English terms are searched in
//! the local corpus, and the first `k` results are scored against an explicit
//! judgment file.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::bundled::TableOneRow;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, Resolution};
use crate::metaquery::{node_query_terms, DEFAULT_MAX_TERMS};
use crate::taxonomy::{Code, Taxonomy};
use crate::textproc::{Analyzer, Language};

pub const DEFAULT_K: usize = 10;

fn default_k() -> usize {
    DEFAULT_K
}

fn default_lang() -> Language {
    Language::Fr
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalQuery {
    pub id: String,
    /// Node the query is meant to reach.
    pub node: Code,
    pub text: String,
    #[serde(default = "default_lang")]
    pub lang: Language,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub query: String,
    pub article: String,
    pub relevant: bool,
}

#[derive(Deserialize, Serialize)]
struct JudgmentFile {
    #[serde(default = "default_k")]
    k: usize,
    #[serde(default)]
    judgments: Vec<Judgment>,
}

/// Relevance judgments keyed by (query id, article key). Unjudged pairs are
/// not relevant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JudgmentSet {
    k: usize,
    entries: BTreeMap<(String, String), bool>,
}

impl Default for JudgmentSet {
    fn default() -> Self {
        JudgmentSet {
            k: DEFAULT_K,
            entries: BTreeMap::new(),
        }
    }
}

impl JudgmentSet {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Validation("cutoff k must be at least 1".into()));
        }
        Ok(JudgmentSet {
            k,
            entries: BTreeMap::new(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: JudgmentFile = serde_json::from_str(text)?;
        let mut set = JudgmentSet::new(file.k)?;
        for j in file.judgments {
            set.judge(&j.query, &j.article, j.relevant);
        }
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        let file = JudgmentFile {
            k: self.k,
            judgments: self
                .entries
                .iter()
                .map(|((q, a), r)| Judgment {
                    query: q.clone(),
                    article: a.clone(),
                    relevant: *r,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("judgments serialize")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn judge(&mut self, query: &str, article: &str, relevant: bool) {
        self.entries.insert((query.to_string(), article.to_string()), relevant);
    }

    pub fn is_relevant(&self, query: &str, article: &str) -> bool {
        self.entries
            .get(&(query.to_string(), article.to_string()))
            .copied()
            .unwrap_or(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub id: String,
    pub node: Code,
    pub label_en: String,
    pub query: String,
    /// Node the query resolved to, if any.
    pub resolved: Option<Code>,
    pub terms: Vec<String>,
    /// Results considered (at most k).
    pub results: usize,
    pub relevant: usize,
    pub relevance: f64,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k: usize,
    pub rows: Vec<EvalRow>,
    pub mean: i64,
}

/// Percentage of relevant results among the first `min(k, returned)`.
pub fn row_relevance(relevant: usize, returned: usize, k: usize) -> f64 {
    let considered = returned.min(k);
    if considered == 0 {
        0.0
    } else {
        100.0 * relevant as f64 / considered as f64
    }
}

/// Arithmetic mean rounded half away from zero; 0 for no rows.
pub fn mean_relevance(percentages: &[f64]) -> i64 {
    if percentages.is_empty() {
        return 0;
    }
    let mean = percentages.iter().sum::<f64>() / percentages.len() as f64;
    mean.round() as i64
}

pub fn queries_from_json(text: &str) -> Result<Vec<EvalQuery>> {
    Ok(serde_json::from_str(text)?)
}

/// The bundled Table I rows as evaluation queries (ids are the node codes).
pub fn table_one_queries(rows: &[TableOneRow]) -> Vec<EvalQuery> {
    rows.iter()
        .map(|r| EvalQuery {
            id: r.node.to_string(),
            node: r.node.clone(),
            text: r.query_fr.clone(),
            lang: Language::Fr,
        })
        .collect()
}

pub fn run_eval(
    queries: &[EvalQuery],
    judgments: &JudgmentSet,
    taxonomy: &Taxonomy,
    lexicon: &Lexicon,
    corpus: &Corpus,
    analyzer: &Analyzer,
) -> EvalReport {
    let k = judgments.k();
    let rows: Vec<EvalRow> = queries
        .iter()
        .map(|q| {
            let mut row = EvalRow {
                id: q.id.clone(),
                node: q.node.clone(),
                label_en: taxonomy.node(&q.node).map(|n| n.label_en.clone()).unwrap_or_default(),
                query: q.text.clone(),
                resolved: None,
                terms: Vec::new(),
                results: 0,
                relevant: 0,
                relevance: 0.0,
                note: None,
            };
            let resolved = match lexicon.resolve_query(&q.text, q.lang, analyzer) {
                Ok(Resolution::Found { matches }) => matches.into_iter().next().map(|m| m.code),
                Ok(Resolution::Miss(_)) | Err(_) => None,
            };
            let Some(code) = resolved else {
                row.note = Some("no node".into());
                return row;
            };
            let terms = taxonomy
                .node(&code)
                .ok_or_else(|| Error::not_found("node", code.as_str()))
                .and_then(|n| node_query_terms(n, analyzer, DEFAULT_MAX_TERMS, false));
            row.resolved = Some(code);
            let Ok(terms) = terms else {
                row.note = Some("no queryable terms".into());
                return row;
            };
            let hits = corpus.search_lemmas(&terms.iter().cloned().collect());
            row.terms = terms;
            row.results = hits.len().min(k);
            row.relevant = hits
                .iter()
                .take(k)
                .filter(|h| judgments.is_relevant(&q.id, &h.article.record.key))
                .count();
            row.relevance = row_relevance(row.relevant, hits.len(), k);
            row
        })
        .collect();
    let mean = mean_relevance(&rows.iter().map(|r| r.relevance).collect::<Vec<_>>());
    EvalReport { k, rows, mean }
}

/// Skip the search and aggregate already-measured row percentages.
pub fn bypass_report(rows: &[TableOneRow]) -> EvalReport {
    let rows: Vec<EvalRow> = rows
        .iter()
        .map(|r| EvalRow {
            id: r.node.to_string(),
            node: r.node.clone(),
            label_en: r.label_en.clone(),
            query: r.query_fr.clone(),
            resolved: None,
            terms: Vec::new(),
            results: 0,
            relevant: 0,
            relevance: r.relevance,
            note: Some("measured".into()),
        })
        .collect();
    let mean = mean_relevance(&rows.iter().map(|r| r.relevance).collect::<Vec<_>>());
    EvalReport {
        k: DEFAULT_K,
        rows,
        mean,
    }
}

impl EvalReport {
    /// Plain-text table: node, English label, query, percentage; mean last.
    pub fn to_table(&self) -> String {
        let w_label = self
            .rows
            .iter()
            .map(|r| r.label_en.chars().count())
            .max()
            .unwrap_or(0)
            .max(5);
        let w_query = self
            .rows
            .iter()
            .map(|r| r.query.chars().count())
            .max()
            .unwrap_or(0)
            .max(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:<w_label$} {:<w_query$} {:>5}",
            "node", "label", "query", "%"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:<w_label$} {:<w_query$} {:>5}",
                r.node.as_str(),
                r.label_en,
                r.query,
                r.relevance.round() as i64
            );
        }
        let _ = writeln!(out, "mean relevance: {}", self.mean);
        out
    }
}

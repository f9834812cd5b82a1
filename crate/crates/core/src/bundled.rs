//! Data files shipped with the crate: the CCS subset, the Table I query set,
//! and default provider templates.

use serde::{Deserialize, Serialize};

use crate::taxonomy::{Code, Taxonomy};
use crate::textproc::Analyzer;

pub const CCS_DOCUMENT: &str = include_str!("../data/ccs1998.json");
pub const TABLE_ONE: &str = include_str!("../data/table1.json");
pub const PROVIDERS: &str = include_str!("../data/providers.toml");

/// One row of the cross-language browsing trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableOneRow {
    pub node: Code,
    pub label_en: String,
    pub query_fr: String,
    /// Relevance percentage as printed for the original live trial.
    pub relevance: f64,
}

pub fn ccs_taxonomy(analyzer: &Analyzer) -> Taxonomy {
    Taxonomy::from_json(CCS_DOCUMENT, analyzer).expect("bundled CCS document is valid")
}

pub fn table_one() -> Vec<TableOneRow> {
    serde_json::from_str(TABLE_ONE).expect("bundled Table I fixture is valid")
}

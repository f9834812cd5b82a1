use serde::{Deserialize, Serialize};

use super::{CcsNode, Code, KeywordSource, NodeKind};
use crate::error::{Error, Result};

/// One entry of a taxonomy document. `kind` and `added_keywords` are only
/// emitted when they differ from the defaults, so a plain CCS document
/// round-trips unchanged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentNode {
    pub code: Code,
    pub label_en: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_fr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<Code>,
    #[serde(default, skip_serializing_if = "is_standard")]
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub added_keywords: Vec<AddedKeyword>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedKeyword {
    pub lemma: String,
    pub source: KeywordSource,
}

fn is_standard(kind: &NodeKind) -> bool {
    *kind == NodeKind::Standard
}

impl From<&CcsNode> for DocumentNode {
    fn from(node: &CcsNode) -> Self {
        DocumentNode {
            code: node.code.clone(),
            label_en: node.label_en.clone(),
            label_fr: node.label_fr.clone(),
            parent: node.parent.clone(),
            kind: node.kind,
            added_keywords: node
                .added_keywords()
                .map(|k| AddedKeyword {
                    lemma: k.lemma.clone(),
                    source: k.source,
                })
                .collect(),
        }
    }
}

pub(super) fn parse(source: impl std::io::Read) -> Result<Vec<DocumentNode>> {
    serde_json::from_reader(source).map_err(|e| {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        }
    })
}

//! The CCS-derived ontology: a rooted tree of topics, each carrying a keyword
//! cluster, plus undirected proximity links between unrelated branches.

mod code;
mod document;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use code::Code;
pub use document::{AddedKeyword, DocumentNode};

use crate::error::{Error, Result};
use crate::textproc::{Analyzer, Language};

pub const MISCELLANEOUS_LABEL: &str = "miscellaneous";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    #[default]
    Standard,
    Miscellaneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeywordOrigin {
    Native,
    Added,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeywordSource {
    Label,
    OrphanPromotion,
    DualIndex,
    Proposal,
    Manual,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keyword {
    pub lemma: String,
    pub origin: KeywordOrigin,
    pub source: KeywordSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcsNode {
    pub code: Code,
    pub label_en: String,
    pub label_fr: Option<String>,
    pub kind: NodeKind,
    pub parent: Option<Code>,
    pub children: BTreeSet<Code>,
    /// Keyword cluster keyed by lemma.
    pub keywords: BTreeMap<String, Keyword>,
}

impl CcsNode {
    pub fn is_standard(&self) -> bool {
        self.kind == NodeKind::Standard
    }

    pub fn native_keywords(&self) -> BTreeSet<&str> {
        self.keywords
            .values()
            .filter(|k| k.origin == KeywordOrigin::Native)
            .map(|k| k.lemma.as_str())
            .collect()
    }

    pub fn added_keywords(&self) -> impl Iterator<Item = &Keyword> {
        self.keywords.values().filter(|k| k.origin == KeywordOrigin::Added)
    }

    /// The full keyword cluster, native and added.
    pub fn cluster(&self) -> impl Iterator<Item = &str> {
        self.keywords.keys().map(String::as_str)
    }

    pub fn has_keyword(&self, lemma: &str) -> bool {
        self.keywords.contains_key(lemma)
    }

    fn native_from_label(&mut self, analyzer: &Analyzer) {
        self.keywords.retain(|_, k| k.origin == KeywordOrigin::Added);
        for lemma in analyzer.extract_native_keywords(&self.label_en, Language::En) {
            self.keywords.insert(
                lemma.clone(),
                Keyword {
                    lemma,
                    origin: KeywordOrigin::Native,
                    source: KeywordSource::Label,
                },
            );
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkProvenance {
    LabelCooccurrence,
    DualIndexing,
}

/// Undirected proximity arc, normalized so that `node_a < node_b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProximityLink {
    pub node_a: Code,
    pub node_b: Code,
    pub weight: u64,
    pub provenance: LinkProvenance,
}

impl ProximityLink {
    pub fn new(a: Code, b: Code, weight: u64, provenance: LinkProvenance) -> Self {
        let (node_a, node_b) = if a <= b { (a, b) } else { (b, a) };
        ProximityLink {
            node_a,
            node_b,
            weight,
            provenance,
        }
    }

    pub fn other(&self, code: &Code) -> Option<&Code> {
        if &self.node_a == code {
            Some(&self.node_b)
        } else if &self.node_b == code {
            Some(&self.node_a)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub code: Code,
    pub label_en: String,
    pub label_fr: Option<String>,
    pub kind: NodeKind,
}

impl From<&CcsNode> for NodeSummary {
    fn from(n: &CcsNode) -> Self {
        NodeSummary {
            code: n.code.clone(),
            label_en: n.label_en.clone(),
            label_fr: n.label_fr.clone(),
            kind: n.kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighbor {
    pub code: Code,
    pub label_en: String,
    pub weight: u64,
    pub provenance: LinkProvenance,
}

/// A node with its hierarchical and proximity neighbourhood.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeView {
    pub node: CcsNode,
    pub parent: Option<NodeSummary>,
    pub children: Vec<NodeSummary>,
    pub neighbors: Vec<Neighbor>,
}

type LinkKey = (Code, Code, LinkProvenance);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Taxonomy {
    root: Code,
    nodes: BTreeMap<Code, CcsNode>,
    links: BTreeMap<LinkKey, u64>,
}

impl Taxonomy {
    /// Parse a taxonomy document (JSON array of nodes) and validate it.
    pub fn load(source: impl std::io::Read, analyzer: &Analyzer) -> Result<Self> {
        let nodes = document::parse(source)?;
        Taxonomy::from_document(nodes, analyzer)
    }

    pub fn from_json(text: &str, analyzer: &Analyzer) -> Result<Self> {
        Taxonomy::load(text.as_bytes(), analyzer)
    }

    pub fn from_document(entries: Vec<DocumentNode>, analyzer: &Analyzer) -> Result<Self> {
        let mut nodes: BTreeMap<Code, CcsNode> = BTreeMap::new();
        let mut pending_keywords = Vec::new();
        for entry in entries {
            if !entry.code.is_well_formed() {
                return Err(Error::Validation(format!("malformed code {:?}", entry.code.as_str())));
            }
            if nodes.contains_key(&entry.code) {
                return Err(Error::Validation(format!("duplicate code {}", entry.code)));
            }
            if entry.label_en.trim().is_empty() {
                return Err(Error::Validation(format!("node {} has an empty label", entry.code)));
            }
            pending_keywords.push((entry.code.clone(), entry.added_keywords));
            let mut node = CcsNode {
                code: entry.code.clone(),
                label_en: entry.label_en,
                label_fr: entry.label_fr.filter(|l| !l.trim().is_empty()),
                kind: entry.kind,
                parent: entry.parent,
                children: BTreeSet::new(),
                keywords: BTreeMap::new(),
            };
            node.native_from_label(analyzer);
            nodes.insert(entry.code, node);
        }

        let roots: Vec<Code> = nodes
            .values()
            .filter(|n| n.parent.is_none())
            .map(|n| n.code.clone())
            .collect();
        let root = match roots.as_slice() {
            [] => return Err(Error::Validation("document has no root node".into())),
            [root] => root.clone(),
            many => {
                let list: Vec<_> = many.iter().map(Code::as_str).collect();
                return Err(Error::Validation(format!(
                    "document has {} roots: {}",
                    many.len(),
                    list.join(", ")
                )));
            }
        };

        let edges: Vec<(Code, Code)> = nodes
            .values()
            .filter_map(|n| n.parent.clone().map(|p| (p, n.code.clone())))
            .collect();
        for (parent, child) in edges {
            let Some(parent_node) = nodes.get_mut(&parent) else {
                return Err(Error::Validation(format!("node {child} names unknown parent {parent}")));
            };
            if parent != root && !parent.is_proper_prefix_of(&child) {
                return Err(Error::Validation(format!(
                    "code {child} does not extend its parent code {parent}"
                )));
            }
            if parent_node.kind == NodeKind::Miscellaneous {
                return Err(Error::Validation(format!(
                    "miscellaneous node {parent} cannot have children"
                )));
            }
            parent_node.children.insert(child);
        }
        if nodes[&root].kind == NodeKind::Miscellaneous {
            return Err(Error::Validation("root cannot be a miscellaneous node".into()));
        }

        let mut taxonomy = Taxonomy {
            root,
            nodes,
            links: BTreeMap::new(),
        };
        taxonomy.check_acyclic()?;
        for (code, keywords) in pending_keywords {
            for kw in keywords {
                let node = taxonomy.nodes.get_mut(&code).expect("node inserted above");
                node.keywords.entry(kw.lemma.clone()).or_insert(Keyword {
                    lemma: kw.lemma,
                    origin: KeywordOrigin::Added,
                    source: kw.source,
                });
            }
        }
        Ok(taxonomy)
    }

    fn check_acyclic(&self) -> Result<()> {
        let limit = self.nodes.len();
        for code in self.nodes.keys() {
            let mut steps = 0;
            let mut cur = code;
            while let Some(parent) = &self.nodes[cur].parent {
                steps += 1;
                if steps > limit {
                    return Err(Error::Validation(format!("cycle through node {code}")));
                }
                cur = parent;
            }
            if cur != &self.root {
                return Err(Error::Validation(format!("node {code} is not under the root")));
            }
        }
        Ok(())
    }

    /// Export as a taxonomy document: root first, then code order.
    pub fn to_document(&self) -> Vec<DocumentNode> {
        let root = std::iter::once(&self.nodes[&self.root]);
        let rest = self.nodes.values().filter(|n| n.code != self.root);
        root.chain(rest).map(DocumentNode::from).collect()
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_document()).expect("taxonomy document serializes");
        out.push('\n');
        out
    }

    pub fn root(&self) -> &Code {
        &self.root
    }

    pub fn root_node(&self) -> &CcsNode {
        &self.nodes[&self.root]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, code: &str) -> Option<&CcsNode> {
        self.nodes.get(&Code::from(code))
    }

    pub fn get(&self, code: &str) -> Result<&CcsNode> {
        self.nodes
            .get(&Code::from(code))
            .ok_or_else(|| Error::not_found("node", code))
    }

    pub(crate) fn get_mut(&mut self, code: &str) -> Result<&mut CcsNode> {
        self.nodes
            .get_mut(&Code::from(code))
            .ok_or_else(|| Error::not_found("node", code))
    }

    pub fn contains(&self, code: &str) -> bool {
        self.nodes.contains_key(&Code::from(code))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &CcsNode> {
        self.nodes.values()
    }

    pub fn standard_nodes(&self) -> impl Iterator<Item = &CcsNode> {
        self.nodes.values().filter(|n| n.is_standard())
    }

    pub fn set_label_fr(&mut self, code: &str, label: Option<String>) -> Result<()> {
        self.get_mut(code)?.label_fr = label;
        Ok(())
    }

    /// Codes from the node's parent up to the root.
    pub fn ancestors(&self, code: &str) -> Vec<Code> {
        let mut out = Vec::new();
        let mut cur = self.nodes.get(&Code::from(code)).and_then(|n| n.parent.as_ref());
        while let Some(parent) = cur {
            out.push(parent.clone());
            cur = self.nodes.get(parent).and_then(|n| n.parent.as_ref());
        }
        out
    }

    pub fn depth(&self, code: &str) -> usize {
        self.ancestors(code).len()
    }

    pub fn is_ancestor(&self, ancestor: &str, descendant: &str) -> bool {
        self.ancestors(descendant).iter().any(|c| c.as_str() == ancestor)
    }

    /// Either node is an ancestor of the other (or they are the same node).
    pub fn hierarchically_related(&self, a: &str, b: &str) -> bool {
        a == b || self.is_ancestor(a, b) || self.is_ancestor(b, a)
    }

    pub fn query_node(&self, code: &str) -> Result<NodeView> {
        let node = self.get(code)?;
        let parent = node.parent.as_ref().map(|p| NodeSummary::from(&self.nodes[p]));
        let children = node
            .children
            .iter()
            .map(|c| NodeSummary::from(&self.nodes[c]))
            .collect();
        Ok(NodeView {
            node: node.clone(),
            parent,
            children,
            neighbors: self.neighbors(code),
        })
    }

    /// Proximity neighbours, by descending weight then code.
    pub fn neighbors(&self, code: &str) -> Vec<Neighbor> {
        let code = Code::from(code);
        let mut out: Vec<Neighbor> = self
            .links()
            .filter_map(|link| {
                link.other(&code).map(|other| Neighbor {
                    code: other.clone(),
                    label_en: self.nodes[other].label_en.clone(),
                    weight: link.weight,
                    provenance: link.provenance,
                })
            })
            .collect();
        out.sort_by(|x, y| {
            y.weight
                .cmp(&x.weight)
                .then_with(|| x.code.cmp(&y.code))
                .then_with(|| x.provenance.cmp(&y.provenance))
        });
        out
    }

    fn next_child_index(&self, parent: &CcsNode) -> u64 {
        parent
            .children
            .iter()
            .filter_map(|c| c.last_segment().parse::<u64>().ok())
            .max()
            .map_or(1, |m| m + 1)
    }

    /// Create a new standard leaf under `parent`, coded with the next free
    /// integer suffix.
    pub fn add_branch(&mut self, parent: &str, label_en: &str, analyzer: &Analyzer) -> Result<Code> {
        let parent_node = self.get(parent)?;
        if parent_node.kind == NodeKind::Miscellaneous {
            return Err(Error::Rejected(format!(
                "cannot add a branch under miscellaneous node {parent}"
            )));
        }
        let label = label_en.trim();
        if label.is_empty() {
            return Err(Error::Rejected("branch label is empty".into()));
        }
        if analyzer.extract_native_keywords(label, Language::En).is_empty() {
            return Err(Error::Rejected(format!(
                "label {label:?} yields no keywords after stop-list filtering"
            )));
        }
        let code = parent_node.code.child(self.next_child_index(parent_node));
        self.insert_leaf(parent, code.clone(), label, NodeKind::Standard, analyzer);
        Ok(code)
    }

    fn insert_leaf(&mut self, parent: &str, code: Code, label: &str, kind: NodeKind, analyzer: &Analyzer) {
        let mut node = CcsNode {
            code: code.clone(),
            label_en: label.to_string(),
            label_fr: None,
            kind,
            parent: Some(Code::from(parent)),
            children: BTreeSet::new(),
            keywords: BTreeMap::new(),
        };
        node.native_from_label(analyzer);
        self.nodes
            .get_mut(&Code::from(parent))
            .expect("parent checked by caller")
            .children
            .insert(code.clone());
        self.nodes.insert(code, node);
    }

    /// The `miscellaneous` child of `host`, created on first use.
    pub fn miscellaneous_child(&mut self, host: &str, analyzer: &Analyzer) -> Result<Code> {
        let host_node = self.get(host)?;
        if host_node.kind != NodeKind::Standard {
            return Err(Error::Rejected(format!(
                "miscellaneous bins hang off standard nodes, {host} is not one"
            )));
        }
        if let Some(existing) = host_node
            .children
            .iter()
            .find(|c| self.nodes[*c].kind == NodeKind::Miscellaneous)
        {
            return Ok(existing.clone());
        }
        let base = host_node.code.child("m");
        let code = std::iter::once(base.clone())
            .chain((1..).map(|i| host_node.code.child(format!("m{i}"))))
            .find(|c| !self.nodes.contains_key(c))
            .expect("unbounded candidate sequence");
        self.insert_leaf(
            host,
            code.clone(),
            MISCELLANEOUS_LABEL,
            NodeKind::Miscellaneous,
            analyzer,
        );
        Ok(code)
    }

    /// Attach an added keyword. The term must reduce to exactly one lemma.
    pub fn add_keyword(
        &mut self,
        code: &str,
        term: &str,
        language: Language,
        source: KeywordSource,
        analyzer: &Analyzer,
    ) -> Result<&CcsNode> {
        self.get(code)?;
        let lemmas = analyzer.unique_lemmas(term, language);
        let lemma = match lemmas.as_slice() {
            [] => return Err(Error::Rejected(format!("keyword {term:?} is empty or a stop word"))),
            [one] => one.clone(),
            _ => {
                return Err(Error::Rejected(format!(
                    "keyword {term:?} must be a single content word"
                )))
            }
        };
        let node = self.get_mut(code)?;
        node.keywords.entry(lemma.clone()).or_insert(Keyword {
            lemma,
            origin: KeywordOrigin::Added,
            source,
        });
        Ok(node)
    }

    /// Insert an already-normalized lemma as an added keyword.
    pub(crate) fn insert_added_keyword(&mut self, code: &str, lemma: String, source: KeywordSource) -> Result<()> {
        let node = self.get_mut(code)?;
        node.keywords.entry(lemma.clone()).or_insert(Keyword {
            lemma,
            origin: KeywordOrigin::Added,
            source,
        });
        Ok(())
    }

    fn check_linkable(&self, a: &str, b: &str) -> Result<()> {
        self.get(a)?;
        self.get(b)?;
        if a == b {
            return Err(Error::Rejected(format!("cannot link node {a} to itself")));
        }
        if self.hierarchically_related(a, b) {
            return Err(Error::Rejected(format!(
                "{a} and {b} are in an ancestor relation; the hierarchy already links them"
            )));
        }
        Ok(())
    }

    /// Store or strengthen a link; repeated calls accumulate weight.
    pub fn add_proximity_link(
        &mut self,
        a: &str,
        b: &str,
        weight: u64,
        provenance: LinkProvenance,
    ) -> Result<ProximityLink> {
        self.check_linkable(a, b)?;
        let link = ProximityLink::new(a.into(), b.into(), weight, provenance);
        let total = self
            .links
            .entry((link.node_a.clone(), link.node_b.clone(), provenance))
            .or_insert(0);
        *total += weight;
        Ok(ProximityLink { weight: *total, ..link })
    }

    /// Drop every link of `provenance` and install `links` in its place.
    pub fn replace_links(
        &mut self,
        provenance: LinkProvenance,
        links: impl IntoIterator<Item = ProximityLink>,
    ) -> Result<()> {
        let links: Vec<ProximityLink> = links.into_iter().collect();
        for link in &links {
            self.check_linkable(link.node_a.as_str(), link.node_b.as_str())?;
        }
        self.links.retain(|(_, _, p), _| *p != provenance);
        for link in links {
            let link = ProximityLink::new(link.node_a, link.node_b, link.weight, provenance);
            *self.links.entry((link.node_a, link.node_b, provenance)).or_insert(0) += link.weight;
        }
        Ok(())
    }

    pub fn links(&self) -> impl Iterator<Item = ProximityLink> + '_ {
        self.links.iter().map(|((a, b, p), w)| ProximityLink {
            node_a: a.clone(),
            node_b: b.clone(),
            weight: *w,
            provenance: *p,
        })
    }

    pub fn links_with(&self, provenance: LinkProvenance) -> Vec<ProximityLink> {
        self.links().filter(|l| l.provenance == provenance).collect()
    }
}

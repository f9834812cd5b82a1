//! The assembled navigator: taxonomy, lexicon, corpus and provider config,
//! with optional persistence to a data directory.
//!
//! Layout of a data directory:
//!
//! | file                  | content                                  |
//! |-----------------------|------------------------------------------|
//! | `taxonomy.json`       | taxonomy document (with added keywords)  |
//! | `links.json`          | proximity links                          |
//! | `lexicon.json`        | lexicon entries and proposals            |
//! | `corpus.jsonl`        | article log                              |
//! | `feeds/proposals.rdf` | RSS 1.0 feed of pending proposals        |
//! | `providers.toml`      | optional provider config                 |

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bundled;
use crate::corpus::{
    self, ArticleLog, ArticleRecord, Corpus, CorpusConfig, Format, IngestStats, ParseReport, Promotion, StoredArticle,
};
use crate::error::{Error, Result};
use crate::eval::{self, EvalQuery, EvalReport, JudgmentSet};
use crate::lexicon::{
    BootstrapReport, FixtureTranslator, Lexicon, LexiconEntry, ProposalKind, Resolution, TranslationProposal, Verdict,
};
use crate::metaquery::{node_query_terms, MetaQuery, ProviderSet};
use crate::taxonomy::{Code, LinkProvenance, NodeKind, NodeSummary, NodeView, ProximityLink, Taxonomy};
use crate::textproc::{cooccurrence_links, Analyzer, AnalyzerConfig, Language, DEFAULT_MIN_LABELS};

pub const TAXONOMY_FILE: &str = "taxonomy.json";
pub const LINKS_FILE: &str = "links.json";
pub const LEXICON_FILE: &str = "lexicon.json";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const FEED_FILE: &str = "feeds/proposals.rdf";
pub const PROVIDERS_FILE: &str = "providers.toml";
pub const DEFAULT_BASE_URL: &str = "http://localhost:8080";

/// Internal hits listed on a node panel.
pub const PANEL_HITS: usize = eval::DEFAULT_K;

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Where state is persisted; `None` keeps everything in memory.
    pub data_dir: Option<PathBuf>,
    /// Provider config; falls back to the data directory's, then the bundled one.
    pub providers: Option<PathBuf>,
    pub corpus: CorpusConfig,
    pub analyzer: AnalyzerConfig,
    pub cooccurrence_min_labels: usize,
    /// Public base URL used for feed links.
    pub base_url: String,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            data_dir: None,
            providers: None,
            corpus: CorpusConfig::default(),
            analyzer: AnalyzerConfig::default(),
            cooccurrence_min_labels: DEFAULT_MIN_LABELS,
            base_url: DEFAULT_BASE_URL.to_string(),
        }
    }
}

impl EngineConfig {
    pub fn in_memory() -> Self {
        EngineConfig::default()
    }

    pub fn with_data_dir(dir: impl Into<PathBuf>) -> Self {
        EngineConfig {
            data_dir: Some(dir.into()),
            ..EngineConfig::default()
        }
    }
}

type Clock = Box<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct Engine {
    config: EngineConfig,
    analyzer: Analyzer,
    taxonomy: Taxonomy,
    lexicon: Lexicon,
    corpus: Corpus,
    providers: ProviderSet,
    clock: Clock,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("data_dir", &self.config.data_dir)
            .field("nodes", &self.taxonomy.len())
            .field("articles", &self.corpus.len())
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub code: Code,
    pub label_en: String,
    pub label_fr: Option<String>,
    pub kind: NodeKind,
    pub parent: Option<Code>,
    pub children: Vec<Code>,
    /// Articles placed directly on this node.
    pub articles: usize,
}

/// The whole taxonomy in one document: nodes root first, then code order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub root: Code,
    pub nodes: Vec<TreeNode>,
    pub links: Vec<ProximityLink>,
}

/// How to reach an article: its own locator, or a fallback search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArticleLink {
    Uri { url: String },
    Fallback { query: MetaQuery },
    None,
}

impl ArticleLink {
    pub fn url(&self) -> Option<&str> {
        match self {
            ArticleLink::Uri { url } => Some(url),
            ArticleLink::Fallback { query } => Some(&query.url),
            ArticleLink::None => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleView {
    pub article: StoredArticle,
    pub link: ArticleLink,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleHit {
    pub key: String,
    pub title: String,
    pub authors: Vec<String>,
    pub year: Option<i32>,
    pub venue: String,
    pub matched: usize,
    pub link: ArticleLink,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDetail {
    #[serde(flatten)]
    pub view: NodeView,
    pub lexicon: Vec<LexiconEntry>,
    pub metaqueries: Vec<MetaQuery>,
    /// English terms used for meta-queries and the internal search.
    pub terms: Vec<String>,
    pub hits: Vec<ArticleHit>,
    /// Keys of articles placed directly on the node.
    pub assigned: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query: String,
    pub lang: Language,
    pub resolution: Resolution,
    /// The best-matching node, when the query resolved.
    pub node: Option<NodeSummary>,
    /// Lemmas searched in the corpus.
    pub terms: Vec<String>,
    pub hits: Vec<ArticleHit>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOutcome {
    pub format: String,
    pub stats: IngestStats,
    pub report: ParseReport,
    pub promotions: Vec<Promotion>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSummary {
    pub cooccurrence: usize,
    pub dual_indexing: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadSummary {
    pub nodes: usize,
    pub bootstrap: BootstrapReport,
    pub links: LinkSummary,
    pub reclassified: usize,
}

impl Engine {
    /// Open the engine, reading whatever state the data directory holds and
    /// filling the rest from the bundled fixtures.
    pub fn open(config: EngineConfig) -> Result<Self> {
        config.corpus.validate()?;
        let analyzer = Analyzer::new(&config.analyzer);
        let dir = config.data_dir.clone();
        if let Some(dir) = &dir {
            fs::create_dir_all(dir)?;
        }
        let file = |name: &str| dir.as_ref().map(|d| d.join(name)).filter(|p| p.exists());

        let providers = match (&config.providers, file(PROVIDERS_FILE)) {
            (Some(path), _) => ProviderSet::load(path)?,
            (None, Some(path)) => ProviderSet::load(&path)?,
            (None, None) => ProviderSet::bundled(),
        };

        let mut taxonomy = match file(TAXONOMY_FILE) {
            Some(path) => Taxonomy::load(fs::File::open(path)?, &analyzer)?,
            None => bundled::ccs_taxonomy(&analyzer),
        };
        match file(LINKS_FILE) {
            Some(path) => install_links(&mut taxonomy, serde_json::from_str(&fs::read_to_string(path)?)?)?,
            None => taxonomy.replace_links(
                LinkProvenance::LabelCooccurrence,
                cooccurrence_links(&taxonomy, config.cooccurrence_min_labels),
            )?,
        }
        let lexicon = match file(LEXICON_FILE) {
            Some(path) => Lexicon::from_json(&fs::read_to_string(path)?)?,
            None => {
                let mut lexicon = Lexicon::new();
                lexicon.bootstrap_translations(&mut taxonomy, &FixtureTranslator::bundled(), &analyzer);
                lexicon
            }
        };
        let stored = match &dir {
            Some(d) => ArticleLog::new(d.join(CORPUS_FILE)).load()?,
            None => Vec::new(),
        };
        let corpus = Corpus::from_articles(config.corpus.clone(), stored, &analyzer);

        Ok(Engine {
            config,
            analyzer,
            taxonomy,
            lexicon,
            corpus,
            providers,
            clock: Box::new(Utc::now),
        })
    }

    /// Replace the wall clock used to timestamp proposals and votes.
    pub fn with_clock(mut self, clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn providers(&self) -> &ProviderSet {
        &self.providers
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.config.data_dir.as_ref().map(|d| d.join(name))
    }

    /// Write every state file, compacting the article log.
    pub fn save(&self) -> Result<()> {
        let Some(dir) = &self.config.data_dir else {
            return Ok(());
        };
        self.save_documents()?;
        ArticleLog::new(dir.join(CORPUS_FILE)).compact(self.corpus.articles())?;
        Ok(())
    }

    fn save_documents(&self) -> Result<()> {
        if self.config.data_dir.is_none() {
            return Ok(());
        }
        let links: Vec<ProximityLink> = self.taxonomy.links().collect();
        let mut links_json = serde_json::to_string_pretty(&links)?;
        links_json.push('\n');
        write_atomic(&self.path(TAXONOMY_FILE).expect("data dir"), &self.taxonomy.to_json())?;
        write_atomic(&self.path(LINKS_FILE).expect("data dir"), &links_json)?;
        write_atomic(&self.path(LEXICON_FILE).expect("data dir"), &self.lexicon.to_json())?;
        write_atomic(&self.path(FEED_FILE).expect("data dir"), &self.feed())?;
        Ok(())
    }

    fn append_articles(&self, keys: &[String]) -> Result<()> {
        let Some(path) = self.path(CORPUS_FILE) else {
            return Ok(());
        };
        ArticleLog::new(path).append(keys.iter().filter_map(|k| self.corpus.get(k)))
    }

    /// SHA-256 over the serialized state; equal digests mean equal state.
    pub fn state_digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.taxonomy.to_json());
        for link in self.taxonomy.links() {
            h.update(serde_json::to_vec(&link).expect("link serializes"));
        }
        h.update(self.lexicon.to_json());
        for a in self.corpus.articles() {
            h.update(serde_json::to_vec(a).expect("article serializes"));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    // Reads.

    pub fn tree(&self) -> TreeDocument {
        let counts = |code: &Code| {
            self.corpus
                .articles()
                .filter(|a| a.placement.codes().contains(&code))
                .count()
        };
        let nodes = self
            .taxonomy
            .to_document()
            .into_iter()
            .map(|d| {
                let node = self.taxonomy.node(&d.code).expect("document node exists");
                TreeNode {
                    articles: counts(&node.code),
                    code: node.code.clone(),
                    label_en: node.label_en.clone(),
                    label_fr: node.label_fr.clone(),
                    kind: node.kind,
                    parent: node.parent.clone(),
                    children: node.children.iter().cloned().collect(),
                }
            })
            .collect();
        TreeDocument {
            root: self.taxonomy.root().clone(),
            nodes,
            links: self.taxonomy.links().collect(),
        }
    }

    pub fn resolve(&self, text: &str, lang: Language) -> Result<Resolution> {
        self.lexicon.resolve_query(text, lang, &self.analyzer)
    }

    /// English query terms for a node, honouring the provider config switch.
    pub fn node_terms(&self, code: &str) -> Result<Vec<String>> {
        let node = self.taxonomy.get(code)?;
        node_query_terms(
            node,
            &self.analyzer,
            crate::metaquery::DEFAULT_MAX_TERMS,
            self.providers.include_added_keywords(),
        )
    }

    pub fn node_metaqueries(&self, code: &str) -> Result<Vec<MetaQuery>> {
        let node = self.taxonomy.get(code)?;
        self.providers.node_metaqueries(node, &self.analyzer)
    }

    pub fn render_metaquery(&self, provider: &str, terms: &[String]) -> Result<MetaQuery> {
        self.providers.render_metaquery(provider, terms)
    }

    pub fn node_detail(&self, code: &str) -> Result<NodeDetail> {
        let view = self.taxonomy.query_node(code)?;
        let code = view.node.code.clone();
        let (terms, metaqueries) = match self.node_terms(&code) {
            Ok(terms) => (terms, self.node_metaqueries(&code)?),
            Err(Error::NoQueryableTerms(_)) => (Vec::new(), Vec::new()),
            Err(e) => return Err(e),
        };
        let hits = if terms.is_empty() {
            Vec::new()
        } else {
            self.hits(&terms.iter().cloned().collect(), PANEL_HITS)
        };
        let assigned = self
            .corpus
            .articles()
            .filter(|a| a.placement.codes().contains(&&code))
            .map(|a| a.record.key.clone())
            .collect();
        Ok(NodeDetail {
            lexicon: self.lexicon.entries_for(&code).cloned().collect(),
            view,
            metaqueries,
            terms,
            hits,
            assigned,
        })
    }

    pub fn link_for(&self, record: &ArticleRecord) -> ArticleLink {
        if let Some(uri) = &record.uri {
            return ArticleLink::Uri { url: uri.clone() };
        }
        match self.providers.scholar_fallback(record, &self.analyzer) {
            Ok(query) => ArticleLink::Fallback { query },
            Err(_) => ArticleLink::None,
        }
    }

    pub fn article(&self, key: &str) -> Result<ArticleView> {
        let article = self.corpus.article(key)?.clone();
        let link = self.link_for(&article.record);
        Ok(ArticleView { article, link })
    }

    fn hits(&self, lemmas: &BTreeSet<String>, limit: usize) -> Vec<ArticleHit> {
        self.corpus
            .search_lemmas(lemmas)
            .into_iter()
            .take(limit)
            .map(|h| ArticleHit {
                link: self.link_for(&h.article.record),
                key: h.article.record.key,
                title: h.article.record.title,
                authors: h.article.record.authors,
                year: h.article.record.year,
                venue: h.article.record.venue,
                matched: h.matched,
            })
            .collect()
    }

    /// Resolve the query to a node and search the corpus with that node's
    /// English terms. English queries fall back to searching their own lemmas
    /// when no node matches. A miss is a normal, empty response.
    pub fn search(&self, text: &str, lang: Language, limit: usize) -> Result<SearchResponse> {
        let resolution = self.resolve(text, lang)?;
        let node = resolution
            .top()
            .and_then(|m| self.taxonomy.node(&m.code))
            .map(NodeSummary::from);
        let terms: Vec<String> = match (&node, lang) {
            (Some(n), _) => self.node_terms(&n.code).unwrap_or_default(),
            (None, Language::En) => self.analyzer.unique_lemmas(text, Language::En),
            (None, Language::Fr) => Vec::new(),
        };
        let hits = if terms.is_empty() {
            Vec::new()
        } else {
            self.hits(&terms.iter().cloned().collect(), limit)
        };
        Ok(SearchResponse {
            query: text.to_string(),
            lang,
            resolution,
            node,
            terms,
            hits,
        })
    }

    pub fn feed(&self) -> String {
        self.lexicon.render_feed(&self.taxonomy, &self.config.base_url)
    }

    pub fn snapshot(&self) -> String {
        self.corpus.rdf_snapshot()
    }

    pub fn proposals(&self) -> Vec<TranslationProposal> {
        self.lexicon.proposals().cloned().collect()
    }

    pub fn proposal(&self, id: u64) -> Result<TranslationProposal> {
        self.lexicon.proposal(id).cloned()
    }

    pub fn export_bibtex_keys<S: AsRef<str>>(&self, keys: &[S]) -> Result<String> {
        self.corpus.export_bibtex(keys)
    }

    /// Thematic bibliography: every article placed on `code` or below it.
    pub fn export_bibtex_node(&self, code: &str) -> Result<String> {
        let keys = self.corpus.keys_under(code, &self.taxonomy)?;
        self.corpus.export_bibtex(&keys)
    }

    pub fn eval(&self, queries: &[EvalQuery], judgments: &JudgmentSet) -> EvalReport {
        eval::run_eval(
            queries,
            judgments,
            &self.taxonomy,
            &self.lexicon,
            &self.corpus,
            &self.analyzer,
        )
    }

    // Writes. Each persists what it changed before returning.

    pub fn propose(
        &mut self,
        node: &str,
        text: &str,
        kind: ProposalKind,
        proposer: &str,
    ) -> Result<TranslationProposal> {
        let at = (self.clock)();
        let p = self
            .lexicon
            .submit_proposal(&self.taxonomy, node, text, kind, proposer, at, &self.analyzer)?;
        self.save_documents()?;
        Ok(p)
    }

    pub fn vote(&mut self, id: u64, member: &str, verdict: Verdict) -> Result<TranslationProposal> {
        let at = (self.clock)();
        let p = self
            .lexicon
            .vote(id, member, verdict, at, &mut self.taxonomy, &self.analyzer)?;
        self.save_documents()?;
        Ok(p)
    }

    /// Parse, classify and index a corpus file; optionally promote orphan
    /// groups afterwards.
    pub fn ingest(&mut self, bytes: &[u8], format: Format, promote: bool) -> Result<IngestOutcome> {
        let text = corpus::decode_input(bytes);
        let (records, report) = corpus::parse_records_str(&text, format)?;
        self.ingest_records(records, report, format, promote)
    }

    pub fn ingest_records(
        &mut self,
        records: Vec<ArticleRecord>,
        report: ParseReport,
        format: Format,
        promote: bool,
    ) -> Result<IngestOutcome> {
        let stats = self.corpus.ingest(records, &mut self.taxonomy, &self.analyzer)?;
        let promotions = if promote { self.promote_orphans()? } else { Vec::new() };
        if promotions.is_empty() {
            self.append_articles(&stats.changed)?;
            self.save_documents()?;
        }
        Ok(IngestOutcome {
            format: format.to_string(),
            stats,
            report,
            promotions,
        })
    }

    pub fn promote(&mut self) -> Result<Vec<Promotion>> {
        self.promote_orphans()
    }

    fn promote_orphans(&mut self) -> Result<Vec<Promotion>> {
        let promotions = self.corpus.promote_orphans(&mut self.taxonomy, &self.analyzer)?;
        if !promotions.is_empty() {
            self.lexicon.sync(&self.taxonomy, &self.analyzer);
            self.corpus.derive_dual_links(&mut self.taxonomy)?;
            self.save()?;
        }
        Ok(promotions)
    }

    /// Recompute both kinds of proximity link.
    pub fn link(&mut self) -> Result<LinkSummary> {
        let summary = self.relink()?;
        self.save_documents()?;
        Ok(summary)
    }

    fn relink(&mut self) -> Result<LinkSummary> {
        let cooc = cooccurrence_links(&self.taxonomy, self.config.cooccurrence_min_labels);
        let cooccurrence = cooc.len();
        self.taxonomy.replace_links(LinkProvenance::LabelCooccurrence, cooc)?;
        let dual_indexing = self.corpus.derive_dual_links(&mut self.taxonomy)?.len();
        Ok(LinkSummary {
            cooccurrence,
            dual_indexing,
        })
    }

    /// Replace the taxonomy with a new CCS document. French labels and the
    /// lexicon are bootstrapped again and every stored article is
    /// reclassified against the new tree.
    pub fn load_taxonomy(&mut self, source: impl std::io::Read) -> Result<LoadSummary> {
        let mut taxonomy = Taxonomy::load(source, &self.analyzer)?;
        let mut lexicon = Lexicon::new();
        let bootstrap = lexicon.bootstrap_translations(&mut taxonomy, &FixtureTranslator::bundled(), &self.analyzer);
        let records: Vec<ArticleRecord> = self.corpus.articles().map(|a| a.record.clone()).collect();
        let reclassified = records.len();
        let mut corpus = Corpus::new(self.corpus.config().clone());
        corpus.ingest(records, &mut taxonomy, &self.analyzer)?;
        self.taxonomy = taxonomy;
        self.lexicon = lexicon;
        self.corpus = corpus;
        let links = self.relink()?;
        self.save()?;
        Ok(LoadSummary {
            nodes: self.taxonomy.len(),
            bootstrap,
            links,
            reclassified,
        })
    }
}

fn install_links(taxonomy: &mut Taxonomy, links: Vec<ProximityLink>) -> Result<()> {
    for provenance in [LinkProvenance::LabelCooccurrence, LinkProvenance::DualIndexing] {
        let subset: Vec<ProximityLink> = links.iter().filter(|l| l.provenance == provenance).cloned().collect();
        taxonomy.replace_links(provenance, subset)?;
    }
    Ok(())
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

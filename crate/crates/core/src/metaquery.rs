//! Meta-query URLs for remote digital libraries.
//!
//! A meta-query is a provider search URL carrying keywords taken from the
//! navigation focus; nothing is fetched.

use std::collections::BTreeSet;
use std::path::Path;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};

use crate::corpus::ArticleRecord;
use crate::error::{Error, Result};
use crate::taxonomy::CcsNode;
use crate::textproc::{Analyzer, Language};

pub const PLACEHOLDER: &str = "{terms}";
pub const DEFAULT_MAX_TERMS: usize = 8;

/// Unreserved URI characters stay literal; everything else is encoded.
const TERM_SET: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

fn default_max_terms() -> usize {
    DEFAULT_MAX_TERMS
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderTemplate {
    pub name: String,
    pub url_template: String,
    pub term_joiner: String,
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
}

impl ProviderTemplate {
    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::Config(format!("provider {:?}: {why}", self.name)));
        if self.name.trim().is_empty() {
            return bad("name is empty");
        }
        if self.url_template.matches(PLACEHOLDER).count() != 1 {
            return bad("url_template must contain exactly one {terms} placeholder");
        }
        if self.term_joiner.is_empty() {
            return bad("term_joiner is empty");
        }
        if self.max_terms == 0 {
            return bad("max_terms must be positive");
        }
        Ok(())
    }

    /// Percent-encode `terms`, join them and substitute into the template.
    pub fn render(&self, terms: &[String]) -> String {
        let encoded: Vec<String> = terms
            .iter()
            .map(|t| utf8_percent_encode(t, TERM_SET).to_string())
            .collect();
        self.url_template
            .replacen(PLACEHOLDER, &encoded.join(&self.term_joiner), 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaQuery {
    pub provider: String,
    pub terms: Vec<String>,
    pub url: String,
}

#[derive(Deserialize)]
struct ProviderFile {
    #[serde(default)]
    fallback: Option<String>,
    #[serde(default)]
    include_added_keywords: bool,
    #[serde(default)]
    provider: Vec<ProviderTemplate>,
}

/// The configured providers, in file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProviderSet {
    providers: Vec<ProviderTemplate>,
    fallback: Option<String>,
    include_added_keywords: bool,
}

impl ProviderSet {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ProviderFile = toml::from_str(text).map_err(|e| Error::Config(format!("provider config: {e}")))?;
        let set = ProviderSet {
            providers: file.provider,
            fallback: file.fallback,
            include_added_keywords: file.include_added_keywords,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        ProviderSet::from_toml(&text)
    }

    pub fn bundled() -> Self {
        ProviderSet::from_toml(crate::bundled::PROVIDERS).expect("bundled provider config is valid")
    }

    fn validate(&self) -> Result<()> {
        if self.providers.is_empty() {
            return Err(Error::Config("no providers configured".into()));
        }
        let mut seen = BTreeSet::new();
        for p in &self.providers {
            p.validate()?;
            if !seen.insert(p.name.as_str()) {
                return Err(Error::Config(format!("provider {:?} is defined twice", p.name)));
            }
        }
        if let Some(f) = &self.fallback {
            if !seen.contains(f.as_str()) {
                return Err(Error::Config(format!("fallback provider {f:?} is not defined")));
            }
        }
        Ok(())
    }

    pub fn providers(&self) -> &[ProviderTemplate] {
        &self.providers
    }

    pub fn fallback(&self) -> Option<&str> {
        self.fallback.as_deref()
    }

    pub fn include_added_keywords(&self) -> bool {
        self.include_added_keywords
    }

    pub fn set_include_added_keywords(&mut self, include: bool) {
        self.include_added_keywords = include;
    }

    pub fn get(&self, name: &str) -> Result<&ProviderTemplate> {
        self.providers
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::Config(format!("unknown provider {name:?}")))
    }

    /// Render `terms` for one provider. Duplicates are dropped and the list is
    /// capped at the provider's `max_terms`.
    pub fn render_metaquery(&self, provider: &str, terms: &[String]) -> Result<MetaQuery> {
        let template = self.get(provider)?;
        let mut seen = BTreeSet::new();
        let terms: Vec<String> = terms
            .iter()
            .map(|t| t.trim())
            .filter(|t| !t.is_empty() && seen.insert(*t))
            .take(template.max_terms)
            .map(str::to_string)
            .collect();
        if terms.is_empty() {
            return Err(Error::Rejected("a meta-query needs at least one term".into()));
        }
        Ok(MetaQuery {
            provider: template.name.clone(),
            url: template.render(&terms),
            terms,
        })
    }

    /// One meta-query per provider other than the fallback, from the node's
    /// English label.
    pub fn node_metaqueries(&self, node: &CcsNode, analyzer: &Analyzer) -> Result<Vec<MetaQuery>> {
        self.providers
            .iter()
            .filter(|p| Some(p.name.as_str()) != self.fallback.as_deref())
            .map(|p| {
                let terms = node_query_terms(node, analyzer, p.max_terms, self.include_added_keywords)?;
                self.render_metaquery(&p.name, &terms)
            })
            .collect()
    }

    /// Search the fallback provider for an article that has no locator, using
    /// its title lemmas and the first author's family name.
    pub fn scholar_fallback(&self, record: &ArticleRecord, analyzer: &Analyzer) -> Result<MetaQuery> {
        if let Some(uri) = &record.uri {
            return Err(Error::Precondition(format!(
                "article {} has a stored locator, use it directly: {uri}",
                record.key
            )));
        }
        let provider = self
            .fallback
            .as_deref()
            .ok_or_else(|| Error::Config("no fallback provider configured".into()))?;
        let max = self.get(provider)?.max_terms;
        let surname = record.authors.first().and_then(|a| family_name(a));
        let room = if surname.is_some() {
            max.saturating_sub(1).max(1)
        } else {
            max
        };
        let mut terms: Vec<String> = analyzer
            .unique_lemmas(&record.title, Language::En)
            .into_iter()
            .take(room)
            .collect();
        terms.extend(surname);
        self.render_metaquery(provider, &terms)
    }
}

/// Label lemmas of `node` in label order, optionally followed by its added
/// keywords, capped at `max_terms`.
pub fn node_query_terms(
    node: &CcsNode,
    analyzer: &Analyzer,
    max_terms: usize,
    include_added: bool,
) -> Result<Vec<String>> {
    let mut terms = analyzer.unique_lemmas(&node.label_en, Language::En);
    if include_added {
        for k in node.added_keywords() {
            if !terms.contains(&k.lemma) {
                terms.push(k.lemma.clone());
            }
        }
    }
    terms.truncate(max_terms);
    if terms.is_empty() {
        return Err(Error::NoQueryableTerms(node.code.to_string()));
    }
    Ok(terms)
}

/// Family name of an author written "First Last" or "Last, First". A trailing
/// DBLP homonym number ("Wei Wang 0001") is ignored.
pub fn family_name(author: &str) -> Option<String> {
    let author = author.trim();
    if let Some((last, _)) = author.split_once(',') {
        let last = last.trim();
        return (!last.is_empty()).then(|| last.to_string());
    }
    author
        .split_whitespace()
        .rev()
        .find(|w| !w.chars().all(|c| c.is_ascii_digit()))
        .map(str::to_string)
}

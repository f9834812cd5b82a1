use std::fmt::Write;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use quick_xml::escape::escape;

use super::StoredArticle;
use crate::lexicon::{DC_NS, RDF_NS};

pub const CCS_NS: &str = "urn:ontonav:ccs#";
pub const ARTICLE_URI_PREFIX: &str = "urn:ontonav:article:";

const KEY_SET: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'_')
    .remove(b'.')
    .remove(b'/')
    .remove(b':');

pub fn article_uri(key: &str) -> String {
    format!("{ARTICLE_URI_PREFIX}{}", utf8_percent_encode(key, KEY_SET))
}

/// RDF/XML description of the stored articles, one `rdf:Description` each,
/// with Dublin Core fields and one `ccs:classifiedAs` per attached node.
pub fn render<'a>(articles: impl IntoIterator<Item = &'a StoredArticle>) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<rdf:RDF xmlns:rdf=\"{RDF_NS}\" xmlns:dc=\"{DC_NS}\" xmlns:ccs=\"{CCS_NS}\">"
    );
    for a in articles {
        let r = &a.record;
        let _ = writeln!(
            out,
            "  <rdf:Description rdf:about=\"{}\">",
            escape(article_uri(&r.key).as_str())
        );
        let _ = writeln!(out, "    <dc:identifier>{}</dc:identifier>", escape(r.key.as_str()));
        let _ = writeln!(out, "    <dc:title>{}</dc:title>", escape(r.title.as_str()));
        if !r.authors.is_empty() {
            out.push_str("    <dc:creator>\n      <rdf:Seq>\n");
            for name in &r.authors {
                let _ = writeln!(out, "        <rdf:li>{}</rdf:li>", escape(name.as_str()));
            }
            out.push_str("      </rdf:Seq>\n    </dc:creator>\n");
        }
        if let Some(year) = r.year {
            let _ = writeln!(out, "    <dc:date>{year}</dc:date>");
        }
        if !r.venue.is_empty() {
            let _ = writeln!(out, "    <dc:source>{}</dc:source>", escape(r.venue.as_str()));
        }
        if let Some(uri) = &r.uri {
            let _ = writeln!(out, "    <dc:relation rdf:resource=\"{}\"/>", escape(uri.as_str()));
        }
        for code in a.placement.codes() {
            let _ = writeln!(
                out,
                "    <ccs:classifiedAs>{}</ccs:classifiedAs>",
                escape(code.as_str())
            );
        }
        out.push_str("  </rdf:Description>\n");
    }
    out.push_str("</rdf:RDF>\n");
    out
}

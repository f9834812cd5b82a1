use std::fmt::Write;

use quick_xml::escape::escape;

use super::Lexicon;
use crate::taxonomy::Taxonomy;

/// Path of the proposal feed relative to the service base URL.
pub const FEED_PATH: &str = "/feeds/proposals";

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RSS_NS: &str = "http://purl.org/rss/1.0/";
pub const DC_NS: &str = "http://purl.org/dc/elements/1.1/";
pub const PROPOSAL_NS: &str = "urn:ontonav:proposal#";

impl Lexicon {
    /// RSS 1.0 (RDF Site Summary) document listing the pending proposals.
    pub fn render_feed(&self, taxonomy: &Taxonomy, base_url: &str) -> String {
        let base = base_url.trim_end_matches('/');
        let channel = format!("{base}{FEED_PATH}");
        let item_uri = |id: u64| format!("{base}/proposals/{id}");
        let pending: Vec<_> = self.pending().collect();

        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<rdf:RDF xmlns:rdf=\"{RDF_NS}\" xmlns=\"{RSS_NS}\" xmlns:dc=\"{DC_NS}\" xmlns:prop=\"{PROPOSAL_NS}\">"
        );
        let _ = writeln!(out, "  <channel rdf:about=\"{}\">", escape(channel.as_str()));
        out.push_str("    <title>Pending translation proposals</title>\n");
        let _ = writeln!(out, "    <link>{}</link>", escape(channel.as_str()));
        out.push_str("    <description>French label proposals awaiting committee review</description>\n");
        out.push_str("    <items>\n      <rdf:Seq>\n");
        for p in &pending {
            let _ = writeln!(
                out,
                "        <rdf:li rdf:resource=\"{}\"/>",
                escape(item_uri(p.id).as_str())
            );
        }
        out.push_str("      </rdf:Seq>\n    </items>\n  </channel>\n");

        for p in &pending {
            let uri = item_uri(p.id);
            let current = taxonomy
                .node(&p.node)
                .and_then(|n| n.label_fr.clone())
                .unwrap_or_default();
            let _ = writeln!(out, "  <item rdf:about=\"{}\">", escape(uri.as_str()));
            let _ = writeln!(
                out,
                "    <title>{}</title>",
                escape(format!("{}: {}", p.node, p.proposed_text).as_str())
            );
            let _ = writeln!(out, "    <link>{}</link>", escape(uri.as_str()));
            let _ = writeln!(
                out,
                "    <description>{}</description>",
                escape(
                    format!(
                        "{} proposal for {} (current label: {}): {}",
                        p.kind, p.node, current, p.proposed_text
                    )
                    .as_str()
                )
            );
            let _ = writeln!(out, "    <dc:subject>{}</dc:subject>", escape(p.node.as_str()));
            let _ = writeln!(out, "    <dc:creator>{}</dc:creator>", escape(p.proposer.as_str()));
            let _ = writeln!(out, "    <dc:date>{}</dc:date>", p.submitted_at.to_rfc3339());
            let _ = writeln!(out, "    <prop:node>{}</prop:node>", escape(p.node.as_str()));
            let _ = writeln!(
                out,
                "    <prop:currentLabel>{}</prop:currentLabel>",
                escape(current.as_str())
            );
            let _ = writeln!(
                out,
                "    <prop:proposedText>{}</prop:proposedText>",
                escape(p.proposed_text.as_str())
            );
            let _ = writeln!(out, "    <prop:kind>{}</prop:kind>", p.kind);
            out.push_str("  </item>\n");
        }
        out.push_str("</rdf:RDF>\n");
        out
    }
}

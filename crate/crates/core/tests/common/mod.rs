//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use quick_xml::events::Event;
use quick_xml::name::ResolveResult;
use quick_xml::NsReader;
use quick_xml::XmlVersion;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ontonav::corpus::ArticleRecord;
use ontonav::taxonomy::{Code, DocumentNode, Taxonomy};
use ontonav::textproc::{Analyzer, Language};

/// Nine labelled nodes under a root. Every label word is its own Porter2 stem.
pub const SMALL_TAXONOMY: &str = r#"[
  {"code": "CS", "label_en": "computer science"},
  {"code": "A", "label_en": "graph network", "parent": "CS"},
  {"code": "A.1", "label_en": "graph search", "parent": "A"},
  {"code": "A.2", "label_en": "network stream", "parent": "A"},
  {"code": "B", "label_en": "text index", "parent": "CS"},
  {"code": "B.1", "label_en": "text search", "parent": "B"},
  {"code": "B.2", "label_en": "index tree", "parent": "B"},
  {"code": "C", "label_en": "robot logic", "parent": "CS"},
  {"code": "C.1", "label_en": "logic proof", "parent": "C"},
  {"code": "C.2", "label_en": "robot sound", "parent": "C"}
]"#;

pub fn small_taxonomy(analyzer: &Analyzer) -> Taxonomy {
    Taxonomy::from_json(SMALL_TAXONOMY, analyzer).expect("fixture taxonomy loads")
}

/// Expected placement of a hand-scored title.
#[derive(Clone, Copy, Debug)]
pub enum Expect {
    /// Best overlap and the nodes attaining it.
    Assigned(usize, &'static [&'static str]),
    /// Best overlap (below 2) and the bin the record lands in.
    Orphan(usize, &'static str),
}

/// Titles scored by hand against [`SMALL_TAXONOMY`] with a threshold of 2.
/// Clusters: A {graph, network}, A.1 {graph, search}, A.2 {network, stream},
/// B {text, index}, B.1 {text, search}, B.2 {index, tree}, C {robot, logic},
/// C.1 {logic, proof}, C.2 {robot, sound}.
pub const HAND_SCORED: [(&str, &str, Expect); 20] = [
    ("t01", "Graph search", Expect::Assigned(2, &["A.1"])),
    (
        "t02",
        "Searching graphs on a network",
        Expect::Assigned(2, &["A", "A.1"]),
    ),
    ("t03", "Network streams", Expect::Assigned(2, &["A.2"])),
    ("t04", "Text index trees", Expect::Assigned(2, &["B", "B.2"])),
    ("t05", "Searching text", Expect::Assigned(2, &["B.1"])),
    (
        "t06",
        "Index trees for text search",
        Expect::Assigned(2, &["B", "B.1", "B.2"]),
    ),
    ("t07", "Robot logic", Expect::Assigned(2, &["C"])),
    ("t08", "Logic proofs", Expect::Assigned(2, &["C.1"])),
    ("t09", "Robot sounds", Expect::Assigned(2, &["C.2"])),
    (
        "t10",
        "Proof search with robot logic",
        Expect::Assigned(2, &["C", "C.1"]),
    ),
    ("t11", "Graph", Expect::Orphan(1, "A.m")),
    ("t12", "Cloud mesh grid", Expect::Orphan(0, "CS.m")),
    ("t13", "Sound streams on the web", Expect::Orphan(1, "A.2.m")),
    ("t14", "Text trees", Expect::Orphan(1, "B.m")),
    ("t15", "Logic for a network of robots", Expect::Assigned(2, &["C"])),
    ("t16", "Graph network streams", Expect::Assigned(2, &["A", "A.2"])),
    ("t17", "A proof", Expect::Orphan(1, "C.1.m")),
    ("t18", "Index", Expect::Orphan(1, "B.m")),
    ("t19", "The web", Expect::Orphan(0, "CS.m")),
    (
        "t20",
        "Graph search in text index trees",
        Expect::Assigned(2, &["A.1", "B", "B.1", "B.2"]),
    ),
];

/// Five titles whose only taxonomy overlap is "graph" (A and A.1, one each),
/// so all land in A's bin. Every pair among {cloud, graph, mesh} is held by
/// all five; the smallest such pair is (cloud, graph), and those two lemmas
/// are tied first in bin frequency, so the branch is A.3 "cloud graph".
pub const ORPHAN_CLUSTER: [(&str, &str); 5] = [
    ("p1", "Graph cloud mesh"),
    ("p2", "Graph cloud mesh grid"),
    ("p3", "Graph cloud mesh web"),
    ("p4", "Graph cloud mesh grid web"),
    ("p5", "Cloud mesh graph"),
];

pub fn record(key: &str, title: &str) -> ArticleRecord {
    ArticleRecord {
        key: key.to_string(),
        entry_type: "article".to_string(),
        title: title.to_string(),
        authors: vec!["Ann Lee".to_string()],
        year: Some(2008),
        venue: "J. Fixtures".to_string(),
        uri: None,
    }
}

// Random BibTeX corpus.

const NAMES: [&str; 12] = [
    "Ann Lee",
    "Jürgen Müller",
    "Roe, Jane",
    "Wei Wang 0001",
    "Zoë Ångström",
    "Pierre Lévy",
    "Ada King",
    "Alan Turing",
    "Grace Hopper",
    "Edsger Dijkstra",
    "Barbara Liskov",
    "Donald Knuth",
];

const NOISE: [&str; 12] = [
    "towards",
    "novel",
    "approach",
    "efficient",
    "scalable",
    "framework",
    "case",
    "study",
    "revisited",
    "fast",
    "robust",
    "adaptive",
];

const FILLER: [&str; 6] = ["a", "the", "of", "for", "and", "on"];

/// Distinct words of the bundled CCS labels, in first-seen order.
pub fn ccs_vocabulary() -> Vec<String> {
    let doc: Vec<DocumentNode> = serde_json::from_str(ontonav::bundled::CCS_DOCUMENT).unwrap();
    let mut seen = BTreeSet::new();
    let mut words = Vec::new();
    for node in doc {
        for w in node.label_en.split(|c: char| !c.is_alphabetic()) {
            let w = w.to_lowercase();
            if w.len() > 2 && seen.insert(w.clone()) {
                words.push(w);
            }
        }
    }
    words
}

pub fn random_title(rng: &mut StdRng, vocab: &[String]) -> String {
    let n = rng.random_range(2..=9);
    let mut words: Vec<String> = Vec::with_capacity(n);
    for _ in 0..n {
        let w = match rng.random_range(0..10) {
            0 => FILLER[rng.random_range(0..FILLER.len())].to_string(),
            1 => NOISE[rng.random_range(0..NOISE.len())].to_string(),
            // Repeat an earlier word now and then to exercise term counts.
            2 if !words.is_empty() => words[rng.random_range(0..words.len())].clone(),
            _ => vocab[rng.random_range(0..vocab.len())].clone(),
        };
        words.push(w);
    }
    let mut title = words.join(" ");
    if let Some(first) = title.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    title
}

/// A BibTeX file of `n` articles written by hand-rolled formatting, with the
/// titles used for each key.
pub fn random_bibtex(seed: u64, n: usize) -> (String, BTreeMap<String, String>) {
    let vocab = ccs_vocabulary();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = String::new();
    let mut titles = BTreeMap::new();
    for i in 0..n {
        let key = format!("rec{i:05}");
        let title = random_title(&mut rng, &vocab);
        let authors: Vec<&str> = (0..rng.random_range(1..=3))
            .map(|_| NAMES[rng.random_range(0..NAMES.len())])
            .collect();
        let _ = writeln!(out, "@article{{{key},");
        let _ = writeln!(out, "  author = {{{}}},", authors.join(" and "));
        let _ = writeln!(out, "  title = {{{title}}},");
        let _ = writeln!(out, "  journal = {{Journal {}}},", rng.random_range(1..20));
        let _ = writeln!(out, "  year = {}", rng.random_range(1970..2010));
        if rng.random_bool(0.5) {
            let _ = writeln!(out, "  ,ee = {{https://doi.org/10.1000/{i}}}");
        }
        let _ = writeln!(out, "}}\n");
        titles.insert(key, title);
    }
    (out, titles)
}

/// Ranked hits by brute force: every title re-analyzed, every query lemma
/// counted, sorted by matched lemmas, then summed frequency, then key.
pub fn linear_scan(
    analyzer: &Analyzer,
    titles: &BTreeMap<String, String>,
    query: &BTreeSet<String>,
) -> Vec<(String, usize, u32)> {
    let mut hits = Vec::new();
    for (key, title) in titles {
        let lemmas = analyzer.lemmas(title, Language::En);
        let mut matched = 0;
        let mut frequency = 0u32;
        for q in query {
            let c = lemmas.iter().filter(|l| *l == q).count() as u32;
            if c > 0 {
                matched += 1;
                frequency += c;
            }
        }
        if matched > 0 {
            hits.push((key.clone(), matched, frequency));
        }
    }
    hits.sort_by(|a, b| b.1.cmp(&a.1).then(b.2.cmp(&a.2)).then(a.0.cmp(&b.0)));
    hits
}

// Hierarchy and co-occurrence oracles.

pub fn parent_map(taxonomy: &Taxonomy) -> BTreeMap<Code, Code> {
    taxonomy
        .to_document()
        .into_iter()
        .filter_map(|d| d.parent.map(|p| (d.code, p)))
        .collect()
}

pub fn ancestor_walk(parents: &BTreeMap<Code, Code>, code: &Code) -> Vec<Code> {
    let mut out = Vec::new();
    let mut cur = code;
    while let Some(p) = parents.get(cur) {
        out.push(p.clone());
        cur = p;
    }
    out
}

pub fn related(parents: &BTreeMap<Code, Code>, a: &Code, b: &Code) -> bool {
    a == b || ancestor_walk(parents, a).contains(b) || ancestor_walk(parents, b).contains(a)
}

/// Enumerate every node pair; weight is the number of lemma pairs both labels
/// hold that at least `min_labels` labels in the whole taxonomy hold.
pub fn cooccurrence_oracle(taxonomy: &Taxonomy, min_labels: usize) -> BTreeMap<(Code, Code), u64> {
    let parents = parent_map(taxonomy);
    let nodes: Vec<(Code, BTreeSet<String>)> = taxonomy
        .nodes()
        .map(|n| {
            (
                n.code.clone(),
                n.native_keywords().into_iter().map(str::to_string).collect(),
            )
        })
        .collect();
    let holders = |p: &str, q: &str| nodes.iter().filter(|(_, s)| s.contains(p) && s.contains(q)).count();
    let mut out = BTreeMap::new();
    for (i, (a, la)) in nodes.iter().enumerate() {
        for (b, lb) in &nodes[i + 1..] {
            if related(&parents, a, b) {
                continue;
            }
            let common: Vec<&String> = la.intersection(lb).collect();
            let mut weight = 0u64;
            for (x, p) in common.iter().enumerate() {
                for q in &common[x + 1..] {
                    if holders(p, q) >= min_labels {
                        weight += 1;
                    }
                }
            }
            if weight > 0 {
                let key = if a < b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                };
                out.insert(key, weight);
            }
        }
    }
    out
}

/// A random taxonomy document of `n` nodes over a small vocabulary, so that
/// labels share lemma pairs often.
pub fn random_taxonomy_doc(seed: u64, n: usize) -> String {
    const WORDS: [&str; 8] = ["graph", "network", "search", "stream", "text", "index", "tree", "logic"];
    let mut rng = StdRng::seed_from_u64(seed);
    let mut nodes = vec![serde_json::json!({"code": "CS", "label_en": "root"})];
    let mut codes = vec!["CS".to_string()];
    let mut child_count: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 1..n {
        let parent = codes[rng.random_range(0..codes.len())].clone();
        let k = child_count.entry(parent.clone()).or_insert(0);
        *k += 1;
        let code = if parent == "CS" {
            format!("N{k}")
        } else {
            format!("{parent}.{k}")
        };
        let words: Vec<&str> = (0..rng.random_range(1..=4))
            .map(|_| WORDS[rng.random_range(0..WORDS.len())])
            .collect();
        nodes.push(serde_json::json!({"code": code, "label_en": words.join(" "), "parent": parent}));
        codes.push(code);
    }
    serde_json::to_string(&nodes).unwrap()
}

// RSS 1.0 structure check.

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RSS_NS: &str = "http://purl.org/rss/1.0/";

#[derive(Debug, Default)]
pub struct RssFeed {
    pub channel_about: String,
    pub channel_title: String,
    pub channel_link: String,
    pub channel_description: String,
    /// `rdf:li/@rdf:resource` of the channel's `items` sequence.
    pub sequence: Vec<String>,
    /// `(rdf:about, title, link)` of each `item`.
    pub items: Vec<(String, String, String)>,
}

/// Parse and check an RSS 1.0 document: `rdf:RDF` root, one `channel` with
/// `rdf:about`, `title`, `link`, `description` and an `items/rdf:Seq`, and
/// `item` elements with `rdf:about`, `title` and `link`, each listed once in
/// the sequence.
pub fn validate_rss1(xml: &str) -> Result<RssFeed, String> {
    let mut reader = NsReader::from_str(xml);
    let mut feed = RssFeed::default();
    let mut stack: Vec<(String, String)> = Vec::new();
    let mut text = String::new();
    let mut channels = 0;
    let mut current_item: Option<(String, String, String)> = None;

    loop {
        let (ns, event) = reader.read_resolved_event().map_err(|e| e.to_string())?;
        let ns = match ns {
            ResolveResult::Bound(n) => n.as_ref().to_string(),
            ResolveResult::Unbound => String::new(),
            ResolveResult::Unknown(p) => return Err(format!("unknown prefix {p:?}")),
        };
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                let local = e.local_name().as_ref().to_string();
                let attr = |name: &str| -> Option<String> {
                    e.attributes().flatten().find_map(|a| {
                        let (ans, local) = reader.resolver().resolve_attribute(a.key);
                        let bound = matches!(ans, ResolveResult::Bound(n) if n.as_ref() == RDF_NS);
                        (bound && local.as_ref() == name).then(|| {
                            a.normalized_value(XmlVersion::Implicit1_0)
                                .map(|v| v.into_owned())
                                .unwrap_or_default()
                        })
                    })
                };
                let depth = stack.len();
                match (depth, ns.as_str(), local.as_str()) {
                    (0, RDF_NS, "RDF") => {}
                    (0, _, _) => return Err(format!("root is {{{ns}}}{local}, not rdf:RDF")),
                    (1, RSS_NS, "channel") => {
                        channels += 1;
                        feed.channel_about = attr("about").ok_or("channel lacks rdf:about")?;
                    }
                    (1, RSS_NS, "item") => {
                        let about = attr("about").ok_or("item lacks rdf:about")?;
                        current_item = Some((about, String::new(), String::new()));
                    }
                    (4, RDF_NS, "li") if stack[2].1 == "items" => {
                        feed.sequence.push(attr("resource").ok_or("rdf:li lacks rdf:resource")?);
                    }
                    _ => {}
                }
                text.clear();
                if !empty {
                    stack.push((ns.clone(), local));
                }
            }
            Event::Text(t) => text.push_str(&t.xml10_content()),
            Event::GeneralRef(r) => {
                if let Some(c) = r.resolve_char_ref().map_err(|e| e.to_string())? {
                    text.push(c);
                    continue;
                }
                let name = r.into_inner().into_owned();
                text.push_str(match name.as_str() {
                    "amp" => "&",
                    "lt" => "<",
                    "gt" => ">",
                    "quot" => "\"",
                    "apos" => "'",
                    other => return Err(format!("undeclared entity &{other};")),
                });
            }
            Event::End(_) => {
                let (ens, local) = stack.pop().ok_or("unbalanced end tag")?;
                let depth = stack.len();
                match (depth, ens.as_str(), local.as_str()) {
                    (2, RSS_NS, field) if stack[1].1 == "channel" => match field {
                        "title" => feed.channel_title = text.trim().to_string(),
                        "link" => feed.channel_link = text.trim().to_string(),
                        "description" => feed.channel_description = text.trim().to_string(),
                        _ => {}
                    },
                    (2, RSS_NS, field) if stack[1].1 == "item" => {
                        let item = current_item.as_mut().ok_or("item field outside item")?;
                        match field {
                            "title" => item.1 = text.trim().to_string(),
                            "link" => item.2 = text.trim().to_string(),
                            _ => {}
                        }
                    }
                    (1, RSS_NS, "item") => {
                        let item = current_item.take().ok_or("item end without start")?;
                        if item.1.is_empty() || item.2.is_empty() {
                            return Err(format!("item {} lacks title or link", item.0));
                        }
                        feed.items.push(item);
                    }
                    _ => {}
                }
                text.clear();
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if channels != 1 {
        return Err(format!("{channels} channel elements"));
    }
    if feed.channel_title.is_empty() || feed.channel_link.is_empty() || feed.channel_description.is_empty() {
        return Err("channel lacks title, link or description".into());
    }
    let listed: BTreeSet<&String> = feed.sequence.iter().collect();
    let present: BTreeSet<&String> = feed.items.iter().map(|i| &i.0).collect();
    if listed.len() != feed.sequence.len() || present.len() != feed.items.len() {
        return Err("duplicate item".into());
    }
    if listed != present {
        return Err("channel sequence and item elements differ".into());
    }
    Ok(feed)
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use ontonav::bundled;
use ontonav::corpus::{self, ArticleRecord, Format};
use ontonav::engine::{Engine, EngineConfig};
use ontonav::textproc::Language;

const BIB: &str = r#"
@inproceedings{conf/sigir/Doe09,
  author = {Jane Doe},
  title = {Information storage and retrieval on the web},
  booktitle = {SIGIR},
  year = {2009}
}
@article{journals/tog/Roe08,
  author = {Kim Roe},
  title = {Picture generation for display algorithms},
  journal = {ACM TOG},
  year = {2008}
}
"#;

fn ontonav(args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ontonav"));
    for (k, _) in std::env::vars() {
        if k.starts_with("ONTONAV_") {
            cmd.env_remove(k);
        }
    }
    cmd.args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = ontonav(args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn h3_query_fr() -> String {
    bundled::table_one()
        .into_iter()
        .find(|r| r.node.as_str() == "H.3")
        .unwrap()
        .query_fr
}

#[test]
fn resolve_prints_code_and_english_label() {
    let q = h3_query_fr();
    assert_eq!(
        ok(&["--lang", "fr", "resolve", &q]),
        "H.3 information storage and retrieval\n"
    );
    assert_eq!(
        ok(&["resolve", "--lang", "fr", &q]),
        "H.3 information storage and retrieval\n"
    );
}

#[test]
fn a_miss_is_not_an_error() {
    let out = ok(&["--lang", "fr", "resolve", "rendu non photorealiste"]);
    assert_eq!(
        out,
        "rendu non photorealiste does not exist in French in the ACM ontology\n"
    );
}

#[test]
fn user_errors_exit_1() {
    for args in [
        &["search", ""][..],
        &["search", "the of and"],
        &["--lang", "de", "resolve", "x"],
        &["--bogus"],
        &["frobnicate"],
        &["export-bibtex"],
        &["metaquery", "Z.9"],
    ] {
        let o = ontonav(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(ontonav(&["--help"]).status.code(), Some(0));
    assert_eq!(ontonav(&["--version"]).status.code(), Some(0));
}

#[test]
fn json_output_matches_the_library() {
    let q = h3_query_fr();
    let out: Value = serde_json::from_str(&ok(&["--format", "json", "--lang", "fr", "resolve", &q])).unwrap();
    let engine = Engine::open(EngineConfig::in_memory()).unwrap();
    let direct = serde_json::to_value(engine.resolve(&q, Language::Fr).unwrap()).unwrap();
    assert_eq!(out, direct);

    let out: Value = serde_json::from_str(&ok(&["--format", "json", "metaquery", "H.3"])).unwrap();
    let direct = serde_json::to_value(engine.node_metaqueries("H.3").unwrap()).unwrap();
    assert_eq!(out, direct);

    let url = ok(&["metaquery", "--provider", "dblp", "--terms", "inform", "retriev"]);
    let direct = engine
        .render_metaquery("dblp", &["inform".into(), "retriev".into()])
        .unwrap();
    assert_eq!(url, format!("{:<8} {}\n", "dblp", direct.url));
}

#[test]
fn bypass_eval_prints_the_mean() {
    assert!(ok(&["eval", "--bypass"]).ends_with("mean relevance: 71\n"));
}

#[test]
fn data_dir_persists_between_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let bib = dir.path().join("in.bib");
    std::fs::write(&bib, BIB).unwrap();
    let bib = bib.to_str().unwrap();

    assert_eq!(
        ok(&["--data-dir", d, "ingest", bib]),
        "inserted 2, updated 0, unchanged 0, skipped 0\n"
    );
    assert_eq!(
        ok(&["--data-dir", d, "ingest", bib]),
        "inserted 0, updated 0, unchanged 2, skipped 0\n"
    );
    for f in [
        "taxonomy.json",
        "links.json",
        "lexicon.json",
        "corpus.jsonl",
        "feeds/proposals.rdf",
    ] {
        assert!(Path::new(d).join(f).exists(), "{f} missing");
    }

    let q = h3_query_fr();
    let found = ok(&["--data-dir", d, "--lang", "fr", "search", &q]);
    assert!(found.starts_with("node H.3 "), "{found}");
    assert!(found.contains("conf/sigir/Doe09"), "{found}");

    let exported = ok(&["--data-dir", d, "export-bibtex", "--node", "H.3"]);
    let (records, _) = corpus::parse_records_str(&exported, Format::Bibtex).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].title, "Information storage and retrieval on the web");

    fn args<'a>(d: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
        [&["--data-dir", d][..], extra].concat()
    }
    let p = ok(&args(
        d,
        &[
            "propose",
            "I.3.3",
            "rendu non-photorealiste",
            "--kind",
            "specification",
            "--proposer",
            "ana",
        ],
    ));
    assert!(p.starts_with("proposal 1 on I.3.3"), "{p}");
    assert!(std::fs::read_to_string(Path::new(d).join("feeds/proposals.rdf"))
        .unwrap()
        .contains("/proposals/1"));
    ok(&args(d, &["vote", "1", "--member", "bo", "--verdict", "approve"]));
    let miss = ok(&args(d, &["--lang", "fr", "resolve", "rendu non photorealiste"]));
    assert!(miss.contains("does not exist"), "{miss}");
    let dup = ontonav(&args(d, &["vote", "1", "--member", "bo", "--verdict", "approve"]));
    assert_eq!(dup.status.code(), Some(1));
    let v = ok(&args(d, &["vote", "1", "--member", "cy", "--verdict", "approve"]));
    assert!(v.starts_with("proposal 1 is accepted"), "{v}");
    assert_eq!(
        ok(&args(d, &["--lang", "fr", "resolve", "rendu non photorealiste"])),
        "I.3.3 picture/image generation\n"
    );

    let feed = ok(&args(d, &["feed"]));
    assert!(!feed.contains("/proposals/1"));
    let pending: Value = serde_json::from_str(&ok(&args(d, &["--format", "json", "feed"]))).unwrap();
    assert_eq!(pending, Value::Array(vec![]));
    let records: Vec<ArticleRecord> =
        serde_json::from_str(&ok(&args(d, &["export-bibtex", "--node", "H.3", "--format", "json"]))).unwrap();
    assert_eq!(records, corpus::parse_records_str(&exported, Format::Bibtex).unwrap().0);
    let snapshot = ok(&args(d, &["snapshot"]));
    assert_eq!(snapshot.matches("<rdf:Description").count(), 2);
}

#[test]
fn in_memory_mutations_warn() {
    let dir = tempfile::tempdir().unwrap();
    let bib = dir.path().join("in.bib");
    std::fs::write(&bib, BIB).unwrap();
    let o = ontonav(&["ingest", bib.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not persisted"));
}

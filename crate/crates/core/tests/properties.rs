mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::sample::select;

use ontonav::corpus::{self, ArticleRecord, Corpus, CorpusConfig, Format};
use ontonav::eval::{mean_relevance, row_relevance};
use ontonav::metaquery::ProviderTemplate;
use ontonav::taxonomy::{Code, LinkProvenance, NodeKind, Taxonomy};
use ontonav::textproc::{Analyzer, Language};

use common::*;

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-zA-Z]{1,12}",
        "[a-zà-ÿ]{1,10}",
        select(vec![
            "the",
            "of",
            "and",
            "de",
            "la",
            "les",
            "Networks",
            "ÉTUDE",
            "l'analyse",
            "non-photorealistic",
            "x86",
            "IEEE",
            "données",
            "œuvre",
        ])
        .prop_map(str::to_string),
    ]
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop_oneof![word(), "[ ,.;:!?()/-]{1,3}".prop_map(|s| s)], 0..12)
        .prop_map(|parts| parts.join(" "))
}

fn language() -> impl Strategy<Value = Language> {
    prop_oneof![Just(Language::En), Just(Language::Fr)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lemmas_are_fixpoints_and_never_stop_words(t in text(), lang in language()) {
        let analyzer = Analyzer::default();
        for lemma in analyzer.lemmas(&t, lang) {
            prop_assert!(!analyzer.is_stop_word(&lemma, lang), "{lemma:?} is a stop word");
            prop_assert_eq!(analyzer.lemmas(&lemma, lang), vec![lemma.clone()]);
        }
    }

    #[test]
    fn lemma_set_is_order_independent(words in prop::collection::vec(word(), 0..10), lang in language()) {
        let analyzer = Analyzer::default();
        let mut reversed = words.clone();
        reversed.reverse();
        prop_assert_eq!(
            analyzer.lemma_set(&words.join(" "), lang),
            analyzer.lemma_set(&reversed.join(" "), lang)
        );
    }
}

#[derive(Clone, Debug)]
enum Growth {
    Branch(usize, String),
    Bin(usize),
}

fn growth() -> impl Strategy<Value = Vec<Growth>> {
    let label = select(vec![
        "graph search",
        "cloud mesh",
        "robot",
        "text index",
        "sound logic",
        "proof",
    ]);
    prop::collection::vec(
        prop_oneof![
            (any::<usize>(), label).prop_map(|(i, l)| Growth::Branch(i, l.to_string())),
            any::<usize>().prop_map(Growth::Bin),
        ],
        1..40,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn growth_keeps_a_rooted_tree(ops in growth()) {
        let analyzer = Analyzer::default();
        let mut taxonomy = small_taxonomy(&analyzer);
        for op in ops {
            let codes: Vec<Code> = taxonomy.nodes().map(|n| n.code.clone()).collect();
            match op {
                Growth::Branch(i, label) => {
                    let parent = &codes[i % codes.len()];
                    let is_bin = taxonomy.get(parent.as_str()).unwrap().kind == NodeKind::Miscellaneous;
                    let made = taxonomy.add_branch(parent.as_str(), &label, &analyzer);
                    prop_assert_eq!(made.is_err(), is_bin);
                }
                Growth::Bin(i) => {
                    let host = &codes[i % codes.len()];
                    let standard = taxonomy.get(host.as_str()).unwrap().kind == NodeKind::Standard;
                    let first = taxonomy.miscellaneous_child(host.as_str(), &analyzer);
                    prop_assert_eq!(first.is_ok(), standard);
                    if let Ok(bin) = first {
                        prop_assert_eq!(taxonomy.miscellaneous_child(host.as_str(), &analyzer).unwrap(), bin);
                    }
                }
            }
        }
        let parents = parent_map(&taxonomy);
        let root = taxonomy.root().clone();
        prop_assert!(!parents.contains_key(&root));
        for node in taxonomy.nodes() {
            let walk = ancestor_walk(&parents, &node.code);
            prop_assert!(walk.len() < taxonomy.len(), "cycle through {}", node.code);
            if node.code != root {
                prop_assert_eq!(walk.last(), Some(&root));
            }
            prop_assert_eq!(taxonomy.ancestors(node.code.as_str()), walk.clone());
            prop_assert_eq!(taxonomy.depth(node.code.as_str()), walk.len());
            for child in &node.children {
                prop_assert_eq!(parents.get(child), Some(&node.code));
            }
            let bins = node.children.iter().filter(|c| taxonomy.get(c.as_str()).unwrap().kind == NodeKind::Miscellaneous).count();
            prop_assert!(bins <= 1, "{} has {bins} bins", node.code);
        }
        let reloaded = Taxonomy::from_json(&taxonomy.to_json(), &analyzer).unwrap();
        prop_assert_eq!(reloaded.to_json(), taxonomy.to_json());
    }

    #[test]
    fn links_are_symmetric_and_reject_related_pairs(
        pairs in prop::collection::vec((any::<usize>(), any::<usize>(), 1u64..5, any::<bool>()), 1..30)
    ) {
        let analyzer = Analyzer::default();
        let mut taxonomy = small_taxonomy(&analyzer);
        let codes: Vec<Code> = taxonomy.nodes().map(|n| n.code.clone()).collect();
        let parents = parent_map(&taxonomy);
        let mut expected: BTreeMap<(Code, Code, bool), u64> = BTreeMap::new();
        for (i, j, w, dual) in pairs {
            let (a, b) = (&codes[i % codes.len()], &codes[j % codes.len()]);
            let provenance = if dual { LinkProvenance::DualIndexing } else { LinkProvenance::LabelCooccurrence };
            let got = taxonomy.add_proximity_link(a.as_str(), b.as_str(), w, provenance);
            prop_assert_eq!(got.is_err(), related(&parents, a, b), "{} - {}", a, b);
            if got.is_ok() {
                let key = if a < b { (a.clone(), b.clone(), dual) } else { (b.clone(), a.clone(), dual) };
                *expected.entry(key).or_insert(0) += w;
            }
        }
        let stored: BTreeMap<(Code, Code, bool), u64> = taxonomy
            .links()
            .map(|l| ((l.node_a, l.node_b, l.provenance == LinkProvenance::DualIndexing), l.weight))
            .collect();
        prop_assert_eq!(&stored, &expected);
        for ((a, b, dual), w) in &expected {
            let provenance = if *dual { LinkProvenance::DualIndexing } else { LinkProvenance::LabelCooccurrence };
            let seen = |from: &Code, to: &Code| {
                taxonomy.neighbors(from.as_str()).into_iter().any(|n| &n.code == to && n.provenance == provenance && n.weight == *w)
            };
            prop_assert!(seen(a, b) && seen(b, a), "{} - {} not symmetric", a, b);
        }
    }
}

fn field() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            word(),
            select(vec![
                "{x}", "\\", "$n$", "~", "&", "%", "#", "_", "\"q\"", "C++", "{", "}"
            ])
            .prop_map(str::to_string)
        ],
        1..8,
    )
    .prop_map(|w| w.join(" "))
}

fn author() -> impl Strategy<Value = String> {
    ("[A-Z][a-zé]{1,8}", "[A-Z][a-z]{1,10}", any::<bool>()).prop_map(|(given, family, and)| {
        if and {
            format!("{given} and {family}")
        } else {
            format!("{given} {family}")
        }
    })
}

fn article_record() -> impl Strategy<Value = ArticleRecord> {
    (
        "[a-z]{1,6}/[A-Za-z0-9]{1,8}",
        select(vec!["article", "inproceedings", "book", "misc"]),
        field(),
        prop::collection::vec(author(), 0..4),
        prop::option::of(1950i32..2030),
        prop_oneof![Just(String::new()), field()],
        prop::option::of("https://doi\\.org/10\\.[0-9]{4}/[a-z0-9.~%_-]{1,12}"),
    )
        .prop_map(|(key, entry_type, title, authors, year, venue, uri)| ArticleRecord {
            key,
            entry_type: entry_type.to_string(),
            title,
            authors,
            year,
            venue,
            uri,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bibtex_round_trip(records in prop::collection::btree_map("[a-z]{1,4}[0-9]{1,3}", article_record(), 1..6)) {
        let records: Vec<ArticleRecord> = records
            .into_iter()
            .map(|(prefix, r)| ArticleRecord { key: format!("{prefix}/{}", r.key), ..r })
            .collect();
        let bib = corpus::records_to_bibtex(&records);
        let (back, report) = corpus::parse_records_str(&bib, Format::Bibtex).unwrap();
        prop_assert!(report.skipped.is_empty(), "{:?}\n{}", report.skipped, bib);
        prop_assert_eq!(back, records, "{}", bib);
    }

    #[test]
    fn index_matches_linear_scan(seed in any::<u64>(), n in 1usize..60, query in prop::collection::vec(0usize..1000, 1..4)) {
        use rand::{rngs::StdRng, SeedableRng};
        let analyzer = Analyzer::default();
        let vocab = ccs_vocabulary();
        let mut rng = StdRng::seed_from_u64(seed);
        let titles: BTreeMap<String, String> =
            (0..n).map(|i| (format!("k{i:03}"), random_title(&mut rng, &vocab))).collect();
        let mut taxonomy = small_taxonomy(&analyzer);
        let mut corpus = Corpus::new(CorpusConfig::default());
        corpus
            .ingest(titles.iter().map(|(k, t)| record(k, t)).collect::<Vec<_>>(), &mut taxonomy, &analyzer)
            .unwrap();
        let words: Vec<&str> = query.iter().map(|i| vocab[i % vocab.len()].as_str()).collect();
        let lemmas = analyzer.lemma_set(&words.join(" "), Language::En);
        let indexed: Vec<(String, usize, u32)> = corpus
            .search_lemmas(&lemmas)
            .into_iter()
            .map(|h| (h.article.record.key, h.matched, h.frequency))
            .collect();
        prop_assert_eq!(indexed, linear_scan(&analyzer, &titles, &lemmas));
    }

    #[test]
    fn metaquery_urls_decode_to_their_terms(
        terms in prop::collection::vec("[a-zà-ÿ0-9&+=#%/?'\"-]{1,10}", 1..6),
        joiner in select(vec!["+", " ", "%20"]),
    ) {
        let provider = ProviderTemplate {
            name: "p".into(),
            url_template: "https://example.org/search?lang=en&q={terms}&page=1".into(),
            term_joiner: joiner.to_string(),
            max_terms: 8,
        };
        provider.validate().unwrap();
        let url = url::Url::parse(&provider.render(&terms)).unwrap();
        let pairs: Vec<(String, String)> = url.query_pairs().into_owned().collect();
        prop_assert_eq!(pairs.len(), 3, "{}", url);
        prop_assert_eq!(&pairs[0], &("lang".to_string(), "en".to_string()));
        prop_assert_eq!(&pairs[2], &("page".to_string(), "1".to_string()));
        prop_assert_eq!(&pairs[1].0, "q");
        let decoded: Vec<&str> = pairs[1].1.split(' ').collect();
        prop_assert_eq!(decoded, terms.iter().map(String::as_str).collect::<Vec<_>>());
    }

    #[test]
    fn mean_relevance_ignores_order(mut rows in prop::collection::vec(0.0f64..=100.0, 0..20), seed in any::<u64>()) {
        use rand::{rngs::StdRng, seq::SliceRandom, SeedableRng};
        let before = mean_relevance(&rows);
        rows.shuffle(&mut StdRng::seed_from_u64(seed));
        prop_assert_eq!(mean_relevance(&rows), before);
        prop_assert!((0..=100).contains(&before));
    }

    #[test]
    fn mean_relevance_is_monotone(rows in prop::collection::vec(0.0f64..=100.0, 1..20), i in any::<usize>(), bump in 0.0f64..=100.0) {
        let mut raised = rows.clone();
        let i = i % rows.len();
        raised[i] = (raised[i] + bump).min(100.0);
        prop_assert!(mean_relevance(&raised) >= mean_relevance(&rows));
    }

    #[test]
    fn row_relevance_is_bounded_and_monotone(k in 1usize..30, returned in 0usize..40, relevant in 0usize..40) {
        let considered = returned.min(k);
        let relevant = relevant.min(considered);
        let r = row_relevance(relevant, returned, k);
        prop_assert!((0.0..=100.0).contains(&r));
        if relevant < considered {
            prop_assert!(row_relevance(relevant + 1, returned, k) > r);
        }
        if considered > 0 {
            prop_assert_eq!(row_relevance(considered, returned, k), 100.0);
        }
    }
}

#[test]
fn vocabulary_fixture_is_nonempty() {
    let vocab = ccs_vocabulary();
    let unique: BTreeSet<&String> = vocab.iter().collect();
    assert!(vocab.len() > 100);
    assert_eq!(unique.len(), vocab.len());
}

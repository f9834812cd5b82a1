use std::collections::{BTreeMap, BTreeSet};

use crate::taxonomy::{Code, LinkProvenance, ProximityLink, Taxonomy};

/// A lemma pair must occur together in at least this many node labels.
pub const DEFAULT_MIN_LABELS: usize = 2;

/// Label co-occurrence proximity.
///
/// Every unordered lemma pair that appears together in at least `min_labels`
/// node labels links each pair of those nodes that are not hierarchically
/// related. A link's weight is the number of such lemma pairs the two labels
/// share. The result is a fresh set; installing it is the caller's job.
pub fn cooccurrence_links(taxonomy: &Taxonomy, min_labels: usize) -> BTreeSet<ProximityLink> {
    let min_labels = min_labels.max(2);
    let mut holders: BTreeMap<(&str, &str), Vec<&Code>> = BTreeMap::new();
    for node in taxonomy.nodes() {
        let lemmas: Vec<&str> = node.native_keywords().into_iter().collect();
        for (i, p) in lemmas.iter().enumerate() {
            for q in &lemmas[i + 1..] {
                holders.entry((p, q)).or_default().push(&node.code);
            }
        }
    }

    let mut weights: BTreeMap<(&Code, &Code), u64> = BTreeMap::new();
    for nodes in holders.values().filter(|n| n.len() >= min_labels) {
        for (i, x) in nodes.iter().enumerate() {
            for y in &nodes[i + 1..] {
                if taxonomy.hierarchically_related(x.as_str(), y.as_str()) {
                    continue;
                }
                let key = if x <= y { (*x, *y) } else { (*y, *x) };
                *weights.entry(key).or_insert(0) += 1;
            }
        }
    }

    weights
        .into_iter()
        .map(|((a, b), w)| ProximityLink::new(a.clone(), b.clone(), w, LinkProvenance::LabelCooccurrence))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::Analyzer;

    fn taxonomy(doc: &str) -> Taxonomy {
        Taxonomy::from_json(doc, &Analyzer::default()).unwrap()
    }

    #[test]
    fn shared_pair_links_siblings() {
        let t = taxonomy(
            r#"[{"code":"CS","label_en":"computer science"},
                {"code":"E","label_en":"data","parent":"CS"},
                {"code":"E.1","label_en":"data structures","parent":"E"},
                {"code":"X","label_en":"storage","parent":"CS"},
                {"code":"X.1","label_en":"persistent data structures","parent":"X"},
                {"code":"Y","label_en":"zymurgy","parent":"CS"}]"#,
        );
        let links = cooccurrence_links(&t, DEFAULT_MIN_LABELS);
        assert_eq!(links.len(), 1);
        let link = links.iter().next().unwrap();
        assert_eq!((link.node_a.as_str(), link.node_b.as_str()), ("E.1", "X.1"));
        assert_eq!(link.weight, 1);
        assert!(links.iter().all(|l| l.other(&"Y".into()).is_none()));
    }

    #[test]
    fn ancestor_pairs_are_skipped() {
        let t = taxonomy(
            r#"[{"code":"CS","label_en":"computer science"},
                {"code":"E","label_en":"data structures","parent":"CS"},
                {"code":"E.1","label_en":"persistent data structures","parent":"E"}]"#,
        );
        assert!(cooccurrence_links(&t, DEFAULT_MIN_LABELS).is_empty());
    }

    #[test]
    fn single_node_has_no_links() {
        let t = taxonomy(r#"[{"code":"CS","label_en":"computer science"}]"#);
        assert!(cooccurrence_links(&t, DEFAULT_MIN_LABELS).is_empty());
    }

    #[test]
    fn higher_threshold_prunes() {
        let t = taxonomy(
            r#"[{"code":"CS","label_en":"computer science"},
                {"code":"A","label_en":"data structures","parent":"CS"},
                {"code":"B","label_en":"data structures again","parent":"CS"}]"#,
        );
        assert_eq!(cooccurrence_links(&t, 2).len(), 1);
        assert!(cooccurrence_links(&t, 3).is_empty());
    }
}

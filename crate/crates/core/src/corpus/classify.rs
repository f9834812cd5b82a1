use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::taxonomy::{Code, Taxonomy};

/// Minimum title/cluster overlap for a standard assignment.
pub const DEFAULT_TAU: usize = 2;
/// Minimum orphan group size that turns into a new branch.
pub const DEFAULT_PROMOTION_MIN_MEMBERS: usize = 5;
/// Lemmas a promotion group must have in common; also the label length.
pub const PROMOTION_SHARED_LEMMAS: usize = 2;

/// Where a stored article currently lives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Placement {
    Assigned { nodes: BTreeSet<Code> },
    Orphan { bin: Code },
}

impl Placement {
    pub fn assigned_nodes(&self) -> Option<&BTreeSet<Code>> {
        match self {
            Placement::Assigned { nodes } => Some(nodes),
            Placement::Orphan { .. } => None,
        }
    }

    pub fn orphan_bin(&self) -> Option<&Code> {
        match self {
            Placement::Orphan { bin } => Some(bin),
            Placement::Assigned { .. } => None,
        }
    }

    /// Every node the article is attached to, bin included.
    pub fn codes(&self) -> Vec<&Code> {
        match self {
            Placement::Assigned { nodes } => nodes.iter().collect(),
            Placement::Orphan { bin } => vec![bin],
        }
    }
}

/// Outcome of scoring a title against the taxonomy, before any bin exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Assigned {
        nodes: BTreeSet<Code>,
        score: usize,
    },
    /// Below threshold; `host` is the standard node whose bin receives it.
    Orphan {
        host: Code,
        best_score: usize,
    },
}

/// Overlap of `lemmas` with every standard node's cluster, root excluded.
/// Only non-zero scores are returned.
pub fn score_nodes(taxonomy: &Taxonomy, lemmas: &BTreeSet<String>) -> BTreeMap<Code, usize> {
    taxonomy
        .standard_nodes()
        .filter(|n| &n.code != taxonomy.root())
        .filter_map(|n| {
            let score = n.keywords.keys().filter(|k| lemmas.contains(*k)).count();
            (score > 0).then(|| (n.code.clone(), score))
        })
        .collect()
}

pub fn classify(taxonomy: &Taxonomy, lemmas: &BTreeSet<String>, tau: usize) -> Classification {
    let scores = score_nodes(taxonomy, lemmas);
    let best = scores.values().copied().max().unwrap_or(0);
    if best == 0 {
        return Classification::Orphan {
            host: taxonomy.root().clone(),
            best_score: 0,
        };
    }
    let top = scores.into_iter().filter(|(_, s)| *s == best).map(|(c, _)| c);
    if best >= tau.max(1) {
        Classification::Assigned {
            nodes: top.collect(),
            score: best,
        }
    } else {
        Classification::Orphan {
            host: top.min().expect("best score is attained"),
            best_score: best,
        }
    }
}

/// A set of orphans that share enough lemmas to found a branch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromotionGroup {
    pub members: BTreeSet<String>,
    /// Lemmas common to every member.
    pub shared: BTreeSet<String>,
    /// The two shared lemmas naming the branch, most frequent in the bin first.
    pub label_lemmas: Vec<String>,
}

/// Greedy grouping of one bin's members: repeatedly take the lemma pair held
/// by the most remaining members (smallest pair on ties) while that support
/// reaches `min_members`.
pub fn plan_promotions(members: &BTreeMap<String, BTreeSet<String>>, min_members: usize) -> Vec<PromotionGroup> {
    let min_members = min_members.max(1);
    let mut bin_frequency: BTreeMap<&str, usize> = BTreeMap::new();
    for lemmas in members.values() {
        for l in lemmas {
            *bin_frequency.entry(l).or_insert(0) += 1;
        }
    }

    let mut remaining: BTreeSet<&String> = members.keys().collect();
    let mut groups = Vec::new();
    loop {
        let mut support: BTreeMap<(&str, &str), BTreeSet<&String>> = BTreeMap::new();
        for key in &remaining {
            let lemmas: Vec<&str> = members[*key].iter().map(String::as_str).collect();
            for (i, a) in lemmas.iter().enumerate() {
                for b in &lemmas[i + 1..] {
                    support.entry((a, b)).or_default().insert(key);
                }
            }
        }
        let best = support
            .into_iter()
            .filter(|(_, holders)| holders.len() >= min_members)
            .fold(None::<((&str, &str), BTreeSet<&String>)>, |acc, cand| match acc {
                Some(cur) if cur.1.len() >= cand.1.len() => Some(cur),
                _ => Some(cand),
            });
        let Some((_, holders)) = best else { break };

        let mut shared: Option<BTreeSet<String>> = None;
        for key in &holders {
            let lemmas = &members[*key];
            shared = Some(match shared {
                None => lemmas.clone(),
                Some(s) => s.intersection(lemmas).cloned().collect(),
            });
        }
        let shared = shared.unwrap_or_default();
        let mut ranked: Vec<&String> = shared.iter().collect();
        ranked.sort_by(|a, b| {
            bin_frequency[a.as_str()]
                .cmp(&bin_frequency[b.as_str()])
                .reverse()
                .then_with(|| a.cmp(b))
        });
        let label_lemmas = ranked.into_iter().take(PROMOTION_SHARED_LEMMAS).cloned().collect();
        for key in &holders {
            remaining.remove(*key);
        }
        groups.push(PromotionGroup {
            members: holders.into_iter().cloned().collect(),
            shared,
            label_lemmas,
        });
    }
    groups
}

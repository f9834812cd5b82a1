use std::fmt;

use rust_stemmers::{Algorithm, Stemmer as SnowballStemmer};
use serde::{Deserialize, Serialize};

/// Iteration bound for fixpoint stemming. Every stemmer here is
/// length-non-increasing, so real inputs settle within two or three rounds.
const MAX_ROUNDS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StemmerKind {
    /// Snowball English (Porter2).
    Porter2,
    /// Snowball French.
    SnowballFrench,
    FrenchLight,
    Identity,
}

pub(crate) struct Stemmer {
    kind: StemmerKind,
    snowball: Option<SnowballStemmer>,
}

impl Stemmer {
    pub(crate) fn new(kind: StemmerKind) -> Self {
        let snowball = match kind {
            StemmerKind::Porter2 => Some(SnowballStemmer::create(Algorithm::English)),
            StemmerKind::SnowballFrench => Some(SnowballStemmer::create(Algorithm::French)),
            StemmerKind::FrenchLight | StemmerKind::Identity => None,
        };
        Stemmer { kind, snowball }
    }

    pub(crate) fn kind(&self) -> StemmerKind {
        self.kind
    }

    fn stem_once(&self, word: &str) -> String {
        match (&self.snowball, self.kind) {
            (Some(s), _) => s.stem(word).into_owned(),
            (None, StemmerKind::FrenchLight) => FrenchLightStemmer::stem(word),
            _ => word.to_string(),
        }
    }

    /// Repeat stemming until the output is stable, so that the result is
    /// idempotent even where the underlying algorithm is not.
    pub(crate) fn stem_to_fixpoint(&self, word: &str) -> String {
        let mut current = word.to_string();
        for _ in 0..MAX_ROUNDS {
            let next = self.stem_once(&current);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }
}

impl fmt::Debug for Stemmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Stemmer({:?})", self.kind)
    }
}

/// Light French suffix stripper over accent-folded input: plural removal
/// followed by at most one derivational or inflectional ending.
pub struct FrenchLightStemmer;

impl FrenchLightStemmer {
    const ENDINGS: &'static [&'static str] = &[
        "issements",
        "issement",
        "ements",
        "ement",
        "ations",
        "ation",
        "itions",
        "ition",
        "iques",
        "ique",
        "istes",
        "iste",
        "ismes",
        "isme",
        "euses",
        "euse",
        "eurs",
        "eur",
        "ives",
        "ive",
        "ees",
        "ee",
        "ifs",
        "if",
        "er",
        "e",
    ];
    const MIN_STEM: usize = 4;

    pub fn stem(word: &str) -> String {
        let chars = word.chars().count();
        if chars <= 3 {
            return word.to_string();
        }
        let mut w = word.to_string();
        if w.ends_with("aux") && chars > 4 {
            w.truncate(w.len() - 3);
            w.push_str("al");
        } else if w.ends_with('s') || w.ends_with('x') {
            w.pop();
        }
        for ending in Self::ENDINGS {
            if let Some(stem) = w.strip_suffix(ending) {
                if stem.chars().count() >= Self::MIN_STEM {
                    w.truncate(stem.len());
                    break;
                }
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn french_light_examples() {
        assert_eq!(FrenchLightStemmer::stem("stockage"), "stockag");
        assert_eq!(FrenchLightStemmer::stem("informations"), "inform");
        assert_eq!(FrenchLightStemmer::stem("chevaux"), "cheval");
        assert_eq!(FrenchLightStemmer::stem("numeriques"), "numer");
        assert_eq!(FrenchLightStemmer::stem("les"), "les");
    }

    #[test]
    fn fixpoint_is_idempotent_for_porter2() {
        let s = Stemmer::new(StemmerKind::Porter2);
        for w in ["databases", "generalizations", "abilities", "relational"] {
            let once = s.stem_to_fixpoint(w);
            assert_eq!(s.stem_to_fixpoint(&once), once, "{w}");
        }
    }

    #[test]
    fn identity_leaves_words_alone() {
        let s = Stemmer::new(StemmerKind::Identity);
        assert_eq!(s.stem_to_fixpoint("structures"), "structures");
    }
}

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::textproc::{fold, Language};

const TABLE_ONE: &str = include_str!("../../data/translations_fr.json");

/// Machine-translation adapter used to bootstrap French labels.
pub trait Translator {
    fn name(&self) -> &str;

    fn translate(&self, text: &str, from: Language, to: Language) -> Result<String>;
}

/// Offline translator backed by a lookup table, optionally passing unknown
/// labels through unchanged.
#[derive(Clone, Debug, Default)]
pub struct FixtureTranslator {
    table: HashMap<String, String>,
    passthrough: bool,
}

impl FixtureTranslator {
    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: Into<String>,
    {
        FixtureTranslator {
            table: pairs
                .into_iter()
                .map(|(en, fr)| (fold(en.as_ref().trim()), fr.into()))
                .collect(),
            passthrough: false,
        }
    }

    /// The bundled English→French table with pass-through for unseeded labels.
    pub fn bundled() -> Self {
        let pairs: HashMap<String, String> =
            serde_json::from_str(TABLE_ONE).expect("bundled translation table is valid JSON");
        FixtureTranslator::from_pairs(pairs).with_passthrough(true)
    }

    pub fn with_passthrough(mut self, passthrough: bool) -> Self {
        self.passthrough = passthrough;
        self
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Translator for FixtureTranslator {
    fn name(&self) -> &str {
        "fixture"
    }

    fn translate(&self, text: &str, from: Language, to: Language) -> Result<String> {
        if from == to {
            return Ok(text.to_string());
        }
        if from != Language::En || to != Language::Fr {
            return Err(Error::Translation(format!("fixture table has no {from}->{to} pairs")));
        }
        match self.table.get(&fold(text.trim())) {
            Some(fr) => Ok(fr.clone()),
            None if self.passthrough => Ok(text.to_string()),
            None => Err(Error::Translation(format!("no fixture translation for {text:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_has_fifteen_rows() {
        let t = FixtureTranslator::bundled();
        assert_eq!(t.len(), 15);
        assert_eq!(
            t.translate("memory structures", Language::En, Language::Fr).unwrap(),
            "structures de mémoire"
        );
        assert_eq!(
            t.translate("Memory Structures", Language::En, Language::Fr).unwrap(),
            "structures de mémoire"
        );
        assert_eq!(t.translate("software", Language::En, Language::Fr).unwrap(), "software");
    }

    #[test]
    fn strict_table_fails_on_unknown() {
        let t = FixtureTranslator::from_pairs([("data", "données")]);
        assert!(t.translate("software", Language::En, Language::Fr).is_err());
    }
}

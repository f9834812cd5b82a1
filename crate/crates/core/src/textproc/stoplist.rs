use std::collections::HashSet;

use super::{fold, Language};

const EN_LIST: &str = include_str!("../../data/stoplist_en.txt");
const FR_LIST: &str = include_str!("../../data/stoplist_fr.txt");

#[derive(Clone, Debug)]
pub struct StopList {
    language: Language,
    entries: HashSet<String>,
}

impl StopList {
    /// Parse a stop-list file: one token per line, `#` starts a comment.
    pub fn parse(language: Language, text: &str) -> Self {
        let entries = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|line| !line.is_empty())
            .map(fold)
            .collect();
        StopList { language, entries }
    }

    pub fn builtin(language: Language) -> Self {
        match language {
            Language::En => StopList::parse(language, EN_LIST),
            Language::Fr => StopList::parse(language, FR_LIST),
        }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains(&fold(token))
    }

    pub(crate) fn contains_folded(&self, folded: &str) -> bool {
        self.entries.contains(folded)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_lists_are_sized() {
        let en = StopList::builtin(Language::En);
        let fr = StopList::builtin(Language::Fr);
        assert!((130..=170).contains(&en.len()), "en has {}", en.len());
        assert!((150..=180).contains(&fr.len()), "fr has {}", fr.len());
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let list = StopList::parse(Language::En, "# header\n\nfoo # trailing\n  Bar\n");
        assert_eq!(list.len(), 2);
        assert!(list.contains("FOO"));
        assert!(list.contains("bar"));
        assert!(!list.contains("header"));
    }

    #[test]
    fn french_entries_are_folded() {
        let fr = StopList::builtin(Language::Fr);
        assert!(fr.contains("été"));
        assert!(fr.contains("à"));
        assert!(fr.iter().all(|e| e == fold(e)));
    }
}

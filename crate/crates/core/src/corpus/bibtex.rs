//! BibTeX reader and writer for the field subset the corpus keeps
//! (author, title, year, journal, booktitle, ee, url).

use std::collections::HashMap;
use std::fmt::Write;

use unicode_normalization::UnicodeNormalization;

use super::{ArticleRecord, LineIndex, SkippedEntry, DEFAULT_ENTRY_TYPE};

const KEPT_FIELDS: [&str; 8] = [
    "author",
    "title",
    "year",
    "journal",
    "booktitle",
    "ee",
    "url",
    "crossref",
];

/// Entry types whose venue is written as `booktitle`.
const BOOKTITLE_TYPES: [&str; 3] = ["inproceedings", "incollection", "conference"];

enum Failure {
    /// The entry is syntactically broken; the cursor position is unreliable.
    Syntax(String),
    /// The entry was read to its end but cannot become a record.
    Unsupported(String),
}

struct RawField {
    value: String,
    macro_ref: Option<String>,
    concatenated: bool,
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

pub(crate) fn parse(text: &str) -> (Vec<ArticleRecord>, Vec<SkippedEntry>) {
    let lines = LineIndex::new(text);
    let mut parser = Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
    };
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    while let Some(at) = parser.find_byte(b'@', parser.pos) {
        parser.pos = at;
        let mut key = None;
        match parser.entry(&mut key) {
            Ok(Some(record)) => records.push(record),
            Ok(None) => {}
            Err(failure) => {
                let (line, column) = lines.position(at);
                let reason = match failure {
                    Failure::Syntax(reason) => {
                        parser.pos = parser.resync(at + 1);
                        reason
                    }
                    Failure::Unsupported(reason) => reason,
                };
                skipped.push(SkippedEntry {
                    line,
                    column,
                    key,
                    reason,
                });
            }
        }
    }
    (records, skipped)
}

impl Parser<'_> {
    fn find_byte(&self, b: u8, from: usize) -> Option<usize> {
        self.bytes.get(from..)?.iter().position(|&c| c == b).map(|i| i + from)
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_alphanumeric() || b"_-:.+".contains(&b))
        {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    /// Next `@` that opens a line, after a syntax error.
    fn resync(&self, from: usize) -> usize {
        let mut at = from;
        while let Some(nl) = self.find_byte(b'\n', at) {
            let mut p = nl + 1;
            while self.bytes.get(p).is_some_and(|b| *b == b' ' || *b == b'\t') {
                p += 1;
            }
            if self.bytes.get(p) == Some(&b'@') {
                return p;
            }
            at = nl + 1;
        }
        self.bytes.len()
    }

    /// Content of a `{...}` group starting at the cursor; the cursor ends
    /// after the closing brace. Backslash-escaped braces do not nest.
    fn braced(&mut self) -> Result<&str, Failure> {
        debug_assert_eq!(self.peek(), Some(b'{'));
        let start = self.pos + 1;
        let mut depth = 0usize;
        while let Some(b) = self.peek() {
            match b {
                b'\\' => self.pos += 1,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += 1;
                        return Ok(&self.src[start..self.pos - 1]);
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        Err(Failure::Syntax("unbalanced braces".into()))
    }

    fn quoted(&mut self) -> Result<&str, Failure> {
        let start = self.pos + 1;
        self.pos += 1;
        let mut depth = 0usize;
        while let Some(b) = self.peek() {
            match b {
                b'\\' => self.pos += 1,
                b'{' => depth += 1,
                b'}' => depth = depth.saturating_sub(1),
                b'"' if depth == 0 => {
                    self.pos += 1;
                    return Ok(&self.src[start..self.pos - 1]);
                }
                _ => {}
            }
            self.pos += 1;
        }
        Err(Failure::Syntax("unterminated quoted value".into()))
    }

    /// Skip the body of an entry opened at the cursor.
    fn skip_body(&mut self, close: u8) -> Result<(), Failure> {
        if close == b'}' {
            return self.braced().map(|_| ());
        }
        let mut depth = 0usize;
        while let Some(b) = self.peek() {
            self.pos += 1;
            match b {
                b'{' => depth += 1,
                b'}' => depth = depth.saturating_sub(1),
                b')' if depth == 0 => return Ok(()),
                _ => {}
            }
        }
        Err(Failure::Syntax("unterminated entry".into()))
    }

    fn value(&mut self) -> Result<RawField, Failure> {
        let mut field = RawField {
            value: String::new(),
            macro_ref: None,
            concatenated: false,
        };
        loop {
            match self.peek() {
                Some(b'{') => {
                    let v = self.braced()?;
                    field.value.push_str(v);
                }
                Some(b'"') => {
                    let v = self.quoted()?;
                    field.value.push_str(v);
                }
                Some(b) if b.is_ascii_digit() => {
                    let v = self.ident();
                    field.value.push_str(v);
                }
                Some(b) if b.is_ascii_alphabetic() => {
                    let name = self.ident().to_string();
                    field.macro_ref.get_or_insert(name);
                }
                _ => return Err(Failure::Syntax("expected a field value".into())),
            }
            self.skip_ws();
            if self.peek() == Some(b'#') {
                field.concatenated = true;
                self.pos += 1;
                self.skip_ws();
            } else {
                return Ok(field);
            }
        }
    }

    fn entry(&mut self, key_out: &mut Option<String>) -> Result<Option<ArticleRecord>, Failure> {
        self.pos += 1;
        let entry_type = self.ident().to_ascii_lowercase();
        if entry_type.is_empty() {
            return Err(Failure::Syntax("expected an entry type after '@'".into()));
        }
        self.skip_ws();
        let close = match self.peek() {
            Some(b'{') => b'}',
            Some(b'(') => b')',
            _ => return Err(Failure::Syntax(format!("expected '{{' after @{entry_type}"))),
        };
        match entry_type.as_str() {
            "comment" | "preamble" => return self.skip_body(close).map(|_| None),
            "string" => {
                self.skip_body(close)?;
                return Err(Failure::Unsupported(
                    "@string macro definitions are not supported".into(),
                ));
            }
            _ => {}
        }
        self.pos += 1;
        self.skip_ws();
        let key_start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b != b',' && b != close && !b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
        let key = self.src[key_start..self.pos].to_string();
        if key.is_empty() {
            return Err(Failure::Syntax("missing citation key".into()));
        }
        *key_out = Some(key.clone());
        self.skip_ws();

        let mut fields: HashMap<String, RawField> = HashMap::new();
        loop {
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    self.skip_ws();
                }
                Some(b) if b == close => {
                    self.pos += 1;
                    break;
                }
                None => return Err(Failure::Syntax("unterminated entry".into())),
                _ => return Err(Failure::Syntax("expected ',' between fields".into())),
            }
            if self.peek() == Some(close) {
                self.pos += 1;
                break;
            }
            let name = self.ident().to_ascii_lowercase();
            if name.is_empty() {
                return Err(Failure::Syntax("expected a field name".into()));
            }
            self.skip_ws();
            if self.peek() != Some(b'=') {
                return Err(Failure::Syntax(format!("expected '=' after field {name}")));
            }
            self.pos += 1;
            self.skip_ws();
            let value = self.value()?;
            if KEPT_FIELDS.contains(&name.as_str()) {
                fields.entry(name).or_insert(value);
            }
        }
        build_record(key, entry_type, fields).map(Some)
    }
}

fn build_record(
    key: String,
    entry_type: String,
    mut fields: HashMap<String, RawField>,
) -> Result<ArticleRecord, Failure> {
    if fields.contains_key("crossref") {
        return Err(Failure::Unsupported("crossref is not supported".into()));
    }
    let mut names: Vec<&String> = fields.keys().collect();
    names.sort();
    for name in names {
        let field = &fields[name];
        if let Some(m) = &field.macro_ref {
            return Err(Failure::Unsupported(format!(
                "field {name} uses string macro `{m}`, which is not supported"
            )));
        }
        if field.concatenated {
            return Err(Failure::Unsupported(format!(
                "field {name} uses '#' concatenation, which is not supported"
            )));
        }
    }
    let mut take = |name: &str| fields.remove(name).map(|f| f.value);
    let title = take("title").map(|t| decode_latex(&t)).unwrap_or_default();
    if title.is_empty() {
        return Err(Failure::Unsupported("missing title field".into()));
    }
    let year = match take("year").map(|y| decode_latex(&y)) {
        None => None,
        Some(y) if y.is_empty() => None,
        Some(y) => Some(
            y.parse::<i32>()
                .map_err(|_| Failure::Unsupported(format!("year {y:?} is not an integer")))?,
        ),
    };
    let authors = take("author")
        .map(|a| {
            split_authors(&a)
                .iter()
                .map(|n| decode_latex(n))
                .filter(|n| !n.is_empty())
                .collect()
        })
        .unwrap_or_default();
    let venue = take("journal")
        .or_else(|| take("booktitle"))
        .map(|v| decode_latex(&v))
        .unwrap_or_default();
    let uri = take("ee")
        .or_else(|| take("url"))
        .map(|u| decode_verbatim(&u))
        .filter(|u| !u.is_empty());
    Ok(ArticleRecord {
        key,
        entry_type,
        title,
        authors,
        year,
        venue,
        uri,
    })
}

/// Split an author list on top-level `and`.
fn split_authors(raw: &str) -> Vec<&str> {
    let bytes = raw.as_bytes();
    let mut names = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 1,
            b'{' => depth += 1,
            b'}' => depth = depth.saturating_sub(1),
            c if depth == 0 && c.is_ascii_whitespace() => {
                let word = i + 1;
                if bytes.len() >= word + 4
                    && bytes[word..word + 3].eq_ignore_ascii_case(b"and")
                    && bytes[word + 3].is_ascii_whitespace()
                {
                    names.push(&raw[start..i]);
                    start = word + 4;
                    i = start;
                    continue;
                }
            }
            _ => {}
        }
        i += 1;
    }
    names.push(&raw[start..]);
    names.into_iter().map(str::trim).filter(|n| !n.is_empty()).collect()
}

/// Locators keep `~` and `%` literally; only backslash escapes and grouping
/// braces are interpreted.
fn decode_verbatim(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => out.extend(chars.next()),
            '{' | '}' => {}
            _ => out.push(c),
        }
    }
    out.trim().to_string()
}

fn escape_verbatim(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if matches!(c, '\\' | '{' | '}') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn combining_mark(accent: &str) -> Option<char> {
    Some(match accent {
        "'" => '\u{301}',
        "`" => '\u{300}',
        "^" => '\u{302}',
        "\"" => '\u{308}',
        "~" => '\u{303}',
        "=" => '\u{304}',
        "." => '\u{307}',
        "c" => '\u{327}',
        "v" => '\u{30C}',
        "u" => '\u{306}',
        "H" => '\u{30B}',
        "k" => '\u{328}',
        "r" => '\u{30A}',
        "d" => '\u{323}',
        "b" => '\u{331}',
        _ => return None,
    })
}

fn named_symbol(name: &str) -> Option<&'static str> {
    Some(match name {
        "ss" => "ß",
        "o" => "ø",
        "O" => "Ø",
        "ae" => "æ",
        "AE" => "Æ",
        "oe" => "œ",
        "OE" => "Œ",
        "aa" => "å",
        "AA" => "Å",
        "l" => "ł",
        "L" => "Ł",
        "i" => "ı",
        "j" => "ȷ",
        "textbackslash" => "\\",
        "textasciitilde" => "~",
        "textasciicircum" => "^",
        "textunderscore" => "_",
        "textendash" => "–",
        "textemdash" => "—",
        _ => return None,
    })
}

/// Decode the LaTeX markup that shows up in bibliographic fields into plain
/// Unicode, dropping grouping braces and collapsing whitespace.
pub(crate) fn decode_latex(raw: &str) -> String {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = String::with_capacity(raw.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        i += 1;
        match c {
            '{' | '}' | '$' => {}
            '~' => out.push(' '),
            '\\' => {
                let Some(&next) = chars.get(i) else { break };
                if next.is_ascii_alphabetic() {
                    let start = i;
                    while chars.get(i).is_some_and(char::is_ascii_alphabetic) {
                        i += 1;
                    }
                    let name: String = chars[start..i].iter().collect();
                    while chars.get(i).is_some_and(|c| *c == ' ') {
                        i += 1;
                    }
                    if let Some(mark) = combining_mark(&name) {
                        i = push_accented(&chars, i, mark, &mut out);
                    } else if let Some(sym) = named_symbol(&name) {
                        out.push_str(sym);
                    }
                } else {
                    i += 1;
                    let name = next.to_string();
                    if let Some(mark) = combining_mark(&name) {
                        i = push_accented(&chars, i, mark, &mut out);
                    } else if next != '-' {
                        out.push(if next == '\\' { ' ' } else { next });
                    }
                }
            }
            _ => out.push(c),
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ").nfc().collect()
}

/// Apply an accent to the argument at `i`; returns the index after it.
fn push_accented(chars: &[char], mut i: usize, mark: char, out: &mut String) -> usize {
    let mut base = String::new();
    if chars.get(i) == Some(&'{') {
        let mut depth = 0;
        let start = i + 1;
        while i < chars.len() {
            match chars[i] {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                _ => {}
            }
            i += 1;
        }
        let inner: String = chars[start..i.min(chars.len())].iter().collect();
        i += 1;
        base = decode_latex(&inner);
    } else if chars.get(i) == Some(&'\\') {
        let start = i + 1;
        i += 1;
        while chars.get(i).is_some_and(char::is_ascii_alphabetic) {
            i += 1;
        }
        let name: String = chars[start..i].iter().collect();
        while chars.get(i).is_some_and(|c| *c == ' ') {
            i += 1;
        }
        base.push_str(match name.as_str() {
            "i" => "i",
            "j" => "j",
            other => named_symbol(other).unwrap_or(""),
        });
    } else if let Some(&c) = chars.get(i) {
        base.push(c);
        i += 1;
    }
    let mut it = base.chars();
    match it.next() {
        Some(first) => {
            out.push(first);
            out.push(mark);
            out.extend(it);
        }
        None => out.push(spacing_accent(mark)),
    }
    i
}

fn spacing_accent(mark: char) -> char {
    match mark {
        '\u{301}' => '\'',
        '\u{300}' => '`',
        '\u{302}' => '^',
        '\u{308}' => '"',
        '\u{303}' => '~',
        _ => ' ',
    }
}

fn escape_value(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '{' => out.push_str("\\{"),
            '}' => out.push_str("\\}"),
            '$' => out.push_str("\\$"),
            '~' => out.push_str("\\textasciitilde{}"),
            _ => out.push(c),
        }
    }
    out
}

fn escape_author(name: &str) -> String {
    let escaped = escape_value(name);
    let has_and = name.split_whitespace().any(|w| w.eq_ignore_ascii_case("and"));
    if has_and {
        format!("{{{escaped}}}")
    } else {
        escaped
    }
}

/// Render one BibTeX entry. Values are written in braces with LaTeX-special
/// characters escaped, so [`parse`] reads back the same fields.
pub(crate) fn write_entry(out: &mut String, record: &ArticleRecord) {
    let entry_type = if record.entry_type.is_empty() {
        DEFAULT_ENTRY_TYPE
    } else {
        record.entry_type.as_str()
    };
    let _ = writeln!(out, "@{entry_type}{{{},", record.key);
    if !record.authors.is_empty() {
        let authors: Vec<String> = record.authors.iter().map(|a| escape_author(a)).collect();
        let _ = writeln!(out, "  author = {{{}}},", authors.join(" and "));
    }
    let _ = writeln!(out, "  title = {{{}}},", escape_value(&record.title));
    if !record.venue.is_empty() {
        let field = if BOOKTITLE_TYPES.contains(&entry_type) {
            "booktitle"
        } else {
            "journal"
        };
        let _ = writeln!(out, "  {field} = {{{}}},", escape_value(&record.venue));
    }
    if let Some(year) = record.year {
        let _ = writeln!(out, "  year = {{{year}}},");
    }
    if let Some(uri) = &record.uri {
        let _ = writeln!(out, "  ee = {{{}}},", escape_verbatim(uri));
    }
    out.push_str("}\n");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(text: &str) -> ArticleRecord {
        let (records, skipped) = parse(text);
        assert!(skipped.is_empty(), "{skipped:?}");
        assert_eq!(records.len(), 1);
        records.into_iter().next().unwrap()
    }

    #[test]
    fn reads_a_plain_entry() {
        let r = one(
            "@article{DBLP:journals/x/Lee08,\n  author = {Ann Lee and Bo Chen},\n  title = {Managing taxonomies in relational databases},\n  journal = {J. Data},\n  year = 2008,\n  ee = {https://doi.org/10.1/x}\n}\n",
        );
        assert_eq!(r.key, "DBLP:journals/x/Lee08");
        assert_eq!(r.title, "Managing taxonomies in relational databases");
        assert_eq!(r.authors, ["Ann Lee", "Bo Chen"]);
        assert_eq!(r.year, Some(2008));
        assert_eq!(r.venue, "J. Data");
        assert_eq!(r.uri.as_deref(), Some("https://doi.org/10.1/x"));
    }

    #[test]
    fn quoted_values_and_parentheses() {
        let r = one("@inproceedings(k1, title = \"A {GPU} study\", booktitle = \"Proc. X\")");
        assert_eq!(r.title, "A GPU study");
        assert_eq!(r.venue, "Proc. X");
        assert_eq!(r.entry_type, "inproceedings");
    }

    #[test]
    fn latex_accents_decode() {
        assert_eq!(decode_latex(r#"Fran{\c c}ois M\"{u}ller"#), "François Müller");
        assert_eq!(decode_latex(r#"{\'E}cole d'{\'{e}}t{\'e}"#), "École d'été");
        assert_eq!(decode_latex(r#"na\"\i ve \ss{} \o"#), "naïve ß ø");
        assert_eq!(decode_latex(r"\emph{Deep}  learning\\ now"), "Deep learning now");
        assert_eq!(decode_latex(r"50\% of \{x\}"), "50% of {x}");
    }

    #[test]
    fn braced_and_is_not_a_separator() {
        assert_eq!(
            split_authors("{Barnes and Noble} and Jane Roe AND Max Mu"),
            ["{Barnes and Noble}", "Jane Roe", "Max Mu"]
        );
    }

    #[test]
    fn missing_title_is_reported_with_key() {
        let (records, skipped) = parse("\n\n  @article{nokey1, author = {A B}, year = 1999}\n@misc{ok, title={T}}");
        assert_eq!(records.len(), 1);
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].key.as_deref(), Some("nokey1"));
        assert_eq!((skipped[0].line, skipped[0].column), (3, 3));
        assert!(skipped[0].reason.contains("title"));
    }

    #[test]
    fn macros_concatenation_and_crossref_are_skipped() {
        let text = "@string{acm = \"ACM\"}\n@article{a, title = {T}, journal = acm}\n@article{b, title = {T} # {U}}\n@inproceedings{c, title={T}, crossref={conf}}\n@article{d, title={Kept}, month = jan}\n";
        let (records, skipped) = parse(text);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].key, "d");
        let keys: Vec<_> = skipped.iter().map(|s| s.key.clone()).collect();
        assert_eq!(keys, [None, Some("a".into()), Some("b".into()), Some("c".into())]);
    }

    #[test]
    fn syntax_error_resyncs_at_next_entry() {
        let text = "@article{bad, title = {unclosed\n@article{good, title = {Fine}}\n";
        let (records, skipped) = parse(text);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].key, "good");
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].line, 1);
    }

    #[test]
    fn comments_and_preamble_are_ignored() {
        let (records, skipped) =
            parse("% a comment line\n@comment{anything {here}}\n@preamble{\"x\"}\n@misc{k, title={T}}");
        assert_eq!(records.len(), 1);
        assert!(skipped.is_empty());
    }

    #[test]
    fn non_integer_year_is_reported() {
        let (records, skipped) = parse("@misc{k, title={T}, year={circa 1990}}");
        assert!(records.is_empty());
        assert!(skipped[0].reason.contains("year"));
    }

    #[test]
    fn written_entry_reads_back() {
        let record = ArticleRecord {
            key: "k:1".into(),
            entry_type: "inproceedings".into(),
            title: r"Braces {x} and \back $5 ~tilde".into(),
            authors: vec!["Søren Ødegård".into(), "Barnes and Noble".into()],
            year: Some(1998),
            venue: "Proc. Ünïcode".into(),
            uri: Some(r"http://x.org/~a_b%20c{\}".into()),
        };
        let mut out = String::new();
        write_entry(&mut out, &record);
        assert_eq!(one(&out), record);
    }
}

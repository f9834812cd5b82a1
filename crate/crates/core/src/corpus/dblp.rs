//! Reader for DBLP-style XML: `article` and `inproceedings` elements with
//! `title`, `author`+, `year`, `journal`/`booktitle` and `ee` children.

use quick_xml::escape::{resolve_html5_entity, resolve_predefined_entity};
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};

use super::{ArticleRecord, LineIndex, SkippedEntry};
use crate::error::{Error, Result};

const RECORD_ELEMENTS: [&str; 2] = ["article", "inproceedings"];

#[derive(Default)]
struct Pending {
    entry_type: String,
    key: Option<String>,
    offset: usize,
    depth: usize,
    title: Option<String>,
    authors: Vec<String>,
    year: Option<String>,
    venue: Option<String>,
    ee: Option<String>,
    url: Option<String>,
    problem: Option<String>,
}

struct Field {
    name: String,
    text: String,
}

#[derive(Debug)]
pub(crate) struct DblpParse {
    pub records: Vec<ArticleRecord>,
    pub skipped: Vec<SkippedEntry>,
    /// Elements of other publication types that were passed over.
    pub ignored: usize,
}

fn key_attribute(e: &BytesStart<'_>) -> Result<Option<String>, String> {
    for attr in e.attributes() {
        let attr = attr.map_err(|err| err.to_string())?;
        if attr.key.as_ref() == "key" {
            let value = attr
                .normalized_value(XmlVersion::Implicit1_0)
                .map_err(|err| err.to_string())?;
            return Ok(Some(value.trim().to_string()));
        }
    }
    Ok(None)
}

fn collapse(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Malformed XML is a stream-level failure and aborts the parse; a record
/// missing a mandatory field is skipped and reported.
pub(crate) fn parse(text: &str) -> Result<DblpParse> {
    let lines = LineIndex::new(text);
    let mut reader = Reader::from_str(text);
    let mut out = DblpParse {
        records: Vec::new(),
        skipped: Vec::new(),
        ignored: 0,
    };
    let mut depth = 0usize;
    let mut open: Vec<String> = Vec::new();
    let mut current: Option<Pending> = None;
    let mut field: Option<Field> = None;

    let hard = |offset: u64, message: String| {
        let (line, column) = lines.position(offset as usize);
        Error::Parse { line, column, message }
    };

    loop {
        let before = reader.buffer_position() as usize;
        let event = reader
            .read_event()
            .map_err(|e| hard(reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(e) => {
                let name = e.name().as_ref().to_string();
                if current.is_none() && depth <= 1 && RECORD_ELEMENTS.contains(&name.as_str()) {
                    let mut pending = Pending {
                        entry_type: name.clone(),
                        offset: before,
                        depth,
                        ..Pending::default()
                    };
                    match key_attribute(&e) {
                        Ok(key) => pending.key = key,
                        Err(msg) => pending.problem = Some(msg),
                    }
                    current = Some(pending);
                } else if current.is_none() && depth == 1 {
                    out.ignored += 1;
                } else if let Some(rec) = &current {
                    if field.is_none() && depth == rec.depth + 1 {
                        field = Some(Field {
                            name: name.clone(),
                            text: String::new(),
                        });
                    }
                }
                open.push(name);
                depth += 1;
            }
            Event::Empty(e) => {
                let name = e.name().as_ref().to_string();
                if current.is_none() && depth <= 1 && RECORD_ELEMENTS.contains(&name.as_str()) {
                    let (line, column) = lines.position(before);
                    out.skipped.push(SkippedEntry {
                        line,
                        column,
                        key: key_attribute(&e).ok().flatten(),
                        reason: "missing title field".into(),
                    });
                } else if current.is_none() && depth == 1 {
                    out.ignored += 1;
                }
            }
            Event::Text(t) => {
                if let Some(f) = &mut field {
                    f.text.push_str(&t.xml10_content());
                }
            }
            Event::CData(t) => {
                if let Some(f) = &mut field {
                    f.text.push_str(&t.xml10_content());
                }
            }
            Event::GeneralRef(r) => {
                if let Some(f) = &mut field {
                    let resolved = match r.resolve_char_ref() {
                        Ok(Some(c)) => Some(c.to_string()),
                        Ok(None) => resolve_predefined_entity(&r)
                            .or_else(|| resolve_html5_entity(&r))
                            .map(str::to_string),
                        Err(_) => None,
                    };
                    match resolved {
                        Some(s) => f.text.push_str(&s),
                        None => {
                            if let Some(rec) = &mut current {
                                rec.problem.get_or_insert(format!("unknown entity &{};", &*r));
                            }
                        }
                    }
                }
            }
            Event::End(_) => {
                depth -= 1;
                open.pop();
                if let Some(rec) = &mut current {
                    if depth == rec.depth + 1 {
                        if let Some(f) = field.take() {
                            store_field(rec, f);
                        }
                    } else if depth == rec.depth {
                        let rec = current.take().expect("record open");
                        let (line, column) = lines.position(rec.offset);
                        match finish(rec) {
                            Ok(record) => out.records.push(record),
                            Err((key, reason)) => out.skipped.push(SkippedEntry {
                                line,
                                column,
                                key,
                                reason,
                            }),
                        }
                    }
                }
            }
            Event::Eof => {
                if let Some(name) = open.last() {
                    return Err(hard(text.len() as u64, format!("document ends inside <{name}>")));
                }
                break;
            }
            Event::Decl(_) | Event::DocType(_) | Event::PI(_) | Event::Comment(_) => {}
        }
    }
    Ok(out)
}

fn store_field(rec: &mut Pending, field: Field) {
    let value = collapse(&field.text);
    match field.name.as_str() {
        "title" => {
            rec.title.get_or_insert(value);
        }
        "author" => {
            if !value.is_empty() {
                rec.authors.push(value);
            }
        }
        "year" => {
            rec.year.get_or_insert(value);
        }
        "journal" | "booktitle" => {
            rec.venue.get_or_insert(value);
        }
        "ee" => {
            rec.ee.get_or_insert(value);
        }
        "url" => {
            rec.url.get_or_insert(value);
        }
        _ => {}
    }
}

fn finish(rec: Pending) -> Result<ArticleRecord, (Option<String>, String)> {
    let key = rec.key.clone().filter(|k| !k.is_empty());
    if let Some(problem) = rec.problem {
        return Err((key, problem));
    }
    let Some(key) = key else {
        return Err((None, "missing key attribute".into()));
    };
    let title = rec.title.unwrap_or_default();
    if title.is_empty() {
        return Err((Some(key), "missing title field".into()));
    }
    let year = match rec.year.filter(|y| !y.is_empty()) {
        None => None,
        Some(y) => match y.parse::<i32>() {
            Ok(y) => Some(y),
            Err(_) => return Err((Some(key), format!("year {y:?} is not an integer"))),
        },
    };
    // DBLP `url` values are usually site-relative; only absolute ones count.
    let uri = rec
        .ee
        .filter(|u| !u.is_empty())
        .or_else(|| rec.url.filter(|u| u.contains("://")));
    Ok(ArticleRecord {
        key,
        entry_type: rec.entry_type,
        title,
        authors: rec.authors,
        year,
        venue: rec.venue.unwrap_or_default(),
        uri,
    })
}

//! WebNLG-style entry documents.
//!
//! ```text
//! <entry category="MISC" eid="Id5" size="3">
//!   <modifiedtripleset>
//!     <mtriple>Apertura 2006 | JORNADA_OR_OTHER | Semifinals Ida</mtriple>
//!   </modifiedtripleset>
//!   <lex comment="WikiTableQuestions" lid="Id1">
//!       Chivas and América will compete ...
//!   </lex>
//! </entry>
//! ```
//!
//! Inside `mtriple` text, `|` and `\` that belong to a field are written as
//! `\|` and `\\`. Attributes beyond `category`/`eid`/`size` (entry) and
//! `comment`/`lid` (lex) are only written when they differ from their
//! defaults.

use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::FormatError;
use crate::tripler::{Annotator, CorpusEntry, Provenance, Realization, Triple, TripleSet};

const HEADER: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<benchmark>\n  <entries>\n";
const FOOTER: &str = "  </entries>\n</benchmark>\n";

fn push_text(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

fn push_attr(out: &mut String, name: &str, value: &str) {
    out.push(' ');
    out.push_str(name);
    out.push_str("=\"");
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Escapes `\` and `|` inside one triple field.
pub fn escape_field(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        if c == '\\' || c == '|' {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Splits mtriple text on unescaped `|`, dropping one space on each inner
/// side of every separator. Returns `None` unless there are exactly three
/// fields.
pub fn split_mtriple(text: &str) -> Option<Triple> {
    let mut fields = vec![String::new()];
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(n @ ('\\' | '|')) => fields.last_mut().unwrap().push(n),
                Some(n) => {
                    let f = fields.last_mut().unwrap();
                    f.push('\\');
                    f.push(n);
                }
                None => fields.last_mut().unwrap().push('\\'),
            },
            '|' => fields.push(String::new()),
            c => fields.last_mut().unwrap().push(c),
        }
    }
    if fields.len() != 3 {
        return None;
    }
    let strip_end = |s: &str| s.strip_suffix(' ').unwrap_or(s).to_owned();
    let strip_start = |s: &str| s.strip_prefix(' ').unwrap_or(s).to_owned();
    let subject = strip_end(&fields[0]);
    let predicate = strip_start(&strip_end(&fields[1]));
    let object = strip_start(&fields[2]);
    Some(Triple {
        subject,
        predicate,
        object,
    })
}

fn write_entry(out: &mut String, entry: &CorpusEntry) {
    out.push_str("    <entry");
    push_attr(out, "category", &entry.category);
    push_attr(out, "eid", &entry.eid);
    push_attr(out, "size", &entry.size().to_string());
    if entry.tripleset.provenance != Provenance::Unspecified {
        push_attr(out, "source", entry.tripleset.provenance.as_str());
    }
    if let Some(table_id) = &entry.table_id {
        push_attr(out, "table_id", table_id);
    }
    if entry.has_empty_value {
        push_attr(out, "empty_value", "true");
    }
    out.push_str(">\n      <modifiedtripleset>\n");
    for t in &entry.tripleset.triples {
        out.push_str("        <mtriple>");
        let line = format!(
            "{} | {} | {}",
            escape_field(&t.subject),
            escape_field(&t.predicate),
            escape_field(&t.object)
        );
        push_text(out, &line);
        out.push_str("</mtriple>\n");
    }
    out.push_str("      </modifiedtripleset>\n");
    for (i, r) in entry.realizations.iter().enumerate() {
        out.push_str("      <lex");
        push_attr(out, "comment", &r.comment);
        push_attr(out, "lid", &format!("Id{}", i + 1));
        if r.annotator != Annotator::ExternalDataset {
            push_attr(out, "annotator", r.annotator.as_str());
        }
        out.push_str(">\n          ");
        push_text(out, &r.text);
        out.push_str("\n      </lex>\n");
    }
    out.push_str("    </entry>\n");
}

/// Writes a complete document. Entries are separated by a blank line.
pub fn write_xml(entries: &[CorpusEntry]) -> String {
    let mut out = String::from(HEADER);
    for (i, entry) in entries.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_entry(&mut out, entry);
    }
    out.push_str(FOOTER);
    out
}

struct Cursor<'a> {
    reader: Reader<&'a [u8]>,
    eid: Option<String>,
}

impl<'a> Cursor<'a> {
    fn error(&self, message: impl Into<String>) -> FormatError {
        FormatError::MalformedEntry {
            eid: self.eid.clone(),
            position: self.reader.buffer_position(),
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<Event<'a>, FormatError> {
        self.reader
            .read_event()
            .map_err(|e| FormatError::MalformedEntry {
                eid: self.eid.clone(),
                position: self.reader.error_position(),
                message: e.to_string(),
            })
    }

    fn attributes(&self, start: &BytesStart<'_>) -> Result<Vec<(String, String)>, FormatError> {
        let mut out = Vec::new();
        for attr in start.attributes() {
            let attr = attr.map_err(|e| self.error(e.to_string()))?;
            let key = String::from_utf8(attr.key.as_ref().to_vec())
                .map_err(|_| self.error("attribute name is not UTF-8"))?;
            let value = attr
                .unescape_value()
                .map_err(|e| self.error(e.to_string()))?
                .into_owned();
            out.push((key, value));
        }
        Ok(out)
    }

    /// Collects character data up to the end tag of the current element.
    /// Nested elements are skipped when `skip_children` is set and rejected
    /// otherwise.
    fn text_until_end(&mut self, skip_children: bool) -> Result<String, FormatError> {
        let mut text = String::new();
        loop {
            match self.next()? {
                Event::Text(t) => {
                    text.push_str(&t.xml10_content().map_err(|e| self.error(e.to_string()))?)
                }
                Event::CData(t) => {
                    text.push_str(&t.decode().map_err(|e| self.error(e.to_string()))?)
                }
                Event::GeneralRef(r) => {
                    let resolved = match r
                        .resolve_char_ref()
                        .map_err(|e| self.error(e.to_string()))?
                    {
                        Some(c) => c.to_string(),
                        None => {
                            let name = r.decode().map_err(|e| self.error(e.to_string()))?;
                            resolve_predefined_entity(&name)
                                .ok_or_else(|| self.error(format!("unknown entity &{name};")))?
                                .to_owned()
                        }
                    };
                    text.push_str(&resolved);
                }
                Event::End(_) => return Ok(text),
                Event::Start(s) if skip_children => {
                    let name = s.name().as_ref().to_vec();
                    self.reader
                        .read_to_end(quick_xml::name::QName(&name))
                        .map_err(|e| self.error(e.to_string()))?;
                }
                Event::Empty(_) if skip_children => {}
                Event::Start(_) | Event::Empty(_) => {
                    return Err(self.error("unexpected element inside text"))
                }
                Event::Eof => return Err(self.error("unexpected end of document")),
                _ => {}
            }
        }
    }

    fn expect_blank(&self, t: &quick_xml::events::BytesText<'_>) -> Result<(), FormatError> {
        let s = t.decode().map_err(|e| self.error(e.to_string()))?;
        if s.trim().is_empty() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected text {:?}", s.trim())))
        }
    }

    fn read_tripleset(&mut self) -> Result<Vec<Triple>, FormatError> {
        let mut triples = Vec::new();
        loop {
            match self.next()? {
                Event::Start(s) if s.local_name().as_ref() == b"mtriple" => {
                    let text = self.text_until_end(false)?;
                    let triple = split_mtriple(&text).ok_or_else(|| {
                        self.error(format!("mtriple {text:?} does not have three fields"))
                    })?;
                    triples.push(triple);
                }
                Event::Empty(s) if s.local_name().as_ref() == b"mtriple" => {
                    return Err(self.error("empty mtriple"))
                }
                Event::End(_) => return Ok(triples),
                Event::Text(t) => self.expect_blank(&t)?,
                Event::Start(_) | Event::Empty(_) | Event::CData(_) | Event::GeneralRef(_) => {
                    return Err(self.error("unexpected content in modifiedtripleset"))
                }
                Event::Eof => return Err(self.error("unexpected end of document")),
                _ => {}
            }
        }
    }

    fn read_lex(&mut self, start: &BytesStart<'_>) -> Result<Realization, FormatError> {
        let mut comment = String::new();
        let mut annotator = Annotator::ExternalDataset;
        for (key, value) in self.attributes(start)? {
            match key.as_str() {
                "comment" => comment = value,
                "annotator" => {
                    annotator = Annotator::parse(&value)
                        .ok_or_else(|| self.error(format!("unknown annotator {value:?}")))?
                }
                _ => {}
            }
        }
        let text = self.text_until_end(true)?;
        Ok(Realization {
            text: text.trim().to_owned(),
            annotator,
            comment,
        })
    }

    fn read_entry(&mut self, start: &BytesStart<'_>) -> Result<CorpusEntry, FormatError> {
        let attrs = self.attributes(start)?;
        let get = |k: &str| attrs.iter().find(|(n, _)| n == k).map(|(_, v)| v.clone());
        self.eid = get("eid");
        let eid = self
            .eid
            .clone()
            .ok_or_else(|| self.error("missing eid attribute"))?;
        let category = get("category").unwrap_or_default();
        let size: usize = get("size")
            .ok_or_else(|| self.error("missing size attribute"))?
            .trim()
            .parse()
            .map_err(|_| self.error("size attribute is not a number"))?;
        let provenance = match get("source") {
            Some(s) => {
                Provenance::parse(&s).ok_or_else(|| self.error(format!("unknown source {s:?}")))?
            }
            None => Provenance::Unspecified,
        };
        let table_id = get("table_id");
        let has_empty_value = match get("empty_value").as_deref() {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(self.error(format!("bad empty_value {other:?}"))),
        };

        let mut triples = None;
        let mut realizations = Vec::new();
        loop {
            match self.next()? {
                Event::Start(s) => match s.local_name().as_ref() {
                    b"modifiedtripleset" => {
                        if triples.is_some() {
                            return Err(self.error("more than one modifiedtripleset"));
                        }
                        triples = Some(self.read_tripleset()?);
                    }
                    b"lex" => realizations.push(self.read_lex(&s)?),
                    _ => {
                        let name = s.name().as_ref().to_vec();
                        self.reader
                            .read_to_end(quick_xml::name::QName(&name))
                            .map_err(|e| self.error(e.to_string()))?;
                    }
                },
                Event::Empty(s) if s.local_name().as_ref() == b"modifiedtripleset" => {
                    if triples.is_some() {
                        return Err(self.error("more than one modifiedtripleset"));
                    }
                    triples = Some(Vec::new());
                }
                Event::Empty(s) if s.local_name().as_ref() == b"lex" => {
                    return Err(self.error("empty lex"))
                }
                Event::End(_) => break,
                Event::Text(t) => self.expect_blank(&t)?,
                Event::Eof => return Err(self.error("unexpected end of document")),
                _ => {}
            }
        }
        let triples = triples.ok_or_else(|| self.error("missing modifiedtripleset"))?;
        if triples.len() != size {
            return Err(self.error(format!(
                "size attribute is {size} but there are {} triples",
                triples.len()
            )));
        }
        let entry = CorpusEntry {
            eid,
            category,
            tripleset: TripleSet::new(triples, provenance),
            realizations,
            table_id,
            has_empty_value,
        };
        entry.check().map_err(|e| self.error(e.to_string()))?;
        self.eid = None;
        Ok(entry)
    }
}

/// Reads every `entry` element of a document, wherever it is nested.
pub fn read_xml(document: &str) -> Result<Vec<CorpusEntry>, FormatError> {
    let mut cursor = Cursor {
        reader: Reader::from_str(document),
        eid: None,
    };
    let mut entries = Vec::new();
    loop {
        match cursor.next()? {
            Event::Start(s) if s.local_name().as_ref() == b"entry" => {
                entries.push(cursor.read_entry(&s)?)
            }
            Event::Empty(s) if s.local_name().as_ref() == b"entry" => {
                return Err(cursor.error("empty entry element"))
            }
            Event::Eof => return Ok(entries),
            _ => {}
        }
    }
}

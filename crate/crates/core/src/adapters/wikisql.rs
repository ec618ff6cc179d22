//! WikiSQL question/SQL pairs: aggregate filtering and row alignment.
//!
//! Queries are scanned token by token; nothing is executed. A query is
//! rejected when it mentions any aggregate or set keyword outside a quoted
//! literal. Accepted queries are aligned to a single table row through their
//! `WHERE` equalities and the answer string.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{NodeRef, OntologyTree};
use crate::table::Table;
use crate::tripler::{
    highlight_to_tripleset, Annotator, CorpusEntry, Highlight, Provenance, Realization,
    TriplerError,
};

const AGGREGATE_WORDS: [&str; 8] = [
    "MAX",
    "MIN",
    "COUNT",
    "SUM",
    "AVG",
    "JOIN",
    "INTERSECT",
    "UNION",
];
const AGGREGATE_PAIRS: [(&str, &str); 2] = [("GROUP", "BY"), ("ORDER", "BY")];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SqlError {
    #[error("unterminated quoted literal starting at byte {0}")]
    UnterminatedLiteral(usize),
    #[error("expected {expected} at byte {offset}")]
    Expected {
        expected: &'static str,
        offset: usize,
    },
    #[error("unsupported condition {0:?}; only equality is supported")]
    UnsupportedCondition(String),
    #[error("column index {0} is out of range")]
    ColumnOutOfRange(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokenKind {
    Word,
    /// Quoted string literal; text holds the unquoted content.
    Literal,
    /// Backtick- or bracket-quoted identifier.
    Ident,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Token {
    kind: TokenKind,
    text: String,
    start: usize,
    end: usize,
}

/// Splits a query into tokens. The error, if any, is an unterminated quote;
/// tokens up to that point are still returned.
fn tokenize(raw: &str) -> (Vec<Token>, Option<SqlError>) {
    let mut tokens = Vec::new();
    let mut chars = raw.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '\'' || c == '"' || c == '`' || c == '[' {
            let close = if c == '[' { ']' } else { c };
            chars.next();
            let mut text = String::new();
            let mut end = None;
            while let Some((i, ch)) = chars.next() {
                if ch == close {
                    // doubled quote is an escaped quote
                    if close != ']' && chars.peek().map(|&(_, n)| n) == Some(close) {
                        chars.next();
                        text.push(close);
                        continue;
                    }
                    end = Some(i + ch.len_utf8());
                    break;
                }
                text.push(ch);
            }
            let Some(end) = end else {
                return (tokens, Some(SqlError::UnterminatedLiteral(start)));
            };
            let kind = if c == '\'' || c == '"' {
                TokenKind::Literal
            } else {
                TokenKind::Ident
            };
            tokens.push(Token {
                kind,
                text,
                start,
                end,
            });
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let mut end = start;
            let mut text = String::new();
            while let Some(&(i, ch)) = chars.peek() {
                if ch.is_alphanumeric() || ch == '_' {
                    text.push(ch);
                    end = i + ch.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Word,
                text,
                start,
                end,
            });
            continue;
        }
        chars.next();
        tokens.push(Token {
            kind: TokenKind::Punct,
            text: c.to_string(),
            start,
            end: start + c.len_utf8(),
        });
    }
    (tokens, None)
}

fn is_word(t: &Token, word: &str) -> bool {
    t.kind == TokenKind::Word && t.text.eq_ignore_ascii_case(word)
}

fn scan_aggregate(tokens: &[Token]) -> bool {
    tokens.iter().enumerate().any(|(i, t)| {
        AGGREGATE_WORDS.iter().any(|w| is_word(t, w))
            || AGGREGATE_PAIRS
                .iter()
                .any(|(a, b)| is_word(t, a) && tokens.get(i + 1).is_some_and(|n| is_word(n, b)))
    })
}

/// Whether the query uses any aggregate, join, set or ordering keyword
/// outside quoted literals. Case-insensitive.
pub fn has_aggregate(raw: &str) -> bool {
    scan_aggregate(&tokenize(raw).0)
}

/// A WikiSQL query. Column references are kept as written and resolved
/// against a table at alignment time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqlQuery {
    pub raw: String,
    pub has_aggregate: bool,
    pub select_columns: Vec<String>,
    /// `(column, value)` equality conditions joined by `AND`.
    pub conditions: Vec<(String, String)>,
}

impl SqlQuery {
    /// Parses `SELECT cols FROM name [WHERE col = value [AND ...]]`. Queries
    /// with aggregate keywords are only scanned, never parsed further.
    pub fn parse(raw: &str) -> Result<Self, SqlError> {
        let (tokens, unterminated) = tokenize(raw);
        let has_aggregate = scan_aggregate(&tokens);
        if has_aggregate {
            return Ok(SqlQuery {
                raw: raw.to_owned(),
                has_aggregate,
                select_columns: Vec::new(),
                conditions: Vec::new(),
            });
        }
        if let Some(err) = unterminated {
            return Err(err);
        }
        let offset_at = |i: usize| tokens.get(i).map_or(raw.len(), |t| t.start);
        if !tokens.first().is_some_and(|t| is_word(t, "SELECT")) {
            return Err(SqlError::Expected {
                expected: "SELECT",
                offset: 0,
            });
        }
        let from = tokens
            .iter()
            .position(|t| is_word(t, "FROM"))
            .ok_or(SqlError::Expected {
                expected: "FROM",
                offset: raw.len(),
            })?;
        let select_columns = split_on(&tokens[1..from], |t| {
            t.kind == TokenKind::Punct && t.text == ","
        })
        .into_iter()
        .map(|part| span_text(raw, part))
        .collect::<Vec<_>>();
        if select_columns.iter().any(String::is_empty) {
            return Err(SqlError::Expected {
                expected: "column",
                offset: offset_at(1),
            });
        }
        let where_at = tokens.iter().position(|t| is_word(t, "WHERE"));
        if where_at.map_or(tokens.len(), |w| w) == from + 1 {
            return Err(SqlError::Expected {
                expected: "table name",
                offset: offset_at(from + 1),
            });
        }
        let mut conditions = Vec::new();
        if let Some(w) = where_at {
            for part in split_on(&tokens[w + 1..], |t| is_word(t, "AND")) {
                conditions.push(parse_condition(raw, part)?);
            }
        }
        Ok(SqlQuery {
            raw: raw.to_owned(),
            has_aggregate,
            select_columns,
            conditions,
        })
    }
}

fn split_on(tokens: &[Token], sep: impl Fn(&Token) -> bool) -> Vec<&[Token]> {
    tokens.split(|t| sep(t)).collect()
}

/// Source text covered by `tokens`, or the unquoted content of a single
/// quoted token.
fn span_text(raw: &str, tokens: &[Token]) -> String {
    match tokens {
        [] => String::new(),
        [single] if single.kind != TokenKind::Word && single.kind != TokenKind::Punct => {
            single.text.clone()
        }
        [first, .., last] | [first @ last] => raw[first.start..last.end].trim().to_owned(),
    }
}

fn parse_condition(raw: &str, tokens: &[Token]) -> Result<(String, String), SqlError> {
    let text = span_text(raw, tokens);
    if tokens.iter().any(|t| {
        (t.kind == TokenKind::Punct && matches!(t.text.as_str(), "<" | ">" | "!"))
            || is_word(t, "OR")
            || is_word(t, "LIKE")
            || is_word(t, "IN")
            || is_word(t, "BETWEEN")
    }) {
        return Err(SqlError::UnsupportedCondition(text));
    }
    let eq = tokens
        .iter()
        .position(|t| t.kind == TokenKind::Punct && t.text == "=")
        .ok_or_else(|| SqlError::UnsupportedCondition(text.clone()))?;
    let column = span_text(raw, &tokens[..eq]);
    let value = span_text(raw, &tokens[eq + 1..]);
    if column.is_empty() || eq + 1 == tokens.len() {
        return Err(SqlError::UnsupportedCondition(text));
    }
    Ok((column, value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqlFilter {
    Accept,
    Reject,
}

pub fn filter_sql(query: &SqlQuery) -> SqlFilter {
    if query.has_aggregate {
        SqlFilter::Reject
    } else {
        SqlFilter::Accept
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnalignedReason {
    Aggregate,
    UnknownColumn(String),
    NoMatchingRow,
    MultipleMatchingRows(usize),
    AnswerNotFound,
    AmbiguousAnswer(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alignment {
    Aligned(Highlight),
    Unaligned(UnalignedReason),
}

/// Finds the single row satisfying every `WHERE` equality (exact match after
/// trimming) and highlights the condition columns plus the one column whose
/// cell equals the answer.
pub fn align_row(query: &SqlQuery, table: &Table, answer: &str) -> Alignment {
    use Alignment::Unaligned;
    if query.has_aggregate {
        return Unaligned(UnalignedReason::Aggregate);
    }
    let mut conditions = Vec::with_capacity(query.conditions.len());
    for (column, value) in &query.conditions {
        match table.column_by_label(column) {
            Some(i) => conditions.push((i, value.trim())),
            None => return Unaligned(UnalignedReason::UnknownColumn(column.clone())),
        }
    }
    let matching: Vec<usize> = table
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, row)| conditions.iter().all(|&(c, v)| row[c].trim() == v))
        .map(|(i, _)| i)
        .collect();
    let row_index = match matching.as_slice() {
        [] => return Unaligned(UnalignedReason::NoMatchingRow),
        [one] => *one,
        many => return Unaligned(UnalignedReason::MultipleMatchingRows(many.len())),
    };
    let answer = answer.trim();
    let answer_columns: Vec<usize> = table.rows()[row_index]
        .iter()
        .enumerate()
        .filter(|(_, cell)| cell.trim() == answer)
        .map(|(i, _)| i)
        .collect();
    let answer_column = match answer_columns.as_slice() {
        [] => return Unaligned(UnalignedReason::AnswerNotFound),
        [one] => *one,
        _ => return Unaligned(UnalignedReason::AmbiguousAnswer(answer_columns)),
    };
    let nodes: BTreeSet<NodeRef> = conditions
        .iter()
        .map(|&(c, _)| c)
        .chain([answer_column])
        .map(NodeRef::Column)
        .collect();
    Alignment::Aligned(Highlight {
        table_id: table.id().to_owned(),
        row_index,
        nodes,
    })
}

/// Structured WikiSQL query: selected column, aggregate operator index and
/// `[column, operator, value]` conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredSql {
    pub sel: usize,
    #[serde(default)]
    pub agg: usize,
    #[serde(default)]
    pub conds: Vec<(usize, usize, serde_json::Value)>,
}

impl StructuredSql {
    /// Operator 0 is equality; aggregate 0 is none.
    pub fn to_query(&self, table: &Table) -> Result<SqlQuery, SqlError> {
        let header = |i: usize| {
            table
                .headers()
                .get(i)
                .cloned()
                .ok_or(SqlError::ColumnOutOfRange(i))
        };
        let select = header(self.sel)?;
        let mut conditions = Vec::new();
        for (column, op, value) in &self.conds {
            let column = header(*column)?;
            let value = match value {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            if *op != 0 {
                return Err(SqlError::UnsupportedCondition(format!(
                    "{column} op{op} {value}"
                )));
            }
            conditions.push((column, value));
        }
        let mut raw = format!("SELECT `{select}` FROM `{}`", table.id());
        for (i, (c, v)) in conditions.iter().enumerate() {
            raw.push_str(if i == 0 { " WHERE " } else { " AND " });
            raw.push_str(&format!("`{c}` = '{}'", v.replace('\'', "''")));
        }
        Ok(SqlQuery {
            raw,
            has_aggregate: self.agg != 0,
            select_columns: vec![select],
            conditions,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SqlField {
    Text(String),
    Structured(StructuredSql),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WikiSqlRecord {
    #[serde(default)]
    pub id: Option<String>,
    pub question: String,
    pub sql: SqlField,
    pub table_id: String,
    pub answer: String,
    #[serde(default)]
    pub declarative_sentence: Option<String>,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct WikiSqlConversion {
    pub entries: Vec<CorpusEntry>,
    pub aggregate: usize,
    pub unparsable: usize,
    pub unaligned: usize,
    pub missing_table: usize,
    pub missing_sentence: usize,
    pub oversize: usize,
}

/// Filters, aligns and extracts every record. Sentences come from the record
/// itself or from `sentences`, keyed by record id.
pub fn convert_wikisql(
    records: &[WikiSqlRecord],
    tables: &BTreeMap<String, (Table, OntologyTree)>,
    sentences: &HashMap<String, String>,
) -> WikiSqlConversion {
    let mut out = WikiSqlConversion::default();
    for record in records {
        let Some((table, tree)) = tables.get(&record.table_id) else {
            out.missing_table += 1;
            continue;
        };
        let query = match &record.sql {
            SqlField::Text(raw) => SqlQuery::parse(raw),
            SqlField::Structured(s) => s.to_query(table),
        };
        let query = match query {
            Ok(q) => q,
            Err(_) => {
                out.unparsable += 1;
                continue;
            }
        };
        if filter_sql(&query) == SqlFilter::Reject {
            out.aggregate += 1;
            continue;
        }
        let sentence = record
            .declarative_sentence
            .clone()
            .or_else(|| record.id.as_ref().and_then(|id| sentences.get(id)).cloned());
        let Some(sentence) = sentence.filter(|s| !s.trim().is_empty()) else {
            out.missing_sentence += 1;
            continue;
        };
        let highlight = match align_row(&query, table, &record.answer) {
            Alignment::Aligned(h) => h,
            Alignment::Unaligned(_) => {
                out.unaligned += 1;
                continue;
            }
        };
        let (mut tripleset, has_empty_value) = match highlight_to_tripleset(tree, table, &highlight)
        {
            Ok(v) => v,
            Err(TriplerError::Oversize { .. }) => {
                out.oversize += 1;
                continue;
            }
            Err(_) => {
                out.unaligned += 1;
                continue;
            }
        };
        tripleset.provenance = Provenance::WikisqlDeclarative;
        out.entries.push(CorpusEntry {
            eid: format!("Id{}", out.entries.len() + 1),
            category: "MISC".to_owned(),
            tripleset,
            realizations: vec![Realization::new(
                sentence.trim(),
                Annotator::AutoDeclarative,
                "WikiSQL_decl_sents",
            )],
            table_id: Some(table.id().to_owned()),
            has_empty_value,
        });
    }
    out
}

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::BibRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryField {
    Title,
    Author,
    Year,
    Journal,
    ReportNumber,
    Keyword,
    /// Title, authors, journal, report numbers and keywords.
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchOp {
    Contains,
    Equals,
    Range,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClauseValue {
    Text(String),
    /// Inclusive year bounds.
    Range(i32, i32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub field: QueryField,
    pub op: MatchOp,
    pub value: ClauseValue,
}

/// A conjunction of field clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldQuery {
    clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("a query needs at least one clause")]
    Empty,
    #[error("range match is only valid on year")]
    RangeOnNonYear,
    #[error("clause operator and value do not agree")]
    ValueMismatch,
    #[error("empty year range {0}..{1}")]
    EmptyRange(i32, i32),
    #[error("cannot parse clause {0:?}: expected FIELD:OP:VALUE")]
    Syntax(String),
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("unknown operator {0:?}")]
    UnknownOp(String),
    #[error("bad year range {0:?}: expected FROM..TO")]
    BadRange(String),
}

impl Clause {
    pub fn new(field: QueryField, op: MatchOp, value: ClauseValue) -> Result<Self, QueryError> {
        match (op, &value) {
            (MatchOp::Range, ClauseValue::Range(lo, hi)) => {
                if field != QueryField::Year {
                    return Err(QueryError::RangeOnNonYear);
                }
                if lo > hi {
                    return Err(QueryError::EmptyRange(*lo, *hi));
                }
            }
            (MatchOp::Range, _) | (_, ClauseValue::Range(..)) => {
                return Err(QueryError::ValueMismatch)
            }
            _ => {}
        }
        Ok(Clause { field, op, value })
    }

    pub fn text(field: QueryField, op: MatchOp, value: impl Into<String>) -> Result<Self, QueryError> {
        Clause::new(field, op, ClauseValue::Text(value.into()))
    }

    pub fn year_range(lo: i32, hi: i32) -> Result<Self, QueryError> {
        Clause::new(QueryField::Year, MatchOp::Range, ClauseValue::Range(lo, hi))
    }

    fn matches(&self, record: &BibRecord) -> bool {
        match &self.value {
            ClauseValue::Range(lo, hi) => record.year.is_some_and(|y| *lo <= y && y <= *hi),
            ClauseValue::Text(needle) => {
                let needle = needle.to_lowercase();
                let test = |hay: &str| match self.op {
                    MatchOp::Contains => hay.to_lowercase().contains(&needle),
                    _ => hay.to_lowercase() == needle,
                };
                field_values(record, self.field).iter().any(|v| test(v))
            }
        }
    }
}

fn field_values(record: &BibRecord, field: QueryField) -> Vec<String> {
    let mut out = Vec::new();
    let keyword_values = |out: &mut Vec<String>| {
        for kw in &record.keywords {
            out.push(kw.display_label.clone());
            out.push(kw.term_id.clone());
        }
    };
    match field {
        QueryField::Title => out.push(record.title.clone()),
        QueryField::Author => out.extend(record.authors.iter().cloned()),
        QueryField::Year => out.extend(record.year.map(|y| y.to_string())),
        QueryField::Journal => out.extend(record.journal.iter().cloned()),
        QueryField::ReportNumber => out.extend(record.report_numbers.iter().cloned()),
        QueryField::Keyword => keyword_values(&mut out),
        QueryField::Any => {
            out.push(record.title.clone());
            out.extend(record.authors.iter().cloned());
            out.extend(record.journal.iter().cloned());
            out.extend(record.report_numbers.iter().cloned());
            keyword_values(&mut out);
        }
    }
    out
}

impl FieldQuery {
    pub fn new(clauses: Vec<Clause>) -> Result<Self, QueryError> {
        if clauses.is_empty() {
            return Err(QueryError::Empty);
        }
        Ok(FieldQuery { clauses })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Parses clauses written as `FIELD:OP:VALUE`.
    pub fn parse<S: AsRef<str>>(clauses: &[S]) -> Result<Self, QueryError> {
        let clauses = clauses
            .iter()
            .map(|c| c.as_ref().parse())
            .collect::<Result<Vec<Clause>, _>>()?;
        FieldQuery::new(clauses)
    }
}

/// True iff every clause of `query` matches `record`.
pub fn match_query(query: &FieldQuery, record: &BibRecord) -> bool {
    query.clauses.iter().all(|c| c.matches(record))
}

impl FromStr for QueryField {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "title" => QueryField::Title,
            "author" => QueryField::Author,
            "year" => QueryField::Year,
            "journal" => QueryField::Journal,
            "report_number" => QueryField::ReportNumber,
            "keyword" => QueryField::Keyword,
            "any" => QueryField::Any,
            other => return Err(QueryError::UnknownField(other.to_string())),
        })
    }
}

impl fmt::Display for QueryField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryField::Title => "title",
            QueryField::Author => "author",
            QueryField::Year => "year",
            QueryField::Journal => "journal",
            QueryField::ReportNumber => "report_number",
            QueryField::Keyword => "keyword",
            QueryField::Any => "any",
        })
    }
}

impl FromStr for MatchOp {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "contains" => Ok(MatchOp::Contains),
            "equals" => Ok(MatchOp::Equals),
            "range" => Ok(MatchOp::Range),
            other => Err(QueryError::UnknownOp(other.to_string())),
        }
    }
}

impl fmt::Display for MatchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchOp::Contains => "contains",
            MatchOp::Equals => "equals",
            MatchOp::Range => "range",
        })
    }
}

impl FromStr for Clause {
    type Err = QueryError;

    /// `FIELD:OP:VALUE`; the value may itself contain colons. Year ranges
    /// are written `FROM..TO`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.splitn(3, ':');
        let (Some(field), Some(op), Some(value)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(QueryError::Syntax(s.to_string()));
        };
        let field: QueryField = field.trim().parse()?;
        let op: MatchOp = op.trim().parse()?;
        let value = if op == MatchOp::Range {
            let (lo, hi) = value
                .split_once("..")
                .ok_or_else(|| QueryError::BadRange(value.to_string()))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<i32>()
                    .map_err(|_| QueryError::BadRange(value.to_string()))
            };
            ClauseValue::Range(parse(lo)?, parse(hi)?)
        } else {
            ClauseValue::Text(value.to_string())
        };
        Clause::new(field, op, value)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            ClauseValue::Text(t) => write!(f, "{}:{}:{}", self.field, self.op, t),
            ClauseValue::Range(lo, hi) => write!(f, "{}:{}:{}..{}", self.field, self.op, lo, hi),
        }
    }
}

//! The `<record_id>.refs.tsv` file written next to a stored record.

use super::CitationEntry;
use crate::tsv::{escape, unescape};

pub const HEADER: &str = "#marker\tjournal\tvolume\tpage\tyear\treport_numbers\turl\tresolved\traw";

fn opt(v: &Option<String>) -> String {
    v.as_deref().map(escape).unwrap_or_default()
}

pub fn write(entries: &[CitationEntry]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for e in entries {
        let cols = [
            opt(&e.marker),
            opt(&e.journal),
            opt(&e.volume),
            opt(&e.page),
            e.year.map(|y| y.to_string()).unwrap_or_default(),
            escape(&e.report_numbers.join(";")),
            opt(&e.url),
            opt(&e.resolved_record_id),
            escape(&e.raw),
        ];
        out.push_str(&cols.join("\t"));
        out.push('\n');
    }
    out
}

pub fn read(text: &str) -> Result<Vec<CitationEntry>, String> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 9 {
            return Err(format!("line {}: expected 9 columns, got {}", idx + 1, cols.len()));
        }
        let field = |i: usize| (!cols[i].is_empty()).then(|| unescape(cols[i]));
        let year = match cols[4] {
            "" => None,
            y => Some(y.parse().map_err(|e| format!("line {}: year: {e}", idx + 1))?),
        };
        let report_numbers = field(5)
            .map(|s| s.split(';').map(String::from).collect())
            .unwrap_or_default();
        out.push(CitationEntry {
            marker: field(0),
            journal: field(1),
            volume: field(2),
            page: field(3),
            year,
            report_numbers,
            url: field(6),
            resolved_record_id: field(7),
            raw: unescape(cols[8]),
        });
    }
    Ok(out)
}

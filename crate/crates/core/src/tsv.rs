//! Tab-separated report helpers shared by every report writer.

use std::fmt::Display;

/// Escapes a field so that it survives a round trip through a TSV line.
pub fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape`]. Unknown escapes are kept verbatim.
pub fn unescape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Renders `record_id<TAB>value` rows sorted by value descending, then id
/// ascending.
pub fn ranked_report<V, I, S>(rows: I) -> String
where
    I: IntoIterator<Item = (S, V)>,
    S: AsRef<str>,
    V: PartialOrd + Display,
{
    let mut rows: Vec<(S, V)> = rows.into_iter().collect();
    rows.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.as_ref().cmp(b.0.as_ref()))
    });
    let mut out = String::new();
    for (id, value) in rows {
        out.push_str(&escape(id.as_ref()));
        out.push('\t');
        out.push_str(&value.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ranked_report_orders_by_value_then_id() {
        let report = ranked_report(vec![("r2", 5u64), ("r1", 5), ("r3", 9), ("r0", 1)]);
        assert_eq!(report, "r3\t9\nr1\t5\nr2\t5\nr0\t1\n");
    }

    proptest! {
        #[test]
        fn escape_round_trips(s in ".*") {
            let escaped = escape(&s);
            prop_assert!(!escaped.contains('\t') && !escaped.contains('\n'));
            prop_assert_eq!(unescape(&escaped), s);
        }
    }
}

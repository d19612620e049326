use super::BibRecord;

/// Renders records as BibTeX entries, in input order.
///
/// Records with a journal become `@article`, everything else `@misc`; the
/// citation key is the record id.
pub fn export_bibtex(records: &[BibRecord]) -> String {
    let mut out = String::new();
    for (i, record) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let kind = if record.journal.is_some() { "article" } else { "misc" };
        out.push_str(&format!("@{kind}{{{},\n", record.record_id));

        let mut fields: Vec<(&str, String)> = vec![("title", record.title.clone())];
        if !record.authors.is_empty() {
            fields.push(("author", record.authors.join(" and ")));
        }
        if let Some(year) = record.year {
            fields.push(("year", year.to_string()));
        }
        if let Some(journal) = &record.journal {
            fields.push(("journal", journal.clone()));
        }
        let last = fields.len() - 1;
        for (j, (name, value)) in fields.iter().enumerate() {
            let sep = if j == last { "" } else { "," };
            out.push_str(&format!("  {name} = {{{}}}{sep}\n", braces_balanced(value)));
        }
        out.push_str("}\n");
    }
    out
}

// Unbalanced braces would corrupt the entry; drop them.
fn braces_balanced(value: &str) -> String {
    let mut depth = 0i32;
    let balanced = value.chars().all(|c| {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            _ => {}
        }
        depth >= 0
    }) && depth == 0;
    if balanced {
        value.to_string()
    } else {
        value.replace(['{', '}'], "")
    }
}

//! Corpus bookkeeping: file naming and the `subject age` covariate table.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::tree::{CorpusEntry, Region};

/// `S001_B.dltree` style file name for one component tree.
pub fn tree_file_name(subject: &str, region: Region) -> String {
    format!("{subject}_{}.dltree", region.code())
}

pub const COVARIATE_HEADER: &str = "subject\tage";

/// Parses a tab-separated `subject age` table. A leading `subject` header
/// row, blank lines and `#` comments are skipped.
pub fn parse_covariates(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        if fields.first() == Some(&"subject") && out.is_empty() {
            continue;
        }
        let err = |col: usize, m: String| Error::Parse(ParseError::new(line, col, ParseErrorKind::Syntax(m)));
        if fields.len() != 2 {
            return Err(err(1, format!("expected 2 tab-separated fields, found {}", fields.len())));
        }
        let age: f64 = fields[1]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| err(fields[0].len() + 2, format!("bad covariate `{}`", fields[1])))?;
        if out.insert(fields[0].to_string(), age).is_some() {
            return Err(Error::Parse(ParseError::new(
                line,
                1,
                ParseErrorKind::DuplicateId(fields[0].to_string()),
            )));
        }
    }
    Ok(out)
}

pub fn serialize_covariates(covariates: &BTreeMap<String, f64>) -> String {
    let mut s = String::from(COVARIATE_HEADER);
    s.push('\n');
    for (subject, age) in covariates {
        s.push_str(&format!("{subject}\t{age}\n"));
    }
    s
}

/// Fills in each entry's covariate; fails listing every subject that has none.
pub fn attach_covariates(entries: &mut [CorpusEntry], covariates: &BTreeMap<String, f64>) -> Result<()> {
    let mut missing = BTreeSet::new();
    for e in entries.iter_mut() {
        match covariates.get(&e.tree.subject_id) {
            Some(&v) => e.covariate = Some(v),
            None => {
                missing.insert(e.tree.subject_id.clone());
            }
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingCovariates(missing.into_iter().collect()))
    }
}

/// Per-subject covariates of a corpus, first value wins.
pub fn collect_covariates(entries: &[CorpusEntry]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for e in entries {
        if let Some(v) = e.covariate {
            out.entry(e.tree.subject_id.clone()).or_insert(v);
        }
    }
    out
}

/// Orders entries by subject, then region.
pub fn sort_entries(entries: &mut [CorpusEntry]) {
    entries.sort_by(|a, b| {
        (a.tree.subject_id.as_str(), a.tree.region).cmp(&(b.tree.subject_id.as_str(), b.tree.region))
    });
}

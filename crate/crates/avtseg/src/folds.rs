//! Fold split files.
//!
//! ```text
//! # avtseg folds v1
//! k = 5
//! seed = 42
//! case_0001 3
//! case_0002 0
//! ```
//!
//! Cases are listed in input order with their fold index.

use avtseg_core::metrics::FoldSplit;

#[derive(Debug, thiserror::Error)]
#[error("folds line {line}: {reason}")]
pub struct FoldsError {
    pub line: usize,
    pub reason: String,
}

/// Case ids, one per line; blank lines and `#` comments are skipped.
pub fn parse_ids(text: &str) -> Result<Vec<String>, FoldsError> {
    let mut ids = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.split_whitespace().count() != 1 {
            return Err(FoldsError {
                line: n + 1,
                reason: "case ids may not contain whitespace".into(),
            });
        }
        ids.push(line.to_string());
    }
    Ok(ids)
}

pub fn format_folds(split: &FoldSplit) -> String {
    let mut out = format!("# avtseg folds v1\nk = {}\nseed = {}\n", split.k, split.seed);
    for id in &split.case_ids {
        out.push_str(&format!("{id} {}\n", split.fold_of[id]));
    }
    out
}

pub fn parse_folds(text: &str) -> Result<FoldSplit, FoldsError> {
    let mut split = FoldSplit {
        case_ids: Vec::new(),
        fold_of: Default::default(),
        seed: 0,
        k: 0,
    };
    for (n, line) in text.lines().enumerate() {
        let err = |reason: &str| FoldsError {
            line: n + 1,
            reason: reason.into(),
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            let value = value.trim();
            match key.trim() {
                "k" => split.k = value.parse().map_err(|_| err("bad k"))?,
                "seed" => split.seed = value.parse().map_err(|_| err("bad seed"))?,
                _ => return Err(err("unknown key")),
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(id), Some(fold), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err("expected `<case id> <fold>`"));
        };
        let fold: usize = fold.parse().map_err(|_| err("bad fold index"))?;
        if fold >= split.k {
            return Err(err("fold index out of range"));
        }
        if split.fold_of.insert(id.to_string(), fold).is_some() {
            return Err(err("duplicate case id"));
        }
        split.case_ids.push(id.to_string());
    }
    Ok(split)
}

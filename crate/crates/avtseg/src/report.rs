//! Metrics report text format.
//!
//! One record per line, a tag followed by `key=value` fields:
//!
//! ```text
//! # avtseg metrics report v1
//! case id=<id> fold=<k|-> dsc=<f> iou=<f> recall=<f> precision=<f> hd=<mm|-> hd95=<mm|-> both_empty=<bool>
//! error id=<id> fold=<k|-> reason="<text>"
//! fold index=<k> n=<cases> dsc=<%> iou=<%> recall=<%> precision=<%> hd=<mm|-> hd95=<mm|->
//! overall n=<rows> dsc=<%> iou=<%> recall=<%> precision=<%> hd=<mm|-> hd95=<mm|->
//! ```
//!
//! Case fractions carry six decimals and distances four. Aggregates are
//! percentages rounded half up to one decimal, distances to two. When folds
//! are known the overall record averages the fold records; otherwise it
//! averages all cases.
//!
//! Aggregate mode reads lines of the form `<label> dsc=.. iou=.. recall=..
//! precision=.. [hd=..] [hd95=..]` and averages them unchanged in unit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use avtseg_core::metrics::{aggregate_folds, mean_row, round_half_up, MetricsRow};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Engine(#[from] avtseg_core::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseRecord {
    pub row: MetricsRow,
    pub fold: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseFailure {
    pub case_id: String,
    pub fold: Option<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub n: usize,
    pub row: MetricsRow,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Report {
    pub cases: Vec<CaseRecord>,
    pub failures: Vec<CaseFailure>,
    pub folds: BTreeMap<usize, Aggregate>,
    pub overall: Option<Aggregate>,
}

impl Report {
    pub fn build(cases: Vec<CaseRecord>, failures: Vec<CaseFailure>) -> Result<Self, ReportError> {
        let mut by_fold: BTreeMap<usize, Vec<MetricsRow>> = BTreeMap::new();
        for c in &cases {
            if let Some(f) = c.fold {
                by_fold.entry(f).or_default().push(c.row.clone());
            }
        }
        let mut folds = BTreeMap::new();
        for (f, rows) in &by_fold {
            folds.insert(
                *f,
                Aggregate {
                    n: rows.len(),
                    row: mean_row(&format!("fold{f}"), rows)?,
                },
            );
        }
        let overall = if !folds.is_empty() {
            let rows: Vec<MetricsRow> = folds.values().map(|a| a.row.clone()).collect();
            Some(Aggregate {
                n: rows.len(),
                row: aggregate_folds(&rows)?,
            })
        } else if !cases.is_empty() {
            let rows: Vec<MetricsRow> = cases.iter().map(|c| c.row.clone()).collect();
            Some(Aggregate {
                n: rows.len(),
                row: mean_row("overall", &rows)?,
            })
        } else {
            None
        };
        Ok(Self {
            cases,
            failures,
            folds,
            overall,
        })
    }
}

fn fold_text(f: Option<usize>) -> String {
    f.map_or_else(|| "-".to_string(), |f| f.to_string())
}

fn mm(d: Option<f64>, decimals: usize) -> String {
    d.map_or_else(|| "-".to_string(), |d| format!("{d:.decimals$}"))
}

fn pct(x: f64) -> String {
    format!("{:.1}", round_half_up(100.0 * x, 1))
}

fn aggregate_fields(a: &Aggregate) -> String {
    let r = &a.row;
    format!(
        "n={} dsc={} iou={} recall={} precision={} hd={} hd95={}",
        a.n,
        pct(r.dsc),
        pct(r.iou),
        pct(r.recall),
        pct(r.precision),
        mm(r.hd.map(|d| round_half_up(d, 2)), 2),
        mm(r.hd95.map(|d| round_half_up(d, 2)), 2),
    )
}

pub fn format_report(report: &Report) -> String {
    let mut out = String::from("# avtseg metrics report v1\n");
    for c in &report.cases {
        let r = &c.row;
        let _ = writeln!(
            out,
            "case id={} fold={} dsc={:.6} iou={:.6} recall={:.6} precision={:.6} hd={} hd95={} both_empty={}",
            r.case_id,
            fold_text(c.fold),
            r.dsc,
            r.iou,
            r.recall,
            r.precision,
            mm(r.hd, 4),
            mm(r.hd95, 4),
            r.both_empty
        );
    }
    for f in &report.failures {
        let reason = f.reason.replace('"', "'").replace('\n', " ");
        let _ = writeln!(out, "error id={} fold={} reason=\"{reason}\"", f.case_id, fold_text(f.fold));
    }
    for (k, a) in &report.folds {
        let _ = writeln!(out, "fold index={k} {}", aggregate_fields(a));
    }
    if let Some(a) = &report.overall {
        let _ = writeln!(out, "overall {}", aggregate_fields(a));
    }
    out
}

/// Splits a record line into its tag and `key=value` fields. Values may be
/// double-quoted to contain spaces.
pub fn parse_record(line: &str) -> Option<(&str, Vec<(&str, &str)>)> {
    let line = line.trim();
    let (tag, mut rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let mut fields = Vec::new();
    loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        let (key, after) = rest.split_once('=')?;
        if key.is_empty() || key.contains(char::is_whitespace) {
            return None;
        }
        let (value, tail) = if let Some(quoted) = after.strip_prefix('"') {
            let end = quoted.find('"')?;
            (&quoted[..end], &quoted[end + 1..])
        } else {
            after.split_once(char::is_whitespace).unwrap_or((after, ""))
        };
        fields.push((key, value));
        rest = tail;
    }
    Some((tag, fields))
}

/// Reads aggregate-mode input rows.
pub fn parse_aggregate_input(text: &str) -> Result<Vec<MetricsRow>, ReportError> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let err = |reason: String| ReportError::Parse { line: n + 1, reason };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (label, fields) = parse_record(trimmed).ok_or_else(|| err("malformed record".into()))?;
        let get = |key: &str| fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let num = |key: &str| -> Result<Option<f64>, ReportError> {
            match get(key) {
                None | Some("-") => Ok(None),
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(Some)
                    .ok_or_else(|| err(format!("bad value for {key}"))),
            }
        };
        let need = |key: &str| num(key)?.ok_or_else(|| err(format!("missing {key}")));
        rows.push(MetricsRow {
            case_id: label.to_string(),
            dsc: need("dsc")?,
            iou: need("iou")?,
            recall: need("recall")?,
            precision: need("precision")?,
            hd: num("hd")?,
            hd95: num("hd95")?,
            both_empty: false,
        });
    }
    Ok(rows)
}

/// The average of aggregate-mode rows, rounded half up to one decimal.
pub fn format_aggregate(rows: &[MetricsRow]) -> Result<String, ReportError> {
    let avg = aggregate_folds(rows)?;
    let r1 = |x: f64| format!("{:.1}", round_half_up(x, 1));
    let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), r1);
    Ok(format!(
        "average n={} dsc={} iou={} recall={} precision={} hd={} hd95={}\n",
        rows.len(),
        r1(avg.dsc),
        r1(avg.iou),
        r1(avg.recall),
        r1(avg.precision),
        opt(avg.hd),
        opt(avg.hd95)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, dsc: f64) -> MetricsRow {
        MetricsRow {
            case_id: id.into(),
            dsc,
            iou: dsc / (2.0 - dsc),
            recall: dsc,
            precision: dsc,
            hd: Some(2.0),
            hd95: None,
            both_empty: false,
        }
    }

    #[test]
    fn record_parsing_handles_quotes() {
        let (tag, fields) = parse_record("error id=a fold=- reason=\"dims differ: 1 vs 2\"").unwrap();
        assert_eq!(tag, "error");
        assert_eq!(fields, vec![("id", "a"), ("fold", "-"), ("reason", "dims differ: 1 vs 2")]);
        assert!(parse_record("case id").is_none());
    }

    #[test]
    fn overall_averages_folds_not_cases() {
        let cases = vec![
            CaseRecord { row: row("a", 1.0), fold: Some(0) },
            CaseRecord { row: row("b", 0.5), fold: Some(1) },
            CaseRecord { row: row("c", 0.5), fold: Some(1) },
        ];
        let report = Report::build(cases, vec![]).unwrap();
        assert_eq!(report.folds[&1].n, 2);
        assert_eq!(report.overall.as_ref().unwrap().row.dsc, 0.75);
        let text = format_report(&report);
        assert!(text.contains("overall n=2 dsc=75.0"));
        assert!(text.contains("case id=a fold=0 dsc=1.000000"));
        assert!(text.contains("hd=2.0000 hd95=-"));
    }

    #[test]
    fn aggregate_mode() {
        let rows = parse_aggregate_input("# label\nf0 dsc=1 iou=2 recall=3 precision=4\nf1 dsc=2 iou=3 recall=4 precision=5 hd=7\n").unwrap();
        assert_eq!(format_aggregate(&rows).unwrap(), "average n=2 dsc=1.5 iou=2.5 recall=3.5 precision=4.5 hd=7.0 hd95=-\n");
        assert!(parse_aggregate_input("f0 dsc=1\n").is_err());
        assert!(parse_aggregate_input("f0 dsc=x iou=1 recall=1 precision=1\n").is_err());
    }
}

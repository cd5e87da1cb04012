//! Run history as CSV, one row per adaptive step.

use std::path::Path;

use crate::adapt::AdaptRecord;
use crate::error::{Error, Result};

/// The CSV columns of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub step: usize,
    pub n_dofs: usize,
    pub n_elements: usize,
    pub lambdas: Vec<f64>,
    pub estimate: f64,
    pub effectivity: Option<f64>,
    pub seconds: Option<f64>,
}

impl From<&AdaptRecord> for HistoryRow {
    fn from(r: &AdaptRecord) -> Self {
        Self {
            step: r.step,
            n_dofs: r.n_dofs,
            n_elements: r.n_elements,
            lambdas: r.lambdas.clone(),
            estimate: r.estimate,
            effectivity: r.effectivity,
            seconds: r.seconds,
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn real(v: f64) -> String {
    format!("{v:e}")
}

/// CSV text for `rows`; eigenvalue columns run to the longest row.
pub fn history_string(rows: &[HistoryRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::param("records", "history is empty"));
    }
    let m = rows.iter().map(|r| r.lambdas.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string(), "ndofs".into(), "nelems".into()];
    header.extend((1..=m).map(|i| format!("lambda_{i}")));
    header.extend(["estimate".into(), "effectivity".into(), "seconds".into()]);
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut row = vec![r.step.to_string(), r.n_dofs.to_string(), r.n_elements.to_string()];
        row.extend((0..m).map(|i| r.lambdas.get(i).map_or(String::new(), |&v| real(v))));
        row.push(real(r.estimate));
        row.push(r.effectivity.map_or(String::new(), real));
        row.push(r.seconds.map_or(String::new(), real));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}

pub fn export_history(records: &[AdaptRecord], path: &Path) -> Result<()> {
    let rows: Vec<HistoryRow> = records.iter().map(HistoryRow::from).collect();
    std::fs::write(path, history_string(&rows)?)?;
    Ok(())
}

/// Parses text written by [`history_string`].
pub fn parse_history(text: &str) -> Result<Vec<HistoryRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    let m = header.iter().filter(|h| h.starts_with("lambda_")).count();
    if header.len() != m + 6 {
        return Err(Error::param("history", "unexpected header"));
    }
    let bad = |line: usize, what: &str| Error::ConfigParse {
        line,
        message: format!("bad {what} in history"),
    };
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let int = |j: usize| rec[j].parse::<usize>().map_err(|_| bad(line, &header[j]));
        let opt = |j: usize| -> Result<Option<f64>> {
            if rec[j].is_empty() {
                Ok(None)
            } else {
                rec[j].parse().map(Some).map_err(|_| bad(line, &header[j]))
            }
        };
        let mut lambdas = Vec::new();
        for j in 3..3 + m {
            if let Some(v) = opt(j)? {
                lambdas.push(v);
            }
        }
        rows.push(HistoryRow {
            step: int(0)?,
            n_dofs: int(1)?,
            n_elements: int(2)?,
            lambdas,
            estimate: opt(3 + m)?.ok_or_else(|| bad(line, "estimate"))?,
            effectivity: opt(4 + m)?,
            seconds: opt(5 + m)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(step: usize, eff: Option<f64>) -> HistoryRow {
        HistoryRow {
            step,
            n_dofs: 100 + step,
            n_elements: 40 + step,
            lambdas: vec![5.4 + 0.1 / (step + 1) as f64, 7.0183848, 1e-300],
            estimate: 0.1 / 3.0,
            effectivity: eff,
            seconds: None,
        }
    }

    #[test]
    fn single_row_file() {
        let s = history_string(&[row(0, None)]).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "step,ndofs,nelems,lambda_1,lambda_2,lambda_3,estimate,effectivity,seconds");
        assert!(lines[1].ends_with(",,"), "{}", lines[1]);
        assert!(history_string(&[]).is_err());
    }

    #[test]
    fn round_trip() {
        let rows = vec![row(0, Some(1.25)), row(1, Some(0.1 + 0.2)), HistoryRow { seconds: Some(0.5), ..row(2, Some(3.0)) }];
        let back = parse_history(&history_string(&rows).unwrap()).unwrap();
        assert_eq!(back, rows);
        assert!(back.iter().all(|r| r.effectivity.is_some()));
    }
}

//! Text format for count data.
//!
//! ```text
//! # comment
//! n=8 total_counts=per-row
//! x1,x2,y,b,count
//! ```
//!
//! or, with `total_counts=<int>`, probability rows `x1,x2,y,p_win` that are
//! converted to counts. `y` is 1 or 2.

use std::fmt::Write as _;
use std::path::Path;

use densecode::stats::{CountRecord, ExperimentDataset};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TotalCounts {
    PerRow,
    Fixed(u64),
}

/// A parsed dataset file together with the form it was written in.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetFile {
    pub n: usize,
    pub total_counts: TotalCounts,
    /// Probability rows `(x1, x2, y, p_win)` in file order, for the
    /// probability form.
    pub win_probabilities: Vec<(usize, usize, u8, f64)>,
    /// Count rows in file order, for the raw form.
    pub records: Vec<CountRecord>,
}

fn parse_err(line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_field<T: std::str::FromStr>(line: usize, name: &str, raw: &str) -> CliResult<T> {
    raw.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {name} from {:?}", raw.trim())))
}

fn parse_header(line: usize, text: &str) -> CliResult<(usize, TotalCounts)> {
    let mut n = None;
    let mut total = None;
    for token in text.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key=value, found {token:?}")))?;
        match key {
            "n" => n = Some(parse_field::<usize>(line, "n", value)?),
            "total_counts" => {
                total = Some(if value == "per-row" {
                    TotalCounts::PerRow
                } else {
                    TotalCounts::Fixed(parse_field(line, "total_counts", value)?)
                })
            }
            other => return Err(parse_err(line, format!("unknown header key {other:?}"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(line, "header lacks n=<int>"))?;
    if n < 2 {
        return Err(parse_err(line, format!("n must be at least 2, got {n}")));
    }
    let total = total.ok_or_else(|| parse_err(line, "header lacks total_counts=<int|per-row>"))?;
    if total == TotalCounts::Fixed(0) {
        return Err(parse_err(line, "total_counts must be positive"));
    }
    Ok((n, total))
}

fn check_index(line: usize, name: &str, value: usize, n: usize) -> CliResult<()> {
    if value >= n {
        return Err(parse_err(
            line,
            format!("{name}={value} out of range [0, {n})"),
        ));
    }
    Ok(())
}

fn check_setting(line: usize, y: u8) -> CliResult<()> {
    if y != 1 && y != 2 {
        return Err(parse_err(line, format!("y={y} must be 1 or 2")));
    }
    Ok(())
}

impl DatasetFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut header = None;
        let mut win_probabilities = Vec::new();
        let mut records = Vec::new();
        let mut seen = std::collections::HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let Some((n, total)) = header else {
                header = Some(parse_header(line, content)?);
                continue;
            };
            let fields: Vec<&str> = content.split(',').collect();
            let x1: usize = parse_field(line, "x1", fields[0])?;
            match (total, fields.len()) {
                (TotalCounts::PerRow, 5) => {
                    let x2 = parse_field(line, "x2", fields[1])?;
                    let y = parse_field(line, "y", fields[2])?;
                    let b = parse_field(line, "b", fields[3])?;
                    let count = parse_field(line, "count", fields[4])?;
                    check_index(line, "x1", x1, n)?;
                    check_index(line, "x2", x2, n)?;
                    check_setting(line, y)?;
                    check_index(line, "b", b, n)?;
                    records.push(CountRecord {
                        x1,
                        x2,
                        y,
                        b,
                        count,
                    });
                }
                (TotalCounts::Fixed(_), 4) => {
                    let x2 = parse_field(line, "x2", fields[1])?;
                    let y = parse_field(line, "y", fields[2])?;
                    let p: f64 = parse_field(line, "p_win", fields[3])?;
                    check_index(line, "x1", x1, n)?;
                    check_index(line, "x2", x2, n)?;
                    check_setting(line, y)?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(parse_err(line, format!("p_win={p} outside [0, 1]")));
                    }
                    if let Some(first) = seen.insert((x1, x2, y), line) {
                        return Err(parse_err(
                            line,
                            format!(
                                "setting (x1={x1}, x2={x2}, y={y}) already given on line {first}"
                            ),
                        ));
                    }
                    win_probabilities.push((x1, x2, y, p));
                }
                (TotalCounts::PerRow, k) => {
                    return Err(parse_err(
                        line,
                        format!("expected 5 fields x1,x2,y,b,count, found {k}"),
                    ))
                }
                (TotalCounts::Fixed(_), k) => {
                    return Err(parse_err(
                        line,
                        format!("expected 4 fields x1,x2,y,p_win, found {k}"),
                    ))
                }
            }
        }
        let (n, total_counts) = header.ok_or_else(|| parse_err(1, "missing header line"))?;
        Ok(Self {
            n,
            total_counts,
            win_probabilities,
            records,
        })
    }

    pub fn read(path: &Path) -> CliResult<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::Validation(format!("{}: not valid UTF-8", path.display())))?;
        Ok((Self::parse(text)?, bytes))
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        let total = match self.total_counts {
            TotalCounts::PerRow => "per-row".to_string(),
            TotalCounts::Fixed(t) => t.to_string(),
        };
        let _ = writeln!(out, "n={} total_counts={}", self.n, total);
        match self.total_counts {
            TotalCounts::PerRow => {
                for r in &self.records {
                    let _ = writeln!(out, "{},{},{},{},{}", r.x1, r.x2, r.y, r.b, r.count);
                }
            }
            TotalCounts::Fixed(_) => {
                for (x1, x2, y, p) in &self.win_probabilities {
                    let _ = writeln!(out, "{x1},{x2},{y},{p}");
                }
            }
        }
        out
    }

    /// Raw-count form of a dataset.
    pub fn from_dataset(ds: &ExperimentDataset) -> Self {
        Self {
            n: ds.n(),
            total_counts: TotalCounts::PerRow,
            win_probabilities: Vec::new(),
            records: ds.records().to_vec(),
        }
    }

    /// Replaces the assumed total of a probability-form file.
    pub fn with_total_counts(mut self, total: u64) -> CliResult<Self> {
        match self.total_counts {
            TotalCounts::PerRow => Err(CliError::Validation(
                "a total-count override only applies to probability-form datasets".into(),
            )),
            TotalCounts::Fixed(_) if total == 0 => {
                Err(CliError::Validation("total counts must be positive".into()))
            }
            TotalCounts::Fixed(_) => {
                self.total_counts = TotalCounts::Fixed(total);
                Ok(self)
            }
        }
    }

    /// Event counts; probability rows become `round(p · total)` wins and the
    /// remaining losses on outcome `x_y + 1 mod n`.
    pub fn to_dataset(&self) -> CliResult<ExperimentDataset> {
        let records = match self.total_counts {
            TotalCounts::PerRow => self.records.clone(),
            TotalCounts::Fixed(total) => {
                let mut records = Vec::with_capacity(2 * self.win_probabilities.len());
                for &(x1, x2, y, p) in &self.win_probabilities {
                    let target = if y == 1 { x1 } else { x2 };
                    let wins = (p * total as f64).round() as u64;
                    records.push(CountRecord {
                        x1,
                        x2,
                        y,
                        b: target,
                        count: wins,
                    });
                    records.push(CountRecord {
                        x1,
                        x2,
                        y,
                        b: (target + 1) % self.n,
                        count: total - wins,
                    });
                }
                records
            }
        };
        Ok(ExperimentDataset::new(self.n, records)?)
    }
}

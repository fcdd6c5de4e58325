//! CSV rows: `mode,N,d,heads,reps,median_seconds,peak_elements` per cell,
//! `mode,SLOPE,exponent,r2` per mode. A failed cell carries `FAILED` in the
//! time column and the reason in the memory column.

use std::fmt::Write as _;

use crate::attention::{AttentionKind, AttentionMode};
use crate::bench::{fit_slope, BenchRecord, Cell, SlopeFit, SuiteResult};
use crate::error::{Error, Result};

pub const HEADER: &str = "mode,N,d,heads,reps,median_seconds,peak_elements";

fn mode_label(mode: AttentionMode) -> String {
    if mode.gated {
        mode.kind.name().to_string()
    } else {
        format!("{}-nogate", mode.kind.name())
    }
}

fn parse_mode(s: &str) -> Result<AttentionMode> {
    match s.strip_suffix("-nogate") {
        Some(kind) => Ok(AttentionMode {
            kind: kind.parse()?,
            gated: false,
        }),
        None => Ok(AttentionMode {
            kind: s.parse::<AttentionKind>()?,
            gated: true,
        }),
    }
}

pub fn write_csv(result: &SuiteResult) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    for cell in &result.cells {
        match cell {
            Cell::Ok(r) => writeln!(
                out,
                "{},{},{},{},{},{:.6e},{}",
                mode_label(r.mode),
                r.n,
                r.d,
                r.heads,
                r.reps,
                r.median_seconds,
                r.peak_elements
            ),
            Cell::Failed {
                mode,
                n,
                d,
                heads,
                reps,
                reason,
            } => {
                writeln!(
                    out,
                    "{},{n},{d},{heads},{reps},FAILED,{reason}",
                    mode_label(*mode)
                )
            }
        }
        .unwrap();
    }
    for (mode, fit) in &result.slopes {
        match fit {
            Some(f) => writeln!(
                out,
                "{},SLOPE,{:.4},{:.4}",
                mode_label(*mode),
                f.exponent,
                f.r2
            ),
            None => writeln!(out, "{},SLOPE,NA,NA", mode_label(*mode)),
        }
        .unwrap();
    }
    out
}

/// Blanks the timing-derived fields (cell times, slope exponents and fits)
/// so two runs can be compared byte for byte.
pub fn strip_timing(csv: &str) -> String {
    let mut out = String::new();
    for line in csv.lines() {
        let mut fields: Vec<&str> = line.split(',').collect();
        if fields.get(1) == Some(&"SLOPE") {
            fields.truncate(2);
        } else if fields.len() == 7 && fields[5] != "FAILED" && line != HEADER {
            fields[5] = "-";
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// A parsed CSV line.
#[derive(Debug, Clone, PartialEq)]
pub enum CsvRow {
    Cell(Cell),
    Slope {
        mode: AttentionMode,
        fit: Option<(f64, f64)>,
    },
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == HEADER) {
            continue;
        }
        let bad = |what: &str| Error::Format(format!("line {}: {what}: {line:?}", lineno + 1));
        let f: Vec<&str> = line.split(',').collect();
        let mode = parse_mode(f[0])?;
        if f.get(1) == Some(&"SLOPE") {
            if f.len() != 4 {
                return Err(bad("expected 4 fields in a summary row"));
            }
            let fit = match (f[2].parse::<f64>(), f[3].parse::<f64>()) {
                (Ok(e), Ok(r)) => Some((e, r)),
                _ => None,
            };
            rows.push(CsvRow::Slope { mode, fit });
            continue;
        }
        if f.len() != 7 {
            return Err(bad("expected 7 fields"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad integer"));
        let (n, d, heads, reps) = (num(f[1])?, num(f[2])?, num(f[3])?, num(f[4])?);
        let cell = if f[5] == "FAILED" {
            Cell::Failed {
                mode,
                n,
                d,
                heads,
                reps,
                reason: f[6].to_string(),
            }
        } else {
            Cell::Ok(BenchRecord {
                mode,
                n,
                d,
                heads,
                reps,
                median_seconds: f[5].parse().map_err(|_| bad("bad time"))?,
                peak_elements: num(f[6])?,
            })
        };
        rows.push(CsvRow::Cell(cell));
    }
    Ok(rows)
}

/// Refits the per-mode time exponents of the cell rows in a CSV file and
/// renders them as summary rows.
pub fn summary_rows(rows: &[CsvRow]) -> Vec<(AttentionMode, Option<SlopeFit>)> {
    let mut modes: Vec<AttentionMode> = Vec::new();
    for row in rows {
        if let CsvRow::Cell(c) = row {
            if !modes.contains(&c.mode()) {
                modes.push(c.mode());
            }
        }
    }
    modes
        .into_iter()
        .map(|mode| {
            let mut points: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| match r {
                    CsvRow::Cell(Cell::Ok(rec)) if rec.mode == mode => {
                        Some((rec.n as f64, rec.median_seconds))
                    }
                    _ => None,
                })
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            (mode, fit_slope(&points).ok())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let fla = AttentionMode::gated(AttentionKind::Fla);
        let soft = AttentionMode {
            kind: AttentionKind::Softmax,
            gated: false,
        };
        let cells = vec![
            Cell::Ok(BenchRecord {
                mode: fla,
                n: 1024,
                d: 32,
                heads: 4,
                reps: 3,
                median_seconds: 0.5,
                peak_elements: 99,
            }),
            Cell::Ok(BenchRecord {
                mode: fla,
                n: 2048,
                d: 32,
                heads: 4,
                reps: 3,
                median_seconds: 1.0,
                peak_elements: 198,
            }),
            Cell::Ok(BenchRecord {
                mode: fla,
                n: 4096,
                d: 32,
                heads: 4,
                reps: 3,
                median_seconds: 2.0,
                peak_elements: 396,
            }),
            Cell::Failed {
                mode: soft,
                n: 4096,
                d: 32,
                heads: 4,
                reps: 3,
                reason: "out-of-memory".into(),
            },
        ];
        let slopes = vec![
            (
                fla,
                fit_slope(&[(1024.0, 0.5), (2048.0, 1.0), (4096.0, 2.0)]).ok(),
            ),
            (soft, None),
        ];
        let text = write_csv(&SuiteResult {
            cells: cells.clone(),
            slopes,
        });
        assert!(text.starts_with(HEADER));
        assert!(text.contains("softmax-nogate,4096,32,4,3,FAILED,out-of-memory"));
        assert!(text.contains("fla,SLOPE,1.0000,1.0000"));
        let rows = parse_csv(&text).unwrap();
        let parsed: Vec<Cell> = rows
            .iter()
            .filter_map(|r| match r {
                CsvRow::Cell(c) => Some(c.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(parsed, cells);
        let refit = summary_rows(&rows);
        assert!((refit[0].1.unwrap().exponent - 1.0).abs() < 1e-12);
        assert!(refit[1].1.is_none());
    }
}

//! CSV + JSON sidecar output. Column orders are frozen; changing them
//! breaks the golden tests.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::{CellMaxima, CellSummary, CensusReport, MaxDegReport, SkippedCell, TailReport};
use crate::error::{Error, Result};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

pub const MAXDEG_COLUMNS: &str = "cell,n,c,r,trial,seed,status,max_degree,argmax_vertex,d_star,ratio,exceeds_upper,high_degree_count";
pub const CENSUS_COLUMNS: &str =
    "cell,n,c,r,profile,count,roots,empirical,analytic,abs_dev,sigma,tolerance,within";
pub const TAIL_COLUMNS: &str =
    "cell,n,c,r,multiplier,d,trials,exceed_count,empirical,union_ln,bound,sigma,consistent";

/// Anything that can be written as one CSV table plus a JSON summary.
pub trait Report {
    fn csv_header(&self) -> String;
    fn csv_rows(&self) -> Vec<String>;
    fn summary(&self) -> serde_json::Value;
}

fn skipped_row(s: &SkippedCell, width: usize) -> String {
    // status column sits right after the four cell columns and one id column
    let mut cols = vec![
        s.cell.to_string(),
        s.n.to_string(),
        s.c.to_string(),
        s.r.to_string(),
        String::new(),
        String::new(),
        "skipped".to_string(),
    ];
    cols.resize(width, String::new());
    cols.join(",")
}

impl Report for MaxDegReport {
    fn csv_header(&self) -> String {
        if self.timing {
            format!("{MAXDEG_COLUMNS},wall_seconds")
        } else {
            MAXDEG_COLUMNS.to_string()
        }
    }

    fn csv_rows(&self) -> Vec<String> {
        let width = self.csv_header().split(',').count();
        let mut rows: Vec<(usize, String)> = self
            .records
            .iter()
            .map(|r| {
                let mut line = format!(
                    "{},{},{},{},{},{},ok,{},{},{},{},{},{}",
                    r.cell,
                    r.n,
                    r.c,
                    r.r,
                    r.trial,
                    r.seed,
                    r.max_degree,
                    r.argmax_vertex,
                    r.d_star,
                    r.ratio,
                    r.exceeds_upper,
                    r.high_degree_count
                );
                if self.timing {
                    line.push_str(&format!(",{}", r.wall_seconds));
                }
                (r.cell, line)
            })
            .collect();
        rows.extend(self.skipped.iter().map(|s| (s.cell, skipped_row(s, width))));
        rows.sort_by_key(|(cell, _)| *cell);
        rows.into_iter().map(|(_, l)| l).collect()
    }

    fn summary(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct S<'a> {
            summaries: &'a [CellSummary],
            skipped: &'a [SkippedCell],
        }
        serde_json::to_value(S {
            summaries: &self.summaries,
            skipped: &self.skipped,
        })
        .expect("plain data")
    }
}

fn join_profile(p: &[u64]) -> String {
    p.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

impl Report for CensusReport {
    fn csv_header(&self) -> String {
        CENSUS_COLUMNS.to_string()
    }

    fn csv_rows(&self) -> Vec<String> {
        let width = CENSUS_COLUMNS.split(',').count();
        let mut rows: Vec<(usize, String)> = self
            .rows
            .iter()
            .map(|r| {
                (
                    r.cell,
                    format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                        r.cell,
                        r.n,
                        r.c,
                        r.r,
                        join_profile(&r.profile),
                        r.count,
                        r.roots,
                        r.empirical,
                        r.analytic,
                        r.abs_dev,
                        r.sigma,
                        r.tolerance,
                        r.within
                    ),
                )
            })
            .collect();
        rows.extend(self.skipped.iter().map(|s| (s.cell, skipped_row(s, width))));
        rows.sort_by_key(|(cell, _)| *cell);
        rows.into_iter().map(|(_, l)| l).collect()
    }

    fn summary(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Cell {
            cell: usize,
            roots: u64,
            profiles: usize,
            all_within: bool,
        }
        let mut cells: Vec<Cell> = Vec::new();
        for row in &self.rows {
            match cells.last_mut() {
                Some(c) if c.cell == row.cell => {
                    c.profiles += 1;
                    c.all_within &= row.within;
                }
                _ => cells.push(Cell {
                    cell: row.cell,
                    roots: row.roots,
                    profiles: 1,
                    all_within: row.within,
                }),
            }
        }
        serde_json::json!({ "summaries": cells, "skipped": self.skipped })
    }
}

impl Report for TailReport {
    fn csv_header(&self) -> String {
        TAIL_COLUMNS.to_string()
    }

    fn csv_rows(&self) -> Vec<String> {
        let width = TAIL_COLUMNS.split(',').count();
        let mut rows: Vec<(usize, String)> = self
            .rows
            .iter()
            .map(|r| {
                (
                    r.cell,
                    format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                        r.cell,
                        r.n,
                        r.c,
                        r.r,
                        r.multiplier,
                        r.d,
                        r.trials,
                        r.exceed_count,
                        r.empirical,
                        r.union_ln,
                        r.bound,
                        r.sigma,
                        r.consistent
                    ),
                )
            })
            .collect();
        rows.extend(self.skipped.iter().map(|s| (s.cell, skipped_row(s, width))));
        rows.sort_by_key(|(cell, _)| *cell);
        rows.into_iter().map(|(_, l)| l).collect()
    }

    fn summary(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct S<'a> {
            maxima: &'a [CellMaxima],
            skipped: &'a [SkippedCell],
        }
        serde_json::to_value(S {
            maxima: &self.maxima,
            skipped: &self.skipped,
        })
        .expect("plain data")
    }
}

/// `out.csv` -> `out.json`; an `.json` output gets `.meta.json` instead.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let candidate = path.with_extension("json");
    if candidate == path {
        path.with_extension("meta.json")
    } else {
        candidate
    }
}

/// Writes the CSV at `path` and the JSON sidecar next to it.
pub fn emit_report(report: &impl Report, cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let write_csv = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{}", report.csv_header())?;
        for row in report.csv_rows() {
            writeln!(w, "{row}")?;
        }
        w.flush()
    };
    write_csv(&mut w).map_err(|e| Error::io(path, e))?;

    let sidecar = sidecar_path(path);
    let doc = serde_json::json!({
        "version": VERSION,
        "config": cfg.echo(),
        "report": report.summary(),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("plain data");
    text.push('\n');
    std::fs::write(&sidecar, text).map_err(|e| Error::io(&sidecar, e))
}

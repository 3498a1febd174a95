use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ExperimentReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub dat: PathBuf,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn log_num(v: f64) -> String {
    if v > 0.0 {
        num(v.ln())
    } else {
        "NaN".to_string()
    }
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,measured,predictor,ratio");
        for c in &self.extra_columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{},{}", r.n, num(r.measured), num(r.predictor), num(r.ratio));
            for v in &r.extra {
                let _ = write!(out, ",{}", num(*v));
            }
            out.push('\n');
        }
        out
    }

    /// Gnuplot data: `log N`, `log measured`, `log predictor`.
    pub fn to_dat(&self) -> String {
        let mut out = format!("# {}: log(N) log(measured) log(predictor)\n", self.experiment.name());
        for r in &self.rows {
            let _ = writeln!(out, "{} {} {}", log_num(r.n as f64), log_num(r.measured), log_num(r.predictor));
        }
        out
    }

    pub fn to_summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            experiment: &'a str,
            rows: usize,
            fit: &'a Option<crate::discrepancy::RateFit>,
            checks: &'a std::collections::BTreeMap<String, serde_json::Value>,
            config: &'a super::ExperimentConfig,
        }
        let s = Summary {
            experiment: self.experiment.name(),
            rows: self.rows.len(),
            fit: &self.fit,
            checks: &self.checks,
            config: &self.config,
        };
        let mut text = serde_json::to_string_pretty(&s).expect("summary serializes");
        text.push('\n');
        text
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `<experiment>.csv`, `<experiment>.summary.json` and `<experiment>.dat` into `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<ReportFiles> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let stem = report.experiment.name();
    let files = ReportFiles {
        csv: dir.join(format!("{stem}.csv")),
        summary: dir.join(format!("{stem}.summary.json")),
        dat: dir.join(format!("{stem}.dat")),
    };
    write(&files.csv, &report.to_csv())?;
    write(&files.summary, &report.to_summary_json())?;
    write(&files.dat, &report.to_dat())?;
    Ok(files)
}

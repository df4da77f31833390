//! Report envelopes, CSV rendering and atomic file output.

use std::io::{self, Write};
use std::path::Path;

use embcorr::eval::SweepReport;
use embcorr::MeasureKind;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::RunConfig;

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(config: &'a RunConfig, result: T) -> Self {
        Envelope {
            toolkit: "embcorr",
            version: embcorr::VERSION,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> io::Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }
}

/// CSV body preceded by `#` lines carrying the toolkit version and config.
pub fn csv_with_config(config: &RunConfig, body: &[u8]) -> io::Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "# embcorr {}", embcorr::VERSION)?;
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    out.extend_from_slice(body);
    Ok(out)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn pct(v: f64, decimals: usize) -> String {
    if v.is_finite() {
        format!("{:.*}", decimals, 100.0 * v)
    } else {
        String::new()
    }
}

/// One row per embeddings × task (and per STS subtask), one column per
/// measure. Scores ×100 with one decimal.
pub fn scores_csv(report: &SweepReport, measures: &[MeasureKind]) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["embeddings", "task", "subtask", "N", "V", "coverage"];
    header.extend(measures.iter().map(|m| m.code()));
    w.write_record(&header)?;

    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in &report.reports {
        let key = (r.embeddings.as_str(), r.task.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    for (emb, task) in keys {
        let cell: Vec<_> = report
            .reports
            .iter()
            .filter(|r| r.embeddings == emb && r.task == task)
            .collect();
        let first = cell[0];
        let n = first
            .normality
            .map(|n| format!("{:.2}", n.proportion))
            .unwrap_or_default();
        let v = report
            .family_verdicts
            .iter()
            .find(|f| f.embeddings == emb && f.task == task)
            .map(|f| f.label.clone())
            .unwrap_or_default();
        let mut row = vec![
            emb.to_owned(),
            task.to_owned(),
            String::new(),
            n,
            v,
            format!("{:.4}", first.coverage),
        ];
        for m in measures {
            let score = cell.iter().find(|r| r.measure == *m).map(|r| pct(r.score, 1));
            row.push(score.unwrap_or_default());
        }
        w.write_record(&row)?;

        for (i, sub) in first.subtasks.iter().enumerate() {
            let mut row = vec![
                emb.to_owned(),
                task.to_owned(),
                sub.name.clone(),
                String::new(),
                String::new(),
                format!("{:.4}", sub.scored_pairs as f64 / sub.total_pairs as f64),
            ];
            for m in measures {
                let score = cell
                    .iter()
                    .find(|r| r.measure == *m)
                    .and_then(|r| r.subtasks.get(i))
                    .and_then(|s| s.score)
                    .map(|s| pct(s, 1));
                row.push(score.unwrap_or_default());
            }
            w.write_record(&row)?;
        }
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

/// BCa comparisons; scores and interval endpoints ×100 with two decimals.
pub fn comparisons_csv(report: &SweepReport) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "embeddings",
        "task",
        "subtask",
        "measure_a",
        "measure_b",
        "score_a",
        "score_b",
        "lower",
        "upper",
        "verdict",
        "error",
    ])?;
    let pairwise = report.reports.iter().flat_map(|r| {
        r.verdicts
            .iter()
            .map(move |c| (r.embeddings.as_str(), r.task.as_str(), c))
    });
    let family = report
        .family_verdicts
        .iter()
        .map(|f| (f.embeddings.as_str(), f.task.as_str(), &f.comparison));
    for (emb, task, c) in pairwise.chain(family) {
        let verdict = c
            .verdict
            .map(|v| match v {
                embcorr::bootstrap::Verdict::AWins => "A_wins",
                embcorr::bootstrap::Verdict::BWins => "B_wins",
                embcorr::bootstrap::Verdict::Tie => "tie",
            })
            .unwrap_or_default();
        let (lo, hi) = c
            .interval
            .map(|ci| (pct(ci.lower, 2), pct(ci.upper, 2)))
            .unwrap_or_default();
        w.write_record([
            emb,
            task,
            c.subtask.as_deref().unwrap_or(""),
            c.measure_a.code(),
            c.measure_b.code(),
            &pct(c.score_a, 2),
            &pct(c.score_b, 2),
            &lo,
            &hi,
            verdict,
            c.error.as_deref().unwrap_or(""),
        ])?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

//! Result files: aggregate CSV, full JSON records, and `x,y,stderr` plot
//! data (one file per metric and method).

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use super::{aggregate, group_records, median, AggregateRow, ExperimentPlan, Method, OutputKind, SweepKey, TrialRecord};
use crate::{Error, Result};

pub fn write_rows_csv(rows: &[AggregateRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record([
        "m", "n", "s", "nu", "sigma", "flip_prob", "method", "time_s", "l2_err", "pre_percent",
        "iterations", "trials",
    ])
    .map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows_csv(path: impl AsRef<Path>) -> Result<Vec<AggregateRow>> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn write_records_json(records: &[TrialRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(records).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_records_json(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMetric {
    /// Exact support recovery probability (0..1).
    Recovery,
    MeanL2Err,
    /// Median l2 error; no error bar.
    MedianL2Err,
    Iterations,
}

impl PlotMetric {
    pub const ALL: [PlotMetric; 4] = [
        PlotMetric::Recovery,
        PlotMetric::MeanL2Err,
        PlotMetric::MedianL2Err,
        PlotMetric::Iterations,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotMetric::Recovery => "recovery",
            PlotMetric::MeanL2Err => "l2_err",
            PlotMetric::MedianL2Err => "median_l2_err",
            PlotMetric::Iterations => "iterations",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub stderr: Option<f64>,
}

/// One point per swept value for `method`, in order of first appearance.
pub fn plot_points(
    records: &[TrialRecord],
    sweep: SweepKey,
    method: Method,
    metric: PlotMetric,
) -> Vec<PlotPoint> {
    group_records(records)
        .into_iter()
        .filter(|g| g[0].method == method)
        .map(|g| {
            let x = sweep.value(&g[0].config);
            let vals: Vec<f64> = g
                .iter()
                .map(|r| match metric {
                    PlotMetric::Recovery => f64::from(u8::from(r.support_exact)),
                    PlotMetric::MeanL2Err | PlotMetric::MedianL2Err => r.l2_err,
                    PlotMetric::Iterations => r.iterations as f64,
                })
                .collect();
            if metric == PlotMetric::MedianL2Err {
                return PlotPoint {
                    x,
                    y: median(&vals),
                    stderr: None,
                };
            }
            let k = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / k;
            let stderr = if vals.len() > 1 {
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
                (var / k).sqrt()
            } else {
                0.0
            };
            PlotPoint {
                x,
                y: mean,
                stderr: Some(stderr),
            }
        })
        .collect()
}

pub fn write_plot_data(points: &[PlotPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for p in points {
        w.serialize(p).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_plot_data(path: impl AsRef<Path>) -> Result<Vec<PlotPoint>> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|p| p.map_err(csv_err)).collect()
}

/// Write the plan's requested outputs under `dir` with file names starting
/// with `stem`. Returns the paths written.
pub fn write_outputs(
    plan: &ExperimentPlan,
    records: &[TrialRecord],
    dir: impl AsRef<Path>,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for kind in &plan.outputs {
        match kind {
            OutputKind::Csv => {
                let rows = if records.is_empty() { Vec::new() } else { aggregate(records)? };
                let path = dir.join(format!("{stem}.csv"));
                write_rows_csv(&rows, &path)?;
                written.push(path);
            }
            OutputKind::Json => {
                let path = dir.join(format!("{stem}_records.json"));
                write_records_json(records, &path)?;
                written.push(path);
            }
            OutputKind::Plot => {
                let Some(sweep) = plan.sweep else { continue };
                for &method in &plan.methods {
                    for metric in PlotMetric::ALL {
                        let points = plot_points(records, sweep, method, metric);
                        let path = dir.join(format!("{stem}_{}_{}_vs_{}.csv", metric.name(), method, sweep.name()));
                        write_plot_data(&points, &path)?;
                        written.push(path);
                    }
                }
            }
        }
    }
    Ok(written)
}

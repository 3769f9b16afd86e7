//! Monte Carlo experiment harness.
//!
//! Every `(config, replication)` cell draws its signal, matrix, noise and
//! flips from its own ChaCha stream, selected by the cell indices under the
//! plan's base seed. Cells can therefore run in any order, on any number of
//! threads, or in isolation, and produce the same records.

mod emit;
mod metrics;
mod plan;
pub mod presets;
mod wavelet;

pub use emit::{
    plot_points, read_plot_data, read_records_json, read_rows_csv, write_outputs,
    write_plot_data, write_records_json, write_rows_csv, PlotMetric, PlotPoint,
};
pub use metrics::{estimated_support, l2_error, linf_error_scaled, psnr, support_exact};
pub use plan::{ExperimentPlan, OutputKind, SweepKey};
pub use wavelet::{wavelet_experiment, WaveletOutcome, WaveletTrial};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::baselines::{biht, exhaustive_l0, lp_estimate, BihtOptions};
use crate::model::{effective_scale, generate, ProblemConfig, SignalKind};
use crate::solver::{run_gna, SolverOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gna,
    Biht,
    Lp,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Gna, Method::Biht, Method::Lp, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gna => "gna",
            Method::Biht => "biht",
            Method::Lp => "lp",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Parameter(format!("unknown method {s:?} (gna, biht, lp, oracle)")))
    }
}

/// GNA settings shared by every trial of a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeSettings {
    pub eta: f64,
    pub max_iter: usize,
}

impl Default for DecodeSettings {
    fn default() -> Self {
        DecodeSettings {
            eta: 0.9,
            max_iter: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub x: DVector<f64>,
    pub iterations: usize,
}

/// Run one decoder on `(Psi, y)` with sparsity `s`.
pub fn decode(
    method: Method,
    psi: &DMatrix<f64>,
    y: &DVector<f64>,
    s: usize,
    settings: &DecodeSettings,
) -> Result<Decoded> {
    match method {
        Method::Gna => {
            let opts = SolverOptions::new(s).eta(settings.eta).max_iter(settings.max_iter);
            let r = run_gna(psi, y, &opts, None)?;
            Ok(Decoded {
                x: r.x_hat,
                iterations: r.iterations,
            })
        }
        Method::Biht => {
            let r = biht(psi, y, &BihtOptions::new(s))?;
            Ok(Decoded {
                x: r.x,
                iterations: r.iterations,
            })
        }
        Method::Lp => Ok(Decoded {
            x: lp_estimate(psi, y, s)?,
            iterations: 0,
        }),
        Method::Oracle => {
            let r = exhaustive_l0(psi, y, s)?;
            Ok(Decoded {
                x: r.x,
                iterations: 1,
            })
        }
    }
}

/// Metrics of one decoder on one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub config: ProblemConfig,
    pub config_index: usize,
    pub replication: usize,
    pub method: Method,
    pub l2_err: f64,
    pub support_exact: bool,
    pub iterations: usize,
    /// Decode time only.
    pub wall_time_s: f64,
    pub linf_err_scaled: Option<f64>,
    /// Decoder failure message; metrics then describe a zero estimate.
    pub error: Option<String>,
}

/// Stream id of a cell: config index in the high word, replication in the low.
pub fn cell_stream(config_index: usize, replication: usize) -> u64 {
    ((config_index as u64) << 32) | (replication as u64 & 0xffff_ffff)
}

pub fn cell_rng(base_seed: u64, config_index: usize, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(cell_stream(config_index, replication));
    rng
}

/// Generate one cell's data and run every requested method on it.
pub fn run_cell(
    plan: &ExperimentPlan,
    config_index: usize,
    replication: usize,
) -> Result<Vec<TrialRecord>> {
    let config = plan
        .grid
        .get(config_index)
        .ok_or_else(|| Error::Parameter(format!("config index {config_index} out of range")))?
        .with_seed(plan.base_seed);
    let mut rng = cell_rng(plan.base_seed, config_index, replication);
    let inst = generate(&config, &mut rng)?;
    let truth = inst.signal.to_dense();
    let c = effective_scale(config.sigma, config.flip_prob).value();
    let psi = &inst.ensemble.matrix;
    let y = &inst.observation.y;
    Ok(plan
        .methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = decode(method, psi, y, config.s, &plan.settings);
            let wall_time_s = start.elapsed().as_secs_f64();
            let (x, iterations, error) = match outcome {
                Ok(d) => (d.x, d.iterations, None),
                Err(e) => (DVector::zeros(config.n), 0, Some(e.to_string())),
            };
            TrialRecord {
                config,
                config_index,
                replication,
                method,
                l2_err: l2_error(&x, &truth),
                support_exact: support_exact(&x, &inst.signal.support),
                iterations,
                wall_time_s,
                linf_err_scaled: linf_error_scaled(&x, &truth, c),
                error,
            }
        })
        .collect())
}

/// Run every `(config, replication)` cell of the plan. Records come back
/// ordered by config, then replication, then method.
pub fn run_trials(plan: &ExperimentPlan) -> Result<Vec<TrialRecord>> {
    plan.validate()?;
    let cells: Vec<(usize, usize)> = (0..plan.grid.len())
        .flat_map(|ci| (0..plan.replications).map(move |r| (ci, r)))
        .collect();
    let work = || -> Result<Vec<TrialRecord>> {
        let nested: Vec<Vec<TrialRecord>> = cells
            .par_iter()
            .map(|&(ci, r)| run_cell(plan, ci, r))
            .collect::<Result<_>>()?;
        Ok(nested.into_iter().flatten().collect())
    };
    match plan.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Per-(config, method) summary, serialized with the column names
/// `m,n,s,nu,sigma,flip_prob,method,time_s,l2_err,pre_percent,iterations,trials`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub nu: f64,
    pub sigma: f64,
    pub flip_prob: f64,
    pub method: Method,
    #[serde(rename = "time_s")]
    pub mean_time_s: f64,
    #[serde(rename = "l2_err")]
    pub mean_l2_err: f64,
    /// Percentage of trials with exact support recovery.
    pub pre_percent: f64,
    #[serde(rename = "iterations")]
    pub mean_iterations: f64,
    #[serde(rename = "trials")]
    pub trial_count: usize,
}

type GroupKey = (usize, usize, usize, u64, u64, u64, SignalKind, Method);

fn group_key(r: &TrialRecord) -> GroupKey {
    let c = &r.config;
    (
        c.m,
        c.n,
        c.s,
        c.nu.to_bits(),
        c.sigma.to_bits(),
        c.flip_prob.to_bits(),
        c.signal,
        r.method,
    )
}

/// Group records by `(config, method)` in order of first appearance.
pub fn group_records(records: &[TrialRecord]) -> Vec<Vec<&TrialRecord>> {
    let mut index: HashMap<GroupKey, usize> = HashMap::new();
    let mut groups: Vec<Vec<&TrialRecord>> = Vec::new();
    for r in records {
        let slot = *index.entry(group_key(r)).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(r);
    }
    groups
}

pub fn aggregate(records: &[TrialRecord]) -> Result<Vec<AggregateRow>> {
    if records.is_empty() {
        return Err(Error::Empty("no trial records to aggregate"));
    }
    Ok(group_records(records)
        .into_iter()
        .map(|g| {
            let k = g.len() as f64;
            let c = g[0].config;
            let mean = |f: &dyn Fn(&TrialRecord) -> f64| g.iter().map(|r| f(r)).sum::<f64>() / k;
            AggregateRow {
                m: c.m,
                n: c.n,
                s: c.s,
                nu: c.nu,
                sigma: c.sigma,
                flip_prob: c.flip_prob,
                method: g[0].method,
                mean_time_s: mean(&|r| r.wall_time_s),
                mean_l2_err: mean(&|r| r.l2_err),
                pre_percent: 100.0 * mean(&|r| f64::from(u8::from(r.support_exact))),
                mean_iterations: mean(&|r| r.iterations as f64),
                trial_count: g.len(),
            }
        })
        .collect())
}

/// Median of the finite values; `NaN` for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_unstable_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

//! Experiment plans and their flat `key = value` file form.
//!
//! Any config key may sweep: `s = 1:2:20` (start:step:end, inclusive end)
//! or `m = 250,500,1000`. Several swept keys expand to their Cartesian
//! product in the order `m, n, s, nu, sigma, flip_prob`.
//!
//! ```text
//! m = 500
//! n = 1000
//! s = 1:2:20
//! nu = 0.1
//! sigma = 0.05
//! flip_prob = 0.01
//! methods = gna, biht
//! replications = 100
//! seed = 7
//! max_iter = 10
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::{DecodeSettings, Method};
use crate::baselines::{binomial, EXHAUSTIVE_LIMIT};
use crate::dataset::{parse_kv, parse_value};
use crate::model::{ProblemConfig, SignalKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKey {
    M,
    N,
    S,
    Nu,
    Sigma,
    FlipProb,
}

impl SweepKey {
    pub const ALL: [SweepKey; 6] = [
        SweepKey::M,
        SweepKey::N,
        SweepKey::S,
        SweepKey::Nu,
        SweepKey::Sigma,
        SweepKey::FlipProb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKey::M => "m",
            SweepKey::N => "n",
            SweepKey::S => "s",
            SweepKey::Nu => "nu",
            SweepKey::Sigma => "sigma",
            SweepKey::FlipProb => "flip_prob",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn value(self, c: &ProblemConfig) -> f64 {
        match self {
            SweepKey::M => c.m as f64,
            SweepKey::N => c.n as f64,
            SweepKey::S => c.s as f64,
            SweepKey::Nu => c.nu,
            SweepKey::Sigma => c.sigma,
            SweepKey::FlipProb => c.flip_prob,
        }
    }

    fn set(self, c: &mut ProblemConfig, v: f64) {
        match self {
            SweepKey::M => c.m = v as usize,
            SweepKey::N => c.n = v as usize,
            SweepKey::S => c.s = v as usize,
            SweepKey::Nu => c.nu = v,
            SweepKey::Sigma => c.sigma = v,
            SweepKey::FlipProb => c.flip_prob = v,
        }
    }

    fn integral(self) -> bool {
        matches!(self, SweepKey::M | SweepKey::N | SweepKey::S)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputKind {
    Csv,
    Json,
    Plot,
}

impl std::str::FromStr for OutputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputKind::Csv),
            "json" => Ok(OutputKind::Json),
            "plot" => Ok(OutputKind::Plot),
            other => Err(Error::Parameter(format!("unknown output {other:?} (csv, json, plot)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub grid: Vec<ProblemConfig>,
    /// Parameter varied across `grid`, used as the x axis of plot data.
    pub sweep: Option<SweepKey>,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub base_seed: u64,
    pub settings: DecodeSettings,
    pub threads: Option<usize>,
    pub outputs: Vec<OutputKind>,
}

impl ExperimentPlan {
    pub fn single(config: ProblemConfig, methods: &[Method], replications: usize, base_seed: u64) -> Self {
        ExperimentPlan {
            grid: vec![config],
            sweep: None,
            methods: methods.to_vec(),
            replications,
            base_seed,
            settings: DecodeSettings::default(),
            threads: None,
            outputs: vec![OutputKind::Csv, OutputKind::Json],
        }
    }

    /// `base` with `key` set to each of `values`.
    pub fn sweep(
        base: ProblemConfig,
        key: SweepKey,
        values: &[f64],
        methods: &[Method],
        replications: usize,
        base_seed: u64,
    ) -> Self {
        let grid = values
            .iter()
            .map(|&v| {
                let mut c = base;
                key.set(&mut c, v);
                c
            })
            .collect();
        ExperimentPlan {
            grid,
            sweep: Some(key),
            outputs: vec![OutputKind::Csv, OutputKind::Json, OutputKind::Plot],
            ..Self::single(base, methods, replications, base_seed)
        }
    }

    pub fn with_settings(mut self, eta: f64, max_iter: usize) -> Self {
        self.settings = DecodeSettings { eta, max_iter };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Parameter("plan has an empty grid".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Parameter("plan lists no methods".into()));
        }
        if self.replications == 0 {
            return Err(Error::Parameter("replications must be at least 1".into()));
        }
        if !(self.settings.eta > 0.0) || self.settings.max_iter == 0 {
            return Err(Error::Parameter(format!("invalid GNA settings {:?}", self.settings)));
        }
        if self.threads == Some(0) {
            return Err(Error::Parameter("threads must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.grid {
            c.validate()?;
            let key = (c.m, c.n, c.s, c.nu.to_bits(), c.sigma.to_bits(), c.flip_prob.to_bits());
            if !seen.insert(key) {
                return Err(Error::Parameter(format!("duplicate grid entry {c:?}")));
            }
            if self.methods.contains(&Method::Oracle) && binomial(c.n, c.s) > EXHAUSTIVE_LIMIT {
                return Err(Error::TooManySupports {
                    count: binomial(c.n, c.s),
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
        }
        Ok(())
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut values: Vec<Option<Vec<f64>>> = vec![None; SweepKey::ALL.len()];
        let mut signal = SignalKind::default();
        let mut plan = ExperimentPlan {
            grid: Vec::new(),
            sweep: None,
            methods: vec![Method::Gna],
            replications: 100,
            base_seed: 0,
            settings: DecodeSettings::default(),
            threads: None,
            outputs: vec![OutputKind::Csv, OutputKind::Json, OutputKind::Plot],
        };
        for (k, v) in parse_kv(text)? {
            if let Some(key) = SweepKey::from_name(&k) {
                let slot = SweepKey::ALL.iter().position(|x| *x == key).unwrap();
                values[slot] = Some(parse_values(key, &v)?);
                continue;
            }
            match k.as_str() {
                "methods" | "method" => {
                    plan.methods = v.split(',').map(str::parse).collect::<Result<_>>()?;
                }
                "replications" | "reps" => plan.replications = parse_value(&k, &v)?,
                "seed" | "base_seed" => plan.base_seed = parse_value(&k, &v)?,
                "eta" => plan.settings.eta = parse_value(&k, &v)?,
                "max_iter" => plan.settings.max_iter = parse_value(&k, &v)?,
                "threads" => plan.threads = Some(parse_value(&k, &v)?),
                "signal" => signal = v.parse()?,
                "outputs" => {
                    plan.outputs = v.split(',').map(str::parse).collect::<Result<_>>()?;
                }
                other => return Err(Error::Format(format!("unknown plan key {other:?}"))),
            }
        }
        let mut grid = vec![ProblemConfig::new(0, 0, 0, 0.0, 0.0, 0.0).with_signal(signal)];
        for (key, vals) in SweepKey::ALL.iter().zip(&values) {
            let vals = vals
                .as_ref()
                .ok_or_else(|| Error::Format(format!("missing plan key {:?}", key.name())))?;
            if vals.len() > 1 && plan.sweep.is_none() {
                plan.sweep = Some(*key);
            }
            grid = grid
                .into_iter()
                .flat_map(|c| {
                    vals.iter().map(move |&v| {
                        let mut c = c;
                        key.set(&mut c, v);
                        c
                    })
                })
                .collect();
        }
        plan.grid = grid;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text)
    }
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

fn parse_values(key: SweepKey, text: &str) -> Result<Vec<f64>> {
    let name = key.name();
    let vals: Vec<f64> = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| parse_value::<f64>(name, p.trim()))
            .collect::<Result<_>>()?;
        let [start, step, end] = parts[..] else {
            return Err(Error::Format(format!("{name}: range must be start:step:end, got {text:?}")));
        };
        if !(step > 0.0) || end < start {
            return Err(Error::Format(format!("{name}: empty or invalid range {text:?}")));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| round12(start + k as f64 * step)).collect()
    } else {
        text.split(',')
            .map(|p| parse_value::<f64>(name, p.trim()))
            .collect::<Result<_>>()?
    };
    if key.integral() {
        if let Some(bad) = vals.iter().find(|v| v.fract() != 0.0 || **v < 0.0) {
            return Err(Error::Format(format!("{name} must be a nonnegative integer, got {bad}")));
        }
    }
    Ok(vals)
}

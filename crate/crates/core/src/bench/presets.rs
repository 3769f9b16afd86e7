//! Named experiment presets.
//!
//! The default profile keeps every preset desk-sized; `full` adds the
//! `(m=1000, n=5000, s=10)` comparison block and the full-size 1D wavelet
//! problem.

use super::{ExperimentPlan, Method, SweepKey};
use crate::model::ProblemConfig;
use crate::{Error, Result};

pub const NAMES: [&str; 9] = [
    "fig1", "fig2a", "fig2b", "fig2c", "fig2d", "table1a", "table1b", "table1c", "wavelet1d",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    #[default]
    Default,
    Full,
}

/// The 1D wavelet experiment: problem size and Haar level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletPreset {
    pub config: ProblemConfig,
    pub level: usize,
    pub methods: [Method; 3],
    pub replications: usize,
}

pub fn wavelet1d(profile: Profile) -> WaveletPreset {
    let config = match profile {
        Profile::Default => ProblemConfig::new(600, 2048, 12, 0.0, 0.5, 0.06),
        Profile::Full => ProblemConfig::new(2500, 8000, 36, 0.0, 0.5, 0.06),
    };
    WaveletPreset {
        config,
        level: 1,
        methods: [Method::Gna, Method::Biht, Method::Lp],
        replications: match profile {
            Profile::Default => 100,
            Profile::Full => 1,
        },
    }
}

fn range(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

/// Monte Carlo presets; `wavelet1d` is separate, see [`wavelet1d`].
pub fn plan(name: &str, profile: Profile, replications: usize, base_seed: u64) -> Result<ExperimentPlan> {
    let gna = [Method::Gna];
    let compare = [Method::Gna, Method::Biht, Method::Lp];
    let odd_s = range(1.0, 2.0, 10);
    let plan = match name {
        "fig1" => ExperimentPlan::sweep(
            ProblemConfig::new(500, 1000, 1, 0.1, 0.05, 0.01),
            SweepKey::S,
            &odd_s,
            &gna,
            replications,
            base_seed,
        )
        .with_settings(0.9, 10),
        "fig2a" => ExperimentPlan::sweep(
            ProblemConfig::new(500, 1000, 1, 0.1, 0.05, 0.01),
            SweepKey::S,
            &odd_s,
            &gna,
            replications,
            base_seed,
        ),
        "fig2b" => ExperimentPlan::sweep(
            ProblemConfig::new(500, 1000, 10, 0.3, 0.0, 0.05),
            SweepKey::Sigma,
            &range(0.0, 0.1, 11),
            &gna,
            replications,
            base_seed,
        ),
        "fig2c" => ExperimentPlan::sweep(
            ProblemConfig::new(500, 1000, 5, 0.1, 0.05, 0.0),
            SweepKey::FlipProb,
            &range(0.0, 0.02, 11),
            &gna,
            replications,
            base_seed,
        ),
        "fig2d" => ExperimentPlan::sweep(
            ProblemConfig::new(500, 1000, 5, 0.1, 0.05, 0.8),
            SweepKey::FlipProb,
            &range(0.8, 0.02, 11),
            &gna,
            replications,
            base_seed,
        ),
        "table1a" | "table1b" | "table1c" => {
            let (nu, sigma, q) = match name {
                "table1a" => (0.2, 0.2, 0.05),
                "table1b" => (0.3, 0.3, 0.10),
                _ => (0.5, 0.5, 0.15),
            };
            let mut p = ExperimentPlan::single(
                ProblemConfig::new(500, 2500, 5, nu, sigma, q),
                &compare,
                replications,
                base_seed,
            );
            if profile == Profile::Full {
                p.grid.push(ProblemConfig::new(1000, 5000, 10, nu, sigma, q));
            }
            p
        }
        "wavelet1d" => {
            return Err(Error::Parameter(
                "wavelet1d is not a trial plan; use presets::wavelet1d".into(),
            ))
        }
        other => {
            return Err(Error::Parameter(format!(
                "unknown preset {other:?}; expected one of {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_plan_preset_validates() {
        for name in NAMES.iter().filter(|n| **n != "wavelet1d") {
            for profile in [Profile::Default, Profile::Full] {
                plan(name, profile, 100, 1).unwrap().validate().unwrap();
            }
        }
        assert!(plan("wavelet1d", Profile::Default, 1, 0).is_err());
        assert!(plan("fig9", Profile::Default, 1, 0).is_err());
    }

    #[test]
    fn preset_grids() {
        let p = plan("fig1", Profile::Default, 100, 0).unwrap();
        assert_eq!(p.grid.iter().map(|c| c.s).collect::<Vec<_>>(), vec![1, 3, 5, 7, 9, 11, 13, 15, 17, 19]);
        assert_eq!(p.settings.max_iter, 10);
        let p = plan("fig2c", Profile::Default, 100, 0).unwrap();
        assert_eq!(p.grid.last().unwrap().flip_prob, 0.2);
        let p = plan("table1a", Profile::Full, 100, 0).unwrap();
        assert_eq!(p.grid.len(), 2);
        assert_eq!(wavelet1d(Profile::Default).config.n % 2, 0);
        assert_eq!(wavelet1d(Profile::Full).config.n % 2, 0);
    }
}

//! 1D signal sparse in the Haar basis, measured through a Gaussian matrix.
//!
//! The effective sensing matrix is `G W` where `W` is the Haar synthesis
//! operator, so decoders work on coefficients and the signal is
//! reconstructed as `W c`. Since the 1-bit model only identifies the
//! direction, estimates are rescaled to the unit norm of the target before
//! reconstruction.

use nalgebra::DVector;
use rand::Rng;
use std::time::Instant;

use super::{decode, l2_error, linf_error_scaled, psnr, support_exact, DecodeSettings, Method, TrialRecord};
use crate::haar::HaarSynthesis;
use crate::model::{effective_scale, make_signal, observe, sample_matrix, ProblemConfig};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletOutcome {
    pub record: TrialRecord,
    pub psnr: f64,
    pub reconstruction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletTrial {
    pub signal: Vec<f64>,
    /// `|| analysis(signal) - coefficients ||_inf` of the target.
    pub roundtrip_err: f64,
    pub outcomes: Vec<WaveletOutcome>,
}

/// Draw one wavelet-sparse target, observe it, and decode it with each of
/// `methods` on the same measurements.
pub fn wavelet_experiment<R: Rng + ?Sized>(
    config: &ProblemConfig,
    level: usize,
    methods: &[Method],
    settings: &DecodeSettings,
    rng: &mut R,
) -> Result<WaveletTrial> {
    config.validate()?;
    let haar = HaarSynthesis::new(level, config.n)?;
    let coeffs = make_signal(config.n, config.s, config.signal, rng)?;
    let coeff_vec = coeffs.to_dense();
    let signal = haar.synthesize(coeff_vec.as_slice())?;
    let roundtrip_err = haar
        .analyze(&signal)?
        .iter()
        .zip(coeff_vec.iter())
        .fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));

    let gaussian = sample_matrix(config.m, config.n, config.nu, rng)?;
    let effective = haar.compose_after(&gaussian.matrix)?;
    let obs = observe(&effective, &coeffs, config.sigma, config.flip_prob, rng)?;
    let c = effective_scale(config.sigma, config.flip_prob).value();

    let mut outcomes = Vec::with_capacity(methods.len());
    for &method in methods {
        let start = Instant::now();
        let decoded = decode(method, &effective, &obs.y, config.s, settings);
        let wall_time_s = start.elapsed().as_secs_f64();
        let (x, iterations, error) = match decoded {
            Ok(d) => (d.x, d.iterations, None),
            Err(e) => (DVector::zeros(config.n), 0, Some(e.to_string())),
        };
        let norm = x.norm();
        let unit = if norm > 0.0 { &x / norm } else { x.clone() };
        let reconstruction = haar.synthesize(unit.as_slice())?;
        outcomes.push(WaveletOutcome {
            psnr: psnr(&signal, &reconstruction)?,
            reconstruction,
            record: TrialRecord {
                config: *config,
                config_index: 0,
                replication: 0,
                method,
                l2_err: l2_error(&x, &coeff_vec),
                support_exact: support_exact(&x, &coeffs.support),
                iterations,
                wall_time_s,
                linf_err_scaled: linf_error_scaled(&x, &coeff_vec, c),
                error,
            },
        });
    }
    Ok(WaveletTrial {
        signal,
        roundtrip_err,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn easy_regime_reconstructs_well() {
        let n = 32;
        let cfg = ProblemConfig::new(4 * n, n, 1, 0.0, 0.0, 0.0);
        let mut good = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = wavelet_experiment(&cfg, 1, &[Method::Gna], &DecodeSettings::default(), &mut rng).unwrap();
            assert!(t.roundtrip_err < 1e-12);
            if t.outcomes[0].psnr > 40.0 {
                good += 1;
            }
        }
        assert!(good >= 95, "good {good}");
    }

    #[test]
    fn rejects_incompatible_length() {
        let cfg = ProblemConfig::new(20, 10, 1, 0.0, 0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(wavelet_experiment(&cfg, 2, &[Method::Gna], &DecodeSettings::default(), &mut rng).is_err());
    }
}

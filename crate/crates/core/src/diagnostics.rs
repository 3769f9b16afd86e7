//! Sampled estimates of the restricted-spectrum constants of a sensing
//! matrix and a log-log rate fit for error-versus-`m` curves.
//!
//! All normalizations divide by the number of measurements `m`. Extrema
//! over a continuum (or over more supports than the budget) are reported as
//! sampled envelopes, never as certified bounds.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::baselines::binomial;
use crate::{Error, Result};

/// Extreme eigenvalues of `Psi_A^T Psi_A / m` over supports `|A| = 2s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestrictedSpectrum {
    pub c2s_min: f64,
    pub c2s_max: f64,
    pub support_size: usize,
    /// Every support of size `support_size` was visited.
    pub exhaustive: bool,
    pub supports_evaluated: usize,
}

/// Sampled envelopes of `v' Psi' Psi v / (m ||v||_1 ||v||_inf)` over
/// `2s`-sparse `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeConstants {
    /// Smallest sampled ratio; approaches the infimum from above.
    pub c_star_lower: f64,
    /// Largest sampled ratio; approaches the supremum from below.
    pub c_star_upper: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: Vec<(f64, f64)>,
}

/// Extreme eigenvalues of `Psi_A^T Psi_A / m` for one support.
pub fn support_eigen_range(psi: &DMatrix<f64>, support: &[usize]) -> (f64, f64) {
    let sub = psi.select_columns(support);
    let gram = sub.tr_mul(&sub) / psi.nrows() as f64;
    let eig = SymmetricEigen::new(gram).eigenvalues;
    (eig.min(), eig.max())
}

/// Restricted extreme eigenvalues over supports of size `2s`. All
/// `C(n, 2s)` supports are enumerated when that count is within `budget`,
/// otherwise `budget` supports are drawn uniformly.
pub fn restricted_spectrum<R: Rng + ?Sized>(
    psi: &DMatrix<f64>,
    s: usize,
    budget: usize,
    rng: &mut R,
) -> Result<RestrictedSpectrum> {
    let n = psi.ncols();
    let k = 2 * s;
    if s == 0 || k > n {
        return Err(Error::Parameter(format!("2s={k} must lie in [2, n={n}]")));
    }
    if budget == 0 {
        return Err(Error::Parameter("budget must be at least 1".into()));
    }
    let exhaustive = binomial(n, k) <= budget as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut evaluated = 0;
    let mut visit = |support: &[usize]| {
        let (a, b) = support_eigen_range(psi, support);
        lo = lo.min(a);
        hi = hi.max(b);
        evaluated += 1;
    };
    if exhaustive {
        for support in (0..n).combinations(k) {
            visit(&support);
        }
    } else {
        for _ in 0..budget {
            let mut support = rand::seq::index::sample(rng, n, k).into_vec();
            support.sort_unstable();
            visit(&support);
        }
    }
    Ok(RestrictedSpectrum {
        c2s_min: lo.max(0.0),
        c2s_max: hi,
        support_size: k,
        exhaustive,
        supports_evaluated: evaluated,
    })
}

/// `v' Psi' Psi v / (m ||v||_1 ||v||_inf)`.
pub fn cone_ratio(psi: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let pv = psi * v;
    pv.norm_squared() / (psi.nrows() as f64 * v.lp_norm(1) * v.amax())
}

/// Like [`cone_constants`] but also returns every sampled ratio.
pub fn cone_constants_traced<R: Rng + ?Sized>(
    psi: &DMatrix<f64>,
    s: usize,
    samples: usize,
    rng: &mut R,
) -> Result<(ConeConstants, Vec<f64>)> {
    if samples == 0 {
        return Err(Error::Parameter("samples must be at least 1".into()));
    }
    let n = psi.ncols();
    let k = (2 * s).min(n);
    if k == 0 {
        return Err(Error::Parameter("s must be at least 1".into()));
    }
    let mut ratios = Vec::with_capacity(samples);
    let mut v = DVector::zeros(n);
    while ratios.len() < samples {
        v.fill(0.0);
        for j in rand::seq::index::sample(rng, n, k) {
            v[j] = rng.sample(StandardNormal);
        }
        if v.amax() == 0.0 {
            continue;
        }
        ratios.push(cone_ratio(psi, &v));
    }
    let lower = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((
        ConeConstants {
            c_star_lower: lower,
            c_star_upper: upper,
            samples,
        },
        ratios,
    ))
}

/// Random `2s`-sparse Gaussian directions; records the extreme ratios.
pub fn cone_constants<R: Rng + ?Sized>(
    psi: &DMatrix<f64>,
    s: usize,
    samples: usize,
    rng: &mut R,
) -> Result<ConeConstants> {
    cone_constants_traced(psi, s, samples, rng).map(|(c, _)| c)
}

/// Least-squares line through `(log m, log error)`.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::Parameter(format!(
            "scaling fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|(m, e)| !(*m > 0.0 && *e > 0.0)) {
        return Err(Error::Parameter(format!("nonpositive point {p:?}")));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("scaling fit needs distinct m values".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // A flat response is fit exactly by a flat line.
    let r2 = if ss_tot <= f64::EPSILON * k * my.abs().max(1.0) {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        slope,
        intercept,
        r2,
        points: points.to_vec(),
    })
}

/// Step-size ceilings `(4 / (9 g), 4 / (9 g sqrt(s)))` for the fixed-point
/// characterization and the error bound respectively. Advisory only.
pub fn eta_bound(gamma_max: f64, s: usize) -> Result<(f64, f64)> {
    if !(gamma_max > 0.0) || s == 0 {
        return Err(Error::Parameter(format!(
            "eta_bound needs gamma_max > 0 and s >= 1, got ({gamma_max}, {s})"
        )));
    }
    let base = 4.0 / (9.0 * gamma_max);
    Ok((base, base / (s as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub c2s_min: f64,
    pub c2s_max: f64,
    pub exhaustive: bool,
    pub c_star_lower: f64,
    pub c_star_upper: f64,
    pub samples: usize,
    pub eta_bounds: (f64, f64),
}

/// Restricted spectrum, cone constants, and step-size ceilings (using the
/// sampled `c2s_max` in place of the population eigenvalue).
pub fn diagnose<R: Rng + ?Sized>(
    psi: &DMatrix<f64>,
    s: usize,
    budget: usize,
    samples: usize,
    rng: &mut R,
) -> Result<DiagnosticsReport> {
    let spectrum = restricted_spectrum(psi, s, budget, rng)?;
    let cone = cone_constants(psi, s, samples, rng)?;
    let eta_bounds = eta_bound(spectrum.c2s_max, s)?;
    Ok(DiagnosticsReport {
        c2s_min: spectrum.c2s_min,
        c2s_max: spectrum.c2s_max,
        exhaustive: spectrum.exhaustive,
        c_star_lower: cone.c_star_lower,
        c_star_upper: cone.c_star_upper,
        samples: cone.samples,
        eta_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sample_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn identity_gram_spectrum() {
        let m = 16;
        let psi = DMatrix::<f64>::identity(m, 6) * (m as f64).sqrt();
        let sp = restricted_spectrum(&psi, 2, 1000, &mut rng(0)).unwrap();
        assert!(sp.exhaustive);
        assert_eq!(sp.supports_evaluated, 15);
        assert!((sp.c2s_min - 1.0).abs() < 1e-12 && (sp.c2s_max - 1.0).abs() < 1e-12);
    }

    /// Brute-force oracle: eigenvalues of every 4x4 Gram block by the
    /// characteristic-polynomial-free route of Jacobi rotations.
    fn jacobi_eigen(mut a: [[f64; 4]; 4]) -> [f64; 4] {
        for _ in 0..100 {
            for p in 0..4 {
                for q in p + 1..4 {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..4 {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..4 {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        [a[0][0], a[1][1], a[2][2], a[3][3]]
    }

    #[test]
    fn exhaustive_matches_brute_force() {
        let m = 200;
        let psi = sample_matrix(m, 8, 0.0, &mut rng(5)).unwrap().matrix;
        let sp = restricted_spectrum(&psi, 2, 1000, &mut rng(0)).unwrap();
        assert!(sp.exhaustive);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for a in 0..8 {
            for b in a + 1..8 {
                for c in b + 1..8 {
                    for d in c + 1..8 {
                        let idx = [a, b, c, d];
                        let mut g = [[0.0; 4]; 4];
                        for (p, &i) in idx.iter().enumerate() {
                            for (q, &j) in idx.iter().enumerate() {
                                g[p][q] = (0..m).map(|r| psi[(r, i)] * psi[(r, j)]).sum::<f64>() / m as f64;
                            }
                        }
                        for e in jacobi_eigen(g) {
                            lo = lo.min(e);
                            hi = hi.max(e);
                        }
                    }
                }
            }
        }
        assert!((sp.c2s_min - lo).abs() < 1e-12, "{} vs {lo}", sp.c2s_min);
        assert!((sp.c2s_max - hi).abs() < 1e-12, "{} vs {hi}", sp.c2s_max);
    }

    #[test]
    fn sampled_min_is_below_each_block() {
        let psi = sample_matrix(60, 30, 0.2, &mut rng(1)).unwrap().matrix;
        let sp = restricted_spectrum(&psi, 2, 50, &mut rng(2)).unwrap();
        assert!(!sp.exhaustive);
        let mut r = rng(2);
        for _ in 0..50 {
            let mut support = rand::seq::index::sample(&mut r, 30, 4).into_vec();
            support.sort_unstable();
            let (lo, hi) = support_eigen_range(&psi, &support);
            assert!(sp.c2s_min <= lo && hi <= sp.c2s_max);
        }
    }

    #[test]
    fn exhaustive_is_order_independent() {
        let psi = sample_matrix(40, 9, 0.4, &mut rng(3)).unwrap().matrix;
        let sp = restricted_spectrum(&psi, 2, 10_000, &mut rng(0)).unwrap();
        let mut supports: Vec<Vec<usize>> = (0..9).combinations(4).collect();
        supports.reverse();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &supports {
            let (a, b) = support_eigen_range(&psi, s);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        assert_eq!(sp.c2s_min.to_bits(), lo.max(0.0).to_bits());
        assert_eq!(sp.c2s_max.to_bits(), hi.to_bits());
    }

    #[test]
    fn spectrum_rejects_large_s() {
        let psi = DMatrix::zeros(4, 5);
        assert!(restricted_spectrum(&psi, 3, 10, &mut rng(0)).is_err());
    }

    #[test]
    fn cone_ratio_of_coordinate_directions() {
        let m = 9;
        let psi = DMatrix::<f64>::identity(m, 5) * 3.0;
        for i in 0..5 {
            let mut e = DVector::zeros(5);
            e[i] = 1.0;
            assert!((cone_ratio(&psi, &e) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cone_envelopes_are_monotone_and_bracket_samples() {
        let psi = sample_matrix(50, 20, 0.1, &mut rng(4)).unwrap().matrix;
        let (small, ratios_small) = cone_constants_traced(&psi, 2, 100, &mut rng(9)).unwrap();
        let (large, ratios_large) = cone_constants_traced(&psi, 2, 200, &mut rng(9)).unwrap();
        assert_eq!(&ratios_large[..100], &ratios_small[..]);
        assert!(large.c_star_lower <= small.c_star_lower);
        assert!(large.c_star_upper >= small.c_star_upper);
        for r in ratios_large {
            assert!(large.c_star_lower <= r && r <= large.c_star_upper);
        }
        assert!(large.c_star_lower > 0.0);
    }

    #[test]
    fn fine_grid_brackets_sampled_cone_constants() {
        let psi = sample_matrix(40, 6, 0.3, &mut rng(6)).unwrap().matrix;
        let est = cone_constants(&psi, 1, 2000, &mut rng(7)).unwrap();
        // All 2-sparse directions: 15 coordinate pairs x 667 angles.
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let steps = 667;
        for i in 0..6 {
            for j in i + 1..6 {
                for t in 0..steps {
                    let theta = std::f64::consts::PI * t as f64 / steps as f64;
                    let mut v = DVector::zeros(6);
                    v[i] = theta.cos();
                    v[j] = theta.sin();
                    let r = cone_ratio(&psi, &v);
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
        }
        let tol = 1e-3 * hi;
        assert!(lo <= est.c_star_lower + tol, "grid min {lo} vs {}", est.c_star_lower);
        assert!(hi >= est.c_star_upper - tol, "grid max {hi} vs {}", est.c_star_upper);
    }

    #[test]
    fn scaling_fit_examples() {
        let pts: Vec<(f64, f64)> = [100.0, 200.0, 400.0, 800.0]
            .iter()
            .map(|&m: &f64| (m, 3.0 * m.powf(-0.5)))
            .collect();
        let fit = scaling_fit(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);

        let flat: Vec<(f64, f64)> = [1.0, 2.0, 3.0, 4.0].iter().map(|&m| (m, 0.2)).collect();
        let fit = scaling_fit(&flat).unwrap();
        assert!(fit.slope.abs() < 1e-12);

        assert!(scaling_fit(&pts[..3]).is_err());
        assert!(scaling_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
    }

    #[test]
    fn eta_bound_examples() {
        assert_eq!(eta_bound(1.0, 1).unwrap(), (4.0 / 9.0, 4.0 / 9.0));
        assert_eq!(eta_bound(1.0, 4).unwrap(), (4.0 / 9.0, 2.0 / 9.0));
        assert_eq!(eta_bound(2.0, 1).unwrap(), (2.0 / 9.0, 2.0 / 9.0));
        assert!(eta_bound(0.0, 1).is_err());
    }

    #[test]
    fn iid_lower_restricted_eigenvalue_is_positive() {
        for seed in 0..100 {
            let psi = sample_matrix(400, 100, 0.0, &mut rng(seed)).unwrap().matrix;
            let sp = restricted_spectrum(&psi, 3, 200, &mut rng(seed + 1000)).unwrap();
            assert!(sp.c2s_min > 0.0);
        }
    }
}

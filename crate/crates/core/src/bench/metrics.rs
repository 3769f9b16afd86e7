use nalgebra::DVector;

use crate::solver::top_s_indices;
use crate::{Error, Result};

/// `|| xhat/||xhat|| - x*/||x*|| ||_2`. A zero estimate scores 1.
pub fn l2_error(estimate: &DVector<f64>, truth: &DVector<f64>) -> f64 {
    let t = truth / truth.norm();
    let norm = estimate.norm();
    if norm == 0.0 || !norm.is_finite() {
        return 1.0;
    }
    (estimate / norm - t).norm()
}

/// Nonzero entries among the `s` largest magnitudes of `estimate`.
pub fn estimated_support(estimate: &DVector<f64>, s: usize) -> Vec<usize> {
    top_s_indices(estimate.as_slice(), s)
        .into_iter()
        .filter(|&i| estimate[i] != 0.0)
        .collect()
}

pub fn support_exact(estimate: &DVector<f64>, truth_support: &[usize]) -> bool {
    estimated_support(estimate, truth_support.len()) == truth_support
}

/// `|| xhat / c - x* ||_inf`, absent when `|c| < 1e-6`.
pub fn linf_error_scaled(estimate: &DVector<f64>, truth: &DVector<f64>, c: f64) -> Option<f64> {
    if c.abs() < 1e-6 {
        return None;
    }
    Some((estimate / c - truth).amax())
}

/// `10 log10(V^2 / MSE)` with `V = max |reference|`. Exact agreement gives
/// `+inf`.
pub fn psnr(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::Dimension(format!(
            "PSNR inputs have lengths {} and {}",
            reference.len(),
            estimate.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::Empty("PSNR of empty signals"));
    }
    let peak = reference.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mse = reference
        .iter()
        .zip(estimate)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

//! Comparison decoders: binary iterative hard thresholding (BIHT), the
//! projected linear estimator, and exhaustive search for the global
//! minimizer of the cardinality-constrained least-squares problem.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::model::sign;
use crate::solver::{hard_threshold, solve_gram};
use crate::{Error, Result};

/// Largest number of supports [`exhaustive_l0`] will enumerate.
pub const EXHAUSTIVE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BihtOptions {
    pub s: usize,
    /// Gradient step; `None` means `1/m`.
    pub step: Option<f64>,
    pub max_iter: usize,
    pub normalize_output: bool,
}

impl BihtOptions {
    pub fn new(s: usize) -> Self {
        BihtOptions {
            s,
            step: None,
            max_iter: 100,
            normalize_output: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BihtOutput {
    pub x: DVector<f64>,
    pub iterations: usize,
    /// An iterate repeated exactly before `max_iter` was reached.
    pub converged: bool,
}

/// `H_s(x + tau/2 * Psi^T (y - sign(Psi x)))`.
pub fn biht_step(
    psi: &DMatrix<f64>,
    y: &DVector<f64>,
    x: &DVector<f64>,
    s: usize,
    step: f64,
) -> Result<DVector<f64>> {
    let mismatch = y - (psi * x).map(sign);
    let grad = psi.tr_mul(&mismatch) * (0.5 * step);
    hard_threshold(&(x + grad), s)
}

/// Binary iterative hard thresholding from `x = 0`.
pub fn biht(psi: &DMatrix<f64>, y: &DVector<f64>, opts: &BihtOptions) -> Result<BihtOutput> {
    if psi.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but y has length {}",
            psi.nrows(),
            y.len()
        )));
    }
    if opts.s == 0 || opts.s > psi.ncols() {
        return Err(Error::Parameter(format!("s={} out of range", opts.s)));
    }
    let step = opts.step.unwrap_or(1.0 / psi.nrows() as f64);
    if !(step > 0.0) {
        return Err(Error::Parameter(format!("BIHT step {step} must be positive")));
    }
    let mut x = DVector::zeros(psi.ncols());
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let next = biht_step(psi, y, &x, opts.s, step)?;
        iterations += 1;
        if next == x {
            converged = true;
            break;
        }
        x = next;
    }
    if opts.normalize_output {
        let norm = x.norm();
        if norm > 0.0 {
            x /= norm;
        }
    }
    Ok(BihtOutput {
        x,
        iterations,
        converged,
    })
}

/// Euclidean projection onto `{x : ||x||_1 <= radius}` by the sort-and-
/// threshold algorithm.
pub fn project_l1_ball(v: &DVector<f64>, radius: f64) -> DVector<f64> {
    if v.lp_norm(1) <= radius {
        return v.clone();
    }
    if radius <= 0.0 {
        return DVector::zeros(v.len());
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (j + 1) as f64;
        if u > t {
            theta = t;
        } else {
            break;
        }
    }
    v.map(|x| x.signum() * (x.abs() - theta).max(0.0))
}

/// Projected linear estimator: `Psi^T y / m` projected onto the `l1` ball of
/// radius `sqrt(s)` and then shrunk into the unit `l2` ball.
pub fn lp_estimate(psi: &DMatrix<f64>, y: &DVector<f64>, s: usize) -> Result<DVector<f64>> {
    if psi.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but y has length {}",
            psi.nrows(),
            y.len()
        )));
    }
    if s == 0 {
        return Err(Error::Parameter("s must be at least 1".into()));
    }
    let v = psi.tr_mul(y) / psi.nrows() as f64;
    let mut out = project_l1_ball(&v, (s as f64).sqrt());
    let norm = out.norm();
    if norm > 1.0 {
        out /= norm;
    }
    Ok(out)
}

/// `C(n, k)` as a float (exact for the sizes the guard admits).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveSolution {
    pub x: DVector<f64>,
    pub support: Vec<usize>,
    /// `(1/2m) ||y - Psi x||^2`.
    pub objective: f64,
    pub supports_checked: usize,
}

/// `(1/2m) ||y - Psi x||^2`.
pub fn ls_objective(psi: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>) -> f64 {
    (y - psi * x).norm_squared() / (2.0 * psi.nrows() as f64)
}

/// Global minimizer over all supports of size `s`. Objectives within `1e-12`
/// of the incumbent do not replace it, so ties resolve to the
/// lexicographically smallest support.
pub fn exhaustive_l0(psi: &DMatrix<f64>, y: &DVector<f64>, s: usize) -> Result<ExhaustiveSolution> {
    let (m, n) = psi.shape();
    if m != y.len() {
        return Err(Error::Dimension(format!(
            "matrix has {m} rows but y has length {}",
            y.len()
        )));
    }
    if s == 0 || s > n {
        return Err(Error::Parameter(format!("s={s} must lie in [1, {n}]")));
    }
    let count = binomial(n, s);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::TooManySupports {
            count,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let gram = psi.tr_mul(psi);
    let corr = psi.tr_mul(y);
    let mut best: Option<(f64, Vec<usize>, DVector<f64>)> = None;
    let mut checked = 0;
    for support in (0..n).combinations(s) {
        checked += 1;
        let sub_gram = gram.select_rows(&support).select_columns(&support);
        let rhs = DVector::from_iterator(s, support.iter().map(|&j| corr[j]));
        let coeffs = match solve_gram(sub_gram, rhs, 0.0, &support) {
            Ok(sol) => sol.coeffs,
            Err(Error::Singular { .. }) => continue,
            Err(e) => return Err(e),
        };
        let mut residual = y.clone();
        for (&j, &u) in support.iter().zip(coeffs.iter()) {
            residual.axpy(-u, &psi.column(j), 1.0);
        }
        let objective = residual.norm_squared() / (2.0 * m as f64);
        let better = match &best {
            None => true,
            Some((b, _, _)) => objective < b - 1e-12,
        };
        if better {
            best = Some((objective, support, coeffs));
        }
    }
    let (objective, support, coeffs) = best.ok_or_else(|| Error::Singular {
        support: Vec::new(),
        iteration: None,
    })?;
    let mut x = DVector::zeros(n);
    for (&j, &u) in support.iter().zip(coeffs.iter()) {
        x[j] = u;
    }
    Ok(ExhaustiveSolution {
        x,
        support,
        objective,
        supports_checked: checked,
    })
}

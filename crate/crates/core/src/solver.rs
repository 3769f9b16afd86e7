//! Generalized Newton Algorithm (GNA) for
//!
//! ```text
//! minimize (1/2m) ||y - Psi x||^2   subject to   ||x||_0 <= s.
//! ```
//!
//! Each iteration selects the active set `A` as the `s` largest entries of
//! `|x + eta d|`, solves least squares restricted to `A`, and resets the dual
//! `d = Psi^T (y - Psi x) / m` on the complement `I` (and to zero on `A`).
//! The run stops when the active set repeats.
//!
//! All index selections keep exactly `s` indices; among equal magnitudes the
//! smaller index wins.

use nalgebra::{DMatrix, DVector};
use std::cmp::Ordering;

use crate::{Error, Result};

/// Largest ambient dimension accepted by [`newton_step`].
pub const NEWTON_ORACLE_MAX_N: usize = 512;

/// Relative ridge applied to the restricted Gram matrix when it is
/// numerically singular, scaled by `trace / s`.
pub const RIDGE_FALLBACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub s: usize,
    pub eta: f64,
    pub max_iter: usize,
    /// Ridge added to the restricted Gram matrix before factorization.
    pub ls_ridge: f64,
}

impl SolverOptions {
    pub fn new(s: usize) -> Self {
        SolverOptions {
            s,
            eta: 0.9,
            max_iter: 5,
            ls_ridge: 0.0,
        }
    }

    pub fn eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::Parameter("s must be at least 1".into()));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Parameter(format!("eta={} must be positive", self.eta)));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        if !(self.ls_ridge >= 0.0) {
            return Err(Error::Parameter(format!("ls_ridge={} must be >= 0", self.ls_ridge)));
        }
        Ok(())
    }
}

/// Primal/dual iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: DVector<f64>,
    /// `Psi^T (y - Psi x) / m` off the active set, zero on it.
    pub d: DVector<f64>,
    /// Active set that produced `x` (sorted). Empty for a cold start.
    pub active: Vec<usize>,
    pub k: usize,
}

impl SolverState {
    /// `x0` with `d0 = Psi^T (y - Psi x0) / m`.
    pub fn initial(psi: &DMatrix<f64>, y: &DVector<f64>, x0: DVector<f64>) -> Result<Self> {
        check_dims(psi, y)?;
        if x0.len() != psi.ncols() {
            return Err(Error::Dimension(format!(
                "x0 has length {}, expected {}",
                x0.len(),
                psi.ncols()
            )));
        }
        let d = dual(psi, y, &x0);
        let active = support_of(&x0);
        Ok(SolverState {
            x: x0,
            d,
            active,
            k: 0,
        })
    }

    pub fn zero(psi: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        Self::initial(psi, y, DVector::zeros(psi.ncols()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub x_hat: DVector<f64>,
    pub iterations: usize,
    /// The active set repeated before `max_iter` was exhausted.
    pub converged: bool,
    /// `A^0, A^1, ...`; when converged the last two entries are equal.
    pub active_history: Vec<Vec<usize>>,
    pub ls_solves: usize,
    /// Restricted solves that needed the ridge fallback.
    pub ridge_fallbacks: usize,
}

fn check_dims(psi: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if psi.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but y has length {}",
            psi.nrows(),
            y.len()
        )));
    }
    if psi.nrows() == 0 || psi.ncols() == 0 {
        return Err(Error::Dimension("empty sensing matrix".into()));
    }
    Ok(())
}

fn dual(psi: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    let r = y - psi * x;
    psi.tr_mul(&r) / psi.nrows() as f64
}

/// Indices of the nonzero entries.
pub fn support_of(x: &DVector<f64>) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Sorted indices of the `s` largest `|z_i|`, smaller index first on ties.
pub fn top_s_indices(z: &[f64], s: usize) -> Vec<usize> {
    let n = z.len();
    if s >= n {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if s == 0 {
        return Vec::new();
    }
    let by_magnitude = |&a: &usize, &b: &usize| -> Ordering {
        z[b].abs()
            .total_cmp(&z[a].abs())
            .then_with(|| a.cmp(&b))
    };
    idx.select_nth_unstable_by(s - 1, by_magnitude);
    idx.truncate(s);
    idx.sort_unstable();
    idx
}

/// Keep the `s` largest-magnitude entries of `z`, zero the rest.
pub fn hard_threshold(z: &DVector<f64>, s: usize) -> Result<DVector<f64>> {
    if s == 0 || s > z.len() {
        return Err(Error::Parameter(format!(
            "threshold level s={s} must lie in [1, {}]",
            z.len()
        )));
    }
    let mut out = DVector::zeros(z.len());
    for i in top_s_indices(z.as_slice(), s) {
        out[i] = z[i];
    }
    Ok(out)
}

/// `A = ` indices of the `s` largest `|x_i + eta d_i|`.
pub fn active_set(x: &DVector<f64>, d: &DVector<f64>, eta: f64, s: usize) -> Result<Vec<usize>> {
    if x.len() != d.len() {
        return Err(Error::Dimension(format!(
            "primal length {} and dual length {} differ",
            x.len(),
            d.len()
        )));
    }
    if !(eta > 0.0) {
        return Err(Error::Parameter(format!("eta={eta} must be positive")));
    }
    let z: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + eta * b).collect();
    Ok(top_s_indices(&z, s))
}

/// Solution of a restricted least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedSolution {
    /// Coefficients in the order of the support.
    pub coeffs: DVector<f64>,
    pub ridge_used: bool,
}

/// `argmin_u ||y - Psi_A u||` via the normal equations and a Cholesky
/// factorization of `Psi_A^T Psi_A + ridge I`.
///
/// A Gram matrix that fails to factor, or whose pivots collapse below
/// machine precision relative to its trace, is retried with a ridge of
/// `1e-10 * trace / |A|`.
pub fn restricted_least_squares(
    psi: &DMatrix<f64>,
    y: &DVector<f64>,
    support: &[usize],
    ridge: f64,
) -> Result<RestrictedSolution> {
    check_dims(psi, y)?;
    if support.is_empty() {
        return Ok(RestrictedSolution {
            coeffs: DVector::zeros(0),
            ridge_used: false,
        });
    }
    if let Some(&bad) = support.iter().find(|&&j| j >= psi.ncols()) {
        return Err(Error::Dimension(format!(
            "support index {bad} out of range for {} columns",
            psi.ncols()
        )));
    }
    let sub = psi.select_columns(support);
    let gram = sub.tr_mul(&sub);
    let rhs = sub.tr_mul(y);
    solve_gram(gram, rhs, ridge, support)
}

pub(crate) fn solve_gram(
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    ridge: f64,
    support: &[usize],
) -> Result<RestrictedSolution> {
    let k = gram.nrows();
    let trace = gram.trace();
    let singular = || Error::Singular {
        support: support.to_vec(),
        iteration: None,
    };
    if !(trace > 0.0 && trace.is_finite()) {
        return Err(singular());
    }
    let attempt = |r: f64| -> Option<DVector<f64>> {
        let mut g = gram.clone();
        if r > 0.0 {
            for i in 0..k {
                g[(i, i)] += r;
            }
        }
        let chol = g.cholesky()?;
        let l = chol.l_dirty();
        let min_pivot = (0..k).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_pivot <= f64::EPSILON * trace {
            return None;
        }
        Some(chol.solve(&rhs))
    };
    if let Some(coeffs) = attempt(ridge) {
        return Ok(RestrictedSolution {
            coeffs,
            ridge_used: ridge > 0.0,
        });
    }
    let fallback = ridge.max(RIDGE_FALLBACK * trace / k as f64);
    match attempt(fallback) {
        Some(coeffs) => Ok(RestrictedSolution {
            coeffs,
            ridge_used: true,
        }),
        None => Err(singular()),
    }
}

/// Outcome of one [`gna_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: SolverState,
    pub ridge_used: bool,
}

/// One GNA update: `A^k` from `(x^k, d^k)`, then
///
/// ```text
/// x_I = 0,  x_A = (Psi_A^T Psi_A)^{-1} Psi_A^T y,
/// d_A = 0,  d_I = Psi_I^T (y - Psi_A x_A) / m.
/// ```
pub fn gna_step(
    state: &SolverState,
    psi: &DMatrix<f64>,
    y: &DVector<f64>,
    opts: &SolverOptions,
) -> Result<StepOutcome> {
    check_dims(psi, y)?;
    if state.x.len() != psi.ncols() || state.d.len() != psi.ncols() {
        return Err(Error::Dimension(format!(
            "state has length {}/{}, matrix has {} columns",
            state.x.len(),
            state.d.len(),
            psi.ncols()
        )));
    }
    let active = active_set(&state.x, &state.d, opts.eta, opts.s)?;
    let sol = restricted_least_squares(psi, y, &active, opts.ls_ridge)?;
    let n = psi.ncols();
    let mut x = DVector::zeros(n);
    let mut residual = y.clone();
    for (&j, &u) in active.iter().zip(sol.coeffs.iter()) {
        x[j] = u;
        residual.axpy(-u, &psi.column(j), 1.0);
    }
    let mut d = psi.tr_mul(&residual) / psi.nrows() as f64;
    for &j in &active {
        d[j] = 0.0;
    }
    Ok(StepOutcome {
        state: SolverState {
            x,
            d,
            active,
            k: state.k + 1,
        },
        ridge_used: sol.ridge_used,
    })
}

/// Run GNA from `x0` (zero when `None`) until the active set repeats or
/// `max_iter` steps have been executed.
pub fn run_gna(
    psi: &DMatrix<f64>,
    y: &DVector<f64>,
    opts: &SolverOptions,
    x0: Option<&DVector<f64>>,
) -> Result<SolverReport> {
    opts.validate()?;
    check_dims(psi, y)?;
    if opts.s > psi.ncols() {
        return Err(Error::Parameter(format!(
            "s={} exceeds dimension {}",
            opts.s,
            psi.ncols()
        )));
    }
    let mut state = match x0 {
        Some(x0) => SolverState::initial(psi, y, x0.clone())?,
        None => SolverState::zero(psi, y)?,
    };
    let mut history = Vec::with_capacity(opts.max_iter + 1);
    let mut ridge_fallbacks = 0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let step = gna_step(&state, psi, y, opts).map_err(|e| e.at_iteration(state.k))?;
        iterations += 1;
        ridge_fallbacks += usize::from(step.ridge_used);
        state = step.state;
        history.push(state.active.clone());
        let next = active_set(&state.x, &state.d, opts.eta, opts.s)?;
        if next == state.active {
            history.push(next);
            converged = true;
            break;
        }
    }
    Ok(SolverReport {
        x_hat: state.x,
        iterations,
        converged,
        active_history: history,
        ls_solves: iterations,
        ridge_fallbacks,
    })
}

/// `|| x - H_s(x + eta Psi^T (y - Psi x) / m) ||_inf`.
pub fn kkt_residual(
    x: &DVector<f64>,
    psi: &DMatrix<f64>,
    y: &DVector<f64>,
    eta: f64,
    s: usize,
) -> Result<f64> {
    check_dims(psi, y)?;
    if x.len() != psi.ncols() {
        return Err(Error::Dimension(format!(
            "x has length {}, expected {}",
            x.len(),
            psi.ncols()
        )));
    }
    let d = dual(psi, y, x);
    let z = x + d * eta;
    let h = hard_threshold(&z, s)?;
    Ok((x - h).amax())
}

/// The same update as [`gna_step`], computed as a Newton step
/// `w+ = w - H^{-1} F(w)` on the KKT system with `w = (x; d)`.
///
/// With `A` the active set from `(x, d)` and `I` its complement,
///
/// ```text
/// H = [ H1      H2  ]    H1 = diag(0_A, I_I)     F1 = (-d_A ; x_I)
///     [ Psi'Psi m I ]    H2 = diag(-I_A, 0_I)    F2 = Psi'Psi x + m d - Psi'y
/// ```
///
/// The dense `2n x 2n` system is solved by LU, so this is only meant for
/// small instances.
pub fn newton_step(
    state: &SolverState,
    psi: &DMatrix<f64>,
    y: &DVector<f64>,
    opts: &SolverOptions,
) -> Result<SolverState> {
    check_dims(psi, y)?;
    let n = psi.ncols();
    if n > NEWTON_ORACLE_MAX_N {
        return Err(Error::Parameter(format!(
            "newton_step assembles a dense {0}x{0} system; n={n} exceeds {NEWTON_ORACLE_MAX_N}",
            2 * n
        )));
    }
    let m = psi.nrows() as f64;
    let active = active_set(&state.x, &state.d, opts.eta, opts.s)?;
    let mut in_active = vec![false; n];
    for &j in &active {
        in_active[j] = true;
    }

    let gram = psi.tr_mul(psi);
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    let mut f = DVector::zeros(2 * n);
    for i in 0..n {
        if in_active[i] {
            h[(i, n + i)] = -1.0;
            f[i] = -state.d[i];
        } else {
            h[(i, i)] = 1.0;
            f[i] = state.x[i];
        }
    }
    h.view_mut((n, 0), (n, n)).copy_from(&gram);
    for i in 0..n {
        h[(n + i, n + i)] = m;
    }
    let f2 = &gram * &state.x + &state.d * m - psi.tr_mul(y);
    f.rows_mut(n, n).copy_from(&f2);

    let step = h.lu().solve(&(-f)).ok_or_else(|| Error::Singular {
        support: active.clone(),
        iteration: Some(state.k),
    })?;
    if step.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular {
            support: active,
            iteration: Some(state.k),
        });
    }
    let x = state.x.clone() + step.rows(0, n);
    let d = state.d.clone() + step.rows(n, n);
    Ok(SolverState {
        x,
        d,
        active,
        k: state.k + 1,
    })
}

//! Synthetic 1-bit sensing model.
//!
//! A unit-norm `s`-sparse signal `x*` is measured through a Gaussian matrix
//! whose rows have AR(1) covariance `Sigma_jk = nu^|j-k|`. Measurements are
//! perturbed by Gaussian noise before quantization and each sign is flipped
//! independently with probability `flip_prob`:
//!
//! ```text
//! y_i = (-1)^{flip_i} * sign(<psi_i, x*> + eps_i),   sign(0) = +1
//! ```

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result};

/// Parameters of one synthetic data set `(m, n, s, nu, sigma, flip_prob)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub nu: f64,
    pub sigma: f64,
    /// Probability that a recorded sign is the negation of the true sign.
    pub flip_prob: f64,
    pub seed: u64,
    #[serde(default)]
    pub signal: SignalKind,
}

impl ProblemConfig {
    pub fn new(m: usize, n: usize, s: usize, nu: f64, sigma: f64, flip_prob: f64) -> Self {
        ProblemConfig {
            m,
            n,
            s,
            nu,
            sigma,
            flip_prob,
            seed: 0,
            signal: SignalKind::default(),
        }
    }

    pub fn with_signal(mut self, signal: SignalKind) -> Self {
        self.signal = signal;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Parameter("m must be at least 1".into()));
        }
        if self.s == 0 || self.s > self.n {
            return Err(Error::Parameter(format!(
                "sparsity s={} must lie in [1, n={}]",
                self.s, self.n
            )));
        }
        check_nu(self.nu)?;
        check_sigma(self.sigma)?;
        check_flip_prob(self.flip_prob)?;
        Ok(())
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if !(0.0..1.0).contains(&nu) {
        return Err(Error::Parameter(format!("nu={nu} must lie in [0, 1)")));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("sigma={sigma} must be >= 0")));
    }
    Ok(())
}

fn check_flip_prob(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Parameter(format!("flip_prob={q} must lie in [0, 1]")));
    }
    Ok(())
}

/// Distribution of the nonzero values of `x*` before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    /// Random signs, so every nonzero has magnitude `1/sqrt(s)`.
    #[default]
    Sign,
    /// i.i.d. standard normal values.
    Gaussian,
}

impl SignalKind {
    pub fn name(self) -> &'static str {
        match self {
            SignalKind::Sign => "sign",
            SignalKind::Gaussian => "gaussian",
        }
    }
}

impl std::fmt::Display for SignalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sign" => Ok(SignalKind::Sign),
            "gaussian" => Ok(SignalKind::Gaussian),
            other => Err(Error::Parameter(format!(
                "unknown signal kind {other:?}; expected sign or gaussian"
            ))),
        }
    }
}

/// Ground-truth sparse signal with unit Euclidean norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    pub n: usize,
    /// Strictly increasing indices in `[0, n)`.
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseSignal {
    pub fn to_dense(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.n);
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    /// Smallest nonzero magnitude.
    pub fn min_magnitude(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()))
    }
}

/// Draw a unit-norm signal with `s` nonzeros on a uniformly random support.
pub fn make_signal<R: Rng + ?Sized>(
    n: usize,
    s: usize,
    kind: SignalKind,
    rng: &mut R,
) -> Result<SparseSignal> {
    if s == 0 || s > n {
        return Err(Error::Dimension(format!("sparsity s={s} must lie in [1, n={n}]")));
    }
    let mut support = rand::seq::index::sample(rng, n, s).into_vec();
    support.sort_unstable();
    loop {
        let mut values: Vec<f64> = match kind {
            SignalKind::Sign => (0..s).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
            SignalKind::Gaussian => (0..s).map(|_| rng.sample(StandardNormal)).collect(),
        };
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
            return Ok(SparseSignal { n, support, values });
        }
    }
}

/// Sensing matrix with AR(1)-correlated Gaussian rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingEnsemble {
    pub matrix: DMatrix<f64>,
    pub covariance_nu: f64,
}

impl SensingEnsemble {
    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Sample an `m x n` matrix whose rows are i.i.d. `N(0, Sigma)` with
/// `Sigma_jk = nu^|j-k|`.
///
/// Each row is a stationary AR(1) sequence: `z_0 ~ N(0,1)` and
/// `z_{k+1} = nu z_k + sqrt(1 - nu^2) g_k`, which has exactly this covariance.
/// Entries are drawn row by row.
pub fn sample_matrix<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    nu: f64,
    rng: &mut R,
) -> Result<SensingEnsemble> {
    check_nu(nu)?;
    let innovation = (1.0 - nu * nu).sqrt();
    let mut matrix = DMatrix::zeros(m, n);
    for i in 0..m {
        let mut z: f64 = 0.0;
        for j in 0..n {
            let g: f64 = rng.sample(StandardNormal);
            z = if j == 0 { g } else { nu * z + innovation * g };
            matrix[(i, j)] = z;
        }
    }
    Ok(SensingEnsemble {
        matrix,
        covariance_nu: nu,
    })
}

/// 1-bit measurements together with the quantities needed to audit them.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryObservation {
    /// Entries are exactly `-1.0` or `+1.0`.
    pub y: DVector<f64>,
    pub flip_mask: Vec<bool>,
    /// `Psi x* + eps` before quantization.
    pub pre_quant: DVector<f64>,
}

impl BinaryObservation {
    /// Rebuild `y` from `pre_quant` and `flip_mask`.
    pub fn reconstruct(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.pre_quant.len(),
            self.pre_quant
                .iter()
                .zip(&self.flip_mask)
                .map(|(&v, &f)| if f { -sign(v) } else { sign(v) }),
        )
    }

    pub fn flip_fraction(&self) -> f64 {
        if self.flip_mask.is_empty() {
            return 0.0;
        }
        self.flip_mask.iter().filter(|&&f| f).count() as f64 / self.flip_mask.len() as f64
    }
}

/// `sign(z) = 1` for `z >= 0`, `-1` otherwise.
#[inline]
pub fn sign(z: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Quantize `Psi x* + eps` to signs and flip each independently with
/// probability `flip_prob`. For every row one noise draw is taken, then one
/// uniform draw for the flip.
pub fn observe<R: Rng + ?Sized>(
    psi: &DMatrix<f64>,
    signal: &SparseSignal,
    sigma: f64,
    flip_prob: f64,
    rng: &mut R,
) -> Result<BinaryObservation> {
    if psi.ncols() != signal.n {
        return Err(Error::Dimension(format!(
            "matrix has {} columns but signal has dimension {}",
            psi.ncols(),
            signal.n
        )));
    }
    check_sigma(sigma)?;
    check_flip_prob(flip_prob)?;
    let m = psi.nrows();
    let mut pre_quant = DVector::zeros(m);
    for (&j, &v) in signal.support.iter().zip(&signal.values) {
        pre_quant.axpy(v, &psi.column(j), 1.0);
    }
    let mut y = DVector::zeros(m);
    let mut flip_mask = Vec::with_capacity(m);
    for i in 0..m {
        let g: f64 = rng.sample(StandardNormal);
        pre_quant[i] += sigma * g;
        let flipped = rng.random::<f64>() < flip_prob;
        flip_mask.push(flipped);
        let s = sign(pre_quant[i]);
        y[i] = if flipped { -s } else { s };
    }
    Ok(BinaryObservation {
        y,
        flip_mask,
        pre_quant,
    })
}

/// Identifiable scale `c` relating the least-squares target to `x*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveScale(pub f64);

impl EffectiveScale {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `c = (1 - 2 q) sqrt(2 / (pi (sigma^2 + 1)))` where `q` is the flip
/// probability.
pub fn effective_scale(sigma: f64, flip_prob: f64) -> EffectiveScale {
    EffectiveScale((1.0 - 2.0 * flip_prob) * (2.0 / (PI * (sigma * sigma + 1.0))).sqrt())
}

/// A complete synthetic instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub config: ProblemConfig,
    pub signal: SparseSignal,
    pub ensemble: SensingEnsemble,
    pub observation: BinaryObservation,
}

/// Generate signal, matrix and observation in that order from one stream.
pub fn generate<R: Rng + ?Sized>(config: &ProblemConfig, rng: &mut R) -> Result<Instance> {
    config.validate()?;
    let signal = make_signal(config.n, config.s, config.signal, rng)?;
    let ensemble = sample_matrix(config.m, config.n, config.nu, rng)?;
    let observation = observe(&ensemble.matrix, &signal, config.sigma, config.flip_prob, rng)?;
    Ok(Instance {
        config: *config,
        signal,
        ensemble,
        observation,
    })
}

//! Orthonormal Haar (Daubechies-1) transform.
//!
//! Coefficients use the usual pyramid layout: for `level = L` the vector is
//! `[a_L, d_L, d_{L-1}, ..., d_1]` where `a_L` holds the coarsest
//! approximation and `d_l` the details at scale `l`.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::{Error, Result};

/// Inverse Haar transform (coefficients to signal) as a linear operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarSynthesis {
    level: usize,
    length: usize,
}

impl HaarSynthesis {
    pub fn new(level: usize, length: usize) -> Result<Self> {
        let block = 1usize
            .checked_shl(level as u32)
            .ok_or_else(|| Error::Parameter(format!("Haar level {level} too large")))?;
        if length == 0 || !length.is_multiple_of(block) {
            return Err(Error::Parameter(format!(
                "length {length} is not a positive multiple of 2^{level}"
            )));
        }
        Ok(HaarSynthesis { level, length })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    /// Coefficients to signal.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        let mut w = coeffs.to_vec();
        let mut tmp = vec![0.0; self.length];
        for l in (1..=self.level).rev() {
            let len = self.length >> (l - 1);
            let half = len / 2;
            for i in 0..half {
                let a = w[i];
                let d = w[half + i];
                tmp[2 * i] = (a + d) * FRAC_1_SQRT_2;
                tmp[2 * i + 1] = (a - d) * FRAC_1_SQRT_2;
            }
            w[..len].copy_from_slice(&tmp[..len]);
        }
        Ok(w)
    }

    /// Signal to coefficients; the adjoint and inverse of [`synthesize`](Self::synthesize).
    pub fn analyze(&self, signal: &[f64]) -> Result<Vec<f64>> {
        self.check_len(signal.len())?;
        let mut w = signal.to_vec();
        let mut tmp = vec![0.0; self.length];
        for l in 1..=self.level {
            let len = self.length >> (l - 1);
            let half = len / 2;
            for i in 0..half {
                let even = w[2 * i];
                let odd = w[2 * i + 1];
                tmp[i] = (even + odd) * FRAC_1_SQRT_2;
                tmp[half + i] = (even - odd) * FRAC_1_SQRT_2;
            }
            w[..len].copy_from_slice(&tmp[..len]);
        }
        Ok(w)
    }

    pub fn synthesize_vec(&self, coeffs: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.synthesize(coeffs.as_slice())?))
    }

    /// `G * W` for a matrix `G` with `length` columns, where `W` is this
    /// operator. Row `i` of the product is the analysis of row `i` of `G`,
    /// so the cost is `O(rows * length)`.
    pub fn compose_after(&self, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if g.ncols() != self.length {
            return Err(Error::Dimension(format!(
                "matrix has {} columns, operator length is {}",
                g.ncols(),
                self.length
            )));
        }
        let mut out = DMatrix::zeros(g.nrows(), self.length);
        let mut row = vec![0.0; self.length];
        for i in 0..g.nrows() {
            for (j, r) in row.iter_mut().enumerate() {
                *r = g[(i, j)];
            }
            let coeffs = self.analyze(&row)?;
            for (j, c) in coeffs.into_iter().enumerate() {
                out[(i, j)] = c;
            }
        }
        Ok(out)
    }

    /// Dense `length x length` synthesis matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.length, self.length);
        let mut e = vec![0.0; self.length];
        for j in 0..self.length {
            e[j] = 1.0;
            let col = self.synthesize(&e).expect("length checked");
            w.set_column(j, &DVector::from_vec(col));
            e[j] = 0.0;
        }
        w
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.length {
            return Err(Error::Dimension(format!(
                "vector length {len}, operator length {}",
                self.length
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const R2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn level_one_atoms() {
        let h = HaarSynthesis::new(1, 2).unwrap();
        let s = h.synthesize(&[R2, 0.0]).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
        let s = h.synthesize(&[0.0, R2]).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_length() {
        assert!(HaarSynthesis::new(1, 7).is_err());
        assert!(HaarSynthesis::new(3, 12).is_err());
        assert!(HaarSynthesis::new(2, 12).is_ok());
        let h = HaarSynthesis::new(1, 4).unwrap();
        assert!(h.synthesize(&[1.0; 3]).is_err());
    }

    #[test]
    fn matrix_is_orthogonal() {
        for level in 0..=3 {
            let w = HaarSynthesis::new(level, 8).unwrap().to_matrix();
            let dev = (w.tr_mul(&w) - DMatrix::<f64>::identity(8, 8)).amax();
            assert!(dev < 1e-14, "level {level}: {dev}");
        }
    }

    #[test]
    fn compose_matches_dense_product() {
        let h = HaarSynthesis::new(2, 8).unwrap();
        let g = DMatrix::from_fn(5, 8, |i, j| ((i * 8 + j) as f64 * 0.37).sin());
        let fast = h.compose_after(&g).unwrap();
        let dense = &g * h.to_matrix();
        assert!((fast - dense).amax() < 1e-14);
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            c in prop::collection::vec(-10.0f64..10.0, 8),
            level in 0usize..=3,
        ) {
            let h = HaarSynthesis::new(level, 8).unwrap();
            let back = h.analyze(&h.synthesize(&c).unwrap()).unwrap();
            for (a, b) in c.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let back = h.synthesize(&h.analyze(&c).unwrap()).unwrap();
            for (a, b) in c.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

//! JSON form shared by every decoder's output.
//!
//! ```json
//! {"x_hat": [[3, 0.71], [17, -0.70]], "iterations": 2, "converged": true,
//!  "ls_solves": 2, "active_history": [[3, 17], [3, 17]]}
//! ```

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::baselines::{BihtOutput, ExhaustiveSolution};
use crate::solver::SolverReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseReport {
    /// Nonzero entries as `[index, value]` pairs in increasing index order.
    pub x_hat: Vec<(usize, f64)>,
    pub iterations: usize,
    pub converged: bool,
    pub ls_solves: usize,
    pub active_history: Vec<Vec<usize>>,
}

pub fn sparse_pairs(x: &DVector<f64>) -> Vec<(usize, f64)> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, &v)| (i, v))
        .collect()
}

impl SparseReport {
    /// Dense vector of length `n`.
    pub fn dense(&self, n: usize) -> DVector<f64> {
        let mut x = DVector::zeros(n);
        for &(i, v) in &self.x_hat {
            if i < n {
                x[i] = v;
            }
        }
        x
    }

    /// Output of a decoder with no iteration structure.
    pub fn from_estimate(x: &DVector<f64>) -> Self {
        SparseReport {
            x_hat: sparse_pairs(x),
            iterations: 0,
            converged: true,
            ls_solves: 0,
            active_history: Vec::new(),
        }
    }
}

impl From<&SolverReport> for SparseReport {
    fn from(r: &SolverReport) -> Self {
        SparseReport {
            x_hat: sparse_pairs(&r.x_hat),
            iterations: r.iterations,
            converged: r.converged,
            ls_solves: r.ls_solves,
            active_history: r.active_history.clone(),
        }
    }
}

impl From<&BihtOutput> for SparseReport {
    fn from(r: &BihtOutput) -> Self {
        SparseReport {
            x_hat: sparse_pairs(&r.x),
            iterations: r.iterations,
            converged: r.converged,
            ls_solves: 0,
            active_history: Vec::new(),
        }
    }
}

impl From<&ExhaustiveSolution> for SparseReport {
    fn from(r: &ExhaustiveSolution) -> Self {
        SparseReport {
            x_hat: sparse_pairs(&r.x),
            iterations: 1,
            converged: true,
            ls_solves: r.supports_checked,
            active_history: vec![r.support.clone()],
        }
    }
}

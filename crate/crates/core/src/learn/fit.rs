//! Least-squares fits of design-matrix data.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::linalg::{residual_against, Svd};
use crate::model::FidelitySource;
use crate::sim::ExpectationEstimate;

/// Estimates below this (after sign correction) are dropped, not clamped.
pub const LAMBDA_FLOOR: f64 = 1e-6;

/// Right-hand side b over a subset of design rows.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Harvest {
    pub rows: Vec<usize>,
    pub b: Vec<f64>,
    /// Zero for exact data.
    pub stderr: Vec<f64>,
    /// (row, reason) for every dropped row.
    pub dropped: Vec<(usize, String)>,
}

impl Harvest {
    /// Noise-free data generated from a model.
    pub fn exact(matrix: &DesignMatrix, truth: &dyn FidelitySource) -> Result<Self> {
        let b = matrix.exact_b(truth)?;
        Ok(Harvest { rows: (0..b.len()).collect(), stderr: vec![0.0; b.len()], b, dropped: Vec::new() })
    }

    /// Keep only rows satisfying `keep`.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut out = Harvest { dropped: self.dropped.clone(), ..Default::default() };
        for (k, &r) in self.rows.iter().enumerate() {
            if keep(r) {
                out.rows.push(r);
                out.b.push(self.b[k]);
                out.stderr.push(self.stderr[k]);
            }
        }
        out
    }
}

/// b_j = −ln(⟨o_j⟩ / ideal_j) with σ_b = σ / |⟨o⟩|.
pub fn harvest_b(matrix: &DesignMatrix, estimates: &[ExpectationEstimate]) -> Result<Harvest> {
    if estimates.len() != matrix.nrows() {
        return Err(Error::Dimension { expected: matrix.nrows(), found: estimates.len() });
    }
    let mut h = Harvest::default();
    for (j, (row, e)) in matrix.rows.iter().zip(estimates).enumerate() {
        let v = e.value * row.ideal;
        if v.is_nan() || v <= LAMBDA_FLOOR {
            h.dropped.push((j, format!("estimate {v:.3e} below floor for {}", row.observable)));
            continue;
        }
        h.rows.push(j);
        h.b.push(-v.ln());
        h.stderr.push(e.stderr / v);
    }
    Ok(h)
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// ‖F p − b‖ over the fitted rows, unweighted.
    pub residual: f64,
    pub rank: usize,
    pub kernel_dim: usize,
    pub covariance_diag: Vec<f64>,
}

fn system(matrix: &DesignMatrix, data: &Harvest) -> (DMatrix<f64>, DVector<f64>, Option<Vec<f64>>) {
    let f = matrix.dense_rows(&data.rows);
    let b = DVector::from_column_slice(&data.b);
    let weighted = !data.stderr.is_empty() && data.stderr.iter().all(|&s| s > 0.0);
    let w = weighted.then(|| data.stderr.iter().map(|s| 1.0 / s).collect());
    (f, b, w)
}

/// Minimum-norm (weighted when every row has a positive stderr) least
/// squares without any rank check.
pub fn least_squares(matrix: &DesignMatrix, data: &Harvest) -> Result<(FitResult, Svd)> {
    if data.rows.is_empty() {
        return Err(Error::Invalid("no rows to fit".into()));
    }
    let (f, b, w) = system(matrix, data);
    let (fw, bw) = match &w {
        Some(w) => {
            let mut fw = f.clone();
            let mut bw = b.clone();
            for (r, &s) in w.iter().enumerate() {
                fw.row_mut(r).scale_mut(s);
                bw[r] *= s;
            }
            (fw, bw)
        }
        None => (f.clone(), b.clone()),
    };
    let svd = Svd::new(&fw);
    let x = svd.solve_refined(&fw, &bw);
    let residual = (&f * &x - &b).norm();
    let mut cov = svd.pinv_gram_diag();
    if w.is_none() {
        let dof = (f.nrows().saturating_sub(svd.rank)).max(1) as f64;
        let s2 = residual * residual / dof;
        cov.iter_mut().for_each(|c| *c *= s2);
    }
    let fit = FitResult {
        params: x.iter().copied().collect(),
        residual,
        rank: svd.rank,
        kernel_dim: svd.cols - svd.rank,
        covariance_diag: cov,
    };
    Ok((fit, svd))
}

/// Least squares plus a completeness check: the kernel must be exactly the
/// gauge of the parameter space. Otherwise the error carries a null-space
/// direction that is not gauge.
pub fn fit_self_consistent(matrix: &DesignMatrix, data: &Harvest) -> Result<FitResult> {
    let (fit, svd) = least_squares(matrix, data)?;
    let gauge = matrix.space.gauge_kernel_basis()?;
    let g = DMatrix::from_fn(matrix.ncols(), gauge.len(), |r, c| gauge[c][r]);
    let gauge_dim = if gauge.is_empty() { 0 } else { Svd::new(&g).rank };
    if fit.kernel_dim > gauge_dim {
        let null = svd.null_space();
        let witness = null
            .column_iter()
            .map(|v| residual_against(&v.into_owned(), &g))
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("kernel is non-empty");
        let witness = &witness / witness.norm();
        return Err(Error::RankDeficient {
            rank: fit.rank,
            expected: matrix.ncols() - gauge_dim,
            witness: witness.iter().copied().collect(),
        });
    }
    Ok(fit)
}

/// Remove the gauge component of a parameter vector: the result is the
/// orthogonal projection onto the complement of the gauge span.
pub fn learnable_projection(matrix: &DesignMatrix, params: &[f64]) -> Result<Vec<f64>> {
    let gauge = matrix.space.gauge_kernel_basis()?;
    let g = DMatrix::from_fn(matrix.ncols(), gauge.len(), |r, c| gauge[c][r]);
    Ok(residual_against(&DVector::from_column_slice(params), &g).iter().copied().collect())
}

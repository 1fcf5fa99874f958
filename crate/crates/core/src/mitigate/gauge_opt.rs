//! Choosing the gauge (and, within a residual budget, the fit itself) to
//! minimize the sampling overhead of the gate inverses.
//!
//! With F = U S Vᵀ, every point with ‖F r − b‖ ≤ ε is
//! r = r₀ + V S⁻¹ v + N z with ‖v‖² ≤ ε² − ‖F r₀ − b‖², where r₀ is the
//! minimum-norm least-squares point and N spans the kernel. The objective
//! Σ max(0, τ) is piecewise linear in (v, z); it is minimized by ADMM with
//! the ball handled by projection.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::learn::design::DesignMatrix;
use crate::learn::fit::Harvest;
use crate::linalg::Svd;
use crate::model::space::{Basis, Column};
use crate::model::x_to_tau;

/// Tolerance on the residual constraint.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Data shared by the one-step and two-step optimizers.
pub struct GaugeProblem {
    f: DMatrix<f64>,
    b: DVector<f64>,
    /// τ of every gate generator as a linear map of r.
    tau_map: DMatrix<f64>,
    /// Rows of `tau_map` belonging to each layer.
    layer_rows: Vec<(String, std::ops::Range<usize>)>,
    r0: DVector<f64>,
    res0: f64,
    /// V S⁻¹ over the row space, then the kernel basis.
    row_map: DMatrix<f64>,
    kernel: DMatrix<f64>,
    pub max_iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeOptResult {
    pub r_star: Vec<f64>,
    /// exp of the summed positive gate generator rates.
    pub gamma_star: f64,
    pub log_gamma_star: f64,
    pub residual: f64,
    pub epsilon_used: f64,
    pub iterations: usize,
    /// Best objective every 100 iterations.
    pub trace: Vec<f64>,
}

impl GaugeProblem {
    pub fn new(matrix: &DesignMatrix, data: &Harvest) -> Result<Self> {
        let space = &matrix.space;
        if space.basis() != Basis::R {
            return Err(Error::Invalid("gauge optimization works on r-basis design matrices".into()));
        }
        let f = matrix.dense_rows(&data.rows);
        let b = DVector::from_column_slice(&data.b);
        let svd = Svd::new(&f);
        let r0 = svd.solve_refined(&f, &b);
        let res0 = (&f * &r0 - &b).norm();
        let k = svd.rank;
        let row_map = DMatrix::from_fn(f.ncols(), k, |i, j| svd.v[(i, j)] / svd.s[j]);
        let kernel = svd.null_space();
        // assemble τ = T r, gate layers only
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut layer_rows = Vec::new();
        for id in space.gates().ids() {
            let gens = space.layer_generators(id).expect("r basis has every layer");
            let members = gens.members();
            let cols: Vec<usize> = members
                .iter()
                .map(|a| space.column_index(&Column::Gate { layer: id.to_string(), label: *a }).expect("column"))
                .collect();
            let mut block = vec![vec![0.0; members.len()]; members.len()];
            for (j, m) in members.iter().enumerate() {
                let s = m.support();
                let x: Vec<f64> =
                    members.iter().map(|a| if a.support() & s == s && a.restrict(s) == *m { 1.0 } else { 0.0 }).collect();
                for (i, t) in x_to_tau(gens, &x).into_iter().enumerate() {
                    block[i][j] = t;
                }
            }
            let start = rows.len();
            for row in block {
                rows.push(row.into_iter().enumerate().filter(|(_, v)| *v != 0.0).map(|(j, v)| (cols[j], v)).collect());
            }
            layer_rows.push((id.to_string(), start..rows.len()));
        }
        let mut tau_map = DMatrix::zeros(rows.len(), f.ncols());
        for (i, r) in rows.iter().enumerate() {
            for &(j, v) in r {
                tau_map[(i, j)] = v;
            }
        }
        Ok(GaugeProblem { f, b, tau_map, layer_rows, r0, res0, row_map, kernel, max_iterations: 200_000 })
    }

    /// Minimum-norm least-squares point.
    pub fn pseudo_inverse(&self) -> Vec<f64> {
        self.r0.iter().copied().collect()
    }

    pub fn ls_residual(&self) -> f64 {
        self.res0
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.ncols()
    }

    pub fn residual(&self, r: &[f64]) -> f64 {
        (&self.f * DVector::from_column_slice(r) - &self.b).norm()
    }

    /// Gate generator rates at `r`.
    pub fn gate_tau(&self, r: &[f64]) -> Vec<f64> {
        (&self.tau_map * DVector::from_column_slice(r)).iter().copied().collect()
    }

    /// Σ max(0, τ) over gate generators: ln γ of the gate inverses.
    pub fn log_gamma(&self, r: &[f64]) -> f64 {
        self.gate_tau(r).iter().map(|t| t.max(0.0)).sum()
    }

    /// ln γ of each gate layer's inverse at `r`.
    pub fn layer_log_gamma(&self, r: &[f64]) -> Vec<(String, f64)> {
        let tau = self.gate_tau(r);
        self.layer_rows.iter().map(|(id, rows)| (id.clone(), tau[rows.clone()].iter().map(|t| t.max(0.0)).sum())).collect()
    }

    fn point(&self, v: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let mut r = self.r0.clone();
        if !v.is_empty() {
            r += &self.row_map * v;
        }
        if !z.is_empty() {
            r += &self.kernel * z;
        }
        r
    }

    fn result(&self, r: DVector<f64>, epsilon: f64, iterations: usize, trace: Vec<f64>) -> GaugeOptResult {
        let r: Vec<f64> = r.iter().copied().collect();
        let lg = self.log_gamma(&r);
        GaugeOptResult {
            residual: self.residual(&r),
            gamma_star: lg.exp(),
            log_gamma_star: lg,
            r_star: r,
            epsilon_used: epsilon,
            iterations,
            trace,
        }
    }

    /// ADMM over w = (v, z) with ‖v‖ ≤ radius; returns (v, z, iterations, trace).
    fn admm(&self, radius: f64, start_z: Option<&DVector<f64>>) -> (DVector<f64>, DVector<f64>, usize, Vec<f64>) {
        let k = if radius > 0.0 { self.row_map.ncols() } else { 0 };
        let nz = self.kernel.ncols();
        let dim = k + nz;
        let mut v_best = DVector::zeros(k);
        let mut z_best = start_z.cloned().unwrap_or_else(|| DVector::zeros(nz));
        let objective = |v: &DVector<f64>, z: &DVector<f64>| {
            let r = self.point(v, z);
            (&self.tau_map * r).iter().map(|t| t.max(0.0)).sum::<f64>()
        };
        let mut best = objective(&v_best, &z_best);
        if dim == 0 {
            return (v_best, z_best, 0, vec![best]);
        }
        let mut basis = DMatrix::zeros(self.f.ncols(), dim);
        if k > 0 {
            basis.columns_mut(0, k).copy_from(&self.row_map);
        }
        basis.columns_mut(k, nz).copy_from(&self.kernel);
        let bm = &self.tau_map * &basis;
        let g = &self.tau_map * &self.r0;
        let mut normal = bm.transpose() * &bm;
        for i in 0..k {
            normal[(i, i)] += 1.0;
        }
        let ridge = 1e-12 * (normal.trace() / dim as f64).max(1e-300);
        for i in 0..dim {
            normal[(i, i)] += ridge;
        }
        let chol = normal.cholesky().expect("ridge makes the normal matrix positive definite");
        let bt = bm.transpose();
        let m = bm.nrows();
        let mut w = DVector::zeros(dim);
        w.rows_mut(k, nz).copy_from(&z_best);
        let mut s = &bm * &w + &g;
        let mut y = DVector::<f64>::zeros(k);
        let mut u1 = DVector::<f64>::zeros(m);
        let mut u2 = DVector::<f64>::zeros(k);
        let scale = g.iter().fold(0.0f64, |a, t| a.max(t.abs())).max(1e-12);
        let mut rho = 1.0 / scale;
        let mut trace = vec![best];
        let mut last_check = best;
        let mut iters = 0;
        while iters < self.max_iterations {
            iters += 1;
            let mut rhs = &bt * (&s - &g - &u1);
            if k > 0 {
                let extra = &y - &u2;
                let mut head = rhs.rows_mut(0, k);
                head += &extra;
            }
            w = chol.solve(&rhs);
            let bw = &bm * &w;
            let s_old = s.clone();
            let y_old = y.clone();
            let inv = 1.0 / rho;
            s = (&bw + &g + &u1).map(|t| {
                if t > inv {
                    t - inv
                } else if t >= 0.0 {
                    0.0
                } else {
                    t
                }
            });
            let wv = w.rows(0, k).into_owned();
            if k > 0 {
                y = &wv + &u2;
                let norm = y.norm();
                if norm > radius {
                    y *= radius / norm;
                }
            }
            let p1 = &bw + &g - &s;
            let p2 = &wv - &y;
            u1 += &p1;
            u2 += &p2;
            // feasible candidate: project v onto the ball
            let mut v = wv.clone();
            let vn = v.norm();
            if vn > radius {
                v *= radius / vn;
            }
            let z = w.rows(k, nz).into_owned();
            let obj = objective(&v, &z);
            if obj < best {
                best = obj;
                v_best = v;
                z_best = z;
            }
            if iters % 50 == 0 {
                let primal = (p1.norm_squared() + p2.norm_squared()).sqrt();
                let mut ds = &bt * (&s - &s_old);
                if k > 0 {
                    let dy = &y - &y_old;
                    let mut head = ds.rows_mut(0, k);
                    head += &dy;
                }
                let dual = rho * ds.norm();
                if primal > 10.0 * dual {
                    rho *= 2.0;
                    u1 /= 2.0;
                    u2 /= 2.0;
                } else if dual > 10.0 * primal {
                    rho /= 2.0;
                    u1 *= 2.0;
                    u2 *= 2.0;
                }
            }
            if iters % 100 == 0 {
                trace.push(best);
                if iters >= 1000 && (last_check - best).abs() < 1e-8 {
                    break;
                }
                last_check = best;
            }
        }
        (v_best, z_best, iters, trace)
    }
}

/// Minimize gate overhead over the kernel only, residual fixed at the
/// least-squares value.
pub fn gauge_optimize_two_step(problem: &GaugeProblem) -> Result<GaugeOptResult> {
    let (v, z, iters, trace) = problem.admm(0.0, None);
    Ok(problem.result(problem.point(&v, &z), problem.res0, iters, trace))
}

/// Minimize gate overhead over every r with ‖F r − b‖ ≤ ε. The default ε is
/// 1.05 times the least-squares residual. The two-step optimum is used as
/// a starting point, so the result is never worse.
pub fn gauge_optimize(problem: &GaugeProblem, epsilon: Option<f64>) -> Result<GaugeOptResult> {
    let eps = epsilon.unwrap_or(1.05 * problem.res0);
    if eps + FEASIBILITY_TOL < problem.res0 {
        return Err(Error::Infeasible { epsilon: eps, min_residual: problem.res0 });
    }
    let two = gauge_optimize_two_step(problem)?;
    let radius = (eps * eps - problem.res0 * problem.res0).max(0.0).sqrt();
    let z0 = if problem.kernel.ncols() > 0 {
        problem.kernel.transpose() * (DVector::from_column_slice(&two.r_star) - &problem.r0)
    } else {
        DVector::zeros(0)
    };
    let (mut v, z, iters, mut trace) = problem.admm(radius, Some(&z0));
    // the ball is exact only in exact arithmetic; pull v in until feasible
    let feasible = |v: &DVector<f64>| problem.residual(problem.point(v, &z).as_slice()) <= eps;
    if !feasible(&v) {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if feasible(&(&v * mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        v *= lo;
    }
    let mut out = problem.result(problem.point(&v, &z), eps, iters + two.iterations, Vec::new());
    if out.log_gamma_star > two.log_gamma_star {
        out = GaugeOptResult { epsilon_used: eps, ..two.clone() };
    }
    trace.insert(0, two.log_gamma_star);
    out.trace = trace;
    if out.residual > eps + FEASIBILITY_TOL {
        return Err(Error::Infeasible { epsilon: eps, min_residual: problem.res0 });
    }
    Ok(out)
}

//! Design matrices: which parameters each learning observable depends on.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::plan::{ExperimentPlan, SettingKind};
use crate::error::{Error, Result};
use crate::model::space::ParamSpace;
use crate::model::{FidelitySource, Slot};
use crate::pauli::Pauli;
use crate::sim::backpropagate_observable;

#[derive(Clone, Debug, PartialEq)]
pub struct DesignRow {
    pub setting: usize,
    pub kind: SettingKind,
    pub observable: Pauli,
    /// Noiseless value, ±1.
    pub ideal: f64,
    /// Sparse non-negative integer coefficients, sorted by column.
    pub coeffs: Vec<(usize, u32)>,
    /// The backpropagated noise slots, for exact data generation.
    pub terms: Vec<(Slot, Pauli)>,
}

#[derive(Clone, Debug)]
pub struct DesignMatrix {
    pub space: Arc<ParamSpace>,
    pub rows: Vec<DesignRow>,
}

pub fn build_design_matrix(plan: &ExperimentPlan, space: Arc<ParamSpace>) -> Result<DesignMatrix> {
    if !Arc::ptr_eq(&plan.gates, space.gates()) && *plan.gates != **space.gates() {
        return Err(Error::Invalid("plan and parameter space use different gate sets".into()));
    }
    let mut rows = Vec::with_capacity(plan.row_count());
    for (si, setting) in plan.settings.iter().enumerate() {
        let circuit = setting.circuit(&plan.gates)?;
        for o in &setting.observables {
            let bp = backpropagate_observable(&circuit, o)?;
            if bp.ideal == 0.0 {
                return Err(Error::Invalid(format!("{o} has no signal in setting {si}")));
            }
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (slot, a) in &bp.terms {
                for (col, c) in space.expand(slot, a)? {
                    *acc.entry(col).or_default() += c;
                }
            }
            let coeffs = acc.into_iter().filter(|&(_, c)| c != 0.0).map(|(k, c)| (k, c.round() as u32)).collect();
            rows.push(DesignRow { setting: si, kind: setting.kind, observable: *o, ideal: bp.ideal, coeffs, terms: bp.terms });
        }
    }
    Ok(DesignMatrix { space, rows })
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.space.len()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        self.dense_rows(&(0..self.rows.len()).collect::<Vec<_>>())
    }

    pub fn dense_rows(&self, which: &[usize]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(which.len(), self.ncols());
        for (r, &i) in which.iter().enumerate() {
            for &(c, v) in &self.rows[i].coeffs {
                m[(r, c)] = v as f64;
            }
        }
        m
    }

    pub fn rank(&self) -> usize {
        crate::linalg::rank(&self.dense())
    }

    /// Infinite-statistics data: b_j = Σ x over the row's path.
    pub fn exact_b(&self, truth: &dyn FidelitySource) -> Result<Vec<f64>> {
        self.rows.iter().map(|r| r.terms.iter().map(|(s, a)| truth.log_fidelity(s, a)).sum()).collect()
    }

    /// Row j applied to a parameter vector.
    pub fn predict(&self, params: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.coeffs.iter().map(|&(c, v)| v as f64 * params[c]).sum()).collect()
    }

    /// Text dump: header with column labels, then one line per row.
    pub fn to_text(&self) -> String {
        let n = self.space.n();
        let mut s = String::new();
        let _ = writeln!(s, "# rows {} cols {}", self.nrows(), self.ncols());
        for (i, c) in self.space.columns().iter().enumerate() {
            let _ = writeln!(s, "col {i} {}", c.label(n));
        }
        for r in &self.rows {
            let _ = write!(s, "row {} {}", r.setting, r.observable);
            for &(c, v) in &r.coeffs {
                let _ = write!(s, " {c}:{v}");
            }
            s.push('\n');
        }
        s
    }
}

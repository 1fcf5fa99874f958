//! The symmetric baseline: conjugate pairs share one fidelity and all SPAM
//! error is charged to readout.

use std::sync::Arc;

use super::design::DesignMatrix;
use super::fit::{least_squares, Harvest};
use super::plan::SettingKind;
use crate::error::Result;
use crate::model::space::FittedModel;
use crate::model::{FidelitySource, Slot};
use crate::pauli::Pauli;

#[derive(Clone, Debug)]
pub struct BaselineModel {
    pub fitted: FittedModel,
}

impl FidelitySource for BaselineModel {
    fn n(&self) -> usize {
        self.fitted.space.n()
    }

    fn log_fidelity(&self, slot: &Slot, a: &Pauli) -> Result<f64> {
        if a.is_identity() {
            return Ok(0.0);
        }
        match slot {
            Slot::Prep => Ok(0.0),
            Slot::Meas => Ok(self.fitted.log_fidelity(&Slot::Prep, a)? + self.fitted.log_fidelity(&Slot::Meas, a)?),
            Slot::Layer(id) => {
                let image = self.fitted.space.gates().layer(id)?.apply(a).unsigned();
                Ok(0.5 * (self.fitted.log_fidelity(slot, a)? + self.fitted.log_fidelity(slot, &image)?))
            }
        }
    }
}

/// Fit from SPAM and even-depth rows only, then symmetrize.
pub fn fit_inconsistent_baseline(matrix: &DesignMatrix, data: &Harvest) -> Result<BaselineModel> {
    let sub = data.filter(|r| matches!(matrix.rows[r].kind, SettingKind::Spam | SettingKind::Even));
    let (fit, _) = least_squares(matrix, &sub)?;
    Ok(BaselineModel { fitted: FittedModel::new(Arc::clone(&matrix.space), fit.params)? })
}

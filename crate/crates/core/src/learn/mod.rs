//! Learning: experiment plans, design matrices and fits.

pub mod baseline;
pub mod design;
pub mod fit;
pub mod plan;

pub use baseline::{fit_inconsistent_baseline, BaselineModel};
pub use design::{build_design_matrix, DesignMatrix, DesignRow};
pub use fit::{fit_self_consistent, harvest_b, FitResult, Harvest};
pub use plan::{restricted_plan, ring_plan, ExperimentPlan, ExperimentSetting, SettingKind};

use crate::error::Result;
use crate::model::GateSetNoiseModel;
use crate::par;
use crate::sim::{sample_counts, ExpectationEstimate, ShotConfig};

/// Finite-shot estimates for every design row, one circuit per setting.
pub fn sample_design(
    matrix: &DesignMatrix,
    plan: &ExperimentPlan,
    truth: &GateSetNoiseModel,
    cfg: &ShotConfig,
) -> Result<Vec<ExpectationEstimate>> {
    let per_setting = par::map_range(plan.settings.len(), |i| -> Result<Vec<ExpectationEstimate>> {
        let s = &plan.settings[i];
        let c = s.circuit(&plan.gates)?;
        Ok(sample_counts(&c, truth, &s.observables, cfg, i as u64)?.1)
    });
    let mut by_setting = Vec::with_capacity(per_setting.len());
    for r in per_setting {
        by_setting.push(r?);
    }
    let mut next = vec![0usize; plan.settings.len()];
    Ok(matrix
        .rows
        .iter()
        .map(|row| {
            let k = next[row.setting];
            next[row.setting] += 1;
            by_setting[row.setting][k]
        })
        .collect())
}

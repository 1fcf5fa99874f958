//! The pipeline behind `scpec run`: learn both models, predict and mitigate
//! benchmark observables, optimize the gauge.

use std::sync::Arc;

use serde::Serialize;

use scpec::circuits::{ghz_circuit, repeated_cnot, staircase_circuit};
use scpec::devices::ring_factor_sets;
use scpec::learn::{
    build_design_matrix, fit_inconsistent_baseline, fit_self_consistent, harvest_b, restricted_plan, ring_plan, sample_design,
    DesignMatrix, ExperimentPlan, Harvest,
};
use scpec::mitigate::{gauge_optimize, gauge_optimize_two_step, GaugeProblem, PlanMode, QuasiProbPlan};
use scpec::model::space::{FittedModel, ParamSpace};
use scpec::ptgraph::{build_graph, LabelSet};
use scpec::sim::{backpropagate_observable, exact_pauli_expectation, sample_counts, ShotConfig};
use scpec::{Circuit, FidelitySource, GateSet, GateSetNoiseModel, GaugeClass, Pauli};

use crate::config::{ExperimentConfig, Task, Topology, TruthKind};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Bundle {
    pub name: String,
    pub schema: u32,
    pub topology: Topology,
    pub ansatz: String,
    pub truth: TruthKind,
    pub exact: bool,
    pub shots: u64,
    pub twirls: u32,
    pub seed: u64,
    pub tasks: Vec<Task>,
    pub instances: Vec<Instance>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Instance {
    pub n: usize,
    pub learn: Option<LearnOut>,
    pub mitigate: Vec<ObservableRow>,
    pub gauge_opt: Option<GaugeOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamEntry {
    pub column: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LearnOut {
    pub settings: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub residual: f64,
    pub dropped: usize,
    pub consistent: Vec<ParamEntry>,
    /// Column values of the fit the baseline symmetrizes.
    pub baseline: Vec<ParamEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObservableRow {
    pub circuit: String,
    pub observable: String,
    pub ideal: f64,
    pub unmitigated: f64,
    /// Zero in exact mode.
    pub unmitigated_stderr: f64,
    pub predicted_consistent: f64,
    pub predicted_inconsistent: f64,
    /// Infinite-sample PEC value over the ideal value, per model.
    pub ratio_consistent: f64,
    pub ratio_inconsistent: f64,
    /// Shot noise of the unmitigated value carried into either ratio.
    pub ratio_stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaRow {
    pub slot: String,
    pub gamma_0: f64,
    pub gamma_two_step: f64,
    pub gamma_star: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeOut {
    pub ls_residual: f64,
    pub epsilon: f64,
    pub kernel_dim: usize,
    pub residual_two_step: f64,
    pub residual_star: f64,
    pub iterations: usize,
    /// Gate layers, their total, then SPAM (not part of the objective).
    pub gamma: Vec<GammaRow>,
    pub trace: Vec<f64>,
}

/// Design and plan for one problem size.
struct Learning {
    plan: ExperimentPlan,
    matrix: DesignMatrix,
}

fn learning(cfg: &ExperimentConfig, gates: &Arc<GateSet>) -> scpec::Result<Learning> {
    let (plan, space) = match cfg.topology {
        Topology::Pair => {
            let graph = build_graph(gates.clone(), &LabelSet::All)?;
            let touched: Vec<(String, Pauli)> = Pauli::all(2).skip(1).map(|a| ("cx".to_string(), a)).collect();
            (restricted_plan(gates.clone(), &touched, &cfg.depths, true)?, graph.param_space()?)
        }
        Topology::Line => {
            let (c, o) = ghz_circuit(gates)?;
            let bp = backpropagate_observable(&c, &o)?;
            let touched: Vec<(String, Pauli)> = bp.layer_terms().map(|(id, a)| (id.to_string(), *a)).collect();
            let mut labels = touched.clone();
            let mut patterns = vec![];
            for (id, a) in &touched {
                let ga = gates.layer(id)?.conjugate(a)?.unsigned();
                labels.push((id.clone(), ga));
                patterns.push(a.support());
                patterns.push(ga.support());
            }
            let plan = restricted_plan(gates.clone(), &touched, &cfg.depths, false)?;
            (plan, ParamSpace::x_basis(gates.clone(), patterns, labels, GaugeClass::PerPattern)?)
        }
        Topology::Ring => {
            let (spam, layers) = ring_factor_sets(gates.n())?;
            (ring_plan(gates.clone(), &cfg.depths)?, ParamSpace::r_basis(gates.clone(), spam, layers, GaugeClass::PerQubit)?)
        }
    };
    let matrix = build_design_matrix(&plan, Arc::new(space))?;
    Ok(Learning { plan, matrix })
}

/// Benchmark circuits and their observables.
fn benchmarks(cfg: &ExperimentConfig, gates: &Arc<GateSet>) -> scpec::Result<Vec<(String, Circuit, Vec<Pauli>)>> {
    Ok(match cfg.topology {
        Topology::Pair => {
            let obs: Vec<Pauli> = ["ZI", "IZ", "ZZ"].iter().map(|s| s.parse()).collect::<scpec::Result<_>>()?;
            (1..=cfg.max_depth)
                .map(|d| Ok((format!("cnot-x{d}"), repeated_cnot(gates, d)?, obs.clone())))
                .collect::<scpec::Result<_>>()?
        }
        Topology::Line => {
            let (c, o) = ghz_circuit(gates)?;
            vec![(format!("ghz-{}", gates.n()), c, vec![o])]
        }
        Topology::Ring => {
            let (c, obs) = staircase_circuit(gates, cfg.blocks)?;
            vec![(format!("staircase-{}", cfg.blocks), c, obs)]
        }
    })
}

fn shot_config(cfg: &ExperimentConfig) -> ShotConfig {
    ShotConfig { shots: cfg.shots, twirls: cfg.twirls, seed: cfg.seed, twirling: true }
}

fn entries(m: &FittedModel) -> Vec<ParamEntry> {
    let n = m.space.n();
    m.space.columns().iter().zip(&m.params).map(|(c, &value)| ParamEntry { column: c.label(n), value }).collect()
}

// keeps benchmark sampling streams apart from the learning settings
const BENCH_DOMAIN: u64 = 1 << 40;

fn run_instance(cfg: &ExperimentConfig, n: usize) -> Result<Instance, CliError> {
    let gates = cfg.gates(n)?;
    let truth = cfg.truth(&gates)?;
    let mut out = Instance { n, learn: None, mitigate: vec![], gauge_opt: None };
    let wants = |t: Task| cfg.tasks.contains(&t);
    if !(wants(Task::Learn) || wants(Task::Mitigate) || wants(Task::GaugeOpt)) {
        return Ok(out);
    }

    let l = learning(cfg, &gates)?;
    let f = &l.matrix;
    let data = if cfg.exact {
        Harvest::exact(f, &truth)?
    } else {
        harvest_b(f, &sample_design(f, &l.plan, &truth, &shot_config(cfg))?)?
    };
    let fit = fit_self_consistent(f, &data)?;
    let consistent = FittedModel::new(f.space.clone(), fit.params.clone())?;
    let baseline = fit_inconsistent_baseline(f, &data)?;
    out.learn = Some(LearnOut {
        settings: l.plan.settings.len(),
        rows: f.nrows(),
        cols: f.ncols(),
        rank: fit.rank,
        kernel_dim: fit.kernel_dim,
        residual: fit.residual,
        dropped: data.dropped.len(),
        consistent: entries(&consistent),
        baseline: entries(&baseline.fitted),
    });

    if wants(Task::Mitigate) {
        out.mitigate = mitigate(cfg, &gates, &truth, &consistent, &baseline)?;
    }
    if wants(Task::GaugeOpt) {
        out.gauge_opt = Some(optimize_gauge(cfg, f, &data)?);
    }
    Ok(out)
}

fn mitigate(
    cfg: &ExperimentConfig,
    gates: &Arc<GateSet>,
    truth: &GateSetNoiseModel,
    consistent: &dyn FidelitySource,
    inconsistent: &dyn FidelitySource,
) -> scpec::Result<Vec<ObservableRow>> {
    let mut rows = vec![];
    for (k, (name, c, obs)) in benchmarks(cfg, gates)?.into_iter().enumerate() {
        let measured: Vec<(f64, f64)> = if cfg.exact {
            obs.iter().map(|o| Ok((exact_pauli_expectation(&c, truth, o)?, 0.0))).collect::<scpec::Result<_>>()?
        } else {
            sample_counts(&c, truth, &obs, &shot_config(cfg), BENCH_DOMAIN + k as u64)?
                .1
                .iter()
                .map(|e| (e.value, e.stderr))
                .collect()
        };
        for (o, (unmitigated, se)) in obs.iter().zip(measured) {
            let ideal = backpropagate_observable(&c, o)?.ideal;
            let pc = exact_pauli_expectation(&c, consistent, o)?;
            let pi = exact_pauli_expectation(&c, inconsistent, o)?;
            rows.push(ObservableRow {
                circuit: name.clone(),
                observable: o.to_string(),
                ideal,
                unmitigated,
                unmitigated_stderr: se,
                predicted_consistent: pc,
                predicted_inconsistent: pi,
                ratio_consistent: unmitigated / pc,
                ratio_inconsistent: unmitigated / pi,
                ratio_stderr: se / pc.abs(),
            });
        }
    }
    Ok(rows)
}

fn spam_gammas(f: &DesignMatrix, r: &[f64]) -> scpec::Result<(f64, f64)> {
    let model = FittedModel::new(f.space.clone(), r.to_vec())?.to_noise_model("fit")?;
    let plan = QuasiProbPlan::new(&model, PlanMode::Factored)?;
    let t = plan.gamma_table();
    Ok((t[0].gamma, t[1].gamma))
}

fn optimize_gauge(cfg: &ExperimentConfig, f: &DesignMatrix, data: &Harvest) -> Result<GaugeOut, CliError> {
    let problem = GaugeProblem::new(f, data)?;
    let epsilon = cfg.epsilon_factor * problem.ls_residual();
    let pinv = problem.pseudo_inverse();
    let two = gauge_optimize_two_step(&problem)?;
    let star = gauge_optimize(&problem, Some(epsilon))?;
    let points = [&pinv, &two.r_star, &star.r_star];
    let per_layer: Vec<Vec<(String, f64)>> = points.iter().map(|r| problem.layer_log_gamma(r)).collect();
    let mut gamma: Vec<GammaRow> = (0..per_layer[0].len())
        .map(|i| GammaRow {
            slot: format!("layer:{}", per_layer[0][i].0),
            gamma_0: per_layer[0][i].1.exp(),
            gamma_two_step: per_layer[1][i].1.exp(),
            gamma_star: per_layer[2][i].1.exp(),
        })
        .collect();
    let total = |r: &[f64]| problem.log_gamma(r).exp();
    gamma.push(GammaRow {
        slot: "gates".into(),
        gamma_0: total(&pinv),
        gamma_two_step: two.gamma_star,
        gamma_star: star.gamma_star,
    });
    let spam: Vec<(f64, f64)> = points.iter().map(|r| spam_gammas(f, r)).collect::<scpec::Result<_>>()?;
    gamma.push(GammaRow { slot: "prep".into(), gamma_0: spam[0].0, gamma_two_step: spam[1].0, gamma_star: spam[2].0 });
    gamma.push(GammaRow { slot: "meas".into(), gamma_0: spam[0].1, gamma_two_step: spam[1].1, gamma_star: spam[2].1 });
    Ok(GaugeOut {
        ls_residual: problem.ls_residual(),
        epsilon,
        kernel_dim: problem.kernel_dim(),
        residual_two_step: two.residual,
        residual_star: star.residual,
        iterations: star.iterations,
        gamma,
        trace: star.trace,
    })
}

/// Run every instance of `cfg`. Instances are independent and run in
/// parallel; the bundle keeps them in size order.
pub fn run(cfg: &ExperimentConfig) -> Result<Bundle, CliError> {
    let sizes = cfg.sizes();
    let instances = scpec::par::map(&sizes, |&n| run_instance(cfg, n)).into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(Bundle {
        name: cfg.name.clone(),
        schema: cfg.schema,
        topology: cfg.topology,
        ansatz: cfg.ansatz.clone(),
        truth: cfg.truth,
        exact: cfg.exact,
        shots: cfg.shots,
        twirls: cfg.twirls,
        seed: cfg.seed,
        tasks: cfg.tasks.clone(),
        instances,
    })
}

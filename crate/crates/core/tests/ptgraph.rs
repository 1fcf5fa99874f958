use std::sync::Arc;

use nalgebra::DVector;

use scpec::circuits::ghz_circuit;
use scpec::devices::{line_gates, pair_gates};
use scpec::learn::{build_design_matrix, restricted_plan};
use scpec::ptgraph::{build_graph, LabelSet};
use scpec::sim::backpropagate_observable;
use scpec::{CliffordLayer, GateSet, Pauli};

#[test]
fn ghz21_graph_matches_design_rank() {
    let gates = line_gates(21).unwrap();
    let (c, o) = ghz_circuit(&gates).unwrap();
    let bp = backpropagate_observable(&c, &o).unwrap();
    let touched: Vec<(String, Pauli)> = bp.layer_terms().map(|(id, a)| (id.to_string(), *a)).collect();
    let mut labels = touched.clone();
    for (id, a) in &touched {
        labels.push((id.clone(), gates.layer(id).unwrap().conjugate(a).unwrap().unsigned()));
    }
    let graph = build_graph(gates.clone(), &LabelSet::Only(labels)).unwrap();
    let dof = graph.classify_dof();
    let plan = restricted_plan(gates, &touched, &[2, 4, 8], false).unwrap();
    let f = build_design_matrix(&plan, Arc::new(graph.param_space().unwrap())).unwrap();
    assert_eq!(dof.parameters, f.ncols());
    assert_eq!(dof.learnable_count, f.rank());
    assert_eq!(dof.learnable_count, 34);
    assert_eq!(dof.gauge_count, 12);
}

#[test]
fn line_cycles_have_zero_gauge_weight() {
    let gates = line_gates(3).unwrap();
    let graph = build_graph(gates.clone(), &LabelSet::All).unwrap();
    let space = graph.param_space().unwrap();
    let gauge = space.gauge_kernel_basis().unwrap();
    let cycles = graph.cycle_basis();
    assert_eq!(cycles.len(), graph.classify_dof().learnable_count);
    for cyc in &cycles {
        let mut v = DVector::zeros(space.len());
        for (e, &k) in graph.edges().iter().zip(cyc) {
            v[space.column_index(&graph.edge_column(e)).unwrap()] += k as f64;
        }
        for y in &gauge {
            assert!(v.dot(&DVector::from_column_slice(y)).abs() < 1e-12);
        }
    }
}

#[test]
fn adding_a_layer_never_loses_learnable_parameters() {
    let one = Arc::new(GateSet::new(3, [("a".to_string(), CliffordLayer::cnots_only(3, vec![(0, 1)]).unwrap())]).unwrap());
    let two = line_gates(3).unwrap();
    let l1 = build_graph(one, &LabelSet::All).unwrap().classify_dof().learnable_count;
    let l2 = build_graph(two, &LabelSet::All).unwrap().classify_dof().learnable_count;
    assert!(l2 >= l1);
}

#[test]
fn pair_degenerate_pairs_are_the_conjugate_pairs() {
    let dof = build_graph(pair_gates(), &LabelSet::All).unwrap().classify_dof();
    let mut got: Vec<(String, String)> = dof.degenerate_pairs.iter().map(|(_, a, b)| (a.to_string(), b.to_string())).collect();
    got.sort();
    let mut want: Vec<(String, String)> = scpec::devices::CNOT_CONJUGATE_PAIRS
        .iter()
        .map(|(a, b)| if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) })
        .collect();
    want.sort();
    assert_eq!(got, want);
}

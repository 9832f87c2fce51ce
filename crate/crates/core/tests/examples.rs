//! Runs every example at a small size.

#[allow(dead_code)]
#[path = "../examples/acoustic_modeling.rs"]
mod acoustic_modeling;
#[allow(dead_code)]
#[path = "../examples/cost_model.rs"]
mod cost_model;
#[allow(dead_code)]
#[path = "../examples/cpml_absorption.rs"]
mod cpml_absorption;
#[allow(dead_code)]
#[path = "../examples/distributed_ranks.rs"]
mod distributed_ranks;
#[allow(dead_code)]
#[path = "../examples/elastic_modeling.rs"]
mod elastic_modeling;
#[allow(dead_code)]
#[path = "../examples/model_files.rs"]
mod model_files;
#[allow(dead_code)]
#[path = "../examples/scaling_bench.rs"]
mod scaling_bench;
#[allow(dead_code)]
#[path = "../examples/stencil_weights.rs"]
mod stencil_weights;
#[allow(dead_code)]
#[path = "../examples/tcp_ranks.rs"]
mod tcp_ranks;
#[allow(dead_code)]
#[path = "../examples/variable_density.rs"]
mod variable_density;

#[test]
fn acoustic() {
    let mut out = Vec::new();
    let rec = acoustic_modeling::run_example(24, 100, 5, &mut out).unwrap();
    assert_eq!(rec.nreceivers, 24 * 24);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains(" time step         100 /         100"));
}

#[test]
fn cost_table() {
    let costs = cost_model::run_example(&[4]).unwrap();
    assert_eq!(costs.len(), 3);
    assert_eq!(costs[0].flops_per_point, 41);
}

#[test]
fn cpml() {
    let (with, without) = cpml_absorption::run_example(60, 10).unwrap();
    assert!(with < 0.02 && without > 0.2, "{with} {without}");
}

#[test]
fn distributed() {
    assert_eq!(distributed_ranks::run_example(24, 20, [1, 2, 2]).unwrap(), 0.0);
}

#[test]
fn elastic() {
    let rows = elastic_modeling::run_example(48, 250).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|(_, p, _)| *p > 0.0 && p.is_finite()));
}

#[test]
fn model_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let shot = model_files::run_example(dir.path(), 24, 20).unwrap();
    let (rec, side) = seisfd::source::ShotRecord::load(&shot).unwrap();
    assert_eq!((rec.nsteps, side.nreceivers), (20, 24 * 24));
    assert!(dir.path().join("vs.f32").exists());
}

#[test]
fn scaling() {
    let dir = tempfile::tempdir().unwrap();
    let result = scaling_bench::run_example(dir.path(), 24, 3, &[1, 2]).unwrap();
    assert!(result.runs.iter().all(|r| r.error.is_none()));
    assert!(dir.path().join("roofline.svg").exists());
}

#[test]
fn weights() {
    let [(_, second), (_, first)] = stencil_weights::run_example(2);
    let s: Vec<String> = second.iter().map(ToString::to_string).collect();
    let f: Vec<String> = first.iter().map(ToString::to_string).collect();
    assert_eq!(s, ["4/3", "-1/12"]);
    assert_eq!(f, ["9/8", "-1/24"]);
}

#[test]
fn tcp() {
    let rec = tcp_ranks::run_example(20, 15).unwrap();
    assert_eq!(rec.nsteps, 15);
}

#[test]
fn density_contrast_reflects() {
    let (direct, reflected) = variable_density::run_example(40, 300).unwrap();
    assert!(reflected > 0.01 * direct, "{reflected} vs {direct}");
}

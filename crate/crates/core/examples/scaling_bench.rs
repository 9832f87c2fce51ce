//! Thread-scaling experiment with the benchmark harness. Writes
//! `scaling.csv`, `efficiency.svg` and `roofline.svg` into the output
//! directory.
//!
//! `cargo run --release --example scaling_bench -- bench-out 96 20 1,2,4`

use std::path::Path;

use seisfd::bench::{count_stencil_cost, emit_report, run_scaling, thread_scaling_plan, MachineFile, ScalingMode, ScalingResult};
use seisfd::driver::SimConfig;
use seisfd::propagators::PropagatorKind;

// Rough figures for a desktop core; replace with measured peaks.
const MACHINE: &str = r#"{"name":"desktop","peak_gflops":50,"memory":[{"name":"L2","peak_bw_gbs":150},{"name":"DRAM","peak_bw_gbs":20}]}"#;

pub fn run_example(out_dir: &Path, n: usize, nsteps: usize, threads: &[usize]) -> seisfd::Result<ScalingResult> {
    let template = SimConfig {
        ngrid: [n; 3],
        nsteps,
        ndamping: [(n / 6).max(4); 3],
        ..SimConfig::default()
    };
    let plan = thread_scaling_plan([n; 3], threads);
    let result = run_scaling(&plan, &template, ScalingMode::Strong);
    let cost = count_stencil_cost(PropagatorKind::AcousticIsoCd, 4)?;
    emit_report(out_dir, &result, &cost, Some(&MachineFile::parse(MACHINE)?))?;
    Ok(result)
}

fn main() -> seisfd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args.first().map_or("bench-out", String::as_str);
    let n = args.get(1).map_or(96, |a| a.parse().expect("grid size"));
    let nsteps = args.get(2).map_or(20, |a| a.parse().expect("time steps"));
    let threads: Vec<usize> = args
        .get(3)
        .map_or("1,2,4", String::as_str)
        .split(',')
        .map(|s| s.parse().expect("thread count"))
        .collect();
    let result = run_example(Path::new(out), n, nsteps, &threads)?;
    for r in &result.runs {
        match (&r.error, r.efficiency_pct) {
            (None, Some(e)) => println!("{:>3} threads  {:8.3} s  {e:6.1}%", r.entry.nthreads, r.kernel_s),
            (err, _) => println!("{:>3} threads  failed: {}", r.entry.nthreads, err.as_deref().unwrap_or("?")),
        }
    }
    println!("report written to {out}");
    Ok(())
}

//! Runs the constant-density acoustic kernel on the default two-layer model
//! and prints the run report.
//!
//! `cargo run --release --example acoustic_modeling -- 120 200 20`
//!
//! Arguments: grid points per axis, time steps, damping layer width.

use seisfd::driver::{run_with_output, SimConfig};
use seisfd::model::two_layer_model;
use seisfd::source::ShotRecord;

pub fn run_example(n: usize, nsteps: usize, nd: usize, out: &mut dyn std::io::Write) -> seisfd::Result<ShotRecord> {
    let config = SimConfig {
        ngrid: [n; 3],
        nsteps,
        ndamping: [nd; 3],
        verbose: true,
        ..SimConfig::default()
    };
    let model = two_layer_model(&config.grid()?)?;
    let (record, report) = run_with_output::<f32>(&config, &model, out)?;
    writeln!(out, "dt = {:.6e} s, peak recorded amplitude = {:.4e}", report.dt, record.max_abs()).ok();
    Ok(record)
}

fn main() -> seisfd::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(100);
    let nsteps = args.next().unwrap_or(300);
    let nd = args.next().unwrap_or(27);
    run_example(n, nsteps, nd, &mut std::io::stdout())?;
    Ok(())
}

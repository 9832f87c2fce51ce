//! Domain decomposition with in-process ranks. Runs the same shot on one
//! rank and on a Cartesian rank grid and checks that the records agree bit
//! for bit.
//!
//! `cargo run --release --example distributed_ranks -- 64 100 2,2,2`

use seisfd::dist::run_in_process;
use seisfd::driver::{run, SimConfig};
use seisfd::model::two_layer_model;

/// Returns the largest absolute trace difference (expected to be zero).
pub fn run_example(n: usize, nsteps: usize, dims: [usize; 3]) -> seisfd::Result<f64> {
    let config = SimConfig {
        ngrid: [n; 3],
        nsteps,
        ndamping: [(n / 6).max(4); 3],
        ..SimConfig::default()
    };
    let model = two_layer_model(&config.grid()?)?;
    let (single, one) = run::<f32>(&config, &model)?;
    let (split, many) = run_in_process(&config, &model, dims, &mut std::io::sink())?;
    println!("1 rank:        kernel {:.2} s", one.kernel_s);
    println!("{:?} ranks: kernel {:.2} s", dims, many.kernel_s);
    Ok(single.traces.iter().zip(&split.traces).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

fn main() -> seisfd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().map_or(64, |a| a.parse().expect("grid size"));
    let nsteps = args.get(1).map_or(100, |a| a.parse().expect("time steps"));
    let dims = args.get(2).map_or([2, 2, 2], |a| {
        let v: Vec<usize> = a.split(',').map(|s| s.parse().expect("rank count")).collect();
        [v[0], v[1], v[2]]
    });
    let diff = run_example(n, nsteps, dims)?;
    println!("max trace difference: {diff:e}");
    Ok(())
}

//! Isotropic elastic modeling on the two-layer model. Prints, for a line of
//! receivers, the peak pressure and the first-break time (first sample above
//! a tenth of that peak).
//!
//! `cargo run --release --example elastic_modeling -- 80 600`

use seisfd::driver::{run, SimConfig};
use seisfd::model::two_layer_model;
use seisfd::propagators::PropagatorKind;

/// Returns `(offset in cells, peak, first-break time in seconds)` per receiver.
pub fn run_example(n: usize, nsteps: usize) -> seisfd::Result<Vec<(usize, f64, f64)>> {
    let nd = (n / 6).max(4);
    let c = n / 2;
    let near = 12.min(c - nd - 1);
    let offsets: Vec<usize> = (0..5).map(|s| near + s * (c - nd - 1 - near) / 4).collect();
    let config = SimConfig {
        ngrid: [n; 3],
        dgrid: [10.0; 3],
        nsteps,
        ndamping: [nd; 3],
        propagator: PropagatorKind::ElasticIso,
        source_loc: Some([c, c, c + 4]),
        receivers: Some(offsets.iter().map(|o| [c + o, c, c + 4]).collect()),
        ..SimConfig::default()
    };
    let model = two_layer_model(&config.grid()?)?;
    let (record, report) = run::<f32>(&config, &model)?;
    Ok(offsets
        .iter()
        .enumerate()
        .map(|(r, o)| {
            let t = record.trace(r);
            let peak = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let first = t.iter().position(|v| v.abs() > 0.1 * peak).unwrap_or(0);
            (*o, peak, (first + 1) as f64 * report.dt)
        })
        .collect())
}

fn main() -> seisfd::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(80);
    let nsteps = args.next().unwrap_or(600);
    println!("{:>8} {:>12} {:>12}", "offset", "peak", "first break");
    for (o, p, t) in run_example(n, nsteps)? {
        println!("{o:>8} {p:>12.4e} {t:>12.4}");
    }
    Ok(())
}

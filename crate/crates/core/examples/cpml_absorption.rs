//! Boundary echo with and without the absorbing layer. A receiver between
//! the source and a nearby face records the direct wave and, later, what
//! comes back from the boundary.
//!
//! `cargo run --release --example cpml_absorption -- 80 12`

use seisfd::driver::{run, SimConfig};
use seisfd::model::constant_model;
use seisfd::source::ricker;

/// Echo amplitude relative to the direct arrival, `(with CPML, without)`.
pub fn run_example(n: usize, nd: usize) -> seisfd::Result<(f64, f64)> {
    let (h, vp, gap) = (10.0, 1500.0, 16);
    let echo = |cpml: bool| -> seisfd::Result<f64> {
        let mut config = SimConfig {
            ngrid: [n; 3],
            dgrid: [h; 3],
            ndamping: [nd; 3],
            ntaper: [0; 3],
            source_loc: Some([nd + gap, n / 2, n / 2]),
            receivers: Some(vec![[nd, n / 2, n / 2]]),
            cpml,
            ..SimConfig::default()
        };
        let dt = config.time_step(vp)?;
        let w = ricker(config.fmax, dt, 1)?;
        let tail = 0.93 / w.fpeak;
        let direct_end = w.t0 + gap as f64 * h / vp + tail;
        // stop before the echo from the side faces returns
        let side = ((n / 2) as f64 * 2.0 * h / vp) + w.t0 - tail;
        config.nsteps = (side / dt) as usize;
        let model = constant_model(&config.grid()?, vp, None, None)?;
        let (record, _) = run::<f64>(&config, &model)?;
        let split = ((direct_end / dt) as usize).min(record.nsteps);
        let t = record.trace(0);
        let peak = |s: &[f64]| s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(peak(&t[split..]) / peak(&t[..split]))
    };
    Ok((echo(true)?, echo(false)?))
}

fn main() -> seisfd::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(80);
    let nd = args.next().unwrap_or(12);
    let (with, without) = run_example(n, nd)?;
    println!("echo with CPML     {:7.3}% of the direct wave", 100.0 * with);
    println!("echo without CPML  {:7.3}% of the direct wave", 100.0 * without);
    Ok(())
}

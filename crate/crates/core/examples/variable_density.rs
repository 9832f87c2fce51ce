//! Variable-density acoustics: the same source and receiver above a density
//! contrast, with and without the contrast. The difference is the reflection
//! from the interface, which the constant-density kernel cannot produce.
//!
//! `cargo run --release --example variable_density -- 60 500`

use seisfd::driver::{run, SimConfig};
use seisfd::grid::{Component, Field};
use seisfd::model::EarthModel;
use seisfd::propagators::PropagatorKind;

/// Returns `(peak of the direct trace, peak of the reflected residual)`.
pub fn run_example(n: usize, nsteps: usize) -> seisfd::Result<(f64, f64)> {
    let nd = (n / 6).max(4);
    let config = SimConfig {
        ngrid: [n; 3],
        dgrid: [10.0; 3],
        nsteps,
        ndamping: [nd; 3],
        ntaper: [0; 3],
        propagator: PropagatorKind::AcousticIso,
        source_loc: Some([n / 2, n / 2, nd + 4]),
        receivers: Some(vec![[n / 2 + 3, n / 2, nd + 4]]),
        ..SimConfig::default()
    };
    let grid = config.grid()?;
    let interface = n / 2 + 4;
    let model = |contrast: f32| -> seisfd::Result<EarthModel> {
        let vp = Field::filled(&grid, Component::Vp, 2000.0f32);
        let rho = Field::from_fn(&grid, Component::Rho, |_, _, k| if k < interface { 1000.0 } else { 1000.0 * contrast });
        EarthModel::from_fields(vp, None, Some(rho))
    };
    let (flat, _) = run::<f64>(&config, &model(1.0)?)?;
    let (layered, _) = run::<f64>(&config, &model(2.5)?)?;
    let residual = flat.traces.iter().zip(&layered.traces).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok((flat.max_abs(), residual))
}

fn main() -> seisfd::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(60);
    let nsteps = args.next().unwrap_or(500);
    let (direct, reflected) = run_example(n, nsteps)?;
    println!("direct peak      {direct:.4e}");
    println!("reflection peak  {reflected:.4e} ({:.1}% of direct)", 100.0 * reflected / direct);
    Ok(())
}

//! Writes a three-layer elastic model as a JSON manifest plus raw f32
//! volumes, loads it back, runs one shot and saves the record with its
//! sidecar.
//!
//! `cargo run --release --example model_files -- model-out 48 200`

use std::path::{Path, PathBuf};

use seisfd::driver::{run, SimConfig};
use seisfd::grid::{Component, Field};
use seisfd::model::{load_model, save_model, EarthModel};
use seisfd::propagators::PropagatorKind;
use seisfd::source::ShotRecord;

const LAYERS: [(f32, f32, f32); 3] = [(1800.0, 600.0, 1900.0), (2600.0, 1300.0, 2200.0), (3800.0, 2100.0, 2500.0)];

/// Returns the path of the saved shot record.
pub fn run_example(dir: &Path, n: usize, nsteps: usize) -> seisfd::Result<PathBuf> {
    let config = SimConfig {
        ngrid: [n; 3],
        dgrid: [15.0; 3],
        nsteps,
        ndamping: [(n / 6).max(4); 3],
        propagator: PropagatorKind::ElasticIso,
        ..SimConfig::default()
    };
    let grid = config.grid()?;
    let layer = |k: usize| LAYERS[(3 * k / n).min(2)];
    let model = EarthModel::from_fields(
        Field::from_fn(&grid, Component::Vp, |_, _, k| layer(k).0),
        Some(Field::from_fn(&grid, Component::Vs, |_, _, k| layer(k).1)),
        Some(Field::from_fn(&grid, Component::Rho, |_, _, k| layer(k).2)),
    )?;
    std::fs::create_dir_all(dir).map_err(|e| seisfd::Error::Io { path: dir.into(), source: e })?;
    let manifest = dir.join("model.json");
    save_model(&model, &manifest)?;

    let loaded = load_model(&manifest)?;
    let (record, _) = run::<f32>(&config, &loaded)?;
    let shot = dir.join("shot.f32");
    record.save(&shot, &config.geometry(&grid)?)?;
    Ok(shot)
}

fn main() -> seisfd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = PathBuf::from(args.first().map_or("model-out", String::as_str));
    let n = args.get(1).map_or(48, |a| a.parse().expect("grid size"));
    let nsteps = args.get(2).map_or(200, |a| a.parse().expect("time steps"));
    let shot = run_example(&dir, n, nsteps)?;
    let (record, side) = ShotRecord::load(&shot)?;
    println!("manifest   {}", dir.join("model.json").display());
    println!("record     {} ({} x {} samples, dt {:.3e} s)", shot.display(), side.nreceivers, side.nsteps, side.dt);
    println!("peak       {:.4e}", record.max_abs());
    println!("\nrun the same model from the command line with");
    println!("  seisfd --model-manifest {} --propagator elastic_iso --ndamping 8,8,8", dir.join("model.json").display());
    Ok(())
}

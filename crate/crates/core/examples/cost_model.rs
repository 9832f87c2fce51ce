//! Flops, bytes and arithmetic intensity per grid point for each kernel,
//! counted by evaluating the update expressions on symbolic scalars.
//!
//! `cargo run --example cost_model`

use seisfd::bench::{count_stencil_cost, KernelCostModel};
use seisfd::propagators::PropagatorKind;

pub fn run_example(radii: &[usize]) -> seisfd::Result<Vec<KernelCostModel>> {
    let mut out = Vec::new();
    for kind in PropagatorKind::ALL {
        for &r in radii {
            out.push(count_stencil_cost(kind, r)?);
        }
    }
    Ok(out)
}

fn main() -> seisfd::Result<()> {
    println!("{:<16} {:>6} {:>8} {:>8} {:>8}", "kernel", "radius", "flops", "bytes", "AI");
    for c in run_example(&[1, 2, 4, 8])? {
        println!(
            "{:<16} {:>6} {:>8} {:>8} {:>8.3}",
            c.propagator.name(),
            c.radius,
            c.flops_per_point,
            c.bytes_per_point,
            c.arithmetic_intensity()
        );
    }
    Ok(())
}

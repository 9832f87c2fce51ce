//! Exact finite-difference weights for every supported radius, as reduced
//! fractions, for the collocated second derivative and the staggered first
//! derivative.
//!
//! `cargo run --example stencil_weights -- 4`

use num_rational::BigRational;
use seisfd::stencil::{exact_weights, StencilKind, MAX_RADIUS};

pub fn run_example(radius: usize) -> [(StencilKind, Vec<BigRational>); 2] {
    [StencilKind::SecondDerivative, StencilKind::StaggeredFirst].map(|k| (k, exact_weights(k, radius)))
}

fn main() {
    let radii: Vec<usize> = match std::env::args().nth(1) {
        Some(r) => vec![r.parse().expect("radius")],
        None => (1..=MAX_RADIUS).collect(),
    };
    for r in radii {
        for (kind, w) in run_example(r) {
            let shown: Vec<String> = w.iter().map(ToString::to_string).collect();
            println!("r={r} {kind:?}: {}", shown.join(", "));
        }
    }
}

//! Two ranks exchanging halos over TCP on localhost. Each rank runs on its
//! own thread here; across machines, start `seisfd dist --transport tcp
//! --hostfile hosts.txt --rank R` once per line of the host file.
//!
//! `cargo run --release --example tcp_ranks -- 40 80`

use std::net::TcpListener;
use std::time::Duration;

use seisfd::dist::{run_distributed, CartTopology, TcpTransport};
use seisfd::driver::SimConfig;
use seisfd::model::two_layer_model;
use seisfd::source::ShotRecord;

pub fn run_example(n: usize, nsteps: usize) -> seisfd::Result<ShotRecord> {
    let config = SimConfig {
        ngrid: [n; 3],
        nsteps,
        ndamping: [(n / 6).max(4); 3],
        ..SimConfig::default()
    };
    let model = two_layer_model(&config.grid()?)?;
    // reserve two free ports
    let hosts: Vec<String> = (0..2)
        .map(|_| TcpListener::bind("127.0.0.1:0").and_then(|l| l.local_addr()).map(|a| a.to_string()))
        .collect::<std::io::Result<_>>()
        .map_err(|e| seisfd::Error::Io { path: "127.0.0.1".into(), source: e })?;
    let topo = CartTopology::new([2, 1, 1], 2)?;
    std::thread::scope(|s| {
        let peer = s.spawn(|| -> seisfd::Result<()> {
            let mut t = TcpTransport::connect(1, &hosts, Duration::from_secs(20))?;
            run_distributed(&config, &model, &topo, &mut t, &mut std::io::sink()).map(|_| ())
        });
        let mut t = TcpTransport::connect(0, &hosts, Duration::from_secs(20))?;
        let root = run_distributed(&config, &model, &topo, &mut t, &mut std::io::stdout());
        peer.join().expect("rank 1 thread")?;
        Ok(root?.record.expect("rank 0 holds the record"))
    })
}

fn main() -> seisfd::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(40);
    let nsteps = args.next().unwrap_or(80);
    let record = run_example(n, nsteps)?;
    println!("{} traces of {} samples, peak {:.4e}", record.nreceivers, record.nsteps, record.max_abs());
    Ok(())
}

//! Command-line front end of the `seisfd` binary.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    count_stencil_cost, emit_report, run_scaling, strong_scaling_plan, thread_scaling_plan, weak_scaling_plan, MachineFile, PlanEntry,
    ScalingMode,
};
use crate::dist::{parse_hostfile, run_distributed, run_in_process, CartTopology, TcpTransport};
use crate::driver::{run_with_output, RunReport, SimConfig};
use crate::error::{Error, Result};
use crate::exec::Target;
use crate::model::{load_model, two_layer_model, EarthModel};
use crate::propagators::PropagatorKind;
use crate::source::ShotRecord;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Comma-separated triple such as `240,240,240`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple<T>(pub [T; 3]);

impl<T: FromStr> FromStr for Triple<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected three comma-separated values, got {s:?}"));
        }
        let mut out = Vec::with_capacity(3);
        for p in parts {
            out.push(p.parse::<T>().map_err(|e| format!("{p:?}: {e}"))?);
        }
        let arr: [T; 3] = out.try_into().map_err(|_| "three values".to_string())?;
        Ok(Triple(arr))
    }
}

impl<T: Display> Display for Triple<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.0[0], self.0[1], self.0[2])
    }
}

fn positive_triple(s: &str) -> std::result::Result<Triple<usize>, String> {
    let t: Triple<usize> = s.parse()?;
    if t.0.contains(&0) {
        return Err("values must be >= 1".into());
    }
    Ok(t)
}

fn spacing_triple(s: &str) -> std::result::Result<Triple<f64>, String> {
    let t: Triple<f64> = s.parse()?;
    if t.0.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err("spacings must be positive".into());
    }
    Ok(t)
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err("must be positive".into());
    }
    Ok(v)
}

fn count(s: &str) -> std::result::Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("counts must be >= 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(format!("{s:?}: {e}")),
    }
}

fn width_triple(s: &str) -> std::result::Result<Triple<usize>, String> {
    s.parse()
}

#[derive(Parser, Debug, Clone, PartialEq)]
#[command(name = "seisfd", version, about = "Finite-difference seismic modeling and benchmarking")]
pub struct CliArgs {
    #[command(subcommand)]
    pub command: Option<Command>,

    #[command(flatten)]
    pub run: RunArgs,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, PartialEq)]
pub struct RunArgs {
    /// Grid size
    #[arg(long, global = true, default_value = "100,100,100", value_parser = positive_triple)]
    pub ngrid: Triple<usize>,

    /// Grid spacing (m)
    #[arg(long, global = true, default_value = "20,20,20", value_parser = spacing_triple)]
    pub dgrid: Triple<f64>,

    /// Number of time steps
    #[arg(long, global = true, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub nsteps: u64,

    /// Maximum frequency (Hz)
    #[arg(long, global = true, default_value_t = 25.0, value_parser = positive_f64)]
    pub fmax: f64,

    /// Print progress every 100 steps [default: false]
    #[arg(long, global = true)]
    pub verbose: bool,

    /// Wave-equation kernel
    #[arg(long, global = true, default_value = "acoustic_iso_cd", value_parser = PropagatorKind::from_str)]
    pub propagator: PropagatorKind,

    /// Execution target
    #[arg(long, global = true, default_value = "seq", value_parser = Target::from_str)]
    pub target: Target,

    /// Threads for the parallel target
    #[arg(long, global = true, env = "SEISFD_NTHREADS", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub nthreads: u64,

    /// Model manifest (JSON); its grid replaces --ngrid/--dgrid [default: two-layer model]
    #[arg(long, global = true)]
    pub model_manifest: Option<PathBuf>,

    /// Shot record output (f32 traces plus a .json sidecar) [default: none]
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Damping layer width in points per axis
    #[arg(long, global = true, default_value = "27,27,27", value_parser = width_triple)]
    pub ndamping: Triple<usize>,

    /// Treat the top plane as a free surface [default: false]
    #[arg(long, global = true)]
    pub free_surface: bool,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Single-process modeling run (the default)
    Model,
    /// Domain-decomposed run of acoustic_iso_cd
    Dist(DistArgs),
    /// Scaling experiment
    Bench(BenchArgs),
    /// Print a scaling plan without running it
    Plan(PlanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransportKind {
    /// In-process ranks connected by channels
    Channel,
    /// One process per rank, TCP sockets
    Tcp,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct DistArgs {
    /// Ranks per axis
    #[arg(long, value_parser = positive_triple)]
    pub ranks: Triple<usize>,

    /// Message transport
    #[arg(long, value_enum, default_value_t = TransportKind::Channel)]
    pub transport: TransportKind,

    /// host:port per rank, one per line (tcp) [default: none]
    #[arg(long)]
    pub hostfile: Option<PathBuf>,

    /// Rank of this process (tcp) [default: none]
    #[arg(long)]
    pub rank: Option<usize>,

    /// Seconds to wait for peers (tcp)
    #[arg(long, default_value_t = 60)]
    pub connect_timeout: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Grid grows along x
    WeakIdeal,
    /// Cubic grid, volume grows with the ranks
    WeakPractical,
    /// Fixed grid, growing rank count
    Strong,
    /// Fixed grid, growing thread count
    Threads,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct PlanArgs {
    /// Scaling mode
    #[arg(long, value_enum, default_value_t = ModeArg::Strong)]
    pub mode: ModeArg,

    /// Base grid side for weak scaling
    #[arg(long, default_value_t = 1000)]
    pub base: usize,

    /// Rank (or thread) counts
    #[arg(long, default_value = "8,16,32,64,128,256", value_delimiter = ',', value_parser = count)]
    pub counts: Vec<usize>,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct BenchArgs {
    #[command(flatten)]
    pub plan: PlanArgs,

    /// Machine description for the roofline chart [default: none]
    #[arg(long)]
    pub machine_file: Option<PathBuf>,

    /// Directory for scaling.csv and the plots [default: none]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Parses `argv` (program name first).
pub fn parse<I, S>(argv: I) -> std::result::Result<CliArgs, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    CliArgs::try_parse_from(argv)
}

/// Argument vector that parses back to `args`.
pub fn render(args: &CliArgs) -> Vec<String> {
    let r = &args.run;
    let mut v = vec!["seisfd".to_string()];
    let mut push = |k: &str, val: String| {
        v.push(format!("--{k}"));
        v.push(val);
    };
    push("ngrid", r.ngrid.to_string());
    push("dgrid", r.dgrid.to_string());
    push("nsteps", r.nsteps.to_string());
    push("fmax", r.fmax.to_string());
    push("propagator", r.propagator.name().into());
    push("target", r.target.name().into());
    push("nthreads", r.nthreads.to_string());
    push("ndamping", r.ndamping.to_string());
    if let Some(p) = &r.model_manifest {
        push("model-manifest", p.display().to_string());
    }
    if let Some(p) = &r.output {
        push("output", p.display().to_string());
    }
    if r.verbose {
        v.push("--verbose".into());
    }
    if r.free_surface {
        v.push("--free-surface".into());
    }
    let value = |e: &dyn ValueEnumName| e.name();
    match &args.command {
        None => {}
        Some(Command::Model) => v.push("model".into()),
        Some(Command::Dist(d)) => {
            v.extend(["dist".into(), "--ranks".into(), d.ranks.to_string()]);
            v.extend(["--transport".into(), value(&d.transport)]);
            if let Some(h) = &d.hostfile {
                v.extend(["--hostfile".into(), h.display().to_string()]);
            }
            if let Some(k) = d.rank {
                v.extend(["--rank".into(), k.to_string()]);
            }
            v.extend(["--connect-timeout".into(), d.connect_timeout.to_string()]);
        }
        Some(Command::Plan(p)) => {
            v.push("plan".into());
            render_plan(p, &mut v);
        }
        Some(Command::Bench(b)) => {
            v.push("bench".into());
            render_plan(&b.plan, &mut v);
            if let Some(m) = &b.machine_file {
                v.extend(["--machine-file".into(), m.display().to_string()]);
            }
            if let Some(o) = &b.out_dir {
                v.extend(["--out-dir".into(), o.display().to_string()]);
            }
        }
    }
    v
}

trait ValueEnumName {
    fn name(&self) -> String;
}

impl<E: ValueEnum> ValueEnumName for E {
    fn name(&self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

fn render_plan(p: &PlanArgs, v: &mut Vec<String>) {
    let counts: Vec<String> = p.counts.iter().map(|c| c.to_string()).collect();
    v.extend(["--mode".into(), p.mode.name(), "--base".into(), p.base.to_string(), "--counts".into(), counts.join(",")]);
}

impl RunArgs {
    pub fn config(&self) -> SimConfig {
        SimConfig {
            ngrid: self.ngrid.0,
            dgrid: self.dgrid.0,
            nsteps: self.nsteps as usize,
            fmax: self.fmax,
            verbose: self.verbose,
            propagator: self.propagator,
            target: self.target,
            nthreads: self.nthreads as usize,
            free_surface: self.free_surface,
            ndamping: self.ndamping.0,
            ..SimConfig::default()
        }
    }

    /// Config and model, the manifest's grid taking precedence.
    pub fn config_and_model(&self) -> Result<(SimConfig, EarthModel)> {
        let mut cfg = self.config();
        let model = match &self.model_manifest {
            Some(path) => {
                let m = load_model(path)?;
                cfg.ngrid = m.grid.n();
                cfg.dgrid = m.grid.d();
                m
            }
            None => two_layer_model(&cfg.grid()?)?,
        };
        Ok((cfg, model))
    }
}

fn plan_entries(p: &PlanArgs, ngrid: [usize; 3]) -> (ScalingMode, Vec<PlanEntry>) {
    match p.mode {
        ModeArg::WeakIdeal => (ScalingMode::WeakIdeal, weak_scaling_plan(p.base, &p.counts, ScalingMode::WeakIdeal)),
        ModeArg::WeakPractical => (ScalingMode::WeakPractical, weak_scaling_plan(p.base, &p.counts, ScalingMode::WeakPractical)),
        ModeArg::Strong => (ScalingMode::Strong, strong_scaling_plan(ngrid, &p.counts)),
        ModeArg::Threads => (ScalingMode::Strong, thread_scaling_plan(ngrid, &p.counts)),
    }
}

fn save_record(path: &Option<PathBuf>, record: &ShotRecord, report: &RunReport) -> Result<()> {
    match path {
        Some(p) => record.save(p, &report.geometry),
        None => Ok(()),
    }
}

fn execute(args: &CliArgs, out: &mut dyn Write) -> Result<()> {
    let io = |e| Error::io("<stdout>", e);
    match &args.command {
        None | Some(Command::Model) => {
            let (cfg, model) = args.run.config_and_model()?;
            let (record, report) = run_with_output::<f32>(&cfg, &model, out)?;
            save_record(&args.run.output, &record, &report)
        }
        Some(Command::Dist(d)) => {
            let (cfg, model) = args.run.config_and_model()?;
            match d.transport {
                TransportKind::Channel => {
                    if d.hostfile.is_some() || d.rank.is_some() {
                        return Err(Error::config("--hostfile and --rank apply to --transport tcp only"));
                    }
                    let (record, report) = run_in_process(&cfg, &model, d.ranks.0, out)?;
                    save_record(&args.run.output, &record, &report)
                }
                TransportKind::Tcp => {
                    let (Some(hf), Some(rank)) = (&d.hostfile, d.rank) else {
                        return Err(Error::config("--transport tcp needs --hostfile and --rank"));
                    };
                    let text = std::fs::read_to_string(hf).map_err(|e| Error::io(hf, e))?;
                    let hosts = parse_hostfile(&text)?;
                    let topo = CartTopology::new(d.ranks.0, hosts.len())?;
                    let mut t = TcpTransport::connect(rank, &hosts, Duration::from_secs(d.connect_timeout))?;
                    let o = run_distributed(&cfg, &model, &topo, &mut t, out)?;
                    match o.record {
                        Some(r) => save_record(&args.run.output, &r, &o.report),
                        None => Ok(()),
                    }
                }
            }
        }
        Some(Command::Plan(p)) => {
            let (_, entries) = plan_entries(p, args.run.ngrid.0);
            writeln!(out, "{:>8} {:>8} {:>8} {:>8} {:>8}", "ranks", "nthreads", "nx", "ny", "nz").map_err(io)?;
            for e in entries {
                writeln!(out, "{:>8} {:>8} {:>8} {:>8} {:>8}", e.ranks, e.nthreads, e.ngrid[0], e.ngrid[1], e.ngrid[2]).map_err(io)?;
            }
            Ok(())
        }
        Some(Command::Bench(b)) => {
            let machine = b.machine_file.as_deref().map(MachineFile::load).transpose()?;
            let cfg = args.run.config();
            let cost = count_stencil_cost(cfg.propagator, cfg.stencil[0])?;
            writeln!(
                out,
                "{}: {} flops / {} bytes per point, arithmetic intensity {:.4}",
                cost.propagator,
                cost.flops_per_point,
                cost.bytes_per_point,
                cost.arithmetic_intensity()
            )
            .map_err(io)?;
            let (mode, entries) = plan_entries(&b.plan, cfg.ngrid);
            let result = run_scaling(&entries, &cfg, mode);
            let rows = result.rows();
            out.write_all(crate::bench::csv_string(&rows)?.as_bytes()).map_err(io)?;
            for r in &result.runs {
                if let Some(e) = &r.error {
                    writeln!(out, "run with {} ranks x {} threads failed: {e}", r.entry.ranks, r.entry.nthreads).map_err(io)?;
                }
            }
            if let Some(dir) = &b.out_dir {
                emit_report(dir, &result, &cost, machine.as_ref())?;
            }
            Ok(())
        }
    }
}

/// Runs the CLI; returns the process exit code.
pub fn main_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let args = match parse(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&args, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if matches!(e, Error::Config(_)) {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let a = parse(["seisfd"]).unwrap();
        assert_eq!(a.command, None);
        let c = a.run.config();
        assert_eq!(c.ngrid, [100; 3]);
        assert_eq!(c.dgrid, [20.0; 3]);
        assert_eq!(c.nsteps, 1000);
        assert_eq!(c.fmax, 25.0);
        assert!(!c.verbose);
    }

    #[test]
    fn sample_invocation() {
        let a = parse(["seisfd", "--ngrid", "240,240,240", "--nsteps", "300"]).unwrap();
        assert_eq!(a.run.ngrid.0, [240; 3]);
        assert_eq!(a.run.nsteps, 300);
    }

    #[test]
    fn malformed_triples() {
        assert!(parse(["seisfd", "--ngrid", "240,240"]).is_err());
        assert!(parse(["seisfd", "--ngrid", "240,0,240"]).is_err());
        assert!(parse(["seisfd", "--dgrid", "1,x,1"]).is_err());
        assert!(parse(["seisfd", "--nsteps", "0"]).is_err());
        assert!(parse(["seisfd", "--bogus"]).is_err());
    }

    #[test]
    fn ranks_only_with_dist() {
        assert!(parse(["seisfd", "model", "--ranks", "2,2,2"]).is_err());
        let a = parse(["seisfd", "dist", "--ranks", "2,2,4", "--ngrid", "64,64,64"]).unwrap();
        assert!(matches!(a.command, Some(Command::Dist(ref d)) if d.ranks.0 == [2, 2, 4]));
        assert_eq!(a.run.ngrid.0, [64; 3]);
    }

    #[test]
    fn help_lists_defaults() {
        let mut out = Vec::new();
        assert_eq!(main_with(["seisfd", "--help"], &mut out, &mut Vec::new()), EXIT_OK);
        let help = String::from_utf8(out).unwrap();
        for flag in ["ngrid", "dgrid", "nsteps", "fmax", "verbose", "propagator", "target", "nthreads", "model-manifest", "output", "ndamping", "free-surface"] {
            let line = help.lines().find(|l| l.contains(&format!("--{flag}"))).unwrap_or_else(|| panic!("{flag} missing"));
            let idx = help.find(line).unwrap();
            let rest = &help[idx..];
            let block = rest.split("\n  -").next().unwrap();
            assert!(block.contains("default"), "{flag}: {block}");
        }
        assert!(help.contains("100,100,100"));
    }
}

use std::path::PathBuf;
use std::process::Command as Proc;

use proptest::prelude::*;
use seisfd::cli::{parse, render, BenchArgs, CliArgs, Command, DistArgs, ModeArg, PlanArgs, RunArgs, TransportKind, Triple};
use seisfd::exec::Target;
use seisfd::propagators::PropagatorKind;
use seisfd::source::ShotRecord;

fn bin() -> Proc {
    let mut c = Proc::new(env!("CARGO_BIN_EXE_seisfd"));
    c.env_remove("SEISFD_NTHREADS");
    c
}

fn run_args() -> impl Strategy<Value = RunArgs> {
    (
        prop::array::uniform3(1usize..500),
        prop::array::uniform3(0.5f64..100.0),
        1u64..5000,
        1.0f64..60.0,
        any::<bool>(),
        0usize..3,
        any::<bool>(),
        1u64..16,
        prop::option::of("[a-z]{1,8}\\.json"),
        prop::option::of("[a-z]{1,8}\\.f32"),
        (any::<bool>(), prop::array::uniform3(0usize..40)),
    )
        .prop_map(|(n, d, nsteps, fmax, verbose, k, par, nthreads, manifest, output, (fs, nd))| RunArgs {
            ngrid: Triple(n),
            dgrid: Triple(d),
            nsteps,
            fmax,
            verbose,
            propagator: PropagatorKind::ALL[k],
            target: if par { Target::Parallel } else { Target::Seq },
            nthreads,
            model_manifest: manifest.map(PathBuf::from),
            output: output.map(PathBuf::from),
            free_surface: fs,
            ndamping: Triple(nd),
        })
}

fn plan_args() -> impl Strategy<Value = PlanArgs> {
    (0usize..4, 1usize..3000, prop::collection::vec(1usize..512, 1..6)).prop_map(|(m, base, counts)| PlanArgs {
        mode: [ModeArg::WeakIdeal, ModeArg::WeakPractical, ModeArg::Strong, ModeArg::Threads][m],
        base,
        counts,
    })
}

fn command() -> impl Strategy<Value = Option<Command>> {
    prop_oneof![
        Just(None),
        Just(Some(Command::Model)),
        (prop::array::uniform3(1usize..8), any::<bool>(), prop::option::of(0usize..64), 1u64..300).prop_map(|(r, tcp, rank, t)| Some(
            Command::Dist(DistArgs {
                ranks: Triple(r),
                transport: if tcp { TransportKind::Tcp } else { TransportKind::Channel },
                hostfile: tcp.then(|| PathBuf::from("hosts.txt")),
                rank,
                connect_timeout: t,
            })
        )),
        plan_args().prop_map(|p| Some(Command::Plan(p))),
        (plan_args(), any::<bool>(), any::<bool>()).prop_map(|(plan, m, o)| Some(Command::Bench(BenchArgs {
            plan,
            machine_file: m.then(|| PathBuf::from("machine.json")),
            out_dir: o.then(|| PathBuf::from("out")),
        }))),
    ]
}

proptest! {
    #[test]
    fn render_round_trips(run in run_args(), command in command()) {
        let args = CliArgs { command, run };
        let back = parse(render(&args)).unwrap();
        prop_assert_eq!(back, args);
    }
}

#[test]
fn sample_run_prints_report_and_writes_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("shot.f32");
    let o = bin()
        .args(["--ngrid", "30,30,30", "--ndamping", "6,6,6", "--nsteps", "200", "--verbose", "--output"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let names: Vec<&str> = text
        .lines()
        .filter_map(|l| l.split_once('=').map(|(k, _)| k.trim()))
        .collect();
    assert_eq!(
        names,
        [
            "nthreads", "ngrid", "dgrid", "nsteps", "fmax", "vmin", "vmax", "cfl", "stencil", "source_loc", "ndamping", "ntaper",
            "nshots", "time_rec", "nreceivers", "receiver_increment", "source_increment"
        ]
    );
    assert_eq!(text.matches(" time step").count(), 2);
    let (rec, side) = ShotRecord::load(&out).unwrap();
    assert_eq!(rec.nsteps, 200);
    assert_eq!(rec.nreceivers, 900);
    assert_eq!(side.nreceivers, 900);
    assert_eq!(side.source_loc, [14; 3]);
}

#[test]
fn quiet_run_has_no_progress_lines() {
    let o = bin().args(["model", "--ngrid", "20,20,20", "--ndamping", "5,5,5", "--nsteps", "120"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(!text.contains("time step"));
    assert!(text.contains("Time Modeling"));
}

#[test]
fn bad_manifest_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("model.json");
    std::fs::write(&manifest, "{ not json").unwrap();
    let out = dir.path().join("shot.f32");
    let o = bin().arg("--model-manifest").arg(&manifest).arg("--output").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn usage_errors_exit_2() {
    let o = bin().args(["--ngrid", "240,240"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["--grid-size", "240"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = bin().args(["--propagator", "viscoelastic"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["--ngrid", "20,20,20", "--nsteps", "5", "dist", "--ranks", "2,2,2", "--propagator", "acoustic_iso"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("acoustic_iso_cd"));
}

#[test]
fn thread_count_from_environment() {
    let o = bin()
        .env("SEISFD_NTHREADS", "3")
        .args(["--ngrid", "20,20,20", "--ndamping", "5,5,5", "--nsteps", "10", "--target", "parallel"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with(" nthreads           =            3\n"), "{text}");
}

#[test]
fn dist_subcommand_matches_model() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.f32"), dir.path().join("b.f32"));
    let common = ["--ngrid", "24,24,24", "--ndamping", "6,6,6", "--nsteps", "30"];
    assert!(bin().args(common).arg("--output").arg(&a).status().unwrap().success());
    assert!(bin().args(common).args(["dist", "--ranks", "2,1,2", "--output"]).arg(&b).status().unwrap().success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn plan_subcommand_prints_sizes() {
    let o = bin().args(["plan", "--mode", "weak-practical", "--counts", "1,2,4,6"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for side in ["1000", "1280", "1600", "1856"] {
        assert!(text.contains(side), "{text}");
    }
}

#[test]
fn bench_subcommand_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let machine = dir.path().join("machine.json");
    std::fs::write(&machine, r#"{"name":"desk","peak_gflops":100,"memory":[{"name":"DRAM","peak_bw_gbs":20}]}"#).unwrap();
    let outdir = dir.path().join("bench");
    let o = bin()
        .args(["--ngrid", "24,24,24", "--ndamping", "6,6,6", "--nsteps", "10", "bench", "--mode", "strong", "--counts", "1,2", "--machine-file"])
        .arg(&machine)
        .arg("--out-dir")
        .arg(&outdir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(outdir.join("scaling.csv")).unwrap();
    let rows = seisfd::bench::parse_csv(&csv).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].efficiency_pct, Some(100.0));
    assert!(std::fs::read_to_string(outdir.join("roofline.svg")).unwrap().starts_with("<svg"));
    assert!(outdir.join("efficiency.svg").exists());
}

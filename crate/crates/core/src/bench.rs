//! Benchmark harness: kernel cost model, scaling plans and runs, CSV and SVG
//! output.
//!
//! Flop counts come from evaluating the kernels' per-point formulas on a
//! symbolic scalar ([`Sym`]) that records an expression DAG, then counting
//! the arithmetic nodes reachable from the outputs. Bytes per point follow the
//! compulsory-traffic model: every array touched is read or written once,
//! 4 bytes per value.

use std::cell::RefCell;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::run_in_process;
use crate::driver::{run, SimConfig};
use crate::error::{Error, Result};
use crate::exec::Target;
use crate::model::{two_layer_model, write_atomic, EarthModel};
use crate::propagators::acoustic_cd::interior_update;
use crate::propagators::PropagatorKind;
use crate::stencil::{FirstDerivative, Laplacian, MAX_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Input,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
}

thread_local! {
    static ARENA: RefCell<Vec<Node>> = const { RefCell::new(Vec::new()) };
}

/// Symbolic scalar: a handle into a thread-local expression arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sym(u32);

impl Sym {
    fn push(n: Node) -> Sym {
        ARENA.with(|a| {
            let mut a = a.borrow_mut();
            a.push(n);
            Sym((a.len() - 1) as u32)
        })
    }

    /// A fresh leaf (array value or coefficient).
    pub fn input() -> Sym {
        Sym::push(Node::Input)
    }

    /// Drops every expression built so far on this thread.
    pub fn reset() {
        ARENA.with(|a| a.borrow_mut().clear());
    }
}

impl Add for Sym {
    type Output = Sym;
    fn add(self, o: Sym) -> Sym {
        Sym::push(Node::Add(self.0, o.0))
    }
}

impl Sub for Sym {
    type Output = Sym;
    fn sub(self, o: Sym) -> Sym {
        Sym::push(Node::Sub(self.0, o.0))
    }
}

impl Mul for Sym {
    type Output = Sym;
    fn mul(self, o: Sym) -> Sym {
        Sym::push(Node::Mul(self.0, o.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    pub adds: u64,
    pub subs: u64,
    pub muls: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.adds + self.subs + self.muls
    }
}

/// Arithmetic nodes reachable from `roots`, each counted once.
pub fn count_ops(roots: &[Sym]) -> OpCount {
    ARENA.with(|a| {
        let a = a.borrow();
        let mut seen = vec![false; a.len()];
        let mut stack: Vec<u32> = roots.iter().map(|s| s.0).collect();
        let mut c = OpCount::default();
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i as usize], true) {
                continue;
            }
            match a[i as usize] {
                Node::Input => {}
                Node::Add(x, y) => {
                    c.adds += 1;
                    stack.extend([x, y]);
                }
                Node::Sub(x, y) => {
                    c.subs += 1;
                    stack.extend([x, y]);
                }
                Node::Mul(x, y) => {
                    c.muls += 1;
                    stack.extend([x, y]);
                }
            }
        }
        c
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCostModel {
    pub propagator: PropagatorKind,
    pub radius: usize,
    pub ops: OpCount,
    pub flops_per_point: u64,
    pub bytes_per_point: u64,
}

impl KernelCostModel {
    pub fn arithmetic_intensity(&self) -> f64 {
        self.flops_per_point as f64 / self.bytes_per_point as f64
    }
}

/// Symbolic cube of side `2r + 1` around a center, z fastest.
struct SymCube {
    data: Vec<Sym>,
    strides: [usize; 3],
    center: usize,
}

impl SymCube {
    fn new(r: usize) -> Self {
        let e = 2 * r + 1;
        SymCube {
            data: (0..e * e * e).map(|_| Sym::input()).collect(),
            strides: [e * e, e, 1],
            center: r * (e * e + e + 1),
        }
    }
}

fn sym_first(r: usize) -> FirstDerivative<Sym> {
    FirstDerivative {
        radius: r,
        w: [0; MAX_RADIUS].map(|_| Sym::input()),
    }
}

/// Cost of one interior (undamped) point update of `kind` with radius `r`.
pub fn count_stencil_cost(kind: PropagatorKind, r: usize) -> Result<KernelCostModel> {
    if r == 0 || r > MAX_RADIUS {
        return Err(Error::config(format!("stencil radius must lie in 1..={MAX_RADIUS}, got {r}")));
    }
    Sym::reset();
    let (roots, arrays) = match kind {
        PropagatorKind::AcousticIsoCd => {
            let p = SymCube::new(r);
            let lap = Laplacian {
                ctot: Sym::input(),
                radius: [r; 3],
                c: [0, 1, 2].map(|_| [0; MAX_RADIUS].map(|_| Sym::input())),
                stride: p.strides,
            };
            let out = interior_update(&lap, Sym::input(), &p.data, Sym::input(), Sym::input(), p.center);
            // p_cur, p_prev, vp^2 dt^2 read; p_next written
            (vec![out], 4)
        }
        PropagatorKind::AcousticIso => {
            let p = SymCube::new(r);
            let v = [0, 1, 2].map(|_| SymCube::new(r));
            let d = [0, 1, 2].map(|_| sym_first(r));
            let o = p.center;
            let mut roots: Vec<Sym> = (0..3)
                .map(|a| v[a].data[o] + Sym::input() * d[a].plus(&p.data, o, p.strides[a]))
                .collect();
            let div = d[0].minus(&v[0].data, o, p.strides[0]) + d[1].minus(&v[1].data, o, p.strides[1]) + d[2].minus(&v[2].data, o, p.strides[2]);
            roots.push(p.data[o] + Sym::input() * div);
            // read p, v (3), buoyancy (3), dt rho vp^2; write p, v (3)
            (roots, 12)
        }
        PropagatorKind::ElasticIso => {
            let v = [0, 1, 2].map(|_| SymCube::new(r));
            let s = [0, 1, 2, 3, 4, 5].map(|_| SymCube::new(r));
            let d = [0, 1, 2].map(|_| sym_first(r));
            let st = v[0].strides;
            let o = v[0].center;
            let dp = |a: usize, f: &SymCube| d[a].plus(&f.data, o, st[a]);
            let dm = |a: usize, f: &SymCube| d[a].minus(&f.data, o, st[a]);
            let [sxx, syy, szz, syz, sxz, sxy] = &s;
            let tx = dp(0, sxx) + dm(1, sxy) + dm(2, sxz);
            let ty = dm(0, sxy) + dp(1, syy) + dm(2, syz);
            let tz = dm(0, sxz) + dm(1, syz) + dp(2, szz);
            let mut roots: Vec<Sym> = [tx, ty, tz]
                .into_iter()
                .enumerate()
                .map(|(a, t)| v[a].data[o] + Sym::input() * t)
                .collect();
            let (exx, eyy, ezz) = (dm(0, &v[0]), dm(1, &v[1]), dm(2, &v[2]));
            let (l2m, lam) = (Sym::input(), Sym::input());
            roots.push(sxx.data[o] + (l2m * exx + lam * (eyy + ezz)));
            roots.push(syy.data[o] + (l2m * eyy + lam * (exx + ezz)));
            roots.push(szz.data[o] + (l2m * ezz + lam * (exx + eyy)));
            let yz = dp(2, &v[1]) + dp(1, &v[2]);
            let xz = dp(2, &v[0]) + dp(0, &v[2]);
            let xy = dp(1, &v[0]) + dp(0, &v[1]);
            for (f, e) in [(syz, yz), (sxz, xz), (sxy, xy)] {
                roots.push(f.data[o] + Sym::input() * e);
            }
            // read v (3), s (6), buoyancy (3), l2m, lambda, mu (3); write v, s
            (roots, 17 + 9)
        }
    };
    let ops = count_ops(&roots);
    Sym::reset();
    Ok(KernelCostModel {
        propagator: kind,
        radius: r,
        ops,
        flops_per_point: ops.total(),
        bytes_per_point: 4 * arrays,
    })
}

/// One configuration of a scaling experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanEntry {
    pub ranks: usize,
    pub nthreads: usize,
    pub ngrid: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMode {
    /// Grid grows along x with the rank count.
    WeakIdeal,
    /// Cubic grid whose volume grows with the rank count.
    WeakPractical,
    /// Fixed grid.
    Strong,
}

/// Cube side for `ranks` in practical weak scaling: `base * ranks^(1/3)`
/// rounded up to a multiple of 64, and `base` itself for one rank.
pub fn practical_side(base: usize, ranks: usize) -> usize {
    if ranks <= 1 {
        return base;
    }
    let exact = base as f64 * (ranks as f64).cbrt();
    ((exact / 64.0).ceil() as usize) * 64
}

pub fn weak_scaling_plan(base: usize, ranks: &[usize], mode: ScalingMode) -> Vec<PlanEntry> {
    ranks
        .iter()
        .map(|&r| PlanEntry {
            ranks: r,
            nthreads: 1,
            ngrid: match mode {
                ScalingMode::WeakPractical => [practical_side(base, r); 3],
                _ => [r.max(1) * base, base, base],
            },
        })
        .collect()
}

pub fn strong_scaling_plan(ngrid: [usize; 3], ranks: &[usize]) -> Vec<PlanEntry> {
    ranks.iter().map(|&r| PlanEntry { ranks: r, nthreads: 1, ngrid }).collect()
}

/// Node-level plan: one rank, growing thread count.
pub fn thread_scaling_plan(ngrid: [usize; 3], threads: &[usize]) -> Vec<PlanEntry> {
    threads.iter().map(|&t| PlanEntry { ranks: 1, nthreads: t, ngrid }).collect()
}

/// Efficiency in percent against the first sample, given
/// `(workers, grid points, seconds)` per run. Weak: `t0 N r0 / (t N0 r)`,
/// which is `t0 / t` when the grid grows in proportion to the workers.
/// Strong: `t0 r0 / (t r)`.
pub fn efficiencies(mode: ScalingMode, samples: &[(usize, f64, f64)]) -> Vec<f64> {
    let Some(&(r0, n0, t0)) = samples.first() else {
        return Vec::new();
    };
    samples
        .iter()
        .map(|&(r, n, t)| {
            let e = match mode {
                ScalingMode::Strong => t0 * r0 as f64 / (t * r as f64),
                _ => t0 * n * r0 as f64 / (t * n0 * r as f64),
            };
            100.0 * e
        })
        .collect()
}

/// Balanced rank grid for `ranks` over `ngrid`: prime factors, largest first,
/// go to the axis with the most points per rank.
pub fn rank_dims(ranks: usize, ngrid: [usize; 3]) -> [usize; 3] {
    let mut factors = Vec::new();
    let mut r = ranks.max(1);
    let mut f = 2;
    while r > 1 {
        while r.is_multiple_of(f) {
            factors.push(f);
            r /= f;
        }
        f += 1;
    }
    let mut dims = [1; 3];
    for f in factors.into_iter().rev() {
        let a = (0..3)
            .max_by(|&a, &b| {
                let x = ngrid[a] as f64 / dims[a] as f64;
                let y = ngrid[b] as f64 / dims[b] as f64;
                x.total_cmp(&y).then(b.cmp(&a))
            })
            .expect("three axes");
        dims[a] *= f;
    }
    dims
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRun {
    pub entry: PlanEntry,
    pub kernel_s: f64,
    pub modeling_s: f64,
    pub efficiency_pct: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub mode: ScalingMode,
    pub template: SimConfig,
    pub runs: Vec<ScalingRun>,
}

/// Runs every plan entry with `template` (grid and worker counts replaced)
/// on the default layered model. Multi-rank entries use in-process ranks.
/// A failing entry is recorded and the plan continues. Efficiency uses
/// kernel time.
pub fn run_scaling(plan: &[PlanEntry], template: &SimConfig, mode: ScalingMode) -> ScalingResult {
    run_scaling_with(plan, template, mode, |cfg| two_layer_model(&cfg.grid()?))
}

pub fn run_scaling_with(
    plan: &[PlanEntry],
    template: &SimConfig,
    mode: ScalingMode,
    model: impl Fn(&SimConfig) -> Result<EarthModel>,
) -> ScalingResult {
    let mut runs: Vec<ScalingRun> = plan
        .iter()
        .map(|e| {
            let mut cfg = template.clone();
            cfg.ngrid = e.ngrid;
            cfg.nthreads = e.nthreads;
            cfg.verbose = false;
            if e.nthreads > 1 {
                cfg.target = Target::Parallel;
            }
            let outcome = model(&cfg).and_then(|m| {
                if e.ranks <= 1 {
                    run::<f32>(&cfg, &m).map(|r| r.1)
                } else {
                    run_in_process(&cfg, &m, rank_dims(e.ranks, e.ngrid), &mut std::io::sink()).map(|r| r.1)
                }
            });
            match outcome {
                Ok(rep) => ScalingRun {
                    entry: *e,
                    kernel_s: rep.kernel_s,
                    modeling_s: rep.modeling_s,
                    efficiency_pct: None,
                    error: None,
                },
                Err(err) => ScalingRun {
                    entry: *e,
                    kernel_s: f64::NAN,
                    modeling_s: f64::NAN,
                    efficiency_pct: None,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect();
    fill_efficiencies(mode, &mut runs);
    ScalingResult {
        mode,
        template: template.clone(),
        runs,
    }
}

/// Sets `efficiency_pct` on the successful runs, baseline = first success.
pub fn fill_efficiencies(mode: ScalingMode, runs: &mut [ScalingRun]) {
    let ok: Vec<usize> = (0..runs.len()).filter(|&i| runs[i].error.is_none()).collect();
    let samples: Vec<_> = ok
        .iter()
        .map(|&i| {
            let e = &runs[i].entry;
            let workers = e.ranks.max(1) * e.nthreads.max(1);
            (workers, e.ngrid.iter().map(|v| *v as f64).product::<f64>(), runs[i].kernel_s)
        })
        .collect();
    for (i, eff) in ok.into_iter().zip(efficiencies(mode, &samples)) {
        runs[i].efficiency_pct = Some(eff);
    }
}

pub const CSV_COLUMNS: [&str; 13] = [
    "run_id",
    "propagator",
    "target",
    "ranks",
    "nthreads",
    "nx",
    "ny",
    "nz",
    "nsteps",
    "kernel_s",
    "modeling_s",
    "points_per_s",
    "efficiency_pct",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub run_id: usize,
    pub propagator: String,
    pub target: String,
    pub ranks: usize,
    pub nthreads: usize,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub nsteps: usize,
    pub kernel_s: Option<f64>,
    pub modeling_s: Option<f64>,
    pub points_per_s: Option<f64>,
    pub efficiency_pct: Option<f64>,
}

impl ScalingResult {
    pub fn rows(&self) -> Vec<CsvRow> {
        let t = &self.template;
        self.runs
            .iter()
            .enumerate()
            .map(|(id, r)| {
                let e = &r.entry;
                let ok = r.error.is_none();
                let points = e.ngrid.iter().map(|v| *v as f64).product::<f64>() * t.nsteps as f64;
                CsvRow {
                    run_id: id,
                    propagator: t.propagator.name().into(),
                    target: if e.nthreads > 1 { Target::Parallel } else { t.target }.name().into(),
                    ranks: e.ranks,
                    nthreads: e.nthreads,
                    nx: e.ngrid[0],
                    ny: e.ngrid[1],
                    nz: e.ngrid[2],
                    nsteps: t.nsteps,
                    kernel_s: ok.then_some(r.kernel_s),
                    modeling_s: ok.then_some(r.modeling_s),
                    points_per_s: ok.then(|| points / r.kernel_s),
                    efficiency_pct: r.efficiency_pct,
                }
            })
            .collect()
    }
}

pub fn csv_string(rows: &[CsvRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let err = |e: csv::Error| Error::validation(format!("csv: {e}"));
    w.write_record(CSV_COLUMNS).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::validation(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::validation(format!("csv: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != CSV_COLUMNS {
        return Err(Error::validation(format!("unexpected csv columns {header:?}")));
    }
    r.deserialize()
        .collect::<std::result::Result<Vec<CsvRow>, _>>()
        .map_err(|e| Error::validation(format!("csv: {e}")))
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    write_atomic(path, csv_string(rows)?.as_bytes())
}

/// Hardware description for roofline ceilings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineFile {
    #[serde(default)]
    pub name: String,
    pub peak_gflops: f64,
    pub memory: Vec<MemoryLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryLevel {
    pub name: String,
    pub peak_bw_gbs: f64,
}

impl MachineFile {
    pub fn parse(text: &str) -> Result<Self> {
        let m: MachineFile = serde_json::from_str(text).map_err(|e| Error::validation(format!("machine file: {e}")))?;
        let bad = |v: f64| !(v > 0.0) || !v.is_finite();
        if bad(m.peak_gflops) || m.memory.is_empty() || m.memory.iter().any(|l| bad(l.peak_bw_gbs)) {
            return Err(Error::validation("machine file needs positive peak_gflops and at least one memory level with positive peak_bw_gbs"));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Format {
            path: path.into(),
            msg: e.to_string(),
        })
    }

    /// Arithmetic intensity where the bandwidth roof meets the compute roof.
    pub fn ridge_point(level: &MemoryLevel, peak_gflops: f64) -> f64 {
        peak_gflops / level.peak_bw_gbs
    }

    /// Attainable GFLOP/s at intensity `ai` under `level`'s bandwidth.
    pub fn attainable(&self, level: &MemoryLevel, ai: f64) -> f64 {
        (ai * level.peak_bw_gbs).min(self.peak_gflops)
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const M: f64 = 60.0;

fn svg_frame(title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{M}" y1="{M}" x2="{M}" y2="{}" stroke="black"/>"#,
        H - M,
        W - M,
        H - M,
        H - M
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, W / 2.0, H - 18.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
    s
}

/// Log-scale axis mapping `[lo, hi]` onto `[a, b]` pixels.
fn log_map(lo: f64, hi: f64, a: f64, b: f64) -> impl Fn(f64) -> f64 {
    let (l, h) = (lo.log10(), hi.log10().max(lo.log10() + 1e-9));
    move |v: f64| a + (v.log10() - l) / (h - l) * (b - a)
}

/// Efficiency (%) against worker count, log2 x axis.
pub fn efficiency_svg(result: &ScalingResult) -> String {
    let pts: Vec<(f64, f64)> = result
        .runs
        .iter()
        .filter_map(|r| r.efficiency_pct.map(|e| ((r.entry.ranks * r.entry.nthreads).max(1) as f64, e)))
        .collect();
    let title = match result.mode {
        ScalingMode::WeakIdeal => "Weak scaling (grid grows along x)",
        ScalingMode::WeakPractical => "Weak scaling (balanced growth)",
        ScalingMode::Strong => "Strong scaling",
    };
    let mut s = svg_frame(title, "ranks x threads", "efficiency (%)");
    let xmax = pts.iter().map(|p| p.0).fold(2.0, f64::max);
    let ymax = pts.iter().map(|p| p.1).fold(100.0, f64::max) * 1.1;
    let fx = log_map(1.0, xmax, M, W - M);
    let fy = |v: f64| H - M - v / ymax * (H - 2.0 * M);
    for t in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let _ = writeln!(
            s,
            r##"<line x1="{M}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{t}</text>"##,
            W - M,
            M - 6.0,
            fy(t) + 4.0,
            y = fy(t)
        );
    }
    let mut x = 1.0;
    while x <= xmax {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{x}</text>"#, fx(x), H - M + 16.0);
        x *= 2.0;
    }
    let line: Vec<String> = pts.iter().map(|(x, y)| format!("{:.1},{:.1}", fx(*x), fy(*y))).collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##, line.join(" "));
    for (x, y) in &pts {
        let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="#1f77b4"/>"##, fx(*x), fy(*y));
    }
    s.push_str("</svg>\n");
    s
}

/// Roofline chart with one ceiling per memory level and the kernels placed
/// at their arithmetic intensity (and measured GFLOP/s when given).
pub fn roofline_svg(machine: &MachineFile, kernels: &[(String, f64, Option<f64>)]) -> String {
    let mut s = svg_frame(&format!("Roofline {}", machine.name), "arithmetic intensity (flop/byte)", "GFLOP/s");
    let (xlo, xhi) = (1.0 / 16.0, 64.0);
    let ylo = machine.memory.iter().map(|l| l.peak_bw_gbs * xlo).fold(machine.peak_gflops, f64::min) / 2.0;
    let yhi = machine.peak_gflops * 2.0;
    let fx = log_map(xlo, xhi, M, W - M);
    let fy = {
        let f = log_map(ylo, yhi, 0.0, H - 2.0 * M);
        move |v: f64| H - M - f(v)
    };
    let mut x = xlo;
    while x <= xhi {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{x}</text>"#, fx(x), H - M + 16.0);
        x *= 4.0;
    }
    let colors = ["#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];
    for (i, level) in machine.memory.iter().enumerate() {
        let ridge = MachineFile::ridge_point(level, machine.peak_gflops);
        let x0 = xlo;
        let x1 = ridge.clamp(xlo, xhi);
        let c = colors[i % colors.len()];
        let _ = writeln!(
            s,
            r#"<polyline points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            fx(x0),
            fy(machine.attainable(level, x0)),
            fx(x1),
            fy(machine.attainable(level, x1)),
            fx(xhi),
            fy(machine.attainable(level, xhi))
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{c}">{} {} GB/s</text>"#,
            fx(x0) + 4.0,
            fy(machine.attainable(level, x0)) - 6.0,
            level.name,
            level.peak_bw_gbs
        );
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">peak {} GFLOP/s</text>"#, W - M, fy(machine.peak_gflops) - 6.0, machine.peak_gflops);
    for (name, ai, measured) in kernels {
        let x = fx(ai.clamp(xlo, xhi));
        let _ = writeln!(s, r##"<line x1="{x:.1}" y1="{M}" x2="{x:.1}" y2="{}" stroke="#999" stroke-dasharray="4 3"/>"##, H - M);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" transform="rotate(-90 {:.1} {})">{name}</text>"#, x - 4.0, M + 90.0, x - 4.0, M + 90.0);
        if let Some(g) = measured {
            let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{:.1}" r="4" fill="black"/>"#, fy(g.clamp(ylo, yhi)));
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `scaling.csv`, `efficiency.svg` and, with a machine file,
/// `roofline.svg` into `dir`.
pub fn emit_report(dir: &Path, result: &ScalingResult, cost: &KernelCostModel, machine: Option<&MachineFile>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_csv(&dir.join("scaling.csv"), &result.rows())?;
    write_atomic(&dir.join("efficiency.svg"), efficiency_svg(result).as_bytes())?;
    if let Some(m) = machine {
        let nsteps = result.template.nsteps as f64;
        let best = result
            .runs
            .iter()
            .filter(|r| r.error.is_none() && r.kernel_s > 0.0)
            .map(|r| {
                let pts = r.entry.ngrid.iter().map(|v| *v as f64).product::<f64>();
                cost.flops_per_point as f64 * pts * nsteps / r.kernel_s / 1e9
            })
            .fold(None, |a: Option<f64>, g| Some(a.map_or(g, |a| a.max(g))));
        let label = format!("{} r={}", cost.propagator, cost.radius);
        write_atomic(&dir.join("roofline.svg"), roofline_svg(m, &[(label, cost.arithmetic_intensity(), best)]).as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_axis_radius_one_count() {
        Sym::reset();
        let p = [Sym::input(), Sym::input(), Sym::input()];
        let lap = Laplacian {
            ctot: Sym::input(),
            radius: [1, 0, 0],
            c: [[Sym::input(); MAX_RADIUS]; 3],
            stride: [1, 1, 1],
        };
        // c0 p0 + c1 (p+ + p-): two multiplies, two adds
        let ops = count_ops(&[lap.at(&p, 1)]);
        assert_eq!(ops, OpCount { adds: 2, subs: 0, muls: 2 });
    }

    #[test]
    fn acoustic_cd_costs() {
        // 1 + 3 axes x r taps x (add, mul, add) for the Laplacian, 4 for the update
        for r in 1..=MAX_RADIUS {
            let c = count_stencil_cost(PropagatorKind::AcousticIsoCd, r).unwrap();
            assert_eq!(c.flops_per_point, (1 + 9 * r + 4) as u64);
            assert_eq!(c.bytes_per_point, 16);
            assert!((c.arithmetic_intensity() - c.flops_per_point as f64 / 16.0).abs() < 1e-12);
        }
        let c4 = count_stencil_cost(PropagatorKind::AcousticIsoCd, 4).unwrap();
        assert_eq!(c4.flops_per_point, 41);
        assert!(count_stencil_cost(PropagatorKind::AcousticIsoCd, 0).is_err());
    }

    #[test]
    fn staggered_costs() {
        // each staggered derivative: r subs, r muls, r - 1 adds
        let r = 2;
        let d = (3 * r - 1) as u64;
        let a = count_stencil_cost(PropagatorKind::AcousticIso, r).unwrap();
        assert_eq!(a.flops_per_point, 3 * (d + 2) + (3 * d + 2 + 2));
        let e = count_stencil_cost(PropagatorKind::ElasticIso, r).unwrap();
        // 9 velocity derivatives, 3 normal strains shared by 3 equations, 6 shear derivatives
        let vel = 9 * d + 3 * 2 + 3 * 2;
        let normal = 3 * d + 3 * 5;
        let shear = 6 * d + 3 * 3;
        assert_eq!(e.flops_per_point, vel + normal + shear);
    }

    #[test]
    fn weak_plans() {
        let ideal = weak_scaling_plan(1000, &[1, 6], ScalingMode::WeakIdeal);
        assert_eq!(ideal[0].ngrid, [1000; 3]);
        assert_eq!(ideal[1].ngrid, [6000, 1000, 1000]);
        let sides: Vec<_> = weak_scaling_plan(1000, &[1, 2, 4, 6], ScalingMode::WeakPractical)
            .iter()
            .map(|e| e.ngrid[0])
            .collect();
        assert_eq!(sides, vec![1000, 1280, 1600, 1856]);
    }

    #[test]
    fn efficiency_formulas() {
        let weak = efficiencies(ScalingMode::WeakIdeal, &[(1, 1e9, 10.0), (2, 2e9, 10.0)]);
        assert_eq!(weak, vec![100.0, 100.0]);
        let strong = efficiencies(ScalingMode::Strong, &[(8, 1.0, 80.0), (256, 1.0, 4.0)]);
        assert!((strong[1] - 62.5).abs() < 1e-12);
        assert!(efficiencies(ScalingMode::Strong, &[]).is_empty());
    }

    #[test]
    fn rank_grids() {
        assert_eq!(rank_dims(16, [1024; 3]), [4, 2, 2]);
        assert_eq!(rank_dims(6, [6000, 1000, 1000]), [6, 1, 1]);
        assert_eq!(rank_dims(1, [10; 3]), [1, 1, 1]);
        for r in [2, 8, 12, 30, 256] {
            assert_eq!(rank_dims(r, [64, 96, 128]).iter().product::<usize>(), r);
        }
    }

    #[test]
    fn ridge_point() {
        let m = MachineFile::parse(r#"{"name":"x","peak_gflops":1000,"memory":[{"name":"DRAM","peak_bw_gbs":250}]}"#).unwrap();
        assert_eq!(MachineFile::ridge_point(&m.memory[0], m.peak_gflops), 4.0);
        assert_eq!(m.attainable(&m.memory[0], 1.0), 250.0);
        assert_eq!(m.attainable(&m.memory[0], 10.0), 1000.0);
        assert!(MachineFile::parse(r#"{"peak_gflops":1,"memory":[]}"#).is_err());
    }
}

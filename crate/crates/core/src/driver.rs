//! Time loop, stability bound and the run report.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::cpml::{build_profile, degenerate_profile, CpmlParams};
use crate::error::{Error, Result};
use crate::exec::{select_target, Target};
use crate::grid::{DampingWidths, Grid3D, RegionPartition};
use crate::model::EarthModel;
use crate::propagators::{build, PointSource, PropagatorKind, Setup};
use crate::real::Real;
use crate::source::{default_source, receiver_plane, ricker, AcquisitionGeometry, ShotRecord};
use crate::stencil::{second_derivative_coeffs, staggered_first_derivative_coeffs, DEFAULT_RADIUS};

/// Full parameter set of one modeling run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub ngrid: [usize; 3],
    pub dgrid: [f64; 3],
    pub nsteps: usize,
    pub fmax: f64,
    pub verbose: bool,
    pub propagator: PropagatorKind,
    pub target: Target,
    pub nthreads: usize,
    pub cfl: f64,
    /// Overrides the stability-derived time step.
    pub dt: Option<f64>,
    /// Stencil radius per axis.
    pub stencil: [usize; 3],
    /// 0-based; defaults to the grid center.
    pub source_loc: Option<[usize; 3]>,
    pub ndamping: [usize; 3],
    pub ntaper: [usize; 3],
    /// Explicit receiver list; defaults to a plane below the top damping layer.
    pub receivers: Option<Vec<[usize; 3]>>,
    pub receiver_increment: [usize; 2],
    pub source_increment: [usize; 3],
    pub nshots: usize,
    pub time_rec: f64,
    pub free_surface: bool,
    /// `false` keeps the damping regions but with a zero profile.
    pub cpml: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            ngrid: [100; 3],
            dgrid: [20.0; 3],
            nsteps: 1000,
            fmax: 25.0,
            verbose: false,
            propagator: PropagatorKind::AcousticIsoCd,
            target: Target::Seq,
            nthreads: 1,
            cfl: 0.8,
            dt: None,
            stencil: [DEFAULT_RADIUS; 3],
            source_loc: None,
            ndamping: [27; 3],
            ntaper: [3; 3],
            receivers: None,
            receiver_increment: [1, 1],
            source_increment: [1, 1, 0],
            nshots: 1,
            time_rec: 0.0,
            free_surface: false,
            cpml: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nsteps == 0 {
            return Err(Error::config("nsteps must be >= 1"));
        }
        if !(self.fmax > 0.0) || !self.fmax.is_finite() {
            return Err(Error::config(format!("fmax must be positive, got {}", self.fmax)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::config(format!("dt must be positive, got {dt}")));
            }
        }
        if self.nthreads == 0 {
            return Err(Error::config("nthreads must be >= 1"));
        }
        if self.nshots != 1 {
            return Err(Error::config("only nshots = 1 is supported"));
        }
        Grid3D::new(self.ngrid, self.dgrid, 1)?;
        Ok(())
    }

    /// Wavefield grid with ghosts wide enough for the stencil.
    pub fn grid(&self) -> Result<Grid3D> {
        let r = self.stencil.iter().copied().max().unwrap_or(DEFAULT_RADIUS);
        Grid3D::new(self.ngrid, self.dgrid, r)
    }

    pub fn widths(&self) -> DampingWidths {
        let w = DampingWidths::uniform(self.ndamping);
        if self.free_surface {
            w.with_free_surface()
        } else {
            w
        }
    }

    pub fn geometry(&self, grid: &Grid3D) -> Result<AcquisitionGeometry> {
        let depth = if self.free_surface { 1 } else { self.ndamping[2] };
        let receivers = match &self.receivers {
            Some(r) => r.clone(),
            None => receiver_plane(grid, depth.min(grid.n()[2] - 1), self.receiver_increment)?,
        };
        let g = AcquisitionGeometry {
            source_loc: self.source_loc.unwrap_or_else(|| default_source(grid)),
            source_increment: self.source_increment,
            nshots: self.nshots,
            receivers,
            receiver_increment: self.receiver_increment,
            time_rec: self.time_rec,
        };
        g.validate(grid)?;
        Ok(g)
    }

    /// Time step: the override if set, otherwise the stability bound.
    pub fn time_step(&self, vmax: f64) -> Result<f64> {
        match self.dt {
            Some(dt) => Ok(dt),
            None => cfl_dt(self.propagator, vmax, self.dgrid, self.stencil, self.cfl),
        }
    }
}

/// Stable time step `cfl * 2 / (vmax * sqrt(sum_a s_a))`, where `s_a` bounds
/// the spectral radius of the axis operator: `|c0| + 2 sum |c_m|` for the
/// collocated second derivative, `(2 sum |w_m|)^2` for the staggered first
/// derivative (both with spacing folded in).
pub fn cfl_dt(kind: PropagatorKind, vmax: f64, d: [f64; 3], radius: [usize; 3], cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::config(format!("cfl must lie in (0, 1], got {cfl}")));
    }
    if !(vmax > 0.0) {
        return Err(Error::config(format!("vmax must be positive, got {vmax}")));
    }
    let mut sum = 0.0;
    for a in 0..3 {
        sum += if kind.staggered() {
            let w = staggered_first_derivative_coeffs(radius[a], d[a])?;
            let s: f64 = w.c.iter().map(|c| c.abs()).sum::<f64>() * 2.0;
            s * s
        } else {
            second_derivative_coeffs(radius[a], d[a])?.abs_sum()
        };
    }
    Ok(cfl * 2.0 / (vmax * sum.sqrt()))
}

/// Echo of the run parameters plus timings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: SimConfig,
    pub dt: f64,
    pub vmin: f64,
    pub vmax: f64,
    pub geometry: AcquisitionGeometry,
    /// Steps (1-based) at which a progress line was printed.
    pub progress: Vec<usize>,
    pub kernel_s: f64,
    pub modeling_s: f64,
}

/// Real in the style of Fortran list-directed output: nine significant digits.
pub fn fortran_real(v: f64) -> String {
    if v == 0.0 {
        return "0.00000000".into();
    }
    let a = v.abs();
    if (0.1..1e9).contains(&a) {
        let mut int_digits = if a < 1.0 { 0 } else { a.log10().floor() as i32 + 1 };
        let mut s = format!("{:.*}", (9 - int_digits).max(0) as usize, v);
        // rounding may carry into a new leading digit
        let digits = s.trim_start_matches('-').split('.').next().unwrap_or("").trim_start_matches('0').len() as i32;
        if digits > int_digits {
            int_digits = digits;
            s = format!("{:.*}", (9 - int_digits).max(0) as usize, v);
        }
        s
    } else {
        let e = a.log10().floor() as i32;
        let m = v / 10f64.powi(e);
        format!("{m:.8}E{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    }
}

fn label(name: &str) -> String {
    format!(" {name:<19}=")
}

fn ints(name: &str, v: &[usize]) -> String {
    let mut s = label(name);
    for (i, x) in v.iter().enumerate() {
        if i == 0 {
            s.push_str(&format!(" {x:>12}"));
        } else {
            s.push_str(&format!("{x:>12}"));
        }
    }
    s
}

fn reals(name: &str, v: &[f64]) -> String {
    let mut s = label(name);
    for (i, x) in v.iter().enumerate() {
        let x = *x as f32 as f64;
        if i == 0 {
            s.push(' ');
        }
        s.push_str(&format!("{:>13}    ", fortran_real(x)));
    }
    s
}

pub fn progress_line(step: usize, total: usize) -> String {
    format!(" time step{step:>12} /{total:>12}")
}

impl RunReport {
    /// The parameter block printed before the time loop.
    pub fn parameter_block(&self) -> String {
        let c = &self.config;
        let src = self.geometry.source_loc.map(|v| v + 1);
        let lines = [
            ints("nthreads", &[c.nthreads]),
            " ".into(),
            ints("ngrid", &c.ngrid),
            reals("dgrid", &c.dgrid),
            ints("nsteps", &[c.nsteps]),
            reals("fmax", &[c.fmax]),
            reals("vmin", &[self.vmin]),
            reals("vmax", &[self.vmax]),
            reals("cfl", &[c.cfl]),
            " ".into(),
            ints("stencil", &c.stencil),
            ints("source_loc", &src),
            ints("ndamping", &c.ndamping),
            ints("ntaper", &c.ntaper),
            " ".into(),
            ints("nshots", &[c.nshots]),
            reals("time_rec", &[c.time_rec]),
            ints("nreceivers", &[self.geometry.receivers.len()]),
            ints("receiver_increment", &self.geometry.receiver_increment),
            ints("source_increment", &c.source_increment),
            " ".into(),
        ];
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    pub fn timing_block(&self) -> String {
        format!("{:<13}{:>10.2}\n{:<13}{:>10.2}\n", "Time Kernel", self.kernel_s, "Time Modeling", self.modeling_s)
    }

    /// Complete report as printed by a run.
    pub fn render(&self) -> String {
        let mut s = self.parameter_block();
        for p in &self.progress {
            s.push_str(&progress_line(*p, self.config.nsteps));
            s.push('\n');
        }
        s.push_str(&self.timing_block());
        s
    }
}

/// Runs `config` on `model` silently.
pub fn run<T: Real>(config: &SimConfig, model: &EarthModel) -> Result<(ShotRecord, RunReport)> {
    run_with_output::<T>(config, model, &mut std::io::sink())
}

/// Runs `config` on `model`, streaming the report to `out` as it is produced.
pub fn run_with_output<T: Real>(config: &SimConfig, model: &EarthModel, out: &mut dyn Write) -> Result<(ShotRecord, RunReport)> {
    let start = Instant::now();
    config.validate()?;
    if model.grid.n() != config.ngrid {
        return Err(Error::config(format!(
            "model size {:?} does not match ngrid {:?}",
            model.grid.n(),
            config.ngrid
        )));
    }
    let exec = select_target(config.target, config.nthreads)?;
    let grid = config.grid()?;
    let widths = config.widths();
    let partition = RegionPartition::new(&grid, widths)?;
    let tapered;
    let model = if config.ntaper.iter().any(|t| *t > 0) {
        let mut m = model.clone();
        m.apply_taper(config.ntaper)?;
        tapered = m;
        &tapered
    } else {
        model
    };
    let dt = config.time_step(model.vmax)?;
    let profile = if config.cpml {
        build_profile(&grid, widths, CpmlParams::new(config.fmax, model.vmax, dt))?
    } else {
        degenerate_profile(grid.n(), widths)
    };
    let geometry = config.geometry(&grid)?;
    let wavelet = ricker(config.fmax, dt, config.nsteps)?;
    let setup = Setup {
        grid: grid.clone(),
        radius: config.stencil,
        dt,
        profile,
        layers: partition.layers,
        free_surface: config.free_surface,
        source: Some(PointSource {
            loc: geometry.source_loc,
            wavelet,
        }),
    };
    let mut prop = build::<T>(config.propagator, model, setup)?;
    let offsets: Vec<usize> = geometry.receivers.iter().map(|r| grid.offset_u(*r)).collect();
    let mut record = ShotRecord::new(offsets.len(), config.nsteps, dt);
    let mut report = RunReport {
        config: config.clone(),
        dt,
        vmin: model.vmin,
        vmax: model.vmax,
        geometry,
        progress: Vec::new(),
        kernel_s: 0.0,
        modeling_s: 0.0,
    };
    let io = |e| Error::io("<report>", e);
    out.write_all(report.parameter_block().as_bytes()).map_err(io)?;
    let mut kernel = Duration::ZERO;
    for n in 0..config.nsteps {
        let t = Instant::now();
        prop.step(n, &exec);
        kernel += t.elapsed();
        let mut finite = true;
        for (r, &o) in offsets.iter().enumerate() {
            let v = prop.observe(o).f64();
            finite &= v.is_finite();
            record.traces[r * config.nsteps + n] = v;
        }
        let step = n + 1;
        if step % 100 == 0 || step == config.nsteps {
            finite &= prop.is_finite();
        }
        if !finite {
            return Err(Error::Instability { step });
        }
        if config.verbose && step % 100 == 0 {
            report.progress.push(step);
            writeln!(out, "{}", progress_line(step, config.nsteps)).map_err(io)?;
        }
    }
    report.kernel_s = kernel.as_secs_f64();
    report.modeling_s = start.elapsed().as_secs_f64().max(report.kernel_s);
    out.write_all(report.timing_block().as_bytes()).map_err(io)?;
    Ok((record, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::constant_model;

    #[test]
    fn cfl_classic_three_point() {
        let dt = cfl_dt(PropagatorKind::AcousticIsoCd, 1.0, [1.0; 3], [1; 3], 1.0).unwrap();
        assert!((dt - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let half = cfl_dt(PropagatorKind::AcousticIsoCd, 1.0, [1.0; 3], [1; 3], 0.5).unwrap();
        assert!((half - dt / 2.0).abs() < 1e-15);
        assert!(cfl_dt(PropagatorKind::AcousticIsoCd, 1.0, [1.0; 3], [1; 3], 1.5).is_err());
        // two-point staggered difference has the same bound
        let st = cfl_dt(PropagatorKind::AcousticIso, 1.0, [1.0; 3], [1; 3], 1.0).unwrap();
        assert!((st - dt).abs() < 1e-15);
    }

    #[test]
    fn fortran_reals() {
        assert_eq!(fortran_real(20.0), "20.0000000");
        assert_eq!(fortran_real(25.0), "25.0000000");
        assert_eq!(fortran_real(1500.0), "1500.00000");
        assert_eq!(fortran_real(4500.0), "4500.00000");
        assert_eq!(fortran_real(0.8f32 as f64), "0.800000012");
        assert_eq!(fortran_real(0.0), "0.00000000");
        assert_eq!(fortran_real(9.9999999999), "10.0000000");
        assert_eq!(fortran_real(1e-3), "1.00000000E-03");
    }

    #[test]
    fn report_lines() {
        assert_eq!(ints("nthreads", &[1]), " nthreads           =            1");
        assert_eq!(ints("ngrid", &[240, 240, 240]), " ngrid              =          240         240         240");
        assert_eq!(reals("cfl", &[0.8]), " cfl                =   0.800000012    ");
        assert_eq!(
            reals("dgrid", &[20.0; 3]),
            " dgrid              =    20.0000000       20.0000000       20.0000000    "
        );
        assert_eq!(progress_line(100, 300), " time step         100 /         300");
    }

    #[test]
    fn zero_steps_rejected() {
        let cfg = SimConfig {
            ngrid: [10; 3],
            nsteps: 0,
            ndamping: [2; 3],
            ..SimConfig::default()
        };
        let m = constant_model(&cfg.grid().unwrap(), 1500.0, None, None).unwrap();
        assert!(matches!(run::<f32>(&cfg, &m), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_and_silent_without_verbose() {
        let cfg = SimConfig {
            ngrid: [16; 3],
            nsteps: 120,
            ndamping: [4; 3],
            ntaper: [0; 3],
            ..SimConfig::default()
        };
        let m = constant_model(&cfg.grid().unwrap(), 2000.0, None, None).unwrap();
        let mut buf = Vec::new();
        let (a, rep) = run_with_output::<f32>(&cfg, &m, &mut buf).unwrap();
        let (b, _) = run::<f32>(&cfg, &m).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains("time step"));
        assert!(text.contains("Time Kernel"));
        assert!(rep.kernel_s <= rep.modeling_s);
        assert!(a.max_abs() > 0.0);
    }
}

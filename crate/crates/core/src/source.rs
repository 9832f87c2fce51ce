//! Source wavelets, point injection, receiver layout and shot records.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid3D};
use crate::model::write_atomic;
use crate::real::Real;

/// Ratio between the maximum frequency and the Ricker peak frequency.
pub const FMAX_OVER_FPEAK: f64 = 3.0;

/// Ricker wavelet sampled at `t_n = n * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavelet {
    pub samples: Vec<f64>,
    pub dt: f64,
    pub fmax: f64,
    pub fpeak: f64,
    pub t0: f64,
}

impl Wavelet {
    /// Unit-peak Ricker value at time `t`.
    pub fn value(&self, t: f64) -> f64 {
        let a = (PI * self.fpeak * (t - self.t0)).powi(2);
        (1.0 - 2.0 * a) * (-a).exp()
    }

    /// Time integral of [`Wavelet::value`] from minus infinity to `t`.
    pub fn integral(&self, t: f64) -> f64 {
        let tau = t - self.t0;
        tau * (-(PI * self.fpeak * tau).powi(2)).exp()
    }

    /// Sample `n`, zero past the end.
    pub fn at(&self, n: usize) -> f64 {
        self.samples.get(n).copied().unwrap_or(0.0)
    }
}

/// Ricker wavelet with peak frequency `fmax / 3` delayed by `1.5 / fpeak`.
pub fn ricker(fmax: f64, dt: f64, nsteps: usize) -> Result<Wavelet> {
    if !(fmax > 0.0) || !fmax.is_finite() {
        return Err(Error::config(format!("fmax must be positive, got {fmax}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::config(format!("dt must be positive, got {dt}")));
    }
    if dt > 1.0 / (2.0 * fmax) {
        return Err(Error::config(format!(
            "dt={dt} s is too coarse to sample fmax={fmax} Hz (needs dt <= {})",
            1.0 / (2.0 * fmax)
        )));
    }
    let fpeak = fmax / FMAX_OVER_FPEAK;
    let mut w = Wavelet {
        samples: Vec::new(),
        dt,
        fmax,
        fpeak,
        t0: 1.5 / fpeak,
    };
    w.samples = (0..nsteps).map(|n| w.value(n as f64 * dt)).collect();
    Ok(w)
}

/// Adds `scale * amplitude` to `p` at `loc`.
pub fn inject_source<T: Real>(p: &mut Field<T>, amplitude: T, loc: [usize; 3], scale: T) -> Result<()> {
    if !p.grid().contains(loc) {
        return Err(Error::config(format!("source location {loc:?} outside interior {:?}", p.grid().n())));
    }
    let o = p.grid().offset_u(loc);
    p.data[o] = p.data[o] + scale * amplitude;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionGeometry {
    pub source_loc: [usize; 3],
    pub source_increment: [usize; 3],
    pub nshots: usize,
    pub receivers: Vec<[usize; 3]>,
    pub receiver_increment: [usize; 2],
    pub time_rec: f64,
}

/// Source at the grid center (index `(n - 1) / 2`).
pub fn default_source(grid: &Grid3D) -> [usize; 3] {
    grid.n().map(|n| (n - 1) / 2)
}

/// One receiver per `(x, y)` point on the plane `z = depth`, strided by `increment`.
pub fn receiver_plane(grid: &Grid3D, depth: usize, increment: [usize; 2]) -> Result<Vec<[usize; 3]>> {
    let n = grid.n();
    if depth >= n[2] {
        return Err(Error::config(format!("receiver depth {depth} outside nz={}", n[2])));
    }
    if increment.contains(&0) {
        return Err(Error::config("receiver increment must be >= 1"));
    }
    let mut r = Vec::with_capacity(n[0].div_ceil(increment[0]) * n[1].div_ceil(increment[1]));
    for i in (0..n[0]).step_by(increment[0]) {
        for j in (0..n[1]).step_by(increment[1]) {
            r.push([i, j, depth]);
        }
    }
    Ok(r)
}

/// Default acquisition: centered source, full receiver plane just below the
/// top damping layer.
pub fn default_receivers(grid: &Grid3D, ndamping: [usize; 3]) -> AcquisitionGeometry {
    let depth = ndamping[2].min(grid.n()[2] - 1);
    AcquisitionGeometry {
        source_loc: default_source(grid),
        source_increment: [1, 1, 0],
        nshots: 1,
        receivers: receiver_plane(grid, depth, [1, 1]).expect("depth clamped into the grid"),
        receiver_increment: [1, 1],
        time_rec: 0.0,
    }
}

impl AcquisitionGeometry {
    pub fn validate(&self, grid: &Grid3D) -> Result<()> {
        if !grid.contains(self.source_loc) {
            return Err(Error::config(format!(
                "source location {:?} outside interior {:?}",
                self.source_loc,
                grid.n()
            )));
        }
        if let Some(r) = self.receivers.iter().find(|r| !grid.contains(**r)) {
            return Err(Error::config(format!("receiver {r:?} outside interior {:?}", grid.n())));
        }
        Ok(())
    }
}

/// Receiver traces, one row of `nsteps` samples per receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotRecord {
    pub nreceivers: usize,
    pub nsteps: usize,
    pub dt: f64,
    pub traces: Vec<f64>,
}

/// JSON sidecar written next to the binary trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSidecar {
    pub dt: f64,
    pub nsteps: usize,
    pub nreceivers: usize,
    pub dtype: String,
    pub layout: String,
    pub source_loc: [usize; 3],
    pub receiver_increment: [usize; 2],
    pub receiver_first: Option<[usize; 3]>,
    pub receiver_last: Option<[usize; 3]>,
}

impl ShotRecord {
    pub fn new(nreceivers: usize, nsteps: usize, dt: f64) -> Self {
        ShotRecord {
            nreceivers,
            nsteps,
            dt,
            traces: vec![0.0; nreceivers * nsteps],
        }
    }

    pub fn trace(&self, r: usize) -> &[f64] {
        &self.traces[r * self.nsteps..(r + 1) * self.nsteps]
    }

    pub fn trace_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.traces[r * self.nsteps..(r + 1) * self.nsteps]
    }

    pub fn column(&self, step: usize) -> Vec<f64> {
        (0..self.nreceivers).map(|r| self.traces[r * self.nsteps + step]).collect()
    }

    /// Samples `data` at precomputed flat offsets into column `step`.
    pub fn record_offsets<T: Real>(&mut self, data: &[T], offsets: &[usize], step: usize) {
        debug_assert_eq!(offsets.len(), self.nreceivers);
        for (r, &o) in offsets.iter().enumerate() {
            self.traces[r * self.nsteps + step] = data[o].f64();
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.traces.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    /// Writes traces as raw little-endian f32 plus a `<path>.json` sidecar.
    pub fn save(&self, path: &Path, geometry: &AcquisitionGeometry) -> Result<()> {
        let bytes: Vec<u8> = self.traces.iter().flat_map(|v| (*v as f32).to_le_bytes()).collect();
        let side = ShotSidecar {
            dt: self.dt,
            nsteps: self.nsteps,
            nreceivers: self.nreceivers,
            dtype: "f32le".into(),
            layout: "receiver-major [nreceivers x nsteps]".into(),
            source_loc: geometry.source_loc,
            receiver_increment: geometry.receiver_increment,
            receiver_first: geometry.receivers.first().copied(),
            receiver_last: geometry.receivers.last().copied(),
        };
        write_atomic(path, &bytes)?;
        let text = serde_json::to_string_pretty(&side).expect("sidecar serializes");
        write_atomic(&Self::sidecar_path(path), text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<(ShotRecord, ShotSidecar)> {
        let side_path = Self::sidecar_path(path);
        let text = std::fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
        let side: ShotSidecar = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: side_path.clone(),
            msg: e.to_string(),
        })?;
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() != side.nreceivers * side.nsteps * 4 {
            return Err(Error::Format {
                path: path.into(),
                msg: format!("expected {} samples, found {} bytes", side.nreceivers * side.nsteps, bytes.len()),
            });
        }
        let traces = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
            .collect();
        Ok((
            ShotRecord {
                nreceivers: side.nreceivers,
                nsteps: side.nsteps,
                dt: side.dt,
                traces,
            },
            side,
        ))
    }
}

/// Stores `p` at every receiver into column `step`.
pub fn record<T: Real>(p: &Field<T>, geometry: &AcquisitionGeometry, step: usize, into: &mut ShotRecord) -> Result<()> {
    if step >= into.nsteps {
        return Err(Error::Contract(format!("step {step} beyond record length {}", into.nsteps)));
    }
    let offsets: Vec<usize> = geometry.receivers.iter().map(|r| p.grid().offset_u(*r)).collect();
    into.record_offsets(&p.data, &offsets, step);
    Ok(())
}

//! Earth models: material volumes, validation and on-disk manifests.
//!
//! A manifest is a JSON file next to headerless little-endian `f32` volumes
//! covering the interior in z-fastest order:
//!
//! ```json
//! { "n": [nx, ny, nz], "d": [dx, dy, dz],
//!   "components": { "vp": "vp.f32", "vs": "vs.f32", "rho": "rho.f32" },
//!   "dtype": "f32le", "order": "z-fastest" }
//! ```

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Component, Field, Grid3D};
use crate::stencil::DEFAULT_RADIUS;

pub const DTYPE: &str = "f32le";
pub const ORDER: &str = "z-fastest";

/// Layer properties of the default model: (vp, vs, rho).
pub const DEFAULT_TOP: (f64, f64, f64) = (1500.0, 0.0, 1000.0);
pub const DEFAULT_BOTTOM: (f64, f64, f64) = (4500.0, 2600.0, 2200.0);

#[derive(Debug, Clone, PartialEq)]
pub struct EarthModel {
    pub grid: Grid3D,
    pub vp: Field<f32>,
    pub vs: Option<Field<f32>>,
    pub rho: Option<Field<f32>>,
    pub vmin: f64,
    pub vmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub n: [usize; 3],
    pub d: [f64; 3],
    pub components: BTreeMap<String, String>,
    pub dtype: String,
    pub order: String,
}

impl EarthModel {
    /// Validates volumes, fills material ghosts by edge replication and caches vmin/vmax.
    pub fn from_fields(vp: Field<f32>, vs: Option<Field<f32>>, rho: Option<Field<f32>>) -> Result<Self> {
        let grid = vp.grid().clone();
        for f in vs.iter().chain(rho.iter()) {
            if f.grid().n() != grid.n() || f.grid().radius() != grid.radius() {
                return Err(Error::validation(format!("{} volume does not match the vp grid", f.component().name())));
            }
        }
        let mut m = EarthModel {
            grid,
            vp: vp.with_component(Component::Vp),
            vs: vs.map(|f| f.with_component(Component::Vs)),
            rho: rho.map(|f| f.with_component(Component::Rho)),
            vmin: 0.0,
            vmax: 0.0,
        };
        m.validate()?;
        m.refresh();
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        for [i, j, k] in self.grid.interior_box().iter() {
            let p = [i, j, k];
            let vp = self.vp.get(p);
            if !vp.is_finite() || vp <= 0.0 {
                return Err(Error::validation(format!("vp must be finite and positive, got {vp} at {p:?}")));
            }
            if let Some(rho) = &self.rho {
                let r = rho.get(p);
                if !r.is_finite() || r <= 0.0 {
                    return Err(Error::validation(format!("rho must be finite and positive, got {r} at {p:?}")));
                }
            }
            if let Some(vs) = &self.vs {
                let s = vs.get(p);
                if !s.is_finite() || s < 0.0 || s >= vp {
                    return Err(Error::validation(format!(
                        "vs must satisfy 0 <= vs < vp, got vs={s} vp={vp} at {p:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn refresh(&mut self) {
        self.vp.fill_ghosts_edge();
        if let Some(f) = &mut self.vs {
            f.fill_ghosts_edge();
        }
        if let Some(f) = &mut self.rho {
            f.fill_ghosts_edge();
        }
        let (lo, hi) = self.vp.min_max();
        self.vmin = lo as f64;
        self.vmax = hi as f64;
    }

    pub fn n(&self) -> [usize; 3] {
        self.grid.n()
    }

    /// Clamps vp into `[lo, hi]` pointwise (vs is clamped below the new vp).
    pub fn clamp_vp(&mut self, lo: f32, hi: f32) -> Result<()> {
        let n = self.grid.interior_box();
        for p in n.iter() {
            let v = self.vp.get(p).clamp(lo, hi);
            self.vp.set(p, v);
        }
        if let Some(vs) = &mut self.vs {
            for p in n.iter() {
                let cap = self.vp.get(p);
                if vs.get(p) >= cap {
                    vs.set(p, cap * 0.5);
                }
            }
        }
        self.validate()?;
        self.refresh();
        Ok(())
    }

    /// Cosine taper over the outermost `ntaper` cells per axis: each value is
    /// blended towards the first untapered value on the same grid line, fully
    /// at the outer face. Lines that are constant near the edge are unchanged.
    pub fn apply_taper(&mut self, ntaper: [usize; 3]) -> Result<()> {
        let n = self.grid.n();
        for a in 0..3 {
            if ntaper[a] == 0 {
                continue;
            }
            if 2 * ntaper[a] >= n[a] {
                return Err(Error::config(format!("ntaper {} too large for {} points", ntaper[a], n[a])));
            }
        }
        let grid = self.grid.clone();
        let fields = std::iter::once(&mut self.vp).chain(self.vs.iter_mut()).chain(self.rho.iter_mut());
        for f in fields {
            for a in 0..3 {
                let nt = ntaper[a];
                if nt == 0 {
                    continue;
                }
                let (b, c) = match a {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                for u in 0..n[b] {
                    for v in 0..n[c] {
                        let at = |t: usize| {
                            let mut p = [0; 3];
                            p[a] = t;
                            p[b] = u;
                            p[c] = v;
                            p
                        };
                        let lo_ref = f.get(at(nt)) as f64;
                        let hi_ref = f.get(at(n[a] - 1 - nt)) as f64;
                        for t in 0..nt {
                            let w = 0.5 * (1.0 - (std::f64::consts::PI * t as f64 / nt as f64).cos());
                            let lo = at(t);
                            let val = f.get(lo) as f64;
                            f.set(lo, (w * val + (1.0 - w) * lo_ref) as f32);
                            let hi = at(n[a] - 1 - t);
                            let val = f.get(hi) as f64;
                            f.set(hi, (w * val + (1.0 - w) * hi_ref) as f32);
                        }
                    }
                }
            }
        }
        let _ = grid;
        self.validate()?;
        self.refresh();
        Ok(())
    }

    /// Material value of `field` at an index of a subdomain starting at
    /// `offset`, with edge replication outside the global interior.
    pub fn sample(field: &Field<f32>, global: [isize; 3]) -> f32 {
        let n = field.grid().n();
        let q = [0, 1, 2].map(|a| global[a].clamp(0, n[a] as isize - 1) as usize);
        field.get(q)
    }

    /// Copies the part of the model covering `local` (whose index 0 sits at
    /// global index `offset`), ghosts included.
    pub fn window(&self, local: &Grid3D, offset: [usize; 3]) -> Result<EarthModel> {
        let copy = |f: &Field<f32>| {
            let mut out = Field::zeros(local, f.component());
            let r = local.radius() as isize;
            let ln = local.n().map(|v| v as isize);
            for i in -r..ln[0] + r {
                for j in -r..ln[1] + r {
                    for k in -r..ln[2] + r {
                        let g = [i + offset[0] as isize, j + offset[1] as isize, k + offset[2] as isize];
                        out.set_at(i, j, k, Self::sample(f, g));
                    }
                }
            }
            out
        };
        let (lo, hi) = (self.vmin, self.vmax);
        let mut m = EarthModel {
            grid: local.clone(),
            vp: copy(&self.vp),
            vs: self.vs.as_ref().map(copy),
            rho: self.rho.as_ref().map(copy),
            vmin: lo,
            vmax: hi,
        };
        // keep the global bounds: the time step must not depend on the decomposition
        m.vmin = lo;
        m.vmax = hi;
        Ok(m)
    }
}

/// Homogeneous model.
pub fn constant_model(grid: &Grid3D, vp: f64, vs: Option<f64>, rho: Option<f64>) -> Result<EarthModel> {
    if let Some(s) = vs {
        if s >= vp {
            return Err(Error::validation(format!("vs={s} must be below vp={vp}")));
        }
    }
    let f = |v: f64, c| Field::filled(grid, c, v as f32);
    EarthModel::from_fields(f(vp, Component::Vp), vs.map(|v| f(v, Component::Vs)), rho.map(|v| f(v, Component::Rho)))
}

/// Default model: two horizontal layers split at `nz / 2`, slow on top.
pub fn two_layer_model(grid: &Grid3D) -> Result<EarthModel> {
    let nz = grid.n()[2];
    let pick = |k: usize| if k < nz / 2 { DEFAULT_TOP } else { DEFAULT_BOTTOM };
    let vp = Field::from_fn(grid, Component::Vp, |_, _, k| pick(k).0 as f32);
    let vs = Field::from_fn(grid, Component::Vs, |_, _, k| pick(k).1 as f32);
    let rho = Field::from_fn(grid, Component::Rho, |_, _, k| pick(k).2 as f32);
    EarthModel::from_fields(vp, Some(vs), Some(rho))
}

/// Lamé parameters `lambda = rho (vp^2 - 2 vs^2)` and `mu = rho vs^2`, in f64.
pub fn lame_parameters(model: &EarthModel) -> Result<(Field<f64>, Field<f64>)> {
    let (vs, rho) = match (&model.vs, &model.rho) {
        (Some(vs), Some(rho)) => (vs, rho),
        _ => return Err(Error::config("Lame parameters need vs and rho volumes")),
    };
    let g = &model.grid;
    let mut lambda = Field::zeros(g, Component::Aux);
    let mut mu = Field::zeros(g, Component::Aux);
    for o in 0..g.len() {
        let (p, s, r) = (model.vp.data[o] as f64, vs.data[o] as f64, rho.data[o] as f64);
        lambda.data[o] = r * (p * p - 2.0 * s * s);
        mu.data[o] = r * s * s;
    }
    Ok((lambda, mu))
}

fn read_volume(path: &Path, grid: &Grid3D, c: Component) -> Result<Field<f32>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let want = grid.interior_len() * 4;
    if bytes.len() != want {
        return Err(Error::Format {
            path: path.into(),
            msg: format!(
                "size mismatch: manifest n={:?} needs {} bytes ({} samples), file has {} bytes",
                grid.n(),
                want,
                grid.interior_len(),
                bytes.len()
            ),
        });
    }
    let mut f = Field::zeros(grid, c);
    for (p, chunk) in grid.interior_box().iter().zip(bytes.chunks_exact(4)) {
        let v = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        f.set(p, v);
    }
    Ok(f)
}

/// Loads a model from a manifest; ghost shells use the default stencil radius.
pub fn load_model(manifest: &Path) -> Result<EarthModel> {
    let text = std::fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: manifest.into(),
        msg: e.to_string(),
    })?;
    let fmt = |msg: String| Error::Format {
        path: manifest.into(),
        msg,
    };
    if m.dtype != DTYPE {
        return Err(fmt(format!("unsupported dtype {:?}, expected {DTYPE:?}", m.dtype)));
    }
    if m.order != ORDER {
        return Err(fmt(format!("unsupported order {:?}, expected {ORDER:?}", m.order)));
    }
    if let Some(k) = m.components.keys().find(|k| !["vp", "vs", "rho"].contains(&k.as_str())) {
        return Err(fmt(format!("unknown component {k:?}")));
    }
    let grid = Grid3D::new(m.n, m.d, DEFAULT_RADIUS)?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let vol = |name: &str, c| -> Result<Option<Field<f32>>> {
        m.components.get(name).map(|f| read_volume(&dir.join(f), &grid, c)).transpose()
    };
    let vp = vol("vp", Component::Vp)?.ok_or_else(|| fmt("manifest lacks a vp component".into()))?;
    EarthModel::from_fields(vp, vol("vs", Component::Vs)?, vol("rho", Component::Rho)?)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if path.as_os_str().is_empty() {
        return Err(Error::config("empty output path"));
    }
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn volume_bytes(f: &Field<f32>) -> Vec<u8> {
    f.interior_values().flat_map(f32::to_le_bytes).collect()
}

/// Saves the model next to `manifest`; volumes are named `<component>.f32`.
pub fn save_model(model: &EarthModel, manifest: &Path) -> Result<()> {
    if manifest.as_os_str().is_empty() {
        return Err(Error::config("empty manifest path"));
    }
    let dir = match manifest.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut components = BTreeMap::new();
    let mut put = |name: &str, f: &Field<f32>| -> Result<()> {
        let file = format!("{name}.f32");
        write_atomic(&dir.join(&file), &volume_bytes(f))?;
        components.insert(name.to_string(), file);
        Ok(())
    };
    put("vp", &model.vp)?;
    if let Some(f) = &model.vs {
        put("vs", f)?;
    }
    if let Some(f) = &model.rho {
        put("rho", f)?;
    }
    let m = Manifest {
        n: model.grid.n(),
        d: model.grid.d(),
        components,
        dtype: DTYPE.into(),
        order: ORDER.into(),
    };
    let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    write_atomic(manifest, text.as_bytes())
}

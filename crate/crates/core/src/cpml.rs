//! Convolutional PML profiles, layer-local memory storage and the free surface.
//!
//! Profiles are functions of the continuous position along an axis. With
//! `nd_lo` / `nd_hi` layer cells on an axis of `n` points, the low layer edge
//! sits at `nd_lo - 1/2` and the high one at `n - nd_hi - 1/2`; the penetration
//! `xi` (in cells) grows outwards from those edges. Nodes and half-nodes with
//! `xi > 0` therefore lie inside the index ranges `[0, nd_lo)` and
//! `[n - nd_hi, n)` used by the region partition.
//!
//! Grading: `d = d0 (xi / L)^2` with `d0 = -3 vmax ln(R) / (2 L)`,
//! `alpha = pi fmax (1 - xi / L)` inside the layer, `kappa = 1`.
//! Recursion coefficients: `b = exp(-(d / kappa + alpha) dt)`,
//! `a = d (b - 1) / (kappa (d + kappa alpha))` and `c = (1 - b) / (d + alpha)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{AxisLayers, DampingWidths, Field, Grid3D, AXIS_NAMES};
use crate::real::Real;

pub const R_TARGET: f64 = 1e-3;

/// CPML coefficients at one position.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProfilePoint {
    pub d: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub b: f64,
    pub a: f64,
    pub c: f64,
    /// Spatial derivative of `d` along the axis (per meter).
    pub dprime: f64,
    /// Spatial derivative of `d + alpha` along the axis (per meter).
    pub betaprime: f64,
}

impl ProfilePoint {
    /// No damping: `b = 1`, `a = 0`.
    pub const IDENTITY: ProfilePoint = ProfilePoint {
        d: 0.0,
        alpha: 0.0,
        kappa: 1.0,
        b: 1.0,
        a: 0.0,
        c: 0.0,
        dprime: 0.0,
        betaprime: 0.0,
    };

    pub fn damped(&self) -> bool {
        self.d > 0.0
    }
}

/// Parameters shared by every axis profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpmlParams {
    pub fmax: f64,
    pub vmax: f64,
    pub r_target: f64,
    pub dt: f64,
}

impl CpmlParams {
    pub fn new(fmax: f64, vmax: f64, dt: f64) -> Self {
        CpmlParams { fmax, vmax, r_target: R_TARGET, dt }
    }

    pub fn alpha_max(&self) -> f64 {
        PI * self.fmax
    }

    /// Peak damping for a layer of `nd` cells of size `h`.
    pub fn d0(&self, nd: usize, h: f64) -> f64 {
        let l = nd as f64 * h;
        -3.0 * self.vmax * self.r_target.ln() / (2.0 * l)
    }

    /// Coefficients at penetration `xi` cells into a layer of `nd` cells.
    /// `outward` is `+1` when `xi` grows with the coordinate, `-1` otherwise.
    pub fn at(&self, xi: f64, nd: usize, h: f64, outward: f64) -> ProfilePoint {
        let ndf = nd as f64;
        let l = ndf * h;
        let d0 = self.d0(nd, h);
        let r = xi / ndf;
        let d = d0 * r * r;
        let alpha = self.alpha_max() * (1.0 - r);
        let kappa = 1.0;
        let beta = d / kappa + alpha;
        let b = (-beta * self.dt).exp();
        let a = if d > 0.0 { d * (b - 1.0) / (kappa * (d + kappa * alpha)) } else { 0.0 };
        let c = if beta.abs() > 1e-12 { (1.0 - b) / beta } else { self.dt };
        let dprime = outward * 2.0 * d0 * xi / (ndf * ndf * h);
        let alphaprime = outward * (-self.alpha_max() / l);
        ProfilePoint {
            d,
            alpha,
            kappa,
            b,
            a,
            c,
            dprime,
            betaprime: dprime + alphaprime,
        }
    }
}

/// One axis' coefficients at nodes (`i`) and half-nodes (`i + 1/2`) of a local range.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisProfile {
    pub node: Vec<ProfilePoint>,
    pub half: Vec<ProfilePoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpmlProfile {
    pub axes: [AxisProfile; 3],
    pub widths: DampingWidths,
}

/// Profile for a whole (single-domain) grid.
pub fn build_profile(grid: &Grid3D, widths: DampingWidths, params: CpmlParams) -> Result<CpmlProfile> {
    build_profile_window(grid.n(), grid.d(), widths, [0; 3], grid.n(), params)
}

/// Profile for the subdomain `[offset, offset + local_n)` of a global grid;
/// values depend only on global positions.
pub fn build_profile_window(
    global_n: [usize; 3],
    d: [f64; 3],
    widths: DampingWidths,
    offset: [usize; 3],
    local_n: [usize; 3],
    params: CpmlParams,
) -> Result<CpmlProfile> {
    if !(params.r_target > 0.0 && params.r_target < 1.0) {
        return Err(Error::config(format!("CPML reflection target must lie in (0, 1), got {}", params.r_target)));
    }
    if !(params.vmax > 0.0) || !(params.dt > 0.0) || !(params.fmax > 0.0) {
        return Err(Error::config("CPML needs positive vmax, dt and fmax"));
    }
    let axes = [0, 1, 2].map(|a| {
        let (lo, hi) = (widths.lo[a], widths.hi[a]);
        let n = global_n[a] as f64;
        let edge_lo = lo as f64 - 0.5;
        let edge_hi = n - hi as f64 - 0.5;
        let point = |x: f64| {
            if lo > 0 && x < edge_lo {
                params.at(edge_lo - x, lo, d[a], -1.0)
            } else if hi > 0 && x > edge_hi {
                params.at(x - edge_hi, hi, d[a], 1.0)
            } else {
                ProfilePoint::IDENTITY
            }
        };
        let range = offset[a]..offset[a] + local_n[a];
        AxisProfile {
            node: range.clone().map(|i| point(i as f64)).collect(),
            half: range.map(|i| point(i as f64 + 0.5)).collect(),
        }
    });
    for a in 0..3 {
        if widths.lo[a] + widths.hi[a] >= global_n[a] {
            return Err(Error::config(format!(
                "damping layers too thick along axis {}",
                AXIS_NAMES[a]
            )));
        }
    }
    Ok(CpmlProfile { axes, widths })
}

/// Profile with no damping anywhere (hard-truncated boundaries).
pub fn degenerate_profile(local_n: [usize; 3], widths: DampingWidths) -> CpmlProfile {
    CpmlProfile {
        axes: local_n.map(|n| AxisProfile {
            node: vec![ProfilePoint::IDENTITY; n],
            half: vec![ProfilePoint::IDENTITY; n],
        }),
        widths,
    }
}

/// Per-axis coefficient arrays cast to the working precision.
#[derive(Debug, Clone)]
pub struct AxisCoeffs<T> {
    pub damped: Vec<bool>,
    pub d: Vec<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    pub dprime: Vec<T>,
    pub betaprime: Vec<T>,
}

impl<T: Real> AxisCoeffs<T> {
    pub fn new(points: &[ProfilePoint]) -> Self {
        let f = |g: fn(&ProfilePoint) -> f64| points.iter().map(|p| T::of(g(p))).collect();
        AxisCoeffs {
            damped: points.iter().map(ProfilePoint::damped).collect(),
            d: f(|p| p.d),
            a: f(|p| p.a),
            b: f(|p| p.b),
            c: f(|p| p.c),
            dprime: f(|p| p.dprime),
            betaprime: f(|p| p.betaprime),
        }
    }
}

/// Node and half-node coefficient arrays for all three axes.
#[derive(Debug, Clone)]
pub struct TypedProfile<T> {
    pub node: [AxisCoeffs<T>; 3],
    pub half: [AxisCoeffs<T>; 3],
}

impl<T: Real> TypedProfile<T> {
    pub fn new(p: &CpmlProfile) -> Self {
        TypedProfile {
            node: [0, 1, 2].map(|a| AxisCoeffs::new(&p.axes[a].node)),
            half: [0, 1, 2].map(|a| AxisCoeffs::new(&p.axes[a].half)),
        }
    }
}

/// Memory variables stored only over the damping layers of each axis.
///
/// For axis `a`, storage covers the layer slots along `a` times the full
/// interior extent of the other two axes, with `nvar` variables interleaved
/// fastest. x is always the slowest index, so storage splits by x-plane.
#[derive(Debug, Clone)]
pub struct LayerMemory<T> {
    pub nvar: usize,
    pub n: [usize; 3],
    pub layers: [AxisLayers; 3],
    pub data: [Vec<T>; 3],
}

/// Memory of one x-plane.
pub struct PlaneMemory<'a, T> {
    /// Present when the plane lies in an x-layer: `(j * nz + k) * nvar + v`.
    pub x: Option<&'a mut [T]>,
    /// `(slot_y(j) * nz + k) * nvar + v`.
    pub y: &'a mut [T],
    /// `(j * slots_z + slot_z(k)) * nvar + v`.
    pub z: &'a mut [T],
}

impl<T: Real> PlaneMemory<'_, T> {
    /// First-order stretched derivative `du + psi` along axis `a`, updating
    /// `psi <- b psi + a du` in variable `var` when the position is damped.
    #[inline(always)]
    pub fn stretch(&mut self, a: usize, base: Option<usize>, var: usize, co: &AxisCoeffs<T>, c: usize, du: T) -> T {
        if !co.damped[c] {
            return du;
        }
        let Some(b) = base else {
            return du;
        };
        let store: &mut [T] = match a {
            0 => match self.x.as_deref_mut() {
                Some(s) => s,
                None => return du,
            },
            1 => &mut *self.y,
            _ => &mut *self.z,
        };
        let psi = &mut store[b + var];
        *psi = co.b[c] * *psi + co.a[c] * du;
        du + *psi
    }
}

impl<T: Real> LayerMemory<T> {
    pub fn new(layers: [AxisLayers; 3], nvar: usize) -> Self {
        let n = layers.map(|l| l.n);
        let sizes = [
            layers[0].slots() * n[1] * n[2],
            n[0] * layers[1].slots() * n[2],
            n[0] * n[1] * layers[2].slots(),
        ];
        LayerMemory {
            nvar,
            n,
            layers,
            data: sizes.map(|s| vec![T::zero(); s * nvar]),
        }
    }

    pub fn len(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all_zero(&self) -> bool {
        self.data.iter().all(|d| d.iter().all(|v| *v == T::zero()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|d| d.iter().all(|v| v.is_finite()))
    }

    /// Splits storage into one entry per interior x-plane.
    pub fn planes_mut(&mut self) -> Vec<PlaneMemory<'_, T>> {
        let n = self.n;
        let nv = self.nvar;
        let lx = self.layers[0];
        let [dx, dy, dz] = &mut self.data;
        let xs = (n[1] * n[2] * nv).max(1);
        let ys = (self.layers[1].slots() * n[2] * nv).max(1);
        let zs = (n[1] * self.layers[2].slots() * nv).max(1);
        let mut xchunks: Vec<Option<&mut [T]>> = dx.chunks_mut(xs).map(Some).collect();
        let ychunks = split_exact(dy, ys, n[0]);
        let zchunks = split_exact(dz, zs, n[0]);
        ychunks
            .into_iter()
            .zip(zchunks)
            .enumerate()
            .map(|(i, (y, z))| PlaneMemory {
                x: lx.slot(i).and_then(|s| xchunks.get_mut(s).and_then(Option::take)),
                y,
                z,
            })
            .collect()
    }
}

/// Splits `data` into `count` chunks of `size`, yielding empty slices when `data` is empty.
fn split_exact<T>(data: &mut [T], size: usize, count: usize) -> Vec<&mut [T]> {
    if data.is_empty() {
        return (0..count).map(|_| Default::default()).collect();
    }
    let v: Vec<&mut [T]> = data.chunks_mut(size).collect();
    debug_assert_eq!(v.len(), count);
    v
}

/// Parity of a field under reflection about the surface plane `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Mirrors the z-low ghosts of `f` about the surface plane. Node-centred
/// fields reflect `k <-> -k` (odd parity also zeroes the plane `k = 0`);
/// fields staggered by half a cell in z reflect `k <-> -1 - k`.
pub fn mirror_surface<T: Real>(f: &mut Field<T>, z_half: bool, parity: Parity) {
    let g = f.grid().clone();
    let n = g.n();
    let r = g.radius() as isize;
    let sign = match parity {
        Parity::Odd => -T::one(),
        Parity::Even => T::one(),
    };
    for i in 0..n[0] as isize {
        for j in 0..n[1] as isize {
            if !z_half && parity == Parity::Odd {
                f.set_at(i, j, 0, T::zero());
            }
            for m in 1..=r {
                let src = if z_half { m - 1 } else { m };
                if src >= n[2] as isize {
                    continue;
                }
                let v = f.at(i, j, src);
                f.set_at(i, j, -m, sign * v);
            }
        }
    }
}

/// Pressure free surface: `p = 0` on `k = 0` and odd mirror into the ghosts.
pub fn apply_free_surface<T: Real>(p: &mut Field<T>) {
    mirror_surface(p, false, Parity::Odd);
}

//! Variable-density acoustic propagator on a staggered grid:
//! `v += dt / rho * grad p` at half steps, then `p += dt rho vp^2 (div v + f)`.
//!
//! The source adds `dt vp^2 F` to pressure, where `F` is the time integral
//! of the wavelet sampled at `t = (n + 1/2) dt`. Pressure then matches the
//! second-order formulation driven by the wavelet itself.

use crate::cpml::{mirror_surface, apply_free_surface, AxisCoeffs, LayerMemory, Parity, PlaneMemory, TypedProfile};
use crate::error::{Error, Result};
use crate::exec::{planes_mut, Executor};
use crate::grid::{AxisLayers, Component, Field, Grid3D};
use crate::model::EarthModel;
use crate::real::Real;
use crate::source::Wavelet;
use crate::stencil::FirstDerivative;

use super::{mem_bases, Propagator, PropagatorKind, Setup};

/// Per axis: 0 = gradient at half-nodes (velocity update), 1 = divergence at nodes.
const NVAR: usize = 2;

pub struct AcousticVd<T: Real> {
    grid: Grid3D,
    pub p: Field<T>,
    pub v: [Field<T>; 3],
    buoy: [Field<T>; 3],
    kdt: Field<T>,
    d1: [FirstDerivative<T>; 3],
    prof: TypedProfile<T>,
    mem: LayerMemory<T>,
    layers: [AxisLayers; 3],
    free_surface: bool,
    dt: f64,
    source: Option<(usize, T, Wavelet)>,
}

/// `dt * 2 / (rho(c) + rho(c + e_a))` at the half position along `a`.
pub(crate) fn buoyancy<T: Real>(grid: &Grid3D, rho: &Field<f32>, dt: f64) -> [Field<T>; 3] {
    [0, 1, 2].map(|a| {
        Field::from_fn(grid, Component::Aux, |i, j, k| {
            let mut q = [i as isize, j as isize, k as isize];
            let r0 = EarthModel::sample(rho, q) as f64;
            q[a] += 1;
            let r1 = EarthModel::sample(rho, q) as f64;
            T::of(dt * 2.0 / (r0 + r1))
        })
    })
}

impl<T: Real> AcousticVd<T> {
    pub fn new(model: &EarthModel, setup: Setup) -> Result<Self> {
        setup.check(model)?;
        let rho = model
            .rho
            .as_ref()
            .ok_or_else(|| Error::config("acoustic_iso needs a density (rho) volume"))?;
        let grid = setup.grid.clone();
        let dt = setup.dt;
        let kdt = Field::from_fn(&grid, Component::Aux, |i, j, k| {
            let v = model.vp.get([i, j, k]) as f64;
            T::of(dt * rho.get([i, j, k]) as f64 * v * v)
        });
        let stag = setup.staggered()?;
        let source = setup.source.as_ref().map(|s| {
            let o = grid.offset_u(s.loc);
            let vp = model.vp.get(s.loc) as f64;
            (o, T::of(dt * vp * vp), s.wavelet.clone())
        });
        let zeros = Field::zeros(&grid, Component::P);
        Ok(AcousticVd {
            p: zeros.clone(),
            v: [Component::Vx, Component::Vy, Component::Vz].map(|c| Field::zeros(&grid, c)),
            buoy: buoyancy(&grid, rho, dt),
            kdt,
            d1: [0, 1, 2].map(|a| FirstDerivative::new(&stag[a])),
            prof: TypedProfile::new(&setup.profile),
            mem: LayerMemory::new(setup.layers, NVAR),
            layers: setup.layers,
            free_surface: setup.free_surface,
            dt,
            source,
            grid,
        })
    }
}

struct Kernel<'a, T> {
    n: [usize; 3],
    radius: usize,
    strides: [usize; 3],
    d1: &'a [FirstDerivative<T>; 3],
    prof: &'a TypedProfile<T>,
    layers: [AxisLayers; 3],
}

impl<T: Real> Kernel<'_, T> {
    fn each(&self, i: usize, mut f: impl FnMut(usize, usize, usize, usize)) {
        let [_, ny, nz] = self.n;
        let r = self.radius;
        let [sx, sy, _] = self.strides;
        for j in 0..ny {
            let base = (i + r) * sx + (j + r) * sy + r;
            let obase = (j + r) * sy + r;
            for k in 0..nz {
                f(j, k, base + k, obase + k);
            }
        }
    }

    fn velocity(&self, i: usize, p: &[T], buoy: [&[T]; 3], mut out: [&mut [T]; 3], mut mem: PlaneMemory<'_, T>) {
        let has_x = mem.x.is_some();
        self.each(i, |j, k, o, ol| {
            let bases = mem_bases(&self.layers, has_x, j, k, self.n[2], NVAR);
            let c = [i, j, k];
            for a in 0..3 {
                let dp = self.d1[a].plus(p, o, self.strides[a]);
                let dp = mem.stretch(a, bases[a], 0, &self.prof.half[a], c[a], dp);
                out[a][ol] = out[a][ol] + buoy[a][o] * dp;
            }
        });
    }

    fn pressure(&self, i: usize, v: [&[T]; 3], kdt: &[T], out: &mut [T], mut mem: PlaneMemory<'_, T>) {
        let has_x = mem.x.is_some();
        self.each(i, |j, k, o, ol| {
            let bases = mem_bases(&self.layers, has_x, j, k, self.n[2], NVAR);
            let c = [i, j, k];
            let node: &[AxisCoeffs<T>; 3] = &self.prof.node;
            let dx = self.d1[0].minus(v[0], o, self.strides[0]);
            let dx = mem.stretch(0, bases[0], 1, &node[0], c[0], dx);
            let dy = self.d1[1].minus(v[1], o, self.strides[1]);
            let dy = mem.stretch(1, bases[1], 1, &node[1], c[1], dy);
            let dz = self.d1[2].minus(v[2], o, self.strides[2]);
            let dz = mem.stretch(2, bases[2], 1, &node[2], c[2], dz);
            out[ol] = out[ol] + kdt[o] * (dx + dy + dz);
        });
    }
}

impl<T: Real> Propagator<T> for AcousticVd<T> {
    fn kind(&self) -> PropagatorKind {
        PropagatorKind::AcousticIso
    }

    fn grid(&self) -> &Grid3D {
        &self.grid
    }

    fn step(&mut self, n: usize, exec: &Executor) {
        let kernel = Kernel {
            n: self.grid.n(),
            radius: self.grid.radius(),
            strides: self.grid.strides(),
            d1: &self.d1,
            prof: &self.prof,
            layers: self.layers,
        };
        let g = &self.grid;
        {
            let [vx, vy, vz] = &mut self.v;
            let buoy = [&self.buoy[0].data[..], &self.buoy[1].data[..], &self.buoy[2].data[..]];
            let p = &self.p.data[..];
            let jobs: Vec<_> = planes_mut(g, &mut vx.data)
                .into_iter()
                .zip(planes_mut(g, &mut vy.data))
                .zip(planes_mut(g, &mut vz.data))
                .zip(self.mem.planes_mut())
                .enumerate()
                .collect();
            exec.run(jobs, |(i, (((x, y), z), m))| kernel.velocity(i, p, buoy, [x, y, z], m));
        }
        if self.free_surface {
            mirror_surface(&mut self.v[2], true, Parity::Even);
        }
        {
            let v = [&self.v[0].data[..], &self.v[1].data[..], &self.v[2].data[..]];
            let kdt = &self.kdt.data[..];
            let jobs: Vec<_> = planes_mut(g, &mut self.p.data).into_iter().zip(self.mem.planes_mut()).enumerate().collect();
            exec.run(jobs, |(i, (out, m))| kernel.pressure(i, v, kdt, out, m));
        }
        if let Some((o, scale, w)) = &self.source {
            let amp = T::of(w.integral((n as f64 + 0.5) * self.dt));
            self.p.data[*o] = self.p.data[*o] + *scale * amp;
        }
        if self.free_surface {
            apply_free_surface(&mut self.p);
        }
    }

    fn observe(&self, offset: usize) -> T {
        self.p.data[offset]
    }

    fn observable(&self) -> Field<T> {
        self.p.clone()
    }

    fn is_finite(&self) -> bool {
        self.p.all_finite() && self.v.iter().all(Field::all_finite) && self.mem.all_finite()
    }
}

//! Isotropic elastic propagator on a staggered grid.
//!
//! Velocity update (`b` = buoyancy at the velocity position):
//!
//! ```text
//! vx += dt b (D+x sxx + D-y sxy + D-z sxz)
//! vy += dt b (D-x sxy + D+y syy + D-z syz)
//! vz += dt b (D-x sxz + D-y syz + D+z szz)
//! ```
//!
//! Stress update with `e_aa = D-a v_a`:
//!
//! ```text
//! sxx += dt ((lambda + 2 mu) exx + lambda (eyy + ezz))     (and cyclic)
//! syz += dt mu (D+z vy + D+y vz)
//! sxz += dt mu (D+z vx + D+x vz)
//! sxy += dt mu (D+y vx + D+x vy)
//! ```
//!
//! Shear moduli at edges are harmonic means of the four surrounding cells.
//! The source is explosive: the wavelet integral is added equally to the
//! three normal stresses. The recorded quantity is their mean.

use crate::cpml::{mirror_surface, LayerMemory, Parity, PlaneMemory, TypedProfile};
use crate::error::{Error, Result};
use crate::exec::{planes_mut, Executor};
use crate::grid::{AxisLayers, Component, Field, Grid3D};
use crate::model::{lame_parameters, EarthModel};
use crate::real::Real;
use crate::source::Wavelet;
use crate::stencil::FirstDerivative;

use super::acoustic_vd::buoyancy;
use super::{mem_bases, Propagator, PropagatorKind, Setup};

/// Six memory variables per axis; see the table in `Kernel`.
const NVAR: usize = 6;

pub const STRESS: [Component; 6] = [Component::Sxx, Component::Syy, Component::Szz, Component::Syz, Component::Sxz, Component::Sxy];

pub struct Elastic<T: Real> {
    grid: Grid3D,
    pub v: [Field<T>; 3],
    /// Voigt order: sxx, syy, szz, syz, sxz, sxy.
    pub s: [Field<T>; 6],
    buoy: [Field<T>; 3],
    l2m: Field<T>,
    lam: Field<T>,
    /// dt mu at the syz, sxz and sxy positions.
    mu: [Field<T>; 3],
    d1: [FirstDerivative<T>; 3],
    prof: TypedProfile<T>,
    mem: LayerMemory<T>,
    layers: [AxisLayers; 3],
    free_surface: bool,
    dt: f64,
    source: Option<(usize, T, Wavelet)>,
}

fn harmonic4(v: [f64; 4]) -> f64 {
    if v.iter().any(|x| *x <= 0.0) {
        0.0
    } else {
        4.0 / v.iter().map(|x| 1.0 / x).sum::<f64>()
    }
}

impl<T: Real> Elastic<T> {
    pub fn new(model: &EarthModel, setup: Setup) -> Result<Self> {
        setup.check(model)?;
        let rho = model
            .rho
            .as_ref()
            .ok_or_else(|| Error::config("elastic_iso needs vs and rho volumes"))?;
        let (lambda, mu) = lame_parameters(model).map_err(|_| Error::config("elastic_iso needs vs and rho volumes"))?;
        let grid = setup.grid.clone();
        let dt = setup.dt;
        let cell = |f: &dyn Fn(f64, f64) -> f64| {
            Field::from_fn(&grid, Component::Aux, |i, j, k| {
                let p = [i, j, k];
                T::of(dt * f(lambda.get(p), mu.get(p)))
            })
        };
        let l2m = cell(&|l, m| l + 2.0 * m);
        let lam = cell(&|l, _| l);
        // mu on the model grid has edge-replicated ghosts via the model volumes
        let mu_at = |q: [isize; 3]| {
            let n = model.grid.n();
            let c = [0, 1, 2].map(|a| q[a].clamp(0, n[a] as isize - 1));
            mu.at(c[0], c[1], c[2])
        };
        let edge = |a: usize, b: usize| {
            Field::from_fn(&grid, Component::Aux, |i, j, k| {
                let q = [i as isize, j as isize, k as isize];
                let shift = |da: isize, db: isize| {
                    let mut r = q;
                    r[a] += da;
                    r[b] += db;
                    mu_at(r)
                };
                T::of(dt * harmonic4([shift(0, 0), shift(1, 0), shift(0, 1), shift(1, 1)]))
            })
        };
        let mu_edges = [edge(1, 2), edge(0, 2), edge(0, 1)];
        let stag = setup.staggered()?;
        let source = setup.source.as_ref().map(|s| {
            let o = grid.offset_u(s.loc);
            let vp = model.vp.get(s.loc) as f64;
            (o, T::of(dt * vp * vp), s.wavelet.clone())
        });
        Ok(Elastic {
            v: [Component::Vx, Component::Vy, Component::Vz].map(|c| Field::zeros(&grid, c)),
            s: STRESS.map(|c| Field::zeros(&grid, c)),
            buoy: buoyancy(&grid, rho, dt),
            l2m,
            lam,
            mu: mu_edges,
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

/// Memory variable assignment (same index on every axis `a`):
/// 0: `vx` term, 1: `vy` term, 2: `vz` term, 3: normal strain `e_aa`,
/// 4: first shear term, 5: second shear term.
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

    #[allow(clippy::too_many_arguments)]
    #[inline(always)]
    fn d(&self, mem: &mut PlaneMemory<'_, T>, bases: &[Option<usize>; 3], c: [usize; 3], a: usize, plus: bool, var: usize, f: &[T], o: usize) -> T {
        let s = self.strides[a];
        if plus {
            let du = self.d1[a].plus(f, o, s);
            mem.stretch(a, bases[a], var, &self.prof.half[a], c[a], du)
        } else {
            let du = self.d1[a].minus(f, o, s);
            mem.stretch(a, bases[a], var, &self.prof.node[a], c[a], du)
        }
    }

    fn velocity(&self, i: usize, s: [&[T]; 6], buoy: [&[T]; 3], mut out: [&mut [T]; 3], mut mem: PlaneMemory<'_, T>) {
        let has_x = mem.x.is_some();
        let [sxx, syy, szz, syz, sxz, sxy] = s;
        self.each(i, |j, k, o, ol| {
            let b = mem_bases(&self.layers, has_x, j, k, self.n[2], NVAR);
            let c = [i, j, k];
            let tx = self.d(&mut mem, &b, c, 0, true, 0, sxx, o) + self.d(&mut mem, &b, c, 1, false, 0, sxy, o) + self.d(&mut mem, &b, c, 2, false, 0, sxz, o);
            let ty = self.d(&mut mem, &b, c, 0, false, 1, sxy, o) + self.d(&mut mem, &b, c, 1, true, 1, syy, o) + self.d(&mut mem, &b, c, 2, false, 1, syz, o);
            let tz = self.d(&mut mem, &b, c, 0, false, 2, sxz, o) + self.d(&mut mem, &b, c, 1, false, 2, syz, o) + self.d(&mut mem, &b, c, 2, true, 2, szz, o);
            out[0][ol] = out[0][ol] + buoy[0][o] * tx;
            out[1][ol] = out[1][ol] + buoy[1][o] * ty;
            out[2][ol] = out[2][ol] + buoy[2][o] * tz;
        });
    }

    #[allow(clippy::too_many_arguments)]
    fn stress(&self, i: usize, v: [&[T]; 3], l2m: &[T], lam: &[T], mu: [&[T]; 3], mut out: [&mut [T]; 6], mut mem: PlaneMemory<'_, T>) {
        let has_x = mem.x.is_some();
        let [vx, vy, vz] = v;
        self.each(i, |j, k, o, ol| {
            let b = mem_bases(&self.layers, has_x, j, k, self.n[2], NVAR);
            let c = [i, j, k];
            let exx = self.d(&mut mem, &b, c, 0, false, 3, vx, o);
            let eyy = self.d(&mut mem, &b, c, 1, false, 3, vy, o);
            let ezz = self.d(&mut mem, &b, c, 2, false, 3, vz, o);
            out[0][ol] = out[0][ol] + (l2m[o] * exx + lam[o] * (eyy + ezz));
            out[1][ol] = out[1][ol] + (l2m[o] * eyy + lam[o] * (exx + ezz));
            out[2][ol] = out[2][ol] + (l2m[o] * ezz + lam[o] * (exx + eyy));
            let yz = self.d(&mut mem, &b, c, 2, true, 4, vy, o) + self.d(&mut mem, &b, c, 1, true, 4, vz, o);
            let xz = self.d(&mut mem, &b, c, 2, true, 5, vx, o) + self.d(&mut mem, &b, c, 0, true, 4, vz, o);
            let xy = self.d(&mut mem, &b, c, 1, true, 5, vx, o) + self.d(&mut mem, &b, c, 0, true, 5, vy, o);
            out[3][ol] = out[3][ol] + mu[0][o] * yz;
            out[4][ol] = out[4][ol] + mu[1][o] * xz;
            out[5][ol] = out[5][ol] + mu[2][o] * xy;
        });
    }
}

impl<T: Real> Propagator<T> for Elastic<T> {
    fn kind(&self) -> PropagatorKind {
        PropagatorKind::ElasticIso
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
            let s = [0, 1, 2, 3, 4, 5].map(|c| &self.s[c].data[..]);
            let buoy = [0, 1, 2].map(|a| &self.buoy[a].data[..]);
            let [vx, vy, vz] = &mut self.v;
            let jobs: Vec<_> = planes_mut(g, &mut vx.data)
                .into_iter()
                .zip(planes_mut(g, &mut vy.data))
                .zip(planes_mut(g, &mut vz.data))
                .zip(self.mem.planes_mut())
                .enumerate()
                .collect();
            exec.run(jobs, |(i, (((x, y), z), m))| kernel.velocity(i, s, buoy, [x, y, z], m));
        }
        if self.free_surface {
            mirror_surface(&mut self.v[0], false, Parity::Even);
            mirror_surface(&mut self.v[1], false, Parity::Even);
            mirror_surface(&mut self.v[2], true, Parity::Even);
        }
        {
            let v = [0, 1, 2].map(|a| &self.v[a].data[..]);
            let mu = [0, 1, 2].map(|a| &self.mu[a].data[..]);
            let (l2m, lam) = (&self.l2m.data[..], &self.lam.data[..]);
            let [s0, s1, s2, s3, s4, s5] = &mut self.s;
            let jobs: Vec<_> = planes_mut(g, &mut s0.data)
                .into_iter()
                .zip(planes_mut(g, &mut s1.data))
                .zip(planes_mut(g, &mut s2.data))
                .zip(planes_mut(g, &mut s3.data))
                .zip(planes_mut(g, &mut s4.data))
                .zip(planes_mut(g, &mut s5.data))
                .zip(self.mem.planes_mut())
                .enumerate()
                .collect();
            exec.run(jobs, |(i, ((((((a, b), c), d), e), f), m))| {
                kernel.stress(i, v, l2m, lam, mu, [a, b, c, d, e, f], m)
            });
        }
        if let Some((o, scale, w)) = &self.source {
            let amp = *scale * T::of(w.integral((n as f64 + 0.5) * self.dt));
            for c in 0..3 {
                self.s[c].data[*o] = self.s[c].data[*o] + amp;
            }
        }
        if self.free_surface {
            mirror_surface(&mut self.s[2], false, Parity::Odd);
            mirror_surface(&mut self.s[3], true, Parity::Odd);
            mirror_surface(&mut self.s[4], true, Parity::Odd);
        }
    }

    fn observe(&self, o: usize) -> T {
        (self.s[0].data[o] + self.s[1].data[o] + self.s[2].data[o]) / T::of(3.0)
    }

    fn observable(&self) -> Field<T> {
        let mut f = self.s[0].clone().with_component(Component::P);
        for o in 0..f.data.len() {
            f.data[o] = self.observe(o);
        }
        f
    }

    fn is_finite(&self) -> bool {
        self.v.iter().chain(self.s.iter()).all(Field::all_finite) && self.mem.all_finite()
    }
}

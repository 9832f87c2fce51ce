//! Constant-density acoustic propagator:
//! `p[n+1] = 2 p[n] - p[n-1] + dt^2 vp^2 (lap p[n] + f[n])`.
//!
//! In the damping layers each damped axis' second derivative is replaced by
//! its stretched-coordinate counterpart `(1/s) d/dx ((1/s) dp/dx)` with
//! `1/s = 1 - d / (d + alpha + iw)`. The frequency-domain division becomes
//! recursive convolution with `exp(-(d + alpha) t)`, giving four pointwise
//! memory variables per damped axis:
//!
//! ```text
//! m1 = conv(p_aa)      m2 = conv(p_a)      m3 = conv(m2)
//! g  = p_aa - d m1 - d' m2 + d beta' m3
//! m4 = conv(g)         stretched p_aa = g - d m4
//! ```
//!
//! where `conv(u) <- b conv(u) + c u`. Everything is local to the point, so
//! no memory variable ever needs a halo.

use crate::cpml::{apply_free_surface, AxisCoeffs, LayerMemory, PlaneMemory, TypedProfile};
use crate::error::Result;
use crate::exec::{planes_mut, Executor};
use crate::grid::{AxisLayers, Component, Field, Grid3D};
use crate::model::EarthModel;
use crate::real::{Arith, Real};
use crate::stencil::{centered_first_derivative_coeffs, FirstDerivative, Laplacian};

use super::{Propagator, PropagatorKind, Setup};

const NVAR: usize = 4;

pub struct AcousticCd<T: Real> {
    grid: Grid3D,
    pub p_prev: Field<T>,
    pub p_cur: Field<T>,
    p_next: Field<T>,
    coef: Field<T>,
    lap: Laplacian<T>,
    centers: [T; 3],
    centered: [FirstDerivative<T>; 3],
    prof: [AxisCoeffs<T>; 3],
    mem: LayerMemory<T>,
    layers: [AxisLayers; 3],
    free_surface: bool,
    source: Option<(usize, T, Vec<f64>)>,
}

impl<T: Real> AcousticCd<T> {
    pub fn new(model: &EarthModel, setup: Setup) -> Result<Self> {
        setup.check(model)?;
        let grid = setup.grid.clone();
        let dt2 = setup.dt * setup.dt;
        let coef = Field::from_fn(&grid, Component::Aux, |i, j, k| {
            let v = model.vp.get([i, j, k]) as f64;
            T::of(dt2 * v * v)
        });
        let second = setup.second_derivative()?;
        let d = grid.d();
        let centered = [0, 1, 2].map(|a| {
            FirstDerivative::new(&centered_first_derivative_coeffs(setup.radius[a], d[a]).expect("radius checked above"))
        });
        let typed = TypedProfile::<T>::new(&setup.profile);
        let source = setup.source.as_ref().map(|s| {
            let o = grid.offset_u(s.loc);
            (o, coef.data[o], s.wavelet.samples.clone())
        });
        let zeros = Field::zeros(&grid, Component::P);
        Ok(AcousticCd {
            lap: Laplacian::new(&second, grid.strides()),
            centers: [0, 1, 2].map(|a| T::of(second[a].center())),
            centered,
            prof: typed.node,
            mem: LayerMemory::new(setup.layers, NVAR),
            layers: setup.layers,
            free_surface: setup.free_surface,
            source,
            p_prev: zeros.clone(),
            p_cur: zeros.clone(),
            p_next: zeros,
            coef,
            grid,
        })
    }

    /// Current wavefield `p[n]`, whose ghosts are read by the next step.
    pub fn wavefield_mut(&mut self) -> &mut Field<T> {
        &mut self.p_cur
    }

    /// Swaps `p[n-1]` and `p[n]`, reversing the direction of time.
    pub fn reverse_time(&mut self) {
        std::mem::swap(&mut self.p_prev, &mut self.p_cur);
    }

    pub fn memory(&self) -> &LayerMemory<T> {
        &self.mem
    }
}

/// Undamped update at flat offset `o`. The cost model evaluates this on
/// symbolic scalars; the const-radius row kernel performs the same operations
/// in the same order.
#[inline(always)]
pub fn interior_update<T: Arith>(lap: &Laplacian<T>, two: T, p: &[T], prev: T, coef: T, o: usize) -> T {
    (two * p[o] - prev) + coef * lap.at(p, o)
}

struct Kernel<'a, T> {
    n: [usize; 3],
    radius: usize,
    strides: [usize; 3],
    pc: &'a [T],
    pp: &'a [T],
    coef: &'a [T],
    lap: &'a Laplacian<T>,
    centers: [T; 3],
    centered: &'a [FirstDerivative<T>; 3],
    prof: &'a [AxisCoeffs<T>; 3],
    layers: [AxisLayers; 3],
}

impl<T: Real> Kernel<'_, T> {
    /// Updates one x-plane: the plain scheme over every z-row, then the
    /// stretched-coordinate correction for each damped axis.
    fn plane(&self, i: usize, out: &mut [T], mem: PlaneMemory<'_, T>) {
        let r = self.lap.radius;
        if r[0] == r[1] && r[1] == r[2] {
            match r[0] {
                1 => return self.plane_r::<1>(i, out, mem),
                2 => return self.plane_r::<2>(i, out, mem),
                3 => return self.plane_r::<3>(i, out, mem),
                4 => return self.plane_r::<4>(i, out, mem),
                5 => return self.plane_r::<5>(i, out, mem),
                6 => return self.plane_r::<6>(i, out, mem),
                7 => return self.plane_r::<7>(i, out, mem),
                8 => return self.plane_r::<8>(i, out, mem),
                _ => {}
            }
        }
        self.plane_r::<0>(i, out, mem)
    }

    /// `R = 0` reads the radii at run time.
    #[inline(always)]
    fn plane_r<const R: usize>(&self, i: usize, out: &mut [T], mem: PlaneMemory<'_, T>) {
        let [_, ny, nz] = self.n;
        let g = self.radius;
        let [sx, sy, _] = self.strides;
        let PlaneMemory { x: mut mx, y: my, z: mz } = mem;
        let zl = self.layers[2];
        let zslots = zl.slots();
        for j in 0..ny {
            let base = (i + g) * sx + (j + g) * sy + g;
            let obase = (j + g) * sy + g;
            let row = &mut out[obase..obase + nz];
            self.row::<R>(base, row);
            if self.prof[0].damped[i] {
                if let Some(mx) = mx.as_deref_mut() {
                    let m = &mut mx[j * nz * NVAR..(j + 1) * nz * NVAR];
                    self.correct::<R>(0, i, base, 0..nz, row, m);
                }
            }
            if self.prof[1].damped[j] {
                if let Some(s) = self.layers[1].slot(j) {
                    let m = &mut my[s * nz * NVAR..(s + 1) * nz * NVAR];
                    self.correct::<R>(1, j, base, 0..nz, row, m);
                }
            }
            if zslots > 0 {
                let m = &mut mz[j * zslots * NVAR..(j + 1) * zslots * NVAR];
                let (lo, hi) = (zl.lo_end, zl.hi_start);
                let (mlo, mhi) = m.split_at_mut(lo * NVAR);
                self.correct::<R>(2, usize::MAX, base, 0..lo, row, mlo);
                self.correct::<R>(2, usize::MAX, base, hi..nz, row, mhi);
            }
        }
    }

    /// Plain update of the z-row starting at flat offset `o`. Same
    /// arithmetic order as `Laplacian::at`.
    #[inline(always)]
    fn row<const R: usize>(&self, o: usize, out: &mut [T]) {
        let len = out.len();
        let (pc, lap, two) = (self.pc, self.lap, T::of(2.0));
        if R == 0 {
            for (k, v) in out.iter_mut().enumerate() {
                *v = interior_update(lap, two, pc, self.pp[o + k], self.coef[o + k], o + k);
            }
            return;
        }
        let shifted = |a: usize, m: usize, up: bool| {
            let s = lap.stride[a] * m;
            let start = if up { o + s } else { o - s };
            &pc[start..start + len]
        };
        let plus: [[&[T]; R]; 3] = [0, 1, 2].map(|a| std::array::from_fn(|m| shifted(a, m + 1, true)));
        let minus: [[&[T]; R]; 3] = [0, 1, 2].map(|a| std::array::from_fn(|m| shifted(a, m + 1, false)));
        let c0 = &pc[o..o + len];
        let prev = &self.pp[o..o + len];
        let coef = &self.coef[o..o + len];
        for k in 0..len {
            let mut acc = lap.ctot * c0[k];
            for a in 0..3 {
                for m in 0..R {
                    acc = acc + lap.c[a][m] * (plus[a][m][k] + minus[a][m][k]);
                }
            }
            out[k] = (two * c0[k] - prev[k]) + coef[k] * acc;
        }
    }

    /// Adds `coef * (stretched p_aa - p_aa)` along axis `a` for the z-range
    /// `ks` of a row. `c` is the row's coordinate along `a` (ignored for z);
    /// `m` holds `NVAR` values per point of `ks`.
    #[inline(always)]
    fn correct<const R: usize>(&self, a: usize, c: usize, base: usize, ks: std::ops::Range<usize>, row: &mut [T], m: &mut [T]) {
        let co = &self.prof[a];
        let s = self.strides[a];
        let r = if R == 0 { self.lap.radius[a] } else { R };
        let (cl, w) = (&self.lap.c[a], &self.centered[a].w);
        let pc = self.pc;
        for (slot, k) in ks.enumerate() {
            let c = if a == 2 { k } else { c };
            if !co.damped[c] {
                continue;
            }
            let o = base + k;
            let mut paa = self.centers[a] * pc[o];
            for q in 1..=r {
                paa = paa + cl[q - 1] * (pc[o + q * s] + pc[o - q * s]);
            }
            let mut pa = w[0] * (pc[o + s] - pc[o - s]);
            for q in 2..=r {
                pa = pa + w[q - 1] * (pc[o + q * s] - pc[o - q * s]);
            }
            let mv = &mut m[slot * NVAR..slot * NVAR + NVAR];
            let (b, cc, d) = (co.b[c], co.c[c], co.d[c]);
            mv[0] = b * mv[0] + cc * paa;
            mv[1] = b * mv[1] + cc * pa;
            mv[2] = b * mv[2] + cc * mv[1];
            let g = paa - d * mv[0] - co.dprime[c] * mv[1] + d * co.betaprime[c] * mv[2];
            mv[3] = b * mv[3] + cc * g;
            let stretched = g - d * mv[3];
            row[k] = row[k] + self.coef[o] * (stretched - paa);
        }
    }
}

impl<T: Real> Propagator<T> for AcousticCd<T> {
    fn kind(&self) -> PropagatorKind {
        PropagatorKind::AcousticIsoCd
    }

    fn grid(&self) -> &Grid3D {
        &self.grid
    }

    fn step(&mut self, n: usize, exec: &Executor) {
        let kernel = Kernel {
            n: self.grid.n(),
            radius: self.grid.radius(),
            strides: self.grid.strides(),
            pc: &self.p_cur.data,
            pp: &self.p_prev.data,
            coef: &self.coef.data,
            lap: &self.lap,
            centers: self.centers,
            centered: &self.centered,
            prof: &self.prof,
            layers: self.layers,
        };
        let jobs: Vec<_> = planes_mut(&self.grid, &mut self.p_next.data)
            .into_iter()
            .zip(self.mem.planes_mut())
            .enumerate()
            .collect();
        exec.run(jobs, |(i, (out, mem))| kernel.plane(i, out, mem));
        if let Some((o, scale, w)) = &self.source {
            let amp = T::of(w.get(n).copied().unwrap_or(0.0));
            self.p_next.data[*o] = self.p_next.data[*o] + *scale * amp;
        }
        if self.free_surface {
            apply_free_surface(&mut self.p_next);
        }
        std::mem::swap(&mut self.p_prev, &mut self.p_cur);
        std::mem::swap(&mut self.p_cur, &mut self.p_next);
    }

    fn observe(&self, offset: usize) -> T {
        self.p_cur.data[offset]
    }

    fn observable(&self) -> Field<T> {
        self.p_cur.clone()
    }

    fn is_finite(&self) -> bool {
        self.p_cur.all_finite() && self.mem.all_finite()
    }
}

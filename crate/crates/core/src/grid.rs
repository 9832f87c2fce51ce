//! Index space, field storage and region partitioning.
//!
//! Interior points are addressed with 0-based `(i, j, k)` along `(x, y, z)`.
//! Every array carries a ghost shell of `radius` points on each side, so the
//! allocated extent per axis is `n + 2 * radius`. Storage is row-major with
//! **z fastest**: `offset = ((i + r) * ey + (j + r)) * ez + (k + r)`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::real::Real;

/// Position of samples along one axis of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stagger {
    /// Sample sits on the grid node (offset 0).
    #[default]
    Node,
    /// Sample sits half a cell towards +axis (offset 1/2).
    Half,
}

impl Stagger {
    pub fn offset(self) -> f64 {
        match self {
            Stagger::Node => 0.0,
            Stagger::Half => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid3D {
    n: [usize; 3],
    d: [f64; 3],
    radius: usize,
    stagger: [Stagger; 3],
}

/// Builds a grid with ghost shells of width `radius`.
pub fn make_grid(n: [usize; 3], d: [f64; 3], radius: usize, stagger: [Stagger; 3]) -> Result<Grid3D> {
    for a in 0..3 {
        if n[a] == 0 {
            return Err(Error::config(format!("grid size along axis {} must be >= 1", AXIS_NAMES[a])));
        }
        if !(d[a] > 0.0) || !d[a].is_finite() {
            return Err(Error::config(format!(
                "grid spacing along axis {} must be positive, got {}",
                AXIS_NAMES[a], d[a]
            )));
        }
    }
    if radius == 0 {
        return Err(Error::config("halo radius must be >= 1"));
    }
    Ok(Grid3D { n, d, radius, stagger })
}

pub const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

impl Grid3D {
    pub fn new(n: [usize; 3], d: [f64; 3], radius: usize) -> Result<Self> {
        make_grid(n, d, radius, [Stagger::Node; 3])
    }

    pub fn with_stagger(mut self, stagger: [Stagger; 3]) -> Self {
        self.stagger = stagger;
        self
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn d(&self) -> [f64; 3] {
        self.d
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn stagger(&self) -> [Stagger; 3] {
        self.stagger
    }

    pub fn extent(&self) -> [usize; 3] {
        let r = 2 * self.radius;
        [self.n[0] + r, self.n[1] + r, self.n[2] + r]
    }

    /// Number of allocated samples including ghosts.
    pub fn len(&self) -> usize {
        self.extent().iter().product()
    }

    /// Never true: every axis holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interior_len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn strides(&self) -> [usize; 3] {
        let e = self.extent();
        [e[1] * e[2], e[2], 1]
    }

    /// Flat offset of an interior-relative index; ghost indices
    /// (`-radius..0` and `n..n + radius`) are allowed.
    #[inline]
    pub fn offset(&self, i: isize, j: isize, k: isize) -> usize {
        let r = self.radius as isize;
        let e = self.extent();
        debug_assert!(i >= -r && j >= -r && k >= -r);
        debug_assert!((i + r) < e[0] as isize && (j + r) < e[1] as isize && (k + r) < e[2] as isize);
        (((i + r) as usize * e[1]) + (j + r) as usize) * e[2] + (k + r) as usize
    }

    #[inline]
    pub fn offset_u(&self, p: [usize; 3]) -> usize {
        self.offset(p[0] as isize, p[1] as isize, p[2] as isize)
    }

    /// Inverse of [`Grid3D::offset`].
    pub fn index_of(&self, offset: usize) -> [isize; 3] {
        let e = self.extent();
        let r = self.radius as isize;
        let k = (offset % e[2]) as isize - r;
        let j = ((offset / e[2]) % e[1]) as isize - r;
        let i = (offset / (e[1] * e[2])) as isize - r;
        [i, j, k]
    }

    pub fn interior_box(&self) -> IndexBox {
        IndexBox::new([0; 3], self.n)
    }

    pub fn contains(&self, p: [usize; 3]) -> bool {
        (0..3).all(|a| p[a] < self.n[a])
    }

    /// Physical coordinate in meters of a sample along `axis`, honouring the stagger.
    pub fn coord(&self, axis: usize, index: isize) -> f64 {
        (index as f64 + self.stagger[axis].offset()) * self.d[axis]
    }
}

/// Half-open box of interior indices `[lo, hi)` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IndexBox {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl IndexBox {
    pub fn new(lo: [usize; 3], hi: [usize; 3]) -> Self {
        let hi = [hi[0].max(lo[0]), hi[1].max(lo[1]), hi[2].max(lo[2])];
        IndexBox { lo, hi }
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1], self.hi[2] - self.lo[2]]
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: [usize; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.lo[a] && p[a] < self.hi[a])
    }

    pub fn range(&self, axis: usize) -> Range<usize> {
        self.lo[axis]..self.hi[axis]
    }

    pub fn within(&self, other: &IndexBox) -> bool {
        self.is_empty() || (0..3).all(|a| self.lo[a] >= other.lo[a] && self.hi[a] <= other.hi[a])
    }

    /// Iterates indices in memory order (z fastest).
    pub fn iter(self) -> impl Iterator<Item = [usize; 3]> {
        let b = self;
        b.range(0).flat_map(move |i| b.range(1).flat_map(move |j| b.range(2).map(move |k| [i, j, k])))
    }
}

/// Tag naming the physical quantity held by a [`Field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    P,
    Vx,
    Vy,
    Vz,
    Sxx,
    Syy,
    Szz,
    Syz,
    Sxz,
    Sxy,
    Vp,
    Vs,
    Rho,
    /// Derived coefficient volumes and scratch arrays.
    Aux,
}

impl Component {
    pub fn name(self) -> &'static str {
        match self {
            Component::P => "p",
            Component::Vx => "vx",
            Component::Vy => "vy",
            Component::Vz => "vz",
            Component::Sxx => "sxx",
            Component::Syy => "syy",
            Component::Szz => "szz",
            Component::Syz => "syz",
            Component::Sxz => "sxz",
            Component::Sxy => "sxy",
            Component::Vp => "vp",
            Component::Vs => "vs",
            Component::Rho => "rho",
            Component::Aux => "aux",
        }
    }
}

/// One scalar component stored densely over the allocated extent.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid3D,
    component: Component,
    pub data: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: &Grid3D, component: Component) -> Self {
        Self::filled(grid, component, T::zero())
    }

    /// Every sample, ghosts included, set to `value`.
    pub fn filled(grid: &Grid3D, component: Component, value: T) -> Self {
        Field {
            grid: grid.clone(),
            component,
            data: vec![value; grid.len()],
        }
    }

    /// Interior filled from `f(i, j, k)`, ghosts zero.
    pub fn from_fn(grid: &Grid3D, component: Component, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut field = Self::zeros(grid, component);
        for [i, j, k] in grid.interior_box().iter() {
            let o = grid.offset_u([i, j, k]);
            field.data[o] = f(i, j, k);
        }
        field
    }

    pub fn grid(&self) -> &Grid3D {
        &self.grid
    }

    pub fn component(&self) -> Component {
        self.component
    }

    #[inline]
    pub fn get(&self, p: [usize; 3]) -> T {
        self.data[self.grid.offset_u(p)]
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize, k: isize) -> T {
        self.data[self.grid.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, p: [usize; 3], v: T) {
        let o = self.grid.offset_u(p);
        self.data[o] = v;
    }

    pub fn set_at(&mut self, i: isize, j: isize, k: isize, v: T) {
        let o = self.grid.offset(i, j, k);
        self.data[o] = v;
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn interior_values(&self) -> impl Iterator<Item = T> + '_ {
        self.grid.interior_box().iter().map(move |p| self.get(p))
    }

    pub fn max_abs(&self) -> T {
        self.interior_values().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min_max(&self) -> (T, T) {
        self.interior_values()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Sets every ghost sample to zero.
    pub fn zero_ghosts(&mut self) {
        self.map_ghosts(|_, _| None);
    }

    /// Fills ghosts by replicating the nearest interior sample.
    pub fn fill_ghosts_edge(&mut self) {
        let n = self.grid.n;
        self.map_ghosts(|_, p| Some([clampi(p[0], n[0]), clampi(p[1], n[1]), clampi(p[2], n[2])]));
    }

    /// Fills ghosts by wrapping around the interior (periodic domain).
    pub fn fill_ghosts_periodic(&mut self) {
        let n = self.grid.n;
        self.map_ghosts(|_, p| Some([wrapi(p[0], n[0]), wrapi(p[1], n[1]), wrapi(p[2], n[2])]));
    }

    fn map_ghosts(&mut self, src: impl Fn(&Grid3D, [isize; 3]) -> Option<[usize; 3]>) {
        let g = self.grid.clone();
        let r = g.radius as isize;
        let n = g.n.map(|v| v as isize);
        for i in -r..n[0] + r {
            for j in -r..n[1] + r {
                let row_interior = i >= 0 && i < n[0] && j >= 0 && j < n[1];
                for k in -r..n[2] + r {
                    if row_interior && k >= 0 && k < n[2] {
                        continue;
                    }
                    let v = match src(&g, [i, j, k]) {
                        Some(q) => self.data[g.offset_u(q)],
                        None => T::zero(),
                    };
                    self.data[g.offset(i, j, k)] = v;
                }
            }
        }
    }

    pub fn cast<U: Real>(&self) -> Field<U> {
        Field {
            grid: self.grid.clone(),
            component: self.component,
            data: self.data.iter().map(|v| U::of(v.f64())).collect(),
        }
    }

    pub fn with_component(mut self, component: Component) -> Self {
        self.component = component;
        self
    }
}

fn clampi(v: isize, n: usize) -> usize {
    v.clamp(0, n as isize - 1) as usize
}

fn wrapi(v: isize, n: usize) -> usize {
    v.rem_euclid(n as isize) as usize
}

/// Damping-layer thickness per axis and side (`lo` = index 0 side).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DampingWidths {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl DampingWidths {
    pub fn uniform(nd: [usize; 3]) -> Self {
        DampingWidths { lo: nd, hi: nd }
    }

    /// Removes the damping layer on the z-low side, which is the surface.
    pub fn with_free_surface(mut self) -> Self {
        self.lo[2] = 0;
        self
    }
}

/// Membership of one axis' indices in the damping layers.
///
/// Layer indices are `[0, lo_end)` and `[hi_start, n)`; the rest is inner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisLayers {
    pub n: usize,
    pub lo_end: usize,
    pub hi_start: usize,
}

impl AxisLayers {
    pub fn none(n: usize) -> Self {
        AxisLayers { n, lo_end: 0, hi_start: n }
    }

    /// Layers of a subdomain `[offset, offset + n)` of a global axis of
    /// length `n_global` with layer widths `lo` and `hi`.
    pub fn for_subdomain(n_global: usize, lo: usize, hi: usize, offset: usize, n: usize) -> Self {
        let lo_end = lo.saturating_sub(offset).min(n);
        let hi_global = n_global - hi;
        let hi_start = hi_global.saturating_sub(offset).min(n).max(lo_end);
        AxisLayers { n, lo_end, hi_start }
    }

    pub fn inner(&self) -> Range<usize> {
        self.lo_end..self.hi_start
    }

    /// Number of layer samples along this axis.
    pub fn slots(&self) -> usize {
        self.lo_end + (self.n - self.hi_start)
    }

    /// Position of index `c` in the packed layer storage, if it is a layer index.
    #[inline]
    pub fn slot(&self, c: usize) -> Option<usize> {
        if c < self.lo_end {
            Some(c)
        } else if c >= self.hi_start {
            Some(self.lo_end + c - self.hi_start)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

/// One of the six damping slabs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slab {
    pub axis: usize,
    pub side: Side,
    pub bounds: IndexBox,
}

/// Disjoint cover of the interior by an inner box and six damping slabs,
/// in the traversal order of the wavefield solution step: x slabs span the
/// full y/z range, y slabs the inner x range and full z, z slabs the inner
/// x and y ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPartition {
    pub inner: IndexBox,
    pub slabs: [Slab; 6],
    pub layers: [AxisLayers; 3],
}

/// Partitions `grid` with `ndamping` layers on both sides of every axis.
pub fn partition_regions(grid: &Grid3D, ndamping: [usize; 3]) -> Result<RegionPartition> {
    RegionPartition::new(grid, DampingWidths::uniform(ndamping))
}

impl RegionPartition {
    pub fn new(grid: &Grid3D, widths: DampingWidths) -> Result<Self> {
        let n = grid.n();
        for a in 0..3 {
            if widths.lo[a] + widths.hi[a] >= n[a] {
                return Err(Error::config(format!(
                    "damping layers too thick along axis {}: {} + {} leaves no inner points of {}",
                    AXIS_NAMES[a], widths.lo[a], widths.hi[a], n[a]
                )));
            }
        }
        let layers = [0, 1, 2].map(|a| AxisLayers {
            n: n[a],
            lo_end: widths.lo[a],
            hi_start: n[a] - widths.hi[a],
        });
        Ok(Self::from_layers(layers))
    }

    pub fn from_layers(layers: [AxisLayers; 3]) -> Self {
        let n = layers.map(|l| l.n);
        let lo = layers.map(|l| l.lo_end);
        let hi = layers.map(|l| l.hi_start);
        let slab = |axis, side, b: IndexBox| Slab { axis, side, bounds: b };
        let slabs = [
            slab(0, Side::Low, IndexBox::new([0, 0, 0], [lo[0], n[1], n[2]])),
            slab(0, Side::High, IndexBox::new([hi[0], 0, 0], [n[0], n[1], n[2]])),
            slab(1, Side::Low, IndexBox::new([lo[0], 0, 0], [hi[0], lo[1], n[2]])),
            slab(1, Side::High, IndexBox::new([lo[0], hi[1], 0], [hi[0], n[1], n[2]])),
            slab(2, Side::Low, IndexBox::new([lo[0], lo[1], 0], [hi[0], hi[1], lo[2]])),
            slab(2, Side::High, IndexBox::new([lo[0], lo[1], hi[2]], [hi[0], hi[1], n[2]])),
        ];
        RegionPartition {
            inner: IndexBox::new(lo, hi),
            slabs,
            layers,
        }
    }

    /// True if `p` lies in any damping layer.
    pub fn is_damped(&self, p: [usize; 3]) -> bool {
        (0..3).any(|a| self.layers[a].slot(p[a]).is_some())
    }
}

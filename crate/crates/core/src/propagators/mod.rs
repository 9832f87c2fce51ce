//! Wave-equation kernels.
//!
//! * `acoustic_iso_cd`: second-order constant-density acoustic equation on a
//!   collocated grid, leapfrog in time.
//! * `acoustic_iso`: first-order variable-density acoustic system on a
//!   staggered grid.
//! * `elastic_iso`: first-order isotropic elastic system on a staggered grid.
//!
//! The staggered layout puts pressure and normal stresses at cell centers,
//! `vx` at `(i + 1/2, j, k)`, `vy` at `(i, j + 1/2, k)`, `vz` at
//! `(i, j, k + 1/2)`, `sxy` at `(i + 1/2, j + 1/2, k)`, `sxz` at
//! `(i + 1/2, j, k + 1/2)` and `syz` at `(i, j + 1/2, k + 1/2)`. Velocities
//! live at half time steps.

pub mod acoustic_cd;
pub mod acoustic_vd;
pub mod elastic;

use std::fmt;

pub use acoustic_cd::AcousticCd;
pub use acoustic_vd::AcousticVd;
pub use elastic::Elastic;

use crate::cpml::CpmlProfile;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::grid::{AxisLayers, Field, Grid3D};
use crate::model::EarthModel;
use crate::real::Real;
use crate::source::Wavelet;
use crate::stencil::{second_derivative_coeffs, staggered_first_derivative_coeffs, StencilCoeffs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropagatorKind {
    AcousticIsoCd,
    AcousticIso,
    ElasticIso,
}

impl PropagatorKind {
    pub const ALL: [PropagatorKind; 3] = [PropagatorKind::AcousticIsoCd, PropagatorKind::AcousticIso, PropagatorKind::ElasticIso];

    pub fn name(self) -> &'static str {
        match self {
            PropagatorKind::AcousticIsoCd => "acoustic_iso_cd",
            PropagatorKind::AcousticIso => "acoustic_iso",
            PropagatorKind::ElasticIso => "elastic_iso",
        }
    }

    /// True for the first-order systems on staggered grids.
    pub fn staggered(self) -> bool {
        !matches!(self, PropagatorKind::AcousticIsoCd)
    }
}

impl fmt::Display for PropagatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PropagatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PropagatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = PropagatorKind::ALL.iter().map(|k| k.name()).collect();
                Error::config(format!("unknown propagator {s:?}; valid propagators: {}", names.join(", ")))
            })
    }
}

/// Point source owned by this (sub)domain.
#[derive(Debug, Clone)]
pub struct PointSource {
    pub loc: [usize; 3],
    pub wavelet: Wavelet,
}

/// Everything a propagator needs besides the model.
#[derive(Debug, Clone)]
pub struct Setup {
    /// Wavefield grid; its ghost width must cover the largest stencil radius.
    pub grid: Grid3D,
    pub radius: [usize; 3],
    pub dt: f64,
    pub profile: CpmlProfile,
    pub layers: [AxisLayers; 3],
    /// The plane `k = 0` of this grid is a free surface.
    pub free_surface: bool,
    pub source: Option<PointSource>,
}

impl Setup {
    pub fn second_derivative(&self) -> Result<[StencilCoeffs; 3]> {
        let d = self.grid.d();
        Ok([second_derivative_coeffs(self.radius[0], d[0])?, second_derivative_coeffs(self.radius[1], d[1])?, second_derivative_coeffs(self.radius[2], d[2])?])
    }

    pub fn staggered(&self) -> Result<[StencilCoeffs; 3]> {
        let d = self.grid.d();
        Ok([
            staggered_first_derivative_coeffs(self.radius[0], d[0])?,
            staggered_first_derivative_coeffs(self.radius[1], d[1])?,
            staggered_first_derivative_coeffs(self.radius[2], d[2])?,
        ])
    }

    fn check(&self, model: &EarthModel) -> Result<()> {
        if model.grid.n() != self.grid.n() {
            return Err(Error::config(format!(
                "model size {:?} does not match grid {:?}",
                model.grid.n(),
                self.grid.n()
            )));
        }
        let rmax = self.radius.iter().copied().max().unwrap_or(0);
        if rmax > self.grid.radius() {
            return Err(Error::config(format!(
                "stencil radius {rmax} exceeds ghost width {}",
                self.grid.radius()
            )));
        }
        if let Some(s) = &self.source {
            if !self.grid.contains(s.loc) {
                return Err(Error::config(format!("source {:?} outside grid {:?}", s.loc, self.grid.n())));
            }
        }
        Ok(())
    }
}

/// A time-stepping kernel. Step `n` (0-based) advances the observable from
/// time `n dt` to `(n + 1) dt`.
pub trait Propagator<T: Real>: Send {
    fn kind(&self) -> PropagatorKind;

    fn grid(&self) -> &Grid3D;

    fn step(&mut self, n: usize, exec: &Executor);

    /// Recorded quantity at a flat offset (pressure or mean normal stress).
    fn observe(&self, offset: usize) -> T;

    /// Recorded quantity over the whole grid.
    fn observable(&self) -> Field<T>;

    /// True when every wavefield and memory variable is finite.
    fn is_finite(&self) -> bool;
}

/// Builds the propagator `kind` for `model`.
pub fn build<T: Real>(kind: PropagatorKind, model: &EarthModel, setup: Setup) -> Result<Box<dyn Propagator<T>>> {
    setup.check(model)?;
    Ok(match kind {
        PropagatorKind::AcousticIsoCd => Box::new(AcousticCd::<T>::new(model, setup)?),
        PropagatorKind::AcousticIso => Box::new(AcousticVd::<T>::new(model, setup)?),
        PropagatorKind::ElasticIso => Box::new(Elastic::<T>::new(model, setup)?),
    })
}

/// Memory index base inside a plane's layer storage.
#[inline(always)]
pub(crate) fn mem_bases(layers: &[AxisLayers; 3], has_x: bool, j: usize, k: usize, nz: usize, nv: usize) -> [Option<usize>; 3] {
    [
        has_x.then(|| (j * nz + k) * nv),
        layers[1].slot(j).map(|s| (s * nz + k) * nv),
        layers[2].slot(k).map(|s| (j * layers[2].slots() + s) * nv),
    ]
}

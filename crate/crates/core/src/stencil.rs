//! Finite-difference coefficients and derivative application.
//!
//! Coefficients come from an exact rational solve of the Taylor conditions,
//! then are rounded once to `f64` and divided by the spacing.
//!
//! Per-point arithmetic is fixed so that every kernel in the crate (and any
//! independent reference) produces bitwise-identical results:
//!
//! ```text
//! lap = ctot * p[0]
//! for axis in x, y, z: for m in 1..=R: lap = lap + c[m] * (p[+m] + p[-m])
//! ```
//!
//! where `ctot` is the sum of the three per-axis center weights computed in
//! `f64` and rounded to the working precision.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::grid::{Field, IndexBox};
use crate::real::{Arith, Real};

pub const MAX_RADIUS: usize = 8;
pub const DEFAULT_RADIUS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilKind {
    /// Symmetric second derivative on collocated nodes.
    SecondDerivative,
    /// First derivative from samples at `±(m - 1/2) h`.
    StaggeredFirst,
    /// Antisymmetric first derivative from samples at `±m h`.
    CenteredFirst,
}

/// Weights `c_m`, `m = 1..=radius`, already scaled by the spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilCoeffs {
    pub kind: StencilKind,
    pub radius: usize,
    pub spacing: f64,
    pub c: Vec<f64>,
}

impl StencilCoeffs {
    /// User-supplied weights (e.g. dispersion-optimized sets), given for unit spacing.
    pub fn from_unit_weights(kind: StencilKind, unit: &[f64], h: f64) -> Result<Self> {
        check(unit.len(), h)?;
        let scale = match kind {
            StencilKind::SecondDerivative => h * h,
            _ => h,
        };
        Ok(StencilCoeffs {
            kind,
            radius: unit.len(),
            spacing: h,
            c: unit.iter().map(|w| w / scale).collect(),
        })
    }

    /// Center weight; nonzero only for the second derivative.
    pub fn center(&self) -> f64 {
        match self.kind {
            StencilKind::SecondDerivative => -2.0 * self.c.iter().sum::<f64>(),
            _ => 0.0,
        }
    }

    /// Sum of absolute weights over the full stencil footprint.
    pub fn abs_sum(&self) -> f64 {
        self.center().abs() + 2.0 * self.c.iter().map(|c| c.abs()).sum::<f64>()
    }
}

fn check(radius: usize, h: f64) -> Result<()> {
    if radius == 0 || radius > MAX_RADIUS {
        return Err(Error::config(format!("unsupported stencil radius {radius}; supported 1..={MAX_RADIUS}")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::config(format!("stencil spacing must be positive, got {h}")));
    }
    Ok(())
}

pub fn second_derivative_coeffs(radius: usize, h: f64) -> Result<StencilCoeffs> {
    check(radius, h)?;
    StencilCoeffs::from_unit_weights(StencilKind::SecondDerivative, &to_f64(&exact_weights(StencilKind::SecondDerivative, radius)), h)
}

pub fn staggered_first_derivative_coeffs(radius: usize, h: f64) -> Result<StencilCoeffs> {
    check(radius, h)?;
    StencilCoeffs::from_unit_weights(StencilKind::StaggeredFirst, &to_f64(&exact_weights(StencilKind::StaggeredFirst, radius)), h)
}

pub fn centered_first_derivative_coeffs(radius: usize, h: f64) -> Result<StencilCoeffs> {
    check(radius, h)?;
    StencilCoeffs::from_unit_weights(StencilKind::CenteredFirst, &to_f64(&exact_weights(StencilKind::CenteredFirst, radius)), h)
}

fn to_f64(w: &[BigRational]) -> Vec<f64> {
    w.iter().map(|q| q.to_f64().expect("finite rational weight")).collect()
}

/// Exact unit-spacing weights solving the Taylor conditions for derivative orders
/// `2k` (second derivative) or `2k - 1` (first derivatives), `k = 1..=radius`.
pub fn exact_weights(kind: StencilKind, radius: usize) -> Vec<BigRational> {
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut a = vec![vec![BigRational::zero(); radius]; radius];
    for k in 1..=radius {
        let (power, fact) = match kind {
            StencilKind::SecondDerivative => (2 * k, factorial(2 * k)),
            _ => (2 * k - 1, factorial(2 * k - 1)),
        };
        for m in 1..=radius {
            let x = match kind {
                StencilKind::StaggeredFirst => int(m as i64) - half.clone(),
                _ => int(m as i64),
            };
            a[k - 1][m - 1] = int(2) * pow(&x, power) / fact.clone();
        }
    }
    let mut b = vec![BigRational::zero(); radius];
    b[0] = BigRational::one();
    solve(a, b)
}

fn factorial(n: usize) -> BigRational {
    BigRational::from_integer((1..=n as u64).map(BigInt::from).product())
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// Gaussian elimination over the rationals; the Taylor matrices are nonsingular.
fn solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("nonsingular Taylor system");
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
                let t = &f * &b[col];
                b[r] -= t;
            }
        }
    }
    (0..n).map(|i| &b[i] / &a[i][i]).collect()
}

/// Laplacian weights cast to the working precision, with strides for one grid.
#[derive(Debug, Clone)]
pub struct Laplacian<T> {
    pub ctot: T,
    pub radius: [usize; 3],
    pub c: [[T; MAX_RADIUS]; 3],
    pub stride: [usize; 3],
}

impl<T: Real> Laplacian<T> {
    pub fn new(coeffs: &[StencilCoeffs; 3], stride: [usize; 3]) -> Self {
        let mut c = [[T::zero(); MAX_RADIUS]; 3];
        for a in 0..3 {
            debug_assert_eq!(coeffs[a].kind, StencilKind::SecondDerivative);
            for (m, w) in coeffs[a].c.iter().enumerate() {
                c[a][m] = T::of(*w);
            }
        }
        let ctot = T::of(coeffs.iter().map(StencilCoeffs::center).sum());
        Laplacian {
            ctot,
            radius: [0, 1, 2].map(|a| coeffs[a].radius),
            c,
            stride,
        }
    }
}

impl<T: Arith> Laplacian<T> {
    /// Canonical Laplacian at flat offset `o`.
    #[inline(always)]
    pub fn at(&self, p: &[T], o: usize) -> T {
        let mut acc = self.ctot * p[o];
        for a in 0..3 {
            let s = self.stride[a];
            for m in 1..=self.radius[a] {
                acc = acc + self.c[a][m - 1] * (p[o + m * s] + p[o - m * s]);
            }
        }
        acc
    }

    /// Second derivative along one axis alone, including its own center weight.
    #[inline(always)]
    pub fn axis(&self, a: usize, center: T, p: &[T], o: usize) -> T {
        let s = self.stride[a];
        let mut acc = center * p[o];
        for m in 1..=self.radius[a] {
            acc = acc + self.c[a][m - 1] * (p[o + m * s] + p[o - m * s]);
        }
        acc
    }
}

/// First-derivative weights (staggered or centered) in working precision.
#[derive(Debug, Clone, Copy)]
pub struct FirstDerivative<T> {
    pub radius: usize,
    pub w: [T; MAX_RADIUS],
}

impl<T: Real> FirstDerivative<T> {
    pub fn new(coeffs: &StencilCoeffs) -> Self {
        let mut w = [T::zero(); MAX_RADIUS];
        for (m, v) in coeffs.c.iter().enumerate() {
            w[m] = T::of(*v);
        }
        FirstDerivative { radius: coeffs.radius, w }
    }
}

impl<T: Arith> FirstDerivative<T> {
    /// Staggered forward difference: derivative at `o + s/2`.
    #[inline(always)]
    pub fn plus(&self, f: &[T], o: usize, s: usize) -> T {
        let mut acc = self.w[0] * (f[o + s] - f[o]);
        for m in 2..=self.radius {
            acc = acc + self.w[m - 1] * (f[o + m * s] - f[o - (m - 1) * s]);
        }
        acc
    }

    /// Staggered backward difference: derivative at `o - s/2`.
    #[inline(always)]
    pub fn minus(&self, f: &[T], o: usize, s: usize) -> T {
        let mut acc = self.w[0] * (f[o] - f[o - s]);
        for m in 2..=self.radius {
            acc = acc + self.w[m - 1] * (f[o + (m - 1) * s] - f[o - m * s]);
        }
        acc
    }

    /// Centered (collocated) difference at `o`.
    #[inline(always)]
    pub fn centered(&self, f: &[T], o: usize, s: usize) -> T {
        let mut acc = self.w[0] * (f[o + s] - f[o - s]);
        for m in 2..=self.radius {
            acc = acc + self.w[m - 1] * (f[o + m * s] - f[o - m * s]);
        }
        acc
    }
}

fn check_box<T: Real>(a: &Field<T>, out: &Field<T>, bx: &IndexBox, radius: usize) -> Result<()> {
    if a.grid() != out.grid() {
        return Err(Error::Contract("input and output fields live on different grids".into()));
    }
    if !bx.within(&a.grid().interior_box()) {
        return Err(Error::Contract(format!("box {bx:?} exceeds the interior {:?}", a.grid().n())));
    }
    if radius > a.grid().radius() {
        return Err(Error::Contract(format!(
            "stencil radius {radius} exceeds ghost width {}",
            a.grid().radius()
        )));
    }
    Ok(())
}

/// Writes the Laplacian of `p` into `out` over `bx`.
pub fn apply_laplacian<T: Real>(p: &Field<T>, coeffs: &[StencilCoeffs; 3], out: &mut Field<T>, bx: &IndexBox) -> Result<()> {
    let rmax = coeffs.iter().map(|c| c.radius).max().unwrap_or(0);
    check_box(p, out, bx, rmax)?;
    let g = p.grid().clone();
    let lap = Laplacian::<T>::new(coeffs, g.strides());
    for q in bx.iter() {
        let o = g.offset_u(q);
        out.data[o] = lap.at(&p.data, o);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Result sits half a cell towards +axis from the input sample.
    Forward,
    /// Result sits half a cell towards -axis; the transpose pairing of `Forward`.
    Backward,
}

pub fn apply_staggered_derivative<T: Real>(
    f: &Field<T>,
    axis: usize,
    direction: Direction,
    coeffs: &StencilCoeffs,
    out: &mut Field<T>,
    bx: &IndexBox,
) -> Result<()> {
    if axis > 2 {
        return Err(Error::Contract(format!("axis {axis} out of range")));
    }
    if coeffs.kind != StencilKind::StaggeredFirst {
        return Err(Error::Contract("staggered derivative needs staggered coefficients".into()));
    }
    check_box(f, out, bx, coeffs.radius)?;
    let g = f.grid().clone();
    let s = g.strides()[axis];
    let d = FirstDerivative::<T>::new(coeffs);
    for q in bx.iter() {
        let o = g.offset_u(q);
        out.data[o] = match direction {
            Direction::Forward => d.plus(&f.data, o, s),
            Direction::Backward => d.minus(&f.data, o, s),
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Component, Grid3D};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    /// Applies unit-spacing weights to x^q around x0 and compares with the exact derivative.
    fn monomial_error(c: &StencilCoeffs, q: i32) -> f64 {
        let x0 = 1.0f64;
        let f = |x: f64| x.powi(q);
        let qf = q as f64;
        match c.kind {
            StencilKind::SecondDerivative => {
                let mut v = c.center() * f(x0);
                for (i, w) in c.c.iter().enumerate() {
                    let m = (i + 1) as f64;
                    v += w * (f(x0 + m) + f(x0 - m));
                }
                let exact = if q >= 2 { qf * (qf - 1.0) * x0.powi(q - 2) } else { 0.0 };
                rel(v, exact)
            }
            StencilKind::StaggeredFirst => {
                let mut v = 0.0;
                for (i, w) in c.c.iter().enumerate() {
                    let m = (i + 1) as f64 - 0.5;
                    v += w * (f(x0 + m) - f(x0 - m));
                }
                let exact = if q >= 1 { qf * x0.powi(q - 1) } else { 0.0 };
                rel(v, exact)
            }
            StencilKind::CenteredFirst => {
                let mut v = 0.0;
                for (i, w) in c.c.iter().enumerate() {
                    let m = (i + 1) as f64;
                    v += w * (f(x0 + m) - f(x0 - m));
                }
                let exact = if q >= 1 { qf * x0.powi(q - 1) } else { 0.0 };
                rel(v, exact)
            }
        }
    }

    #[test]
    fn classic_low_order() {
        let c = second_derivative_coeffs(1, 1.0).unwrap();
        assert_eq!(c.c, vec![1.0]);
        assert_eq!(c.center(), -2.0);
        let s = staggered_first_derivative_coeffs(1, 1.0).unwrap();
        assert_eq!(s.c, vec![1.0]);
        let e = centered_first_derivative_coeffs(1, 1.0).unwrap();
        assert_eq!(e.c, vec![0.5]);
    }

    #[test]
    fn fornberg_closed_form_matches_solve() {
        // c_m = 2 (-1)^(m+1) (R!)^2 / (m^2 (R-m)! (R+m)!)
        for r in 1..=MAX_RADIUS {
            let exact = exact_weights(StencilKind::SecondDerivative, r);
            let f = |n: usize| (1..=n as i64).map(BigInt::from).product::<BigInt>();
            for m in 1..=r {
                let sign = if m % 2 == 1 { 1 } else { -1 };
                let num = BigInt::from(2 * sign) * f(r) * f(r);
                let den = BigInt::from((m * m) as i64) * f(r - m) * f(r + m);
                assert_eq!(exact[m - 1], BigRational::new(num, den), "radius {r}, m {m}");
            }
        }
    }

    #[test]
    fn radius_four_values() {
        let c = second_derivative_coeffs(4, 1.0).unwrap();
        let expect = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
        for (a, b) in c.c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((c.center() + 205.0 / 72.0).abs() < 1e-14);
        let s = staggered_first_derivative_coeffs(4, 1.0).unwrap();
        let expect = [1225.0 / 1024.0, -245.0 / 3072.0, 49.0 / 5120.0, -5.0 / 7168.0];
        for (a, b) in s.c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn taylor_conditions_hold_exactly() {
        let int = |v: i64| BigRational::from_integer(BigInt::from(v));
        for r in 1..=MAX_RADIUS {
            for kind in [StencilKind::SecondDerivative, StencilKind::StaggeredFirst, StencilKind::CenteredFirst] {
                let w = exact_weights(kind, r);
                let (target, qmax) = match kind {
                    StencilKind::SecondDerivative => (2, 2 * r + 1),
                    _ => (1, 2 * r),
                };
                for q in 1..=qmax {
                    let mut acc = BigRational::zero();
                    for (i, wm) in w.iter().enumerate() {
                        let m = int(i as i64 + 1);
                        let x = match kind {
                            StencilKind::StaggeredFirst => m - BigRational::new(BigInt::from(1), BigInt::from(2)),
                            _ => m,
                        };
                        let xp = pow(&x, q);
                        let xn = pow(&-x, q);
                        acc += match kind {
                            StencilKind::SecondDerivative => wm * (xp + xn),
                            _ => wm * (xp - xn),
                        };
                    }
                    let want = if q == target { factorial(q) } else { BigRational::zero() };
                    assert_eq!(acc, want, "{kind:?} radius {r} degree {q}");
                }
            }
        }
    }

    #[test]
    fn monomial_exactness_in_f64() {
        // beyond radius 4 the f64 roundoff on (x0 + R)^q exceeds 1e-10
        for r in 1..=4 {
            let c = second_derivative_coeffs(r, 1.0).unwrap();
            for q in 0..=(2 * r) as i32 {
                assert!(monomial_error(&c, q) <= 1e-10, "second r={r} q={q}");
            }
            let s = staggered_first_derivative_coeffs(r, 1.0).unwrap();
            let e = centered_first_derivative_coeffs(r, 1.0).unwrap();
            for q in 0..=(2 * r - 1) as i32 {
                assert!(monomial_error(&s, q) <= 1e-10, "staggered r={r} q={q}");
                assert!(monomial_error(&e, q) <= 1e-10, "centered r={r} q={q}");
            }
        }
        // one degree beyond the formal order is no longer reproduced
        let c = second_derivative_coeffs(4, 1.0).unwrap();
        assert!(monomial_error(&c, 10) > 1e-6);
    }

    #[test]
    fn spacing_scaling() {
        let a = second_derivative_coeffs(4, 1.0).unwrap();
        let b = second_derivative_coeffs(4, 20.0).unwrap();
        for (x, y) in a.c.iter().zip(&b.c) {
            assert_eq!(x / 400.0, *y);
        }
        let a = staggered_first_derivative_coeffs(4, 1.0).unwrap();
        let b = staggered_first_derivative_coeffs(4, 2.0).unwrap();
        for (x, y) in a.c.iter().zip(&b.c) {
            assert_eq!(x / 2.0, *y);
        }
    }

    #[test]
    fn rejects_unsupported() {
        assert!(matches!(second_derivative_coeffs(0, 1.0), Err(Error::Config(_))));
        assert!(matches!(second_derivative_coeffs(9, 1.0), Err(Error::Config(_))));
        assert!(staggered_first_derivative_coeffs(4, 0.0).is_err());
    }

    fn coeffs3(r: usize, d: [f64; 3]) -> [StencilCoeffs; 3] {
        d.map(|h| second_derivative_coeffs(r, h).unwrap())
    }

    #[test]
    fn laplacian_of_constant_and_quadratic() {
        let g = Grid3D::new([12, 12, 12], [20.0; 3], 4).unwrap();
        let c = coeffs3(4, g.d());
        let mut p = Field::<f64>::filled(&g, Component::P, 7.0);
        let mut out = Field::zeros(&g, Component::Aux);
        let bx = g.interior_box();
        apply_laplacian(&p, &c, &mut out, &bx).unwrap();
        assert!(out.interior_values().all(|v| v.abs() < 1e-12));

        let r = g.radius() as isize;
        for i in -r..12 + r {
            for j in -r..12 + r {
                for k in -r..12 + r {
                    p.set_at(i, j, k, (i as f64 * 20.0).powi(2));
                }
            }
        }
        apply_laplacian(&p, &c, &mut out, &bx).unwrap();
        assert!(out.interior_values().all(|v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn laplacian_matches_direct_summation() {
        use rand::{Rng, SeedableRng};
        let g = Grid3D::new([9, 9, 9], [10.0, 12.0, 15.0], 4).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let mut p = Field::<f64>::zeros(&g, Component::P);
        p.data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        let c = coeffs3(4, g.d());
        let mut out = Field::zeros(&g, Component::Aux);
        let bx = IndexBox::new([1, 2, 0], [8, 9, 7]);
        apply_laplacian(&p, &c, &mut out, &bx).unwrap();
        for [i, j, k] in g.interior_box().iter() {
            let (i, j, k) = (i as isize, j as isize, k as isize);
            let mut v = 0.0;
            for m in 1..=4isize {
                let w = |a: usize| c[a].c[m as usize - 1];
                let p0 = p.at(i, j, k);
                v += w(0) * (p.at(i + m, j, k) + p.at(i - m, j, k) - 2.0 * p0);
                v += w(1) * (p.at(i, j + m, k) + p.at(i, j - m, k) - 2.0 * p0);
                v += w(2) * (p.at(i, j, k + m) + p.at(i, j, k - m) - 2.0 * p0);
            }
            let got = out.at(i, j, k);
            if bx.contains([i as usize, j as usize, k as usize]) {
                assert!((got - v).abs() <= 1e-12 * v.abs().max(1e-3), "{got} vs {v}");
            } else {
                assert_eq!(got, 0.0);
            }
        }
    }

    #[test]
    fn laplacian_reflection_symmetry() {
        let g = Grid3D::new([9, 9, 9], [1.0; 3], 4).unwrap();
        let c = coeffs3(4, g.d());
        let f = |i: usize, j: usize, k: usize| ((i * 7 + j * 3 + k * 11) % 13) as f64;
        let p = Field::<f64>::from_fn(&g, Component::P, f);
        let q = Field::<f64>::from_fn(&g, Component::P, |i, j, k| f(8 - i, j, k));
        let (mut lp, mut lq) = (Field::zeros(&g, Component::Aux), Field::zeros(&g, Component::Aux));
        apply_laplacian(&p, &c, &mut lp, &g.interior_box()).unwrap();
        apply_laplacian(&q, &c, &mut lq, &g.interior_box()).unwrap();
        for [i, j, k] in g.interior_box().iter() {
            assert!((lp.get([i, j, k]) - lq.get([8 - i, j, k])).abs() < 1e-12);
        }
    }

    #[test]
    fn box_outside_interior_is_contract_violation() {
        let g = Grid3D::new([8, 8, 8], [1.0; 3], 4).unwrap();
        let p = Field::<f64>::zeros(&g, Component::P);
        let mut out = Field::zeros(&g, Component::Aux);
        let bx = IndexBox::new([0, 0, 0], [9, 8, 8]);
        assert!(matches!(apply_laplacian(&p, &coeffs3(4, g.d()), &mut out, &bx), Err(Error::Contract(_))));
    }

    #[test]
    fn staggered_constant_and_linear() {
        let g = Grid3D::new([10, 10, 10], [5.0; 3], 4).unwrap();
        let c = staggered_first_derivative_coeffs(4, 5.0).unwrap();
        let r = 4isize;
        let mut f = Field::<f64>::filled(&g, Component::P, 3.0);
        let mut out = Field::zeros(&g, Component::Aux);
        for dir in [Direction::Forward, Direction::Backward] {
            apply_staggered_derivative(&f, 1, dir, &c, &mut out, &g.interior_box()).unwrap();
            assert!(out.interior_values().all(|v| v.abs() < 1e-13));
        }
        for i in -r..10 + r {
            for j in -r..10 + r {
                for k in -r..10 + r {
                    f.set_at(i, j, k, 0.25 * (k as f64 * 5.0) - 1.0);
                }
            }
        }
        for dir in [Direction::Forward, Direction::Backward] {
            apply_staggered_derivative(&f, 2, dir, &c, &mut out, &g.interior_box()).unwrap();
            assert!(out.interior_values().all(|v| (v - 0.25).abs() < 1e-13));
        }
    }

    #[test]
    fn staggered_adjoint_on_periodic_grid() {
        use rand::{Rng, SeedableRng};
        let g = Grid3D::new([16, 16, 16], [1.5; 3], 4).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let c = staggered_first_derivative_coeffs(4, 1.5).unwrap();
        for axis in 0..3 {
            let mut f = Field::<f64>::from_fn(&g, Component::P, |_, _, _| rng.gen_range(-1.0..1.0));
            let mut h = Field::<f64>::from_fn(&g, Component::P, |_, _, _| rng.gen_range(-1.0..1.0));
            f.fill_ghosts_periodic();
            h.fill_ghosts_periodic();
            let mut df = Field::zeros(&g, Component::Aux);
            let mut dh = Field::zeros(&g, Component::Aux);
            apply_staggered_derivative(&f, axis, Direction::Forward, &c, &mut df, &g.interior_box()).unwrap();
            apply_staggered_derivative(&h, axis, Direction::Backward, &c, &mut dh, &g.interior_box()).unwrap();
            let lhs: f64 = df.interior_values().zip(h.interior_values()).map(|(a, b)| a * b).sum();
            let rhs: f64 = f.interior_values().zip(dh.interior_values()).map(|(a, b)| a * b).sum();
            assert!((lhs + rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "axis {axis}: {lhs} vs {rhs}");
        }
    }

    proptest! {
        #[test]
        fn laplacian_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let g = Grid3D::new([8, 8, 8], [1.0, 2.0, 3.0], 4).unwrap();
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let mut p = Field::<f64>::zeros(&g, Component::P);
            let mut q = Field::<f64>::zeros(&g, Component::P);
            p.data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
            q.data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
            let mut s = p.clone();
            for (o, (a, b)) in s.data.iter_mut().zip(p.data.iter().zip(&q.data)) {
                *o = alpha * a + beta * b;
            }
            let c = coeffs3(4, g.d());
            let bx = g.interior_box();
            let (mut lp, mut lq, mut ls) = (Field::zeros(&g, Component::Aux), Field::zeros(&g, Component::Aux), Field::zeros(&g, Component::Aux));
            apply_laplacian(&p, &c, &mut lp, &bx).unwrap();
            apply_laplacian(&q, &c, &mut lq, &bx).unwrap();
            apply_laplacian(&s, &c, &mut ls, &bx).unwrap();
            for x in bx.iter() {
                let want = alpha * lp.get(x) + beta * lq.get(x);
                prop_assert!((ls.get(x) - want).abs() <= 1e-12 * (1.0 + want.abs()) * 10.0);
            }
        }
    }
}

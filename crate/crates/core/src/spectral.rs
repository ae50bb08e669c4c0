//! Uniform periodic grids, real sample fields and their Fourier companions.
//!
//! Fields are stored with the x index running fastest (`node = iy * nx + ix`).
//! Transforms are unnormalized forward / `1/N` inverse complex FFTs; the real
//! part of the inverse is kept.
//!
//! Two wavenumber conventions are used for the Nyquist bin: odd-order
//! derivatives (and anything built from the gradient, such as the projector
//! onto gradient fields) zero it, while even multipliers (`|k|^2`, Sobolev
//! weights, the Helmholtz inverse) use its full magnitude.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Periodic uniform grid in one or two horizontal dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 2],
    length: [f64; 2],
}

impl Grid {
    pub fn new_1d(n: usize, length: f64) -> Result<Self> {
        check_axis(n, length)?;
        Ok(Self {
            dim: 1,
            n: [n, 1],
            length: [length, 1.0],
        })
    }

    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        check_axis(nx, lx)?;
        check_axis(ny, ly)?;
        Ok(Self {
            dim: 2,
            n: [nx, ny],
            length: [lx, ly],
        })
    }

    /// `[0, 2*pi)` with `n` nodes.
    pub fn periodic_1d(n: usize) -> Result<Self> {
        Self::new_1d(n, 2.0 * PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.length[axis]
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.length[axis] / self.n[axis] as f64
    }

    /// Area (or length) element of one node.
    pub fn cell_measure(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub fn coords(&self, node: usize) -> [f64; 2] {
        let ix = node % self.n[0];
        let iy = node / self.n[0];
        [ix as f64 * self.spacing(0), iy as f64 * self.spacing(1)]
    }

    /// Signed integer mode number of FFT bin `j`; the Nyquist bin maps to `+n/2`.
    pub fn mode(&self, axis: usize, j: usize) -> i64 {
        let n = self.n[axis];
        if j <= n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    fn is_nyquist(&self, axis: usize, j: usize) -> bool {
        self.n[axis] > 1 && j == self.n[axis] / 2
    }

    /// Wavenumber used by even multipliers.
    pub fn k_even(&self, axis: usize, j: usize) -> f64 {
        2.0 * PI * self.mode(axis, j) as f64 / self.length[axis]
    }

    /// Wavenumber used by odd derivatives (Nyquist zeroed).
    pub fn k_odd(&self, axis: usize, j: usize) -> f64 {
        if self.is_nyquist(axis, j) {
            0.0
        } else {
            self.k_even(axis, j)
        }
    }

    /// Largest mode kept by the 2/3 truncation.
    pub fn dealias_cutoff(&self, axis: usize) -> i64 {
        (self.n[axis] / 3) as i64
    }

    /// Bin indices `(jx, jy)` of flat spectral index `idx`.
    fn bins(&self, idx: usize) -> (usize, usize) {
        (idx % self.n[0], idx / self.n[0])
    }
}

fn check_axis(n: usize, length: f64) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "point count {n} must be a power of two and at least 8"
        )));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidGrid(format!("length {length} must be positive")));
    }
    Ok(())
}

/// Real samples of a scalar field on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    data: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples supplied for a grid of {} nodes",
                data.len(),
                grid.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite sample at node {i}")));
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            data: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let data = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.coords(i);
                f(x, y)
            })
            .collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimum value and the node where it is reached.
    pub fn argmin(&self) -> (f64, usize) {
        self.data
            .iter()
            .copied()
            .enumerate()
            .fold((f64::INFINITY, 0), |(m, im), (i, v)| if v < m { (v, i) } else { (m, im) })
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete inner product `sum f g dA`.
    pub fn inner(&self, other: &Field) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_measure()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        self.grid == other.grid
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b)
    }
}

/// Pointwise product.
impl Mul for &Field {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a * b)
    }
}

/// Pointwise quotient.
impl Div for &Field {
    type Output = Field;
    fn div(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a / b)
    }
}

macro_rules! forward_owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<&Field> for Field {
            type Output = Field;
            fn $m(self, rhs: &Field) -> Field {
                (&self).$m(rhs)
            }
        }
        impl $tr<Field> for &Field {
            type Output = Field;
            fn $m(self, rhs: Field) -> Field {
                self.$m(&rhs)
            }
        }
        impl $tr<Field> for Field {
            type Output = Field;
            fn $m(self, rhs: Field) -> Field {
                (&self).$m(&rhs)
            }
        }
    )*};
}

forward_owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Field {
    type Output = Field;
    fn neg(self) -> Field {
        (&self).neg()
    }
}

impl Mul<&Field> for f64 {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        rhs.scale(self)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.map(|v| -v)
    }
}

/// A `d`-component vector field (`d` = grid dimension).
#[derive(Debug, Clone, PartialEq)]
pub struct VecField {
    comps: Vec<Field>,
}

impl VecField {
    pub fn new(comps: Vec<Field>) -> Result<Self> {
        let first = comps
            .first()
            .ok_or_else(|| Error::InvalidGrid("vector field without components".into()))?;
        if comps.len() != first.grid.dim {
            return Err(Error::InvalidGrid(format!(
                "{} components for a {}-dimensional grid",
                comps.len(),
                first.grid.dim
            )));
        }
        if comps.iter().any(|c| c.grid != first.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { comps })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            comps: (0..grid.dim).map(|_| Field::zeros(grid)).collect(),
        }
    }

    /// One-dimensional vector field wrapping a scalar.
    pub fn from_scalar(f: Field) -> Self {
        Self { comps: vec![f] }
    }

    pub fn grid(&self) -> &Grid {
        &self.comps[0].grid
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, i: usize) -> &Field {
        &self.comps[i]
    }

    pub fn comps(&self) -> &[Field] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<Field> {
        self.comps
    }

    pub fn map_comps(&self, f: impl Fn(&Field) -> Field) -> VecField {
        VecField {
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn zip_comps(&self, other: &VecField, f: impl Fn(&Field, &Field) -> Field) -> VecField {
        VecField {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Multiply every component by a scalar field.
    pub fn mul_scalar(&self, s: &Field) -> VecField {
        self.map_comps(|c| c * s)
    }

    pub fn scale(&self, c: f64) -> VecField {
        self.map_comps(|f| f.scale(c))
    }

    pub fn axpy(&self, c: f64, other: &VecField) -> VecField {
        self.zip_comps(other, |a, b| a.axpy(c, b))
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VecField) -> Field {
        let mut acc = Field::zeros(*self.grid());
        for (a, b) in self.comps.iter().zip(&other.comps) {
            acc = &acc + &(a * b);
        }
        acc
    }

    pub fn inner(&self, other: &VecField) -> f64 {
        self.comps.iter().zip(&other.comps).map(|(a, b)| a.inner(b)).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.sup_norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(Field::is_finite)
    }
}

impl Add for &VecField {
    type Output = VecField;
    fn add(self, rhs: &VecField) -> VecField {
        self.zip_comps(rhs, |a, b| a + b)
    }
}

impl Sub for &VecField {
    type Output = VecField;
    fn sub(self, rhs: &VecField) -> VecField {
        self.zip_comps(rhs, |a, b| a - b)
    }
}

impl Neg for VecField {
    type Output = VecField;
    fn neg(self) -> VecField {
        self.scale(-1.0)
    }
}

// ---------------------------------------------------------------------------
// transforms

/// Forward (unnormalized) transform of a field.
pub fn forward(f: &Field) -> Vec<Complex64> {
    let g = f.grid;
    let mut buf: Vec<Complex64> = f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&g, &mut buf, false);
    buf
}

/// Inverse transform, keeping the real part.
pub fn inverse(grid: &Grid, mut coeffs: Vec<Complex64>) -> Field {
    transform(grid, &mut coeffs, true);
    let scale = 1.0 / grid.len() as f64;
    Field {
        grid: *grid,
        data: coeffs.iter().map(|c| c.re * scale).collect(),
    }
}

fn transform(g: &Grid, buf: &mut [Complex64], inv: bool) {
    let (nx, ny) = (g.n[0], g.n[1]);
    plan(nx, inv).process(buf);
    if g.dim == 2 {
        let mut t = vec![Complex64::new(0.0, 0.0); nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                t[ix * ny + iy] = buf[iy * nx + ix];
            }
        }
        plan(ny, inv).process(&mut t);
        for ix in 0..nx {
            for iy in 0..ny {
                buf[iy * nx + ix] = t[ix * ny + iy];
            }
        }
    }
}

/// Apply a Fourier multiplier `m(jx, jy)` given in terms of bin indices.
pub fn apply_multiplier(f: &Field, m: impl Fn(&Grid, usize, usize) -> Complex64) -> Field {
    let g = f.grid;
    let mut c = forward(f);
    for (idx, v) in c.iter_mut().enumerate() {
        let (jx, jy) = g.bins(idx);
        *v *= m(&g, jx, jy);
    }
    inverse(&g, c)
}

/// Apply a real even multiplier depending on `|k|^2`.
pub fn apply_radial(f: &Field, m: impl Fn(f64) -> f64) -> Field {
    apply_multiplier(f, |g, jx, jy| Complex64::new(m(k_squared(g, jx, jy)), 0.0))
}

fn k_squared(g: &Grid, jx: usize, jy: usize) -> f64 {
    let kx = g.k_even(0, jx);
    let ky = if g.dim == 2 { g.k_even(1, jy) } else { 0.0 };
    kx * kx + ky * ky
}

fn remove_mean(mut f: Field) -> Field {
    let m = f.mean();
    f.data.iter_mut().for_each(|v| *v -= m);
    f
}

// ---------------------------------------------------------------------------
// operators

/// Spectral derivative of order 1, 2 or 3 along `axis`.
pub fn deriv(f: &Field, axis: usize, order: u32) -> Field {
    assert!((1..=3).contains(&order), "derivative order must be 1, 2 or 3");
    assert!(axis < f.grid.dim, "axis out of range");
    let out = apply_multiplier(f, |g, jx, jy| {
        let j = if axis == 0 { jx } else { jy };
        let k = if order % 2 == 1 { g.k_odd(axis, j) } else { g.k_even(axis, j) };
        Complex64::new(0.0, k).powu(order)
    });
    remove_mean(out)
}

pub fn dx(f: &Field) -> Field {
    deriv(f, 0, 1)
}

pub fn dxx(f: &Field) -> Field {
    deriv(f, 0, 2)
}

pub fn grad(f: &Field) -> VecField {
    VecField {
        comps: (0..f.grid.dim).map(|a| deriv(f, a, 1)).collect(),
    }
}

pub fn div(w: &VecField) -> Field {
    let mut acc = deriv(w.comp(0), 0, 1);
    for a in 1..w.dim() {
        acc = &acc + &deriv(w.comp(a), a, 1);
    }
    acc
}

pub fn laplacian(f: &Field) -> Field {
    let mut acc = deriv(f, 0, 2);
    for a in 1..f.grid.dim {
        acc = &acc + &deriv(f, a, 2);
    }
    acc
}

/// `|Lambda^s f|_{L^2}` with `Lambda = (1 - Delta)^{1/2}`.
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    assert!(s >= 0.0, "Sobolev index must be non-negative");
    if s == 0.0 {
        return f.l2_norm();
    }
    let g = f.grid;
    let c = forward(f);
    let sum: f64 = c
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let (jx, jy) = g.bins(idx);
            v.norm_sqr() * (1.0 + k_squared(&g, jx, jy)).powf(s)
        })
        .sum();
    (sum * g.cell_measure() / g.len() as f64).sqrt()
}

/// Orthogonal projection onto gradient fields, symbol `k k^T / |k|^2`.
///
/// The zero mode is passed through. In one dimension the projector is the
/// identity. In two dimensions, bins whose odd wavevector vanishes without
/// being the zero mode (pure Nyquist bins) are removed.
pub fn project_gradient(w: &VecField) -> VecField {
    let g = *w.grid();
    if g.dim == 1 {
        return w.clone();
    }
    let cx = forward(w.comp(0));
    let cy = forward(w.comp(1));
    let mut ox = cx.clone();
    let mut oy = cy.clone();
    for idx in 0..g.len() {
        let (jx, jy) = g.bins(idx);
        if jx == 0 && jy == 0 {
            continue;
        }
        let kx = g.k_odd(0, jx);
        let ky = g.k_odd(1, jy);
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            ox[idx] = Complex64::new(0.0, 0.0);
            oy[idx] = Complex64::new(0.0, 0.0);
            continue;
        }
        let kw = (cx[idx] * kx + cy[idx] * ky) / k2;
        ox[idx] = kw * kx;
        oy[idx] = kw * ky;
    }
    VecField {
        comps: vec![inverse(&g, ox), inverse(&g, oy)],
    }
}

/// `(1 - a Delta)^{-1} f`.
pub fn helmholtz_inverse(a: f64, f: &Field) -> Field {
    assert!(a >= 0.0, "Helmholtz coefficient must be non-negative");
    if a == 0.0 {
        return f.clone();
    }
    apply_radial(f, |k2| 1.0 / (1.0 + a * k2))
}

/// 1D inverse of `1 - a d_x d_x` where both derivatives are odd-order
/// (Nyquist treated like the derivative operators).
pub fn helmholtz_inverse_odd(a: f64, f: &Field) -> Field {
    apply_multiplier(f, |g, jx, _| {
        let k = g.k_odd(0, jx);
        Complex64::new(1.0 / (1.0 + a * k * k), 0.0)
    })
}

/// 2/3-rule truncation: removes every mode above `n/3` along any axis.
pub fn dealias(f: &Field) -> Field {
    apply_multiplier(f, |g, jx, jy| {
        let keep = g.mode(0, jx).abs() <= g.dealias_cutoff(0)
            && (g.dim == 1 || g.mode(1, jy).abs() <= g.dealias_cutoff(1));
        Complex64::new(if keep { 1.0 } else { 0.0 }, 0.0)
    })
}

/// Exact translation along x: returns `f(x - s)`.
pub fn shift_x(f: &Field, s: f64) -> Field {
    apply_multiplier(f, |g, jx, _| Complex64::from_polar(1.0, -g.k_even(0, jx) * s))
}

//! Periodic-box Fourier discretization on [0, 2pi)^3.
//!
//! Fields are mean-free and stored as full complex spectra with Hermitian
//! symmetry (real in physical space). The coefficient normalization is fixed
//! so that the Parseval sums below equal continuum L^2 integrals: the stored
//! coefficient is (2pi)^{3/2} times the Fourier-series coefficient, hence
//! ||u||^2 = sum |c(k)|^2, ||grad u||^2 = sum |k|^2 |c(k)|^2.
//!
//! 2D verification runs embed as z-independent 3D fields on a single z-plane
//! (nz = 1), reusing every code path.

mod fft;
pub mod checkpoint;

pub use fft::Fft3;

use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Grid for the periodic box [0, 2pi)^3. The smallest nonzero |k|^2 over
/// mean-free fields is 1, so lambda_1 = 1 in every theorem constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    dims: usize,
}

impl Grid {
    pub fn new(n: usize, dims: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid.n must be even and >= 8, got {n}"
            )));
        }
        if dims != 2 && dims != 3 {
            return Err(Error::InvalidParameter(format!(
                "grid.dims must be 2 or 3, got {dims}"
            )));
        }
        Ok(Self { n, dims })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Points along z: n for 3D, one plane for the 2D embedding.
    pub fn nz(&self) -> usize {
        if self.dims == 3 {
            self.n
        } else {
            1
        }
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.nz()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    pub fn lambda1(&self) -> f64 {
        1.0
    }

    /// Signed integer frequency for index `i` along an axis of `len` points.
    #[inline]
    pub fn freq_of(i: usize, len: usize) -> i64 {
        if i <= len / 2 {
            i as i64
        } else {
            i as i64 - len as i64
        }
    }

    /// Per-axis frequency tables (kx, ky, kz) as f64.
    pub fn freq_tables(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let fx: Vec<f64> = (0..self.n).map(|i| Self::freq_of(i, self.n) as f64).collect();
        let fz: Vec<f64> = (0..self.nz()).map(|i| Self::freq_of(i, self.nz()) as f64).collect();
        (fx.clone(), fx, fz)
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.nz() + iz
    }

    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let nz = self.nz();
        (idx / (self.n * nz), (idx / nz) % self.n, idx % nz)
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch {
                expected: (self.n, self.dims),
                got: (other.n, other.dims),
            });
        }
        Ok(())
    }
}

/// Real vector field sampled on the grid points.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    grid: Grid,
    values: [Vec<f64>; 3],
}

impl PhysicalField {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.len();
        Self {
            grid,
            values: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.values[c]
    }

    pub fn components_mut(&mut self) -> [&mut [f64]; 3] {
        let [a, b, c] = &mut self.values;
        [a.as_mut_slice(), b.as_mut_slice(), c.as_mut_slice()]
    }

    /// Fills from a pointwise function of the coordinates (x, y, z).
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        let n = grid.n();
        let nz = grid.nz();
        let mut idx = 0;
        for ix in 0..n {
            let x = TWO_PI * ix as f64 / n as f64;
            for iy in 0..n {
                let y = TWO_PI * iy as f64 / n as f64;
                for iz in 0..nz {
                    let z = TWO_PI * iz as f64 / nz as f64;
                    let v = f(x, y, z);
                    out.values[0][idx] = v[0];
                    out.values[1][idx] = v[1];
                    out.values[2][idx] = v[2];
                    idx += 1;
                }
            }
        }
        out
    }

    /// Max over grid points of the pointwise vector magnitude.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.grid.len() {
            let s = self.values[0][i] * self.values[0][i]
                + self.values[1][i] * self.values[1][i]
                + self.values[2][i] * self.values[2][i];
            m = m.max(s);
        }
        m.sqrt()
    }

    /// First grid index holding a non-finite component, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize, usize)> {
        for i in 0..self.grid.len() {
            if !(self.values[0][i].is_finite()
                && self.values[1][i].is_finite()
                && self.values[2][i].is_finite())
            {
                return Some(self.grid.unravel(i));
            }
        }
        None
    }

    /// Quadrature L^2 norm: ((2pi)^3 / N * sum |u|^2)^{1/2}.
    pub fn quadrature_l2(&self) -> f64 {
        let mut acc = Kahan::new();
        for c in 0..3 {
            for v in &self.values[c] {
                acc.add(v * v);
            }
        }
        (acc.value() * TWO_PI.powi(3) / self.grid.len() as f64).sqrt()
    }
}

/// Mean-free periodic vector field as Fourier coefficients with Hermitian
/// symmetry. Solenoidality is established by [`SpectralField::project`] and
/// preserved by every linear per-mode operator here.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    coeffs: [Vec<Complex64>; 3],
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.len();
        let z = Complex64::new(0.0, 0.0);
        Self {
            grid,
            coeffs: [vec![z; len], vec![z; len], vec![z; len]],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.coeffs[c]
    }

    pub fn coeff(&self, c: usize, ix: usize, iy: usize, iz: usize) -> Complex64 {
        self.coeffs[c][self.grid.index(ix, iy, iz)]
    }

    pub fn set_coeff(&mut self, c: usize, ix: usize, iy: usize, iz: usize, v: Complex64) {
        let i = self.grid.index(ix, iy, iz);
        self.coeffs[c][i] = v;
    }

    /// c(k) <- c(k) - k (k . c(k)) / |k|^2 per mode; the k = 0 mode is
    /// untouched (mean-free fields carry nothing there).
    pub fn project(&self) -> SpectralField {
        let mut out = self.clone();
        out.project_in_place();
        out
    }

    pub fn project_in_place(&mut self) {
        let n = self.grid.n();
        let nz = self.grid.nz();
        let [c0, c1, c2] = &mut self.coeffs;
        let mut idx = 0;
        for ix in 0..n {
            let kx = Grid::freq_of(ix, n) as f64;
            for iy in 0..n {
                let ky = Grid::freq_of(iy, n) as f64;
                for iz in 0..nz {
                    let kz = Grid::freq_of(iz, nz) as f64;
                    let k2 = kx * kx + ky * ky + kz * kz;
                    if k2 > 0.0 {
                        let kd = (c0[idx] * kx + c1[idx] * ky + c2[idx] * kz) / k2;
                        c0[idx] -= kd * kx;
                        c1[idx] -= kd * ky;
                        c2[idx] -= kd * kz;
                    }
                    idx += 1;
                }
            }
        }
    }

    /// Stokes operator: c(k) <- |k|^2 c(k).
    pub fn stokes_apply(&self) -> SpectralField {
        let mut out = self.clone();
        out.mul_by_k2_power(1);
        out
    }

    fn mul_by_k2_power(&mut self, p: i32) {
        let n = self.grid.n();
        let nz = self.grid.nz();
        for c in 0..3 {
            let comp = &mut self.coeffs[c];
            let mut idx = 0;
            for ix in 0..n {
                let kx = Grid::freq_of(ix, n) as f64;
                for iy in 0..n {
                    let ky = Grid::freq_of(iy, n) as f64;
                    for iz in 0..nz {
                        let kz = Grid::freq_of(iz, nz) as f64;
                        let k2 = kx * kx + ky * ky + kz * kz;
                        comp[idx] *= k2.powi(p);
                        idx += 1;
                    }
                }
            }
        }
    }

    /// Spherical Galerkin cutoff: zeroes modes with |k|^2 > m_cutoff.
    pub fn galerkin_truncate(&self, m_cutoff: f64) -> SpectralField {
        let mut out = self.clone();
        out.galerkin_truncate_in_place(m_cutoff);
        out
    }

    pub fn galerkin_truncate_in_place(&mut self, m_cutoff: f64) {
        let n = self.grid.n();
        let nz = self.grid.nz();
        let zero = Complex64::new(0.0, 0.0);
        for c in 0..3 {
            let comp = &mut self.coeffs[c];
            let mut idx = 0;
            for ix in 0..n {
                let kx = Grid::freq_of(ix, n) as f64;
                for iy in 0..n {
                    let ky = Grid::freq_of(iy, n) as f64;
                    for iz in 0..nz {
                        let kz = Grid::freq_of(iz, nz) as f64;
                        if kx * kx + ky * ky + kz * kz > m_cutoff {
                            comp[idx] = zero;
                        }
                        idx += 1;
                    }
                }
            }
        }
    }

    /// 2/3-rule dealiasing: zeroes modes with any 3 |k_i| > n_i.
    pub fn dealias(&self) -> SpectralField {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let n = self.grid.n();
        let nz = self.grid.nz();
        let zero = Complex64::new(0.0, 0.0);
        for c in 0..3 {
            let comp = &mut self.coeffs[c];
            let mut idx = 0;
            for ix in 0..n {
                let kx = Grid::freq_of(ix, n).unsigned_abs() as usize;
                for iy in 0..n {
                    let ky = Grid::freq_of(iy, n).unsigned_abs() as usize;
                    let xy_bad = 3 * kx > n || 3 * ky > n;
                    for iz in 0..nz {
                        let kz = Grid::freq_of(iz, nz).unsigned_abs() as usize;
                        if xy_bad || 3 * kz > nz {
                            comp[idx] = zero;
                        }
                        idx += 1;
                    }
                }
            }
        }
    }

    /// Zeroes the k = 0 mode.
    pub fn zero_mean(&mut self) {
        let zero = Complex64::new(0.0, 0.0);
        for c in 0..3 {
            self.coeffs[c][0] = zero;
        }
    }

    /// Restores exact Hermitian symmetry: c(-k) = conj(c(k)). Identity on
    /// fields that already carry it.
    pub fn hermitian_enforce(&mut self) {
        let n = self.grid.n();
        let nz = self.grid.nz();
        let grid = self.grid;
        for c in 0..3 {
            let comp = &mut self.coeffs[c];
            for ix in 0..n {
                let jx = (n - ix) % n;
                for iy in 0..n {
                    let jy = (n - iy) % n;
                    for iz in 0..nz {
                        let jz = (nz - iz) % nz;
                        let i = grid.index(ix, iy, iz);
                        let j = grid.index(jx, jy, jz);
                        if i < j {
                            let v = 0.5 * (comp[i] + comp[j].conj());
                            comp[i] = v;
                            comp[j] = v.conj();
                        } else if i == j {
                            comp[i] = Complex64::new(comp[i].re, 0.0);
                        }
                    }
                }
            }
        }
    }

    /// Spectral derivative along `axis`: c(k) <- i k_axis c(k).
    pub fn derivative(&self, axis: usize) -> SpectralField {
        let n = self.grid.n();
        let nz = self.grid.nz();
        let mut out = self.clone();
        for c in 0..3 {
            let comp = &mut out.coeffs[c];
            let mut idx = 0;
            for ix in 0..n {
                for iy in 0..n {
                    for iz in 0..nz {
                        let k = match axis {
                            0 => Grid::freq_of(ix, n),
                            1 => Grid::freq_of(iy, n),
                            _ => Grid::freq_of(iz, nz),
                        } as f64;
                        let v = comp[idx];
                        comp[idx] = Complex64::new(-k * v.im, k * v.re);
                        idx += 1;
                    }
                }
            }
        }
        out
    }

    /// Vorticity omega = curl u, computed per mode as i k x c(k).
    pub fn curl(&self) -> SpectralField {
        let n = self.grid.n();
        let nz = self.grid.nz();
        let mut out = SpectralField::zeros(self.grid);
        let [u0, u1, u2] = &self.coeffs;
        let mut idx = 0;
        for ix in 0..n {
            let kx = Grid::freq_of(ix, n) as f64;
            for iy in 0..n {
                let ky = Grid::freq_of(iy, n) as f64;
                for iz in 0..nz {
                    let kz = Grid::freq_of(iz, nz) as f64;
                    let i = Complex64::new(0.0, 1.0);
                    out.coeffs[0][idx] = i * (ky * u2[idx] - kz * u1[idx]);
                    out.coeffs[1][idx] = i * (kz * u0[idx] - kx * u2[idx]);
                    out.coeffs[2][idx] = i * (kx * u1[idx] - ky * u0[idx]);
                    idx += 1;
                }
            }
        }
        out
    }

    /// Max over modes of |k . c(k)| / (|k| |c(k)| + tiny).
    pub fn div_residual(&self) -> f64 {
        let n = self.grid.n();
        let nz = self.grid.nz();
        let [c0, c1, c2] = &self.coeffs;
        let mut worst = 0.0_f64;
        let mut idx = 0;
        for ix in 0..n {
            let kx = Grid::freq_of(ix, n) as f64;
            for iy in 0..n {
                let ky = Grid::freq_of(iy, n) as f64;
                for iz in 0..nz {
                    let kz = Grid::freq_of(iz, nz) as f64;
                    let k2 = kx * kx + ky * ky + kz * kz;
                    if k2 > 0.0 {
                        let kd = c0[idx] * kx + c1[idx] * ky + c2[idx] * kz;
                        let cmag = (c0[idx].norm_sqr() + c1[idx].norm_sqr() + c2[idx].norm_sqr())
                            .sqrt();
                        let rel = kd.norm() / (k2.sqrt() * cmag + 1e-300);
                        worst = worst.max(rel);
                    }
                    idx += 1;
                }
            }
        }
        worst
    }

    pub fn scale(&mut self, s: f64) {
        for c in 0..3 {
            for v in &mut self.coeffs[c] {
                *v *= s;
            }
        }
    }

    pub fn add_scaled(&mut self, other: &SpectralField, s: f64) {
        for c in 0..3 {
            let a = &mut self.coeffs[c];
            let b = &other.coeffs[c];
            for i in 0..a.len() {
                a[i] += b[i] * s;
            }
        }
    }

    /// Per-mode multiply by a real diagonal factor (e.g. the heat kernel).
    pub fn mul_diag(&mut self, diag: &[f64]) {
        for c in 0..3 {
            let a = &mut self.coeffs[c];
            for i in 0..a.len() {
                a[i] *= diag[i];
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }
}

/// Deterministic compensated accumulator; summation order is storage order,
/// so repeated runs agree bit-for-bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

fn weighted_sum(s: &SpectralField, k2_power: i32) -> f64 {
    let n = s.grid.n();
    let nz = s.grid.nz();
    let mut acc = Kahan::new();
    for c in 0..3 {
        let comp = s.component(c);
        let mut idx = 0;
        for ix in 0..n {
            let kx = Grid::freq_of(ix, n) as f64;
            for iy in 0..n {
                let ky = Grid::freq_of(iy, n) as f64;
                for iz in 0..nz {
                    let kz = Grid::freq_of(iz, nz) as f64;
                    let k2 = kx * kx + ky * ky + kz * kz;
                    let w = match k2_power {
                        0 => 1.0,
                        1 => k2,
                        _ => k2 * k2,
                    };
                    acc.add(w * comp[idx].norm_sqr());
                    idx += 1;
                }
            }
        }
    }
    acc.value()
}

/// ||u||^2 = sum |c(k)|^2 (continuum L^2 norm squared).
pub fn norm_l2_sq(s: &SpectralField) -> f64 {
    weighted_sum(s, 0)
}

pub fn norm_l2(s: &SpectralField) -> f64 {
    norm_l2_sq(s).sqrt()
}

/// ||grad u||^2 = sum |k|^2 |c(k)|^2.
pub fn norm_h1_semi_sq(s: &SpectralField) -> f64 {
    weighted_sum(s, 1)
}

pub fn norm_h1_semi(s: &SpectralField) -> f64 {
    norm_h1_semi_sq(s).sqrt()
}

/// ||A u||^2 = sum |k|^4 |c(k)|^2.
pub fn norm_stokes_sq(s: &SpectralField) -> f64 {
    weighted_sum(s, 2)
}

pub fn norm_stokes(s: &SpectralField) -> f64 {
    norm_stokes_sq(s).sqrt()
}

/// Real L^2 inner product, sum Re(a(k) conj(b(k))).
pub fn inner_l2(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    a.grid.check_same(&b.grid)?;
    let mut acc = Kahan::new();
    for c in 0..3 {
        let ca = a.component(c);
        let cb = b.component(c);
        for i in 0..ca.len() {
            acc.add(ca[i].re * cb[i].re + ca[i].im * cb[i].im);
        }
    }
    Ok(acc.value())
}

/// ||a - b|| without materializing the difference.
pub fn diff_norm_l2(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    a.grid.check_same(&b.grid)?;
    Ok(diff_weighted(a, b, 0).sqrt())
}

/// ||grad (a - b)||.
pub fn diff_norm_h1_semi(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    a.grid.check_same(&b.grid)?;
    Ok(diff_weighted(a, b, 1).sqrt())
}

pub(crate) fn diff_weighted(a: &SpectralField, b: &SpectralField, k2_power: i32) -> f64 {
    let n = a.grid.n();
    let nz = a.grid.nz();
    let mut acc = Kahan::new();
    for c in 0..3 {
        let ca = a.component(c);
        let cb = b.component(c);
        let mut idx = 0;
        for ix in 0..n {
            let kx = Grid::freq_of(ix, n) as f64;
            for iy in 0..n {
                let ky = Grid::freq_of(iy, n) as f64;
                for iz in 0..nz {
                    let kz = Grid::freq_of(iz, nz) as f64;
                    let k2 = kx * kx + ky * ky + kz * kz;
                    let w = match k2_power {
                        0 => 1.0,
                        1 => k2,
                        _ => k2 * k2,
                    };
                    let d = ca[idx] - cb[idx];
                    acc.add(w * d.norm_sqr());
                    idx += 1;
                }
            }
        }
    }
    acc.value()
}

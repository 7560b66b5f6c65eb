//! Nonlinearity evaluation for both forms of the momentum equation:
//! advective B(u, v) = P_sigma((u . grad) v) and rotational
//! B(u, v) = P_sigma((curl v) x u), plus their calmed versions where the
//! first slot receives zeta(u).
//!
//! Products are evaluated pseudo-spectrally: transform to physical space,
//! form the product pointwise, transform back, dealias, project, and
//! re-enforce Hermitian symmetry. The quadratic (identity-calmed) product is
//! exactly dealiased by the 2/3 rule; calmed products are non-polynomial and
//! keep a resolution-controlled aliasing residue that the report output
//! documents.

use crate::calming::CalmingFunction;
use crate::error::{Error, Result};
use crate::spectral::{inner_l2, Fft3, Grid, PhysicalField, SpectralField};
use rustfft::num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Advective,
    Rotational,
}

impl FormKind {
    pub fn name(self) -> &'static str {
        match self {
            FormKind::Advective => "advective",
            FormKind::Rotational => "rotational",
        }
    }
}

/// Which momentum-equation nonlinearity to integrate, and with which calming.
/// `calming: None` is the identity (plain NSE).
#[derive(Debug, Clone, Copy)]
pub struct NonlinearForm {
    pub form: FormKind,
    pub calming: Option<CalmingFunction>,
}

impl NonlinearForm {
    pub fn new(form: FormKind, calming: Option<CalmingFunction>) -> Self {
        Self { form, calming }
    }

    pub fn identity(form: FormKind) -> Self {
        Self { form, calming: None }
    }
}

/// Result of one nonlinearity evaluation. `max_advector` is the maximum
/// pointwise magnitude of the first-slot velocity (zeta(u) when calmed),
/// used by the stepper's a-priori bound assertion and CFL control.
#[derive(Debug)]
pub struct NonlinearEval {
    pub field: SpectralField,
    pub max_advector: f64,
}

/// Reusable work buffers for repeated evaluations on one grid.
pub(crate) struct EvalScratch {
    a_phys: PhysicalField,
    advector: PhysicalField,
    aux: PhysicalField,
    product: PhysicalField,
    dspec: SpectralField,
}

impl EvalScratch {
    pub(crate) fn new(grid: Grid) -> Self {
        Self {
            a_phys: PhysicalField::zeros(grid),
            advector: PhysicalField::zeros(grid),
            aux: PhysicalField::zeros(grid),
            product: PhysicalField::zeros(grid),
            dspec: SpectralField::zeros(grid),
        }
    }
}

/// Applies the calming map pointwise into `out`, tracking the maximum
/// advector magnitude; identity copies through. Non-finite inputs are
/// reported with their grid index.
fn form_advector(
    calming: Option<&CalmingFunction>,
    src: &PhysicalField,
    out: &mut PhysicalField,
    grid: Grid,
) -> Result<f64> {
    let len = grid.len();
    let mut max_sq = 0.0_f64;
    let (s0, s1, s2) = (src.component(0), src.component(1), src.component(2));
    let [o0, o1, o2] = out.components_mut();
    for idx in 0..len {
        let x = [s0[idx], s1[idx], s2[idx]];
        if !(x[0].is_finite() && x[1].is_finite() && x[2].is_finite()) {
            let (ix, iy, iz) = grid.unravel(idx);
            return Err(Error::NonFiniteField { ix, iy, iz });
        }
        let z = match calming {
            Some(zeta) => zeta.apply_unchecked(x),
            None => x,
        };
        o0[idx] = z[0];
        o1[idx] = z[1];
        o2[idx] = z[2];
        max_sq = max_sq.max(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
    }
    Ok(max_sq.sqrt())
}

pub(crate) fn eval_bilinear_with(
    fft: &Fft3,
    form: FormKind,
    calming: Option<&CalmingFunction>,
    a: &SpectralField,
    b: &SpectralField,
    ws: &mut EvalScratch,
) -> Result<NonlinearEval> {
    check_grids(a, b)?;
    let grid = a.grid();
    let len = grid.len();

    fft.inverse_into(a, &mut ws.a_phys);
    let max_advector = form_advector(calming, &ws.a_phys, &mut ws.advector, grid)?;

    match form {
        FormKind::Advective => {
            // r_i = sum_j w_j d_j b_i, with the nine gradients spectral
            for c in 0..3 {
                ws.product.component_mut(c).fill(0.0);
            }
            for j in 0..3 {
                derivative_into(b, j, &mut ws.dspec);
                fft.inverse_into(&ws.dspec, &mut ws.aux);
                let wj = ws.advector.component(j);
                for i in 0..3 {
                    let dbi = ws.aux.component(i);
                    let ri = ws.product.component_mut(i);
                    for idx in 0..len {
                        ri[idx] += wj[idx] * dbi[idx];
                    }
                }
            }
        }
        FormKind::Rotational => {
            // r = (curl b) x w, the (calmed) Lamb vector
            curl_into(b, &mut ws.dspec);
            fft.inverse_into(&ws.dspec, &mut ws.aux);
            let (o0, o1, o2) = (ws.aux.component(0), ws.aux.component(1), ws.aux.component(2));
            let (w0, w1, w2) = (
                ws.advector.component(0),
                ws.advector.component(1),
                ws.advector.component(2),
            );
            let r0 = ws.product.component_mut(0);
            for idx in 0..len {
                r0[idx] = o1[idx] * w2[idx] - o2[idx] * w1[idx];
            }
            let r1 = ws.product.component_mut(1);
            for idx in 0..len {
                r1[idx] = o2[idx] * w0[idx] - o0[idx] * w2[idx];
            }
            let r2 = ws.product.component_mut(2);
            for idx in 0..len {
                r2[idx] = o0[idx] * w1[idx] - o1[idx] * w0[idx];
            }
        }
    }

    if let Some((ix, iy, iz)) = ws.product.first_non_finite() {
        return Err(Error::NonFiniteField { ix, iy, iz });
    }

    let mut out = fft.forward(&ws.product);
    out.zero_mean();
    out.dealias_in_place();
    out.project_in_place();
    Ok(NonlinearEval { field: out, max_advector })
}

/// i k_axis multiplication into an existing field.
fn derivative_into(s: &SpectralField, axis: usize, out: &mut SpectralField) {
    let grid = s.grid();
    let n = grid.n();
    let nz = grid.nz();
    for c in 0..3 {
        let src = s.component(c);
        let dst = out.component_mut(c);
        let mut idx = 0;
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..nz {
                    let k = match axis {
                        0 => Grid::freq_of(ix, n),
                        1 => Grid::freq_of(iy, n),
                        _ => Grid::freq_of(iz, nz),
                    } as f64;
                    let v = src[idx];
                    dst[idx] = Complex64::new(-k * v.im, k * v.re);
                    idx += 1;
                }
            }
        }
    }
}

/// i k x c(k) into an existing field.
fn curl_into(s: &SpectralField, out: &mut SpectralField) {
    let grid = s.grid();
    let n = grid.n();
    let nz = grid.nz();
    let mut idx = 0;
    for ix in 0..n {
        let kx = Grid::freq_of(ix, n) as f64;
        for iy in 0..n {
            let ky = Grid::freq_of(iy, n) as f64;
            for iz in 0..nz {
                let kz = Grid::freq_of(iz, nz) as f64;
                let i = Complex64::new(0.0, 1.0);
                let u0 = s.component(0)[idx];
                let u1 = s.component(1)[idx];
                let u2 = s.component(2)[idx];
                out.component_mut(0)[idx] = i * (ky * u2 - kz * u1);
                out.component_mut(1)[idx] = i * (kz * u0 - kx * u2);
                out.component_mut(2)[idx] = i * (kx * u1 - ky * u0);
                idx += 1;
            }
        }
    }
}

/// B(zeta(a), b) (or B(a, b) for identity calming) in the given form.
/// Output is dealiased, mean-free and solenoidal.
pub fn eval_bilinear(
    fft: &Fft3,
    form: FormKind,
    calming: Option<&CalmingFunction>,
    a: &SpectralField,
    b: &SpectralField,
) -> Result<NonlinearEval> {
    let mut ws = EvalScratch::new(a.grid());
    eval_bilinear_with(fft, form, calming, a, b, &mut ws)
}

/// B(zeta(u), u) for the configured form; the system's nonlinear term.
pub fn eval_nonlinearity(fft: &Fft3, nf: &NonlinearForm, u: &SpectralField) -> Result<NonlinearEval> {
    eval_bilinear(fft, nf.form, nf.calming.as_ref(), u, u)
}

/// Trilinear diagnostic b(u, v, w) = <B(zeta(u), v), w>.
pub fn trilinear_b(
    fft: &Fft3,
    nf: &NonlinearForm,
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
) -> Result<f64> {
    check_grids(u, v)?;
    check_grids(u, w)?;
    let eval = eval_bilinear(fft, nf.form, nf.calming.as_ref(), u, v)?;
    inner_l2(&eval.field, w)
}

fn check_grids(a: &SpectralField, b: &SpectralField) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch {
            expected: (a.grid().n(), a.grid().dims()),
            got: (b.grid().n(), b.grid().dims()),
        });
    }
    Ok(())
}

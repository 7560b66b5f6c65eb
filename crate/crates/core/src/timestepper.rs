//! Time integration of the truncated spectral system
//! du/dt = -nu A u - P_m B(zeta(u), u) + P_m f
//! by a second-order integrating-factor Runge-Kutta scheme: the diffusion
//! factor exp(-nu |k|^2 dt) is applied exactly per mode, and the
//! nonlinearity plus forcing advance with a two-stage explicit rule.

use crate::calming::CalmingFunction;
use crate::diagnostics::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::nonlinear::{eval_bilinear_with, EvalScratch, NonlinearEval, NonlinearForm};
use crate::spectral::checkpoint::read_checkpoint;
use crate::spectral::{
    inner_l2, norm_h1_semi_sq, norm_l2_sq, norm_stokes_sq, Fft3, Grid, PhysicalField,
    SpectralField,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtSpec {
    Fixed(f64),
    /// dt chosen from the CFL number and the a-priori advective speed bound.
    Auto,
}

#[derive(Debug, Clone)]
pub enum ForcingSpec {
    Zero,
    /// Coefficient `amplitude` placed at wavenumber k (conjugate-mirrored at
    /// -k), then Leray-projected. Mean-free requires k != 0.
    SingleMode { k: [i64; 3], amplitude: [f64; 3] },
    FromCheckpoint(PathBuf),
}

#[derive(Debug, Clone)]
pub enum InitialSpec {
    /// amplitude * (sin x cos y, -cos x sin y, 0), the canonical smooth datum.
    TaylorGreen { amplitude: f64 },
    /// Random solenoidal field supported on k_min <= |k| <= k_max, scaled to
    /// the requested energy ||u0||^2. Fully deterministic in the seed.
    RandomBand { k_min: f64, k_max: f64, energy: f64, seed: u64 },
    FromCheckpoint(PathBuf),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub grid: Grid,
    pub nu: f64,
    pub nonlinear: NonlinearForm,
    pub t_end: f64,
    pub dt: DtSpec,
    pub cfl: f64,
    pub forcing: ForcingSpec,
    pub initial: InitialSpec,
    pub save_every: f64,
    /// Spherical Galerkin truncation radius (|k|^2 cutoff); None disables.
    pub m_cutoff: Option<f64>,
    /// Test hook: integrate the pure Stokes system when false.
    pub nonlinearity_enabled: bool,
    /// Retain the sampled spectral states for difference norms.
    pub keep_states: bool,
}

impl SolverConfig {
    pub fn new(grid: Grid, nu: f64, nonlinear: NonlinearForm) -> Self {
        Self {
            grid,
            nu,
            nonlinear,
            t_end: 1.0,
            dt: DtSpec::Auto,
            cfl: 0.4,
            forcing: ForcingSpec::Zero,
            initial: InitialSpec::TaylorGreen { amplitude: 1.0 },
            save_every: 0.05,
            m_cutoff: None,
            nonlinearity_enabled: true,
            keep_states: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if let DtSpec::Fixed(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.save_every > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "save_every must be positive, got {}",
                self.save_every
            )));
        }
        if self.t_end > 0.0 && self.save_every > self.t_end + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "save_every = {} exceeds t_end = {}",
                self.save_every, self.t_end
            )));
        }
        if let Some(m) = self.m_cutoff {
            if !(m > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "m_cutoff must be positive, got {m}"
                )));
            }
        }
        if let ForcingSpec::SingleMode { k, .. } = &self.forcing {
            if *k == [0, 0, 0] {
                return Err(Error::InvalidParameter(
                    "single-mode forcing at k = 0 is not mean-free".into(),
                ));
            }
        }
        if let InitialSpec::RandomBand { k_min, k_max, energy, .. } = &self.initial {
            if !(*k_min >= 0.0 && k_max >= k_min && *energy > 0.0) {
                return Err(Error::InvalidParameter(
                    "random band requires 0 <= k_min <= k_max and energy > 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Builds the initial state: constructed, mean-free, dealiased, truncated,
/// Leray-projected, Hermitian.
pub fn build_initial(fft: &Fft3, cfg: &SolverConfig) -> Result<SpectralField> {
    let grid = cfg.grid;
    let mut u0 = match &cfg.initial {
        InitialSpec::TaylorGreen { amplitude } => {
            let a = *amplitude;
            let p = PhysicalField::from_fn(grid, |x, y, _z| {
                [a * x.sin() * y.cos(), -a * x.cos() * y.sin(), 0.0]
            });
            fft.forward(&p)
        }
        InitialSpec::RandomBand { k_min, k_max, energy, seed } => {
            random_band_field(grid, *k_min, *k_max, *energy, *seed)?
        }
        InitialSpec::FromCheckpoint(path) => {
            let (field, _time) = read_checkpoint(path)?;
            if field.grid() != grid {
                return Err(Error::GridMismatch {
                    expected: (grid.n(), grid.dims()),
                    got: (field.grid().n(), field.grid().dims()),
                });
            }
            field
        }
    };
    u0.zero_mean();
    u0.dealias_in_place();
    if let Some(m) = cfg.m_cutoff {
        u0.galerkin_truncate_in_place(m);
    }
    u0.project_in_place();
    u0.hermitian_enforce();
    Ok(u0)
}

fn random_band_field(
    grid: Grid,
    k_min: f64,
    k_max: f64,
    energy: f64,
    seed: u64,
) -> Result<SpectralField> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut field = SpectralField::zeros(grid);
    let n = grid.n();
    let nz = grid.nz();
    let ncomp = if grid.dims() == 3 { 3 } else { 2 };
    // fixed mode order so the draw sequence is reproducible
    for ix in 0..n {
        let kx = Grid::freq_of(ix, n) as f64;
        for iy in 0..n {
            let ky = Grid::freq_of(iy, n) as f64;
            for iz in 0..nz {
                let kz = Grid::freq_of(iz, nz) as f64;
                let kmag = (kx * kx + ky * ky + kz * kz).sqrt();
                if kmag >= k_min && kmag <= k_max && kmag > 0.0 {
                    for c in 0..ncomp {
                        let re: f64 = normal.sample(&mut rng);
                        let im: f64 = normal.sample(&mut rng);
                        field.set_coeff(c, ix, iy, iz, Complex64::new(re, im));
                    }
                }
            }
        }
    }
    field.hermitian_enforce();
    field.project_in_place();
    field.zero_mean();
    let norm_sq = norm_l2_sq(&field);
    if norm_sq <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "random band [{k_min}, {k_max}] contains no modes on this grid"
        )));
    }
    field.scale((energy / norm_sq).sqrt());
    Ok(field)
}

/// Builds the spectral forcing field P f (projected, mean-free, truncated).
pub fn build_forcing(cfg: &SolverConfig) -> Result<Option<SpectralField>> {
    let grid = cfg.grid;
    let mut f = match &cfg.forcing {
        ForcingSpec::Zero => return Ok(None),
        ForcingSpec::SingleMode { k, amplitude } => {
            let n = grid.n() as i64;
            let nz = grid.nz() as i64;
            let wrap = |v: i64, len: i64| -> Result<usize> {
                let ok = if len == 1 { v == 0 } else { v.abs() <= len / 2 };
                if !ok {
                    return Err(Error::InvalidParameter(format!(
                        "forcing wavenumber component {v} outside grid range"
                    )));
                }
                Ok(v.rem_euclid(len) as usize)
            };
            let (ix, iy, iz) = (wrap(k[0], n)?, wrap(k[1], n)?, wrap(k[2], nz)?);
            let mut f = SpectralField::zeros(grid);
            for c in 0..3 {
                f.set_coeff(c, ix, iy, iz, Complex64::new(amplitude[c], 0.0));
            }
            f.hermitian_enforce();
            f
        }
        ForcingSpec::FromCheckpoint(path) => {
            let (field, _t) = read_checkpoint(path)?;
            if field.grid() != grid {
                return Err(Error::GridMismatch {
                    expected: (grid.n(), grid.dims()),
                    got: (field.grid().n(), field.grid().dims()),
                });
            }
            field
        }
    };
    f.zero_mean();
    if let Some(m) = cfg.m_cutoff {
        f.galerkin_truncate_in_place(m);
    }
    f.project_in_place();
    Ok(Some(f))
}

/// Advective speed bound for CFL control: max |u0| over the grid, and
/// additionally the a-priori bound ||zeta||_Linf when calming is active.
fn speed_bound(u0_max: f64, calming: Option<&CalmingFunction>) -> f64 {
    match calming {
        Some(z) => u0_max.max(z.linf_bound()),
        None => u0_max,
    }
}

/// Resolves dt and the step count. A fixed dt is kept verbatim when it
/// divides t_end (1e-9 relative); otherwise it is shrunk to the nearest
/// exact divisor. Auto dt satisfies dt <= cfl dx / speed_bound.
pub fn resolve_dt(cfg: &SolverConfig, u0_phys_max: f64) -> Result<(f64, usize)> {
    if cfg.t_end == 0.0 {
        let dt = match cfg.dt {
            DtSpec::Fixed(dt) => dt,
            DtSpec::Auto => cfg.save_every,
        };
        return Ok((dt, 0));
    }
    match cfg.dt {
        DtSpec::Fixed(dt) => {
            let steps = (cfg.t_end / dt).round().max(1.0);
            if (steps * dt - cfg.t_end).abs() <= 1e-9 * cfg.t_end.max(dt) {
                Ok((dt, steps as usize))
            } else {
                let steps = (cfg.t_end / dt).ceil().max(1.0);
                Ok((cfg.t_end / steps, steps as usize))
            }
        }
        DtSpec::Auto => {
            let speed = speed_bound(u0_phys_max, cfg.nonlinear.calming.as_ref()).max(1e-12);
            let dt_raw = cfg.cfl * cfg.grid.dx() / speed;
            let steps = (cfg.t_end / dt_raw).ceil().max(1.0);
            Ok((cfg.t_end / steps, steps as usize))
        }
    }
}

/// One integrating-factor Heun step of width dt from time t. Convenience
/// wrapper over the run loop's kernel.
pub fn step(fft: &Fft3, state: &SpectralField, t: f64, cfg: &SolverConfig) -> Result<SpectralField> {
    cfg.validate()?;
    let dt = match cfg.dt {
        DtSpec::Fixed(dt) => dt,
        DtSpec::Auto => {
            let u_phys = fft.inverse(state);
            let speed = speed_bound(u_phys.max_abs(), cfg.nonlinear.calming.as_ref()).max(1e-12);
            cfg.cfl * cfg.grid.dx() / speed
        }
    };
    let mut ctx = StepContext::new(cfg, dt)?;
    let (rhs1, _flux) = ctx.rhs(fft, state, t)?;
    ctx.advance_with_rhs(fft, state, &rhs1, t)
}

struct StepContext<'a> {
    cfg: &'a SolverConfig,
    dt: f64,
    exp_factor: Vec<f64>,
    forcing: Option<SpectralField>,
    scratch: EvalScratch,
}

impl<'a> StepContext<'a> {
    fn new(cfg: &'a SolverConfig, dt: f64) -> Result<Self> {
        let grid = cfg.grid;
        let n = grid.n();
        let nz = grid.nz();
        let mut exp_factor = vec![0.0; grid.len()];
        let mut idx = 0;
        for ix in 0..n {
            let kx = Grid::freq_of(ix, n) as f64;
            for iy in 0..n {
                let ky = Grid::freq_of(iy, n) as f64;
                for iz in 0..nz {
                    let kz = Grid::freq_of(iz, nz) as f64;
                    let k2 = kx * kx + ky * ky + kz * kz;
                    exp_factor[idx] = (-cfg.nu * k2 * dt).exp();
                    idx += 1;
                }
            }
        }
        let forcing = build_forcing(cfg)?;
        let scratch = EvalScratch::new(grid);
        Ok(Self { cfg, dt, exp_factor, forcing, scratch })
    }

    /// Explicit right-hand side N(u) = -B(zeta(u), u) + P_m f with the
    /// a-priori calming bound asserted. Also returns the energy flux
    /// <B(zeta(u), u), u>.
    fn rhs(&mut self, fft: &Fft3, u: &SpectralField, t: f64) -> Result<(SpectralField, f64)> {
        let mut rhs;
        let mut flux = 0.0;
        if self.cfg.nonlinearity_enabled {
            let nf = &self.cfg.nonlinear;
            let NonlinearEval { field: b, max_advector } = eval_bilinear_with(
                fft,
                nf.form,
                nf.calming.as_ref(),
                u,
                u,
                &mut self.scratch,
            )?;
            if let Some(zeta) = &self.cfg.nonlinear.calming {
                let bound = zeta.linf_bound();
                if !(max_advector <= bound * (1.0 + 1e-12)) {
                    return Err(Error::CalmingBoundViolated { time: t, measured: max_advector, bound });
                }
            } else if !max_advector.is_finite() {
                return Err(Error::BlowUp { time: t });
            }
            flux = inner_l2(&b, u)?;
            rhs = b;
            // rhs <- f - B in one pass
            match &self.forcing {
                Some(f) => {
                    for c in 0..3 {
                        let r = rhs.component_mut(c);
                        let fc = f.component(c);
                        for i in 0..r.len() {
                            r[i] = fc[i] - r[i];
                        }
                    }
                }
                None => {
                    for c in 0..3 {
                        for v in rhs.component_mut(c) {
                            *v = -*v;
                        }
                    }
                }
            }
        } else {
            rhs = SpectralField::zeros(self.cfg.grid);
            if let Some(f) = &self.forcing {
                rhs.add_scaled(f, 1.0);
            }
        }
        if let Some(m) = self.cfg.m_cutoff {
            rhs.galerkin_truncate_in_place(m);
        }
        Ok((rhs, flux))
    }

    /// u_{n+1} = E u_n + dt/2 (E N(u_n) + N(E (u_n + dt N(u_n)))) with
    /// truncation and Hermitian symmetry re-enforced after the step.
    fn advance_with_rhs(
        &mut self,
        fft: &Fft3,
        u: &SpectralField,
        rhs1: &SpectralField,
        t: f64,
    ) -> Result<SpectralField> {
        let dt = self.dt;

        // pred = E (u + dt rhs1), fused
        let mut pred = SpectralField::zeros(self.cfg.grid);
        for c in 0..3 {
            let p = pred.component_mut(c);
            let uc = u.component(c);
            let rc = rhs1.component(c);
            for i in 0..p.len() {
                p[i] = (uc[i] + rc[i] * dt) * self.exp_factor[i];
            }
        }

        let (rhs2, _flux2) = self.rhs(fft, &pred, t + dt)?;

        // next = E (u + dt/2 rhs1) + dt/2 rhs2, fused
        let mut next = pred;
        let half = 0.5 * dt;
        for c in 0..3 {
            let nc = next.component_mut(c);
            let uc = u.component(c);
            let r1 = rhs1.component(c);
            let r2 = rhs2.component(c);
            for i in 0..nc.len() {
                nc[i] = (uc[i] + r1[i] * half) * self.exp_factor[i] + r2[i] * half;
            }
        }

        if let Some(m) = self.cfg.m_cutoff {
            next.galerkin_truncate_in_place(m);
        }
        next.hermitian_enforce();

        if !norm_l2_sq(&next).is_finite() {
            return Err(Error::BlowUp { time: t + dt });
        }
        Ok(next)
    }
}

/// Integrates to t_end, sampling diagnostics at the step boundaries nearest
/// to multiples of save_every, and accumulating the energy-budget time
/// integrals with the trapezoidal rule at every step. Deterministic given
/// the config and seed.
pub fn run(cfg: &SolverConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let fft = Fft3::new(cfg.grid);
    let u0 = build_initial(&fft, cfg)?;
    let u0_max = fft.inverse(&u0).max_abs();
    let (dt, nsteps) = resolve_dt(cfg, u0_max)?;
    let mut ctx = StepContext::new(cfg, dt)?;

    let mut record = TrajectoryRecord::new(cfg.keep_states, dt);
    let mut u = u0;

    // running trapezoidal integrals and their previous-boundary integrands
    let mut dissipation = 0.0_f64;
    let mut force_work = 0.0_f64;
    let mut flux_integral = 0.0_f64;
    let forcing_copy = ctx.forcing.clone();
    let work_of = |u: &SpectralField| -> Result<f64> {
        match &forcing_copy {
            Some(f) => inner_l2(f, u),
            None => Ok(0.0),
        }
    };
    let mut grad_sq = norm_h1_semi_sq(&u);
    let mut work = work_of(&u)?;
    let mut flux_prev: Option<f64> = None;
    let stride = ((cfg.save_every / dt).round() as usize).clamp(1, nsteps.max(1));

    for istep in 0..=nsteps {
        let t = istep as f64 * dt;

        // stage-1 right-hand side at the current boundary; its flux closes
        // the trapezoid over [t - dt, t]
        let (rhs1, flux_t) = ctx.rhs(&fft, &u, t)?;
        if let Some(fp) = flux_prev {
            flux_integral += 0.5 * dt * (fp + flux_t);
        }
        flux_prev = Some(flux_t);

        if istep % stride == 0 || istep == nsteps {
            record.push_sample(
                t,
                norm_l2_sq(&u),
                grad_sq,
                norm_stokes_sq(&u),
                force_work,
                dissipation,
                u.div_residual(),
                flux_t,
                flux_integral,
                &u,
            );
        }
        if istep == nsteps {
            break;
        }

        let next = ctx.advance_with_rhs(&fft, &u, &rhs1, t)?;

        let grad_sq_next = norm_h1_semi_sq(&next);
        let work_next = work_of(&next)?;
        dissipation += dt * cfg.nu * (grad_sq + grad_sq_next); // 0.5 * dt * (2 nu g)
        force_work += 0.5 * dt * (work + work_next);
        grad_sq = grad_sq_next;
        work = work_next;
        u = next;
    }

    record.set_final(u, nsteps as f64 * dt);
    Ok(record)
}

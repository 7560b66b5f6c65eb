//! Scalar functionals along and between trajectories: energy-budget
//! residuals, difference norms for convergence and Cauchy studies, and
//! absorbing-ball statistics.

use crate::error::{Error, Result};
use crate::spectral::{diff_weighted, Kahan, SpectralField};
use std::io::Write;

/// Time series of diagnostics sampled along a run. `force_work`,
/// `dissipation` and `flux_integral` are running trapezoidal integrals
/// accumulated at every step of the underlying run, not just at samples.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// ||u||^2 samples
    pub energy: Vec<f64>,
    /// ||grad u||^2 samples
    pub grad_energy: Vec<f64>,
    /// ||A u||^2 samples
    pub stokes_energy: Vec<f64>,
    /// running integral of <f, u>
    pub force_work: Vec<f64>,
    /// running integral of 2 nu ||grad u||^2
    pub dissipation: Vec<f64>,
    /// max relative divergence over modes
    pub div_residual: Vec<f64>,
    /// <B(zeta(u), u), u> samples
    pub calming_flux: Vec<f64>,
    /// running integral of the calming flux
    pub flux_integral: Vec<f64>,
    /// sampled spectral states, when retained
    pub states: Option<Vec<SpectralField>>,
    /// final state and time of the run that produced this record
    pub final_state: Option<SpectralField>,
    pub final_time: f64,
    /// step width used by the producing run
    pub dt: f64,
    /// whether the producing run used time-independent forcing
    pub constant_forcing: bool,
}

impl TrajectoryRecord {
    pub fn new(keep_states: bool, dt: f64) -> Self {
        Self {
            times: Vec::new(),
            energy: Vec::new(),
            grad_energy: Vec::new(),
            stokes_energy: Vec::new(),
            force_work: Vec::new(),
            dissipation: Vec::new(),
            div_residual: Vec::new(),
            calming_flux: Vec::new(),
            flux_integral: Vec::new(),
            states: if keep_states { Some(Vec::new()) } else { None },
            final_state: None,
            final_time: 0.0,
            dt,
            constant_forcing: true,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push_sample(
        &mut self,
        t: f64,
        energy: f64,
        grad_energy: f64,
        stokes_energy: f64,
        force_work: f64,
        dissipation: f64,
        div_residual: f64,
        calming_flux: f64,
        flux_integral: f64,
        state: &SpectralField,
    ) {
        self.times.push(t);
        self.energy.push(energy);
        self.grad_energy.push(grad_energy);
        self.stokes_energy.push(stokes_energy);
        self.force_work.push(force_work);
        self.dissipation.push(dissipation);
        self.div_residual.push(div_residual);
        self.calming_flux.push(calming_flux);
        self.flux_integral.push(flux_integral);
        if let Some(states) = &mut self.states {
            states.push(state.clone());
        }
    }

    pub fn set_final(&mut self, state: SpectralField, time: f64) {
        self.final_state = Some(state);
        self.final_time = time;
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Trajectory CSV with the eight specified columns, full f64 round-trip
    /// precision, "." decimal separator.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "t,energy,grad_energy,stokes_energy,force_work,dissipation,div_residual,calming_flux"
        )?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                self.times[i],
                self.energy[i],
                self.grad_energy[i],
                self.stokes_energy[i],
                self.force_work[i],
                self.dissipation[i],
                self.div_residual[i],
                self.calming_flux[i]
            )?;
        }
        Ok(())
    }
}

/// Integrated energy-identity residual per sample:
/// R(t) = ||u(t)||^2 + 2 nu int ||grad u||^2 - ||u0||^2 - 2 int <f, u>.
pub fn energy_residual(tr: &TrajectoryRecord) -> Vec<f64> {
    let e0 = tr.energy.first().copied().unwrap_or(0.0);
    (0..tr.len())
        .map(|i| tr.energy[i] + tr.dissipation[i] - e0 - 2.0 * tr.force_work[i])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceNorms {
    /// max_t ||a - b||
    pub l_inf_h: f64,
    /// max_t ||grad (a - b)||
    pub l_inf_v: f64,
    /// (int ||grad (a - b)||^2 dt)^{1/2} by trapezoidal quadrature
    pub l2_v: f64,
}

/// Sup-in-time and integrated difference norms between two runs with shared
/// grid and sample times. Requires retained states.
pub fn difference_norms(a: &TrajectoryRecord, b: &TrajectoryRecord) -> Result<DifferenceNorms> {
    let sa = a.states.as_ref().ok_or(Error::MissingStates)?;
    let sb = b.states.as_ref().ok_or(Error::MissingStates)?;
    if a.times.len() != b.times.len()
        || a.times.iter().zip(&b.times).any(|(x, y)| x != y)
        || sa.len() != a.times.len()
        || sb.len() != b.times.len()
    {
        return Err(Error::MismatchedSampling);
    }
    if let (Some(fa), Some(fb)) = (sa.first(), sb.first()) {
        if fa.grid() != fb.grid() {
            return Err(Error::GridMismatch {
                expected: (fa.grid().n(), fa.grid().dims()),
                got: (fb.grid().n(), fb.grid().dims()),
            });
        }
    }
    let mut l_inf_h = 0.0_f64;
    let mut l_inf_v = 0.0_f64;
    let mut v_sq = Vec::with_capacity(sa.len());
    for (fa, fb) in sa.iter().zip(sb.iter()) {
        let h2 = diff_weighted(fa, fb, 0);
        let v2 = diff_weighted(fa, fb, 1);
        l_inf_h = l_inf_h.max(h2.sqrt());
        l_inf_v = l_inf_v.max(v2.sqrt());
        v_sq.push(v2);
    }
    let mut quad = Kahan::new();
    for i in 1..v_sq.len() {
        let dt = a.times[i] - a.times[i - 1];
        quad.add(0.5 * dt * (v_sq[i - 1] + v_sq[i]));
    }
    Ok(DifferenceNorms {
        l_inf_h,
        l_inf_v,
        l2_v: quad.value().max(0.0).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbingBallStats {
    /// rho_0 = 1 + ||f||^2 / (nu lambda_1)
    pub rho0: f64,
    /// t_0 = ln(1 + R^2) / (nu lambda_1)
    pub t0: f64,
    /// rho_1 = rho_0 / nu + ||f||^2 / (nu^2 lambda_1)
    pub rho1: f64,
    /// first sample time with energy < rho_0, None if never
    pub entered_at: Option<f64>,
    /// energy stays below rho_0 at every later sample
    pub held: bool,
    /// max over admissible t (>= t_0 + 1) of int_{t-1}^t ||grad u||^2
    pub max_window_enstrophy: f64,
    /// the window integral stays <= rho_1 at all admissible t
    pub window_ok: bool,
}

/// Absorbing-ball statistics for a constant-forcing run. lambda_1 = 1 on
/// this box. R must dominate ||u0||.
pub fn absorbing_ball_stats(
    tr: &TrajectoryRecord,
    nu: f64,
    f_norm: f64,
    r_bound: f64,
) -> Result<AbsorbingBallStats> {
    if !tr.constant_forcing {
        return Err(Error::NonConstantForcing);
    }
    let lambda1 = 1.0;
    let rho0 = 1.0 + f_norm * f_norm / (nu * lambda1);
    let t0 = (1.0 + r_bound * r_bound).ln() / (nu * lambda1);
    let rho1 = rho0 / nu + f_norm * f_norm / (nu * nu * lambda1);

    let mut entered_at = None;
    let mut held = true;
    for i in 0..tr.len() {
        if tr.energy[i] < rho0 {
            if entered_at.is_none() {
                entered_at = Some(tr.times[i]);
            }
        } else if entered_at.is_some() {
            held = false;
        }
    }
    if entered_at.is_none() {
        held = false;
    }

    // windowed enstrophy integral over [t-1, t] by trapezoid on samples
    let mut max_window = 0.0_f64;
    let mut window_ok = true;
    for i in 0..tr.len() {
        let t = tr.times[i];
        if t < t0 + 1.0 {
            continue;
        }
        let t_lo = t - 1.0;
        let mut acc = Kahan::new();
        for j in 1..=i {
            let (ta, tb) = (tr.times[j - 1], tr.times[j]);
            if tb <= t_lo {
                continue;
            }
            let a = ta.max(t_lo);
            // linear interpolation of the left endpoint when the window
            // boundary falls inside the interval
            let ga = if ta < t_lo {
                let w = (t_lo - ta) / (tb - ta);
                tr.grad_energy[j - 1] * (1.0 - w) + tr.grad_energy[j] * w
            } else {
                tr.grad_energy[j - 1]
            };
            acc.add(0.5 * (tb - a) * (ga + tr.grad_energy[j]));
        }
        let w = acc.value();
        max_window = max_window.max(w);
        if w > rho1 {
            window_ok = false;
        }
    }

    Ok(AbsorbingBallStats {
        rho0,
        t0,
        rho1,
        entered_at,
        held,
        max_window_enstrophy: max_window,
        window_ok,
    })
}

/// Largest sampled time t_max with grad_energy(s) <= 2 grad_energy(0) for
/// every sample s <= t_max: the empirical analogue of the uniform gradient
/// window (the analysis constant C_nu is not explicit, so only this
/// surrogate is reported).
pub fn grad_bound_window(tr: &TrajectoryRecord) -> f64 {
    let g0 = tr.grad_energy.first().copied().unwrap_or(0.0);
    let bound = 2.0 * g0;
    let mut t_max = tr.times.first().copied().unwrap_or(0.0);
    for i in 0..tr.len() {
        if tr.grad_energy[i] <= bound {
            t_max = tr.times[i];
        } else {
            break;
        }
    }
    t_max
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Trivial,
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Trivial => "trivial",
            Verdict::Info => "info",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub experiment: String,
    pub param: String,
    pub value: String,
    pub tolerance: String,
    pub verdict: Verdict,
}

/// Per-experiment verification output. The CSV and the printed table carry
/// exactly the same rows.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub name: String,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        Self { name: name.to_string(), rows: Vec::new() }
    }

    pub fn push(&mut self, param: &str, value: String, tolerance: &str, verdict: Verdict) {
        self.rows.push(ReportRow {
            experiment: self.name.clone(),
            param: param.to_string(),
            value,
            tolerance: tolerance.to_string(),
            verdict,
        });
    }

    pub fn info(&mut self, param: &str, value: String) {
        self.push(param, value, "-", Verdict::Info);
    }

    /// True when no row failed.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "experiment,param,value,tolerance,verdict")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                csv_escape(&r.experiment),
                csv_escape(&r.param),
                csv_escape(&r.value),
                csv_escape(&r.tolerance),
                r.verdict.as_str()
            )?;
        }
        Ok(())
    }

    pub fn write_table(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# {}", self.name)?;
        for r in &self.rows {
            writeln!(
                w,
                "{:40} {:28} tol={:16} {}",
                r.param,
                r.value,
                r.tolerance,
                r.verdict.as_str()
            )?;
        }
        Ok(())
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

//! Radial finite-volume integrators for the two evolution equations.
//!
//! Cell `i` surrounds node `r_i`; its faces sit at the midpoints
//! `ρ_i = (r_i + r_{i+1})/2`, with the origin and `r_max` as outer walls. Both
//! flows are written as `A_i ∂_t f_i = 2π(ρ_i F_i − ρ_{i−1} F_{i−1})` with
//! zero flux through the walls, so the cell mass `Σ A_i f_i` is conserved by
//! construction.
//!
//! The nonlinear flow `∂_t f = Δ√f + 2√π ∇·(x f)` (unit mass) uses the face flux
//!
//! ```text
//! F_i = (√f_{i+1} − √f_i)/Δr_i + √π (r_i + r_{i+1}) √(f_i f_{i+1}),
//! ```
//!
//! which vanishes identically on `μ` sampled at the nodes. The semi-implicit
//! scheme freezes `√f` and `√(f_i f_{i+1})` at the previous iterate in the
//! degree-one homogeneous form and solves the resulting tridiagonal system;
//! a few Picard sweeps converge to backward Euler.
//!
//! The drift-diffusion-Poisson flow `∂_t f = ∇·(∇f + f∇Ψ)`, `Ψ = βV + εu`,
//! `−Δu = f`, uses the Scharfetter-Gummel flux, which is exact on `e^{−Ψ}`
//! and keeps the implicit matrix an M-matrix.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{parameter, Error, Result};
use crate::functionals::{dissipation, Coupling, DissipationReport, FunctionalReport};
use crate::greens::inverse_laplacian;
use crate::grid::RadialGrid;
use crate::linalg::solve_tridiagonal;
use crate::profile::{potential_field, Density};

/// Time discretization of the flux balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Linearized backward Euler with Picard sweeps.
    SemiImplicit,
    /// Forward Euler under a diffusive step bound.
    Explicit,
}

/// Which equation is integrated, with its reporting parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowKind {
    /// Nonlinear flow; deficits are recorded at each `α`. The first `α`
    /// drives the dissipation report and `dF/dt`.
    Proof { alphas: Vec<f64> },
    /// Drift-diffusion-Poisson flow; the free energy is recorded.
    Ddp { beta: f64, coupling: Coupling },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub scheme: Scheme,
    pub dt_init: f64,
    /// Upper bound on accepted steps.
    pub dt_max: f64,
    pub t_end: f64,
    /// Fraction of the explicit stability bound used by [`Scheme::Explicit`].
    pub cfl_safety: f64,
    /// Mobility floor, relative to the peak of the initial datum.
    pub floor: f64,
    /// Record every this many accepted steps (the first and last state are always recorded).
    pub record_every: usize,
    pub max_steps: usize,
    pub picard_sweeps: usize,
    /// Steps changing some value by more than this fraction of the peak are retried.
    pub max_relative_change: f64,
    /// Permit attractive runs with `M ≥ 8π`; they end at the concentration guard.
    pub supercritical: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::SemiImplicit,
            dt_init: 1e-7,
            dt_max: 1e-3,
            t_end: 10.0,
            cfl_safety: 0.9,
            floor: 1e-12,
            record_every: 1,
            max_steps: 1_000_000,
            picard_sweeps: 2,
            max_relative_change: 0.01,
            supercritical: false,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init > 0.0) || !(self.dt_max > 0.0) || !(self.t_end > 0.0) {
            return Err(parameter("dt_init, dt_max and t_end must be positive"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(parameter("cfl_safety must lie in (0, 1]"));
        }
        if !(self.floor >= 0.0) {
            return Err(parameter("floor must be nonnegative"));
        }
        if self.record_every == 0 || self.picard_sweeps == 0 || self.max_steps == 0 {
            return Err(parameter("record_every, picard_sweeps and max_steps must be positive"));
        }
        if !(self.max_relative_change > 0.0) {
            return Err(parameter("max_relative_change must be positive"));
        }
        Ok(())
    }
}

/// Recorded history of a run.
#[derive(Debug, Clone, Default)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    /// Cell mass `Σ A_i f_i`, the conserved quantity of the scheme.
    pub mass: Vec<f64>,
    pub reports: Vec<FunctionalReport>,
    /// Proof flow: decomposition at the first `α`. Drift-diffusion flow: the
    /// entropy production `∫ f |∇(log f + Ψ)|²` in `gn_part`.
    pub dissipation: Vec<DissipationReport>,
    /// Centered differences of the tracked functional against time.
    pub dfdt: Vec<f64>,
    pub final_state: Option<Density>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Mass removed by clipping negative values.
    pub clipped_mass: f64,
}

impl FlowTrace {
    /// The functional differenced in `dfdt`.
    pub fn tracked(&self, kind: &FlowKind) -> Vec<f64> {
        self.reports
            .iter()
            .map(|r| match kind {
                FlowKind::Proof { alphas } => r.deficit_at(alphas.first().copied().unwrap_or(0.0)),
                FlowKind::Ddp { .. } => r.free_energy.unwrap_or(f64::NAN),
            })
            .collect()
    }

    fn finish(&mut self, kind: &FlowKind) {
        self.dfdt = time_derivative(&self.times, &self.tracked(kind));
    }
}

/// Why a run stopped early, with everything recorded until then.
#[derive(Debug, Clone)]
pub struct FlowAbort {
    pub error: Error,
    pub trace: FlowTrace,
}

impl From<FlowAbort> for Error {
    fn from(abort: FlowAbort) -> Self {
        abort.error
    }
}

impl core::fmt::Display for FlowAbort {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        self.error.fmt(f)
    }
}

/// Second-order differences on a non-uniform time series, one-sided at the ends.
pub fn time_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            if k == 0 {
                (y[1] - y[0]) / (t[1] - t[0])
            } else if k == n - 1 {
                (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2])
            } else {
                let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
                (h0 * h0 * (y[k + 1] - y[k]) + h1 * h1 * (y[k] - y[k - 1])) / (h0 * h1 * (h0 + h1))
            }
        })
        .collect()
}

/// Control volumes and faces of a grid.
#[derive(Debug, Clone)]
struct Cells {
    volume: Vec<f64>,
    /// `2π ρ_i` for the face between nodes `i` and `i + 1`.
    face: Vec<f64>,
    gap: Vec<f64>,
}

impl Cells {
    fn new(grid: &RadialGrid) -> Self {
        let r = grid.nodes();
        let n = r.len();
        let rho: Vec<f64> = r.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let volume = (0..n)
            .map(|i| {
                let outer = if i + 1 < n { rho[i] } else { r[n - 1] };
                let inner = if i == 0 { 0.0 } else { rho[i - 1] };
                PI * (outer * outer - inner * inner)
            })
            .collect();
        Self {
            volume,
            face: rho.iter().map(|p| 2.0 * PI * p).collect(),
            gap: r.windows(2).map(|w| w[1] - w[0]).collect(),
        }
    }

    fn mass(&self, f: &[f64]) -> f64 {
        self.volume.iter().zip(f).map(|(a, v)| a * v).sum()
    }

    /// Face fluxes `F_i = p_i f_{i+1} − q_i f_i`, assembled into
    /// `(A/dt − L) f = A f_old / dt` and solved.
    fn implicit_step(&self, old: &[f64], p: &[f64], q: &[f64], dt: f64) -> Option<Vec<f64>> {
        let n = old.len();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            diag[i] = self.volume[i] / dt;
            rhs[i] = self.volume[i] * old[i] / dt;
            if i + 1 < n {
                diag[i] += self.face[i] * q[i];
                upper[i] = -self.face[i] * p[i];
            }
            if i > 0 {
                diag[i] += self.face[i - 1] * p[i - 1];
                lower[i] = -self.face[i - 1] * q[i - 1];
            }
        }
        solve_tridiagonal(&lower, &diag, &upper, &rhs)
    }

    fn explicit_step(&self, old: &[f64], flux: &[f64], dt: f64) -> Vec<f64> {
        let n = old.len();
        (0..n)
            .map(|i| {
                let out = if i + 1 < n { self.face[i] * flux[i] } else { 0.0 };
                let inn = if i > 0 { self.face[i - 1] * flux[i - 1] } else { 0.0 };
                old[i] + dt * (out - inn) / self.volume[i]
            })
            .collect()
    }

    /// Largest forward-Euler step for the linear fluxes `(p, q)`.
    fn explicit_bound(&self, p: &[f64], q: &[f64]) -> f64 {
        let n = self.volume.len();
        (0..n)
            .map(|i| {
                let mut rate = 0.0;
                if i + 1 < n {
                    rate += self.face[i] * q[i].max(0.0);
                }
                if i > 0 {
                    rate += self.face[i - 1] * p[i - 1].max(0.0);
                }
                if rate > 0.0 {
                    self.volume[i] / rate
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `x / (e^x − 1)`.
fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

/// Linearized coefficients of the nonlinear flux around `a` (already floored).
fn proof_coefficients(r: &[f64], gap: &[f64], a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = gap.len();
    let root_pi = PI.sqrt();
    let mut p = vec![0.0; m];
    let mut q = vec![0.0; m];
    for i in 0..m {
        let (sa, sb) = (a[i].sqrt(), a[i + 1].sqrt());
        let c = 0.5 * root_pi * (r[i] + r[i + 1]);
        p[i] = 1.0 / (gap[i] * sb) + c * sa / sb;
        q[i] = 1.0 / (gap[i] * sa) - c * sb / sa;
    }
    (p, q)
}

fn proof_flux(r: &[f64], gap: &[f64], f: &[f64]) -> Vec<f64> {
    let root_pi = PI.sqrt();
    (0..gap.len())
        .map(|i| {
            (f[i + 1].sqrt() - f[i].sqrt()) / gap[i] + root_pi * (r[i] + r[i + 1]) * (f[i] * f[i + 1]).sqrt()
        })
        .collect()
}

fn drift_coefficients(gap: &[f64], psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = gap.len();
    let mut p = vec![0.0; m];
    let mut q = vec![0.0; m];
    for i in 0..m {
        let d = psi[i + 1] - psi[i];
        p[i] = bernoulli(-d) / gap[i];
        q[i] = bernoulli(d) / gap[i];
    }
    (p, q)
}

/// Clips negatives, returning the removed cell mass.
fn clip(cells: &Cells, f: &mut [f64]) -> f64 {
    let mut removed = 0.0;
    for (v, a) in f.iter_mut().zip(&cells.volume) {
        if *v < 0.0 {
            removed -= *v * a;
            *v = 0.0;
        }
    }
    removed
}

fn check_step(cells: &Cells, old: &[f64], new: &[f64], max_change: f64) -> Result<()> {
    if new.iter().any(|v| !v.is_finite()) {
        return Err(Error::StepRejected("non-finite value".into()));
    }
    let (m0, m1) = (cells.mass(old), cells.mass(new));
    if (m1 - m0).abs() > 1e-8 * m0 {
        return Err(Error::StepRejected(alloc::format!("mass drift {}", m1 - m0)));
    }
    let peak = old.iter().fold(0.0f64, |m, v| m.max(*v));
    let change = old.iter().zip(new).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if change > max_change * peak {
        return Err(Error::StepRejected(alloc::format!("relative change {}", change / peak)));
    }
    Ok(())
}

/// State of a single integrator, independent of how steps are scheduled.
struct Stepper {
    grid: Arc<RadialGrid>,
    cells: Cells,
    scheme: Scheme,
    sweeps: usize,
    max_change: f64,
    law: Law,
}

enum Law {
    /// Unit-mass nonlinear flow with an absolute mobility floor.
    Proof { floor: f64 },
    /// `Ψ = β V + ε u`; the tail exponent is used when rebuilding densities for `u`.
    Ddp { beta_v: Vec<f64>, epsilon: f64, tail: Option<f64> },
}

impl Stepper {
    fn potential(&self, f: &[f64]) -> Result<Vec<f64>> {
        let Law::Ddp { beta_v, epsilon, tail } = &self.law else {
            unreachable!("potential is only used by the drift-diffusion flow")
        };
        if *epsilon == 0.0 {
            return Ok(beta_v.clone());
        }
        let density = Density::with_tail(self.grid.clone(), f.to_vec(), *tail)?;
        let u = inverse_laplacian(&density)?.u;
        Ok(beta_v.iter().zip(u.values()).map(|(v, u)| v + epsilon * u).collect())
    }

    /// One step; returns the new values and the clipped mass.
    fn step(&self, f: &[f64], dt: f64) -> Result<(Vec<f64>, f64)> {
        let r = self.grid.nodes();
        let gap = &self.cells.gap;
        let mut new = match self.scheme {
            Scheme::SemiImplicit => {
                let mut iterate = f.to_vec();
                for _ in 0..self.sweeps {
                    let (p, q) = match &self.law {
                        Law::Proof { floor } => {
                            let a: Vec<f64> = iterate.iter().map(|v| v.max(*floor)).collect();
                            proof_coefficients(r, gap, &a)
                        }
                        Law::Ddp { .. } => drift_coefficients(gap, &self.potential(&iterate)?),
                    };
                    iterate = self
                        .cells
                        .implicit_step(f, &p, &q, dt)
                        .ok_or_else(|| Error::StepRejected("singular implicit system".into()))?;
                    if matches!(self.law, Law::Proof { .. }) {
                        for v in iterate.iter_mut() {
                            *v = v.max(0.0);
                        }
                    }
                }
                // The last sweep is kept as solved; clipping is accounted below.
                iterate
            }
            Scheme::Explicit => {
                let (flux, bound) = match &self.law {
                    Law::Proof { floor } => {
                        let a: Vec<f64> = f.iter().map(|v| v.max(*floor)).collect();
                        let (p, q) = proof_coefficients(r, gap, &a);
                        (proof_flux(r, gap, f), self.cells.explicit_bound(&p, &q))
                    }
                    Law::Ddp { .. } => {
                        let (p, q) = drift_coefficients(gap, &self.potential(f)?);
                        let flux = (0..gap.len()).map(|i| p[i] * f[i + 1] - q[i] * f[i]).collect();
                        (flux, self.cells.explicit_bound(&p, &q))
                    }
                };
                if dt > bound {
                    return Err(Error::StepRejected(alloc::format!("dt {dt} exceeds explicit bound {bound}")));
                }
                self.cells.explicit_step(f, &flux, dt)
            }
        };
        let clipped = clip(&self.cells, &mut new);
        check_step(&self.cells, f, &new, self.max_change)?;
        Ok((new, clipped))
    }

    fn explicit_limit(&self, f: &[f64]) -> Result<f64> {
        let r = self.grid.nodes();
        let gap = &self.cells.gap;
        let (p, q) = match &self.law {
            Law::Proof { floor } => {
                let a: Vec<f64> = f.iter().map(|v| v.max(*floor)).collect();
                proof_coefficients(r, gap, &a)
            }
            Law::Ddp { .. } => drift_coefficients(gap, &self.potential(f)?),
        };
        Ok(self.cells.explicit_bound(&p, &q))
    }
}

fn proof_stepper(grid: &Arc<RadialGrid>, scheme: Scheme, floor: f64, sweeps: usize, max_change: f64) -> Stepper {
    Stepper {
        grid: grid.clone(),
        cells: Cells::new(grid),
        scheme,
        sweeps,
        max_change,
        law: Law::Proof { floor },
    }
}

fn equilibrium_tail(grid: &RadialGrid, mass: f64, beta: f64, epsilon: f64) -> Option<f64> {
    let p = 4.0 * beta - epsilon * mass / (2.0 * PI);
    if p > 2.5 {
        Some(p)
    } else {
        grid.tail_exponent()
    }
}

fn ddp_stepper(f: &Density, beta: f64, coupling: Coupling, sweeps: usize, scheme: Scheme) -> Stepper {
    let grid = f.grid();
    let v = potential_field(grid);
    let epsilon = coupling.epsilon();
    Stepper {
        grid: grid.clone(),
        cells: Cells::new(grid),
        scheme,
        sweeps,
        max_change: f64::INFINITY,
        law: Law::Ddp {
            beta_v: v.values().iter().map(|x| beta * x).collect(),
            epsilon,
            tail: equilibrium_tail(grid, f.mass(), beta, epsilon),
        },
    }
}

/// One semi-implicit step of the nonlinear flow.
///
/// The flow is posed for unit mass; `f` is normalized, advanced and scaled
/// back, so `M μ` is stationary for every `M`.
pub fn step_proof_flow(f: &Density, dt: f64) -> Result<Density> {
    step_proof_flow_with(f, dt, &FlowConfig::default())
}

/// As [`step_proof_flow`] with explicit scheme parameters.
pub fn step_proof_flow_with(f: &Density, dt: f64, config: &FlowConfig) -> Result<Density> {
    if !(dt > 0.0) {
        return Err(parameter("dt must be positive"));
    }
    let m = f.mass();
    let g: Vec<f64> = f.values().iter().map(|v| v / m).collect();
    let peak = g.iter().fold(0.0f64, |a, v| a.max(*v));
    let stepper = proof_stepper(f.grid(), config.scheme, config.floor * peak, config.picard_sweeps, f64::INFINITY);
    let (new, _) = stepper.step(&g, dt)?;
    Density::with_tail(f.grid().clone(), new.iter().map(|v| v * m).collect(), f.tail_exponent())
}

/// One step of the drift-diffusion-Poisson flow with the potential lagged per sweep.
pub fn step_ddp_flow(f: &Density, beta: f64, coupling: Coupling, dt: f64) -> Result<Density> {
    step_ddp_flow_with(f, beta, coupling, dt, &FlowConfig::default())
}

pub fn step_ddp_flow_with(
    f: &Density,
    beta: f64,
    coupling: Coupling,
    dt: f64,
    config: &FlowConfig,
) -> Result<Density> {
    if !(dt > 0.0) {
        return Err(parameter("dt must be positive"));
    }
    check_ddp(f.mass(), beta, coupling, config)?;
    let stepper = ddp_stepper(f, beta, coupling, config.picard_sweeps, config.scheme);
    let (new, _) = stepper.step(f.values(), dt)?;
    let tail = stepper_tail(&stepper);
    Density::with_tail(f.grid().clone(), new, tail)
}

fn stepper_tail(stepper: &Stepper) -> Option<f64> {
    match &stepper.law {
        Law::Ddp { tail, .. } => *tail,
        Law::Proof { .. } => stepper.grid.tail_exponent(),
    }
}

fn check_ddp(mass: f64, beta: f64, coupling: Coupling, config: &FlowConfig) -> Result<()> {
    if !beta.is_finite() {
        return Err(parameter("beta must be finite"));
    }
    if coupling == Coupling::Attractive && mass >= 8.0 * PI && !config.supercritical {
        return Err(parameter(alloc::format!(
            "attractive flow with M = {mass} ≥ 8π needs the supercritical opt-in"
        )));
    }
    Ok(())
}

/// Integrates the nonlinear flow to `t_end`, recording deficits at each `α`.
pub fn run_proof_flow(
    f0: &Density,
    config: &FlowConfig,
    alphas: &[f64],
) -> core::result::Result<FlowTrace, FlowAbort> {
    run_flow(f0, &FlowKind::Proof { alphas: alphas.to_vec() }, config)
}

/// Integrates the drift-diffusion-Poisson flow to `t_end`, recording the free energy.
pub fn run_ddp_flow(
    f0: &Density,
    beta: f64,
    coupling: Coupling,
    config: &FlowConfig,
) -> core::result::Result<FlowTrace, FlowAbort> {
    run_flow(f0, &FlowKind::Ddp { beta, coupling }, config)
}

pub fn run_flow(f0: &Density, kind: &FlowKind, config: &FlowConfig) -> core::result::Result<FlowTrace, FlowAbort> {
    let abort = |error: Error, mut trace: FlowTrace| {
        trace.finish(kind);
        FlowAbort { error, trace }
    };
    if let Err(e) = config.validate() {
        return Err(abort(e, FlowTrace::default()));
    }
    let grid = f0.grid().clone();
    let m = f0.mass();
    // The nonlinear flow evolves f/M; reports are taken on M·state.
    let (scale, stepper, tail) = match kind {
        FlowKind::Proof { alphas } => {
            if let Some(a) = alphas.iter().find(|a| !(**a >= 0.0)) {
                return Err(abort(parameter(alloc::format!("alpha = {a} must be nonnegative")), FlowTrace::default()));
            }
            let peak = f0.sup_norm() / m;
            let stepper = proof_stepper(&grid, config.scheme, config.floor * peak, config.picard_sweeps, config.max_relative_change);
            (m, stepper, f0.tail_exponent())
        }
        FlowKind::Ddp { beta, coupling } => {
            if let Err(e) = check_ddp(m, *beta, *coupling, config) {
                return Err(abort(e, FlowTrace::default()));
            }
            let mut stepper = ddp_stepper(f0, *beta, *coupling, config.picard_sweeps, config.scheme);
            stepper.max_change = config.max_relative_change;
            let tail = stepper_tail(&stepper);
            (1.0, stepper, tail)
        }
    };
    let mut state: Vec<f64> = f0.values().iter().map(|v| v / scale).collect();
    let initial_peak = state.iter().fold(0.0f64, |a, v| a.max(*v));

    let mut trace = FlowTrace::default();
    let record = |trace: &mut FlowTrace, t: f64, state: &[f64]| -> Result<()> {
        let values: Vec<f64> = state.iter().map(|v| v * scale).collect();
        let density = Density::with_tail(grid.clone(), values, tail)?;
        let (report, diss) = match kind {
            FlowKind::Proof { alphas } => {
                let report = FunctionalReport::evaluate(&density, alphas, None)?;
                let unit = Density::with_tail(grid.clone(), state.to_vec(), tail)?;
                let alpha = alphas.first().copied().unwrap_or(0.0);
                (report, dissipation(&unit, alpha)?.scaled(scale))
            }
            FlowKind::Ddp { beta, coupling } => {
                let report = FunctionalReport::evaluate(&density, &[], Some((*beta, *coupling)))?;
                let production = entropy_production(&density, *beta, *coupling)?;
                let diss = DissipationReport { alpha: 0.0, gn_part: production, phi_part: 0.0, convexity: 0.0 };
                (report, diss)
            }
        };
        trace.times.push(t);
        trace.mass.push(stepper.cells.mass(state) * scale);
        trace.reports.push(report);
        trace.dissipation.push(diss);
        trace.final_state = Some(density);
        Ok(())
    };
    if let Err(e) = record(&mut trace, 0.0, &state) {
        return Err(abort(e, trace));
    }

    let mut t = 0.0;
    let mut dt = config.dt_init.min(config.dt_max);
    let mut attempts = 0usize;
    let mut since_record = 0usize;
    let t_end = config.t_end;
    while t < t_end * (1.0 - 1e-14) {
        if attempts >= config.max_steps {
            return Err(abort(Error::Integration { time: t, steps: attempts }, trace));
        }
        attempts += 1;
        let mut h = dt.min(t_end - t);
        if config.scheme == Scheme::Explicit {
            match stepper.explicit_limit(&state) {
                Ok(limit) => h = h.min(config.cfl_safety * limit),
                Err(e) => return Err(abort(e, trace)),
            }
        }
        match stepper.step(&state, h) {
            Ok((new, clipped)) => {
                state = new;
                t += h;
                trace.clipped_mass += clipped * scale;
                trace.accepted_steps += 1;
                since_record += 1;
                let peak = state.iter().fold(0.0f64, |a, v| a.max(*v));
                if peak > 1e6 * initial_peak {
                    return Err(abort(Error::BlowUp { time: t, peak: peak * scale }, trace));
                }
                let last = t >= t_end * (1.0 - 1e-14);
                if since_record >= config.record_every || last {
                    since_record = 0;
                    if let Err(e) = record(&mut trace, t, &state) {
                        return Err(abort(e, trace));
                    }
                }
                dt = (1.2 * dt.max(h)).min(config.dt_max);
            }
            Err(Error::StepRejected(_)) => {
                trace.rejected_steps += 1;
                dt = 0.5 * h;
                if dt < 1e-15 * t_end.max(1.0) {
                    return Err(abort(Error::Integration { time: t, steps: attempts }, trace));
                }
            }
            Err(e) => return Err(abort(e, trace)),
        }
    }
    trace.finish(kind);
    Ok(trace)
}

/// `∫ f |∇(log f + βV + εu)|²`, the dissipation rate of the free energy.
pub fn entropy_production(f: &Density, beta: f64, coupling: Coupling) -> Result<f64> {
    let grid = f.grid();
    let v = potential_field(grid);
    let u = inverse_laplacian(f)?.u;
    let eps = coupling.epsilon();
    // Where f underflows the integrand is negligible; keep the log finite.
    let chem: Vec<f64> = f
        .values()
        .iter()
        .zip(v.values().iter().zip(u.values()))
        .map(|(&x, (&v, &u))| x.max(1e-280).ln() + beta * v + eps * u)
        .collect();
    let grad = grid.derivative(&chem);
    let integrand: Vec<f64> = f.values().iter().zip(&grad).map(|(x, g)| x * g * g).collect();
    grid.integrate(&integrand, crate::grid::Tail::fitted(grid, &integrand))
}

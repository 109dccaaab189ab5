//! Stationary states of the repulsive drift-diffusion-Poisson problem.
//!
//! A stationary density satisfies `f = M e^{−βV−φ}/Z` with `−Δφ = f`. Since
//! `φ ~ −(M/2π) log r`, writing `ψ = (M/8π) V + φ` and `γ = β − M/(8π)` gives a
//! bounded `ψ` solving
//!
//! ```text
//! −Δψ = M (e^{−γV−ψ}/∫e^{−γV−ψ} − μ),
//! ```
//!
//! the Euler-Lagrange equation of the convex functional
//! `J[ψ] = ½∫|∇ψ|² + M∫ψμ + M log ∫e^{−γV−ψ}`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, numeric, parameter, Result};
use crate::greens::inverse_laplacian;
use crate::grid::{RadialGrid, Tail};
use crate::profile::{potential_field, reference_density, Density, Field, Profile};

pub const DEFAULT_DAMPING: f64 = 0.5;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct StationaryResult {
    pub f_stat: Density,
    /// `φ = (−Δ)^{-1} f_stat`.
    pub phi_stat: Field,
    /// `sup |f − M e^{−βV−φ}/Z|` at the last iterate.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub beta: f64,
    /// `β ≥ 1 + M/(8π)`, the range where the free energy is known to be convex.
    pub in_regime: bool,
}

impl StationaryResult {
    pub fn mass(&self) -> f64 {
        self.f_stat.mass()
    }

    /// `γ = β − M/(8π)`.
    pub fn gamma(&self) -> f64 {
        self.beta - self.mass() / (8.0 * PI)
    }

    /// `ψ = (M/8π) V + φ`, bounded at infinity.
    pub fn reduced_potential(&self) -> Result<Field> {
        let v = potential_field(self.f_stat.grid());
        let values = v
            .values()
            .iter()
            .zip(self.phi_stat.values())
            .map(|(v, phi)| self.mass() / (8.0 * PI) * v + phi)
            .collect();
        Field::new(self.f_stat.grid().clone(), values, None)
    }
}

/// Decay exponent of `e^{−βV−φ}` for a source of mass `mass`.
fn tail_exponent(mass: f64, beta: f64) -> f64 {
    4.0 * beta - mass / (2.0 * PI)
}

/// `M e^{−Ψ}/∫e^{−Ψ}` with the exponent shifted by its minimum.
fn gibbs(grid: &RadialGrid, psi: &[f64], mass: f64, tail: f64) -> Result<Vec<f64>> {
    let low = psi.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = psi.iter().map(|p| (low - p).exp()).collect();
    let z = grid.integrate(&weights, Tail::Power(tail))?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(numeric("partition function is not positive and finite"));
    }
    Ok(weights.iter().map(|w| mass * w / z).collect())
}

/// Damped Picard iteration from `M μ`.
pub fn solve_stationary(
    grid: &Arc<RadialGrid>,
    mass: f64,
    beta: f64,
    damping: f64,
    max_iter: usize,
) -> Result<StationaryResult> {
    let start = Profile::Reference.density(grid, mass)?.with_mass(mass)?;
    solve_stationary_from(&start, beta, damping, max_iter)
}

/// Damped Picard iteration `f ← (1−θ) f + θ M e^{−βV−φ[f]}/Z` from a given start;
/// the mass of `start` is kept.
pub fn solve_stationary_from(
    start: &Density,
    beta: f64,
    damping: f64,
    max_iter: usize,
) -> Result<StationaryResult> {
    let mass = start.mass();
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(parameter("damping must lie in (0, 1]"));
    }
    if !beta.is_finite() {
        return Err(parameter("beta must be finite"));
    }
    let p = tail_exponent(mass, beta);
    if !(p > 2.0) {
        return Err(domain(alloc::format!("e^(-βV-φ) is not integrable (decay exponent {p})")));
    }
    let grid = start.grid().clone();
    let beta_v: Vec<f64> = potential_field(&grid).values().iter().map(|v| beta * v).collect();
    let mut f = Density::with_tail(grid.clone(), start.values().to_vec(), Some(p))?.with_mass(mass)?;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut phi = inverse_laplacian(&f)?.u;
    while iterations < max_iter {
        let psi: Vec<f64> = beta_v.iter().zip(phi.values()).map(|(a, b)| a + b).collect();
        let target = gibbs(&grid, &psi, mass, p)?;
        residual = f.values().iter().zip(&target).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if residual <= DEFAULT_TOLERANCE * f.sup_norm() {
            converged = true;
            break;
        }
        let mixed = f.values().iter().zip(&target).map(|(a, b)| (1.0 - damping) * a + damping * b).collect();
        f = Density::with_tail(grid.clone(), mixed, Some(p))?;
        phi = inverse_laplacian(&f)?.u;
        iterations += 1;
    }
    Ok(StationaryResult {
        f_stat: f,
        phi_stat: phi,
        residual,
        iterations,
        converged,
        beta,
        in_regime: beta >= 1.0 + mass / (8.0 * PI),
    })
}

fn check_gamma(gamma: f64, mass: f64) -> Result<()> {
    if !(gamma > 0.5) {
        return Err(domain(alloc::format!("γ = {gamma} ≤ 1/2 makes e^(-γV) non-integrable")));
    }
    if !(mass > 0.0) {
        return Err(domain("mass must be positive"));
    }
    Ok(())
}

/// Pieces shared by `J` and the reduced residual: `h = ψ − ψ(0)`, the
/// μ-normalized mean of `h` and `log ∫ e^{−γV−h}`.
struct Reduced {
    h: Vec<f64>,
    mean: f64,
    log_z: f64,
    z_mu: f64,
    weights: Vec<f64>,
    mu: Vec<f64>,
}

fn reduced(psi: &Field, gamma: f64) -> Result<Reduced> {
    if matches!(psi.far_field(), Some(c) if c != 0.0) {
        return Err(domain("ψ must be bounded"));
    }
    let grid = psi.grid();
    let shift = psi.values()[0];
    let h: Vec<f64> = psi.values().iter().map(|v| v - shift).collect();
    let v = potential_field(grid);
    let mu = grid.sample(reference_density);
    let z_mu = grid.integrate(&mu, Tail::Power(4.0))?;
    let weighted: Vec<f64> = mu.iter().zip(&h).map(|(m, x)| m * x).collect();
    let mean = grid.integrate(&weighted, Tail::Power(4.0))? / z_mu;
    let exponent: Vec<f64> = v.values().iter().zip(&h).map(|(v, x)| -gamma * v - x).collect();
    let low = exponent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponent.iter().map(|e| (e - low).exp()).collect();
    let z = grid.integrate(&weights, Tail::Power(4.0 * gamma))?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(numeric("∫ e^(-γV-ψ) is not positive and finite"));
    }
    let weights = weights.iter().map(|w| w / z).collect();
    Ok(Reduced { h, mean, log_z: z.ln() + low, z_mu, weights, mu })
}

/// `J[ψ] = ½∫|∇ψ|² + M∫ψμ + M log ∫e^{−γV−ψ}`, with `∫μ` normalized by the
/// same quadrature so that constants cancel exactly.
pub fn j_functional(psi: &Field, mass: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma, mass)?;
    let parts = reduced(psi, gamma)?;
    let h = Field::new(psi.grid().clone(), parts.h, None)?;
    let dirichlet = h.dirichlet_energy()?;
    Ok(0.5 * dirichlet + mass * (parts.mean + parts.log_z - parts.z_mu.ln()))
}

/// `−Δψ − M (e^{−γV−ψ}/Z − μ)` on the grid.
pub fn residual_reduced_equation(psi: &Field, mass: f64, gamma: f64) -> Result<Field> {
    check_gamma(gamma, mass)?;
    let parts = reduced(psi, gamma)?;
    let lap = psi.laplacian();
    let values = lap
        .iter()
        .zip(parts.weights.iter().zip(&parts.mu))
        .map(|(l, (w, m))| -l - mass * (w - m / parts.z_mu))
        .collect();
    Field::new(psi.grid().clone(), values, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_solves_the_reduced_equation_at_unit_gamma() {
        let g = Arc::new(RadialGrid::standard());
        let zero = Field::new(g.clone(), alloc::vec![0.0; g.len()], None).unwrap();
        let res = residual_reduced_equation(&zero, 3.0, 1.0).unwrap();
        assert!(res.values().iter().all(|v| v.abs() < 1e-14));
        assert!(j_functional(&zero, 3.0, 1.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn gamma_guard() {
        let g = Arc::new(RadialGrid::build(64, 10.0, 2.0).unwrap());
        let zero = Field::new(g.clone(), alloc::vec![0.0; g.len()], None).unwrap();
        assert!(j_functional(&zero, 1.0, 0.5).is_err());
        assert!(solve_stationary(&g, 1.0, 0.4, 0.5, 10).is_err());
    }

    #[test]
    fn converges_with_exact_mass() {
        let g = Arc::new(RadialGrid::standard());
        let beta = 1.0 + 1.0 / (8.0 * PI);
        let s = solve_stationary(&g, 1.0, beta, 0.5, 500).unwrap();
        assert!(s.converged, "{}", s.residual);
        assert!(s.in_regime);
        assert!((s.mass() - 1.0).abs() < 1e-10, "{}", s.mass());
    }
}

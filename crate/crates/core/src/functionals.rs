//! Scalar functionals of radial densities.
//!
//! All deficits are assembled from the same four components (entropy,
//! potential energy, interaction, mass), so the deficit of the generalized
//! inequality is affine in `α` up to round-off:
//!
//! ```text
//! deficit(α) = ∫ f log(f/M) + α ∫ V f + M (1−α)(1 + log π) + (2/M)(1−α) ∬ f f log|x−y|
//!            = (1−α) deficit(0) + α ∫ f log(f/(Mμ)).
//! ```

use alloc::vec::Vec;
use core::f64::consts::PI;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Result};
use crate::greens::interaction_integral;
use crate::grid::{RadialGrid, Tail};
use crate::profile::{potential_field, reference_density, Density, Field, Profile};

/// Values below this are treated as this inside logarithms.
pub const LOG_FLOOR: f64 = 1e-300;

/// Sign of the Poisson coupling `−ε Δφ = f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// `ε = +1`, electrostatic.
    Repulsive,
    /// `ε = −1`, gravitational / chemotactic.
    Attractive,
}

impl Coupling {
    pub fn epsilon(self) -> f64 {
        match self {
            Coupling::Repulsive => 1.0,
            Coupling::Attractive => -1.0,
        }
    }

    pub fn from_epsilon(eps: f64) -> Result<Self> {
        if eps == 1.0 {
            Ok(Coupling::Repulsive)
        } else if eps == -1.0 {
            Ok(Coupling::Attractive)
        } else {
            Err(domain("epsilon must be +1 or -1"))
        }
    }
}

/// `x log x`, extended by 0 at 0.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.max(LOG_FLOOR).ln()
    }
}

/// `∫ f log f`.
pub fn boltzmann_entropy(f: &Density) -> Result<f64> {
    let v: Vec<f64> = f.values().iter().map(|&x| xlogx(x)).collect();
    let last = f.values()[v.len() - 1];
    let tail = match f.tail_exponent() {
        Some(p) => Tail::LogPower { exponent: p, slope: -p * last },
        None => Tail::None,
    };
    f.grid().integrate(&v, tail)
}

/// `∫ W f`.
pub fn potential_energy(f: &Density, w: &Field) -> Result<f64> {
    f.integrate_against(w)
}

/// `∫ f log(f/(Mμ))`.
pub fn relative_entropy(f: &Density) -> Result<f64> {
    let entropy = boltzmann_entropy(f)?;
    let potential = potential_energy(f, &potential_field(f.grid()))?;
    let m = f.mass();
    Ok(entropy - m * m.ln() + potential)
}

/// All energy components of one density.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalReport {
    pub mass: f64,
    pub entropy: f64,
    pub relative_entropy: f64,
    pub potential: f64,
    pub interaction: f64,
    /// `(α, deficit(α))` pairs.
    pub deficits: Vec<(f64, f64)>,
    pub free_energy: Option<f64>,
}

impl FunctionalReport {
    /// Evaluates the components, the requested deficits and, when
    /// `free_energy` is given as `(β, coupling)`, the free energy with `V`.
    pub fn evaluate(f: &Density, alphas: &[f64], free_energy: Option<(f64, Coupling)>) -> Result<Self> {
        if let Some(a) = alphas.iter().find(|a| !(**a >= 0.0)) {
            return Err(domain(alloc::format!("alpha = {a} is outside [0, ∞)")));
        }
        let mass = f.mass();
        let entropy = boltzmann_entropy(f)?;
        let potential = potential_energy(f, &potential_field(f.grid()))?;
        let interaction = interaction_integral(f)?;
        let relative_entropy = entropy - mass * mass.ln() + potential;
        let parts = Components { mass, entropy, potential, interaction };
        let deficits = alphas.iter().map(|&a| (a, parts.deficit(a))).collect();
        let free_energy = free_energy.map(|(beta, c)| parts.free_energy(beta, c));
        Ok(Self { mass, entropy, relative_entropy, potential, interaction, deficits, free_energy })
    }

    pub fn deficit(&self, alpha: f64) -> Option<f64> {
        self.deficits.iter().find(|(a, _)| *a == alpha).map(|(_, d)| *d)
    }

    /// Recomputes a deficit from the stored components.
    pub fn deficit_at(&self, alpha: f64) -> f64 {
        Components {
            mass: self.mass,
            entropy: self.entropy,
            potential: self.potential,
            interaction: self.interaction,
        }
        .deficit(alpha)
    }
}

#[derive(Debug, Clone, Copy)]
struct Components {
    mass: f64,
    entropy: f64,
    potential: f64,
    interaction: f64,
}

impl Components {
    fn deficit(&self, alpha: f64) -> f64 {
        let m = self.mass;
        self.entropy - m * m.ln()
            + alpha * self.potential
            + m * (1.0 - alpha) * (1.0 + PI.ln())
            + 2.0 / m * (1.0 - alpha) * self.interaction
    }

    /// `(1/2)∫φf` with `φ = ε (−Δ)^{-1} f` equals `−ε/(4π) ∬ f f log|x−y|`.
    fn free_energy(&self, beta: f64, coupling: Coupling) -> f64 {
        self.entropy + beta * self.potential - coupling.epsilon() / (4.0 * PI) * self.interaction
    }
}

/// Left minus right side of the generalized log-HLS inequality.
pub fn loghls_deficit(f: &Density, alpha: f64) -> Result<f64> {
    let report = FunctionalReport::evaluate(f, &[alpha], None)?;
    Ok(report.deficits[0].1)
}

/// `F_{β,W}[f] = ∫ f log f + β ∫ W f + (1/2)∫ φ f`, with `W = V` when absent.
pub fn free_energy(f: &Density, beta: f64, coupling: Coupling, w: Option<&Field>) -> Result<f64> {
    if !beta.is_finite() {
        return Err(domain("beta must be finite"));
    }
    let entropy = boltzmann_entropy(f)?;
    let potential = match w {
        Some(w) => potential_energy(f, w)?,
        None => potential_energy(f, &potential_field(f.grid()))?,
    };
    let interaction = interaction_integral(f)?;
    Ok(Components { mass: f.mass(), entropy, potential, interaction }.free_energy(beta, coupling))
}

/// `‖∇g‖₂² ‖g‖₄⁴ − π ‖g‖₆⁶`.
pub fn gn_deficit(g: &Field) -> Result<f64> {
    let (lhs, rhs) = gn_sides(g)?;
    Ok(lhs - rhs)
}

/// `(‖∇g‖₂² ‖g‖₄⁴, π ‖g‖₆⁶)`.
pub fn gn_sides(g: &Field) -> Result<(f64, f64)> {
    let grid = g.grid();
    let grad = g.dirichlet_energy()?;
    let quartic = g.map(|x| x.powi(4));
    let sextic = g.map(|x| x.powi(6));
    let l4 = grid.integrate(&quartic, Tail::fitted(grid, &quartic))?;
    let l6 = grid.integrate(&sextic, Tail::fitted(grid, &sextic))?;
    Ok((grad * l4, PI * l6))
}

/// `φ(t) = t^{3/2} − t − √t + 1`, convex on `[0, ∞)` with `φ(1) = φ'(1) = 0`.
pub fn convexity_gap(t: f64) -> f64 {
    let s = t.sqrt();
    t * s - t - s + 1.0
}

/// The two nonnegative parts of the entropy production along the
/// nonlinear flow, `dF/dt = −(gn_part + phi_part)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationReport {
    pub alpha: f64,
    /// `8(∫|∇f^{1/4}|² − (π/M)∫f^{3/2})`.
    pub gn_part: f64,
    /// `8πα ∫ φ(f/μ) μ^{3/2}`.
    pub phi_part: f64,
    /// `∫ φ(f/μ) μ^{3/2}`.
    pub convexity: f64,
}

impl DissipationReport {
    pub fn total(&self) -> f64 {
        -self.gn_part - self.phi_part
    }

    /// Same state, different `α`.
    pub fn at_alpha(&self, alpha: f64) -> Self {
        Self { alpha, phi_part: 8.0 * PI * alpha * self.convexity, ..*self }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            alpha: self.alpha,
            gn_part: c * self.gn_part,
            phi_part: c * self.phi_part,
            convexity: c * self.convexity,
        }
    }
}

/// Dissipation decomposition of the deficit along the nonlinear flow.
pub fn dissipation(f: &Density, alpha: f64) -> Result<DissipationReport> {
    if !(alpha >= 0.0) {
        return Err(domain("alpha must be nonnegative"));
    }
    let grid = f.grid();
    let quarter: Vec<f64> = f.values().iter().map(|v| v.sqrt().sqrt()).collect();
    let grad_sq: Vec<f64> = grid.derivative(&quarter).iter().map(|d| d * d).collect();
    let p = f.tail_exponent();
    let grad_tail = p.map_or(Tail::None, |p| Tail::Power(0.5 * p + 2.0));
    let dirichlet = grid.integrate(&grad_sq, grad_tail)?;
    let three_halves: Vec<f64> = f.values().iter().map(|v| v * v.sqrt()).collect();
    let l32 = grid.integrate(&three_halves, f.tail_of_power(1.5))?;
    let gn_part = 8.0 * (dirichlet - PI / f.mass() * l32);

    let gap: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(f.values())
        .map(|(&r, &v)| {
            let mu = reference_density(r);
            convexity_gap(v / mu) * mu * mu.sqrt()
        })
        .collect();
    let gap_tail = p.map_or(Tail::None, |p| Tail::Power((1.5 * p).min(4.0 + 0.5 * p).min(2.0 + p).min(6.0)));
    let convexity = grid.integrate(&gap, gap_tail)?;
    Ok(DissipationReport { alpha, gn_part, phi_part: 8.0 * PI * alpha * convexity, convexity })
}

/// Gap of the dual inequality:
/// `M/(16π(1−α)) ∫|∇g|² + M ∫ g e^{−V} − M log ∫ e^{g−V}`.
///
/// `e^{−V} = μ` is renormalized by its quadrature so that constants give
/// exactly zero.
pub fn onofri_gap(g: &Field, alpha: f64, mass: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(domain("alpha must lie in [0, 1) for the dual inequality"));
    }
    if !(mass > 0.0) {
        return Err(domain("mass must be positive"));
    }
    if matches!(g.far_field(), Some(c) if c != 0.0) {
        return Err(domain("dual inequality requires a bounded test function"));
    }
    let grid = g.grid();
    let shift = g.values()[0];
    let h: Vec<f64> = g.values().iter().map(|v| v - shift).collect();
    let mu = grid.sample(reference_density);
    let weighted: Vec<f64> = mu.iter().zip(&h).map(|(m, x)| m * x).collect();
    let exp_weighted: Vec<f64> = mu.iter().zip(&h).map(|(m, x)| m * x.exp()).collect();
    let tail = Tail::Power(4.0);
    let norm = grid.integrate(&mu, tail)?;
    let mean = grid.integrate(&weighted, tail)? / norm;
    let log_mean_exp = grid.integrate(&exp_weighted, tail)?.ln() - norm.ln();
    let dirichlet = Field::new(grid.clone(), h, g.far_field())?.dirichlet_energy()?;
    Ok(mass * (dirichlet / (16.0 * PI * (1.0 - alpha)) + mean - log_mean_exp))
}

/// Free energies of the dilations `f_λ` of a profile of mass `mass`.
pub fn scaling_curve(
    profile: &Profile,
    mass: f64,
    grid: &alloc::sync::Arc<RadialGrid>,
    beta: f64,
    coupling: Coupling,
    lambdas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(domain("dilation factor must be positive"));
            }
            let f = profile.dilated(lambda)?.density(grid, mass)?;
            Ok((lambda, free_energy(&f, beta, coupling, None)?))
        })
        .collect()
}

/// Least-squares slope of `F` against `log λ`.
pub fn log_slope(curve: &[(f64, f64)]) -> f64 {
    let n = curve.len() as f64;
    let xs: Vec<f64> = curve.iter().map(|(l, _)| l.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = curve.iter().map(|c| c.1).sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(curve).map(|(x, c)| (x - mx) * (c.1 - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;

    #[test]
    fn convexity_gap_properties() {
        assert_eq!(convexity_gap(1.0), 0.0);
        let h = 1e-5;
        assert!(((convexity_gap(1.0 + h) - convexity_gap(1.0 - h)) / (2.0 * h)).abs() < 1e-9);
        for t in [0.0, 0.5, 2.0, 10.0] {
            assert!(convexity_gap(t) > 0.0);
        }
        let ts: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).collect();
        for w in ts.windows(3) {
            let second = convexity_gap(w[0]) - 2.0 * convexity_gap(w[1]) + convexity_gap(w[2]);
            assert!(second >= -1e-15);
        }
    }

    #[test]
    fn coupling_sign() {
        assert_eq!(Coupling::from_epsilon(1.0).unwrap(), Coupling::Repulsive);
        assert_eq!(Coupling::from_epsilon(-1.0).unwrap().epsilon(), -1.0);
        assert!(Coupling::from_epsilon(0.0).is_err());
    }

    #[test]
    fn negative_alpha_is_a_domain_error() {
        let g = Arc::new(RadialGrid::build(256, 50.0, 3.0).unwrap());
        let f = Profile::Reference.density(&g, 1.0).unwrap();
        assert!(matches!(loghls_deficit(&f, -0.1), Err(crate::Error::Domain(_))));
        assert!(dissipation(&f, -1.0).is_err());
    }

    #[test]
    fn onofri_rejects_out_of_range_alpha() {
        let g = Arc::new(RadialGrid::build(256, 50.0, 3.0).unwrap());
        let zero = Field::new(g.clone(), alloc::vec![0.0; g.len()], None).unwrap();
        assert!(onofri_gap(&zero, 1.0, 1.0).is_err());
        assert_eq!(onofri_gap(&zero, 0.0, 1.0).unwrap(), 0.0);
        let c = Field::new(g.clone(), alloc::vec![3.25; g.len()], None).unwrap();
        assert_eq!(onofri_gap(&c, 0.5, 2.0).unwrap(), 0.0);
        let unbounded = Field::from_fn(&g, |r| (r * r).ln_1p(), Some(2.0)).unwrap();
        assert!(onofri_gap(&unbounded, 0.0, 1.0).is_err());
    }
}

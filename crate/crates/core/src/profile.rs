//! Radial profiles: densities, fields, the reference pair and test densities.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, parameter, Error, Result};
use crate::grid::{RadialGrid, Tail};

/// `μ(r) = 1/(π(1+r²)²)`.
pub fn reference_density(r: f64) -> f64 {
    let s = 1.0 + r * r;
    1.0 / (PI * s * s)
}

/// `V(r) = −log μ(r) = 2 log(1+r²) + log π`.
pub fn reference_potential(r: f64) -> f64 {
    2.0 * (r * r).ln_1p() + PI.ln()
}

/// Far-field coefficient of `V ~ 4 log r`.
pub const REFERENCE_FAR_FIELD: f64 = 4.0;

/// Nonnegative radial profile with its recorded mass.
#[derive(Debug, Clone)]
pub struct Density {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    mass: f64,
    tail_exponent: Option<f64>,
}

impl Density {
    /// Wraps nodal values; the mass is their quadrature including the grid's
    /// default power-law tail.
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        let tail_exponent = grid.tail_exponent();
        Self::with_tail(grid, values, tail_exponent)
    }

    /// As [`Density::new`] with an explicit decay exponent beyond `r_max`.
    pub fn with_tail(grid: Arc<RadialGrid>, values: Vec<f64>, tail_exponent: Option<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(parameter("density length does not match grid"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(domain(alloc::format!("density value {bad} is negative or non-finite")));
        }
        if let Some(p) = tail_exponent {
            if !(p > 2.0) {
                return Err(parameter("density tail exponent must exceed 2"));
            }
        }
        let tail = tail_exponent.map_or(Tail::None, Tail::Power);
        let mass = grid.integrate(&values, tail)?;
        if !(mass > 0.0) {
            return Err(domain("density has zero mass"));
        }
        Ok(Self { grid, values, mass, tail_exponent })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn tail_exponent(&self) -> Option<f64> {
        self.tail_exponent
    }

    /// Power-law tail of `f^k`.
    pub fn tail_of_power(&self, k: f64) -> Tail {
        self.tail_exponent.map_or(Tail::None, |p| Tail::Power(k * p))
    }

    /// Tail of `f · g` where `g ~ slope_coeff · log r` at infinity.
    pub fn tail_of_product(&self, far_field: Option<f64>) -> Tail {
        match (self.tail_exponent, far_field) {
            (None, _) => Tail::None,
            (Some(p), None) => Tail::Power(p),
            (Some(p), Some(c)) => Tail::LogPower { exponent: p, slope: c * self.last() },
        }
    }

    /// Mass carried by the tail beyond `r_max`.
    pub fn tail_mass(&self) -> f64 {
        self.tail_of_power(1.0).integral(self.grid.r_max(), self.last())
    }

    /// `∫ f g dx`.
    pub fn integrate_against(&self, g: &Field) -> Result<f64> {
        let product: Vec<f64> = self.values.iter().zip(g.values()).map(|(a, b)| a * b).collect();
        self.grid.integrate(&product, self.tail_of_product(g.far_field()))
    }

    /// `c · f`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| c * v).collect();
        Self::with_tail(self.grid.clone(), values, self.tail_exponent)
    }

    /// Same shape rescaled to mass `m`.
    pub fn with_mass(&self, m: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(parameter("mass must be positive"));
        }
        self.scaled(m / self.mass)
    }

    /// `∫ |f − g| dx`, both on the same grid.
    pub fn l1_distance(&self, other: &Density) -> Result<f64> {
        let diff: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).collect();
        let tail = match (self.tail_exponent, other.tail_exponent) {
            (Some(p), Some(q)) => Tail::Power(p.min(q)),
            _ => Tail::None,
        };
        self.grid.integrate(&diff, tail)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(*v))
    }

    /// `∫ |x|² f dx`.
    pub fn second_moment(&self) -> Result<f64> {
        let v: Vec<f64> = self.grid.nodes().iter().zip(&self.values).map(|(r, f)| r * r * f).collect();
        self.grid.integrate(&v, Tail::None)
    }

    fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Scalar radial profile without mass semantics.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    far_field: Option<f64>,
}

impl Field {
    /// `far_field = Some(c)` records `field ~ c log r` beyond `r_max`.
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, far_field: Option<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(parameter("field length does not match grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("field values must be finite"));
        }
        Ok(Self { grid, values, far_field })
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, g: impl Fn(f64) -> f64, far_field: Option<f64>) -> Result<Self> {
        let values = grid.sample(g);
        Self::new(grid.clone(), values, far_field)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn far_field(&self) -> Option<f64> {
        self.far_field
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        let far_field = match (self.far_field, other.far_field) {
            (None, None) => None,
            (x, y) => Some(a * x.unwrap_or(0.0) + b * y.unwrap_or(0.0)),
        };
        Field::new(self.grid.clone(), values, far_field)
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        self.values.iter().map(|&v| g(v)).collect()
    }

    pub fn gradient(&self) -> Vec<f64> {
        self.grid.derivative(&self.values)
    }

    pub fn laplacian(&self) -> Vec<f64> {
        self.grid.laplacian(&self.values)
    }

    /// `∫ |∇g|² dx`. A logarithmic far field makes this diverge.
    pub fn dirichlet_energy(&self) -> Result<f64> {
        if matches!(self.far_field, Some(c) if c != 0.0) {
            return Err(domain("gradient energy diverges for a logarithmic far field"));
        }
        let sq: Vec<f64> = self.gradient().iter().map(|d| d * d).collect();
        let tail = Tail::fitted(&self.grid, &sq);
        self.grid.integrate(&sq, tail)
    }
}

/// The optimizer `μ` (mass 1) and its potential `V = −log μ`.
#[derive(Debug, Clone)]
pub struct ReferencePair {
    pub mu: Density,
    pub v: Field,
}

impl ReferencePair {
    pub fn new(grid: &Arc<RadialGrid>) -> Self {
        let mu = Density::new(grid.clone(), grid.sample(reference_density))
            .expect("reference density is positive");
        let v = Field::from_fn(grid, reference_potential, Some(REFERENCE_FAR_FIELD))
            .expect("reference potential is finite");
        Self { mu, v }
    }

    /// `f⋆ = M μ`.
    pub fn optimizer(&self, mass: f64) -> Result<Density> {
        self.mu.scaled(mass)
    }
}

/// `V` sampled on a grid.
pub fn potential_field(grid: &Arc<RadialGrid>) -> Field {
    Field::from_fn(grid, reference_potential, Some(REFERENCE_FAR_FIELD)).expect("finite")
}

/// Standard test densities. Closed-form profiles are sampled exactly; bumps
/// and custom profiles are normalized by quadrature.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `exp(−r²/2σ²)/(2πσ²)`.
    Gaussian { sigma: f64 },
    /// `μ`.
    Reference,
    /// `μ_λ(x) = λ^{-2} μ(x/λ)`.
    DilatedReference { lambda: f64 },
    /// Smooth bump supported in the annulus `inner ≤ r ≤ outer`.
    Bump { inner: f64, outer: f64 },
    /// Normalized Gaussian mixture `Σ c_k exp(−r²/2σ_k²)/(2πσ_k²)` with `Σ c_k = 1`.
    Mixture(Vec<(f64, f64)>),
    /// Arbitrary nonnegative nodal values.
    Custom(Vec<f64>),
}

impl Profile {
    /// The profile dilated by `λ`: `f_λ(x) = λ^{-2} f(x/λ)`.
    pub fn dilated(&self, lambda: f64) -> Result<Profile> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(domain("dilation factor must be positive"));
        }
        Ok(match self {
            Profile::Gaussian { sigma } => Profile::Gaussian { sigma: sigma * lambda },
            Profile::Reference => Profile::DilatedReference { lambda },
            Profile::DilatedReference { lambda: l } => Profile::DilatedReference { lambda: l * lambda },
            Profile::Bump { inner, outer } => Profile::Bump { inner: inner * lambda, outer: outer * lambda },
            Profile::Mixture(parts) => Profile::Mixture(parts.iter().map(|&(c, s)| (c, s * lambda)).collect()),
            Profile::Custom(_) => return Err(domain("custom profiles cannot be dilated")),
        })
    }

    /// Unit-mass closed form, when one exists.
    pub fn unit_value(&self, r: f64) -> Option<f64> {
        match *self {
            Profile::Gaussian { sigma } => Some(gaussian(sigma, r)),
            Profile::Reference => Some(reference_density(r)),
            Profile::DilatedReference { lambda } => {
                let s = lambda * lambda + r * r;
                Some(lambda * lambda / (PI * s * s))
            }
            Profile::Mixture(ref parts) => Some(parts.iter().map(|&(c, s)| c * gaussian(s, r)).sum()),
            Profile::Bump { .. } | Profile::Custom(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Profile::Gaussian { sigma } => *sigma > 0.0 && sigma.is_finite(),
            Profile::Reference => true,
            Profile::DilatedReference { lambda } => *lambda > 0.0 && lambda.is_finite(),
            Profile::Bump { inner, outer } => *inner > 0.0 && outer > inner && outer.is_finite(),
            Profile::Mixture(parts) => {
                !parts.is_empty()
                    && parts.iter().all(|&(c, s)| c >= 0.0 && s > 0.0 && s.is_finite())
                    && (parts.iter().map(|p| p.0).sum::<f64>() - 1.0).abs() < 1e-12
            }
            Profile::Custom(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(parameter(alloc::format!("invalid profile parameters: {self:?}")))
        }
    }

    /// Density of mass `mass` on `grid`.
    pub fn density(&self, grid: &Arc<RadialGrid>, mass: f64) -> Result<Density> {
        self.validate()?;
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(parameter("mass must be positive"));
        }
        if let Some(_) = self.unit_value(0.0) {
            let values = grid.sample(|r| mass * self.unit_value(r).unwrap_or(0.0));
            return Density::new(grid.clone(), values);
        }
        let shape = match self {
            Profile::Bump { inner, outer } => grid.sample(|r| bump(*inner, *outer, r)),
            Profile::Custom(values) => {
                if values.iter().any(|v| *v < 0.0) {
                    return Err(domain("custom density has negative values"));
                }
                values.clone()
            }
            _ => unreachable!(),
        };
        let raw = Density::new(grid.clone(), shape).map_err(|e| match e {
            Error::Domain(_) => domain("profile is not resolved by the grid"),
            other => other,
        })?;
        raw.with_mass(mass)
    }
}

fn gaussian(sigma: f64, r: f64) -> f64 {
    let s2 = sigma * sigma;
    (-0.5 * r * r / s2).exp() / (2.0 * PI * s2)
}

fn bump(inner: f64, outer: f64, r: f64) -> f64 {
    if r <= inner || r >= outer {
        return 0.0;
    }
    let half = 0.5 * (outer - inner);
    let s = (r - inner) * (outer - r) / (half * half);
    (1.0 - 1.0 / s).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::standard())
    }

    #[test]
    fn reference_pair_closed_forms() {
        let g = grid();
        let pair = ReferencePair::new(&g);
        assert!((pair.mu.values()[0] - 1.0 / PI).abs() < 1e-15);
        assert!((pair.v.values()[0] - PI.ln()).abs() < 1e-15);
        assert!((reference_density(1.0) - 0.25 / PI).abs() < 1e-16);
        assert!((reference_potential(1.0) - (2.0 * 2.0f64.ln() + PI.ln())).abs() < 1e-14);
        for (m, v) in pair.mu.values().iter().zip(pair.v.values()) {
            assert!((v + m.ln()).abs() <= 1e-13 * v.abs().max(1.0));
        }
        assert!((pair.mu.mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dilation_preserves_mass() {
        // Wide enough that the dilated tail at r_max is already r^-4.
        let g = Arc::new(RadialGrid::build(4096, 2000.0, 6.0).unwrap());
        let base = Profile::Reference.density(&g, 1.0).unwrap().mass();
        for lambda in [0.1, 1.0, 10.0] {
            let d = Profile::Reference.dilated(lambda).unwrap().density(&g, 1.0).unwrap();
            assert!((d.mass() - base).abs() < 1e-7, "{lambda}: {}", d.mass());
        }
    }

    #[test]
    fn bump_is_normalized_and_supported() {
        let g = grid();
        let d = Profile::Bump { inner: 0.5, outer: 2.0 }.density(&g, 3.0).unwrap();
        assert!((d.mass() - 3.0).abs() < 1e-10);
        for (r, v) in g.nodes().iter().zip(d.values()) {
            if *r <= 0.5 || *r >= 2.0 {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let g = grid();
        let mut neg = alloc::vec![1.0; g.len()];
        neg[3] = -1.0;
        assert!(matches!(Profile::Custom(neg).density(&g, 1.0), Err(Error::Domain(_))));
        assert!(Profile::Gaussian { sigma: -1.0 }.density(&g, 1.0).is_err());
        assert!(Profile::Reference.density(&g, 0.0).is_err());
        assert!(Profile::Reference.dilated(0.0).is_err());
        assert!(Density::new(g.clone(), alloc::vec![0.0; g.len()]).is_err());
    }
}

//! The logarithmic Green function of `−Δ` on the plane, for radial sources.
//!
//! With `M(r)` the mass inside radius `r` and `Q(r) = M − M(r)` the mass
//! outside, the log convolution `L(r) = ∫ log|x−y| f(y) dy` of a radial density
//! satisfies `L'(r) = M(r)/r` and
//!
//! ```text
//! L(r) = M log r + ∫_r^∞ Q(s)/s ds.
//! ```
//!
//! Outside the median radius the second form is used directly; inside it `L`
//! is integrated inwards with `L(r) = L(r_k) − ∫_r^{r_k} M(s)/s ds`. Both
//! integrands are smooth, and no additive constant appears at infinity, so
//! `(−Δ)^{-1} f = −L/(2π)` behaves like `−(M/2π) log r` for large `r`.

use alloc::vec::Vec;
use core::f64::consts::PI;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Result};
use crate::profile::{Density, Field};

/// `u = (−Δ)^{-1} f` together with the source mass.
#[derive(Debug, Clone)]
pub struct PotentialSolution {
    pub u: Field,
    pub mass: f64,
}

impl PotentialSolution {
    /// Coefficient of `log r` in `u` at infinity.
    pub fn far_field(&self) -> f64 {
        -self.mass / (2.0 * PI)
    }
}

/// `L(r) = ∫ log|x−y| f(y) dy`, with far field `M log r`.
pub fn log_convolution(f: &Density) -> Result<Field> {
    let grid = f.grid();
    let r = grid.nodes();
    let n = r.len();
    let values = f.values();
    let total = f.mass();
    if !(total > 0.0) {
        return Err(domain("zero-mass source"));
    }
    let tail_mass = f.tail_mass();
    let inner = grid.cumulative_area(values);
    let outer = grid.outer_area(values);

    // Split at the median radius, but keep the inner integration stencils away
    // from the origin sample of Q/s.
    let split = inner.partition_point(|&m| m < 0.5 * total).clamp(2, n - 1);

    let outside: Vec<f64> = (0..n)
        .map(|j| if j == 0 { 0.0 } else { (outer[j] + tail_mass) / r[j] })
        .collect();
    let inside: Vec<f64> = (0..n).map(|j| if j == 0 { 0.0 } else { inner[j] / r[j] }).collect();

    let mut out = alloc::vec![0.0; n];
    // ∫_R^∞ Q(s)/s ds with Q(s) = Q(R) (R/s)^{p−2}.
    let mut acc = match f.tail_exponent() {
        Some(p) => tail_mass / (p - 2.0),
        None => 0.0,
    };
    out[n - 1] = total * r[n - 1].ln() + acc;
    for j in (split..n - 1).rev() {
        acc += grid.interval_line(j, &outside);
        out[j] = total * r[j].ln() + acc;
    }
    let mut inward = 0.0;
    for j in (0..split).rev() {
        inward += grid.interval_line(j, &inside);
        out[j] = out[split] - inward;
    }
    Field::new(grid.clone(), out, Some(total))
}

/// `(−Δ)^{-1} f = G * f` with `G(x) = −log|x|/(2π)`.
pub fn inverse_laplacian(f: &Density) -> Result<PotentialSolution> {
    let l = log_convolution(f)?;
    let scale = -1.0 / (2.0 * PI);
    let u = l.values().iter().map(|v| scale * v).collect();
    let mass = f.mass();
    Ok(PotentialSolution {
        u: Field::new(f.grid().clone(), u, Some(scale * mass))?,
        mass,
    })
}

/// `∬ f(x) f(y) log|x−y| dx dy`.
pub fn interaction_integral(f: &Density) -> Result<f64> {
    let l = log_convolution(f)?;
    f.integrate_against(&l)
}

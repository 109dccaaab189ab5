//! Radial grids on `[0, r_max]`.
//!
//! Integrals over the plane of radial functions reduce to `∫ v(r) 2πr dr`. The
//! quadrature integrates, on every interval `[r_j, r_{j+1}]`, the cubic through
//! four neighbouring nodes against the exact measure. Polynomials of degree ≤ 3
//! in `r` are therefore integrated exactly on any grid, and the nodal weights
//! are the sums of the interval contributions. Cumulative integrals use the
//! same interval contributions, so partial sums and totals agree to round-off.
//!
//! Beyond `r_max` an integrand can be extended by a power-law (or
//! power-law-times-logarithm) [`Tail`] which is integrated analytically.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

// Supplies float math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{numeric, parameter, Result};
use crate::linalg::{fd_weights, lagrange};

/// Decay model of an integrand beyond `r_max = R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Truncate at `R`.
    None,
    /// `v(r) = v(R) (R/r)^p`.
    Power(f64),
    /// `v(r) = (R/r)^p (v(R) + slope · log(r/R))`.
    LogPower { exponent: f64, slope: f64 },
}

impl Tail {
    /// `∫_R^∞ v(r) 2πr dr` given the boundary value `v(R)`.
    pub fn integral(self, r_max: f64, boundary: f64) -> f64 {
        let scale = 2.0 * PI * r_max * r_max;
        match self {
            Tail::None => 0.0,
            Tail::Power(p) => {
                if boundary == 0.0 {
                    0.0
                } else if p <= 2.0 {
                    f64::INFINITY
                } else {
                    scale * boundary / (p - 2.0)
                }
            }
            Tail::LogPower { exponent: p, slope } => {
                if boundary == 0.0 && slope == 0.0 {
                    0.0
                } else if p <= 2.0 {
                    f64::INFINITY
                } else {
                    scale * (boundary / (p - 2.0) + slope / ((p - 2.0) * (p - 2.0)))
                }
            }
        }
    }

    /// Power-law tail with the decay rate read off the last two samples.
    ///
    /// Falls back to [`Tail::None`] when the samples do not decay like a power
    /// faster than `r^{-2}`.
    pub fn fitted(grid: &RadialGrid, values: &[f64]) -> Tail {
        let n = values.len();
        let (a, b) = (values[n - 2], values[n - 1]);
        if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
            return Tail::None;
        }
        let r = grid.nodes();
        let p = (a / b).ln() / (r[n - 1] / r[n - 2]).ln();
        if p.is_finite() && p > 2.5 {
            Tail::Power(p)
        } else {
            Tail::None
        }
    }
}

/// Four `(node, coefficient)` pairs integrating one interval.
type IntervalRule = [(usize, f64); 4];
/// Five `(node, coefficient)` pairs of a finite-difference stencil.
type Stencil = [(usize, f64); 5];

/// Nodes `0 = r_0 < r_1 < … < r_N = r_max` with quadrature weights for the
/// planar measure and fourth-order radial difference operators.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    r_max: f64,
    tail_exponent: Option<f64>,
    area: Vec<IntervalRule>,
    line: Vec<IntervalRule>,
    gradient: Vec<Stencil>,
    laplacian: Vec<Stencil>,
}

pub const MIN_NODES: usize = 8;
pub const DEFAULT_NODES: usize = 2048;
pub const DEFAULT_RMAX: f64 = 200.0;
pub const DEFAULT_STRETCH: f64 = 3.0;
pub const DEFAULT_TAIL_EXPONENT: f64 = 4.0;

impl RadialGrid {
    /// Graded grid `r(ξ) = r_max sinh(κξ)/sinh(κ)` on a uniform `ξ` lattice,
    /// with `κ = 3 (stretch − 1)`. `stretch = 1` is the uniform grid; larger
    /// values cluster nodes geometrically near the origin.
    pub fn build(n: usize, r_max: f64, stretch: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(parameter(alloc::format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        if !r_max.is_finite() || r_max <= 0.0 {
            return Err(parameter("r_max must be finite and positive"));
        }
        if !stretch.is_finite() || stretch < 1.0 {
            return Err(parameter("stretch must be finite and at least 1"));
        }
        let kappa = 3.0 * (stretch - 1.0);
        let last = n - 1;
        let mut nodes: Vec<f64> = (0..n)
            .map(|i| {
                let xi = i as f64 / last as f64;
                if kappa == 0.0 {
                    r_max * xi
                } else {
                    r_max * (kappa * xi).sinh() / kappa.sinh()
                }
            })
            .collect();
        nodes[last] = r_max;
        Self::from_nodes(nodes)
    }

    /// The default laboratory grid (2048 nodes, `r_max = 200`, stretch 3).
    pub fn standard() -> Self {
        Self::build(DEFAULT_NODES, DEFAULT_RMAX, DEFAULT_STRETCH).expect("default grid is valid")
    }

    /// Grid on explicit nodes; `nodes[0]` must be 0 and the sequence strictly increasing.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if n < MIN_NODES {
            return Err(parameter(alloc::format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        if nodes[0] != 0.0 {
            return Err(parameter("first node must be the origin"));
        }
        if nodes.iter().any(|r| !r.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(parameter("nodes must be finite and strictly increasing"));
        }
        let r_max = nodes[n - 1];
        let area: Vec<IntervalRule> =
            (0..n - 1).map(|j| interval_rule(&nodes, j, |r| 2.0 * PI * r)).collect();
        let line: Vec<IntervalRule> = (0..n - 1).map(|j| interval_rule(&nodes, j, |_| 1.0)).collect();
        let mut weights = vec![0.0; n];
        for rule in &area {
            for &(k, c) in rule {
                weights[k] += c;
            }
        }
        let (gradient, laplacian) = difference_stencils(&nodes);
        Ok(Self {
            nodes,
            weights,
            r_max,
            tail_exponent: Some(DEFAULT_TAIL_EXPONENT),
            area,
            line,
            gradient,
            laplacian,
        })
    }

    /// Same nodes with a different default tail exponent (`None` truncates at `r_max`).
    pub fn with_tail_exponent(mut self, tail_exponent: Option<f64>) -> Self {
        self.tail_exponent = tail_exponent;
        self
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Decay power assumed for densities beyond `r_max`.
    pub fn tail_exponent(&self) -> Option<f64> {
        self.tail_exponent
    }

    /// Index of the last node with `r ≤ radius`.
    pub fn index_below(&self, radius: f64) -> usize {
        self.nodes.partition_point(|&r| r <= radius).saturating_sub(1)
    }

    /// `Σ w_i v_i + tail`, i.e. `∫ v dx` over the plane.
    pub fn integrate(&self, values: &[f64], tail: Tail) -> Result<f64> {
        self.check_len(values)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(numeric("non-finite integrand"));
        }
        let total = self.sum(values) + tail.integral(self.r_max, values[values.len() - 1]);
        if total.is_finite() {
            Ok(total)
        } else {
            Err(numeric("integral diverges"))
        }
    }

    /// Quadrature over `[0, r_max]` without checks or tail.
    pub fn sum(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// `∫_{r_j}^{r_{j+1}} v 2πr dr`.
    pub fn interval_area(&self, j: usize, values: &[f64]) -> f64 {
        self.area[j].iter().map(|&(k, c)| c * values[k]).sum()
    }

    /// `∫_{r_j}^{r_{j+1}} v dr`.
    pub fn interval_line(&self, j: usize, values: &[f64]) -> f64 {
        self.line[j].iter().map(|&(k, c)| c * values[k]).sum()
    }

    /// `C_j = ∫_0^{r_j} v 2πr dr` at every node.
    pub fn cumulative_area(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for j in 0..self.len() - 1 {
            out[j + 1] = out[j] + self.interval_area(j, values);
        }
        out
    }

    /// `∫_{r_j}^{r_max} v 2πr dr` at every node, accumulated from the outer end.
    pub fn outer_area(&self, values: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for j in (0..n - 1).rev() {
            out[j] = out[j + 1] + self.interval_area(j, values);
        }
        out
    }

    /// First radial derivative, fourth order, with `v'(0) = 0`.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        apply(&self.gradient, values)
    }

    /// Radial Laplacian `v'' + v'/r` (`2 v''(0)` at the origin), fourth order.
    pub fn laplacian(&self, values: &[f64]) -> Vec<f64> {
        apply(&self.laplacian, values)
    }

    /// Samples `g(r)` at every node.
    pub fn sample(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&r| g(r)).collect()
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() == self.len() {
            Ok(())
        } else {
            Err(parameter(alloc::format!(
                "expected {} samples, got {}",
                self.len(),
                values.len()
            )))
        }
    }
}

fn apply(stencils: &[Stencil], values: &[f64]) -> Vec<f64> {
    stencils
        .iter()
        .map(|s| s.iter().map(|&(k, c)| c * values[k]).sum())
        .collect()
}

/// Integrates the cubic interpolant through four nodes around interval `j`
/// against `density(r) dr` with three-point Gauss-Legendre (exact here).
fn interval_rule(nodes: &[f64], j: usize, density: impl Fn(f64) -> f64) -> IntervalRule {
    let last = nodes.len() - 1;
    let start = if j == 0 {
        0
    } else if j + 2 > last {
        last - 3
    } else {
        j - 1
    };
    let xs = [nodes[start], nodes[start + 1], nodes[start + 2], nodes[start + 3]];
    let (a, b) = (nodes[j], nodes[j + 1]);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let offset = half * (0.6f64).sqrt();
    let gauss = [(mid - offset, 5.0 / 9.0), (mid, 8.0 / 9.0), (mid + offset, 5.0 / 9.0)];
    let mut rule = [(0usize, 0.0f64); 4];
    for (m, slot) in rule.iter_mut().enumerate() {
        let c: f64 = gauss
            .iter()
            .map(|&(x, w)| w * half * density(x) * lagrange(&xs, m, x))
            .sum();
        *slot = (start + m, c);
    }
    rule
}

/// Five-point stencils at every node. Near the origin the even extension
/// `v(−r) = v(r)` supplies ghost samples.
fn difference_stencils(nodes: &[f64]) -> (Vec<Stencil>, Vec<Stencil>) {
    let n = nodes.len();
    let last = n - 1;
    let mut gradient = Vec::with_capacity(n);
    let mut laplacian = Vec::with_capacity(n);
    for i in 0..n {
        let (xs, idx): ([f64; 5], [usize; 5]) = match i {
            0 => ([-nodes[2], -nodes[1], 0.0, nodes[1], nodes[2]], [2, 1, 0, 1, 2]),
            1 => ([-nodes[1], 0.0, nodes[1], nodes[2], nodes[3]], [1, 0, 1, 2, 3]),
            _ if i + 2 <= last => (
                [nodes[i - 2], nodes[i - 1], nodes[i], nodes[i + 1], nodes[i + 2]],
                [i - 2, i - 1, i, i + 1, i + 2],
            ),
            _ => (
                [nodes[last - 4], nodes[last - 3], nodes[last - 2], nodes[last - 1], nodes[last]],
                [last - 4, last - 3, last - 2, last - 1, last],
            ),
        };
        let w = fd_weights(nodes[i], &xs, 2);
        let mut g = [(0usize, 0.0f64); 5];
        let mut l = [(0usize, 0.0f64); 5];
        for k in 0..5 {
            if i == 0 {
                g[k] = (idx[k], 0.0);
                l[k] = (idx[k], 2.0 * w[2][k]);
            } else {
                g[k] = (idx[k], w[1][k]);
                l[k] = (idx[k], w[2][k] + w[1][k] / nodes[i]);
            }
        }
        gradient.push(g);
        laplacian.push(l);
    }
    (gradient, laplacian)
}

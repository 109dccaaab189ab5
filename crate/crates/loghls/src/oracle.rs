//! Slow, independent checks on the radial machinery.
//!
//! The Cartesian oracle samples a density on a uniform square patch and sums
//! `f_a f_b log|x_a − x_b|` over all pairs of cells. Pairs of distinct cells use
//! the centers; a cell paired with itself uses the exact mean of `log|x−y|`
//! over two independent uniform points of a square of side `h`,
//!
//! ```text
//! log h + π/3 + (log 2)/3 − 25/12.
//! ```

use std::f64::consts::PI;

use loghls_core::grid::Tail;
use loghls_core::profile::reference_potential;
use loghls_core::{Coupling, Density, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HarnessError, Result};

pub const MAX_PATCH: usize = 128;

/// Mean of `log|x − y|` for `x, y` independent and uniform in a square of side `h`.
pub fn self_cell_log_mean(h: f64) -> f64 {
    h.ln() + PI / 3.0 + 2f64.ln() / 3.0 - 25.0 / 12.0
}

/// `n × n` cells covering `[−L, L]²`, row-major, values at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianPatch {
    n: usize,
    half_width: f64,
    values: Vec<f64>,
}

impl CartesianPatch {
    pub fn from_fn(n: usize, half_width: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if n == 0 || n > MAX_PATCH {
            return Err(HarnessError::Usage(format!(
                "patch size {n} outside 1..={MAX_PATCH}; the double sum is O(n^4)"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(HarnessError::Usage("patch half-width must be positive".into()));
        }
        let h = 2.0 * half_width / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            let y = -half_width + (i as f64 + 0.5) * h;
            for j in 0..n {
                let x = -half_width + (j as f64 + 0.5) * h;
                let v = f(x, y);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(HarnessError::Usage(format!("patch value {v} at ({x}, {y}) is not a density")));
                }
                values.push(v);
            }
        }
        Ok(Self { n, half_width, values })
    }

    /// A closed-form radial profile of mass `mass`, centered at `(shift, 0)`.
    pub fn radial(profile: &Profile, mass: f64, n: usize, half_width: f64, shift: f64) -> Result<Self> {
        if profile.unit_value(0.0).is_none() {
            return Err(HarnessError::Usage(format!("{profile:?} has no closed form to sample")));
        }
        Self::from_fn(n, half_width, |x, y| {
            mass * profile.unit_value((x - shift).hypot(y)).unwrap_or(0.0)
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cell(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell() * self.cell()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn center(&self, k: usize) -> (f64, f64) {
        let h = self.cell();
        let (i, j) = (k / self.n, k % self.n);
        (-self.half_width + (j as f64 + 0.5) * h, -self.half_width + (i as f64 + 0.5) * h)
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn entropy(&self) -> f64 {
        self.values.iter().filter(|v| **v > 0.0).map(|v| v * v.ln()).sum::<f64>() * self.cell_area()
    }

    /// `∫ W f` with `W` evaluated at cell centers.
    pub fn moment(&self, w: impl Fn(f64, f64) -> f64) -> f64 {
        let area = self.cell_area();
        (0..self.values.len())
            .filter(|&k| self.values[k] > 0.0)
            .map(|k| {
                let (x, y) = self.center(k);
                self.values[k] * w(x, y)
            })
            .sum::<f64>()
            * area
    }

    /// `∬ f f log|x−y|` by the direct double sum.
    pub fn interaction(&self) -> f64 {
        let n = self.n;
        let h = self.cell();
        // log of the center distance for every index offset.
        let mut kernel = vec![0.0; n * n];
        for di in 0..n {
            for dj in 0..n {
                kernel[di * n + dj] = if di == 0 && dj == 0 {
                    self_cell_log_mean(h)
                } else {
                    h.ln() + 0.5 * ((di * di + dj * dj) as f64).ln()
                };
            }
        }
        let occupied: Vec<(usize, usize, f64)> = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(k, v)| (k / n, k % n, *v))
            .collect();
        let mut total = 0.0;
        for &(ia, ja, fa) in &occupied {
            let mut row = 0.0;
            for &(ib, jb, fb) in &occupied {
                row += fb * kernel[ia.abs_diff(ib) * n + ja.abs_diff(jb)];
            }
            total += fa * row;
        }
        let area = self.cell_area();
        total * area * area
    }

    /// `∫ f log f + β ∫ V f − (ε/4π) ∬ f f log|x−y|`.
    pub fn free_energy(&self, beta: f64, coupling: Coupling) -> f64 {
        let potential = self.moment(|x, y| reference_potential(x.hypot(y)));
        self.entropy() + beta * potential - coupling.epsilon() / (4.0 * PI) * self.interaction()
    }
}

/// Monte-Carlo estimate of `∬ f f log|x−y|` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Samples radii from the cumulative mass profile of `f` (power-law tail
/// beyond `r_max`) and uniform angles.
pub fn monte_carlo_interaction(f: &Density, samples: usize, seed: u64) -> Result<MonteCarlo> {
    if samples < 2 {
        return Err(HarnessError::Usage("need at least two samples".into()));
    }
    let grid = f.grid();
    let r = grid.nodes();
    let cumulative = grid.cumulative_area(f.values());
    let mass = f.mass();
    let tail_exponent = match f.tail_of_power(1.0) {
        Tail::Power(p) => Some(p),
        _ => None,
    };
    let inside = cumulative[cumulative.len() - 1];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> (f64, f64) {
        let u = rng.random::<f64>() * mass;
        let radius = if u < inside {
            let k = cumulative.partition_point(|&c| c <= u).clamp(1, r.len() - 1);
            let (c0, c1) = (cumulative[k - 1], cumulative[k]);
            let s = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
            // Uniform in area within the annulus.
            (r[k - 1] * r[k - 1] + s * (r[k] * r[k] - r[k - 1] * r[k - 1])).sqrt()
        } else if let Some(p) = tail_exponent {
            let outside = mass - inside;
            let q = (mass - u).max(f64::MIN_POSITIVE);
            grid.r_max() * (outside / q).powf(1.0 / (p - 2.0))
        } else {
            grid.r_max()
        };
        let theta = rng.random::<f64>() * 2.0 * PI;
        (radius * theta.cos(), radius * theta.sin())
    };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let (x1, y1) = draw(&mut rng);
        let (x2, y2) = draw(&mut rng);
        let l = (x1 - x2).hypot(y1 - y2).ln();
        sum += l;
        sum_sq += l * l;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(MonteCarlo { estimate: mass * mass * mean, std_error: mass * mass * (var / n).sqrt(), samples })
}

/// Free energies of a Gaussian translated along the `x` axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatedReport {
    pub beta: f64,
    pub shifts: Vec<f64>,
    pub free_energies: Vec<f64>,
}

impl TranslatedReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.free_energies.windows(2).all(|w| w[1] < w[0])
    }

    pub fn strictly_increasing(&self) -> bool {
        self.free_energies.windows(2).all(|w| w[1] > w[0])
    }

    pub fn spread(&self) -> f64 {
        let max = self.free_energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.free_energies.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

pub const TRANSLATION_SHIFTS: [f64; 4] = [0.0, 5.0, 10.0, 20.0];

/// `F_β[f_y]` for a unit Gaussian (`σ = 1`, mass 1, repulsive coupling) on a
/// 128-cell patch of half-width 32, so every shift is a whole number of cells.
pub fn scenario_translated_unboundedness(beta: f64) -> Result<TranslatedReport> {
    translated_free_energies(beta, 1.0, &TRANSLATION_SHIFTS, 128, 32.0)
}

pub fn translated_free_energies(
    beta: f64,
    sigma: f64,
    shifts: &[f64],
    n: usize,
    half_width: f64,
) -> Result<TranslatedReport> {
    let h = 2.0 * half_width / n as f64;
    if h > 0.5 * sigma {
        return Err(HarnessError::Usage(format!("cell {h} does not resolve a Gaussian of width {sigma}")));
    }
    if let Some(s) = shifts.iter().find(|s| s.abs() + 8.0 * sigma > half_width) {
        return Err(HarnessError::Usage(format!("shift {s} leaves the patch")));
    }
    let profile = Profile::Gaussian { sigma };
    let free_energies = shifts
        .iter()
        .map(|&s| Ok(CartesianPatch::radial(&profile, 1.0, n, half_width, s)?.free_energy(beta, Coupling::Repulsive)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(TranslatedReport { beta, shifts: shifts.to_vec(), free_energies })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patch_size_guard() {
        assert!(CartesianPatch::from_fn(129, 1.0, |_, _| 1.0).is_err());
        assert!(CartesianPatch::from_fn(4, 1.0, |_, _| -1.0).is_err());
    }

    #[test]
    fn uniform_square_matches_self_cell_constant() {
        // A single cell: the sum is exactly the self-cell mean.
        let p = CartesianPatch::from_fn(1, 0.5, |_, _| 1.0).unwrap();
        assert!((p.interaction() - self_cell_log_mean(1.0)).abs() < 1e-15);
    }
}

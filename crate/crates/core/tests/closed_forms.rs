//! Functionals checked against closed forms computed independently here.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use loghls_core::functionals::{
    boltzmann_entropy, convexity_gap, dissipation, free_energy, gn_sides, loghls_deficit, onofri_gap,
    potential_energy, relative_entropy,
};
use loghls_core::greens::{interaction_integral, inverse_laplacian, log_convolution};
use loghls_core::profile::{potential_field, reference_density};
use loghls_core::{Coupling, Field, Profile, RadialGrid, Tail};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::standard())
}

/// Exponential integral `E₁(x)` from its power series; accurate for `0 < x ≤ 10`.
fn e1(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

#[test]
fn e1_series_matches_tabulated_values() {
    // Abramowitz-Stegun table 5.1.
    assert!((e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-14);
    assert!((e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-14);
}

#[test]
fn gaussian_entropy_and_potential() {
    let g = grid();
    let f = Profile::Gaussian { sigma: 1.0 }.density(&g, 1.0).unwrap();
    let entropy = boltzmann_entropy(&f).unwrap();
    assert!((entropy - (-1.0 - (2.0 * PI).ln())).abs() < 1e-7, "{entropy}");
    // E log(1 + R²) with R² = 2X, X ~ Exp(1), equals e^{1/2} E₁(1/2).
    let potential = potential_energy(&f, &potential_field(&g)).unwrap();
    let exact = PI.ln() + 2.0 * 0.5f64.exp() * e1(0.5);
    assert!((potential - exact).abs() < 1e-7, "{potential} vs {exact}");
}

#[test]
fn reference_potential_moment() {
    let g = grid();
    let mu = Profile::Reference.density(&g, 1.0).unwrap();
    let v = potential_energy(&mu, &potential_field(&g)).unwrap();
    assert!((v - (2.0 + PI.ln())).abs() < 1e-7, "{v}");
    let s = boltzmann_entropy(&mu).unwrap();
    assert!((s + 2.0 + PI.ln()).abs() < 1e-7, "{s}");
}

#[test]
fn gaussian_deficits() {
    let g = grid();
    let f = Profile::Gaussian { sigma: 1.0 }.density(&g, 1.0).unwrap();
    let d0 = loghls_deficit(&f, 0.0).unwrap();
    assert!((d0 - (LN_2 - EULER_GAMMA)).abs() < 1e-6, "{d0}");
    let rel = -1.0 - (2.0 * PI).ln() + PI.ln() + 2.0 * 0.5f64.exp() * e1(0.5);
    let d1 = loghls_deficit(&f, 1.0).unwrap();
    assert!((d1 - rel).abs() < 1e-6, "{d1} vs {rel}");
    assert!((d1 - 0.1526).abs() < 2e-4);
}

#[test]
fn interaction_under_dilation() {
    let g = grid();
    for sigma in [0.5, 1.0, 2.0] {
        let f = Profile::Gaussian { sigma }.density(&g, 1.0).unwrap();
        let exact = LN_2 - 0.5 * EULER_GAMMA + sigma.ln();
        let i = interaction_integral(&f).unwrap();
        assert!((i - exact).abs() < 1e-6, "σ={sigma}: {i} vs {exact}");
    }
    for lambda in [0.5, 2.0] {
        let f = Profile::DilatedReference { lambda }.density(&g, 1.0).unwrap();
        let i = interaction_integral(&f).unwrap();
        assert!((i - (0.5 + lambda.ln())).abs() < 1e-6, "λ={lambda}: {i}");
    }
}

#[test]
fn log_convolution_of_reference() {
    let g = grid();
    let mu = Profile::Reference.density(&g, 1.0).unwrap();
    let l = log_convolution(&mu).unwrap();
    let half = g.r_max() / 2.0;
    let worst = g
        .nodes()
        .iter()
        .zip(l.values())
        .filter(|(r, _)| **r <= half)
        .map(|(r, v)| (v - 0.5 * (r * r).ln_1p()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 2.0 * PI * 1e-7, "{worst}");
    let u = inverse_laplacian(&mu).unwrap();
    assert!(u.u.values()[0].abs() < 1e-8);
    assert_eq!(u.far_field(), -mu.mass() / (2.0 * PI));
}

#[test]
fn log_convolution_of_gaussian() {
    // For the unit Gaussian, ∫ log|x−y| f(y) dy = log r + E₁(r²/2)/2,
    // with value (log 2 − γ)/2 at the origin.
    let g = grid();
    let f = Profile::Gaussian { sigma: 1.0 }.density(&g, 1.0).unwrap();
    let l = log_convolution(&f).unwrap();
    assert!((l.values()[0] - 0.5 * (LN_2 - EULER_GAMMA)).abs() < 1e-7);
    for (r, v) in g.nodes().iter().zip(l.values()).filter(|(r, _)| **r > 0.05 && **r < 4.0) {
        let exact = r.ln() + 0.5 * e1(0.5 * r * r);
        assert!((v - exact).abs() < 1e-7, "r={r}: {v} vs {exact}");
    }
}

#[test]
fn log_convolution_scales_under_dilation() {
    // L[f_λ](λx) = L[f](x) + M log λ, checked where λx is a node of both.
    let lambda = 2.0;
    let f = Profile::Gaussian { sigma: 1.0 }.density(&grid(), 1.0).unwrap();
    let fl = Profile::Gaussian { sigma: lambda }.density(&grid(), 1.0).unwrap();
    let l = log_convolution(&f).unwrap();
    let ll = log_convolution(&fl).unwrap();
    let g = grid();
    for (k, &r) in g.nodes().iter().enumerate().filter(|(_, r)| **r > 0.1 && **r < 20.0).step_by(50) {
        let scaled = lambda * r;
        let j = g.index_below(scaled);
        let (r0, r1) = (g.nodes()[j], g.nodes()[j + 1]);
        let t = (scaled - r0) / (r1 - r0);
        let interp = (1.0 - t) * ll.values()[j] + t * ll.values()[j + 1];
        // Linear interpolation error dominates; the kernel shift is exact.
        assert!((interp - l.values()[k] - lambda.ln()).abs() < 1e-4, "r={r}");
    }
}

#[test]
fn narrow_bump_looks_like_a_point_mass() {
    let g = grid();
    let f = Profile::Gaussian { sigma: 0.01 }.density(&g, 1.0).unwrap();
    let l = log_convolution(&f).unwrap();
    for (r, v) in g.nodes().iter().zip(l.values()).filter(|(r, _)| **r > 1.0) {
        assert!((v - r.ln()).abs() < 1e-3, "r={r}");
    }
}

#[test]
fn free_energy_of_the_reference() {
    let g = grid();
    let mu = Profile::Reference.density(&g, 1.0).unwrap();
    for beta in [0.0, 1.0, 2.5] {
        let exact = -(2.0 + PI.ln()) + beta * (2.0 + PI.ln()) - 0.5 / (4.0 * PI);
        let f = free_energy(&mu, beta, Coupling::Repulsive, None).unwrap();
        assert!((f - exact).abs() < 1e-6, "β={beta}");
        let attractive = free_energy(&mu, beta, Coupling::Attractive, None).unwrap();
        assert!((attractive - exact - 1.0 / (4.0 * PI)).abs() < 1e-6);
    }
    let v = potential_field(&g);
    let with_w = free_energy(&mu, 1.3, Coupling::Repulsive, Some(&v)).unwrap();
    assert_eq!(with_w, free_energy(&mu, 1.3, Coupling::Repulsive, None).unwrap());
}

#[test]
fn free_energy_matches_deficit_shape() {
    // Both functionals are assembled from the same three components.
    let g = grid();
    let alpha = 1.5;
    let f = Profile::Gaussian { sigma: 0.7 }.density(&g, 2.0).unwrap();
    let m = f.mass();
    let fe = free_energy(&f, alpha, Coupling::Repulsive, None).unwrap();
    let entropy = boltzmann_entropy(&f).unwrap();
    let potential = potential_energy(&f, &potential_field(&g)).unwrap();
    let interaction = interaction_integral(&f).unwrap();
    let expected = entropy + alpha * potential - interaction / (4.0 * PI);
    assert!((fe - expected).abs() < 1e-12);
    let deficit = loghls_deficit(&f, alpha).unwrap();
    let shape = entropy - m * m.ln() + alpha * potential + m * (1.0 - alpha) * (1.0 + PI.ln())
        + 2.0 / m * (1.0 - alpha) * interaction;
    assert!((deficit - shape).abs() < 1e-12, "{deficit} vs {shape}");
}

#[test]
fn gagliardo_nirenberg_sides_at_the_optimizer() {
    let g = grid();
    let q = Field::from_fn(&g, |r| reference_density(r).powf(0.25), None).unwrap();
    let (lhs, rhs) = gn_sides(&q).unwrap();
    let half_root_pi = 0.5 * PI.sqrt();
    assert!((lhs - half_root_pi).abs() < 1e-5, "{lhs}");
    assert!((rhs - half_root_pi).abs() < 1e-5, "{rhs}");
    let l4 = g.integrate(&g.sample(reference_density), Tail::Power(4.0)).unwrap();
    assert!((l4 - 1.0).abs() < 1e-8);
}

#[test]
fn gagliardo_nirenberg_positive_off_the_optimizer_and_homogeneous() {
    let g = grid();
    let f = Profile::Gaussian { sigma: 1.0 }.density(&g, 1.0).unwrap();
    let q = Field::new(g.clone(), f.values().iter().map(|v| v.powf(0.25)).collect(), None).unwrap();
    let (lhs, rhs) = gn_sides(&q).unwrap();
    assert!(lhs - rhs > 1e-3);
    let c = 1.7;
    let qc = Field::new(g.clone(), q.values().iter().map(|v| c * v).collect(), None).unwrap();
    let (lc, rc) = gn_sides(&qc).unwrap();
    assert!(((lc - rc) / (lhs - rhs) - c.powi(6)).abs() < 1e-9);
}

#[test]
fn dissipation_closed_forms() {
    let g = grid();
    let mu = Profile::Reference.density(&g, 1.0).unwrap();
    for alpha in [0.0, 1.0, 3.0] {
        let d = dissipation(&mu, alpha).unwrap();
        assert!(d.gn_part.abs() < 1e-5 && d.phi_part.abs() < 1e-5, "{d:?}");
    }
    let two = Profile::Reference.density(&g, 2.0).unwrap();
    let d = dissipation(&two, 1.0).unwrap();
    let phi2 = 2f64.powf(1.5) - 2.0 - 2f64.sqrt() + 1.0;
    assert!((convexity_gap(2.0) - phi2).abs() < 1e-15);
    assert!((d.phi_part - 8.0 * PI * phi2 / (2.0 * PI.sqrt())).abs() < 1e-6, "{}", d.phi_part);
    let f = Profile::Gaussian { sigma: 2.0 }.density(&g, 1.0).unwrap();
    assert_eq!(dissipation(&f, 0.0).unwrap().phi_part, 0.0);
}

#[test]
fn onofri_identity_cases() {
    let g = grid();
    let zero = Field::from_fn(&g, |_| 0.0, None).unwrap();
    assert_eq!(onofri_gap(&zero, 0.0, 1.0).unwrap(), 0.0);
    let c = Field::from_fn(&g, |_| -4.2, None).unwrap();
    assert_eq!(onofri_gap(&c, 0.5, 3.0).unwrap(), 0.0);
    // −t log(1 + r²) is unbounded; its truncation at r = 50 stays admissible.
    let t = 0.1;
    let logdecay = Field::from_fn(&g, |r| -t * (r.min(50.0) * r.min(50.0)).ln_1p(), None).unwrap();
    assert!(onofri_gap(&logdecay, 0.0, 1.0).unwrap() > 0.0);
}

#[test]
fn relative_entropy_vanishes_only_at_the_optimizer() {
    let g = grid();
    for m in [0.5, 1.0, 8.0 * PI] {
        let f = Profile::Reference.density(&g, m).unwrap();
        assert!(relative_entropy(&f).unwrap().abs() < 1e-7 * m);
    }
    let f = Profile::Bump { inner: 0.5, outer: 2.0 }.density(&g, 1.0).unwrap();
    assert!(relative_entropy(&f).unwrap() > 0.1);
}

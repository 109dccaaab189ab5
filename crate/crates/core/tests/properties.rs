use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use loghls_core::functionals::{
    convexity_gap, free_energy, gn_deficit, loghls_deficit, onofri_gap, relative_entropy, FunctionalReport,
};
use loghls_core::greens::{interaction_integral, inverse_laplacian};
use loghls_core::stationary::j_functional;
use loghls_core::{Coupling, Density, Field, Profile, RadialGrid};
use proptest::prelude::*;

fn grid() -> Arc<RadialGrid> {
    static GRID: OnceLock<Arc<RadialGrid>> = OnceLock::new();
    GRID.get_or_init(|| Arc::new(RadialGrid::standard())).clone()
}

/// Normalized Gaussian mixtures with one to three components.
fn mixture() -> impl Strategy<Value = Profile> {
    prop::collection::vec((0.05f64..1.0, 0.3f64..3.0), 1..=3).prop_map(|parts| {
        let total: f64 = parts.iter().map(|p| p.0).sum();
        Profile::Mixture(parts.into_iter().map(|(c, s)| (c / total, s)).collect())
    })
}

fn density(p: &Profile, m: f64) -> Density {
    p.density(&grid(), m).unwrap()
}

/// Bounded radial fields: sums of Gaussian rings with either sign.
fn ring_field() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, 0.0f64..4.0, 0.3f64..2.0), 1..=3)
}

fn field_of(parts: &[(f64, f64, f64)], shift: f64) -> Field {
    Field::from_fn(&grid(), |r| shift + parts.iter().map(|&(a, c, w)| a * (-(r - c) * (r - c) / (w * w)).exp()).sum::<f64>(), None)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn deficit_is_affine_in_alpha(p in mixture(), m in 0.1f64..50.0, alpha in 0.0f64..10.0) {
        let f = density(&p, m);
        let report = FunctionalReport::evaluate(&f, &[0.0, alpha], None).unwrap();
        let rel = relative_entropy(&f).unwrap();
        let lhs = report.deficit_at(alpha);
        let rhs = (1.0 - alpha) * report.deficit_at(0.0) + alpha * rel;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(m));
    }

    #[test]
    fn deficit_is_nonnegative(p in mixture(), m in 0.1f64..50.0, alpha in 0.0f64..10.0) {
        let f = density(&p, m);
        prop_assert!(loghls_deficit(&f, alpha).unwrap() >= -1e-6 * m);
        prop_assert!(relative_entropy(&f).unwrap() >= -1e-9 * m);
    }

    #[test]
    fn deficit_is_linear_in_mass(p in mixture(), c in 0.1f64..20.0, alpha in 0.0f64..5.0) {
        let one = density(&p, 1.0);
        let scaled = one.scaled(c).unwrap();
        let d1 = loghls_deficit(&one, alpha).unwrap();
        let dc = loghls_deficit(&scaled, alpha).unwrap();
        prop_assert!((dc - c * d1).abs() <= 1e-9 * c.max(1.0));
    }

    #[test]
    fn deficit_at_zero_is_dilation_invariant(p in mixture(), lambda in 0.5f64..2.0) {
        let d = loghls_deficit(&density(&p, 1.0), 0.0).unwrap();
        let dl = loghls_deficit(&density(&p.dilated(lambda).unwrap(), 1.0), 0.0).unwrap();
        prop_assert!((d - dl).abs() < 1e-7, "{} vs {}", d, dl);
    }

    #[test]
    fn deficit_separates_from_the_optimizer(p in mixture(), alpha in 0.1f64..5.0) {
        let f = density(&p, 1.0);
        let star = Profile::Reference.density(&grid(), f.mass()).unwrap();
        if f.l1_distance(&star).unwrap() > 1e-2 {
            prop_assert!(loghls_deficit(&f, alpha).unwrap() > 1e-8);
        }
    }

    #[test]
    fn interaction_is_quadratic_and_consistent(p in mixture(), c in 0.5f64..2.0) {
        let f = density(&p, 1.0);
        let i = interaction_integral(&f).unwrap();
        let ic = interaction_integral(&f.scaled(c).unwrap()).unwrap();
        prop_assert!((ic - c * c * i).abs() <= 1e-12 * (c * c * i).abs().max(1.0));
        let u = inverse_laplacian(&f).unwrap();
        let via_u = -2.0 * PI * f.integrate_against(&u.u).unwrap();
        prop_assert!((via_u - i).abs() <= 1e-10 * i.abs().max(1.0));
    }

    #[test]
    fn free_energy_scaling_at_zero_beta(p in mixture(), m in 0.5f64..30.0, lambda in 0.25f64..4.0, attractive in any::<bool>()) {
        let coupling = if attractive { Coupling::Attractive } else { Coupling::Repulsive };
        let f = free_energy(&density(&p, m), 0.0, coupling, None).unwrap();
        let fl = free_energy(&density(&p.dilated(lambda).unwrap(), m), 0.0, coupling, None).unwrap();
        let slope = -2.0 * m - coupling.epsilon() * m * m / (4.0 * PI);
        prop_assert!((fl - f - slope * lambda.ln()).abs() < 1e-6 * m.max(1.0) * m.max(1.0));
    }

    #[test]
    fn dual_gap_is_nonnegative_and_gauge_invariant(parts in ring_field(), c in -10.0f64..10.0, alpha in 0.0f64..0.95, m in 0.1f64..10.0) {
        let gap = onofri_gap(&field_of(&parts, 0.0), alpha, m).unwrap();
        let shifted = onofri_gap(&field_of(&parts, c), alpha, m).unwrap();
        prop_assert!(gap >= -1e-8);
        prop_assert!((gap - shifted).abs() <= 1e-9 * m.max(gap.abs()));
    }

    #[test]
    fn gagliardo_nirenberg_holds(parts in prop::collection::vec((0.05f64..2.0, 0.0f64..3.0, 0.3f64..2.0), 1..=3)) {
        prop_assert!(gn_deficit(&field_of(&parts, 0.0)).unwrap() >= -1e-7);
    }

    #[test]
    fn j_functional_is_gauge_invariant(parts in ring_field(), m in 0.1f64..5.0, gamma in 0.6f64..3.0) {
        let psi = field_of(&parts, 0.0);
        let j = j_functional(&psi, m, gamma).unwrap();
        for c in [-10.0, -1.0, 1.0, 10.0] {
            let jc = j_functional(&field_of(&parts, c), m, gamma).unwrap();
            prop_assert!((jc - j).abs() <= 1e-12 * j.abs().max(m) * 10.0, "c={}: {} vs {}", c, jc, j);
        }
    }

    #[test]
    fn convexity_gap_is_nonnegative_and_convex(t in 0.0f64..100.0) {
        prop_assert!(convexity_gap(t) >= -1e-15);
        let h = 1e-3;
        if t > h {
            let second = convexity_gap(t + h) - 2.0 * convexity_gap(t) + convexity_gap(t - h);
            prop_assert!(second >= -1e-12);
        }
    }
}

#[test]
fn convexity_gap_fixed_points() {
    assert_eq!(convexity_gap(1.0), 0.0);
    let h = 1e-6;
    assert!(((convexity_gap(1.0 + h) - convexity_gap(1.0 - h)) / (2.0 * h)).abs() < 1e-9);
    for t in [0.0, 0.5, 2.0, 10.0] {
        assert!(convexity_gap(t) > 0.0);
    }
}

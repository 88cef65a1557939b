use std::f64::consts::PI;

use proptest::prelude::*;
use torus_nls::lattice::LatticePoint;
use torus_nls::nls::Nonlinearity;
use torus_nls::parallelogram::{resonant_vertex_sum, tau_histogram};
use torus_nls::resonance::*;
use torus_nls::Error;

fn p(x: i64, y: i64) -> LatticePoint {
    LatticePoint::new(x, y).unwrap()
}

#[test]
fn data_support_and_symmetry() {
    let data = SparseGaussianData::new(8, 32.0, 0.1);
    let phi = build_phi(&data).unwrap();
    assert!((700..900).contains(&phi.len()), "{}", phi.len());
    let cut2 = data.cutoff_radius * data.cutoff_radius;
    for (q, c) in phi.coeffs() {
        assert!(q.x % 8 == 0 && q.y % 8 == 0 && q.norm2() as f64 <= cut2);
        assert!(c.re > 0.0 && c.im == 0.0);
        assert_eq!(phi.get(q.perp()), *c);
    }
    let peak = data.coefficient(p(0, 0));
    assert!(data.coefficient(p(128, 0)) < (-16.0f64).exp() * peak * 1.0001);
    let ratio = lambda_eff(&phi) / data.lambda;
    assert!((ratio - (PI / 2.0).sqrt()).abs() < 0.02, "{ratio}");
}

#[test]
fn spacing_equal_to_width() {
    let data = SparseGaussianData::new(4, 4.0, 1.0);
    assert!(matches!(build_phi(&data), Err(Error::Domain(_))));
    let phi = gaussian_state(&data).unwrap();
    let peak = data.coefficient(p(0, 0));
    let dominant = phi.coeffs().values().filter(|c| c.re >= peak * (-2.5f64).exp()).count();
    assert_eq!(dominant, 9);
}

#[test]
fn resonant_sum_matches_enumeration() {
    let w = 6.0;
    for xi in [p(0, 0), p(1, 2), p(-3, 0)] {
        let fast = resonant_sum(xi, w, 6.0 * w).unwrap();
        let brute = resonant_sum_brute(xi, w, 36.0).unwrap();
        assert!((fast - brute).abs() < 1e-6 * brute, "{xi}: {fast} vs {brute}");
    }
}

#[test]
fn resonant_sum_symmetry_and_shape() {
    let w = 10.0;
    let r = |x, y| resonant_sum(p(x, y), w, 6.0 * w).unwrap();
    let base = r(3, 5);
    for v in [r(-3, -5), r(-5, 3), r(5, -3)] {
        assert!((v - base).abs() < 1e-9 * base);
    }
    let axis: Vec<f64> = (0..12).map(|x| r(x, 0)).collect();
    assert!(axis.windows(2).all(|s| s[1] < s[0]), "{axis:?}");
    let near = resonant_sum(p(0, 0), 1e-3, 1.0).unwrap();
    assert!((near - 1.0).abs() < 1e-12);
    let wide = resonant_sum(p(0, 0), w, 12.0 * w).unwrap();
    assert!((wide - r(0, 0)).abs() < 1e-6 * wide);
    assert!(resonant_sum(p(0, 0), w, 5.0 * w).is_err());
}

#[test]
fn resonant_constant_trend() {
    let fit = fit_resonant_constant(&[64.0, 128.0, 256.0, 512.0]).unwrap();
    assert!((2.7..=3.3).contains(&fit.alpha), "{}", fit.alpha);
    for row in &fit.rows {
        assert!(row.r > 0.0);
    }
}

#[test]
fn mode_rates_match_vertex_enumeration() {
    let data = SparseGaussianData::new(2, 8.0, 0.7);
    let phi = build_phi(&data).unwrap();
    let (set, w) = phi.support();
    for xi in [p(0, 0), p(4, -2), p(10, 6)] {
        let brute = resonant_vertex_sum(&set, &w, xi).unwrap().re;
        let m = mode_rate(&data, xi, Nonlinearity::Defocusing).unwrap();
        assert!((m.r - brute).abs() < 1e-10 * brute, "{xi}");
        assert!((m.rate - brute / data.coefficient(xi)).abs() < 1e-10 * m.rate);
        let f = mode_rate(&data, xi, Nonlinearity::Focusing).unwrap();
        assert_eq!(f.rate, -m.rate);
        let rot = mode_rate(&data, xi.perp(), Nonlinearity::Defocusing).unwrap();
        assert!((rot.rate - m.rate).abs() < 1e-12 * m.rate);
    }
    assert!(mode_rate(&data, p(1, 0), Nonlinearity::Defocusing).is_err());
    let all = predicted_mode_rates(&data, Nonlinearity::Defocusing).unwrap();
    assert_eq!(all.per_xi.len(), phi.len());
    let spot = all.per_xi.iter().find(|m| m.xi == p(4, -2)).unwrap();
    let direct = mode_rate(&data, p(4, -2), Nonlinearity::Defocusing).unwrap();
    assert!((spot.rate - direct.rate).abs() < 1e-12 * direct.rate);
    for m in &all.per_xi {
        let rot = all.per_xi.iter().find(|o| o.xi == m.xi.perp()).unwrap();
        assert_eq!(rot.rate, m.rate);
    }
}

#[test]
fn unit_width_mode_rate_grows_like_log() {
    let rate = |w: f64| {
        let data = SparseGaussianData::new(1, w, 1.0);
        mode_rate(&data, p(0, 0), Nonlinearity::Defocusing).unwrap().rate
    };
    let (a, b) = (rate(16.0), rate(32.0));
    // ω(0)/λ² ≈ 3 ln W + const, up to the O(1/ln W) correction
    let slope = (b - a) / 2f64.ln();
    assert!((2.0..4.0).contains(&slope), "{slope}");
}

#[test]
fn resonant_mass_is_the_zero_level() {
    let data = SparseGaussianData::new(2, 8.0, 0.9);
    let phi = build_phi(&data).unwrap();
    let (set, w) = phi.support();
    let h = tau_histogram(&set, Some(&w)).unwrap();
    let m = resonant_mass(&data).unwrap();
    assert!((h.get(0).re - m).abs() < 1e-10 * m);
}

#[test]
fn l4_growth_over_periods() {
    let data = SparseGaussianData::new(4, 16.0, 0.5);
    let rep = l4_lower_bound_check(&data, &[1.0, 2.0, 4.0, 8.0]).unwrap();
    assert!((rep.period - PI / 16.0).abs() < 1e-15);
    for r in &rep.ratios {
        assert!((r / 2f64.powf(0.25) - 1.0).abs() <= 0.05, "{r}");
    }
    let lr = data.log_ratio();
    let k = 5.0;
    let t = k * rep.period * lr;
    let exact = l4_lower_bound_check(&data, &[t]).unwrap();
    let expect = k * rep.period * (2.0 * PI).powi(2) * rep.w0;
    assert!((exact.rows[0].value4 - expect).abs() < 1e-9 * expect);
    assert!((rep.w0 - rep.resonant_mass).abs() < 1e-9 * rep.w0);
    assert!(l4_lower_bound_check(&data, &[0.5]).is_err());
}

#[test]
fn small_experiment() {
    let data = SparseGaussianData::new(2, 8.0, 0.05);
    let cfg = experiment_config(&data, 2e-3, Nonlinearity::Defocusing, 0);
    let rep = approx_solution_experiment(&data, &cfg, data.max_horizon()).unwrap();
    let last = rep.last();
    assert!(last.error_corrected <= BREAKDOWN_RATIO * last.error_plain, "{last:?}");
    assert!((rep.fitted_rate - rep.oracle_rate).abs() <= 0.1 * rep.oracle_rate.abs());
    assert!(approx_solution_experiment(&data, &cfg, 2.0 * data.max_horizon()).is_err());

    let quiet = SparseGaussianData::new(2, 8.0, 1e-4);
    let rep = approx_solution_experiment(&quiet, &cfg, quiet.max_horizon()).unwrap();
    assert!(rep.max_error_plain() < 1e-9);
    assert!(rep.fitted_rate.abs() < 1e-6);
}

#[test]
fn divergence_tracks_phase_rates() {
    let data = SparseGaussianData::new(2, 8.0, 0.05);
    let cfg = experiment_config(&data, 2e-3, Nonlinearity::Defocusing, 0);
    let d = two_solution_divergence(&data, 0.06, &cfg, data.max_horizon()).unwrap();
    assert!(d.final_distance > d.initial_distance);
    assert!(d.predicted_final > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn resonant_sum_is_even_and_rotation_invariant(x in -20i64..20, y in -20i64..20, w in 4.0f64..12.0) {
        let a = resonant_sum(p(x, y), w, 6.0 * w).unwrap();
        let b = resonant_sum(p(-y, x), w, 6.0 * w).unwrap();
        let c = resonant_sum(p(-x, -y), w, 6.0 * w).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-9 * a && (a - c).abs() <= 1e-9 * a);
    }
}

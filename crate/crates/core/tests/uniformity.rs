use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use torus_nls::lattice::LatticePoint;
use torus_nls::rng::stream;
use torus_nls::uniformity::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_1d(rng: &mut ChaCha8Rng, n: i64) -> BoxFunction {
    BoxFunction::from_fn_1d(n, |_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap()
}

fn random_2d(rng: &mut ChaCha8Rng, n: i64) -> BoxFunction {
    BoxFunction::from_fn_2d(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap()
}

fn unit_1d(rng: &mut ChaCha8Rng, n: i64) -> BoxFunction {
    BoxFunction::from_fn_1d(n, |_| Complex64::from_polar(1.0, rng.gen_range(0.0..6.3))).unwrap()
}

/// Σ_{x,h₁,h₂} f(x)·conj f(x+h₁)·conj f(x+h₂)·f(x+h₁+h₂) over ℤ.
fn u2_sum_direct(f: &BoxFunction) -> f64 {
    let n = f.half_width();
    let mut s = Complex64::default();
    for x in -n..=n {
        for h1 in -2 * n..=2 * n {
            for h2 in -2 * n..=2 * n {
                s += f.get1(x) * f.get1(x + h1).conj() * f.get1(x + h2).conj() * f.get1(x + h1 + h2);
            }
        }
    }
    s.re
}

fn pi4_direct(f: &BoxFunction) -> f64 {
    let n = f.half_width();
    let mut s = Complex64::default();
    for x1 in -n..=n {
        for x2 in -n..=n {
            for y1 in -n..=n {
                for y2 in -n..=n {
                    s += f.get2(x1, y1) * (f.get2(x1, y2) * f.get2(x2, y1)).conj() * f.get2(x2, y2);
                }
            }
        }
    }
    s.re
}

#[test]
fn alt_examples() {
    let one = BoxFunction::indicator(1, 5).unwrap();
    assert!(alt(&one, &[0]).values().iter().all(|&v| v == c(1.0, 0.0)));
    let a = 0.7;
    let f = BoxFunction::from_fn_1d(6, |n| Complex64::from_polar(1.0, a * n as f64)).unwrap();
    let g = alt(&f, &[2]);
    for x in -6..=6 {
        let v = g.get1(x);
        if x + 2 <= 6 {
            assert!((v - Complex64::from_polar(1.0, -2.0 * a)).norm() < 1e-14);
        } else {
            assert_eq!(v, Complex64::default());
        }
    }
    let mut rng = stream(1, 1);
    let h = random_2d(&mut rng, 4);
    let (a, b) = (alt(&alt(&h, &[1, -2]), &[3, 1]), alt(&alt(&h, &[3, 1]), &[1, -2]));
    for (u, v) in a.values().iter().zip(b.values()) {
        assert!((u - v).norm() < 1e-15);
    }
}

#[test]
fn box_norm_examples() {
    for n in [1, 4, 9] {
        let chi = BoxFunction::indicator(1, n).unwrap();
        for k in 1..=3 {
            assert!((gowers_norm_recursive(&chi, k).unwrap() - 1.0).abs() < 1e-12);
        }
    }
    for deg in 1..=3usize {
        let f = BoxFunction::from_fn_1d(7, |n| {
            let x = n as f64;
            Complex64::from_polar(1.0, 0.3 * x.powi(deg as i32) - 1.1 * x)
        })
        .unwrap();
        assert!((gowers_norm_recursive(&f, deg + 1).unwrap() - 1.0).abs() < 1e-9, "deg {deg}");
    }
}

#[test]
fn explicit_and_recursive_agree() {
    let mut rng = stream(2, 1);
    let f = unit_1d(&mut rng, 16);
    for k in 1..=3 {
        let a = gowers_norm_explicit(&f, k).unwrap();
        let b = gowers_norm_recursive(&f, k).unwrap();
        assert!((a - b).abs() < 1e-10, "k = {k}: {a} vs {b}");
    }
}

#[test]
fn u2_against_direct_sum() {
    let mut rng = stream(3, 1);
    for n in [2, 5, 8] {
        let f = random_1d(&mut rng, n);
        let chi = BoxFunction::indicator(1, n).unwrap();
        let expect = (u2_sum_direct(&f) / u2_sum_direct(&chi)).powf(0.25);
        assert!((gowers_norm_recursive(&f, 2).unwrap() - expect).abs() < 1e-12);
    }
}

#[test]
fn group_norm_examples() {
    let z = BoxFunction::zeros(1, 3).unwrap();
    assert_eq!(gowers_norm_group(&z, 2, 16).unwrap(), 0.0);
    let mut rng = stream(4, 1);
    let f = random_1d(&mut rng, 3);
    let mean: Complex64 = f.values().iter().sum::<Complex64>() / 16.0;
    assert!((gowers_norm_group(&f, 1, 16).unwrap() - mean.norm()).abs() < 1e-14);
    for m in [7, 16, 64] {
        let us: Vec<f64> = (1..=3).map(|k| gowers_norm_group(&f, k, m).unwrap()).collect();
        assert!(us.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12)), "m = {m}: {us:?}");
    }
    assert!(gowers_norm_group(&f, 2, 6).is_err());
}

#[test]
fn pi_norm_examples() {
    for n in [1, 3] {
        let chi = BoxFunction::indicator(2, n).unwrap();
        assert!((pi_norm(&chi).unwrap() - (2 * n + 1) as f64).abs() < 1e-10);
    }
    let mut rng = stream(5, 1);
    let g = random_1d(&mut rng, 3);
    let h = random_1d(&mut rng, 3);
    let f = BoxFunction::tensor(&g, &h).unwrap();
    assert!((pi_norm(&f).unwrap() - g.l2_norm() * h.l2_norm()).abs() < 1e-10);
    let r = random_2d(&mut rng, 3);
    let direct = pi4_direct(&r);
    assert!((pi_norm(&r).unwrap().powi(4) - direct).abs() < 1e-9 * direct.abs().max(1.0));
    let form = pi_form(&r, &r, &r, &r).unwrap();
    assert!((form.re - direct).abs() < 1e-9 * direct.abs().max(1.0));
}

#[test]
fn pi_eta_identities() {
    let mut rng = stream(6, 1);
    let f = random_2d(&mut rng, 4);
    let unit = LatticePoint::new(1, 0).unwrap();
    assert!((pi_eta_norm(&f, unit).unwrap() - pi_norm(&f).unwrap()).abs() < 1e-10);
    let e1 = LatticePoint::new(1, 1).unwrap();
    let e2 = LatticePoint::new(1, 2).unwrap();
    let (lhs, rhs) = pi_eta_multiplicativity(&f.to_sparse(), e1, e2).unwrap();
    assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    let eta = LatticePoint::new(2, -1).unwrap();
    let a = pi_eta_norm(&f, eta).unwrap().powi(4);
    let b = pi_eta_norm4_alt_form(&f, eta).unwrap();
    assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
}

#[test]
fn two_tensor_forms() {
    let mut rng = stream(7, 1);
    let g = random_1d(&mut rng, 4);
    let h = random_1d(&mut rng, 4);
    let full = two_tensor_inner(&g, 1, 1).unwrap();
    for (a, b) in [(1, 2), (2, 3), (3, 1)] {
        assert!(two_tensor_inner(&g, a, b).unwrap() <= full * (1.0 + 1e-12));
    }
    let eta = LatticePoint::new(1, 2).unwrap();
    let gh = BoxFunction::tensor(&g, &h).unwrap();
    let direct = pi_eta_norm(&gh, eta).unwrap().powi(4);
    let via = two_tensor_pi_eta4(&g, &h, eta).unwrap();
    assert!((direct - via).abs() < 1e-9 * direct.abs().max(1.0));
}

#[test]
fn cauchy_schwarz_chain_and_tensor_bounds() {
    let mut rng = stream(8, 1);
    for _ in 0..20 {
        let fs: Vec<BoxFunction> = (0..4).map(|_| random_2d(&mut rng, 2)).collect();
        assert!(cs_chain_check(&fs[0], &fs[1], &fs[2], &fs[3]).unwrap());
        let g = random_1d(&mut rng, 2);
        let h = random_1d(&mut rng, 2);
        assert!(tensor_corollary_check(&fs[0], &g, &h).unwrap());
    }
    let f = random_2d(&mut rng, 3);
    assert!(cs_chain_check(&f, &f, &f, &f).unwrap());
}

#[test]
fn tensor_correlate() {
    let z = BoxFunction::zeros(2, 3).unwrap();
    assert_eq!(best_tensor_correlate(&z).unwrap().correlation, 0.0);
    let mut rng = stream(9, 1);
    for _ in 0..5 {
        let f = random_2d(&mut rng, 3);
        let t = best_tensor_correlate(&f).unwrap();
        let supp = f.support_size() as f64;
        assert!(supp * t.correlation >= pi_norm(&f).unwrap().powi(4) * (1.0 - 1e-9));
    }
}

#[test]
fn dimension_map_examples() {
    assert!(dimension_map_is_freiman(3));
    let chi = BoxFunction::indicator(2, 2).unwrap();
    let mut rng = stream(10, 1);
    let g = random_2d(&mut rng, 2);
    for d in 1..=2 {
        assert!(dimension_map_check(&chi, d).unwrap().equal);
        let r = dimension_map_check(&g, d).unwrap();
        assert!(r.equal, "{r:?}");
    }
    assert!(dimension_map_check(&g, 0).is_err());
}

#[test]
fn weyl_examples() {
    let q = |a, b, n| weyl_sum(&WeylSumQuery { a, b, n }).unwrap();
    assert!((q(0.0, 0.0, 17) - 1.0).abs() < 1e-14);
    for n in [1, 10, 333] {
        assert!((q(0.0, std::f64::consts::PI, n) - 1.0 / (2 * n + 1) as f64).abs() < 1e-12);
    }
    assert!(q(std::f64::consts::TAU / 5.0, 0.0, 1000) >= 0.4);
    assert!(q(2f64.sqrt(), 0.0, 1000) <= 0.1);
    assert_eq!(weyl_major_arc(std::f64::consts::TAU / 5.0, 1000, 20).0, 5);
    assert!(weyl_sum(&WeylSumQuery { a: 1.0, b: 0.0, n: 0 }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norm_axioms(seed in 0u64..10_000, n in 1i64..6, s in 0.1f64..3.0) {
        let mut rng = stream(seed, 2);
        let f = random_1d(&mut rng, n);
        let g = random_1d(&mut rng, n);
        for k in 2..=3 {
            let nf = gowers_norm_recursive(&f, k).unwrap();
            prop_assert!(nf >= 0.0);
            let scaled = gowers_norm_recursive(&f.scale(c(0.0, s)), k).unwrap();
            prop_assert!((scaled - s * nf).abs() < 1e-9 * (1.0 + s * nf));
            let sum = gowers_norm_recursive(&f.add(&g).unwrap(), k).unwrap();
            prop_assert!(sum <= nf + gowers_norm_recursive(&g, k).unwrap() + 1e-9);
        }
        let f2 = random_2d(&mut rng, n.min(3));
        let g2 = random_2d(&mut rng, n.min(3));
        let lhs = pi_norm(&f2.add(&g2).unwrap()).unwrap();
        prop_assert!(lhs <= pi_norm(&f2).unwrap() + pi_norm(&g2).unwrap() + 1e-9);
    }

    #[test]
    fn modulation_invariance(seed in 0u64..10_000, n in 1i64..7, theta in -3.0f64..3.0) {
        let mut rng = stream(seed, 3);
        let f = random_1d(&mut rng, n);
        let m = f.map(|p, v| v * Complex64::from_polar(1.0, theta * p[0] as f64));
        for k in 2..=3 {
            let a = gowers_norm_recursive(&f, k).unwrap();
            let b = gowers_norm_recursive(&m, k).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}

use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use torus_nls::lattice::LatticePoint;
use torus_nls::parallelogram::*;
use torus_nls::rng::stream;

fn p(x: i64, y: i64) -> LatticePoint {
    LatticePoint::new(x, y).unwrap()
}

fn set(pts: &[(i64, i64)]) -> PointSet {
    PointSet::new(pts.iter().map(|&(x, y)| p(x, y)).collect())
}

/// O(n⁴) reference: every ordered quadruple, closed ones kept.
fn quartic_counts(s: &PointSet) -> BTreeMap<i64, u64> {
    let pts = s.points();
    let mut out = BTreeMap::new();
    for &a in pts {
        for &b in pts {
            for &c in pts {
                for &d in pts {
                    if a + c == b + d {
                        let t = a.norm2() - b.norm2() + c.norm2() - d.norm2();
                        *out.entry(t).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    out
}

fn random_set(seed: u64, size: usize, r: i64) -> PointSet {
    let mut rng = stream(seed, 11);
    PointSet::new((0..size).map(|_| p(rng.gen_range(-r..=r), rng.gen_range(-r..=r))).collect())
}

#[test]
fn tau_of_small_quadruples() {
    let q = Parallelogram::new(p(0, 0), p(1, 0), p(1, 1), p(0, 1)).unwrap();
    assert_eq!(tau(&q), 0);
    let q = Parallelogram::new(p(0, 0), p(1, 0), p(2, 1), p(1, 1)).unwrap();
    assert_eq!(tau(&q), 2);
    assert_eq!(q.relabel().tau(), -2);
    assert!(Parallelogram::new(p(0, 0), p(1, 0), p(2, 1), p(0, 1)).is_err());
}

#[test]
fn histogram_examples() {
    let h = tau_histogram(&set(&[(3, -2)]), None).unwrap();
    assert_eq!(h.entries.len(), 1);
    assert_eq!(h.count(0), 1);
    let h = tau_histogram(&set(&[(0, 0), (1, 0)]), None).unwrap();
    assert_eq!(h.count(0), 6);
    assert_eq!(h.entries.len(), 1);
    let sq = PointSet::square(1);
    let h = tau_histogram(&sq, None).unwrap();
    assert_eq!(h.total.re as u64, additive_energy(&sq).unwrap());
}

#[test]
fn energy_examples() {
    assert_eq!(additive_energy(&set(&[(5, 5)])).unwrap(), 1);
    assert_eq!(additive_energy(&set(&[(0, 0), (1, 0)])).unwrap(), 6);
    let sq = PointSet::square(2);
    let n = sq.len() as u64;
    let e = additive_energy(&sq).unwrap();
    assert_eq!(e, quartic_counts(&sq).values().sum::<u64>());
    assert!(n * n <= e && e <= n * n * n);
}

#[test]
fn enumerator_matches_quartic_reference() {
    for seed in 0..15 {
        let s = random_set(seed, 5 + 2 * seed as usize, 5);
        assert_eq!(tau_counts(&s, DEFAULT_MAX_POINTS).unwrap(), quartic_counts(&s), "seed {seed}");
    }
}

#[test]
fn cumulative_counts() {
    let single = set(&[(1, 1)]);
    assert_eq!(count_tau_range(&single, 4, true).unwrap(), 1);
    assert_eq!(count_tau_range(&single, 4, false).unwrap(), 0);
    let sq = PointSet::square(1);
    let h = tau_histogram(&sq, None).unwrap();
    assert_eq!(count_tau_range(&sq, 8, true).unwrap() as f64, h.range_sum(0, 8).re);
    assert!(count_tau_range(&sq, 0, true).is_err());
}

#[test]
fn cumulative_ratio_on_squares_stays_bounded() {
    let mut ratios = Vec::new();
    for n in [4, 8, 16] {
        let s = PointSet::square(n);
        let sz = s.len() as f64;
        let m = sz.ln().ceil() as i64;
        let c = count_tau_range(&s, m, true).unwrap() as f64;
        ratios.push(c / (m as f64 * sz * sz));
    }
    assert!(ratios.iter().all(|&r| r < CUMULATIVE_COUNT_CONSTANT), "{ratios:?}");
}

#[test]
fn progression_examples() {
    assert_eq!(ap3_count(&set(&[(2, 2)])).unwrap(), 1);
    assert_eq!(ap3_count(&set(&[(0, 0), (1, 0)])).unwrap(), 2);
    assert_eq!(ap3_count(&set(&[(0, 0), (1, 0), (2, 0)])).unwrap(), 5);
}

#[test]
fn cross_count_examples() {
    let sq = PointSet::square(1);
    assert_eq!(cross_count(&sq, p(0, 0), p(1, 0)).unwrap(), 3);
    assert_eq!(cross_count(&sq, p(0, 0), p(1, 1)).unwrap(), 3);
    let two = set(&[(0, 0), (2, 1)]);
    assert_eq!(cross_count(&two, p(0, 0), p(2, 1)).unwrap(), 2);
    assert!(cross_count(&sq, p(0, 0), p(0, 0)).is_err());
    assert!(cross_count(&sq, p(0, 0), p(5, 0)).is_err());
}

#[test]
fn rich_lines_and_incidences() {
    let sq = PointSet::square(2);
    assert_eq!(rich_lines(&sq, 5).unwrap().len(), 12);
    assert!(rich_lines(&sq, 26).unwrap().is_empty());
    assert!(rich_lines(&sq, 1).is_err());

    let one = set(&[(1, 2)]);
    let l = Line::canonical(1, 0, 1).unwrap();
    assert_eq!(point_line_incidences(&one, &[l]).unwrap(), 1);

    let sq1 = PointSet::square(1);
    let lines: Vec<Line> = rich_lines(&sq1, 3).unwrap().into_iter().map(|(l, _)| l).collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(point_line_incidences(&sq1, &lines).unwrap(), 24);
    assert!(point_line_incidences(&sq1, &[Line { a: 2, b: 0, c: 2 }]).is_err());
}

#[test]
fn rich_line_counts_match_pair_enumeration() {
    let s = random_set(3, 40, 4);
    let rich = rich_lines(&s, 3).unwrap();
    for (line, n) in &rich {
        assert!(line.is_canonical());
        assert_eq!(*n, s.points().iter().filter(|&&q| line.contains(q)).count());
    }
}

#[test]
fn vertex_sum_matches_rectangle_enumeration() {
    let s = random_set(9, 30, 4);
    let mut rng = stream(9, 12);
    let w: Vec<Complex64> = (0..s.len()).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
    let pts = s.points();
    for xi in [p(0, 0), p(1, -2), p(3, 3)] {
        let mut expect = Complex64::default();
        for (i, &a) in pts.iter().enumerate() {
            for (j, &b) in pts.iter().enumerate() {
                for (k, &c) in pts.iter().enumerate() {
                    if a + c == b + xi && (a - b).dot(a - xi) == 0 {
                        expect += w[i] * w[j].conj() * w[k];
                    }
                }
            }
        }
        let got = resonant_vertex_sum(&s, &w, xi).unwrap();
        assert!((got - expect).norm() < 1e-12 * (1.0 + expect.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn histogram_symmetric_and_invariant(seed in 0u64..1000, size in 1usize..25, vx in -50i64..50, vy in -50i64..50) {
        let s = random_set(seed, size, 6);
        let h = tau_counts(&s, DEFAULT_MAX_POINTS).unwrap();
        for (&t, &c) in &h {
            prop_assert_eq!(h.get(&-t).copied(), Some(c));
        }
        prop_assert_eq!(&tau_counts(&s.translate(p(vx, vy)), DEFAULT_MAX_POINTS).unwrap(), &h);
        prop_assert_eq!(&tau_counts(&s.rotate(), DEFAULT_MAX_POINTS).unwrap(), &h);
    }

    #[test]
    fn weighted_histogram_is_hermitian(seed in 0u64..1000, size in 1usize..20) {
        let s = random_set(seed, size, 5);
        let mut rng = stream(seed, 13);
        let w: Vec<Complex64> = (0..s.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let h = tau_histogram(&s, Some(&w)).unwrap();
        for (&t, &v) in &h.entries {
            prop_assert!((h.get(-t) - v.conj()).norm() < 1e-10 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn sublattice_levels_are_multiples(seed in 0u64..1000, size in 1usize..20, l in 2i64..5) {
        let base = random_set(seed, size, 4);
        let s = PointSet::new(base.points().iter().map(|q| p(l * q.x, l * q.y)).collect());
        for &t in tau_counts(&s, DEFAULT_MAX_POINTS).unwrap().keys() {
            prop_assert_eq!(t % (2 * l * l), 0);
        }
    }
}

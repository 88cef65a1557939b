//! Integer-point primitives on ℤ².
//!
//! Points are plain pairs of `i64`. Construction through [`LatticePoint::new`]
//! enforces the coordinate cap [`COORD_CAP`], which keeps every resonance
//! product `2 (a·b)` of differences of capped points inside `i64`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible absolute coordinate (2²⁰).
pub const COORD_CAP: i64 = 1 << 20;

/// Below this radius the coprime sieves use per-point gcd tests.
pub const DIRECT_SIEVE_RADIUS: f64 = 512.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub fn new(x: i64, y: i64) -> Result<Self> {
        if x.abs() > COORD_CAP || y.abs() > COORD_CAP {
            return Err(Error::domain(format!(
                "lattice point ({x}, {y}) exceeds the coordinate cap {COORD_CAP}"
            )));
        }
        Ok(LatticePoint { x, y })
    }

    /// Unchecked constructor for points derived from already-capped inputs.
    pub(crate) const fn raw(x: i64, y: i64) -> Self {
        LatticePoint { x, y }
    }

    pub fn dot(self, other: LatticePoint) -> i64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm2(self) -> i64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    /// Counterclockwise rotation by a right angle: (a, b) ↦ (−b, a).
    pub fn perp(self) -> LatticePoint {
        LatticePoint::raw(-self.y, self.x)
    }

    /// Gaussian-integer product (x + iy)(x' + iy').
    pub fn gaussian_mul(self, other: LatticePoint) -> LatticePoint {
        LatticePoint::raw(
            self.x * other.x - self.y * other.y,
            self.x * other.y + self.y * other.x,
        )
    }

    pub fn scale(self, k: i64) -> LatticePoint {
        LatticePoint::raw(self.x * k, self.y * k)
    }

    pub fn linf(self) -> i64 {
        self.x.abs().max(self.y.abs())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::raw(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::raw(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint::raw(-self.x, -self.y)
    }
}

impl Mul<i64> for LatticePoint {
    type Output = LatticePoint;
    fn mul(self, k: i64) -> LatticePoint {
        self.scale(k)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// gcd(|x|, |y|) of a nonzero point.
pub fn gcd_point(p: LatticePoint) -> Result<u64> {
    if p.is_zero() {
        return Err(Error::domain("gcd of the zero vector is undefined"));
    }
    Ok(gcd(p.x.unsigned_abs(), p.y.unsigned_abs()))
}

pub fn perp(p: LatticePoint) -> LatticePoint {
    p.perp()
}

/// Nonzero with coprime coordinates.
pub fn is_irreducible(p: LatticePoint) -> bool {
    !p.is_zero() && gcd(p.x.unsigned_abs(), p.y.unsigned_abs()) == 1
}

/// Primitive vector along `p` (p / gcd(p)); `p` must be nonzero.
pub(crate) fn primitive(p: LatticePoint) -> LatticePoint {
    let g = gcd(p.x.unsigned_abs(), p.y.unsigned_abs()) as i64;
    LatticePoint::raw(p.x / g, p.y / g)
}

/// Coset representatives of ℤ² modulo the Gaussian ideal generated by η,
/// i.e. modulo the lattice {mη + nη^⊥}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianCosets {
    pub modulus: LatticePoint,
    pub representatives: Vec<LatticePoint>,
}

impl GaussianCosets {
    /// Coordinates (m, n) and representative r with ζ = mη + nη^⊥ + r.
    pub fn decompose(&self, z: LatticePoint) -> (i64, i64, LatticePoint) {
        let eta = self.modulus;
        let n2 = eta.norm2();
        let m = z.dot(eta).div_euclid(n2);
        let n = z.dot(eta.perp()).div_euclid(n2);
        let rep = z - eta * m - eta.perp() * n;
        (m, n, rep)
    }

    pub fn reduce(&self, z: LatticePoint) -> LatticePoint {
        self.decompose(z).2
    }

    pub fn index_of(&self, z: LatticePoint) -> usize {
        let rep = self.reduce(z);
        self.representatives
            .binary_search(&rep)
            .expect("reduced point is always a representative")
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }
}

/// Integer points of the half-open cell [0,1)η + [0,1)η^⊥, sorted.
pub fn coset_representatives(eta: LatticePoint) -> Result<GaussianCosets> {
    if eta.is_zero() {
        return Err(Error::domain("coset modulus must be nonzero"));
    }
    let n2 = eta.norm2();
    let ep = eta.perp();
    let corners = [LatticePoint::ORIGIN, eta, ep, eta + ep];
    let (x0, x1) = (
        corners.iter().map(|c| c.x).min().unwrap(),
        corners.iter().map(|c| c.x).max().unwrap(),
    );
    let (y0, y1) = (
        corners.iter().map(|c| c.y).min().unwrap(),
        corners.iter().map(|c| c.y).max().unwrap(),
    );
    let mut reps = Vec::with_capacity(n2 as usize);
    for x in x0..=x1 {
        for y in y0..=y1 {
            let z = LatticePoint::raw(x, y);
            let u = z.dot(eta);
            let v = z.dot(ep);
            if (0..n2).contains(&u) && (0..n2).contains(&v) {
                reps.push(z);
            }
        }
    }
    reps.sort();
    debug_assert_eq!(reps.len() as i64, n2);
    Ok(GaussianCosets {
        modulus: eta,
        representatives: reps,
    })
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Möbius function μ(0..=n) by a linear sieve.
pub fn mobius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![0i8; n + 1];
    if n >= 1 {
        mu[1] = 1;
    }
    let mut is_comp = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !is_comp[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            is_comp[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    mu
}

fn radius_squared_floor(radius: f64) -> Result<u64> {
    if !(radius >= 1.0) || !radius.is_finite() {
        return Err(Error::domain(format!("radius must be a finite real ≥ 1, got {radius}")));
    }
    Ok((radius * radius).floor() as u64)
}

/// #{η ≠ 0 : |η|² ≤ m}.
fn circle_count(m: u64) -> u64 {
    let mut total = 0u64;
    let xmax = isqrt(m);
    for x in 1..=xmax {
        total += isqrt(m - x * x) + 1;
    }
    4 * total
}

/// Σ_{0 < |η|² ≤ m} 1/|η|², summed row by row in a fixed order.
fn circle_inverse_square(m: u64) -> f64 {
    let xmax = isqrt(m);
    let mut total = 0.0;
    for x in 1..=xmax {
        let ymax = isqrt(m - x * x);
        let x2 = (x * x) as f64;
        let mut row = 0.0;
        for y in 0..=ymax {
            row += 1.0 / (x2 + (y * y) as f64);
        }
        total += row;
    }
    4.0 * total
}

fn coprime_quadrant_direct<F: FnMut(u64)>(m: u64, mut visit: F) {
    let xmax = isqrt(m);
    for x in 1..=xmax {
        let ymax = isqrt(m - x * x);
        for y in 0..=ymax {
            if gcd(x, y) == 1 {
                visit(x * x + y * y);
            }
        }
    }
}

/// Direct per-point gcd count of coprime η with |η| ≤ R.
pub fn coprime_count_direct(radius: f64) -> Result<u64> {
    let m = radius_squared_floor(radius)?;
    let mut c = 0u64;
    coprime_quadrant_direct(m, |_| c += 1);
    Ok(4 * c)
}

/// Möbius-inverted count of coprime η with |η| ≤ R.
pub fn coprime_count_mobius(radius: f64) -> Result<u64> {
    let m = radius_squared_floor(radius)?;
    let dmax = isqrt(m) as usize;
    let mu = mobius_table(dmax);
    let mut total: i64 = 0;
    for d in 1..=dmax {
        if mu[d] == 0 {
            continue;
        }
        let d2 = (d * d) as u64;
        total += mu[d] as i64 * circle_count(m / d2) as i64;
    }
    Ok(total as u64)
}

/// #{η ∈ ℤ²_irr : |η| ≤ R}.
pub fn coprime_count(radius: f64) -> Result<u64> {
    if radius > DIRECT_SIEVE_RADIUS {
        coprime_count_mobius(radius)
    } else {
        coprime_count_direct(radius)
    }
}

pub fn coprime_inverse_square_sum_direct(radius: f64) -> Result<f64> {
    let m = radius_squared_floor(radius)?;
    let mut rows: Vec<f64> = Vec::new();
    let mut last_x = 0;
    let xmax = isqrt(m);
    for x in 1..=xmax {
        let ymax = isqrt(m - x * x);
        let mut row = 0.0;
        for y in 0..=ymax {
            if gcd(x, y) == 1 {
                row += 1.0 / ((x * x + y * y) as f64);
            }
        }
        rows.push(row);
        last_x = x;
    }
    debug_assert_eq!(last_x, xmax);
    Ok(4.0 * rows.iter().sum::<f64>())
}

pub fn coprime_inverse_square_sum_mobius(radius: f64) -> Result<f64> {
    let m = radius_squared_floor(radius)?;
    let dmax = isqrt(m) as usize;
    let mu = mobius_table(dmax);
    let mut total = 0.0;
    for d in 1..=dmax {
        if mu[d] == 0 {
            continue;
        }
        let d2 = (d * d) as u64;
        total += mu[d] as f64 / d2 as f64 * circle_inverse_square(m / d2);
    }
    Ok(total)
}

/// Σ_{η ∈ ℤ²_irr, |η| ≤ R} 1/|η|².
pub fn coprime_inverse_square_sum(radius: f64) -> Result<f64> {
    if radius > DIRECT_SIEVE_RADIUS {
        coprime_inverse_square_sum_mobius(radius)
    } else {
        coprime_inverse_square_sum_direct(radius)
    }
}

/// Asymptotic density 6/π² of coprime points.
pub fn coprime_density() -> f64 {
    6.0 / (std::f64::consts::PI * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y).unwrap()
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd_point(p(4, 6)).unwrap(), 2);
        assert_eq!(gcd_point(p(0, 5)).unwrap(), 5);
        assert_eq!(gcd_point(p(3, 7)).unwrap(), 1);
        assert_eq!(gcd_point(p(-4, 0)).unwrap(), 4);
        assert!(matches!(gcd_point(p(0, 0)), Err(Error::Domain(_))));
    }

    #[test]
    fn perp_examples() {
        assert_eq!(perp(p(1, 0)), p(0, 1));
        assert_eq!(perp(p(0, 0)), p(0, 0));
        assert_eq!(perp(p(2, -3)), p(3, 2));
        assert_eq!(perp(perp(p(5, -7))), p(-5, 7));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(LatticePoint::new(COORD_CAP, -COORD_CAP).is_ok());
        assert!(LatticePoint::new(COORD_CAP + 1, 0).is_err());
    }

    #[test]
    fn coset_examples() {
        assert_eq!(coset_representatives(p(1, 0)).unwrap().representatives, vec![p(0, 0)]);
        assert_eq!(coset_representatives(p(1, 1)).unwrap().len(), 2);
        assert_eq!(coset_representatives(p(2, 1)).unwrap().len(), 5);
        assert!(coset_representatives(p(0, 0)).is_err());
    }

    #[test]
    fn coset_partition_of_patch() {
        // Brute force: every point of a patch reduces to a representative, and
        // two points share a representative exactly when their difference is in ηℤ².
        for eta in [p(2, 1), p(1, 1), p(3, -2), p(0, 3)] {
            let cosets = coset_representatives(eta).unwrap();
            assert_eq!(cosets.len() as i64, eta.norm2());
            let mut hit = vec![0usize; cosets.len()];
            for x in -6..=6 {
                for y in -6..=6 {
                    let z = p(x, y);
                    let (m, n, r) = cosets.decompose(z);
                    assert_eq!(eta * m + eta.perp() * n + r, z);
                    assert_eq!(cosets.reduce(r), r);
                    hit[cosets.index_of(z)] += 1;
                }
            }
            assert!(hit.iter().all(|&h| h > 0));
        }
    }

    #[test]
    fn coprime_small_radii() {
        assert_eq!(coprime_count(1.0).unwrap(), 4);
        assert_eq!(coprime_count(2.0).unwrap(), 8);
        assert!((coprime_inverse_square_sum(1.0).unwrap() - 4.0).abs() < 1e-15);
        assert!((coprime_inverse_square_sum(2.0).unwrap() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn coprime_rejects_small_radius() {
        assert!(coprime_count(0.5).is_err());
        assert!(coprime_inverse_square_sum(f64::NAN).is_err());
    }

    #[test]
    fn sieve_matches_direct() {
        for r in [1.0, 2.5, 7.0, 33.3, 100.0, 257.0, 512.0] {
            assert_eq!(coprime_count_direct(r).unwrap(), coprime_count_mobius(r).unwrap(), "R={r}");
            let a = coprime_inverse_square_sum_direct(r).unwrap();
            let b = coprime_inverse_square_sum_mobius(r).unwrap();
            assert!((a - b).abs() < 1e-11 * a, "R={r}: {a} vs {b}");
        }
    }

    #[test]
    fn coprime_count_is_monotone() {
        let mut prev = 0;
        for i in 1..200 {
            let c = coprime_count(1.0 + i as f64 * 0.37).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn mobius_values() {
        let mu = mobius_table(12);
        assert_eq!(&mu[1..], &[1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]);
    }

    #[test]
    fn gaussian_product_matches_sublattice_basis() {
        let eta = p(2, -3);
        let z = p(4, 5);
        assert_eq!(eta.gaussian_mul(z), eta * z.x + eta.perp() * z.y);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gcd_is_homogeneous(x in -5000i64..5000, y in -5000i64..5000, k in 1i64..50) {
                prop_assume!(x != 0 || y != 0);
                let g = gcd_point(p(x, y)).unwrap();
                prop_assert_eq!(gcd_point(p(k * x, k * y)).unwrap(), k as u64 * g);
            }

            #[test]
            fn reduction_is_idempotent(ex in -7i64..7, ey in -7i64..7, zx in -200i64..200, zy in -200i64..200) {
                prop_assume!(ex != 0 || ey != 0);
                let cosets = coset_representatives(p(ex, ey)).unwrap();
                let r = cosets.reduce(p(zx, zy));
                prop_assert_eq!(cosets.reduce(r), r);
                prop_assert!(cosets.representatives.binary_search(&r).is_ok());
            }
        }
    }
}

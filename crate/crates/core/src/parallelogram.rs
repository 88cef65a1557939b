//! Resonance-graded parallelogram counting on finite subsets of ℤ².
//!
//! A parallelogram is an ordered quadruple Q = (ξ₁, ξ₂, ξ₃, ξ₄) with
//! ξ₁ + ξ₃ = ξ₂ + ξ₄; degenerate quadruples are included. Its resonance level
//! is τ_Q = 2(ξ₁ − ξ₂)·(ξ₁ − ξ₄) = |ξ₁|² − |ξ₂|² + |ξ₃|² − |ξ₄|², and weighted
//! sums use f(Q) = f(ξ₁)·conj f(ξ₂)·f(ξ₃)·conj f(ξ₄).

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{gcd, primitive, LatticePoint};

/// Default cap on #S for the cubic enumerators.
pub const DEFAULT_MAX_POINTS: usize = 2000;

/// Empirical bound on count_tau_range(S, M)/(M·(#S)²) for squares with M = ⌈ln #S⌉.
/// Measured 1.53, 1.77, 1.68 at N = 4, 8, 16.
pub const CUMULATIVE_COUNT_CONSTANT: f64 = 2.0;

const DENSE_INDEX_LIMIT: i64 = 1 << 26;
const DENSE_TAU_LIMIT: i64 = 1 << 24;

enum Membership {
    Dense {
        x0: i64,
        y0: i64,
        width: i64,
        height: i64,
        slots: Vec<u32>,
    },
    Sparse(HashMap<LatticePoint, u32>),
}

/// A finite, deduplicated subset of ℤ² with O(1) membership.
pub struct PointSet {
    points: Vec<LatticePoint>,
    index: Membership,
}

impl std::fmt::Debug for PointSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PointSet").field("points", &self.points).finish()
    }
}

impl Clone for PointSet {
    fn clone(&self) -> Self {
        PointSet::new(self.points.clone())
    }
}

impl PointSet {
    /// Sorts and deduplicates `points`.
    pub fn new(mut points: Vec<LatticePoint>) -> Self {
        points.sort();
        points.dedup();
        let index = Self::build_index(&points);
        PointSet { points, index }
    }

    fn build_index(points: &[LatticePoint]) -> Membership {
        if points.is_empty() {
            return Membership::Sparse(HashMap::new());
        }
        let x0 = points.iter().map(|p| p.x).min().unwrap();
        let x1 = points.iter().map(|p| p.x).max().unwrap();
        let y0 = points.iter().map(|p| p.y).min().unwrap();
        let y1 = points.iter().map(|p| p.y).max().unwrap();
        let (width, height) = (x1 - x0 + 1, y1 - y0 + 1);
        if width.saturating_mul(height) <= DENSE_INDEX_LIMIT {
            let mut slots = vec![u32::MAX; (width * height) as usize];
            for (i, p) in points.iter().enumerate() {
                slots[((p.x - x0) * height + (p.y - y0)) as usize] = i as u32;
            }
            Membership::Dense {
                x0,
                y0,
                width,
                height,
                slots,
            }
        } else {
            Membership::Sparse(
                points
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| (p, i as u32))
                    .collect(),
            )
        }
    }

    /// Integer points of the square [−n, n]².
    pub fn square(n: i64) -> Self {
        let mut pts = Vec::new();
        for x in -n..=n {
            for y in -n..=n {
                pts.push(LatticePoint::raw(x, y));
            }
        }
        PointSet::new(pts)
    }

    /// Integer points of the closed disc of radius r about the origin.
    pub fn disc(r: f64) -> Self {
        let m = (r * r).floor() as i64;
        let n = r.floor() as i64;
        let mut pts = Vec::new();
        for x in -n..=n {
            for y in -n..=n {
                if x * x + y * y <= m {
                    pts.push(LatticePoint::raw(x, y));
                }
            }
        }
        PointSet::new(pts)
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Position of `p` in [`PointSet::points`], if present.
    pub fn index_of(&self, p: LatticePoint) -> Option<usize> {
        match &self.index {
            Membership::Dense {
                x0,
                y0,
                width,
                height,
                slots,
            } => {
                let (dx, dy) = (p.x - x0, p.y - y0);
                if dx < 0 || dy < 0 || dx >= *width || dy >= *height {
                    return None;
                }
                let s = slots[(dx * height + dy) as usize];
                (s != u32::MAX).then_some(s as usize)
            }
            Membership::Sparse(map) => map.get(&p).map(|&s| s as usize),
        }
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        self.index_of(p).is_some()
    }

    pub fn translate(&self, v: LatticePoint) -> PointSet {
        PointSet::new(self.points.iter().map(|&p| p + v).collect())
    }

    pub fn rotate(&self) -> PointSet {
        PointSet::new(self.points.iter().map(|p| p.perp()).collect())
    }

    fn diameter2(&self) -> i64 {
        if self.points.is_empty() {
            return 0;
        }
        let x0 = self.points.iter().map(|p| p.x).min().unwrap();
        let x1 = self.points.iter().map(|p| p.x).max().unwrap();
        let y0 = self.points.iter().map(|p| p.y).min().unwrap();
        let y1 = self.points.iter().map(|p| p.y).max().unwrap();
        (x1 - x0).pow(2) + (y1 - y0).pow(2)
    }

    fn check_size(&self, max_points: usize) -> Result<()> {
        if self.len() > max_points {
            return Err(Error::Resource(format!(
                "point set has {} points, enumeration bound is {max_points}",
                self.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Parallelogram {
    pub vertices: [LatticePoint; 4],
}

impl Parallelogram {
    pub fn new(a: LatticePoint, b: LatticePoint, c: LatticePoint, d: LatticePoint) -> Result<Self> {
        if a + c != b + d {
            return Err(Error::domain(format!(
                "quadruple {a}, {b}, {c}, {d} violates ξ₁ + ξ₃ = ξ₂ + ξ₄"
            )));
        }
        Ok(Parallelogram {
            vertices: [a, b, c, d],
        })
    }

    pub fn tau(&self) -> i64 {
        let [a, b, _, d] = self.vertices;
        2 * (a - b).dot(a - d)
    }

    /// (ξ₂, ξ₃, ξ₄, ξ₁): negates τ.
    pub fn relabel(&self) -> Parallelogram {
        let [a, b, c, d] = self.vertices;
        Parallelogram {
            vertices: [b, c, d, a],
        }
    }
}

/// Resonance level of a closed quadruple.
pub fn tau(q: &Parallelogram) -> i64 {
    q.tau()
}

/// τ ↦ Σ_{Q ∈ 𝒬^τ(S)} f(Q).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauHistogram {
    pub entries: BTreeMap<i64, Complex64>,
    pub total: Complex64,
    /// True when built from unit weights; entries are then exact counts.
    pub unit_weights: bool,
}

impl TauHistogram {
    pub fn get(&self, tau: i64) -> Complex64 {
        self.entries.get(&tau).copied().unwrap_or_default()
    }

    /// Integer counts; only meaningful for unit weights.
    pub fn count(&self, tau: i64) -> u64 {
        self.get(tau).re.round() as u64
    }

    pub fn max_abs_tau(&self) -> i64 {
        self.entries.keys().map(|t| t.abs()).max().unwrap_or(0)
    }

    /// Σ_{τ ∈ [lo, hi]} entry(τ).
    pub fn range_sum(&self, lo: i64, hi: i64) -> Complex64 {
        self.entries.range(lo..=hi).map(|(_, v)| *v).sum()
    }
}

enum TauAccumulator<T> {
    Dense { offset: i64, slots: Vec<T> },
    Sparse(BTreeMap<i64, T>),
}

impl<T: Copy + Default + std::ops::AddAssign> TauAccumulator<T> {
    fn new(max_tau: i64) -> Self {
        if max_tau <= DENSE_TAU_LIMIT {
            TauAccumulator::Dense {
                offset: max_tau,
                slots: vec![T::default(); (2 * max_tau + 1) as usize],
            }
        } else {
            TauAccumulator::Sparse(BTreeMap::new())
        }
    }

    #[inline]
    fn add(&mut self, tau: i64, v: T) {
        match self {
            TauAccumulator::Dense { offset, slots } => slots[(tau + *offset) as usize] += v,
            TauAccumulator::Sparse(map) => *map.entry(tau).or_default() += v,
        }
    }

    fn into_map(self, keep: impl Fn(&T) -> bool) -> BTreeMap<i64, T> {
        match self {
            TauAccumulator::Dense { offset, slots } => slots
                .into_iter()
                .enumerate()
                .filter(|(_, v)| keep(v))
                .map(|(i, v)| (i as i64 - offset, v))
                .collect(),
            TauAccumulator::Sparse(map) => map.into_iter().filter(|(_, v)| keep(v)).collect(),
        }
    }
}

/// Exact per-τ counts of ordered parallelograms with vertices in `s`.
pub fn tau_counts(s: &PointSet, max_points: usize) -> Result<BTreeMap<i64, u64>> {
    s.check_size(max_points)?;
    let pts = s.points();
    let mut acc = TauAccumulator::<u64>::new(2 * s.diameter2());
    for &a in pts {
        for &b in pts {
            let ab = a - b;
            for &d in pts {
                if s.contains(b + d - a) {
                    acc.add(2 * ab.dot(a - d), 1);
                }
            }
        }
    }
    Ok(acc.into_map(|&c| c > 0))
}

/// Histogram of Σ f(Q) over 𝒬^τ(S). `weights[i]` is f at `s.points()[i]`;
/// `None` means unit weights (exact counts).
pub fn tau_histogram(s: &PointSet, weights: Option<&[Complex64]>) -> Result<TauHistogram> {
    tau_histogram_bounded(s, weights, DEFAULT_MAX_POINTS)
}

pub fn tau_histogram_bounded(
    s: &PointSet,
    weights: Option<&[Complex64]>,
    max_points: usize,
) -> Result<TauHistogram> {
    let Some(w) = weights else {
        let counts = tau_counts(s, max_points)?;
        let entries: BTreeMap<i64, Complex64> = counts
            .into_iter()
            .map(|(t, c)| (t, Complex64::new(c as f64, 0.0)))
            .collect();
        let total = entries.values().sum();
        return Ok(TauHistogram {
            entries,
            total,
            unit_weights: true,
        });
    };
    if w.len() != s.len() {
        return Err(Error::domain(format!(
            "{} weights supplied for {} points",
            w.len(),
            s.len()
        )));
    }
    s.check_size(max_points)?;
    let pts = s.points();
    let conj: Vec<Complex64> = w.iter().map(|z| z.conj()).collect();
    let mut acc = TauAccumulator::<Complex64>::new(2 * s.diameter2());
    for (ia, &a) in pts.iter().enumerate() {
        for (ib, &b) in pts.iter().enumerate() {
            let head = w[ia] * conj[ib];
            let ab = a - b;
            for (id, &d) in pts.iter().enumerate() {
                if let Some(ic) = s.index_of(b + d - a) {
                    acc.add(2 * ab.dot(a - d), head * w[ic] * conj[id]);
                }
            }
        }
    }
    let entries = acc.into_map(|v| *v != Complex64::default());
    let total = entries.values().sum();
    Ok(TauHistogram {
        entries,
        total,
        unit_weights: false,
    })
}

/// #{(x₁,x₂,x₃,x₄) ∈ S⁴ : x₁ + x₃ = x₂ + x₄}, via representation counts of sums.
pub fn additive_energy(s: &PointSet) -> Result<u64> {
    s.check_size(DEFAULT_MAX_POINTS * 8)?;
    let mut reps: HashMap<LatticePoint, u64> = HashMap::new();
    for &a in s.points() {
        for &b in s.points() {
            *reps.entry(a + b).or_default() += 1;
        }
    }
    Ok(reps.values().map(|r| r * r).sum())
}

/// Cumulative count over 0 ≤ τ ≤ M (or 1 ≤ τ ≤ M when `include_zero` is false).
pub fn count_tau_range(s: &PointSet, max_tau: i64, include_zero: bool) -> Result<u64> {
    if max_tau < 1 {
        return Err(Error::domain("M must be ≥ 1"));
    }
    let counts = tau_counts(s, DEFAULT_MAX_POINTS)?;
    Ok(cumulative_from_counts(&counts, max_tau, include_zero))
}

pub fn cumulative_from_counts(counts: &BTreeMap<i64, u64>, max_tau: i64, include_zero: bool) -> u64 {
    let lo = if include_zero { 0 } else { 1 };
    counts.range(lo..=max_tau).map(|(_, c)| *c).sum()
}

/// #{(ξ₋₁, ξ₀, ξ₁) ∈ S³ : ξ₋₁ + ξ₁ = 2ξ₀}, degenerate triples included.
pub fn ap3_count(s: &PointSet) -> Result<u64> {
    s.check_size(DEFAULT_MAX_POINTS * 8)?;
    let mut n = 0u64;
    for &a in s.points() {
        for &c in s.points() {
            let m = a + c;
            if m.x % 2 == 0 && m.y % 2 == 0 && s.contains(LatticePoint::raw(m.x / 2, m.y / 2)) {
                n += 1;
            }
        }
    }
    Ok(n)
}

fn points_on_line_through(s: &PointSet, p: LatticePoint, dir: LatticePoint) -> usize {
    let line = Line::from_point_direction(p, dir);
    s.points().iter().filter(|&&q| line.contains(q)).count()
}

/// κ(ξ₁, ξ₂): the larger of the point counts of S on the line through ξ₁
/// along ξ₂ − ξ₁ and along its perpendicular.
pub fn cross_count(s: &PointSet, a: LatticePoint, b: LatticePoint) -> Result<usize> {
    if a == b {
        return Err(Error::domain("cross count needs two distinct points"));
    }
    if !s.contains(a) || !s.contains(b) {
        return Err(Error::domain("cross count points must belong to S"));
    }
    let d = b - a;
    Ok(points_on_line_through(s, a, d).max(points_on_line_through(s, a, d.perp())))
}

/// Line a·x + b·y = c in primitive form: gcd(a, b, c) = 1 and the first
/// nonzero of (a, b) positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Line {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Line {
    pub fn canonical(a: i64, b: i64, c: i64) -> Result<Line> {
        let line = Line { a, b, c };
        if line.is_canonical() {
            Ok(line)
        } else {
            Err(Error::domain(format!("line {a}x + {b}y = {c} is not in canonical form")))
        }
    }

    pub fn is_canonical(&self) -> bool {
        if self.a == 0 && self.b == 0 {
            return false;
        }
        let g = gcd(
            gcd(self.a.unsigned_abs(), self.b.unsigned_abs()),
            self.c.unsigned_abs(),
        );
        let lead = if self.a != 0 { self.a } else { self.b };
        g == 1 && lead > 0
    }

    fn from_point_direction(p: LatticePoint, dir: LatticePoint) -> Line {
        let mut n = primitive(dir).perp();
        if n.x < 0 || (n.x == 0 && n.y < 0) {
            n = -n;
        }
        Line {
            a: n.x,
            b: n.y,
            c: n.dot(p),
        }
    }

    pub fn through(p: LatticePoint, q: LatticePoint) -> Result<Line> {
        if p == q {
            return Err(Error::domain("a line needs two distinct points"));
        }
        Ok(Line::from_point_direction(p, q - p))
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        self.a * p.x + self.b * p.y == self.c
    }
}

/// All lines meeting S in at least k points, with their point counts.
pub fn rich_lines(s: &PointSet, k: usize) -> Result<Vec<(Line, usize)>> {
    if k < 2 {
        return Err(Error::domain("rich-line threshold k must be ≥ 2"));
    }
    s.check_size(DEFAULT_MAX_POINTS * 8)?;
    if k > s.len() {
        return Ok(Vec::new());
    }
    let pts = s.points();
    let mut pairs: HashMap<Line, usize> = HashMap::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            *pairs
                .entry(Line::from_point_direction(pts[i], pts[j] - pts[i]))
                .or_default() += 1;
        }
    }
    let mut out: Vec<(Line, usize)> = pairs
        .into_iter()
        .map(|(line, p)| {
            // p = n(n−1)/2
            let n = (1 + crate::lattice::isqrt(1 + 8 * p as u64) as usize) / 2;
            (line, n)
        })
        .filter(|&(_, n)| n >= k)
        .collect();
    out.sort();
    Ok(out)
}

/// #{(p, ℓ) : p ∈ S, ℓ ∈ lines, p ∈ ℓ}.
pub fn point_line_incidences(s: &PointSet, lines: &[Line]) -> Result<u64> {
    if let Some(bad) = lines.iter().find(|l| !l.is_canonical()) {
        return Err(Error::domain(format!("non-canonical line {bad:?}")));
    }
    let mut n = 0u64;
    for line in lines {
        n += s.points().iter().filter(|&&p| line.contains(p)).count() as u64;
    }
    Ok(n)
}

/// Σ over ordered rectangles Q = (ξ₁, ξ₂, ξ₃, ξ) ∈ 𝒬⁰(S) having `xi` as last
/// vertex of f(ξ₁)·conj f(ξ₂)·f(ξ₃). Brute force over (ξ₁, ξ₃) ∈ S².
pub fn resonant_vertex_sum(s: &PointSet, weights: &[Complex64], xi: LatticePoint) -> Result<Complex64> {
    if weights.len() != s.len() {
        return Err(Error::domain("one weight per point required"));
    }
    let pts = s.points();
    let mut total = Complex64::default();
    for (i1, &a) in pts.iter().enumerate() {
        let da = a - xi;
        let mut row = Complex64::default();
        for (i3, &c) in pts.iter().enumerate() {
            if da.dot(c - xi) != 0 {
                continue;
            }
            if let Some(i2) = s.index_of(a + c - xi) {
                row += weights[i3] * weights[i2].conj();
            }
        }
        total += weights[i1] * row;
    }
    Ok(total)
}

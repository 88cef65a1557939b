//! Gowers U^k norms, the rectangular Π and Π_η norms, the dimension map and
//! quadratic Weyl sums.
//!
//! Unnormalized Gowers sums P_k are taken over ℤ^d with zero extension:
//! P₁(f) = |Σ f|², P_{k+1}(f) = Σ_η P_k(Alt_η f). Box norms divide by the
//! same sum for the box indicator, so the cyclic embedding size cancels.

use std::collections::{BTreeMap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{coset_representatives, LatticePoint};

/// Complex values on [N]^d = {−N..N}^d, zero outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxFunction {
    d: usize,
    n: i64,
    values: Vec<Complex64>,
}

impl BoxFunction {
    /// Values in row-major order over the box (last coordinate fastest).
    pub fn new(d: usize, n: i64, values: Vec<Complex64>) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::domain(format!("box dimension must be 1 or 2, got {d}")));
        }
        if n < 0 {
            return Err(Error::domain("box half-width must be ≥ 0"));
        }
        let side = (2 * n + 1) as usize;
        let expected = side.pow(d as u32);
        if values.len() != expected {
            return Err(Error::domain(format!(
                "expected {expected} values for [{n}]^{d}, got {}",
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("box function values must be finite"));
        }
        Ok(BoxFunction { d, n, values })
    }

    pub fn from_fn_1d(n: i64, f: impl FnMut(i64) -> Complex64) -> Result<Self> {
        BoxFunction::new(1, n, (-n..=n).map(f).collect())
    }

    pub fn from_fn_2d(n: i64, mut f: impl FnMut(i64, i64) -> Complex64) -> Result<Self> {
        let mut v = Vec::with_capacity(((2 * n + 1) * (2 * n + 1)) as usize);
        for x in -n..=n {
            for y in -n..=n {
                v.push(f(x, y));
            }
        }
        BoxFunction::new(2, n, v)
    }

    pub fn indicator(d: usize, n: i64) -> Result<Self> {
        let side = (2 * n.max(0) + 1) as usize;
        BoxFunction::new(d, n, vec![Complex64::new(1.0, 0.0); side.pow(d as u32)])
    }

    pub fn zeros(d: usize, n: i64) -> Result<Self> {
        let side = (2 * n.max(0) + 1) as usize;
        BoxFunction::new(d, n, vec![Complex64::default(); side.pow(d as u32)])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_width(&self) -> i64 {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn side(&self) -> i64 {
        2 * self.n + 1
    }

    fn offset(&self, x: &[i64]) -> Option<usize> {
        let mut idx = 0i64;
        for &c in x.iter().take(self.d) {
            if c < -self.n || c > self.n {
                return None;
            }
            idx = idx * self.side() + (c + self.n);
        }
        Some(idx as usize)
    }

    /// f(x) with zero extension; `x` has d coordinates.
    pub fn get(&self, x: &[i64]) -> Complex64 {
        self.offset(x).map(|i| self.values[i]).unwrap_or_default()
    }

    pub fn get1(&self, x: i64) -> Complex64 {
        self.get(&[x])
    }

    pub fn get2(&self, x: i64, y: i64) -> Complex64 {
        self.get(&[x, y])
    }

    /// Box coordinates in storage order.
    pub fn coords(&self) -> Vec<[i64; 2]> {
        let n = self.n;
        if self.d == 1 {
            (-n..=n).map(|x| [x, 0]).collect()
        } else {
            let mut out = Vec::with_capacity(self.values.len());
            for x in -n..=n {
                for y in -n..=n {
                    out.push([x, y]);
                }
            }
            out
        }
    }

    pub fn map(&self, f: impl Fn([i64; 2], Complex64) -> Complex64) -> BoxFunction {
        let values = self
            .coords()
            .into_iter()
            .zip(&self.values)
            .map(|(c, &v)| f(c, v))
            .collect();
        BoxFunction {
            d: self.d,
            n: self.n,
            values,
        }
    }

    pub fn scale(&self, s: Complex64) -> BoxFunction {
        self.map(|_, v| v * s)
    }

    pub fn add(&self, other: &BoxFunction) -> Result<BoxFunction> {
        self.check_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(BoxFunction {
            d: self.d,
            n: self.n,
            values,
        })
    }

    fn check_shape(&self, other: &BoxFunction) -> Result<()> {
        if self.d != other.d || self.n != other.n {
            return Err(Error::domain(format!(
                "shape mismatch: [{}]^{} vs [{}]^{}",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|z| **z != Complex64::default()).count()
    }

    /// g ⊗ h on [N]² from two functions on [N].
    pub fn tensor(g: &BoxFunction, h: &BoxFunction) -> Result<BoxFunction> {
        if g.d != 1 || h.d != 1 || g.n != h.n {
            return Err(Error::domain("tensor product needs two 1D functions on the same box"));
        }
        BoxFunction::from_fn_2d(g.n, |x, y| g.get1(x) * h.get1(y))
    }

    /// Nonzero entries as a sorted sparse function on ℤ² (1D uses y = 0).
    pub fn to_sparse(&self) -> SparseFn {
        self.coords()
            .into_iter()
            .zip(&self.values)
            .filter(|(_, v)| **v != Complex64::default())
            .map(|(c, &v)| (c, v))
            .collect()
    }
}

/// Sorted (position, value) list with nonzero values; positions in ℤ².
pub type SparseFn = Vec<([i64; 2], Complex64)>;

/// Alt_η f(x) = f(x)·conj f(x+η), zero-extended.
pub fn alt(f: &BoxFunction, eta: &[i64]) -> BoxFunction {
    let shift = |c: [i64; 2]| -> Complex64 {
        if f.d == 1 {
            f.get1(c[0] + eta[0])
        } else {
            f.get2(c[0] + eta[0], c[1] + eta[1])
        }
    };
    f.map(|c, v| v * shift(c).conj())
}

fn sparse_alt(f: &[([i64; 2], Complex64)], eta: [i64; 2], out: &mut SparseFn) {
    out.clear();
    let mut j = 0;
    for &(p, v) in f {
        let target = [p[0] + eta[0], p[1] + eta[1]];
        while j < f.len() && f[j].0 < target {
            j += 1;
        }
        if j == f.len() {
            break;
        }
        if f[j].0 == target {
            let w = v * f[j].1.conj();
            if w != Complex64::default() {
                out.push((p, w));
            }
        }
    }
}

fn bounding_box(f: &[([i64; 2], Complex64)]) -> ([i64; 2], [i64; 2]) {
    let mut lo = [i64::MAX; 2];
    let mut hi = [i64::MIN; 2];
    for (p, _) in f {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    (lo, hi)
}

/// Shifts η > 0 (lexicographically) for which Alt_η f can be nonzero.
fn positive_shifts(f: &[([i64; 2], Complex64)]) -> Vec<[i64; 2]> {
    let (lo, hi) = bounding_box(f);
    let (wx, wy) = (hi[0] - lo[0], hi[1] - lo[1]);
    let n = f.len() as i64;
    let box_count = (wx + 1).saturating_mul(2 * wy + 1);
    if box_count <= n * (n - 1) / 2 {
        let mut out = Vec::with_capacity(box_count as usize);
        for ey in 1..=wy {
            out.push([0, ey]);
        }
        for ex in 1..=wx {
            for ey in -wy..=wy {
                out.push([ex, ey]);
            }
        }
        out
    } else {
        let mut out = Vec::with_capacity((n * (n - 1) / 2) as usize);
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                out.push([f[j].0[0] - f[i].0[0], f[j].0[1] - f[i].0[1]]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Unnormalized P_k over ℤ² by the Alt recursion on sparse functions.
/// Alt_{−η} f is a conjugated translate of Alt_η f, so only η ≥ 0 is visited.
pub fn gowers_sum_recursive_sparse(f: &[([i64; 2], Complex64)], k: usize) -> f64 {
    if f.is_empty() {
        return 0.0;
    }
    if k == 1 {
        return f.iter().map(|(_, v)| *v).sum::<Complex64>().norm_sqr();
    }
    let mut buf = SparseFn::with_capacity(f.len());
    sparse_alt(f, [0, 0], &mut buf);
    let mut total = gowers_sum_recursive_sparse(&buf, k - 1);
    let mut half = 0.0;
    for eta in positive_shifts(f) {
        sparse_alt(f, eta, &mut buf);
        if !buf.is_empty() {
            half += gowers_sum_recursive_sparse(&buf, k - 1);
        }
    }
    total += 2.0 * half;
    total
}

/// Unnormalized P_k over the cyclic group (ℤ/mℤ)^d by direct enumeration of
/// (x, η₁, …, η_k) restricted to configurations inside the support.
pub fn gowers_sum_explicit_cyclic(f: &BoxFunction, k: usize, modulus: i64) -> f64 {
    let m = modulus as usize;
    let d = f.d;
    let cols = if d == 2 { m } else { 1 };
    let mut dense = vec![Complex64::default(); m * cols];
    for (c, &v) in f.coords().into_iter().zip(&f.values) {
        let i = c[0].rem_euclid(modulus) as usize;
        let j = if d == 2 { c[1].rem_euclid(modulus) as usize } else { 0 };
        dense[i * cols + j] += v;
    }
    let support: Vec<[usize; 2]> = (0..m)
        .flat_map(|i| (0..cols).map(move |j| [i, j]))
        .filter(|&[i, j]| dense[i * cols + j] != Complex64::default())
        .collect();
    if support.is_empty() {
        return 0.0;
    }

    struct Ctx<'a> {
        k: usize,
        m: usize,
        cols: usize,
        dense: &'a [Complex64],
        support: &'a [[usize; 2]],
    }

    // `verts[i]` is the vertex with bit pattern i; `prod` is the product of
    // C^{|ω|} f over the vertices placed so far.
    fn dfs(ctx: &Ctx, level: usize, verts: &mut Vec<[usize; 2]>, prod: Complex64) -> Complex64 {
        if level == ctx.k {
            return prod;
        }
        let (m, cols) = (ctx.m, ctx.cols);
        let base = verts[0];
        let count = verts.len();
        let mut acc = Complex64::default();
        for &s in ctx.support {
            let eta = [
                (s[0] + m - base[0]) % m,
                if cols > 1 { (s[1] + m - base[1]) % cols } else { 0 },
            ];
            let mut p = prod;
            let mut ok = true;
            for i in 0..count {
                let v = verts[i];
                let mut w = [v[0] + eta[0], v[1] + eta[1]];
                if w[0] >= m {
                    w[0] -= m;
                }
                if cols > 1 && w[1] >= m {
                    w[1] -= m;
                }
                let fv = ctx.dense[w[0] * cols + w[1]];
                if fv == Complex64::default() {
                    ok = false;
                    break;
                }
                verts.push(w);
                p *= if i.count_ones() % 2 == 0 { fv.conj() } else { fv };
            }
            if ok {
                acc += dfs(ctx, level + 1, verts, p);
            }
            verts.truncate(count);
        }
        acc
    }

    let ctx = Ctx {
        k,
        m,
        cols,
        dense: &dense,
        support: &support,
    };
    let mut total = Complex64::default();
    let mut verts = Vec::with_capacity(1 << k);
    for &x in &support {
        verts.clear();
        verts.push(x);
        total += dfs(&ctx, 0, &mut verts, dense[x[0] * cols + x[1]]);
    }
    total.re
}

fn check_k(f: &BoxFunction, k: usize) -> Result<()> {
    if !(1..=6).contains(&k) {
        return Err(Error::domain(format!("Gowers order k must be in 1..=6, got {k}")));
    }
    let limit = match (f.d, k) {
        (1, 1..=4) => 64,
        (1, _) => 16,
        (2, 1..=3) => 16,
        _ => 4,
    };
    if f.n > limit {
        return Err(Error::Resource(format!(
            "U^{k} on [{}]^{} exceeds the enumeration cap N ≤ {limit}",
            f.n, f.d
        )));
    }
    Ok(())
}

/// Smallest cyclic side that embeds [N] without wrap-around for U^k.
pub fn embedding_side(n: i64, k: usize) -> i64 {
    (1i64 << (k + 1)) * n.max(1)
}

fn normalize(num: f64, den: f64, k: usize) -> f64 {
    if num <= 0.0 {
        0.0
    } else {
        (num / den).powf(1.0 / (1u64 << k) as f64)
    }
}

/// Box U^k norm by enumeration on the cyclic group of side 2^{k+1}N.
pub fn gowers_norm_explicit(f: &BoxFunction, k: usize) -> Result<f64> {
    check_k(f, k)?;
    let m = embedding_side(f.n, k);
    let chi = BoxFunction::indicator(f.d, f.n)?;
    Ok(normalize(
        gowers_sum_explicit_cyclic(f, k, m),
        gowers_sum_explicit_cyclic(&chi, k, m),
        k,
    ))
}

/// Box U^k norm by the Alt recursion over ℤ^d.
pub fn gowers_norm_recursive(f: &BoxFunction, k: usize) -> Result<f64> {
    check_k(f, k)?;
    let chi = BoxFunction::indicator(f.d, f.n)?;
    Ok(normalize(
        gowers_sum_recursive_sparse(&f.to_sparse(), k),
        gowers_sum_recursive_sparse(&chi.to_sparse(), k),
        k,
    ))
}

/// ‖f‖_{U^k((ℤ/mℤ)^d)} for f zero-extended to the group, with the group average.
pub fn gowers_norm_group(f: &BoxFunction, k: usize, modulus: i64) -> Result<f64> {
    check_k(f, k)?;
    if modulus < 2 * f.n + 1 {
        return Err(Error::domain("cyclic group too small to contain the box"));
    }
    let p = if modulus >= embedding_side(f.n, k) {
        gowers_sum_recursive_sparse(&f.to_sparse(), k)
    } else {
        gowers_sum_explicit_cyclic(f, k, modulus)
    };
    let vol = (modulus as f64).powi((f.d * (k + 1)) as i32);
    Ok(normalize(p, vol, k))
}

fn require_2d(f: &BoxFunction) -> Result<()> {
    if f.d != 2 {
        return Err(Error::domain("Π norms are defined for d = 2"));
    }
    Ok(())
}

/// Rows of a sparse 2D function: x ↦ [(y, value)], both sorted.
fn rows(f: &[([i64; 2], Complex64)]) -> BTreeMap<i64, Vec<(i64, Complex64)>> {
    let mut out: BTreeMap<i64, Vec<(i64, Complex64)>> = BTreeMap::new();
    for &(p, v) in f {
        out.entry(p[0]).or_default().push((p[1], v));
    }
    for r in out.values_mut() {
        r.sort_by_key(|e| e.0);
    }
    out
}

fn row_inner(a: &[(i64, Complex64)], b: &[(i64, Complex64)]) -> Complex64 {
    let (mut i, mut j) = (0, 0);
    let mut s = Complex64::default();
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1.conj();
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// Π(f, f, f, f) = Σ_{x₁,x₂} |Σ_y f(x₁,y)·conj f(x₂,y)|² for a sparse 2D function.
pub fn pi_norm4_sparse(f: &[([i64; 2], Complex64)]) -> f64 {
    let r: Vec<Vec<(i64, Complex64)>> = rows(f).into_values().collect();
    let mut total = 0.0;
    for a in &r {
        for b in &r {
            total += row_inner(a, b).norm_sqr();
        }
    }
    total
}

/// Π(f₁₁, f₁₂, f₂₁, f₂₂) = Σ f₁₁(x₁,y₁)·conj(f₁₂(x₁,y₂)·f₂₁(x₂,y₁))·f₂₂(x₂,y₂).
pub fn pi_form(f11: &BoxFunction, f12: &BoxFunction, f21: &BoxFunction, f22: &BoxFunction) -> Result<Complex64> {
    for f in [f11, f12, f21, f22] {
        require_2d(f)?;
        f11.check_shape(f)?;
    }
    let n = f11.n;
    let row = |f: &BoxFunction, x: i64| -> Vec<Complex64> { (-n..=n).map(|y| f.get2(x, y)).collect() };
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(u, v)| u * v.conj()).sum() };
    let mut total = Complex64::default();
    for x1 in -n..=n {
        let r11 = row(f11, x1);
        let r12 = row(f12, x1);
        for x2 in -n..=n {
            // Σ_{y₁} f₁₁ conj f₂₁ · conj(Σ_{y₂} f₁₂ conj f₂₂)
            let a = dot(&r11, &row(f21, x2));
            let b = dot(&r12, &row(f22, x2));
            total += a * b.conj();
        }
    }
    Ok(total)
}

/// ‖f‖_Π = Π(f, f, f, f)^{1/4}.
pub fn pi_norm(f: &BoxFunction) -> Result<f64> {
    require_2d(f)?;
    Ok(pi_norm4_sparse(&f.to_sparse()).powf(0.25))
}

/// z ↦ f(η·z + ξ) with η·z = z.x·η + z.y·η^⊥, for each coset representative ξ.
pub fn coset_extractions(f: &[([i64; 2], Complex64)], eta: LatticePoint) -> Result<Vec<(LatticePoint, SparseFn)>> {
    let cosets = coset_representatives(eta)?;
    let mut parts: Vec<SparseFn> = vec![Vec::new(); cosets.len()];
    for &(p, v) in f {
        let (m, n, rep) = cosets.decompose(LatticePoint::raw(p[0], p[1]));
        let idx = cosets.index_of(rep);
        parts[idx].push(([m, n], v));
    }
    Ok(cosets
        .representatives
        .iter()
        .copied()
        .zip(parts)
        .map(|(r, mut part)| {
            part.sort_by_key(|e| e.0);
            (r, part)
        })
        .collect())
}

/// ‖f‖⁴_{Π_η} = Σ_{ξ ∈ ℤ²/ηℤ²} ‖f(η·+ξ)‖⁴_Π on a sparse function.
pub fn pi_eta_norm4_sparse(f: &[([i64; 2], Complex64)], eta: LatticePoint) -> Result<f64> {
    Ok(coset_extractions(f, eta)?
        .iter()
        .map(|(_, part)| pi_norm4_sparse(part))
        .sum())
}

pub fn pi_eta_norm(f: &BoxFunction, eta: LatticePoint) -> Result<f64> {
    require_2d(f)?;
    Ok(pi_eta_norm4_sparse(&f.to_sparse(), eta)?.powf(0.25))
}

/// Σ_{m,n} Σ_z f(z)·conj f(z+mη)·conj f(z+nη^⊥)·f(z+mη+nη^⊥), by direct summation.
pub fn pi_eta_norm4_alt_form(f: &BoxFunction, eta: LatticePoint) -> Result<f64> {
    require_2d(f)?;
    if eta.is_zero() {
        return Err(Error::domain("Π_η needs η ≠ 0"));
    }
    let n = f.n;
    let reach = |c: i64| if c == 0 { 0 } else { (2 * n) / c.abs() };
    let mr = reach(eta.x).max(reach(eta.y));
    let per = eta.perp();
    let mut total = Complex64::default();
    for m in -mr..=mr {
        let a = eta * m;
        for k in -mr..=mr {
            let b = per * k;
            for x in -n..=n {
                for y in -n..=n {
                    let v = f.get2(x, y);
                    if v == Complex64::default() {
                        continue;
                    }
                    total += v
                        * f.get2(x + a.x, y + a.y).conj()
                        * f.get2(x + b.x, y + b.y).conj()
                        * f.get2(x + a.x + b.x, y + a.y + b.y);
                }
            }
        }
    }
    Ok(total.re)
}

/// Both sides of ‖f‖⁴_{Π_{η₁η₂}} = Σ_{ξ ∈ ℤ²/η₁ℤ²} ‖f(η₁·+ξ)‖⁴_{Π_{η₂}}.
pub fn pi_eta_multiplicativity(f: &[([i64; 2], Complex64)], eta1: LatticePoint, eta2: LatticePoint) -> Result<(f64, f64)> {
    let lhs = pi_eta_norm4_sparse(f, eta1.gaussian_mul(eta2))?;
    let mut rhs = 0.0;
    for (_, part) in coset_extractions(f, eta1)? {
        rhs += pi_eta_norm4_sparse(&part, eta2)?;
    }
    Ok((lhs, rhs))
}

fn alt2_sum_1d(g: &BoxFunction, s: i64, t: i64) -> Complex64 {
    let n = g.n;
    (-n..=n)
        .map(|x| g.get1(x) * g.get1(x + s).conj() * g.get1(x + t).conj() * g.get1(x + s + t))
        .sum()
}

/// Σ_{m,n} |Σ_x Alt_{m·a, n·b} g(x)|² for a 1D function g; a = b = 1 is the
/// unrestricted sum.
pub fn two_tensor_inner(g: &BoxFunction, a: i64, b: i64) -> Result<f64> {
    if g.d != 1 || a == 0 || b == 0 {
        return Err(Error::domain("two-tensor sum needs a 1D function and nonzero steps"));
    }
    let n = g.n;
    let (ma, mb) = ((2 * n) / a.abs(), (2 * n) / b.abs());
    let mut total = 0.0;
    for m in -ma..=ma {
        for k in -mb..=mb {
            total += alt2_sum_1d(g, m * a, k * b).norm_sqr();
        }
    }
    Ok(total)
}

/// Σ_{m,n} (Σ_x Alt_{mη₁, −nη₂} g)(Σ_y Alt_{mη₂, nη₁} h), which is ‖g⊗h‖⁴_{Π_η}.
pub fn two_tensor_pi_eta4(g: &BoxFunction, h: &BoxFunction, eta: LatticePoint) -> Result<f64> {
    if g.d != 1 || h.d != 1 || g.n != h.n || eta.is_zero() {
        return Err(Error::domain("two-tensor form needs 1D g, h on one box and η ≠ 0"));
    }
    let n = g.n;
    let reach = |c: i64| if c == 0 { 0 } else { (2 * n) / c.abs() };
    let r = reach(eta.x).max(reach(eta.y));
    let mut total = Complex64::default();
    for m in -r..=r {
        for k in -r..=r {
            total += alt2_sum_1d(g, m * eta.x, -k * eta.y) * alt2_sum_1d(h, m * eta.y, k * eta.x);
        }
    }
    Ok(total.re)
}

/// |Π(f₁₁, f₁₂, f₂₁, f₂₂)| ≤ Π_{j,k} ‖f_{jk}‖_Π, with 10⁻⁹ relative slack.
pub fn cs_chain_check(f11: &BoxFunction, f12: &BoxFunction, f21: &BoxFunction, f22: &BoxFunction) -> Result<bool> {
    let lhs = pi_form(f11, f12, f21, f22)?.norm();
    let rhs = pi_norm(f11)? * pi_norm(f12)? * pi_norm(f21)? * pi_norm(f22)?;
    Ok(lhs <= rhs * (1.0 + 1e-9) + 1e-300)
}

/// ⟨f, g⊗h⟩ = Σ f(x,y)·conj(g(x)h(y)).
pub fn tensor_inner(f: &BoxFunction, g: &BoxFunction, h: &BoxFunction) -> Result<Complex64> {
    require_2d(f)?;
    let gh = BoxFunction::tensor(g, h)?;
    f.check_shape(&gh)?;
    Ok(f.values.iter().zip(&gh.values).map(|(a, b)| a * b.conj()).sum())
}

/// |⟨f, g⊗h⟩| ≤ ‖f‖_Π·‖g‖₂·‖h‖₂, with 10⁻⁹ relative slack.
pub fn tensor_corollary_check(f: &BoxFunction, g: &BoxFunction, h: &BoxFunction) -> Result<bool> {
    let lhs = tensor_inner(f, g, h)?.norm();
    Ok(lhs <= pi_norm(f)? * g.l2_norm() * h.l2_norm() * (1.0 + 1e-9) + 1e-300)
}

#[derive(Clone, Debug)]
pub struct TensorCorrelation {
    pub g: BoxFunction,
    pub h: BoxFunction,
    pub base_point: [i64; 2],
    pub correlation: f64,
}

/// Row and column of f through the base point z₀ that maximizes
/// Re Σ_{m,n} f(z₀)·conj f(z₀+(m,0))·conj f(z₀+(0,n))·f(z₀+(m,n)).
pub fn best_tensor_correlate(f: &BoxFunction) -> Result<TensorCorrelation> {
    require_2d(f)?;
    let n = f.n;
    let mut best: Option<([i64; 2], f64)> = None;
    for x in -n..=n {
        for y in -n..=n {
            let v = f.get2(x, y);
            if v == Complex64::default() {
                continue;
            }
            let mut s = Complex64::default();
            for m in -2 * n..=2 * n {
                let a = f.get2(x + m, y);
                if a == Complex64::default() {
                    continue;
                }
                for k in -2 * n..=2 * n {
                    s += a.conj() * f.get2(x, y + k).conj() * f.get2(x + m, y + k);
                }
            }
            let score = (v * s).re;
            if best.map_or(true, |(_, b)| score > b) {
                best = Some(([x, y], score));
            }
        }
    }
    let Some((z0, _)) = best else {
        return Ok(TensorCorrelation {
            g: BoxFunction::zeros(1, n)?,
            h: BoxFunction::zeros(1, n)?,
            base_point: [0, 0],
            correlation: 0.0,
        });
    };
    let g = BoxFunction::from_fn_1d(n, |x| f.get2(x, z0[1]))?;
    let h = BoxFunction::from_fn_1d(n, |y| f.get2(z0[0], y))?;
    let correlation = tensor_inner(f, &g, &h)?.norm();
    Ok(TensorCorrelation {
        g,
        h,
        base_point: z0,
        correlation,
    })
}

/// Ñ = 2⁹N.
pub fn dimension_map_stride(n: i64) -> i64 {
    512 * n
}

/// φ_N(n₁, n₂) = n₁ + Ñ·n₂.
pub fn dimension_map(n: i64, p: [i64; 2]) -> i64 {
    p[0] + dimension_map_stride(n) * p[1]
}

/// φ_N is injective on [−4N, 4N]², which covers every alternating
/// combination a − b − c + d of four box points.
pub fn dimension_map_is_freiman(n: i64) -> bool {
    let r = 4 * n;
    let mut seen = HashSet::new();
    for x in -r..=r {
        for y in -r..=r {
            if !seen.insert(dimension_map(n, [x, y])) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DimensionMapReport {
    pub d: usize,
    pub n: i64,
    pub sum_2d: f64,
    pub sum_1d: f64,
    pub freiman: bool,
    pub equal: bool,
}

/// Compares the unnormalized U^{d+1} sums of g on [N]² and of ι_N g on ℤ.
pub fn dimension_map_check(g: &BoxFunction, d: usize) -> Result<DimensionMapReport> {
    require_2d(g)?;
    if !(1..=6).contains(&d) {
        return Err(Error::domain("dimension map order d must be in 1..=6"));
    }
    let n = g.n;
    let k = d + 1;
    let sparse = g.to_sparse();
    let sum_2d = gowers_sum_recursive_sparse(&sparse, k);
    let mut line: SparseFn = sparse.iter().map(|&(p, v)| ([dimension_map(n, p), 0], v)).collect();
    line.sort_by_key(|e| e.0);
    let sum_1d = gowers_sum_recursive_sparse(&line, k);
    let freiman = dimension_map_is_freiman(n);
    let scale = sum_2d.abs().max(sum_1d.abs()).max(1e-300);
    Ok(DimensionMapReport {
        d,
        n,
        sum_2d,
        sum_1d,
        freiman,
        equal: freiman && (sum_2d - sum_1d).abs() <= 1e-12 * scale,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WeylSumQuery {
    pub a: f64,
    pub b: f64,
    pub n: u64,
}

/// |E_{n ∈ [N]} e^{i(an² + bn)}| over the 2N+1 integers −N..N.
pub fn weyl_sum(q: &WeylSumQuery) -> Result<f64> {
    if q.n < 1 {
        return Err(Error::domain("Weyl sum needs N ≥ 1"));
    }
    let n = q.n as i64;
    let s: Complex64 = (-n..=n)
        .map(|k| {
            let kf = k as f64;
            Complex64::from_polar(1.0, q.a * kf * kf + q.b * kf)
        })
        .sum();
    Ok(s.norm() / (2 * n + 1) as f64)
}

/// The m ≤ `max_m` minimizing N²·dist(a, (2π/m)ℤ), with that scaled distance.
pub fn weyl_major_arc(a: f64, n: u64, max_m: u64) -> (u64, f64) {
    let tau = std::f64::consts::TAU;
    let mut best = (1, f64::INFINITY);
    for m in 1..=max_m.max(1) {
        let step = tau / m as f64;
        let r = a.rem_euclid(step);
        let dist = r.min(step - r) * (n as f64).powi(2);
        if dist < best.1 {
            best = (m, dist);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_unit_1d(rng: &mut ChaCha8Rng, n: i64) -> BoxFunction {
        BoxFunction::from_fn_1d(n, |_| Complex64::from_polar(1.0, rng.gen_range(0.0..6.3))).unwrap()
    }

    fn random_2d(rng: &mut ChaCha8Rng, n: i64) -> BoxFunction {
        BoxFunction::from_fn_2d(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap()
    }

    fn random_int_2d(rng: &mut ChaCha8Rng, n: i64) -> BoxFunction {
        BoxFunction::from_fn_2d(n, |_, _| c(rng.gen_range(-2..=2) as f64, rng.gen_range(-2..=2) as f64)).unwrap()
    }

    #[test]
    fn alt_examples() {
        let one = BoxFunction::indicator(1, 4).unwrap();
        assert!(alt(&one, &[0]).values().iter().all(|v| *v == c(1.0, 0.0)));
        let alpha = 0.37;
        let f = BoxFunction::from_fn_1d(5, |n| Complex64::from_polar(1.0, alpha * n as f64)).unwrap();
        let g = alt(&f, &[3]);
        let expect = Complex64::from_polar(1.0, -alpha * 3.0);
        for x in -5..=5 {
            let v = g.get1(x);
            if x + 3 <= 5 {
                assert!((v - expect).norm() < 1e-14);
            } else {
                assert_eq!(v, Complex64::default());
            }
        }
    }

    #[test]
    fn alt_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_int_2d(&mut rng, 4);
        let a = alt(&alt(&f, &[1, -2]), &[3, 1]);
        let b = alt(&alt(&f, &[3, 1]), &[1, -2]);
        assert_eq!(a, b);
    }

    #[test]
    fn indicator_norm_is_one() {
        for k in 1..=4 {
            let chi = BoxFunction::indicator(1, 5).unwrap();
            assert!((gowers_norm_explicit(&chi, k).unwrap() - 1.0).abs() < 1e-12);
            assert!((gowers_norm_recursive(&chi, k).unwrap() - 1.0).abs() < 1e-12);
        }
        let chi2 = BoxFunction::indicator(2, 2).unwrap();
        assert!((gowers_norm_recursive(&chi2, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_function_norm() {
        let z = BoxFunction::zeros(1, 6).unwrap();
        assert_eq!(gowers_norm_recursive(&z, 3).unwrap(), 0.0);
        assert_eq!(gowers_norm_explicit(&z, 3).unwrap(), 0.0);
    }

    #[test]
    fn u1_is_mean_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_unit_1d(&mut rng, 7);
        let m = 64 * 7;
        let mean = f.values().iter().sum::<Complex64>().norm() / m as f64;
        assert!((gowers_norm_group(&f, 1, m).unwrap() - mean).abs() < 1e-14);
    }

    #[test]
    fn explicit_matches_recursive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 3, 6, 10] {
            let f = random_unit_1d(&mut rng, n);
            for k in 1..=4 {
                let a = gowers_norm_explicit(&f, k).unwrap();
                let b = gowers_norm_recursive(&f, k).unwrap();
                assert!((a - b).abs() < 1e-10, "n={n} k={k}: {a} vs {b}");
            }
        }
        let f = random_2d(&mut rng, 2);
        for k in 1..=3 {
            let a = gowers_norm_explicit(&f, k).unwrap();
            let b = gowers_norm_recursive(&f, k).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn embedding_size_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_unit_1d(&mut rng, 5);
        for k in 1..=3 {
            let m = embedding_side(5, k);
            let p1 = gowers_sum_explicit_cyclic(&f, k, m);
            let p2 = gowers_sum_explicit_cyclic(&f, k, 3 * m);
            assert!((p1 - p2).abs() < 1e-9 * p1.abs().max(1.0));
        }
    }

    #[test]
    fn polynomial_phases_have_unit_norm() {
        for deg in 1..=3usize {
            let f = BoxFunction::from_fn_1d(6, |n| {
                let x = n as f64;
                Complex64::from_polar(1.0, 0.3 * x + 0.71 * x.powi(deg as i32))
            })
            .unwrap();
            let v = gowers_norm_recursive(&f, deg + 1).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "degree {deg}: {v}");
        }
    }

    #[test]
    fn modulation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_unit_1d(&mut rng, 6);
        let g = f.map(|p, v| v * Complex64::from_polar(1.0, 1.234 * p[0] as f64));
        for k in 2..=3 {
            let a = gowers_norm_recursive(&f, k).unwrap();
            let b = gowers_norm_recursive(&g, k).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn gowers_norm_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let f = random_unit_1d(&mut rng, 4);
            let g = random_unit_1d(&mut rng, 4);
            for k in 2..=3 {
                let nf = gowers_norm_recursive(&f, k).unwrap();
                let ng = gowers_norm_recursive(&g, k).unwrap();
                let nfg = gowers_norm_recursive(&f.add(&g).unwrap(), k).unwrap();
                assert!(nfg <= (nf + ng) * (1.0 + 1e-9));
                let s = gowers_norm_recursive(&f.scale(c(0.0, -2.5)), k).unwrap();
                assert!((s - 2.5 * nf).abs() < 1e-9 * s);
            }
        }
    }

    #[test]
    fn group_norms_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 5, 8] {
            let f = random_unit_1d(&mut rng, n);
            let m = 64 * n;
            let norms: Vec<f64> = (1..=4).map(|k| gowers_norm_group(&f, k, m).unwrap()).collect();
            for w in norms.windows(2) {
                assert!(w[0] <= w[1] * (1.0 + 1e-12), "{norms:?}");
            }
        }
    }

    #[test]
    fn caps_and_orders_are_checked() {
        let f = BoxFunction::indicator(1, 2).unwrap();
        assert!(matches!(gowers_norm_recursive(&f, 0), Err(Error::Domain(_))));
        assert!(matches!(gowers_norm_recursive(&f, 7), Err(Error::Domain(_))));
        let big = BoxFunction::indicator(2, 20).unwrap();
        assert!(matches!(gowers_norm_recursive(&big, 2), Err(Error::Resource(_))));
    }

    fn pi4_brute(f11: &BoxFunction, f12: &BoxFunction, f21: &BoxFunction, f22: &BoxFunction) -> Complex64 {
        let n = f11.half_width();
        let mut s = Complex64::default();
        for x1 in -n..=n {
            for x2 in -n..=n {
                for y1 in -n..=n {
                    for y2 in -n..=n {
                        s += f11.get2(x1, y1) * (f12.get2(x1, y2) * f21.get2(x2, y1)).conj() * f22.get2(x2, y2);
                    }
                }
            }
        }
        s
    }

    #[test]
    fn pi_norm_examples() {
        let chi = BoxFunction::indicator(2, 3).unwrap();
        assert!((pi_norm(&chi).unwrap() - 7.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_unit_1d(&mut rng, 4);
        let h = BoxFunction::from_fn_1d(4, |x| c(x as f64, 1.0)).unwrap();
        let gh = BoxFunction::tensor(&g, &h).unwrap();
        assert!((pi_norm(&gh).unwrap() - g.l2_norm() * h.l2_norm()).abs() < 1e-9);
        let f = random_2d(&mut rng, 3);
        let brute = pi4_brute(&f, &f, &f, &f);
        assert!((pi_norm(&f).unwrap().powi(4) - brute.re).abs() < 1e-9 * brute.re);
        let one_d = BoxFunction::indicator(1, 3).unwrap();
        assert!(pi_norm(&one_d).is_err());
    }

    #[test]
    fn pi_form_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fs: Vec<BoxFunction> = (0..4).map(|_| random_2d(&mut rng, 2)).collect();
        let a = pi_form(&fs[0], &fs[1], &fs[2], &fs[3]).unwrap();
        let b = pi4_brute(&fs[0], &fs[1], &fs[2], &fs[3]);
        assert!((a - b).norm() < 1e-10 * b.norm().max(1.0));
    }

    #[test]
    fn pi_norm_triangle_and_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let f = random_2d(&mut rng, 3);
            let g = random_2d(&mut rng, 3);
            let s = pi_norm(&f.add(&g).unwrap()).unwrap();
            assert!(s <= (pi_norm(&f).unwrap() + pi_norm(&g).unwrap()) * (1.0 + 1e-9));
            let h = pi_norm(&f.scale(c(1.5, 2.0))).unwrap();
            assert!((h - 2.5 * pi_norm(&f).unwrap()).abs() < 1e-9 * h);
        }
    }

    #[test]
    fn pi_eta_trivial_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_2d(&mut rng, 3);
        let a = pi_eta_norm(&f, LatticePoint::raw(1, 0)).unwrap();
        assert!((a - pi_norm(&f).unwrap()).abs() < 1e-12);
        assert!(pi_eta_norm(&f, LatticePoint::raw(0, 0)).is_err());
    }

    #[test]
    fn pi_eta_two_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = random_2d(&mut rng, 4);
        for eta in [(1, 1), (2, 1), (1, -3), (0, 2)] {
            let eta = LatticePoint::raw(eta.0, eta.1);
            let a = pi_eta_norm4_sparse(&f.to_sparse(), eta).unwrap();
            let b = pi_eta_norm4_alt_form(&f, eta).unwrap();
            assert!((a - b).abs() < 1e-9 * a.max(1.0), "{eta}: {a} vs {b}");
        }
    }

    #[test]
    fn pi_eta_is_multiplicative_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let f = random_int_2d(&mut rng, 4);
            let (l, r) = pi_eta_multiplicativity(&f.to_sparse(), LatticePoint::raw(1, 1), LatticePoint::raw(1, 2)).unwrap();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn two_tensor_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let g = random_unit_1d(&mut rng, 4);
        let h = random_unit_1d(&mut rng, 4);
        let gh = BoxFunction::tensor(&g, &h).unwrap();
        for eta in [(1, 2), (2, -1), (3, 1)] {
            let eta = LatticePoint::raw(eta.0, eta.1);
            let a = two_tensor_pi_eta4(&g, &h, eta).unwrap();
            let b = pi_eta_norm4_sparse(&gh.to_sparse(), eta).unwrap();
            assert!((a - b).abs() < 1e-9 * b.max(1.0));
            let sub = two_tensor_inner(&g, eta.x, eta.y).unwrap();
            let full = two_tensor_inner(&g, 1, 1).unwrap();
            assert!(sub <= full * (1.0 + 1e-12));
        }
    }

    #[test]
    fn cs_chain_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let f = random_2d(&mut rng, 3);
        let lhs = pi_form(&f, &f, &f, &f).unwrap();
        assert!((lhs.re - pi_norm(&f).unwrap().powi(4)).abs() < 1e-9 * lhs.re);
        assert!(cs_chain_check(&f, &f, &f, &f).unwrap());

        let g = random_unit_1d(&mut rng, 3);
        let h = random_unit_1d(&mut rng, 3);
        let delta = BoxFunction::from_fn_1d(3, |x| if x == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
        let f12 = BoxFunction::tensor(&g, &delta).unwrap();
        let f21 = BoxFunction::tensor(&delta, &h).unwrap();
        let f22 = BoxFunction::tensor(&delta, &delta).unwrap();
        assert!((pi_norm(&f12).unwrap() - g.l2_norm()).abs() < 1e-12);
        assert!((pi_norm(&f22).unwrap() - 1.0).abs() < 1e-12);
        assert!(cs_chain_check(&f, &f12, &f21, &f22).unwrap());
        assert!(tensor_corollary_check(&f, &g, &h).unwrap());
    }

    #[test]
    fn cs_chain_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..30 {
            let fs: Vec<BoxFunction> = (0..4).map(|_| random_2d(&mut rng, 2)).collect();
            assert!(cs_chain_check(&fs[0], &fs[1], &fs[2], &fs[3]).unwrap());
        }
        let a = BoxFunction::indicator(2, 2).unwrap();
        let b = BoxFunction::indicator(2, 3).unwrap();
        assert!(cs_chain_check(&a, &a, &a, &b).is_err());
    }

    #[test]
    fn best_tensor_examples() {
        let z = BoxFunction::zeros(2, 3).unwrap();
        let r = best_tensor_correlate(&z).unwrap();
        assert_eq!(r.correlation, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = random_unit_1d(&mut rng, 3);
        let h = random_unit_1d(&mut rng, 3);
        let f = BoxFunction::tensor(&g, &h).unwrap();
        let r = best_tensor_correlate(&f).unwrap();
        // the row and column of a unit tensor are unimodular multiples of g and h
        assert!((r.correlation - 49.0).abs() < 1e-9);
        assert!(f.support_size() as f64 * r.correlation >= pi_norm(&f).unwrap().powi(4) * (1.0 - 1e-12));

        for _ in 0..10 {
            let f = BoxFunction::from_fn_2d(8, |_, _| Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..6.3))).unwrap();
            let r = best_tensor_correlate(&f).unwrap();
            assert!(f.support_size() as f64 * r.correlation >= pi_norm(&f).unwrap().powi(4) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn dimension_map_examples() {
        assert!(dimension_map_is_freiman(4));
        let chi = BoxFunction::indicator(2, 3).unwrap();
        let r = dimension_map_check(&chi, 1).unwrap();
        assert!(r.equal, "{r:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let g = random_2d(&mut rng, 4);
        let r = dimension_map_check(&g, 2).unwrap();
        assert!(r.equal, "{r:?}");
    }

    #[test]
    fn weyl_examples() {
        assert!((weyl_sum(&WeylSumQuery { a: 0.0, b: 0.0, n: 10 }).unwrap() - 1.0).abs() < 1e-14);
        let v = weyl_sum(&WeylSumQuery { a: 0.0, b: std::f64::consts::PI, n: 7 }).unwrap();
        assert!((v - 1.0 / 15.0).abs() < 1e-12);
        let major = weyl_sum(&WeylSumQuery { a: std::f64::consts::TAU / 5.0, b: 0.0, n: 1000 }).unwrap();
        let minor = weyl_sum(&WeylSumQuery { a: 2f64.sqrt(), b: 0.0, n: 1000 }).unwrap();
        assert!(major >= 0.4, "{major}");
        assert!(minor <= 0.1, "{minor}");
        let (m, dist) = weyl_major_arc(std::f64::consts::TAU * 3.0 / 7.0, 100, 20);
        assert_eq!(m, 7);
        assert!(dist < 1e-6);
    }
}

//! Simultaneous polynomial root finding (Aberth iteration) with multiplicity recovery.

use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::poly::TPoly;

type C64 = Complex64;

/// Truncated Taylor series `sum c_k h^k` of fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Series(pub Vec<C64>);

impl Series {
    pub fn constant(c: C64, order: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); order + 1];
        v[0] = c;
        Series(v)
    }

    /// The series of `t0 + h`.
    pub fn variable(t0: C64, order: usize) -> Self {
        let mut s = Series::constant(t0, order);
        if order > 0 {
            s.0[1] = C64::new(1.0, 0.0);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn add(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn add_const(&self, c: C64) -> Series {
        let mut s = self.clone();
        s.0[0] += c;
        s
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.0.len();
        let mut v = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            if self.0[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n - i {
                v[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(v)
    }

    /// Evaluate a polynomial with constant coefficients at this series.
    pub fn horner(&self, coeffs: &[C64]) -> Series {
        let mut acc = Series::constant(C64::new(0.0, 0.0), self.order());
        for c in coeffs.iter().rev() {
            acc = acc.mul(self).add_const(*c);
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

/// Something whose roots can be found: a degree and local Taylor expansions.
pub trait RootTarget: Sync {
    fn degree(&self) -> usize;

    /// Taylor coefficients of `p(t + h)` up to `h^order`.
    fn taylor(&self, t: C64, order: usize) -> Series;

    /// Starting radii, one per root.
    fn initial_radii(&self) -> Vec<f64>;

    fn value_and_derivative(&self, t: C64) -> (C64, C64) {
        let s = self.taylor(t, 1);
        (s.0[0], s.0[1])
    }
}

/// A polynomial given by complex coefficients (increasing degree).
pub struct ComplexPoly {
    coeffs: Vec<C64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        ComplexPoly { coeffs }
    }
}

impl RootTarget for ComplexPoly {
    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn taylor(&self, t: C64, order: usize) -> Series {
        Series::variable(t, order).horner(&self.coeffs)
    }

    fn initial_radii(&self) -> Vec<f64> {
        let logs: Vec<f64> = self.coeffs.iter().map(|c| c.norm().ln()).collect();
        newton_polygon_radii(&logs)
    }

    fn value_and_derivative(&self, t: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }
}

/// Removes a known factor `t^k` from another target.
pub struct Deflated<'a, T: RootTarget + ?Sized> {
    pub inner: &'a T,
    pub k: usize,
}

impl<T: RootTarget + ?Sized> RootTarget for Deflated<'_, T> {
    fn degree(&self) -> usize {
        self.inner.degree() - self.k
    }

    fn taylor(&self, t: C64, order: usize) -> Series {
        let p = self.inner.taylor(t, order);
        if self.k == 0 {
            return p;
        }
        // (t + h)^{-k} = t^{-k} sum_j binom(-k, j) (h / t)^j
        let mut inv = vec![C64::new(0.0, 0.0); order + 1];
        let tk = t.powi(-(self.k as i32));
        let mut binom = 1.0;
        for (j, slot) in inv.iter_mut().enumerate() {
            *slot = tk * binom / t.powi(j as i32);
            binom *= -((self.k + j) as f64) / (j + 1) as f64;
        }
        p.mul(&Series(inv))
    }

    fn initial_radii(&self) -> Vec<f64> {
        let mut r = self.inner.initial_radii();
        if r.len() == self.degree() {
            return r;
        }
        r.sort_by(|a, b| a.total_cmp(b));
        r.split_off(self.k.min(r.len()))
    }
}

/// Radii from the upper convex hull of `(k, log|c_k|)`; `-inf` entries are skipped.
pub fn newton_polygon_radii(logs: &[f64]) -> Vec<f64> {
    let pts: Vec<(usize, f64)> = logs.iter().copied().enumerate().filter(|(_, l)| l.is_finite()).collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut radii = Vec::new();
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let r = ((li - lj) / (j - i) as f64).exp();
        radii.extend(std::iter::repeat(r).take(j - i));
    }
    radii
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub source: String,
}

impl RootSet {
    /// Total count with multiplicity.
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Index of a root within `tol` of `z`, if any.
    pub fn find_near(&self, z: C64, tol: f64) -> Option<usize> {
        self.roots.iter().position(|r| (r.value - z).norm() <= tol)
    }

    pub fn values(&self) -> Vec<C64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    /// Values repeated according to multiplicity.
    pub fn values_with_multiplicity(&self) -> Vec<C64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat(r.value).take(r.multiplicity))
            .collect()
    }

    /// CSV with header `re,im,multiplicity,residual,source`; optional leading comment line.
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut s = String::new();
        if let Some(c) = comment {
            let _ = writeln!(s, "# {c}");
        }
        s.push_str("re,im,multiplicity,residual,source\n");
        for r in &self.roots {
            let src = r.source.as_deref().unwrap_or(&self.source);
            let _ = writeln!(
                s,
                "{:.17e},{:.17e},{},{:.3e},{}",
                r.value.re,
                r.value.im,
                r.multiplicity,
                r.residual,
                src.replace(',', ";")
            );
        }
        s
    }

    pub fn write_csv(&self, w: &mut impl Write, comment: Option<&str>) -> Result<()> {
        w.write_all(self.to_csv(comment).as_bytes())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AberthConfig {
    pub max_iter: usize,
    /// Link radius factor for cluster detection.
    pub cluster_factor: f64,
    /// A simple root is accepted when its Newton step is below this, relative to `1 + |z|`.
    pub accept_tol: f64,
    /// Approximations closer than this (relative to `1 + |z|`) always belong to one cluster.
    pub merge_tol: f64,
    /// Clusters closer than this (relative to `1 + |z|`) are merged when their spread is at the
    /// rounding-noise level for the combined multiplicity.
    pub noise_merge_radius: f64,
}

impl Default for AberthConfig {
    fn default() -> Self {
        AberthConfig { max_iter: 3000, cluster_factor: 4.0, accept_tol: 1e-8, merge_tol: 1e-7, noise_merge_radius: 1e-4 }
    }
}

/// Find all roots of a target, grouping numerically multiple roots.
pub fn solve_target<T: RootTarget + ?Sized>(target: &T, cfg: &AberthConfig) -> Result<Vec<Root>> {
    let n = target.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut radii = target.initial_radii();
    if radii.len() != n || radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        radii = vec![1.0; n];
    }
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let ang = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            C64::from_polar(radii[k], ang)
        })
        .collect();
    let mut done = vec![false; n];
    let mut last_step = vec![f64::INFINITY; n];

    for _ in 0..cfg.max_iter {
        let steps: Vec<Option<C64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                if done[i] {
                    return None;
                }
                let zi = z[i];
                let ratio = newton_ratio(target, zi, n);
                let mut s = C64::new(0.0, 0.0);
                for (j, zj) in z.iter().enumerate() {
                    if j != i {
                        let diff = zi - zj;
                        if diff != C64::new(0.0, 0.0) {
                            s += diff.inv();
                        }
                    }
                }
                let denom = C64::new(1.0, 0.0) - ratio * s;
                let w = if denom.norm() > 0.0 && denom.is_finite() { ratio / denom } else { ratio };
                Some(if w.is_finite() { w } else { C64::new(0.0, 0.0) })
            })
            .collect();
        let mut active = 0;
        for (i, st) in steps.into_iter().enumerate() {
            if let Some(w) = st {
                z[i] -= w;
                let size = w.norm();
                last_step[i] = size;
                if size <= 4.0 * f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                    done[i] = true;
                } else {
                    active += 1;
                }
            }
        }
        if active == 0 {
            break;
        }
    }

    // Cluster radii from a fresh Newton step and the last Aberth step.
    let radius: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let r = newton_ratio(target, z[i], n).norm();
            let r = if r.is_finite() { r } else { f64::INFINITY };
            r.max(if done[i] { 0.0 } else { last_step[i] })
        })
        .collect();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let gap = (z[i] - z[j]).norm();
            if gap <= cfg.cluster_factor * (radius[i] + radius[j]) || gap <= cfg.merge_tol * (1.0 + z[i].norm()) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let groups = merge_noise_clusters(target, &z, groups.into_values().collect(), cfg);

    let mut roots = Vec::with_capacity(groups.len());
    for members in &groups {
        let m = members.len();
        let centroid = members.iter().map(|&i| z[i]).sum::<C64>() / m as f64;
        let spread = members.iter().map(|&i| (z[i] - centroid).norm()).fold(0.0, f64::max);
        let value = if m == 1 {
            let zi = z[members[0]];
            let r = radius[members[0]];
            if !(r <= cfg.accept_tol * (1.0 + zi.norm())) {
                return Err(Error::ConvergenceFailure(format!(
                    "root near {zi} did not converge (Newton step {r:.2e})"
                )));
            }
            zi
        } else {
            refine_multiple(target, centroid, m, spread)
        };
        let residual = target.taylor(value, 0).0[0].norm();
        roots.push(Root { value, multiplicity: m, residual, source: None });
    }
    sort_roots(&mut roots);
    Ok(roots)
}

/// A k-fold root perturbed by rounding noise `e` splits into `k` approximations at distance about
/// `(e / |a_k|)^{1/k}`, with `a_k` the k-th Taylor coefficient. Nearby groups whose combined
/// spread is within a small factor of that radius are merged into one multiple root.
fn merge_noise_clusters<T: RootTarget + ?Sized>(
    target: &T,
    z: &[C64],
    groups: Vec<Vec<usize>>,
    cfg: &AberthConfig,
) -> Vec<Vec<usize>> {
    let g = groups.len();
    let mut parent: Vec<usize> = (0..g).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    // Sweep in order of real part so only nearby groups are compared.
    let reps: Vec<C64> = groups.iter().map(|m| z[m[0]]).collect();
    let mut order: Vec<usize> = (0..g).collect();
    order.sort_by(|&a, &b| reps[a].re.total_cmp(&reps[b].re));
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            let limit = cfg.noise_merge_radius * (1.0 + reps[a].norm().max(reps[b].norm()));
            if reps[b].re - reps[a].re > 2.0 * limit {
                break;
            }
            let close = groups[a].iter().any(|&i| groups[b].iter().any(|&j| (z[i] - z[j]).norm() <= limit));
            if close {
                let (x, y) = (find(&mut parent, a), find(&mut parent, b));
                if x != y {
                    parent[x.max(y)] = x.min(y);
                }
            }
        }
    }
    let mut comps: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for k in 0..g {
        let r = find(&mut parent, k);
        comps.entry(r).or_default().push(k);
    }
    let mut out = Vec::with_capacity(g);
    for comp in comps.into_values() {
        if comp.len() == 1 {
            out.push(groups[comp[0]].clone());
            continue;
        }
        let members: Vec<usize> = comp.iter().flat_map(|&k| groups[k].iter().copied()).collect();
        if noise_level_cluster(target, z, &members) {
            out.push(members);
        } else {
            out.extend(comp.iter().map(|&k| groups[k].clone()));
        }
    }
    out.sort_by_key(|m| m[0]);
    out
}

fn noise_level_cluster<T: RootTarget + ?Sized>(target: &T, z: &[C64], members: &[usize]) -> bool {
    let k = members.len();
    let centroid = members.iter().map(|&i| z[i]).sum::<C64>() / k as f64;
    let spread = members.iter().map(|&i| (z[i] - centroid).norm()).fold(0.0, f64::max);
    // Compare values a little inside the cluster with the local Taylor model; nearby inputs share
    // rounding patterns, so the offset is a fraction of the spread rather than a few ulps.
    let local = target.taylor(centroid, k + 1);
    let offset = spread / 16.0;
    let noise = (0..8)
        .map(|d| {
            let h = C64::from_polar(offset, std::f64::consts::TAU * (d as f64 + 0.5) / 8.0);
            let model = local.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * h + c);
            (target.taylor(centroid + h, 0).0[0] - model).norm()
        })
        .fold(0.0, f64::max);
    let lead = local.0[k].norm();
    if !(lead > 0.0 && lead.is_finite()) {
        return false;
    }
    let radius = (noise / lead).powf(1.0 / k as f64);
    spread <= 8.0 * radius
}

/// `a / b` without overflowing `|b|^2`.
pub fn scaled_div(a: C64, b: C64) -> C64 {
    let k = b.re.abs().max(b.im.abs());
    if k == 0.0 || !k.is_finite() {
        return a / b;
    }
    (a / k) / (b / k)
}

fn newton_ratio<T: RootTarget + ?Sized>(target: &T, z: C64, n: usize) -> C64 {
    let (p, dp) = target.value_and_derivative(z);
    if p == C64::new(0.0, 0.0) {
        return p;
    }
    let r = scaled_div(p, dp);
    if r.is_finite() {
        r
    } else {
        // Far outside: p behaves like its leading term.
        z / n as f64
    }
}

/// Newton on the `(m-1)`-th derivative, started from a cluster centroid. That derivative has a
/// simple root there, so the iteration is well conditioned; the centroid is kept if it wanders
/// off.
fn refine_multiple<T: RootTarget + ?Sized>(target: &T, centroid: C64, m: usize, spread: f64) -> C64 {
    let mut c = centroid;
    let limit = 4.0 * spread.max(1e-300);
    for _ in 0..30 {
        let s = target.taylor(c, m);
        if !s.is_finite() || s.0[m] == C64::new(0.0, 0.0) {
            break;
        }
        let step = scaled_div(s.0[m - 1], s.0[m] * m as f64);
        if !step.is_finite() {
            break;
        }
        c -= step;
        if (c - centroid).norm() > limit {
            return centroid;
        }
        if step.norm() <= 4.0 * f64::EPSILON * c.norm().max(1e-300) {
            break;
        }
    }
    c
}

/// Deterministic order: by real part, then imaginary part.
pub fn sort_roots(roots: &mut [Root]) {
    roots.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
}

/// All roots of a polynomial in `t`, with multiplicities. Exact zeros at `t = 0` are split off first.
pub fn solve_roots<C: Coeff>(p: &TPoly<C>) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let k = p.low_order_zeros();
    let coeffs = p.shift_down(k).to_c64_vec();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::RootFindFailure("coefficients overflow double precision".into()));
    }
    let target = ComplexPoly::new(coeffs);
    let mut roots = solve_target(&target, &AberthConfig::default())?;
    for r in roots.iter_mut() {
        r.residual = p.eval(r.value).norm();
    }
    if k > 0 {
        roots.push(Root { value: C64::new(0.0, 0.0), multiplicity: k, residual: 0.0, source: None });
        sort_roots(&mut roots);
    }
    Ok(RootSet { roots, source: format!("polynomial of degree {}", p.degree().unwrap_or(0)) })
}

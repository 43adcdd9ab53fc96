//! Escape rates (dynamical Green's functions), Robin constants and Böttcher coordinates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::map::PolyMap;
use crate::poly::TPoly;

/// After crossing the escape radius, iterate at most this many more times.
pub const EXTRA_STEPS: usize = 10;

/// ...but stop once the orbit is this large.
pub const LARGE_MODULUS: f64 = 1e40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeResult {
    /// Escape rate; zero when the orbit stayed bounded for the whole budget.
    pub g: f64,
    pub iterations_used: usize,
    /// Bound on the distance to the limit.
    pub err: f64,
    pub escaped: bool,
}

/// `lim d^{-n} log|f^n(z0)|` for a single map, with the leading-coefficient correction for
/// non-monic maps.
pub fn escape_rate_map(map: &PolyMap, z0: Complex64, cap: usize) -> EscapeResult {
    let radius = map.escape_radius();
    escape_rate_with_radius(map, z0, cap, radius)
}

pub(crate) fn escape_rate_with_radius(map: &PolyMap, z0: Complex64, cap: usize, radius: f64) -> EscapeResult {
    let mut z = z0;
    let mut n = 0usize;
    let r2 = radius * radius;
    loop {
        let m2 = z.norm_sqr();
        if m2 > r2 || !m2.is_finite() {
            break;
        }
        if n == cap {
            return EscapeResult { g: 0.0, iterations_used: cap, err: 0.0, escaped: false };
        }
        z = map.eval(z);
        n += 1;
    }
    if !z.is_finite() {
        // Only possible for absurd inputs; treat as escaping at once.
        return EscapeResult { g: f64::INFINITY, iterations_used: n, err: 0.0, escaped: true };
    }
    for _ in 0..EXTRA_STEPS {
        if z.norm() >= LARGE_MODULUS {
            break;
        }
        let next = map.eval(z);
        if !next.is_finite() {
            break;
        }
        z = next;
        n += 1;
    }
    green_from_orbit(map, z, n)
}

fn green_from_orbit(map: &PolyMap, z: Complex64, n: usize) -> EscapeResult {
    let d = map.degree() as f64;
    let lead = map.leading().norm();
    let scale = d.powi(-(n as i32));
    let g = (z.norm().ln() + lead.ln() / (d - 1.0)) * scale;
    let err = scale * (std::f64::consts::LN_2 + (map.lower_mass() / z.norm()).ln_1p());
    EscapeResult { g: g.max(f64::MIN_POSITIVE), iterations_used: n, err, escaped: true }
}

/// Escape rate of the marked point with index `i` at parameter `t`.
pub fn escape_rate<C: Coeff>(fam: &Family<C>, i: usize, t: Complex64, cap: usize) -> EscapeResult {
    let num = fam.numeric();
    let map = num.map_at(t);
    escape_rate_map(&map, num.marked_at(i, t).0, cap)
}

/// Escape rate of an arbitrary point `a(t)`.
pub fn escape_rate_of<C: Coeff>(fam: &Family<C>, a: &TPoly<C>, t: Complex64, cap: usize) -> EscapeResult {
    let map = fam.numeric().map_at(t);
    escape_rate_map(&map, a.eval(t), cap)
}

/// Dynamical Green's function `G_t(z)`.
pub fn green<C: Coeff>(fam: &Family<C>, t: Complex64, z: Complex64, cap: usize) -> EscapeResult {
    escape_rate_map(&fam.numeric().map_at(t), z, cap)
}

/// `M(f_t)`: the largest escape rate among the critical points.
pub fn max_critical_escape<C: Coeff>(fam: &Family<C>, t: Complex64, cap: usize) -> Result<f64> {
    let map = fam.numeric().map_at(t);
    max_critical_escape_map(&map, cap)
}

pub fn max_critical_escape_map(map: &PolyMap, cap: usize) -> Result<f64> {
    let df = map.derivative();
    let target = crate::roots::ComplexPoly::new(df.coeffs().to_vec());
    let roots = crate::roots::solve_target(&target, &Default::default())?;
    Ok(roots.iter().map(|c| escape_rate_map(map, c.value, cap).g).fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobinEstimate {
    pub gamma: f64,
    /// Max minus min over the outermost ring.
    pub spread: f64,
    /// `(radius, ring mean)`.
    pub samples: Vec<(f64, f64)>,
}

pub const ROBIN_RADII: [f64; 3] = [1e3, 1e4, 1e5];
pub const ROBIN_ARGS: usize = 16;

/// Robin constant of `t -> value(t)` with `value(t) = q log|t| + gamma + o(1)`.
pub fn robin_from(value: impl Fn(Complex64) -> f64, q: f64) -> RobinEstimate {
    let mut all = Vec::new();
    let mut samples = Vec::new();
    let mut spread = 0.0;
    for &r in &ROBIN_RADII {
        let ring: Vec<f64> = (0..ROBIN_ARGS)
            .map(|k| {
                let t = Complex64::from_polar(r, std::f64::consts::TAU * (k as f64 + 0.5) / ROBIN_ARGS as f64);
                value(t) - q * r.ln()
            })
            .collect();
        let mean = ring.iter().sum::<f64>() / ring.len() as f64;
        let hi = ring.iter().cloned().fold(f64::MIN, f64::max);
        let lo = ring.iter().cloned().fold(f64::MAX, f64::min);
        spread = hi - lo;
        samples.push((r, mean));
        all.extend(ring);
    }
    let gamma = all.iter().sum::<f64>() / all.len() as f64;
    RobinEstimate { gamma, spread, samples }
}

/// Robin constant of the escape rate of the marked point `i` with bifurcation mass `q`.
pub fn robin_constant<C: Coeff>(fam: &Family<C>, i: usize, q: f64) -> RobinEstimate {
    robin_from(|t| escape_rate(fam, i, t, 256).g, q)
}

/// Böttcher coordinate `φ_t(z)` near infinity, as the principal-branch product
/// `z · Π (1 + β(z_n))^{1/d^{n+1}}` where `f(w) = w^d (1 + β(w))`.
/// Requires `G_t(z) > M(f_t)`.
pub fn bottcher_value<C: Coeff>(fam: &Family<C>, t: Complex64, z: Complex64) -> Result<Complex64> {
    let map = fam.numeric().map_at(t);
    let g = escape_rate_map(&map, z, 4096);
    let m = max_critical_escape_map(&map, 4096)?;
    if !(g.escaped && g.g > m) {
        return Err(Error::OutsideDomain);
    }
    Ok(bottcher_product(&map, z))
}

/// The product formula without the domain check (monic maps).
pub fn bottcher_product(map: &PolyMap, z: Complex64) -> Complex64 {
    let d = map.degree();
    let lower = &map.coeffs()[..d];
    let mut w = z;
    let mut scale = 1.0 / d as f64;
    let mut log_sum = Complex64::new(0.0, 0.0);
    for _ in 0..400 {
        // β(w) = Σ_{j<d} b_j w^{j-d}
        let inv = w.inv();
        let mut beta = Complex64::new(0.0, 0.0);
        for b in lower.iter().rev() {
            beta = beta * w + b;
        }
        let beta = beta * inv.powi(d as i32);
        if beta.norm() < 1e-18 || !beta.is_finite() {
            break;
        }
        log_sum += (Complex64::new(1.0, 0.0) + beta).ln() * scale;
        w = w.powi(d as i32) * (Complex64::new(1.0, 0.0) + beta);
        scale /= d as f64;
        if !w.is_finite() {
            break;
        }
    }
    z * log_sum.exp()
}

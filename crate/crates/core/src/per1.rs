//! Cubic polynomials with a fixed point of prescribed multiplier, parameterized by the critical
//! point `s`: `f_s(z) = λz - (λ/2)(s + 1/s)z² + (λ/3)z³`, critical points `s` and `1/s`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::GaussRat;
use crate::error::{Error, Result};
use crate::escape::{escape_rate_map, EscapeResult, ROBIN_ARGS};
use crate::family::Family;
use crate::map::PolyMap;
use crate::plane::{bif_measure, BifMeasure, FieldKind, ScalarField, Window};
use crate::preperiodic::{all_drivers, find_pcf, orbit_verdict, PcfCandidate, PcfSearch, Verdict, VerdictOptions};

/// Which critical point: `+` is `s`, `-` is `1/s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Per1Family {
    lambda: Complex64,
}

impl Per1Family {
    /// Checks the critical points and the fixed point symbolically.
    pub fn new(lambda: Complex64) -> Result<Self> {
        if lambda == Complex64::new(0.0, 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidFamily(
                "multiplier must be finite and nonzero; use the polynomial slice for 0".into(),
            ));
        }
        let fam = Per1Family { lambda };
        fam.check_structure()?;
        Ok(fam)
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn map(&self, s: Complex64) -> PolyMap {
        let l = self.lambda;
        PolyMap::new(vec![Complex64::new(0.0, 0.0), l, -l / 2.0 * (s + s.inv()), l / 3.0])
    }

    pub fn critical_point(&self, s: Complex64, sign: Sign) -> Complex64 {
        match sign {
            Sign::Plus => s,
            Sign::Minus => s.inv(),
        }
    }

    /// Coefficients of `f_s` as Laurent polynomials in `s`.
    fn laurent_coeffs(&self) -> Vec<Laurent> {
        let l = self.lambda;
        let sigma = Laurent::from_terms(&[(1, Complex64::new(1.0, 0.0)), (-1, Complex64::new(1.0, 0.0))]);
        vec![Laurent::zero(), Laurent::constant(l), sigma.scale(-l / 2.0), Laurent::constant(l / 3.0)]
    }

    fn apply_laurent(&self, z: &Laurent) -> Laurent {
        let c = self.laurent_coeffs();
        let mut acc = c[3].clone();
        for k in (0..3).rev() {
            acc = acc.mul(z).add(&c[k]);
        }
        acc
    }

    fn check_structure(&self) -> Result<()> {
        let l = self.lambda;
        // f' = λ - λ(s + 1/s) z + λ z², evaluated at z = s and z = 1/s
        let deriv = |z: &Laurent| {
            let sigma = Laurent::from_terms(&[(1, Complex64::new(1.0, 0.0)), (-1, Complex64::new(1.0, 0.0))]);
            Laurent::constant(l).add(&sigma.mul(z).scale(-l)).add(&z.mul(z).scale(l))
        };
        let s = Laurent::from_terms(&[(1, Complex64::new(1.0, 0.0))]);
        let inv = Laurent::from_terms(&[(-1, Complex64::new(1.0, 0.0))]);
        let tol = 1e-14 * (1.0 + l.norm());
        if !deriv(&s).is_negligible(tol) || !deriv(&inv).is_negligible(tol) {
            return Err(Error::InvalidFamily("marked points are not critical".into()));
        }
        let m = self.map(Complex64::new(0.7, 0.3));
        let (v, dv) = m.eval_d(Complex64::new(0.0, 0.0));
        if v != Complex64::new(0.0, 0.0) || (dv - l).norm() > tol {
            return Err(Error::InvalidFamily("origin is not a fixed point with the given multiplier".into()));
        }
        Ok(())
    }

    /// Leading term `(coefficient, exponent)` of `f_s^n(s)` as a Laurent polynomial in `s`.
    pub fn orbit_leading_term(&self, n: usize) -> (Complex64, i32) {
        let mut z = Laurent::from_terms(&[(1, Complex64::new(1.0, 0.0))]);
        for _ in 0..n {
            z = self.apply_laurent(&z);
        }
        z.leading()
    }

    /// `Π_{k<n-1} (λ/3)^{3^k} · (-λ/6)^{3^{n-1}}`, the predicted leading coefficient of `f_s^n(s)`.
    pub fn predicted_leading_coefficient(&self, n: usize) -> Complex64 {
        assert!(n >= 1);
        let l = self.lambda;
        let mut c = Complex64::new(1.0, 0.0);
        for k in 0..n - 1 {
            c *= (l / 3.0).powi(3i32.pow(k as u32));
        }
        c * (-l / 6.0).powi(3i32.pow(n as u32 - 1))
    }

    /// `(1/6) log|λ/3| + (1/3) log|λ/6|`.
    pub fn robin_formula(&self) -> f64 {
        (self.lambda / 3.0).norm().ln() / 6.0 + (self.lambda / 6.0).norm().ln() / 3.0
    }
}

/// Laurent polynomial in `s` with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
struct Laurent {
    terms: BTreeMap<i32, Complex64>,
}

impl Laurent {
    fn zero() -> Self {
        Laurent { terms: BTreeMap::new() }
    }

    fn constant(c: Complex64) -> Self {
        Self::from_terms(&[(0, c)])
    }

    fn from_terms(t: &[(i32, Complex64)]) -> Self {
        let mut l = Self::zero();
        for &(e, c) in t {
            *l.terms.entry(e).or_default() += c;
        }
        l
    }

    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (&e, &c) in &o.terms {
            *out.terms.entry(e).or_default() += c;
        }
        out
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (&e1, &c1) in &self.terms {
            for (&e2, &c2) in &o.terms {
                *out.terms.entry(e1 + e2).or_default() += c1 * c2;
            }
        }
        out
    }

    fn scale(&self, k: Complex64) -> Self {
        Laurent { terms: self.terms.iter().map(|(&e, &c)| (e, c * k)).collect() }
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.norm() <= tol)
    }

    fn leading(&self) -> (Complex64, i32) {
        self.terms
            .iter()
            .rev()
            .find(|(_, c)| c.norm() > 0.0)
            .map(|(&e, &c)| (c, e))
            .unwrap_or((Complex64::new(0.0, 0.0), 0))
    }
}

/// `G^±(s)`: escape rate of the chosen critical point under `f_s`.
pub fn per1_green(fam: &Per1Family, s: Complex64, sign: Sign, cap: usize) -> EscapeResult {
    escape_rate_map(&fam.map(s), fam.critical_point(s, sign), cap)
}

/// The same value computed from the monic centered conjugate of `f_s`.
pub fn per1_green_centered(fam: &Per1Family, s: Complex64, sign: Sign, cap: usize) -> EscapeResult {
    let l = fam.lambda;
    let shift = (s + s.inv()) / 2.0;
    let alpha = (Complex64::new(3.0, 0.0) / l).sqrt();
    let f = fam.map(s);
    // P(u) = (f(αu + c) - c) / α
    let a = f.coeffs();
    // f(αu + c) = Σ a_j (αu + c)^j
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 4];
    for (j, aj) in a.iter().enumerate() {
        // binomial expansion of (αu + c)^j
        let mut binom = 1.0;
        for k in 0..=j {
            coeffs[k] += aj * binom * alpha.powi(k as i32) * shift.powi((j - k) as i32);
            binom = binom * (j - k) as f64 / (k + 1) as f64;
        }
    }
    coeffs[0] -= shift;
    let coeffs: Vec<Complex64> = coeffs.into_iter().map(|c| c / alpha).collect();
    let p = PolyMap::new(coeffs);
    let u = (fam.critical_point(s, sign) - shift) / alpha;
    escape_rate_map(&p, u, cap)
}

/// Ring average of `G^+(s) - log|s|` at `|s| = radius`.
pub fn per1_robin(fam: &Per1Family, sign: Sign, radius: f64, cap: usize) -> f64 {
    let vals: Vec<f64> = (0..ROBIN_ARGS)
        .map(|k| {
            let s = Complex64::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.5) / ROBIN_ARGS as f64);
            let g = per1_green(fam, s, sign, cap).g;
            match sign {
                Sign::Plus => g - radius.ln(),
                Sign::Minus => g + radius.ln(),
            }
        })
        .collect();
    vals.iter().sum::<f64>() / vals.len() as f64
}

/// Smallest distance between a window and the origin allowed for rasters.
pub const ORIGIN_EXCLUSION: f64 = 1e-3;

pub fn per1_green_field(fam: &Per1Family, w: Window, sign: Sign, cap: usize) -> Result<ScalarField> {
    if w.distance_to_origin() < ORIGIN_EXCLUSION {
        return Err(Error::WindowContainsOrigin);
    }
    ScalarField::sample(w, FieldKind::Green, |s| per1_green(fam, s, sign, cap).g)
}

#[derive(Clone, Debug)]
pub struct Per1Measures {
    pub plus: BifMeasure,
    pub minus: BifMeasure,
}

pub fn per1_measures(fam: &Per1Family, w: Window, cap: usize) -> Result<Per1Measures> {
    let plus = bif_measure(&per1_green_field(fam, w, Sign::Plus, cap)?);
    let minus = bif_measure(&per1_green_field(fam, w, Sign::Minus, cap)?);
    Ok(Per1Measures { plus, minus })
}

/// `H^±(s, t) = lim 3^{-n} log ||F^n||` for the homogeneous lift
/// `F(z, w) = (λzw² - (λ/2)(s/t + t/s)z²w + (λ/3)z³, w³)`, started at `(s, t)` for `+` and
/// `(t, s)` for `-`. Uses the max norm.
pub fn per1_homogeneous(fam: &Per1Family, s: Complex64, t: Complex64, sign: Sign) -> Result<f64> {
    let zero = Complex64::new(0.0, 0.0);
    if s == zero && t == zero {
        return Err(Error::OriginUndefined);
    }
    if s == zero || t == zero {
        return Err(Error::DegenerateLift);
    }
    let l = fam.lambda;
    let mid = -l / 2.0 * (s / t + t / s);
    let (mut z, mut w) = match sign {
        Sign::Plus => (s, t),
        Sign::Minus => (t, s),
    };
    let norm = |z: Complex64, w: Complex64| z.norm().max(w.norm());
    let n0 = norm(z, w);
    let mut h = n0.ln();
    z /= n0;
    w /= n0;
    let mut weight = 1.0;
    for _ in 0..60 {
        let nz = l * z * w * w + mid * z * z * w + l / 3.0 * z * z * z;
        let nw = w * w * w;
        let r = norm(nz, nw);
        weight /= 3.0;
        h += weight * r.ln();
        z = nz / r;
        w = nw / r;
        if weight < 1e-20 {
            break;
        }
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Per1SearchOptions {
    /// Largest preperiod `m` tried.
    pub max_preperiod: usize,
    /// Largest period `p` tried.
    pub max_period: usize,
    pub refine: bool,
    pub verdict: VerdictOptions,
}

impl Default for Per1SearchOptions {
    fn default() -> Self {
        Per1SearchOptions { max_preperiod: 2, max_period: 3, refine: true, verdict: VerdictOptions::default() }
    }
}

/// `f_s^{m+p}(c) - f_s^m(c)` and its derivative in `s`.
fn close_return(fam: &Per1Family, s: Complex64, sign: Sign, m: usize, p: usize) -> (Complex64, Complex64) {
    let map = fam.map(s);
    let l = fam.lambda;
    let ds_coeff = -l / 2.0 * (Complex64::new(1.0, 0.0) - (s * s).inv());
    let (mut z, mut dz) = match sign {
        Sign::Plus => (s, Complex64::new(1.0, 0.0)),
        Sign::Minus => (s.inv(), -(s * s).inv()),
    };
    let (mut zm, mut dzm) = (z, dz);
    for k in 1..=m + p {
        let (v, dv) = map.eval_d(z);
        dz = dv * dz + ds_coeff * z * z;
        z = v;
        if k == m {
            zm = z;
            dzm = dz;
        }
    }
    (z - zm, dz - dzm)
}

fn newton_refine(fam: &Per1Family, s0: Complex64, sign: Sign, m: usize, p: usize) -> Option<Complex64> {
    let mut s = s0;
    for _ in 0..60 {
        let (v, dv) = close_return(fam, s, sign, m, p);
        let step = crate::roots::scaled_div(v, dv);
        if !step.is_finite() {
            return None;
        }
        s -= step;
        if step.norm() <= 4.0 * f64::EPSILON * s.norm() {
            break;
        }
    }
    let (v, _) = close_return(fam, s, sign, m, p);
    (v.norm() <= 1e-9 * (1.0 + s.norm() + s.inv().norm()) && s.is_finite()).then_some(s)
}

/// Grid scan for parameters where both critical points are numerically preperiodic. Pixels
/// within [`ORIGIN_EXCLUSION`] of `s = 0` are skipped.
///
/// For each critical point and each `(m, p)`, local minima of `|f^{m+p}(c) - f^m(c)|` on the grid
/// seed Newton's method in `s`; the converged zeros are merged and both critical orbits are judged.
pub fn per1_pcf_search(fam: &Per1Family, w: Window, opts: &Per1SearchOptions) -> Result<PcfSearch> {
    use rayon::prelude::*;
    let mut jobs = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        for m in 0..=opts.max_preperiod {
            for p in 1..=opts.max_period {
                jobs.push((sign, m, p));
            }
        }
    }
    let (nx, ny) = (w.nx, w.ny);
    let found: Vec<(Complex64, String)> = jobs
        .par_iter()
        .flat_map_iter(|&(sign, m, p)| {
            let field: Vec<f64> = (0..nx * ny)
                .map(|k| {
                    let s = w.center(k % nx, k / nx);
                    if s.norm() < ORIGIN_EXCLUSION {
                        return f64::INFINITY;
                    }
                    let (v, _) = close_return(fam, s, sign, m, p);
                    if v.is_finite() {
                        v.norm()
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            let mut out = Vec::new();
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    let v = field[j * nx + i];
                    if !v.is_finite() {
                        continue;
                    }
                    let is_min = (-1i64..=1).all(|dj| {
                        (-1i64..=1).all(|di| {
                            (di == 0 && dj == 0)
                                || v <= field[((j as i64 + dj) as usize) * nx + (i as i64 + di) as usize]
                        })
                    });
                    if !is_min {
                        continue;
                    }
                    let s0 = w.center(i, j);
                    let s = if opts.refine { newton_refine(fam, s0, sign, m, p) } else { Some(s0) };
                    if let Some(s) = s {
                        let label = format!("c{}: f^{}(c)=f^{}(c)", sign.symbol(), m + p, m);
                        out.push((s, label));
                    }
                }
            }
            out
        })
        .collect();

    let mut candidates: Vec<PcfCandidate> = Vec::new();
    for (s, label) in found {
        if s.norm() < ORIGIN_EXCLUSION {
            continue;
        }
        if let Some(c) = candidates.iter_mut().find(|c| (c.value - s).norm() <= 1e-7 * (1.0 + s.norm())) {
            if !c.sources.contains(&label) {
                c.sources.push(label);
            }
            continue;
        }
        candidates.push(PcfCandidate {
            value: s,
            multiplicity: 1,
            residual: 0.0,
            sources: vec![label],
            verdicts: Vec::new(),
            pcf: false,
        });
    }
    for c in candidates.iter_mut() {
        let map = fam.map(c.value);
        let vp = orbit_verdict(&map, c.value, &opts.verdict);
        let vm = orbit_verdict(&map, c.value.inv(), &opts.verdict);
        c.residual = [Sign::Plus, Sign::Minus]
            .iter()
            .filter_map(|&sg| {
                let v = if sg == Sign::Plus { vp } else { vm };
                match v {
                    Verdict::Preperiodic { preperiod, period } => {
                        Some(close_return(fam, c.value, sg, preperiod, period).0.norm())
                    }
                    _ => None,
                }
            })
            .fold(0.0, f64::max);
        c.verdicts = vec![(0, vp), (1, vm)];
        c.pcf = vp.is_preperiodic() && vm.is_preperiodic();
    }
    candidates.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    Ok(PcfSearch { candidates, passive: Vec::new(), identities: Vec::new() })
}

/// The multiplier-zero curve as a polynomial family: `z³ - 3t²z + t + 2t³` with critical points
/// `t` (fixed) and `-t`.
pub fn per1_zero_slice() -> Family<GaussRat> {
    Family::parse("z^3 - 3t^2z + t + 2t^3", &["t", "-t"], "per1-zero-slice").expect("valid slice")
}

/// PCF parameters on the multiplier-zero slice from the equations of the active point, `n <= n_max`.
pub fn per1_zero_pcf(n_max: usize, opts: &VerdictOptions) -> Result<PcfSearch> {
    let slice = per1_zero_slice();
    find_pcf(&slice, &all_drivers(1, n_max), opts)
}

//! Laurent expansion of the Böttcher coordinate, `φ_t(z) = z + Σ_{s≥1} g_s(t) z^{-s}`, and the
//! polynomial part of its powers.

use num_complex::Complex64;
use serde_json::Value;

use crate::coeff::{gaussian_unit, rational_text, Coeff, GaussRat};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::orbit::iterate_symbolic;
use crate::poly::{BiPoly, TPoly};

/// Relative tolerance for the float route of [`verify_poly_relation`].
pub const RELATION_TOL: f64 = 1e-8;

/// Power series in `w` truncated after `w^order`, with polynomial coefficients.
#[derive(Clone, Debug)]
struct PSeries<C: Coeff> {
    c: Vec<TPoly<C>>,
}

impl<C: Coeff> PSeries<C> {
    fn zero(order: usize) -> Self {
        PSeries { c: vec![TPoly::zero(); order + 1] }
    }

    fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.c[0] = TPoly::constant(C::one());
        s
    }

    fn order(&self) -> usize {
        self.c.len() - 1
    }

    fn add(&self, o: &Self) -> Self {
        PSeries { c: self.c.iter().zip(&o.c).map(|(a, b)| a.add(b)).collect() }
    }

    fn mul(&self, o: &Self) -> Self {
        let n = self.c.len();
        let mut out = Self::zero(n - 1);
        for i in 0..n {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                if !o.c[j].is_zero() {
                    out.c[i + j] = out.c[i + j].add(&self.c[i].mul(&o.c[j]));
                }
            }
        }
        out
    }

    fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one(self.order());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `1 / self` for a series with constant term 1.
    fn inverse_unit(&self) -> Self {
        let n = self.order();
        let mut inv = Self::zero(n);
        inv.c[0] = TPoly::constant(C::one());
        for k in 1..=n {
            let mut acc = TPoly::zero();
            for j in 1..=k {
                acc = acc.add(&self.c[j].mul(&inv.c[k - j]));
            }
            inv.c[k] = acc.neg();
        }
        inv
    }

    /// `Σ_k a_k v^k` where `a` has constant coefficients in `w` and `v` has no constant term.
    fn compose(a: &Self, v: &Self) -> Self {
        let n = v.order();
        let mut out = Self::zero(n);
        let mut vk = Self::one(n);
        for k in 0..=a.order() {
            if k > 0 {
                vk = vk.mul(v);
            }
            if vk.c.iter().all(|p| p.is_zero()) {
                break;
            }
            if !a.c[k].is_zero() {
                let term = PSeries { c: vk.c.iter().map(|p| p.mul(&a.c[k])).collect() };
                out = out.add(&term);
            }
        }
        out
    }
}

/// `g_1, ..., g_{S_max}` for one family.
#[derive(Clone, Debug)]
pub struct TruncatedBottcher<C: Coeff = Complex64> {
    pub s_max: usize,
    pub degree: usize,
    /// `g[s - 1] = g_s`.
    pub g: Vec<TPoly<C>>,
}

/// Solve `φ(f(z)) = φ(z)^d` order by order in `1/z`.
pub fn bottcher_series<C: Coeff>(fam: &Family<C>, s_max: usize) -> TruncatedBottcher<C> {
    let d = fam.degree();
    let order = s_max + 1;
    // f(z) = z^d (1 + β(w)), w = 1/z, β(w) = Σ_{j≥1} b_{d-j} w^j
    let mut beta = PSeries::<C>::zero(order);
    for j in 1..=d.min(order) {
        beta.c[j] = fam.f().zcoeff(d - j);
    }
    let one_plus_beta = PSeries::one(order).add(&beta);
    // v = w^d / (1 + β(w)) is 1/f(z) in terms of w.
    let inv = one_plus_beta.inverse_unit();
    let mut v = PSeries::zero(order);
    for k in 0..=order {
        if k + d <= order {
            v.c[k + d] = inv.c[k].clone();
        }
    }
    let d_inv = C::one() / C::from_int(d as i64);
    // u(w) = Σ_s g_s w^{s+1}, φ(z) = z (1 + u(w))
    let mut u = PSeries::<C>::zero(order);
    for k in 2..=order {
        let lhs = one_plus_beta.mul(&PSeries::one(order).add(&PSeries::compose(&u, &v)));
        let rhs = PSeries::one(order).add(&u).pow(d);
        u.c[k] = lhs.c[k].sub(&rhs.c[k]).scale_by(&d_inv);
    }
    TruncatedBottcher { s_max, degree: d, g: (1..=s_max).map(|s| u.c[s + 1].clone()).collect() }
}

impl<C: Coeff> TruncatedBottcher<C> {
    /// `g_s`, for `1 <= s <= s_max`.
    pub fn coeff(&self, s: usize) -> &TPoly<C> {
        &self.g[s - 1]
    }

    /// The truncated series `z + Σ_{s≤s_max} g_s(t) z^{-s}`.
    pub fn eval(&self, t: Complex64, z: Complex64) -> Complex64 {
        let w = z.inv();
        let mut acc = Complex64::new(0.0, 0.0);
        for g in self.g.iter().rev() {
            acc = (acc + g.eval(t)) * w;
        }
        z + acc
    }

    /// Checks `deg g_s <= m (s + 1)` for every stored coefficient.
    pub fn degree_bound_holds(&self, m: usize) -> bool {
        self.g.iter().enumerate().all(|(i, g)| g.degree().is_none_or(|deg| deg <= m * (i + 2)))
    }

    fn series_of_one_plus_u(&self, order: usize) -> PSeries<C> {
        let mut u = PSeries::one(order);
        for (i, g) in self.g.iter().enumerate() {
            if i + 2 <= order {
                u.c[i + 2] = g.clone();
            }
        }
        u
    }

    /// Split `φ^k = P^k(z) + Σ_{s≥1} b_s^k z^{-s}`; returns `P^k` and the available `b_s^k`.
    pub fn power_split(&self, k: usize) -> Result<PowerSplit<C>> {
        if k == 0 {
            return Err(Error::InvalidArgument("power must be positive".into()));
        }
        if self.s_max + 1 < k {
            return Err(Error::TruncationInsufficient { needed: k - 1, have: self.s_max });
        }
        let order = self.s_max + 1;
        let c = self.series_of_one_plus_u(order).pow(k);
        let poly = BiPoly::new((0..=k).map(|e| c.c[k - e].clone()).collect());
        let tail = (1..=order - k).map(|s| c.c[k + s].clone()).collect();
        Ok(PowerSplit { k, poly, tail })
    }

    pub fn to_json(&self) -> Value {
        let g: Vec<Vec<[Value; 2]>> = self.g.iter().map(coeff_array).collect();
        serde_json::json!({ "S_max": self.s_max, "g": g })
    }
}

/// `φ^k = poly + Σ_s tail[s-1] z^{-s}`.
#[derive(Clone, Debug)]
pub struct PowerSplit<C: Coeff> {
    pub k: usize,
    pub poly: BiPoly<C>,
    pub tail: Vec<TPoly<C>>,
}

impl<C: Coeff> PowerSplit<C> {
    /// Checks `deg b_s^k <= m (s + k)`.
    pub fn degree_bound_holds(&self, m: usize) -> bool {
        self.tail.iter().enumerate().all(|(i, b)| b.degree().is_none_or(|deg| deg <= m * (i + 1 + self.k)))
    }
}

/// For `n = 0..=n_max`, whether `P^{k2}(f^n(a2)) = ζ^{d^n} P^{k1}(f^n(a1))` as polynomials in `t`.
///
/// The `a_i` must already satisfy `deg f^n(a_i) = m_i d^n` with `k1 m1 = k2 m2`. The check is
/// exact when the family is and `ζ` is one of `±1, ±i`; otherwise relative to [`RELATION_TOL`].
pub fn verify_poly_relation<C: Coeff>(
    fam: &Family<C>,
    a1: &TPoly<C>,
    a2: &TPoly<C>,
    k1: usize,
    k2: usize,
    zeta: Complex64,
    n_max: usize,
) -> Result<Vec<bool>> {
    let (Some(m1), Some(m2)) = (a1.degree(), a2.degree()) else {
        return Err(Error::InvalidArgument("marked points must be nonzero".into()));
    };
    if k1 == 0 || k2 == 0 || m1 == 0 || m2 == 0 || k1 * m1 != k2 * m2 {
        return Err(Error::InvalidArgument(format!("need k1 m1 = k2 m2 > 0, got {k1}*{m1} and {k2}*{m2}")));
    }
    let d = fam.degree();
    // The polynomial part of φ^k only involves g_1..g_{k-1}.
    let tb = bottcher_series(fam, k1.max(k2).saturating_sub(1).max(1));
    let p1 = tb.power_split(k1)?.poly;
    let p2 = tb.power_split(k2)?.poly;
    let unit = if C::EXACT { gaussian_unit(zeta).map(|_| C::from_c64(zeta)) } else { None };
    let mut x1 = a1.clone();
    let mut x2 = a2.clone();
    let mut exponent_mod4 = 1usize;
    let mut zeta_pow = zeta;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            x1 = iterate_symbolic(fam, &x1, 1)?;
            x2 = iterate_symbolic(fam, &x2, 1)?;
            exponent_mod4 = exponent_mod4 * d % 4;
            zeta_pow = zeta_pow.powu(d as u32);
        }
        let dn = d.pow(n as u32);
        if x1.degree() != Some(m1 * dn) || x2.degree() != Some(m2 * dn) {
            return Err(Error::InvalidArgument(format!("iterate {n} has the wrong t-degree")));
        }
        let lhs = p2.apply(&x2);
        let rhs = p1.apply(&x1);
        let ok = match &unit {
            Some(u) => {
                let mut w = C::one();
                for _ in 0..exponent_mod4 {
                    w = w * u.clone();
                }
                lhs == rhs.scale_by(&w)
            }
            None => {
                let lhs = lhs.to_float();
                let rhs = rhs.to_float().scale_by(&zeta_pow);
                let scale = lhs.scale().max(rhs.scale());
                let diff = lhs.sub(&rhs).scale();
                diff <= RELATION_TOL * scale
            }
        };
        out.push(ok);
    }
    Ok(out)
}

fn coeff_array<C: Coeff>(p: &TPoly<C>) -> Vec<[Value; 2]> {
    p.coeffs()
        .iter()
        .map(|c| {
            let any: &dyn std::any::Any = c;
            if let Some(g) = any.downcast_ref::<GaussRat>() {
                [Value::String(rational_text(&g.re)), Value::String(rational_text(&g.im))]
            } else {
                let z = c.to_c64();
                [Value::from(z.re), Value::from(z.im)]
            }
        })
        .collect()
}

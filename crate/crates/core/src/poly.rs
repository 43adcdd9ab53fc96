//! Dense polynomials in the parameter `t` and in `(t, z)`.

use std::fmt;

use num_complex::Complex64;

use crate::coeff::{format_coeff, Coeff};

/// Polynomial in `t`, coefficients in increasing degree. Never carries trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct TPoly<C: Coeff = Complex64> {
    coeffs: Vec<C>,
}

impl<C: Coeff> TPoly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        trim(&mut coeffs);
        TPoly { coeffs }
    }

    pub fn zero() -> Self {
        TPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        TPoly::new(vec![c])
    }

    /// The monomial `c t^k`.
    pub fn monomial(c: C, k: usize) -> Self {
        let mut v = vec![C::zero(); k + 1];
        v[k] = c;
        TPoly::new(v)
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        TPoly::monomial(C::one(), 1)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C {
        self.coeffs.last().cloned().unwrap_or_else(C::zero)
    }

    /// Largest coefficient modulus.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Number of vanishing low-order coefficients, i.e. the order of the zero at `t = 0`.
    pub fn low_order_zeros(&self) -> usize {
        let s = self.scale();
        self.coeffs.iter().take_while(|c| c.negligible(s)).count()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        TPoly::new(v)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n).map(|k| self.coeff(k) - other.coeff(k)).collect();
        TPoly::new(v)
    }

    pub fn neg(&self) -> Self {
        TPoly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn scale_by(&self, c: &C) -> Self {
        TPoly::new(self.coeffs.iter().map(|x| x.clone() * c.clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return TPoly::zero();
        }
        let mut v = vec![C::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].clone() + a.clone() * b.clone();
            }
        }
        TPoly::new(v)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = TPoly::constant(C::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.clone() * C::from_int(k as i64))
            .collect();
        TPoly::new(v)
    }

    /// Evaluate at a complex point (Horner).
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c.to_c64())
    }

    /// Evaluate exactly at a coefficient-ring point.
    pub fn eval_exact(&self, t: &C) -> C {
        self.coeffs.iter().rev().fold(C::zero(), |acc, c| acc * t.clone() + c.clone())
    }

    /// Identity test: exact for exact coefficients, relative `1e-9` otherwise.
    pub fn same_as(&self, other: &Self) -> bool {
        let s = self.scale().max(other.scale());
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|k| self.coeff(k).close(&other.coeff(k), s))
    }

    pub fn to_float(&self) -> TPoly<Complex64> {
        TPoly::new(self.coeffs.iter().map(|c| c.to_c64()).collect())
    }

    pub fn to_c64_vec(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.to_c64()).collect()
    }

    /// Drop the factor `t^k` (caller guarantees it divides).
    pub fn shift_down(&self, k: usize) -> Self {
        TPoly::new(self.coeffs.iter().skip(k).cloned().collect())
    }
}

fn trim<C: Coeff>(v: &mut Vec<C>) {
    let scale = if C::EXACT { 0.0 } else { v.iter().map(|c| c.magnitude()).fold(0.0, f64::max) };
    while let Some(last) = v.last() {
        if last.is_zero() || (!C::EXACT && last.negligible(scale)) {
            v.pop();
        } else {
            break;
        }
    }
}

impl<C: Coeff> fmt::Display for TPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, self.coeffs.iter().map(format_coeff).collect(), "t")
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, terms: Vec<String>, var: &str) -> fmt::Result {
    let mut first = true;
    for (k, c) in terms.iter().enumerate().rev() {
        if c == "0" {
            continue;
        }
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        match k {
            0 => write!(f, "{c}")?,
            1 => write!(f, "{c}*{var}")?,
            _ => write!(f, "{c}*{var}^{k}")?,
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// Polynomial in `z` whose coefficients are polynomials in `t`; `zcoeffs[j]` multiplies `z^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly<C: Coeff = Complex64> {
    zcoeffs: Vec<TPoly<C>>,
}

impl<C: Coeff> BiPoly<C> {
    pub fn new(mut zcoeffs: Vec<TPoly<C>>) -> Self {
        while zcoeffs.last().is_some_and(|p| p.is_zero()) {
            zcoeffs.pop();
        }
        BiPoly { zcoeffs }
    }

    pub fn zero() -> Self {
        BiPoly { zcoeffs: Vec::new() }
    }

    /// The polynomial `z`.
    pub fn z() -> Self {
        BiPoly::new(vec![TPoly::zero(), TPoly::constant(C::one())])
    }

    /// A polynomial in `t` viewed as constant in `z`.
    pub fn from_t(p: TPoly<C>) -> Self {
        BiPoly::new(vec![p])
    }

    pub fn zcoeffs(&self) -> &[TPoly<C>] {
        &self.zcoeffs
    }

    pub fn zcoeff(&self, j: usize) -> TPoly<C> {
        self.zcoeffs.get(j).cloned().unwrap_or_else(TPoly::zero)
    }

    /// Degree in `z`; `None` for zero.
    pub fn zdegree(&self) -> Option<usize> {
        self.zcoeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.zcoeffs.is_empty()
    }

    /// Largest `t`-degree among the non-leading `z` coefficients.
    pub fn lower_tdegree(&self) -> Option<usize> {
        let d = self.zdegree()?;
        self.zcoeffs[..d].iter().filter_map(|p| p.degree()).max()
    }

    /// Monic in `z` with vanishing `z^{d-1}` coefficient.
    pub fn is_monic_centered(&self) -> bool {
        let Some(d) = self.zdegree() else { return false };
        let lead = &self.zcoeffs[d];
        let monic = lead.degree() == Some(0) && lead.coeff(0).close(&C::one(), 1.0);
        monic && (d < 2 || self.zcoeffs[d - 1].is_zero())
    }

    /// Exponents `j` whose coefficient is not zero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.zcoeffs.len()).filter(|&j| !self.zcoeffs[j].is_zero()).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.zcoeffs.len().max(other.zcoeffs.len());
        BiPoly::new((0..n).map(|j| self.zcoeff(j).add(&other.zcoeff(j))).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.zcoeffs.len().max(other.zcoeffs.len());
        BiPoly::new((0..n).map(|j| self.zcoeff(j).sub(&other.zcoeff(j))).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return BiPoly::zero();
        }
        let mut v = vec![TPoly::zero(); self.zcoeffs.len() + other.zcoeffs.len() - 1];
        for (i, a) in self.zcoeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.zcoeffs.iter().enumerate() {
                v[i + j] = v[i + j].add(&a.mul(b));
            }
        }
        BiPoly::new(v)
    }

    pub fn scale_by(&self, c: &TPoly<C>) -> Self {
        BiPoly::new(self.zcoeffs.iter().map(|p| p.mul(c)).collect())
    }

    /// `t -> f_t(p(t))`.
    pub fn apply(&self, p: &TPoly<C>) -> TPoly<C> {
        let mut acc = TPoly::zero();
        for c in self.zcoeffs.iter().rev() {
            acc = acc.mul(p).add(c);
        }
        acc
    }

    /// Composition in `z`: `(self ∘ inner)(t, z) = self(t, inner(t, z))`.
    pub fn compose(&self, inner: &Self) -> Self {
        let mut acc = BiPoly::zero();
        for c in self.zcoeffs.iter().rev() {
            acc = acc.mul(inner).add(&BiPoly::from_t(c.clone()));
        }
        acc
    }

    /// `k`-fold iterate in `z`.
    pub fn iterate(&self, k: usize) -> Self {
        let mut acc = BiPoly::z();
        for _ in 0..k {
            acc = self.compose(&acc);
        }
        acc
    }

    pub fn derivative_z(&self) -> Self {
        BiPoly::new(
            self.zcoeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, p)| p.scale_by(&C::from_int(j as i64)))
                .collect(),
        )
    }

    pub fn derivative_t(&self) -> Self {
        BiPoly::new(self.zcoeffs.iter().map(|p| p.derivative()).collect())
    }

    /// Coefficients in `z` at a fixed parameter value.
    pub fn at(&self, t: Complex64) -> Vec<Complex64> {
        self.zcoeffs.iter().map(|p| p.eval(t)).collect()
    }

    pub fn eval(&self, t: Complex64, z: Complex64) -> Complex64 {
        self.zcoeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, p| acc * z + p.eval(t))
    }

    pub fn same_as(&self, other: &Self) -> bool {
        let n = self.zcoeffs.len().max(other.zcoeffs.len());
        (0..n).all(|j| self.zcoeff(j).same_as(&other.zcoeff(j)))
    }

    pub fn to_float(&self) -> BiPoly<Complex64> {
        BiPoly::new(self.zcoeffs.iter().map(|p| p.to_float()).collect())
    }
}

impl<C: Coeff> fmt::Display for BiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self
            .zcoeffs
            .iter()
            .map(|p| if p.is_zero() { "0".to_string() } else { format!("({p})") })
            .collect();
        write_poly(f, terms, "z")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::GaussRat;

    fn q(n: i64) -> GaussRat {
        GaussRat::from_int(n)
    }

    fn tp(v: &[i64]) -> TPoly<GaussRat> {
        TPoly::new(v.iter().map(|&n| q(n)).collect())
    }

    #[test]
    fn arithmetic_and_trimming() {
        let a = tp(&[1, 2, 0, 0]);
        assert_eq!(a.degree(), Some(1));
        let b = tp(&[-1, 1]);
        assert_eq!(a.mul(&b), tp(&[-1, -1, 2]));
        assert_eq!(a.sub(&a), TPoly::zero());
        assert_eq!(b.pow(3), tp(&[-1, 3, -3, 1]));
        assert_eq!(tp(&[5, 3, 1]).derivative(), tp(&[3, 2]));
        assert_eq!(tp(&[0, 0, 3]).low_order_zeros(), 2);
    }

    #[test]
    fn apply_matches_pointwise_evaluation() {
        // f = z^2 + t, p = t: f_t(p) = t^2 + t
        let f = BiPoly::new(vec![tp(&[0, 1]), TPoly::zero(), tp(&[1])]);
        assert_eq!(f.apply(&TPoly::t()), tp(&[0, 1, 1]));
        let g = f.compose(&f);
        let t = Complex64::new(0.3, -0.2);
        let z = Complex64::new(-1.1, 0.4);
        let inner = f.eval(t, z);
        assert!((g.eval(t, z) - f.eval(t, inner)).norm() < 1e-14);
        assert!(f.is_monic_centered());
        assert_eq!(g.support(), vec![0, 2, 4]);
    }

    #[test]
    fn float_trimming_is_relative() {
        let p = TPoly::new(vec![Complex64::new(1.0, 0.0), Complex64::new(1e-20, 0.0)]);
        assert_eq!(p.degree(), Some(0));
    }
}

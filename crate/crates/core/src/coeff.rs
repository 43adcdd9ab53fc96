//! Coefficient rings: double-precision complex numbers and exact Gaussian rationals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact Gaussian rational `a + b i` with `a, b` in Q.
pub type GaussRat = num_complex::Complex<BigRational>;

/// Relative tolerance used for float polynomial equality.
pub const FLOAT_EQ_TOL: f64 = 1e-9;

/// Leading float coefficients below this fraction of the largest coefficient are trimmed.
pub const FLOAT_TRIM_TOL: f64 = 1e-14;

pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True for exact arithmetic.
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    fn to_c64(&self) -> Complex64;

    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Treat as zero when trimming a polynomial whose largest coefficient has size `scale`.
    fn negligible(&self, scale: f64) -> bool;

    /// Equality used for polynomial identities.
    fn close(&self, other: &Self, scale: f64) -> bool;

    /// Convert a float; exact types get the exact binary value.
    fn from_c64(z: Complex64) -> Self;

    /// Convert an exact value; float types round.
    fn from_gauss(g: &GaussRat) -> Self;

    /// `ln |c|`, finite even when `|c|` overflows a double; `-inf` for zero.
    fn ln_magnitude(&self) -> f64 {
        self.magnitude().ln()
    }
}

impl Coeff for Complex64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn negligible(&self, scale: f64) -> bool {
        self.norm() <= FLOAT_TRIM_TOL * scale
    }

    fn close(&self, other: &Self, scale: f64) -> bool {
        (self - other).norm() <= FLOAT_EQ_TOL * (1.0 + scale)
    }

    fn from_c64(z: Complex64) -> Self {
        z
    }

    fn from_gauss(g: &GaussRat) -> Self {
        g.to_c64()
    }
}

impl Coeff for GaussRat {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }

    fn close(&self, other: &Self, _scale: f64) -> bool {
        self == other
    }

    fn ln_magnitude(&self) -> f64 {
        let (a, b) = (ln_abs_rat(&self.re), ln_abs_rat(&self.im));
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        if hi == f64::NEG_INFINITY {
            return hi;
        }
        hi + 0.5 * (2.0 * (lo - hi)).exp().ln_1p()
    }

    fn from_c64(z: Complex64) -> Self {
        let conv = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
        GaussRat::new(conv(z.re), conv(z.im))
    }

    fn from_gauss(g: &GaussRat) -> Self {
        g.clone()
    }
}

/// Nearest double to a rational, robust against huge numerators and denominators.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = r.to_f64() {
        if x.is_finite() && (x != 0.0 || r.is_zero()) {
            return x;
        }
    }
    // Scale by powers of two so both parts fit.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    let (num, den) = if shift > 0 {
        (n.clone(), d.clone() << (shift as usize))
    } else {
        (n.clone() << ((-shift) as usize), d.clone())
    };
    let m = BigRational::new(num, den).to_f64().unwrap_or(0.0);
    m * 2f64.powi(shift.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

fn ln_abs_rat(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    let shift = r.numer().bits() as i64 - r.denom().bits() as i64;
    let (num, den) = if shift > 0 {
        (r.numer().clone(), r.denom().clone() << (shift as usize))
    } else {
        (r.numer().clone() << ((-shift) as usize), r.denom().clone())
    };
    let m = BigRational::new(num, den).to_f64().unwrap_or(1.0).abs();
    m.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Parse an exact rational from text: integers, `p/q`, and finite decimals like `-0.56`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(p / q);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if !(int_part.chars().all(|c| c.is_ascii_digit()) && frac_part.chars().all(|c| c.is_ascii_digit()))
        || (int_part.is_empty() && frac_part.is_empty())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(num);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Text form `p/q` (or `p`) of a rational.
pub fn rational_text(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Human readable form of a coefficient.
pub fn format_coeff<C: Coeff>(c: &C) -> String {
    let z = c.to_c64();
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("({}{:+}i)", z.re, z.im)
    }
}

/// Exact units of the Gaussian integers, the only roots of unity with Gaussian rational parts.
pub fn gaussian_unit(z: Complex64) -> Option<GaussRat> {
    let units = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    units.iter().find_map(|&(a, b)| {
        (z.re == a as f64 && z.im == b as f64).then(|| {
            GaussRat::new(
                BigRational::from_integer(BigInt::from(a)),
                BigRational::from_integer(BigInt::from(b)),
            )
        })
    })
}

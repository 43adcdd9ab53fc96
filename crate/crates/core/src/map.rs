//! A single polynomial map `z -> sum a_j z^j` with complex coefficients.

use num_complex::Complex64;

/// Polynomial map at a fixed parameter. `coeffs[j]` multiplies `z^j`; the leading one is nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    coeffs: Vec<Complex64>,
}

impl PolyMap {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        PolyMap { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap_or(&Complex64::new(0.0, 0.0))
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Value and first derivative.
    #[inline]
    pub fn eval_d(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> PolyMap {
        PolyMap::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * j as f64)
                .collect(),
        )
    }

    /// Sum of moduli of the non-leading coefficients divided by the leading modulus.
    pub fn lower_mass(&self) -> f64 {
        let lead = self.leading().norm();
        let d = self.degree();
        self.coeffs[..d].iter().map(|c| c.norm()).sum::<f64>() / lead
    }

    /// Radius beyond which every orbit escapes monotonically. For monic maps this is
    /// `1 + sum |b_j|`; otherwise it is also pushed past `2 |a_d|^{-1/(d-1)}`.
    pub fn escape_radius(&self) -> f64 {
        let d = self.degree();
        let base = 1.0 + self.lower_mass();
        let lead = self.leading().norm();
        if lead == 1.0 || d < 2 {
            base
        } else {
            base.max(2.0 * lead.powf(-1.0 / (d as f64 - 1.0)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_matches_eval_d() {
        let m = PolyMap::new(vec![
            Complex64::new(1.0, 0.5),
            Complex64::new(0.0, 0.0),
            Complex64::new(-3.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        let z = Complex64::new(0.7, -1.2);
        let (v, dv) = m.eval_d(z);
        assert!((v - m.eval(z)).norm() < 1e-14);
        assert!((dv - m.derivative().eval(z)).norm() < 1e-14);
        assert_eq!(m.escape_radius(), 1.0 + 3.0 + 1.25f64.sqrt());
    }
}

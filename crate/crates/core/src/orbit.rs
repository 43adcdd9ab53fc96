//! Symbolic orbits of marked points, activity classification, and numeric critical points.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::roots::{solve_target, AberthConfig, ComplexPoly};
use crate::poly::TPoly;

/// Largest `t`-degree any symbolic iterate may reach.
pub const DEGREE_CAP: usize = 16384;

/// `t`-degree of `f_t(p(t))` predicted from the degrees of `p` and the coefficients.
fn projected_degree<C: Coeff>(fam: &Family<C>, p: &TPoly<C>) -> usize {
    let dp = p.degree().unwrap_or(0);
    fam.f()
        .zcoeffs()
        .iter()
        .enumerate()
        .filter_map(|(j, c)| c.degree().map(|dc| dc + j * dp))
        .max()
        .unwrap_or(0)
}

/// One step `p -> f_t(p)`, refusing to exceed the degree cap.
pub fn step_symbolic<C: Coeff>(fam: &Family<C>, p: &TPoly<C>) -> Result<TPoly<C>> {
    let projected = projected_degree(fam, p);
    if projected > DEGREE_CAP {
        return Err(Error::DegreeCapExceeded { projected, cap: DEGREE_CAP });
    }
    Ok(fam.f().apply(p))
}

/// `f_t^n(a(t))` as a polynomial in `t`.
pub fn iterate_symbolic<C: Coeff>(fam: &Family<C>, a: &TPoly<C>, n: usize) -> Result<TPoly<C>> {
    let mut p = a.clone();
    for _ in 0..n {
        p = step_symbolic(fam, &p)?;
    }
    Ok(p)
}

/// The iterates `f^0(a), ..., f^n(a)`.
pub fn orbit_symbolic<C: Coeff>(fam: &Family<C>, a: &TPoly<C>, n: usize) -> Result<Vec<TPoly<C>>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(a.clone());
    for k in 0..n {
        let next = step_symbolic(fam, &out[k])?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityStatus {
    Active,
    Passive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActivityReport {
    pub status: ActivityStatus,
    /// Mass of the bifurcation measure, `m0 / d^n0`, for active points.
    pub q: Option<Ratio<u64>>,
    /// First iterate whose degree exceeds every coefficient degree.
    pub n0: Option<usize>,
    /// Its degree.
    pub m0: Option<usize>,
    /// `(n, m)` with `f^n(a) = f^m(a)` identically, for passive points.
    pub witness: Option<(usize, usize)>,
    /// Degrees of the iterates that were computed (`None` for the zero polynomial).
    pub degrees: Vec<Option<usize>>,
}

impl ActivityReport {
    pub fn q_f64(&self) -> Option<f64> {
        self.q.map(|q| *q.numer() as f64 / *q.denom() as f64)
    }
}

/// Decide whether `a` is active (degrees eventually grow like `m0 d^n`) or passive (a polynomial
/// identity `f^n(a) = f^m(a)` holds), looking at iterates up to `n_max`.
pub fn classify_marked_point<C: Coeff>(fam: &Family<C>, a: &TPoly<C>, n_max: usize) -> Result<ActivityReport> {
    let d = fam.degree();
    let coeff_bound = fam.f().lower_tdegree().unwrap_or(0);
    let mut orbit: Vec<TPoly<C>> = vec![a.clone()];
    let mut degrees = vec![a.degree()];
    for n in 0..=n_max {
        if n > 0 {
            let next = step_symbolic(fam, &orbit[n - 1])?;
            degrees.push(next.degree());
            orbit.push(next);
        }
        if let Some(m) = (0..n).find(|&m| orbit[n].same_as(&orbit[m])) {
            return Ok(ActivityReport {
                status: ActivityStatus::Passive,
                q: None,
                n0: None,
                m0: None,
                witness: Some((n, m)),
                degrees,
            });
        }
        let deg = orbit[n].degree().unwrap_or(0);
        if deg > coeff_bound {
            // Confirm the growth law on two more iterates when the cap allows.
            let mut p = orbit[n].clone();
            for k in 1..=2 {
                match step_symbolic(fam, &p) {
                    Ok(next) => {
                        let expected = deg * d.pow(k);
                        degrees.push(next.degree());
                        if next.degree() != Some(expected) {
                            return Err(Error::Inconclusive { degrees });
                        }
                        p = next;
                    }
                    Err(Error::DegreeCapExceeded { .. }) => break,
                    Err(e) => return Err(e),
                }
            }
            let den = (d as u64).pow(n as u32);
            return Ok(ActivityReport {
                status: ActivityStatus::Active,
                q: Some(Ratio::new(deg as u64, den)),
                n0: Some(n),
                m0: Some(deg),
                witness: None,
                degrees,
            });
        }
    }
    Err(Error::Inconclusive { degrees })
}

/// The `d - 1` critical points of `f_t` (with multiplicity), numerically.
pub fn numeric_critical_points<C: Coeff>(fam: &Family<C>, t: Complex64) -> Result<Vec<Complex64>> {
    let df = fam.numeric().map_at(t).derivative();
    let target = ComplexPoly::new(df.coeffs().to_vec());
    let roots = solve_target(&target, &AberthConfig::default())?;
    Ok(roots
        .iter()
        .flat_map(|r| std::iter::repeat(r.value).take(r.multiplicity))
        .collect())
}

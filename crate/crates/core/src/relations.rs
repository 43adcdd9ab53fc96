//! Orbit relations between marked points: affine symmetries commuting with an iterate,
//! polynomials sharing an iterate with `f`, and the asymptotic constant `ζ` comparing two
//! escaping orbits near `t = ∞`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::escape::bottcher_value;
use crate::family::{bipoly_from_json, bipoly_to_json, Family};
use crate::orbit::iterate_symbolic;
use crate::poly::{BiPoly, TPoly};

/// Roots of unity considered by the affine search and by [`ZetaEstimate`].
pub const MAX_UNIT_ORDER: usize = 64;

/// Tolerance for recognising `ζ` as a root of unity.
pub const UNIT_TOL: f64 = 1e-5;

/// Relative tolerance of the float route in [`check_orbit_relation`].
pub const ORBIT_RELATION_TOL: f64 = 1e-8;

/// Ring radii and sample count used by [`estimate_zeta`].
pub const ZETA_RADII: [f64; 2] = [1e3, 1e4];
pub const ZETA_SAMPLES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryKind {
    Affine,
    SharedIterate,
}

/// `exp(2πi power / order)`, with `power` coprime to `order`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootOfUnity {
    pub order: usize,
    pub power: usize,
}

impl RootOfUnity {
    pub fn value(&self) -> Complex64 {
        // Exact for the Gaussian units.
        match (self.order, self.power * 4 / self.order.max(1)) {
            (1, _) => Complex64::new(1.0, 0.0),
            (2, _) => Complex64::new(-1.0, 0.0),
            (4, 1) => Complex64::new(0.0, 1.0),
            (4, 3) => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, TAU * self.power as f64 / self.order as f64),
        }
    }

    pub fn inverse(&self) -> Self {
        RootOfUnity { order: self.order, power: (self.order - self.power) % self.order }
    }

    /// The exact value when it is one of `±1, ±i`.
    pub fn exact<C: Coeff>(&self) -> Option<C> {
        matches!(self.order, 1 | 2 | 4).then(|| C::from_c64(self.value()))
    }

    /// `z ↦ u z` commutes with a polynomial of support `S` iff `u^{j-1} = 1` for every `j ∈ S`.
    fn fixes_support(&self, support: &[usize]) -> bool {
        support.iter().all(|&j| ((j as i64 - 1) * self.power as i64).rem_euclid(self.order as i64) == 0)
    }
}

/// How a candidate acts on `z`.
#[derive(Clone, Debug, PartialEq)]
pub enum Transform<C: Coeff> {
    Rotation(RootOfUnity),
    Poly(BiPoly<C>),
}

/// A polynomial `h_t` with `h ∘ f^k = f^k ∘ h`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryCandidate<C: Coeff> {
    pub kind: SymmetryKind,
    pub k: usize,
    pub h: Transform<C>,
}

impl<C: Coeff> SymmetryCandidate<C> {
    /// `h` as a polynomial, when it has coefficients in `C`.
    pub fn poly(&self) -> Option<BiPoly<C>> {
        match &self.h {
            Transform::Poly(p) => Some(p.clone()),
            Transform::Rotation(u) => {
                let c = if C::EXACT { u.exact::<C>()? } else { C::from_c64(u.value()) };
                Some(BiPoly::new(vec![TPoly::zero(), TPoly::constant(c)]))
            }
        }
    }

    pub fn float_poly(&self) -> BiPoly<Complex64> {
        match &self.h {
            Transform::Poly(p) => p.to_float(),
            Transform::Rotation(u) => BiPoly::new(vec![TPoly::zero(), TPoly::constant(u.value())]),
        }
    }

    /// Re-check `h ∘ f^k = f^k ∘ h`. Rotations are checked on exponents, and also by
    /// composition when `h` has exact coefficients.
    pub fn verify(&self, fam: &Family<C>) -> bool {
        self.commutes_with_iterate(fam, self.k)
    }

    /// Whether `h` commutes with `f^j`.
    pub fn commutes_with_iterate(&self, fam: &Family<C>, j: usize) -> bool {
        if j == 0 {
            return true;
        }
        let fk = fam.f().iterate(j);
        if let Transform::Rotation(u) = &self.h {
            if !u.fixes_support(&fk.support()) {
                return false;
            }
        }
        match self.poly() {
            Some(h) => h.compose(&fk).same_as(&fk.compose(&h)),
            None => true,
        }
    }

    /// Inverse of a rotation.
    pub fn inverse(&self) -> Option<Self> {
        match &self.h {
            Transform::Rotation(u) => Some(SymmetryCandidate { kind: self.kind, k: self.k, h: Transform::Rotation(u.inverse()) }),
            Transform::Poly(_) => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.h {
            Transform::Rotation(u) if u.order == 2 => "-z".to_string(),
            Transform::Rotation(u) if u.order == 4 && u.power == 1 => "i z".to_string(),
            Transform::Rotation(u) if u.order == 4 => "-i z".to_string(),
            Transform::Rotation(u) => format!("exp(2πi·{}/{}) z", u.power, u.order),
            Transform::Poly(p) => p.to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::json!({
            "kind": self.kind,
            "k": self.k,
            "h": self.describe(),
        });
        match &self.h {
            Transform::Rotation(u) => v["rotation"] = serde_json::to_value(u).expect("plain struct"),
            Transform::Poly(p) => v["zcoeffs"] = serde_json::to_value(bipoly_to_json(p)).expect("plain values"),
        }
        v
    }

    /// Parse a serialized candidate and keep it only if it verifies against `fam`.
    pub fn from_json(v: &Value, fam: &Family<C>) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("symmetry candidate: {m}"));
        let kind: SymmetryKind = serde_json::from_value(v.get("kind").cloned().ok_or_else(|| bad("missing kind"))?)?;
        let k = v.get("k").and_then(Value::as_u64).ok_or_else(|| bad("missing k"))? as usize;
        let h = if let Some(r) = v.get("rotation") {
            let u: RootOfUnity = serde_json::from_value(r.clone())?;
            if u.order == 0 || u.power >= u.order.max(1) {
                return Err(bad("rotation out of range"));
            }
            Transform::Rotation(u)
        } else if let Some(z) = v.get("zcoeffs") {
            let z: Vec<Vec<[Value; 2]>> = serde_json::from_value(z.clone())?;
            Transform::Poly(bipoly_from_json(&z)?)
        } else {
            return Err(bad("needs rotation or zcoeffs"));
        };
        let cand = SymmetryCandidate { kind, k, h };
        if !cand.verify(fam) {
            return Err(bad("does not commute with the stated iterate"));
        }
        Ok(cand)
    }
}

/// Nontrivial affine maps `h_t(z) = u(t) z + v(t)` commuting with some `f^k`, `k ≤ k_max`.
///
/// Matching `z^{D}` and `z^{D-1}` in `h ∘ F = F ∘ h` for the monic centered iterate `F` of degree
/// `D` forces `u^{D-1} = 1` and `v = 0`, so `u` is a constant root of unity and `tdeg_max` only
/// bounds candidates that cannot occur. The remaining equations say `u^{j-1} = 1` on the
/// support of `F`. Each rotation is reported once, at the smallest `k`.
pub fn find_affine_symmetry<C: Coeff>(fam: &Family<C>, k_max: usize, tdeg_max: usize) -> Vec<SymmetryCandidate<C>> {
    let _ = tdeg_max;
    let mut found: Vec<SymmetryCandidate<C>> = Vec::new();
    let mut fk = BiPoly::z();
    for k in 1..=k_max {
        fk = fam.f().compose(&fk);
        let gcd = fk.support().iter().fold(0i64, |g, &j| g.gcd(&(j as i64 - 1))) as usize;
        for order in 2..=MAX_UNIT_ORDER.min(gcd) {
            if gcd % order != 0 {
                continue;
            }
            for power in (1..order).filter(|p| p.gcd(&order) == 1) {
                let u = RootOfUnity { order, power };
                if found.iter().any(|c| c.h == Transform::Rotation(u)) {
                    continue;
                }
                let cand = SymmetryCandidate { kind: SymmetryKind::Affine, k, h: Transform::Rotation(u) };
                if cand.verify(fam) {
                    found.push(cand);
                }
            }
        }
    }
    found
}

/// A monic centered `g` with `g^{∘e} = f`, found by matching coefficients from the top.
///
/// With `r^e = d` and `R = r^{e-1}`, the `z^{d-k}` coefficient of `g^{∘e}` is
/// `R g_{r-k}` plus terms in `g_{r-1}, ..., g_{r-k+1}`, so the coefficients are determined one
/// at a time; the candidate is kept only if the composition reproduces `f` exactly.
pub fn functional_root<C: Coeff>(fam: &Family<C>, e: usize) -> Result<SymmetryCandidate<C>> {
    if e < 2 {
        return Err(Error::InvalidArgument("root order must be at least 2".into()));
    }
    let d = fam.degree();
    let r = (2..=d).find(|r| r.checked_pow(e as u32) == Some(d)).ok_or(Error::NoIntegerRootDegree)?;
    let big_r = r.pow(e as u32 - 1);
    let mut g = vec![TPoly::<C>::zero(); r + 1];
    g[r] = TPoly::constant(C::one());
    let inv_r = C::one() / C::from_int(big_r as i64);
    for k in 2..=r {
        let partial = BiPoly::new(g.clone()).iterate(e);
        let residual = fam.f().zcoeff(d - k).sub(&partial.zcoeff(d - k));
        g[r - k] = residual.scale_by(&inv_r);
    }
    let g = BiPoly::new(g);
    if !g.iterate(e).same_as(fam.f()) {
        return Err(Error::NoSolution);
    }
    Ok(SymmetryCandidate { kind: SymmetryKind::SharedIterate, k: 1, h: Transform::Poly(g) })
}

/// Whether `f^n(a_j) = h(f^m(a_i))` as polynomials in `t` (indices into `fam.marked()`).
///
/// Exact when both the family and `h` are; otherwise relative to [`ORBIT_RELATION_TOL`].
pub fn check_orbit_relation<C: Coeff>(
    fam: &Family<C>,
    h: &SymmetryCandidate<C>,
    i: usize,
    j: usize,
    n: usize,
    m: usize,
) -> Result<bool> {
    let marked = fam.marked();
    if i >= marked.len() || j >= marked.len() {
        return Err(Error::InvalidArgument(format!("marked index out of range ({} points)", marked.len())));
    }
    let lhs = iterate_symbolic(fam, &marked[j], n)?;
    let inner = iterate_symbolic(fam, &marked[i], m)?;
    match h.poly() {
        Some(hp) if C::EXACT => Ok(lhs == hp.apply(&inner)),
        _ => {
            let lhs = lhs.to_float();
            let rhs = h.float_poly().apply(&inner.to_float());
            let scale = lhs.scale().max(rhs.scale());
            Ok(lhs.sub(&rhs).scale() <= ORBIT_RELATION_TOL * scale.max(f64::MIN_POSITIVE))
        }
    }
}

/// `ζ = ζ2^{k2} / ζ1^{k1}` where `ζ_i = lim φ_t(a_i(t)) / t^{m_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaEstimate {
    pub zeta: Complex64,
    pub k1: usize,
    pub k2: usize,
    pub m1: usize,
    pub m2: usize,
    /// `||ζ| - 1|`.
    pub modulus_dev: f64,
    /// Difference between the estimates on the two rings.
    pub ring_spread: f64,
    pub root_of_unity_order: Option<usize>,
    pub root_of_unity: Option<RootOfUnity>,
}

/// Ring mean of `φ_t(a(t)) / t^m` on `|t| = radius`.
///
/// The quotient is holomorphic in `1/t` near infinity, so the mean over `ZETA_SAMPLES`
/// equally spaced arguments only aliases terms of order `t^{-ZETA_SAMPLES}`.
fn ring_mean<C: Coeff>(fam: &Family<C>, a: &TPoly<C>, m: usize, radius: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..ZETA_SAMPLES {
        let t = Complex64::from_polar(radius, TAU * (k as f64 + 0.5) / ZETA_SAMPLES as f64);
        let phi = bottcher_value(fam, t, a.eval(t)).map_err(|e| match e {
            Error::OutsideDomain => Error::NotInDomain(format!("{t}")),
            other => other,
        })?;
        acc += phi / t.powu(m as u32);
    }
    Ok(acc / ZETA_SAMPLES as f64)
}

pub fn estimate_zeta<C: Coeff>(fam: &Family<C>, a1: &TPoly<C>, a2: &TPoly<C>) -> Result<ZetaEstimate> {
    let (Some(m1), Some(m2)) = (a1.degree(), a2.degree()) else {
        return Err(Error::InvalidArgument("marked points must be nonzero".into()));
    };
    if m1 == 0 || m2 == 0 {
        return Err(Error::InvalidArgument("marked points must have positive degree".into()));
    }
    let l = m1.lcm(&m2);
    let (k1, k2) = (l / m1, l / m2);
    let mut per_ring = Vec::new();
    for radius in ZETA_RADII {
        let z1 = ring_mean(fam, a1, m1, radius)?;
        let z2 = ring_mean(fam, a2, m2, radius)?;
        per_ring.push(z2.powu(k2 as u32) / z1.powu(k1 as u32));
    }
    let zeta = *per_ring.last().expect("two radii");
    let ring_spread = (per_ring[0] - per_ring[1]).norm();
    let root = (1..=MAX_UNIT_ORDER).find_map(|order| {
        ((zeta.powu(order as u32) - 1.0).norm() <= UNIT_TOL).then(|| {
            let turns = zeta.arg() / TAU * order as f64;
            RootOfUnity { order, power: (turns.round() as i64).rem_euclid(order as i64) as usize }
        })
    });
    Ok(ZetaEstimate {
        zeta,
        k1,
        k2,
        m1,
        m2,
        modulus_dev: (zeta.norm() - 1.0).abs(),
        ring_spread,
        root_of_unity_order: root.map(|u| u.order),
        root_of_unity: root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::GaussRat;
    use crate::parse::parse_tpoly;

    fn odd() -> Family<GaussRat> {
        Family::parse("z^3 - 3t^2z", &["t", "-t"], "odd cubic").unwrap()
    }

    fn rotations<C: Coeff>(v: &[SymmetryCandidate<C>]) -> Vec<(usize, RootOfUnity)> {
        v.iter()
            .filter_map(|c| match c.h {
                Transform::Rotation(u) => Some((c.k, u)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn odd_cubic_has_minus_z() {
        let found = find_affine_symmetry(&odd(), 2, 2);
        assert_eq!(rotations(&found), vec![(1, RootOfUnity { order: 2, power: 1 })]);
        assert_eq!(found[0].poly().unwrap(), BiPoly::new(vec![TPoly::zero(), parse_tpoly("-1").unwrap()]));
        assert!(found[0].commutes_with_iterate(&odd(), 2));
    }

    #[test]
    fn quintic_rotation_needs_second_iterate() {
        let fam = Family::parse("z^5 - t^3z^2", &[], "").unwrap();
        let found = find_affine_symmetry(&fam, 2, 2);
        let r = rotations(&found);
        assert!(r.contains(&(2, RootOfUnity { order: 3, power: 1 })), "{r:?}");
        assert!(r.iter().all(|(k, _)| *k == 2));
        // ζ3 is not a Gaussian rational: no exact polynomial, but the exponent check passes.
        assert!(found[0].poly().is_none());
        assert!(found[0].verify(&fam));
        assert!(!found[0].commutes_with_iterate(&fam, 1));
    }

    #[test]
    fn no_symmetry_for_generic_families() {
        assert!(find_affine_symmetry(&Family::parse("z^2 + t", &["0"], "").unwrap(), 3, 2).is_empty());
        assert!(find_affine_symmetry(&Family::parse("z^3 - 3t^2z + i", &["t"], "").unwrap(), 2, 2).is_empty());
    }

    #[test]
    fn functional_roots() {
        let fam = Family::parse("(z^2 - t^2)^2 - t^2", &["0", "t", "-t"], "").unwrap();
        let g = functional_root(&fam, 2).unwrap();
        assert_eq!(g.poly().unwrap(), crate::parse::parse_bipoly("z^2 - t^2").unwrap());
        assert!(g.verify(&fam));
        let fam = Family::parse("z^4 + t", &[], "").unwrap();
        assert!(matches!(functional_root(&fam, 2), Err(Error::NoSolution)));
        assert!(matches!(functional_root(&fam, 3), Err(Error::NoIntegerRootDegree)));
        let fam = Family::parse("z^4", &[], "").unwrap();
        assert_eq!(functional_root(&fam, 2).unwrap().poly().unwrap(), crate::parse::parse_bipoly("z^2").unwrap());
        let fam = Family::parse("z^2 + t", &[], "").unwrap();
        let f8 = Family::new(fam.f().iterate(3), vec![], "").unwrap();
        assert_eq!(functional_root(&f8, 3).unwrap().poly().unwrap(), *fam.f());
    }

    #[test]
    fn orbit_relations() {
        let fam = odd();
        let h = find_affine_symmetry(&fam, 1, 0).remove(0);
        // f(t) = -h(f(-t))
        assert!(check_orbit_relation(&fam, &h, 1, 0, 1, 1).unwrap());
        let inv = h.inverse().unwrap();
        assert!(check_orbit_relation(&fam, &inv, 0, 1, 1, 1).unwrap());
        let fam = Family::parse("(z^2 - t^2)^2 - t^2", &["0", "t", "-t"], "").unwrap();
        let g = functional_root(&fam, 2).unwrap();
        assert!(check_orbit_relation(&fam, &g, 1, 0, 0, 0).unwrap());
        let broken = Family::parse("z^3 - 3t^2z + i", &["t", "-t"], "").unwrap();
        let h = SymmetryCandidate { kind: SymmetryKind::Affine, k: 1, h: Transform::Rotation(RootOfUnity { order: 2, power: 1 }) };
        // n = 0 holds trivially since the marked points are still ±t.
        assert!(check_orbit_relation(&broken, &h, 0, 1, 0, 0).unwrap());
        for n in 1..=3 {
            assert!(!check_orbit_relation(&broken, &h, 0, 1, n, n).unwrap());
        }
    }

    #[test]
    fn json_roundtrip_reverifies() {
        let fam = Family::parse("(z^2 - t^2)^2 - t^2", &[], "").unwrap();
        let g = functional_root(&fam, 2).unwrap();
        let back = SymmetryCandidate::from_json(&g.to_json(), &fam).unwrap();
        assert_eq!(back, g);
        let odd = odd();
        let h = find_affine_symmetry(&odd, 1, 0).remove(0);
        assert_eq!(SymmetryCandidate::from_json(&h.to_json(), &odd).unwrap(), h);
        assert!(SymmetryCandidate::from_json(&h.to_json(), &fam).is_err());
        let quad = Family::parse("z^2 + t", &[], "").unwrap();
        assert!(SymmetryCandidate::from_json(&h.to_json(), &quad).is_err());
    }

    #[test]
    fn zeta_for_odd_cubic() {
        let fam = odd();
        let a1 = parse_tpoly("-2t^3").unwrap();
        let a2 = parse_tpoly("2t^3").unwrap();
        let z = estimate_zeta(&fam, &a1, &a2).unwrap();
        assert!((z.zeta + 1.0).norm() < 1e-9, "{:?}", z.zeta);
        assert!(z.modulus_dev <= 1e-6);
        assert_eq!(z.root_of_unity_order, Some(2));
        assert_eq!(z.root_of_unity.unwrap().value(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn zeta_identical_points() {
        let fam = Family::parse("z^2 + t", &["t"], "").unwrap();
        let a = parse_tpoly("t").unwrap();
        let z = estimate_zeta(&fam, &a, &a).unwrap();
        assert_eq!(z.zeta, Complex64::new(1.0, 0.0));
        assert_eq!(z.root_of_unity_order, Some(1));
    }

    #[test]
    fn zeta_quintic_is_cube_root() {
        let beta = (0.4f64).cbrt();
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        let fam = Family::parse("z^5 - t^3z^2", &[], "").unwrap().to_float();
        let c2 = TPoly::new(vec![Complex64::new(0.0, 0.0), Complex64::new(beta, 0.0)]);
        let c3 = TPoly::new(vec![Complex64::new(0.0, 0.0), w * beta]);
        let a1 = iterate_symbolic(&fam, &c2, 2).unwrap();
        let a2 = iterate_symbolic(&fam, &c3, 2).unwrap();
        let z = estimate_zeta(&fam, &a1, &a2).unwrap();
        assert_eq!(z.root_of_unity_order, Some(3), "{z:?}");
        assert!(z.modulus_dev < 1e-6);
    }

    #[test]
    fn zeta_outside_domain() {
        // A critical point sits on the boundary of the Böttcher domain.
        let fam = odd();
        let small = parse_tpoly("t").unwrap();
        assert!(matches!(estimate_zeta(&fam, &small, &small), Err(Error::NotInDomain(_))));
    }
}

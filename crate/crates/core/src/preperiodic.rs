//! Equations `f^n(a) = f^m(a)` in the parameter, their roots, numerical preperiodicity verdicts,
//! and the search for postcritically finite parameters.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::family::{horner, Family};
use crate::map::PolyMap;
use crate::orbit::{classify_marked_point, iterate_symbolic, ActivityStatus};
use crate::poly::TPoly;
use crate::roots::{
    newton_polygon_radii, solve_target, sort_roots, AberthConfig, Deflated, Root, RootSet, RootTarget, Series,
};

/// Largest equation degree handed to the root finder.
pub const ROOT_DEGREE_CAP: usize = 4096;

/// Distance below which roots from different equations are identified.
pub const DEDUP_TOL: f64 = 1e-7;

/// `f^n(a(t)) - f^m(a(t))` as an exact polynomial in `t`.
pub fn preperiodic_equation<C: Coeff>(fam: &Family<C>, a: &TPoly<C>, n: usize, m: usize) -> Result<TPoly<C>> {
    if n <= m {
        return Err(Error::InvalidArgument(format!("need n > m, got n = {n}, m = {m}")));
    }
    let zm = iterate_symbolic(fam, a, m)?;
    let mut zn = zm.clone();
    for _ in m..n {
        zn = crate::orbit::step_symbolic(fam, &zn)?;
    }
    Ok(zn.sub(&zm))
}

pub fn equation_label(n: usize, m: usize) -> String {
    format!("f^{n}(a)=f^{m}(a)")
}

/// Evaluates `f^n(a(t)) - f^m(a(t))` (or `f^n(a(t))` alone when `m` is `None`) by running the
/// orbit, which stays accurate where the expanded coefficients would cancel catastrophically.
struct OrbitEquation {
    zcoeffs: Vec<Vec<Complex64>>,
    start: Vec<Complex64>,
    n: usize,
    m: Option<usize>,
    degree: usize,
    radii: Vec<f64>,
}

impl RootTarget for OrbitEquation {
    fn degree(&self) -> usize {
        self.degree
    }

    fn taylor(&self, t: Complex64, order: usize) -> Series {
        let var = Series::variable(t, order);
        let coeffs: Vec<Series> = self.zcoeffs.iter().map(|c| var.horner(c)).collect();
        let mut z = var.horner(&self.start);
        let mut zm = z.clone();
        for k in 1..=self.n {
            if Some(k - 1) == self.m {
                zm = z.clone();
            }
            let mut acc = coeffs[coeffs.len() - 1].clone();
            for c in coeffs[..coeffs.len() - 1].iter().rev() {
                acc = acc.mul(&z).add(c);
            }
            z = acc;
        }
        match self.m {
            None => z,
            Some(m) if m == self.n => Series::constant(Complex64::new(0.0, 0.0), order),
            Some(_) => z.sub(&zm),
        }
    }

    fn initial_radii(&self) -> Vec<f64> {
        self.radii.clone()
    }
}

/// Roots of `f^n(a) = f^m(a)` with multiplicities. Residuals are `|f^n(a) - f^m(a)|` by orbit
/// iteration at the root.
pub fn solve_preperiodic<C: Coeff>(fam: &Family<C>, a: &TPoly<C>, n: usize, m: usize) -> Result<RootSet> {
    let eq = preperiodic_equation(fam, a, n, m)?;
    solve_orbit_equation(fam, a, &eq, n, Some(m), equation_label(n, m))
}

/// Roots of `f^n(a) = 0`, solved like [`solve_preperiodic`].
pub fn solve_orbit_zero<C: Coeff>(fam: &Family<C>, a: &TPoly<C>, n: usize) -> Result<RootSet> {
    let eq = iterate_symbolic(fam, a, n)?;
    solve_orbit_equation(fam, a, &eq, n, None, format!("f^{n}(a)=0"))
}

fn solve_orbit_equation<C: Coeff>(
    fam: &Family<C>,
    a: &TPoly<C>,
    eq: &TPoly<C>,
    n: usize,
    m: Option<usize>,
    source: String,
) -> Result<RootSet> {
    let degree = match eq.degree() {
        None => return Err(Error::ZeroPolynomial),
        Some(d) => d,
    };
    if degree > ROOT_DEGREE_CAP {
        return Err(Error::DegreeCapExceeded { projected: degree, cap: ROOT_DEGREE_CAP });
    }
    let low = eq.low_order_zeros();
    let logs: Vec<f64> = eq.coeffs()[low..].iter().map(|c| c.ln_magnitude()).collect();
    let target = OrbitEquation {
        zcoeffs: fam.f().zcoeffs().iter().map(|p| p.to_c64_vec()).collect(),
        start: a.to_c64_vec(),
        n,
        m,
        degree,
        radii: newton_polygon_radii(&logs),
    };
    let deflated = Deflated { inner: &target, k: low };
    let mut roots = solve_target(&deflated, &AberthConfig::default())?;
    for r in roots.iter_mut() {
        r.residual = target.taylor(r.value, 0).0[0].norm();
    }
    if low > 0 {
        roots.push(Root { value: Complex64::new(0.0, 0.0), multiplicity: low, residual: 0.0, source: None });
        sort_roots(&mut roots);
    }
    for r in roots.iter_mut() {
        r.source = Some(source.clone());
    }
    Ok(RootSet { roots, source })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    /// `f^{preperiod + period}(a) = f^{preperiod}(a)` numerically, with a stable near-cycle.
    Preperiodic { preperiod: usize, period: usize },
    Escaping { iterations: usize },
    Undecided,
}

impl Verdict {
    pub fn is_preperiodic(&self) -> bool {
        matches!(self, Verdict::Preperiodic { .. })
    }

    pub fn is_escaping(&self) -> bool {
        matches!(self, Verdict::Escaping { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Preperiodic { .. } => "preperiodic",
            Verdict::Escaping { .. } => "escaping",
            Verdict::Undecided => "undecided",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictOptions {
    pub tol: f64,
    pub orbit_cap: usize,
    pub period_cap: usize,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions { tol: 1e-9, orbit_cap: 256, period_cap: 16 }
    }
}

/// Fraction of the orbit scale the orbit must have been away from the cycle one step before a
/// close return; rules out slow convergence to an attracting cycle.
const LANDING_GAP: f64 = 1e-4;

/// Numerical verdict on the orbit of `z0` under a single map.
pub fn orbit_verdict(map: &PolyMap, z0: Complex64, opts: &VerdictOptions) -> Verdict {
    let radius = map.escape_radius();
    let mut orbit = vec![z0];
    let mut scale = 1.0 + z0.norm();
    if z0.norm() > radius {
        return Verdict::Escaping { iterations: 0 };
    }
    let mut candidate: Option<(usize, usize)> = None;
    let mut stable_until = 0usize;
    let loose = opts.tol.sqrt();
    for j in 1..=opts.orbit_cap + opts.period_cap {
        let z = map.eval(orbit[j - 1]);
        if !(z.norm() <= radius) {
            return Verdict::Escaping { iterations: j };
        }
        orbit.push(z);
        scale = scale.max(1.0 + z.norm());
        if let Some((m, p)) = candidate {
            if (z - orbit[j - p]).norm() >= loose * scale {
                // Not a real cycle; keep searching past it.
                candidate = None;
            } else if j >= stable_until {
                return Verdict::Preperiodic { preperiod: m, period: p };
            }
            continue;
        }
        if j > opts.orbit_cap {
            break;
        }
        for p in 1..=opts.period_cap.min(j) {
            if (z - orbit[j - p]).norm() < opts.tol * scale {
                let m = j - p;
                let abrupt = m == 0 || (orbit[j - 1] - orbit[m - 1]).norm() > LANDING_GAP * scale;
                if abrupt {
                    // The cycle starts at the first point that already sits on it.
                    let mut start = m;
                    while start > 0 && (orbit[start - 1] - orbit[start - 1 + p]).norm() < opts.tol * scale {
                        start -= 1;
                    }
                    candidate = Some((start, p));
                    stable_until = j + opts.period_cap;
                }
                break;
            }
        }
    }
    Verdict::Undecided
}

/// Verdict on the orbit of `a(t0)` under `f_{t0}`.
pub fn is_preperiodic_at<C: Coeff>(fam: &Family<C>, a: &TPoly<C>, t0: Complex64, opts: &VerdictOptions) -> Verdict {
    let map = fam.numeric().map_at(t0);
    orbit_verdict(&map, a.eval(t0), opts)
}

/// One equation to solve: marked point index with `f^n = f^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Driver {
    pub marked: usize,
    pub n: usize,
    pub m: usize,
}

/// Every `(n, m)` with `1 <= n <= n_max`, `0 <= m < n`.
pub fn all_drivers(marked: usize, n_max: usize) -> Vec<Driver> {
    (1..=n_max).flat_map(|n| (0..n).map(move |m| Driver { marked, n, m })).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcfCandidate {
    pub value: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
    /// Equations this parameter solves.
    pub sources: Vec<String>,
    /// Verdicts for the other active marked points, by index.
    pub verdicts: Vec<(usize, Verdict)>,
    pub pcf: bool,
}

#[derive(Clone, Debug)]
pub struct PcfSearch {
    pub candidates: Vec<PcfCandidate>,
    /// Marked points found passive, skipped in the verdicts.
    pub passive: Vec<usize>,
    /// Equations that vanish identically.
    pub identities: Vec<String>,
}

impl PcfSearch {
    pub fn pcf(&self) -> RootSet {
        let roots = self
            .candidates
            .iter()
            .filter(|c| c.pcf)
            .map(|c| Root {
                value: c.value,
                multiplicity: c.multiplicity,
                residual: c.residual,
                source: Some(c.sources.join(";")),
            })
            .collect();
        RootSet { roots, source: "pcf".into() }
    }

    pub fn pcf_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.pcf).count()
    }

    pub fn find(&self, t: Complex64, tol: f64) -> Option<&PcfCandidate> {
        self.candidates.iter().find(|c| (c.value - t).norm() <= tol)
    }
}

/// Solve the driver equations, merge their roots, and keep the parameters at which every other
/// active marked point is numerically preperiodic.
pub fn find_pcf<C: Coeff>(fam: &Family<C>, drivers: &[Driver], opts: &VerdictOptions) -> Result<PcfSearch> {
    let k = fam.marked().len();
    if let Some(d) = drivers.iter().find(|d| d.marked >= k) {
        return Err(Error::InvalidArgument(format!("no marked point with index {}", d.marked)));
    }
    let passive: Vec<usize> = (0..k)
        .filter(|&i| {
            matches!(
                classify_marked_point(fam, &fam.marked()[i], 8),
                Ok(r) if r.status == ActivityStatus::Passive
            )
        })
        .collect();

    let mut candidates: Vec<PcfCandidate> = Vec::new();
    // marked points whose own equation each candidate solves
    let mut own: Vec<Vec<usize>> = Vec::new();
    let mut identities = Vec::new();
    for d in drivers {
        let label = format!("a{}: {}", d.marked, equation_label(d.n, d.m));
        let set = match solve_preperiodic(fam, &fam.marked()[d.marked], d.n, d.m) {
            Ok(s) => s,
            Err(Error::ZeroPolynomial) => {
                identities.push(label);
                continue;
            }
            Err(e) => return Err(e),
        };
        for r in set.roots {
            let near = |c: &PcfCandidate| (c.value - r.value).norm() <= DEDUP_TOL * (1.0 + c.value.norm());
            if let Some(idx) = candidates.iter().position(near) {
                let c = &mut candidates[idx];
                c.sources.push(label.clone());
                c.multiplicity = c.multiplicity.max(r.multiplicity);
                if !own[idx].contains(&d.marked) {
                    own[idx].push(d.marked);
                }
                continue;
            }
            own.push(vec![d.marked]);
            candidates.push(PcfCandidate {
                value: r.value,
                multiplicity: r.multiplicity,
                residual: r.residual,
                sources: vec![label.clone()],
                verdicts: Vec::new(),
                pcf: false,
            });
        }
    }

    let num = fam.numeric();
    let marked: Vec<Vec<Complex64>> = fam.marked().iter().map(|a| a.to_c64_vec()).collect();
    for (c, own) in candidates.iter_mut().zip(&own) {
        let map = num.map_at(c.value);
        let mut ok = true;
        for i in 0..k {
            if passive.contains(&i) || own.contains(&i) {
                continue;
            }
            let v = orbit_verdict(&map, horner(&marked[i], c.value), opts);
            ok &= v.is_preperiodic();
            c.verdicts.push((i, v));
        }
        c.pcf = ok;
    }
    candidates.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    Ok(PcfSearch { candidates, passive, identities })
}

//! Archimedean potential theory for a parameter-space Green's function: the homogeneous lift,
//! the Arakelov-Green kernel, energies of finite sets and logarithmic-potential discrepancies.

use std::sync::Arc;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::escape::{escape_rate, robin_constant};
use crate::family::Family;
use crate::orbit::{classify_marked_point, ActivityStatus};
use crate::plane::ScalarField;
use crate::roots::RootSet;

pub type Evaluator = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

/// A Green's function `G(t) = q log|t| + O(1)` with mass `q`, and the Robin constant of `G / q`.
#[derive(Clone)]
pub struct GreenSpec {
    pub evaluator: Evaluator,
    pub q: f64,
    pub gamma: f64,
}

impl std::fmt::Debug for GreenSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GreenSpec").field("q", &self.q).field("gamma", &self.gamma).finish()
    }
}

/// Escape iterations used by family-backed evaluators.
pub const GREEN_CAP: usize = 1024;

impl GreenSpec {
    pub fn new(evaluator: Evaluator, q: f64, gamma: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("need q > 0 and finite gamma, got q = {q}, gamma = {gamma}")));
        }
        Ok(GreenSpec { evaluator, q, gamma })
    }

    /// Escape rate of marked point `i`; the mass comes from the degree growth of its orbit and
    /// the Robin constant from ring averages.
    pub fn from_family<C: Coeff>(fam: &Family<C>, i: usize) -> Result<Self> {
        let report = classify_marked_point(fam, &fam.marked()[i], 12)?;
        if report.status == ActivityStatus::Passive {
            return Err(Error::NotActive);
        }
        let q = report.q_f64().expect("active points carry a mass");
        let gamma = robin_constant(fam, i, q).gamma / q;
        let fam = fam.to_float();
        let evaluator: Evaluator = Arc::new(move |t| escape_rate(&fam, i, t, GREEN_CAP).g);
        GreenSpec::new(evaluator, q, gamma)
    }

    pub fn raw(&self, t: Complex64) -> f64 {
        (self.evaluator)(t)
    }

    /// `G / q`, which grows like `log|t| + gamma`.
    pub fn normalized(&self, t: Complex64) -> f64 {
        (self.evaluator)(t) / self.q
    }
}

/// `H(s, t) = Ĝ(s / t) + log|t|`, and `log|s| + gamma` on the line `t = 0`.
pub fn homogeneous_h(spec: &GreenSpec, s: Complex64, t: Complex64) -> Result<f64> {
    if t == Complex64::new(0.0, 0.0) {
        if s == Complex64::new(0.0, 0.0) {
            return Err(Error::OriginUndefined);
        }
        return Ok(s.norm().ln() + spec.gamma);
    }
    Ok(spec.normalized(s / t) + t.norm().ln())
}

/// `g(x, y) = -log|x̃ ∧ ỹ| + H(x̃) + H(ỹ) - gamma` for lifts `x̃ = (x_s, x_t)`.
pub fn arakelov_green_lifted(spec: &GreenSpec, x: (Complex64, Complex64), y: (Complex64, Complex64)) -> Result<f64> {
    let wedge = x.0 * y.1 - x.1 * y.0;
    if wedge == Complex64::new(0.0, 0.0) {
        return Err(Error::DiagonalPole);
    }
    // Add the two heights first so swapping x and y gives the same bits.
    let heights = homogeneous_h(spec, x.0, x.1)? + homogeneous_h(spec, y.0, y.1)?;
    Ok(-wedge.norm().ln() + heights - spec.gamma)
}

pub fn arakelov_green(spec: &GreenSpec, x: Complex64, y: Complex64) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    arakelov_green_lifted(spec, (x, one), (y, one))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialProbe {
    pub w: Complex64,
    pub empirical: f64,
    pub predicted: f64,
}

impl PotentialProbe {
    pub fn discrepancy(&self) -> f64 {
        (self.empirical - self.predicted).abs()
    }
}

/// Energy and potential diagnostics at the archimedean place only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub set_size: usize,
    pub energy: f64,
    pub potential_probes: Vec<PotentialProbe>,
    pub place: String,
}

impl EnergyReport {
    pub fn max_discrepancy(&self) -> f64 {
        self.potential_probes.iter().map(|p| p.discrepancy()).fold(0.0, f64::max)
    }
}

/// Sum in a fixed pairwise tree so results do not depend on scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// `(1/2) |S|^{-2} Σ_{i≠j} g(s_i, s_j)` over the distinct points of `S`.
pub fn set_energy(spec: &GreenSpec, set: &RootSet) -> Result<EnergyReport> {
    let pts = set.values();
    energy_of_points(spec, &pts).map(|energy| EnergyReport {
        set_size: pts.len(),
        energy,
        potential_probes: Vec::new(),
        place: "archimedean".into(),
    })
}

fn energy_of_points(spec: &GreenSpec, pts: &[Complex64]) -> Result<f64> {
    let n = pts.len();
    if n < 2 {
        return Ok(0.0);
    }
    let h: Vec<f64> = pts.par_iter().map(|&p| spec.normalized(p)).collect();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let terms: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| -(pts[i] - pts[j]).norm().ln() + h[i] + h[j] - spec.gamma)
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    if rows.iter().any(|r| !r.is_finite()) {
        return Err(Error::DiagonalPole);
    }
    Ok(0.5 * pairwise_sum(&rows) / (n * n) as f64)
}

/// Compare `(1/|S|) Σ log|w - s|` with `Ĝ(w) - gamma` at probes outside the set.
pub fn potential_discrepancy(spec: &GreenSpec, set: &RootSet, probes: &[Complex64]) -> Result<EnergyReport> {
    let pts = set.values_with_multiplicity();
    if pts.is_empty() {
        return Err(Error::InvalidArgument("empty set".into()));
    }
    let mut out = Vec::with_capacity(probes.len());
    for &w in probes {
        let g = spec.normalized(w);
        if !(g > 0.0) {
            return Err(Error::ProbeInsideSet(format!("{w}")));
        }
        let logs: Vec<f64> = pts.iter().map(|s| (w - s).norm().ln()).collect();
        let empirical = pairwise_sum(&logs) / pts.len() as f64;
        out.push(PotentialProbe { w, empirical, predicted: g - spec.gamma });
    }
    let distinct = set.values();
    Ok(EnergyReport {
        set_size: distinct.len(),
        energy: energy_of_points(spec, &distinct)?,
        potential_probes: out,
        place: "archimedean".into(),
    })
}

/// Default Monte-Carlo sample count and seed for the normalization check.
pub const NORMALIZATION_PAIRS: usize = 100_000;
pub const NORMALIZATION_SEED: u64 = 0x5eed;

/// Monte-Carlo estimate of `∬ g dμ dμ` with `μ` the positive part of a mass-density field,
/// sampling pixel pairs by mass and points uniformly inside each pixel.
pub fn normalization_integral(spec: &GreenSpec, density: &ScalarField, pairs: usize, seed: u64) -> Result<f64> {
    let weights: Vec<f64> = density.values.iter().map(|v| v.max(0.0)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(format!("mass field: {e}")))?;
    let w = density.window;
    let h = w.h();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let k = dist.sample(rng);
        let c = w.center(k % w.nx, k / w.nx);
        c + Complex64::new((rng.gen::<f64>() - 0.5) * h, (rng.gen::<f64>() - 0.5) * h)
    };
    let samples: Vec<(Complex64, Complex64)> = (0..pairs).map(|_| (draw(&mut rng), draw(&mut rng))).collect();
    let values: Vec<f64> = samples
        .par_iter()
        .map(|&(x, y)| arakelov_green(spec, x, y).unwrap_or(0.0))
        .collect();
    Ok(pairwise_sum(&values) / pairs as f64)
}

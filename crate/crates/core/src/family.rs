//! One-parameter families `f_t(z)` with marked points, and their JSON fixture format.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coeff::{parse_rational, rational_text, Coeff, GaussRat};
use crate::error::{Error, Result};
use crate::map::PolyMap;
use crate::parse::{parse_bipoly, parse_tpoly};
use crate::poly::{BiPoly, TPoly};

/// A monic centered family together with its marked points.
#[derive(Clone, Debug)]
pub struct Family<C: Coeff = Complex64> {
    f: BiPoly<C>,
    marked: Vec<TPoly<C>>,
    label: String,
    numeric: NumericFamily,
}

impl<C: Coeff> Family<C> {
    pub fn new(f: BiPoly<C>, marked: Vec<TPoly<C>>, label: impl Into<String>) -> Result<Self> {
        let d = f.zdegree().unwrap_or(0);
        if d < 2 {
            return Err(Error::InvalidFamily(format!("degree {d} < 2")));
        }
        if !f.is_monic_centered() {
            return Err(Error::InvalidFamily("not monic and centered in z".into()));
        }
        let numeric = NumericFamily::new(&f, &marked);
        Ok(Family { f, marked, label: label.into(), numeric })
    }

    pub fn f(&self) -> &BiPoly<C> {
        &self.f
    }

    pub fn degree(&self) -> usize {
        self.f.zdegree().unwrap_or(0)
    }

    pub fn marked(&self) -> &[TPoly<C>] {
        &self.marked
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn numeric(&self) -> &NumericFamily {
        &self.numeric
    }

    pub fn with_marked(&self, marked: Vec<TPoly<C>>) -> Self {
        Family::new(self.f.clone(), marked, self.label.clone()).expect("same map")
    }

    pub fn to_float(&self) -> Family<Complex64> {
        Family::new(
            self.f.to_float(),
            self.marked.iter().map(|p| p.to_float()).collect(),
            self.label.clone(),
        )
        .expect("same map")
    }

    /// Check that the marked points are `d - 1` roots of `∂f/∂z`.
    pub fn marked_are_critical(&self) -> bool {
        let df = self.f.derivative_z();
        self.marked.len() == self.degree() - 1
            && self.marked.iter().all(|a| {
                let v = df.apply(a);
                v.is_zero() || (!C::EXACT && v.scale() <= 1e-9 * (1.0 + df.apply(a).scale()))
            })
    }

    pub fn to_fixture(&self) -> Fixture {
        let tp = |p: &TPoly<C>| -> Vec<[Value; 2]> {
            p.coeffs().iter().map(coeff_to_json::<C>).collect()
        };
        Fixture {
            d: Some(self.degree()),
            zcoeffs: Some(bipoly_to_json(&self.f)),
            poly: None,
            marked: self.marked.iter().map(|p| MarkedJson::Coeffs(tp(p))).collect(),
            label: Some(self.label.clone()),
            critical: None,
        }
    }
}

impl Family<GaussRat> {
    /// Build from expressions, e.g. `Family::parse("z^2 + t", &["0", "t"], "quadratic")`.
    pub fn parse(f: &str, marked: &[&str], label: &str) -> Result<Self> {
        let f = parse_bipoly(f)?;
        let marked = marked.iter().map(|m| parse_tpoly(m)).collect::<Result<Vec<_>>>()?;
        Family::new(f, marked, label)
    }
}

/// `zcoeffs` in the fixture layout.
pub fn bipoly_to_json<C: Coeff>(p: &BiPoly<C>) -> Vec<Vec<[Value; 2]>> {
    p.zcoeffs().iter().map(|c| c.coeffs().iter().map(coeff_to_json::<C>).collect()).collect()
}

/// Read `zcoeffs` in the fixture layout into either coefficient ring.
pub fn bipoly_from_json<C: Coeff>(z: &[Vec<[Value; 2]>]) -> Result<BiPoly<C>> {
    Ok(match read_bipoly(z)? {
        RawPoly::Exact(p) => BiPoly::new(
            p.zcoeffs().iter().map(|c| TPoly::new(c.coeffs().iter().map(C::from_gauss).collect())).collect(),
        ),
        RawPoly::Float(p) => BiPoly::new(
            p.zcoeffs().iter().map(|c| TPoly::new(c.coeffs().iter().map(|x| C::from_c64(*x)).collect())).collect(),
        ),
    })
}

fn coeff_to_json<C: Coeff>(c: &C) -> [Value; 2] {
    let any: &dyn std::any::Any = c;
    if let Some(g) = any.downcast_ref::<GaussRat>() {
        return [Value::String(rational_text(&g.re)), Value::String(rational_text(&g.im))];
    }
    let z = c.to_c64();
    [Value::from(z.re), Value::from(z.im)]
}

/// Complex double coefficients of a family for fast pointwise work.
#[derive(Clone, Debug)]
pub struct NumericFamily {
    d: usize,
    zcoeffs: Vec<Vec<Complex64>>,
    zcoeffs_dt: Vec<Vec<Complex64>>,
    marked: Vec<Vec<Complex64>>,
}

impl NumericFamily {
    pub fn new<C: Coeff>(f: &BiPoly<C>, marked: &[TPoly<C>]) -> Self {
        let zcoeffs: Vec<Vec<Complex64>> = f.zcoeffs().iter().map(|p| p.to_c64_vec()).collect();
        let zcoeffs_dt = f.zcoeffs().iter().map(|p| p.derivative().to_c64_vec()).collect();
        NumericFamily {
            d: f.zdegree().unwrap_or(0),
            zcoeffs,
            zcoeffs_dt,
            marked: marked.iter().map(|p| p.to_c64_vec()).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn marked_count(&self) -> usize {
        self.marked.len()
    }

    pub fn map_at(&self, t: Complex64) -> PolyMap {
        PolyMap::new(self.zcoeffs.iter().map(|p| horner(p, t)).collect())
    }

    /// Value and `t`-derivative of the `i`-th marked point.
    pub fn marked_at(&self, i: usize, t: Complex64) -> (Complex64, Complex64) {
        horner_d(&self.marked[i], t)
    }

    /// Map derivative in `t` at a fixed parameter: `∂f/∂t` as a polynomial in `z`.
    pub fn map_dt_at(&self, t: Complex64) -> PolyMap {
        PolyMap::new(self.zcoeffs_dt.iter().map(|p| horner(p, t)).collect())
    }
}

pub(crate) fn horner(p: &[Complex64], t: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
}

pub(crate) fn horner_d(p: &[Complex64], t: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for c in p.iter().rev() {
        dv = dv * t + v;
        v = v * t + c;
    }
    (v, dv)
}

/// A family loaded from a fixture: exact when every coefficient was given as text.
#[derive(Clone, Debug)]
pub enum AnyFamily {
    Exact(Family<GaussRat>),
    Float(Family<Complex64>),
}

impl AnyFamily {
    pub fn to_float(&self) -> Family<Complex64> {
        match self {
            AnyFamily::Exact(f) => f.to_float(),
            AnyFamily::Float(f) => f.clone(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            AnyFamily::Exact(f) => f.label(),
            AnyFamily::Float(f) => f.label(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnyFamily::Exact(_))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fx: Fixture = serde_json::from_str(text)?;
        fx.build()
    }
}

/// On-disk family description.
///
/// Either `zcoeffs` (per power of `z`, a list of `[re, im]` pairs per power of `t`) or `poly`
/// (an expression such as `"z^2 + t"`). Numbers given as JSON strings (`"p/q"`, decimals) are
/// exact; the family is exact when no JSON float appears.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zcoeffs: Option<Vec<Vec<[Value; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    #[serde(default)]
    pub marked: Vec<MarkedJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Caller's assertion that the marked points are all the critical points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MarkedJson {
    Expr(String),
    Coeffs(Vec<[Value; 2]>),
}

enum Num {
    Exact(num_rational::BigRational),
    Float(f64),
}

fn read_num(v: &Value) -> Result<Num> {
    match v {
        Value::String(s) => Ok(Num::Exact(parse_rational(s)?)),
        Value::Number(n) => n
            .as_f64()
            .map(Num::Float)
            .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        other => Err(Error::Parse(format!("expected number or string, got {other}"))),
    }
}

impl Fixture {
    pub fn build(&self) -> Result<AnyFamily> {
        let label = self.label.clone().unwrap_or_default();
        let exact_f = match (&self.poly, &self.zcoeffs) {
            (Some(expr), None) => RawPoly::Exact(parse_bipoly(expr)?),
            (None, Some(z)) => read_bipoly(z)?,
            _ => return Err(Error::Parse("give exactly one of `poly` or `zcoeffs`".into())),
        };
        let mut marked = Vec::new();
        for m in &self.marked {
            marked.push(match m {
                MarkedJson::Expr(s) => RawT::Exact(parse_tpoly(s)?),
                MarkedJson::Coeffs(c) => read_tpoly(c)?,
            });
        }
        let all_exact = matches!(exact_f, RawPoly::Exact(_)) && marked.iter().all(|m| matches!(m, RawT::Exact(_)));
        let fam = if all_exact {
            let RawPoly::Exact(f) = exact_f else { unreachable!() };
            let marked = marked
                .into_iter()
                .map(|m| match m {
                    RawT::Exact(p) => p,
                    RawT::Float(_) => unreachable!(),
                })
                .collect();
            AnyFamily::Exact(Family::new(f, marked, label)?)
        } else {
            let f = match exact_f {
                RawPoly::Exact(p) => p.to_float(),
                RawPoly::Float(p) => p,
            };
            let marked = marked
                .into_iter()
                .map(|m| match m {
                    RawT::Exact(p) => p.to_float(),
                    RawT::Float(p) => p,
                })
                .collect();
            AnyFamily::Float(Family::new(f, marked, label)?)
        };
        let d = match &fam {
            AnyFamily::Exact(f) => f.degree(),
            AnyFamily::Float(f) => f.degree(),
        };
        if let Some(dd) = self.d {
            if dd != d {
                return Err(Error::InvalidFamily(format!("declared degree {dd} but polynomial has degree {d}")));
            }
        }
        if self.critical == Some(true) {
            let ok = match &fam {
                AnyFamily::Exact(f) => f.marked_are_critical(),
                AnyFamily::Float(f) => f.marked_are_critical(),
            };
            if !ok {
                return Err(Error::MarkedNotCritical);
            }
        }
        Ok(fam)
    }
}

enum RawPoly {
    Exact(BiPoly<GaussRat>),
    Float(BiPoly<Complex64>),
}

enum RawT {
    Exact(TPoly<GaussRat>),
    Float(TPoly<Complex64>),
}

fn read_tpoly(c: &[[Value; 2]]) -> Result<RawT> {
    let nums = c
        .iter()
        .map(|[re, im]| Ok((read_num(re)?, read_num(im)?)))
        .collect::<Result<Vec<_>>>()?;
    let exact = nums.iter().all(|(a, b)| matches!((a, b), (Num::Exact(_), Num::Exact(_))));
    if exact {
        let v = nums
            .into_iter()
            .map(|(a, b)| match (a, b) {
                (Num::Exact(a), Num::Exact(b)) => GaussRat::new(a, b),
                _ => unreachable!(),
            })
            .collect();
        Ok(RawT::Exact(TPoly::new(v)))
    } else {
        let f = |n: Num| match n {
            Num::Exact(q) => crate::coeff::rat_to_f64(&q),
            Num::Float(x) => x,
        };
        Ok(RawT::Float(TPoly::new(nums.into_iter().map(|(a, b)| Complex64::new(f(a), f(b))).collect())))
    }
}

fn read_bipoly(z: &[Vec<[Value; 2]>]) -> Result<RawPoly> {
    let parts = z.iter().map(|c| read_tpoly(c)).collect::<Result<Vec<_>>>()?;
    if parts.iter().all(|p| matches!(p, RawT::Exact(_))) {
        Ok(RawPoly::Exact(BiPoly::new(
            parts
                .into_iter()
                .map(|p| match p {
                    RawT::Exact(p) => p,
                    RawT::Float(_) => unreachable!(),
                })
                .collect(),
        )))
    } else {
        Ok(RawPoly::Float(BiPoly::new(
            parts
                .into_iter()
                .map(|p| match p {
                    RawT::Exact(p) => p.to_float(),
                    RawT::Float(p) => p,
                })
                .collect(),
        )))
    }
}

//! Rasters over rectangular parameter windows: escape-rate fields, their discrete Laplacians
//! (bifurcation measures), boundedness loci, and export to PGM, CSV and JSON.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::escape::escape_rate_map;
use crate::family::Family;

/// Axis-aligned window with square pixels. Row 0 is the top row (`im = im_max`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let w = Window { re_min, re_max, im_min, im_max, nx, ny };
        w.validate()?;
        Ok(w)
    }

    /// Square window of `res x res` pixels centred at `center` with half side `half`.
    pub fn square(center: Complex64, half: f64, res: usize) -> Result<Self> {
        Window::new(center.re - half, center.re + half, center.im - half, center.im + half, res, res)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidWindow(format!("need at least 2x2 pixels, got {}x{}", self.nx, self.ny)));
        }
        if !(self.re_min < self.re_max && self.im_min < self.im_max) {
            return Err(Error::InvalidWindow("empty extent".into()));
        }
        let hx = (self.re_max - self.re_min) / self.nx as f64;
        let hy = (self.im_max - self.im_min) / self.ny as f64;
        if (hx - hy).abs() > 1e-12 * hx.max(hy).max(1.0) {
            return Err(Error::InvalidWindow(format!("pixels are not square: {hx} x {hy}")));
        }
        Ok(())
    }

    /// Pixel side length.
    pub fn h(&self) -> f64 {
        (self.re_max - self.re_min) / self.nx as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Centre of pixel `(i, j)`, column `i`, row `j`.
    pub fn center(&self, i: usize, j: usize) -> Complex64 {
        let h = self.h();
        Complex64::new(self.re_min + (i as f64 + 0.5) * h, self.im_max - (j as f64 + 0.5) * h)
    }

    /// Same window with `factor` times the resolution.
    pub fn refined(&self, factor: usize) -> Self {
        Window { nx: self.nx * factor, ny: self.ny * factor, ..*self }
    }

    /// Distance from the origin to the closed rectangle.
    pub fn distance_to_origin(&self) -> f64 {
        let dx = if self.re_min > 0.0 { self.re_min } else if self.re_max < 0.0 { -self.re_max } else { 0.0 };
        let dy = if self.im_min > 0.0 { self.im_min } else if self.im_max < 0.0 { -self.im_max } else { 0.0 };
        dx.hypot(dy)
    }

    fn same_grid(&self, o: &Window) -> bool {
        let tol = 1e-12 * self.h();
        self.nx == o.nx
            && self.ny == o.ny
            && (self.re_min - o.re_min).abs() <= tol
            && (self.re_max - o.re_max).abs() <= tol
            && (self.im_min - o.im_min).abs() <= tol
            && (self.im_max - o.im_max).abs() <= tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Green,
    MassDensity,
    Indicator,
}

/// Values on a window, row-major with the top row first.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub window: Window,
    pub kind: FieldKind,
    pub values: Vec<f64>,
}

impl ScalarField {
    /// Evaluate `f` at every pixel centre in parallel.
    pub fn sample(window: Window, kind: FieldKind, f: impl Fn(Complex64) -> f64 + Sync) -> Result<Self> {
        window.validate()?;
        let values = (0..window.ny)
            .into_par_iter()
            .flat_map_iter(|j| {
                let f = &f;
                (0..window.nx).map(move |i| f(window.center(i, j)))
            })
            .collect();
        Ok(ScalarField { window, kind, values })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.window.nx + i]
    }

    /// `Σ value · h²`.
    pub fn integral(&self) -> f64 {
        let h = self.window.h();
        self.values.iter().sum::<f64>() * h * h
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Pull back by `t -> -t`: the result lives on the negated window.
    pub fn reflected_through_origin(&self) -> ScalarField {
        let w = &self.window;
        let window = Window { re_min: -w.re_max, re_max: -w.re_min, im_min: -w.im_max, im_max: -w.im_min, ..*w };
        let values = self.values.iter().rev().cloned().collect();
        ScalarField { window, kind: self.kind, values }
    }

    /// Values on the outermost ring of pixels.
    pub fn border_values(&self) -> impl Iterator<Item = f64> + '_ {
        let (nx, ny) = (self.window.nx, self.window.ny);
        (0..ny).flat_map(move |j| (0..nx).map(move |i| (i, j))).filter_map(move |(i, j)| {
            (i == 0 || j == 0 || i == nx - 1 || j == ny - 1).then(|| self.at(i, j))
        })
    }

    /// CSV `re,im,value`, optional leading comment line.
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut s = String::with_capacity(self.values.len() * 48);
        if let Some(c) = comment {
            let _ = writeln!(s, "# {c}");
        }
        s.push_str("re,im,value\n");
        for j in 0..self.window.ny {
            for i in 0..self.window.nx {
                let c = self.window.center(i, j);
                let _ = writeln!(s, "{:.15e},{:.15e},{:.15e}", c.re, c.im, self.at(i, j));
            }
        }
        s
    }

    /// 16-bit binary PGM (P5), row-major, top row = `im_max`, big-endian samples.
    ///
    /// Green and mass fields map `0 -> black` and the field maximum to white; indicator fields
    /// map `1 -> black`, `0 -> white`, and intermediate values to gray.
    pub fn to_pgm(&self, comment: Option<&str>) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.values.len() * 2 + 64);
        out.extend_from_slice(b"P5\n");
        if let Some(c) = comment {
            out.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        out.extend_from_slice(format!("{} {}\n65535\n", self.window.nx, self.window.ny).as_bytes());
        let top = match self.kind {
            FieldKind::Indicator => 1.0,
            _ => self.max().max(f64::MIN_POSITIVE),
        };
        for &v in &self.values {
            let x = (v / top).clamp(0.0, 1.0);
            let x = if self.kind == FieldKind::Indicator { 1.0 - x } else { x };
            let sample = (x * 65535.0).round() as u16;
            out.extend_from_slice(&sample.to_be_bytes());
        }
        out
    }

    /// Sidecar metadata.
    pub fn sidecar(&self, cap: usize, extra: serde_json::Value) -> serde_json::Value {
        serde_json::json!({
            "window": self.window,
            "kind": self.kind,
            "cap": cap,
            "extra": extra,
        })
    }
}

/// Escape rate of marked point `i` over the window.
pub fn render_green<C: Coeff>(fam: &Family<C>, i: usize, w: Window, cap: usize) -> Result<ScalarField> {
    let num = fam.numeric();
    ScalarField::sample(w, FieldKind::Green, |t| {
        let map = num.map_at(t);
        escape_rate_map(&map, num.marked_at(i, t).0, cap).g
    })
}

#[derive(Clone, Debug)]
pub struct BifMeasure {
    /// Mass per unit area; the outer ring of pixels is zero.
    pub density: ScalarField,
    pub total_mass: f64,
    /// Whether the escape rate is positive along the whole border, i.e. the window encloses
    /// the support.
    pub border_positive: bool,
}

impl BifMeasure {
    /// Most negative density relative to the peak (0 when nonnegative).
    pub fn negative_ratio(&self) -> f64 {
        let peak = self.density.max();
        let low = self.density.min();
        if low >= 0.0 || peak <= 0.0 {
            0.0
        } else {
            -low / peak
        }
    }
}

/// `(1/2π) Δ` of an escape-rate field with the five-point stencil.
pub fn bif_measure(field: &ScalarField) -> BifMeasure {
    let w = field.window;
    let (nx, ny) = (w.nx, w.ny);
    let h = w.h();
    let scale = 1.0 / (2.0 * std::f64::consts::PI * h * h);
    let values: Vec<f64> = (0..ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..nx).map(move |i| {
                if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                    return 0.0;
                }
                let c = field.at(i, j);
                let lap = field.at(i + 1, j) + field.at(i - 1, j) + field.at(i, j + 1) + field.at(i, j - 1) - 4.0 * c;
                lap * scale
            })
        })
        .collect();
    let density = ScalarField { window: w, kind: FieldKind::MassDensity, values };
    let total_mass = density.integral();
    let border_positive = field.border_values().all(|v| v > 0.0);
    BifMeasure { density, total_mass, border_positive }
}

/// 1 where every marked point stays bounded for `cap` iterations. The marked points must be
/// exactly the critical points.
pub fn connectedness_locus<C: Coeff>(fam: &Family<C>, w: Window, cap: usize) -> Result<ScalarField> {
    if !fam.marked_are_critical() {
        return Err(Error::MarkedNotCritical);
    }
    let num = fam.numeric();
    ScalarField::sample(w, FieldKind::Indicator, |t| {
        let map = num.map_at(t);
        let all = (0..num.marked_count()).all(|i| !escape_rate_map(&map, num.marked_at(i, t).0, cap).escaped);
        if all {
            1.0
        } else {
            0.0
        }
    })
}

/// Fraction of marked points that stay bounded: 1 on the connectedness locus, 0 where all
/// escape, in between where only some do.
pub fn bounded_fraction<C: Coeff>(fam: &Family<C>, w: Window, cap: usize) -> Result<ScalarField> {
    let num = fam.numeric();
    let n = num.marked_count().max(1) as f64;
    ScalarField::sample(w, FieldKind::Indicator, |t| {
        let map = num.map_at(t);
        let k = (0..num.marked_count())
            .filter(|&i| !escape_rate_map(&map, num.marked_at(i, t).0, cap).escaped)
            .count();
        k as f64 / n
    })
}

/// `Σ |a - b| h²`, optionally after dividing each field by its own integral.
pub fn field_l1_distance(a: &ScalarField, b: &ScalarField, normalize: bool) -> Result<f64> {
    if !a.window.same_grid(&b.window) {
        return Err(Error::WindowMismatch);
    }
    let (sa, sb) = if normalize { (a.integral(), b.integral()) } else { (1.0, 1.0) };
    if normalize && (sa == 0.0 || sb == 0.0) {
        return Err(Error::InvalidArgument("cannot normalize a field with zero mass".into()));
    }
    let h = a.window.h();
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x / sa - y / sb).abs()).sum::<f64>() * h * h)
}

mod common;

use std::sync::OnceLock;

use critorbit::equidist::{
    arakelov_green, arakelov_green_lifted, homogeneous_h, normalization_integral, potential_discrepancy, set_energy,
    GreenSpec, NORMALIZATION_PAIRS, NORMALIZATION_SEED,
};
use critorbit::plane::{bif_measure, render_green, Window};
use critorbit::preperiodic::solve_orbit_zero;
use critorbit::roots::{Root, RootSet};
use critorbit::{Complex64, Error};
use proptest::prelude::*;

use common::fixture;

fn mandelbrot() -> &'static GreenSpec {
    static SPEC: OnceLock<GreenSpec> = OnceLock::new();
    SPEC.get_or_init(|| GreenSpec::from_family(&fixture("quad_t.json"), 0).unwrap())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn point() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| c(re, im))
}

fn set_of(pts: &[Complex64]) -> RootSet {
    RootSet {
        roots: pts.iter().map(|&value| Root { value, multiplicity: 1, residual: 0.0, source: None }).collect(),
        source: "test".into(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_symmetric(x in point(), y in point()) {
        prop_assume!(x != y);
        let spec = mandelbrot();
        prop_assert_eq!(arakelov_green(spec, x, y).unwrap(), arakelov_green(spec, y, x).unwrap());
    }

    #[test]
    fn kernel_ignores_the_lift(x in point(), y in point(), a in point(), b in point()) {
        prop_assume!((x - y).norm() > 1e-6 && a.norm() > 1e-3 && b.norm() > 1e-3);
        let spec = mandelbrot();
        let base = arakelov_green(spec, x, y).unwrap();
        let lifted = arakelov_green_lifted(spec, (a * x, a), (b * y, b)).unwrap();
        prop_assert!((lifted - base).abs() <= 1e-9 * (1.0 + base.abs()), "{} vs {}", lifted, base);
    }

    #[test]
    fn homogeneous_scaling(s in point(), t in point(), a in point()) {
        prop_assume!(t.norm() > 1e-3 && a.norm() > 1e-3);
        let spec = mandelbrot();
        let h = homogeneous_h(spec, s, t).unwrap();
        let scaled = homogeneous_h(spec, a * s, a * t).unwrap();
        prop_assert!((scaled - h - a.norm().ln()).abs() <= 1e-9 * (1.0 + h.abs()));
    }
}

#[test]
fn homogeneous_values() {
    let spec = mandelbrot();
    assert!(spec.gamma.abs() <= 1e-3);
    assert_eq!(homogeneous_h(spec, c(1.0, 0.0), c(0.0, 0.0)).unwrap(), spec.gamma);
    assert!((homogeneous_h(spec, c(1e4, 0.0), c(1.0, 0.0)).unwrap() - 1e4f64.ln()).abs() <= 1e-3);
    assert!(matches!(homogeneous_h(spec, c(0.0, 0.0), c(0.0, 0.0)), Err(Error::OriginUndefined)));
}

#[test]
fn two_marked_points_give_the_same_normalized_green() {
    // G for a = 0 is half of G for a = t, and both have mass normalizing it away.
    let half = GreenSpec::from_family(&fixture("quad.json"), 0).unwrap();
    let full = mandelbrot();
    assert!((half.q - 0.5).abs() < 1e-12 && (full.q - 1.0).abs() < 1e-12);
    for t in [c(0.5, 0.5), c(-2.5, 0.1), c(0.3, -1.2), c(10.0, 10.0)] {
        assert!((half.normalized(t) - full.normalized(t)).abs() <= 1e-9);
    }
}

#[test]
fn kernel_inside_the_set() {
    let spec = mandelbrot();
    let (x, y) = (c(0.0, 0.0), c(-1.0, 0.0));
    assert!((arakelov_green(spec, x, y).unwrap() + spec.gamma).abs() <= 1e-12);
    let (x, y) = (c(-0.1, 0.2), c(-1.1, 0.1));
    let expect = -(x - y).norm().ln() - spec.gamma;
    assert!((arakelov_green(spec, x, y).unwrap() - expect).abs() <= 1e-12);
    assert!(matches!(arakelov_green(spec, x, x), Err(Error::DiagonalPole)));
}

#[test]
fn small_set_energies() {
    let spec = mandelbrot();
    let pair = set_of(&[c(-1.5, 0.0), c(-0.5, 0.0)]);
    let e = set_energy(spec, &pair).unwrap().energy;
    // log|Δ| = 0 and both escape rates vanish, leaving -gamma / 4 per ordered pair.
    assert!((e + 0.25 * spec.gamma).abs() <= 1e-12);
    assert_eq!(set_energy(spec, &set_of(&[c(0.1, 0.1)])).unwrap().energy, 0.0);
}

#[test]
fn zero_sets_equidistribute() {
    let spec = mandelbrot();
    let fam = fixture("quad_t.json");
    let a = fam.marked()[0].clone();
    let probes = [c(2.0, 0.0), c(-2.5, 1.0), c(0.0, 1.5)];
    let mut last: Option<(f64, f64)> = None;
    for n in 4..=8 {
        let set = solve_orbit_zero(&fam, &a, n).unwrap();
        assert_eq!(set.total_multiplicity(), 1 << n);
        let report = potential_discrepancy(spec, &set, &probes).unwrap();
        assert!(report.max_discrepancy() <= 0.02, "n = {n}");
        let energy = report.energy.abs();
        if let Some((disc, prev)) = last {
            assert!(report.max_discrepancy() <= 1.2 * disc + 1e-12, "n = {n}");
            assert!(energy < prev, "n = {n}: |energy| {energy} after {prev}");
        }
        last = Some((report.max_discrepancy(), energy));
    }
}

#[test]
fn potential_far_away() {
    let spec = mandelbrot();
    let fam = fixture("quad_t.json");
    let set = solve_orbit_zero(&fam, &fam.marked()[0], 6).unwrap();
    let w = c(600.0, 800.0);
    let report = potential_discrepancy(spec, &set, &[w]).unwrap();
    let empirical = report.potential_probes[0].empirical;
    assert!((empirical - w.norm().ln() + spec.gamma).abs() <= 2e-3);
    assert!(matches!(potential_discrepancy(spec, &set, &[c(0.0, 0.0)]), Err(Error::ProbeInsideSet(_))));
}

#[test]
fn kernel_integrates_to_zero_against_the_measure() {
    let spec = mandelbrot();
    let fam = fixture("quad_t.json");
    let w = Window::new(-2.2, 0.8, -1.5, 1.5, 256, 256).unwrap();
    let mu = bif_measure(&render_green(&fam, 0, w, 512).unwrap());
    let integral = normalization_integral(spec, &mu.density, NORMALIZATION_PAIRS, NORMALIZATION_SEED).unwrap();
    assert!(integral.abs() <= 0.05, "{integral}");
}

use critorbit::per1::{
    per1_green, per1_green_centered, per1_homogeneous, per1_pcf_search, per1_robin, Per1Family, Per1SearchOptions,
    Sign,
};
use critorbit::plane::Window;
use critorbit::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lambdas() -> [Complex64; 3] {
    [c(2.0, 0.0), c(6.0, 0.0), c(3.0, 4.0)]
}

fn annulus() -> impl Strategy<Value = Complex64> {
    (0.2f64..5.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, th)| Complex64::from_polar(r, th))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn minus_is_plus_of_the_inverse(s in annulus()) {
        for l in lambdas() {
            let fam = Per1Family::new(l).unwrap();
            let minus = per1_green(&fam, s, Sign::Minus, 2048).g;
            let plus = per1_green(&fam, s.inv(), Sign::Plus, 2048).g;
            prop_assert!((minus - plus).abs() <= 1e-10, "λ = {}: {} vs {}", l, minus, plus);
        }
    }

    #[test]
    fn homogeneous_lift_laws(s in annulus(), a in annulus()) {
        for l in lambdas() {
            let fam = Per1Family::new(l).unwrap();
            let one = c(1.0, 0.0);
            for sign in [Sign::Plus, Sign::Minus] {
                let h = per1_homogeneous(&fam, s, one, sign).unwrap();
                let scaled = per1_homogeneous(&fam, a * s, a, sign).unwrap();
                prop_assert!((scaled - h - a.norm().ln()).abs() <= 1e-9);
            }
            let g = per1_green(&fam, s, Sign::Plus, 4096);
            let h = per1_homogeneous(&fam, s, one, Sign::Plus).unwrap();
            prop_assert!((h - g.g).abs() <= 1e-9 + g.err, "{} vs {}", h, g.g);
            // F is symmetric in (s, t), which swaps the critical points.
            let t = a;
            let swapped = per1_homogeneous(&fam, t, s, Sign::Plus).unwrap();
            prop_assert!((per1_homogeneous(&fam, s, t, Sign::Minus).unwrap() - swapped).abs() <= 1e-12 * (1.0 + swapped.abs()));
        }
    }

    #[test]
    fn centered_conjugate_agrees(s in annulus()) {
        for l in lambdas() {
            let fam = Per1Family::new(l).unwrap();
            for sign in [Sign::Plus, Sign::Minus] {
                let a = per1_green(&fam, s, sign, 2048);
                let b = per1_green_centered(&fam, s, sign, 2048);
                prop_assert_eq!(a.escaped, b.escaped);
                prop_assert!((a.g - b.g).abs() <= a.err + b.err + 1e-12);
            }
        }
    }
}

#[test]
fn robin_constants_match_the_closed_form() {
    for l in lambdas() {
        let fam = Per1Family::new(l).unwrap();
        let gamma = per1_robin(&fam, Sign::Plus, 1e4, 2048);
        assert!((gamma - fam.robin_formula()).abs() <= 1e-3, "λ = {l}: {gamma} vs {}", fam.robin_formula());
    }
    let six = Per1Family::new(c(6.0, 0.0)).unwrap();
    assert!((six.robin_formula() - 2f64.ln() / 6.0).abs() < 1e-15);
}

#[test]
fn leading_coefficients_of_the_critical_orbit() {
    for l in lambdas() {
        let fam = Per1Family::new(l).unwrap();
        for n in 1..=2 {
            let (coeff, exp) = fam.orbit_leading_term(n);
            assert_eq!(exp, 3i32.pow(n as u32));
            let want = fam.predicted_leading_coefficient(n);
            assert!((coeff - want).norm() <= 1e-12 * want.norm(), "λ = {l}, n = {n}");
        }
    }
}

#[test]
fn golden_parameter_is_a_two_cycle() {
    let fam = Per1Family::new(c(6.0, 0.0)).unwrap();
    let s0 = c(-(1.0 + 5f64.sqrt()) / 2.0, 0.0);
    let f = fam.map(s0);
    assert!((f.eval(s0) - s0.inv()).norm() <= 1e-9);
    assert!((f.eval(s0.inv()) - s0).norm() <= 1e-9);
    assert_eq!(per1_green(&fam, s0, Sign::Plus, 2048).g, 0.0);
    assert_eq!(per1_green(&fam, s0, Sign::Minus, 2048).g, 0.0);
}

#[test]
fn search_near_the_golden_parameter() {
    let fam = Per1Family::new(c(6.0, 0.0)).unwrap();
    let w = Window::new(-1.8, -1.3, -0.2, 0.2, 100, 80).unwrap();
    let found = per1_pcf_search(&fam, w, &Per1SearchOptions::default()).unwrap();
    let s0 = c(-(1.0 + 5f64.sqrt()) / 2.0, 0.0);
    let hit = found.find(s0, 1e-6).expect("golden parameter found");
    assert!(hit.pcf);
    // Everything reported as PCF really has both critical orbits preperiodic.
    for cand in found.candidates.iter().filter(|c| c.pcf) {
        assert!(cand.verdicts.iter().all(|(_, v)| v.is_preperiodic()));
    }
}

#[test]
fn small_multipliers_have_no_pcf_maps() {
    let fam = Per1Family::new(c(0.5, 0.0)).unwrap();
    let w = Window::new(-2.0, 2.0, -0.5, 0.5, 160, 40).unwrap();
    let found = per1_pcf_search(&fam, w, &Per1SearchOptions::default()).unwrap();
    assert_eq!(found.pcf_count(), 0);
}

mod common;

use critorbit::escape::{bottcher_value, escape_rate, green, max_critical_escape, robin_constant};
use critorbit::Complex64;
use proptest::prelude::*;

use common::fixture;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn functional_equation(tr in 0.0f64..1.5, ta in 0.0f64..6.3, zr in 0.5f64..4.0, za in 0.0f64..6.3) {
        for name in ["quad.json", "cubic_i.json", "quintic.json"] {
            let fam = fixture(name);
            let t = Complex64::from_polar(tr, ta);
            let z = Complex64::from_polar(zr, za);
            let here = green(&fam, t, z, 2048);
            prop_assume!(here.escaped);
            let image = fam.numeric().map_at(t).eval(z);
            let there = green(&fam, t, image, 2048);
            let d = fam.degree() as f64;
            let tol = there.err + d * here.err + 1e-12 * there.g;
            prop_assert!((there.g - d * here.g).abs() <= tol, "{}: {} vs {} (tol {})", name, there.g, d * here.g, tol);
        }
    }

    #[test]
    fn raising_the_cap_changes_nothing(re in -2.2f64..1.0, im in -1.3f64..1.3) {
        let fam = fixture("quad.json");
        let t = c(re, im);
        let low = escape_rate(&fam, 0, t, 300);
        let high = escape_rate(&fam, 0, t, 3000);
        if low.escaped {
            prop_assert!(high.escaped);
            prop_assert!((low.g - high.g).abs() <= low.err + high.err);
        } else {
            prop_assert_eq!(low.g, 0.0);
            prop_assert_eq!(low.iterations_used, 300);
        }
    }
}

#[test]
fn bottcher_is_continuous_along_rays() {
    for (name, t, r0) in [("quad.json", c(0.3, 0.2), 3.0), ("cubic_056.json", c(0.5, -0.4), 5.0), ("quintic.json", c(0.7, 0.1), 3.0)] {
        let fam = fixture(name);
        for theta in [0.3, 1.9, 3.1, 4.4] {
            let steps = 2000;
            let vals: Vec<Complex64> = (0..=steps)
                .map(|k| {
                    let r = r0 * (1.0 + k as f64 / steps as f64);
                    bottcher_value(&fam, t, Complex64::from_polar(r, theta)).unwrap()
                })
                .collect();
            for w in vals.windows(3) {
                let second = w[2] - 2.0 * w[1] + w[0];
                assert!(second.norm() <= 1e-6, "{name}: jump {second} at {}", w[1]);
            }
        }
    }
}

#[test]
fn bottcher_modulus_is_the_escape_rate() {
    let fam = fixture("cubic_i.json");
    for (t, z) in [(c(0.2, 0.1), c(4.0, 1.0)), (c(-0.5, 0.3), c(-2.0, 3.5)), (c(1.0, 0.0), c(0.0, -6.0))] {
        let phi = bottcher_value(&fam, t, z).unwrap();
        assert!((phi.norm().ln() - green(&fam, t, z, 2048).g).abs() <= 1e-8);
    }
}

#[test]
fn mandelbrot_robin_constants() {
    let quad_t = fixture("quad_t.json");
    let quad = fixture("quad.json");
    assert!(robin_constant(&quad_t, 0, 1.0).gamma.abs() <= 1e-3);
    assert!(robin_constant(&quad, 0, 0.5).gamma.abs() <= 1e-3);
}

#[test]
fn maximal_critical_escape() {
    let quad = fixture("quad.json");
    assert_eq!(max_critical_escape(&quad, c(0.0, 0.0), 2048).unwrap(), 0.0);
    assert_eq!(max_critical_escape(&quad, c(-2.0, 0.0), 2048).unwrap(), 0.0);
    assert!(max_critical_escape(&fixture("cubic_056.json"), c(1.2, 0.0), 2048).unwrap() > 0.0);
    // t = i: the critical point +i escapes.
    assert!(max_critical_escape(&fixture("cubic_i.json"), c(0.0, 1.0), 2048).unwrap() > 0.0);
}

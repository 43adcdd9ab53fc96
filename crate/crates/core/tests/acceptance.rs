//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if
//! any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use critorbit::equidist::{potential_discrepancy, GreenSpec};
use critorbit::escape::bottcher_value;
use critorbit::orbit::iterate_symbolic;
use critorbit::per1::{
    per1_green, per1_homogeneous, per1_measures, per1_pcf_search, per1_robin, per1_zero_pcf, Per1Family,
    Per1SearchOptions, Sign,
};
use critorbit::plane::{bif_measure, field_l1_distance, render_green, Window};
use critorbit::preperiodic::{all_drivers, find_pcf, orbit_verdict, solve_orbit_zero, solve_preperiodic, VerdictOptions};
use critorbit::relations::{estimate_zeta, find_affine_symmetry, functional_root, Transform};
use critorbit::series::{bottcher_series, verify_poly_relation};
use critorbit::{Coeff, Complex64, GaussRat, TPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::fixture;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn golden() -> Complex64 {
    c(-(1.0 + 5f64.sqrt()) / 2.0, 0.0)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent <= budget, || format!("took {:.1?}, budget {:?}", spent, budget))
}

/// Uniform samples from the annulus `0.2 < |s| < 5`.
fn annulus_samples(seed: u64, count: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Complex64::from_polar(rng.gen_range(0.2..5.0), rng.gen_range(0.0..std::f64::consts::TAU))).collect()
}

fn golden_pcf() -> Outcome {
    let start = Instant::now();
    let fam = Per1Family::new(c(6.0, 0.0)).map_err(|e| e.to_string())?;
    let w = Window::new(-2.0, 2.0, -0.5, 0.5, 800, 200).map_err(|e| e.to_string())?;
    let found = per1_pcf_search(&fam, w, &Per1SearchOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let s0 = found.find(golden(), 1e-6).ok_or("no parameter within 1e-6 of the golden ratio")?.value;
    let f = fam.map(s0);
    let e1 = (f.eval(s0) - s0.inv()).norm();
    let e2 = (f.eval(s0.inv()) - s0).norm();
    ensure(e1 <= 1e-9 && e2 <= 1e-9, || format!("cycle residuals {e1:.1e}, {e2:.1e}"))?;
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!("s0 = {s0:.10}, residuals {e1:.1e}/{e2:.1e}, {} PCF, {elapsed:.1?}", found.pcf_count()))
}

fn robin_constants() -> Outcome {
    let cases = [(6.0, 2f64.ln() / 6.0), (2.0, (2.0f64 / 3.0).ln() / 6.0 + (1.0f64 / 3.0).ln() / 3.0)];
    let mut out = Vec::new();
    for (l, want) in cases {
        let fam = Per1Family::new(c(l, 0.0)).map_err(|e| e.to_string())?;
        let got = per1_robin(&fam, Sign::Plus, 1e4, 2048);
        ensure((got - want).abs() <= 1e-3, || format!("λ = {l}: {got} vs {want}"))?;
        out.push(format!("λ={l}: {got:.7} (want {want:.7})"));
    }
    Ok(out.join(", "))
}

fn minus_is_plus_of_inverse() -> Outcome {
    let mut worst: f64 = 0.0;
    for l in [c(6.0, 0.0), c(3.0, 4.0)] {
        let fam = Per1Family::new(l).map_err(|e| e.to_string())?;
        for s in annulus_samples(3, 100) {
            let minus = per1_green(&fam, s, Sign::Minus, 2048).g;
            let plus = per1_green(&fam, s.inv(), Sign::Plus, 2048).g;
            worst = worst.max((minus - plus).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("max difference {worst:.2e}"))?;
    Ok(format!("max difference {worst:.2e} over 200 samples"))
}

fn current_separation() -> Outcome {
    let fam = Per1Family::new(c(6.0, 0.0)).map_err(|e| e.to_string())?;
    let w = Window::new(-2.2, -0.2, -1.0, 1.0, 1024, 1024).map_err(|e| e.to_string())?;
    let m = per1_measures(&fam, w, 512).map_err(|e| e.to_string())?;
    let per1 = field_l1_distance(&m.plus.density, &m.minus.density, true).map_err(|e| e.to_string())?;
    ensure(per1 >= 0.1, || format!("per1 distance {per1:.4}"))?;

    let odd = fixture("odd_cubic.json");
    let w = Window::new(-1.5, 1.5, -1.5, 1.5, 1024, 1024).map_err(|e| e.to_string())?;
    let mu1 = bif_measure(&render_green(&odd, 0, w, 512).map_err(|e| e.to_string())?);
    let mu2 = bif_measure(&render_green(&odd, 1, w, 512).map_err(|e| e.to_string())?);
    let odd_dist =
        field_l1_distance(&mu1.density, &mu2.density.reflected_through_origin(), true).map_err(|e| e.to_string())?;
    ensure(odd_dist <= 0.05, || format!("odd family distance {odd_dist:.4}"))?;
    Ok(format!("per1 distance {per1:.4}, odd family distance {odd_dist:.2e}"))
}

fn mass_counts() -> Outcome {
    let start = Instant::now();
    let mut out = Vec::new();
    for (name, target) in [("quad.json", 0.5), ("quad_t.json", 1.0)] {
        let fam = fixture(name);
        let mut errors = Vec::new();
        let mut last = 0.0;
        for res in [512, 1024, 2048] {
            let w = Window::new(-2.5, 1.5, -2.0, 2.0, res, res).map_err(|e| e.to_string())?;
            let mu = bif_measure(&render_green(&fam, 0, w, 512).map_err(|e| e.to_string())?);
            errors.push((mu.total_mass - target).abs());
            last = mu.total_mass;
        }
        ensure(errors[2] <= 0.02, || format!("{name}: mass {last:.4}, target {target}"))?;
        ensure(errors.windows(2).all(|e| e[1] <= e[0] + 1e-3), || format!("{name}: errors {errors:.4?} not monotone"))?;
        out.push(format!("{name}: {last:.4}"));
    }
    within_budget(start, Duration::from_secs(120))?;
    Ok(format!("{} in {:.1?}", out.join(", "), start.elapsed()))
}

fn preperiodic_equations() -> Outcome {
    let fam = fixture("quad.json");
    let a = fam.marked()[0].clone();
    let set = solve_preperiodic(&fam, &a, 3, 1).map_err(|e| e.to_string())?;
    let mut got: Vec<(Complex64, usize, f64)> = set.roots.iter().map(|r| (r.value, r.multiplicity, r.residual)).collect();
    got.sort_by(|x, y| x.0.re.total_cmp(&y.0.re));
    let ok = got.len() == 2
        && (got[0].0 - c(-1.0, 0.0)).norm() <= 1e-9
        && got[1].0.norm() <= 1e-9
        && got.iter().all(|r| r.1 == 2 && r.2 <= 1e-10);
    ensure(ok, || format!("roots {got:?}"))?;

    let mut checked = 0;
    for n in 1..=6 {
        for m in 0..n {
            let small = solve_preperiodic(&fam, &a, n, m).map_err(|e| e.to_string())?;
            let big = solve_preperiodic(&fam, &a, n + 1, m + 1).map_err(|e| e.to_string())?;
            for r in &small.roots {
                let gap = big.roots.iter().map(|b| (b.value - r.value).norm()).fold(f64::INFINITY, f64::min);
                ensure(gap <= 1e-6, || format!("({n},{m}) root {} missing from ({},{})", r.value, n + 1, m + 1))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{{0 x2, -1 x2}}, {checked} nested roots checked"))
}

fn equidistribution() -> Outcome {
    let start = Instant::now();
    let fam = fixture("quad_t.json");
    let spec = GreenSpec::from_family(&fam, 0).map_err(|e| e.to_string())?;
    let t = fam.marked()[0].clone();
    let mut discrepancies = Vec::new();
    let mut at_ten = f64::NAN;
    for n in 8..=11 {
        // S_n has 2^(n-1) points: the parameters where the critical value 0 reaches 0 after n steps.
        let set = solve_orbit_zero(&fam, &t, n - 1).map_err(|e| e.to_string())?;
        let report = potential_discrepancy(&spec, &set, &[c(2.0, 0.0)]).map_err(|e| e.to_string())?;
        let d = report.max_discrepancy();
        if n == 10 {
            ensure(set.total_multiplicity() == 512, || format!("{} roots", set.total_multiplicity()))?;
            at_ten = d;
        }
        discrepancies.push(d);
    }
    ensure(at_ten <= 0.02, || format!("discrepancy {at_ten:.3e} at n = 10"))?;
    ensure(discrepancies.windows(2).all(|d| d[1] <= 1.2 * d[0] + 1e-12), || format!("trend {discrepancies:?}"))?;
    within_budget(start, Duration::from_secs(120))?;
    Ok(format!("discrepancies n=8..11 {discrepancies:?}, {:.1?}", start.elapsed()))
}

fn loglog_slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0.ln()).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1.ln()).sum::<f64>() / n;
    let num: f64 = samples.iter().map(|(r, e)| (r.ln() - mx) * (e.ln() - my)).sum();
    let den: f64 = samples.iter().map(|(r, _)| (r.ln() - mx).powi(2)).sum();
    num / den
}

fn bottcher_series_laws() -> Outcome {
    let fam = fixture("quad.json");
    let tb = bottcher_series(&fam, 8);
    let half = GaussRat::from_int(1) / GaussRat::from_int(2);
    ensure(tb.coeff(1).same_as(&TPoly::new(vec![GaussRat::from_int(0), half])), || "g_1 is not t/2".into())?;
    ensure(tb.degree_bound_holds(1), || "deg g_s > s + 1".into())?;
    let cube = tb.power_split(3).map_err(|e| e.to_string())?;
    ensure(cube.degree_bound_holds(1), || "deg b_s^3 > s + 3".into())?;

    let t = c(0.3, 0.2);
    let ffam = fam.to_float();
    let samples: Vec<(f64, f64)> = (0..12)
        .map(|k| {
            let r = 3.0 * 1.1f64.powi(k);
            let err = (0..8)
                .map(|j| {
                    let z = Complex64::from_polar(r, 0.3 + j as f64 * std::f64::consts::TAU / 8.0);
                    (tb.eval(t, z) - bottcher_value(&ffam, t, z).unwrap_or(z)).norm()
                })
                .fold(0.0, f64::max);
            (r, err)
        })
        .collect();
    let slope = loglog_slope(&samples);
    ensure((slope + 9.0).abs() <= 0.9, || format!("decay slope {slope:.3}"))?;
    Ok(format!("degree bounds hold, decay slope {slope:.3}"))
}

fn zeta_certification() -> Outcome {
    let odd = fixture("odd_cubic.json");
    let a1 = iterate_symbolic(&odd, &odd.marked()[0], 1).map_err(|e| e.to_string())?;
    let a2 = iterate_symbolic(&odd, &odd.marked()[1], 1).map_err(|e| e.to_string())?;
    let est = estimate_zeta(&odd, &a1, &a2).map_err(|e| e.to_string())?;
    ensure((est.zeta - c(-1.0, 0.0)).norm() <= 1e-6, || format!("zeta {}", est.zeta))?;
    ensure(est.modulus_dev <= 1e-6, || format!("modulus deviation {:.1e}", est.modulus_dev))?;
    ensure(est.root_of_unity_order == Some(2), || format!("order {:?}", est.root_of_unity_order))?;
    let minus = verify_poly_relation(&odd, &a1, &a2, 1, 1, c(-1.0, 0.0), 3).map_err(|e| e.to_string())?;
    ensure(minus.iter().all(|&b| b), || format!("zeta = -1 relation {minus:?}"))?;
    let plus = verify_poly_relation(&odd, &a1, &a2, 1, 1, c(1.0, 0.0), 3).map_err(|e| e.to_string())?;
    ensure(plus.iter().all(|&b| !b), || format!("zeta = +1 relation {plus:?}"))?;
    Ok(format!("zeta {:.3e}, modulus deviation {:.1e}", est.zeta, est.modulus_dev))
}

fn symmetry_detection() -> Outcome {
    let odd = find_affine_symmetry(&fixture("odd_cubic.json"), 2, 2);
    ensure(odd.len() == 1 && odd[0].k == 1 && odd[0].describe() == "-z", || "odd cubic: expected -z with k = 1".into())?;

    let quintic_fam = fixture("quintic.json");
    let quintic = find_affine_symmetry(&quintic_fam, 2, 2);
    let cube = quintic
        .iter()
        .find(|s| matches!(&s.h, Transform::Rotation(u) if u.order == 3))
        .ok_or("quintic: no order-3 rotation")?;
    ensure(cube.k == 2 && cube.verify(&quintic_fam), || "quintic: rotation not verified with k = 2".into())?;

    let quartic = fixture("quartic_iterate.json");
    let g = functional_root(&quartic, 2).map_err(|e| e.to_string())?;
    let gp = g.poly().ok_or("quartic: root is not a polynomial")?;
    let minus_t_squared = critorbit::BiPoly::new(vec![
        TPoly::new(vec![GaussRat::from_int(0), GaussRat::from_int(0), GaussRat::from_int(-1)]),
        TPoly::zero(),
        TPoly::constant(GaussRat::from_int(1)),
    ]);
    ensure(gp.sub(&minus_t_squared).is_zero(), || format!("quartic root {}", g.describe()))?;
    ensure(gp.compose(&gp).sub(quartic.f()).is_zero() && g.verify(&quartic), || "g∘g differs from f".into())?;

    for name in ["quad.json", "cubic_i.json"] {
        let fam = fixture(name);
        ensure(find_affine_symmetry(&fam, 3, 2).is_empty(), || format!("{name}: unexpected rotation"))?;
        ensure(functional_root(&fam, 2).is_err(), || format!("{name}: unexpected square root"))?;
    }
    Ok(format!("-z (k=1), {} (k=2), g = {}; none for z²+t, z³-3t²z+i", cube.describe(), g.describe()))
}

fn harvest_and_failure() -> Outcome {
    let opts = VerdictOptions::default();
    let zero = per1_zero_pcf(5, &opts).map_err(|e| e.to_string())?;
    ensure(zero.pcf_count() >= 30, || format!("only {} PCF parameters", zero.pcf_count()))?;

    let cubic = fixture("cubic_i.json");
    let found = find_pcf(&cubic, &all_drivers(1, 4), &opts).map_err(|e| e.to_string())?;
    let escaping = found
        .candidates
        .iter()
        .filter(|cand| cand.verdicts.iter().any(|(i, v)| *i == 0 && v.is_escaping()))
        .count();
    ensure(escaping >= 1, || "no parameter with an escaping second critical point".into())?;
    let witness = found.find(c(0.0, 1.0), 1e-8).ok_or("t = i not among the roots")?;
    ensure(witness.verdicts.iter().any(|(i, v)| *i == 0 && v.is_escaping()), || "t = i: +i does not escape".into())?;
    let map = cubic.numeric().map_at(c(0.0, 1.0));
    ensure(orbit_verdict(&map, c(0.0, -1.0), &opts).is_preperiodic(), || "t = i: -i is not fixed".into())?;
    ensure((map.eval(c(0.0, -1.0)) - c(0.0, -1.0)).norm() <= 1e-12, || "t = i: -i is not fixed".into())?;
    Ok(format!("{} PCF on the multiplier-zero slice, {escaping} escaping failures incl. t = i", zero.pcf_count()))
}

fn homogeneous_lift_laws() -> Outcome {
    let mut worst: f64 = 0.0;
    let samples = annulus_samples(12, 200);
    for l in [c(2.0, 0.0), c(6.0, 0.0), c(3.0, 4.0)] {
        let fam = Per1Family::new(l).map_err(|e| e.to_string())?;
        for pair in samples.chunks(2) {
            let (s, alpha) = (pair[0], pair[1]);
            let t = c(1.0, 0.0);
            for sign in [Sign::Plus, Sign::Minus] {
                let h = per1_homogeneous(&fam, s, t, sign).map_err(|e| e.to_string())?;
                let scaled = per1_homogeneous(&fam, alpha * s, alpha * t, sign).map_err(|e| e.to_string())?;
                worst = worst.max((scaled - h - alpha.norm().ln()).abs());
            }
            let h = per1_homogeneous(&fam, s, t, Sign::Plus).map_err(|e| e.to_string())?;
            let g = per1_green(&fam, s, Sign::Plus, 4096).g;
            worst = worst.max((h - g).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("max deviation {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("golden-ratio PCF in Per1(6)", golden_pcf),
        ("Per1 Robin constants", robin_constants),
        ("G- is G+ of the inverse", minus_is_plus_of_inverse),
        ("bifurcation current separation", current_separation),
        ("bifurcation measure masses", mass_counts),
        ("preperiodic equations and nesting", preperiodic_equations),
        ("equidistribution potential", equidistribution),
        ("Bottcher series laws", bottcher_series_laws),
        ("zeta certification", zeta_certification),
        ("symmetry detection", symmetry_detection),
        ("PCF harvest and failure mode", harvest_and_failure),
        ("homogeneous lift laws", homogeneous_lift_laws),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let spent = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{spent:.1?}]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{spent:.1?}]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

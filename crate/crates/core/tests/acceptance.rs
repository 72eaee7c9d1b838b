//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use cartan_torsion::b_independence::{integral_term, ode1_residual, ode2_residual};
use cartan_torsion::bruteforce::cartan_norm_nd;
use cartan_torsion::cli::{parse_config, run};
use cartan_torsion::frame::{
    berwald_perp, cartan_norm_2d, closed_form_perp, closed_form_xi, positivity_scan, xi_numeric,
    TheoremFamily, XiMethod,
};
use cartan_torsion::metric::{theorem1_hypothesis, theorem2_hypothesis, MetricFamily, MetricModel};
use cartan_torsion::semi_c::{
    big_a_generalized_randers, big_a_quadratic_beta, fitted_split, flag_s, p_generalized_randers,
    p_quadratic_beta, split_residual,
};
use cartan_torsion::tensors::{bilinear, flag_tensors, max_abs3};
use cartan_torsion::Result;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn gr(c1: f64, c2: f64, c3: f64) -> MetricFamily {
    MetricFamily::GeneralizedRanders { c1, c2, c3 }
}

fn qb(c1: f64, c2: f64, c3: f64) -> MetricFamily {
    MetricFamily::QuadraticBeta { c1, c2, c3 }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// 256 θ values offset from the axis, and 10 k values in [0.05, 0.95].
fn closed_form_grid() -> (Vec<f64>, Vec<f64>) {
    let thetas = (0..256)
        .map(|i| 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / 256.0)
        .collect();
    let ks = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
    (thetas, ks)
}

fn random_unit3(rng: &mut StdRng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 0.1 && r <= 1.0 {
            return v.map(|x| x / r);
        }
    }
}

fn criterion1() -> Result<Outcome> {
    let (thetas, ks) = closed_form_grid();
    let mut worst: f64 = 0.0;
    for fam in [gr(1.0, 0.2, 1.0), qb(1.0, 1.0, 0.5)] {
        for &k in &ks {
            let m = MetricModel::new(fam, k, 2)?;
            for &th in &thetas {
                worst = worst.max(rel_diff(xi_numeric(&m, th)?, closed_form_xi(&m, th)?));
            }
        }
    }
    outcome(worst <= 1e-8, format!("max relative gap {worst:e} (limit 1e-8)"))
}

fn criterion2() -> Result<Outcome> {
    let (thetas, ks) = closed_form_grid();
    let (mut cond, mut comp): (f64, f64) = (0.0, 0.0);
    for fam in [gr(1.0, 0.2, 1.0), qb(1.0, 1.0, 0.5)] {
        for &k in &ks {
            let m = MetricModel::new(fam, k, 2)?;
            for &th in &thetas {
                let fr = berwald_perp(&m, th)?;
                let t = flag_tensors(&m, &fr.y)?;
                let p = [fr.y_perp[0], fr.y_perp[1], 0.0];
                let f2 = t.f * t.f;
                cond = cond
                    .max((bilinear(&t.g, &t.y, &p, 2) / f2).abs())
                    .max((bilinear(&t.g, &p, &p, 2) / f2 - 1.0).abs());
                let cf = closed_form_perp(&m, th)?;
                let scale = p[0].hypot(p[1]);
                comp = comp.max((p[0] - cf[0]).hypot(p[1] - cf[1]) / scale);
            }
        }
    }
    outcome(
        cond <= 1e-9 && comp <= 1e-9,
        format!("frame conditions {cond:e}, printed components {comp:e} (limit 1e-9)"),
    )
}

fn criterion3() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(3);
    let ks: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut triples = 0;
    let mut min_f = f64::INFINITY;
    while triples < 20 {
        let c = [rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.1..2.0)];
        if !theorem1_hypothesis(c[0], c[1], c[2]).holds() {
            continue;
        }
        triples += 1;
        let r = positivity_scan(TheoremFamily::GeneralizedRanders, c, (512, 512))?;
        if r.f_positive() != Some(true) {
            return outcome(false, format!("f not positive for {c:?}: {r:?}"));
        }
        if let cartan_torsion::frame::PositivityReport::GeneralizedRanders { min_f: m } = r {
            min_f = min_f.min(m.value);
        }
        for &k in &ks {
            let m = MetricModel::new(gr(c[0], c[1], c[2]), k, 2)?;
            let n = cartan_norm_2d(&m, 256, XiMethod::Jet)?.norm;
            if !n.is_finite() {
                return outcome(false, format!("norm not finite for {c:?} at k = {k}"));
            }
        }
    }
    outcome(true, format!("20 triples, smallest certified min f = {min_f}"))
}

fn criterion4() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(4);
    let ks: Vec<f64> = (0..=9).map(|i| i as f64 / 9.0 * 0.999).collect();
    let mut triples = 0;
    while triples < 20 {
        let c1: f64 = rng.gen_range(0.5..2.0);
        let c3: f64 = rng.gen_range(0.01..1.0) * c1;
        let bound = 2.0 * (c1 * c3).sqrt();
        let c2: f64 = rng.gen_range(-bound..bound);
        if !theorem2_hypothesis(c1, c2, c3).holds() {
            continue;
        }
        triples += 1;
        let c = [c1, c2, c3];
        let r = positivity_scan(TheoremFamily::QuadraticBeta, c, (512, 512))?;
        let (f1_sign, f2_nonzero) = r.sign_analysis().unwrap_or((false, false));
        let cartan_torsion::frame::PositivityReport::QuadraticBeta { max_f1, min_f1, .. } = r else {
            unreachable!()
        };
        // endpoint value c3 k² - c1 fixes the sign of f1
        let endpoint = c3 - c1;
        let sign_matches = if endpoint < 0.0 { max_f1.value < 0.0 } else { min_f1.value > 0.0 };
        if !(f1_sign && f2_nonzero && sign_matches) {
            return outcome(false, format!("sign analysis failed for {c:?}"));
        }
        for &k in &ks {
            let m = MetricModel::new(qb(c1, c2, c3), k, 2)?;
            if !cartan_norm_2d(&m, 256, XiMethod::Jet)?.norm.is_finite() {
                return outcome(false, format!("norm not finite for {c:?} at k = {k}"));
            }
        }
    }
    outcome(true, "20 triples: f1 of constant sign, f2 nonvanishing, norms finite".into())
}

fn criterion5() -> Result<Outcome> {
    let bound = 3.0 / 2f64.sqrt();
    let mut ks: Vec<f64> = (0..=99).map(|i| i as f64 / 100.0).collect();
    ks.extend([0.995, 0.999]);
    let mut largest: f64 = 0.0;
    let mut at_0995 = 0.0;
    for &k in &ks {
        let n = cartan_norm_2d(&MetricModel::new(qb(1.0, 1.0, 0.0), k, 2)?, 4096, XiMethod::Jet)?.norm;
        if n.is_nan() || n >= bound - 1e-6 {
            return outcome(false, format!("norm {n} at k = {k} not below 3/sqrt(2)"));
        }
        largest = largest.max(n);
        if k == 0.995 {
            at_0995 = n;
        }
    }
    outcome(
        at_0995 > 2.0 + 1e-6,
        format!("max norm {largest} < {bound}; norm at k = 0.995 is {at_0995}"),
    )
}

fn criterion6() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(6);
    let mut randers: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.gen_range(0.05..0.95);
        let m = MetricModel::new(qb(1.0, 1.0, 0.0), k, 3)?;
        let t = flag_tensors(&m, &random_unit3(&mut rng))?;
        randers = randers.max(max_abs3(&t.m, 3));
    }
    let berwald = MetricModel::new(qb(1.0, 2.0, 1.0), 0.5, 3)?;
    let mut b_max: f64 = 0.0;
    for _ in 0..100 {
        let t = flag_tensors(&berwald, &random_unit3(&mut rng))?;
        b_max = b_max.max(max_abs3(&t.m, 3));
    }
    outcome(
        randers < 1e-9 && b_max > 1e-3,
        format!("Randers max |M| {randers:e}; Berwald max |M| {b_max:e}"),
    )
}

fn criterion7() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(7);
    let (mut resid, mut fit_gap, mut randers_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (fam, c) in [(gr(1.0, 0.2, 1.0), [1.0, 0.2, 1.0]), (qb(1.0, 1.0, 0.5), [1.0, 1.0, 0.5]), (qb(1.0, 1.0, 0.0), [1.0, 1.0, 0.0])] {
        let randers = fam.is_randers_type();
        for _ in 0..100 {
            let k = rng.gen_range(0.1..0.9);
            let m = MetricModel::new(fam, k, 3)?;
            let y = random_unit3(&mut rng);
            let s = flag_s(&m, &y);
            let p = match fam {
                MetricFamily::GeneralizedRanders { .. } => {
                    p_generalized_randers(c, s, big_a_generalized_randers(c, s, k, 3), 3)
                }
                _ => p_quadratic_beta(c, s, big_a_quadratic_beta(c, s, k, 3), 3),
            };
            let t = flag_tensors(&m, &y)?;
            resid = resid.max(split_residual(&t, p)?);
            fit_gap = fit_gap.max((fitted_split(&t)?.0 - p).abs());
            if randers {
                randers_gap = randers_gap.max((p - 1.0).abs());
            }
        }
    }
    outcome(
        resid < 1e-6 && fit_gap < 1e-6 && randers_gap <= 1e-9,
        format!("max residual {resid:e}, fitted-p gap {fit_gap:e}, Randers |p - 1| {randers_gap:e}"),
    )
}

fn criterion8() -> Result<Outcome> {
    let b = 0.7;
    let lambda = 0.8;
    let p2 = MetricFamily::SqrtBIndependent { d1: 0.3, d2: 1.0, d3: 1.2 };
    let phi = MetricFamily::IntegralBIndependent { c1: 0.4, c2: 1.0, c3: 0.5, lambda };
    let h = b * (1.0 - 1e-3);
    let (mut r1, mut r2): (f64, f64) = (0.0, 0.0);
    for i in 0..64 {
        let s = -h + 2.0 * h * i as f64 / 63.0;
        let a = ode1_residual(&p2, s, b)?;
        if a.scale > 0.0 {
            r1 = r1.max(a.value.abs() / a.scale);
        }
        let c = ode2_residual(&phi, s, b, lambda)?;
        if c.scale > 0.0 {
            r2 = r2.max(c.value.abs() / c.scale);
        }
    }
    let mut quad: f64 = 0.0;
    for i in 0..64 {
        let s = -0.99 + 1.98 * i as f64 / 63.0;
        let j = integral_term(0.0, 1.0, s)?.derivs[0];
        quad = quad.max((j - s / (1.0 - s * s).sqrt()).abs());
    }
    outcome(
        r1 < 1e-8 && r2 < 1e-7 && quad <= 1e-10,
        format!("ode1 {r1:e} (limit 1e-8), ode2 {r2:e} (limit 1e-7), quadrature {quad:e} (limit 1e-10)"),
    )
}

fn criterion9() -> Result<Outcome> {
    let models = [
        (qb(1.0, 1.0, 0.0), 0.5),
        (gr(1.0, 0.2, 1.0), 0.5),
        (qb(1.0, 1.0, 0.5), 0.5),
        (gr(2.0, 0.3, 1.0), 0.7),
        (qb(1.0, 0.5, 0.2), 0.8),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (fam, k) in models {
        let n3 = cartan_norm_nd(&MetricModel::new(fam, k, 3)?, 400, 200, 9)?.norm;
        let n2 = cartan_norm_2d(&MetricModel::new(fam, k, 2)?, 4096, XiMethod::Jet)?.norm;
        worst = worst.max((n3 - n2).abs());
        parts.push(format!("{}@{k}: {:e}", fam.name(), n3 - n2));
    }
    outcome(worst < 1e-3, format!("max |3d - 2d| {worst:e} [{}]", parts.join(", ")))
}

/// The verify report must publish the deviation and threshold, and its exit
/// code must follow the deviation.
fn criterion10() -> Result<Outcome> {
    let cases: [&[&str]; 2] = [
        &["verify", "--family", "gen-randers", "--c1", "1", "--c2", "1", "--c3", "1"],
        &["verify", "--family", "sqrt-b", "--d1", "0.3", "--d2", "1", "--d3", "1.2"],
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for args in cases {
        let cfg = parse_config(std::iter::once("cartan").chain(args.iter().copied()))
            .map_err(|e| cartan_torsion::Error::InvalidInput(e.to_string()))?;
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(&cfg, &mut out, &mut err);
        let text = String::from_utf8_lossy(&out).into_owned();
        let Some(line) = text.lines().find(|l| l.starts_with("b_independence:")) else {
            return outcome(false, format!("no b_independence line for {}", args[2]));
        };
        let deviation: f64 = line
            .split("deviation ")
            .nth(1)
            .and_then(|t| t.split_whitespace().next())
            .and_then(|t| t.parse().ok())
            .unwrap_or(f64::NAN);
        let published = line.contains("threshold 0.0001") && deviation.is_finite();
        let expected = if deviation <= 1e-4 { 0 } else { 1 };
        let named = code == 0 || text.contains("first failing check");
        ok &= published && code == expected && named;
        parts.push(format!("{}: deviation {deviation}, exit {code}", args[2]));
    }
    outcome(ok, parts.join("; "))
}

fn main() {
    type Criterion = (u32, &'static str, Option<u64>, fn() -> Result<Outcome>);
    let criteria: [Criterion; 10] = [
        (1, "closed-form fidelity", Some(5), criterion1),
        (2, "Berwald frame", None, criterion2),
        (3, "theorem 1 positivity", Some(30), criterion3),
        (4, "theorem 2 sign analysis", None, criterion4),
        (5, "Randers bound", Some(10), criterion5),
        (6, "Matsumoto torsion", None, criterion6),
        (7, "semi-C-reducibility", None, criterion7),
        (8, "ODE solutions", None, criterion8),
        (9, "plane reduction", Some(60), criterion9),
        (10, "b-independence reporting", None, criterion10),
    ];
    let mut failures = 0;
    for (id, title, bound, f) in criteria {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (mut pass, mut detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let timing = match bound {
            Some(secs) => {
                if elapsed > Duration::from_secs(secs) {
                    pass = false;
                    detail.push_str("; over time bound");
                }
                format!("{:.2}s of {secs}s", elapsed.as_secs_f64())
            }
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {id} ({title}): {verdict} [{timing}] {detail}");
        if !pass {
            failures += 1;
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

//! Preset batteries of checks with a pass/fail table and long-format CSVs
//! (`check,passed,metric,value`), one file per family.

use std::collections::BTreeMap;

use gowers_core::constructions::{
    almost_nil_function, behrend_set, block_random_counterexample, bohr_report, quad_bohr_set,
    quad_phase_quadruple, quadratic_correlation_scan,
};
use gowers_core::inverse::{inverse_u2, reconstruct_polynomial, FpPoly};
use gowers_core::nilseq::{
    bracket_nilsequence, bracket_phase, heisenberg_lower_central, heisenberg_reduce, is_polynomial_map,
    weyl_diagnostic, Group, Heisenberg, PolyCheckConfig,
};
use gowers_core::progressions::{lambda3_via_fourier, lambda_k};
use gowers_core::ring::{dft, dft_naive, inner_product, inverse_dft};
use gowers_core::roth::{rescale, run_increment_loop, ExitReason, IncrementConfig};
use gowers_core::uniformity::{gowers_norm_naive, gowers_norm_recursive, gowers_power_recursive};
use gowers_core::{Complex64, CyclicFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::{emit, write_file, Failure};
use crate::Global;

#[derive(Serialize)]
pub struct Check {
    pub family: &'static str,
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
}

fn check(family: &'static str, name: &str, passed: bool, metrics: &[(&str, f64)]) -> Check {
    Check {
        family,
        name: name.to_string(),
        passed,
        metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

fn random_unit(m: usize, rng: &mut ChaCha8Rng) -> CyclicFunction {
    let values = (0..m)
        .map(|_| {
            let r: f64 = rng.random_range(0.0..=1.0);
            Complex64::from_polar(r, std::f64::consts::TAU * rng.random_range(0.0..1.0))
        })
        .collect();
    CyclicFunction::new(values).expect("nonempty")
}

fn max_abs(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn identities(seed: u64) -> Result<Vec<Check>, Failure> {
    const F: &str = "identities";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let (mut round, mut fast_naive, mut parseval) = (0.0f64, 0.0f64, 0.0f64);
    for m in [1usize, 17, 128, 1000, 2048] {
        let f = random_unit(m, &mut rng);
        let g = random_unit(m, &mut rng);
        let spec = dft(&f);
        round = round.max(max_abs(inverse_dft(&spec).values(), f.values()));
        fast_naive = fast_naive.max(max_abs(spec.coeffs(), dft_naive(&f).coeffs()));
        let spectral: Complex64 = spec.coeffs().iter().zip(dft(&g).coeffs()).map(|(a, b)| a * b.conj()).sum();
        parseval = parseval.max((inner_product(&f, &g)? - spectral).norm());
    }
    out.push(check(F, "fourier_round_trip", round <= 1e-9, &[("max_error", round)]));
    out.push(check(F, "fft_vs_naive", fast_naive <= 1e-10, &[("max_error", fast_naive)]));
    out.push(check(F, "parseval", parseval <= 1e-9, &[("max_error", parseval)]));

    let mut lam = 0.0f64;
    for m in [101usize, 501] {
        for _ in 0..5 {
            let fs = [random_unit(m, &mut rng), random_unit(m, &mut rng), random_unit(m, &mut rng)];
            let d = lambda_k(&fs)?;
            let f = lambda3_via_fourier(&fs[0], &fs[1], &fs[2])?;
            lam = lam.max((d - f).norm());
        }
    }
    out.push(check(F, "lambda3_fourier_identity", lam <= 1e-9, &[("max_error", lam)]));

    let (mut rec, mut mono, mut l4) = (0.0f64, true, f64::NEG_INFINITY);
    for m in [7usize, 16, 31] {
        let f = random_unit(m, &mut rng);
        let mut prev = 0.0;
        for s in 1..=3 {
            let naive = gowers_norm_naive(&f, s)?.value;
            if s >= 2 {
                rec = rec.max((naive - gowers_norm_recursive(&f, s)?.value).abs());
            }
            mono &= prev <= naive + 1e-9;
            prev = naive;
        }
        let maxc = dft(&f).coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        l4 = l4.max(gowers_power_recursive(&f, 2)? - maxc * maxc);
    }
    out.push(check(F, "gowers_recursion", rec <= 1e-9, &[("max_error", rec)]));
    out.push(check(F, "gowers_monotone", mono, &[]));
    out.push(check(F, "l4_inequality", l4 <= 1e-12, &[("max_excess", l4)]));

    let mut u2b = f64::NEG_INFINITY;
    for _ in 0..5 {
        let fs = [random_unit(201, &mut rng), random_unit(201, &mut rng), random_unit(201, &mut rng)];
        let lam = lambda3_via_fourier(&fs[0], &fs[1], &fs[2])?.norm();
        u2b = u2b.max(lam - gowers_norm_recursive(&fs[2], 2)?.value);
    }
    out.push(check(F, "lambda3_u2_bound", u2b <= 1e-9, &[("max_excess", u2b)]));

    let mut inv = f64::INFINITY;
    for _ in 0..10 {
        let f = random_unit(1024, &mut rng);
        let r = inverse_u2(&f, 0.01)?;
        inv = inv.min(r.correlation - r.u2 * r.u2);
    }
    out.push(check(F, "inverse_u2", inv >= -1e-9, &[("min_margin", inv)]));

    let (mut ok, mut total) = (0u32, 0u32);
    for p in [7u64, 11, 13, 31] {
        for d in 0..=4usize {
            let coeffs: Vec<u64> = (0..=d).map(|_| rng.random_range(0..p)).collect();
            let poly = FpPoly::new(p, &coeffs)?;
            total += 1;
            if reconstruct_polynomial(&poly.table(), d).is_ok_and(|r| r.poly == poly) {
                ok += 1;
            }
        }
    }
    out.push(check(F, "toy_inverse", ok == total, &[("recovered", ok as f64), ("total", total as f64)]));
    Ok(out)
}

fn quadphase(m: usize) -> Result<Check, Failure> {
    let fs = quad_phase_quadruple(m)?;
    let lambda = lambda_k(&fs)?;
    let linf = fs
        .iter()
        .map(|f| dft(f).coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let bound = 1.0 / (m as f64).sqrt();
    Ok(check(
        "counterexamples",
        "quad_phase",
        (lambda - 1.0).norm() <= 1e-10 && linf <= bound + 1e-9,
        &[("M", m as f64), ("lambda4", lambda.re), ("lambda4_im", lambda.im), ("spectral_linf", linf), ("bound", bound)],
    ))
}

fn counterexamples(seed: u64) -> Result<Vec<Check>, Failure> {
    const F: &str = "counterexamples";
    let mut out = vec![quadphase(35)?];

    let r = bohr_report(&quad_bohr_set(20001, 20)?);
    let ratio = r.nontrivial_four_aps as f64 / r.random_four_aps;
    out.push(check(
        F,
        "quad_bohr",
        ratio >= 3.0 && r.max_nonzero_coefficient <= 0.2 * r.density,
        &[
            ("density", r.density),
            ("four_aps", r.nontrivial_four_aps as f64),
            ("random_four_aps", r.random_four_aps),
            ("excess_ratio", ratio),
            ("max_nonzero_coefficient", r.max_nonzero_coefficient),
        ],
    ));

    let br = block_random_counterexample(64, seed)?;
    let exact = (0..64).all(|i| br.block_correlation(i) == 1.0);
    let u2 = gowers_power_recursive(&br.function, 2)?;
    let limit = 100.0 / (64.0 * 64.0);
    out.push(check(
        F,
        "block_random",
        exact && u2 <= limit,
        &[("u2_fourth", u2), ("limit", limit), ("exact_block_correlation", f64::from(u8::from(exact)))],
    ));

    let an = almost_nil_function(1600, 0.25)?;
    let u3 = gowers_norm_recursive(&an.function, 3)?.value;
    let scan = quadratic_correlation_scan(&an.function)?;
    out.push(check(
        F,
        "almost_nil",
        u3 >= 0.05 && scan.max_correlation <= 0.5 * u3,
        &[("u3", u3), ("max_quadratic_correlation", scan.max_correlation)],
    ));
    Ok(out)
}

fn nilseq(seed: u64) -> Result<Vec<Check>, Failure> {
    const F: &str = "nilseq";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let g = Heisenberg::new(
            rng.random_range(-1e3..1e3),
            rng.random_range(-1e3..1e3),
            rng.random_range(-1e3..1e3),
        );
        let r = heisenberg_reduce(&g);
        let back = r.rep.op(&r.gamma);
        worst = worst.max((back.x - g.x).abs().max((back.y - g.y).abs()).max((back.z - g.z).abs()));
    }
    let mut out = vec![check(F, "reduce_round_trip", worst <= 1e-9, &[("max_error", worst)])];

    let ns = bracket_nilsequence(10)?;
    let mut br = 0.0f64;
    for n in 0..=1000 {
        br = br.max((bracket_phase(10, n)? - ns.eval(n)).norm());
    }
    out.push(check(F, "bracket_dual_path", br <= 1e-9, &[("max_error", br)]));

    let filt = heisenberg_lower_central::<f64>(1e-9);
    let (a, b, c) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let good = is_polynomial_map(
        &|n| Heisenberg::new(a * n as f64, b * n as f64, c * (n * n) as f64),
        &filt,
        2,
        PolyCheckConfig::default(),
    );
    let bad = is_polynomial_map(&|n| Heisenberg::new(0.0, 0.0, (n as f64 / 4.0).exp()), &filt, 2, PolyCheckConfig::default());
    out.push(check(F, "polynomial_map", good.is_polynomial && !bad.is_polynomial, &[]));

    let w = weyl_diagnostic(&[0.0, 3.0 / 7.0], 700, 0.1, None)?;
    out.push(check(F, "weyl_rational", w.magnitude <= 1e-12 && w.q == 7, &[("magnitude", w.magnitude), ("q", w.q as f64)]));
    Ok(out)
}

fn roth() -> Result<Vec<Check>, Failure> {
    const F: &str = "roth";
    let cfg = IncrementConfig::default();
    let b = behrend_set(3000)?;
    let t = run_increment_loop(&b.elements, 3000, &cfg)?;
    let (mut cur, mut n) = (b.elements.clone(), 3000u64);
    let mut recount = !t.steps.is_empty();
    let mut min_gain = f64::INFINITY;
    for s in &t.steps {
        let alpha = cur.len() as f64 / n as f64;
        let next = rescale(&cur, n, &s.progression)?;
        let dens = next.len() as f64 / s.progression.length as f64;
        min_gain = min_gain.min((dens - alpha) / (alpha * alpha));
        recount &= dens >= alpha + cfg.increment_constant * alpha * alpha;
        cur = next;
        n = s.progression.length;
    }
    let mut out = vec![check(
        F,
        "behrend_3000_increment",
        recount,
        &[("steps", t.steps.len() as f64), ("final_alpha", t.final_alpha), ("min_gain_over_alpha_sq", min_gain)],
    )];

    let mut planted = behrend_set(1000)?.elements;
    planted.extend([400, 450, 500]);
    let t = run_increment_loop(&planted, 1000, &cfg)?;
    let ok = t.final_exit == ExitReason::Found3ap
        && t.witness.as_ref().is_some_and(|w| {
            let [x, y, z] = w.original;
            y - x == z - y && x < y && w.original.iter().all(|&v| planted.contains(&(v as u64)))
        });
    out.push(check(F, "planted_3ap", ok, &[]));
    Ok(out)
}

fn write_csv(path: &std::path::Path, checks: &[&Check]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(["check", "passed", "metric", "value"]).map_err(io)?;
    for c in checks {
        let passed = c.passed.to_string();
        if c.metrics.is_empty() {
            w.write_record([c.name.as_str(), passed.as_str(), "", ""]).map_err(io)?;
        }
        for (k, v) in &c.metrics {
            w.write_record([c.name.as_str(), passed.as_str(), k.as_str(), v.to_string().as_str()]).map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    write_file(path, &String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn run(presets: &[String], modulus: Option<usize>, g: &Global) -> Result<(), Failure> {
    let presets: Vec<&str> = presets.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if presets.is_empty() {
        return Err(Failure::Usage("no preset given (identities, counterexamples, nilseq, roth, quadphase, all)".into()));
    }
    let mut checks = Vec::new();
    for p in &presets {
        match *p {
            "identities" => checks.extend(identities(g.seed)?),
            "counterexamples" => checks.extend(counterexamples(g.seed)?),
            "nilseq" => checks.extend(nilseq(g.seed)?),
            "roth" => checks.extend(roth()?),
            "quadphase" => checks.push(quadphase(modulus.unwrap_or(35))?),
            "all" => {
                checks.extend(identities(g.seed)?);
                checks.extend(counterexamples(g.seed)?);
                checks.extend(nilseq(g.seed)?);
                checks.extend(roth()?);
            }
            other => return Err(Failure::Usage(format!("unknown preset `{other}`"))),
        }
    }

    if let Some(dir) = &g.out {
        let mut families: BTreeMap<&str, Vec<&Check>> = BTreeMap::new();
        for c in &checks {
            families.entry(c.family).or_default().push(c);
        }
        for (family, cs) in families {
            write_csv(&dir.join(format!("{family}.csv")), &cs)?;
        }
        let report = serde_json::json!({ "presets": presets, "seed": g.seed, "checks": checks });
        write_file(&dir.join("report.json"), &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
    }
    if g.json {
        emit(&serde_json::json!({ "presets": presets, "seed": g.seed, "checks": checks }), None, true)?;
    } else {
        println!("{:<16} {:<28} result", "family", "check");
        for c in &checks {
            println!("{:<16} {:<28} {}", c.family, c.name, if c.passed { "PASS" } else { "FAIL" });
        }
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed checks: {}", failed.join(", "))))
    }
}

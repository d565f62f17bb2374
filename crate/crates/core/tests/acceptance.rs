//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::f64::consts::{E, PI};
use std::fs;
use std::panic;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{corpus, fixture, premises_hold, rational, targeted_candidate, uniform_candidate};
use heatflow::bell::{
    bell_complete_all, bell_partition_oracle, bell_scale, faa_di_bruno_exp, lemma1_check,
    sign_flip, RealSequence,
};
use heatflow::conjectures::{
    default_t_grid, evaluate_conjectures, spectral_flow_derivatives, ChainVerdict,
    ConjectureReport, Method,
};
use heatflow::functionals::{entropy_time_derivatives, flow_functionals, QuadratureConfig};
use heatflow::mixture::MixtureSpec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_s {
        Ok(())
    } else {
        Err(format!(
            "took {:.1} s, limit {limit_s} s",
            elapsed.as_secs_f64()
        ))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale
}

/// e^y B_m(|ẏ|, |ẏ′|, ...): the size of N^{(m)} before cancellation.
fn ep_scale(y: f64, derivs: &[f64], m: usize) -> f64 {
    let abs: Vec<f64> = derivs.iter().map(|v| v.abs()).collect();
    faa_di_bruno_exp(y, &abs, m).unwrap()
}

fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let minus_one = -BigRational::one();
    let mut checks = 0usize;
    for _ in 0..1000 {
        let seq = RealSequence::new((0..8).map(|_| rational(&mut rng, 40, 12)).collect());
        let beta = rational(&mut rng, 20, 6);
        let plain = bell_complete_all(&seq, 8).unwrap();
        for (n, b) in plain.iter().enumerate() {
            let oracle = bell_partition_oracle(&seq, n).unwrap();
            if *b != oracle {
                return Err(format!("B_{n} mismatch on {seq:?}: {b} vs {oracle}"));
            }
        }
        for beta in [&beta, &minus_one] {
            let scaled = bell_complete_all(&bell_scale(&seq, beta), 8).unwrap();
            let mut power = BigRational::one();
            for n in 0..=8 {
                if scaled[n] != &power * &plain[n] {
                    return Err(format!("scaling fails at n = {n}, beta = {beta}"));
                }
                power *= beta;
            }
        }
        checks += 1;
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "{checks} sequences, oracle and scaling (incl. beta = -1) exact for n <= 8, {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_2() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut uniform, mut targeted, mut drawn) = (0usize, 0usize, 0usize);
    while uniform + targeted < 10_000 {
        // a fifth of the accepted sequences come from plain uniform draws
        let from_uniform = uniform < 2_000;
        let y = if from_uniform {
            uniform_candidate(&mut rng, 6)
        } else {
            targeted_candidate(&mut rng, 6)
        };
        drawn += 1;
        if !premises_hold(&y) {
            continue;
        }
        let minus_y1 = -y[0].clone();
        let mut power = BigRational::one();
        let mut fact = BigRational::one();
        for n in 1..=6 {
            power *= &minus_y1;
            if n > 1 {
                fact *= BigRational::from_integer(BigInt::from(n - 1));
            }
            if y[n - 1] > -(&fact * &power) {
                return Err(format!("counterexample at n = {n}: {y:?}"));
            }
        }
        let report = lemma1_check(&sign_flip(sign_flip(&y).as_slice()), 6).unwrap();
        if !report.all_conclusions_hold() || report.is_violated() {
            return Err(format!("checker disagrees on {y:?}"));
        }
        if from_uniform {
            uniform += 1;
        } else {
            targeted += 1;
        }
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "10000 premise-satisfying sequences ({uniform} uniform, {targeted} targeted, {drawn} drawn), 0 counterexamples, {:.1} s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_3() -> Result<String, String> {
    let start = Instant::now();
    let spec = MixtureSpec::gaussian(0.0, 1.0).unwrap();
    let cfg = QuadratureConfig::default();
    let ts = [0.1, 0.5, 1.0, 2.0, 5.0];
    let mut worst: f64 = 0.0;
    for &t in &ts {
        let s2 = 1.0 + t;
        let ff = flow_functionals(&spec.flow(t).unwrap(), 5, &cfg).map_err(|e| e.to_string())?;
        let h = -0.5 * (2.0 * PI * E * s2).ln();
        worst = worst.max(rel(ff.entropy.value, h, h.abs()));
        worst = worst.max(rel(ff.fisher.value, 1.0 / s2, 1.0 / s2));
        let derivs = ff.y_dot_derivatives();
        for (k, d) in derivs.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let exact = sign * factorial(k) / s2.powi(k as i32 + 1);
            worst = worst.max(rel(*d, exact, exact.abs()));
        }
        for m in 1..=5 {
            let n_m = faa_di_bruno_exp(ff.y, &derivs, m).unwrap();
            let exact = if m == 1 { 2.0 * PI * E } else { 0.0 };
            worst = worst.max(rel(n_m, exact, ep_scale(ff.y, &derivs, m)));
        }
    }
    if worst > 1e-8 {
        return Err(format!("worst relative error {worst:.2e} > 1e-8"));
    }
    let report =
        evaluate_conjectures(&spec, &ts, 5, &cfg, Method::Analytic).map_err(|e| e.to_string())?;
    let slack = report
        .cells
        .iter()
        .map(|c| c.mck_slack.abs())
        .fold(0.0, f64::max);
    if slack > 1e-8 {
        return Err(format!("McKean slack {slack:.2e} > 1e-8"));
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "worst relative error {worst:.1e}, max |McK slack| {slack:.1e}, {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_4() -> Result<String, String> {
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (name, spec) in corpus() {
        for t in default_t_grid() {
            let ff = flow_functionals(&spec.flow(t).unwrap(), 1, &cfg)
                .map_err(|e| format!("{name}: {e}"))?;
            worst = worst.max(ff.de_bruijn_residual().abs());
            count += 1;
        }
    }
    if worst > 1e-8 {
        return Err(format!("max |dH/dt + I/2| = {worst:.2e} > 1e-8"));
    }
    Ok(format!("{count} points, max |dH/dt + I/2| = {worst:.1e}"))
}

/// Relative gaps (Faà di Bruno vs spectral N, analytic vs spectral H)
/// per order over the corpus and default grid.
fn cross_method_gaps(order: usize) -> Result<(Vec<f64>, Vec<f64>), String> {
    let cfg = QuadratureConfig::default();
    let mut ep = vec![0.0f64; order + 1];
    let mut h = vec![0.0f64; order + 1];
    for (name, spec) in corpus() {
        for t in default_t_grid() {
            let fm = spec.flow(t).unwrap();
            let ff = flow_functionals(&fm, order, &cfg).map_err(|e| format!("{name}: {e}"))?;
            let analytic_h =
                entropy_time_derivatives(&fm, order, &cfg).map_err(|e| format!("{name}: {e}"))?;
            let spectral = spectral_flow_derivatives(&spec, t, order, &cfg)
                .map_err(|e| format!("{name}, t = {t}: {e}"))?;
            let derivs = ff.y_dot_derivatives();
            for m in 1..=order {
                let fdb = faa_di_bruno_exp(ff.y, &derivs, m).unwrap();
                let scale = fdb.abs().max(ep_scale(ff.y, &derivs, m));
                let s = spectral.entropy_power_derivatives[m - 1].value;
                ep[m] = ep[m].max(rel(fdb, s, scale));
                let a = analytic_h[m - 1].value;
                let s = spectral.entropy_derivatives[m - 1].value;
                h[m] = h[m].max(rel(a, s, a.abs()));
            }
        }
    }
    Ok((ep, h))
}

fn format_gaps(gaps: &[f64]) -> String {
    gaps[1..]
        .iter()
        .enumerate()
        .map(|(i, g)| format!("m{}={g:.1e}", i + 1))
        .collect::<Vec<_>>()
        .join(" ")
}

fn criterion_5() -> Result<String, String> {
    let (ep, _) = cross_method_gaps(6)?;
    for m in 1..=6 {
        let tol = if m <= 4 { 1e-6 } else { 1e-4 };
        if ep[m] > tol {
            return Err(format!(
                "m = {m}: relative gap {:.2e} > {tol:e} ({})",
                ep[m],
                format_gaps(&ep)
            ));
        }
    }
    Ok(format!(
        "worst relative gap per order: {}",
        format_gaps(&ep)
    ))
}

fn criterion_6() -> Result<String, String> {
    let (_, h) = cross_method_gaps(4)?;
    if let Some(m) = (1..=4).find(|&m| h[m] > 1e-6) {
        return Err(format!(
            "m = {m}: relative gap {:.2e} > 1e-6 ({})",
            h[m],
            format_gaps(&h)
        ));
    }
    Ok(format!("worst relative gap per order: {}", format_gaps(&h)))
}

fn evidence_reports() -> Result<Vec<(&'static str, ConjectureReport)>, String> {
    corpus()
        .into_iter()
        .map(|(name, spec)| {
            evaluate_conjectures(
                &spec,
                &default_t_grid(),
                4,
                &QuadratureConfig::default(),
                Method::Both,
            )
            .map(|r| (name, r))
            .map_err(|e| format!("{name}: {e}"))
        })
        .collect()
}

fn criterion_7() -> Result<String, String> {
    let start = Instant::now();
    let reports = evidence_reports()?;
    let mut cells = 0;
    for (name, report) in &reports {
        if let Some((t, f)) = report.evaluation_failures().next() {
            return Err(format!("{name}: evaluation failed at t = {t}: {f}"));
        }
        if let Some(f) = report.hard_failures().next() {
            return Err(format!("{name}: {f}"));
        }
        if let Some(c) = report.violation_candidates().next() {
            return Err(format!(
                "{name}: violation candidate at t = {}, m = {}",
                c.t, c.m
            ));
        }
        for p in &report.points {
            let verdict = p.chain.as_ref().map(|c| c.verdict);
            if verdict != Some(ChainVerdict::Satisfied) {
                return Err(format!("{name}: chain {verdict:?} at t = {}", p.t));
            }
        }
        cells += report.cells.len();
    }
    within(start.elapsed(), 300.0)?;
    Ok(format!(
        "{} mixtures, {cells} cells, all EP/GCM/McK flags pass, chain satisfied non-vacuously at every point, {:.1} s",
        reports.len(),
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_8() -> Result<String, String> {
    let mut reports = evidence_reports()?;
    let gaussian = MixtureSpec::gaussian(0.0, 1.0).unwrap();
    reports.push((
        "standard_gaussian",
        evaluate_conjectures(
            &gaussian,
            &default_t_grid(),
            4,
            &QuadratureConfig::default(),
            Method::Analytic,
        )
        .map_err(|e| e.to_string())?,
    ));
    let mut worst = f64::INFINITY;
    let mut cells = 0;
    for (name, report) in &reports {
        for cell in &report.cells {
            let point = report.points.iter().find(|p| p.t == cell.t).unwrap();
            let y_dot = point.summary.as_ref().unwrap().y_dot;
            let product = y_dot * point.sigma_t2;
            if product < 1.0 - 1e-9 {
                return Err(format!("{name}: I sigma_t^2 = {product} at t = {}", cell.t));
            }
            worst = worst.min(product);
            cells += 1;
        }
    }
    Ok(format!("{cells} cells, min I sigma_t^2 = {worst:.12}"))
}

fn criterion_9() -> Result<String, String> {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let input = fixture("asymmetric_bimodal");
    for dir in &dirs {
        let out = Command::new(env!("CARGO_BIN_EXE_heatflow"))
            .arg("--input")
            .arg(&input)
            .arg("--out")
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        if out.status.code() != Some(0) {
            return Err(format!("run exited with {}", out.status));
        }
    }
    for file in ["report.json", "table.csv", "curves.csv"] {
        let a = fs::read(dirs[0].path().join(file)).map_err(|e| e.to_string())?;
        let b = fs::read(dirs[1].path().join(file)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{file} differs between runs"));
        }
    }
    Ok("report.json, table.csv, curves.csv byte-identical across two runs".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("Bell identity suite", criterion_1),
        ("Lemma 1 property test", criterion_2),
        ("Gaussian exactness", criterion_3),
        ("de Bruijn residual", criterion_4),
        ("Faa di Bruno vs spectral N", criterion_5),
        ("analytic vs spectral H derivatives", criterion_6),
        ("conjecture evidence run", criterion_7),
        ("Cramer-Rao", criterion_8),
        ("CLI determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS  {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL  {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

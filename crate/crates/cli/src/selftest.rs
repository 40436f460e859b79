//! Invariant batteries behind `catlab selftest`.

use std::time::Instant;

use catlab::charsums::{
    complete_sums, form_gap, incomplete_sum, incomplete_via_complete, weil_scan, WEIL_PANEL,
};
use catlab::quantization::{egorov_check, propagator, quantize_observable, trace_kelmer};
use catlab::spectra::{hecke_basis, spectral_projectors};
use catlab::variance::{variance_fourier, variance_hecke, variance_quadrature};
use catlab::{Observable, PrimeContext, Result, ToralAutomorphism, Window};

use crate::Failure;

const QUICK_PRIMES: [u64; 4] = [5, 7, 11, 13];

type Suite = (&'static str, fn(&[PrimeContext]) -> Result<Option<String>>);

fn propagators(ctxs: &[PrimeContext]) -> Result<Option<String>> {
    for cx in ctxs {
        let u = propagator(cx, 1);
        let defect = u.unitarity_defect();
        if defect > 1e-12 * cx.n as f64 {
            return Ok(Some(format!("N={}: unitarity defect {defect:e}", cx.n)));
        }
        if u.pow(cx.order)
            .max_abs_diff(&catlab::DenseOperator::identity(cx.n as usize))
            > 1e-10
        {
            return Ok(Some(format!("N={}: U^r != I", cx.n)));
        }
        for k in [[1, 0], [0, 1], [2, -3], [-4, 4]] {
            let e = egorov_check(cx, k);
            if e > 1e-12 {
                return Ok(Some(format!("N={}: Egorov deviation {e:e} at {k:?}", cx.n)));
            }
        }
    }
    Ok(None)
}

fn traces(ctxs: &[PrimeContext]) -> Result<Option<String>> {
    let f = Observable::cos_x1();
    for cx in ctxs {
        let op = quantize_observable(cx, &f)?;
        for t in 1..cx.order as i64 {
            let err = (op.trace_product(&propagator(cx, t)) - trace_kelmer(cx, &f, t)?).norm();
            if err > 1e-10 * cx.n as f64 {
                return Ok(Some(format!("N={} t={t}: trace mismatch {err:e}", cx.n)));
            }
        }
    }
    Ok(None)
}

fn spectra(ctxs: &[PrimeContext]) -> Result<Option<String>> {
    for cx in ctxs {
        let data = spectral_projectors(cx)?;
        if data.dims().iter().sum::<usize>() as u64 != cx.n || data.exceptional().len() > 1 {
            return Ok(Some(format!("N={}: dims {:?}", cx.n, data.dims())));
        }
        let basis = hecke_basis(cx)?;
        let gram = basis.gram_defect();
        if gram > 1e-10 {
            return Ok(Some(format!("N={}: Hecke Gram defect {gram:e}", cx.n)));
        }
    }
    Ok(None)
}

fn charsums(ctxs: &[PrimeContext]) -> Result<Option<String>> {
    for cx in ctxs {
        for (k, kp) in WEIL_PANEL {
            let sums = complete_sums(cx, k, kp)?;
            let bound = 2.0 * (cx.n as f64).sqrt();
            if form_gap(cx, k, kp) != 0 && sums.iter().any(|e| e.norm() >= bound) {
                return Ok(Some(format!("N={}: Weil bound", cx.n)));
            }
            for j in 0..cx.order as i64 {
                let err =
                    (incomplete_sum(cx, j, k, kp)? - incomplete_via_complete(cx, j, &sums)).norm();
                if err > 1e-9 {
                    return Ok(Some(format!(
                        "N={} j={j}: completion identity off by {err:e}",
                        cx.n
                    )));
                }
            }
        }
    }
    Ok(None)
}

fn variance(ctxs: &[PrimeContext]) -> Result<Option<String>> {
    let w = Window::hann();
    let f = Observable::cos_x1();
    for cx in ctxs {
        let l = (cx.order as f64).min(4.0);
        let a = variance_fourier(cx, &f, &w, l)?;
        let b = variance_quadrature(cx, &f, &w, l)?;
        let h = variance_hecke(cx, &f, &w, l)?;
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-300);
        if rel(a, b) > 1e-4 || rel(a, h) > 1e-4 {
            return Ok(Some(format!(
                "N={}: routes disagree ({a:e}, {b:e}, {h:e})",
                cx.n
            )));
        }
    }
    Ok(None)
}

pub fn run(full: bool) -> std::result::Result<(), Failure> {
    let a = ToralAutomorphism::new(3, 2, 4, 3)?;
    let ctxs = QUICK_PRIMES
        .iter()
        .map(|&n| PrimeContext::new(a, n))
        .collect::<Result<Vec<_>>>()?;
    let suites: [Suite; 5] = [
        ("propagator", propagators),
        ("kelmer-trace", traces),
        ("spectra", spectra),
        ("charsums", charsums),
        ("variance", variance),
    ];
    let mut failed = Vec::new();
    for (name, suite) in suites {
        let start = Instant::now();
        let verdict = suite(&ctxs)?;
        report(name, &verdict, start);
        if verdict.is_some() {
            failed.push(name);
        }
    }
    if full {
        let start = Instant::now();
        let rows = weil_scan(&a, 3, 199)?;
        let verdict = rows
            .iter()
            .find(|r| r.abs_e.is_nan() || r.abs_e >= r.bound)
            .map(|r| format!("N={} m={}: |E| = {}", r.n, r.m, r.abs_e));
        report("weil-scan-199", &verdict, start);
        if verdict.is_some() {
            failed.push("weil-scan-199");
        }
    }
    if failed.is_empty() {
        println!("selftest: all suites passed");
        Ok(())
    } else {
        Err(Failure::assertion(format!(
            "selftest failed: {}",
            failed.join(", ")
        )))
    }
}

fn report(name: &str, verdict: &Option<String>, start: Instant) {
    let secs = start.elapsed().as_secs_f64();
    match verdict {
        None => println!("{name:<14} ok   ({secs:.2}s)"),
        Some(msg) => println!("{name:<14} FAIL ({secs:.2}s) {msg}"),
    }
}

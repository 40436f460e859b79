//! The windowed statistic `P(theta)` and its variance.
//!
//! Three independent routes compute `Var(P) = int_0^1 P^2`:
//! the folded exponential sum `(1/L^2) sum_{tau != 0} Gamma(tau) |T_tau|^2`,
//! Simpson quadrature of `P^2` from projector weights, and quadrature of `P^2`
//! built directly from Hecke-basis matrix elements.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arithmetic::{PrimeContext, PrimeKind, ToralAutomorphism};
use crate::error::Result;
use crate::modular::mul_mod;
use crate::numeric::{e_frac, simpson};
use crate::observables::{c_arith, parity, Observable};
use crate::quantization::{quantize_observable, trace_table};
use crate::spectra::{hecke_basis, matrix_elements, SpectralData};
use crate::windows::{check_window_length, gamma_progression, GammaTable, Window, WindowKind};

/// Default certified tail for the `t`-sum.
pub const DEFAULT_TAIL_EPS: f64 = 1e-10;

/// Weights `w_j = tr(Op_N(f) P_j)` attached to the eigenphases `j/r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseWeights {
    pub r: u64,
    pub w: Vec<f64>,
}

impl PhaseWeights {
    /// Discrete Fourier transform of `t -> tr(Op_N(f) U^t)`; `O(r^2)`.
    pub fn from_traces(ctx: &PrimeContext, f: &Observable) -> Result<Self> {
        f.check_support(&ctx.form, ctx.n)?;
        let traces = trace_table(ctx, f);
        let r = ctx.order;
        let w = (0..r)
            .into_par_iter()
            .map(|j| {
                let s: Complex64 = traces
                    .iter()
                    .enumerate()
                    .map(|(t, x)| x * e_frac(-((j * t as u64 % r) as i64), r))
                    .sum();
                s.re / r as f64
            })
            .collect();
        Ok(Self { r, w })
    }

    /// Dense route through the eigenphase projectors.
    pub fn from_projectors(
        ctx: &PrimeContext,
        f: &Observable,
        data: &SpectralData,
    ) -> Result<Self> {
        let op = quantize_observable(ctx, f)?;
        let mut w = vec![0.0; data.r as usize];
        for (entry, x) in data.entries.iter().zip(data.weights(&op)) {
            w[entry.j as usize] = x.re;
        }
        Ok(Self { r: data.r, w })
    }

    /// Weights accumulated from `(phase, value)` matrix elements.
    pub fn from_elements(r: u64, elements: &[(f64, f64)]) -> Self {
        let mut w = vec![0.0; r as usize];
        for &(phase, x) in elements {
            w[((phase * r as f64).round() as u64 % r) as usize] += x;
        }
        Self { r, w }
    }

    /// `P(theta) = sum_j h_L(theta - j/r) w_j`, touching only the phases
    /// inside the window.
    pub fn p(&self, window: &Window, l: f64, theta: f64) -> f64 {
        let r = self.r as f64;
        let half = 0.5 / l;
        let lo = ((theta - half) * r).ceil() as i64;
        let hi = ((theta + half) * r).floor() as i64;
        if hi - lo + 1 >= self.r as i64 {
            return self
                .w
                .iter()
                .enumerate()
                .map(|(j, w)| window.h_periodized(l, theta - j as f64 / r) * w)
                .sum();
        }
        (lo..=hi)
            .map(|j| {
                window.h(l * (theta - j as f64 / r)) * self.w[j.rem_euclid(self.r as i64) as usize]
            })
            .sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.w.iter().map(|x| x * x).sum()
    }
}

/// Panel count used for every `int_0^1` of a windowed quantity.
pub fn panels(l: f64, r: u64) -> usize {
    64 * (l.ceil() as usize).max(r as usize)
}

/// `int_0^1 P^2 - (int_0^1 P)^2` by composite Simpson.
pub fn quadrature_of(weights: &PhaseWeights, window: &Window, l: f64, panels: usize) -> f64 {
    let p = |th: f64| weights.p(window, l, th);
    let mean = simpson(p, 0.0, 1.0, panels);
    let square = simpson(|th| p(th).powi(2), 0.0, 1.0, panels);
    (square - mean * mean).max(0.0)
}

/// `P(theta)` from projector weights.
pub fn p_theta(
    ctx: &PrimeContext,
    f: &Observable,
    window: &Window,
    l: f64,
    theta: f64,
) -> Result<f64> {
    check_window_length(l, ctx.order)?;
    Ok(PhaseWeights::from_traces(ctx, f)?.p(window, l, theta))
}

/// `T_tau = tr(Op_N(f) U^{-tau})` for `tau mod r`.
fn folded_traces(ctx: &PrimeContext, f: &Observable) -> Result<Vec<Complex64>> {
    f.check_support(&ctx.form, ctx.n)?;
    let table = trace_table(ctx, f);
    let r = ctx.order as usize;
    Ok((0..r).map(|tau| table[(r - tau) % r]).collect())
}

/// `(1/L^2) sum_{tau != 0 mod r} Gamma(tau) |T_tau|^2`.
pub fn variance_fourier_with(
    ctx: &PrimeContext,
    f: &Observable,
    gamma: &GammaTable,
) -> Result<f64> {
    let traces = folded_traces(ctx, f)?;
    let sum: f64 = (1..ctx.order as usize)
        .map(|tau| gamma.gamma[tau] * traces[tau].norm_sqr())
        .sum();
    Ok(sum / (gamma.l * gamma.l))
}

pub fn variance_fourier(
    ctx: &PrimeContext,
    f: &Observable,
    window: &Window,
    l: f64,
) -> Result<f64> {
    let gamma = gamma_progression(window, l, ctx.order, DEFAULT_TAIL_EPS)?;
    variance_fourier_with(ctx, f, &gamma)
}

pub fn variance_quadrature(
    ctx: &PrimeContext,
    f: &Observable,
    window: &Window,
    l: f64,
) -> Result<f64> {
    check_window_length(l, ctx.order)?;
    let weights = PhaseWeights::from_traces(ctx, f)?;
    Ok(quadrature_of(&weights, window, l, panels(l, ctx.order)))
}

/// `int P^2` with `P` evaluated directly over the Hecke basis; dense, `O(N^4)`.
pub fn variance_hecke(ctx: &PrimeContext, f: &Observable, window: &Window, l: f64) -> Result<f64> {
    check_window_length(l, ctx.order)?;
    let basis = hecke_basis(ctx)?;
    let elements = matrix_elements(ctx, f, &basis)?;
    Ok(quadrature_from_elements(
        &elements,
        window,
        l,
        panels(l, ctx.order),
    ))
}

/// Quadrature of `P^2` with `P(theta) = sum_psi h_L(theta - theta_psi) x_psi`,
/// one window per basis vector.
pub fn quadrature_from_elements(
    elements: &[(f64, f64)],
    window: &Window,
    l: f64,
    panels: usize,
) -> f64 {
    let p = |th: f64| {
        elements
            .iter()
            .map(|&(phase, x)| window.h_periodized(l, th - phase) * x)
            .sum::<f64>()
    };
    let mean = simpson(p, 0.0, 1.0, panels);
    let square = simpson(|th| p(th).powi(2), 0.0, 1.0, panels);
    (square - mean * mean).max(0.0)
}

/// `2bar (q(k; A^t) - q(k'; A^t))` mod N for `t = 1..r`.
fn phase_gap(ctx: &PrimeContext, k: [i64; 2], kp: [i64; 2], t: i64) -> Result<u64> {
    let n = ctx.n;
    let g = ctx.a_power(t);
    let diff = (ctx.q_closed(k, &g)? + n - ctx.q_closed(kp, &g)?) % n;
    Ok(mul_mod(ctx.two_inv, diff, n))
}

/// `S(k, k') = sum_{t != 0 mod r} Gamma(t) e(2bar (q(k; A^t) - q(k'; A^t)) / N)`.
pub fn s_incomplete(
    ctx: &PrimeContext,
    gamma: &GammaTable,
    k: [i64; 2],
    kp: [i64; 2],
) -> Result<Complex64> {
    let mut s = Complex64::new(0.0, 0.0);
    for t in 1..ctx.order as i64 {
        s += gamma.get(t) * e_frac(phase_gap(ctx, k, kp, t)? as i64, ctx.n);
    }
    Ok(s)
}

/// `Var` regrouped by frequency pairs:
/// `(1/L^2) [ sum_{Q(k) = Q(k')} c c' (L - T0) + sum_{Q(k) != Q(k')} c c' S(k, k') ]`
/// with `c c' = (-1)^{k1k2 + k1'k2'} f_hat(k) conj(f_hat(k'))`.
pub fn variance_decomposed(ctx: &PrimeContext, f: &Observable, gamma: &GammaTable) -> Result<f64> {
    f.check_support(&ctx.form, ctx.n)?;
    let diagonal = gamma.sum_nonzero();
    let coeffs: Vec<([i64; 2], Complex64)> = f.iter().collect();
    let mut total = Complex64::new(0.0, 0.0);
    for &(k, c) in &coeffs {
        for &(kp, cp) in &coeffs {
            let weight = c * cp.conj() * parity(k) * parity(kp);
            let s = if ctx.form.eval(k) == ctx.form.eval(kp) {
                Complex64::new(diagonal, 0.0)
            } else {
                s_incomplete(ctx, gamma, k, kp)?
            };
            total += weight * s;
        }
    }
    Ok(total.re / (gamma.l * gamma.l))
}

/// Explicit error budget for `|Var - C_arith / L|`:
/// `(|C_arith| T0 + 2 sqrt(N) Gamma(0) (sum |f_hat|)^2) / L^2`.
pub fn error_budget(n: u64, c: f64, l1: f64, gamma: &GammaTable) -> f64 {
    (c.abs() * gamma.t0 + 2.0 * (n as f64).sqrt() * gamma.gamma_zero() * l1 * l1)
        / (gamma.l * gamma.l)
}

/// Largest change in `Var` from the neglected `|t| > T` terms, using
/// `|T_tau| <= sum |f_hat|`.
pub fn truncation_allowance(l1: f64, gamma: &GammaTable) -> f64 {
    l1 * l1 * gamma.tail / (gamma.l * gamma.l)
}

/// `L = floor(N^rho)`, clamped below `2r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LRule {
    pub exponent: f64,
}

impl Default for LRule {
    fn default() -> Self {
        Self { exponent: 0.75 }
    }
}

impl LRule {
    pub fn length(&self, n: u64, r: u64) -> u64 {
        let l = (n as f64).powf(self.exponent).floor() as u64;
        l.min(2 * r - 1).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: u64,
    pub r: u64,
    pub kind: PrimeKind,
    pub l: u64,
    pub var_fourier: f64,
    pub var_quadrature: f64,
    pub c_arith: f64,
    pub c_over_l: f64,
    pub bound: f64,
    /// `L Var / C_arith`; NaN when `C_arith = 0`.
    pub ratio: f64,
    pub budget_ok: bool,
    /// Whether `r > sqrt(N)`, the hypothesis of the variance asymptotics.
    pub hypothesis: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    pub window: WindowKind,
    pub observable: String,
    pub rows: Vec<ScanRow>,
}

pub const CSV_HEADER: &str = "N,r,kind,L,var_fourier,var_quadrature,c_arith,bound,ratio";

/// Twelve significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

impl VarianceReport {
    pub fn budget_violations(&self) -> Vec<u64> {
        self.rows
            .iter()
            .filter(|r| !r.budget_ok)
            .map(|r| r.n)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                row.n,
                row.r,
                row.kind,
                row.l,
                fmt_float(row.var_fourier),
                fmt_float(row.var_quadrature),
                fmt_float(row.c_arith),
                fmt_float(row.bound),
                fmt_float(row.ratio)
            );
        }
        out
    }
}

/// One row of the scan for a single prime.
pub fn scan_prime(
    a: &ToralAutomorphism,
    f: &Observable,
    window: &Window,
    n: u64,
    rule: LRule,
    eps: f64,
) -> Result<ScanRow> {
    let ctx = PrimeContext::new(*a, n)?;
    let r = ctx.order;
    let l = rule.length(n, r);
    let lf = l as f64;
    let gamma = gamma_progression(window, lf, r, eps)?;
    let var_fourier = variance_fourier_with(&ctx, f, &gamma)?;
    let weights = PhaseWeights::from_traces(&ctx, f)?;
    let var_quadrature = quadrature_of(&weights, window, lf, panels(lf, r));
    let c = c_arith(a, f);
    let bound = error_budget(n, c, f.l1_norm(), &gamma);
    // The budget is exact for the infinite t-sum; the computed variance may
    // fall short of it by the certified truncation tail.
    let allowance = truncation_allowance(f.l1_norm(), &gamma);
    Ok(ScanRow {
        n,
        r,
        kind: ctx.kind,
        l,
        var_fourier,
        var_quadrature,
        c_arith: c,
        c_over_l: c / lf,
        bound,
        ratio: lf * var_fourier / c,
        budget_ok: (var_fourier - c / lf).abs() <= bound + allowance,
        hypothesis: (r * r) > n,
    })
}

/// Rows for every prime, computed in parallel and ordered by `N`.
pub fn theorem_scan(
    a: &ToralAutomorphism,
    f: &Observable,
    window: &Window,
    label: &str,
    primes: &[u64],
    rule: LRule,
    eps: f64,
) -> Result<VarianceReport> {
    let mut rows = primes
        .par_iter()
        .map(|&n| scan_prime(a, f, window, n, rule, eps))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|row| row.n);
    Ok(VarianceReport {
        window: window.kind,
        observable: label.to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rel_diff;
    use crate::spectra::spectral_projectors;

    fn cat() -> ToralAutomorphism {
        ToralAutomorphism::new(3, 2, 4, 3).unwrap()
    }

    fn ctx(n: u64) -> PrimeContext {
        PrimeContext::new(cat(), n).unwrap()
    }

    fn mixed() -> Observable {
        Observable::new([
            ([1, 0], Complex64::new(1.0, 0.0)),
            ([1, 1], Complex64::new(0.3, -0.2)),
            ([0, 1], Complex64::new(-0.5, 0.1)),
        ])
        .unwrap()
    }

    #[test]
    fn weights_traces_vs_projectors() {
        let cx = ctx(13);
        let data = spectral_projectors(&cx).unwrap();
        for f in [Observable::cos_x1(), mixed()] {
            let a = PhaseWeights::from_traces(&cx, &f).unwrap();
            let b = PhaseWeights::from_projectors(&cx, &f, &data).unwrap();
            for (x, y) in a.w.iter().zip(&b.w) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn p_theta_matches_full_sum_and_hecke() {
        let cx = ctx(29);
        let w = Window::hann();
        let f = mixed();
        let weights = PhaseWeights::from_traces(&cx, &f).unwrap();
        let basis = hecke_basis(&cx).unwrap();
        let elements = matrix_elements(&cx, &f, &basis).unwrap();
        for l in [1.0, 3.0, 7.5] {
            for i in 0..10 {
                let th = 0.0917 * i as f64 + 0.003;
                let full: f64 = weights
                    .w
                    .iter()
                    .enumerate()
                    .map(|(j, x)| w.h_periodized(l, th - j as f64 / cx.order as f64) * x)
                    .sum();
                let direct: f64 = elements
                    .iter()
                    .map(|&(ph, x)| w.h_periodized(l, th - ph) * x)
                    .sum();
                let p = weights.p(&w, l, th);
                assert!((p - full).abs() < 1e-12, "L={l} th={th}");
                assert!((p - direct).abs() < 1e-9);
            }
        }
        assert!(p_theta(&cx, &f, &w, 2.0 * cx.order as f64, 0.1).is_err());
    }

    #[test]
    fn mean_of_p_vanishes() {
        let cx = ctx(31);
        let w = Window::hann();
        let weights = PhaseWeights::from_traces(&cx, &mixed()).unwrap();
        let l = 9.0;
        let mean = simpson(|th| weights.p(&w, l, th), 0.0, 1.0, panels(l, cx.order));
        assert!(mean.abs() < 1e-9);
    }

    #[test]
    fn routes_agree() {
        for (n, l) in [(29u64, 5.0), (31, 9.0), (37, 20.0)] {
            let cx = ctx(n);
            for kind in [WindowKind::Hann, WindowKind::Triangle] {
                let w = Window::new(kind);
                for f in [Observable::cos_x1(), mixed()] {
                    let fourier = variance_fourier(&cx, &f, &w, l).unwrap();
                    let quad = variance_quadrature(&cx, &f, &w, l).unwrap();
                    let hecke = variance_hecke(&cx, &f, &w, l).unwrap();
                    assert!(
                        rel_diff(fourier, quad) < 1e-4,
                        "N={n} L={l} {kind}: {fourier} vs {quad}"
                    );
                    assert!(rel_diff(fourier, hecke) < 1e-4);
                }
            }
        }
    }

    #[test]
    fn wide_window_separates_phases() {
        // L > r: the windows around distinct phases do not overlap.
        let cx = ctx(13);
        let w = Window::hann();
        let l = (cx.order + 2) as f64;
        let weights = PhaseWeights::from_traces(&cx, &mixed()).unwrap();
        let v = variance_fourier(&cx, &mixed(), &w, l).unwrap();
        assert!(rel_diff(v, weights.sum_sq() / l) < 1e-9);
    }

    #[test]
    fn quadrature_converges() {
        let cx = ctx(41);
        let w = Window::hann();
        let l = 7.0;
        let weights = PhaseWeights::from_traces(&cx, &mixed()).unwrap();
        let base = panels(l, cx.order);
        let a = quadrature_of(&weights, &w, l, base);
        let b = quadrature_of(&weights, &w, l, 2 * base);
        assert!(rel_diff(a, b) < 1e-5);
        assert_eq!(
            variance_quadrature(&cx, &Observable::zero(), &w, l).unwrap(),
            0.0
        );
    }

    #[test]
    fn null_and_invariance() {
        let cx = ctx(43);
        let w = Window::hann();
        let cocycle = Observable::cocycle(&Observable::cos_x1(), &cx.automorphism);
        assert!(variance_fourier(&cx, &cocycle, &w, 10.0).unwrap() <= 1e-18);
        let f = mixed();
        let v = variance_fourier(&cx, &f, &w, 10.0).unwrap();
        let va = variance_fourier(&cx, &f.compose(&cx.automorphism), &w, 10.0).unwrap();
        assert!(v >= 0.0);
        assert!(rel_diff(v, va) < 1e-9);
    }

    #[test]
    fn decomposition_identity() {
        for n in [29u64, 53, 101] {
            let cx = ctx(n);
            let w = Window::hann();
            let l = (n as f64)
                .powf(0.75)
                .floor()
                .min(2.0 * cx.order as f64 - 1.0);
            let gamma = gamma_progression(&w, l, cx.order, DEFAULT_TAIL_EPS).unwrap();
            for f in [Observable::cos_x1(), mixed()] {
                let a = variance_fourier_with(&cx, &f, &gamma).unwrap();
                let b = variance_decomposed(&cx, &f, &gamma).unwrap();
                assert!(rel_diff(a, b) < 1e-9, "N={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn incomplete_sum_properties() {
        let cx = ctx(61);
        let w = Window::hann();
        let gamma = gamma_progression(&w, 12.0, cx.order, DEFAULT_TAIL_EPS).unwrap();
        let diag = s_incomplete(&cx, &gamma, [1, 0], [-1, 0]).unwrap();
        assert!((diag - Complex64::new(12.0 - gamma.t0, 0.0)).norm() < 1e-8);
        for (k, kp) in [([1, 0], [1, 1]), ([1, 1], [0, 1]), ([1, 0], [2, 1])] {
            let s = s_incomplete(&cx, &gamma, k, kp).unwrap();
            let s_rev = s_incomplete(&cx, &gamma, kp, k).unwrap();
            assert!((s - s_rev.conj()).norm() < 1e-10);
            // rigorous form of the off-diagonal bound: 2 sqrt(N) sum_j gamma(j)
            assert!(s.norm() <= 2.0 * (cx.n as f64).sqrt() * gamma.t0);
        }
    }

    #[test]
    fn scan_rows() {
        let w = Window::hann();
        let primes = [101u64, 103, 107];
        let report = theorem_scan(
            &cat(),
            &Observable::cos_x1(),
            &w,
            "cos",
            &primes,
            LRule::default(),
            DEFAULT_TAIL_EPS,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.budget_violations().is_empty());
        for row in &report.rows {
            assert_eq!(row.c_arith, 4.0);
            assert!(row.l < 2 * row.r);
            assert!(rel_diff(row.var_fourier, row.var_quadrature) < 1e-4);
        }
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 3);
        assert_eq!(
            csv,
            theorem_scan(
                &cat(),
                &Observable::cos_x1(),
                &w,
                "cos",
                &[107, 101, 103],
                LRule::default(),
                DEFAULT_TAIL_EPS
            )
            .unwrap()
            .to_csv()
        );
    }

    #[test]
    fn l_rule_clamps() {
        let rule = LRule::default();
        assert_eq!(rule.length(101, 1000), 31);
        assert_eq!(rule.length(101, 10), 19);
        assert_eq!(fmt_float(0.5), "5.00000000000e-1");
    }
}

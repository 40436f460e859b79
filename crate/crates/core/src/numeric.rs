//! Small numerical helpers shared across modules.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `e(x) = exp(2 pi i x)`.
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// `e(num / den)` with the numerator reduced first, which keeps the angle
/// accurate for large integer arguments.
pub fn e_frac(num: i64, den: u64) -> Complex64 {
    let r = num.rem_euclid(den as i64);
    e(r as f64 / den as f64)
}

/// Composite Simpson rule on `[a, b]` with `panels` subintervals (rounded up
/// to an even count).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(2) + panels % 2;
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Lookup table of `e(j / (2N))` for `j` in `0..2N`.
#[derive(Debug, Clone)]
pub struct HalfPhaseTable {
    two_n: u64,
    table: Vec<Complex64>,
}

impl HalfPhaseTable {
    pub fn new(n: u64) -> Self {
        let two_n = 2 * n;
        let table = (0..two_n).map(|j| e(j as f64 / two_n as f64)).collect();
        Self { two_n, table }
    }

    /// `e(j / (2N))` for any integer `j`.
    pub fn get(&self, j: i64) -> Complex64 {
        self.table[j.rem_euclid(self.two_n as i64) as usize]
    }

    pub fn get_reduced(&self, j: u64) -> Complex64 {
        self.table[(j % self.two_n) as usize]
    }
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

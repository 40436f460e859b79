//! Window functions `h`, their Fourier transforms, the periodization `h_L`
//! and the arithmetic-progression sums `Gamma(tau)` of `h_hat(t/L)^2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CatError, Result};
use crate::numeric::simpson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// `sqrt(8/3) cos^2(pi x)`.
    Hann,
    /// `sqrt(12) (1/2 - |x|)`.
    Triangle,
}

impl WindowKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WindowKind::Hann => "hann",
            WindowKind::Triangle => "triangle",
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WindowKind {
    type Err = CatError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hann" => Ok(WindowKind::Hann),
            "triangle" => Ok(WindowKind::Triangle),
            _ => Err(CatError::UnknownKind(s.to_string())),
        }
    }
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - (PI * z).powi(2) / 6.0
    } else {
        (PI * z).sin() / (PI * z)
    }
}

const HANN_SCALE: f64 = 1.632_993_161_855_452; // sqrt(8/3)
const TRIANGLE_SCALE: f64 = 3.464_101_615_137_754_5; // sqrt(12)

/// Even, non-negative test function supported in `[-1/2, 1/2]` with `int h^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub kind: WindowKind,
}

impl Window {
    pub fn new(kind: WindowKind) -> Self {
        Self { kind }
    }

    pub fn hann() -> Self {
        Self::new(WindowKind::Hann)
    }

    pub fn h(&self, x: f64) -> f64 {
        if x.abs() > 0.5 {
            return 0.0;
        }
        match self.kind {
            WindowKind::Hann => HANN_SCALE * (PI * x).cos().powi(2),
            WindowKind::Triangle => TRIANGLE_SCALE * (0.5 - x.abs()),
        }
    }

    /// `h_hat(y) = int h(x) e(-xy) dx`.
    pub fn h_hat(&self, y: f64) -> f64 {
        match self.kind {
            // cos^2 = (1 + cos 2 pi x)/2 integrates to sinc(y)/2 + (sinc(y+1) + sinc(y-1))/4,
            // i.e. sin(pi y) / (2 pi y (1 - y^2)) away from y in {0, +-1}.
            WindowKind::Hann => {
                HANN_SCALE * (0.5 * sinc(y) + 0.25 * (sinc(y + 1.0) + sinc(y - 1.0)))
            }
            WindowKind::Triangle => TRIANGLE_SCALE * 0.25 * sinc(0.5 * y).powi(2),
        }
    }

    /// `h_L(theta) = sum_k h(L (theta - k))`.
    pub fn h_periodized(&self, l: f64, theta: f64) -> f64 {
        let centered = theta - theta.round();
        (-1..=1).map(|k| self.h(l * (centered - k as f64))).sum()
    }

    /// Certified bound on `sum_{|t| > cutoff} h_hat(t/L)^2`, or `None` when
    /// the cutoff is too small for the certificate to apply.
    pub fn tail_bound(&self, l: f64, cutoff: u64) -> Option<f64> {
        let t = cutoff as f64;
        match self.kind {
            // h_hat^2 <= (2/(3 pi^2)) / (y^2 (y^2 - 1)^2), decreasing for y > 1, and
            // (y^2 - 1)^{-2} <= (1 - (L/T)^2)^{-2} y^{-4} for y >= T/L.
            WindowKind::Hann => {
                if t < 2.0 * l {
                    return None;
                }
                let c = (1.0 - (l / t).powi(2)).powi(-2);
                Some(2.0 * (2.0 / (3.0 * PI * PI)) * c * l.powi(6) / (5.0 * t.powi(5)))
            }
            // h_hat^2 = (3/4) sinc^4(y/2) <= 12 / (pi^4 y^4).
            WindowKind::Triangle => {
                if cutoff == 0 {
                    return None;
                }
                Some(8.0 * l.powi(4) / (PI.powi(4) * t.powi(3)))
            }
        }
    }

    /// Smallest cutoff whose certified tail is at most `eps`.
    pub fn truncation(&self, l: f64, eps: f64) -> Result<u64> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(CatError::BadTolerance(eps));
        }
        let ok = |t: u64| self.tail_bound(l, t).is_some_and(|b| b <= eps);
        let mut hi = (2.0 * l).ceil().max(1.0) as u64;
        while !ok(hi) {
            hi *= 2;
        }
        let mut lo = 0;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

pub fn check_window_length(l: f64, r: u64) -> Result<()> {
    if l.is_nan() || l < 1.0 || l >= 2.0 * r as f64 {
        return Err(CatError::WindowTooWide { l, r });
    }
    Ok(())
}

/// `Gamma(tau) = sum_{t != 0, t = tau mod r} h_hat(t/L)^2`, folded from a
/// certified truncation of the `t`-sum.
#[derive(Debug, Clone, Serialize)]
pub struct GammaTable {
    pub order: u64,
    pub l: f64,
    pub gamma: Vec<f64>,
    /// `sum_{j in Z} h_hat(j r / L)^2`.
    pub t0: f64,
    pub hhat0_sq: f64,
    pub truncation: u64,
    /// Certified bound on the neglected tail of `sum_t h_hat(t/L)^2`.
    pub tail: f64,
}

impl GammaTable {
    pub fn get(&self, tau: i64) -> f64 {
        self.gamma[tau.rem_euclid(self.order as i64) as usize]
    }

    pub fn gamma_zero(&self) -> f64 {
        self.gamma[0]
    }

    /// `sum_{tau != 0 mod r} Gamma(tau)`.
    pub fn sum_nonzero(&self) -> f64 {
        self.gamma[1..].iter().sum()
    }

    /// `sum_{t in Z} h_hat(t/L)^2`, which equals `L`.
    pub fn total(&self) -> f64 {
        self.hhat0_sq + self.gamma.iter().sum::<f64>()
    }
}

pub fn gamma_progression(w: &Window, l: f64, r: u64, eps: f64) -> Result<GammaTable> {
    check_window_length(l, r)?;
    let truncation = w.truncation(l, eps)?;
    let tail = w.tail_bound(l, truncation).unwrap_or(f64::INFINITY);
    let mut gamma = vec![0.0; r as usize];
    for t in 1..=truncation {
        let v = w.h_hat(t as f64 / l).powi(2);
        let tau = (t % r) as usize;
        gamma[tau] += v;
        gamma[(r as usize - tau) % r as usize] += v;
    }
    let hhat0_sq = w.h_hat(0.0).powi(2);
    let t0 = hhat0_sq
        + 2.0
            * (1..=truncation / r)
                .map(|j| w.h_hat((j * r) as f64 / l).powi(2))
                .sum::<f64>();
    Ok(GammaTable {
        order: r,
        l,
        gamma,
        t0,
        hhat0_sq,
        truncation,
        tail,
    })
}

/// `gamma(j) = (L^2/r) int_0^1 h_L(theta) h_L(theta + j/r) d theta`, by Simpson
/// quadrature over the support of `h_L(theta)`.
pub fn gamma_coeffs(w: &Window, l: f64, r: u64) -> Result<Vec<f64>> {
    check_window_length(l, r)?;
    let panels = 64 * (l.ceil() as usize).max(r as usize);
    let half = 0.5 / l;
    Ok((0..r)
        .into_par_iter()
        .map(|j| {
            let shift = j as f64 / r as f64;
            let integral = simpson(
                |th| w.h(l * th) * w.h_periodized(l, th + shift),
                -half,
                half,
                panels,
            );
            l * l / r as f64 * integral
        })
        .collect())
}

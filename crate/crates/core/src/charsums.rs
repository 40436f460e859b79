//! Character sums over the centralizer `C_A(N)`.
//!
//! The complete sum
//! `E(chi) = sum_{1 != y} chi(y) e(2bar (q(k;y) - q(k';y)) / N)`
//! is computed by brute force over the cyclic group, and again through the
//! two one-variable parametrizations: `x in F_N^*` when `N` splits, and
//! `t in F_N` with `y = (t - sqrt D)/(t + sqrt D)` when `N` is inert.
//! Since `q(x; y) = Q(x) mu(y)`, all phases factor through
//! `Delta = Q(k) - Q(k')`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arithmetic::{PrimeContext, PrimeKind, ToralAutomorphism};
use crate::error::{CatError, Result};
use crate::modular::{inv_mod, mul_mod, odd_primes, reduce};
use crate::numeric::e_frac;

/// `chi_m(g0^i) = e(m i / M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiplicativeCharacter {
    pub m: u64,
    pub order: u64,
}

impl MultiplicativeCharacter {
    pub fn new(m: u64, order: u64) -> Self {
        Self {
            m: m % order,
            order,
        }
    }

    pub fn trivial(order: u64) -> Self {
        Self::new(0, order)
    }

    /// Value at `g0^i`.
    pub fn at_power(&self, i: u64) -> Complex64 {
        e_frac(
            (mul_mod(self.m, i % self.order, self.order)) as i64,
            self.order,
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.m + other.m, self.order)
    }

    pub fn pow(&self, j: u64) -> Self {
        Self::new(mul_mod(self.m, j, self.order), self.order)
    }

    pub fn is_trivial(&self) -> bool {
        self.m == 0
    }
}

/// `psi(x) = e(a x / N)` for nonzero `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdditiveCharacter {
    pub a: u64,
    pub n: u64,
}

impl AdditiveCharacter {
    pub fn new(a: i64, n: u64) -> Self {
        let a = reduce(a, n);
        assert!(a != 0, "additive character must be nontrivial");
        Self { a, n }
    }

    pub fn eval(&self, x: u64) -> Complex64 {
        e_frac(mul_mod(self.a, x % self.n, self.n) as i64, self.n)
    }
}

/// `Delta = Q(k) - Q(k')` mod N.
pub fn form_gap(ctx: &PrimeContext, k: [i64; 2], kp: [i64; 2]) -> u64 {
    let n = ctx.n;
    (ctx.form.eval_mod(k, n) + n - ctx.form.eval_mod(kp, n)) % n
}

/// Twist multipliers `mu(g0^i)` for `i = 1..M`; slot 0 (the identity) is unused.
pub fn group_multipliers(ctx: &PrimeContext) -> Result<Vec<u64>> {
    let mut mu = vec![0; ctx.group_order as usize];
    for (i, slot) in mu.iter_mut().enumerate().skip(1) {
        *slot = ctx.twist_multiplier(&ctx.generator_power(i as u64))?;
    }
    Ok(mu)
}

/// Phases `a_i = e(2bar (q(k; g0^i) - q(k'; g0^i)) / N)`, `i = 1..M`.
fn group_phases(ctx: &PrimeContext, k: [i64; 2], kp: [i64; 2]) -> Result<Vec<Complex64>> {
    let n = ctx.n;
    let mut out = vec![Complex64::new(0.0, 0.0); ctx.group_order as usize];
    for (i, slot) in out.iter_mut().enumerate().skip(1) {
        let g = ctx.generator_power(i as u64);
        let diff = (ctx.q_twisted(k, &g)? + n - ctx.q_twisted(kp, &g)?) % n;
        *slot = e_frac(mul_mod(ctx.two_inv, diff, n) as i64, n);
    }
    Ok(out)
}

/// `E(chi)` by brute force over the `M - 1` nontrivial group elements.
pub fn complete_sum(
    ctx: &PrimeContext,
    k: [i64; 2],
    kp: [i64; 2],
    chi: &MultiplicativeCharacter,
) -> Result<Complex64> {
    let phases = group_phases(ctx, k, kp)?;
    Ok(phases
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| chi.at_power(i as u64) * a)
        .sum())
}

/// `E(chi_m)` for every `m mod M`.
pub fn complete_sums(ctx: &PrimeContext, k: [i64; 2], kp: [i64; 2]) -> Result<Vec<Complex64>> {
    let phases = group_phases(ctx, k, kp)?;
    let order = ctx.group_order;
    Ok((0..order)
        .map(|m| {
            let chi = MultiplicativeCharacter::new(m, order);
            phases
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| chi.at_power(i as u64) * a)
                .sum()
        })
        .collect())
}

/// `psi(z) = e(2bar Delta z / N)`, the additive character shared by both
/// parametrized forms (zero `Delta` gives the trivial character).
fn base_scale(ctx: &PrimeContext, delta: u64) -> u64 {
    mul_mod(ctx.two_inv, delta, ctx.n)
}

/// A square root of `D` in `F_N`, by search.
fn sqrt_mod(d: u64, n: u64) -> Option<u64> {
    (0..n).find(|&x| mul_mod(x, x, n) == d % n)
}

/// Data for the split parametrization `y -> x = u + v delta`, `delta^2 = D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitForm {
    pub delta: u64,
    /// `x(g0)`, a generator of `F_N^*`.
    pub x0: u64,
    /// Scale of `psi`: `2bar Delta delta^{-1}`.
    pub scale: u64,
    log: HashMap<u64, u64>,
}

impl SplitForm {
    pub fn new(ctx: &PrimeContext, delta_q: u64) -> Result<Self> {
        if ctx.kind != PrimeKind::Split {
            return Err(CatError::WrongKind {
                expected: "split",
                actual: ctx.kind.as_str(),
            });
        }
        let n = ctx.n;
        let delta = sqrt_mod(ctx.d, n).ok_or(CatError::WrongKind {
            expected: "split",
            actual: "inert",
        })?;
        let lambda = ctx.generator.lambda;
        let x0 = (lambda.u + mul_mod(lambda.v, delta, n)) % n;
        let mut log = HashMap::with_capacity(n as usize);
        let mut x = 1;
        for i in 0..ctx.group_order {
            log.insert(x, i);
            x = mul_mod(x, x0, n);
        }
        let scale = mul_mod(
            base_scale(ctx, delta_q),
            inv_mod(delta, n).expect("D is a unit"),
            n,
        );
        Ok(Self {
            delta,
            x0,
            scale,
            log,
        })
    }

    /// `chi` transported to `F_N^*` through the eigenvalue `x(y)`.
    pub fn chi(&self, chi: &MultiplicativeCharacter, x: u64) -> Complex64 {
        chi.at_power(self.log[&x])
    }
}

/// `E(chi) = sum_{x != 0, 1} chi(x) psi((1 + x)/(1 - x))` over `F_N`.
pub fn split_form(
    ctx: &PrimeContext,
    chi: &MultiplicativeCharacter,
    form: &SplitForm,
    psi: &AdditiveCharacter,
) -> Complex64 {
    let n = ctx.n;
    (2..n)
        .map(|x| {
            let z = mul_mod((1 + x) % n, inv_mod((1 + n - x) % n, n).expect("x != 1"), n);
            form.chi(chi, x) * psi.eval(z)
        })
        .sum()
}

/// Data for the inert parametrization `y = (t - sqrt D)/(t + sqrt D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InertForm {
    /// `lambda_A = (t0 - sqrt D)/(t0 + sqrt D)`.
    pub t0: u64,
    /// `c = (D - t0^2) / (4 t0 D)`.
    pub c: u64,
    log: HashMap<(u64, u64), u64>,
}

impl InertForm {
    pub fn new(ctx: &PrimeContext) -> Result<Self> {
        if ctx.kind != PrimeKind::Inert {
            return Err(CatError::WrongKind {
                expected: "inert",
                actual: ctx.kind.as_str(),
            });
        }
        let (n, d, ring) = (ctx.n, ctx.d, &ctx.ring);
        let one = ring.one();
        let ratio = ring
            .div(ring.add(one, ctx.lambda_a), ring.sub(one, ctx.lambda_a))
            .ok_or(CatError::DegenerateLambda)?;
        // (1 + lambda_A)/(1 - lambda_A) = u sqrt(D), and t0 = D u.
        debug_assert_eq!(ratio.u, 0);
        let t0 = mul_mod(d, ratio.v, n);
        if t0 == 0 {
            return Err(CatError::DegenerateLambda);
        }
        let num = (d + n - mul_mod(t0, t0, n)) % n;
        let den = mul_mod(4 % n, mul_mod(t0, d, n), n);
        let c = mul_mod(num, inv_mod(den, n).ok_or(CatError::DegenerateLambda)?, n);
        let mut log = HashMap::with_capacity(ctx.group_order as usize);
        let mut x = one;
        for i in 0..ctx.group_order {
            log.insert((x.u, x.v), i);
            x = ring.mul(x, ctx.generator.lambda);
        }
        Ok(Self { t0, c, log })
    }
}

/// `E(chi) = sum_{t mod N} chi((t - sqrt D)/(t + sqrt D)) psi(c t)`.
pub fn inert_form(
    ctx: &PrimeContext,
    chi: &MultiplicativeCharacter,
    form: &InertForm,
    psi: &AdditiveCharacter,
) -> Complex64 {
    let ring = &ctx.ring;
    let root = ring.sqrt_d();
    (0..ctx.n)
        .map(|t| {
            let tt = ring.scalar(t);
            let x = ring
                .div(ring.sub(tt, root), ring.add(tt, root))
                .expect("t + sqrt D is a unit");
            chi.at_power(form.log[&(x.u, x.v)]) * psi.eval(mul_mod(form.c, t, ctx.n))
        })
        .sum()
}

/// The additive character matching `complete_sum` for the gap `Delta`.
pub fn matching_psi(ctx: &PrimeContext, delta: u64) -> Option<AdditiveCharacter> {
    let a = base_scale(ctx, delta);
    (a != 0).then(|| AdditiveCharacter::new(a as i64, ctx.n))
}

/// `chi_1` with `chi_1(A) = e(1/r)`.
pub fn chi_one(ctx: &PrimeContext) -> MultiplicativeCharacter {
    let (big_m, r) = (ctx.group_order, ctx.order);
    // s = (M/r) s' with gcd(s', r) = 1; m1 = s'^{-1} mod r.
    let s_prime = ctx.log_a / (big_m / r);
    let m1 = if r == 1 {
        0
    } else {
        inv_mod(s_prime % r, r).expect("s' is a unit mod r")
    };
    MultiplicativeCharacter::new(m1, big_m)
}

/// `E_A(j) = sum_{t != 0 mod r} e(jt/r) e(2bar (q(k;A^t) - q(k';A^t))/N)`.
pub fn incomplete_sum(ctx: &PrimeContext, j: i64, k: [i64; 2], kp: [i64; 2]) -> Result<Complex64> {
    let (n, r) = (ctx.n, ctx.order);
    let mut s = Complex64::new(0.0, 0.0);
    for t in 1..r as i64 {
        let g = ctx.a_power(t);
        let diff = (ctx.q_twisted(k, &g)? + n - ctx.q_twisted(kp, &g)?) % n;
        s += e_frac(j * t, r) * e_frac(mul_mod(ctx.two_inv, diff, n) as i64, n);
    }
    Ok(s)
}

/// `E_A(j)` from complete sums: `(r/M) sum_{theta(A) = 1} E(chi_1^j theta)`.
pub fn incomplete_via_complete(ctx: &PrimeContext, j: i64, sums: &[Complex64]) -> Complex64 {
    let (big_m, r) = (ctx.group_order, ctx.order);
    let base = chi_one(ctx).pow(j.rem_euclid(r as i64) as u64);
    // theta(A) = 1 exactly for theta = chi_m with r | m.
    let total: Complex64 = (0..big_m / r)
        .map(|i| sums[base.mul(&MultiplicativeCharacter::new(i * r, big_m)).m as usize])
        .sum();
    total * (r as f64 / big_m as f64)
}

/// Frequency pairs used by the Weil-bound scan.
pub const WEIL_PANEL: [([i64; 2], [i64; 2]); 3] =
    [([1, 0], [1, 1]), ([1, 0], [2, 1]), ([1, 1], [0, 1])];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeilRow {
    pub n: u64,
    pub kind: PrimeKind,
    pub m: u64,
    /// `max |E(chi_m)|` over the panel pairs with `Q(k) != Q(k')`.
    pub abs_e: f64,
    pub bound: f64,
    pub slack: f64,
}

pub const WEIL_CSV_HEADER: &str = "N,kind,m,abs_E,bound2sqrtN,slack";

/// Rows for one prime; empty when every panel pair has `Q(k) = Q(k') mod N`.
pub fn weil_rows(ctx: &PrimeContext) -> Result<Vec<WeilRow>> {
    let mut maxima = vec![f64::NEG_INFINITY; ctx.group_order as usize];
    let mut any = false;
    for (k, kp) in WEIL_PANEL {
        if form_gap(ctx, k, kp) == 0 {
            continue;
        }
        any = true;
        for (slot, e) in maxima.iter_mut().zip(complete_sums(ctx, k, kp)?) {
            *slot = slot.max(e.norm());
        }
    }
    if !any {
        return Ok(Vec::new());
    }
    let bound = 2.0 * (ctx.n as f64).sqrt();
    Ok(maxima
        .into_iter()
        .enumerate()
        .map(|(m, abs_e)| WeilRow {
            n: ctx.n,
            kind: ctx.kind,
            m: m as u64,
            abs_e,
            bound,
            slack: bound - abs_e,
        })
        .collect())
}

/// Weil-bound rows for every admissible odd prime in `[nmin, nmax]`.
pub fn weil_scan(a: &ToralAutomorphism, nmin: u64, nmax: u64) -> Result<Vec<WeilRow>> {
    let disc = a.disc().unsigned_abs();
    let primes: Vec<u64> = odd_primes(nmin, nmax)
        .into_iter()
        .filter(|p| !disc.is_multiple_of(*p))
        .collect();
    let blocks = primes
        .par_iter()
        .map(|&n| weil_rows(&PrimeContext::new(*a, n)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

pub fn weil_csv(rows: &[WeilRow]) -> String {
    let mut out = String::from(WEIL_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.n,
            row.kind,
            row.m,
            crate::variance::fmt_float(row.abs_e),
            crate::variance::fmt_float(row.bound),
            crate::variance::fmt_float(row.slack)
        );
    }
    out
}

//! Quantum mechanics on the torus with Planck constant `1/N`: translation
//! operators, `Op_N(f)`, the Weil-representation propagator and the
//! closed-form trace of `Op_N(f) U_N(A^t)`.
//!
//! The propagator is Kelmer's sum
//! `(1/N) sum_n e(omega(n, nB)/2N) T_N(n(I - B))` multiplied by the Legendre
//! symbol `((tr B - 2)/N)`. The sign makes `B -> U_N(B)` an honest
//! representation of `C_A(N)`, so `U_N(A^t) = U_N(A)^t` with no stray phase.
//! Conjugation acts by `U T_N(n) U^* = T_N(nA)`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arithmetic::{omega, GroupElement, Mat2, PrimeContext};
use crate::error::{CatError, Result};
use crate::numeric::{e_frac, HalfPhaseTable};
use crate::observables::{parity, Observable};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense `N x N` complex matrix acting on `H_N = L^2(Z/N)`.
///
/// The inner product on `H_N` carries a uniform `1/N` weight, so the adjoint
/// is the ordinary conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n: usize,
    entries: Vec<Complex64>,
}

impl DenseOperator {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        Self {
            n,
            entries: (0..n * n).map(|idx| f(idx / n, idx % n)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.n + col]
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.n).map(|row| self.get(row, col)).collect()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.entries[i * self.n + i]).sum()
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let n = self.n;
        (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| self.entries[i * n + j] * other.entries[j * n + i])
                    .sum::<Complex64>()
            })
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|x| x * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: Complex64, other: &Self) {
        for (x, y) in self.entries.iter_mut().zip(&other.entries) {
            *x += s * y;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut result = Self::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        result
    }

    /// `max |M^* M - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.n))
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        let n = self.n;
        assert_eq!(n, rhs.n, "dimension mismatch");
        let mut entries = vec![ZERO; n * n];
        entries.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.entries[k * n..(k + 1) * n];
                for (out, b) in row.iter_mut().zip(rhs_row) {
                    *out += a * b;
                }
            }
        });
        DenseOperator { n, entries }
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        let mut out = self.clone();
        out.add_scaled(Complex64::new(1.0, 0.0), rhs);
        out
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        let mut out = self.clone();
        out.add_scaled(Complex64::new(-1.0, 0.0), rhs);
        out
    }
}

/// Wave function on `Z/N` under the `1/N`-weighted inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `<self, other> = (1/N) sum_Q self(Q) conj(other(Q))`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let s: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a * b.conj())
            .sum();
        s / self.dim() as f64
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    /// `<M psi, psi>`.
    pub fn expectation(&self, op: &DenseOperator) -> Complex64 {
        QuantumState::new(op.apply(&self.amplitudes)).inner(self)
    }
}

/// Adds `coeff * T_N(m)` to `op`; only `m mod 2N` matters.
fn add_translation(op: &mut DenseOperator, table: &HalfPhaseTable, m: [u64; 2], coeff: Complex64) {
    let n = op.n as u64;
    let shift = (m[0] % n) as usize;
    let base = m[0] * m[1];
    let step = 2 * m[1];
    let nn = op.n;
    for q in 0..nn {
        let phase = table.get_reduced(base + step * q as u64);
        let col = (q + shift) % nn;
        op.entries[q * nn + col] += coeff * phase;
    }
}

fn reduce_2n(k: [i64; 2], n: usize) -> [u64; 2] {
    let two_n = 2 * n as i64;
    [k[0].rem_euclid(two_n) as u64, k[1].rem_euclid(two_n) as u64]
}

/// `T_N(n) psi(Q) = e(n1 n2 / 2N) e(n2 Q / N) psi(Q + n1)`.
pub fn translation_op(n: usize, k: [i64; 2]) -> DenseOperator {
    assert!(n % 2 == 1, "N must be odd");
    let table = HalfPhaseTable::new(n as u64);
    let mut op = DenseOperator::zeros(n);
    add_translation(&mut op, &table, reduce_2n(k, n), Complex64::new(1.0, 0.0));
    op
}

/// `Op_N(f) = sum_k f_hat(k) T_N(k)`, after checking the support policy.
pub fn quantize_observable(ctx: &PrimeContext, f: &Observable) -> Result<DenseOperator> {
    f.check_support(&ctx.form, ctx.n)?;
    Ok(quantize_unchecked(ctx.n as usize, f))
}

pub fn quantize_unchecked(n: usize, f: &Observable) -> DenseOperator {
    let table = HalfPhaseTable::new(n as u64);
    let mut op = DenseOperator::zeros(n);
    for (k, c) in f.iter() {
        add_translation(&mut op, &table, reduce_2n(k, n), c);
    }
    op
}

/// `tr T_N(k)`: `(-1)^{ab} N` when `k = (aN, bN)`, zero otherwise.
pub fn translation_trace(n: u64, k: [i64; 2]) -> f64 {
    let ni = n as i64;
    if k[0].rem_euclid(ni) != 0 || k[1].rem_euclid(ni) != 0 {
        return 0.0;
    }
    parity([k[0] / ni, k[1] / ni]) * n as f64
}

/// `tr Op_N(f)`, computed from the coefficients alone.
pub fn observable_trace(n: u64, f: &Observable) -> Complex64 {
    f.iter().map(|(k, c)| c * translation_trace(n, k)).sum()
}

/// Lift of `g mod N` to a matrix mod `2N` that is the identity mod 2.
fn lift_mod_2n(m: &Mat2, n: u64) -> Mat2 {
    let lift = |x: u64, diag: bool| {
        let want = if diag { 1 } else { 0 };
        if x % 2 == want {
            x
        } else {
            x + n
        }
    };
    Mat2 {
        a: lift(m.a, true),
        b: lift(m.b, false),
        c: lift(m.c, false),
        d: lift(m.d, true),
    }
}

/// `U_N(g)` for any `g` in `C_A(N)`; the identity maps to `I`.
pub fn group_propagator(ctx: &PrimeContext, g: &GroupElement) -> DenseOperator {
    let n = ctx.n as usize;
    if ctx.is_identity(g) {
        return DenseOperator::identity(n);
    }
    let two_n = 2 * ctx.n;
    let b = lift_mod_2n(&g.m, ctx.n);
    let i_minus_b = Mat2 {
        a: (two_n + 1 - b.a) % two_n,
        b: two_n - b.b,
        c: two_n - b.c,
        d: (two_n + 1 - b.d) % two_n,
    };
    let table = HalfPhaseTable::new(ctx.n);
    let sign = f64::from(ctx.weil_sign(g));
    let scale = Complex64::new(sign / n as f64, 0.0);
    let mut op = DenseOperator::zeros(n);
    for n1 in 0..ctx.n {
        for n2 in 0..ctx.n {
            let nb = b.act([n1, n2], two_n);
            let w = omega([n1 as i64, n2 as i64], [nb[0] as i64, nb[1] as i64]);
            let m = i_minus_b.act([n1, n2], two_n);
            add_translation(&mut op, &table, m, scale * table.get(w));
        }
    }
    op
}

/// `U_N(A^t)`; `t = 0 mod ord(A, N)` gives the identity.
pub fn propagator(ctx: &PrimeContext, t: i64) -> DenseOperator {
    group_propagator(ctx, &ctx.a_power(t))
}

/// `max |U T_N(n) U^* - T_N(nA)|` with `U = U_N(A)`.
pub fn egorov_check(ctx: &PrimeContext, k: [i64; 2]) -> f64 {
    let u = propagator(ctx, 1);
    egorov_deviation(ctx, &u, k)
}

pub fn egorov_deviation(ctx: &PrimeContext, u: &DenseOperator, k: [i64; 2]) -> f64 {
    let n = ctx.n as usize;
    let conj = &(u * &translation_op(n, k)) * &u.adjoint();
    conj.max_abs_diff(&translation_op(n, ctx.automorphism.act(k)))
}

/// `tr{Op_N(f) U_N(g)}` in closed form:
/// `((tr g - 2)/N) sum_k (-1)^{k1k2} f_hat(k) e(2bar q(k; g) / N)`.
pub fn trace_group(ctx: &PrimeContext, f: &Observable, g: &GroupElement) -> Result<Complex64> {
    let mu = ctx.twist_multiplier(g)?;
    let n = ctx.n;
    let scale = crate::modular::mul_mod(ctx.two_inv, mu, n);
    let sum: Complex64 = f
        .iter()
        .map(|(k, c)| {
            let q = crate::modular::mul_mod(ctx.form.eval_mod(k, n), scale, n);
            c * parity(k) * e_frac(q as i64, n)
        })
        .sum();
    Ok(sum * f64::from(ctx.weil_sign(g)))
}

/// `tr{Op_N(f) U_N(A^t)}` by the closed form; `O(|supp f|)`.
pub fn trace_kelmer(ctx: &PrimeContext, f: &Observable, t: i64) -> Result<Complex64> {
    if t.rem_euclid(ctx.order as i64) == 0 {
        return Err(CatError::IdentityPower { t });
    }
    trace_group(ctx, f, &ctx.a_power(t))
}

/// `tr{Op_N(f) U^t}` for every `t mod r`, with `t = 0` giving `tr Op_N(f)`.
pub fn trace_table(ctx: &PrimeContext, f: &Observable) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(ctx.order as usize);
    out.push(observable_trace(ctx.n, f));
    for t in 1..ctx.order as i64 {
        out.push(trace_kelmer(ctx, f, t).expect("t != 0 mod r"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::ToralAutomorphism;

    fn ctx(n: u64) -> PrimeContext {
        PrimeContext::new(ToralAutomorphism::new(3, 2, 4, 3).unwrap(), n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn panel() -> Observable {
        Observable::new([
            ([1, 0], c(1.0, 0.0)),
            ([1, 1], c(0.3, -0.2)),
            ([0, 1], c(-0.5, 0.1)),
            ([2, 1], c(0.25, 0.0)),
            ([-1, 2], c(0.0, 0.7)),
        ])
        .unwrap()
    }

    #[test]
    fn translation_basics() {
        let n = 7;
        assert_eq!(translation_op(n, [0, 0]), DenseOperator::identity(n));
        let t01 = translation_op(n, [0, 1]);
        for q in 0..n {
            let expected = crate::numeric::e(q as f64 / n as f64);
            assert!((t01.get(q, q) - expected).norm() < 1e-14);
        }
        for k in [[1, 0], [2, 3], [-3, 5], [7, 1], [4, -9]] {
            let t = translation_op(n, k);
            assert!(t.unitarity_defect() < 1e-12 * n as f64);
            // T(k)T(-k) = I exactly; the sign only appears once k is
            // reduced by a multiple of N.
            let tr = (&t * &translation_op(n, [-k[0], -k[1]])).trace();
            assert!((tr - c(n as f64, 0.0)).norm() < 1e-12, "k={k:?}");
            let shifted = [n as i64 - k[0], n as i64 - k[1]];
            let tr = (&t * &translation_op(n, shifted)).trace();
            // T(k) T(m) = e(omega(k, m)/2N) T(k + m) and tr T_N((N, N)) = -N.
            assert!(
                (tr + c(n as f64, 0.0) * e_frac(omega(k, shifted), 2 * n as u64)).norm() < 1e-12
            );
            assert!((t.trace() - c(translation_trace(n as u64, k), 0.0)).norm() < 1e-12);
        }
        let t = translation_op(n, [7, 14]);
        assert!((t.trace() - c(n as f64 * parity([1, 2]), 0.0)).norm() < 1e-12);
        let t = translation_op(n, [7, 7]);
        assert!((t.trace() - c(-(n as f64), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn observable_quantization() {
        let cx = ctx(7);
        let op = quantize_observable(&cx, &Observable::cos_x1()).unwrap();
        let expected = &translation_op(7, [1, 0]) + &translation_op(7, [-1, 0]);
        assert!(op.max_abs_diff(&expected) < 1e-15);
        assert!(op.max_abs_diff(&op.adjoint()) < 1e-14);
        let zero = quantize_observable(&cx, &Observable::zero()).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let p = quantize_observable(&ctx(31), &panel()).unwrap();
        assert!(p.trace().norm() < 1e-12);
        assert!(p.max_abs_diff(&p.adjoint()) < 1e-14);
        assert!(matches!(
            quantize_observable(&ctx(3), &Observable::cos_x1()),
            Err(CatError::SupportTooLarge { .. })
        ));
    }

    #[test]
    fn propagator_unitary_and_periodic() {
        for n in [5u64, 7, 11, 13] {
            let cx = ctx(n);
            let u = propagator(&cx, 1);
            assert!(u.unitarity_defect() <= 1e-12 * n as f64);
            let ur = u.pow(cx.order);
            assert!(ur.max_abs_diff(&DenseOperator::identity(n as usize)) < 1e-10);
            for t in 2..cx.order as i64 {
                assert!(
                    propagator(&cx, t).max_abs_diff(&u.pow(t as u64)) < 1e-10,
                    "N={n} t={t}"
                );
            }
            assert_eq!(propagator(&cx, 0), DenseOperator::identity(n as usize));
            assert!(propagator(&cx, -1).max_abs_diff(&u.adjoint()) < 1e-12);
        }
        let cx = ctx(7);
        let u = propagator(&cx, 1);
        assert!((&(&u * &u) * &u).max_abs_diff(&DenseOperator::identity(7)) < 1e-12);
    }

    #[test]
    fn group_propagator_is_a_representation() {
        for n in [5u64, 7, 13] {
            let cx = ctx(n);
            let u0 = group_propagator(&cx, &cx.generator);
            let mut acc = DenseOperator::identity(n as usize);
            for i in 0..cx.group_order {
                let ui = group_propagator(&cx, &cx.generator_power(i));
                assert!(ui.max_abs_diff(&acc) < 1e-10, "N={n} i={i}");
                acc = &acc * &u0;
            }
            let a_via_g = group_propagator(&cx, &cx.generator_power(cx.log_a));
            assert!(a_via_g.max_abs_diff(&propagator(&cx, 1)) < 1e-12);
        }
    }

    #[test]
    fn egorov_exact() {
        let cx = ctx(7);
        assert!(egorov_check(&cx, [0, 0]) < 1e-14);
        assert!(egorov_check(&cx, [1, 0]) < 1e-12);
        for n1 in -3..=3 {
            for n2 in -3..=3 {
                assert!(egorov_check(&cx, [n1, n2]) < 1e-12, "n=({n1},{n2})");
            }
        }
    }

    #[test]
    fn kelmer_trace_matches_dense() {
        for n in [5u64, 7, 11, 13] {
            let cx = ctx(n);
            for f in [Observable::cos_x1(), panel()] {
                if f.check_support(&cx.form, n).is_err() {
                    continue;
                }
                let op = quantize_observable(&cx, &f).unwrap();
                for t in 1..cx.order as i64 {
                    let dense = op.trace_product(&propagator(&cx, t));
                    let fast = trace_kelmer(&cx, &f, t).unwrap();
                    assert!(
                        (dense - fast).norm() <= 1e-10 * f.l1_norm() * n as f64,
                        "N={n} t={t}"
                    );
                }
            }
        }
        let cx = ctx(7);
        assert_eq!(
            trace_kelmer(&cx, &panel(), 3),
            Err(CatError::IdentityPower { t: 3 })
        );
    }

    #[test]
    fn cosine_trace_closed_form() {
        let cx = ctx(11);
        for t in 1..cx.order as i64 {
            let g = cx.a_power(t);
            let q = cx.q_twisted([1, 0], &g).unwrap();
            let arg = crate::modular::mul_mod(cx.two_inv, q, cx.n) as f64 / cx.n as f64;
            // Q(k) = Q(-k): both frequencies carry the same phase.
            let expected = crate::numeric::e(arg) * 2.0 * f64::from(cx.weil_sign(&g));
            let tr = trace_kelmer(&cx, &Observable::cos_x1(), t).unwrap();
            assert!((tr - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn cocycle_traces_vanish() {
        let cx = ctx(13);
        let f = Observable::cocycle(&Observable::cos_x1(), &cx.automorphism);
        for t in 1..cx.order as i64 {
            assert!(trace_kelmer(&cx, &f, t).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn states() {
        let n = 5;
        let e0 = QuantumState::new(
            (0..n)
                .map(|q| {
                    if q == 0 {
                        c((n as f64).sqrt(), 0.0)
                    } else {
                        ZERO
                    }
                })
                .collect(),
        );
        assert!((e0.norm() - 1.0).abs() < 1e-15);
        let t = translation_op(n, [0, 2]);
        assert!((e0.expectation(&t) - c(1.0, 0.0)).norm() < 1e-14);
    }
}

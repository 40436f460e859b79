//! Eigenspaces of `U_N(A)` and the Hecke eigenbasis, both obtained by
//! averaging over a finite cyclic group rather than by an eigensolver.
//!
//! `P_j = (1/r) sum_t e(-jt/r) U^t` projects onto the eigenphase `j/r`;
//! `Pi_m = (1/M) sum_i conj(e(mi/M)) U_N(g0^i)` projects onto the joint
//! eigenspace of the centralizer on which `U_N(g0)` acts by `e(m/M)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arithmetic::PrimeContext;
use crate::error::{CatError, Result};
use crate::numeric::{e, e_frac};
use crate::observables::Observable;
use crate::quantization::{
    group_propagator, propagator, quantize_observable, DenseOperator, QuantumState,
};

/// Column-norm threshold for rank extraction, in units of `N`.
const RANK_THRESHOLD: f64 = 1e-6;
/// Idempotency residual tolerated in a projector, in units of `N`.
const PROJECTOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SpectralEntry {
    /// The eigenphase is `j / r`.
    pub j: u64,
    pub dim: usize,
    pub projector: DenseOperator,
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    pub r: u64,
    pub entries: Vec<SpectralEntry>,
}

impl SpectralData {
    pub fn dims(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.dim).collect()
    }

    /// The phase classes whose dimension differs from the majority value,
    /// as `(j, dim)`.
    pub fn exceptional(&self) -> Vec<(u64, usize)> {
        let dims = self.dims();
        let generic = mode(&dims);
        self.entries
            .iter()
            .filter(|e| e.dim != generic)
            .map(|e| (e.j, e.dim))
            .collect()
    }

    /// `tr(Op_N(f) P_j)` for every `j`.
    pub fn weights(&self, op: &DenseOperator) -> Vec<Complex64> {
        self.entries
            .par_iter()
            .map(|e| op.trace_product(&e.projector))
            .collect()
    }
}

fn mode(values: &[usize]) -> usize {
    let max = values.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max + 1];
    for &v in values {
        counts[v] += 1;
    }
    // ties resolve to the smaller value
    (0..=max)
        .max_by_key(|&v| (counts[v], std::cmp::Reverse(v)))
        .unwrap_or(0)
}

/// `U^t` for `t = 0..r`, by repeated multiplication.
fn propagator_powers(ctx: &PrimeContext) -> Vec<DenseOperator> {
    let u = propagator(ctx, 1);
    let mut powers = Vec::with_capacity(ctx.order as usize);
    powers.push(DenseOperator::identity(ctx.n as usize));
    for t in 1..ctx.order as usize {
        let next = &powers[t - 1] * &u;
        powers.push(next);
    }
    powers
}

/// `sum_i coeff(i) * ops[i]`, entry by entry.
fn combine(ops: &[DenseOperator], coeff: impl Fn(usize) -> Complex64 + Sync) -> DenseOperator {
    let mut out = DenseOperator::zeros(ops[0].dim());
    for (i, op) in ops.iter().enumerate() {
        out.add_scaled(coeff(i), op);
    }
    out
}

/// Eigenphase projectors of `U_N(A)`; fails with `ProjectorDefect` when a
/// projector is not idempotent, which would point at a phase error upstream.
pub fn spectral_projectors(ctx: &PrimeContext) -> Result<SpectralData> {
    let r = ctx.order;
    let n = ctx.n as f64;
    let powers = propagator_powers(ctx);
    let entries = (0..r)
        .into_par_iter()
        .map(|j| {
            let p = combine(&powers, |t| e_frac(-((j * t as u64) as i64), r) / r as f64);
            let residual = (&p * &p).max_abs_diff(&p);
            if residual > PROJECTOR_TOL * n {
                return Err(CatError::ProjectorDefect { residual });
            }
            let dim = p.trace().re.round() as usize;
            Ok(SpectralEntry {
                j,
                dim,
                projector: p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralData { r, entries })
}

/// A Hecke eigenvector with its character index and `U`-eigenphase `j/r`.
#[derive(Debug, Clone)]
pub struct HeckeVector {
    pub m: u64,
    pub j: u64,
    pub state: QuantumState,
}

impl HeckeVector {
    pub fn phase(&self, r: u64) -> f64 {
        self.j as f64 / r as f64
    }
}

#[derive(Debug, Clone)]
pub struct HeckeBasis {
    pub r: u64,
    pub vectors: Vec<HeckeVector>,
}

impl HeckeBasis {
    /// `max |<psi_a, psi_b> - delta_ab|`.
    pub fn gram_defect(&self) -> f64 {
        let v = &self.vectors;
        (0..v.len())
            .into_par_iter()
            .map(|a| {
                (0..v.len())
                    .map(|b| {
                        let target = if a == b { 1.0 } else { 0.0 };
                        (v[a].state.inner(&v[b].state) - target).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Rank of each character projector, indexed by `m`.
    pub fn ranks(&self, group_order: u64) -> Vec<usize> {
        let mut ranks = vec![0; group_order as usize];
        for v in &self.vectors {
            ranks[v.m as usize] += 1;
        }
        ranks
    }
}

/// Orthonormal basis of the column space of `p` by pivoted modified
/// Gram-Schmidt; vectors come back with `(1/N)`-norm one.
fn column_space(p: &DenseOperator) -> Vec<Vec<Complex64>> {
    let n = p.dim();
    let threshold = RANK_THRESHOLD * n as f64;
    let mut residuals: Vec<Vec<Complex64>> = (0..n).map(|c| p.column(c)).collect();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    loop {
        let (pivot, norm) = residuals
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()))
            .fold(
                (0, 0.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if norm <= threshold || basis.len() == n {
            break;
        }
        let q: Vec<Complex64> = residuals[pivot].iter().map(|x| x / norm).collect();
        for v in residuals.iter_mut() {
            let overlap: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in v.iter_mut().zip(&q) {
                *x -= overlap * a;
            }
        }
        basis.push(q);
    }
    let scale = (n as f64).sqrt();
    basis
        .into_iter()
        .map(|q| q.into_iter().map(|x| x * scale).collect())
        .collect()
}

/// Joint eigenbasis of `{U_N(B) : B in C_A(N)}`.
pub fn hecke_basis(ctx: &PrimeContext) -> Result<HeckeBasis> {
    let m_order = ctx.group_order;
    let u0 = group_propagator(ctx, &ctx.generator);
    let mut powers = Vec::with_capacity(m_order as usize);
    powers.push(DenseOperator::identity(ctx.n as usize));
    for i in 1..m_order as usize {
        let next = &powers[i - 1] * &u0;
        powers.push(next);
    }
    // U = U_N(g0)^s, so U acts on the m-th block by e(m s / M) = e(j / r).
    let step = ctx.log_a * ctx.order / m_order;
    let blocks = (0..m_order)
        .into_par_iter()
        .map(|m| {
            let pi = combine(&powers, |i| {
                e_frac(-((m * i as u64 % m_order) as i64), m_order) / m_order as f64
            });
            let expected = pi.trace().re.round() as usize;
            let vectors = column_space(&pi);
            if vectors.len() != expected {
                return Err(CatError::RankMismatch {
                    total: vectors.len(),
                    n: expected,
                });
            }
            let j = (m * step) % ctx.order;
            Ok(vectors
                .into_iter()
                .map(|v| HeckeVector {
                    m,
                    j,
                    state: QuantumState::new(v),
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let vectors: Vec<HeckeVector> = blocks.into_iter().flatten().collect();
    if vectors.len() as u64 != ctx.n {
        return Err(CatError::RankMismatch {
            total: vectors.len(),
            n: ctx.n as usize,
        });
    }
    Ok(HeckeBasis {
        r: ctx.order,
        vectors,
    })
}

/// Diagonal matrix elements as `(phase j/r, <Op_N(f) psi, psi>)`; the
/// imaginary residue is dropped after a debug check.
pub fn matrix_elements(
    ctx: &PrimeContext,
    f: &Observable,
    basis: &HeckeBasis,
) -> Result<Vec<(f64, f64)>> {
    let op = quantize_observable(ctx, f)?;
    Ok(basis
        .vectors
        .par_iter()
        .map(|v| {
            let value = v.state.expectation(&op);
            debug_assert!(
                value.im.abs() <= 1e-9 * (1.0 + f.l1_norm()),
                "non-real matrix element {value}"
            );
            (v.phase(basis.r), value.re)
        })
        .collect())
}

/// `sum_j |<Op_N(f) psi_j, psi_j>|^2` over the Hecke basis.
pub fn hecke_variance(ctx: &PrimeContext, f: &Observable) -> Result<f64> {
    let basis = hecke_basis(ctx)?;
    Ok(matrix_elements(ctx, f, &basis)?
        .iter()
        .map(|(_, x)| x * x)
        .sum())
}

/// `U psi` compared with `e(theta) psi`, in the `(1/N)` norm.
pub fn eigen_residual(u: &DenseOperator, v: &HeckeVector, r: u64) -> f64 {
    let applied = u.apply(&v.state.amplitudes);
    let phase = e(v.phase(r));
    let diff: Vec<Complex64> = applied
        .iter()
        .zip(&v.state.amplitudes)
        .map(|(a, b)| a - phase * b)
        .collect();
    QuantumState::new(diff).norm()
}

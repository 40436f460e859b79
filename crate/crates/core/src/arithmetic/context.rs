use std::fmt;

use serde::Serialize;

use super::automorphism::{Mat2, QuadraticForm, ToralAutomorphism};
use super::quadext::{QuadExtElement, QuadRing};
use crate::error::{CatError, Result};
use crate::modular::{divisors, inv_mod, is_prime, legendre, mul_mod, prime_factors, reduce};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimeKind {
    /// `A` diagonalizable over `F_N`; centralizer of order `N - 1`.
    Split,
    /// Eigenvalues in the quadratic extension; centralizer of order `N + 1`.
    Inert,
}

impl PrimeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrimeKind::Split => "split",
            PrimeKind::Inert => "inert",
        }
    }
}

impl fmt::Display for PrimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Element of the centralizer of `A` in SL2(Z/N), with its eigenvalue on the
/// eigenline where `A` acts by `lambda_A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GroupElement {
    pub m: Mat2,
    pub lambda: QuadExtElement,
}

/// Arithmetic data attached to `(A, N)` for an odd prime `N` not dividing `disc(Q)`.
#[derive(Debug, Clone, Serialize)]
pub struct PrimeContext {
    pub automorphism: ToralAutomorphism,
    pub form: QuadraticForm,
    pub n: u64,
    pub kind: PrimeKind,
    /// `disc(Q) mod N`, the `D` of `F_N[sqrt D]` in both cases.
    pub d: u64,
    /// `ord(A, N)`.
    pub order: u64,
    /// `|C_A(N)|`.
    pub group_order: u64,
    pub generator: GroupElement,
    /// `s` with `generator^s = A mod N`.
    pub log_a: u64,
    /// `(tr A + sqrt D) / 2`.
    pub lambda_a: QuadExtElement,
    pub two_inv: u64,
    pub ring: QuadRing,
    pub a_mod: Mat2,
}

fn check_modulus(a: &ToralAutomorphism, n: u64) -> Result<()> {
    if n.is_multiple_of(2) {
        return Err(CatError::NotOdd(n));
    }
    if !is_prime(n) {
        return Err(CatError::NotPrime(n));
    }
    if a.disc().rem_euclid(n as i64) == 0 {
        return Err(CatError::DividesDiscriminant { n, disc: a.disc() });
    }
    Ok(())
}

fn classify(a: &ToralAutomorphism, n: u64) -> (PrimeKind, u64) {
    if legendre(a.disc(), n) == 1 {
        (PrimeKind::Split, n - 1)
    } else {
        (PrimeKind::Inert, n + 1)
    }
}

/// Smallest `d | group_order` with `A^d = I mod N`, by fast exponentiation.
fn order_dividing(a_mod: &Mat2, group_order: u64, n: u64) -> u64 {
    divisors(group_order)
        .into_iter()
        .find(|&d| a_mod.pow(d, n).is_identity(n))
        .expect("A^|C_A(N)| = I by Lagrange")
}

/// `ord(A, N)`: least `r >= 1` with `A^r = I mod N`.
pub fn order_mod(a: &ToralAutomorphism, n: u64) -> Result<u64> {
    check_modulus(a, n)?;
    let (_, group_order) = classify(a, n);
    Ok(order_dividing(&a.to_mod(n), group_order, n))
}

impl PrimeContext {
    pub fn new(automorphism: ToralAutomorphism, n: u64) -> Result<Self> {
        check_modulus(&automorphism, n)?;
        let (kind, group_order) = classify(&automorphism, n);
        let d = reduce(automorphism.disc(), n);
        let ring = QuadRing::new(n, d);
        let two_inv = inv_mod(2, n).expect("N odd");
        let tr = reduce(automorphism.trace(), n);
        let lambda_a = QuadExtElement::new(mul_mod(tr, two_inv, n), two_inv);
        let a_mod = automorphism.to_mod(n);

        let lambda0 = find_generator(&ring, group_order)?;
        let mut log_a = None;
        let mut x = ring.one();
        for s in 0..group_order {
            if x == lambda_a {
                log_a = Some(s);
                break;
            }
            x = ring.mul(x, lambda0);
        }
        let log_a = log_a.ok_or(CatError::NoGenerator { order: group_order })?;
        let order = order_dividing(&a_mod, group_order, n);

        let mut ctx = Self {
            automorphism,
            form: automorphism.quadratic_form(),
            n,
            kind,
            d,
            order,
            group_order,
            generator: GroupElement {
                m: Mat2::IDENTITY,
                lambda: lambda0,
            },
            log_a,
            lambda_a,
            two_inv,
            ring,
            a_mod,
        };
        ctx.generator = ctx.element_from_lambda(lambda0);
        Ok(ctx)
    }

    /// The centralizer element `alpha I + beta A` whose eigenvalue is `lambda`.
    ///
    /// With `sqrt D = 2 lambda_A - tr A`, `u + v sqrt D = (u - v tr A) + 2v lambda_A`.
    pub fn element_from_lambda(&self, lambda: QuadExtElement) -> GroupElement {
        let n = self.n;
        let tr = reduce(self.automorphism.trace(), n);
        let alpha = (lambda.u + n - mul_mod(lambda.v, tr, n)) % n;
        let beta = mul_mod(2, lambda.v, n);
        let a = self.a_mod;
        let m = Mat2 {
            a: (alpha + mul_mod(beta, a.a, n)) % n,
            b: mul_mod(beta, a.b, n),
            c: mul_mod(beta, a.c, n),
            d: (alpha + mul_mod(beta, a.d, n)) % n,
        };
        GroupElement { m, lambda }
    }

    /// `g0^i`.
    pub fn generator_power(&self, i: u64) -> GroupElement {
        let lambda = self.ring.pow(self.generator.lambda, i % self.group_order);
        self.element_from_lambda(lambda)
    }

    /// `A^t mod N` as a group element; `t` may be negative.
    pub fn a_power(&self, t: i64) -> GroupElement {
        let e = t.rem_euclid(self.order as i64) as u64;
        self.element_from_lambda(self.ring.pow(self.lambda_a, e))
    }

    /// All of `C_A(N)`, listed as `g0^0, g0^1, ..., g0^(M-1)`.
    pub fn group_elements(&self) -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(self.group_order as usize);
        let mut lambda = self.ring.one();
        for _ in 0..self.group_order {
            out.push(self.element_from_lambda(lambda));
            lambda = self.ring.mul(lambda, self.generator.lambda);
        }
        out
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        g.lambda == self.ring.one()
    }

    /// Scalar `mu(g)` with `q(x; g) = mu(g) Q(x)`:
    /// `(1 + lambda) / ((1 - lambda)(lambda_A - lambda_A^{-1}))`.
    pub fn twist_multiplier(&self, g: &GroupElement) -> Result<u64> {
        if self.is_identity(g) {
            return Err(CatError::IdentityElement);
        }
        let ring = &self.ring;
        let one = ring.one();
        let lambda_a_inv = ring.inv(self.lambda_a).ok_or(CatError::DegenerateLambda)?;
        let gap = ring.sub(self.lambda_a, lambda_a_inv);
        let num = ring.add(one, g.lambda);
        let den = ring.mul(ring.sub(one, g.lambda), gap);
        let mu = ring.div(num, den).ok_or(CatError::IdentityElement)?;
        debug_assert!(mu.is_scalar(), "twist multiplier must lie in F_N");
        Ok(mu.u)
    }

    /// `q(x; g)` through the closed form `Q(x) mu(g)`.
    pub fn q_closed(&self, x: [i64; 2], g: &GroupElement) -> Result<u64> {
        let mu = self.twist_multiplier(g)?;
        Ok(mul_mod(self.form.eval_mod(x, self.n), mu, self.n))
    }

    /// `q(x; g) = omega(y, yg)` with `y = x (g - I)^{-1}`, evaluated mod N.
    pub fn q_matrix(&self, x: [i64; 2], g: &GroupElement) -> Result<u64> {
        let n = self.n;
        let inv =
            g.m.sub_identity(n)
                .inverse(n)
                .ok_or(CatError::IdentityElement)?;
        let x_mod = [reduce(x[0], n), reduce(x[1], n)];
        let y = inv.act(x_mod, n);
        let yg = g.m.act(y, n);
        let w = mul_mod(y[0], yg[1], n) + n - mul_mod(y[1], yg[0], n);
        Ok(w % n)
    }

    /// `q(x; g)` by both routes; disagreement is reported as an error.
    pub fn q_twisted(&self, x: [i64; 2], g: &GroupElement) -> Result<u64> {
        let matrix = self.q_matrix(x, g)?;
        let closed = self.q_closed(x, g)?;
        if matrix != closed {
            return Err(CatError::RouteMismatch { closed, matrix });
        }
        Ok(matrix)
    }

    /// Legendre symbol `((tr g - 2) / N)`, the sign turning Kelmer's
    /// propagator formula into a representation of `C_A(N)`.
    pub fn weil_sign(&self, g: &GroupElement) -> i8 {
        legendre(g.m.trace(self.n) as i64 - 2, self.n)
    }

    pub fn summary(&self) -> ContextSummary {
        ContextSummary {
            matrix: self.automorphism.to_string(),
            n: self.n,
            kind: self.kind,
            disc: self.automorphism.disc(),
            d: self.d,
            order: self.order,
            group_order: self.group_order,
            generator: self.generator.m,
            log_a: self.log_a,
            lambda_a: self.lambda_a,
        }
    }
}

/// Norm-one generator, trying `(t - sqrt D)/(t + sqrt D)` for `t = 0, 1, ...`.
fn find_generator(ring: &QuadRing, group_order: u64) -> Result<QuadExtElement> {
    let factors = prime_factors(group_order);
    let sqrt_d = ring.sqrt_d();
    for t in 0..ring.n {
        let t = ring.scalar(t);
        let Some(x) = ring.div(ring.sub(t, sqrt_d), ring.add(t, sqrt_d)) else {
            continue;
        };
        if factors
            .iter()
            .all(|&p| ring.pow(x, group_order / p) != ring.one())
        {
            return Ok(x);
        }
    }
    Err(CatError::NoGenerator { order: group_order })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContextSummary {
    pub matrix: String,
    pub n: u64,
    pub kind: PrimeKind,
    pub disc: i64,
    pub d: u64,
    pub order: u64,
    pub group_order: u64,
    pub generator: Mat2,
    pub log_a: u64,
    pub lambda_a: QuadExtElement,
}

impl fmt::Display for ContextSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.generator;
        write!(
            f,
            "A={} N={} kind={} r={} M={} disc={} D={} g0=[[{},{}],[{},{}]] s={}",
            self.matrix,
            self.n,
            self.kind,
            self.order,
            self.group_order,
            self.disc,
            self.d,
            g.a,
            g.b,
            g.c,
            g.d,
            self.log_a
        )
    }
}

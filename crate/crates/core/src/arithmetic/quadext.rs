use serde::Serialize;

use crate::modular::{inv_mod, mul_mod};

/// `u + v sqrt(D)` in `F_N[X]/(X^2 - D)`.
///
/// When `D` is a square mod N the ring splits as `F_N x F_N` and is not a
/// field; elements of nonzero norm are still units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct QuadExtElement {
    pub u: u64,
    pub v: u64,
}

impl QuadExtElement {
    pub const fn new(u: u64, v: u64) -> Self {
        Self { u, v }
    }

    pub fn is_scalar(&self) -> bool {
        self.v == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadRing {
    pub n: u64,
    pub d: u64,
}

impl QuadRing {
    pub fn new(n: u64, d: u64) -> Self {
        Self { n, d: d % n }
    }

    pub fn one(&self) -> QuadExtElement {
        QuadExtElement::new(1 % self.n, 0)
    }

    pub fn scalar(&self, s: u64) -> QuadExtElement {
        QuadExtElement::new(s % self.n, 0)
    }

    pub fn sqrt_d(&self) -> QuadExtElement {
        QuadExtElement::new(0, 1)
    }

    pub fn add(&self, x: QuadExtElement, y: QuadExtElement) -> QuadExtElement {
        QuadExtElement::new((x.u + y.u) % self.n, (x.v + y.v) % self.n)
    }

    pub fn neg(&self, x: QuadExtElement) -> QuadExtElement {
        QuadExtElement::new((self.n - x.u) % self.n, (self.n - x.v) % self.n)
    }

    pub fn sub(&self, x: QuadExtElement, y: QuadExtElement) -> QuadExtElement {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: QuadExtElement, y: QuadExtElement) -> QuadExtElement {
        let n = self.n;
        let uu = mul_mod(x.u, y.u, n);
        let dvv = mul_mod(self.d, mul_mod(x.v, y.v, n), n);
        let uv = mul_mod(x.u, y.v, n);
        let vu = mul_mod(x.v, y.u, n);
        QuadExtElement::new((uu + dvv) % n, (uv + vu) % n)
    }

    pub fn scale(&self, x: QuadExtElement, s: u64) -> QuadExtElement {
        QuadExtElement::new(mul_mod(x.u, s, self.n), mul_mod(x.v, s, self.n))
    }

    pub fn conj(&self, x: QuadExtElement) -> QuadExtElement {
        QuadExtElement::new(x.u, (self.n - x.v) % self.n)
    }

    pub fn norm(&self, x: QuadExtElement) -> u64 {
        let n = self.n;
        let uu = mul_mod(x.u, x.u, n);
        let dvv = mul_mod(self.d, mul_mod(x.v, x.v, n), n);
        (uu + n - dvv) % n
    }

    pub fn inv(&self, x: QuadExtElement) -> Option<QuadExtElement> {
        let norm_inv = inv_mod(self.norm(x), self.n)?;
        Some(self.scale(self.conj(x), norm_inv))
    }

    pub fn div(&self, x: QuadExtElement, y: QuadExtElement) -> Option<QuadExtElement> {
        Some(self.mul(x, self.inv(y)?))
    }

    pub fn pow(&self, x: QuadExtElement, mut e: u64) -> QuadExtElement {
        let mut result = self.one();
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn norm_is_multiplicative(
            (n, d) in prop::sample::select(vec![(5u64, 2u64), (7, 4), (11, 10), (101, 32)]),
            u1 in 0u64..200, v1 in 0u64..200, u2 in 0u64..200, v2 in 0u64..200,
        ) {
            let ring = QuadRing::new(n, d);
            let x = QuadExtElement::new(u1 % n, v1 % n);
            let y = QuadExtElement::new(u2 % n, v2 % n);
            let xy = ring.mul(x, y);
            prop_assert_eq!(ring.norm(xy), mul_mod(ring.norm(x), ring.norm(y), n));
            prop_assert_eq!(xy, ring.mul(y, x));
            if let Some(xi) = ring.inv(x) {
                prop_assert_eq!(ring.mul(x, xi), ring.one());
            } else {
                prop_assert_eq!(ring.norm(x), 0);
            }
        }
    }

    #[test]
    fn sqrt_d_squares_to_d() {
        let ring = QuadRing::new(5, 32);
        let s = ring.sqrt_d();
        assert_eq!(ring.mul(s, s), ring.scalar(2));
        assert_eq!(ring.pow(s, 4), ring.scalar(4));
        // inert: D = 2 is a non-residue mod 5 so every nonzero element is a unit
        for u in 0..5 {
            for v in 0..5 {
                let x = QuadExtElement::new(u, v);
                assert_eq!(ring.inv(x).is_some(), (u, v) != (0, 0));
            }
        }
    }
}

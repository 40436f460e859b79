use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{CatError, Result};
use crate::modular::reduce;

/// Hyperbolic `A` in SL2(Z) with `A = I mod 2`, acting on row vectors `x -> xA`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ToralAutomorphism {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl ToralAutomorphism {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a * d - b * c;
        if det != 1 {
            return Err(CatError::NotUnimodular { det });
        }
        let trace = a + d;
        if trace.abs() <= 2 {
            return Err(CatError::NotHyperbolic { trace: trace.abs() });
        }
        let even = |x: i64| x.rem_euclid(2) == 0;
        if even(a) || even(d) || !even(b) || !even(c) {
            return Err(CatError::BadParity);
        }
        Ok(Self { a, b, c, d })
    }

    pub fn from_entries(e: [i64; 4]) -> Result<Self> {
        Self::new(e[0], e[1], e[2], e[3])
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn disc(&self) -> i64 {
        self.trace() * self.trace() - 4
    }

    pub fn quadratic_form(&self) -> QuadraticForm {
        QuadraticForm {
            alpha: self.b,
            beta: self.d - self.a,
            gamma: -self.c,
            disc: self.disc(),
        }
    }

    /// `k -> kA`.
    pub fn act(&self, k: [i64; 2]) -> [i64; 2] {
        [k[0] * self.a + k[1] * self.c, k[0] * self.b + k[1] * self.d]
    }

    /// `k -> kA^{-1}`.
    pub fn act_inverse(&self, k: [i64; 2]) -> [i64; 2] {
        [
            k[0] * self.d - k[1] * self.c,
            -k[0] * self.b + k[1] * self.a,
        ]
    }

    pub fn to_mod(&self, n: u64) -> Mat2 {
        Mat2 {
            a: reduce(self.a, n),
            b: reduce(self.b, n),
            c: reduce(self.c, n),
            d: reduce(self.d, n),
        }
    }
}

impl fmt::Display for ToralAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// Parses `a,b,c,d` (row-major).
impl FromStr for ToralAutomorphism {
    type Err = CatError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<i64> = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| CatError::ObservableFormat(format!("bad matrix `{s}`")))?;
        let entries: [i64; 4] = parts
            .try_into()
            .map_err(|_| CatError::ObservableFormat(format!("matrix `{s}` needs 4 entries")))?;
        Self::from_entries(entries)
    }
}

/// `alpha x1^2 + beta x1 x2 + gamma x2^2`, the form `omega(x, xA)` preserved by `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadraticForm {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
    pub disc: i64,
}

impl QuadraticForm {
    pub fn eval(&self, x: [i64; 2]) -> i64 {
        self.alpha * x[0] * x[0] + self.beta * x[0] * x[1] + self.gamma * x[1] * x[1]
    }

    pub fn eval_mod(&self, x: [i64; 2], n: u64) -> u64 {
        let (x0, x1) = (x[0] as i128, x[1] as i128);
        let v = self.alpha as i128 * x0 * x0
            + self.beta as i128 * x0 * x1
            + self.gamma as i128 * x1 * x1;
        v.rem_euclid(n as i128) as u64
    }
}

/// Standard symplectic form `x1 y2 - x2 y1`.
pub fn omega(x: [i64; 2], y: [i64; 2]) -> i64 {
    x[0] * y[1] - x[1] * y[0]
}

/// 2x2 matrix of residues; the modulus is passed to each operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Mat2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };

    pub fn mul(&self, o: &Mat2, n: u64) -> Mat2 {
        let m = |x: u64, y: u64, z: u64, w: u64| {
            ((x as u128 * y as u128 + z as u128 * w as u128) % n as u128) as u64
        };
        Mat2 {
            a: m(self.a, o.a, self.b, o.c),
            b: m(self.a, o.b, self.b, o.d),
            c: m(self.c, o.a, self.d, o.c),
            d: m(self.c, o.b, self.d, o.d),
        }
    }

    pub fn pow(&self, mut e: u64, n: u64) -> Mat2 {
        let mut result = Mat2::IDENTITY.reduced(n);
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, n);
            }
            base = base.mul(&base, n);
            e >>= 1;
        }
        result
    }

    pub fn reduced(&self, n: u64) -> Mat2 {
        Mat2 {
            a: self.a % n,
            b: self.b % n,
            c: self.c % n,
            d: self.d % n,
        }
    }

    pub fn is_identity(&self, n: u64) -> bool {
        self.reduced(n) == Mat2::IDENTITY.reduced(n)
    }

    pub fn det(&self, n: u64) -> u64 {
        let ad = self.a as u128 * self.d as u128 % n as u128;
        let bc = self.b as u128 * self.c as u128 % n as u128;
        ((ad + n as u128 - bc) % n as u128) as u64
    }

    pub fn trace(&self, n: u64) -> u64 {
        (self.a + self.d) % n
    }

    pub fn sub_identity(&self, n: u64) -> Mat2 {
        Mat2 {
            a: (self.a + n - 1) % n,
            b: self.b,
            c: self.c,
            d: (self.d + n - 1) % n,
        }
    }

    pub fn inverse(&self, n: u64) -> Option<Mat2> {
        let det_inv = crate::modular::inv_mod(self.det(n), n)?;
        let s = |x: u64| crate::modular::mul_mod(x, det_inv, n);
        Some(Mat2 {
            a: s(self.d),
            b: s((n - self.b % n) % n),
            c: s((n - self.c % n) % n),
            d: s(self.a),
        })
    }

    /// Row vector times matrix, `x -> xM`, residues mod n.
    pub fn act(&self, x: [u64; 2], n: u64) -> [u64; 2] {
        let n128 = n as u128;
        [
            ((x[0] as u128 * self.a as u128 + x[1] as u128 * self.c as u128) % n128) as u64,
            ((x[0] as u128 * self.b as u128 + x[1] as u128 * self.d as u128) % n128) as u64,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> ToralAutomorphism {
        ToralAutomorphism::new(3, 2, 4, 3).unwrap()
    }

    #[test]
    fn validation() {
        let a = cat();
        assert_eq!(a.trace(), 6);
        assert_eq!(a.disc(), 32);
        assert_eq!(
            ToralAutomorphism::new(1, 1, 0, 1),
            Err(CatError::NotHyperbolic { trace: 2 })
        );
        assert_eq!(ToralAutomorphism::new(2, 1, 3, 2), Err(CatError::BadParity));
        assert_eq!(
            ToralAutomorphism::new(3, 2, 4, 4),
            Err(CatError::NotUnimodular { det: 4 })
        );
        assert_eq!("3,2,4,3".parse::<ToralAutomorphism>().unwrap(), a);
        assert!("3,2,4".parse::<ToralAutomorphism>().is_err());
    }

    #[test]
    fn form_of_standard_cat() {
        let q = cat().quadratic_form();
        assert_eq!((q.alpha, q.beta, q.gamma, q.disc), (2, 0, -4, 32));
        assert_eq!(q.beta * q.beta - 4 * q.alpha * q.gamma, q.disc);
        assert_eq!(q.eval([1, 0]), 2);
        assert_eq!(q.eval([1, 1]), -2);
        assert_eq!(cat().act([1, 0]), [3, 2]);
        assert_eq!(q.eval([3, 2]), 2);
        assert_eq!(q.eval_mod([1, 1], 7), 5);
    }

    #[test]
    fn form_invariant_over_integers() {
        for a in [
            cat(),
            ToralAutomorphism::new(5, 4, 6, 5).unwrap(),
            ToralAutomorphism::new(1, 2, 4, 9).unwrap(),
        ] {
            let q = a.quadratic_form();
            assert_eq!(q.disc % 2, 0);
            for x1 in -6..=6 {
                for x2 in -6..=6 {
                    let x = [x1, x2];
                    assert_eq!(q.eval(a.act(x)), q.eval(x));
                    assert_eq!(q.eval(x), omega(x, a.act(x)));
                    assert_eq!(a.act_inverse(a.act(x)), x);
                }
            }
        }
    }

    #[test]
    fn mat2_mod_arithmetic() {
        let m = cat().to_mod(7);
        // A^3 = I mod 7, A^3 = -I mod 5
        assert!(m.pow(3, 7).is_identity(7));
        let m5 = cat().to_mod(5);
        assert_eq!(
            m5.pow(3, 5),
            Mat2 {
                a: 4,
                b: 0,
                c: 0,
                d: 4
            }
        );
        let inv = m.inverse(7).unwrap();
        assert!(m.mul(&inv, 7).is_identity(7));
        assert_eq!(m.det(7), 1);
        assert_eq!(m.act([1, 0], 7), [3, 2]);
    }
}

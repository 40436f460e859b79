//! Band-limited real observables on the torus and the two variance
//! prefactors: the arithmetic one (pairs with `Q(k) = Q(k')`) and the generic
//! one (pairs on a common `A`-orbit).

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{QuadraticForm, ToralAutomorphism};
use crate::error::{CatError, Result};

/// Trigonometric polynomial `f(x) = sum_k f_hat(k) e(k.x)` with `f_hat(0) = 0`
/// and `f_hat(-k) = conj(f_hat(k))`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Observable {
    coeffs: BTreeMap<[i64; 2], Complex64>,
}

fn neg(k: [i64; 2]) -> [i64; 2] {
    [-k[0], -k[1]]
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()))
}

/// `(-1)^{k1 k2}`.
pub fn parity(k: [i64; 2]) -> f64 {
    if (k[0] * k[1]).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Observable {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a real observable, inserting `conj(c)` at `-k` where absent.
    pub fn new<I: IntoIterator<Item = ([i64; 2], Complex64)>>(pairs: I) -> Result<Self> {
        let mut given: BTreeMap<[i64; 2], Complex64> = BTreeMap::new();
        for (k, c) in pairs {
            if k == [0, 0] {
                if c != Complex64::new(0.0, 0.0) {
                    return Err(CatError::NonzeroMean);
                }
                continue;
            }
            match given.get(&k) {
                Some(&prev) if !close(prev, c) => {
                    return Err(CatError::ConflictingCoefficient { k })
                }
                _ => {
                    given.insert(k, c);
                }
            }
        }
        let mut coeffs = given.clone();
        for (&k, &c) in &given {
            match given.get(&neg(k)) {
                Some(&other) if !close(other, c.conj()) => {
                    return Err(CatError::ConflictingCoefficient { k });
                }
                Some(_) => {}
                None => {
                    coeffs.insert(neg(k), c.conj());
                }
            }
        }
        coeffs.retain(|_, c| c.norm() != 0.0);
        Ok(Self { coeffs })
    }

    /// `2 cos(2 pi x1)`.
    pub fn cos_x1() -> Self {
        Self::new([([1, 0], Complex64::new(1.0, 0.0))]).expect("valid")
    }

    pub fn coeffs(&self) -> &BTreeMap<[i64; 2], Complex64> {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = ([i64; 2], Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coeff(&self, k: [i64; 2]) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest coordinate magnitude in the support.
    pub fn support_bound(&self) -> i64 {
        self.coeffs
            .keys()
            .map(|k| k[0].abs().max(k[1].abs()))
            .max()
            .unwrap_or(0)
    }

    /// `sum_k |f_hat(k)|`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn max_abs_q(&self, form: &QuadraticForm) -> i64 {
        self.coeffs
            .keys()
            .map(|&k| form.eval(k).abs())
            .max()
            .unwrap_or(0)
    }

    /// Enforces `max |Q(k)| < N/2` over the support, so that `Q(k) = Q(k') mod N`
    /// forces `Q(k) = Q(k')`.
    pub fn check_support(&self, form: &QuadraticForm, n: u64) -> Result<()> {
        let max_q = self.max_abs_q(form);
        if 2 * max_q as i128 >= n as i128 {
            return Err(CatError::SupportTooLarge { max_q, n });
        }
        Ok(())
    }

    /// `f o A`, re-emitting every frequency `k` at `kA`.
    pub fn compose(&self, a: &ToralAutomorphism) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (a.act(k), c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (&k, &c) in &other.coeffs {
            *coeffs.entry(k).or_default() -= c;
        }
        coeffs.retain(|_, c| c.norm() > 1e-15);
        Self { coeffs }
    }

    /// `g - g o A`, whose quantum matrix elements vanish identically.
    pub fn cocycle(g: &Self, a: &ToralAutomorphism) -> Self {
        g.sub(&g.compose(a))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let records: Vec<CoefficientRecord> =
            serde_json::from_str(s).map_err(|e| CatError::ObservableFormat(e.to_string()))?;
        Self::new(
            records
                .into_iter()
                .map(|r| (r.k, Complex64::new(r.re, r.im))),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CatError::ObservableFormat(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let records: Vec<CoefficientRecord> = self
            .iter()
            .map(|(k, c)| CoefficientRecord {
                k,
                re: c.re,
                im: c.im,
            })
            .collect();
        serde_json::to_string_pretty(&records).expect("plain records serialize")
    }
}

/// One entry of the observable file: `{"k": [k1, k2], "re": .., "im": ..}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub k: [i64; 2],
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// `sum_{Q(k) = Q(k')} (-1)^{k1k2 + k1'k2'} f_hat(k) conj(f_hat(k'))`.
pub fn c_arith(a: &ToralAutomorphism, f: &Observable) -> f64 {
    let form = a.quadratic_form();
    let mut classes: HashMap<i64, Complex64> = HashMap::new();
    for (k, c) in f.iter() {
        *classes.entry(form.eval(k)).or_default() += parity(k) * c;
    }
    classes.values().map(|s| s.norm_sqr()).sum()
}

/// Generic prefactor: pairs `(k, kA^t)` with both ends in the support.
pub fn c_gen(a: &ToralAutomorphism, f: &Observable) -> f64 {
    let form = a.quadratic_form();
    let bound = 4 * f.support_bound().max(1);
    let inside = |k: [i64; 2]| k[0].abs().max(k[1].abs()) <= bound;
    let mut total = Complex64::new(0.0, 0.0);
    for (k, c) in f.iter() {
        let mut visit = |kp: [i64; 2]| {
            let cp = f.coeff(kp);
            if cp != Complex64::new(0.0, 0.0) {
                assert_eq!(form.eval(kp), form.eval(k), "orbit pair off the Q-diagonal");
                assert_eq!(parity(k) * parity(kp), 1.0, "orbit pair with odd parity");
                total += c * cp.conj();
            }
        };
        visit(k);
        let mut fwd = a.act(k);
        while inside(fwd) && fwd != k {
            visit(fwd);
            fwd = a.act(fwd);
        }
        let mut back = a.act_inverse(k);
        while inside(back) && back != k {
            visit(back);
            back = a.act_inverse(back);
        }
    }
    total.re
}

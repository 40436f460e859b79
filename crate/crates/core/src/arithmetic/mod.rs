//! Exact arithmetic for the cat map modulo a prime: the automorphism and its
//! invariant form, the quadratic extension `F_N[sqrt D]`, the centralizer
//! `C_A(N)` and the twisted forms `q(x; g)`.

mod automorphism;
mod context;
mod quadext;

pub use automorphism::{omega, Mat2, QuadraticForm, ToralAutomorphism};
pub use context::{order_mod, ContextSummary, GroupElement, PrimeContext, PrimeKind};
pub use quadext::{QuadExtElement, QuadRing};

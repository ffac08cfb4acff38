//! Coefficient fields.
//!
//! Two backends implement [`Field`]: [`Cyclotomic`] (exact elements of a
//! cyclotomic extension of the rationals) and [`BigComplex`] (complex numbers
//! with binary floating-point parts and a comparison tolerance).

mod bigfloat;
mod cyclotomic;
pub mod modp;

pub use bigfloat::{BigComplex, DEFAULT_EPS, DEFAULT_PREC};
pub use cyclotomic::Cyclotomic;

use num_complex::Complex64;
use num_rational::BigRational;
use std::fmt;

/// Arithmetic and the handful of number-theoretic queries the algorithms need.
///
/// Methods take references and return owned values; the standard operator
/// traits are deliberately not required so that generic code stays uniform.
pub trait Field: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    /// `ζ_n^j` for the primitive root `exp(2πi/n)`.
    fn root_of_unity(n: u64, j: i64) -> Self;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;

    /// Order of `self` as a root of unity. Exact backends ignore `max_order`;
    /// approximate ones only search orders up to it.
    fn root_of_unity_order(&self, max_order: u64) -> Option<u64>;
    /// Some `k`-th root of `self` inside the backend, if one can be found.
    fn kth_root(&self, k: u32) -> Option<Self>;
    /// Magnitude used for choosing elimination pivots.
    fn pivot_weight(&self) -> f64;
    /// Floating-point approximation, for diagnostics.
    fn approx(&self) -> Complex64;
    /// True when equality is exact.
    fn is_exact() -> bool;
    /// Short backend description such as `cyclotomic:12` or `bigfloat:256`.
    fn backend_tag(&self) -> String;
    /// Image under a ring map to `F_p`, when the backend supports one.
    fn reduce_mod_p(&self, _ctx: &modp::ModPrime) -> Option<u64> {
        None
    }
    /// Conductor of the smallest cyclotomic field containing `self` (1 for
    /// backends without one).
    fn conductor(&self) -> u64 {
        1
    }
    /// `|self| = 1` up to the backend's notion of equality.
    fn is_unit_modulus(&self) -> bool;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }

    fn is_one(&self) -> bool {
        self.sub(&Self::one()).is_zero()
    }

    fn scale(&self, n: i64) -> Self {
        self.mul(&Self::from_i64(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num)
            .div(&Self::from_i64(den))
            .expect("nonzero denominator")
    }

    /// Integer power; negative exponents need an invertible base.
    fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq);
            }
        }
        Some(acc)
    }
}

/// Sum of a slice of field elements.
pub fn sum<F: Field>(xs: &[F]) -> F {
    xs.iter().fold(F::zero(), |acc, x| acc.add(x))
}

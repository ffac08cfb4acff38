use super::Field;
use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};
use dashu_int::IBig;
use num_complex::Complex64;
use num_rational::BigRational;
use std::fmt;
use std::str::FromStr;

type R = FBig<HalfEven, 2>;

/// Working precision in bits when none is requested.
pub const DEFAULT_PREC: usize = 256;
/// Equality tolerance when none is requested.
pub const DEFAULT_EPS: f64 = 1e-30;

/// Complex number with binary floating-point parts.
///
/// Each value carries its precision (through its parts) and an equality
/// tolerance; binary operations keep the larger precision and the larger
/// tolerance.
#[derive(Clone)]
pub struct BigComplex {
    re: R,
    im: R,
    eps: f64,
}

fn with_prec(x: R, prec: usize) -> R {
    x.with_precision(prec).value()
}

fn int_to_r(n: &num_bigint::BigInt, prec: usize) -> R {
    let i = IBig::from_str(&n.to_string()).expect("integer literal");
    with_prec(R::from(i), prec)
}

fn r_to_f64(x: &R) -> f64 {
    x.to_f64().value()
}

impl BigComplex {
    pub fn new(re: f64, im: f64) -> Self {
        BigComplex::with_config(re, im, DEFAULT_PREC, DEFAULT_EPS)
    }

    pub fn with_config(re: f64, im: f64, prec: usize, eps: f64) -> Self {
        let conv = |v: f64| with_prec(R::try_from(v).unwrap_or(R::ZERO), prec);
        BigComplex { re: conv(re), im: conv(im), eps }
    }

    /// Parse decimal strings for both parts.
    pub fn parse(re: &str, im: &str, prec: usize, eps: f64) -> Option<Self> {
        let conv = |s: &str| -> Option<R> {
            let d = DBig::from_str(s.trim()).ok()?;
            Some(d.with_rounding::<HalfEven>().with_base_and_precision::<2>(prec).value())
        };
        Some(BigComplex { re: conv(re)?, im: conv(im)?, eps })
    }

    pub fn from_rational_prec(q: &BigRational, prec: usize, eps: f64) -> Self {
        let n = int_to_r(q.numer(), prec);
        let d = int_to_r(q.denom(), prec);
        BigComplex { re: n / d, im: with_prec(R::ZERO, prec), eps }
    }

    pub fn precision(&self) -> usize {
        self.re.precision().max(self.im.precision())
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Re-round to `prec` bits with tolerance `eps`.
    pub fn with_precision(&self, prec: usize, eps: f64) -> Self {
        BigComplex {
            re: with_prec(self.re.clone(), prec),
            im: with_prec(self.im.clone(), prec),
            eps,
        }
    }

    /// Decimal renderings of the real and imaginary parts.
    pub fn to_decimal_strings(&self) -> (String, String) {
        (self.re.to_decimal().value().to_string(), self.im.to_decimal().value().to_string())
    }

    fn modulus_f64(&self) -> f64 {
        r_to_f64(&self.re).hypot(r_to_f64(&self.im))
    }

    fn eps_with(&self, o: &Self) -> f64 {
        self.eps.max(o.eps)
    }

    fn lift_const(&self, x: R) -> R {
        with_prec(x, self.precision().max(DEFAULT_PREC))
    }

    /// Newton refinement of a root of `x^k = self` starting at `guess`.
    fn newton_root(&self, k: u32, guess: Complex64) -> Option<Self> {
        let prec = self.precision().max(DEFAULT_PREC);
        let mut x = BigComplex::with_config(guess.re, guess.im, prec, self.eps);
        let kk = BigComplex::from_i64(k as i64).with_precision(prec, self.eps);
        let tol = 2f64.powi(-(prec as i32).min(1000));
        for _ in 0..(16 + prec.ilog2() as usize * 2) {
            let xk1 = x.pow(k as i64 - 1)?;
            let fx = xk1.mul(&x).sub(self);
            let step = fx.div(&kk.mul(&xk1))?;
            x = x.sub(&step);
            if step.modulus_f64() <= tol * (1.0 + x.modulus_f64()) {
                break;
            }
        }
        Some(x)
    }
}

impl PartialEq for BigComplex {
    fn eq(&self, other: &Self) -> bool {
        let d = self.sub(other);
        d.modulus_f64() <= self.eps_with(other)
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.approx();
        if a.im == 0.0 {
            write!(f, "{}", a.re)
        } else {
            write!(f, "{}{:+}i", a.re, a.im)
        }
    }
}

impl Field for BigComplex {
    fn zero() -> Self {
        BigComplex::from_i64(0)
    }

    fn one() -> Self {
        BigComplex::from_i64(1)
    }

    fn from_i64(n: i64) -> Self {
        BigComplex {
            re: with_prec(R::from(n), DEFAULT_PREC),
            im: with_prec(R::ZERO, DEFAULT_PREC),
            eps: DEFAULT_EPS,
        }
    }

    fn from_rational(q: &BigRational) -> Self {
        BigComplex::from_rational_prec(q, DEFAULT_PREC, DEFAULT_EPS)
    }

    fn root_of_unity(n: u64, j: i64) -> Self {
        let n = n.max(1);
        let j = j.rem_euclid(n as i64);
        let ang = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let guess = Complex64::from_polar(1.0, ang);
        // refine as a root of x^n = 1; the guess is far closer to the target
        // root than to any other n-th root for desk-scale n
        BigComplex::one().newton_root(n as u32, guess).expect("root of unity")
    }

    fn add(&self, o: &Self) -> Self {
        BigComplex { re: &self.re + &o.re, im: &self.im + &o.im, eps: self.eps_with(o) }
    }

    fn sub(&self, o: &Self) -> Self {
        BigComplex { re: &self.re - &o.re, im: &self.im - &o.im, eps: self.eps_with(o) }
    }

    fn mul(&self, o: &Self) -> Self {
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        BigComplex { re, im, eps: self.eps_with(o) }
    }

    fn neg(&self) -> Self {
        BigComplex { re: -self.re.clone(), im: -self.im.clone(), eps: self.eps }
    }

    fn inv(&self) -> Option<Self> {
        if self.re == R::ZERO && self.im == R::ZERO {
            return None;
        }
        let n2 = &self.re * &self.re + &self.im * &self.im;
        let n2 = self.lift_const(n2);
        Some(BigComplex { re: &self.re / &n2, im: -(&self.im / &n2), eps: self.eps })
    }

    fn is_zero(&self) -> bool {
        self.modulus_f64() <= self.eps
    }

    fn root_of_unity_order(&self, max_order: u64) -> Option<u64> {
        if (self.modulus_f64() - 1.0).abs() > 1e-6 {
            return None;
        }
        let mut w = self.clone();
        for q in 1..=max_order {
            if w.is_one() {
                return Some(q);
            }
            w = w.mul(self);
        }
        None
    }

    fn kth_root(&self, k: u32) -> Option<Self> {
        if k == 0 {
            return None;
        }
        if k == 1 || self.is_zero() {
            return Some(self.clone());
        }
        let guess = self.approx().powf(1.0 / k as f64);
        self.newton_root(k, guess)
    }

    fn pivot_weight(&self) -> f64 {
        self.modulus_f64()
    }

    fn approx(&self) -> Complex64 {
        Complex64::new(r_to_f64(&self.re), r_to_f64(&self.im))
    }

    fn is_exact() -> bool {
        false
    }

    fn backend_tag(&self) -> String {
        format!("bigfloat:{}", self.precision())
    }

    fn is_unit_modulus(&self) -> bool {
        let n2 = &self.re * &self.re + &self.im * &self.im;
        (r_to_f64(&n2) - 1.0).abs() <= self.eps.max(1e-300) * 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_round_trip() {
        let a = BigComplex::new(1.5, -2.0);
        let b = BigComplex::new(0.25, 3.0);
        let c = a.mul(&b).div(&b).unwrap();
        assert_eq!(c, a);
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn third_is_precise() {
        let third = BigComplex::from_ratio(1, 3);
        let back = third.scale(3);
        assert!(back.sub(&BigComplex::one()).modulus_f64() < 1e-70);
    }

    #[test]
    fn roots_of_unity() {
        for n in [3u64, 5, 8, 12] {
            let z = BigComplex::root_of_unity(n, 1);
            assert!(z.pow(n as i64).unwrap().is_one());
            assert_eq!(z.root_of_unity_order(64), Some(n));
        }
        assert_eq!(BigComplex::new(2.0, 0.0).root_of_unity_order(64), None);
    }

    #[test]
    fn kth_root_newton() {
        let a = BigComplex::new(-3.0, 4.0);
        let r = a.kth_root(5).unwrap();
        assert_eq!(r.pow(5).unwrap(), a);
    }

    #[test]
    fn parse_decimal() {
        let x = BigComplex::parse("0.1", "-2.5", 256, 1e-30).unwrap();
        let tenth = BigComplex::from_ratio(1, 10);
        assert_eq!(x.add(&BigComplex::new(0.0, 2.5)), tenth);
    }
}

//! Truncated power and Laurent series in one variable.
//!
//! Truncation is inclusive: a series of order `N` knows the coefficients of
//! `z^0, …, z^N`. Every operation states the order of its result.

use crate::error::{Error, Result};
use crate::field::Field;
use std::fmt;

/// `a·b mod z^len` on dense coefficient slices.
pub(crate) fn mul_trunc<F: Field>(a: &[F], b: &[F], len: usize) -> Vec<F> {
    let mut out = vec![F::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
    }
    out
}

/// `outer(inner(z)) mod z^len` by Horner's rule; `inner[0]` must be zero.
pub(crate) fn compose_trunc<F: Field>(outer: &[F], inner: &[F], len: usize) -> Vec<F> {
    let last = outer.len().min(len);
    if last == 0 {
        return vec![F::zero(); len];
    }
    let mut res = vec![F::zero(); len];
    res[0] = outer[last - 1].clone();
    for j in (0..last - 1).rev() {
        res = mul_trunc(&res, inner, len);
        res[0] = res[0].add(&outer[j]);
    }
    res
}

/// `1/a mod z^len`; `a[0]` must be invertible.
pub(crate) fn recip_trunc<F: Field>(a: &[F], len: usize) -> Option<Vec<F>> {
    let inv0 = a.first()?.inv()?;
    let mut g = vec![F::zero(); len];
    if len == 0 {
        return Some(g);
    }
    g[0] = inv0.clone();
    for n in 1..len {
        let mut s = F::zero();
        for k in 1..=n.min(a.len() - 1) {
            if !a[k].is_zero() {
                s = s.add(&a[k].mul(&g[n - k]));
            }
        }
        g[n] = s.mul(&inv0).neg();
    }
    Some(g)
}

fn padded<F: Field>(a: &[F], len: usize) -> Vec<F> {
    let mut v: Vec<F> = a.iter().take(len).cloned().collect();
    v.resize(len, F::zero());
    v
}

/// Truncated formal power series `Σ_{j≤N} c_j z^j`.
#[derive(Clone, PartialEq)]
pub struct PowerSeries<F> {
    coeffs: Vec<F>,
}

impl<F: Field> PowerSeries<F> {
    /// Series whose order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<F>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        PowerSeries { coeffs }
    }

    /// Series of order `n` from leading coefficients; missing ones are zero,
    /// extra ones are dropped.
    pub fn from_coeffs(coeffs: &[F], n: usize) -> Self {
        PowerSeries { coeffs: padded(coeffs, n + 1) }
    }

    pub fn from_i64s(coeffs: &[i64], n: usize) -> Self {
        let v: Vec<F> = coeffs.iter().map(|&c| F::from_i64(c)).collect();
        Self::from_coeffs(&v, n)
    }

    pub fn zero(n: usize) -> Self {
        PowerSeries { coeffs: vec![F::zero(); n + 1] }
    }

    pub fn constant(c: F, n: usize) -> Self {
        let mut s = Self::zero(n);
        s.coeffs[0] = c;
        s
    }

    pub fn one(n: usize) -> Self {
        Self::constant(F::one(), n)
    }

    /// `c·z^j` at order `n`.
    pub fn monomial(c: F, j: usize, n: usize) -> Self {
        let mut s = Self::zero(n);
        if j <= n {
            s.coeffs[j] = c;
        }
        s
    }

    /// The series `z`.
    pub fn var(n: usize) -> Self {
        Self::monomial(F::one(), 1, n)
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<F> {
        self.coeffs
    }

    /// Coefficient of `z^j`; zero above the truncation order is not implied,
    /// so callers must stay within `0..=trunc()`.
    pub fn coeff(&self, j: usize) -> &F {
        &self.coeffs[j]
    }

    pub fn set_coeff(&mut self, j: usize, c: F) {
        self.coeffs[j] = c;
    }

    /// Same series seen at a lower order.
    pub fn truncate(&self, n: usize) -> Self {
        assert!(n <= self.trunc(), "cannot raise a truncation order");
        PowerSeries { coeffs: self.coeffs[..=n].to_vec() }
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    /// Equality of the coefficients through `z^n` (both orders must reach `n`).
    pub fn agrees_through(&self, other: &Self, n: usize) -> bool {
        (0..=n).all(|j| self.coeffs[j] == other.coeffs[j])
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.trunc().min(o.trunc());
        PowerSeries { coeffs: (0..=n).map(|j| self.coeffs[j].add(&o.coeffs[j])).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.trunc().min(o.trunc());
        PowerSeries { coeffs: (0..=n).map(|j| self.coeffs[j].sub(&o.coeffs[j])).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.trunc().min(o.trunc());
        PowerSeries { coeffs: mul_trunc(&self.coeffs, &o.coeffs, n + 1) }
    }

    pub fn neg(&self) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn scale(&self, c: &F) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect() }
    }

    /// Non-negative integer power, same order.
    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.trunc());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `self(inner(z))` at order `min(N_outer, N_inner)`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let n = self.trunc().min(inner.trunc());
        Ok(PowerSeries { coeffs: compose_trunc(&self.coeffs, &inner.coeffs, n + 1) })
    }

    /// Compositional inverse, same order, by Newton iteration with doubling
    /// precision.
    pub fn comp_inverse(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let n = self.trunc();
        if n == 0 {
            return Err(Error::ZeroLinearCoefficient);
        }
        let a_inv = self.coeffs[1].inv().ok_or(Error::ZeroLinearCoefficient)?;
        let fprime = self.derivative_raw();
        let mut g = vec![F::zero(), a_inv];
        let mut len = 2usize;
        while len < n + 1 {
            let next = (2 * len).min(n + 1);
            let gp = padded(&g, next);
            let mut r = compose_trunc(&self.coeffs, &gp, next);
            r[1] = r[1].sub(&F::one());
            // f'(g) is only known mod z^n; its unknown top coefficient is
            // multiplied by r, whose valuation is at least `len`
            let d = compose_trunc(&fprime, &gp, next);
            let dinv = recip_trunc(&d, next).ok_or(Error::ZeroLinearCoefficient)?;
            let corr = mul_trunc(&r, &dinv, next);
            g = gp.iter().zip(&corr).map(|(x, y)| x.sub(y)).collect();
            len = next;
        }
        Ok(PowerSeries { coeffs: padded(&g, n + 1) })
    }

    fn derivative_raw(&self) -> Vec<F> {
        (1..self.coeffs.len())
            .map(|j| self.coeffs[j].scale(j as i64))
            .collect()
    }

    /// Termwise derivative at order `N-1`. An order-0 input gives the zero
    /// series at order 0.
    pub fn derivative(&self) -> Self {
        let d = self.derivative_raw();
        if d.is_empty() {
            return Self::zero(0);
        }
        PowerSeries { coeffs: d }
    }

    /// Multiplicative inverse, same order.
    pub fn reciprocal(&self) -> Result<Self> {
        recip_trunc(&self.coeffs, self.coeffs.len())
            .map(|coeffs| PowerSeries { coeffs })
            .ok_or(Error::ZeroConstantTerm)
    }

    /// `self / z^m` at order `N-m`; requires valuation at least `m`.
    pub fn shift_down(&self, m: usize) -> Result<Self> {
        if m > self.trunc() || self.coeffs[..m].iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidInput(format!("series is not divisible by z^{m}")));
        }
        Ok(PowerSeries { coeffs: self.coeffs[m..].to_vec() })
    }

    /// `z^m · self` at order `N+m`.
    pub fn shift_up(&self, m: usize) -> Self {
        let mut coeffs = vec![F::zero(); m];
        coeffs.extend(self.coeffs.iter().cloned());
        PowerSeries { coeffs }
    }

    /// `log(self)` for a series with constant term 1, same order.
    pub fn log_unit(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::InvalidInput("log needs constant term 1".into()));
        }
        let n = self.trunc();
        if n == 0 {
            return Ok(Self::zero(0));
        }
        // log f = ∫ f'/f
        let q = mul_trunc(&self.derivative_raw(), &recip_trunc(&self.coeffs, n).expect("unit"), n);
        let mut coeffs = vec![F::zero(); n + 1];
        for j in 1..=n {
            coeffs[j] = q[j - 1].mul(&F::from_ratio(1, j as i64));
        }
        Ok(PowerSeries { coeffs })
    }

    /// Convert every coefficient with `f`.
    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> PowerSeries<G> {
        PowerSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

impl<F: Field> fmt::Debug for PowerSeries<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<F: Field> fmt::Display for PowerSeries<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if any {
                write!(f, " + ")?;
            }
            any = true;
            match j {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{j}")?,
            }
        }
        if !any {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.trunc() + 1)
    }
}

/// Truncated Laurent series `Σ_{-m ≤ j ≤ N} c_j z^j`.
///
/// The pole order `m` is normalized so that `c_{-m} ≠ 0` when `m > 0`. The
/// truncation order `N` may be negative when only polar terms are trusted.
#[derive(Clone, PartialEq)]
pub struct LaurentSeries<F> {
    pole: usize,
    /// Coefficients of `z^{-pole}, …, z^{trunc}`.
    coeffs: Vec<F>,
}

impl<F: Field> LaurentSeries<F> {
    /// From coefficients of `z^{-pole}, z^{-pole+1}, …`; trailing entries fix
    /// the truncation order.
    pub fn new(pole: usize, coeffs: Vec<F>) -> Self {
        let mut s = LaurentSeries { pole, coeffs };
        s.normalize();
        s
    }

    /// `z^{-m} · p(z)`.
    pub fn from_power_series(p: &PowerSeries<F>, m: usize) -> Self {
        Self::new(m, p.coeffs().to_vec())
    }

    pub fn zero(trunc: i64) -> Self {
        let pole = if trunc < 0 { (-trunc) as usize } else { 0 };
        Self::new(pole, vec![F::zero(); (trunc + pole as i64 + 1).max(1) as usize])
    }

    fn normalize(&mut self) {
        while self.pole > 0 && self.coeffs.len() > 1 && self.coeffs[0].is_zero() {
            self.coeffs.remove(0);
            self.pole -= 1;
        }
    }

    pub fn pole_order(&self) -> usize {
        self.pole
    }

    pub fn trunc(&self) -> i64 {
        self.coeffs.len() as i64 - 1 - self.pole as i64
    }

    /// Coefficient of `z^e`, or `None` above the truncation order.
    pub fn coeff(&self, e: i64) -> Option<F> {
        if e > self.trunc() {
            return None;
        }
        let idx = e + self.pole as i64;
        if idx < 0 {
            Some(F::zero())
        } else {
            Some(self.coeffs[idx as usize].clone())
        }
    }

    pub fn residue(&self) -> Option<F> {
        self.coeff(-1)
    }

    /// Coefficients of `z^{-pole}, …, z^{trunc}`.
    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    fn lowest(&self, o: &Self) -> i64 {
        -(self.pole.max(o.pole) as i64)
    }

    fn combine(&self, o: &Self, op: impl Fn(&F, &F) -> F) -> Self {
        let lo = self.lowest(o);
        let hi = self.trunc().min(o.trunc());
        let coeffs = (lo..=hi)
            .map(|e| op(&self.coeff(e).unwrap(), &o.coeff(e).unwrap()))
            .collect::<Vec<_>>();
        if coeffs.is_empty() {
            return Self::zero(hi);
        }
        Self::new((-lo) as usize, coeffs)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: &F) -> Self {
        Self::new(self.pole, self.coeffs.iter().map(|x| x.mul(c)).collect())
    }

    /// Product; the order is `min(N_a - m_b, N_b - m_a)`.
    pub fn mul(&self, o: &Self) -> Self {
        let len_a = self.coeffs.len();
        let len_b = o.coeffs.len();
        let len = len_a.min(len_b);
        let coeffs = mul_trunc(&self.coeffs, &o.coeffs, len);
        Self::new(self.pole + o.pole, coeffs)
    }

    /// Same series with the truncation order lowered to `n`.
    pub fn truncate(&self, n: i64) -> Self {
        assert!(n <= self.trunc());
        let keep = (n + self.pole as i64 + 1).max(0) as usize;
        if keep == 0 {
            return Self::zero(n);
        }
        Self::new(self.pole, self.coeffs[..keep].to_vec())
    }

    /// Equality of all coefficients through `z^n`.
    pub fn agrees_through(&self, other: &Self, n: i64) -> bool {
        let lo = self.lowest(other);
        (lo..=n).all(|e| match (self.coeff(e), other.coeff(e)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        })
    }

    pub fn is_zero_through(&self, n: i64) -> bool {
        (-(self.pole as i64)..=n).all(|e| self.coeff(e).map(|c| c.is_zero()).unwrap_or(false))
    }
}

impl<F: Field> fmt::Debug for LaurentSeries<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if any {
                write!(f, " + ")?;
            }
            any = true;
            write!(f, "({c})z^{}", i as i64 - self.pole as i64)?;
        }
        if !any {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.trunc() + 1)
    }
}

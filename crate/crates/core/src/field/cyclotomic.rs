use super::modp::{mul_mod, pow_mod, ModPrime};
use super::Field;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::sync::{Arc, LazyLock};

/// Modulus data for `Q(ζ_n)`.
#[derive(Debug)]
struct Ctx {
    n: u64,
    /// Coefficients of the monic cyclotomic polynomial, constant term first.
    phi: Vec<BigInt>,
}

impl Ctx {
    fn new(n: u64) -> Ctx {
        Ctx { n, phi: cyclotomic_poly(n) }
    }

    fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    /// Reduce a dense polynomial in `ζ` modulo `Φ_n`.
    fn reduce(&self, mut p: Vec<BigRational>) -> Vec<BigRational> {
        let d = self.degree();
        for k in (d..p.len()).rev() {
            if p[k].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut p[k], BigRational::zero());
            for i in 0..d {
                if !self.phi[i].is_zero() {
                    p[k - d + i] -= &c * BigRational::from_integer(self.phi[i].clone());
                }
            }
        }
        p.truncate(d);
        p.resize(d, BigRational::zero());
        p
    }
}

static RATIONALS: LazyLock<Arc<Ctx>> = LazyLock::new(|| Arc::new(Ctx::new(1)));

fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = &den[dd];
    let mut q = vec![BigInt::zero(); num.len() - dd];
    for k in (0..q.len()).rev() {
        let c = &rem[k + dd] / lead;
        for i in 0..=dd {
            rem[k + i] -= &c * &den[i];
        }
        q[k] = c;
    }
    q
}

fn cyclotomic_poly(n: u64) -> Vec<BigInt> {
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            num = poly_div_exact(&num, &cyclotomic_poly(d));
        }
    }
    num
}

/// Conductor representative: `Q(ζ_n) = Q(ζ_{n/2})` when `n ≡ 2 (mod 4)`.
fn canonical(n: u64) -> u64 {
    if n % 4 == 2 {
        n / 2
    } else {
        n
    }
}

/// Exact element of the cyclotomic field `Q(ζ_n)`, stored in the power basis
/// `1, ζ, …, ζ^{φ(n)-1}`.
///
/// The conductor is not fixed globally: binary operations lift both operands
/// to the lcm of their conductors. Elements never shrink back to a smaller
/// field, so equality also lifts before comparing.
#[derive(Clone)]
pub struct Cyclotomic {
    ctx: Arc<Ctx>,
    c: Vec<BigRational>,
}

impl Cyclotomic {
    pub fn rational(q: BigRational) -> Self {
        Cyclotomic { ctx: RATIONALS.clone(), c: vec![q] }
    }

    /// Element of `Q(ζ_n)` from power-basis coefficients. Extra coefficients
    /// are reduced modulo `Φ_n`.
    pub fn from_power_basis(n: u64, coeffs: Vec<BigRational>) -> Self {
        let n = n.max(1);
        let cn = canonical(n);
        if cn != n {
            // rewrite ζ_n = -ζ_m^e with m = n/2
            let mut acc = Cyclotomic::zero();
            for (j, q) in coeffs.into_iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                acc = acc.add(&Cyclotomic::root_of_unity(n, j as i64).mul(&Cyclotomic::rational(q)));
            }
            return acc;
        }
        let ctx = if cn == 1 { RATIONALS.clone() } else { Arc::new(Ctx::new(cn)) };
        let c = ctx.reduce(coeffs);
        Cyclotomic { ctx, c }
    }

    /// Conductor of the field this element is currently represented in.
    pub fn modulus(&self) -> u64 {
        self.ctx.n
    }

    /// Power-basis coefficients with respect to `ζ_{modulus}`.
    pub fn coefficients(&self) -> &[BigRational] {
        &self.c
    }

    /// Power-basis coefficients after lifting to `Q(ζ_m)`; `None` unless the
    /// current modulus divides `m`.
    pub fn coefficients_in(&self, m: u64) -> Option<Vec<BigRational>> {
        let m = canonical(m.max(1));
        if m % self.ctx.n != 0 {
            return None;
        }
        Some(self.lift(m).c)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            Some(&self.c[0])
        } else {
            None
        }
    }

    fn lift(&self, m: u64) -> Cyclotomic {
        if m == self.ctx.n {
            return self.clone();
        }
        let ctx = Arc::new(Ctx::new(m));
        let step = (m / self.ctx.n) as usize;
        let mut p = vec![BigRational::zero(); (self.c.len() - 1) * step + 1];
        for (j, q) in self.c.iter().enumerate() {
            p[j * step] = q.clone();
        }
        let c = ctx.reduce(p);
        Cyclotomic { ctx, c }
    }

    fn lift_pair(&self, o: &Cyclotomic) -> (Cyclotomic, Cyclotomic) {
        if self.ctx.n == o.ctx.n {
            return (self.clone(), o.clone());
        }
        let m = self.ctx.n.lcm(&o.ctx.n);
        let ctx = if m == self.ctx.n {
            self.ctx.clone()
        } else if m == o.ctx.n {
            o.ctx.clone()
        } else {
            Arc::new(Ctx::new(m))
        };
        let lift_into = |x: &Cyclotomic| -> Cyclotomic {
            if x.ctx.n == m {
                return x.clone();
            }
            let step = (m / x.ctx.n) as usize;
            let mut p = vec![BigRational::zero(); (x.c.len() - 1) * step + 1];
            for (j, q) in x.c.iter().enumerate() {
                p[j * step] = q.clone();
            }
            Cyclotomic { ctx: ctx.clone(), c: ctx.reduce(p) }
        };
        (lift_into(self), lift_into(o))
    }

    /// The group of roots of unity in the current field is cyclic of order
    /// `lcm(2, n)`; returns that order and a generator.
    fn unit_group(&self) -> (u64, Cyclotomic) {
        let n = self.ctx.n;
        let l = if n % 2 == 0 { n } else { 2 * n };
        (l, Cyclotomic::root_of_unity(l, 1).lift(n.max(canonical(l))))
    }

    fn is_rational(&self) -> bool {
        self.c[1..].iter().all(|x| x.is_zero())
    }

    fn inv_general(&self) -> Option<Cyclotomic> {
        // solve (self * x) = 1 through the multiplication matrix
        let d = self.c.len();
        let mut cols: Vec<Vec<BigRational>> = Vec::with_capacity(d);
        let mut basis = vec![BigRational::zero(); d];
        for j in 0..d {
            basis.iter_mut().for_each(|x| *x = BigRational::zero());
            basis[j] = BigRational::one();
            let e = Cyclotomic { ctx: self.ctx.clone(), c: basis.clone() };
            cols.push(self.mul(&e).c);
        }
        // augmented matrix rows: [M | e0]
        let mut a: Vec<Vec<BigRational>> = (0..d)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..d).map(|j| cols[j][i].clone()).collect();
                row.push(if i == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        for col in 0..d {
            let piv = (col..d).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, piv);
            let inv = a[col][col].recip();
            for x in a[col].iter_mut() {
                *x *= &inv;
            }
            for r in 0..d {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for j in col..=d {
                        let t = &f * &a[col][j];
                        a[r][j] -= t;
                    }
                }
            }
        }
        let c = a.into_iter().map(|row| row[d].clone()).collect();
        Some(Cyclotomic { ctx: self.ctx.clone(), c })
    }
}

fn rational_kth_root(q: &BigRational, k: u32) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().nth_root(k);
    let d = q.denom().nth_root(k);
    if num_traits::pow(n.clone(), k as usize) == *q.numer()
        && num_traits::pow(d.clone(), k as usize) == *q.denom()
    {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.ctx.n == other.ctx.n {
            return self.c == other.c;
        }
        let (a, b) = self.lift_pair(other);
        a.c == b.c
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.c[0]);
        }
        let mut first = true;
        for (j, q) in self.c.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{q}")?,
                1 => write!(f, "{q}*ζ{}", self.ctx.n)?,
                _ => write!(f, "{q}*ζ{}^{j}", self.ctx.n)?,
            }
        }
        Ok(())
    }
}

impl Field for Cyclotomic {
    fn zero() -> Self {
        Cyclotomic::rational(BigRational::zero())
    }

    fn one() -> Self {
        Cyclotomic::rational(BigRational::one())
    }

    fn from_i64(n: i64) -> Self {
        Cyclotomic::rational(BigRational::from_integer(BigInt::from(n)))
    }

    fn from_rational(q: &BigRational) -> Self {
        Cyclotomic::rational(q.clone())
    }

    fn root_of_unity(n: u64, j: i64) -> Self {
        let n = n.max(1);
        let j = j.rem_euclid(n as i64) as u64;
        let cn = canonical(n);
        if cn != n {
            // ζ_n = -ζ_m^e, m = n/2 odd, e = (1-m)/2 mod m
            let m = cn as i64;
            let e = ((1 - m) / 2).rem_euclid(m);
            let base = Cyclotomic::root_of_unity(cn, e * j as i64);
            return if j % 2 == 1 { base.neg() } else { base };
        }
        if cn == 1 {
            return Cyclotomic::one();
        }
        let ctx = Arc::new(Ctx::new(cn));
        let mut p = vec![BigRational::zero(); j as usize + 1];
        p[j as usize] = BigRational::one();
        let c = ctx.reduce(p);
        Cyclotomic { ctx, c }
    }

    fn add(&self, other: &Self) -> Self {
        if self.ctx.n == other.ctx.n {
            let c = self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect();
            return Cyclotomic { ctx: self.ctx.clone(), c };
        }
        let (a, b) = self.lift_pair(other);
        a.add(&b)
    }

    fn sub(&self, other: &Self) -> Self {
        if self.ctx.n == other.ctx.n {
            let c = self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect();
            return Cyclotomic { ctx: self.ctx.clone(), c };
        }
        let (a, b) = self.lift_pair(other);
        a.sub(&b)
    }

    fn mul(&self, other: &Self) -> Self {
        if self.ctx.n != other.ctx.n {
            if self.is_rational() {
                let q = &self.c[0];
                let c = other.c.iter().map(|x| x * q).collect();
                return Cyclotomic { ctx: other.ctx.clone(), c };
            }
            if other.is_rational() {
                return other.mul(self);
            }
            let (a, b) = self.lift_pair(other);
            return a.mul(&b);
        }
        let d = self.c.len();
        if d == 1 {
            return Cyclotomic { ctx: self.ctx.clone(), c: vec![&self.c[0] * &other.c[0]] };
        }
        if other.is_rational() {
            let q = &other.c[0];
            let c = self.c.iter().map(|x| x * q).collect();
            return Cyclotomic { ctx: self.ctx.clone(), c };
        }
        if self.is_rational() {
            return other.mul(self);
        }
        let mut p = vec![BigRational::zero(); 2 * d - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                if !b.is_zero() {
                    p[i + j] += a * b;
                }
            }
        }
        Cyclotomic { ctx: self.ctx.clone(), c: self.ctx.reduce(p) }
    }

    fn neg(&self) -> Self {
        Cyclotomic { ctx: self.ctx.clone(), c: self.c.iter().map(|x| -x).collect() }
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.is_rational() {
            return Some(Cyclotomic { ctx: self.ctx.clone(), c: {
                let mut c = vec![BigRational::zero(); self.c.len()];
                c[0] = self.c[0].recip();
                c
            } });
        }
        self.inv_general()
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    fn root_of_unity_order(&self, _max_order: u64) -> Option<u64> {
        if self.is_rational() {
            let q = &self.c[0];
            return if q.is_one() {
                Some(1)
            } else if *q == -BigRational::one() {
                Some(2)
            } else {
                None
            };
        }
        let (l, gen) = self.unit_group();
        let mut w = Cyclotomic::one();
        for e in 0..l {
            if w == *self {
                return Some(l / e.gcd(&l));
            }
            w = w.mul(&gen);
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
        // Only elements of the form (rational) * (root of unity) are handled.
        let (l, gen) = self.unit_group();
        let gen_inv = gen.inv()?;
        let mut u_inv = Cyclotomic::one();
        for e in 0..l {
            let q = self.mul(&u_inv);
            if q.is_rational() {
                let mut r = q.c[0].clone();
                // self = r * ζ_l^e ; fold a sign into the root of unity
                let mut e2 = 2 * e;
                if r.is_negative() {
                    r = -r;
                    e2 += l;
                }
                let s = rational_kth_root(&r, k)?;
                // ζ_l^e = ζ_{2l}^{2e}; its k-th root is ζ_{2lk}^{e2}
                let root = Cyclotomic::root_of_unity(2 * l * k as u64, e2 as i64);
                return Some(root.mul(&Cyclotomic::rational(s)));
            }
            u_inv = u_inv.mul(&gen_inv);
        }
        None
    }

    fn pivot_weight(&self) -> f64 {
        // prefer sparse pivots with small height
        let nz = self.c.iter().filter(|x| !x.is_zero()).count();
        if nz == 0 {
            return 0.0;
        }
        let bits: u64 = self
            .c
            .iter()
            .map(|x| x.numer().bits() + x.denom().bits())
            .sum();
        1.0 / (nz as f64 * (1.0 + bits as f64))
    }

    fn approx(&self) -> Complex64 {
        let n = self.ctx.n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, q) in self.c.iter().enumerate() {
            let v = q.to_f64().unwrap_or(f64::NAN);
            let ang = 2.0 * std::f64::consts::PI * j as f64 / n;
            acc += Complex64::from_polar(v, ang);
        }
        acc
    }

    fn is_exact() -> bool {
        true
    }

    fn backend_tag(&self) -> String {
        format!("cyclotomic:{}", self.ctx.n)
    }

    fn reduce_mod_p(&self, ctx: &ModPrime) -> Option<u64> {
        if ctx.n % self.ctx.n != 0 {
            return None;
        }
        let w = pow_mod(ctx.omega, ctx.n / self.ctx.n, ctx.p);
        let mut acc = 0u64;
        let mut wj = 1u64;
        for q in &self.c {
            if !q.is_zero() {
                let r = ctx.reduce_ratio(q.numer(), q.denom())?;
                acc = (acc + mul_mod(r, wj, ctx.p)) % ctx.p;
            }
            wj = mul_mod(wj, w, ctx.p);
        }
        Some(acc)
    }

    fn conductor(&self) -> u64 {
        self.ctx.n
    }

    fn is_unit_modulus(&self) -> bool {
        self.root_of_unity_order(0).is_some() || {
            // |x|^2 = x * conj(x); conj(ζ) = ζ^{-1}
            let mut conj = Cyclotomic::zero();
            for (j, q) in self.c.iter().enumerate() {
                if !q.is_zero() {
                    conj = conj.add(
                        &Cyclotomic::root_of_unity(self.ctx.n, -(j as i64))
                            .mul(&Cyclotomic::rational(q.clone())),
                    );
                }
            }
            self.mul(&conj).is_one()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Cyclotomic {
        Cyclotomic::from_ratio(n, d)
    }

    #[test]
    fn cyclotomic_polynomials() {
        let as_i64 = |n| cyclotomic_poly(n).iter().map(|x| x.to_i64().unwrap()).collect::<Vec<_>>();
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(3), vec![1, 1, 1]);
        assert_eq!(as_i64(4), vec![1, 0, 1]);
        assert_eq!(as_i64(12), vec![1, 0, -1, 0, 1]);
        // Φ_105 is the first with a coefficient of absolute value 2
        assert!(as_i64(105).iter().any(|&c| c == -2));
    }

    #[test]
    fn roots_of_unity_relations() {
        for n in [2u64, 3, 5, 7, 11] {
            let z = Cyclotomic::root_of_unity(n, 1);
            assert!(z.pow(n as i64).unwrap().is_one());
            let s = super::super::sum(&(0..n).map(|j| z.pow(j as i64).unwrap()).collect::<Vec<_>>());
            assert!(s.is_zero(), "n = {n}");
        }
    }

    #[test]
    fn half_conductor_rewrite() {
        // ζ_6 = -ζ_3^2
        let z6 = Cyclotomic::root_of_unity(6, 1);
        assert_eq!(z6, Cyclotomic::root_of_unity(3, 2).neg());
        assert_eq!(z6.root_of_unity_order(0), Some(6));
        assert_eq!(Cyclotomic::root_of_unity(2, 1), q(-1, 1));
        assert_eq!(Cyclotomic::root_of_unity(10, 1).pow(5).unwrap(), q(-1, 1));
    }

    #[test]
    fn mixed_conductors() {
        let i = Cyclotomic::root_of_unity(4, 1);
        let w = Cyclotomic::root_of_unity(3, 1);
        let p = i.mul(&w);
        assert_eq!(p, Cyclotomic::root_of_unity(12, 7));
        assert_eq!(p.root_of_unity_order(0), Some(12));
        assert_eq!(p.div(&w).unwrap(), i);
    }

    #[test]
    fn inverse_general() {
        let z = Cyclotomic::root_of_unity(7, 1);
        let x = z.add(&q(2, 3)).add(&z.pow(3).unwrap().scale(5));
        let y = x.inv().unwrap();
        assert!(x.mul(&y).is_one());
    }

    #[test]
    fn kth_roots() {
        assert_eq!(q(9, 4).kth_root(2).unwrap().pow(2).unwrap(), q(9, 4));
        assert_eq!(q(-8, 1).kth_root(3).unwrap().pow(3).unwrap(), q(-8, 1));
        assert!(q(2, 1).kth_root(2).is_none());
        let r = Cyclotomic::root_of_unity(3, 1).scale(4);
        assert_eq!(r.kth_root(2).unwrap().pow(2).unwrap(), r);
        let i = Cyclotomic::root_of_unity(4, 1);
        assert_eq!(q(-1, 1).kth_root(2).unwrap().pow(2).unwrap(), q(-1, 1));
        assert_eq!(i.kth_root(4).unwrap().pow(4).unwrap(), i);
    }

    #[test]
    fn unit_modulus() {
        assert!(Cyclotomic::root_of_unity(5, 2).is_unit_modulus());
        assert!(!q(2, 1).is_unit_modulus());
        // (3 + 4i)/5 has modulus one but is not a root of unity
        let i = Cyclotomic::root_of_unity(4, 1);
        let x = q(3, 5).add(&i.mul(&q(4, 5)));
        assert!(x.is_unit_modulus());
        assert_eq!(x.root_of_unity_order(0), None);
    }

    #[test]
    fn power_basis_reduction() {
        // ζ_3^2 = -1 - ζ_3
        let x = Cyclotomic::from_power_basis(3, vec![BigRational::zero(), BigRational::zero(), BigRational::one()]);
        assert_eq!(x.coefficients(), &[-BigRational::one(), -BigRational::one()]);
    }

    #[test]
    fn modular_reduction_is_a_ring_map() {
        let ctx = ModPrime::for_conductor(12, 0);
        let a = Cyclotomic::root_of_unity(12, 5).add(&q(1, 3));
        let b = Cyclotomic::root_of_unity(4, 1).sub(&q(7, 2));
        let p = ctx.p;
        let ra = a.reduce_mod_p(&ctx).unwrap();
        let rb = b.reduce_mod_p(&ctx).unwrap();
        assert_eq!(a.mul(&b).reduce_mod_p(&ctx).unwrap(), mul_mod(ra, rb, p));
        assert_eq!(a.add(&b).reduce_mod_p(&ctx).unwrap(), (ra + rb) % p);
    }
}

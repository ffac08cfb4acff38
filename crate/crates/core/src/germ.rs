//! Truncated formal diffeomorphisms of `(C,0)`, vector fields, flows and jets.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::series::{mul_trunc, PowerSeries};
use std::fmt;

/// Formal diffeomorphism `f(z) = a z + …` with `a ≠ 0`, truncated at order `N`.
#[derive(Clone, PartialEq)]
pub struct GermDiffeo<F> {
    series: PowerSeries<F>,
}

/// Position of a germ in the filtration by tangency order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tangency {
    /// Linear part differs from 1.
    NotTangent,
    /// `f(z) = z + c z^{k+1} + …` with `c ≠ 0`.
    Order(usize),
    /// `f(z) = z` through the truncation order `N`.
    IdentityToOrder(usize),
}

impl<F: Field> GermDiffeo<F> {
    pub fn new(series: PowerSeries<F>) -> Result<Self> {
        if series.trunc() == 0 {
            return Err(Error::InvalidInput("a germ needs truncation order at least 1".into()));
        }
        if !series.coeff(0).is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        if series.coeff(1).is_zero() {
            return Err(Error::ZeroLinearCoefficient);
        }
        Ok(GermDiffeo { series })
    }

    pub fn identity(n: usize) -> Self {
        GermDiffeo { series: PowerSeries::var(n) }
    }

    /// `a·z` at order `n`.
    pub fn linear(a: F, n: usize) -> Result<Self> {
        Self::new(PowerSeries::monomial(a, 1, n))
    }

    pub fn series(&self) -> &PowerSeries<F> {
        &self.series
    }

    pub fn trunc(&self) -> usize {
        self.series.trunc()
    }

    pub fn linear_part(&self) -> &F {
        self.series.coeff(1)
    }

    pub fn truncate(&self, n: usize) -> Self {
        GermDiffeo { series: self.series.truncate(n.max(1)) }
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &Self) -> Self {
        GermDiffeo { series: self.series.compose(&g.series).expect("germ has no constant term") }
    }

    pub fn inverse(&self) -> Self {
        GermDiffeo { series: self.series.comp_inverse().expect("germ is invertible") }
    }

    /// Integer iterate `self^k`.
    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Self::identity(self.trunc());
        let mut sq = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.compose(&sq);
            }
        }
        acc
    }

    /// `h⁻¹ ∘ self ∘ h`.
    pub fn conjugate_by(&self, h: &Self) -> Self {
        h.inverse().compose(self).compose(h)
    }

    pub fn tangency_order(&self) -> Tangency {
        if !self.linear_part().is_one() {
            return Tangency::NotTangent;
        }
        match (2..=self.trunc()).find(|&j| !self.series.coeff(j).is_zero()) {
            Some(j) => Tangency::Order(j - 1),
            None => Tangency::IdentityToOrder(self.trunc()),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.tangency_order(), Tangency::IdentityToOrder(_))
    }

    /// The jet `(f_1, …, f_k)`.
    pub fn jet(&self, k: usize) -> JetElement<F> {
        JetElement { coeffs: self.series.coeffs()[1..=k.min(self.trunc())].to_vec() }
    }
}

impl<F: Field> fmt::Debug for GermDiffeo<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "germ[{}]", self.series)
    }
}

/// `f∘g∘f⁻¹∘g⁻¹`.
pub fn commutator<F: Field>(f: &GermDiffeo<F>, g: &GermDiffeo<F>) -> GermDiffeo<F> {
    f.compose(g).compose(&f.inverse()).compose(&g.inverse())
}

/// Vector field `a(z) ∂z` with `a(0) = 0`.
#[derive(Clone, PartialEq)]
pub struct VectorFieldGerm<F> {
    series: PowerSeries<F>,
}

impl<F: Field> VectorFieldGerm<F> {
    pub fn new(series: PowerSeries<F>) -> Result<Self> {
        if !series.coeff(0).is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        Ok(VectorFieldGerm { series })
    }

    pub fn zero(n: usize) -> Self {
        VectorFieldGerm { series: PowerSeries::zero(n) }
    }

    pub fn series(&self) -> &PowerSeries<F> {
        &self.series
    }

    pub fn trunc(&self) -> usize {
        self.series.trunc()
    }

    pub fn scale(&self, t: &F) -> Self {
        VectorFieldGerm { series: self.series.scale(t) }
    }

    /// Lie derivative `h ↦ a·h'` at order `N`. The derivative of `h` lacks
    /// its top coefficient, but `a` vanishes at 0 so that gap sits above `N`.
    fn lie(&self, h: &[F]) -> Vec<F> {
        let len = self.series.trunc() + 1;
        let mut d: Vec<F> = (1..h.len()).map(|j| h[j].scale(j as i64)).collect();
        d.resize(len, F::zero());
        mul_trunc(self.series.coeffs(), &d, len)
    }
}

impl<F: Field> fmt::Debug for VectorFieldGerm<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "field[{}]", self.series)
    }
}

/// `v_{k,λ} = z^{k+1}/(1+λz^k) ∂z` at order `n`.
pub fn make_v<F: Field>(k: usize, lambda: &F, n: usize) -> VectorFieldGerm<F> {
    assert!(k >= 1, "k must be positive");
    let mut s = PowerSeries::zero(n);
    let mut c = F::one();
    let mut j = k + 1;
    while j <= n {
        s.set_coeff(j, c.clone());
        c = c.mul(&lambda.neg());
        j += k;
    }
    VectorFieldGerm { series: s }
}

/// Largest number of Lie-series terms tried when the linear part of the field
/// is nonzero.
const MAX_LIE_TERMS: usize = 20_000;

/// Time-`t` flow of `ż = v(z)` as the Lie series `Σ tⁿ/n! L_vⁿ(z)`.
///
/// When `v'(0) = 0` the series terminates after `N` terms and the result is
/// exact in every backend. Otherwise the sum is infinite and needs an
/// approximate backend.
pub fn exp_field<F: Field>(v: &VectorFieldGerm<F>, t: &F) -> Result<GermDiffeo<F>> {
    let n = v.trunc();
    if n == 0 {
        return Err(Error::InvalidInput("vector field needs truncation order at least 1".into()));
    }
    if t.is_zero() {
        return Ok(GermDiffeo::identity(n));
    }
    let nilpotent = v.series.coeff(1).is_zero();
    if !nilpotent && F::is_exact() {
        return Err(Error::RequiresBigfloat(format!(
            "flow of a field with linear part {} leaves the exact field",
            v.series.coeff(1)
        )));
    }
    let mut h: Vec<F> = PowerSeries::<F>::var(n).into_coeffs();
    let mut acc = h.clone();
    let mut coef = F::one();
    let mut quiet = 0;
    for m in 1..=MAX_LIE_TERMS {
        h = v.lie(&h);
        coef = coef.mul(t).mul(&F::from_ratio(1, m as i64));
        let term: Vec<F> = h.iter().map(|c| c.mul(&coef)).collect();
        let negligible = term.iter().all(|c| c.is_zero());
        for (a, b) in acc.iter_mut().zip(&term) {
            *a = a.add(b);
        }
        if nilpotent {
            if h.iter().all(|c| c.is_zero()) {
                break;
            }
            continue;
        }
        quiet = if negligible { quiet + 1 } else { 0 };
        if quiet >= 3 {
            return GermDiffeo::new(PowerSeries::new(acc));
        }
    }
    if nilpotent {
        GermDiffeo::new(PowerSeries::new(acc))
    } else {
        Err(Error::NotConverged(MAX_LIE_TERMS))
    }
}

/// Infinitesimal generator of a germ tangent to the identity: the unique `v`
/// with `exp_field(v, 1) = f` through order `N`, solved order by order.
pub fn log_germ<F: Field>(f: &GermDiffeo<F>) -> Result<VectorFieldGerm<F>> {
    let n = f.trunc();
    let k = match f.tangency_order() {
        Tangency::NotTangent => return Err(Error::NotTangent(1)),
        Tangency::IdentityToOrder(_) => return Ok(VectorFieldGerm::zero(n)),
        Tangency::Order(k) => k,
    };
    let mut v = PowerSeries::zero(n);
    for m in (k + 1)..=n {
        let partial = VectorFieldGerm { series: v.truncate(m) };
        let e = exp_field(&partial, &F::one())?;
        let diff = f.series.coeff(m).sub(e.series.coeff(m));
        v.set_coeff(m, v.coeff(m).add(&diff));
    }
    VectorFieldGerm::new(v)
}

/// The leading coefficients `(f_1, …, f_k)` of a germ.
#[derive(Clone, Debug, PartialEq)]
pub struct JetElement<F> {
    coeffs: Vec<F>,
}

impl<F: Field> JetElement<F> {
    pub fn new(coeffs: Vec<F>) -> Result<Self> {
        match coeffs.first() {
            Some(c) if !c.is_zero() => Ok(JetElement { coeffs }),
            _ => Err(Error::ZeroLinearCoefficient),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn linear_part(&self) -> &F {
        &self.coeffs[0]
    }

    /// For a jet tangent to the identity, `(ν, a_{ν+1})` with
    /// `g = z + a_{ν+1} z^{ν+1} + …`; `None` for the identity jet.
    pub fn leading_term(&self) -> Option<(usize, F)> {
        (1..self.coeffs.len())
            .find(|&j| !self.coeffs[j].is_zero())
            .map(|j| (j, self.coeffs[j].clone()))
    }
}

/// Action of a jet with linear part `λ` on the fiber coefficient `a` of
/// `z + a z^{k+1}` under conjugation `g∘f∘g⁻¹`: `λ^{-k} a`.
pub fn jet_adjoint_linear<F: Field>(g: &JetElement<F>, k: usize, a: &F) -> F {
    g.linear_part().pow(-(k as i64)).expect("nonzero linear part").mul(a)
}

/// Action of a tangent jet `g = z + a_{ν+1} z^{ν+1} + …` on the vector
/// `(b_{k+1}, …, b_{k+ν+1})` under `h ↦ g∘h∘g⁻¹`.
///
/// Only the last slot moves, by `(ν-k)·a_{ν+1}·b_{k+1}`: the acted slot is
/// coupled to the first entry of the vector. Vectors of other lengths are
/// accepted and treated the same way (last slot, first entry).
pub fn jet_adjoint_tangent<F: Field>(g: &JetElement<F>, b: &[F], k: usize) -> Result<Vec<F>> {
    if !g.linear_part().is_one() {
        return Err(Error::NotTangent(1));
    }
    let mut out = b.to_vec();
    let Some((nu, a)) = g.leading_term() else {
        return Ok(out);
    };
    if out.is_empty() {
        return Ok(out);
    }
    let factor = F::from_i64(nu as i64 - k as i64).mul(&a).mul(&b[0]);
    let last = out.len() - 1;
    out[last] = out[last].add(&factor);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Cyclotomic;

    type Q = Cyclotomic;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn germ(c: &[i64], n: usize) -> GermDiffeo<Q> {
        GermDiffeo::new(PowerSeries::from_i64s(c, n)).unwrap()
    }

    fn geometric(ratio: i64, n: usize) -> GermDiffeo<Q> {
        // z/(1 - ratio z)
        let c: Vec<i64> = (0..=n).map(|j| if j == 0 { 0 } else { ratio.pow(j as u32 - 1) }).collect();
        germ(&c, n)
    }

    /// Binomial oracle for the flow of ż = z^{k+1}: z (1 - k t z^k)^{-1/k}.
    fn flow_monomial(k: usize, t: Q, n: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); n + 1];
        let x = t.mul(&q(k as i64, 1));
        let alpha = q(-1, k as i64);
        let mut binom = Q::one();
        let mut j = 0;
        while 1 + j * k <= n {
            // (-1)^j binom(alpha, j) x^j
            out[1 + j * k] = binom.mul(&x.pow(j as i64).unwrap());
            binom = binom
                .mul(&alpha.sub(&Q::from_i64(j as i64)))
                .mul(&q(-1, j as i64 + 1));
            j += 1;
        }
        out
    }

    #[test]
    fn compose_examples() {
        assert_eq!(germ(&[0, 2], 5).compose(&germ(&[0, 3], 5)), germ(&[0, 6], 5));
        let f = germ(&[0, 1, 1], 8);
        assert!(f.compose(&f.inverse()).is_identity());
        assert_eq!(geometric(1, 9).compose(&geometric(1, 9)), geometric(2, 9));
    }

    #[test]
    fn tangency_examples() {
        assert_eq!(germ(&[0, 2], 4).tangency_order(), Tangency::NotTangent);
        assert_eq!(germ(&[0, 1, 0, 1], 8).tangency_order(), Tangency::Order(2));
        assert_eq!(germ(&[0, 1], 6).tangency_order(), Tangency::IdentityToOrder(6));
    }

    #[test]
    fn commutator_examples() {
        let n = 12;
        assert!(commutator(&germ(&[0, 2], n), &germ(&[0, 3], n)).is_identity());
        let v1 = make_v(1, &Q::zero(), n);
        let f = exp_field(&v1, &Q::one()).unwrap();
        let g = exp_field(&v1, &q(2, 1)).unwrap();
        assert!(commutator(&f, &g).is_identity());
        let h = exp_field(&make_v(2, &Q::zero(), n), &Q::one()).unwrap();
        match commutator(&f, &h).tangency_order() {
            Tangency::Order(k) => assert!(k >= 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exp_examples() {
        let v = make_v(1, &Q::zero(), 4);
        assert_eq!(exp_field(&v, &Q::one()).unwrap(), geometric(1, 4));
        let w = VectorFieldGerm::new(PowerSeries::from_i64s(&[0, 0, 3, -1, 2], 6)).unwrap();
        assert!(exp_field(&w, &Q::zero()).unwrap().is_identity());
        let cube = make_v(2, &Q::zero(), 5);
        let flow = exp_field(&cube, &q(1, 2)).unwrap();
        assert_eq!(flow.series().coeffs(), flow_monomial(2, q(1, 2), 5).as_slice());
        assert_eq!(*flow.series().coeff(3), q(1, 2));
        assert_eq!(*flow.series().coeff(5), q(3, 8));
    }

    #[test]
    fn exp_needs_bigfloat_for_linear_part() {
        let v = VectorFieldGerm::new(PowerSeries::from_i64s(&[0, 1, 1], 4)).unwrap();
        assert!(matches!(exp_field(&v, &Q::one()), Err(Error::RequiresBigfloat(_))));
    }

    #[test]
    fn exp_linear_part_in_bigfloat() {
        use crate::field::BigComplex;
        // ż = z has flow e^t z
        let v = VectorFieldGerm::new(PowerSeries::<BigComplex>::from_i64s(&[0, 1], 3)).unwrap();
        let f = exp_field(&v, &BigComplex::one()).unwrap();
        let e = BigComplex::from_ratio(271828182845904523, 100000000000000000);
        assert!((f.linear_part().approx() - e.approx()).norm() < 1e-15);
    }

    #[test]
    fn log_examples() {
        let n = 10;
        let v = log_germ(&geometric(1, n)).unwrap();
        assert_eq!(v, make_v(1, &Q::zero(), n));
        assert_eq!(log_germ(&GermDiffeo::<Q>::identity(n)).unwrap(), VectorFieldGerm::zero(n));
        let v25 = make_v(2, &q(5, 1), n);
        assert_eq!(log_germ(&exp_field(&v25, &Q::one()).unwrap()).unwrap(), v25);
        assert!(log_germ(&germ(&[0, 2, 1], n)).is_err());
    }

    #[test]
    fn make_v_examples() {
        assert_eq!(make_v(1, &Q::zero(), 5).series(), &PowerSeries::from_i64s(&[0, 0, 1], 5));
        assert_eq!(make_v(1, &Q::one(), 4).series(), &PowerSeries::from_i64s(&[0, 0, 1, -1, 1], 4));
        assert_eq!(make_v(2, &q(3, 1), 6).series(), &PowerSeries::from_i64s(&[0, 0, 0, 1, 0, -3], 6));
    }

    #[test]
    fn jet_linear_examples() {
        let g = JetElement::new(vec![q(2, 1)]).unwrap();
        assert_eq!(jet_adjoint_linear(&g, 3, &q(5, 1)), q(5, 8));
        let id = JetElement::new(vec![Q::one()]).unwrap();
        assert_eq!(jet_adjoint_linear(&id, 3, &q(7, 3)), q(7, 3));
        let i = JetElement::new(vec![Q::root_of_unity(4, 1)]).unwrap();
        assert_eq!(jet_adjoint_linear(&i, 4, &Q::one()), Q::one());
    }

    #[test]
    fn jet_linear_matches_conjugation() {
        let n = 8;
        for (lam, k, a) in [(q(2, 1), 3usize, q(5, 1)), (q(-3, 7), 2, q(1, 2)), (Q::root_of_unity(5, 2), 4, q(3, 1))] {
            let g = GermDiffeo::linear(lam.clone(), n).unwrap();
            let f = GermDiffeo::new(PowerSeries::from_coeffs(&[Q::zero(), Q::one()], n).add(&PowerSeries::monomial(a.clone(), k + 1, n))).unwrap();
            let conj = g.compose(&f).compose(&g.inverse());
            assert_eq!(*conj.series().coeff(k + 1), jet_adjoint_linear(&g.jet(1), k, &a));
        }
    }

    #[test]
    fn jet_tangent_examples() {
        let ones = vec![Q::one(); 3];
        let id = JetElement::new(vec![Q::one(), Q::zero(), Q::zero()]).unwrap();
        assert_eq!(jet_adjoint_tangent(&id, &ones, 3).unwrap(), ones);
        // ν = k leaves the last slot alone
        let g2 = JetElement::new(vec![Q::one(), Q::zero(), Q::zero(), q(4, 1)]).unwrap();
        assert_eq!(jet_adjoint_tangent(&g2, &ones, 3).unwrap(), ones);
        let g = JetElement::new(vec![Q::one(), q(2, 1)]).unwrap();
        assert_eq!(
            jet_adjoint_tangent(&g, &ones, 3).unwrap(),
            vec![Q::one(), Q::one(), q(-3, 1)]
        );
    }

    #[test]
    fn jet_tangent_matches_conjugation() {
        // g = z + a z^{ν+1}, h = z + b1 z^{k+1} + … + b_{ν+1} z^{k+ν+1}
        for (nu, k) in [(1usize, 3usize), (2, 2), (2, 5), (3, 1)] {
            let n = k + nu + 1;
            let a = q(3, 2);
            let b: Vec<Q> = (0..=nu).map(|j| q(j as i64 + 2, 1)).collect();
            let mut gs = PowerSeries::var(n);
            gs.set_coeff(nu + 1, a.clone());
            let g = GermDiffeo::new(gs).unwrap();
            let mut hs = PowerSeries::var(n);
            for (j, bj) in b.iter().enumerate() {
                hs.set_coeff(k + 1 + j, bj.clone());
            }
            let h = GermDiffeo::new(hs).unwrap();
            let conj = g.compose(&h).compose(&g.inverse());
            let acted = jet_adjoint_tangent(&g.jet(nu + 1), &b, k).unwrap();
            let got: Vec<Q> = (0..=nu).map(|j| conj.series().coeff(k + 1 + j).clone()).collect();
            assert_eq!(got, acted, "nu={nu} k={k}");
        }
    }

    #[test]
    fn pow_and_flow_additivity() {
        let n = 10;
        let v = make_v(2, &q(-1, 3), n);
        let f1 = exp_field(&v, &q(1, 2)).unwrap();
        let f2 = exp_field(&v, &q(5, 3)).unwrap();
        assert_eq!(f1.compose(&f2), exp_field(&v, &q(13, 6)).unwrap());
        assert_eq!(exp_field(&v, &Q::one()).unwrap().pow(3), exp_field(&v, &q(3, 1)).unwrap());
        assert!(f1.pow(-2).compose(&f1.pow(2)).is_identity());
    }
}

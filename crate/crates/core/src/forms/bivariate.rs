use crate::error::{Error, Result};
use crate::field::Field;
use std::fmt;

/// Bivariate polynomial jet: coefficients of `x^i y^j` for `i + j ≤ prec`.
///
/// Products and quotients are truncated at total degree `prec`; derivatives
/// lower the precision by one.
#[derive(Clone, PartialEq)]
pub struct BivariatePoly<F> {
    prec: usize,
    // c[i][j] for i + j <= prec
    c: Vec<Vec<F>>,
}

impl<F: Field> BivariatePoly<F> {
    pub fn zero(prec: usize) -> Self {
        let c = (0..=prec).map(|i| vec![F::zero(); prec - i + 1]).collect();
        BivariatePoly { prec, c }
    }

    pub fn constant(a: F, prec: usize) -> Self {
        let mut p = Self::zero(prec);
        p.c[0][0] = a;
        p
    }

    pub fn one(prec: usize) -> Self {
        Self::constant(F::one(), prec)
    }

    pub fn x(prec: usize) -> Self {
        Self::from_terms(&[(1, 0, F::one())], prec)
    }

    pub fn y(prec: usize) -> Self {
        Self::from_terms(&[(0, 1, F::one())], prec)
    }

    /// Sum of `c·x^i y^j`; terms above `prec` are dropped.
    pub fn from_terms(terms: &[(usize, usize, F)], prec: usize) -> Self {
        let mut p = Self::zero(prec);
        for (i, j, a) in terms {
            if i + j <= prec {
                p.c[*i][*j] = p.c[*i][*j].add(a);
            }
        }
        p
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    /// Coefficient of `x^i y^j`; `i + j` must not exceed the precision.
    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.c[i][j]
    }

    /// Nonzero terms `(i, j, c)` in degree-lexicographic order.
    pub fn terms(&self) -> Vec<(usize, usize, F)> {
        let mut out = Vec::new();
        for d in 0..=self.prec {
            for i in (0..=d).rev() {
                let a = &self.c[i][d - i];
                if !a.is_zero() {
                    out.push((i, d - i, a.clone()));
                }
            }
        }
        out
    }

    pub fn truncate(&self, prec: usize) -> Self {
        assert!(prec <= self.prec);
        let c = (0..=prec).map(|i| self.c[i][..=prec - i].to_vec()).collect();
        BivariatePoly { prec, c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().flatten().all(|a| a.is_zero())
    }

    fn zip(&self, o: &Self, f: impl Fn(&F, &F) -> F) -> Self {
        let prec = self.prec.min(o.prec);
        let c = (0..=prec)
            .map(|i| (0..=prec - i).map(|j| f(&self.c[i][j], &o.c[i][j])).collect())
            .collect();
        BivariatePoly { prec, c }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.scale(&F::one().neg())
    }

    pub fn scale(&self, s: &F) -> Self {
        let c = self.c.iter().map(|r| r.iter().map(|a| a.mul(s)).collect()).collect();
        BivariatePoly { prec: self.prec, c }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prec = self.prec.min(o.prec);
        let mut out = Self::zero(prec);
        for i1 in 0..=prec {
            for j1 in 0..=prec - i1 {
                let a = &self.c[i1][j1];
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..=prec - i1 - j1 {
                    for j2 in 0..=prec - i1 - j1 - i2 {
                        let b = &o.c[i2][j2];
                        if !b.is_zero() {
                            let t = &mut out.c[i1 + i2][j1 + j2];
                            *t = t.add(&a.mul(b));
                        }
                    }
                }
            }
        }
        out
    }

    /// `∂/∂x`, precision lowered by one.
    pub fn dx(&self) -> Self {
        let prec = self.prec.saturating_sub(1);
        let mut out = Self::zero(prec);
        if self.prec == 0 {
            return out;
        }
        for i in 1..=self.prec {
            for j in 0..=self.prec - i {
                out.c[i - 1][j] = self.c[i][j].scale(i as i64);
            }
        }
        out
    }

    /// `∂/∂y`, precision lowered by one.
    pub fn dy(&self) -> Self {
        let prec = self.prec.saturating_sub(1);
        let mut out = Self::zero(prec);
        if self.prec == 0 {
            return out;
        }
        for i in 0..self.prec {
            for j in 1..=self.prec - i {
                out.c[i][j - 1] = self.c[i][j].scale(j as i64);
            }
        }
        out
    }

    /// Inverse as a truncated unit; `None` when the constant term vanishes.
    pub fn reciprocal(&self) -> Option<Self> {
        let c0 = self.c[0][0].inv()?;
        // 1/f = c0 · Σ (-u)^k with u = c0·f - 1 of positive valuation
        let mut u = self.scale(&c0);
        u.c[0][0] = F::zero();
        let mu = u.neg();
        let mut acc = Self::one(self.prec);
        let mut term = Self::one(self.prec);
        for _ in 0..self.prec {
            term = term.mul(&mu);
            acc = acc.add(&term);
        }
        Some(acc.scale(&c0))
    }
}

impl<F: Field> fmt::Debug for BivariatePoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            write!(f, "0")?;
        }
        for (n, (i, j, a)) in terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({a})x^{i}y^{j}")?;
        }
        write!(f, " + O({})", self.prec + 1)
    }
}

/// `A dx + B dy` with jet coefficients.
#[derive(Clone, PartialEq)]
pub struct PolyForm<F> {
    pub a: BivariatePoly<F>,
    pub b: BivariatePoly<F>,
}

impl<F: Field> fmt::Debug for PolyForm<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}]dx + [{:?}]dy", self.a, self.b)
    }
}

impl<F: Field> PolyForm<F> {
    pub fn new(a: BivariatePoly<F>, b: BivariatePoly<F>) -> Self {
        PolyForm { a, b }
    }

    pub fn zero(prec: usize) -> Self {
        PolyForm { a: BivariatePoly::zero(prec), b: BivariatePoly::zero(prec) }
    }

    pub fn dx(prec: usize) -> Self {
        PolyForm { a: BivariatePoly::one(prec), b: BivariatePoly::zero(prec) }
    }

    pub fn dy(prec: usize) -> Self {
        PolyForm { a: BivariatePoly::zero(prec), b: BivariatePoly::one(prec) }
    }

    /// `dh`.
    pub fn exact(h: &BivariatePoly<F>) -> Self {
        PolyForm { a: h.dx(), b: h.dy() }
    }

    pub fn prec(&self) -> usize {
        self.a.prec().min(self.b.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        PolyForm { a: self.a.add(&o.a), b: self.b.add(&o.b) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        PolyForm { a: self.a.sub(&o.a), b: self.b.sub(&o.b) }
    }

    pub fn neg(&self) -> Self {
        PolyForm { a: self.a.neg(), b: self.b.neg() }
    }

    pub fn truncate(&self, prec: usize) -> Self {
        PolyForm { a: self.a.truncate(prec), b: self.b.truncate(prec) }
    }

    /// `h·ω`.
    pub fn mul_poly(&self, h: &BivariatePoly<F>) -> Self {
        PolyForm { a: self.a.mul(h), b: self.b.mul(h) }
    }

    /// `dx∧dy` coefficient of `dω`.
    pub fn d(&self) -> BivariatePoly<F> {
        self.b.dx().sub(&self.a.dy())
    }

    /// `dx∧dy` coefficient of `ω∧η`.
    pub fn wedge(&self, o: &Self) -> BivariatePoly<F> {
        self.a.mul(&o.b).sub(&self.b.mul(&o.a))
    }
}

/// Three 1-forms `(ω0, ω1, ω2)` with `ω0 ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveTriple<F: Field> {
    pub w0: PolyForm<F>,
    pub w1: PolyForm<F>,
    pub w2: PolyForm<F>,
}

impl<F: Field> ProjectiveTriple<F> {
    pub fn new(w0: PolyForm<F>, w1: PolyForm<F>, w2: PolyForm<F>) -> Result<Self> {
        if w0.is_zero() {
            return Err(Error::InvalidInput("ω0 must be nonzero".into()));
        }
        Ok(ProjectiveTriple { w0, w1, w2 })
    }

    pub fn prec(&self) -> usize {
        self.w0.prec().min(self.w1.prec()).min(self.w2.prec())
    }

    pub fn truncate(&self, prec: usize) -> Self {
        ProjectiveTriple { w0: self.w0.truncate(prec), w1: self.w1.truncate(prec), w2: self.w2.truncate(prec) }
    }
}

/// Residuals `RHS - LHS` of the three structure equations
/// `dω0 = ω0∧ω1`, `dω1 = 2ω0∧ω2`, `dω2 = ω1∧ω2`, as `dx∧dy` coefficients.
#[derive(Clone, PartialEq)]
pub struct TripleReport<F> {
    pub residuals: [BivariatePoly<F>; 3],
    /// Total degree through which the residuals are exact.
    pub certified_degree: usize,
}

impl<F: Field> fmt::Debug for TripleReport<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TripleReport")
            .field("residuals", &self.residuals)
            .field("certified_degree", &self.certified_degree)
            .finish()
    }
}

impl<F: Field> TripleReport<F> {
    pub fn integrable(&self) -> bool {
        self.residuals.iter().all(|r| r.is_zero())
    }
}

pub fn triple_check<F: Field>(t: &ProjectiveTriple<F>) -> TripleReport<F> {
    let r0 = t.w0.wedge(&t.w1).sub(&t.w0.d());
    let r1 = t.w0.wedge(&t.w2).scale(&F::from_i64(2)).sub(&t.w1.d());
    let r2 = t.w1.wedge(&t.w2).sub(&t.w2.d());
    let certified_degree = r0.prec().min(r1.prec()).min(r2.prec());
    TripleReport {
        residuals: [r0.truncate(certified_degree), r1.truncate(certified_degree), r2.truncate(certified_degree)],
        certified_degree,
    }
}

/// The `f`-action `(fω0, ω1 - df/f, ω2/f)` followed by the `g`-action
/// `(ω0, ω1 + 2gω0, ω2 + gω1 + g²ω0 - dg)`.
///
/// Applying `(f1, g1)` then `(f2, g2)` equals the single action
/// `(f1·f2, g2 + g1/f2)`.
pub fn gauge_transform<F: Field>(
    t: &ProjectiveTriple<F>,
    f: &BivariatePoly<F>,
    g: &BivariatePoly<F>,
) -> Result<ProjectiveTriple<F>> {
    let finv = f.reciprocal().ok_or_else(|| Error::InvalidInput("f is not a unit".into()))?;
    let w0 = t.w0.mul_poly(f);
    let w1 = t.w1.sub(&PolyForm::exact(f).mul_poly(&finv));
    let w2 = t.w2.mul_poly(&finv);
    let two_g = g.scale(&F::from_i64(2));
    let w1g = w1.add(&w0.mul_poly(&two_g));
    let w2g = w2.add(&w1.mul_poly(g)).add(&w0.mul_poly(&g.mul(g))).sub(&PolyForm::exact(g));
    ProjectiveTriple::new(w0, w1g, w2g)
}

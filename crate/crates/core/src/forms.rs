//! Formal meromorphic 1-forms in one variable and their germ symmetries, plus
//! bivariate polynomial 1-forms for projective triples.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::germ::GermDiffeo;
use crate::linalg::{Matrix, Rref};
use crate::series::{LaurentSeries, PowerSeries};
use std::fmt;

mod bivariate;
pub use bivariate::{gauge_transform, triple_check, BivariatePoly, PolyForm, ProjectiveTriple, TripleReport};

/// `L(z) dz` for a truncated Laurent series `L`.
#[derive(Clone, PartialEq)]
pub struct FormalOneForm<F> {
    laurent: LaurentSeries<F>,
}

impl<F: Field> fmt::Debug for FormalOneForm<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}) dz", self.laurent)
    }
}

impl<F: Field> FormalOneForm<F> {
    pub fn new(laurent: LaurentSeries<F>) -> Self {
        FormalOneForm { laurent }
    }

    /// `ω_{k,λ} = dz/z^{k+1} + λ dz/z`, known through order `trunc`.
    pub fn omega(k: usize, lambda: &F, trunc: i64) -> Self {
        let pole = k + 1;
        let len = (trunc + pole as i64 + 1).max(1) as usize;
        let mut c = vec![F::zero(); len];
        c[0] = F::one();
        if k >= 1 && k < len {
            c[k] = c[k].add(lambda);
        }
        FormalOneForm { laurent: LaurentSeries::new(pole, c) }
    }

    /// `dz/z^{k+1}`.
    pub fn polar(k: usize, trunc: i64) -> Self {
        Self::omega(k, &F::zero(), trunc)
    }

    /// `dz/z`.
    pub fn logarithmic(trunc: i64) -> Self {
        Self::omega(0, &F::zero(), trunc)
    }

    pub fn laurent(&self) -> &LaurentSeries<F> {
        &self.laurent
    }

    pub fn pole_order(&self) -> usize {
        self.laurent.pole_order()
    }

    pub fn residue(&self) -> Option<F> {
        self.laurent.residue()
    }

    pub fn trunc(&self) -> i64 {
        self.laurent.trunc()
    }

    pub fn scale(&self, c: &F) -> Self {
        FormalOneForm { laurent: self.laurent.scale(c) }
    }

    pub fn agrees_through(&self, other: &Self, n: i64) -> bool {
        self.laurent.agrees_through(&other.laurent, n)
    }
}

/// `f^*ω = ω(f(z))·f'(z)`.
///
/// With `ω` of pole order `m` known through `N_ω` and `f` known through `M`,
/// the result is known through `min(N_ω, M - 1 - m)`: the pole consumes `m`
/// orders of the germ. That order must be at least `-1` so the residue is
/// resolved.
pub fn pullback<F: Field>(f: &GermDiffeo<F>, omega: &FormalOneForm<F>) -> Result<FormalOneForm<F>> {
    let m = omega.pole_order();
    let big_m = f.trunc() as i64;
    let out_trunc = omega.trunc().min(big_m - 1 - m as i64);
    if out_trunc < -1 {
        return Err(Error::InsufficientOrder { needed: m as i64, available: big_m - 1 });
    }
    let len = (out_trunc + m as i64 + 1) as usize;
    // P(z) = z^m L(z)
    let p = PowerSeries::from_coeffs(omega.laurent.coeffs(), len - 1);
    let fs = f.series().truncate(len);
    let u = fs.shift_down(1).expect("germ vanishes at 0");
    let u_inv_m = u.reciprocal().expect("unit").pow(m as u32);
    let pf = p.compose(&fs.truncate(len - 1)).expect("no constant term");
    let q = u_inv_m.mul(&pf).mul(&fs.derivative());
    Ok(FormalOneForm { laurent: LaurentSeries::from_power_series(&q.truncate(len - 1), m) })
}

/// Strongest structure a family of germs preserves.
#[derive(Clone, Debug, PartialEq)]
pub enum InvariantForm<F: Field> {
    /// An invariant form with a simple pole.
    Logarithmic(FormalOneForm<F>),
    /// An invariant form with pole order `k+1` and normalized residue `λ`.
    Omega { k: usize, lambda: F, form: FormalOneForm<F> },
    /// A form `ω` with pole order `k+1` and `g^*ω = a_g^{-k} ω` for all germs.
    Line { k: usize, form: FormalOneForm<F> },
    NoneAtOrder(usize),
}

/// Search for a form of pole order `m` with `g^*ω = c_g ω` for every germ,
/// where `c_g = a_g^{-(m-1)}` when `scaled`, else 1. The leading coefficient is
/// normalized to 1 and free coefficients are pinned to zero.
fn solve_invariant<F: Field>(gens: &[GermDiffeo<F>], m: usize, scaled: bool) -> Option<FormalOneForm<F>> {
    let big_m = gens.iter().map(|g| g.trunc()).min()? as i64;
    let t = big_m - 1 - m as i64;
    if t < -1 {
        return None;
    }
    let exps: Vec<i64> = (-(m as i64)..=t).collect();
    let ne = exps.len();
    // unknowns: w_e for e > -m
    let mut rows: Vec<Vec<F>> = Vec::new();
    let mut rhs: Vec<F> = Vec::new();
    for g in gens {
        let c_g = if scaled { g.linear_part().pow(-(m as i64 - 1))? } else { F::one() };
        let len = ne;
        let gs = g.series().truncate(len.min(g.trunc()));
        let u = gs.shift_down(1).ok()?;
        let u_inv = u.reciprocal().ok()?;
        let gp = gs.derivative();
        // column e: coefficients of g^*(z^e dz) = z^e u^e g' for s in exps
        let mut upow = u_inv.pow(m as u32);
        let mut cols: Vec<Vec<F>> = Vec::with_capacity(ne);
        for &e in &exps {
            let ser = upow.mul(&gp);
            let col: Vec<F> = exps
                .iter()
                .map(|&s| {
                    let idx = s - e;
                    if idx < 0 {
                        F::zero()
                    } else {
                        ser.coeffs().get(idx as usize).cloned().unwrap_or_else(F::zero)
                    }
                })
                .collect();
            cols.push(col);
            upow = upow.mul(&u);
        }
        for (si, _) in exps.iter().enumerate() {
            let mut row = Vec::with_capacity(ne - 1);
            for (ei, col) in cols.iter().enumerate().skip(1) {
                let mut v = col[si].clone();
                if ei == si {
                    v = v.sub(&c_g);
                }
                row.push(v);
            }
            let mut lead = cols[0][si].clone();
            if si == 0 {
                lead = lead.sub(&c_g);
            }
            rows.push(row);
            rhs.push(lead.neg());
        }
    }
    let coeffs = if ne == 1 {
        if rhs.iter().all(|x| x.is_zero()) {
            vec![F::one()]
        } else {
            return None;
        }
    } else {
        let a = Matrix::from_rows(rows);
        let sol = Rref::new(&a, true).solve(&rhs).ok()?;
        let mut c = vec![F::one()];
        c.extend(sol);
        c
    };
    Some(FormalOneForm::new(LaurentSeries::new(m, coeffs)))
}

/// Strongest invariant structure shared by all germs, certified through the
/// smallest truncation order among them: a logarithmic form, then an
/// `ω_{k,λ}`-type form, then a preserved line `C·ω`.
pub fn invariant_form_search<F: Field>(gens: &[GermDiffeo<F>]) -> Result<InvariantForm<F>> {
    if gens.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    let n = gens.iter().map(|g| g.trunc()).min().unwrap_or(0);
    let max_pole = (n.saturating_sub(1) / 2).max(1);
    if let Some(form) = solve_invariant(gens, 1, false) {
        return Ok(InvariantForm::Logarithmic(form));
    }
    for m in 2..=max_pole {
        if let Some(form) = solve_invariant(gens, m, false) {
            let lambda = form.residue().unwrap_or_else(F::zero);
            return Ok(InvariantForm::Omega { k: m - 1, lambda, form });
        }
    }
    for m in 2..=max_pole {
        if let Some(form) = solve_invariant(gens, m, true) {
            return Ok(InvariantForm::Line { k: m - 1, form });
        }
    }
    Ok(InvariantForm::NoneAtOrder(n))
}

/// Whether `f^*ω = c·ω` through the certified order of the pullback.
pub fn preserves_up_to_scale<F: Field>(f: &GermDiffeo<F>, omega: &FormalOneForm<F>, c: &F) -> Result<bool> {
    let pb = pullback(f, omega)?;
    Ok(pb.agrees_through(&omega.scale(c), pb.trunc()))
}

/// Whether `f` preserves `ω_{k,λ}` through the certified pullback order.
pub fn preserves_omega<F: Field>(f: &GermDiffeo<F>, k: usize, lambda: &F) -> Result<bool> {
    let omega = FormalOneForm::omega(k, lambda, f.trunc() as i64);
    preserves_up_to_scale(f, &omega, &F::one())
}

/// Whether `f` preserves the line `C·dz/z^{k+1}` (then with factor `a^{-k}`).
pub fn preserves_line<F: Field>(f: &GermDiffeo<F>, k: usize) -> Result<bool> {
    let omega = FormalOneForm::polar(k, f.trunc() as i64);
    let c = f.linear_part().pow(-(k as i64)).ok_or(Error::ZeroLinearCoefficient)?;
    preserves_up_to_scale(f, &omega, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Cyclotomic;
    use crate::germ::{exp_field, make_v};

    type Q = Cyclotomic;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    #[test]
    fn log_form_under_linear_map() {
        let f = GermDiffeo::linear(q(5, 3), 10).unwrap();
        let w = FormalOneForm::<Q>::logarithmic(10);
        let pb = pullback(&f, &w).unwrap();
        assert!(pb.agrees_through(&w, pb.trunc()));
        assert_eq!(pb.trunc(), 8);
    }

    #[test]
    fn flows_preserve_omega() {
        let n = 16;
        for (k, lam, t) in [(1usize, q(0, 1), q(1, 1)), (2, q(3, 1), q(-2, 5)), (3, q(1, 2), q(7, 1))] {
            let f = exp_field(&make_v(k, &lam, n), &t).unwrap();
            let w = FormalOneForm::omega(k, &lam, n as i64);
            let pb = pullback(&f, &w).unwrap();
            assert_eq!(pb.trunc(), (n - 2 - k) as i64);
            assert!(pb.agrees_through(&w, pb.trunc()));
            // but not a different residue
            let w2 = FormalOneForm::omega(k, &lam.add(&Q::one()), n as i64);
            assert!(!preserves_up_to_scale(&f, &w2, &Q::one()).unwrap());
        }
    }

    #[test]
    fn polar_line_examples() {
        let n = 12;
        // z/(1 - b z^k)^{1/k} with k = 1, b = 3: z/(1-3z)
        let c: Vec<i64> = (0..=n).map(|j| if j == 0 { 0 } else { 3i64.pow(j as u32 - 1) }).collect();
        let f = GermDiffeo::new(PowerSeries::from_i64s(&c, n)).unwrap();
        let w = FormalOneForm::<Q>::polar(1, n as i64);
        assert!(preserves_up_to_scale(&f, &w, &Q::one()).unwrap());
        let a = Q::root_of_unity(5, 1).scale(2);
        let lin = GermDiffeo::linear(a.clone(), n).unwrap();
        let w3 = FormalOneForm::<Q>::polar(3, n as i64);
        assert!(preserves_up_to_scale(&lin, &w3, &a.pow(-3).unwrap()).unwrap());
        assert!(preserves_line(&lin, 3).unwrap());
    }

    #[test]
    fn insufficient_order_is_reported() {
        let f = GermDiffeo::<Q>::identity(3);
        let w = FormalOneForm::polar(4, 10);
        assert!(matches!(pullback(&f, &w), Err(Error::InsufficientOrder { .. })));
    }

    #[test]
    fn search_examples() {
        let n = 16;
        let lin = vec![GermDiffeo::linear(q(2, 1), n).unwrap(), GermDiffeo::linear(q(3, 1), n).unwrap()];
        assert!(matches!(invariant_form_search(&lin).unwrap(), InvariantForm::Logarithmic(_)));

        let e = exp_field(&make_v(2, &q(3, 1), n), &Q::one()).unwrap();
        let minus = GermDiffeo::linear(q(-1, 1), n).unwrap().compose(&e);
        match invariant_form_search(&[e, minus]).unwrap() {
            InvariantForm::Omega { k, lambda, .. } => {
                assert_eq!(k, 2);
                assert_eq!(lambda, q(3, 1));
            }
            other => panic!("unexpected {other:?}"),
        }

        let c: Vec<i64> = (0..=n).map(|j| if j == 0 { 0 } else { 1 }).collect();
        let mob = GermDiffeo::new(PowerSeries::from_i64s(&c, n)).unwrap();
        match invariant_form_search(&[mob, GermDiffeo::linear(q(2, 1), n).unwrap()]).unwrap() {
            InvariantForm::Line { k, .. } => assert_eq!(k, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}

//! Transition systems of germs over a triangulated surface: Ueda type and
//! class, triangle obstructions, the order-by-order construction of a
//! foliated system, and the log-affine variant.
//!
//! For an edge `i < j` the system stores `φ_ji`, the germ giving `y_j` as a
//! function of `y_i`. Relations are read in `y_i`:
//! `t_ij y_j - y_i = R_ij(y_i) = Σ_{l≥2} a_ij^{(l)} y_i^l`. The linear parts
//! `t_ij` form a flat unitary system and `a^{(l)}` is a 1-cochain with
//! coefficients in `Σ_{-(l-1)}`.

use crate::cech::{
    canonical_complex, cohomology, cup_cochain, CoboundarySolution, Cohomology, SurfaceComplex, TwistedCochain,
    UnitaryLocalSystem,
};
use crate::classify::translation_cocycle;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::germ::GermDiffeo;
use crate::linalg::{Matrix, Rref};
use crate::series::PowerSeries;
use rand::Rng;
use std::fmt;

#[derive(Clone, PartialEq)]
pub struct TransitionSystem<F> {
    complex: SurfaceComplex,
    /// `φ_ji` for each edge `i < j`, in edge order.
    maps: Vec<GermDiffeo<F>>,
    t: UnitaryLocalSystem<F>,
}

impl<F: Field> fmt::Debug for TransitionSystem<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransitionSystem")
            .field("edges", &self.complex.n_edges())
            .field("trunc", &self.trunc())
            .field("maps", &self.maps)
            .finish()
    }
}

fn first_mismatch<F: Field>(a: &PowerSeries<F>, b: &PowerSeries<F>) -> Option<usize> {
    let n = a.trunc().min(b.trunc());
    (0..=n).find(|&j| a.coeff(j) != b.coeff(j))
}

impl<F: Field> TransitionSystem<F> {
    /// System from germs on oriented edges: `((a, b), φ_ab)` with
    /// `y_a = φ_ab(y_b)`. Each edge needs at least one orientation; when both
    /// are given they must be mutually inverse.
    pub fn new(complex: SurfaceComplex, germs: Vec<((usize, usize), GermDiffeo<F>)>) -> Result<Self> {
        let n = germs.first().map(|(_, g)| g.trunc()).ok_or_else(|| Error::InvalidInput("no edge germs".into()))?;
        if germs.iter().any(|(_, g)| g.trunc() != n) {
            return Err(Error::InvalidInput("edge germs have different truncation orders".into()));
        }
        let mut down: Vec<Option<GermDiffeo<F>>> = vec![None; complex.n_edges()];
        let mut up: Vec<Option<GermDiffeo<F>>> = vec![None; complex.n_edges()];
        for ((a, b), g) in germs {
            let e = complex
                .edge_index(a, b)
                .ok_or_else(|| Error::InvalidInput(format!("({a},{b}) is not an edge of the complex")))?;
            let slot = if a > b { &mut down[e] } else { &mut up[e] };
            if slot.is_some() {
                return Err(Error::InvalidInput(format!("edge ({a},{b}) given twice")));
            }
            *slot = Some(g);
        }
        let mut maps = Vec::with_capacity(complex.n_edges());
        for (e, [i, j]) in complex.edges().iter().copied().enumerate() {
            let m = match (&down[e], &up[e]) {
                (Some(d), Some(u)) => {
                    let id = d.compose(u);
                    if let Some(order) = first_mismatch(id.series(), GermDiffeo::identity(n).series()) {
                        return Err(Error::InversePair { edge: (i, j), order });
                    }
                    d.clone()
                }
                (Some(d), None) => d.clone(),
                (None, Some(u)) => u.inverse(),
                (None, None) => return Err(Error::InvalidInput(format!("no germ on edge ({i},{j})"))),
            };
            maps.push(m);
        }
        Self::from_maps(complex, maps)
    }

    /// System from `φ_ji` for each edge `i < j`, in edge order.
    pub fn from_maps(complex: SurfaceComplex, maps: Vec<GermDiffeo<F>>) -> Result<Self> {
        if maps.len() != complex.n_edges() {
            return Err(Error::InvalidInput(format!("expected {} edge germs, got {}", complex.n_edges(), maps.len())));
        }
        let n = maps[0].trunc();
        if maps.iter().any(|g| g.trunc() != n) {
            return Err(Error::InvalidInput("edge germs have different truncation orders".into()));
        }
        let weights = maps.iter().map(|g| g.linear_part().inv().expect("germ")).collect();
        let t = UnitaryLocalSystem::new(&complex, weights)?;
        Ok(TransitionSystem { complex, maps, t })
    }

    /// System with relations `R_ij` (valuation ≥ 2) over the linear parts `t`.
    pub fn from_relations(
        complex: SurfaceComplex,
        t: &UnitaryLocalSystem<F>,
        relations: &[PowerSeries<F>],
    ) -> Result<Self> {
        let t = UnitaryLocalSystem::new(&complex, t.weights().to_vec())?;
        if relations.len() != complex.n_edges() {
            return Err(Error::InvalidInput("one relation per edge required".into()));
        }
        let mut maps = Vec::new();
        for (w, r) in t.weights().iter().zip(relations) {
            if !r.coeff(0).is_zero() || !r.coeff(1).is_zero() {
                return Err(Error::InvalidInput("relations start at order 2".into()));
            }
            let s = r.add(&PowerSeries::var(r.trunc())).scale(&w.inv().expect("unit"));
            maps.push(GermDiffeo::new(s)?);
        }
        Ok(TransitionSystem { complex, maps, t })
    }

    pub fn linear(complex: SurfaceComplex, t: &UnitaryLocalSystem<F>, n: usize) -> Result<Self> {
        let rel = vec![PowerSeries::zero(n); complex.n_edges()];
        Self::from_relations(complex, t, &rel)
    }

    pub fn complex(&self) -> &SurfaceComplex {
        &self.complex
    }

    pub fn trunc(&self) -> usize {
        self.maps[0].trunc()
    }

    /// Linear parts `t_ij`.
    pub fn linear_system(&self) -> &UnitaryLocalSystem<F> {
        &self.t
    }

    /// `φ_ji` for edge index `e = (i, j)`, `i < j`.
    pub fn edge_map(&self, e: usize) -> &GermDiffeo<F> {
        &self.maps[e]
    }

    /// `φ_ab`, giving `y_a` as a function of `y_b`.
    pub fn germ(&self, a: usize, b: usize) -> Option<GermDiffeo<F>> {
        let e = self.complex.edge_index(a, b)?;
        Some(if a > b { self.maps[e].clone() } else { self.maps[e].inverse() })
    }

    /// `R_ij(y) = t_ij φ_ji(y) - y`.
    pub fn relation(&self, e: usize) -> PowerSeries<F> {
        let s = self.maps[e].series();
        s.scale(&self.t.weights()[e]).sub(&PowerSeries::var(s.trunc()))
    }

    pub fn coefficient(&self, e: usize, l: usize) -> F {
        if l > self.trunc() {
            return F::zero();
        }
        self.maps[e].series().coeff(l).mul(&self.t.weights()[e])
    }

    /// `{a_ij^{(l)}}` as a 1-cochain.
    pub fn coefficient_cochain(&self, l: usize) -> TwistedCochain<F> {
        TwistedCochain::new(1, (0..self.complex.n_edges()).map(|e| self.coefficient(e, l)).collect())
    }

    /// Adds `delta_ij` to every `a_ij^{(l)}`.
    pub fn add_to_coefficients(&self, l: usize, delta: &TwistedCochain<F>) -> Self {
        let mut out = self.clone();
        for (e, d) in delta.values.iter().enumerate() {
            if d.is_zero() || l > self.trunc() {
                continue;
            }
            let mut s = out.maps[e].series().clone();
            let c = s.coeff(l).add(&d.div(&self.t.weights()[e]).expect("unit"));
            s.set_coeff(l, c);
            out.maps[e] = GermDiffeo::new(s).expect("linear part untouched");
        }
        out
    }

    /// New coordinates `z_i` with `y_i = g_i(z_i)`.
    pub fn change_coordinates(&self, g: &[GermDiffeo<F>]) -> Self {
        let mut out = self.clone();
        for (e, [i, j]) in self.complex.edges().iter().copied().enumerate() {
            out.maps[e] = g[j].inverse().compose(&self.maps[e]).compose(&g[i]);
        }
        out
    }

    /// Truncate, or pad with zero coefficients.
    pub fn with_trunc(&self, n: usize) -> Self {
        let mut out = self.clone();
        for m in out.maps.iter_mut() {
            let c = m.series().coeffs();
            let s = PowerSeries::from_coeffs(c, n);
            *m = GermDiffeo::new(s).expect("same linear part");
        }
        out
    }

    /// Defect `A_ijk(y_i) = t_ik (φ_kj∘φ_ji - φ_ki)(y_i)` of the sorted
    /// triangle with index `tri`.
    pub fn triangle_defect(&self, tri: usize) -> PowerSeries<F> {
        let [i, j, k] = self.complex.sorted_triangles()[tri];
        let ij = self.complex.edge_index(i, j).expect("edge");
        let jk = self.complex.edge_index(j, k).expect("edge");
        let ik = self.complex.edge_index(i, k).expect("edge");
        let via = self.maps[jk].compose(&self.maps[ij]);
        via.series().sub(self.maps[ik].series()).scale(&self.t.weights()[ik])
    }

    /// Order-`l` coefficients of all triangle defects.
    pub fn defect_cochain(&self, l: usize) -> TwistedCochain<F> {
        TwistedCochain::new(
            2,
            (0..self.complex.n_triangles()).map(|t| self.triangle_defect(t).coeff(l).clone()).collect(),
        )
    }

    fn cohomology_of_power(&self, k: i64) -> Result<Cohomology<F>> {
        cohomology(&self.complex, &self.t.power(k))
    }
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// Largest `μ` with the triangle condition satisfied through order `μ`.
    pub order_valid: usize,
    pub trunc: usize,
    /// First failing triangle and order, if any.
    pub first_defect: Option<([usize; 3], usize)>,
}

pub fn validate<F: Field>(t: &TransitionSystem<F>) -> Result<ValidationReport> {
    UnitaryLocalSystem::new(&t.complex, t.t.weights().to_vec())?;
    let n = t.trunc();
    let mut best: Option<([usize; 3], usize)> = None;
    for tri in 0..t.complex.n_triangles() {
        let d = t.triangle_defect(tri);
        if let Some(l) = (0..=n).find(|&l| !d.coeff(l).is_zero()) {
            if best.map(|(_, b)| l < b).unwrap_or(true) {
                best = Some((t.complex.sorted_triangles()[tri], l));
            }
        }
    }
    Ok(ValidationReport { order_valid: best.map(|(_, l)| l - 1).unwrap_or(n), trunc: n, first_defect: best })
}

/// Order-`(μ+1)` triangle obstruction, a 2-cochain in `Σ_{-μ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionCocycle<F> {
    pub order: usize,
    /// The obstruction has coefficients in `Σ_{power}` with `power = -μ`.
    pub power: i64,
    pub cochain: TwistedCochain<F>,
}

/// `δa^{(μ+1)} - A^{(μ+1)}`: the part of the order-`(μ+1)` defect not
/// involving the order-`(μ+1)` coefficients, with the sign that makes
/// `δa^{(μ+1)} = O` the condition for validity through `μ+1`.
fn raw_obstruction<F: Field>(t: &TransitionSystem<F>, mu: usize) -> TwistedCochain<F> {
    let w = t.t.power(-(mu as i64));
    let d = crate::cech::coboundary(&t.complex, &w, &t.coefficient_cochain(mu + 1));
    d.sub(&t.defect_cochain(mu + 1))
}

fn check_shape<F: Field>(t: &TransitionSystem<F>, nu: usize, mu: usize) -> Result<()> {
    if nu == 0 || mu <= nu {
        return Err(Error::ShapeViolation(format!("need 0 < ν < μ, got ν={nu}, μ={mu}")));
    }
    if mu + 1 > t.trunc() {
        return Err(Error::InsufficientOrder { needed: mu as i64 + 1, available: t.trunc() as i64 });
    }
    let rep = validate(t)?;
    if rep.order_valid < mu {
        return Err(Error::ShapeViolation(format!(
            "triangle condition fails at order {} < {}",
            rep.order_valid + 1,
            mu + 1
        )));
    }
    for l in 2..=nu {
        if !t.coefficient_cochain(l).is_zero() {
            return Err(Error::ShapeViolation(format!("nonzero coefficient at order {l} ≤ ν")));
        }
    }
    Ok(())
}

/// Triangle obstruction by direct expansion of the defect, for a system
/// linear through `ν` and valid through `μ`.
pub fn triangle_obstruction<F: Field>(t: &TransitionSystem<F>, nu: usize, mu: usize) -> Result<ObstructionCocycle<F>> {
    check_shape(t, nu, mu)?;
    Ok(ObstructionCocycle { order: mu + 1, power: -(mu as i64), cochain: raw_obstruction(t, mu) })
}

/// `[y^target] (y + Σ_m a_m y^m)^l` restricted to terms using at least one
/// `a_m`, by enumerating multisets of exponents.
fn power_coefficient<F: Field>(l: usize, target: usize, a: &[(usize, F)]) -> F {
    // counts[idx] copies of a[idx]; remaining l - r factors are y
    #[allow(clippy::too_many_arguments)]
    fn go<F: Field>(
        idx: usize,
        a: &[(usize, F)],
        l: usize,
        target: usize,
        r: usize,
        deg: usize,
        prod: F,
        denom: u128,
        acc: &mut F,
    ) {
        if idx == a.len() {
            if r >= 1 && r <= l && deg + (l - r) == target {
                // l! / ((l-r)! · Π c!)
                let mut num: u128 = 1;
                for x in (l - r + 1)..=l {
                    num *= x as u128;
                }
                let c = F::from_ratio((num / denom) as i64, 1);
                *acc = acc.add(&prod.mul(&c));
            }
            return;
        }
        let (m, am) = (a[idx].0, &a[idx].1);
        let mut c = 0usize;
        let mut p = prod;
        let mut fact: u128 = 1;
        loop {
            if r + c > l || deg + c * m > target {
                break;
            }
            go(idx + 1, a, l, target, r + c, deg + c * m, p.clone(), denom * fact, acc);
            c += 1;
            fact *= c as u128;
            p = p.mul(am);
        }
    }
    let mut acc = F::zero();
    go(0, a, l, target, 0, 0, F::one(), 1, &mut acc);
    acc
}

/// The closed formula for the order-`(μ+1)` obstruction: zero for
/// `ν < μ < 2ν`, `-(ν+1) a_ij t_ij^{-ν} a_jk` at `μ = 2ν` (with
/// `a = a^{(ν+1)}`), and for `μ ≥ 2ν+1`
/// `P + (ν-μ-1) a_ij^{(ν+1)} t_ij^{-(μ-ν)} a_jk^{(μ-ν+1)} - c a_ij^{(μ-ν+1)} t_ij^{-ν} a_jk^{(ν+1)}`
/// where `P` collects the products of coefficients of orders `ν+1..=μ-ν`.
/// Direct expansion gives `c = ν+1`; `second` lets callers evaluate other
/// values of `c`.
pub fn closed_form_obstruction_with<F: Field>(
    t: &TransitionSystem<F>,
    nu: usize,
    mu: usize,
    second: i64,
) -> Result<TwistedCochain<F>> {
    check_shape(t, nu, mu)?;
    let c = &t.complex;
    let mut vals = Vec::with_capacity(c.n_triangles());
    for &[i, j, k] in c.sorted_triangles() {
        let ij = c.edge_index(i, j).expect("edge");
        let jk = c.edge_index(j, k).expect("edge");
        let tij = t.t.weights()[ij].clone();
        let tp = |e: i64| tij.pow(e).expect("unit");
        let a = |e: usize, l: usize| t.coefficient(e, l);
        let v = if mu < 2 * nu {
            F::zero()
        } else if mu == 2 * nu {
            a(ij, nu + 1).mul(&tp(-(nu as i64))).mul(&a(jk, nu + 1)).scale(-(nu as i64 + 1))
        } else {
            let low: Vec<(usize, F)> = (nu + 1..=mu - nu).map(|m| (m, a(ij, m))).collect();
            let mut p = F::zero();
            for l in nu + 1..=mu - nu {
                let ajk = a(jk, l);
                if ajk.is_zero() {
                    continue;
                }
                let m = power_coefficient(l, mu + 1, &low);
                p = p.sub(&tp(1 - l as i64).mul(&ajk).mul(&m));
            }
            let first = a(ij, nu + 1).mul(&tp(-((mu - nu) as i64))).mul(&a(jk, mu - nu + 1)).scale(nu as i64 - mu as i64 - 1);
            let last = a(ij, mu - nu + 1).mul(&tp(-(nu as i64))).mul(&a(jk, nu + 1)).scale(-second);
            p.add(&first).add(&last)
        };
        vals.push(v);
    }
    Ok(TwistedCochain::new(2, vals))
}

pub fn closed_form_obstruction<F: Field>(t: &TransitionSystem<F>, nu: usize, mu: usize) -> Result<TwistedCochain<F>> {
    closed_form_obstruction_with(t, nu, mu, nu as i64 + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UedaType {
    Finite(usize),
    /// Linearizable through the stated order.
    InfiniteAtOrder(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct UedaClass<F: Field> {
    pub utype: UedaType,
    /// Coordinates of `[a^{(k+1)}]` in the `H¹(Σ_{-k})` basis; empty when
    /// the type is infinite.
    pub class_coords: Vec<F>,
    /// Representative `a^{(k+1)}` in the normalized coordinates.
    pub cocycle: Option<TwistedCochain<F>>,
    /// The system in coordinates linear through order `k`.
    pub normalized: TransitionSystem<F>,
    /// `y_i = g_i(z_i)` relating input and normalized coordinates.
    pub coordinate_changes: Vec<GermDiffeo<F>>,
}

/// Ueda type and class, by killing the order-`l` coefficients with
/// coordinate changes `y_i = z_i + h_i z_i^l` as long as they are
/// coboundaries. Orders beyond the validity of the triangle condition are
/// not examined.
pub fn compute_ueda<F: Field>(t: &TransitionSystem<F>) -> Result<UedaClass<F>> {
    let mu = validate(t)?.order_valid;
    let n = t.trunc();
    let nv = t.complex.n_vertices();
    let mut s = t.clone();
    let mut changes: Vec<GermDiffeo<F>> = vec![GermDiffeo::identity(n); nv];
    for l in 2..=mu {
        let a = s.coefficient_cochain(l);
        if a.is_zero() {
            continue;
        }
        let h = s.cohomology_of_power(-(l as i64 - 1))?;
        match h.solve_coboundary(&a)? {
            CoboundarySolution::Primitive(p) => {
                let g: Vec<GermDiffeo<F>> = p
                    .values
                    .iter()
                    .map(|hi| {
                        let mut c = PowerSeries::var(n);
                        c.set_coeff(l, hi.clone());
                        GermDiffeo::new(c).expect("tangent to identity")
                    })
                    .collect();
                s = s.change_coordinates(&g);
                debug_assert!(s.coefficient_cochain(l).is_zero());
                changes = changes.iter().zip(&g).map(|(c, gi)| c.compose(gi)).collect();
            }
            CoboundarySolution::Class(coords) => {
                return Ok(UedaClass {
                    utype: UedaType::Finite(l - 1),
                    class_coords: coords,
                    cocycle: Some(a),
                    normalized: s,
                    coordinate_changes: changes,
                });
            }
        }
    }
    Ok(UedaClass {
        utype: UedaType::InfiniteAtOrder(mu),
        class_coords: vec![],
        cocycle: None,
        normalized: s,
        coordinate_changes: changes,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Extension<F: Field> {
    Extended {
        system: TransitionSystem<F>,
        order: usize,
        /// Added to `a^{(order)}`.
        correction: TwistedCochain<F>,
    },
    Obstructed {
        order: usize,
        class_coords: Vec<F>,
        obstruction: ObstructionCocycle<F>,
    },
}

/// Make the triangle condition hold through `μ+1` by adjusting the
/// order-`(μ+1)` coefficients, or report the nonzero obstruction class in
/// `H²(Σ_{-μ})`.
pub fn extend_order<F: Field>(t: &TransitionSystem<F>) -> Result<Extension<F>> {
    let mu = validate(t)?.order_valid;
    if mu >= t.trunc() {
        return Err(Error::InsufficientOrder { needed: mu as i64 + 1, available: t.trunc() as i64 });
    }
    let h = t.cohomology_of_power(-(mu as i64))?;
    let d = t.defect_cochain(mu + 1);
    match h.solve_coboundary(&d)? {
        CoboundarySolution::Primitive(x) => {
            let corr = x.scale(&F::one().neg());
            Ok(Extension::Extended { system: t.add_to_coefficients(mu + 1, &corr), order: mu + 1, correction: corr })
        }
        CoboundarySolution::Class(_) => {
            let o = raw_obstruction(t, mu);
            Ok(Extension::Obstructed {
                order: mu + 1,
                class_coords: h.project(&o)?,
                obstruction: ObstructionCocycle { order: mu + 1, power: -(mu as i64), cochain: o },
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetroactiveStep<F: Field> {
    pub system: TransitionSystem<F>,
    /// Order now satisfied, `μ+1`.
    pub order: usize,
    /// Order of the modified coefficients, `μ-ν+1`.
    pub alpha_order: usize,
    pub alpha: TwistedCochain<F>,
    /// Obstruction class before the correction.
    pub class_before: Vec<F>,
    /// Pairing of `[a^{(ν+1)}]` against each `H¹(Σ_{-(μ-ν)})` basis class.
    pub pairing: Vec<Vec<F>>,
    pub correction: TwistedCochain<F>,
}

/// Kill a nonzero obstruction at order `μ+1 ≥ 2ν+2` by adding a cocycle `α`
/// to the order-`(μ-ν+1)` coefficients, chosen so that
/// `(ν-μ-1)[a∪α] - (ν+1)[α∪a] = -[O]`, then extend.
pub fn retroactive_correction<F: Field>(t: &TransitionSystem<F>, nu: usize) -> Result<RetroactiveStep<F>> {
    let mu = validate(t)?.order_valid;
    if mu < 2 * nu + 1 {
        return Err(Error::InvalidInput(format!("retroactive step needs μ ≥ 2ν+1, got μ={mu}, ν={nu}")));
    }
    let obs = triangle_obstruction(t, nu, mu)?;
    let hmu = t.cohomology_of_power(-(mu as i64))?;
    if hmu.dims()[2] == 0 {
        return Err(Error::InvalidInput(format!("H² of Σ_-{mu} vanishes; nothing to correct")));
    }
    let before = hmu.project(&obs.cochain)?;
    if before.iter().all(|x| x.is_zero()) {
        return Err(Error::InvalidInput("obstruction class already vanishes".into()));
    }
    let a = t.coefficient_cochain(nu + 1);
    let halpha = t.cohomology_of_power(-((mu - nu) as i64))?;
    let w_alpha = t.t.power(-((mu - nu) as i64));
    let w_a = t.t.power(-(nu as i64));
    let c = t.complex();
    let mut cols = Vec::new();
    for beta in &halpha.bases[1].reps {
        let x = cup_cochain(c, &a, beta, &w_alpha).scale(&F::from_i64(nu as i64 - mu as i64 - 1));
        let y = cup_cochain(c, beta, &a, &w_a).scale(&F::from_i64(-(nu as i64) - 1));
        cols.push(hmu.project(&x.add(&y))?);
    }
    let rows = before.len();
    let m = Matrix::from_columns(rows, &cols);
    let rhs: Vec<F> = before.iter().map(|x| x.neg()).collect();
    let coeffs = Rref::new(&m, true).solve(&rhs).map_err(|_| Error::Singular {
        order: mu + 1,
        detail: "cup pairing against the Ueda class cannot reach the obstruction".into(),
    })?;
    let mut alpha = TwistedCochain::zero(c, 1);
    for (x, beta) in coeffs.iter().zip(&halpha.bases[1].reps) {
        alpha = alpha.add(&beta.scale(x));
    }
    let s1 = t.add_to_coefficients(mu - nu + 1, &alpha);
    match extend_order(&s1)? {
        Extension::Extended { system, order, correction } if order == mu + 1 => Ok(RetroactiveStep {
            system,
            order,
            alpha_order: mu - nu + 1,
            alpha,
            class_before: before,
            pairing: cols,
            correction,
        }),
        _ => Err(Error::Singular { order: mu + 1, detail: "obstruction persists after the retroactive correction".into() }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Extend,
    Retroactive,
}

impl Action {
    pub fn as_str(&self) -> &'static str {
        match self {
            Action::Extend => "extend",
            Action::Retroactive => "retroactive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionRecord<F> {
    /// Order satisfied after the action.
    pub order: usize,
    pub action: Action,
    /// Obstruction class before the action (empty when `H²` vanishes).
    pub class_coords: Vec<F>,
    pub correction: TwistedCochain<F>,
    /// Retroactive steps: modified order and `α`.
    pub alpha: Option<(usize, TwistedCochain<F>)>,
    /// Retroactive steps: order through which the relations are unchanged.
    pub preserved_through: Option<usize>,
}

/// Why a construction stopped before the target order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionFailure<F> {
    pub order: usize,
    pub detail: String,
    /// Class of the obstruction in `H²(Σ_{-(order-1)})`.
    pub class_coords: Vec<F>,
    pub obstruction: Option<ObstructionCocycle<F>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Construction<F: Field> {
    /// Valid through the target order unless `failure` is set, in which case
    /// it is the system reached so far.
    pub system: TransitionSystem<F>,
    pub failure: Option<ConstructionFailure<F>>,
    pub nu: Option<usize>,
    pub seed_ueda: UedaClass<F>,
    pub log: Vec<ActionRecord<F>>,
    pub notes: Vec<String>,
}

fn relations_agree<F: Field>(a: &TransitionSystem<F>, b: &TransitionSystem<F>, through: usize) -> bool {
    (0..a.complex.n_edges()).all(|e| a.maps[e].series().agrees_through(b.maps[e].series(), through))
}

/// Drive a seed to a system satisfying the triangle condition through `n`.
/// An obstruction that cannot be removed ends the run with `failure` set.
pub fn construct_formal_foliation<F: Field>(
    seed: &TransitionSystem<F>,
    declared_nu: Option<usize>,
    n: usize,
) -> Result<Construction<F>> {
    let seed = seed.with_trunc(n);
    let ueda = compute_ueda(&seed)?;
    let mut notes = Vec::new();
    let nu = match (ueda.utype, declared_nu) {
        (UedaType::Finite(k), Some(d)) if k < d => {
            return Err(Error::InvalidInput(format!("computed Ueda type {k} is below the declared ν = {d}")));
        }
        (UedaType::Finite(k), Some(d)) if k > d => {
            notes.push(format!("declared ν = {d}, computed Ueda type {k}: the seed class at order {} is trivial", d + 1));
            Some(k)
        }
        (UedaType::Finite(k), _) => Some(k),
        (UedaType::InfiniteAtOrder(m), d) => {
            if let Some(d) = d {
                notes.push(format!("declared ν = {d}, seed linearizable through its valid order {m}"));
            }
            None
        }
    };
    let mut s = ueda.normalized.clone();
    let mut log = Vec::new();
    let mut failure = None;
    loop {
        let mu = validate(&s)?.order_valid;
        if mu >= n {
            break;
        }
        match extend_order(&s)? {
            Extension::Extended { system, order, correction } => {
                log.push(ActionRecord {
                    order,
                    action: Action::Extend,
                    class_coords: vec![],
                    correction,
                    alpha: None,
                    preserved_through: None,
                });
                s = system;
            }
            Extension::Obstructed { order, class_coords, obstruction } => {
                let fail = |detail: String| ConstructionFailure {
                    order,
                    detail,
                    class_coords: class_coords.clone(),
                    obstruction: Some(obstruction.clone()),
                };
                let Some(nu) = nu.filter(|&v| mu >= 2 * v + 1) else {
                    failure = Some(fail("nonzero obstruction class and no retroactive step applies".into()));
                    break;
                };
                let step = match retroactive_correction(&s, nu) {
                    Ok(step) => step,
                    Err(Error::Singular { detail, .. }) => {
                        failure = Some(fail(detail));
                        break;
                    }
                    Err(e) => return Err(e),
                };
                let keep = mu - nu;
                if !relations_agree(&s, &step.system, keep) {
                    failure = Some(fail("retroactive step altered low orders".into()));
                    break;
                }
                log.push(ActionRecord {
                    order: step.order,
                    action: Action::Retroactive,
                    class_coords: step.class_before.clone(),
                    correction: step.correction.clone(),
                    alpha: Some((step.alpha_order, step.alpha.clone())),
                    preserved_through: Some(keep),
                });
                s = step.system;
            }
        }
    }
    Ok(Construction { system: s, failure, nu, seed_ueda: ueda, log, notes })
}

/// Seed whose relations are `a_ij y_i^{ν+1}` for a 1-cocycle `a` of
/// `Σ_{-ν}`.
pub fn seed_from_cocycle<F: Field>(
    complex: &SurfaceComplex,
    t: &UnitaryLocalSystem<F>,
    nu: usize,
    a: &TwistedCochain<F>,
    n: usize,
) -> Result<TransitionSystem<F>> {
    if n < nu + 1 {
        return Err(Error::InsufficientOrder { needed: nu as i64 + 1, available: n as i64 });
    }
    let rel: Vec<PowerSeries<F>> = a.values.iter().map(|x| PowerSeries::monomial(x.clone(), nu + 1, n)).collect();
    TransitionSystem::from_relations(complex.clone(), t, &rel)
}

/// Torus, trivial linear parts, seed class the first `H¹` basis class.
pub fn torus_seed<F: Field>(nu: usize, n: usize) -> Result<TransitionSystem<F>> {
    let c = canonical_complex(1)?;
    let t = UnitaryLocalSystem::trivial(&c);
    let h = cohomology(&c, &t)?;
    seed_from_cocycle(&c, &t, nu, &spread(&h), n)
}

/// First `H¹` basis class plus the coboundary of `x_i = i`, so that the
/// representative is supported on every edge.
fn spread<F: Field>(h: &Cohomology<F>) -> TwistedCochain<F> {
    let c = h.complex();
    let x = TwistedCochain::new(0, (0..c.n_vertices()).map(|i| F::from_i64(i as i64)).collect());
    h.bases[1].reps[0].add(&crate::cech::coboundary(c, h.system(), &x))
}

/// Genus 2 with linear parts of order 3 and `ν = 2`, seed class the first
/// `H¹(Σ_{-2})` basis class.
pub fn genus_two_seed<F: Field>(n: usize) -> Result<TransitionSystem<F>> {
    let c = canonical_complex(2)?;
    let t = UnitaryLocalSystem::from_free_weights(&c, &[F::root_of_unity(3, 1), F::one(), F::one(), F::one()])?;
    let h = cohomology(&c, &t.power(-2))?;
    seed_from_cocycle(&c, &t, 2, &spread(&h), n)
}

fn small<F: Field, R: Rng>(rng: &mut R) -> F {
    F::from_i64(rng.random_range(-3..=3))
}

/// Random cocycle of `Σ`: a random coboundary plus a random combination of
/// the `H¹` basis, nonzero in cohomology when `nontrivial` and `H¹ ≠ 0`.
pub fn random_cocycle<F: Field, R: Rng>(h: &Cohomology<F>, nontrivial: bool, rng: &mut R) -> TwistedCochain<F> {
    let c = h.complex();
    let x = TwistedCochain::new(0, (0..c.n_vertices()).map(|_| small(rng)).collect());
    let mut z = crate::cech::coboundary(c, h.system(), &x);
    let reps = &h.bases[1].reps;
    loop {
        let coeffs: Vec<F> = reps.iter().map(|_| small(rng)).collect();
        if nontrivial && !reps.is_empty() && coeffs.iter().all(|x| x.is_zero()) {
            continue;
        }
        for (a, r) in coeffs.iter().zip(reps) {
            z = z.add(&r.scale(a));
        }
        return z;
    }
}

/// Extend (retroactively when needed) until valid through `order`.
fn reach<F: Field>(mut s: TransitionSystem<F>, nu: usize, order: usize) -> Result<TransitionSystem<F>> {
    while validate(&s)?.order_valid < order {
        s = match extend_order(&s)? {
            Extension::Extended { system, .. } => system,
            Extension::Obstructed { .. } => retroactive_correction(&s, nu)?.system,
        };
    }
    Ok(s)
}

/// Random system linear through `ν`, with a nontrivial class at order
/// `ν+1`, valid through exactly `μ` or more, built by extensions with random
/// cocycles added at every order and random data above `μ`.
pub fn random_foliated_system<F: Field, R: Rng>(
    complex: &SurfaceComplex,
    t: &UnitaryLocalSystem<F>,
    nu: usize,
    mu: usize,
    n: usize,
    rng: &mut R,
) -> Result<TransitionSystem<F>> {
    let h = cohomology(complex, &t.power(-(nu as i64)))?;
    let a = random_cocycle(&h, true, rng);
    let mut s = seed_from_cocycle(complex, t, nu, &a, n)?;
    for order in nu + 2..=mu {
        s = reach(s, nu, order)?;
        let hz = cohomology(complex, &t.power(-(order as i64 - 1)))?;
        s = s.add_to_coefficients(order, &random_cocycle(&hz, false, rng));
    }
    s = reach(s, nu, mu)?;
    for l in mu + 1..=n {
        let noise = TwistedCochain::new(1, (0..complex.n_edges()).map(|_| small(rng)).collect());
        s = s.add_to_coefficients(l, &noise);
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogAffineAction {
    /// The class was already zero.
    None,
    /// `λ` adjusted (order `ν`).
    Lambda,
    /// Change `z_i = y_i + s y_i^{n+1}`.
    Rescale,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogAffineStep<F> {
    pub order: usize,
    /// `[a^{(n)}] = κ [a]`.
    pub kappa: F,
    pub action: LogAffineAction,
    /// Primitive `h` with `δh = a^{(n)}` after the class was cleared.
    pub primitive: TwistedCochain<F>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogAffineSystem<F: Field> {
    pub nu: usize,
    pub lambda: F,
    /// `a_ij`, the constant terms.
    pub a: TwistedCochain<F>,
    pub system: TransitionSystem<F>,
    /// `1/y_i^ν - 1/y_j^ν + λ log(y_i/y_j)` per edge `i < j`, in `y_j`.
    pub relations: Vec<PowerSeries<F>>,
    /// The relations equal `a_ij` through this order.
    pub certified_order: usize,
    pub steps: Vec<LogAffineStep<F>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LogAffineOutcome<F: Field> {
    Success(LogAffineSystem<F>),
    NotProportional {
        order: usize,
        class_coords: Vec<F>,
        a_coords: Vec<F>,
        steps: Vec<LogAffineStep<F>>,
    },
}

fn log_relations<F: Field>(s: &TransitionSystem<F>, nu: usize, lambda: &F) -> Result<Vec<PowerSeries<F>>> {
    let mut out = Vec::new();
    for [i, j] in s.complex.edges().iter().copied() {
        let g = s.germ(i, j).expect("edge");
        let l = translation_cocycle(&g, nu, lambda)?;
        out.push(PowerSeries::from_coeffs(l.coeffs(), l.trunc().max(0) as usize));
    }
    Ok(out)
}

fn relation_cochain<F: Field>(rel: &[PowerSeries<F>], n: usize) -> TwistedCochain<F> {
    TwistedCochain::new(1, rel.iter().map(|r| if n <= r.trunc() { r.coeff(n).clone() } else { F::zero() }).collect())
}

/// `(1 + w)^{num/den}` for `w` without constant term.
fn unit_power<F: Field>(w: &PowerSeries<F>, num: i64, den: i64) -> PowerSeries<F> {
    let n = w.trunc();
    let r = F::from_ratio(num, den);
    let mut acc = PowerSeries::one(n);
    let mut term = PowerSeries::one(n);
    let mut binom = F::one();
    for m in 1..=n {
        term = term.mul(w);
        if term.is_zero() {
            break;
        }
        binom = binom.mul(&r.sub(&F::from_i64(m as i64 - 1))).div(&F::from_i64(m as i64)).expect("m > 0");
        acc = acc.add(&term.scale(&binom));
    }
    acc
}

/// New coordinates `z_i = k_i(y_i)`.
fn apply_forward<F: Field>(s: &TransitionSystem<F>, k: &[GermDiffeo<F>]) -> TransitionSystem<F> {
    let inv: Vec<GermDiffeo<F>> = k.iter().map(|g| g.inverse()).collect();
    s.change_coordinates(&inv)
}

fn proportional<F: Field>(p: &[F], q: &[F]) -> Option<F> {
    let r = q.iter().position(|x| !x.is_zero())?;
    let kappa = p[r].div(&q[r])?;
    p.iter().zip(q).all(|(x, y)| *x == kappa.mul(y)).then_some(kappa)
}

/// Normalize a seed with trivial linear parts and
/// `1/y_i^ν - 1/y_j^ν = a_ij + o(1)` so that
/// `1/y_i^ν - 1/y_j^ν + λ log(y_i/y_j) = a_ij` through the truncation. At
/// each order the class of the order-`n` coefficients must lie on the line
/// of `[a]`; otherwise the offending order and class are returned.
pub fn log_affine_construct<F: Field>(seed: &TransitionSystem<F>, nu: usize) -> Result<LogAffineOutcome<F>> {
    if !seed.t.is_trivial() {
        return Err(Error::InvalidInput("log-affine construction needs trivial linear parts".into()));
    }
    let n = seed.trunc();
    if n < nu + 2 {
        return Err(Error::InsufficientOrder { needed: nu as i64 + 2, available: n as i64 });
    }
    let c = seed.complex.clone();
    let h = cohomology(&c, &UnitaryLocalSystem::trivial(&c))?;
    let mut s = seed.clone();
    let mut lambda = F::zero();
    let mut rel = log_relations(&s, nu, &lambda)?;
    let a = relation_cochain(&rel, 0);
    let q = h.project(&a)?;
    if q.iter().all(|x| x.is_zero()) {
        return Err(Error::InvalidInput("the class of a_ij is trivial".into()));
    }
    let top = n - 1 - nu;
    let mut steps = Vec::new();
    for order in 1..=top {
        let cn = relation_cochain(&rel, order);
        let p = h.project(&cn)?;
        let Some(kappa) = proportional(&p, &q) else {
            return Ok(LogAffineOutcome::NotProportional { order, class_coords: p, a_coords: q, steps });
        };
        let mut action = LogAffineAction::None;
        if !kappa.is_zero() {
            if order == nu {
                let with_log = log_relations(&s, nu, &F::one().add(&lambda))?;
                let dl = relation_cochain(&with_log, order).sub(&cn);
                let pl = h.project(&dl)?;
                let kl = proportional(&pl, &q)
                    .filter(|x| !x.is_zero())
                    .ok_or(Error::Singular { order, detail: "log term does not move the class".into() })?;
                lambda = lambda.sub(&kappa.div(&kl).expect("nonzero"));
                action = LogAffineAction::Lambda;
            } else {
                let sc = kappa.neg().div(&F::from_i64(order as i64 - nu as i64)).expect("order ≠ ν");
                let k: Vec<GermDiffeo<F>> = (0..c.n_vertices())
                    .map(|_| {
                        let mut z = PowerSeries::var(n);
                        z.set_coeff(order + 1, sc.clone());
                        GermDiffeo::new(z).expect("tangent")
                    })
                    .collect();
                s = apply_forward(&s, &k);
                action = LogAffineAction::Rescale;
            }
            rel = log_relations(&s, nu, &lambda)?;
        }
        let cn = relation_cochain(&rel, order);
        let prim = match h.solve_coboundary(&cn)? {
            CoboundarySolution::Primitive(x) => x,
            CoboundarySolution::Class(k) => {
                return Err(Error::Singular { order, detail: format!("class {k:?} survives the proportional step") });
            }
        };
        if !cn.is_zero() {
            // 1/z_i^ν = 1/y_i^ν - A_i y_i^order with A = -h
            let k: Vec<GermDiffeo<F>> = prim
                .values
                .iter()
                .map(|hi| {
                    let w = PowerSeries::monomial(hi.clone(), order + nu, n);
                    let u = unit_power(&w, -1, nu as i64);
                    GermDiffeo::new(u.mul(&PowerSeries::var(n))).expect("tangent")
                })
                .collect();
            s = apply_forward(&s, &k);
            rel = log_relations(&s, nu, &lambda)?;
            if !relation_cochain(&rel, order).is_zero() {
                return Err(Error::Singular { order, detail: "coboundary step did not clear the coefficients".into() });
            }
        }
        steps.push(LogAffineStep { order, kappa, action, primitive: prim });
    }
    Ok(LogAffineOutcome::Success(LogAffineSystem {
        nu,
        lambda,
        a,
        system: s,
        relations: rel,
        certified_order: top,
        steps,
    }))
}

use folia_core::cech::{
    canonical_complex, coboundary, cohomology, cup_product, TwistedCochain, UnitaryLocalSystem,
};
use folia_core::classify::{normal_form_element, translation_cocycle};
use folia_core::forms::{
    gauge_transform, invariant_form_search, preserves_omega, BivariatePoly, InvariantForm, PolyForm, ProjectiveTriple,
};
use folia_core::germ::{commutator, exp_field, log_germ, make_v};
use folia_core::ueda::{closed_form_obstruction, random_foliated_system, triangle_obstruction};
use folia_core::{Cyclotomic, Field, GermDiffeo, PowerSeries, Tangency, VectorFieldGerm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Q = Cyclotomic;

const N: usize = 8;

fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

fn small() -> impl Strategy<Value = Q> {
    (-3i64..=3, 1i64..=3).prop_map(|(n, d)| q(n, d))
}

fn nonzero() -> impl Strategy<Value = Q> {
    (prop_oneof![-3i64..=-1, 1i64..=3], 1i64..=3).prop_map(|(n, d)| q(n, d))
}

fn germ_from(a: Q, tail: Vec<Q>, from: usize, n: usize) -> GermDiffeo<Q> {
    let mut s = PowerSeries::monomial(a, 1, n);
    for (j, c) in (from..=n).zip(tail) {
        s.set_coeff(j, c);
    }
    GermDiffeo::new(s).unwrap()
}

fn germ() -> impl Strategy<Value = GermDiffeo<Q>> {
    (nonzero(), prop::collection::vec(small(), N - 1)).prop_map(|(a, t)| germ_from(a, t, 2, N))
}

/// Tangent to the identity at order at least `p`.
fn tangent(p: usize, n: usize) -> impl Strategy<Value = GermDiffeo<Q>> {
    prop::collection::vec(small(), n - p).prop_map(move |t| germ_from(Q::one(), t, p + 1, n))
}

fn in_diff(f: &GermDiffeo<Q>, p: usize) -> bool {
    match f.tangency_order() {
        Tangency::Order(k) => k >= p,
        Tangency::IdentityToOrder(_) => true,
        Tangency::NotTangent => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn composition_is_associative(f in germ(), g in germ(), h in germ()) {
        prop_assert_eq!(f.compose(&g.compose(&h)), f.compose(&g).compose(&h));
    }

    #[test]
    fn inverse_is_two_sided(f in germ()) {
        let id = GermDiffeo::identity(N);
        prop_assert_eq!(f.compose(&f.inverse()), id.clone());
        prop_assert_eq!(f.inverse().compose(&f), id);
    }

    #[test]
    fn chain_rule(f in germ(), g in germ()) {
        let lhs = f.compose(&g).series().derivative();
        let rhs = f.series().derivative().compose(g.series()).unwrap().mul(&g.series().derivative());
        let d = lhs.trunc().min(rhs.trunc());
        prop_assert!(lhs.agrees_through(&rhs, d));
    }

    #[test]
    fn commutators_respect_the_filtration(
        (p, q, f, g) in (1usize..4, 1usize..4).prop_flat_map(|(p, q)| (Just(p), Just(q), tangent(p, 10), tangent(q, 10)))
    ) {
        prop_assert!(in_diff(&f, p) && in_diff(&g, q));
        prop_assert!(in_diff(&commutator(&f, &g), p + q));
    }

    #[test]
    fn log_inverts_exp(c in prop::collection::vec(small(), N - 1)) {
        let mut s = PowerSeries::zero(N);
        for (j, x) in (2..=N).zip(c) {
            s.set_coeff(j, x);
        }
        let v = VectorFieldGerm::new(s).unwrap();
        let f = exp_field(&v, &Q::one()).unwrap();
        prop_assert_eq!(log_germ(&f).unwrap(), v);
    }

    #[test]
    fn flows_are_additive(k in 1usize..=3, lambda in small(), s in small(), t in small()) {
        let v = make_v(k, &lambda, N);
        let lhs = exp_field(&v, &s).unwrap().compose(&exp_field(&v, &t).unwrap());
        prop_assert_eq!(lhs, exp_field(&v, &s.add(&t)).unwrap());
    }

    #[test]
    fn flows_preserve_their_form(k in 1usize..=3, lambda in small(), t in small()) {
        let f = exp_field(&make_v(k, &lambda, 12), &t).unwrap();
        prop_assert!(preserves_omega(&f, k, &lambda).unwrap());
    }

    #[test]
    fn translation_cocycle_law(
        lambda in small(),
        (nu, g, h) in (1usize..=2).prop_flat_map(|nu| (Just(nu), tangent(nu, 10), tangent(nu, 10)))
    ) {
        let series = |f: &GermDiffeo<Q>| PowerSeries::new(translation_cocycle(f, nu, &lambda).unwrap().coeffs().to_vec());
        let lhs = series(&g.compose(&h));
        let d = lhs.trunc();
        let rhs = series(&g).compose(&h.series().truncate(d)).unwrap().add(&series(&h));
        prop_assert!(lhs.agrees_through(&rhs, d));
    }

    #[test]
    fn normal_form_is_a_conjugacy_invariant(f in germ(), h in tangent(1, N)) {
        let a = normal_form_element(&f);
        let b = normal_form_element(&f.conjugate_by(&h));
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.kind, b.kind),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "one side failed: {:?} / {:?}", a.map(|x| x.kind), b.map(|x| x.kind)),
        }
    }

    #[test]
    fn invariant_form_search_is_equivariant(k in 1usize..=2, lambda in small(), t in nonzero(), h in tangent(1, 12)) {
        let n = 12;
        let e = exp_field(&make_v(k, &lambda, n), &t).unwrap();
        let rot = GermDiffeo::linear(Q::root_of_unity(k as u64, 1), n).unwrap().compose(&e);
        let key = |f: InvariantForm<Q>| match f {
            InvariantForm::Omega { k, lambda, .. } => Some((k, lambda)),
            _ => None,
        };
        let plain = key(invariant_form_search(&[e.clone(), rot.clone()]).unwrap());
        let moved = key(invariant_form_search(&[e.conjugate_by(&h), rot.conjugate_by(&h)]).unwrap());
        prop_assert!(plain.is_some());
        prop_assert_eq!(plain, moved);
    }
}

fn weights() -> impl Strategy<Value = (u32, u64, Vec<i64>)> {
    (1u32..=2, 1u64..=6).prop_flat_map(|(g, m)| (Just(g), Just(m), prop::collection::vec(0i64..m as i64, 2 * g as usize)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coboundary_squares_to_zero((genus, m, e) in weights(), x in prop::collection::vec(small(), 16)) {
        let c = canonical_complex(genus).unwrap();
        let w: Vec<Q> = e.iter().map(|&j| Q::root_of_unity(m, j)).collect();
        let l = UnitaryLocalSystem::from_free_weights(&c, &w).unwrap();
        let x0 = TwistedCochain::new(0, x.iter().cycle().take(c.n_vertices()).cloned().collect());
        prop_assert!(coboundary(&c, &l, &coboundary(&c, &l, &x0)).is_zero());
    }

    #[test]
    fn cup_product_is_antisymmetric((genus, m, e) in weights(), s in prop::collection::vec(small(), 8), y in prop::collection::vec(small(), 16)) {
        let c = canonical_complex(genus).unwrap();
        let w: Vec<Q> = e.iter().map(|&j| Q::root_of_unity(m, j)).collect();
        let l = UnitaryLocalSystem::from_free_weights(&c, &w).unwrap();
        let dual = l.power(-1);
        let cocycle = |sys: &UnitaryLocalSystem<Q>, off: usize| {
            let h = cohomology(&c, sys).unwrap();
            let mut z = coboundary(&c, sys, &TwistedCochain::new(0, y.iter().skip(off).cycle().take(c.n_vertices()).cloned().collect()));
            for (r, a) in h.bases[1].reps.iter().zip(s.iter().skip(off)) {
                z = z.add(&r.scale(a));
            }
            z
        };
        let u = cocycle(&l, 0);
        let v = cocycle(&dual, 3);
        let uv = cup_product(&c, &l, &u, &dual, &v).unwrap();
        let vu = cup_product(&c, &dual, &v, &l, &u).unwrap();
        prop_assert_eq!(uv, vu.neg());
    }

    #[test]
    fn gauge_actions_compose(seed in any::<u64>()) {
        type P = BivariatePoly<Q>;
        let d = 6;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut poly = |unit: bool| {
            let mut terms = Vec::new();
            for i in 0..=3usize {
                for j in 0..=3 - i {
                    let v = rand::Rng::random_range(&mut r, -2i64..=2);
                    let v = if unit && i + j == 0 { v.abs() + 1 } else { v };
                    terms.push((i, j, Q::from_i64(v)));
                }
            }
            P::from_terms(&terms, d)
        };
        let forms: Vec<PolyForm<Q>> = (0..3).map(|_| PolyForm::new(poly(false), poly(false))).collect();
        let t = ProjectiveTriple::new(forms[0].clone(), forms[1].clone(), forms[2].clone()).unwrap();
        let (f1, g1, f2, g2) = (poly(true), poly(false), poly(true), poly(false));
        let two = gauge_transform(&gauge_transform(&t, &f1, &g1).unwrap(), &f2, &g2).unwrap();
        let one = gauge_transform(&t, &f1.mul(&f2), &g2.add(&g1.mul(&f2.reciprocal().unwrap()))).unwrap();
        let p = two.prec().min(one.prec());
        prop_assert_eq!(two.truncate(p), one.truncate(p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn obstruction_matches_closed_form(nu in 1usize..=2, extra in 1usize..=3, seed in any::<u64>()) {
        let c = canonical_complex(1).unwrap();
        let t = UnitaryLocalSystem::<Q>::trivial(&c);
        let mu = nu + extra;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let s = random_foliated_system(&c, &t, nu, mu, mu + 1, &mut r).unwrap();
        let o = triangle_obstruction(&s, nu, mu).unwrap();
        prop_assert_eq!(o.cochain, closed_form_obstruction(&s, nu, mu).unwrap());
    }
}

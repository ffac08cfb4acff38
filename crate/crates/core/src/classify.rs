//! Normal forms of single germs and truncation-certified classification of
//! finitely generated groups of germs.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::forms::{preserves_line, preserves_omega};
use crate::germ::{commutator, exp_field, make_v, GermDiffeo, Tangency};
use crate::series::{LaurentSeries, PowerSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Formal conjugacy class of a single germ.
#[derive(Clone, Debug, PartialEq)]
pub enum NormalFormKind<F> {
    /// Conjugate to `a·z`.
    Linearizable { a: F },
    /// Conjugate to `a·exp(v_{k,λ})` with `a^k = 1`.
    Resonant { a: F, k: usize, lambda: F },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementNormalForm<F: Field> {
    pub kind: NormalFormKind<F>,
    /// `φ` with `φ⁻¹∘f∘φ = model` through the certified order.
    pub conjugator: GermDiffeo<F>,
    /// `a·z`, or `a·exp(T·v_{k,λT})` with `T = model_time`.
    pub model: GermDiffeo<F>,
    /// 1 unless the homothety normalizing the order-`k+1` coefficient is not
    /// available in the backend; then the model keeps time `T` and parameter
    /// `λT`, which is conjugate to `a·exp(v_{k,λ})` over `C`.
    pub model_time: F,
    /// `q` when `a` has order `q` and `f^q` is the identity through the order.
    pub finite_order: Option<u64>,
    pub certified_order: usize,
}

fn elementary<F: Field>(c: &F, j: usize, n: usize) -> GermDiffeo<F> {
    let mut s = PowerSeries::var(n);
    s.set_coeff(j, c.clone());
    GermDiffeo::new(s).expect("tangent germ")
}

/// Kill every coefficient `g_j` with `a^j ≠ a` by conjugations `z + c z^j`.
fn poincare_dulac<F: Field>(f: &GermDiffeo<F>) -> (GermDiffeo<F>, GermDiffeo<F>) {
    let n = f.trunc();
    let a = f.linear_part().clone();
    let mut conj = GermDiffeo::identity(n);
    let mut g = f.clone();
    for j in 2..=n {
        let gj = g.series().coeff(j).clone();
        if gj.is_zero() {
            continue;
        }
        let d = a.pow(j as i64).expect("power").sub(&a);
        if d.is_zero() {
            continue;
        }
        let h = elementary(&gj.div(&d).expect("nonzero"), j, n);
        g = g.conjugate_by(&h);
        conj = conj.compose(&h);
    }
    (conj, g)
}

/// For `g = a(z + t z^{k+1} + …)` with only resonant terms, kill every
/// coefficient except those of orders `k+1` and `2k+1`.
fn tangent_reduce<F: Field>(g: &GermDiffeo<F>, a: &F, k: usize, t: &F) -> (GermDiffeo<F>, GermDiffeo<F>) {
    let n = g.trunc();
    let mut conj = GermDiffeo::identity(n);
    let mut g = g.clone();
    let at = a.mul(t);
    for j in (k + 2)..=n {
        if j == 2 * k + 1 {
            continue;
        }
        let gj = g.series().coeff(j).clone();
        if gj.is_zero() {
            continue;
        }
        let m = j - k;
        let denom = at.scale(k as i64 + 1 - m as i64);
        let c = gj.div(&denom).expect("nonzero").neg();
        let h = elementary(&c, m, n);
        g = g.conjugate_by(&h);
        conj = conj.compose(&h);
    }
    (conj, g)
}

fn max_root_order(n: usize) -> u64 {
    (n as u64).max(2)
}

/// Normal form of a single germ with an explicit conjugator.
pub fn normal_form_element<F: Field>(f: &GermDiffeo<F>) -> Result<ElementNormalForm<F>> {
    normal_form(f, true)
}

/// As [`normal_form_element`]; with `rescale = false` the homothety step is
/// skipped and the model keeps the germ's own time `t` (its order-`k+1`
/// coefficient over `a`).
pub fn normal_form<F: Field>(f: &GermDiffeo<F>, rescale: bool) -> Result<ElementNormalForm<F>> {
    let n = f.trunc();
    let a = f.linear_part().clone();
    let (h_pd, g) = poincare_dulac(f);
    let Some(j0) = (2..=n).find(|&j| !g.series().coeff(j).is_zero()) else {
        let finite_order = a
            .root_of_unity_order(max_root_order(n))
            .filter(|&q| f.pow(q as i64).is_identity());
        return Ok(ElementNormalForm {
            kind: NormalFormKind::Linearizable { a: a.clone() },
            conjugator: h_pd,
            model: GermDiffeo::linear(a, n)?,
            model_time: F::one(),
            finite_order,
            certified_order: n,
        });
    };
    let k = j0 - 1;
    if 2 * k + 1 > n {
        return Err(Error::InsufficientOrder { needed: 2 * k as i64 + 1, available: n as i64 });
    }
    let a_inv = a.inv().ok_or(Error::ZeroLinearCoefficient)?;
    let t = g.series().coeff(k + 1).mul(&a_inv);
    let (h_t, g_red) = tangent_reduce(&g, &a, k, &t);
    let hf = h_pd.compose(&h_t);
    let c = g_red.series().coeff(2 * k + 1).mul(&a_inv);
    let t2_inv = t.mul(&t).inv().expect("nonzero");
    let lambda = F::from_ratio(k as i64 + 1, 2).sub(&c.mul(&t2_inv));

    let s = if rescale { t.inv().and_then(|ti| ti.kth_root(k as u32)) } else { None };
    let model_time = if s.is_some() { F::one() } else { t.clone() };
    let mu = lambda.mul(&model_time);
    let lin = GermDiffeo::linear(a.clone(), n)?;
    let model = lin.compose(&exp_field(&make_v(k, &mu, n), &model_time)?);
    let (hm, _) = tangent_reduce(&model, &a, k, &model_time);
    let conjugator = match &s {
        Some(s) => hf.compose(&GermDiffeo::linear(s.clone(), n)?).compose(&hm.inverse()),
        None => hf.compose(&hm.inverse()),
    };
    Ok(ElementNormalForm {
        kind: NormalFormKind::Resonant { a, k, lambda },
        conjugator,
        model,
        model_time,
        finite_order: None,
        certified_order: n,
    })
}

/// Whether `h` and `g` commute through the truncation order.
pub fn centralizer_check<F: Field>(h: &GermDiffeo<F>, g: &GermDiffeo<F>) -> bool {
    commutator(h, g).is_identity()
}

/// A word in the generators (letters `±(i+1)` for generator `i` and its
/// inverse) or a commutator of two such expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordExpr {
    Word(Vec<i32>),
    Commutator(Box<WordExpr>, Box<WordExpr>),
}

impl WordExpr {
    pub fn commutator(a: &WordExpr, b: &WordExpr) -> WordExpr {
        WordExpr::Commutator(Box::new(a.clone()), Box::new(b.clone()))
    }

    /// Evaluate with the letters read left to right as composition.
    pub fn eval<F: Field>(&self, gens: &[GermDiffeo<F>]) -> Result<GermDiffeo<F>> {
        let n = gens.iter().map(|g| g.trunc()).min().ok_or(Error::EmptyGenerators)?;
        match self {
            WordExpr::Word(letters) => {
                let mut acc = GermDiffeo::identity(n);
                for &l in letters {
                    let idx = l.unsigned_abs() as usize;
                    if l == 0 || idx > gens.len() {
                        return Err(Error::InvalidInput(format!("letter {l} out of range")));
                    }
                    let g = gens[idx - 1].truncate(n);
                    acc = acc.compose(&if l > 0 { g } else { g.inverse() });
                }
                Ok(acc)
            }
            WordExpr::Commutator(a, b) => Ok(commutator(&a.eval(gens)?, &b.eval(gens)?)),
        }
    }
}

impl fmt::Display for WordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordExpr::Word(w) if w.is_empty() => write!(f, "id"),
            WordExpr::Word(w) => {
                let parts: Vec<String> = w
                    .iter()
                    .map(|&l| if l > 0 { format!("g{l}") } else { format!("g{}^-1", -l) })
                    .collect();
                write!(f, "{}", parts.join(" "))
            }
            WordExpr::Commutator(a, b) => write!(f, "[{a}, {b}]"),
        }
    }
}

/// Sampling parameters for group analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalyzeConfig {
    pub seed: u64,
    /// All reduced words up to this length are enumerated.
    pub max_word_len: usize,
    pub random_words: usize,
    pub random_word_len: usize,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig { seed: 0, max_word_len: 4, random_words: 50, random_word_len: 8 }
    }
}

/// Target group of a conjugation.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupModel<F> {
    /// Linear maps `a·z`.
    Linear,
    /// Linear maps with root-of-unity coefficients.
    FiniteLinear,
    /// Symmetries of `ω_{k,λ} = dz/z^{k+1} + λ dz/z`.
    E { k: usize, lambda: F },
    /// Germs preserving the line `C·dz/z^{k+1}`.
    A { k: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConjugation<F: Field> {
    pub conjugator: GermDiffeo<F>,
    pub model: GroupModel<F>,
    /// `φ⁻¹∘g∘φ` for each generator.
    pub images: Vec<GermDiffeo<F>>,
    pub certified_order: usize,
}

/// One element of a commutator chain.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessStep<F: Field> {
    pub word: WordExpr,
    pub germ: GermDiffeo<F>,
    pub tangency: Tangency,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<F: Field> {
    /// Commuting generators with nontrivial tangent part.
    Abelian,
    /// No nontrivial element tangent to the identity was found; the group is
    /// simultaneously linearized (and in particular abelian).
    Linearizable,
    /// Every generator and sampled word has finite order.
    FiniteLinear { orders: Vec<u64> },
    SolvableModel(GroupModel<F>),
    /// `g_{i+1} = [f, g_i]` with strictly increasing tangency orders.
    NonsolvableWitness(Vec<WitnessStep<F>>),
    Undetermined { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evidence {
    pub sampled_words: usize,
    /// Nontrivial sampled elements tangent to the identity.
    pub tangent_samples: usize,
    /// Distinct tangency orders among them.
    pub tangency_orders: Vec<usize>,
    pub distinguished: Option<WordExpr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupVerdict<F: Field> {
    pub verdict: Verdict<F>,
    pub abelian: bool,
    pub conjugation: Option<ModelConjugation<F>>,
    pub evidence: Evidence,
    pub certified_order: usize,
}

struct Sample<F: Field> {
    word: WordExpr,
    germ: GermDiffeo<F>,
}

fn letter_germ<F: Field>(gens: &[GermDiffeo<F>], invs: &[GermDiffeo<F>], l: i32) -> GermDiffeo<F> {
    let i = l.unsigned_abs() as usize - 1;
    if l > 0 {
        gens[i].clone()
    } else {
        invs[i].clone()
    }
}

fn letters(r: usize) -> Vec<i32> {
    (1..=r as i32).flat_map(|i| [i, -i]).collect()
}

/// All reduced words of length `1..=max_len`, by increasing length.
fn enumerate_words<F: Field>(gens: &[GermDiffeo<F>], invs: &[GermDiffeo<F>], max_len: usize) -> Vec<Sample<F>> {
    let alphabet = letters(gens.len());
    let n = gens[0].trunc();
    let mut out = Vec::new();
    let mut level: Vec<(Vec<i32>, GermDiffeo<F>)> = vec![(Vec::new(), GermDiffeo::identity(n))];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (w, g) in &level {
            for &l in &alphabet {
                if w.last() == Some(&-l) {
                    continue;
                }
                let mut w2 = w.clone();
                w2.push(l);
                next.push((w2, g.compose(&letter_germ(gens, invs, l))));
            }
        }
        out.extend(next.iter().map(|(w, g)| Sample { word: WordExpr::Word(w.clone()), germ: g.clone() }));
        level = next;
    }
    out
}

fn random_words<F: Field>(gens: &[GermDiffeo<F>], invs: &[GermDiffeo<F>], cfg: &AnalyzeConfig) -> Vec<Sample<F>> {
    let alphabet = letters(gens.len());
    let n = gens[0].trunc();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.random_words)
        .map(|_| {
            let len = rng.random_range(1..=cfg.random_word_len.max(1));
            let mut w: Vec<i32> = Vec::with_capacity(len);
            while w.len() < len {
                let l = alphabet[rng.random_range(0..alphabet.len())];
                if w.last() != Some(&-l) {
                    w.push(l);
                }
            }
            let mut g = GermDiffeo::identity(n);
            for &l in &w {
                g = g.compose(&letter_germ(gens, invs, l));
            }
            Sample { word: WordExpr::Word(w), germ: g }
        })
        .collect()
}

fn finite_order<F: Field>(g: &GermDiffeo<F>) -> Option<u64> {
    let q = g.linear_part().root_of_unity_order(max_root_order(g.trunc()))?;
    g.pow(q as i64).is_identity().then_some(q)
}

/// Conjugate commuting germs to their linear parts at once, order by order.
pub fn simultaneous_linearize<F: Field>(gens: &[GermDiffeo<F>]) -> Result<ModelConjugation<F>> {
    let n = gens.iter().map(|g| g.trunc()).min().ok_or(Error::EmptyGenerators)?;
    let mut images: Vec<GermDiffeo<F>> = gens.iter().map(|g| g.truncate(n)).collect();
    let mut conj = GermDiffeo::identity(n);
    for j in 2..=n {
        if images.iter().all(|g| g.series().coeff(j).is_zero()) {
            continue;
        }
        let pick = images.iter().find_map(|g| {
            let a = g.linear_part();
            let d = a.pow(j as i64).expect("power").sub(a);
            (!d.is_zero()).then(|| g.series().coeff(j).div(&d).expect("nonzero"))
        });
        let Some(c) = pick else {
            return Err(Error::Singular { order: j, detail: "resonant coefficient in every generator".into() });
        };
        let h = elementary(&c, j, n);
        images = images.iter().map(|g| g.conjugate_by(&h)).collect();
        conj = conj.compose(&h);
        if images.iter().any(|g| !g.series().coeff(j).is_zero()) {
            return Err(Error::Singular { order: j, detail: "generators do not linearize simultaneously".into() });
        }
    }
    let all_finite = images.iter().all(|g| g.linear_part().root_of_unity_order(max_root_order(n)).is_some());
    Ok(ModelConjugation {
        conjugator: conj,
        model: if all_finite { GroupModel::FiniteLinear } else { GroupModel::Linear },
        images,
        certified_order: n,
    })
}

/// Conjugate by the normal-form conjugator of `dist` (without rescaling) and
/// test membership of every generator in `E_{k,λ}`, then `A_k`.
fn model_from_distinguished<F: Field>(
    gens: &[GermDiffeo<F>],
    dist: &GermDiffeo<F>,
    allow_a: bool,
) -> Result<Option<ModelConjugation<F>>> {
    let nf = normal_form(dist, false)?;
    let NormalFormKind::Resonant { k, lambda, .. } = &nf.kind else {
        return Ok(None);
    };
    let mu = lambda.mul(&nf.model_time);
    let n = dist.trunc();
    let images: Vec<GermDiffeo<F>> = gens.iter().map(|g| g.conjugate_by(&nf.conjugator)).collect();
    let mut in_e = true;
    for g in &images {
        if !preserves_omega(g, *k, &mu)? {
            in_e = false;
            break;
        }
    }
    let model = if in_e {
        GroupModel::E { k: *k, lambda: mu }
    } else {
        if !allow_a {
            return Ok(None);
        }
        for g in &images {
            if !preserves_line(g, *k)? {
                return Ok(None);
            }
        }
        GroupModel::A { k: *k }
    };
    Ok(Some(ModelConjugation { conjugator: nf.conjugator, model, images, certified_order: n }))
}

fn tangency_value(t: Tangency) -> Option<usize> {
    match t {
        Tangency::Order(k) => Some(k),
        _ => None,
    }
}

/// Commutator chain `g_{i+1} = [f, g_i]` started from elements of distinct
/// tangency orders; accepted when it runs until the next step necessarily
/// leaves the truncation window.
fn commutator_chain<F: Field>(
    f: &(WordExpr, GermDiffeo<F>, usize),
    g: &(WordExpr, GermDiffeo<F>, usize),
    n: usize,
) -> Option<Vec<WitnessStep<F>>> {
    let p = f.2;
    let mut steps = vec![WitnessStep { word: g.0.clone(), germ: g.1.clone(), tangency: Tangency::Order(g.2) }];
    let mut cur_order = g.2;
    while cur_order + p <= n - 1 {
        let last = steps.last().expect("nonempty");
        let germ = commutator(&f.1, &last.germ);
        let tangency = germ.tangency_order();
        let word = WordExpr::commutator(&f.0, &last.word);
        let order = tangency_value(tangency)?;
        if order < cur_order + p {
            return None;
        }
        cur_order = order;
        steps.push(WitnessStep { word, germ, tangency });
    }
    Some(steps)
}

/// Re-evaluate every witness word and compare with the stored series and
/// tangency orders.
pub fn verify_witness<F: Field>(gens: &[GermDiffeo<F>], steps: &[WitnessStep<F>]) -> Result<bool> {
    for s in steps {
        let g = s.word.eval(gens)?;
        if g != s.germ || g.tangency_order() != s.tangency {
            return Ok(false);
        }
    }
    Ok(steps.windows(2).all(|w| match (w[0].tangency, w[1].tangency) {
        (Tangency::Order(a), Tangency::Order(b)) => b > a,
        _ => false,
    }))
}

/// Truncation-certified analysis of the group generated by `gens`.
pub fn group_analyze<F: Field>(gens: &[GermDiffeo<F>], cfg: &AnalyzeConfig) -> Result<GroupVerdict<F>> {
    if gens.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    let n = gens.iter().map(|g| g.trunc()).min().expect("nonempty");
    let gens: Vec<GermDiffeo<F>> = gens.iter().map(|g| g.truncate(n)).collect();
    let invs: Vec<GermDiffeo<F>> = gens.iter().map(|g| g.inverse()).collect();
    let words = enumerate_words(&gens, &invs, cfg.max_word_len);
    let randoms = random_words(&gens, &invs, cfg);

    let mut tangent: Vec<(WordExpr, GermDiffeo<F>, usize)> = Vec::new();
    let push_tangent = |w: &WordExpr, g: &GermDiffeo<F>, acc: &mut Vec<(WordExpr, GermDiffeo<F>, usize)>| {
        if let Tangency::Order(k) = g.tangency_order() {
            acc.push((w.clone(), g.clone(), k));
        }
    };
    for s in words.iter().chain(&randoms) {
        push_tangent(&s.word, &s.germ, &mut tangent);
    }
    let r = gens.len();
    let gen_words: Vec<WordExpr> = (1..=r as i32).map(|i| WordExpr::Word(vec![i])).collect();
    let mut abelian = true;
    for i in 0..r {
        for j in (i + 1)..r {
            let c = commutator(&gens[i], &gens[j]);
            if !c.is_identity() {
                abelian = false;
            }
            push_tangent(&WordExpr::commutator(&gen_words[i], &gen_words[j]), &c, &mut tangent);
        }
    }
    let len2 = 2 * r + 2 * r * (2 * r - 1);
    for (i, gw) in gen_words.iter().enumerate() {
        for s in words.iter().take(len2).skip(2 * r) {
            let c = commutator(&gens[i], &s.germ);
            push_tangent(&WordExpr::commutator(gw, &s.word), &c, &mut tangent);
        }
    }
    let mut orders: Vec<usize> = tangent.iter().map(|t| t.2).collect();
    orders.sort_unstable();
    orders.dedup();
    let mut evidence = Evidence {
        sampled_words: words.len() + randoms.len(),
        tangent_samples: tangent.len(),
        tangency_orders: orders.clone(),
        distinguished: None,
    };
    let done = |verdict, conjugation, evidence| GroupVerdict { verdict, abelian, conjugation, evidence, certified_order: n };

    let finite: Option<Vec<u64>> = gens.iter().chain(randoms.iter().map(|s| &s.germ)).map(finite_order).collect();
    if let Some(all) = finite {
        let orders = all[..r].to_vec();
        let conj = simultaneous_linearize(&gens)?;
        return Ok(done(Verdict::FiniteLinear { orders }, Some(conj), evidence));
    }

    if tangent.is_empty() {
        if !abelian {
            let reason = "noncommuting generators without tangent samples".to_string();
            return Ok(done(Verdict::Undetermined { reason }, None, evidence));
        }
        let conj = simultaneous_linearize(&gens)?;
        return Ok(done(Verdict::Linearizable, Some(conj), evidence));
    }

    let min_order = orders[0];
    let dist = tangent.iter().find(|t| t.2 == min_order).expect("present").clone();
    evidence.distinguished = Some(dist.0.clone());

    if abelian {
        return Ok(match model_from_distinguished(&gens, &dist.1, false)? {
            Some(conj) => done(Verdict::Abelian, Some(conj), evidence),
            None => {
                let reason = format!("generators do not preserve the form of {}", dist.0);
                done(Verdict::Undetermined { reason }, None, evidence)
            }
        });
    }

    if orders.len() >= 2 {
        let other = tangent.iter().find(|t| t.2 != min_order).expect("present").clone();
        return Ok(match commutator_chain(&dist, &other, n) {
            Some(chain) => done(Verdict::NonsolvableWitness(chain), None, evidence),
            None => {
                let reason = "commutator chain degenerated before the truncation order".to_string();
                done(Verdict::Undetermined { reason }, None, evidence)
            }
        });
    }

    Ok(match model_from_distinguished(&gens, &dist.1, true)? {
        Some(conj) => done(Verdict::SolvableModel(conj.model.clone()), Some(conj), evidence),
        None => {
            let reason = format!("no model found from the normal form of {}", dist.0);
            done(Verdict::Undetermined { reason }, None, evidence)
        }
    })
}

/// Explicit conjugation of the group into its model.
pub fn conjugate_into_model<F: Field>(gens: &[GermDiffeo<F>], cfg: &AnalyzeConfig) -> Result<ModelConjugation<F>> {
    let v = group_analyze(gens, cfg)?;
    match (v.verdict, v.conjugation) {
        (_, Some(c)) => Ok(c),
        (Verdict::NonsolvableWitness(_), None) => Err(Error::Unsupported("group is not solvable".into())),
        (Verdict::Undetermined { reason }, None) => Err(Error::Unsupported(format!("undetermined: {reason}"))),
        _ => Err(Error::Unsupported("no model".into())),
    }
}

/// `F(g) = 1/g^ν - 1/z^ν + λ log(g/z)` for `g` tangent to the identity at
/// order at least `ν`. The result is a power series known through `N - 1 - ν`.
pub fn translation_cocycle<F: Field>(g: &GermDiffeo<F>, nu: usize, lambda: &F) -> Result<LaurentSeries<F>> {
    if nu == 0 {
        return Err(Error::InvalidInput("ν must be positive".into()));
    }
    match g.tangency_order() {
        Tangency::Order(k) if k >= nu => {}
        Tangency::IdentityToOrder(_) => {}
        _ => return Err(Error::NotTangent(nu)),
    }
    let n = g.trunc();
    if n < nu + 1 {
        return Err(Error::InsufficientOrder { needed: nu as i64 + 1, available: n as i64 });
    }
    let u = g.series().shift_down(1)?;
    let mut p = u.reciprocal()?.pow(nu as u32);
    p.set_coeff(0, p.coeff(0).sub(&F::one()));
    let p = p.shift_down(nu)?;
    let log = u.log_unit()?.truncate(p.trunc());
    let total = p.add(&log.scale(lambda));
    Ok(LaurentSeries::from_power_series(&total, 0))
}

/// Per-generator functionals read from the translation cocycle:
/// `a = -F_0`, `b = F_1`, `c = F_2`, `a_k = F_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationCocycleClasses<F> {
    pub a: Vec<F>,
    pub b: Vec<F>,
    pub c: Vec<F>,
    pub k: usize,
    pub a_k: Vec<F>,
}

pub fn translation_classes<F: Field>(
    gens: &[GermDiffeo<F>],
    nu: usize,
    lambda: &F,
    k: usize,
) -> Result<TranslationCocycleClasses<F>> {
    let mut out = TranslationCocycleClasses { a: vec![], b: vec![], c: vec![], k, a_k: vec![] };
    for g in gens {
        let f = translation_cocycle(g, nu, lambda)?;
        let need = 2.max(k) as i64;
        let get = |e: i64| f.coeff(e).ok_or(Error::InsufficientOrder { needed: need, available: f.trunc() });
        out.a.push(get(0)?.neg());
        out.b.push(get(1)?);
        out.c.push(get(2)?);
        out.a_k.push(get(k as i64)?);
    }
    Ok(out)
}

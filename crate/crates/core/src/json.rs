//! `folia/1` JSON encodings of coefficients, series, germs, complexes, local
//! systems, transition systems, 1-forms and projective triples.
//!
//! Field elements of the cyclotomic backend are written as JSON integers
//! when integral, as `"p/q"` strings when rational, and otherwise as
//! `{"n": n, "c": [...]}` with power-basis coefficients in `ζ_n`. Bigfloat
//! elements are `[re, im]` decimal strings. Decoders also accept a bare
//! array of power-basis coefficients when the document's `"field"` names a
//! cyclotomic conductor.

use crate::cech::{canonical_complex, SurfaceComplex, TwistedCochain, UnitaryLocalSystem};
use crate::field::{BigComplex, Cyclotomic, Field, DEFAULT_EPS, DEFAULT_PREC};
use crate::forms::{BivariatePoly, FormalOneForm, PolyForm, ProjectiveTriple};
use crate::germ::GermDiffeo;
use crate::series::{LaurentSeries, PowerSeries};
use crate::ueda::{genus_two_seed, random_foliated_system, torus_seed, TransitionSystem};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::fmt;
use std::str::FromStr;

pub const SCHEMA: &str = "folia/1";

/// Input that does not match the schema; `field` is a JSON path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for SchemaError {}

pub type Decoded<T> = std::result::Result<T, SchemaError>;

pub fn schema_error(field: &str, message: impl Into<String>) -> SchemaError {
    SchemaError { field: field.to_string(), message: message.into() }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn index(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

/// Coefficient backend named by `"field"` or `--backend`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldSpec {
    /// Cyclotomic, with an optional conductor for array-coded elements.
    Cyclotomic(Option<u64>),
    /// Bigfloat with the given precision in bits.
    Bigfloat(usize),
}

impl FromStr for FieldSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let num = |a: &str| a.parse::<u64>().map_err(|_| format!("bad parameter {a:?} in {s:?}"));
        match (name, arg) {
            ("cyclotomic", None) => Ok(FieldSpec::Cyclotomic(None)),
            ("cyclotomic", Some(a)) => {
                let n = num(a)?;
                if n == 0 {
                    return Err("conductor must be positive".into());
                }
                Ok(FieldSpec::Cyclotomic(Some(n)))
            }
            ("bigfloat", None) => Ok(FieldSpec::Bigfloat(DEFAULT_PREC)),
            ("bigfloat", Some(a)) => {
                let p = num(a)? as usize;
                if p < 16 {
                    return Err("precision must be at least 16 bits".into());
                }
                Ok(FieldSpec::Bigfloat(p))
            }
            _ => Err(format!("unknown backend {s:?}; expected cyclotomic[:n] or bigfloat[:p]")),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Cyclotomic(None) => write!(f, "cyclotomic"),
            FieldSpec::Cyclotomic(Some(n)) => write!(f, "cyclotomic:{n}"),
            FieldSpec::Bigfloat(p) => write!(f, "bigfloat:{p}"),
        }
    }
}

/// Decoding context.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ctx {
    pub modulus: Option<u64>,
    pub prec: usize,
    pub eps: f64,
}

impl Default for Ctx {
    fn default() -> Self {
        Ctx { modulus: None, prec: DEFAULT_PREC, eps: DEFAULT_EPS }
    }
}

impl Ctx {
    /// Context from a document's `"field"` key, overridden by `backend`.
    pub fn from_document(doc: &Value, backend: Option<FieldSpec>) -> Decoded<(Ctx, FieldSpec)> {
        let declared = match doc.get("field") {
            None => None,
            Some(Value::String(s)) => Some(s.parse::<FieldSpec>().map_err(|e| schema_error("field", e))?),
            Some(_) => return Err(schema_error("field", "expected a string such as \"cyclotomic:12\"")),
        };
        let spec = match (backend, declared) {
            (Some(FieldSpec::Cyclotomic(None)), Some(FieldSpec::Cyclotomic(n))) => FieldSpec::Cyclotomic(n),
            (Some(b), _) => b,
            (None, Some(d)) => d,
            (None, None) => FieldSpec::Cyclotomic(None),
        };
        let mut ctx = Ctx::default();
        match spec {
            FieldSpec::Cyclotomic(n) => {
                ctx.modulus = n.or(match declared {
                    Some(FieldSpec::Cyclotomic(m)) => m,
                    _ => None,
                })
            }
            FieldSpec::Bigfloat(p) => ctx.prec = p,
        }
        Ok((ctx, spec))
    }
}

/// Field elements with a JSON representation.
pub trait JsonField: Field {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, ctx: &Ctx, path: &str) -> Decoded<Self>;
}

fn rational_json(q: &BigRational) -> Value {
    if q.is_integer() {
        if let Some(i) = q.numer().to_i64() {
            return Value::from(i);
        }
    }
    Value::String(q.to_string())
}

fn rational_from(v: &Value, path: &str) -> Decoded<BigRational> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(BigInt::from(i)))
            } else {
                Err(schema_error(path, "non-integer numbers must be given as \"p/q\" strings"))
            }
        }
        Value::String(s) => {
            let t = s.trim();
            let q = if let Some((a, b)) = t.split_once('/') {
                let a = BigInt::from_str(a.trim()).map_err(|_| schema_error(path, format!("bad rational {s:?}")))?;
                let b = BigInt::from_str(b.trim()).map_err(|_| schema_error(path, format!("bad rational {s:?}")))?;
                if b.is_zero() {
                    return Err(schema_error(path, "zero denominator"));
                }
                BigRational::new(a, b)
            } else {
                BigRational::from_integer(
                    BigInt::from_str(t).map_err(|_| schema_error(path, format!("bad rational {s:?}")))?,
                )
            };
            Ok(q)
        }
        _ => Err(schema_error(path, "expected an integer or a \"p/q\" string")),
    }
}

fn power_basis_from(v: &Value, path: &str) -> Decoded<(u64, Vec<BigRational>)> {
    let n = v
        .get("n")
        .and_then(Value::as_u64)
        .filter(|&n| n > 0)
        .ok_or_else(|| schema_error(&join(path, "n"), "expected a positive integer conductor"))?;
    let c = v.get("c").and_then(Value::as_array).ok_or_else(|| schema_error(&join(path, "c"), "expected an array"))?;
    let cs = c
        .iter()
        .enumerate()
        .map(|(j, x)| rational_from(x, &index(&join(path, "c"), j)))
        .collect::<Decoded<Vec<_>>>()?;
    Ok((n, cs))
}

impl JsonField for Cyclotomic {
    fn to_json(&self) -> Value {
        match self.as_rational() {
            Some(q) => rational_json(q),
            None => json!({
                "n": self.modulus(),
                "c": self.coefficients().iter().map(rational_json).collect::<Vec<_>>(),
            }),
        }
    }

    fn from_json(v: &Value, ctx: &Ctx, path: &str) -> Decoded<Self> {
        match v {
            Value::Object(_) => {
                let (n, c) = power_basis_from(v, path)?;
                Ok(Cyclotomic::from_power_basis(n, c))
            }
            Value::Array(a) => {
                let n = ctx.modulus.ok_or_else(|| {
                    schema_error(path, "array-coded element needs \"field\": \"cyclotomic:n\" or {\"n\", \"c\"}")
                })?;
                let c = a.iter().enumerate().map(|(j, x)| rational_from(x, &index(path, j))).collect::<Decoded<_>>()?;
                Ok(Cyclotomic::from_power_basis(n, c))
            }
            _ => Ok(Cyclotomic::rational(rational_from(v, path)?)),
        }
    }
}

fn real_part(v: &Value, ctx: &Ctx, path: &str) -> Decoded<BigComplex> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigComplex::from_rational_prec(&BigRational::from_integer(BigInt::from(i)), ctx.prec, ctx.eps))
            } else {
                let s = n.to_string();
                BigComplex::parse(&s, "0", ctx.prec, ctx.eps).ok_or_else(|| schema_error(path, "bad number"))
            }
        }
        Value::String(s) if s.contains('/') => Ok(BigComplex::from_rational_prec(&rational_from(v, path)?, ctx.prec, ctx.eps)),
        Value::String(s) => {
            BigComplex::parse(s, "0", ctx.prec, ctx.eps).ok_or_else(|| schema_error(path, format!("bad decimal {s:?}")))
        }
        _ => Err(schema_error(path, "expected a number or a decimal string")),
    }
}

impl JsonField for BigComplex {
    fn to_json(&self) -> Value {
        let (re, im) = self.to_decimal_strings();
        json!([re, im])
    }

    fn from_json(v: &Value, ctx: &Ctx, path: &str) -> Decoded<Self> {
        match v {
            Value::Array(a) if a.len() == 2 && v.get("n").is_none() => {
                let re = real_part(&a[0], ctx, &index(path, 0))?;
                let im = real_part(&a[1], ctx, &index(path, 1))?;
                let i = BigComplex::root_of_unity(4, 1).with_precision(ctx.prec, ctx.eps);
                Ok(re.add(&im.mul(&i)))
            }
            Value::Object(_) => {
                let (n, c) = power_basis_from(v, path)?;
                let mut acc = BigComplex::zero().with_precision(ctx.prec, ctx.eps);
                for (j, q) in c.iter().enumerate() {
                    let z = BigComplex::root_of_unity(n, j as i64).with_precision(ctx.prec, ctx.eps);
                    acc = acc.add(&z.mul(&BigComplex::from_rational_prec(q, ctx.prec, ctx.eps)));
                }
                Ok(acc)
            }
            Value::Array(_) => Err(schema_error(path, "expected [re, im]")),
            _ => real_part(v, ctx, path),
        }
    }
}

/// `"cyclotomic:n"` with `n` the lcm of the conductors, or the bigfloat tag.
pub fn field_label<'a, F: Field + 'a>(xs: impl IntoIterator<Item = &'a F>) -> String {
    if F::is_exact() {
        let n = xs.into_iter().fold(1u64, |acc, x| acc.lcm(&x.conductor()));
        format!("cyclotomic:{n}")
    } else {
        xs.into_iter().next().map(|x| x.backend_tag()).unwrap_or_else(|| format!("bigfloat:{DEFAULT_PREC}"))
    }
}

pub fn encode_values<F: JsonField>(xs: &[F]) -> Value {
    Value::Array(xs.iter().map(|x| x.to_json()).collect())
}

// ---- access helpers

pub fn get<'a>(v: &'a Value, key: &str, path: &str) -> Decoded<&'a Value> {
    v.get(key).ok_or_else(|| schema_error(&join(path, key), "missing"))
}

pub fn get_usize(v: &Value, key: &str, path: &str) -> Decoded<usize> {
    get(v, key, path)?.as_u64().map(|x| x as usize).ok_or_else(|| schema_error(&join(path, key), "expected a non-negative integer"))
}

pub fn opt_usize(v: &Value, key: &str, path: &str) -> Decoded<Option<usize>> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(x) => {
            x.as_u64().map(|x| Some(x as usize)).ok_or_else(|| schema_error(&join(path, key), "expected a non-negative integer"))
        }
    }
}

pub fn get_array<'a>(v: &'a Value, key: &str, path: &str) -> Decoded<&'a Vec<Value>> {
    get(v, key, path)?.as_array().ok_or_else(|| schema_error(&join(path, key), "expected an array"))
}

pub fn get_str<'a>(v: &'a Value, key: &str, path: &str) -> Decoded<&'a str> {
    get(v, key, path)?.as_str().ok_or_else(|| schema_error(&join(path, key), "expected a string"))
}

/// Checks `"schema"` and, when given, `"kind"`.
pub fn check_header(doc: &Value, kinds: &[&str]) -> Decoded<String> {
    if !doc.is_object() {
        return Err(schema_error("$", "expected a JSON object"));
    }
    match doc.get("schema") {
        Some(Value::String(s)) if s == SCHEMA => {}
        Some(_) => return Err(schema_error("schema", format!("expected \"{SCHEMA}\""))),
        None => return Err(schema_error("schema", format!("missing; expected \"{SCHEMA}\""))),
    }
    let kind = get_str(doc, "kind", "")?;
    if !kinds.is_empty() && !kinds.contains(&kind) {
        return Err(schema_error("kind", format!("expected one of {kinds:?}, got {kind:?}")));
    }
    Ok(kind.to_string())
}

pub fn header(kind: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), SCHEMA.into());
    m.insert("kind".into(), kind.into());
    m
}

pub fn decode_values<F: JsonField>(v: &Value, ctx: &Ctx, path: &str) -> Decoded<Vec<F>> {
    let a = v.as_array().ok_or_else(|| schema_error(path, "expected an array"))?;
    a.iter().enumerate().map(|(j, x)| F::from_json(x, ctx, &index(path, j))).collect()
}

// ---- series and germs

pub fn encode_series<F: JsonField>(s: &PowerSeries<F>) -> Value {
    json!({ "trunc": s.trunc(), "coeffs": encode_values(s.coeffs()) })
}

/// `{"coeffs": [...], "trunc": N}` or a bare coefficient array. Missing
/// trailing coefficients are zero; without `"trunc"` the series is taken at
/// order `default_n`. Known orders are capped at `cap`.
pub fn decode_series<F: JsonField>(
    v: &Value,
    ctx: &Ctx,
    default_n: usize,
    cap: Option<usize>,
    path: &str,
) -> Decoded<PowerSeries<F>> {
    let (coeffs_v, trunc, cpath) = match v {
        Value::Array(_) => (v, None, path.to_string()),
        Value::Object(_) => (get(v, "coeffs", path)?, opt_usize(v, "trunc", path)?, join(path, "coeffs")),
        _ => return Err(schema_error(path, "expected a coefficient array or {\"coeffs\", \"trunc\"}")),
    };
    let c: Vec<F> = decode_values(coeffs_v, ctx, &cpath)?;
    let n = trunc.unwrap_or(default_n);
    if c.len() > n + 1 && c[n + 1..].iter().any(|x| !x.is_zero()) {
        return Err(schema_error(&cpath, format!("{} coefficients exceed truncation order {n}", c.len())));
    }
    let n = cap.map_or(n, |m| n.min(m));
    if n == 0 {
        return Err(schema_error(path, "truncation order must be positive"));
    }
    Ok(PowerSeries::from_coeffs(&c, n))
}

pub fn decode_germ<F: JsonField>(v: &Value, ctx: &Ctx, default_n: usize, cap: Option<usize>, path: &str) -> Decoded<GermDiffeo<F>> {
    let s = decode_series(v, ctx, default_n, cap, path)?;
    GermDiffeo::new(s).map_err(|e| schema_error(path, e.to_string()))
}

pub fn encode_germ<F: JsonField>(g: &GermDiffeo<F>) -> Value {
    encode_series(g.series())
}

pub fn germ_document<F: JsonField>(g: &GermDiffeo<F>) -> Value {
    let mut m = header("germ");
    m.insert("field".into(), field_label(g.series().coeffs()).into());
    m.insert("trunc".into(), g.trunc().into());
    m.insert("coeffs".into(), encode_values(g.series().coeffs()));
    Value::Object(m)
}

// ---- forms

pub fn encode_form<F: JsonField>(w: &FormalOneForm<F>) -> Value {
    json!({ "pole": w.pole_order(), "coeffs": encode_values(w.laurent().coeffs()) })
}

/// `{"pole": m, "coeffs": [c_{-m}, ...]}`.
pub fn decode_form<F: JsonField>(v: &Value, ctx: &Ctx, path: &str) -> Decoded<FormalOneForm<F>> {
    let pole = get_usize(v, "pole", path)?;
    let c: Vec<F> = decode_values(get(v, "coeffs", path)?, ctx, &join(path, "coeffs"))?;
    if c.is_empty() {
        return Err(schema_error(&join(path, "coeffs"), "empty"));
    }
    if pole > 0 && c[0].is_zero() {
        return Err(schema_error(&index(&join(path, "coeffs"), 0), "leading coefficient must be nonzero"));
    }
    Ok(FormalOneForm::new(LaurentSeries::new(pole, c)))
}

/// Terms `[[i, j, c], ...]` of `Σ c x^i y^j`.
pub fn encode_bivariate<F: JsonField>(p: &BivariatePoly<F>) -> Value {
    Value::Array(p.terms().into_iter().map(|(i, j, c)| json!([i, j, c.to_json()])).collect())
}

pub fn decode_bivariate<F: JsonField>(v: &Value, prec: usize, ctx: &Ctx, path: &str) -> Decoded<BivariatePoly<F>> {
    let a = v.as_array().ok_or_else(|| schema_error(path, "expected an array of [i, j, c] terms"))?;
    let mut terms = Vec::new();
    for (t, x) in a.iter().enumerate() {
        let p = index(path, t);
        let e = x.as_array().filter(|e| e.len() == 3).ok_or_else(|| schema_error(&p, "expected [i, j, c]"))?;
        let i = e[0].as_u64().ok_or_else(|| schema_error(&index(&p, 0), "expected an exponent"))? as usize;
        let j = e[1].as_u64().ok_or_else(|| schema_error(&index(&p, 1), "expected an exponent"))? as usize;
        if i + j > prec {
            return Err(schema_error(&p, format!("degree {} exceeds the bound {prec}", i + j)));
        }
        terms.push((i, j, F::from_json(&e[2], ctx, &index(&p, 2))?));
    }
    Ok(BivariatePoly::from_terms(&terms, prec))
}

pub fn encode_polyform<F: JsonField>(w: &PolyForm<F>) -> Value {
    json!({ "dx": encode_bivariate(&w.a), "dy": encode_bivariate(&w.b) })
}

pub fn decode_polyform<F: JsonField>(v: &Value, prec: usize, ctx: &Ctx, path: &str) -> Decoded<PolyForm<F>> {
    let a = match v.get("dx") {
        Some(x) => decode_bivariate(x, prec, ctx, &join(path, "dx"))?,
        None => BivariatePoly::zero(prec),
    };
    let b = match v.get("dy") {
        Some(x) => decode_bivariate(x, prec, ctx, &join(path, "dy"))?,
        None => BivariatePoly::zero(prec),
    };
    if !v.is_object() {
        return Err(schema_error(path, "expected {\"dx\": terms, \"dy\": terms}"));
    }
    Ok(PolyForm::new(a, b))
}

/// `{"degree": D, "omega0": form, "omega1": form, "omega2": form}`.
pub fn decode_triple<F: JsonField>(v: &Value, ctx: &Ctx, path: &str) -> Decoded<ProjectiveTriple<F>> {
    let d = get_usize(v, "degree", path)?;
    let w0 = decode_polyform(get(v, "omega0", path)?, d, ctx, &join(path, "omega0"))?;
    let w1 = decode_polyform(get(v, "omega1", path)?, d, ctx, &join(path, "omega1"))?;
    let w2 = decode_polyform(get(v, "omega2", path)?, d, ctx, &join(path, "omega2"))?;
    ProjectiveTriple::new(w0, w1, w2).map_err(|e| schema_error(&join(path, "omega0"), e.to_string()))
}

pub fn encode_triple<F: JsonField>(t: &ProjectiveTriple<F>) -> Value {
    json!({
        "degree": t.prec(),
        "omega0": encode_polyform(&t.w0),
        "omega1": encode_polyform(&t.w1),
        "omega2": encode_polyform(&t.w2),
    })
}

// ---- complexes and local systems

pub fn encode_complex(c: &SurfaceComplex) -> Value {
    json!({ "vertices": c.n_vertices(), "triangles": c.triangles() })
}

/// `{"genus": g}` for a shipped triangulation or
/// `{"vertices": n, "triangles": [[a, b, c], ...]}`.
pub fn decode_complex(v: &Value, path: &str) -> Decoded<SurfaceComplex> {
    if let Some(g) = v.get("genus") {
        let g = g.as_u64().ok_or_else(|| schema_error(&join(path, "genus"), "expected 1 or 2"))?;
        return canonical_complex(g as u32).map_err(|e| schema_error(&join(path, "genus"), e.to_string()));
    }
    let n = get_usize(v, "vertices", path)?;
    let tp = join(path, "triangles");
    let mut tris = Vec::new();
    for (t, x) in get_array(v, "triangles", path)?.iter().enumerate() {
        let p = index(&tp, t);
        let e = x.as_array().filter(|e| e.len() == 3).ok_or_else(|| schema_error(&p, "expected [a, b, c]"))?;
        let mut tri = [0usize; 3];
        for (s, y) in e.iter().enumerate() {
            let a = y.as_u64().ok_or_else(|| schema_error(&index(&p, s), "expected a vertex index"))? as usize;
            if a >= n {
                return Err(schema_error(&index(&p, s), format!("vertex {a} out of range")));
            }
            tri[s] = a;
        }
        tris.push(tri);
    }
    SurfaceComplex::orient(n, &tris).map_err(|e| schema_error(&tp, e.to_string()))
}

pub fn encode_local_system<F: JsonField>(c: &SurfaceComplex, l: &UnitaryLocalSystem<F>) -> Value {
    Value::Array(c.edges().iter().zip(l.weights()).map(|(e, w)| json!([e, w.to_json()])).collect())
}

/// `"edges": [[[i, j], w_ij], ...]` (any orientation; missing edges have
/// weight 1), `"free_weights": [...]` on the tree-cotree free edges, or
/// neither for the trivial system. An optional `"power": k` replaces the
/// system by its `k`-th power.
pub fn decode_local_system<F: JsonField>(
    v: &Value,
    c: &SurfaceComplex,
    ctx: &Ctx,
    path: &str,
) -> Decoded<UnitaryLocalSystem<F>> {
    let l = if let Some(e) = v.get("edges") {
        let ep = join(path, "edges");
        let arr = e.as_array().ok_or_else(|| schema_error(&ep, "expected an array"))?;
        let mut w = vec![F::one(); c.n_edges()];
        for (t, x) in arr.iter().enumerate() {
            let p = index(&ep, t);
            let pair = x.as_array().filter(|a| a.len() == 2).ok_or_else(|| schema_error(&p, "expected [[i, j], w]"))?;
            let ij = pair[0]
                .as_array()
                .filter(|a| a.len() == 2)
                .and_then(|a| Some((a[0].as_u64()? as usize, a[1].as_u64()? as usize)))
                .ok_or_else(|| schema_error(&index(&p, 0), "expected [i, j]"))?;
            let k = c.edge_index(ij.0, ij.1).ok_or_else(|| schema_error(&index(&p, 0), format!("{ij:?} is not an edge")))?;
            let x: F = F::from_json(&pair[1], ctx, &index(&p, 1))?;
            w[k] = if ij.0 < ij.1 { x } else { x.inv().ok_or_else(|| schema_error(&index(&p, 1), "zero weight"))? };
        }
        UnitaryLocalSystem::new(c, w).map_err(|e| schema_error(&ep, e.to_string()))?
    } else if let Some(f) = v.get("free_weights") {
        let fp = join(path, "free_weights");
        let w: Vec<F> = decode_values(f, ctx, &fp)?;
        UnitaryLocalSystem::from_free_weights(c, &w).map_err(|e| schema_error(&fp, e.to_string()))?
    } else {
        UnitaryLocalSystem::trivial(c)
    };
    match v.get("power") {
        None => Ok(l),
        Some(k) => Ok(l.power(k.as_i64().ok_or_else(|| schema_error(&join(path, "power"), "expected an integer"))?)),
    }
}

pub fn encode_cochain<F: JsonField>(x: &TwistedCochain<F>) -> Value {
    encode_values(&x.values)
}

// ---- transition systems

/// Transition system with its declared `ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemDocument<F: Field> {
    pub system: TransitionSystem<F>,
    pub nu: Option<usize>,
}

/// `{"kind": "transition_system", "complex": ..., "nu": ν, "trunc": N,
/// "edges": [{"edge": [a, b], "coeffs": [...]}, ...]}` where an entry gives
/// `y_a` as a function of `y_b`; or `{"kind": "seed", "name": "torus" |
/// "genus2" | "random", ...}` for a built-in seed. `default_n` is used when
/// `"trunc"` is absent and `seed` drives random seeds.
pub fn decode_transition_system<F: JsonField>(
    doc: &Value,
    ctx: &Ctx,
    default_n: usize,
    seed: u64,
) -> Decoded<SystemDocument<F>> {
    let kind = check_header(doc, &["transition_system", "seed"])?;
    let nu = opt_usize(doc, "nu", "")?;
    let n = opt_usize(doc, "trunc", "")?.unwrap_or(default_n);
    if kind == "seed" {
        let name = get_str(doc, "name", "")?;
        let system = match name {
            "torus" => torus_seed(nu.unwrap_or(1), n),
            "genus2" => genus_two_seed(n),
            "random" => {
                let c = decode_complex(get(doc, "complex", "")?, "complex")?;
                let l: UnitaryLocalSystem<F> = decode_local_system(get(doc, "system", "")?, &c, ctx, "system")?;
                let nu = nu.ok_or_else(|| schema_error("nu", "required for random seeds"))?;
                let mu = get_usize(doc, "mu", "")?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                random_foliated_system(&c, &l, nu, mu, n, &mut rng)
            }
            other => return Err(schema_error("name", format!("unknown seed {other:?}"))),
        }
        .map_err(|e| schema_error("name", e.to_string()))?;
        let nu = match name {
            "genus2" => Some(2),
            "torus" => Some(nu.unwrap_or(1)),
            _ => nu,
        };
        return Ok(SystemDocument { system, nu });
    }
    let c = decode_complex(get(doc, "complex", "")?, "complex")?;
    let mut germs = Vec::new();
    for (t, x) in get_array(doc, "edges", "")?.iter().enumerate() {
        let p = index("edges", t);
        let e = get_array(x, "edge", &p)?;
        let ep = join(&p, "edge");
        if e.len() != 2 {
            return Err(schema_error(&ep, "expected [a, b]"));
        }
        let a = e[0].as_u64().ok_or_else(|| schema_error(&index(&ep, 0), "expected a vertex"))? as usize;
        let b = e[1].as_u64().ok_or_else(|| schema_error(&index(&ep, 1), "expected a vertex"))? as usize;
        let obj = json!({ "coeffs": get(x, "coeffs", &p)?, "trunc": n });
        let g = decode_germ(&obj, ctx, n, None, &p)?;
        germs.push(((a, b), g));
    }
    let system = TransitionSystem::new(c, germs).map_err(|e| schema_error("edges", e.to_string()))?;
    Ok(SystemDocument { system, nu })
}

pub fn encode_transition_system<F: JsonField>(t: &TransitionSystem<F>, nu: Option<usize>) -> Value {
    let c = t.complex();
    let mut all = Vec::new();
    let mut edges = Vec::new();
    for (e, [i, j]) in c.edges().iter().copied().enumerate() {
        let m = t.edge_map(e);
        all.extend(m.series().coeffs().iter().cloned());
        edges.push(json!({ "edge": [j, i], "coeffs": encode_values(m.series().coeffs()) }));
    }
    let mut m = header("transition_system");
    m.insert("field".into(), field_label(all.iter()).into());
    m.insert("complex".into(), encode_complex(c));
    m.insert("nu".into(), nu.map_or(Value::Null, Value::from));
    m.insert("trunc".into(), t.trunc().into());
    m.insert("edges".into(), Value::Array(edges));
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::cohomology;

    type Q = Cyclotomic;

    #[test]
    fn cyclotomic_round_trip() {
        let ctx = Ctx::default();
        for x in [Q::from_i64(-3), Q::from_ratio(5, 7), Q::root_of_unity(3, 1), Q::root_of_unity(12, 5).add(&Q::from_ratio(1, 2))] {
            let v = x.to_json();
            assert_eq!(Q::from_json(&v, &ctx, "x").unwrap(), x);
        }
        assert_eq!(Q::from_i64(4).to_json(), json!(4));
        assert_eq!(Q::from_ratio(-1, 3).to_json(), json!("-1/3"));
        let c = Ctx { modulus: Some(3), ..Ctx::default() };
        assert_eq!(Q::from_json(&json!([0, 1]), &c, "x").unwrap(), Q::root_of_unity(3, 1));
        assert_eq!(Q::from_json(&json!([0, 1]), &Ctx::default(), "w").unwrap_err().field, "w");
        assert_eq!(Q::from_json(&json!(1.5), &ctx, "a.b").unwrap_err().field, "a.b");
    }

    #[test]
    fn bigfloat_round_trip() {
        let ctx = Ctx::default();
        let x = BigComplex::from_json(&json!(["1.25", "-2"]), &ctx, "x").unwrap();
        assert_eq!(x, BigComplex::new(1.25, -2.0));
        let y = BigComplex::from_json(&x.to_json(), &ctx, "x").unwrap();
        assert_eq!(x, y);
        let z = BigComplex::from_json(&json!("1/3"), &ctx, "x").unwrap();
        assert_eq!(z.mul(&BigComplex::from_i64(3)), BigComplex::one());
        let w = BigComplex::from_json(&json!({"n": 4, "c": [0, 1]}), &ctx, "x").unwrap();
        assert_eq!(w, BigComplex::new(0.0, 1.0));
    }

    #[test]
    fn field_spec_parsing() {
        assert_eq!("cyclotomic:12".parse::<FieldSpec>().unwrap(), FieldSpec::Cyclotomic(Some(12)));
        assert_eq!("bigfloat:128".parse::<FieldSpec>().unwrap(), FieldSpec::Bigfloat(128));
        assert_eq!("bigfloat".parse::<FieldSpec>().unwrap(), FieldSpec::Bigfloat(DEFAULT_PREC));
        assert!("float".parse::<FieldSpec>().is_err());
        let doc = json!({"field": "cyclotomic:5"});
        let (ctx, spec) = Ctx::from_document(&doc, None).unwrap();
        assert_eq!((ctx.modulus, spec), (Some(5), FieldSpec::Cyclotomic(Some(5))));
        let (ctx, _) = Ctx::from_document(&doc, Some(FieldSpec::Bigfloat(64))).unwrap();
        assert_eq!(ctx.prec, 64);
        assert_eq!(Ctx::from_document(&json!({"field": 3}), None).unwrap_err().field, "field");
    }

    #[test]
    fn germ_document_round_trip() {
        let g = GermDiffeo::new(PowerSeries::from_coeffs(
            &[Q::zero(), Q::root_of_unity(5, 2), Q::from_ratio(1, 3), Q::zero(), Q::from_i64(7)],
            6,
        ))
        .unwrap();
        let doc = germ_document(&g);
        assert_eq!(doc["field"], json!("cyclotomic:5"));
        let (ctx, _) = Ctx::from_document(&doc, None).unwrap();
        let back: GermDiffeo<Q> = decode_germ(&doc, &ctx, 16, None, "").unwrap();
        assert_eq!(back, g);
        let capped: GermDiffeo<Q> = decode_germ(&doc, &ctx, 16, Some(3), "").unwrap();
        assert_eq!(capped.trunc(), 3);
        let bad = json!({"coeffs": [1, 1]});
        assert!(decode_germ::<Q>(&bad, &ctx, 4, None, "germ").is_err());
        let long = json!({"coeffs": [0, 1, 0, 1], "trunc": 2});
        assert_eq!(decode_germ::<Q>(&long, &ctx, 4, None, "germ").unwrap_err().field, "germ.coeffs");
    }

    #[test]
    fn complex_and_local_system() {
        let c = decode_complex(&json!({"genus": 2}), "complex").unwrap();
        assert_eq!(c.n_triangles(), 26);
        let back = decode_complex(&encode_complex(&c), "complex").unwrap();
        assert_eq!(back.n_edges(), 39);
        let ctx = Ctx::default();
        let l: UnitaryLocalSystem<Q> =
            decode_local_system(&json!({"free_weights": [{"n": 5, "c": [0, 1]}, 1, 1, 1]}), &c, &ctx, "system").unwrap();
        assert_eq!(cohomology(&c, &l).unwrap().dims(), [0, 2, 0]);
        let v = json!({ "edges": encode_local_system(&c, &l) });
        let l2: UnitaryLocalSystem<Q> = decode_local_system(&v, &c, &ctx, "system").unwrap();
        assert_eq!(l2, l);
        let err = decode_complex(&json!({"vertices": 3, "triangles": [[0, 1, 5]]}), "complex").unwrap_err();
        assert_eq!(err.field, "complex.triangles[0][2]");
    }

    #[test]
    fn transition_system_round_trip() {
        let s = torus_seed::<Q>(1, 6).unwrap();
        let doc = encode_transition_system(&s, Some(1));
        let (ctx, _) = Ctx::from_document(&doc, None).unwrap();
        let back: SystemDocument<Q> = decode_transition_system(&doc, &ctx, 16, 0).unwrap();
        assert_eq!(back.system, s);
        assert_eq!(back.nu, Some(1));
        let seed: SystemDocument<Q> =
            decode_transition_system(&json!({"schema": SCHEMA, "kind": "seed", "name": "genus2", "trunc": 5}), &ctx, 16, 0)
                .unwrap();
        assert_eq!(seed.nu, Some(2));
        assert_eq!(seed.system.trunc(), 5);
        let missing = json!({"kind": "seed"});
        assert_eq!(decode_transition_system::<Q>(&missing, &ctx, 16, 0).unwrap_err().field, "schema");
    }

    #[test]
    fn forms_and_triples() {
        let ctx = Ctx::default();
        let w = FormalOneForm::<Q>::omega(2, &Q::from_i64(3), 4);
        let back: FormalOneForm<Q> = decode_form(&encode_form(&w), &ctx, "form").unwrap();
        assert_eq!(back, w);
        let p = BivariatePoly::<Q>::from_terms(&[(1, 2, Q::from_i64(4)), (0, 0, Q::from_ratio(1, 2))], 4);
        let back: BivariatePoly<Q> = decode_bivariate(&encode_bivariate(&p), 4, &ctx, "p").unwrap();
        assert_eq!(back, p);
        assert!(decode_bivariate::<Q>(&json!([[3, 3, 1]]), 4, &ctx, "p").is_err());
        let t = json!({"degree": 3, "omega0": {"dy": [[0, 0, 1]]}, "omega1": {}, "omega2": {"dy": [[0, 1, 1]]}});
        let tr: ProjectiveTriple<Q> = decode_triple(&t, &ctx, "triple").unwrap();
        let again: ProjectiveTriple<Q> = decode_triple(&encode_triple(&tr), &ctx, "triple").unwrap();
        assert_eq!(again, tr);
    }
}

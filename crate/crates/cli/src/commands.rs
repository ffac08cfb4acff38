//! Subcommand implementations: decode the input document, call the library,
//! shape the report.

use crate::encode;
use folia_core::cech::{cohomology, pairing_matrix};
use folia_core::classify::{group_analyze, normal_form_element, AnalyzeConfig};
use folia_core::forms::{gauge_transform, invariant_form_search, pullback, triple_check, FormalOneForm};
use folia_core::json::{
    check_header, decode_bivariate, decode_complex, decode_form, decode_germ, decode_local_system,
    decode_transition_system, decode_triple, encode_cochain, encode_form, encode_transition_system, encode_triple,
    encode_values, field_label, get, get_array, get_usize, opt_usize, Ctx, FieldSpec, JsonField, SchemaError, SCHEMA,
};
use folia_core::ueda::{compute_ueda, construct_formal_foliation, log_affine_construct, validate, LogAffineOutcome, UedaType};
use folia_core::{BigComplex, Cyclotomic, GermDiffeo};
use serde_json::{json, Map, Value};
use std::fmt;

pub struct Opts {
    pub order: usize,
    pub seed: u64,
    pub backend: Option<FieldSpec>,
}

/// Input or usage error (exit 1).
#[derive(Debug)]
pub enum Failure {
    Schema(SchemaError),
    Input(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Schema(e) => write!(f, "schema error at {}: {}", e.field, e.message),
            Failure::Input(m) => write!(f, "{m}"),
        }
    }
}

impl Failure {
    pub fn to_json(&self, command: &str) -> Value {
        let error = match self {
            Failure::Schema(e) => json!({ "field": e.field, "message": e.message }),
            Failure::Input(m) => json!({ "message": m }),
        };
        json!({ "schema": SCHEMA, "command": command, "error": error })
    }
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::Schema(e)
    }
}

impl From<folia_core::Error> for Failure {
    fn from(e: folia_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

pub struct Report {
    pub body: Value,
    /// 0 for a verdict, 2 for a mathematical failure with a witness.
    pub code: u8,
}

type Out = Result<(Map<String, Value>, u8), Failure>;

pub fn run(name: &str, doc: &Value, opts: &Opts) -> Result<Report, Failure> {
    let (ctx, spec) = Ctx::from_document(doc, opts.backend)?;
    let (mut body, code) = match spec {
        FieldSpec::Cyclotomic(_) => run_with::<Cyclotomic>(name, doc, &ctx, opts)?,
        FieldSpec::Bigfloat(_) => run_with::<BigComplex>(name, doc, &ctx, opts)?,
    };
    body.insert("schema".into(), SCHEMA.into());
    body.insert("command".into(), name.into());
    Ok(Report { body: Value::Object(body), code })
}

fn run_with<F: JsonField>(name: &str, doc: &Value, ctx: &Ctx, opts: &Opts) -> Out {
    match name {
        "classify-germ" => classify_germ::<F>(doc, ctx, opts),
        "group-analyze" => group::<F>(doc, ctx, opts),
        "cohomology" => cohomology_report::<F>(doc, ctx),
        "ueda" => ueda::<F>(doc, ctx, opts),
        "construct" => construct::<F>(doc, ctx, opts),
        "log-affine" => log_affine::<F>(doc, ctx, opts),
        "forms-check" => forms_check::<F>(doc, ctx, opts),
        other => Err(Failure::Input(format!("unknown command {other}"))),
    }
}

fn generators<F: JsonField>(doc: &Value, ctx: &Ctx, opts: &Opts) -> Result<Vec<GermDiffeo<F>>, Failure> {
    let n = opt_usize(doc, "trunc", "")?.unwrap_or(opts.order);
    let gens = get_array(doc, "generators", "")?;
    if gens.is_empty() {
        return Err(folia_core::json::schema_error("generators", "at least one generator is required").into());
    }
    gens.iter()
        .enumerate()
        .map(|(i, g)| decode_germ(g, ctx, n, Some(opts.order), &format!("generators[{i}]")).map_err(Failure::from))
        .collect()
}

fn classify_germ<F: JsonField>(doc: &Value, ctx: &Ctx, opts: &Opts) -> Out {
    check_header(doc, &["germ"])?;
    let g: GermDiffeo<F> = decode_germ(doc, ctx, opts.order, Some(opts.order), "")?;
    let nf = normal_form_element(&g)?;
    let mut out = Map::new();
    out.insert("field".into(), field_label(g.series().coeffs()).into());
    encode::normal_form(&nf, &mut out);
    Ok((out, 0))
}

fn group<F: JsonField>(doc: &Value, ctx: &Ctx, opts: &Opts) -> Out {
    check_header(doc, &["group"])?;
    let gens: Vec<GermDiffeo<F>> = generators(doc, ctx, opts)?;
    let cfg = AnalyzeConfig { seed: opts.seed, ..AnalyzeConfig::default() };
    let v = group_analyze(&gens, &cfg)?;
    let mut out = Map::new();
    out.insert("field".into(), field_label(gens.iter().flat_map(|g| g.series().coeffs())).into());
    out.insert("generators".into(), gens.len().into());
    encode::group_verdict(&v, &mut out);
    Ok((out, 0))
}

fn cohomology_report<F: JsonField>(doc: &Value, ctx: &Ctx) -> Out {
    check_header(doc, &["local_system"])?;
    let c = decode_complex(get(doc, "complex", "")?, "complex")?;
    let l = decode_local_system::<F>(doc, &c, ctx, "")?;
    let h = cohomology(&c, &l)?;
    let dual = cohomology(&c, &l.power(-1))?;
    let pairing = pairing_matrix(&h, &dual)?;
    let mut out = Map::new();
    out.insert("field".into(), field_label(l.weights()).into());
    out.insert("h".into(), json!(h.dims()));
    out.insert("genus".into(), c.genus().into());
    out.insert("euler_characteristic".into(), c.euler_characteristic().into());
    out.insert("cells".into(), json!([c.n_vertices(), c.n_edges(), c.n_triangles()]));
    out.insert("trivial".into(), l.is_trivial().into());
    out.insert("h1_basis".into(), Value::Array(h.bases[1].reps.iter().map(encode_cochain).collect()));
    out.insert("pairing".into(), encode::matrix(&pairing));
    out.insert("pairing_rank".into(), encode::rank(&pairing).into());
    Ok((out, 0))
}

fn ueda<F: JsonField>(doc: &Value, ctx: &Ctx, opts: &Opts) -> Out {
    let sd = decode_transition_system::<F>(doc, ctx, opts.order, opts.seed)?;
    let rep = validate(&sd.system)?;
    let u = compute_ueda(&sd.system)?;
    let mut out = Map::new();
    out.insert("field".into(), field_label(sd.system.linear_system().weights()).into());
    out.insert("trunc".into(), rep.trunc.into());
    out.insert("valid_through".into(), rep.order_valid.into());
    out.insert(
        "first_defect".into(),
        rep.first_defect.map_or(Value::Null, |(t, o)| json!({ "triangle": t, "order": o })),
    );
    out.insert("declared_nu".into(), sd.nu.map_or(Value::Null, Value::from));
    match u.utype {
        UedaType::Finite(k) => {
            out.insert("utype".into(), k.into());
            out.insert("infinite_through".into(), Value::Null);
            out.insert("consistent".into(), sd.nu.is_none_or(|d| d == k).into());
        }
        UedaType::InfiniteAtOrder(m) => {
            out.insert("utype".into(), Value::Null);
            out.insert("infinite_through".into(), m.into());
            out.insert("consistent".into(), sd.nu.is_none().into());
        }
    }
    out.insert("class".into(), encode_values(&u.class_coords));
    out.insert("cocycle".into(), u.cocycle.as_ref().map_or(Value::Null, encode_cochain));
    Ok((out, 0))
}

fn construct<F: JsonField>(doc: &Value, ctx: &Ctx, opts: &Opts) -> Out {
    let sd = decode_transition_system::<F>(doc, ctx, opts.order, opts.seed)?;
    let run = construct_formal_foliation(&sd.system, sd.nu, opts.order)?;
    let rep = validate(&run.system)?;
    let mut out = Map::new();
    out.insert("field".into(), field_label(sd.system.linear_system().weights()).into());
    out.insert("target".into(), opts.order.into());
    out.insert("nu".into(), run.nu.map_or(Value::Null, Value::from));
    out.insert("valid_through".into(), rep.order_valid.into());
    out.insert("seed_class".into(), encode_values(&run.seed_ueda.class_coords));
    out.insert("log".into(), Value::Array(run.log.iter().map(encode::action).collect()));
    out.insert("notes".into(), json!(run.notes));
    out.insert("failure".into(), run.failure.as_ref().map_or(Value::Null, encode::construction_failure));
    out.insert("system".into(), encode_transition_system(&run.system, run.nu));
    Ok((out, if run.failure.is_some() { 2 } else { 0 }))
}

fn log_affine<F: JsonField>(doc: &Value, ctx: &Ctx, opts: &Opts) -> Out {
    let sd = decode_transition_system::<F>(doc, ctx, opts.order, opts.seed)?;
    let nu = sd.nu.ok_or_else(|| folia_core::json::schema_error("nu", "missing"))?;
    let mut out = Map::new();
    out.insert("nu".into(), nu.into());
    let code = match log_affine_construct(&sd.system, nu)? {
        LogAffineOutcome::Success(r) => {
            out.insert("lambda".into(), r.lambda.to_json());
            out.insert("a".into(), encode_cochain(&r.a));
            out.insert("certified_order".into(), r.certified_order.into());
            out.insert("steps".into(), Value::Array(r.steps.iter().map(encode::log_affine_step).collect()));
            out.insert("relations".into(), Value::Array(r.relations.iter().map(|p| encode_values(p.coeffs())).collect()));
            out.insert("system".into(), encode_transition_system(&r.system, Some(nu)));
            out.insert("failure".into(), Value::Null);
            0
        }
        LogAffineOutcome::NotProportional { order, class_coords, a_coords, steps } => {
            out.insert("steps".into(), Value::Array(steps.iter().map(encode::log_affine_step).collect()));
            out.insert(
                "failure".into(),
                json!({ "order": order, "class": encode_values(&class_coords), "a_class": encode_values(&a_coords) }),
            );
            2
        }
    };
    Ok((out, code))
}

fn forms_check<F: JsonField>(doc: &Value, ctx: &Ctx, opts: &Opts) -> Out {
    let kind = check_header(doc, &["pullback", "invariant_search", "triple"])?;
    let mut out = Map::new();
    out.insert("check".into(), kind.clone().into());
    match kind.as_str() {
        "pullback" => {
            let g: GermDiffeo<F> = decode_germ(get(doc, "germ", "")?, ctx, opts.order, Some(opts.order), "germ")?;
            let form: FormalOneForm<F> = match (doc.get("form"), doc.get("omega")) {
                (Some(f), _) => decode_form(f, ctx, "form")?,
                (None, Some(w)) => {
                    let k = get_usize(w, "k", "omega")?;
                    let lambda = F::from_json(get(w, "lambda", "omega")?, ctx, "omega.lambda")?;
                    FormalOneForm::omega(k, &lambda, g.trunc() as i64)
                }
                (None, None) => return Err(folia_core::json::schema_error("form", "missing").into()),
            };
            let scale = match doc.get("scale") {
                Some(s) => F::from_json(s, ctx, "scale")?,
                None => F::one(),
            };
            let pb = pullback(&g, &form)?;
            let preserved = pb.agrees_through(&form.scale(&scale), pb.trunc());
            out.insert("pullback".into(), encode_form(&pb));
            out.insert("certified_order".into(), pb.trunc().into());
            out.insert("preserved".into(), preserved.into());
        }
        "invariant_search" => {
            let gens: Vec<GermDiffeo<F>> = generators(doc, ctx, opts)?;
            out.insert("result".into(), encode::invariant_form(&invariant_form_search(&gens)?));
        }
        _ => {
            let t = decode_triple::<F>(doc, ctx, "")?;
            out.insert("report".into(), encode::triple_report(&triple_check(&t)));
            if let Some(gv) = doc.get("gauge") {
                let d = t.prec();
                let f = match gv.get("f") {
                    Some(x) => decode_bivariate(x, d, ctx, "gauge.f")?,
                    None => folia_core::forms::BivariatePoly::one(d),
                };
                let g = match gv.get("g") {
                    Some(x) => decode_bivariate(x, d, ctx, "gauge.g")?,
                    None => folia_core::forms::BivariatePoly::zero(d),
                };
                let moved = gauge_transform(&t, &f, &g).map_err(|e| folia_core::json::schema_error("gauge.f", e.to_string()))?;
                out.insert("transformed".into(), encode_triple(&moved));
                out.insert("transformed_report".into(), encode::triple_report(&triple_check(&moved)));
            }
        }
    }
    Ok((out, 0))
}

//! Report fragments for library results.

use folia_core::classify::{ElementNormalForm, Evidence, GroupModel, GroupVerdict, ModelConjugation, NormalFormKind, Verdict};
use folia_core::forms::{InvariantForm, TripleReport};
use folia_core::json::{encode_bivariate, encode_cochain, encode_form, encode_germ, encode_values, JsonField};
use folia_core::linalg::Matrix;
use folia_core::ueda::{ActionRecord, ConstructionFailure, LogAffineAction, LogAffineStep, ObstructionCocycle};
use folia_core::{Field, Tangency};
use serde_json::{json, Map, Value};

pub fn tangency(t: &Tangency) -> Value {
    match t {
        Tangency::NotTangent => json!("not_tangent"),
        Tangency::Order(k) => json!(k),
        Tangency::IdentityToOrder(n) => json!({ "identity_through": n }),
    }
}

pub fn normal_form<F: JsonField>(nf: &ElementNormalForm<F>, out: &mut Map<String, Value>) {
    match &nf.kind {
        NormalFormKind::Linearizable { a } => {
            out.insert("kind".into(), "linearizable".into());
            out.insert("a".into(), a.to_json());
        }
        NormalFormKind::Resonant { a, k, lambda } => {
            out.insert("kind".into(), "resonant".into());
            out.insert("a".into(), a.to_json());
            out.insert("k".into(), (*k).into());
            out.insert("lambda".into(), lambda.to_json());
        }
    }
    out.insert("model_time".into(), nf.model_time.to_json());
    out.insert("finite_order".into(), nf.finite_order.map_or(Value::Null, Value::from));
    out.insert("certified_order".into(), nf.certified_order.into());
    out.insert("conjugator".into(), encode_germ(&nf.conjugator));
    out.insert("model".into(), encode_germ(&nf.model));
}

pub fn group_model<F: JsonField>(m: &GroupModel<F>) -> Value {
    match m {
        GroupModel::Linear => json!({ "type": "linear" }),
        GroupModel::FiniteLinear => json!({ "type": "finite_linear" }),
        GroupModel::E { k, lambda } => json!({ "type": "E", "k": k, "lambda": lambda.to_json() }),
        GroupModel::A { k } => json!({ "type": "A", "k": k }),
    }
}

fn conjugation<F: JsonField>(c: &ModelConjugation<F>) -> Value {
    json!({
        "conjugator": encode_germ(&c.conjugator),
        "model": group_model(&c.model),
        "images": c.images.iter().map(encode_germ).collect::<Vec<_>>(),
        "certified_order": c.certified_order,
    })
}

fn evidence(e: &Evidence) -> Value {
    json!({
        "sampled_words": e.sampled_words,
        "tangent_samples": e.tangent_samples,
        "tangency_orders": e.tangency_orders,
        "distinguished": e.distinguished.as_ref().map(|w| w.to_string()),
    })
}

pub fn group_verdict<F: JsonField>(v: &GroupVerdict<F>, out: &mut Map<String, Value>) {
    let verdict = match &v.verdict {
        Verdict::Abelian => json!({ "type": "abelian" }),
        Verdict::Linearizable => json!({ "type": "linearizable" }),
        Verdict::FiniteLinear { orders } => json!({ "type": "finite_linear", "orders": orders }),
        Verdict::SolvableModel(m) => json!({ "type": "solvable_model", "model": group_model(m) }),
        Verdict::NonsolvableWitness(steps) => json!({
            "type": "nonsolvable",
            "witness": steps
                .iter()
                .map(|s| json!({ "word": s.word.to_string(), "tangency": tangency(&s.tangency), "germ": encode_germ(&s.germ) }))
                .collect::<Vec<_>>(),
        }),
        Verdict::Undetermined { reason } => json!({ "type": "undetermined", "reason": reason }),
    };
    out.insert("verdict".into(), verdict);
    out.insert("abelian".into(), v.abelian.into());
    out.insert("conjugation".into(), v.conjugation.as_ref().map_or(Value::Null, conjugation));
    out.insert("evidence".into(), evidence(&v.evidence));
    out.insert("certified_order".into(), v.certified_order.into());
}

pub fn matrix<F: JsonField>(m: &Matrix<F>) -> Value {
    Value::Array((0..m.rows()).map(|i| encode_values(m.row(i))).collect())
}

pub fn invariant_form<F: JsonField>(f: &InvariantForm<F>) -> Value {
    match f {
        InvariantForm::Logarithmic(w) => json!({ "type": "logarithmic", "form": encode_form(w) }),
        InvariantForm::Omega { k, lambda, form } => {
            json!({ "type": "omega", "k": k, "lambda": lambda.to_json(), "form": encode_form(form) })
        }
        InvariantForm::Line { k, form } => json!({ "type": "line", "k": k, "form": encode_form(form) }),
        InvariantForm::NoneAtOrder(n) => json!({ "type": "none", "order": n }),
    }
}

pub fn triple_report<F: JsonField>(r: &TripleReport<F>) -> Value {
    json!({
        "integrable": r.integrable(),
        "certified_degree": r.certified_degree,
        "residuals": r.residuals.iter().map(encode_bivariate).collect::<Vec<_>>(),
    })
}

pub fn obstruction<F: JsonField>(o: &ObstructionCocycle<F>) -> Value {
    json!({ "order": o.order, "power": o.power, "cochain": encode_cochain(&o.cochain) })
}

pub fn action<F: JsonField>(r: &ActionRecord<F>) -> Value {
    json!({
        "order": r.order,
        "action": r.action.as_str(),
        "class": encode_values(&r.class_coords),
        "correction": encode_cochain(&r.correction),
        "alpha": r.alpha.as_ref().map(|(o, a)| json!({ "order": o, "cochain": encode_cochain(a) })),
        "preserved_through": r.preserved_through,
    })
}

pub fn construction_failure<F: JsonField>(f: &ConstructionFailure<F>) -> Value {
    json!({
        "order": f.order,
        "detail": f.detail,
        "class": encode_values(&f.class_coords),
        "obstruction": f.obstruction.as_ref().map(obstruction),
    })
}

pub fn log_affine_step<F: JsonField>(s: &LogAffineStep<F>) -> Value {
    let action = match s.action {
        LogAffineAction::None => "none",
        LogAffineAction::Lambda => "lambda",
        LogAffineAction::Rescale => "rescale",
    };
    json!({
        "order": s.order,
        "kappa": s.kappa.to_json(),
        "action": action,
        "primitive": encode_cochain(&s.primitive),
    })
}

pub fn rank<F: Field>(m: &Matrix<F>) -> usize {
    folia_core::linalg::Rref::new(m, false).rank()
}

use folia_core::cech::{canonical_complex, cohomology, coboundary, TwistedCochain, UnitaryLocalSystem};
use folia_core::json::{encode_transition_system, Ctx, JsonField};
use folia_core::ueda::{seed_from_cocycle, TransitionSystem};
use folia_core::{Cyclotomic, Field, GermDiffeo, PowerSeries};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::{Command, Output};

type Q = Cyclotomic;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn folia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_folia")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad report {e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_temp(name: &str, v: &Value) -> String {
    let dir = std::env::temp_dir().join(format!("folia-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn classify_mobius() {
    let out = folia(&["classify-germ", &data("mobius.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], "folia/1");
    assert_eq!((r["kind"].clone(), r["a"].clone(), r["k"].clone(), r["lambda"].clone()), (json!("resonant"), json!(1), json!(1), json!(0)));
}

#[test]
fn classify_with_bigfloat_backend() {
    let out = folia(&["classify-germ", &data("mobius.json"), "--backend", "bigfloat:128", "--order", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["kind"], "resonant");
    assert_eq!(r["k"], 1);
    assert_eq!(r["certified_order"], 10);
}

#[test]
fn cohomology_genus_two_order_five() {
    let out = folia(&["cohomology", &data("genus2_order5.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["h"], json!([0, 2, 0]));
    assert_eq!(r["pairing_rank"], 2);
}

#[test]
fn construct_torus_to_order_ten() {
    let out = folia(&["construct", &data("torus_seed.json"), "--order", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["valid_through"], 10);
    assert_eq!(r["failure"], Value::Null);
    let log = r["log"].as_array().unwrap();
    assert!(!log.is_empty());
    assert!(log.iter().any(|e| e["action"] == "retroactive"));
    for e in log {
        if e["action"] == "retroactive" {
            assert_eq!(e["preserved_through"].as_u64().unwrap() + 2, e["order"].as_u64().unwrap());
        }
    }
    // the emitted system round-trips through the ueda command
    let sys = write_temp("constructed.json", &r["system"]);
    let u = report(&folia(&["ueda", &sys]));
    assert_eq!(u["valid_through"], 10);
    assert_eq!(u["utype"], 1);
}

#[test]
fn construct_obstruction_exits_two_with_checkable_class() {
    let c = canonical_complex(1).unwrap();
    let t = UnitaryLocalSystem::<Q>::trivial(&c);
    let x = TwistedCochain::new(0, (0..7).map(Q::from_i64).collect());
    let a = coboundary(&c, &t, &x);
    let seed = seed_from_cocycle(&c, &t, 1, &a, 8).unwrap();
    let path = write_temp("coboundary_seed.json", &encode_transition_system(&seed, Some(1)));
    let out = folia(&["construct", &path, "--order", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    let f = &r["failure"];
    let order = f["order"].as_u64().unwrap() as i64;
    let ctx = Ctx::default();
    let values: Vec<Q> = f["obstruction"]["cochain"].as_array().unwrap().iter().map(|v| Q::from_json(v, &ctx, "v").unwrap()).collect();
    let class: Vec<Q> = f["class"].as_array().unwrap().iter().map(|v| Q::from_json(v, &ctx, "v").unwrap()).collect();
    let h = cohomology(&c, &t.power(-(order - 1))).unwrap();
    assert_eq!(h.project(&TwistedCochain::new(2, values)).unwrap(), class);
    assert!(class.iter().any(|q| !q.is_zero()));
}

#[test]
fn ueda_reports_type_and_class() {
    let out = folia(&["ueda", &data("genus2_seed.json"), "--order", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["utype"], 2);
    assert_eq!(r["consistent"], true);
    assert_eq!(r["class"].as_array().unwrap().len(), 2);
}

#[test]
fn group_verdicts() {
    let r = report(&folia(&["group-analyze", &data("homotheties.json"), "--order", "8"]));
    assert_eq!(r["abelian"], true);
    assert_eq!(r["conjugation"]["model"]["type"], "linear");
    let out = folia(&["group-analyze", &data("tangent_pair.json"), "--order", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"]["type"], "nonsolvable");
    // tangency orders along the witness chain strictly increase
    let orders: Vec<u64> =
        r["verdict"]["witness"].as_array().unwrap().iter().map(|s| s["tangency"].as_u64().unwrap()).collect();
    assert!(orders.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        vec!["group-analyze", "tangent_pair.json", "--order", "10", "--seed", "7"],
        vec!["construct", "genus2_seed.json", "--order", "10", "--pretty"],
    ] {
        let mut a = args.clone();
        let p = data(a[1]);
        a[1] = &p;
        let x = folia(&a);
        let y = folia(&a);
        assert_eq!(x.status.code(), Some(0));
        assert_eq!(x.stdout, y.stdout);
    }
}

fn log_seed(b_rep: usize, scale: i64) -> Value {
    // 1/y_i - 1/y_j = a_ij + b_ij y_j with a the first H¹ class
    let c = canonical_complex(1).unwrap();
    let h = cohomology(&c, &UnitaryLocalSystem::<Q>::trivial(&c)).unwrap();
    let a = &h.bases[1].reps[0];
    let b = h.bases[1].reps[b_rep].scale(&Q::from_i64(scale));
    let n = 9;
    let maps: Vec<GermDiffeo<Q>> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| {
            let mut den = PowerSeries::one(n);
            den.set_coeff(1, x.clone());
            den.set_coeff(2, y.clone());
            GermDiffeo::new(PowerSeries::var(n).mul(&den.reciprocal().unwrap())).unwrap().inverse()
        })
        .collect();
    let s = TransitionSystem::from_maps(c, maps).unwrap();
    encode_transition_system(&s, Some(1))
}

#[test]
fn log_affine_success_and_failure() {
    let ok = write_temp("log_ok.json", &log_seed(0, 2));
    let out = folia(&["log-affine", &ok]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["steps"][0]["kappa"], 2);
    assert_eq!(r["lambda"], 2);
    let bad = write_temp("log_bad.json", &log_seed(1, 1));
    let out = folia(&["log-affine", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["failure"]["order"], 1);
    assert_eq!(r["failure"]["class"], json!([0, 1]));
}

#[test]
fn forms_checks() {
    let r = report(&folia(&["forms-check", &data("triple_dy_dx.json")]));
    assert_eq!(r["report"]["integrable"], false);
    assert_eq!(r["report"]["residuals"][0], json!([[0, 0, -1]]));
    let r = report(&folia(&["forms-check", &data("triple_gauge.json")]));
    assert_eq!(r["report"]["integrable"], true);
    assert_eq!(r["transformed_report"]["integrable"], true);
    let r = report(&folia(&["forms-check", &data("homothety_search.json"), "--order", "8"]));
    assert_eq!(r["result"]["type"], "logarithmic");
    let r = report(&folia(&["forms-check", &data("omega_pullback.json"), "--order", "8"]));
    assert_eq!(r["preserved"], true);
}

#[test]
fn schema_errors_name_the_field() {
    let p = write_temp("bad_germ.json", &json!({"schema": "folia/1", "kind": "germ", "coeffs": [0, 1, "x"]}));
    let out = folia(&["classify-germ", &p]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["error"]["field"], "coeffs[2]");
    let p = write_temp("no_schema.json", &json!({"kind": "germ", "coeffs": [0, 1]}));
    assert_eq!(report(&folia(&["classify-germ", &p]))["error"]["field"], "schema");
    let p = write_temp("bad_edge.json", &json!({"schema": "folia/1", "kind": "local_system", "complex": {"genus": 1}, "edges": [[[0, 0], 1]]}));
    assert_eq!(report(&folia(&["cohomology", &p]))["error"]["field"], "edges[0][0]");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(folia(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(folia(&["classify-germ", &data("mobius.json"), "--backend", "float"]).status.code(), Some(1));
    assert_eq!(folia(&["classify-germ", "/nonexistent/input.json"]).status.code(), Some(1));
    assert_eq!(folia(&["--help"]).status.code(), Some(0));
}

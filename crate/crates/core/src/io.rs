//! JSON persistence for fields, structures, cohomology vectors, and
//! deformation problems. Rationals travel as `"p/q"` strings and trig
//! coefficients as explicit mode lists. Parsing enforces canonical mode
//! representatives, rejects unknown fields, and reports every failure with a
//! JSON-pointer location; serialization is deterministic, so parse after
//! serialize is the identity.

use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::algebra::{Rat, MONOMIAL_NAMES};
use crate::error::Error;
use crate::fields::{BaField, FormField3, GenVectorField};
use crate::g22::CohomologyVector;
use crate::trig::{Parity, TrigScalar};

pub const SCHEMA_VERSION: &str = "1";
pub const TORUS_PERIOD: &str = "2pi";

/// A validated-structure document: the form plus the certificate request it
/// was (or is to be) checked with.
#[derive(Clone, Debug, PartialEq)]
pub struct G22Doc {
    pub rho: FormField3,
    pub grid: usize,
    pub margin: Rat,
}

/// A deformation problem: flow the base toward `rho + d phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct MoserDoc {
    pub base: G22Doc,
    pub phi: FormField3,
    pub grid: usize,
    pub steps: usize,
    pub band: Option<u32>,
    pub margin: Option<Rat>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    FormField(FormField3),
    GenVectorField(GenVectorField),
    BaField(BaField),
    G22(G22Doc),
    Cohomology(CohomologyVector),
    Moser(MoserDoc),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::FormField(_) => "form_field",
            Payload::GenVectorField(_) => "gen_vector_field",
            Payload::BaField(_) => "ba_field",
            Payload::G22(_) => "g22_structure",
            Payload::Cohomology(_) => "cohomology_vector",
            Payload::Moser(_) => "moser_problem",
        }
    }
}

pub fn rat_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rat_str(s: &str, ptr: &str) -> Result<Rat, Error> {
    let r: Rat = s
        .parse()
        .map_err(|_| Error::schema(ptr, format!("expected a rational \"p/q\", got {s:?}")))?;
    Ok(r)
}

fn err(ptr: &str, msg: impl Into<String>) -> Error {
    Error::schema(ptr, msg.into())
}

fn as_obj<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>, Error> {
    v.as_object().ok_or_else(|| err(ptr, "expected an object"))
}

fn get<'a>(m: &'a Map<String, Value>, ptr: &str, key: &str) -> Result<&'a Value, Error> {
    m.get(key).ok_or_else(|| err(ptr, format!("missing field {key:?}")))
}

fn as_str<'a>(v: &'a Value, ptr: &str) -> Result<&'a str, Error> {
    v.as_str().ok_or_else(|| err(ptr, "expected a string"))
}

fn as_usize(v: &Value, ptr: &str) -> Result<usize, Error> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| err(ptr, "expected a nonnegative integer"))
}

fn reject_extra(m: &Map<String, Value>, ptr: &str, allowed: &[&str]) -> Result<(), Error> {
    for key in m.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(err(&format!("{ptr}/{key}"), "unknown field"));
        }
    }
    Ok(())
}

fn parse_modes(v: &Value, ptr: &str) -> Result<TrigScalar, Error> {
    let arr = v.as_array().ok_or_else(|| err(ptr, "expected an array of modes"))?;
    let mut out = TrigScalar::zero();
    let mut seen = std::collections::BTreeSet::new();
    for (i, mode) in arr.iter().enumerate() {
        let mptr = format!("{ptr}/{i}");
        let m = as_obj(mode, &mptr)?;
        reject_extra(m, &mptr, &["k", "basis", "coeff"])?;
        let kv = get(m, &mptr, "k")?
            .as_array()
            .ok_or_else(|| err(&format!("{mptr}/k"), "expected an array of 3 integers"))?;
        if kv.len() != 3 {
            return Err(err(&format!("{mptr}/k"), "expected exactly 3 frequencies"));
        }
        let mut k = [0i32; 3];
        for (j, kj) in kv.iter().enumerate() {
            k[j] = kj
                .as_i64()
                .and_then(|n| i32::try_from(n).ok())
                .ok_or_else(|| err(&format!("{mptr}/k/{j}"), "expected an integer frequency"))?;
        }
        let basis = as_str(get(m, &mptr, "basis")?, &format!("{mptr}/basis"))?;
        let parity = match basis {
            "cos" => Parity::Cos,
            "sin" => Parity::Sin,
            other => {
                return Err(err(
                    &format!("{mptr}/basis"),
                    format!("expected \"cos\" or \"sin\", got {other:?}"),
                ))
            }
        };
        // canonical representatives only: the zero frequency is a cosine,
        // and the first nonzero frequency entry is positive
        if k == [0, 0, 0] && parity == Parity::Sin {
            return Err(err(&mptr, "sin with zero frequency is not canonical"));
        }
        if let Some(first) = k.iter().find(|x| **x != 0) {
            if *first < 0 {
                return Err(err(
                    &format!("{mptr}/k"),
                    "not canonical: first nonzero frequency entry must be positive",
                ));
            }
        }
        if !seen.insert((k, parity)) {
            return Err(err(&mptr, "duplicate mode"));
        }
        let coeff = parse_rat_str(
            as_str(get(m, &mptr, "coeff")?, &format!("{mptr}/coeff"))?,
            &format!("{mptr}/coeff"),
        )?;
        if Zero::is_zero(&coeff) {
            return Err(err(&format!("{mptr}/coeff"), "coefficient must be nonzero"));
        }
        out.push(k, parity, coeff);
    }
    Ok(out)
}

fn modes_value(s: &TrigScalar) -> Value {
    let arr: Vec<Value> = s
        .terms()
        .map(|(mode, coeff)| {
            json!({
                "k": mode.k,
                "basis": match mode.parity { Parity::Cos => "cos", Parity::Sin => "sin" },
                "coeff": rat_string(coeff),
            })
        })
        .collect();
    Value::Array(arr)
}

const DEGREE_SLOTS: [(&str, &[usize]); 4] =
    [("0", &[0]), ("1", &[1, 2, 3]), ("2", &[4, 5, 6]), ("3", &[7])];

fn parse_form_payload(v: &Value, ptr: &str) -> Result<FormField3, Error> {
    let m = as_obj(v, ptr)?;
    reject_extra(m, ptr, &["components"])?;
    let comps = as_obj(get(m, ptr, "components")?, &format!("{ptr}/components"))?;
    let cptr = format!("{ptr}/components");
    let mut out = FormField3::zero();
    for (deg, val) in comps {
        let dptr = format!("{cptr}/{deg}");
        let slots = DEGREE_SLOTS
            .iter()
            .find(|(d, _)| d == deg)
            .map(|(_, s)| *s)
            .ok_or_else(|| err(&dptr, "expected a degree key \"0\".. \"3\""))?;
        let mono = as_obj(val, &dptr)?;
        for (name, modes) in mono {
            let idx = slots
                .iter()
                .copied()
                .find(|i| MONOMIAL_NAMES[*i] == name)
                .ok_or_else(|| {
                    err(&format!("{dptr}/{name}"), format!("unknown degree-{deg} monomial"))
                })?;
            out.c[idx] = parse_modes(modes, &format!("{dptr}/{name}"))?;
        }
    }
    Ok(out)
}

pub fn form_to_value(phi: &FormField3) -> Value {
    let mut comps = Map::new();
    for (deg, slots) in DEGREE_SLOTS {
        let mut mono = Map::new();
        for &i in slots {
            if !phi.c[i].is_zero() {
                mono.insert(MONOMIAL_NAMES[i].to_string(), modes_value(&phi.c[i]));
            }
        }
        if !mono.is_empty() {
            comps.insert(deg.to_string(), Value::Object(mono));
        }
    }
    json!({ "components": comps })
}

fn parse_named_triple(
    v: &Value,
    ptr: &str,
    names: [&str; 3],
) -> Result<[TrigScalar; 3], Error> {
    let m = as_obj(v, ptr)?;
    reject_extra(m, ptr, &names)?;
    let mut out: [TrigScalar; 3] = std::array::from_fn(|_| TrigScalar::zero());
    for (i, name) in names.iter().enumerate() {
        if let Some(val) = m.get(*name) {
            out[i] = parse_modes(val, &format!("{ptr}/{name}"))?;
        }
    }
    Ok(out)
}

fn triple_value(xs: &[TrigScalar; 3], names: [&str; 3]) -> Value {
    let mut m = Map::new();
    for (i, name) in names.iter().enumerate() {
        if !xs[i].is_zero() {
            m.insert(name.to_string(), modes_value(&xs[i]));
        }
    }
    Value::Object(m)
}

const VEC_NAMES: [&str; 3] = ["e1", "e2", "e3"];
const COVEC_NAMES: [&str; 3] = ["d1", "d2", "d3"];
const TWO_NAMES: [&str; 3] = ["d12", "d13", "d23"];

fn parse_genvec_payload(v: &Value, ptr: &str) -> Result<GenVectorField, Error> {
    let m = as_obj(v, ptr)?;
    reject_extra(m, ptr, &["x", "xi", "lam"])?;
    let mut u = GenVectorField::zero();
    if let Some(x) = m.get("x") {
        u.x = parse_named_triple(x, &format!("{ptr}/x"), VEC_NAMES)?;
    }
    if let Some(xi) = m.get("xi") {
        u.xi = parse_named_triple(xi, &format!("{ptr}/xi"), COVEC_NAMES)?;
    }
    if let Some(lam) = m.get("lam") {
        u.lam = parse_modes(lam, &format!("{ptr}/lam"))?;
    }
    Ok(u)
}

pub fn genvec_to_value(u: &GenVectorField) -> Value {
    let mut m = Map::new();
    if u.x.iter().any(|s| !s.is_zero()) {
        m.insert("x".into(), triple_value(&u.x, VEC_NAMES));
    }
    if u.xi.iter().any(|s| !s.is_zero()) {
        m.insert("xi".into(), triple_value(&u.xi, COVEC_NAMES));
    }
    if !u.lam.is_zero() {
        m.insert("lam".into(), modes_value(&u.lam));
    }
    Value::Object(m)
}

fn parse_ba_payload(v: &Value, ptr: &str) -> Result<BaField, Error> {
    let m = as_obj(v, ptr)?;
    reject_extra(m, ptr, &["b", "a"])?;
    let mut b: [TrigScalar; 3] = std::array::from_fn(|_| TrigScalar::zero());
    let mut a: [TrigScalar; 3] = std::array::from_fn(|_| TrigScalar::zero());
    if let Some(bv) = m.get("b") {
        b = parse_named_triple(bv, &format!("{ptr}/b"), TWO_NAMES)?;
    }
    if let Some(av) = m.get("a") {
        a = parse_named_triple(av, &format!("{ptr}/a"), COVEC_NAMES)?;
    }
    Ok(BaField::new(b, a))
}

pub fn ba_to_value(g: &BaField) -> Value {
    let mut m = Map::new();
    if g.b.iter().any(|s| !s.is_zero()) {
        m.insert("b".into(), triple_value(&g.b, TWO_NAMES));
    }
    if g.a.iter().any(|s| !s.is_zero()) {
        m.insert("a".into(), triple_value(&g.a, COVEC_NAMES));
    }
    Value::Object(m)
}

fn parse_rat_field(m: &Map<String, Value>, ptr: &str, key: &str) -> Result<Rat, Error> {
    let p = format!("{ptr}/{key}");
    parse_rat_str(as_str(get(m, ptr, key)?, &p)?, &p)
}

fn parse_rat_triple(v: &Value, ptr: &str) -> Result<[Rat; 3], Error> {
    let arr = v.as_array().ok_or_else(|| err(ptr, "expected an array of 3 rationals"))?;
    if arr.len() != 3 {
        return Err(err(ptr, "expected exactly 3 rationals"));
    }
    let mut out: [Rat; 3] = std::array::from_fn(|_| Rat::zero());
    for (i, x) in arr.iter().enumerate() {
        let p = format!("{ptr}/{i}");
        out[i] = parse_rat_str(as_str(x, &p)?, &p)?;
    }
    Ok(out)
}

fn parse_cohomology_payload(v: &Value, ptr: &str) -> Result<CohomologyVector, Error> {
    let m = as_obj(v, ptr)?;
    reject_extra(m, ptr, &["h0", "h1", "h2", "h3"])?;
    Ok(CohomologyVector {
        h0: parse_rat_field(m, ptr, "h0")?,
        h1: parse_rat_triple(get(m, ptr, "h1")?, &format!("{ptr}/h1"))?,
        h2: parse_rat_triple(get(m, ptr, "h2")?, &format!("{ptr}/h2"))?,
        h3: parse_rat_field(m, ptr, "h3")?,
    })
}

pub fn cohomology_to_value(h: &CohomologyVector) -> Value {
    json!({
        "h0": rat_string(&h.h0),
        "h1": h.h1.iter().map(rat_string).collect::<Vec<_>>(),
        "h2": h.h2.iter().map(rat_string).collect::<Vec<_>>(),
        "h3": rat_string(&h.h3),
    })
}

fn parse_g22_payload(v: &Value, ptr: &str) -> Result<G22Doc, Error> {
    let m = as_obj(v, ptr)?;
    reject_extra(m, ptr, &["rho", "grid", "margin"])?;
    let rho = parse_form_payload(get(m, ptr, "rho")?, &format!("{ptr}/rho"))?;
    let grid = as_usize(get(m, ptr, "grid")?, &format!("{ptr}/grid"))?;
    if grid == 0 {
        return Err(err(&format!("{ptr}/grid"), "grid resolution must be positive"));
    }
    let margin = parse_rat_field(m, ptr, "margin")?;
    if !margin.is_positive() {
        return Err(err(&format!("{ptr}/margin"), "margin must be positive"));
    }
    Ok(G22Doc { rho, grid, margin })
}

pub fn g22_to_value(doc: &G22Doc) -> Value {
    json!({
        "rho": form_to_value(&doc.rho),
        "grid": doc.grid,
        "margin": rat_string(&doc.margin),
    })
}

fn parse_moser_payload(v: &Value, ptr: &str) -> Result<MoserDoc, Error> {
    let m = as_obj(v, ptr)?;
    reject_extra(m, ptr, &["base", "phi", "grid", "steps", "band", "margin"])?;
    let base = parse_g22_payload(get(m, ptr, "base")?, &format!("{ptr}/base"))?;
    let phi = parse_form_payload(get(m, ptr, "phi")?, &format!("{ptr}/phi"))?;
    let grid = as_usize(get(m, ptr, "grid")?, &format!("{ptr}/grid"))?;
    let steps = as_usize(get(m, ptr, "steps")?, &format!("{ptr}/steps"))?;
    if grid == 0 || steps == 0 {
        return Err(err(ptr, "grid and steps must be positive"));
    }
    let band = match m.get("band") {
        Some(b) => Some(
            as_usize(b, &format!("{ptr}/band"))?
                .try_into()
                .map_err(|_| err(&format!("{ptr}/band"), "band out of range"))?,
        ),
        None => None,
    };
    let margin = match m.get("margin") {
        Some(x) => {
            let p = format!("{ptr}/margin");
            let r = parse_rat_str(as_str(x, &p)?, &p)?;
            if !r.is_positive() {
                return Err(err(&p, "margin must be positive"));
            }
            Some(r)
        }
        None => None,
    };
    Ok(MoserDoc { base, phi, grid, steps, band, margin })
}

pub fn moser_to_value(doc: &MoserDoc) -> Value {
    let mut m = Map::new();
    m.insert("base".into(), g22_to_value(&doc.base));
    m.insert("phi".into(), form_to_value(&doc.phi));
    m.insert("grid".into(), json!(doc.grid));
    m.insert("steps".into(), json!(doc.steps));
    if let Some(b) = doc.band {
        m.insert("band".into(), json!(b));
    }
    if let Some(r) = &doc.margin {
        m.insert("margin".into(), json!(rat_string(r)));
    }
    Value::Object(m)
}

pub fn parse_document(text: &str) -> Result<Payload, Error> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| err("", format!("invalid JSON: {e}")))?;
    let m = as_obj(&v, "")?;
    reject_extra(m, "", &["schema_version", "kind", "torus_period", "payload"])?;
    let version = as_str(get(m, "", "schema_version")?, "/schema_version")?;
    if version != SCHEMA_VERSION {
        return Err(err("/schema_version", format!("unsupported version {version:?}")));
    }
    let period = as_str(get(m, "", "torus_period")?, "/torus_period")?;
    if period != TORUS_PERIOD {
        return Err(err("/torus_period", format!("expected \"2pi\", got {period:?}")));
    }
    let kind = as_str(get(m, "", "kind")?, "/kind")?;
    let payload = get(m, "", "payload")?;
    match kind {
        "form_field" => Ok(Payload::FormField(parse_form_payload(payload, "/payload")?)),
        "gen_vector_field" => {
            Ok(Payload::GenVectorField(parse_genvec_payload(payload, "/payload")?))
        }
        "ba_field" => Ok(Payload::BaField(parse_ba_payload(payload, "/payload")?)),
        "g22_structure" => Ok(Payload::G22(parse_g22_payload(payload, "/payload")?)),
        "cohomology_vector" => {
            Ok(Payload::Cohomology(parse_cohomology_payload(payload, "/payload")?))
        }
        "moser_problem" => Ok(Payload::Moser(parse_moser_payload(payload, "/payload")?)),
        other => Err(err("/kind", format!("unknown document kind {other:?}"))),
    }
}

pub fn document_value(p: &Payload) -> Value {
    let payload = match p {
        Payload::FormField(f) => form_to_value(f),
        Payload::GenVectorField(u) => genvec_to_value(u),
        Payload::BaField(g) => ba_to_value(g),
        Payload::G22(d) => g22_to_value(d),
        Payload::Cohomology(h) => cohomology_to_value(h),
        Payload::Moser(d) => moser_to_value(d),
    };
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": p.kind(),
        "torus_period": TORUS_PERIOD,
        "payload": payload,
    })
}

pub fn serialize_document(p: &Payload) -> String {
    let mut s = serde_json::to_string_pretty(&document_value(p)).expect("serialization");
    s.push('\n');
    s
}

//! Scenario files and JSON-lines traces.
//!
//! Scenarios are JSON objects tagged by `tau`. Schema errors carry the JSON
//! pointer of the offending value. Traces list one event per node, cleaning
//! step, candidate point, warning and check, in depth-first order, followed
//! by a manifest line.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::blowup::ChartPoint;
use crate::cleaning::CleanStep;
use crate::driver::{EdgeResult, Limits, NodeKind, Resolution, TraceNode};
use crate::field::{Field, FieldError};
use crate::poly::BiPoly;
use crate::situation::{Component, Divisor, Situation, Tau0State, Tau2State, Violation};
use crate::tau0::{self, Tau0Error};
use crate::tau2::{self, Tau2Error};

/// Environment variable that overrides the scenario seed.
pub const SEED_ENV: &str = "MONRES_SEED";

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed JSON: {0}")]
    Parse(String),
    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("three-element scenarios cannot reach the monomial case and are rejected")]
    Tau3Rejected,
    #[error("invalid state: {0}")]
    Invalid(#[from] Violation),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid divisor-only state: {0}")]
    Tau0(#[from] Tau0Error),
    #[error("invalid two-element state: {0}")]
    Tau2(#[from] Tau2Error),
}

/// The state carried by a scenario, by `tau`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum State {
    Tau0(Tau0State),
    Tau1(Situation),
    Tau2(Tau2State),
}

impl State {
    pub fn tau(&self) -> u8 {
        match self {
            State::Tau0(_) => 0,
            State::Tau1(_) => 1,
            State::Tau2(_) => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub state: State,
    pub seed: Option<u64>,
    pub limits: Option<Limits>,
}

impl Scenario {
    /// The seed in effect: the environment override, else the file's, else 0.
    pub fn effective_seed(&self) -> u64 {
        std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).or(self.seed).unwrap_or(0)
    }
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn schema(pointer: &str, message: impl Into<String>) -> LoadError {
    LoadError::Schema { pointer: if pointer.is_empty() { "/".into() } else { pointer.into() }, message: message.into() }
}

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>, LoadError> {
    v.as_object().ok_or_else(|| schema(ptr, "expected an object"))
}

fn field_of<'a>(obj: &'a Map<String, Value>, key: &str, ptr: &str) -> Result<&'a Value, LoadError> {
    obj.get(key).ok_or_else(|| schema(&format!("{ptr}/{}", escape(key)), "missing required field"))
}

fn nonneg(v: &Value, ptr: &str) -> Result<u32, LoadError> {
    match v.as_i64() {
        Some(n) if n < 0 => Err(schema(ptr, format!("expected a nonnegative integer, got {n}"))),
        Some(n) => u32::try_from(n).map_err(|_| schema(ptr, "integer too large")),
        None => Err(schema(ptr, "expected an integer")),
    }
}

fn req_u32(obj: &Map<String, Value>, key: &str, ptr: &str) -> Result<u32, LoadError> {
    nonneg(field_of(obj, key, ptr)?, &format!("{ptr}/{}", escape(key)))
}

fn opt_u32(obj: &Map<String, Value>, key: &str, ptr: &str) -> Result<Option<u32>, LoadError> {
    obj.get(key).map(|v| nonneg(v, &format!("{ptr}/{}", escape(key)))).transpose()
}

fn parse_field(v: &Value, ptr: &str) -> Result<Field, LoadError> {
    let obj = object(v, ptr)?;
    let p = req_u32(obj, "p", ptr)?;
    let m = opt_u32(obj, "m", ptr)?.unwrap_or(1);
    let modulus = match obj.get("modulus") {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => {
            let mp = format!("{ptr}/modulus");
            Some(items.iter().enumerate().map(|(k, c)| nonneg(c, &format!("{mp}/{k}"))).collect::<Result<Vec<_>, _>>()?)
        }
        Some(_) => return Err(schema(&format!("{ptr}/modulus"), "expected an array of integers")),
    };
    Ok(Field::new(p, m, modulus)?)
}

/// Largest Weierstrass degree `p^e` a scenario may ask for.
pub const MAX_DEGREE: u32 = 256;

/// `p^e`, bounded by [`MAX_DEGREE`].
fn degree(field: &Field, e: u32, ptr: &str) -> Result<usize, LoadError> {
    match field.p().checked_pow(e) {
        Some(q) if q <= MAX_DEGREE => Ok(q as usize),
        _ => Err(schema(ptr, format!("p^e exceeds {MAX_DEGREE}"))),
    }
}

/// Terms `[[xexp, yexp, coeffvec], ...]`.
fn parse_poly(field: &Field, v: &Value, ptr: &str) -> Result<BiPoly, LoadError> {
    let rows = v.as_array().ok_or_else(|| schema(ptr, "expected an array of terms"))?;
    let mut terms = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let rp = format!("{ptr}/{k}");
        let cells = row.as_array().filter(|c| c.len() == 3).ok_or_else(|| schema(&rp, "expected [xexp, yexp, coeffvec]"))?;
        let ex = [nonneg(&cells[0], &format!("{rp}/0"))?, nonneg(&cells[1], &format!("{rp}/1"))?];
        let cp = format!("{rp}/2");
        let digits = cells[2].as_array().ok_or_else(|| schema(&cp, "expected a coefficient vector"))?;
        let digits: Vec<u32> = digits.iter().enumerate().map(|(j, d)| nonneg(d, &format!("{cp}/{j}"))).collect::<Result<_, _>>()?;
        let c = field
            .from_coeffs(&digits)
            .map_err(|_| schema(&cp, format!("expected {} digits below {}", field.m(), field.p())))?;
        terms.push((ex, c));
    }
    Ok(BiPoly::from_terms(field, terms))
}

/// Coefficient table `{"i": terms}` for `i` in `1..=q`; absent keys are zero.
fn parse_coeffs(field: &Field, q: usize, v: Option<&Value>, ptr: &str) -> Result<Vec<BiPoly>, LoadError> {
    let mut coeffs = vec![BiPoly::zero(field); q];
    let Some(v) = v else { return Ok(coeffs) };
    for (key, terms) in object(v, ptr)? {
        let kp = format!("{ptr}/{}", escape(key));
        let i: usize = key.parse().map_err(|_| schema(&kp, "coefficient keys are indices 1..p^e"))?;
        if i == 0 || i > q {
            return Err(schema(&kp, format!("index {i} outside 1..{q}")));
        }
        coeffs[i - 1] = parse_poly(field, terms, &kp)?;
    }
    Ok(coeffs)
}

fn parse_limits(v: &Value, ptr: &str) -> Result<Limits, LoadError> {
    let obj = object(v, ptr)?;
    let d = Limits::default();
    Ok(Limits {
        max_depth: opt_u32(obj, "max_depth", ptr)?.unwrap_or(d.max_depth),
        extend_field_cap: opt_u32(obj, "extend_field_cap", ptr)?.unwrap_or(d.extend_field_cap),
    })
}

fn parse_tau1(obj: &Map<String, Value>) -> Result<Situation, LoadError> {
    let field = parse_field(field_of(obj, "field", "")?, "/field")?;
    let e = req_u32(obj, "e", "")?;
    let q = degree(&field, e, "/e")?;
    let coeffs = parse_coeffs(&field, q, obj.get("coefficients"), "/coefficients")?;
    let mono = object(field_of(obj, "monomial", "")?, "/monomial")?;
    let alpha = req_u32(mono, "alpha", "/monomial")?;
    let beta = req_u32(mono, "beta", "/monomial")?;
    let level = req_u32(mono, "level", "/monomial")?;
    let mut divisors = [None; 2];
    if let Some(v) = obj.get("divisors") {
        let d = object(v, "/divisors")?;
        for (k, name) in ["x", "y"].into_iter().enumerate() {
            if let Some(entry) = d.get(name) {
                let ep = format!("/divisors/{name}");
                divisors[k] = Some(Divisor { age: req_u32(object(entry, &ep)?, "age", &ep)? });
            }
        }
    }
    let mut s = Situation::new(&field, e, coeffs, (alpha, beta, level), divisors);
    if let Some(n) = opt_u32(obj, "step_count", "")? {
        if n < s.step_count {
            return Err(schema("/step_count", format!("step count {n} is below the youngest divisor age {}", s.step_count)));
        }
        s.step_count = n;
    }
    s.validate()?;
    Ok(s)
}

fn parse_tau0(obj: &Map<String, Value>) -> Result<Tau0State, LoadError> {
    let mono = object(field_of(obj, "monomial", "")?, "/monomial")?;
    let level = req_u32(mono, "level", "/monomial")?;
    let items = field_of(obj, "components", "")?.as_array().ok_or_else(|| schema("/components", "expected an array"))?;
    let mut components = Vec::with_capacity(items.len());
    for (k, item) in items.iter().enumerate() {
        let ptr = format!("/components/{k}");
        let c = object(item, &ptr)?;
        let through_point = match c.get("through_point") {
            None => true,
            Some(v) => v.as_bool().ok_or_else(|| schema(&format!("{ptr}/through_point"), "expected a boolean"))?,
        };
        components.push(Component { id: req_u32(c, "id", &ptr)?, multiplicity: req_u32(c, "multiplicity", &ptr)?, through_point });
    }
    let st = Tau0State { level, components };
    tau0::validate(&st)?;
    Ok(st)
}

fn parse_tau2(obj: &Map<String, Value>) -> Result<Tau2State, LoadError> {
    let field = parse_field(field_of(obj, "field", "")?, "/field")?;
    let e1 = req_u32(obj, "e1", "")?;
    let e2 = req_u32(obj, "e2", "")?;
    let h1 = parse_coeffs(&field, degree(&field, e1, "/e1")?, obj.get("h1"), "/h1")?;
    let h2 = parse_coeffs(&field, degree(&field, e2, "/e2")?, obj.get("h2"), "/h2")?;
    let mono = object(field_of(obj, "monomial", "")?, "/monomial")?;
    let alpha = req_u32(mono, "alpha", "/monomial")?;
    let level = req_u32(mono, "level", "/monomial")?;
    let step_count = opt_u32(obj, "step_count", "")?.unwrap_or(0);
    let st = Tau2State { field, e1, e2, h1, h2, alpha, level, step_count };
    tau2::validate(&st)?;
    Ok(st)
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, LoadError> {
    let v: Value = serde_json::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))?;
    let obj = object(&v, "")?;
    let tau = req_u32(obj, "tau", "")?;
    let state = match tau {
        0 => State::Tau0(parse_tau0(obj)?),
        1 => State::Tau1(parse_tau1(obj)?),
        2 => State::Tau2(parse_tau2(obj)?),
        3 => return Err(LoadError::Tau3Rejected),
        t => return Err(schema("/tau", format!("tau must be 0, 1, 2 or 3, got {t}"))),
    };
    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| schema("/seed", "expected a nonnegative integer"))?),
    };
    let limits = obj.get("limits").map(|v| parse_limits(v, "/limits")).transpose()?;
    Ok(Scenario { state, seed, limits })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_scenario(&text)
}

fn field_json(f: &Field) -> Value {
    let spec = f.spec();
    json!({"p": spec.p, "m": spec.m, "modulus": spec.modulus})
}

fn coeffs_json(coeffs: &[BiPoly]) -> Value {
    let mut m = Map::new();
    for (k, a) in coeffs.iter().enumerate() {
        if !a.is_zero() {
            m.insert((k + 1).to_string(), a.to_json());
        }
    }
    Value::Object(m)
}

/// A state in scenario layout.
pub fn situation_json(s: &Situation) -> Value {
    let mut divisors = Map::new();
    for axis in crate::situation::Axis::BOTH {
        if let Some(d) = s.divisor(axis) {
            divisors.insert(axis.name().into(), json!({"age": d.age}));
        }
    }
    json!({
        "tau": 1,
        "field": field_json(&s.field),
        "e": s.e,
        "coefficients": coeffs_json(&s.coeffs),
        "monomial": {"alpha": s.alpha, "beta": s.beta, "level": s.level},
        "divisors": divisors,
        "step_count": s.step_count,
    })
}

pub fn state_json(state: &State) -> Value {
    match state {
        State::Tau1(s) => situation_json(s),
        State::Tau0(st) => json!({
            "tau": 0,
            "monomial": {"level": st.level},
            "components": st.components.iter().map(|c| json!({
                "id": c.id, "multiplicity": c.multiplicity, "through_point": c.through_point,
            })).collect::<Vec<_>>(),
        }),
        State::Tau2(st) => json!({
            "tau": 2,
            "field": field_json(&st.field),
            "e1": st.e1,
            "e2": st.e2,
            "h1": coeffs_json(&st.h1),
            "h2": coeffs_json(&st.h2),
            "monomial": {"alpha": st.alpha, "level": st.level},
            "step_count": st.step_count,
        }),
    }
}

/// Canonical scenario document: sorted terms, zero terms and zero
/// coefficients dropped.
pub fn scenario_json(sc: &Scenario) -> Value {
    let mut v = state_json(&sc.state);
    let obj = v.as_object_mut().expect("state layout is an object");
    if let Some(seed) = sc.seed {
        obj.insert("seed".into(), seed.into());
    }
    if let Some(l) = sc.limits {
        obj.insert("limits".into(), json!({"max_depth": l.max_depth, "extend_field_cap": l.extend_field_cap}));
    }
    v
}

pub fn chart_point_json(field: &Field, at: ChartPoint) -> (Value, Value) {
    (Value::from(at.chart.name()), Value::from(field.to_coeffs(at.c)))
}

pub fn clean_step_json(node: usize, s: &CleanStep) -> Value {
    json!({"event": "clean_step", "node": node, "at": s.at.name(), "w": s.w.to_json()})
}

/// Engine version recorded in trace manifests.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes the trace of a resolution run: events in depth-first order, then
/// the manifest.
pub fn emit_trace(res: &Resolution, seed: u64, sink: &mut impl Write) -> std::io::Result<()> {
    for step in &res.root_clean {
        writeln!(sink, "{}", clean_step_json(res.root.id, step))?;
    }
    emit_node(&res.root, sink)?;
    let sum = res.summary();
    let manifest = json!({
        "event": "manifest",
        "engine": "monres",
        "engine_version": ENGINE_VERSION,
        "seed": seed,
        "nodes": sum.nodes,
        "leaves": sum.leaves,
        "max_depth": sum.max_depth,
        "field_extensions": sum.field_extensions,
        "claim_checks": sum.claim_checks,
        "breaches": res.breaches.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
        "depth_capped": res.depth_capped(),
    });
    writeln!(sink, "{manifest}")
}

fn emit_node(n: &TraceNode, sink: &mut impl Write) -> std::io::Result<()> {
    let kind = match &n.kind {
        NodeKind::NotInSupport => "not_in_support",
        NodeKind::DepthCap => "depth_cap",
        NodeKind::Expanded { .. } => "expanded",
    };
    let mut ev = json!({
        "event": "node",
        "id": n.id,
        "depth": n.depth,
        "parent": n.parent,
        "kind": kind,
        "situation": situation_json(&n.situation),
        "invariants": n.profile.as_ref().map(|p| p.to_json()),
    });
    let NodeKind::Expanded { shape, center, extended, warnings, claims, edges } = &n.kind else {
        return writeln!(sink, "{ev}");
    };
    let obj = ev.as_object_mut().expect("node event is an object");
    obj.insert("shape".into(), shape.name().into());
    obj.insert("center".into(), center.name().into());
    obj.insert("field_extension".into(), json!(extended));
    writeln!(sink, "{ev}")?;
    for w in warnings {
        let mut wj = w.to_json();
        wj.as_object_mut().expect("warning is an object").extend([("event".into(), json!("warning")), ("node".into(), json!(n.id))]);
        writeln!(sink, "{wj}")?;
    }
    let edge_field = match extended {
        Some(d) => n.situation.field.extension(*d).expect("extension used during the run"),
        None => n.situation.field.clone(),
    };
    for c in claims {
        let at = c.at.map(|a| {
            let (chart, c) = chart_point_json(&edge_field, a);
            json!({"chart": chart, "c": c})
        });
        writeln!(sink, "{}", json!({"event": "check", "node": n.id, "claim": c.claim.name(), "at": at, "holds": c.holds, "detail": c.detail}))?;
    }
    for e in edges {
        let (chart, c) = chart_point_json(&edge_field, e.at);
        let mut ev = json!({"event": "blowup", "node": n.id, "center": center.name(), "chart": chart, "c": c, "result": e.result.name()});
        let obj = ev.as_object_mut().expect("blowup event is an object");
        match &e.result {
            EdgeResult::NotInSupport => {}
            EdgeResult::SigmaDrop(ep) => {
                obj.insert("e_prime".into(), json!(ep));
            }
            EdgeResult::Successor { normalizing_shift, decrease, child, .. } => {
                obj.insert("child".into(), json!(child.id));
                obj.insert("normalizing_shift".into(), normalizing_shift.to_json());
                obj.insert("decrease".into(), json!({"ordering": format!("{:?}", decrease.0), "index": decrease.1}));
            }
        }
        writeln!(sink, "{ev}")?;
        if let EdgeResult::Successor { clean_steps, child, .. } = &e.result {
            for s in clean_steps {
                writeln!(sink, "{}", clean_step_json(child.id, s))?;
            }
            emit_node(child, sink)?;
        }
    }
    Ok(())
}

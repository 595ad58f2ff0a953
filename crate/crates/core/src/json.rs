//! JSON formats for elements, certificates, witnesses and cones. Rationals
//! are written as `"p/q"` strings so files round-trip bit-exactly.

use std::sync::Arc;

use num_complex::Complex;
use serde_json::{json, Map, Value};

use crate::cones::{ConeV, LexFunctional, QVector};
use crate::error::{Error, Result};
use crate::groupalg::{AlgebraElement, AlgebraSpec, Backend, FiniteGroup, Word};
use crate::repwitness::{CMat, CVec, UnitaryRepWitness};
use crate::scalar::{fmt_rational, parse_rational};
use crate::soscone::{moment_matrix, DualWitness, Mode, ResidualPolicy, SosCertificate};
use crate::{CRational, Rational};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.split(" at line ").next().unwrap_or_default().to_string();
        perr(format!("line {} column {}: {msg}", e.line(), e.column()))
    })
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| perr(format!("missing field {key:?}")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| perr(format!("{what} must be a string")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| perr(format!("{what} must be an array")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| perr(format!("{what} must be a nonnegative integer")))
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| perr(format!("{what} must be a number")))
}

pub fn rational_to_json(q: &Rational) -> Value {
    Value::String(fmt_rational(q))
}

pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap().into())),
        _ => Err(perr(format!("expected a rational string, got {v}"))),
    }
}

pub fn spec_to_json(spec: &AlgebraSpec) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("backend".into(), json!(spec.name()));
    match &spec.backend {
        Backend::Free(n) | Backend::FreeAbelian(n) => {
            m.insert("rank".into(), json!(n));
        }
        Backend::FreeStar { rank, hermitian } => {
            m.insert("rank".into(), json!(rank));
            m.insert("hermitian".into(), json!(hermitian));
        }
        Backend::Finite(g) => {
            m.insert("table".into(), json!(g.table()));
            m.insert("generators".into(), json!(g.generators()));
        }
    }
    m
}

pub fn spec_from_json(v: &Value) -> Result<Arc<AlgebraSpec>> {
    let backend = as_str(field(v, "backend")?, "backend")?;
    let rank = || as_usize(field(v, "rank")?, "rank");
    Ok(match backend {
        "free" => AlgebraSpec::free(rank()?),
        "free_abelian" => AlgebraSpec::free_abelian(rank()?),
        "free_star" => {
            let hermitian = v.get("hermitian").and_then(Value::as_bool).unwrap_or(false);
            AlgebraSpec::free_star(rank()?, hermitian)
        }
        "finite" => {
            let table = as_array(field(v, "table")?, "table")?
                .iter()
                .map(|row| {
                    as_array(row, "table row")?
                        .iter()
                        .map(|x| as_usize(x, "table entry"))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let gens = match v.get("generators") {
                Some(g) => Some(
                    as_array(g, "generators")?
                        .iter()
                        .map(|x| as_usize(x, "generator"))
                        .collect::<Result<Vec<_>>>()?,
                ),
                None => None,
            };
            AlgebraSpec::finite(FiniteGroup::new(table, None, gens)?)
        }
        other => return Err(perr(format!("unknown backend {other:?}"))),
    })
}

pub fn element_to_json(a: &AlgebraElement) -> Value {
    let mut m = spec_to_json(a.spec());
    let terms: Vec<Value> = a
        .terms()
        .iter()
        .map(|(w, c)| {
            json!({
                "word": a.spec().format_word(w),
                "re": fmt_rational(&c.re),
                "im": fmt_rational(&c.im),
            })
        })
        .collect();
    m.insert("terms".into(), Value::Array(terms));
    Value::Object(m)
}

fn terms_from_json(spec: &Arc<AlgebraSpec>, v: &Value) -> Result<AlgebraElement> {
    let mut out = AlgebraElement::zero(spec);
    for t in as_array(field(v, "terms")?, "terms")? {
        let w = spec.parse_word(as_str(field(t, "word")?, "word")?)?;
        let re = rational_from_json(field(t, "re")?)?;
        let im = match t.get("im") {
            Some(x) => rational_from_json(x)?,
            None => Rational::from_integer(0.into()),
        };
        out.add_term(w, CRational::new(re, im));
    }
    Ok(out)
}

pub fn element_from_json(v: &Value) -> Result<AlgebraElement> {
    let spec = spec_from_json(v)?;
    terms_from_json(&spec, v)
}

/// Parses an element living in `spec` (the backend fields must agree).
pub fn element_in(spec: &Arc<AlgebraSpec>, v: &Value) -> Result<AlgebraElement> {
    let a = element_from_json(v)?;
    if a.spec() != spec {
        return Err(Error::SpecMismatch);
    }
    terms_from_json(spec, v)
}

pub fn certificate_to_json(c: &SosCertificate) -> Value {
    let squares: Vec<Value> = c
        .squares
        .iter()
        .map(|(w, a)| json!({"w": fmt_rational(w), "a": element_to_json(a)}))
        .collect();
    let absorption = match &c.residual {
        ResidualPolicy::Exact => Value::Null,
        ResidualPolicy::Absorbed { by, amount } => {
            json!({"by": element_to_json(by), "amount": fmt_rational(amount)})
        }
    };
    json!({
        "target": element_to_json(&c.target),
        "squares": squares,
        "absorption": absorption,
        "mode": c.mode.as_str(),
    })
}

pub fn certificate_from_json(v: &Value) -> Result<SosCertificate> {
    let target = element_from_json(field(v, "target")?)?;
    let spec = target.spec().clone();
    let mode = Mode::parse(as_str(field(v, "mode")?, "mode")?)?;
    let mut squares = Vec::new();
    for s in as_array(field(v, "squares")?, "squares")? {
        let w = rational_from_json(field(s, "w")?)?;
        squares.push((w, element_in(&spec, field(s, "a")?)?));
    }
    let residual = match v.get("absorption") {
        None | Some(Value::Null) => ResidualPolicy::Exact,
        Some(a) => ResidualPolicy::Absorbed {
            by: element_in(&spec, field(a, "by")?)?,
            amount: rational_from_json(field(a, "amount")?)?,
        },
    };
    Ok(SosCertificate {
        target,
        squares,
        residual,
        mode,
    })
}

fn complex_to_json(z: &Complex<f64>) -> Value {
    json!([z.re, z.im])
}

fn complex_from_json(v: &Value) -> Result<Complex<f64>> {
    let a = as_array(v, "complex entry")?;
    if a.len() != 2 {
        return Err(perr("complex entries are [re, im] pairs"));
    }
    Ok(Complex::new(as_f64(&a[0], "re")?, as_f64(&a[1], "im")?))
}

fn cmat_to_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(&m[(i, j)])).collect()))
            .collect(),
    )
}

fn cmat_from_json(v: &Value) -> Result<CMat> {
    let rows = as_array(v, "matrix")?;
    let data = rows
        .iter()
        .map(|r| as_array(r, "matrix row")?.iter().map(complex_from_json).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let n = data.len();
    let m = data.first().map_or(0, Vec::len);
    if data.iter().any(|r| r.len() != m) {
        return Err(perr("ragged matrix"));
    }
    Ok(CMat::from_fn(n, m, |i, j| data[i][j]))
}

pub fn witness_to_json(w: &UnitaryRepWitness) -> Value {
    json!({
        "generators": w.generators.iter().map(cmat_to_json).collect::<Vec<_>>(),
        "state": w.state.iter().map(complex_to_json).collect::<Vec<_>>(),
        "value": w.value,
        "target": element_to_json(&w.target),
    })
}

pub fn witness_from_json(v: &Value) -> Result<UnitaryRepWitness> {
    let generators = as_array(field(v, "generators")?, "generators")?
        .iter()
        .map(cmat_from_json)
        .collect::<Result<Vec<_>>>()?;
    let state: Vec<Complex<f64>> = as_array(field(v, "state")?, "state")?
        .iter()
        .map(complex_from_json)
        .collect::<Result<_>>()?;
    Ok(UnitaryRepWitness {
        target: element_from_json(field(v, "target")?)?,
        generators,
        state: CVec::from_vec(state),
        value: as_f64(field(v, "value")?, "value")?,
    })
}

pub fn dual_witness_to_json(w: &DualWitness) -> Value {
    let spec = &w.spec;
    let n = w.moment_matrix.rows();
    let moment: Vec<Value> = (0..n)
        .map(|i| {
            Value::Array(
                (0..n)
                    .map(|j| {
                        let z = &w.moment_matrix[(i, j)];
                        json!([fmt_rational(&z.re), fmt_rational(&z.im)])
                    })
                    .collect(),
            )
        })
        .collect();
    json!({
        "algebra": Value::Object(spec_to_json(spec)),
        "mode": w.mode.as_str(),
        "basis": w.basis.iter().map(|u| spec.format_word(u)).collect::<Vec<_>>(),
        "functional": w.functional.iter().map(|(u, z)| json!({
            "word": spec.format_word(u),
            "re": fmt_rational(&z.re),
            "im": fmt_rational(&z.im),
        })).collect::<Vec<_>>(),
        "moment_matrix": moment,
        "value_at_target": fmt_rational(&w.value_at_target),
    })
}

pub fn dual_witness_from_json(v: &Value) -> Result<DualWitness> {
    let spec = spec_from_json(field(v, "algebra")?)?;
    let mode = Mode::parse(as_str(field(v, "mode")?, "mode")?)?;
    let basis = as_array(field(v, "basis")?, "basis")?
        .iter()
        .map(|w| spec.parse_word(as_str(w, "basis word")?))
        .collect::<Result<Vec<Word>>>()?;
    let mut functional = std::collections::BTreeMap::new();
    for t in as_array(field(v, "functional")?, "functional")? {
        let w = spec.parse_word(as_str(field(t, "word")?, "word")?)?;
        functional.insert(
            w,
            CRational::new(rational_from_json(field(t, "re")?)?, rational_from_json(field(t, "im")?)?),
        );
    }
    let moment = moment_matrix(&spec, mode, &basis, &functional)?;
    Ok(DualWitness {
        spec,
        mode,
        basis,
        functional,
        moment_matrix: moment,
        value_at_target: rational_from_json(field(v, "value_at_target")?)?,
    })
}

pub fn vector_to_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational_to_json).collect())
}

pub fn vector_from_json(v: &Value) -> Result<QVector> {
    as_array(v, "vector")?.iter().map(rational_from_json).collect()
}

pub fn cone_to_json(c: &ConeV) -> Value {
    json!({
        "dim": c.dim(),
        "generators": c.generators().iter().map(|g| vector_to_json(g)).collect::<Vec<_>>(),
    })
}

pub fn cone_from_json(v: &Value) -> Result<ConeV> {
    let dim = as_usize(field(v, "dim")?, "dim")?;
    let gens = as_array(field(v, "generators")?, "generators")?
        .iter()
        .map(vector_from_json)
        .collect::<Result<Vec<_>>>()?;
    ConeV::new(dim, gens)
}

pub fn lex_to_json(f: &LexFunctional) -> Value {
    json!({"stages": f.stages.iter().map(|s| vector_to_json(s)).collect::<Vec<_>>()})
}

pub fn lex_from_json(v: &Value) -> Result<LexFunctional> {
    let stages = as_array(field(v, "stages")?, "stages")?
        .iter()
        .map(vector_from_json)
        .collect::<Result<Vec<_>>>()?;
    Ok(LexFunctional::from_stages(stages))
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

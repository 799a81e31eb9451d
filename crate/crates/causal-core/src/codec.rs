//! File formats: models, context sets, and decompositions.
//!
//! Model files are JSON:
//!
//! ```json
//! {
//!   "exogenous": { "U1": ["0", "1"] },
//!   "endogenous": {
//!     "A1": { "domain": ["0", "1"], "parents": ["U1"], "table": { "0": "0", "1": "1" } },
//!     "B":  { "domain": ["0", "1"], "parents": ["A1", "A2"],
//!             "expr": "if A1=1 | A2=1 then 1 else 0" }
//!   }
//! }
//! ```
//!
//! Table keys join parent values with commas in declared parent order (the
//! empty key for parentless variables). A mechanism may instead give an
//! `expr`, compiled to a table at load time:
//!
//! ```text
//! mechexpr := 'if' cond 'then' VALUE ('elif' cond 'then' VALUE)* 'else' VALUE
//!           | IDENT     (copy that parent's value)
//!           | VALUE     (constant)
//! ```
//!
//! with `cond` in the event grammar over parent atoms. Schema violations
//! carry a JSON-pointer to the offending element.
//!
//! Context sets are arrays of `{"u": {...}, "p": "num/den"}` with optional
//! exact-rational probabilities; decompositions are arrays of
//! `{"T": [...], "S": [...]}` in order 0..k.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Map, Value as Json};

use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::event::{parse_raw, RawExpr};
use crate::explain::ContextSet;
use crate::model::{Assignment, CausalModel, ModelBuilder, VarId, VarKind};
use crate::reduction::DEFAULT_TABLE_BUDGET;

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn as_object<'a>(v: &'a Json, pointer: &str) -> Result<&'a Map<String, Json>> {
    v.as_object()
        .ok_or_else(|| schema(pointer, "expected an object"))
}

fn as_array<'a>(v: &'a Json, pointer: &str) -> Result<&'a Vec<Json>> {
    v.as_array()
        .ok_or_else(|| schema(pointer, "expected an array"))
}

/// Accepts strings and integers as value symbols; numbers are canonicalized
/// to their decimal rendering.
fn as_symbol(v: &Json, pointer: &str) -> Result<String> {
    match v {
        Json::String(s) => Ok(s.clone()),
        Json::Number(n) => Ok(n.to_string()),
        Json::Bool(b) => Ok(b.to_string()),
        _ => Err(schema(pointer, "expected a string or number value symbol")),
    }
}

/// Loads a model from its JSON representation.
pub fn model_from_json(root: &Json) -> Result<CausalModel> {
    let obj = as_object(root, "")?;
    for key in obj.keys() {
        if key != "exogenous" && key != "endogenous" {
            return Err(schema(format!("/{key}"), "unknown top-level key"));
        }
    }
    let mut builder = ModelBuilder::new();
    let empty = Json::Object(Map::new());
    let exo = obj.get("exogenous").unwrap_or(&empty);
    let exo_obj = as_object(exo, "/exogenous")?;
    for (name, domain) in exo_obj {
        let ptr = format!("/exogenous/{name}");
        let arr = as_array(domain, &ptr)?;
        let mut values = Vec::new();
        for (i, v) in arr.iter().enumerate() {
            values.push(as_symbol(v, &format!("{ptr}/{i}"))?);
        }
        builder = builder.exogenous(name, values);
    }

    // first pass: declare every endogenous variable's domain so expressions
    // and tables can reference forward parents
    let endo = obj.get("endogenous").unwrap_or(&empty);
    let endo_obj = as_object(endo, "/endogenous")?;
    let mut domains: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (name, spec) in endo_obj {
        let ptr = format!("/endogenous/{name}");
        let spec_obj = as_object(spec, &ptr)?;
        let domain = spec_obj
            .get("domain")
            .ok_or_else(|| schema(&ptr, "missing `domain`"))?;
        let arr = as_array(domain, &format!("{ptr}/domain"))?;
        let mut values = Vec::new();
        for (i, v) in arr.iter().enumerate() {
            values.push(as_symbol(v, &format!("{ptr}/domain/{i}"))?);
        }
        domains.insert(name.clone(), values);
    }
    for (name, domain) in exo_obj {
        let ptr = format!("/exogenous/{name}");
        let arr = as_array(domain, &ptr)?;
        let mut values = Vec::new();
        for (i, v) in arr.iter().enumerate() {
            values.push(as_symbol(v, &format!("{ptr}/{i}"))?);
        }
        domains.insert(name.clone(), values);
    }

    for (name, spec) in endo_obj {
        let ptr = format!("/endogenous/{name}");
        let spec_obj = as_object(spec, &ptr)?;
        for key in spec_obj.keys() {
            if !matches!(key.as_str(), "domain" | "parents" | "table" | "expr") {
                return Err(schema(format!("{ptr}/{key}"), "unknown mechanism key"));
            }
        }
        let own_domain = domains[name].clone();
        let mut parents: Vec<String> = Vec::new();
        if let Some(p) = spec_obj.get("parents") {
            let arr = as_array(p, &format!("{ptr}/parents"))?;
            for (i, v) in arr.iter().enumerate() {
                let pname = v
                    .as_str()
                    .ok_or_else(|| schema(format!("{ptr}/parents/{i}"), "expected a name"))?;
                if !domains.contains_key(pname) {
                    return Err(schema(
                        format!("{ptr}/parents/{i}"),
                        format!("unknown parent `{pname}`"),
                    ));
                }
                parents.push(pname.to_string());
            }
        }
        let parent_domains: Vec<Vec<String>> =
            parents.iter().map(|p| domains[p].clone()).collect();

        let rows: Vec<String> = match (spec_obj.get("table"), spec_obj.get("expr")) {
            (Some(_), Some(_)) => {
                return Err(schema(&ptr, "give either `table` or `expr`, not both"))
            }
            (None, None) => return Err(schema(&ptr, "missing `table` or `expr`")),
            (Some(t), None) => {
                let tptr = format!("{ptr}/table");
                let tobj = as_object(t, &tptr)?;
                let mut table: BTreeMap<String, String> = BTreeMap::new();
                for (key, out) in tobj {
                    table.insert(key.clone(), as_symbol(out, &format!("{tptr}/{key}"))?);
                }
                let mut rows = Vec::new();
                let mut expected = 0usize;
                each_combo(&parent_domains, &mut |syms| {
                    expected += 1;
                    let key = syms.join(",");
                    match table.get(&key) {
                        Some(out) => {
                            rows.push(out.clone());
                            Ok(())
                        }
                        None => Err(Error::NonTotalTable {
                            var: name.clone(),
                            combo: key,
                        }),
                    }
                })?;
                if table.len() != expected {
                    let known: Vec<String> = Vec::new();
                    let mut extra = known;
                    each_combo(&parent_domains, &mut |syms| {
                        extra.push(syms.join(","));
                        Ok(())
                    })?;
                    let bad = table
                        .keys()
                        .find(|k| !extra.contains(k))
                        .cloned()
                        .unwrap_or_default();
                    return Err(schema(
                        format!("{tptr}/{bad}"),
                        "key is not a parent-value combination",
                    ));
                }
                rows
            }
            (None, Some(e)) => {
                let eptr = format!("{ptr}/expr");
                let text = e
                    .as_str()
                    .ok_or_else(|| schema(&eptr, "expected an expression string"))?;
                compile_expr(name, text, &own_domain, &parents, &parent_domains).map_err(
                    |err| match err {
                        Error::MechanismExpr { .. } => err,
                        other => Error::MechanismExpr {
                            var: name.clone(),
                            message: other.to_string(),
                        },
                    },
                )?
            }
        };
        let parent_refs: Vec<&str> = parents.iter().map(String::as_str).collect();
        builder = builder.endogenous(name, own_domain, &parent_refs, rows);
    }
    builder.build()
}

/// Row-major enumeration of a symbol product (first slot slowest).
fn each_combo(
    domains: &[Vec<String>],
    f: &mut impl FnMut(&[&str]) -> Result<()>,
) -> Result<()> {
    let mut idx = vec![0usize; domains.len()];
    loop {
        let syms: Vec<&str> = idx
            .iter()
            .zip(domains)
            .map(|(&i, d)| d[i].as_str())
            .collect();
        f(&syms)?;
        let mut pos = domains.len();
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < domains[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Parsed mechanism expression before name resolution.
enum ExprBody {
    /// A bare token: a parent name (copy) or a constant domain value.
    Single(String),
    Branches(Vec<(RawExpr, String)>, String),
}

fn compile_expr(
    var: &str,
    text: &str,
    own_domain: &[String],
    parents: &[String],
    parent_domains: &[Vec<String>],
) -> Result<Vec<String>> {
    let err = |message: String| Error::MechanismExpr {
        var: var.to_string(),
        message,
    };
    let body = parse_expr_body(text).map_err(&err)?;
    let copy_parent: Option<usize> = match &body {
        ExprBody::Single(tok) => {
            let idx = parents.iter().position(|p| p == tok);
            if idx.is_none() && !own_domain.contains(tok) {
                return Err(err(format!(
                    "`{tok}` is neither a parent nor a domain value"
                )));
            }
            idx
        }
        ExprBody::Branches(..) => None,
    };
    let mut rows = Vec::new();
    each_combo(parent_domains, &mut |syms| {
        let out = match &body {
            ExprBody::Single(tok) => match copy_parent {
                Some(i) => syms[i].to_string(),
                None => tok.clone(),
            },
            ExprBody::Branches(branches, default) => {
                let mut chosen = default.clone();
                for (cond, value) in branches {
                    let fired = cond.eval(&|name, value| {
                        let pi = parents
                            .iter()
                            .position(|p| p == name)
                            .ok_or_else(|| err(format!("`{name}` is not a parent of `{var}`")))?;
                        if !parent_domains[pi].iter().any(|s| s == value) {
                            return Err(err(format!(
                                "`{value}` is not in the domain of parent `{name}`"
                            )));
                        }
                        Ok(syms[pi] == value)
                    })?;
                    if fired {
                        chosen = value.clone();
                        break;
                    }
                }
                chosen
            }
        };
        if !own_domain.contains(&out) {
            return Err(err(format!("output `{out}` is outside the domain")));
        }
        rows.push(out);
        Ok(())
    })?;
    Ok(rows)
}

/// Splits `if … then … (elif … then …)* else …`, or a single bare token.
fn parse_expr_body(text: &str) -> std::result::Result<ExprBody, String> {
    let words = scan_words(text);
    if words.is_empty() {
        return Err("empty expression".into());
    }
    if words[0].2 != "if" {
        if words.len() == 1 && text.trim() == words[0].2 {
            return Ok(ExprBody::Single(words[0].2.to_string()));
        }
        return Err("expected `if …` or a single parent/value token".into());
    }
    let mut branches: Vec<(RawExpr, String)> = Vec::new();
    let mut i = 0usize; // index into words, at `if`/`elif`
    loop {
        let then_pos = words[i + 1..]
            .iter()
            .position(|w| w.2 == "then")
            .map(|p| p + i + 1)
            .ok_or("missing `then`")?;
        let cond_text = &text[words[i].1..words[then_pos].0];
        let cond = parse_raw(cond_text).map_err(|e| e.to_string())?;
        let value = words
            .get(then_pos + 1)
            .ok_or("missing value after `then`")?;
        if value.2 == "else" || value.2 == "elif" || value.2 == "then" || value.2 == "if" {
            return Err(format!("`{}` cannot be a value", value.2));
        }
        branches.push((cond, value.2.to_string()));
        let next = words.get(then_pos + 2).ok_or("missing `elif` or `else`")?;
        match next.2 {
            "elif" => {
                i = then_pos + 2;
            }
            "else" => {
                let default = words.get(then_pos + 3).ok_or("missing value after `else`")?;
                if words.len() != then_pos + 4 {
                    return Err("trailing input after `else` value".into());
                }
                return Ok(ExprBody::Branches(branches, default.2.to_string()));
            }
            other => return Err(format!("expected `elif` or `else`, found `{other}`")),
        }
    }
}

/// Word tokens with byte spans, used to slice condition substrings.
fn scan_words(text: &str) -> Vec<(usize, usize, &str)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, i, &text[start..i]));
        } else {
            i += 1;
        }
    }
    out
}

/// Serializes a model; deferred mechanisms are tabulated (within the default
/// budget) so that saved files always carry explicit tables.
pub fn model_to_json(m: &CausalModel) -> Result<Json> {
    let mut exo = Map::new();
    for id in m.exogenous_ids() {
        exo.insert(
            m.name(id).to_string(),
            Json::Array(
                m.domain(id)
                    .symbols()
                    .iter()
                    .map(|s| Json::String(s.clone()))
                    .collect(),
            ),
        );
    }
    let mut endo = Map::new();
    for id in m.endogenous_ids() {
        let mech = m.mechanism(id).expect("endogenous");
        let parent_names: Vec<String> =
            mech.parents.iter().map(|p| m.name(*p).to_string()).collect();
        let parent_domains: Vec<Vec<String>> = mech
            .parents
            .iter()
            .map(|p| m.domain(*p).symbols().to_vec())
            .collect();
        let mut entries: u128 = 1;
        for d in &parent_domains {
            entries = entries.saturating_mul(d.len() as u128);
        }
        if !mech.is_table() && entries > DEFAULT_TABLE_BUDGET as u128 {
            return Err(Error::TableBudgetExceeded {
                var: m.name(id).to_string(),
                entries,
                budget: DEFAULT_TABLE_BUDGET,
            });
        }
        let mut table = Map::new();
        let sizes: Vec<usize> = parent_domains.iter().map(Vec::len).collect();
        let mut idx = vec![0usize; parent_domains.len()];
        loop {
            let key: Vec<&str> = idx
                .iter()
                .zip(&parent_domains)
                .map(|(&i, d)| d[i].as_str())
                .collect();
            let vals: Vec<crate::model::Value> =
                idx.iter().map(|&i| crate::model::Value(i as u32)).collect();
            let out = mech.apply(&vals, &sizes)?;
            table.insert(
                key.join(","),
                Json::String(m.domain(id).symbol(out).to_string()),
            );
            let mut pos = idx.len();
            let mut done = true;
            while pos > 0 {
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < parent_domains[pos].len() {
                    done = false;
                    break;
                }
                idx[pos] = 0;
            }
            if done {
                break;
            }
        }
        endo.insert(
            m.name(id).to_string(),
            json!({
                "domain": m.domain(id).symbols(),
                "parents": parent_names,
                "table": table,
            }),
        );
    }
    Ok(json!({ "exogenous": exo, "endogenous": endo }))
}

pub fn load_model(path: &Path) -> Result<CausalModel> {
    let text = std::fs::read_to_string(path)?;
    let root: Json = serde_json::from_str(&text)?;
    model_from_json(&root)
}

pub fn save_model(m: &CausalModel, path: &Path) -> Result<()> {
    let json = model_to_json(m)?;
    std::fs::write(path, serde_json::to_string_pretty(&json)? + "\n")?;
    Ok(())
}

/// Parses `"3/4"`, `"3"`, or a JSON integer into an exact rational.
pub fn rational_from_json(v: &Json, pointer: &str) -> Result<BigRational> {
    let parse_str = |s: &str| -> Result<BigRational> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = num
            .parse()
            .map_err(|_| schema(pointer, format!("bad rational `{s}`")))?;
        let d: BigInt = den
            .parse()
            .map_err(|_| schema(pointer, format!("bad rational `{s}`")))?;
        if d == BigInt::from(0) {
            return Err(schema(pointer, "zero denominator"));
        }
        Ok(BigRational::new(n, d))
    };
    match v {
        Json::String(s) => parse_str(s),
        Json::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from(BigInt::from(i)))
            } else {
                Err(schema(
                    pointer,
                    "probabilities must be exact: use \"num/den\" strings",
                ))
            }
        }
        _ => Err(schema(pointer, "expected a rational")),
    }
}

pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Loads a context set: an array of `{"u": {...}}` entries, each optionally
/// carrying `"p"`. Either every entry has a probability or none does; sets
/// without probabilities default to uniform when probabilities are needed.
pub fn context_set_from_json(m: &CausalModel, root: &Json) -> Result<ContextSet> {
    let arr = as_array(root, "")?;
    let mut contexts = Vec::new();
    let mut probs: Vec<BigRational> = Vec::new();
    let mut with_p = 0usize;
    for (i, entry) in arr.iter().enumerate() {
        let ptr = format!("/{i}");
        let obj = as_object(entry, &ptr)?;
        let u = obj
            .get("u")
            .ok_or_else(|| schema(&ptr, "missing `u`"))?;
        let u_obj = as_object(u, &format!("{ptr}/u"))?;
        let mut a = Assignment::new();
        for (name, val) in u_obj {
            let vptr = format!("{ptr}/u/{name}");
            let id = m
                .lookup(name)
                .map_err(|e| schema(&vptr, e.to_string()))?;
            if m.kind(id) != VarKind::Exogenous {
                return Err(schema(&vptr, "contexts bind exogenous variables only"));
            }
            let sym = as_symbol(val, &vptr)?;
            let value = m
                .value_named(id, &sym)
                .map_err(|e| schema(&vptr, e.to_string()))?;
            a.bind(id, value);
        }
        contexts.push(a);
        if let Some(p) = obj.get("p") {
            with_p += 1;
            probs.push(rational_from_json(p, &format!("{ptr}/p"))?);
        }
    }
    if with_p != 0 && with_p != contexts.len() {
        return Err(schema(
            "",
            "either every context carries `p` or none does",
        ));
    }
    ContextSet::new(contexts, (with_p > 0).then_some(probs))
}

pub fn load_context_set(m: &CausalModel, path: &Path) -> Result<ContextSet> {
    let text = std::fs::read_to_string(path)?;
    let root: Json = serde_json::from_str(&text)?;
    context_set_from_json(m, &root)
}

pub fn context_set_to_json(m: &CausalModel, c: &ContextSet) -> Json {
    let mut out = Vec::new();
    for (i, u) in c.contexts().iter().enumerate() {
        let mut u_obj = Map::new();
        for (var, val) in u.iter() {
            u_obj.insert(
                m.name(var).to_string(),
                Json::String(m.domain(var).symbol(val).to_string()),
            );
        }
        let mut entry = Map::new();
        entry.insert("u".into(), Json::Object(u_obj));
        if c.probabilities().is_some() {
            entry.insert(
                "p".into(),
                Json::String(rational_to_string(&c.probability(i))),
            );
        }
        out.push(Json::Object(entry));
    }
    Json::Array(out)
}

/// Loads a decomposition: `[{"T": [...], "S": [...]}, …]` in order 0..k.
pub fn decomposition_from_json(m: &CausalModel, root: &Json) -> Result<Decomposition> {
    let arr = as_array(root, "")?;
    let mut pairs = Vec::new();
    for (i, entry) in arr.iter().enumerate() {
        let ptr = format!("/{i}");
        let obj = as_object(entry, &ptr)?;
        let read_set = |key: &str| -> Result<Vec<VarId>> {
            let v = obj
                .get(key)
                .ok_or_else(|| schema(&ptr, format!("missing `{key}`")))?;
            let names = as_array(v, &format!("{ptr}/{key}"))?;
            let mut out = Vec::new();
            for (j, n) in names.iter().enumerate() {
                let nptr = format!("{ptr}/{key}/{j}");
                let name = n
                    .as_str()
                    .ok_or_else(|| schema(&nptr, "expected a variable name"))?;
                let id = m.lookup(name).map_err(|e| schema(&nptr, e.to_string()))?;
                out.push(id);
            }
            Ok(out)
        };
        let t = read_set("T")?;
        let s = read_set("S")?;
        pairs.push((t, s));
    }
    Ok(Decomposition::new(pairs))
}

pub fn load_decomposition(m: &CausalModel, path: &Path) -> Result<Decomposition> {
    let text = std::fs::read_to_string(path)?;
    let root: Json = serde_json::from_str(&text)?;
    decomposition_from_json(m, &root)
}

pub fn decomposition_to_json(m: &CausalModel, dec: &Decomposition) -> Json {
    Json::Array(
        dec.pairs
            .iter()
            .map(|(t, s)| {
                let names = |vs: &Vec<VarId>| {
                    Json::Array(
                        vs.iter()
                            .map(|&v| Json::String(m.name(v).to_string()))
                            .collect(),
                    )
                };
                json!({ "T": names(t), "S": names(s) })
            })
            .collect(),
    )
}

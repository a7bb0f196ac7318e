//! JSON formats and DOT export.
//!
//! All writers produce compact JSON with sorted keys, so that
//! serialize(parse(serialize(x))) is byte-identical to serialize(x).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::complex::{Cell, CellId, ComplexError, DirectedComplex, SemiSimplicialSet};
use crate::flow::FlowGraph;
use crate::iso;
use crate::molecule::{Certificate, Molecule, MoleculeError};
use crate::ogposet::{ElementId, OgError, OgPoset, Sign, Validation};
use crate::subdivision::SdPoset;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("expected format {expected:?}, found {found:?}")]
    WrongFormat { expected: &'static str, found: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Poset(#[from] OgError),
    #[error(transparent)]
    Molecule(#[from] MoleculeError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

fn malformed(msg: impl Into<String>) -> IoError {
    IoError::Malformed(msg.into())
}

fn check_format(v: &Value, expected: &'static str) -> Result<(), IoError> {
    match v.get("format").and_then(Value::as_str) {
        Some(f) if f == expected => Ok(()),
        other => Err(IoError::WrongFormat {
            expected,
            found: other.unwrap_or("<missing>").to_string(),
        }),
    }
}

fn index_list(v: &Value) -> Result<Vec<usize>, IoError> {
    v.as_array()
        .ok_or_else(|| malformed("expected an array of indices"))?
        .iter()
        .map(|x| x.as_u64().map(|n| n as usize).ok_or_else(|| malformed("expected an index")))
        .collect()
}

/// The name of the format a JSON document declares.
pub fn format_of(v: &Value) -> Option<&str> {
    v.get("format").and_then(Value::as_str)
}

pub fn ogposet_to_json(p: &OgPoset) -> Value {
    let faces: Vec<Value> = p
        .raw_faces()
        .into_iter()
        .enumerate()
        .map(|(d, layer)| {
            Value::Array(
                layer
                    .into_iter()
                    .map(|[minus, plus]| if d == 0 { json!({}) } else { json!({"-": minus, "+": plus}) })
                    .collect(),
            )
        })
        .collect();
    json!({"format": "ogposet/1", "faces": faces})
}

pub fn ogposet_from_json(v: &Value) -> Result<OgPoset, IoError> {
    check_format(v, "ogposet/1")?;
    let layers = v
        .get("faces")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing \"faces\" array"))?;
    let mut raw = Vec::new();
    for (d, layer) in layers.iter().enumerate() {
        let layer = layer.as_array().ok_or_else(|| malformed(format!("faces[{d}] is not an array")))?;
        let mut out = Vec::new();
        for el in layer {
            let obj = el.as_object().ok_or_else(|| malformed("element is not an object"))?;
            let get = |key: &str| obj.get(key).map(index_list).transpose().map(Option::unwrap_or_default);
            let minus = get("-")?;
            let plus = get("+")?;
            for list in [&minus, &plus] {
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(malformed("face lists must be sorted and duplicate-free"));
                }
            }
            out.push([minus, plus]);
        }
        raw.push(out);
    }
    Ok(OgPoset::new(raw, Validation::Plain)?)
}

pub fn certificate_to_json(c: &Certificate) -> Value {
    match c {
        Certificate::Point => json!(["point"]),
        Certificate::Atom(a, b) => json!(["atom", certificate_to_json(a), certificate_to_json(b)]),
        Certificate::Paste(k, a, b) => json!(["paste", k, certificate_to_json(a), certificate_to_json(b)]),
    }
}

pub fn certificate_from_json(v: &Value) -> Result<Certificate, IoError> {
    let arr = v.as_array().ok_or_else(|| malformed("certificate must be an array"))?;
    let tag = arr.first().and_then(Value::as_str).unwrap_or("");
    let sub = |i: usize| -> Result<Arc<Certificate>, IoError> {
        Ok(Arc::new(certificate_from_json(
            arr.get(i).ok_or_else(|| malformed("truncated certificate"))?,
        )?))
    };
    match (tag, arr.len()) {
        ("point", 1) => Ok(Certificate::Point),
        ("atom", 3) => Ok(Certificate::Atom(sub(1)?, sub(2)?)),
        ("paste", 4) => {
            let k = arr[1].as_u64().ok_or_else(|| malformed("paste dimension must be a natural number"))?;
            Ok(Certificate::Paste(k as usize, sub(2)?, sub(3)?))
        }
        _ => Err(malformed(format!("unknown certificate node {v}"))),
    }
}

fn shape_from_json(v: &Value) -> Result<Molecule, IoError> {
    if let Some(s) = v.as_str() {
        let (kind, n) = s.split_once(':').ok_or_else(|| malformed(format!("bad shape {s:?}")))?;
        let n: usize = n.parse().map_err(|_| malformed(format!("bad shape {s:?}")))?;
        return match kind {
            "oriental" => Ok(Molecule::oriental(n)),
            "globe" => Ok(Molecule::globe(n)),
            _ => Err(malformed(format!("bad shape {s:?}"))),
        };
    }
    Ok(certificate_from_json(v)?.replay()?)
}

/// The shape as written, and for each element of the written shape the
/// corresponding element of `m`.
fn shape_to_json(m: &Molecule) -> (Value, Vec<usize>) {
    let d = m.dim().max(0) as usize;
    for (name, std) in [("oriental", Molecule::oriental(d)), ("globe", Molecule::globe(d))] {
        if std.poset() == m.poset() {
            return (json!(format!("{name}:{d}")), (0..m.len()).collect());
        }
    }
    let cert = m.certificate();
    let replayed = cert.replay().expect("certificates of molecules replay");
    let map = if replayed.poset() == m.poset() {
        (0..m.len()).collect()
    } else {
        iso::find_iso(replayed.poset(), m.poset()).expect("replay is isomorphic").forward
    };
    (certificate_to_json(cert), map)
}

pub fn complex_to_json(x: &DirectedComplex) -> Value {
    let cells: Vec<Value> = x
        .cells()
        .iter()
        .map(|layer| {
            Value::Array(
                layer
                    .iter()
                    .map(|c| {
                        let (shape, map) = shape_to_json(&c.shape);
                        let p = c.shape.poset();
                        let attach: BTreeMap<String, String> = map
                            .iter()
                            .enumerate()
                            .map(|(y, &x)| (p.id(y).to_string(), c.attach[x].to_string()))
                            .collect();
                        json!({"shape": shape, "attach": attach})
                    })
                    .collect(),
            )
        })
        .collect();
    json!({"format": "dcomplex/1", "cells": cells})
}

pub fn complex_from_json(v: &Value) -> Result<DirectedComplex, IoError> {
    check_format(v, "dcomplex/1")?;
    let layers = v
        .get("cells")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing \"cells\" array"))?;
    let mut cells = Vec::new();
    for layer in layers {
        let layer = layer.as_array().ok_or_else(|| malformed("cells layer is not an array"))?;
        let mut out = Vec::new();
        for c in layer {
            let shape = shape_from_json(c.get("shape").ok_or_else(|| malformed("cell without shape"))?)?;
            let p = shape.poset();
            let map = c
                .get("attach")
                .and_then(Value::as_object)
                .ok_or_else(|| malformed("cell without attach map"))?;
            let mut attach: Vec<Option<CellId>> = vec![None; p.len()];
            for (k, t) in map {
                let el: ElementId = k.parse().map_err(|_| malformed(format!("bad element {k:?}")))?;
                let x = p.global(el).ok_or_else(|| malformed(format!("no element {el} in shape")))?;
                let t: CellId = t
                    .as_str()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| malformed(format!("bad cell reference {t}")))?;
                attach[x] = Some(t);
            }
            let attach = attach
                .into_iter()
                .enumerate()
                .map(|(x, t)| t.ok_or_else(|| malformed(format!("element {} is not attached", p.id(x)))))
                .collect::<Result<_, _>>()?;
            out.push(Cell { shape: Arc::new(shape), attach });
        }
        cells.push(out);
    }
    Ok(DirectedComplex::new(cells)?)
}

pub fn ssset_to_json(s: &SemiSimplicialSet) -> Value {
    let mut faces = vec![Value::Null];
    faces.extend(s.faces.iter().skip(1).map(|l| json!(l)));
    let implied = s.faces.get(1).map_or(0, |l| l.iter().flatten().map(|&v| v + 1).max().unwrap_or(0));
    let vertices = s.counts.first().copied().unwrap_or(0);
    if vertices != implied {
        json!({"format": "ssset/1", "faces": faces, "vertices": vertices})
    } else {
        json!({"format": "ssset/1", "faces": faces})
    }
}

/// Reads `ssset/1`. The vertex count is the optional "vertices" field, or
/// else one more than the largest vertex index used by an edge.
pub fn ssset_from_json(v: &Value) -> Result<SemiSimplicialSet, IoError> {
    check_format(v, "ssset/1")?;
    let layers = v
        .get("faces")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing \"faces\" array"))?;
    let mut faces: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for layer in layers.iter().skip(1) {
        let layer = layer.as_array().ok_or_else(|| malformed("faces layer is not an array"))?;
        faces.push(layer.iter().map(index_list).collect::<Result<_, _>>()?);
    }
    let implied = faces.get(1).map_or(0, |l| l.iter().flatten().map(|&v| v + 1).max().unwrap_or(0));
    let vertices = match v.get("vertices") {
        Some(n) => n.as_u64().ok_or_else(|| malformed("vertices must be a natural number"))? as usize,
        None => implied,
    };
    let mut counts = vec![vertices];
    counts.extend(faces.iter().skip(1).map(Vec::len));
    while counts.len() > 1 && counts.last() == Some(&0) {
        counts.pop();
        faces.pop();
    }
    if counts == [0] {
        counts.clear();
        faces.clear();
    }
    let s = SemiSimplicialSet { counts, faces };
    s.check()?;
    Ok(s)
}

fn dot_header(name: &str) -> String {
    format!("digraph {name} {{\n  rankdir=BT;\n")
}

/// Oriented Hasse diagram: input faces point up to their coface, cofaces
/// point down to their output faces.
pub fn hasse_dot(p: &OgPoset) -> String {
    let mut s = dot_header("hasse");
    for x in 0..p.len() {
        let _ = writeln!(s, "  \"{0}\" [label=\"{0}\"];", p.id(x));
    }
    for y in 0..p.len() {
        for &x in p.faces(y, Sign::Minus) {
            let _ = writeln!(s, "  \"{}\" -> \"{}\";", p.id(x), p.id(y));
        }
        for &x in p.faces(y, Sign::Plus) {
            let _ = writeln!(s, "  \"{}\" -> \"{}\";", p.id(y), p.id(x));
        }
    }
    s.push_str("}\n");
    s
}

pub fn flow_dot(p: &OgPoset, g: &FlowGraph) -> String {
    let mut s = format!("digraph flow_{} {{\n", g.k.max(0));
    for &v in &g.vertices {
        let _ = writeln!(s, "  \"{0}\" [label=\"{0}\"];", p.id(v));
    }
    for &(a, b) in &g.edges {
        let _ = writeln!(s, "  \"{}\" -> \"{}\";", p.id(a), p.id(b));
    }
    s.push_str("}\n");
    s
}

/// Hasse diagram of a subdivision poset, nodes labelled by their trees.
pub fn sd_dot(p: &OgPoset, sd: &SdPoset) -> String {
    let mut s = dot_header("sd");
    for (i, e) in sd.elements.iter().enumerate() {
        let label = e.tree.display(p).to_string().replace('"', "\\\"");
        let _ = writeln!(s, "  n{i} [label=\"{label}\"];");
    }
    for (a, b) in sd.order.covers() {
        let _ = writeln!(s, "  n{a} -> n{b};");
    }
    s.push_str("}\n");
    s
}

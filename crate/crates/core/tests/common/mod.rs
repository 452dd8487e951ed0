//! Test helpers shared by the integration and acceptance targets.
//!
//! The resolver works on raw JSON values only, so it checks the library
//! without going through its model types: every index in a geometry is
//! replaced by what it points to (coordinates, material, texture, UV,
//! template).

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::{json, Value};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Handcrafted documents, sorted by file name.
pub fn fixtures() -> Vec<(String, String)> {
    let mut out: Vec<_> = std::fs::read_dir(data_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".city.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

/// Shared context for resolving the geometries of one document or feature.
pub struct Context<'a> {
    pub transform: &'a Value,
    pub vertices: &'a [Value],
    pub appearance: Option<&'a Value>,
    pub templates: Option<&'a Value>,
}

fn real(v: &Value, t: &Value) -> Value {
    let (s, tr) = (&t["scale"], &t["translate"]);
    json!((0..3)
        .map(|k| v[k].as_i64().unwrap() as f64 * s[k].as_f64().unwrap() + tr[k].as_f64().unwrap())
        .collect::<Vec<_>>())
}

fn map_leaves(v: &Value, f: &dyn Fn(u64) -> Value) -> Value {
    match v {
        Value::Array(a) => Value::Array(a.iter().map(|x| map_leaves(x, f)).collect()),
        Value::Number(n) => f(n.as_u64().unwrap()),
        other => other.clone(),
    }
}

fn map_rings(v: &Value, f: &dyn Fn(&[Value]) -> Value) -> Value {
    match v {
        Value::Array(a) if a.iter().all(|x| !x.is_array()) => f(a),
        Value::Array(a) => Value::Array(a.iter().map(|x| map_rings(x, f)).collect()),
        other => other.clone(),
    }
}

impl Context<'_> {
    fn appearance_list(&self, key: &str) -> &[Value] {
        self.appearance
            .and_then(|a| a.get(key))
            .and_then(Value::as_array)
            .map_or(&[], Vec::as_slice)
    }

    pub fn resolve_geometry(&self, g: &Value) -> Value {
        let mut out = g.as_object().unwrap().clone();
        let coords = |i: u64| real(&self.vertices[i as usize], self.transform);
        out.insert("boundaries".into(), map_leaves(&g["boundaries"], &coords));
        if let Some(t) = g.get("template") {
            let templates = self.templates.expect("template without geometry-templates");
            let tg = &templates["templates"][t.as_u64().unwrap() as usize];
            let tv = &templates["vertices-templates"];
            let mut resolved = tg.clone();
            resolved["boundaries"] = map_leaves(&tg["boundaries"], &|i| tv[i as usize].clone());
            out.insert("template".into(), resolved);
        }
        if let Some(Value::Object(themes)) = g.get("material") {
            let mats = self.appearance_list("materials");
            let m = |i: u64| mats[i as usize].clone();
            let mut r = serde_json::Map::new();
            for (name, theme) in themes {
                let mut theme = theme.clone();
                if let Some(v) = theme.get("values").cloned() {
                    theme["values"] = map_leaves(&v, &m);
                }
                if let Some(v) = theme.get("value").and_then(Value::as_u64) {
                    theme["value"] = m(v);
                }
                r.insert(name.clone(), theme);
            }
            out.insert("material".into(), Value::Object(r));
        }
        if let Some(Value::Object(themes)) = g.get("texture") {
            let tex = self.appearance_list("textures");
            let uvs = self.appearance_list("vertices-texture");
            let mut r = serde_json::Map::new();
            for (name, theme) in themes {
                let ring = |ring: &[Value]| -> Value {
                    match ring.first().and_then(Value::as_u64) {
                        None => Value::Array(ring.to_vec()),
                        Some(t) => {
                            let mut v = vec![tex[t as usize].clone()];
                            v.extend(ring[1..].iter().map(|u| uvs[u.as_u64().unwrap() as usize].clone()));
                            Value::Array(v)
                        }
                    }
                };
                r.insert(name.clone(), json!({ "values": map_rings(&theme["values"], &ring) }));
            }
            out.insert("texture".into(), Value::Object(r));
        }
        Value::Object(out)
    }

    /// Resolved object with every number as a float, so that `0` and `0.0` compare equal.
    pub fn resolve_object(&self, co: &Value) -> Value {
        let mut out = co.as_object().unwrap().clone();
        if let Some(Value::Array(gs)) = co.get("geometry") {
            out.insert(
                "geometry".into(),
                Value::Array(gs.iter().map(|g| self.resolve_geometry(g)).collect()),
            );
        }
        as_floats(Value::Object(out))
    }
}

fn as_floats(v: Value) -> Value {
    match v {
        Value::Number(n) => json!(n.as_f64().unwrap()),
        Value::Array(a) => Value::Array(a.into_iter().map(as_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, as_floats(v))).collect()),
        other => other,
    }
}

/// Every city object of a document, indices resolved.
pub fn resolve_document(doc: &Value) -> BTreeMap<String, Value> {
    let cx = Context {
        transform: &doc["transform"],
        vertices: doc["vertices"].as_array().unwrap(),
        appearance: doc.get("appearance"),
        templates: doc.get("geometry-templates"),
    };
    doc["CityObjects"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(id, co)| (id.clone(), cx.resolve_object(co)))
        .collect()
}

/// Calls `f` for each resolved city object of a stream, one feature at a time.
pub fn for_each_stream_object(text: &str, mut f: impl FnMut(&str, Value)) {
    let mut lines = text.lines();
    let header: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let feat: Value = serde_json::from_str(line).unwrap();
        let cx = Context {
            transform: &header["transform"],
            vertices: feat["vertices"].as_array().unwrap(),
            appearance: feat.get("appearance"),
            templates: header.get("geometry-templates"),
        };
        for (id, co) in feat["CityObjects"].as_object().unwrap() {
            f(id, cx.resolve_object(co));
        }
    }
}

/// Flatten-and-dedup over a raw nested boundary array.
pub fn flatten_dedup(v: &Value) -> Vec<usize> {
    fn walk(v: &Value, out: &mut Vec<usize>) {
        match v {
            Value::Array(a) => a.iter().for_each(|x| walk(x, out)),
            Value::Number(n) => {
                let i = n.as_u64().unwrap() as usize;
                if !out.contains(&i) {
                    out.push(i);
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(v, &mut out);
    out
}

pub struct RoundTrip {
    pub objects: usize,
    pub features: usize,
    pub stream: String,
    pub collected: String,
}

/// Runs cat then collect on `text` and checks, against the raw input, that
/// the stream and the collected document hold the same city objects with
/// identical resolved geometry.
pub fn round_trip(text: &str) -> Result<RoundTrip, String> {
    let doc = cityseq::parse_document(text).map_err(|e| format!("parse: {e}"))?;
    let (stream, _) = cityseq::cat(&doc).map_err(|e| format!("cat: {e}"))?;
    let mut bytes = Vec::new();
    let features = stream.write_to(&mut bytes).map_err(|e| format!("cat: {e}"))?;
    drop(doc);
    let stream_text = String::from_utf8(bytes).map_err(|e| e.to_string())?;
    let read = cityseq::read_stream(std::io::Cursor::new(stream_text.as_bytes())).map_err(|e| format!("read: {e}"))?;
    let collected = cityseq::collect(read.stream).map_err(|e| format!("collect: {e}"))?;
    let collected_text = collected.document.to_json();
    drop(collected);

    let original: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let cx = Context {
        transform: &original["transform"],
        vertices: original["vertices"].as_array().unwrap(),
        appearance: original.get("appearance"),
        templates: original.get("geometry-templates"),
    };
    let objects = original["CityObjects"].as_object().unwrap();

    let mut seen = std::collections::HashSet::new();
    let mut problem = None;
    for_each_stream_object(&stream_text, |id, resolved| {
        if problem.is_some() {
            return;
        }
        match objects.get(id) {
            None => problem = Some(format!("stream has unknown object {id:?}")),
            Some(co) if cx.resolve_object(co) != resolved => {
                problem = Some(format!("object {id:?} differs in the stream"))
            }
            Some(_) if !seen.insert(id.to_string()) => problem = Some(format!("object {id:?} repeated")),
            Some(_) => {}
        }
    });
    if let Some(p) = problem {
        return Err(p);
    }
    if seen.len() != objects.len() {
        return Err(format!("stream holds {} of {} objects", seen.len(), objects.len()));
    }

    let back: Value = serde_json::from_str(&collected_text).map_err(|e| e.to_string())?;
    let bcx = Context {
        transform: &back["transform"],
        vertices: back["vertices"].as_array().unwrap(),
        appearance: back.get("appearance"),
        templates: back.get("geometry-templates"),
    };
    let back_objects = back["CityObjects"].as_object().unwrap();
    if back_objects.len() != objects.len() {
        return Err(format!("collected {} of {} objects", back_objects.len(), objects.len()));
    }
    for (id, co) in objects {
        let b = back_objects.get(id).ok_or_else(|| format!("collected document lacks {id:?}"))?;
        if cx.resolve_object(co) != bcx.resolve_object(b) {
            return Err(format!("object {id:?} differs after collect"));
        }
    }
    Ok(RoundTrip {
        objects: objects.len(),
        features,
        stream: stream_text,
        collected: collected_text,
    })
}

/// Property bodies shared by the property test target and the acceptance run.
pub mod props {
    use std::io::Cursor;

    use cityseq::{
        cat, collect, read_stream, shared_vertex_percentage, CityJSONDocument, CityJSONFeature, CityObject,
        GeometryObject, GeometryType, Nested, TransformSpec, Vertex,
    };
    use proptest::prelude::*;
    use proptest::test_runner::{Config, TestCaseError, TestRunner};
    use serde_json::{json, Value};

    use super::flatten_dedup;

    pub const INDEX_RANGE: usize = 60;

    fn nested(depth: usize) -> BoxedStrategy<Value> {
        if depth == 1 {
            prop::collection::vec(0..INDEX_RANGE as u64, 1..7).prop_map(|v| json!(v)).boxed()
        } else {
            prop::collection::vec(nested(depth - 1), 1..4).prop_map(Value::Array).boxed()
        }
    }

    /// A geometry of any non-instance type with random, well-nested boundaries.
    pub fn geometry() -> impl Strategy<Value = (Value, GeometryObject)> {
        let kinds: Vec<GeometryType> = GeometryType::ALL
            .iter()
            .copied()
            .filter(|k| *k != GeometryType::GeometryInstance)
            .collect();
        prop::sample::select(kinds).prop_flat_map(|kind| {
            nested(kind.boundary_depth()).prop_map(move |b| {
                let raw = json!({"type": kind.as_str(), "lod": "2", "boundaries": b});
                let g: GeometryObject = serde_json::from_value(raw.clone()).expect("generated geometry parses");
                (b, g)
            })
        })
    }

    fn run<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
        let mut runner = TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        });
        runner.run(&s, f).map_err(|e| e.to_string())
    }

    /// referenced_vertex_indices equals flatten-and-dedup of the raw array.
    pub fn referenced_indices_oracle(cases: u32) -> Result<(), String> {
        run(cases, geometry(), |(raw, g)| {
            prop_assert_eq!(g.referenced_vertex_indices().unwrap(), flatten_dedup(&raw));
            Ok(())
        })
    }

    /// Remapping through a random bijection and then its inverse restores the geometry.
    pub fn remap_invertible(cases: u32) -> Result<(), String> {
        let perm = Just((0..INDEX_RANGE).collect::<Vec<usize>>()).prop_shuffle();
        run(cases, (geometry(), perm), |((_, g), perm)| {
            let mut inverse = vec![0; perm.len()];
            for (i, &p) in perm.iter().enumerate() {
                inverse[p] = i;
            }
            let there = g.remap_boundaries(&perm, None).unwrap();
            prop_assert_eq!(there.boundaries.outline(5), g.boundaries.outline(5));
            let leaves: Vec<usize> = g.boundaries.leaves().into_iter().map(|&i| perm[i]).collect();
            prop_assert_eq!(there.boundaries.leaves().into_iter().copied().collect::<Vec<_>>(), leaves);
            let back = there.remap_boundaries(&inverse, None).unwrap();
            prop_assert_eq!(back, g);
            Ok(())
        })
    }

    fn text_with_breaks() -> impl Strategy<Value = String> {
        prop::collection::vec(
            prop_oneof![
                any::<char>().prop_map(String::from),
                Just("\n".to_string()),
                Just("\r".to_string()),
                Just("\r\n".to_string()),
            ],
            0..12,
        )
        .prop_map(|parts| parts.concat())
    }

    /// Serialized headers, features and documents hold no LF or CR byte,
    /// even when their strings do.
    pub fn no_line_breaks(cases: u32) -> Result<(), String> {
        let s = (text_with_breaks(), text_with_breaks(), prop::collection::vec(any::<[i32; 3]>(), 1..8));
        run(cases, s, |(id, attr, pts)| {
            let id = format!("b{id}");
            let mut co = CityObject::new("Building");
            co.attributes = Some(serde_json::from_value(json!({ "name": attr, "note\n": 1.5e-7 })).unwrap());
            let idx: Vec<usize> = (0..pts.len()).collect();
            co.geometry = Some(vec![GeometryObject::new(GeometryType::MultiPoint, Some("0"), Nested::Depth1(idx))]);
            let mut f = CityJSONFeature::new(id.clone());
            f.vertices = pts.iter().map(|p| Vertex::from([p[0] as i64, p[1] as i64, p[2] as i64])).collect();
            f.city_objects.insert(id.clone(), co.clone());
            let line = f.to_json();
            prop_assert!(!line.bytes().any(|b| b == b'\n' || b == b'\r'));
            prop_assert_eq!(cityseq::parse_feature(&line, Some(0)).unwrap(), f.clone());

            let mut doc = CityJSONDocument::new(TransformSpec::new([0.01; 3], [1.0, 2.0, 3.0]).unwrap());
            doc.metadata = Some(serde_json::from_value(json!({ "title": attr })).unwrap());
            doc.vertices = f.vertices.clone();
            doc.city_objects.insert(id, co);
            let text = doc.to_json();
            prop_assert!(!text.bytes().any(|b| b == b'\n' || b == b'\r'));
            let (stream, _) = cat(&doc).unwrap();
            let mut out = Vec::new();
            stream.write_to(&mut out).unwrap();
            // one LF per line, nothing else
            prop_assert_eq!(out.iter().filter(|&&b| b == b'\n').count(), 2);
            prop_assert!(!out.contains(&b'\r'));
            prop_assert_eq!(out.last(), Some(&b'\n'));
            Ok(())
        })
    }

    /// Flat documents over distinct vertices: each object is a MultiPoint
    /// picking random vertices.
    pub fn flat_document() -> impl Strategy<Value = CityJSONDocument> {
        (1usize..30).prop_flat_map(|nv| {
            prop::collection::vec(prop::collection::vec(0..nv, 1..6), 1..7).prop_map(move |objs| {
                let mut doc = CityJSONDocument::new(TransformSpec::new([0.001; 3], [0.0; 3]).unwrap());
                doc.vertices = (0..nv as i64).map(|i| Vertex::from([i, 2 * i, 3 * i])).collect();
                for (k, idx) in objs.into_iter().enumerate() {
                    let mut co = CityObject::new("Building");
                    co.geometry = Some(vec![GeometryObject::new(GeometryType::MultiPoint, None, Nested::Depth1(idx))]);
                    doc.city_objects.insert(format!("o{k}"), co);
                }
                doc
            })
        })
    }

    /// Zero shared vertices exactly when collecting adds up the feature vertex counts.
    pub fn dedup_identity(cases: u32) -> Result<(), String> {
        run(cases, flat_document(), |doc| {
            doc.validate().unwrap();
            let shared = shared_vertex_percentage(&doc).unwrap();
            let (stream, _) = cat(&doc).unwrap();
            let mut text = Vec::new();
            stream.write_to(&mut text).unwrap();
            let rs = read_stream(Cursor::new(&text)).unwrap();
            let features: Vec<_> = rs.stream.features.collect::<Result<_, _>>().unwrap();
            let sum: usize = features.iter().map(|f| f.feature.vertices.len()).sum();
            let c = collect(cityseq::FeatureStream::new(rs.stream.header, features.into_iter().map(Ok))).unwrap();
            prop_assert_eq!(shared == 0.0, c.document.vertices.len() == sum);
            prop_assert_eq!(c.duplicate_vertices, sum - c.document.vertices.len());
            Ok(())
        })
    }
}

/// Broken variants of the reference stream with the rule id and line each
/// must be reported at.
pub fn stream_mutants(reference: &str) -> Vec<(&'static str, String, &'static str, usize)> {
    let lines: Vec<&str> = reference.lines().collect();
    let rest = |from: usize| lines[from..].iter().map(|l| format!("{l}\n")).collect::<String>();
    vec![
        ("feature first", rest(1), "4", 1),
        (
            "header with vertices",
            format!("{}\n{}", lines[0].replace(r#""vertices":[]"#, r#""vertices":[[1,2,3]]"#), rest(1)),
            "4.empty",
            1,
        ),
        (
            "embedded newline",
            format!("{}\n{}\n{}", lines[0], lines[1].replacen(r#","vertices""#, "\n,\"vertices\"", 1), rest(2)),
            "3",
            2,
        ),
        (
            "missing transform",
            format!(
                "{}\n{}",
                lines[0].replace(r#""transform": {"scale":[1.0,1.0,1.0],"translate":[0.0, 0.0, 0.0]},"#, ""),
                rest(1)
            ),
            "4.transform",
            1,
        ),
        (
            "second line not a feature",
            format!("{}\n{}\n{}", lines[0], lines[0], rest(1)),
            "5",
            2,
        ),
    ]
}

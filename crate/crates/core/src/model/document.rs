use indexmap::IndexMap;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use super::appearance::{Appearance, GeometryTemplates};
use super::cityobject::CityObject;
use super::geometry::IndexLimits;
use super::parts::ObjectParts;
use super::transform::{TransformSpec, Vertex};
use crate::error::{Error, IndexKind, Result};

pub const CITYJSON: &str = "CityJSON";
pub const CITYJSON_FEATURE: &str = "CityJSONFeature";
/// Version written on output.
pub const VERSION: &str = "2.0";
pub const ACCEPTED_VERSIONS: [&str; 2] = ["1.1", "2.0"];

pub(crate) fn check_type(found: &Option<String>, expected: &'static str) -> Result<()> {
    if found.as_deref() == Some(expected) {
        Ok(())
    } else {
        Err(Error::WrongType {
            expected,
            found: found.clone(),
        })
    }
}

pub(crate) fn check_version(found: &Option<String>) -> Result<()> {
    match found.as_deref() {
        Some(v) if ACCEPTED_VERSIONS.contains(&v) => Ok(()),
        _ => Err(Error::UnsupportedVersion(found.clone())),
    }
}

/// Template geometries index "vertices-templates", never the main vertex array.
pub(crate) fn check_templates(t: &GeometryTemplates) -> Result<()> {
    let limits = IndexLimits {
        vertices: t.vertices_templates.len(),
        ..Default::default()
    };
    for (i, g) in t.templates.iter().enumerate() {
        g.check_shape()?;
        let context = format!("geometry template {i}");
        g.check_indices(&limits, &context).map_err(|e| match e {
            Error::IndexOutOfRange { index, len, context, .. } => Error::IndexOutOfRange {
                kind: IndexKind::TemplateVertex,
                index,
                len,
                context,
            },
            e => e,
        })?;
    }
    Ok(())
}

/// Every parents/children reference must resolve and be mirrored on the other side.
pub(crate) fn check_hierarchy(objects: &IndexMap<String, CityObject>) -> Result<()> {
    for (id, co) in objects {
        for child in co.children_ids() {
            let c = objects.get(child).ok_or_else(|| Error::DanglingReference {
                object: id.clone(),
                relation: "child",
                target: child.clone(),
            })?;
            if !c.parent_ids().contains(id) {
                return Err(Error::AsymmetricLink {
                    parent: id.clone(),
                    child: child.clone(),
                });
            }
        }
        for parent in co.parent_ids() {
            let p = objects.get(parent).ok_or_else(|| Error::DanglingReference {
                object: id.clone(),
                relation: "parent",
                target: parent.clone(),
            })?;
            if !p.children_ids().contains(id) {
                return Err(Error::AsymmetricLink {
                    parent: parent.clone(),
                    child: id.clone(),
                });
            }
        }
    }
    Ok(())
}

pub(crate) fn appearance_limits(a: Option<&Appearance>) -> IndexLimits {
    IndexLimits {
        materials: a.map_or(0, Appearance::material_count),
        textures: a.map_or(0, Appearance::texture_count),
        texture_vertices: a.map_or(0, Appearance::texture_vertex_count),
        ..Default::default()
    }
}

/// A whole CityJSON dataset: every city object indexes one global vertex array.
#[derive(Clone, Debug, PartialEq)]
pub struct CityJSONDocument {
    pub transform: TransformSpec,
    pub metadata: Option<Map<String, Value>>,
    pub city_objects: IndexMap<String, CityObject>,
    pub vertices: Vec<Vertex>,
    pub appearance: Option<Appearance>,
    pub geometry_templates: Option<GeometryTemplates>,
    /// Unrecognised top-level members ("extensions", "+..."), preserved verbatim.
    pub extra: Map<String, Value>,
}

impl CityJSONDocument {
    pub fn new(transform: TransformSpec) -> Self {
        CityJSONDocument {
            transform,
            metadata: None,
            city_objects: IndexMap::new(),
            vertices: Vec::new(),
            appearance: None,
            geometry_templates: None,
            extra: Map::new(),
        }
    }

    pub(crate) fn from_parts(p: ObjectParts) -> Result<Self> {
        check_type(&p.kind, CITYJSON)?;
        check_version(&p.version)?;
        let transform = p.transform.ok_or(Error::MissingTransform)?;
        let mut extra = p.extra;
        if let Some(id) = p.id {
            extra.insert("id".into(), Value::String(id));
        }
        Ok(CityJSONDocument {
            transform,
            metadata: p.metadata,
            city_objects: p.city_objects.unwrap_or_default(),
            vertices: p.vertices.unwrap_or_default(),
            appearance: p.appearance,
            geometry_templates: p.geometry_templates,
            extra,
        })
    }

    pub fn template_count(&self) -> usize {
        self.geometry_templates.as_ref().map_or(0, |t| t.templates.len())
    }

    pub fn index_limits(&self) -> IndexLimits {
        IndexLimits {
            vertices: self.vertices.len(),
            templates: self.template_count(),
            ..appearance_limits(self.appearance.as_ref())
        }
    }

    /// Checks every invariant: transform, geometry shapes, index ranges and
    /// the parents/children links.
    pub fn validate(&self) -> Result<()> {
        self.transform.check()?;
        if let Some(t) = &self.geometry_templates {
            check_templates(t)?;
        }
        let limits = self.index_limits();
        for (id, co) in &self.city_objects {
            for g in co.geometries() {
                g.check_shape()?;
                g.check_indices(&limits, &format!("city object {id:?}"))?;
            }
        }
        check_hierarchy(&self.city_objects)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializing to a string cannot fail")
    }
}

/// Parses and validates a CityJSON document. Violations are reported, never repaired.
pub fn parse_document(text: &str) -> Result<CityJSONDocument> {
    let parts: ObjectParts = serde_json::from_str(text)?;
    let doc = CityJSONDocument::from_parts(parts)?;
    doc.validate()?;
    Ok(doc)
}

/// Reader variant of [`parse_document`].
pub fn read_document<R: std::io::Read>(reader: R) -> Result<CityJSONDocument> {
    let parts: ObjectParts = serde_json::from_reader(reader)?;
    let doc = CityJSONDocument::from_parts(parts)?;
    doc.validate()?;
    Ok(doc)
}

// Output order: type, version, transform, metadata, CityObjects, vertices,
// appearance, geometry-templates, then extra members.
impl Serialize for CityJSONDocument {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(None)?;
        m.serialize_entry("type", CITYJSON)?;
        m.serialize_entry("version", VERSION)?;
        m.serialize_entry("transform", &self.transform)?;
        if let Some(md) = &self.metadata {
            m.serialize_entry("metadata", md)?;
        }
        m.serialize_entry("CityObjects", &self.city_objects)?;
        m.serialize_entry("vertices", &self.vertices)?;
        if let Some(a) = &self.appearance {
            m.serialize_entry("appearance", a)?;
        }
        if let Some(t) = &self.geometry_templates {
            m.serialize_entry("geometry-templates", t)?;
        }
        for (k, v) in &self.extra {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for CityJSONDocument {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = ObjectParts::deserialize(d)?;
        CityJSONDocument::from_parts(parts).map_err(serde::de::Error::custom)
    }
}

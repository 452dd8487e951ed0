use std::collections::HashSet;

use indexmap::IndexMap;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use super::appearance::{Appearance, GeometryTemplates};
use super::cityobject::CityObject;
use super::document::{
    appearance_limits, check_hierarchy, check_templates, check_type, check_version, CITYJSON,
    CITYJSON_FEATURE, VERSION,
};
use super::geometry::IndexLimits;
use super::parts::ObjectParts;
use super::transform::{TransformSpec, Vertex};
use crate::error::{Error, Result};

/// One top-level city object with its descendants, carrying its own vertex
/// list and appearance. Indices are local to the feature.
#[derive(Clone, Debug, PartialEq)]
pub struct CityJSONFeature {
    pub id: String,
    pub city_objects: IndexMap<String, CityObject>,
    pub vertices: Vec<Vertex>,
    pub appearance: Option<Appearance>,
    /// Unrecognised members. A "metadata" member is kept here on input but
    /// never written out.
    pub extra: Map<String, Value>,
}

impl CityJSONFeature {
    pub fn new(id: impl Into<String>) -> Self {
        CityJSONFeature {
            id: id.into(),
            city_objects: IndexMap::new(),
            vertices: Vec::new(),
            appearance: None,
            extra: Map::new(),
        }
    }

    pub(crate) fn from_parts(p: ObjectParts) -> Result<Self> {
        check_type(&p.kind, CITYJSON_FEATURE)?;
        let id = p
            .id
            .ok_or_else(|| Error::InvalidFeature("missing \"id\"".into()))?;
        let city_objects = p
            .city_objects
            .ok_or_else(|| Error::InvalidFeature(format!("{id:?} has no \"CityObjects\"")))?;
        let mut extra = p.extra;
        if let Some(md) = p.metadata {
            extra.insert("metadata".into(), Value::Object(md));
        }
        if let Some(v) = p.version {
            extra.insert("version".into(), Value::String(v));
        }
        if p.transform.is_some() {
            return Err(Error::InvalidFeature(format!(
                "{id:?} carries a \"transform\"; the transform belongs to the stream header"
            )));
        }
        if p.geometry_templates.is_some() {
            return Err(Error::InvalidFeature(format!(
                "{id:?} carries \"geometry-templates\"; templates belong to the stream header"
            )));
        }
        Ok(CityJSONFeature {
            id,
            city_objects,
            vertices: p.vertices.unwrap_or_default(),
            appearance: p.appearance,
            extra,
        })
    }

    pub fn has_metadata(&self) -> bool {
        self.extra.contains_key("metadata")
    }

    pub fn root(&self) -> Option<&CityObject> {
        self.city_objects.get(&self.id)
    }

    pub fn index_limits(&self, templates: usize) -> IndexLimits {
        IndexLimits {
            vertices: self.vertices.len(),
            templates,
            ..appearance_limits(self.appearance.as_ref())
        }
    }

    /// Checks the structural rules of a feature. `templates` is the number of
    /// geometry templates in the stream header; `None` skips that range check.
    pub fn validate(&self, templates: Option<usize>) -> Result<()> {
        let root = self.root().ok_or_else(|| {
            Error::InvalidFeature(format!("\"id\" {:?} is not a key of \"CityObjects\"", self.id))
        })?;
        if !root.is_root() {
            return Err(Error::NotARoot(self.id.clone()));
        }
        if let Some((other, _)) = self
            .city_objects
            .iter()
            .find(|(k, co)| co.is_root() && **k != self.id)
        {
            return Err(Error::InvalidFeature(format!(
                "{other:?} has no parents but is not the feature root {:?}",
                self.id
            )));
        }
        check_hierarchy(&self.city_objects)?;
        self.check_reachable()?;

        let limits = self.index_limits(templates.unwrap_or(usize::MAX));
        let mut used = vec![false; self.vertices.len()];
        for (id, co) in &self.city_objects {
            for g in co.geometries() {
                g.check_shape()?;
                g.check_indices(&limits, &format!("city object {id:?}"))?;
                g.for_each_vertex_index(|i| used[i] = true);
            }
        }
        if let Some(index) = used.iter().position(|u| !u) {
            return Err(Error::OrphanVertex {
                feature: self.id.clone(),
                index,
            });
        }
        Ok(())
    }

    // With one root and symmetric links, anything unreachable sits on a cycle.
    fn check_reachable(&self) -> Result<()> {
        let mut seen: HashSet<&str> = HashSet::new();
        let mut stack = vec![self.id.as_str()];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            if let Some(co) = self.city_objects.get(id) {
                stack.extend(co.children_ids().iter().map(String::as_str));
            }
        }
        match self.city_objects.keys().find(|k| !seen.contains(k.as_str())) {
            Some(k) => Err(Error::Cycle(k.clone())),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializing to a string cannot fail")
    }
}

/// Parses one CityJSONFeature and checks its structure.
pub fn parse_feature(text: &str, templates: Option<usize>) -> Result<CityJSONFeature> {
    let parts: ObjectParts = serde_json::from_str(text)?;
    let f = CityJSONFeature::from_parts(parts)?;
    f.validate(templates)?;
    Ok(f)
}

// Output order: type, id, CityObjects, vertices, appearance, extra members.
impl Serialize for CityJSONFeature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(None)?;
        m.serialize_entry("type", CITYJSON_FEATURE)?;
        m.serialize_entry("id", &self.id)?;
        m.serialize_entry("CityObjects", &self.city_objects)?;
        m.serialize_entry("vertices", &self.vertices)?;
        if let Some(a) = &self.appearance {
            m.serialize_entry("appearance", a)?;
        }
        for (k, v) in &self.extra {
            if k != "metadata" && k != "version" {
                m.serialize_entry(k, v)?;
            }
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for CityJSONFeature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = ObjectParts::deserialize(d)?;
        CityJSONFeature::from_parts(parts).map_err(serde::de::Error::custom)
    }
}

/// First line of a CityJSONSeq stream: a CityJSON object whose "CityObjects"
/// and "vertices" are empty. It holds everything the features share.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamHeader {
    pub transform: TransformSpec,
    pub metadata: Option<Map<String, Value>>,
    pub geometry_templates: Option<GeometryTemplates>,
    /// Unrecognised members, including a header-level "appearance" if present.
    pub extra: Map<String, Value>,
}

impl StreamHeader {
    pub fn new(transform: TransformSpec) -> Self {
        StreamHeader {
            transform,
            metadata: None,
            geometry_templates: None,
            extra: Map::new(),
        }
    }

    pub(crate) fn from_parts(p: ObjectParts) -> Result<Self> {
        check_type(&p.kind, CITYJSON)?;
        check_version(&p.version)?;
        let transform = p.transform.ok_or(Error::MissingTransform)?;
        transform.check()?;
        match (&p.city_objects, &p.vertices) {
            (Some(c), Some(v)) if c.is_empty() && v.is_empty() => {}
            (Some(_), Some(_)) => return Err(Error::HeaderNotEmpty),
            _ => return Err(Error::HeaderIncomplete),
        }
        if let Some(t) = &p.geometry_templates {
            check_templates(t)?;
        }
        let mut extra = Map::new();
        if let Some(id) = p.id {
            extra.insert("id".into(), Value::String(id));
        }
        if let Some(a) = p.appearance {
            extra.insert(
                "appearance".into(),
                serde_json::to_value(a).expect("appearance is valid JSON"),
            );
        }
        extra.extend(p.extra);
        Ok(StreamHeader {
            transform,
            metadata: p.metadata,
            geometry_templates: p.geometry_templates,
            extra,
        })
    }

    pub fn template_count(&self) -> usize {
        self.geometry_templates.as_ref().map_or(0, |t| t.templates.len())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializing to a string cannot fail")
    }
}

/// Parses and checks a stream header line.
pub fn parse_header(text: &str) -> Result<StreamHeader> {
    let parts: ObjectParts = serde_json::from_str(text)?;
    StreamHeader::from_parts(parts)
}

impl Serialize for StreamHeader {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(None)?;
        m.serialize_entry("type", CITYJSON)?;
        m.serialize_entry("version", VERSION)?;
        m.serialize_entry("transform", &self.transform)?;
        if let Some(md) = &self.metadata {
            m.serialize_entry("metadata", md)?;
        }
        m.serialize_entry("CityObjects", &Map::new())?;
        m.serialize_entry("vertices", &[(); 0])?;
        if let Some(t) = &self.geometry_templates {
            m.serialize_entry("geometry-templates", t)?;
        }
        for (k, v) in &self.extra {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for StreamHeader {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = ObjectParts::deserialize(d)?;
        StreamHeader::from_parts(parts).map_err(serde::de::Error::custom)
    }
}

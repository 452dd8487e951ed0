//! Member-level decoding shared by the three top-level object kinds
//! (document, stream header, feature). Type-specific rules are applied by the
//! `from_parts` constructors so they can report typed errors.

use std::fmt;

use indexmap::IndexMap;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use serde_json::{Map, Value};

use super::appearance::{Appearance, GeometryTemplates};
use super::cityobject::CityObject;
use super::transform::{TransformSpec, Vertex};

#[derive(Debug, Default)]
pub(crate) struct ObjectParts {
    pub kind: Option<String>,
    pub version: Option<String>,
    pub id: Option<String>,
    pub transform: Option<TransformSpec>,
    pub metadata: Option<Map<String, Value>>,
    pub city_objects: Option<IndexMap<String, CityObject>>,
    pub vertices: Option<Vec<Vertex>>,
    pub appearance: Option<Appearance>,
    pub geometry_templates: Option<GeometryTemplates>,
    pub extra: Map<String, Value>,
}

enum Field {
    Type,
    Version,
    Id,
    Transform,
    Metadata,
    CityObjects,
    Vertices,
    Appearance,
    GeometryTemplates,
    Other(String),
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct FieldVisitor;
        impl Visitor<'_> for FieldVisitor {
            type Value = Field;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a member name")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Field, E> {
                Ok(match v {
                    "type" => Field::Type,
                    "version" => Field::Version,
                    "id" => Field::Id,
                    "transform" => Field::Transform,
                    "metadata" => Field::Metadata,
                    "CityObjects" => Field::CityObjects,
                    "vertices" => Field::Vertices,
                    "appearance" => Field::Appearance,
                    "geometry-templates" => Field::GeometryTemplates,
                    other => Field::Other(other.to_string()),
                })
            }
        }
        d.deserialize_identifier(FieldVisitor)
    }
}

struct PartsVisitor;

impl<'de> Visitor<'de> for PartsVisitor {
    type Value = ObjectParts;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a JSON object")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<ObjectParts, A::Error> {
        let mut p = ObjectParts::default();
        while let Some(field) = map.next_key::<Field>()? {
            match field {
                Field::Type => p.kind = Some(map.next_value()?),
                Field::Version => p.version = Some(map.next_value()?),
                Field::Id => p.id = Some(map.next_value()?),
                Field::Transform => p.transform = Some(map.next_value()?),
                Field::Metadata => p.metadata = map.next_value()?,
                Field::CityObjects => p.city_objects = Some(map.next_value()?),
                Field::Vertices => p.vertices = Some(map.next_value()?),
                Field::Appearance => p.appearance = map.next_value()?,
                Field::GeometryTemplates => p.geometry_templates = map.next_value()?,
                Field::Other(k) => {
                    p.extra.insert(k, map.next_value()?);
                }
            }
        }
        Ok(p)
    }
}

impl<'de> Deserialize<'de> for ObjectParts {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_map(PartsVisitor)
    }
}

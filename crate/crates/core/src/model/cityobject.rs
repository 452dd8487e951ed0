use std::fmt;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{Map, Value};

use super::geometry::GeometryObject;

/// A city object. Hierarchies are flattened: objects refer to each other by
/// id through "parents" and "children".
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CityObject {
    /// CityGML class name, e.g. "Building" or "BuildingPart".
    pub kind: String,
    pub attributes: Option<Map<String, Value>>,
    pub children: Option<Vec<String>>,
    pub parents: Option<Vec<String>>,
    pub geographical_extent: Option<[f64; 6]>,
    pub geometry: Option<Vec<GeometryObject>>,
    /// Unrecognised members ("address", extension properties, ...), preserved verbatim.
    pub extra: Map<String, Value>,
}

impl CityObject {
    pub fn new(kind: impl Into<String>) -> Self {
        CityObject {
            kind: kind.into(),
            ..Default::default()
        }
    }

    pub fn geometries(&self) -> &[GeometryObject] {
        self.geometry.as_deref().unwrap_or_default()
    }

    pub fn children_ids(&self) -> &[String] {
        self.children.as_deref().unwrap_or_default()
    }

    pub fn parent_ids(&self) -> &[String] {
        self.parents.as_deref().unwrap_or_default()
    }

    /// Top-level objects have no parents; each one roots a feature.
    pub fn is_root(&self) -> bool {
        self.parent_ids().is_empty()
    }
}

// Output order: type, attributes, children, parents, geographicalExtent,
// extra members, geometry.
impl Serialize for CityObject {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(None)?;
        m.serialize_entry("type", &self.kind)?;
        if let Some(a) = &self.attributes {
            m.serialize_entry("attributes", a)?;
        }
        if let Some(c) = &self.children {
            m.serialize_entry("children", c)?;
        }
        if let Some(p) = &self.parents {
            m.serialize_entry("parents", p)?;
        }
        if let Some(e) = &self.geographical_extent {
            m.serialize_entry("geographicalExtent", e)?;
        }
        for (k, v) in &self.extra {
            m.serialize_entry(k, v)?;
        }
        if let Some(g) = &self.geometry {
            m.serialize_entry("geometry", g)?;
        }
        m.end()
    }
}

enum Field {
    Type,
    Attributes,
    Children,
    Parents,
    Extent,
    Geometry,
    Other(String),
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct FieldVisitor;
        impl Visitor<'_> for FieldVisitor {
            type Value = Field;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a city object member name")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Field, E> {
                Ok(match v {
                    "type" => Field::Type,
                    "attributes" => Field::Attributes,
                    "children" => Field::Children,
                    "parents" => Field::Parents,
                    "geographicalExtent" => Field::Extent,
                    "geometry" => Field::Geometry,
                    other => Field::Other(other.to_string()),
                })
            }
        }
        d.deserialize_identifier(FieldVisitor)
    }
}

struct CityObjectVisitor;

impl<'de> Visitor<'de> for CityObjectVisitor {
    type Value = CityObject;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a CityJSON city object")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<CityObject, A::Error> {
        let mut kind = None;
        let mut co = CityObject::default();
        while let Some(field) = map.next_key::<Field>()? {
            match field {
                Field::Type => kind = Some(map.next_value::<String>()?),
                Field::Attributes => co.attributes = map.next_value()?,
                Field::Children => co.children = map.next_value()?,
                Field::Parents => co.parents = map.next_value()?,
                Field::Extent => co.geographical_extent = map.next_value()?,
                Field::Geometry => co.geometry = map.next_value()?,
                Field::Other(k) => {
                    co.extra.insert(k, map.next_value()?);
                }
            }
        }
        co.kind = kind.ok_or_else(|| de::Error::missing_field("type"))?;
        Ok(co)
    }
}

impl<'de> Deserialize<'de> for CityObject {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_map(CityObjectVisitor)
    }
}

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::geometry::GeometryObject;

/// Materials, textures and texture vertices. Material and texture records
/// are opaque JSON; only their positions matter to the index machinery.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Appearance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub textures: Option<Vec<Value>>,
    #[serde(rename = "vertices-texture", default, skip_serializing_if = "Option::is_none")]
    pub vertices_texture: Option<Vec<[f64; 2]>>,
    #[serde(rename = "default-theme-texture", default, skip_serializing_if = "Option::is_none")]
    pub default_theme_texture: Option<String>,
    #[serde(rename = "default-theme-material", default, skip_serializing_if = "Option::is_none")]
    pub default_theme_material: Option<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Appearance {
    pub fn material_count(&self) -> usize {
        self.materials.as_ref().map_or(0, Vec::len)
    }

    pub fn texture_count(&self) -> usize {
        self.textures.as_ref().map_or(0, Vec::len)
    }

    pub fn texture_vertex_count(&self) -> usize {
        self.vertices_texture.as_ref().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.material_count() == 0
            && self.texture_count() == 0
            && self.texture_vertex_count() == 0
            && self.default_theme_material.is_none()
            && self.default_theme_texture.is_none()
            && self.extra.is_empty()
    }
}

/// Geometries defined once and instantiated by `GeometryInstance` objects.
/// Their boundaries index "vertices-templates", which hold real coordinates.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct GeometryTemplates {
    pub templates: Vec<GeometryObject>,
    #[serde(rename = "vertices-templates")]
    pub vertices_templates: Vec<[f64; 3]>,
}

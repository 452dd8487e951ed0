use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::de::{self, DeserializeSeed, Deserializer, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{Map, Value};

use super::nested::{Nested, NestedSeed};
use crate::error::{Error, IndexKind, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeometryType {
    MultiPoint,
    MultiLineString,
    MultiSurface,
    CompositeSurface,
    Solid,
    MultiSolid,
    CompositeSolid,
    GeometryInstance,
}

impl GeometryType {
    pub const ALL: [GeometryType; 8] = [
        GeometryType::MultiPoint,
        GeometryType::MultiLineString,
        GeometryType::MultiSurface,
        GeometryType::CompositeSurface,
        GeometryType::Solid,
        GeometryType::MultiSolid,
        GeometryType::CompositeSolid,
        GeometryType::GeometryInstance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeometryType::MultiPoint => "MultiPoint",
            GeometryType::MultiLineString => "MultiLineString",
            GeometryType::MultiSurface => "MultiSurface",
            GeometryType::CompositeSurface => "CompositeSurface",
            GeometryType::Solid => "Solid",
            GeometryType::MultiSolid => "MultiSolid",
            GeometryType::CompositeSolid => "CompositeSolid",
            GeometryType::GeometryInstance => "GeometryInstance",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == name)
    }

    /// Nesting depth of "boundaries".
    pub fn boundary_depth(self) -> usize {
        match self {
            GeometryType::MultiPoint | GeometryType::GeometryInstance => 1,
            GeometryType::MultiLineString => 2,
            GeometryType::MultiSurface | GeometryType::CompositeSurface => 3,
            GeometryType::Solid => 4,
            GeometryType::MultiSolid | GeometryType::CompositeSolid => 5,
        }
    }

    /// Nesting depth of semantic and material "values" (one entry per
    /// point, linestring or surface). None for template instances.
    pub fn surface_depth(self) -> Option<usize> {
        match self {
            GeometryType::GeometryInstance => None,
            GeometryType::MultiPoint
            | GeometryType::MultiLineString
            | GeometryType::MultiSurface
            | GeometryType::CompositeSurface => Some(1),
            GeometryType::Solid => Some(2),
            GeometryType::MultiSolid | GeometryType::CompositeSolid => Some(3),
        }
    }

    /// Whether the geometry is made of surfaces (and so can carry materials and textures).
    pub fn has_surfaces(self) -> bool {
        self.boundary_depth() >= 3
    }
}

impl fmt::Display for GeometryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps an old index to a new one.
pub trait IndexMapping {
    fn map_index(&self, old: usize) -> Option<usize>;
}

impl IndexMapping for HashMap<usize, usize> {
    fn map_index(&self, old: usize) -> Option<usize> {
        self.get(&old).copied()
    }
}

/// Dense mapping: position = old index.
impl IndexMapping for [usize] {
    fn map_index(&self, old: usize) -> Option<usize> {
        self.get(old).copied()
    }
}

impl IndexMapping for Vec<usize> {
    fn map_index(&self, old: usize) -> Option<usize> {
        self.get(old).copied()
    }
}

pub struct Identity;

impl IndexMapping for Identity {
    fn map_index(&self, old: usize) -> Option<usize> {
        Some(old)
    }
}

fn mapped(map: &(impl IndexMapping + ?Sized), old: usize) -> Result<usize> {
    map.map_index(old).ok_or(Error::UnmappedIndex(old))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Semantics {
    /// Semantic surface descriptors, kept as opaque JSON.
    pub surfaces: Vec<Value>,
    pub values: Nested<Option<usize>>,
}

/// One material theme: either one material for the whole geometry ("value")
/// or one per surface ("values").
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaterialTheme {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Nested<Option<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<usize>,
}

/// One texture theme. Each innermost list belongs to a ring: the texture
/// index first, then one texture-vertex (UV) index per ring vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TextureTheme {
    pub values: Nested<Option<usize>>,
}

/// Sizes of the index spaces a geometry may point into.
#[derive(Clone, Copy, Debug, Default)]
pub struct IndexLimits {
    pub vertices: usize,
    pub materials: usize,
    pub textures: usize,
    pub texture_vertices: usize,
    /// Number of geometry templates available from the header or document.
    pub templates: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryObject {
    pub kind: GeometryType,
    pub lod: Option<String>,
    pub boundaries: Nested<usize>,
    pub semantics: Option<Semantics>,
    pub material: Option<IndexMap<String, MaterialTheme>>,
    pub texture: Option<IndexMap<String, TextureTheme>>,
    pub template: Option<usize>,
    pub transformation_matrix: Option<[f64; 16]>,
    /// Unrecognised members, preserved verbatim.
    pub extra: Map<String, Value>,
}

impl GeometryObject {
    pub fn new(kind: GeometryType, lod: Option<&str>, boundaries: Nested<usize>) -> Self {
        GeometryObject {
            kind,
            lod: lod.map(str::to_string),
            boundaries,
            semantics: None,
            material: None,
            texture: None,
            template: None,
            transformation_matrix: None,
            extra: Map::new(),
        }
    }

    /// A template instance anchored at `reference_point`.
    pub fn instance(template: usize, reference_point: usize, matrix: [f64; 16]) -> Self {
        GeometryObject {
            template: Some(template),
            transformation_matrix: Some(matrix),
            ..GeometryObject::new(
                GeometryType::GeometryInstance,
                None,
                Nested::Depth1(vec![reference_point]),
            )
        }
    }

    fn malformed(&self, reason: impl Into<String>) -> Error {
        Error::MalformedGeometry {
            geometry: self.kind,
            reason: reason.into(),
        }
    }

    /// Structural checks that do not need the enclosing vertex or appearance arrays.
    pub fn check_shape(&self) -> Result<()> {
        let depth = self.kind.boundary_depth();
        if self.boundaries.depth() != depth {
            return Err(self.malformed(format!(
                "boundaries must be nested {depth} levels deep, found {}",
                self.boundaries.depth()
            )));
        }
        if self.kind == GeometryType::GeometryInstance {
            if self.boundaries.leaf_count() != 1 {
                return Err(self.malformed("boundaries must hold exactly one reference point"));
            }
            if self.template.is_none() {
                return Err(self.malformed("missing \"template\""));
            }
            if self.transformation_matrix.is_none() {
                return Err(self.malformed("missing \"transformationMatrix\""));
            }
            if self.semantics.is_some() || self.material.is_some() || self.texture.is_some() {
                return Err(self.malformed("instances carry no semantics or appearance"));
            }
            return Ok(());
        }
        if self.template.is_some() || self.transformation_matrix.is_some() {
            return Err(self.malformed("only a GeometryInstance may reference a template"));
        }
        // surface_depth is Some for every non-instance type
        let sd = self.kind.surface_depth().unwrap_or(1);
        let outline = self.boundaries.outline(sd);
        if let Some(sem) = &self.semantics {
            if sem.values.depth() != sd || sem.values.outline(sd) != outline {
                return Err(self.malformed("semantics values are not congruent with boundaries"));
            }
        }
        if let Some(themes) = &self.material {
            if !self.kind.has_surfaces() {
                return Err(self.malformed("materials need surfaces"));
            }
            for (name, theme) in themes {
                match (&theme.values, theme.value) {
                    (Some(values), None) => {
                        if values.depth() != sd || values.outline(sd) != outline {
                            return Err(self.malformed(format!(
                                "material theme {name:?} is not congruent with boundaries"
                            )));
                        }
                    }
                    (None, Some(_)) => {}
                    _ => {
                        return Err(self.malformed(format!(
                            "material theme {name:?} needs exactly one of \"value\" or \"values\""
                        )))
                    }
                }
            }
        }
        if let Some(themes) = &self.texture {
            if !self.kind.has_surfaces() {
                return Err(self.malformed("textures need surfaces"));
            }
            let ring_levels = depth - 1;
            let rings = self.boundaries.innermost();
            for (name, theme) in themes {
                let bad = || self.malformed(format!("texture theme {name:?} is not congruent with boundaries"));
                if theme.values.depth() != depth
                    || theme.values.outline(ring_levels) != self.boundaries.outline(ring_levels)
                {
                    return Err(bad());
                }
                let mut ok = true;
                let mut i = 0;
                theme.values.for_each_innermost(|tex| {
                    let ring = rings[i];
                    i += 1;
                    match tex.first() {
                        None | Some(None) => {}
                        Some(Some(_)) => {
                            ok &= tex.len() == ring.len() + 1 && tex[1..].iter().all(Option::is_some)
                        }
                    }
                });
                if !ok {
                    return Err(bad());
                }
            }
        }
        Ok(())
    }

    /// Range checks against the enclosing document or feature.
    pub fn check_indices(&self, limits: &IndexLimits, context: &str) -> Result<()> {
        let oob = |kind, index, len| Error::IndexOutOfRange {
            kind,
            index,
            len,
            context: context.to_string(),
        };
        let mut bad = None;
        self.boundaries.for_each_leaf(|&i| {
            if i >= limits.vertices && bad.is_none() {
                bad = Some(i);
            }
        });
        if let Some(i) = bad {
            return Err(oob(IndexKind::Vertex, i, limits.vertices));
        }
        if let Some(t) = self.template {
            if t >= limits.templates {
                return Err(oob(IndexKind::Template, t, limits.templates));
            }
        }
        if let Some(sem) = &self.semantics {
            let mut bad = None;
            sem.values.for_each_leaf(|v| {
                if let Some(i) = *v {
                    if i >= sem.surfaces.len() && bad.is_none() {
                        bad = Some(i);
                    }
                }
            });
            if let Some(i) = bad {
                return Err(oob(IndexKind::SemanticSurface, i, sem.surfaces.len()));
            }
        }
        let mut bad = None;
        self.for_each_material_index(|i| {
            if i >= limits.materials && bad.is_none() {
                bad = Some(i);
            }
        });
        if let Some(i) = bad {
            return Err(oob(IndexKind::Material, i, limits.materials));
        }
        let (mut bad_tex, mut bad_uv) = (None, None);
        self.for_each_texture_ref(
            |t| {
                if t >= limits.textures && bad_tex.is_none() {
                    bad_tex = Some(t);
                }
            },
            |uv| {
                if uv >= limits.texture_vertices && bad_uv.is_none() {
                    bad_uv = Some(uv);
                }
            },
        );
        if let Some(i) = bad_tex {
            return Err(oob(IndexKind::Texture, i, limits.textures));
        }
        if let Some(i) = bad_uv {
            return Err(oob(IndexKind::TextureVertex, i, limits.texture_vertices));
        }
        Ok(())
    }

    pub fn for_each_vertex_index(&self, mut f: impl FnMut(usize)) {
        self.boundaries.for_each_leaf(|&i| f(i));
    }

    /// Every vertex index reachable from the boundaries (for an instance, its
    /// reference point), in order of first appearance, without duplicates.
    pub fn referenced_vertex_indices(&self) -> Result<Vec<usize>> {
        if self.boundaries.depth() != self.kind.boundary_depth() {
            return Err(self.malformed(format!(
                "boundaries must be nested {} levels deep, found {}",
                self.kind.boundary_depth(),
                self.boundaries.depth()
            )));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        self.for_each_vertex_index(|i| {
            if seen.insert(i) {
                out.push(i);
            }
        });
        Ok(out)
    }

    pub fn for_each_material_index(&self, mut f: impl FnMut(usize)) {
        for theme in self.material.iter().flat_map(|m| m.values()) {
            if let Some(v) = theme.value {
                f(v);
            }
            if let Some(values) = &theme.values {
                values.for_each_leaf(|v| {
                    if let Some(i) = *v {
                        f(i)
                    }
                });
            }
        }
    }

    /// Calls `texture` for the texture index of each textured ring and `uv`
    /// for each of its texture-vertex indices.
    pub fn for_each_texture_ref(&self, mut texture: impl FnMut(usize), mut uv: impl FnMut(usize)) {
        for theme in self.texture.iter().flat_map(|t| t.values()) {
            theme.values.for_each_innermost(|ring| {
                if let Some(Some(t)) = ring.first() {
                    texture(*t);
                    ring[1..].iter().flatten().for_each(|&i| uv(i));
                }
            });
        }
    }

    /// Same geometry with every vertex index replaced through `vertices`.
    /// Texture-vertex indices are remapped only when `texture_vertices` is
    /// given; semantics, materials and texture indices are left untouched.
    pub fn remap_boundaries<M: IndexMapping + ?Sized>(
        &self,
        vertices: &M,
        texture_vertices: Option<&dyn IndexMapping>,
    ) -> Result<GeometryObject> {
        let boundaries = self.boundaries.try_map(|&i| mapped(vertices, i))?;
        let mut out = GeometryObject {
            boundaries,
            ..self.clone()
        };
        if let (Some(uv), Some(themes)) = (texture_vertices, out.texture.as_mut()) {
            for theme in themes.values_mut() {
                remap_rings(&mut theme.values, |_| Ok(None), |i| mapped(uv, i).map(Some))?;
            }
        }
        Ok(out)
    }

    pub fn remap_materials(&mut self, map: &dyn IndexMapping) -> Result<()> {
        for theme in self.material.iter_mut().flat_map(|m| m.values_mut()) {
            if let Some(v) = theme.value.as_mut() {
                *v = mapped(map, *v)?;
            }
            if let Some(values) = theme.values.as_mut() {
                *values = values.try_map(|v| v.map(|i| mapped(map, i)).transpose())?;
            }
        }
        Ok(())
    }

    /// Remaps the texture index (first entry) of each textured ring.
    pub fn remap_textures(&mut self, map: &dyn IndexMapping) -> Result<()> {
        for theme in self.texture.iter_mut().flat_map(|t| t.values_mut()) {
            remap_rings(&mut theme.values, |i| mapped(map, i).map(Some), |_| Ok(None))?;
        }
        Ok(())
    }
}

/// Rewrites textured rings in place. Each closure returns Some(new) to
/// replace an index or None to keep it.
fn remap_rings(
    values: &mut Nested<Option<usize>>,
    mut texture: impl FnMut(usize) -> Result<Option<usize>>,
    mut uv: impl FnMut(usize) -> Result<Option<usize>>,
) -> Result<()> {
    let mut err = None;
    values.for_each_innermost_mut(|ring| {
        if err.is_some() {
            return;
        }
        let Some(Some(t)) = ring.first().copied() else {
            return;
        };
        match texture(t) {
            Ok(Some(n)) => ring[0] = Some(n),
            Ok(None) => {}
            Err(e) => {
                err = Some(e);
                return;
            }
        }
        for slot in ring[1..].iter_mut() {
            if let Some(i) = *slot {
                match uv(i) {
                    Ok(Some(n)) => *slot = Some(n),
                    Ok(None) => {}
                    Err(e) => {
                        err = Some(e);
                        return;
                    }
                }
            }
        }
    });
    err.map_or(Ok(()), Err)
}

impl Serialize for GeometryObject {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(None)?;
        m.serialize_entry("type", self.kind.as_str())?;
        if let Some(lod) = &self.lod {
            m.serialize_entry("lod", lod)?;
        }
        if let Some(t) = self.template {
            m.serialize_entry("template", &t)?;
        }
        m.serialize_entry("boundaries", &self.boundaries)?;
        if let Some(s) = &self.semantics {
            m.serialize_entry("semantics", s)?;
        }
        if let Some(mat) = &self.material {
            m.serialize_entry("material", mat)?;
        }
        if let Some(tex) = &self.texture {
            m.serialize_entry("texture", tex)?;
        }
        if let Some(tm) = &self.transformation_matrix {
            m.serialize_entry("transformationMatrix", &tm[..])?;
        }
        for (k, v) in &self.extra {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

enum GeometryField {
    Type,
    Lod,
    Boundaries,
    Semantics,
    Material,
    Texture,
    Template,
    TransformationMatrix,
    Other(String),
}

impl<'de> Deserialize<'de> for GeometryField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct FieldVisitor;
        impl Visitor<'_> for FieldVisitor {
            type Value = GeometryField;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a geometry member name")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<GeometryField, E> {
                Ok(match v {
                    "type" => GeometryField::Type,
                    "lod" => GeometryField::Lod,
                    "boundaries" => GeometryField::Boundaries,
                    "semantics" => GeometryField::Semantics,
                    "material" => GeometryField::Material,
                    "texture" => GeometryField::Texture,
                    "template" => GeometryField::Template,
                    "transformationMatrix" => GeometryField::TransformationMatrix,
                    other => GeometryField::Other(other.to_string()),
                })
            }
        }
        d.deserialize_identifier(FieldVisitor)
    }
}

fn seed_from_value<E: de::Error>(depth: usize, value: Value, what: &str, kind: GeometryType) -> Result<Nested<Option<usize>>, E> {
    NestedSeed::new(depth)
        .deserialize(value)
        .map_err(|e| E::custom(format_args!("{what} of a {kind} must be nested {depth} levels deep ({e})")))
}

fn semantics_from_value<E: de::Error>(v: Value, kind: GeometryType) -> Result<Semantics, E> {
    let depth = kind
        .surface_depth()
        .ok_or_else(|| E::custom(format_args!("a {kind} cannot carry semantics")))?;
    let Value::Object(mut obj) = v else {
        return Err(E::custom("\"semantics\" must be an object"));
    };
    let surfaces = match obj.remove("surfaces") {
        Some(Value::Array(a)) => a,
        _ => return Err(E::custom("\"semantics\" needs a \"surfaces\" array")),
    };
    let values = obj
        .remove("values")
        .ok_or_else(|| E::custom("\"semantics\" needs \"values\""))?;
    Ok(Semantics {
        surfaces,
        values: seed_from_value(depth, values, "semantics values", kind)?,
    })
}

fn material_from_value<E: de::Error>(v: Value, kind: GeometryType) -> Result<IndexMap<String, MaterialTheme>, E> {
    let depth = kind
        .surface_depth()
        .ok_or_else(|| E::custom(format_args!("a {kind} cannot carry materials")))?;
    let Value::Object(themes) = v else {
        return Err(E::custom("\"material\" must be an object of themes"));
    };
    themes
        .into_iter()
        .map(|(name, theme)| {
            let Value::Object(mut t) = theme else {
                return Err(E::custom(format_args!("material theme {name:?} must be an object")));
            };
            let value = match t.remove("value") {
                None | Some(Value::Null) => None,
                Some(v) => Some(
                    v.as_u64()
                        .ok_or_else(|| E::custom("material \"value\" must be an index"))? as usize,
                ),
            };
            let values = t
                .remove("values")
                .map(|v| seed_from_value(depth, v, "material values", kind))
                .transpose()?;
            Ok((name, MaterialTheme { values, value }))
        })
        .collect()
}

fn texture_from_value<E: de::Error>(v: Value, kind: GeometryType) -> Result<IndexMap<String, TextureTheme>, E> {
    let Value::Object(themes) = v else {
        return Err(E::custom("\"texture\" must be an object of themes"));
    };
    themes
        .into_iter()
        .map(|(name, theme)| {
            let values = match theme {
                Value::Object(mut t) => t.remove("values"),
                _ => None,
            }
            .ok_or_else(|| E::custom(format_args!("texture theme {name:?} needs \"values\"")))?;
            let values = seed_from_value(kind.boundary_depth(), values, "texture values", kind)?;
            Ok((name, TextureTheme { values }))
        })
        .collect()
}

struct GeometryVisitor;

impl<'de> Visitor<'de> for GeometryVisitor {
    type Value = GeometryObject;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a CityJSON geometry object")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<GeometryObject, A::Error> {
        let mut kind = None;
        let mut lod = None;
        let mut boundaries = None;
        let mut pending_boundaries = None;
        let mut semantics = None;
        let mut material = None;
        let mut texture = None;
        let mut template = None;
        let mut matrix: Option<Vec<f64>> = None;
        let mut extra = Map::new();
        while let Some(field) = map.next_key::<GeometryField>()? {
            match field {
                GeometryField::Type => {
                    let name: String = map.next_value()?;
                    let t = GeometryType::from_name(&name)
                        .ok_or_else(|| de::Error::custom(format_args!("unknown geometry type {name:?}")))?;
                    kind = Some(t);
                }
                GeometryField::Lod => lod = Some(map.next_value::<String>()?),
                GeometryField::Boundaries => match kind {
                    // fast path: "type" came first, decode straight into the typed shape
                    Some(t) => {
                        let t: GeometryType = t;
                        boundaries = Some(map.next_value_seed(NestedSeed::new(t.boundary_depth()))?)
                    }
                    None => pending_boundaries = Some(map.next_value::<Value>()?),
                },
                GeometryField::Semantics => semantics = Some(map.next_value::<Value>()?),
                GeometryField::Material => material = Some(map.next_value::<Value>()?),
                GeometryField::Texture => texture = Some(map.next_value::<Value>()?),
                GeometryField::Template => template = Some(map.next_value::<usize>()?),
                GeometryField::TransformationMatrix => matrix = Some(map.next_value()?),
                GeometryField::Other(k) => {
                    extra.insert(k, map.next_value()?);
                }
            }
        }
        let kind = kind.ok_or_else(|| de::Error::missing_field("type"))?;
        let boundaries = match (boundaries, pending_boundaries) {
            (Some(b), _) => b,
            (None, Some(v)) => NestedSeed::new(kind.boundary_depth())
                .deserialize(v)
                .map_err(|e| {
                    de::Error::custom(format_args!(
                        "boundaries of a {kind} must be nested {} levels deep ({e})",
                        kind.boundary_depth()
                    ))
                })?,
            (None, None) => return Err(de::Error::missing_field("boundaries")),
        };
        let transformation_matrix = match matrix {
            None => None,
            Some(m) => Some(<[f64; 16]>::try_from(m.as_slice()).map_err(|_| {
                de::Error::custom(format_args!("\"transformationMatrix\" needs 16 numbers, found {}", m.len()))
            })?),
        };
        Ok(GeometryObject {
            kind,
            lod,
            boundaries,
            semantics: semantics.map(|v| semantics_from_value(v, kind)).transpose()?,
            material: material.map(|v| material_from_value(v, kind)).transpose()?,
            texture: texture.map(|v| texture_from_value(v, kind)).transpose()?,
            template,
            transformation_matrix,
            extra,
        })
    }
}

impl<'de> Deserialize<'de> for GeometryObject {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_map(GeometryVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(json: &str) -> GeometryObject {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn multisurface_first_appearance() {
        let g = geom(r#"{"type":"MultiSurface","lod":"2","boundaries":[[[0,1,2]],[[2,1,3]]]}"#);
        assert_eq!(g.referenced_vertex_indices().unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn instance_reference_point() {
        let g = geom(
            r#"{"type":"GeometryInstance","template":0,"boundaries":[372],
                "transformationMatrix":[1,0,0,0,0,1,0,0,0,0,1,0,0,0,0,1]}"#,
        );
        g.check_shape().unwrap();
        assert_eq!(g.referenced_vertex_indices().unwrap(), vec![372]);
    }

    #[test]
    fn instance_with_doubly_nested_point_is_rejected() {
        let r = serde_json::from_str::<GeometryObject>(
            r#"{"type":"GeometryInstance","template":0,"boundaries":[[372]],
                "transformationMatrix":[1,0,0,0,0,1,0,0,0,0,1,0,0,0,0,1]}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn solid_with_inner_shell() {
        let g = geom(
            r#"{"type":"Solid","lod":"2","boundaries":[
                [[[0,3,2,1]],[[4,5,6,7]],[[0,1,5,4]],[[1,2,6,5]],[[2,3,7,6]],[[3,0,4,7]]],
                [[[8,9,10,11]],[[12,13,14,15]],[[8,12,15,11]]]
            ]}"#,
        );
        let idx = g.referenced_vertex_indices().unwrap();
        assert_eq!(idx.len(), 16);
        assert_eq!(&idx[..8], &[0, 3, 2, 1, 4, 5, 6, 7]);
        assert_eq!(&idx[8..], &[8, 9, 10, 11, 12, 13, 14, 15]);
    }

    #[test]
    fn boundaries_before_type() {
        let g = geom(r#"{"boundaries":[[[4,7,9]]],"lod":"1","type":"MultiSurface"}"#);
        assert_eq!(g.kind, GeometryType::MultiSurface);
        assert_eq!(g.boundaries, Nested::Depth3(vec![vec![vec![4, 7, 9]]]));
        let r = serde_json::from_str::<GeometryObject>(r#"{"boundaries":[[4,7,9]],"type":"MultiSurface"}"#);
        let msg = r.unwrap_err().to_string();
        assert!(msg.contains("3 levels deep"), "{msg}");
    }

    #[test]
    fn remap_direct_substitution() {
        let g = geom(r#"{"type":"MultiSurface","lod":"1","boundaries":[[[4,7,9]]]}"#);
        let map: HashMap<usize, usize> = [(4, 0), (7, 1), (9, 2)].into();
        let r = g.remap_boundaries(&map, None).unwrap();
        assert_eq!(r.boundaries, Nested::Depth3(vec![vec![vec![0, 1, 2]]]));
        assert_eq!(g.remap_boundaries(&Identity, None).unwrap(), g);
    }

    #[test]
    fn remap_missing_index() {
        let g = geom(r#"{"type":"MultiSurface","lod":"1","boundaries":[[[4,7,9]]]}"#);
        let map: HashMap<usize, usize> = [(4, 0), (7, 1)].into();
        assert!(matches!(g.remap_boundaries(&map, None), Err(Error::UnmappedIndex(9))));
    }

    #[test]
    fn textures_and_materials() {
        let g = geom(
            r#"{"type":"MultiSurface","lod":"2","boundaries":[[[0,1,2]],[[2,1,3]]],
                "material":{"irradiation":{"values":[0,null]},"red":{"value":3}},
                "texture":{"winter":{"values":[[[5,10,11,12]],[[null]]]}}}"#,
        );
        g.check_shape().unwrap();
        let mut mats = vec![];
        g.for_each_material_index(|i| mats.push(i));
        assert_eq!(mats, vec![0, 3]);
        let (mut tex, mut uv) = (vec![], vec![]);
        g.for_each_texture_ref(|t| tex.push(t), |u| uv.push(u));
        assert_eq!(tex, vec![5]);
        assert_eq!(uv, vec![10, 11, 12]);

        // remap_boundaries leaves texture indices alone and moves UVs only on request
        let ident: HashMap<usize, usize> = (0..4).map(|i| (i, i)).collect();
        let uvmap: HashMap<usize, usize> = [(10, 0), (11, 1), (12, 2)].into();
        let r = g.remap_boundaries(&ident, None).unwrap();
        assert_eq!(r.texture, g.texture);
        let r = g.remap_boundaries(&ident, Some(&uvmap)).unwrap();
        let vals = &r.texture.as_ref().unwrap()["winter"].values;
        assert_eq!(vals, &Nested::Depth3(vec![vec![vec![Some(5), Some(0), Some(1), Some(2)]], vec![vec![None]]]));
        assert_eq!(r.material, g.material);

        let mut m = g.clone();
        let tmap: HashMap<usize, usize> = [(5, 0)].into();
        m.remap_textures(&tmap).unwrap();
        let mmap: HashMap<usize, usize> = [(0, 1), (3, 0)].into();
        m.remap_materials(&mmap).unwrap();
        let (mut tex, mut mats) = (vec![], vec![]);
        m.for_each_texture_ref(|t| tex.push(t), |_| {});
        m.for_each_material_index(|i| mats.push(i));
        assert_eq!(tex, vec![0]);
        assert_eq!(mats, vec![1, 0]);
    }

    #[test]
    fn incongruent_semantics() {
        let g = geom(
            r#"{"type":"MultiSurface","lod":"2","boundaries":[[[0,1,2]],[[2,1,3]]],
                "semantics":{"surfaces":[{"type":"RoofSurface"}],"values":[0]}}"#,
        );
        assert!(matches!(g.check_shape(), Err(Error::MalformedGeometry { .. })));
    }

    #[test]
    fn texture_ring_length_must_match() {
        let g = geom(
            r#"{"type":"MultiSurface","lod":"2","boundaries":[[[0,1,2]]],
                "texture":{"t":{"values":[[[0,1,2]]]}}}"#,
        );
        assert!(g.check_shape().is_err());
    }

    #[test]
    fn index_limits() {
        let g = geom(
            r#"{"type":"MultiSurface","lod":"2","boundaries":[[[0,1,2]]],
                "semantics":{"surfaces":[{"type":"RoofSurface"}],"values":[0]}}"#,
        );
        let limits = IndexLimits { vertices: 3, ..Default::default() };
        g.check_indices(&limits, "test").unwrap();
        let limits = IndexLimits { vertices: 2, ..Default::default() };
        let e = g.check_indices(&limits, "test").unwrap_err();
        assert!(matches!(e, Error::IndexOutOfRange { kind: IndexKind::Vertex, index: 2, len: 2, .. }));
    }

    #[test]
    fn serializes_type_first_and_compact() {
        let g = geom(r#"{"lod":"2","boundaries":[[0,1]],"type":"MultiLineString","+ext":{"a":1}}"#);
        assert_eq!(
            serde_json::to_string(&g).unwrap(),
            r#"{"type":"MultiLineString","lod":"2","boundaries":[[0,1]],"+ext":{"a":1}}"#
        );
    }
}

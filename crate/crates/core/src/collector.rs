//! Merging a feature stream back into one document.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{
    check_hierarchy, Appearance, CityJSONDocument, CityJSONFeature, StreamHeader, Vertex,
};
use crate::sequencer::FeatureStream;

#[derive(Clone, Debug)]
pub struct Collected {
    pub document: CityJSONDocument,
    pub features: usize,
    /// Feature vertices folded into an existing global vertex: the sum of
    /// feature vertex counts minus the output vertex count.
    pub duplicate_vertices: usize,
}

/// Deduplicating index space keyed by value.
struct Pool<K, T> {
    index: HashMap<K, usize>,
    items: Vec<T>,
}

impl<K: std::hash::Hash + Eq, T> Pool<K, T> {
    fn new() -> Self {
        Pool {
            index: HashMap::new(),
            items: Vec::new(),
        }
    }

    fn insert(&mut self, key: K, item: T) -> usize {
        let next = self.items.len();
        *self.index.entry(key).or_insert_with(|| {
            self.items.push(item);
            next
        })
    }
}

fn non_empty<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

fn value_key(v: &Value) -> String {
    serde_json::to_string(v).expect("JSON value serializes")
}

struct Merger {
    header: StreamHeader,
    templates: usize,
    objects: IndexMap<String, crate::model::CityObject>,
    vertices: Pool<Vertex, Vertex>,
    materials: Pool<String, Value>,
    textures: Pool<String, Value>,
    uvs: Pool<[u64; 2], [f64; 2]>,
    appearance_seen: bool,
    appearance_base: Appearance,
    features: usize,
    feature_vertices: usize,
}

impl Merger {
    fn add(&mut self, mut f: CityJSONFeature) -> Result<()> {
        if f.has_metadata() {
            return Err(Error::FeatureMetadata(f.id));
        }
        f.validate(Some(self.templates))?;
        self.features += 1;
        self.feature_vertices += f.vertices.len();

        let vmap: Vec<usize> = f.vertices.iter().map(|&v| self.vertices.insert(v, v)).collect();
        let (mmap, tmap, uvmap) = match f.appearance.take() {
            None => (Vec::new(), Vec::new(), Vec::new()),
            Some(a) => {
                if !self.appearance_seen {
                    self.appearance_seen = true;
                    self.appearance_base = Appearance {
                        materials: None,
                        textures: None,
                        vertices_texture: None,
                        ..a.clone()
                    };
                }
                let mmap = a
                    .materials
                    .unwrap_or_default()
                    .into_iter()
                    .map(|m| self.materials.insert(value_key(&m), m))
                    .collect();
                let tmap = a
                    .textures
                    .unwrap_or_default()
                    .into_iter()
                    .map(|t| self.textures.insert(value_key(&t), t))
                    .collect();
                let uvmap = a
                    .vertices_texture
                    .unwrap_or_default()
                    .into_iter()
                    .map(|uv| self.uvs.insert([uv[0].to_bits(), uv[1].to_bits()], uv))
                    .collect();
                (mmap, tmap, uvmap)
            }
        };

        for (id, mut co) in f.city_objects {
            if let Some(gs) = co.geometry.as_mut() {
                for g in gs.iter_mut() {
                    let uv = g.texture.as_ref().map(|_| &uvmap as &dyn crate::model::IndexMapping);
                    let mut ng = g.remap_boundaries(&vmap, uv)?;
                    if ng.material.is_some() {
                        ng.remap_materials(&mmap)?;
                    }
                    if ng.texture.is_some() {
                        ng.remap_textures(&tmap)?;
                    }
                    *g = ng;
                }
            }
            if self.objects.contains_key(&id) {
                return Err(Error::DuplicateId(id));
            }
            self.objects.insert(id, co);
        }
        Ok(())
    }

    fn finish(self) -> Result<Collected> {
        check_hierarchy(&self.objects)?;
        let appearance = self.appearance_seen.then(|| {
            Appearance {
                materials: non_empty(self.materials.items),
                textures: non_empty(self.textures.items),
                vertices_texture: non_empty(self.uvs.items),
                ..self.appearance_base
            }
        });
        let vertices = self.vertices.items;
        let h = self.header;
        Ok(Collected {
            duplicate_vertices: self.feature_vertices - vertices.len(),
            features: self.features,
            document: CityJSONDocument {
                transform: h.transform,
                metadata: h.metadata,
                city_objects: self.objects,
                vertices,
                appearance,
                geometry_templates: h.geometry_templates,
                extra: h.extra,
            },
        })
    }
}

/// Reassembles a document from a header and its features. Vertices are
/// deduplicated by exact integer value; materials, textures and texture
/// vertices by value.
pub fn collect<I, F>(stream: FeatureStream<I>) -> Result<Collected>
where
    I: IntoIterator<Item = Result<F>>,
    F: Into<CityJSONFeature>,
{
    let templates = stream.header.template_count();
    let mut m = Merger {
        header: stream.header,
        templates,
        objects: IndexMap::new(),
        vertices: Pool::new(),
        materials: Pool::new(),
        textures: Pool::new(),
        uvs: Pool::new(),
        appearance_seen: false,
        appearance_base: Appearance::default(),
        features: 0,
        feature_vertices: 0,
    };
    for f in stream.features {
        m.add(f?.into())?;
    }
    m.finish()
}

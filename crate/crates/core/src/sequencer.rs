//! Splitting a document into a stream header plus one feature per top-level
//! city object.

use std::collections::HashMap;

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Appearance, CityJSONDocument, CityJSONFeature, CityObject, StreamHeader};

/// A header followed by features. `features` is usually a lazy iterator.
#[derive(Clone, Debug)]
pub struct FeatureStream<I> {
    pub header: StreamHeader,
    pub features: I,
}

impl<I> FeatureStream<I> {
    pub fn new(header: StreamHeader, features: I) -> Self {
        FeatureStream { header, features }
    }

    pub fn map_features<J>(self, f: impl FnOnce(I) -> J) -> FeatureStream<J> {
        FeatureStream {
            header: self.header,
            features: f(self.features),
        }
    }
}

pub fn build_header(doc: &CityJSONDocument) -> Result<StreamHeader> {
    doc.transform.check()?;
    Ok(StreamHeader {
        transform: doc.transform,
        metadata: doc.metadata.clone(),
        geometry_templates: doc.geometry_templates.clone(),
        extra: doc.extra.clone(),
    })
}

/// Ids of the objects without parents, in document order. Fails if the
/// children links contain a cycle or leave an object unreachable from any root.
pub fn root_ids(doc: &CityJSONDocument) -> Result<Vec<&str>> {
    let objects = &doc.city_objects;
    // 0 = unvisited, 1 = on the current path, 2 = done
    let mut colour = vec![0u8; objects.len()];
    let mut roots = Vec::new();
    for (i, (id, co)) in objects.iter().enumerate() {
        if !co.is_root() {
            continue;
        }
        roots.push(id.as_str());
        let mut stack: Vec<(usize, usize)> = vec![(i, 0)];
        colour[i] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let children = objects[node].children_ids();
            if *next < children.len() {
                let child = &children[*next];
                *next += 1;
                let c = objects.get_index_of(child).ok_or_else(|| Error::DanglingReference {
                    object: objects.get_index(node).unwrap().0.clone(),
                    relation: "child",
                    target: child.clone(),
                })?;
                match colour[c] {
                    0 => {
                        colour[c] = 1;
                        stack.push((c, 0));
                    }
                    1 => return Err(Error::Cycle(child.clone())),
                    _ => {}
                }
            } else {
                colour[node] = 2;
                stack.pop();
            }
        }
    }
    if let Some(i) = colour.iter().position(|&c| c == 0) {
        return Err(Error::Cycle(objects.get_index(i).unwrap().0.clone()));
    }
    Ok(roots)
}

/// Ids making up the feature rooted at `root`: the root first, then a
/// depth-first walk over children in listed order. An object with several
/// parents belongs to the feature of its first-listed parent only.
pub fn feature_object_ids<'a>(doc: &'a CityJSONDocument, root: &str) -> Result<Vec<&'a str>> {
    let (root_key, co) = doc
        .city_objects
        .get_key_value(root)
        .ok_or_else(|| Error::UnknownObject(root.to_string()))?;
    if !co.is_root() {
        return Err(Error::NotARoot(root.to_string()));
    }
    let mut out = Vec::new();
    let mut stack = vec![root_key.as_str()];
    while let Some(id) = stack.pop() {
        if out.len() > doc.city_objects.len() {
            return Err(Error::Cycle(id.to_string()));
        }
        out.push(id);
        let co = &doc.city_objects[id];
        for child in co.children_ids().iter().rev() {
            let (key, c) = doc
                .city_objects
                .get_key_value(child.as_str())
                .ok_or_else(|| Error::DanglingReference {
                    object: id.to_string(),
                    relation: "child",
                    target: child.clone(),
                })?;
            if c.parent_ids().first().map(String::as_str) == Some(id) {
                stack.push(key.as_str());
            }
        }
    }
    Ok(out)
}

/// First-appearance index assignment.
#[derive(Default)]
struct LocalIndex {
    map: HashMap<usize, usize>,
    order: Vec<usize>,
}

impl LocalIndex {
    fn add(&mut self, global: usize) {
        let next = self.order.len();
        self.map.entry(global).or_insert_with(|| {
            self.order.push(global);
            next
        });
    }
}

fn pick<T: Clone>(source: Option<&Vec<T>>, order: &[usize]) -> Option<Vec<T>> {
    let source = source?;
    if order.is_empty() {
        return None;
    }
    Some(order.iter().map(|&i| source[i].clone()).collect())
}

/// Builds the self-contained feature rooted at `root`, re-indexing vertices,
/// materials, textures and texture vertices by first appearance.
pub fn extract_feature(doc: &CityJSONDocument, root: &str) -> Result<CityJSONFeature> {
    let ids = feature_object_ids(doc, root)?;
    let mut vertices = LocalIndex::default();
    let mut materials = LocalIndex::default();
    let mut textures = LocalIndex::default();
    let mut uvs = LocalIndex::default();
    for &id in &ids {
        for g in doc.city_objects[id].geometries() {
            g.for_each_vertex_index(|i| vertices.add(i));
            if doc.appearance.is_some() {
                g.for_each_material_index(|i| materials.add(i));
                g.for_each_texture_ref(|t| textures.add(t), |u| uvs.add(u));
            }
        }
    }

    let mut city_objects = IndexMap::with_capacity(ids.len());
    for &id in &ids {
        let src = &doc.city_objects[id];
        let geometry = match &src.geometry {
            None => None,
            Some(gs) => {
                let mut out = Vec::with_capacity(gs.len());
                for g in gs {
                    let uv_map = g.texture.as_ref().map(|_| &uvs.map as &dyn crate::model::IndexMapping);
                    let mut ng = g.remap_boundaries(&vertices.map, uv_map)?;
                    if ng.material.is_some() {
                        ng.remap_materials(&materials.map)?;
                    }
                    if ng.texture.is_some() {
                        ng.remap_textures(&textures.map)?;
                    }
                    out.push(ng);
                }
                Some(out)
            }
        };
        city_objects.insert(
            id.to_string(),
            CityObject {
                geometry,
                ..clone_without_geometry(src)
            },
        );
    }

    let appearance = doc.appearance.as_ref().and_then(|a| {
        let local = Appearance {
            materials: pick(a.materials.as_ref(), &materials.order),
            textures: pick(a.textures.as_ref(), &textures.order),
            vertices_texture: pick(a.vertices_texture.as_ref(), &uvs.order),
            default_theme_texture: a.default_theme_texture.clone(),
            default_theme_material: a.default_theme_material.clone(),
            extra: a.extra.clone(),
        };
        (!local.is_empty()).then_some(local)
    });

    Ok(CityJSONFeature {
        id: root.to_string(),
        city_objects,
        vertices: vertices.order.iter().map(|&i| doc.vertices[i]).collect(),
        appearance,
        extra: Default::default(),
    })
}

fn clone_without_geometry(co: &CityObject) -> CityObject {
    CityObject {
        kind: co.kind.clone(),
        attributes: co.attributes.clone(),
        children: co.children.clone(),
        parents: co.parents.clone(),
        geographical_extent: co.geographical_extent,
        geometry: None,
        extra: co.extra.clone(),
    }
}

/// Facts about a conversion that the stream itself cannot express.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CatSummary {
    pub features: usize,
    /// Global vertices referenced by no geometry; they are not carried over.
    pub unreferenced_vertices: usize,
    /// Objects with more than one parent. When non-empty the stream cannot be
    /// collected back into the original document.
    pub multi_parent: Vec<String>,
}

impl CatSummary {
    pub fn is_invertible(&self) -> bool {
        self.multi_parent.is_empty()
    }
}

/// Lazy feature iterator over a document.
pub struct Cat<'a> {
    doc: &'a CityJSONDocument,
    roots: std::vec::IntoIter<&'a str>,
}

impl Iterator for Cat<'_> {
    type Item = Result<CityJSONFeature>;

    fn next(&mut self) -> Option<Self::Item> {
        let root = self.roots.next()?;
        Some(extract_feature(self.doc, root))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.roots.size_hint()
    }
}

impl ExactSizeIterator for Cat<'_> {}

/// Header plus one lazily built feature per root, in document order.
pub fn cat(doc: &CityJSONDocument) -> Result<(FeatureStream<Cat<'_>>, CatSummary)> {
    let header = build_header(doc)?;
    let roots = root_ids(doc)?;
    let mut used = vec![false; doc.vertices.len()];
    for co in doc.city_objects.values() {
        for g in co.geometries() {
            g.for_each_vertex_index(|i| {
                if let Some(u) = used.get_mut(i) {
                    *u = true
                }
            });
        }
    }
    let summary = CatSummary {
        features: roots.len(),
        unreferenced_vertices: used.iter().filter(|u| !**u).count(),
        multi_parent: doc
            .city_objects
            .iter()
            .filter(|(_, co)| co.parent_ids().len() > 1)
            .map(|(id, _)| id.clone())
            .collect(),
    };
    let features = Cat {
        doc,
        roots: roots.into_iter(),
    };
    Ok((FeatureStream::new(header, features), summary))
}

/// All features at once, extracted in parallel and returned in document order.
pub fn extract_features(doc: &CityJSONDocument) -> Result<Vec<CityJSONFeature>> {
    let roots = root_ids(doc)?;
    roots.par_iter().map(|r| extract_feature(doc, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_document;

    fn doc(objects: &str, vertices: &str) -> CityJSONDocument {
        parse_document(&format!(
            r#"{{"type":"CityJSON","version":"2.0","transform":{{"scale":[1,1,1],"translate":[0,0,0]}},"CityObjects":{objects},"vertices":{vertices}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn roots_of_a_flattened_hierarchy() {
        let d = doc(
            r#"{"id-1":{"type":"Building","children":["id-2","id-3"]},
                "id-2":{"type":"BuildingPart","parents":["id-1"]},
                "id-3":{"type":"BuildingInstallation","parents":["id-1"]},
                "id-77":{"type":"Building"}}"#,
            "[]",
        );
        assert_eq!(root_ids(&d).unwrap(), ["id-1", "id-77"]);
    }

    #[test]
    fn three_level_hierarchy() {
        let d = doc(
            r#"{"i":{"type":"BuildingInstallation","parents":["p"]},
                "p":{"type":"BuildingPart","parents":["b"],"children":["i"]},
                "b":{"type":"Building","children":["p"]}}"#,
            "[]",
        );
        assert_eq!(root_ids(&d).unwrap(), ["b"]);
        assert_eq!(feature_object_ids(&d, "b").unwrap(), ["b", "p", "i"]);
        assert!(matches!(extract_feature(&d, "p"), Err(Error::NotARoot(_))));
        assert!(matches!(extract_feature(&d, "zz"), Err(Error::UnknownObject(_))));
    }

    #[test]
    fn cycle_detected() {
        let d = doc(
            r#"{"a":{"type":"BuildingPart","parents":["b"],"children":["b"]},
                "b":{"type":"BuildingPart","parents":["a"],"children":["a"]}}"#,
            "[]",
        );
        assert!(matches!(root_ids(&d), Err(Error::Cycle(_))));
        let d = doc(
            r#"{"r":{"type":"Building","children":["a"]},
                "a":{"type":"BuildingPart","parents":["r","b"],"children":["b"]},
                "b":{"type":"BuildingPart","parents":["a"],"children":["a"]}}"#,
            "[]",
        );
        assert!(matches!(root_ids(&d), Err(Error::Cycle(_))));
    }

    #[test]
    fn dense_reindexing() {
        let mut verts: Vec<String> = (0..100).map(|i| format!("[{i},{i},{i}]")).collect();
        for i in 0..8 {
            verts.push(format!("[{},{},{}]", i & 1, (i >> 1) & 1, (i >> 2) & 1));
        }
        let d = doc(
            r#"{"c":{"type":"Building","geometry":[{"type":"Solid","lod":"1","boundaries":[[
                [[100,102,103,101]],[[104,105,107,106]],[[100,101,105,104]],
                [[101,103,107,105]],[[103,102,106,107]],[[102,100,104,106]]]]}]}}"#,
            &format!("[{}]", verts.join(",")),
        );
        let f = extract_feature(&d, "c").unwrap();
        assert_eq!(f.vertices.len(), 8);
        let idx = f.city_objects["c"].geometries()[0].referenced_vertex_indices().unwrap();
        assert_eq!(idx, (0..8).collect::<Vec<_>>());
        f.validate(Some(0)).unwrap();
    }

    #[test]
    fn cat_counts_and_summary() {
        let d = doc(
            r#"{"a":{"type":"Building","geometry":[{"type":"MultiPoint","boundaries":[0,1]}]},
                "b":{"type":"Building","geometry":[{"type":"MultiPoint","boundaries":[1,2]}]}}"#,
            "[[0,0,0],[1,1,1],[2,2,2],[9,9,9]]",
        );
        let (stream, summary) = cat(&d).unwrap();
        let features: Vec<_> = stream.features.collect::<Result<_>>().unwrap();
        assert_eq!(features.len(), 2);
        assert_eq!(features.iter().map(|f| f.vertices.len()).sum::<usize>(), 4);
        assert_eq!(summary.unreferenced_vertices, 1);
        assert!(summary.is_invertible());
        assert_eq!(extract_features(&d).unwrap(), features);
    }

    #[test]
    fn multi_parent_goes_to_first_parent() {
        let d = doc(
            r#"{"a":{"type":"Building","children":["s"]},
                "b":{"type":"Building","children":["s"]},
                "s":{"type":"BuildingPart","parents":["a","b"]}}"#,
            "[]",
        );
        let (stream, summary) = cat(&d).unwrap();
        assert_eq!(summary.multi_parent, ["s"]);
        let fs: Vec<_> = stream.features.collect::<Result<_>>().unwrap();
        assert!(fs[0].city_objects.contains_key("s"));
        assert!(!fs[1].city_objects.contains_key("s"));
        assert!(fs[1].validate(None).is_err());
    }

    #[test]
    fn empty_document_gives_header_only() {
        let d = doc("{}", "[]");
        let (stream, summary) = cat(&d).unwrap();
        assert_eq!(stream.features.count(), 0);
        assert_eq!(summary.features, 0);
        assert!(!stream.header.to_json().contains("geometry-templates"));
    }
}

//! Dataset statistics: sizes in both encodings, compression factor, shared
//! vertices and geometry-type counts.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CityJSONDocument, CityJSONFeature, CityObject};
use crate::sequencer::{cat, feature_object_ids, root_ids};
use crate::stream::{write_json_line, WriteLine};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DatasetStats {
    /// City objects of every level, children included.
    pub object_count: usize,
    /// Top-level objects, one per feature.
    pub feature_count: usize,
    /// Length of the global vertex array for a document; sum of the feature
    /// vertex counts for a stream.
    pub vertex_total: usize,
    pub largest_feature_vertices: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shared_vertex_percentage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size_cityjson: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size_cityjsonseq: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compression_factor: Option<f64>,
    pub geometry_type_counts: BTreeMap<String, usize>,
}

/// (size_cj - size_seq) / size_cj. Positive when the stream is smaller.
pub fn compression_factor(size_cj: u64, size_seq: u64) -> Result<f64> {
    if size_cj == 0 {
        return Err(Error::ZeroSize);
    }
    Ok((size_cj as f64 - size_seq as f64) / size_cj as f64)
}

/// Percentage of global vertices used by the geometries of two or more
/// top-level features.
pub fn shared_vertex_percentage(doc: &CityJSONDocument) -> Result<f64> {
    if doc.vertices.is_empty() {
        return Ok(0.0);
    }
    const NONE: usize = usize::MAX;
    let mut last = vec![NONE; doc.vertices.len()];
    let mut users = vec![0u8; doc.vertices.len()];
    for (f, root) in root_ids(doc)?.into_iter().enumerate() {
        for id in feature_object_ids(doc, root)? {
            for g in doc.city_objects[id].geometries() {
                g.for_each_vertex_index(|i| {
                    if last[i] != f {
                        last[i] = f;
                        users[i] = users[i].saturating_add(1);
                    }
                });
            }
        }
    }
    let shared = users.iter().filter(|&&u| u >= 2).count();
    Ok(100.0 * shared as f64 / doc.vertices.len() as f64)
}

pub fn count_geometry_types<'a>(
    objects: impl IntoIterator<Item = &'a CityObject>,
    counts: &mut BTreeMap<String, usize>,
) {
    for co in objects {
        for g in co.geometries() {
            *counts.entry(g.kind.as_str().to_string()).or_default() += 1;
        }
    }
}

/// Single pass over features, one at a time. Fills the counting fields only.
pub fn stream_stats<I, T>(features: I) -> Result<DatasetStats>
where
    I: IntoIterator<Item = Result<T>>,
    T: Borrow<CityJSONFeature>,
{
    let mut s = DatasetStats::default();
    for f in features {
        let f = f?;
        let f = f.borrow();
        s.feature_count += 1;
        s.object_count += f.city_objects.len();
        s.vertex_total += f.vertices.len();
        s.largest_feature_vertices = s.largest_feature_vertices.max(f.vertices.len());
        count_geometry_types(f.city_objects.values(), &mut s.geometry_type_counts);
    }
    Ok(s)
}

/// Byte-counting sink.
#[derive(Debug, Default, Clone, Copy)]
pub struct CountingWriter {
    pub bytes: u64,
}

impl Write for CountingWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.bytes += buf.len() as u64;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Bytes of the compact document followed by LF.
pub fn document_size(doc: &CityJSONDocument) -> u64 {
    let mut w = CountingWriter::default();
    write_json_line(&mut w, doc).expect("counting never fails");
    w.bytes
}

/// Sizes of both encodings, computed without materializing either.
pub fn encoded_sizes(doc: &CityJSONDocument) -> Result<(u64, u64)> {
    let (stream, _) = cat(doc)?;
    let mut w = CountingWriter::default();
    stream.write_to(&mut w)?;
    Ok((document_size(doc), w.bytes))
}

/// Everything measurable on a whole document, including the size of its
/// stream encoding.
pub fn document_stats(doc: &CityJSONDocument) -> Result<DatasetStats> {
    let (stream, _) = cat(doc)?;
    let mut w = CountingWriter::default();
    stream.header.write_line(&mut w)?;
    let mut largest = 0;
    for f in stream.features {
        let f = f?;
        largest = largest.max(f.vertices.len());
        f.write_line(&mut w)?;
    }
    let size_cj = document_size(doc);
    let mut counts = BTreeMap::new();
    count_geometry_types(doc.city_objects.values(), &mut counts);
    Ok(DatasetStats {
        object_count: doc.city_objects.len(),
        feature_count: root_ids(doc)?.len(),
        vertex_total: doc.vertices.len(),
        largest_feature_vertices: largest,
        shared_vertex_percentage: Some(shared_vertex_percentage(doc)?),
        size_cityjson: Some(size_cj),
        size_cityjsonseq: Some(w.bytes),
        compression_factor: Some(compression_factor(size_cj, w.bytes)?),
        geometry_type_counts: counts,
    })
}

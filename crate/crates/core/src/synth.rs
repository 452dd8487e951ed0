//! Synthetic datasets of cuboid buildings.

use std::collections::HashMap;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map};

use crate::error::{Error, Result};
use crate::model::{
    CityJSONDocument, CityObject, GeometryObject, GeometryType, Nested, TransformSpec, Vertex,
};
use crate::stats::shared_vertex_percentage;

pub const FOOTPRINT_MIN: f64 = 5.0;
pub const FOOTPRINT_MAX: f64 = 20.0;
pub const HEIGHT_MIN: f64 = 3.0;
pub const HEIGHT_MAX: f64 = 30.0;
/// Free space between disconnected buildings, in metres.
pub const GAP: f64 = 5.0;
/// Quantization step: millimetres.
pub const SCALE: f64 = 0.001;
const TRANSLATE: [f64; 3] = [85_000.0, 446_000.0, 0.0];
const CRS: &str = "https://www.opengis.net/def/crs/EPSG/0/7415";

/// A side length giving roughly one 30 m cell per building.
pub fn default_extent(n: usize) -> f64 {
    (n.max(1) as f64).sqrt() * 30.0
}

fn mm(metres: f64) -> i64 {
    (metres / SCALE).round() as i64
}

/// Accumulates cuboids into a document, sharing coincident vertices.
struct Builder {
    vertices: Vec<Vertex>,
    pool: HashMap<Vertex, usize>,
    objects: IndexMap<String, CityObject>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder {
            vertices: Vec::with_capacity(8 * n),
            pool: HashMap::with_capacity(8 * n),
            objects: IndexMap::with_capacity(n),
        }
    }

    fn vertex(&mut self, x: i64, y: i64, z: i64) -> usize {
        let v = Vertex { x, y, z };
        let next = self.vertices.len();
        *self.pool.entry(v).or_insert_with(|| {
            self.vertices.push(v);
            next
        })
    }

    /// Cuboid with corners (x0,y0,0) and (x1,y1,h), all in millimetres.
    fn cuboid(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, h: i64) {
        let corners = [
            (x0, y0, 0),
            (x1, y0, 0),
            (x1, y1, 0),
            (x0, y1, 0),
            (x0, y0, h),
            (x1, y0, h),
            (x1, y1, h),
            (x0, y1, h),
        ];
        let v: Vec<usize> = corners.iter().map(|&(x, y, z)| self.vertex(x, y, z)).collect();
        let faces = [
            [0, 3, 2, 1],
            [4, 5, 6, 7],
            [0, 1, 5, 4],
            [1, 2, 6, 5],
            [2, 3, 7, 6],
            [3, 0, 4, 7],
        ];
        let shell = faces.iter().map(|f| vec![f.iter().map(|&i| v[i]).collect()]).collect();
        let g = GeometryObject::new(GeometryType::Solid, Some("1"), Nested::Depth4(vec![shell]));
        let mut co = CityObject::new("Building");
        co.geometry = Some(vec![g]);
        self.objects.insert(format!("b{}", self.objects.len()), co);
    }

    fn finish(self) -> CityJSONDocument {
        let mut metadata = Map::new();
        metadata.insert("referenceSystem".into(), json!(CRS));
        let mut doc = CityJSONDocument::new(
            TransformSpec::new([SCALE; 3], TRANSLATE).expect("constant transform is valid"),
        );
        doc.metadata = Some(metadata);
        doc.city_objects = self.objects;
        doc.vertices = self.vertices;
        doc
    }
}

fn check_common(n: usize, extent: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("building count must be at least 1".into()));
    }
    if !(extent.is_finite() && extent > 0.0) {
        return Err(Error::InvalidParameter(format!("extent must be positive, got {extent}")));
    }
    Ok(())
}

/// `n` disconnected cuboids, one per cell of a square grid covering
/// `extent` × `extent` metres, jittered inside their cell.
pub fn generate_random(n: usize, extent: f64, seed: u64) -> Result<CityJSONDocument> {
    check_common(n, extent)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (n as f64).sqrt().ceil() as usize;
    let cell = extent / cols as f64;
    // keep a margin so neighbours never touch
    let room = cell * 0.9;
    let hi = FOOTPRINT_MAX.min(room);
    let lo = FOOTPRINT_MIN.min(hi);
    let mut b = Builder::new(n);
    for i in 0..n {
        let (cx, cy) = ((i % cols) as f64 * cell, (i / cols) as f64 * cell);
        let w = rng.random_range(lo..=hi);
        let d = rng.random_range(lo..=hi);
        let h = rng.random_range(HEIGHT_MIN..=HEIGHT_MAX);
        let margin = cell * 0.05;
        let x = cx + margin + rng.random_range(0.0..=(room - w));
        let y = cy + margin + rng.random_range(0.0..=(room - d));
        let (x0, y0) = (mm(x), mm(y));
        b.cuboid(x0, y0, x0 + mm(w).max(1), y0 + mm(d).max(1), mm(h).max(1));
    }
    Ok(b.finish())
}

#[derive(Clone, Debug)]
pub struct AdjacentDataset {
    pub document: CityJSONDocument,
    /// Shared-vertex fraction measured on the generated document, in [0, 1].
    pub achieved_shared_fraction: f64,
    pub shared_walls: usize,
}

/// Shared fraction of `rows` terraced rows of `k` cuboids among `n` buildings.
fn row_fraction(n: usize, k: usize, rows: usize) -> f64 {
    let shared = 4 * rows * (k - 1);
    let total = rows * (4 * k + 4) + 8 * (n - rows * k);
    shared as f64 / total as f64
}

/// Row length and row count whose shared fraction is closest to `target`.
fn plan_rows(n: usize, target: f64) -> (usize, usize, f64) {
    let mut best = (2, 0, f64::INFINITY);
    for k in 2..=n {
        let max_rows = n / k;
        // fraction grows with the row count
        let (mut lo, mut hi) = (0, max_rows);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if row_fraction(n, k, mid) < target {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        for r in [lo.saturating_sub(1), lo] {
            let err = (row_fraction(n, k, r) - target).abs();
            if err < best.2 {
                best = (k, r, err);
            }
        }
        if best.2 <= 0.002 {
            break;
        }
    }
    best
}

/// `n` cuboids where terraced rows of equal depth and height share wall
/// vertices exactly, tuned so that roughly `shared_fraction` of all vertices
/// are shared. The remaining buildings stand alone. Items are shelf-packed
/// left to right in strips `extent` metres wide.
pub fn generate_adjacent(n: usize, extent: f64, shared_fraction: f64, seed: u64) -> Result<AdjacentDataset> {
    check_common(n, extent)?;
    if !(0.0..=1.0).contains(&shared_fraction) {
        return Err(Error::InvalidParameter(format!(
            "shared fraction must lie in [0, 1], got {shared_fraction}"
        )));
    }
    if shared_fraction == 0.0 {
        let document = generate_random(n, extent, seed)?;
        let achieved = shared_vertex_percentage(&document)? / 100.0;
        return Ok(AdjacentDataset {
            document,
            achieved_shared_fraction: achieved,
            shared_walls: 0,
        });
    }
    if n < 2 {
        return Err(Error::UnreachableSharedFraction {
            target: shared_fraction,
            buildings: n,
            closest: 0.0,
        });
    }
    let (k, rows, err) = plan_rows(n, shared_fraction);
    if err > 0.02 {
        return Err(Error::UnreachableSharedFraction {
            target: shared_fraction,
            buildings: n,
            closest: row_fraction(n, k, rows),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new(n);
    let (mut x, mut y, mut shelf_depth) = (0i64, 0i64, 0i64);
    let gap = mm(GAP);
    let width = mm(extent);
    let singles = n - rows * k;
    for item in 0..rows + singles {
        let len = if item < rows { k } else { 1 };
        let widths: Vec<i64> = (0..len)
            .map(|_| mm(rng.random_range(FOOTPRINT_MIN..=FOOTPRINT_MAX)))
            .collect();
        let depth = mm(rng.random_range(FOOTPRINT_MIN..=FOOTPRINT_MAX));
        let height = mm(rng.random_range(HEIGHT_MIN..=HEIGHT_MAX));
        let total: i64 = widths.iter().sum();
        if x > 0 && x + total > width {
            x = 0;
            y += shelf_depth + gap;
            shelf_depth = 0;
        }
        let mut x0 = x;
        for w in widths {
            b.cuboid(x0, y, x0 + w, y + depth, height);
            x0 += w;
        }
        x = x0 + gap;
        shelf_depth = shelf_depth.max(depth);
    }
    let document = b.finish();
    let achieved = shared_vertex_percentage(&document)? / 100.0;
    Ok(AdjacentDataset {
        document,
        achieved_shared_fraction: achieved,
        shared_walls: rows * (k - 1),
    })
}

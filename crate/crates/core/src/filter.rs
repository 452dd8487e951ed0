//! Feature filters. Both keep features untouched and pass the header through.

use std::borrow::Borrow;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{CityJSONFeature, TransformSpec};

/// Axis-aligned 2D box in CRS units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bbox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bbox {
    pub fn new(minx: f64, miny: f64, maxx: f64, maxy: f64) -> Result<Self> {
        let ok = [minx, miny, maxx, maxy].iter().all(|v| !v.is_nan()) && minx <= maxx && miny <= maxy;
        if !ok {
            return Err(Error::InvalidBbox);
        }
        Ok(Bbox {
            min: [minx, miny],
            max: [maxx, maxy],
        })
    }

    /// Closed-interval overlap: touching edges count as intersecting.
    pub fn intersects(&self, other: &Bbox) -> bool {
        self.min[0] <= other.max[0]
            && other.min[0] <= self.max[0]
            && self.min[1] <= other.max[1]
            && other.min[1] <= self.max[1]
    }
}

/// 2D extent of a feature's dequantized vertices; `None` when it has none.
pub fn feature_bbox(f: &CityJSONFeature, t: &TransformSpec) -> Option<Bbox> {
    let mut it = f.vertices.iter();
    let first = t.dequantize(*it.next()?);
    let mut b = Bbox {
        min: [first[0], first[1]],
        max: [first[0], first[1]],
    };
    for &v in it {
        let p = t.dequantize(v);
        b.min = [b.min[0].min(p[0]), b.min[1].min(p[1])];
        b.max = [b.max[0].max(p[0]), b.max[1].max(p[1])];
    }
    Some(b)
}

/// Keeps features whose 2D extent intersects `bbox`. Features without
/// vertices have no extent and are dropped. Errors pass through.
pub fn filter_bbox<I, T>(features: I, transform: TransformSpec, bbox: Bbox) -> impl Iterator<Item = Result<T>>
where
    I: IntoIterator<Item = Result<T>>,
    T: Borrow<CityJSONFeature>,
{
    features.into_iter().filter(move |r| match r {
        Ok(f) => feature_bbox(f.borrow(), &transform).is_some_and(|b| b.intersects(&bbox)),
        Err(_) => true,
    })
}

/// Keeps each feature independently with probability 1/`keep_one_in`. A
/// ChaCha8 generator seeded with `seed` draws one u64 per feature; the
/// feature is kept when the draw is divisible by `keep_one_in`.
pub fn filter_random<I, T>(features: I, keep_one_in: u64, seed: u64) -> Result<impl Iterator<Item = Result<T>>>
where
    I: IntoIterator<Item = Result<T>>,
{
    if keep_one_in == 0 {
        return Err(Error::InvalidSampling);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(features.into_iter().filter(move |r| match r {
        Ok(_) => rng.next_u64() % keep_one_in == 0,
        Err(_) => true,
    }))
}

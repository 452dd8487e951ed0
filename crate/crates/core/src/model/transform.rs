use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Quantization parameters: real coordinate = integer * scale + translate, per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub scale: [f64; 3],
    pub translate: [f64; 3],
}

impl TransformSpec {
    pub fn new(scale: [f64; 3], translate: [f64; 3]) -> Result<Self> {
        let t = TransformSpec { scale, translate };
        t.check()?;
        Ok(t)
    }

    pub fn identity() -> Self {
        TransformSpec {
            scale: [1.0; 3],
            translate: [0.0; 3],
        }
    }

    pub fn check(&self) -> Result<()> {
        if let Some(s) = self.scale.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidTransform(format!(
                "scale components must be strictly positive, found {s}"
            )));
        }
        if self.translate.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidTransform("translate must be finite".into()));
        }
        Ok(())
    }

    pub fn dequantize(&self, v: Vertex) -> [f64; 3] {
        dequantize(v, self)
    }

    pub fn quantize(&self, p: [f64; 3]) -> Vertex {
        quantize(p, self)
    }
}

/// A quantized vertex. Exact integer equality is vertex identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl Vertex {
    pub const fn new(x: i64, y: i64, z: i64) -> Self {
        Vertex { x, y, z }
    }
}

impl From<[i64; 3]> for Vertex {
    fn from([x, y, z]: [i64; 3]) -> Self {
        Vertex { x, y, z }
    }
}

impl From<Vertex> for [i64; 3] {
    fn from(v: Vertex) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.z].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        <[i64; 3]>::deserialize(deserializer).map(Vertex::from)
    }
}

pub fn dequantize(v: Vertex, t: &TransformSpec) -> [f64; 3] {
    [
        v.x as f64 * t.scale[0] + t.translate[0],
        v.y as f64 * t.scale[1] + t.translate[1],
        v.z as f64 * t.scale[2] + t.translate[2],
    ]
}

/// Inverse of [`dequantize`], rounding to the nearest integer grid point.
pub fn quantize(p: [f64; 3], t: &TransformSpec) -> Vertex {
    let q = |i: usize| ((p[i] - t.translate[i]) / t.scale[i]).round() as i64;
    Vertex::new(q(0), q(1), q(2))
}

//! Data model for CityJSON documents and CityJSONSeq streams.

mod appearance;
mod cityobject;
mod document;
mod feature;
mod geometry;
mod nested;
mod parts;
mod transform;

pub use appearance::{Appearance, GeometryTemplates};
pub use cityobject::CityObject;
pub use document::{
    parse_document, read_document, CityJSONDocument, ACCEPTED_VERSIONS, CITYJSON,
    CITYJSON_FEATURE, VERSION,
};
pub use feature::{parse_feature, parse_header, CityJSONFeature, StreamHeader};
pub use geometry::{
    GeometryObject, GeometryType, Identity, IndexLimits, IndexMapping, MaterialTheme, Semantics,
    TextureTheme,
};
pub use nested::Nested;
pub use transform::{dequantize, quantize, TransformSpec, Vertex};
pub(crate) use parts::ObjectParts;
pub(crate) use document::check_hierarchy;

use std::fmt;

use crate::model::GeometryType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which index space an out-of-range index points into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Vertex,
    Material,
    Texture,
    TextureVertex,
    Template,
    TemplateVertex,
    SemanticSurface,
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IndexKind::Vertex => "vertex",
            IndexKind::Material => "material",
            IndexKind::Texture => "texture",
            IndexKind::TextureVertex => "texture vertex",
            IndexKind::Template => "geometry template",
            IndexKind::TemplateVertex => "template vertex",
            IndexKind::SemanticSurface => "semantic surface",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("expected \"type\": \"{expected}\", found {}", found.as_deref().map_or("nothing".to_string(), |t| format!("\"{t}\"")))]
    WrongType {
        expected: &'static str,
        found: Option<String>,
    },

    #[error("unsupported CityJSON version {0:?} (accepted: \"1.1\", \"2.0\")")]
    UnsupportedVersion(Option<String>),

    #[error("missing \"transform\"")]
    MissingTransform,

    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    #[error("{kind} index {index} out of range (length {len}) in {context}")]
    IndexOutOfRange {
        kind: IndexKind,
        index: usize,
        len: usize,
        context: String,
    },

    #[error("malformed {geometry} geometry: {reason}")]
    MalformedGeometry {
        geometry: GeometryType,
        reason: String,
    },

    #[error("index {0} is missing from the index mapping")]
    UnmappedIndex(usize),

    #[error("city object {0:?} not found")]
    UnknownObject(String),

    #[error("city object {0:?} has parents and cannot be the root of a feature")]
    NotARoot(String),

    #[error("cyclic parent/child graph involving city object {0:?}")]
    Cycle(String),

    #[error("city object {object:?} lists unknown {relation} {target:?}")]
    DanglingReference {
        object: String,
        relation: &'static str,
        target: String,
    },

    #[error("{parent:?} and {child:?} are not listed symmetrically as parent and child")]
    AsymmetricLink { parent: String, child: String },

    #[error("duplicate city object id {0:?}")]
    DuplicateId(String),

    #[error("stream header must have empty \"CityObjects\" and \"vertices\"")]
    HeaderNotEmpty,

    #[error("stream header must carry \"CityObjects\" and \"vertices\" (both empty)")]
    HeaderIncomplete,

    #[error("invalid CityJSONFeature: {0}")]
    InvalidFeature(String),

    #[error("vertex {index} of feature {feature:?} is not referenced by any geometry")]
    OrphanVertex { feature: String, index: usize },

    #[error("CityJSONFeature {0:?} carries \"metadata\"; metadata belongs to the stream header")]
    FeatureMetadata(String),

    #[error("stream is empty: the first line must be a CityJSON header")]
    EmptyStream,

    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid bounding box: min must not exceed max on either axis")]
    InvalidBbox,

    #[error("keep_one_in must be at least 1")]
    InvalidSampling,

    #[error("compression factor is undefined for a zero-byte CityJSON size")]
    ZeroSize,

    #[error("shared-vertex fraction {target} is not reachable with {buildings} buildings (closest achievable {closest:.4})")]
    UnreachableSharedFraction {
        target: f64,
        buildings: usize,
        closest: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geometry-type counts differ between access modes: whole {whole:?}, streaming {streaming:?}")]
    ModeMismatch { whole: String, streaming: String },
}

impl Error {
    pub(crate) fn at_line(self, line: usize) -> Error {
        match self {
            e @ Error::Line { .. } => e,
            e => Error::Line {
                line,
                source: Box::new(e),
            },
        }
    }

    /// Line number of the offending stream line, when the error came from a stream.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::Line { line, .. } => Some(*line),
            _ => None,
        }
    }

    /// True when the error is caused by the input data rather than the environment.
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Error::Io(_) => false,
            Error::Line { source, .. } => source.is_invalid_input(),
            _ => true,
        }
    }
}

//! Conversion between CityJSON documents and CityJSONSeq streams, plus
//! filtering, validation, synthetic data and size/memory statistics.

pub mod bench;
pub mod collector;
pub mod error;
pub mod filter;
pub mod model;
pub mod sequencer;
pub mod stats;
pub mod stream;
pub mod synth;
pub mod validate;

pub use bench::{bench_access_modes, bench_size_sweep, MemoryProbe, PeakAlloc, SweepMode, SweepRow};
pub use collector::{collect, Collected};
pub use error::{Error, IndexKind, Result};
pub use filter::{feature_bbox, filter_bbox, filter_random, Bbox};
pub use model::*;
pub use sequencer::{build_header, cat, extract_feature, root_ids, CatSummary, FeatureStream};
pub use stats::{compression_factor, document_stats, shared_vertex_percentage, stream_stats, DatasetStats};
pub use stream::{read_stream, write_json_line, FeatureLine, WriteLine};
pub use synth::{generate_adjacent, generate_random, AdjacentDataset};
pub use validate::{validate_stream, ValidationReport, Violation};

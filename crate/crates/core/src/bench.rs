//! Size sweeps and the whole-document vs streaming access comparison.

use std::alloc::{GlobalAlloc, Layout, System};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::parse_document;
use crate::stats::{compression_factor, count_geometry_types, encoded_sizes, stream_stats};
use crate::stream::read_stream;
use crate::synth::{default_extent, generate_adjacent, generate_random};

/// Source of a peak-memory figure.
pub trait MemoryProbe: Sync {
    /// Starts a new measurement window.
    fn reset_peak(&self);
    /// Highest number of bytes in use since the last reset, minus what was
    /// in use at the reset.
    fn peak_since_reset(&self) -> usize;
}

/// Probe for builds without a counting allocator. Always reports 0.
pub struct NoProbe;

impl MemoryProbe for NoProbe {
    fn reset_peak(&self) {}
    fn peak_since_reset(&self) -> usize {
        0
    }
}

/// Allocation high-water mark tracker wrapping the system allocator.
/// Install with `#[global_allocator] static A: PeakAlloc = PeakAlloc::new();`.
pub struct PeakAlloc {
    current: AtomicUsize,
    peak: AtomicUsize,
    base: AtomicUsize,
}

impl PeakAlloc {
    pub const fn new() -> Self {
        PeakAlloc {
            current: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
            base: AtomicUsize::new(0),
        }
    }

    pub fn current(&self) -> usize {
        self.current.load(Ordering::Relaxed)
    }

    fn grow(&self, n: usize) {
        let now = self.current.fetch_add(n, Ordering::Relaxed) + n;
        self.peak.fetch_max(now, Ordering::Relaxed);
    }

    fn shrink(&self, n: usize) {
        self.current.fetch_sub(n, Ordering::Relaxed);
    }
}

impl Default for PeakAlloc {
    fn default() -> Self {
        Self::new()
    }
}

unsafe impl GlobalAlloc for PeakAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            self.grow(layout.size());
        }
        p
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc_zeroed(layout);
        if !p.is_null() {
            self.grow(layout.size());
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        self.shrink(layout.size());
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = System.realloc(ptr, layout, new_size);
        if !p.is_null() {
            if new_size >= layout.size() {
                self.grow(new_size - layout.size());
            } else {
                self.shrink(layout.size() - new_size);
            }
        }
        p
    }
}

impl MemoryProbe for PeakAlloc {
    fn reset_peak(&self) {
        let now = self.current();
        self.base.store(now, Ordering::Relaxed);
        self.peak.store(now, Ordering::Relaxed);
    }

    fn peak_since_reset(&self) -> usize {
        self.peak
            .load(Ordering::Relaxed)
            .saturating_sub(self.base.load(Ordering::Relaxed))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeResult {
    pub peak_bytes: usize,
    pub elapsed: Duration,
    pub geometry_type_counts: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccessModes {
    pub whole: ModeResult,
    pub streaming: ModeResult,
}

impl AccessModes {
    pub fn memory_ratio(&self) -> f64 {
        self.streaming.peak_bytes as f64 / self.whole.peak_bytes.max(1) as f64
    }
}

fn count_whole(path: &Path) -> Result<BTreeMap<String, usize>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let doc = parse_document(&text)?;
    let mut counts = BTreeMap::new();
    count_geometry_types(doc.city_objects.values(), &mut counts);
    Ok(counts)
}

fn count_streaming(path: &Path) -> Result<BTreeMap<String, usize>> {
    let rs = read_stream(BufReader::new(File::open(path)?))?;
    Ok(stream_stats(rs.stream.features)?.geometry_type_counts)
}

fn measure(
    probe: &dyn MemoryProbe,
    repeats: usize,
    run: impl Fn() -> Result<BTreeMap<String, usize>>,
) -> Result<ModeResult> {
    let mut best = Duration::MAX;
    let mut peak = 0;
    let mut counts = BTreeMap::new();
    for _ in 0..repeats.max(1) {
        probe.reset_peak();
        let t = Instant::now();
        counts = run()?;
        best = best.min(t.elapsed());
        peak = peak.max(probe.peak_since_reset());
    }
    Ok(ModeResult {
        peak_bytes: peak,
        elapsed: best,
        geometry_type_counts: counts,
    })
}

/// Counts geometry types twice: by parsing the whole document, and by
/// reading the stream one feature at a time. Elapsed time is the best of
/// `repeats` runs; peak memory is the highest seen.
pub fn bench_access_modes(
    doc_path: &Path,
    stream_path: &Path,
    probe: &dyn MemoryProbe,
    repeats: usize,
) -> Result<AccessModes> {
    let whole = measure(probe, repeats, || count_whole(doc_path))?;
    let streaming = measure(probe, repeats, || count_streaming(stream_path))?;
    if whole.geometry_type_counts != streaming.geometry_type_counts {
        return Err(Error::ModeMismatch {
            whole: format!("{:?}", whole.geometry_type_counts),
            streaming: format!("{:?}", streaming.geometry_type_counts),
        });
    }
    Ok(AccessModes { whole, streaming })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepMode {
    /// One point per building count, disconnected cuboids.
    Random { counts: Vec<usize> },
    /// Fixed building count, one point per target shared fraction.
    Adjacent { n: usize, fractions: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    /// Building count (random mode) or achieved shared fraction (adjacent mode).
    pub parameter: f64,
    pub size_cj_bytes: u64,
    pub size_seq_bytes: u64,
    pub factor: f64,
}

/// Generates each point's dataset and measures both encodings. Points run
/// in parallel; rows come back in input order. `extent` defaults per point
/// to [`default_extent`].
pub fn bench_size_sweep(mode: &SweepMode, extent: Option<f64>, seed: u64) -> Result<Vec<SweepRow>> {
    let row = |parameter: f64, doc: &crate::model::CityJSONDocument| -> Result<SweepRow> {
        let (cj, seq) = encoded_sizes(doc)?;
        Ok(SweepRow {
            parameter,
            size_cj_bytes: cj,
            size_seq_bytes: seq,
            factor: compression_factor(cj, seq)?,
        })
    };
    match mode {
        SweepMode::Random { counts } => counts
            .par_iter()
            .map(|&n| {
                let doc = generate_random(n, extent.unwrap_or_else(|| default_extent(n)), seed)?;
                row(n as f64, &doc)
            })
            .collect(),
        SweepMode::Adjacent { n, fractions } => fractions
            .par_iter()
            .map(|&f| {
                let a = generate_adjacent(*n, extent.unwrap_or_else(|| default_extent(*n)), f, seed)?;
                row(a.achieved_shared_fraction, &a.document)
            })
            .collect(),
    }
}

pub const SWEEP_CSV_HEADER: &str = "parameter,size_cj_bytes,size_seq_bytes,factor";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{:.6}", r.parameter, r.size_cj_bytes, r.size_seq_bytes, r.factor)?;
    }
    Ok(())
}

pub const ACCESS_CSV_HEADER: &str = "mode,peak_bytes,elapsed_s,geometries";

pub fn write_access_csv<W: Write>(m: &AccessModes, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{ACCESS_CSV_HEADER}")?;
    for (name, r) in [("whole", &m.whole), ("streaming", &m.streaming)] {
        let total: usize = r.geometry_type_counts.values().sum();
        writeln!(w, "{name},{},{:.6},{total}", r.peak_bytes, r.elapsed.as_secs_f64())?;
    }
    Ok(())
}

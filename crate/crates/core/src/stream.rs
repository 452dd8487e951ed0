//! Newline-delimited reading and writing of CityJSONSeq.

use std::borrow::Borrow;
use std::io::{self, BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{parse_header, CityJSONFeature, StreamHeader};
use crate::sequencer::FeatureStream;

/// Writes `value` as one compact JSON line terminated by LF. Compact JSON
/// escapes control characters inside strings, so the line holds no raw LF or CR.
pub fn write_json_line<W: Write + ?Sized, T: Serialize + ?Sized>(w: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *w, value).map_err(io::Error::from)?;
    w.write_all(b"\n")
}

/// Something that can be written as one stream line.
pub trait WriteLine {
    fn write_line(&self, w: &mut dyn Write) -> io::Result<()>;
}

impl WriteLine for CityJSONFeature {
    fn write_line(&self, w: &mut dyn Write) -> io::Result<()> {
        write_json_line(w, self)
    }
}

impl WriteLine for StreamHeader {
    fn write_line(&self, w: &mut dyn Write) -> io::Result<()> {
        write_json_line(w, self)
    }
}

/// A feature read from a stream, with its original bytes kept for verbatim output.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureLine {
    /// 1-based line number in the input.
    pub line: usize,
    pub raw: String,
    pub feature: CityJSONFeature,
}

impl WriteLine for FeatureLine {
    fn write_line(&self, w: &mut dyn Write) -> io::Result<()> {
        w.write_all(self.raw.as_bytes())?;
        w.write_all(b"\n")
    }
}

impl Borrow<CityJSONFeature> for FeatureLine {
    fn borrow(&self) -> &CityJSONFeature {
        &self.feature
    }
}

impl From<FeatureLine> for CityJSONFeature {
    fn from(l: FeatureLine) -> Self {
        l.feature
    }
}

impl<T: WriteLine + ?Sized> WriteLine for &T {
    fn write_line(&self, w: &mut dyn Write) -> io::Result<()> {
        (**self).write_line(w)
    }
}

/// Drops a trailing CR and leading CR (allowed before each object).
pub(crate) fn trim_cr(line: &str) -> &str {
    let line = line.strip_suffix('\r').unwrap_or(line);
    line.strip_prefix('\r').unwrap_or(line)
}

/// Line reader shared by the header and the features.
struct Lines<R> {
    reader: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    /// Next non-blank line, CRs removed. Returns its 1-based number.
    fn next_line(&mut self) -> Option<Result<(usize, String)>> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::Io(e).at_line(self.line + 1))),
            }
            self.line += 1;
            let s = self.buf.strip_suffix('\n').unwrap_or(&self.buf);
            let s = trim_cr(s);
            if !s.trim().is_empty() {
                return Some(Ok((self.line, s.to_string())));
            }
        }
    }
}

/// Iterator over the features of a stream. Each item is parsed and checked
/// on its own; nothing else is retained between items.
pub struct FeatureLines<R> {
    lines: Lines<R>,
    templates: usize,
}

impl<R: BufRead> Iterator for FeatureLines<R> {
    type Item = Result<FeatureLine>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, raw) = match self.lines.next_line()? {
            Ok(x) => x,
            Err(e) => return Some(Err(e)),
        };
        Some(
            crate::model::parse_feature(&raw, Some(self.templates))
                .map(|feature| FeatureLine { line, raw, feature })
                .map_err(|e| e.at_line(line)),
        )
    }
}

/// A stream read from text: the parsed header, its original line, and the
/// remaining features.
pub struct ReadStream<R> {
    pub header_raw: String,
    pub stream: FeatureStream<FeatureLines<R>>,
}

/// Reads the header line and returns a lazy iterator over the features.
/// Errors carry the offending line number.
pub fn read_stream<R: BufRead>(reader: R) -> Result<ReadStream<R>> {
    let mut lines = Lines {
        reader,
        line: 0,
        buf: String::new(),
    };
    let (line, raw) = lines.next_line().ok_or(Error::EmptyStream)??;
    let header = parse_header(&raw).map_err(|e| e.at_line(line))?;
    let templates = header.template_count();
    Ok(ReadStream {
        header_raw: raw,
        stream: FeatureStream::new(header, FeatureLines { lines, templates }),
    })
}

impl<I, T> FeatureStream<I>
where
    I: Iterator<Item = Result<T>>,
    T: WriteLine,
{
    /// Writes the header then each feature, one line each. Returns the number of features written.
    pub fn write_to<W: Write>(self, w: &mut W) -> Result<usize> {
        self.header.write_line(w)?;
        write_features(self.features, w)
    }
}

/// Writes features one line each, stopping at the first error.
pub fn write_features<W, I, T>(features: I, w: &mut W) -> Result<usize>
where
    W: Write,
    I: IntoIterator<Item = Result<T>>,
    T: WriteLine,
{
    let mut n = 0;
    for f in features {
        f?.write_line(w)?;
        n += 1;
    }
    Ok(n)
}

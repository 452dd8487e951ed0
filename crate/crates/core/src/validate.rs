//! Conformance checking of CityJSONSeq text against the five stream rules,
//! header emptiness and per-feature structure.

use std::collections::VecDeque;
use std::fmt;
use std::io::BufRead;

use serde::Serialize;

use crate::error::Error;
use crate::model::{CityJSONFeature, ObjectParts, StreamHeader, CITYJSON, CITYJSON_FEATURE};

/// Objects split across more lines than this are reported as malformed JSON.
const MAX_JOINED_LINES: usize = 256;

/// Rule ids used in reports.
pub mod rule {
    /// JSON text in UTF-8.
    pub const JSON: &str = "1";
    /// Every object followed by LF.
    pub const TERMINATOR: &str = "2";
    /// No LF or CR inside an object.
    pub const NO_NEWLINE: &str = "3";
    /// First object is a CityJSON header.
    pub const HEADER: &str = "4";
    pub const HEADER_TRANSFORM: &str = "4.transform";
    pub const HEADER_EMPTY: &str = "4.empty";
    /// Later objects are CityJSONFeature.
    pub const FEATURE_TYPE: &str = "5";
    /// Structural problem inside a feature.
    pub const FEATURE: &str = "feature";
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub line: usize,
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: rule {}: {}", self.line, self.rule, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub lines: usize,
    pub features: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn rules(&self) -> Vec<&'static str> {
        self.violations.iter().map(|v| v.rule).collect()
    }

    fn push(&mut self, line: usize, rule: &'static str, message: impl Into<String>) {
        self.violations.push(Violation {
            line,
            rule,
            message: message.into(),
        });
    }
}

struct RawLine {
    number: usize,
    bytes: Vec<u8>,
    terminated: bool,
}

struct Reader<R> {
    inner: R,
    number: usize,
    lookahead: VecDeque<RawLine>,
}

impl<R: BufRead> Reader<R> {
    fn read(&mut self) -> std::io::Result<Option<RawLine>> {
        if let Some(l) = self.lookahead.pop_front() {
            return Ok(Some(l));
        }
        let mut bytes = Vec::new();
        if self.inner.read_until(b'\n', &mut bytes)? == 0 {
            return Ok(None);
        }
        self.number += 1;
        let terminated = bytes.last() == Some(&b'\n');
        if terminated {
            bytes.pop();
        }
        Ok(Some(RawLine {
            number: self.number,
            bytes,
            terminated,
        }))
    }
}

fn strip_cr(b: &[u8]) -> &[u8] {
    let b = b.strip_suffix(b"\r").unwrap_or(b);
    b.strip_prefix(b"\r").unwrap_or(b)
}

struct State {
    report: ValidationReport,
    objects: usize,
    templates: Option<usize>,
}

impl State {
    fn object(&mut self, line: usize, parts: ObjectParts) {
        self.objects += 1;
        if self.objects == 1 {
            if parts.kind.as_deref() != Some(CITYJSON) {
                self.report.push(
                    line,
                    rule::HEADER,
                    format!("first object must be of type CityJSON, found {:?}", parts.kind),
                );
                return;
            }
            match StreamHeader::from_parts(parts) {
                Ok(h) => self.templates = Some(h.template_count()),
                Err(e) => {
                    let r = match e {
                        Error::MissingTransform | Error::InvalidTransform(_) => rule::HEADER_TRANSFORM,
                        Error::HeaderNotEmpty | Error::HeaderIncomplete => rule::HEADER_EMPTY,
                        _ => rule::HEADER,
                    };
                    self.report.push(line, r, e.to_string());
                }
            }
            return;
        }
        if parts.kind.as_deref() != Some(CITYJSON_FEATURE) {
            self.report.push(
                line,
                rule::FEATURE_TYPE,
                format!("object must be of type CityJSONFeature, found {:?}", parts.kind),
            );
            return;
        }
        self.report.features += 1;
        let checked = CityJSONFeature::from_parts(parts).and_then(|f| f.validate(self.templates));
        if let Err(e) = checked {
            self.report.push(line, rule::FEATURE, e.to_string());
        }
    }
}

fn is_eof(e: &serde_json::Error) -> bool {
    e.classify() == serde_json::error::Category::Eof
}

/// Checks a CityJSONSeq stream. Never fails: every problem, including I/O
/// errors, becomes a report entry.
pub fn validate_stream<R: BufRead>(reader: R) -> ValidationReport {
    let mut r = Reader {
        inner: reader,
        number: 0,
        lookahead: VecDeque::new(),
    };
    let mut st = State {
        report: ValidationReport::default(),
        objects: 0,
        templates: None,
    };
    loop {
        let line = match r.read() {
            Ok(Some(l)) => l,
            Ok(None) => break,
            Err(e) => {
                st.report.push(r.number + 1, rule::JSON, format!("read error: {e}"));
                break;
            }
        };
        let n = line.number;
        let body = strip_cr(&line.bytes);
        if body.iter().all(u8::is_ascii_whitespace) {
            if line.terminated || !body.is_empty() {
                st.report.push(n, rule::TERMINATOR, "empty line between objects");
            }
            continue;
        }
        if !line.terminated {
            st.report.push(n, rule::TERMINATOR, "object is not followed by LF");
        }
        let text = match std::str::from_utf8(body) {
            Ok(t) => t,
            Err(e) => {
                st.report.push(n, rule::JSON, format!("invalid UTF-8: {e}"));
                continue;
            }
        };
        if text.contains('\r') {
            st.report.push(n, rule::NO_NEWLINE, "CR inside an object");
        }
        match serde_json::from_str::<ObjectParts>(text) {
            Ok(p) => st.object(n, p),
            Err(e) if is_eof(&e) => match join_split_object(&mut r, text) {
                Some((p, last)) => {
                    st.report.push(
                        n,
                        rule::NO_NEWLINE,
                        format!("object continues over lines {n}-{last}"),
                    );
                    st.object(n, p);
                }
                None => st.report.push(n, rule::JSON, e.to_string()),
            },
            Err(e) => st.report.push(n, rule::JSON, e.to_string()),
        }
    }
    st.report.lines = r.number;
    if st.objects == 0 {
        st.report.push(1, rule::HEADER, "stream is empty: the first object must be of type CityJSON");
    }
    st.report
}

/// Tries to complete an object by appending following lines. On success the
/// lines are consumed; otherwise they are put back.
fn join_split_object<R: BufRead>(r: &mut Reader<R>, first: &str) -> Option<(ObjectParts, usize)> {
    let mut text = first.to_string();
    let mut taken = Vec::new();
    while taken.len() < MAX_JOINED_LINES {
        let Ok(Some(l)) = r.read() else { break };
        text.push('\n');
        text.push_str(&String::from_utf8_lossy(&l.bytes));
        taken.push(l);
        match serde_json::from_str::<ObjectParts>(&text) {
            Ok(p) => return Some((p, taken.last().unwrap().number)),
            Err(e) if is_eof(&e) => continue,
            Err(_) => break,
        }
    }
    for l in taken.into_iter().rev() {
        r.lookahead.push_front(l);
    }
    None
}

//! Tab-separated edge streams: `src<TAB>dst<TAB>label<TAB>weight`.
//!
//! Vertices may be unsigned integers or arbitrary strings; strings are
//! mapped to a stable 64-bit identifier. Labels are either all numeric
//! (used as indices directly) or symbolic, resolved through a
//! [`LabelDictionary`].

use std::fs::File;
use std::hash::Hasher;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::sketch::EdgeEvent;
use crate::VertexId;

/// Bytes of the canonical binary event encoding: two 64-bit vertex ids, a
/// 16-bit label and a 64-bit weight. Used as the stream size when turning a
/// sketch-size factor into a memory budget.
pub const CANONICAL_EVENT_BYTES: usize = 8 + 8 + 2 + 8;

pub fn stream_byte_size(num_events: usize) -> usize {
    num_events * CANONICAL_EVENT_BYTES
}

/// Numeric vertex identifiers are used as-is, anything else is hashed.
pub fn parse_vertex(token: &str) -> VertexId {
    token.parse::<u64>().unwrap_or_else(|_| {
        let mut h = FnvHasher::default();
        h.write(token.as_bytes());
        h.finish()
    })
}

/// Label name to matrix index, in index order.
///
/// Serialized as a JSON object from name to index; indices must be exactly
/// `0..len`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IndexMap<String, u16>", into = "IndexMap<String, u16>")]
pub struct LabelDictionary {
    names: IndexMap<String, u16>,
}

impl TryFrom<IndexMap<String, u16>> for LabelDictionary {
    type Error = String;

    fn try_from(mut names: IndexMap<String, u16>) -> std::result::Result<Self, String> {
        names.sort_by(|_, a, _, b| a.cmp(b));
        for (i, (name, &index)) in names.iter().enumerate() {
            if index as usize != i {
                return Err(format!("label {name:?} has index {index}, expected indices 0..{}", names.len()));
            }
        }
        Ok(Self { names })
    }
}

impl From<LabelDictionary> for IndexMap<String, u16> {
    fn from(d: LabelDictionary) -> Self {
        d.names
    }
}

impl LabelDictionary {
    /// `"0"`, `"1"`, ... `n - 1`.
    pub fn numeric(n: usize) -> Self {
        Self::from_names((0..n).map(|i| i.to_string()))
    }

    pub fn from_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let mut dict = Self::default();
        for n in names {
            dict.intern(&n.into());
        }
        dict
    }

    fn intern(&mut self, name: &str) -> u16 {
        let next = self.names.len() as u16;
        *self.names.entry(name.to_string()).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<u16> {
        self.names.get(name).copied()
    }

    pub fn name_of(&self, index: u16) -> Option<&str> {
        self.names.get_index(index as usize).map(|(k, _)| k.as_str())
    }

    /// Resolves a label token: dictionary names first, then a plain index
    /// below the dictionary size.
    pub fn resolve(&self, token: &str) -> Option<u16> {
        self.index_of(token).or_else(|| {
            token
                .parse::<u16>()
                .ok()
                .filter(|&i| (i as usize) < self.len())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }
}

/// Where to read a stream from and how to resolve its labels.
#[derive(Clone, Debug)]
pub struct StreamSource {
    pub path: PathBuf,
    /// Strict mode: every label must be in this dictionary. Without one the
    /// dictionary is built in a pre-pass.
    pub dictionary: Option<LabelDictionary>,
    pub event_cap: Option<usize>,
}

impl StreamSource {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            dictionary: None,
            event_cap: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedStream {
    pub events: Vec<EdgeEvent>,
    pub labels: LabelDictionary,
}

pub fn load_stream(source: &StreamSource) -> Result<LoadedStream> {
    let reader = BufReader::new(File::open(&source.path)?);
    read_stream(reader, source.dictionary.as_ref(), source.event_cap)
}

struct RawEvent {
    src: VertexId,
    dst: VertexId,
    label: usize,
    weight: f64,
    line: usize,
}

fn split_fields(line: &str) -> Vec<&str> {
    let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
    if fields.len() >= 3 {
        fields
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses a stream. Events keep file order; errors carry 1-based line numbers.
pub fn read_stream<R: BufRead>(reader: R, dictionary: Option<&LabelDictionary>, event_cap: Option<usize>) -> Result<LoadedStream> {
    let mut raw = Vec::new();
    let mut tokens: IndexMap<String, ()> = IndexMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = split_fields(trimmed);
        if !(3..=4).contains(&fields.len()) {
            return Err(SketchError::Parse {
                line: line_no,
                message: format!("expected 3 or 4 fields, found {}", fields.len()),
            });
        }
        let weight = match fields.get(3) {
            None => 1.0,
            Some(w) => w.parse::<f64>().ok().filter(|w| w.is_finite() && *w >= 0.0).ok_or_else(|| SketchError::Parse {
                line: line_no,
                message: format!("invalid weight {w:?}"),
            })?,
        };
        if let Some(cap) = event_cap {
            if raw.len() >= cap {
                return Err(SketchError::EventCapExceeded { cap });
            }
        }
        let (label, _) = tokens.insert_full(fields[2].to_string(), ());
        raw.push(RawEvent {
            src: parse_vertex(fields[0]),
            dst: parse_vertex(fields[1]),
            label,
            weight,
            line: line_no,
        });
    }

    let (labels, mapping): (LabelDictionary, Vec<Option<u16>>) = match dictionary {
        Some(dict) => (dict.clone(), tokens.keys().map(|t| dict.resolve(t)).collect()),
        None => {
            let numeric: Option<Vec<u16>> = tokens.keys().map(|t| t.parse::<u16>().ok()).collect();
            match numeric {
                Some(indices) => {
                    let n = indices.iter().map(|&i| i as usize + 1).max().unwrap_or(0);
                    (LabelDictionary::numeric(n), indices.into_iter().map(Some).collect())
                }
                None => {
                    let dict = LabelDictionary::from_names(tokens.keys().cloned());
                    let mapping = tokens.keys().map(|t| dict.index_of(t)).collect();
                    (dict, mapping)
                }
            }
        }
    };

    let events = raw
        .into_iter()
        .map(|r| {
            let label = mapping[r.label].ok_or_else(|| SketchError::Parse {
                line: r.line,
                message: format!("unknown label {:?}", tokens.get_index(r.label).map(|(k, _)| k).unwrap()),
            })?;
            Ok(EdgeEvent::new(r.src, r.dst, label, r.weight))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedStream { events, labels })
}

/// Writes events as TSV. Labels are written by name when a dictionary is
/// given, by index otherwise.
pub fn write_stream<W: Write>(out: &mut W, events: &[EdgeEvent], labels: Option<&LabelDictionary>) -> Result<()> {
    for e in events {
        match labels.and_then(|d| d.name_of(e.label)) {
            Some(name) => writeln!(out, "{}\t{}\t{}\t{}", e.src, e.dst, name, e.weight)?,
            None => writeln!(out, "{}\t{}\t{}\t{}", e.src, e.dst, e.label, e.weight)?,
        }
    }
    Ok(())
}

//! Plain-text headers and little-endian float32 payloads.
//!
//! Two layouts share the same header syntax (`key: value` per line):
//!
//! - cubes keep the header and the raw payload in separate files;
//! - feature and model files put the header first, terminated by a line
//!   containing only `end`, immediately followed by the payload bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

const END_MARKER: &str = "end";

/// Ordered `key: value` header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    entries: Vec<(String, String)>,
}

impl Header {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once(':').ok_or_else(|| Error::Header {
                path: path.to_path_buf(),
                reason: format!("line {} is not `key: value`", lineno + 1),
            })?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str, path: &Path) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Header {
            path: path.to_path_buf(),
            reason: format!("missing key `{key}`"),
        })
    }

    pub fn parse_value<T: std::str::FromStr>(&self, key: &str, path: &Path) -> Result<T> {
        let raw = self.require(key, path)?;
        raw.parse().map_err(|_| Error::Header {
            path: path.to_path_buf(),
            reason: format!("cannot parse `{key}` value `{raw}`"),
        })
    }

    pub fn parse_list<T: std::str::FromStr>(&self, key: &str, path: &Path) -> Result<Vec<T>> {
        let raw = self.require(key, path)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| Error::Header {
                    path: path.to_path_buf(),
                    reason: format!("cannot parse `{key}` element `{s}`"),
                })
            })
            .collect()
    }

    pub fn expect(&self, key: &str, value: &str, path: &Path) -> Result<()> {
        let found = self.require(key, path)?;
        if found != value {
            return Err(Error::Header {
                path: path.to_path_buf(),
                reason: format!("unsupported `{key}` `{found}` (expected `{value}`)"),
            });
        }
        Ok(())
    }
}

pub fn encode_f32_le(values: &[f32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 4);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Returns `None` if the byte count is not a multiple of four.
pub fn decode_f32_le(bytes: &[u8]) -> Option<Vec<f32>> {
    if !bytes.len().is_multiple_of(4) {
        return None;
    }
    Some(
        bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect(),
    )
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Header followed by `end` and a float32 payload, in one file.
pub fn write_tagged(path: &Path, header: &Header, payload: &[f32]) -> Result<()> {
    let mut bytes = header.render().into_bytes();
    bytes.extend_from_slice(END_MARKER.as_bytes());
    bytes.push(b'\n');
    bytes.extend_from_slice(&encode_f32_le(payload));
    write_file(path, &bytes)
}

pub fn read_tagged(path: &Path) -> Result<(Header, Vec<f32>)> {
    let bytes = read_file(path)?;
    let mut offset = 0;
    let mut header_end = None;
    while offset < bytes.len() {
        let line_end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| offset + p)
            .unwrap_or(bytes.len());
        if &bytes[offset..line_end] == END_MARKER.as_bytes() {
            header_end = Some((offset, line_end + 1));
            break;
        }
        offset = line_end + 1;
    }
    let (text_end, payload_start) = header_end.ok_or_else(|| Error::Header {
        path: path.to_path_buf(),
        reason: "missing `end` marker".into(),
    })?;
    let text = std::str::from_utf8(&bytes[..text_end]).map_err(|_| Error::Header {
        path: path.to_path_buf(),
        reason: "header is not UTF-8".into(),
    })?;
    let header = Header::parse(text, path)?;
    let payload_bytes = &bytes[payload_start.min(bytes.len())..];
    let payload = decode_f32_le(payload_bytes).ok_or(Error::DimensionMismatch {
        expected: payload_bytes.len() / 4 * 4,
        found: payload_bytes.len(),
    })?;
    Ok((header, payload))
}

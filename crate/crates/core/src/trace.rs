//! Line-oriented trace records.
//!
//! One record per line: `time node kind key=value ...` with the time printed
//! to six decimals and `-` standing in for records that belong to no single
//! node. Values never contain spaces; lists are comma separated.

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub node: Option<NodeId>,
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

impl TraceRecord {
    pub fn new(time: f64, node: Option<NodeId>, kind: &str) -> Self {
        Self {
            time,
            node,
            kind: kind.to_owned(),
            fields: Vec::new(),
        }
    }

    pub fn at(time: f64, node: NodeId, kind: &str) -> Self {
        Self::new(time, Some(node), kind)
    }

    pub fn field(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.fields.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Inverse of `Display`. Returns `None` on malformed lines.
    pub fn parse(line: &str) -> Option<Self> {
        let mut parts = line.split_ascii_whitespace();
        let time: f64 = parts.next()?.parse().ok()?;
        let node = match parts.next()? {
            "-" => None,
            n => Some(NodeId(n.parse().ok()?)),
        };
        let kind = parts.next()?.to_owned();
        let mut fields = Vec::new();
        for kv in parts {
            let (k, v) = kv.split_once('=')?;
            fields.push((k.to_owned(), v.to_owned()));
        }
        Some(Self {
            time,
            node,
            kind,
            fields,
        })
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} ", self.time)?;
        match self.node {
            Some(n) => write!(f, "{n}")?,
            None => f.write_str("-")?,
        }
        write!(f, " {}", self.kind)?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// Comma-joined node list, e.g. `1,4,2`.
pub fn path_string(path: &[NodeId]) -> String {
    let mut s = String::new();
    for (i, n) in path.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&n.to_string());
    }
    s
}

pub fn parse_path(s: &str) -> Option<Vec<NodeId>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|p| p.parse().ok().map(NodeId)).collect()
}

/// Record sink that can be switched off.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    enabled: bool,
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            records: Vec::new(),
        }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    /// Builds the record only when tracing is on.
    pub fn emit(&mut self, make: impl FnOnce() -> TraceRecord) {
        if self.enabled {
            self.records.push(make());
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn extend(&mut self, other: Trace) {
        if self.enabled {
            self.records.extend(other.records);
        }
    }

    pub fn into_records(self) -> Vec<TraceRecord> {
        self.records
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    #[test]
    fn display_and_parse_agree() {
        let r = TraceRecord::at(1.5, NodeId(3), "send")
            .field("dst", NodeId(4))
            .field("path", path_string(&[NodeId(3), NodeId(1), NodeId(4)]));
        let line = format!("{r}");
        assert_eq!(line, "1.500000 3 send dst=4 path=3,1,4");
        assert_eq!(TraceRecord::parse(&line), Some(r));
        let anon = TraceRecord::new(0.0, None, "edge");
        assert_eq!(format!("{anon}"), "0.000000 - edge");
        assert_eq!(TraceRecord::parse("0.000000 - edge"), Some(anon));
        assert_eq!(TraceRecord::parse("nonsense"), None);
    }

    #[test]
    fn disabled_trace_keeps_nothing() {
        let mut t = Trace::new(false);
        t.emit(|| TraceRecord::new(0.0, None, "x"));
        assert!(t.records().is_empty());
    }
}

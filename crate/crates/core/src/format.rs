//! Line-based instance and certificate files.
//!
//! ```text
//! instance clustered k=3
//! # comment
//! item 1/2 cluster=a
//! item 3/10 count=2 cluster=b
//! ```
//!
//! Records are `item <n/d> [count=<int>] [cluster=<id>] [arrive=<n/d>]
//! [delay=linear:<r>|power:<r>,<e>|table:<t1>:<v1>,...]`. Clustered files
//! require `cluster=`, timed files require `arrive=` and `delay=`.
//! [`emit_instance`] writes the normalized form, which parses back to the
//! same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::clustering::ClusteredInstance;
use crate::construction::{Certificate, Kind, Pattern};
use crate::delays::{DelayFunction, TimedItem};
use crate::error::{Error, Result};
use crate::packing::{ClusterId, ItemClass};
use crate::size::{fmt_q, parse_rational, Size, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    Plain,
    Clustered,
    Timed,
}

impl InstanceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InstanceKind::Plain => "plain",
            InstanceKind::Clustered => "clustered",
            InstanceKind::Timed => "timed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Plain(Vec<ItemClass>),
    Clustered(ClusteredInstance),
    Timed(Vec<TimedItem>),
}

impl Instance {
    pub fn kind(&self) -> InstanceKind {
        match self {
            Instance::Plain(_) => InstanceKind::Plain,
            Instance::Clustered(_) => InstanceKind::Clustered,
            Instance::Timed(_) => InstanceKind::Timed,
        }
    }
}

fn at(line: usize, msg: impl Into<Diagnostic>) -> Error {
    Error::Parse(format!("{} at line {line}", msg.into().0))
}

/// Message text without the variant prefix of a wrapped error.
struct Diagnostic(String);

impl From<Error> for Diagnostic {
    fn from(e: Error) -> Self {
        Diagnostic(match e {
            Error::Parse(m) | Error::InvalidArgument(m) => m,
            other => other.to_string(),
        })
    }
}

impl From<String> for Diagnostic {
    fn from(s: String) -> Self {
        Diagnostic(s)
    }
}

impl From<&str> for Diagnostic {
    fn from(s: &str) -> Self {
        Diagnostic(s.to_string())
    }
}

/// Strips comments and blank lines, keeping 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

#[derive(Default)]
struct Record {
    size: Option<Size>,
    count: Option<u64>,
    cluster: Option<String>,
    arrive: Option<Q>,
    delay: Option<DelayFunction>,
}

fn parse_record(line: usize, text: &str) -> Result<Record> {
    let mut words = text.split_whitespace();
    match words.next() {
        Some("item") => {}
        Some(other) => return Err(at(line, format!("unknown record `{other}`"))),
        None => return Err(at(line, "empty record")),
    }
    let size_text = words.next().ok_or_else(|| at(line, "missing size"))?;
    let (value, _) = parse_rational(size_text).map_err(|e| at(line, e))?;
    if value > Q::from_integer(1.into()) {
        return Err(at(line, "size exceeds 1"));
    }
    let size = Size::new(value).map_err(|e| at(line, e))?;
    let mut rec = Record {
        size: Some(size),
        ..Record::default()
    };
    for word in words {
        let (key, val) = word
            .split_once('=')
            .ok_or_else(|| at(line, format!("expected key=value, found `{word}`")))?;
        let dup = || at(line, format!("duplicate field `{key}`"));
        match key {
            "count" => {
                let c: u64 = val.parse().map_err(|_| at(line, format!("malformed count `{val}`")))?;
                if c == 0 {
                    return Err(at(line, "count must be positive"));
                }
                if rec.count.replace(c).is_some() {
                    return Err(dup());
                }
            }
            "cluster" => {
                if val.is_empty() {
                    return Err(at(line, "empty cluster id"));
                }
                if rec.cluster.replace(val.to_string()).is_some() {
                    return Err(dup());
                }
            }
            "arrive" => {
                let (a, _) = parse_rational(val).map_err(|e| at(line, e))?;
                if a < Q::from_integer(0.into()) {
                    return Err(at(line, "negative arrival time"));
                }
                if rec.arrive.replace(a).is_some() {
                    return Err(dup());
                }
            }
            "delay" => {
                let d: DelayFunction = val.parse().map_err(|e| at(line, e))?;
                if rec.delay.replace(d).is_some() {
                    return Err(dup());
                }
            }
            _ => return Err(at(line, format!("unknown field `{key}`"))),
        }
    }
    Ok(rec)
}

fn parse_header(line: usize, text: &str) -> Result<(InstanceKind, Option<u64>)> {
    let mut words = text.split_whitespace();
    if words.next() != Some("instance") {
        return Err(at(line, "expected header `instance <plain|clustered|timed> [k=<int>]`"));
    }
    let kind = match words.next() {
        Some("plain") => InstanceKind::Plain,
        Some("clustered") => InstanceKind::Clustered,
        Some("timed") => InstanceKind::Timed,
        Some(other) => return Err(at(line, format!("unknown instance kind `{other}`"))),
        None => return Err(at(line, "missing instance kind")),
    };
    let mut k = None;
    for word in words {
        match word.split_once('=') {
            Some(("k", v)) => {
                k = Some(v.parse().map_err(|_| at(line, format!("malformed k `{v}`")))?);
            }
            _ => return Err(at(line, format!("unexpected header field `{word}`"))),
        }
    }
    if k.is_some() && kind != InstanceKind::Clustered {
        return Err(at(line, "k= is only valid for clustered instances"));
    }
    Ok((kind, k))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = content_lines(text);
    let (hline, htext) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file: missing header".into()))?;
    let (kind, k) = parse_header(hline, htext)?;
    let mut classes = Vec::new();
    let mut timed = Vec::new();
    for (line, text) in lines {
        let rec = parse_record(line, text)?;
        let size = rec.size.expect("parsed");
        let count = rec.count.unwrap_or(1);
        match kind {
            InstanceKind::Plain | InstanceKind::Clustered => {
                if rec.arrive.is_some() || rec.delay.is_some() {
                    return Err(at(line, format!("arrive/delay not allowed in {} files", kind.as_str())));
                }
                if kind == InstanceKind::Clustered && rec.cluster.is_none() {
                    return Err(at(line, "missing required field cluster"));
                }
                if kind == InstanceKind::Plain && rec.cluster.is_some() {
                    return Err(at(line, "cluster not allowed in plain files"));
                }
                classes.push(ItemClass {
                    size,
                    count,
                    cluster: rec.cluster,
                    label: String::new(),
                });
            }
            InstanceKind::Timed => {
                let arrive = rec.arrive.ok_or_else(|| at(line, "missing required field arrive"))?;
                let delay = rec.delay.ok_or_else(|| at(line, "missing required field delay"))?;
                if rec.cluster.is_some() {
                    return Err(at(line, "cluster not allowed in timed files"));
                }
                if let Some(prev) = timed.last().map(|t: &TimedItem| &t.arrival) {
                    if &arrive < prev {
                        return Err(at(line, "arrival times must be non-decreasing"));
                    }
                }
                for _ in 0..count {
                    let index = timed.len();
                    timed.push(TimedItem::new(index, size.clone(), arrive.clone(), delay.clone()));
                }
            }
        }
    }
    Ok(match kind {
        InstanceKind::Plain => Instance::Plain(classes),
        InstanceKind::Clustered => {
            let k = k.unwrap_or(1);
            Instance::Clustered(ClusteredInstance::from_classes(k, classes)?)
        }
        InstanceKind::Timed => Instance::Timed(timed),
    })
}

fn item_line(out: &mut String, size: &Size, count: u64, cluster: Option<&str>) {
    out.push_str("item ");
    out.push_str(&size.to_string());
    if count != 1 {
        let _ = write!(out, " count={count}");
    }
    if let Some(c) = cluster {
        let _ = write!(out, " cluster={c}");
    }
}

/// Normalized text: header, then one record per class (one per item for
/// timed files), clusters in order.
pub fn emit_instance(inst: &Instance) -> String {
    let mut out = String::new();
    match inst {
        Instance::Plain(classes) => {
            out.push_str("instance plain\n");
            for c in classes {
                item_line(&mut out, &c.size, c.count, None);
                out.push('\n');
            }
        }
        Instance::Clustered(ci) => {
            let _ = writeln!(out, "instance clustered k={}", ci.k);
            for cluster in &ci.clusters {
                for c in &cluster.classes {
                    item_line(&mut out, &c.size, c.count, Some(&cluster.id));
                    out.push('\n');
                }
            }
        }
        Instance::Timed(items) => {
            out.push_str("instance timed\n");
            for it in items {
                item_line(&mut out, &it.item.size, 1, None);
                let _ = writeln!(out, " arrive={} delay={}", fmt_q(&it.arrival), it.delay);
            }
        }
    }
    out
}

/// Certificate sidecar: kinds with sizes, bin patterns with multiplicities,
/// and predicted per-cluster optima.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateFile {
    pub certificate: Certificate,
    pub predicted: Vec<(ClusterId, u64)>,
}

pub fn emit_certificate(file: &CertificateFile) -> String {
    let cert = &file.certificate;
    let mut out = String::new();
    let _ = writeln!(out, "certificate bins={}", cert.bin_count());
    for (kind, size) in &cert.kinds {
        let _ = writeln!(out, "kind {} {size}", kind.code());
    }
    for p in &cert.patterns {
        let _ = write!(out, "pattern {}", p.multiplicity);
        for (kind, count) in &p.parts {
            let _ = write!(out, " {}*{count}", kind.code());
        }
        out.push('\n');
    }
    for (id, cost) in &file.predicted {
        let _ = writeln!(out, "predicted {id} {cost}");
    }
    out
}

pub fn parse_certificate(text: &str) -> Result<CertificateFile> {
    let mut lines = content_lines(text);
    let (hline, htext) = lines.next().ok_or_else(|| Error::Parse("empty certificate".into()))?;
    let mut head = htext.split_whitespace();
    if head.next() != Some("certificate") {
        return Err(at(hline, "expected header `certificate`"));
    }
    let declared: Option<u64> = match head.next() {
        Some(w) => match w.strip_prefix("bins=") {
            Some(v) => Some(v.parse().map_err(|_| at(hline, format!("malformed bins `{v}`")))?),
            None => return Err(at(hline, format!("unexpected header field `{w}`"))),
        },
        None => None,
    };
    let mut kinds = BTreeMap::new();
    let mut patterns = Vec::new();
    let mut predicted = Vec::new();
    for (line, text) in lines {
        let words: Vec<&str> = text.split_whitespace().collect();
        match words.as_slice() {
            ["kind", code, size] => {
                let kind: Kind = code.parse().map_err(|e| at(line, e))?;
                let (value, _) = parse_rational(size).map_err(|e| at(line, e))?;
                let size = Size::new(value).map_err(|e| at(line, e))?;
                if kinds.insert(kind, size).is_some() {
                    return Err(at(line, format!("duplicate kind `{code}`")));
                }
            }
            ["pattern", mult, parts @ ..] => {
                let multiplicity: u64 = mult
                    .parse()
                    .map_err(|_| at(line, format!("malformed multiplicity `{mult}`")))?;
                let mut out = Vec::new();
                for part in parts {
                    let (code, count) = part
                        .split_once('*')
                        .ok_or_else(|| at(line, format!("expected <kind>*<count>, found `{part}`")))?;
                    let kind: Kind = code.parse().map_err(|e| at(line, e))?;
                    let count: u64 = count
                        .parse()
                        .map_err(|_| at(line, format!("malformed count `{count}`")))?;
                    out.push((kind, count));
                }
                if out.is_empty() {
                    return Err(at(line, "empty pattern"));
                }
                patterns.push(Pattern {
                    parts: out,
                    multiplicity,
                });
            }
            ["predicted", id, cost] => {
                let cost: u64 = cost.parse().map_err(|_| at(line, format!("malformed cost `{cost}`")))?;
                predicted.push((id.to_string(), cost));
            }
            _ => return Err(at(line, format!("unrecognised certificate line `{text}`"))),
        }
    }
    let certificate = Certificate { kinds, patterns };
    if let Some(d) = declared {
        if d != certificate.bin_count() {
            return Err(Error::Parse(format!(
                "header declares {d} bins but patterns give {}",
                certificate.bin_count()
            )));
        }
    }
    Ok(CertificateFile { certificate, predicted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::size::{q, qi};

    #[test]
    fn clustered_item() {
        let inst = parse_instance("instance clustered k=3\nitem 1/2 cluster=a\n").unwrap();
        let Instance::Clustered(ci) = inst else { panic!() };
        assert_eq!(ci.k, 3);
        assert_eq!(ci.clusters.len(), 1);
        assert_eq!(ci.clusters[0].item_count(), 1);
    }

    #[test]
    fn timed_count_expands() {
        let inst = parse_instance("instance timed\nitem 3/10 count=2 arrive=0/1 delay=linear:1\n").unwrap();
        let Instance::Timed(items) = inst else { panic!() };
        assert_eq!(items.len(), 2);
        assert_eq!(items[1].item.index, 1);
        assert_eq!(items[0].arrival, qi(0));
        assert_eq!(items[0].delay, DelayFunction::Linear(qi(1)));
    }

    #[test]
    fn oversized_item_reports_line() {
        let err = parse_instance("instance plain\n# note\nitem 5/4\n").unwrap_err();
        assert_eq!(err, Error::Parse("size exceeds 1 at line 3".into()));
    }

    #[test]
    fn missing_fields() {
        let err = parse_instance("instance clustered\nitem 1/2\n").unwrap_err();
        assert!(err.to_string().contains("cluster at line 2"));
        let err = parse_instance("instance timed\nitem 1/2 arrive=0\n").unwrap_err();
        assert!(err.to_string().contains("delay at line 2"));
        assert!(parse_instance("instance plain\nitem 1/0\n").is_err());
        assert!(parse_instance("").is_err());
        assert!(parse_instance("instance plain\nitem 1/2 colour=red\n").is_err());
    }

    #[test]
    fn normalizes_rationals() {
        let inst = parse_instance("instance plain\nitem 2/4 count=1 # half\n").unwrap();
        assert_eq!(emit_instance(&inst), "instance plain\nitem 1/2\n");
    }

    #[test]
    fn round_trip_examples() {
        for text in [
            "instance plain\nitem 1/2 count=3\nitem 0/1\nitem 1/1\n",
            "instance clustered k=3\nitem 51/100 count=2 cluster=a\nitem 49/100 cluster=b\n",
            "instance timed\nitem 3/10 arrive=0/1 delay=linear:1/1\nitem 1/5 arrive=1/2 delay=power:2/1,1/2\nitem 0/1 arrive=3/1 delay=table:1/1:1/10,2/1:1/1\n",
        ] {
            let inst = parse_instance(text).unwrap();
            assert_eq!(emit_instance(&inst), text);
        }
    }

    #[test]
    fn certificate_round_trip() {
        let mut kinds = BTreeMap::new();
        kinds.insert(Kind::Pos2(1), Size::new(q(1, 2) + q(1, 100)).unwrap());
        kinds.insert(Kind::Neg2(1), Size::new(q(1, 2) - q(1, 100)).unwrap());
        let file = CertificateFile {
            certificate: Certificate {
                kinds,
                patterns: vec![Pattern {
                    parts: vec![(Kind::Pos2(1), 1), (Kind::Neg2(1), 1)],
                    multiplicity: 2,
                }],
            },
            predicted: vec![("f2-1".into(), 3)],
        };
        let text = emit_certificate(&file);
        assert_eq!(parse_certificate(&text).unwrap(), file);
        assert!(parse_certificate(&text.replace("bins=2", "bins=3")).is_err());
    }
}

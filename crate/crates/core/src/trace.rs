//! Simulation trace: one record per line,
//! `<time> <EVENT> <node> <peer|-> <orig:seq|-> <size> <group>`.
//!
//! `size` is the frame length for link events (SEND, RECV, DROP_*) and the
//! payload length for ORIG/DELIVER. `group` is always the group of `node`.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::packet::{MsgId, NodeId};
use crate::policy::GroupId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceEvent {
    /// Node registration at simulation start.
    Node,
    /// A policied message authored by `node`.
    Orig,
    /// A plain (baseline) message authored by `node`.
    OrigPlain,
    Send,
    Recv,
    DropDup,
    DropMalformed,
    Deliver,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::Node => "NODE",
            TraceEvent::Orig => "ORIG",
            TraceEvent::OrigPlain => "ORIG_PLAIN",
            TraceEvent::Send => "SEND",
            TraceEvent::Recv => "RECV",
            TraceEvent::DropDup => "DROP_DUP",
            TraceEvent::DropMalformed => "DROP_MALFORMED",
            TraceEvent::Deliver => "DELIVER",
        }
    }

    pub fn is_origination(self) -> bool {
        matches!(self, TraceEvent::Orig | TraceEvent::OrigPlain)
    }
}

impl FromStr for TraceEvent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "NODE" => TraceEvent::Node,
            "ORIG" => TraceEvent::Orig,
            "ORIG_PLAIN" => TraceEvent::OrigPlain,
            "SEND" => TraceEvent::Send,
            "RECV" => TraceEvent::Recv,
            "DROP_DUP" => TraceEvent::DropDup,
            "DROP_MALFORMED" => TraceEvent::DropMalformed,
            "DELIVER" => TraceEvent::Deliver,
            other => return Err(format!("unknown trace event `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub event: TraceEvent,
    pub node: NodeId,
    pub peer: Option<NodeId>,
    pub msg: Option<MsgId>,
    pub size: usize,
    pub group: GroupId,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9} {} {} ", self.time, self.event.as_str(), self.node)?;
        match self.peer {
            Some(p) => write!(f, "{p} ")?,
            None => f.write_str("- ")?,
        }
        match self.msg {
            Some(m) => write!(f, "{m} ")?,
            None => f.write_str("- ")?,
        }
        write!(f, "{} {}", self.size, self.group)
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("trace i/o: {0}")]
    Io(#[from] io::Error),
}

impl FromStr for TraceRecord {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 7 {
            return Err(format!("expected 7 fields, found {}", toks.len()));
        }
        let num = |tok: &str, what: &str| {
            tok.parse::<u32>()
                .map_err(|e| format!("bad {what} `{tok}`: {e}"))
        };
        let time: f64 = toks[0]
            .parse()
            .map_err(|e| format!("bad time `{}`: {e}", toks[0]))?;
        Ok(TraceRecord {
            time,
            event: toks[1].parse()?,
            node: NodeId(num(toks[2], "node")?),
            peer: match toks[3] {
                "-" => None,
                p => Some(NodeId(num(p, "peer")?)),
            },
            msg: match toks[4] {
                "-" => None,
                m => Some(m.parse()?),
            },
            size: toks[5]
                .parse()
                .map_err(|e| format!("bad size `{}`: {e}", toks[5]))?,
            group: GroupId(
                toks[6]
                    .parse()
                    .map_err(|e| format!("bad group `{}`: {e}", toks[6]))?,
            ),
        })
    }
}

/// Append-only record of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter()
    }

    pub fn of_kind(&self, event: TraceEvent) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.event == event)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            writeln!(out, "{r}")?;
        }
        out.flush()
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("trace text is ASCII")
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(io::BufWriter::new(file))
    }

    pub fn parse(text: &str) -> Result<Trace, TraceError> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.parse().map_err(|reason| TraceError::Parse {
                    line: i + 1,
                    reason,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Trace { records })
    }

    pub fn load(path: &Path) -> Result<Trace, TraceError> {
        Trace::parse(&std::fs::read_to_string(path)?)
    }
}

impl FromIterator<TraceRecord> for Trace {
    fn from_iter<I: IntoIterator<Item = TraceRecord>>(iter: I) -> Self {
        Trace {
            records: iter.into_iter().collect(),
        }
    }
}
